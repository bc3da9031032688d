//! Free graded modules over `C[P]/(K)` with monodromy stored in log
//! coordinates: each generator class carries a degree in `P^gp ⊗ Q(i)` and,
//! per direction, a label and a nilpotent matrix standing for
//! `e(label) · exp(2πi N)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{Matrix, Scalar};
use crate::monoid::lattice::IntVec;
use crate::monoid::{AffineMonoid, MonoidIdeal};
use crate::rh::MonomialMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpkError {
    #[error("objects live on different models")]
    ModelMismatch,
    #[error("invalid object: {0}")]
    InvalidObject(String),
}

/// Monodromy of one class in one direction: `e(label) · exp(2πi nilpotent)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogOperator {
    pub label: Scalar,
    pub nilpotent: Matrix,
}

/// A block of generators sharing one degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorClass {
    pub degree: Vec<Scalar>,
    pub dim: usize,
    pub monodromy: Vec<LogOperator>,
}

/// Entry `coefficient · x^exponent` of the log monodromy in `direction`,
/// sending generator `from` to generator `to` (global generator indices).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coupling {
    pub direction: usize,
    pub from: usize,
    pub to: usize,
    pub coefficient: Scalar,
    pub exponent: IntVec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LObject {
    pub monoid: AffineMonoid,
    pub ideal: MonoidIdeal,
    pub classes: Vec<GeneratorClass>,
    pub couplings: Vec<Coupling>,
    /// Columns express the generators in the trivializing basis used by the
    /// Riemann-Hilbert functor. Identity unless the object came from a connection.
    pub frame: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AxiomViolation {
    Shape(String),
    NotNilpotent { class: usize, direction: usize },
    LabelMismatch { class: usize, direction: usize },
    HomogeneityViolation { coupling: usize, reason: String },
    NonCommuting { first: usize, second: usize },
    NonUnipotentBlock { direction: usize, generators: Vec<usize> },
    SingularFrame,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The graded piece `V_λ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedPiece {
    pub degree: Vec<Scalar>,
    pub dimension: usize,
    /// Generators `j` contributing `x^{λ-λ_j} b_j`.
    pub members: Vec<usize>,
    pub operators: Vec<PieceOperator>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PieceOperator {
    /// Whether `e(λ_k) = 1`.
    pub in_z: bool,
    pub matrix: Matrix,
}

/// The integer vector equal to `v`, if every entry is a rational integer.
pub fn integral_vector(v: &[Scalar]) -> Option<IntVec> {
    v.iter().map(Scalar::to_i64).collect()
}

pub fn difference(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl GeneratorClass {
    /// A class whose labels equal its degree.
    pub fn new(degree: Vec<Scalar>, nilpotents: Vec<Matrix>) -> Self {
        let dim = nilpotents.first().map_or(1, Matrix::rows);
        let monodromy = degree
            .iter()
            .zip(nilpotents)
            .map(|(label, nilpotent)| LogOperator {
                label: label.clone(),
                nilpotent,
            })
            .collect();
        GeneratorClass {
            degree,
            dim,
            monodromy,
        }
    }
}

impl LObject {
    pub fn new(
        monoid: AffineMonoid,
        ideal: MonoidIdeal,
        classes: Vec<GeneratorClass>,
        couplings: Vec<Coupling>,
    ) -> Self {
        let n = classes.iter().map(|c| c.dim).sum();
        LObject {
            monoid,
            ideal,
            classes,
            couplings,
            frame: Matrix::identity(n),
        }
    }

    pub fn rank(&self) -> usize {
        self.classes.iter().map(|c| c.dim).sum()
    }

    pub fn directions(&self) -> usize {
        self.monoid.ambient_rank()
    }

    /// Index of the first generator of each class.
    pub fn class_offsets(&self) -> Vec<usize> {
        self.classes
            .iter()
            .scan(0, |acc, c| {
                let start = *acc;
                *acc += c.dim;
                Some(start)
            })
            .collect()
    }

    /// Class index of each generator.
    pub fn generator_classes(&self) -> Vec<usize> {
        self.classes
            .iter()
            .enumerate()
            .flat_map(|(i, c)| std::iter::repeat_n(i, c.dim))
            .collect()
    }

    pub fn generator_degree(&self, j: usize) -> &[Scalar] {
        &self.classes[self.generator_classes()[j]].degree
    }

    pub fn same_model(&self, other: &LObject) -> bool {
        self.monoid == other.monoid && self.ideal == other.ideal
    }

    /// `ν_k`: block-diagonal nilpotents plus couplings, as a matrix of monomials.
    pub fn log_operator(&self, k: usize) -> MonomialMatrix {
        let d = self.directions();
        let blocks: Vec<Matrix> = self
            .classes
            .iter()
            .map(|c| c.monodromy[k].nilpotent.clone())
            .collect();
        let mut out = MonomialMatrix::constant_in(d, Matrix::block_diag(&blocks));
        let n = self.rank();
        for c in self.couplings.iter().filter(|c| c.direction == k) {
            let mut m = Matrix::zeros(n, n);
            m.set(c.to, c.from, c.coefficient.clone());
            out = out.add(&MonomialMatrix::monomial(c.exponent.clone(), m));
        }
        out
    }

    /// Rebases each class by `v_c = x^{shift_c} · v'_c` and moves the object to
    /// the given model. Degrees and labels shift by the same amount.
    pub fn shift_classes(
        &self,
        shifts: &[IntVec],
        monoid: AffineMonoid,
        ideal: MonoidIdeal,
    ) -> LObject {
        let gen_class = self.generator_classes();
        let classes = self
            .classes
            .iter()
            .zip(shifts)
            .map(|(c, s)| {
                let add = |v: &Scalar, k: usize| v + &Scalar::from_int(s[k]);
                GeneratorClass {
                    degree: c.degree.iter().enumerate().map(|(k, v)| add(v, k)).collect(),
                    dim: c.dim,
                    monodromy: c
                        .monodromy
                        .iter()
                        .enumerate()
                        .map(|(k, op)| LogOperator {
                            label: add(&op.label, k),
                            nilpotent: op.nilpotent.clone(),
                        })
                        .collect(),
                }
            })
            .collect();
        let couplings = self
            .couplings
            .iter()
            .map(|c| {
                let (sf, st) = (&shifts[gen_class[c.from]], &shifts[gen_class[c.to]]);
                Coupling {
                    exponent: (0..c.exponent.len())
                        .map(|k| c.exponent[k] + sf[k] - st[k])
                        .collect(),
                    ..c.clone()
                }
            })
            .collect();
        LObject {
            monoid,
            ideal,
            classes,
            couplings,
            frame: self.frame.clone(),
        }
    }

    fn vanishes(&self, p: &IntVec) -> bool {
        !self.monoid.contains(p) || self.ideal.contains(&self.monoid, p)
    }

    fn is_unit(&self, p: &[i64]) -> bool {
        let neg: IntVec = p.iter().map(|x| -x).collect();
        self.monoid.contains(p) && self.monoid.contains(&neg)
    }
}

fn shape_violations(v: &LObject) -> Vec<AxiomViolation> {
    let d = v.directions();
    let n = v.rank();
    let mut out = Vec::new();
    for (i, c) in v.classes.iter().enumerate() {
        if c.degree.len() != d {
            out.push(AxiomViolation::Shape(format!("class {i}: degree must have {d} entries")));
        }
        if c.monodromy.len() != d {
            out.push(AxiomViolation::Shape(format!("class {i}: expected {d} monodromy operators")));
        }
        if c.monodromy.iter().any(|op| op.nilpotent.rows() != c.dim || op.nilpotent.cols() != c.dim) {
            out.push(AxiomViolation::Shape(format!("class {i}: nilpotents must be {0}x{0}", c.dim)));
        }
    }
    for (i, c) in v.couplings.iter().enumerate() {
        if c.direction >= d || c.from >= n || c.to >= n || c.exponent.len() != d {
            out.push(AxiomViolation::Shape(format!("coupling {i} is out of range")));
        }
    }
    if v.frame.rows() != n || v.frame.cols() != n {
        out.push(AxiomViolation::Shape(format!("frame must be {n}x{n}")));
    }
    out
}

/// Lists every violated axiom. An empty report means `V` is a legal object.
pub fn check_axioms(v: &LObject) -> AxiomReport {
    let mut violations = shape_violations(v);
    if !violations.is_empty() {
        return AxiomReport { violations };
    }
    let d = v.directions();
    for (i, c) in v.classes.iter().enumerate() {
        for (k, op) in c.monodromy.iter().enumerate() {
            if !op.nilpotent.is_nilpotent() {
                violations.push(AxiomViolation::NotNilpotent { class: i, direction: k });
            }
            if !(&op.label - &c.degree[k]).is_integer() {
                violations.push(AxiomViolation::LabelMismatch { class: i, direction: k });
            }
        }
    }
    for (i, c) in v.couplings.iter().enumerate() {
        let gap = difference(v.generator_degree(c.from), v.generator_degree(c.to));
        let reason = match integral_vector(&gap) {
            None => Some("degree difference is not integral".to_string()),
            Some(g) if g != c.exponent => Some(format!("degree difference {g:?} differs from the exponent")),
            Some(_) if v.vanishes(&c.exponent) => Some("exponent does not lie in P minus K".to_string()),
            Some(_) => None,
        };
        if let Some(reason) = reason {
            violations.push(AxiomViolation::HomogeneityViolation { coupling: i, reason });
        }
    }
    let vanishes = |p: &IntVec| v.ideal.contains(&v.monoid, p);
    let ops: Vec<MonomialMatrix> = (0..d).map(|k| v.log_operator(k)).collect();
    for l in 0..d {
        for k in l + 1..d {
            if !ops[l].commutator(&ops[k], &vanishes).is_zero() {
                violations.push(AxiomViolation::NonCommuting { first: l, second: k });
            }
        }
    }
    for group in unit_groups(v) {
        for (k, op) in ops.iter().enumerate() {
            let m = coefficient_submatrix(op, &group);
            if !m.is_nilpotent() {
                violations.push(AxiomViolation::NonUnipotentBlock {
                    direction: k,
                    generators: group.clone(),
                });
            }
        }
    }
    if v.frame.determinant().map_or(true, |det| det.is_zero()) {
        violations.push(AxiomViolation::SingularFrame);
    }
    AxiomReport { violations }
}

/// Generators grouped by degree modulo units of `P`.
fn unit_groups(v: &LObject) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for j in 0..v.rank() {
        let slot = groups.iter_mut().find(|g| {
            integral_vector(&difference(v.generator_degree(j), v.generator_degree(g[0])))
                .is_some_and(|p| v.is_unit(&p))
        });
        match slot {
            Some(g) => g.push(j),
            None => groups.push(vec![j]),
        }
    }
    groups
}

/// Sum of coefficients of all monomials, restricted to the given index set.
fn coefficient_submatrix(op: &MonomialMatrix, idx: &[usize]) -> Matrix {
    op.terms()
        .fold(Matrix::zeros(idx.len(), idx.len()), |acc, (_, m)| {
            acc.add(&m.submatrix(idx, idx))
        })
}

pub fn graded_piece(v: &LObject, lambda: &[Scalar]) -> GradedPiece {
    let members: Vec<usize> = (0..v.rank())
        .filter(|&j| {
            integral_vector(&difference(lambda, v.generator_degree(j)))
                .is_some_and(|p| !v.vanishes(&p))
        })
        .collect();
    let operators = (0..v.directions())
        .map(|k| {
            let in_z = lambda.get(k).is_some_and(Scalar::is_integer);
            let op = v.log_operator(k);
            // On this piece every monomial entry acts through its coefficient.
            let matrix = op.terms().fold(Matrix::zeros(members.len(), members.len()), |acc, (p, m)| {
                let mut part = m.submatrix(&members, &members);
                for (a, &i) in members.iter().enumerate() {
                    for (b, &j) in members.iter().enumerate() {
                        let gap = integral_vector(&difference(v.generator_degree(j), v.generator_degree(i)));
                        if gap.as_ref() != Some(p) {
                            part.set(a, b, Scalar::zero());
                        }
                    }
                }
                acc.add(&part)
            });
            PieceOperator { in_z, matrix }
        })
        .collect();
    GradedPiece {
        degree: lambda.to_vec(),
        dimension: members.len(),
        members,
        operators,
    }
}

/// Tensor product. Generators are ordered by class pairs `(c, c')`, and
/// within a pair by `(a, b)` lexicographically.
pub fn tensor(v: &LObject, w: &LObject) -> Result<LObject, LpkError> {
    if !v.same_model(w) {
        return Err(LpkError::ModelMismatch);
    }
    let (ov, ow) = (v.class_offsets(), w.class_offsets());
    let nw = w.rank();
    let mut classes = Vec::new();
    // new index of (generator of v, generator of w)
    let mut index = vec![vec![0usize; nw]; v.rank()];
    let mut old_column = Vec::new();
    for (ci, c) in v.classes.iter().enumerate() {
        for (cj, e) in w.classes.iter().enumerate() {
            for a in 0..c.dim {
                for b in 0..e.dim {
                    let (gv, gw) = (ov[ci] + a, ow[cj] + b);
                    index[gv][gw] = old_column.len();
                    old_column.push(gv * nw + gw);
                }
            }
            let monodromy = c
                .monodromy
                .iter()
                .zip(&e.monodromy)
                .map(|(x, y)| LogOperator {
                    label: &x.label + &y.label,
                    nilpotent: x
                        .nilpotent
                        .kron(&Matrix::identity(e.dim))
                        .add(&Matrix::identity(c.dim).kron(&y.nilpotent)),
                })
                .collect();
            classes.push(GeneratorClass {
                degree: c.degree.iter().zip(&e.degree).map(|(x, y)| x + y).collect(),
                dim: c.dim * e.dim,
                monodromy,
            });
        }
    }
    let mut couplings = Vec::new();
    for c in &v.couplings {
        for (&from, &to) in index[c.from].iter().zip(&index[c.to]) {
            couplings.push(Coupling {
                from,
                to,
                ..c.clone()
            });
        }
    }
    for c in &w.couplings {
        for row in &index {
            couplings.push(Coupling {
                from: row[c.from],
                to: row[c.to],
                ..c.clone()
            });
        }
    }
    let frame = v.frame.kron(&w.frame).select_columns(&old_column);
    Ok(LObject {
        monoid: v.monoid.clone(),
        ideal: v.ideal.clone(),
        classes,
        couplings,
        frame,
    })
}
