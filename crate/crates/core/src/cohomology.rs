//! Koszul complexes of commuting operators, de Rham cohomology of hollow
//! constant connections, and local systems on `(S^1)^r` in log coordinates.

use serde::Serialize;
use thiserror::Error;

use crate::canext::TauSection;
use crate::exact::{eigen_decompose, ExactError, Matrix, Scalar};
use crate::lpk::{check_axioms, graded_piece, integral_vector, Coupling, GeneratorClass, LObject, LogOperator};
use crate::monoid::{AffineMonoid, MonoidIdeal};
use crate::rh::{is_flat, to_lobject, LogConnection, RhError};
use crate::strata::{eps_pullback, hollow_layout, Splitting};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohomologyError {
    #[error("operators {first} and {second} do not commute")]
    NonCommuting { first: usize, second: usize },
    #[error("operator {0} does not act on a space of the declared dimension")]
    DimensionMismatch(usize),
    #[error("the connection has nonconstant coefficients")]
    NonConstant,
    #[error("the model is not of normal-crossings type")]
    NotNcType,
    #[error("invalid local system: {0}")]
    InvalidLocalSystem(String),
    #[error(transparent)]
    Connection(#[from] RhError),
}

impl From<crate::strata::StrataError> for CohomologyError {
    fn from(e: crate::strata::StrataError) -> Self {
        CohomologyError::Connection(e.into())
    }
}

/// One operator of a Koszul complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum KoszulOperator {
    Exact(Matrix),
    /// `e(label) · exp(2πi nilpotent) − 1`.
    Log { label: Scalar, nilpotent: Matrix },
}

impl KoszulOperator {
    fn matrix(&self) -> &Matrix {
        match self {
            KoszulOperator::Exact(m) => m,
            KoszulOperator::Log { nilpotent, .. } => nilpotent,
        }
    }

    /// Whether the operator is invertible for sure without expanding it.
    fn invertible_by_label(&self) -> bool {
        matches!(self, KoszulOperator::Log { label, .. } if !label.is_integer())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KoszulInput {
    pub dimension: usize,
    pub operators: Vec<KoszulOperator>,
}

fn subsets(r: usize, p: usize) -> Vec<u32> {
    (0u32..1 << r).filter(|m| m.count_ones() as usize == p).collect()
}

/// Matrix of `d: W ⊗ Λ^p → W ⊗ Λ^{p+1}`, `w ⊗ e_S ↦ Σ_{k∉S} D_k w ⊗ e_k ∧ e_S`.
fn differential(ops: &[Matrix], n: usize, p: usize) -> Matrix {
    let r = ops.len();
    let (src, dst) = (subsets(r, p), subsets(r, p + 1));
    let mut d = Matrix::zeros(n * dst.len(), n * src.len());
    for (si, &s) in src.iter().enumerate() {
        for (k, op) in ops.iter().enumerate() {
            if s & (1 << k) != 0 {
                continue;
            }
            let target = s | (1 << k);
            let ti = dst.binary_search(&target).expect("subset present");
            let before = (s & ((1 << k) - 1)).count_ones();
            let sign = if before % 2 == 0 { Scalar::one() } else { -&Scalar::one() };
            for i in 0..n {
                for j in 0..n {
                    let v = op.get(i, j);
                    if !v.is_zero() {
                        d.set(ti * n + i, si * n + j, v * &sign);
                    }
                }
            }
        }
    }
    d
}

/// Dimensions of `H^0, …, H^r` of the Koszul complex.
pub fn koszul_cohomology(inp: &KoszulInput) -> Result<Vec<usize>, CohomologyError> {
    let n = inp.dimension;
    for (i, op) in inp.operators.iter().enumerate() {
        let m = op.matrix();
        if m.rows() != n || m.cols() != n {
            return Err(CohomologyError::DimensionMismatch(i));
        }
    }
    for (i, a) in inp.operators.iter().enumerate() {
        for (j, b) in inp.operators.iter().enumerate().skip(i + 1) {
            if !a.matrix().commutes_with(b.matrix()) {
                return Err(CohomologyError::NonCommuting { first: i, second: j });
            }
        }
    }
    let r = inp.operators.len();
    if n > 0 && inp.operators.iter().any(KoszulOperator::invertible_by_label) {
        return Ok(vec![0; r + 1]);
    }
    let ops: Vec<Matrix> = inp.operators.iter().map(|o| o.matrix().clone()).collect();
    let ranks: Vec<usize> = (0..r).map(|p| differential(&ops, n, p).rank()).collect();
    Ok((0..=r)
        .map(|p| {
            let dim = n * subsets(r, p).len();
            let out = if p < r { ranks[p] } else { 0 };
            let inc = if p > 0 { ranks[p - 1] } else { 0 };
            dim - out - inc
        })
        .collect())
}

fn add_dims(acc: &mut Vec<usize>, dims: &[usize]) {
    if acc.is_empty() {
        acc.resize(dims.len(), 0);
    }
    acc.iter_mut().zip(dims).for_each(|(a, b)| *a += b);
}

/// Residue data of a hollow constant flat connection: torus operators `V_j`
/// (first `s` components of the pullback) and residues `ρ_k`.
fn torus_operators(conn: &LogConnection, eps: &Splitting) -> Result<(Vec<Matrix>, Vec<Matrix>), CohomologyError> {
    let layout = hollow_layout(conn.monoid(), conn.ideal())?;
    let residues = conn.constant_residues().ok_or(CohomologyError::NonConstant)?;
    if !is_flat(conn) {
        return Err(RhError::NotFlat.into());
    }
    let base = eps_pullback(conn, eps)?;
    let torus = base.omega[..layout.unit_rank()]
        .iter()
        .map(|w| w.constant_part())
        .collect();
    let rho = layout.sharp.iter().map(|&k| residues[k].clone()).collect();
    Ok((torus, rho))
}

/// `H*_dR` of a hollow constant flat connection, summed over the characters
/// `χ` of the unit torus with `-χ_j` an eigenvalue of every torus operator.
pub fn torus_de_rham(conn: &LogConnection, eps: &Splitting) -> Result<Vec<usize>, CohomologyError> {
    let (torus, rho) = torus_operators(conn, eps)?;
    let s = torus.len();
    let ops: Vec<Matrix> = torus.iter().chain(&rho).cloned().collect();
    let characters: Vec<Vec<i64>> = if ops.is_empty() || conn.rank == 0 {
        vec![vec![0; s]]
    } else {
        let blocks = eigen_decompose(&ops).map_err(|e| match e {
            ExactError::IrrationalEigenvalue { operator, factor } => {
                CohomologyError::Connection(RhError::IrrationalEigenvalue { operator, factor })
            }
            _ => CohomologyError::Connection(RhError::NotFlat),
        })?;
        let mut chars: Vec<Vec<i64>> = blocks
            .iter()
            .filter_map(|b| integral_vector(&b.label[..s]))
            .map(|v| v.iter().map(|x| -x).collect())
            .collect();
        chars.sort();
        chars.dedup();
        chars
    };
    let mut total = vec![0; s + rho.len() + 1];
    for chi in characters {
        let operators = torus
            .iter()
            .zip(&chi)
            .map(|(v, &c)| KoszulOperator::Exact(v.add(&Matrix::scalar_matrix(v.rows(), &Scalar::from_int(c)))))
            .chain(rho.iter().cloned().map(KoszulOperator::Exact))
            .collect();
        let dims = koszul_cohomology(&KoszulInput { dimension: conn.rank, operators })?;
        total.iter_mut().zip(&dims).for_each(|(a, b)| *a += b);
    }
    Ok(total)
}

/// A block of a local system on `(S^1)^r`: `γ_k = e(labels_k) · exp(2πi nilpotents_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalBlock {
    pub labels: Vec<Scalar>,
    pub nilpotents: Vec<Matrix>,
}

impl LocalBlock {
    pub fn dim(&self) -> usize {
        self.nilpotents.first().map_or(0, Matrix::rows)
    }
}

/// Extra entry `coefficient` of `log γ_direction` from generator `from` to `to`,
/// between blocks whose labels agree modulo `Z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalCoupling {
    pub direction: usize,
    pub from: usize,
    pub to: usize,
    pub coefficient: Scalar,
}

/// A representation of `Z^r` in log coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalSystem {
    pub directions: usize,
    pub blocks: Vec<LocalBlock>,
    pub couplings: Vec<LocalCoupling>,
}

impl LocalSystem {
    pub fn rank(&self) -> usize {
        self.blocks.iter().map(LocalBlock::dim).sum()
    }

    fn block_of_generator(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(i, b)| std::iter::repeat_n(i, b.dim()))
            .collect()
    }

    /// Same blocks, nilpotents and couplings, with labels equal modulo `Z`.
    pub fn same_representation(&self, other: &LocalSystem) -> bool {
        self.directions == other.directions
            && self.couplings == other.couplings
            && self.blocks.len() == other.blocks.len()
            && self.blocks.iter().zip(&other.blocks).all(|(a, b)| {
                a.nilpotents == b.nilpotents
                    && a.labels.len() == b.labels.len()
                    && a.labels.iter().zip(&b.labels).all(|(x, y)| (x - y).is_integer())
            })
    }

    /// Koszul inputs, one per group of blocks linked by couplings.
    pub fn koszul_inputs(&self) -> Vec<KoszulInput> {
        let owner = self.block_of_generator();
        let mut parent: Vec<usize> = (0..self.blocks.len()).collect();
        fn root(p: &[usize], i: usize) -> usize {
            let mut i = i;
            while p[i] != i {
                i = p[i];
            }
            i
        }
        for c in &self.couplings {
            let (a, b) = (root(&parent, owner[c.from]), root(&parent, owner[c.to]));
            parent[a] = b;
        }
        let offsets: Vec<usize> = self
            .blocks
            .iter()
            .scan(0, |acc, b| {
                let start = *acc;
                *acc += b.dim();
                Some(start)
            })
            .collect();
        let roots: Vec<usize> = (0..self.blocks.len()).map(|i| root(&parent, i)).collect();
        let mut groups_order: Vec<usize> = Vec::new();
        for &r in &roots {
            if !groups_order.contains(&r) {
                groups_order.push(r);
            }
        }
        let mut out = Vec::new();
        for g in groups_order {
            let members: Vec<usize> = (0..self.blocks.len()).filter(|&i| roots[i] == g).collect();
            let gens: Vec<usize> = members
                .iter()
                .flat_map(|&i| offsets[i]..offsets[i] + self.blocks[i].dim())
                .collect();
            let operators = (0..self.directions)
                .map(|k| {
                    let mut m = Matrix::block_diag(
                        &members.iter().map(|&i| self.blocks[i].nilpotents[k].clone()).collect::<Vec<_>>(),
                    );
                    for c in self.couplings.iter().filter(|c| c.direction == k) {
                        if let (Some(i), Some(j)) = (
                            gens.iter().position(|&x| x == c.to),
                            gens.iter().position(|&x| x == c.from),
                        ) {
                            let v = m.get(i, j) + &c.coefficient;
                            m.set(i, j, v);
                        }
                    }
                    KoszulOperator::Log {
                        label: self.blocks[members[0]].labels[k].clone(),
                        nilpotent: m,
                    }
                })
                .collect();
            out.push(KoszulInput {
                dimension: gens.len(),
                operators,
            });
        }
        out
    }

    pub fn cohomology(&self) -> Result<Vec<usize>, CohomologyError> {
        let mut total = vec![0; self.directions + 1];
        for inp in self.koszul_inputs() {
            add_dims(&mut total, &koszul_cohomology(&inp)?);
        }
        Ok(total)
    }
}

/// The local system of `V`: monomials `x^p` become 1 for units `p` and 0 otherwise.
pub fn underline(v: &LObject) -> LocalSystem {
    let blocks = v
        .classes
        .iter()
        .map(|c| LocalBlock {
            labels: c.monodromy.iter().map(|op| op.label.clone()).collect(),
            nilpotents: c.monodromy.iter().map(|op| op.nilpotent.clone()).collect(),
        })
        .collect();
    let couplings = v
        .couplings
        .iter()
        .filter(|c| {
            let neg: Vec<i64> = c.exponent.iter().map(|x| -x).collect();
            v.monoid.contains(&neg)
        })
        .map(|c| LocalCoupling {
            direction: c.direction,
            from: c.from,
            to: c.to,
            coefficient: c.coefficient.clone(),
        })
        .collect();
    LocalSystem {
        directions: v.directions(),
        blocks,
        couplings,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalSystemRoundTrip {
    pub object: LObject,
    pub recovered: LocalSystem,
    pub matches: bool,
}

/// Builds the τ-adapted object with degrees `τ(labels)` and underlines it again.
pub fn local_system_round_trip(
    w: &LocalSystem,
    monoid: &AffineMonoid,
    ideal: &MonoidIdeal,
    tau: &TauSection,
) -> Result<LocalSystemRoundTrip, CohomologyError> {
    if !monoid.is_free() || monoid.ambient_rank() != w.directions || !monoid.spans_ambient_lattice() {
        return Err(CohomologyError::NotNcType);
    }
    let classes = w
        .blocks
        .iter()
        .map(|b| {
            if b.labels.len() != w.directions || b.nilpotents.len() != w.directions {
                return Err(CohomologyError::InvalidLocalSystem("wrong number of operators".into()));
            }
            let degree: Vec<Scalar> = b.labels.iter().map(|l| tau.apply(l)).collect();
            let monodromy = degree
                .iter()
                .zip(&b.nilpotents)
                .map(|(l, n)| LogOperator {
                    label: l.clone(),
                    nilpotent: n.clone(),
                })
                .collect();
            Ok(GeneratorClass {
                degree,
                dim: b.dim(),
                monodromy,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let couplings = w
        .couplings
        .iter()
        .map(|c| Coupling {
            direction: c.direction,
            from: c.from,
            to: c.to,
            coefficient: c.coefficient.clone(),
            exponent: vec![0; w.directions],
        })
        .collect();
    let object = LObject::new(monoid.clone(), ideal.clone(), classes, couplings);
    let report = check_axioms(&object);
    if let Some(first) = report.violations.first() {
        return Err(CohomologyError::InvalidLocalSystem(format!("{first:?}")));
    }
    let recovered = underline(&object);
    let matches = recovered.same_representation(w);
    Ok(LocalSystemRoundTrip {
        object,
        recovered,
        matches,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    DeRham,
    GroupV0,
    LocalSystem,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyReport {
    pub side: Side,
    pub dims: Vec<usize>,
    pub adapted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonReport {
    pub sides: Vec<CohomologyReport>,
    /// Every sharp degree coordinate lies in the window of `τ`.
    pub adapted: bool,
    pub tau_fixes_zero: bool,
}

impl ComparisonReport {
    pub fn dims(&self, side: Side) -> &[usize] {
        &self.sides.iter().find(|r| r.side == side).expect("all sides present").dims
    }
}

/// Koszul complex of the log monodromies on `V_0`.
pub fn group_cohomology_v0(v: &LObject) -> Result<Vec<usize>, CohomologyError> {
    let zero = vec![Scalar::zero(); v.directions()];
    let piece = graded_piece(v, &zero);
    let operators = piece
        .operators
        .into_iter()
        .map(|op| KoszulOperator::Log {
            label: Scalar::zero(),
            nilpotent: op.matrix,
        })
        .collect();
    koszul_cohomology(&KoszulInput {
        dimension: piece.dimension,
        operators,
    })
}

/// Whether every sharp coordinate of every degree lies in the window.
pub fn is_tau_adapted(v: &LObject, sharp: &[usize], tau: &TauSection) -> bool {
    v.classes.iter().all(|c| sharp.iter().all(|&k| tau.contains(&c.degree[k])))
}

pub fn comparison_report(
    conn: &LogConnection,
    eps: &Splitting,
    tau: &TauSection,
) -> Result<ComparisonReport, CohomologyError> {
    let layout = hollow_layout(conn.monoid(), conn.ideal())?;
    let de_rham = torus_de_rham(conn, eps)?;
    let v = to_lobject(conn)?;
    let group = group_cohomology_v0(&v)?;
    let local = underline(&v).cohomology()?;
    let adapted = is_tau_adapted(&v, &layout.sharp, tau);
    let side = |side, dims| CohomologyReport { side, dims, adapted };
    Ok(ComparisonReport {
        sides: vec![side(Side::DeRham, de_rham), side(Side::GroupV0, group), side(Side::LocalSystem, local)],
        adapted,
        tau_fixes_zero: tau.fixes_zero(),
    })
}
