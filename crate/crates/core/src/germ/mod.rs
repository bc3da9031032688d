//! Differential modules `Θ = t·d/dt + A(t)` over `C((t))` with rational
//! coefficients: a regularity test, pullbacks of log connections along curve
//! germs, and tensor constructions.

mod ratfunc;

use serde::Serialize;
use thiserror::Error;

pub use ratfunc::RatFunc;

use crate::exact::{DenseMatrix, Field, Matrix};
use crate::monoid::{AffineMonoid, Face};
use crate::rh::{is_flat, LogConnection};

pub type RatMatrix = DenseMatrix<RatFunc>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GermError {
    #[error("no cyclic vector found among the candidates tried")]
    CyclicVectorNotFound,
    #[error("value {0} of the germ is the zero function")]
    NonUnitValue(usize),
    #[error("the connection has nonconstant coefficients")]
    NonConstant,
    #[error("the connection is not flat")]
    NotFlat,
    #[error("expected {expected} values, found {found}")]
    WrongValueCount { expected: usize, found: usize },
    #[error("matrix must be square")]
    NotSquare,
    #[error("gauge transformation is not invertible")]
    SingularGauge,
}

/// `Θ = t·d/dt + A` acting on column vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiffModuleGerm {
    pub matrix: RatMatrix,
}

impl Serialize for RatMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .to_rows()
            .iter()
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect();
        rows.serialize(s)
    }
}

impl DiffModuleGerm {
    pub fn new(matrix: RatMatrix) -> Result<Self, GermError> {
        if !matrix.is_square() {
            return Err(GermError::NotSquare);
        }
        Ok(DiffModuleGerm { matrix })
    }

    pub fn constant(a: &Matrix) -> Self {
        DiffModuleGerm {
            matrix: a.map(|c| RatFunc::constant(c.clone())),
        }
    }

    pub fn rank(&self) -> usize {
        self.matrix.rows()
    }

    /// Largest pole order among the entries of `A`.
    pub fn pole_order(&self) -> usize {
        self.matrix.entries().map(RatFunc::pole_order).max().unwrap_or(0)
    }

    /// `Θ v = t v' + A v`.
    pub fn apply_theta(&self, v: &[RatFunc]) -> Vec<RatFunc> {
        let av = self.matrix.apply(v);
        v.iter()
            .zip(av)
            .map(|(x, y)| x.euler_derivative().add(&y))
            .collect()
    }
}

/// A cyclic vector and the scalar equation `Θⁿ + a_{n-1}Θ^{n-1} + … + a_0 = 0` it satisfies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicReduction {
    pub vector: Vec<RatFunc>,
    /// `a_0, …, a_{n-1}`.
    pub coefficients: Vec<RatFunc>,
}

fn unit(n: usize, i: usize) -> Vec<RatFunc> {
    (0..n).map(|j| if i == j { RatFunc::one() } else { RatFunc::zero() }).collect()
}

/// Deterministic candidates: basis vectors, then `e_1 + t^j e_k`, then `Σ_k t^{(k-1)j} e_k`.
fn candidates(n: usize) -> Vec<Vec<RatFunc>> {
    let mut out: Vec<Vec<RatFunc>> = (0..n).map(|i| unit(n, i)).collect();
    for k in 1..n {
        for j in 0..=n as i64 {
            let mut v = unit(n, 0);
            v[k] = RatFunc::t_pow(j);
            out.push(v);
        }
    }
    for j in 1..=n as i64 {
        out.push((0..n).map(|k| RatFunc::t_pow(k as i64 * j)).collect());
    }
    out
}

pub fn cyclic_reduction(g: &DiffModuleGerm) -> Result<CyclicReduction, GermError> {
    let n = g.rank();
    for v in candidates(n) {
        let mut iterates = vec![v.clone()];
        for _ in 0..n {
            let next = g.apply_theta(iterates.last().expect("nonempty"));
            iterates.push(next);
        }
        let basis = RatMatrix::from_columns(n, &iterates[..n]);
        if basis.rank() < n {
            continue;
        }
        let rhs = RatMatrix::from_columns(n, &[iterates[n].iter().map(RatFunc::neg).collect()]);
        let sol = basis.solve(&rhs).expect("invertible system");
        return Ok(CyclicReduction {
            vector: v,
            coefficients: sol.column(0),
        });
    }
    Err(GermError::CyclicVectorNotFound)
}

/// Regular singular iff every coefficient of the cyclic equation has no pole.
pub fn is_fuchsian(g: &DiffModuleGerm) -> Result<bool, GermError> {
    if g.rank() == 0 {
        return Ok(true);
    }
    let red = cyclic_reduction(g)?;
    Ok(red.coefficients.iter().all(|a| a.valuation().is_none_or(|v| v >= 0)))
}

/// `A ⊗ 1 + 1 ⊗ A'`.
pub fn germ_tensor(a: &DiffModuleGerm, b: &DiffModuleGerm) -> DiffModuleGerm {
    let left = a.matrix.kron(&RatMatrix::identity(b.rank()));
    let right = RatMatrix::identity(a.rank()).kron(&b.matrix);
    DiffModuleGerm {
        matrix: left.add(&right),
    }
}

/// `-Aᵀ`.
pub fn germ_dual(g: &DiffModuleGerm) -> DiffModuleGerm {
    DiffModuleGerm {
        matrix: g.matrix.transpose().neg(),
    }
}

pub fn germ_direct_sum(a: &DiffModuleGerm, b: &DiffModuleGerm) -> DiffModuleGerm {
    DiffModuleGerm {
        matrix: RatMatrix::block_diag(&[a.matrix.clone(), b.matrix.clone()]),
    }
}

/// Matrix of `Θ` in the coordinates `w = g v`: `g A g⁻¹ - θ(g) g⁻¹`.
/// For the system `θ(y) = A y` the same change of unknowns gives
/// `g A g⁻¹ + θ(g) g⁻¹`, which is `-gauge_transform(-A, g)`.
pub fn gauge_transform(gm: &DiffModuleGerm, gauge: &RatMatrix) -> Result<DiffModuleGerm, GermError> {
    let inv = gauge.inverse().map_err(|_| GermError::SingularGauge)?;
    let theta_g = gauge.map(RatFunc::euler_derivative);
    let matrix = gauge.mul(&gm.matrix).mul(&inv).sub(&theta_g.mul(&inv));
    Ok(DiffModuleGerm { matrix })
}

/// A formal curve germ: the value `x_k(t)` of each coordinate monomial `x^{e_k}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GermMap {
    /// Face of the stratum containing the special point.
    pub target_face: Face,
    pub values: Vec<RatFunc>,
}

impl GermMap {
    /// Value of the monomial `x^p`.
    pub fn monomial_value(&self, p: &[i64]) -> Option<RatFunc> {
        p.iter().zip(&self.values).try_fold(RatFunc::one(), |acc, (&e, f)| Some(acc.mul(&f.pow(e)?)))
    }

    /// True when the germ extends over `t = 0` and sends the special point into
    /// the stratum of `target_face`: generators in the face become units, the
    /// others vanish at `t = 0`.
    pub fn has_center(&self, monoid: &AffineMonoid) -> bool {
        monoid.generators().iter().enumerate().all(|(i, g)| {
            match self.monomial_value(g).and_then(|f| f.valuation()) {
                Some(0) => self.target_face.contains_index(i),
                Some(v) if v > 0 => !self.target_face.contains_index(i),
                _ => false,
            }
        })
    }
}

/// `A(t) = Σ_k U_k · t f_k'/f_k` for a flat constant connection.
pub fn pullback_germ(conn: &LogConnection, map: &GermMap) -> Result<DiffModuleGerm, GermError> {
    let residues = conn.constant_residues().ok_or(GermError::NonConstant)?;
    if !is_flat(conn) {
        return Err(GermError::NotFlat);
    }
    if map.values.len() != residues.len() {
        return Err(GermError::WrongValueCount {
            expected: residues.len(),
            found: map.values.len(),
        });
    }
    let n = conn.rank;
    let mut matrix = RatMatrix::zeros(n, n);
    for (k, (u, f)) in residues.iter().zip(&map.values).enumerate() {
        let dlog = f.log_derivative().ok_or(GermError::NonUnitValue(k))?;
        matrix = matrix.add(&u.map(|c| RatFunc::constant(c.clone()).mul(&dlog)));
    }
    Ok(DiffModuleGerm { matrix })
}
