//! Log differentials, matrix-valued monomial sums and log connections on
//! the models `Spec C[P]/(K)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RhError;
use crate::exact::{Matrix, Scalar};
use crate::monoid::lattice::IntVec;
use crate::monoid::{AffineMonoid, MonoidIdeal};

/// A finite sum `Σ x^p · M_p` of square matrices with monomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialMatrix {
    size: usize,
    #[serde(with = "term_list")]
    terms: BTreeMap<IntVec, Matrix>,
}

/// Serializes the term map as a list of `{exponent, coefficient}` records so
/// that formats with string-only keys can carry it.
mod term_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::exact::Matrix;
    use crate::monoid::lattice::IntVec;

    #[derive(Serialize, Deserialize)]
    struct Term {
        exponent: IntVec,
        coefficient: Matrix,
    }

    pub fn serialize<S: Serializer>(terms: &BTreeMap<IntVec, Matrix>, s: S) -> Result<S::Ok, S::Error> {
        let list: Vec<Term> = terms
            .iter()
            .map(|(e, m)| Term {
                exponent: e.clone(),
                coefficient: m.clone(),
            })
            .collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<IntVec, Matrix>, D::Error> {
        let list = Vec::<Term>::deserialize(d)?;
        Ok(list.into_iter().map(|t| (t.exponent, t.coefficient)).collect())
    }
}

impl MonomialMatrix {
    pub fn zero(size: usize) -> Self {
        MonomialMatrix {
            size,
            terms: BTreeMap::new(),
        }
    }

    /// `x^exponent · m`.
    pub fn monomial(exponent: IntVec, m: Matrix) -> Self {
        let size = m.rows();
        let mut terms = BTreeMap::new();
        if !m.is_zero() {
            terms.insert(exponent, m);
        }
        MonomialMatrix { size, terms }
    }

    /// Constant term stored under the zero exponent of length `d`.
    pub fn constant_in(d: usize, m: Matrix) -> Self {
        Self::monomial(vec![0; d], m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IntVec, &Matrix)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every exponent is zero.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|p| p.iter().all(|&v| v == 0))
    }

    /// The coefficient of `x^0`.
    pub fn constant_part(&self) -> Matrix {
        self.terms
            .iter()
            .find(|(p, _)| p.iter().all(|&v| v == 0))
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| Matrix::zeros(self.size, self.size))
    }

    fn insert(&mut self, p: IntVec, m: Matrix) {
        if m.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&p) {
            Some(old) => old.add(&m),
            None => m,
        };
        if !sum.is_zero() {
            self.terms.insert(p, sum);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (p, m) in &o.terms {
            out.insert(p.clone(), m.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map_coefficients(|m| m.neg())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.map_coefficients(|m| m.scale(c))
    }

    pub fn map_coefficients(&self, f: impl Fn(&Matrix) -> Matrix) -> Self {
        let mut out = MonomialMatrix::zero(self.size);
        for (p, m) in &self.terms {
            let fm = f(m);
            out.size = fm.rows();
            out.insert(p.clone(), fm);
        }
        if self.terms.is_empty() {
            out.size = f(&Matrix::zeros(self.size, self.size)).rows();
        }
        out
    }

    pub fn map_exponents(&self, f: impl Fn(&IntVec) -> IntVec) -> Self {
        let mut out = MonomialMatrix::zero(self.size);
        for (p, m) in &self.terms {
            out.insert(f(p), m.clone());
        }
        out
    }

    /// Product, dropping monomials for which `vanishes` holds.
    pub fn mul(&self, o: &Self, vanishes: &dyn Fn(&IntVec) -> bool) -> Self {
        let mut out = MonomialMatrix::zero(self.size);
        for (p, a) in &self.terms {
            for (q, b) in &o.terms {
                let e: IntVec = p.iter().zip(q).map(|(x, y)| x + y).collect();
                if vanishes(&e) {
                    continue;
                }
                out.insert(e, a.mul(b));
            }
        }
        out
    }

    pub fn commutator(&self, o: &Self, vanishes: &dyn Fn(&IntVec) -> bool) -> Self {
        self.mul(o, vanishes).sub(&o.mul(self, vanishes))
    }

    /// Applies `x_k ∂/∂x_k`, which multiplies `x^p` by `p_k`.
    pub fn euler_derivative(&self, k: usize) -> Self {
        let mut out = MonomialMatrix::zero(self.size);
        for (p, m) in &self.terms {
            out.insert(p.clone(), m.scale(&Scalar::from_int(p[k])));
        }
        out
    }

    /// Conjugation `T⁻¹ · self · T` by a constant invertible matrix.
    pub fn conjugate(&self, t: &Matrix, t_inv: &Matrix) -> Self {
        self.map_coefficients(|m| t_inv.mul(m).mul(t))
    }

    /// `self ⊗ I + I ⊗ other` on the Kronecker product space.
    pub fn kron_sum(&self, o: &Self) -> Self {
        let (n, m) = (self.size, o.size);
        let left = self.map_coefficients(|a| a.kron(&Matrix::identity(m)));
        let right = o.map_coefficients(|b| Matrix::identity(n).kron(b));
        left.add(&right)
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, o: &Self) -> Self {
        let (n, m) = (self.size, o.size);
        let mut out = MonomialMatrix::zero(n + m);
        for (p, a) in &self.terms {
            out.insert(p.clone(), Matrix::block_diag(&[a.clone(), Matrix::zeros(m, m)]));
        }
        for (p, b) in &o.terms {
            out.insert(p.clone(), Matrix::block_diag(&[Matrix::zeros(n, n), b.clone()]));
        }
        out
    }
}

/// Ω¹ of the model: the free module on the coordinate basis of `P^gp = Z^d`,
/// with `d(x^p) = x^p ⊗ p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogDifferentials {
    pub monoid: AffineMonoid,
    pub ideal: MonoidIdeal,
}

impl LogDifferentials {
    pub fn new(monoid: AffineMonoid, ideal: MonoidIdeal) -> Result<Self, RhError> {
        if !monoid.spans_ambient_lattice() {
            return Err(RhError::UnsupportedPresentation(
                "the generators must span the ambient lattice".into(),
            ));
        }
        Ok(LogDifferentials { monoid, ideal })
    }

    /// Number of dlog directions.
    pub fn rank(&self) -> usize {
        self.monoid.ambient_rank()
    }

    /// True when `x^p` is zero in `C[P]/(K)`.
    pub fn vanishes(&self, p: &IntVec) -> bool {
        self.ideal.contains(&self.monoid, p)
    }

    /// Checks that every exponent lies in `P` and drops those in `K`.
    pub fn reduce(&self, f: &MonomialMatrix) -> Result<MonomialMatrix, RhError> {
        let mut out = MonomialMatrix::zero(f.size());
        for (p, m) in f.terms() {
            if p.len() != self.rank() {
                return Err(RhError::UnsupportedPresentation(format!(
                    "exponent {p:?} has the wrong length"
                )));
            }
            if !self.monoid.contains(p) {
                return Err(RhError::ExponentOutsideMonoid(p.clone()));
            }
            if !self.vanishes(p) {
                out.insert(p.clone(), m.clone());
            }
        }
        Ok(out)
    }
}

/// `∇ = d + Σ_k A_k · dlog x_k` on the free module of the given rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogConnection {
    pub differentials: LogDifferentials,
    pub rank: usize,
    pub omega: Vec<MonomialMatrix>,
}

impl LogConnection {
    pub fn new(
        differentials: LogDifferentials,
        rank: usize,
        omega: Vec<MonomialMatrix>,
    ) -> Result<Self, RhError> {
        if omega.len() != differentials.rank() {
            return Err(RhError::UnsupportedPresentation(format!(
                "expected {} connection components, found {}",
                differentials.rank(),
                omega.len()
            )));
        }
        if omega.iter().any(|a| a.size() != rank) {
            return Err(RhError::UnsupportedPresentation(format!(
                "connection components must be {rank}x{rank}"
            )));
        }
        let omega = omega
            .iter()
            .map(|a| differentials.reduce(a))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LogConnection {
            differentials,
            rank,
            omega,
        })
    }

    /// Constant-coefficient connection `d + Σ U_k dlog x_k`.
    pub fn constant(
        monoid: AffineMonoid,
        ideal: MonoidIdeal,
        residues: Vec<Matrix>,
    ) -> Result<Self, RhError> {
        let differentials = LogDifferentials::new(monoid, ideal)?;
        let d = differentials.rank();
        let rank = residues.first().map_or(0, Matrix::rows);
        let omega = residues
            .into_iter()
            .map(|u| MonomialMatrix::constant_in(d, u))
            .collect();
        Self::new(differentials, rank, omega)
    }

    pub fn monoid(&self) -> &AffineMonoid {
        &self.differentials.monoid
    }

    pub fn ideal(&self) -> &MonoidIdeal {
        &self.differentials.ideal
    }

    pub fn is_constant(&self) -> bool {
        self.omega.iter().all(MonomialMatrix::is_constant)
    }

    /// The constant matrices `U_k`, if all coefficients are constant.
    pub fn constant_residues(&self) -> Option<Vec<Matrix>> {
        self.is_constant()
            .then(|| self.omega.iter().map(MonomialMatrix::constant_part).collect())
    }

    /// Curvature coefficient on `dlog x_l ∧ dlog x_k` for `l < k`.
    pub fn curvature(&self, l: usize, k: usize) -> MonomialMatrix {
        let vanishes = |p: &IntVec| self.differentials.vanishes(p);
        let (a_l, a_k) = (&self.omega[l], &self.omega[k]);
        a_k.euler_derivative(l)
            .sub(&a_l.euler_derivative(k))
            .add(&a_l.commutator(a_k, &vanishes))
    }

    /// Tensor product `∇ ⊗ 1 + 1 ⊗ ∇'`.
    pub fn tensor(&self, o: &LogConnection) -> Result<LogConnection, RhError> {
        if self.differentials != o.differentials {
            return Err(RhError::ModelMismatch);
        }
        let omega = self
            .omega
            .iter()
            .zip(&o.omega)
            .map(|(a, b)| a.kron_sum(b))
            .collect();
        LogConnection::new(self.differentials.clone(), self.rank * o.rank, omega)
    }

    pub fn direct_sum(&self, o: &LogConnection) -> Result<LogConnection, RhError> {
        if self.differentials != o.differentials {
            return Err(RhError::ModelMismatch);
        }
        let omega = self
            .omega
            .iter()
            .zip(&o.omega)
            .map(|(a, b)| a.direct_sum(b))
            .collect();
        LogConnection::new(self.differentials.clone(), self.rank + o.rank, omega)
    }
}

/// True iff `dω + ω∧ω = 0` in `End(E) ⊗ Ω²`.
pub fn is_flat(conn: &LogConnection) -> bool {
    let d = conn.differentials.rank();
    (0..d).all(|l| (l + 1..d).all(|k| conn.curvature(l, k).is_zero()))
}
