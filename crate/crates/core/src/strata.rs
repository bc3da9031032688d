//! Strata of `A_{P,K}` (one torus per face avoiding `K`), splittings of hollow
//! models and the pullback of log connections along a splitting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::Scalar;
use crate::monoid::lattice::{hermite_basis, IntVec};
use crate::monoid::{
    classify_model, faces_avoiding, project, quotient_map, AffineMonoid, Face, MonoidIdeal,
};
use crate::rh::{is_flat, LogConnection, LogDifferentials, MonomialMatrix, RhError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrataError {
    #[error("the model is not hollow")]
    NotHollow,
    #[error("the connection is not flat")]
    NotFlat,
    #[error("splitting does not fit the model: {0}")]
    SplittingMismatch(String),
    #[error("unsupported presentation: {0}")]
    UnsupportedPresentation(String),
    #[error(transparent)]
    Connection(#[from] RhError),
}

/// The stratum attached to a face `F` disjoint from `K`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StratumDescriptor {
    pub face: Face,
    /// Rank of `F^gp`.
    pub torus_rank: usize,
    /// Rank of `(P_F/F^gp)^gp`.
    pub log_rank: usize,
    /// Rank of the torsor torus added in the splitting scheme.
    pub sharp_fiber_rank: usize,
    /// Image of `K` in `P_F/F^gp`.
    pub induced_ideal: MonoidIdeal,
}

pub fn strata_decomposition(monoid: &AffineMonoid, ideal: &MonoidIdeal) -> Vec<StratumDescriptor> {
    faces_avoiding(monoid, ideal)
        .into_iter()
        .map(|face| {
            let torus_rank = monoid.face_rank(&face);
            let qmap = quotient_map(monoid, &face).expect("face of this monoid");
            let log_rank = qmap.projection.len();
            let induced: Vec<IntVec> = ideal
                .generators
                .iter()
                .filter_map(|k| project(monoid, &qmap, k))
                .collect();
            let induced_ideal = MonoidIdeal {
                generators: induced,
            }
            .minimized(&qmap.monoid);
            StratumDescriptor {
                face,
                torus_rank,
                log_rank,
                sharp_fiber_rank: log_rank,
                induced_ideal,
            }
        })
        .collect()
}

/// Coordinate layout of a hollow model `P = P̄ × M` with `M = Z^s` spanned by
/// a subset of the ambient coordinate vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HollowLayout {
    /// Ambient coordinates of the sharp factor `P̄`.
    pub sharp: Vec<usize>,
    /// Ambient coordinates of the unit group `M`.
    pub unit: Vec<usize>,
}

impl HollowLayout {
    pub fn sharp_rank(&self) -> usize {
        self.sharp.len()
    }

    pub fn unit_rank(&self) -> usize {
        self.unit.len()
    }
}

pub fn hollow_layout(monoid: &AffineMonoid, ideal: &MonoidIdeal) -> Result<HollowLayout, StrataError> {
    if !classify_model(monoid, ideal).hollow {
        return Err(StrataError::NotHollow);
    }
    if !monoid.spans_ambient_lattice() {
        return Err(StrataError::UnsupportedPresentation(
            "the generators must span the ambient lattice".into(),
        ));
    }
    let d = monoid.ambient_rank();
    let units = hermite_basis(&monoid.unit_face().span, d);
    let unit: Vec<usize> = (0..d)
        .filter(|&i| units.iter().any(|u| u[i] != 0))
        .collect();
    let expected: Vec<IntVec> = unit
        .iter()
        .map(|&i| (0..d).map(|j| i64::from(i == j)).collect())
        .collect();
    if units != expected {
        return Err(StrataError::UnsupportedPresentation(
            "the unit group must be spanned by coordinate vectors".into(),
        ));
    }
    let sharp = (0..d).filter(|i| !unit.contains(i)).collect();
    Ok(HollowLayout { sharp, unit })
}

/// A splitting `P̄ → C[M]`, `p ↦ unit(p) · y^{φ(p)}`, with values in a torus
/// `Z^t` whose first `s` coordinates are those of `M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splitting {
    /// Rank `t` of the target torus.
    pub torus_rank: usize,
    /// Image of each sharp basis vector, a vector of length `t`.
    pub monomial_part: Vec<IntVec>,
    /// Constant factor for each sharp basis vector.
    pub unit_part: Vec<Scalar>,
}

impl Splitting {
    /// The splitting into `X^#`: `p ↦ (p, p)`, torus `M × P̄^gp`.
    pub fn universal(layout: &HollowLayout) -> Self {
        let (a, s) = (layout.sharp_rank(), layout.unit_rank());
        let monomial_part = (0..a)
            .map(|k| (0..s + a).map(|j| i64::from(j == s + k)).collect())
            .collect();
        Splitting {
            torus_rank: s + a,
            monomial_part,
            unit_part: vec![Scalar::one(); a],
        }
    }

    /// The constant splitting `p ↦ 1` on the unit torus itself.
    pub fn obvious(layout: &HollowLayout) -> Self {
        Self::constant(layout, layout.unit_rank())
    }

    /// The constant splitting `p ↦ 1`, viewed in a torus of rank `t`.
    pub fn constant(layout: &HollowLayout, t: usize) -> Self {
        let a = layout.sharp_rank();
        Splitting {
            torus_rank: t,
            monomial_part: vec![vec![0; t]; a],
            unit_part: vec![Scalar::one(); a],
        }
    }

    pub fn validate(&self, layout: &HollowLayout) -> Result<(), StrataError> {
        let a = layout.sharp_rank();
        if self.torus_rank < layout.unit_rank() {
            return Err(StrataError::SplittingMismatch(format!(
                "torus rank {} is smaller than the unit rank {}",
                self.torus_rank,
                layout.unit_rank()
            )));
        }
        if self.monomial_part.len() != a || self.unit_part.len() != a {
            return Err(StrataError::SplittingMismatch(format!(
                "expected data for {a} sharp directions"
            )));
        }
        if self.monomial_part.iter().any(|m| m.len() != self.torus_rank) {
            return Err(StrataError::SplittingMismatch(
                "monomial part has the wrong length".into(),
            ));
        }
        if self.unit_part.iter().any(Scalar::is_zero) {
            return Err(StrataError::SplittingMismatch("unit part must be nonzero".into()));
        }
        Ok(())
    }
}

fn checked_layout(conn: &LogConnection) -> Result<HollowLayout, StrataError> {
    let layout = hollow_layout(conn.monoid(), conn.ideal())?;
    if !is_flat(conn) {
        return Err(StrataError::NotFlat);
    }
    Ok(layout)
}

/// Moves an exponent supported on `M` into the coordinates of the torus `Z^t`.
fn torus_exponent(layout: &HollowLayout, t: usize, p: &IntVec) -> IntVec {
    let mut out = vec![0; t];
    for (j, &i) in layout.unit.iter().enumerate() {
        out[j] = p[i];
    }
    out
}

fn on_torus(layout: &HollowLayout, t: usize, f: &MonomialMatrix) -> MonomialMatrix {
    f.map_exponents(|p| torus_exponent(layout, t, p))
}

/// Residues `ρ_k` of a connection on a hollow model, as functions on the torus `Z^t`.
pub fn residues_on_torus(layout: &HollowLayout, t: usize, conn: &LogConnection) -> Vec<MonomialMatrix> {
    layout
        .sharp
        .iter()
        .map(|&k| on_torus(layout, t, &conn.omega[k]))
        .collect()
}

fn torus_connection(t: usize, rank: usize, omega: Vec<MonomialMatrix>) -> Result<LogConnection, StrataError> {
    let differentials = LogDifferentials::new(AffineMonoid::lattice_group(t), MonoidIdeal::empty())?;
    Ok(LogConnection::new(differentials, rank, omega)?)
}

/// The classical connection `ε^⊛(∇)` on the target torus of `eps`.
pub fn eps_pullback(conn: &LogConnection, eps: &Splitting) -> Result<LogConnection, StrataError> {
    let layout = checked_layout(conn)?;
    pullback_along(&layout, conn, eps)
}

/// `ε^⊛(∇)` without the flatness precondition.
pub(crate) fn pullback_along(
    layout: &HollowLayout,
    conn: &LogConnection,
    eps: &Splitting,
) -> Result<LogConnection, StrataError> {
    eps.validate(layout)?;
    let t = eps.torus_rank;
    let residues = residues_on_torus(layout, t, conn);
    let omega = (0..t)
        .map(|j| {
            let base = match layout.unit.get(j) {
                Some(&i) => on_torus(layout, t, &conn.omega[i]),
                None => MonomialMatrix::zero(conn.rank),
            };
            residues
                .iter()
                .zip(&eps.monomial_part)
                .fold(base, |acc, (rho, m)| acc.add(&rho.scale(&Scalar::from_int(m[j]))))
        })
        .collect();
    torus_connection(t, conn.rank, omega)
}

/// `δ(ε₀, ε₁)` with both sides of the comparison identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplittingDelta {
    /// For each sharp basis vector `p̄`, the dlog coefficients of `δ(p̄)` on the torus.
    pub delta: Vec<IntVec>,
    /// `ε₀^⊛(∇) − ε₁^⊛(∇)`, one component per torus direction.
    pub difference: Vec<MonomialMatrix>,
    /// `(1 ⊗ δ) ∘ ρ_∇`, one component per torus direction.
    pub contracted: Vec<MonomialMatrix>,
    pub verified: bool,
}

pub fn splitting_delta(
    eps0: &Splitting,
    eps1: &Splitting,
    conn: &LogConnection,
) -> Result<SplittingDelta, StrataError> {
    let layout = checked_layout(conn)?;
    if eps0.torus_rank != eps1.torus_rank {
        return Err(StrataError::SplittingMismatch(
            "splittings land in tori of different rank".into(),
        ));
    }
    let t = eps0.torus_rank;
    let lhs0 = eps_pullback(conn, eps0)?;
    let lhs1 = eps_pullback(conn, eps1)?;
    let delta: Vec<IntVec> = eps0
        .monomial_part
        .iter()
        .zip(&eps1.monomial_part)
        .map(|(m0, m1)| m0.iter().zip(m1).map(|(x, y)| x - y).collect())
        .collect();
    let difference: Vec<MonomialMatrix> = lhs0
        .omega
        .iter()
        .zip(&lhs1.omega)
        .map(|(a, b)| a.sub(b))
        .collect();
    let residues = residues_on_torus(&layout, t, conn);
    let contracted: Vec<MonomialMatrix> = (0..t)
        .map(|j| {
            residues
                .iter()
                .zip(&delta)
                .fold(MonomialMatrix::zero(conn.rank), |acc, (rho, dk)| {
                    acc.add(&rho.scale(&Scalar::from_int(dk[j])))
                })
        })
        .collect();
    let verified = difference == contracted;
    Ok(SplittingDelta {
        delta,
        difference,
        contracted,
        verified,
    })
}
