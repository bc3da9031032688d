//! Residue decomposition `∇ ↦ (ε^⊛∇, ρ_∇)` on hollow models.

use serde::Serialize;

use super::{is_flat, LogConnection, MonomialMatrix, RhError};
use crate::monoid::lattice::IntVec;
use crate::strata::{hollow_layout, pullback_along, residues_on_torus, Splitting, StrataError};

/// The three conditions that together are equivalent to flatness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum HiggsCondition {
    /// The pulled-back torus connection is flat.
    BaseFlat,
    /// `ρ ∧ ρ = 0`.
    ResiduesCommute,
    /// `ρ` is horizontal for the base connection.
    ResiduesHorizontal,
}

impl HiggsCondition {
    /// 1, 2 or 3.
    pub fn index(self) -> usize {
        match self {
            HiggsCondition::BaseFlat => 1,
            HiggsCondition::ResiduesCommute => 2,
            HiggsCondition::ResiduesHorizontal => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HiggsData {
    /// Connection on the target torus of the splitting.
    pub base: LogConnection,
    /// `ρ_k`, one per sharp direction, as functions on the torus.
    pub residues: Vec<MonomialMatrix>,
}

pub fn higgs_decompose(conn: &LogConnection, eps: &Splitting) -> Result<HiggsData, RhError> {
    let layout = hollow_layout(conn.monoid(), conn.ideal()).map_err(RhError::from)?;
    let base = pullback_along(&layout, conn, eps).map_err(RhError::from)?;
    let residues = residues_on_torus(&layout, eps.torus_rank, conn);
    let none = |_: &IntVec| false;
    let mut failed = Vec::new();
    if !is_flat(&base) {
        failed.push(HiggsCondition::BaseFlat);
    }
    let commute = residues
        .iter()
        .enumerate()
        .all(|(k, a)| residues[k + 1..].iter().all(|b| a.commutator(b, &none).is_zero()));
    if !commute {
        failed.push(HiggsCondition::ResiduesCommute);
    }
    let horizontal = residues.iter().all(|rho| {
        base.omega
            .iter()
            .enumerate()
            .all(|(j, w)| rho.euler_derivative(j).add(&w.commutator(rho, &none)).is_zero())
    });
    if !horizontal {
        failed.push(HiggsCondition::ResiduesHorizontal);
    }
    if failed.is_empty() {
        Ok(HiggsData { base, residues })
    } else {
        Err(RhError::ConditionsFailed(failed))
    }
}

impl From<StrataError> for RhError {
    fn from(e: StrataError) -> Self {
        match e {
            StrataError::NotHollow => RhError::NotHollow,
            StrataError::NotFlat => RhError::NotFlat,
            StrataError::SplittingMismatch(s) => RhError::SplittingMismatch(s),
            StrataError::UnsupportedPresentation(s) => RhError::UnsupportedPresentation(s),
            StrataError::Connection(e) => e,
        }
    }
}
