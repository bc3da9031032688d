//! Log connections on `A_{P,K}`, the residue decomposition on hollow models
//! and the Riemann-Hilbert correspondence for constant coefficients.
//!
//! Sign convention: a block where `U_k` has eigenvalue `μ_k` becomes a
//! generator class of degree `λ = -μ`, with stored monodromy `(λ_k, -N_k)`
//! so that `e(λ_k) · exp(-2πi N_k) = exp(-2πi U_k)`.

mod connection;
mod higgs;

use thiserror::Error;

pub use connection::{is_flat, LogConnection, LogDifferentials, MonomialMatrix};
pub use higgs::{higgs_decompose, HiggsCondition, HiggsData};

use crate::exact::{eigen_decompose, ExactError, Matrix, Scalar};
use crate::lpk::{check_axioms, GeneratorClass, LObject, LogOperator};
use crate::monoid::lattice::IntVec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RhError {
    #[error("unsupported presentation: {0}")]
    UnsupportedPresentation(String),
    #[error("exponent {0:?} does not lie in the monoid")]
    ExponentOutsideMonoid(IntVec),
    #[error("connections live on different models")]
    ModelMismatch,
    #[error("the connection is not flat")]
    NotFlat,
    #[error("the connection has nonconstant coefficients")]
    NonConstant,
    #[error("operator {operator} has eigenvalues outside Q(i): {factor}")]
    IrrationalEigenvalue { operator: usize, factor: String },
    #[error("invalid object: {0}")]
    InvalidObject(String),
    #[error("the model is not hollow")]
    NotHollow,
    #[error("splitting does not fit the model: {0}")]
    SplittingMismatch(String),
    #[error("residue conditions failed: {}", .0.iter().map(|c| c.index().to_string()).collect::<Vec<_>>().join(", "))]
    ConditionsFailed(Vec<HiggsCondition>),
}

/// Graded object of a flat constant-coefficient connection. Classes are
/// sorted by degree and the frame holds the canonical basis of each block.
pub fn to_lobject(conn: &LogConnection) -> Result<LObject, RhError> {
    let residues = conn.constant_residues().ok_or(RhError::NonConstant)?;
    let d = conn.differentials.rank();
    let (monoid, ideal) = (conn.monoid().clone(), conn.ideal().clone());
    if d == 0 {
        let class = GeneratorClass {
            degree: Vec::new(),
            dim: conn.rank,
            monodromy: Vec::new(),
        };
        return Ok(LObject::new(monoid, ideal, vec![class], Vec::new()));
    }
    let blocks = eigen_decompose(&residues).map_err(|e| match e {
        ExactError::NonCommuting { .. } => RhError::NotFlat,
        ExactError::IrrationalEigenvalue { operator, factor } => {
            RhError::IrrationalEigenvalue { operator, factor }
        }
        other => RhError::UnsupportedPresentation(other.to_string()),
    })?;
    let mut classes: Vec<(GeneratorClass, Matrix)> = blocks
        .into_iter()
        .map(|b| {
            let degree: Vec<Scalar> = b.label.iter().map(|x| -x).collect();
            let monodromy = degree
                .iter()
                .zip(&b.nilpotents)
                .map(|(l, n)| LogOperator {
                    label: l.clone(),
                    nilpotent: n.neg(),
                })
                .collect();
            let class = GeneratorClass {
                degree,
                dim: b.basis.cols(),
                monodromy,
            };
            (class, b.basis)
        })
        .collect();
    classes.sort_by(|a, b| a.0.degree.cmp(&b.0.degree));
    let frame = Matrix::hstack(&classes.iter().map(|(_, f)| f.clone()).collect::<Vec<_>>());
    let mut v = LObject::new(monoid, ideal, classes.into_iter().map(|(c, _)| c).collect(), Vec::new());
    v.frame = frame;
    Ok(v)
}

/// Constant-coefficient connection of an object without monomial couplings:
/// `U_k = F · (⊕(-λ_k - N_k) - C_k) · F⁻¹` where `C_k` are the constant couplings.
pub fn from_lobject(v: &LObject) -> Result<LogConnection, RhError> {
    let report = check_axioms(v);
    if let Some(first) = report.violations.first() {
        return Err(RhError::InvalidObject(format!("{first:?}")));
    }
    if v.couplings.iter().any(|c| c.exponent.iter().any(|&e| e != 0)) {
        return Err(RhError::InvalidObject(
            "couplings with nonzero exponent have no constant-coefficient connection".into(),
        ));
    }
    let frame_inv = v
        .frame
        .inverse()
        .map_err(|_| RhError::InvalidObject("singular frame".into()))?;
    let d = v.directions();
    let residues = (0..d)
        .map(|k| {
            let shifts: Vec<Matrix> = v
                .classes
                .iter()
                .map(|c| Matrix::scalar_matrix(c.dim, &-&c.degree[k]))
                .collect();
            let graded = Matrix::block_diag(&shifts).sub(&v.log_operator(k).constant_part());
            v.frame.mul(&graded).mul(&frame_inv)
        })
        .collect();
    LogConnection::constant(v.monoid.clone(), v.ideal.clone(), residues)
}

/// True when `v` is what [`to_lobject`] produces: labels equal degrees, class
/// degrees strictly increasing, no couplings, and canonical block frames.
pub fn is_normal_form(v: &LObject) -> bool {
    let labels_match = v
        .classes
        .iter()
        .all(|c| c.monodromy.iter().zip(&c.degree).all(|(op, l)| &op.label == l));
    let sorted = v.classes.windows(2).all(|w| w[0].degree < w[1].degree);
    labels_match
        && sorted
        && v.couplings.is_empty()
        && from_lobject(v)
            .and_then(|c| to_lobject(&c))
            .is_ok_and(|w| w.frame == v.frame)
}
