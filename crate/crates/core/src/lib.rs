//! Exact local computations for logarithmic connections on toric models.

pub mod canext;
pub mod cohomology;
pub mod exact;
pub mod germ;
pub mod lpk;
pub mod monoid;
pub mod rh;
pub mod strata;

pub use exact::{eigen_decompose, matrix_rank, EigenBlock, ExactError, Matrix, Scalar};
pub use lpk::{check_axioms, graded_piece, tensor, GradedPiece, LObject};
pub use monoid::{AffineMonoid, Face, MonoidIdeal};
pub use rh::{from_lobject, higgs_decompose, is_flat, to_lobject, HiggsData, LogConnection};
pub use strata::{eps_pullback, splitting_delta, strata_decomposition, Splitting, StratumDescriptor};
