//! Minimal field interface shared by scalars and rational functions.

use std::fmt::Debug;

pub trait Field: Clone + PartialEq + Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;
    fn from_i64(n: i64) -> Self;

    /// Size heuristic for pivot choice; smaller entries are preferred.
    fn weight(&self) -> usize {
        0
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}
