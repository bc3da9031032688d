//! Extension of graded objects across `A_{P,K} × G_m^r ⊂ A_{P,K} × A^r`.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::Scalar;
use crate::lpk::{check_axioms, LObject};
use crate::monoid::lattice::IntVec;
use crate::monoid::{AffineMonoid, MonoidIdeal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanextError {
    #[error("invalid object: {0}")]
    InvalidObject(String),
    #[error("object does not live on {0}")]
    ModelMismatch(&'static str),
    #[error("malformed window {0:?}, expected (lo,hi] with hi = lo + 1")]
    BadWindow(String),
}

/// Section of `C → C/Z` choosing the representative in `(lo, lo + 1]`,
/// applied to the real part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauSection {
    pub lo: BigRational,
}

impl Default for TauSection {
    fn default() -> Self {
        TauSection::new(BigRational::from_integer((-1).into()))
    }
}

impl TauSection {
    pub fn new(lo: BigRational) -> Self {
        TauSection { lo }
    }

    /// The integer `n` with `q + n` in the window.
    pub fn shift(&self, q: &Scalar) -> i64 {
        let hi = &self.lo + BigRational::one();
        let n = (hi - &q.re).floor();
        n.to_integer().to_i64().expect("shift fits in i64")
    }

    pub fn apply(&self, q: &Scalar) -> Scalar {
        q + &Scalar::from_int(self.shift(q))
    }

    pub fn contains(&self, q: &Scalar) -> bool {
        self.shift(q) == 0
    }

    /// Whether `τ(0) = 0`.
    pub fn fixes_zero(&self) -> bool {
        self.contains(&Scalar::zero())
    }
}

impl fmt::Display for TauSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hi = &self.lo + BigRational::one();
        write!(f, "({},{}]", Scalar::from_rational(self.lo.clone()), Scalar::from_rational(hi))
    }
}

impl FromStr for TauSection {
    type Err = CanextError;

    /// Parses `(lo,hi]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CanextError::BadWindow(s.to_string());
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(bad)?;
        let (lo, hi) = inner.split_once(',').ok_or_else(bad)?;
        let lo: Scalar = lo.trim().parse().map_err(|_| bad())?;
        let hi: Scalar = hi.trim().parse().map_err(|_| bad())?;
        if !lo.is_real() || hi != &lo + &Scalar::one() {
            return Err(bad());
        }
        Ok(TauSection::new(lo.re))
    }
}

impl Serialize for TauSection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TauSection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `A_{P,K} × G_m^r ⊂ A_{P,K} × A^r`; the last `r` coordinates are at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodEmbeddingModel {
    pub core: AffineMonoid,
    pub core_ideal: MonoidIdeal,
    pub infinity_rank: usize,
}

impl GoodEmbeddingModel {
    pub fn new(core: AffineMonoid, core_ideal: MonoidIdeal, infinity_rank: usize) -> Self {
        GoodEmbeddingModel {
            core,
            core_ideal,
            infinity_rank,
        }
    }

    /// `Q = P × N^r`.
    pub fn q(&self) -> AffineMonoid {
        self.core.product(&AffineMonoid::free(self.infinity_rank))
    }

    /// `Q' = P × Z^r`.
    pub fn q_prime(&self) -> AffineMonoid {
        self.core.product(&AffineMonoid::lattice_group(self.infinity_rank))
    }

    /// `K` pulled back to either product.
    pub fn ideal(&self) -> MonoidIdeal {
        let r = self.infinity_rank;
        MonoidIdeal {
            generators: self
                .core_ideal
                .generators
                .iter()
                .map(|g| g.iter().copied().chain(std::iter::repeat_n(0, r)).collect())
                .collect(),
        }
    }

    fn core_rank(&self) -> usize {
        self.core.ambient_rank()
    }

    /// Integer shifts moving each class's infinity degrees into the window.
    pub fn tau_shifts(&self, v: &LObject, tau: &TauSection) -> Vec<IntVec> {
        let a = self.core_rank();
        v.classes
            .iter()
            .map(|c| {
                (0..a + self.infinity_rank)
                    .map(|k| if k < a { 0 } else { tau.shift(&c.degree[k]) })
                    .collect()
            })
            .collect()
    }
}

fn validate(v: &LObject, monoid: &AffineMonoid, ideal: &MonoidIdeal, name: &'static str) -> Result<(), CanextError> {
    if v.monoid != *monoid || v.ideal != *ideal {
        return Err(CanextError::ModelMismatch(name));
    }
    let report = check_axioms(v);
    match report.violations.first() {
        Some(first) => Err(CanextError::InvalidObject(format!("{first:?}"))),
        None => Ok(()),
    }
}

/// `V ↦ V ⊗_{C[Q]} C[Q']`: same basis, now over `Q'`.
pub fn restrict(model: &GoodEmbeddingModel, v: &LObject) -> Result<LObject, CanextError> {
    validate(v, &model.q(), &model.ideal(), "P × N^r")?;
    Ok(LObject {
        monoid: model.q_prime(),
        ..v.clone()
    })
}

/// The extension together with the basis shift `v_c = x^{shift_c} v'_c` of each class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Extension {
    pub object: LObject,
    pub shifts: Vec<IntVec>,
}

/// The lattice over `Q` spanned by `x^{τ(λ')-λ'} v'` for the generators `v'` of `V'`.
pub fn canonical_extension(
    model: &GoodEmbeddingModel,
    vp: &LObject,
    tau: &TauSection,
) -> Result<Extension, CanextError> {
    validate(vp, &model.q_prime(), &model.ideal(), "P × Z^r")?;
    let shifts = model.tau_shifts(vp, tau);
    let object = vp.shift_classes(&shifts, model.q(), model.ideal());
    let report = check_axioms(&object);
    if let Some(first) = report.violations.first() {
        return Err(CanextError::InvalidObject(format!(
            "extension is not an object over P × N^r: {first:?}"
        )));
    }
    Ok(Extension { object, shifts })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExponentsReport {
    /// Infinity coordinates of every generator degree, sorted.
    pub exponents: Vec<Vec<Scalar>>,
    pub adapted: bool,
}

pub fn exponents_report(model: &GoodEmbeddingModel, v: &LObject, tau: &TauSection) -> ExponentsReport {
    let a = model.core_rank();
    let mut exponents: Vec<Vec<Scalar>> = (0..v.rank())
        .map(|j| v.generator_degree(j)[a..].to_vec())
        .collect();
    exponents.sort();
    let adapted = exponents.iter().flatten().all(|q| tau.contains(q));
    ExponentsReport { exponents, adapted }
}

/// Undoes a basis shift, e.g. to compare `restrict(extend(V'))` with `V'`.
pub fn unshift(v: &LObject, shifts: &[IntVec]) -> LObject {
    let back: Vec<IntVec> = shifts.iter().map(|s| s.iter().map(|x| -x).collect()).collect();
    v.shift_classes(&back, v.monoid.clone(), v.ideal.clone())
}

