//! Rational functions in `t` over Q(i), kept in lowest terms with a monic denominator.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::exact::{Field, Poly, Scalar};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly<Scalar>,
    den: Poly<Scalar>,
}

impl RatFunc {
    /// `num / den`, or `None` when `den` is zero.
    pub fn new(num: Poly<Scalar>, den: Poly<Scalar>) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(Self::from_poly(Poly::zero()));
        }
        let (num, den) = if den.coeffs()[..den.coeffs().len() - 1].iter().all(Field::is_zero) {
            // `den = c·t^k`: the common factor is a power of `t`.
            let k = den.degree().expect("nonzero").min(num.low_order().expect("nonzero"));
            (shift_down(&num, k), shift_down(&den, k))
        } else {
            let g = num.gcd(&den);
            (num.div_rem(&g).0, den.div_rem(&g).0)
        };
        let lead = den.leading().inv().expect("nonzero leading coefficient");
        Some(RatFunc {
            num: num.scale(&lead),
            den: den.scale(&lead),
        })
    }

    pub fn from_poly(num: Poly<Scalar>) -> Self {
        RatFunc { num, den: Poly::one() }
    }

    pub fn constant(c: Scalar) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(Scalar::from_int(n))
    }

    /// `t^k` for any integer `k`.
    pub fn t_pow(k: i64) -> Self {
        let mono = Poly::monomial(Scalar::one(), k.unsigned_abs() as usize);
        if k >= 0 {
            Self::from_poly(mono)
        } else {
            RatFunc { num: Poly::one(), den: mono }
        }
    }

    pub fn t() -> Self {
        Self::t_pow(1)
    }

    pub fn numerator(&self) -> &Poly<Scalar> {
        &self.num
    }

    pub fn denominator(&self) -> &Poly<Scalar> {
        &self.den
    }

    /// Order of vanishing at `t = 0`; `None` for the zero function.
    pub fn valuation(&self) -> Option<i64> {
        let n = self.num.low_order()?;
        let d = self.den.low_order().expect("nonzero denominator");
        Some(n as i64 - d as i64)
    }

    /// Order of the pole at zero, or 0.
    pub fn pole_order(&self) -> usize {
        self.valuation().map_or(0, |v| (-v).max(0) as usize)
    }

    pub fn is_constant(&self) -> bool {
        self.num.degree().unwrap_or(0) == 0 && self.den.degree() == Some(0)
    }

    /// Value at `t = 0` when there is no pole there.
    pub fn value_at_zero(&self) -> Option<Scalar> {
        match self.valuation() {
            None => Some(Scalar::zero()),
            Some(v) if v < 0 => None,
            // In lowest terms a denominator vanishing at zero forces a pole.
            Some(_) => Some(&self.num.coeff(0) * &Field::inv(&self.den.coeff(0)).expect("nonzero")),
        }
    }

    /// `t · d/dt`.
    pub fn euler_derivative(&self) -> Self {
        let top = self
            .num
            .euler_derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.euler_derivative()));
        Self::new(top, self.den.mul(&self.den)).expect("nonzero denominator")
    }

    /// `t f'/f`; `None` for the zero function.
    pub fn log_derivative(&self) -> Option<Self> {
        Field::inv(self).map(|inv| self.euler_derivative().mul(&inv))
    }

    pub fn pow(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { Field::inv(self)? } else { self.clone() };
        let k = e.unsigned_abs() as u32;
        Some(RatFunc {
            num: base.num.pow(k),
            den: base.den.pow(k),
        })
    }
}

fn shift_down(p: &Poly<Scalar>, k: usize) -> Poly<Scalar> {
    Poly::new(p.coeffs()[k..].to_vec())
}

impl Field for RatFunc {
    fn weight(&self) -> usize {
        let terms = |p: &Poly<Scalar>| p.coeffs().iter().filter(|c| !c.is_zero()).count();
        terms(&self.num) + terms(&self.den)
    }

    fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }
    fn one() -> Self {
        Self::from_poly(Poly::one())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self::new(self.num.add(&o.num), self.den.clone()).expect("nonzero");
        }
        let num = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        Self::new(num, self.den.mul(&o.den)).expect("nonzero")
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero")
    }
    fn neg(&self) -> Self {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Self::new(self.den.clone(), self.num.clone())
        }
    }
    fn from_i64(n: i64) -> Self {
        Self::from_int(n)
    }
}

fn write_poly(p: &Poly<Scalar>) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, c) in p.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let term = if k == 0 {
            c.to_string()
        } else {
            let var = if k == 1 { "t".to_string() } else { format!("t^{k}") };
            if *c == Scalar::one() {
                var
            } else if *c == -&Scalar::one() {
                format!("-{var}")
            } else if c.is_real() {
                format!("{c}*{var}")
            } else {
                format!("({c})*{var}")
            }
        };
        if !out.is_empty() && !term.starts_with('-') {
            out.push('+');
        }
        out.push_str(&term);
    }
    out
}

fn term_count(p: &Poly<Scalar>) -> usize {
    p.coeffs().iter().filter(|c| !c.is_zero()).count()
}

impl fmt::Display for RatFunc {
    /// Parseable expression such as `t^2-1/2*t`, `1/t` or `(t+1)/(t^2-3)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = write_poly(&self.num);
        if self.den.degree() == Some(0) {
            return f.write_str(&num);
        }
        let wrap = |p: &Poly<Scalar>, s: String| {
            let complex_constant = term_count(p) == 1 && p.coeffs().iter().any(|c| !c.is_real());
            if term_count(p) > 1 || complex_constant {
                format!("({s})")
            } else {
                s
            }
        };
        write!(f, "{}/{}", wrap(&self.num, num), wrap(&self.den, write_poly(&self.den)))
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for RatFunc {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
