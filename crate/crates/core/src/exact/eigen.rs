//! Characteristic polynomials, Gaussian-rational roots and joint
//! generalized eigenspace decomposition of commuting matrices.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::poly::Poly;
use super::scalar::Scalar;
use super::ExactError;

/// One joint generalized eigenspace of a commuting family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenBlock {
    /// Eigenvalue of each operator on this block.
    pub label: Vec<Scalar>,
    /// Columns span the block, in reduced column echelon form.
    pub basis: Matrix,
    /// `op_k - label_k` restricted to the block, in the block basis.
    pub nilpotents: Vec<Matrix>,
}

impl EigenBlock {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }
}

/// Characteristic polynomial `det(x·I - m)`, monic, by Faddeev–LeVerrier.
pub fn characteristic_polynomial(m: &Matrix) -> Result<Poly<Scalar>, ExactError> {
    if !m.is_square() {
        return Err(ExactError::NotSquare);
    }
    let n = m.rows();
    let mut coeffs = vec![Scalar::default(); n + 1];
    coeffs[n] = Scalar::from_int(1);
    let mut acc = Matrix::zeros(n, n);
    for k in 1..=n {
        let shifted = m.mul(&acc).add(&Matrix::scalar_matrix(n, &coeffs[n - k + 1]));
        acc = shifted;
        let prod = m.mul(&acc);
        let trace = (0..n).fold(Scalar::default(), |s, i| &s + prod.get(i, i));
        coeffs[n - k] = -(&trace * &Scalar::from_ratio(1, k as i64));
    }
    Ok(Poly::new(coeffs))
}

#[derive(Clone, Copy, Debug)]
struct C64(f64, f64);

impl C64 {
    fn add(self, o: C64) -> C64 {
        C64(self.0 + o.0, self.1 + o.1)
    }
    fn sub(self, o: C64) -> C64 {
        C64(self.0 - o.0, self.1 - o.1)
    }
    fn mul(self, o: C64) -> C64 {
        C64(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn div(self, o: C64) -> C64 {
        let d = o.0 * o.0 + o.1 * o.1;
        C64((self.0 * o.0 + self.1 * o.1) / d, (self.1 * o.0 - self.0 * o.1) / d)
    }
    fn abs(self) -> f64 {
        self.0.hypot(self.1)
    }
}

fn eval_c64(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64(0.0, 0.0), |acc, &c| acc.mul(z).add(c))
}

/// Floating-point root approximations of a monic polynomial (Durand–Kerner).
fn approximate_roots(p: &Poly<Scalar>) -> Vec<C64> {
    let n = p.degree().unwrap_or(0);
    if n == 0 {
        return Vec::new();
    }
    let lead = p.leading();
    let coeffs: Vec<C64> = p
        .coeffs()
        .iter()
        .map(|c| {
            let q = c.checked_div(&lead).expect("nonzero leading coefficient");
            let (a, b) = q.to_f64_pair();
            C64(a, b)
        })
        .collect();
    let radius = 1.0 + coeffs[..n].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let seed = C64(0.4, 0.9);
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let mut w = C64(1.0, 0.0);
            for _ in 0..k {
                w = w.mul(seed);
            }
            C64(w.0 * radius.min(10.0), w.1 * radius.min(10.0))
        })
        .collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut den = C64(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den = den.mul(z[i].sub(z[j]));
                }
            }
            if den.abs() == 0.0 {
                den = C64(1e-12, 0.0);
            }
            let step = eval_c64(&coeffs, z[i]).div(den);
            z[i] = z[i].sub(step);
            delta = delta.max(step.abs());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    z
}

/// Positive divisors of a positive integer, ascending; `None` when too large to factor.
fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u128()?;
    if n == 0 || n > 1u128 << 80 {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d: u128 = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
        if d > 2_000_000 {
            return None;
        }
    }
    small.extend(large.into_iter().rev());
    Some(small.into_iter().map(BigInt::from).collect())
}

fn round_to_int(x: f64) -> Option<BigInt> {
    if !x.is_finite() {
        return None;
    }
    let r = x.round();
    if r.abs() < 9.0e15 {
        Some(BigInt::from(r as i64))
    } else {
        None
    }
}

/// Gaussian integers dividing `c` (with norm dividing `N(c)`), when small enough.
fn gaussian_divisors(c: &Scalar) -> Option<Vec<Scalar>> {
    let norm = c.norm().to_integer();
    let mut out = Vec::new();
    for m in divisors(&norm)? {
        let m = m.to_i64()?;
        let top = m.sqrt();
        for x in -top..=top {
            let y2 = m - x * x;
            let y = y2.sqrt();
            if y * y != y2 {
                continue;
            }
            for y in if y == 0 { vec![0] } else { vec![y, -y] } {
                let d = Scalar::from_rational(BigRational::from_integer(x.into()))
                    + Scalar::new(BigRational::zero(), BigRational::from_integer(y.into()));
                let q = c.checked_div(&d).ok()?;
                if q.re.is_integer() && q.im.is_integer() {
                    out.push(d);
                }
            }
        }
    }
    Some(out)
}

/// All distinct roots in Q(i) of a nonzero polynomial.
///
/// Roots of the square-free part are located by floating-point isolation
/// and confirmed exactly with denominators drawn from the divisors of the
/// cleared leading coefficient; any root missed that way is searched for
/// among quotients of Gaussian divisors of the extreme coefficients.
pub fn gaussian_rational_roots(p: &Poly<Scalar>) -> Vec<Scalar> {
    let Some(deg) = p.degree() else {
        return Vec::new();
    };
    if deg == 0 {
        return Vec::new();
    }
    let monic = p.monic();
    let squarefree = monic.div_rem(&monic.gcd(&monic.derivative())).0.monic();
    let denom = squarefree
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(&c.denominator_lcm()));
    let dens = divisors(&denom).unwrap_or_else(|| vec![denom.clone()]);
    let mut roots: Vec<Scalar> = Vec::new();
    let mut remaining = squarefree.clone();
    for z in approximate_roots(&squarefree) {
        for m in &dens {
            let mf = m.to_f64().unwrap_or(f64::INFINITY);
            let (Some(a), Some(b)) = (round_to_int(z.0 * mf), round_to_int(z.1 * mf)) else {
                continue;
            };
            let cand = Scalar::new(BigRational::new(a, m.clone()), BigRational::new(b, m.clone()));
            if roots.contains(&cand) {
                break;
            }
            if remaining.eval(&cand).is_zero() {
                remaining = remaining.div_rem(&Poly::linear_root(&cand)).0;
                roots.push(cand);
                break;
            }
        }
    }
    if remaining.degree().unwrap_or(0) > 0 {
        roots.extend(divisor_search(&remaining));
    }
    roots.sort();
    roots
}

fn divisor_search(p: &Poly<Scalar>) -> Vec<Scalar> {
    let denom = p
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(&c.denominator_lcm()));
    let scale = Scalar::from_rational(BigRational::from_integer(denom));
    let integral = p.scale(&scale);
    let Some(low) = integral.low_order() else {
        return Vec::new();
    };
    let mut found = Vec::new();
    if low > 0 {
        found.push(Scalar::default());
    }
    let integral = integral.unshift(low);
    let (Some(tops), Some(bottoms)) = (
        gaussian_divisors(&integral.coeff(0)),
        gaussian_divisors(&integral.leading()),
    ) else {
        return found;
    };
    for num in &tops {
        for den in &bottoms {
            let cand = num.checked_div(den).expect("divisor is nonzero");
            if !found.contains(&cand) && integral.eval(&cand).is_zero() {
                found.push(cand);
            }
        }
    }
    found
}

fn restrict(op: &Matrix, basis: &Matrix) -> Matrix {
    basis
        .solve(&op.mul(basis))
        .expect("commuting operator preserves the block")
}

/// Eigenvalues of `m` in Q(i); errors when its characteristic polynomial does not split.
pub fn split_eigenvalues(m: &Matrix, index: usize) -> Result<Vec<Scalar>, ExactError> {
    let cp = characteristic_polynomial(m)?;
    let roots = gaussian_rational_roots(&cp);
    let mut rest = cp.clone();
    for r in &roots {
        let lin = Poly::linear_root(r);
        loop {
            let (q, rem) = rest.div_rem(&lin);
            if !rem.is_zero() {
                break;
            }
            rest = q;
        }
    }
    if rest.degree().unwrap_or(0) > 0 {
        return Err(ExactError::IrrationalEigenvalue {
            operator: index,
            factor: format_poly(&rest),
        });
    }
    Ok(roots)
}

fn format_poly(p: &Poly<Scalar>) -> String {
    let mut terms = Vec::new();
    for (k, c) in p.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let c = if c.is_real() { c.to_string() } else { format!("({c})") };
        terms.push(match k {
            0 => c,
            1 => format!("{c}*x"),
            _ => format!("{c}*x^{k}"),
        });
    }
    terms.join(" + ")
}

/// Joint generalized eigenspace decomposition of pairwise commuting matrices.
///
/// Blocks are ordered lexicographically by label; each basis is the reduced
/// column echelon basis of its span, so the output depends only on the
/// operators.
pub fn eigen_decompose(ops: &[Matrix]) -> Result<Vec<EigenBlock>, ExactError> {
    let first = ops.first().ok_or(ExactError::EmptyFamily)?;
    let n = first.rows();
    for op in ops {
        if !op.is_square() {
            return Err(ExactError::NotSquare);
        }
        if op.rows() != n {
            return Err(ExactError::DimensionMismatch(format!(
                "expected {n}x{n}, found {}x{}",
                op.rows(),
                op.cols()
            )));
        }
    }
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            if !ops[i].commutes_with(&ops[j]) {
                return Err(ExactError::NonCommuting { first: i, second: j });
            }
        }
    }
    let mut blocks: Vec<(Matrix, Vec<Scalar>)> = vec![(Matrix::identity(n), Vec::new())];
    for (k, op) in ops.iter().enumerate() {
        let mut next = Vec::new();
        for (basis, label) in blocks {
            if basis.cols() == 0 {
                continue;
            }
            let local = restrict(op, &basis);
            let d = local.rows();
            for lambda in split_eigenvalues(&local, k)? {
                let shifted = local.sub(&Matrix::scalar_matrix(d, &lambda));
                let kernel = shifted.pow(d as u32).kernel();
                let mut l = label.clone();
                l.push(lambda);
                next.push((basis.mul(&kernel), l));
            }
        }
        blocks = next;
    }
    let mut out: Vec<EigenBlock> = blocks
        .into_iter()
        .map(|(basis, label)| {
            let basis = basis.column_space_basis();
            let nilpotents = ops
                .iter()
                .zip(&label)
                .map(|(op, l)| {
                    let shifted = op.sub(&Matrix::scalar_matrix(n, l));
                    restrict(&shifted, &basis)
                })
                .collect();
            EigenBlock { label, basis, nilpotents }
        })
        .collect();
    out.sort_by(|a, b| a.label.cmp(&b.label));
    let total: usize = out.iter().map(EigenBlock::dim).sum();
    debug_assert_eq!(total, n);
    Ok(out)
}

/// Reassembles `P·(⊕(label_k·I + N_k))·P⁻¹` for operator `k`.
pub fn reassemble(blocks: &[EigenBlock], k: usize) -> Result<Matrix, ExactError> {
    let basis = Matrix::hstack(&blocks.iter().map(|b| b.basis.clone()).collect::<Vec<_>>());
    let parts: Vec<Matrix> = blocks
        .iter()
        .map(|b| Matrix::scalar_matrix(b.dim(), &b.label[k]).add(&b.nilpotents[k]))
        .collect();
    let inv = basis.inverse()?;
    Ok(basis.mul(&Matrix::block_diag(&parts)).mul(&inv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::from_ratio(n, d)
    }

    #[test]
    fn triangular_block() {
        let m = Matrix::from_rows(vec![vec![q(1, 2), q(1, 1)], vec![q(0, 1), q(1, 2)]]).unwrap();
        let blocks = eigen_decompose(&[m]).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].label, vec![q(1, 2)]);
        assert_eq!(blocks[0].nilpotents[0], Matrix::from_i64(&[&[0, 1], &[0, 0]]));
    }

    #[test]
    fn diagonal_pair() {
        let u1 = Matrix::from_i64(&[&[0, 0], &[0, 1]]);
        let u2 = Matrix::zeros(2, 2);
        let blocks = eigen_decompose(&[u1, u2]).unwrap();
        let labels: Vec<_> = blocks.iter().map(|b| b.label.clone()).collect();
        assert_eq!(labels, vec![vec![q(0, 1), q(0, 1)], vec![q(1, 1), q(0, 1)]]);
        assert!(blocks.iter().all(|b| b.nilpotents.iter().all(Matrix::is_zero)));
    }

    #[test]
    fn irreducible_quadratic_is_rejected() {
        let m = Matrix::from_i64(&[&[0, 1], &[2, 0]]);
        assert!(matches!(
            eigen_decompose(&[m]),
            Err(ExactError::IrrationalEigenvalue { .. })
        ));
    }

    #[test]
    fn gaussian_eigenvalues_are_found() {
        // Rotation by 90 degrees has eigenvalues ±i.
        let m = Matrix::from_i64(&[&[0, -1], &[1, 0]]);
        let blocks = eigen_decompose(std::slice::from_ref(&m)).unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(reassemble(&blocks, 0).unwrap(), m);
    }

    #[test]
    fn noncommuting_family_is_rejected() {
        let a = Matrix::from_i64(&[&[0, 1], &[0, 0]]);
        let b = Matrix::from_i64(&[&[0, 0], &[1, 0]]);
        assert!(matches!(
            eigen_decompose(&[a, b]),
            Err(ExactError::NonCommuting { first: 0, second: 1 })
        ));
    }

    #[test]
    fn roots_with_mixed_denominators() {
        let roots = [q(1, 6), q(-5, 4), q(2, 3), Scalar::gaussian((1, 2), (-1, 3))];
        let p = roots
            .iter()
            .fold(Poly::one(), |acc, r| acc.mul(&Poly::linear_root(r)));
        let mut expected = roots.to_vec();
        expected.sort();
        assert_eq!(gaussian_rational_roots(&p), expected);
    }

    #[test]
    fn characteristic_polynomial_of_companion() {
        let m = Matrix::from_i64(&[&[0, -6], &[1, 5]]);
        let cp = characteristic_polynomial(&m).unwrap();
        assert_eq!(cp.coeffs(), &[q(6, 1), q(-5, 1), q(1, 1)]);
        assert!(split_eigenvalues(&m, 0).unwrap() == vec![q(2, 1), q(3, 1)]);
    }
}
