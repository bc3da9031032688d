//! Independent brute-force checks used by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use logres_core::exact::Field;
use logres_core::germ::{DiffModuleGerm, RatFunc};
use logres_core::monoid::AffineMonoid;
use logres_core::{Matrix, Scalar};

/// Generator-index sets of faces, found by scanning integer functionals in a box.
pub fn faces_by_functional_scan(p: &AffineMonoid, bound: i64) -> BTreeSet<Vec<usize>> {
    let d = p.ambient_rank();
    let gens = p.generators();
    let mut out = BTreeSet::new();
    let mut phi = vec![-bound; d];
    loop {
        let values: Vec<i64> = gens.iter().map(|g| g.iter().zip(&phi).map(|(a, b)| a * b).sum()).collect();
        if values.iter().all(|&v| v >= 0) {
            out.insert((0..gens.len()).filter(|&i| values[i] == 0).collect());
        }
        let mut k = 0;
        while k < d {
            phi[k] += 1;
            if phi[k] <= bound {
                break;
            }
            phi[k] = -bound;
            k += 1;
        }
        if k == d {
            break;
        }
    }
    out
}

/// All sums `Σ c_i g_i` with `0 <= c_i <= bound`.
pub fn box_points(p: &AffineMonoid, bound: i64) -> HashSet<Vec<i64>> {
    let mut pts: HashSet<Vec<i64>> = HashSet::from([vec![0; p.ambient_rank()]]);
    for g in p.generators() {
        let mut next = HashSet::new();
        for x in &pts {
            for c in 0..=bound {
                next.insert(x.iter().zip(g).map(|(a, b)| a + c * b).collect::<Vec<i64>>());
            }
        }
        pts = next;
    }
    pts
}

/// `x ∈ √K` iff `n·x - k ∈ P` for some `n <= max_multiple` and generator `k`.
pub fn in_radical_by_multiples(p: &AffineMonoid, ideal_gens: &[Vec<i64>], x: &[i64], max_multiple: i64) -> bool {
    (1..=max_multiple).any(|n| {
        ideal_gens.iter().any(|k| {
            let y: Vec<i64> = x.iter().zip(k).map(|(a, b)| n * a - b).collect();
            p.contains(&y)
        })
    })
}

/// Terms of negative degree in the Laurent expansion of `f` at `t = 0`,
/// as `c[k-1]` = coefficient of `t^-k`; `None` when the pole is deeper than `depth`.
fn polar_coefficients(f: &RatFunc, depth: usize) -> Option<Vec<Scalar>> {
    let mut out = vec![Scalar::zero(); depth];
    let Some(v) = f.valuation().filter(|&v| v < 0) else {
        return Some(out);
    };
    let order = (-v) as usize;
    if order > depth {
        return None;
    }
    let g = f.mul(&RatFunc::t_pow(-v));
    let (num, den) = (g.numerator(), g.denominator());
    let d0 = den.coeff(0).inv().expect("unit at zero");
    let mut series: Vec<Scalar> = Vec::new();
    for k in 0..order {
        let mut c = num.coeff(k);
        for (j, prev) in series.iter().enumerate() {
            c = &c - &(&den.coeff(k - j) * prev);
        }
        series.push(&c * &d0);
    }
    // series[k] multiplies t^(k + v) = t^-(order - k).
    for (k, c) in series.into_iter().enumerate() {
        out[order - k - 1] = c;
    }
    Some(out)
}

/// Echelon basis of a subspace of `Q(i)^dim`.
struct Span {
    rows: Vec<(usize, Vec<Scalar>)>,
}

impl Span {
    /// Adds `v`; returns false when it was already in the span.
    fn insert(&mut self, mut v: Vec<Scalar>) -> bool {
        for (pivot, row) in &self.rows {
            if !v[*pivot].is_zero() {
                let f = v[*pivot].clone();
                for (x, y) in v.iter_mut().zip(row) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        let Some(pivot) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[pivot].inv().unwrap();
        let v: Vec<Scalar> = v.iter().map(|x| x * &inv).collect();
        for (_, row) in self.rows.iter_mut() {
            if !row[pivot].is_zero() {
                let f = row[pivot].clone();
                for (x, y) in row.iter_mut().zip(&v) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        self.rows.push((pivot, v));
        true
    }
}

/// Saturates the standard lattice `L0` under `Θ`; regular iff the saturation
/// stays inside `t^-B L0` with `B = n(1 + pole order)`. Lattices containing
/// `L0` are tracked through their image in the finite-dimensional space
/// `t^-B L0 / L0`, coordinate `(j, k)` standing for `t^-(k+1) e_j`.
pub fn fuchsian_by_saturation(g: &DiffModuleGerm) -> bool {
    let n = g.rank();
    let depth = n * (1 + g.pole_order());
    let coords = |vector: &[RatFunc]| -> Option<Vec<Scalar>> {
        let mut out = Vec::with_capacity(n * depth);
        for f in vector {
            out.extend(polar_coefficients(f, depth)?);
        }
        Some(out)
    };
    let lift = |c: &[Scalar]| -> Vec<RatFunc> {
        (0..n)
            .map(|j| {
                (0..depth).fold(RatFunc::zero(), |acc, k| {
                    acc.add(&RatFunc::constant(c[j * depth + k].clone()).mul(&RatFunc::t_pow(-(k as i64) - 1)))
                })
            })
            .collect()
    };
    let mut span = Span { rows: Vec::new() };
    let mut queue: Vec<Vec<RatFunc>> = (0..n)
        .map(|i| {
            let e: Vec<RatFunc> = (0..n).map(|j| if i == j { RatFunc::one() } else { RatFunc::zero() }).collect();
            g.apply_theta(&e)
        })
        .collect();
    while let Some(vector) = queue.pop() {
        let Some(c) = coords(&vector) else {
            return false;
        };
        if !span.insert(c.clone()) {
            continue;
        }
        let w = lift(&c);
        queue.push(w.iter().map(|f| f.mul(&RatFunc::t())).collect());
        queue.push(g.apply_theta(&w));
    }
    true
}

/// Koszul cohomology from explicit kernels and images, with wedge signs from
/// sorting permutations.
pub fn koszul_by_kernels(ops: &[Matrix], n: usize) -> Vec<usize> {
    let r = ops.len();
    let wedges: Vec<Vec<Vec<usize>>> = (0..=r)
        .map(|p| {
            let mut sets: Vec<Vec<usize>> = Vec::new();
            for mask in 0u32..(1 << r) {
                if mask.count_ones() as usize == p {
                    sets.push((0..r).filter(|k| mask & (1 << k) != 0).collect());
                }
            }
            sets
        })
        .collect();
    let d = |p: usize| -> Matrix {
        let (src, dst) = (&wedges[p], &wedges[p + 1]);
        let mut m = Matrix::zeros(n * dst.len(), n * src.len());
        for (si, s) in src.iter().enumerate() {
            for (k, op) in ops.iter().enumerate() {
                if s.contains(&k) {
                    continue;
                }
                let mut word = vec![k];
                word.extend(s);
                let mut sorted = word.clone();
                sorted.sort();
                let inversions = (0..word.len())
                    .flat_map(|a| (a + 1..word.len()).map(move |b| (a, b)))
                    .filter(|&(a, b)| word[a] > word[b])
                    .count();
                let sign = if inversions % 2 == 0 { Scalar::one() } else { -&Scalar::one() };
                let ti = dst.iter().position(|t| *t == sorted).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        let v = m.get(ti * n + i, si * n + j) + &(op.get(i, j) * &sign);
                        m.set(ti * n + i, si * n + j, v);
                    }
                }
            }
        }
        m
    };
    let maps: Vec<Matrix> = (0..r).map(d).collect();
    (0..=r)
        .map(|p| {
            let kernel = if p < r { maps[p].kernel().cols() } else { n * wedges[p].len() };
            let image = if p > 0 { maps[p - 1].rank() } else { 0 };
            kernel - image
        })
        .collect()
}
