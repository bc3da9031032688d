//! Seeded random instances. `LOGRES_SEED` overrides the default seed.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use logres_core::canext::GoodEmbeddingModel;
use logres_core::exact::Field;
use logres_core::germ::{DiffModuleGerm, GermMap, RatFunc, RatMatrix};
use logres_core::lpk::{check_axioms, Coupling, GeneratorClass, LObject, LogOperator};
use logres_core::monoid::{AffineMonoid, MonoidIdeal};
use logres_core::rh::{LogConnection, LogDifferentials, MonomialMatrix};
use logres_core::cohomology::{LocalBlock, LocalSystem};
use logres_core::exact::Poly;
use logres_core::{Matrix, Scalar};

pub const DEFAULT_SEED: u64 = 0x5eed_1092;

pub fn seed() -> u64 {
    std::env::var("LOGRES_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed().wrapping_mul(0x9e37_79b9).wrapping_add(stream))
}

pub fn rational(rng: &mut impl Rng, max_den: i64, max_abs: i64) -> Scalar {
    let den = rng.gen_range(1..=max_den);
    let num = rng.gen_range(-max_abs * den..=max_abs * den);
    Scalar::from_ratio(num, den)
}

/// Integer matrix with determinant ±1, as a product of elementary matrices.
pub fn unimodular(rng: &mut impl Rng, n: usize) -> Matrix {
    let mut m = Matrix::identity(n);
    if n < 2 {
        return m;
    }
    for _ in 0..n + 2 {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        while j == i {
            j = rng.gen_range(0..n);
        }
        let c = Scalar::from_int(rng.gen_range(-2..=2));
        let mut e = Matrix::identity(n);
        e.set(i, j, c);
        m = m.mul(&e);
    }
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    let all: Vec<usize> = (0..n).collect();
    m.submatrix(&rows, &all)
}

fn jordan(n: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| if j == i + 1 { Scalar::one() } else { Scalar::zero() })
}

/// `d` commuting `n×n` matrices with eigenvalues in `Q` of denominator at most `max_den`.
pub fn commuting_family(rng: &mut impl Rng, n: usize, d: usize, max_den: i64) -> Vec<Matrix> {
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = rng.gen_range(1..=left.min(3));
        sizes.push(s);
        left -= s;
    }
    let mut blocks: Vec<Vec<Matrix>> = vec![Vec::new(); d];
    for &s in &sizes {
        let nil = jordan(s);
        for block in blocks.iter_mut() {
            let lambda = rational(rng, max_den, 2);
            let c = Scalar::from_int(rng.gen_range(-1..=2));
            block.push(Matrix::scalar_matrix(s, &lambda).add(&nil.scale(&c)));
        }
    }
    let s = unimodular(rng, n);
    let s_inv = s.inverse().unwrap();
    blocks
        .into_iter()
        .map(|bs| s.mul(&Matrix::block_diag(&bs)).mul(&s_inv))
        .collect()
}

/// Free monoid `N^d` with either the empty or the maximal ideal.
pub fn free_model(rng: &mut impl Rng, d: usize) -> (AffineMonoid, MonoidIdeal) {
    let p = AffineMonoid::free(d);
    let k = if rng.gen_bool(0.5) { MonoidIdeal::maximal(&p) } else { MonoidIdeal::empty() };
    (p, k)
}

pub fn constant_flat(rng: &mut impl Rng, max_rank: usize, max_dirs: usize) -> LogConnection {
    let d = rng.gen_range(1..=max_dirs);
    let n = rng.gen_range(1..=max_rank);
    let (p, k) = free_model(rng, d);
    LogConnection::constant(p, k, commuting_family(rng, n, d, 6)).unwrap()
}

/// Hollow model `N^a × Z^s` with the sharp and unit coordinates interleaved at random.
pub fn hollow_model(rng: &mut impl Rng, a: usize, s: usize) -> (AffineMonoid, MonoidIdeal, Vec<usize>, Vec<usize>) {
    let d = a + s;
    let mut coords: Vec<usize> = (0..d).collect();
    coords.shuffle(rng);
    let (sharp, unit) = coords.split_at(a);
    let (mut sharp, mut unit) = (sharp.to_vec(), unit.to_vec());
    sharp.sort();
    unit.sort();
    let e = |i: usize, v: i64| (0..d).map(|j| if i == j { v } else { 0 }).collect::<Vec<i64>>();
    let mut gens: Vec<Vec<i64>> = sharp.iter().map(|&i| e(i, 1)).collect();
    for &i in &unit {
        gens.push(e(i, 1));
        gens.push(e(i, -1));
    }
    let p = AffineMonoid::new(d, gens).unwrap();
    let k = MonoidIdeal::maximal(&p);
    (p, k, sharp, unit)
}

pub fn hollow_constant_flat(rng: &mut impl Rng, max_rank: usize) -> LogConnection {
    let (a, s) = *[(1, 0), (2, 0), (0, 1), (1, 1), (2, 1), (1, 2), (0, 2)].choose(rng).unwrap();
    let (p, k, _, _) = hollow_model(rng, a, s);
    let n = rng.gen_range(1..=max_rank);
    LogConnection::constant(p, k, commuting_family(rng, n, a + s, 4)).unwrap()
}

fn random_matrix(rng: &mut impl Rng, n: usize) -> Matrix {
    Matrix::from_fn(n, n, |_, _| Scalar::from_int(rng.gen_range(-2..=2)))
}

/// Connections on hollow models, flat or not, with constant or monomial coefficients.
pub fn hollow_connection(rng: &mut impl Rng) -> LogConnection {
    let a = rng.gen_range(1..=2);
    let s = rng.gen_range(0..=2);
    let (p, k, sharp, unit) = hollow_model(rng, a, s);
    let d = a + s;
    let n = rng.gen_range(1..=3);
    let diff = LogDifferentials::new(p.clone(), k.clone()).unwrap();
    let mono = |i: usize, m: i64| (0..d).map(|j| if j == i { m } else { 0 }).collect::<Vec<i64>>();
    let mut omega = vec![MonomialMatrix::zero(n); d];
    match rng.gen_range(0..4) {
        0 => {
            for (w, u) in omega.iter_mut().zip(commuting_family(rng, n, d, 3)) {
                *w = MonomialMatrix::constant_in(d, u);
            }
        }
        1 => {
            for w in omega.iter_mut() {
                *w = MonomialMatrix::constant_in(d, random_matrix(rng, n));
            }
        }
        2 => {
            // Constant commuting residues, torus coefficients built from matrices commuting with them.
            let family = commuting_family(rng, n, a + 1, 3);
            for (w, &i) in sharp.iter().enumerate() {
                omega[i] = MonomialMatrix::constant_in(d, family[w].clone());
            }
            if let Some(&z) = unit.first() {
                let m = rng.gen_range(-2..=2);
                omega[z] = MonomialMatrix::monomial(mono(z, m), family[a].clone());
            }
        }
        _ => {
            for w in omega.iter_mut() {
                *w = MonomialMatrix::constant_in(d, random_matrix(rng, n).scale(&Scalar::from_int(rng.gen_range(0..=1))));
            }
            if let Some(&z) = unit.first() {
                let i = sharp[0];
                let m = rng.gen_range(1..=2) * if rng.gen_bool(0.5) { 1 } else { -1 };
                omega[i] = omega[i].add(&MonomialMatrix::monomial(mono(z, m), random_matrix(rng, n)));
            }
        }
    }
    LogConnection::new(diff, n, omega).unwrap()
}

fn nilpotent_powers(rng: &mut impl Rng, dim: usize, d: usize) -> Vec<Matrix> {
    let n = if rng.gen_bool(0.5) { jordan(dim) } else { Matrix::zeros(dim, dim) };
    (0..d)
        .map(|_| {
            let c = Scalar::from_int(rng.gen_range(-1..=1));
            let c2 = Scalar::from_int(rng.gen_range(-1..=1));
            n.scale(&c).add(&n.mul(&n).scale(&c2))
        })
        .collect()
}

/// An object over `model.q_prime()` whose classes may be linked by couplings.
pub fn object_over_q_prime(rng: &mut impl Rng, model: &GoodEmbeddingModel) -> LObject {
    let a = model.core.ambient_rank();
    let d = a + model.infinity_rank;
    loop {
        let count = rng.gen_range(1..=3);
        let mut classes: Vec<GeneratorClass> = Vec::new();
        for _ in 0..count {
            let degree: Vec<Scalar> = if !classes.is_empty() && rng.gen_bool(0.4) {
                let base: &GeneratorClass = classes.choose(rng).unwrap();
                (0..d)
                    .map(|k| if k < a { base.degree[k].clone() } else { &base.degree[k] + &Scalar::from_int(rng.gen_range(-2..=2)) })
                    .collect()
            } else {
                (0..d).map(|k| if k < a { rational(rng, 3, 1) } else { rational(rng, 4, 3) }).collect()
            };
            let dim = rng.gen_range(1..=2);
            classes.push(GeneratorClass {
                monodromy: degree
                    .iter()
                    .zip(nilpotent_powers(rng, dim, d))
                    .map(|(l, n)| LogOperator { label: l.clone(), nilpotent: n })
                    .collect(),
                degree,
                dim,
            });
        }
        let mut v = LObject::new(model.q_prime(), model.ideal(), classes, Vec::new());
        let n = v.rank();
        if rng.gen_bool(0.6) && n > 1 {
            let (from, to) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let gap: Option<Vec<i64>> = v
                .generator_degree(from)
                .iter()
                .zip(v.generator_degree(to))
                .map(|(x, y)| (x - y).to_i64())
                .collect();
            if let Some(gap) = gap {
                let direction = rng.gen_range(0..d);
                v.couplings.push(Coupling {
                    direction,
                    from,
                    to,
                    coefficient: Scalar::from_int(rng.gen_range(1..=3)),
                    exponent: gap,
                });
            }
        }
        if check_axioms(&v).is_valid() {
            return v;
        }
    }
}

pub fn embedding_model(rng: &mut impl Rng) -> GoodEmbeddingModel {
    let a = rng.gen_range(0..=1);
    let (p, k) = free_model(rng, a);
    GoodEmbeddingModel::new(p, k, rng.gen_range(1..=3))
}

pub fn local_system(rng: &mut impl Rng) -> LocalSystem {
    let r = rng.gen_range(1..=3);
    let mut blocks = Vec::new();
    let mut left = rng.gen_range(1..=4);
    while left > 0 {
        let dim = rng.gen_range(1..=left);
        left -= dim;
        blocks.push(LocalBlock {
            labels: (0..r).map(|_| rational(rng, 4, 2)).collect(),
            nilpotents: nilpotent_powers(rng, dim, r),
        });
    }
    LocalSystem { directions: r, blocks, couplings: Vec::new() }
}

pub fn poly(coeffs: &[i64]) -> Poly<Scalar> {
    Poly::new(coeffs.iter().map(|&c| Scalar::from_int(c)).collect())
}

/// `t^m · u(t)` with `u(0) != 0`.
pub fn unit_series_value(rng: &mut impl Rng, m: i64) -> RatFunc {
    let mut num: Vec<i64> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(-3..=3)).collect();
    num[0] = *[1, 2, -1, 3].choose(rng).unwrap();
    let mut den: Vec<i64> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(-2..=2)).collect();
    den[0] = *[1, -2, 1].choose(rng).unwrap();
    let u = RatFunc::new(poly(&num), poly(&den)).unwrap();
    u.mul(&RatFunc::t_pow(m))
}

pub fn germ_with_center(rng: &mut impl Rng, conn: &LogConnection) -> GermMap {
    let p = conn.monoid();
    let face_idx = rng.gen_range(0..p.faces().len());
    let face = p.faces()[face_idx].clone();
    let values = (0..p.ambient_rank())
        .map(|k| {
            let m = if face.contains_index(k) { 0 } else { rng.gen_range(1..=3) };
            unit_series_value(rng, m)
        })
        .collect();
    GermMap { target_face: face, values }
}

/// Gauge with entries `t^j · c` of pole order at most 2, invertible.
pub fn gauge(rng: &mut impl Rng, n: usize) -> RatMatrix {
    loop {
        let g = RatMatrix::from_fn(n, n, |i, j| {
            if i == j {
                RatFunc::t_pow(rng.gen_range(-1..=1)).mul(&RatFunc::from_int(*[1, 2, -1].choose(rng).unwrap()))
            } else if rng.gen_bool(0.5) {
                RatFunc::t_pow(rng.gen_range(-2..=2)).mul(&RatFunc::from_int(rng.gen_range(-2..=2)))
            } else {
                RatFunc::zero()
            }
        });
        let ok = g.inverse().is_ok_and(|inv| inv.entries().all(|f| f.pole_order() <= 2));
        if ok {
            return g;
        }
    }
}

pub fn constant_germ(rng: &mut impl Rng, n: usize) -> DiffModuleGerm {
    DiffModuleGerm::constant(&Matrix::from_fn(n, n, |_, _| rational(rng, 3, 2)))
}
