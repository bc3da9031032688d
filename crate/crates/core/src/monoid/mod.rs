//! Affine monoids inside Z^d: faces, ideals, radicals, localization,
//! quotients and the hollow / locally-constant classification of the
//! models `Spec C[P]/(K)`.

pub mod lattice;

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{Matrix, Scalar};
use lattice::{coordinates, dot, hermite_basis, integer_kernel, smith_diagonal, IntVec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonoidError {
    #[error("vector {vector:?} does not have length {expected}")]
    WrongLength { vector: IntVec, expected: usize },
    #[error("face {0:?} is not a face of the monoid")]
    NotAFace(Vec<usize>),
    #[error("element {0:?} does not lie in the monoid")]
    NotInMonoid(IntVec),
}

/// A finitely generated submonoid of Z^d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMonoid {
    ambient_rank: usize,
    generators: Vec<IntVec>,
    search_bound: Option<i64>,
    lattice: Vec<IntVec>,
    intrinsic: Vec<IntVec>,
    facets: Vec<IntVec>,
    faces: Vec<Face>,
}

/// A face, recorded by the generators it contains.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Face {
    pub generator_indices: Vec<usize>,
    pub span: Vec<IntVec>,
    /// Functional in lattice coordinates, nonnegative on the monoid and zero exactly on the face.
    #[serde(skip)]
    normal: IntVec,
}

/// An ideal presented by finitely many generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MonoidIdeal {
    pub generators: Vec<IntVec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelClass {
    pub locally_constant: bool,
    pub hollow: bool,
}

/// Lattice quotient data for `P_F / F^gp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientMap {
    /// Rows of the projection, in lattice coordinates of `P^gp`.
    pub projection: Vec<IntVec>,
    /// Image of each generator of `P`.
    pub images: Vec<IntVec>,
    pub monoid: AffineMonoid,
}

impl AffineMonoid {
    pub fn new(ambient_rank: usize, generators: Vec<IntVec>) -> Result<Self, MonoidError> {
        if let Some(bad) = generators.iter().find(|g| g.len() != ambient_rank) {
            return Err(MonoidError::WrongLength {
                vector: bad.clone(),
                expected: ambient_rank,
            });
        }
        let lattice = hermite_basis(&generators, ambient_rank);
        let intrinsic: Vec<IntVec> = generators
            .iter()
            .map(|g| coordinates(&lattice, g).expect("generator lies in its own lattice"))
            .collect();
        let facets = facet_normals(&intrinsic, lattice.len());
        let faces = enumerate_faces(&generators, &intrinsic, &facets);
        Ok(AffineMonoid {
            ambient_rank,
            generators,
            search_bound: None,
            lattice,
            intrinsic,
            facets,
            faces,
        })
    }

    /// The free monoid N^d.
    pub fn free(d: usize) -> Self {
        let gens = (0..d).map(|i| unit_vector(d, i)).collect();
        Self::new(d, gens).expect("well-formed generators")
    }

    /// The group Z^d, generated by `±e_i`.
    pub fn lattice_group(d: usize) -> Self {
        let gens = (0..d)
            .flat_map(|i| [unit_vector(d, i), lattice::neg(&unit_vector(d, i))])
            .collect();
        Self::new(d, gens).expect("well-formed generators")
    }

    /// Product monoid `self × other` in `Z^(d1+d2)`.
    pub fn product(&self, other: &AffineMonoid) -> Self {
        let d = self.ambient_rank + other.ambient_rank;
        let mut gens: Vec<IntVec> = self
            .generators
            .iter()
            .map(|g| g.iter().copied().chain(std::iter::repeat_n(0, other.ambient_rank)).collect())
            .collect();
        gens.extend(
            other
                .generators
                .iter()
                .map(|g| std::iter::repeat_n(0, self.ambient_rank).chain(g.iter().copied()).collect()),
        );
        let mut out = Self::new(d, gens).expect("well-formed generators");
        out.search_bound = self.search_bound.max(other.search_bound);
        out
    }

    /// Overrides the coefficient bound used by membership search.
    pub fn with_search_bound(mut self, bound: i64) -> Self {
        self.search_bound = Some(bound);
        self
    }

    pub fn search_bound(&self) -> Option<i64> {
        self.search_bound
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn generators(&self) -> &[IntVec] {
        &self.generators
    }

    /// Rank of `P^gp`.
    pub fn rank(&self) -> usize {
        self.lattice.len()
    }

    /// Hermite basis of `P^gp`.
    pub fn group_basis(&self) -> &[IntVec] {
        &self.lattice
    }

    /// True when `P^gp` is all of `Z^d`.
    pub fn spans_ambient_lattice(&self) -> bool {
        self.lattice.len() == self.ambient_rank
            && self
                .lattice
                .iter()
                .enumerate()
                .all(|(i, row)| *row == unit_vector(self.ambient_rank, i))
    }

    /// Coordinates in the Hermite basis of `P^gp`.
    pub fn lattice_coordinates(&self, x: &[i64]) -> Option<IntVec> {
        if x.len() != self.ambient_rank {
            return None;
        }
        coordinates(&self.lattice, x)
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// The minimal face, whose group is the unit group `P^×`.
    pub fn unit_face(&self) -> &Face {
        &self.faces[0]
    }

    /// The face equal to `P` itself.
    pub fn full_face(&self) -> &Face {
        self.faces.last().expect("P is always a face")
    }

    pub fn is_sharp(&self) -> bool {
        self.face_rank(self.unit_face()) == 0
    }

    /// True when `P ≅ N^r`: the primitive ray vectors lie in `P` and form a
    /// basis of `P^gp`.
    pub fn is_free(&self) -> bool {
        if !self.is_sharp() {
            return false;
        }
        let rays: Vec<IntVec> = self
            .faces
            .iter()
            .filter(|f| self.face_rank(f) == 1)
            .map(|f| {
                let g = &f.span[0];
                let div = g.iter().fold(0i64, |acc, &x| num_integer::gcd(acc, x));
                g.iter().map(|x| x / div).collect()
            })
            .collect();
        if rays.len() != self.rank() || !rays.iter().all(|r| self.contains(r)) {
            return false;
        }
        let coords: Option<Vec<IntVec>> = rays.iter().map(|r| self.lattice_coordinates(r)).collect();
        coords.is_some_and(|c| {
            let diag = smith_diagonal(&c, self.rank());
            diag.len() == self.rank() && diag.iter().all(|&d| d == 1)
        })
    }

    /// Rank of `F^gp`.
    pub fn face_rank(&self, face: &Face) -> usize {
        hermite_basis(&face.span, self.ambient_rank).len()
    }

    /// Looks up the face containing exactly the given generators.
    pub fn face_by_indices(&self, indices: &[usize]) -> Option<&Face> {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        self.faces.iter().find(|f| f.generator_indices == sorted)
    }

    /// Smallest face containing the given generators.
    pub fn face_hull(&self, indices: &[usize]) -> &Face {
        self.faces
            .iter()
            .find(|f| indices.iter().all(|i| f.generator_indices.contains(i)))
            .expect("P contains every generator")
    }

    fn validate_face(&self, face: &Face) -> Result<(), MonoidError> {
        if self
            .faces
            .iter()
            .any(|f| f.generator_indices == face.generator_indices && f.span == face.span)
        {
            Ok(())
        } else {
            Err(MonoidError::NotAFace(face.generator_indices.clone()))
        }
    }

    fn default_bound(&self, target: &[i64]) -> i64 {
        self.search_bound.unwrap_or_else(|| {
            let m = self
                .generators
                .iter()
                .flatten()
                .chain(target)
                .map(|v| v.abs())
                .max()
                .unwrap_or(0);
            (4 * m).max(4)
        })
    }

    /// Decides `x ∈ P` by bounded search for nonnegative integer coefficients.
    ///
    /// Coefficients of generators with positive value on some facet are bounded
    /// by the facet inequalities; the remaining (unit) generators use the
    /// configured search bound, by default `4·max |coordinate|`.
    pub fn contains(&self, x: &[i64]) -> bool {
        let Some(target) = self.lattice_coordinates(x) else {
            return false;
        };
        if self.facets.iter().any(|f| dot(f, &target) < 0) {
            return false;
        }
        let bound = self.default_bound(x);
        let mut failed = HashSet::new();
        self.search(0, target, bound, &mut failed)
    }

    fn search(&self, index: usize, rest: IntVec, bound: i64, failed: &mut HashSet<(usize, IntVec)>) -> bool {
        if rest.iter().all(|&v| v == 0) {
            return true;
        }
        if index == self.intrinsic.len() || failed.contains(&(index, rest.clone())) {
            return false;
        }
        let g = &self.intrinsic[index];
        let cap = self
            .facets
            .iter()
            .filter_map(|f| {
                let fg = dot(f, g);
                (fg > 0).then(|| dot(f, &rest) / fg)
            })
            .min()
            .unwrap_or(bound)
            .min(bound);
        let zero_gen = g.iter().all(|&v| v == 0);
        let cap = if zero_gen { 0 } else { cap };
        let mut r = rest.clone();
        for c in 0..=cap {
            if c > 0 {
                r.iter_mut().zip(g).for_each(|(a, b)| *a -= b);
            }
            if self.facets.iter().any(|f| dot(f, &r) < 0) {
                break;
            }
            if self.search(index + 1, r.clone(), bound, failed) {
                return true;
            }
        }
        failed.insert((index, rest));
        false
    }

    /// True when `x ∈ P` lies in the given face.
    pub fn face_contains(&self, face: &Face, x: &[i64]) -> bool {
        match self.lattice_coordinates(x) {
            Some(c) => dot(&face.normal, &c) == 0 && self.contains(x),
            None => false,
        }
    }

    /// Bounded saturation check: every lattice point of the cone in a box
    /// around the origin must lie in `P`.
    pub fn is_saturated(&self) -> bool {
        let r = self.rank();
        let m = self
            .intrinsic
            .iter()
            .flatten()
            .map(|v| v.abs())
            .max()
            .unwrap_or(0);
        let radius = (m * r as i64).max(1);
        let mut point = vec![-radius; r];
        loop {
            if self.facets.iter().all(|f| dot(f, &point) >= 0) {
                let ambient = self.lattice_to_ambient(&point);
                if !self.contains(&ambient) {
                    return false;
                }
            }
            let mut k = 0;
            loop {
                if k == r {
                    return true;
                }
                point[k] += 1;
                if point[k] <= radius {
                    break;
                }
                point[k] = -radius;
                k += 1;
            }
        }
    }

    fn lattice_to_ambient(&self, c: &[i64]) -> IntVec {
        let mut out = vec![0; self.ambient_rank];
        for (coef, row) in c.iter().zip(&self.lattice) {
            out.iter_mut().zip(row).for_each(|(o, b)| *o += coef * b);
        }
        out
    }

    /// Face lattice as a DOT digraph with edges along covering relations.
    pub fn face_lattice_dot(&self) -> String {
        let mut out = String::from("digraph faces {\n");
        for (i, f) in self.faces.iter().enumerate() {
            let _ = writeln!(out, "  f{i} [label=\"{:?}\"];", f.span);
        }
        for (i, small) in self.faces.iter().enumerate() {
            for (j, big) in self.faces.iter().enumerate() {
                if i != j && small.is_strictly_below(big) {
                    let covered = self
                        .faces
                        .iter()
                        .any(|mid| small.is_strictly_below(mid) && mid.is_strictly_below(big));
                    if !covered {
                        let _ = writeln!(out, "  f{i} -> f{j};");
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn unit_vector(d: usize, i: usize) -> IntVec {
    (0..d).map(|k| i64::from(k == i)).collect()
}

/// Primitive inward normals of the facets of the cone, in lattice coordinates.
fn facet_normals(intrinsic: &[IntVec], rank: usize) -> Vec<IntVec> {
    if rank == 0 {
        return Vec::new();
    }
    let mut normals: Vec<IntVec> = Vec::new();
    let n = intrinsic.len();
    let mut subset: Vec<usize> = Vec::new();
    let mut consider = |rows: &[IntVec]| {
        let k = integer_kernel(rows, rank);
        if k.len() != 1 {
            return;
        }
        let v = &k[0];
        let values: Vec<i64> = intrinsic.iter().map(|g| dot(v, g)).collect();
        let normal = if values.iter().all(|&x| x >= 0) {
            v.clone()
        } else if values.iter().all(|&x| x <= 0) {
            lattice::neg(v)
        } else {
            return;
        };
        if values.iter().all(|&x| x == 0) {
            return;
        }
        if !normals.contains(&normal) {
            normals.push(normal);
        }
    };
    // Enumerate (rank-1)-subsets of generators.
    fn walk(
        start: usize,
        need: usize,
        n: usize,
        subset: &mut Vec<usize>,
        intrinsic: &[IntVec],
        f: &mut dyn FnMut(&[IntVec]),
    ) {
        if need == 0 {
            let rows: Vec<IntVec> = subset.iter().map(|&i| intrinsic[i].clone()).collect();
            f(&rows);
            return;
        }
        for i in start..n {
            subset.push(i);
            walk(i + 1, need - 1, n, subset, intrinsic, f);
            subset.pop();
        }
    }
    walk(0, rank - 1, n, &mut subset, intrinsic, &mut consider);
    normals.sort();
    normals
}

fn enumerate_faces(generators: &[IntVec], intrinsic: &[IntVec], facets: &[IntVec]) -> Vec<Face> {
    let all: Vec<usize> = (0..generators.len()).collect();
    let mut sets: Vec<Vec<usize>> = vec![all];
    for f in facets {
        let zero: Vec<usize> = (0..generators.len())
            .filter(|&i| dot(f, &intrinsic[i]) == 0)
            .collect();
        let new: Vec<Vec<usize>> = sets
            .iter()
            .map(|s| s.iter().copied().filter(|i| zero.contains(i)).collect())
            .collect();
        for s in new {
            if !sets.contains(&s) {
                sets.push(s);
            }
        }
    }
    let rank = intrinsic.first().map_or(0, Vec::len);
    let mut faces: Vec<Face> = sets
        .into_iter()
        .map(|s| {
            let mut normal = vec![0; rank];
            for f in facets {
                if s.iter().all(|&i| dot(f, &intrinsic[i]) == 0) {
                    normal.iter_mut().zip(f).for_each(|(a, b)| *a += b);
                }
            }
            Face {
                span: s.iter().map(|&i| generators[i].clone()).collect(),
                generator_indices: s,
                normal,
            }
        })
        .collect();
    faces.sort_by(|a, b| {
        (a.generator_indices.len(), &a.generator_indices).cmp(&(b.generator_indices.len(), &b.generator_indices))
    });
    faces
}

impl Face {
    pub fn is_strictly_below(&self, other: &Face) -> bool {
        self.generator_indices.len() < other.generator_indices.len()
            && self.generator_indices.iter().all(|i| other.generator_indices.contains(i))
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.generator_indices.contains(&i)
    }
}

impl MonoidIdeal {
    pub fn empty() -> Self {
        MonoidIdeal::default()
    }

    /// Ideal generated by the given elements, which must lie in `P`.
    pub fn new(monoid: &AffineMonoid, generators: Vec<IntVec>) -> Result<Self, MonoidError> {
        for g in &generators {
            if g.len() != monoid.ambient_rank() {
                return Err(MonoidError::WrongLength {
                    vector: g.clone(),
                    expected: monoid.ambient_rank(),
                });
            }
            if !monoid.contains(g) {
                return Err(MonoidError::NotInMonoid(g.clone()));
            }
        }
        Ok(MonoidIdeal { generators })
    }

    /// `P ∖ F`, generated by the generators of `P` outside `F`.
    pub fn face_complement(monoid: &AffineMonoid, face: &Face) -> Self {
        let generators = monoid
            .generators()
            .iter()
            .enumerate()
            .filter(|(i, _)| !face.contains_index(*i))
            .map(|(_, g)| g.clone())
            .collect();
        MonoidIdeal { generators }
    }

    /// `P ∖ P^×`.
    pub fn maximal(monoid: &AffineMonoid) -> Self {
        Self::face_complement(monoid, monoid.unit_face())
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// `x ∈ K` iff `x - k ∈ P` for some generator `k`.
    pub fn contains(&self, monoid: &AffineMonoid, x: &[i64]) -> bool {
        self.generators.iter().any(|k| monoid.contains(&lattice::sub(x, k)))
    }

    /// True when the ideal meets the face.
    pub fn meets_face(&self, monoid: &AffineMonoid, face: &Face) -> bool {
        self.generators.iter().any(|k| monoid.face_contains(face, k))
    }

    pub fn is_subset_of(&self, monoid: &AffineMonoid, other: &MonoidIdeal) -> bool {
        self.generators.iter().all(|g| other.contains(monoid, g))
    }

    pub fn same_as(&self, monoid: &AffineMonoid, other: &MonoidIdeal) -> bool {
        self.is_subset_of(monoid, other) && other.is_subset_of(monoid, self)
    }

    /// Drops redundant generators and sorts the rest.
    pub fn minimized(&self, monoid: &AffineMonoid) -> Self {
        let mut gens = self.generators.clone();
        gens.sort();
        gens.dedup();
        let mut keep: Vec<IntVec> = Vec::new();
        for (i, g) in gens.iter().enumerate() {
            let redundant = gens.iter().enumerate().any(|(j, h)| {
                j != i && monoid.contains(&lattice::sub(g, h)) && !(monoid.contains(&lattice::sub(h, g)) && j > i)
            });
            if !redundant {
                keep.push(g.clone());
            }
        }
        MonoidIdeal { generators: keep }
    }
}

/// All faces of `P`, smallest first.
pub fn faces(monoid: &AffineMonoid) -> Vec<Face> {
    monoid.faces().to_vec()
}

/// `P_F = P + F^gp`.
pub fn localize(monoid: &AffineMonoid, face: &Face) -> Result<AffineMonoid, MonoidError> {
    monoid.validate_face(face)?;
    let mut gens = monoid.generators().to_vec();
    for g in &face.span {
        let n = lattice::neg(g);
        if !gens.contains(&n) && n.iter().any(|&v| v != 0) {
            gens.push(n);
        }
    }
    let mut out = AffineMonoid::new(monoid.ambient_rank(), gens)?;
    out.search_bound = monoid.search_bound;
    Ok(out)
}

/// `P_F / F^gp` with its projection from `P^gp`.
pub fn quotient_map(monoid: &AffineMonoid, face: &Face) -> Result<QuotientMap, MonoidError> {
    monoid.validate_face(face)?;
    let face_rows: Vec<IntVec> = face
        .generator_indices
        .iter()
        .map(|&i| monoid.intrinsic[i].clone())
        .collect();
    let projection = integer_kernel(&face_rows, monoid.rank());
    let images: Vec<IntVec> = monoid
        .intrinsic
        .iter()
        .map(|g| projection.iter().map(|row| dot(row, g)).collect())
        .collect();
    let mut gens: Vec<IntVec> = Vec::new();
    for im in &images {
        if im.iter().any(|&v| v != 0) && !gens.contains(im) {
            gens.push(im.clone());
        }
    }
    let mut quotient = AffineMonoid::new(projection.len(), gens)?;
    quotient.search_bound = monoid.search_bound;
    Ok(QuotientMap {
        projection,
        images,
        monoid: quotient,
    })
}

/// `P_F / F^gp`.
pub fn quotient(monoid: &AffineMonoid, face: &Face) -> Result<AffineMonoid, MonoidError> {
    Ok(quotient_map(monoid, face)?.monoid)
}

/// Image of an element of `P^gp` under the quotient projection.
pub fn project(monoid: &AffineMonoid, map: &QuotientMap, x: &[i64]) -> Option<IntVec> {
    let c = monoid.lattice_coordinates(x)?;
    Some(map.projection.iter().map(|row| dot(row, &c)).collect())
}

/// True when `P^gp / F^gp` is torsion-free (all Smith invariants equal one).
pub fn quotient_is_torsion_free(monoid: &AffineMonoid, face: &Face) -> bool {
    let rows: Vec<IntVec> = face
        .generator_indices
        .iter()
        .map(|&i| monoid.intrinsic[i].clone())
        .collect();
    smith_diagonal(&rows, monoid.rank()).iter().all(|&d| d == 1)
}

/// Faces of `P` disjoint from `K`.
pub fn faces_avoiding(monoid: &AffineMonoid, ideal: &MonoidIdeal) -> Vec<Face> {
    monoid
        .faces()
        .iter()
        .filter(|f| !ideal.meets_face(monoid, f))
        .cloned()
        .collect()
}

/// `√K`, computed as the intersection of the primes `P ∖ F` over faces `F` with `F ∩ K = ∅`.
pub fn radical(monoid: &AffineMonoid, ideal: &MonoidIdeal) -> MonoidIdeal {
    let n = monoid.generators().len();
    let complements: Vec<Vec<usize>> = faces_avoiding(monoid, ideal)
        .iter()
        .map(|f| (0..n).filter(|i| !f.contains_index(*i)).collect())
        .collect();
    // An element avoids every such face iff its support meets every complement.
    let mut hitting: Vec<u64> = Vec::new();
    for mask in 0u64..(1u64 << n) {
        let hits_all = complements
            .iter()
            .all(|c| c.iter().any(|&i| mask & (1 << i) != 0));
        if hits_all && !hitting.iter().any(|&h| h & !mask == 0) {
            hitting.push(mask);
        }
    }
    let generators = hitting
        .into_iter()
        .map(|mask| {
            let mut v = vec![0; monoid.ambient_rank()];
            for (i, g) in monoid.generators().iter().enumerate() {
                if mask & (1 << i) != 0 {
                    v.iter_mut().zip(g).for_each(|(a, b)| *a += b);
                }
            }
            v
        })
        .collect();
    MonoidIdeal { generators }.minimized(monoid)
}

/// Hollow iff `K = P ∖ P^×`; locally constant iff `√K = P ∖ P^×`.
pub fn classify_model(monoid: &AffineMonoid, ideal: &MonoidIdeal) -> ModelClass {
    let avoiding = faces_avoiding(monoid, ideal);
    let locally_constant = avoiding.len() == 1 && avoiding[0] == *monoid.unit_face();
    let maximal = MonoidIdeal::maximal(monoid);
    let hollow = locally_constant && maximal.is_subset_of(monoid, ideal);
    ModelClass {
        locally_constant,
        hollow,
    }
}

/// Integer vector as a row of scalars.
pub fn to_scalars(v: &[i64]) -> Vec<Scalar> {
    v.iter().map(|&x| Scalar::from_int(x)).collect()
}

/// Generators as the columns of a matrix.
pub fn generator_matrix(monoid: &AffineMonoid) -> Matrix {
    let cols: Vec<Vec<Scalar>> = monoid.generators().iter().map(|g| to_scalars(g)).collect();
    Matrix::from_columns(monoid.ambient_rank(), &cols)
}

impl Serialize for AffineMonoid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            ambient_rank: usize,
            generators: &'a [IntVec],
        }
        Repr {
            ambient_rank: self.ambient_rank,
            generators: &self.generators,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AffineMonoid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            ambient_rank: usize,
            generators: Vec<IntVec>,
        }
        let r = Repr::deserialize(d)?;
        AffineMonoid::new(r.ambient_rank, r.generators).map_err(serde::de::Error::custom)
    }
}
