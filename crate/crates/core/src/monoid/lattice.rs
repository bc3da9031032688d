//! Integer lattice helpers: Hermite bases, integer kernels, Smith diagonals.

use num_integer::Integer;

pub type IntVec = Vec<i64>;

fn to_wide(rows: &[IntVec]) -> Vec<Vec<i128>> {
    rows.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect()
}

fn to_narrow(v: &[i128]) -> IntVec {
    v.iter()
        .map(|&x| i64::try_from(x).expect("lattice entry exceeds i64"))
        .collect()
}

/// Row-style Hermite normal form basis of the lattice spanned by `rows`.
///
/// Pivots are positive and entries above each pivot are reduced into
/// `[0, pivot)`, so the result depends only on the lattice.
pub fn hermite_basis(rows: &[IntVec], dim: usize) -> Vec<IntVec> {
    let mut m = to_wide(rows);
    let mut basis: Vec<Vec<i128>> = Vec::new();
    let mut col = 0;
    while col < dim && !m.is_empty() {
        // Combine all rows with nonzero entry in `col` into a single gcd row.
        let mut pivot: Option<Vec<i128>> = None;
        let mut rest = Vec::new();
        for row in m.drain(..) {
            if row[col] == 0 {
                rest.push(row);
                continue;
            }
            match pivot.take() {
                None => pivot = Some(row),
                Some(p) => {
                    let (a, b) = (p[col], row[col]);
                    let e = a.extended_gcd(&b);
                    let (g, x, y) = (e.gcd, e.x, e.y);
                    let new_p: Vec<i128> = p.iter().zip(&row).map(|(u, v)| x * u + y * v).collect();
                    let other: Vec<i128> = p
                        .iter()
                        .zip(&row)
                        .map(|(u, v)| (b / g) * u - (a / g) * v)
                        .collect();
                    pivot = Some(new_p);
                    if other.iter().any(|&v| v != 0) {
                        rest.push(other);
                    }
                }
            }
        }
        if let Some(mut p) = pivot {
            if p[col] < 0 {
                p.iter_mut().for_each(|v| *v = -*v);
            }
            basis.push(p);
        }
        m = rest.into_iter().filter(|r| r.iter().any(|&v| v != 0)).collect();
        col += 1;
    }
    // Reduce entries above pivots.
    for i in 0..basis.len() {
        let pc = basis[i].iter().position(|&v| v != 0).expect("pivot row is nonzero");
        let pv = basis[i][pc];
        for j in 0..i {
            let q = Integer::div_floor(&basis[j][pc], &pv);
            if q != 0 {
                let pivot_row = basis[i].clone();
                basis[j].iter_mut().zip(&pivot_row).for_each(|(a, b)| *a -= q * b);
            }
        }
    }
    basis.iter().map(|r| to_narrow(r)).collect()
}

/// Integer coordinates of `v` in a Hermite basis, or `None` if `v` is not in the lattice.
pub fn coordinates(basis: &[IntVec], v: &[i64]) -> Option<IntVec> {
    let mut rest: Vec<i128> = v.iter().map(|&x| x as i128).collect();
    let mut out = Vec::with_capacity(basis.len());
    for row in basis {
        let pc = row.iter().position(|&x| x != 0)?;
        let pv = row[pc] as i128;
        if rest[..pc].iter().any(|&x| x != 0) {
            return None;
        }
        if rest[pc] % pv != 0 {
            return None;
        }
        let c = rest[pc] / pv;
        rest.iter_mut().zip(row).for_each(|(a, &b)| *a -= c * b as i128);
        out.push(i64::try_from(c).ok()?);
    }
    rest.iter().all(|&x| x == 0).then_some(out)
}

/// Basis of `{x ∈ Z^dim : row·x = 0 for every row}`, in Hermite form.
pub fn integer_kernel(rows: &[IntVec], dim: usize) -> Vec<IntVec> {
    // Column operations on `rows` tracked in a unimodular matrix `u`.
    let mut a = to_wide(rows);
    let mut u: Vec<Vec<i128>> = (0..dim)
        .map(|i| (0..dim).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut next_col = 0;
    for r in 0..a.len() {
        if next_col == dim {
            break;
        }
        // Gather a gcd into column `next_col` using columns next_col..dim.
        for c in next_col + 1..dim {
            let (x, y) = (a[r][next_col], a[r][c]);
            if y == 0 {
                continue;
            }
            let e = x.extended_gcd(&y);
            let (g, s, t) = (e.gcd, e.x, e.y);
            let (p, q) = (x / g, y / g);
            // New columns: next = s·next + t·c, c = -q·next + p·c.
            for row in a.iter_mut().chain(u.iter_mut()) {
                let (vn, vc) = (row[next_col], row[c]);
                row[next_col] = s * vn + t * vc;
                row[c] = -q * vn + p * vc;
            }
        }
        if a[r][next_col] != 0 {
            next_col += 1;
        }
    }
    let kernel: Vec<IntVec> = (next_col..dim)
        .map(|c| to_narrow(&u.iter().map(|row| row[c]).collect::<Vec<_>>()))
        .collect();
    hermite_basis(&kernel, dim)
}

/// Diagonal of the Smith normal form of the matrix with the given rows (nonzero entries only).
pub fn smith_diagonal(rows: &[IntVec], dim: usize) -> Vec<i64> {
    let mut m = to_wide(rows);
    let n_rows = m.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < n_rows.min(dim) {
        // Find the smallest nonzero entry in the remaining submatrix.
        let mut best: Option<(usize, usize)> = None;
        for i in t..n_rows {
            for j in t..dim {
                if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        m.swap(t, bi);
        for row in m.iter_mut() {
            row.swap(t, bj);
        }
        let mut done = true;
        let p = m[t][t];
        for i in t + 1..n_rows {
            let q = m[i][t] / p;
            if q != 0 {
                let pivot_row = m[t].clone();
                m[i].iter_mut().zip(&pivot_row).for_each(|(a, b)| *a -= q * b);
            }
            if m[i][t] != 0 {
                done = false;
            }
        }
        for j in t + 1..dim {
            let q = m[t][j] / p;
            if q != 0 {
                for row in m.iter_mut() {
                    row[j] -= q * row[t];
                }
            }
            if m[t][j] != 0 {
                done = false;
            }
        }
        if !done {
            continue;
        }
        // Enforce divisibility of the remaining block by the pivot.
        let offender = (t + 1..n_rows)
            .flat_map(|i| (t + 1..dim).map(move |j| (i, j)))
            .find(|&(i, j)| m[i][j] % p != 0);
        if let Some((i, _)) = offender {
            let row_i = m[i].clone();
            m[t].iter_mut().zip(&row_i).for_each(|(a, b)| *a += b);
            continue;
        }
        diag.push(i64::try_from(p.abs()).expect("Smith entry exceeds i64"));
        t += 1;
    }
    diag
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn add(a: &[i64], b: &[i64]) -> IntVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[i64], b: &[i64]) -> IntVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn neg(a: &[i64]) -> IntVec {
    a.iter().map(|x| -x).collect()
}
