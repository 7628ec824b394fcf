//! Smith normal form over the integers.
//!
//! Boundary matrices are sparse with unit entries, so most of the work is a
//! sparse pass that pivots on entries equal to +-1. Each such pivot
//! contributes an invariant factor 1 and deletes one row and one column. What
//! is left goes through a dense Euclidean reduction.

use super::matrix::IntMatrix;
use super::num::{divisibility_chain, Euclid};
use num_bigint::BigInt;
use num_traits::One;
use std::collections::BTreeSet;

/// Invariant factors `d_1 | d_2 | ... | d_r` (all positive) and the rank `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub invariant_factors: Vec<BigInt>,
    pub rank: usize,
}

impl SmithForm {
    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.invariant_factors
            .iter()
            .filter(|d| !d.is_one())
            .cloned()
            .collect()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    match m.sparse_rows_i64() {
        Some(rows) => smith_sparse(rows, m.cols()),
        None => finish(run(m.sparse_rows_big(), m.cols()).expect("bigint arithmetic cannot overflow")),
    }
}

/// SNF of a sparse matrix given by rows of `(column, value)` pairs with
/// distinct columns.
pub(crate) fn smith_sparse(rows: Vec<Vec<(usize, i64)>>, ncols: usize) -> SmithForm {
    let big: Vec<Vec<(usize, BigInt)>> = rows
        .iter()
        .map(|r| r.iter().map(|&(c, v)| (c, BigInt::from(v))).collect())
        .collect();
    match run(rows, ncols) {
        Some(d) => finish(d),
        None => {
            log::debug!("smith normal form: i64 overflow, retrying with big integers");
            finish(run(big, ncols).expect("bigint arithmetic cannot overflow"))
        }
    }
}

fn finish(diag: Vec<BigInt>) -> SmithForm {
    let invariant_factors = divisibility_chain(diag);
    SmithForm {
        rank: invariant_factors.len(),
        invariant_factors,
    }
}

/// Returns the absolute values of a diagonal equivalent to the input, before
/// chain normalization. `None` signals overflow.
fn run<T: Euclid>(rows: Vec<Vec<(usize, T)>>, ncols: usize) -> Option<Vec<BigInt>> {
    let mut rows: Vec<Vec<(usize, T)>> = rows
        .into_iter()
        .map(|mut r| {
            r.retain(|(_, v)| !v.is_zero());
            r.sort_by_key(|e| e.0);
            r
        })
        .collect();
    let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ncols];
    for (i, r) in rows.iter().enumerate() {
        for &(c, _) in r {
            cols[c].insert(i);
        }
    }
    let mut alive = vec![true; rows.len()];
    let mut diag: Vec<BigInt> = Vec::new();

    loop {
        let mut progressed = false;
        for r in 0..rows.len() {
            if !alive[r] || rows[r].is_empty() {
                continue;
            }
            let pivot = rows[r]
                .iter()
                .filter(|(_, v)| v.is_unit())
                .min_by_key(|(c, _)| cols[*c].len())
                .map(|(c, v)| (*c, v.clone()));
            let Some((pc, pv)) = pivot else { continue };
            let others: Vec<usize> = cols[pc].iter().copied().filter(|&i| i != r).collect();
            let prow = rows[r].clone();
            for i in others {
                let a = rows[i].iter().find(|e| e.0 == pc)?.1.clone();
                // pv is +-1, so a / pv == a * pv.
                let f = a.mul_c(&pv)?;
                let merged = axpy(&rows[i], &f, &prow)?;
                let before: BTreeSet<usize> = rows[i].iter().map(|e| e.0).collect();
                let after: BTreeSet<usize> = merged.iter().map(|e| e.0).collect();
                for c in before.difference(&after) {
                    cols[*c].remove(&i);
                }
                for c in after.difference(&before) {
                    cols[*c].insert(i);
                }
                rows[i] = merged;
            }
            for &(c, _) in &prow {
                cols[c].remove(&r);
            }
            alive[r] = false;
            rows[r].clear();
            diag.push(BigInt::one());
            progressed = true;
        }
        if !progressed {
            break;
        }
    }

    let rest: Vec<&Vec<(usize, T)>> = rows
        .iter()
        .zip(&alive)
        .filter(|(r, a)| **a && !r.is_empty())
        .map(|(r, _)| r)
        .collect();
    if rest.is_empty() {
        return Some(diag);
    }
    let used: Vec<usize> = (0..ncols).filter(|&c| !cols[c].is_empty()).collect();
    let mut pos = vec![usize::MAX; ncols];
    for (k, &c) in used.iter().enumerate() {
        pos[c] = k;
    }
    let mut dense: Vec<Vec<T>> = rest
        .iter()
        .map(|r| {
            let mut v = vec![T::zero(); used.len()];
            for (c, x) in r.iter() {
                v[pos[*c]] = x.clone();
            }
            v
        })
        .collect();
    diag.extend(dense_diagonal(&mut dense)?);
    Some(diag)
}

/// `x - f*y` on sorted sparse rows.
fn axpy<T: Euclid>(x: &[(usize, T)], f: &T, y: &[(usize, T)]) -> Option<Vec<(usize, T)>> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let take_x = j >= y.len() || (i < x.len() && x[i].0 < y[j].0);
        let take_y = i >= x.len() || (j < y.len() && y[j].0 < x[i].0);
        if take_x {
            out.push(x[i].clone());
            i += 1;
        } else if take_y {
            let v = T::zero().sub_c(&f.mul_c(&y[j].1)?)?;
            out.push((y[j].0, v));
            j += 1;
        } else {
            let v = x[i].1.sub_c(&f.mul_c(&y[j].1)?)?;
            if !v.is_zero() {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    Some(out)
}

/// Diagonalizes a dense matrix in place by Euclidean row and column
/// reduction; returns the absolute values of the nonzero diagonal.
fn dense_diagonal<T: Euclid>(a: &mut [Vec<T>]) -> Option<Vec<BigInt>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut t = 0;
    while t < m.min(n) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, v) in row.iter().enumerate().skip(t) {
                if !v.is_zero() && best.is_none_or(|(bi, bj)| v.abs_lt(&a[bi][bj])) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = a[t][t].clone();
            let mut clean = true;
            for i in t + 1..m {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].quot_c(&p)?;
                for j in t..n {
                    let v = a[i][j].sub_c(&q.mul_c(&a[t][j])?)?;
                    a[i][j] = v;
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].quot_c(&p)?;
                for row in a.iter_mut().skip(t) {
                    let v = row[j].sub_c(&q.mul_c(&row[t])?)?;
                    row[j] = v;
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
            // move the smallest remainder in row t / column t onto the pivot
            let mut best = (t, t);
            for i in t + 1..m {
                if !a[i][t].is_zero() && a[i][t].abs_lt(&a[best.0][best.1]) {
                    best = (i, t);
                }
            }
            for j in t + 1..n {
                if !a[t][j].is_zero() && a[t][j].abs_lt(&a[best.0][best.1]) {
                    best = (t, j);
                }
            }
            a.swap(t, best.0);
            for row in a.iter_mut() {
                row.swap(t, best.1);
            }
        }
        out.push(a[t][t].abs_c()?.big());
        t += 1;
    }
    Some(out)
}
