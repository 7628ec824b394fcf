//! Exact simplex over the rationals.
//!
//! Dense tableau, two phases, Bland's rule. Variables are free and split as
//! `x = x+ - x-`. Arithmetic runs on `Ratio<i64>` with checked operations and
//! restarts on big rationals if anything overflows.

use super::num::{Field, SmallRat};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// `coeffs . x (op) bound` where the operator depends on the list the
/// constraint lives in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<BigRational>,
    pub bound: BigRational,
}

impl Constraint {
    pub fn new(coeffs: Vec<BigRational>, bound: BigRational) -> Self {
        Constraint { coeffs, bound }
    }

    pub fn from_ints(coeffs: &[i64], bound: i64) -> Self {
        Constraint {
            coeffs: coeffs.iter().map(|&c| super::rat(c)).collect(),
            bound: super::rat(bound),
        }
    }

    fn value(&self, x: &[BigRational]) -> BigRational {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// A polyhedron `{x : weak a.x >= b, strict a.x > b, equalities a.x = b}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RationalPolyhedron {
    pub dimension: usize,
    pub weak: Vec<Constraint>,
    pub strict: Vec<Constraint>,
    pub equalities: Vec<Constraint>,
}

impl RationalPolyhedron {
    pub fn new(dimension: usize) -> Self {
        RationalPolyhedron {
            dimension,
            ..Default::default()
        }
    }

    pub fn weak(mut self, coeffs: &[i64], bound: i64) -> Self {
        self.weak.push(Constraint::from_ints(coeffs, bound));
        self
    }

    pub fn strict(mut self, coeffs: &[i64], bound: i64) -> Self {
        self.strict.push(Constraint::from_ints(coeffs, bound));
        self
    }

    pub fn equality(mut self, coeffs: &[i64], bound: i64) -> Self {
        self.equalities.push(Constraint::from_ints(coeffs, bound));
        self
    }

    /// Every coefficient vector has length `dimension`.
    pub fn is_well_formed(&self) -> bool {
        self.constraints().all(|c| c.coeffs.len() == self.dimension)
    }

    pub(crate) fn constraints(&self) -> impl Iterator<Item = &Constraint> {
        self.weak
            .iter()
            .chain(&self.strict)
            .chain(&self.equalities)
    }

    /// Exact membership test for a rational point.
    pub fn contains(&self, x: &[BigRational]) -> bool {
        self.weak.iter().all(|c| c.value(x) >= c.bound)
            && self.strict.iter().all(|c| c.value(x) > c.bound)
            && self.equalities.iter().all(|c| c.value(x) == c.bound)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal {
        value: BigRational,
        point: Vec<BigRational>,
    },
}

/// Maximizes `objective . x` over the weak and equality constraints of `p`.
///
/// # Panics
/// Panics if `p` has strict constraints (use [`feasible`]) or is not well formed.
pub fn maximize(p: &RationalPolyhedron, objective: &[BigRational]) -> LpOutcome {
    assert!(p.strict.is_empty(), "maximize takes closed polyhedra only");
    assert!(p.is_well_formed() && objective.len() == p.dimension);
    let rows: Vec<(&Constraint, bool)> = p
        .weak
        .iter()
        .map(|c| (c, false))
        .chain(p.equalities.iter().map(|c| (c, true)))
        .collect();
    match solve::<SmallRat>(p.dimension, &rows, objective) {
        Some(out) => out,
        None => {
            log::debug!("simplex: i64 rationals overflowed, retrying with big rationals");
            solve::<BigRational>(p.dimension, &rows, objective).expect("big rationals cannot overflow")
        }
    }
}

/// True iff some rational point satisfies every constraint of `p`.
///
/// Strict constraints are decided by maximizing a slack `t <= 1` subject to
/// `a.x - b >= t`; the set is nonempty iff the optimum is positive.
pub fn feasible(p: &RationalPolyhedron) -> bool {
    assert!(p.is_well_formed(), "coefficient vectors must match the dimension");
    if p.strict.is_empty() {
        return !matches!(maximize(p, &vec![BigRational::zero(); p.dimension]), LpOutcome::Infeasible);
    }
    let dim = p.dimension + 1;
    let lift = |c: &Constraint, t: i64| {
        let mut coeffs = c.coeffs.clone();
        coeffs.push(super::rat(t));
        Constraint::new(coeffs, c.bound.clone())
    };
    let mut q = RationalPolyhedron::new(dim);
    q.weak = p.weak.iter().map(|c| lift(c, 0)).collect();
    q.weak.extend(p.strict.iter().map(|c| lift(c, -1)));
    let mut cap = vec![BigRational::zero(); dim];
    cap[p.dimension] = super::rat(-1);
    q.weak.push(Constraint::new(cap, super::rat(-1)));
    q.equalities = p.equalities.iter().map(|c| lift(c, 0)).collect();
    let mut obj = vec![BigRational::zero(); dim];
    obj[p.dimension] = super::rat(1);
    match maximize(&q, &obj) {
        LpOutcome::Optimal { value, .. } => value.is_positive(),
        LpOutcome::Infeasible => false,
        LpOutcome::Unbounded => unreachable!("slack is capped at 1"),
    }
}

struct Tableau<F> {
    /// m rows of width `width + 1`, the last entry being the right-hand side
    t: Vec<Vec<F>>,
    basis: Vec<usize>,
    width: usize,
}

impl<F: Field> Tableau<F> {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [F]) -> Option<()> {
        let p = self.t[r][c].clone();
        for v in self.t[r].iter_mut() {
            *v = v.div_c(&p)?;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero_f() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                if !pv.is_zero_f() {
                    *v = v.sub_c(&f.mul_c(pv)?)?;
                }
            }
        }
        if !obj[c].is_zero_f() {
            let f = obj[c].clone();
            for (v, pv) in obj.iter_mut().zip(&prow) {
                if !pv.is_zero_f() {
                    *v = v.sub_c(&f.mul_c(pv)?)?;
                }
            }
        }
        self.basis[r] = c;
        Some(())
    }

    /// Runs simplex iterations on `obj` (reduced profits; last entry is minus
    /// the objective value). Returns `Some(false)` if unbounded.
    fn optimize(&mut self, obj: &mut [F], allowed: &[bool]) -> Option<bool> {
        loop {
            let Some(c) = (0..self.width).find(|&j| allowed[j] && obj[j].is_pos()) else {
                return Some(true);
            };
            let mut best: Option<(usize, F)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if !row[c].is_pos() {
                    continue;
                }
                let ratio = row[self.width].div_c(&row[c])?;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else { return Some(false) };
            self.pivot(r, c, obj)?;
        }
    }
}

fn solve<F: Field>(dim: usize, rows: &[(&Constraint, bool)], objective: &[BigRational]) -> Option<LpOutcome> {
    let m = rows.len();
    let n_slack = rows.iter().filter(|(_, eq)| !eq).count();
    let n_real = 2 * dim + n_slack;
    let width = n_real + m;
    let mut t = Vec::with_capacity(m);
    let mut slack = 2 * dim;
    for (i, (c, eq)) in rows.iter().enumerate() {
        let mut row = vec![F::f_zero(); width + 1];
        for (j, a) in c.coeffs.iter().enumerate() {
            let a = F::from_rat(a)?;
            row[2 * j + 1] = a.neg_c()?;
            row[2 * j] = a;
        }
        if !eq {
            row[slack] = F::f_one().neg_c()?;
            slack += 1;
        }
        row[width] = F::from_rat(&c.bound)?;
        if row[width].is_neg() {
            for v in row.iter_mut() {
                *v = v.neg_c()?;
            }
        }
        row[n_real + i] = F::f_one();
        t.push(row);
    }
    let mut tab = Tableau {
        t,
        basis: (n_real..width).collect(),
        width,
    };

    // phase 1: maximize minus the sum of artificials
    let mut obj = vec![F::f_zero(); width + 1];
    for row in &tab.t {
        for j in 0..n_real {
            obj[j] = obj[j].add_c(&row[j])?;
        }
        obj[width] = obj[width].add_c(&row[width])?;
    }
    let mut allowed = vec![true; width];
    tab.optimize(&mut obj, &allowed)?;
    if obj[width].is_pos() {
        return Some(LpOutcome::Infeasible);
    }
    // drive artificials out of the basis, dropping redundant rows
    let mut r = 0;
    while r < tab.t.len() {
        if tab.basis[r] >= n_real {
            match (0..n_real).find(|&j| !tab.t[r][j].is_zero_f()) {
                Some(c) => tab.pivot(r, c, &mut obj)?,
                None => {
                    tab.t.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    for a in allowed.iter_mut().skip(n_real) {
        *a = false;
    }

    // phase 2
    let mut cost = vec![F::f_zero(); width + 1];
    for (j, c) in objective.iter().enumerate() {
        let c = F::from_rat(c)?;
        cost[2 * j + 1] = c.neg_c()?;
        cost[2 * j] = c;
    }
    let mut obj = cost.clone();
    for (i, row) in tab.t.iter().enumerate() {
        let cb = &cost[tab.basis[i]];
        if cb.is_zero_f() {
            continue;
        }
        for (v, rv) in obj.iter_mut().zip(row) {
            *v = v.sub_c(&cb.mul_c(rv)?)?;
        }
    }
    if !tab.optimize(&mut obj, &allowed)? {
        return Some(LpOutcome::Unbounded);
    }
    let mut vals = vec![BigRational::zero(); n_real];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n_real {
            vals[b] = tab.t[i][width].to_rat();
        }
    }
    let point = (0..dim).map(|j| &vals[2 * j] - &vals[2 * j + 1]).collect();
    Some(LpOutcome::Optimal {
        value: -obj[width].to_rat(),
        point,
    })
}
