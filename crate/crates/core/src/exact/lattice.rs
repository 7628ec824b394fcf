//! Integer points of rational polyhedra.
//!
//! Constraints are scaled to integers and strict ones tightened, then
//! coordinate bounds come from interval propagation. Coordinates that
//! propagation cannot bound are bounded by linear programming. Enumeration is
//! a depth-first search that re-propagates after fixing each coordinate.

use super::lp::{maximize, Constraint, LpOutcome, RationalPolyhedron};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("coordinate {0} is unbounded")]
    Unbounded(usize),
    #[error("coordinate bounds exceed the 64-bit range")]
    Overflow,
}

/// Integer system `rows[i].0 . x >= rows[i].1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct IntSystem {
    pub dim: usize,
    pub rows: Vec<(Vec<i64>, i64)>,
}

type Bounds = (Vec<Option<i128>>, Vec<Option<i128>>);

impl IntSystem {
    pub fn new(dim: usize) -> Self {
        IntSystem { dim, rows: Vec::new() }
    }

    /// True iff the real solution set is bounded (or empty). Meant for cones
    /// `a.x >= 0`, where it decides whether the cone is `{0}`.
    pub fn is_bounded(&self) -> bool {
        !matches!(self.bounds(), Err(LatticeError::Unbounded(_)))
    }

    pub fn push(&mut self, coeffs: Vec<i64>, bound: i64) {
        debug_assert_eq!(coeffs.len(), self.dim);
        self.rows.push((coeffs, bound));
    }

    /// Tightens bounds until nothing changes (or a pass cap is hit). Returns
    /// `false` if the system has no integer point.
    fn propagate(&self, lo: &mut [Option<i128>], hi: &mut [Option<i128>]) -> bool {
        for _ in 0..64 {
            let mut changed = false;
            for (a, b) in &self.rows {
                // max of a.x over the box, split into finite part and count of
                // unbounded terms
                let mut finite: i128 = 0;
                let mut inf = 0usize;
                let mut inf_at = usize::MAX;
                for (j, &aj) in a.iter().enumerate() {
                    if aj == 0 {
                        continue;
                    }
                    let side = if aj > 0 { hi[j] } else { lo[j] };
                    match side {
                        Some(v) => finite += aj as i128 * v,
                        None => {
                            inf += 1;
                            inf_at = j;
                        }
                    }
                }
                if inf == 0 && finite < *b as i128 {
                    return false;
                }
                if inf > 1 {
                    continue;
                }
                for (j, &aj) in a.iter().enumerate() {
                    if aj == 0 || (inf == 1 && j != inf_at) {
                        continue;
                    }
                    let own = if inf == 1 {
                        0
                    } else {
                        aj as i128 * if aj > 0 { hi[j] } else { lo[j] }.unwrap()
                    };
                    // aj * x_j >= b - (rest max)
                    let rhs = *b as i128 - (finite - own);
                    let aj = aj as i128;
                    if aj > 0 {
                        let nl = Integer::div_ceil(&rhs, &aj);
                        if lo[j].is_none_or(|l| nl > l) {
                            lo[j] = Some(nl);
                            changed = true;
                        }
                    } else {
                        let nh = Integer::div_floor(&rhs, &aj);
                        if hi[j].is_none_or(|h| nh < h) {
                            hi[j] = Some(nh);
                            changed = true;
                        }
                    }
                    if let (Some(l), Some(h)) = (lo[j], hi[j]) {
                        if l > h {
                            return false;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        true
    }

    fn to_polyhedron(&self) -> RationalPolyhedron {
        let mut p = RationalPolyhedron::new(self.dim);
        p.weak = self
            .rows
            .iter()
            .map(|(a, b)| Constraint::from_ints(a, *b))
            .collect();
        p
    }

    /// Coordinate bounds, or `Ok(None)` if there is no integer point.
    fn bounds(&self) -> Result<Option<Bounds>, LatticeError> {
        let mut lo = vec![None; self.dim];
        let mut hi = vec![None; self.dim];
        if !self.propagate(&mut lo, &mut hi) {
            return Ok(None);
        }
        if lo.iter().chain(&hi).all(Option::is_some) {
            return Ok(Some((lo, hi)));
        }
        let p = self.to_polyhedron();
        for j in 0..self.dim {
            for sign in [1i64, -1] {
                let known = if sign > 0 { hi[j] } else { lo[j] };
                if known.is_some() {
                    continue;
                }
                let mut obj = vec![BigRational::zero(); self.dim];
                obj[j] = super::rat(sign);
                match maximize(&p, &obj) {
                    LpOutcome::Infeasible => return Ok(None),
                    LpOutcome::Unbounded => return Err(LatticeError::Unbounded(j)),
                    LpOutcome::Optimal { value, .. } => {
                        let v = value.floor().to_integer().to_i128().ok_or(LatticeError::Overflow)?;
                        if sign > 0 {
                            hi[j] = Some(v);
                        } else {
                            lo[j] = Some(-v);
                        }
                    }
                }
            }
            if !self.propagate(&mut lo, &mut hi) {
                return Ok(None);
            }
        }
        Ok(Some((lo, hi)))
    }

    /// Counts points, using the box width for the last coordinate instead of
    /// visiting each point.
    pub fn count_fast(&self) -> Result<u64, LatticeError> {
        let mut total = 0u64;
        self.walk(&mut |_| {}, false, &mut total)?;
        Ok(total)
    }

    pub fn points(&self) -> Result<Vec<Vec<i64>>, LatticeError> {
        let mut out = Vec::new();
        let mut dummy = 0;
        self.walk(&mut |p| out.push(p.to_vec()), true, &mut dummy)?;
        Ok(out)
    }

    fn walk(&self, visit: &mut dyn FnMut(&[i64]), each: bool, total: &mut u64) -> Result<(), LatticeError> {
        let Some((lo, hi)) = self.bounds()? else {
            return Ok(());
        };
        let ok = |v: Option<i128>| v.and_then(|x| i64::try_from(x).ok()).is_some();
        if !lo.iter().chain(&hi).all(|&v| ok(v)) {
            return Err(LatticeError::Overflow);
        }
        if self.dim == 0 {
            visit(&[]);
            *total += 1;
            return Ok(());
        }
        let mut point = vec![0i64; self.dim];
        self.dfs(0, lo, hi, &mut point, visit, each, total);
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        k: usize,
        lo: Vec<Option<i128>>,
        hi: Vec<Option<i128>>,
        point: &mut Vec<i64>,
        visit: &mut dyn FnMut(&[i64]),
        each: bool,
        total: &mut u64,
    ) {
        let (l, h) = (lo[k].unwrap(), hi[k].unwrap());
        if k + 1 == self.dim && !each {
            *total += (h - l + 1).max(0) as u64;
            return;
        }
        for v in l..=h {
            let mut lo2 = lo.clone();
            let mut hi2 = hi.clone();
            lo2[k] = Some(v);
            hi2[k] = Some(v);
            if !self.propagate(&mut lo2, &mut hi2) {
                continue;
            }
            point[k] = v as i64;
            if k + 1 == self.dim {
                visit(point);
                *total += 1;
            } else {
                self.dfs(k + 1, lo2, hi2, point, visit, each, total);
            }
        }
    }
}

/// Scales every constraint to integer data; strict rows become `a.x >= b+1`
/// and equalities become two weak rows. Rows are divided by the gcd of their
/// coefficients with the bound rounded up.
fn integer_system(p: &RationalPolyhedron) -> Result<IntSystem, LatticeError> {
    assert!(p.is_well_formed(), "coefficient vectors must match the dimension");
    let mut sys = IntSystem::new(p.dimension);
    let scale = |c: &Constraint| -> (Vec<BigInt>, BigInt) {
        let l = c
            .coeffs
            .iter()
            .chain(std::iter::once(&c.bound))
            .fold(BigInt::from(1), |acc, r| acc.lcm(r.denom()));
        let a = c.coeffs.iter().map(|r| (r * &l).to_integer()).collect();
        (a, (&c.bound * &l).to_integer())
    };
    let mut add = |a: Vec<BigInt>, b: BigInt, strict: bool| -> Result<(), LatticeError> {
        let b = if strict { b + 1 } else { b };
        let g = a.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        if g.is_zero() {
            // 0 >= b
            if b > BigInt::zero() {
                sys.push(vec![0; p.dimension], 1);
            }
            return Ok(());
        }
        let a: Option<Vec<i64>> = a.iter().map(|x| (x / &g).to_i64()).collect();
        let b = Integer::div_ceil(&b, &g).to_i64();
        match (a, b) {
            (Some(a), Some(b)) => {
                sys.push(a, b);
                Ok(())
            }
            _ => Err(LatticeError::Overflow),
        }
    };
    for c in &p.weak {
        let (a, b) = scale(c);
        add(a, b, false)?;
    }
    for c in &p.strict {
        let (a, b) = scale(c);
        add(a, b, true)?;
    }
    for c in &p.equalities {
        let (a, b) = scale(c);
        let na: Vec<BigInt> = a.iter().map(|x| -x).collect();
        add(a, b.clone(), false)?;
        add(na, -b, false)?;
    }
    Ok(sys)
}

/// All integer points of `p`, in lexicographic order.
pub fn lattice_points(p: &RationalPolyhedron) -> Result<Vec<Vec<i64>>, LatticeError> {
    integer_system(p)?.points()
}

pub fn count_lattice_points(p: &RationalPolyhedron) -> Result<u64, LatticeError> {
    integer_system(p)?.count_fast()
}
