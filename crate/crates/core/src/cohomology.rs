//! Sheaf cohomology of torus-invariant divisors on smooth complete fans.
//!
//! For `D = sum a_r D_r` and a character `m`, the `m`-graded piece of
//! `H^p(X, O(D))` is the reduced cohomology `H~^{p-1}` of the full subcomplex
//! of the nerve on `I(m) = { r : <m, u_r> < -a_r }`. Grouping characters by
//! `I(m)` gives
//!
//! ```text
//! h^p(D) = sum over I of  #{ m in Z^n : I(m) = I } * rank H~_{p-1}(C_I)
//! ```
//!
//! The region `{ m : I(m) = I }` has recession cone
//! `{ v : <v,u_r> <= 0 for r in I, >= 0 otherwise }`. On a complete fan
//! only subsets for which that cone is `{0}` can contribute (other regions
//! are empty or infinite, and finiteness of cohomology forces their
//! contribution to vanish). Those subsets depend on the fan alone and are
//! found once per oracle.

use crate::exact::{IntSystem, LatticeError};
use crate::fan::{homology_of_faces, Fan, RaySet};
use crate::par::{self, Parallelism};
use crate::picard::DivisorClass;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CohomologyError {
    #[error("divisor has {got} coefficients, the fan has {expected} rays")]
    Length { expected: usize, got: usize },
    #[error("class lives on V_{class_n}, the fan has rank {rank} and {rays} rays")]
    NotVn { class_n: usize, rank: usize, rays: usize },
    #[error("fan has {0} rays; subset enumeration supports at most 24")]
    TooManyRays(usize),
    #[error("region for I = {0} is unbounded but C_I has nontrivial homology")]
    UnboundedRegionWithHomology(RaySet),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Dimensions `h^0..h^n` and the Euler characteristic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradedCohomology {
    pub dims: Vec<u64>,
    pub euler: i64,
}

impl GradedCohomology {
    pub fn new(dims: Vec<u64>) -> Self {
        let euler = dims
            .iter()
            .enumerate()
            .map(|(p, &d)| if p % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum();
        GradedCohomology { dims, euler }
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    /// `h^p = 0` for every `p > 0`.
    pub fn higher_vanish(&self) -> bool {
        self.dims.iter().skip(1).all(|&d| d == 0)
    }

    /// Degrees with nonzero cohomology.
    pub fn support(&self) -> Vec<usize> {
        (0..self.dims.len()).filter(|&p| self.dims[p] != 0).collect()
    }
}

#[derive(Clone, Debug)]
struct Nerve {
    /// rank of H~_{q} at index q + 1, for q = -1..=rank-1
    betti: Vec<u64>,
    torsion: bool,
}

impl Nerve {
    fn is_trivial(&self) -> bool {
        !self.torsion && self.betti.iter().all(|&b| b == 0)
    }
}

/// Cohomology oracle for one fan. Cheap to query once built; shareable
/// across threads.
pub struct CohomologyOracle {
    fan: Fan,
    complete: bool,
    /// subsets to visit for every divisor
    candidates: Vec<RaySet>,
    /// per ray: (u, -u)
    rows: Vec<(Vec<i64>, Vec<i64>)>,
    nerves: RwLock<HashMap<RaySet, Arc<Nerve>>>,
    torsion_seen: AtomicBool,
}

impl std::fmt::Debug for CohomologyOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CohomologyOracle")
            .field("rank", &self.fan.rank())
            .field("rays", &self.fan.ray_count())
            .field("complete", &self.complete)
            .field("candidates", &self.candidates.len())
            .finish()
    }
}

impl CohomologyOracle {
    pub fn new(fan: Fan) -> Result<Self, CohomologyError> {
        Self::with_parallelism(fan, Parallelism::default())
    }

    pub fn with_parallelism(fan: Fan, p: Parallelism) -> Result<Self, CohomologyError> {
        let r = fan.ray_count();
        if r > 24 {
            return Err(CohomologyError::TooManyRays(r));
        }
        let complete = fan.is_complete();
        let rows: Vec<(Vec<i64>, Vec<i64>)> = fan
            .rays()
            .iter()
            .map(|u| (u.clone(), u.iter().map(|x| -x).collect()))
            .collect();
        let candidates = if complete {
            bounded_type_subsets(&fan, p)
        } else {
            log::info!("fan is not complete; every subset will be visited");
            (0..1u64 << r).map(RaySet).collect()
        };
        log::debug!("cohomology oracle: {} of {} subsets to visit", candidates.len(), 1u64 << r);
        Ok(CohomologyOracle {
            fan,
            complete,
            candidates,
            rows,
            nerves: RwLock::new(HashMap::new()),
            torsion_seen: AtomicBool::new(false),
        })
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    /// Number of subsets visited per divisor.
    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    /// True once some contributing `C_I` had torsion in its homology. Ranks
    /// are still exact; torsion is only reported.
    pub fn torsion_seen(&self) -> bool {
        self.torsion_seen.load(Ordering::Relaxed)
    }

    /// Cohomology of `sum a_r D_r`.
    pub fn cohomology(&self, a: &[i64]) -> Result<GradedCohomology, CohomologyError> {
        let r = self.fan.ray_count();
        if a.len() != r {
            return Err(CohomologyError::Length { expected: r, got: a.len() });
        }
        let n = self.fan.rank();
        let mut sys = IntSystem::new(n);
        for (u, _) in &self.rows {
            sys.push(u.clone(), 0);
        }
        let mut dims = vec![0u64; n + 1];
        for &set in &self.candidates {
            for (k, row) in sys.rows.iter_mut().enumerate() {
                if set.contains(k) {
                    row.0.copy_from_slice(&self.rows[k].1);
                    row.1 = a[k] + 1;
                } else {
                    row.0.copy_from_slice(&self.rows[k].0);
                    row.1 = -a[k];
                }
            }
            let count = match sys.count_fast() {
                Ok(c) => c,
                Err(LatticeError::Unbounded(_)) if !self.complete => {
                    if self.nerve(set).is_trivial() {
                        continue;
                    }
                    return Err(CohomologyError::UnboundedRegionWithHomology(set));
                }
                Err(e) => return Err(e.into()),
            };
            if count == 0 {
                continue;
            }
            let nerve = self.nerve(set);
            if nerve.torsion && !self.torsion_seen.swap(true, Ordering::Relaxed) {
                log::warn!("C_I for I = {set} has torsion in its homology");
            }
            // H^p picks up H~_{p-1}
            for (p, d) in dims.iter_mut().enumerate() {
                *d += count * nerve.betti.get(p).copied().unwrap_or(0);
            }
        }
        Ok(GradedCohomology::new(dims))
    }

    /// Cohomology of a class on `V_n`, lifted to a torus-invariant divisor.
    pub fn cohomology_of_class(&self, d: &DivisorClass) -> Result<GradedCohomology, CohomologyError> {
        let n = d.n();
        if self.fan.rank() != n || self.fan.ray_count() != 2 * n + 2 {
            return Err(CohomologyError::NotVn {
                class_n: n,
                rank: self.fan.rank(),
                rays: self.fan.ray_count(),
            });
        }
        self.cohomology(&d.lift_to_rays())
    }

    /// `chi(O(a), O(b)) = chi(O(b - a))`.
    pub fn euler_pairing(&self, a: &DivisorClass, b: &DivisorClass) -> Result<i64, CohomologyError> {
        Ok(self.cohomology_of_class(&(b - a))?.euler)
    }

    /// `Ext^*(O(a), O(b)) = H^*(O(b - a))`.
    pub fn ext(&self, a: &DivisorClass, b: &DivisorClass) -> Result<GradedCohomology, CohomologyError> {
        self.cohomology_of_class(&(b - a))
    }

    fn nerve(&self, set: RaySet) -> Arc<Nerve> {
        if let Some(h) = self.nerves.read().expect("nerve cache poisoned").get(&set) {
            return h.clone();
        }
        let faces: Vec<RaySet> = self.fan.faces().iter().copied().filter(|f| f.is_subset(set)).collect();
        let h = homology_of_faces(&faces);
        let top = self.fan.rank() + 1;
        let mut betti = vec![0u64; top];
        for g in &h.groups {
            let idx = (g.degree + 1) as usize;
            if idx < top {
                betti[idx] = g.betti as u64;
            }
        }
        let nerve = Arc::new(Nerve {
            betti,
            torsion: h.has_torsion(),
        });
        self.nerves
            .write()
            .expect("nerve cache poisoned")
            .entry(set)
            .or_insert(nerve)
            .clone()
    }
}

/// Subsets `I` with `{ v : <v,u_r> <= 0 (r in I), >= 0 (r not in I) } = {0}`.
///
/// Most other subsets are ruled out by a witness direction drawn from the
/// rays and sums of two rays. The rest are decided by bounding the cone.
fn bounded_type_subsets(fan: &Fan, p: Parallelism) -> Vec<RaySet> {
    let n = fan.rank();
    let rays = fan.rays();
    let r = rays.len();
    let mut dirs: Vec<Vec<i64>> = Vec::new();
    for u in rays {
        dirs.push(u.clone());
        dirs.push(u.iter().map(|x| -x).collect());
    }
    for i in 0..r {
        for j in i + 1..r {
            dirs.push(rays[i].iter().zip(&rays[j]).map(|(x, y)| x + y).collect());
        }
    }
    // opposite rays sum to zero, which is not a direction
    dirs.retain(|w| w.iter().any(|&x| x != 0));
    // sign pattern of each witness against the rays
    let masks: Vec<(u64, u64)> = dirs
        .iter()
        .map(|w| {
            let (mut pos, mut neg) = (0u64, 0u64);
            for (k, u) in rays.iter().enumerate() {
                let d: i64 = w.iter().zip(u).map(|(x, y)| x * y).sum();
                if d > 0 {
                    pos |= 1 << k;
                } else if d < 0 {
                    neg |= 1 << k;
                }
            }
            (pos, neg)
        })
        .collect();
    let total = 1usize << r;
    let chunk = 4096usize;
    let chunks = total.div_ceil(chunk);
    let parts: Vec<Vec<RaySet>> = par::map_range(p, chunks, |c| {
        let mut out = Vec::new();
        let mut sys = IntSystem::new(n);
        for u in rays {
            sys.push(u.clone(), 0);
        }
        for bits in (c * chunk) as u64..((c + 1) * chunk).min(total) as u64 {
            if masks.iter().any(|&(pos, neg)| pos & bits == 0 && neg & !bits == 0) {
                continue;
            }
            for (k, row) in sys.rows.iter_mut().enumerate() {
                let s = if bits >> k & 1 == 1 { -1 } else { 1 };
                for (x, &y) in row.0.iter_mut().zip(&rays[k]) {
                    *x = s * y;
                }
            }
            if sys.is_bounded() {
                out.push(RaySet(bits));
            }
        }
        out
    });
    parts.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::{build_pn, build_vn};

    fn vn(n: usize) -> CohomologyOracle {
        CohomologyOracle::with_parallelism(build_vn(n).unwrap(), Parallelism::Sequential).unwrap()
    }

    #[test]
    fn projective_plane_line_bundles() {
        let o = CohomologyOracle::new(build_pn(2).unwrap()).unwrap();
        assert_eq!(o.cohomology(&[3, 0, 0]).unwrap().dims, vec![10, 0, 0]);
        assert_eq!(o.cohomology(&[-3, 0, 0]).unwrap().dims, vec![0, 0, 1]);
        assert_eq!(o.cohomology(&[-1, 0, 0]).unwrap().dims, vec![0, 0, 0]);
        assert_eq!(o.cohomology(&[-2, 0, 0]).unwrap().dims, vec![0, 0, 0]);
        // linear equivalence: D_0 ~ D_1
        assert_eq!(o.cohomology(&[1, -1, 2]).unwrap().dims, vec![6, 0, 0]);
    }

    #[test]
    fn pn_binomials() {
        for n in 1..=4usize {
            let o = CohomologyOracle::new(build_pn(n).unwrap()).unwrap();
            for d in -(n as i64) - 3..=3 {
                let mut a = vec![0; n + 1];
                a[0] = d;
                let h = o.cohomology(&a).unwrap();
                let binom = |top: i64, k: i64| -> u64 {
                    if top < k {
                        return 0;
                    }
                    (0..k).fold(1u64, |acc, i| acc * (top - i) as u64 / (i + 1) as u64)
                };
                let n_ = n as i64;
                let mut want = vec![0u64; n + 1];
                want[0] = binom(d + n_, n_);
                want[n] += binom(-d - 1, n_);
                assert_eq!(h.dims, want, "P^{n} O({d})");
            }
        }
    }

    #[test]
    fn v2_small_classes() {
        let o = vn(2);
        let c = |v: Vec<i64>| DivisorClass::new(2, v).unwrap();
        assert_eq!(o.cohomology_of_class(&c(vec![0, 0, 0, 0])).unwrap().dims, vec![1, 0, 0]);
        assert!(o.cohomology_of_class(&c(vec![-1, 0, 0, 0])).unwrap().is_zero());
        let k = DivisorClass::canonical(2);
        assert_eq!(o.cohomology_of_class(&(-k.clone())).unwrap().dims, vec![7, 0, 0]);
        assert_eq!(o.cohomology_of_class(&k).unwrap().dims, vec![0, 0, 1]);
        let o_ = DivisorClass::zero(2);
        let mh = -DivisorClass::hyperplane(2);
        assert_eq!(o.euler_pairing(&mh, &o_).unwrap(), 3);
        let e0 = DivisorClass::exceptional(2, 0);
        assert_eq!(o.euler_pairing(&o_, &(&e0 + &mh)).unwrap(), 0);
    }

    #[test]
    fn serre_duality_on_v2() {
        let o = vn(2);
        let k = DivisorClass::canonical(2);
        for h in -2..=2 {
            for e0 in -1..=1 {
                for e1 in -1..=1 {
                    let d = DivisorClass::new(2, vec![h, e0, e1, 0]).unwrap();
                    let a = o.cohomology_of_class(&d).unwrap();
                    let b = o.cohomology_of_class(&(&k - &d)).unwrap();
                    let rev: Vec<u64> = b.dims.iter().rev().copied().collect();
                    assert_eq!(a.dims, rev, "{d}");
                }
            }
        }
    }

    #[test]
    fn bounded_subset_counts() {
        // I = ∅ and I = all rays always qualify
        for n in [2usize, 4] {
            let o = vn(n);
            assert!(o.candidates.contains(&RaySet::EMPTY));
            assert!(o.candidates.contains(&o.fan.all_rays()));
        }
        let seq = bounded_type_subsets(&build_vn(4).unwrap(), Parallelism::Sequential);
        let par = bounded_type_subsets(&build_vn(4).unwrap(), Parallelism::Parallel);
        assert_eq!(seq, par);
    }

    #[test]
    fn incomplete_fan_reports_unbounded_homology() {
        // the positive quadrant: affine plane
        let fan = Fan::new(2, vec![vec![1, 0], vec![0, 1]], vec![RaySet(0b11)]).unwrap();
        let o = CohomologyOracle::new(fan).unwrap();
        assert!(matches!(
            o.cohomology(&[0, 0]),
            Err(CohomologyError::UnboundedRegionWithHomology(_))
        ));
    }

    #[test]
    fn wrong_length_rejected() {
        let o = vn(2);
        assert!(matches!(o.cohomology(&[0; 5]), Err(CohomologyError::Length { .. })));
        let d = DivisorClass::zero(4);
        assert!(matches!(o.cohomology_of_class(&d), Err(CohomologyError::NotVn { .. })));
    }
}
