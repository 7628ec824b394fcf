//! Forbidden cones: a sufficient criterion for acyclicity of line bundles.
//!
//! For `I ⊆ Δ(1)` with `C_I` not acyclic, the forbidden cone is
//!
//! ```text
//! F_I = { sum_{r in I} (-1 - t_r) [D_r] + sum_{r not in I} t_r [D_r] : t_r >= 0 }
//! ```
//!
//! A class in no forbidden cone has no cohomology at all. Cones are taken
//! closed for every `I`, not just `I = ∅`. With open cones `K_X` (the apex of
//! `F_{Δ(1)}`) would be certified acyclic although `h^n(K_X) = 1`.
//!
//! Membership is an LP in the character `m`: `[D] ∈ F_I` iff
//! `{ m : <m,u_r> >= a_r + 1 (r in I), <m,u_r> <= a_r (r not in I) }` is
//! nonempty over the reals, for any lift `D = sum a_r D_r`. The integer points
//! of that set are exactly the characters whose graded piece of cohomology
//! is computed from `C_I` (up to `m -> -m`), which makes the criterion sound.

use crate::exact::{feasible, RationalPolyhedron};
use crate::fan::{homology_of_faces, Fan, RaySet};
use crate::picard::DivisorClass;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::RwLock;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ForbiddenError {
    #[error("the lemma assumes k <= l, got k = {k}, l = {l}")]
    HypothesisViolated { k: usize, l: usize },
    #[error("(c, k, l) = (0, 0, 0) is the trivial class, which is not acyclic")]
    ZeroDivisor,
    #[error("k + l = {0} exceeds n + 1 = {1}")]
    Shape(usize, usize),
    #[error("n must be even and positive, got {0}")]
    Dimension(usize),
}

/// An index set whose full subcomplex of the nerve is not acyclic, with the
/// degrees of its nonzero reduced homology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForbiddenConeSpec {
    pub subset: RaySet,
    pub degrees: Vec<isize>,
}

/// Subsets that are unions of primitive collections (including ∅).
pub fn primitive_unions(fan: &Fan) -> Vec<RaySet> {
    let r = fan.ray_count();
    assert!(r <= 24, "subset enumeration supports at most 24 rays");
    let prims: Vec<u64> = fan.primitive_collections().iter().map(|p| p.bits()).collect();
    let mut reach = vec![false; 1 << r];
    reach[0] = true;
    // unions only grow, so one ascending sweep closes the family
    for mask in 0..reach.len() {
        if reach[mask] {
            for &p in &prims {
                reach[mask | p as usize] = true;
            }
        }
    }
    (0..reach.len()).filter(|&m| reach[m]).map(|m| RaySet(m as u64)).collect()
}

/// All `I` with non-acyclic `C_I`. With `restrict_to_primitive_unions` only
/// unions of primitive collections are examined; nonempty forbidden sets are
/// always of that form, so both modes give the same list.
pub fn enumerate_forbidden(fan: &Fan, restrict_to_primitive_unions: bool) -> Vec<ForbiddenConeSpec> {
    let catalog = ForbiddenCatalog::new(fan, restrict_to_primitive_unions);
    catalog
        .candidates
        .iter()
        .filter_map(|&s| catalog.spec(s))
        .collect()
}

/// Forbidden cones of one fan, with homology computed on demand.
pub struct ForbiddenCatalog {
    fan: Fan,
    candidates: Vec<RaySet>,
    boxed: Option<Vec<Axis>>,
    homology: RwLock<HashMap<RaySet, Option<Vec<isize>>>>,
}

impl std::fmt::Debug for ForbiddenCatalog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ForbiddenCatalog")
            .field("rays", &self.fan.ray_count())
            .field("candidates", &self.candidates.len())
            .finish()
    }
}

impl ForbiddenCatalog {
    pub fn new(fan: &Fan, restrict_to_primitive_unions: bool) -> Self {
        let candidates = if restrict_to_primitive_unions {
            primitive_unions(fan)
        } else {
            assert!(fan.ray_count() <= 24, "subset enumeration supports at most 24 rays");
            (0..1u64 << fan.ray_count()).map(RaySet).collect()
        };
        ForbiddenCatalog {
            fan: fan.clone(),
            candidates,
            boxed: box_axes(fan),
            homology: RwLock::new(HashMap::new()),
        }
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    /// Every forbidden cone (forces all homology computations).
    pub fn specs(&self) -> Vec<ForbiddenConeSpec> {
        self.candidates.iter().filter_map(|&s| self.spec(s)).collect()
    }

    /// The spec for `subset`, or `None` if `C_I` is acyclic.
    pub fn spec(&self, subset: RaySet) -> Option<ForbiddenConeSpec> {
        if let Some(d) = self.homology.read().expect("cache poisoned").get(&subset) {
            return d.clone().map(|degrees| ForbiddenConeSpec { subset, degrees });
        }
        let faces: Vec<RaySet> = self.fan.faces().iter().copied().filter(|f| f.is_subset(subset)).collect();
        let h = homology_of_faces(&faces);
        let degrees = (!h.is_trivial()).then(|| h.nonzero_degrees());
        self.homology
            .write()
            .expect("cache poisoned")
            .insert(subset, degrees.clone());
        degrees.map(|degrees| ForbiddenConeSpec { subset, degrees })
    }

    /// Forbidden cones containing `sum a_r D_r`. Subsets with an empty
    /// region are skipped before any homology is computed.
    pub fn containing(&self, a: &[i64]) -> Vec<ForbiddenConeSpec> {
        self.candidates
            .iter()
            .filter(|&&s| self.region_nonempty(s, a))
            .filter_map(|&s| self.spec(s))
            .collect()
    }

    /// `true` means `h^i = 0` for every `i`; `false` is inconclusive.
    pub fn certify_acyclic(&self, a: &[i64]) -> bool {
        self.first_containing(a, false).is_none()
    }

    /// `true` means `h^i = 0` for every `i > 0`. Only `I = ∅` contributes to
    /// `h^0`, so it is ignored here.
    pub fn certify_higher_vanishing(&self, a: &[i64]) -> bool {
        self.first_containing(a, true).is_none()
    }

    /// First forbidden cone (in candidate order) containing the class.
    pub fn first_containing(&self, a: &[i64], skip_empty: bool) -> Option<ForbiddenConeSpec> {
        assert_eq!(a.len(), self.fan.ray_count(), "divisor length must match the fan");
        self.candidates
            .iter()
            .filter(|s| !(skip_empty && s.is_empty()))
            .filter(|&&s| self.region_nonempty(s, a))
            .find_map(|&s| self.spec(s))
    }

    fn region_nonempty(&self, subset: RaySet, a: &[i64]) -> bool {
        match &self.boxed {
            Some(axes) => box_region_nonempty(axes, subset, a),
            None => region_nonempty(&self.fan, subset, a),
        }
    }

    pub fn certify_acyclic_class(&self, d: &DivisorClass) -> bool {
        self.certify_acyclic(&d.lift_to_rays())
    }

    pub fn certify_higher_vanishing_class(&self, d: &DivisorClass) -> bool {
        self.certify_higher_vanishing(&d.lift_to_rays())
    }
}

/// A ray of the form `s * e_i` or `s * (1, ..., 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Axis {
    Coord(usize, i64),
    Diagonal(i64),
}

/// Rays of `V_n` and `P^n` are all of the special form, so their regions are
/// a box cut by a slab on `sum m_i`, and feasibility is interval arithmetic.
fn box_axes(fan: &Fan) -> Option<Vec<Axis>> {
    fan.rays()
        .iter()
        .map(|u| {
            let nz: Vec<usize> = (0..u.len()).filter(|&i| u[i] != 0).collect();
            match nz.as_slice() {
                [i] if u[*i].abs() == 1 => Some(Axis::Coord(*i, u[*i])),
                _ if nz.len() == u.len() && u.iter().all(|&x| x == u[0]) && u[0].abs() == 1 => Some(Axis::Diagonal(u[0])),
                _ => None,
            }
        })
        .collect()
}

fn box_region_nonempty(axes: &[Axis], subset: RaySet, a: &[i64]) -> bool {
    let dim = axes
        .iter()
        .filter_map(|x| match x {
            Axis::Coord(i, _) => Some(i + 1),
            Axis::Diagonal(_) => None,
        })
        .max()
        .unwrap_or(0);
    // bounds on m_i (index < dim) and on sum m_i (index dim)
    let mut lo: Vec<Option<i64>> = vec![None; dim + 1];
    let mut hi: Vec<Option<i64>> = vec![None; dim + 1];
    for (k, ax) in axes.iter().enumerate() {
        let (slot, s) = match *ax {
            Axis::Coord(i, s) => (i, s),
            Axis::Diagonal(s) => (dim, s),
        };
        // s * x >= b for k in I, s * x <= a_k otherwise
        let (ge, b) = if subset.contains(k) { (true, a[k] + 1) } else { (false, a[k]) };
        // normalise to a bound on x
        let (is_lower, v) = if s > 0 { (ge, b) } else { (!ge, -b) };
        if is_lower {
            lo[slot] = Some(lo[slot].map_or(v, |l| l.max(v)));
        } else {
            hi[slot] = Some(hi[slot].map_or(v, |h| h.min(v)));
        }
    }
    if (0..=dim).any(|i| matches!((lo[i], hi[i]), (Some(l), Some(h)) if l > h)) {
        return false;
    }
    // the sums reachable from the box form an interval
    let reach_lo: Option<i64> = lo[..dim].iter().copied().sum();
    let reach_hi: Option<i64> = hi[..dim].iter().copied().sum();
    let low = [reach_lo, lo[dim]].into_iter().flatten().max();
    let high = [reach_hi, hi[dim]].into_iter().flatten().min();
    !matches!((low, high), (Some(l), Some(h)) if l > h)
}

fn region_nonempty(fan: &Fan, subset: RaySet, a: &[i64]) -> bool {
    let mut p = RationalPolyhedron::new(fan.rank());
    for (k, u) in fan.rays().iter().enumerate() {
        if subset.contains(k) {
            p = p.weak(u, a[k] + 1);
        } else {
            let neg: Vec<i64> = u.iter().map(|x| -x).collect();
            p = p.weak(&neg, -a[k]);
        }
    }
    feasible(&p)
}

/// Whether `sum a_r D_r` lies in the (closed) forbidden cone of `spec`.
pub fn in_forbidden_cone(fan: &Fan, spec: &ForbiddenConeSpec, a: &[i64]) -> bool {
    assert_eq!(a.len(), fan.ray_count(), "divisor length must match the fan");
    region_nonempty(fan, spec.subset, a)
}

/// One-shot certificate on a fan; builds a restricted catalog.
pub fn certify_acyclic(fan: &Fan, a: &[i64]) -> bool {
    ForbiddenCatalog::new(fan, true).certify_acyclic(a)
}

fn check_shape(n: usize, k: usize, l: usize) -> Result<(), ForbiddenError> {
    if n == 0 || n % 2 == 1 {
        return Err(ForbiddenError::Dimension(n));
    }
    if k + l > n + 1 {
        return Err(ForbiddenError::Shape(k + l, n + 1));
    }
    Ok(())
}

/// The acyclicity lemma for `F(c,k,l)` on `V_n` (with `k <= l` and the
/// class nonzero): if `2l <= n`, acyclic when `2l - n <= 2c <= n - 2k`;
/// otherwise when `1 <= c <= l - k - 1`.
pub fn lemma_acyclic_predicate(n: usize, c: i64, k: usize, l: usize) -> Result<bool, ForbiddenError> {
    check_shape(n, k, l)?;
    if k > l {
        return Err(ForbiddenError::HypothesisViolated { k, l });
    }
    if (c, k, l) == (0, 0, 0) {
        return Err(ForbiddenError::ZeroDivisor);
    }
    let (n, k, l) = (n as i64, k as i64, l as i64);
    Ok(if 2 * l <= n {
        2 * l - n <= 2 * c && 2 * c <= n - 2 * k
    } else {
        1 <= c && c <= l - k - 1
    })
}

/// Which kinds of forbidden cone can contain members of `F(c,k,l)`, by the
/// closed-form sweep over `I = ∅`, `I = {e_i : i in S}` and
/// `I = {ē_i : i in S}` with `|S| >= n/2 + 1`. No hypothesis on `k` and `l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyVerdict {
    /// members are effective (`I = ∅`)
    pub effective: bool,
    /// caught by some `I = {e_i : i in S}`
    pub e_side: bool,
    /// caught by some `I = {ē_i : i in S}`
    pub ebar_side: bool,
}

impl FamilyVerdict {
    pub fn acyclic(&self) -> bool {
        !self.effective && !self.e_side && !self.ebar_side
    }

    pub fn higher_vanish(&self) -> bool {
        !self.e_side && !self.ebar_side
    }
}

/// Closed-form forbidden-cone sweep for `F(c,k,l)`, valid for any `k, l`.
///
/// In the basis `(Ω, E_i)` a member has `b♮ = c` and `b_i = 1, 0, -1` on
/// `K, N, L`. Sets containing both `e_i` and `ē_i` force some `b_i <= -2`,
/// so only the sets above matter, and `S` must contain `L`.
/// - `e`-side: an element of `N ∩ S` lowers the reachable maximum of `b♮`
///   by 1, one of `K ∩ S` by 2; pad `L` up to `n/2 + 1` elements.
/// - `ē`-side: the reachable minimum is `|S| - |K \ S|`; pad with `N` first.
pub fn family_verdict(n: usize, c: i64, k: usize, l: usize) -> Result<FamilyVerdict, ForbiddenError> {
    check_shape(n, k, l)?;
    let (n, k, l) = (n as i64, k as i64, l as i64);
    let free = n + 1 - k - l;
    let need = n / 2 + 1;
    let extra = (need - l).max(0);
    let cost = if extra <= free { extra } else { free + 2 * (extra - free) };
    let size = l.max(need);
    let floor = size - k + ((size - l) - free).max(0);
    Ok(FamilyVerdict {
        effective: l == 0 && -k <= c && c <= 0,
        e_side: c <= -cost,
        ebar_side: c >= floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::{build_vn, e, ebar};
    use crate::picard::{make_f, orbit_fckl, IndexSet};

    fn rs(v: &[usize]) -> RaySet {
        RaySet::from_indices(v.iter().copied())
    }

    #[test]
    fn v2_catalog() {
        let f = build_vn(2).unwrap();
        let specs = enumerate_forbidden(&f, false);
        let sets: Vec<RaySet> = specs.iter().map(|s| s.subset).collect();
        assert!(sets.contains(&RaySet::EMPTY));
        assert!(sets.contains(&rs(&[e(0), ebar(2, 0)])));
        for r in 0..6 {
            assert!(!sets.contains(&rs(&[r])));
        }
        assert!(sets.contains(&f.all_rays()));
        let restricted = enumerate_forbidden(&f, true);
        assert_eq!(specs, restricted);
    }

    #[test]
    fn efimov_reduction_on_v4() {
        let f = build_vn(4).unwrap();
        assert_eq!(enumerate_forbidden(&f, false), enumerate_forbidden(&f, true));
    }

    #[test]
    fn membership_examples() {
        let f = build_vn(2).unwrap();
        let cat = ForbiddenCatalog::new(&f, true);
        let zero = DivisorClass::zero(2);
        assert!(!cat.certify_acyclic_class(&zero));
        let empty = cat.spec(RaySet::EMPTY).unwrap();
        assert!(in_forbidden_cone(&f, &empty, &zero.lift_to_rays()));
        let minus_h = -DivisorClass::hyperplane(2);
        assert!(cat.containing(&minus_h.lift_to_rays()).is_empty());
        assert!(cat.certify_acyclic_class(&minus_h));
        let anti = -DivisorClass::canonical(2);
        assert!(in_forbidden_cone(&f, &empty, &anti.lift_to_rays()));
        // K sits at the apex of the cone for I = all rays
        let k = DivisorClass::canonical(2);
        let all = cat.spec(f.all_rays()).unwrap();
        assert!(in_forbidden_cone(&f, &all, &k.lift_to_rays()));
        assert!(!cat.certify_acyclic_class(&k));
    }

    #[test]
    fn block_orthogonality_example_on_v4() {
        let f = build_vn(4).unwrap();
        let cat = ForbiddenCatalog::new(&f, true);
        let d = make_f(4, 1, IndexSet::from_indices([0])).unwrap() - make_f(4, 0, IndexSet::EMPTY).unwrap();
        assert_eq!(d.to_string(), "E-H-E_0");
        assert!(cat.certify_acyclic_class(&d));
    }

    #[test]
    fn box_fast_path_agrees_with_lp() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 4] {
            let f = build_vn(n).unwrap();
            let axes = box_axes(&f).expect("V_n rays are boxed");
            for _ in 0..300 {
                let a: Vec<i64> = (0..f.ray_count()).map(|_| rng.gen_range(-3..=3)).collect();
                let s = RaySet(rng.gen_range(0..1u64 << f.ray_count()));
                assert_eq!(box_region_nonempty(&axes, s, &a), region_nonempty(&f, s, &a), "{s} {a:?}");
            }
        }
        let skew = Fan::new(2, vec![vec![1, 0], vec![1, 2]], vec![RaySet(0b11)]).unwrap();
        assert!(box_axes(&skew).is_none());
    }

    #[test]
    fn lemma_examples() {
        assert_eq!(lemma_acyclic_predicate(2, 1, 0, 3), Ok(true));
        assert_eq!(lemma_acyclic_predicate(4, 0, 0, 1), Ok(true));
        assert_eq!(lemma_acyclic_predicate(2, 0, 0, 0), Err(ForbiddenError::ZeroDivisor));
        assert_eq!(
            lemma_acyclic_predicate(2, 0, 2, 1),
            Err(ForbiddenError::HypothesisViolated { k: 2, l: 1 })
        );
        assert_eq!(lemma_acyclic_predicate(2, 2, 0, 3), Ok(true));
        assert_eq!(lemma_acyclic_predicate(2, 3, 0, 3), Ok(false));
    }

    #[test]
    fn lemma_implies_certificate() {
        for n in [2usize, 4] {
            let cat = ForbiddenCatalog::new(&build_vn(n).unwrap(), true);
            for l in 0..=n + 1 {
                for k in 0..=l.min(n + 1 - l) {
                    for c in -(n as i64) - 1..=n as i64 + 2 {
                        if (c, k, l) == (0, 0, 0) || !lemma_acyclic_predicate(n, c, k, l).unwrap() {
                            continue;
                        }
                        for d in orbit_fckl(n, c, k, l).unwrap() {
                            assert!(cat.certify_acyclic_class(&d), "n={n} {d}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn closed_form_matches_lp_sweep() {
        // the closed form may only be more cautious than the LP catalog;
        // on V_2 and V_4 it is exact
        for n in [2usize, 4] {
            let cat = ForbiddenCatalog::new(&build_vn(n).unwrap(), true);
            for l in 0..=n + 1 {
                for k in 0..=n + 1 - l {
                    for c in -(n as i64) - 2..=n as i64 + 2 {
                        let v = family_verdict(n, c, k, l).unwrap();
                        let d = &orbit_fckl(n, c, k, l).unwrap()[0];
                        assert_eq!(v.acyclic(), cat.certify_acyclic_class(d), "n={n} ({c},{k},{l})");
                        assert_eq!(v.higher_vanish(), cat.certify_higher_vanishing_class(d), "n={n} ({c},{k},{l})");
                    }
                }
            }
        }
    }
}
