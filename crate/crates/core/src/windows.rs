//! Windows and wall crossings from `V_n` down to `P^n`.
//!
//! Each step crosses the wall of the cocharacter `λ_J`, whose pairing with
//! `Pic` is `λ_J(H) = 1 - |J|`, `λ_J(E_j) = -1` for `j in J` and `0`
//! otherwise; on `F_{c,L}` it gives `|L ∩ J| - c`. The generation certificate
//! checks the numeric side of each crossing: all of `G_n` has weights in the
//! window, and every wall piece is reached by a Koszul complex whose terms lie
//! in `G_n`.

use crate::collection::{build_gn, check_n, Collection, CollectionError, Member};
use crate::exact::IntMatrix;
use crate::fan::{Fan, RaySet};
use crate::picard::{class_of_ray, make_f, DivisorClass, IndexSet};
use serde::Serialize;
use std::collections::HashSet;
use std::fmt;

pub const CERTIFICATE_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WindowError {
    #[error(transparent)]
    Collection(#[from] CollectionError),
    #[error("|J| = {size} exceeds n/2 = {half} for J = {j}")]
    JTooLarge { j: IndexSet, size: usize, half: usize },
    #[error("J = {j}: {member} has weight {weight}, outside the window [{lo}, {hi}]")]
    WindowViolation { j: IndexSet, member: String, weight: i64, lo: i64, hi: i64 },
    #[error("J = {j}, a = {a}: w = {w} is outside the Koszul interval")]
    OutsideKoszulInterval { j: IndexSet, a: i64, w: i64 },
    #[error("J = {j}, a = {a}: w = {w} lies in neither branch")]
    BranchGap { j: IndexSet, a: i64, w: i64 },
    #[error("J = {j}, a = {a}: Koszul component {component} is not in the collection")]
    KoszulEscape { j: IndexSet, a: i64, component: String },
    #[error("circuit {circuit}: {reason}")]
    WallMismatch { circuit: RaySet, reason: String },
}

/// Class-of-ray columns in the order `ē_0..ē_n, e_0..e_n`, rows in the basis
/// `(H, E_0..E_n)`.
pub fn weight_matrix(n: usize) -> Result<IntMatrix, WindowError> {
    check_n(n)?;
    let order: Vec<usize> = (n + 1..2 * n + 2).chain(0..=n).collect();
    let cols: Vec<DivisorClass> = order.iter().map(|&r| class_of_ray(n, r).expect("ray in range")).collect();
    let rows: Vec<Vec<i64>> = (0..n + 2).map(|i| cols.iter().map(|c| c.coeffs()[i]).collect()).collect();
    Ok(IntMatrix::from_rows(&rows).expect("rectangular"))
}

/// The one-parameter subgroup `λ_J`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Cocharacter {
    pub n: usize,
    #[serde(rename = "J")]
    pub j: IndexSet,
}

impl Cocharacter {
    pub fn new(n: usize, j: IndexSet) -> Self {
        debug_assert!(j.iter().all(|i| i <= n));
        Cocharacter { n, j }
    }

    /// `λ_J` paired with a class.
    pub fn weight(&self, d: &DivisorClass) -> i64 {
        let size = self.j.len() as i64;
        (1 - size) * d.h() - self.j.iter().map(|i| d.e(i)).sum::<i64>()
    }

    /// Weights on the Cox coordinates in the fan's ray order
    /// `e_0..e_n, ē_0..ē_n`.
    pub fn ray_weights(&self) -> Vec<i64> {
        (0..2 * self.n + 2)
            .map(|r| self.weight(&class_of_ray(self.n, r).expect("ray in range")))
            .collect()
    }

    /// `(t_+, t_-)` for this cocharacter.
    pub fn t_bounds(&self) -> (i64, i64) {
        t_bounds(&self.ray_weights())
    }

    /// `μ = t_+ + t_-`, which equals the weight of `K`.
    pub fn mu(&self) -> i64 {
        let (p, m) = self.t_bounds();
        p + m
    }
}

/// `t_+ = -(sum of positive weights)`, `t_- = -(sum of negative weights)`
/// for a rank-one torus acting on affine space with the given weights.
pub fn t_bounds(weights: &[i64]) -> (i64, i64) {
    let pos: i64 = weights.iter().filter(|&&w| w > 0).sum();
    let neg: i64 = weights.iter().filter(|&&w| w < 0).sum();
    (-pos, -neg)
}

/// `λ_J(F_{c,L}) = |L ∩ J| - c`.
pub fn weight(j: IndexSet, d: &DivisorClass) -> i64 {
    Cocharacter::new(d.n(), j).weight(d)
}

/// `⌈(n+2)/4⌉`.
pub fn window_offset(n: usize) -> i64 {
    (n as i64 + 2 + 3) / 4
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WallRecord {
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    pub window: [i64; 2],
    pub wall_range: [i64; 2],
    /// the wall piece is `P^{|J^c| - 1}`
    pub wall_piece_dim: usize,
    pub pieces: Vec<KoszulWitness>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `w <= n/4`, twist `w(E - H)`
    Low,
    /// `w >= (n+2)/4`, twist `w(E - H) - sum_{J^c} E_i`
    High,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KoszulWitness {
    pub a: i64,
    pub w: i64,
    pub branch: Branch,
    /// `(c, J')` of every component
    pub components: Vec<(i64, Vec<usize>)>,
}

/// Window `[d - |J^c|, d - 1]` and wall range `[d - |J^c|, d - 1 - |J|]`.
pub fn wall_record(n: usize, j: IndexSet, d: i64) -> Result<WallRecord, WindowError> {
    check_n(n)?;
    if j.len() > n / 2 {
        return Err(WindowError::JTooLarge { j, size: j.len(), half: n / 2 });
    }
    let comp = (n + 1 - j.len()) as i64;
    Ok(WallRecord {
        j: j.to_vec(),
        window: [d - comp, d - 1],
        wall_range: [d - comp, d - 1 - j.len() as i64],
        wall_piece_dim: n - j.len(),
        pieces: Vec::new(),
    })
}

/// `{ twist - sum_{i in L} E_i : L ⊆ J }`, one class per subset.
pub fn koszul_components(j: IndexSet, twist: &DivisorClass) -> Vec<DivisorClass> {
    let n = twist.n();
    j.subsets()
        .map(|l| l.iter().fold(twist.clone(), |acc, i| acc - DivisorClass::exceptional(n, i)))
        .collect()
}

/// All `J` with `|J| <= n/2`: larger sets first, equal sizes in decreasing
/// lexicographic order of their sorted tuples, `∅` last.
pub fn wall_order(n: usize) -> Vec<IndexSet> {
    let mut js: Vec<IndexSet> = IndexSet::full(n + 1).subsets().filter(|s| s.len() <= n / 2).collect();
    js.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| b.to_vec().cmp(&a.to_vec())));
    js
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenerationCertificate {
    pub schema: u32,
    pub n: usize,
    pub d: i64,
    pub walls: Vec<WallRecord>,
    pub base_case: String,
}

impl GenerationCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }
}

impl fmt::Display for GenerationCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}, d = {}, {} wall records, base case {}", self.n, self.d, self.walls.len(), self.base_case)?;
        for w in &self.walls {
            let ws: Vec<String> = w.pieces.iter().map(|p| format!("{}:{:?}", p.w, p.branch)).collect();
            writeln!(
                f,
                "  J={:?} window=[{}, {}] walls=[{}, {}] P^{} w: {}",
                w.j,
                w.window[0],
                w.window[1],
                w.wall_range[0],
                w.wall_range[1],
                w.wall_piece_dim,
                ws.join(" ")
            )?;
        }
        Ok(())
    }
}

/// Replays the generation argument for `G_n`.
pub fn build_certificate(n: usize) -> Result<GenerationCertificate, WindowError> {
    build_certificate_for(&build_gn(n)?)
}

/// Replays the generation argument with `c` in place of `G_n`: window
/// containment of every member, then one Koszul witness `w = -a` per wall
/// degree `a`, all of whose components must be members.
pub fn build_certificate_for(c: &Collection) -> Result<GenerationCertificate, WindowError> {
    let n = c.n;
    check_n(n)?;
    let members: HashSet<Member> = c.flat().into_iter().map(|(_, m)| m).collect();
    let classes: Vec<(Member, DivisorClass)> = members.iter().map(|m| (*m, m.class(n))).collect();
    let d = window_offset(n);
    let ni = n as i64;
    let mut walls = Vec::new();
    for j in wall_order(n) {
        let mut rec = wall_record(n, j, d)?;
        let [lo, hi] = rec.window;
        let lam = Cocharacter::new(n, j);
        for (m, cls) in &classes {
            let wt = lam.weight(cls);
            debug_assert_eq!(wt, (m.j.intersection(j).len() as i64) - m.c);
            if wt < lo || wt > hi {
                return Err(WindowError::WindowViolation {
                    j,
                    member: format!("O({cls})"),
                    weight: wt,
                    lo,
                    hi,
                });
            }
        }
        let comp = IndexSet::full(n + 1).difference(j);
        let jc = comp.len() as i64;
        for a in rec.wall_range[0]..=rec.wall_range[1] {
            let w = -a;
            if !(3 * ni + 4 - 4 * jc <= 4 * w && 4 * w <= 4 * jc - ni - 2) {
                return Err(WindowError::OutsideKoszulInterval { j, a, w });
            }
            let (branch, base) = if 4 * w <= ni {
                (Branch::Low, IndexSet::EMPTY)
            } else if 4 * w >= ni + 2 {
                (Branch::High, comp)
            } else {
                return Err(WindowError::BranchGap { j, a, w });
            };
            let twist = make_f(n, w, base).expect("indices in range");
            let mut components = Vec::new();
            for k in koszul_components(j, &twist) {
                let m = k
                    .decode()
                    .map(|(c0, l)| Member::new(c0, l))
                    .filter(|m| members.contains(m))
                    .ok_or_else(|| WindowError::KoszulEscape {
                        j,
                        a,
                        component: format!("O({k})"),
                    })?;
                components.push((m.c, m.j.to_vec()));
            }
            rec.pieces.push(KoszulWitness { a, w, branch, components });
        }
        walls.push(rec);
    }
    Ok(GenerationCertificate {
        schema: CERTIFICATE_SCHEMA,
        n,
        d,
        walls,
        base_case: "empty".into(),
    })
}

/// Every member weight outside its window, over all `|J| <= n/2`.
pub fn window_violations(c: &Collection) -> Vec<(IndexSet, Member, i64)> {
    let n = c.n;
    let d = window_offset(n);
    let mut out = Vec::new();
    for j in wall_order(n) {
        let lo = d - (n + 1 - j.len()) as i64;
        for (_, m) in c.flat() {
            let wt = weight(j, &m.class(n));
            if wt < lo || wt > d - 1 {
                out.push((j, m, wt));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WallReport {
    pub n: usize,
    pub sign_circuits: usize,
    pub pair_circuits: usize,
}

/// Matches the circuits of `V_n` with the walls `λ_J = 0` (one circuit per
/// `J ⊆ {0..n}`, relation `sum_{J^c} ē_i - sum_J e_i = 0`) and the walls of
/// `H -> 1, E_j -> δ_ij` (the pairs `{e_i, ē_i}`).
pub fn verify_walls(fan: &Fan) -> Result<WallReport, WindowError> {
    let r = fan.ray_count();
    let n = fan.rank();
    if r != 2 * n + 2 {
        return Err(WindowError::WallMismatch {
            circuit: RaySet::EMPTY,
            reason: format!("{r} rays, not the 2n+2 of V_n"),
        });
    }
    let ray_pairing = |f: &dyn Fn(&DivisorClass) -> i64| -> Vec<i64> {
        (0..r).map(|k| f(&class_of_ray(n, k).expect("ray in range"))).collect()
    };
    let mut seen_j = HashSet::new();
    let mut seen_pairs = HashSet::new();
    for circ in fan.circuits() {
        let mismatch = |reason: String| WindowError::WallMismatch { circuit: circ, reason };
        let support = fan
            .circuit_relation(circ)
            .ok_or_else(|| mismatch("no integer relation".into()))?;
        let mut rel = vec![0i64; r];
        for (k, x) in circ.iter().zip(support) {
            rel[k] = x;
        }
        let e_part: Vec<usize> = (0..=n).filter(|&i| circ.contains(i)).collect();
        let ebar_part: Vec<usize> = (0..=n).filter(|&i| circ.contains(n + 1 + i)).collect();
        let expected = if circ.len() == 2 && e_part.len() == 1 && e_part == ebar_part {
            let i = e_part[0];
            if !seen_pairs.insert(i) {
                return Err(mismatch("pair circuit seen twice".into()));
            }
            ray_pairing(&|d: &DivisorClass| d.h() + d.e(i))
        } else if e_part.iter().chain(&ebar_part).count() == n + 1
            && (0..=n).all(|i| e_part.contains(&i) != ebar_part.contains(&i))
        {
            let j = IndexSet::from_indices(e_part.iter().copied());
            if !seen_j.insert(j) {
                return Err(mismatch("sign-choice circuit seen twice".into()));
            }
            Cocharacter::new(n, j).ray_weights()
        } else {
            return Err(mismatch("neither a pair nor a sign-choice circuit".into()));
        };
        let neg: Vec<i64> = expected.iter().map(|x| -x).collect();
        if rel != expected && rel != neg {
            return Err(mismatch(format!("relation {rel:?} does not match the wall {expected:?}")));
        }
    }
    if seen_j.len() != 1 << (n + 1) || seen_pairs.len() != n + 1 {
        return Err(WindowError::WallMismatch {
            circuit: RaySet::EMPTY,
            reason: format!("found {} sign-choice and {} pair circuits", seen_j.len(), seen_pairs.len()),
        });
    }
    Ok(WallReport {
        n,
        sign_circuits: seen_j.len(),
        pair_circuits: seen_pairs.len(),
    })
}
