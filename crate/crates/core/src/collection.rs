//! The collection `G_n` of line bundles `O(F_{c,J})` on `V_n` and its
//! verification.
//!
//! Members are grouped into blocks, one per `(S_{n+1} x C_2)`-orbit. Blocks
//! are sorted by `l = |J|` decreasing, ties by the smaller `c` of the orbit;
//! inside a block members are sorted by `c`, then by `J` as a sorted tuple.

use crate::cohomology::CohomologyOracle;
use crate::exact::IntMatrix;
use crate::fan::build_vn;
use crate::forbidden::{family_verdict, lemma_acyclic_predicate, FamilyVerdict, ForbiddenCatalog, ForbiddenConeSpec, ForbiddenError};
use crate::par::{self, Parallelism};
use crate::picard::{act, difference_family, make_f, DivisorClass, GroupElement, IndexSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CollectionError {
    #[error("n must be even and at least 2, got {0}")]
    Dimension(usize),
    #[error("invalid collection JSON: {0}")]
    Json(String),
    #[error("bad mutation {0:?}: expected drop:I, add[:C:J:B] or swap[:A:B]")]
    Mutation(String),
    #[error("mutation refers to {what} {index}, which does not exist")]
    MutationIndex { what: &'static str, index: usize },
}

pub(crate) fn check_n(n: usize) -> Result<(), CollectionError> {
    if n < 2 || n % 2 == 1 {
        Err(CollectionError::Dimension(n))
    } else {
        Ok(())
    }
}

/// `c(n) = (n+1)! / ((n/2)!)^2`, the rank of `K_0(V_n)`.
pub fn expected_size(n: usize) -> u128 {
    let fact = |k: usize| (1..=k as u128).product::<u128>();
    fact(n + 1) / (fact(n / 2) * fact(n / 2))
}

/// The points `(c, l)` of `F_n`, sorted by `l` then `c`.
pub fn build_fn(n: usize) -> Result<Vec<(i64, usize)>, CollectionError> {
    check_n(n)?;
    let ni = n as i64;
    let mut out = Vec::new();
    for l in 0..=n + 1 {
        let li = l as i64;
        for c in -ni..=ni + 1 {
            let low = 2 * li <= ni && 4 * li - ni <= 4 * c && 4 * c <= ni;
            let high = 2 * li > ni && ni + 2 <= 4 * c && 4 * c <= 4 * li - ni - 2;
            if low || high {
                out.push((c, l));
            }
        }
    }
    Ok(out)
}

/// One line bundle `O(F_{c,J})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "MemberRepr", try_from = "MemberRepr")]
pub struct Member {
    pub c: i64,
    pub j: IndexSet,
}

#[derive(Serialize, Deserialize)]
struct MemberRepr {
    c: i64,
    #[serde(rename = "J")]
    j: Vec<usize>,
}

impl From<Member> for MemberRepr {
    fn from(m: Member) -> Self {
        MemberRepr { c: m.c, j: m.j.to_vec() }
    }
}

impl TryFrom<MemberRepr> for Member {
    type Error = String;
    fn try_from(r: MemberRepr) -> Result<Self, String> {
        if let Some(&bad) = r.j.iter().find(|&&i| i >= 64) {
            return Err(format!("index {bad} out of range"));
        }
        let j = IndexSet::from_indices(r.j.iter().copied());
        if j.len() != r.j.len() {
            return Err("repeated index in J".into());
        }
        Ok(Member { c: r.c, j })
    }
}

impl Member {
    pub fn new(c: i64, j: IndexSet) -> Self {
        Member { c, j }
    }

    pub fn ell(&self) -> usize {
        self.j.len()
    }

    pub fn class(&self, n: usize) -> DivisorClass {
        make_f(n, self.c, self.j).expect("member indices are checked against n")
    }

    /// Sort key inside a block: `c`, then `J` as a sorted tuple.
    fn key(&self) -> (i64, Vec<usize>) {
        (self.c, self.j.to_vec())
    }

    fn from_class(d: &DivisorClass) -> Option<Member> {
        d.decode().map(|(c, j)| Member { c, j })
    }
}

impl fmt::Display for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F({}, {})", self.c, self.j)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub ell: usize,
    pub members: Vec<Member>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collection {
    pub n: usize,
    pub blocks: Vec<Block>,
}

/// Where a member sits, for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MemberLabel {
    pub index: usize,
    pub block: usize,
    pub c: i64,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    pub class: String,
}

impl fmt::Display for MemberLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} (block {}) O({})", self.index, self.block, self.class)
    }
}

/// `G_n`, grouped into orbit blocks.
pub fn build_gn(n: usize) -> Result<Collection, CollectionError> {
    let points = build_fn(n)?;
    // the antipodal involution pairs (c, l) with (l - c, l)
    let mut groups: HashMap<(usize, i64), Vec<Member>> = HashMap::new();
    for &(c, l) in &points {
        let key = (l, c.min(l as i64 - c));
        let members = groups.entry(key).or_default();
        for j in IndexSet::full(n + 1).subsets_of_size(l) {
            members.push(Member { c, j });
        }
    }
    let mut keys: Vec<(usize, i64)> = groups.keys().copied().collect();
    keys.sort_by_key(|&(l, c)| (std::cmp::Reverse(l), c));
    let blocks = keys
        .into_iter()
        .map(|k| {
            let mut members = groups.remove(&k).expect("key from map");
            members.sort_by_key(Member::key);
            Block { ell: k.0, members }
        })
        .collect();
    Ok(Collection { n, blocks })
}

impl Collection {
    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.members.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.members.len()).collect()
    }

    /// Members in collection order with their block positions.
    pub fn flat(&self) -> Vec<(usize, Member)> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(b, blk)| blk.members.iter().map(move |m| (b, *m)))
            .collect()
    }

    pub fn contains(&self, m: &Member) -> bool {
        self.blocks.iter().any(|b| b.members.contains(m))
    }

    pub fn classes(&self) -> Vec<DivisorClass> {
        self.flat().iter().map(|(_, m)| m.class(self.n)).collect()
    }

    pub fn label(&self, index: usize) -> MemberLabel {
        let (block, m) = self.flat()[index];
        self.label_of(index, block, &m)
    }

    fn label_of(&self, index: usize, block: usize, m: &Member) -> MemberLabel {
        MemberLabel {
            index,
            block,
            c: m.c,
            j: m.j.to_vec(),
            class: m.class(self.n).to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("collections serialize")
    }

    pub fn from_json(s: &str) -> Result<Collection, CollectionError> {
        let c: Collection = serde_json::from_str(s).map_err(|e| CollectionError::Json(e.to_string()))?;
        check_n(c.n)?;
        for b in &c.blocks {
            for m in &b.members {
                if m.j.iter().any(|i| i > c.n) {
                    return Err(CollectionError::Json(format!("{m} has an index above n = {}", c.n)));
                }
            }
        }
        Ok(c)
    }

    /// Group elements that generate `S_{n+1} x C_2`.
    fn generators(&self) -> Vec<(String, GroupElement)> {
        let n = self.n;
        let mut g: Vec<(String, GroupElement)> = (0..n)
            .map(|i| (format!("({i} {})", i + 1), GroupElement::transposition(n, i, i + 1)))
            .collect();
        g.push(("antipodal".into(), GroupElement::antipodal(n)));
        g
    }

    /// Closure of the member set under the group.
    pub fn orbit_closure(&self) -> BTreeSet<Member> {
        let gens = self.generators();
        let mut seen: BTreeSet<Member> = self.flat().into_iter().map(|(_, m)| m).collect();
        let mut stack: Vec<Member> = seen.iter().copied().collect();
        while let Some(m) = stack.pop() {
            for (_, g) in &gens {
                let img = Member::from_class(&act(g, &m.class(self.n)).expect("dimensions match")).expect("the group preserves F-classes");
                if seen.insert(img) {
                    stack.push(img);
                }
            }
        }
        seen
    }
}

/// A structural defect of a collection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StructureIssue {
    /// a member's `|J|` differs from its block's `l`
    WrongEll { member: MemberLabel, block_ell: usize },
    /// block `block` has larger `l` than the block before it
    EllIncreases { block: usize, ell: usize, previous: usize },
    Duplicate { first: MemberLabel, second: MemberLabel },
    /// `(c, |J|)` is not a point of `F_n`
    OutsideFn { member: MemberLabel },
    /// size differs from `c(n)`; `missing` lists group images absent from
    /// the collection
    WrongSize { expected: u128, got: usize, missing: Vec<String> },
}

impl fmt::Display for StructureIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureIssue::WrongEll { member, block_ell } => write!(f, "{member} has |J| != block l = {block_ell}"),
            StructureIssue::EllIncreases { block, ell, previous } => {
                write!(f, "block {block} has l = {ell} > {previous} of the block before")
            }
            StructureIssue::Duplicate { first, second } => write!(f, "{second} repeats {first}"),
            StructureIssue::OutsideFn { member } => write!(f, "{member}: (c, |J|) = ({}, {}) is not in F_n", member.c, member.j.len()),
            StructureIssue::WrongSize { expected, got, missing } => {
                write!(f, "size {got}, expected {expected}")?;
                if !missing.is_empty() {
                    write!(f, "; missing group images: {}", missing.join(", "))?;
                }
                Ok(())
            }
        }
    }
}

pub fn verify_structure(c: &Collection) -> Vec<StructureIssue> {
    let mut issues = Vec::new();
    let fn_points: HashSet<(i64, usize)> = build_fn(c.n).map(|v| v.into_iter().collect()).unwrap_or_default();
    let mut seen: HashMap<Member, usize> = HashMap::new();
    for (b, blk) in c.blocks.iter().enumerate() {
        if b > 0 && blk.ell > c.blocks[b - 1].ell {
            issues.push(StructureIssue::EllIncreases {
                block: b,
                ell: blk.ell,
                previous: c.blocks[b - 1].ell,
            });
        }
    }
    for (idx, (b, m)) in c.flat().into_iter().enumerate() {
        let label = c.label_of(idx, b, &m);
        if m.ell() != c.blocks[b].ell {
            issues.push(StructureIssue::WrongEll {
                member: label.clone(),
                block_ell: c.blocks[b].ell,
            });
        }
        if !fn_points.contains(&(m.c, m.ell())) {
            issues.push(StructureIssue::OutsideFn { member: label.clone() });
        }
        if let Some(&first) = seen.get(&m) {
            issues.push(StructureIssue::Duplicate {
                first: c.label(first),
                second: label,
            });
        } else {
            seen.insert(m, idx);
        }
    }
    let expected = expected_size(c.n);
    if c.len() as u128 != expected {
        let present: BTreeSet<Member> = seen.keys().copied().collect();
        let missing = c
            .orbit_closure()
            .difference(&present)
            .map(|m| format!("{m} = O({})", m.class(c.n)))
            .collect();
        issues.push(StructureIssue::WrongSize {
            expected,
            got: c.len(),
            missing,
        });
    }
    issues
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Inequalities,
    Forbidden,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Inequalities => "inequalities",
            Method::Forbidden => "forbidden",
            Method::Oracle => "oracle",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "inequalities" => Ok(Method::Inequalities),
            "forbidden" => Ok(Method::Forbidden),
            "oracle" => Ok(Method::Oracle),
            _ => Err(format!("unknown method {s:?}")),
        }
    }
}

/// What `Ext^*(X, Y) = H^*(Y - X)` must satisfy for an ordered pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Requirement {
    /// `X` in the same block as `Y` or later: no cohomology at all
    Acyclic,
    /// `X` in an earlier block: `Hom` allowed, higher `Ext` must vanish
    HigherVanishing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// acyclicity lemma on the difference family; `case` is the case of the
    /// theorem's proof the pair falls under (0 if the blocks are misordered)
    Lemma { case: u8, c: i64, k: usize, l: usize, holds: bool },
    /// closed-form forbidden-cone sweep on the difference family
    Family { c: i64, k: usize, l: usize, verdict: FamilyVerdict },
    /// first forbidden cone containing the difference, if any
    Forbidden { cone: Option<ForbiddenConeSpec> },
    Oracle { dims: Vec<u64> },
    /// the two members are the same bundle
    Equal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairVerdict {
    pub from: MemberLabel,
    pub to: MemberLabel,
    pub difference: String,
    pub requirement: Requirement,
    pub passed: bool,
    pub evidence: Evidence,
}

impl fmt::Display for PairVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Ext(O({}), O({})) = H(O({})) [{:?}]: {} ({})",
            self.from.class,
            self.to.class,
            self.difference,
            self.requirement,
            if self.passed { "ok" } else { "VIOLATION" },
            serde_json::to_string(&self.evidence).unwrap_or_default()
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Sample {
    pub budget: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub method: Method,
    /// check a random subset of this many ordered pairs instead of all
    pub sample: Option<Sample>,
    pub parallelism: Parallelism,
    /// keep every pair verdict, not only violations
    pub full_report: bool,
}

impl VerifyOptions {
    pub fn new(method: Method) -> Self {
        VerifyOptions {
            method,
            sample: None,
            parallelism: Parallelism::default(),
            full_report: false,
        }
    }

    pub fn sampled(mut self, budget: usize, seed: u64) -> Self {
        self.sample = Some(Sample { budget, seed });
        self
    }

    pub fn sequential(mut self) -> Self {
        self.parallelism = Parallelism::Sequential;
        self
    }

    pub fn full(mut self) -> Self {
        self.full_report = true;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExceptionalReport {
    pub n: usize,
    pub method: Method,
    pub total_pairs: usize,
    pub checked_pairs: usize,
    pub sample: Option<Sample>,
    pub structure: Vec<StructureIssue>,
    pub violations: Vec<PairVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<Vec<PairVerdict>>,
}

impl ExceptionalReport {
    pub fn passed(&self) -> bool {
        self.structure.is_empty() && self.violations.is_empty()
    }
}

/// Lazily built cohomology oracle and forbidden-cone catalog for `V_n`.
pub struct Engines {
    n: usize,
    oracle: OnceLock<CohomologyOracle>,
    catalog: OnceLock<ForbiddenCatalog>,
}

impl Engines {
    pub fn new(n: usize) -> Result<Self, CollectionError> {
        check_n(n)?;
        Ok(Engines {
            n,
            oracle: OnceLock::new(),
            catalog: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn oracle(&self) -> &CohomologyOracle {
        self.oracle.get_or_init(|| {
            CohomologyOracle::new(build_vn(self.n).expect("n is checked")).expect("V_n has few enough rays")
        })
    }

    pub fn catalog(&self) -> &ForbiddenCatalog {
        self.catalog
            .get_or_init(|| ForbiddenCatalog::new(&build_vn(self.n).expect("n is checked"), true))
    }
}

/// Index `t` of the `N(N-1)` ordered pairs of distinct positions.
fn pair_at(t: usize, count: usize) -> (usize, usize) {
    let x = t / (count - 1);
    let r = t % (count - 1);
    (x, if r < x { r } else { r + 1 })
}

/// Checks every ordered pair `(X, Y)` of distinct members (or a seeded
/// sample of them): `H^*(Y - X) = 0` when `X` is not in an earlier block
/// than `Y`, and `H^{>0}(Y - X) = 0` otherwise.
pub fn verify_exceptional(c: &Collection, opts: &VerifyOptions, engines: &Engines) -> ExceptionalReport {
    assert_eq!(engines.n(), c.n, "engines built for another dimension");
    let flat = c.flat();
    let count = flat.len();
    let total = count * count.saturating_sub(1);
    let pairs: Vec<usize> = match opts.sample {
        Some(s) if s.budget < total => {
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            let mut v = rand::seq::index::sample(&mut rng, total, s.budget).into_vec();
            v.sort_unstable();
            v
        }
        _ => (0..total).collect(),
    };
    // build shared engines up front rather than inside the workers
    match opts.method {
        Method::Oracle => {
            engines.oracle();
        }
        Method::Forbidden => {
            engines.catalog();
        }
        Method::Inequalities => {}
    }
    let verdicts: Vec<PairVerdict> = par::map(opts.parallelism, &pairs, |&t| {
        let (x, y) = pair_at(t, count);
        check_pair(c, &flat, x, y, opts.method, engines)
    });
    let violations = verdicts.iter().filter(|v| !v.passed).cloned().collect();
    ExceptionalReport {
        n: c.n,
        method: opts.method,
        total_pairs: total,
        checked_pairs: pairs.len(),
        sample: opts.sample.filter(|s| s.budget < total),
        structure: verify_structure(c),
        violations,
        verdicts: opts.full_report.then_some(verdicts),
    }
}

fn check_pair(c: &Collection, flat: &[(usize, Member)], x: usize, y: usize, method: Method, engines: &Engines) -> PairVerdict {
    let n = c.n;
    let (bx, mx) = flat[x];
    let (by, my) = flat[y];
    let requirement = if bx >= by {
        Requirement::Acyclic
    } else {
        Requirement::HigherVanishing
    };
    let (dx, dy) = (mx.class(n), my.class(n));
    let diff = &dy - &dx;
    let (passed, evidence) = if diff.is_zero() {
        (false, Evidence::Equal)
    } else {
        match method {
            Method::Inequalities => by_inequalities(n, &dy, &dx, requirement),
            Method::Forbidden => {
                let a = diff.lift_to_rays();
                let cone = engines.catalog().first_containing(&a, requirement == Requirement::HigherVanishing);
                (cone.is_none(), Evidence::Forbidden { cone })
            }
            Method::Oracle => {
                let h = engines.oracle().cohomology_of_class(&diff).expect("oracle runs on V_n");
                let ok = match requirement {
                    Requirement::Acyclic => h.is_zero(),
                    Requirement::HigherVanishing => h.higher_vanish(),
                };
                (ok, Evidence::Oracle { dims: h.dims })
            }
        }
    };
    PairVerdict {
        from: c.label_of(x, bx, &mx),
        to: c.label_of(y, by, &my),
        difference: diff.to_string(),
        requirement,
        passed,
        evidence,
    }
}

/// The theorem's proof for `L1 - L2` with `L1 = y`, `L2 = x`.
fn by_inequalities(n: usize, l1: &DivisorClass, l2: &DivisorClass, req: Requirement) -> (bool, Evidence) {
    let d = difference_family(l1, l2).expect("members are F-classes");
    let family = |c, k, l| {
        let v = family_verdict(n, c, k, l).expect("shape from a difference");
        let ok = match req {
            Requirement::Acyclic => v.acyclic(),
            Requirement::HigherVanishing => v.higher_vanish(),
        };
        (ok, Evidence::Family { c, k, l, verdict: v })
    };
    if req == Requirement::HigherVanishing {
        return family(d.c, d.k, d.l);
    }
    let half = n / 2;
    let (ell1, ell2) = (d.l + d.i, d.k + d.i);
    let case = match (ell1 > half, ell2 > half) {
        _ if ell1 < ell2 => 0,
        (false, false) => 1,
        (true, true) => 2,
        (true, false) => 3,
        (false, true) => 0,
    };
    match lemma_acyclic_predicate(n, d.c, d.k, d.l) {
        Ok(holds) => (
            holds,
            Evidence::Lemma {
                case,
                c: d.c,
                k: d.k,
                l: d.l,
                holds,
            },
        ),
        // misordered blocks put k > l; the lemma does not apply
        Err(ForbiddenError::HypothesisViolated { .. }) => family(d.c, d.k, d.l),
        Err(e) => unreachable!("difference of distinct members: {e}"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityFailure {
    pub generator: String,
    pub member: String,
    pub image: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    pub passed: bool,
    pub failures: Vec<StabilityFailure>,
}

/// Every generator maps members to members and blocks to blocks, and the
/// antipodal involution acts as `F_{c,J} -> F_{|J|-c,J}`.
pub fn verify_stability(c: &Collection) -> StabilityReport {
    let n = c.n;
    let members: HashSet<Member> = c.flat().into_iter().map(|(_, m)| m).collect();
    let block_sets: Vec<BTreeSet<Member>> = c.blocks.iter().map(|b| b.members.iter().copied().collect()).collect();
    let mut failures = Vec::new();
    for (name, g) in c.generators() {
        for (b, blk) in c.blocks.iter().enumerate() {
            let mut image = BTreeSet::new();
            for m in &blk.members {
                let d = act(&g, &m.class(n)).expect("dimensions match");
                let img = Member::from_class(&d).expect("the group preserves F-classes");
                if !members.contains(&img) {
                    failures.push(StabilityFailure {
                        generator: name.clone(),
                        member: format!("{m} = O({})", m.class(n)),
                        image: format!("{img} = O({d})"),
                        reason: "image is not a member".into(),
                    });
                }
                image.insert(img);
            }
            if !block_sets.contains(&image) {
                failures.push(StabilityFailure {
                    generator: name.clone(),
                    member: format!("block {b}"),
                    image: format!("{} classes", image.len()),
                    reason: "image of the block is not a block".into(),
                });
            }
        }
    }
    let anti = GroupElement::antipodal(n);
    for m in &members {
        let img = act(&anti, &m.class(n)).expect("dimensions match");
        let want = make_f(n, m.ell() as i64 - m.c, m.j).expect("indices checked");
        if img != want {
            failures.push(StabilityFailure {
                generator: "antipodal".into(),
                member: m.to_string(),
                image: img.to_string(),
                reason: format!("expected F_(|J|-c, J) = {want}"),
            });
        }
    }
    StabilityReport {
        passed: failures.is_empty(),
        failures,
    }
}

/// `chi(L_i, L_j)` in collection order.
pub fn gram_matrix(c: &Collection, engines: &Engines, p: Parallelism) -> IntMatrix {
    let classes = c.classes();
    let m = classes.len();
    let oracle = engines.oracle();
    let entries: Vec<i64> = par::map_range(p, m * m, |t| {
        let (i, j) = (t / m, t % m);
        oracle.euler_pairing(&classes[i], &classes[j]).expect("oracle runs on V_n")
    });
    let big = entries.into_iter().map(num_bigint::BigInt::from).collect();
    IntMatrix::new(m, m, big).expect("square")
}

/// Counterexamples to "lemma ⇒ forbidden-cone certificate ⇒ no cohomology"
/// over the distinct differences of members.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ChainReport {
    pub differences: usize,
    pub lemma_true: usize,
    pub certified: usize,
    pub counterexamples: Vec<String>,
}

pub fn criterion_chain(c: &Collection, engines: &Engines, p: Parallelism) -> ChainReport {
    let classes = c.classes();
    let mut diffs: BTreeSet<DivisorClass> = BTreeSet::new();
    for a in &classes {
        for b in &classes {
            if a != b {
                diffs.insert(b - a);
            }
        }
    }
    let diffs: Vec<DivisorClass> = diffs.into_iter().collect();
    let (oracle, catalog) = (engines.oracle(), engines.catalog());
    let rows = par::map(p, &diffs, |d| {
        let lemma = d
            .family()
            .and_then(|(c0, k, l)| lemma_acyclic_predicate(c.n, c0, k, l).ok())
            .unwrap_or(false);
        let cert = catalog.certify_acyclic_class(d);
        let zero = oracle.cohomology_of_class(d).expect("oracle runs on V_n").is_zero();
        let mut bad = None;
        if lemma && !cert {
            bad = Some(format!("{d}: lemma holds but a forbidden cone contains it"));
        } else if cert && !zero {
            bad = Some(format!("{d}: certified acyclic but has cohomology"));
        }
        (lemma, cert, bad)
    });
    let mut report = ChainReport {
        differences: diffs.len(),
        ..Default::default()
    };
    for (lemma, cert, bad) in rows {
        report.lemma_true += usize::from(lemma);
        report.certified += usize::from(cert);
        report.counterexamples.extend(bad);
    }
    report
}

/// Fault injection for negative controls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// remove the member at this position (collection order)
    Drop(usize),
    /// insert `F_{c,J}` into block `block`
    Add { c: i64, j: IndexSet, block: usize },
    /// exchange two blocks
    Swap(usize, usize),
}

impl FromStr for Mutation {
    type Err = CollectionError;
    /// `drop:I`, `add` (= `add:0:0:0`, i.e. `O(-E_0)` into the first
    /// block), `add:C:J:B` with `J` comma separated or `-` for empty,
    /// `swap` (= `swap:0:1`) or `swap:A:B`.
    fn from_str(s: &str) -> Result<Self, CollectionError> {
        let err = || CollectionError::Mutation(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| err());
        match parts.as_slice() {
            ["drop", i] => Ok(Mutation::Drop(num(i)?)),
            ["add"] => Ok(Mutation::Add {
                c: 0,
                j: IndexSet::from_indices([0]),
                block: 0,
            }),
            ["add", c, j, b] => {
                let c = c.trim().parse::<i64>().map_err(|_| err())?;
                let idx: Vec<usize> = if j.trim() == "-" {
                    Vec::new()
                } else {
                    j.split(',').map(num).collect::<Result<_, _>>()?
                };
                if idx.iter().any(|&i| i >= 64) {
                    return Err(err());
                }
                Ok(Mutation::Add {
                    c,
                    j: IndexSet::from_indices(idx),
                    block: num(b)?,
                })
            }
            ["swap"] => Ok(Mutation::Swap(0, 1)),
            ["swap", a, b] => Ok(Mutation::Swap(num(a)?, num(b)?)),
            _ => Err(err()),
        }
    }
}

impl Mutation {
    pub fn apply(&self, c: &Collection) -> Result<Collection, CollectionError> {
        let mut out = c.clone();
        match *self {
            Mutation::Drop(i) => {
                let (b, m) = *c.flat().get(i).ok_or(CollectionError::MutationIndex { what: "member", index: i })?;
                out.blocks[b].members.retain(|x| *x != m);
                out.blocks.retain(|blk| !blk.members.is_empty());
            }
            Mutation::Add { c: cc, j, block } => {
                if j.iter().any(|i| i > c.n) {
                    return Err(CollectionError::MutationIndex { what: "index", index: j.iter().max().unwrap_or(0) });
                }
                let blk = out
                    .blocks
                    .get_mut(block)
                    .ok_or(CollectionError::MutationIndex { what: "block", index: block })?;
                blk.members.push(Member { c: cc, j });
            }
            Mutation::Swap(a, b) => {
                for i in [a, b] {
                    if i >= c.blocks.len() {
                        return Err(CollectionError::MutationIndex { what: "block", index: i });
                    }
                }
                out.blocks.swap(a, b);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fn_small_cases() {
        assert_eq!(build_fn(2).unwrap(), vec![(0, 0), (1, 2), (1, 3), (2, 3)]);
        let mut f4 = build_fn(4).unwrap();
        f4.sort();
        let mut want = vec![(-1, 0), (0, 0), (1, 0), (0, 1), (1, 1), (1, 2), (2, 4), (2, 5), (3, 5)];
        want.sort();
        assert_eq!(f4, want);
        let f6 = build_fn(6).unwrap();
        assert_eq!(f6.len(), 16);
        assert!(f6.contains(&(5, 7)) && f6.contains(&(2, 4)) && !f6.contains(&(2, 3)));
        assert!(build_fn(3).is_err());
    }

    #[test]
    fn sizes() {
        for (n, want) in [(2, 6u128), (4, 30), (6, 140), (8, 630)] {
            assert_eq!(expected_size(n), want);
            assert_eq!(build_gn(n).unwrap().len() as u128, want);
        }
        assert_eq!(build_gn(2).unwrap().block_sizes(), vec![2, 3, 1]);
        assert_eq!(build_gn(4).unwrap().block_sizes(), vec![2, 5, 10, 10, 2, 1]);
    }

    #[test]
    fn json_round_trip() {
        let g = build_gn(4).unwrap();
        let s = g.to_json();
        assert!(s.contains("\"J\""));
        assert_eq!(Collection::from_json(&s).unwrap(), g);
        assert!(Collection::from_json(r#"{"n":2,"blocks":[{"ell":1,"members":[{"c":0,"J":[7]}]}]}"#).is_err());
    }

    #[test]
    fn g2_verifies_by_every_method() {
        let g = build_gn(2).unwrap();
        let eng = Engines::new(2).unwrap();
        assert!(verify_structure(&g).is_empty());
        for m in [Method::Inequalities, Method::Forbidden, Method::Oracle] {
            let r = verify_exceptional(&g, &VerifyOptions::new(m), &eng);
            assert_eq!(r.checked_pairs, 30);
            assert!(r.passed(), "{m}: {:?}", r.violations);
        }
        assert!(verify_stability(&g).passed);
    }

    #[test]
    fn pair_indexing_covers_everything() {
        let mut seen = HashSet::new();
        for t in 0..20 {
            let (x, y) = pair_at(t, 5);
            assert_ne!(x, y);
            assert!(seen.insert((x, y)));
        }
    }

    #[test]
    fn gram_on_v2() {
        let g = build_gn(2).unwrap();
        let eng = Engines::new(2).unwrap();
        let m = gram_matrix(&g, &eng, Parallelism::Sequential);
        assert!(m.is_upper_unitriangular());
        // block order puts O(-H) first and O last
        let first = g.classes()[0].clone();
        assert_eq!(first, -DivisorClass::hyperplane(2));
        assert_eq!(m.get(0, 5), &num_bigint::BigInt::from(3));
    }

    #[test]
    fn mutations_are_caught() {
        let g = build_gn(2).unwrap();
        let eng = Engines::new(2).unwrap();
        let oracle = VerifyOptions::new(Method::Oracle);

        let added = "add".parse::<Mutation>().unwrap().apply(&g).unwrap();
        let r = verify_exceptional(&added, &oracle, &eng);
        assert!(!r.violations.is_empty());

        let swapped = "swap".parse::<Mutation>().unwrap().apply(&g).unwrap();
        let r = verify_exceptional(&swapped, &oracle, &eng);
        assert!(!r.violations.is_empty());
        assert!(r.structure.iter().any(|i| matches!(i, StructureIssue::EllIncreases { .. })));

        // O(E-2H) is the antipodal image of O(-H)
        let dropped = "drop:1".parse::<Mutation>().unwrap().apply(&g).unwrap();
        assert_eq!(dropped.len(), 5);
        let s = verify_stability(&dropped);
        assert!(!s.passed);
        assert!(s.failures.iter().any(|f| f.image.contains("E-2H")));
        let r = verify_exceptional(&dropped, &oracle, &eng);
        assert!(r.violations.is_empty());
        assert!(matches!(&r.structure[..], [StructureIssue::WrongSize { missing, .. }] if missing.len() == 1));

        assert!("drop".parse::<Mutation>().is_err());
        assert!("drop:99".parse::<Mutation>().unwrap().apply(&g).is_err());
    }

    #[test]
    fn singleton_is_stable() {
        let c = Collection {
            n: 2,
            blocks: vec![Block {
                ell: 0,
                members: vec![Member::new(0, IndexSet::EMPTY)],
            }],
        };
        assert!(verify_stability(&c).passed);
    }
}
