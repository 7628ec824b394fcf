//! Divisor classes on `V_n` in the basis `(H, E_0, ..., E_n)`, the action of
//! `S_{n+1} x C_2`, and the families `F_{c,J}` and `F(c,k,l)`.

use crate::exact::IntMatrix;
use crate::fan::RaySet;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Subsets of `{0..n}`, reusing the ray bitmask type.
pub type IndexSet = RaySet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PicardError {
    #[error("class has {got} coordinates, expected n+2 = {expected}")]
    Length { got: usize, expected: usize },
    #[error("index {index} is outside 0..={n}")]
    Index { index: usize, n: usize },
    #[error("F(c,k,l) needs k+l <= n+1, got k={k}, l={l}, n={n}")]
    InvalidShape { k: usize, l: usize, n: usize },
    #[error("{0} is not of the form F_(c,J)")]
    NotInFamily(DivisorClass),
    #[error("classes live on different V_n ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("not a permutation of 0..={0}")]
    BadPermutation(usize),
    #[error("cannot parse {0:?} as a divisor class")]
    Parse(String),
}

/// `coeffs[0]*H + sum coeffs[1+i]*E_i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorClass {
    n: usize,
    coeffs: Vec<i64>,
}

impl DivisorClass {
    pub fn new(n: usize, coeffs: Vec<i64>) -> Result<Self, PicardError> {
        if coeffs.len() != n + 2 {
            return Err(PicardError::Length {
                got: coeffs.len(),
                expected: n + 2,
            });
        }
        Ok(DivisorClass { n, coeffs })
    }

    pub fn zero(n: usize) -> Self {
        DivisorClass {
            n,
            coeffs: vec![0; n + 2],
        }
    }

    pub fn hyperplane(n: usize) -> Self {
        let mut d = Self::zero(n);
        d.coeffs[0] = 1;
        d
    }

    pub fn exceptional(n: usize, i: usize) -> Self {
        let mut d = Self::zero(n);
        d.coeffs[1 + i] = 1;
        d
    }

    /// `E = E_0 + ... + E_n`.
    pub fn e_sum(n: usize) -> Self {
        let mut d = Self::zero(n);
        for c in &mut d.coeffs[1..] {
            *c = 1;
        }
        d
    }

    /// `K = -(n+1)H + (n-1)E`.
    pub fn canonical(n: usize) -> Self {
        let mut d = Self::zero(n);
        d.coeffs[0] = -(n as i64 + 1);
        for c in &mut d.coeffs[1..] {
            *c = n as i64 - 1;
        }
        d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn h(&self) -> i64 {
        self.coeffs[0]
    }

    pub fn e(&self, i: usize) -> i64 {
        self.coeffs[1 + i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Coordinates in the basis `(Ω, E_0, ..., E_n)` with `Ω = E - H`:
    /// returns `(b♮, [b_0..b_n])`.
    pub fn omega_coords(&self) -> (i64, Vec<i64>) {
        let h = self.h();
        (-h, (0..=self.n).map(|i| self.e(i) + h).collect())
    }

    pub fn from_omega_coords(b_natural: i64, b: &[i64]) -> Self {
        let n = b.len() - 1;
        let mut coeffs = Vec::with_capacity(n + 2);
        coeffs.push(-b_natural);
        coeffs.extend(b.iter().map(|&x| x + b_natural));
        DivisorClass { n, coeffs }
    }

    /// `(c, J)` with `self = F_{c,J}`, if the class has that form.
    pub fn decode(&self) -> Option<(i64, IndexSet)> {
        let c = -self.h();
        let mut j = IndexSet::EMPTY;
        for i in 0..=self.n {
            match self.e(i) - c {
                0 => {}
                -1 => j = j.with(i),
                _ => return None,
            }
        }
        Some((c, j))
    }

    /// `(c, k, l)` with `self` in `F(c,k,l)`.
    pub fn family(&self) -> Option<(i64, usize, usize)> {
        let c = -self.h();
        let (mut k, mut l) = (0, 0);
        for i in 0..=self.n {
            match self.e(i) - c {
                0 => {}
                1 => k += 1,
                -1 => l += 1,
                _ => return None,
            }
        }
        Some((c, k, l))
    }

    /// A torus-invariant representative `sum a_ρ D_ρ` in the ray order
    /// `e_0..e_n, ē_0..ē_n`: `a_{ē_0} = h`, `a_{e_0} = e_0`,
    /// `a_{e_j} = e_j + h` for `j >= 1`, other coefficients zero.
    pub fn lift_to_rays(&self) -> Vec<i64> {
        let n = self.n;
        let h = self.h();
        let mut a = vec![0; 2 * n + 2];
        a[0] = self.e(0);
        for j in 1..=n {
            a[j] = self.e(j) + h;
        }
        a[n + 1] = h;
        a
    }

    /// Class of `sum a_ρ D_ρ`.
    pub fn from_ray_coeffs(n: usize, a: &[i64]) -> Result<Self, PicardError> {
        if a.len() != 2 * n + 2 {
            return Err(PicardError::Length {
                got: a.len(),
                expected: 2 * n + 2,
            });
        }
        let mut d = Self::zero(n);
        for (r, &x) in a.iter().enumerate() {
            d = d + class_of_ray(n, r)? * x;
        }
        Ok(d)
    }

    fn check_same(&self, o: &Self) {
        assert_eq!(self.n, o.n, "divisor classes on different V_n");
    }
}

impl fmt::Debug for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs)
    }
}

impl DivisorClass {
    /// Parses expressions like `E-2H+E_1`, `2E-3H`, `-E_0` or `O` / `0` for
    /// the trivial class. Whitespace is ignored, and `E_i` labels are
    /// shifted down by `base` (use 1 for 1-based labels).
    pub fn parse(n: usize, s: &str, base: usize) -> Result<Self, PicardError> {
        let err = || PicardError::Parse(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut d = DivisorClass::zero(n);
        if t == "O" || t == "0" {
            return Ok(d);
        }
        let b = t.as_bytes();
        let mut pos = 0;
        while pos < b.len() {
            let mut sign = 1;
            if b[pos] == b'+' || b[pos] == b'-' {
                if b[pos] == b'-' {
                    sign = -1;
                }
                pos += 1;
            } else if pos > 0 {
                return Err(err());
            }
            let start = pos;
            while pos < b.len() && b[pos].is_ascii_digit() {
                pos += 1;
            }
            let coef: i64 = if start == pos { 1 } else { t[start..pos].parse().map_err(|_| err())? };
            let term = match b.get(pos) {
                Some(b'H') => {
                    pos += 1;
                    DivisorClass::hyperplane(n)
                }
                Some(b'E') if b.get(pos + 1) == Some(&b'_') => {
                    pos += 2;
                    let st = pos;
                    while pos < b.len() && b[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    let i: usize = t[st..pos].parse().map_err(|_| err())?;
                    let i = i.checked_sub(base).filter(|&i| i <= n).ok_or_else(err)?;
                    DivisorClass::exceptional(n, i)
                }
                Some(b'E') => {
                    pos += 1;
                    DivisorClass::e_sum(n)
                }
                _ => return Err(err()),
            };
            d = d + term * (sign * coef);
        }
        Ok(d)
    }
}

impl fmt::Display for DivisorClass {
    /// Readable form such as `E-2H` or `-H+E_0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<(i64, String)> = Vec::new();
        // factor out a multiple of E when it leaves fewer terms
        let counts = |m: i64| self.coeffs[1..].iter().filter(|&&c| c != m).count() + usize::from(m != 0);
        let m = self.coeffs[1..]
            .iter()
            .copied()
            .chain([0])
            .min_by_key(|&m| (counts(m), m == 0, m.unsigned_abs()))
            .unwrap_or(0);
        if m != 0 {
            terms.push((m, "E".into()));
        }
        if self.h() != 0 {
            terms.push((self.h(), "H".into()));
        }
        for i in 0..=self.n {
            let c = self.e(i) - m;
            if c != 0 {
                terms.push((c, format!("E_{i}")));
            }
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (c, name)) in terms.iter().enumerate() {
            let sign = if *c < 0 {
                "-"
            } else if k > 0 {
                "+"
            } else {
                ""
            };
            let mag = c.unsigned_abs();
            if mag == 1 {
                write!(f, "{sign}{name}")?;
            } else {
                write!(f, "{sign}{mag}{name}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for DivisorClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DivisorClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let coeffs = Vec::<i64>::deserialize(d)?;
        if coeffs.len() < 3 {
            return Err(serde::de::Error::custom("a divisor class needs at least 3 coordinates"));
        }
        Ok(DivisorClass {
            n: coeffs.len() - 2,
            coeffs,
        })
    }
}

impl Add for DivisorClass {
    type Output = DivisorClass;
    fn add(self, o: DivisorClass) -> DivisorClass {
        &self + &o
    }
}

impl Add for &DivisorClass {
    type Output = DivisorClass;
    fn add(self, o: &DivisorClass) -> DivisorClass {
        self.check_same(o);
        DivisorClass {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for DivisorClass {
    type Output = DivisorClass;
    fn sub(self, o: DivisorClass) -> DivisorClass {
        &self - &o
    }
}

impl Sub for &DivisorClass {
    type Output = DivisorClass;
    fn sub(self, o: &DivisorClass) -> DivisorClass {
        self.check_same(o);
        DivisorClass {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        DivisorClass {
            n: self.n,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul<i64> for DivisorClass {
    type Output = DivisorClass;
    fn mul(self, k: i64) -> DivisorClass {
        DivisorClass {
            n: self.n,
            coeffs: self.coeffs.iter().map(|a| a * k).collect(),
        }
    }
}

/// Class of the ray divisor: `[e_i] = E_i`, `[ē_i] = H - E + E_i`.
pub fn class_of_ray(n: usize, ray: usize) -> Result<DivisorClass, PicardError> {
    if ray > 2 * n + 1 {
        return Err(PicardError::Index { index: ray, n: 2 * n + 1 });
    }
    if ray <= n {
        return Ok(DivisorClass::exceptional(n, ray));
    }
    let i = ray - n - 1;
    Ok(DivisorClass::hyperplane(n) - DivisorClass::e_sum(n) + DivisorClass::exceptional(n, i))
}

/// `F_{c,J} = c(E - H) - sum_{j in J} E_j`.
pub fn make_f(n: usize, c: i64, j: IndexSet) -> Result<DivisorClass, PicardError> {
    if let Some(bad) = j.iter().find(|&i| i > n) {
        return Err(PicardError::Index { index: bad, n });
    }
    let mut coeffs = Vec::with_capacity(n + 2);
    coeffs.push(-c);
    coeffs.extend((0..=n).map(|i| c - i64::from(j.contains(i))));
    Ok(DivisorClass { n, coeffs })
}

/// The antipodal involution in the basis `(H, E_0..E_n)`, acting on column
/// vectors: `H -> nH - (n-1)E`, `E_j -> H - E + E_j`.
pub fn antipodal_matrix(n: usize) -> IntMatrix {
    let size = n + 2;
    let mut rows = vec![vec![0i64; size]; size];
    rows[0][0] = n as i64;
    for i in 1..size {
        rows[i][0] = 1 - n as i64;
        rows[0][i] = 1;
        for (j, v) in rows[i].iter_mut().enumerate().skip(1) {
            *v = if i == j { 0 } else { -1 };
        }
    }
    IntMatrix::from_rows(&rows).expect("square")
}

/// Element `(σ, a)` of `S_{n+1} x C_2`, acting by `D -> σ(ι^a(D))` where `ι`
/// is the antipodal involution and `σ` sends `E_i` to `E_{σ(i)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    perm: Vec<usize>,
    antipodal: bool,
}

impl GroupElement {
    pub fn new(perm: Vec<usize>, antipodal: bool) -> Result<Self, PicardError> {
        let n = perm.len().saturating_sub(1);
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || seen[p] {
                return Err(PicardError::BadPermutation(n));
            }
            seen[p] = true;
        }
        Ok(GroupElement { perm, antipodal })
    }

    pub fn identity(n: usize) -> Self {
        GroupElement {
            perm: (0..=n).collect(),
            antipodal: false,
        }
    }

    pub fn antipodal(n: usize) -> Self {
        GroupElement {
            antipodal: true,
            ..Self::identity(n)
        }
    }

    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut g = Self::identity(n);
        g.perm.swap(i, j);
        g
    }

    /// Adjacent transpositions `(i i+1)` and the antipodal involution.
    pub fn generators(n: usize) -> Vec<GroupElement> {
        let mut g: Vec<GroupElement> = (0..n).map(|i| Self::transposition(n, i, i + 1)).collect();
        g.push(Self::antipodal(n));
        g
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn is_antipodal(&self) -> bool {
        self.antipodal
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            perm: other.perm.iter().map(|&i| self.perm[i]).collect(),
            antipodal: self.antipodal ^ other.antipodal,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        GroupElement {
            perm: inv,
            antipodal: self.antipodal,
        }
    }

    /// Image of an index set under the permutation part.
    pub fn permute_set(&self, j: IndexSet) -> IndexSet {
        j.iter().map(|i| self.perm[i]).collect()
    }
}

fn apply_antipodal(d: &DivisorClass) -> DivisorClass {
    let n = d.n as i64;
    let h = d.h();
    let es: i64 = d.coeffs[1..].iter().sum();
    let mut coeffs = Vec::with_capacity(d.coeffs.len());
    // h*(nH - (n-1)E) + sum e_j (H - E + E_j)
    coeffs.push(n * h + es);
    coeffs.extend(d.coeffs[1..].iter().map(|&ej| -(n - 1) * h - es + ej));
    DivisorClass { n: d.n, coeffs }
}

pub fn act(g: &GroupElement, d: &DivisorClass) -> Result<DivisorClass, PicardError> {
    if g.perm.len() != d.n + 1 {
        return Err(PicardError::DimensionMismatch(g.perm.len().saturating_sub(1), d.n));
    }
    let base = if g.antipodal { apply_antipodal(d) } else { d.clone() };
    let mut coeffs = base.coeffs.clone();
    for (i, &p) in g.perm.iter().enumerate() {
        coeffs[1 + p] = base.coeffs[1 + i];
    }
    Ok(DivisorClass { n: d.n, coeffs })
}

/// Members of `F(c,k,l)`: `c(E - H) + sum_{K} E_i - sum_{L} E_i` over disjoint
/// `K, L` with `|K| = k`, `|L| = l`, sorted.
pub fn orbit_fckl(n: usize, c: i64, k: usize, l: usize) -> Result<Vec<DivisorClass>, PicardError> {
    if k + l > n + 1 {
        return Err(PicardError::InvalidShape { k, l, n });
    }
    let all = IndexSet::full(n + 1);
    let mut out = Vec::new();
    for kset in all.subsets_of_size(k) {
        for lset in all.difference(kset).subsets_of_size(l) {
            let mut coeffs = vec![-c];
            coeffs.extend((0..=n).map(|i| c + i64::from(kset.contains(i)) - i64::from(lset.contains(i))));
            out.push(DivisorClass { n, coeffs });
        }
    }
    out.sort();
    Ok(out)
}

/// `L_1 - L_2` for `L_i = F_{c_i, J_i}` lies in `F(c_1-c_2, l_2-i, l_1-i)`
/// with `i = |J_1 ∩ J_2|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Difference {
    pub i: usize,
    pub c: i64,
    pub k: usize,
    pub l: usize,
}

pub fn difference_family(l1: &DivisorClass, l2: &DivisorClass) -> Result<Difference, PicardError> {
    if l1.n != l2.n {
        return Err(PicardError::DimensionMismatch(l1.n, l2.n));
    }
    let (c1, j1) = l1.decode().ok_or_else(|| PicardError::NotInFamily(l1.clone()))?;
    let (c2, j2) = l2.decode().ok_or_else(|| PicardError::NotInFamily(l2.clone()))?;
    let (a, b) = (j1.len(), j2.len());
    let i = j1.intersection(j2).len();
    debug_assert!(i <= a && i <= b && i + l1.n + 1 >= a + b);
    let d = Difference {
        i,
        c: c1 - c2,
        k: b - i,
        l: a - i,
    };
    debug_assert_eq!((l1 - l2).family(), Some((d.c, d.k, d.l)));
    Ok(d)
}
