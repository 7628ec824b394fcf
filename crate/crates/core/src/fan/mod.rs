//! Simplicial fans as combinatorial data, the fans of `P^n` and `V_n`,
//! primitive collections and circuits.

mod complex;
mod rayset;

pub use complex::{complex_ci, reduced_homology, HomologyGroup, ReducedHomology, SimplicialComplex};
pub use rayset::RaySet;

pub(crate) use complex::homology_of_faces;

use crate::exact::{smith_sparse, IntMatrix};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Fans with more rays than this do not get a precomputed face table.
const FACE_TABLE_MAX_RAYS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FanError {
    #[error("V_n needs an even dimension, got {0}")]
    OddDimension(usize),
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("ray {ray} has {got} coordinates, lattice rank is {rank}")]
    RayLength { ray: usize, got: usize, rank: usize },
    #[error("ray {0} is not a primitive nonzero lattice vector")]
    NotPrimitive(usize),
    #[error("cone {cone} refers to ray {ray}, but there are only {count} rays")]
    RayIndex { cone: usize, ray: usize, count: usize },
    #[error("at most 64 rays are supported, got {0}")]
    TooManyRays(usize),
}

/// A fan given by its rays and maximal cones. Cones are sets of ray indices.
#[derive(Clone, Debug)]
pub struct Fan {
    rank: usize,
    rays: Vec<Vec<i64>>,
    cones: Vec<RaySet>,
    faces: Vec<RaySet>,
    face_table: Option<Vec<u64>>,
}

impl PartialEq for Fan {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.rays == other.rays && self.cones == other.cones
    }
}

impl Eq for Fan {}

#[derive(Serialize, Deserialize)]
struct FanJson {
    rank: usize,
    rays: Vec<Vec<i64>>,
    cones: Vec<Vec<usize>>,
}

fn is_primitive(v: &[i64]) -> bool {
    v.iter().fold(0i64, |g, &x| g.gcd(&x)) == 1
}

impl Fan {
    pub fn new(rank: usize, rays: Vec<Vec<i64>>, cones: Vec<RaySet>) -> Result<Fan, FanError> {
        if rays.len() > 64 {
            return Err(FanError::TooManyRays(rays.len()));
        }
        for (i, r) in rays.iter().enumerate() {
            if r.len() != rank {
                return Err(FanError::RayLength {
                    ray: i,
                    got: r.len(),
                    rank,
                });
            }
            if !is_primitive(r) {
                return Err(FanError::NotPrimitive(i));
            }
        }
        for (k, c) in cones.iter().enumerate() {
            if let Some(bad) = c.iter().find(|&i| i >= rays.len()) {
                return Err(FanError::RayIndex {
                    cone: k,
                    ray: bad,
                    count: rays.len(),
                });
            }
        }
        let mut faces: Vec<RaySet> = {
            let mut set = std::collections::HashSet::new();
            for c in &cones {
                for s in c.subsets() {
                    set.insert(s);
                }
            }
            if set.is_empty() {
                set.insert(RaySet::EMPTY);
            }
            set.into_iter().collect()
        };
        faces.sort_by_key(|f| (f.len(), f.bits()));
        let face_table = (rays.len() <= FACE_TABLE_MAX_RAYS).then(|| {
            let mut t = vec![0u64; (1usize << rays.len()).div_ceil(64)];
            for f in &faces {
                let b = f.bits() as usize;
                t[b / 64] |= 1 << (b % 64);
            }
            t
        });
        Ok(Fan {
            rank,
            rays,
            cones,
            faces,
            face_table,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    pub fn all_rays(&self) -> RaySet {
        RaySet::full(self.rays.len())
    }

    pub fn cones(&self) -> &[RaySet] {
        &self.cones
    }

    /// Every cone of the fan (faces of maximal cones), including the zero
    /// cone, sorted by size.
    pub fn faces(&self) -> &[RaySet] {
        &self.faces
    }

    pub fn is_face(&self, s: RaySet) -> bool {
        match &self.face_table {
            Some(t) => {
                let b = s.bits() as usize;
                t[b / 64] >> (b % 64) & 1 == 1
            }
            None => self.cones.iter().any(|c| s.is_subset(*c)),
        }
    }

    fn ray_matrix(&self, s: RaySet) -> IntMatrix {
        let rows: Vec<Vec<i64>> = s.iter().map(|i| self.rays[i].clone()).collect();
        if rows.is_empty() {
            return IntMatrix::zeros(0, self.rank);
        }
        IntMatrix::from_rows(&rows).expect("rays have equal length")
    }

    /// Rank of the span of the rays in `s`.
    pub fn span_rank(&self, s: RaySet) -> usize {
        let rows = s
            .iter()
            .map(|i| {
                self.rays[i]
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0)
                    .map(|(j, v)| (j, *v))
                    .collect()
            })
            .collect();
        smith_sparse(rows, self.rank).rank
    }

    /// Every maximal cone is spanned by part of a lattice basis.
    pub fn is_smooth(&self) -> bool {
        self.cones.iter().all(|&c| {
            let m = self.ray_matrix(c);
            let s = crate::exact::smith_normal_form(&m);
            s.rank == c.len() && s.torsion().is_empty()
        })
    }

    /// Determinant of a full-dimensional cone's ray matrix (rows in index
    /// order), or `None` if the cone does not have `rank` rays.
    pub fn cone_determinant(&self, c: RaySet) -> Option<BigInt> {
        (c.len() == self.rank).then(|| self.ray_matrix(c).determinant().expect("square"))
    }

    /// Completeness of a simplicial fan whose maximal cones are all
    /// full-dimensional: each codimension-one face lies in exactly two maximal
    /// cones, and the two remaining rays sit on opposite sides of its span.
    pub fn is_complete(&self) -> bool {
        if self.cones.is_empty() || self.cones.iter().any(|c| c.len() != self.rank) {
            return false;
        }
        if self.cones.iter().any(|&c| self.cone_determinant(c).is_none_or(|d| d.is_zero())) {
            return false;
        }
        let mut walls: std::collections::HashMap<RaySet, Vec<usize>> = Default::default();
        for c in &self.cones {
            for i in c.iter() {
                walls.entry(c.without(i)).or_default().push(i);
            }
        }
        walls.iter().all(|(&w, apex)| {
            if apex.len() != 2 {
                return false;
            }
            let side = |x: usize| {
                let mut rows: Vec<Vec<i64>> = w.iter().map(|i| self.rays[i].clone()).collect();
                rows.push(self.rays[x].clone());
                IntMatrix::from_rows(&rows)
                    .expect("equal length")
                    .determinant()
                    .expect("square")
                    .signum()
            };
            let (a, b) = (side(apex[0]), side(apex[1]));
            !a.is_zero() && a == -b
        })
    }

    /// Minimal sets of rays not contained in any cone.
    pub fn primitive_collections(&self) -> Vec<RaySet> {
        let mut out = Vec::new();
        for s in RaySet::full(self.rays.len()).subsets() {
            if !self.is_face(s) && s.iter().all(|i| self.is_face(s.without(i))) {
                out.push(s);
            }
        }
        out.sort_by_key(|s| (s.len(), s.bits()));
        out
    }

    /// Minimal linearly dependent sets of rays.
    pub fn circuits(&self) -> Vec<RaySet> {
        let mut out = Vec::new();
        let mut independent: std::collections::HashSet<RaySet> = [RaySet::EMPTY].into_iter().collect();
        for size in 1..=self.rank + 1 {
            let mut next = std::collections::HashSet::new();
            for s in RaySet::full(self.rays.len()).subsets_of_size(size) {
                if !s.iter().all(|i| independent.contains(&s.without(i))) {
                    continue;
                }
                if self.span_rank(s) == size {
                    next.insert(s);
                } else {
                    out.push(s);
                }
            }
            independent = next;
        }
        out.sort_by_key(|s| (s.len(), s.bits()));
        out
    }

    /// The linear relation among the rays of a circuit, as a primitive integer
    /// vector indexed like `circuit.iter()`, last entry positive.
    pub fn circuit_relation(&self, circuit: RaySet) -> Option<Vec<i64>> {
        let k = self.ray_matrix(circuit).transpose().integer_kernel();
        match k.as_slice() {
            [v] => v.iter().map(|x| x.to_i64()).collect(),
            _ => None,
        }
    }

    /// Whether some positive combination of the rays equals `-sum of rays`,
    /// i.e. the rays positively span the lattice.
    pub fn rays_positively_span(&self) -> bool {
        use crate::exact::{feasible, RationalPolyhedron};
        let r = self.rays.len();
        let mut p = RationalPolyhedron::new(r);
        for j in 0..self.rank {
            let coeffs: Vec<i64> = self.rays.iter().map(|u| u[j]).collect();
            p = p.equality(&coeffs, 0);
        }
        for i in 0..r {
            let mut e = vec![0; r];
            e[i] = 1;
            p = p.strict(&e, 0);
        }
        feasible(&p)
    }

    /// Indices of maximal cones whose closed cone contains `v`.
    pub fn cones_containing(&self, v: &[i64]) -> Vec<usize> {
        use crate::exact::{feasible, RationalPolyhedron};
        self.cones
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                let k = c.len();
                let mut p = RationalPolyhedron::new(k);
                for j in 0..self.rank {
                    let coeffs: Vec<i64> = c.iter().map(|i| self.rays[i][j]).collect();
                    p = p.equality(&coeffs, v[j]);
                }
                for t in 0..k {
                    let mut e = vec![0; k];
                    e[t] = 1;
                    p = p.weak(&e, 0);
                }
                feasible(&p)
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(FanJson {
            rank: self.rank,
            rays: self.rays.clone(),
            cones: self.cones.iter().map(|c| c.to_vec()).collect(),
        })
        .expect("plain data serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Fan, Box<dyn std::error::Error + Send + Sync>> {
        let j: FanJson = serde_json::from_value(v.clone())?;
        let cones = j.cones.iter().map(|c| RaySet::from_indices(c.iter().copied())).collect();
        Ok(Fan::new(j.rank, j.rays, cones)?)
    }
}

/// `c(n) = (n+1)! / ((n/2)!)^2`, the number of maximal cones of `V_n`.
pub fn vn_cone_count(n: usize) -> u128 {
    let f = |k: usize| (1..=k as u128).product::<u128>();
    f(n + 1) / (f(n / 2) * f(n / 2))
}

/// Ray index of `e_i` in `V_n`.
pub fn e(i: usize) -> usize {
    i
}

/// Ray index of `ē_i` in `V_n`.
pub fn ebar(n: usize, i: usize) -> usize {
    n + 1 + i
}

/// The fan of `V_n`: rays `e_0..e_n, ē_0..ē_n` with `e_0 = -(1,...,1)`,
/// `e_i` the unit vectors and `ē_i = -e_i`. Maximal cones are
/// `{e_i : i in A} ∪ {ē_i : i in B}` for disjoint `A, B` of size `n/2`.
pub fn build_vn(n: usize) -> Result<Fan, FanError> {
    if n == 0 {
        return Err(FanError::ZeroDimension);
    }
    if n % 2 == 1 {
        return Err(FanError::OddDimension(n));
    }
    let mut rays = Vec::with_capacity(2 * n + 2);
    rays.push(vec![-1; n]);
    for i in 0..n {
        let mut v = vec![0; n];
        v[i] = 1;
        rays.push(v);
    }
    for i in 0..=n {
        let neg: Vec<i64> = rays[i].iter().map(|x| -x).collect();
        rays.push(neg);
    }
    let half = n / 2;
    let mut cones = Vec::new();
    for a in RaySet::full(n + 1).subsets_of_size(half) {
        for b in RaySet::full(n + 1).subsets_of_size(half) {
            if a.intersection(b).is_empty() {
                cones.push(a.union(RaySet(b.bits() << (n + 1))));
            }
        }
    }
    cones.sort_by_key(|c| c.bits());
    Fan::new(n, rays, cones)
}

/// The fan of `P^n`: rays `e_1..e_n, -(e_1+...+e_n)`, maximal cones all
/// `n`-subsets.
pub fn build_pn(n: usize) -> Result<Fan, FanError> {
    if n == 0 {
        return Err(FanError::ZeroDimension);
    }
    let mut rays: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut v = vec![0; n];
            v[i] = 1;
            v
        })
        .collect();
    rays.push(vec![-1; n]);
    let cones = RaySet::full(n + 1).subsets_of_size(n).collect();
    Fan::new(n, rays, cones)
}
