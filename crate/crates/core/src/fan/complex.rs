use super::{Fan, RaySet};
use crate::exact::smith_sparse;
use num_bigint::BigInt;
use std::collections::HashMap;

/// A simplicial complex on ray indices, stored by its maximal faces. The
/// empty face always belongs to the complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    vertices: RaySet,
    facets: Vec<RaySet>,
}

impl SimplicialComplex {
    /// Closure of `faces` inside `vertices`. Faces not contained in
    /// `vertices` are rejected with `None`.
    pub fn new(vertices: RaySet, faces: &[RaySet]) -> Option<Self> {
        if faces.iter().any(|f| !f.is_subset(vertices)) {
            return None;
        }
        let mut facets: Vec<RaySet> = faces
            .iter()
            .copied()
            .filter(|f| !faces.iter().any(|g| g != f && f.is_subset(*g)))
            .collect();
        facets.sort_by_key(|f| (f.len(), f.bits()));
        facets.dedup();
        if facets.is_empty() {
            facets.push(RaySet::EMPTY);
        }
        Some(SimplicialComplex { vertices, facets })
    }

    pub fn vertices(&self) -> RaySet {
        self.vertices
    }

    pub fn facets(&self) -> &[RaySet] {
        &self.facets
    }

    pub fn contains(&self, s: RaySet) -> bool {
        self.facets.iter().any(|f| s.is_subset(*f))
    }

    /// All faces including the empty one, sorted by size.
    pub fn faces(&self) -> Vec<RaySet> {
        let mut set = std::collections::HashSet::new();
        for f in &self.facets {
            set.extend(f.subsets());
        }
        let mut v: Vec<RaySet> = set.into_iter().collect();
        v.sort_by_key(|f| (f.len(), f.bits()));
        v
    }

    /// Dimension (size of the largest face minus one); `-1` for `{∅}`.
    pub fn dimension(&self) -> isize {
        self.facets.iter().map(|f| f.len() as isize).max().unwrap_or(0) - 1
    }
}

/// The full subcomplex of the fan's nerve on `i`: subsets of `i` that span a
/// cone. For `i = ∅` this is `{∅}`.
pub fn complex_ci(fan: &Fan, i: RaySet) -> SimplicialComplex {
    let faces: Vec<RaySet> = fan.cones().iter().map(|c| c.intersection(i)).collect();
    SimplicialComplex::new(i, &faces).expect("intersections lie in i")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyGroup {
    pub degree: isize,
    pub betti: usize,
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn is_trivial(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }
}

/// Reduced integral homology in degrees `-1..=dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedHomology {
    pub groups: Vec<HomologyGroup>,
}

impl ReducedHomology {
    pub fn is_trivial(&self) -> bool {
        self.groups.iter().all(HomologyGroup::is_trivial)
    }

    /// Rank of `H̃_degree`; zero outside the computed range.
    pub fn betti(&self, degree: isize) -> usize {
        self.groups
            .iter()
            .find(|g| g.degree == degree)
            .map_or(0, |g| g.betti)
    }

    pub fn has_torsion(&self) -> bool {
        self.groups.iter().any(|g| !g.torsion.is_empty())
    }

    /// Degrees with a nonzero group.
    pub fn nonzero_degrees(&self) -> Vec<isize> {
        self.groups
            .iter()
            .filter(|g| !g.is_trivial())
            .map(|g| g.degree)
            .collect()
    }
}

pub fn reduced_homology(c: &SimplicialComplex) -> ReducedHomology {
    homology_of_faces(&c.faces())
}

/// Reduced homology of the complex whose faces (closed under subsets,
/// including ∅) are listed in `faces`.
pub(crate) fn homology_of_faces(faces: &[RaySet]) -> ReducedHomology {
    let top = faces.iter().map(|f| f.len()).max().unwrap_or(0);
    // by_size[k] lists the faces with k vertices, i.e. dimension k-1
    let mut by_size: Vec<Vec<RaySet>> = vec![Vec::new(); top + 2];
    for f in faces {
        by_size[f.len()].push(*f);
    }
    let index: Vec<HashMap<RaySet, usize>> = by_size
        .iter()
        .map(|fs| fs.iter().enumerate().map(|(i, f)| (*f, i)).collect())
        .collect();
    // rank and invariant factors of the boundary from size k to size k-1
    let mut ranks = vec![0usize; top + 2];
    let mut factors: Vec<Vec<BigInt>> = vec![Vec::new(); top + 2];
    for k in 1..=top {
        let rows: Vec<Vec<(usize, i64)>> = by_size[k]
            .iter()
            .map(|f| {
                let mut row: Vec<(usize, i64)> = f
                    .iter()
                    .enumerate()
                    .map(|(pos, v)| {
                        let sign = if pos % 2 == 0 { 1 } else { -1 };
                        (index[k - 1][&f.without(v)], sign)
                    })
                    .collect();
                row.sort_by_key(|e| e.0);
                row
            })
            .collect();
        let s = smith_sparse(rows, by_size[k - 1].len());
        ranks[k] = s.rank;
        factors[k] = s.torsion();
    }
    let groups = (0..=top)
        .map(|k| {
            let chains = by_size[k].len();
            let out_rank = if k == 0 { 0 } else { ranks[k] };
            HomologyGroup {
                degree: k as isize - 1,
                betti: chains - out_rank - ranks[k + 1],
                torsion: factors[k + 1].clone(),
            }
        })
        .collect();
    ReducedHomology { groups }
}

#[cfg(test)]
mod tests {
    use super::super::build_vn;
    use super::*;

    fn rs(v: &[usize]) -> RaySet {
        RaySet::from_indices(v.iter().copied())
    }

    #[test]
    fn empty_complex_has_minus_one_homology() {
        let c = SimplicialComplex::new(RaySet::EMPTY, &[]).unwrap();
        let h = reduced_homology(&c);
        assert_eq!(h.betti(-1), 1);
        assert_eq!(h.nonzero_degrees(), vec![-1]);
        assert_eq!(c.dimension(), -1);
    }

    #[test]
    fn triangle_boundary() {
        let c = SimplicialComplex::new(rs(&[0, 1, 2]), &[rs(&[0, 1]), rs(&[1, 2]), rs(&[0, 2])]).unwrap();
        let h = reduced_homology(&c);
        assert_eq!(h.nonzero_degrees(), vec![1]);
        assert_eq!(h.betti(1), 1);
    }

    #[test]
    fn two_points_and_a_simplex() {
        let c = SimplicialComplex::new(rs(&[0, 1]), &[rs(&[0]), rs(&[1])]).unwrap();
        assert_eq!(reduced_homology(&c).nonzero_degrees(), vec![0]);
        let s = SimplicialComplex::new(rs(&[0, 1, 2, 3]), &[rs(&[0, 1, 2, 3])]).unwrap();
        assert!(reduced_homology(&s).is_trivial());
    }

    #[test]
    fn projective_plane_has_torsion() {
        // minimal 6-vertex triangulation of RP^2
        let tri = [
            [0, 1, 2],
            [0, 2, 3],
            [0, 3, 4],
            [0, 4, 5],
            [0, 5, 1],
            [1, 2, 4],
            [2, 3, 5],
            [3, 4, 1],
            [4, 5, 2],
            [5, 1, 3],
        ];
        let faces: Vec<RaySet> = tri.iter().map(|t| rs(t)).collect();
        let c = SimplicialComplex::new(RaySet::full(6), &faces).unwrap();
        let h = reduced_homology(&c);
        assert_eq!(h.betti(0), 0);
        assert_eq!(h.betti(1), 0);
        assert_eq!(h.betti(2), 0);
        assert_eq!(h.groups[2].torsion, vec![BigInt::from(2)]);
        assert!(h.has_torsion());
    }

    #[test]
    fn nerve_subcomplexes_of_v2() {
        let f = build_vn(2).unwrap();
        // {e_0, ē_0}: two points
        let c = complex_ci(&f, rs(&[0, 3]));
        assert_eq!(reduced_homology(&c).nonzero_degrees(), vec![0]);
        // {e_1, e_2} is not a cone of V_2 either
        let c = complex_ci(&f, rs(&[1, 2]));
        assert_eq!(c.facets().len(), 2);
        // {e_1, ē_0} spans a cone: contractible
        let c = complex_ci(&f, rs(&[1, 3]));
        assert!(reduced_homology(&c).is_trivial());
        // all rays: the hexagon, a circle
        let c = complex_ci(&f, f.all_rays());
        assert_eq!(reduced_homology(&c).nonzero_degrees(), vec![1]);
    }
}
