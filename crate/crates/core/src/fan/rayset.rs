use serde::{Deserialize, Serialize};
use std::fmt;

/// A set of ray indices (at most 64 rays), stored as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RaySet(pub u64);

impl RaySet {
    pub const EMPTY: RaySet = RaySet(0);

    /// `{0, ..., count-1}`.
    pub fn full(count: usize) -> RaySet {
        assert!(count <= 64);
        if count == 64 {
            RaySet(u64::MAX)
        } else {
            RaySet((1u64 << count) - 1)
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> RaySet {
        RaySet(it.into_iter().fold(0, |m, i| m | 1 << i))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> RaySet {
        RaySet(self.0 | 1 << i)
    }

    pub fn without(self, i: usize) -> RaySet {
        RaySet(self.0 & !(1 << i))
    }

    pub fn union(self, o: RaySet) -> RaySet {
        RaySet(self.0 | o.0)
    }

    pub fn intersection(self, o: RaySet) -> RaySet {
        RaySet(self.0 & o.0)
    }

    pub fn difference(self, o: RaySet) -> RaySet {
        RaySet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: RaySet) -> bool {
        self.0 & !o.0 == 0
    }

    /// Indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            (m != 0).then(|| {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                i
            })
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = RaySet> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full { None } else { Some((cur.wrapping_sub(full)) & full) };
            Some(RaySet(cur))
        })
    }

    pub fn subsets_of_size(self, k: usize) -> impl Iterator<Item = RaySet> {
        self.subsets().filter(move |s| s.len() == k)
    }
}

impl fmt::Display for RaySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromIterator<usize> for RaySet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        RaySet::from_indices(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerated_once() {
        let s = RaySet::from_indices([1, 4, 6]);
        let all: Vec<RaySet> = s.subsets().collect();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|t| t.is_subset(s)));
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 8);
        assert_eq!(RaySet::EMPTY.subsets().count(), 1);
        assert_eq!(RaySet::full(5).subsets_of_size(2).count(), 10);
    }

    #[test]
    fn iteration_and_display() {
        let s = RaySet::from_indices([5, 0, 3]);
        assert_eq!(s.to_vec(), vec![0, 3, 5]);
        assert_eq!(s.to_string(), "{0,3,5}");
        assert_eq!(s.without(3).with(1).to_vec(), vec![0, 1, 5]);
    }
}
