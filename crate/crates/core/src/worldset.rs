//! Fixed-universe bitsets over world indices.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A set of worlds drawn from a universe `0..universe`.
///
/// Sets over different universes never compare equal; mixing them in
/// binary operations is a logic error and panics.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WorldSet {
    universe: usize,
    words: Vec<u64>,
}

impl WorldSet {
    pub fn empty(universe: usize) -> Self {
        WorldSet {
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut set = Self::empty(universe);
        for w in 0..universe {
            set.insert(w);
        }
        set
    }

    pub fn singleton(universe: usize, world: usize) -> Self {
        let mut set = Self::empty(universe);
        set.insert(world);
        set
    }

    pub fn from_worlds<I: IntoIterator<Item = usize>>(universe: usize, worlds: I) -> Self {
        let mut set = Self::empty(universe);
        for w in worlds {
            set.insert(w);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn insert(&mut self, world: usize) {
        assert!(world < self.universe, "world {world} outside universe {}", self.universe);
        self.words[world / 64] |= 1 << (world % 64);
    }

    pub fn remove(&mut self, world: usize) {
        if world < self.universe {
            self.words[world / 64] &= !(1 << (world % 64));
        }
    }

    pub fn contains(&self, world: usize) -> bool {
        world < self.universe && self.words[world / 64] & (1 << (world % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(move |&w| self.contains(w))
    }

    fn check_universe(&self, other: &WorldSet) {
        assert_eq!(
            self.universe, other.universe,
            "world sets over different universes"
        );
    }

    pub fn union(&self, other: &WorldSet) -> WorldSet {
        self.check_universe(other);
        WorldSet {
            universe: self.universe,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn intersection(&self, other: &WorldSet) -> WorldSet {
        self.check_universe(other);
        WorldSet {
            universe: self.universe,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn difference(&self, other: &WorldSet) -> WorldSet {
        self.check_universe(other);
        WorldSet {
            universe: self.universe,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    pub fn complement(&self) -> WorldSet {
        WorldSet::full(self.universe).difference(self)
    }

    pub fn union_with(&mut self, other: &WorldSet) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &WorldSet) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn is_subset(&self, other: &WorldSet) -> bool {
        self.check_universe(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &WorldSet) -> bool {
        self.check_universe(other);
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }
}

impl fmt::Debug for WorldSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = WorldSet::from_worlds(70, [0, 3, 65]);
        let b = WorldSet::from_worlds(70, [3, 69]);
        assert_eq!(a.union(&b).iter().collect::<Vec<_>>(), vec![0, 3, 65, 69]);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![3]);
        assert_eq!(a.difference(&b).len(), 2);
        assert_eq!(a.complement().len(), 67);
        assert!(WorldSet::from_worlds(70, [3]).is_subset(&a));
        assert!(!a.is_subset(&b));
        assert!(WorldSet::empty(70).is_empty());
        assert!(!a.contains(70));
    }

    #[test]
    #[should_panic]
    fn mixed_universes_panic() {
        let _ = WorldSet::empty(3).union(&WorldSet::empty(4));
    }
}
