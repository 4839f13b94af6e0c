//! Sets of 1-based output class indices.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassSet(BTreeSet<usize>);

impl ClassSet {
    pub fn new() -> Self {
        ClassSet(BTreeSet::new())
    }

    /// `{1, ..., n}`.
    pub fn universe(n: usize) -> Self {
        ClassSet((1..=n).collect())
    }

    pub fn singleton(i: usize) -> Self {
        ClassSet(BTreeSet::from([i]))
    }

    pub fn insert(&mut self, i: usize) -> bool {
        self.0.insert(i)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &ClassSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_proper_subset(&self, other: &ClassSet) -> bool {
        self.len() < other.len() && self.is_subset(other)
    }

    pub fn intersection(&self, other: &ClassSet) -> ClassSet {
        ClassSet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn union(&self, other: &ClassSet) -> ClassSet {
        ClassSet(self.0.union(&other.0).copied().collect())
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

impl FromIterator<usize> for ClassSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        ClassSet(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[usize; N]> for ClassSet {
    fn from(v: [usize; N]) -> Self {
        v.into_iter().collect()
    }
}

/// Renders as `{c1,c2,c5}`.
impl fmt::Display for ClassSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "c{i}")?;
        }
        write!(f, "}}")
    }
}
