//! Output hierarchies: finite intersection-closed families of class sets.
//!
//! A family that contains the universe and is closed under pairwise
//! intersection induces an upper closure operator on sets of classes:
//! a set maps to the least family member covering it.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classes::ClassSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub name: String,
    pub members: ClassSet,
}

impl Level {
    pub fn new(name: impl Into<String>, members: impl Into<ClassSet>) -> Self {
        Level {
            name: name.into(),
            members: members.into(),
        }
    }
}

/// Index of a level inside a [`Hierarchy`]. The universe is always `LevelId(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MissingTop,
    OutOfUniverse {
        level: String,
        class: usize,
    },
    NotClosed {
        left: String,
        right: String,
        missing: ClassSet,
    },
    DuplicateName(String),
    DuplicateLevel {
        first: String,
        second: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingTop => write!(f, "the universe of all classes is not a level"),
            Violation::OutOfUniverse { level, class } => {
                write!(
                    f,
                    "level `{level}` contains class {class} outside the universe"
                )
            }
            Violation::NotClosed {
                left,
                right,
                missing,
            } => write!(
                f,
                "levels `{left}` and `{right}` intersect in {missing}, which is not a level"
            ),
            Violation::DuplicateName(name) => write!(f, "level name `{name}` is used twice"),
            Violation::DuplicateLevel { first, second } => {
                write!(f, "levels `{first}` and `{second}` have the same members")
            }
        }
    }
}

pub const TOP_NAME: &str = "top";

/// Checks a raw family against the closure-operator laws without adding
/// anything to it.
pub fn validate(num_classes: usize, levels: &[Level]) -> Vec<Violation> {
    let universe = ClassSet::universe(num_classes);
    let mut violations = Vec::new();
    if !levels.iter().any(|l| l.members == universe) {
        violations.push(Violation::MissingTop);
    }
    let mut names = BTreeSet::new();
    for l in levels {
        if !names.insert(l.name.as_str()) {
            violations.push(Violation::DuplicateName(l.name.clone()));
        }
        if let Some(class) = l.members.iter().find(|&c| c == 0 || c > num_classes) {
            violations.push(Violation::OutOfUniverse {
                level: l.name.clone(),
                class,
            });
        }
    }
    for (i, a) in levels.iter().enumerate() {
        for b in &levels[i + 1..] {
            if a.members == b.members {
                violations.push(Violation::DuplicateLevel {
                    first: a.name.clone(),
                    second: b.name.clone(),
                });
                continue;
            }
            let meet = a.members.intersection(&b.members);
            if !levels.iter().any(|l| l.members == meet) {
                violations.push(Violation::NotClosed {
                    left: a.name.clone(),
                    right: b.name.clone(),
                    missing: meet,
                });
            }
        }
    }
    violations
}

/// Adds the universe and every missing intersection, naming new levels
/// after their members. Never removes or renames existing levels.
pub fn repair(num_classes: usize, levels: &[Level]) -> Vec<Level> {
    let mut out = levels.to_vec();
    let universe = ClassSet::universe(num_classes);
    if !out.iter().any(|l| l.members == universe) {
        out.insert(0, Level::new(TOP_NAME, universe));
    }
    loop {
        let mut added = false;
        let n = out.len();
        for i in 0..n {
            for j in i + 1..n {
                let meet = out[i].members.intersection(&out[j].members);
                if !out.iter().any(|l| l.members == meet) {
                    out.push(Level::new(meet.to_string(), meet));
                    added = true;
                }
            }
        }
        if !added {
            return out;
        }
    }
}

/// A validated output hierarchy over classes `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    labels: Vec<String>,
    levels: Vec<Level>,
    safe: Option<LevelId>,
}

impl Hierarchy {
    /// Builds a hierarchy from the given levels, adding the universe (named
    /// `top`) when absent. Any other closure violation is an error.
    pub fn new(num_classes: usize, mut levels: Vec<Level>) -> Result<Self> {
        let universe = ClassSet::universe(num_classes);
        match levels.iter().position(|l| l.members == universe) {
            Some(0) => {}
            Some(k) => {
                let top = levels.remove(k);
                levels.insert(0, top);
            }
            None => levels.insert(0, Level::new(TOP_NAME, universe)),
        }
        let violations = validate(num_classes, &levels);
        if !violations.is_empty() {
            return Err(Error::InvalidHierarchy(violations));
        }
        Ok(Hierarchy {
            labels: (1..=num_classes).map(|i| format!("c{i}")).collect(),
            levels,
            safe: None,
        })
    }

    /// The two-level hierarchy `{universe, safe}` with `safe` designated as
    /// the concrete safe set.
    pub fn from_safe_set(num_classes: usize, safe: ClassSet) -> Result<Self> {
        if safe == ClassSet::universe(num_classes) {
            return Err(Error::TrivialSafeSet);
        }
        let mut h = Hierarchy::new(num_classes, vec![Level::new("safe", safe)])?;
        h.safe = Some(LevelId(1));
        Ok(h)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.num_classes() {
            return Err(Error::DimensionMismatch {
                what: "class labels",
                expected: self.num_classes(),
                found: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    /// Designates the named level as the concrete safe set.
    pub fn with_safe_level(mut self, name: &str) -> Result<Self> {
        let id = self
            .find(name)
            .ok_or_else(|| Error::UnknownLevel(name.to_string()))?;
        if id == self.universe() {
            return Err(Error::TrivialSafeSet);
        }
        self.safe = Some(id);
        Ok(self)
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, id: LevelId) -> &Level {
        &self.levels[id.0]
    }

    pub fn universe(&self) -> LevelId {
        LevelId(0)
    }

    pub fn is_universe(&self, id: LevelId) -> bool {
        id.0 == 0
    }

    pub fn safe_level(&self) -> Option<LevelId> {
        self.safe
    }

    pub fn find(&self, name: &str) -> Option<LevelId> {
        self.levels.iter().position(|l| l.name == name).map(LevelId)
    }

    /// True when `id` lies inside the designated safe set.
    pub fn is_within_safe(&self, id: LevelId) -> bool {
        self.safe
            .is_some_and(|s| self.level(id).members.is_subset(&self.level(s).members))
    }

    /// Least level covering `s`. In an intersection-closed family this is
    /// the unique smallest member containing `s`.
    pub fn closure_apply(&self, s: &ClassSet) -> LevelId {
        self.levels
            .iter()
            .enumerate()
            .filter(|(_, l)| s.is_subset(&l.members))
            .min_by_key(|(_, l)| l.members.len())
            .map(|(i, _)| LevelId(i))
            .unwrap_or(LevelId(0))
    }

    /// Whether the closure of `s` stays strictly below the universe, with the
    /// covering level for attribution.
    pub fn is_abstract_safe(&self, s: &ClassSet) -> (bool, LevelId) {
        let id = self.closure_apply(s);
        (!self.is_universe(id), id)
    }

    /// True when no nonempty level lies strictly below `id`, i.e. no further
    /// refinement can produce a tighter attribution.
    pub fn is_minimal(&self, id: LevelId) -> bool {
        let members = &self.level(id).members;
        !self
            .levels
            .iter()
            .any(|l| !l.members.is_empty() && l.members.is_proper_subset(members))
    }

    /// Renders a class set with this hierarchy's labels.
    pub fn describe(&self, s: &ClassSet) -> String {
        let names: Vec<&str> = s
            .iter()
            .map(|i| self.labels.get(i - 1).map_or("?", String::as_str))
            .collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn label_of(&self, class: usize) -> &str {
        &self.labels[class - 1]
    }

    pub fn from_document(doc: &HierarchyDocument) -> Result<Self> {
        let n = doc.classes.len();
        let levels = doc
            .levels
            .iter()
            .map(|l| {
                let members = l
                    .members
                    .iter()
                    .map(|label| {
                        doc.classes
                            .iter()
                            .position(|c| c == label)
                            .map(|p| p + 1)
                            .ok_or_else(|| Error::UnknownClass(label.clone()))
                    })
                    .collect::<Result<ClassSet>>()?;
                Ok(Level::new(l.name.clone(), members))
            })
            .collect::<Result<Vec<_>>>()?;
        Hierarchy::new(n, levels)?.with_labels(doc.classes.clone())
    }

    pub fn to_document(&self) -> HierarchyDocument {
        HierarchyDocument {
            classes: self.labels.clone(),
            levels: self
                .levels
                .iter()
                .skip(1)
                .map(|l| LevelDocument {
                    name: l.name.clone(),
                    members: l
                        .members
                        .iter()
                        .map(|i| self.labels[i - 1].clone())
                        .collect(),
                })
                .collect(),
        }
    }
}

/// On-disk hierarchy description. The universe is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyDocument {
    pub classes: Vec<String>,
    pub levels: Vec<LevelDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelDocument {
    pub name: String,
    pub members: Vec<String>,
}
