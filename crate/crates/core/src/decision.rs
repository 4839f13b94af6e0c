//! The abstract decision function: which output classes can still be the
//! maximum given a tuple of output intervals.

use serde::Serialize;

use crate::classes::ClassSet;
use crate::interval::Interval;
use crate::network::ClassOutcome;
use crate::propagation::ReachableTuple;

/// Potentially maximal outcomes. Members are identified by class index; the
/// interval is carried for reporting.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct OutcomeSet {
    members: Vec<ClassOutcome>,
}

impl OutcomeSet {
    pub fn members(&self) -> &[ClassOutcome] {
        &self.members
    }

    pub fn indices(&self) -> ClassSet {
        self.members.iter().map(|c| c.index).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn from_outcome(c: ClassOutcome) -> Self {
        OutcomeSet { members: vec![c] }
    }
}

/// Drops every class `i` for which some other class `j` satisfies
/// `max(Y_i) <= min(Y_j)`. The comparison is non-strict, so an interval
/// whose upper end touches another's lower end is eliminated.
///
/// When every class is eliminated (only possible when the top scores are
/// exactly tied points), the classes attaining the largest upper bound are
/// returned instead, so the result is never empty for a nonempty tuple.
pub fn gsharp(r: &ReachableTuple) -> OutcomeSet {
    let ys = r.outputs();
    let outcome = |(i, &value): (usize, &Interval)| ClassOutcome {
        index: i + 1,
        value,
    };
    let mut members: Vec<ClassOutcome> = ys
        .iter()
        .enumerate()
        .filter(|&(i, yi)| {
            !ys.iter()
                .enumerate()
                .any(|(j, yj)| j != i && yi.hi() <= yj.lo())
        })
        .map(outcome)
        .collect();
    if members.is_empty() && !ys.is_empty() {
        let top = ys.iter().map(|y| y.hi()).fold(f64::NEG_INFINITY, f64::max);
        members = ys
            .iter()
            .enumerate()
            .filter(|(_, y)| y.hi() == top)
            .map(outcome)
            .collect();
    }
    OutcomeSet { members }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tuple(bounds: &[(f64, f64)]) -> ReachableTuple {
        ReachableTuple::new(
            bounds
                .iter()
                .map(|&(l, h)| Interval::new(l, h).unwrap())
                .collect(),
        )
    }

    #[test]
    fn worked_examples() {
        type Case<'a> = (&'a [(f64, f64)], &'a [usize]);
        let cases: &[Case] = &[
            (&[(0.0, 0.8), (0.12, 0.5), (1.0, 4.0)], &[3]),
            (&[(2.0, 5.0), (0.12, 0.5), (1.0, 4.0)], &[1, 3]),
            (
                &[
                    (-3.6, 3.2),
                    (3.5, 15.5),
                    (3.4, 6.7),
                    (-11.0, -0.5),
                    (3.2, 18.2),
                ],
                &[2, 3, 5],
            ),
            (
                &[
                    (2.3, 7.4),
                    (7.8, 14.7),
                    (5.4, 6.62),
                    (-11.0, -5.2),
                    (7.8, 17.4),
                ],
                &[2, 5],
            ),
            (
                &[
                    (0.8, 7.4),
                    (3.5, 15.5),
                    (3.4, 6.7),
                    (-11.0, -0.5),
                    (3.2, 18.2),
                ],
                &[1, 2, 3, 5],
            ),
            (&[(-1.0, 2.0)], &[1]),
        ];
        for (bounds, expected) in cases {
            let s = gsharp(&tuple(bounds));
            assert_eq!(
                s.indices(),
                expected.iter().copied().collect::<ClassSet>(),
                "{bounds:?}"
            );
        }
    }

    #[test]
    fn carries_intervals() {
        let s = gsharp(&tuple(&[(0.0, 0.8), (0.12, 0.5), (1.0, 4.0)]));
        assert_eq!(s.members()[0].value, Interval::new(1.0, 4.0).unwrap());
    }

    #[test]
    fn touching_bounds_eliminate() {
        // max(Y1) = min(Y2): class 1 goes
        let s = gsharp(&tuple(&[(0.0, 1.0), (1.0, 2.0)]));
        assert_eq!(s.indices(), ClassSet::from([2]));
        // tied points would eliminate each other; both are kept instead
        let s = gsharp(&tuple(&[(1.0, 1.0), (1.0, 1.0), (0.0, 0.5)]));
        assert_eq!(s.indices(), ClassSet::from([1, 2]));
    }

    fn tuple_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec(
            (-10.0f64..10.0, 0.01f64..5.0).prop_map(|(l, w)| (l, l + w)),
            1..8,
        )
    }

    proptest! {
        #[test]
        fn reapplication_removes_nothing(bounds in tuple_strategy()) {
            let first = gsharp(&tuple(&bounds));
            let survivors = ReachableTuple::new(first.members().iter().map(|c| c.value).collect());
            let second = gsharp(&survivors);
            prop_assert_eq!(second.len(), first.len());
        }

        #[test]
        fn nonempty_for_nondegenerate(bounds in tuple_strategy()) {
            // the class with the largest upper bound always survives
            prop_assert!(!gsharp(&tuple(&bounds)).is_empty());
        }

        #[test]
        fn single_survivor_dominates(bounds in tuple_strategy()) {
            let s = gsharp(&tuple(&bounds));
            if s.len() == 1 {
                let w = s.members()[0];
                for (j, &(_, hi)) in bounds.iter().enumerate() {
                    if j + 1 != w.index {
                        prop_assert!(hi <= w.value.lo());
                    }
                }
            }
        }

        #[test]
        fn tightening_shrinks_survivors(bounds in tuple_strategy(), shrink in proptest::collection::vec((0.0f64..0.5, 0.0f64..0.5), 8)) {
            let wide = tuple(&bounds);
            let narrow: Vec<(f64, f64)> = bounds.iter().zip(&shrink)
                .map(|(&(l, h), &(a, b))| { let w = h - l; (l + a * w, h - b * w) }).collect();
            let narrow = tuple(&narrow);
            prop_assert!(wide.contains(&narrow));
            prop_assert!(gsharp(&narrow).indices().is_subset(&gsharp(&wide).indices()));
        }
    }
}
