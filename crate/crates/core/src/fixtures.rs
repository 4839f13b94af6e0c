//! Small reference networks and hierarchies used by tests, examples and the
//! browser demo.

use crate::classes::ClassSet;
use crate::hierarchy::{Hierarchy, Level};
use crate::interval::InputBox;
use crate::network::{Activation, Layer, Network};

/// Three inputs, three hidden ReLUs without bias, five outputs with biases
/// `3.8, 3.5, 3.4, -2, 3.2`.
pub fn hierarchy_network() -> Network {
    let hidden = Layer::new(
        vec![
            vec![4.0, -1.0, 2.0],
            vec![-2.0, 3.0, -1.0],
            vec![1.0, 0.0, 5.0],
        ],
        vec![0.0, 0.0, 0.0],
        Activation::Relu,
    )
    .expect("valid layer");
    let output = Layer::new(
        vec![
            vec![0.5, -1.0, 0.1],
            vec![0.5, 1.0, 1.0],
            vec![0.0, 0.1, 0.5],
            vec![-0.5, 0.5, -1.0],
            vec![1.0, 1.0, 1.0],
        ],
        vec![3.8, 3.5, 3.4, -2.0, 3.2],
        Activation::Identity,
    )
    .expect("valid layer");
    Network::new(vec![hidden, output]).expect("valid network")
}

/// Two inputs, two hidden ReLUs, three outputs, no biases.
pub fn coherence_network() -> Network {
    let hidden = Layer::new(
        vec![vec![1.0, 2.0], vec![2.0, -3.0]],
        vec![0.0, 0.0],
        Activation::Relu,
    )
    .expect("valid layer");
    let output = Layer::new(
        vec![vec![0.8, 0.3], vec![-0.1, -1.0], vec![0.5, 0.6]],
        vec![0.0, 0.0, 0.0],
        Activation::Identity,
    )
    .expect("valid layer");
    Network::new(vec![hidden, output]).expect("valid network")
}

/// `{top, tolerable = {c1,c2,c3,c5}, safe = {c2,c3,c5}}` over five classes,
/// with `safe` designated.
pub fn tolerance_hierarchy() -> Hierarchy {
    Hierarchy::new(
        5,
        vec![
            Level::new("tolerable", [1, 2, 3, 5]),
            Level::new("safe", [2, 3, 5]),
        ],
    )
    .and_then(|h| h.with_safe_level("safe"))
    .expect("valid hierarchy")
}

/// `{top, tolerable = {c1,c2}, safe = {c1}, none = {}}` over three classes,
/// with `safe` designated.
pub fn coherence_hierarchy() -> Hierarchy {
    Hierarchy::new(
        3,
        vec![
            Level::new("tolerable", [1, 2]),
            Level::new("safe", [1]),
            Level::new("none", ClassSet::new()),
        ],
    )
    .and_then(|h| h.with_safe_level("safe"))
    .expect("valid hierarchy")
}

pub fn unit_box(dim: usize) -> InputBox {
    InputBox::from_bounds(&vec![(0.0, 1.0); dim]).expect("unit box")
}

/// `<[0,1], [0,1], [0.8,1]>`.
pub fn headline_box() -> InputBox {
    InputBox::from_bounds(&[(0.0, 1.0), (0.0, 1.0), (0.8, 1.0)]).expect("valid box")
}
