//! Abstract verification of feedforward ReLU networks against a hierarchy of
//! output class sets.
//!
//! Inputs are boxes of intervals. A perturbation widens a box, interval and
//! symbolic propagation bound the network outputs, and branch and bound
//! decides which hierarchy level is guaranteed to contain the prediction.

pub mod classes;
pub mod decision;
pub mod document;
pub mod enumerator;
pub mod error;
pub mod fixtures;
pub mod hierarchy;
pub mod interval;
pub mod network;
pub mod perturbation;
pub mod propagation;
pub mod verifier;

pub use classes::ClassSet;
pub use decision::{gsharp, OutcomeSet};
pub use document::{run_property, PropertyDocument, Report, RunOptions};
pub use enumerator::{enumerate_regions, export_regions, ExportFormat, Region, RegionMap};
pub use error::{Error, Result};
pub use hierarchy::{Hierarchy, Level, LevelId};
pub use interval::{AffineForm, InputBox, Interval};
pub use network::{Activation, Layer, Network};
pub use perturbation::{PerturbationKind, PerturbationSpec};
pub use propagation::{propagate_ibp, propagate_symbolic, ReachableTuple};
pub use verifier::{verify, verify_binary, verify_domain, BabConfig, Status, Verdict};
