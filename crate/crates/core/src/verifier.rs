//! Decision procedures over an output hierarchy: branch-and-bound input
//! refinement, counterexample search and the concrete coherence check.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classes::ClassSet;
use crate::decision::gsharp;
use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, LevelId};
use crate::interval::InputBox;
use crate::network::{argmax_g, Network};
use crate::perturbation::PerturbationSpec;
use crate::propagation::propagate_ibp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitHeuristic {
    #[default]
    WidestDim,
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BabConfig {
    pub max_depth: usize,
    pub timeout: Duration,
    pub split_heuristic: SplitHeuristic,
    /// Uniform samples drawn per unresolved node, in addition to the center
    /// and the box corners.
    pub counterexample_samples: usize,
    pub seed: u64,
}

impl Default for BabConfig {
    fn default() -> Self {
        BabConfig {
            max_depth: 20,
            timeout: Duration::from_secs(60),
            split_heuristic: SplitHeuristic::WidestDim,
            counterexample_samples: 64,
            seed: 0,
        }
    }
}

impl BabConfig {
    pub fn validate(&self) -> Result<()> {
        if self.timeout.is_zero() {
            return Err(Error::InvalidConfig("timeout must be positive".into()));
        }
        Ok(())
    }
}

/// All corners are tried up to this input dimension; above it a random
/// subset of corners is sampled instead.
const MAX_FULL_CORNER_DIM: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Safe,
    AbstractSafe,
    Unknown,
    Unsafe,
}

impl Status {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Safe => 0,
            Status::AbstractSafe => 2,
            Status::Unsafe => 3,
            Status::Unknown => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    /// 1-based index of the selected class.
    pub class: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stats {
    /// Nodes that ended the search: resolved, unsafe, or cut off.
    pub leaves_explored: usize,
    pub nodes_evaluated: usize,
    pub max_depth_reached: usize,
    pub wall_time: Duration,
    pub timed_out: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    /// Covering level for `Safe` and `AbstractSafe`.
    pub level: Option<LevelId>,
    /// For `Unknown`: the covering level of the part of the domain that was
    /// resolved before the cutoff. Advisory only.
    pub best_level: Option<LevelId>,
    pub witness: Option<Witness>,
    pub stats: Stats,
}

#[derive(Debug)]
enum NodeOutcome {
    Resolved(LevelId),
    Witness(Witness),
    Open,
}

fn node_seed(seed: u64, depth: usize, index: usize) -> u64 {
    // splitmix64 finalizer over the node coordinates
    let mut z =
        seed ^ (depth as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (index as u64).rotate_left(32);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Concrete points tried when looking for a counterexample inside `bx`.
pub fn candidate_points(bx: &InputBox, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![bx.center()];
    let m = bx.len();
    if m <= MAX_FULL_CORNER_DIM {
        out.extend((0..1u64 << m).map(|bits| bx.corner(bits)));
    } else {
        use rand::Rng;
        out.extend((0..samples).map(|_| {
            let corner: Vec<f64> = bx
                .dims()
                .iter()
                .map(|d| if rng.gen_bool(0.5) { d.hi() } else { d.lo() })
                .collect();
            corner
        }));
    }
    out.extend((0..samples).map(|_| bx.sample(&mut rng)));
    out
}

/// Replays a concrete input: returns the witness record when its decision
/// forces the closure to the universe.
pub fn replay_witness(net: &Network, h: &Hierarchy, input: &[f64]) -> Result<Option<Witness>> {
    let output = net.forward(input)?;
    let class = argmax_g(&output).index;
    let forced = h.is_universe(h.closure_apply(&ClassSet::singleton(class)));
    Ok(forced.then(|| Witness {
        input: input.to_vec(),
        output,
        class,
    }))
}

fn check_inputs(net: &Network, h: &Hierarchy, bx: &InputBox) -> Result<()> {
    if bx.len() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            what: "input box",
            expected: net.input_dim(),
            found: bx.len(),
        });
    }
    if h.num_classes() != net.output_dim() {
        return Err(Error::DimensionMismatch {
            what: "hierarchy classes",
            expected: net.output_dim(),
            found: h.num_classes(),
        });
    }
    Ok(())
}

/// Covering level of a box under IBP followed by the abstract decision.
pub fn covering_level(net: &Network, h: &Hierarchy, bx: &InputBox) -> Result<LevelId> {
    let r = propagate_ibp(net, bx)?;
    Ok(h.closure_apply(&gsharp(&r).indices()))
}

fn choose_split(bx: &InputBox, heuristic: SplitHeuristic, depth: usize) -> usize {
    match heuristic {
        SplitHeuristic::WidestDim => bx.widest_dim(),
        SplitHeuristic::RoundRobin => {
            let m = bx.len();
            (0..m)
                .map(|k| (depth + k) % m)
                .find(|&d| !bx.dim(d).is_degenerate())
                .unwrap_or(depth % m)
        }
    }
}

#[cfg(feature = "parallel")]
pub(crate) fn map_ordered<T: Sync, U: Send>(
    items: &[T],
    f: impl Fn(usize, &T) -> U + Sync + Send,
) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_ordered<T: Sync, U: Send>(
    items: &[T],
    f: impl Fn(usize, &T) -> U + Sync + Send,
) -> Vec<U> {
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

/// Branch and bound over an already-widened domain.
///
/// The search proceeds one depth at a time. Nodes of a depth are evaluated
/// concurrently and merged in canonical order, so the verdict does not
/// depend on scheduling.
pub fn verify_domain(
    net: &Network,
    h: &Hierarchy,
    domain: &InputBox,
    cfg: &BabConfig,
) -> Result<Verdict> {
    check_inputs(net, h, domain)?;
    cfg.validate()?;
    let start = Instant::now();
    let mut stats = Stats::default();
    let mut frontier = vec![domain.clone()];
    let mut resolved = ClassSet::new();
    let mut any_resolved = false;
    let mut all_safe = true;
    let mut unresolved = 0usize;
    let mut depth = 0usize;

    while !frontier.is_empty() {
        stats.max_depth_reached = depth;
        let outcomes = map_ordered(&frontier, |index, node| -> Result<NodeOutcome> {
            let level = covering_level(net, h, node)?;
            if !h.is_universe(level) {
                return Ok(NodeOutcome::Resolved(level));
            }
            for x in candidate_points(
                node,
                cfg.counterexample_samples,
                node_seed(cfg.seed, depth, index),
            ) {
                if let Some(w) = replay_witness(net, h, &x)? {
                    return Ok(NodeOutcome::Witness(w));
                }
            }
            Ok(NodeOutcome::Open)
        });
        stats.nodes_evaluated += frontier.len();

        let out_of_time = start.elapsed() >= cfg.timeout;
        let mut next = Vec::new();
        for (node, outcome) in frontier.iter().zip(outcomes) {
            match outcome? {
                NodeOutcome::Witness(w) => {
                    stats.leaves_explored += 1;
                    stats.wall_time = start.elapsed();
                    return Ok(Verdict {
                        status: Status::Unsafe,
                        level: None,
                        best_level: None,
                        witness: Some(w),
                        stats,
                    });
                }
                NodeOutcome::Resolved(level) => {
                    stats.leaves_explored += 1;
                    any_resolved = true;
                    all_safe &= h.is_within_safe(level);
                    resolved = resolved.union(&h.level(level).members);
                }
                NodeOutcome::Open => {
                    let split = node.split(choose_split(node, cfg.split_heuristic, depth))?;
                    if depth < cfg.max_depth && split.progress && !out_of_time {
                        next.push(split.lower);
                        next.push(split.upper);
                    } else {
                        stats.leaves_explored += 1;
                        stats.timed_out |= out_of_time;
                        unresolved += 1;
                    }
                }
            }
        }
        if !next.is_empty() {
            depth += 1;
        }
        frontier = next;
    }
    stats.wall_time = start.elapsed();

    let joined = h.closure_apply(&resolved);
    let verdict = |status, level, best_level| Verdict {
        status,
        level,
        best_level,
        witness: None,
        stats: stats.clone(),
    };
    if unresolved > 0 {
        return Ok(verdict(
            Status::Unknown,
            None,
            any_resolved.then_some(joined),
        ));
    }
    if all_safe {
        return Ok(verdict(Status::Safe, h.safe_level(), None));
    }
    if h.is_universe(joined) {
        // every leaf resolved below the universe but their join is not
        return Ok(verdict(Status::Unknown, None, None));
    }
    Ok(verdict(Status::AbstractSafe, Some(joined), None))
}

/// Widens `bx` with `spec` and runs branch and bound on the result.
pub fn verify(
    net: &Network,
    h: &Hierarchy,
    spec: &PerturbationSpec,
    bx: &InputBox,
    cfg: &BabConfig,
) -> Result<Verdict> {
    let domain = spec.widen(bx)?;
    verify_domain(net, h, &domain, cfg)
}

/// Plain safe-set verification: the two-level hierarchy `{universe, safe}`.
pub fn verify_binary(
    net: &Network,
    safe: &ClassSet,
    spec: &PerturbationSpec,
    bx: &InputBox,
    cfg: &BabConfig,
) -> Result<Verdict> {
    let h = Hierarchy::from_safe_set(net.output_dim(), safe.clone())?;
    verify(net, &h, spec, bx, cfg)
}

/// Concrete coherence over a finite sample: the closure of the set of
/// selected classes stays strictly below the universe.
pub fn check_coherence(net: &Network, samples: &[Vec<f64>], h: &Hierarchy) -> Result<bool> {
    if samples.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let mut classes = ClassSet::new();
    for x in samples {
        classes.insert(net.classify(x)?.index);
    }
    Ok(!h.is_universe(h.closure_apply(&classes)))
}

/// Points `<t, t, ..., t>` for `t` stepping from `lo` to `hi` inclusive.
pub fn diagonal_samples(dim: usize, lo: f64, hi: f64, step: f64) -> Vec<Vec<f64>> {
    let count = ((hi - lo) / step).round() as usize;
    (0..=count)
        .map(|k| vec![(lo + k as f64 * step).min(hi); dim])
        .collect()
}

/// Regular grid with `per_dim` points along every dimension of `bx`.
pub fn grid_samples(bx: &InputBox, per_dim: usize) -> Vec<Vec<f64>> {
    let per_dim = per_dim.max(1);
    let axes: Vec<Vec<f64>> = bx
        .dims()
        .iter()
        .map(|d| {
            if per_dim == 1 {
                vec![d.midpoint()]
            } else {
                (0..per_dim)
                    .map(|k| d.lo() + d.width() * k as f64 / (per_dim - 1) as f64)
                    .collect()
            }
        })
        .collect();
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<f64>| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Side-by-side outcome of the concrete and abstract coherence checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceComparison {
    pub coherence: bool,
    pub abstract_coherence: bool,
    pub verdict: Verdict,
}

/// Runs the concrete check on `samples` and branch and bound on the
/// widened box. Abstract coherence implies coherence on any sample of the
/// widened box; the converse does not hold.
pub fn theorem1_demo(
    net: &Network,
    h: &Hierarchy,
    spec: &PerturbationSpec,
    bx: &InputBox,
    samples: &[Vec<f64>],
    cfg: &BabConfig,
) -> Result<CoherenceComparison> {
    let coherence = check_coherence(net, samples, h)?;
    let verdict = verify(net, h, spec, bx, cfg)?;
    let abstract_coherence = matches!(verdict.status, Status::Safe | Status::AbstractSafe);
    Ok(CoherenceComparison {
        coherence,
        abstract_coherence,
        verdict,
    })
}
