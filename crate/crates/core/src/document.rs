//! Property documents and verification reports.
//!
//! A property document bundles the input domain, the perturbation, the
//! output hierarchy and the search configuration. [`run_property`] executes
//! it against a network and produces a [`Report`].

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::classes::ClassSet;
use crate::enumerator::{enumerate_regions, RegionMap};
use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, HierarchyDocument, LevelId};
use crate::interval::{InputBox, Interval};
use crate::network::Network;
use crate::perturbation::{PerturbationKind, PerturbationSpec};
use crate::verifier::{
    self, check_coherence, diagonal_samples, grid_samples, replay_witness, BabConfig,
    SplitHeuristic, Status, Verdict,
};

pub const TOOL_NAME: &str = "adverify";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Verify,
    VerifyBinary,
    Enumerate,
    Theorem1Demo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BabSettings {
    pub max_depth: usize,
    pub timeout_secs: f64,
    pub split_heuristic: SplitHeuristic,
    pub counterexample_samples: usize,
}

impl Default for BabSettings {
    fn default() -> Self {
        let d = BabConfig::default();
        BabSettings {
            max_depth: d.max_depth,
            timeout_secs: d.timeout.as_secs_f64(),
            split_heuristic: d.split_heuristic,
            counterexample_samples: d.counterexample_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateSettings {
    pub min_width: f64,
}

impl Default for EnumerateSettings {
    fn default() -> Self {
        EnumerateSettings {
            min_width: 1.0 / 64.0,
        }
    }
}

/// Finite concrete sample used by the coherence check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SampleSpec {
    /// `<t, ..., t>` for `t` from `lo` to `hi` in steps of `step`.
    Diagonal {
        step: f64,
        lo: Option<f64>,
        hi: Option<f64>,
    },
    /// Regular grid over the widened box.
    Grid {
        per_dim: usize,
    },
    Points {
        points: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyDocument {
    pub input_domain: Vec<Interval>,
    #[serde(default = "PerturbationSpec::identity")]
    pub perturbation: PerturbationSpec,
    pub hierarchy: HierarchyDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safe_level: Option<String>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub bab: BabSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumerate: Option<EnumerateSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence_samples: Option<SampleSpec>,
}

/// A property document resolved against a network.
#[derive(Debug, Clone)]
pub struct Property {
    pub domain: InputBox,
    pub perturbation: PerturbationSpec,
    pub hierarchy: Hierarchy,
    pub mode: Mode,
    pub bab: BabSettings,
    pub enumerate: EnumerateSettings,
    pub coherence_samples: Option<SampleSpec>,
}

impl PropertyDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Parse {
            field: "property".into(),
            source,
        })
    }

    /// Checks the document against `net` and builds the runtime property.
    pub fn resolve(&self, net: &Network) -> Result<Property> {
        let domain = InputBox::new(self.input_domain.clone());
        if domain.len() != net.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "input_domain",
                expected: net.input_dim(),
                found: domain.len(),
            });
        }
        if self.hierarchy.classes.len() != net.output_dim() {
            return Err(Error::DimensionMismatch {
                what: "hierarchy.classes",
                expected: net.output_dim(),
                found: self.hierarchy.classes.len(),
            });
        }
        let mut hierarchy = Hierarchy::from_document(&self.hierarchy)?;
        if let Some(name) = &self.safe_level {
            hierarchy = hierarchy.with_safe_level(name)?;
        }
        if self.mode == Mode::VerifyBinary {
            let safe = hierarchy.safe_level().ok_or_else(|| {
                Error::InvalidConfig("verify_binary requires `safe_level`".into())
            })?;
            let members = hierarchy.level(safe).members.clone();
            let name = hierarchy.level(safe).name.clone();
            let labels = hierarchy.labels().to_vec();
            hierarchy = Hierarchy::from_safe_set(net.output_dim(), members)?.with_labels(labels)?;
            // keep the analyst's level name in reports
            hierarchy = rename_safe(hierarchy, &name)?;
        }
        self.perturbation.validate(net.input_dim())?;
        if !self.bab.timeout_secs.is_finite() || self.bab.timeout_secs <= 0.0 {
            return Err(Error::InvalidConfig(
                "bab.timeout_secs must be positive".into(),
            ));
        }
        let enumerate = self.enumerate.clone().unwrap_or_default();
        if self.mode == Mode::Enumerate
            && (enumerate.min_width.is_nan() || enumerate.min_width <= 0.0)
        {
            return Err(Error::InvalidConfig(
                "enumerate.min_width must be positive".into(),
            ));
        }
        if self.mode == Mode::Theorem1Demo && self.coherence_samples.is_none() {
            return Err(Error::InvalidConfig(
                "theorem1_demo requires `coherence_samples`".into(),
            ));
        }
        Ok(Property {
            domain,
            perturbation: self.perturbation.clone(),
            hierarchy,
            mode: self.mode,
            bab: self.bab.clone(),
            enumerate,
            coherence_samples: self.coherence_samples.clone(),
        })
    }
}

fn rename_safe(h: Hierarchy, name: &str) -> Result<Hierarchy> {
    if name == "safe" {
        return Ok(h);
    }
    let labels = h.labels().to_vec();
    let levels = h
        .levels()
        .iter()
        .skip(1)
        .map(|l| crate::hierarchy::Level::new(name, l.members.clone()))
        .collect();
    Hierarchy::new(labels.len(), levels)?
        .with_labels(labels)?
        .with_safe_level(name)
}

/// Overrides applied on top of the document, typically from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: u64,
    pub timeout: Option<Duration>,
    pub max_depth: Option<usize>,
    /// Number of sensor-rupture draws; the worst verdict is reported.
    pub rupture_trials: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    pub class: String,
    pub class_index: usize,
    pub replayed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub leaves_explored: usize,
    pub nodes_evaluated: usize,
    pub max_depth_reached: usize,
    pub timed_out: bool,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub samples: usize,
    pub coherence: bool,
    pub abstract_coherence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionLevelSummary {
    pub level: String,
    pub regions: usize,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub count: usize,
    pub total_volume: f64,
    pub exact: bool,
    pub by_level: Vec<RegionLevelSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub seed: u64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub mode: Mode,
    pub status: Status,
    pub exit_code: i32,
    pub level: Option<LevelReport>,
    pub best_level: Option<LevelReport>,
    pub witness: Option<WitnessReport>,
    pub stats: StatsReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence: Option<CoherenceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<RegionSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rupture_trials: Vec<TrialReport>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Parse {
            field: "report".into(),
            source,
        })
    }

    /// Human-readable rendering.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{} {}\nmode: {:?}\nstatus: {:?}\n",
            self.tool, self.version, self.mode, self.status
        );
        if let Some(l) = &self.level {
            s += &format!("level: {} {{{}}}\n", l.name, l.members.join(","));
        }
        if let Some(l) = &self.best_level {
            s += &format!(
                "best level so far: {} {{{}}}\n",
                l.name,
                l.members.join(",")
            );
        }
        if let Some(w) = &self.witness {
            s += &format!(
                "witness: input {:?} -> output {:?}, selects {} (replayed: {})\n",
                w.input, w.output, w.class, w.replayed
            );
        }
        if let Some(c) = &self.coherence {
            s += &format!(
                "coherence on {} samples: {}\nabstract coherence: {}\n",
                c.samples, c.coherence, c.abstract_coherence
            );
        }
        if let Some(r) = &self.regions {
            s += &format!(
                "regions: {} (total volume {}, exact: {})\n",
                r.count, r.total_volume, r.exact
            );
            for l in &r.by_level {
                s += &format!(
                    "  {}: {} regions, volume {}\n",
                    l.level, l.regions, l.volume
                );
            }
        }
        for t in &self.rupture_trials {
            s += &format!("rupture seed {}: {:?}\n", t.seed, t.status);
        }
        let st = &self.stats;
        s += &format!(
            "leaves: {}, nodes: {}, depth: {}, timed out: {}, time: {:.3} ms\n",
            st.leaves_explored,
            st.nodes_evaluated,
            st.max_depth_reached,
            st.timed_out,
            st.wall_time_ms
        );
        s
    }

    /// Copy with timing fields zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Report {
        let mut r = self.clone();
        r.stats.wall_time_ms = 0.0;
        r
    }
}

fn level_report(h: &Hierarchy, id: LevelId) -> LevelReport {
    let l = h.level(id);
    LevelReport {
        name: l.name.clone(),
        members: l
            .members
            .iter()
            .map(|c| h.label_of(c).to_string())
            .collect(),
    }
}

fn bab_config(p: &Property, opts: &RunOptions) -> BabConfig {
    BabConfig {
        max_depth: opts.max_depth.unwrap_or(p.bab.max_depth),
        timeout: opts
            .timeout
            .unwrap_or_else(|| Duration::from_secs_f64(p.bab.timeout_secs)),
        split_heuristic: p.bab.split_heuristic,
        counterexample_samples: p.bab.counterexample_samples,
        seed: opts.seed,
    }
}

fn coherence_samples(spec: &SampleSpec, widened: &InputBox) -> Vec<Vec<f64>> {
    match spec {
        SampleSpec::Diagonal { step, lo, hi } => {
            let lo = lo.unwrap_or_else(|| {
                widened
                    .dims()
                    .iter()
                    .map(Interval::lo)
                    .fold(f64::NEG_INFINITY, f64::max)
            });
            let hi = hi.unwrap_or_else(|| {
                widened
                    .dims()
                    .iter()
                    .map(Interval::hi)
                    .fold(f64::INFINITY, f64::min)
            });
            diagonal_samples(widened.len(), lo, hi, *step)
        }
        SampleSpec::Grid { per_dim } => grid_samples(widened, *per_dim),
        SampleSpec::Points { points } => points.clone(),
    }
}

fn base_report(p: &Property, v: &Verdict, replayed: bool) -> Report {
    let h = &p.hierarchy;
    Report {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        mode: p.mode,
        status: v.status,
        exit_code: v.status.exit_code(),
        level: v.level.map(|id| level_report(h, id)),
        best_level: v.best_level.map(|id| level_report(h, id)),
        witness: v.witness.as_ref().map(|w| WitnessReport {
            input: w.input.clone(),
            output: w.output.clone(),
            class: h.label_of(w.class).to_string(),
            class_index: w.class,
            replayed,
        }),
        stats: StatsReport {
            leaves_explored: v.stats.leaves_explored,
            nodes_evaluated: v.stats.nodes_evaluated,
            max_depth_reached: v.stats.max_depth_reached,
            timed_out: v.stats.timed_out,
            wall_time_ms: v.stats.wall_time.as_secs_f64() * 1e3,
        },
        coherence: None,
        regions: None,
        rupture_trials: Vec::new(),
    }
}

/// Runs branch and bound, repeating over rupture seeds when requested.
fn verify_with_trials(
    net: &Network,
    p: &Property,
    cfg: &BabConfig,
    opts: &RunOptions,
) -> Result<(Verdict, Vec<TrialReport>)> {
    let trials = opts.rupture_trials.unwrap_or(1).max(1);
    if p.perturbation.kind != PerturbationKind::SensorRupture || trials == 1 {
        let mut spec = p.perturbation.clone();
        if spec.kind == PerturbationKind::SensorRupture && spec.seed.is_none() {
            spec.seed = Some(opts.seed);
        }
        return Ok((
            verifier::verify(net, &p.hierarchy, &spec, &p.domain, cfg)?,
            Vec::new(),
        ));
    }
    let base = p.perturbation.seed.unwrap_or(opts.seed);
    let mut verdicts = Vec::with_capacity(trials);
    let mut reports = Vec::with_capacity(trials);
    for t in 0..trials as u64 {
        let spec = PerturbationSpec {
            seed: Some(base.wrapping_add(t)),
            ..p.perturbation.clone()
        };
        let v = verifier::verify(net, &p.hierarchy, &spec, &p.domain, cfg)?;
        reports.push(TrialReport {
            seed: base.wrapping_add(t),
            status: v.status,
        });
        verdicts.push(v);
    }
    let worst = verdicts
        .iter()
        .map(|v| v.status)
        .max()
        .expect("at least one trial");
    let mut chosen = verdicts
        .iter()
        .find(|v| v.status == worst)
        .cloned()
        .expect("worst status occurs");
    if worst == Status::AbstractSafe {
        let joined: ClassSet = verdicts
            .iter()
            .filter_map(|v| v.level.or(p.hierarchy.safe_level()))
            .fold(ClassSet::new(), |acc, id| {
                acc.union(&p.hierarchy.level(id).members)
            });
        chosen.level = Some(p.hierarchy.closure_apply(&joined));
    }
    Ok((chosen, reports))
}

fn summarize_regions(h: &Hierarchy, map: &RegionMap) -> RegionSummary {
    let mut by_level: Vec<RegionLevelSummary> = Vec::new();
    for (i, level) in h.levels().iter().enumerate() {
        let regions: Vec<_> = map
            .regions
            .iter()
            .filter(|r| r.level == LevelId(i))
            .collect();
        if !regions.is_empty() {
            by_level.push(RegionLevelSummary {
                level: level.name.clone(),
                regions: regions.len(),
                volume: regions.iter().map(|r| r.bx.volume()).sum(),
            });
        }
    }
    RegionSummary {
        count: map.regions.len(),
        total_volume: map.total_volume(),
        exact: map.is_exact(h),
        by_level,
    }
}

/// Each bisection halves one dimension, so depth is the total halving count.
fn split_depth(domain: &InputBox, bx: &InputBox) -> usize {
    domain
        .dims()
        .iter()
        .zip(bx.dims())
        .filter(|(d, _)| d.width() > 0.0)
        .map(|(d, r)| (d.width() / r.width()).log2().round() as usize)
        .sum()
}

/// Verdict implied by a region map: the join of region levels, or unknown
/// when some region is covered only by the universe.
pub fn region_verdict(h: &Hierarchy, map: &RegionMap) -> (Status, Option<LevelId>) {
    if map.regions.iter().any(|r| h.is_universe(r.level)) {
        return (Status::Unknown, None);
    }
    if map.regions.iter().all(|r| h.is_within_safe(r.level)) {
        return (Status::Safe, h.safe_level());
    }
    let joined = map.regions.iter().fold(ClassSet::new(), |acc, r| {
        acc.union(&h.level(r.level).members)
    });
    let id = h.closure_apply(&joined);
    if h.is_universe(id) {
        (Status::Unknown, None)
    } else {
        (Status::AbstractSafe, Some(id))
    }
}

pub struct RunOutput {
    pub report: Report,
    pub regions: Option<RegionMap>,
}

/// Executes a resolved property against `net`.
pub fn run_property(net: &Network, p: &Property, opts: &RunOptions) -> Result<RunOutput> {
    let cfg = bab_config(p, opts);
    match p.mode {
        Mode::Verify | Mode::VerifyBinary => {
            let (v, trials) = verify_with_trials(net, p, &cfg, opts)?;
            let replayed = match &v.witness {
                Some(w) => replay_witness(net, &p.hierarchy, &w.input)?.is_some(),
                None => false,
            };
            let mut report = base_report(p, &v, replayed);
            report.rupture_trials = trials;
            Ok(RunOutput {
                report,
                regions: None,
            })
        }
        Mode::Theorem1Demo => {
            let widened = p.perturbation.widen(&p.domain)?;
            let spec = p.coherence_samples.as_ref().expect("checked in resolve");
            let samples = coherence_samples(spec, &widened);
            let coherence = check_coherence(net, &samples, &p.hierarchy)?;
            let (v, trials) = verify_with_trials(net, p, &cfg, opts)?;
            let replayed = match &v.witness {
                Some(w) => replay_witness(net, &p.hierarchy, &w.input)?.is_some(),
                None => false,
            };
            let mut report = base_report(p, &v, replayed);
            report.coherence = Some(CoherenceReport {
                samples: samples.len(),
                coherence,
                abstract_coherence: matches!(v.status, Status::Safe | Status::AbstractSafe),
            });
            report.rupture_trials = trials;
            Ok(RunOutput {
                report,
                regions: None,
            })
        }
        Mode::Enumerate => {
            let mut spec = p.perturbation.clone();
            if spec.kind == PerturbationKind::SensorRupture && spec.seed.is_none() {
                spec.seed = Some(opts.seed);
            }
            let widened = spec.widen(&p.domain)?;
            let start = std::time::Instant::now();
            let map = enumerate_regions(net, &p.hierarchy, &widened, p.enumerate.min_width)?;
            let (status, level) = region_verdict(&p.hierarchy, &map);
            let v = Verdict {
                status,
                level,
                best_level: None,
                witness: None,
                stats: verifier::Stats {
                    leaves_explored: map.regions.len(),
                    nodes_evaluated: 2 * map.regions.len() - 1,
                    max_depth_reached: map
                        .regions
                        .iter()
                        .map(|r| split_depth(&map.domain, &r.bx))
                        .max()
                        .unwrap_or(0),
                    wall_time: start.elapsed(),
                    timed_out: false,
                },
            };
            let mut report = base_report(p, &v, false);
            report.regions = Some(summarize_regions(&p.hierarchy, &map));
            Ok(RunOutput {
                report,
                regions: Some(map),
            })
        }
    }
}

/// Re-runs the witness recorded in `report`. Returns true when it still
/// forces the closure to the universe.
pub fn replay_report(net: &Network, p: &Property, report: &Report) -> Result<bool> {
    match &report.witness {
        Some(w) => {
            let widened = p.perturbation.widen(&p.domain)?;
            Ok(widened.contains_point(&w.input)
                && replay_witness(net, &p.hierarchy, &w.input)?.is_some())
        }
        None => Ok(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn headline_doc() -> PropertyDocument {
        PropertyDocument::from_json(
            r#"{
                "input_domain": [[0, 1], [0, 1], [0.8, 1]],
                "perturbation": {"kind": "identity"},
                "hierarchy": {
                    "classes": ["c1", "c2", "c3", "c4", "c5"],
                    "levels": [
                        {"name": "tolerable", "members": ["c1", "c2", "c3", "c5"]},
                        {"name": "safe", "members": ["c2", "c3", "c5"]}
                    ]
                },
                "safe_level": "safe",
                "bab": {"max_depth": 0}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn headline_property_runs_safe() {
        let net = fixtures::hierarchy_network();
        let p = headline_doc().resolve(&net).unwrap();
        let out = run_property(&net, &p, &RunOptions::default()).unwrap();
        assert_eq!(out.report.status, Status::Safe);
        assert_eq!(out.report.exit_code, 0);
        assert_eq!(out.report.level.as_ref().unwrap().name, "safe");
        let back = Report::from_json(&out.report.to_json()).unwrap();
        assert_eq!(back, out.report);
    }

    #[test]
    fn binary_mode_keeps_level_name() {
        let net = fixtures::hierarchy_network();
        let mut doc = headline_doc();
        doc.mode = Mode::VerifyBinary;
        doc.safe_level = Some("tolerable".into());
        let p = doc.resolve(&net).unwrap();
        assert_eq!(p.hierarchy.levels().len(), 2);
        let out = run_property(&net, &p, &RunOptions::default()).unwrap();
        assert_eq!(out.report.status, Status::Safe);
        assert_eq!(out.report.level.unwrap().name, "tolerable");

        doc.safe_level = None;
        assert!(doc.resolve(&net).is_err());
    }

    #[test]
    fn resolve_errors_name_the_field() {
        let net = fixtures::coherence_network();
        let err = headline_doc().resolve(&net).unwrap_err();
        assert!(err.to_string().contains("input_domain"), "{err}");

        let net = fixtures::hierarchy_network();
        let mut doc = headline_doc();
        doc.safe_level = Some("missing".into());
        assert!(matches!(doc.resolve(&net), Err(Error::UnknownLevel(_))));

        let mut doc = headline_doc();
        doc.mode = Mode::Theorem1Demo;
        assert!(doc.resolve(&net).is_err());

        assert!(PropertyDocument::from_json(
            r#"{"input_domain": [[1, 0]], "hierarchy": {"classes": [], "levels": []}}"#
        )
        .is_err());
    }

    #[test]
    fn enumerate_mode_summarizes() {
        let net = fixtures::hierarchy_network();
        let mut doc = headline_doc();
        doc.mode = Mode::Enumerate;
        doc.perturbation =
            PerturbationSpec::feature_widen(2, crate::perturbation::Side::Lower, 0.8);
        doc.enumerate = Some(EnumerateSettings { min_width: 0.125 });
        let p = doc.resolve(&net).unwrap();
        let out = run_property(&net, &p, &RunOptions::default()).unwrap();
        let regions = out.report.regions.unwrap();
        assert!((regions.total_volume - 1.0).abs() < 1e-9);
        assert!(regions.by_level.iter().any(|l| l.level == "tolerable"));
        assert_eq!(out.report.status, Status::AbstractSafe);
    }

    #[test]
    fn rupture_trials_report_each_seed() {
        // 2x2 image network: the output only depends on pixel sums
        let net = crate::network::Network::new(vec![crate::network::Layer::new(
            vec![vec![1.0, 1.0, 1.0, 1.0], vec![0.0, 0.0, 0.0, 0.0]],
            vec![0.0, 1.5],
            crate::network::Activation::Identity,
        )
        .unwrap()])
        .unwrap();
        let doc = PropertyDocument::from_json(
            r#"{
                "input_domain": [[0.5, 0.5], [0.5, 0.5], [0.5, 0.5], [0.5, 0.5]],
                "perturbation": {"kind": "sensor_rupture", "epsilon": 0.5,
                                 "patch": {"x": 0, "y": 0, "w": 2, "h": 2},
                                 "shape": {"height": 2, "width": 2}},
                "hierarchy": {"classes": ["bright", "dark"], "levels": [{"name": "ok", "members": ["bright"]}]},
                "safe_level": "ok"
            }"#,
        )
        .unwrap();
        let p = doc.resolve(&net).unwrap();
        let opts = RunOptions {
            seed: 3,
            rupture_trials: Some(6),
            ..RunOptions::default()
        };
        let a = run_property(&net, &p, &opts).unwrap().report;
        assert_eq!(a.rupture_trials.len(), 6);
        let worst = a.rupture_trials.iter().map(|t| t.status).max().unwrap();
        assert_eq!(a.status, worst);
        let b = run_property(&net, &p, &opts).unwrap().report;
        assert_eq!(a.without_timing(), b.without_timing());
    }
}
