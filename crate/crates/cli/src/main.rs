use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use adverify_core::document::{
    replay_report, run_property, Property, PropertyDocument, Report, RunOptions,
};
use adverify_core::{export_regions, ExportFormat, Network};
use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};

/// Verify a ReLU network against a hierarchy of output class sets.
///
/// Exit codes: 0 safe, 2 abstract safe, 3 unsafe, 4 unknown, 1 usage or input error.
#[derive(Debug, Parser)]
#[command(name = "adverify", version)]
struct Args {
    /// Network document (JSON).
    #[arg(long)]
    network: PathBuf,

    /// Property document (JSON).
    #[arg(long)]
    property: PathBuf,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed for witness sampling and rupture selection.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Wall-clock budget in seconds; overrides the property document.
    #[arg(long)]
    timeout: Option<f64>,

    /// Maximum bisection depth; overrides the property document.
    #[arg(long)]
    max_depth: Option<usize>,

    /// Verify this many sensor-rupture draws and report the worst verdict.
    #[arg(long)]
    rupture_trials: Option<usize>,

    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    threads: Option<usize>,

    /// Only parse and validate both documents.
    #[arg(long)]
    check: bool,

    /// Replay the witness recorded in a previous report.
    #[arg(long, value_name = "REPORT", conflicts_with = "check")]
    replay: Option<PathBuf>,

    /// Write the region map of an `enumerate` run to this file.
    #[arg(long)]
    regions_out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = RegionFormat::Csv)]
    regions_format: RegionFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegionFormat {
    Csv,
    Json,
}

impl From<RegionFormat> for ExportFormat {
    fn from(f: RegionFormat) -> Self {
        match f {
            RegionFormat::Csv => ExportFormat::Csv,
            RegionFormat::Json => ExportFormat::Json,
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(args: &Args) -> Result<(Network, Property)> {
    let net = Network::from_json(&read(&args.network)?)
        .with_context(|| format!("network {}", args.network.display()))?;
    let doc = PropertyDocument::from_json(&read(&args.property)?)
        .with_context(|| format!("property {}", args.property.display()))?;
    let prop = doc
        .resolve(&net)
        .with_context(|| format!("property {}", args.property.display()))?;
    Ok((net, prop))
}

fn run(args: &Args) -> Result<u8> {
    if let Some(t) = args.timeout {
        if !(t > 0.0 && t.is_finite()) {
            bail!("--timeout must be a positive number of seconds");
        }
    }
    if args.threads == Some(0) {
        bail!("--threads must be at least 1");
    }
    let (net, prop) = load(args)?;
    if args.check {
        println!(
            "ok: {} inputs, {} classes, {} hierarchy levels",
            net.input_dim(),
            net.output_dim(),
            prop.hierarchy.levels().len()
        );
        return Ok(0);
    }
    if let Some(path) = &args.replay {
        let report = Report::from_json(&read(path)?)
            .with_context(|| format!("report {}", path.display()))?;
        if report.witness.is_none() {
            bail!("report {} carries no witness", path.display());
        }
        if !replay_report(&net, &prop, &report)? {
            bail!(
                "witness in {} does not reproduce an unsafe classification",
                path.display()
            );
        }
        println!("witness reproduces the unsafe classification");
        return Ok(3);
    }

    let opts = RunOptions {
        seed: args.seed,
        timeout: args.timeout.map(Duration::from_secs_f64),
        max_depth: args.max_depth,
        rupture_trials: args.rupture_trials,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("starting worker pool")?;
    let out = pool.install(|| run_property(&net, &prop, &opts))?;

    if let Some(path) = &args.regions_out {
        let Some(map) = &out.regions else {
            bail!("--regions-out needs a property with mode `enumerate`");
        };
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        export_regions(
            map,
            &prop.hierarchy,
            args.regions_format.into(),
            BufWriter::new(file),
        )?;
    }

    let body = match args.format {
        Format::Json => out.report.to_json() + "\n",
        Format::Text => out.report.to_text(),
    };
    match &args.out {
        Some(path) => {
            fs::write(path, body).with_context(|| format!("writing {}", path.display()))?
        }
        None => io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(out.report.exit_code as u8)
}
