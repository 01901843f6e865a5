//! `cauchy-rc` command-line driver.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data errors.

mod output;
mod source;

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use cauchy_rc::coeff::{
    fit_baseline, fit_composite_cauchy, model_kl, BaselineKind, BetaGrid, CoefficientHistogram,
};
use cauchy_rc::quant::{rd_curve, ProbabilityPath, SliceType, MAX_QP, MIN_QP};
use cauchy_rc::report::{fmt6, write_frames_csv, write_plan_csv, write_rd_curve_csv};
use cauchy_rc::sim::{dependency_probe, run_sequence, RunMode, RunResult, RunSummary};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use output::{to_json_text, ArtifactDir, RunManifest};
use source::{digest, SourceArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "cauchy-rc", version, about = "Composite-Cauchy rate control toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit composite, Laplacian and Cauchy models to a coefficient dump.
    FitDist(FitDistArgs),
    /// Model entropy and distortion over a list of QPs.
    RdCurve(RdCurveArgs),
    /// Code a sequence in fixed-QP or rate-controlled modes.
    Simulate(SimulateArgs),
    /// Measure how reference quality affects a dependent frame.
    ProbeDependency(ProbeArgs),
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Smallest beta of the search grid.
    #[arg(long, default_value_t = 0.05)]
    beta_min: f64,
    /// Largest beta of the search grid.
    #[arg(long, default_value_t = 500.0)]
    beta_max: f64,
    /// Additive grid step; when absent the grid is geometric.
    #[arg(long, conflicts_with = "beta_ratio")]
    beta_step: Option<f64>,
    /// Ratio between neighbouring grid values.
    #[arg(long, default_value_t = 1.05)]
    beta_ratio: f64,
}

impl GridArgs {
    fn grid(&self) -> CliResult<BetaGrid> {
        match self.beta_step {
            Some(step) => BetaGrid::linear(self.beta_min, self.beta_max, step),
            None => BetaGrid::geometric(self.beta_min, self.beta_max, self.beta_ratio),
        }
        .map_err(|e| CliError::Usage(format!("beta grid: {e}")))
    }

    fn describe(&self) -> serde_json::Value {
        match self.beta_step {
            Some(step) => json!({"kind": "linear", "min": self.beta_min, "max": self.beta_max, "step": step}),
            None => json!({"kind": "geometric", "min": self.beta_min, "max": self.beta_max, "ratio": self.beta_ratio}),
        }
    }
}

#[derive(Debug, Args)]
struct FitDistArgs {
    /// Coefficient dump: one integer level per line.
    dump: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Directory for fit.json and manifest.json; stdout when absent.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PathArg {
    Integral,
    Sum,
}

#[derive(Debug, Args)]
struct RdCurveArgs {
    /// Coefficient dump the model is fitted to.
    dump: PathBuf,
    /// Comma-separated QPs.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    qps: Vec<i32>,
    /// Slice type, I or B.
    #[arg(long, default_value = "B")]
    slice: String,
    /// Level probability computation.
    #[arg(long, value_enum, default_value_t = PathArg::Integral)]
    path: PathArg,
    #[command(flatten)]
    grid: GridArgs,
    /// Directory for rd_curve.csv and manifest.json; stdout when absent.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ModeArg {
    FixedQp,
    DefaultRc,
    ProposedRc,
}

impl ModeArg {
    fn name(self) -> &'static str {
        match self {
            ModeArg::FixedQp => "fixed_qp",
            ModeArg::DefaultRc => "default_rc",
            ModeArg::ProposedRc => "proposed_rc",
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Coding modes, comma-separated.
    #[arg(long = "modes", alias = "mode", value_enum, value_delimiter = ',', required = true)]
    modes: Vec<ModeArg>,
    /// Base QPs of fixed_qp runs, comma-separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    qp: Vec<i32>,
    /// Target bit-rates in bits per second for rate-controlled runs.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    targets: Vec<f64>,
    /// Use each fixed_qp run's output rate as the target of the
    /// rate-controlled modes.
    #[arg(long)]
    derive_targets: bool,
    /// Worker threads across independent runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct ProbeArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// QP of the dependent frame.
    #[arg(long, default_value_t = 40)]
    probe_qp: i32,
    /// Lowest reference QP.
    #[arg(long, default_value_t = 30)]
    ref_qp_min: i32,
    /// Highest reference QP.
    #[arg(long, default_value_t = 43)]
    ref_qp_max: i32,
    /// Directory for probe.csv, probe.json and manifest.json; stdout when
    /// absent.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::FitDist(a) => fit_dist(a),
        Command::RdCurve(a) => rd_curve_cmd(a),
        Command::Simulate(a) => simulate(a),
        Command::ProbeDependency(a) => probe(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Data(err) => eprintln!("error: {err:#}"),
            }
            ExitCode::from(e.code())
        }
    }
}

fn read_dump(path: &Path) -> CliResult<CoefficientHistogram> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(CoefficientHistogram::read_dump(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?)
}

/// Writes `name` into `out_dir` with a manifest, or prints it to stdout.
fn emit(out_dir: Option<&Path>, name: &str, contents: &[u8], manifest: RunManifest) -> CliResult<()> {
    match out_dir {
        Some(dir) => {
            let mut out = ArtifactDir::create(dir)?;
            out.write(name, contents)?;
            out.commit(manifest)?;
        }
        None => std::io::stdout().write_all(contents).context("writing stdout")?,
    }
    Ok(())
}

#[derive(Serialize)]
struct FitReport {
    samples: u64,
    zero_fraction: f64,
    composite: CompositeFit,
    laplacian: ScaleFit,
    cauchy: ScaleFit,
}

#[derive(Serialize)]
struct CompositeFit {
    beta: f64,
    p0: f64,
    alpha: f64,
    kl_bits: f64,
}

#[derive(Serialize)]
struct ScaleFit {
    scale: f64,
    kl_bits: f64,
}

fn fit_dist(a: FitDistArgs) -> CliResult<()> {
    let grid = a.grid.grid()?;
    let hist = read_dump(&a.dump)?;
    let data = |e: cauchy_rc::Error| CliError::Data(anyhow!(e));
    let comp = fit_composite_cauchy(&hist, &grid).map_err(data)?;
    let lap = fit_baseline(&hist, BaselineKind::Laplacian, &grid).map_err(data)?;
    let cau = fit_baseline(&hist, BaselineKind::Cauchy, &grid).map_err(data)?;
    let report = FitReport {
        samples: hist.total(),
        zero_fraction: hist.zero_fraction(),
        composite: CompositeFit {
            beta: comp.beta(),
            p0: comp.p0(),
            alpha: comp.alpha(),
            kl_bits: model_kl(&hist, &comp).map_err(data)?,
        },
        laplacian: ScaleFit {
            scale: lap.scale(),
            kl_bits: model_kl(&hist, &lap).map_err(data)?,
        },
        cauchy: ScaleFit {
            scale: cau.scale(),
            kl_bits: model_kl(&hist, &cau).map_err(data)?,
        },
    };
    let text = to_json_text(&report)?;
    let manifest = RunManifest::new("fit-dist", None, json!({"beta_grid": a.grid.describe()}), vec![digest(&a.dump)?]);
    emit(a.out_dir.as_deref(), "fit.json", text.as_bytes(), manifest)
}

fn check_qp(qp: i32) -> CliResult<()> {
    if (MIN_QP..=MAX_QP).contains(&qp) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("invalid QP {qp}: must lie in [{MIN_QP}, {MAX_QP}]")))
    }
}

fn rd_curve_cmd(a: RdCurveArgs) -> CliResult<()> {
    let bad: Vec<String> = a.qps.iter().filter(|q| !(MIN_QP..=MAX_QP).contains(*q)).map(|q| q.to_string()).collect();
    if !bad.is_empty() {
        return Err(CliError::Usage(format!("invalid QP values {}: must lie in [{MIN_QP}, {MAX_QP}]", bad.join(", "))));
    }
    let slice: SliceType = a.slice.parse().map_err(|e: cauchy_rc::Error| CliError::Usage(e.to_string()))?;
    let grid = a.grid.grid()?;
    let hist = read_dump(&a.dump)?;
    let model = fit_composite_cauchy(&hist, &grid).map_err(|e| CliError::Data(anyhow!(e)))?;
    let mut qps = a.qps.clone();
    qps.sort_unstable();
    qps.dedup();
    let path = match a.path {
        PathArg::Integral => ProbabilityPath::Integral,
        PathArg::Sum => ProbabilityPath::Sum,
    };
    let rows = rd_curve(&model, &qps, slice, path).map_err(|e| CliError::Data(anyhow!(e)))?;
    let mut csv = Vec::new();
    write_rd_curve_csv(&rows, &mut csv).map_err(|e| CliError::Data(anyhow!(e)))?;
    let config = json!({
        "qps": qps,
        "slice": slice.as_str(),
        "path": format!("{:?}", a.path).to_lowercase(),
        "beta_grid": a.grid.describe(),
        "model": {"beta": model.beta(), "p0": model.p0()},
    });
    let manifest = RunManifest::new("rd-curve", None, config, vec![digest(&a.dump)?]);
    emit(a.out_dir.as_deref(), "rd_curve.csv", &csv, manifest)
}

#[derive(Debug, Clone, Serialize)]
struct SummaryRecord {
    run: String,
    #[serde(flatten)]
    summary: RunSummary,
    base_qp: Option<i32>,
}

struct Finished {
    name: String,
    base_qp: Option<i32>,
    result: RunResult,
}

/// One independent unit of work: either a single run or a fixed-QP run
/// followed by the rate-controlled runs that take its rate as their target.
enum Job {
    Fixed { qp: i32, derived: Vec<ModeArg> },
    Target { mode: ModeArg, index: usize, target: f64 },
}

fn plan_jobs(a: &SimulateArgs) -> CliResult<Vec<Job>> {
    let mut modes = a.modes.clone();
    modes.dedup();
    let rc: Vec<ModeArg> = modes.iter().copied().filter(|&m| m != ModeArg::FixedQp).collect();
    let fixed = modes.contains(&ModeArg::FixedQp);
    for &qp in &a.qp {
        check_qp(qp)?;
    }
    if let Some(t) = a.targets.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(CliError::Usage(format!("target {t} must be a positive bit-rate")));
    }
    if fixed && a.qp.is_empty() {
        return Err(CliError::Usage("fixed_qp needs --qp".into()));
    }
    if a.derive_targets {
        if !fixed {
            return Err(CliError::Usage("--derive-targets needs fixed_qp among the modes".into()));
        }
        if !a.targets.is_empty() {
            return Err(CliError::Usage("--derive-targets and --targets are exclusive".into()));
        }
    } else if !rc.is_empty() && a.targets.is_empty() {
        return Err(CliError::Usage("rate-controlled modes need --targets or --derive-targets".into()));
    }
    if a.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let mut jobs: Vec<Job> = Vec::new();
    if fixed {
        for &qp in &a.qp {
            let derived = if a.derive_targets { rc.clone() } else { Vec::new() };
            jobs.push(Job::Fixed { qp, derived });
        }
    }
    if !a.derive_targets {
        for &mode in &rc {
            for (index, &target) in a.targets.iter().enumerate() {
                jobs.push(Job::Target { mode, index, target });
            }
        }
    }
    Ok(jobs)
}

fn rc_mode(mode: ModeArg, target_bps: f64) -> RunMode {
    match mode {
        ModeArg::DefaultRc => RunMode::DefaultRc { target_bps },
        _ => RunMode::ProposedRc { target_bps },
    }
}

fn simulate(a: SimulateArgs) -> CliResult<()> {
    let jobs = plan_jobs(&a)?;
    let loaded = a.source.load()?;
    let (frames, cfg, params) = (&loaded.frames, &loaded.resolved.sequence, &loaded.params);
    let run_job = |job: &Job| -> anyhow::Result<Vec<Finished>> {
        let run = |mode: RunMode| run_sequence(frames, cfg, mode, params).map_err(|e| anyhow!("{} run: {e}", mode.name()));
        match *job {
            Job::Fixed { qp, ref derived } => {
                let fixed = run(RunMode::FixedQp { qp })?;
                let target = fixed.summary.actual_bps;
                let mut out = vec![Finished {
                    name: format!("fixed_qp_qp{qp}"),
                    base_qp: Some(qp),
                    result: fixed,
                }];
                for &m in derived {
                    out.push(Finished {
                        name: format!("{}_qp{qp}", m.name()),
                        base_qp: Some(qp),
                        result: run(rc_mode(m, target))?,
                    });
                }
                Ok(out)
            }
            Job::Target { mode, index, target } => Ok(vec![Finished {
                name: format!("{}_t{}", mode.name(), index + 1),
                base_qp: None,
                result: run(rc_mode(mode, target))?,
            }]),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .context("starting worker threads")?;
    let results: Vec<anyhow::Result<Vec<Finished>>> = pool.install(|| jobs.par_iter().map(run_job).collect());

    let mut out = ArtifactDir::create(&a.out_dir)?;
    let mut summaries = Vec::new();
    for r in results {
        for f in r? {
            let mut csv = Vec::new();
            write_frames_csv(&f.result.records_by_poc(), &mut csv).map_err(|e| CliError::Data(anyhow!(e)))?;
            out.write(&format!("frames_{}.csv", f.name), &csv)?;
            if !f.result.plan.is_empty() {
                let mut plan = Vec::new();
                write_plan_csv(&f.result.plan, &mut plan).map_err(|e| CliError::Data(anyhow!(e)))?;
                out.write(&format!("plan_{}.csv", f.name), &plan)?;
            }
            summaries.push(SummaryRecord {
                run: f.name,
                summary: f.result.summary,
                base_qp: f.base_qp,
            });
        }
    }
    let text = to_json_text(&summaries)?;
    out.write("summary.json", text.as_bytes())?;
    let config = json!({
        "run": loaded.resolved,
        "modes": a.modes.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "qp": a.qp,
        "targets": a.targets,
        "derive_targets": a.derive_targets,
    });
    out.commit(RunManifest::new("simulate", loaded.resolved.seed, config, loaded.inputs))?;
    print!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct ProbeFit {
    probe_qp: i32,
    rows: usize,
    pi: Option<f64>,
    r_squared: Option<f64>,
    pi_available: bool,
}

fn probe(a: ProbeArgs) -> CliResult<()> {
    check_qp(a.probe_qp)?;
    check_qp(a.ref_qp_min)?;
    check_qp(a.ref_qp_max)?;
    if a.ref_qp_min > a.ref_qp_max {
        return Err(CliError::Usage(format!("empty reference range [{}, {}]", a.ref_qp_min, a.ref_qp_max)));
    }
    let loaded = a.source.load()?;
    let r = dependency_probe(&loaded.frames, &loaded.params.encoder, a.probe_qp, a.ref_qp_min..=a.ref_qp_max)
        .map_err(|e| CliError::Data(anyhow!(e)))?;
    let mut csv = String::from("ref_qp,ref_mse,cur_bits,cur_mse,cur_rd_cost\n");
    for row in &r.rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.ref_qp,
            fmt6(row.ref_mse),
            fmt6(row.cur_bits),
            fmt6(row.cur_mse),
            fmt6(row.cur_rd_cost)
        ));
    }
    let fit = ProbeFit {
        probe_qp: a.probe_qp,
        rows: r.rows.len(),
        pi: r.pi,
        r_squared: r.r_squared,
        pi_available: r.pi.is_some(),
    };
    let fit_text = to_json_text(&fit)?;
    match &a.out_dir {
        Some(dir) => {
            let mut out = ArtifactDir::create(dir)?;
            out.write("probe.csv", csv.as_bytes())?;
            out.write("probe.json", fit_text.as_bytes())?;
            let config = json!({
                "run": loaded.resolved,
                "probe_qp": a.probe_qp,
                "ref_qp_min": a.ref_qp_min,
                "ref_qp_max": a.ref_qp_max,
            });
            out.commit(RunManifest::new("probe-dependency", loaded.resolved.seed, config, loaded.inputs))?;
        }
        None => {
            print!("{csv}");
            match r.pi {
                Some(pi) => eprintln!("pi = {}", fmt6(pi)),
                None => eprintln!("pi unavailable: the probe has no slope information"),
            }
        }
    }
    Ok(())
}
