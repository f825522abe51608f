//! The `anderson` command-line driver.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use anderson_core::anderson::green;
use anderson_core::critical::{table_one, CriterionReport};
use anderson_core::moments::{moment_samples, standard_family, summarize, FamilyMember, MomentEstimate, RegionKind};
use anderson_core::saw::{connective_upper_bounds, enumerate, LatticePoint, WalkSeries};
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::artifact::{
    write_criterion_csv, write_green_csv, write_moments_csv, write_series_csv, CriterionDoc, DecayFitDoc, Envelope,
    GreenDoc, MomentDoc, WalkSeriesDoc,
};
use crate::config::{Command, Format, RegionSpec, RunConfig, Settings};
use crate::pool::Pool;
use crate::suite::{self, Check, Status};
use crate::{CliError, ExitCode};

#[derive(Debug, Parser)]
#[command(name = "anderson", version, about = "Large-disorder localization toolkit for the Anderson model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Enumerate self-avoiding walks: totals c_n and endpoint counts
    Saw(Settings),
    /// Critical disorder thresholds, one column per dimension
    Critical(Settings),
    /// One Green's function entry G_z(x, y) on a box
    Green(Settings),
    /// Identity and bound checks; exit status 1 if any fails
    Verify(Settings),
    /// Fractional moments along an axis, with ceilings and a decay fit
    Moments(Settings),
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                return ExitCode::BadInput as i32;
            }
            let _ = write!(stdout, "{text}");
            return ExitCode::Success as i32;
        }
    };
    let (command, settings) = match cli.command {
        Sub::Saw(s) => (Command::Saw, s),
        Sub::Critical(s) => (Command::Critical, s),
        Sub::Green(s) => (Command::Green, s),
        Sub::Verify(s) => (Command::Verify, s),
        Sub::Moments(s) => (Command::Moments, s),
    };
    match RunConfig::resolve(command, settings).and_then(|cfg| dispatch(&cfg, stdout, stderr)) {
        Ok(code) => code as i32,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code() as i32
        }
    }
}

pub fn dispatch(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    match cfg.command {
        Command::Saw => cmd_saw(cfg, start, stdout),
        Command::Critical => cmd_critical(cfg, start, stdout),
        Command::Green => cmd_green(cfg, start, stdout),
        Command::Verify => cmd_verify(cfg, start, stdout, stderr),
        Command::Moments => cmd_moments(cfg, start, stdout),
    }
}

type CsvWriter<'a> = &'a dyn Fn(&mut dyn Write) -> Result<(), CliError>;

fn open(path: &PathBuf) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(format!("creating {}", path.display()), e))
}

/// Writes the artifact to `--out` or stdout. CSV output written to a file
/// gets a `<out>.meta.json` sidecar carrying the envelope.
fn emit<T: Serialize>(
    cfg: &RunConfig,
    start: Instant,
    result: T,
    csv: CsvWriter<'_>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let elapsed = start.elapsed().as_secs_f64();
    match (cfg.format, &cfg.out) {
        (Format::Json, None) => Envelope::new(cfg, elapsed, result).write_json(stdout),
        (Format::Json, Some(path)) => {
            let mut f = open(path)?;
            Envelope::new(cfg, elapsed, result).write_json(&mut f)?;
            f.flush().map_err(|e| CliError::io("writing output", e))
        }
        (Format::Csv, None) => csv(stdout),
        (Format::Csv, Some(path)) => {
            let mut f = open(path)?;
            csv(&mut f)?;
            f.flush().map_err(|e| CliError::io("writing output", e))?;
            let mut meta_path = path.clone().into_os_string();
            meta_path.push(".meta.json");
            let mut meta = open(&PathBuf::from(meta_path))?;
            Envelope::new(cfg, elapsed, ()).write_json(&mut meta)?;
            meta.flush().map_err(|e| CliError::io("writing output", e))
        }
    }
}

#[derive(Serialize)]
struct SawResult {
    series: WalkSeriesDoc,
    /// `(n, c_n^{1/n})`, each an upper bound on the connective constant.
    connective_upper_bounds: Vec<(usize, f64)>,
}

fn cmd_saw(cfg: &RunConfig, start: Instant, stdout: &mut dyn Write) -> Result<ExitCode, CliError> {
    let pool = Pool::from_env()?;
    let series = enumerate(&pool, cfg.dimension, cfg.n_max, cfg.budget)?;
    let bounds = if cfg.n_max >= 1 {
        connective_upper_bounds(&series)?.bounds
    } else {
        Vec::new()
    };
    let result = SawResult {
        series: WalkSeriesDoc::from(&series),
        connective_upper_bounds: bounds,
    };
    emit(cfg, start, result, &|w| write_series_csv(&series, w), stdout)?;
    Ok(ExitCode::Success)
}

fn cmd_critical(cfg: &RunConfig, start: Instant, stdout: &mut dyn Write) -> Result<ExitCode, CliError> {
    let pairs: Vec<(usize, f64)> = cfg.dimensions.iter().copied().zip(cfg.mu_upper.iter().copied()).collect();
    let reports: Vec<CriterionReport> = table_one(&pairs)?;
    let docs: Vec<CriterionDoc> = reports.iter().map(CriterionDoc::from).collect();
    emit(cfg, start, docs, &|w| write_criterion_csv(&reports, w), stdout)?;
    Ok(ExitCode::Success)
}

fn region_spec(cfg: &RunConfig) -> RegionSpec {
    RegionSpec {
        dimension: cfg.dimension,
        half_width: cfg.half_width,
        deleted: cfg.deleted.clone(),
        seed: cfg.seed,
    }
}

fn point(p: &crate::config::Point) -> LatticePoint {
    LatticePoint::new(p.0.clone())
}

fn cmd_green(cfg: &RunConfig, start: Instant, stdout: &mut dyn Write) -> Result<ExitCode, CliError> {
    let (region, sample) = region_spec(cfg).build()?;
    let g = green(&region, cfg.lambda, &sample, cfg.z(), &point(&cfg.x), &point(&cfg.y))?;
    emit(cfg, start, GreenDoc::from(&g), &|w| write_green_csv(&g, w), stdout)?;
    Ok(ExitCode::Success)
}

#[derive(Serialize)]
struct MomentsResult {
    estimates: Vec<MomentDoc>,
    ceiling: Check,
    decay: Check,
    fit: Option<DecayFitDoc>,
}

fn series_for(cfg: &RunConfig) -> Result<WalkSeries, CliError> {
    let pool = Pool::from_env()?;
    Ok(enumerate(&pool, cfg.dimension, cfg.n_max, cfg.budget)?)
}

fn cmd_moments(cfg: &RunConfig, start: Instant, stdout: &mut dyn Write) -> Result<ExitCode, CliError> {
    let pool = Pool::from_env()?;
    let Some(s) = cfg.s else {
        return Err(CliError::bad_input("lambda <= e: pass --s explicitly"));
    };
    let (region, _) = region_spec(cfg).build()?;
    let y = point(&cfg.y);
    let pairs: Vec<(LatticePoint, LatticePoint)> = suite::axis_pairs(cfg.dimension, cfg.distances)
        .into_iter()
        .map(|(x, o)| (x.add(&y), o.add(&y)))
        .collect();
    let mu = cfg.mu_upper[0];

    let mut ceiling = Check {
        name: "ceiling",
        status: Status::Skipped,
        cases: 0,
        metric: None,
        threshold: None,
        detail: "only s = s_crit is bound-checked".into(),
    };
    let mut estimates: Vec<MomentEstimate> = Vec::new();
    if cfg.s_is_critical {
        let family = [FamilyMember {
            kind: if region.deleted().next().is_none() {
                RegionKind::FullBox
            } else {
                RegionKind::Custom
            },
            region: region.clone(),
        }];
        let run = suite::theorem_ceiling(&pool, &family, cfg.lambda, mu, cfg.z(), &pairs, cfg.n_samples, cfg.seed, || {
            series_for(cfg)
        })?;
        ceiling = run.check;
        estimates = run.sup;
    }
    if estimates.is_empty() {
        let targets: Vec<LatticePoint> = pairs.iter().map(|p| p.0.clone()).collect();
        let values = moment_samples(&pool, &region, cfg.lambda, s, cfg.z(), &y, &targets, cfg.n_samples, cfg.seed)?;
        for (x, v) in targets.into_iter().zip(values) {
            let (mean, stderr) = summarize(&v);
            estimates.push(MomentEstimate {
                s,
                z: cfg.z(),
                x,
                y: y.clone(),
                n_samples: cfg.n_samples,
                mean,
                stderr,
                ceiling: f64::INFINITY,
                ceiling_kind: anderson_core::moments::CeilingKind::None,
            });
        }
    }
    let (decay, fit) = suite::decay(&estimates, cfg.lambda, mu, cfg.eps)?;
    let result = MomentsResult {
        estimates: estimates.iter().map(MomentDoc::from).collect(),
        ceiling: ceiling.clone(),
        decay,
        fit: fit.as_ref().map(DecayFitDoc::from),
    };
    emit(cfg, start, result, &|w| write_moments_csv(&estimates, w), stdout)?;
    Ok(if ceiling.status == Status::Fail {
        ExitCode::BoundFailure
    } else {
        ExitCode::Success
    })
}

#[derive(Serialize)]
struct VerifyResult {
    passed: bool,
    checks: Vec<Check>,
}

fn write_checks_csv(checks: &[Check], w: &mut dyn Write) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["check", "status", "cases", "metric", "threshold", "detail"])?;
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for c in checks {
        let status = serde_json::to_value(c.status)?.as_str().unwrap_or_default().to_string();
        out.write_record([
            c.name.to_string(),
            status,
            c.cases.to_string(),
            cell(c.metric),
            cell(c.threshold),
            c.detail.clone(),
        ])?;
    }
    out.flush().map_err(|e| CliError::io("writing csv", e))
}

/// Exponents for the single-site bound check.
const APRIORI_EXPONENTS: [f64; 4] = [0.3, 0.5, 0.7, 0.9];

fn cmd_verify(
    cfg: &RunConfig,
    start: Instant,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<ExitCode, CliError> {
    let pool = Pool::from_env()?;
    let (d, l, lambda, z, seed) = (cfg.dimension, cfg.half_width, cfg.lambda, cfg.z(), cfg.seed);
    let mu = cfg.mu_upper[0];
    let mut checks = Vec::new();
    if cfg.runs("depleted") {
        checks.push(suite::depleted_identity(&pool, d, l, lambda, z, cfg.trials, seed)?);
    }
    if cfg.runs("expansion") {
        checks.push(suite::resolvent_expansion(&pool, d, l, lambda, z, cfg.trials, seed)?);
    }
    if cfg.runs("schur") {
        checks.push(suite::schur_independence(&pool, d, l, lambda, z, cfg.trials, seed)?);
    }
    if cfg.runs("apriori") {
        checks.push(suite::apriori(&[lambda], &APRIORI_EXPONENTS, cfg.trials, seed)?);
    }
    if cfg.runs("drb") {
        let s = cfg.s.unwrap_or(0.7);
        checks.push(suite::depleted_bound(&pool, d, l, lambda, s, z, 20, seed)?);
    }
    let mut sup = Vec::new();
    if cfg.runs("ceiling") || cfg.runs("decay") {
        let pairs = suite::axis_pairs(d, cfg.distances.min(l));
        let mut protected: Vec<LatticePoint> = pairs.iter().map(|p| p.0.clone()).collect();
        protected.push(LatticePoint::origin(d));
        let family = standard_family(d, l, 2, seed, &protected)?;
        let run = suite::theorem_ceiling(&pool, &family, lambda, mu, z, &pairs, cfg.n_samples, seed, || series_for(cfg))?;
        if cfg.runs("ceiling") {
            checks.push(run.check);
        }
        sup = run.sup;
    }
    if cfg.runs("decay") {
        checks.push(suite::decay(&sup, lambda, mu, cfg.eps)?.0);
    }
    for c in &checks {
        let _ = writeln!(stderr, "{:<10} {:<8} {}", c.name, format!("{:?}", c.status).to_lowercase(), c.detail);
    }
    let passed = checks.iter().all(|c| c.status != Status::Fail);
    let result = VerifyResult {
        passed,
        checks: checks.clone(),
    };
    emit(cfg, start, result, &|w| write_checks_csv(&checks, w), stdout)?;
    Ok(if passed {
        ExitCode::Success
    } else {
        ExitCode::BoundFailure
    })
}
