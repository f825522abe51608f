//! Run configuration: a JSON file overlaid by command-line flags, resolved
//! against per-command defaults and validated before dispatch.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anderson_core::critical::{s_crit, TABLE_ONE_MU};
use anderson_core::saw::{default_max_length, DEFAULT_MEMORY_BUDGET};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Saw,
    Critical,
    Green,
    Verify,
    Moments,
}

/// Lattice point written `1,0,-2` on the command line and `[1,0,-2]` in JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<i32>);

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|c| c.trim().parse::<i32>().map_err(|e| format!("bad coordinate {c:?}: {e}")))
            .collect::<Result<_, _>>()
            .map(Point)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Every user-settable field. Absent fields fall back to the config file,
/// then to the command's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Lattice dimension
    #[arg(long)]
    pub dim: Option<usize>,
    /// Dimensions for `critical`: a range `2..6` or a list `2,3,5`
    #[arg(long)]
    pub dims: Option<String>,
    /// Maximum walk length
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Disorder strength
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Fractional moment exponent (default: 1 - 1/ln lambda)
    #[arg(long)]
    pub s: Option<f64>,
    /// Box half-width: the box is [-L, L]^d
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub half_width: Option<usize>,
    /// Site removed from the box (repeatable), e.g. `--delete 1,0`
    #[arg(long = "delete")]
    pub deleted: Option<Vec<Point>>,
    /// Region and sample as JSON: {"dimension", "L", "deleted", "seed"}
    #[arg(long)]
    pub region: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub z_real: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z_imag: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Upper bound(s) on the connective constant, one per dimension
    #[arg(long, value_delimiter = ',')]
    pub mu: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<Point>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<Point>,
    /// Largest |x - y| for moment estimates
    #[arg(long)]
    pub distances: Option<usize>,
    /// Memory budget for SAW enumeration, bytes
    #[arg(long)]
    pub budget: Option<u64>,
    /// Restrict `verify` to these checks
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<String>>,
    /// Random cases per identity check
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the above; flags win
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($f:ident),*) => {
        Settings { $($f: $top.$f.or($base.$f),)* }
    };
}

impl Settings {
    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Settings) -> Settings {
        overlay!(
            self, base, dim, dims, nmax, lambda, s, half_width, deleted, region, seed, samples, z_real,
            z_imag, eps, mu, x, y, distances, budget, only, trials, format, out, config
        )
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading config {}", path.display()), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::bad_input(format!("config {}: {e}", path.display())))
    }

    /// Loads `--config` (if any) underneath the flags.
    pub fn with_file(self) -> Result<Settings, CliError> {
        match &self.config {
            Some(path) => {
                let file = Settings::from_file(path)?;
                Ok(self.over(file))
            }
            None => Ok(self),
        }
    }
}

/// Region and disorder seed as accepted on input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub dimension: usize,
    #[serde(rename = "L")]
    pub half_width: usize,
    #[serde(default)]
    pub deleted: Vec<Point>,
    #[serde(default)]
    pub seed: u64,
}

pub const VERIFY_CHECKS: [&str; 7] = ["depleted", "expansion", "schur", "apriori", "drb", "ceiling", "decay"];

/// Fully resolved configuration, echoed into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub dimension: usize,
    pub dimensions: Vec<usize>,
    pub n_max: usize,
    pub lambda: f64,
    /// `None` only when `lambda <= e` and no exponent was given.
    pub s: Option<f64>,
    pub s_is_critical: bool,
    #[serde(rename = "L")]
    pub half_width: usize,
    pub deleted: Vec<Point>,
    pub seed: u64,
    pub n_samples: usize,
    pub z_real: f64,
    pub z_imag: f64,
    pub eps: f64,
    /// One per entry of `dimensions`; may be empty for `saw` and `green`.
    pub mu_upper: Vec<f64>,
    pub x: Point,
    pub y: Point,
    pub distances: usize,
    pub budget: u64,
    pub only: Vec<String>,
    pub trials: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn table_mu(d: usize) -> Option<f64> {
    TABLE_ONE_MU.iter().find(|(k, _)| *k == d).map(|&(_, m)| m)
}

fn parse_dims(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::bad_input(format!("--dims {s:?}: expected `a..b` or `a,b,c`"));
    let dims: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if dims.is_empty() {
        return Err(bad());
    }
    Ok(dims)
}

fn positive_finite(what: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::bad_input(format!("{what} must be positive and finite, got {v}")))
    }
}

pub const MAX_DIMENSION: usize = 12;

impl RunConfig {
    pub fn resolve(command: Command, settings: Settings) -> Result<Self, CliError> {
        let settings = settings.with_file()?;
        let region_spec = match &settings.region {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::io(format!("reading region {}", path.display()), e))?;
                Some(
                    serde_json::from_str::<RegionSpec>(&text)
                        .map_err(|e| CliError::bad_input(format!("region {}: {e}", path.display())))?,
                )
            }
            None => None,
        };

        let dimension = settings.dim.or(region_spec.as_ref().map(|r| r.dimension)).unwrap_or(2);
        if !(1..=MAX_DIMENSION).contains(&dimension) {
            return Err(CliError::bad_input(format!("dimension must be in 1..={MAX_DIMENSION}, got {dimension}")));
        }
        let dimensions = match (&settings.dims, command, settings.dim) {
            (Some(s), _, _) => parse_dims(s)?,
            (None, Command::Critical, None) => TABLE_ONE_MU.iter().map(|&(d, _)| d).collect(),
            _ => vec![dimension],
        };
        if let Some(&d) = dimensions.iter().find(|&&d| !(1..=MAX_DIMENSION).contains(&d)) {
            return Err(CliError::bad_input(format!("dimension {d} out of range")));
        }

        let mu_upper = match &settings.mu {
            Some(m) if m.len() == dimensions.len() => m.clone(),
            Some(m) if m.len() == 1 && command != Command::Critical => vec![m[0]],
            Some(m) => {
                return Err(CliError::bad_input(format!(
                    "--mu has {} values for {} dimensions",
                    m.len(),
                    dimensions.len()
                )))
            }
            None if matches!(command, Command::Saw | Command::Green) => {
                dimensions.iter().filter_map(|&d| table_mu(d)).collect()
            }
            None => dimensions
                .iter()
                .map(|&d| {
                    table_mu(d).ok_or_else(|| CliError::bad_input(format!("no default mu for d = {d}; pass --mu")))
                })
                .collect::<Result<_, _>>()?,
        };
        for &m in &mu_upper {
            positive_finite("mu", m)?;
        }

        let lambda = positive_finite("lambda", settings.lambda.unwrap_or(30.0))?;
        let critical = s_crit(lambda).ok();
        let s = settings.s.or(critical);
        if let Some(s) = s {
            if !(s > 0.0 && s < 1.0) {
                return Err(CliError::bad_input(format!("s must lie in (0, 1), got {s}")));
            }
        }
        let s_is_critical = s.is_some() && s == critical;

        let default_l = match command {
            Command::Green => 6,
            Command::Verify => 5,
            _ => 10,
        };
        let half_width = settings
            .half_width
            .or(region_spec.as_ref().map(|r| r.half_width))
            .unwrap_or(default_l);
        let deleted = settings
            .deleted
            .or(region_spec.as_ref().map(|r| r.deleted.clone()))
            .unwrap_or_default();
        for p in &deleted {
            if p.0.len() != dimension {
                return Err(CliError::bad_input(format!("deleted site {p} has the wrong dimension")));
            }
        }
        let seed = settings.seed.or(region_spec.as_ref().map(|r| r.seed)).unwrap_or(0);

        let n_samples = settings.samples.unwrap_or(match command {
            Command::Verify => 400,
            _ => 2000,
        });
        if n_samples == 0 {
            return Err(CliError::bad_input("--samples must be at least 1"));
        }
        let z_real = settings.z_real.unwrap_or(0.0);
        let z_imag = settings.z_imag.unwrap_or(0.01);
        if !(z_real.is_finite() && z_imag.is_finite()) {
            return Err(CliError::bad_input("z must be finite"));
        }
        if matches!(command, Command::Moments | Command::Verify) && z_imag == 0.0 {
            return Err(CliError::bad_input("moments need Im z != 0"));
        }
        let eps = positive_finite("eps", settings.eps.unwrap_or(0.01))?;

        let origin = Point(vec![0; dimension]);
        let x = settings.x.unwrap_or_else(|| origin.clone());
        let y = settings.y.unwrap_or_else(|| origin.clone());
        for (name, p) in [("x", &x), ("y", &y)] {
            if p.0.len() != dimension {
                return Err(CliError::bad_input(format!("{name} = {p} does not have {dimension} coordinates")));
            }
        }
        let distances = settings.distances.unwrap_or(5);
        if command == Command::Moments && !(1..=half_width).contains(&distances) {
            return Err(CliError::bad_input(format!("--distances must lie in 1..=L, got {distances}")));
        }

        let only = settings.only.unwrap_or_else(|| VERIFY_CHECKS.iter().map(|s| s.to_string()).collect());
        if let Some(bad) = only.iter().find(|c| !VERIFY_CHECKS.contains(&c.as_str())) {
            return Err(CliError::bad_input(format!(
                "unknown check {bad:?}; expected one of {}",
                VERIFY_CHECKS.join(", ")
            )));
        }
        let trials = settings.trials.unwrap_or(100);
        if trials == 0 {
            return Err(CliError::bad_input("--trials must be at least 1"));
        }

        Ok(Self {
            command,
            dimension,
            dimensions,
            n_max: settings.nmax.unwrap_or_else(|| default_max_length(dimension)),
            lambda,
            s,
            s_is_critical,
            half_width,
            deleted,
            seed,
            n_samples,
            z_real,
            z_imag,
            eps,
            mu_upper,
            x,
            y,
            distances,
            budget: settings.budget.unwrap_or(DEFAULT_MEMORY_BUDGET),
            only,
            trials,
            format: settings.format.unwrap_or(Format::Json),
            out: settings.out,
        })
    }

    pub fn z(&self) -> anderson_core::Complex64 {
        anderson_core::Complex64::new(self.z_real, self.z_imag)
    }

    pub fn runs(&self, check: &str) -> bool {
        self.only.iter().any(|c| c == check)
    }
}
