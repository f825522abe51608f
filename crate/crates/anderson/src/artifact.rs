//! JSON and CSV encodings of the core results, plus the envelope that every
//! JSON artifact is wrapped in.

use std::collections::BTreeMap;
use std::io::Write;

use anderson_core::anderson::{DisorderSample, GreenEvaluation, Region};
use anderson_core::critical::{round_up, CriterionReport, Root};
use anderson_core::moments::{CeilingKind, DecayFit, MomentEstimate};
use anderson_core::saw::{LatticePoint, WalkSeries};
use serde::{Deserialize, Serialize};

use crate::config::{Point, RegionSpec, RunConfig};
use crate::CliError;

/// Formulas behind every bound an artifact may report.
pub const FORMULAS: [&str; 7] = [
    "gamma(lambda) = e ln(lambda) / lambda",
    "s_crit(lambda) = 1 - 1/ln(lambda)",
    "ceiling(x, y) = ln(lambda) * (sum_{n<=N} gamma^n #S_n(x - y) + tail), tail = rho S/(1 - rho) - rho, rho = gamma^N c_N, S = sum_{j<N} gamma^j c_j",
    "apriori: (1/2) int_{-1}^{1} |lambda V - B|^{-s} dV <= lambda^{-s} / (1 - s)",
    "depleted: (1/2) int |G(x,y)|^s dw(x) <= lambda^{-s}/(1 - s) * sum_{|x'-x|=1} |G^(Lambda minus x)(x', y)|^s",
    "m_eps(lambda) = -ln gamma(lambda) - ln(mu + eps)",
    "threshold: larger root of lambda = a ln(lambda); a = mu e (And), 4 d e (AG), 2 d e (single step), sqrt(2d(2d-1)) e (two step)",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Versions {
    pub anderson: &'static str,
    pub anderson_core: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            anderson: env!("CARGO_PKG_VERSION"),
            anderson_core: anderson_core::VERSION,
        }
    }
}

/// Wrapper for every JSON artifact. Only `wall_clock_seconds` varies between
/// reruns of the same configuration.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<'a, T> {
    pub versions: Versions,
    pub config: &'a RunConfig,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    pub formulas: &'static [&'static str],
    pub result: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(config: &'a RunConfig, wall_clock_seconds: f64, result: T) -> Self {
        Self {
            versions: Versions::current(),
            config,
            seed: config.seed,
            wall_clock_seconds,
            formulas: &FORMULAS,
            result,
        }
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w).map_err(|e| CliError::io("writing output", e))
    }
}

// ---- WalkSeries ----

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointDoc {
    pub point: Vec<i32>,
    pub counts: Vec<String>,
}

/// Counts are decimal strings so that 128-bit values survive JSON readers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSeriesDoc {
    pub dimension: usize,
    pub max_length: usize,
    pub totals: Vec<String>,
    pub endpoints: Vec<EndpointDoc>,
}

fn decimal(counts: &[u128]) -> Vec<String> {
    counts.iter().map(u128::to_string).collect()
}

fn parse_counts(counts: &[String]) -> Result<Vec<u128>, CliError> {
    counts
        .iter()
        .map(|c| c.parse::<u128>().map_err(|e| CliError::Format(format!("count {c:?}: {e}"))))
        .collect()
}

impl From<&WalkSeries> for WalkSeriesDoc {
    fn from(s: &WalkSeries) -> Self {
        Self {
            dimension: s.dimension(),
            max_length: s.max_length(),
            totals: decimal(s.totals()),
            endpoints: s
                .endpoints()
                .iter()
                .map(|(p, c)| EndpointDoc {
                    point: p.coords().to_vec(),
                    counts: decimal(c),
                })
                .collect(),
        }
    }
}

impl WalkSeriesDoc {
    pub fn to_series(&self) -> Result<WalkSeries, CliError> {
        let mut endpoints = BTreeMap::new();
        for e in &self.endpoints {
            let point = LatticePoint::new(e.point.clone());
            if endpoints.insert(point, parse_counts(&e.counts)?).is_some() {
                return Err(CliError::Format(format!("duplicate endpoint {:?}", e.point)));
            }
        }
        Ok(WalkSeries::from_parts(
            self.dimension,
            self.max_length,
            parse_counts(&self.totals)?,
            endpoints,
        )?)
    }
}

pub fn write_series_csv<W: Write>(series: &WalkSeries, w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "c_n"])?;
    for (n, c) in series.totals().iter().enumerate() {
        out.write_record([n.to_string(), c.to_string()])?;
    }
    out.flush().map_err(|e| CliError::io("writing csv", e))
}

// ---- CriterionReport ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootDoc {
    pub a: f64,
    pub lambda: f64,
    /// Rounded up in the first decimal, as printed in tables.
    pub rounded_up: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl From<&Root> for RootDoc {
    fn from(r: &Root) -> Self {
        Self {
            a: r.a,
            lambda: r.lambda,
            rounded_up: round_up(r.lambda, 1),
            residual: r.residual,
            iterations: r.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionDoc {
    pub dimension: usize,
    pub mu_upper: f64,
    pub lambda_and: RootDoc,
    pub lambda_ag: RootDoc,
    pub lambda_intermediate: RootDoc,
    pub lambda_two_step: RootDoc,
}

impl From<&CriterionReport> for CriterionDoc {
    fn from(r: &CriterionReport) -> Self {
        Self {
            dimension: r.dimension,
            mu_upper: r.mu_upper,
            lambda_and: (&r.lambda_and).into(),
            lambda_ag: (&r.lambda_ag).into(),
            lambda_intermediate: (&r.lambda_intermediate).into(),
            lambda_two_step: (&r.lambda_two_step).into(),
        }
    }
}

/// One row per quantity, one column per dimension.
type Row = (&'static str, fn(&CriterionReport) -> String);

pub fn write_criterion_csv<W: Write>(reports: &[CriterionReport], w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["quantity".to_string()];
    header.extend(reports.iter().map(|r| format!("d={}", r.dimension)));
    out.write_record(&header)?;
    let rows: [Row; 5] = [
        ("mu_upper", |r| format!("{}", r.mu_upper)),
        ("lambda_and", |r| format!("{:.1}", round_up(r.lambda_and.lambda, 1))),
        ("lambda_ag", |r| format!("{:.1}", round_up(r.lambda_ag.lambda, 1))),
        ("lambda_intermediate", |r| format!("{:.1}", round_up(r.lambda_intermediate.lambda, 1))),
        ("lambda_two_step", |r| format!("{:.1}", round_up(r.lambda_two_step.lambda, 1))),
    ];
    for (name, cell) in rows {
        let mut record = vec![name.to_string()];
        record.extend(reports.iter().map(cell));
        out.write_record(&record)?;
    }
    out.flush().map_err(|e| CliError::io("writing csv", e))
}

// ---- Region, sample and Green's function ----

impl RegionSpec {
    pub fn build(&self) -> Result<(Region, DisorderSample), CliError> {
        let deleted: Vec<LatticePoint> = self.deleted.iter().map(|p| LatticePoint::new(p.0.clone())).collect();
        let region = Region::with_deleted(self.dimension, self.half_width, &deleted)?;
        let sample = DisorderSample::generate(&region, self.seed);
        Ok((region, sample))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexDoc {
    pub re: f64,
    pub im: f64,
}

impl From<anderson_core::Complex64> for ComplexDoc {
    fn from(z: anderson_core::Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenDoc {
    pub x: Point,
    pub y: Point,
    pub z: ComplexDoc,
    pub value: ComplexDoc,
    pub abs: f64,
    /// Relative residual of the linear solve.
    pub residual: f64,
}

impl From<&GreenEvaluation> for GreenDoc {
    fn from(g: &GreenEvaluation) -> Self {
        Self {
            x: Point(g.x.coords().to_vec()),
            y: Point(g.y.coords().to_vec()),
            z: g.z.into(),
            value: g.value.into(),
            abs: g.value.norm(),
            residual: g.residual,
        }
    }
}

pub fn write_green_csv<W: Write>(g: &GreenEvaluation, w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "y", "re", "im", "abs", "residual"])?;
    let d = GreenDoc::from(g);
    out.write_record([
        d.x.to_string(),
        d.y.to_string(),
        d.value.re.to_string(),
        d.value.im.to_string(),
        d.abs.to_string(),
        d.residual.to_string(),
    ])?;
    out.flush().map_err(|e| CliError::io("writing csv", e))
}

// ---- Moments ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentDoc {
    pub s: f64,
    pub z: ComplexDoc,
    pub x: Point,
    pub y: Point,
    pub distance: u32,
    pub n_samples: usize,
    pub mean: f64,
    /// `null` for a single sample.
    pub stderr: Option<f64>,
    /// `null` when nothing is tested.
    pub ceiling: Option<f64>,
    pub ceiling_kind: String,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn ceiling_kind_name(k: CeilingKind) -> &'static str {
    match k {
        CeilingKind::SawTheorem => "saw_theorem",
        CeilingKind::Apriori => "apriori",
        CeilingKind::None => "none",
    }
}

impl From<&MomentEstimate> for MomentDoc {
    fn from(e: &MomentEstimate) -> Self {
        Self {
            s: e.s,
            z: e.z.into(),
            x: Point(e.x.coords().to_vec()),
            y: Point(e.y.coords().to_vec()),
            distance: e.distance(),
            n_samples: e.n_samples,
            mean: e.mean,
            stderr: finite(e.stderr),
            ceiling: finite(e.ceiling),
            ceiling_kind: ceiling_kind_name(e.ceiling_kind).to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFitDoc {
    pub distances: Vec<f64>,
    pub log_moments: Vec<f64>,
    pub weights: Vec<f64>,
    pub fitted_rate: f64,
    pub rate_stderr: f64,
    pub fitted_prefactor: f64,
    pub reference_rate: f64,
    pub residuals: Vec<f64>,
    pub chi_squared: f64,
    /// Fitted rate at least the reference rate minus two standard errors.
    pub dominates_at_2_sigma: bool,
}

impl From<&DecayFit> for DecayFitDoc {
    fn from(f: &DecayFit) -> Self {
        Self {
            distances: f.distances.clone(),
            log_moments: f.log_moments.clone(),
            weights: f.weights.clone(),
            fitted_rate: f.fitted_rate,
            rate_stderr: f.rate_stderr,
            fitted_prefactor: f.fitted_prefactor,
            reference_rate: f.reference_rate,
            residuals: f.residuals.clone(),
            chi_squared: f.chi_squared,
            dominates_at_2_sigma: f.dominates(2.0),
        }
    }
}

/// `distance,mean,stderr,ceiling`; missing values are empty cells.
pub fn write_moments_csv<W: Write>(estimates: &[MomentEstimate], w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["distance", "mean", "stderr", "ceiling"])?;
    let cell = |v: f64| if v.is_finite() { v.to_string() } else { String::new() };
    for e in estimates {
        out.write_record([e.distance().to_string(), e.mean.to_string(), cell(e.stderr), cell(e.ceiling)])?;
    }
    out.flush().map_err(|e| CliError::io("writing csv", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use anderson_core::saw::enumerate;
    use anderson_core::Sequential;

    #[test]
    fn walk_series_round_trip() {
        let s = enumerate(&Sequential, 3, 5, 1 << 30).unwrap();
        let doc = WalkSeriesDoc::from(&s);
        let text = serde_json::to_string(&doc).unwrap();
        let back: WalkSeriesDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_series().unwrap(), s);
        assert!(text.contains("\"totals\":[\"1\",\"6\",\"30\",\"150\",\"726\",\"3534\"]"));
    }

    #[test]
    fn corrupted_series_is_rejected() {
        let s = enumerate(&Sequential, 2, 3, 1 << 30).unwrap();
        let mut doc = WalkSeriesDoc::from(&s);
        doc.totals[2] = "13".into();
        assert!(doc.to_series().is_err());
        doc.totals[2] = "x".into();
        assert!(matches!(doc.to_series(), Err(CliError::Format(_))));
    }

    #[test]
    fn huge_counts_survive() {
        let big = u128::MAX - 7;
        let c = decimal(&[big]);
        assert_eq!(parse_counts(&c).unwrap(), vec![big]);
    }
}
