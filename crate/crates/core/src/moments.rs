//! Fractional moments `E|G_z^(Λ)(x,y)|^s` by Monte Carlo over seeded disorder,
//! and the bounds they are checked against:
//!
//! - the single-site bound `(1/2) ∫_{-1}^{1} |λV - B|^{-s} dV <= 1/((1-s) λ^s)`,
//! - the depleted resolvent bound, pointwise in the environment of `x`,
//! - the SAW ceiling `E|G(x,y)|^{s_crit} <= ln(λ) C_{γ(λ)}(x - y)`,
//! - exponential decay at least at the rate `m_ε(λ)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::anderson::{substream, uniform_variate, DisorderSample, GreenSolver, Region};
use crate::critical::{gamma_big, gamma_fn, mass, s_crit};
use crate::quadrature::{adaptive, split_power, GaussLegendre};
use crate::saw::{correlation, nth_root, LatticePoint, WalkSeries};
use crate::{Error, Executor, Result};

/// Which bound an estimate was compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CeilingKind {
    SawTheorem,
    Apriori,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub s: f64,
    pub z: Complex64,
    pub x: LatticePoint,
    pub y: LatticePoint,
    pub n_samples: usize,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; `+inf` for a single sample.
    pub stderr: f64,
    /// `+inf` when `ceiling_kind` is `None`.
    pub ceiling: f64,
    pub ceiling_kind: CeilingKind,
}

impl MomentEstimate {
    /// `ceiling - (mean - k stderr)`; nonnegative when the bound is not
    /// rejected at `k` sigma.
    pub fn margin(&self, k_sigma: f64) -> f64 {
        self.ceiling - (self.mean - k_sigma * self.stderr)
    }

    pub fn within_ceiling(&self, k_sigma: f64) -> bool {
        self.margin(k_sigma) >= 0.0
    }

    pub fn distance(&self) -> u32 {
        self.x.sub(&self.y).l1_norm()
    }
}

/// `(mean, stderr)` accumulated in index order.
pub fn summarize(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, f64::INFINITY);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, libm::sqrt(var / n as f64))
}

fn check_moment_inputs(s: f64, z: Complex64, n_samples: usize) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain { what: "s", value: s });
    }
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be at least 1"));
    }
    if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
        return Err(Error::Domain { what: "Im z", value: z.im });
    }
    Ok(())
}

/// `|G^(k)(x_i, y)|^s` for every target `x_i` and sample `k`, indexed
/// `[target][sample]`. Sample `k` uses disorder seed `substream(seed, k)`.
#[allow(clippy::too_many_arguments)]
pub fn moment_samples<E: Executor>(
    exec: &E,
    region: &Region,
    lambda: f64,
    s: f64,
    z: Complex64,
    y: &LatticePoint,
    targets: &[LatticePoint],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    check_moment_inputs(s, z, n_samples)?;
    for p in core::iter::once(y).chain(targets) {
        if p.dimension() != region.dimension() {
            return Err(Error::DimensionMismatch {
                expected: region.dimension(),
                found: p.dimension(),
            });
        }
    }
    let yi = region.site(y);
    let xs: Vec<Option<usize>> = targets.iter().map(|x| region.site(x)).collect();
    let per_sample = exec.map(n_samples, |k| -> Result<Vec<f64>> {
        let Some(yi) = yi else {
            return Ok(vec![0.0; xs.len()]);
        };
        let sample_seed = substream(seed, k as u64);
        let sample = DisorderSample::generate(region, sample_seed);
        let column = GreenSolver::for_region(region, lambda, &sample, z)
            .and_then(|solver| solver.column(yi))
            .map_err(|e| Error::SampleFailed {
                index: k,
                seed: sample_seed,
                source: alloc::boxed::Box::new(e),
            })?
            .0;
        Ok(xs
            .iter()
            .map(|xi| xi.map_or(0.0, |i| libm::pow(column[i].norm(), s)))
            .collect())
    });
    let mut out = vec![Vec::with_capacity(n_samples); targets.len()];
    for row in per_sample {
        for (dst, v) in out.iter_mut().zip(row?) {
            dst.push(v);
        }
    }
    Ok(out)
}

/// Monte Carlo estimate of `E|G_z^(Λ)(x,y)|^s` over `n_samples` seeded samples.
#[allow(clippy::too_many_arguments)]
pub fn estimate_moment<E: Executor>(
    exec: &E,
    region: &Region,
    lambda: f64,
    s: f64,
    z: Complex64,
    x: &LatticePoint,
    y: &LatticePoint,
    n_samples: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    let values = moment_samples(exec, region, lambda, s, z, y, core::slice::from_ref(x), n_samples, seed)?;
    let (mean, stderr) = summarize(&values[0]);
    Ok(MomentEstimate {
        s,
        z,
        x: x.clone(),
        y: y.clone(),
        n_samples,
        mean,
        stderr,
        ceiling: f64::INFINITY,
        ceiling_kind: CeilingKind::None,
    })
}

/// Absolute tolerance of the single-site integral.
pub const APRIORI_TOLERANCE: f64 = 1e-10;

/// `1 / ((1 - s) λ^s)`
pub fn apriori_bound(lambda: f64, s: f64) -> Result<f64> {
    gamma_big(s, lambda)
}

/// `(1/2) ∫_{-1}^{1} |λV - B|^{-s} dV` by adaptive Gauss–Kronrod after
/// splitting at `Re(B)/λ` and removing the algebraic singularity.
pub fn apriori_integral(lambda: f64, s: f64, b: Complex64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain { what: "s", value: s });
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain { what: "lambda", value: lambda });
    }
    let (br, bi) = (b.re / lambda, b.im / lambda);
    let v0 = br.clamp(-1.0, 1.0);
    let shift = v0 - br;
    let prefactor = libm::pow(lambda, -s);
    let integrand = |off: f64| {
        let d = off + shift;
        prefactor * libm::pow(d * d + bi * bi, -0.5 * s)
    };
    let integral = split_power(-1.0, 1.0, v0, s, integrand, |g, t| {
        adaptive(g, 0.0, t, 0.25 * APRIORI_TOLERANCE, 4000).map(|r| r.value)
    })?;
    Ok(0.5 * integral)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AprioriCheck {
    pub lambda: f64,
    pub s: f64,
    pub bound: f64,
    /// `integral / bound` per grid point.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

impl AprioriCheck {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.max_ratio <= 1.0 + rel_tol
    }
}

pub fn check_apriori(lambda: f64, s: f64, grid: &[Complex64]) -> Result<AprioriCheck> {
    let bound = apriori_bound(lambda, s)?;
    let ratios = grid
        .iter()
        .map(|&b| apriori_integral(lambda, s, b).map(|v| v / bound))
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(AprioriCheck {
        lambda,
        s,
        bound,
        ratios,
        max_ratio,
    })
}

/// `n` points uniform in the disc `|B| <= radius`, drawn from `seed`.
pub fn disc_grid(seed: u64, n: usize, radius: f64) -> Vec<Complex64> {
    (0..n as u64)
        .map(|k| {
            let stream = substream(seed, k);
            let u = 0.5 * (uniform_variate(stream, 0) + 1.0);
            let v = 0.5 * (uniform_variate(stream, 1) + 1.0);
            Complex64::from_polar(radius * libm::sqrt(u), 2.0 * PI * v)
        })
        .collect()
}

/// One environment of the conditional depleted resolvent bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrbEnvironment {
    pub seed: u64,
    /// `(1/2) ∫ |G^(Λ)(x,y)|^s dω(x)` by quadrature
    pub lhs: f64,
    /// `Γ(s) Σ_{x'} |G^(Λ\{x})(x',y)|^s`
    pub rhs: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrbCheck {
    pub environments: Vec<DrbEnvironment>,
    pub passed: bool,
}

pub const DRB_TOLERANCE: f64 = 1e-6;

/// Checks the depleted resolvent bound for `n_env` environments (all
/// potentials except `ω(x)`), averaging over `ω(x)` with `n_omega_x`
/// Gauss–Legendre nodes on each side of the effective pole `Re(B)/λ`.
#[allow(clippy::too_many_arguments)]
pub fn check_drb_conditional<E: Executor>(
    exec: &E,
    region: &Region,
    lambda: f64,
    s: f64,
    z: Complex64,
    x: &LatticePoint,
    y: &LatticePoint,
    n_omega_x: usize,
    n_env: usize,
    seed: u64,
) -> Result<DrbCheck> {
    let gamma = gamma_big(s, lambda)?;
    if n_omega_x == 0 || n_env == 0 {
        return Err(Error::InvalidInput("need at least one node and one environment"));
    }
    let xi = region.site(x).ok_or(Error::OutsideRegion)?;
    let yi = region.site(y).ok_or(Error::OutsideRegion)?;
    if xi == yi {
        return Err(Error::InvalidInput("depleted resolvent bound needs x != y"));
    }
    let depleted = region.without(x)?;
    let neighbours: Vec<usize> = region
        .neighbors(xi)
        .map(|site| depleted.site(&region.point(site)).ok_or(Error::OutsideRegion))
        .collect::<Result<_>>()?;
    let y_depleted = depleted.site(y).ok_or(Error::OutsideRegion)?;
    let rule = GaussLegendre::new(n_omega_x);

    let results = exec.map(n_env, |e| -> Result<DrbEnvironment> {
        let env_seed = substream(seed, e as u64);
        let sample = DisorderSample::generate(region, env_seed);

        let rhs = if neighbours.is_empty() {
            0.0
        } else {
            let solver = GreenSolver::for_region(&depleted, lambda, &sample, z)?;
            let col = solver.column(y_depleted)?.0;
            gamma * neighbours.iter().map(|&j| libm::pow(col[j].norm(), s)).sum::<f64>()
        };

        // Effective pole: G(x,x) = 1/(λω(x) - B) with B independent of ω(x).
        let w0 = sample.at_cell(region.cell(xi));
        let gxx = GreenSolver::for_region(region, lambda, &sample, z)?.column(xi)?.0[xi];
        let b = lambda * w0 - gxx.inv();
        let v0 = (b.re / lambda).clamp(-1.0, 1.0);

        let mut failure = None;
        let integrand = |off: f64| {
            let w = (v0 + off).clamp(-1.0, 1.0);
            let value = sample
                .with_value(region, x, w)
                .and_then(|varied| GreenSolver::for_region(region, lambda, &varied, z))
                .and_then(|solver| solver.column(yi));
            match value {
                Ok((col, _)) => libm::pow(col[xi].norm(), s),
                Err(err) => {
                    failure.get_or_insert(err);
                    0.0
                }
            }
        };
        let lhs = 0.5 * split_power(-1.0, 1.0, v0, s, integrand, |g, t| Ok(rule.integrate(0.0, t, g)))?;
        if let Some(err) = failure {
            return Err(err);
        }
        Ok(DrbEnvironment {
            seed: env_seed,
            lhs,
            rhs,
            passed: lhs <= rhs + DRB_TOLERANCE,
        })
    });
    let environments = results.into_iter().collect::<Result<Vec<_>>>()?;
    let passed = environments.iter().all(|e| e.passed);
    Ok(DrbCheck { environments, passed })
}

/// How a member of a region family was derived from the box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegionKind {
    FullBox,
    SingleDeletion(LatticePoint),
    /// Sites with negative last coordinate removed.
    HalfBox,
    /// Supplied by the caller.
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub kind: RegionKind,
    pub region: Region,
}

/// Full box, `single_deletions` boxes with one random site removed (never a
/// `protected` site), and the half box.
pub fn standard_family(
    dimension: usize,
    half_width: usize,
    single_deletions: usize,
    seed: u64,
    protected: &[LatticePoint],
) -> Result<Vec<FamilyMember>> {
    let full = Region::cube(dimension, half_width)?;
    let mut family = vec![FamilyMember {
        kind: RegionKind::FullBox,
        region: full.clone(),
    }];
    let mut chosen: Vec<usize> = Vec::new();
    let mut draw = 0u64;
    while chosen.len() < single_deletions && chosen.len() + protected.len() < full.len() {
        let u = 0.5 * (uniform_variate(seed, draw) + 1.0);
        draw += 1;
        let site = ((u * full.len() as f64) as usize).min(full.len() - 1);
        let point = full.point(site);
        if chosen.contains(&site) || protected.contains(&point) {
            continue;
        }
        chosen.push(site);
        family.push(FamilyMember {
            region: full.without(&point)?,
            kind: RegionKind::SingleDeletion(point),
        });
    }
    let lower: Vec<LatticePoint> = (0..full.len())
        .map(|site| full.point(site))
        .filter(|p| p.coords()[dimension - 1] < 0)
        .collect();
    family.push(FamilyMember {
        kind: RegionKind::HalfBox,
        region: Region::with_deleted(dimension, half_width, &lower)?,
    });
    Ok(family)
}

/// Estimate for one (region, pair) against the SAW ceiling.
#[derive(Debug, Clone, PartialEq)]
pub struct CeilingCheck {
    /// Index into the region family.
    pub member: usize,
    pub estimate: MomentEstimate,
    /// Rejected at 3 sigma: `mean - 3 stderr > ceiling`.
    pub passed: bool,
}

/// One-sided significance used for ceiling checks.
pub const CEILING_SIGMAS: f64 = 3.0;

/// Runs every pair on every family member at `s = s_crit(λ)` and compares
/// with `ln(λ) C_{γ(λ)}(x - y)` (partial sum plus rigorous tail).
///
/// The same disorder seeds are used on every member and pair.
#[allow(clippy::too_many_arguments)]
pub fn check_theorem_ceiling<E: Executor>(
    exec: &E,
    family: &[FamilyMember],
    lambda: f64,
    z: Complex64,
    pairs: &[(LatticePoint, LatticePoint)],
    n_samples: usize,
    seed: u64,
    series: &WalkSeries,
) -> Result<Vec<CeilingCheck>> {
    let gamma = gamma_fn(lambda)?;
    let s = s_crit(lambda)?;
    let ln_lambda = libm::log(lambda);
    let origin = LatticePoint::origin(series.dimension());
    if !correlation(series, gamma, &origin)?.converged() {
        let n = series.max_length();
        let growth = if n == 0 { f64::INFINITY } else { nth_root(series.totals()[n], n) };
        return Err(Error::CeilingNotComputable { ratio: gamma * growth });
    }
    let ceilings = pairs
        .iter()
        .map(|(x, y)| Ok(ln_lambda * correlation(series, gamma, &x.sub(y))?.bound.upper()))
        .collect::<Result<Vec<f64>>>()?;

    // group pairs sharing y so one solve serves all of them
    let mut groups: Vec<(LatticePoint, Vec<usize>)> = Vec::new();
    for (i, (_, y)) in pairs.iter().enumerate() {
        match groups.iter_mut().find(|(gy, _)| gy == y) {
            Some((_, members)) => members.push(i),
            None => groups.push((y.clone(), vec![i])),
        }
    }

    let mut out: Vec<Option<CeilingCheck>> = vec![None; family.len() * pairs.len()];
    for (m, member) in family.iter().enumerate() {
        for (y, idx) in &groups {
            let targets: Vec<LatticePoint> = idx.iter().map(|&i| pairs[i].0.clone()).collect();
            let values = moment_samples(exec, &member.region, lambda, s, z, y, &targets, n_samples, seed)?;
            for (&i, vals) in idx.iter().zip(values) {
                let (mean, stderr) = summarize(&vals);
                let estimate = MomentEstimate {
                    s,
                    z,
                    x: pairs[i].0.clone(),
                    y: y.clone(),
                    n_samples,
                    mean,
                    stderr,
                    ceiling: ceilings[i],
                    ceiling_kind: CeilingKind::SawTheorem,
                };
                out[m * pairs.len() + i] = Some(CeilingCheck {
                    member: m,
                    passed: estimate.within_ceiling(CEILING_SIGMAS),
                    estimate,
                });
            }
        }
    }
    Ok(out.into_iter().flatten().collect())
}

/// For each pair index, the family member with the largest mean (the
/// finite-family stand-in for the supremum over regions).
pub fn sup_over_family(checks: &[CeilingCheck], n_pairs: usize) -> Vec<&CeilingCheck> {
    (0..n_pairs)
        .filter_map(|i| {
            checks
                .iter()
                .skip(i)
                .step_by(n_pairs)
                .max_by(|a, b| a.estimate.mean.total_cmp(&b.estimate.mean))
        })
        .collect()
}

/// Weighted least-squares fit of `ln E|G|^s ≈ ln A - m |x - y|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub distances: Vec<f64>,
    pub log_moments: Vec<f64>,
    pub weights: Vec<f64>,
    pub fitted_rate: f64,
    pub rate_stderr: f64,
    pub fitted_prefactor: f64,
    /// `m_ε(λ)`
    pub reference_rate: f64,
    pub residuals: Vec<f64>,
    pub chi_squared: f64,
}

impl DecayFit {
    /// `fitted_rate >= reference_rate - k_sigma * rate_stderr`
    pub fn dominates(&self, k_sigma: f64) -> bool {
        self.fitted_rate >= self.reference_rate - k_sigma * self.rate_stderr
    }
}

/// Fits the decay of `estimates` in `|x - y|`.
///
/// Points are weighted by `(mean/stderr)^2` (inverse variance of the log)
/// when every standard error is finite and positive, otherwise uniformly.
/// The slope error is inflated by the reduced chi-squared when that exceeds
/// one.
pub fn fit_decay(estimates: &[MomentEstimate], lambda: f64, mu_upper: f64, eps: f64) -> Result<DecayFit> {
    let reference_rate = mass(lambda, mu_upper, eps)?.value;
    let Some(first) = estimates.first() else {
        return Err(Error::InsufficientData("no estimates"));
    };
    if estimates.iter().any(|e| e.s != first.s || e.z != first.z) {
        return Err(Error::InvalidInput("estimates must share s and z"));
    }
    if estimates.iter().any(|e| !(e.mean > 0.0) || !e.mean.is_finite()) {
        return Err(Error::InsufficientData("means must be positive to take logarithms"));
    }
    let distances: Vec<f64> = estimates.iter().map(|e| e.distance() as f64).collect();
    let mut distinct = distances.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientData("need at least three distinct distances"));
    }
    let log_moments: Vec<f64> = estimates.iter().map(|e| libm::log(e.mean)).collect();
    let weighted = estimates
        .iter()
        .all(|e| e.stderr.is_finite() && e.stderr > 0.0);
    let weights: Vec<f64> = estimates
        .iter()
        .map(|e| if weighted { (e.mean / e.stderr) * (e.mean / e.stderr) } else { 1.0 })
        .collect();

    let sw: f64 = weights.iter().sum();
    let xbar = weights.iter().zip(&distances).map(|(w, d)| w * d).sum::<f64>() / sw;
    let ybar = weights.iter().zip(&log_moments).map(|(w, y)| w * y).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((w, d), y) in weights.iter().zip(&distances).zip(&log_moments) {
        sxx += w * (d - xbar) * (d - xbar);
        sxy += w * (d - xbar) * (y - ybar);
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let residuals: Vec<f64> = distances
        .iter()
        .zip(&log_moments)
        .map(|(d, y)| y - (intercept + slope * d))
        .collect();
    let chi_squared: f64 = weights.iter().zip(&residuals).map(|(w, r)| w * r * r).sum();
    let dof = (estimates.len() - 2) as f64;
    let reduced = chi_squared / dof;
    let variance = if weighted {
        reduced.max(1.0) / sxx
    } else {
        reduced / sxx
    };
    Ok(DecayFit {
        distances,
        log_moments,
        weights,
        fitted_rate: -slope,
        rate_stderr: libm::sqrt(variance),
        fitted_prefactor: libm::exp(intercept),
        reference_rate,
        residuals,
        chi_squared,
    })
}
