//! One-dimensional quadrature: Gauss–Legendre rules, adaptive
//! Gauss–Kronrod (7/15) and a power substitution that removes an algebraic
//! singularity `|V - v0|^{-s}` at an interior split point.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use crate::{Error, Result};

/// `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let nf = n as f64;
        for i in 0..n {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d.is_finite() {
                dp = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of the Kronrod–Gauss differences over the final partition.
    pub error: f64,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive 15-point Gauss–Kronrod: repeatedly bisects the piece
/// with the largest error estimate until the total estimate is `<= abs_tol`.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let (value, error) = kronrod15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let mut total_value = value;
    let mut total_error = error;
    while total_error > abs_tol {
        if heap.len() >= max_intervals {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                iterations: heap.len(),
                residual: total_error,
            });
        }
        let worst = heap.pop().unwrap();
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature (interval underflow)",
                iterations: heap.len(),
                residual: total_error,
            });
        }
        let (v1, e1) = kronrod15(&mut f, worst.a, m);
        let (v2, e2) = kronrod15(&mut f, m, worst.b);
        total_value += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: worst.b, value: v2, error: e2 });
        if !total_value.is_finite() {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature (non-finite integrand)",
                iterations: heap.len(),
                residual: f64::INFINITY,
            });
        }
    }
    // Resum to shed accumulated cancellation in the running total.
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Integral {
        value,
        error,
        intervals: heap.len(),
    })
}

/// Splits `[a, b]` at `v0` (clamped into the interval) and substitutes
/// `V = v0 ± t^p`, `p = 1/(1 - s)`, on each side, which turns an
/// `|V - v0|^{-s}` singularity into a bounded integrand.
///
/// The callback receives the signed offset `V - v0` rather than `V` so that
/// offsets far below the spacing of doubles near `v0` are not lost.
/// `integrate_side(g, t_max)` must return `∫_0^{t_max} g(t) dt`.
pub fn split_power<F, I>(a: f64, b: f64, v0: f64, s: f64, mut f: F, mut integrate_side: I) -> Result<f64>
where
    F: FnMut(f64) -> f64,
    I: FnMut(&mut dyn FnMut(f64) -> f64, f64) -> Result<f64>,
{
    if !(0.0..1.0).contains(&s) {
        return Err(Error::Domain { what: "s", value: s });
    }
    let v0 = v0.clamp(a, b);
    let p = 1.0 / (1.0 - s);
    let mut total = 0.0;
    for (sign, length) in [(1.0, b - v0), (-1.0, v0 - a)] {
        if length <= 0.0 {
            continue;
        }
        let t_max = libm::pow(length, 1.0 - s);
        let mut g = |t: f64| {
            let tp = libm::pow(t, p);
            f(sign * tp) * p * libm::pow(t, p - 1.0)
        };
        total += integrate_side(&mut g, t_max)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in 1..=20 {
            let rule = GaussLegendre::new(n);
            assert!((rule.weights().iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for k in 0..(2 * n) {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let got = rule.integrate(-1.0, 1.0, |x| x.powi(k as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} k={k}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn adaptive_smooth_and_oscillatory() {
        let r = adaptive(|x| x.sin(), 0.0, PI, 1e-12, 1000).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        let r = adaptive(|x| (50.0 * x).cos(), 0.0, 1.0, 1e-12, 1000).unwrap();
        assert!((r.value - 50f64.sin() / 50.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_reports_failure() {
        let err = adaptive(|x| 1.0 / x, 0.0, 1.0, 1e-10, 50).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn power_split_integrates_interior_singularity() {
        // ∫_{-1}^{1} |V - 0.3|^{-0.9} dV = (1.3^{0.1} + 0.7^{0.1}) / 0.1
        let exact = (1.3f64.powf(0.1) + 0.7f64.powf(0.1)) / 0.1;
        let got = split_power(-1.0, 1.0, 0.3, 0.9, |off| off.abs().powf(-0.9), |g, t| {
            adaptive(g, 0.0, t, 1e-13, 1000).map(|r| r.value)
        })
        .unwrap();
        assert!((got - exact).abs() < 1e-10, "{got} vs {exact}");

        let rule = GaussLegendre::new(8);
        let got = split_power(-1.0, 1.0, 0.3, 0.9, |off| off.abs().powf(-0.9), |g, t| {
            Ok(rule.integrate(0.0, t, g))
        })
        .unwrap();
        assert!((got - exact).abs() < 1e-10);
    }

    #[test]
    fn split_point_outside_interval_is_clamped() {
        let exact = (3f64.powf(0.5) - 1.0) / 0.5; // ∫_{-1}^{1} (2 - V)^{-1/2}
        let got = split_power(-1.0, 1.0, 2.0, 0.5, |off| (2.0 - (1.0 + off)).powf(-0.5), |g, t| {
            adaptive(g, 0.0, t, 1e-13, 1000).map(|r| r.value)
        })
        .unwrap();
        assert!((got - exact).abs() < 1e-11);
    }
}
