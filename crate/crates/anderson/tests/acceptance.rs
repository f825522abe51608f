//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria known to be unattainable as written are listed in
//! `EXPECTED_FAILURES`; the run fails if the observed set of failures differs
//! from that list in either direction.

#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use anderson::pool::Pool;
use anderson::suite::{self, Check};
use anderson_core::anderson::Region;
use anderson_core::critical::{round_up, s_crit, table_one, TABLE_ONE_MU};
use anderson_core::moments::{check_theorem_ceiling, fit_decay, FamilyMember, MomentEstimate, RegionKind, CEILING_SIGMAS};
use anderson_core::saw::{connective_upper_bounds, default_max_length, enumerate, LatticePoint, WalkSeries, DEFAULT_MEMORY_BUDGET};
use anderson_core::{Complex64, Executor, Sequential};

/// The reference table prints 81.7 for d = 4, which μ* = 6.81 does not produce (81.45).
const EXPECTED_FAILURES: &[u32] = &[1];

const Z: Complex64 = Complex64::new(0.0, 0.01);

struct Outcome {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn brute_force(d: usize, max_len: usize) -> Vec<BTreeMap<Vec<i32>, u128>> {
    let mut out = vec![BTreeMap::new(); max_len + 1];
    out[0].insert(vec![0; d], 1);
    for n in 1..=max_len {
        for code in 0..(2 * d).pow(n as u32) {
            let mut c = code;
            let mut path = vec![vec![0i32; d]];
            for _ in 0..n {
                let dir = c % (2 * d);
                c /= 2 * d;
                let mut next = path.last().unwrap().clone();
                next[dir / 2] += if dir.is_multiple_of(2) { 1 } else { -1 };
                path.push(next);
            }
            let mut sorted = path.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() == path.len() {
                *out[n].entry(path.last().unwrap().clone()).or_insert(0) += 1;
            }
        }
    }
    out
}

fn criterion_1() -> (bool, String) {
    let expected_and = [22.8, 50.3, 81.7, 114.1, 148.0];
    let expected_ag = [100.2, 167.0, 238.1, 312.3, 389.1];
    let reports = table_one(&TABLE_ONE_MU).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for (k, r) in reports.iter().enumerate() {
        let and = round_up(r.lambda_and.lambda, 1);
        let ag = round_up(r.lambda_ag.lambda, 1);
        if and != expected_and[k] {
            ok = false;
            notes.push(format!("d={} lambda_And {and} (root {:.4}) != {}", r.dimension, r.lambda_and.lambda, expected_and[k]));
        }
        if ag != expected_ag[k] {
            ok = false;
            notes.push(format!("d={} lambda_AG {ag} != {}", r.dimension, expected_ag[k]));
        }
        if r.max_residual() >= 1e-10 {
            ok = false;
            notes.push(format!("d={} residual {:e}", r.dimension, r.max_residual()));
        }
    }
    let max_res = reports.iter().map(|r| r.max_residual()).fold(0.0, f64::max);
    if ok {
        notes.push(format!("all 10 entries match; max residual {max_res:.1e}"));
    }
    (ok, notes.join("; "))
}

fn criterion_2_3(series: &[WalkSeries]) -> ((bool, String), (bool, String)) {
    let mut ok = true;
    let mut notes = Vec::new();
    for (d, n) in [(2, 8), (3, 6)] {
        let s = enumerate(&Sequential, d, n, DEFAULT_MEMORY_BUDGET).unwrap();
        let brute = brute_force(d, n);
        for (len, counts) in brute.iter().enumerate() {
            if s.totals()[len] != counts.values().sum::<u128>() {
                ok = false;
            }
            for (y, &c) in counts {
                if s.count(&LatticePoint::new(y.clone()), len) != c {
                    ok = false;
                }
            }
        }
        let endpoints: usize = s.endpoints().values().map(|v| v.iter().filter(|&&c| c > 0).count()).sum();
        let brute_endpoints: usize = brute.iter().map(BTreeMap::len).sum();
        ok &= endpoints == brute_endpoints;
        notes.push(format!("d={d} N<={n} brute force matched"));
    }
    for s in series {
        let d = s.dimension() as u128;
        let c = s.totals();
        ok &= c[1] == 2 * d && c[2] == 2 * d * (2 * d - 1);
        let n_max = s.max_length();
        for m in 0..=n_max {
            for n in 0..=(n_max - m) {
                ok &= c[m + n] <= c[m] * c[n];
            }
        }
    }
    notes.push("c_1, c_2 exact and submultiplicativity exact for d=2..6 at default N".into());
    let c2 = (ok, notes.join("; "));

    let s3 = &series[1];
    let n = s3.max_length();
    let (_, root) = *connective_upper_bounds(s3).unwrap().bounds.last().unwrap();
    let trivial = (6.0 * 5f64.powi(n as i32 - 1)).powf(1.0 / n as f64);
    let c3 = (
        root >= 4.7114 && root <= trivial,
        format!("d=3 N={n}: c_N^(1/N) = {root:.6} in [4.7114, {trivial:.6}]"),
    );
    (c2, c3)
}

fn criterion_4(pool: &Pool) -> (bool, String) {
    let lambda = 30.0;
    let checks: Vec<Check> = vec![
        suite::depleted_identity(pool, 2, 5, lambda, Z, 100, 2024).unwrap(),
        suite::resolvent_expansion(pool, 2, 5, lambda, Z, 100, 2024).unwrap(),
        suite::schur_independence(pool, 2, 5, lambda, Z, 50, 2024).unwrap(),
    ];
    let ok = checks.iter().all(Check::passed);
    let detail = checks.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect::<Vec<_>>().join("; ");
    (ok, detail)
}

fn criterion_5() -> (bool, String) {
    let c = suite::apriori(&[10.0, 30.0, 100.0], &[0.3, 0.5, 0.7, 0.9], 100, 77).unwrap();
    (c.passed(), c.detail)
}

/// d = 2, λ = 30, s_crit, L = 10, distances 1..5, n = 2000, full box.
fn ceiling_run<E: Executor>(exec: &E, series: &WalkSeries) -> Vec<MomentEstimate> {
    let family = [FamilyMember {
        kind: RegionKind::FullBox,
        region: Region::cube(2, 10).unwrap(),
    }];
    let pairs = suite::axis_pairs(2, 5);
    check_theorem_ceiling(exec, &family, 30.0, Z, &pairs, 2000, 6, series)
        .unwrap()
        .into_iter()
        .map(|c| c.estimate)
        .collect()
}

fn criterion_6(estimates: &[MomentEstimate]) -> (bool, String) {
    let ok = estimates.iter().all(|e| e.within_ceiling(CEILING_SIGMAS));
    let s = s_crit(30.0).unwrap();
    let rows: Vec<String> = estimates
        .iter()
        .map(|e| format!("r={} {:.3e}±{:.1e} <= {:.3}", e.distance(), e.mean, e.stderr, e.ceiling))
        .collect();
    (ok && estimates.iter().all(|e| e.s == s), rows.join(", "))
}

fn criterion_7(estimates: &[MomentEstimate]) -> (bool, String) {
    let fit = fit_decay(estimates, 30.0, 2.68, 0.01).unwrap();
    (
        fit.dominates(2.0),
        format!(
            "fitted rate {:.4} ± {:.4} vs m_0.01(30) = {:.4}",
            fit.fitted_rate, fit.rate_stderr, fit.reference_rate
        ),
    )
}

fn criterion_8(reference: &[MomentEstimate], series: &WalkSeries) -> (bool, String) {
    let bits = |v: &[MomentEstimate]| -> Vec<(u64, u64)> {
        v.iter().map(|e| (e.mean.to_bits(), e.stderr.to_bits())).collect()
    };
    let one = ceiling_run(&Pool::with_threads(1).unwrap(), series);
    let four = ceiling_run(&Pool::with_threads(4).unwrap(), series);
    let ok = bits(&one) == bits(&four) && bits(&one) == bits(reference);
    (ok, "sequential, 1-thread and 4-thread pools give bit-identical means and stderrs".into())
}

fn record(out: &mut Vec<Outcome>, id: u32, name: &'static str, start: Instant, (passed, detail): (bool, String)) {
    let elapsed = start.elapsed();
    println!(
        "{} criterion {id} ({name}) [{:.2}s]: {detail}",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    out.push(Outcome {
        id,
        name,
        passed,
        detail,
        elapsed,
    });
}

fn main() {
    let mut out = Vec::new();
    let pool = Pool::from_env().unwrap();

    let t = Instant::now();
    record(&mut out, 1, "threshold table", t, criterion_1());

    let t = Instant::now();
    let series: Vec<WalkSeries> = (2..=6)
        .map(|d| enumerate(&pool, d, default_max_length(d), DEFAULT_MEMORY_BUDGET).unwrap())
        .collect();
    let (c2, c3) = criterion_2_3(&series);
    record(&mut out, 2, "SAW exactness", t, c2);
    record(&mut out, 3, "connectivity consistency", Instant::now(), c3);

    let t = Instant::now();
    record(&mut out, 4, "identity suite", t, criterion_4(&pool));

    let t = Instant::now();
    record(&mut out, 5, "a priori bound", t, criterion_5());

    let t = Instant::now();
    let estimates = ceiling_run(&Sequential, &series[0]);
    record(&mut out, 6, "theorem ceiling", t, criterion_6(&estimates));

    let t = Instant::now();
    record(&mut out, 7, "decay-rate dominance", t, criterion_7(&estimates));

    let t = Instant::now();
    record(&mut out, 8, "determinism", t, criterion_8(&estimates, &series[0]));

    let limits = [(1, 1.0), (2, 120.0), (4, 60.0), (5, 30.0), (6, 600.0)];
    for (id, secs) in limits {
        let o = out.iter().find(|o| o.id == id).unwrap();
        if o.elapsed.as_secs_f64() > secs {
            println!("FAIL runtime of criterion {id} ({}): {:.1}s > {secs}s", o.name, o.elapsed.as_secs_f64());
            std::process::exit(1);
        }
    }

    let failed: Vec<u32> = out.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!(
        "acceptance: {}/{} criteria pass; failing: {failed:?}; expected failing: {EXPECTED_FAILURES:?}",
        out.len() - failed.len(),
        out.len()
    );
    if failed != EXPECTED_FAILURES {
        for o in out.iter().filter(|o| !o.passed && !EXPECTED_FAILURES.contains(&o.id)) {
            eprintln!("unexpected failure in criterion {}: {}", o.id, o.detail);
        }
        std::process::exit(1);
    }
}
