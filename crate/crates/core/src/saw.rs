//! Exact self-avoiding walk (SAW) enumeration on the hypercubic lattice `Z^d`.
//!
//! Walks are counted by depth-first backtracking over an occupancy bitmap of
//! the box `[-N, N]^d`. Only walks whose first step is `+e_1` are explored;
//! the full endpoint-resolved table is recovered from the hyperoctahedral
//! symmetry. Counts are exact `u128` values with checked arithmetic.
//!
//! From a [`WalkSeries`] the correlation function
//! `C_gamma(x) = sum_n gamma^n #S_n(x, 0)` and the susceptibility
//! `chi(gamma) = sum_n c_n gamma^n` are evaluated as truncated sums together
//! with a constructive tail bound built from submultiplicativity
//! `c_{m+n} <= c_m c_n`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Executor, Result};

/// Point of `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint(Vec<i32>);

impl LatticePoint {
    pub fn new(coords: Vec<i32>) -> Self {
        Self(coords)
    }

    pub fn origin(dimension: usize) -> Self {
        Self(vec![0; dimension])
    }

    /// `scale * e_axis`.
    pub fn axis(dimension: usize, axis: usize, scale: i32) -> Self {
        let mut coords = vec![0; dimension];
        coords[axis] = scale;
        Self(coords)
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    /// ℓ¹ norm `|x| = sum |x_i|`.
    pub fn l1_norm(&self) -> u32 {
        self.0.iter().map(|c| c.unsigned_abs()).sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// The `2d` nearest neighbours, ordered `+e_1, -e_1, +e_2, ...`.
    pub fn neighbors(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..2 * self.dimension()).map(move |k| {
            let mut coords = self.0.clone();
            coords[k / 2] += if k % 2 == 0 { 1 } else { -1 };
            LatticePoint(coords)
        })
    }
}

impl From<Vec<i32>> for LatticePoint {
    fn from(coords: Vec<i32>) -> Self {
        Self(coords)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Exact SAW counts up to `max_length`.
///
/// `totals[n] = c_n` and `endpoints[y][n] = #S_n(y, 0)`; every point of the
/// ℓ¹ ball of radius `max_length` has an entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkSeries {
    dimension: usize,
    max_length: usize,
    totals: Vec<u128>,
    endpoints: BTreeMap<LatticePoint, Vec<u128>>,
}

impl WalkSeries {
    /// Reassembles a series from stored parts, checking the structural
    /// invariants (lengths, `c_0 = 1`, endpoint sums equal totals).
    pub fn from_parts(
        dimension: usize,
        max_length: usize,
        totals: Vec<u128>,
        endpoints: BTreeMap<LatticePoint, Vec<u128>>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be positive"));
        }
        if totals.len() != max_length + 1 || totals[0] != 1 {
            return Err(Error::InvalidInput("totals must be c_0..c_N with c_0 = 1"));
        }
        let mut sums = vec![0u128; max_length + 1];
        for (point, counts) in &endpoints {
            if point.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: point.dimension(),
                });
            }
            if counts.len() != max_length + 1 {
                return Err(Error::InvalidInput("endpoint counts must have N + 1 entries"));
            }
            for (n, &c) in counts.iter().enumerate() {
                sums[n] = sums[n].checked_add(c).ok_or(Error::Overflow { length: n })?;
            }
        }
        if sums != totals {
            return Err(Error::InvalidInput("endpoint counts do not sum to totals"));
        }
        Ok(Self {
            dimension,
            max_length,
            totals,
            endpoints,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    /// `c_0, ..., c_N`.
    pub fn totals(&self) -> &[u128] {
        &self.totals
    }

    pub fn endpoints(&self) -> &BTreeMap<LatticePoint, Vec<u128>> {
        &self.endpoints
    }

    /// `#S_n(point, 0)`; zero for points outside the stored ball or `n > N`.
    pub fn count(&self, point: &LatticePoint, n: usize) -> u128 {
        self.endpoints
            .get(point)
            .and_then(|counts| counts.get(n).copied())
            .unwrap_or(0)
    }
}

/// Default maximal walk length per dimension.
pub fn default_max_length(dimension: usize) -> usize {
    match dimension {
        0 | 1 => 30,
        2 => 14,
        3 => 10,
        _ => 8,
    }
}

/// Default memory budget for [`enumerate`]: 2 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

/// Box of radius `N` indexed as `sum (x_i + N) side^i`.
struct Geometry {
    dimension: usize,
    max_length: usize,
    side: usize,
    cells: usize,
    /// `+stride_0, -stride_0, +stride_1, ...`
    offsets: Vec<isize>,
    origin: usize,
    /// Box indices of the ℓ¹ ball, sorted.
    ball: Vec<usize>,
    /// Coordinates matching `ball`.
    ball_points: Vec<LatticePoint>,
}

impl Geometry {
    fn new(dimension: usize, max_length: usize) -> Option<Self> {
        let side = 2 * max_length + 1;
        let cells = side.checked_pow(u32::try_from(dimension).ok()?)?;
        let mut offsets = Vec::with_capacity(2 * dimension);
        let mut stride = 1usize;
        for _ in 0..dimension {
            let s = isize::try_from(stride).ok()?;
            offsets.push(s);
            offsets.push(-s);
            stride = stride.checked_mul(side)?;
        }
        let origin = (cells - 1) / 2;
        Some(Self {
            dimension,
            max_length,
            side,
            cells,
            offsets,
            origin,
            ball: Vec::new(),
            ball_points: Vec::new(),
        })
    }

    fn ball_size(&self) -> Option<usize> {
        // Points of the l1 ball of radius N in d dimensions: sum_k 2^k C(d,k) C(N,k).
        let mut total: usize = 0;
        let (d, n) = (self.dimension, self.max_length);
        for k in 0..=d.min(n) {
            let term = binomial(d, k)?.checked_mul(binomial(n, k)?)?.checked_mul(1usize.checked_shl(k as u32)?)?;
            total = total.checked_add(term)?;
        }
        Some(total)
    }

    fn fill_ball(&mut self) {
        let radius = self.max_length as i32;
        let mut coords = vec![-radius; self.dimension];
        let mut entries = Vec::new();
        loop {
            let norm: u32 = coords.iter().map(|c: &i32| c.unsigned_abs()).sum();
            if norm as usize <= self.max_length {
                entries.push((self.index_of(&coords), LatticePoint(coords.clone())));
            }
            // odometer increment, coordinate 0 fastest
            let mut axis = 0;
            loop {
                if axis == self.dimension {
                    entries.sort_by_key(|e| e.0);
                    let (ball, points) = entries.into_iter().unzip();
                    self.ball = ball;
                    self.ball_points = points;
                    return;
                }
                if coords[axis] < radius {
                    coords[axis] += 1;
                    break;
                }
                coords[axis] = -radius;
                axis += 1;
            }
        }
    }

    fn index_of(&self, coords: &[i32]) -> usize {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for &c in coords {
            idx += (c + self.max_length as i32) as usize * stride;
            stride *= self.side;
        }
        idx
    }

    #[inline]
    fn ball_slot(&self, cell: usize) -> usize {
        self.ball
            .binary_search(&cell)
            .expect("walk of length <= N left the l1 ball")
    }
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

struct Bitset(Vec<u64>);

impl Bitset {
    fn new(bits: usize) -> Self {
        Self(vec![0; bits.div_ceil(64)])
    }
    #[inline]
    fn get(&self, i: usize) -> bool {
        self.0[i >> 6] >> (i & 63) & 1 == 1
    }
    #[inline]
    fn set(&mut self, i: usize) {
        self.0[i >> 6] |= 1 << (i & 63);
    }
    #[inline]
    fn clear(&mut self, i: usize) {
        self.0[i >> 6] &= !(1 << (i & 63));
    }
}

/// Per-task tally: `counts[slot * (N + 1) + n]` for walks with first step `+e_1`.
struct Tally {
    stride: usize,
    counts: Vec<u64>,
}

impl Tally {
    fn new(geometry: &Geometry) -> Self {
        let stride = geometry.max_length + 1;
        Self {
            stride,
            counts: vec![0; geometry.ball.len() * stride],
        }
    }

    #[inline]
    fn record(&mut self, geometry: &Geometry, cell: usize, length: usize) {
        self.counts[geometry.ball_slot(cell) * self.stride + length] += 1;
    }
}

fn extend(
    geometry: &Geometry,
    cell: usize,
    length: usize,
    occupied: &mut Bitset,
    tally: &mut Tally,
) {
    tally.record(geometry, cell, length);
    if length == geometry.max_length {
        return;
    }
    for &off in &geometry.offsets {
        let next = cell.wrapping_add_signed(off);
        if !occupied.get(next) {
            occupied.set(next);
            extend(geometry, next, length + 1, occupied, tally);
            occupied.clear(next);
        }
    }
}

/// Self-avoiding prefixes of length `depth` starting `0, +e_1, ...`, in
/// depth-first order. Walks shorter than `depth` are recorded in `head`.
fn prefixes(geometry: &Geometry, depth: usize, head: &mut Tally) -> Vec<Vec<usize>> {
    fn go(
        geometry: &Geometry,
        depth: usize,
        path: &mut Vec<usize>,
        occupied: &mut Bitset,
        head: &mut Tally,
        out: &mut Vec<Vec<usize>>,
    ) {
        let cell = *path.last().unwrap();
        let length = path.len() - 1;
        if length == depth {
            out.push(path.clone());
            return;
        }
        head.record(geometry, cell, length);
        for &off in &geometry.offsets {
            let next = cell.wrapping_add_signed(off);
            if !occupied.get(next) {
                occupied.set(next);
                path.push(next);
                go(geometry, depth, path, occupied, head, out);
                path.pop();
                occupied.clear(next);
            }
        }
    }

    let first = geometry.origin.wrapping_add_signed(geometry.offsets[0]);
    let mut occupied = Bitset::new(geometry.cells);
    occupied.set(geometry.origin);
    occupied.set(first);
    let mut path = vec![geometry.origin, first];
    let mut out = Vec::new();
    go(geometry, depth, &mut path, &mut occupied, head, &mut out);
    out
}

const PREFIX_DEPTH: usize = 4;
const MAX_TASKS: usize = 64;

/// Enumerates all self-avoiding walks of length `<= max_length` in `Z^dimension`.
///
/// Subtrees below fixed-depth prefixes are distributed through `exec` in
/// contiguous chunks; partial tallies are reduced in chunk order so the
/// result is identical for any executor.
pub fn enumerate<E: Executor>(
    exec: &E,
    dimension: usize,
    max_length: usize,
    memory_budget: u64,
) -> Result<WalkSeries> {
    if dimension == 0 {
        return Err(Error::InvalidInput("dimension must be positive"));
    }
    let too_big = Error::BudgetExceeded {
        required: u64::MAX,
        budget: memory_budget,
    };
    let mut geometry = Geometry::new(dimension, max_length).ok_or(too_big.clone())?;
    let ball = geometry.ball_size().ok_or(too_big.clone())? as u128;
    let stride = (max_length + 1) as u128;
    let key_bytes = (dimension * 4 + 64) as u128;
    let tasks = MAX_TASKS as u128 + 1;
    let per_task = geometry.cells as u128 / 8 + ball * stride * 8;
    let required = tasks * per_task + ball * (stride * 16 + key_bytes) + ball * 8;
    if required > memory_budget as u128 {
        return Err(Error::BudgetExceeded {
            required: u64::try_from(required).unwrap_or(u64::MAX),
            budget: memory_budget,
        });
    }
    geometry.fill_ball();
    let geometry = geometry;

    // Walks with first step +e_1, accumulated exactly.
    let slots = geometry.ball.len();
    let mut first_step = vec![0u128; slots * (max_length + 1)];
    if max_length >= 1 {
        let depth = PREFIX_DEPTH.min(max_length);
        let mut head = Tally::new(&geometry);
        let roots = prefixes(&geometry, depth, &mut head);
        let chunk = roots.len().div_ceil(MAX_TASKS).max(1);
        let n_tasks = roots.len().div_ceil(chunk);
        let partials = exec.map(n_tasks, |t| {
            let mut tally = Tally::new(&geometry);
            let mut occupied = Bitset::new(geometry.cells);
            let end = ((t + 1) * chunk).min(roots.len());
            for path in &roots[t * chunk..end] {
                for &c in path {
                    occupied.set(c);
                }
                extend(&geometry, *path.last().unwrap(), depth, &mut occupied, &mut tally);
                for &c in path {
                    occupied.clear(c);
                }
            }
            tally.counts
        });
        for part in core::iter::once(&head.counts).chain(partials.iter()) {
            for (acc, &c) in first_step.iter_mut().zip(part) {
                *acc = acc.checked_add(c as u128).ok_or(Error::Overflow { length: max_length })?;
            }
        }
    }

    // Unfold over the 2d images of +e_1: sigma^{-1}(y) negates coordinate k
    // (for the -e_k image) then swaps coordinates 0 and k.
    let width = max_length + 1;
    let mut endpoints = BTreeMap::new();
    let mut totals = vec![0u128; width];
    for point in &geometry.ball_points {
        let mut counts = vec![0u128; width];
        if point.l1_norm() == 0 {
            counts[0] = 1;
        }
        for axis in 0..dimension {
            for sign in [1, -1] {
                let mut image = point.0.clone();
                image[axis] *= sign;
                image.swap(0, axis);
                let slot = geometry.ball_slot(geometry.index_of(&image));
                for n in 1..width {
                    counts[n] = counts[n]
                        .checked_add(first_step[slot * width + n])
                        .ok_or(Error::Overflow { length: n })?;
                }
            }
        }
        for n in 0..width {
            totals[n] = totals[n].checked_add(counts[n]).ok_or(Error::Overflow { length: n })?;
        }
        endpoints.insert(point.clone(), counts);
    }

    Ok(WalkSeries {
        dimension,
        max_length,
        totals,
        endpoints,
    })
}

/// Truncated generating function with a rigorous tail.
///
/// When `converged`, the exact value lies in
/// `[partial_sum, partial_sum + tail_bound]`; otherwise `tail_bound` is `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesBound {
    pub gamma: f64,
    pub partial_sum: f64,
    pub tail_bound: f64,
    pub converged: bool,
}

impl SeriesBound {
    pub fn upper(&self) -> f64 {
        self.partial_sum + self.tail_bound
    }
}

/// Truncated `C_gamma(point)` for a fixed lattice point.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationValue {
    pub point: LatticePoint,
    pub bound: SeriesBound,
}

impl CorrelationValue {
    pub fn gamma(&self) -> f64 {
        self.bound.gamma
    }
    pub fn partial_sum(&self) -> f64 {
        self.bound.partial_sum
    }
    pub fn tail_bound(&self) -> f64 {
        self.bound.tail_bound
    }
    pub fn converged(&self) -> bool {
        self.bound.converged
    }
}

/// Bound on `sum_{n > N} gamma^n c_n` using `c_n <= c_N^{floor(n/N)} c_{n mod N}`.
///
/// With `rho = gamma^N c_N` and `S = sum_{j<N} gamma^j c_j` the majorant sums
/// to `rho S / (1 - rho) - rho`, finite iff `gamma c_N^{1/N} < 1`.
fn tail(series: &WalkSeries, gamma: f64, partial_sum: f64) -> (f64, bool) {
    let r = series.max_length;
    if gamma == 0.0 {
        return (0.0, true);
    }
    if r == 0 {
        return (f64::INFINITY, false);
    }
    let c = &series.totals;
    let rho = libm::pow(gamma, r as f64) * c[r] as f64;
    if !(rho < 1.0) {
        return (f64::INFINITY, false);
    }
    let head: f64 = (0..r).map(|j| libm::pow(gamma, j as f64) * c[j] as f64).sum();
    let tail = rho * head / (1.0 - rho) - rho;
    // Cover floating-point rounding in the partial sum and the closed form.
    let slack = (partial_sum + tail) * (r as f64 + 4.0) * f64::EPSILON;
    (tail.max(0.0) + slack, true)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { what: "gamma", value: gamma })
    }
}

/// `C_gamma(point) = sum_n gamma^n #S_n(point, 0)` truncated at `N_max`.
pub fn correlation(series: &WalkSeries, gamma: f64, point: &LatticePoint) -> Result<CorrelationValue> {
    check_gamma(gamma)?;
    if point.dimension() != series.dimension {
        return Err(Error::DimensionMismatch {
            expected: series.dimension,
            found: point.dimension(),
        });
    }
    let partial_sum = match series.endpoints.get(point) {
        Some(counts) => power_sum(gamma, counts),
        None => 0.0,
    };
    let (tail_bound, converged) = tail(series, gamma, partial_sum);
    Ok(CorrelationValue {
        point: point.clone(),
        bound: SeriesBound {
            gamma,
            partial_sum,
            tail_bound,
            converged,
        },
    })
}

/// `chi(gamma) = sum_n c_n gamma^n` truncated at `N_max`.
pub fn susceptibility(series: &WalkSeries, gamma: f64) -> Result<SeriesBound> {
    check_gamma(gamma)?;
    let partial_sum = power_sum(gamma, &series.totals);
    let (tail_bound, converged) = tail(series, gamma, partial_sum);
    Ok(SeriesBound {
        gamma,
        partial_sum,
        tail_bound,
        converged,
    })
}

fn power_sum(gamma: f64, counts: &[u128]) -> f64 {
    let mut sum = 0.0;
    let mut power = 1.0;
    for &c in counts {
        sum += power * c as f64;
        power *= gamma;
    }
    sum
}

/// Upper bounds `c_n^{1/n} >= mu_d` (Fekete) and the trivial bound `2d - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectiveBounds {
    pub bounds: Vec<(usize, f64)>,
    pub trivial: f64,
}

impl ConnectiveBounds {
    /// Smallest `c_n^{1/n}` over the computed lengths.
    pub fn best(&self) -> Option<(usize, f64)> {
        self.bounds
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

pub fn connective_upper_bounds(series: &WalkSeries) -> Result<ConnectiveBounds> {
    if series.max_length < 1 {
        return Err(Error::InvalidInput("need walks of length >= 1"));
    }
    let bounds = (1..=series.max_length)
        .map(|n| (n, nth_root(series.totals[n], n)))
        .collect();
    Ok(ConnectiveBounds {
        bounds,
        trivial: (2 * series.dimension - 1) as f64,
    })
}

/// `c^{1/n}` for exact `c`.
pub fn nth_root(c: u128, n: usize) -> f64 {
    libm::exp(libm::log(c as f64) / n as f64)
}
