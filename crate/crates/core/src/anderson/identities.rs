use alloc::vec::Vec;

use num_complex::Complex64;

use super::{DisorderSample, GreenSolver, Hamiltonian, Region};
use crate::saw::LatticePoint;
use crate::{Error, Result};

fn site_of(region: &Region, p: &LatticePoint) -> Result<usize> {
    if p.dimension() != region.dimension() {
        return Err(Error::DimensionMismatch {
            expected: region.dimension(),
            found: p.dimension(),
        });
    }
    region.site(p).ok_or(Error::OutsideRegion)
}

/// Relative discrepancy `|LHS - RHS| / max(|LHS|, ε)` in
/// `G^(Λ)(x,y) = -G^(Λ)(x,x) Σ_{x' ∈ Λ, |x'-x|=1} G^(Λ\{x})(x',y)`, `x ≠ y`.
pub fn verify_depleted_identity(
    region: &Region,
    lambda: f64,
    sample: &DisorderSample,
    z: Complex64,
    x: &LatticePoint,
    y: &LatticePoint,
) -> Result<f64> {
    let xi = site_of(region, x)?;
    let yi = site_of(region, y)?;
    if xi == yi {
        return Err(Error::InvalidInput("depleted identity needs x != y"));
    }
    let full = GreenSolver::for_region(region, lambda, sample, z)?;
    let (col_y, _) = full.column(yi)?;
    let (col_x, _) = full.column(xi)?;
    let lhs = col_y[xi];

    let depleted = region.without(x)?;
    let mut sum = Complex64::new(0.0, 0.0);
    let neighbours: Vec<LatticePoint> = region.neighbors(xi).map(|s| region.point(s)).collect();
    if !neighbours.is_empty() {
        let solver = GreenSolver::for_region(&depleted, lambda, sample, z)?;
        let (col, _) = solver.column(depleted.site(y).ok_or(Error::OutsideRegion)?)?;
        for p in &neighbours {
            sum += col[depleted.site(p).ok_or(Error::OutsideRegion)?];
        }
    }
    let rhs = -col_x[xi] * sum;
    Ok((lhs - rhs).norm() / lhs.norm().max(f64::EPSILON))
}

/// Normwise check of the full operator identity
/// `(H - z)^{-1} = B^{-1} - Σ_{x'} (H - z)^{-1} T_{x,x'} B^{-1}` with
/// `B = H^({x}) ⊕ H^(Λ\{x}) - z`, returned as
/// `max |LHS - RHS| / max |LHS|` over all matrix entries.
pub fn verify_resolvent_expansion(
    region: &Region,
    lambda: f64,
    sample: &DisorderSample,
    z: Complex64,
    x: &LatticePoint,
) -> Result<f64> {
    let xi = site_of(region, x)?;
    let n = region.len();
    let full = GreenSolver::for_region(region, lambda, sample, z)?;
    let split = GreenSolver::new(Hamiltonian::decoupled(region, lambda, sample, xi)?, z)?;
    let mut a_inv = Vec::with_capacity(n);
    let mut b_inv = Vec::with_capacity(n);
    for k in 0..n {
        a_inv.push(full.column(k)?.0);
        b_inv.push(split.column(k)?.0);
    }
    // a_inv[k][i] = A^{-1}(i, k)
    let bonds: Vec<usize> = region.neighbors(xi).collect();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        for k in 0..n {
            let lhs = a_inv[k][i];
            let mut rhs = b_inv[k][i];
            for &xp in &bonds {
                // (A^{-1} T B^{-1})(i,k) = A^{-1}(i,x) B^{-1}(x',k) + A^{-1}(i,x') B^{-1}(x,k)
                rhs -= a_inv[xi][i] * b_inv[k][xp] + a_inv[xp][i] * b_inv[k][xi];
            }
            worst = worst.max((lhs - rhs).norm());
            scale = scale.max(lhs.norm());
        }
    }
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}

/// Outcome of the Schur-form check `G(x,x) = 1/(λω(x) - B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurCheck {
    pub omegas: [f64; 2],
    pub b_values: [Complex64; 2],
    pub relative_gap: f64,
    pub passed: bool,
}

pub const SCHUR_TOLERANCE: f64 = 1e-9;

/// Recomputes `B = λω(x) - 1/G(x,x)` for the sampled `ω(x)` and for a second
/// value (all other potentials fixed) and checks that the two agree.
pub fn verify_schur_diagonal(
    region: &Region,
    lambda: f64,
    sample: &DisorderSample,
    z: Complex64,
    x: &LatticePoint,
) -> Result<SchurCheck> {
    let xi = site_of(region, x)?;
    let w0 = sample.at(region, x)?;
    let w1 = if w0 >= 0.0 { w0 - 0.5 } else { w0 + 0.5 };
    let mut b_values = [Complex64::new(0.0, 0.0); 2];
    for (slot, &w) in [w0, w1].iter().enumerate() {
        let varied = sample.with_value(region, x, w)?;
        let solver = GreenSolver::for_region(region, lambda, &varied, z)?;
        let g = solver.column(xi)?.0[xi];
        if g.norm() == 0.0 {
            return Err(Error::Singular { column: xi, pivot: 0.0 });
        }
        b_values[slot] = lambda * w - g.inv();
    }
    let scale = b_values[0].norm().max(b_values[1].norm()).max(f64::MIN_POSITIVE);
    let relative_gap = (b_values[0] - b_values[1]).norm() / scale;
    Ok(SchurCheck {
        omegas: [w0, w1],
        b_values,
        relative_gap,
        passed: relative_gap <= SCHUR_TOLERANCE,
    })
}
