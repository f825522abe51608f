use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{BandLu, DisorderSample, Hamiltonian, Region};
use crate::saw::LatticePoint;
use crate::{Error, Result};

/// Relative residual accepted for a Green's function column.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
const REFINEMENT_STEPS: usize = 2;

/// Factorised `H - z` for repeated column solves.
#[derive(Debug, Clone)]
pub struct GreenSolver {
    hamiltonian: Hamiltonian,
    z: Complex64,
    lu: BandLu,
}

impl GreenSolver {
    pub fn new(hamiltonian: Hamiltonian, z: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain { what: "z", value: z.re });
        }
        let lu = BandLu::factor(&hamiltonian, z)?;
        Ok(Self { hamiltonian, z, lu })
    }

    pub fn for_region(region: &Region, lambda: f64, sample: &DisorderSample, z: Complex64) -> Result<Self> {
        Self::new(Hamiltonian::new(region, lambda, sample)?, z)
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    /// Column `G(·, y)` and its relative residual `|δ_y - (H - z) u|`.
    pub fn column(&self, y: usize) -> Result<(Vec<Complex64>, f64)> {
        let n = self.hamiltonian.len();
        if y >= n {
            return Err(Error::OutsideRegion);
        }
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        u[y] = Complex64::new(1.0, 0.0);
        self.lu.solve_in_place(&mut u);
        let mut residual = self.residual(&u, y);
        let mut step = 0;
        while residual.1 > 1e-14 && step < REFINEMENT_STEPS {
            let mut correction = residual.0;
            self.lu.solve_in_place(&mut correction);
            for (ui, ci) in u.iter_mut().zip(&correction) {
                *ui += ci;
            }
            residual = self.residual(&u, y);
            step += 1;
        }
        if !(residual.1 < RESIDUAL_TOLERANCE) {
            return Err(Error::NonConvergence {
                what: "Green's function solve",
                iterations: step,
                residual: residual.1,
            });
        }
        Ok((u, residual.1))
    }

    fn residual(&self, u: &[Complex64], y: usize) -> (Vec<Complex64>, f64) {
        let mut r = self.hamiltonian.apply_shifted(self.z, u);
        for v in r.iter_mut() {
            *v = -*v;
        }
        r[y] += 1.0;
        let norm = libm::sqrt(r.iter().map(|v| v.norm_sqr()).sum::<f64>());
        (r, norm)
    }
}

/// `G_z^(Λ)(x, y)` for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenEvaluation {
    pub z: Complex64,
    pub x: LatticePoint,
    pub y: LatticePoint,
    pub value: Complex64,
    pub residual: f64,
}

/// `<δ_x, (H^(Λ) - z)^{-1} δ_y>`, zero when `x` or `y` lies outside `Λ`.
pub fn green(
    region: &Region,
    lambda: f64,
    sample: &DisorderSample,
    z: Complex64,
    x: &LatticePoint,
    y: &LatticePoint,
) -> Result<GreenEvaluation> {
    sample.check(region)?;
    for p in [x, y] {
        if p.dimension() != region.dimension() {
            return Err(Error::DimensionMismatch {
                expected: region.dimension(),
                found: p.dimension(),
            });
        }
    }
    let (value, residual) = match (region.site(x), region.site(y)) {
        (Some(xi), Some(yi)) => {
            let solver = GreenSolver::for_region(region, lambda, sample, z)?;
            let (col, residual) = solver.column(yi)?;
            (col[xi], residual)
        }
        _ => (Complex64::new(0.0, 0.0), 0.0),
    };
    Ok(GreenEvaluation {
        z,
        x: x.clone(),
        y: y.clone(),
        value,
        residual,
    })
}
