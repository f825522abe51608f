use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::Hamiltonian;
use crate::{Error, Result};

/// LU factorisation with partial pivoting of the band matrix `H - z`.
///
/// Row `i` stores columns `i - kl ..= i + kl + ku`; the extra `kl` upper
/// diagonals hold the fill created by row interchanges. Multipliers are kept
/// in place and interchanges are replayed on the right-hand side in
/// elimination order.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    upper: usize,
    width: usize,
    data: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn factor(h: &Hamiltonian, z: Complex64) -> Result<Self> {
        let n = h.len();
        let kl = h.bandwidth();
        let upper = 2 * kl;
        let width = kl + upper + 1;
        let mut data = vec![Complex64::new(0.0, 0.0); n * width];
        let mut scale: f64 = 0.0;
        for i in 0..n {
            let d = Complex64::new(h.diagonal()[i], 0.0) - z;
            data[i * width + kl] = d;
            scale = scale.max(d.norm());
            for &j in h.hopping(i) {
                data[i * width + j + kl - i] = Complex64::new(1.0, 0.0);
                scale = scale.max(1.0);
            }
        }
        let mut lu = Self {
            n,
            kl,
            upper,
            width,
            data,
            pivots: vec![0; n],
        };
        let threshold = 8.0 * n as f64 * f64::EPSILON * scale;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.at(k, k).norm();
            for i in k + 1..=last_row {
                let v = lu.at(i, k).norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > threshold) {
                return Err(Error::Singular { column: k, pivot: best });
            }
            lu.pivots[k] = p;
            let last_col = (k + upper).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = lu.idx(k, j);
                    let b = lu.idx(p, j);
                    lu.data.swap(a, b);
                }
            }
            let pivot = lu.at(k, k);
            for i in k + 1..=last_row {
                let m = lu.at(i, k) / pivot;
                let mi = lu.idx(i, k);
                lu.data[mi] = m;
                if m == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..=last_col {
                    let akj = lu.at(k, j);
                    let ij = lu.idx(i, j);
                    lu.data[ij] -= m * akj;
                }
            }
        }
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + j + self.kl - i
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.idx(i, j)]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Overwrites `rhs` with the solution of `(H - z) u = rhs`.
    pub fn solve_in_place(&self, rhs: &mut [Complex64]) {
        let n = self.n;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                rhs.swap(k, p);
            }
            let bk = rhs[k];
            for i in k + 1..=(k + self.kl).min(n.saturating_sub(1)) {
                rhs[i] -= self.at(i, k) * bk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = rhs[k];
            for j in k + 1..=(k + self.upper).min(n - 1) {
                acc -= self.at(k, j) * rhs[j];
            }
            rhs[k] = acc / self.at(k, k);
        }
    }
}
