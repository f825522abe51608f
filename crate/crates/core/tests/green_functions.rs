#![allow(clippy::needless_range_loop)]

use anderson_core::anderson::{
    green, verify_depleted_identity, verify_resolvent_expansion, verify_schur_diagonal,
    DisorderSample, GreenSolver, Hamiltonian, Region,
};
use anderson_core::saw::LatticePoint;
use anderson_core::{Complex64, Error};

fn p(c: &[i32]) -> LatticePoint {
    LatticePoint::new(c.to_vec())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense Gauss–Jordan inverse with partial pivoting (row-major).
fn dense_inverse(a: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut m = a.to_vec();
    let mut inv = vec![c(0.0, 0.0); n * n];
    for i in 0..n {
        inv[i * n + i] = c(1.0, 0.0);
    }
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i * n + k].norm().total_cmp(&m[j * n + k].norm())).unwrap();
        for j in 0..n {
            m.swap(k * n + j, p * n + j);
            inv.swap(k * n + j, p * n + j);
        }
        let piv = m[k * n + k];
        for j in 0..n {
            m[k * n + j] /= piv;
            inv[k * n + j] /= piv;
        }
        for i in 0..n {
            if i != k {
                let f = m[i * n + k];
                if f != c(0.0, 0.0) {
                    for j in 0..n {
                        let (mk, ik) = (m[k * n + j], inv[k * n + j]);
                        m[i * n + j] -= f * mk;
                        inv[i * n + j] -= f * ik;
                    }
                }
            }
        }
    }
    inv
}

fn dense_green(h: &Hamiltonian, z: Complex64) -> Vec<Complex64> {
    let n = h.len();
    let a: Vec<Complex64> = h
        .to_dense()
        .iter()
        .enumerate()
        .map(|(k, &v)| if k / n == k % n { c(v, 0.0) - z } else { c(v, 0.0) })
        .collect();
    dense_inverse(&a, n)
}

#[test]
fn pinned_values_on_a_disordered_square() {
    // Frozen from an independent dense inversion (numpy) of the same sample.
    let region = Region::cube(2, 6).unwrap();
    let sample = DisorderSample::generate(&region, 1);
    let z = c(0.0, 0.01);
    let expected = [
        ([0, 0], [0, 0], 0.04349488451887365, 1.944743989054688e-05),
        ([1, 0], [0, 0], 0.003132152382188525, -1.6697925503684697e-06),
        ([3, 0], [0, 0], 3.0429580762535633e-05, -6.67576999786665e-08),
        ([2, -1], [-1, 1], -1.519877255515105e-07, -1.4995877850119178e-09),
        ([6, 6], [-6, -6], 1.9793662302630678e-19, -3.3630388278423036e-21),
    ];
    for (x, y, re, im) in expected {
        let g = green(&region, 30.0, &sample, z, &p(&x), &p(&y)).unwrap();
        let want = c(re, im);
        assert!((g.value - want).norm() <= 1e-9 * want.norm(), "{x:?} {y:?}: {} vs {want}", g.value);
        assert!(g.residual < 1e-10);
    }
}

#[test]
fn sparse_matches_dense_inversion() {
    let cases = [(1, 10, 4.0), (2, 5, 30.0), (2, 7, 2.0), (3, 2, 10.0), (3, 3, 1.0)];
    for (k, &(d, l, lambda)) in cases.iter().enumerate() {
        let base = Region::cube(d, l).unwrap();
        let region = base.without(&base.point(k + 3)).unwrap();
        assert!(region.len() <= 500);
        let sample = DisorderSample::generate(&region, 100 + k as u64);
        let z = c(0.3, 0.05);
        let h = Hamiltonian::new(&region, lambda, &sample).unwrap();
        let dense = dense_green(&h, z);
        let solver = GreenSolver::new(h, z).unwrap();
        let n = region.len();
        for y in (0..n).step_by(7) {
            let (col, residual) = solver.column(y).unwrap();
            assert!(residual < 1e-10);
            let scale = (0..n).map(|x| dense[x * n + y].norm()).fold(0.0, f64::max);
            for x in 0..n {
                let want = dense[x * n + y];
                let err = (col[x] - want).norm();
                assert!(err <= 1e-9 * want.norm() || err <= 1e-13 * scale, "d={d} x={x} y={y}");
            }
        }
    }
}

#[test]
fn single_site_closed_form() {
    let region = Region::cube(3, 0).unwrap();
    let sample = DisorderSample::generate(&region, 9);
    let o = p(&[0, 0, 0]);
    let w = sample.at(&region, &o).unwrap();
    let h = Hamiltonian::new(&region, 7.0, &sample).unwrap();
    assert_eq!(h.diagonal(), &[7.0 * w]);
    assert!(h.hopping(0).is_empty());
    let z = c(0.2, 0.5);
    let g = green(&region, 7.0, &sample, z, &o, &o).unwrap();
    assert!((g.value - (c(7.0 * w, 0.0) - z).inv()).norm() < 1e-15);
}

#[test]
fn outside_region_is_zero() {
    let region = Region::cube(2, 2).unwrap().without(&p(&[1, 1])).unwrap();
    let sample = DisorderSample::generate(&region, 3);
    let g = green(&region, 5.0, &sample, c(0.0, 0.1), &p(&[1, 1]), &p(&[0, 0])).unwrap();
    assert_eq!(g.value, c(0.0, 0.0));
    let g = green(&region, 5.0, &sample, c(0.0, 0.1), &p(&[0, 0]), &p(&[7, 0])).unwrap();
    assert_eq!(g.value, c(0.0, 0.0));
}

#[test]
fn hamiltonian_structure() {
    for (d, l) in [(1, 5), (2, 4), (3, 2)] {
        let region = Region::cube(d, l).unwrap().without(&p(&vec![0; d])).unwrap();
        let sample = DisorderSample::generate(&region, 1);
        let h = Hamiltonian::new(&region, 12.0, &sample).unwrap();
        assert!(h.is_symmetric());
        for i in 0..h.len() {
            assert!(h.hopping(i).len() <= 2 * d);
        }
        let (lo, hi) = h.gershgorin();
        let bound = 2.0 * d as f64 + 12.0;
        assert!(lo >= -bound && hi <= bound);
    }
}

#[test]
fn adjacency_spectrum_is_inside_band() {
    // λ = 0: power iteration on the adjacency matrix of the box.
    let region = Region::cube(2, 5).unwrap();
    let sample = DisorderSample::generate(&region, 0);
    let h = Hamiltonian::new(&region, 0.0, &sample).unwrap();
    let n = h.len();
    let mut v = vec![c(1.0, 0.0); n];
    let mut rayleigh = 0.0;
    for _ in 0..500 {
        let w = h.apply_shifted(c(0.0, 0.0), &v);
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        rayleigh = w.iter().zip(&v).map(|(a, b)| (a * b.conj()).re).sum::<f64>()
            / v.iter().map(|x| x.norm_sqr()).sum::<f64>();
        v = w.iter().map(|x| x / norm).collect();
    }
    // top eigenvalue of the 11x11 grid: 4 cos(pi/12)
    assert!((rayleigh - 4.0 * (std::f64::consts::PI / 12.0).cos()).abs() < 1e-6);
    assert!(rayleigh <= 4.0);
}

#[test]
fn symmetry_and_uniform_bound() {
    let region = Region::cube(2, 4).unwrap();
    for seed in 0..5 {
        let sample = DisorderSample::generate(&region, seed);
        let z = c(-1.0 + seed as f64, 0.02);
        let solver = GreenSolver::for_region(&region, 8.0, &sample, z).unwrap();
        let n = region.len();
        let cols: Vec<Vec<Complex64>> = (0..n).map(|y| solver.column(y).unwrap().0).collect();
        for x in 0..n {
            for y in 0..n {
                assert!((cols[y][x] - cols[x][y]).norm() <= 1e-12 * cols[y][x].norm().max(1e-300) + 1e-16);
                assert!(cols[y][x].norm() <= 1.0 / z.im);
            }
        }
    }
}

#[test]
fn deterministic_outputs() {
    let region = Region::cube(2, 5).unwrap();
    let run = || {
        let sample = DisorderSample::generate(&region, 77);
        green(&region, 30.0, &sample, c(0.0, 0.01), &p(&[2, 1]), &p(&[-1, 0])).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
    assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());
    assert_eq!(a.residual.to_bits(), b.residual.to_bits());
}

#[test]
fn real_energy_at_eigenvalue_is_singular() {
    let region = Region::cube(1, 0).unwrap();
    let sample = DisorderSample::generate(&region, 4);
    let w = sample.at(&region, &p(&[0])).unwrap();
    let err = GreenSolver::for_region(&region, 3.0, &sample, c(3.0 * w, 0.0)).unwrap_err();
    assert!(matches!(err, Error::Singular { .. }));
    // two sites with zero potential: eigenvalues ±1
    let region = Region::with_deleted(1, 1, &[p(&[-1])]).unwrap();
    let flat = DisorderSample::from_values(&region, 0, vec![0.0; 3]).unwrap();
    let err = GreenSolver::for_region(&region, 1.0, &flat, c(1.0, 0.0)).unwrap_err();
    assert!(matches!(err, Error::Singular { .. }));
    // off the spectrum real energies are fine
    let g = green(&region, 1.0, &flat, c(0.5, 0.0), &p(&[0]), &p(&[0])).unwrap();
    assert!((g.value - c(-0.5 / (0.25 - 1.0), 0.0)).norm() < 1e-14);
}

#[test]
fn depleted_identity_two_sites() {
    let region = Region::with_deleted(1, 1, &[p(&[-1])]).unwrap();
    let sample = DisorderSample::generate(&region, 5);
    let z = c(0.1, 0.01);
    let d = verify_depleted_identity(&region, 3.0, &sample, z, &p(&[0]), &p(&[1])).unwrap();
    assert!(d < 1e-12);
    // closed form for the 2x2 inverse
    let (a, b) = (
        c(3.0 * sample.at(&region, &p(&[0])).unwrap(), 0.0) - z,
        c(3.0 * sample.at(&region, &p(&[1])).unwrap(), 0.0) - z,
    );
    let g = green(&region, 3.0, &sample, z, &p(&[0]), &p(&[1])).unwrap();
    assert!((g.value - (-1.0 / (a * b - 1.0))).norm() < 1e-14);
}

#[test]
fn depleted_identity_disconnected_site() {
    // x = (0,0) with all four neighbours removed
    let region = Region::with_deleted(2, 2, &[p(&[1, 0]), p(&[-1, 0]), p(&[0, 1]), p(&[0, -1])]).unwrap();
    let sample = DisorderSample::generate(&region, 8);
    let z = c(0.0, 0.01);
    let g = green(&region, 10.0, &sample, z, &p(&[0, 0]), &p(&[2, 2])).unwrap();
    assert_eq!(g.value.norm(), 0.0);
    let d = verify_depleted_identity(&region, 10.0, &sample, z, &p(&[0, 0]), &p(&[2, 2])).unwrap();
    assert_eq!(d, 0.0);
    assert!(verify_depleted_identity(&region, 10.0, &sample, z, &p(&[0, 0]), &p(&[0, 0])).is_err());
}

#[test]
fn resolvent_expansion_small_boxes() {
    for (d, l, seed) in [(1, 4, 1u64), (2, 2, 2), (2, 3, 3), (3, 1, 4)] {
        let region = Region::cube(d, l).unwrap();
        let sample = DisorderSample::generate(&region, seed);
        for site in [0, region.len() / 2, region.len() - 1] {
            let x = region.point(site);
            let err = verify_resolvent_expansion(&region, 6.0, &sample, c(0.2, 0.01), &x).unwrap();
            assert!(err < 1e-10, "d={d} L={l} x={x}: {err}");
        }
    }
}

#[test]
fn schur_closed_forms() {
    let z = c(0.3, 0.01);
    let single = Region::cube(2, 0).unwrap();
    let sample = DisorderSample::generate(&single, 6);
    let check = verify_schur_diagonal(&single, 20.0, &sample, z, &p(&[0, 0])).unwrap();
    assert!(check.passed);
    for b in check.b_values {
        assert!((b - z).norm() < 1e-12);
    }

    let pair = Region::with_deleted(1, 1, &[p(&[-1])]).unwrap();
    let sample = DisorderSample::generate(&pair, 6);
    let lambda = 20.0;
    let check = verify_schur_diagonal(&pair, lambda, &sample, z, &p(&[0])).unwrap();
    assert!(check.passed, "{check:?}");
    let wy = sample.at(&pair, &p(&[1])).unwrap();
    let expected = z + (c(lambda * wy, 0.0) - z).inv();
    for b in check.b_values {
        assert!((b - expected).norm() < 1e-12 * expected.norm().max(1.0));
    }
}

#[test]
fn schur_independence_cubic_box() {
    let region = Region::cube(3, 3).unwrap();
    for seed in 0..50u64 {
        let sample = DisorderSample::generate(&region, 1000 + seed);
        let x = region.point((seed as usize * 37) % region.len());
        let check = verify_schur_diagonal(&region, 20.0, &sample, c(0.0, 0.01), &x).unwrap();
        assert!(check.passed, "seed {seed}: {check:?}");
    }
}
