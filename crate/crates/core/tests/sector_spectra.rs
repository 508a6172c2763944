use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use anyonspectra::exec::Execution;
use anyonspectra::linalg;
use anyonspectra::sector_spectra::*;
use anyonspectra::Complex64;
use faer::Mat;

fn phases() -> Vec<Complex64> {
    vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::from_polar(1.0, 2.0 * PI / 3.0),
        Complex64::from_polar(1.0, 0.4),
    ]
}

fn params(phase: Complex64, lambda: f64, rho: f64, kx: f64, ky: f64) -> SectorParams {
    SectorParams::new(phase, lambda, rho, 0.0, kx, ky).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn closed_form_matches_diagonalization_on_grid() {
    let n = 101;
    for phase in phases() {
        for mass in [0.0, 0.3] {
            for i in 0..n {
                for j in 0..n {
                    let (kx, ky) = (PI * i as f64 / (n - 1) as f64, PI * j as f64 / (n - 1) as f64);
                    let mut p = params(phase, 0.0, 1.0, kx, ky);
                    p.mass = mass;
                    let e = eigenvalues4(&bloch_massive(&p)).unwrap();
                    assert!(close(&e, &dispersion_massive(&p), 1e-10), "{phase} {mass} {kx} {ky}");
                    if mass == 0.0 {
                        let c = eigenvalues4(&bloch_composite(&p)).unwrap();
                        assert!(close(&c, &dispersion_composite(&p).unwrap(), 1e-10));
                    }
                    // chiral pairing
                    assert!((e[0] + e[3]).abs() < 1e-10 && (e[1] + e[2]).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn dispersion_symmetries() {
    for phase in phases() {
        for (kx, ky) in [(0.1, 0.7), (1.3, 0.2), (0.5, 0.5)] {
            let base = dispersion_composite(&params(phase, 0.0, 1.0, kx, ky)).unwrap();
            let shifted = dispersion_composite(&params(phase, 0.0, 1.0, kx + FRAC_PI_2, ky)).unwrap();
            let conj = dispersion_composite(&params(phase.conj(), 0.0, 1.0, kx, ky)).unwrap();
            assert!(close(&base, &shifted, 1e-12) && close(&base, &conj, 1e-12));
        }
    }
}

#[test]
fn dirac_cone_is_linear() {
    let phase = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let slope = |d: f64| dispersion_composite(&params(phase, 0.0, 1.0, FRAC_PI_4 + d, FRAC_PI_4 + 0.5 * d)).unwrap()[3] / d;
    assert!((slope(1e-4) - slope(1e-5)).abs() < 1e-6);
    assert!(slope(1e-5) > 1.0);
    let degenerate = dispersion_composite(&params(Complex64::new(-1.0, 0.0), 0.0, 1.0, 0.3, 1.1)).unwrap();
    assert!((degenerate[0] - degenerate[1]).abs() < 1e-12 && (degenerate[2] - degenerate[3]).abs() < 1e-12);
}

#[test]
fn gap_is_twice_the_mass_for_cube_root_phase() {
    let phase = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    for m in [0.1, 0.5, 1.0] {
        let mut p = params(phase, 0.0, 1.0, FRAC_PI_4, FRAC_PI_4);
        p.mass = m;
        let e = eigenvalues4(&bloch_massive(&p)).unwrap();
        assert!((band_gap(&e) - 2.0 * m).abs() < 1e-9);
        // other phases give 2m sqrt(2 - sqrt(2 + 2 Re chi))
        for q in phases() {
            p.phase = q;
            let e = eigenvalues4(&bloch_massive(&p)).unwrap();
            let want = 2.0 * m * (2.0 - (2.0 + 2.0 * q.re).max(0.0).sqrt()).sqrt();
            assert!((band_gap(&e) - want).abs() < 1e-9, "{q}");
        }
    }
}

#[test]
fn one_particle_band_matches_periodic_lattice() {
    let n = 32;
    let lambda = 0.7;
    let mut h = Mat::<f64>::zeros(n * n, n * n);
    for y in 0..n {
        for x in 0..n {
            let i = y * n + x;
            for j in [y * n + (x + 1) % n, ((y + 1) % n) * n + x] {
                h[(i, j)] += lambda;
                h[(j, i)] += lambda;
            }
        }
    }
    let numeric = linalg::symmetric_eigenvalues(&h).unwrap();
    let mut band: Vec<f64> = (0..n * n)
        .map(|i| {
            let (a, b) = (2.0 * PI * (i % n) as f64 / n as f64, 2.0 * PI * (i / n) as f64 / n as f64);
            one_particle_dispersion(lambda, a, b)
        })
        .collect();
    band.sort_by(f64::total_cmp);
    assert!(close(&numeric, &band, 1e-10));
}

#[test]
fn fiber_hermitian_and_conjugation_invariant() {
    for phase in phases() {
        let w = RelativeWindow::new(6).unwrap();
        let a = fiber_operator(&params(phase, 0.8, 0.6, 0.3, 0.9), &w).unwrap();
        assert_eq!(a.matrix().hermiticity_defect(), 0.0);
        let b = fiber_operator(&params(phase.conj(), 0.8, 0.6, 0.3, 0.9), &w).unwrap();
        let ea = fiber_spectrum(&a, &Default::default()).unwrap().eigenvalues;
        let eb = fiber_spectrum(&b, &Default::default()).unwrap().eigenvalues;
        let dense = linalg::hermitian_eigenvalues(&a.to_dense()).unwrap();
        assert!(close(&ea, &eb, 1e-10) && close(&ea, &dense, 1e-10));
    }
}

#[test]
fn gauge_equivalent_string_gives_same_spectrum() {
    // string through d_y > 0 carrying conj(chi): same flux around the origin
    for phase in phases() {
        let p = params(phase, 1.0, 0.0, 0.2, 0.35);
        let w = RelativeWindow::new(5).unwrap();
        let op = fiber_operator(&p, &w).unwrap();
        let a = 2.0 * cos2(p.kx);
        let mut alt = op.to_dense();
        for y in (1..=w.max_coord()).step_by(2) {
            for (row, v) in [(-y, Complex64::new(a, 0.0)), (y, phase.conj() * a)] {
                let (i, j) = (w.index(1, row).unwrap(), w.index(-1, row).unwrap());
                alt[(i, j)] = v;
                alt[(j, i)] = v.conj();
            }
        }
        let s = fiber_spectrum(&op, &Default::default()).unwrap().eigenvalues;
        assert!(close(&s, &linalg::hermitian_eigenvalues(&alt).unwrap(), 1e-10));
    }
}

#[test]
fn band_fills_and_counting_converges() {
    let phase = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let p = params(phase, 1.0, 0.0, 0.1, 0.3);
    let (lo, hi) = essential_band(&p);
    let (a, b) = (2.0 * cos2(p.kx), 2.0 * cos2(p.ky));
    let mut gaps = Vec::new();
    let mut ks = Vec::new();
    for l in [10, 20, 40] {
        let s = fiber_spectrum(&fiber_operator(&p, &RelativeWindow::new(l).unwrap()).unwrap(), &Default::default()).unwrap();
        assert!(s.outliers.is_empty());
        assert!(s.eigenvalues.iter().all(|e| *e >= lo && *e <= hi));
        gaps.push(max_band_gap(&s.eigenvalues, lo, hi));
        ks.push(kolmogorov_distance(&s.eigenvalues, |e| free_cdf(a, b, e, 4096)));
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(ks.windows(2).all(|w| w[1] < w[0]), "{ks:?}");
    assert!(gaps[2] < 0.05);
}

#[test]
fn outliers_are_stable_in_window_size() {
    let phase = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let p = params(phase, 0.5, 1.0, 0.0, 0.0);
    let top = |l: usize| {
        let s = fiber_spectrum(&fiber_operator(&p, &RelativeWindow::new(l).unwrap()).unwrap(), &Default::default()).unwrap();
        assert_eq!(s.outliers.len(), 4);
        *s.outlier_energies().last().unwrap()
    };
    assert!((top(16) - top(24)).abs() < 1e-8);
}

#[test]
fn pure_pair_hopping_kernel() {
    let phase = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let p = params(phase, 0.0, 1.0, 0.0, 0.0);
    let s = fiber_spectrum(&fiber_operator(&p, &RelativeWindow::new(4).unwrap()).unwrap(), &Default::default()).unwrap();
    let nonzero: Vec<f64> = s.eigenvalues.iter().cloned().filter(|e| e.abs() > 1e-12).collect();
    let want = [-2.0 * 3f64.sqrt(), -2.0, 2.0, 2.0 * 3f64.sqrt()];
    assert!(close(&nonzero, &want, 1e-12));
    assert_eq!(s.radius, 0.0);
}

#[test]
fn no_bound_states_without_pair_hopping() {
    for phase in [Complex64::from_polar(1.0, 2.0 * PI / 3.0), Complex64::new(1.0, 0.0)] {
        let p = params(phase, 1.0, 0.0, 0.0, PI / 8.0);
        let r = no_bound_state_check(&p, &[6, 12, 24], Execution::Parallel).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!(r.kolmogorov_decreasing);
    }
}

#[test]
fn sweep_counts_match_single_points() {
    let phase = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let base = params(phase, 0.1, 1.0, 0.0, 0.0);
    let ls = [0.5, 1.5];
    let pts = sweep(&base, &ls, &SweepOptions::new(12)).unwrap();
    for (pt, l) in pts.iter().zip(ls) {
        let s = fiber_spectrum(&fiber_operator(&base.with_lambda(l), &RelativeWindow::new(12).unwrap()).unwrap(), &Default::default())
            .unwrap();
        assert_eq!(pt.eigenvalues, s.eigenvalues);
        assert_eq!(pt.outliers, s.outlier_energies());
    }
    let summary = SweepSummary::new(&pts);
    assert_eq!(summary.outlier_counts.len(), 2);
}
