use std::time::Instant;

use anyonspectra::group::FiniteAbelianGroup;
use anyonspectra::lattice::{Dir, TorusLattice};
use anyonspectra::many_body::{
    holonomy, spectrum, verify_suite, Couplings, HamiltonianSpec, Model, SuiteOptions,
};

fn spec(n: usize, lx: usize, ly: usize, k: Couplings) -> HamiltonianSpec {
    HamiltonianSpec {
        group: FiniteAbelianGroup::cyclic(n).unwrap(),
        torus: TorusLattice::new(lx, ly).unwrap(),
        couplings: k,
    }
}

#[test]
fn identity_suite_passes() {
    for (n, lx, ly) in [(2, 2, 2), (3, 2, 2), (2, 3, 2)] {
        for k in [Couplings::new(0.3, 0.7, 0.5), Couplings::new(1.0, 0.4, 0.9).with_mass(0.3)] {
            let t = Instant::now();
            let report = verify_suite(&spec(n, lx, ly, k), &SuiteOptions::default()).unwrap();
            eprintln!("Z{n} {lx}x{ly} {k:?}: {:?}", t.elapsed());
            assert!(report.len() > 20);
            for r in &report {
                assert!(r.pass, "Z{n} {lx}x{ly}: {r:?}");
            }
        }
    }
}

#[test]
fn static_spectrum() {
    for n in [2usize, 3] {
        let m = Model::new(FiniteAbelianGroup::cyclic(n).unwrap(), TorusLattice::new(2, 2).unwrap()).unwrap();
        let e = spectrum(&m.h0()).unwrap();
        let ground = e.iter().filter(|x| x.abs() < 1e-10).count();
        assert_eq!(ground, n * n);
        let first = e.iter().find(|x| **x > 1e-10).unwrap();
        assert!((first - 2.0).abs() < 1e-10);
        assert!(e.iter().all(|x| (x - x.round()).abs() < 1e-10));
    }
}

#[test]
fn holonomy_matches_winding() {
    for n in [2usize, 3, 4] {
        let g = FiniteAbelianGroup::cyclic(n).unwrap();
        let l = TorusLattice::new(2, 2).unwrap();
        let m = Model::new(g, l).unwrap();
        let dual = l.dual_from_steps(0, &[Dir::R]).unwrap();
        let around = l.face_boundary(0);
        let twice = l.concat(&around, &around).unwrap();
        let far = l.face_boundary(l.face(0, 1));
        for (lp, w) in [(&far, 0), (&around, 1), (&twice, 2)] {
            for chi in 1..n {
                for h in 1..n {
                    let r = holonomy(&m, chi, h, &dual, lp).unwrap();
                    assert_eq!(r.winding, w);
                    assert!(r.error < 1e-12, "Z{n} chi={chi} h={h} w={w}: {r:?}");
                }
            }
        }
    }
}

#[test]
fn identity_suite_beyond_matrix_limit() {
    for (n, lx, ly) in [(2, 3, 3), (3, 3, 2)] {
        let t = Instant::now();
        let report = verify_suite(&spec(n, lx, ly, Couplings::new(0.3, 0.7, 0.5)), &SuiteOptions::default()).unwrap();
        eprintln!("Z{n} {lx}x{ly}: {:?}", t.elapsed());
        for r in &report {
            assert!(r.pass, "Z{n} {lx}x{ly}: {r:?}");
        }
    }
}
