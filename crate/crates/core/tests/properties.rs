use std::f64::consts::PI;

use proptest::prelude::*;

use unihop::dynamics::{evolve_closed_form, evolve_rk4, EvolveConfig};
use unihop::engineering::{closed_form_hopping, solve_unidirectional_scan, ModulationProtocol};
use unihop::spectral::{analyze_spectrum, AnalyzeOptions};
use unihop::{build_hamiltonian, LatticeSpec, StateVector, C64};

fn complex(max: f64) -> impl Strategy<Value = C64> {
    (0.1..max, 0.0..2.0 * PI).prop_map(|(r, a)| C64::from_polar(r, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trace_is_the_eigenvalue_sum(sites in 2usize..12, k1 in complex(2.0), k2 in complex(2.0), f in -1.0..1.0f64) {
        let h = build_hamiltonian(&LatticeSpec::chain(sites, k1, k2, f)).unwrap();
        let r = analyze_spectrum(&h, AnalyzeOptions::default()).unwrap();
        let sum: C64 = r.eigenvalues.iter().sum();
        prop_assert!((sum - h.matrix.trace()).norm() < 1e-9 * (1.0 + h.max_abs_entry() * sites as f64));
    }

    #[test]
    fn forced_unidirectional_spectrum_is_the_diagonal(sites in 2usize..14, k1 in complex(3.0), f in 0.2..2.0f64) {
        let h = build_hamiltonian(&LatticeSpec::chain(sites, k1, C64::new(0.0, 0.0), f)).unwrap();
        let r = analyze_spectrum(&h, AnalyzeOptions::default()).unwrap();
        for (l, e) in r.eigenvalues.iter().enumerate() {
            prop_assert!((e - C64::new(f * l as f64, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn amplitude_never_moves_up(sites in 3usize..16, k1 in complex(2.0), f in -1.0..1.0f64, seed in 0usize..100) {
        let spec = LatticeSpec::chain(sites, k1, C64::new(0.0, 0.0), f);
        let n0 = (seed % (sites - 1)) as i64;
        let c0 = StateVector::single_site(&spec, n0).unwrap();
        let traj = evolve_rk4(&spec, &c0, &EvolveConfig::rk4(2.0, 0.002).recording_every(50), None).unwrap();
        for s in &traj.states {
            for n in (n0 + 1)..sites as i64 {
                prop_assert_eq!(s.amp(n), C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn ring_closed_form_matches_rk4(sites in 2usize..10, k1 in complex(2.0), site in 0i64..10) {
        let spec = LatticeSpec::ring(sites, k1, C64::new(0.0, 0.0));
        let c0 = StateVector::single_site(&spec, site % sites as i64).unwrap();
        let cfg = EvolveConfig::rk4(2.0, 0.005).recording_every(100);
        let rk = evolve_rk4(&spec, &c0, &cfg, None).unwrap();
        let cf = evolve_closed_form(&spec, &c0, &rk.times).unwrap();
        for (a, b) in rk.states.iter().zip(&cf.states) {
            for (x, y) in a.amps.iter().zip(&b.amps) {
                prop_assert!((x - y).norm() < 1e-8 * (1.0 + y.norm()));
            }
        }
    }

    #[test]
    fn reciprocity_symmetry(theta in 0.0..2.0 * PI, x in 0.05..0.95f64, a in -5.0..5.0f64, b in -5.0..5.0f64) {
        let p = ModulationProtocol::new(theta, a, b, x, 1.0).unwrap();
        let q = ModulationProtocol::new(-theta, a, b, x, 1.0).unwrap();
        let (_, sigma) = closed_form_hopping(&p, 1.0);
        let (rho_mirror, _) = closed_form_hopping(&q, 1.0);
        prop_assert!((sigma - rho_mirror).norm() < 1e-14 * (1.0 + sigma.norm()));
    }

    #[test]
    fn returned_roots_are_certified(theta in 0.3..2.8f64, x in 0.5..0.95f64) {
        if let Ok(root) = solve_unidirectional_scan(theta, x, (0.5, 6.0), (-2.0, 2.0)) {
            let g = root.gamma;
            let f = g.sin() / g * x + C64::from_polar(1.0 - x, theta);
            prop_assert!(f.norm() < 1e-10);
        }
    }
}
