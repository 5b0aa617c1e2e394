//! Property tests of the invariants that hold for every admissible input.

use std::sync::Arc;
use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use tdho::classical::{integrate_fundamentals, TailCoefficients};
use tdho::io::Table;
use tdho::model::{classify, lambda_of, Classification, Model, PotentialFamily, PotentialSpec};
use tdho::propagators::{evolve_reduced, free_reduced, StepPlan, StepPolicy};
use tdho::scattering::{slope_fit, ConvergenceReport, VerdictRule};
use tdho::spectral::{
    chirp_apply, dilation_apply, prepare_annular_state, random_band_limited, AnnularProfile, Grid, Observable, State,
};

fn grid() -> Arc<Grid> {
    static G: OnceLock<Arc<Grid>> = OnceLock::new();
    G.get_or_init(|| Grid::new(2048, 200.0).unwrap()).clone()
}

fn reference() -> Model {
    Model::new(1.0, 3.0 / 16.0, 1.0).unwrap()
}

proptest! {
    #[test]
    fn potential_derivatives_match_differences(
        rho in 0.5f64..3.0,
        c in -2.0f64..2.0,
        a in 0.3f64..2.0,
        x in -20.0f64..20.0,
    ) {
        let spec = PotentialSpec::new(PotentialFamily::ShortRange, rho, c, a);
        let h = 1e-4;
        let d1 = (spec.eval(1.0, x + h) - spec.eval(1.0, x - h)) / (2.0 * h);
        let d2 = (spec.eval_dx(1.0, x + h) - spec.eval_dx(1.0, x - h)) / (2.0 * h);
        let scale1 = spec.eval_dx(1.0, x).abs().max(1e-3 * spec.eval(1.0, x).abs());
        let scale2 = spec.eval_dxx(1.0, x).abs().max(1e-3 * spec.eval(1.0, x).abs());
        prop_assert!((d1 - spec.eval_dx(1.0, x)).abs() <= 1e-6 * scale1);
        prop_assert!((d2 - spec.eval_dxx(1.0, x)).abs() <= 1e-6 * scale2);
    }

    #[test]
    fn classification_flips_at_window_edges(k in 0.0f64..0.249) {
        let model = Model::new(1.0, k, 1.0).unwrap();
        let th = model.thresholds();
        let at = |family, rho| classify(&PotentialSpec::new(family, rho, 1.0, 1.0), &model);
        let invalid = |c: Classification| matches!(c, Classification::Invalid(_));
        prop_assert!(!invalid(at(PotentialFamily::ShortRange, th.short + 1e-9)));
        prop_assert!(invalid(at(PotentialFamily::ShortRange, th.short - 1e-9)));
        prop_assert!(!invalid(at(PotentialFamily::DollardLong, th.short - 1e-9)));
        prop_assert!(invalid(at(PotentialFamily::DollardLong, th.short + 1e-9)));
        prop_assert!(!invalid(at(PotentialFamily::DollardLong, th.dollard_lower + 1e-9)));
        prop_assert!(invalid(at(PotentialFamily::DollardLong, th.dollard_lower - 1e-9)));
    }

    #[test]
    fn harmonic_coefficient_is_even(k in 0.0f64..0.249, r0 in 0.2f64..3.0, t in 0.0f64..50.0) {
        let model = Model::new(1.0, k, r0).unwrap();
        prop_assert_eq!(model.k_profile(t), model.k_profile(-t));
    }

    #[test]
    fn tail_coefficients_satisfy_the_wronskian_identity(
        k in 0.001f64..0.24,
        t in 1.0f64..50.0,
        y0 in -3.0f64..3.0,
        y1 in -3.0f64..3.0,
        z0 in -3.0f64..3.0,
    ) {
        // Any data with unit Wronskian: (y0, y1) and (z0, z1) with y0 z1 - y1 z0 = 1.
        prop_assume!(y0.abs() > 0.1);
        let z1 = (1.0 + y1 * z0) / y0;
        let l = lambda_of(1.0, k).unwrap();
        let c = TailCoefficients::matched(l, t, [y0, y1, z0, z1]);
        prop_assert!((c.wronskian_combination() + 1.0).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn annular_states_ignore_low_bands(eps in 0.3f64..1.0, seed in 0u64..1000) {
        let g = grid();
        let shell = prepare_annular_state(&g, eps, 3.0, AnnularProfile::default()).unwrap();
        // A state band-limited below the shell's inner edge 2 eps.
        let low = random_band_limited(&g, seed, 1.5 * eps, 10.0).unwrap();
        let hat = low.momentum();
        let cut: Vec<Complex64> = hat
            .iter()
            .zip(g.xi())
            .map(|(z, &k)| if k.abs() < 2.0 * eps { *z } else { Complex64::new(0.0, 0.0) })
            .collect();
        let low = State::from_momentum(g.clone(), &cut).unwrap();
        prop_assert!(shell.inner(&low).unwrap().norm() < 1e-12);
    }

    #[test]
    fn dilation_conjugates_second_moments(beta in -0.35f64..0.35, seed in 0u64..1000) {
        let st = random_band_limited(&grid(), seed, 6.0, 8.0).unwrap();
        let d = dilation_apply(&st, (2.0 * beta).exp()).unwrap();
        let rx = d.expectation(Observable::X2) / st.expectation(Observable::X2);
        let rp = d.expectation(Observable::P2) / st.expectation(Observable::P2);
        prop_assert!((rx / (-4.0 * beta).exp() - 1.0).abs() < 1e-5);
        prop_assert!((rp / (4.0 * beta).exp() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn propagators_are_unitary_and_reversible(
        seed in 0u64..1000,
        t1 in 1.5f64..6.0,
        a in -0.05f64..0.05,
    ) {
        let model = reference();
        let spec = PotentialSpec::new(PotentialFamily::ShortRange, 2.0, 1.0, 1.0);
        let st = random_band_limited(&grid(), seed, 4.0, 8.0).unwrap();
        let n0 = st.norm();
        let free = free_reduced(&st, 1.0, t1, &model).unwrap();
        prop_assert!((free.norm() - n0).abs() < 1e-12);
        let plan = StepPlan::new(1.0, t1, StepPolicy::Uniform { h: 0.05 }).unwrap();
        let fwd = evolve_reduced(&st, &plan, &model, &spec).unwrap();
        prop_assert!((fwd.norm() - n0).abs() < 1e-12);
        let back = evolve_reduced(&fwd, &StepPlan::new(t1, 1.0, StepPolicy::Uniform { h: 0.05 }).unwrap(), &model, &spec)
            .unwrap();
        prop_assert!(back.distance(&st).unwrap() < 1e-10);
        let (c, _) = chirp_apply(&st, a);
        prop_assert!((c.norm() - n0).abs() < 1e-12);
    }

    #[test]
    fn noisy_power_laws_fit_within_tolerance(seed in 0u64..10_000, slope in -2.0f64..1.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..16).map(|i| 8.0 * 2f64.powf(i as f64 * 0.5)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(slope) * (1.0 + 0.01 * rng.random_range(-1.0..1.0))).collect();
        prop_assert!((slope_fit(&xs, &ys).unwrap().slope - slope).abs() < 0.05);
    }

    #[test]
    fn stored_verdicts_reproduce(diffs in proptest::collection::vec(1e-9f64..1.0, 4..10), floor in 1e-12f64..1e-6) {
        let dir = tempfile::tempdir().unwrap();
        let rule = VerdictRule::default();
        let times: Vec<f64> = (0..diffs.len()).map(|j| 8.0 * 2f64.powi(j as i32)).collect();
        let mut t = Table::new(&["t", "diff", "slope_window", "floor"]);
        for (a, b) in times.iter().zip(&diffs) {
            t.push(vec![*a, *b, f64::NAN, floor]);
        }
        let path = dir.path().join("c.csv");
        t.write(&path).unwrap();
        let stored = ConvergenceReport::verdict_from_table(&Table::read(&path).unwrap(), &rule).unwrap();
        prop_assert_eq!(stored, rule.judge(&times, &diffs, floor).1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn tail_closed_form_tracks_the_integration(k in 0.01f64..0.24) {
        let model = Model::new(1.0, k, 1.0).unwrap();
        let f = integrate_fundamentals(&model, 200.0, 1e-12).unwrap();
        let c = f.coefficients().unwrap();
        for t in [5.0, 50.0, 200.0] {
            let v = f.eval(t).unwrap();
            let w = c.eval(t);
            let scale = t.powf(1.0 - c.lambda);
            prop_assert!((v.z1 - w[0]).abs() <= 1e-8 * scale);
            prop_assert!((v.z2 - w[2]).abs() <= 1e-8 * scale);
        }
    }
}
