use tdho::model::{Model, PotentialFamily, PotentialSpec};
use tdho::propagators::StepPolicy;
use tdho::scattering::{cauchy_scan, dollard_phase_growth, nonexistence_diagnostic, ScanConfig, VerdictRule};
use tdho::spectral::{prepare_annular_state, AnnularProfile, BumpShape, Grid, Sides};

fn model() -> Model {
    Model::new(1.0, 3.0 / 16.0, 1.0).unwrap()
}

#[test]
fn shorter_range_decays_faster() {
    let m = model();
    let g = Grid::new(4096, 400.0).unwrap();
    let launch = m.reduced_clock(m.r0()) / m.big_lambda();
    let profile = AnnularProfile { shape: BumpShape::TaperedGaussian { kappa: 5.0 }, sides: Sides::Positive, launch };
    let phi = prepare_annular_state(&g, 0.5, 3.0, profile).unwrap();
    let cfg = ScanConfig {
        t0: 8.0,
        n_doublings: 5,
        modified: false,
        policy: StepPolicy::graded(0.02, 0.02, &m),
        rule: VerdictRule::default(),
        budget_seconds: None,
    };
    let slope = |rho: f64| {
        let spec = PotentialSpec::new(PotentialFamily::ShortRange, rho, 1.0, 1.0);
        cauchy_scan(&phi, &m, &spec, &cfg).unwrap().slope.unwrap().slope
    };
    let (s3, s2) = (slope(3.0), slope(2.0));
    assert!(s3 <= s2 + 0.1, "rho = 3 slope {s3}, rho = 2 slope {s2}");
}

#[test]
fn sign_definite_phase_integrals_never_decrease() {
    let m = model();
    let g = Grid::new(4096, 400.0).unwrap();
    let phi = prepare_annular_state(&g, 0.5, 2.5, AnnularProfile::default()).unwrap();
    for rho in [1.0, 4.0 / 3.0, 2.0] {
        let spec = PotentialSpec::new(PotentialFamily::LongRange, rho, 1.0, 1.0);
        let rep = nonexistence_diagnostic(&phi, &m, &spec, 1e2, 1e5, 13).unwrap();
        assert!(rep.values.windows(2).all(|w| w[1] >= w[0]), "rho = {rho}");
    }
    let spec = PotentialSpec::new(PotentialFamily::DollardLong, 1.2, 1.0, 1.0);
    let rep = dollard_phase_growth(&m, &spec, 0.7, 1e2, 1e5, 13).unwrap();
    assert!(rep.values.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn boundary_growth_matches_the_logarithmic_oracle() {
    // At rho = 4/3 the inner integrand is exactly C (a^2 + xi^2 tau^(3/2) / Lambda^2)^(-2/3);
    // for tau^(3/4) |xi| >> a it tends to C Lambda^(4/3) |xi|^(-4/3) / tau, so the
    // log-fit slope is C Lambda^(4/3) sum |xi|^(-4/3) |phi^(xi)|^2 dxi.
    let m = model();
    let g = Grid::new(4096, 400.0).unwrap();
    let phi = prepare_annular_state(&g, 0.5, 2.5, AnnularProfile::default()).unwrap();
    let spec = PotentialSpec::new(PotentialFamily::LongRange, 4.0 / 3.0, 1.0, 1.0);
    let rep = nonexistence_diagnostic(&phi, &m, &spec, 1e3, 1e6, 13).unwrap();
    let hat = phi.momentum();
    let c: f64 = hat
        .iter()
        .zip(g.xi())
        .filter(|(_, k)| **k != 0.0)
        .map(|(z, k)| z.norm_sqr() * g.dxi() * k.abs().powf(-4.0 / 3.0))
        .sum::<f64>()
        * m.big_lambda().powf(4.0 / 3.0);
    assert!((rep.log_fit.slope / c - 1.0).abs() < 1e-3, "{} vs {c}", rep.log_fit.slope);
}
