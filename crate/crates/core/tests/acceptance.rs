//! Acceptance suite on the reference configuration: m = 1, k = 3/16, r0 = 1,
//! grid of 8192 points on a box of length 400.
//!
//! Every test prints one `PASS`/`FAIL` line and then asserts.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use tdho::classical::{asymptotic_fit, integrate_fundamentals, wronskian};
use tdho::model::{Model, PotentialFamily, PotentialSpec};
use tdho::propagators::{factorization_residual, self_convergence_order, tilde_u0_apply, Dynamics, StepPolicy};
use tdho::scattering::{
    cauchy_scan, dollard_phase_growth, ehrenfest_check, nonexistence_diagnostic, propagation_decay_experiment,
    ConvergenceReport, ScanConfig, Verdict, VerdictRule,
};
use tdho::spectral::{
    cutoff_mass, dilation_apply, prepare_annular_state, random_band_limited, AnnularProfile, BumpShape, CutoffSpec,
    Direction, Grid, Observable, Sides, State,
};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[acceptance] {tag} {id:>2} {name}: {detail}");
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn model() -> Model {
    Model::new(1.0, 3.0 / 16.0, 1.0).unwrap()
}

fn grid() -> Arc<Grid> {
    Grid::new(8192, 400.0).unwrap()
}

fn annulus() -> State {
    prepare_annular_state(&grid(), 0.5, 2.5, AnnularProfile::default()).unwrap()
}

/// One-sided tapered shell launched so that it sits at `x = tau xi` at `r0`.
fn scan_state(model: &Model) -> State {
    let launch = model.reduced_clock(model.r0()) / model.big_lambda();
    let profile = AnnularProfile { shape: BumpShape::TaperedGaussian { kappa: 5.0 }, sides: Sides::Positive, launch };
    prepare_annular_state(&grid(), 0.5, 3.0, profile).unwrap()
}

fn scan(model: &Model, family: PotentialFamily, rho: f64, modified: bool, n_doublings: usize) -> ConvergenceReport {
    let cfg = ScanConfig {
        t0: 8.0,
        n_doublings,
        modified,
        policy: StepPolicy::graded(0.01, 0.01, model),
        rule: VerdictRule::default(),
        budget_seconds: None,
    };
    cauchy_scan(&scan_state(model), model, &PotentialSpec::new(family, rho, 1.0, 1.0), &cfg).unwrap()
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

#[test]
fn c01_wronskian_conservation() {
    let start = Instant::now();
    let f = integrate_fundamentals(&model(), 1e3, 1e-12).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=100_000 {
        let t = 1e3 * i as f64 / 100_000.0;
        worst = worst.max((wronskian(&f, t).unwrap() - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    report(1, "wronskian", worst <= 1e-8 && secs < 10.0, &format!("max |W - 1| = {worst:.2e}, {secs:.2}s"));
}

#[test]
fn c02_interior_oracle_and_tail_exponents() {
    let m = model();
    let f = integrate_fundamentals(&m, 1e4, 1e-12).unwrap();
    let w = (m.k() / m.mass()).sqrt();
    let mut worst: f64 = 0.0;
    for i in 0..=1000 {
        let t = i as f64 / 1000.0;
        let v = f.eval(t).unwrap();
        let d = [v.z1 - (w * t).cos(), v.z1p + w * (w * t).sin(), v.z2 - (w * t).sin() / w, v.z2p - (w * t).cos()];
        worst = d.iter().fold(worst, |a, x| a.max(x.abs()));
    }
    let fit = asymptotic_fit(&f, (1e2, 1e4)).unwrap();
    let (e1, e2) = fit.free_exponents;
    let exp_err = (e1 - 0.25).abs().max((e2 - 0.75).abs());
    report(
        2,
        "interior oracle and tail exponents",
        worst <= 1e-8 && exp_err <= 1e-3,
        &format!("interior max error {worst:.2e}, exponents ({e1:.6}, {e2:.6})"),
    );
}

#[test]
fn c03_ehrenfest_and_strang_order() {
    let m = model();
    let f = integrate_fundamentals(&m, 110.0, 1e-12).unwrap();
    let phi = State::gaussian(grid(), 1.0, 0.2, 1.0);
    let times: Vec<f64> = (0..=20).map(|i| 5.0 * i as f64).collect();
    let rep = ehrenfest_check(&phi, &f, &times, StepPolicy::graded(0.001, 0.002, &m)).unwrap();
    let spec = PotentialSpec::new(PotentialFamily::ShortRange, 2.0, 1.0, 1.0);
    let st = State::gaussian(grid(), 0.0, 0.5, 1.0);
    let q_full = self_convergence_order(&st, 1.0, 3.0, 0.1, Dynamics::Full, &m, &spec).unwrap();
    let q_red = self_convergence_order(&st, 1.0, 3.0, 0.1, Dynamics::Reduced, &m, &spec).unwrap();
    let q_free = self_convergence_order(&st, 1.0, 3.0, 0.1, Dynamics::Full, &m, &PotentialSpec::zero()).unwrap();
    let ok_order = [q_full, q_red, q_free].iter().all(|q| (q - 2.0).abs() <= 0.1);
    report(
        3,
        "ehrenfest and strang order",
        rep.max_rel_error <= 1e-6 && ok_order,
        &format!(
            "max relative error {:.2e}; order full {q_full:.3}, reduced {q_red:.3}, full V=0 {q_free:.3}",
            rep.max_rel_error
        ),
    );
}

/// Each refinement lowers the residual unless it already sits on the
/// interpolation floor of the dilation, where it may move by a few percent.
fn refines_to_floor(r: &[f64]) -> bool {
    r.windows(2).all(|w| w[1] < w[0] || (w[1] - w[0]).abs() <= 0.05 * w[0])
}

#[test]
fn c04_factorization() {
    let m = model();
    // The scattered tail of the full state at t = 100 needs the wider box.
    let phi = State::gaussian(Grid::new(16384, 800.0).unwrap(), 0.0, 0.1, 1.43);
    let short = PotentialSpec::new(PotentialFamily::ShortRange, 2.0, 1.0, 1.0);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    let mut refined = true;
    for (label, spec) in [("V=0", PotentialSpec::zero()), ("rho=2", short)] {
        for t in [10.0, 100.0] {
            let r: Vec<f64> = [0.02, 0.01, 0.005]
                .iter()
                .map(|&h| factorization_residual(&phi, t, &m, &spec, StepPolicy::Uniform { h }).unwrap().residual)
                .collect();
            worst = worst.max(r[1]);
            refined &= refines_to_floor(&r);
            parts.push(format!("{label} t={t}: {}", sci(&r)));
        }
    }
    report(
        4,
        "factorization",
        worst <= 1e-3 && refined,
        &format!("residuals at h = 0.02, 0.01, 0.005: {}", parts.join("; ")),
    );
}

#[test]
fn c05_dilation_conjugation() {
    let g = grid();
    let mut worst: f64 = 0.0;
    for seed in [1u64, 2, 3] {
        let st = random_band_limited(&g, seed, 8.0, 10.0).unwrap();
        let (x2, p2) = (st.expectation(Observable::X2), st.expectation(Observable::P2));
        for beta in [-0.3f64, -0.1, 0.1, 0.3] {
            let d = dilation_apply(&st, (2.0 * beta).exp()).unwrap();
            let ex = d.expectation(Observable::X2) / (x2 * (-4.0 * beta).exp()) - 1.0;
            let ep = d.expectation(Observable::P2) / (p2 * (4.0 * beta).exp()) - 1.0;
            worst = worst.max(ex.abs()).max(ep.abs());
        }
    }
    report(5, "dilation conjugation", worst <= 1e-5, &format!("max relative error {worst:.2e}"));
}

#[test]
fn c06_propagation_estimate() {
    let times: Vec<f64> = (0..7).map(|j| 10f64.powf(1.0 + j as f64 / 3.0)).collect();
    let rep = propagation_decay_experiment(&annulus(), &model(), &times).unwrap();
    let outer = match rep.outer_fit {
        Some(f) => format!("outer slope {:.3}", f.slope),
        None => "outer below floor or off-grid for the fit".to_string(),
    };
    report(
        6,
        "propagation estimate",
        rep.inner_fit.slope <= -0.4 && rep.outer_monotone,
        &format!(
            "inner slope {:.3} (r2 {:.4}); outer monotone {}; {outer}; outer {}",
            rep.inner_fit.slope,
            rep.inner_fit.r2,
            rep.outer_monotone,
            sci(&rep.outer)
        ),
    );
}

#[test]
fn c07_free_comparison_identities() {
    let m = model();
    let mut ad6: f64 = 0.0;
    for (x0, p0) in [(1.0, 0.5), (-2.0, 1.2), (0.5, -0.8)] {
        let phi = State::gaussian(grid(), x0, p0, 1.0);
        let p = phi.expectation(Observable::P);
        for t in [10.0, 100.0] {
            let (out, _) = tilde_u0_apply(&phi, t, &m).unwrap();
            let want = m.reduced_clock(t) * p / m.big_lambda();
            ad6 = ad6.max((out.expectation(Observable::X) - want).abs() / want.abs().max(1.0));
        }
    }
    let phi = annulus();
    let inner = CutoffSpec::sharp(0.5 / m.big_lambda(), Direction::Below);
    let mut ad5: f64 = 0.0;
    for t in [100.0, 300.0, 1000.0] {
        let (out, _) = tilde_u0_apply(&phi, t, &m).unwrap();
        ad5 = ad5.max(cutoff_mass(&out, &inner, m.reduced_clock(t)));
    }
    report(
        7,
        "free comparison identities",
        ad6 <= 1e-6 && ad5 <= 1e-3,
        &format!("position identity error {ad6:.2e}; inner cutoff mass {ad5:.2e}"),
    );
}

#[test]
fn c08_short_range_existence() {
    let m = model();
    let start = Instant::now();
    let rep = scan(&m, PotentialFamily::ShortRange, 2.0, false, 6);
    let secs = start.elapsed().as_secs_f64();
    let slope = rep.slope.map_or(f64::NAN, |f| f.slope);
    report(
        8,
        "short-range existence",
        rep.verdict == Verdict::Cauchy && (slope + 0.5).abs() <= 0.15 && secs < 600.0,
        &format!("verdict {}, tail slope {slope:.3}, diffs {}, {secs:.1}s", rep.verdict, sci(&rep.diffs)),
    );
}

#[test]
fn c09_dollard_window() {
    let m = model();
    let spec = PotentialSpec::new(PotentialFamily::DollardLong, 1.2, 1.0, 1.0);
    let start = Instant::now();
    let growth = dollard_phase_growth(&m, &spec, 1.0, 1e2, 1e6, 21).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let modified = scan(&m, PotentialFamily::DollardLong, 1.2, true, 6);
    let plain = scan(&m, PotentialFamily::DollardLong, 1.2, false, 6);
    let below = modified.diffs.iter().zip(&plain.diffs).skip(2).all(|(a, b)| a < b);
    let g = growth.growth.slope;
    report(
        9,
        "dollard window",
        (g - 0.1).abs() <= 0.03 && secs < 60.0 && modified.verdict == Verdict::Cauchy && below,
        &format!(
            "phase exponent {g:.4} ({secs:.2}s); modified {} [{}]; unmodified {} [{}]",
            modified.verdict,
            sci(&modified.diffs),
            plain.verdict,
            sci(&plain.diffs)
        ),
    );
}

#[test]
fn c10_nonexistence() {
    let m = model();
    let phi = annulus();
    let boundary = PotentialSpec::new(PotentialFamily::LongRange, 4.0 / 3.0, 1.0, 1.0);
    let log_growth = nonexistence_diagnostic(&phi, &m, &boundary, 1e2, 1e6, 21).unwrap();
    let coulomb = PotentialSpec::new(PotentialFamily::LongRange, 1.0, 1.0, 1.0);
    let power = nonexistence_diagnostic(&phi, &m, &coulomb, 1e2, 1e6, 21).unwrap();
    let short = PotentialSpec::new(PotentialFamily::ShortRange, 2.0, 1.0, 1.0);
    let control = nonexistence_diagnostic(&phi, &m, &short, m.r0(), 1e4, 21).unwrap();
    let pde = scan(&m, PotentialFamily::LongRange, 4.0 / 3.0, false, 7);
    let r2 = log_growth.log_fit.r2;
    let e = power.growth.slope;
    let ok = r2 >= 0.999
        && (e - 0.25).abs() <= 0.02
        && control.dyadic_tail_ratio <= 0.01
        && pde.verdict == Verdict::NonCauchy;
    report(
        10,
        "nonexistence",
        ok,
        &format!(
            "rho=4/3 log-fit r2 {r2:.6}; rho=1 exponent {e:.4}; rho=2 tail ratio {:.2e}; scan to t={} {} [{}]",
            control.dyadic_tail_ratio,
            pde.times.last().unwrap(),
            pde.verdict,
            sci(&pde.diffs)
        ),
    );
}

#[test]
fn c11_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "experiment = cauchy_scan\n\
               potential.family = short_range\n\
               potential.rho = 2\n\
               grid.n_points = 2048\n\
               grid.length = 200\n\
               schedule.n_doublings = 4\n\
               schedule.h0 = 0.05\n\
               schedule.growth = 0.05\n";
    let parsed = tdho_cli::config::RunConfig::parse(cfg, &[]).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    tdho_cli::run::run(&parsed, &a).unwrap();
    tdho_cli::run::run(&parsed, &b).unwrap();
    let resolved = std::fs::read_to_string(a.join("resolved.cfg")).unwrap();
    let replay = tdho_cli::config::RunConfig::parse(&resolved, &[]).unwrap();
    tdho_cli::run::run(&replay, &c).unwrap();
    let csv = |d: &std::path::Path| std::fs::read(d.join("convergence.csv")).unwrap();
    let same = csv(&a) == csv(&b);
    let replayed = csv(&a) == csv(&c);
    let table = tdho::io::Table::read(&a.join("convergence.csv")).unwrap();
    let v = ConvergenceReport::verdict_from_table(&table, &VerdictRule::default()).unwrap();
    let summary = std::fs::read_to_string(a.join("verdict.txt")).unwrap();
    let agrees = summary.contains(&format!("verdict={v}"));
    report(
        11,
        "determinism",
        same && replayed && agrees,
        &format!("identical runs equal {same}; resolved-config replay equal {replayed}; stored verdict {v}"),
    );
}
