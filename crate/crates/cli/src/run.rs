//! Executes one configured experiment and writes its artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use tdho::classical::integrate_fundamentals;
use tdho::io::{Table, SCHEMA_VERSION};
use tdho::model::{classify, Classification, Model};
use tdho::propagators::factorization_residual;
use tdho::scattering::{
    cauchy_scan, dollard_phase_growth, ehrenfest_check, nonexistence_diagnostic, propagation_decay_experiment,
    ScanConfig, VerdictRule,
};
use tdho::spectral::{prepare_annular_state, random_band_limited, Grid, State};

use crate::config::{RunConfig, StateKind};
use crate::registry::Experiment;
use crate::CliError;

/// What a finished run reports on its verdict line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub experiment: String,
    /// `cauchy`, `noncauchy` or `inconclusive` for scans, `divergent` or
    /// `convergent` for growth experiments, `pass` or `fail` otherwise.
    pub verdict: String,
    pub metrics: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
}

impl RunSummary {
    /// The one-line summary, also stored as `verdict.txt`.
    pub fn line(&self) -> String {
        let mut s = format!("experiment={} verdict={}", self.experiment, self.verdict);
        for (k, v) in &self.metrics {
            s.push_str(&format!(" {k}={v:.6e}"));
        }
        s
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    config: BTreeMap<&'a str, &'a str>,
    summary: &'a RunSummary,
}

fn geometric(t0: f64, t1: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(t0 > 0.0 && t1 >= t0) || n == 0 {
        return Err(CliError::Config(format!("need 0 < t0 <= t1 and n_points >= 1, got [{t0}, {t1}], {n}")));
    }
    if n == 1 {
        return Ok(vec![t0]);
    }
    Ok((0..n).map(|j| if j == n - 1 { t1 } else { t0 * (t1 / t0).powf(j as f64 / (n - 1) as f64) }).collect())
}

fn linear(t0: f64, t1: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(t1 >= t0) || n < 2 {
        return Err(CliError::Config(format!("need t0 <= t1 and n_points >= 2, got [{t0}, {t1}], {n}")));
    }
    Ok((0..n).map(|j| if j == n - 1 { t1 } else { t0 + (t1 - t0) * j as f64 / (n - 1) as f64 }).collect())
}

fn initial_state(cfg: &RunConfig, model: &Model) -> Result<State, CliError> {
    let grid = Grid::new(cfg.grid_points, cfg.grid_length)?;
    let s = &cfg.state;
    Ok(match s.kind {
        StateKind::Annular => prepare_annular_state(&grid, s.eps, s.r, cfg.annular_profile(model))?,
        StateKind::Gaussian => State::gaussian(grid, s.x0, s.p0, s.width),
        StateKind::Random => random_band_limited(&grid, cfg.seed, s.k_max, s.extent)?,
    })
}

/// Runs `cfg`, writing CSV data, `resolved.cfg`, `metadata.json` and
/// `verdict.txt` into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunSummary, CliError> {
    let model = cfg.build_model()?;
    if let Classification::Invalid(why) = classify(&cfg.potential, &model) {
        return Err(CliError::Config(format!("potential does not fit its declared family: {why}")));
    }
    fs::create_dir_all(out)?;
    let sch = &cfg.schedule;
    let policy = cfg.step_policy(&model);
    let mut metrics = BTreeMap::new();
    let pass = |ok: bool| if ok { "pass" } else { "fail" }.to_string();

    let (verdict, table, file) = match cfg.experiment {
        Experiment::Fundamentals => {
            let f = integrate_fundamentals(&model, sch.t1, sch.ode_tol)?;
            let worst = (0..f.times().len()).map(|i| (f.node(i).wronskian() - 1.0).abs()).fold(0.0, f64::max);
            metrics.insert("max_wronskian_error".into(), worst);
            if let Some(c) = f.coefficients() {
                metrics.extend([("c1".into(), c.c1), ("c2".into(), c.c2), ("c3".into(), c.c3), ("c4".into(), c.c4)]);
            }
            let path = out.join("fundamentals.csv");
            f.write_csv(&path)?;
            (pass(worst <= 1e-8), None, "fundamentals.csv")
        }
        Experiment::Ehrenfest => {
            let times = linear(sch.t0.max(0.0), sch.t1, sch.n_points)?;
            let f = integrate_fundamentals(&model, sch.t1 + 1.0, sch.ode_tol)?;
            let rep = ehrenfest_check(&initial_state(cfg, &model)?, &f, &times, policy)?;
            metrics.insert("max_rel_error".into(), rep.max_rel_error);
            (pass(rep.max_rel_error <= 1e-6), Some(rep.to_table()), "ehrenfest.csv")
        }
        Experiment::Factorization => {
            let phi = initial_state(cfg, &model)?;
            let mut t = Table::new(&["t", "residual"]);
            let mut worst: f64 = 0.0;
            for time in geometric(sch.t0, sch.t1, sch.n_points)? {
                let r = factorization_residual(&phi, time, &model, &cfg.potential, policy)?;
                worst = worst.max(r.residual);
                t.push(vec![time, r.residual]);
            }
            metrics.insert("max_residual".into(), worst);
            (pass(worst <= 1e-3), Some(t), "factorization.csv")
        }
        Experiment::PropagationDecay => {
            let times = geometric(sch.t0, sch.t1, sch.n_points)?;
            let rep = propagation_decay_experiment(&initial_state(cfg, &model)?, &model, &times)?;
            let target = -(1.0 - 2.0 * model.lambda()) + 0.1;
            metrics.insert("inner_slope".into(), rep.inner_fit.slope);
            metrics.insert("inner_r2".into(), rep.inner_fit.r2);
            if let Some(f) = rep.outer_fit {
                metrics.insert("outer_slope".into(), f.slope);
            }
            let ok = rep.inner_fit.slope <= target && rep.outer_monotone;
            (pass(ok), Some(rep.to_table()), "decay.csv")
        }
        Experiment::CauchyScan | Experiment::DollardScan => {
            let scan = ScanConfig {
                t0: sch.t0,
                n_doublings: sch.n_doublings,
                modified: sch.modified,
                policy,
                rule: VerdictRule::default(),
                budget_seconds: sch.budget_seconds,
            };
            let rep = cauchy_scan(&initial_state(cfg, &model)?, &model, &cfg.potential, &scan)?;
            if let Some(f) = rep.slope {
                metrics.insert("slope".into(), f.slope);
            }
            metrics.insert("final_diff".into(), *rep.diffs.last().expect("n_doublings >= 4"));
            metrics.insert("floor".into(), rep.floor);
            metrics.insert("max_edge_mass".into(), rep.max_edge_mass);
            (rep.verdict.to_string(), Some(rep.to_table()), "convergence.csv")
        }
        Experiment::Nonexistence => {
            let phi = initial_state(cfg, &model)?;
            let rep = nonexistence_diagnostic(&phi, &model, &cfg.potential, sch.t0, sch.t1, sch.n_points)?;
            metrics.insert("growth_exponent".into(), rep.growth.slope);
            metrics.insert("log_fit_r2".into(), rep.log_fit.r2);
            metrics.insert("dyadic_tail_ratio".into(), rep.dyadic_tail_ratio);
            (rep.verdict.to_string(), Some(rep.to_table("I1")), "phase_growth.csv")
        }
        Experiment::PhaseGrowth => {
            let rep = dollard_phase_growth(&model, &cfg.potential, sch.xi0, sch.t0, sch.t1, sch.n_points)?;
            metrics.insert("growth_exponent".into(), rep.growth.slope);
            metrics.insert("log_fit_r2".into(), rep.log_fit.r2);
            (rep.verdict.to_string(), Some(rep.to_table("alpha")), "phase_growth.csv")
        }
    };
    if let Some(t) = table {
        t.write(&out.join(file))?;
    }

    let summary = RunSummary {
        experiment: cfg.experiment.name().to_string(),
        verdict,
        metrics,
        outputs: vec![file.to_string(), "resolved.cfg".into(), "metadata.json".into(), "verdict.txt".into()],
    };
    fs::write(out.join("resolved.cfg"), cfg.to_string())?;
    let meta = Metadata {
        schema_version: SCHEMA_VERSION,
        tool: "tdho",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.entries().collect(),
        summary: &summary,
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Config(e.to_string()))?;
    fs::write(out.join("metadata.json"), json + "\n")?;
    fs::write(out.join("verdict.txt"), summary.line() + "\n")?;
    Ok(summary)
}

/// Outcome of one named run in a matrix.
pub type NamedOutcome = (String, Result<RunSummary, CliError>);

/// Runs several configurations on `jobs` workers, each into `out/<name>`,
/// and writes `out/summary.txt` once all have finished.
pub fn run_matrix(runs: &[(String, RunConfig)], out: &Path, jobs: usize) -> Result<Vec<NamedOutcome>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))?;
    let results: Vec<(String, Result<RunSummary, CliError>)> = pool.install(|| {
        runs.par_iter()
            .map(|(name, cfg)| {
                let dir: PathBuf = out.join(name);
                (name.clone(), run(cfg, &dir))
            })
            .collect()
    });
    fs::create_dir_all(out)?;
    let mut text = String::new();
    for (name, r) in &results {
        match r {
            Ok(s) => text.push_str(&format!("{name}: {}\n", s.line())),
            Err(e) => text.push_str(&format!("{name}: error: {e}\n")),
        }
    }
    fs::write(out.join("summary.txt"), text)?;
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grids() {
        assert_eq!(geometric(10.0, 1000.0, 3).unwrap(), vec![10.0, 100.0000000000000, 1000.0]);
        assert_eq!(geometric(5.0, 5.0, 1).unwrap(), vec![5.0]);
        assert_eq!(linear(0.0, 10.0, 3).unwrap(), vec![0.0, 5.0, 10.0]);
        assert!(geometric(0.0, 1.0, 3).is_err());
    }
}
