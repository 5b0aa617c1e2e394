//! Wave-operator approximants, dyadic Cauchy scans, the propagation-estimate
//! and phase-growth experiments, and the verdicts drawn from them.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classical::Fundamentals;
use crate::error::{Error, Result};
use crate::io::Table;
use crate::model::{Model, PotentialSpec};
use crate::propagators::{
    dollard_modifier_apply, evolve_full_in_place, evolve_reduced_in_place, free_reduced, DollardPhase, StepPlan,
    StepPolicy,
};
use crate::quadrature::{integrate_log, QuadOptions};
use crate::spectral::{cutoff_mass, CutoffSpec, Direction, Observable, State};

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateFit(format!("need matching samples, got {} and {}", xs.len(), ys.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(SlopeFit { slope, intercept, r2 })
}

/// Log-log slope fit; needs at least four strictly positive points.
pub fn slope_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() < 4 || xs.len() != ys.len() {
        return Err(Error::DegenerateFit(format!("need at least 4 points, got {}", xs.len().min(ys.len()))));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::DegenerateFit("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Log-log slope over `len` consecutive points starting at `start`.
pub fn slope_fit_window(xs: &[f64], ys: &[f64], start: usize, len: usize) -> Result<SlopeFit> {
    let end = start + len;
    if end > xs.len() || end > ys.len() {
        return Err(Error::DegenerateFit(format!("window {start}..{end} exceeds {} points", xs.len())));
    }
    slope_fit(&xs[start..end], &ys[start..end])
}

/// Growth exponent from increments on a geometric grid: if `y ~ A t^g + B`
/// then `y_{j+1} - y_j ~ t_j^g`, free of the offset `B`.
pub fn increment_exponent(ts: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if ts.len() != ys.len() || ts.len() < 5 {
        return Err(Error::DegenerateFit("need at least 5 samples for increments".into()));
    }
    let inc: Vec<f64> = ys.windows(2).map(|w| w[1] - w[0]).collect();
    slope_fit(&ts[..ts.len() - 1], &inc)
}

/// `W(t) phi = U_S(r0, t) U_S0(t, r0) [e^(-i alpha(t, p))] phi`.
pub fn wave_approx(
    phi: &State,
    t: f64,
    model: &Model,
    spec: &PotentialSpec,
    modified: bool,
    policy: StepPolicy,
) -> Result<State> {
    let r0 = model.r0();
    let mut psi = comparison_state(phi, t, model, spec, modified, None)?;
    evolve_reduced_in_place(&mut psi, &StepPlan::new(t, r0, policy)?, model, spec)?;
    Ok(psi)
}

/// `U_S0(t, r0) [e^(-i alpha(t))] phi`; reuses `phase` when it is already at `t`.
fn comparison_state(
    phi: &State,
    t: f64,
    model: &Model,
    spec: &PotentialSpec,
    modified: bool,
    phase: Option<&DollardPhase>,
) -> Result<State> {
    let free = free_reduced(phi, model.r0(), t, model)?;
    if !modified {
        return Ok(free);
    }
    match phase {
        Some(ph) => dollard_modifier_apply(&free, ph),
        None => {
            let mut ph = DollardPhase::new(phi.grid(), model);
            if t > model.r0() {
                ph.accumulate(t, model, spec)?;
            }
            dollard_modifier_apply(&free, &ph)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Cauchy,
    NonCauchy,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Cauchy => "cauchy",
            Verdict::NonCauchy => "noncauchy",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cauchy" => Ok(Verdict::Cauchy),
            "noncauchy" => Ok(Verdict::NonCauchy),
            "inconclusive" => Ok(Verdict::Inconclusive),
            other => Err(Error::Domain(format!("unknown verdict `{other}`"))),
        }
    }
}

/// Calibration constants of the Cauchy verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictRule {
    /// Tail slope at or below which the differences count as decaying.
    pub slope_max: f64,
    /// A final difference within this many floors counts as converged.
    pub cauchy_floor_factor: f64,
    /// Each of the last three differences must reach this fraction of the maximum...
    pub noncauchy_fraction: f64,
    /// ...and this many floors, for a NonCauchy verdict.
    pub noncauchy_floor_factor: f64,
    /// Number of trailing differences in the reported slope.
    pub tail_window: usize,
}

impl Default for VerdictRule {
    fn default() -> Self {
        Self {
            slope_max: -0.1,
            cauchy_floor_factor: 10.0,
            noncauchy_fraction: 0.3,
            noncauchy_floor_factor: 100.0,
            tail_window: 4,
        }
    }
}

/// Smallest value used in place of an exactly vanishing difference when fitting.
const FIT_FLOOR: f64 = 1e-300;
/// Lower bound of the numerical floor of a scan.
pub const MIN_FLOOR: f64 = 1e-12;

impl VerdictRule {
    /// Slope over the trailing window and the verdict it implies.
    pub fn judge(&self, times: &[f64], diffs: &[f64], floor: f64) -> (Option<SlopeFit>, Verdict) {
        let n = diffs.len();
        let clamped: Vec<f64> = diffs.iter().map(|d| d.max(FIT_FLOOR)).collect();
        let w = self.tail_window.min(n);
        let fit = slope_fit_window(&times[..n], &clamped, n - w, w).ok();
        let last = *diffs.last().unwrap_or(&f64::INFINITY);
        let max = diffs.iter().copied().fold(0.0, f64::max);
        let verdict = if last <= self.cauchy_floor_factor * floor || fit.is_some_and(|f| f.slope <= self.slope_max) {
            Verdict::Cauchy
        } else if n >= 3 && {
            let bar = (self.noncauchy_fraction * max).max(self.noncauchy_floor_factor * floor);
            diffs[n - 3..].iter().all(|&d| d >= bar)
        } {
            Verdict::NonCauchy
        } else {
            Verdict::Inconclusive
        };
        (fit, verdict)
    }
}

/// Configuration of a dyadic Cauchy scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub t0: f64,
    pub n_doublings: usize,
    pub modified: bool,
    pub policy: StepPolicy,
    pub rule: VerdictRule,
    pub budget_seconds: Option<f64>,
}

/// Dyadic-time differences `|| W(t_{j+1}) phi - W(t_j) phi ||` and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// `t_j = 2^j t0`, `j = 0..=n_doublings`.
    pub times: Vec<f64>,
    pub diffs: Vec<f64>,
    /// Slope over the trailing window.
    pub slope: Option<SlopeFit>,
    /// Slope over every difference.
    pub slope_full: Option<SlopeFit>,
    pub floor: f64,
    pub verdict: Verdict,
    /// Largest squared norm within 5% of the grid edge among the comparison states.
    pub max_edge_mass: f64,
    pub config: ScanConfig,
}

/// Runs the scan.
///
/// By unitarity `|| W(t_{j+1}) phi - W(t_j) phi || = || U_S(t_j, t_{j+1}) psi_{j+1} - psi_j ||`
/// with `psi_j` the comparison state at `t_j`, so only the segments between
/// consecutive dyadic times are ever propagated.
pub fn cauchy_scan(phi: &State, model: &Model, spec: &PotentialSpec, cfg: &ScanConfig) -> Result<ConvergenceReport> {
    let r0 = model.r0();
    if !(cfg.t0 >= 4.0 * r0) {
        return Err(Error::Domain(format!("scan start t0 = {} must be at least 4 r0", cfg.t0)));
    }
    if cfg.n_doublings < 4 {
        return Err(Error::Domain(format!("need at least 4 doublings, got {}", cfg.n_doublings)));
    }
    let n = cfg.n_doublings;
    let times: Vec<f64> = (0..=n).map(|j| cfg.t0 * 2f64.powi(j as i32)).collect();
    let plans: Vec<StepPlan> =
        (0..n).map(|j| StepPlan::new(times[j + 1], times[j], cfg.policy)).collect::<Result<_>>()?;
    let refined = StepPlan::new(times[n], times[n - 1], cfg.policy.refined())?;
    let step_count = |p: &StepPlan| p.nodes().map(|v| v.len() - 1).unwrap_or(0);
    let total_steps: usize = plans.iter().map(step_count).sum::<usize>() + step_count(&refined);

    let mut phase = DollardPhase::new(phi.grid(), model);
    let mut states = Vec::with_capacity(n + 1);
    let mut max_edge_mass: f64 = 0.0;
    let edge = 0.05 * phi.grid().length();
    for &t in &times {
        if cfg.modified {
            phase.accumulate(t, model, spec)?;
        }
        let psi = comparison_state(phi, t, model, spec, cfg.modified, Some(&phase))?;
        max_edge_mass = max_edge_mass.max(psi.edge_mass(edge));
        states.push(psi);
    }

    let mut diffs = Vec::with_capacity(n);
    let start = Instant::now();
    let mut last_segment = None;
    for j in 0..n {
        let mut seg = states[j + 1].clone();
        let steps = evolve_reduced_in_place(&mut seg, &plans[j], model, spec)?;
        if j == 0 {
            if let Some(budget) = cfg.budget_seconds {
                let per_step = start.elapsed().as_secs_f64() / steps.max(1) as f64;
                let projected = per_step * total_steps as f64;
                if projected > budget {
                    return Err(Error::Budget { projected, budget });
                }
            }
        }
        diffs.push(seg.distance(&states[j])?);
        if j == n - 1 {
            last_segment = Some(seg);
        }
    }
    let mut check = states[n].clone();
    evolve_reduced_in_place(&mut check, &refined, model, spec)?;
    let discrepancy = check.distance(last_segment.as_ref().expect("n >= 4"))?;
    let floor = discrepancy.max(MIN_FLOOR);

    let (slope, verdict) = cfg.rule.judge(&times, &diffs, floor);
    let clamped: Vec<f64> = diffs.iter().map(|d| d.max(FIT_FLOOR)).collect();
    let slope_full = slope_fit(&times[..n], &clamped).ok();
    Ok(ConvergenceReport { times, diffs, slope, slope_full, floor, verdict, max_edge_mass, config: *cfg })
}

impl ConvergenceReport {
    /// Rows `t, diff, slope_window, floor`; `slope_window` is the trailing-window
    /// slope ending at that row (NaN until the window fills).
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["t", "diff", "slope_window", "floor"]);
        let w = self.config.rule.tail_window;
        let clamped: Vec<f64> = self.diffs.iter().map(|d| d.max(FIT_FLOOR)).collect();
        for (j, &d) in self.diffs.iter().enumerate() {
            let s = if j + 1 >= w {
                slope_fit_window(&self.times, &clamped, j + 1 - w, w).map(|f| f.slope).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            };
            t.push(vec![self.times[j], d, s, self.floor]);
        }
        t
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.to_table().write(path)
    }

    /// Recomputes the verdict from a stored table.
    pub fn verdict_from_table(table: &Table, rule: &VerdictRule) -> Result<Verdict> {
        let col = |name: &str| table.column(name).ok_or_else(|| Error::Domain(format!("missing column `{name}`")));
        let times = col("t")?;
        let diffs = col("diff")?;
        let floor = *col("floor")?.first().ok_or_else(|| Error::Domain("empty table".into()))?;
        Ok(rule.judge(&times, &diffs, floor).1)
    }
}

/// Inner and outer cutoff norms of freely evolved annular states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub times: Vec<f64>,
    /// Norm on `|x| / t^(1 - 2 lambda) <= eps / Lambda`.
    pub inner: Vec<f64>,
    /// Norm on `|x| / t^(1 - 2 lambda) >= 3 R / Lambda`.
    pub outer: Vec<f64>,
    /// Whether the outer region starts inside the grid.
    pub outer_in_grid: Vec<bool>,
    pub edge_mass: Vec<f64>,
    pub inner_fit: SlopeFit,
    /// Fit over in-grid outer values above the floor, when at least four exist.
    pub outer_fit: Option<SlopeFit>,
    pub outer_monotone: bool,
}

/// Norm below which a cutoff value is treated as numerical noise.
pub const MASS_FLOOR: f64 = 1e-13;

/// Free reduced evolution of an annular state with the inner and outer cutoffs.
pub fn propagation_decay_experiment(phi: &State, model: &Model, times: &[f64]) -> Result<DecayReport> {
    let meta = phi.meta();
    let (eps, r) = match (meta.eps, meta.r) {
        (Some(e), Some(r)) => (e, r),
        _ => return Err(Error::Domain("state lacks its annulus (eps, R) record".into())),
    };
    let big = model.big_lambda();
    let inner_spec = CutoffSpec::sharp(eps / big, Direction::Below);
    let outer_spec = CutoffSpec::sharp(3.0 * r / big, Direction::Above);
    let half = 0.5 * phi.grid().length();
    let edge = 0.05 * phi.grid().length();
    let mut rep = DecayReport {
        times: times.to_vec(),
        inner: Vec::new(),
        outer: Vec::new(),
        outer_in_grid: Vec::new(),
        edge_mass: Vec::new(),
        inner_fit: SlopeFit { slope: f64::NAN, intercept: f64::NAN, r2: f64::NAN },
        outer_fit: None,
        outer_monotone: true,
    };
    for &t in times {
        let psi = free_reduced(phi, model.r0(), t, model)?;
        let scale = model.reduced_clock(t);
        let inner = cutoff_mass(&psi, &inner_spec, scale);
        if inner <= MASS_FLOOR {
            return Err(Error::Floor(t));
        }
        rep.inner.push(inner);
        rep.outer.push(cutoff_mass(&psi, &outer_spec, scale));
        rep.outer_in_grid.push(3.0 * r / big * scale < half);
        rep.edge_mass.push(psi.edge_mass(edge));
    }
    rep.inner_fit = slope_fit(times, &rep.inner)?;
    let (ot, ov): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&rep.outer)
        .zip(&rep.outer_in_grid)
        .filter(|((_, &v), &inside)| inside && v > MASS_FLOOR)
        .map(|((&t, &v), _)| (t, v))
        .unzip();
    rep.outer_fit = slope_fit(&ot, &ov).ok();
    rep.outer_monotone = rep.outer.windows(2).all(|w| w[1] <= w[0]);
    Ok(rep)
}

impl DecayReport {
    /// Rows `t, inner_mass, outer_mass, outer_in_grid, edge_mass`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["t", "inner_mass", "outer_mass", "outer_in_grid", "edge_mass"]);
        for j in 0..self.times.len() {
            t.push(vec![
                self.times[j],
                self.inner[j],
                self.outer[j],
                f64::from(u8::from(self.outer_in_grid[j])),
                self.edge_mass[j],
            ]);
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthVerdict {
    /// Increments do not decay: the integral grows without bound.
    Divergent,
    /// Increments decay like a power: the integral converges.
    Convergent,
}

impl fmt::Display for GrowthVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GrowthVerdict::Divergent => "divergent",
            GrowthVerdict::Convergent => "convergent",
        })
    }
}

/// Increment exponents above this count as non-decaying.
pub const DIVERGENCE_SLACK: f64 = 0.02;

/// Growth of a phase integral over a geometric time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrowthReport {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Exponent of the increments (power growth exponent; 0 for logarithmic growth).
    pub growth: SlopeFit,
    /// Linear fit of the values against `ln t`.
    pub log_fit: SlopeFit,
    /// `(I(2 t_end) - I(t_end)) / I(t_end)`.
    pub dyadic_tail_ratio: f64,
    pub verdict: GrowthVerdict,
}

impl PhaseGrowthReport {
    fn build(times: Vec<f64>, values: Vec<f64>, extra: f64) -> Result<Self> {
        let growth = increment_exponent(&times, &values)?;
        let lt: Vec<f64> = times.iter().map(|t| t.ln()).collect();
        let log_fit = linear_fit(&lt, &values)?;
        let last = *values.last().expect("non-empty");
        let dyadic_tail_ratio = if last != 0.0 { extra / last } else { f64::NAN };
        let verdict =
            if growth.slope >= -DIVERGENCE_SLACK { GrowthVerdict::Divergent } else { GrowthVerdict::Convergent };
        Ok(Self { times, values, growth, log_fit, dyadic_tail_ratio, verdict })
    }

    /// Rows `t, value`.
    pub fn to_table(&self, value_name: &str) -> Table {
        let mut t = Table::new(&["t", value_name]);
        for (a, b) in self.times.iter().zip(&self.values) {
            t.push(vec![*a, *b]);
        }
        t
    }
}

fn geometric_times(t0: f64, t1: f64, n: usize) -> Result<Vec<f64>> {
    if !(t0 > 0.0 && t1 > t0) || n < 5 {
        return Err(Error::Domain(format!("need 0 < t0 < t1 and n >= 5, got [{t0}, {t1}], n = {n}")));
    }
    Ok((0..n).map(|j| if j == n - 1 { t1 } else { t0 * (t1 / t0).powf(j as f64 / (n - 1) as f64) }).collect())
}

fn accumulate(times: &[f64], mut f: impl FnMut(f64, f64) -> Result<f64>) -> Result<(Vec<f64>, f64)> {
    let mut values = vec![0.0];
    let mut acc = 0.0;
    for w in times.windows(2) {
        acc += f(w[0], w[1])?;
        values.push(acc);
    }
    let t_end = *times.last().expect("non-empty");
    let extra = f(t_end, 2.0 * t_end)?;
    Ok((values, extra))
}

/// `I_1(t0, t) = int_t0^t int V(tau, xi tau^(1 - lambda) / Lambda) |phi^(xi)|^2 dxi dtau`
/// on `n` geometric times in `[t0, t1]`.
pub fn nonexistence_diagnostic(
    phi: &State,
    model: &Model,
    spec: &PotentialSpec,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<PhaseGrowthReport> {
    let times = geometric_times(t0, t1, n)?;
    let hat = phi.momentum();
    let g = phi.grid();
    let wmax = hat.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let nodes: Vec<(f64, f64)> = hat
        .iter()
        .zip(g.xi())
        .filter(|(z, _)| z.norm_sqr() > 1e-30 * wmax)
        .map(|(z, &k)| (k, z.norm_sqr() * g.dxi()))
        .collect();
    let e = 1.0 - model.lambda();
    let big = model.big_lambda();
    let opts = QuadOptions::rel(1e-10);
    let inner = |tau: f64| -> f64 {
        let c = tau.powf(e) / big;
        nodes.iter().map(|&(k, w)| w * spec.eval(tau, k * c)).sum()
    };
    let (values, extra) = accumulate(&times, |a, b| Ok(integrate_log(inner, a, b, opts)?.value))?;
    PhaseGrowthReport::build(times, values, extra)
}

/// Unmodified Dollard phase `alpha(t, xi0)` on `n` geometric times in `[t0, t1]`,
/// measured from `r0`.
pub fn dollard_phase_growth(
    model: &Model,
    spec: &PotentialSpec,
    xi0: f64,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<PhaseGrowthReport> {
    let times = geometric_times(t0, t1, n)?;
    let e = 1.0 - model.lambda();
    let big = model.big_lambda();
    let opts = QuadOptions::rel(1e-12);
    let segment = |a: f64, b: f64| -> Result<f64> {
        Ok(integrate_log(|s| spec.eval(s, s.powf(e) * xi0 / big), a, b, opts)?.value)
    };
    let base = if t0 > model.r0() { segment(model.r0(), t0)? } else { 0.0 };
    let (mut values, extra) = accumulate(&times, segment)?;
    values.iter_mut().for_each(|v| *v += base);
    PhaseGrowthReport::build(times, values, extra)
}

/// Full-dynamics expectations against the classical flow, `V = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EhrenfestReport {
    /// Rows `(t, <x>, x_classical, <p>, p_classical)`.
    pub rows: Vec<[f64; 5]>,
    /// Largest of `|q - c| / max(|c|, 1)` over positions and momenta.
    pub max_rel_error: f64,
}

impl EhrenfestReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["t", "x", "x_classical", "p", "p_classical"]);
        for r in &self.rows {
            t.push(r.to_vec());
        }
        t
    }
}

/// Evolves `phi` from `t = 0` through increasing `times` with `V = 0`.
pub fn ehrenfest_check(phi: &State, fund: &Fundamentals, times: &[f64], policy: StepPolicy) -> Result<EhrenfestReport> {
    let model = fund.model();
    let zero = PotentialSpec::zero();
    let x0 = phi.expectation(Observable::X);
    let p0 = phi.expectation(Observable::P);
    let mut psi = phi.clone();
    let mut t = 0.0;
    let mut rows = Vec::with_capacity(times.len());
    let mut worst: f64 = 0.0;
    for &tc in times {
        if tc != t {
            evolve_full_in_place(&mut psi, &StepPlan::new(t, tc, policy)?, model, &zero)?;
            t = tc;
        }
        let (xc, pc) = fund.classical_flow(tc, x0, p0)?;
        let xq = psi.expectation(Observable::X);
        let pq = psi.expectation(Observable::P);
        worst = worst.max((xq - xc).abs() / xc.abs().max(1.0)).max((pq - pc).abs() / pc.abs().max(1.0));
        rows.push([tc, xq, xc, pq, pc]);
    }
    Ok(EhrenfestReport { rows, max_rel_error: worst })
}
