//! Time evolution: the exact reduced free propagator, Strang split-step
//! evolution for the reduced and the full Hamiltonians, the lens/dilation
//! factorization check, the comparison dynamics `U~_0` and the Dollard phase.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Table;
use crate::model::{Model, PotentialFamily, PotentialSpec};
use crate::quadrature::{integrate_log, QuadOptions};
use crate::spectral::{dilation_apply, AliasWarning, Grid, Observable, State, C64};

/// Maximum number of step halvings for [`StepPolicy::Adaptive`].
pub const MAX_HALVINGS: usize = 20;

/// How a time interval is cut into Strang steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepPolicy {
    /// Equal steps no longer than `h`.
    Uniform { h: f64 },
    /// Steps of `h0` while `|t| < switch`, then `h = growth |t|`.
    Graded { h0: f64, growth: f64, switch: f64 },
    /// Step doubling with local error `tol` per step, starting from `h0`.
    Adaptive { tol: f64, h0: f64 },
}

impl StepPolicy {
    /// Steps of `h0` up to `10 r0`, then proportional to `t`.
    pub fn graded(h0: f64, growth: f64, model: &Model) -> Self {
        StepPolicy::Graded { h0, growth, switch: 10.0 * model.r0() }
    }

    /// The same policy with every step halved.
    pub fn refined(&self) -> Self {
        match *self {
            StepPolicy::Uniform { h } => StepPolicy::Uniform { h: 0.5 * h },
            StepPolicy::Graded { h0, growth, switch } => {
                StepPolicy::Graded { h0: 0.5 * h0, growth: 0.5 * growth, switch }
            }
            StepPolicy::Adaptive { tol, h0 } => StepPolicy::Adaptive { tol: tol / 32.0, h0: 0.5 * h0 },
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepPolicy::Uniform { h } => h > 0.0,
            StepPolicy::Graded { h0, growth, switch } => h0 > 0.0 && growth > 0.0 && switch >= 0.0,
            StepPolicy::Adaptive { tol, h0 } => tol > 0.0 && h0 > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid step policy {self:?}")))
        }
    }
}

/// Time interval and slicing policy for one propagation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPlan {
    pub t_from: f64,
    pub t_to: f64,
    pub policy: StepPolicy,
}

fn uniform_nodes(lo: f64, hi: f64, h: f64, out: &mut Vec<f64>) {
    let n = ((hi - lo) / h * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    for i in 1..n {
        out.push(lo + (hi - lo) * i as f64 / n as f64);
    }
    out.push(hi);
}

fn geometric_nodes(lo: f64, hi: f64, growth: f64, out: &mut Vec<f64>) {
    let n = ((hi / lo).ln() / (1.0 + growth).ln() * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let q = (hi / lo).powf(1.0 / n as f64);
    for i in 1..n {
        out.push(lo * q.powi(i as i32));
    }
    out.push(hi);
}

impl StepPlan {
    pub fn new(t_from: f64, t_to: f64, policy: StepPolicy) -> Result<Self> {
        if !t_from.is_finite() || !t_to.is_finite() {
            return Err(Error::Domain("plan times must be finite".into()));
        }
        policy.validate()?;
        Ok(Self { t_from, t_to, policy })
    }

    /// Node times from `t_from` to `t_to` for the fixed policies.
    ///
    /// Nodes depend only on the unordered interval, so a backward plan
    /// retraces a forward one exactly. Intervals containing `t = 0` are split
    /// there.
    pub fn nodes(&self) -> Result<Vec<f64>> {
        let (a, b) = (self.t_from, self.t_to);
        if a == b {
            return Ok(vec![a]);
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let mut nodes = if lo < 0.0 && hi > 0.0 {
            let mut neg = self.half_line_nodes(0.0, -lo)?;
            neg.reverse();
            let mut nodes: Vec<f64> = neg.into_iter().map(|t| -t).collect();
            let pos = self.half_line_nodes(0.0, hi)?;
            nodes.extend(pos.into_iter().skip(1));
            nodes
        } else if hi <= 0.0 {
            let mut v: Vec<f64> = self.half_line_nodes(-hi, -lo)?.into_iter().map(|t| -t).collect();
            v.reverse();
            v
        } else {
            self.half_line_nodes(lo, hi)?
        };
        if a > b {
            nodes.reverse();
        }
        Ok(nodes)
    }

    /// Nodes on `[lo, hi]` with `0 <= lo < hi`, ascending.
    fn half_line_nodes(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let mut out = vec![lo];
        match self.policy {
            StepPolicy::Uniform { h } => uniform_nodes(lo, hi, h, &mut out),
            StepPolicy::Graded { h0, growth, switch } => {
                let mid = switch.max(lo).min(hi);
                if mid > lo {
                    uniform_nodes(lo, mid, h0, &mut out);
                }
                if hi > mid {
                    if mid == 0.0 {
                        return Err(Error::Domain("graded steps need a positive switch time".into()));
                    }
                    geometric_nodes(mid, hi, growth, &mut out);
                }
            }
            StepPolicy::Adaptive { .. } => {
                return Err(Error::Domain("adaptive plans have no fixed nodes".into()));
            }
        }
        Ok(out)
    }
}

/// One Strang step of a particular dynamics.
trait Stepper {
    fn step(&mut self, psi: &mut State, a: f64, b: f64);
}

fn run_plan(psi: &mut State, plan: &StepPlan, stepper: &mut impl Stepper) -> Result<usize> {
    match plan.policy {
        StepPolicy::Adaptive { tol, h0 } => run_adaptive(psi, plan, tol, h0, stepper),
        _ => {
            let nodes = plan.nodes()?;
            for w in nodes.windows(2) {
                stepper.step(psi, w[0], w[1]);
            }
            Ok(nodes.len() - 1)
        }
    }
}

fn run_adaptive(psi: &mut State, plan: &StepPlan, tol: f64, h0: f64, stepper: &mut impl Stepper) -> Result<usize> {
    let (a, b) = (plan.t_from, plan.t_to);
    let dir = if b >= a { 1.0 } else { -1.0 };
    let mut t = a;
    let mut h = h0;
    let mut steps = 0;
    while (b - t) * dir > 0.0 {
        let mut depth = 0;
        loop {
            let mut end = t + dir * h;
            if (end - b) * dir >= 0.0 || (b - end).abs() < 1e-12 * h {
                end = b;
            }
            // Never step across the origin.
            if t * end < 0.0 {
                end = 0.0;
            }
            let mid = 0.5 * (t + end);
            let mut coarse = psi.clone();
            stepper.step(&mut coarse, t, end);
            let mut fine = psi.clone();
            stepper.step(&mut fine, t, mid);
            stepper.step(&mut fine, mid, end);
            let err = coarse.distance(&fine)?;
            if err <= tol {
                *psi = fine;
                steps += 2;
                if err < tol / 8.0 {
                    h *= 2.0;
                }
                t = end;
                break;
            }
            depth += 1;
            if depth > MAX_HALVINGS {
                return Err(Error::Step(MAX_HALVINGS));
            }
            h *= 0.5;
        }
    }
    Ok(steps)
}

/// `sign(t) |t|^(1 - 2 lambda) / (1 - 2 lambda)`, whose derivative is `|t|^(-2 lambda)`.
pub fn reduced_time(model: &Model, t: f64) -> f64 {
    let e = 1.0 - 2.0 * model.lambda();
    t.signum() * t.abs().powf(e) / e
}

fn check_channel(model: &Model, a: f64, b: f64) -> Result<()> {
    let r0 = model.r0() * (1.0 - 1e-12);
    let same_side = (a >= r0 && b >= r0) || (a <= -r0 && b <= -r0);
    if same_side {
        Ok(())
    } else {
        Err(Error::Channel { t_from: a, t_to: b, r0: model.r0() })
    }
}

fn reduced_kinetic_factors(grid: &Grid, model: &Model, a: f64, b: f64) -> Vec<C64> {
    let c = -(reduced_time(model, b) - reduced_time(model, a)) / (2.0 * model.mass());
    grid.xi().iter().map(|&k| C64::from_polar(1.0, c * k * k)).collect()
}

/// Exact reduced free evolution from `t_from` to `t_to`.
pub fn free_reduced(state: &State, t_from: f64, t_to: f64, model: &Model) -> Result<State> {
    check_channel(model, t_from, t_to)?;
    let mut out = state.clone();
    if t_from != t_to {
        let f = reduced_kinetic_factors(out.grid(), model, t_from, t_to);
        out.grid().clone().apply_momentum_factors(out.amp_mut(), &f);
    }
    Ok(out)
}

fn potential_half_step(psi: &mut State, phase: impl Fn(f64) -> f64) {
    let grid = psi.grid().clone();
    for (z, &x) in psi.amp_mut().iter_mut().zip(grid.x()) {
        *z *= C64::from_polar(1.0, phase(x));
    }
}

struct ReducedStepper<'a> {
    model: &'a Model,
    spec: &'a PotentialSpec,
    grid: Arc<Grid>,
    xi2: Vec<f64>,
    factors: Vec<C64>,
}

impl<'a> ReducedStepper<'a> {
    fn new(grid: Arc<Grid>, model: &'a Model, spec: &'a PotentialSpec) -> Self {
        let xi2 = grid.xi().iter().map(|k| k * k).collect();
        let n = grid.n();
        Self { model, spec, grid, xi2, factors: vec![C64::new(0.0, 0.0); n] }
    }
}

impl Stepper for ReducedStepper<'_> {
    fn step(&mut self, psi: &mut State, a: f64, b: f64) {
        let h = b - a;
        let tm = 0.5 * (a + b);
        let scale = tm.abs().powf(self.model.lambda());
        let spec = self.spec;
        let apply_v = !spec.is_zero();
        if apply_v {
            potential_half_step(psi, |x| -0.5 * h * spec.eval(tm, scale * x));
        }
        let c = -(reduced_time(self.model, b) - reduced_time(self.model, a)) / (2.0 * self.model.mass());
        for (f, k2) in self.factors.iter_mut().zip(&self.xi2) {
            *f = C64::from_polar(1.0, c * k2);
        }
        self.grid.apply_momentum_factors(psi.amp_mut(), &self.factors);
        if apply_v {
            potential_half_step(psi, |x| -0.5 * h * spec.eval(tm, scale * x));
        }
    }
}

struct FullStepper<'a> {
    model: &'a Model,
    spec: &'a PotentialSpec,
    grid: Arc<Grid>,
    xi2: Vec<f64>,
    factors: Vec<C64>,
    last_h: f64,
}

impl<'a> FullStepper<'a> {
    fn new(grid: Arc<Grid>, model: &'a Model, spec: &'a PotentialSpec) -> Self {
        let xi2 = grid.xi().iter().map(|k| k * k).collect();
        let n = grid.n();
        Self { model, spec, grid, xi2, factors: vec![C64::new(0.0, 0.0); n], last_h: f64::NAN }
    }
}

impl Stepper for FullStepper<'_> {
    fn step(&mut self, psi: &mut State, a: f64, b: f64) {
        let h = b - a;
        let tm = 0.5 * (a + b);
        let kt = self.model.k_profile(tm);
        let spec = self.spec;
        let phase = |x: f64| -0.5 * h * (0.5 * kt * x * x + spec.eval(tm, x));
        potential_half_step(psi, phase);
        if h != self.last_h {
            let c = -h / (2.0 * self.model.mass());
            for (f, k2) in self.factors.iter_mut().zip(&self.xi2) {
                *f = C64::from_polar(1.0, c * k2);
            }
            self.last_h = h;
        }
        self.grid.apply_momentum_factors(psi.amp_mut(), &self.factors);
        potential_half_step(psi, phase);
    }
}

/// Strang evolution under `p^2 / (2 m |t|^(2 lambda)) + V(t, |t|^lambda x)`.
pub fn evolve_reduced(state: &State, plan: &StepPlan, model: &Model, spec: &PotentialSpec) -> Result<State> {
    let mut out = state.clone();
    evolve_reduced_in_place(&mut out, plan, model, spec)?;
    Ok(out)
}

/// In-place [`evolve_reduced`]; returns the number of steps taken.
pub fn evolve_reduced_in_place(psi: &mut State, plan: &StepPlan, model: &Model, spec: &PotentialSpec) -> Result<usize> {
    check_channel(model, plan.t_from, plan.t_to)?;
    let mut stepper = ReducedStepper::new(psi.grid().clone(), model, spec);
    run_plan(psi, plan, &mut stepper)
}

/// Strang evolution under `p^2 / 2m + k(t) x^2 / 2 + V(t, x)`.
pub fn evolve_full(state: &State, plan: &StepPlan, model: &Model, spec: &PotentialSpec) -> Result<State> {
    let mut out = state.clone();
    evolve_full_in_place(&mut out, plan, model, spec)?;
    Ok(out)
}

/// In-place [`evolve_full`]; returns the number of steps taken.
pub fn evolve_full_in_place(psi: &mut State, plan: &StepPlan, model: &Model, spec: &PotentialSpec) -> Result<usize> {
    let mut stepper = FullStepper::new(psi.grid().clone(), model, spec);
    run_plan(psi, plan, &mut stepper)
}

/// Lens transform `e^(i m lambda x^2 / (2t))`.
pub fn lens_apply(state: &mut State, model: &Model, t: f64) -> Option<AliasWarning> {
    state.chirp(model.mass() * model.lambda() / (2.0 * t))
}

/// Dilation factor `|t|^(-lambda)` of the factorization at time `t`.
pub fn dilation_factor(model: &Model, t: f64) -> f64 {
    t.abs().powf(-model.lambda())
}

/// Outcome of [`factorization_residual`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub t: f64,
    pub residual: f64,
    pub steps_full: usize,
    pub steps_reduced: usize,
    pub warnings: Vec<AliasWarning>,
}

/// `|| U(t, r0) phi - L(t) D(t) U_S(t, r0) [L(r0) D(r0)]^(-1) phi ||`.
///
/// Both sides start from the same full-picture state at `r0`; the reduced
/// side anchors its initial data by inverting lens and dilation at `r0`.
pub fn factorization_residual(
    phi: &State,
    t: f64,
    model: &Model,
    spec: &PotentialSpec,
    policy: StepPolicy,
) -> Result<FactorizationReport> {
    let r0 = model.r0();
    if !(t >= r0) {
        return Err(Error::Channel { t_from: r0, t_to: t, r0 });
    }
    let mut warnings = Vec::new();
    let mut full = phi.clone();
    let steps_full = evolve_full_in_place(&mut full, &StepPlan::new(r0, t, policy)?, model, spec)?;

    let mut reduced = phi.clone();
    warnings.extend(reduced.chirp(-model.mass() * model.lambda() / (2.0 * r0)));
    let mut reduced = dilation_apply(&reduced, 1.0 / dilation_factor(model, r0))?;
    let steps_reduced = evolve_reduced_in_place(&mut reduced, &StepPlan::new(r0, t, policy)?, model, spec)?;
    let mut reduced = dilation_apply(&reduced, dilation_factor(model, t))?;
    warnings.extend(lens_apply(&mut reduced, model, t));

    Ok(FactorizationReport { t, residual: full.distance(&reduced)?, steps_full, steps_reduced, warnings })
}

/// `U~_0(t) = e^(-i t' p^2 / 2 Lambda) e^(-i Lambda x^2 / (2 t'))` with `t' = t^(1 - 2 lambda)`.
pub fn tilde_u0_apply(state: &State, t: f64, model: &Model) -> Result<(State, Option<AliasWarning>)> {
    if !(t >= model.r0()) {
        return Err(Error::Channel { t_from: model.r0(), t_to: t, r0: model.r0() });
    }
    let tp = model.reduced_clock(t);
    let big = model.big_lambda();
    let mut out = state.clone();
    let warning = out.chirp(-big / (2.0 * tp));
    let grid = out.grid().clone();
    grid.apply_momentum_multiplier(out.amp_mut(), |k| C64::from_polar(1.0, -tp * k * k / (2.0 * big)));
    Ok((out, warning))
}

/// Accumulated Dollard phase `alpha(t, xi) = int_r0^t V(s, s^(1 - lambda) xi / Lambda) ds`
/// on the momentum nodes of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DollardPhase {
    xi: Vec<f64>,
    alpha: Vec<f64>,
    t_current: f64,
    grid_length: f64,
}

/// Relative tolerance of each phase increment.
pub const PHASE_REL_TOL: f64 = 1e-10;

fn phase_increment(model: &Model, spec: &PotentialSpec, xi: f64, a: f64, b: f64) -> Result<f64> {
    let e = 1.0 - model.lambda();
    let big = model.big_lambda();
    let opts = QuadOptions { rel_tol: PHASE_REL_TOL, abs_tol: 1e-300, max_intervals: 4000 };
    Ok(integrate_log(|s| spec.eval(s, s.powf(e) * xi / big), a, b, opts)?.value)
}

impl DollardPhase {
    /// Zero phase at `t = r0`.
    pub fn new(grid: &Grid, model: &Model) -> Self {
        Self { xi: grid.xi().to_vec(), alpha: vec![0.0; grid.n()], t_current: model.r0(), grid_length: grid.length() }
    }

    pub fn t_current(&self) -> f64 {
        self.t_current
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// Advances the phase to `t_next`.
    pub fn accumulate(&mut self, t_next: f64, model: &Model, spec: &PotentialSpec) -> Result<()> {
        if !(t_next > self.t_current) {
            return Err(Error::Domain(format!("phase time must increase: {} -> {t_next}", self.t_current)));
        }
        if !matches!(spec.family, PotentialFamily::DollardLong | PotentialFamily::Zero) {
            return Err(Error::Domain(format!(
                "the Dollard phase is built from a dollard_long potential, got {}",
                spec.family.name()
            )));
        }
        let (a, b) = (self.t_current, t_next);
        if !spec.is_zero() {
            // V is even in x, so alpha(-xi) = alpha(xi).
            let n = self.xi.len();
            let dxi = 2.0 * std::f64::consts::PI / self.grid_length;
            let half: Vec<f64> =
                (0..=n / 2).map(|k| phase_increment(model, spec, k as f64 * dxi, a, b)).collect::<Result<_>>()?;
            for (alpha, xi) in self.alpha.iter_mut().zip(&self.xi) {
                let k = (xi.abs() / dxi).round() as usize;
                *alpha += half[k.min(n / 2)];
            }
        }
        self.t_current = t_next;
        Ok(())
    }

    /// Writes `t, xi, alpha` with `xi` ascending.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let n = self.xi.len();
        let mut t = Table::new(&["t", "xi", "alpha"]);
        for k in (n / 2..n).chain(0..n / 2) {
            t.push(vec![self.t_current, self.xi[k], self.alpha[k]]);
        }
        t.write(path)
    }
}

/// Phase `alpha(t, xi)` at a single momentum, for growth diagnostics.
pub fn dollard_phase_at(model: &Model, spec: &PotentialSpec, xi: f64, t: f64) -> Result<f64> {
    phase_increment(model, spec, xi, model.r0(), t)
}

/// Multiplies by `e^(-i alpha(t, xi))` in momentum space.
pub fn dollard_modifier_apply(state: &State, phase: &DollardPhase) -> Result<State> {
    let grid = state.grid();
    if phase.xi.len() != grid.n() || phase.grid_length != grid.length() {
        return Err(Error::GridMismatch);
    }
    let mut out = state.clone();
    let f: Vec<C64> = phase.alpha.iter().map(|&a| C64::from_polar(1.0, -a)).collect();
    grid.apply_momentum_factors(out.amp_mut(), &f);
    Ok(out)
}

/// One row of the observable trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableRow {
    pub t: f64,
    pub norm: f64,
    pub x: f64,
    pub p: f64,
    pub x2: f64,
    pub p2: f64,
}

impl ObservableRow {
    pub fn of(state: &State, t: f64) -> Self {
        Self {
            t,
            norm: state.norm(),
            x: state.expectation(Observable::X),
            p: state.expectation(Observable::P),
            x2: state.expectation(Observable::X2),
            p2: state.expectation(Observable::P2),
        }
    }
}

/// Which Hamiltonian a traced evolution uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dynamics {
    Full,
    Reduced,
}

/// Evolves through the increasing `checkpoints`, recording observables at each.
pub fn evolve_traced(
    state: &State,
    t_from: f64,
    checkpoints: &[f64],
    policy: StepPolicy,
    dynamics: Dynamics,
    model: &Model,
    spec: &PotentialSpec,
) -> Result<(State, Vec<ObservableRow>)> {
    let mut psi = state.clone();
    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut t = t_from;
    for &tc in checkpoints {
        if tc != t {
            let plan = StepPlan::new(t, tc, policy)?;
            match dynamics {
                Dynamics::Full => evolve_full_in_place(&mut psi, &plan, model, spec)?,
                Dynamics::Reduced => evolve_reduced_in_place(&mut psi, &plan, model, spec)?,
            };
            t = tc;
        }
        rows.push(ObservableRow::of(&psi, tc));
    }
    Ok((psi, rows))
}

/// Writes `t, norm, x, p, x2, p2`.
pub fn write_observables_csv(path: &Path, rows: &[ObservableRow]) -> Result<()> {
    let mut t = Table::new(&["t", "norm", "x", "p", "x2", "p2"]);
    for r in rows {
        t.push(vec![r.t, r.norm, r.x, r.p, r.x2, r.p2]);
    }
    t.write(path)
}

/// Observed order of the Strang step from three runs at `h`, `h/2`, `h/4`:
/// `log2(|psi_h - psi_h/2| / |psi_h/2 - psi_h/4|)`.
pub fn self_convergence_order(
    state: &State,
    t_from: f64,
    t_to: f64,
    h: f64,
    dynamics: Dynamics,
    model: &Model,
    spec: &PotentialSpec,
) -> Result<f64> {
    let run = |h: f64| -> Result<State> {
        let plan = StepPlan::new(t_from, t_to, StepPolicy::Uniform { h })?;
        match dynamics {
            Dynamics::Full => evolve_full(state, &plan, model, spec),
            Dynamics::Reduced => evolve_reduced(state, &plan, model, spec),
        }
    };
    let a = run(h)?;
    let b = run(0.5 * h)?;
    let c = run(0.25 * h)?;
    let e1 = a.distance(&b)?;
    let e2 = b.distance(&c)?;
    if !(e2 > 0.0) {
        return Err(Error::DegenerateFit("step refinement produced no change".into()));
    }
    Ok((e1 / e2).log2())
}
