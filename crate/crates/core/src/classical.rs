//! Fundamental solutions of `zeta'' + (k(t)/m) zeta = 0`, their Wronskian,
//! the power-law tail coefficients and the classical phase-space flow.
//!
//! Integration uses an embedded Dormand-Prince 5(4) pair that lands exactly
//! on a fixed node set: uniform on `[0, r0]`, geometric beyond. Between nodes
//! `zeta` is a cubic Hermite interpolant in `(zeta, zeta')` and `zeta'` one in
//! `(zeta', zeta'')`, with `zeta''` read off the equation itself.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Table;
use crate::model::{KcProfile, Model};

const INTERIOR_INTERVALS: usize = 100;
const TAIL_RATIO: f64 = 1.01;
const MAX_STEPS_PER_NODE: usize = 100_000;
const FIT_SAMPLES: usize = 64;
const PRONY_SAMPLES: usize = 41;
/// Condition number above which a tail fit is rejected.
pub const MAX_CONDITION: f64 = 1e10;

/// Coefficients of `zeta_1 = c1 t^(1-l) + c2 t^l`, `zeta_2 = c3 t^(1-l) + c4 t^l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub lambda: f64,
}

impl TailCoefficients {
    /// Coefficients that reproduce `(zeta_1, zeta_1', zeta_2, zeta_2')` at time `t`.
    pub fn matched(lambda: f64, t: f64, y: [f64; 4]) -> Self {
        let (u, up) = (t.powf(1.0 - lambda), (1.0 - lambda) * t.powf(-lambda));
        let (v, vp) = (t.powf(lambda), lambda * t.powf(lambda - 1.0));
        let det = u * vp - up * v;
        let solve = |z: f64, zp: f64| ((z * vp - zp * v) / det, (u * zp - up * z) / det);
        let (c1, c2) = solve(y[0], y[1]);
        let (c3, c4) = solve(y[2], y[3]);
        Self { c1, c2, c3, c4, lambda }
    }

    /// `(zeta_1, zeta_1', zeta_2, zeta_2')` at `t > 0`.
    pub fn eval(&self, t: f64) -> [f64; 4] {
        let l = self.lambda;
        let u = t.powf(1.0 - l);
        let v = t.powf(l);
        let up = (1.0 - l) * u / t;
        let vp = l * v / t;
        [self.c1 * u + self.c2 * v, self.c1 * up + self.c2 * vp, self.c3 * u + self.c4 * v, self.c3 * up + self.c4 * vp]
    }

    /// `(c1 c4 - c2 c3)(1 - 2 lambda)`; the unit Wronskian forces this to `-1`.
    pub fn wronskian_combination(&self) -> f64 {
        (self.c1 * self.c4 - self.c2 * self.c3) * (1.0 - 2.0 * self.lambda)
    }
}

/// Sampled fundamental solutions on `[0, t_max]`.
#[derive(Debug, Clone)]
pub struct Fundamentals {
    model: Model,
    tol: f64,
    times: Vec<f64>,
    z1: Vec<f64>,
    z1p: Vec<f64>,
    z2: Vec<f64>,
    z2p: Vec<f64>,
    coeffs: Option<TailCoefficients>,
    /// Jump of `k` at `r0` for custom profiles (zero for the matched constant).
    kink: f64,
}

/// Values `(zeta_1, zeta_1', zeta_2, zeta_2')` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalValues {
    pub z1: f64,
    pub z1p: f64,
    pub z2: f64,
    pub z2p: f64,
}

impl FundamentalValues {
    pub fn wronskian(&self) -> f64 {
        self.z1 * self.z2p - self.z1p * self.z2
    }

    fn from_array(y: [f64; 4]) -> Self {
        Self { z1: y[0], z1p: y[1], z2: y[2], z2p: y[3] }
    }
}

fn node_times(model: &Model, t_max: f64) -> Vec<f64> {
    let r0 = model.r0();
    let mut times: Vec<f64> = Vec::new();
    let interior_end = r0.min(t_max);
    let n0 = ((INTERIOR_INTERVALS as f64 * interior_end / r0).ceil() as usize).max(1);
    for i in 0..=n0 {
        times.push(interior_end * i as f64 / n0 as f64);
    }
    if let KcProfile::Custom(p) = model.kc_profile() {
        times.extend(p.times().iter().copied().filter(|&s| s > 0.0 && s < interior_end));
        times.sort_by(f64::total_cmp);
        times.dedup();
    }
    let mut t = interior_end;
    while t < t_max {
        t = (t * TAIL_RATIO).min(t_max);
        if t_max - t < 1e-9 * t_max {
            t = t_max;
        }
        times.push(t);
    }
    times
}

/// `k` on the right of a node; the only difference from `k_profile` is at `r0`.
fn k_right(model: &Model, t: f64) -> f64 {
    if t == model.r0() {
        model.k() / (t * t)
    } else {
        model.k_profile(t)
    }
}

fn rhs(model: &Model, t: f64, y: &[f64; 4], k_at: impl Fn(&Model, f64) -> f64) -> [f64; 4] {
    let w = k_at(model, t) / model.mass();
    [y[1], -w * y[0], y[3], -w * y[2]]
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: &[f64; 4], terms: &[(f64, &[f64; 4])], h: f64) -> [f64; 4] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates across one node interval `[a, b]` on which `k` is smooth.
fn dp45_segment(model: &Model, a: f64, b: f64, y0: [f64; 4], tol: f64, h_hint: f64) -> Result<([f64; 4], f64)> {
    // Evaluate k from inside the interval so a jump at r0 is taken on the correct side.
    let inner = |m: &Model, t: f64| {
        if t <= a {
            k_right(m, a)
        } else {
            m.k_profile(t)
        }
    };
    let f = |t: f64, y: &[f64; 4]| rhs(model, t, y, inner);
    let mut t = a;
    let mut y = y0;
    let mut h = h_hint.min(b - a);
    let mut k1 = f(t, &y);
    for _ in 0..MAX_STEPS_PER_NODE {
        if t >= b {
            return Ok((y, h));
        }
        let last = t + h >= b;
        if last {
            h = b - t;
        }
        let k2 = f(t + C2 * h, &axpy(&y, &[(A21, &k1)], h));
        let k3 = f(t + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(t + C4 * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = f(t + C5 * h, &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
        let k6 = f(t + h, &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h));
        let y5 = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
        let t_new = if last { b } else { t + h };
        let k7 = f(t_new, &y5);
        let mut err = 0.0;
        for i in 0..4 {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol + tol * y[i].abs().max(y5[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / 4.0).sqrt();
        if !err.is_finite() {
            return Err(Error::Tolerance(format!("non-finite error estimate at t = {t}")));
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            t = t_new;
            y = y5;
            k1 = k7;
            h *= factor;
        } else {
            h *= factor.min(1.0);
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Tolerance(format!("step size underflow at t = {t}")));
            }
        }
    }
    Err(Error::Tolerance(format!("more than {MAX_STEPS_PER_NODE} steps between nodes {a} and {b}")))
}

/// Integrates both initial-value problems on `[0, t_max]`.
pub fn integrate_fundamentals(model: &Model, t_max: f64, tol: f64) -> Result<Fundamentals> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::Domain(format!("t_max must be positive, got {t_max}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let times = node_times(model, t_max);
    let mut z1 = Vec::with_capacity(times.len());
    let mut z1p = Vec::with_capacity(times.len());
    let mut z2 = Vec::with_capacity(times.len());
    let mut z2p = Vec::with_capacity(times.len());
    let mut y = [1.0, 0.0, 0.0, 1.0];
    let mut push = |y: &[f64; 4]| {
        z1.push(y[0]);
        z1p.push(y[1]);
        z2.push(y[2]);
        z2p.push(y[3]);
    };
    push(&y);
    let mut h = times[1] - times[0];
    let mut at_r0 = None;
    for w in times.windows(2) {
        let (next, h_used) = dp45_segment(model, w[0], w[1], y, tol, h)?;
        y = next;
        h = h_used.max((w[1] - w[0]) * 1e-3);
        push(&y);
        if w[1] == model.r0() {
            at_r0 = Some(y);
        }
    }

    let kink = match model.kc_profile() {
        KcProfile::ConstantMatch => 0.0,
        KcProfile::Custom(p) => p.eval(model.r0()) - model.k() / (model.r0() * model.r0()),
    };
    let coeffs = match model.kc_profile() {
        KcProfile::ConstantMatch => Some(matched_constant_profile(model)),
        // The tail equation is exactly of Euler type beyond r0, so matching the
        // integrated values there determines the coefficients.
        KcProfile::Custom(_) => at_r0.map(|y| TailCoefficients::matched(model.lambda(), model.r0(), y)),
    };
    Ok(Fundamentals { model: model.clone(), tol, times, z1, z1p, z2, z2p, coeffs, kink })
}

/// Tail coefficients of the constant interior profile, from the closed-form
/// interior solution evaluated at `r0`.
pub fn matched_constant_profile(model: &Model) -> TailCoefficients {
    let r0 = model.r0();
    let omega = (model.k() / model.mass()).sqrt() / r0;
    let y = if omega == 0.0 {
        [1.0, 0.0, r0, 1.0]
    } else {
        let (s, c) = (omega * r0).sin_cos();
        [c, -omega * s, s / omega, c]
    };
    TailCoefficients::matched(model.lambda(), r0, y)
}

fn hermite(t0: f64, t1: f64, y0: f64, d0: f64, y1: f64, d1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * d1
}

impl Fundamentals {
    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn coefficients(&self) -> Option<TailCoefficients> {
        self.coeffs
    }

    /// Jump of `k` across `r0` for custom profiles. Nonzero values make the
    /// fundamentals only `C^1` there.
    pub fn profile_jump(&self) -> f64 {
        self.kink
    }

    /// Values at node `i`.
    pub fn node(&self, i: usize) -> FundamentalValues {
        FundamentalValues { z1: self.z1[i], z1p: self.z1p[i], z2: self.z2[i], z2p: self.z2p[i] }
    }

    /// Interpolated values on `[-t_max, t_max]`; negative times use the
    /// reflection `zeta_1` even, `zeta_2` odd.
    pub fn eval(&self, t: f64) -> Result<FundamentalValues> {
        let t_max = self.t_max();
        let s = t.abs();
        if s > t_max || !t.is_finite() {
            return Err(Error::Range { t, t_max });
        }
        let v = self.eval_positive(s);
        Ok(if t < 0.0 { FundamentalValues { z1: v.z1, z1p: -v.z1p, z2: -v.z2, z2p: v.z2p } } else { v })
    }

    /// As [`Self::eval`], continuing with the closed-form tail beyond `t_max`.
    pub fn eval_extended(&self, t: f64) -> Result<FundamentalValues> {
        let s = t.abs();
        if s <= self.t_max() {
            return self.eval(t);
        }
        let c = self.coeffs.ok_or(Error::Range { t, t_max: self.t_max() })?;
        let v = FundamentalValues::from_array(c.eval(s));
        Ok(if t < 0.0 { FundamentalValues { z1: v.z1, z1p: -v.z1p, z2: -v.z2, z2p: v.z2p } } else { v })
    }

    fn eval_positive(&self, t: f64) -> FundamentalValues {
        let n = self.times.len();
        let i = self.times.partition_point(|&s| s <= t).clamp(1, n - 1) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        if t == t0 {
            return self.node(i);
        }
        if t == t1 {
            return self.node(i + 1);
        }
        let m = self.model.mass();
        let w0 = k_right(&self.model, t0) / m;
        let w1 = self.model.k_profile(t1) / m;
        FundamentalValues {
            z1: hermite(t0, t1, self.z1[i], self.z1p[i], self.z1[i + 1], self.z1p[i + 1], t),
            z1p: hermite(t0, t1, self.z1p[i], -w0 * self.z1[i], self.z1p[i + 1], -w1 * self.z1[i + 1], t),
            z2: hermite(t0, t1, self.z2[i], self.z2p[i], self.z2[i + 1], self.z2p[i + 1], t),
            z2p: hermite(t0, t1, self.z2p[i], -w0 * self.z2[i], self.z2p[i + 1], -w1 * self.z2[i + 1], t),
        }
    }

    /// Classical flow `(zeta_1 x0 + zeta_2 p0 / m, m zeta_1' x0 + zeta_2' p0)`.
    pub fn classical_flow(&self, t: f64, x0: f64, p0: f64) -> Result<(f64, f64)> {
        let v = self.eval(t)?;
        let m = self.model.mass();
        Ok((v.z1 * x0 + v.z2 * p0 / m, m * v.z1p * x0 + v.z2p * p0))
    }

    /// Writes `t, z1, z1p, z2, z2p, wronskian` at every node.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut table = Table::new(&["t", "z1", "z1p", "z2", "z2p", "wronskian"]);
        for i in 0..self.times.len() {
            let v = self.node(i);
            table.push(vec![self.times[i], v.z1, v.z1p, v.z2, v.z2p, v.wronskian()]);
        }
        table.write(path)
    }
}

/// `zeta_1 zeta_2' - zeta_1' zeta_2` from the interpolants.
pub fn wronskian(f: &Fundamentals, t: f64) -> Result<f64> {
    Ok(f.eval(t)?.wronskian())
}

/// Least-squares solution for two columns by modified Gram-Schmidt on
/// unit-normalized columns. Returns the coefficients and the condition number.
pub(crate) fn lstsq2(a: &[f64], b: &[f64], y: &[f64]) -> Result<([f64; 2], f64)> {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    let q1: Vec<f64> = a.iter().map(|v| v / na).collect();
    let r12 = q1.iter().zip(b).map(|(q, v)| q * v / nb).sum::<f64>();
    let w: Vec<f64> = b.iter().zip(&q1).map(|(v, q)| v / nb - r12 * q).collect();
    let r22 = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    // Singular values of [[1, r12], [0, r22]].
    let tr = 1.0 + r12 * r12 + r22 * r22;
    let det = r22 * r22;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let cond = ((tr + disc) / (tr - disc).max(f64::MIN_POSITIVE)).sqrt();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let q2: Vec<f64> = w.iter().map(|v| v / r22).collect();
    let g1 = q1.iter().zip(y).map(|(q, v)| q * v).sum::<f64>();
    let g2 = q2.iter().zip(y).map(|(q, v)| q * v).sum::<f64>();
    let x2 = g2 / r22;
    let x1 = g1 - r12 * x2;
    Ok(([x1 / na, x2 / nb], cond))
}

/// Result of [`asymptotic_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub coeffs: TailCoefficients,
    /// Exponents from the unconstrained two-term fit, ascending.
    pub free_exponents: (f64, f64),
    pub condition: f64,
    /// Largest relative residual of the constrained fit over the window.
    pub max_rel_residual: f64,
}

/// Fits the power-law tail on `[t_lo, t_hi]`.
pub fn asymptotic_fit(f: &Fundamentals, window: (f64, f64)) -> Result<AsymptoticFit> {
    let (t_lo, t_hi) = window;
    let model = f.model();
    if !(t_lo > model.r0()) || !(t_hi > t_lo) {
        return Err(Error::Domain(format!("fit window [{t_lo}, {t_hi}] must satisfy r0 < t_lo < t_hi")));
    }
    if t_hi > f.t_max() {
        return Err(Error::Range { t: t_hi, t_max: f.t_max() });
    }
    let l = model.lambda();
    let geo = |n: usize| -> Vec<f64> {
        (0..n).map(|j| (t_lo * (t_hi / t_lo).powf(j as f64 / (n - 1) as f64)).min(t_hi)).collect()
    };
    let ts = geo(FIT_SAMPLES);
    let vals: Vec<FundamentalValues> = ts.iter().map(|&t| f.eval(t)).collect::<Result<_>>()?;
    let u: Vec<f64> = ts.iter().map(|t| t.powf(1.0 - l)).collect();
    let v: Vec<f64> = ts.iter().map(|t| t.powf(l)).collect();
    let y1: Vec<f64> = vals.iter().map(|w| w.z1).collect();
    let y2: Vec<f64> = vals.iter().map(|w| w.z2).collect();
    let ([c1, c2], cond) = lstsq2(&u, &v, &y1)?;
    let ([c3, c4], _) = lstsq2(&u, &v, &y2)?;
    let coeffs = TailCoefficients { c1, c2, c3, c4, lambda: l };
    let max_rel_residual = ts
        .iter()
        .zip(&vals)
        .map(|(&t, w)| {
            let e = coeffs.eval(t);
            ((e[0] - w.z1).abs() / w.z1.abs().max(1e-300)).max((e[2] - w.z2).abs() / w.z2.abs().max(1e-300))
        })
        .fold(0.0, f64::max);
    let free_exponents = prony_exponents(f, t_lo, t_hi)?;
    Ok(AsymptoticFit { coeffs, free_exponents, condition: cond, max_rel_residual })
}

/// Joint two-exponent Prony fit of `zeta_1` and `zeta_2` on a uniform `ln t` grid.
fn prony_exponents(f: &Fundamentals, t_lo: f64, t_hi: f64) -> Result<(f64, f64)> {
    let n = PRONY_SAMPLES;
    let h = (t_hi / t_lo).ln() / (n - 1) as f64;
    let ts: Vec<f64> = (0..n).map(|j| (t_lo * (h * j as f64).exp()).min(t_hi)).collect();
    let vals: Vec<FundamentalValues> = ts.iter().map(|&t| f.eval(t)).collect::<Result<_>>()?;
    let mut col_a = Vec::new();
    let mut col_b = Vec::new();
    let mut rhs = Vec::new();
    for series in [vals.iter().map(|w| w.z1).collect::<Vec<_>>(), vals.iter().map(|w| w.z2).collect::<Vec<_>>()] {
        let scale = series.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if scale == 0.0 {
            continue;
        }
        for j in 0..n - 2 {
            col_a.push(series[j + 1] / scale);
            col_b.push(series[j] / scale);
            rhs.push(series[j + 2] / scale);
        }
    }
    let ([s1, s0], _) = lstsq2(&col_a, &col_b, &rhs)?;
    let disc = s1 * s1 + 4.0 * s0;
    if disc < 0.0 {
        return Err(Error::DegenerateFit("complex characteristic roots".into()));
    }
    let r1 = 0.5 * (s1 + disc.sqrt());
    let r2 = 0.5 * (s1 - disc.sqrt());
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(Error::DegenerateFit("non-positive characteristic roots".into()));
    }
    let (p, q) = (r1.ln() / h, r2.ln() / h);
    Ok((p.min(q), p.max(q)))
}
