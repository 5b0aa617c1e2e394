//! Periodic position grid with its conjugate momentum grid, wavefunction
//! states, and the elementary unitaries and windows built from them.
//!
//! Momentum amplitudes follow the unitary convention
//! `phi^(xi) = (2 pi)^(-1/2) int e^(-i x xi) phi(x) dx`, so that
//! `sum |phi^|^2 dxi = sum |phi|^2 dx` exactly on the grid.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Table;

pub type C64 = Complex64;

/// Mass that may leave the grid (or the band) before an operation is refused.
pub const LEAK_TOLERANCE: f64 = 1e-8;
/// Minimum number of momentum modes inside a prepared band.
pub const MIN_BAND_MODES: usize = 16;
const OVERSAMPLE: usize = 4;
const STENCIL: usize = 8;

/// Uniform periodic grid on `[-L/2, L/2)` with prepared transform plans.
pub struct Grid {
    n: usize,
    length: f64,
    dx: f64,
    x: Vec<f64>,
    xi: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    fine_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).field("length", &self.length).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl Grid {
    /// Builds a grid with `n` points (a power of two, at least 256) on length `L`.
    pub fn new(n: usize, length: f64) -> Result<Arc<Self>> {
        if n < 256 || !n.is_power_of_two() {
            return Err(Error::Size(format!("n_points must be a power of two >= 256, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Size(format!("length must be positive, got {length}")));
        }
        let dx = length / n as f64;
        let x = (0..n).map(|j| -0.5 * length + j as f64 * dx).collect();
        let dxi = 2.0 * PI / length;
        let xi = (0..n)
            .map(|k| {
                let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                kk * dxi
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            n,
            length,
            dx,
            x,
            xi,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            fine_inv: planner.plan_fft_inverse(OVERSAMPLE * n),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest resolved momentum `pi N / L`.
    pub fn nyquist(&self) -> f64 {
        PI / self.dx
    }

    /// Position nodes, ascending from `-L/2`.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Momentum nodes in transform order (non-negative first).
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// Index permutation that lists momentum nodes in ascending order.
    pub fn xi_ascending(&self) -> impl Iterator<Item = usize> + '_ {
        (self.n / 2..self.n).chain(0..self.n / 2)
    }

    fn forward_raw(&self, buf: &mut [C64]) {
        self.fwd.process(buf);
    }

    fn inverse_raw(&self, buf: &mut [C64]) {
        self.inv.process(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }

    /// Position samples to unitary momentum amplitudes (transform order).
    pub fn to_momentum(&self, psi: &[C64]) -> Vec<C64> {
        let mut buf = psi.to_vec();
        self.forward_raw(&mut buf);
        let s = self.dx / (2.0 * PI).sqrt();
        for (k, z) in buf.iter_mut().enumerate() {
            *z *= if k % 2 == 0 { s } else { -s };
        }
        buf
    }

    /// Inverse of [`Self::to_momentum`].
    pub fn from_momentum(&self, phi_hat: &[C64]) -> Vec<C64> {
        let s = (2.0 * PI).sqrt() / self.dx;
        let mut buf: Vec<C64> =
            phi_hat.iter().enumerate().map(|(k, z)| if k % 2 == 0 { z * s } else { -z * s }).collect();
        self.inverse_raw(&mut buf);
        buf
    }

    /// Multiplies by `f(xi_k)` in momentum space, in place.
    pub fn apply_momentum_multiplier(&self, psi: &mut [C64], mut f: impl FnMut(f64) -> C64) {
        self.forward_raw(psi);
        for (z, &xi) in psi.iter_mut().zip(&self.xi) {
            *z *= f(xi);
        }
        self.inverse_raw(psi);
    }

    /// Multiplies by the precomputed momentum-space factors `m[k]`.
    pub fn apply_momentum_factors(&self, psi: &mut [C64], m: &[C64]) {
        self.forward_raw(psi);
        for (z, f) in psi.iter_mut().zip(m) {
            *z *= f;
        }
        self.inverse_raw(psi);
    }
}

/// Preparation record carried by a state.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateMeta {
    pub eps: Option<f64>,
    pub r: Option<f64>,
    pub center: Option<f64>,
    pub seed: Option<u64>,
    pub launch: Option<f64>,
}

/// A wavefunction sampled on a grid.
#[derive(Debug, Clone)]
pub struct State {
    grid: Arc<Grid>,
    amp: Vec<C64>,
    meta: StateMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    X,
    P,
    X2,
    P2,
    P2PlusX2,
}

impl State {
    pub fn new(grid: Arc<Grid>, amp: Vec<C64>) -> Result<Self> {
        if amp.len() != grid.n() {
            return Err(Error::Size(format!("{} amplitudes for a grid of {}", amp.len(), grid.n())));
        }
        Ok(Self { grid, amp, meta: StateMeta::default() })
    }

    /// State from unitary momentum amplitudes in transform order.
    pub fn from_momentum(grid: Arc<Grid>, phi_hat: &[C64]) -> Result<Self> {
        if phi_hat.len() != grid.n() {
            return Err(Error::Size(format!("{} amplitudes for a grid of {}", phi_hat.len(), grid.n())));
        }
        let amp = grid.from_momentum(phi_hat);
        Ok(Self { grid, amp, meta: StateMeta::default() })
    }

    /// `(pi s^2)^(-1/4) exp(-(x - x0)^2 / (2 s^2) + i p0 x)`.
    pub fn gaussian(grid: Arc<Grid>, x0: f64, p0: f64, s: f64) -> Self {
        let c = (PI * s * s).powf(-0.25);
        let amp = grid
            .x()
            .iter()
            .map(|&x| {
                let d = x - x0;
                C64::from_polar(c * (-0.5 * d * d / (s * s)).exp(), p0 * x)
            })
            .collect();
        Self { grid, amp, meta: StateMeta::default() }
    }

    pub fn with_meta(mut self, meta: StateMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn amp(&self) -> &[C64] {
        &self.amp
    }

    pub fn amp_mut(&mut self) -> &mut [C64] {
        &mut self.amp
    }

    pub fn meta(&self) -> &StateMeta {
        &self.meta
    }

    pub fn momentum(&self) -> Vec<C64> {
        self.grid.to_momentum(&self.amp)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amp.iter_mut().for_each(|z| *z /= n);
        }
    }

    /// `<self | other>`.
    pub fn inner(&self, other: &State) -> Result<C64> {
        self.same_grid(other)?;
        Ok(self.amp.iter().zip(&other.amp).map(|(a, b)| a.conj() * b).sum::<C64>() * self.grid.dx())
    }

    /// `|| self - other ||`.
    pub fn distance(&self, other: &State) -> Result<f64> {
        self.same_grid(other)?;
        let s: f64 = self.amp.iter().zip(&other.amp).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * self.grid.dx()).sqrt())
    }

    fn same_grid(&self, other: &State) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Normalized expectation `<psi|O|psi> / <psi|psi>`.
    pub fn expectation(&self, obs: Observable) -> f64 {
        let norm2 = self.norm_sqr();
        let pos = |w: &dyn Fn(f64) -> f64| {
            self.amp.iter().zip(self.grid.x()).map(|(z, &x)| w(x) * z.norm_sqr()).sum::<f64>() * self.grid.dx()
        };
        let mom = |w: &dyn Fn(f64) -> f64| {
            self.momentum().iter().zip(self.grid.xi()).map(|(z, &k)| w(k) * z.norm_sqr()).sum::<f64>() * self.grid.dxi()
        };
        let v = match obs {
            Observable::X => pos(&|x| x),
            Observable::X2 => pos(&|x| x * x),
            Observable::P => mom(&|k| k),
            Observable::P2 => mom(&|k| k * k),
            Observable::P2PlusX2 => pos(&|x| x * x) + mom(&|k| k * k),
        };
        v / norm2
    }

    /// Squared norm on `|x| > a`.
    pub fn mass_beyond(&self, a: f64) -> f64 {
        self.amp.iter().zip(self.grid.x()).filter(|(_, x)| x.abs() > a).map(|(z, _)| z.norm_sqr()).sum::<f64>()
            * self.grid.dx()
    }

    /// Squared norm in momentum space on `|xi| > k`.
    pub fn momentum_mass_beyond(&self, k: f64) -> f64 {
        self.momentum()
            .iter()
            .zip(self.grid.xi())
            .filter(|(_, xi)| xi.abs() > k)
            .map(|(z, _)| z.norm_sqr())
            .sum::<f64>()
            * self.grid.dxi()
    }

    /// Squared norm within `edge` of either end of the grid.
    pub fn edge_mass(&self, edge: f64) -> f64 {
        self.mass_beyond(0.5 * self.grid.length() - edge)
    }

    /// Shift by `x0` (exact, via the momentum multiplier `e^(-i xi x0)`).
    pub fn translated(&self, x0: f64) -> State {
        let mut out = self.clone();
        self.grid.apply_momentum_multiplier(&mut out.amp, |k| C64::from_polar(1.0, -k * x0));
        out
    }

    /// Multiplies by `e^(i a x^2)` in place.
    pub fn chirp(&mut self, a: f64) -> Option<AliasWarning> {
        if a == 0.0 {
            return None;
        }
        let warning = alias_check(self, a);
        for (z, &x) in self.amp.iter_mut().zip(self.grid.x()) {
            *z *= C64::from_polar(1.0, a * x * x);
        }
        warning
    }

    /// Writes `x, re, im`.
    pub fn write_position_csv(&self, path: &Path) -> Result<()> {
        let mut t = Table::new(&["x", "re", "im"]);
        for (z, &x) in self.amp.iter().zip(self.grid.x()) {
            t.push(vec![x, z.re, z.im]);
        }
        t.write(path)
    }

    /// Writes `xi, re, im` with `xi` ascending.
    pub fn write_momentum_csv(&self, path: &Path) -> Result<()> {
        let hat = self.momentum();
        let mut t = Table::new(&["xi", "re", "im"]);
        for k in self.grid.xi_ascending() {
            t.push(vec![self.grid.xi()[k], hat[k].re, hat[k].im]);
        }
        t.write(path)
    }
}

/// Raised when a chirp's local phase increment at the grid edge exceeds `pi/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AliasWarning {
    pub a: f64,
    /// `|a| L dx`, the phase increment per cell at `|x| = L/2`.
    pub edge_phase_step: f64,
    /// Squared norm of the input where the increment exceeds `pi/2`.
    pub aliased_mass: f64,
}

impl fmt::Display for AliasWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "chirp a = {:.4e} steps {:.3} rad per cell at the grid edge; {:.3e} of the mass lies where the step exceeds pi/2",
            self.a, self.edge_phase_step, self.aliased_mass
        )
    }
}

fn alias_check(state: &State, a: f64) -> Option<AliasWarning> {
    let g = state.grid();
    let edge_phase_step = a.abs() * g.length() * g.dx();
    if edge_phase_step <= 0.5 * PI {
        return None;
    }
    let x_alias = PI / (4.0 * a.abs() * g.dx());
    Some(AliasWarning { a, edge_phase_step, aliased_mass: state.mass_beyond(x_alias) })
}

/// Returns `e^(i a x^2) psi`.
pub fn chirp_apply(state: &State, a: f64) -> (State, Option<AliasWarning>) {
    let mut out = state.clone();
    let w = out.chirp(a);
    (out, w)
}

/// Shape of the momentum profile of an annular state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BumpShape {
    /// `exp(-1 / (s (1 - s)))` across the band.
    Classic,
    /// Gaussian centred in the band with width `(R - 2 eps) / (2 kappa)`,
    /// tapered smoothly to zero over a fifth of the half-width at each edge.
    TaperedGaussian { kappa: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sides {
    Symmetric,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnularProfile {
    pub shape: BumpShape,
    pub sides: Sides,
    /// Free-flight time `tau` applied as `e^(-i tau xi^2 / 2)`; zero means none.
    pub launch: f64,
}

impl Default for AnnularProfile {
    fn default() -> Self {
        Self { shape: BumpShape::Classic, sides: Sides::Symmetric, launch: 0.0 }
    }
}

/// `C^infinity` step: 0 for `u <= 0`, 1 for `u >= 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let f = |s: f64| (-1.0 / s).exp();
    let a = f(u);
    a / (a + f(1.0 - u))
}

fn bump_value(shape: BumpShape, lo: f64, hi: f64, k: f64) -> f64 {
    if k <= lo || k >= hi {
        return 0.0;
    }
    match shape {
        BumpShape::Classic => {
            let s = (k - lo) / (hi - lo);
            (-1.0 / (s * (1.0 - s))).exp()
        }
        BumpShape::TaperedGaussian { kappa } => {
            let c = 0.5 * (lo + hi);
            let w = 0.5 * (hi - lo);
            let sig = w / kappa;
            let taper = 0.2 * w;
            (-0.5 * ((k - c) / sig).powi(2)).exp() * smooth_step((k - lo) / taper) * smooth_step((hi - k) / taper)
        }
    }
}

/// State whose momentum amplitude is a smooth bump supported in `2 eps <= |xi| <= R`.
pub fn prepare_annular_state(grid: &Arc<Grid>, eps: f64, r: f64, profile: AnnularProfile) -> Result<State> {
    let lo = 2.0 * eps;
    if !(eps > 0.0) || !(lo < r) {
        return Err(Error::Band(format!("need 0 < 2 eps < R, got eps = {eps}, R = {r}")));
    }
    if !(r < 0.5 * grid.nyquist()) {
        return Err(Error::Band(format!("R = {r} must lie below half the Nyquist momentum {:.4}", grid.nyquist())));
    }
    let modes = grid.xi().iter().filter(|&&k| k > lo && k < r).count();
    if modes < MIN_BAND_MODES {
        return Err(Error::Band(format!("band [{lo}, {r}] holds {modes} modes, need at least {MIN_BAND_MODES}")));
    }
    if let BumpShape::TaperedGaussian { kappa } = profile.shape {
        if !(kappa > 0.0) {
            return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
        }
    }
    let hat: Vec<C64> = grid
        .xi()
        .iter()
        .map(|&k| {
            let mag = match profile.sides {
                Sides::Symmetric => bump_value(profile.shape, lo, r, k.abs()),
                Sides::Positive => bump_value(profile.shape, lo, r, k),
            };
            if mag == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                C64::from_polar(mag, -0.5 * profile.launch * k * k)
            }
        })
        .collect();
    let mut state = State::from_momentum(grid.clone(), &hat)?;
    state.normalize();
    let center = match profile.shape {
        BumpShape::Classic | BumpShape::TaperedGaussian { .. } => 0.5 * (lo + r),
    };
    state.meta = StateMeta {
        eps: Some(eps),
        r: Some(r),
        center: Some(center),
        seed: None,
        launch: (profile.launch != 0.0).then_some(profile.launch),
    };
    Ok(state)
}

/// Seeded random state band-limited to `|xi| < k_max` and concentrated on
/// `|x| <= extent`: a sum of Gaussian packets times a smooth momentum window.
pub fn random_band_limited(grid: &Arc<Grid>, seed: u64, k_max: f64, extent: f64) -> Result<State> {
    if !(k_max > 0.0) || !(k_max <= 0.5 * grid.nyquist()) {
        return Err(Error::Band(format!("k_max = {k_max} must lie in (0, {:.4}]", 0.5 * grid.nyquist())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let packets: Vec<(C64, f64, f64, f64)> = (0..6)
        .map(|_| {
            let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let q = rng.random_range(-0.5..0.5) * k_max;
            let x0 = rng.random_range(-1.0..1.0) * extent;
            let w = rng.random_range(0.5..1.5);
            (c, q, x0, w)
        })
        .collect();
    let taper = 0.3 * k_max;
    let hat: Vec<C64> = grid
        .xi()
        .iter()
        .map(|&k| {
            let window = smooth_step((k_max - k.abs()) / taper);
            if window == 0.0 {
                return C64::new(0.0, 0.0);
            }
            let s: C64 = packets
                .iter()
                .map(|&(c, q, x0, w)| c * C64::from_polar((-0.5 * ((k - q) / w).powi(2)).exp(), -k * x0))
                .sum();
            s * window
        })
        .collect();
    let mut state = State::from_momentum(grid.clone(), &hat)?;
    state.normalize();
    state.meta.seed = Some(seed);
    Ok(state)
}

fn lagrange_weights(u: f64) -> [f64; STENCIL] {
    let mut w = [1.0; STENCIL];
    for (m, wm) in w.iter_mut().enumerate() {
        for l in 0..STENCIL {
            if l != m {
                *wm *= (u - l as f64) / (m as f64 - l as f64);
            }
        }
    }
    w
}

fn dilate_once(state: &State, sigma: f64) -> Result<State> {
    let g = state.grid();
    let n = g.n();
    let half = 0.5 * g.length();
    if sigma < 1.0 {
        let lost = state.mass_beyond(sigma * half);
        if lost > LEAK_TOLERANCE {
            return Err(Error::Support(format!(
                "mass {lost:.3e} beyond |x| = {:.4} leaves the grid under sigma = {sigma}",
                sigma * half
            )));
        }
    } else if sigma > 1.0 {
        let lost = state.momentum_mass_beyond(g.nyquist() / sigma);
        if lost > LEAK_TOLERANCE {
            return Err(Error::Band(format!(
                "momentum mass {lost:.3e} beyond {:.4} exceeds the grid under sigma = {sigma}",
                g.nyquist() / sigma
            )));
        }
    }

    // Band-limited upsampling by zero padding in momentum space.
    let nf = OVERSAMPLE * n;
    let mut spec = state.amp().to_vec();
    g.forward_raw(&mut spec);
    let mut fine = vec![C64::new(0.0, 0.0); nf];
    let scale = OVERSAMPLE as f64;
    for k in 0..n / 2 {
        fine[k] = spec[k] * scale;
    }
    for k in n / 2 + 1..n {
        fine[nf - n + k] = spec[k] * scale;
    }
    let nyq = spec[n / 2] * (0.5 * scale);
    fine[n / 2] = nyq;
    fine[nf - n / 2] = nyq;
    g.fine_inv.process(&mut fine);
    fine.iter_mut().for_each(|z| *z /= nf as f64);

    let h = g.dx() / OVERSAMPLE as f64;
    let root = sigma.sqrt();
    let amp = g
        .x()
        .iter()
        .map(|&x| {
            let s = sigma * x;
            if s < -half || s >= half {
                return C64::new(0.0, 0.0);
            }
            let u = (s + half) / h;
            let base = u.floor() as isize - (STENCIL as isize / 2 - 1);
            let w = lagrange_weights(u - base as f64);
            let mut acc = C64::new(0.0, 0.0);
            for (m, wm) in w.iter().enumerate() {
                let idx = (base + m as isize).rem_euclid(nf as isize) as usize;
                acc += fine[idx] * wm;
            }
            acc * root
        })
        .collect();
    Ok(State { grid: g.clone(), amp, meta: state.meta.clone() })
}

/// `psi(x) -> sigma^(1/2) psi(sigma x)`.
///
/// Factors outside `[1/8, 8]` are applied as a composition of equal factors
/// inside that range.
pub fn dilation_apply(state: &State, sigma: f64) -> Result<State> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("dilation factor must be positive, got {sigma}")));
    }
    if sigma == 1.0 {
        return Ok(state.clone());
    }
    let pieces = (sigma.ln().abs() / 8f64.ln()).ceil().max(1.0) as usize;
    let step = sigma.powf(1.0 / pieces as f64);
    let mut out = dilate_once(state, step)?;
    for _ in 1..pieces {
        out = dilate_once(&out, step)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CutoffKind {
    Sharp,
    /// Smooth transition of width `delta0` on the inner side of the threshold.
    Smooth {
        delta0: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Keeps `s <= c`.
    Below,
    /// Keeps `s >= c`.
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub kind: CutoffKind,
    pub threshold: f64,
    pub direction: Direction,
}

impl CutoffSpec {
    pub fn sharp(threshold: f64, direction: Direction) -> Self {
        Self { kind: CutoffKind::Sharp, threshold, direction }
    }

    pub fn smooth(threshold: f64, delta0: f64, direction: Direction) -> Self {
        Self { kind: CutoffKind::Smooth { delta0 }, threshold, direction }
    }

    /// Window value at `s`.
    pub fn window(&self, s: f64) -> f64 {
        let c = self.threshold;
        match (self.kind, self.direction) {
            (CutoffKind::Sharp, Direction::Below) => f64::from(u8::from(s <= c)),
            (CutoffKind::Sharp, Direction::Above) => f64::from(u8::from(s >= c)),
            (CutoffKind::Smooth { delta0 }, Direction::Below) => 1.0 - smooth_step((s - (c - delta0)) / delta0),
            (CutoffKind::Smooth { delta0 }, Direction::Above) => smooth_step((s - c) / delta0),
        }
    }
}

/// Multiplies by the window evaluated at `s = |x| / scale`.
pub fn cutoff_apply(state: &State, spec: &CutoffSpec, scale: f64) -> State {
    let mut out = state.clone();
    for (z, &x) in out.amp.iter_mut().zip(state.grid.x()) {
        *z *= spec.window(x.abs() / scale);
    }
    out
}

/// Norm of [`cutoff_apply`] without materializing the windowed state.
pub fn cutoff_mass(state: &State, spec: &CutoffSpec, scale: f64) -> f64 {
    let s: f64 = state
        .amp
        .iter()
        .zip(state.grid.x())
        .map(|(z, &x)| {
            let w = spec.window(x.abs() / scale);
            w * w * z.norm_sqr()
        })
        .sum();
    (s * state.grid.dx()).sqrt()
}
