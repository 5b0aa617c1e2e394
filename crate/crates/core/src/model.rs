//! Physical parameters, the coefficient profile `k(t)`, decay thresholds and
//! the potential families.
//!
//! The harmonic coefficient is `k_C(t)` on `|t| <= r0` and `k t^-2` beyond.
//! The exponent `lambda` is the smaller root of `lambda (lambda - 1) + k/m = 0`
//! and sets both the sub-ballistic spreading `x ~ t^(1 - lambda)` and the
//! short-range threshold `1 / (1 - lambda)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smaller root of `lambda (lambda - 1) + k/m = 0`.
pub fn lambda_of(m: f64, k: f64) -> Result<f64> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Domain(format!("mass must be positive, got {m}")));
    }
    if !(k >= 0.0) || k >= m / 4.0 {
        return Err(Error::Domain(format!("harmonic coefficient must satisfy 0 <= k < m/4 = {}, got {k}", m / 4.0)));
    }
    let disc = 1.0 - 4.0 * k / m;
    // 2k/m / (1 + sqrt(disc)) is the cancellation-free form of (1 - sqrt(disc)) / 2
    Ok(2.0 * k / m / (1.0 + disc.sqrt()))
}

/// Piecewise-linear samples of `k_C` on `[0, r0]`, extended evenly to negative times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledProfile {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl SampledProfile {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::Domain("sampled profile needs at least two (t, k) pairs".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times[0] != 0.0 {
            return Err(Error::Domain("profile sample times must start at 0 and increase".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("profile values must be finite".into()));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        let last = self.times.len() - 1;
        if t >= self.times[last] {
            return self.values[last];
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = (t - t0) / (t1 - t0);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }
}

/// Interior shape of the harmonic coefficient on `|t| <= r0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KcProfile {
    /// Constant `k / r0^2`, continuous with the tail at `|t| = r0`.
    ConstantMatch,
    Custom(SampledProfile),
}

/// The two exponent thresholds separating the potential classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `1 / (1 - lambda)`: unmodified wave operators exist strictly above it.
    pub short: f64,
    /// `(2 lambda + 1) / (2 (1 - lambda))`: lower end of the Dollard window.
    pub dollard_lower: f64,
}

/// Physical parameters (units with `hbar = 1`) and derived exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    m: f64,
    k: f64,
    r0: f64,
    lambda: f64,
    big_lambda: f64,
    kc: KcProfile,
}

impl Model {
    pub fn new(m: f64, k: f64, r0: f64) -> Result<Self> {
        Self::with_profile(m, k, r0, KcProfile::ConstantMatch)
    }

    pub fn with_profile(m: f64, k: f64, r0: f64, kc: KcProfile) -> Result<Self> {
        let lambda = lambda_of(m, k)?;
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::Domain(format!("matching time must be positive, got {r0}")));
        }
        let big_lambda = m * (1.0 - 2.0 * lambda);
        Ok(Self { m, k, r0, lambda, big_lambda, kc })
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    /// Tail coefficient `k` in `k(t) = k t^-2`.
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `m (1 - 2 lambda)`, the effective mass of the reduced dynamics.
    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }

    pub fn kc_profile(&self) -> &KcProfile {
        &self.kc
    }

    /// Harmonic coefficient `k(t)`; even in `t`.
    pub fn k_profile(&self, t: f64) -> f64 {
        let s = t.abs();
        if s <= self.r0 {
            match &self.kc {
                KcProfile::ConstantMatch => self.k / (self.r0 * self.r0),
                KcProfile::Custom(p) => p.eval(s),
            }
        } else {
            self.k / (s * s)
        }
    }

    pub fn thresholds(&self) -> Thresholds {
        let l = self.lambda;
        Thresholds { short: 1.0 / (1.0 - l), dollard_lower: (2.0 * l + 1.0) / (2.0 * (1.0 - l)) }
    }

    /// `|t|^(1 - 2 lambda)`, the clock of the reduced free dynamics.
    pub fn reduced_clock(&self, t: f64) -> f64 {
        t.abs().powf(1.0 - 2.0 * self.lambda)
    }

    /// Residual of the defining quadratic, zero up to rounding.
    pub fn lambda_residual(&self) -> f64 {
        self.lambda * (self.lambda - 1.0) + self.k / self.m
    }
}

/// Bounded, strictly positive factor `g(t)` multiplying a static potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum TimeModulation {
    #[default]
    Constant,
    /// `1 + depth sin(omega t)` with `0 <= depth < 1`.
    Sinusoidal { depth: f64, omega: f64 },
}

impl TimeModulation {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeModulation::Constant => 1.0,
            TimeModulation::Sinusoidal { depth, omega } => 1.0 + depth * (omega * t).sin(),
        }
    }

    /// `(g_min, g_max)`.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            TimeModulation::Constant => (1.0, 1.0),
            TimeModulation::Sinusoidal { depth, .. } => (1.0 - depth.abs(), 1.0 + depth.abs()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PotentialFamily {
    ShortRange,
    DollardLong,
    LongRange,
    Zero,
}

impl PotentialFamily {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialFamily::ShortRange => "short_range",
            PotentialFamily::DollardLong => "dollard_long",
            PotentialFamily::LongRange => "long_range",
            PotentialFamily::Zero => "zero",
        }
    }

    /// Family implied by the exponent windows alone.
    ///
    /// The overlap `(dollard_lower, short]` is assigned to `DollardLong`
    /// except at the boundary `rho = short`, which is `LongRange` for a
    /// positive amplitude. Returns `None` when no window admits `rho`.
    pub fn infer(rho: f64, amplitude: f64, model: &Model) -> Option<Self> {
        if amplitude == 0.0 {
            return Some(PotentialFamily::Zero);
        }
        if !(rho > 0.0) {
            return None;
        }
        let th = model.thresholds();
        if rho > th.short {
            Some(PotentialFamily::ShortRange)
        } else if rho == th.short {
            Some(if amplitude > 0.0 { PotentialFamily::LongRange } else { PotentialFamily::DollardLong })
        } else if rho > th.dollard_lower {
            Some(PotentialFamily::DollardLong)
        } else if amplitude > 0.0 {
            Some(PotentialFamily::LongRange)
        } else {
            None
        }
    }
}

impl std::str::FromStr for PotentialFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "short_range" => Ok(PotentialFamily::ShortRange),
            "dollard_long" => Ok(PotentialFamily::DollardLong),
            "long_range" => Ok(PotentialFamily::LongRange),
            "zero" => Ok(PotentialFamily::Zero),
            other => Err(Error::Domain(format!("unknown potential family `{other}`"))),
        }
    }
}

/// Radial potential `g(t) C (a^2 + x^2)^(-rho/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub family: PotentialFamily,
    pub rho: f64,
    pub amplitude: f64,
    /// Core regularization scale `a`.
    pub smoothing: f64,
    pub modulation: TimeModulation,
}

impl PotentialSpec {
    pub fn zero() -> Self {
        Self {
            family: PotentialFamily::Zero,
            rho: 1.0,
            amplitude: 0.0,
            smoothing: 1.0,
            modulation: TimeModulation::Constant,
        }
    }

    pub fn new(family: PotentialFamily, rho: f64, amplitude: f64, smoothing: f64) -> Self {
        Self { family, rho, amplitude, smoothing, modulation: TimeModulation::Constant }
    }

    /// Family chosen by [`PotentialFamily::infer`]; `Zero` if no window fits,
    /// which [`classify`] will then reject.
    pub fn power_law(rho: f64, amplitude: f64, smoothing: f64, model: &Model) -> Self {
        let family = PotentialFamily::infer(rho, amplitude, model).unwrap_or(PotentialFamily::Zero);
        Self::new(family, rho, amplitude, smoothing)
    }

    pub fn with_modulation(mut self, modulation: TimeModulation) -> Self {
        self.modulation = modulation;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.family == PotentialFamily::Zero || self.amplitude == 0.0
    }

    #[inline]
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let a2 = self.smoothing * self.smoothing;
        self.modulation.eval(t) * self.amplitude * (a2 + x * x).powf(-0.5 * self.rho)
    }

    /// `d V / dx`.
    pub fn eval_dx(&self, t: f64, x: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let a2 = self.smoothing * self.smoothing;
        let r2 = a2 + x * x;
        -self.modulation.eval(t) * self.amplitude * self.rho * x * r2.powf(-0.5 * self.rho - 1.0)
    }

    /// `d^2 V / dx^2`.
    pub fn eval_dxx(&self, t: f64, x: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let a2 = self.smoothing * self.smoothing;
        let r2 = a2 + x * x;
        -self.modulation.eval(t)
            * self.amplitude
            * self.rho
            * (a2 - (self.rho + 1.0) * x * x)
            * r2.powf(-0.5 * self.rho - 2.0)
    }
}

/// Outcome of [`classify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Classification {
    Zero,
    ShortRange,
    DollardLong,
    /// With the measured constants `C_L <= V |x|^rho <= C~_L` on `|x| >= 1`.
    LongRange {
        c_lower: f64,
        c_upper: f64,
    },
    Invalid(String),
}

impl Classification {
    pub fn family(&self) -> Option<PotentialFamily> {
        match self {
            Classification::Zero => Some(PotentialFamily::Zero),
            Classification::ShortRange => Some(PotentialFamily::ShortRange),
            Classification::DollardLong => Some(PotentialFamily::DollardLong),
            Classification::LongRange { .. } => Some(PotentialFamily::LongRange),
            Classification::Invalid(_) => None,
        }
    }
}

/// Sampling extent used by [`classify`] to measure the long-range constants.
pub const CLASSIFY_X_MAX: f64 = 1.0e3;

/// Checks the declared family of `spec` against its exponent window.
pub fn classify(spec: &PotentialSpec, model: &Model) -> Classification {
    if spec.is_zero() {
        return Classification::Zero;
    }
    if !(spec.rho > 0.0) || !spec.rho.is_finite() {
        return Classification::Invalid(format!("decay exponent must be positive, got {}", spec.rho));
    }
    if !(spec.smoothing > 0.0) {
        return Classification::Invalid("core smoothing scale must be positive".into());
    }
    let th = model.thresholds();
    let rho = spec.rho;
    match spec.family {
        PotentialFamily::Zero => Classification::Zero,
        PotentialFamily::ShortRange => {
            if rho > th.short {
                Classification::ShortRange
            } else {
                Classification::Invalid(format!("short-range class needs rho > {:.6}, got {rho}", th.short))
            }
        }
        PotentialFamily::DollardLong => {
            if rho > th.dollard_lower && rho <= th.short {
                Classification::DollardLong
            } else {
                Classification::Invalid(format!(
                    "Dollard window is ({:.6}, {:.6}], got rho = {rho}",
                    th.dollard_lower, th.short
                ))
            }
        }
        PotentialFamily::LongRange => {
            if rho > th.short {
                return Classification::Invalid(format!("long-range class needs rho <= {:.6}, got {rho}", th.short));
            }
            let (g_min, _) = spec.modulation.bounds();
            if !(spec.amplitude > 0.0) || !(g_min > 0.0) {
                return Classification::Invalid("long-range class needs a sign-definite (positive) potential".into());
            }
            let (c_lower, c_upper) = measured_bounds(spec, model, CLASSIFY_X_MAX);
            Classification::LongRange { c_lower, c_upper }
        }
    }
}

/// Extremes of `V(t, x) |x|^rho` over `1 <= |x| <= x_max` and a log-spaced set
/// of times in `[r0, 1e3 r0]`.
pub fn measured_bounds(spec: &PotentialSpec, model: &Model, x_max: f64) -> (f64, f64) {
    const NX: usize = 400;
    const NT: usize = 64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let ts: Vec<f64> = if spec.modulation == TimeModulation::Constant {
        vec![model.r0()]
    } else {
        (0..NT).map(|j| model.r0() * 1.0e3_f64.powf(j as f64 / (NT - 1) as f64)).collect()
    };
    for &t in &ts {
        for i in 0..NX {
            let x = x_max.powf(i as f64 / (NX - 1) as f64);
            let v = spec.eval(t, x) * x.powf(spec.rho);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

/// A coefficient profile `k(t) = q^2 B(t)^2 / (4 m)` obtained from a
/// time-dependent magnetic field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagneticProfile {
    /// Interior samples of `k(t)` on `[0, r0]`.
    pub interior: SampledProfile,
    /// Tail coefficient: `k(t) = k_tail t^-2` for `|t| > r0`.
    pub k_tail: f64,
    pub r0: f64,
}

impl MagneticProfile {
    pub fn eval(&self, t: f64) -> f64 {
        let s = t.abs();
        if s <= self.r0 {
            self.interior.eval(s)
        } else {
            self.k_tail / (s * s)
        }
    }

    pub fn into_model(self, m: f64) -> Result<Model> {
        Model::with_profile(m, self.k_tail, self.r0, KcProfile::Custom(self.interior))
    }
}

const MAGNETIC_INTERIOR_SAMPLES: usize = 257;
const MAGNETIC_TAIL_SAMPLES: usize = 200;
const MAGNETIC_TAIL_DECADES: f64 = 3.0;
const MAGNETIC_SHAPE_TOL: f64 = 1.0e-6;

/// Converts a field profile `B(t)` into a harmonic coefficient profile and
/// verifies that its tail has the `k t^-2` form beyond `r0`.
pub fn magnetic_reduction(q: f64, m: f64, r0: f64, field: impl Fn(f64) -> f64) -> Result<MagneticProfile> {
    if q == 0.0 || !q.is_finite() {
        return Err(Error::Domain("charge must be non-zero".into()));
    }
    if !(m > 0.0) || !(r0 > 0.0) {
        return Err(Error::Domain("mass and matching time must be positive".into()));
    }
    let coeff = |t: f64| {
        let b = field(t);
        q * q * b * b / (4.0 * m)
    };

    let n = MAGNETIC_INTERIOR_SAMPLES;
    let times: Vec<f64> = (0..n).map(|i| r0 * i as f64 / (n - 1) as f64).collect();
    let values: Vec<f64> = times.iter().map(|&t| coeff(t)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("field must be bounded on [0, r0]".into()));
    }
    let interior = SampledProfile::new(times, values)?;

    // t^2 k(t) must be constant on the tail.
    let scaled: Vec<f64> = (0..MAGNETIC_TAIL_SAMPLES)
        .map(|j| {
            let frac = (j + 1) as f64 / MAGNETIC_TAIL_SAMPLES as f64;
            let t = r0 * 10f64.powf(MAGNETIC_TAIL_DECADES * frac);
            t * t * coeff(t)
        })
        .collect();
    if scaled.iter().any(|v| !v.is_finite()) {
        return Err(Error::Shape("field is not finite on the tail".into()));
    }
    let k_tail = scaled[0];
    let scale = scaled.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let spread = scaled.iter().fold(0.0_f64, |a, v| a.max((v - k_tail).abs()));
    if scale > 0.0 && spread > MAGNETIC_SHAPE_TOL * scale {
        return Err(Error::Shape(format!(
            "t^2 k(t) varies by {:.3e} (relative) over [r0, 1e{} r0]",
            spread / scale,
            MAGNETIC_TAIL_DECADES
        )));
    }
    Ok(MagneticProfile { interior, k_tail, r0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> Model {
        Model::new(1.0, 3.0 / 16.0, 1.0).unwrap()
    }

    #[test]
    fn lambda_closed_form_values() {
        assert_eq!(lambda_of(1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(lambda_of(1.0, 3.0 / 16.0).unwrap(), 0.25, epsilon = 1e-15);
        let l = lambda_of(1.0, 0.2499).unwrap();
        assert!((l * (l - 1.0) + 0.2499).abs() < 1e-12);
        assert!(l < 0.5);
    }

    #[test]
    fn lambda_rejects_outside_domain() {
        assert!(matches!(lambda_of(1.0, -0.1), Err(Error::Domain(_))));
        assert!(matches!(lambda_of(1.0, 0.25), Err(Error::Domain(_))));
        assert!(matches!(lambda_of(0.0, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn model_derived_constants() {
        let model = reference();
        assert!(model.lambda_residual().abs() < 1e-15);
        assert_relative_eq!(model.big_lambda(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn k_profile_tail_and_continuity() {
        let model = reference();
        assert_relative_eq!(model.k_profile(2.0), 3.0 / 64.0, epsilon = 1e-16);
        assert_eq!(model.k_profile(-2.0), model.k_profile(2.0));
        let below = model.k_profile(1.0 - 1e-12);
        let above = model.k_profile(1.0 + 1e-12);
        assert_relative_eq!(below, 3.0 / 16.0, epsilon = 1e-15);
        assert_relative_eq!(above, 3.0 / 16.0, epsilon = 1e-11);
        let free = Model::new(1.0, 0.0, 1.0).unwrap();
        for t in [-5.0, 0.0, 0.3, 7.0] {
            assert_eq!(free.k_profile(t), 0.0);
        }
    }

    #[test]
    fn threshold_values() {
        let free = Model::new(1.0, 0.0, 1.0).unwrap().thresholds();
        assert_eq!(free.short, 1.0);
        assert_eq!(free.dollard_lower, 0.5);
        let th = reference().thresholds();
        assert_relative_eq!(th.short, 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(th.dollard_lower, 1.0, epsilon = 1e-15);
        let near = Model::new(1.0, 0.25 - 1e-12, 1.0).unwrap().thresholds();
        assert!((near.short - 2.0).abs() < 1e-5);
    }

    #[test]
    fn classify_examples() {
        let model = reference();
        let short = PotentialSpec::new(PotentialFamily::ShortRange, 2.0, 1.0, 1.0);
        assert_eq!(classify(&short, &model), Classification::ShortRange);
        let dollard = PotentialSpec::new(PotentialFamily::DollardLong, 1.2, 1.0, 1.0);
        assert_eq!(classify(&dollard, &model), Classification::DollardLong);
        let long = PotentialSpec::new(PotentialFamily::LongRange, 4.0 / 3.0, 1.0, 1.0);
        match classify(&long, &model) {
            Classification::LongRange { c_lower, c_upper } => {
                // (1 + x^2)^(-2/3) x^(4/3) rises from 2^(-2/3) at x = 1 towards 1
                assert_relative_eq!(c_lower, 2f64.powf(-2.0 / 3.0), epsilon = 1e-12);
                assert!(c_upper <= 1.0 && c_upper > 0.999);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inferred_family_follows_windows() {
        let model = reference();
        let th = model.thresholds();
        let f = |rho: f64, c: f64| PotentialFamily::infer(rho, c, &model);
        assert_eq!(f(2.0, 1.0), Some(PotentialFamily::ShortRange));
        assert_eq!(f(1.2, 1.0), Some(PotentialFamily::DollardLong));
        assert_eq!(f(th.short, 1.0), Some(PotentialFamily::LongRange));
        assert_eq!(f(th.short, -1.0), Some(PotentialFamily::DollardLong));
        assert_eq!(f(1.0, 1.0), Some(PotentialFamily::LongRange));
        assert_eq!(f(0.5, -1.0), None);
        assert_eq!(f(2.0, 0.0), Some(PotentialFamily::Zero));
    }

    #[test]
    fn long_range_rejects_negative_amplitude() {
        let model = reference();
        let spec = PotentialSpec::new(PotentialFamily::LongRange, 1.0, -1.0, 1.0);
        assert!(matches!(classify(&spec, &model), Classification::Invalid(_)));
        let modulated = PotentialSpec::new(PotentialFamily::LongRange, 1.0, 1.0, 1.0)
            .with_modulation(TimeModulation::Sinusoidal { depth: 0.5, omega: 1.0 });
        match classify(&modulated, &model) {
            Classification::LongRange { c_lower, c_upper } => {
                assert!(c_lower >= 0.5 * 2f64.powf(-0.5) - 1e-12);
                assert!(c_upper <= 1.5 + 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn long_range_bounds_hold_on_samples() {
        let model = reference();
        let spec = PotentialSpec::new(PotentialFamily::LongRange, 1.1, 2.0, 0.7);
        let Classification::LongRange { c_lower, c_upper } = classify(&spec, &model) else {
            panic!("expected long range");
        };
        for i in 0..200 {
            let x = 1.0 + i as f64 * 4.7;
            let v = spec.eval(3.0, x);
            let p = x.powf(-spec.rho);
            assert!(c_lower * p <= v * (1.0 + 1e-12));
            assert!(v <= c_upper * p * (1.0 + 1e-12));
        }
    }

    #[test]
    fn potential_core_and_power_law() {
        let spec = PotentialSpec::new(PotentialFamily::ShortRange, 2.0, 1.0, 1.0);
        assert_eq!(spec.eval(5.0, 0.0), 1.0);
        let soft = PotentialSpec::new(PotentialFamily::LongRange, 4.0 / 3.0, 1.0, 0.1);
        let pure = 8f64.powf(-4.0 / 3.0);
        assert!((soft.eval(1.0, 8.0) / pure - 1.0).abs() < 0.01);
        assert!((soft.eval(1.0, -8.0) / pure - 1.0).abs() < 0.01);
    }

    #[test]
    fn magnetic_examples() {
        let field = |t: f64| (0.75f64).sqrt() / t.abs().max(1.0);
        let prof = magnetic_reduction(1.0, 1.0, 1.0, field).unwrap();
        assert_relative_eq!(prof.k_tail, 3.0 / 16.0, epsilon = 1e-14);
        for t in [1.5, 2.0, 10.0, -4.0] {
            assert_relative_eq!(prof.eval(t), 3.0 / 16.0 / (t * t), epsilon = 1e-14);
        }
        let model = prof.clone().into_model(1.0).unwrap();
        assert_relative_eq!(model.lambda(), 0.25, epsilon = 1e-14);
        assert_relative_eq!(model.k_profile(0.5), 3.0 / 16.0, epsilon = 1e-14);

        let zero = magnetic_reduction(1.0, 1.0, 1.0, |_| 0.0).unwrap();
        assert_eq!(zero.k_tail, 0.0);
        assert_eq!(zero.eval(0.3), 0.0);
        assert_eq!(zero.eval(30.0), 0.0);

        let slow = magnetic_reduction(1.0, 1.0, 1.0, |t| t.abs().max(1.0).powf(-0.5));
        assert!(matches!(slow, Err(Error::Shape(_))));
    }
}
