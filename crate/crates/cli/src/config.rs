//! Flat `block.key = value` run configuration with a strict schema.
//!
//! Defaults depend on the experiment; parsing starts from the experiment's
//! defaults and overlays the file, then the `--set` overrides. The resolved
//! form written next to the outputs lists every key and parses back to an
//! identical configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use tdho::model::{KcProfile, Model, PotentialFamily, PotentialSpec, SampledProfile};
use tdho::propagators::StepPolicy;
use tdho::spectral::{AnnularProfile, BumpShape, Sides};

use crate::registry::Experiment;
use crate::CliError;

/// Every accepted key with its one-line documentation, in output order.
pub const KEYS: &[(&str, &str)] = &[
    ("experiment", "registry name, see `tdho list`"),
    ("seed", "seed for random state preparation"),
    ("model.m", "mass m > 0"),
    ("model.k", "tail strength k, 0 <= k < m/4"),
    ("model.r0", "interior radius r0 > 0"),
    ("model.kc_profile", "`constant_match` or `t:k` pairs on [0, r0] separated by commas"),
    ("potential.family", "zero | short_range | dollard_long | long_range"),
    ("potential.rho", "decay exponent rho"),
    ("potential.amplitude", "amplitude C"),
    ("potential.smoothing", "core radius a > 0 in C (a^2 + x^2)^(-rho/2)"),
    ("grid.n_points", "number of grid points, a power of two"),
    ("grid.length", "box length L"),
    ("state.kind", "annular | gaussian | random"),
    ("state.eps", "annular inner radius eps; the shell is 2 eps <= |xi| <= R"),
    ("state.R", "annular outer radius R"),
    ("state.profile", "annular bump: classic | tapered"),
    ("state.kappa", "tapered bump sharpness"),
    ("state.sides", "annular shell: symmetric | positive"),
    ("state.launch", "annular launch time tau (state centred at x = tau xi), or `auto` for r0'/Lambda"),
    ("state.x0", "gaussian centre"),
    ("state.p0", "gaussian mean momentum"),
    ("state.width", "gaussian width"),
    ("state.k_max", "random state momentum band"),
    ("state.extent", "random state position extent"),
    ("schedule.t0", "first time"),
    ("schedule.t1", "last time (ignored by scans)"),
    ("schedule.n_doublings", "dyadic doublings of a scan"),
    ("schedule.n_points", "number of sample times"),
    ("schedule.policy", "uniform | graded | adaptive"),
    ("schedule.h0", "step size (uniform), initial step (graded, adaptive)"),
    ("schedule.growth", "graded step growth h = growth t beyond 10 r0"),
    ("schedule.tol", "adaptive local error tolerance"),
    ("schedule.ode_tol", "fundamental-solution integrator tolerance"),
    ("schedule.modified", "apply the Dollard modifier in scans"),
    ("schedule.xi0", "momentum for phase_growth"),
    ("schedule.budget_seconds", "projected runtime cap for scans, or `none`"),
    ("output.directory", "output directory"),
    ("output.formats", "csv"),
];

fn base_defaults() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("seed", "0"),
        ("model.m", "1"),
        ("model.k", "0.1875"),
        ("model.r0", "1"),
        ("model.kc_profile", "constant_match"),
        ("potential.family", "short_range"),
        ("potential.rho", "2"),
        ("potential.amplitude", "1"),
        ("potential.smoothing", "1"),
        ("grid.n_points", "8192"),
        ("grid.length", "400"),
        ("state.kind", "annular"),
        ("state.eps", "0.5"),
        ("state.R", "3"),
        ("state.profile", "tapered"),
        ("state.kappa", "5"),
        ("state.sides", "positive"),
        ("state.launch", "auto"),
        ("state.x0", "0"),
        ("state.p0", "0.1"),
        ("state.width", "1.43"),
        ("state.k_max", "8"),
        ("state.extent", "10"),
        ("schedule.t0", "8"),
        ("schedule.t1", "1000"),
        ("schedule.n_doublings", "6"),
        ("schedule.n_points", "21"),
        ("schedule.policy", "graded"),
        ("schedule.h0", "0.01"),
        ("schedule.growth", "0.01"),
        ("schedule.tol", "1e-8"),
        ("schedule.ode_tol", "1e-12"),
        ("schedule.modified", "false"),
        ("schedule.xi0", "1"),
        ("schedule.budget_seconds", "none"),
        ("output.directory", "out"),
        ("output.formats", "csv"),
    ])
}

/// Defaults that differ from the shared base for one experiment.
fn experiment_defaults(e: Experiment) -> &'static [(&'static str, &'static str)] {
    const CLASSIC: [(&str, &str); 4] =
        [("state.profile", "classic"), ("state.sides", "symmetric"), ("state.launch", "0"), ("state.R", "2.5")];
    match e {
        Experiment::Fundamentals => &[("potential.family", "zero")],
        Experiment::Ehrenfest => &[
            ("potential.family", "zero"),
            ("state.kind", "gaussian"),
            ("state.x0", "1"),
            ("state.p0", "0.2"),
            ("state.width", "1"),
            ("schedule.t0", "0"),
            ("schedule.t1", "100"),
            ("schedule.h0", "0.001"),
            ("schedule.growth", "0.002"),
        ],
        Experiment::Factorization => &[
            ("grid.n_points", "16384"),
            ("grid.length", "800"),
            ("state.kind", "gaussian"),
            ("schedule.policy", "uniform"),
            ("schedule.t0", "10"),
            ("schedule.t1", "100"),
            ("schedule.n_points", "2"),
        ],
        Experiment::PropagationDecay => &[
            ("potential.family", "zero"),
            CLASSIC[0],
            CLASSIC[1],
            CLASSIC[2],
            CLASSIC[3],
            ("schedule.t0", "10"),
            ("schedule.t1", "1000"),
            ("schedule.n_points", "7"),
        ],
        Experiment::CauchyScan => &[],
        Experiment::DollardScan => {
            &[("potential.family", "dollard_long"), ("potential.rho", "1.2"), ("schedule.modified", "true")]
        }
        Experiment::Nonexistence => &[
            ("potential.family", "long_range"),
            ("potential.rho", "1.3333333333333333"),
            CLASSIC[0],
            CLASSIC[1],
            CLASSIC[2],
            CLASSIC[3],
            ("schedule.t0", "100"),
            ("schedule.t1", "1000000"),
        ],
        Experiment::PhaseGrowth => &[
            ("potential.family", "dollard_long"),
            ("potential.rho", "1.2"),
            ("schedule.t0", "100"),
            ("schedule.t1", "1000000"),
        ],
    }
}

/// Default key-value map of one experiment, including `experiment` itself.
pub fn defaults(e: Experiment) -> BTreeMap<String, String> {
    let mut map: BTreeMap<String, String> =
        base_defaults().into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    for (k, v) in experiment_defaults(e) {
        map.insert(k.to_string(), v.to_string());
    }
    map.insert("experiment".into(), e.name().into());
    map
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Annular,
    Gaussian,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBlock {
    pub m: f64,
    pub k: f64,
    pub r0: f64,
    pub kc_profile: KcProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateBlock {
    pub kind: StateKind,
    pub eps: f64,
    pub r: f64,
    pub profile: BumpShape,
    pub sides: Sides,
    /// `None` for the automatic launch `r0' / Lambda`.
    pub launch: Option<f64>,
    pub x0: f64,
    pub p0: f64,
    pub width: f64,
    pub k_max: f64,
    pub extent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleBlock {
    pub t0: f64,
    pub t1: f64,
    pub n_doublings: usize,
    pub n_points: usize,
    pub policy: String,
    pub h0: f64,
    pub growth: f64,
    pub tol: f64,
    pub ode_tol: f64,
    pub modified: bool,
    pub xi0: f64,
    pub budget_seconds: Option<f64>,
}

/// A fully resolved, typed run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub model: ModelBlock,
    pub potential: PotentialSpec,
    pub grid_points: usize,
    pub grid_length: f64,
    pub state: StateBlock,
    pub schedule: ScheduleBlock,
    pub output_directory: String,
    pub output_formats: String,
    /// Every key with its resolved textual value.
    values: BTreeMap<String, String>,
}

fn split_line(line: &str, origin: &str) -> Result<Option<(String, String)>, CliError> {
    let line = line.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return Ok(None);
    }
    let (k, v) = line
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("{origin}: expected `key = value`, got `{line}`")))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() {
        return Err(CliError::Config(format!("{origin}: empty key or value in `{line}`")));
    }
    if !KEYS.iter().any(|(name, _)| *name == k) {
        return Err(CliError::Config(format!("{origin}: unknown key `{k}`")));
    }
    Ok(Some((k.to_string(), v.to_string())))
}

fn typed<T: FromStr>(values: &BTreeMap<String, String>, key: &str) -> Result<T, CliError> {
    let raw = &values[key];
    raw.parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{raw}`")))
}

fn choice<T: Copy>(values: &BTreeMap<String, String>, key: &str, options: &[(&str, T)]) -> Result<T, CliError> {
    let raw = values[key].as_str();
    options.iter().find(|(n, _)| *n == raw).map(|(_, v)| *v).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        CliError::Config(format!("`{key}`: expected one of {}, got `{raw}`", names.join(" | ")))
    })
}

fn optional(values: &BTreeMap<String, String>, key: &str, none: &str) -> Result<Option<f64>, CliError> {
    if values[key] == none {
        Ok(None)
    } else {
        typed(values, key).map(Some)
    }
}

fn kc_profile(raw: &str) -> Result<KcProfile, CliError> {
    if raw == "constant_match" {
        return Ok(KcProfile::ConstantMatch);
    }
    let bad = || CliError::Config(format!("`model.kc_profile`: expected `constant_match` or `t:k,...`, got `{raw}`"));
    let mut times = Vec::new();
    let mut ks = Vec::new();
    for pair in raw.split(',') {
        let (t, k) = pair.split_once(':').ok_or_else(bad)?;
        times.push(t.trim().parse().map_err(|_| bad())?);
        ks.push(k.trim().parse().map_err(|_| bad())?);
    }
    Ok(KcProfile::Custom(SampledProfile::new(times, ks)?))
}

impl RunConfig {
    /// Parses a config text and applies `key=value` overrides in order.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut given: BTreeMap<String, String> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if let Some((k, v)) = split_line(line, &format!("line {}", i + 1))? {
                if given.insert(k.clone(), v).is_some() {
                    return Err(CliError::Config(format!("line {}: duplicate key `{k}`", i + 1)));
                }
            }
        }
        for o in overrides {
            if let Some((k, v)) = split_line(o, "--set")? {
                given.insert(k, v);
            }
        }
        let experiment: Experiment =
            given.get("experiment").map(|s| s.parse()).transpose()?.unwrap_or(Experiment::CauchyScan);
        let mut values = defaults(experiment);
        values.extend(given);
        Self::from_values(values)
    }

    fn from_values(values: BTreeMap<String, String>) -> Result<Self, CliError> {
        let experiment: Experiment = values["experiment"].parse()?;
        let model = ModelBlock {
            m: typed(&values, "model.m")?,
            k: typed(&values, "model.k")?,
            r0: typed(&values, "model.r0")?,
            kc_profile: kc_profile(&values["model.kc_profile"])?,
        };
        let family: PotentialFamily = values["potential.family"].parse()?;
        let potential = if family == PotentialFamily::Zero {
            PotentialSpec::zero()
        } else {
            PotentialSpec::new(
                family,
                typed(&values, "potential.rho")?,
                typed(&values, "potential.amplitude")?,
                typed(&values, "potential.smoothing")?,
            )
        };
        let state = StateBlock {
            kind: choice(
                &values,
                "state.kind",
                &[("annular", StateKind::Annular), ("gaussian", StateKind::Gaussian), ("random", StateKind::Random)],
            )?,
            eps: typed(&values, "state.eps")?,
            r: typed(&values, "state.R")?,
            profile: match values["state.profile"].as_str() {
                "classic" => BumpShape::Classic,
                "tapered" => BumpShape::TaperedGaussian { kappa: typed(&values, "state.kappa")? },
                other => {
                    return Err(CliError::Config(format!("`state.profile`: expected classic | tapered, got `{other}`")))
                }
            },
            sides: choice(&values, "state.sides", &[("symmetric", Sides::Symmetric), ("positive", Sides::Positive)])?,
            launch: optional(&values, "state.launch", "auto")?,
            x0: typed(&values, "state.x0")?,
            p0: typed(&values, "state.p0")?,
            width: typed(&values, "state.width")?,
            k_max: typed(&values, "state.k_max")?,
            extent: typed(&values, "state.extent")?,
        };
        let schedule = ScheduleBlock {
            t0: typed(&values, "schedule.t0")?,
            t1: typed(&values, "schedule.t1")?,
            n_doublings: typed(&values, "schedule.n_doublings")?,
            n_points: typed(&values, "schedule.n_points")?,
            policy: choice(
                &values,
                "schedule.policy",
                &[("uniform", "uniform"), ("graded", "graded"), ("adaptive", "adaptive")],
            )?
            .to_string(),
            h0: typed(&values, "schedule.h0")?,
            growth: typed(&values, "schedule.growth")?,
            tol: typed(&values, "schedule.tol")?,
            ode_tol: typed(&values, "schedule.ode_tol")?,
            modified: choice(&values, "schedule.modified", &[("true", true), ("false", false)])?,
            xi0: typed(&values, "schedule.xi0")?,
            budget_seconds: optional(&values, "schedule.budget_seconds", "none")?,
        };
        if values["output.formats"] != "csv" {
            return Err(CliError::Config(format!(
                "`output.formats`: only `csv` is supported, got `{}`",
                values["output.formats"]
            )));
        }
        Ok(Self {
            experiment,
            seed: typed(&values, "seed")?,
            model,
            potential,
            grid_points: typed(&values, "grid.n_points")?,
            grid_length: typed(&values, "grid.length")?,
            state,
            schedule,
            output_directory: values["output.directory"].clone(),
            output_formats: values["output.formats"].clone(),
            values,
        })
    }

    /// The resolved textual value of a key.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Copy with one key replaced, re-validated.
    pub fn with(&self, key: &str, value: &str) -> Result<Self, CliError> {
        let (k, v) = split_line(&format!("{key} = {value}"), "override")?.expect("non-empty");
        let mut values = self.values.clone();
        values.insert(k, v);
        Self::from_values(values)
    }

    /// All resolved key-value pairs in schema order.
    pub fn entries(&self) -> impl Iterator<Item = (&'static str, &str)> + '_ {
        KEYS.iter().map(|(k, _)| (*k, self.values[*k].as_str()))
    }

    pub fn build_model(&self) -> Result<Model, CliError> {
        Ok(Model::with_profile(self.model.m, self.model.k, self.model.r0, self.model.kc_profile.clone())?)
    }

    pub fn step_policy(&self, model: &Model) -> StepPolicy {
        let s = &self.schedule;
        match s.policy.as_str() {
            "uniform" => StepPolicy::Uniform { h: s.h0 },
            "adaptive" => StepPolicy::Adaptive { tol: s.tol, h0: s.h0 },
            _ => StepPolicy::graded(s.h0, s.growth, model),
        }
    }

    pub fn annular_profile(&self, model: &Model) -> AnnularProfile {
        let launch = self.state.launch.unwrap_or_else(|| model.reduced_clock(model.r0()) / model.big_lambda());
        AnnularProfile { shape: self.state.profile, sides: self.state.sides, launch }
    }
}

impl fmt::Display for RunConfig {
    /// The resolved form: one `key = value` line per schema key.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_every_key() {
        for e in Experiment::ALL {
            let d = defaults(e);
            for (k, _) in KEYS {
                assert!(d.contains_key(*k), "{k} missing for {}", e.name());
            }
            assert_eq!(d.len(), KEYS.len());
            RunConfig::parse(&format!("experiment = {}", e.name()), &[]).unwrap();
        }
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::parse("model.lamda = 0.3\n", &[]).unwrap_err();
        assert!(err.to_string().contains("model.lamda"), "{err}");
        let err = RunConfig::parse("", &["lamda=0.3".into()]).unwrap_err();
        assert!(err.to_string().contains("`lamda`"), "{err}");
    }

    #[test]
    fn typed_errors_and_duplicates() {
        assert!(RunConfig::parse("model.m = heavy", &[]).is_err());
        assert!(RunConfig::parse("state.sides = left", &[]).is_err());
        assert!(RunConfig::parse("model.m = 1\nmodel.m = 2", &[]).is_err());
        assert!(RunConfig::parse("experiment = nope", &[]).is_err());
    }

    #[test]
    fn overrides_and_comments() {
        let c = RunConfig::parse("# comment\nmodel.k = 0.1 # trailing\n", &["model.k=0.2".into()]).unwrap();
        assert_eq!(c.model.k, 0.2);
        assert_eq!(c.get("model.k"), Some("0.2"));
    }

    #[test]
    fn resolved_form_round_trips() {
        for e in Experiment::ALL {
            let c = RunConfig::parse(&format!("experiment = {}\nmodel.kc_profile = 0:0.2, 1:0.1875", e.name()), &[])
                .unwrap();
            let again = RunConfig::parse(&c.to_string(), &[]).unwrap();
            assert_eq!(c, again);
            assert_eq!(c.to_string(), again.to_string());
        }
    }
}
