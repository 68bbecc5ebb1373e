//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, keys are namespaced with
//! dots (`forcing.pressure_amp`). Unknown or repeated keys are errors;
//! missing keys take the defaults of [`Config::default`].

use crate::dynamics::{parse_custom_csv, InitialData, SimConfig};
use crate::model::{DecayKind, ForceShape, ForcingSpec, ModelParams, ValidationReport};
use crate::stationary::SolveMethod;
use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("bad value `{value}` for `{key}`: expected {expected}")]
    BadValue { key: String, value: String, expected: &'static str },
    #[error("`{0}` is required here")]
    MissingKey(&'static str),
    #[error("custom initial data: {0}")]
    CustomData(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(ValidationReport),
}

/// Checks that `verify` can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerifyCheck {
    /// Static pressure identity of the stationary profile.
    Identity,
    /// Non-negative dissipation on random states.
    Dissipation,
    /// Volume compatibility after many steps.
    Volume,
    /// Energy balance of a perturbed run.
    Energy,
    /// Monotone Lyapunov functional.
    Lyapunov,
    /// Exponential decay fit.
    Decay,
    /// Effective-velocity functional (needs `theta > 0`).
    HFunctional,
}

impl VerifyCheck {
    pub const ALL: [VerifyCheck; 7] = [
        VerifyCheck::Identity,
        VerifyCheck::Dissipation,
        VerifyCheck::Volume,
        VerifyCheck::Energy,
        VerifyCheck::Lyapunov,
        VerifyCheck::Decay,
        VerifyCheck::HFunctional,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VerifyCheck::Identity => "identity",
            VerifyCheck::Dissipation => "dissipation",
            VerifyCheck::Volume => "volume",
            VerifyCheck::Energy => "energy",
            VerifyCheck::Lyapunov => "lyapunov",
            VerifyCheck::Decay => "decay",
            VerifyCheck::HFunctional => "h_functional",
        }
    }
}

impl FromStr for VerifyCheck {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        VerifyCheck::ALL.iter().copied().find(|c| c.name() == s).ok_or(())
    }
}

/// Tolerances and selection for `verify`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifySettings {
    pub checks: Vec<VerifyCheck>,
    pub tol_identity: f64,
    pub tol_volume: f64,
    pub tol_energy: f64,
    pub tol_v1_slack: f64,
    pub min_r_squared: f64,
    /// Random states drawn by the dissipation check.
    pub samples: usize,
    /// Steps taken by the volume check.
    pub steps: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            checks: VerifyCheck::ALL.to_vec(),
            tol_identity: 1e-6,
            tol_volume: 1e-10,
            tol_energy: 1e-2,
            tol_v1_slack: 1e-8,
            min_r_squared: 0.95,
            samples: 1000,
            steps: 1000,
        }
    }
}

/// Initial-data choice as written in the file.
#[derive(Debug, Clone, PartialEq)]
enum InitialKind {
    Stationary,
    PerturbedStationary,
    Uniform,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: ModelParams,
    pub forcing: ForcingSpec,
    pub n_cells: usize,
    pub t_end: f64,
    pub dt_safety: f64,
    /// `None` means `t_end / 100`.
    pub snapshot_every: Option<f64>,
    pub initial: InitialData,
    /// Source of custom initial data, when used.
    pub initial_file: Option<PathBuf>,
    pub vacuum_ratio: f64,
    pub stationary_cells: usize,
    pub stationary_tol: f64,
    pub stationary_method: SolveMethod,
    pub stationary_relax: f64,
    pub verify: VerifySettings,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            params: ModelParams {
                n: 3,
                gamma: 5.0 / 3.0,
                pressure_coeff: 1.0,
                theta: 1.0,
                c1: 1.0,
                c2: 1.0,
                gravity: 1.0,
                p_inf: 0.1,
                mass: 1.0,
            },
            forcing: ForcingSpec::none(),
            n_cells: 200,
            t_end: 1.0,
            dt_safety: 0.25,
            snapshot_every: None,
            initial: InitialData::Stationary,
            initial_file: None,
            vacuum_ratio: 1e-3,
            stationary_cells: 2000,
            stationary_tol: 1e-12,
            stationary_method: SolveMethod::Shooting,
            stationary_relax: 0.5,
            verify: VerifySettings::default(),
            seed: 0,
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: value.into(), expected })
}

fn float(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = num(key, value, "a finite number")?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::BadValue { key: key.into(), value: value.into(), expected: "a finite number" })
    }
}

fn decay(key: &str, value: &str) -> Result<DecayKind, ConfigError> {
    match value {
        "none" => Ok(DecayKind::None),
        "exp_decay" => Ok(DecayKind::ExpDecay),
        _ => Err(ConfigError::BadValue { key: key.into(), value: value.into(), expected: "none or exp_decay" }),
    }
}

impl Config {
    /// Reads `path`; a custom initial-data file is resolved relative to the
    /// config's directory. Parameters are validated.
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let cfg = Config::parse(&text, base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses configuration text without validating the parameters.
    pub fn parse(text: &str, base: &Path) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        let mut seen = HashSet::new();
        let mut kind = InitialKind::Stationary;
        let (mut amp, mut mode, mut vamp, mut rho0) = (1e-3, 1u32, 0.0, None);
        let mut file = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: line_no, text: raw.trim().into() });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax { line: line_no, text: raw.trim().into() });
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::DuplicateKey { line: line_no, key: key.into() });
            }
            let p = &mut cfg.params;
            let f = &mut cfg.forcing;
            match key {
                "n" => p.n = num(key, value, "an integer >= 2")?,
                "gamma" => p.gamma = float(key, value)?,
                "A" => p.pressure_coeff = float(key, value)?,
                "theta" => p.theta = float(key, value)?,
                "c1" => p.c1 = float(key, value)?,
                "c2" => p.c2 = float(key, value)?,
                "G" => p.gravity = float(key, value)?,
                "P_inf" => p.p_inf = float(key, value)?,
                "M" => p.mass = float(key, value)?,
                "forcing.pressure" => f.pressure_kind = decay(key, value)?,
                "forcing.pressure_amp" => f.pressure_amp = float(key, value)?,
                "forcing.pressure_rate" => f.pressure_rate = float(key, value)?,
                "forcing.force" => f.force_kind = decay(key, value)?,
                "forcing.force_amp" => f.force_amp = float(key, value)?,
                "forcing.force_rate" => f.force_rate = float(key, value)?,
                "forcing.force_shape" => {
                    f.force_shape = match value {
                        "bump" => ForceShape::Bump,
                        "uniform" => ForceShape::Uniform,
                        _ => {
                            return Err(ConfigError::BadValue {
                                key: key.into(),
                                value: value.into(),
                                expected: "bump or uniform",
                            })
                        }
                    }
                }
                "N" => cfg.n_cells = num(key, value, "a positive integer")?,
                "t_end" => cfg.t_end = float(key, value)?,
                "dt_safety" => cfg.dt_safety = float(key, value)?,
                "snapshot_every" => cfg.snapshot_every = Some(float(key, value)?),
                "initial_data" => {
                    kind = match value {
                        "stationary" => InitialKind::Stationary,
                        "perturbed_stationary" => InitialKind::PerturbedStationary,
                        "uniform" => InitialKind::Uniform,
                        "custom" => InitialKind::Custom,
                        _ => {
                            return Err(ConfigError::BadValue {
                                key: key.into(),
                                value: value.into(),
                                expected: "stationary, perturbed_stationary, uniform or custom",
                            })
                        }
                    }
                }
                "initial.amp" => amp = float(key, value)?,
                "initial.mode" => mode = num(key, value, "a non-negative integer")?,
                "initial.velocity_amp" => vamp = float(key, value)?,
                "initial.rho0" => rho0 = Some(float(key, value)?),
                "initial.file" => file = Some(base.join(value)),
                "vacuum_ratio" => cfg.vacuum_ratio = float(key, value)?,
                "stationary.N" => cfg.stationary_cells = num(key, value, "a positive integer")?,
                "stationary.tol" => cfg.stationary_tol = float(key, value)?,
                "stationary.method" => {
                    cfg.stationary_method = match value {
                        "shooting" => SolveMethod::Shooting,
                        "fixed_point" => SolveMethod::FixedPoint,
                        _ => {
                            return Err(ConfigError::BadValue {
                                key: key.into(),
                                value: value.into(),
                                expected: "shooting or fixed_point",
                            })
                        }
                    }
                }
                "stationary.relax" => cfg.stationary_relax = float(key, value)?,
                "verify.checks" => cfg.verify.checks = value
                    .split(',')
                    .map(|s| {
                        s.trim().parse().map_err(|_| ConfigError::BadValue {
                            key: key.into(),
                            value: s.trim().into(),
                            expected:
                                "a comma list of identity, dissipation, volume, energy, lyapunov, decay, h_functional",
                        })
                    })
                    .collect::<Result<_, _>>()?,
                "verify.tol.identity" => cfg.verify.tol_identity = float(key, value)?,
                "verify.tol.volume" => cfg.verify.tol_volume = float(key, value)?,
                "verify.tol.energy" => cfg.verify.tol_energy = float(key, value)?,
                "verify.tol.v1_slack" => cfg.verify.tol_v1_slack = float(key, value)?,
                "verify.tol.r2" => cfg.verify.min_r_squared = float(key, value)?,
                "verify.samples" => cfg.verify.samples = num(key, value, "a non-negative integer")?,
                "verify.steps" => cfg.verify.steps = num(key, value, "a non-negative integer")?,
                "seed" => cfg.seed = num(key, value, "a non-negative integer")?,
                _ => return Err(ConfigError::UnknownKey { line: line_no, key: key.into() }),
            }
        }
        cfg.initial = match kind {
            InitialKind::Stationary => InitialData::Stationary,
            InitialKind::PerturbedStationary => InitialData::PerturbedStationary { amp, mode, velocity_amp: vamp },
            InitialKind::Uniform => {
                InitialData::Uniform { rho0: rho0.unwrap_or_else(|| cfg.params.boundary_density()) }
            }
            InitialKind::Custom => {
                let path = file.clone().ok_or(ConfigError::MissingKey("initial.file"))?;
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| ConfigError::Io { path: path.clone(), message: e.to_string() })?;
                InitialData::Custom(parse_custom_csv(&text).map_err(|e| ConfigError::CustomData(e.to_string()))?)
            }
        };
        cfg.initial_file = file;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let report = self.params.validate();
        if report.is_accepted() {
            Ok(())
        } else {
            Err(ConfigError::InvalidParams(report))
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        let mut sim = SimConfig::new(self.params, self.n_cells, self.t_end, self.initial.clone());
        sim.forcing = self.forcing;
        sim.dt_safety = self.dt_safety;
        if let Some(every) = self.snapshot_every {
            sim.snapshot_every = every;
        }
        sim.vacuum_ratio = self.vacuum_ratio;
        sim.stationary_cells = self.stationary_cells;
        sim.stationary_tol = self.stationary_tol;
        sim
    }

    /// Every resolved key with its value, in file syntax.
    pub fn echo(&self) -> Vec<(String, String)> {
        let p = &self.params;
        let f = &self.forcing;
        let kind = |k: DecayKind| match k {
            DecayKind::None => "none",
            DecayKind::ExpDecay => "exp_decay",
        };
        let mut out: Vec<(&str, String)> = vec![
            ("n", p.n.to_string()),
            ("gamma", p.gamma.to_string()),
            ("A", p.pressure_coeff.to_string()),
            ("theta", p.theta.to_string()),
            ("c1", p.c1.to_string()),
            ("c2", p.c2.to_string()),
            ("G", p.gravity.to_string()),
            ("P_inf", p.p_inf.to_string()),
            ("M", p.mass.to_string()),
            ("forcing.pressure", kind(f.pressure_kind).into()),
            ("forcing.pressure_amp", f.pressure_amp.to_string()),
            ("forcing.pressure_rate", f.pressure_rate.to_string()),
            ("forcing.force", kind(f.force_kind).into()),
            ("forcing.force_amp", f.force_amp.to_string()),
            ("forcing.force_rate", f.force_rate.to_string()),
            (
                "forcing.force_shape",
                match f.force_shape {
                    ForceShape::Bump => "bump",
                    ForceShape::Uniform => "uniform",
                }
                .into(),
            ),
            ("N", self.n_cells.to_string()),
            ("t_end", self.t_end.to_string()),
            ("dt_safety", self.dt_safety.to_string()),
            ("snapshot_every", self.sim_config().snapshot_every.to_string()),
        ];
        match &self.initial {
            InitialData::Stationary => out.push(("initial_data", "stationary".into())),
            InitialData::PerturbedStationary { amp, mode, velocity_amp } => {
                out.push(("initial_data", "perturbed_stationary".into()));
                out.push(("initial.amp", amp.to_string()));
                out.push(("initial.mode", mode.to_string()));
                out.push(("initial.velocity_amp", velocity_amp.to_string()));
            }
            InitialData::Uniform { rho0 } => {
                out.push(("initial_data", "uniform".into()));
                out.push(("initial.rho0", rho0.to_string()));
            }
            InitialData::Custom(_) => {
                out.push(("initial_data", "custom".into()));
                let file = self.initial_file.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
                out.push(("initial.file", file));
            }
        }
        let v = &self.verify;
        out.extend([
            ("vacuum_ratio", self.vacuum_ratio.to_string()),
            ("stationary.N", self.stationary_cells.to_string()),
            ("stationary.tol", self.stationary_tol.to_string()),
            (
                "stationary.method",
                match self.stationary_method {
                    SolveMethod::Shooting => "shooting",
                    SolveMethod::FixedPoint => "fixed_point",
                }
                .into(),
            ),
            ("stationary.relax", self.stationary_relax.to_string()),
            ("verify.checks", v.checks.iter().map(|c| c.name()).collect::<Vec<_>>().join(",")),
            ("verify.tol.identity", v.tol_identity.to_string()),
            ("verify.tol.volume", v.tol_volume.to_string()),
            ("verify.tol.energy", v.tol_energy.to_string()),
            ("verify.tol.v1_slack", v.tol_v1_slack.to_string()),
            ("verify.tol.r2", v.min_r_squared.to_string()),
            ("verify.samples", v.samples.to_string()),
            ("verify.steps", v.steps.to_string()),
            ("seed", self.seed.to_string()),
        ]);
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.echo() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Config, ConfigError> {
        Config::parse(text, Path::new("."))
    }

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(parse("# nothing\n\n").unwrap(), Config::default());
    }

    #[test]
    fn reads_model_and_forcing_keys() {
        let cfg = parse(
            "n = 2\ngamma = 2  # stiff\nA = 0.5\nG = 0\nP_inf = 4\nM = 2\n\
             forcing.pressure = exp_decay\nforcing.pressure_amp = 0.1\nforcing.pressure_rate = 1\n\
             forcing.force_shape = uniform\n",
        )
        .unwrap();
        assert_eq!(cfg.params.n, 2);
        assert_eq!(cfg.params.gamma, 2.0);
        assert_eq!(cfg.params.pressure_coeff, 0.5);
        assert_eq!(cfg.params.mass, 2.0);
        assert_eq!(cfg.forcing.pressure_kind, DecayKind::ExpDecay);
        assert_eq!(cfg.forcing.delta_pressure(0.0), 0.1);
        assert_eq!(cfg.forcing.force_shape, ForceShape::Uniform);
    }

    #[test]
    fn initial_data_variants() {
        let cfg = parse("initial_data = perturbed_stationary\ninitial.amp = 0.01\ninitial.mode = 2\n").unwrap();
        assert_eq!(cfg.initial, InitialData::PerturbedStationary { amp: 0.01, mode: 2, velocity_amp: 0.0 });
        let cfg = parse("initial_data = uniform\nG = 0\nP_inf = 4\ngamma = 2\n").unwrap();
        assert_eq!(cfg.initial, InitialData::Uniform { rho0: 2.0 });
        assert_eq!(parse("initial_data = custom\n"), Err(ConfigError::MissingKey("initial.file")));
    }

    #[test]
    fn custom_file_is_resolved_against_base() {
        let dir = std::env::temp_dir().join(format!("sphereflow-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("init.csv"), "x,rho0,u0\n0,1,0\n1,1,0\n").unwrap();
        let cfg = Config::parse("initial_data = custom\ninitial.file = init.csv\n", &dir).unwrap();
        assert!(matches!(cfg.initial, InitialData::Custom(ref rows) if rows.len() == 2));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(parse("gamma 2\n"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(parse("n = 3\nfoo = 1\n"), Err(ConfigError::UnknownKey { line: 2, .. })));
        assert!(matches!(parse("n = 3\nn = 2\n"), Err(ConfigError::DuplicateKey { line: 2, .. })));
        assert!(matches!(parse("gamma = abc\n"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(parse("gamma = inf\n"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(parse("verify.checks = identity,bogus\n"), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn validation_names_the_condition() {
        let cfg = parse("c1 = 1\nc2 = -1\n").unwrap();
        match cfg.validate() {
            Err(ConfigError::InvalidParams(r)) => assert!(r.violates("2c1+nc2>0")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn echo_round_trips() {
        let cfg = parse("gamma = 1.4\nN = 64\nt_end = 0.3\ninitial_data = perturbed_stationary\nseed = 9\n").unwrap();
        let again = parse(&cfg.to_string()).unwrap();
        assert_eq!(again.echo(), cfg.echo());
        assert_eq!(again.sim_config(), cfg.sim_config());
    }

    #[test]
    fn sim_config_carries_settings() {
        let cfg = parse("N = 50\nt_end = 2\ndt_safety = 0.1\n").unwrap();
        let sim = cfg.sim_config();
        assert_eq!((sim.n_cells, sim.t_end, sim.dt_safety, sim.snapshot_every), (50, 2.0, 0.1, 0.02));
    }
}
