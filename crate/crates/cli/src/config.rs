//! Flat key-value experiment configs with dotted keys, e.g.
//!
//! ```text
//! learners = pf, ftrl
//! kernels = horizon_free, spline
//! horizons = 64, 128
//! seeds = 1, 2, 3
//! output = results.csv
//! parallelism = 2
//!
//! env.kind = linear_piecewise
//! env.d = 2
//! env.switches = 4
//! env.magnitude = 1.0
//! env.noise = 0.25
//!
//! pf.epsilon = 1.0
//! pf.lipschitz = 1.0
//! ```
//!
//! `#` starts a comment; blank lines are ignored. Unknown keys are errors so
//! typos surface immediately.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use dynreg::environments::EnvKind;

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(line) = self.line {
            write!(f, " at line {line}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " (field `{field}`)")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, field: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError { line, field: field.map(str::to_owned), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    Pf,
    Ftrl,
    FullMatrix,
    Kons,
    Vaw,
}

impl LearnerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::Pf => "pf",
            LearnerKind::Ftrl => "ftrl",
            LearnerKind::FullMatrix => "fullmatrix",
            LearnerKind::Kons => "kons",
            LearnerKind::Vaw => "vaw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Dirac,
    Spline,
    Gaussian,
    HorizonFree,
}

impl KernelKind {
    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Dirac => "dirac",
            KernelKind::Spline => "spline",
            KernelKind::Gaussian => "gaussian",
            KernelKind::HorizonFree => "horizon_free",
        }
    }
}

/// Everything a grid run needs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub learners: Vec<LearnerKind>,
    pub kernels: Vec<KernelKind>,
    pub horizons: Vec<u32>,
    pub seeds: Vec<u64>,
    pub output: PathBuf,
    pub parallelism: usize,
    pub env_kind: EnvKind,
    pub env_dim: usize,
    pub env_switches: u32,
    pub env_magnitude: f64,
    pub env_noise: f64,
    pub pf_epsilon: f64,
    pub pf_lipschitz: f64,
    pub ftrl_eta: f64,
    pub fullmatrix_lambda: f64,
    pub fullmatrix_epsilon: f64,
    pub kons_lambda: f64,
    pub kons_beta: Option<f64>,
    pub kons_projection: Option<f64>,
    pub vaw_lambda: f64,
    pub gaussian_bandwidth: f64,
    pub ti_quad_tol: f64,
    pub clip: bool,
    pub project: Option<f64>,
}

struct Raw {
    entries: BTreeMap<String, (usize, String)>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let stripped = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            }
            .trim();
            if stripped.is_empty() {
                continue;
            }
            let Some((key, value)) = stripped.split_once('=') else {
                return Err(err(Some(line_no), None, "expected `key = value`"));
            };
            let key = key.trim().to_owned();
            if key.is_empty() {
                return Err(err(Some(line_no), None, "empty key"));
            }
            if entries.insert(key.clone(), (line_no, value.trim().to_owned())).is_some() {
                return Err(err(Some(line_no), Some(&key), "duplicate key"));
            }
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn take_f64(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse::<f64>()
                .map_err(|_| err(Some(line), Some(key), format!("not a number: `{v}`"))),
        }
    }

    fn take_usize(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse::<usize>()
                .map_err(|_| err(Some(line), Some(key), format!("not an integer: `{v}`"))),
        }
    }

    fn take_bool(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some((line, v)) => match v.as_str() {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                other => Err(err(Some(line), Some(key), format!("not a boolean: `{other}`"))),
            },
        }
    }

    fn take_list<T, F>(&mut self, key: &str, parse: F) -> Result<Vec<T>, ConfigError>
    where
        F: Fn(&str) -> Option<T>,
    {
        let Some((line, v)) = self.take(key) else {
            return Err(err(None, Some(key), "missing required key"));
        };
        let mut out = Vec::new();
        for item in v.split(',') {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            out.push(
                parse(item)
                    .ok_or_else(|| err(Some(line), Some(key), format!("bad item `{item}`")))?,
            );
        }
        if out.is_empty() {
            return Err(err(Some(line), Some(key), "list must be nonempty"));
        }
        Ok(out)
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut raw = Raw::parse(text)?;

    let learners = raw.take_list("learners", |s| match s {
        "pf" => Some(LearnerKind::Pf),
        "ftrl" => Some(LearnerKind::Ftrl),
        "fullmatrix" => Some(LearnerKind::FullMatrix),
        "kons" => Some(LearnerKind::Kons),
        "vaw" => Some(LearnerKind::Vaw),
        _ => None,
    })?;
    let kernels = raw.take_list("kernels", |s| match s {
        "dirac" => Some(KernelKind::Dirac),
        "spline" => Some(KernelKind::Spline),
        "gaussian" => Some(KernelKind::Gaussian),
        "horizon_free" => Some(KernelKind::HorizonFree),
        _ => None,
    })?;
    let horizons = raw.take_list("horizons", |s| s.parse::<u32>().ok())?;
    if horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(err(None, Some("horizons"), "must be strictly ascending"));
    }
    let seeds = raw.take_list("seeds", |s| s.parse::<u64>().ok())?;

    let output = match raw.take("output") {
        Some((_, v)) => PathBuf::from(v),
        None => return Err(err(None, Some("output"), "missing required key")),
    };
    let parallelism = raw.take_usize("parallelism", 1)?;
    if parallelism == 0 {
        return Err(err(None, Some("parallelism"), "must be >= 1"));
    }

    let env_kind = match raw.take("env.kind") {
        Some((line, v)) => match v.as_str() {
            "linear_piecewise" => EnvKind::LinearPiecewise,
            "regression" => EnvKind::Regression,
            "expconcave" => EnvKind::ExpConcave,
            other => {
                return Err(err(Some(line), Some("env.kind"), format!("unknown kind `{other}`")))
            }
        },
        None => return Err(err(None, Some("env.kind"), "missing required key")),
    };
    let env_dim = raw.take_usize("env.d", 1)?;
    let env_switches = raw.take_usize("env.switches", 0)? as u32;
    let env_magnitude = raw.take_f64("env.magnitude", 1.0)?;
    let env_noise = raw.take_f64("env.noise", 0.25)?;

    let project_raw = raw.take_f64("wrappers.project", 0.0)?;
    let cfg = ExperimentConfig {
        learners,
        kernels,
        horizons,
        seeds,
        output,
        parallelism,
        env_kind,
        env_dim,
        env_switches,
        env_magnitude,
        env_noise,
        pf_epsilon: raw.take_f64("pf.epsilon", 1.0)?,
        pf_lipschitz: raw.take_f64("pf.lipschitz", 1.0)?,
        ftrl_eta: raw.take_f64("ftrl.eta", 0.05)?,
        fullmatrix_lambda: raw.take_f64("fullmatrix.lambda", 1.0)?,
        fullmatrix_epsilon: raw.take_f64("fullmatrix.epsilon", 1.0)?,
        kons_lambda: raw.take_f64("kons.lambda", 1.0)?,
        kons_beta: {
            let b = raw.take_f64("kons.beta", 0.0)?;
            if b > 0.0 {
                Some(b)
            } else {
                None
            }
        },
        kons_projection: {
            let p = raw.take_f64("kons.projection", 0.0)?;
            if p > 0.0 {
                Some(p)
            } else {
                None
            }
        },
        vaw_lambda: raw.take_f64("vaw.lambda", 1.0)?,
        gaussian_bandwidth: raw.take_f64("kernel.gaussian.bandwidth", 1.0)?,
        ti_quad_tol: raw.take_f64("kernel.horizon_free.quad_tol", 1e-8)?,
        clip: raw.take_bool("wrappers.clip", false)?,
        project: if project_raw > 0.0 { Some(project_raw) } else { None },
    };

    if let Some((key, (line, _))) = raw.entries.into_iter().next() {
        return Err(err(Some(line), Some(&key), "unknown key"));
    }

    // cross-field validation
    if cfg.env_kind == EnvKind::Regression && cfg.env_dim != 1 {
        return Err(err(None, Some("env.d"), "regression streams are one-dimensional"));
    }
    for learner in &cfg.learners {
        if *learner == LearnerKind::Vaw && cfg.env_kind != EnvKind::Regression {
            return Err(err(
                None,
                Some("learners"),
                "vaw requires env.kind = regression",
            ));
        }
    }
    Ok(cfg)
}
