//! Synthetic loss/comparator stream generators. Streams are pure functions
//! of their configuration: everything is drawn up front from a seeded RNG
//! and replayed, so identical configs always produce identical runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::hilbert::{dot, norm};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
    #[error("round {0} outside generated horizon {1}")]
    RoundOutOfRange(u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    LinearPiecewise,
    Regression,
    ExpConcave,
}

impl EnvKind {
    pub fn name(&self) -> &'static str {
        match self {
            EnvKind::LinearPiecewise => "linear_piecewise",
            EnvKind::Regression => "regression",
            EnvKind::ExpConcave => "expconcave",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub kind: EnvKind,
    pub dim: usize,
    pub horizon: u32,
    pub switches: u32,
    pub magnitude: f64,
    pub noise: f64,
    pub seed: u64,
}

impl EnvConfig {
    fn validate(&self) -> Result<(), EnvError> {
        if self.horizon < 1 {
            return Err(EnvError::InvalidConfig("horizon must be >= 1".into()));
        }
        if self.switches >= self.horizon {
            return Err(EnvError::InvalidConfig(format!(
                "switches ({}) must be < horizon ({})",
                self.switches, self.horizon
            )));
        }
        if !(self.magnitude > 0.0) {
            return Err(EnvError::InvalidConfig("magnitude must be positive".into()));
        }
        if self.noise < 0.0 {
            return Err(EnvError::InvalidConfig("noise must be nonnegative".into()));
        }
        if self.dim < 1 {
            return Err(EnvError::InvalidConfig("dimension must be >= 1".into()));
        }
        Ok(())
    }
}

/// What the environment reveals after the learner commits to a play.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub grad: Vec<f64>,
    pub comparator: Vec<f64>,
    pub loss_play: f64,
    pub loss_comp: f64,
}

pub trait Environment {
    fn dim(&self) -> usize;
    fn horizon(&self) -> u32;
    fn round(&mut self, t: u32, play: &[f64]) -> Result<RoundOutcome, EnvError>;
    /// The comparator path length metadata (P_T, max norm).
    fn comparator_meta(&self) -> (f64, f64);
    /// Comparator sequence u_1..u_T.
    fn comparators(&self) -> Vec<Vec<f64>>;
    /// Exp-concavity constant when the stream has one.
    fn beta(&self) -> Option<f64> {
        None
    }
}

fn unit_sphere(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn uniform_ball(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    let dir = unit_sphere(rng, d);
    let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
    dir.iter().map(|x| x * r).collect()
}

/// Piecewise-constant comparator with a per-segment tracking penalty.
///
/// The comparator is constant on switches+1 equal segments with values
/// uniform in the magnitude ball. The round-t gradient is, with probability
/// rho_tau = min(1, (1-noise)/sqrt(tau)) (tau = rounds since the segment
/// started), the unit vector pointing away from u_t, and otherwise uniform
/// noise on the sphere. The decaying correlation makes the comparator's
/// per-segment advantage accumulate at the sqrt(segment-length) rate, which
/// is the scaling a path-length-adaptive learner has to match.
pub struct LinearPiecewiseEnv {
    dim: usize,
    grads: Vec<Vec<f64>>,
    comps: Vec<Vec<f64>>,
    p_t: f64,
    m: f64,
}

/// The generated linear stream: per-round gradient/comparator pairs.
pub fn gen_linear_piecewise(cfg: &EnvConfig) -> Result<LinearPiecewiseEnv, EnvError> {
    if cfg.kind != EnvKind::LinearPiecewise {
        return Err(EnvError::InvalidConfig("kind must be linear_piecewise".into()));
    }
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let t_max = cfg.horizon as usize;
    let d = cfg.dim;
    let n_seg = cfg.switches as usize + 1;
    let seg_values: Vec<Vec<f64>> =
        (0..n_seg).map(|_| uniform_ball(&mut rng, d, cfg.magnitude)).collect();
    let bounds: Vec<usize> =
        (0..=n_seg).map(|i| (i * t_max + n_seg / 2) / n_seg).collect();

    let gain = (1.0 - cfg.noise).max(0.0);
    let g_budget = 1.0;
    let mut grads = Vec::with_capacity(t_max);
    let mut comps = Vec::with_capacity(t_max);
    for seg in 0..n_seg {
        let u = &seg_values[seg];
        let u_norm = norm(u);
        for offset in bounds[seg]..bounds[seg + 1] {
            let tau = (offset - bounds[seg] + 1) as f64;
            let rho = (gain / tau.sqrt()).min(1.0);
            let g: Vec<f64> = if rng.gen::<f64>() < rho && u_norm > 1e-12 {
                u.iter().map(|x| -g_budget * x / u_norm).collect()
            } else {
                let s = unit_sphere(&mut rng, d);
                s.iter().map(|x| g_budget * x).collect()
            };
            // keep the gradient budget exact under roundoff
            let gn = norm(&g);
            let g = if gn > g_budget { g.iter().map(|x| x * g_budget / gn).collect() } else { g };
            grads.push(g);
            comps.push(u.clone());
        }
    }
    let p_t: f64 = (1..t_max).map(|t| diff_norm(&comps[t], &comps[t - 1])).sum();
    let m = comps.iter().map(|u| norm(u)).fold(0.0, f64::max);
    Ok(LinearPiecewiseEnv { dim: d, grads, comps, p_t, m })
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl LinearPiecewiseEnv {
    /// Scales all gradients from round `from` on by `factor` (scale-free
    /// wrapper experiments).
    pub fn scale_gradients_from(&mut self, from: u32, factor: f64) {
        for t in (from as usize - 1)..self.grads.len() {
            for x in &mut self.grads[t] {
                *x *= factor;
            }
        }
    }
}

impl Environment for LinearPiecewiseEnv {
    fn dim(&self) -> usize {
        self.dim
    }

    fn horizon(&self) -> u32 {
        self.grads.len() as u32
    }

    fn round(&mut self, t: u32, play: &[f64]) -> Result<RoundOutcome, EnvError> {
        let idx = t as usize - 1;
        if idx >= self.grads.len() {
            return Err(EnvError::RoundOutOfRange(t, self.horizon()));
        }
        let g = &self.grads[idx];
        let u = &self.comps[idx];
        Ok(RoundOutcome {
            grad: g.clone(),
            comparator: u.clone(),
            loss_play: dot(g, play),
            loss_comp: dot(g, u),
        })
    }

    fn comparator_meta(&self) -> (f64, f64) {
        (self.p_t, self.m)
    }

    fn comparators(&self) -> Vec<Vec<f64>> {
        self.comps.clone()
    }
}

/// Online regression with time as context: y_t is a smooth drifting signal
/// plus noise, the benchmark predictions are the noiseless signal, and the
/// loss is the squared loss (1/2)(y_t - yhat)^2.
pub struct RegressionEnv {
    ys: Vec<f64>,
    benchmark: Vec<f64>,
    p_t: f64,
    m: f64,
}

pub fn gen_regression(cfg: &EnvConfig) -> Result<RegressionEnv, EnvError> {
    if cfg.kind != EnvKind::Regression {
        return Err(EnvError::InvalidConfig("kind must be regression".into()));
    }
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let t_max = cfg.horizon as usize;
    // drifting sinusoid; switches+1 full periods over the horizon
    let periods = cfg.switches as f64 + 1.0;
    let omega = 2.0 * std::f64::consts::PI * periods / t_max as f64;
    let benchmark: Vec<f64> =
        (1..=t_max).map(|t| cfg.magnitude * (omega * t as f64).sin()).collect();
    let ys: Vec<f64> = benchmark
        .iter()
        .map(|b| b + cfg.noise * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let p_t: f64 = (1..t_max).map(|t| (benchmark[t] - benchmark[t - 1]).abs()).sum();
    let m = benchmark.iter().map(|b| b.abs()).fold(0.0, f64::max);
    Ok(RegressionEnv { ys, benchmark, p_t, m })
}

impl RegressionEnv {
    pub fn labels(&self) -> &[f64] {
        &self.ys
    }

    pub fn benchmark(&self) -> &[f64] {
        &self.benchmark
    }
}

impl Environment for RegressionEnv {
    fn dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> u32 {
        self.ys.len() as u32
    }

    fn round(&mut self, t: u32, play: &[f64]) -> Result<RoundOutcome, EnvError> {
        let idx = t as usize - 1;
        if idx >= self.ys.len() {
            return Err(EnvError::RoundOutOfRange(t, self.horizon()));
        }
        let y = self.ys[idx];
        let tilde = self.benchmark[idx];
        let yhat = play[0];
        Ok(RoundOutcome {
            grad: vec![yhat - y],
            comparator: vec![tilde],
            loss_play: 0.5 * (y - yhat) * (y - yhat),
            loss_comp: 0.5 * (y - tilde) * (y - tilde),
        })
    }

    fn comparator_meta(&self) -> (f64, f64) {
        (self.p_t, self.m)
    }

    fn comparators(&self) -> Vec<Vec<f64>> {
        self.benchmark.iter().map(|b| vec![*b]).collect()
    }
}

/// Exp-concave stream: losses (1/2)(<a_t, w> - b_t)^2 on the ball of radius
/// `magnitude`, with b_t = <a_t, u*> + noise for a fixed comparator u*.
/// Reports beta = 1/(4 (max_t(||a_t|| B + |b_t|))^2).
pub struct ExpConcaveEnv {
    dim: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    u_star: Vec<f64>,
    beta: f64,
    radius: f64,
}

pub fn gen_expconcave(cfg: &EnvConfig) -> Result<ExpConcaveEnv, EnvError> {
    if cfg.kind != EnvKind::ExpConcave {
        return Err(EnvError::InvalidConfig("kind must be expconcave".into()));
    }
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let t_max = cfg.horizon as usize;
    let d = cfg.dim;
    let radius = cfg.magnitude;
    let u_star = uniform_ball(&mut rng, d, radius);
    let a: Vec<Vec<f64>> = (0..t_max).map(|_| unit_sphere(&mut rng, d)).collect();
    let b: Vec<f64> = a
        .iter()
        .map(|at| dot(at, &u_star) + cfg.noise * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let rho = a
        .iter()
        .zip(&b)
        .map(|(at, bt)| norm(at) * radius + bt.abs())
        .fold(0.0, f64::max);
    let beta = 1.0 / (4.0 * rho * rho);
    Ok(ExpConcaveEnv { dim: d, a, b, u_star, beta, radius })
}

impl ExpConcaveEnv {
    pub fn comparator(&self) -> &[f64] {
        &self.u_star
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Loss value and gradient at w for round t (1-based).
    pub fn loss_at(&self, t: u32, w: &[f64]) -> (f64, Vec<f64>) {
        let idx = t as usize - 1;
        let r = dot(&self.a[idx], w) - self.b[idx];
        (0.5 * r * r, self.a[idx].iter().map(|x| r * x).collect())
    }
}

impl Environment for ExpConcaveEnv {
    fn dim(&self) -> usize {
        self.dim
    }

    fn horizon(&self) -> u32 {
        self.a.len() as u32
    }

    fn round(&mut self, t: u32, play: &[f64]) -> Result<RoundOutcome, EnvError> {
        let idx = t as usize - 1;
        if idx >= self.a.len() {
            return Err(EnvError::RoundOutOfRange(t, self.horizon()));
        }
        let (loss_play, grad) = self.loss_at(t, play);
        let rc = dot(&self.a[idx], &self.u_star) - self.b[idx];
        Ok(RoundOutcome {
            grad,
            comparator: self.u_star.clone(),
            loss_play,
            loss_comp: 0.5 * rc * rc,
        })
    }

    fn comparator_meta(&self) -> (f64, f64) {
        (0.0, norm(&self.u_star))
    }

    fn comparators(&self) -> Vec<Vec<f64>> {
        vec![self.u_star.clone(); self.a.len()]
    }

    fn beta(&self) -> Option<f64> {
        Some(self.beta)
    }
}

/// Builds the environment described by the config.
pub fn build_env(cfg: &EnvConfig) -> Result<Box<dyn Environment>, EnvError> {
    Ok(match cfg.kind {
        EnvKind::LinearPiecewise => Box::new(gen_linear_piecewise(cfg)?),
        EnvKind::Regression => Box::new(gen_regression(cfg)?),
        EnvKind::ExpConcave => Box::new(gen_expconcave(cfg)?),
    })
}
