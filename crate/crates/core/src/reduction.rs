//! The online protocol driver: plays come from the learner, losses and
//! comparators from the environment, and the learner is fed the auxiliary
//! gradient pair (t, g_t). Gradient clipping and play projection wrap the
//! loop for the scale-free setting.

use thiserror::Error;

use crate::environments::{EnvError, Environment};
use crate::learners::{LearnerError, OnlineLearner};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("environment exhausted at round {0} before horizon {1}")]
    EnvExhausted(u32, u32),
}

/// Per-round record. `w` is the play actually scored (projected when the
/// projection wrapper is active); `w_raw` is the learner's unprojected play.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub t: u32,
    pub w: Vec<f64>,
    pub w_raw: Vec<f64>,
    pub g: Vec<f64>,
    pub loss_play: f64,
    pub loss_comp: f64,
    pub u: Vec<f64>,
}

/// Running maximum of past gradient norms; h_1 = 0 by the empty-max
/// convention, so the first gradient always clips to zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClipHint {
    pub h: f64,
}

/// Scale-free clipping: g_hat = g min(1, h/||g||), hint raised to ||g||.
pub fn clip_gradient(g: &[f64], hint: ClipHint) -> (Vec<f64>, ClipHint) {
    let n = crate::hilbert::norm(g);
    let clipped = if n <= hint.h {
        g.to_vec()
    } else if hint.h == 0.0 {
        vec![0.0; g.len()]
    } else {
        let s = hint.h / n;
        g.iter().map(|x| x * s).collect()
    };
    (clipped, ClipHint { h: hint.h.max(n) })
}

/// Euclidean projection onto the ball of radius `radius`.
pub fn project_ball(w: &[f64], radius: f64) -> Vec<f64> {
    let n = crate::hilbert::norm(w);
    if n <= radius {
        w.to_vec()
    } else {
        let s = radius / n;
        w.iter().map(|x| x * s).collect()
    }
}

/// Wrapper selection for a reduction run.
#[derive(Debug, Clone, Copy, Default)]
pub struct Wrappers {
    /// Replace fed gradients with clipped ones (scale-free mode).
    pub clip: bool,
    /// Project plays onto a ball of this radius before scoring.
    pub project: Option<f64>,
}

/// Runs the reduction for `horizon` rounds: play, observe loss, feed the
/// auxiliary gradient (clipped when requested) back to the learner.
pub fn run_reduction(
    learner: &mut dyn OnlineLearner,
    env: &mut dyn Environment,
    horizon: u32,
    wrappers: Wrappers,
) -> Result<Vec<RoundTrace>, ReductionError> {
    if env.horizon() < horizon {
        return Err(ReductionError::EnvExhausted(env.horizon() + 1, horizon));
    }
    let mut traces = Vec::with_capacity(horizon as usize);
    let mut hint = ClipHint::default();
    for t in 1..=horizon {
        let w_raw = learner.play(t)?;
        let w = match wrappers.project {
            Some(radius) => project_ball(&w_raw, radius),
            None => w_raw.clone(),
        };
        let outcome = env.round(t, &w)?;
        let fed = if wrappers.clip {
            let (clipped, next) = clip_gradient(&outcome.grad, hint);
            hint = next;
            clipped
        } else {
            outcome.grad.clone()
        };
        learner.observe(t, &fed)?;
        traces.push(RoundTrace {
            t,
            w,
            w_raw,
            g: outcome.grad,
            loss_play: outcome.loss_play,
            loss_comp: outcome.loss_comp,
            u: outcome.comparator,
        });
    }
    Ok(traces)
}

/// Serializes a trace as CSV with columns `t,w...,g...,loss_play,loss_comp,u...`.
pub fn trace_to_csv(traces: &[RoundTrace]) -> String {
    let d = traces.first().map_or(0, |tr| tr.w.len());
    let mut out = String::new();
    out.push('t');
    for i in 0..d {
        out.push_str(&format!(",w{i}"));
    }
    for i in 0..d {
        out.push_str(&format!(",g{i}"));
    }
    out.push_str(",loss_play,loss_comp");
    for i in 0..d {
        out.push_str(&format!(",u{i}"));
    }
    out.push('\n');
    for tr in traces {
        out.push_str(&tr.t.to_string());
        for x in &tr.w {
            out.push_str(&format!(",{x:.16e}"));
        }
        for x in &tr.g {
            out.push_str(&format!(",{x:.16e}"));
        }
        out.push_str(&format!(",{:.16e},{:.16e}", tr.loss_play, tr.loss_comp));
        for x in &tr.u {
            out.push_str(&format!(",{x:.16e}"));
        }
        out.push('\n');
    }
    out
}
