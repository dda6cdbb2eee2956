//! Static-regret learners operating through the kernel trick.
//!
//! Each learner receives the auxiliary-loss gradient as the pair (t, g_t),
//! standing for the rank-one operator g_t (x) phi(t), and produces plays
//! w_t = W_t phi(t) through kernel sums. No feature map is ever materialized.

use thiserror::Error;

use crate::hilbert::{
    dot, quad_form_inverse, woodbury_solve, GramState, GrowingCholesky, HilbertError,
    SpanOperator,
};
use crate::kernels::{kernel_eval, KernelError, KernelSpec};

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("invalid learner parameter: {0}")]
    InvalidParameter(String),
    #[error("root finder did not converge after {0} bisection steps")]
    RootFindFailure(usize),
}

/// The online protocol seen by the reduction driver: the learner is asked
/// for its play at round t, then fed the round's gradient.
pub trait OnlineLearner {
    fn dim(&self) -> usize;
    fn play(&mut self, t: u32) -> Result<Vec<f64>, LearnerError>;
    fn observe(&mut self, t: u32, g: &[f64]) -> Result<(), LearnerError>;
}

/// The parameter-free potential
/// `Psi(S, V) = eps G0 / (sqrt(V) log^2(V/G0^2)) * [exp(S^2/36V) - 1]`
/// for S <= 6V/G0, continued for larger S with exponent S/(3 G0) - V/G0^2,
/// which matches the first branch at the crossover (both give V/G0^2).
pub fn pf_potential(s: f64, v: f64, epsilon: f64, g0: f64) -> f64 {
    let prefactor = epsilon * g0 / (v.sqrt() * (v / (g0 * g0)).ln().powi(2));
    let arg = if s <= 6.0 * v / g0 {
        s * s / (36.0 * v)
    } else {
        s / (3.0 * g0) - v / (g0 * g0)
    };
    prefactor * arg.exp_m1()
}

/// Kernelized parameter-free learner:
/// w_t = -(sum_{s<t} k(s,t) g_s) Psi(S_t, V_t) / S_t with
/// S_t = ||sum_{s<t} G_s||_HS and V_t = 4 G0^2 + sum ||g_s||^2 k(s,s).
pub struct PfLearner {
    gram: GramState,
    epsilon: f64,
    dim: usize,
}

impl PfLearner {
    /// `lipschitz` is the gradient bound G; `diag_max` is max_t k(t,t) over
    /// the horizon, so G0 = G sqrt(diag_max).
    pub fn new(
        kernel: KernelSpec,
        dim: usize,
        epsilon: f64,
        lipschitz: f64,
        diag_max: f64,
    ) -> Result<Self, LearnerError> {
        if !(epsilon > 0.0) || !(lipschitz > 0.0) {
            return Err(LearnerError::InvalidParameter(
                "epsilon and lipschitz bound must be positive".into(),
            ));
        }
        let g0 = lipschitz * diag_max.sqrt();
        Ok(Self { gram: GramState::new(kernel, g0)?, epsilon, dim })
    }

    pub fn gram(&self) -> &GramState {
        &self.gram
    }
}

impl OnlineLearner for PfLearner {
    fn dim(&self) -> usize {
        self.dim
    }

    fn play(&mut self, t: u32) -> Result<Vec<f64>, LearnerError> {
        if self.gram.s_sq <= 0.0 {
            return Ok(vec![0.0; self.dim]);
        }
        let s = self.gram.s_sq.sqrt();
        let psi = pf_potential(s, self.gram.v, self.epsilon, self.gram.g0);
        let mut w = self.gram.weighted_grad_sum(t, self.dim)?;
        let scale = -psi / s;
        for x in &mut w {
            *x *= scale;
        }
        Ok(w)
    }

    fn observe(&mut self, t: u32, g: &[f64]) -> Result<(), LearnerError> {
        self.gram.push(t, g.to_vec())?;
        Ok(())
    }
}

/// Kernelized FTRL with quadratic regularizer: w_t = -eta sum_{s<t} k(s,t) g_s.
pub struct FtrlLearner {
    eta: f64,
    kernel: KernelSpec,
    grads: Vec<(u32, Vec<f64>)>,
    dim: usize,
}

impl FtrlLearner {
    pub fn new(kernel: KernelSpec, dim: usize, eta: f64) -> Result<Self, LearnerError> {
        if !(eta > 0.0) {
            return Err(LearnerError::InvalidParameter("eta must be positive".into()));
        }
        Ok(Self { eta, kernel, grads: Vec::new(), dim })
    }
}

impl OnlineLearner for FtrlLearner {
    fn dim(&self) -> usize {
        self.dim
    }

    fn play(&mut self, t: u32) -> Result<Vec<f64>, LearnerError> {
        ftrl_play(self.eta, &self.kernel, &self.grads, t, self.dim)
    }

    fn observe(&mut self, t: u32, g: &[f64]) -> Result<(), LearnerError> {
        self.grads.push((t, g.to_vec()));
        Ok(())
    }
}

/// Directional full-matrix learner. Round t solves
/// `W_t = argmin <theta_t, W> + Psi_t(||W||_t)` for the weighted norm
/// `||W||_t^2 = <W, Sigma_t W>`, `Sigma_t = (lambda + G0^2) I + sum G_s (x) G_s`.
/// The argmin is `-r* Sigma_t^{-1} theta_t / ||theta_t||_{t,*}` where r*
/// solves Psi_t'(r) = ||theta_t||_{t,*}.
pub struct FullMatrixLearner {
    shift: f64, // lambda + G0^2
    epsilon: f64,
    g0: f64,
    kernel: KernelSpec,
    grads: Vec<(u32, Vec<f64>)>,
    v: f64,
    dim: usize,
}

impl FullMatrixLearner {
    pub fn new(
        kernel: KernelSpec,
        dim: usize,
        lambda: f64,
        epsilon: f64,
        lipschitz: f64,
        diag_max: f64,
    ) -> Result<Self, LearnerError> {
        if !(lambda > 0.0) || !(epsilon > 0.0) || !(lipschitz > 0.0) {
            return Err(LearnerError::InvalidParameter(
                "lambda, epsilon and lipschitz bound must be positive".into(),
            ));
        }
        let g0 = lipschitz * diag_max.sqrt();
        Ok(Self {
            shift: lambda + g0 * g0,
            epsilon,
            g0,
            kernel,
            grads: Vec::new(),
            v: 4.0 * g0 * g0,
            dim,
        })
    }

    fn alpha(&self) -> f64 {
        self.epsilon * self.g0 / (self.v.sqrt() * (self.v / (self.g0 * self.g0)).ln().powi(2))
    }

    /// Psi_t'(r) = 3 min_{eta <= 1/G0} [log(r/alpha+1)/eta + eta V]; the inner
    /// minimum gives 2 sqrt(V log(r/alpha+1)) while the unconstrained eta is
    /// feasible and G0 log(r/alpha+1) + V/G0 beyond. Continuous and strictly
    /// increasing in r.
    fn psi_prime(&self, r: f64) -> f64 {
        let l = (r / self.alpha() + 1.0).ln();
        if l <= self.v / (self.g0 * self.g0) {
            3.0 * 2.0 * (self.v * l).sqrt()
        } else {
            3.0 * (self.g0 * l + self.v / self.g0)
        }
    }

    /// Solves Psi_t'(r) = target by bisection (Psi' is monotone).
    fn solve_radius(&self, target: f64) -> Result<f64, LearnerError> {
        if target <= 0.0 {
            return Ok(0.0);
        }
        let mut hi = self.alpha().max(1e-300);
        let mut grow = 0;
        while self.psi_prime(hi) < target {
            hi *= 2.0;
            grow += 1;
            if grow > 2000 {
                return Err(LearnerError::RootFindFailure(grow));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.psi_prime(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Optimality residual |Psi'(r*) - target| / target, for diagnostics.
    pub fn optimality_residual(&self, r_star: f64, target: f64) -> f64 {
        if target == 0.0 {
            return 0.0;
        }
        (self.psi_prime(r_star) - target).abs() / target
    }

    /// theta_t = sum_{s<t} G_s in span representation.
    pub fn theta(&self) -> SpanOperator {
        let mut theta = SpanOperator::zero();
        for (r, g) in &self.grads {
            theta.terms.push(crate::hilbert::SpanTerm {
                round: *r,
                vector: g.clone(),
                coeff: 1.0,
            });
        }
        theta
    }

    /// The dual norm ||theta||_{t,*} and the radius r* solving the
    /// first-order condition, exposed for the optimality diagnostics.
    pub fn dual_norm_and_radius(&self) -> Result<(f64, f64), LearnerError> {
        let theta = self.theta();
        if theta.is_zero() {
            return Ok((0.0, 0.0));
        }
        let nsq = quad_form_inverse(self.shift, &self.grads, &theta, &self.kernel)?;
        let ns = nsq.sqrt();
        Ok((ns, self.solve_radius(ns)?))
    }

    /// Current operator W_t in span representation.
    pub fn operator(&self) -> Result<SpanOperator, LearnerError> {
        let theta = self.theta();
        if theta.is_zero() {
            return Ok(SpanOperator::zero());
        }
        let (ns, r_star) = self.dual_norm_and_radius()?;
        if ns == 0.0 {
            return Ok(SpanOperator::zero());
        }
        let solved = woodbury_solve(self.shift, &self.grads, &theta, &self.kernel)?;
        Ok(solved.scaled(-r_star / ns))
    }
}

impl OnlineLearner for FullMatrixLearner {
    fn dim(&self) -> usize {
        self.dim
    }

    fn play(&mut self, t: u32) -> Result<Vec<f64>, LearnerError> {
        let w = self.operator()?;
        if w.is_zero() {
            return Ok(vec![0.0; self.dim]);
        }
        Ok(w.apply_phi(t, self.dim, &self.kernel)?)
    }

    fn observe(&mut self, t: u32, g: &[f64]) -> Result<(), LearnerError> {
        // ||G_t||^2_{t,*} enters V_{t+1}
        let gt = SpanOperator::rank_one(t, g.to_vec());
        let nsq = quad_form_inverse(self.shift, &self.grads, &gt, &self.kernel)?;
        self.v += nsq;
        self.grads.push((t, g.to_vec()));
        Ok(())
    }
}

/// Unprojected kernelized online Newton step:
/// `A_t = lambda I + beta sum_{s<=t} G_s (x) G_s`,
/// `W_{t+1} = W_t - A_t^{-1} G_t`, plays w_t = W_t phi(t).
///
/// W_t stays consolidated, one coefficient per round on that round's own
/// gradient, so the span never grows past t terms. An optional post-hoc
/// scaling keeps ||W||_HS inside a ball of radius `projection`.
pub struct KonsLearner {
    beta: f64,
    lambda: f64,
    kernel: KernelSpec,
    rounds: Vec<u32>,
    grads: Vec<Vec<f64>>,
    coeffs: Vec<f64>,
    chol: GrowingCholesky,
    projection: Option<f64>,
    dim: usize,
}

impl KonsLearner {
    pub fn new(
        kernel: KernelSpec,
        dim: usize,
        beta: f64,
        lambda: f64,
        projection: Option<f64>,
    ) -> Result<Self, LearnerError> {
        if !(beta > 0.0) || !(lambda > 0.0) {
            return Err(LearnerError::InvalidParameter("beta and lambda must be positive".into()));
        }
        Ok(Self {
            beta,
            lambda,
            kernel,
            rounds: Vec::new(),
            grads: Vec::new(),
            coeffs: Vec::new(),
            chol: GrowingCholesky::new(),
            projection,
            dim,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Newton step with the round-t gradient; returns the next play
    /// w_{t+1} = W_{t+1} phi(t+1).
    pub fn step(&mut self, t: u32, g: &[f64]) -> Result<Vec<f64>, LearnerError> {
        self.rounds.push(t);
        self.grads.push(g.to_vec());
        self.coeffs.push(0.0);
        let n = self.rounds.len();
        // row of <g_s, g_t> k(s, t)
        let mut row = vec![0.0; n];
        for s in 0..n {
            let kv = kernel_eval(&self.kernel, self.rounds[s], t)?;
            row[s] = kv * dot(&self.grads[s], g);
        }
        // extend the factor of C = lambda I + beta M
        let mut c_row: Vec<f64> = row.iter().map(|x| self.beta * x).collect();
        c_row[n - 1] += self.lambda;
        self.chol.push_row(&c_row)?;
        // A_t^{-1} G_t = (1/lambda)(G_t - sqrt(beta) sum_s y_s sqrt(beta) G_s)
        let sb = self.beta.sqrt();
        let rhs: Vec<f64> = row.iter().map(|x| sb * x).collect();
        let y = self.chol.solve(&rhs)?;
        for (c, ys) in self.coeffs.iter_mut().zip(&y) {
            *c += sb * ys / self.lambda;
        }
        self.coeffs[n - 1] -= 1.0 / self.lambda;
        if let Some(radius) = self.projection {
            let mut nsq = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let kv = kernel_eval(&self.kernel, self.rounds[i], self.rounds[j])?;
                    if kv != 0.0 {
                        nsq += self.coeffs[i]
                            * self.coeffs[j]
                            * kv
                            * dot(&self.grads[i], &self.grads[j]);
                    }
                }
            }
            let nrm = nsq.max(0.0).sqrt();
            if nrm > radius {
                let scale = radius / nrm;
                for c in &mut self.coeffs {
                    *c *= scale;
                }
            }
        }
        self.eval_play(t + 1)
    }

    fn eval_play(&self, t: u32) -> Result<Vec<f64>, LearnerError> {
        let mut w = vec![0.0; self.dim];
        for ((r, g), c) in self.rounds.iter().zip(&self.grads).zip(&self.coeffs) {
            let kv = kernel_eval(&self.kernel, *r, t)?;
            if kv != 0.0 {
                let s = c * kv;
                for (o, x) in w.iter_mut().zip(g) {
                    *o += s * x;
                }
            }
        }
        Ok(w)
    }
}

impl OnlineLearner for KonsLearner {
    fn dim(&self) -> usize {
        self.dim
    }

    fn play(&mut self, t: u32) -> Result<Vec<f64>, LearnerError> {
        self.eval_play(t)
    }

    fn observe(&mut self, t: u32, g: &[f64]) -> Result<(), LearnerError> {
        self.step(t, g)?;
        Ok(())
    }
}

/// Kernelized Vovk-Azoury-Warmuth forecaster with time-as-context:
/// `yhat_t = row_t of K_t (lambda I + K_t)^{-1} (y_1, ..., y_{t-1}, 0)`,
/// the push-through form of the primal VAW prediction.
pub struct VawLearner {
    lambda: f64,
    kernel: KernelSpec,
    labels: Vec<f64>,
    contexts: Vec<u32>,
    chol: GrowingCholesky,
    last_prediction: f64,
}

impl VawLearner {
    pub fn new(kernel: KernelSpec, lambda: f64) -> Result<Self, LearnerError> {
        if !(lambda > 0.0) {
            return Err(LearnerError::InvalidParameter("lambda must be positive".into()));
        }
        Ok(Self {
            lambda,
            kernel,
            labels: Vec::new(),
            contexts: Vec::new(),
            chol: GrowingCholesky::new(),
            last_prediction: 0.0,
        })
    }

    /// Predicts for context x_t (rounds double as contexts).
    pub fn predict(&mut self, x_t: u32) -> Result<f64, LearnerError> {
        self.contexts.push(x_t);
        let n = self.contexts.len();
        let mut krow = vec![0.0; n];
        for (i, x) in self.contexts.iter().enumerate() {
            krow[i] = kernel_eval(&self.kernel, *x, x_t)?;
        }
        let mut c_row = krow.clone();
        c_row[n - 1] += self.lambda;
        self.chol.push_row(&c_row)?;
        let mut rhs = self.labels.clone();
        rhs.push(0.0);
        let z = self.chol.solve(&rhs)?;
        self.last_prediction = dot(&krow, &z);
        Ok(self.last_prediction)
    }
}

impl OnlineLearner for VawLearner {
    fn dim(&self) -> usize {
        1
    }

    fn play(&mut self, t: u32) -> Result<Vec<f64>, LearnerError> {
        Ok(vec![self.predict(t)?])
    }

    fn observe(&mut self, _t: u32, g: &[f64]) -> Result<(), LearnerError> {
        // squared loss gradient at the prediction is yhat - y
        self.labels.push(self.last_prediction - g[0]);
        Ok(())
    }
}

/// Closed-form FTRL play used by tests and oracles:
/// w_t = -eta sum_{s<t} k(s,t) g_s.
pub fn ftrl_play(
    eta: f64,
    kernel: &KernelSpec,
    grads: &[(u32, Vec<f64>)],
    t: u32,
    dim: usize,
) -> Result<Vec<f64>, LearnerError> {
    let mut w = vec![0.0; dim];
    for (s, g) in grads {
        let kv = kernel_eval(kernel, *s, t)?;
        for (o, x) in w.iter_mut().zip(g) {
            *o -= eta * kv * x;
        }
    }
    Ok(w)
}
