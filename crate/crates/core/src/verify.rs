//! Numerical verification of the interpolation constructions behind the
//! path-length guarantees, the c(T) quadrature bound of the horizon-free
//! density, and the Dirac-kernel equivalence with the flattened R^{dT}
//! reduction.

use std::f64::consts::PI;

use thiserror::Error;

use crate::hilbert::{dot, norm};
use crate::kernels::{KernelError, KernelSpec, SpectralDensity};
use crate::learners::{pf_potential, LearnerError};
use crate::quad::adaptive_qk15;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
}

/// S(x) = sinc(pi x) sinc(pi x / 2): a product of two sinc factors with
/// S(0) = 1, S = 0 on the other integers, and |S(x)| <= 1/(1 + 2 x^2).
pub fn s_kernel(x: f64) -> f64 {
    sinc(PI * x) * sinc(PI * x / 2.0)
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// f(t) = sum_l v_l S(t - l); interpolates v at integer points 1..T.
pub fn sinc_interp(values: &[Vec<f64>], t: f64) -> Vec<f64> {
    let d = values.first().map_or(0, |v| v.len());
    let mut out = vec![0.0; d];
    for (l, v) in values.iter().enumerate() {
        let w = s_kernel(t - (l as f64 + 1.0));
        for (o, x) in out.iter_mut().zip(v) {
            *o += w * x;
        }
    }
    out
}

/// Normalization constant of the bump B(x) = c_m (1 - 4 x^2)_+^{2m}:
/// c_m = 2 Gamma(3/2 + 2m) / (sqrt(pi) Gamma(1 + 2m))
///     = 2 (4m+2)! / ((2m)! (2m+1)! 4^{2m+1}).
fn bump_constant(m: u32) -> f64 {
    let mut log_c = (2.0f64).ln();
    for k in 1..=(4 * m + 2) {
        log_c += (k as f64).ln();
    }
    for k in 1..=(2 * m) {
        log_c -= (k as f64).ln();
    }
    for k in 1..=(2 * m + 1) {
        log_c -= (k as f64).ln();
    }
    log_c -= (2 * (2 * m + 1)) as f64 * (2.0f64).ln();
    log_c.exp()
}

/// B(x) itself; supported on (-1/2, 1/2) and integrating to one.
pub fn bump(m: u32, x: f64) -> f64 {
    let z = 1.0 - 4.0 * x * x;
    if z <= 0.0 {
        return 0.0;
    }
    bump_constant(m) * z.powi(2 * m as i32)
}

/// Phi(z) = int_{-1/2}^{z} B, by Gauss-Legendre of the polynomial integrand
/// (the Kronrod panel is exact for degree 4m up to m = 5).
fn bump_cdf(m: u32, z: f64) -> f64 {
    if z <= -0.5 {
        return 0.0;
    }
    let hi = z.min(0.5);
    let (v, _) = crate::quad::qk15(&|x| bump(m, x), -0.5, hi);
    v
}

/// b_T(t) = int_0^t B(x - 1/2) - B(x - T - 1/2) dx
///        = Phi(t - 1/2) - Phi(t - T - 1/2):
/// a 2m-times differentiable plateau, 1 on [1, T], 0 outside (0, T+1).
pub fn bump_b(t_horizon: u32, m: u32, t: f64) -> f64 {
    bump_cdf(m, t - 0.5) - bump_cdf(m, t - t_horizon as f64 - 0.5)
}

/// The compactly supported interpolant u(t) = f(t) b_T(t).
#[derive(Debug, Clone)]
pub struct Interpolant {
    pub values: Vec<Vec<f64>>,
    pub m: u32,
    pub grid_step: f64,
}

impl Interpolant {
    pub fn new(values: Vec<Vec<f64>>, m: u32, grid_step: f64) -> Result<Self, VerifyError> {
        if values.is_empty() {
            return Err(VerifyError::InvalidArgument("values must be nonempty".into()));
        }
        if m < 1 {
            return Err(VerifyError::InvalidArgument("m must be >= 1".into()));
        }
        if !(grid_step > 0.0 && grid_step <= 0.01) {
            return Err(VerifyError::InvalidArgument(format!(
                "grid step must lie in (0, 0.01] (got {grid_step})"
            )));
        }
        Ok(Self { values, m, grid_step })
    }

    pub fn horizon(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let b = bump_b(self.horizon(), self.m, t);
        if b == 0.0 {
            return vec![0.0; self.values[0].len()];
        }
        sinc_interp(&self.values, t).iter().map(|x| x * b).collect()
    }
}

/// C_{k,m} = (8 (2m + 3/2))^{k+1} / pi^{2m + 3/2}, the product-rule constant
/// of the plateau construction.
pub fn plateau_constant(k: u32, m: u32) -> f64 {
    (8.0 * (2.0 * m as f64 + 1.5)).powi(k as i32 + 1) / PI.powf(2.0 * m as f64 + 1.5)
}

/// Numeric report for one interpolant check.
#[derive(Debug, Clone)]
pub struct DiscretePlReport {
    pub l1_derivative: f64,
    pub l1_bound: f64,
    pub interp_residual: f64,
    pub sup_u_minus_d2m: f64,
    pub sup_bound: f64,
    pub pass: bool,
}

/// Grid-integrates ||u'|| over (0, T+1) by central differences and checks it
/// against 2 C_{1,m} (||v_1|| + sum ||v_t - v_{t-1}||) (1 + 1e-2); also
/// reports max_t ||u - u^{(2m)}|| against 12 (1 + C_{2m,m}) max ||v_l||.
pub fn check_discrete_pl(interp: &Interpolant) -> Result<DiscretePlReport, VerifyError> {
    let h = interp.grid_step;
    let t_horizon = interp.horizon();
    let d = interp.values[0].len();

    // interpolation residual at the integer nodes
    let mut interp_residual: f64 = 0.0;
    for (l, v) in interp.values.iter().enumerate() {
        let u = interp.eval(l as f64 + 1.0);
        let diff: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        interp_residual = interp_residual.max(diff);
    }

    // ||u'||_{L1(0, T+1)} with central differences on the grid
    let upper = t_horizon as f64 + 1.0;
    let steps = (upper / h).ceil() as usize;
    let mut l1 = 0.0;
    let mut sup_comb: f64 = 0.0;
    // derivative stencil radius for u^{(2m)}
    let m = interp.m;
    for i in 0..=steps {
        let t = (i as f64) * h;
        let up = interp.eval(t + h);
        let um = interp.eval(t - h);
        let mut dnorm = 0.0;
        for j in 0..d {
            let der = (up[j] - um[j]) / (2.0 * h);
            dnorm += der * der;
        }
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        l1 += w * h * dnorm.sqrt();

        // u - u^{(2m)} on the same grid; the 2m-th derivative comes from the
        // (2m+1)-point central difference stencil
        let u0 = interp.eval(t);
        let order = 2 * m as i32;
        let mut acc = vec![0.0; d];
        for k in 0..=order {
            let coeff = binomial(order, k) * if (order - k) % 2 == 0 { 1.0 } else { -1.0 };
            let sample = interp.eval(t + (k as f64 - order as f64 / 2.0) * h);
            for j in 0..d {
                acc[j] += coeff * sample[j];
            }
        }
        let scale = h.powi(order);
        let mut comb = 0.0;
        for j in 0..d {
            let der2m = acc[j] / scale;
            let v = u0[j] - der2m;
            comb += v * v;
        }
        sup_comb = sup_comb.max(comb.sqrt());
    }

    let mut path = norm(&interp.values[0]);
    for t in 1..interp.values.len() {
        let diff: f64 = interp.values[t]
            .iter()
            .zip(&interp.values[t - 1])
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        path += diff.sqrt();
    }
    let l1_bound = 2.0 * plateau_constant(1, m) * path * (1.0 + 1e-2);
    let vmax = interp.values.iter().map(|v| norm(v)).fold(0.0, f64::max);
    let sup_bound = 12.0 * (1.0 + plateau_constant(2 * m, m)) * vmax;
    let pass = l1 <= l1_bound && interp_residual <= 1e-8 && sup_comb <= sup_bound;
    Ok(DiscretePlReport {
        l1_derivative: l1,
        l1_bound,
        interp_residual,
        sup_u_minus_d2m: sup_comb,
        sup_bound,
        pass,
    })
}

fn binomial(n: i32, k: i32) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r *= (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// ||u'||^2_{L2} of the plain sinc interpolant u(t) = sum v_l sinc(pi(t-l)),
/// integrated on a wide symmetric grid. Used for the squared-path-length
/// check of the spline construction.
pub fn sinc_l2_derivative_sq(values: &[Vec<f64>], h: f64, window: f64) -> f64 {
    let d = values[0].len();
    let t_horizon = values.len() as f64;
    let lo = -window;
    let hi = t_horizon + 1.0 + window;
    let steps = ((hi - lo) / h).ceil() as usize;
    let eval = |t: f64| -> Vec<f64> {
        let mut out = vec![0.0; d];
        for (l, v) in values.iter().enumerate() {
            let w = sinc(PI * (t - (l as f64 + 1.0)));
            for (o, x) in out.iter_mut().zip(v) {
                *o += w * x;
            }
        }
        out
    };
    let mut acc = 0.0;
    for i in 0..=steps {
        let t = lo + (i as f64) * h;
        let up = eval(t + h);
        let um = eval(t - h);
        let mut dsq = 0.0;
        for j in 0..d {
            let der = (up[j] - um[j]) / (2.0 * h);
            dsq += der * der;
        }
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        acc += w * h * dsq;
    }
    acc
}

/// Squared-path-length cap for the plain sinc interpolant:
/// `(pi^2/4) (||v_1||^2 + sum_{t>=2} ||v_t - v_{t-1}||^2 + ||v_T||^2) (1 + 1e-2)`.
///
/// The Nyquist-band Parseval identity gives
/// `||u'||^2 = int_{-1/2}^{1/2} (pi w)^2 / sin^2(pi w) |dvhat(w)|^2 dw`
/// with the difference sequence extended by v_0 = v_{T+1} = 0, and
/// `z^2/sin^2(z) <= pi^2/4` on [-pi/2, pi/2] (sharp at the endpoints).
pub fn sinc_l2_squared_path_bound(values: &[Vec<f64>]) -> f64 {
    let mut sum = dot(&values[0], &values[0]);
    for t in 1..values.len() {
        let d: f64 = values[t]
            .iter()
            .zip(&values[t - 1])
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        sum += d;
    }
    let last = &values[values.len() - 1];
    sum += dot(last, last);
    (PI * PI / 4.0) * sum * (1.0 + 1e-2)
}

/// c(T) bound of the translation-invariant construction:
/// `2 pi (T+1)^2 int_0^alpha R(x) x dx + (2/pi) int_alpha^inf R(x)/x dx`.
pub fn c_of_t_bound(
    density: &SpectralDensity,
    t_horizon: u32,
    alpha: f64,
) -> Result<f64, VerifyError> {
    if t_horizon <= 2 {
        return Err(VerifyError::InvalidArgument("horizon must exceed 2".into()));
    }
    if !(alpha > 0.0) {
        return Err(VerifyError::InvalidArgument("alpha must be positive".into()));
    }
    let tol = 1e-9;
    // head: int_0^alpha R(x) x dx on geometric panels toward 0 (the log^3
    // singularity of R at 0 is tamed by the factor x)
    let f_head = |x: f64| density.r(x) * x;
    let mut head = 0.0;
    let mut hi = alpha;
    for _ in 0..600 {
        let lo = hi * 0.5;
        let est = adaptive_qk15(&f_head, lo, hi, tol * 0.01, 200)
            .map_err(|e| VerifyError::Quadrature(format!("head residual {:.2e}", e.error)))?;
        head += est.value;
        hi = lo;
        if est.value.abs() < tol * 0.01 && hi < 1e-30 {
            break;
        }
    }
    // tail: int_alpha^inf R(x)/x dx on doubling panels (R/x ~ x^{-1-(2m-s)}
    // for large x)
    let f_tail = |x: f64| density.r(x) / x;
    let mut tail = 0.0;
    let mut lo = alpha;
    loop {
        let hi = lo * 2.0;
        let est = adaptive_qk15(&f_tail, lo, hi, tol * 0.01, 200)
            .map_err(|e| VerifyError::Quadrature(format!("tail residual {:.2e}", e.error)))?;
        tail += est.value;
        lo = hi;
        if est.value.abs() < tol * 0.1 && lo > 1e4 {
            break;
        }
        if lo > 1e300 {
            return Err(VerifyError::Quadrature("tail did not decay".into()));
        }
    }
    let t1 = t_horizon as f64 + 1.0;
    Ok(2.0 * PI * t1 * t1 * head + (2.0 / PI) * tail)
}

/// Closed-form cap of the c(T) bound for the horizon-free density:
/// (4 pi^2 e^2)^2 log^2(T) loglog^2(T).
pub fn c_of_t_cap(t_horizon: u32) -> f64 {
    let e2 = std::f64::consts::E * std::f64::consts::E;
    let lt = (t_horizon as f64).ln();
    (4.0 * PI * PI * e2).powi(2) * lt * lt * lt.ln() * lt.ln()
}

/// Which base learner the equivalence harness runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivalenceLearner {
    Pf,
    Ftrl,
}

/// Outcome of one Dirac-equivalence run.
#[derive(Debug, Clone)]
pub struct DiracEquivalence {
    pub max_play_deviation: f64,
    pub regret_deviation: f64,
    pub scalar_deviation: f64,
    pub pass: bool,
}

/// Runs the same learner through (a) the kernel reduction with the Dirac
/// kernel and (b) the flattened R^{dT} reduction with stacked gradients, on
/// a shared linear stream, and compares plays, internal scalars and regret.
///
/// Tolerance is 1e-12 on every comparison.
pub fn dirac_equivalence(
    t_horizon: u32,
    dim: usize,
    seed: u64,
    learner: EquivalenceLearner,
) -> Result<DiracEquivalence, VerifyError> {
    if t_horizon as usize * dim > 4096 {
        return Err(VerifyError::InvalidArgument("T*d must stay <= 4096".into()));
    }
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let grads: Vec<Vec<f64>> = (0..t_horizon)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let comps: Vec<Vec<f64>> = (0..t_horizon)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();

    let eta = 0.1;
    let epsilon = 1.0;
    let lipschitz = (dim as f64).sqrt();
    let g0 = lipschitz; // k(t,t) = 1 for the dirac kernel

    // kernel route
    let kernel = KernelSpec::Dirac;
    let mut kernel_plays = Vec::new();
    let mut kernel_s_sq = Vec::new();
    let mut kernel_v = Vec::new();
    match learner {
        EquivalenceLearner::Pf => {
            let mut gram = crate::hilbert::GramState::new(kernel.clone(), g0)
                .map_err(LearnerError::from)?;
            for t in 1..=t_horizon {
                let w = if gram.s_sq > 0.0 {
                    let s = gram.s_sq.sqrt();
                    let psi = pf_potential(s, gram.v, epsilon, g0);
                    let mut w = gram
                        .weighted_grad_sum(t, dim)
                        .map_err(LearnerError::from)?;
                    for x in &mut w {
                        *x *= -psi / s;
                    }
                    w
                } else {
                    vec![0.0; dim]
                };
                kernel_plays.push(w);
                gram.push(t, grads[(t - 1) as usize].clone()).map_err(LearnerError::from)?;
                kernel_s_sq.push(gram.s_sq);
                kernel_v.push(gram.v);
            }
        }
        EquivalenceLearner::Ftrl => {
            let mut hist: Vec<(u32, Vec<f64>)> = Vec::new();
            for t in 1..=t_horizon {
                let w = crate::learners::ftrl_play(eta, &kernel, &hist, t, dim)?;
                kernel_plays.push(w);
                hist.push((t, grads[(t - 1) as usize].clone()));
            }
        }
    }

    // flattened route in R^{dT}: stacked gradient has the round-t block
    let n = t_horizon as usize * dim;
    let mut flat_plays = Vec::new();
    let mut flat_s_sq = Vec::new();
    let mut flat_v = Vec::new();
    match learner {
        EquivalenceLearner::Pf => {
            let mut theta = vec![0.0; n];
            let mut s_sq: f64 = 0.0;
            let mut v = 4.0 * g0 * g0;
            for t in 1..=t_horizon as usize {
                let w_full: Vec<f64> = if s_sq > 0.0 {
                    let s = s_sq.sqrt();
                    let psi = pf_potential(s, v, epsilon, g0);
                    theta.iter().map(|x| -x * psi / s).collect()
                } else {
                    vec![0.0; n]
                };
                let block = (t - 1) * dim;
                flat_plays.push(w_full[block..block + dim].to_vec());
                let g = &grads[t - 1];
                // stacked gradient is zero outside the round-t block
                let gg = dot(g, g);
                let cross: f64 = theta[block..block + dim]
                    .iter()
                    .zip(g)
                    .map(|(a, b)| a * b)
                    .sum();
                s_sq += gg + 2.0 * cross;
                v += gg;
                for (i, x) in g.iter().enumerate() {
                    theta[block + i] += x;
                }
                flat_s_sq.push(s_sq);
                flat_v.push(v);
            }
        }
        EquivalenceLearner::Ftrl => {
            let mut theta = vec![0.0; n];
            for t in 1..=t_horizon as usize {
                let block = (t - 1) * dim;
                let w_block: Vec<f64> =
                    theta[block..block + dim].iter().map(|x| -eta * x).collect();
                flat_plays.push(w_block);
                for (i, x) in grads[t - 1].iter().enumerate() {
                    theta[block + i] += x;
                }
            }
        }
    }

    let mut max_play_dev: f64 = 0.0;
    let mut kernel_regret = 0.0;
    let mut flat_regret = 0.0;
    for t in 0..t_horizon as usize {
        let g = &grads[t];
        let u = &comps[t];
        for j in 0..dim {
            max_play_dev = max_play_dev.max((kernel_plays[t][j] - flat_plays[t][j]).abs());
        }
        kernel_regret += dot(g, &kernel_plays[t]) - dot(g, u);
        flat_regret += dot(g, &flat_plays[t]) - dot(g, u);
    }
    let mut scalar_dev: f64 = 0.0;
    for t in 0..kernel_s_sq.len() {
        scalar_dev = scalar_dev.max((kernel_s_sq[t] - flat_s_sq[t]).abs());
        scalar_dev = scalar_dev.max((kernel_v[t] - flat_v[t]).abs());
    }
    let regret_dev = (kernel_regret - flat_regret).abs();
    let pass = max_play_dev <= 1e-12 && regret_dev <= 1e-12 && scalar_dev <= 1e-9;
    Ok(DiracEquivalence {
        max_play_deviation: max_play_dev,
        regret_deviation: regret_dev,
        scalar_deviation: scalar_dev,
        pass,
    })
}

/// Suite depth for the runnable verification report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyLevel {
    Fast,
    Full,
}

/// One row of the verification report: pass means measured <= bound (after
/// scaling the bound by the caller's tolerance factor).
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

fn check(name: &'static str, measured: f64, bound: f64, tol_scale: f64) -> CheckOutcome {
    CheckOutcome { name, measured, bound: bound * tol_scale, pass: measured <= bound * tol_scale }
}

/// Runs the numeric verification suite. `tol_scale` multiplies every bound
/// (1.0 for the standard run; smaller values tighten all checks, which is
/// how deliberate failures are injected to exercise reporting paths).
pub fn run_suite(level: VerifyLevel, tol_scale: f64) -> Result<Vec<CheckOutcome>, VerifyError> {
    use crate::analysis::{effective_dimension, logdet_sum_check, spline_closed_forms};
    use crate::hilbert::{sum_norm_sq, GramState};
    use crate::kernels::{build_ti_table, density_mass, gram};
    use rand::{Rng, SeedableRng};

    let mut out = Vec::new();
    let density = SpectralDensity::horizon_free();

    // spectral mass against the diagonal cap
    let mass = density_mass(&density, 1e-8)?;
    out.push(check("density-mass <= 8 pi^2", mass, 8.0 * PI * PI, tol_scale));

    // table stability under tolerance halving
    let (halving_lags, halving_tol) = match level {
        VerifyLevel::Fast => (16u32, 1e-6),
        VerifyLevel::Full => (64u32, 1e-8),
    };
    let coarse = build_ti_table(&density, halving_lags, halving_tol)?;
    let fine = build_ti_table(&density, halving_lags, 0.5 * halving_tol)?;
    let mut worst = 0.0f64;
    for tau in 0..=halving_lags as usize {
        worst = worst.max((coarse.values[tau] - fine.values[tau]).abs() / fine.values[tau].abs());
    }
    out.push(check("ti-table halving stability", worst, 1e-6, tol_scale));

    // spline closed forms
    let rounds: Vec<u32> = (1..=16).collect();
    let k = gram(&KernelSpec::Spline, &rounds)?;
    let ki = k.try_inverse().expect("spline gram invertible");
    let (closed, _) = spline_closed_forms(16);
    let inv_diff = (&ki - &closed).abs().max();
    out.push(check("spline gram inverse", inv_diff, 1e-10, tol_scale));

    let mut numeric: Vec<f64> = ki.symmetric_eigenvalues().iter().cloned().collect();
    numeric.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (_, mut eigs) = spline_closed_forms(16);
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let eig_diff = numeric
        .iter()
        .zip(&eigs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    out.push(check("spline inverse eigenvalues", eig_diff, 1e-10, tol_scale));

    // effective dimension cap for the spline kernel
    let rounds: Vec<u32> = (1..=100).collect();
    let k100 = gram(&KernelSpec::Spline, &rounds)?;
    let deff = effective_dimension(&k100, 1.0).map_err(|e| VerifyError::Quadrature(e.to_string()))?;
    out.push(check("spline d_eff(1) <= pi T / 2", deff, PI * 50.0, tol_scale));

    // incremental gram state against the double sum
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(515);
    let mut state = GramState::new(KernelSpec::Spline, 1.0).map_err(LearnerError::from)?;
    let mut grads = Vec::new();
    for t in 1..=24u32 {
        let g: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        state.push(t, g.clone()).map_err(LearnerError::from)?;
        grads.push((t, g));
    }
    let direct = sum_norm_sq(&grads, &KernelSpec::Spline).map_err(LearnerError::from)?;
    out.push(check(
        "gram S^2 recursion",
        (state.s_sq - direct).abs() / direct.abs(),
        1e-9,
        tol_scale,
    ));

    // log-det inequality
    let (lhs, rhs) = logdet_sum_check(&grads[..16], &KernelSpec::Spline, 1.0)
        .map_err(|e| VerifyError::Quadrature(e.to_string()))?;
    out.push(check("logdet sum inequality", lhs, rhs, tol_scale));

    // flattened-reduction equivalence
    for (name, learner) in [
        ("dirac equivalence (pf)", EquivalenceLearner::Pf),
        ("dirac equivalence (ftrl)", EquivalenceLearner::Ftrl),
    ] {
        let r = dirac_equivalence(8, 2, 99, learner)?;
        out.push(check(name, r.max_play_deviation.max(r.regret_deviation), 1e-12, tol_scale));
    }

    // bump normalization and plateau
    let mut bump_err = 0.0f64;
    for m in [1u32, 2] {
        let est = adaptive_qk15(&|x| bump(m, x), -0.5, 0.5, 1e-13, 2000)
            .map_err(|e| VerifyError::Quadrature(format!("bump integral residual {:.1e}", e.error)))?;
        bump_err = bump_err.max((est.value - 1.0).abs());
        bump_err = bump_err.max((bump_b(10, m, 5.5) - 1.0).abs());
        bump_err = bump_err.max(bump_b(10, m, -0.25).abs());
    }
    out.push(check("bump normalization", bump_err, 1e-10, tol_scale));

    // sinc kernel absolute sum
    let mut sup_sum = 0.0f64;
    let mut t = -5.0;
    while t <= 45.0 {
        let s: f64 = (1..=40).map(|l| s_kernel(t - l as f64).abs()).sum();
        sup_sum = sup_sum.max(s);
        t += 1.0 / 32.0;
    }
    out.push(check("sinc absolute sum <= 4", sup_sum, 4.0, tol_scale));

    // interpolation residual and the L1 path bound on a plateau instance
    let interp = Interpolant::new(vec![vec![1.0]; 10], 1, 1.0 / 128.0)?;
    let report = check_discrete_pl(&interp)?;
    out.push(check("interpolation residual", report.interp_residual, 1e-8, tol_scale));
    out.push(check("plateau L1 path bound", report.l1_derivative, report.l1_bound, tol_scale));

    if level == VerifyLevel::Full {
        // c(T) cap and monotonicity for the horizon-free density
        let c10 = c_of_t_bound(&density, 10, 0.1)?;
        out.push(check("c(10) under polylog cap", c10, c_of_t_cap(10), tol_scale));
        let mut prev = 0.0;
        let mut max_drop = 0.0f64;
        for t_h in [5u32, 10, 20, 40] {
            let c = c_of_t_bound(&density, t_h, 1.0 / t_h as f64)?;
            max_drop = max_drop.max(prev - c);
            prev = c;
        }
        out.push(check("c(T) nondecreasing", max_drop, 1e-9, tol_scale));

        // random interpolant grid
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1212);
        let mut worst_ratio = 0.0f64;
        let mut worst_l2 = 0.0f64;
        for _ in 0..20 {
            let t_h = rng.gen_range(4..=12usize);
            let values: Vec<Vec<f64>> =
                (0..t_h).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect();
            let interp = Interpolant::new(values.clone(), 1, 1.0 / 256.0)?;
            let rep = check_discrete_pl(&interp)?;
            worst_ratio = worst_ratio.max(rep.l1_derivative / rep.l1_bound);
            let l2 = sinc_l2_derivative_sq(&values, 1.0 / 256.0, 512.0);
            worst_l2 = worst_l2.max(l2 / sinc_l2_squared_path_bound(&values));
        }
        out.push(check("plateau L1 bound (random grid)", worst_ratio, 1.0, tol_scale));
        out.push(check("sinc L2 squared-path bound", worst_l2, 1.0, tol_scale));
    }

    Ok(out)
}
