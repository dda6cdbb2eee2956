//! Reproducing kernels over integer round indices.
//!
//! Four kernels are supported: the Dirac kernel (one feature per round), the
//! linear spline kernel min(s,t), a Gaussian control kernel, and the
//! horizon-free translation-invariant kernel defined through the Fourier
//! transform of its spectral density Q. The translation-invariant kernel has
//! no closed form, so its values at integer lags are tabulated once by
//! numerical quadrature and then looked up.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::quad::{adaptive_qk15, wynn_epsilon};

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("invalid kernel parameter: {0}")]
    InvalidParameter(String),
    #[error("lag {lag} exceeds tabulated range {t_max}")]
    LagOutOfRange { lag: u32, t_max: u32 },
    #[error("quadrature failed to converge at lag {lag}: residual {residual:.3e}")]
    QuadratureNonConvergence { lag: u32, residual: f64 },
}

/// Spectral density family
/// `Q(w) = a * (s/2 * loglog(pi)) / (|w| (1+(|w|/2pi)^{2m})^{s/2m}
///          log(pi+|w|^{-s}) log^2 log(pi+|w|^{-s}))`.
///
/// The horizon-free kernel uses s = 1/2, m = 1, a = 1. The amplitude `a`
/// scales Q linearly and exists so the mass-linearity diagnostics can probe
/// scaled densities.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub s_exponent: f64,
    pub m: u32,
    pub amplitude: f64,
}

#[inline]
fn log_log_pi() -> f64 {
    PI.ln().ln()
}

impl SpectralDensity {
    pub fn new(s_exponent: f64, m: u32, amplitude: f64) -> Result<Self, KernelError> {
        if !(s_exponent > 0.0) || !(amplitude > 0.0) || m < 1 {
            return Err(KernelError::InvalidParameter(format!(
                "spectral density needs s > 0, m >= 1, amplitude > 0 (got s={s_exponent}, m={m}, a={amplitude})"
            )));
        }
        if s_exponent >= 2.0 * m as f64 {
            return Err(KernelError::InvalidParameter(format!(
                "spectral density needs s < 2m (got s={s_exponent}, m={m})"
            )));
        }
        Ok(Self { s_exponent, m, amplitude })
    }

    /// The density of the horizon-free kernel.
    pub fn horizon_free() -> Self {
        Self { s_exponent: 0.5, m: 1, amplitude: 1.0 }
    }

    fn is_paper_exponents(&self) -> bool {
        self.s_exponent == 0.5 && self.m == 1
    }

    /// |w|^{-s}
    fn w_pow_neg_s(&self, w: f64) -> f64 {
        if self.is_paper_exponents() {
            1.0 / w.sqrt()
        } else {
            w.powf(-self.s_exponent)
        }
    }

    /// (1 + (w/2pi)^{2m})^{p} for p in {s/2m, (2m-s)/2m}
    fn shape_pow(&self, w: f64, p: f64) -> f64 {
        let z = w / (2.0 * PI);
        let base = 1.0 + if self.m == 1 { z * z } else { z.powi(2 * self.m as i32) };
        if self.is_paper_exponents() && p == 0.25 {
            base.sqrt().sqrt()
        } else {
            base.powf(p)
        }
    }

    /// Q(w) for w != 0.
    pub fn q(&self, w: f64) -> f64 {
        let w = w.abs();
        let g = (PI + self.w_pow_neg_s(w)).ln();
        let h = g.ln();
        let p = self.s_exponent / (2.0 * self.m as f64);
        self.amplitude * (0.5 * self.s_exponent * log_log_pi())
            / (w * self.shape_pow(w, p) * g * h * h)
    }

    /// R(x) = 2pi / (x (1+(x/2pi)^{2m}) Q(x)), in the cancellation-free form
    /// `C0 log(pi+x^{-s}) log^2 log(pi+x^{-s}) / (1+(x/2pi)^{2m})^{(2m-s)/2m}`.
    pub fn r(&self, x: f64) -> f64 {
        let x = x.abs();
        let g = (PI + self.w_pow_neg_s(x)).ln();
        let h = g.ln();
        let c0 = 4.0 * PI / (self.s_exponent * log_log_pi() * self.amplitude);
        let p = (2.0 * self.m as f64 - self.s_exponent) / (2.0 * self.m as f64);
        c0 * g * h * h / self.shape_pow(x, p)
    }

    /// Substitution v = S(w) with S(w) = loglog(pi) / (2 loglog(pi + w^{-s})).
    /// S maps (0, inf) onto (0, 1/2) and S' absorbs the singular factor of Q,
    /// so the head integral becomes an integral of a bounded C^1 function.
    fn s_of(&self, w: f64) -> f64 {
        0.5 * log_log_pi() / (PI + self.w_pow_neg_s(w)).ln().ln()
    }

    /// Inverse of the substitution: w(v) = (exp(exp(loglog(pi)/2v)) - pi)^{-1/s}.
    /// Returns 0 when w underflows (the integrand limit there is `amplitude`).
    fn omega_of(&self, v: f64) -> f64 {
        let e = 0.5 * log_log_pi() / v;
        if e > 700.0 {
            return 0.0;
        }
        let ee = e.exp();
        if ee > 700.0 {
            return 0.0;
        }
        (ee.exp() - PI).powf(-1.0 / self.s_exponent)
    }

    /// Q(w(v)) * dw/dv, the bounded head integrand factor; tends to
    /// `amplitude` as v -> 0+.
    fn head_factor(&self, v: f64) -> (f64, f64) {
        let w = self.omega_of(v);
        if w == 0.0 {
            return (self.amplitude, 0.0);
        }
        let p = self.s_exponent / (2.0 * self.m as f64);
        let num = 1.0 + PI * w.powf(self.s_exponent);
        (self.amplitude * num / self.shape_pow(w, p), w)
    }
}

/// Tabulated values of the translation-invariant kernel at integer lags.
#[derive(Debug, Clone)]
pub struct TiKernelTable {
    pub values: Vec<f64>,
    pub quad_tol: f64,
    pub density: SpectralDensity,
}

impl TiKernelTable {
    pub fn t_max(&self) -> u32 {
        (self.values.len() - 1) as u32
    }
}

/// A kernel over round indices 1, 2, 3, ...
#[derive(Debug, Clone)]
pub enum KernelSpec {
    Dirac,
    Spline,
    Gaussian { bandwidth: f64 },
    TranslationInvariant { table: Arc<TiKernelTable> },
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<Self, KernelError> {
        if !(bandwidth > 0.0) {
            return Err(KernelError::InvalidParameter(format!(
                "gaussian bandwidth must be positive (got {bandwidth})"
            )));
        }
        Ok(KernelSpec::Gaussian { bandwidth })
    }

    /// Builds the horizon-free kernel of the given lag range.
    pub fn horizon_free(t_max: u32, quad_tol: f64) -> Result<Self, KernelError> {
        let table = build_ti_table(&SpectralDensity::horizon_free(), t_max, quad_tol)?;
        Ok(KernelSpec::TranslationInvariant { table: Arc::new(table) })
    }

    pub fn translation_invariant(
        density: &SpectralDensity,
        t_max: u32,
        quad_tol: f64,
    ) -> Result<Self, KernelError> {
        let table = build_ti_table(density, t_max, quad_tol)?;
        Ok(KernelSpec::TranslationInvariant { table: Arc::new(table) })
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Dirac => "dirac",
            KernelSpec::Spline => "spline",
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::TranslationInvariant { .. } => "horizon_free",
        }
    }

    /// k(t, t); for the spline kernel this grows with t.
    pub fn diag(&self, t: u32) -> f64 {
        match self {
            KernelSpec::Dirac => 1.0,
            KernelSpec::Spline => t as f64,
            KernelSpec::Gaussian { .. } => 1.0,
            KernelSpec::TranslationInvariant { table } => table.values[0],
        }
    }

    /// max_t k(t, t) over rounds 1..=horizon.
    pub fn diag_max(&self, horizon: u32) -> f64 {
        match self {
            KernelSpec::Spline => horizon as f64,
            _ => self.diag(1),
        }
    }
}

/// k(s, t) over integer rounds. Symmetric in its arguments; translation
/// invariant kernels look up |s-t| in the table and refuse lags beyond it.
pub fn kernel_eval(spec: &KernelSpec, s: u32, t: u32) -> Result<f64, KernelError> {
    match spec {
        KernelSpec::Dirac => Ok(if s == t { 1.0 } else { 0.0 }),
        KernelSpec::Spline => Ok(s.min(t) as f64),
        KernelSpec::Gaussian { bandwidth } => {
            let d = s as f64 - t as f64;
            Ok((-0.5 * d * d / (bandwidth * bandwidth)).exp())
        }
        KernelSpec::TranslationInvariant { table } => {
            let lag = s.abs_diff(t);
            if lag > table.t_max() {
                return Err(KernelError::LagOutOfRange { lag, t_max: table.t_max() });
            }
            Ok(table.values[lag as usize])
        }
    }
}

/// Gram matrix over a strictly increasing set of rounds.
pub fn gram(spec: &KernelSpec, rounds: &[u32]) -> Result<DMatrix<f64>, KernelError> {
    if rounds.is_empty() {
        return Err(KernelError::InvalidParameter("rounds must be nonempty".into()));
    }
    if rounds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(KernelError::InvalidParameter("rounds must be strictly increasing".into()));
    }
    let n = rounds.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel_eval(spec, rounds[i], rounds[j])?;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// integral of Q over the real line, to `quad_tol` relative error
/// (validated by tolerance halving).
pub fn density_mass(density: &SpectralDensity, quad_tol: f64) -> Result<f64, KernelError> {
    check_quad_tol(quad_tol)?;
    let coarse = ti_lag_value(density, 0, quad_tol, 1.0)?;
    let fine = ti_lag_value(density, 0, 0.5 * quad_tol, 1.0)?;
    let resid = (coarse - fine).abs() / fine.abs().max(1e-300);
    if resid > quad_tol {
        return Err(KernelError::QuadratureNonConvergence { lag: 0, residual: resid });
    }
    Ok(fine)
}

fn check_quad_tol(quad_tol: f64) -> Result<(), KernelError> {
    if !(quad_tol > 0.0 && quad_tol <= 1e-2) {
        return Err(KernelError::InvalidParameter(format!(
            "quad_tol must lie in (0, 1e-2] (got {quad_tol})"
        )));
    }
    Ok(())
}

/// Tabulates k(tau) = 2 int_0^inf Q(w) cos(2 pi w tau) dw for tau = 0..=t_max.
///
/// Each integral is evaluated at quad_tol and quad_tol/2 and the pair must
/// agree to quad_tol relative error; the finer value is stored.
pub fn build_ti_table(
    density: &SpectralDensity,
    t_max: u32,
    quad_tol: f64,
) -> Result<TiKernelTable, KernelError> {
    check_quad_tol(quad_tol)?;
    // k(0) sets the absolute scale for the per-part budgets of later lags
    let k0 = ti_lag_value(density, 0, 0.5 * quad_tol, 1.0)?;
    let scale = k0.abs().max(1.0);
    let mut values = Vec::with_capacity(t_max as usize + 1);
    let mut worst = (0u32, 0.0f64);
    for tau in 0..=t_max {
        let coarse = ti_lag_value(density, tau, quad_tol, scale)?;
        let fine = ti_lag_value(density, tau, 0.5 * quad_tol, scale)?;
        let resid = (coarse - fine).abs() / fine.abs().max(1e-3 * scale);
        if resid > worst.1 {
            worst = (tau, resid);
        }
        if resid > quad_tol {
            return Err(KernelError::QuadratureNonConvergence { lag: tau, residual: resid });
        }
        values.push(fine);
    }
    let _ = worst;
    Ok(TiKernelTable { values, quad_tol, density: density.clone() })
}

/// One lag of the cosine transform, split into three regions:
///  - head (0, w0]: substitution v = S(w) tames the |w|^{-1} log singularity,
///    leaving a bounded integrand on a finite interval;
///  - mid [w0, 1]: panels cut at the zeros of cos(2 pi w tau);
///  - tail [1, inf): for tau = 0 the substitution w = y^{-2} compactifies the
///    range; for tau >= 1 the half-period sums form an alternating series
///    accelerated with Wynn's epsilon algorithm.
fn ti_lag_value(
    density: &SpectralDensity,
    tau: u32,
    tol: f64,
    scale: f64,
) -> Result<f64, KernelError> {
    let part_tol = 3e-3 * tol * scale;
    let tau_f = tau as f64;
    let w0 = if tau == 0 { 1.0 } else { 1.0 / (4.0 * tau_f + 1.0) };

    // head
    let head_f = |v: f64| {
        let (factor, w) = density.head_factor(v);
        factor * (2.0 * PI * w * tau_f).cos()
    };
    let head = adaptive_qk15(&head_f, 0.0, density.s_of(w0), part_tol, 4000)
        .map_err(|e| KernelError::QuadratureNonConvergence { lag: tau, residual: e.error })?
        .value;

    // mid
    let mut mid = 0.0;
    if tau >= 1 {
        let qcos = |w: f64| density.q(w) * (2.0 * PI * w * tau_f).cos();
        // zeros of cos(2 pi w tau) at (2j+1)/(4 tau)
        let mut a = w0;
        let mut j = 0u64;
        let mut acc = 0.0;
        let mut acc_err = 0.0;
        loop {
            let z = (2.0 * j as f64 + 1.0) / (4.0 * tau_f);
            if z <= a + f64::EPSILON {
                j += 1;
                continue;
            }
            let b = z.min(1.0);
            let est = adaptive_qk15(&qcos, a, b, part_tol / (4.0 * tau_f + 4.0), 200)
                .map_err(|e| KernelError::QuadratureNonConvergence { lag: tau, residual: e.error })?;
            acc += est.value;
            acc_err += est.error;
            if b >= 1.0 {
                break;
            }
            a = b;
            j += 1;
        }
        if acc_err > part_tol {
            return Err(KernelError::QuadratureNonConvergence { lag: tau, residual: acc_err });
        }
        mid = acc;
    }

    // tail
    let tail = if tau == 0 {
        // w = y^{-2}: int_1^inf Q dw = int_0^1 2 Q(y^{-2}) y^{-3} dy
        let g = |y: f64| 2.0 * density.q(1.0 / (y * y)) / (y * y * y);
        adaptive_qk15(&g, 0.0, 1.0, part_tol, 4000)
            .map_err(|e| KernelError::QuadratureNonConvergence { lag: tau, residual: e.error })?
            .value
    } else {
        let qcos = |w: f64| density.q(w) * (2.0 * PI * w * tau_f).cos();
        // half-period terms from the first cosine zero at or beyond w = 1
        let mut partial = Vec::with_capacity(64);
        let mut sum = 0.0;
        let mut a = 1.0;
        let mut j = 2 * tau as u64; // (2j+1)/(4 tau) >= 1
        let mut quad_err = 0.0;
        let mut tail_est = (0.0, f64::INFINITY);
        let max_terms = 288;
        while partial.len() < max_terms {
            for _ in 0..16 {
                let b = (2.0 * j as f64 + 1.0) / (4.0 * tau_f);
                let est = adaptive_qk15(&qcos, a, b, part_tol / 256.0, 60)
                    .map_err(|e| KernelError::QuadratureNonConvergence {
                        lag: tau,
                        residual: e.error,
                    })?;
                sum += est.value;
                quad_err += est.error;
                partial.push(sum);
                a = b;
                j += 1;
            }
            tail_est = wynn_epsilon(&partial);
            if partial.len() >= 32 && tail_est.1 + quad_err < part_tol {
                break;
            }
        }
        if tail_est.1 + quad_err >= part_tol {
            return Err(KernelError::QuadratureNonConvergence {
                lag: tau,
                residual: tail_est.1 + quad_err,
            });
        }
        tail_est.0
    };

    Ok(2.0 * (head + mid + tail))
}
