//! Gram-representation linear algebra for Hilbert-Schmidt operators.
//!
//! Operators are stored as weighted sums of rank-one terms g (x) phi(r), so
//! every inner product reduces to kernel evaluations and W-space dot
//! products. Regularized inverses (c I + sum_s G_s G_s^*)^{-1} are applied
//! through the push-through identity: the infinite-dimensional solve becomes
//! an n x n symmetric positive-definite system.

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::kernels::{kernel_eval, KernelError, KernelSpec};

#[derive(Debug, Error)]
pub enum HilbertError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rounds must be pushed in strictly increasing order (got {got} after {last})")]
    NonMonotoneRound { got: u32, last: u32 },
    #[error("inner solve failed even with jitter")]
    SolverFailure,
}

/// One rank-one term `coeff * (vector (x) phi(round))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanTerm {
    pub round: u32,
    pub vector: Vec<f64>,
    pub coeff: f64,
}

/// An operator Theta = sum_j coeff_j (vector_j (x) phi(round_j)).
/// Duplicate rounds are allowed and never merged.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpanOperator {
    pub terms: Vec<SpanTerm>,
}

/// Euclidean inner product on W.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm on W.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl SpanOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rank_one(round: u32, vector: Vec<f64>) -> Self {
        Self { terms: vec![SpanTerm { round, vector, coeff: 1.0 }] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| SpanTerm { round: t.round, vector: t.vector.clone(), coeff: t.coeff * factor })
                .collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &SpanOperator, factor: f64) {
        for t in &other.terms {
            self.terms.push(SpanTerm {
                round: t.round,
                vector: t.vector.clone(),
                coeff: t.coeff * factor,
            });
        }
    }

    /// <self, other>_HS = sum_{i,j} c_i c_j <v_i, v_j> k(r_i, r_j).
    pub fn inner(&self, other: &SpanOperator, kernel: &KernelSpec) -> Result<f64, HilbertError> {
        let mut acc = 0.0;
        for a in &self.terms {
            for b in &other.terms {
                let kv = kernel_eval(kernel, a.round, b.round)?;
                if kv != 0.0 {
                    acc += a.coeff * b.coeff * kv * dot(&a.vector, &b.vector);
                }
            }
        }
        Ok(acc)
    }

    pub fn norm_sq(&self, kernel: &KernelSpec) -> Result<f64, HilbertError> {
        self.inner(self, kernel)
    }

    /// Merges terms sharing a round into a single term with coefficient 1.
    /// The lazy representation never merges on its own; norms of
    /// near-cancelling spans should consolidate first so the cancellation
    /// happens in W rather than in the quadratic form.
    pub fn consolidated(&self, dim: usize) -> SpanOperator {
        let mut by_round: std::collections::BTreeMap<u32, Vec<f64>> = std::collections::BTreeMap::new();
        for term in &self.terms {
            let entry = by_round.entry(term.round).or_insert_with(|| vec![0.0; dim]);
            for (e, v) in entry.iter_mut().zip(&term.vector) {
                *e += term.coeff * v;
            }
        }
        SpanOperator {
            terms: by_round
                .into_iter()
                .map(|(round, vector)| SpanTerm { round, vector, coeff: 1.0 })
                .collect(),
        }
    }

    /// Evaluation at round t: (sum_j c_j v_j (x) phi(r_j)) phi(t)
    /// = sum_j c_j k(r_j, t) v_j.
    pub fn apply_phi(&self, t: u32, dim: usize, kernel: &KernelSpec) -> Result<Vec<f64>, HilbertError> {
        let mut out = vec![0.0; dim];
        for term in &self.terms {
            let kv = kernel_eval(kernel, term.round, t)?;
            if kv != 0.0 {
                let w = term.coeff * kv;
                for (o, v) in out.iter_mut().zip(&term.vector) {
                    *o += w * v;
                }
            }
        }
        Ok(out)
    }
}

/// ||g (x) phi(t)||_HS = ||g|| sqrt(k(t,t)).
pub fn rank_one_norm(g: &[f64], k_tt: f64) -> Result<f64, HilbertError> {
    if k_tt < 0.0 {
        return Err(HilbertError::InvalidArgument(format!(
            "k(t,t) must be nonnegative (got {k_tt})"
        )));
    }
    Ok(norm(g) * k_tt.sqrt())
}

/// ||sum_s g_s (x) phi(s)||^2_HS = sum_{s,s'} k(s,s') <g_s, g_{s'}>.
pub fn sum_norm_sq(grads: &[(u32, Vec<f64>)], kernel: &KernelSpec) -> Result<f64, HilbertError> {
    let mut acc = 0.0;
    for (i, (ri, gi)) in grads.iter().enumerate() {
        acc += kernel_eval(kernel, *ri, *ri)? * dot(gi, gi);
        for (rj, gj) in grads.iter().take(i) {
            let kv = kernel_eval(kernel, *ri, *rj)?;
            if kv != 0.0 {
                acc += 2.0 * kv * dot(gi, gj);
            }
        }
    }
    Ok(acc)
}

/// Incrementally maintained scalars of the gradient span:
/// `s_sq = ||sum_s G_s||^2_HS` and `v = 4 G_0^2 + sum_s ||g_s||^2 k(s,s)`.
#[derive(Debug, Clone)]
pub struct GramState {
    pub kernel: KernelSpec,
    pub grads: Vec<(u32, Vec<f64>)>,
    pub s_sq: f64,
    pub v: f64,
    pub g0: f64,
}

impl GramState {
    pub fn new(kernel: KernelSpec, g0: f64) -> Result<Self, HilbertError> {
        if !(g0 > 0.0) {
            return Err(HilbertError::InvalidArgument(format!("G0 must be positive (got {g0})")));
        }
        Ok(Self { kernel, grads: Vec::new(), s_sq: 0.0, v: 4.0 * g0 * g0, g0 })
    }

    /// S_{t+1}^2 = S_t^2 + k(t,t)||g_t||^2 + 2 sum_{s<t} k(s,t) <g_t, g_s>,
    /// V_{t+1} = V_t + ||g_t||^2 k(t,t). Rounds must arrive in order.
    pub fn push(&mut self, t: u32, g: Vec<f64>) -> Result<(), HilbertError> {
        if let Some((last, _)) = self.grads.last() {
            if t <= *last {
                return Err(HilbertError::NonMonotoneRound { got: t, last: *last });
            }
        }
        let ktt = kernel_eval(&self.kernel, t, t)?;
        let gg = dot(&g, &g);
        let mut cross = 0.0;
        for (s, gs) in &self.grads {
            let kv = kernel_eval(&self.kernel, *s, t)?;
            if kv != 0.0 {
                cross += kv * dot(&g, gs);
            }
        }
        self.s_sq += ktt * gg + 2.0 * cross;
        self.v += gg * ktt;
        self.grads.push((t, g));
        Ok(())
    }

    /// theta(t) = sum_{s<t} k(s,t) g_s, the play direction numerator.
    pub fn weighted_grad_sum(&self, t: u32, dim: usize) -> Result<Vec<f64>, HilbertError> {
        let mut out = vec![0.0; dim];
        for (s, gs) in &self.grads {
            let kv = kernel_eval(&self.kernel, *s, t)?;
            if kv != 0.0 {
                for (o, g) in out.iter_mut().zip(gs) {
                    *o += kv * g;
                }
            }
        }
        Ok(out)
    }
}

fn ops_gram(
    ops: &[(u32, Vec<f64>)],
    kernel: &KernelSpec,
) -> Result<DMatrix<f64>, HilbertError> {
    let n = ops.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let kv = kernel_eval(kernel, ops[i].0, ops[j].0)?;
            let v = kv * dot(&ops[i].1, &ops[j].1);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

fn ops_cross(
    ops: &[(u32, Vec<f64>)],
    target: &SpanOperator,
    kernel: &KernelSpec,
) -> Result<DVector<f64>, HilbertError> {
    let mut b = DVector::zeros(ops.len());
    for (i, (ri, gi)) in ops.iter().enumerate() {
        let mut acc = 0.0;
        for term in &target.terms {
            let kv = kernel_eval(kernel, *ri, term.round)?;
            if kv != 0.0 {
                acc += term.coeff * kv * dot(gi, &term.vector);
            }
        }
        b[i] = acc;
    }
    Ok(b)
}

/// SPD solve with a diagonal jitter retry of 1e-12 * trace on factorization
/// failure (gram matrices assembled from quadrature can be marginally
/// indefinite).
fn spd_solve(mut a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>, HilbertError> {
    match Cholesky::new(a.clone()) {
        Some(ch) => Ok(ch.solve(b)),
        None => {
            let jitter = 1e-12 * a.trace().max(1e-300);
            for i in 0..a.nrows() {
                a[(i, i)] += jitter;
            }
            Cholesky::new(a).map(|ch| ch.solve(b)).ok_or(HilbertError::SolverFailure)
        }
    }
}

/// (c I + sum_s G_s G_s^*)^{-1} target in span representation, computed via
/// the push-through identity
/// `(1/c) (target - G (c I_n + G^* G)^{-1} G^* target)`,
/// where (G^* G)_{s s'} = <g_s, g_{s'}> k(s, s').
pub fn woodbury_solve(
    c: f64,
    ops: &[(u32, Vec<f64>)],
    target: &SpanOperator,
    kernel: &KernelSpec,
) -> Result<SpanOperator, HilbertError> {
    if !(c > 0.0) {
        return Err(HilbertError::InvalidArgument(format!("shift c must be positive (got {c})")));
    }
    if ops.is_empty() {
        return Ok(target.scaled(1.0 / c));
    }
    let mut inner = ops_gram(ops, kernel)?;
    for i in 0..ops.len() {
        inner[(i, i)] += c;
    }
    let b = ops_cross(ops, target, kernel)?;
    let y = spd_solve(inner, &b)?;
    let mut out = target.scaled(1.0 / c);
    for (i, (r, g)) in ops.iter().enumerate() {
        out.terms.push(SpanTerm { round: *r, vector: g.clone(), coeff: -y[i] / c });
    }
    Ok(out)
}

/// <probe, (c I + sum_s G_s G_s^*)^{-1} probe>_HS, nonnegative.
pub fn quad_form_inverse(
    c: f64,
    ops: &[(u32, Vec<f64>)],
    probe: &SpanOperator,
    kernel: &KernelSpec,
) -> Result<f64, HilbertError> {
    if !(c > 0.0) {
        return Err(HilbertError::InvalidArgument(format!("shift c must be positive (got {c})")));
    }
    let pp = probe.norm_sq(kernel)?;
    if ops.is_empty() {
        return Ok(pp / c);
    }
    let mut inner = ops_gram(ops, kernel)?;
    for i in 0..ops.len() {
        inner[(i, i)] += c;
    }
    let b = ops_cross(ops, probe, kernel)?;
    let y = spd_solve(inner, &b)?;
    let val = (pp - b.dot(&y)) / c;
    // exact arithmetic gives val >= 0; clamp roundoff
    Ok(val.max(0.0))
}

/// Cholesky factor of a symmetric positive-definite matrix that grows one
/// row per round. Appending costs O(n^2); the online learners use this to
/// keep their per-round inner solves incremental.
#[derive(Debug, Clone, Default)]
pub struct GrowingCholesky {
    // row-major lower triangle: row i holds i+1 entries
    rows: Vec<Vec<f64>>,
}

impl GrowingCholesky {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Appends the last row of the extended matrix: `row[i] = A[n, i]` for
    /// i = 0..=n where n is the current size.
    pub fn push_row(&mut self, row: &[f64]) -> Result<(), HilbertError> {
        let n = self.rows.len();
        if row.len() != n + 1 {
            return Err(HilbertError::InvalidArgument(format!(
                "expected row of length {} (got {})",
                n + 1,
                row.len()
            )));
        }
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut acc = row[i];
            for j in 0..i {
                acc -= self.rows[i][j] * w[j];
            }
            w[i] = acc / self.rows[i][i];
        }
        let mut d2 = row[n] - dot(&w, &w);
        if d2 <= 0.0 {
            // marginally indefinite extension; jitter once
            d2 += 1e-12 * row[n].abs().max(1.0);
            if d2 <= 0.0 {
                return Err(HilbertError::SolverFailure);
            }
        }
        w.push(d2.sqrt());
        self.rows.push(w);
        Ok(())
    }

    /// Solves A x = b for the factored matrix.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, HilbertError> {
        let n = self.rows.len();
        if b.len() != n {
            return Err(HilbertError::InvalidArgument(format!(
                "rhs length {} does not match size {n}",
                b.len()
            )));
        }
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.rows[i][j] * y[j];
            }
            y[i] = acc / self.rows[i][i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= self.rows[j][i] * x[j];
            }
            x[i] = acc / self.rows[i][i];
        }
        Ok(x)
    }
}

/// Applies (c I + sum_s G_s G_s^*) to X in span representation:
/// c X + sum_s <G_s, X>_HS G_s. Used by the solve-residual diagnostics.
pub fn apply_regularized_covariance(
    c: f64,
    ops: &[(u32, Vec<f64>)],
    x: &SpanOperator,
    kernel: &KernelSpec,
) -> Result<SpanOperator, HilbertError> {
    let mut out = x.scaled(c);
    for (r, g) in ops {
        let gs = SpanOperator::rank_one(*r, g.clone());
        let w = gs.inner(x, kernel)?;
        out.terms.push(SpanTerm { round: *r, vector: g.clone(), coeff: w });
    }
    Ok(out)
}
