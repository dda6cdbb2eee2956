//! Online convex optimization with dynamic regret guarantees.
//!
//! The crate reduces dynamic-regret minimization against a comparator
//! sequence u_1, ..., u_T to static-regret minimization in a reproducing
//! kernel Hilbert space: on round t the learner forms an operator W_t and
//! plays w_t = W_t phi(t), where phi is the feature map of a kernel over
//! round indices. Everything is computed through kernel evaluations k(s, t),
//! so the feature map itself never materializes.
//!
//! Modules:
//! - [`kernels`]: Dirac, spline, Gaussian, and the horizon-free
//!   translation-invariant kernel (tabulated by Fourier quadrature).
//! - [`hilbert`]: span-representation linear algebra for Hilbert-Schmidt
//!   operators, including regularized inverses via the push-through identity.
//! - [`learners`]: kernelized FTRL, the parameter-free learner, the
//!   directional full-matrix learner, online Newton step, and the
//!   Vovk-Azoury-Warmuth forecaster.
//! - [`reduction`]: the online protocol driver plus gradient clipping and
//!   ball projection wrappers.
//! - [`environments`]: synthetic loss/comparator streams.
//! - [`analysis`]: regret metrics, path lengths, RKHS norms, effective
//!   dimension, and bound evaluation.
//! - [`verify`]: numerical verification of the interpolation constructions
//!   and the Dirac-kernel equivalence.

pub mod analysis;
pub mod environments;
pub mod hilbert;
pub mod kernels;
pub mod learners;
pub mod quad;
pub mod reduction;
pub mod verify;
