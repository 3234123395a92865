//! Numerical verification and exploration toolkit for variance and covariance
//! inequalities of maxima of correlated Gaussian vectors.
//!
//! The crate is organized around five pieces:
//!
//! - [`gaussian`]: correlation specs, Cholesky factorization, deterministic
//!   chunked sampling, the interpolated family `Σ(θ)`, and the coupled pair
//!   `(G_b, H_b)`;
//! - [`smoothmax`]: the log-sum-exp smooth max `Q_β`, softmax weights, their
//!   derivatives, the hard and reduced maxima, and the event indicators;
//! - [`estimators`]: Monte Carlo means/variances/covariances with standard
//!   errors, common-random-numbers pairing, and quadrature oracles;
//! - [`verifier`]: each identity, theorem, and lemma as an executable check
//!   producing a [`CheckReport`];
//! - [`explorer`]: stochastic search for counterexamples to the conjectured
//!   covariance sign over feasible correlation matrices.

pub mod error;
pub mod estimators;
pub mod explorer;
pub mod functional;
pub mod gaussian;
pub mod smoothmax;
pub mod verifier;

pub use error::{Error, Result};
pub use estimators::{Estimate, PairedEstimate};
pub use functional::Functional;
pub use gaussian::{CorrelationSpec, CoupledBatch, SampleBatch};
pub use verifier::{CheckReport, ParamValue, Target, Verdict};
