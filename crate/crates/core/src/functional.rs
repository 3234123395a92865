//! Named functionals of a Gaussian row, with analytic gradients where the
//! checks need them.
//!
//! Indices are 0-based.

use crate::error::{Error, Result};
use crate::smoothmax;

#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    /// Coordinate projection `x_i`.
    Coord(usize),
    /// Hard max `M_N`.
    HardMax,
    /// Reduced max `M'_N = max((x_0 + x_1)/2, x_2, ..)`.
    ReducedMax,
    /// Indicator of `A⁺` (rotated first pair beats the tail), as 0/1.
    IndicatorAPlus,
    /// Indicator of `A_1` (first coordinate is the strict max), as 0/1.
    IndicatorA1,
    /// Smooth max `Q_β`.
    QBeta(f64),
    /// `log S_N = β Q_β`.
    LogSumExp(f64),
    /// Softmax weight `p_i`.
    Softmax(usize, f64),
    /// Product `p_i p_j`.
    SoftmaxPair(usize, usize, f64),
    /// `‖x‖²`.
    SquaredNorm,
}

impl Functional {
    pub fn name(&self) -> String {
        match self {
            Functional::Coord(i) => format!("x{i}"),
            Functional::HardMax => "max".into(),
            Functional::ReducedMax => "reduced-max".into(),
            Functional::IndicatorAPlus => "ind-a-plus".into(),
            Functional::IndicatorA1 => "ind-a1".into(),
            Functional::QBeta(b) => format!("qbeta({b})"),
            Functional::LogSumExp(b) => format!("logs({b})"),
            Functional::Softmax(i, b) => format!("p{i}({b})"),
            Functional::SoftmaxPair(i, j, b) => format!("p{i}p{j}({b})"),
            Functional::SquaredNorm => "sqnorm".into(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Functional::Coord(i) => x[i],
            Functional::HardMax => smoothmax::hard_max(x).0,
            Functional::ReducedMax => smoothmax::reduced_max(x),
            Functional::IndicatorAPlus => smoothmax::indicator_a_plus(x) as u8 as f64,
            Functional::IndicatorA1 => smoothmax::indicator_a1(x) as u8 as f64,
            Functional::QBeta(beta) => smoothmax::eval(x, beta).q,
            Functional::LogSumExp(beta) => smoothmax::eval(x, beta).log_s,
            Functional::Softmax(i, beta) => smoothmax::eval(x, beta).p[i],
            Functional::SoftmaxPair(i, j, beta) => {
                let e = smoothmax::eval(x, beta);
                e.p[i] * e.p[j]
            }
            Functional::SquaredNorm => x.iter().map(|v| v * v).sum(),
        }
    }

    /// Analytic gradient, written into `out`. Errors with
    /// [`Error::UnsupportedFunctional`] for the non-smooth functionals.
    pub fn grad(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        debug_assert_eq!(x.len(), out.len());
        match *self {
            Functional::Coord(i) => {
                out.fill(0.0);
                out[i] = 1.0;
            }
            Functional::QBeta(beta) => {
                let e = smoothmax::eval(x, beta);
                out.copy_from_slice(&e.p);
            }
            Functional::LogSumExp(beta) => {
                let e = smoothmax::eval(x, beta);
                for (o, p) in out.iter_mut().zip(&e.p) {
                    *o = beta * p;
                }
            }
            Functional::Softmax(i, beta) => {
                // ∂p_i/∂x_k = β p_i (δ_ik - p_k)
                let e = smoothmax::eval(x, beta);
                let pi = e.p[i];
                for (k, (o, p)) in out.iter_mut().zip(&e.p).enumerate() {
                    let delta = if k == i { 1.0 } else { 0.0 };
                    *o = beta * pi * (delta - p);
                }
            }
            Functional::SoftmaxPair(i, j, beta) => {
                // ∂(p_i p_j)/∂x_k = β p_i p_j (δ_ik + δ_jk - 2 p_k)
                let e = smoothmax::eval(x, beta);
                let pij = e.p[i] * e.p[j];
                for (k, (o, p)) in out.iter_mut().zip(&e.p).enumerate() {
                    let di = if k == i { 1.0 } else { 0.0 };
                    let dj = if k == j { 1.0 } else { 0.0 };
                    *o = beta * pij * (di + dj - 2.0 * p);
                }
            }
            Functional::SquaredNorm => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = 2.0 * v;
                }
            }
            Functional::HardMax
            | Functional::ReducedMax
            | Functional::IndicatorAPlus
            | Functional::IndicatorA1 => {
                return Err(Error::UnsupportedFunctional(self.name()));
            }
        }
        Ok(())
    }

    pub fn has_gradient(&self) -> bool {
        !matches!(
            self,
            Functional::HardMax
                | Functional::ReducedMax
                | Functional::IndicatorAPlus
                | Functional::IndicatorA1
        )
    }
}
