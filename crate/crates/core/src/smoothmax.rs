//! The log-sum-exp smooth max and its calculus.
//!
//! `Q_β(x) = β⁻¹ log Σᵢ e^{βxᵢ}` approximates the hard max `M_N` with the
//! sandwich `M_N ≤ Q_β ≤ M_N + log(N)/β`. Everything is computed max-shifted
//! so that β up to the thousands stays finite.

/// One evaluation of the smooth max at a point.
#[derive(Debug, Clone)]
pub struct SmoothMaxEval {
    /// Inverse smoothing parameter.
    pub beta: f64,
    /// `log S_N = β Q_β`.
    pub log_s: f64,
    /// Smooth max value.
    pub q: f64,
    /// Softmax weights; nonnegative, summing to 1.
    pub p: Vec<f64>,
    /// Hard max `M_N`.
    pub max_value: f64,
    /// Lowest index attaining the hard max.
    pub argmax: usize,
}

/// Evaluates `Q_β`, `log S_N`, the softmax vector, and the hard max at `x`.
pub fn eval(x: &[f64], beta: f64) -> SmoothMaxEval {
    assert!(x.len() >= 2, "smooth max needs at least 2 coordinates");
    assert!(beta > 0.0, "beta must be positive");
    let (max_value, argmax) = hard_max(x);
    let mut p: Vec<f64> = x.iter().map(|&v| (beta * (v - max_value)).exp()).collect();
    let shifted_sum: f64 = p.iter().sum();
    for w in p.iter_mut() {
        *w /= shifted_sum;
    }
    let gap = shifted_sum.ln();
    SmoothMaxEval {
        beta,
        log_s: beta * max_value + gap,
        q: max_value + gap / beta,
        p,
        max_value,
        argmax,
    }
}

/// Gradient of `Q_β`: exactly the softmax vector.
pub fn grad_q(x: &[f64], beta: f64) -> Vec<f64> {
    eval(x, beta).p
}

/// Jacobian of the softmax: `∂p_i/∂x_j = β p_i (δ_ij - p_j)`, returned
/// row-major with rows indexed by `i`.
pub fn jac_p(x: &[f64], beta: f64) -> Vec<Vec<f64>> {
    let p = eval(x, beta).p;
    let n = p.len();
    let mut jac = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            jac[i][j] = beta * p[i] * (delta - p[j]);
        }
    }
    jac
}

/// Second derivatives of one softmax weight:
/// `∂²p_i/∂x_j∂x_k = β² p_i [(δ_ik - p_k)δ_ij - p_j(δ_ik + δ_jk - 2p_k)]`.
pub fn hess_p(x: &[f64], beta: f64, i: usize) -> Vec<Vec<f64>> {
    let p = eval(x, beta).p;
    let n = p.len();
    assert!(i < n, "index {i} out of range for dimension {n}");
    let b2pi = beta * beta * p[i];
    let mut hess = vec![vec![0.0; n]; n];
    for j in 0..n {
        let dij = if i == j { 1.0 } else { 0.0 };
        for k in 0..n {
            let dik = if i == k { 1.0 } else { 0.0 };
            let djk = if j == k { 1.0 } else { 0.0 };
            hess[j][k] = b2pi * ((dik - p[k]) * dij - p[j] * (dik + djk - 2.0 * p[k]));
        }
    }
    hess
}

/// Hard max with lowest-index tie-breaking.
pub fn hard_max(x: &[f64]) -> (f64, usize) {
    assert!(!x.is_empty());
    let mut best = x[0];
    let mut arg = 0;
    for (k, &v) in x.iter().enumerate().skip(1) {
        if v > best {
            best = v;
            arg = k;
        }
    }
    (best, arg)
}

/// The reduced max `M'_N = max((x_1 + x_2)/2, x_3, ..., x_N)`; for `N = 2` the
/// tail is empty and the value is just the average.
pub fn reduced_max(x: &[f64]) -> f64 {
    assert!(x.len() >= 2);
    let avg = 0.5 * (x[0] + x[1]);
    x[2..].iter().fold(avg, |a, &b| a.max(b))
}

/// Event `A⁺_{1,2}`: the rotated coordinate `(x_1 + x_2)/2` strictly exceeds
/// every remaining coordinate.
pub fn indicator_a_plus(x: &[f64]) -> bool {
    assert!(x.len() >= 3);
    let avg = 0.5 * (x[0] + x[1]);
    x[2..].iter().all(|&v| avg > v)
}

/// Event `A_1`: the first coordinate is the strict maximum.
pub fn indicator_a1(x: &[f64]) -> bool {
    assert!(x.len() >= 2);
    x[1..].iter().all(|&v| x[0] > v)
}
