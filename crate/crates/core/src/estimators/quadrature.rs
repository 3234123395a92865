//! Deterministic quadrature: fixed-order Gauss–Legendre on [0, 1], an
//! adaptive Simpson rule, and the order-statistic oracle for moments of the
//! maximum of i.i.d. standard normals.

use libm::erfc;

/// Default Gauss–Legendre order for the interpolation integrals over θ and b.
pub const DEFAULT_GL_ORDER: usize = 16;

/// Truncation for the single-max quadrature; the Gaussian tail beyond |x| = 10
/// contributes less than 1e-20.
const MAX_ORACLE_BOUND: f64 = 10.0;

/// Truncation for the sech² integral; the integrand decays like e^{-√2 w},
/// below 1e-20 past |w| = 40.
const SECH2_BOUND: f64 = 40.0;

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre_nodes(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // P_n(x) and P'_n(x) via the three-term recurrence.
    let legendre = |x: f64| {
        let mut p0 = 1.0;
        let mut p1 = x;
        for m in 2..=n {
            let mf = m as f64;
            let p2 = ((2.0 * mf - 1.0) * x * p1 - (mf - 1.0) * p0) / mf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    };
    for k in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(x);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(x);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Nodes and weights of the `order`-point rule mapped to [0, 1].
pub fn gauss_legendre_01_nodes(order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre_nodes(order);
    (
        x.iter().map(|v| 0.5 * (v + 1.0)).collect(),
        w.iter().map(|v| 0.5 * v).collect(),
    )
}

/// Fixed-order Gauss–Legendre integral of `f` over [0, 1].
pub fn gauss_legendre_01<F: FnMut(f64) -> f64>(mut f: F, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre_01_nodes(order);
    nodes.iter().zip(&weights).map(|(&x, &w)| w * f(x)).sum()
}

/// Adaptive Simpson integration to absolute tolerance `tol`.
///
/// The first levels always split regardless of the error estimate, so a
/// sharply localized integrand cannot hide between the coarse sample points
/// and fake agreement (order-statistic densities with high powers of Φ do
/// exactly that on the negative half-line).
pub fn adaptive_quadrature<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    const FORCED_LEVELS: u32 = 6;

    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        force: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || (force == 0 && delta.abs() <= 15.0 * tol) {
            return left + right + delta / 15.0;
        }
        let next_force = force.saturating_sub(1);
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, next_force)
            + recurse(
                f,
                m,
                b,
                fm,
                frm,
                fb,
                right,
                0.5 * tol,
                depth - 1,
                next_force,
            )
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48, FORCED_LEVELS)
}

/// First two moments of `M_N = max` of N i.i.d. standard normals, by adaptive
/// quadrature of the order-statistic density `N φ(x) Φ(x)^{N-1}` on [-10, 10].
pub fn max_moments_oracle(n_dim: usize) -> (f64, f64) {
    assert!(n_dim >= 1);
    let nf = n_dim as f64;
    let density = move |x: f64| nf * normal_pdf(x) * normal_cdf(x).powi(n_dim as i32 - 1);
    let m1 = adaptive_quadrature(
        &|x| x * density(x),
        -MAX_ORACLE_BOUND,
        MAX_ORACLE_BOUND,
        1e-11,
    );
    let m2 = adaptive_quadrature(
        &|x| x * x * density(x),
        -MAX_ORACLE_BOUND,
        MAX_ORACLE_BOUND,
        1e-11,
    );
    (m1, m2)
}

/// `Var(M_N)` for i.i.d. standard normals, independent of any Monte Carlo path.
pub fn var_max_oracle(n_dim: usize) -> f64 {
    let (m1, m2) = max_moments_oracle(n_dim);
    m2 - m1 * m1
}

/// The sech² integrand of the collapsing direction.
pub fn sech2_integrand(w: f64) -> f64 {
    let c = 2.0 * (w * std::f64::consts::FRAC_1_SQRT_2).cosh();
    1.0 / (c * c)
}

/// `∫ dw (2 cosh(w/√2))^{-2}`, which evaluates to 1/√2.
pub fn sech2_integral() -> f64 {
    adaptive_quadrature(&sech2_integrand, -SECH2_BOUND, SECH2_BOUND, 1e-10)
}
