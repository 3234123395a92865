//! The default theorem battery run by `theorem suite`.
//!
//! Points are curated to be statistically strict: every cell was sized so the
//! true value clears the 4-sigma confirmation band with margin, so a healthy
//! build exits 0. Boundary cases with true value 0 (lemma at c11 = 1, the
//! uniform-weight drift check) live in the test suites as not-fail assertions
//! instead.

use crate::error::Result;
use crate::functional::Functional;
use crate::gaussian::CorrelationSpec;
use crate::verifier::checks::*;
use crate::verifier::CheckReport;

/// Sample size for most suite cells.
const SUITE_N: u64 = 1_000_000;

pub fn default_suite(seed: u64) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();

    // Covariance sign for i.i.d. coordinates over the default grid. The
    // weakest cell (N=10, beta=0.5) gets a larger budget to clear 4 sigma.
    for &n_dim in &[3usize, 5, 10] {
        for &beta in &[0.5, 1.0, 2.0, 5.0] {
            let n = if n_dim == 10 && beta == 0.5 {
                8 * SUITE_N
            } else {
                SUITE_N
            };
            reports.extend(check_thm_iid(n_dim, beta, 0, 1, n, seed)?);
        }
    }

    // Variance monotonicity for the single-pair family.
    for &n_dim in &[3usize, 5, 10] {
        for &rho in &[0.1, 0.5, 0.9] {
            reports.extend(check_thm_rho(n_dim, rho, SUITE_N, seed, false)?);
        }
    }

    // Reduced-max covariance sign across the interpolation path.
    for &n_dim in &[3usize, 5, 10] {
        for &rho in &[0.1, 0.5, 0.9] {
            for &theta in &[0.0, 0.5, 1.0] {
                reports.push(check_reduced_max_cov(n_dim, rho, theta, SUITE_N, seed)?);
            }
        }
    }

    // Leader-event covariance, interior points (c11 = 1 is a true-zero boundary).
    for &n_dim in &[2usize, 3, 5] {
        for &c11 in &[0.25, 0.5] {
            reports.push(check_lemma_a1(n_dim, c11, SUITE_N, seed)?);
        }
    }

    // Drift-corrected inequality, strict cases.
    reports.push(check_harge(
        3,
        &Functional::SquaredNorm,
        &HargeWeight::Bump(vec![0.0, 0.0, 0.0]),
        SUITE_N,
        seed,
    )?);
    reports.push(check_harge(
        3,
        &Functional::QBeta(1.0),
        &HargeWeight::Bump(vec![1.0, 0.0, 0.0]),
        SUITE_N,
        seed,
    )?);

    // Slepian comparison, strict direction.
    let spec_bigger_max = CorrelationSpec::identity(3);
    let spec_smaller_max = CorrelationSpec::single_pair(3, 0.5)?;
    let u_grid: Vec<f64> = (0..11).map(|k| -2.0 + 0.5 * k as f64).collect();
    reports.extend(check_slepian(
        &spec_smaller_max,
        &spec_bigger_max,
        SUITE_N,
        seed,
        &u_grid,
    )?);

    // Odd/even cancellation.
    reports.push(check_bivariate_oddeven(0.0, 1.0, SUITE_N, seed)?);
    reports.push(check_bivariate_oddeven(0.7, 2.0, SUITE_N, seed)?);

    // Two-route identity checks.
    let identity3 = CorrelationSpec::identity(3);
    reports.push(check_cov_equality(
        &identity3,
        &Functional::Coord(0),
        &Functional::Coord(0),
        SUITE_N,
        16,
        seed,
    )?);
    reports.push(check_cov_equality(
        &identity3,
        &Functional::LogSumExp(1.0),
        &Functional::SoftmaxPair(0, 1, 1.0),
        SUITE_N,
        16,
        seed,
    )?);
    let y_half = CorrelationSpec::single_pair(3, 0.5)?;
    for &beta in &[1.0, 4.0] {
        reports.push(check_vardiff_identity(
            &identity3, &y_half, beta, SUITE_N, 16, seed,
        )?);
    }

    // Limit constant along the beta ladder.
    reports.push(check_i_constant(3, 0.5, 1.0, 4 * SUITE_N, seed)?);

    // Decreasing variance of the i.i.d. max.
    reports.extend(check_decreasing(10, SUITE_N / 2, seed)?);

    Ok(reports)
}
