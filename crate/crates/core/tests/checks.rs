//! Integration tests for the verifier checks: the documented example points
//! of every check, the error paths, and determinism of the reports.

use gaussmax::error::Error;
use gaussmax::functional::Functional;
use gaussmax::gaussian::CorrelationSpec;
use gaussmax::verifier::{self, HargeWeight, ParamValue, Verdict};

const N_FAST: u64 = 200_000;

fn param_f64(report: &gaussmax::CheckReport, key: &str) -> f64 {
    match &report.params[key] {
        ParamValue::Float(v) => *v,
        ParamValue::Int(v) => *v as f64,
        other => panic!("param {key} not numeric: {other:?}"),
    }
}

#[test]
fn cov_equality_linear_functionals() {
    // f = g = x_0 on the identity: both routes estimate Cov(G_0, G_0) = 1.
    let spec = CorrelationSpec::identity(2);
    let report = verifier::check_cov_equality(
        &spec,
        &Functional::Coord(0),
        &Functional::Coord(0),
        N_FAST,
        16,
        7,
    )
    .unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    assert!((param_f64(&report, "lhs") - 1.0).abs() < 0.02);
    assert!((param_f64(&report, "rhs") - 1.0).abs() < 0.02);

    // Cross terms pick up sigma_01 exactly on the right side.
    let spec = CorrelationSpec::single_pair(2, 0.5).unwrap();
    let report = verifier::check_cov_equality(
        &spec,
        &Functional::Coord(0),
        &Functional::Coord(1),
        N_FAST,
        16,
        8,
    )
    .unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    assert!((param_f64(&report, "lhs") - 0.5).abs() < 0.02);
    assert!((param_f64(&report, "rhs") - 0.5).abs() < 0.02);
}

#[test]
fn cov_equality_smooth_max_functionals() {
    let spec = CorrelationSpec::identity(3);
    let report = verifier::check_cov_equality(
        &spec,
        &Functional::LogSumExp(1.0),
        &Functional::SoftmaxPair(0, 1, 1.0),
        400_000,
        16,
        9,
    )
    .unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    // Both routes land near the quadrature value -0.00506 for this case.
    assert!(param_f64(&report, "lhs") < 0.0);
    assert!(param_f64(&report, "rhs") < 0.0);
}

#[test]
fn cov_equality_rejects_gradient_free_functionals() {
    let spec = CorrelationSpec::identity(3);
    let err = verifier::check_cov_equality(
        &spec,
        &Functional::HardMax,
        &Functional::Coord(0),
        1_000,
        4,
        1,
    )
    .unwrap_err();
    assert!(matches!(err, Error::UnsupportedFunctional(_)));
}

#[test]
fn vardiff_identity_equal_specs_is_null() {
    let spec = CorrelationSpec::single_pair(3, 0.4).unwrap();
    let report = verifier::check_vardiff_identity(&spec, &spec, 1.0, N_FAST, 8, 11).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    assert_eq!(param_f64(&report, "lhs"), 0.0);
    assert!(param_f64(&report, "rhs").abs() < 1e-12);
}

#[test]
fn vardiff_identity_two_routes_agree() {
    let x = CorrelationSpec::identity(3);
    let y = CorrelationSpec::single_pair(3, 0.5).unwrap();
    for (beta, seed) in [(1.0, 12u64), (4.0, 13u64)] {
        let report = verifier::check_vardiff_identity(&x, &y, beta, 400_000, 16, seed).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "beta={beta}: {report:?}");
        // Both routes see a strictly positive variance difference here.
        assert!(param_f64(&report, "lhs") > 0.0);
        assert!(param_f64(&report, "rhs") > 0.0);
    }
}

#[test]
fn vardiff_identity_bivariate() {
    let x = CorrelationSpec::identity(2);
    let y = CorrelationSpec::single_pair(2, 0.5).unwrap();
    let report = verifier::check_vardiff_identity(&x, &y, 1.0, 400_000, 16, 50).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
}

#[test]
fn thm_rho_continuity_at_small_rho() {
    // As rho -> 0 the variance difference vanishes continuously. Common
    // random numbers resolve even this tiny difference, so the estimate is a
    // small positive number rather than statistical zero.
    let reports = verifier::check_thm_rho(3, 0.01, 1_000_000, 51, false).unwrap();
    let small = reports[0].estimate;
    assert!(small.abs() < 5e-3, "not small: {small}");
    let reports = verifier::check_thm_rho(3, 0.5, 1_000_000, 52, false).unwrap();
    assert!(
        small < reports[0].estimate / 10.0,
        "difference did not shrink with rho: {small} vs {}",
        reports[0].estimate
    );
}

#[test]
fn vardiff_identity_dim_mismatch() {
    let x = CorrelationSpec::identity(3);
    let y = CorrelationSpec::identity(4);
    assert!(matches!(
        verifier::check_vardiff_identity(&x, &y, 1.0, 1_000, 4, 1).unwrap_err(),
        Error::DimMismatch { .. }
    ));
}

#[test]
fn thm_iid_sign_and_corollary() {
    let reports = verifier::check_thm_iid(3, 1.0, 0, 1, N_FAST, 14).unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0].check_id, "thm-iid");
    assert_eq!(reports[0].verdict, Verdict::Pass, "{:?}", reports[0]);
    assert!(reports[0].estimate < 0.0);
    assert_eq!(reports[1].check_id, "thm-iid-corollary");
    assert_eq!(reports[1].verdict, Verdict::Pass, "{:?}", reports[1]);
}

#[test]
fn thm_iid_permutation_symmetry() {
    // Exchangeable coordinates: pairs (0,1) and (1,2) estimate the same value.
    let a = &verifier::check_thm_iid(3, 1.0, 0, 1, 400_000, 15).unwrap()[0];
    let b = &verifier::check_thm_iid(3, 1.0, 1, 2, 400_000, 16).unwrap()[0];
    let combined = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!(
        (a.estimate - b.estimate).abs() <= 4.0 * combined,
        "{} vs {}",
        a.estimate,
        b.estimate
    );
}

#[test]
fn thm_iid_rejects_bad_pairs() {
    assert!(matches!(
        verifier::check_thm_iid(3, 1.0, 1, 1, 1_000, 1).unwrap_err(),
        Error::IndexError { .. }
    ));
    assert!(matches!(
        verifier::check_thm_iid(3, -1.0, 0, 1, 1_000, 1).unwrap_err(),
        Error::InvalidParam(_)
    ));
}

#[test]
fn bivariate_iid_any_correlation() {
    for (rho, seed) in [(-0.5, 17u64), (0.0, 18), (0.7, 19)] {
        let report = verifier::check_bivariate_iid(rho, 1.0, 400_000, seed).unwrap();
        assert_ne!(report.verdict, Verdict::Fail, "rho={rho}: {report:?}");
    }
}

#[test]
fn thm_rho_bivariate_closed_form() {
    // Remark: Var(M_2(Y)) - Var(M_2(X)) = rho/pi.
    let reports = verifier::check_thm_rho(2, 0.5, 1_000_000, 20, false).unwrap();
    let sign = &reports[0];
    let expected = 0.5 / std::f64::consts::PI;
    assert!(
        (sign.estimate - expected).abs() <= 4.0 * sign.std_error,
        "{} vs {expected}",
        sign.estimate
    );
    assert_eq!(sign.verdict, Verdict::Pass);
}

#[test]
fn thm_rho_trivariate_with_limit_route() {
    let reports = verifier::check_thm_rho(3, 0.5, 1_000_000, 21, true).unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0].check_id, "thm-rho");
    assert_eq!(reports[0].verdict, Verdict::Pass, "{:?}", reports[0]);
    assert_eq!(reports[1].check_id, "thm-rho-limit");
    assert_eq!(reports[1].verdict, Verdict::Pass, "{:?}", reports[1]);
    // The limit route reproduces the sign route's positive difference.
    assert!(param_f64(&reports[1], "rhs") > 0.0);
}

#[test]
fn thm_rho_rejects_out_of_range() {
    for rho in [0.0, 1.0, -0.3, 1.7] {
        assert!(matches!(
            verifier::check_thm_rho(3, rho, 1_000, 1, false).unwrap_err(),
            Error::RhoOutOfRange { .. }
        ));
    }
}

#[test]
fn i_constant_closed_forms_and_ladder() {
    let report = verifier::check_i_constant(3, 0.5, 1.0, 1_000_000, 22).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    let i_expected = 1.0 / (2.0 * (std::f64::consts::PI * 0.5).sqrt());
    assert!((param_f64(&report, "i_closed_form") - i_expected).abs() < 1e-12);

    // rho = 0 gives I = 1/(2 sqrt(pi)) regardless of theta.
    let report = verifier::check_i_constant(3, 0.0, 0.7, 400_000, 23).unwrap();
    let i_expected = 1.0 / (2.0 * std::f64::consts::PI.sqrt());
    assert!((param_f64(&report, "i_closed_form") - i_expected).abs() < 1e-12);
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
}

#[test]
fn reduced_max_cov_sign_points() {
    for (n_dim, rho, theta, seed) in [
        (3usize, 0.5, 0.5, 24u64),
        (3, 0.5, 0.0, 25),
        (5, 0.9, 1.0, 26),
    ] {
        let report = verifier::check_reduced_max_cov(n_dim, rho, theta, 400_000, seed).unwrap();
        assert_eq!(
            report.verdict,
            Verdict::Pass,
            "N={n_dim} rho={rho} theta={theta}: {report:?}"
        );
    }
    assert!(verifier::check_reduced_max_cov(2, 0.5, 0.5, 1_000, 1).is_err());
}

#[test]
fn lemma_a1_interior_and_boundary() {
    for (n_dim, c11, seed) in [(3usize, 0.25, 27u64), (2, 0.5, 28), (5, 0.5, 29)] {
        let report = verifier::check_lemma_a1(n_dim, c11, 400_000, seed).unwrap();
        assert_eq!(
            report.verdict,
            Verdict::Pass,
            "N={n_dim} c11={c11}: {report:?}"
        );
    }
    // c11 = 1 restores exchangeability: the covariance is exactly zero, so
    // the verdict may be indeterminate but must not be a violation.
    let report = verifier::check_lemma_a1(3, 1.0, 400_000, 30).unwrap();
    assert_ne!(report.verdict, Verdict::Fail, "{report:?}");
    assert!(verifier::check_lemma_a1(3, 0.0, 1_000, 1).is_err());
    assert!(verifier::check_lemma_a1(3, 1.5, 1_000, 1).is_err());
}

#[test]
fn decreasing_variance_reports() {
    let reports = verifier::check_decreasing(6, N_FAST, 31).unwrap();
    // Three report kinds per N in 2..=6.
    assert_eq!(reports.len(), 15);
    for report in &reports {
        match report.check_id.as_str() {
            "var-decreasing" => {
                assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
                assert!(report.estimate > 1e-9);
            }
            "var-max-mc" => assert_eq!(report.verdict, Verdict::Pass, "{report:?}"),
            "var-ratio-2logn" => {
                assert_eq!(report.verdict, Verdict::Pass);
                assert!(report.estimate > 0.9 && report.estimate < 2.0);
            }
            other => panic!("unexpected id {other}"),
        }
    }
}

#[test]
fn slepian_strict_direction_and_null() {
    let grid: Vec<f64> = (0..11).map(|k| -2.0 + 0.5 * k as f64).collect();
    let smaller_max = CorrelationSpec::single_pair(3, 0.5).unwrap();
    let bigger_max = CorrelationSpec::identity(3);
    let reports = verifier::check_slepian(&smaller_max, &bigger_max, 400_000, 32, &grid).unwrap();
    assert_eq!(reports[0].check_id, "slepian-mean");
    assert_eq!(reports[0].verdict, Verdict::Pass, "{:?}", reports[0]);
    assert_eq!(reports[1].check_id, "slepian-survival");
    assert_eq!(reports[1].verdict, Verdict::Pass, "{:?}", reports[1]);

    // Identical specs share the noise, so every difference is exactly zero.
    let reports = verifier::check_slepian(&bigger_max, &bigger_max, N_FAST, 33, &grid).unwrap();
    assert_eq!(reports[0].estimate, 0.0);
    assert_eq!(reports[0].std_error, 0.0);
    assert_ne!(reports[0].verdict, Verdict::Fail);
    assert_eq!(reports[1].verdict, Verdict::Pass);

    // Wrong orientation is rejected up front.
    assert!(matches!(
        verifier::check_slepian(&bigger_max, &smaller_max, 1_000, 1, &grid).unwrap_err(),
        Error::AssumptionViolated(_)
    ));
}

#[test]
fn slepian_bivariate_mean_oracle() {
    // E[M_2] = sqrt((1 - sigma_01)/pi); the paired mean difference matches the
    // oracle difference.
    let x = CorrelationSpec::single_pair(2, 0.5).unwrap();
    let y = CorrelationSpec::identity(2);
    let grid = [-1.0, 0.0, 1.0];
    let reports = verifier::check_slepian(&x, &y, 1_000_000, 34, &grid).unwrap();
    let mean = &reports[0];
    let oracle = (1.0f64 / std::f64::consts::PI).sqrt() - (0.5f64 / std::f64::consts::PI).sqrt();
    assert!(
        (mean.estimate - oracle).abs() <= 4.0 * mean.std_error,
        "{} vs {oracle}",
        mean.estimate
    );
}

#[test]
fn harge_three_cases() {
    // g = 1: the drift term vanishes and the inequality is an equality.
    let report = verifier::check_harge(
        3,
        &Functional::QBeta(1.0),
        &HargeWeight::Uniform,
        400_000,
        35,
    )
    .unwrap();
    assert_ne!(report.verdict, Verdict::Fail, "{report:?}");
    assert!(report.estimate.abs() <= 4.0 * report.std_error);

    // Even g, f = squared norm: strict inequality.
    let report = verifier::check_harge(
        3,
        &Functional::SquaredNorm,
        &HargeWeight::Bump(vec![0.0; 3]),
        400_000,
        36,
    )
    .unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");

    // Shifted bump, smooth max.
    let report = verifier::check_harge(
        3,
        &Functional::QBeta(1.0),
        &HargeWeight::Bump(vec![1.0, 0.0, 0.0]),
        400_000,
        37,
    )
    .unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
}

#[test]
fn harge_sigmoid_weight_and_ess_guard() {
    let report = verifier::check_harge(
        3,
        &Functional::QBeta(1.0),
        &HargeWeight::SigmoidProduct(vec![0.5, 0.5, 0.5]),
        400_000,
        38,
    )
    .unwrap();
    assert_ne!(report.verdict, Verdict::Fail, "{report:?}");

    // A bump far outside the mass collapses the effective sample size.
    let err = verifier::check_harge(
        3,
        &Functional::SquaredNorm,
        &HargeWeight::Bump(vec![12.0, 12.0, 12.0]),
        100_000,
        39,
    )
    .unwrap_err();
    assert!(matches!(err, Error::DegenerateWeights { .. }));
}

#[test]
fn oddeven_cancellation() {
    for (rho, beta, seed) in [(0.0, 1.0, 40u64), (0.7, 2.0, 41), (0.0, 0.0, 42)] {
        let report = verifier::check_bivariate_oddeven(rho, beta, 400_000, seed).unwrap();
        assert_eq!(
            report.verdict,
            Verdict::Pass,
            "rho={rho} beta={beta}: {report:?}"
        );
    }
}

#[test]
fn reports_are_deterministic() {
    let a = verifier::check_reduced_max_cov(3, 0.5, 0.5, 100_000, 43).unwrap();
    let b = verifier::check_reduced_max_cov(3, 0.5, 0.5, 100_000, 43).unwrap();
    assert_eq!(a, b);
    let c = verifier::check_thm_iid(3, 2.0, 0, 1, 100_000, 44).unwrap();
    let d = verifier::check_thm_iid(3, 2.0, 0, 1, 100_000, 44).unwrap();
    assert_eq!(c, d);
}

#[test]
fn verdicts_rederivable_from_reports() {
    // Standard-policy reports carry everything needed to re-derive verdicts.
    let reports = verifier::check_thm_rho(3, 0.5, 100_000, 45, false).unwrap();
    for report in &reports {
        assert_eq!(report.verdict, verifier::verdict_from_record(report));
    }
}
