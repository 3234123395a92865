//! Command-line front end: batch experiment runs, config files, and CSV/JSON
//! result serialization.
//!
//! Exit codes: 0 all verdicts pass, 2 any fail, 3 any indeterminate (none
//! fail), 1 runtime/config errors, 64 usage errors.
//!
//! Coordinate indices on the command line are 1-based, matching the usual
//! σ_{1,2} / p_1 p_2 notation; the library API underneath is 0-based.

mod config;
mod emit;

use std::path::PathBuf;

use clap::{CommandFactory, Parser, Subcommand};

use config::{
    EstimateConfig, OutputFormat, RunConfig, SearchConfig, TableConfig, TheoremConfig, VerifyConfig,
};
use gaussmax::estimators::{self, max_moments_oracle, var_max_oracle};
use gaussmax::explorer;
use gaussmax::functional::Functional;
use gaussmax::gaussian::CorrelationSpec;
use gaussmax::verifier::{self, param_map, CheckReport, Target, Verdict};

const EXIT_OK: i32 = 0;
const EXIT_ERROR: i32 = 1;
const EXIT_FAIL: i32 = 2;
const EXIT_INDETERMINATE: i32 = 3;
const EXIT_USAGE: i32 = 64;

/// Environment variable naming the default worker thread count.
const THREADS_ENV: &str = "GAUSSMAX_THREADS";

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_ERROR,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<gaussmax::Error> for CliError {
    fn from(e: gaussmax::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(
    name = "gaussmax",
    version,
    about = "Monte Carlo verification and exploration of variance/covariance inequalities for Gaussian maxima"
)]
struct Cli {
    /// Declarative TOML config; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file for the records (default: stdout).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Record format.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Worker threads (default: GAUSSMAX_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo estimate (mean, var, or cov) of a functional.
    Estimate {
        #[arg(value_parser = ["mean", "var", "cov"])]
        kind: String,
        #[command(flatten)]
        cfg: EstimateConfig,
    },
    /// Identity checks: cov-equality, vardiff, i-constant, oddeven, integrals.
    Verify {
        id: String,
        #[command(flatten)]
        cfg: VerifyConfig,
    },
    /// Theorem checks: thm-iid, thm-iid-bivariate, thm-rho, lemma-a1,
    /// reduced-max-cov, slepian, harge, decreasing, suite.
    Theorem {
        id: String,
        #[command(flatten)]
        cfg: TheoremConfig,
    },
    /// Deterministic oracle tables: var-max.
    Table {
        id: String,
        #[command(flatten)]
        cfg: TableConfig,
    },
    /// Stochastic counterexample search over feasible correlation matrices.
    Search {
        #[command(flatten)]
        cfg: SearchConfig,
    },
}

fn main() {
    let code = run();
    std::process::exit(code);
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };

    let file_config = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match RunConfig::from_toml(&text) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: invalid config file {}: {e}", path.display());
                    return EXIT_ERROR;
                }
            },
            Err(e) => {
                eprintln!("error: cannot read config file {}: {e}", path.display());
                return EXIT_ERROR;
            }
        },
        None => RunConfig::default(),
    };

    let threads = cli
        .threads
        .or(file_config.output.threads)
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok()));
    if let Some(k) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global();
    }

    let format = cli.format.or(file_config.output.format).unwrap_or_default();
    let output = cli
        .output
        .clone()
        .or_else(|| file_config.output.path.clone().map(PathBuf::from));

    match dispatch(cli.command, file_config) {
        Ok(outcome) => {
            let text = match format {
                OutputFormat::Csv => emit::reports_to_csv(&outcome.reports),
                OutputFormat::Json => emit::reports_to_json(&outcome.reports),
            };
            if let Err(e) = write_text(&text, output.as_deref()) {
                eprintln!("error: cannot write output: {e}");
                return EXIT_ERROR;
            }
            if let Some((path, log)) = &outcome.search_log {
                let default_name = match format {
                    OutputFormat::Csv => "gaussmax-search-log.csv",
                    OutputFormat::Json => "gaussmax-search-log.json",
                };
                let path = path.clone().unwrap_or_else(|| PathBuf::from(default_name));
                let text = match format {
                    OutputFormat::Csv => emit::search_log_to_csv(log),
                    OutputFormat::Json => emit::search_log_to_json(log),
                };
                if let Err(e) = std::fs::write(&path, text) {
                    eprintln!("error: cannot write search log {}: {e}", path.display());
                    return EXIT_ERROR;
                }
            }
            summarize(&outcome.reports)
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            if matches!(e, CliError::Usage(_)) {
                let _ = Cli::command().print_help();
            }
            e.exit_code()
        }
    }
}

fn write_text(text: &str, path: Option<&std::path::Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}

fn summarize(reports: &[CheckReport]) -> i32 {
    let fails = reports
        .iter()
        .filter(|r| r.verdict == Verdict::Fail)
        .count();
    let indet = reports
        .iter()
        .filter(|r| r.verdict == Verdict::Indeterminate)
        .count();
    eprintln!(
        "[gaussmax] {} record(s): {} pass, {} fail, {} indeterminate",
        reports.len(),
        reports.len() - fails - indet,
        fails,
        indet
    );
    if fails > 0 {
        EXIT_FAIL
    } else if indet > 0 {
        EXIT_INDETERMINATE
    } else {
        EXIT_OK
    }
}

struct Outcome {
    reports: Vec<CheckReport>,
    search_log: Option<(Option<PathBuf>, Vec<explorer::SearchIterRecord>)>,
}

impl Outcome {
    fn reports(reports: Vec<CheckReport>) -> Self {
        Self {
            reports,
            search_log: None,
        }
    }
}

fn dispatch(command: Option<Command>, file: RunConfig) -> CliResult<Outcome> {
    match command {
        Some(Command::Estimate { kind, cfg }) => {
            let mut merged = cfg.merge(file.estimate.unwrap_or_default());
            merged.kind = Some(kind);
            run_estimate(merged)
        }
        Some(Command::Verify { id, cfg }) => {
            let mut merged = cfg.merge(file.verify.unwrap_or_default());
            merged.id = Some(id);
            run_verify(merged)
        }
        Some(Command::Theorem { id, cfg }) => {
            let mut merged = cfg.merge(file.theorem.unwrap_or_default());
            merged.id = Some(id);
            run_theorem(merged)
        }
        Some(Command::Table { id, cfg }) => {
            let mut merged = cfg.merge(file.table.unwrap_or_default());
            merged.id = Some(id);
            run_table(merged)
        }
        Some(Command::Search { cfg }) => run_search(cfg.merge(file.search.unwrap_or_default())),
        None => {
            // Command supplied entirely by the config file.
            let sections = [
                file.estimate.is_some(),
                file.verify.is_some(),
                file.theorem.is_some(),
                file.table.is_some(),
                file.search.is_some(),
            ]
            .iter()
            .filter(|b| **b)
            .count();
            if sections != 1 {
                return Err(usage(
                    "config file must define exactly one command section \
                     (estimate, verify, theorem, table, or search)",
                ));
            }
            if let Some(cfg) = file.estimate {
                run_estimate(cfg)
            } else if let Some(cfg) = file.verify {
                run_verify(cfg)
            } else if let Some(cfg) = file.theorem {
                run_theorem(cfg)
            } else if let Some(cfg) = file.table {
                run_table(cfg)
            } else {
                run_search(file.search.unwrap())
            }
        }
    }
}

// ---------- parameter parsing ----------

fn positive_beta(beta: f64) -> CliResult<f64> {
    if beta > 0.0 {
        Ok(beta)
    } else {
        Err(usage("beta must be positive"))
    }
}

fn checked_samples(samples: u64) -> CliResult<u64> {
    if samples >= 100 {
        Ok(samples)
    } else {
        Err(usage("samples must be at least 100"))
    }
}

/// 1-based "i,j" pair, converted to 0-based.
fn parse_pair(text: &str) -> CliResult<(usize, usize)> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(usage(format!("pair must look like \"1,2\", got {text:?}")));
    }
    let i: usize = parts[0]
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad pair index {:?}", parts[0])))?;
    let j: usize = parts[1]
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad pair index {:?}", parts[1])))?;
    if i == 0 || j == 0 {
        return Err(usage("pair indices are 1-based"));
    }
    Ok((i - 1, j - 1))
}

/// 1-based correlation list "1,2=0.5;1,3=0.2", converted to 0-based.
fn parse_corr(text: &str) -> CliResult<Vec<(usize, usize, f64)>> {
    let mut out = Vec::new();
    for item in text.split(';').filter(|s| !s.trim().is_empty()) {
        let (pair, value) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("bad correlation entry {item:?}")))?;
        let (i, j) = parse_pair(pair.trim())?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad correlation value {value:?}")))?;
        out.push((i, j, v));
    }
    Ok(out)
}

fn build_spec(n_dim: usize, corr: Option<&str>) -> CliResult<CorrelationSpec> {
    let pairs = match corr {
        Some(text) => parse_corr(text)?,
        None => Vec::new(),
    };
    Ok(CorrelationSpec::new(n_dim, &pairs)?)
}

/// Functional spec string with 1-based indices: max, reduced-max, ind-a1,
/// ind-a-plus, sqnorm, qbeta, logs, x:i, p:i, pp:i,j.
fn parse_functional(text: &str, beta: f64) -> CliResult<Functional> {
    let text = text.trim();
    match text {
        "max" => return Ok(Functional::HardMax),
        "reduced-max" => return Ok(Functional::ReducedMax),
        "ind-a1" => return Ok(Functional::IndicatorA1),
        "ind-a-plus" => return Ok(Functional::IndicatorAPlus),
        "sqnorm" => return Ok(Functional::SquaredNorm),
        "qbeta" => return Ok(Functional::QBeta(positive_beta(beta)?)),
        "logs" => return Ok(Functional::LogSumExp(positive_beta(beta)?)),
        _ => {}
    }
    if let Some(rest) = text.strip_prefix("x:") {
        let i: usize = rest
            .parse()
            .map_err(|_| usage(format!("bad coordinate index {rest:?}")))?;
        if i == 0 {
            return Err(usage("coordinate indices are 1-based"));
        }
        return Ok(Functional::Coord(i - 1));
    }
    if let Some(rest) = text.strip_prefix("pp:") {
        let (i, j) = parse_pair(rest)?;
        return Ok(Functional::SoftmaxPair(i, j, positive_beta(beta)?));
    }
    if let Some(rest) = text.strip_prefix("p:") {
        let i: usize = rest
            .parse()
            .map_err(|_| usage(format!("bad softmax index {rest:?}")))?;
        if i == 0 {
            return Err(usage("softmax indices are 1-based"));
        }
        return Ok(Functional::Softmax(i - 1, positive_beta(beta)?));
    }
    Err(usage(format!(
        "unknown functional {text:?}; expected max, reduced-max, ind-a1, ind-a-plus, \
         sqnorm, qbeta, logs, x:i, p:i, or pp:i,j"
    )))
}

fn parse_harge_weight(text: &str, n_dim: usize) -> CliResult<verifier::HargeWeight> {
    let text = text.trim();
    if text == "uniform" {
        return Ok(verifier::HargeWeight::Uniform);
    }
    let parse_list = |list: &str, what: &str| -> CliResult<Vec<f64>> {
        let values: Result<Vec<f64>, _> = list.split(',').map(|v| v.trim().parse()).collect();
        let values = values.map_err(|_| usage(format!("bad {what} parameter list {list:?}")))?;
        if values.len() != n_dim {
            return Err(usage(format!(
                "{what} needs {n_dim} parameters, got {}",
                values.len()
            )));
        }
        Ok(values)
    };
    if let Some(rest) = text.strip_prefix("bump:") {
        return Ok(verifier::HargeWeight::Bump(parse_list(rest, "bump")?));
    }
    if let Some(rest) = text.strip_prefix("sigmoid:") {
        return Ok(verifier::HargeWeight::SigmoidProduct(parse_list(
            rest, "sigmoid",
        )?));
    }
    Err(usage(format!(
        "unknown weight {text:?}; expected uniform, bump:a1,..,aN, or sigmoid:s1,..,sN"
    )))
}

// ---------- command runners ----------

fn run_estimate(cfg: EstimateConfig) -> CliResult<Outcome> {
    let kind = cfg
        .kind
        .clone()
        .ok_or_else(|| usage("missing estimate kind"))?;
    let n_dim = cfg.n_dim.unwrap_or(3);
    let beta = cfg.beta.unwrap_or(1.0);
    let samples = checked_samples(cfg.samples.unwrap_or(1_000_000))?;
    let seed = cfg.seed.unwrap_or(0);
    let spec = build_spec(n_dim, cfg.corr.as_deref())?;
    let f_text = cfg
        .functional
        .clone()
        .ok_or_else(|| usage("missing required parameter: functional"))?;
    let f = parse_functional(&f_text, beta)?;

    let (check_id, est) = match kind.as_str() {
        "mean" => (
            "estimate-mean",
            estimators::mc_mean(|row| f.eval(row), &spec, samples, seed)?,
        ),
        "var" => (
            "estimate-var",
            estimators::mc_var(|row| f.eval(row), &spec, samples, seed)?,
        ),
        "cov" => {
            let g_text = cfg
                .functional2
                .clone()
                .ok_or_else(|| usage("missing required parameter: functional2 (cov)"))?;
            let g = parse_functional(&g_text, beta)?;
            (
                "estimate-cov",
                estimators::mc_cov(|row| f.eval(row), |row| g.eval(row), &spec, samples, seed)?,
            )
        }
        other => return Err(usage(format!("unknown estimate kind {other:?}"))),
    };
    let mut params = param_map([
        ("n_dim", n_dim.into()),
        ("functional", f.name().into()),
        ("samples", samples.into()),
        ("seed", seed.into()),
    ]);
    if let Some(corr) = &cfg.corr {
        params.insert("corr".into(), corr.as_str().into());
    }
    if let Some(g_text) = &cfg.functional2 {
        params.insert("functional2".into(), g_text.as_str().into());
    }
    let report = CheckReport::derived(
        check_id,
        params,
        est.value,
        est.std_error,
        est.n,
        Target::Report,
        "report",
    );
    Ok(Outcome::reports(vec![report]))
}

fn run_verify(cfg: VerifyConfig) -> CliResult<Outcome> {
    let id = cfg.id.clone().ok_or_else(|| usage("missing verify id"))?;
    let n_dim = cfg.n_dim.unwrap_or(3);
    let beta = cfg.beta.unwrap_or(1.0);
    let samples = checked_samples(cfg.samples.unwrap_or(1_000_000))?;
    let nodes = cfg.nodes.unwrap_or(estimators::DEFAULT_GL_ORDER);
    let seed = cfg.seed.unwrap_or(0);
    let reports = match id.as_str() {
        "cov-equality" => {
            let beta = positive_beta(beta)?;
            let f = parse_functional(cfg.f.as_deref().unwrap_or("logs"), beta)?;
            let g = parse_functional(cfg.g.as_deref().unwrap_or("pp:1,2"), beta)?;
            let spec = build_spec(n_dim, cfg.corr.as_deref())?;
            vec![verifier::check_cov_equality(
                &spec, &f, &g, samples, nodes, seed,
            )?]
        }
        "vardiff" => {
            let beta = positive_beta(beta)?;
            let rho = cfg.rho.unwrap_or(0.5);
            let spec_x = CorrelationSpec::identity(n_dim);
            let spec_y = CorrelationSpec::single_pair(n_dim, rho)?;
            vec![verifier::check_vardiff_identity(
                &spec_x, &spec_y, beta, samples, nodes, seed,
            )?]
        }
        "i-constant" => {
            let rho = cfg.rho.unwrap_or(0.5);
            let theta = cfg.theta.unwrap_or(1.0);
            vec![verifier::check_i_constant(
                n_dim, rho, theta, samples, seed,
            )?]
        }
        "oddeven" => {
            let rho = cfg.rho.unwrap_or(0.0);
            if beta < 0.0 {
                return Err(usage("beta must be nonnegative for oddeven"));
            }
            vec![verifier::check_bivariate_oddeven(rho, beta, samples, seed)?]
        }
        "integrals" => verifier::check_integral_identities(),
        other => return Err(usage(format!("unknown verify id {other:?}"))),
    };
    Ok(Outcome::reports(reports))
}

fn run_theorem(cfg: TheoremConfig) -> CliResult<Outcome> {
    let id = cfg.id.clone().ok_or_else(|| usage("missing theorem id"))?;
    let n_dim = cfg.n_dim.unwrap_or(3);
    let samples = checked_samples(cfg.samples.unwrap_or(1_000_000))?;
    let seed = cfg.seed.unwrap_or(0);
    let reports = match id.as_str() {
        "thm-iid" => {
            let beta = positive_beta(cfg.beta.unwrap_or(1.0))?;
            let (i, j) = parse_pair(cfg.pair.as_deref().unwrap_or("1,2"))?;
            verifier::check_thm_iid(n_dim, beta, i, j, samples, seed)?
        }
        "thm-iid-bivariate" => {
            let beta = positive_beta(cfg.beta.unwrap_or(1.0))?;
            let rho = cfg.rho.unwrap_or(0.0);
            vec![verifier::check_bivariate_iid(rho, beta, samples, seed)?]
        }
        "thm-rho" => {
            let rho = cfg.rho.unwrap_or(0.5);
            let limit = cfg.beta_limit.unwrap_or(false);
            verifier::check_thm_rho(n_dim, rho, samples, seed, limit)?
        }
        "lemma-a1" => {
            let c11 = cfg.c11.unwrap_or(0.5);
            vec![verifier::check_lemma_a1(n_dim, c11, samples, seed)?]
        }
        "reduced-max-cov" => {
            let rho = cfg.rho.unwrap_or(0.5);
            let theta = cfg.theta.unwrap_or(0.5);
            vec![verifier::check_reduced_max_cov(
                n_dim, rho, theta, samples, seed,
            )?]
        }
        "slepian" => {
            let rho_x = cfg.rho_x.unwrap_or(0.5);
            let rho_y = cfg.rho_y.unwrap_or(0.0);
            let spec_x = CorrelationSpec::single_pair(n_dim, rho_x)?;
            let spec_y = CorrelationSpec::single_pair(n_dim, rho_y)?;
            let u_grid: Vec<f64> = (0..11).map(|k| -2.0 + 0.5 * k as f64).collect();
            verifier::check_slepian(&spec_x, &spec_y, samples, seed, &u_grid)?
        }
        "harge" => {
            let beta = positive_beta(cfg.beta.unwrap_or(1.0))?;
            let f = parse_functional(cfg.f.as_deref().unwrap_or("qbeta"), beta)?;
            let g = parse_harge_weight(cfg.g.as_deref().unwrap_or("bump:1,0,0"), n_dim)?;
            vec![verifier::check_harge(n_dim, &f, &g, samples, seed)?]
        }
        "decreasing" => {
            let n_max = cfg.n_max.unwrap_or(10);
            verifier::check_decreasing(n_max, samples, seed)?
        }
        "suite" => verifier::default_suite(seed)?,
        other => return Err(usage(format!("unknown theorem id {other:?}"))),
    };
    Ok(Outcome::reports(reports))
}

fn run_table(cfg: TableConfig) -> CliResult<Outcome> {
    let id = cfg.id.clone().ok_or_else(|| usage("missing table id"))?;
    if id != "var-max" {
        return Err(usage(format!("unknown table id {id:?}")));
    }
    let n_min = cfg.n_min.unwrap_or(2);
    let n_max = cfg.n_max.unwrap_or(20);
    if n_min < 1 || n_min > n_max {
        return Err(usage("need 1 <= n-min <= n-max"));
    }
    let mut reports = Vec::new();
    for n_dim in n_min..=n_max {
        let (m1, m2) = max_moments_oracle(n_dim);
        let var = var_max_oracle(n_dim);
        let mut params = param_map([
            ("n_dim", n_dim.into()),
            ("mean", m1.into()),
            ("second_moment", m2.into()),
        ]);
        if n_dim > 1 {
            params.insert(
                "ratio_2logn".into(),
                (var * 2.0 * (n_dim as f64).ln()).into(),
            );
        }
        reports.push(CheckReport::derived(
            "var-max-table",
            params,
            var,
            0.0,
            0,
            Target::Report,
            "report",
        ));
    }
    Ok(Outcome::reports(reports))
}

fn run_search(cfg: SearchConfig) -> CliResult<Outcome> {
    let n_dim = cfg.n_dim.unwrap_or(3);
    let beta = positive_beta(cfg.beta.unwrap_or(1.0))?;
    let (i, j) = parse_pair(cfg.pair.as_deref().unwrap_or("1,2"))?;
    let budget = cfg.budget.unwrap_or(200);
    let n_per_eval = checked_samples(cfg.n_per_eval.unwrap_or(100_000))?;
    let seed = cfg.seed.unwrap_or(0);

    let outcome = explorer::search(n_dim, beta, i, j, budget, n_per_eval, seed)?;

    let mut report = verifier::search_report(
        n_dim,
        beta,
        i,
        j,
        budget,
        n_per_eval,
        seed,
        &outcome.state.best.1,
        outcome.counterexample.is_some(),
    );
    let best_entries = explorer::upper_triangle(&outcome.state.best.0)
        .iter()
        .map(|v| emit::format_float(*v))
        .collect::<Vec<_>>()
        .join(";");
    report
        .params
        .insert("best_entries".into(), best_entries.into());
    if let Some(ce) = &outcome.counterexample {
        for (k, est) in ce.confirmations.iter().enumerate() {
            report
                .params
                .insert(format!("confirm_{k}_value"), est.value.into());
            report
                .params
                .insert(format!("confirm_{k}_se"), est.std_error.into());
        }
        for (theta, est) in &ce.path_points {
            let pct = (theta * 100.0).round() as u64;
            report
                .params
                .insert(format!("path_t{pct}_value"), est.value.into());
            report
                .params
                .insert(format!("path_t{pct}_se"), est.std_error.into());
        }
    }

    Ok(Outcome {
        reports: vec![report],
        search_log: Some((cfg.search_log.map(PathBuf::from), outcome.log)),
    })
}
