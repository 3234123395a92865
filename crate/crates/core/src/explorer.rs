//! Stochastic search for counterexamples to the conjectured covariance sign
//! over the feasible set {PSD, unit diagonal, entrywise nonnegative}.
//!
//! The Monte Carlo objective is noisy, so the climber re-evaluates the
//! incumbent on a fresh seed every ten accepts (racing guard) and a
//! counterexample is only flagged after the lower confidence bound stays
//! positive on three independent seeds at four times the sample size.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimators::{mc_cov, Estimate};
use crate::gaussian::{spec_from_projected, CorrelationSpec, PSD_TOL};
use crate::smoothmax;

/// Initial Gaussian perturbation applied to off-diagonal entries.
pub const INITIAL_STEP: f64 = 0.05;

/// Non-improving proposals before the step halves.
pub const STEP_PATIENCE: u32 = 20;

/// Accepted moves between racing re-evaluations of the incumbent.
pub const RACING_PERIOD: u32 = 10;

/// Independent confirmations required before flagging a counterexample.
pub const CONFIRMATIONS: usize = 3;

/// Sample-size multiplier for confirmation runs.
pub const CONFIRMATION_SCALE: u64 = 4;

fn mix(seed: u64, tag: u64) -> u64 {
    let mut h = seed ^ 0x9e3779b97f4a7c15u64.wrapping_mul(tag.wrapping_add(1));
    h ^= h >> 30;
    h = h.wrapping_mul(0xbf58476d1ce4e5b9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94d049bb133111eb);
    h ^ (h >> 31)
}

/// Gram matrix of random nonnegative vectors, rescaled to unit diagonal:
/// symmetric, PSD, entries in [0, 1] by construction.
pub fn random_nonneg_corr(n_dim: usize, seed: u64) -> Result<CorrelationSpec> {
    if n_dim < 2 {
        return Err(Error::InvalidParam("n_dim must be >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, 0xfeed));
    let v = DMatrix::<f64>::from_fn(n_dim, n_dim, |_, _| {
        rng.sample::<f64, _>(StandardNormal).abs()
    });
    let gram = &v * v.transpose();
    let mut entries = DMatrix::<f64>::identity(n_dim, n_dim);
    for i in 0..n_dim {
        for j in 0..i {
            let e = gram[(i, j)] / (gram[(i, i)] * gram[(j, j)]).sqrt();
            entries[(i, j)] = e;
            entries[(j, i)] = e;
        }
    }
    spec_from_projected(entries)
}

/// Result of projecting a symmetric matrix onto the feasible set.
#[derive(Debug, Clone)]
pub struct Projection {
    pub spec: CorrelationSpec,
    pub residual: f64,
    pub rounds: u32,
}

/// Alternating projection with the default limits: at most 100 rounds, stall
/// threshold 1e-6.
pub fn project_feasible(m: &DMatrix<f64>) -> Result<Projection> {
    project_feasible_with(m, 100, 1e-6)
}

/// Alternating projection: clip negative entries, rescale the diagonal to 1,
/// clip negative eigenvalues; repeated until the residual entry violation at
/// a PSD unit-diagonal iterate is at machine level.
pub fn project_feasible_with(
    m: &DMatrix<f64>,
    max_rounds: u32,
    stall_tol: f64,
) -> Result<Projection> {
    let dim = m.nrows();
    if dim != m.ncols() || dim < 2 {
        return Err(Error::InvalidParam(
            "projection input must be square, dim >= 2".into(),
        ));
    }
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            a[(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }

    // Already feasible: hand back unchanged.
    if is_feasible(&a) {
        return Ok(Projection {
            spec: spec_from_projected(a)?,
            residual: 0.0,
            rounds: 0,
        });
    }

    let mut residual = f64::INFINITY;
    let mut rounds = 0;
    while rounds < max_rounds {
        clip_entries(&mut a);
        rescale_diagonal(&mut a);
        let eig = a.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.min();
        if min_eig < 0.0 {
            let mut vals = eig.eigenvalues;
            for v in vals.iter_mut() {
                *v = v.max(0.0);
            }
            let q = eig.eigenvectors;
            a = &q * DMatrix::from_diagonal(&vals) * q.transpose();
            rescale_diagonal(&mut a);
            // Keep the iterate exactly symmetric against eigensolver noise.
            for i in 0..dim {
                for j in 0..i {
                    let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
        }
        rounds += 1;
        residual = entry_violation(&a);
        if residual <= 1e-13 {
            break;
        }
    }
    if residual > stall_tol {
        return Err(Error::ProjectionStalled { residual, rounds });
    }
    clip_entries(&mut a);
    Ok(Projection {
        spec: spec_from_projected(a)?,
        residual,
        rounds,
    })
}

fn is_feasible(a: &DMatrix<f64>) -> bool {
    let dim = a.nrows();
    for i in 0..dim {
        if a[(i, i)] != 1.0 {
            return false;
        }
        for j in 0..i {
            if a[(i, j)] < 0.0 {
                return false;
            }
        }
    }
    a.clone().symmetric_eigen().eigenvalues.min() >= -PSD_TOL
}

fn clip_entries(a: &mut DMatrix<f64>) {
    for v in a.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

fn rescale_diagonal(a: &mut DMatrix<f64>) {
    let dim = a.nrows();
    let scale: Vec<f64> = (0..dim)
        .map(|i| 1.0 / a[(i, i)].max(1e-12).sqrt())
        .collect();
    for i in 0..dim {
        for j in 0..dim {
            a[(i, j)] *= scale[i] * scale[j];
        }
    }
    for i in 0..dim {
        a[(i, i)] = 1.0;
    }
}

fn entry_violation(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0f64, |acc, &v| acc.max(-v))
}

/// A noisy black-box objective over correlation specs.
pub trait Objective: Sync {
    fn evaluate(&self, spec: &CorrelationSpec, n: u64, seed: u64) -> Result<Estimate>;
    fn name(&self) -> String;
}

/// The conjectured quantity: `Cov(log S_N(Z), p_i(Z) p_j(Z))` under
/// `Z ~ Normal(0, Σ)`.
pub struct CovLogSPipj {
    pub beta: f64,
    pub i: usize,
    pub j: usize,
}

impl Objective for CovLogSPipj {
    fn evaluate(&self, spec: &CorrelationSpec, n: u64, seed: u64) -> Result<Estimate> {
        let (beta, i, j) = (self.beta, self.i, self.j);
        mc_cov(
            move |row| smoothmax::eval(row, beta).log_s,
            move |row| {
                let e = smoothmax::eval(row, beta);
                e.p[i] * e.p[j]
            },
            spec,
            n,
            seed,
        )
    }

    fn name(&self) -> String {
        format!("cov(logS, p{}p{}; beta={})", self.i, self.j, self.beta)
    }
}

#[derive(Debug, Clone)]
pub struct SearchParams {
    pub n_dim: usize,
    pub budget: u64,
    pub n_per_eval: u64,
    pub seed: u64,
}

/// One iteration of the search log.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchIterRecord {
    pub iteration: u64,
    /// Upper-triangle entries (row-major, i < j) of the evaluated candidate.
    pub entries: Vec<f64>,
    pub value: f64,
    pub std_error: f64,
    pub accepted: bool,
    pub step: f64,
    /// Best objective value after this iteration (restarts at re-evaluations).
    pub best_value: f64,
}

/// θ grid for spot-checking a finding along the interpolation path from the
/// identity to the flagged matrix.
pub const PATH_THETAS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// A reproduced counterexample: lower confidence bound positive on the
/// original evaluation and on all confirmation runs. `path_points` holds the
/// objective along `Σ(θ) = (1-θ)·id + θ·Σ*`, covering the interpolation-path
/// reading of the conjectured sign as well as the static one.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub spec: CorrelationSpec,
    pub confirmations: Vec<Estimate>,
    pub path_points: Vec<(f64, Estimate)>,
}

#[derive(Debug, Clone)]
pub struct SearchState {
    pub current: CorrelationSpec,
    pub objective: Estimate,
    pub best: (CorrelationSpec, Estimate),
    pub iteration: u64,
    pub rng_seed: u64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub state: SearchState,
    pub log: Vec<SearchIterRecord>,
    pub counterexample: Option<Counterexample>,
}

/// Upper-triangle view used in log records.
pub fn upper_triangle(spec: &CorrelationSpec) -> Vec<f64> {
    let dim = spec.dim();
    let mut out = Vec::with_capacity(dim * (dim - 1) / 2);
    for i in 0..dim {
        for j in (i + 1)..dim {
            out.push(spec.entries()[(i, j)]);
        }
    }
    out
}

fn assert_feasible(spec: &CorrelationSpec) {
    for v in upper_triangle(spec) {
        assert!(v >= 0.0, "search produced a negative entry {v}");
    }
}

/// Hill-climbs the default conjecture objective.
pub fn search(
    n_dim: usize,
    beta: f64,
    i: usize,
    j: usize,
    budget: u64,
    n_per_eval: u64,
    seed: u64,
) -> Result<SearchOutcome> {
    if i == j || i >= n_dim || j >= n_dim {
        return Err(Error::IndexError { i, j, dim: n_dim });
    }
    let objective = CovLogSPipj { beta, i, j };
    search_with_objective(
        &SearchParams {
            n_dim,
            budget,
            n_per_eval,
            seed,
        },
        &objective,
    )
}

/// Hill-climbing with Gaussian perturbations of the off-diagonal entries,
/// feasibility projection of every candidate, racing re-evaluation of the
/// incumbent, and the counterexample reproduction protocol.
pub fn search_with_objective(
    params: &SearchParams,
    objective: &dyn Objective,
) -> Result<SearchOutcome> {
    let SearchParams {
        n_dim,
        budget,
        n_per_eval,
        seed,
    } = *params;
    let mut walk_rng = ChaCha8Rng::seed_from_u64(mix(seed, 0x5a1c));
    let mut eval_counter = 0u64;
    let next_eval_seed = |counter: &mut u64| {
        *counter += 1;
        mix(seed, 0xe7a1 ^ *counter)
    };

    let mut current = random_nonneg_corr(n_dim, seed)?;
    assert_feasible(&current);
    let mut current_obj =
        objective.evaluate(&current, n_per_eval, next_eval_seed(&mut eval_counter))?;
    let mut best = (current.clone(), current_obj);

    let mut step = INITIAL_STEP;
    let mut non_improving = 0u32;
    let mut accepts = 0u32;
    let mut log = Vec::with_capacity(budget as usize);

    for iteration in 0..budget {
        // Perturb off-diagonals; retry the projection on the rare stall.
        let mut candidate = None;
        for _ in 0..5 {
            let mut m = current.entries().clone();
            for a in 0..n_dim {
                for b in (a + 1)..n_dim {
                    let bump = step * walk_rng.sample::<f64, _>(StandardNormal);
                    m[(a, b)] += bump;
                    m[(b, a)] = m[(a, b)];
                }
            }
            if let Ok(proj) = project_feasible(&m) {
                candidate = Some(proj.spec);
                break;
            }
        }
        let candidate = candidate.unwrap_or_else(|| current.clone());
        assert_feasible(&candidate);

        let cand_obj =
            objective.evaluate(&candidate, n_per_eval, next_eval_seed(&mut eval_counter))?;
        let accepted = cand_obj.value > current_obj.value;
        if accepted {
            current = candidate.clone();
            current_obj = cand_obj;
            non_improving = 0;
            accepts += 1;
            if current_obj.value > best.1.value {
                best = (current.clone(), current_obj);
            }
            if accepts.is_multiple_of(RACING_PERIOD) {
                // Racing guard: refresh the incumbent on an independent seed
                // so the climb cannot ride a lucky noise draw. Monotonicity of
                // the best value restarts from the refreshed estimate.
                current_obj =
                    objective.evaluate(&current, n_per_eval, next_eval_seed(&mut eval_counter))?;
                best = (current.clone(), current_obj);
            }
        } else {
            non_improving += 1;
            if non_improving >= STEP_PATIENCE {
                step *= 0.5;
                non_improving = 0;
            }
        }
        log.push(SearchIterRecord {
            iteration,
            entries: upper_triangle(&candidate),
            value: cand_obj.value,
            std_error: cand_obj.std_error,
            accepted,
            step,
            best_value: best.1.value,
        });
    }

    // Counterexample protocol: flag only when the lower confidence bound is
    // positive and the finding reproduces on independent seeds at 4x samples.
    let mut counterexample = None;
    let lcb = best.1.value - best.1.confidence_z * best.1.std_error;
    if lcb > 0.0 {
        let mut confirmations = Vec::with_capacity(CONFIRMATIONS);
        let mut all_positive = true;
        for _ in 0..CONFIRMATIONS {
            let est = objective.evaluate(
                &best.0,
                n_per_eval * CONFIRMATION_SCALE,
                next_eval_seed(&mut eval_counter),
            )?;
            all_positive &= est.value - est.confidence_z * est.std_error > 0.0;
            confirmations.push(est);
        }
        if all_positive {
            // Spot-check the interpolation path from the identity to the
            // finding, so both readings of the conjectured sign are covered.
            let identity = CorrelationSpec::identity(n_dim);
            let mut path_points = Vec::with_capacity(PATH_THETAS.len());
            for &theta in &PATH_THETAS {
                let spec_t = identity.interpolate(&best.0, theta)?;
                let est = objective.evaluate(
                    &spec_t,
                    n_per_eval * CONFIRMATION_SCALE,
                    next_eval_seed(&mut eval_counter),
                )?;
                path_points.push((theta, est));
            }
            counterexample = Some(Counterexample {
                spec: best.0.clone(),
                confirmations,
                path_points,
            });
        }
    }

    Ok(SearchOutcome {
        state: SearchState {
            current,
            objective: current_obj,
            best,
            iteration: budget,
            rng_seed: seed,
        },
        log,
        counterexample,
    })
}
