//! Monte Carlo estimation of means, variances, and covariances of functionals
//! of Gaussian batches, with plug-in standard errors, common-random-numbers
//! pairing for differences, and replicated statistics for everything whose
//! delta-method error would be fragile.

mod accum;
pub mod quadrature;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{standard_normal_chunk, CorrelationSpec, GaussianSource, CHUNK_ROWS};
use accum::{BivariateAccum, MomentAccum};

pub use quadrature::{
    adaptive_quadrature, gauss_legendre_01, gauss_legendre_01_nodes, max_moments_oracle,
    normal_cdf, normal_pdf, sech2_integral, sech2_integrand, var_max_oracle, DEFAULT_GL_ORDER,
};

/// Replicate count for split-batch standard errors.
pub const REPLICATES: u32 = 50;

/// Default confidence multiplier: all pass/fail verdicts use 4-sigma intervals.
pub const CONFIDENCE_Z: f64 = 4.0;

/// Stream-id stride separating replicates, leaving room for sub-chunks.
const REPLICATE_STRIDE: u64 = 1 << 32;

/// A Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n: u64,
    pub confidence_z: f64,
}

impl Estimate {
    pub fn new(value: f64, std_error: f64, n: u64) -> Self {
        Self {
            value,
            std_error,
            n,
            confidence_z: CONFIDENCE_Z,
        }
    }

    /// `value ± confidence_z · std_error`.
    pub fn interval(&self) -> (f64, f64) {
        (
            self.value - self.confidence_z * self.std_error,
            self.value + self.confidence_z * self.std_error,
        )
    }

    /// Whether `target` lies inside the confidence interval.
    pub fn consistent_with(&self, target: f64) -> bool {
        let (lo, hi) = self.interval();
        lo <= target && target <= hi
    }
}

/// An estimate of a difference driven by common random numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedEstimate {
    pub diff_value: f64,
    pub diff_std_error: f64,
    pub n: u64,
    pub replicates: u32,
}

fn validate_n(n: u64) -> Result<()> {
    if n < 100 {
        return Err(Error::InvalidParam(format!("n must be >= 100, got {n}")));
    }
    Ok(())
}

/// Evaluates `f` on the first row of the stream, used as the accumulator shift.
fn first_value<S, F>(source: &S, seed: u64, stream: u64, f: &F) -> f64
where
    S: GaussianSource,
    F: Fn(&[f64]) -> f64,
{
    let mut row = vec![0.0; source.dim()];
    source.fill_chunk(seed, stream, &mut row);
    f(&row)
}

fn nonfinite_error(context: &str, index: u64) -> Error {
    Error::NonFinite {
        context: context.to_string(),
        index,
    }
}

/// Streams `n` rows in fixed chunks, mapping each chunk through `make` and
/// merging in chunk order so the result is independent of scheduling.
fn map_chunks<S, A, M>(source: &S, n: u64, seed: u64, make: M) -> Vec<A>
where
    S: GaussianSource,
    A: Send,
    M: Fn(u64, &[f64]) -> A + Sync,
{
    let dim = source.dim();
    let n_chunks = n.div_ceil(CHUNK_ROWS as u64);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let row0 = c * CHUNK_ROWS as u64;
            let rows = (CHUNK_ROWS as u64).min(n - row0) as usize;
            let mut buf = vec![0.0; rows * dim];
            source.fill_chunk(seed, c, &mut buf);
            make(row0, &buf)
        })
        .collect()
}

/// Sample mean of `f` over `n` draws from `source`.
pub fn mc_mean<S, F>(f: F, source: &S, n: u64, seed: u64) -> Result<Estimate>
where
    S: GaussianSource,
    F: Fn(&[f64]) -> f64 + Sync,
{
    validate_n(n)?;
    let dim = source.dim();
    let shift = first_value(source, seed, 0, &f);
    let partials = map_chunks(source, n, seed, |row0, buf| {
        let mut acc = MomentAccum::new(shift);
        for (k, row) in buf.chunks(dim).enumerate() {
            acc.push(f(row), row0 + k as u64);
        }
        acc
    });
    let mut total = MomentAccum::new(shift);
    for p in &partials {
        total.merge(p);
    }
    if let Some(idx) = total.nonfinite_at {
        return Err(nonfinite_error("mc_mean functional", idx));
    }
    let se = (total.sample_variance() / n as f64).sqrt();
    Ok(Estimate::new(total.mean(), se, n))
}

/// Unbiased sample variance of `f`, with a delta-method standard error from
/// the second and fourth central moments.
pub fn mc_var<S, F>(f: F, source: &S, n: u64, seed: u64) -> Result<Estimate>
where
    S: GaussianSource,
    F: Fn(&[f64]) -> f64 + Sync,
{
    validate_n(n)?;
    let dim = source.dim();
    let shift = first_value(source, seed, 0, &f);
    let partials = map_chunks(source, n, seed, |row0, buf| {
        let mut acc = MomentAccum::new(shift);
        for (k, row) in buf.chunks(dim).enumerate() {
            acc.push(f(row), row0 + k as u64);
        }
        acc
    });
    let mut total = MomentAccum::new(shift);
    for p in &partials {
        total.merge(p);
    }
    if let Some(idx) = total.nonfinite_at {
        return Err(nonfinite_error("mc_var functional", idx));
    }
    let (m2, m4) = total.central_m2_m4();
    let se = ((m4 - m2 * m2).max(0.0) / n as f64).sqrt();
    Ok(Estimate::new(total.sample_variance(), se, n))
}

/// Sample covariance of `(f, g)` on a shared batch, with a plug-in standard
/// error from the (2,2) mixed central moment.
pub fn mc_cov<S, F, G>(f: F, g: G, source: &S, n: u64, seed: u64) -> Result<Estimate>
where
    S: GaussianSource,
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> f64 + Sync,
{
    validate_n(n)?;
    let dim = source.dim();
    let mut row = vec![0.0; dim];
    source.fill_chunk(seed, 0, &mut row);
    let (shift_f, shift_g) = (f(&row), g(&row));
    let partials = map_chunks(source, n, seed, |row0, buf| {
        let mut acc = BivariateAccum::new(shift_f, shift_g);
        for (k, row) in buf.chunks(dim).enumerate() {
            acc.push(f(row), g(row), row0 + k as u64);
        }
        acc
    });
    let mut total = BivariateAccum::new(shift_f, shift_g);
    for p in &partials {
        total.merge(p);
    }
    if let Some(idx) = total.nonfinite_at {
        return Err(nonfinite_error("mc_cov functional", idx));
    }
    let (m11, m22) = total.central_m11_m22();
    let se = ((m22 - m11 * m11).max(0.0) / n as f64).sqrt();
    Ok(Estimate::new(total.sample_covariance(), se, n))
}

/// Mean of a pairwise functional over the coupled pair `(G_b, H_b)`.
pub fn mc_mean_coupled<H>(
    h: H,
    spec: &CorrelationSpec,
    b: f64,
    n: u64,
    seed: u64,
) -> Result<Estimate>
where
    H: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    validate_n(n)?;
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::InvalidParam(format!("b = {b} outside [0, 1]")));
    }
    let dim = spec.dim();
    let shift = {
        let mut g0 = vec![0.0; dim];
        let mut h0 = vec![0.0; dim];
        spec.fill_coupled_chunk(b, seed, 0, &mut g0, &mut h0);
        h(&g0, &h0)
    };
    let n_chunks = n.div_ceil(CHUNK_ROWS as u64);
    let partials: Vec<MomentAccum> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let row0 = c * CHUNK_ROWS as u64;
            let rows = (CHUNK_ROWS as u64).min(n - row0) as usize;
            let mut gbuf = vec![0.0; rows * dim];
            let mut hbuf = vec![0.0; rows * dim];
            spec.fill_coupled_chunk(b, seed, c, &mut gbuf, &mut hbuf);
            let mut acc = MomentAccum::new(shift);
            for (k, (grow, hrow)) in gbuf.chunks(dim).zip(hbuf.chunks(dim)).enumerate() {
                acc.push(h(grow, hrow), row0 + k as u64);
            }
            acc
        })
        .collect();
    let mut total = MomentAccum::new(shift);
    for p in &partials {
        total.merge(p);
    }
    if let Some(idx) = total.nonfinite_at {
        return Err(nonfinite_error("coupled functional", idx));
    }
    let se = (total.sample_variance() / n as f64).sqrt();
    Ok(Estimate::new(total.mean(), se, n))
}

/// Estimates `Var(f(Y)) - Var(f(X))` with both arms driven by the same
/// standard-normal noise through each spec's factor (common random numbers).
///
/// The standard error comes from a split-batch replication scheme: the budget
/// is divided into [`REPLICATES`] independent replicates, each contributing an
/// unbiased variance difference.
pub fn paired_var_diff<F>(
    f: F,
    spec_x: &CorrelationSpec,
    spec_y: &CorrelationSpec,
    n: u64,
    seed: u64,
) -> Result<PairedEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    validate_n(n)?;
    if spec_x.dim() != spec_y.dim() {
        return Err(Error::DimMismatch {
            left: spec_x.dim(),
            right: spec_y.dim(),
        });
    }
    let dim = spec_x.dim();
    let k = REPLICATES as u64;
    let per_rep = n / k;
    let diffs: Vec<Result<f64>> = (0..k)
        .into_par_iter()
        .map(|r| {
            let base = r * REPLICATE_STRIDE;
            let mut xi = vec![0.0; CHUNK_ROWS * dim];
            let mut xrow = vec![0.0; dim];
            let mut yrow = vec![0.0; dim];
            let mut acc_x: Option<MomentAccum> = None;
            let mut acc_y: Option<MomentAccum> = None;
            let mut remaining = per_rep;
            let mut sub = 0u64;
            let mut index = r * per_rep;
            while remaining > 0 {
                let rows = (CHUNK_ROWS as u64).min(remaining) as usize;
                let buf = &mut xi[..rows * dim];
                standard_normal_chunk(seed, base + sub, buf);
                for noise in buf.chunks(dim) {
                    crate::gaussian::lower_tri_mul(spec_x.factor(), noise, &mut xrow);
                    crate::gaussian::lower_tri_mul(spec_y.factor(), noise, &mut yrow);
                    let fx = f(&xrow);
                    let fy = f(&yrow);
                    acc_x
                        .get_or_insert_with(|| MomentAccum::new(fx))
                        .push(fx, index);
                    acc_y
                        .get_or_insert_with(|| MomentAccum::new(fy))
                        .push(fy, index);
                    index += 1;
                }
                remaining -= rows as u64;
                sub += 1;
            }
            let ax = acc_x.expect("per_rep >= 2");
            let ay = acc_y.expect("per_rep >= 2");
            if let Some(idx) = ax.nonfinite_at.or(ay.nonfinite_at) {
                return Err(nonfinite_error("paired functional", idx));
            }
            Ok(ay.sample_variance() - ax.sample_variance())
        })
        .collect();
    let mut values = Vec::with_capacity(diffs.len());
    for d in diffs {
        values.push(d?);
    }
    let (mean, se) = mean_and_se(&values);
    Ok(PairedEstimate {
        diff_value: mean,
        diff_std_error: se,
        n: per_rep * k,
        replicates: REPLICATES,
    })
}

/// Mean and standard error (sd/√k) of replicate values.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Runs `k` independent replicates of `n / k` rows each and applies `stat` to
/// every materialized replicate (row-major data of the source's dimension),
/// returning the k-by-m matrix of replicate statistics.
///
/// Used for statistics whose delta-method standard error would be fragile:
/// ratio estimates, importance-sampled means, per-node interpolation
/// integrands.
pub fn replicated_stats<S, F>(
    source: &S,
    n: u64,
    k: u32,
    seed: u64,
    stat: F,
) -> Result<Vec<Vec<f64>>>
where
    S: GaussianSource,
    F: Fn(&[f64], usize) -> Vec<f64> + Sync,
{
    validate_n(n)?;
    let dim = source.dim();
    let per_rep = (n / k as u64) as usize;
    if per_rep < 2 {
        return Err(Error::InvalidParam(format!(
            "n = {n} too small for {k} replicates"
        )));
    }
    let rows: Vec<Result<Vec<f64>>> = (0..k as u64)
        .into_par_iter()
        .map(|r| {
            let base = r * REPLICATE_STRIDE;
            let mut buf = vec![0.0; per_rep * dim];
            for (c, sub) in buf.chunks_mut(CHUNK_ROWS * dim).enumerate() {
                source.fill_chunk(seed, base + c as u64, sub);
            }
            let out = stat(&buf, dim);
            if let Some(pos) = out.iter().position(|v| !v.is_finite()) {
                return Err(nonfinite_error("replicate statistic", pos as u64));
            }
            Ok(out)
        })
        .collect();
    let mut matrix = Vec::with_capacity(k as usize);
    for row in rows {
        matrix.push(row?);
    }
    Ok(matrix)
}

/// Column-wise mean ± standard error of a replicate matrix.
pub fn column_mean_se(matrix: &[Vec<f64>], col: usize) -> (f64, f64) {
    let column: Vec<f64> = matrix.iter().map(|row| row[col]).collect();
    mean_and_se(&column)
}
