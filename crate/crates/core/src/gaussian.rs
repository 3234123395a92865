//! Correlated Gaussian vectors: spec construction, validation, Cholesky
//! factorization, and deterministic sampling.
//!
//! Sampling is chunked: chunk `c` of any stream is generated from a ChaCha
//! stream keyed by `(seed, c)`, so regenerating with the same seed yields
//! bit-identical output no matter how the chunks are scheduled across threads.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Hard cap on vector dimension; all experiments run at desk scale.
pub const MAX_DIM: usize = 64;

/// Rows per generation chunk. Fixed so that parallel and serial generation
/// agree bit-for-bit.
pub const CHUNK_ROWS: usize = 8192;

/// Eigenvalue tolerance below which a symmetric matrix is rejected as not PSD.
pub const PSD_TOL: f64 = 1e-12;

/// Jitter added to the diagonal (once) when the plain Cholesky fails.
pub const PSD_JITTER: f64 = 1e-12;

fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A unit-diagonal correlation matrix together with its cached lower-triangular
/// factor `L` satisfying `L Lᵀ ≈ entries`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpec {
    dim: usize,
    entries: DMatrix<f64>,
    factor: DMatrix<f64>,
    psd_jitter_used: f64,
    hash: u64,
}

impl CorrelationSpec {
    /// Builds a unit-diagonal correlation spec from its off-diagonal entries.
    ///
    /// Indices are 0-based; each `(i, j, value)` sets both `σ_ij` and `σ_ji`.
    pub fn new(dim: usize, off_diagonal: &[(usize, usize, f64)]) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParam(format!("dim must be >= 2, got {dim}")));
        }
        if dim > MAX_DIM {
            return Err(Error::InvalidParam(format!(
                "dim must be <= {MAX_DIM}, got {dim}"
            )));
        }
        let mut entries = DMatrix::<f64>::identity(dim, dim);
        for &(i, j, value) in off_diagonal {
            if i >= dim || j >= dim || i == j {
                return Err(Error::IndexError { i, j, dim });
            }
            if !value.is_finite() || value.abs() > 1.0 {
                return Err(Error::InvalidParam(format!(
                    "correlation ({i}, {j}) = {value} outside [-1, 1]"
                )));
            }
            entries[(i, j)] = value;
            entries[(j, i)] = value;
        }
        Self::from_entries(entries)
    }

    /// Identity correlation (independent standard coordinates).
    pub fn identity(dim: usize) -> Self {
        Self::new(dim, &[]).expect("identity spec is always valid")
    }

    /// The single-pair family: `σ_01 = rho`, all other off-diagonals zero.
    pub fn single_pair(dim: usize, rho: f64) -> Result<Self> {
        Self::new(dim, &[(0, 1, rho)])
    }

    /// Validates and factors a symmetric unit-diagonal matrix.
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        let dim = entries.nrows();
        if dim != entries.ncols() || !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidParam(format!(
                "entries must be square with dim in [2, {MAX_DIM}]"
            )));
        }
        for i in 0..dim {
            if (entries[(i, i)] - 1.0).abs() > 1e-14 {
                return Err(Error::InvalidParam(format!(
                    "diagonal entry ({i}, {i}) = {} != 1",
                    entries[(i, i)]
                )));
            }
            for j in 0..i {
                if entries[(i, j)] != entries[(j, i)] {
                    return Err(Error::InvalidParam(format!(
                        "entries not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let min_eig = min_eigenvalue(&entries);
        if min_eig < -PSD_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: min_eig,
            });
        }
        let (factor, psd_jitter_used) = factor_with_jitter(&entries, min_eig)?;
        let hash = spec_hash(&entries);
        Ok(Self {
            dim,
            entries,
            factor,
            psd_jitter_used,
            hash,
        })
    }

    /// Entrywise convex combination `(1-theta)·self + theta·other`.
    ///
    /// The diagonal stays exactly 1; only off-diagonals are interpolated, so
    /// the endpoints reproduce the inputs bit-for-bit.
    pub fn interpolate(&self, other: &CorrelationSpec, theta: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParam(format!(
                "theta = {theta} outside [0, 1]"
            )));
        }
        if theta == 0.0 {
            return Ok(self.clone());
        }
        if theta == 1.0 {
            return Ok(other.clone());
        }
        let mut entries = DMatrix::<f64>::identity(self.dim, self.dim);
        for i in 0..self.dim {
            for j in 0..i {
                let v = (1.0 - theta) * self.entries[(i, j)] + theta * other.entries[(i, j)];
                entries[(i, j)] = v;
                entries[(j, i)] = v;
            }
        }
        Self::from_entries(entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Lower-triangular factor with `L Lᵀ ≈ entries` (within 1e-10 per entry).
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn psd_jitter_used(&self) -> f64 {
        self.psd_jitter_used
    }

    /// Digest of the entries, stored in batches for provenance.
    pub fn spec_hash(&self) -> u64 {
        self.hash
    }

    /// Draws `count` i.i.d. rows from `Normal(0, entries)`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<SampleBatch> {
        if count == 0 {
            return Err(Error::InvalidParam("count must be >= 1".into()));
        }
        let dim = self.dim;
        let mut data = vec![0.0; count * dim];
        let chunks: Vec<_> = data.chunks_mut(CHUNK_ROWS * dim).collect();
        use rayon::prelude::*;
        chunks
            .into_par_iter()
            .enumerate()
            .for_each(|(c, out)| self.fill_chunk(seed, c as u64, out));
        Ok(SampleBatch {
            dim,
            count,
            data,
            seed,
            spec_hash: self.hash,
        })
    }

    /// Fills `out` (row-major, `out.len()` divisible by `dim`) with the rows of
    /// chunk `chunk` of the stream keyed by `seed`.
    pub fn fill_chunk(&self, seed: u64, chunk: u64, out: &mut [f64]) {
        debug_assert_eq!(out.len() % self.dim, 0);
        let mut rng = chunk_rng(seed, chunk);
        let mut xi = vec![0.0; self.dim];
        for row in out.chunks_mut(self.dim) {
            for x in xi.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            lower_tri_mul(&self.factor, &xi, row);
        }
    }

    /// Draws a coupled pair `(G_b, H_b)` with block covariance
    /// `[[C, bC], [bC, C]]` via `G = Lξ`, `H = L(bξ + √(1-b²)η)`.
    pub fn sample_coupled(&self, b: f64, count: usize, seed: u64) -> Result<CoupledBatch> {
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::InvalidParam(format!("b = {b} outside [0, 1]")));
        }
        if count == 0 {
            return Err(Error::InvalidParam("count must be >= 1".into()));
        }
        let dim = self.dim;
        let mut g_data = vec![0.0; count * dim];
        let mut h_data = vec![0.0; count * dim];
        let g_chunks: Vec<_> = g_data.chunks_mut(CHUNK_ROWS * dim).collect();
        let h_chunks: Vec<_> = h_data.chunks_mut(CHUNK_ROWS * dim).collect();
        use rayon::prelude::*;
        g_chunks
            .into_par_iter()
            .zip(h_chunks)
            .enumerate()
            .for_each(|(c, (gout, hout))| self.fill_coupled_chunk(b, seed, c as u64, gout, hout));
        Ok(CoupledBatch {
            dim,
            count,
            g_data,
            h_data,
            b,
            seed,
        })
    }

    /// Chunked generator behind [`sample_coupled`](Self::sample_coupled).
    pub fn fill_coupled_chunk(
        &self,
        b: f64,
        seed: u64,
        chunk: u64,
        gout: &mut [f64],
        hout: &mut [f64],
    ) {
        debug_assert_eq!(gout.len(), hout.len());
        let dim = self.dim;
        let mut rng = chunk_rng(seed, chunk);
        let mut xi = vec![0.0; dim];
        let mut eta = vec![0.0; dim];
        let mut mixed = vec![0.0; dim];
        let root = (1.0 - b * b).sqrt();
        for (grow, hrow) in gout.chunks_mut(dim).zip(hout.chunks_mut(dim)) {
            for x in xi.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            for e in eta.iter_mut() {
                *e = rng.sample(StandardNormal);
            }
            lower_tri_mul(&self.factor, &xi, grow);
            if b == 1.0 {
                hrow.copy_from_slice(grow);
            } else {
                for k in 0..dim {
                    mixed[k] = b * xi[k] + root * eta[k];
                }
                lower_tri_mul(&self.factor, &mixed, hrow);
            }
        }
    }
}

/// Fills `out` with standard normal draws from the chunk stream keyed by
/// `(seed, stream)`; the draw order matches the per-row order used by
/// [`CorrelationSpec::fill_chunk`].
pub fn standard_normal_chunk(seed: u64, stream: u64, out: &mut [f64]) {
    let mut rng = chunk_rng(seed, stream);
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

/// `y = L x` for lower-triangular `L`.
pub(crate) fn lower_tri_mul(l: &DMatrix<f64>, x: &[f64], y: &mut [f64]) {
    let n = x.len();
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..=i {
            acc += l[(i, j)] * x[j];
        }
        y[i] = acc;
    }
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Cholesky with a single jitter retry. `min_eig` has already been checked
/// against [`PSD_TOL`].
fn factor_with_jitter(entries: &DMatrix<f64>, min_eig: f64) -> Result<(DMatrix<f64>, f64)> {
    if let Some(chol) = nalgebra::Cholesky::new(entries.clone()) {
        return Ok((chol.unpack(), 0.0));
    }
    let dim = entries.nrows();
    let jittered = entries + DMatrix::<f64>::identity(dim, dim) * PSD_JITTER;
    if let Some(chol) = nalgebra::Cholesky::new(jittered) {
        return Ok((chol.unpack(), PSD_JITTER));
    }
    Err(Error::NotPsd {
        min_eigenvalue: min_eig,
    })
}

/// Factors a matrix from the explorer's projection path. Falls back to a
/// clipped eigen-decomposition re-triangularized by LQ when Cholesky fails
/// even with jitter; only near-singular projected matrices take that route.
pub(crate) fn spec_from_projected(entries: DMatrix<f64>) -> Result<CorrelationSpec> {
    match CorrelationSpec::from_entries(entries.clone()) {
        Ok(spec) => Ok(spec),
        Err(Error::NotPsd { .. }) => {
            let dim = entries.nrows();
            let eig = entries.clone().symmetric_eigen();
            let sqrt_vals =
                DVector::from_iterator(dim, eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()));
            // F = Q sqrt(Λ); L from LQ(F) keeps L Lᵀ = F Fᵀ = clipped entries.
            let mut f = eig.eigenvectors.clone();
            for (c, s) in sqrt_vals.iter().enumerate() {
                f.column_mut(c).scale_mut(*s);
            }
            let qr = f.transpose().qr();
            let mut factor = qr.r().transpose();
            for c in 0..dim {
                if factor[(c, c)] < 0.0 {
                    factor.column_mut(c).neg_mut();
                }
            }
            let hash = spec_hash(&entries);
            Ok(CorrelationSpec {
                dim,
                entries,
                factor,
                psd_jitter_used: 0.0,
                hash,
            })
        }
        Err(e) => Err(e),
    }
}

fn spec_hash(entries: &DMatrix<f64>) -> u64 {
    // FNV-1a over the dimension and raw entry bytes.
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    eat(&(entries.nrows() as u64).to_le_bytes());
    for v in entries.iter() {
        eat(&v.to_le_bytes());
    }
    h
}

/// A materialized batch of draws, row-major.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub dim: usize,
    pub count: usize,
    pub data: Vec<f64>,
    pub seed: u64,
    pub spec_hash: u64,
}

impl SampleBatch {
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// A coupled pair of batches sharing the underlying noise through the
/// coupling parameter `b`.
#[derive(Debug, Clone)]
pub struct CoupledBatch {
    pub dim: usize,
    pub count: usize,
    pub g_data: Vec<f64>,
    pub h_data: Vec<f64>,
    pub b: f64,
    pub seed: u64,
}

impl CoupledBatch {
    pub fn rows(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.g_data
            .chunks(self.dim)
            .zip(self.h_data.chunks(self.dim))
    }
}

/// Anything the estimators can draw correlated Gaussian rows from.
///
/// The two implementations are [`CorrelationSpec`] itself and
/// [`ScaledSource`], the variance-scaling wrapper used by the leader-event
/// covariance checks (where `c_11 <= 1` breaks the unit-diagonal invariant).
pub trait GaussianSource: Sync {
    fn dim(&self) -> usize;
    fn fill_chunk(&self, seed: u64, chunk: u64, out: &mut [f64]);
}

impl GaussianSource for CorrelationSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn fill_chunk(&self, seed: u64, chunk: u64, out: &mut [f64]) {
        CorrelationSpec::fill_chunk(self, seed, chunk, out)
    }
}

/// Per-coordinate standard-deviation scaling of a base spec, giving
/// `Normal(0, D·Σ·D)` with `D = diag(col_std)`.
pub struct ScaledSource<'a> {
    pub spec: &'a CorrelationSpec,
    pub col_std: Vec<f64>,
}

impl<'a> ScaledSource<'a> {
    pub fn new(spec: &'a CorrelationSpec, col_std: Vec<f64>) -> Result<Self> {
        if col_std.len() != spec.dim() {
            return Err(Error::DimMismatch {
                left: spec.dim(),
                right: col_std.len(),
            });
        }
        if col_std.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::InvalidParam("column scales must be positive".into()));
        }
        Ok(Self { spec, col_std })
    }
}

impl GaussianSource for ScaledSource<'_> {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn fill_chunk(&self, seed: u64, chunk: u64, out: &mut [f64]) {
        self.spec.fill_chunk(seed, chunk, out);
        let dim = self.spec.dim();
        for row in out.chunks_mut(dim) {
            for (v, s) in row.iter_mut().zip(&self.col_std) {
                *v *= s;
            }
        }
    }
}
