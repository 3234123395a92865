//! Compensated power-sum accumulators for streaming moment estimation.
//!
//! Values are accumulated relative to a fixed shift (the first evaluation of
//! the stream) so that central-moment conversion never cancels catastrophically,
//! and with Neumaier compensation so that chunk merge order cannot change the
//! result beyond the deterministic chunk layout.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: CompensatedSum) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Power sums of a single shifted stream, up to fourth order.
#[derive(Debug, Clone)]
pub struct MomentAccum {
    pub shift: f64,
    pub n: u64,
    s1: CompensatedSum,
    s2: CompensatedSum,
    s3: CompensatedSum,
    s4: CompensatedSum,
    /// Index of the first non-finite value seen, if any.
    pub nonfinite_at: Option<u64>,
}

impl MomentAccum {
    pub fn new(shift: f64) -> Self {
        Self {
            shift,
            n: 0,
            s1: CompensatedSum::default(),
            s2: CompensatedSum::default(),
            s3: CompensatedSum::default(),
            s4: CompensatedSum::default(),
            nonfinite_at: None,
        }
    }

    pub fn push(&mut self, value: f64, index: u64) {
        if !value.is_finite() && self.nonfinite_at.is_none() {
            self.nonfinite_at = Some(index);
        }
        let u = value - self.shift;
        let u2 = u * u;
        self.s1.add(u);
        self.s2.add(u2);
        self.s3.add(u2 * u);
        self.s4.add(u2 * u2);
        self.n += 1;
    }

    /// Merges an accumulator that used the same shift.
    pub fn merge(&mut self, other: &MomentAccum) {
        debug_assert_eq!(self.shift, other.shift);
        self.n += other.n;
        self.s1.merge(other.s1);
        self.s2.merge(other.s2);
        self.s3.merge(other.s3);
        self.s4.merge(other.s4);
        if self.nonfinite_at.is_none() {
            self.nonfinite_at = other.nonfinite_at;
        }
    }

    pub fn mean(&self) -> f64 {
        self.shift + self.s1.value() / self.n as f64
    }

    /// Biased (divisor n) central moments of order 2 and 4.
    pub fn central_m2_m4(&self) -> (f64, f64) {
        let n = self.n as f64;
        let a1 = self.s1.value() / n;
        let a2 = self.s2.value() / n;
        let a3 = self.s3.value() / n;
        let a4 = self.s4.value() / n;
        let m2 = (a2 - a1 * a1).max(0.0);
        let m4 = (a4 - 4.0 * a1 * a3 + 6.0 * a1 * a1 * a2 - 3.0 * a1.powi(4)).max(0.0);
        (m2, m4)
    }

    /// Unbiased sample variance.
    pub fn sample_variance(&self) -> f64 {
        let n = self.n as f64;
        let (m2, _) = self.central_m2_m4();
        m2 * n / (n - 1.0)
    }
}

/// Joint power sums of two shifted streams, up to the (2,2) mixed moment.
#[derive(Debug, Clone)]
pub struct BivariateAccum {
    pub shift_f: f64,
    pub shift_g: f64,
    pub n: u64,
    sf: CompensatedSum,
    sg: CompensatedSum,
    sff: CompensatedSum,
    sgg: CompensatedSum,
    sfg: CompensatedSum,
    sffg: CompensatedSum,
    sfgg: CompensatedSum,
    sffgg: CompensatedSum,
    pub nonfinite_at: Option<u64>,
}

impl BivariateAccum {
    pub fn new(shift_f: f64, shift_g: f64) -> Self {
        Self {
            shift_f,
            shift_g,
            n: 0,
            sf: CompensatedSum::default(),
            sg: CompensatedSum::default(),
            sff: CompensatedSum::default(),
            sgg: CompensatedSum::default(),
            sfg: CompensatedSum::default(),
            sffg: CompensatedSum::default(),
            sfgg: CompensatedSum::default(),
            sffgg: CompensatedSum::default(),
            nonfinite_at: None,
        }
    }

    pub fn push(&mut self, f: f64, g: f64, index: u64) {
        if (!f.is_finite() || !g.is_finite()) && self.nonfinite_at.is_none() {
            self.nonfinite_at = Some(index);
        }
        let u = f - self.shift_f;
        let v = g - self.shift_g;
        self.sf.add(u);
        self.sg.add(v);
        self.sff.add(u * u);
        self.sgg.add(v * v);
        self.sfg.add(u * v);
        self.sffg.add(u * u * v);
        self.sfgg.add(u * v * v);
        self.sffgg.add(u * u * v * v);
        self.n += 1;
    }

    pub fn merge(&mut self, other: &BivariateAccum) {
        debug_assert_eq!(self.shift_f, other.shift_f);
        debug_assert_eq!(self.shift_g, other.shift_g);
        self.n += other.n;
        self.sf.merge(other.sf);
        self.sg.merge(other.sg);
        self.sff.merge(other.sff);
        self.sgg.merge(other.sgg);
        self.sfg.merge(other.sfg);
        self.sffg.merge(other.sffg);
        self.sfgg.merge(other.sfgg);
        self.sffgg.merge(other.sffgg);
        if self.nonfinite_at.is_none() {
            self.nonfinite_at = other.nonfinite_at;
        }
    }

    /// Central covariance m11 and the central (2,2) moment m22.
    pub fn central_m11_m22(&self) -> (f64, f64) {
        let n = self.n as f64;
        let a10 = self.sf.value() / n;
        let a01 = self.sg.value() / n;
        let a20 = self.sff.value() / n;
        let a02 = self.sgg.value() / n;
        let a11 = self.sfg.value() / n;
        let a21 = self.sffg.value() / n;
        let a12 = self.sfgg.value() / n;
        let a22 = self.sffgg.value() / n;
        let m11 = a11 - a10 * a01;
        let m22 = a22 - 2.0 * a01 * a21 - 2.0 * a10 * a12
            + a01 * a01 * a20
            + a10 * a10 * a02
            + 4.0 * a10 * a01 * a11
            - 3.0 * a10 * a10 * a01 * a01;
        (m11, m22.max(0.0))
    }

    /// Unbiased sample covariance.
    pub fn sample_covariance(&self) -> f64 {
        let n = self.n as f64;
        let (m11, _) = self.central_m11_m22();
        m11 * n / (n - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_pass_m2_m4(values: &[f64]) -> (f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        (m2, m4)
    }

    fn two_pass_m11_m22(f: &[f64], g: &[f64]) -> (f64, f64) {
        let n = f.len() as f64;
        let mf = f.iter().sum::<f64>() / n;
        let mg = g.iter().sum::<f64>() / n;
        let m11 = f
            .iter()
            .zip(g)
            .map(|(a, b)| (a - mf) * (b - mg))
            .sum::<f64>()
            / n;
        let m22 = f
            .iter()
            .zip(g)
            .map(|(a, b)| (a - mf).powi(2) * (b - mg).powi(2))
            .sum::<f64>()
            / n;
        (m11, m22)
    }

    #[test]
    fn univariate_matches_two_pass() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let values: Vec<f64> = (0..5000)
            .map(|_| 10.0 + rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let mut acc = MomentAccum::new(values[0]);
        for (i, v) in values.iter().enumerate() {
            acc.push(*v, i as u64);
        }
        let (m2, m4) = acc.central_m2_m4();
        let (t2, t4) = two_pass_m2_m4(&values);
        assert!((m2 - t2).abs() <= 1e-12 * t2.max(1.0));
        assert!((m4 - t4).abs() <= 1e-12 * t4.max(1.0));
        assert!((acc.mean() - values.iter().sum::<f64>() / 5000.0).abs() <= 1e-12);
    }

    #[test]
    fn merge_equals_single_pass() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let values: Vec<f64> = (0..4000).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let shift = values[0];
        let mut whole = MomentAccum::new(shift);
        for (i, v) in values.iter().enumerate() {
            whole.push(*v, i as u64);
        }
        let mut left = MomentAccum::new(shift);
        let mut right = MomentAccum::new(shift);
        for (i, v) in values.iter().enumerate() {
            if i < 1500 {
                left.push(*v, i as u64);
            } else {
                right.push(*v, i as u64);
            }
        }
        left.merge(&right);
        let (a2, a4) = whole.central_m2_m4();
        let (b2, b4) = left.central_m2_m4();
        assert!((a2 - b2).abs() <= 1e-13);
        assert!((a4 - b4).abs() <= 1e-13);
    }

    #[test]
    fn bivariate_matches_two_pass() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let f: Vec<f64> = (0..5000)
            .map(|_| 3.0 + rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let g: Vec<f64> = f
            .iter()
            .map(|v| 0.5 * v + rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let mut acc = BivariateAccum::new(f[0], g[0]);
        for i in 0..f.len() {
            acc.push(f[i], g[i], i as u64);
        }
        let (m11, m22) = acc.central_m11_m22();
        let (t11, t22) = two_pass_m11_m22(&f, &g);
        assert!((m11 - t11).abs() <= 1e-11);
        assert!((m22 - t22).abs() <= 1e-11 * t22.max(1.0));
    }

    #[test]
    fn constant_stream_has_zero_moments() {
        let mut acc = MomentAccum::new(7.0);
        for i in 0..100 {
            acc.push(7.0, i);
        }
        assert_eq!(acc.mean(), 7.0);
        let (m2, m4) = acc.central_m2_m4();
        assert_eq!(m2, 0.0);
        assert_eq!(m4, 0.0);
    }

    #[test]
    fn nonfinite_index_recorded() {
        let mut acc = MomentAccum::new(0.0);
        acc.push(1.0, 0);
        acc.push(f64::NAN, 1);
        acc.push(2.0, 2);
        assert_eq!(acc.nonfinite_at, Some(1));
    }
}
