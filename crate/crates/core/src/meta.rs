//! Empirical meta distribution of the SINR and its moment-matched Beta
//! approximation.
//!
//! The meta distribution at reliability level `p` is the fraction of
//! interferer realizations whose conditional success is at least `p`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::beta_reg;

/// Conditional success probabilities, one per realization, at a fixed threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeta {
    samples: Vec<f64>,
    sorted: Vec<f64>,
    pub beta_db: f64,
}

impl EmpiricalMeta {
    pub fn new(samples: Vec<f64>, beta_db: f64) -> Result<Self> {
        if let Some(bad) = samples.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return domain(format!("conditional success sample {bad} outside [0, 1]"));
        }
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(EmpiricalMeta {
            samples,
            sorted,
            beta_db,
        })
    }

    /// Samples in realization order.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn require_samples(&self) -> Result<()> {
        if self.samples.is_empty() {
            return domain("the sample set is empty");
        }
        Ok(())
    }

    pub fn mean(&self) -> Result<f64> {
        self.require_samples()?;
        Ok(self.samples.iter().sum::<f64>() / self.samples.len() as f64)
    }

    /// Unbiased sample variance (divides by `N - 1`).
    pub fn variance(&self) -> Result<f64> {
        if self.samples.len() < 2 {
            return domain("the variance needs at least two samples");
        }
        let mean = self.mean()?;
        let ss: f64 = self.samples.iter().map(|x| (x - mean).powi(2)).sum();
        Ok(ss / (self.samples.len() - 1) as f64)
    }

    /// Fraction of samples `>= p`.
    pub fn survival(&self, p: f64) -> Result<f64> {
        self.require_samples()?;
        let below = self.sorted.partition_point(|&x| x < p);
        Ok((self.sorted.len() - below) as f64 / self.sorted.len() as f64)
    }
}

pub fn empirical_meta_cdf(meta: &EmpiricalMeta, p: f64) -> Result<f64> {
    meta.survival(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub a: f64,
    pub b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return domain(format!("Beta parameters must be positive, got a={a}, b={b}"));
        }
        Ok(BetaParams { a, b })
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn variance(&self) -> f64 {
        let s = self.a + self.b;
        self.a * self.b / (s * s * (s + 1.0))
    }

    /// Beta parameters with the given mean and variance.
    pub fn from_moments(mean: f64, variance: f64) -> Result<Self> {
        if !(mean > 0.0 && mean < 1.0) {
            return Err(Error::DegenerateFit(format!("sample mean is {mean}")));
        }
        if !(variance > 0.0) {
            return Err(Error::DegenerateFit("all samples are equal".into()));
        }
        let bound = mean * (1.0 - mean);
        if variance >= bound {
            return Err(Error::InfeasibleMoments { mean, variance, bound });
        }
        let odds = (1.0 - mean) / mean;
        let a = mean * (bound / variance - 1.0);
        BetaParams::new(a, odds * a)
    }
}

/// Method-of-moments Beta fit: `a = x̄ (x̄(1 - x̄)/v - 1)`, `b = a (1 - x̄)/x̄`.
pub fn fit_beta_moments(meta: &EmpiricalMeta) -> Result<BetaParams> {
    if meta.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least two samples, got {}",
            meta.len()
        )));
    }
    if meta.sorted[0] == meta.sorted[meta.len() - 1] {
        return Err(Error::DegenerateFit("all samples are equal".into()));
    }
    BetaParams::from_moments(meta.mean()?, meta.variance()?)
}

/// `P(X >= p)` for `X ~ Beta(a, b)`, i.e. `1 - I_p(a, b)`.
pub fn beta_cdf_complement(params: &BetaParams, p: f64) -> f64 {
    1.0 - beta_reg(params.a, params.b, p.clamp(0.0, 1.0))
}

/// Fraction of samples whose conditional outage `1 - x` lies in `[low, high]`.
pub fn bimodality_gap(meta: &EmpiricalMeta, low: f64, high: f64) -> Result<f64> {
    meta.require_samples()?;
    if !(0.0 <= low && low < high && high <= 1.0) {
        return domain(format!(
            "outage interval [{low}, {high}] must satisfy 0 <= low < high <= 1"
        ));
    }
    let hits = meta
        .samples
        .iter()
        .filter(|&&x| (low..=high).contains(&(1.0 - x)))
        .count();
    Ok(hits as f64 / meta.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Beta, Distribution};

    fn meta(xs: &[f64]) -> EmpiricalMeta {
        EmpiricalMeta::new(xs.to_vec(), 8.0).unwrap()
    }

    fn beta_samples(a: f64, b: f64, n: usize, seed: u64) -> EmpiricalMeta {
        let d = Beta::new(a, b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        EmpiricalMeta::new((0..n).map(|_| d.sample(&mut rng)).collect(), 8.0).unwrap()
    }

    #[test]
    fn cdf_examples() {
        let m = meta(&[0.2, 0.8, 0.9]);
        assert!((empirical_meta_cdf(&m, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(empirical_meta_cdf(&m, 0.0).unwrap(), 1.0);
        assert_eq!(empirical_meta_cdf(&m, 0.9).unwrap(), 1.0 / 3.0);
        assert_eq!(empirical_meta_cdf(&m, 0.95).unwrap(), 0.0);
        assert!(empirical_meta_cdf(&meta(&[]), 0.5).is_err());
        assert!(EmpiricalMeta::new(vec![1.1], 8.0).is_err());
    }

    #[test]
    fn gap_examples() {
        assert_eq!(bimodality_gap(&meta(&[0.99, 0.98, 0.05]), 0.1, 0.5).unwrap(), 0.0);
        assert!((bimodality_gap(&meta(&[0.99, 0.5, 0.05]), 0.1, 0.9).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(bimodality_gap(&meta(&[]), 0.1, 0.5).is_err());
        assert!(bimodality_gap(&meta(&[0.5]), 0.5, 0.1).is_err());
    }

    #[test]
    fn tail_examples() {
        let u = BetaParams::new(1.0, 1.0).unwrap();
        assert!((beta_cdf_complement(&u, 0.3) - 0.7).abs() < 1e-14);
        let s = BetaParams::new(2.0, 2.0).unwrap();
        assert!((beta_cdf_complement(&s, 0.5) - 0.5).abs() < 1e-14);
        let b = BetaParams::new(2.0, 5.0).unwrap();
        assert!((beta_cdf_complement(&b, 0.5) - 0.109_375).abs() < 1e-13);
        for p in [u, s, b] {
            assert_eq!(beta_cdf_complement(&p, 0.0), 1.0);
            assert_eq!(beta_cdf_complement(&p, 1.0), 0.0);
        }
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            fit_beta_moments(&meta(&[0.4, 0.4, 0.4])),
            Err(Error::DegenerateFit(_))
        ));
        assert!(matches!(
            fit_beta_moments(&meta(&[1.0, 1.0])),
            Err(Error::DegenerateFit(_))
        ));
        assert!(matches!(fit_beta_moments(&meta(&[0.3])), Err(Error::DegenerateFit(_))));
        assert!(matches!(
            fit_beta_moments(&meta(&[0.0, 1.0, 0.0, 1.0])),
            Err(Error::InfeasibleMoments { .. })
        ));
        assert!(matches!(
            BetaParams::from_moments(0.5, 0.25),
            Err(Error::InfeasibleMoments { .. })
        ));
        let p = BetaParams::from_moments(0.5, 1.0 / 12.0).unwrap();
        assert!((p.a - 1.0).abs() < 1e-12 && (p.b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_recovers_beta_one_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xs: Vec<f64> = (0..200_000).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
        let fit = fit_beta_moments(&meta(&xs)).unwrap();
        assert!((fit.a - 1.0).abs() < 0.03 && (fit.b - 1.0).abs() < 0.03, "{fit:?}");
    }

    #[test]
    fn recovers_beta_two_five() {
        let fit = fit_beta_moments(&beta_samples(2.0, 5.0, 1_000_000, 5)).unwrap();
        assert!((fit.a - 2.0).abs() < 0.05, "{fit:?}");
        assert!((fit.b - 5.0).abs() < 0.12, "{fit:?}");
    }

    #[test]
    fn moments_match_exactly() {
        let m = beta_samples(0.3, 0.05, 10_000, 17);
        let fit = fit_beta_moments(&m).unwrap();
        let (mean, var) = (m.mean().unwrap(), m.variance().unwrap());
        assert!((fit.mean() / mean - 1.0).abs() < 1e-10);
        assert!((fit.variance() / var - 1.0).abs() < 1e-6);
        assert!((fit.b - fit.a * (1.0 - mean) / mean).abs() < 1e-12 * fit.b);
    }

    #[test]
    fn recovers_parameter_grid() {
        let grid = [0.5, 1.0, 2.0, 5.0];
        let mut seed = 100;
        for &a in &grid {
            for &b in &grid {
                seed += 1;
                let fit = fit_beta_moments(&beta_samples(a, b, 100_000, seed)).unwrap();
                assert!((fit.a / a - 1.0).abs() < 0.05, "a: {fit:?} vs ({a}, {b})");
                assert!((fit.b / b - 1.0).abs() < 0.05, "b: {fit:?} vs ({a}, {b})");
            }
        }
    }

    proptest! {
        #[test]
        fn survival_is_valid(xs in prop::collection::vec(0.0f64..=1.0, 1..60), ps in prop::collection::vec(0.0f64..=1.0, 2..20)) {
            let m = meta(&xs);
            prop_assert_eq!(m.survival(0.0).unwrap(), 1.0);
            let mut ps = ps;
            ps.sort_by(f64::total_cmp);
            let vals: Vec<f64> = ps.iter().map(|&p| m.survival(p).unwrap()).collect();
            for w in vals.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
            for (&p, &v) in ps.iter().zip(&vals) {
                let brute = xs.iter().filter(|&&x| x >= p).count() as f64 / xs.len() as f64;
                prop_assert_eq!(v, brute);
            }
        }

        #[test]
        fn beta_tail_is_non_increasing(a in 0.05f64..10.0, b in 0.05f64..10.0, p in 0.0f64..1.0, dp in 0.0f64..0.5) {
            let params = BetaParams::new(a, b).unwrap();
            let q = (p + dp).min(1.0);
            prop_assert!(beta_cdf_complement(&params, q) <= beta_cdf_complement(&params, p) + 1e-12);
        }
    }
}
