use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// One-sample t-test of `mean > 0` (for paired data, run it on the
/// differences).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub n: usize,
    pub mean: f64,
    pub std_err: f64,
    /// `None` when fewer than two samples or zero spread.
    pub t: Option<f64>,
    /// One-sided p-value `P(T ≥ t)`.
    pub p_one_sided: Option<f64>,
    /// One-sided critical value at α = 0.05.
    pub critical_05: Option<f64>,
}

impl TTest {
    pub fn of(samples: &[f64]) -> TTest {
        let n = samples.len();
        let mean = if n == 0 { 0.0 } else { samples.iter().sum::<f64>() / n as f64 };
        if n < 2 {
            return TTest { n, mean, std_err: 0.0, t: None, p_one_sided: None, critical_05: None };
        }
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std_err = (var / n as f64).sqrt();
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("dof ≥ 1");
        let critical_05 = Some(dist.inverse_cdf(0.95));
        if std_err == 0.0 {
            return TTest { n, mean, std_err, t: None, p_one_sided: None, critical_05 };
        }
        let t = mean / std_err;
        TTest { n, mean, std_err, t: Some(t), p_one_sided: Some(1.0 - dist.cdf(t)), critical_05 }
    }

    /// Paired test of `a > b`.
    pub fn paired(a: &[f64], b: &[f64]) -> TTest {
        assert_eq!(a.len(), b.len(), "paired samples");
        let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        TTest::of(&diffs)
    }

    /// True when `mean > 0` is significant at one-sided α.
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_one_sided.is_some_and(|p| p < alpha) || (self.t.is_none() && self.n >= 2 && self.mean > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_t_statistic() {
        let t = TTest::of(&[1.0, 2.0, 3.0, 2.0]);
        assert!((t.mean - 2.0).abs() < 1e-12);
        let sd = (2.0f64 / 3.0).sqrt();
        assert!((t.t.unwrap() - 2.0 / (sd / 2.0)).abs() < 1e-9);
        assert!(t.significant(0.05));
        assert!((t.critical_05.unwrap() - 2.353363).abs() < 1e-5);
    }

    #[test]
    fn degenerate_samples() {
        assert_eq!(TTest::of(&[]).t, None);
        assert_eq!(TTest::of(&[1.0]).t, None);
        assert!(!TTest::of(&[0.0, 0.0, 0.0]).significant(0.05));
    }
}
