use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest {
    pub t: f64,
    /// Two-tailed.
    pub p: f64,
    pub df: usize,
    /// Every difference is identical, so the statistic is degenerate.
    pub exact_tie: bool,
}

/// Two-tailed paired t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::Config(format!("paired samples differ in length ({} vs {})", a.len(), b.len())));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Config("paired t-test needs at least two pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let df = n - 1;
    if d.iter().all(|&x| x == d[0]) {
        let (t, p) = if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(mean), 0.0)
        };
        return Ok(TTest { t, p, df, exact_tie: true });
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df as f64).map_err(|e| Error::Config(e.to_string()))?;
    let p = (2.0 * dist.cdf(-t.abs())).min(1.0);
    Ok(TTest {
        t,
        p,
        df,
        exact_tie: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // reference values from scipy.stats.ttest_rel
    #[test]
    fn matches_reference_implementation() {
        let r = paired_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.1, 2.2, 2.9, 4.3, 4.8]).unwrap();
        assert_abs_diff_eq!(r.t, -0.6469966392206299, epsilon = 1e-9);
        assert_abs_diff_eq!(r.p, 0.5528894339334174, epsilon = 1e-6);
        let r = paired_t_test(&[0.9, 0.8, 0.85, 0.7, 0.95, 0.6], &[0.5, 0.6, 0.7, 0.65, 0.8, 0.4]).unwrap();
        assert_abs_diff_eq!(r.t, 4.053217416888887, epsilon = 1e-9);
        assert_abs_diff_eq!(r.p, 0.009794288347649253, epsilon = 1e-6);
        let r = paired_t_test(
            &[0.61, 0.72, 0.55, 0.8, 0.67, 0.59, 0.74],
            &[0.6, 0.7, 0.58, 0.77, 0.69, 0.52, 0.7],
        )
        .unwrap();
        assert_abs_diff_eq!(r.p, 0.23667747661443694, epsilon = 1e-6);
        assert_eq!(r.df, 6);
    }

    #[test]
    fn ties_and_bad_input() {
        let x = [0.3, 0.5, 0.9];
        let r = paired_t_test(&x, &x).unwrap();
        assert!(r.exact_tie);
        assert_eq!(r.p, 1.0);
        let r = paired_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert!(r.exact_tie);
        assert_eq!((r.t, r.p), (f64::NEG_INFINITY, 0.0));
        assert!(paired_t_test(&[1.0], &[2.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[2.0]).is_err());
    }
}
