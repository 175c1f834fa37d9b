use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestVariant {
    /// Unequal variances, Welch-Satterthwaite degrees of freedom.
    #[default]
    Welch,
    /// Equal variances, pooled estimate.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub statistic: f64,
    pub degrees_of_freedom: f64,
    /// Two-sided.
    pub p_value: f64,
    pub variant: TTestVariant,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sample t-test of `mean(a) - mean(b)` with a two-sided p-value.
pub fn two_sample_t_test(a: &[f64], b: &[f64], variant: TTestVariant) -> Result<TTestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Statistics(
            "each group needs at least 2 values".into(),
        ));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::Statistics("non-finite sample value".into()));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (m1, v1) = mean_var(a);
    let (m2, v2) = mean_var(b);
    if v1 == 0.0 && v2 == 0.0 {
        return Err(Error::Statistics("both groups have zero variance".into()));
    }
    let (se, df) = match variant {
        TTestVariant::Welch => {
            let (q1, q2) = (v1 / n1, v2 / n2);
            let df = (q1 + q2).powi(2) / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0));
            ((q1 + q2).sqrt(), df)
        }
        TTestVariant::Pooled => {
            let df = n1 + n2 - 2.0;
            let pooled = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / df;
            ((pooled * (1.0 / n1 + 1.0 / n2)).sqrt(), df)
        }
    };
    let statistic = (m1 - m2) / se;
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Statistics(e.to_string()))?;
    let p_value = (2.0 * dist.sf(statistic.abs())).clamp(0.0, 1.0);
    Ok(TTestResult {
        statistic,
        degrees_of_freedom: df,
        p_value,
        variant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_groups() {
        let a = [1.0, 2.0, 4.0, 7.0];
        for v in [TTestVariant::Welch, TTestVariant::Pooled] {
            let r = two_sample_t_test(&a, &a, v).unwrap();
            assert_eq!(r.statistic, 0.0);
            assert_abs_diff_eq!(r.p_value, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pooled_hand_computed() {
        // both variances 2.5, pooled 2.5, se = sqrt(2.5 * 0.4) = 1
        let r = two_sample_t_test(
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            &[2.0, 3.0, 4.0, 5.0, 6.0],
            TTestVariant::Pooled,
        )
        .unwrap();
        assert_abs_diff_eq!(r.statistic, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.degrees_of_freedom, 8.0);
        // two-sided p for |t| = 1 on 8 df
        assert_abs_diff_eq!(r.p_value, 0.346594, epsilon = 1e-5);
    }

    #[test]
    fn welch_equal_sizes_and_variances_matches_pooled_df() {
        let r = two_sample_t_test(
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            &[2.0, 3.0, 4.0, 5.0, 6.0],
            TTestVariant::Welch,
        )
        .unwrap();
        assert_abs_diff_eq!(r.statistic, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.degrees_of_freedom, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn p_value_shrinks_with_mean_gap() {
        let base = [0.1, 0.4, -0.3, 0.2, 0.0, -0.1];
        let mut last = 1.1;
        for shift in [0.0, 0.1, 0.2, 0.4, 0.8, 1.6] {
            let b: Vec<f64> = base.iter().map(|x| x + shift).collect();
            let p = two_sample_t_test(&base, &b, TTestVariant::Welch)
                .unwrap()
                .p_value;
            assert!(
                p < last || (shift == 0.0 && p <= last),
                "p={p} shift={shift}"
            );
            last = p;
        }
    }

    #[test]
    fn errors() {
        assert!(two_sample_t_test(&[1.0], &[1.0, 2.0], TTestVariant::Welch).is_err());
        assert!(two_sample_t_test(&[1.0, 1.0], &[2.0, 2.0], TTestVariant::Welch).is_err());
    }
}
