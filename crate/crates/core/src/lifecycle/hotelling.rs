//! Two-sample Hotelling T² on z-scored data.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HotellingResult {
    pub t_squared: f64,
    pub group_sizes: (usize, usize),
    pub dimension: usize,
    pub alpha: f64,
    /// T² value at the `1 - alpha` quantile under the null.
    pub critical_value: f64,
    pub p_value: f64,
    pub significant: bool,
}

fn column_means(points: &[Vec<f64>], dim: usize) -> DVector<f64> {
    let n = points.len() as f64;
    DVector::from_fn(dim, |j, _| points.iter().map(|p| p[j]).sum::<f64>() / n)
}

fn scatter(points: &[Vec<f64>], mean: &DVector<f64>) -> DMatrix<f64> {
    let dim = mean.len();
    let mut s = DMatrix::zeros(dim, dim);
    for p in points {
        let d = DVector::from_fn(dim, |j, _| p[j] - mean[j]);
        s += &d * d.transpose();
    }
    s
}

/// Compares the mean vectors of two groups of points.
///
/// Each coordinate is divided by its pooled standard deviation before the
/// statistic `n1 n2 / (n1 + n2) * d' S^-1 d` is formed with the pooled
/// covariance `S`. The critical value comes from the F distribution with
/// `(p, n1 + n2 - p - 1)` degrees of freedom.
pub fn hotelling_t2(
    group_a: &[Vec<f64>],
    group_b: &[Vec<f64>],
    alpha: f64,
) -> Result<HotellingResult> {
    let (n1, n2) = (group_a.len(), group_b.len());
    if n1 < 2 || n2 < 2 {
        return Err(Error::Statistics(
            "each group needs at least 2 points".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Statistics(format!("alpha {alpha} outside (0, 1)")));
    }
    let dim = group_a[0].len();
    if dim == 0 {
        return Err(Error::Statistics(
            "points need at least one coordinate".into(),
        ));
    }
    if let Some(p) = group_a.iter().chain(group_b).find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.len(),
        });
    }
    let df_error = (n1 + n2) as i64 - dim as i64 - 1;
    if df_error < 1 {
        return Err(Error::Statistics(format!(
            "{} points cannot support a {dim}-dimensional test",
            n1 + n2
        )));
    }

    let (mean_a, mean_b) = (column_means(group_a, dim), column_means(group_b, dim));
    let pooled = (scatter(group_a, &mean_a) + scatter(group_b, &mean_b)) / (n1 + n2 - 2) as f64;

    let sd = DVector::from_fn(dim, |j, _| pooled[(j, j)].sqrt());
    if sd.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::Singular);
    }
    let d = (mean_a - mean_b).component_div(&sd);
    let scale = DMatrix::from_diagonal(&sd.map(|s| 1.0 / s));
    let standardized = &scale * pooled * &scale;
    let inverse = standardized
        .clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|v| v.is_finite()))
        .ok_or(Error::Singular)?;
    // near-singular matrices invert to garbage; check the round trip
    let identity_error = (&standardized * &inverse - DMatrix::identity(dim, dim)).amax();
    if identity_error > 1e-8 {
        return Err(Error::Singular);
    }

    let t_squared =
        ((n1 * n2) as f64 / (n1 + n2) as f64 * (d.transpose() * inverse * &d)[(0, 0)]).max(0.0);

    let p = dim as f64;
    let m = (n1 + n2 - 2) as f64;
    let to_f = (m - p + 1.0) / (p * m);
    let f =
        FisherSnedecor::new(p, df_error as f64).map_err(|e| Error::Statistics(e.to_string()))?;
    let critical_value = f.inverse_cdf(1.0 - alpha) / to_f;
    let p_value = (1.0 - f.cdf(t_squared * to_f)).clamp(0.0, 1.0);
    Ok(HotellingResult {
        t_squared,
        group_sizes: (n1, n2),
        dimension: dim,
        alpha,
        critical_value,
        p_value,
        significant: t_squared > critical_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pts(raw: &[[f64; 2]]) -> Vec<Vec<f64>> {
        raw.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn equal_means_give_zero() {
        let a = pts(&[[1.0, 2.0], [3.0, 1.0], [2.0, 5.0], [2.0, 0.0]]);
        let b = pts(&[[2.0, 1.0], [2.0, 3.0], [1.0, 2.0], [3.0, 2.0]]);
        let r = hotelling_t2(&a, &b, 0.05).unwrap();
        assert_abs_diff_eq!(r.t_squared, 0.0, epsilon = 1e-12);
        assert!(!r.significant);
        assert_abs_diff_eq!(r.p_value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn collinear_points_are_singular() {
        let a = pts(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]);
        let b = pts(&[[2.0, 4.0], [4.0, 8.0], [5.0, 10.0]]);
        assert!(matches!(hotelling_t2(&a, &b, 0.05), Err(Error::Singular)));
        let flat = pts(&[[1.0, 1.0], [1.0, 2.0]]);
        let flat2 = pts(&[[1.0, 3.0], [1.0, 5.0]]);
        assert!(matches!(
            hotelling_t2(&flat, &flat2, 0.05),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn small_groups_rejected() {
        let a = pts(&[[1.0, 2.0]]);
        let b = pts(&[[1.0, 2.0], [3.0, 4.0]]);
        assert!(hotelling_t2(&a, &b, 0.05).is_err());
        // 2 + 2 points in 2-D leaves no error degrees of freedom
        assert!(hotelling_t2(&b, &b, 0.05).is_err());
    }

    #[test]
    fn one_dimension_is_squared_pooled_t() {
        // A = 1..5, B = 2..6: pooled t = -1, so T² = 1
        let a: Vec<Vec<f64>> = (1..=5).map(|x| vec![x as f64]).collect();
        let b: Vec<Vec<f64>> = (2..=6).map(|x| vec![x as f64]).collect();
        let r = hotelling_t2(&a, &b, 0.05).unwrap();
        assert_abs_diff_eq!(r.t_squared, 1.0, epsilon = 1e-12);
        // critical T² = F(1, 8; 0.95) = t(8; 0.975)^2 ≈ 5.3177
        assert_abs_diff_eq!(r.critical_value, 5.3177, epsilon = 1e-3);
    }
}
