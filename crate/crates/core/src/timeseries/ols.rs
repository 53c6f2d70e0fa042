use nalgebra::{DMatrix, DVector};

use super::student_t::two_sided_p_value;
use crate::error::{Error, Result};

/// Singular values below this fraction of the largest mark the design as
/// collinear.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    /// Unbiased residual variance, RSS / (n - k).
    pub residual_variance: f64,
    pub rss: f64,
    pub dof: usize,
    /// Residual variance is zero; p-values are reported as 0.
    pub degenerate: bool,
}

/// Ordinary least squares with classical standard errors and two-sided
/// Student-t p-values.
pub fn ols(design: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (n, k) = design.shape();
    if y.len() != n {
        return Err(Error::invalid(format!("{n} design rows but {} responses", y.len())));
    }
    if k == 0 || n <= k {
        return Err(Error::TooShort(format!("{n} observations for {k} parameters")));
    }
    let svd = design.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    if !(s_max > 0.0) || s_min <= RANK_TOLERANCE * s_max {
        return Err(Error::CollinearLags);
    }
    let u = svd.u.as_ref().expect("u computed");
    let v_t = svd.v_t.as_ref().expect("v_t computed");
    let inv_s = svd.singular_values.map(|s| 1.0 / s);
    // beta = V S^-1 U' y
    let uty = u.transpose() * y;
    let scaled = uty.component_mul(&inv_s);
    let beta = v_t.transpose() * scaled;
    // (X'X)^-1 = V S^-2 V'
    let v = v_t.transpose();
    let inv_s2 = inv_s.map(|x| x * x);
    let xtx_inv_diag: Vec<f64> = (0..k)
        .map(|i| (0..k).map(|j| v[(i, j)] * v[(i, j)] * inv_s2[j]).sum())
        .collect();

    let residuals = y - design * &beta;
    let rss = residuals.norm_squared();
    let dof = n - k;
    let residual_variance = rss / dof as f64;
    let scale = y.norm_squared().max(1.0);
    let degenerate = rss <= f64::EPSILON * f64::EPSILON * scale;

    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let std_errors: Vec<f64> = xtx_inv_diag.iter().map(|d| (residual_variance * d).sqrt()).collect();
    let (t_stats, p_values) = if degenerate {
        log::warn!("degenerate fit: residual variance is zero");
        let t = coefficients
            .iter()
            .map(|c| if *c == 0.0 { 0.0 } else { c.signum() * f64::INFINITY })
            .collect();
        (t, vec![0.0; k])
    } else {
        let t: Vec<f64> = coefficients.iter().zip(&std_errors).map(|(c, s)| c / s).collect();
        let p = t.iter().map(|&t| two_sided_p_value(t, dof as f64)).collect();
        (t, p)
    };
    Ok(OlsFit {
        coefficients,
        std_errors,
        t_stats,
        p_values,
        residual_variance,
        rss,
        dof,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let y = DVector::from_vec(vec![1.0, 3.1, 4.9, 7.0]);
        let fit = ols(&x, &y).unwrap();
        // closed form for simple regression
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.1, 4.9, 7.0];
        let mx = 1.5;
        let my = ys.iter().sum::<f64>() / 4.0;
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
        let slope = sxy / sxx;
        assert!((fit.coefficients[1] - slope).abs() < 1e-12);
        assert!((fit.coefficients[0] - (my - slope * mx)).abs() < 1e-12);
        let se_slope = (fit.residual_variance / sxx).sqrt();
        assert!((fit.std_errors[1] - se_slope).abs() < 1e-12);
        assert_eq!(fit.dof, 2);
    }

    #[test]
    fn collinear_columns_rejected() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0, 4.0, 8.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(ols(&x, &y), Err(Error::CollinearLags)));
    }

    #[test]
    fn perfect_fit_is_degenerate() {
        let x = DMatrix::from_row_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        let y = DVector::from_vec(vec![2.0, 4.0, 6.0, 8.0]);
        let fit = ols(&x, &y).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.p_values, vec![0.0]);
    }
}
