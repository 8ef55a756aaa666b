//! Ordinary least squares via column-pivoted QR, with t-based coefficient
//! inference and the overall F test. QR rather than normal equations for
//! numerical stability; the normal-equations route survives only as a test
//! oracle.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use super::RegressError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefEntry {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OlsFit {
    pub coefficients: Vec<CoefEntry>,
    pub r2: f64,
    pub adj_r2: f64,
    /// Residual standard error, `sqrt(SSE / (n - p))`.
    pub rmse: f64,
    pub f_statistic: f64,
    pub f_p_value: f64,
    pub n: usize,
    pub dof_resid: usize,
    /// Coefficient covariance `sigma^2 (X'X)^-1`.
    #[serde(skip)]
    pub covariance: DMatrix<f64>,
}

impl OlsFit {
    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.coefficients.iter().find(|c| c.name == name).map(|c| c.estimate)
    }
}

/// Fit `y = X b + e`. Column names are used in reports and rank-deficiency
/// errors.
pub fn ols_fit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    column_names: &[String],
) -> Result<OlsFit, RegressError> {
    let n = x.nrows();
    let p = x.ncols();
    assert_eq!(column_names.len(), p);
    assert_eq!(y.len(), n);
    if n <= p {
        return Err(RegressError::TooFewObservations { n, p });
    }

    let qr = x.clone().col_piv_qr();
    let r = qr.r();
    let pivot_tol = 1e-10 * r[(0, 0)].abs().max(1e-300);
    let dependent: Vec<usize> = (0..p).filter(|&j| r[(j, j)].abs() <= pivot_tol).collect();
    if !dependent.is_empty() {
        // Map pivoted positions back to original column names.
        let mut index = DMatrix::zeros(p, 1);
        for j in 0..p {
            index[(j, 0)] = j as f64;
        }
        qr.p().permute_rows(&mut index);
        let names = dependent
            .iter()
            .map(|&pos| column_names[index[(pos, 0)] as usize].clone())
            .collect();
        return Err(RegressError::RankDeficient(names));
    }

    // Least squares through the thin factorization: with X P = Q R, the
    // minimizer is beta = P R^-1 Q' y.
    let qty = qr.q().transpose() * y;
    let mut beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| RegressError::RankDeficient(vec!["<unknown>".into()]))?;
    qr.p().inv_permute_rows(&mut beta);

    let fitted = x * &beta;
    let residuals = y - &fitted;
    let sse = residuals.dot(&residuals);
    let dof_resid = n - p;
    let sigma2 = sse / dof_resid as f64;

    // (X'X)^-1 = P R^-1 R^-T P' with X P = Q R.
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| RegressError::RankDeficient(vec!["<unknown>".into()]))?;
    let mut gram_inv = &r_inv * r_inv.transpose();
    qr.p().inv_permute_rows(&mut gram_inv);
    let mut gram_inv_t = gram_inv.transpose();
    qr.p().inv_permute_rows(&mut gram_inv_t);
    let covariance = gram_inv_t.transpose() * sigma2;

    let t_dist = StudentsT::new(0.0, 1.0, dof_resid as f64).expect("dof >= 1");
    let coefficients = (0..p)
        .map(|j| {
            let estimate = beta[j];
            let std_error = covariance[(j, j)].max(0.0).sqrt();
            let t_value = if std_error > 0.0 { estimate / std_error } else { f64::NAN };
            let p_value = if std_error > 0.0 {
                2.0 * (1.0 - t_dist.cdf(t_value.abs()))
            } else {
                f64::NAN
            };
            CoefEntry {
                name: column_names[j].clone(),
                estimate,
                std_error,
                t_value,
                p_value,
            }
        })
        .collect();

    let y_mean = y.mean();
    let sst: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
    let r2 = if sst > 0.0 { 1.0 - sse / sst } else { f64::NAN };
    let adj_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / dof_resid as f64;

    // Overall F test against the intercept-only model.
    let dof_model = p - 1;
    let (f_statistic, f_p_value) = if dof_model > 0 && sigma2 > 0.0 {
        let f = ((sst - sse) / dof_model as f64) / sigma2;
        let dist = FisherSnedecor::new(dof_model as f64, dof_resid as f64).expect("dofs >= 1");
        (f, (1.0 - dist.cdf(f)).clamp(0.0, 1.0))
    } else {
        (f64::NAN, f64::NAN)
    };

    Ok(OlsFit {
        coefficients,
        r2,
        adj_r2,
        rmse: sigma2.sqrt(),
        f_statistic,
        f_p_value,
        n,
        dof_resid,
        covariance,
    })
}
