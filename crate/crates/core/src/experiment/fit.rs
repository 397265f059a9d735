//! Least-squares extraction of a single-harmonic fringe from count data.
//!
//! Model: y(phi) = A + B cos(k phi + delta), fitted linearly in the
//! coefficients of {1, cos k phi, sin k phi}. Parameter uncertainties come
//! from the sandwich covariance with Poisson weights sigma_i^2 =
//! max(y_i, 1), so the fit itself stays unweighted and exact fringes are
//! recovered to machine precision.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitted fringe parameters and their standard errors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FringeFit {
    pub k: u32,
    #[serde(rename = "A")]
    pub a_offset: f64,
    #[serde(rename = "B")]
    pub b_amplitude: f64,
    pub delta: f64,
    pub visibility: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub a_err: f64,
    pub b_err: f64,
    pub visibility_err: f64,
    /// Set when the fitted visibility exceeds one by more than three
    /// standard errors; such a fringe is unphysical for count data.
    pub flagged: bool,
}

impl FringeFit {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit json")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Fit A + B cos(k phi + delta) to the samples.
pub fn fit_fringe(phis: &[f64], values: &[f64], k: u32) -> Result<FringeFit> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "fit harmonic must be >= 1; the constant alone is not a fringe".into(),
        ));
    }
    if phis.len() != values.len() {
        return Err(Error::GridMismatch);
    }
    let n = phis.len();
    let needed = (2 * k + 1) as usize;
    if n < needed {
        return Err(Error::Aliasing {
            harmonic: k,
            points: n,
            needed,
        });
    }

    let kf = k as f64;
    let x = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => (kf * phis[i]).cos(),
        _ => (kf * phis[i]).sin(),
    });
    let y = DVector::from_column_slice(values);

    let xtx = x.transpose() * &x;
    let xtx_inv = xtx.try_inverse().ok_or(Error::SingularFit)?;
    let beta = &xtx_inv * x.transpose() * &y;
    let (a, c, s) = (beta[0], beta[1], beta[2]);

    let residuals = &y - &x * &beta;
    let residual = (residuals.norm_squared() / n as f64).sqrt();

    // Sandwich covariance: (X'X)^-1 X' Sigma X (X'X)^-1 with Poisson
    // variances estimated from the data.
    let sigma = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            values[i].max(1.0)
        } else {
            0.0
        }
    });
    let middle = x.transpose() * sigma * &x;
    let cov = &xtx_inv * middle * &xtx_inv;

    let b = c.hypot(s);
    let delta = (-s).atan2(c);
    if a.abs() < f64::EPSILON {
        return Err(Error::SingularFit);
    }
    let visibility = b / a;

    let a_err = cov[(0, 0)].max(0.0).sqrt();
    let b_err = if b > 0.0 {
        let g = [0.0, c / b, s / b];
        quadratic_form(&cov, &g).max(0.0).sqrt()
    } else {
        (cov[(1, 1)].max(cov[(2, 2)])).max(0.0).sqrt()
    };
    let visibility_err = if b > 0.0 {
        let g = [-b / (a * a), c / (a * b), s / (a * b)];
        quadratic_form(&cov, &g).max(0.0).sqrt()
    } else {
        b_err / a.abs()
    };

    let flagged = visibility > 1.0 + 3.0 * visibility_err;

    Ok(FringeFit {
        k,
        a_offset: a,
        b_amplitude: b,
        delta,
        visibility,
        residual,
        a_err,
        b_err,
        visibility_err,
        flagged,
    })
}

fn quadratic_form(cov: &DMatrix<f64>, g: &[f64; 3]) -> f64 {
    let mut out = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            out += g[i] * cov[(i, j)] * g[j];
        }
    }
    out
}
