//! Weighted least squares of moment estimates against 1/N^2.

use crate::error::{Error, Result};

/// Fitted genus coefficients of mean(N) = c0 + c1 / N^2.
#[derive(Clone, Debug)]
pub struct GenusFit {
    pub c0: f64,
    pub c1: f64,
    pub se0: f64,
    pub se1: f64,
    pub cov01: f64,
}

/// points: (N, mean, standard error); needs at least three distinct N.
pub fn fit_genus_coefficients(points: &[(usize, f64, f64)]) -> Result<GenusFit> {
    if points.len() < 3 {
        return Err(Error::IllConditionedFit(format!(
            "need >= 3 values of N, got {}",
            points.len()
        )));
    }
    let mut s_ww = 0.0;
    let mut s_wx = 0.0;
    let mut s_wxx = 0.0;
    let mut s_wy = 0.0;
    let mut s_wxy = 0.0;
    for &(n, mean, se) in points {
        if se <= 0.0 {
            return Err(Error::IllConditionedFit(
                "non-positive standard error".into(),
            ));
        }
        let x = 1.0 / (n as f64 * n as f64);
        let w = 1.0 / (se * se);
        s_ww += w;
        s_wx += w * x;
        s_wxx += w * x * x;
        s_wy += w * mean;
        s_wxy += w * x * mean;
    }
    let det = s_ww * s_wxx - s_wx * s_wx;
    let scale = s_ww * s_wxx;
    if det.abs() < 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::IllConditionedFit("N-grid too narrow".into()));
    }
    // (X^T W X)^{-1}
    let inv00 = s_wxx / det;
    let inv01 = -s_wx / det;
    let inv11 = s_ww / det;
    let c0 = inv00 * s_wy + inv01 * s_wxy;
    let c1 = inv01 * s_wy + inv11 * s_wxy;
    Ok(GenusFit {
        c0,
        c1,
        se0: inv00.sqrt(),
        se1: inv11.sqrt(),
        cov01: inv01,
    })
}
