//! Numeric evaluation of one-variable coefficient series through diagonal
//! Padé approximants.
//!
//! The solver's generating functions are exact truncated series whose
//! radius of convergence can sit well below the t values worth simulating
//! (the quartic tower is singular at t = -1/48). The functions themselves
//! are analytic along the positive axis, so the comparison layer evaluates
//! them as [L/M] rational approximants instead of partial sums. The series
//! is rescaled by its mean coefficient growth first, which keeps the
//! little Toeplitz solve well conditioned.

use crate::error::{Error, Result};

/// Solve the dense linear system a x = b in place (partial pivoting).
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<()> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::IllConditionedFit("singular Pade system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * b[k];
        }
        b[col] = acc / a[col][col];
    }
    Ok(())
}

/// Value at `t` of the [L/M] Padé approximant of sum c_k t^k, with
/// M = terms/2 and L = terms - 1 - M.
pub fn pade_eval_order(coeffs: &[f64], t: f64, m_order: usize) -> Result<f64> {
    let k = coeffs.len();
    if m_order == 0 || k < 2 * m_order + 1 {
        return Err(Error::IllConditionedFit(format!(
            "need {} coefficients for [.,{m_order}] Pade, have {k}",
            2 * m_order + 1
        )));
    }
    let l = k - 1 - m_order;
    // rescale by the mean growth so the Toeplitz block is O(1)
    let growth = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| c.abs() > 0.0)
        .map(|(i, c)| c.abs().powf(1.0 / i as f64))
        .fold(1.0f64, f64::max);
    let scale = growth.max(1e-12);
    let scaled: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c / scale.powi(i as i32))
        .collect();
    let u = t * scale;

    // denominator b_0 = 1, b_1..b_M from sum_j b_j c_{l+i-j} = 0, i = 1..M
    let mut mat = vec![vec![0.0; m_order]; m_order];
    let mut rhs = vec![0.0; m_order];
    for i in 1..=m_order {
        for j in 1..=m_order {
            let idx = l as isize + i as isize - j as isize;
            mat[i - 1][j - 1] = if idx >= 0 { scaled[idx as usize] } else { 0.0 };
        }
        rhs[i - 1] = -scaled[l + i];
    }
    solve_dense(&mut mat, &mut rhs)?;
    let mut denom_coeffs = vec![1.0];
    denom_coeffs.extend_from_slice(&rhs);

    let mut numer = 0.0;
    let mut upow = 1.0;
    for i in 0..=l {
        let mut a_i = 0.0;
        for j in 0..=i.min(m_order) {
            a_i += denom_coeffs[j] * scaled[i - j];
        }
        numer += a_i * upow;
        upow *= u;
    }
    let mut denom = 0.0;
    upow = 1.0;
    for b in &denom_coeffs {
        denom += b * upow;
        upow *= u;
    }
    if !denom.is_finite() || denom.abs() < 1e-12 {
        return Err(Error::IllConditionedFit("Pade denominator vanished".into()));
    }
    Ok(numer / denom)
}

/// Evaluate with the largest balanced order that is non-degenerate and
/// report the spread against the next working order down as a stability
/// estimate: (value, |difference|). Degenerate Toeplitz blocks (the
/// function is already rational of lower order) fall through to smaller M.
pub fn pade_eval_stable(coeffs: &[f64], t: f64) -> Result<(f64, f64)> {
    let m_top = (coeffs.len() - 1) / 2;
    if m_top < 2 {
        // short series: plain summation
        let direct = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * t.powi(i as i32))
            .sum();
        return Ok((direct, f64::INFINITY));
    }
    let mut values = Vec::new();
    let mut m = m_top;
    while m >= 1 && values.len() < 2 {
        if let Ok(v) = pade_eval_order(coeffs, t, m) {
            values.push(v);
        }
        m -= 1;
    }
    match values.as_slice() {
        [hi, lo] => Ok((*hi, (hi - lo).abs())),
        [only] => Ok((*only, 0.0)),
        _ => Err(Error::IllConditionedFit("no Pade order solvable".into())),
    }
}
