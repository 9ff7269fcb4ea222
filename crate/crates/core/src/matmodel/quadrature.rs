//! Deterministic oracle for the finite-N law at N = 1 (and m <= 2): the
//! matrices are real scalars, the density is exp(-(V(x) + 1/2 sum x_i^2)),
//! and expectations reduce to one- or two-dimensional adaptive quadrature.

use super::sampler::NumPotential;
use crate::error::{Error, Result};

const REL_TOL: f64 = 1e-12;

/// Adaptive Simpson on [a, b].
fn adaptive_simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn rec<F: Fn(f64) -> f64 + Copy>(
        f: F,
        a: f64,
        m: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    // seed with a fixed composite partition so symmetric integrands that
    // vanish at panel midpoints cannot fake a zero error estimate
    const PANELS: usize = 16;
    let mut total = 0.0;
    for p in 0..PANELS {
        let pa = a + (b - a) * p as f64 / PANELS as f64;
        let pb = a + (b - a) * (p + 1) as f64 / PANELS as f64;
        let pm = 0.5 * (pa + pb);
        let (fa, fm, fb) = (f(pa), f(pm), f(pb));
        let whole = simpson(pa, pb, fa, fm, fb);
        total += rec(f, pa, pm, pb, fa, fm, fb, whole, tol / PANELS as f64, 44);
    }
    total
}

/// 1/2 sum x_i^2 + V(x) on scalars.
fn energy(v: &NumPotential, x: &[f64]) -> f64 {
    let mut e = x.iter().map(|xi| 0.5 * xi * xi).sum::<f64>();
    for (t, word) in &v.terms {
        let mut val = *t;
        for &c in word {
            val *= x[(c - 1) as usize];
        }
        e += val;
    }
    e
}

/// Find an integration half-width L with e^{-E} negligible beyond it in
/// every coordinate direction; errors out when the tail does not decay.
fn find_bound(v: &NumPotential, dims: usize) -> Result<f64> {
    let e0 = energy(v, &vec![0.0; dims]);
    let mut l = 2.0;
    loop {
        let mut worst: f64 = f64::INFINITY;
        // probe axes and diagonals at radius l
        let mut probes: Vec<Vec<f64>> = Vec::new();
        for d in 0..dims {
            for s in [-1.0, 1.0] {
                let mut p = vec![0.0; dims];
                p[d] = s * l;
                probes.push(p);
            }
        }
        if dims == 2 {
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    probes.push(vec![sx * l / 2f64.sqrt(), sy * l / 2f64.sqrt()]);
                }
            }
        }
        for p in &probes {
            worst = worst.min(energy(v, p) - e0);
        }
        if worst > 100.0 {
            return Ok(l);
        }
        l *= 1.5;
        if l > 1e6 {
            return Err(Error::NonIntegrable);
        }
    }
}

fn scalar_word_value(x: &[f64], word: &[u8]) -> f64 {
    word.iter().map(|&c| x[(c - 1) as usize]).product()
}

/// E[word(x)] under the N = 1 law, one color.
pub fn expectation_1d(v: &NumPotential, word: &[u8]) -> Result<f64> {
    assert!(word.iter().all(|&c| c == 1), "one-color word expected");
    let l = find_bound(v, 1)?;
    let weight = |x: f64| (-energy(v, &[x])).exp();
    let z = adaptive_simpson(weight, -l, l, REL_TOL);
    let num = adaptive_simpson(
        |x| scalar_word_value(&[x], word) * weight(x),
        -l,
        l,
        REL_TOL,
    );
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::NonIntegrable);
    }
    Ok(num / z)
}

/// E[word(x1, x2)] under the N = 1 law, two colors.
pub fn expectation_2d(v: &NumPotential, word: &[u8]) -> Result<f64> {
    let l = find_bound(v, 2)?;
    let inner = |x1: f64, f: &dyn Fn(f64, f64) -> f64| {
        adaptive_simpson(|x2| f(x1, x2), -l, l, REL_TOL * 10.0)
    };
    let weight = |x1: f64, x2: f64| (-energy(v, &[x1, x2])).exp();
    let z = adaptive_simpson(|x1| inner(x1, &weight), -l, l, REL_TOL * 10.0);
    let num = adaptive_simpson(
        |x1| inner(x1, &|a, b| scalar_word_value(&[a, b], word) * weight(a, b)),
        -l,
        l,
        REL_TOL * 10.0,
    );
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::NonIntegrable);
    }
    Ok(num / z)
}

/// E[word] for the N = 1, m <= 2 ensemble.
pub fn expectation(v: &NumPotential, word: &[u8]) -> Result<f64> {
    match v.m {
        1 => expectation_1d(v, word),
        2 => expectation_2d(v, word),
        m => Err(Error::Config(format!(
            "quadrature oracle supports m <= 2, got {m}"
        ))),
    }
}

/// Residual of the Schwinger-Dyson identity at N = 1 computed by
/// quadrature: E[(x_i + D_iV) P] - sum over splits P = R X_i S of E[R S].
pub fn sd_residual(v: &NumPotential, p: &[u8], i: u8) -> Result<f64> {
    let mut xp = vec![i];
    xp.extend_from_slice(p);
    let mut left = expectation(v, &xp)?;
    for (t, dv) in v.grad_words((i - 1) as usize).to_vec() {
        let mut w = dv.clone();
        w.extend_from_slice(p);
        left += t * expectation(v, &w)?;
    }
    let mut right = 0.0;
    for pos in 0..p.len() {
        if p[pos] == i {
            let mut rs = p[..pos].to_vec();
            rs.extend_from_slice(&p[pos + 1..]);
            right += expectation(v, &rs)?;
        }
    }
    Ok(left - right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        let v = NumPotential::zero(1);
        // variance 1 from the density exp(-x^2/2)
        assert!((expectation_1d(&v, &[1, 1]).unwrap() - 1.0).abs() < 1e-10);
        assert!((expectation_1d(&v, &[1, 1, 1, 1]).unwrap() - 3.0).abs() < 1e-10);
        assert!(expectation_1d(&v, &[1]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn quartic_moments_decrease() {
        let v = NumPotential::new(1, vec![(0.1, vec![1, 1, 1, 1])]);
        let m2 = expectation_1d(&v, &[1, 1]).unwrap();
        assert!(m2 < 1.0 && m2 > 0.5);
    }

    #[test]
    fn sd_identity_by_quadrature() {
        let v = NumPotential::new(1, vec![(0.1, vec![1, 1, 1, 1])]);
        for p_deg in 0..=5 {
            let p = vec![1u8; p_deg];
            let res = sd_residual(&v, &p, 1).unwrap();
            assert!(res.abs() < 1e-8, "deg {p_deg}: residual {res}");
        }
    }

    #[test]
    fn two_color_factorizes_for_product_density() {
        let v = NumPotential::zero(2);
        let val = expectation_2d(&v, &[1, 1, 2, 2]).unwrap();
        assert!((val - 1.0).abs() < 1e-8);
    }

    #[test]
    fn divergent_potential_is_rejected() {
        let v = NumPotential::new(1, vec![(-0.5, vec![1, 1, 1, 1])]);
        assert!(matches!(
            expectation_1d(&v, &[1, 1]),
            Err(Error::NonIntegrable)
        ));
    }
}
