//! Convexity validation for potentials.
//!
//! Structured form: V = sum_i P_i(sum_j alpha_ij X_j) + sum_kl beta_kl X_k X_l
//! with convex univariate P_i and per-row sum |beta| < 1 - c; this is the
//! sufficient condition checked exactly. Raw potentials only get a random
//! midpoint-convexity screen of tr(V + (1-c)/2 sum X_i^2) at small N — a
//! necessary-condition filter, never a certificate (the real condition
//! quantifies over every N).

use super::matrix::CMatrix;
use super::rng::CounterRng;
use super::sampler::{NumPotential, Workspace};
use crate::error::Result;

/// One composed convex piece P_i(sum_j alpha_ij X_j).
#[derive(Clone, Debug)]
pub struct ComposedPiece {
    /// univariate coefficients, index = power
    pub poly: Vec<f64>,
    pub alphas: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct StructuredPotential {
    pub m: usize,
    pub pieces: Vec<ComposedPiece>,
    /// quadratic cross couplings beta[k][l]
    pub beta: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub enum ConvexityInput {
    Structured(StructuredPotential),
    Raw(NumPotential),
}

#[derive(Clone, Debug)]
pub struct ConvexityReport {
    pub pass: bool,
    pub witness: Option<String>,
}

fn univariate_convex(poly: &[f64]) -> Option<String> {
    let deg = poly.len().saturating_sub(1);
    if deg >= 1 && deg % 2 == 1 {
        return Some(format!("odd degree {deg} cannot be convex on the line"));
    }
    if deg >= 2 && poly[deg] < 0.0 {
        return Some(format!("negative leading coefficient {}", poly[deg]));
    }
    // second derivative on a grid
    for step in 0..=400 {
        let x = -10.0 + step as f64 * 0.05;
        let mut dd = 0.0;
        for (p, &a) in poly.iter().enumerate().skip(2) {
            dd += a * (p * (p - 1)) as f64 * x.powi(p as i32 - 2);
        }
        if dd < -1e-9 {
            return Some(format!("P''({x}) = {dd} < 0"));
        }
    }
    None
}

fn validate_structured(s: &StructuredPotential, c: f64) -> ConvexityReport {
    for (idx, piece) in s.pieces.iter().enumerate() {
        if let Some(reason) = univariate_convex(&piece.poly) {
            return ConvexityReport {
                pass: false,
                witness: Some(format!("piece {idx}: {reason}")),
            };
        }
    }
    for (l, row) in s.beta.iter().enumerate() {
        let sum: f64 = row.iter().map(|b| b.abs()).sum();
        if sum >= 1.0 - c {
            return ConvexityReport {
                pass: false,
                witness: Some(format!(
                    "beta row {l}: sum of |beta| = {sum} >= 1 - c = {}",
                    1.0 - c
                )),
            };
        }
    }
    ConvexityReport {
        pass: true,
        witness: None,
    }
}

/// phi(A) = tr(V(A) + (1-c)/2 sum_i A_i^2).
fn phi(v: &NumPotential, c: f64, mats: &[CMatrix]) -> f64 {
    let n = mats[0].n as f64;
    let mut ws = Workspace::new(mats.to_vec());
    let mut val = 0.0;
    for i in 0..v.m {
        val += 0.5 * (1.0 - c) * ws.mats[i].frob_sq();
    }
    for (t, word) in v.terms.clone() {
        val += t * ws.trace_word(&word) * n;
    }
    val
}

fn random_tuple(rng: &mut CounterRng, m: usize, n: usize, scale: f64) -> Vec<CMatrix> {
    (0..m)
        .map(|_| {
            let mut coords = vec![0.0; CMatrix::coord_len(n)];
            rng.fill_normal(&mut coords);
            for c in &mut coords {
                *c *= scale;
            }
            CMatrix::from_coords(n, &coords)
        })
        .collect()
}

fn validate_raw(v: &NumPotential, c: f64) -> ConvexityReport {
    let mut rng = CounterRng::new(0x5eed_c0de, 0);
    for n in [1usize, 2, 4] {
        for trial in 0..200 {
            let scale = [0.3, 1.0, 3.0][trial % 3];
            let x = random_tuple(&mut rng, v.m, n, scale);
            let y = random_tuple(&mut rng, v.m, n, scale);
            let mid: Vec<CMatrix> = x
                .iter()
                .zip(&y)
                .map(|(a, b)| {
                    let mut s = a.clone();
                    s.add_scaled(b, 1.0);
                    CMatrix {
                        n: s.n,
                        re: s.re.iter().map(|t| 0.5 * t).collect(),
                        im: s.im.iter().map(|t| 0.5 * t).collect(),
                    }
                })
                .collect();
            let lhs = phi(v, c, &mid);
            let rhs = 0.5 * (phi(v, c, &x) + phi(v, c, &y));
            if lhs > rhs + 1e-9 * (1.0 + rhs.abs()) {
                return ConvexityReport {
                    pass: false,
                    witness: Some(format!(
                        "midpoint convexity violated at N={n}, trial {trial}: phi(mid)={lhs} > {rhs}"
                    )),
                };
            }
        }
    }
    ConvexityReport {
        pass: true,
        witness: None,
    }
}

/// Validate a potential's c-convexity claim. Structured inputs get the
/// exact sufficient condition; raw inputs only the random screen.
pub fn validate_convexity(input: &ConvexityInput, c: f64) -> Result<ConvexityReport> {
    Ok(match input {
        ConvexityInput::Structured(s) => validate_structured(s, c),
        ConvexityInput::Raw(v) => validate_raw(v, c),
    })
}
