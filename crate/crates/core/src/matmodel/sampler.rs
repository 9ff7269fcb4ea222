//! Metropolis-adjusted Langevin sampling of the perturbed ensemble.
//!
//! The target density on m-tuples of N x N Hermitian matrices is
//! exp(-N tr(V(A) + 1/2 sum_i A_i^2)) against Lebesgue measure on the real
//! coordinates {A(kk), Re A(kl), Im A(kl)}. Proposals follow the Langevin
//! drift built from the exact cyclic-gradient identity
//! d tr P / d A_i(ab) = (D_i P)_{ba}; the Metropolis correction makes the
//! chain target the density exactly, with no discretization bias.
//!
//! The step size is tuned during burn-in toward a 0.4-0.7 acceptance rate
//! and frozen afterwards. All randomness flows from one explicit seed plus
//! a chain id through the counter RNG, so runs are reproducible and
//! parallel chains independent.

use super::matrix::CMatrix;
use super::rng::CounterRng;
use super::stats::{autocorrelation_time, batch_means};
use crate::error::{Error, Result};
use crate::ncpoly::{Monomial, Potential};
use crate::scalar::rat_to_f64;
use std::collections::HashMap;

/// Potential with numeric coefficients, plus its precomputed cyclic
/// gradients D_i V as numeric word combinations.
#[derive(Clone, Debug)]
pub struct NumPotential {
    pub m: usize,
    pub terms: Vec<(f64, Vec<u8>)>,
    grads: Vec<Vec<(f64, Vec<u8>)>>,
}

impl NumPotential {
    pub fn new(m: usize, terms: Vec<(f64, Vec<u8>)>) -> NumPotential {
        let mut grads = vec![Vec::new(); m];
        for i in 1..=m as u8 {
            let mut acc: HashMap<Vec<u8>, f64> = HashMap::new();
            for (t, word) in &terms {
                for pos in 0..word.len() {
                    if word[pos] == i {
                        let mut w = word[pos + 1..].to_vec();
                        w.extend_from_slice(&word[..pos]);
                        *acc.entry(w).or_insert(0.0) += *t;
                    }
                }
            }
            let mut list: Vec<(f64, Vec<u8>)> = acc.into_iter().map(|(w, t)| (t, w)).collect();
            list.sort_by(|a, b| a.1.cmp(&b.1));
            grads[(i - 1) as usize] = list;
        }
        NumPotential { m, terms, grads }
    }

    pub fn zero(m: usize) -> NumPotential {
        NumPotential::new(m, Vec::new())
    }

    /// Attach the numeric t values carried by a formal potential.
    pub fn from_potential(v: &Potential) -> Result<NumPotential> {
        let values = v
            .values
            .as_ref()
            .ok_or_else(|| Error::Config("potential carries no numeric t values".into()))?;
        let terms = v
            .monomials
            .iter()
            .zip(values)
            .map(|(q, t)| (rat_to_f64(t), q.0.clone()))
            .collect();
        Ok(NumPotential::new(v.m, terms))
    }

    pub fn grad_words(&self, i: usize) -> &[(f64, Vec<u8>)] {
        &self.grads[i]
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.len()).max().unwrap_or(0)
    }

    /// Every term has even degree in every color (the A -> -A symmetry).
    pub fn is_even(&self) -> bool {
        self.terms.iter().all(|(_, w)| {
            (1..=self.m as u8).all(|c| w.iter().filter(|&&x| x == c).count() % 2 == 0)
        })
    }
}

/// Finite-N model description.
#[derive(Clone, Debug)]
pub struct EnsembleConfig {
    pub m: usize,
    pub n: usize,
    pub potential: NumPotential,
    /// claimed convexity margin, recorded with the run
    pub c: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct ChainOptions {
    pub steps: usize,
    pub burn_in: usize,
    /// None: auto-tuned from dimension, then adapted during burn-in
    pub step_size: Option<f64>,
    /// measure every `thin` steps
    pub thin: usize,
    pub chain_id: u64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            steps: 100_000,
            burn_in: 10_000,
            step_size: None,
            thin: 1,
            chain_id: 0,
        }
    }
}

/// Batch-means estimate for one observable.
#[derive(Clone, Debug)]
pub struct ObservableStats {
    pub word: Monomial,
    pub mean: f64,
    pub std_err: f64,
    pub autocorr_time: f64,
    pub count: usize,
    /// deg P > sqrt(N): outside the regime the error bounds cover
    pub degree_warning: bool,
}

#[derive(Clone, Debug)]
pub struct ChainStats {
    pub observables: Vec<ObservableStats>,
    pub acceptance_rate: f64,
    pub step_size: f64,
    pub samples: usize,
}

/// Evaluation workspace at one state: matrices plus lazily built
/// single-color power tables (all Hermitian, so half-triangle products).
pub struct Workspace {
    pub mats: Vec<CMatrix>,
    powers: Vec<Vec<CMatrix>>,
}

impl Workspace {
    pub fn new(mats: Vec<CMatrix>) -> Workspace {
        let m = mats.len();
        Workspace {
            mats,
            powers: (0..m).map(|_| Vec::new()).collect(),
        }
    }

    /// A_i^p for p >= 1.
    pub fn power(&mut self, i: usize, p: usize) -> &CMatrix {
        assert!(p >= 1);
        if self.powers[i].is_empty() {
            self.powers[i].push(self.mats[i].clone());
        }
        while self.powers[i].len() < p {
            let prev = self.powers[i].last().unwrap();
            let next = prev.mul_hermitian_result(&self.mats[i]);
            self.powers[i].push(next);
        }
        &self.powers[i][p - 1]
    }

    fn single_color(word: &[u8]) -> Option<usize> {
        if word.is_empty() {
            return None;
        }
        let c = word[0];
        word.iter().all(|&x| x == c).then_some((c - 1) as usize)
    }

    /// Matrix value of a word.
    pub fn eval(&mut self, word: &[u8]) -> CMatrix {
        let n = self.mats[0].n;
        if word.is_empty() {
            return CMatrix::identity(n);
        }
        if let Some(i) = Self::single_color(word) {
            return self.power(i, word.len()).clone();
        }
        let mut acc = self.mats[(word[0] - 1) as usize].clone();
        for &c in &word[1..] {
            acc = acc.mul(&self.mats[(c - 1) as usize]);
        }
        acc
    }

    /// Re (1/N) tr of a word; single-color words use cached powers and a
    /// product trace, so even high powers cost O(n^2) here.
    pub fn trace_word(&mut self, word: &[u8]) -> f64 {
        let n = self.mats[0].n as f64;
        if word.is_empty() {
            return 1.0;
        }
        if let Some(i) = Self::single_color(word) {
            let p = word.len();
            if p == 1 {
                return self.mats[i].trace().0 / n;
            }
            if p.is_multiple_of(2) {
                let half = self.power(i, p / 2).clone();
                return half.frob_sq() / n;
            }
            let a = self.power(i, p / 2).clone();
            let b = self.power(i, p / 2 + 1).clone();
            return trace_of_product(&a, &b) / n;
        }
        let half = word.len() / 2;
        let a = self.eval(&word[..half]);
        let b = self.eval(&word[half..]);
        trace_of_product(&a, &b) / n
    }
}

/// Re tr(A B) without forming the product.
fn trace_of_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.n;
    let mut tr = 0.0;
    for i in 0..n {
        let ar = &a.re[i * n..i * n + n];
        let ai = &a.im[i * n..i * n + n];
        for j in 0..n {
            tr += ar[j] * b.re[j * n + i] - ai[j] * b.im[j * n + i];
        }
    }
    tr
}

/// One evaluated chain state: coordinates, energy, gradient, workspace.
pub struct Point {
    pub coords: Vec<f64>,
    pub energy: f64,
    pub grad: Vec<f64>,
    pub ws: Workspace,
}

/// U(A) = N ( 1/2 sum_i tr A_i^2 + Re tr V(A) ).
pub fn evaluate_point(cfg: &EnsembleConfig, coords: Vec<f64>) -> Point {
    let n = cfg.n;
    let per = CMatrix::coord_len(n);
    let mats: Vec<CMatrix> = (0..cfg.m)
        .map(|i| CMatrix::from_coords(n, &coords[i * per..(i + 1) * per]))
        .collect();
    let mut ws = Workspace::new(mats);
    let nf = n as f64;

    let mut energy = 0.0;
    for i in 0..cfg.m {
        energy += 0.5 * ws.mats[i].frob_sq();
    }
    for (t, word) in cfg.potential.terms.clone() {
        energy += t * ws.trace_word(&word) * nf;
    }
    energy *= nf;

    // gradient: per color, G_i = A_i + D_i V(A); coordinates as the
    // Hermitian part H of G_i: diag N H_kk, off-diagonal 2N Re/Im H_kl
    let mut grad = vec![0.0; coords.len()];
    for i in 0..cfg.m {
        let mut g = ws.mats[i].clone();
        for (t, word) in cfg.potential.grad_words(i).to_vec() {
            let val = ws.eval(&word);
            g.add_scaled(&val, t);
        }
        let h = g.hermitian_part();
        let base = i * per;
        for k in 0..n {
            grad[base + k] = nf * h.re[k * n + k];
        }
        let mut idx = base + n;
        for k in 0..n {
            for l in k + 1..n {
                grad[idx] = 2.0 * nf * h.re[k * n + l];
                grad[idx + 1] = 2.0 * nf * h.im[k * n + l];
                idx += 2;
            }
        }
    }
    Point {
        coords,
        energy,
        grad,
        ws,
    }
}

/// Run one chain, feeding every `thin`-th post-burn-in state to `measure`.
/// Returns (acceptance rate over the whole run, final step size,
/// first few accepted energies for regression pinning).
pub fn run_chain<F: FnMut(&mut Workspace)>(
    cfg: &EnsembleConfig,
    opts: &ChainOptions,
    mut measure: F,
) -> Result<(f64, f64, Vec<f64>)> {
    let dim = cfg.m * CMatrix::coord_len(cfg.n);
    let mut rng = CounterRng::new(cfg.seed, opts.chain_id);
    let mut eps = opts.step_size.unwrap_or_else(|| {
        // curvature ~ N, dimension d: classic d^(-1/6)/sqrt(curvature) start
        0.8 / ((cfg.n as f64).sqrt() * (dim as f64).powf(1.0 / 6.0))
    });
    let mut x = evaluate_point(cfg, vec![0.0; dim]);
    if !x.energy.is_finite() {
        return Err(Error::NonFiniteEnergy { step: 0 });
    }

    let mut accepted: u64 = 0;
    let mut window_accepted: u64 = 0;
    let mut noise = vec![0.0; dim];
    let mut first_accepted = Vec::new();
    let total = opts.burn_in + opts.steps;
    for step in 0..total {
        let half = 0.5 * eps * eps;
        rng.fill_normal(&mut noise);
        let y: Vec<f64> = (0..dim)
            .map(|d| x.coords[d] - half * x.grad[d] + eps * noise[d])
            .collect();
        let py = evaluate_point(cfg, y);
        let mut accept = false;
        if py.energy.is_finite() {
            // ||y - m(x)||^2 forward and ||x - m(y)||^2 reverse, fused
            let mut fwd = 0.0;
            let mut rev = 0.0;
            for d in 0..dim {
                let dxy = x.coords[d] - py.coords[d];
                let r = dxy + half * py.grad[d];
                rev += r * r;
                let f = half * x.grad[d] - dxy;
                fwd += f * f;
            }
            let log_alpha = x.energy - py.energy + (fwd - rev) / (2.0 * eps * eps);
            if log_alpha >= 0.0 || rng.uniform().ln() < log_alpha {
                accept = true;
            }
        }
        if accept {
            x = py;
            accepted += 1;
            window_accepted += 1;
            if first_accepted.len() < 5 {
                first_accepted.push(x.energy);
            }
        }
        // adapt only during burn-in, toward acceptance in [0.4, 0.7]
        if step < opts.burn_in && (step + 1) % 200 == 0 {
            let rate = window_accepted as f64 / 200.0;
            if rate > 0.7 {
                eps *= 1.15;
            } else if rate < 0.4 {
                eps /= 1.15;
            }
            window_accepted = 0;
        }
        if step >= opts.burn_in && (step - opts.burn_in).is_multiple_of(opts.thin) {
            measure(&mut x.ws);
        }
    }
    Ok((accepted as f64 / total as f64, eps, first_accepted))
}

/// Sample the ensemble and estimate E[1/N tr P] for each observable word.
pub fn sample_chain(
    cfg: &EnsembleConfig,
    opts: &ChainOptions,
    observables: &[Monomial],
) -> Result<ChainStats> {
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); observables.len()];
    let words: Vec<Vec<u8>> = observables.iter().map(|w| w.0.clone()).collect();
    let (acceptance_rate, step_size, _) = run_chain(cfg, opts, |ws| {
        for (vals, word) in series.iter_mut().zip(&words) {
            vals.push(ws.trace_word(word));
        }
    })?;
    let sqrt_n = (cfg.n as f64).sqrt();
    let mut stats = Vec::new();
    for (obs, vals) in observables.iter().zip(&series) {
        let (mean, std_err) = batch_means(vals)?;
        stats.push(ObservableStats {
            word: obs.clone(),
            mean,
            std_err,
            autocorr_time: autocorrelation_time(vals),
            count: vals.len(),
            degree_warning: obs.degree() as f64 > sqrt_n,
        });
    }
    Ok(ChainStats {
        observables: stats,
        acceptance_rate,
        step_size,
        samples: series.first().map(|v| v.len()).unwrap_or(0),
    })
}

/// Merge per-chain statistics of the same observables: inverse-variance
/// weighted means; the combination is associative.
pub fn merge_chain_stats(chains: &[ChainStats]) -> Result<ChainStats> {
    let first = chains.first().ok_or(Error::EmptySamples)?;
    let mut observables = Vec::new();
    for (idx, obs) in first.observables.iter().enumerate() {
        let mut wsum = 0.0;
        let mut mean = 0.0;
        let mut count = 0;
        let mut act = 0.0;
        for chain in chains {
            let o = &chain.observables[idx];
            let weight = 1.0 / (o.std_err * o.std_err);
            wsum += weight;
            mean += weight * o.mean;
            count += o.count;
            act = f64::max(act, o.autocorr_time);
        }
        observables.push(ObservableStats {
            word: obs.word.clone(),
            mean: mean / wsum,
            std_err: (1.0 / wsum).sqrt(),
            autocorr_time: act,
            count,
            degree_warning: obs.degree_warning,
        });
    }
    Ok(ChainStats {
        observables,
        acceptance_rate: chains.iter().map(|c| c.acceptance_rate).sum::<f64>()
            / chains.len() as f64,
        step_size: first.step_size,
        samples: chains.iter().map(|c| c.samples).sum(),
    })
}

/// Monte Carlo residual of the finite-N Schwinger-Dyson identity
/// E[mu-hat((X_i + D_iV) P)] = E[(mu-hat (x) mu-hat)(∂_i P)]
/// for a monomial P and color i; returns (residual mean, standard error).
pub fn check_sd_finite_n(
    cfg: &EnsembleConfig,
    opts: &ChainOptions,
    p: &Monomial,
    i: u8,
) -> Result<(f64, f64)> {
    let grad_words: Vec<(f64, Vec<u8>)> = cfg.potential.grad_words((i - 1) as usize).to_vec();
    let mut xp = vec![i];
    xp.extend_from_slice(&p.0);
    let splits: Vec<(Vec<u8>, Vec<u8>)> = (0..p.0.len())
        .filter(|&pos| p.0[pos] == i)
        .map(|pos| (p.0[..pos].to_vec(), p.0[pos + 1..].to_vec()))
        .collect();
    let mut vals = Vec::new();
    run_chain(cfg, opts, |ws| {
        let mut left = ws.trace_word(&xp);
        for (t, dv) in &grad_words {
            let mut w = dv.clone();
            w.extend_from_slice(&p.0);
            left += t * ws.trace_word(&w);
        }
        let mut right = 0.0;
        for (r, s) in &splits {
            right += ws.trace_word(r) * ws.trace_word(s);
        }
        vals.push(left - right);
    })?;
    batch_means(&vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapenum;

    fn gauss_cfg(n: usize, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            m: 1,
            n,
            potential: NumPotential::zero(1),
            c: 1.0,
            seed,
        }
    }

    fn quartic_cfg(n: usize, t: f64, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            m: 1,
            n,
            potential: NumPotential::new(1, vec![(t, vec![1, 1, 1, 1])]),
            c: 0.5,
            seed,
        }
    }

    fn w(letters: &[u8]) -> Monomial {
        Monomial(letters.to_vec())
    }

    #[test]
    fn gaussian_second_moment_all_n() {
        // E[1/N tr A^2] = 1 exactly for every N
        for (n, seed) in [(4usize, 11u64), (8, 12)] {
            let cfg = gauss_cfg(n, seed);
            let opts = ChainOptions {
                steps: 40_000,
                burn_in: 4_000,
                ..Default::default()
            };
            let stats = sample_chain(&cfg, &opts, &[w(&[1, 1])]).unwrap();
            let o = &stats.observables[0];
            assert!(
                (o.mean - 1.0).abs() < 3.0 * o.std_err,
                "N={n}: {} +- {}",
                o.mean,
                o.std_err
            );
            assert!(stats.acceptance_rate > 0.3 && stats.acceptance_rate < 0.95);
        }
    }

    #[test]
    fn gaussian_fourth_moment_matches_exact_n8() {
        // E[1/N tr A^4] = 2 + 1/64 at N = 8
        let cfg = gauss_cfg(8, 5);
        let opts = ChainOptions {
            steps: 60_000,
            burn_in: 6_000,
            ..Default::default()
        };
        let stats = sample_chain(&cfg, &opts, &[w(&[1, 1, 1, 1])]).unwrap();
        let exact = rat_to_f64(
            &mapenum::gue_moment_exact(&w(&[1, 1, 1, 1]), 100)
                .unwrap()
                .eval(8),
        );
        let o = &stats.observables[0];
        assert!(
            (o.mean - exact).abs() < 3.0 * o.std_err,
            "{} +- {} vs {}",
            o.mean,
            o.std_err,
            exact
        );
    }

    #[test]
    fn odd_moments_vanish_for_even_potential() {
        let cfg = quartic_cfg(6, 0.1, 9);
        let opts = ChainOptions {
            steps: 40_000,
            burn_in: 4_000,
            ..Default::default()
        };
        assert!(cfg.potential.is_even());
        let stats = sample_chain(&cfg, &opts, &[w(&[1]), w(&[1, 1, 1])]).unwrap();
        for o in &stats.observables {
            assert!(
                o.mean.abs() < 4.0 * o.std_err,
                "odd moment {} +- {}",
                o.mean,
                o.std_err
            );
        }
    }

    #[test]
    fn sd_identity_residual_mc() {
        // V = 0, P = X, i = 1: E[mu(X^2)] = E[mu(1)mu(1)] = 1
        let cfg = gauss_cfg(6, 21);
        let opts = ChainOptions {
            steps: 40_000,
            burn_in: 4_000,
            ..Default::default()
        };
        let (res, se) = check_sd_finite_n(&cfg, &opts, &w(&[1]), 1).unwrap();
        assert!(res.abs() < 3.0 * se, "residual {res} +- {se}");
        // V = t X^4, P = X^3, N = 16
        let cfg = quartic_cfg(16, 0.1, 22);
        let opts = ChainOptions {
            steps: 40_000,
            burn_in: 4_000,
            ..Default::default()
        };
        let (res, se) = check_sd_finite_n(&cfg, &opts, &w(&[1, 1, 1]), 1).unwrap();
        assert!(res.abs() < 3.0 * se, "residual {res} +- {se}");
    }

    #[test]
    fn frozen_seed_regression() {
        // detailed balance depends on the exact log-density difference;
        // pin the first accepted energies for a fixed seed
        let cfg = gauss_cfg(4, 12345);
        let opts = ChainOptions {
            steps: 200,
            burn_in: 100,
            ..Default::default()
        };
        let (_, _, first) = run_chain(&cfg, &opts, |_| {}).unwrap();
        assert_eq!(first.len(), 5);
        let expect = FROZEN_FIRST_ACCEPTED;
        for (a, b) in first.iter().zip(expect) {
            assert!(
                (a - b).abs() <= 1e-12 * b.abs().max(1.0),
                "accepted energies drifted: {first:?} vs {expect:?}"
            );
        }
    }

    // recorded once from the frozen seed; any sampler change that alters
    // the trajectory must be deliberate
    const FROZEN_FIRST_ACCEPTED: [f64; 5] = [
        3.2307593728345463,
        5.149165430489254,
        7.683156355888224,
        8.515541376236804,
        7.835507789814784,
    ];

    #[test]
    fn mc_agrees_with_quadrature_at_n1() {
        let cfg = quartic_cfg(1, 0.1, 31);
        let opts = ChainOptions {
            steps: 120_000,
            burn_in: 10_000,
            ..Default::default()
        };
        let stats = sample_chain(&cfg, &opts, &[w(&[1, 1])]).unwrap();
        let quad = super::super::quadrature::expectation_1d(&cfg.potential, &[1, 1]).unwrap();
        let o = &stats.observables[0];
        assert!(
            (o.mean - quad).abs() < 3.0 * o.std_err,
            "{} +- {} vs quadrature {}",
            o.mean,
            o.std_err,
            quad
        );
    }

    #[test]
    fn degree_warning_flags_large_words() {
        let cfg = gauss_cfg(4, 3);
        let opts = ChainOptions {
            steps: 2_000,
            burn_in: 200,
            ..Default::default()
        };
        let stats = sample_chain(&cfg, &opts, &[w(&[1, 1]), w(&[1; 4])]).unwrap();
        // sqrt(4) = 2: degree 2 is fine, degree 4 is past the safe regime
        assert!(!stats.observables[0].degree_warning);
        assert!(stats.observables[1].degree_warning);
    }

    #[test]
    fn fluctuation_scale_is_bounded_in_n() {
        // the variance of N(mu-hat(P) - mean) should stay of order one
        // across the N-grid; a trend check, no constant asserted
        let mut scales = Vec::new();
        for n in [4usize, 8, 16] {
            let cfg = gauss_cfg(n, 17);
            let opts = ChainOptions {
                steps: 30_000,
                burn_in: 3_000,
                ..Default::default()
            };
            let mut vals = Vec::new();
            run_chain(&cfg, &opts, |ws| vals.push(ws.trace_word(&[1, 1]))).unwrap();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
            scales.push(n as f64 * n as f64 * var);
        }
        for s in &scales {
            assert!(s.is_finite() && *s > 0.0);
        }
        let max = scales.iter().cloned().fold(0.0f64, f64::max);
        let min = scales.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(
            max / min < 5.0,
            "fluctuation scale drifts across N: {scales:?}"
        );
    }

    #[test]
    fn merging_is_weighted() {
        let cfg = gauss_cfg(4, 77);
        let mk = |chain_id| {
            let opts = ChainOptions {
                steps: 20_000,
                burn_in: 2_000,
                chain_id,
                ..Default::default()
            };
            sample_chain(&cfg, &opts, &[w(&[1, 1])]).unwrap()
        };
        let a = mk(0);
        let b = mk(1);
        let merged = merge_chain_stats(&[a.clone(), b.clone()]).unwrap();
        let o = &merged.observables[0];
        assert!(o.std_err < a.observables[0].std_err);
        assert!((o.mean - 1.0).abs() < 4.0 * o.std_err);
    }
}
