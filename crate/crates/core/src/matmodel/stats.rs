//! Batch-means errors and autocorrelation diagnostics for correlated chains.

use crate::error::{Error, Result};

pub const BATCH_COUNT: usize = 20;

/// Mean and standard error by batch means over 20 batches. Requires at
/// least one value per batch; the (tiny) remainder is dropped.
pub fn batch_means(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < BATCH_COUNT {
        return Err(Error::EmptySamples);
    }
    let batch_len = values.len() / BATCH_COUNT;
    let used = batch_len * BATCH_COUNT;
    let mut batch_avgs = Vec::with_capacity(BATCH_COUNT);
    for b in 0..BATCH_COUNT {
        let chunk = &values[b * batch_len..(b + 1) * batch_len];
        batch_avgs.push(chunk.iter().sum::<f64>() / batch_len as f64);
    }
    let mean = values[..used].iter().sum::<f64>() / used as f64;
    let var = batch_avgs
        .iter()
        .map(|a| (a - mean) * (a - mean))
        .sum::<f64>()
        / (BATCH_COUNT - 1) as f64;
    let se = (var / BATCH_COUNT as f64).sqrt();
    // exactly constant observables (e.g. the unit word) get zero error
    Ok((mean, se))
}

/// Integrated autocorrelation time with a self-consistent window: stop the
/// lag sum once the running estimate is passed by 5 * tau.
pub fn autocorrelation_time(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 8 {
        return 1.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    let max_lag = (n / 4).min(2000);
    for lag in 1..max_lag {
        let mut acc = 0.0;
        for t in 0..n - lag {
            acc += (values[t] - mean) * (values[t + lag] - mean);
        }
        let rho = acc / ((n - lag) as f64 * var);
        tau += 2.0 * rho;
        if (lag as f64) > 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matmodel::rng::CounterRng;

    #[test]
    fn iid_batch_means_match_naive_error() {
        let mut rng = CounterRng::new(3, 0);
        let vals: Vec<f64> = (0..20_000).map(|_| rng.normal()).collect();
        let (mean, se) = batch_means(&vals).unwrap();
        assert!(mean.abs() < 3.0 * se);
        let naive = 1.0 / (vals.len() as f64).sqrt();
        assert!(
            se < 2.0 * naive && se > naive / 2.0,
            "se {se} vs naive {naive}"
        );
        assert!(autocorrelation_time(&vals) < 1.5);
    }

    #[test]
    fn correlated_series_has_larger_tau() {
        let mut rng = CounterRng::new(4, 0);
        let mut x = 0.0;
        let vals: Vec<f64> = (0..40_000)
            .map(|_| {
                x = 0.95 * x + rng.normal();
                x
            })
            .collect();
        let tau = autocorrelation_time(&vals);
        // AR(1) with rho = 0.95 has tau = (1+rho)/(1-rho) = 39
        assert!(tau > 15.0 && tau < 80.0, "tau {tau}");
    }

    #[test]
    fn too_few_samples_is_an_error() {
        assert!(batch_means(&[1.0; 5]).is_err());
    }
}
