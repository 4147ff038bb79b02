use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;

/// Percentile bootstrap interval for the mean of `values`.
///
/// The interval is widened if needed so that it always contains the sample
/// mean (percentiles of a skewed resampling distribution can miss it).
pub fn bootstrap_ci(
    values: &[f64],
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::input("bootstrap needs at least one value"));
    }
    if resamples == 0 || !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::input(
            "bootstrap needs resamples > 0 and 0 < confidence < 1",
        ));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - confidence) / 2.0;
    let low = percentile(&means, alpha);
    let high = percentile(&means, 1.0 - alpha);
    Ok((low.min(mean), high.max(mean)))
}

/// Linear interpolation between closest ranks.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
