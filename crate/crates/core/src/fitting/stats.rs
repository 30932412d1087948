use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::FitError;

/// `1 − SS_res/SS_tot`; zero when the observations have no spread.
pub fn r_squared(observed: &[f64], residuals: &[f64]) -> f64 {
    let n = observed.len() as f64;
    let mean = observed.iter().sum::<f64>() / n;
    let ss_tot: f64 = observed.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot <= 0.0 {
        return 0.0;
    }
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    1.0 - ss_res / ss_tot
}

/// R² threshold for significance of a `n_params`-parameter regression on
/// `n_levels` points: `k·F/(k·F + n − k − 1)` with `F` the upper quantile of
/// `F(k, n − k − 1)` at `confidence`.
pub fn r_squared_critical(n_levels: usize, n_params: usize, confidence: f64) -> Result<f64, FitError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(FitError::InvalidConfidence(confidence));
    }
    if n_params == 0 || n_levels < n_params + 2 {
        return Err(FitError::InsufficientDegreesOfFreedom { n_levels, n_params });
    }
    let k = n_params as f64;
    let dof = (n_levels - n_params - 1) as f64;
    let dist = FisherSnedecor::new(k, dof).expect("positive degrees of freedom");
    let f = dist.inverse_cdf(confidence);
    Ok(k * f / (k * f + dof))
}
