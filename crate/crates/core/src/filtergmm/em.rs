use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 20;
/// Lower bound on component standard deviations.
pub const SIGMA_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Consecutive floored iterations after which the fit is declared degenerate.
    pub collapse_patience: usize,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 200,
            collapse_patience: 10,
        }
    }
}

/// Parameters of a two-component 1-D Gaussian mixture. Component 1 is the
/// one with the larger mean after fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    pub pi1: f64,
    pub pi2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

pub fn log_normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - sigma.ln() - 0.5 * TAU.ln()
}

impl Mixture {
    fn swapped(self) -> Self {
        Self {
            pi1: self.pi2,
            pi2: self.pi1,
            mu1: self.mu2,
            mu2: self.mu1,
            sigma1: self.sigma2,
            sigma2: self.sigma1,
        }
    }

    /// Relabel so that `mu1 >= mu2`.
    pub fn normalized(self) -> Self {
        if self.mu1 < self.mu2 {
            self.swapped()
        } else {
            self
        }
    }

    /// Log of the weighted component densities at `x`.
    fn weighted_logs(&self, x: f64) -> [f64; 2] {
        [
            self.pi1.ln() + log_normal_pdf(x, self.mu1, self.sigma1),
            self.pi2.ln() + log_normal_pdf(x, self.mu2, self.sigma2),
        ]
    }

    /// Posterior component probabilities at `x`; they sum to one.
    pub fn responsibilities(&self, x: f64) -> [f64; 2] {
        let l = self.weighted_logs(x);
        let m = l[0].max(l[1]);
        let e = [(l[0] - m).exp(), (l[1] - m).exp()];
        let s = e[0] + e[1];
        [e[0] / s, e[1] / s]
    }

    pub fn log_likelihood(&self, xs: &[f64]) -> f64 {
        xs.iter()
            .map(|&x| {
                let l = self.weighted_logs(x);
                let m = l[0].max(l[1]);
                m + ((l[0] - m).exp() + (l[1] - m).exp()).ln()
            })
            .sum()
    }
}

/// Outcome of an EM run.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub mixture: Mixture,
    pub loglik: f64,
    pub n: usize,
    pub degenerate: bool,
    pub iterations: usize,
    /// Log-likelihood before every M-step and after the last one.
    pub trace: Vec<f64>,
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Starting point: means at the 25th and 75th percentiles, equal weights,
/// both deviations set to the pooled deviation.
pub fn initial_mixture(scores: &[f64]) -> Mixture {
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sigma = var.sqrt().max(SIGMA_FLOOR);
    Mixture {
        pi1: 0.5,
        pi2: 0.5,
        mu1: quantile(&sorted, 0.25),
        mu2: quantile(&sorted, 0.75),
        sigma1: sigma,
        sigma2: sigma,
    }
}

/// Fit a two-component mixture by expectation-maximization.
pub fn fit_gmm(scores: &[f64], options: &EmOptions) -> Result<FitReport> {
    if scores.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_SAMPLES,
            got: scores.len(),
        });
    }
    if let Some(bad) = scores.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("score {bad} is not finite")));
    }
    Ok(fit_from(scores, initial_mixture(scores), options))
}

/// EM from an explicit starting mixture.
pub fn fit_from(scores: &[f64], start: Mixture, options: &EmOptions) -> FitReport {
    let n = scores.len();
    let mut params = start;
    let mut trace = Vec::new();
    let mut floored_streak = 0;
    let mut clamped_last = true;
    let mut degenerate = false;
    let mut iterations = 0;
    let mut resp = vec![[0.0; 2]; n];

    loop {
        let ll = params.log_likelihood(scores);
        if let Some(&prev) = trace.last() {
            let slack = 1e-9 * ll.abs().max(1.0);
            debug_assert!(
                ll >= prev - slack,
                "EM log-likelihood decreased: {prev} -> {ll}"
            );
            if !clamped_last && ll - prev < options.tolerance {
                trace.push(ll);
                break;
            }
        }
        trace.push(ll);
        if iterations == options.max_iterations {
            break;
        }
        iterations += 1;

        for (r, &x) in resp.iter_mut().zip(scores) {
            *r = params.responsibilities(x);
        }
        let mut next = params;
        let mut clamped = false;
        for k in 0..2 {
            let weight: f64 = resp.iter().map(|r| r[k]).sum();
            let (pi, mu, sigma) = match k {
                0 => (&mut next.pi1, &mut next.mu1, &mut next.sigma1),
                _ => (&mut next.pi2, &mut next.mu2, &mut next.sigma2),
            };
            *pi = weight / n as f64;
            if weight > 0.0 {
                *mu = resp.iter().zip(scores).map(|(r, x)| r[k] * x).sum::<f64>() / weight;
                let var = resp
                    .iter()
                    .zip(scores)
                    .map(|(r, x)| r[k] * (x - *mu).powi(2))
                    .sum::<f64>()
                    / weight;
                let s = var.sqrt();
                if s < SIGMA_FLOOR {
                    clamped = true;
                    *sigma = SIGMA_FLOOR;
                } else {
                    *sigma = s;
                }
            }
        }
        params = next;
        clamped_last = clamped;
        floored_streak = if clamped { floored_streak + 1 } else { 0 };
        if floored_streak > options.collapse_patience {
            degenerate = true;
            trace.push(params.log_likelihood(scores));
            break;
        }
    }

    FitReport {
        mixture: params.normalized(),
        loglik: *trace.last().expect("at least one evaluation"),
        n,
        degenerate,
        iterations,
        trace,
    }
}
