use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear ramp of the share of obstructed episodes in training batches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurriculumSchedule {
    pub alpha_max: f64,
    /// Steps until the ramp reaches `alpha_max`.
    pub c: u64,
}

impl Default for CurriculumSchedule {
    fn default() -> Self {
        Self {
            alpha_max: 0.5,
            c: 20_000,
        }
    }
}

impl CurriculumSchedule {
    pub fn new(alpha_max: f64, c: u64) -> Result<Self> {
        let s = Self { alpha_max, c };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha_max) {
            return Err(Error::InvalidArgument(format!(
                "alpha_max {} is outside [0, 1]",
                self.alpha_max
            )));
        }
        if self.c == 0 {
            return Err(Error::InvalidArgument(
                "ramp length c must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Probability that a training slot at step `t` is obstructed.
    pub fn alpha(&self, t: u64) -> f64 {
        if t >= self.c {
            self.alpha_max
        } else {
            (t as f64 / self.c as f64 * self.alpha_max).min(self.alpha_max)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    Original,
    Obstructed,
}

/// One slot of a training batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot<'a, T> {
    pub setting: Setting,
    pub item: &'a T,
}

/// Draw a batch mixing original and obstructed episodes at step `t`.
///
/// When `alpha(t)` is 0 or 1 the batch is one-sided. Otherwise the number of
/// obstructed slots follows a binomial restricted to `1..=n-1`, whose slot
/// probability is solved so the expected count stays `n * alpha(t)`. Every
/// such batch holds both settings and the obstructed share is unbiased.
/// When `n * alpha(t)` falls below 1 (or above `n - 1`) the guarantee of both
/// settings wins and the count is pinned at 1 (or `n - 1`).
pub fn sample_batch<'a, T>(
    t: u64,
    schedule: &CurriculumSchedule,
    batch_size: usize,
    original: &'a [T],
    obstructed: &'a [T],
    seed: u64,
) -> Result<Vec<Slot<'a, T>>> {
    schedule.validate()?;
    if batch_size < 2 {
        return Err(Error::InvalidArgument(format!(
            "batch size {batch_size} is below 2"
        )));
    }
    let alpha = schedule.alpha(t);
    let mixed = alpha > 0.0 && alpha < 1.0;
    if alpha < 1.0 && original.is_empty() {
        return Err(Error::EmptyPool("original"));
    }
    if alpha > 0.0 && obstructed.is_empty() {
        return Err(Error::EmptyPool("obstructed"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flags = vec![alpha >= 1.0; batch_size];
    if mixed {
        let k = mixed_count(alpha, batch_size, &mut rng);
        for i in index::sample(&mut rng, batch_size, k) {
            flags[i] = true;
        }
    }
    Ok(flags
        .into_iter()
        .map(|obs| {
            let (setting, pool) = if obs {
                (Setting::Obstructed, obstructed)
            } else {
                (Setting::Original, original)
            };
            Slot {
                setting,
                item: &pool[rng.gen_range(0..pool.len())],
            }
        })
        .collect())
}

/// Expected count of a Binomial(n, p) restricted to `1..=n-1`.
fn restricted_mean(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let (all, none) = (p.powi(n as i32), (1.0 - p).powi(n as i32));
    (nf * p - nf * all) / (1.0 - all - none)
}

/// Obstructed slot count for a mixed batch of `n` with target share `alpha`.
fn mixed_count(alpha: f64, n: usize, rng: &mut impl Rng) -> usize {
    let target = alpha * n as f64;
    if target <= 1.0 {
        return 1;
    }
    if target >= (n - 1) as f64 {
        return n - 1;
    }
    // The restricted mean rises from 1 to n-1 as p goes from 0 to 1.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if restricted_mean(n, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    // Log weights C(n,k) p^k (1-p)^(n-k) for k = 1..n-1, built by ratios.
    let odds = (p / (1.0 - p)).ln();
    let mut log_w = Vec::with_capacity(n - 1);
    let mut acc = 0.0;
    for k in 1..n {
        if k > 1 {
            acc += ((n - k + 1) as f64 / k as f64).ln() + odds;
        }
        log_w.push(acc);
    }
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_w.iter().map(|w| (w - top).exp()).collect();
    let mut u = rng.gen::<f64>() * weights.iter().sum::<f64>();
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i + 1;
        }
        u -= w;
    }
    n - 1
}
