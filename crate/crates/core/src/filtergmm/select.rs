use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::em::{log_normal_pdf, Mixture};
use super::records::{Category, ScoreRecord};
use super::GmmModel;
use crate::error::{Error, Result};

/// How a score is compared against the two mixture components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QualifyRule {
    /// Success density strictly above failure density; weights ignored.
    #[default]
    Density,
    /// Same comparison with each density scaled by its mixing weight.
    Weighted,
}

/// `log p1(s) - log p2(s)` under `rule`; positive means qualified.
fn margin(m: &Mixture, s: f64, rule: QualifyRule) -> f64 {
    let d = log_normal_pdf(s, m.mu1, m.sigma1) - log_normal_pdf(s, m.mu2, m.sigma2);
    match rule {
        QualifyRule::Density => d,
        QualifyRule::Weighted => d + m.pi1.ln() - m.pi2.ln(),
    }
}

pub fn qualify(model: &GmmModel, score: f64) -> Result<bool> {
    qualify_with(model, score, QualifyRule::Density)
}

pub fn qualify_with(model: &GmmModel, score: f64, rule: QualifyRule) -> Result<bool> {
    if model.degenerate {
        return Err(Error::Unqualifiable(format!(
            "model for {} is degenerate",
            model.category
        )));
    }
    Ok(margin(&model.mixture(), score, rule) > 0.0)
}

/// Scores where the qualification decision flips, in increasing order.
///
/// The log-density difference is a quadratic in `s`, so there are at most
/// two such points (one when the deviations are equal).
pub fn decision_boundaries(model: &GmmModel, rule: QualifyRule) -> Vec<f64> {
    let m = model.mixture();
    let (v1, v2) = (m.sigma1 * m.sigma1, m.sigma2 * m.sigma2);
    let a = 0.5 / v2 - 0.5 / v1;
    let b = m.mu1 / v1 - m.mu2 / v2;
    let mut c = 0.5 * m.mu2 * m.mu2 / v2 - 0.5 * m.mu1 * m.mu1 / v1 + (m.sigma2 / m.sigma1).ln();
    if rule == QualifyRule::Weighted {
        c += m.pi1.ln() - m.pi2.ln();
    }
    if a == 0.0 {
        return if b == 0.0 { Vec::new() } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = if q == 0.0 {
        let r = (-c / a).sqrt();
        vec![-r, r]
    } else {
        vec![q / a, c / q]
    };
    roots.sort_by(f64::total_cmp);
    roots
}

/// Candidates eligible for the final draw: the qualified ones, or the three
/// best scorers when none qualify. The flag says whether the pool is the
/// qualified set.
pub fn selection_pool(
    candidates: &[ScoreRecord],
    models: &BTreeMap<Category, GmmModel>,
    rule: QualifyRule,
) -> Result<(Vec<usize>, bool)> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("no candidates to select from".into()));
    }
    let mut qualified = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        let model = models
            .get(&c.category)
            .ok_or_else(|| Error::NotFound(format!("no model for category {}", c.category)))?;
        match qualify_with(model, c.score, rule) {
            Ok(true) => qualified.push(i),
            Ok(false) => {}
            Err(Error::Unqualifiable(msg)) => {
                log::debug!("{msg}; candidate {} skipped", c.candidate_ref)
            }
            Err(e) => return Err(e),
        }
    }
    if !qualified.is_empty() {
        return Ok((qualified, true));
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[b].score.total_cmp(&candidates[a].score));
    order.truncate(3);
    Ok((order, false))
}

/// Pick the obstruction image for one endpoint.
pub fn select_candidate<'a>(
    candidates: &'a [ScoreRecord],
    models: &BTreeMap<Category, GmmModel>,
    seed: u64,
    rule: QualifyRule,
) -> Result<&'a ScoreRecord> {
    let (pool, _) = selection_pool(candidates, models, rule)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(&candidates[pool[rng.gen_range(0..pool.len())]])
}

fn fnv1a(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.bytes().chain([0]) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Run [`select_candidate`] for every endpoint found in `records`.
///
/// Endpoints are visited in key order and each draws from its own stream
/// derived from `seed` and the endpoint key, so a selection does not depend
/// on which other endpoints are present.
pub fn select_all(
    records: &[ScoreRecord],
    models: &BTreeMap<Category, GmmModel>,
    seed: u64,
    rule: QualifyRule,
) -> Result<Vec<ScoreRecord>> {
    let mut groups: BTreeMap<(&str, &str, &str, &str), Vec<ScoreRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.endpoint_key()).or_default().push(r.clone());
    }
    let mut out = Vec::with_capacity(groups.len());
    for (key, group) in &groups {
        let mut seen = HashSet::new();
        if let Some(dup) = group.iter().find(|r| !seen.insert(r.category)) {
            return Err(Error::InvalidArgument(format!(
                "two {} candidates at endpoint {} of edge {}-{} in scan {}",
                dup.category, key.3, key.1, key.2, key.0
            )));
        }
        let stream = seed ^ fnv1a(&[key.0, key.1, key.2, key.3]);
        out.push(select_candidate(group, models, stream, rule)?.clone());
    }
    Ok(out)
}
