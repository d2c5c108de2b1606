//! Score filtering for inpainted obstruction candidates.
//!
//! Compatibility scores for each object category are modelled as a
//! two-component Gaussian mixture: a "success" peak (component 1, larger
//! mean) and a "failure" peak. A candidate qualifies when its score is more
//! likely under the success component, and one candidate per edge endpoint
//! is drawn from the qualified set or, failing that, the top three scorers.

mod em;
mod records;
mod select;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use em::{
    fit_from, fit_gmm, initial_mixture, log_normal_pdf, EmOptions, FitReport, Mixture, MIN_SAMPLES,
    SIGMA_FLOOR,
};
pub use records::{parse_scores, read_scores, scores_to_jsonl, Category, ScoreRecord};
pub use select::{
    decision_boundaries, qualify, qualify_with, select_all, select_candidate, selection_pool,
    QualifyRule,
};

use crate::error::{Error, Result};

/// Fitted mixture for one category, as stored in `models.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    pub category: String,
    pub pi1: f64,
    pub pi2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub loglik: f64,
    pub n: usize,
    #[serde(default)]
    pub degenerate: bool,
}

impl GmmModel {
    pub fn from_report(category: &str, report: &FitReport) -> Self {
        let m = report.mixture;
        Self {
            category: category.to_string(),
            pi1: m.pi1,
            pi2: m.pi2,
            mu1: m.mu1,
            mu2: m.mu2,
            sigma1: m.sigma1,
            sigma2: m.sigma2,
            loglik: report.loglik,
            n: report.n,
            degenerate: report.degenerate,
        }
    }

    pub fn fit(category: &str, scores: &[f64], options: &EmOptions) -> Result<Self> {
        Ok(Self::from_report(category, &fit_gmm(scores, options)?))
    }

    pub fn mixture(&self) -> Mixture {
        Mixture {
            pi1: self.pi1,
            pi2: self.pi2,
            mu1: self.mu1,
            mu2: self.mu2,
            sigma1: self.sigma1,
            sigma2: self.sigma2,
        }
    }
}

/// Fit one model per category present in `records`, in category order.
/// Categories fit in parallel; each fit is sequential.
pub fn fit_category_models(records: &[ScoreRecord], options: &EmOptions) -> Result<Vec<GmmModel>> {
    let mut by_category: BTreeMap<Category, Vec<f64>> = BTreeMap::new();
    for r in records {
        by_category.entry(r.category).or_default().push(r.score);
    }
    if by_category.is_empty() {
        return Err(Error::EmptyInput("no score records".into()));
    }
    by_category
        .into_par_iter()
        .map(|(category, scores)| {
            GmmModel::fit(category.name(), &scores, options).map_err(|e| match e {
                Error::InsufficientData { needed, got } => {
                    log::error!("category {category}: {got} scores, need {needed}");
                    e
                }
                other => other,
            })
        })
        .collect()
}

/// Index models by category, rejecting unknown names and duplicates.
pub fn models_by_category(models: &[GmmModel]) -> Result<BTreeMap<Category, GmmModel>> {
    let mut out = BTreeMap::new();
    for m in models {
        let c: Category = m.category.parse()?;
        if out.insert(c, m.clone()).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate model for {c}")));
        }
    }
    Ok(out)
}

/// Serialize models; floats use the shortest text that parses back to the
/// same bits.
pub fn models_to_json(models: &[GmmModel]) -> String {
    serde_json::to_string_pretty(models).expect("models serialize") + "\n"
}

pub fn write_models(path: &Path, models: &[GmmModel]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, models_to_json(models)).map_err(|e| Error::io(path, e))
}

pub fn read_models(path: &Path) -> Result<Vec<GmmModel>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path.display().to_string(), e))
}
