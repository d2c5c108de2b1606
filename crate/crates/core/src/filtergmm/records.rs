use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Objects used as obstructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "chair")]
    Chair,
    #[serde(rename = "table")]
    Table,
    #[serde(rename = "sofa")]
    Sofa,
    #[serde(rename = "potted plant")]
    PottedPlant,
    #[serde(rename = "basket")]
    Basket,
    #[serde(rename = "exercise equipment")]
    ExerciseEquipment,
    #[serde(rename = "vacuum cleaner")]
    VacuumCleaner,
    #[serde(rename = "suitcase")]
    Suitcase,
    #[serde(rename = "toy")]
    Toy,
    #[serde(rename = "dog")]
    Dog,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::Chair,
        Category::Table,
        Category::Sofa,
        Category::PottedPlant,
        Category::Basket,
        Category::ExerciseEquipment,
        Category::VacuumCleaner,
        Category::Suitcase,
        Category::Toy,
        Category::Dog,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Chair => "chair",
            Category::Table => "table",
            Category::Sofa => "sofa",
            Category::PottedPlant => "potted plant",
            Category::Basket => "basket",
            Category::ExerciseEquipment => "exercise equipment",
            Category::VacuumCleaner => "vacuum cleaner",
            Category::Suitcase => "suitcase",
            Category::Toy => "toy",
            Category::Dog => "dog",
        }
    }

    /// Position in [`Category::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown object category {s:?}")))
    }
}

/// Compatibility score of one inpainted candidate at one edge endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub scan: String,
    pub edge: [String; 2],
    pub endpoint: String,
    pub category: Category,
    pub candidate_ref: String,
    pub score: f64,
}

impl ScoreRecord {
    /// Key of the endpoint this candidate competes at.
    pub fn endpoint_key(&self) -> (&str, &str, &str, &str) {
        (&self.scan, &self.edge[0], &self.edge[1], &self.endpoint)
    }
}

pub fn parse_scores(text: &str, context: &str) -> Result<Vec<ScoreRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ScoreRecord = serde_json::from_str(line)
            .map_err(|e| Error::format(context, format!("line {}: {e}", i + 1)))?;
        if !rec.score.is_finite() {
            return Err(Error::format(
                context,
                format!("line {}: score is not finite", i + 1),
            ));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scores(&text, &path.display().to_string())
}

pub fn scores_to_jsonl(records: &[ScoreRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("score record serializes"));
        out.push('\n');
    }
    out
}
