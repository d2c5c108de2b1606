//! Run configuration shared by the CLI commands.
//!
//! A single JSON object. Every field is optional and falls back to the
//! defaults below. The curriculum and mechanism parameters may be given
//! either nested (`"schedule": {"alpha_max": ..}`) or flat at the top level
//! (`"alpha_max": ..`), but not both. Relative paths are resolved against
//! the directory holding the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::navgraph::MAX_BLOCKED;
use crate::obvln::{CurriculumSchedule, DEFAULT_THETA, DEFAULT_VIRTUAL_DISTANCE};
use crate::panogeom::{CameraIntrinsics, MaskShape};
use crate::worker::DEFAULT_PROMPT_TEMPLATE;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntrinsicsConfig {
    pub width: u32,
    pub height: u32,
    pub vfov_deg: f64,
}

impl Default for IntrinsicsConfig {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            vfov_deg: 60.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskConfig {
    pub bottom_frac: f64,
    pub top_frac: f64,
}

impl Default for MaskConfig {
    fn default() -> Self {
        let s = MaskShape::default();
        Self {
            bottom_frac: s.bottom_frac,
            top_frac: s.top_frac,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub alpha_max: f64,
    pub c: u64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        let s = CurriculumSchedule::default();
        Self {
            alpha_max: s.alpha_max,
            c: s.c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismConfig {
    pub d: f64,
    pub theta: f64,
}

impl Default for MechanismConfig {
    fn default() -> Self {
        Self {
            d: DEFAULT_VIRTUAL_DISTANCE,
            theta: DEFAULT_THETA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub connectivity_dir: Option<PathBuf>,
    pub paths_file: Option<PathBuf>,
    pub scores_file: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub x_max: usize,
    pub seed: u64,
    pub intrinsics: IntrinsicsConfig,
    pub mask: MaskConfig,
    pub schedule: ScheduleConfig,
    pub mechanism: MechanismConfig,
    pub prompt_template: String,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            connectivity_dir: None,
            paths_file: None,
            scores_file: None,
            out_dir: PathBuf::from("out"),
            x_max: MAX_BLOCKED,
            seed: 0,
            intrinsics: IntrinsicsConfig::default(),
            mask: MaskConfig::default(),
            schedule: ScheduleConfig::default(),
            mechanism: MechanismConfig::default(),
            prompt_template: DEFAULT_PROMPT_TEMPLATE.to_string(),
        }
    }
}

/// On-disk form, before defaults and the flat aliases are folded in.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    connectivity_dir: Option<PathBuf>,
    paths_file: Option<PathBuf>,
    scores_file: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    x_max: Option<usize>,
    seed: Option<u64>,
    intrinsics: Option<IntrinsicsConfig>,
    mask: Option<MaskConfig>,
    schedule: Option<ScheduleConfig>,
    mechanism: Option<MechanismConfig>,
    prompt_template: Option<String>,
    alpha_max: Option<f64>,
    c: Option<u64>,
    theta: Option<f64>,
    d: Option<f64>,
}

fn config_err(message: impl Into<String>) -> Error {
    Error::Config(message.into())
}

impl Config {
    /// Parse config JSON. `base` anchors relative paths.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        let defaults = Config::default();

        let flat_schedule = raw.alpha_max.is_some() || raw.c.is_some();
        if flat_schedule && raw.schedule.is_some() {
            return Err(config_err(
                "schedule given both nested and as top-level alpha_max/c",
            ));
        }
        let flat_mechanism = raw.theta.is_some() || raw.d.is_some();
        if flat_mechanism && raw.mechanism.is_some() {
            return Err(config_err(
                "mechanism given both nested and as top-level theta/d",
            ));
        }
        let schedule = raw.schedule.unwrap_or(ScheduleConfig {
            alpha_max: raw.alpha_max.unwrap_or(defaults.schedule.alpha_max),
            c: raw.c.unwrap_or(defaults.schedule.c),
        });
        let mechanism = raw.mechanism.unwrap_or(MechanismConfig {
            theta: raw.theta.unwrap_or(defaults.mechanism.theta),
            d: raw.d.unwrap_or(defaults.mechanism.d),
        });
        let anchor = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

        let config = Config {
            connectivity_dir: raw.connectivity_dir.map(anchor),
            paths_file: raw.paths_file.map(anchor),
            scores_file: raw.scores_file.map(anchor),
            out_dir: raw.out_dir.map(anchor).unwrap_or(defaults.out_dir),
            x_max: raw.x_max.unwrap_or(defaults.x_max),
            seed: raw.seed.unwrap_or(defaults.seed),
            intrinsics: raw.intrinsics.unwrap_or(defaults.intrinsics),
            mask: raw.mask.unwrap_or(defaults.mask),
            schedule,
            mechanism,
            prompt_template: raw.prompt_template.unwrap_or(defaults.prompt_template),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_max == 0 || self.x_max > MAX_BLOCKED {
            return Err(config_err(format!(
                "x_max must be in 1..={MAX_BLOCKED}, got {}",
                self.x_max
            )));
        }
        self.camera()?;
        let m = self.mask;
        if !(m.top_frac > 0.0 && m.top_frac <= m.bottom_frac && m.bottom_frac <= 1.0) {
            return Err(config_err(format!(
                "mask fractions must satisfy 0 < top_frac <= bottom_frac <= 1, got {} and {}",
                m.top_frac, m.bottom_frac
            )));
        }
        self.curriculum()?;
        let k = self.mechanism;
        if !(k.theta.is_finite() && k.theta > 0.0 && k.d.is_finite() && k.d > 0.0) {
            return Err(config_err(format!(
                "theta and d must be positive, got {} and {}",
                k.theta, k.d
            )));
        }
        if !self.prompt_template.contains("{object}") {
            return Err(config_err("prompt_template lacks the {object} placeholder"));
        }
        Ok(())
    }

    pub fn camera(&self) -> Result<CameraIntrinsics> {
        let i = self.intrinsics;
        CameraIntrinsics::from_degrees(i.width, i.height, i.vfov_deg)
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn mask_shape(&self) -> MaskShape {
        MaskShape {
            bottom_frac: self.mask.bottom_frac,
            top_frac: self.mask.top_frac,
        }
    }

    pub fn curriculum(&self) -> Result<CurriculumSchedule> {
        CurriculumSchedule::new(self.schedule.alpha_max, self.schedule.c)
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn require_connectivity_dir(&self) -> Result<&Path> {
        self.connectivity_dir
            .as_deref()
            .ok_or_else(|| config_err("connectivity_dir is not set"))
    }

    pub fn require_paths_file(&self) -> Result<&Path> {
        self.paths_file
            .as_deref()
            .ok_or_else(|| config_err("paths_file is not set"))
    }
}
