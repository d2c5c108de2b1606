use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::NavGraph;
use super::io::PathSpec;
use super::obstruct::{
    build_real_path_resolved, combinations_resolved, ObstructedEpisode, RealPathOutcome,
    MAX_BLOCKED,
};
use crate::error::{Error, Result};

/// Generated Block-1..=x_max sets.
#[derive(Debug, Clone, Default)]
pub struct BlockSets {
    /// `sets[x - 1]` holds the Block-x episodes.
    pub sets: Vec<Vec<ObstructedEpisode>>,
    /// Candidates dropped by the length restriction, per x.
    pub rejected: Vec<usize>,
    pub source_paths: usize,
    /// Source paths that produced at least one episode.
    pub modified_paths: usize,
}

impl BlockSets {
    pub fn x_max(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, x: usize) -> &[ObstructedEpisode] {
        &self.sets[x - 1]
    }

    pub fn modified_fraction(&self) -> f64 {
        if self.source_paths == 0 {
            0.0
        } else {
            self.modified_paths as f64 / self.source_paths as f64
        }
    }
}

struct PathYield {
    episodes: Vec<Vec<ObstructedEpisode>>,
    rejected: Vec<usize>,
}

fn generate_for_path(graph: &NavGraph, path: &PathSpec, x_max: usize) -> Result<PathYield> {
    let nodes = path.resolve(graph)?;
    let mut episodes = vec![Vec::new(); x_max];
    let mut rejected = vec![0; x_max];
    for x in 1..=x_max {
        for combo in combinations_resolved(graph, &nodes, x) {
            match build_real_path_resolved(graph, path, &nodes, &combo)? {
                RealPathOutcome::Episode(ep) => episodes[x - 1].push(ep),
                RealPathOutcome::Rejected(_) => rejected[x - 1] += 1,
            }
        }
    }
    Ok(PathYield { episodes, rejected })
}

/// Build Block-1..=`x_max` sets for every path.
///
/// Paths run in parallel; the result is ordered by path id and then by
/// combination order, so the thread count never changes the output.
pub fn generate_block_sets(
    graphs: &BTreeMap<String, NavGraph>,
    paths: &[PathSpec],
    x_max: usize,
) -> Result<BlockSets> {
    if x_max == 0 || x_max > MAX_BLOCKED {
        return Err(Error::InvalidArgument(format!(
            "x_max must be in 1..={MAX_BLOCKED}, got {x_max}"
        )));
    }
    let mut ordered: Vec<&PathSpec> = paths.iter().collect();
    ordered.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

    let yields = ordered
        .par_iter()
        .map(|path| {
            let graph = graphs.get(&path.scan_id).ok_or_else(|| {
                Error::NotFound(format!("scan {} for path {}", path.scan_id, path.path_id))
            })?;
            generate_for_path(graph, path, x_max)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = BlockSets {
        sets: vec![Vec::new(); x_max],
        rejected: vec![0; x_max],
        source_paths: paths.len(),
        modified_paths: 0,
    };
    for y in yields {
        if y.episodes.iter().any(|s| !s.is_empty()) {
            out.modified_paths += 1;
        }
        for (x, (eps, rej)) in y.episodes.into_iter().zip(y.rejected).enumerate() {
            out.sets[x].extend(eps);
            out.rejected[x] += rej;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockStats {
    pub count: usize,
    pub mean: f64,
    pub min: usize,
    pub max: usize,
}

/// Count and real-path node-count summary of a set of episodes.
pub fn block_set_stats(episodes: &[ObstructedEpisode]) -> Result<BlockStats> {
    stats_of(episodes.iter().map(|e| e.real_len))
}

pub(crate) fn stats_of(lens: impl Iterator<Item = usize>) -> Result<BlockStats> {
    let mut count = 0;
    let mut sum = 0usize;
    let mut min = usize::MAX;
    let mut max = 0;
    for len in lens {
        count += 1;
        sum += len;
        min = min.min(len);
        max = max.max(len);
    }
    if count == 0 {
        return Err(Error::EmptyInput("no episodes to summarize".into()));
    }
    Ok(BlockStats {
        count,
        mean: sum as f64 / count as f64,
        min,
        max,
    })
}

/// One line of `block_<x>.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub path_id: String,
    pub scan: String,
    pub x: usize,
    pub blocked: Vec<[String; 2]>,
    pub real_path: Vec<String>,
    pub real_len: usize,
}

impl From<&ObstructedEpisode> for EpisodeRecord {
    fn from(ep: &ObstructedEpisode) -> Self {
        Self {
            path_id: ep.base.path_id.clone(),
            scan: ep.base.scan_id.clone(),
            x: ep.x,
            blocked: ep
                .blocked
                .iter()
                .map(|(a, b)| [a.clone(), b.clone()])
                .collect(),
            real_path: ep.real_path.clone(),
            real_len: ep.real_len,
        }
    }
}

impl EpisodeRecord {
    /// Re-attach the source path (instructions, heading, split).
    pub fn into_episode(self, paths: &HashMap<&str, &PathSpec>) -> Result<ObstructedEpisode> {
        let base = paths
            .get(self.path_id.as_str())
            .ok_or_else(|| Error::NotFound(format!("source path {}", self.path_id)))?;
        if base.scan_id != self.scan {
            return Err(Error::InvalidArgument(format!(
                "episode {} names scan {} but its source path is on {}",
                self.path_id, self.scan, base.scan_id
            )));
        }
        Ok(ObstructedEpisode {
            base: (*base).clone(),
            blocked: self.blocked.into_iter().map(|[a, b]| (a, b)).collect(),
            x: self.x,
            real_path: self.real_path,
            real_len: self.real_len,
        })
    }
}

pub fn block_file_name(x: usize) -> String {
    format!("block_{x}.jsonl")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn episodes_to_jsonl(episodes: &[ObstructedEpisode]) -> String {
    let mut out = String::new();
    for ep in episodes {
        out.push_str(&serde_json::to_string(&EpisodeRecord::from(ep)).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// `set,count,mean,min,max`, one row per non-empty set, mean to 2 decimals.
pub fn stats_csv(rows: &[(String, BlockStats)]) -> String {
    let mut out = String::from("set,count,mean,min,max\n");
    for (set, s) in rows {
        let _ = writeln!(out, "{set},{},{:.2},{},{}", s.count, s.mean, s.min, s.max);
    }
    out
}

/// Write `block_<x>.jsonl` for every generated x plus `stats.csv`; returns the
/// files written.
pub fn write_block_sets(out_dir: &Path, sets: &BlockSets) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let mut rows = Vec::new();
    for x in 1..=sets.x_max() {
        let file = out_dir.join(block_file_name(x));
        write_file(&file, &episodes_to_jsonl(sets.set(x)))?;
        written.push(file);
        if let Ok(stats) = block_set_stats(sets.set(x)) {
            rows.push((x.to_string(), stats));
        }
    }
    let file = out_dir.join("stats.csv");
    write_file(&file, &stats_csv(&rows))?;
    written.push(file);
    Ok(written)
}

pub fn read_block_file(path: &Path) -> Result<Vec<EpisodeRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::format(format!("{} line {}", path.display(), i + 1), e))?,
        );
    }
    Ok(records)
}

pub fn record_stats(records: &[EpisodeRecord]) -> Result<BlockStats> {
    stats_of(records.iter().map(|r| r.real_len))
}
