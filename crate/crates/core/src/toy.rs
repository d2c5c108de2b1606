//! Small synthetic corpus used by tests, benches and the CLI smoke paths.
//!
//! Scans are square grids with 2 m spacing, optionally with a share of
//! edges removed at random (the grid stays connected). Paths are shortest
//! routes of 5 to 7 nodes between random node pairs. Everything is a pure
//! function of the seed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use crate::error::{Error, Result};
use crate::filtergmm::{scores_to_jsonl, Category, ScoreRecord};
use crate::navgraph::{EdgeKey, EdgeSet, NavGraph, PathSpec, Point3};

pub const GRID_SPACING: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyOptions {
    pub scans: usize,
    pub side: usize,
    /// Fraction of grid edges the generator tries to remove.
    pub removal: f64,
    pub paths_per_scan: usize,
}

impl Default for ToyOptions {
    fn default() -> Self {
        Self {
            scans: 3,
            side: 6,
            removal: 0.0,
            paths_per_scan: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ToyCorpus {
    pub graphs: BTreeMap<String, NavGraph>,
    pub paths: Vec<PathSpec>,
}

fn node_id(scan: &str, r: usize, c: usize) -> String {
    format!("{scan}_{r:02}_{c:02}")
}

/// A `side` x `side` grid with roughly `removal` of its edges dropped.
pub fn toy_grid(scan: &str, side: usize, removal: f64, rng: &mut impl Rng) -> Result<NavGraph> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for r in 0..side {
        for c in 0..side {
            nodes.push((
                node_id(scan, r, c),
                [c as f64 * GRID_SPACING, r as f64 * GRID_SPACING, 0.0],
            ));
            if c + 1 < side {
                edges.push((node_id(scan, r, c), node_id(scan, r, c + 1)));
            }
            if r + 1 < side {
                edges.push((node_id(scan, r, c), node_id(scan, r + 1, c)));
            }
        }
    }
    let full = NavGraph::new(scan, nodes.clone(), &edges)?;
    let mut keys: Vec<EdgeKey> = full.edges().map(|(k, _)| k).collect();
    keys.shuffle(rng);
    let target = (removal * keys.len() as f64).round() as usize;
    let mut removed = EdgeSet::new();
    for k in keys {
        if removed.len() == target {
            break;
        }
        let (a, b) = k.endpoints();
        removed.insert(k);
        if !full.connected(a, b, &removed) {
            removed.remove(&k);
        }
    }
    let kept: Vec<(String, String)> = edges
        .into_iter()
        .filter(|(a, b)| {
            let key = EdgeKey::new(
                full.index_of(a).expect("grid node"),
                full.index_of(b).expect("grid node"),
            );
            !removed.contains(&key)
        })
        .collect();
    NavGraph::new(scan, nodes, &kept)
}

/// Two nodes 2 m apart on the horizon.
pub fn toy_pair() -> NavGraph {
    NavGraph::new(
        "toy_pair",
        vec![
            ("pair_a".to_string(), [0.0, 0.0, 0.0]),
            ("pair_b".to_string(), [0.0, GRID_SPACING, 0.0]),
        ],
        &[("pair_a", "pair_b")],
    )
    .expect("valid pair")
}

pub fn toy_corpus(seed: u64, options: &ToyOptions) -> Result<ToyCorpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graphs = BTreeMap::new();
    let mut paths = Vec::new();
    let mut next_id = 1u64;
    for s in 0..options.scans {
        let scan = format!("toy_{s:02}");
        let graph = toy_grid(&scan, options.side, options.removal, &mut rng)?;
        let n = graph.node_count();
        let mut made = 0;
        let mut tries = 0;
        while made < options.paths_per_scan && tries < 10_000 {
            tries += 1;
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let Some((_, nodes)) = graph.shortest_path(a, b, &EdgeSet::new()) else {
                continue;
            };
            if !(5..=7).contains(&nodes.len()) {
                continue;
            }
            let ids: Vec<String> = nodes.iter().map(|&i| graph.id(i).to_string()).collect();
            paths.push(PathSpec {
                path_id: next_id.to_string(),
                scan_id: scan.clone(),
                instructions: vec![format!("Walk from {} to {}.", ids[0], ids[ids.len() - 1])],
                nodes: ids,
                start_heading: 0.0,
                split: Some("toy".to_string()),
            });
            next_id += 1;
            made += 1;
        }
        graphs.insert(scan, graph);
    }
    Ok(ToyCorpus { graphs, paths })
}

/// Matterport-style connectivity JSON for `graph`.
pub fn connectivity_json(graph: &NavGraph) -> String {
    let n = graph.node_count();
    let entries: Vec<_> = (0..n)
        .map(|i| {
            let p: &Point3 = graph.position(i);
            json!({
                "image_id": graph.id(i),
                "pose": [1.0, 0.0, 0.0, p[0], 0.0, 1.0, 0.0, p[1], 0.0, 0.0, 1.0, p[2], 0.0, 0.0, 0.0, 1.0],
                "included": true,
                "unobstructed": (0..n).map(|j| graph.has_edge(i, j)).collect::<Vec<_>>(),
            })
        })
        .collect();
    serde_json::to_string(&entries).expect("connectivity serializes")
}

/// R2R-style episode JSON for `paths`.
pub fn paths_json(paths: &[PathSpec]) -> String {
    let entries: Vec<_> = paths
        .iter()
        .map(|p| {
            json!({
                "path_id": p.path_id.parse::<u64>().map(serde_json::Value::from).unwrap_or_else(|_| p.path_id.clone().into()),
                "scan": p.scan_id,
                "path": p.nodes,
                "heading": p.start_heading,
                "instructions": p.instructions,
            })
        })
        .collect();
    serde_json::to_string_pretty(&entries).expect("paths serialize") + "\n"
}

/// Where [`write_fixtures`] put things.
#[derive(Debug, Clone)]
pub struct FixturePaths {
    pub connectivity_dir: PathBuf,
    pub paths_file: PathBuf,
    pub scores_file: PathBuf,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Write the corpus (plus the two-node scan and synthetic scores) under `dir`.
pub fn write_fixtures(dir: &Path, corpus: &ToyCorpus, seed: u64) -> Result<FixturePaths> {
    let connectivity_dir = dir.join("connectivity");
    fs::create_dir_all(&connectivity_dir).map_err(|e| Error::io(&connectivity_dir, e))?;
    let pair = toy_pair();
    for graph in corpus.graphs.values().chain([&pair]) {
        let file = connectivity_dir.join(format!("{}_connectivity.json", graph.scan_id()));
        write(&file, &connectivity_json(graph))?;
    }
    let paths_file = dir.join("R2R_toy.json");
    write(&paths_file, &paths_json(&corpus.paths))?;
    let scores_file = dir.join("scores.jsonl");
    let first = corpus
        .graphs
        .values()
        .next()
        .ok_or_else(|| Error::EmptyInput("corpus has no scans".into()))?;
    write(
        &scores_file,
        &scores_to_jsonl(&synthetic_scores(first, 60, seed)),
    )?;
    Ok(FixturePaths {
        connectivity_dir,
        paths_file,
        scores_file,
    })
}

/// Bimodal compatibility scores: one candidate per category at each of up
/// to `endpoints` edge endpoints of `graph`. Success scores follow
/// N(0.30, 0.03^2) and failures N(0.15, 0.03^2), each with probability 1/2.
pub fn synthetic_scores(graph: &NavGraph, endpoints: usize, seed: u64) -> Vec<ScoreRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let success = Normal::new(0.30, 0.03).expect("valid normal");
    let failure = Normal::new(0.15, 0.03).expect("valid normal");
    let mut out = Vec::new();
    let sides = graph.edges().flat_map(|(k, _)| {
        let (a, b) = k.endpoints();
        [(k, a), (k, b)]
    });
    for (k, end) in sides.take(endpoints) {
        let (a, b) = graph.edge_ids(k);
        for category in Category::ALL {
            let score = if rng.gen_bool(0.5) {
                success.sample(&mut rng)
            } else {
                failure.sample(&mut rng)
            };
            out.push(ScoreRecord {
                scan: graph.scan_id().to_string(),
                edge: [a.to_string(), b.to_string()],
                endpoint: graph.id(end).to_string(),
                category,
                candidate_ref: format!(
                    "{a}__{b}/{}/cand_{:02}.png",
                    graph.id(end),
                    category.index()
                ),
                score,
            });
        }
    }
    out
}
