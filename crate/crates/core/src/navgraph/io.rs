use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::graph::{NavGraph, Point3};
use crate::error::{Error, Result};

/// One instructed path over a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub path_id: String,
    pub scan_id: String,
    pub nodes: Vec<String>,
    pub start_heading: f64,
    pub instructions: Vec<String>,
    /// Dataset split the path came from (train, val_seen, ...), when known.
    pub split: Option<String>,
}

impl PathSpec {
    pub fn goal(&self) -> &str {
        self.nodes.last().map(String::as_str).unwrap_or_default()
    }

    /// Node indices of the path in `graph`, checking adjacency.
    pub fn resolve(&self, graph: &NavGraph) -> Result<Vec<usize>> {
        if self.nodes.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "path {} has fewer than 2 nodes",
                self.path_id
            )));
        }
        let nodes = self
            .nodes
            .iter()
            .map(|id| graph.require(id))
            .collect::<Result<Vec<_>>>()?;
        for w in nodes.windows(2) {
            if !graph.has_edge(w[0], w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "path {}: `{}` and `{}` are not adjacent in scan {}",
                    self.path_id,
                    graph.id(w[0]),
                    graph.id(w[1]),
                    graph.scan_id()
                )));
            }
        }
        Ok(nodes)
    }

    /// Ordering key: numeric ids sort numerically, then everything else by text.
    pub fn sort_key(&self) -> (u8, u64, &str) {
        path_id_key(&self.path_id)
    }
}

/// Ordering key for path ids: numeric ids sort numerically, then everything
/// else by text.
pub fn path_id_key(id: &str) -> (u8, u64, &str) {
    match id.parse::<u64>() {
        Ok(n) => (0, n, id),
        Err(_) => (1, 0, id),
    }
}

#[derive(Deserialize)]
struct ConnectivityEntry {
    image_id: String,
    pose: Vec<f64>,
    included: bool,
    unobstructed: Vec<bool>,
}

/// Parse `<scan_id>_connectivity.json` from `directory`.
///
/// An edge `(i, j)` exists only when both entries are included and both
/// `unobstructed[i][j]` and `unobstructed[j][i]` hold.
pub fn load_connectivity(directory: &Path, scan_id: &str) -> Result<NavGraph> {
    let file = directory.join(format!("{scan_id}_connectivity.json"));
    let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
    parse_connectivity(scan_id, &text)
}

pub fn parse_connectivity(scan_id: &str, text: &str) -> Result<NavGraph> {
    let context = format!("{scan_id}_connectivity.json");
    let raw: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| Error::format(&context, e))?;
    let mut entries = Vec::with_capacity(raw.len());
    for (i, value) in raw.into_iter().enumerate() {
        let entry: ConnectivityEntry = serde_json::from_value(value)
            .map_err(|e| Error::format(format!("{context} entry {i}"), e))?;
        if entry.pose.len() != 16 {
            return Err(Error::format(
                format!("{context} entry {i}"),
                format!("pose has {} values, expected 16", entry.pose.len()),
            ));
        }
        entries.push(entry);
    }
    for (i, entry) in entries.iter().enumerate() {
        if entry.unobstructed.len() != entries.len() {
            return Err(Error::format(
                format!("{context} entry {i}"),
                format!(
                    "unobstructed has {} flags for {} entries",
                    entry.unobstructed.len(),
                    entries.len()
                ),
            ));
        }
    }

    let nodes: Vec<(String, Point3)> = entries
        .iter()
        .filter(|e| e.included)
        .map(|e| (e.image_id.clone(), [e.pose[3], e.pose[7], e.pose[11]]))
        .collect();
    let mut edges = Vec::new();
    for (i, a) in entries.iter().enumerate() {
        for (j, b) in entries.iter().enumerate().skip(i + 1) {
            if a.included && b.included && a.unobstructed[j] && b.unobstructed[i] {
                edges.push((a.image_id.as_str(), b.image_id.as_str()));
            }
        }
    }
    NavGraph::new(scan_id, nodes, &edges)
}

/// Load every scan referenced by `paths` from `directory`.
pub fn load_scans<'a>(
    directory: &Path,
    scan_ids: impl IntoIterator<Item = &'a str>,
) -> Result<BTreeMap<String, NavGraph>> {
    if !directory.is_dir() {
        return Err(Error::NotFound(directory.display().to_string()));
    }
    let mut graphs = BTreeMap::new();
    for scan in scan_ids {
        if !graphs.contains_key(scan) {
            graphs.insert(scan.to_string(), load_connectivity(directory, scan)?);
        }
    }
    Ok(graphs)
}

#[derive(Deserialize)]
struct EpisodeEntry {
    path_id: serde_json::Value,
    scan: String,
    path: Vec<String>,
    #[serde(default)]
    heading: f64,
    #[serde(default)]
    instructions: Vec<String>,
    #[serde(default)]
    split: Option<String>,
}

/// Load an R2R-style episode file (JSON array).
///
/// Entries without a `split` field inherit one from a file stem of the form
/// `R2R_<split>`.
pub fn load_paths(file: &Path) -> Result<Vec<PathSpec>> {
    let text = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    let stem_split = file
        .file_stem()
        .and_then(|s| s.to_str())
        .and_then(|s| s.rsplit_once("R2R_").map(|(_, split)| split.to_string()));
    parse_paths(&text, stem_split.as_deref(), &file.display().to_string())
}

pub fn parse_paths(
    text: &str,
    default_split: Option<&str>,
    context: &str,
) -> Result<Vec<PathSpec>> {
    let raw: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| Error::format(context, e))?;
    raw.into_iter()
        .enumerate()
        .map(|(i, value)| {
            let entry: EpisodeEntry = serde_json::from_value(value)
                .map_err(|e| Error::format(format!("{context} entry {i}"), e))?;
            let path_id = match entry.path_id {
                serde_json::Value::String(s) => s,
                serde_json::Value::Number(n) => n.to_string(),
                other => {
                    return Err(Error::format(
                        format!("{context} entry {i}"),
                        format!("path_id must be a string or number, got {other}"),
                    ))
                }
            };
            if !(4..=7).contains(&entry.path.len()) {
                log::warn!(
                    "path {path_id} has {} nodes; source paths usually have 4 to 7",
                    entry.path.len()
                );
            }
            Ok(PathSpec {
                path_id,
                scan_id: entry.scan,
                nodes: entry.path,
                start_heading: entry.heading,
                instructions: entry.instructions,
                split: entry.split.or_else(|| default_split.map(str::to_string)),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn pose(x: f64, y: f64, z: f64) -> Vec<f64> {
        vec![1., 0., 0., x, 0., 1., 0., y, 0., 0., 1., z, 0., 0., 0., 1.]
    }

    fn entry(id: &str, p: Vec<f64>, included: bool, unobstructed: Vec<bool>) -> serde_json::Value {
        json!({"image_id": id, "pose": p, "included": included, "unobstructed": unobstructed,
               "height": 1.5, "visible": unobstructed})
    }

    #[test]
    fn two_mutual_nodes_make_one_edge() {
        let text = json!([
            entry("a", pose(0., 0., 0.), true, vec![false, true]),
            entry("b", pose(3., 0., 0.), true, vec![true, false]),
        ])
        .to_string();
        let g = parse_connectivity("s", &text).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_weight(0, 1), Some(3.0));
    }

    #[test]
    fn excluded_entries_are_dropped() {
        let text = json!([
            entry("a", pose(0., 0., 0.), true, vec![false, true, true]),
            entry("b", pose(3., 0., 0.), false, vec![true, false, true]),
            entry("c", pose(0., 2., 0.), true, vec![true, true, false]),
        ])
        .to_string();
        let g = parse_connectivity("s", &text).unwrap();
        assert_eq!(g.node_count(), 2);
        assert!(g.index_of("b").is_none());
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn one_sided_flag_gives_no_edge() {
        let text = json!([
            entry("a", pose(0., 0., 0.), true, vec![false, true]),
            entry("b", pose(3., 0., 0.), true, vec![false, false]),
        ])
        .to_string();
        assert_eq!(parse_connectivity("s", &text).unwrap().edge_count(), 0);
    }

    #[test]
    fn malformed_entries_report_their_index() {
        let text = json!([
            entry("a", pose(0., 0., 0.), true, vec![false, true]),
            entry("b", pose(3., 0., 0.), true, vec![true]),
        ])
        .to_string();
        let err = parse_connectivity("s", &text).unwrap_err();
        assert!(
            matches!(&err, Error::Format { context, .. } if context.ends_with("entry 1")),
            "{err}"
        );

        let text =
            json!([{"image_id": "a", "pose": [1.0], "included": true, "unobstructed": [false]}])
                .to_string();
        let err = parse_connectivity("s", &text).unwrap_err();
        assert!(matches!(&err, Error::Format { context, .. } if context.ends_with("entry 0")));
    }

    #[test]
    fn missing_file_is_not_found() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_connectivity(dir.path(), "nope"),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn paths_accept_numeric_ids_and_infer_split() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("R2R_val_seen.json");
        fs::write(
            &file,
            json!([{"path_id": 17, "scan": "s", "path": ["a","b","c","d"], "heading": 1.5,
                    "instructions": ["go", "walk"], "distance": 9.1}])
            .to_string(),
        )
        .unwrap();
        let paths = load_paths(&file).unwrap();
        assert_eq!(paths[0].path_id, "17");
        assert_eq!(paths[0].split.as_deref(), Some("val_seen"));
        assert_eq!(paths[0].goal(), "d");
        assert_eq!(paths[0].instructions.len(), 2);
    }
}
