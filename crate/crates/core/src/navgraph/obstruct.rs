use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::graph::{EdgeKey, EdgeSet, NavGraph};
use super::io::PathSpec;
use crate::error::{Error, Result};

/// Largest number of simultaneously blocked edges.
pub const MAX_BLOCKED: usize = 3;

/// The edge `(nodes[position], nodes[position + 1])` of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathEdge {
    pub position: usize,
    pub from: usize,
    pub to: usize,
}

impl PathEdge {
    pub fn key(&self) -> EdgeKey {
        EdgeKey::new(self.from, self.to)
    }

    pub fn ids<'g>(&self, graph: &'g NavGraph) -> (&'g str, &'g str) {
        (graph.id(self.from), graph.id(self.to))
    }
}

/// Set of path edges blocked together, ordered by position along the path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BlockCombination {
    pub edges: Vec<PathEdge>,
}

impl BlockCombination {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge_set(&self) -> EdgeSet {
        self.edges.iter().map(PathEdge::key).collect()
    }
}

/// A path whose instructed route is cut by `blocked`, together with the
/// detoured route that is actually walkable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructedEpisode {
    pub base: PathSpec,
    /// Blocked edges in path order, oriented along the path.
    pub blocked: Vec<(String, String)>,
    pub x: usize,
    pub real_path: Vec<String>,
    pub real_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    /// Real path has more nodes than `10 + 5x`.
    TooLong { real_len: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RealPathOutcome {
    Episode(ObstructedEpisode),
    Rejected(Rejection),
}

impl RealPathOutcome {
    pub fn episode(self) -> Option<ObstructedEpisode> {
        match self {
            RealPathOutcome::Episode(e) => Some(e),
            RealPathOutcome::Rejected(_) => None,
        }
    }
}

/// Node-count limit on the real path of a Block-`x` episode.
pub fn real_len_limit(x: usize) -> usize {
    10 + 5 * x
}

fn path_edges(nodes: &[usize]) -> impl Iterator<Item = PathEdge> + '_ {
    nodes.windows(2).enumerate().map(|(position, w)| PathEdge {
        position,
        from: w[0],
        to: w[1],
    })
}

pub(crate) fn redundant_edges_resolved(graph: &NavGraph, nodes: &[usize]) -> Vec<PathEdge> {
    path_edges(nodes)
        .filter(|e| graph.connected(e.from, e.to, &EdgeSet::from([e.key()])))
        .collect()
}

pub(crate) fn collectively_redundant(graph: &NavGraph, edges: &[PathEdge]) -> bool {
    let removed: EdgeSet = edges.iter().map(PathEdge::key).collect();
    edges
        .iter()
        .all(|e| graph.connected(e.from, e.to, &removed))
}

/// Path edges whose endpoints stay connected when that edge alone is removed,
/// in path order.
pub fn redundant_edges(graph: &NavGraph, path: &PathSpec) -> Result<Vec<PathEdge>> {
    let nodes = path.resolve(graph)?;
    Ok(redundant_edges_resolved(graph, &nodes))
}

pub(crate) fn combinations_resolved(
    graph: &NavGraph,
    nodes: &[usize],
    x: usize,
) -> Vec<BlockCombination> {
    let redundant = redundant_edges_resolved(graph, nodes);
    redundant
        .into_iter()
        .combinations(x)
        .filter(|edges| collectively_redundant(graph, edges))
        .map(|edges| BlockCombination { edges })
        .collect()
}

/// All size-`x` subsets of the redundant edges that stay redundant when
/// removed together, in lexicographic order of edge positions.
pub fn enumerate_block_combinations(
    graph: &NavGraph,
    path: &PathSpec,
    x: usize,
) -> Result<Vec<BlockCombination>> {
    if x == 0 || x > MAX_BLOCKED {
        return Err(Error::InvalidArgument(format!(
            "block count must be in 1..={MAX_BLOCKED}, got {x}"
        )));
    }
    let nodes = path.resolve(graph)?;
    Ok(combinations_resolved(graph, &nodes, x))
}

pub(crate) fn build_real_path_resolved(
    graph: &NavGraph,
    path: &PathSpec,
    nodes: &[usize],
    combo: &BlockCombination,
) -> Result<RealPathOutcome> {
    if combo.is_empty() {
        return Err(Error::InvalidArgument("empty block combination".into()));
    }
    for e in &combo.edges {
        if nodes.get(e.position) != Some(&e.from) || nodes.get(e.position + 1) != Some(&e.to) {
            return Err(Error::InvalidArgument(format!(
                "edge at position {} does not lie on path {}",
                e.position, path.path_id
            )));
        }
    }
    if !combo
        .edges
        .windows(2)
        .all(|w| w[0].position < w[1].position)
    {
        return Err(Error::InvalidArgument(
            "block combination is not ordered along the path".into(),
        ));
    }
    if !collectively_redundant(graph, &combo.edges) {
        return Err(Error::InvalidArgument(format!(
            "combination on path {} is not collectively redundant",
            path.path_id
        )));
    }

    let removed = combo.edge_set();
    let mut real = Vec::with_capacity(nodes.len() + 4 * combo.len());
    let mut blocked = combo.edges.iter().peekable();
    real.push(nodes[0]);
    for (position, w) in nodes.windows(2).enumerate() {
        if blocked.next_if(|e| e.position == position).is_some() {
            let (_, detour) = graph
                .shortest_path(w[0], w[1], &removed)
                .expect("collective redundancy guarantees a detour");
            // Detour endpoints are the edge endpoints; later path nodes it
            // passes through are kept, so loops survive.
            real.extend_from_slice(&detour[1..]);
        } else {
            real.push(w[1]);
        }
    }

    let x = combo.len();
    let limit = real_len_limit(x);
    if real.len() > limit {
        return Ok(RealPathOutcome::Rejected(Rejection::TooLong {
            real_len: real.len(),
            limit,
        }));
    }
    Ok(RealPathOutcome::Episode(ObstructedEpisode {
        base: path.clone(),
        blocked: combo
            .edges
            .iter()
            .map(|e| (graph.id(e.from).to_string(), graph.id(e.to).to_string()))
            .collect(),
        x,
        real_len: real.len(),
        real_path: real.into_iter().map(|n| graph.id(n).to_string()).collect(),
    }))
}

/// Splice a shortest detour around every blocked edge into the path.
///
/// Detours are computed in the graph with all blocked edges removed; if a
/// detour passes through nodes the path visits later, the resulting loop is
/// kept. Paths longer than `10 + 5x` nodes come back as
/// [`RealPathOutcome::Rejected`].
pub fn build_real_path(
    graph: &NavGraph,
    path: &PathSpec,
    combo: &BlockCombination,
) -> Result<RealPathOutcome> {
    let nodes = path.resolve(graph)?;
    build_real_path_resolved(graph, path, &nodes, combo)
}
