#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use obstrnav::navgraph::{NavGraph, PathSpec};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random connected graph on `n` nodes: a random spanning tree plus extra
/// edges, nodes scattered in a 20 m square.
pub fn random_graph(rng: &mut impl Rng, n: usize, extra: usize) -> NavGraph {
    let nodes: Vec<(String, [f64; 3])> = (0..n)
        .map(|i| {
            (
                format!("n{i:02}"),
                [rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0), 0.0],
            )
        })
        .collect();
    let mut edges = BTreeSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.insert((j, i));
    }
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<(String, String)> = edges
        .into_iter()
        .map(|(a, b)| (nodes[a].0.clone(), nodes[b].0.clone()))
        .collect();
    NavGraph::new("rand", nodes, &edges).expect("valid random graph")
}

/// Random simple walk of at least two nodes.
pub fn random_path(rng: &mut impl Rng, g: &NavGraph, max_len: usize) -> PathSpec {
    let mut cur = rng.gen_range(0..g.node_count());
    let mut seen = vec![cur];
    while seen.len() < max_len {
        let options: Vec<usize> = g
            .neighbors(cur)
            .iter()
            .map(|&(v, _)| v)
            .filter(|v| !seen.contains(v))
            .collect();
        let Some(&next) = options.choose(rng) else {
            break;
        };
        seen.push(next);
        cur = next;
    }
    if seen.len() < 2 {
        seen.push(g.neighbors(cur)[0].0);
    }
    PathSpec {
        path_id: "1".into(),
        scan_id: g.scan_id().to_string(),
        nodes: seen.iter().map(|&i| g.id(i).to_string()).collect(),
        start_heading: 0.0,
        instructions: vec![],
        split: None,
    }
}

/// Connectivity by BFS with the listed undirected edges removed.
pub fn bfs_connected(g: &NavGraph, removed: &[(usize, usize)], from: usize, to: usize) -> bool {
    let cut = |a: usize, b: usize| {
        removed
            .iter()
            .any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
    };
    let mut seen = vec![false; g.node_count()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            return true;
        }
        for &(v, _) in g.neighbors(u) {
            if !seen[v] && !cut(u, v) {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    false
}
