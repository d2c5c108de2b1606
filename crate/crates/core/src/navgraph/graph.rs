use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

/// Distances closer than this are treated as ties when choosing detours.
pub(crate) const TIE_EPS: f64 = 1e-9;

pub fn distance(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub position: Point3,
}

/// Undirected edge between two node indices, stored with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    lo: usize,
    hi: usize,
}

impl EdgeKey {
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.lo, self.hi)
    }

    pub fn touches(&self, node: usize) -> bool {
        self.lo == node || self.hi == node
    }
}

pub type EdgeSet = BTreeSet<EdgeKey>;

/// Undirected, metric navigation graph of one scan.
///
/// Nodes are kept sorted by id, so comparing node indices is the same as
/// comparing node ids lexicographically. Edge weights are the Euclidean
/// distances between endpoint positions.
#[derive(Debug, Clone)]
pub struct NavGraph {
    scan_id: String,
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<(usize, f64)>>,
    edge_count: usize,
}

impl NavGraph {
    pub fn new<S: AsRef<str>>(
        scan_id: impl Into<String>,
        nodes: Vec<(String, Point3)>,
        edges: &[(S, S)],
    ) -> Result<Self> {
        let scan_id = scan_id.into();
        let mut nodes: Vec<Node> = nodes
            .into_iter()
            .map(|(id, position)| Node { id, position })
            .collect();
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate node id `{}` in scan {scan_id}",
                    node.id
                )));
            }
        }

        let mut keys = EdgeSet::new();
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = *index
                .get(a)
                .ok_or_else(|| Error::UnknownNode(a.to_string()))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| Error::UnknownNode(b.to_string()))?;
            if ia == ib {
                return Err(Error::InvalidArgument(format!("self-loop on `{a}`")));
            }
            keys.insert(EdgeKey::new(ia, ib));
        }

        let mut adjacency = vec![Vec::new(); nodes.len()];
        for key in &keys {
            let (a, b) = key.endpoints();
            let w = distance(&nodes[a].position, &nodes[b].position);
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(n, _)| n);
        }

        Ok(Self {
            scan_id,
            nodes,
            index,
            adjacency,
            edge_count: keys.len(),
        })
    }

    pub fn scan_id(&self) -> &str {
        &self.scan_id
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn id(&self, node: usize) -> &str {
        &self.nodes[node].id
    }

    pub fn position(&self, node: usize) -> &Point3 {
        &self.nodes[node].position
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// Neighbors of `node` with edge weights, sorted by neighbor index.
    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    pub fn edge_weight(&self, a: usize, b: usize) -> Option<f64> {
        self.adjacency[a]
            .binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|i| self.adjacency[a][i].1)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_weight(a, b).is_some()
    }

    /// All edges, each reported once with `lo < hi`.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeKey, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, list)| {
            list.iter()
                .filter(move |&&(b, _)| a < b)
                .map(move |&(b, w)| (EdgeKey::new(a, b), w))
        })
    }

    pub fn edge_ids(&self, key: EdgeKey) -> (&str, &str) {
        let (a, b) = key.endpoints();
        (self.id(a), self.id(b))
    }

    /// Whether `from` reaches `to` when the edges in `removed` are deleted.
    pub fn connected(&self, from: usize, to: usize, removed: &EdgeSet) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if seen[v] || removed.contains(&EdgeKey::new(u, v)) {
                    continue;
                }
                if v == to {
                    return true;
                }
                seen[v] = true;
                queue.push_back(v);
            }
        }
        false
    }

    /// Metric single-source distances with `removed` deleted; unreachable
    /// nodes get `f64::INFINITY`.
    pub fn distances_from(&self, source: usize, removed: &EdgeSet) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapEntry {
            cost: 0.0,
            node: source,
        });
        while let Some(HeapEntry { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for &(next, w) in &self.adjacency[node] {
                if removed.contains(&EdgeKey::new(node, next)) {
                    continue;
                }
                let candidate = cost + w;
                if candidate < dist[next] {
                    dist[next] = candidate;
                    heap.push(HeapEntry {
                        cost: candidate,
                        node: next,
                    });
                }
            }
        }
        dist
    }

    /// Metric shortest path from `from` to `to` avoiding `removed`.
    ///
    /// Among paths whose lengths agree within [`TIE_EPS`], the one with the
    /// lexicographically smallest node-id sequence wins. Because node indices
    /// follow id order, a greedy walk over the tight edges toward `to` that
    /// always takes the smallest index yields that sequence.
    pub fn shortest_path(
        &self,
        from: usize,
        to: usize,
        removed: &EdgeSet,
    ) -> Option<(f64, Vec<usize>)> {
        let to_target = self.distances_from(to, removed);
        let total = to_target[from];
        if !total.is_finite() {
            return None;
        }
        let mut path = vec![from];
        let mut current = from;
        while current != to {
            let here = to_target[current];
            let next = self.adjacency[current]
                .iter()
                .filter(|&&(n, w)| {
                    !removed.contains(&EdgeKey::new(current, n))
                        && to_target[n] < here
                        && (w + to_target[n] - here).abs() <= TIE_EPS
                })
                .map(|&(n, _)| n)
                .next()?;
            path.push(next);
            current = next;
        }
        Some((total, path))
    }

    /// Sum of edge weights along `nodes`; `None` if two consecutive nodes are
    /// not adjacent.
    pub fn path_length(&self, nodes: &[usize]) -> Option<f64> {
        nodes.windows(2).map(|w| self.edge_weight(w[0], w[1])).sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct HeapEntry {
    pub(crate) cost: f64,
    pub(crate) node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // Min-heap on cost, then on node index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}
