use std::collections::{BTreeMap, BinaryHeap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::navgraph::{distance, HeapEntry, Point3};
use crate::panogeom::unit_direction;

/// Placeholder for the unseen far end of a blocked edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VirtualNode {
    pub id: String,
    pub position: Point3,
    pub source: String,
    /// Absolute (heading, elevation) from the source toward the blocked neighbor.
    pub direction: (f64, f64),
    /// Blocked edge endpoints, sorted.
    pub blocked_edge: [String; 2],
    /// Real node this placeholder was merged into, if any.
    pub merged_with: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Real,
    Virtual(usize),
}

/// Topological map built by an agent during one episode.
///
/// Real nodes and observed edges are weighted by Euclidean length. Virtual
/// nodes are isolated until merged, at which point they are joined to the
/// real node by an edge of weight zero.
#[derive(Debug, Clone, Default)]
pub struct TopoMap {
    ids: Vec<String>,
    positions: Vec<Point3>,
    slots: Vec<Slot>,
    index: BTreeMap<String, usize>,
    adjacency: Vec<Vec<(usize, f64)>>,
    virtuals: Vec<VirtualNode>,
    spawned: BTreeMap<(String, [String; 2]), usize>,
}

fn sorted_edge(a: &str, b: &str) -> [String; 2] {
    if a <= b {
        [a.to_string(), b.to_string()]
    } else {
        [b.to_string(), a.to_string()]
    }
}

impl TopoMap {
    pub fn new() -> Self {
        Self::default()
    }

    fn push_node(&mut self, id: String, position: Point3, slot: Slot) -> usize {
        let i = self.ids.len();
        self.index.insert(id.clone(), i);
        self.ids.push(id);
        self.positions.push(position);
        self.slots.push(slot);
        self.adjacency.push(Vec::new());
        i
    }

    fn lookup(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    fn link(&mut self, a: usize, b: usize, w: f64) {
        if !self.adjacency[a].iter().any(|&(n, _)| n == b) {
            self.adjacency[a].push((b, w));
            self.adjacency[b].push((a, w));
        }
    }

    /// Record a real node; later calls with the same id are ignored.
    pub fn observe_node(&mut self, id: &str, position: Point3) -> Result<()> {
        match self.index.get(id) {
            Some(&i) if self.slots[i] != Slot::Real => {
                Err(Error::InvalidArgument(format!("{id} names a virtual node")))
            }
            Some(_) => Ok(()),
            None => {
                self.push_node(id.to_string(), position, Slot::Real);
                Ok(())
            }
        }
    }

    /// Record a traversable edge between two known real nodes.
    pub fn observe_edge(&mut self, a: &str, b: &str) -> Result<()> {
        let (i, j) = (self.lookup(a)?, self.lookup(b)?);
        if self.slots[i] != Slot::Real || self.slots[j] != Slot::Real {
            return Err(Error::InvalidArgument(format!(
                "edge {a}-{b} touches a virtual node"
            )));
        }
        let w = distance(&self.positions[i], &self.positions[j]);
        self.link(i, j, w);
        Ok(())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn position(&self, id: &str) -> Option<Point3> {
        self.index.get(id).map(|&i| self.positions[i])
    }

    pub fn real_node_count(&self) -> usize {
        self.ids.len() - self.virtuals.len()
    }

    pub fn real_nodes(&self) -> impl Iterator<Item = (&str, Point3)> + '_ {
        self.ids
            .iter()
            .zip(&self.positions)
            .zip(&self.slots)
            .filter(|(_, s)| **s == Slot::Real)
            .map(|((id, p), _)| (id.as_str(), *p))
    }

    pub fn virtual_nodes(&self) -> &[VirtualNode] {
        &self.virtuals
    }

    pub fn virtual_node(&self, id: &str) -> Option<&VirtualNode> {
        match self.slots[*self.index.get(id)?] {
            Slot::Virtual(k) => Some(&self.virtuals[k]),
            Slot::Real => None,
        }
    }

    /// Pairs `(virtual id, real id)` joined by zero-weight edges.
    pub fn merge_edges(&self) -> Vec<(&str, &str)> {
        self.virtuals
            .iter()
            .filter_map(|v| v.merged_with.as_deref().map(|m| (v.id.as_str(), m)))
            .collect()
    }

    /// Place a virtual node `d` meters from `source` along `direction`.
    ///
    /// At most one virtual node exists per (source, blocked edge); repeated
    /// calls return the existing id.
    pub fn spawn_virtual_node(
        &mut self,
        source: &str,
        direction: (f64, f64),
        blocked_edge: (&str, &str),
        d: f64,
    ) -> Result<String> {
        let s = self.lookup(source)?;
        let edge = sorted_edge(blocked_edge.0, blocked_edge.1);
        let key = (source.to_string(), edge.clone());
        if let Some(&k) = self.spawned.get(&key) {
            return Ok(self.virtuals[k].id.clone());
        }
        let u = unit_direction(direction.0, direction.1);
        let p = self.positions[s];
        let position = [p[0] + d * u[0], p[1] + d * u[1], p[2] + d * u[2]];
        let k = self.virtuals.len();
        let id = format!("virtual:{k}");
        self.push_node(id.clone(), position, Slot::Virtual(k));
        self.virtuals.push(VirtualNode {
            id: id.clone(),
            position,
            source: source.to_string(),
            direction,
            blocked_edge: edge,
            merged_with: None,
        });
        self.spawned.insert(key, k);
        Ok(id)
    }

    /// Merge every unmerged virtual node that `current` satisfies the
    /// distance test for, given whether the obstruction is in view.
    pub fn try_merge(
        &mut self,
        current: &str,
        sees_obstruction: bool,
        theta: f64,
    ) -> Result<Vec<String>> {
        self.merge_where(current, theta, |_| sees_obstruction)
    }

    /// Like [`TopoMap::try_merge`], but the obstruction counts as seen only
    /// for virtual nodes whose blocked edge is among `blocked_here` and
    /// touches `current`.
    pub fn try_merge_observed(
        &mut self,
        current: &str,
        blocked_here: &[(String, String)],
        theta: f64,
    ) -> Result<Vec<String>> {
        let seen: Vec<[String; 2]> = blocked_here
            .iter()
            .map(|(a, b)| sorted_edge(a, b))
            .collect();
        let cur = current.to_string();
        self.merge_where(current, theta, |v| {
            v.blocked_edge.contains(&cur) && seen.contains(&v.blocked_edge)
        })
    }

    fn merge_where(
        &mut self,
        current: &str,
        theta: f64,
        sees: impl Fn(&VirtualNode) -> bool,
    ) -> Result<Vec<String>> {
        let c = self.lookup(current)?;
        if self.slots[c] != Slot::Real {
            return Err(Error::InvalidArgument(format!(
                "{current} is a virtual node"
            )));
        }
        let here = self.positions[c];
        let mut merged = Vec::new();
        for k in 0..self.virtuals.len() {
            let v = &self.virtuals[k];
            if v.merged_with.is_some() || v.source == current {
                continue;
            }
            let source_pos = self.positions[self.index[&v.source]];
            if distance(&here, &v.position) < theta
                && distance(&here, &source_pos) < theta
                && sees(v)
            {
                let vi = self.index[&v.id];
                self.virtuals[k].merged_with = Some(current.to_string());
                self.link(vi, c, 0.0);
                merged.push(self.virtuals[k].id.clone());
            }
        }
        Ok(merged)
    }

    fn dijkstra(&self, s: usize) -> (Vec<f64>, Vec<Option<usize>>) {
        let mut dist = vec![f64::INFINITY; self.ids.len()];
        let mut prev = vec![None; self.ids.len()];
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        heap.push(HeapEntry { cost: 0.0, node: s });
        while let Some(HeapEntry { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for &(n, w) in &self.adjacency[node] {
                let next = cost + w;
                if next < dist[n] {
                    dist[n] = next;
                    prev[n] = Some(node);
                    heap.push(HeapEntry {
                        cost: next,
                        node: n,
                    });
                }
            }
        }
        (dist, prev)
    }

    /// Shortest map distance from `from` to every node (infinite when unreachable).
    pub fn distances_from(&self, from: &str) -> Result<BTreeMap<String, f64>> {
        let (dist, _) = self.dijkstra(self.lookup(from)?);
        Ok(self.ids.iter().cloned().zip(dist).collect())
    }

    /// Shortest known route between two nodes, endpoints included.
    pub fn route(&self, from: &str, to: &str) -> Result<Option<Vec<String>>> {
        let (s, t) = (self.lookup(from)?, self.lookup(to)?);
        let (dist, prev) = self.dijkstra(s);
        if !dist[t].is_finite() {
            return Ok(None);
        }
        let mut nodes = vec![t];
        while let Some(p) = prev[*nodes.last().expect("nonempty")] {
            nodes.push(p);
        }
        nodes.reverse();
        Ok(Some(
            nodes.into_iter().map(|i| self.ids[i].clone()).collect(),
        ))
    }

    pub fn map_distance(&self, from: &str, to: &str) -> Result<f64> {
        let t = self.lookup(to)?;
        Ok(self.distances_from(from)?[&self.ids[t]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin_map() -> TopoMap {
        let mut m = TopoMap::new();
        m.observe_node("a", [0.0, 0.0, 0.0]).unwrap();
        m
    }

    #[test]
    fn spawn_straight_ahead() {
        let mut m = origin_map();
        let v = m
            .spawn_virtual_node("a", (0.0, 0.0), ("a", "b"), 3.0)
            .unwrap();
        let p = m.position(&v).unwrap();
        assert!(p[0].abs() < 1e-12 && (p[1] - 3.0).abs() < 1e-12 && p[2].abs() < 1e-12);
    }

    #[test]
    fn spawn_is_idempotent() {
        let mut m = origin_map();
        let v1 = m
            .spawn_virtual_node("a", (0.3, 0.0), ("b", "a"), 3.0)
            .unwrap();
        let v2 = m
            .spawn_virtual_node("a", (0.3, 0.0), ("a", "b"), 3.0)
            .unwrap();
        assert_eq!(v1, v2);
        assert_eq!(m.virtual_nodes().len(), 1);
    }

    #[test]
    fn spawn_with_elevation() {
        let mut m = origin_map();
        let v = m
            .spawn_virtual_node("a", (0.0, 30f64.to_radians()), ("a", "b"), 3.0)
            .unwrap();
        let p = m.position(&v).unwrap();
        assert!((p[2] - 1.5).abs() < 1e-12);
        assert!((p[0].hypot(p[1]) - 3.0 * 30f64.to_radians().cos()).abs() < 1e-12);
    }

    #[test]
    fn unknown_source() {
        let mut m = origin_map();
        assert!(matches!(
            m.spawn_virtual_node("zz", (0.0, 0.0), ("zz", "a"), 3.0),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn merge_rules() {
        let mut m = origin_map();
        m.observe_node("c", [0.5, 3.0, 0.0]).unwrap();
        m.observe_node("far", [10.0, 3.0, 0.0]).unwrap();
        let v = m
            .spawn_virtual_node("a", (0.0, 0.0), ("a", "c"), 3.0)
            .unwrap();
        assert!(m.try_merge("far", true, 3.5).unwrap().is_empty());
        assert!(m.try_merge("c", false, 3.5).unwrap().is_empty());
        assert_eq!(m.try_merge("c", true, 3.5).unwrap(), vec![v.clone()]);
        assert_eq!(m.map_distance("c", &v).unwrap(), 0.0);
        assert_eq!(m.merge_edges(), vec![(v.as_str(), "c")]);
    }

    #[test]
    fn observed_merge_needs_the_same_edge() {
        let mut m = origin_map();
        m.observe_node("c", [0.5, 3.0, 0.0]).unwrap();
        m.spawn_virtual_node("a", (0.0, 0.0), ("a", "c"), 3.0)
            .unwrap();
        let other = vec![("c".to_string(), "q".to_string())];
        assert!(m.try_merge_observed("c", &other, 3.5).unwrap().is_empty());
        let same = vec![("c".to_string(), "a".to_string())];
        assert_eq!(m.try_merge_observed("c", &same, 3.5).unwrap().len(), 1);
    }
}
