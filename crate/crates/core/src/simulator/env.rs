use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::navgraph::{EdgeKey, EdgeSet, NavGraph, ObstructedEpisode, PathSpec, Point3};
use crate::panogeom::absolute_direction;

/// Action cap per episode.
pub const MAX_STEPS: usize = 30;
/// Navigation error below which an episode counts as a success, in meters.
pub const SUCCESS_RADIUS: f64 = 3.0;

/// Episode as seen by the simulator: the instructed path plus the edges
/// blocked in this scene (empty for the unmodified environment).
#[derive(Debug, Clone, PartialEq)]
pub struct SimEpisode {
    pub path_id: String,
    pub scan_id: String,
    /// Instructed node sequence; its last node is the goal.
    pub path: Vec<String>,
    pub blocked: Vec<(String, String)>,
    /// Number of blocked edges; 0 for unmodified episodes.
    pub x: usize,
}

impl From<&PathSpec> for SimEpisode {
    fn from(p: &PathSpec) -> Self {
        Self {
            path_id: p.path_id.clone(),
            scan_id: p.scan_id.clone(),
            path: p.nodes.clone(),
            blocked: Vec::new(),
            x: 0,
        }
    }
}

impl From<&ObstructedEpisode> for SimEpisode {
    fn from(e: &ObstructedEpisode) -> Self {
        Self {
            path_id: e.base.path_id.clone(),
            scan_id: e.base.scan_id.clone(),
            path: e.base.nodes.clone(),
            blocked: e.blocked.clone(),
            x: e.x,
        }
    }
}

impl SimEpisode {
    pub fn goal(&self) -> &str {
        self.path.last().map(String::as_str).unwrap_or_default()
    }

    pub(crate) fn blocked_set(&self, graph: &NavGraph) -> Result<EdgeSet> {
        self.blocked
            .iter()
            .map(|(a, b)| {
                let (i, j) = (graph.require(a)?, graph.require(b)?);
                if !graph.has_edge(i, j) {
                    return Err(Error::InvalidEpisode(format!(
                        "blocked pair {a}-{b} is not an edge"
                    )));
                }
                Ok(EdgeKey::new(i, j))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    MoveTo(String),
    Stop,
}

/// One navigable neighbor of the current node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborView {
    pub id: String,
    /// Absolute heading from the current node, radians, 0 along +y, clockwise.
    pub heading: f64,
    pub elevation: f64,
    pub distance: f64,
    /// Whether the connecting edge is obstructed.
    pub blocked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub current: String,
    pub position: Point3,
    pub neighbors: Vec<NeighborView>,
    pub goal_visible: bool,
    /// Set when the previous action tried to cross a blocked edge.
    pub blocked_attempt: bool,
}

impl Observation {
    pub fn neighbor(&self, id: &str) -> Option<&NeighborView> {
        self.neighbors.iter().find(|n| n.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Stopped,
    StepLimit,
}

/// Outcome of a finished episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeResult {
    pub trajectory: Vec<String>,
    #[serde(rename = "TL")]
    pub tl: f64,
    #[serde(rename = "NE")]
    pub ne: f64,
    pub success: bool,
    #[serde(rename = "SPL")]
    pub spl: f64,
    pub stop_reason: StopReason,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Continue(Observation),
    Finished(EpisodeResult),
}

/// Trajectory metrics in the graph with `blocked` removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub tl: f64,
    pub ne: f64,
    pub success: bool,
    pub spl: f64,
    /// Shortest start-to-goal length used to normalize SPL.
    pub shortest: f64,
}

/// TL, NE, success and SPL for a trajectory given as node indices.
pub fn compute_metrics(
    graph: &NavGraph,
    blocked: &EdgeSet,
    trajectory: &[usize],
    goal: usize,
) -> Result<Metrics> {
    let (&start, &stop) = match (trajectory.first(), trajectory.last()) {
        (Some(s), Some(t)) => (s, t),
        _ => return Err(Error::InvalidEpisode("empty trajectory".into())),
    };
    let to_goal = graph.distances_from(goal, blocked);
    let shortest = to_goal[start];
    if !shortest.is_finite() {
        return Err(Error::InvalidEpisode(format!(
            "goal {} unreachable from {}",
            graph.id(goal),
            graph.id(start)
        )));
    }
    if shortest <= 0.0 {
        return Err(Error::InvalidEpisode(format!(
            "start {} is the goal",
            graph.id(start)
        )));
    }
    let mut tl = 0.0;
    for w in trajectory.windows(2) {
        tl += graph.edge_weight(w[0], w[1]).ok_or_else(|| {
            Error::InvalidEpisode(format!(
                "{} and {} are not adjacent",
                graph.id(w[0]),
                graph.id(w[1])
            ))
        })?;
    }
    let ne = to_goal[stop];
    let success = ne < SUCCESS_RADIUS;
    let spl = if success {
        shortest / shortest.max(tl)
    } else {
        0.0
    };
    Ok(Metrics {
        tl,
        ne,
        success,
        spl,
        shortest,
    })
}

/// State of one running episode.
#[derive(Debug, Clone)]
pub struct Env<'g> {
    graph: &'g NavGraph,
    blocked: EdgeSet,
    current: usize,
    goal: usize,
    trajectory: Vec<usize>,
    traveled: f64,
    steps: usize,
    max_steps: usize,
    done: bool,
}

impl<'g> Env<'g> {
    pub fn reset(graph: &'g NavGraph, episode: &SimEpisode) -> Result<(Self, Observation)> {
        let start = episode.path.first().ok_or_else(|| {
            Error::InvalidEpisode(format!("episode {} has no nodes", episode.path_id))
        })?;
        let current = graph.require(start)?;
        let goal = graph.require(episode.goal())?;
        let env = Self {
            graph,
            blocked: episode.blocked_set(graph)?,
            current,
            goal,
            trajectory: vec![current],
            traveled: 0.0,
            steps: 0,
            max_steps: MAX_STEPS,
            done: false,
        };
        let obs = env.observe(false)?;
        Ok((env, obs))
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn graph(&self) -> &'g NavGraph {
        self.graph
    }

    pub fn blocked(&self) -> &EdgeSet {
        &self.blocked
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn trajectory(&self) -> &[usize] {
        &self.trajectory
    }

    pub fn traveled(&self) -> f64 {
        self.traveled
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    fn observe(&self, blocked_attempt: bool) -> Result<Observation> {
        let here = *self.graph.position(self.current);
        let neighbors = self
            .graph
            .neighbors(self.current)
            .iter()
            .map(|&(n, w)| {
                let (heading, elevation) = absolute_direction(&here, self.graph.position(n))?;
                Ok(NeighborView {
                    id: self.graph.id(n).to_string(),
                    heading,
                    elevation,
                    distance: w,
                    blocked: self.blocked.contains(&EdgeKey::new(self.current, n)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Observation {
            current: self.graph.id(self.current).to_string(),
            position: here,
            neighbors,
            goal_visible: self.current == self.goal,
            blocked_attempt,
        })
    }

    fn finish(&mut self, reason: StopReason) -> Result<EpisodeResult> {
        self.done = true;
        let m = compute_metrics(self.graph, &self.blocked, &self.trajectory, self.goal)?;
        Ok(EpisodeResult {
            trajectory: self
                .trajectory
                .iter()
                .map(|&i| self.graph.id(i).to_string())
                .collect(),
            tl: self.traveled,
            ne: m.ne,
            success: m.success,
            spl: m.spl,
            stop_reason: reason,
            steps: self.steps,
        })
    }

    /// Apply one action. A move along a blocked edge leaves the agent in
    /// place but still uses up a step.
    pub fn step(&mut self, action: &Action) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::InvalidAction("episode already finished".into()));
        }
        let target = match action {
            Action::Stop => return self.finish(StopReason::Stopped).map(StepOutcome::Finished),
            Action::MoveTo(id) => id,
        };
        let next = self
            .graph
            .index_of(target)
            .filter(|&n| self.graph.has_edge(self.current, n))
            .ok_or_else(|| {
                Error::InvalidAction(format!(
                    "{target} is not adjacent to {}",
                    self.graph.id(self.current)
                ))
            })?;
        self.steps += 1;
        let blocked = self.blocked.contains(&EdgeKey::new(self.current, next));
        if !blocked {
            self.traveled += self
                .graph
                .edge_weight(self.current, next)
                .expect("adjacent");
            self.current = next;
            self.trajectory.push(next);
        }
        if self.steps >= self.max_steps {
            return self
                .finish(StopReason::StepLimit)
                .map(StepOutcome::Finished);
        }
        self.observe(blocked).map(StepOutcome::Continue)
    }
}
