use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::env::{Action, Observation, SimEpisode};
use crate::error::Result;
use crate::navgraph::distance;
use crate::obvln::{TopoMap, DEFAULT_THETA, DEFAULT_VIRTUAL_DISTANCE};
use crate::panogeom::unit_direction;

const TIE_EPS: f64 = 1e-9;
/// Pull of the virtual node when choosing where to explore next.
const HEURISTIC_WEIGHT: f64 = 3.0;

/// Policy driven by observations, one instance per episode.
pub trait Agent {
    fn act(&mut self, obs: &Observation) -> Result<Action>;
}

/// The baseline agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AgentKind {
    Follower,
    Detour { theta: f64, d: f64 },
}

impl AgentKind {
    pub fn detour() -> Self {
        AgentKind::Detour {
            theta: DEFAULT_THETA,
            d: DEFAULT_VIRTUAL_DISTANCE,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AgentKind::Follower => "follower",
            AgentKind::Detour { .. } => "detour",
        }
    }

    pub fn build(&self, episode: &SimEpisode) -> Box<dyn Agent> {
        match *self {
            AgentKind::Follower => Box::new(InstructionFollower::new(&episode.path)),
            AgentKind::Detour { theta, d } => Box::new(DetourAgent::new(&episode.path, theta, d)),
        }
    }
}

/// Replays the instructed path. A blocked move is retried once, then the
/// agent stops where it is.
#[derive(Debug, Clone)]
pub struct InstructionFollower {
    path: Vec<String>,
    index: usize,
    retried: bool,
}

impl InstructionFollower {
    pub fn new(path: &[String]) -> Self {
        Self {
            path: path.to_vec(),
            index: 0,
            retried: false,
        }
    }
}

impl Agent for InstructionFollower {
    fn act(&mut self, obs: &Observation) -> Result<Action> {
        if obs.blocked_attempt {
            if self.retried {
                return Ok(Action::Stop);
            }
            self.retried = true;
        } else if self.path.get(self.index + 1) == Some(&obs.current) {
            self.index += 1;
            self.retried = false;
        }
        Ok(match self.path.get(self.index + 1) {
            Some(next) => Action::MoveTo(next.clone()),
            None => Action::Stop,
        })
    }
}

#[derive(Debug, Clone)]
enum Mode {
    Follow,
    Detour {
        virtual_id: String,
        far_end: String,
        resume_from: usize,
    },
}

/// Follows the instructed path and routes around blocked edges with a
/// virtual node placed beyond the obstruction.
///
/// On seeing that the next path edge is blocked, the agent spawns a virtual
/// node in its direction and searches its map toward it. Once the far end
/// is reached (the merge fires there, or the agent stands on a later node
/// of the path) it resumes the path.
#[derive(Debug, Clone)]
pub struct DetourAgent {
    path: Vec<String>,
    index: usize,
    theta: f64,
    d: f64,
    map: TopoMap,
    visited: BTreeSet<String>,
    mode: Mode,
}

impl DetourAgent {
    pub fn new(path: &[String], theta: f64, d: f64) -> Self {
        Self {
            path: path.to_vec(),
            index: 0,
            theta,
            d,
            map: TopoMap::new(),
            visited: BTreeSet::new(),
            mode: Mode::Follow,
        }
    }

    pub fn map(&self) -> &TopoMap {
        &self.map
    }

    fn record(&mut self, obs: &Observation) -> Result<()> {
        self.map.observe_node(&obs.current, obs.position)?;
        for n in &obs.neighbors {
            let u = unit_direction(n.heading, n.elevation);
            let p = obs.position;
            self.map.observe_node(
                &n.id,
                [
                    p[0] + n.distance * u[0],
                    p[1] + n.distance * u[1],
                    p[2] + n.distance * u[2],
                ],
            )?;
            if !n.blocked {
                self.map.observe_edge(&obs.current, &n.id)?;
            }
        }
        self.visited.insert(obs.current.clone());
        Ok(())
    }

    /// Next action while on the path, or `None` to switch to a detour.
    fn follow(&mut self, obs: &Observation) -> Result<Option<Action>> {
        if self.path.get(self.index + 1) == Some(&obs.current) {
            self.index += 1;
        }
        let Some(next) = self.path.get(self.index + 1).cloned() else {
            return Ok(Some(Action::Stop));
        };
        let Some(view) = obs.neighbor(&next) else {
            return Ok(Some(Action::Stop));
        };
        if !(view.blocked || obs.blocked_attempt) {
            return Ok(Some(Action::MoveTo(next)));
        }
        let virtual_id = self.map.spawn_virtual_node(
            &obs.current,
            (view.heading, view.elevation),
            (&obs.current, &next),
            self.d,
        )?;
        self.mode = Mode::Detour {
            virtual_id,
            far_end: next,
            resume_from: self.index + 1,
        };
        Ok(None)
    }

    /// Whether the detour is over; moves the path cursor if so.
    fn detour_done(&mut self, obs: &Observation) -> Result<bool> {
        let Mode::Detour {
            virtual_id,
            resume_from,
            ..
        } = &self.mode
        else {
            return Ok(true);
        };
        let blocked_here: Vec<(String, String)> = obs
            .neighbors
            .iter()
            .filter(|n| n.blocked)
            .map(|n| (obs.current.clone(), n.id.clone()))
            .collect();
        let merged = self
            .map
            .try_merge_observed(&obs.current, &blocked_here, self.theta)?;
        let resume_at = if merged.contains(virtual_id) {
            Some(*resume_from)
        } else {
            (*resume_from..self.path.len())
                .rev()
                .find(|&k| self.path[k] == obs.current)
        };
        match resume_at {
            Some(k) => {
                self.index = k;
                self.mode = Mode::Follow;
                Ok(true)
            }
            None => Ok(false),
        }
    }

    /// One move of the detour search. Candidates are known nodes not yet
    /// visited, plus the far end of the blocked edge. The agent heads for
    /// the one minimizing route length from here plus the weighted
    /// straight-line distance to the virtual node.
    fn explore(&self, obs: &Observation) -> Result<Action> {
        let Mode::Detour {
            virtual_id,
            far_end,
            ..
        } = &self.mode
        else {
            return Ok(Action::Stop);
        };
        let goal = self.map.position(virtual_id).expect("spawned");
        let reach = self.map.distances_from(&obs.current)?;
        let mut best: Option<(f64, &str)> = None;
        for (id, pos) in self.map.real_nodes() {
            if id == obs.current || (self.visited.contains(id) && id != far_end) {
                continue;
            }
            let r = reach[id];
            if !r.is_finite() {
                continue;
            }
            let cost = r + HEURISTIC_WEIGHT * distance(&pos, &goal);
            if best.is_none_or(|(c, b)| cost < c - TIE_EPS || (cost <= c + TIE_EPS && id < b)) {
                best = Some((cost, id));
            }
        }
        let Some((_, target)) = best else {
            return Ok(Action::Stop);
        };
        let route = self
            .map
            .route(&obs.current, target)?
            .expect("reachable target");
        Ok(Action::MoveTo(route[1].clone()))
    }
}

impl Agent for DetourAgent {
    fn act(&mut self, obs: &Observation) -> Result<Action> {
        self.record(obs)?;
        if obs.goal_visible {
            return Ok(Action::Stop);
        }
        // A resumed path can hit a new block straight away, so alternate
        // until one side produces an action.
        loop {
            if let Mode::Follow = self.mode {
                if let Some(action) = self.follow(obs)? {
                    return Ok(action);
                }
            }
            if !self.detour_done(obs)? {
                return self.explore(obs);
            }
        }
    }
}
