//! Discrete episode engine over navigation graphs with blocked edges.
//!
//! An agent sees only its current node and the edges leaving it, including
//! which of those are obstructed. Episodes end on `Stop` or after
//! [`MAX_STEPS`] moves and are scored with trajectory length (TL),
//! navigation error (NE, geodesic in the obstructed graph), success
//! (NE below [`SUCCESS_RADIUS`]) and success weighted by path length (SPL).

mod agents;
mod env;
mod eval;

pub use agents::{Agent, AgentKind, DetourAgent, InstructionFollower};
pub use env::{
    compute_metrics, Action, Env, EpisodeResult, Metrics, NeighborView, Observation, SimEpisode,
    StepOutcome, StopReason, MAX_STEPS, SUCCESS_RADIUS,
};
pub use eval::{
    evaluate, results_csv, run_episode, set_name, summarize, trajectories_jsonl, EvalRecord,
    SetSummary,
};
