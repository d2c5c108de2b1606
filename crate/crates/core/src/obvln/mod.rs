//! Training-side pieces for obstruction-aware agents: a curriculum over
//! original and obstructed episodes, and a topological map that bridges a
//! blocked edge with a virtual node until the far side is reached another
//! way.

mod curriculum;
mod topomap;

pub use curriculum::{sample_batch, CurriculumSchedule, Setting, Slot};
pub use topomap::{TopoMap, VirtualNode};

/// Default merge radius in meters.
pub const DEFAULT_THETA: f64 = 3.0;
/// Default distance from the source node to a new virtual node, in meters.
pub const DEFAULT_VIRTUAL_DISTANCE: f64 = 3.0;
