//! Toolkit for obstructed discrete navigation.
//!
//! * [`navgraph`] blocks redundant path edges and builds detoured real paths.
//! * [`panogeom`] locates neighbors in the 36-view panorama and builds and
//!   propagates obstruction masks.
//! * [`filtergmm`] fits per-category two-component mixtures over inpainting
//!   scores and picks the final candidate.
//! * [`obvln`] holds the curriculum sampler and the virtual-node map.
//! * [`simulator`] runs episodes with blocked edges and scores them.
//! * [`worker`] speaks the JSON-lines protocol of the external inpainting
//!   worker.

pub mod config;
pub mod error;
pub mod filtergmm;
pub mod navgraph;
pub mod obvln;
pub mod panogeom;
pub mod simulator;
pub mod toy;
pub mod worker;

pub use error::{Error, Result};
pub use navgraph::{NavGraph, ObstructedEpisode, PathSpec};
