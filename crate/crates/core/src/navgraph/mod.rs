//! Navigation graphs, instructed paths and obstructed-episode generation.
//!
//! A path edge is *redundant* when its endpoints stay connected after the edge
//! is removed. Combinations of redundant edges are blocked together when every
//! blocked edge keeps its endpoints connected with the whole combination
//! removed. Each surviving combination yields one episode whose real path
//! replaces every blocked edge with the metric shortest detour.

mod blocks;
mod graph;
mod io;
mod obstruct;

pub use blocks::{
    block_file_name, block_set_stats, episodes_to_jsonl, generate_block_sets, read_block_file,
    record_stats, stats_csv, write_block_sets, BlockSets, BlockStats, EpisodeRecord,
};
pub(crate) use graph::HeapEntry;
pub use graph::{distance, EdgeKey, EdgeSet, NavGraph, Node, Point3};
pub use io::{
    load_connectivity, load_paths, load_scans, parse_connectivity, parse_paths, path_id_key,
    PathSpec,
};
pub use obstruct::{
    build_real_path, enumerate_block_combinations, real_len_limit, redundant_edges,
    BlockCombination, ObstructedEpisode, PathEdge, RealPathOutcome, Rejection, MAX_BLOCKED,
};
