//! Shared fixtures for the criterion benches.

use obstrnav::navgraph::generate_block_sets;
use obstrnav::simulator::SimEpisode;
use obstrnav::toy::{synthetic_scores, toy_corpus, ToyCorpus, ToyOptions};

/// Larger toy corpus than the default: 8 scans of 10x10 grids with some
/// edges removed.
pub fn corpus() -> ToyCorpus {
    let options = ToyOptions {
        scans: 8,
        side: 10,
        removal: 0.15,
        paths_per_scan: 40,
    };
    toy_corpus(17, &options).expect("toy corpus")
}

/// Block-1..=3 episodes of `corpus`, ready for the simulator.
pub fn episodes(corpus: &ToyCorpus) -> Vec<SimEpisode> {
    let sets = generate_block_sets(&corpus.graphs, &corpus.paths, 3).expect("block sets");
    sets.sets.iter().flatten().map(SimEpisode::from).collect()
}

/// Bimodal score sample of roughly `n` values.
pub fn scores(corpus: &ToyCorpus, n: usize) -> Vec<f64> {
    let graph = corpus.graphs.values().next().expect("one scan");
    synthetic_scores(graph, n / 10, 3)
        .into_iter()
        .map(|r| r.score)
        .collect()
}
