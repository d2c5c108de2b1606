use criterion::{black_box, criterion_group, criterion_main, Criterion};
use obstrnav::filtergmm::{fit_gmm, EmOptions};
use obstrnav::navgraph::generate_block_sets;
use obstrnav::obvln::{sample_batch, CurriculumSchedule};
use obstrnav::panogeom::{endpoint_masks, AnalyticMatcher, CameraIntrinsics, MaskShape};
use obstrnav::simulator::{run_episode, AgentKind};
use obstrnav::toy::toy_pair;
use obstrnav_bench::{corpus, episodes, scores};

fn navgraph(c: &mut Criterion) {
    let corpus = corpus();
    c.bench_function("generate_block_sets", |b| {
        b.iter(|| generate_block_sets(&corpus.graphs, &corpus.paths, 3).unwrap())
    });
}

fn panogeom(c: &mut Criterion) {
    let g = toy_pair();
    let k = CameraIntrinsics::from_degrees(640, 480, 60.0).unwrap();
    let shape = MaskShape::default();
    c.bench_function("endpoint_masks", |b| {
        b.iter(|| {
            endpoint_masks(g.position(0), g.position(1), &k, &shape, &AnalyticMatcher).unwrap()
        })
    });
}

fn filtergmm(c: &mut Criterion) {
    let xs = scores(&corpus(), 10_000);
    c.bench_function("fit_gmm_10k", |b| {
        b.iter(|| fit_gmm(black_box(&xs), &EmOptions::default()).unwrap())
    });
}

fn curriculum(c: &mut Criterion) {
    let pool: Vec<u32> = (0..1_000).collect();
    let schedule = CurriculumSchedule::default();
    let mut t = 0u64;
    c.bench_function("sample_batch_32", |b| {
        b.iter(|| {
            t += 1;
            sample_batch(t, &schedule, 32, &pool, &pool, t)
                .unwrap()
                .len()
        })
    });
}

fn simulator(c: &mut Criterion) {
    let corpus = corpus();
    let eps = episodes(&corpus);
    let mut group = c.benchmark_group("episodes");
    for agent in [AgentKind::Follower, AgentKind::detour()] {
        group.bench_function(agent.name(), |b| {
            b.iter(|| {
                for ep in &eps[..200.min(eps.len())] {
                    run_episode(&corpus.graphs[&ep.scan_id], ep, agent).unwrap();
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, navgraph, panogeom, filtergmm, curriculum, simulator);
criterion_main!(benches);
