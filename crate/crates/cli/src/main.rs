use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use obstrnav::config::Config;
use obstrnav::filtergmm::{
    fit_category_models, models_by_category, read_models, read_scores, scores_to_jsonl, select_all,
    write_models, EmOptions, QualifyRule,
};
use obstrnav::navgraph::{
    block_file_name, generate_block_sets, load_connectivity, load_paths, load_scans,
    read_block_file, record_stats, stats_csv, write_block_sets,
};
use obstrnav::obvln::{sample_batch, Setting};
use obstrnav::panogeom::{endpoint_masks, AnalyticMatcher};
use obstrnav::simulator::{
    evaluate, results_csv, summarize, trajectories_jsonl, AgentKind, SimEpisode,
};
use obstrnav::toy::{toy_corpus, write_fixtures, ToyOptions};
use obstrnav::{Error, Result};

const EXIT_DOMAIN: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "obstrnav", version, about = "Obstructed navigation toolkit")]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate Block-1..x episode sets and stats.csv.
    GenBlocks {
        #[arg(long)]
        x_max: Option<usize>,
    },
    /// Write obstruction masks for both endpoints of an edge.
    Masks {
        #[arg(long)]
        scan: String,
        /// Edge as `a,b`.
        #[arg(long, value_parser = parse_edge)]
        edge: (String, String),
    },
    /// Fit one two-component GMM per category; writes models.json.
    FitGmm {
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Pick one candidate per edge endpoint; writes selected.jsonl.
    Filter {
        #[arg(long)]
        scores: Option<PathBuf>,
        /// Defaults to <out>/models.json.
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Evaluate agents on the original paths and the block sets.
    Simulate {
        /// Both agents when omitted.
        #[arg(long, value_enum)]
        agent: Option<AgentArg>,
        #[arg(long)]
        x_max: Option<usize>,
        /// Directory holding block_<x>.jsonl; defaults to <out>.
        #[arg(long)]
        blocks: Option<PathBuf>,
    },
    /// Print set,count,mean,min,max for block files.
    Stats {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Write a synthetic toy corpus and a config.json pointing at it.
    Toy,
    /// Print the obstructed share and one sampled batch at given steps.
    Curriculum {
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<u64>,
        #[arg(long, default_value_t = 8)]
        batch: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum AgentArg {
    Follower,
    Detour,
}

fn parse_edge(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once(',') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() && !b.contains(',') => {
            Ok((a.to_string(), b.to_string()))
        }
        _ => Err(format!("expected `a,b`, got `{s}`")),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.kind());
            ExitCode::from(if matches!(e, Error::Config(_)) {
                EXIT_USAGE
            } else {
                EXIT_DOMAIN
            })
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    let x_max = match &cli.command {
        Command::GenBlocks { x_max } | Command::Simulate { x_max, .. } => *x_max,
        _ => None,
    };
    if let Some(x) = x_max {
        config.x_max = x;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(&cli)?;
    match &cli.command {
        Command::GenBlocks { .. } => gen_blocks(&config),
        Command::Masks { scan, edge } => masks(&config, scan, edge),
        Command::FitGmm { scores } => fit_gmm(&config, scores.as_deref()),
        Command::Filter { scores, models } => filter(&config, scores.as_deref(), models.as_deref()),
        Command::Simulate { agent, blocks, .. } => simulate(&config, *agent, blocks.as_deref()),
        Command::Stats { files } => stats(files),
        Command::Toy => toy(&config),
        Command::Curriculum { steps, batch } => curriculum(&config, steps, *batch),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn gen_blocks(config: &Config) -> Result<()> {
    let conn = config.require_connectivity_dir()?;
    let paths = load_paths(config.require_paths_file()?)?;
    let graphs = load_scans(conn, paths.iter().map(|p| p.scan_id.as_str()))?;
    let sets = generate_block_sets(&graphs, &paths, config.x_max)?;
    let written = write_block_sets(&config.out_dir, &sets)?;
    info!(
        "{} of {} paths modified; wrote {} files to {}",
        sets.modified_paths,
        sets.source_paths,
        written.len(),
        config.out_dir.display()
    );
    Ok(())
}

fn masks(config: &Config, scan: &str, (a, b): &(String, String)) -> Result<()> {
    let graph = load_connectivity(config.require_connectivity_dir()?, scan)?;
    let (ia, ib) = (graph.require(a)?, graph.require(b)?);
    if !graph.has_edge(ia, ib) {
        return Err(Error::NotFound(format!("edge {a}-{b} in scan {scan}")));
    }
    let camera = config.camera()?;
    let shape = config.mask_shape();
    let dir = config
        .out_dir
        .join("masks")
        .join(scan)
        .join(format!("{a}__{b}"));
    for (from, to) in [(ia, ib), (ib, ia)] {
        let masks = endpoint_masks(
            graph.position(from),
            graph.position(to),
            &camera,
            &shape,
            &AnalyticMatcher,
        )?;
        masks.write(&dir.join(graph.id(from)))?;
        info!(
            "{}: target view {} with {} neighbors",
            graph.id(from),
            masks.mask.view.index(),
            masks.propagated.len()
        );
    }
    Ok(())
}

fn scores_path<'a>(config: &'a Config, flag: Option<&'a Path>) -> Result<&'a Path> {
    flag.or(config.scores_file.as_deref())
        .ok_or_else(|| Error::Config("no scores file: pass --scores or set scores_file".into()))
}

fn fit_gmm(config: &Config, scores: Option<&Path>) -> Result<()> {
    let records = read_scores(scores_path(config, scores)?)?;
    let models = fit_category_models(&records, &EmOptions::default())?;
    for m in models.iter().filter(|m| m.degenerate) {
        warn!("model for {} is degenerate", m.category);
    }
    write_models(&config.out_dir.join("models.json"), &models)
}

fn filter(config: &Config, scores: Option<&Path>, models: Option<&Path>) -> Result<()> {
    let records = read_scores(scores_path(config, scores)?)?;
    let default_models = config.out_dir.join("models.json");
    let models = models_by_category(&read_models(models.unwrap_or(&default_models))?)?;
    let selected = select_all(&records, &models, config.seed, QualifyRule::default())?;
    create_dir(&config.out_dir)?;
    write_text(
        &config.out_dir.join("selected.jsonl"),
        &scores_to_jsonl(&selected),
    )
}

fn simulate(config: &Config, agent: Option<AgentArg>, blocks: Option<&Path>) -> Result<()> {
    let paths = load_paths(config.require_paths_file()?)?;
    let by_id: HashMap<&str, _> = paths.iter().map(|p| (p.path_id.as_str(), p)).collect();
    let mut episodes: Vec<SimEpisode> = paths.iter().map(SimEpisode::from).collect();
    let blocks_dir = blocks.unwrap_or(&config.out_dir);
    for x in 1..=config.x_max {
        let file = blocks_dir.join(block_file_name(x));
        if !file.exists() {
            warn!("{} not found; skipping Block-{x}", file.display());
            continue;
        }
        for record in read_block_file(&file)? {
            episodes.push(SimEpisode::from(&record.into_episode(&by_id)?));
        }
    }
    let scans: BTreeSet<&str> = episodes.iter().map(|e| e.scan_id.as_str()).collect();
    let graphs = load_scans(config.require_connectivity_dir()?, scans)?;

    let detour = AgentKind::Detour {
        theta: config.mechanism.theta,
        d: config.mechanism.d,
    };
    let agents = match agent {
        Some(AgentArg::Follower) => vec![AgentKind::Follower],
        Some(AgentArg::Detour) => vec![detour],
        None => vec![AgentKind::Follower, detour],
    };
    let mut records = Vec::new();
    for kind in agents {
        records.extend(evaluate(&graphs, &episodes, kind)?);
    }
    create_dir(&config.out_dir)?;
    write_text(
        &config.out_dir.join("results.csv"),
        &results_csv(&summarize(&records)),
    )?;
    write_text(
        &config.out_dir.join("trajectories.jsonl"),
        &trajectories_jsonl(&records),
    )?;
    info!("evaluated {} episodes", records.len());
    Ok(())
}

fn stats(files: &[PathBuf]) -> Result<()> {
    let mut rows = Vec::new();
    for file in files {
        let records = read_block_file(file)?;
        let xs: BTreeSet<usize> = records.iter().map(|r| r.x).collect();
        let set = match xs.len() {
            0 => {
                return Err(Error::EmptyInput(format!(
                    "{} has no episodes",
                    file.display()
                )))
            }
            1 => xs.first().expect("one element").to_string(),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "{} mixes block counts {xs:?}",
                    file.display()
                )))
            }
        };
        rows.push((set, record_stats(&records)?));
    }
    print!("{}", stats_csv(&rows));
    Ok(())
}

fn toy(config: &Config) -> Result<()> {
    let dir = &config.out_dir;
    create_dir(dir)?;
    let corpus = toy_corpus(config.seed, &ToyOptions::default())?;
    let fixtures = write_fixtures(dir, &corpus, config.seed)?;
    let name = |p: &Path| {
        p.file_name()
            .expect("fixture file")
            .to_string_lossy()
            .into_owned()
    };
    let cfg = serde_json::json!({
        "connectivity_dir": name(&fixtures.connectivity_dir),
        "paths_file": name(&fixtures.paths_file),
        "scores_file": name(&fixtures.scores_file),
        "out_dir": "out",
        "seed": config.seed,
        "x_max": 3,
    });
    write_text(
        &dir.join("config.json"),
        &(serde_json::to_string_pretty(&cfg).expect("config serializes") + "\n"),
    )?;
    info!(
        "wrote {} paths on {} scans to {}",
        corpus.paths.len(),
        corpus.graphs.len(),
        dir.display()
    );
    Ok(())
}

fn curriculum(config: &Config, steps: &[u64], batch: usize) -> Result<()> {
    let schedule = config.curriculum()?;
    let original: Vec<usize> = (0..batch).collect();
    let obstructed = original.clone();
    println!("t,alpha,batch");
    for &t in steps {
        let slots = sample_batch(t, &schedule, batch, &original, &obstructed, config.seed ^ t)?;
        let pattern: String = slots
            .iter()
            .map(|s| {
                if s.setting == Setting::Obstructed {
                    'B'
                } else {
                    'O'
                }
            })
            .collect();
        println!("{t},{:.4},{pattern}", schedule.alpha(t));
    }
    Ok(())
}
