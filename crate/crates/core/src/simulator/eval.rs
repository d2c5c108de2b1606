use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::agents::AgentKind;
use super::env::{Env, EpisodeResult, SimEpisode, StepOutcome};
use crate::error::{Error, Result};
use crate::navgraph::{path_id_key, NavGraph};

/// Run one episode to completion.
pub fn run_episode(
    graph: &NavGraph,
    episode: &SimEpisode,
    agent: AgentKind,
) -> Result<EpisodeResult> {
    let (mut env, mut obs) = Env::reset(graph, episode)?;
    let mut policy = agent.build(episode);
    loop {
        let action = policy.act(&obs)?;
        match env.step(&action)? {
            StepOutcome::Continue(next) => obs = next,
            StepOutcome::Finished(result) => return Ok(result),
        }
    }
}

/// Result of one episode with enough context to identify it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRecord {
    pub path_id: String,
    pub scan: String,
    pub set: String,
    pub agent: String,
    pub blocked: Vec<[String; 2]>,
    #[serde(flatten)]
    pub result: EpisodeResult,
}

pub fn set_name(x: usize) -> String {
    if x == 0 {
        "original".to_string()
    } else {
        format!("block_{x}")
    }
}

/// Run `agent` on every episode, in parallel. Records come back sorted by
/// set, then path id; episodes sharing both keep their input order.
pub fn evaluate(
    graphs: &BTreeMap<String, NavGraph>,
    episodes: &[SimEpisode],
    agent: AgentKind,
) -> Result<Vec<EvalRecord>> {
    if episodes.is_empty() {
        return Err(Error::EmptyInput("no episodes to evaluate".into()));
    }
    let mut records = episodes
        .par_iter()
        .map(|ep| {
            let graph = graphs
                .get(&ep.scan_id)
                .ok_or_else(|| Error::NotFound(format!("scan {}", ep.scan_id)))?;
            let result = run_episode(graph, ep, agent)?;
            Ok((
                ep.x,
                EvalRecord {
                    path_id: ep.path_id.clone(),
                    scan: ep.scan_id.clone(),
                    set: set_name(ep.x),
                    agent: agent.name().to_string(),
                    blocked: ep
                        .blocked
                        .iter()
                        .map(|(a, b)| [a.clone(), b.clone()])
                        .collect(),
                    result,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| path_id_key(&a.1.path_id).cmp(&path_id_key(&b.1.path_id)))
    });
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

/// Mean metrics over one set; `sr` and `spl` are fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct SetSummary {
    pub set: String,
    pub agent: String,
    pub count: usize,
    pub tl: f64,
    pub ne: f64,
    pub sr: f64,
    pub spl: f64,
}

/// Aggregate sorted records into one row per set, in order of appearance.
pub fn summarize(records: &[EvalRecord]) -> Vec<SetSummary> {
    let mut out: Vec<SetSummary> = Vec::new();
    for r in records {
        if out
            .last()
            .is_none_or(|s| s.set != r.set || s.agent != r.agent)
        {
            out.push(SetSummary {
                set: r.set.clone(),
                agent: r.agent.clone(),
                count: 0,
                tl: 0.0,
                ne: 0.0,
                sr: 0.0,
                spl: 0.0,
            });
        }
        let s = out.last_mut().expect("pushed");
        s.count += 1;
        s.tl += r.result.tl;
        s.ne += r.result.ne;
        s.sr += f64::from(u8::from(r.result.success));
        s.spl += r.result.spl;
    }
    for s in &mut out {
        let n = s.count as f64;
        s.tl /= n;
        s.ne /= n;
        s.sr /= n;
        s.spl /= n;
    }
    out
}

/// `set,agent,count,TL,NE,SR,SPL` with SR and SPL in percent.
pub fn results_csv(rows: &[SetSummary]) -> String {
    let mut out = String::from("set,agent,count,TL,NE,SR,SPL\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.2},{:.2},{:.2},{:.2}",
            r.set,
            r.agent,
            r.count,
            r.tl,
            r.ne,
            100.0 * r.sr,
            100.0 * r.spl
        );
    }
    out
}

pub fn trajectories_jsonl(records: &[EvalRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}
