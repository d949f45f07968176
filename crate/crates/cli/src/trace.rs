use std::process::ExitCode;

use anyhow::Result;
use covert_core::belief::belief_sequence;
use covert_core::io::emit_canonical;
use covert_core::strips::{satisfies, state_sequence};
use serde::Serialize;

use crate::args::TraceArgs;
use crate::load::{load_model, needs_noops, read_plan};
use crate::EXIT_OK;

#[derive(Serialize)]
struct TraceReport {
    steps: Vec<String>,
    trace: Vec<String>,
    belief_sizes: Vec<usize>,
    /// Candidate goals satisfied by some final belief state.
    final_goal_indices: Vec<usize>,
    true_goal_achieved: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    beliefs: Option<Vec<Vec<Vec<String>>>>,
}

pub fn run(args: TraceArgs) -> Result<ExitCode> {
    let record = read_plan(&args.plan)?;
    let mut loaded = load_model(&args.model)?;
    if args.model.noops || needs_noops(&record) {
        loaded = loaded.with_noops()?;
    }
    let plan = loaded.resolve_plan(&record.steps)?;
    let (d, s0, goals) = (&loaded.domain, &loaded.spec.initial, &loaded.spec.goals);
    let states = state_sequence(d, s0, &plan)?;
    let seq = belief_sequence(d, &loaded.model, s0, &plan)?;
    let last = seq.last();
    let names = |s: &covert_core::strips::State| d.state_names(s).into_iter().map(String::from).collect::<Vec<_>>();
    let report = TraceReport {
        steps: record.steps.clone(),
        trace: loaded.model.token_names(&seq.tokens),
        belief_sizes: seq.beliefs.iter().map(|b| b.len()).collect(),
        final_goal_indices: (0..goals.len()).filter(|&i| last.iter().any(|s| satisfies(s, goals.get(i)))).collect(),
        true_goal_achieved: satisfies(states.last().expect("s_0 present"), &goals.true_goal),
        beliefs: args.beliefs.then(|| seq.beliefs.iter().map(|b| b.iter().map(names).collect()).collect()),
    };
    print!("{}", emit_canonical(&report));
    Ok(ExitCode::from(EXIT_OK))
}
