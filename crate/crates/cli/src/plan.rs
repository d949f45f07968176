use std::process::ExitCode;

use anyhow::{Context, Result};
use covert_core::io::{emit_plan_record, PlanRecord};
use covert_core::scalar::Scalar;
use covert_core::search::{plan, SearchError, SearchResult, VariantConfig};
use covert_core::Rational;

use crate::args::PlanArgs;
use crate::load::{apply_search, config, load_model, pick_variant, Loaded, NOOPS_METRIC};
use crate::{EXIT_NO_PLAN, EXIT_OK};

pub fn record(config: &VariantConfig<Rational>, r: &SearchResult<Rational>) -> PlanRecord {
    let mut metrics = std::collections::BTreeMap::new();
    metrics.insert("search_time_s".to_string(), r.stats.elapsed.as_secs_f64());
    metrics.insert("expansions".to_string(), r.stats.expansions as f64);
    metrics.insert("generated".to_string(), r.stats.generated as f64);
    metrics.insert("plan_length".to_string(), r.plan.len() as f64);
    metrics.insert("cost".to_string(), r.cost.to_f64());
    metrics.insert("delta".to_string(), r.stats.delta as f64);
    metrics.insert("restarts".to_string(), r.stats.restarts as f64);
    if let Some(d) = &r.achieved_distance {
        metrics.insert("achieved_distance".to_string(), d.to_f64());
    }
    if config.noops {
        metrics.insert(NOOPS_METRIC.to_string(), 1.0);
    }
    if let Some(n) = r.goal_reaching_chains {
        metrics.insert("goal_reaching_chains".to_string(), n as f64);
    }
    PlanRecord {
        steps: r.steps.clone(),
        trace: r.trace_names.clone(),
        variant: config.variant.name().to_string(),
        achieved_goal_indices: r.satisfied_goals.clone(),
        metrics,
    }
}

pub fn solve(loaded: &Loaded, config: &VariantConfig<Rational>) -> Result<SearchResult<Rational>, SearchError> {
    plan(&loaded.domain, &loaded.model, &loaded.spec.initial, &loaded.spec.goals, config)
}

/// One-line JSON describing a failed search, for the error stream.
pub fn no_plan_reason(e: &SearchError) -> String {
    serde_json::json!({ "kind": e.kind(), "message": e.to_string() }).to_string()
}

pub fn run(args: PlanArgs) -> Result<ExitCode> {
    let loaded = load_model(&args.model)?;
    let variant = pick_variant(args.params.variant, &loaded.spec, None)?;
    let mut config = config(variant, &args.params, &loaded.spec);
    apply_search(&mut config, &args.search)?;
    config.noops = args.model.noops;
    match solve(&loaded, &config) {
        Ok(r) => {
            let text = emit_plan_record(&record(&config, &r));
            match &args.out {
                Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::from(EXIT_OK))
        }
        Err(e) if e.is_no_plan() => {
            eprintln!("{}", no_plan_reason(&e));
            Ok(ExitCode::from(EXIT_NO_PLAN))
        }
        Err(e) => Err(e.into()),
    }
}
