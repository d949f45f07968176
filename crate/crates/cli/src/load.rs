use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use covert_core::io::{parse_domain, parse_plan_record, parse_problem, PlanRecord, ProblemSpec};
use covert_core::observation::{compile_noops, parse_rules, ObservationModel, PRETEND_PREFIX};
use covert_core::search::{Variant, VariantConfig};
use covert_core::strips::{GroundedDomain, Plan};
use covert_core::Rational;

use crate::args::{ModelArgs, ParamArgs, SearchArgs};

pub struct Loaded {
    pub domain: GroundedDomain<Rational>,
    pub model: ObservationModel,
    pub spec: ProblemSpec,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// `flag`, else `entry` relative to the problem file, else `fallback` next to it.
fn resolve(flag: Option<&Path>, entry: Option<&str>, problem: &Path, fallback: &str) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    let dir = problem.parent().unwrap_or(Path::new("."));
    dir.join(entry.unwrap_or(fallback))
}

/// Load domain, observation model and problem. The problem's `domain:` line
/// is read before the problem itself is parsed against the domain.
pub fn load(problem: &Path, domain: Option<&Path>, obs: Option<&Path>) -> Result<Loaded> {
    let problem_text = read(problem)?;
    let header = |key: &str| -> Option<String> {
        problem_text.lines().find_map(|l| {
            let l = l.split('#').next()?.trim();
            let (k, v) = l.split_once(':')?;
            (k.trim() == key).then(|| v.trim().to_string())
        })
    };
    let domain_path = resolve(domain, header("domain").as_deref(), problem, "domain.pddl");
    let domain_text = read(&domain_path)?;
    let domain: GroundedDomain<Rational> =
        parse_domain(&domain_text).with_context(|| format!("in {}", domain_path.display()))?;
    let spec = parse_problem(&problem_text, &domain).with_context(|| format!("in {}", problem.display()))?;
    spec.params.validate(spec.num_goals()).with_context(|| format!("in {}", problem.display()))?;
    let obs_path = resolve(obs, spec.observations_path.as_deref(), problem, "observations.obs");
    let model = parse_rules(&read(&obs_path)?, &domain).with_context(|| format!("in {}", obs_path.display()))?;
    Ok(Loaded { domain, model, spec })
}

pub fn load_model(args: &ModelArgs) -> Result<Loaded> {
    load(&args.problem, args.domain.as_deref(), args.obs.as_deref())
}

impl Loaded {
    /// The same problem with one `pretend-<token>` action per token added.
    pub fn with_noops(self) -> Result<Loaded> {
        let (domain, model) = compile_noops(&self.domain, &self.model)?;
        Ok(Loaded { domain, model, spec: self.spec })
    }

    pub fn resolve_plan(&self, steps: &[String]) -> Result<Plan> {
        Ok(self.domain.plan_from_names(steps.iter().map(String::as_str))?)
    }
}

/// Record metric set when the plan was searched with noop actions.
pub const NOOPS_METRIC: &str = "noops";

/// The record was planned with noops or mentions a `pretend-` action.
pub fn needs_noops(record: &PlanRecord) -> bool {
    record.metrics.get(NOOPS_METRIC).is_some_and(|v| *v != 0.0)
        || record.steps.iter().any(|s| s.starts_with(PRETEND_PREFIX))
}

/// A plan record, or plain text with one action name per line.
pub fn read_plan(path: &Path) -> Result<PlanRecord> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        return parse_plan_record(&text).with_context(|| format!("in {}", path.display()));
    }
    let steps: Vec<String> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    Ok(PlanRecord { trace: Vec::new(), steps, ..PlanRecord::default() })
}

pub fn pick_variant(flag: Option<Variant>, spec: &ProblemSpec, record: Option<&str>) -> Result<Variant> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(name) = record.filter(|s| !s.is_empty()) {
        return name.parse().map_err(|e: String| anyhow!(e));
    }
    spec.params.variant.ok_or_else(|| anyhow!("no variant given: pass --variant or set `variant:` in the problem"))
}

/// Variant configuration from flags, problem file and defaults, in that order.
pub fn config(variant: Variant, params: &ParamArgs, spec: &ProblemSpec) -> VariantConfig<Rational> {
    let p = &spec.params;
    let mut c = VariantConfig::new(variant);
    c.k = params.k.or(p.k).unwrap_or(c.k);
    c.j = params.j.or(p.j).unwrap_or(c.j);
    c.l = params.l.or(p.l).unwrap_or(c.l);
    c.m = params.m.or(p.m).unwrap_or(c.m);
    c.d = params.d.or(p.d).unwrap_or(c.d);
    c.distance = params.distance.or(p.distance).unwrap_or(c.distance);
    c.cost_bound = params.cost_bound.or(p.cost_bound);
    c
}

pub fn apply_search(c: &mut VariantConfig<Rational>, s: &SearchArgs) -> Result<()> {
    if s.delta_max < 1 {
        bail!("--delta-max must be at least 1");
    }
    c.delta_max = s.delta_max;
    c.heuristic_noise = s.heuristic_noise;
    c.subset_strategy = s.subset_strategy;
    c.timeout = Some(s.timeout);
    Ok(())
}

/// k, j, ℓ or m, whichever `variant` uses.
pub fn parameter(c: &VariantConfig<Rational>) -> usize {
    match c.variant {
        Variant::KAmbiguous => c.k,
        Variant::JLegible => c.j,
        Variant::LDiverse => c.l,
        Variant::MSimilar => c.m,
    }
}
