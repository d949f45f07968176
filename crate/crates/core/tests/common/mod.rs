#![allow(dead_code)]

use std::path::PathBuf;

use covert_core::io::{parse_domain, parse_problem, ProblemSpec};
use covert_core::observation::{parse_rules, ObservationModel};
use covert_core::strips::GroundedDomain;
use covert_core::Rational;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub struct Loaded {
    pub domain: GroundedDomain<Rational>,
    pub model: ObservationModel,
    pub spec: ProblemSpec,
}

/// Load `dir/problem` with its domain and the given observation file.
pub fn load(dir: &str, problem: &str, obs: &str) -> Loaded {
    let domain = parse_domain(&read(&format!("{dir}/domain.pddl"))).expect("domain parses");
    let model = parse_rules(&read(&format!("{dir}/{obs}")), &domain).expect("rules parse");
    let spec = parse_problem(&read(&format!("{dir}/{problem}")), &domain).expect("problem parses");
    Loaded { domain, model, spec }
}

/// A plan file: one action name per line.
pub fn plan_file(domain: &GroundedDomain<Rational>, rel: &str) -> covert_core::strips::Plan {
    let text = read(rel);
    domain.plan_from_names(text.lines().map(str::trim).filter(|l| !l.is_empty())).expect("plan names resolve")
}
