//! Keyword/value problem files.
//!
//! ```text
//! domain: blocksworld.pddl
//! observations: o1.obs
//! init: on-B-C on-C-A on-A-D ontable-D clear-B handempty
//! true-goal: on-A-B
//! goal: on-B-C
//! goal: on-D-C
//! variant: kamb
//! k: 3
//! ```
//!
//! Literal lists are separated by whitespace or commas. `#` starts a comment.

use num_rational::Ratio;
use num_traits::{One, Zero};

use super::ModelIoError;
use crate::distances::DistanceMeasure;
use crate::scalar::parse_decimal;
use crate::search::Variant;
use crate::strips::{CandidateGoalSet, FluentSet, GoalCondition, GroundedDomain, State, StripsError};

/// Variant parameters as written in a problem file. Unset values fall back
/// to the CLI defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariantParams {
    pub variant: Option<Variant>,
    pub k: Option<usize>,
    pub j: Option<usize>,
    pub l: Option<usize>,
    pub m: Option<usize>,
    pub d: Option<Ratio<i64>>,
    pub distance: Option<DistanceMeasure>,
    pub cost_bound: Option<Ratio<i64>>,
}

impl VariantParams {
    /// Check the bounds against a problem with `n` candidate goals.
    pub fn validate(&self, n: usize) -> Result<(), ModelIoError> {
        let bad = |name: &str, message: String| Err(ModelIoError::BadParameter { name: name.into(), message });
        for (name, v) in [("k", self.k), ("j", self.j)] {
            if let Some(v) = v {
                if v < 1 || v > n {
                    return bad(name, format!("{v} is outside 1..={n}"));
                }
            }
        }
        for (name, v) in [("l", self.l), ("m", self.m)] {
            if let Some(v) = v {
                if v < 2 {
                    return bad(name, format!("{v} is below 2"));
                }
            }
        }
        if let Some(d) = &self.d {
            if *d < Ratio::zero() || *d > Ratio::one() {
                return bad("d", format!("{d} is outside [0, 1]"));
            }
        }
        if let Some(c) = &self.cost_bound {
            if *c <= Ratio::zero() {
                return bad("cost-bound", format!("{c} is not positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    /// Paths as written, relative to the problem file.
    pub domain_path: Option<String>,
    pub observations_path: Option<String>,
    pub initial: State,
    pub goals: CandidateGoalSet,
    pub params: VariantParams,
}

impl ProblemSpec {
    /// `n`
    pub fn num_goals(&self) -> usize {
        self.goals.len()
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> ModelIoError {
    ModelIoError::Parse { line, column: 1, message: message.into() }
}

fn literals<C>(domain: &GroundedDomain<C>, value: &str, line: usize) -> Result<FluentSet, ModelIoError> {
    let mut set = domain.empty_set();
    for name in value.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
        let name = name.trim_start_matches('(').trim_end_matches(')');
        let id = domain.fluent_id(name).ok_or_else(|| ModelIoError::UnknownFluent { line, name: name.to_string() })?;
        set.insert(id);
    }
    Ok(set)
}

fn goal<C>(domain: &GroundedDomain<C>, value: &str, line: usize) -> Result<GoalCondition, ModelIoError> {
    GoalCondition::new(literals(domain, value, line)?).map_err(|_| parse_err(line, "empty goal"))
}

fn number<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, ModelIoError> {
    value.parse().map_err(|_| parse_err(line, format!("`{key}` expects an integer, got `{value}`")))
}

fn decimal(key: &str, value: &str, line: usize) -> Result<Ratio<i64>, ModelIoError> {
    parse_decimal(value).ok_or_else(|| parse_err(line, format!("`{key}` expects a decimal, got `{value}`")))
}

pub fn parse_problem<C>(text: &str, domain: &GroundedDomain<C>) -> Result<ProblemSpec, ModelIoError> {
    let mut domain_path = None;
    let mut observations_path = None;
    let mut initial: Option<State> = None;
    let mut true_goal: Option<GoalCondition> = None;
    let mut others = Vec::new();
    let mut params = VariantParams::default();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once(':')
            .ok_or_else(|| parse_err(line, format!("expected `key: value`, got `{content}`")))?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        let once = |slot: bool| if slot { Err(parse_err(line, format!("`{key}` given twice"))) } else { Ok(()) };
        match key.as_str() {
            "domain" => {
                once(domain_path.is_some())?;
                domain_path = Some(value.to_string());
            }
            "observations" => {
                once(observations_path.is_some())?;
                observations_path = Some(value.to_string());
            }
            "init" => {
                once(initial.is_some())?;
                initial = Some(literals(domain, value, line)?);
            }
            "true-goal" => {
                once(true_goal.is_some())?;
                true_goal = Some(goal(domain, value, line)?);
            }
            "goal" => others.push(goal(domain, value, line)?),
            "variant" => {
                once(params.variant.is_some())?;
                params.variant =
                    Some(value.parse().map_err(|_| parse_err(line, format!("unknown variant `{value}`")))?);
            }
            "k" => params.k = Some(number(&key, value, line)?),
            "j" => params.j = Some(number(&key, value, line)?),
            "l" => params.l = Some(number(&key, value, line)?),
            "m" => params.m = Some(number(&key, value, line)?),
            "d" => params.d = Some(decimal(&key, value, line)?),
            "cost-bound" => params.cost_bound = Some(decimal(&key, value, line)?),
            "distance" => {
                params.distance =
                    Some(value.parse().map_err(|_| parse_err(line, format!("unknown distance `{value}`")))?);
            }
            other => return Err(parse_err(line, format!("unknown key `{other}`"))),
        }
    }

    let true_goal = true_goal.ok_or_else(|| parse_err(text.lines().count().max(1), "missing `true-goal:`"))?;
    let goals = CandidateGoalSet::new(true_goal, others).map_err(|e| match e {
        StripsError::DuplicateGoal(a, b) => parse_err(1, format!("candidate goals {a} and {b} are identical")),
        other => ModelIoError::Strips(other),
    })?;
    params.validate(goals.len())?;
    Ok(ProblemSpec {
        domain_path,
        observations_path,
        initial: initial.unwrap_or_else(|| domain.initial().clone()),
        goals,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strips::DomainBuilder;

    fn toy() -> GroundedDomain<Ratio<i64>> {
        DomainBuilder::new()
            .fluents(["on-A-B", "on-B-C", "on-D-C", "clear-A"])
            .action("a", &[], &["on-A-B"], &[])
            .build()
            .unwrap()
    }

    const TEXT: &str = "# blocks\ninit: clear-A\ntrue-goal: on-A-B\ngoal: on-B-C\ngoal: on-D-C\nvariant: kamb\nk: 3\n";

    #[test]
    fn three_goals() {
        let d = toy();
        let p = parse_problem(TEXT, &d).unwrap();
        assert_eq!(p.num_goals(), 3);
        assert_eq!(p.params.k, Some(3));
        assert_eq!(p.params.variant, Some(Variant::KAmbiguous));
        assert_eq!(d.state_names(&p.initial), vec!["clear-A"]);
        assert_eq!(d.state_names(&p.goals.get(2).literals), vec!["on-D-C"]);
    }

    #[test]
    fn k_above_n_is_rejected() {
        let err = parse_problem(&TEXT.replace("k: 3", "k: 4"), &toy()).unwrap_err();
        assert!(matches!(err, ModelIoError::BadParameter { ref name, .. } if name == "k"));
    }

    #[test]
    fn missing_true_goal() {
        assert!(matches!(parse_problem("init: clear-A\n", &toy()), Err(ModelIoError::Parse { .. })));
    }

    #[test]
    fn other_rejections() {
        let d = toy();
        assert!(matches!(parse_problem("true-goal: on-X-Y\n", &d), Err(ModelIoError::UnknownFluent { line: 1, .. })));
        assert!(matches!(parse_problem("true-goal: on-A-B\nl: 1\n", &d), Err(ModelIoError::BadParameter { .. })));
        assert!(matches!(parse_problem("true-goal: on-A-B\nd: 1.5\n", &d), Err(ModelIoError::BadParameter { .. })));
        assert!(matches!(
            parse_problem("true-goal: on-A-B\ncost-bound: 0\n", &d),
            Err(ModelIoError::BadParameter { .. })
        ));
        assert!(matches!(parse_problem("true-goal: on-A-B\ngoal: on-A-B\n", &d), Err(ModelIoError::Parse { .. })));
        assert!(matches!(parse_problem("true-goal: on-A-B\nfoo: 1\n", &d), Err(ModelIoError::Parse { line: 2, .. })));
        assert!(matches!(parse_problem("true-goal:\n", &d), Err(ModelIoError::Parse { .. })));
    }

    #[test]
    fn distance_and_decimals() {
        let p =
            parse_problem("true-goal: on-A-B, clear-A\ndistance: causal\nd: 0.25\ncost-bound: 12\n", &toy()).unwrap();
        assert_eq!(p.params.distance, Some(DistanceMeasure::CausalLink));
        assert_eq!(p.params.d, Some(Ratio::new(1, 4)));
        assert_eq!(p.goals.true_goal.literals.len(), 2);
    }
}
