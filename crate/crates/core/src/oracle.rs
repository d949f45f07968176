//! Observer-side verification by brute force.
//!
//! The oracle replays a plan's trace without any search code: beliefs are
//! rebuilt layer by layer straight from `apply` and `observe`, and belief
//! plan sets are enumerated exhaustively (up to an explicit work budget)
//! instead of being capped.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distances::{pairwise_extremes, DistanceError, DistanceMeasure, PlanProfile};
use crate::observation::{ObservationError, ObservationModel, TokenId};
use crate::scalar::Scalar;
use crate::strips::{
    satisfies, state_sequence, ActionId, CandidateGoalSet, GoalCondition, GroundedDomain, Plan, State, StripsError,
};

pub const DEFAULT_BUDGET: usize = 5_000_000;

/// Actions of one chain and the states they pass through, `s_0` first.
pub type Chain = (Vec<ActionId>, Vec<State>);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("enumeration needed more than {budget} steps")]
    EnumerationBudgetExceeded { budget: usize },
    #[error("no state is consistent with token {step} of the trace")]
    EmptyBelief { step: usize },
    #[error(transparent)]
    Strips(#[from] StripsError),
    #[error(transparent)]
    Observation(#[from] ObservationError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Property {
    #[serde(rename = "k-ambiguous")]
    KAmbiguous,
    #[serde(rename = "j-legible")]
    JLegible,
    #[serde(rename = "l-diverse")]
    LDiverse,
    #[serde(rename = "m-similar")]
    MSimilar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub property: Property,
    pub verdict: Verdict,
    /// k, j, ℓ or m.
    pub parameter: usize,
    pub true_goal_achieved: bool,
    pub satisfied_goal_indices: Vec<usize>,
    pub absent_goal_indices: Vec<usize>,
    pub final_belief_size: usize,
    pub total_chains: Option<usize>,
    pub goal_reaching_chains: Option<usize>,
    /// `d_min` or `d_max` of the goal-reaching chains, as written by the scalar type.
    pub achieved_distance: Option<String>,
    pub threshold: Option<String>,
    pub reason: Option<String>,
}

impl Report {
    fn new(property: Property, parameter: usize) -> Self {
        Report {
            property,
            verdict: Verdict::Fail,
            parameter,
            true_goal_achieved: false,
            satisfied_goal_indices: Vec::new(),
            absent_goal_indices: Vec::new(),
            final_belief_size: 0,
            total_chains: None,
            goal_reaching_chains: None,
            achieved_distance: None,
            threshold: None,
            reason: None,
        }
    }

    /// Report for a check the oracle could not finish.
    pub fn inconclusive(property: Property, parameter: usize, reason: impl Into<String>) -> Self {
        Report { verdict: Verdict::Inconclusive, reason: Some(reason.into()), ..Report::new(property, parameter) }
    }

    /// Report for a plan rejected before any property could be checked.
    pub fn failed(property: Property, parameter: usize, reason: impl Into<String>) -> Self {
        Report { reason: Some(reason.into()), ..Report::new(property, parameter) }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// The observer's view of one executed plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    /// `s_0 … s_n` of the agent.
    pub states: Vec<State>,
    pub tokens: Vec<TokenId>,
    /// `beliefs[i]`: every state some action sequence emitting
    /// `tokens[..i]` can reach from `s_0`, sorted.
    pub beliefs: Vec<Vec<State>>,
}

impl Replay {
    pub fn final_belief(&self) -> &[State] {
        self.beliefs.last().expect("b_0 is always present")
    }
}

/// Rebuild the belief after every token of `plan`'s trace.
pub fn replay<C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    plan: &Plan,
    budget: usize,
) -> Result<Replay, OracleError> {
    let states = state_sequence(domain, s0, plan)?;
    let mut tokens = Vec::with_capacity(plan.len());
    for (i, &a) in plan.steps.iter().enumerate() {
        tokens.push(model.observe(domain, a, &states[i + 1])?);
    }
    let mut work = 0usize;
    let mut layer: BTreeSet<State> = BTreeSet::from([s0.clone()]);
    let mut beliefs = vec![layer.iter().cloned().collect::<Vec<_>>()];
    for (step, &token) in tokens.iter().enumerate() {
        let mut next = BTreeSet::new();
        for s in &layer {
            for (i, action) in domain.actions().iter().enumerate() {
                work += 1;
                if work > budget {
                    return Err(OracleError::EnumerationBudgetExceeded { budget });
                }
                if !action.pre.is_subset(s) {
                    continue;
                }
                let succ = action.successor(s);
                if model.try_observe(ActionId(i as u32), &succ) == Some(token) {
                    next.insert(succ);
                }
            }
        }
        if next.is_empty() {
            return Err(OracleError::EmptyBelief { step });
        }
        beliefs.push(next.iter().cloned().collect());
        layer = next;
    }
    Ok(Replay { states, tokens, beliefs })
}

/// Every action sequence from `s0` emitting exactly `tokens`, with its states.
pub fn enumerate_chains<C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    tokens: &[TokenId],
    budget: usize,
) -> Result<Vec<Chain>, OracleError> {
    let mut out: Vec<Chain> = Vec::new();
    let mut actions = Vec::with_capacity(tokens.len());
    let mut states = vec![s0.clone()];
    let mut work = 0usize;
    walk(domain, model, tokens, &mut actions, &mut states, &mut out, &mut work, budget)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn walk<C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    tokens: &[TokenId],
    actions: &mut Vec<ActionId>,
    states: &mut Vec<State>,
    out: &mut Vec<Chain>,
    work: &mut usize,
    budget: usize,
) -> Result<(), OracleError> {
    let depth = actions.len();
    if depth == tokens.len() {
        out.push((actions.clone(), states.clone()));
        return Ok(());
    }
    let s = states[depth].clone();
    for (i, action) in domain.actions().iter().enumerate() {
        *work += 1;
        if *work > budget {
            return Err(OracleError::EnumerationBudgetExceeded { budget });
        }
        if !action.pre.is_subset(&s) {
            continue;
        }
        let id = ActionId(i as u32);
        let succ = action.successor(&s);
        if model.try_observe(id, &succ) != Some(tokens[depth]) {
            continue;
        }
        actions.push(id);
        states.push(succ);
        walk(domain, model, tokens, actions, states, out, work, budget)?;
        actions.pop();
        states.pop();
    }
    Ok(())
}

/// Fewest actions from `s0` to a state satisfying `goal`, by breadth-first
/// search; `None` if no reachable state does.
pub fn shortest_plan_length<C>(
    domain: &GroundedDomain<C>,
    s0: &State,
    goal: &GoalCondition,
    budget: usize,
) -> Result<Option<usize>, OracleError> {
    let mut seen: HashSet<State> = HashSet::from([s0.clone()]);
    let mut queue = VecDeque::from([(s0.clone(), 0usize)]);
    let mut work = 0usize;
    while let Some((s, depth)) = queue.pop_front() {
        if satisfies(&s, goal) {
            return Ok(Some(depth));
        }
        for action in domain.actions() {
            work += 1;
            if work > budget {
                return Err(OracleError::EnumerationBudgetExceeded { budget });
            }
            if action.pre.is_subset(&s) {
                let succ = action.successor(&s);
                if seen.insert(succ.clone()) {
                    queue.push_back((succ, depth + 1));
                }
            }
        }
    }
    Ok(None)
}

fn goal_presence(goals: &CandidateGoalSet, belief: &[State]) -> (Vec<usize>, Vec<usize>) {
    (0..goals.len()).partition(|&i| belief.iter().any(|s| satisfies(s, goals.get(i))))
}

#[allow(clippy::too_many_arguments)]
fn goal_report<C>(
    property: Property,
    parameter: usize,
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goals: &CandidateGoalSet,
    plan: &Plan,
    budget: usize,
) -> Result<Report, OracleError> {
    let r = replay(domain, model, s0, plan, budget)?;
    let (present, absent) = goal_presence(goals, r.final_belief());
    let mut report = Report::new(property, parameter);
    report.true_goal_achieved = satisfies(r.states.last().expect("s_0 present"), &goals.true_goal);
    report.final_belief_size = r.final_belief().len();
    report.satisfied_goal_indices = present;
    report.absent_goal_indices = absent;
    Ok(report)
}

/// The plan achieves `G_A` and its final belief is consistent with at
/// least `k` candidate goals (each goal counted if some belief state
/// satisfies it).
pub fn verify_k_ambiguous<C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goals: &CandidateGoalSet,
    plan: &Plan,
    k: usize,
    budget: usize,
) -> Result<Report, OracleError> {
    let mut r = goal_report(Property::KAmbiguous, k, domain, model, s0, goals, plan, budget)?;
    let count = r.satisfied_goal_indices.len();
    r.verdict = if !r.true_goal_achieved {
        r.reason = Some("true goal not achieved".into());
        Verdict::Fail
    } else if count < k {
        r.reason = Some(format!("final belief is consistent with {count} goals"));
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    Ok(r)
}

/// The plan achieves `G_A` and at least `n − j` candidate goals hold in no
/// state of the final belief.
pub fn verify_j_legible<C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goals: &CandidateGoalSet,
    plan: &Plan,
    j: usize,
    budget: usize,
) -> Result<Report, OracleError> {
    let mut r = goal_report(Property::JLegible, j, domain, model, s0, goals, plan, budget)?;
    let needed = goals.len().saturating_sub(j);
    let absent = r.absent_goal_indices.len();
    r.verdict = if !r.true_goal_achieved {
        r.reason = Some("true goal not achieved".into());
        Verdict::Fail
    } else if absent < needed {
        r.reason = Some(format!("{absent} goals absent from the final belief, {needed} required"));
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn chain_report<S: Scalar, C>(
    property: Property,
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goal: &GoalCondition,
    plan: &Plan,
    count: usize,
    measure: DistanceMeasure,
    threshold: &S,
    budget: usize,
) -> Result<Report, OracleError> {
    let r = replay(domain, model, s0, plan, budget)?;
    let chains = enumerate_chains(domain, model, s0, &r.tokens, budget)?;
    let reaching: Vec<PlanProfile> = chains
        .iter()
        .filter(|(_, states)| satisfies(states.last().expect("chains hold s_0"), goal))
        .map(|(actions, _)| PlanProfile::new(domain, s0, &Plan::new(actions.clone())))
        .collect::<Result<_, _>>()?;

    let mut report = Report::new(property, count);
    report.true_goal_achieved = satisfies(r.states.last().expect("s_0 present"), goal);
    report.final_belief_size = r.final_belief().len();
    if r.final_belief().iter().any(|s| satisfies(s, goal)) {
        report.satisfied_goal_indices = vec![0];
    } else {
        report.absent_goal_indices = vec![0];
    }
    report.total_chains = Some(chains.len());
    report.goal_reaching_chains = Some(reaching.len());
    report.threshold = Some(threshold.to_string());

    let achieved: Option<S> = if reaching.len() >= 2 {
        let (lo, hi) = pairwise_extremes::<S>(&reaching, measure)?;
        Some(if property == Property::LDiverse { lo } else { hi })
    } else {
        None
    };
    report.achieved_distance = achieved.as_ref().map(ToString::to_string);
    report.verdict = if !report.true_goal_achieved {
        report.reason = Some("goal not achieved".into());
        Verdict::Fail
    } else if reaching.len() < count {
        report.reason = Some(format!("{} goal-reaching chains, {count} required", reaching.len()));
        Verdict::Fail
    } else {
        let ok = match (&achieved, property) {
            (Some(d), Property::LDiverse) => d >= threshold,
            (Some(d), _) => d <= threshold,
            (None, _) => false,
        };
        if ok {
            Verdict::Pass
        } else {
            report.reason = Some(format!(
                "{} = {} against threshold {threshold}",
                if property == Property::LDiverse { "d_min" } else { "d_max" },
                report.achieved_distance.as_deref().unwrap_or("undefined"),
            ));
            Verdict::Fail
        }
    };
    Ok(report)
}

/// At least ℓ chains of the exact belief plan set reach `goal`, pairwise at
/// least `d_min` apart under `measure`.
#[allow(clippy::too_many_arguments)]
pub fn verify_l_diverse<S: Scalar, C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goal: &GoalCondition,
    plan: &Plan,
    l: usize,
    measure: DistanceMeasure,
    d_min: &S,
    budget: usize,
) -> Result<Report, OracleError> {
    chain_report(Property::LDiverse, domain, model, s0, goal, plan, l, measure, d_min, budget)
}

/// At least m chains of the exact belief plan set reach `goal`, pairwise at
/// most `d_max` apart under `measure`.
#[allow(clippy::too_many_arguments)]
pub fn verify_m_similar<S: Scalar, C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goal: &GoalCondition,
    plan: &Plan,
    m: usize,
    measure: DistanceMeasure,
    d_max: &S,
    budget: usize,
) -> Result<Report, OracleError> {
    chain_report(Property::MSimilar, domain, model, s0, goal, plan, m, measure, d_max, budget)
}

/// Turn a budget overrun into an inconclusive report; other errors pass through.
pub fn settle(
    property: Property,
    parameter: usize,
    result: Result<Report, OracleError>,
) -> Result<Report, OracleError> {
    match result {
        Err(e @ OracleError::EnumerationBudgetExceeded { .. }) => {
            Ok(Report::inconclusive(property, parameter, e.to_string()))
        }
        other => other,
    }
}
