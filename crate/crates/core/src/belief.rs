//! Observer-side belief tracking.
//!
//! The observer knows the initial state and the model, sees only tokens, and
//! keeps the set of states consistent with the tokens seen so far. A belief
//! plan set is the set of full action/state chains that thread a belief
//! sequence while emitting the same tokens.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::observation::{ObservationError, ObservationModel, TokenId};
use crate::strips::{ActionId, GroundedDomain, Plan, State, StripsError};

pub const DEFAULT_BELIEF_LIMIT: usize = 10_000;
pub const DEFAULT_BPS_CAP: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BeliefError {
    #[error("observation `{token}` is inconsistent with the current belief")]
    EmptyBelief { token: String },
    #[error("belief grew to {size} states, above the limit of {limit}")]
    BeliefOverflow { size: usize, limit: usize },
    #[error(transparent)]
    Observation(#[from] ObservationError),
    #[error(transparent)]
    Strips(#[from] StripsError),
}

/// A set of states kept sorted and deduplicated, so equal beliefs hash equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Belief {
    states: Vec<State>,
}

impl Belief {
    pub fn singleton(s: State) -> Self {
        Belief { states: vec![s] }
    }

    pub fn from_states<I: IntoIterator<Item = State>>(states: I) -> Self {
        let mut states: Vec<State> = states.into_iter().collect();
        states.sort_unstable();
        states.dedup();
        Belief { states }
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn iter(&self) -> std::slice::Iter<'_, State> {
        self.states.iter()
    }

    pub fn contains(&self, s: &State) -> bool {
        self.states.binary_search(s).is_ok()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// `b_0 = {s0}`: the observer is assumed to know where the agent starts.
pub fn initial_belief(_model: &ObservationModel, s0: &State) -> Belief {
    Belief::singleton(s0.clone())
}

/// All states reachable in one step from `belief`, grouped by the token the
/// step would emit. Pairs with no matching rule are skipped.
pub fn successors_by_token<C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    belief: &Belief,
) -> BTreeMap<TokenId, Vec<State>> {
    let mut out: BTreeMap<TokenId, Vec<State>> = BTreeMap::new();
    for s in belief.iter() {
        for a in domain.applicable_in(s) {
            let next = domain.action(a).successor(s);
            if let Some(t) = model.try_observe(a, &next) {
                out.entry(t).or_default().push(next);
            }
        }
    }
    out
}

/// `{ ŝ′ | ŝ ∈ b, â applicable in ŝ, ŝ′ = Γ(ŝ, â), O(â, ŝ′) = o }`
pub fn belief_update<C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    belief: &Belief,
    token: TokenId,
    limit: usize,
) -> Result<Belief, BeliefError> {
    let mut next = Vec::new();
    for s in belief.iter() {
        for a in domain.applicable_in(s) {
            let succ = domain.action(a).successor(s);
            if model.try_observe(a, &succ) == Some(token) {
                next.push(succ);
            }
        }
    }
    let next = Belief::from_states(next);
    if next.is_empty() {
        return Err(BeliefError::EmptyBelief { token: model.token_name(token).to_string() });
    }
    if next.len() > limit {
        return Err(BeliefError::BeliefOverflow { size: next.len(), limit });
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefSequence {
    pub beliefs: Vec<Belief>,
    pub tokens: Vec<TokenId>,
}

impl BeliefSequence {
    pub fn last(&self) -> &Belief {
        self.beliefs.last().expect("b_0 is always present")
    }
}

/// Beliefs induced by the trace of `plan`; `beliefs[i]` follows `tokens[..i]`.
pub fn belief_sequence<C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    plan: &Plan,
) -> Result<BeliefSequence, BeliefError> {
    belief_sequence_with_limit(domain, model, s0, plan, DEFAULT_BELIEF_LIMIT)
}

pub fn belief_sequence_with_limit<C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    plan: &Plan,
    limit: usize,
) -> Result<BeliefSequence, BeliefError> {
    let tokens = crate::observation::trace(domain, model, s0, plan)?;
    let mut beliefs = Vec::with_capacity(tokens.len() + 1);
    beliefs.push(initial_belief(model, s0));
    for &t in &tokens {
        let b = belief_update(domain, model, beliefs.last().expect("non-empty"), t, limit)?;
        beliefs.push(b);
    }
    Ok(BeliefSequence { beliefs, tokens })
}

/// One causally consistent chain `⟨ŝ0, â1, ŝ1, …, ŝn⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BeliefChain {
    pub actions: Vec<ActionId>,
    /// `actions.len() + 1` states, starting with `ŝ0`.
    pub states: Vec<State>,
}

impl BeliefChain {
    pub fn root(s0: State) -> Self {
        BeliefChain { actions: Vec::new(), states: vec![s0] }
    }

    pub fn last_state(&self) -> &State {
        self.states.last().expect("chains hold at least one state")
    }

    pub fn plan(&self) -> Plan {
        Plan::new(self.actions.clone())
    }

    fn extended(&self, action: ActionId, next: State) -> Self {
        let mut actions = Vec::with_capacity(self.actions.len() + 1);
        actions.extend_from_slice(&self.actions);
        actions.push(action);
        let mut states = Vec::with_capacity(self.states.len() + 1);
        states.extend_from_slice(&self.states);
        states.push(next);
        BeliefChain { actions, states }
    }
}

/// Chains through a belief sequence. `chains[0]` is always the agent's own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefPlanSet {
    pub chains: Vec<BeliefChain>,
    /// Set when enumeration stopped at the cap, so `chains` is a subset.
    pub truncated: bool,
}

impl BeliefPlanSet {
    pub fn root(s0: State) -> Self {
        BeliefPlanSet { chains: vec![BeliefChain::root(s0)], truncated: false }
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    /// Extend every chain by one step emitting `token`. The own chain is
    /// extended by `own_action` and stays at index 0; chains with no
    /// consistent continuation drop out.
    pub fn extend<C>(
        &self,
        domain: &GroundedDomain<C>,
        model: &ObservationModel,
        own_action: ActionId,
        token: TokenId,
        cap: usize,
    ) -> Result<Self, BeliefError> {
        let own = &self.chains[0];
        let own_next = domain.action(own_action).apply(own.last_state())?;
        let mut chains = vec![own.extended(own_action, own_next)];
        let mut truncated = self.truncated;
        'outer: for (ci, chain) in self.chains.iter().enumerate() {
            let s = chain.last_state();
            for a in domain.applicable_in(s) {
                if ci == 0 && a == own_action {
                    continue;
                }
                let next = domain.action(a).successor(s);
                if model.try_observe(a, &next) != Some(token) {
                    continue;
                }
                if chains.len() >= cap {
                    truncated = true;
                    break 'outer;
                }
                chains.push(chain.extended(a, next));
            }
        }
        Ok(BeliefPlanSet { chains, truncated })
    }
}

/// Depth-first enumeration of the chains threading the belief sequence of
/// `plan`, stopping after `cap` complete chains.
pub fn belief_plan_set<C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    plan: &Plan,
    cap: usize,
) -> Result<BeliefPlanSet, BeliefError> {
    let cap = cap.max(1);
    let tokens = crate::observation::trace(domain, model, s0, plan)?;
    let own_states = crate::strips::state_sequence(domain, s0, plan)?;
    let own = BeliefChain { actions: plan.steps.clone(), states: own_states };
    let mut chains = vec![own];
    let mut truncated = false;
    let mut actions = Vec::with_capacity(tokens.len());
    let mut states = vec![s0.clone()];
    dfs(domain, model, &tokens, &mut actions, &mut states, &mut chains, cap, &mut truncated);
    Ok(BeliefPlanSet { chains, truncated })
}

#[allow(clippy::too_many_arguments)]
fn dfs<C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    tokens: &[TokenId],
    actions: &mut Vec<ActionId>,
    states: &mut Vec<State>,
    out: &mut Vec<BeliefChain>,
    cap: usize,
    truncated: &mut bool,
) {
    if *truncated {
        return;
    }
    let depth = actions.len();
    if depth == tokens.len() {
        if out[0].actions == *actions {
            return;
        }
        if out.len() >= cap {
            *truncated = true;
            return;
        }
        out.push(BeliefChain { actions: actions.clone(), states: states.clone() });
        return;
    }
    let s = states[depth].clone();
    for a in domain.applicable_in(&s) {
        let next = domain.action(a).successor(&s);
        if model.try_observe(a, &next) != Some(tokens[depth]) {
            continue;
        }
        actions.push(a);
        states.push(next);
        dfs(domain, model, tokens, actions, states, out, cap, truncated);
        actions.pop();
        states.pop();
        if *truncated {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observation::parse_rules;
    use crate::strips::DomainBuilder;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn same_token() -> (GroundedDomain<Q>, ObservationModel) {
        let d = DomainBuilder::new()
            .fluents(["p", "q"])
            .action("a1", &[], &["p"], &[])
            .action("a2", &[], &["q"], &[])
            .build()
            .unwrap();
        let m = parse_rules("obs t\nrule t action=*\n", &d).unwrap();
        (d, m)
    }

    fn one_to_one() -> (GroundedDomain<Q>, ObservationModel) {
        let d = DomainBuilder::new()
            .fluents(["p", "q"])
            .action("a1", &[], &["p"], &[])
            .action("a2", &[], &["q"], &[])
            .action("a3", &["p"], &[], &["p"])
            .build()
            .unwrap();
        let m = parse_rules("obs a1\nobs a2\nobs a3\nrule a1 action=a1\nrule a2 action=a2\nrule a3 action=a3\n", &d)
            .unwrap();
        (d, m)
    }

    #[test]
    fn initial_belief_is_the_start_state() {
        let (d, m) = same_token();
        let s0 = d.empty_set();
        let b = initial_belief(&m, &s0);
        assert_eq!(b.len(), 1);
        assert!(b.contains(&s0));
        assert_eq!(b, initial_belief(&m, &s0));
    }

    #[test]
    fn shared_token_splits_belief() {
        // Both actions emit `t` from the empty state: by enumeration the
        // successors are exactly {p} and {q}.
        let (d, m) = same_token();
        let b0 = Belief::singleton(d.empty_set());
        let t = m.token_id("t").unwrap();
        let b1 = belief_update(&d, &m, &b0, t, DEFAULT_BELIEF_LIMIT).unwrap();
        let expected = Belief::from_states([d.fluent_set(["p"]).unwrap(), d.fluent_set(["q"]).unwrap()]);
        assert_eq!(b1, expected);
    }

    #[test]
    fn unexplained_token_empties_belief() {
        let (d, m) = one_to_one();
        let b0 = Belief::singleton(d.empty_set());
        let a3 = m.token_id("a3").unwrap();
        assert!(matches!(belief_update(&d, &m, &b0, a3, 10), Err(BeliefError::EmptyBelief { .. })));
    }

    #[test]
    fn overflow_is_reported() {
        let (d, m) = same_token();
        let b0 = Belief::singleton(d.empty_set());
        let t = m.token_id("t").unwrap();
        assert_eq!(belief_update(&d, &m, &b0, t, 1), Err(BeliefError::BeliefOverflow { size: 2, limit: 1 }));
    }

    #[test]
    fn injective_model_keeps_singletons() {
        let (d, m) = one_to_one();
        let s0 = d.empty_set();
        let plan = d.plan_from_names(["a1", "a2", "a3", "a1"]).unwrap();
        let seq = belief_sequence(&d, &m, &s0, &plan).unwrap();
        assert_eq!(seq.beliefs.len(), 5);
        assert!(seq.beliefs.iter().all(|b| b.len() == 1));
        let states = crate::strips::state_sequence(&d, &s0, &plan).unwrap();
        for (b, s) in seq.beliefs.iter().zip(&states) {
            assert!(b.contains(s));
        }
        let bps = belief_plan_set(&d, &m, &s0, &plan, DEFAULT_BPS_CAP).unwrap();
        assert_eq!(bps.len(), 1);
        assert!(!bps.truncated);
    }

    #[test]
    fn empty_plan_sequence() {
        let (d, m) = same_token();
        let seq = belief_sequence(&d, &m, &d.empty_set(), &Plan::default()).unwrap();
        assert_eq!(seq.beliefs.len(), 1);
        assert!(seq.tokens.is_empty());
    }

    #[test]
    fn bps_of_shared_token_toy() {
        let (d, m) = same_token();
        let s0 = d.empty_set();
        let plan = d.plan_from_names(["a1"]).unwrap();
        let bps = belief_plan_set(&d, &m, &s0, &plan, DEFAULT_BPS_CAP).unwrap();
        assert_eq!(bps.len(), 2);
        assert_eq!(bps.chains[0].actions, plan.steps);
        assert!(!bps.truncated);

        let capped = belief_plan_set(&d, &m, &s0, &plan, 1).unwrap();
        assert_eq!(capped.len(), 1);
        assert!(capped.truncated);
        assert_eq!(capped.chains[0].actions, plan.steps);
    }

    #[test]
    fn incremental_extension_matches_enumeration() {
        let (d, m) = same_token();
        let s0 = d.empty_set();
        let plan = d.plan_from_names(["a2", "a1"]).unwrap();
        let t = m.token_id("t").unwrap();
        let mut bps = BeliefPlanSet::root(s0.clone());
        for &a in &plan.steps {
            bps = bps.extend(&d, &m, a, t, DEFAULT_BPS_CAP).unwrap();
        }
        let full = belief_plan_set(&d, &m, &s0, &plan, DEFAULT_BPS_CAP).unwrap();
        let as_set = |b: &BeliefPlanSet| {
            let mut v: Vec<_> = b.chains.iter().map(|c| c.actions.clone()).collect();
            v.sort();
            v
        };
        assert_eq!(as_set(&bps), as_set(&full));
        assert_eq!(bps.chains[0].actions, plan.steps);
        assert_eq!(bps.len(), 4);
    }
}
