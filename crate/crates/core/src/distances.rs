//! Plan distance measures (action, causal link, state sequence) and their
//! min/max aggregation over a belief plan set.
//!
//! All measures are Jaccard-style and lie in `[0, 1]`. They are generic over
//! the [`Scalar`] they are evaluated in; with exact rationals the results
//! carry no rounding.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::belief::{BeliefChain, BeliefPlanSet};
use crate::scalar::Scalar;
use crate::strips::{state_sequence, ActionId, FluentId, GroundedDomain, Plan, State, StripsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistanceError {
    #[error("distance is undefined between two plans with no {0}")]
    UndefinedDistance(&'static str),
    #[error("need at least two plans, got {0}")]
    SingletonSet(usize),
    #[error("unknown distance measure `{0}`")]
    UnknownMeasure(String),
    #[error(transparent)]
    Strips(#[from] StripsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceMeasure {
    Action,
    CausalLink,
    StateSequence,
}

impl DistanceMeasure {
    pub fn name(self) -> &'static str {
        match self {
            DistanceMeasure::Action => "action",
            DistanceMeasure::CausalLink => "causal",
            DistanceMeasure::StateSequence => "state",
        }
    }
}

impl fmt::Display for DistanceMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceMeasure {
    type Err = DistanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "action" => Ok(DistanceMeasure::Action),
            "causal" | "causal-link" => Ok(DistanceMeasure::CausalLink),
            "state" | "state-sequence" => Ok(DistanceMeasure::StateSequence),
            other => Err(DistanceError::UnknownMeasure(other.to_string())),
        }
    }
}

/// `producer` is `None` for the virtual INIT action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CausalLink {
    pub producer: Option<ActionId>,
    pub fluent: FluentId,
    pub consumer: ActionId,
}

/// Causal links of a linear plan. Each precondition is supported by the
/// latest earlier step that added it, or by INIT.
pub fn causal_links<C>(domain: &GroundedDomain<C>, s0: &State, plan: &Plan) -> Result<Vec<CausalLink>, StripsError> {
    // Validates executability.
    state_sequence(domain, s0, plan)?;
    let mut producer: Vec<Option<ActionId>> = vec![None; domain.num_fluents()];
    let mut links = Vec::new();
    for &a in &plan.steps {
        let act = domain.action(a);
        for f in act.pre.iter() {
            links.push(CausalLink { producer: producer[f.index()], fluent: f, consumer: a });
        }
        for f in act.add.iter() {
            producer[f.index()] = Some(a);
        }
        for f in act.del.iter() {
            producer[f.index()] = None;
        }
    }
    links.sort_unstable();
    links.dedup();
    Ok(links)
}

/// Everything the three measures need from one plan, computed once.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlanProfile {
    /// Unique actions, sorted.
    pub actions: Vec<ActionId>,
    /// Unique links, sorted.
    pub links: Vec<CausalLink>,
    /// `s_1 … s_n`; `s_0` is shared by construction and left out.
    pub states: Vec<State>,
}

impl PlanProfile {
    pub fn new<C>(domain: &GroundedDomain<C>, s0: &State, plan: &Plan) -> Result<Self, StripsError> {
        let states = state_sequence(domain, s0, plan)?;
        let links = causal_links(domain, s0, plan)?;
        Ok(Self::assemble(plan.steps.clone(), links, states))
    }

    pub fn from_chain<C>(domain: &GroundedDomain<C>, chain: &BeliefChain) -> Self {
        let plan = chain.plan();
        let links = causal_links(domain, &chain.states[0], &plan).expect("chains are executable by construction");
        Self::assemble(chain.actions.clone(), links, chain.states.clone())
    }

    fn assemble(mut actions: Vec<ActionId>, links: Vec<CausalLink>, mut states: Vec<State>) -> Self {
        actions.sort_unstable();
        actions.dedup();
        states.remove(0);
        PlanProfile { actions, links, states }
    }

    pub fn distance<S: Scalar>(&self, other: &PlanProfile, measure: DistanceMeasure) -> Result<S, DistanceError> {
        match measure {
            DistanceMeasure::Action => jaccard_distance(&self.actions, &other.actions, "actions"),
            DistanceMeasure::CausalLink => jaccard_distance(&self.links, &other.links, "causal links"),
            DistanceMeasure::StateSequence => Ok(state_distance(&self.states, &other.states)),
        }
    }
}

fn sorted_intersection_len<T: Ord>(a: &[T], b: &[T]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// `1 − |a ∩ b| / |a ∪ b|` over sorted unique slices.
fn jaccard_distance<S: Scalar, T: Ord>(a: &[T], b: &[T], what: &'static str) -> Result<S, DistanceError> {
    let inter = sorted_intersection_len(a, b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return Err(DistanceError::UndefinedDistance(what));
    }
    Ok(S::fraction(union - inter, union))
}

fn state_jaccard<S: Scalar>(a: &State, b: &State) -> S {
    let union = a.union_len(b);
    if union == 0 {
        return S::zero();
    }
    S::fraction(union - a.intersection_len(b), union)
}

/// `(1/n) [Σ_{k=1..n′} d(s_k, s′_k) + n − n′]` with `n ≥ n′`.
fn state_distance<S: Scalar>(a: &[State], b: &[State]) -> S {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let n = long.len();
    if n == 0 {
        return S::zero();
    }
    let shared: S = long.iter().zip(short).map(|(x, y)| state_jaccard::<S>(x, y)).sum();
    (shared + S::from_usize(n - short.len())) / S::from_usize(n)
}

pub fn action_distance<S: Scalar>(p1: &Plan, p2: &Plan) -> Result<S, DistanceError> {
    let mut a: Vec<ActionId> = p1.steps.clone();
    let mut b: Vec<ActionId> = p2.steps.clone();
    a.sort_unstable();
    a.dedup();
    b.sort_unstable();
    b.dedup();
    jaccard_distance(&a, &b, "actions")
}

pub fn causal_link_distance<S: Scalar, C>(
    domain: &GroundedDomain<C>,
    s0: &State,
    p1: &Plan,
    p2: &Plan,
) -> Result<S, DistanceError> {
    let a = causal_links(domain, s0, p1)?;
    let b = causal_links(domain, s0, p2)?;
    jaccard_distance(&a, &b, "causal links")
}

pub fn state_sequence_distance<S: Scalar, C>(
    domain: &GroundedDomain<C>,
    s0: &State,
    p1: &Plan,
    p2: &Plan,
) -> Result<S, DistanceError> {
    let a = state_sequence(domain, s0, p1)?;
    let b = state_sequence(domain, s0, p2)?;
    Ok(state_distance(&a[1..], &b[1..]))
}

pub fn distance<S: Scalar, C>(
    measure: DistanceMeasure,
    domain: &GroundedDomain<C>,
    s0: &State,
    p1: &Plan,
    p2: &Plan,
) -> Result<S, DistanceError> {
    match measure {
        DistanceMeasure::Action => action_distance(p1, p2),
        DistanceMeasure::CausalLink => causal_link_distance(domain, s0, p1, p2),
        DistanceMeasure::StateSequence => state_sequence_distance(domain, s0, p1, p2),
    }
}

/// Minimum and maximum of `measure` over all unordered pairs.
///
/// Equal profiles are compared once; a repeated profile contributes its
/// distance to itself.
pub fn pairwise_extremes<S: Scalar>(
    profiles: &[PlanProfile],
    measure: DistanceMeasure,
) -> Result<(S, S), DistanceError> {
    if profiles.len() < 2 {
        return Err(DistanceError::SingletonSet(profiles.len()));
    }
    let mut counts: BTreeMap<&PlanProfile, usize> = BTreeMap::new();
    for p in profiles {
        *counts.entry(p).or_default() += 1;
    }
    let unique: Vec<(&PlanProfile, usize)> = counts.into_iter().collect();
    let mut lo: Option<S> = None;
    let mut hi: Option<S> = None;
    let mut note = |d: S| {
        if lo.as_ref().is_none_or(|l| d < *l) {
            lo = Some(d.clone());
        }
        if hi.as_ref().is_none_or(|h| d > *h) {
            hi = Some(d);
        }
    };
    for (i, &(p, n)) in unique.iter().enumerate() {
        if n > 1 {
            note(p.distance(p, measure)?);
        }
        for &(q, _) in &unique[i + 1..] {
            note(p.distance(q, measure)?);
        }
    }
    Ok((lo.expect("at least one pair"), hi.expect("at least one pair")))
}

fn profiles<C>(domain: &GroundedDomain<C>, bps: &BeliefPlanSet) -> Vec<PlanProfile> {
    bps.chains.iter().map(|c| PlanProfile::from_chain(domain, c)).collect()
}

/// `min_{p1 ≠ p2 ∈ BPS} δ(p1, p2)`
pub fn d_min<S: Scalar, C>(
    domain: &GroundedDomain<C>,
    bps: &BeliefPlanSet,
    measure: DistanceMeasure,
) -> Result<S, DistanceError> {
    pairwise_extremes(&profiles(domain, bps), measure).map(|(lo, _)| lo)
}

/// `max_{p1 ≠ p2 ∈ BPS} δ(p1, p2)`
pub fn d_max<S: Scalar, C>(
    domain: &GroundedDomain<C>,
    bps: &BeliefPlanSet,
    measure: DistanceMeasure,
) -> Result<S, DistanceError> {
    pairwise_extremes(&profiles(domain, bps), measure).map(|(_, hi)| hi)
}
