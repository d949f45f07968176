use std::time::Instant;

use itertools::Itertools;

use super::engine::{gbfs, NodeView, Objective, Priority};
use super::{SearchError, SearchResult, SearchStats, SubsetStrategy, Variant, VariantConfig};
use crate::belief::{belief_plan_set, Belief, BeliefChain, BeliefPlanSet};
use crate::distances::{causal_links, pairwise_extremes, DistanceMeasure, PlanProfile};
use crate::observation::{compile_noops, ObservationModel};
use crate::plangraph::{Level, SetLevelCache};
use crate::scalar::Scalar;
use crate::strips::{satisfies, CandidateGoalSet, GoalCondition, GroundedDomain, State};

/// Stand-in for an infinite set-level when a heuristic must subtract it.
fn clamp_bound<C>(domain: &GroundedDomain<C>) -> u32 {
    2 * (domain.num_fluents() as u32 + 1)
}

fn level_value<C: Scalar>(l: Level, clamp: u32) -> C {
    C::from_usize(l.or_clamp(clamp) as usize)
}

/// Indices of candidate goals satisfied by some state of `belief`.
pub(crate) fn satisfied_in(goals: &CandidateGoalSet, belief: &Belief) -> Vec<usize> {
    (0..goals.len()).filter(|&i| belief.iter().any(|s| satisfies(s, goals.get(i)))).collect()
}

/// Plain goal reachability: `h = set-level(G)` on the true state.
pub struct ClassicalObjective<'a, C> {
    pub domain: &'a GroundedDomain<C>,
    pub cache: &'a SetLevelCache,
    pub goal: &'a GoalCondition,
}

impl<C: Scalar> Objective<C> for ClassicalObjective<'_, C> {
    fn heuristic(&self, node: &NodeView<'_, C>) -> Result<Option<Priority<C>>, SearchError> {
        Ok(self
            .cache
            .level(self.domain, node.state, self.goal)
            .finite()
            .map(|l| Priority::scalar(C::from_usize(l as usize))))
    }

    fn is_goal(&self, node: &NodeView<'_, C>) -> Result<bool, SearchError> {
        Ok(satisfies(node.state, self.goal))
    }
}

/// k-ambiguous and j-legible objectives over a fixed goal subset.
///
/// `chosen` are the goals the observer should (k) or may (j) find
/// plausible; for j-legibility `remaining` must be absent from the final
/// belief.
pub struct GoalObjective<'a, C> {
    pub domain: &'a GroundedDomain<C>,
    pub cache: &'a SetLevelCache,
    pub goals: &'a CandidateGoalSet,
    pub variant: Variant,
    pub chosen: Vec<usize>,
    pub remaining: Vec<usize>,
    pub clamp: u32,
}

impl<'a, C: Scalar> GoalObjective<'a, C> {
    pub fn new(
        domain: &'a GroundedDomain<C>,
        cache: &'a SetLevelCache,
        goals: &'a CandidateGoalSet,
        variant: Variant,
        chosen: Vec<usize>,
    ) -> Self {
        let remaining = (1..goals.len()).filter(|i| !chosen.contains(i)).collect();
        GoalObjective { domain, cache, goals, variant, chosen, remaining, clamp: clamp_bound(domain) }
    }

    fn belief_level(&self, belief: &Belief, i: usize) -> Level {
        self.cache.level_from_belief(self.domain, belief, self.goals.get(i))
    }
}

impl<C: Scalar> Objective<C> for GoalObjective<'_, C> {
    fn heuristic(&self, node: &NodeView<'_, C>) -> Result<Option<Priority<C>>, SearchError> {
        let Some(own) = self.cache.level(self.domain, node.state, &self.goals.true_goal).finite() else {
            return Ok(None);
        };
        let mut h = C::from_usize(own as usize);
        let mut worst: Option<Level> = None;
        for &i in &self.chosen {
            let l = self.belief_level(node.belief, i);
            if self.variant == Variant::KAmbiguous && !l.is_finite() {
                return Ok(None);
            }
            worst = worst.max(Some(l));
        }
        if let Some(w) = worst {
            h = h + level_value::<C>(w, self.clamp);
        }
        if self.variant == Variant::JLegible {
            let nearest = self.remaining.iter().map(|&i| self.belief_level(node.belief, i)).min();
            if let Some(n) = nearest {
                h = h - level_value::<C>(n, self.clamp);
            }
        }
        Ok(Some(Priority::scalar(h)))
    }

    fn is_goal(&self, node: &NodeView<'_, C>) -> Result<bool, SearchError> {
        if !satisfies(node.state, &self.goals.true_goal) {
            return Ok(false);
        }
        let present = |i: usize| node.belief.iter().any(|s| satisfies(s, self.goals.get(i)));
        Ok(match self.variant {
            Variant::KAmbiguous => self.chosen.iter().all(|&i| present(i)),
            _ => self.remaining.iter().all(|&i| !present(i)),
        })
    }
}

/// ℓ-diverse and m-similar objectives over belief plan sets.
pub struct ChainObjective<'a, C> {
    pub domain: &'a GroundedDomain<C>,
    pub model: &'a ObservationModel,
    pub s0: &'a State,
    pub cache: &'a SetLevelCache,
    pub goal: &'a GoalCondition,
    pub variant: Variant,
    /// ℓ or m.
    pub count: usize,
    pub measure: DistanceMeasure,
    pub d: C,
    pub exact_chain_limit: usize,
}

/// The part of a chain's profile `measure` looks at.
pub(crate) fn chain_profile<C>(
    domain: &GroundedDomain<C>,
    chain: &BeliefChain,
    measure: DistanceMeasure,
) -> PlanProfile {
    match measure {
        DistanceMeasure::Action => {
            let actions = chain.actions.iter().copied().sorted_unstable().dedup().collect();
            PlanProfile { actions, links: Vec::new(), states: Vec::new() }
        }
        DistanceMeasure::CausalLink => {
            let links = causal_links(domain, &chain.states[0], &chain.plan()).expect("chains are executable");
            PlanProfile { actions: Vec::new(), links, states: Vec::new() }
        }
        DistanceMeasure::StateSequence => {
            PlanProfile { actions: Vec::new(), links: Vec::new(), states: chain.states[1..].to_vec() }
        }
    }
}

/// Chain count and distance extremes of the goal-reaching part of a plan set.
pub(crate) struct ChainSummary<C> {
    pub reaching: usize,
    pub extremes: Option<(C, C)>,
}

impl<'a, C: Scalar> ChainObjective<'a, C> {
    fn extremes<'b>(
        &self,
        chains: impl Iterator<Item = &'b BeliefChain>,
    ) -> Result<(usize, Option<(C, C)>), SearchError> {
        let profiles: Vec<PlanProfile> = chains.map(|c| chain_profile(self.domain, c, self.measure)).collect();
        if profiles.len() < 2 {
            return Ok((profiles.len(), None));
        }
        Ok((profiles.len(), Some(pairwise_extremes(&profiles, self.measure)?)))
    }

    pub(crate) fn summarize(&self, bps: &BeliefPlanSet) -> Result<ChainSummary<C>, SearchError> {
        let (reaching, extremes) = self.extremes(bps.chains.iter().filter(|c| satisfies(c.last_state(), self.goal)))?;
        Ok(ChainSummary { reaching, extremes })
    }

    fn accepts(&self, s: &ChainSummary<C>) -> bool {
        if s.reaching < self.count {
            return false;
        }
        match (&s.extremes, self.variant) {
            (Some((lo, _)), Variant::LDiverse) => *lo >= self.d,
            (Some((_, hi)), _) => *hi <= self.d,
            (None, _) => false,
        }
    }

    /// The plan set to judge a finished plan by: `bps` itself, or an exact
    /// re-enumeration when `bps` was capped.
    pub(crate) fn exact(&self, bps: &BeliefPlanSet) -> Result<Option<BeliefPlanSet>, SearchError> {
        if !bps.truncated {
            return Ok(Some(bps.clone()));
        }
        let plan = bps.chains[0].plan();
        let full = belief_plan_set(self.domain, self.model, self.s0, &plan, self.exact_chain_limit)?;
        Ok((!full.truncated).then_some(full))
    }
}

impl<C: Scalar> Objective<C> for ChainObjective<'_, C> {
    fn uses_bps(&self) -> bool {
        true
    }

    fn heuristic(&self, node: &NodeView<'_, C>) -> Result<Option<Priority<C>>, SearchError> {
        let own = self.cache.level(self.domain, node.state, self.goal);
        let Some(own_level) = own.finite() else {
            return Ok(None);
        };
        let bps = node.bps.expect("chain objectives run with plan sets");
        let (counted, extremes) = self
            .extremes(bps.chains.iter().filter(|c| self.cache.level(self.domain, c.last_state(), self.goal) == own))?;
        let spread = match (self.variant, extremes) {
            (Variant::LDiverse, Some((lo, _))) => C::zero() - lo,
            (Variant::LDiverse, None) => C::zero(),
            (_, Some((_, hi))) => hi,
            (_, None) => C::one(),
        };
        Ok(Some(Priority(vec![spread, C::zero() - C::from_usize(counted), C::from_usize(own_level as usize)])))
    }

    fn is_goal(&self, node: &NodeView<'_, C>) -> Result<bool, SearchError> {
        if !satisfies(node.state, self.goal) {
            return Ok(false);
        }
        let bps = node.bps.expect("chain objectives run with plan sets");
        if !bps.truncated {
            return Ok(self.accepts(&self.summarize(bps)?));
        }
        match self.exact(bps)? {
            Some(full) => Ok(self.accepts(&self.summarize(&full)?)),
            None => Ok(false),
        }
    }
}

/// A plan reaching `goal` with no observer constraint, by set-level GBFS.
pub fn plan_classical<C: Scalar>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goal: &GoalCondition,
    config: &VariantConfig<C>,
) -> Result<SearchResult<C>, SearchError> {
    let start = Instant::now();
    let cache = SetLevelCache::new();
    let objective = ClassicalObjective { domain, cache: &cache, goal };
    let mut r = gbfs(domain, model, s0, &objective, config, 1, config.deadline(start))?;
    r.satisfied_goals = if r.final_belief.iter().any(|s| satisfies(s, goal)) { vec![0] } else { Vec::new() };
    Ok(r)
}

fn retryable(e: &SearchError) -> bool {
    matches!(
        e,
        SearchError::Exhausted { .. } | SearchError::CostBoundExceeded { .. } | SearchError::ExpansionLimit { .. }
    )
}

/// Run [`gbfs`] for Δ = 1, 2, … up to `config.delta_max`, returning the first
/// success. Failed rounds add their statistics to `total`.
pub fn delta_loop<C: Scalar>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    objective: &dyn Objective<C>,
    config: &VariantConfig<C>,
    deadline: Option<Instant>,
    total: &mut SearchStats,
) -> Result<SearchResult<C>, SearchError> {
    let mut last = SearchError::Exhausted { expansions: 0 };
    for delta in 1..=config.delta_max.max(1) {
        match gbfs(domain, model, s0, objective, config, delta, deadline) {
            Ok(r) => return Ok(r),
            Err(e) if retryable(&e) => last = e,
            Err(e) => return Err(e),
        }
        total.delta = delta;
    }
    Err(last)
}

fn goal_subsets<C: Scalar>(
    domain: &GroundedDomain<C>,
    cache: &SetLevelCache,
    s0: &State,
    goals: &CandidateGoalSet,
    size: usize,
    variant: Variant,
    config: &VariantConfig<C>,
) -> Vec<Vec<usize>> {
    if let Some(fixed) = &config.chosen_goals {
        return vec![fixed.clone()];
    }
    let mut subsets: Vec<Vec<usize>> = (1..goals.len()).combinations(size).collect();
    if config.subset_strategy == SubsetStrategy::FarthestFirst {
        let clamp = clamp_bound(domain);
        let far = |i: usize| cache.level(domain, s0, goals.get(i)).or_clamp(clamp) as usize;
        let spread = |subset: &Vec<usize>| -> usize {
            match variant {
                Variant::KAmbiguous => subset.iter().map(|&i| far(i)).sum(),
                _ => (1..goals.len()).filter(|i| !subset.contains(i)).map(far).sum(),
            }
        };
        subsets.sort_by_key(|s| std::cmp::Reverse(spread(s)));
    }
    subsets
}

fn restart_loop<C: Scalar>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goals: &CandidateGoalSet,
    config: &VariantConfig<C>,
    variant: Variant,
    size: usize,
) -> Result<SearchResult<C>, SearchError> {
    let start = Instant::now();
    let deadline = config.deadline(start);
    let cache = SetLevelCache::new();
    let subsets = goal_subsets(domain, &cache, s0, goals, size, variant, config);
    let mut total = SearchStats::default();
    for (tried, chosen) in subsets.iter().enumerate() {
        let objective = GoalObjective::new(domain, &cache, goals, variant, chosen.clone());
        match delta_loop(domain, model, s0, &objective, config, deadline, &mut total) {
            Ok(mut r) => {
                r.stats.absorb(&total);
                r.stats.restarts = tried;
                r.stats.elapsed = start.elapsed();
                r.satisfied_goals = satisfied_in(goals, &r.final_belief);
                r.chosen_goals = chosen.clone();
                return Ok(r);
            }
            Err(e) if retryable(&e) => {}
            Err(e) => return Err(e),
        }
    }
    Err(match variant {
        Variant::KAmbiguous => SearchError::NoKAmbiguousPlan { k: config.k, subsets: subsets.len() },
        _ => SearchError::NoJLegiblePlan { j: config.j, subsets: subsets.len() },
    })
}

/// A plan achieving `G_A` whose final belief is consistent with at least
/// `k` candidate goals.
pub fn plan_k_ambiguous<C: Scalar>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goals: &CandidateGoalSet,
    config: &VariantConfig<C>,
) -> Result<SearchResult<C>, SearchError> {
    let config = VariantConfig { variant: Variant::KAmbiguous, ..config.clone() };
    config.validate(goals.len())?;
    restart_loop(domain, model, s0, goals, &config, Variant::KAmbiguous, config.k - 1)
}

/// A plan achieving `G_A` whose final belief rules out at least `n − j`
/// candidate goals.
pub fn plan_j_legible<C: Scalar>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goals: &CandidateGoalSet,
    config: &VariantConfig<C>,
) -> Result<SearchResult<C>, SearchError> {
    let config = VariantConfig { variant: Variant::JLegible, ..config.clone() };
    config.validate(goals.len())?;
    restart_loop(domain, model, s0, goals, &config, Variant::JLegible, config.j - 1)
}

fn chain_search<C: Scalar>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goal: &GoalCondition,
    config: &VariantConfig<C>,
) -> Result<SearchResult<C>, SearchError> {
    let start = Instant::now();
    let variant = config.variant;
    let count = if variant == Variant::LDiverse { config.l } else { config.m };
    let no_plan = || match variant {
        Variant::LDiverse => SearchError::NoLDiversePlan { l: count, d: config.d.to_string() },
        _ => SearchError::NoMSimilarPlan { m: count, d: config.d.to_string() },
    };
    let cache = SetLevelCache::new();
    let mut config = config.clone();
    if config.cost_bound.is_none() {
        let Some(l0) = cache.level(domain, s0, goal).finite() else {
            return Err(no_plan());
        };
        config.cost_bound = Some(C::from_usize(4 * (l0.max(1) as usize)));
    }
    let objective = ChainObjective {
        domain,
        model,
        s0,
        cache: &cache,
        goal,
        variant,
        count,
        measure: config.distance,
        d: config.d.clone(),
        exact_chain_limit: config.exact_chain_limit,
    };
    let mut total = SearchStats::default();
    let mut r = match delta_loop(domain, model, s0, &objective, &config, config.deadline(start), &mut total) {
        Ok(r) => r,
        Err(SearchError::Exhausted { .. }) => return Err(no_plan()),
        Err(e) => return Err(e),
    };
    r.stats.absorb(&total);
    r.stats.elapsed = start.elapsed();
    let bps = r.final_bps.take().expect("chain searches keep plan sets");
    let full = objective.exact(&bps)?.expect("accepted plans have exact plan sets");
    let summary = objective.summarize(&full)?;
    r.goal_reaching_chains = Some(summary.reaching);
    r.achieved_distance = summary.extremes.map(|(lo, hi)| if variant == Variant::LDiverse { lo } else { hi });
    r.final_bps = Some(full);
    r.satisfied_goals = if r.final_belief.iter().any(|s| satisfies(s, goal)) { vec![0] } else { Vec::new() };
    Ok(r)
}

/// A plan whose trace is consistent with at least ℓ goal-reaching chains,
/// pairwise at least `config.d` apart.
pub fn plan_l_diverse<C: Scalar>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goal: &GoalCondition,
    config: &VariantConfig<C>,
) -> Result<SearchResult<C>, SearchError> {
    let config = VariantConfig { variant: Variant::LDiverse, ..config.clone() };
    config.validate(1)?;
    chain_search(domain, model, s0, goal, &config)
}

/// A plan whose trace is consistent with at least m goal-reaching chains,
/// pairwise at most `config.d` apart.
pub fn plan_m_similar<C: Scalar>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goal: &GoalCondition,
    config: &VariantConfig<C>,
) -> Result<SearchResult<C>, SearchError> {
    let config = VariantConfig { variant: Variant::MSimilar, ..config.clone() };
    config.validate(1)?;
    chain_search(domain, model, s0, goal, &config)
}

/// Dispatch on `config.variant`, compiling noop actions first when
/// `config.noops` is set. Plan action ids then refer to the compiled domain;
/// `steps` carries the names.
pub fn plan<C: Scalar>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    goals: &CandidateGoalSet,
    config: &VariantConfig<C>,
) -> Result<SearchResult<C>, SearchError> {
    if config.noops {
        let (domain, model) = compile_noops(domain, model)?;
        let config = VariantConfig { noops: false, ..config.clone() };
        return plan(&domain, &model, s0, goals, &config);
    }
    match config.variant {
        Variant::KAmbiguous => plan_k_ambiguous(domain, model, s0, goals, config),
        Variant::JLegible => plan_j_legible(domain, model, s0, goals, config),
        Variant::LDiverse => plan_l_diverse(domain, model, s0, &goals.true_goal, config),
        Variant::MSimilar => plan_m_similar(domain, model, s0, &goals.true_goal, config),
    }
}
