use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SearchError, SearchResult, SearchStats, VariantConfig};
use crate::belief::{belief_update, initial_belief, Belief, BeliefPlanSet};
use crate::observation::{ObservationError, ObservationModel, TokenId};
use crate::scalar::Scalar;
use crate::strips::{ActionId, GroundedDomain, Plan, State};

/// Lexicographic heuristic key; smaller is better.
#[derive(Debug, Clone, PartialEq)]
pub struct Priority<C>(pub Vec<C>);

impl<C: PartialOrd> Priority<C> {
    pub fn scalar(h: C) -> Self {
        Priority(vec![h])
    }

    /// Total order; incomparable components count as equal.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.partial_cmp(b) {
                Some(Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

/// What an objective gets to see of a search node.
pub struct NodeView<'a, C> {
    pub state: &'a State,
    pub belief: &'a Belief,
    /// Belief states tracked alongside the true state when Δ > 1.
    pub extras: &'a [State],
    pub bps: Option<&'a BeliefPlanSet>,
    pub g: &'a C,
    pub depth: usize,
}

/// A goal test plus heuristic over belief-space nodes.
pub trait Objective<C: Scalar> {
    /// Whether nodes must carry a belief plan set.
    fn uses_bps(&self) -> bool {
        false
    }

    /// `None` marks a dead end.
    fn heuristic(&self, node: &NodeView<'_, C>) -> Result<Option<Priority<C>>, SearchError>;

    fn is_goal(&self, node: &NodeView<'_, C>) -> Result<bool, SearchError>;
}

struct Node<C> {
    state: State,
    extras: Vec<State>,
    belief: Arc<Belief>,
    bps: Option<Arc<BeliefPlanSet>>,
    parent: Option<usize>,
    step: Option<(ActionId, TokenId)>,
    g: C,
    depth: usize,
}

impl<C> Node<C> {
    fn view(&self) -> NodeView<'_, C> {
        NodeView {
            state: &self.state,
            belief: &self.belief,
            extras: &self.extras,
            bps: self.bps.as_deref(),
            g: &self.g,
            depth: self.depth,
        }
    }
}

struct Entry<C> {
    priority: Priority<C>,
    seq: u64,
    node: usize,
}

impl<C: PartialOrd> PartialEq for Entry<C> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<C: PartialOrd> Eq for Entry<C> {}

impl<C: PartialOrd> PartialOrd for Entry<C> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<C: PartialOrd> Ord for Entry<C> {
    // Reversed so the max-heap pops the smallest key, oldest first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.priority.total_cmp(&self.priority).then_with(|| other.seq.cmp(&self.seq))
    }
}

type ClosedKey = (State, Arc<Belief>, Vec<State>);

/// Pick the belief states tracked next to `primary` after one step.
///
/// Descendants of the previous extras come first, in their order; free slots
/// are filled with the remaining belief states in canonical order.
fn absorb<C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    previous: &[State],
    token: TokenId,
    belief: &Belief,
    primary: &State,
    slots: usize,
) -> Vec<State> {
    let mut out: Vec<State> = Vec::with_capacity(slots);
    for e in previous {
        if out.len() >= slots {
            break;
        }
        let mut best: Option<State> = None;
        for a in domain.applicable_in(e) {
            let next = domain.action(a).successor(e);
            if &next == primary || out.contains(&next) || model.try_observe(a, &next) != Some(token) {
                continue;
            }
            if best.as_ref().is_none_or(|b| next < *b) {
                best = Some(next);
            }
        }
        if let Some(b) = best {
            out.push(b);
        }
    }
    for s in belief.iter() {
        if out.len() >= slots {
            break;
        }
        if s != primary && !out.contains(s) {
            out.push(s.clone());
        }
    }
    out
}

fn jitter<C: Scalar>(rng: &mut Option<ChaCha8Rng>) -> Option<C> {
    // Uniform over [0, 0.5) in steps of 2^-16, exact in every scalar type.
    rng.as_mut().map(|r| C::from_ratio(r.gen_range(0..1i64 << 15), 1 << 16))
}

/// Greedy best-first search over (true state, belief) nodes.
///
/// Nodes are expanded in ascending heuristic order with FIFO tie-breaking.
/// A node is re-queued only when it improves on the best key recorded for
/// its closed-list key. With `delta > 1` the key also carries up to
/// `delta − 1` belief states tracked next to the true state.
pub fn gbfs<C: Scalar>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    objective: &dyn Objective<C>,
    config: &VariantConfig<C>,
    delta: usize,
    deadline: Option<Instant>,
) -> Result<SearchResult<C>, SearchError> {
    let start = Instant::now();
    let mut stats = SearchStats { delta, ..SearchStats::default() };
    let mut rng = config.heuristic_noise.map(ChaCha8Rng::seed_from_u64);
    let slots = delta.saturating_sub(1);
    let with_bps = objective.uses_bps();

    let root = Node {
        state: s0.clone(),
        extras: Vec::new(),
        belief: Arc::new(initial_belief(model, s0)),
        bps: with_bps.then(|| Arc::new(BeliefPlanSet::root(s0.clone()))),
        parent: None,
        step: None,
        g: C::zero(),
        depth: 0,
    };
    let mut nodes = vec![root];
    let mut open = BinaryHeap::new();
    let mut best: HashMap<ClosedKey, Priority<C>> = HashMap::new();
    let mut seq = 0u64;

    let Some(mut h0) = objective.heuristic(&nodes[0].view())? else {
        return Err(SearchError::Exhausted { expansions: 0 });
    };
    if let (Some(j), Some(last)) = (jitter::<C>(&mut rng), h0.0.last_mut()) {
        *last = last.clone() + j;
    }
    best.insert((s0.clone(), nodes[0].belief.clone(), Vec::new()), h0.clone());
    open.push(Entry { priority: h0, seq, node: 0 });

    while let Some(Entry { priority, node: idx, .. }) = open.pop() {
        if let Some(d) = deadline {
            if Instant::now() >= d {
                return Err(SearchError::Timeout { seconds: start.elapsed().as_secs_f64() });
            }
        }
        {
            let n = &nodes[idx];
            let key = (n.state.clone(), n.belief.clone(), n.extras.clone());
            if best.get(&key).is_some_and(|b| b.total_cmp(&priority) == Ordering::Less) {
                // Superseded by a reopened copy.
                continue;
            }
        }
        if objective.is_goal(&nodes[idx].view())? {
            stats.elapsed = start.elapsed();
            return Ok(finish(domain, model, &nodes, idx, stats));
        }
        if config.max_expansions.is_some_and(|m| stats.expansions >= m) {
            return Err(SearchError::ExpansionLimit { limit: stats.expansions });
        }
        stats.expansions += 1;

        let parent_state = nodes[idx].state.clone();
        let parent_belief = nodes[idx].belief.clone();
        let parent_extras = nodes[idx].extras.clone();
        let parent_bps = if with_bps { nodes[idx].bps.take() } else { None };
        let parent_g = nodes[idx].g.clone();
        let depth = nodes[idx].depth + 1;
        let mut by_token: HashMap<TokenId, Arc<Belief>> = HashMap::new();

        for a in domain.applicable_in(&parent_state) {
            let action = domain.action(a);
            let state = action.successor(&parent_state);
            let token = model.try_observe(a, &state).ok_or_else(|| ObservationError::NoMatchingRule {
                action: action.name.clone(),
                state: domain.state_names(&state).into_iter().map(String::from).collect(),
            })?;
            let g = parent_g.clone() + action.cost.clone();
            if config.cost_bound.as_ref().is_some_and(|b| g > *b) {
                stats.bound_pruned += 1;
                continue;
            }
            let belief = match by_token.get(&token) {
                Some(b) => b.clone(),
                None => {
                    let b = Arc::new(belief_update(domain, model, &parent_belief, token, config.belief_limit)?);
                    by_token.insert(token, b.clone());
                    b
                }
            };
            let extras = if slots > 0 {
                absorb(domain, model, &parent_extras, token, &belief, &state, slots)
            } else {
                Vec::new()
            };
            let bps = match &parent_bps {
                Some(p) => Some(Arc::new(p.extend(domain, model, a, token, config.bps_cap)?)),
                None => None,
            };
            stats.generated += 1;
            let child = Node { state, extras, belief, bps, parent: Some(idx), step: Some((a, token)), g, depth };
            let Some(mut h) = objective.heuristic(&child.view())? else {
                stats.pruned += 1;
                continue;
            };
            if let (Some(j), Some(last)) = (jitter::<C>(&mut rng), h.0.last_mut()) {
                *last = last.clone() + j;
            }
            let key = (child.state.clone(), child.belief.clone(), child.extras.clone());
            match best.get_mut(&key) {
                Some(prev) if prev.total_cmp(&h) != Ordering::Greater => {
                    stats.duplicates += 1;
                    continue;
                }
                Some(prev) => {
                    stats.reopened += 1;
                    *prev = h.clone();
                }
                None => {
                    best.insert(key, h.clone());
                }
            }
            seq += 1;
            nodes.push(child);
            open.push(Entry { priority: h, seq, node: nodes.len() - 1 });
        }
    }
    stats.elapsed = start.elapsed();
    if stats.bound_pruned > 0 {
        let bound = config.cost_bound.as_ref().map(|b| b.to_string()).unwrap_or_default();
        return Err(SearchError::CostBoundExceeded { bound });
    }
    Err(SearchError::Exhausted { expansions: stats.expansions })
}

fn finish<C: Scalar>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    nodes: &[Node<C>],
    goal: usize,
    stats: SearchStats,
) -> SearchResult<C> {
    let mut steps = Vec::new();
    let mut cursor = Some(goal);
    while let Some(i) = cursor {
        if let Some(step) = nodes[i].step {
            steps.push(step);
        }
        cursor = nodes[i].parent;
    }
    steps.reverse();
    let plan = Plan::new(steps.iter().map(|&(a, _)| a).collect());
    let trace: Vec<TokenId> = steps.iter().map(|&(_, t)| t).collect();
    let last = &nodes[goal];
    SearchResult {
        steps: domain.action_names(&plan),
        trace_names: model.token_names(&trace),
        plan,
        trace,
        final_belief: (*last.belief).clone(),
        satisfied_goals: Vec::new(),
        chosen_goals: Vec::new(),
        cost: last.g.clone(),
        final_bps: last.bps.as_deref().cloned(),
        achieved_distance: None,
        goal_reaching_chains: None,
        stats,
    }
}
