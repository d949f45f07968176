//! Grounded STRIPS: fluent sets, actions, the transition function, goals and plans.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StripsError {
    #[error("action `{action}` at step {step} is not applicable")]
    InapplicableAction { step: usize, action: String },
    #[error("unknown fluent `{0}`")]
    UnknownFluent(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("duplicate fluent `{0}`")]
    DuplicateFluent(String),
    #[error("duplicate action `{0}`")]
    DuplicateAction(String),
    #[error("action `{0}` both adds and deletes the same fluent")]
    ContradictoryEffect(String),
    #[error("action `{0}` has a negative cost")]
    NegativeCost(String),
    #[error("goal condition is empty")]
    EmptyGoal,
    #[error("candidate goals {0} and {1} are identical")]
    DuplicateGoal(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FluentId(pub u32);

impl FluentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub u32);

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Fixed-width bitset over a fluent universe.
///
/// Width is fixed by the universe size at construction, so equality, ordering
/// and hashing are by value for sets drawn from the same domain.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FluentSet {
    words: Vec<u64>,
}

/// A world state: the fluents that are true (closed world).
pub type State = FluentSet;

impl FluentSet {
    pub fn empty(universe: usize) -> Self {
        FluentSet { words: vec![0; universe.div_ceil(64)] }
    }

    pub fn from_ids<I: IntoIterator<Item = FluentId>>(universe: usize, ids: I) -> Self {
        let mut s = Self::empty(universe);
        for id in ids {
            s.insert(id);
        }
        s
    }

    /// Number of fluents the set can hold, rounded up to a word boundary.
    pub fn capacity(&self) -> usize {
        self.words.len() * 64
    }

    pub fn insert(&mut self, f: FluentId) {
        let i = f.index();
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, f: FluentId) {
        let i = f.index();
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, f: FluentId) -> bool {
        let i = f.index();
        self.words.get(i / 64).is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    pub fn is_subset(&self, other: &FluentSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
            && self.words.iter().skip(other.words.len()).all(|w| *w == 0)
    }

    pub fn intersects(&self, other: &FluentSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn union_with(&mut self, other: &FluentSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn difference_with(&mut self, other: &FluentSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn intersection_len(&self, other: &FluentSet) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn union_len(&self, other: &FluentSet) -> usize {
        self.len() + other.len() - self.intersection_len(other)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = FluentId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros();
                w &= w - 1;
                Some(FluentId((wi * 64) as u32 + bit))
            })
        })
    }
}

impl fmt::Debug for FluentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|id| id.0)).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fluent {
    pub id: FluentId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundedAction<C> {
    pub name: String,
    pub pre: FluentSet,
    pub add: FluentSet,
    pub del: FluentSet,
    pub cost: C,
}

impl<C> GroundedAction<C> {
    /// `pre(a) ⊆ s`
    pub fn applicable(&self, s: &State) -> bool {
        self.pre.is_subset(s)
    }

    /// `s ∪ add(a) \ del(a)`, without checking the precondition.
    pub fn successor(&self, s: &State) -> State {
        let mut next = s.clone();
        next.union_with(&self.add);
        next.difference_with(&self.del);
        next
    }

    pub fn apply(&self, s: &State) -> Result<State, StripsError> {
        if !self.applicable(s) {
            return Err(StripsError::InapplicableAction { step: 0, action: self.name.clone() });
        }
        Ok(self.successor(s))
    }
}

/// `D = ⟨F, A, I⟩` with name lookup tables.
#[derive(Debug, Clone)]
pub struct GroundedDomain<C> {
    name: String,
    fluents: Vec<Fluent>,
    actions: Vec<GroundedAction<C>>,
    initial: State,
    fluent_index: HashMap<String, FluentId>,
    action_index: HashMap<String, ActionId>,
}

impl<C: Scalar> GroundedDomain<C> {
    /// Validates names, effects and costs. `actions` must use sets sized for
    /// `fluent_names.len()`.
    pub fn new(
        fluent_names: Vec<String>,
        actions: Vec<GroundedAction<C>>,
        initial: State,
    ) -> Result<Self, StripsError> {
        let mut fluent_index = HashMap::with_capacity(fluent_names.len());
        let mut fluents = Vec::with_capacity(fluent_names.len());
        for (i, name) in fluent_names.into_iter().enumerate() {
            let id = FluentId(i as u32);
            if fluent_index.insert(name.clone(), id).is_some() {
                return Err(StripsError::DuplicateFluent(name));
            }
            fluents.push(Fluent { id, name });
        }
        let universe = fluents.len();
        let mut action_index = HashMap::with_capacity(actions.len());
        for (i, a) in actions.iter().enumerate() {
            if action_index.insert(a.name.clone(), ActionId(i as u32)).is_some() {
                return Err(StripsError::DuplicateAction(a.name.clone()));
            }
            if a.add.intersects(&a.del) {
                return Err(StripsError::ContradictoryEffect(a.name.clone()));
            }
            if a.cost.is_negative() {
                return Err(StripsError::NegativeCost(a.name.clone()));
            }
            for set in [&a.pre, &a.add, &a.del] {
                if let Some(f) = set.iter().find(|f| f.index() >= universe) {
                    return Err(StripsError::UnknownFluent(format!("#{}", f.0)));
                }
            }
        }
        if let Some(f) = initial.iter().find(|f| f.index() >= universe) {
            return Err(StripsError::UnknownFluent(format!("#{}", f.0)));
        }
        let mut initial = initial;
        if initial.capacity() != FluentSet::empty(universe).capacity() {
            initial = FluentSet::from_ids(universe, initial.iter());
        }
        Ok(GroundedDomain { name: String::new(), fluents, actions, initial, fluent_index, action_index })
    }
}

impl<C> GroundedDomain<C> {
    /// Empty unless set by the parser or [`GroundedDomain::with_name`].
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn fluents(&self) -> &[Fluent] {
        &self.fluents
    }

    pub fn actions(&self) -> &[GroundedAction<C>] {
        &self.actions
    }

    pub fn action(&self, id: ActionId) -> &GroundedAction<C> {
        &self.actions[id.index()]
    }

    pub fn action_ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.actions.len() as u32).map(ActionId)
    }

    pub fn initial(&self) -> &State {
        &self.initial
    }

    pub fn num_fluents(&self) -> usize {
        self.fluents.len()
    }

    pub fn fluent_id(&self, name: &str) -> Option<FluentId> {
        self.fluent_index.get(name).copied()
    }

    pub fn fluent_name(&self, id: FluentId) -> &str {
        &self.fluents[id.index()].name
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.action_index.get(name).copied()
    }

    pub fn empty_set(&self) -> FluentSet {
        FluentSet::empty(self.fluents.len())
    }

    /// Resolve fluent names into a set.
    pub fn fluent_set<'a, I: IntoIterator<Item = &'a str>>(&self, names: I) -> Result<FluentSet, StripsError> {
        let mut s = self.empty_set();
        for n in names {
            s.insert(self.fluent_id(n).ok_or_else(|| StripsError::UnknownFluent(n.to_string()))?);
        }
        Ok(s)
    }

    pub fn plan_from_names<'a, I: IntoIterator<Item = &'a str>>(&self, names: I) -> Result<Plan, StripsError> {
        names
            .into_iter()
            .map(|n| self.action_id(n).ok_or_else(|| StripsError::UnknownAction(n.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(Plan::new)
    }

    pub fn action_names(&self, plan: &Plan) -> Vec<String> {
        plan.steps.iter().map(|a| self.action(*a).name.clone()).collect()
    }

    pub fn state_names(&self, s: &State) -> Vec<&str> {
        s.iter().map(|f| self.fluent_name(f)).collect()
    }

    /// Same domain with a different initial state.
    pub fn with_initial(mut self, initial: State) -> Self {
        self.initial = initial;
        self
    }

    /// Same domain with extra actions appended. Names must be fresh.
    pub fn with_extra_actions(mut self, extra: Vec<GroundedAction<C>>) -> Result<Self, StripsError> {
        for a in extra {
            let id = ActionId(self.actions.len() as u32);
            if self.action_index.insert(a.name.clone(), id).is_some() {
                return Err(StripsError::DuplicateAction(a.name));
            }
            self.actions.push(a);
        }
        Ok(self)
    }

    /// All actions applicable in `s`, in id order.
    pub fn applicable_in<'a>(&'a self, s: &'a State) -> impl Iterator<Item = ActionId> + 'a {
        self.action_ids().filter(move |a| self.action(*a).applicable(s))
    }
}

/// A conjunctive positive goal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GoalCondition {
    pub literals: FluentSet,
}

impl GoalCondition {
    pub fn new(literals: FluentSet) -> Result<Self, StripsError> {
        if literals.is_empty() {
            return Err(StripsError::EmptyGoal);
        }
        Ok(GoalCondition { literals })
    }
}

/// `G_A` followed by the decoy/confounding goals in file order.
///
/// Index 0 is always the true goal; other goal `i` has index `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGoalSet {
    pub true_goal: GoalCondition,
    pub others: Vec<GoalCondition>,
}

impl CandidateGoalSet {
    pub fn new(true_goal: GoalCondition, others: Vec<GoalCondition>) -> Result<Self, StripsError> {
        let all: Vec<&GoalCondition> = std::iter::once(&true_goal).chain(&others).collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if all[i] == all[j] {
                    return Err(StripsError::DuplicateGoal(i, j));
                }
            }
        }
        Ok(CandidateGoalSet { true_goal, others })
    }

    /// `n`
    pub fn len(&self) -> usize {
        1 + self.others.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, index: usize) -> &GoalCondition {
        if index == 0 {
            &self.true_goal
        } else {
            &self.others[index - 1]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &GoalCondition> {
        std::iter::once(&self.true_goal).chain(&self.others)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Plan {
    pub steps: Vec<ActionId>,
}

impl Plan {
    pub fn new(steps: Vec<ActionId>) -> Self {
        Plan { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

pub fn applicable<C>(s: &State, a: &GroundedAction<C>) -> bool {
    a.applicable(s)
}

pub fn apply<C>(s: &State, a: &GroundedAction<C>) -> Result<State, StripsError> {
    a.apply(s)
}

pub fn satisfies(s: &State, g: &GoalCondition) -> bool {
    g.literals.is_subset(s)
}

/// Final state of `plan` from `s0`. The error carries the index of the first
/// failing step.
pub fn execute<C>(domain: &GroundedDomain<C>, s0: &State, plan: &Plan) -> Result<State, StripsError> {
    let mut s = s0.clone();
    for (step, id) in plan.steps.iter().enumerate() {
        let a = domain.action(*id);
        if !a.applicable(&s) {
            return Err(StripsError::InapplicableAction { step, action: a.name.clone() });
        }
        s = a.successor(&s);
    }
    Ok(s)
}

/// `[s0, s1, …, sn]` visited by `plan`.
pub fn state_sequence<C>(domain: &GroundedDomain<C>, s0: &State, plan: &Plan) -> Result<Vec<State>, StripsError> {
    let mut out = Vec::with_capacity(plan.len() + 1);
    out.push(s0.clone());
    for (step, id) in plan.steps.iter().enumerate() {
        let a = domain.action(*id);
        let s = out.last().expect("non-empty");
        if !a.applicable(s) {
            return Err(StripsError::InapplicableAction { step, action: a.name.clone() });
        }
        let next = a.successor(s);
        out.push(next);
    }
    Ok(out)
}

pub fn plan_cost<C: Scalar>(domain: &GroundedDomain<C>, plan: &Plan) -> C {
    plan.steps.iter().fold(C::zero(), |acc, a| acc + domain.action(*a).cost.clone())
}

/// Name, preconditions, adds, deletes and cost, by fluent name.
type ActionSpec<C> = (String, Vec<String>, Vec<String>, Vec<String>, C);

/// Convenience builder for small hand-written domains.
pub struct DomainBuilder<C> {
    fluents: Vec<String>,
    actions: Vec<ActionSpec<C>>,
    initial: Vec<String>,
}

impl<C: Scalar> Default for DomainBuilder<C> {
    fn default() -> Self {
        Self::new()
    }
}

impl<C: Scalar> DomainBuilder<C> {
    pub fn new() -> Self {
        DomainBuilder { fluents: Vec::new(), actions: Vec::new(), initial: Vec::new() }
    }

    pub fn fluents<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.fluents.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn action(self, name: &str, pre: &[&str], add: &[&str], del: &[&str]) -> Self {
        self.action_with_cost(name, pre, add, del, C::one())
    }

    pub fn action_with_cost(mut self, name: &str, pre: &[&str], add: &[&str], del: &[&str], cost: C) -> Self {
        let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        self.actions.push((name.to_string(), own(pre), own(add), own(del), cost));
        self
    }

    pub fn initial(mut self, names: &[&str]) -> Self {
        self.initial = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn build(self) -> Result<GroundedDomain<C>, StripsError> {
        let n = self.fluents.len();
        let index: HashMap<&str, FluentId> =
            self.fluents.iter().enumerate().map(|(i, f)| (f.as_str(), FluentId(i as u32))).collect();
        let set = |names: &[String]| -> Result<FluentSet, StripsError> {
            let mut s = FluentSet::empty(n);
            for name in names {
                s.insert(*index.get(name.as_str()).ok_or_else(|| StripsError::UnknownFluent(name.clone()))?);
            }
            Ok(s)
        };
        let mut actions = Vec::with_capacity(self.actions.len());
        for (name, pre, add, del, cost) in &self.actions {
            actions.push(GroundedAction {
                name: name.clone(),
                pre: set(pre)?,
                add: set(add)?,
                del: set(del)?,
                cost: cost.clone(),
            });
        }
        let initial = set(&self.initial)?;
        GroundedDomain::new(self.fluents, actions, initial)
    }
}
