//! Graphplan-style planning graph with pairwise mutexes, and the set-level
//! heuristic computed from it.

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use crate::belief::Belief;
use crate::strips::{ActionId, FluentId, FluentSet, GoalCondition, GroundedDomain, State};

/// A graph level, with `Infinite` ordered above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Finite(u32),
    Infinite,
}

impl Level {
    pub fn is_finite(self) -> bool {
        matches!(self, Level::Finite(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Level::Finite(n) => Some(n),
            Level::Infinite => None,
        }
    }

    /// Finite value, or `clamp` for `Infinite`.
    pub fn or_clamp(self, clamp: u32) -> u32 {
        self.finite().unwrap_or(clamp)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Finite(n) => write!(f, "{n}"),
            Level::Infinite => f.write_str("inf"),
        }
    }
}

/// Real action or the maintenance (noop) action for a fluent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerAction {
    Real(ActionId),
    Maintain(FluentId),
}

/// Square symmetric bit matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitMatrix {
    n: usize,
    row_words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        let row_words = n.div_ceil(64).max(1);
        BitMatrix { n, row_words, data: vec![0; n * row_words] }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.row_words..(i + 1) * self.row_words]
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.row(i)[j / 64] & (1 << (j % 64)) != 0
    }

    fn set_sym(&mut self, i: usize, j: usize) {
        self.data[i * self.row_words + j / 64] |= 1 << (j % 64);
        self.data[j * self.row_words + i / 64] |= 1 << (i % 64);
    }

    fn count(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// One proposition layer: the fluents present and, for each fluent, the set of
/// fluents it is mutex with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropLayer {
    pub props: FluentSet,
    mutex: Vec<FluentSet>,
}

impl PropLayer {
    pub fn is_mutex(&self, p: FluentId, q: FluentId) -> bool {
        self.mutex[p.index()].contains(q)
    }

    pub fn mutex_pairs(&self) -> Vec<(FluentId, FluentId)> {
        let mut out = Vec::new();
        for p in self.props.iter() {
            for q in self.mutex[p.index()].iter().filter(|q| *q > p) {
                out.push((p, q));
            }
        }
        out
    }

    /// All of `goal` present and pairwise mutex-free.
    pub fn supports(&self, goal: &FluentSet) -> bool {
        goal.is_subset(&self.props) && goal.iter().all(|p| !self.mutex[p.index()].intersects(goal))
    }
}

#[derive(Debug, Clone)]
pub struct ActionLayer {
    pub actions: Vec<LayerAction>,
    mutex: BitMatrix,
}

impl ActionLayer {
    pub fn is_mutex(&self, i: usize, j: usize) -> bool {
        self.mutex.get(i, j)
    }

    pub fn mutex_count(&self) -> usize {
        self.mutex.count() / 2
    }
}

#[derive(Debug, Clone)]
pub struct PlanGraph {
    pub props: Vec<PropLayer>,
    pub actions: Vec<ActionLayer>,
    pub leveled_off: bool,
}

struct Effects<'a> {
    pre: &'a FluentSet,
    add: &'a FluentSet,
    del: &'a FluentSet,
}

impl PlanGraph {
    pub fn new(universe: usize, s: &State) -> Self {
        let layer = PropLayer { props: s.clone(), mutex: vec![FluentSet::empty(universe); universe] };
        PlanGraph { props: vec![layer], actions: Vec::new(), leveled_off: false }
    }

    pub fn depth(&self) -> usize {
        self.props.len() - 1
    }

    pub fn last(&self) -> &PropLayer {
        self.props.last().expect("layer 0 always exists")
    }

    /// Add one action layer and the proposition layer it supports. Sets
    /// `leveled_off` once the new layer repeats the previous one.
    pub fn expand<C>(&mut self, domain: &GroundedDomain<C>) {
        if self.leveled_off {
            return;
        }
        let universe = domain.num_fluents();
        let cur = self.last();

        let singles: Vec<FluentSet> =
            (0..universe).map(|i| FluentSet::from_ids(universe, [FluentId(i as u32)])).collect();
        let empty = FluentSet::empty(universe);

        let mut layer_actions = Vec::new();
        for a in domain.action_ids() {
            let act = domain.action(a);
            if act.pre.is_subset(&cur.props) && act.pre.iter().all(|p| !cur.mutex[p.index()].intersects(&act.pre)) {
                layer_actions.push(LayerAction::Real(a));
            }
        }
        for f in cur.props.iter() {
            layer_actions.push(LayerAction::Maintain(f));
        }
        let effects: Vec<Effects<'_>> = layer_actions
            .iter()
            .map(|la| match *la {
                LayerAction::Real(a) => {
                    let act = domain.action(a);
                    Effects { pre: &act.pre, add: &act.add, del: &act.del }
                }
                LayerAction::Maintain(f) => Effects { pre: &singles[f.index()], add: &singles[f.index()], del: &empty },
            })
            .collect();

        // Fluents mutex with some precondition of each action.
        let needs_mutex: Vec<FluentSet> = effects
            .iter()
            .map(|e| {
                let mut m = FluentSet::empty(universe);
                for p in e.pre.iter() {
                    m.union_with(&cur.mutex[p.index()]);
                }
                m
            })
            .collect();

        let n = layer_actions.len();
        let mut amutex = BitMatrix::new(n);
        for i in 0..n {
            for j in i + 1..n {
                let (x, y) = (&effects[i], &effects[j]);
                let inconsistent = x.del.intersects(y.add) || y.del.intersects(x.add);
                let interference = x.del.intersects(y.pre) || y.del.intersects(x.pre);
                let competing = needs_mutex[i].intersects(y.pre);
                if inconsistent || interference || competing {
                    amutex.set_sym(i, j);
                }
            }
        }

        let mut next_props = FluentSet::empty(universe);
        let mut achievers: Vec<Vec<usize>> = vec![Vec::new(); universe];
        for (i, e) in effects.iter().enumerate() {
            next_props.union_with(e.add);
            for f in e.add.iter() {
                achievers[f.index()].push(i);
            }
        }

        // q is mutex with p iff no achiever of q is compatible with any
        // achiever of p. `compatible[p]` holds the actions compatible with at
        // least one achiever of p (an achiever is compatible with itself).
        let words = n.div_ceil(64).max(1);
        let mut compatible: Vec<Vec<u64>> = vec![vec![0; words]; universe];
        let mut achiever_bits: Vec<Vec<u64>> = vec![vec![0; words]; universe];
        for f in next_props.iter() {
            let fi = f.index();
            for &x in &achievers[fi] {
                achiever_bits[fi][x / 64] |= 1 << (x % 64);
                let row = amutex.row(x);
                for w in 0..words {
                    let valid = if w == words - 1 && n % 64 != 0 { (1u64 << (n % 64)) - 1 } else { u64::MAX };
                    compatible[fi][w] |= !row[w] & valid;
                }
            }
        }
        let mut pmutex = vec![FluentSet::empty(universe); universe];
        let present: Vec<FluentId> = next_props.iter().collect();
        for (ai, &p) in present.iter().enumerate() {
            for &q in &present[ai + 1..] {
                let overlap = compatible[p.index()].iter().zip(&achiever_bits[q.index()]).any(|(c, a)| c & a != 0);
                if !overlap {
                    pmutex[p.index()].insert(q);
                    pmutex[q.index()].insert(p);
                }
            }
        }

        let next = PropLayer { props: next_props, mutex: pmutex };
        let repeated = next == *cur;
        self.actions.push(ActionLayer { actions: layer_actions, mutex: amutex });
        self.props.push(next);
        if repeated {
            self.leveled_off = true;
        }
    }

    /// First layer supporting `goal`, looking only at layers built so far.
    fn first_support(&self, goal: &FluentSet) -> Option<u32> {
        self.props.iter().position(|l| l.supports(goal)).map(|i| i as u32)
    }

    pub fn set_level(&self, goal: &GoalCondition) -> Level {
        match self.first_support(&goal.literals) {
            Some(i) => Level::Finite(i),
            None => Level::Infinite,
        }
    }
}

/// Expand from `s` until the graph levels off.
pub fn build_plangraph<C>(domain: &GroundedDomain<C>, s: &State) -> PlanGraph {
    let mut g = PlanGraph::new(domain.num_fluents(), s);
    while !g.leveled_off {
        g.expand(domain);
    }
    g
}

pub fn set_level(graph: &PlanGraph, goal: &GoalCondition) -> Level {
    graph.set_level(goal)
}

/// Set-level of several goals from one state, expanding only as far as
/// needed.
pub fn set_levels_from<C>(domain: &GroundedDomain<C>, s: &State, goals: &[&FluentSet]) -> Vec<Level> {
    let mut g = PlanGraph::new(domain.num_fluents(), s);
    let mut out: Vec<Option<Level>> = vec![None; goals.len()];
    loop {
        let depth = g.depth() as u32;
        let layer = g.last();
        for (i, goal) in goals.iter().enumerate() {
            if out[i].is_none() && layer.supports(goal) {
                out[i] = Some(Level::Finite(depth));
            }
        }
        if out.iter().all(Option::is_some) || g.leveled_off {
            break;
        }
        g.expand(domain);
    }
    out.into_iter().map(|l| l.unwrap_or(Level::Infinite)).collect()
}

/// Memo of set-levels keyed by `(state, goal)`; one cache per domain.
///
/// Read-mostly and safe to share; a racing insert of the same key stores the
/// same value.
#[derive(Debug, Default)]
pub struct SetLevelCache {
    table: RwLock<HashMap<(State, FluentSet), Level>>,
}

impl SetLevelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.table.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn level<C>(&self, domain: &GroundedDomain<C>, s: &State, goal: &GoalCondition) -> Level {
        self.levels(domain, s, &[goal])[0]
    }

    /// Levels of each goal from `s`, building one graph for all misses.
    pub fn levels<C>(&self, domain: &GroundedDomain<C>, s: &State, goals: &[&GoalCondition]) -> Vec<Level> {
        let mut out = vec![Level::Infinite; goals.len()];
        let mut missing = Vec::new();
        {
            let table = self.table.read().expect("cache lock");
            for (i, g) in goals.iter().enumerate() {
                // Keying by (state, goal) clones; acceptable at these sizes.
                match table.get(&(s.clone(), g.literals.clone())) {
                    Some(l) => out[i] = *l,
                    None => missing.push(i),
                }
            }
        }
        if missing.is_empty() {
            return out;
        }
        let sets: Vec<&FluentSet> = missing.iter().map(|&i| &goals[i].literals).collect();
        let computed = set_levels_from(domain, s, &sets);
        let mut table = self.table.write().expect("cache lock");
        for (&i, l) in missing.iter().zip(computed) {
            table.entry((s.clone(), goals[i].literals.clone())).or_insert(l);
            out[i] = l;
        }
        out
    }

    /// `min_{ŝ ∈ b} set-level(ŝ, goal)`
    pub fn level_from_belief<C>(&self, domain: &GroundedDomain<C>, belief: &Belief, goal: &GoalCondition) -> Level {
        let mut best = Level::Infinite;
        for s in belief.iter() {
            let l = self.level(domain, s, goal);
            if l < best {
                best = l;
                if best == Level::Finite(0) {
                    break;
                }
            }
        }
        best
    }
}

/// Uncached `min_{ŝ ∈ b} set-level(ŝ, goal)`.
pub fn set_level_from_belief<C>(domain: &GroundedDomain<C>, belief: &Belief, goal: &GoalCondition) -> Level {
    belief.iter().map(|s| set_levels_from(domain, s, &[&goal.literals])[0]).min().unwrap_or(Level::Infinite)
}
