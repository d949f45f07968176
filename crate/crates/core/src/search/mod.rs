//! Belief-space greedy best-first search and the four plan variants.
//!
//! Every variant runs the same engine ([`gbfs`]) over nodes that pair the
//! agent's true state with the observer's belief. Variants differ only in the
//! [`Objective`] they plug in: a goal test and a heuristic key.

mod engine;
mod variants;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use engine::{gbfs, NodeView, Objective, Priority};
pub use variants::{
    delta_loop, plan, plan_classical, plan_j_legible, plan_k_ambiguous, plan_l_diverse, plan_m_similar, ChainObjective,
    ClassicalObjective, GoalObjective,
};

use crate::belief::{Belief, BeliefError, BeliefPlanSet, DEFAULT_BELIEF_LIMIT, DEFAULT_BPS_CAP};
use crate::distances::{DistanceError, DistanceMeasure};
use crate::observation::{ObservationError, TokenId};
use crate::scalar::Scalar;
use crate::strips::{Plan, StripsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "kamb")]
    KAmbiguous,
    #[serde(rename = "jleg")]
    JLegible,
    #[serde(rename = "ldiv")]
    LDiverse,
    #[serde(rename = "msim")]
    MSimilar,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::KAmbiguous, Variant::JLegible, Variant::LDiverse, Variant::MSimilar];

    pub fn name(self) -> &'static str {
        match self {
            Variant::KAmbiguous => "kamb",
            Variant::JLegible => "jleg",
            Variant::LDiverse => "ldiv",
            Variant::MSimilar => "msim",
        }
    }

    /// ℓ-diverse and m-similar reason over belief plan sets.
    pub fn uses_chains(self) -> bool {
        matches!(self, Variant::LDiverse | Variant::MSimilar)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "kamb" | "k-ambiguous" => Ok(Variant::KAmbiguous),
            "jleg" | "j-legible" => Ok(Variant::JLegible),
            "ldiv" | "l-diverse" => Ok(Variant::LDiverse),
            "msim" | "m-similar" => Ok(Variant::MSimilar),
            other => Err(format!("unknown variant `{other}` (expected kamb, jleg, ldiv or msim)")),
        }
    }
}

/// Order in which goal subsets are tried on restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubsetStrategy {
    /// Lexicographic in goal index.
    #[default]
    Lex,
    /// Descending total set-level from the initial state of the goals the
    /// subset pushes away, ties broken lexicographically.
    FarthestFirst,
}

impl FromStr for SubsetStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lex" => Ok(SubsetStrategy::Lex),
            "farthest-first" => Ok(SubsetStrategy::FarthestFirst),
            other => Err(format!("unknown subset strategy `{other}` (expected lex or farthest-first)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantConfig<C> {
    pub variant: Variant,
    pub k: usize,
    pub j: usize,
    pub l: usize,
    pub m: usize,
    /// Fix the goal subset instead of iterating over all of them. Indices
    /// refer to [`CandidateGoalSet`](crate::strips::CandidateGoalSet) order.
    pub chosen_goals: Option<Vec<usize>>,
    pub distance: DistanceMeasure,
    pub d: C,
    /// Defaults to four times the set-level of the true goal from `s0` for
    /// the chain variants; unbounded otherwise.
    pub cost_bound: Option<C>,
    pub delta_max: usize,
    pub noops: bool,
    pub heuristic_noise: Option<u64>,
    pub subset_strategy: SubsetStrategy,
    pub belief_limit: usize,
    pub bps_cap: usize,
    /// Chain budget for the exact re-enumeration behind a capped goal test.
    pub exact_chain_limit: usize,
    pub max_expansions: Option<usize>,
    pub timeout: Option<Duration>,
}

impl<C: Scalar> VariantConfig<C> {
    pub fn new(variant: Variant) -> Self {
        let d = match variant {
            Variant::MSimilar => C::from_ratio(1, 2),
            _ => C::from_ratio(1, 4),
        };
        VariantConfig {
            variant,
            k: 5,
            j: 3,
            l: 3,
            m: 3,
            chosen_goals: None,
            distance: DistanceMeasure::Action,
            d,
            cost_bound: None,
            delta_max: 1,
            noops: false,
            heuristic_noise: None,
            subset_strategy: SubsetStrategy::Lex,
            belief_limit: DEFAULT_BELIEF_LIMIT,
            bps_cap: DEFAULT_BPS_CAP,
            exact_chain_limit: 1 << 16,
            max_expansions: None,
            timeout: None,
        }
    }

    /// Check the variant parameters against `n` candidate goals.
    pub fn validate(&self, n: usize) -> Result<(), SearchError> {
        let bad = |name: &str, message: String| Err(SearchError::BadParameter { name: name.into(), message });
        match self.variant {
            Variant::KAmbiguous if self.k < 1 || self.k > n => {
                return bad("k", format!("{} is outside 1..={n}", self.k))
            }
            Variant::JLegible if self.j < 1 || self.j > n => return bad("j", format!("{} is outside 1..={n}", self.j)),
            Variant::LDiverse if self.l < 2 => return bad("l", format!("{} is below 2", self.l)),
            Variant::MSimilar if self.m < 2 => return bad("m", format!("{} is below 2", self.m)),
            _ => {}
        }
        if self.d < C::zero() || self.d > C::one() {
            return bad("d", format!("{} is outside [0, 1]", self.d));
        }
        if let Some(c) = &self.cost_bound {
            if *c <= C::zero() {
                return bad("cost-bound", format!("{c} is not positive"));
            }
        }
        if self.delta_max < 1 {
            return bad("delta-max", "must be at least 1".into());
        }
        if self.bps_cap < 1 {
            return bad("bps-cap", "must be at least 1".into());
        }
        if let Some(chosen) = &self.chosen_goals {
            if let Some(&bad_idx) = chosen.iter().find(|&&i| i == 0 || i >= n) {
                return bad("chosen-goals", format!("index {bad_idx} is not a decoy or confounding goal"));
            }
        }
        Ok(())
    }

    pub(crate) fn deadline(&self, start: Instant) -> Option<Instant> {
        self.timeout.map(|t| start + t)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expansions: usize,
    pub generated: usize,
    pub duplicates: usize,
    pub reopened: usize,
    /// Successors dropped for an infinite heuristic term.
    pub pruned: usize,
    /// Successors dropped for exceeding the cost bound.
    pub bound_pruned: usize,
    pub restarts: usize,
    pub delta: usize,
    pub elapsed: Duration,
}

impl SearchStats {
    fn absorb(&mut self, other: &SearchStats) {
        self.expansions += other.expansions;
        self.generated += other.generated;
        self.duplicates += other.duplicates;
        self.reopened += other.reopened;
        self.pruned += other.pruned;
        self.bound_pruned += other.bound_pruned;
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult<C> {
    pub plan: Plan,
    /// Action names, so results stay readable after noop compilation.
    pub steps: Vec<String>,
    pub trace: Vec<TokenId>,
    pub trace_names: Vec<String>,
    pub final_belief: Belief,
    /// Candidate goals satisfied by some state of the final belief.
    pub satisfied_goals: Vec<usize>,
    /// The goal subset the successful restart used.
    pub chosen_goals: Vec<usize>,
    pub cost: C,
    pub final_bps: Option<BeliefPlanSet>,
    /// `d_min` for ℓ-diverse, `d_max` for m-similar.
    pub achieved_distance: Option<C>,
    pub goal_reaching_chains: Option<usize>,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("open list exhausted after {expansions} expansions")]
    Exhausted { expansions: usize },
    #[error("no plan within cost bound {bound}")]
    CostBoundExceeded { bound: String },
    #[error("no {k}-ambiguous plan after trying {subsets} goal subsets")]
    NoKAmbiguousPlan { k: usize, subsets: usize },
    #[error("no {j}-legible plan after trying {subsets} goal subsets")]
    NoJLegiblePlan { j: usize, subsets: usize },
    #[error("no {l}-diverse plan with d_min >= {d}")]
    NoLDiversePlan { l: usize, d: String },
    #[error("no {m}-similar plan with d_max <= {d}")]
    NoMSimilarPlan { m: usize, d: String },
    #[error("search timed out after {seconds:.1} s")]
    Timeout { seconds: f64 },
    #[error("expansion limit of {limit} reached")]
    ExpansionLimit { limit: usize },
    #[error("bad parameter `{name}`: {message}")]
    BadParameter { name: String, message: String },
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Observation(#[from] ObservationError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Strips(#[from] StripsError),
}

impl SearchError {
    /// Stable identifier for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            SearchError::Exhausted { .. } => "Exhausted",
            SearchError::CostBoundExceeded { .. } => "CostBoundExceeded",
            SearchError::NoKAmbiguousPlan { .. } => "NoKAmbiguousPlan",
            SearchError::NoJLegiblePlan { .. } => "NoJLegiblePlan",
            SearchError::NoLDiversePlan { .. } => "NoLDiversePlan",
            SearchError::NoMSimilarPlan { .. } => "NoMSimilarPlan",
            SearchError::Timeout { .. } => "Timeout",
            SearchError::ExpansionLimit { .. } => "ExpansionLimit",
            SearchError::BadParameter { .. } => "BadParameter",
            SearchError::Belief(BeliefError::BeliefOverflow { .. }) => "BeliefOverflow",
            SearchError::Belief(_) => "Belief",
            SearchError::Observation(_) => "Observation",
            SearchError::Distance(_) => "Distance",
            SearchError::Strips(_) => "Strips",
        }
    }

    /// The search ran and found nothing, as opposed to bad input or a broken model.
    pub fn is_no_plan(&self) -> bool {
        matches!(
            self,
            SearchError::Exhausted { .. }
                | SearchError::CostBoundExceeded { .. }
                | SearchError::NoKAmbiguousPlan { .. }
                | SearchError::NoJLegiblePlan { .. }
                | SearchError::NoLDiversePlan { .. }
                | SearchError::NoMSimilarPlan { .. }
                | SearchError::Timeout { .. }
                | SearchError::ExpansionLimit { .. }
                | SearchError::Belief(BeliefError::BeliefOverflow { .. })
        )
    }
}
