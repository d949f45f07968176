mod common;

use std::cell::RefCell;

use covert_core::belief::Belief;
use covert_core::distances::{distance, DistanceMeasure};
use covert_core::generate::{random_instance, GeneratorParams, RandomInstance};
use covert_core::oracle::{
    replay, shortest_plan_length, verify_j_legible, verify_k_ambiguous, verify_l_diverse, verify_m_similar,
    DEFAULT_BUDGET,
};
use covert_core::plangraph::SetLevelCache;
use covert_core::search::{gbfs, plan, NodeView, Objective, Priority, SearchError, Variant, VariantConfig};
use covert_core::strips::{satisfies, ActionId, CandidateGoalSet, GroundedDomain, Plan, State};
use covert_core::Rational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instances(seed: u64, count: usize) -> Vec<RandomInstance<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_instance(&mut rng, GeneratorParams::default())).collect()
}

fn random_walk<R: Rng>(rng: &mut R, domain: &GroundedDomain<Rational>, s0: &State, max: usize) -> Plan {
    let mut s = s0.clone();
    let mut steps = Vec::new();
    for _ in 0..rng.gen_range(1..=max) {
        let options: Vec<ActionId> = domain.applicable_in(&s).collect();
        let Some(&a) = options.choose(rng) else { break };
        s = domain.action(a).successor(&s);
        steps.push(a);
    }
    Plan::new(steps)
}

fn reachable(domain: &GroundedDomain<Rational>, s0: &State, limit: usize) -> Vec<State> {
    let mut seen = vec![s0.clone()];
    let mut i = 0;
    while i < seen.len() && seen.len() < limit {
        let s = seen[i].clone();
        for a in domain.applicable_in(&s) {
            let t = domain.action(a).successor(&s);
            if !seen.contains(&t) {
                seen.push(t);
            }
        }
        i += 1;
    }
    seen
}

#[test]
fn distances_are_symmetric_bounded_and_zero_on_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pool = instances(10, 50);
    let mut pairs = 0;
    while pairs < 1000 {
        let inst = pool.choose(&mut rng).unwrap();
        let p = random_walk(&mut rng, &inst.domain, &inst.s0, 6);
        let q = random_walk(&mut rng, &inst.domain, &inst.s0, 6);
        if p.is_empty() || q.is_empty() {
            continue;
        }
        pairs += 1;
        for measure in [DistanceMeasure::Action, DistanceMeasure::CausalLink, DistanceMeasure::StateSequence] {
            let pq: Rational = match distance(measure, &inst.domain, &inst.s0, &p, &q) {
                Ok(d) => d,
                // Two plans with no causal links have no defined link distance.
                Err(_) if measure == DistanceMeasure::CausalLink => continue,
                Err(e) => panic!("{measure:?}: {e}"),
            };
            let qp: Rational = distance(measure, &inst.domain, &inst.s0, &q, &p).unwrap();
            assert_eq!(pq, qp, "{measure:?} symmetry");
            assert!(pq >= Rational::zero() && pq <= Rational::one(), "{measure:?} range: {pq}");
            if let Ok(pp) = distance::<Rational, _>(measure, &inst.domain, &inst.s0, &p, &p) {
                assert_eq!(pp, Rational::zero(), "{measure:?} identity");
            }
        }
    }
}

#[test]
fn set_level_never_exceeds_the_optimal_plan_length() {
    let mut checked = 0;
    for inst in instances(20, 200) {
        let cache = SetLevelCache::new();
        for s in reachable(&inst.domain, &inst.s0, 12) {
            for goal in &inst.goals {
                let Some(opt) = shortest_plan_length(&inst.domain, &s, goal, DEFAULT_BUDGET).unwrap() else {
                    continue;
                };
                let level = cache.level(&inst.domain, &s, goal).finite().expect("solvable goals have finite set-level");
                assert!(level as usize <= opt, "set-level {level} > optimum {opt}");
                checked += 1;
            }
        }
    }
    assert!(checked > 500, "only {checked} solvable pairs");
}

/// Never accepts a node; records one causally consistent chain and the
/// belief of every node the search generates.
struct Recorder {
    seen: RefCell<Vec<(Vec<ActionId>, Belief)>>,
}

impl Objective<Rational> for Recorder {
    fn uses_bps(&self) -> bool {
        true
    }

    fn heuristic(&self, node: &NodeView<'_, Rational>) -> Result<Option<Priority<Rational>>, SearchError> {
        let chain = &node.bps.expect("plan sets requested").chains[0];
        self.seen.borrow_mut().push((chain.actions.clone(), node.belief.clone()));
        Ok(Some(Priority::scalar(Rational::from_integer(node.depth as i64))))
    }

    fn is_goal(&self, _: &NodeView<'_, Rational>) -> Result<bool, SearchError> {
        Ok(false)
    }
}

#[test]
fn search_beliefs_match_the_oracle_at_every_node() {
    let mut nodes = 0;
    for inst in instances(30, 200) {
        let recorder = Recorder { seen: RefCell::new(Vec::new()) };
        let config = VariantConfig {
            bps_cap: 1,
            max_expansions: Some(300),
            cost_bound: Some(Rational::from_integer(6)),
            ..VariantConfig::new(Variant::KAmbiguous)
        };
        let _ = gbfs(&inst.domain, &inst.model, &inst.s0, &recorder, &config, 1, None);
        for (actions, belief) in recorder.seen.into_inner() {
            let r = replay(&inst.domain, &inst.model, &inst.s0, &Plan::new(actions), DEFAULT_BUDGET).unwrap();
            assert_eq!(r.final_belief(), belief.states());
            nodes += 1;
        }
    }
    assert!(nodes > 1000, "only {nodes} nodes compared");
}

fn goal_set(inst: &RandomInstance<Rational>) -> Option<CandidateGoalSet> {
    let (first, rest) = inst.goals.split_first()?;
    CandidateGoalSet::new(first.clone(), rest.to_vec()).ok()
}

fn quick(variant: Variant) -> VariantConfig<Rational> {
    VariantConfig { max_expansions: Some(2000), ..VariantConfig::new(variant) }
}

#[test]
fn goal_variant_plans_verify_and_are_monotone() {
    let mut solved = [0usize; 2];
    for inst in instances(40, 200) {
        let Some(goals) = goal_set(&inst) else { continue };
        let n = goals.len();
        if n < 2 {
            continue;
        }
        let verify = |variant: Variant, p: &Plan, x: usize| match variant {
            Variant::KAmbiguous => {
                verify_k_ambiguous(&inst.domain, &inst.model, &inst.s0, &goals, p, x, DEFAULT_BUDGET)
            }
            _ => verify_j_legible(&inst.domain, &inst.model, &inst.s0, &goals, p, x, DEFAULT_BUDGET),
        };
        let k = 2;
        if let Ok(r) =
            plan(&inst.domain, &inst.model, &inst.s0, &goals, &VariantConfig { k, ..quick(Variant::KAmbiguous) })
        {
            solved[0] += 1;
            for k2 in 1..=k {
                assert!(verify(Variant::KAmbiguous, &r.plan, k2).unwrap().passed(), "k' = {k2}");
            }
        }
        let j = 1;
        if let Ok(r) =
            plan(&inst.domain, &inst.model, &inst.s0, &goals, &VariantConfig { j, ..quick(Variant::JLegible) })
        {
            solved[1] += 1;
            for j2 in j..=n {
                assert!(verify(Variant::JLegible, &r.plan, j2).unwrap().passed(), "j' = {j2}");
            }
        }
    }
    assert!(solved.iter().all(|&s| s >= 10), "too few solved instances: {solved:?}");
}

#[test]
fn chain_variant_plans_verify() {
    let mut solved = [0usize; 2];
    for inst in instances(50, 200) {
        let Some(goals) = goal_set(&inst) else { continue };
        let goal = goals.get(0);
        if satisfies(&inst.s0, goal) {
            continue;
        }
        for (i, variant) in [Variant::LDiverse, Variant::MSimilar].into_iter().enumerate() {
            let config = VariantConfig { l: 2, m: 2, ..quick(variant) };
            let Ok(r) = plan(&inst.domain, &inst.model, &inst.s0, &goals, &config) else { continue };
            solved[i] += 1;
            let v = match variant {
                Variant::LDiverse => verify_l_diverse(
                    &inst.domain,
                    &inst.model,
                    &inst.s0,
                    goal,
                    &r.plan,
                    2,
                    config.distance,
                    &config.d,
                    DEFAULT_BUDGET,
                ),
                _ => verify_m_similar(
                    &inst.domain,
                    &inst.model,
                    &inst.s0,
                    goal,
                    &r.plan,
                    2,
                    config.distance,
                    &config.d,
                    DEFAULT_BUDGET,
                ),
            }
            .unwrap();
            assert!(v.passed(), "{variant:?}: {v:?}");
            assert_eq!(v.achieved_distance, r.achieved_distance.map(|d| d.to_string()));
        }
    }
    assert!(solved.iter().all(|&s| s >= 10), "too few solved instances: {solved:?}");
}
