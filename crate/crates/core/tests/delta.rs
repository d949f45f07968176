mod common;

use covert_core::distances::DistanceMeasure;
use covert_core::oracle::{verify_m_similar, DEFAULT_BUDGET};
use covert_core::search::{plan_m_similar, SearchError, Variant, VariantConfig};
use covert_core::Rational;

fn config(delta_max: usize) -> VariantConfig<Rational> {
    VariantConfig {
        m: 2,
        d: Rational::new(1, 4),
        cost_bound: Some(Rational::from_integer(4)),
        delta_max,
        ..VariantConfig::new(Variant::MSimilar)
    }
}

#[test]
fn one_tracked_state_exceeds_the_cost_bound() {
    let l = common::load("delta", "problem.txt", "observations.obs");
    let err = plan_m_similar(&l.domain, &l.model, &l.spec.initial, l.spec.goals.get(0), &config(1)).unwrap_err();
    assert!(matches!(err, SearchError::CostBoundExceeded { .. }), "{err:?}");
}

#[test]
fn two_tracked_states_find_a_similar_plan() {
    let l = common::load("delta", "problem.txt", "observations.obs");
    let goal = l.spec.goals.get(0);
    let r = plan_m_similar(&l.domain, &l.model, &l.spec.initial, goal, &config(2)).expect("plan at delta 2");
    assert_eq!(r.stats.delta, 2);
    assert_eq!(r.steps, ["a2", "a2", "a4", "a0"]);
    assert!(r.goal_reaching_chains.unwrap() >= 2);
    let report = verify_m_similar(
        &l.domain,
        &l.model,
        &l.spec.initial,
        goal,
        &r.plan,
        2,
        DistanceMeasure::Action,
        &Rational::new(1, 4),
        DEFAULT_BUDGET,
    )
    .unwrap();
    assert!(report.passed(), "{report:?}");
}
