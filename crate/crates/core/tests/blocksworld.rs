mod common;

use covert_core::distances::DistanceMeasure;
use covert_core::observation::compile_noops;
use covert_core::oracle::{
    replay, shortest_plan_length, verify_j_legible, verify_k_ambiguous, verify_l_diverse, verify_m_similar, Verdict,
    DEFAULT_BUDGET,
};
use covert_core::search::{plan, plan_classical, Variant, VariantConfig};
use covert_core::strips::{execute, satisfies};
use covert_core::Rational;

use common::{load, plan_file, Loaded};

fn o1() -> Loaded {
    load("blocksworld", "problem-k3.txt", "o1.obs")
}

fn o2() -> Loaded {
    load("blocksworld", "problem-k3.txt", "o2.obs")
}

fn trace(l: &Loaded, rel: &str) -> Vec<String> {
    let p = plan_file(&l.domain, rel);
    let r = replay(&l.domain, &l.model, &l.spec.initial, &p, DEFAULT_BUDGET).unwrap();
    l.model.token_names(&r.tokens)
}

#[test]
fn fd_plan_is_optimal_and_found_by_classical_search() {
    let l = o1();
    let goal = l.spec.goals.get(0);
    let fd = plan_file(&l.domain, "blocksworld/plans/fd.plan");
    assert!(satisfies(&execute(&l.domain, &l.spec.initial, &fd).unwrap(), goal));
    assert_eq!(shortest_plan_length(&l.domain, &l.spec.initial, goal, DEFAULT_BUDGET).unwrap(), Some(6));
    let r =
        plan_classical(&l.domain, &l.model, &l.spec.initial, goal, &VariantConfig::new(Variant::KAmbiguous)).unwrap();
    assert!(r.plan.len() <= 6);
    assert!(satisfies(&execute(&l.domain, &l.spec.initial, &r.plan).unwrap(), goal));
}

#[test]
fn reference_traces_reproduce_under_both_models() {
    assert_eq!(
        trace(&o1(), "blocksworld/plans/fd.plan"),
        ["unstack", "putdown", "unstack", "putdown", "unstack", "stack"]
    );
    assert_eq!(
        trace(&o1(), "blocksworld/plans/jleg.plan"),
        ["unstack", "putdown", "unstack", "putdown", "pickup", "stack", "unstack", "stack"]
    );
    assert_eq!(
        trace(&o2(), "blocksworld/plans/msim-o2.plan"),
        ["unstack-B", "putdown-B", "unstack-C", "putdown-C", "unstack-A", "putdown-A", "pickup-A", "stack-A"]
    );
}

#[test]
fn reference_k_ambiguous_plan_passes_under_o1() {
    let l = o1();
    let p = plan_file(&l.domain, "blocksworld/plans/kamb-o1.plan");
    let r = verify_k_ambiguous(&l.domain, &l.model, &l.spec.initial, &l.spec.goals, &p, 3, DEFAULT_BUDGET).unwrap();
    assert!(r.passed(), "{r:?}");
    assert_eq!(r.satisfied_goal_indices, [0, 1, 2]);
}

#[test]
fn reference_k_ambiguous_o2_plan_misses_a_decoy() {
    let l = o2();
    let p = plan_file(&l.domain, "blocksworld/plans/kamb-o2.plan");
    let r = verify_k_ambiguous(&l.domain, &l.model, &l.spec.initial, &l.spec.goals, &p, 3, DEFAULT_BUDGET).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(r.satisfied_goal_indices, [0, 1]);
}

#[test]
fn fd_plan_is_not_3_ambiguous_under_o2() {
    let l = o2();
    let p = plan_file(&l.domain, "blocksworld/plans/fd.plan");
    let r = verify_k_ambiguous(&l.domain, &l.model, &l.spec.initial, &l.spec.goals, &p, 3, DEFAULT_BUDGET).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
}

#[test]
fn reference_j_legible_plan_rules_out_on_d_c() {
    let l = o1();
    let p = plan_file(&l.domain, "blocksworld/plans/jleg.plan");
    let r = verify_j_legible(&l.domain, &l.model, &l.spec.initial, &l.spec.goals, &p, 2, DEFAULT_BUDGET).unwrap();
    assert!(r.passed(), "{r:?}");
    assert_eq!(r.absent_goal_indices, [2]);
}

#[test]
fn reference_l_diverse_plan_passes() {
    let l = o1();
    let p = plan_file(&l.domain, "blocksworld/plans/ldiv.plan");
    let d = Rational::new(1, 4);
    let r = verify_l_diverse(
        &l.domain,
        &l.model,
        &l.spec.initial,
        l.spec.goals.get(0),
        &p,
        2,
        DistanceMeasure::Action,
        &d,
        DEFAULT_BUDGET,
    )
    .unwrap();
    assert!(r.passed(), "{r:?}");
    assert_eq!(r.achieved_distance.as_deref(), Some("1/3"));
}

#[test]
fn reference_m_similar_o1_plan_has_one_goal_reaching_chain() {
    let l = o1();
    let p = plan_file(&l.domain, "blocksworld/plans/fd.plan");
    let d = Rational::new(1, 2);
    let r = verify_m_similar(
        &l.domain,
        &l.model,
        &l.spec.initial,
        l.spec.goals.get(0),
        &p,
        3,
        DistanceMeasure::Action,
        &d,
        DEFAULT_BUDGET,
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(r.goal_reaching_chains, Some(1));
}

fn search(l: &Loaded, config: VariantConfig<Rational>) -> covert_core::search::SearchResult<Rational> {
    plan(&l.domain, &l.model, &l.spec.initial, &l.spec.goals, &config).unwrap()
}

#[test]
fn k_ambiguous_search_under_o1() {
    let l = o1();
    let r = search(&l, VariantConfig { k: 3, ..VariantConfig::new(Variant::KAmbiguous) });
    let v =
        verify_k_ambiguous(&l.domain, &l.model, &l.spec.initial, &l.spec.goals, &r.plan, 3, DEFAULT_BUDGET).unwrap();
    assert!(v.passed(), "{v:?}");
    assert_eq!(v.satisfied_goal_indices, [0, 1, 2]);
}

#[test]
fn j_legible_search_under_o1() {
    let l = load("blocksworld", "problem-j2.txt", "o1.obs");
    let r = search(&l, VariantConfig { j: 2, ..VariantConfig::new(Variant::JLegible) });
    let v = verify_j_legible(&l.domain, &l.model, &l.spec.initial, &l.spec.goals, &r.plan, 2, DEFAULT_BUDGET).unwrap();
    assert!(v.passed(), "{v:?}");
    assert!(v.absent_goal_indices.contains(&2));
}

#[test]
fn l_diverse_search_under_o1() {
    let l = load("blocksworld", "problem-l2.txt", "o1.obs");
    let d = Rational::new(1, 4);
    let r = search(&l, VariantConfig { l: 2, d, ..VariantConfig::new(Variant::LDiverse) });
    let goal = l.spec.goals.get(0);
    let v = verify_l_diverse(
        &l.domain,
        &l.model,
        &l.spec.initial,
        goal,
        &r.plan,
        2,
        DistanceMeasure::Action,
        &d,
        DEFAULT_BUDGET,
    )
    .unwrap();
    assert!(v.passed(), "{v:?}");
}

#[test]
fn m_similar_search_under_o1() {
    let l = load("blocksworld", "problem-m3.txt", "o1.obs");
    let d = Rational::new(1, 2);
    let r = search(&l, VariantConfig { m: 3, d, ..VariantConfig::new(Variant::MSimilar) });
    let goal = l.spec.goals.get(0);
    let v = verify_m_similar(
        &l.domain,
        &l.model,
        &l.spec.initial,
        goal,
        &r.plan,
        3,
        DistanceMeasure::Action,
        &d,
        DEFAULT_BUDGET,
    )
    .unwrap();
    assert!(v.passed(), "{v:?}");
    assert_eq!(v.achieved_distance, r.achieved_distance.map(|x| x.to_string()));
}

#[test]
fn k_ambiguous_traces_differ_between_models() {
    let config = VariantConfig { k: 3, noops: true, ..VariantConfig::new(Variant::KAmbiguous) };
    let a = o1();
    let b = o2();
    let ra = search(&a, config.clone());
    let rb = search(&b, config);
    assert_ne!(ra.trace_names, rb.trace_names);
    let (domain, model) = compile_noops(&b.domain, &b.model).unwrap();
    let v = verify_k_ambiguous(&domain, &model, &b.spec.initial, &b.spec.goals, &rb.plan, 3, DEFAULT_BUDGET).unwrap();
    assert!(v.passed(), "{v:?}");
}
