//! Random small planning instances for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::observation::{ActionPattern, ObservationModel, ObservationRule, TokenId};
use crate::scalar::Scalar;
use crate::strips::{FluentId, FluentSet, GoalCondition, GroundedAction, GroundedDomain, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorParams {
    pub max_fluents: usize,
    pub max_actions: usize,
    pub max_tokens: usize,
    pub goals: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams { max_fluents: 10, max_actions: 8, max_tokens: 3, goals: 3 }
    }
}

#[derive(Debug, Clone)]
pub struct RandomInstance<C> {
    pub domain: GroundedDomain<C>,
    pub model: ObservationModel,
    pub s0: State,
    /// Distinct non-empty goals of one or two fluents.
    pub goals: Vec<GoalCondition>,
}

fn random_subset<R: Rng>(rng: &mut R, universe: usize, pool: &[FluentId], max: usize) -> FluentSet {
    let n = rng.gen_range(0..=max.min(pool.len()));
    FluentSet::from_ids(universe, pool.choose_multiple(rng, n).copied())
}

/// A domain with at most `max_fluents` fluents and `max_actions` unit-cost
/// actions, and a many-to-one observation model over at most `max_tokens`
/// tokens. Some actions get a `when` rule keyed on their result state, and a
/// final `*` rule keeps the model total.
pub fn random_instance<C: Scalar, R: Rng>(rng: &mut R, params: GeneratorParams) -> RandomInstance<C> {
    let nf = rng.gen_range(3..=params.max_fluents.max(3));
    let na = rng.gen_range(2..=params.max_actions.max(2));
    let fluents: Vec<FluentId> = (0..nf as u32).map(FluentId).collect();
    let names: Vec<String> = (0..nf).map(|i| format!("f{i}")).collect();

    let mut actions = Vec::with_capacity(na);
    for i in 0..na {
        let pre = random_subset(rng, nf, &fluents, 2);
        let mut add = random_subset(rng, nf, &fluents, 2);
        if add.is_empty() {
            add.insert(*fluents.choose(rng).expect("at least three fluents"));
        }
        let rest: Vec<FluentId> = fluents.iter().copied().filter(|f| !add.contains(*f)).collect();
        let del = random_subset(rng, nf, &rest, 2);
        actions.push(GroundedAction { name: format!("a{i}"), pre, add, del, cost: C::one() });
    }
    let s0 = random_subset(rng, nf, &fluents, nf / 2 + 1);
    let domain = GroundedDomain::new(names, actions, s0.clone()).expect("generated domain is well formed");

    let nt = rng.gen_range(1..=params.max_tokens.max(1).min(na));
    let alphabet: Vec<String> = (0..nt).map(|t| format!("t{t}")).collect();
    let mut conditional = Vec::new();
    let mut plain = Vec::new();
    for a in domain.actions() {
        let token = TokenId(rng.gen_range(0..nt) as u32);
        if rng.gen_bool(0.25) {
            let f = *a.add.iter().collect::<Vec<_>>().choose(rng).expect("actions add something");
            conditional.push(ObservationRule {
                token: TokenId(rng.gen_range(0..nt) as u32),
                pattern: ActionPattern::new(a.name.clone()),
                when: FluentSet::from_ids(nf, [f]),
            });
        }
        plain.push(ObservationRule { token, pattern: ActionPattern::new(a.name.clone()), when: domain.empty_set() });
    }
    let mut rules = conditional;
    rules.append(&mut plain);
    rules.push(ObservationRule { token: TokenId(0), pattern: ActionPattern::new("*"), when: domain.empty_set() });
    let model = ObservationModel::new(alphabet, rules, "init".into(), &domain).expect("generated model is well formed");

    let mut goals: Vec<GoalCondition> = Vec::new();
    let mut attempts = 0;
    while goals.len() < params.goals && attempts < 100 {
        attempts += 1;
        let size = rng.gen_range(1..=2);
        let g = FluentSet::from_ids(nf, fluents.choose_multiple(rng, size).copied());
        let g = GoalCondition::new(g).expect("non-empty");
        if !goals.contains(&g) {
            goals.push(g);
        }
    }
    RandomInstance { domain, model, s0, goals }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn respects_size_limits_and_is_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let inst: RandomInstance<Ratio<i64>> = random_instance(&mut rng, GeneratorParams::default());
            assert!(inst.domain.num_fluents() <= 10);
            assert!(inst.domain.actions().len() <= 8);
            assert!(inst.model.alphabet().len() <= 3);
            for a in inst.domain.action_ids() {
                assert!(inst.model.try_observe(a, &inst.s0).is_some());
            }
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a: RandomInstance<f64> = random_instance(&mut ChaCha8Rng::seed_from_u64(3), GeneratorParams::default());
        let b: RandomInstance<f64> = random_instance(&mut ChaCha8Rng::seed_from_u64(3), GeneratorParams::default());
        assert_eq!(a.s0, b.s0);
        assert_eq!(a.goals, b.goals);
        assert_eq!(a.domain.actions(), b.domain.actions());
    }
}
