use covert_core::belief::{belief_plan_set, belief_sequence, DEFAULT_BPS_CAP};
use covert_core::generate::{random_instance, GeneratorParams, RandomInstance};
use covert_core::observation::trace;
use covert_core::strips::{state_sequence, ActionId, Plan};
use covert_core::Rational;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance_and_walk(seed: u64, len: usize) -> (RandomInstance<Rational>, Plan) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst: RandomInstance<Rational> = random_instance(&mut rng, GeneratorParams::default());
    let mut s = inst.s0.clone();
    let mut steps = Vec::new();
    for _ in 0..len {
        let options: Vec<ActionId> = inst.domain.applicable_in(&s).collect();
        let Some(&a) = options.choose(&mut rng) else { break };
        s = inst.domain.action(a).successor(&s);
        steps.push(a);
    }
    (inst, Plan::new(steps))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn true_state_is_always_believed(seed in any::<u64>(), len in 0usize..8) {
        let (inst, plan) = instance_and_walk(seed, len);
        let states = state_sequence(&inst.domain, &inst.s0, &plan).unwrap();
        let seq = belief_sequence(&inst.domain, &inst.model, &inst.s0, &plan).unwrap();
        prop_assert_eq!(seq.beliefs.len(), states.len());
        for (b, s) in seq.beliefs.iter().zip(&states) {
            prop_assert!(b.contains(s));
        }
    }

    #[test]
    fn plan_set_chains_are_executable_and_emit_the_trace(seed in any::<u64>(), len in 0usize..6) {
        let (inst, plan) = instance_and_walk(seed, len);
        let tokens = trace(&inst.domain, &inst.model, &inst.s0, &plan).unwrap();
        let seq = belief_sequence(&inst.domain, &inst.model, &inst.s0, &plan).unwrap();
        let bps = belief_plan_set(&inst.domain, &inst.model, &inst.s0, &plan, DEFAULT_BPS_CAP).unwrap();
        prop_assert_eq!(&bps.chains[0].actions, &plan.steps);
        for chain in &bps.chains {
            let p = chain.plan();
            prop_assert_eq!(&state_sequence(&inst.domain, &inst.s0, &p).unwrap(), &chain.states);
            prop_assert_eq!(&trace(&inst.domain, &inst.model, &inst.s0, &p).unwrap(), &tokens);
            for (b, s) in seq.beliefs.iter().zip(&chain.states) {
                prop_assert!(b.contains(s));
            }
        }
    }
}
