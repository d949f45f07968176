use std::process::ExitCode;

use anyhow::{bail, Result};
use covert_core::io::emit_canonical;
use covert_core::oracle::{
    replay, settle, verify_j_legible, verify_k_ambiguous, verify_l_diverse, verify_m_similar, OracleError, Property,
    Report, Verdict,
};
use covert_core::search::Variant;

use crate::args::VerifyArgs;
use crate::load::{config, load_model, needs_noops, parameter, pick_variant, read_plan};
use crate::{EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_OK};

fn property(v: Variant) -> Property {
    match v {
        Variant::KAmbiguous => Property::KAmbiguous,
        Variant::JLegible => Property::JLegible,
        Variant::LDiverse => Property::LDiverse,
        Variant::MSimilar => Property::MSimilar,
    }
}

pub fn run(args: VerifyArgs) -> Result<ExitCode> {
    let record = read_plan(&args.plan)?;
    let mut loaded = load_model(&args.model)?;
    if args.model.noops || needs_noops(&record) {
        loaded = loaded.with_noops()?;
    }
    let variant = pick_variant(args.params.variant, &loaded.spec, Some(&record.variant))?;
    let c = config(variant, &args.params, &loaded.spec);
    c.validate(loaded.spec.num_goals())?;
    let plan = loaded.resolve_plan(&record.steps)?;
    let (d, m, s0, goals) = (&loaded.domain, &loaded.model, &loaded.spec.initial, &loaded.spec.goals);
    let param = parameter(&c);
    let prop = property(variant);

    if !record.trace.is_empty() {
        if let Ok(r) = replay(d, m, s0, &plan, args.budget) {
            let names = m.token_names(&r.tokens);
            if names != record.trace {
                eprintln!("warning: the record's trace differs from the trace under this model; verifying the steps");
            }
        }
    }
    let result = match variant {
        Variant::KAmbiguous => verify_k_ambiguous(d, m, s0, goals, &plan, param, args.budget),
        Variant::JLegible => verify_j_legible(d, m, s0, goals, &plan, param, args.budget),
        Variant::LDiverse => verify_l_diverse(d, m, s0, goals.get(0), &plan, param, c.distance, &c.d, args.budget),
        Variant::MSimilar => verify_m_similar(d, m, s0, goals.get(0), &plan, param, c.distance, &c.d, args.budget),
    };
    let report = match settle(prop, param, result) {
        Ok(r) => r,
        Err(OracleError::Strips(e)) => Report::failed(prop, param, format!("plan is not executable: {e}")),
        Err(e) => bail!(e),
    };
    print!("{}", emit_canonical(&report));
    Ok(ExitCode::from(match report.verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }))
}
