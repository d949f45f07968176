//! Plan records and the canonical JSON serialization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ModelIoError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRecord {
    pub steps: Vec<String>,
    pub trace: Vec<String>,
    pub variant: String,
    pub achieved_goal_indices: Vec<usize>,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
}

/// Pretty JSON with object keys sorted at every depth and a trailing newline.
pub fn emit_canonical<T: Serialize>(value: &T) -> String {
    // serde_json's default map is ordered, so routing through `Value` sorts keys.
    let v = serde_json::to_value(value).expect("records serialize to plain JSON");
    let mut out = serde_json::to_string_pretty(&v).expect("Value always serializes");
    out.push('\n');
    out
}

pub fn emit_plan_record(r: &PlanRecord) -> String {
    emit_canonical(r)
}

pub fn parse_plan_record(text: &str) -> Result<PlanRecord, ModelIoError> {
    let r: PlanRecord = serde_json::from_str(text).map_err(|e| ModelIoError::Record(e.to_string()))?;
    if r.trace.len() != r.steps.len() {
        return Err(ModelIoError::Record(format!(
            "trace has {} tokens but the plan has {} steps",
            r.trace.len(),
            r.steps.len()
        )));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_record() {
        let text = emit_plan_record(&PlanRecord::default());
        assert!(text.contains("\"steps\": []"));
        assert_eq!(parse_plan_record(&text).unwrap(), PlanRecord::default());
    }

    #[test]
    fn keys_are_sorted_and_output_is_stable() {
        let mut r = PlanRecord { variant: "kamb".into(), ..Default::default() };
        r.metrics.insert("plan_length".into(), 0.0);
        r.metrics.insert("expansions".into(), 12.0);
        let a = emit_plan_record(&r);
        assert_eq!(a, emit_plan_record(&r.clone()));
        let keys: Vec<usize> = ["achieved_goal_indices", "metrics", "steps", "trace", "variant"]
            .iter()
            .map(|k| a.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert!(a.find("expansions").unwrap() < a.find("plan_length").unwrap());
    }

    #[test]
    fn mismatched_trace_is_rejected() {
        let text = r#"{"steps": ["a"], "trace": [], "variant": "kamb", "achieved_goal_indices": []}"#;
        assert!(matches!(parse_plan_record(text), Err(ModelIoError::Record(_))));
        assert!(matches!(parse_plan_record("{"), Err(ModelIoError::Record(_))));
    }
}
