//! The observer's sensor model: an ordered list of rules mapping
//! `(action, resulting state)` pairs to tokens, first match wins.
//!
//! Rule file grammar, one directive per line, `#` starts a comment:
//!
//! ```text
//! obs <token>
//! init-obs <token>
//! rule <token> action=<glob> [when <fluent>,<fluent>,...]
//! ```
//!
//! `*` in a glob matches any (possibly empty) run of characters. Rules are
//! tried in file order and `when` fluents are tested against the state the
//! action leads to.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::strips::{ActionId, FluentSet, GroundedAction, GroundedDomain, Plan, State, StripsError};

pub const PRETEND_PREFIX: &str = "pretend-";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObservationError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: token `{token}` is not declared with `obs`")]
    UnknownToken { line: usize, token: String },
    #[error("line {line}: token `{token}` declared twice")]
    DuplicateToken { line: usize, token: String },
    #[error("line {line}: unknown fluent `{fluent}`")]
    UnknownFluent { line: usize, fluent: String },
    #[error("no observation rule matches action `{action}` reaching {{{}}}", state.join(", "))]
    NoMatchingRule { action: String, state: Vec<String> },
    #[error("action `{0}` collides with the noop naming scheme")]
    NameCollision(String),
    #[error(transparent)]
    Strips(#[from] StripsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationToken {
    pub id: TokenId,
    pub name: String,
}

/// Glob over action names. Only `*` is special.
#[derive(Clone, PartialEq, Eq)]
pub struct ActionPattern(String);

impl ActionPattern {
    pub fn new(glob: impl Into<String>) -> Self {
        ActionPattern(glob.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn matches(&self, name: &str) -> bool {
        glob_match(self.0.as_bytes(), name.as_bytes())
    }
}

impl fmt::Debug for ActionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

fn glob_match(pat: &[u8], text: &[u8]) -> bool {
    let (mut p, mut t) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while t < text.len() {
        if p < pat.len() && pat[p] == b'*' {
            star = Some((p, t));
            p += 1;
        } else if p < pat.len() && pat[p] == text[t] {
            p += 1;
            t += 1;
        } else if let Some((sp, st)) = star {
            p = sp + 1;
            t = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    pat[p..].iter().all(|&c| c == b'*')
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRule {
    pub token: TokenId,
    pub pattern: ActionPattern,
    /// Tested against the resulting state.
    pub when: FluentSet,
}

/// `O: (A × S) → Ω` plus the initial observation.
///
/// The model is bound to one domain: for every action it caches the rules
/// whose pattern matches the action name, so `observe` only checks `when`
/// sets at run time.
#[derive(Debug, Clone)]
pub struct ObservationModel {
    alphabet: Vec<ObservationToken>,
    rules: Vec<ObservationRule>,
    initial: String,
    candidates: Vec<Vec<usize>>,
}

impl ObservationModel {
    pub fn new<C>(
        alphabet: Vec<String>,
        rules: Vec<ObservationRule>,
        initial: String,
        domain: &GroundedDomain<C>,
    ) -> Result<Self, ObservationError> {
        let mut seen = HashMap::new();
        let mut tokens = Vec::with_capacity(alphabet.len());
        for (i, name) in alphabet.into_iter().enumerate() {
            if seen.insert(name.clone(), i).is_some() {
                return Err(ObservationError::DuplicateToken { line: 0, token: name });
            }
            tokens.push(ObservationToken { id: TokenId(i as u32), name });
        }
        if let Some(r) = rules.iter().find(|r| r.token.0 as usize >= tokens.len()) {
            return Err(ObservationError::UnknownToken { line: 0, token: format!("#{}", r.token.0) });
        }
        let mut model = ObservationModel { alphabet: tokens, rules, initial, candidates: Vec::new() };
        model.bind(domain);
        Ok(model)
    }

    /// Recompute the per-action candidate rule lists for `domain`.
    pub fn bind<C>(&mut self, domain: &GroundedDomain<C>) {
        self.candidates = domain
            .actions()
            .iter()
            .map(|a| (0..self.rules.len()).filter(|&r| self.rules[r].pattern.matches(&a.name)).collect())
            .collect();
    }

    pub fn alphabet(&self) -> &[ObservationToken] {
        &self.alphabet
    }

    pub fn rules(&self) -> &[ObservationRule] {
        &self.rules
    }

    pub fn initial_token(&self) -> &str {
        &self.initial
    }

    pub fn token_name(&self, t: TokenId) -> &str {
        &self.alphabet[t.0 as usize].name
    }

    pub fn token_id(&self, name: &str) -> Option<TokenId> {
        self.alphabet.iter().find(|t| t.name == name).map(|t| t.id)
    }

    pub fn token_names(&self, trace: &[TokenId]) -> Vec<String> {
        trace.iter().map(|t| self.token_name(*t).to_string()).collect()
    }

    /// Token for `action` reaching `next`, or `None` if no rule matches.
    pub fn try_observe(&self, action: ActionId, next: &State) -> Option<TokenId> {
        self.candidates[action.index()]
            .iter()
            .map(|&r| &self.rules[r])
            .find(|r| r.when.is_subset(next))
            .map(|r| r.token)
    }

    pub fn observe<C>(
        &self,
        domain: &GroundedDomain<C>,
        action: ActionId,
        next: &State,
    ) -> Result<TokenId, ObservationError> {
        self.try_observe(action, next).ok_or_else(|| ObservationError::NoMatchingRule {
            action: domain.action(action).name.clone(),
            state: domain.state_names(next).into_iter().map(String::from).collect(),
        })
    }

    /// Unbound variant: matches by name, so it works for actions the model
    /// was not bound to.
    pub fn observe_action<C>(&self, action: &GroundedAction<C>, next: &State) -> Result<TokenId, ObservationError> {
        self.rules
            .iter()
            .find(|r| r.pattern.matches(&action.name) && r.when.is_subset(next))
            .map(|r| r.token)
            .ok_or_else(|| ObservationError::NoMatchingRule { action: action.name.clone(), state: Vec::new() })
    }
}

/// Tokens emitted by `plan` from `s0`, one per step.
pub fn trace<C>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
    s0: &State,
    plan: &Plan,
) -> Result<Vec<TokenId>, ObservationError> {
    let mut s = s0.clone();
    let mut out = Vec::with_capacity(plan.len());
    for (step, &id) in plan.steps.iter().enumerate() {
        let a = domain.action(id);
        if !a.applicable(&s) {
            return Err(StripsError::InapplicableAction { step, action: a.name.clone() }.into());
        }
        s = a.successor(&s);
        out.push(model.observe(domain, id, &s)?);
    }
    Ok(out)
}

pub fn parse_rules<C>(text: &str, domain: &GroundedDomain<C>) -> Result<ObservationModel, ObservationError> {
    let mut alphabet: Vec<String> = Vec::new();
    let mut index: HashMap<String, TokenId> = HashMap::new();
    let mut rules = Vec::new();
    let mut initial: Option<String> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let parse_err = |message: String| ObservationError::Parse { line, message };
        let (keyword, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let rest = rest.trim();
        match keyword {
            "obs" => {
                if rest.is_empty() || rest.contains(char::is_whitespace) {
                    return Err(parse_err("`obs` takes exactly one token name".into()));
                }
                if index.contains_key(rest) {
                    return Err(ObservationError::DuplicateToken { line, token: rest.to_string() });
                }
                index.insert(rest.to_string(), TokenId(alphabet.len() as u32));
                alphabet.push(rest.to_string());
            }
            "init-obs" => {
                if rest.is_empty() || rest.contains(char::is_whitespace) {
                    return Err(parse_err("`init-obs` takes exactly one token name".into()));
                }
                if initial.is_some() {
                    return Err(parse_err("`init-obs` given twice".into()));
                }
                initial = Some(rest.to_string());
            }
            "rule" => {
                let mut words = rest.split_whitespace();
                let token = words.next().ok_or_else(|| parse_err("`rule` needs a token".into()))?;
                let token_id = *index
                    .get(token)
                    .ok_or_else(|| ObservationError::UnknownToken { line, token: token.to_string() })?;
                let action = words
                    .next()
                    .and_then(|w| w.strip_prefix("action="))
                    .filter(|g| !g.is_empty())
                    .ok_or_else(|| parse_err("expected `action=<glob>`".into()))?;
                let mut when = domain.empty_set();
                match words.next() {
                    None => {}
                    Some("when") => {
                        let list: String = words.by_ref().collect::<Vec<_>>().join("");
                        if list.is_empty() {
                            return Err(parse_err("`when` needs at least one fluent".into()));
                        }
                        for name in list.split(',').map(str::trim) {
                            if name.is_empty() {
                                return Err(parse_err("empty fluent in `when` list".into()));
                            }
                            let f = domain
                                .fluent_id(name)
                                .ok_or_else(|| ObservationError::UnknownFluent { line, fluent: name.to_string() })?;
                            when.insert(f);
                        }
                    }
                    Some(other) => return Err(parse_err(format!("unexpected `{other}`"))),
                }
                if words.next().is_some() {
                    return Err(parse_err("trailing input after rule".into()));
                }
                rules.push(ObservationRule { token: token_id, pattern: ActionPattern::new(action), when });
            }
            other => return Err(parse_err(format!("unknown directive `{other}`"))),
        }
    }
    ObservationModel::new(alphabet, rules, initial.unwrap_or_else(|| "init".to_string()), domain)
}

/// Add one zero-effect `pretend-<token>` action per token, each pinned to its
/// token by a rule placed ahead of all existing rules.
pub fn compile_noops<C: Scalar>(
    domain: &GroundedDomain<C>,
    model: &ObservationModel,
) -> Result<(GroundedDomain<C>, ObservationModel), ObservationError> {
    if let Some(a) = domain.actions().iter().find(|a| a.name.starts_with(PRETEND_PREFIX)) {
        return Err(ObservationError::NameCollision(a.name.clone()));
    }
    let noops: Vec<GroundedAction<C>> = model
        .alphabet
        .iter()
        .map(|t| GroundedAction {
            name: format!("{PRETEND_PREFIX}{}", t.name),
            pre: domain.empty_set(),
            add: domain.empty_set(),
            del: domain.empty_set(),
            cost: C::one(),
        })
        .collect();
    let pinned: Vec<ObservationRule> = model
        .alphabet
        .iter()
        .map(|t| ObservationRule {
            token: t.id,
            pattern: ActionPattern::new(format!("{PRETEND_PREFIX}{}", t.name)),
            when: domain.empty_set(),
        })
        .collect();
    let extended = domain.clone().with_extra_actions(noops)?;
    let mut rules = pinned;
    rules.extend(model.rules.iter().cloned());
    let mut compiled = model.clone();
    compiled.rules = rules;
    compiled.bind(&extended);
    Ok((extended, compiled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strips::DomainBuilder;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn toy() -> GroundedDomain<Q> {
        DomainBuilder::new()
            .fluents(["p", "q"])
            .action("a1", &[], &["p"], &[])
            .action("a2", &[], &["q"], &[])
            .build()
            .unwrap()
    }

    #[test]
    fn glob_semantics() {
        let p = ActionPattern::new("pickup-*");
        assert!(p.matches("pickup-A"));
        assert!(p.matches("pickup-"));
        assert!(!p.matches("putdown-A"));
        assert!(ActionPattern::new("*").matches(""));
        assert!(ActionPattern::new("un*-A-*").matches("unstack-A-B"));
        assert!(!ActionPattern::new("un*-A-*").matches("unstack-B-A"));
        assert!(ActionPattern::new("a*b*c").matches("abbbc"));
        assert!(!ActionPattern::new("exact").matches("exactly"));
    }

    #[test]
    fn universal_rule_matches_everything() {
        let d = toy();
        let m = parse_rules("obs tick\nrule tick action=*\n", &d).unwrap();
        let s = d.fluent_set(["p"]).unwrap();
        for a in d.action_ids() {
            assert_eq!(m.token_name(m.observe(&d, a, &s).unwrap()), "tick");
        }
    }

    #[test]
    fn empty_rule_list_has_no_match() {
        let d = toy();
        let m = parse_rules("obs tick\n", &d).unwrap();
        let err = m.observe(&d, ActionId(0), &d.empty_set()).unwrap_err();
        assert!(matches!(err, ObservationError::NoMatchingRule { .. }));
    }

    #[test]
    fn first_match_wins_and_when_tests_next_state() {
        let d = toy();
        let text = "obs special\nobs plain\ninit-obs start\n# comment\nrule special action=a* when p, q\nrule plain action=*\n";
        let m = parse_rules(text, &d).unwrap();
        assert_eq!(m.initial_token(), "start");
        let pq = d.fluent_set(["p", "q"]).unwrap();
        let p = d.fluent_set(["p"]).unwrap();
        assert_eq!(m.token_name(m.observe(&d, ActionId(0), &pq).unwrap()), "special");
        assert_eq!(m.token_name(m.observe(&d, ActionId(0), &p).unwrap()), "plain");
    }

    #[test]
    fn parse_errors() {
        let d = toy();
        assert!(matches!(parse_rules("rule t action=*", &d), Err(ObservationError::UnknownToken { line: 1, .. })));
        assert!(matches!(parse_rules("obs t\nobs t", &d), Err(ObservationError::DuplicateToken { line: 2, .. })));
        assert!(matches!(
            parse_rules("obs t\nrule t action=* when zz", &d),
            Err(ObservationError::UnknownFluent { line: 2, .. })
        ));
        assert!(matches!(parse_rules("obs t\nrule t act=*", &d), Err(ObservationError::Parse { line: 2, .. })));
        assert!(matches!(parse_rules("bogus", &d), Err(ObservationError::Parse { line: 1, .. })));
    }

    #[test]
    fn noops_compile_to_pinned_zero_effect_actions() {
        let d = toy();
        let m = parse_rules("obs x\nobs y\nrule x action=*\n", &d).unwrap();
        let (d2, m2) = compile_noops(&d, &m).unwrap();
        assert_eq!(d2.actions().len(), 4);
        let s = d.fluent_set(["q"]).unwrap();
        for name in ["pretend-x", "pretend-y"] {
            let id = d2.action_id(name).unwrap();
            let a = d2.action(id);
            assert_eq!(a.apply(&s).unwrap(), s);
            assert_eq!(a.cost, Q::from_integer(1));
            assert_eq!(m2.token_name(m2.observe(&d2, id, &s).unwrap()), &name["pretend-".len()..]);
        }
        assert!(matches!(compile_noops(&d2, &m2), Err(ObservationError::NameCollision(_))));
    }

    #[test]
    fn noops_with_empty_alphabet_leave_domain_unchanged() {
        let d = toy();
        let m = parse_rules("", &d).unwrap();
        let (d2, m2) = compile_noops(&d, &m).unwrap();
        assert_eq!(d2.actions(), d.actions());
        assert!(m2.rules().is_empty());
    }

    #[test]
    fn trace_has_one_token_per_step() {
        let d = toy();
        let m = parse_rules("obs one\nobs two\nrule one action=a1\nrule two action=a2\n", &d).unwrap();
        let s0 = d.empty_set();
        assert!(trace(&d, &m, &s0, &Plan::default()).unwrap().is_empty());
        let plan = d.plan_from_names(["a2", "a1", "a1"]).unwrap();
        let t = trace(&d, &m, &s0, &plan).unwrap();
        assert_eq!(m.token_names(&t), ["two", "one", "one"]);
    }
}
