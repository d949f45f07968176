//! Grounded STRIPS subset of PDDL with action costs.
//!
//! Every predicate is a zero-arity ground atom and every action has an empty
//! parameter list. Negation in preconditions, quantifiers, disjunction and
//! conditional effects are rejected.

use std::collections::HashMap;

use super::ModelIoError;
use crate::scalar::{from_exact, parse_decimal, Scalar};
use crate::strips::{FluentSet, GroundedAction, GroundedDomain, StripsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }

    /// Keyword at the head of a list, lowercased.
    fn head(&self) -> Option<String> {
        self.list().and_then(|l| l.first()).and_then(Sexp::atom).map(str::to_ascii_lowercase)
    }
}

fn parse_err(pos: Pos, message: impl Into<String>) -> ModelIoError {
    ModelIoError::Parse { line: pos.line, column: pos.column, message: message.into() }
}

fn unsupported(pos: Pos, feature: impl Into<String>) -> ModelIoError {
    ModelIoError::UnsupportedFeature { line: pos.line, column: pos.column, feature: feature.into() }
}

fn read_sexps(text: &str) -> Result<Vec<Sexp>, ModelIoError> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = vec![(Vec::new(), Pos { line: 1, column: 1 })];
    let mut line = 1;
    let mut column = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let here = Pos { line, column };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                column += 1;
                stack.push((Vec::new(), here));
            }
            ')' => {
                chars.next();
                column += 1;
                if stack.len() == 1 {
                    return Err(parse_err(here, "unbalanced `)`"));
                }
                let (items, open) = stack.pop().expect("checked depth");
                stack.last_mut().expect("root frame").0.push(Sexp::List(items, open));
            }
            _ => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    word.push(c);
                    chars.next();
                    column += 1;
                }
                stack.last_mut().expect("root frame").0.push(Sexp::Atom(word, here));
            }
        }
    }
    if stack.len() != 1 {
        let (_, open) = stack.pop().expect("non-root frame");
        return Err(parse_err(open, "unclosed `(`"));
    }
    Ok(stack.pop().expect("root frame").0)
}

struct Fluents {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Fluents {
    fn lookup(&self, name: &str, pos: Pos) -> Result<usize, ModelIoError> {
        self.index.get(name).copied().ok_or_else(|| parse_err(pos, format!("undeclared predicate `{name}`")))
    }
}

/// A ground atom `(name)`, or a construct this fragment does not support.
fn ground_atom<'a>(e: &'a Sexp, ctx: &str) -> Result<&'a str, ModelIoError> {
    let items = e.list().ok_or_else(|| parse_err(e.pos(), format!("expected ({ctx} atom)")))?;
    let name = items.first().and_then(Sexp::atom).ok_or_else(|| parse_err(e.pos(), "expected an atom name"))?;
    match name.to_ascii_lowercase().as_str() {
        "not" => return Err(unsupported(e.pos(), format!("negative {ctx}"))),
        "or" | "imply" | "exists" | "forall" | "when" | "=" => {
            return Err(unsupported(e.pos(), format!("`{name}` in {ctx}")))
        }
        _ => {}
    }
    if items.len() > 1 {
        if items[1..].iter().any(|a| a.atom().is_some_and(|s| s.starts_with('?'))) {
            return Err(unsupported(e.pos(), "lifted atom"));
        }
        return Err(unsupported(e.pos(), "atom with arguments; expected grounded names such as (on-A-B)"));
    }
    Ok(name)
}

/// Body of `(and …)` or a single condition.
fn conjuncts(e: &Sexp) -> Result<&[Sexp], ModelIoError> {
    match e.head().as_deref() {
        Some("and") => Ok(&e.list().expect("head implies list")[1..]),
        _ => match e {
            Sexp::List(items, _) if items.is_empty() => Ok(&[]),
            _ => Ok(std::slice::from_ref(e)),
        },
    }
}

fn parse_action<C: Scalar>(items: &[Sexp], pos: Pos, fluents: &Fluents) -> Result<GroundedAction<C>, ModelIoError> {
    let name = items.get(1).and_then(Sexp::atom).ok_or_else(|| parse_err(pos, "action needs a name"))?;
    let universe = fluents.names.len();
    let mut pre = FluentSet::empty(universe);
    let mut add = FluentSet::empty(universe);
    let mut del = FluentSet::empty(universe);
    let mut cost: Option<C> = None;
    let mut saw_effect = false;

    let mut rest = items[2..].iter();
    while let Some(key) = rest.next() {
        let kw = key.atom().ok_or_else(|| parse_err(key.pos(), "expected an action keyword"))?.to_ascii_lowercase();
        let value = rest.next().ok_or_else(|| parse_err(key.pos(), format!("`{kw}` needs a value")))?;
        match kw.as_str() {
            ":parameters" => {
                let params = value.list().ok_or_else(|| parse_err(value.pos(), "expected a parameter list"))?;
                if !params.is_empty() {
                    return Err(unsupported(value.pos(), "action parameters (input must be grounded)"));
                }
            }
            ":precondition" => {
                for c in conjuncts(value)? {
                    let atom = ground_atom(c, "precondition")?;
                    pre.insert(crate::strips::FluentId(fluents.lookup(atom, c.pos())? as u32));
                }
            }
            ":effect" => {
                saw_effect = true;
                let effects = conjuncts(value)?;
                if effects.is_empty() {
                    return Err(parse_err(value.pos(), "empty effect"));
                }
                for eff in effects {
                    match eff.head().as_deref() {
                        Some("not") => {
                            let inner = eff.list().expect("list")[1..]
                                .first()
                                .ok_or_else(|| parse_err(eff.pos(), "`not` needs an atom"))?;
                            let atom = ground_atom(inner, "effect")?;
                            del.insert(crate::strips::FluentId(fluents.lookup(atom, inner.pos())? as u32));
                        }
                        Some("increase") => {
                            let parts = eff.list().expect("list");
                            let target = parts.get(1).and_then(Sexp::head);
                            if parts.len() != 3 || target.as_deref() != Some("total-cost") {
                                return Err(unsupported(eff.pos(), "numeric effect other than total-cost"));
                            }
                            let amount = parts[2]
                                .atom()
                                .and_then(parse_decimal)
                                .ok_or_else(|| parse_err(parts[2].pos(), "cost must be a decimal number"))?;
                            if cost.is_some() {
                                return Err(parse_err(eff.pos(), "cost increased twice"));
                            }
                            if amount < num_rational::Ratio::from_integer(0) {
                                return Err(parse_err(parts[2].pos(), "negative action cost"));
                            }
                            cost = Some(from_exact(&amount));
                        }
                        Some("forall") | Some("when") | Some("decrease") | Some("assign") | Some("scale-up")
                        | Some("scale-down") => {
                            return Err(unsupported(eff.pos(), format!("`{}` effect", eff.head().unwrap_or_default())))
                        }
                        _ => {
                            let atom = ground_atom(eff, "effect")?;
                            add.insert(crate::strips::FluentId(fluents.lookup(atom, eff.pos())? as u32));
                        }
                    }
                }
            }
            other => return Err(unsupported(key.pos(), format!("action keyword `{other}`"))),
        }
    }
    if !saw_effect {
        return Err(parse_err(pos, format!("action `{name}` has no :effect")));
    }
    if add.intersects(&del) {
        return Err(parse_err(pos, format!("action `{name}` adds and deletes the same fluent")));
    }
    Ok(GroundedAction { name: name.to_string(), pre, add, del, cost: cost.unwrap_or_else(C::one) })
}

/// Parse a grounded domain. The initial state is empty; problem files supply it.
pub fn parse_domain<C: Scalar>(text: &str) -> Result<GroundedDomain<C>, ModelIoError> {
    let top = read_sexps(text)?;
    let define = match top.as_slice() {
        [one] if one.head().as_deref() == Some("define") => one,
        [] => return Err(parse_err(Pos { line: 1, column: 1 }, "empty input")),
        [first, ..] => return Err(parse_err(first.pos(), "expected a single (define (domain …) …) form")),
    };
    let sections = &define.list().expect("define is a list")[1..];
    let mut fluents = Fluents { names: Vec::new(), index: HashMap::new() };
    let mut actions: Vec<GroundedAction<C>> = Vec::new();
    let mut seen_actions: HashMap<String, Pos> = HashMap::new();

    let header = sections.first().ok_or_else(|| parse_err(define.pos(), "missing (domain <name>)"))?;
    if header.head().as_deref() != Some("domain") {
        return Err(parse_err(header.pos(), "expected (domain <name>)"));
    }
    let name = match header.list() {
        Some([_, n]) => {
            n.atom().map(str::to_string).ok_or_else(|| parse_err(header.pos(), "expected (domain <name>)"))?
        }
        _ => return Err(parse_err(header.pos(), "expected (domain <name>)")),
    };

    for sec in &sections[1..] {
        let items = sec.list().ok_or_else(|| parse_err(sec.pos(), "expected a section"))?;
        match sec.head().as_deref() {
            Some(":requirements") => {}
            Some(":predicates") => {
                for p in &items[1..] {
                    let name = ground_atom(p, "predicate")?;
                    if fluents.index.contains_key(name) {
                        return Err(parse_err(p.pos(), format!("predicate `{name}` declared twice")));
                    }
                    fluents.index.insert(name.to_string(), fluents.names.len());
                    fluents.names.push(name.to_string());
                }
            }
            Some(":functions") => {
                for f in &items[1..] {
                    if f.head().as_deref() != Some("total-cost") {
                        return Err(unsupported(f.pos(), "numeric fluents other than total-cost"));
                    }
                }
            }
            Some(":action") => {
                let action = parse_action::<C>(items, sec.pos(), &fluents)?;
                if seen_actions.insert(action.name.clone(), sec.pos()).is_some() {
                    return Err(ModelIoError::DuplicateAction(action.name));
                }
                actions.push(action);
            }
            Some(other) => return Err(unsupported(sec.pos(), format!("section `{other}`"))),
            None => return Err(parse_err(sec.pos(), "expected a section keyword")),
        }
    }
    let initial = FluentSet::empty(fluents.names.len());
    GroundedDomain::new(fluents.names, actions, initial).map(|d| d.with_name(name)).map_err(|e| match e {
        StripsError::DuplicateAction(n) => ModelIoError::DuplicateAction(n),
        other => ModelIoError::Strips(other),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    const COOKING: &str = r#"
; obfuscating actions grounded over sugar / container1 / table1
(define (domain cooking)
  (:requirements :strips :action-costs)
  (:predicates (in-sugar-container1) (not-obfuscated-container1) (human-inattentive)
               (handempty) (on-container1-table1) (accessible-table1)
               (holding-container1) (obfuscated-container1))
  (:functions (total-cost))
  (:action ask-human-to-stir-sugar-container1
    :parameters ()
    :precondition (and (in-sugar-container1) (not-obfuscated-container1))
    :effect (and (human-inattentive) (increase (total-cost) 1)))
  (:action pickup-container-obfuscated-sugar-container1-table1
    :parameters ()
    :precondition (and (in-sugar-container1) (handempty) (on-container1-table1)
                       (accessible-table1) (human-inattentive))
    :effect (and (not (handempty)) (holding-container1) (not (on-container1-table1))
                 (obfuscated-container1) (not (not-obfuscated-container1))
                 (increase (total-cost) 1))))
"#;

    #[test]
    fn cooking_actions_parse() {
        let d: GroundedDomain<Q> = parse_domain(COOKING).unwrap();
        assert_eq!(d.name(), "cooking");
        assert_eq!(d.actions().len(), 2);
        assert!(d.actions().iter().all(|a| a.cost == Q::from_integer(1)));
        let pick = d.action(d.action_id("pickup-container-obfuscated-sugar-container1-table1").unwrap());
        assert_eq!(pick.pre.len(), 5);
        assert_eq!(pick.add.len(), 2);
        assert_eq!(pick.del.len(), 3);
    }

    #[test]
    fn costs_default_to_one_and_keep_fractions() {
        let text = "(define (domain t) (:predicates (p) (q))
            (:action a :parameters () :precondition (p) :effect (q))
            (:action b :parameters () :precondition (and) :effect (and (p) (increase (total-cost) 0.5))))";
        let d: GroundedDomain<Q> = parse_domain(text).unwrap();
        assert_eq!(d.action(d.action_id("a").unwrap()).cost, Q::from_integer(1));
        assert_eq!(d.action(d.action_id("b").unwrap()).cost, Q::new(1, 2));
        let f: GroundedDomain<f64> = parse_domain(text).unwrap();
        assert_eq!(f.action(f.action_id("b").unwrap()).cost, 0.5);
    }

    #[test]
    fn empty_effect_is_a_parse_error() {
        let text = "(define (domain t) (:predicates (p))\n(:action a :parameters () :precondition (p) :effect (and)))";
        match parse_domain::<Q>(text) {
            Err(ModelIoError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_precondition_is_unsupported() {
        let text = "(define (domain t) (:predicates (p) (q))
            (:action a :parameters () :precondition (and (not (p))) :effect (q)))";
        assert!(matches!(parse_domain::<Q>(text), Err(ModelIoError::UnsupportedFeature { .. })));
    }

    #[test]
    fn other_rejections() {
        let dup = "(define (domain t) (:predicates (p))
            (:action a :parameters () :precondition (p) :effect (p))
            (:action a :parameters () :precondition (p) :effect (p)))";
        assert_eq!(parse_domain::<Q>(dup).unwrap_err(), ModelIoError::DuplicateAction("a".into()));
        let lifted = "(define (domain t) (:predicates (on ?x ?y)))";
        assert!(matches!(parse_domain::<Q>(lifted), Err(ModelIoError::UnsupportedFeature { .. })));
        let params = "(define (domain t) (:predicates (p)) (:action a :parameters (?x) :effect (p)))";
        assert!(matches!(parse_domain::<Q>(params), Err(ModelIoError::UnsupportedFeature { .. })));
        let cond = "(define (domain t) (:predicates (p)) (:action a :parameters () :effect (when (p) (p))))";
        assert!(matches!(parse_domain::<Q>(cond), Err(ModelIoError::UnsupportedFeature { .. })));
        let undeclared = "(define (domain t) (:predicates (p)) (:action a :parameters () :effect (q)))";
        assert!(matches!(parse_domain::<Q>(undeclared), Err(ModelIoError::Parse { .. })));
        let unbalanced = "(define (domain t) (:predicates (p))";
        assert!(matches!(parse_domain::<Q>(unbalanced), Err(ModelIoError::Parse { line: 1, column: 1, .. })));
        assert!(matches!(parse_domain::<Q>(""), Err(ModelIoError::Parse { .. })));
    }
}
