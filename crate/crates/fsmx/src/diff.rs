//! Behavioral comparison of two machines: states are matched by valuation,
//! transitions by endpoints, method, and guard equivalence. Intended for
//! catching breaking API changes between two implementation versions.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::fsm::{Fsm, Transition};

#[derive(Debug, Error)]
pub enum DiffError {
    #[error("models are incomparable: their alphabets share no method")]
    IncomparableModels,
}

/// One side of a transition difference, in display form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionDiff {
    pub from: BTreeMap<String, bool>,
    pub method: String,
    pub guard: String,
    pub to: BTreeMap<String, bool>,
}

impl TransitionDiff {
    fn of(t: &Transition) -> TransitionDiff {
        TransitionDiff {
            from: display_valuation(t),
            method: t.method.clone(),
            guard: t.guard.render(),
            to: t
                .to
                .valuation()
                .iter()
                .map(|(p, v)| (p.to_string(), *v))
                .collect(),
        }
    }
}

fn display_valuation(t: &Transition) -> BTreeMap<String, bool> {
    t.from
        .valuation()
        .iter()
        .map(|(p, v)| (p.to_string(), *v))
        .collect()
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct DiffReport {
    pub alphabet_only_in_a: Vec<String>,
    pub alphabet_only_in_b: Vec<String>,
    pub predicates_only_in_a: Vec<String>,
    pub predicates_only_in_b: Vec<String>,
    pub states_only_in_a: Vec<BTreeMap<String, bool>>,
    pub states_only_in_b: Vec<BTreeMap<String, bool>>,
    pub transitions_only_in_a: Vec<TransitionDiff>,
    pub transitions_only_in_b: Vec<TransitionDiff>,
    pub behavior_changed: bool,
}

impl DiffReport {
    /// Human-readable rendering, one line per difference.
    pub fn render(&self) -> String {
        if !self.behavior_changed {
            return "no behavioral differences\n".to_string();
        }
        let mut out = String::new();
        let list = |out: &mut String, title: &str, items: &[String]| {
            for item in items {
                out.push_str(&format!("{title}: {item}\n"));
            }
        };
        list(&mut out, "method only in A", &self.alphabet_only_in_a);
        list(&mut out, "method only in B", &self.alphabet_only_in_b);
        list(&mut out, "predicate only in A", &self.predicates_only_in_a);
        list(&mut out, "predicate only in B", &self.predicates_only_in_b);
        for (title, states) in [
            ("state only in A", &self.states_only_in_a),
            ("state only in B", &self.states_only_in_b),
        ] {
            for state in states.iter() {
                out.push_str(&format!("{title}: {}\n", render_valuation(state)));
            }
        }
        for (title, transitions) in [
            ("transition only in A", &self.transitions_only_in_a),
            ("transition only in B", &self.transitions_only_in_b),
        ] {
            for t in transitions.iter() {
                out.push_str(&format!(
                    "{title}: {} --{}[{}]--> {}\n",
                    render_valuation(&t.from),
                    t.method,
                    t.guard,
                    render_valuation(&t.to)
                ));
            }
        }
        out
    }
}

fn render_valuation(valuation: &BTreeMap<String, bool>) -> String {
    if valuation.is_empty() {
        return "init".to_string();
    }
    valuation
        .iter()
        .map(|(p, v)| format!("{p}={}", if *v { "T" } else { "F" }))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Compares two machines. States match when their valuations are equal;
/// transitions match when endpoints and method agree and the guards are
/// logically equivalent. Machines whose alphabets share no method cannot be
/// meaningfully compared and are rejected.
pub fn diff(a: &Fsm, b: &Fsm) -> Result<DiffReport, DiffError> {
    let alpha_a: BTreeSet<&String> = a.alphabet().iter().collect();
    let alpha_b: BTreeSet<&String> = b.alphabet().iter().collect();
    if alpha_a.intersection(&alpha_b).next().is_none()
        && !(alpha_a.is_empty() && alpha_b.is_empty())
    {
        return Err(DiffError::IncomparableModels);
    }

    let mut report = DiffReport {
        alphabet_only_in_a: alpha_a.difference(&alpha_b).map(|s| (*s).clone()).collect(),
        alphabet_only_in_b: alpha_b.difference(&alpha_a).map(|s| (*s).clone()).collect(),
        ..DiffReport::default()
    };

    let preds = |f: &Fsm| -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for s in f.states() {
            out.extend(s.valuation().keys().map(|p| p.to_string()));
        }
        for t in f.transitions() {
            out.extend(t.guard.atoms().iter().map(|p| p.to_string()));
        }
        out
    };
    let preds_a = preds(a);
    let preds_b = preds(b);
    report.predicates_only_in_a = preds_a.difference(&preds_b).cloned().collect();
    report.predicates_only_in_b = preds_b.difference(&preds_a).cloned().collect();

    let states_a: BTreeSet<_> = a.states().iter().collect();
    let states_b: BTreeSet<_> = b.states().iter().collect();
    report.states_only_in_a = states_a
        .difference(&states_b)
        .map(|s| {
            s.valuation()
                .iter()
                .map(|(p, v)| (p.to_string(), *v))
                .collect()
        })
        .collect();
    report.states_only_in_b = states_b
        .difference(&states_a)
        .map(|s| {
            s.valuation()
                .iter()
                .map(|(p, v)| (p.to_string(), *v))
                .collect()
        })
        .collect();

    let matched = |t: &Transition, other: &Fsm| -> bool {
        other.transitions().iter().any(|u| {
            u.from == t.from
                && u.method == t.method
                && u.to == t.to
                && u.guard.equivalent(&t.guard)
        })
    };
    report.transitions_only_in_a = a
        .transitions()
        .iter()
        .filter(|t| !matched(t, b))
        .map(TransitionDiff::of)
        .collect();
    report.transitions_only_in_b = b
        .transitions()
        .iter()
        .filter(|t| !matched(t, a))
        .map(TransitionDiff::of)
        .collect();

    report.behavior_changed = !(report.alphabet_only_in_a.is_empty()
        && report.alphabet_only_in_b.is_empty()
        && report.states_only_in_a.is_empty()
        && report.states_only_in_b.is_empty()
        && report.transitions_only_in_a.is_empty()
        && report.transitions_only_in_b.is_empty());
    Ok(report)
}
