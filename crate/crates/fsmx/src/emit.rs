//! Machine artifacts: the JSON interchange document and GraphViz DOT
//! rendering. The JSON form is byte-stable for a given machine and round
//! trips losslessly.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fsm::{AbstractState, Fsm, Guard, Transition};
use crate::predicate::Predicate;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("invalid machine document: {0}")]
    Invalid(String),
    #[error("machine document is not valid json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsmDoc {
    pub states: Vec<StateDoc>,
    pub initial: String,
    pub alphabet: Vec<String>,
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub id: String,
    pub valuation: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub from: String,
    pub method: String,
    pub guard_dnf: Vec<Vec<AtomDoc>>,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub pred: String,
    pub value: bool,
}

impl FsmDoc {
    pub fn from_fsm(fsm: &Fsm) -> FsmDoc {
        let ids: BTreeMap<&AbstractState, String> = fsm
            .states()
            .iter()
            .enumerate()
            .map(|(k, s)| (s, format!("s{k}")))
            .collect();
        let states: Vec<StateDoc> = fsm
            .states()
            .iter()
            .map(|s| StateDoc {
                id: ids[s].clone(),
                valuation: s
                    .valuation()
                    .iter()
                    .map(|(p, v)| (p.to_string(), *v))
                    .collect(),
            })
            .collect();
        let transitions: Vec<TransitionDoc> = fsm
            .transitions()
            .iter()
            .map(|t| TransitionDoc {
                from: ids[&t.from].clone(),
                method: t.method.clone(),
                guard_dnf: t
                    .guard
                    .rows()
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|(p, v)| AtomDoc {
                                pred: p.to_string(),
                                value: *v,
                            })
                            .collect()
                    })
                    .collect(),
                to: ids[&t.to].clone(),
            })
            .collect();
        FsmDoc {
            states,
            initial: "s0".to_string(),
            alphabet: fsm.alphabet().to_vec(),
            transitions,
        }
    }

    pub fn to_fsm(&self) -> Result<Fsm, DocError> {
        let mut by_id: BTreeMap<&str, AbstractState> = BTreeMap::new();
        let mut states: Vec<AbstractState> = Vec::new();
        for state in &self.states {
            let mut valuation = BTreeMap::new();
            for (pred_text, value) in &state.valuation {
                let pred = Predicate::parse(pred_text)
                    .map_err(|e| DocError::Invalid(format!("state `{}`: {e}", state.id)))?;
                valuation.insert(pred, *value);
            }
            let abstract_state = AbstractState::concrete(valuation);
            if by_id
                .insert(state.id.as_str(), abstract_state.clone())
                .is_some()
            {
                return Err(DocError::Invalid(format!("duplicate state id `{}`", state.id)));
            }
            states.push(abstract_state);
        }
        let initial = by_id
            .get(self.initial.as_str())
            .ok_or_else(|| DocError::Invalid(format!("unknown initial state `{}`", self.initial)))?;
        if !initial.is_initial() {
            return Err(DocError::Invalid(format!(
                "initial state `{}` must have an empty valuation",
                self.initial
            )));
        }
        states.retain(|s| !s.is_initial());
        states.insert(0, AbstractState::initial());

        let mut transitions: Vec<Transition> = Vec::new();
        for t in &self.transitions {
            let from = by_id
                .get(t.from.as_str())
                .ok_or_else(|| DocError::Invalid(format!("unknown state `{}`", t.from)))?;
            let to = by_id
                .get(t.to.as_str())
                .ok_or_else(|| DocError::Invalid(format!("unknown state `{}`", t.to)))?;
            let mut atom_set: BTreeSet<Predicate> = BTreeSet::new();
            let mut rows: Vec<BTreeMap<Predicate, bool>> = Vec::new();
            for conjunct in &t.guard_dnf {
                let mut row = BTreeMap::new();
                for atom in conjunct {
                    let pred = Predicate::parse(&atom.pred).map_err(|e| {
                        DocError::Invalid(format!("transition guard atom `{}`: {e}", atom.pred))
                    })?;
                    atom_set.insert(pred.clone());
                    row.insert(pred, atom.value);
                }
                rows.push(row);
            }
            for row in &rows {
                if row.len() != atom_set.len() {
                    return Err(DocError::Invalid(format!(
                        "guard of `{}` -> `{}` has a conjunct that is not total over its atoms",
                        t.from, t.to
                    )));
                }
            }
            transitions.push(Transition {
                from: from.clone(),
                method: t.method.clone(),
                to: to.clone(),
                guard: Guard::new(atom_set.into_iter().collect(), rows),
            });
        }
        Ok(Fsm::new(states, self.alphabet.clone(), transitions))
    }

    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("document serializes");
        text.push('\n');
        text
    }

    pub fn from_json_str(text: &str) -> Result<FsmDoc, DocError> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn emit_json(fsm: &Fsm) -> String {
    FsmDoc::from_fsm(fsm).to_json_string()
}

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

/// GraphViz rendering: one box per state labeled with its valuation, a point
/// node marking the initial state, and `method [guard]` edge labels with the
/// guard omitted when it is `true`.
pub fn emit_dot(fsm: &Fsm) -> String {
    let ids: BTreeMap<&AbstractState, String> = fsm
        .states()
        .iter()
        .enumerate()
        .map(|(k, s)| (s, format!("s{k}")))
        .collect();
    let mut out = String::new();
    out.push_str("digraph fsm {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=box];\n");
    out.push_str("  __start [shape=point, label=\"\"];\n");
    for state in fsm.states() {
        let label = if state.is_initial() {
            "init".to_string()
        } else {
            state
                .valuation()
                .iter()
                .map(|(p, v)| format!("{}={}", p, if *v { "T" } else { "F" }))
                .collect::<Vec<_>>()
                .join("\\n")
        };
        out.push_str(&format!("  {} [label=\"{}\"];\n", ids[state], escape(&label)));
    }
    out.push_str("  __start -> s0;\n");
    for t in fsm.transitions() {
        let label = if t.guard.is_true() {
            t.method.clone()
        } else {
            format!("{} [{}]", t.method, t.guard.render())
        };
        out.push_str(&format!(
            "  {} -> {} [label=\"{}\"];\n",
            ids[&t.from],
            ids[&t.to],
            escape(&label)
        ));
    }
    out.push_str("}\n");
    out
}
