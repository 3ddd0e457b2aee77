//! Brute-force oracle for the transition relation: assignments of the
//! step-indexed predicates are enumerated and evaluated directly against the
//! method formula, with no CNF compilation or solver involved. Slow, simple,
//! and independent of the extraction path.

use std::collections::{BTreeMap, BTreeSet};

use crate::formula::Formula;
use crate::predicate::{IndexedVar, Predicate};

use super::extract::Prepared;
use super::{AbstractState, Analyzer, Fsm, Guard, StateSpace, Transition};

/// Variable budget for exhaustive enumeration: `2^24` assignments.
pub const EXHAUSTIVE_VAR_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Iterate over every assignment of all `|P| * (last+1)` variables.
    /// Bodies above `limit` variables are skipped, not failed.
    Exhaustive { limit: usize },
    /// Complete backtracking search in step-major variable order, pruning a
    /// branch as soon as a fully assigned conjunct evaluates to false.
    PrunedDfs,
}

impl OracleMode {
    pub fn exhaustive() -> OracleMode {
        OracleMode::Exhaustive {
            limit: EXHAUSTIVE_VAR_LIMIT,
        }
    }
}

/// Oracle result for one body. `skipped` marks bodies over the exhaustive
/// variable limit; their `transitions` are empty.
#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub method: String,
    pub vars: usize,
    pub skipped: bool,
    pub transitions: Vec<Transition>,
}

impl Analyzer {
    /// The full transition relation by direct enumeration, one outcome per
    /// body, constructor first. Nothing is pruned.
    pub fn oracle_relation(&self, mode: OracleMode) -> crate::Result<Vec<OracleOutcome>> {
        let preps = self.prepared_bodies()?;
        let mut out = Vec::new();
        for (k, prep) in preps.iter().enumerate() {
            out.push(self.oracle_body(prep, k == 0, mode));
        }
        Ok(out)
    }

    fn oracle_body(&self, prep: &Prepared, is_ctor: bool, mode: OracleMode) -> OracleOutcome {
        let mut vars: Vec<IndexedVar> = Vec::new();
        for step in 0..=prep.encoding.last {
            for pred in &prep.universe {
                vars.push(IndexedVar::new(pred.clone(), step));
            }
        }
        let n = vars.len();
        if let OracleMode::Exhaustive { limit } = mode {
            if n > limit {
                return OracleOutcome {
                    method: prep.name.clone(),
                    vars: n,
                    skipped: true,
                    transitions: Vec::new(),
                };
            }
        }
        let position: BTreeMap<IndexedVar, usize> = vars
            .iter()
            .cloned()
            .enumerate()
            .map(|(k, v)| (v, k))
            .collect();

        let mut acc: BTreeMap<(AbstractState, AbstractState), BTreeSet<BTreeMap<Predicate, bool>>> =
            BTreeMap::new();
        let initial = AbstractState::initial();
        {
            let space = &self.space;
            let mut on_model = |assign: &[bool]| {
                let value = |pred: &Predicate, step: usize| {
                    assign[position[&IndexedVar::new(pred.clone(), step)]]
                };
                let row: BTreeMap<Predicate, bool> = prep
                    .guard_atoms
                    .iter()
                    .map(|p| (p.clone(), value(p, 0)))
                    .collect();
                let to_total: BTreeMap<Predicate, bool> = space
                    .predicates()
                    .iter()
                    .map(|p| (p.clone(), value(p, prep.encoding.last)))
                    .collect();
                let to_states = matching_states(space, &to_total);
                let from_states: Vec<&AbstractState> = if is_ctor {
                    vec![&initial]
                } else {
                    let from_total: BTreeMap<Predicate, bool> = space
                        .predicates()
                        .iter()
                        .map(|p| (p.clone(), value(p, 0)))
                        .collect();
                    matching_states(space, &from_total)
                };
                for from in &from_states {
                    for to in &to_states {
                        acc.entry(((*from).clone(), (*to).clone()))
                            .or_default()
                            .insert(row.clone());
                    }
                }
            };
            match mode {
                OracleMode::Exhaustive { .. } => {
                    exhaustive_models(n, &prep.encoding.formula, &position, &mut on_model)
                }
                OracleMode::PrunedDfs => {
                    dfs_models(&vars, &prep.encoding.formula, &position, &mut on_model)
                }
            }
        }

        let transitions: Vec<Transition> = acc
            .into_iter()
            .map(|((from, to), rows)| Transition {
                from,
                method: prep.name.clone(),
                to,
                guard: Guard::new(prep.guard_atoms.clone(), rows.into_iter().collect()),
            })
            .collect();
        OracleOutcome {
            method: prep.name.clone(),
            vars: n,
            skipped: false,
            transitions,
        }
    }
}

fn matching_states<'a>(
    space: &'a StateSpace,
    total: &BTreeMap<Predicate, bool>,
) -> Vec<&'a AbstractState> {
    space
        .concrete_states()
        .iter()
        .filter(|s| {
            s.valuation()
                .iter()
                .all(|(p, v)| total.get(p) == Some(v))
        })
        .collect()
}

fn exhaustive_models(
    n: usize,
    formula: &Formula<IndexedVar>,
    position: &BTreeMap<IndexedVar, usize>,
    on_model: &mut impl FnMut(&[bool]),
) {
    assert!(n <= 62);
    let mut assign = vec![false; n];
    for bits in 0..(1u64 << n) {
        for (k, slot) in assign.iter_mut().enumerate() {
            *slot = bits >> k & 1 == 1;
        }
        if formula.eval(&|v: &IndexedVar| assign[position[v]]) {
            on_model(&assign);
        }
    }
}

fn dfs_models(
    vars: &[IndexedVar],
    formula: &Formula<IndexedVar>,
    position: &BTreeMap<IndexedVar, usize>,
    on_model: &mut impl FnMut(&[bool]),
) {
    let n = vars.len();
    let mut buckets: Vec<Vec<Formula<IndexedVar>>> = (0..n).map(|_| Vec::new()).collect();
    for conjunct in formula.clone().into_conjuncts() {
        let mut max_pos: Option<usize> = None;
        conjunct.for_each_var(&mut |v| {
            let p = position[v];
            max_pos = Some(max_pos.map_or(p, |m| m.max(p)));
        });
        match max_pos {
            Some(k) => buckets[k].push(conjunct),
            // A variable-free conjunct is a constant; false kills everything.
            None => {
                if !conjunct.eval(&|_| false) {
                    return;
                }
            }
        }
    }
    let mut assign = vec![false; n];
    descend(0, &mut assign, &buckets, position, on_model);
}

fn descend(
    k: usize,
    assign: &mut Vec<bool>,
    buckets: &[Vec<Formula<IndexedVar>>],
    position: &BTreeMap<IndexedVar, usize>,
    on_model: &mut impl FnMut(&[bool]),
) {
    if k == assign.len() {
        on_model(assign);
        return;
    }
    for value in [false, true] {
        assign[k] = value;
        let consistent = buckets[k]
            .iter()
            .all(|c| c.eval(&|v: &IndexedVar| assign[position[v]]));
        if consistent {
            descend(k + 1, assign, buckets, position, on_model);
        }
    }
}

/// Flattens oracle outcomes (skipped bodies excluded) into one sorted
/// transition list, the same shape `Analyzer::extract` produces before
/// pruning.
pub fn oracle_transitions(outcomes: &[OracleOutcome]) -> Vec<Transition> {
    let mut all: Vec<Transition> = outcomes
        .iter()
        .filter(|o| !o.skipped)
        .flat_map(|o| o.transitions.iter().cloned())
        .collect();
    all.sort_by(|a, b| (&a.from, &a.method, &a.to).cmp(&(&b.from, &b.method, &b.to)));
    all
}

/// First method whose solver-extracted transitions differ from the oracle's,
/// if any. `fsm` must be extracted without pruning; skipped outcomes are not
/// checked.
pub fn first_mismatch(fsm: &Fsm, outcomes: &[OracleOutcome]) -> Option<String> {
    for outcome in outcomes {
        if outcome.skipped {
            continue;
        }
        let extracted: Vec<&Transition> = fsm
            .transitions()
            .iter()
            .filter(|t| t.method == outcome.method)
            .collect();
        let oracle: Vec<&Transition> = outcome.transitions.iter().collect();
        if extracted != oracle {
            return Some(outcome.method.clone());
        }
    }
    None
}
