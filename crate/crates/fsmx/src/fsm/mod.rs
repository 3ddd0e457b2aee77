//! Abstract states, guarded transitions, and the finite-state machine model.
//!
//! A state is a (possibly partial) valuation of the chosen state predicates;
//! the distinguished initial state `s0` decides nothing and only sources
//! constructor transitions. Transition guards are sets of total valuations
//! over the equality predicates that the method cannot resolve on its own
//! (the indeterminacy equalities), kept in disjunctive normal form.

mod extract;
mod oracle;
mod simplify;

pub use extract::{Analyzer, AnalyzerOptions, ExtractionStats, TaskReport};
pub use oracle::{
    first_mismatch, oracle_transitions, OracleMode, OracleOutcome, EXHAUSTIVE_VAR_LIMIT,
};
pub use simplify::SimpleGuard;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::predicate::Predicate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle budget exceeded: {vars} formula variables, exhaustive limit is {limit}")]
    TooLarge { vars: usize, limit: usize },
    #[error("oracle disagrees with solver-backed extraction for method `{method}`")]
    Mismatch { method: String },
}

#[derive(Debug, Error)]
#[error("invalid state set: {0}")]
pub struct StateSpaceError(pub String);

/// A partial valuation of state predicates. The empty valuation is the
/// initial state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractState {
    valuation: BTreeMap<Predicate, bool>,
}

impl AbstractState {
    pub fn initial() -> Self {
        AbstractState {
            valuation: BTreeMap::new(),
        }
    }

    pub fn concrete(valuation: BTreeMap<Predicate, bool>) -> Self {
        AbstractState { valuation }
    }

    pub fn is_initial(&self) -> bool {
        self.valuation.is_empty()
    }

    pub fn valuation(&self) -> &BTreeMap<Predicate, bool> {
        &self.valuation
    }

    pub fn get(&self, pred: &Predicate) -> Option<bool> {
        self.valuation.get(pred).copied()
    }

    /// True when `self` decides everything `other` decides, the same way.
    pub fn refines(&self, other: &AbstractState) -> bool {
        other
            .valuation
            .iter()
            .all(|(p, v)| self.valuation.get(p) == Some(v))
    }
}

impl fmt::Display for AbstractState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_initial() {
            return write!(f, "init");
        }
        let mut first = true;
        for (pred, value) in &self.valuation {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{}={}", pred, if *value { "T" } else { "F" })?;
        }
        Ok(())
    }
}

/// The set of abstract states an extraction runs over. The initial state is
/// always present at index 0.
#[derive(Debug, Clone)]
pub struct StateSpace {
    predicates: Vec<Predicate>,
    states: Vec<AbstractState>,
}

impl StateSpace {
    /// All `2^n` total valuations over `predicates`, plus the initial state.
    pub fn all_concrete(predicates: &BTreeSet<Predicate>) -> StateSpace {
        let preds: Vec<Predicate> = predicates.iter().cloned().collect();
        let mut states = vec![AbstractState::initial()];
        for bits in 0..(1u64 << preds.len()) {
            let mut valuation = BTreeMap::new();
            for (k, pred) in preds.iter().enumerate() {
                valuation.insert(pred.clone(), bits >> k & 1 == 1);
            }
            states.push(AbstractState::concrete(valuation));
        }
        states[1..].sort();
        StateSpace {
            predicates: preds,
            states,
        }
    }

    /// A caller-chosen state set. Valuations may be partial, but no state may
    /// refine another: overlapping states would make transition sources
    /// ambiguous. The initial state is added if absent.
    pub fn custom(
        predicates: &BTreeSet<Predicate>,
        concrete: Vec<AbstractState>,
    ) -> Result<StateSpace, StateSpaceError> {
        let preds: Vec<Predicate> = predicates.iter().cloned().collect();
        let mut states: Vec<AbstractState> = Vec::new();
        for state in concrete {
            if state.is_initial() {
                continue;
            }
            for pred in state.valuation().keys() {
                if !predicates.contains(pred) {
                    return Err(StateSpaceError(format!(
                        "state `{state}` uses `{pred}`, which is not a chosen state predicate"
                    )));
                }
            }
            if states.contains(&state) {
                return Err(StateSpaceError(format!("duplicate state `{state}`")));
            }
            states.push(state);
        }
        for a in &states {
            for b in &states {
                if a != b && a.refines(b) {
                    return Err(StateSpaceError(format!(
                        "state `{a}` refines state `{b}`; states must not overlap"
                    )));
                }
            }
        }
        states.sort();
        states.insert(0, AbstractState::initial());
        Ok(StateSpace {
            predicates: preds,
            states,
        })
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn states(&self) -> &[AbstractState] {
        &self.states
    }

    pub fn concrete_states(&self) -> &[AbstractState] {
        &self.states[1..]
    }
}

/// A guard in disjunctive normal form: a set of total valuations (rows) over
/// `atoms`. The empty set is the unsatisfiable guard; the full set is `true`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    atoms: Vec<Predicate>,
    rows: Vec<BTreeMap<Predicate, bool>>,
}

impl Guard {
    pub fn new(atoms: Vec<Predicate>, rows: Vec<BTreeMap<Predicate, bool>>) -> Guard {
        debug_assert!(rows
            .iter()
            .all(|r| r.len() == atoms.len() && r.keys().all(|p| atoms.contains(p))));
        let mut rows = rows;
        rows.sort();
        rows.dedup();
        Guard { atoms, rows }
    }

    pub fn always() -> Guard {
        Guard {
            atoms: Vec::new(),
            rows: vec![BTreeMap::new()],
        }
    }

    pub fn atoms(&self) -> &[Predicate] {
        &self.atoms
    }

    pub fn rows(&self) -> &[BTreeMap<Predicate, bool>] {
        &self.rows
    }

    pub fn is_false(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_true(&self) -> bool {
        self.rows.len() == 1usize << self.atoms.len()
    }

    /// Evaluates the guard under a total assignment of its atoms.
    pub fn eval(&self, assignment: &BTreeMap<Predicate, bool>) -> bool {
        self.rows.iter().any(|row| {
            row.iter()
                .all(|(p, v)| assignment.get(p).copied() == Some(*v))
        })
    }

    /// Logical equivalence, checked by truth table over the union of both
    /// atom sets.
    pub fn equivalent(&self, other: &Guard) -> bool {
        let union: BTreeSet<Predicate> = self
            .atoms
            .iter()
            .chain(other.atoms.iter())
            .cloned()
            .collect();
        let union: Vec<Predicate> = union.into_iter().collect();
        for bits in 0..(1u64 << union.len()) {
            let assignment: BTreeMap<Predicate, bool> = union
                .iter()
                .enumerate()
                .map(|(k, p)| (p.clone(), bits >> k & 1 == 1))
                .collect();
            if self.eval(&assignment) != other.eval(&assignment) {
                return false;
            }
        }
        true
    }

    /// Two-level minimization of the guard, verified against the raw rows.
    pub fn simplify(&self) -> SimpleGuard {
        simplify::minimize(&self.atoms, &self.rows)
    }

    /// Human-readable rendering of the minimized guard, e.g.
    /// `idOpt=null ∧ idMain≠idOpt`.
    pub fn render(&self) -> String {
        self.simplify().render()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: AbstractState,
    pub method: String,
    pub to: AbstractState,
    pub guard: Guard,
}

/// A guarded non-deterministic finite-state machine over abstract states.
#[derive(Debug, Clone)]
pub struct Fsm {
    states: Vec<AbstractState>,
    alphabet: Vec<String>,
    transitions: Vec<Transition>,
}

impl Fsm {
    pub fn new(states: Vec<AbstractState>, alphabet: Vec<String>, transitions: Vec<Transition>) -> Fsm {
        debug_assert!(states.first().is_some_and(AbstractState::is_initial));
        Fsm {
            states,
            alphabet,
            transitions,
        }
    }

    pub fn states(&self) -> &[AbstractState] {
        &self.states
    }

    pub fn initial(&self) -> &AbstractState {
        &self.states[0]
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Drops states unreachable from the initial state, and their transitions.
    pub fn prune_unreachable(self) -> Fsm {
        let mut reachable: BTreeSet<&AbstractState> = BTreeSet::new();
        reachable.insert(&self.states[0]);
        loop {
            let mut grew = false;
            for t in &self.transitions {
                if reachable.contains(&t.from) && !reachable.contains(&t.to) {
                    reachable.insert(&t.to);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        let states: Vec<AbstractState> = self
            .states
            .iter()
            .filter(|s| reachable.contains(s))
            .cloned()
            .collect();
        let transitions: Vec<Transition> = self
            .transitions
            .iter()
            .filter(|t| reachable.contains(&t.from) && reachable.contains(&t.to))
            .cloned()
            .collect();
        Fsm {
            states,
            alphabet: self.alphabet,
            transitions,
        }
    }
}
