//! Embedded SAT solving: CNF compilation, a CDCL solver, model enumeration,
//! DIMACS interchange, and an external-solver escape hatch.

mod cdcl;
mod cnf;
mod dimacs;
mod external;

pub use cdcl::CdclSolver;
pub use cnf::CnfInstance;
pub use dimacs::{parse_dimacs, render_dimacs, render_raw_dimacs, ParsedDimacs};
pub use external::ExternalSolver;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver produced a model violating its own clauses")]
    BadModel,
    #[error("model enumeration exceeded the cap of {0} models")]
    EnumerationCap(usize),
    #[error("projection variable `{0}` is not part of the instance")]
    UnknownProjection(String),
    #[error("external solver `{command}`: {detail}")]
    External { command: String, detail: String },
    #[error("dimacs line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A propositional variable, numbered from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A literal: a variable with a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    pub fn positive(var: Var) -> Lit {
        Lit::new(var, true)
    }

    pub fn negative(var: Var) -> Lit {
        Lit::new(var, false)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    /// Dense index usable for watch lists: `2*var + sign`.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0) + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(n: i64) -> Option<Lit> {
        if n == 0 || n.unsigned_abs() > u32::MAX as u64 {
            return None;
        }
        let var = Var(n.unsigned_abs() as u32 - 1);
        Some(Lit::new(var, n > 0))
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Result of one satisfiability call. A model assigns every declared
/// variable, indexed by `Var`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    Sat(Vec<bool>),
    Unsat,
}

/// Anything that can take clauses and answer satisfiability queries under
/// assumptions. Assumptions hold for a single `solve` call only.
pub trait SolverBackend {
    /// Declares that variables `0..n` exist even if no clause mentions them.
    fn ensure_vars(&mut self, n: usize);
    fn add_clause(&mut self, lits: &[Lit]);
    fn solve(&mut self, assumptions: &[Lit]) -> Result<SatOutcome, SolverError>;
}

/// Which backend to instantiate for a solving task. Transition tasks run on
/// fresh backends, so the choice is a cheap factory.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SolverChoice {
    #[default]
    Embedded,
    External { command: String, args: Vec<String> },
}

impl SolverChoice {
    pub fn make(&self) -> Box<dyn SolverBackend> {
        match self {
            SolverChoice::Embedded => Box::new(CdclSolver::new()),
            SolverChoice::External { command, args } => {
                Box::new(ExternalSolver::new(command.clone(), args.clone()))
            }
        }
    }
}

/// How models are blocked during enumeration: `Projection` blocks each
/// projected row as soon as it is seen, `FullTrace` blocks complete
/// assignments of the original variables and deduplicates rows afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockingMode {
    #[default]
    Projection,
    FullTrace,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnumStats {
    /// Number of `solve` calls issued, including the final unsatisfiable one.
    pub solver_calls: usize,
    /// Models found before deduplication (equals the row count under
    /// projection blocking).
    pub models: usize,
}

/// All assignments of the projection variables extendable to a model of the
/// instance under the given assumptions, as sorted rows.
pub fn enumerate<V, B>(
    instance: &CnfInstance<V>,
    backend: &mut B,
    assumptions: &[Lit],
    projection: &[V],
    mode: BlockingMode,
    cap: usize,
) -> Result<(Vec<BTreeMap<V, bool>>, EnumStats), SolverError>
where
    V: Ord + Clone + fmt::Display,
    B: SolverBackend + ?Sized,
{
    let proj_vars: Vec<Var> = projection
        .iter()
        .map(|v| {
            instance
                .var(v)
                .ok_or_else(|| SolverError::UnknownProjection(v.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let block_vars: Vec<Var> = match mode {
        BlockingMode::Projection => proj_vars.clone(),
        BlockingMode::FullTrace => (0..instance.original_count())
            .map(|i| Var(i as u32))
            .collect(),
    };

    backend.ensure_vars(instance.var_count());
    for clause in instance.clauses() {
        backend.add_clause(clause);
    }

    let mut rows: BTreeSet<Vec<bool>> = BTreeSet::new();
    let mut stats = EnumStats::default();
    loop {
        stats.solver_calls += 1;
        match backend.solve(assumptions)? {
            SatOutcome::Unsat => break,
            SatOutcome::Sat(model) => {
                stats.models += 1;
                if stats.models > cap {
                    return Err(SolverError::EnumerationCap(cap));
                }
                rows.insert(proj_vars.iter().map(|v| model[v.index()]).collect());
                let blocking: Vec<Lit> = block_vars
                    .iter()
                    .map(|&v| Lit::new(v, !model[v.index()]))
                    .collect();
                backend.add_clause(&blocking);
            }
        }
    }
    let rows = rows
        .into_iter()
        .map(|bits| {
            projection
                .iter()
                .cloned()
                .zip(bits)
                .collect::<BTreeMap<V, bool>>()
        })
        .collect();
    Ok((rows, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Formula;

    fn f(name: &str) -> Formula<String> {
        Formula::var(name.to_string())
    }

    #[test]
    fn lit_encoding_round_trips() {
        let v = Var(7);
        let p = Lit::positive(v);
        let n = p.negate();
        assert!(p.is_positive() && !n.is_positive());
        assert_eq!(p.var(), v);
        assert_eq!(n.var(), v);
        assert_eq!(Lit::from_dimacs(p.to_dimacs()), Some(p));
        assert_eq!(Lit::from_dimacs(n.to_dimacs()), Some(n));
        assert_eq!(Lit::from_dimacs(0), None);
    }

    #[test]
    fn enumeration_under_projection_matches_truth_table() {
        // (a | b) & (!a | c): 4 models over {a,b,c}; projected to {a}: both rows.
        let formula = Formula::and(vec![
            Formula::or(vec![f("a"), f("b")]),
            Formula::or(vec![Formula::not(f("a")), f("c")]),
        ]);
        let instance = CnfInstance::new(&formula, &[]);
        let mut solver = CdclSolver::new();
        let (rows, stats) = enumerate(
            &instance,
            &mut solver,
            &[],
            &["a".to_string()],
            BlockingMode::Projection,
            8,
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(stats.solver_calls, 3);

        let mut solver = CdclSolver::new();
        let (rows_ft, stats_ft) = enumerate(
            &CnfInstance::new(&formula, &[]),
            &mut solver,
            &[],
            &["a".to_string()],
            BlockingMode::FullTrace,
            16,
        )
        .unwrap();
        assert_eq!(rows_ft, rows);
        assert_eq!(stats_ft.models, 4);
    }

    #[test]
    fn free_projection_variables_enumerate_both_polarities() {
        let formula = f("a");
        let instance = CnfInstance::new(&formula, &["b".to_string()]);
        let mut solver = CdclSolver::new();
        let (rows, _) = enumerate(
            &instance,
            &mut solver,
            &[],
            &["a".to_string(), "b".to_string()],
            BlockingMode::Projection,
            8,
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r[&"a".to_string()]));
    }

    #[test]
    fn assumptions_restrict_without_persisting() {
        let formula = Formula::or(vec![f("a"), f("b")]);
        let instance = CnfInstance::new(&formula, &[]);
        let mut solver = CdclSolver::new();
        let a = Lit::new(instance.var(&"a".to_string()).unwrap(), false);
        let (rows, _) = enumerate(
            &instance,
            &mut solver,
            &[a],
            &["a".to_string(), "b".to_string()],
            BlockingMode::Projection,
            8,
        )
        .unwrap();
        assert_eq!(rows.len(), 1, "under !a only one row remains");

        let mut solver = CdclSolver::new();
        let (rows, _) = enumerate(
            &CnfInstance::new(&formula, &[]),
            &mut solver,
            &[],
            &["a".to_string(), "b".to_string()],
            BlockingMode::Projection,
            8,
        )
        .unwrap();
        assert_eq!(rows.len(), 3, "without assumptions all three rows are back");
    }

    #[test]
    fn cap_is_enforced() {
        let formula = Formula::or(vec![f("a"), f("b")]);
        let instance = CnfInstance::new(&formula, &[]);
        let mut solver = CdclSolver::new();
        let out = enumerate(
            &instance,
            &mut solver,
            &[],
            &["a".to_string(), "b".to_string()],
            BlockingMode::Projection,
            2,
        );
        assert!(matches!(out, Err(SolverError::EnumerationCap(2))));
    }
}
