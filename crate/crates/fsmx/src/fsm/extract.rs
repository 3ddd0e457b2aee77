//! Solver-backed extraction: per-method contexts, transition tasks, and the
//! assembled machine.

use std::collections::{BTreeMap, BTreeSet};

use crate::catalog::Catalog;
use crate::encoder::{encode, MethodEncoding};
use crate::par::{self, Parallelism};
use crate::predicate::{
    predicate_universe, Context, IndexedVar, Predicate, SymbolError, SymbolKind,
};
use crate::sat::{enumerate, BlockingMode, CnfInstance, EnumStats, Lit, SolverChoice};
use crate::source::{ApiUnitModel, Arg, ConditionExpr, MethodModel, StatementTree};

use super::{AbstractState, Fsm, Guard, StateSpace, StateSpaceError, Transition};

/// Extraction knobs beyond the unit itself. `state_predicates: None` keeps
/// every state predicate of the unit's common context.
#[derive(Debug, Clone)]
pub struct AnalyzerOptions {
    pub state_predicates: Option<BTreeSet<Predicate>>,
    /// Extra constant value symbols to reason over, beyond parameters,
    /// literals, and catalog-required constants.
    pub extra_values: Vec<String>,
    /// Extra collection symbols (rarely useful; widens the universe).
    pub extra_collections: Vec<String>,
    pub solver: SolverChoice,
    pub blocking: BlockingMode,
    pub parallelism: Parallelism,
    pub prune_unreachable: bool,
}

impl Default for AnalyzerOptions {
    fn default() -> Self {
        AnalyzerOptions {
            state_predicates: None,
            extra_values: Vec::new(),
            extra_collections: Vec::new(),
            solver: SolverChoice::default(),
            blocking: BlockingMode::default(),
            parallelism: Parallelism::default(),
            prune_unreachable: true,
        }
    }
}

/// Per-task accounting, used to check the enumeration budget: a projection
/// task may take at most `2^|P_nd| + 1` solver calls.
#[derive(Debug, Clone)]
pub struct TaskReport {
    pub method: String,
    pub solver_calls: usize,
    pub models: usize,
    pub guard_atom_count: usize,
    pub nd_count: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ExtractionStats {
    pub tasks: Vec<TaskReport>,
}

impl ExtractionStats {
    pub fn total_solver_calls(&self) -> usize {
        self.tasks.iter().map(|t| t.solver_calls).sum()
    }

    /// True when every task stayed within `2^|P_nd| + 1` solver calls.
    pub fn within_projection_budget(&self) -> bool {
        self.tasks
            .iter()
            .all(|t| t.solver_calls <= (1usize << t.nd_count.min(62)) + 1)
    }
}

/// One encoded body ready for transition queries: its CNF compilation with
/// the state pins and guard atoms registered as named variables.
pub(super) struct Prepared {
    pub(super) name: String,
    pub(super) encoding: MethodEncoding,
    pub(super) universe: BTreeSet<Predicate>,
    pub(super) guard_atoms: Vec<Predicate>,
    pub(super) nd_count: usize,
    pub(super) cnf: CnfInstance<IndexedVar>,
}

/// Drives extraction for one parsed unit: owns the catalog, the common
/// context, and the abstract state space.
#[derive(Debug)]
pub struct Analyzer {
    unit: ApiUnitModel,
    catalog: Catalog,
    include_exc: bool,
    common: Context,
    state_universe: BTreeSet<Predicate>,
    pub(super) space: StateSpace,
    solver: SolverChoice,
    blocking: BlockingMode,
    parallelism: Parallelism,
    prune: bool,
}

impl Analyzer {
    pub fn new(
        unit: ApiUnitModel,
        catalog: Catalog,
        options: AnalyzerOptions,
    ) -> crate::Result<Analyzer> {
        let info = catalog.unit_info(&unit)?;
        let mut common = Context::new();
        for field in &unit.fields {
            common.add_collection(&field.name, SymbolKind::State)?;
        }
        for name in &options.extra_collections {
            common.add_collection(name, SymbolKind::State)?;
        }
        for name in &info.constants {
            common.add_value(name, SymbolKind::State)?;
        }
        for name in &options.extra_values {
            if !common.has_value(name) {
                common.add_value(name, SymbolKind::State)?;
            }
        }

        let state_universe: BTreeSet<Predicate> = predicate_universe(&common, info.include_exc)
            .into_iter()
            .filter(|p| p.is_state(&common))
            .collect();
        let chosen = match &options.state_predicates {
            None => state_universe.clone(),
            Some(set) => {
                for pred in set {
                    if !state_universe.contains(pred) {
                        return Err(SymbolError::BadPredicate {
                            input: pred.to_string(),
                            reason: "not a state predicate of this unit".to_string(),
                        }
                        .into());
                    }
                }
                set.clone()
            }
        };
        let space = StateSpace::all_concrete(&chosen);

        Ok(Analyzer {
            unit,
            catalog,
            include_exc: info.include_exc,
            common,
            state_universe,
            space,
            solver: options.solver,
            blocking: options.blocking,
            parallelism: options.parallelism,
            prune: options.prune_unreachable,
        })
    }

    /// Replaces the state space with a caller-built one (for partial state
    /// valuations). Its predicates must be state predicates of this unit.
    pub fn with_state_space(mut self, space: StateSpace) -> crate::Result<Analyzer> {
        for pred in space.predicates() {
            if !self.state_universe.contains(pred) {
                return Err(crate::Error::States(StateSpaceError(format!(
                    "`{pred}` is not a state predicate of this unit"
                ))));
            }
        }
        self.space = space;
        Ok(self)
    }

    pub fn unit(&self) -> &ApiUnitModel {
        &self.unit
    }

    pub fn common_context(&self) -> &Context {
        &self.common
    }

    pub fn state_predicates(&self) -> &BTreeSet<Predicate> {
        &self.state_universe
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.space
    }

    pub fn include_exc(&self) -> bool {
        self.include_exc
    }

    /// The context a body is encoded against: the common context plus the
    /// method's parameters (indeterminacy) and its literal operands (state).
    pub fn method_context(&self, method: Option<&MethodModel>) -> crate::Result<Context> {
        let mut ctx = self.common.clone();
        let body = match method {
            Some(m) => {
                for param in &m.params {
                    ctx.add_value(param, SymbolKind::Indeterminacy)?;
                }
                &m.body
            }
            None => &self.unit.constructor,
        };
        for literal in body_literals(body) {
            if !ctx.has_value(&literal) {
                ctx.add_value(&literal, SymbolKind::State)?;
            }
        }
        Ok(ctx)
    }

    pub(super) fn prepare(
        &self,
        name: &str,
        method: Option<&MethodModel>,
    ) -> crate::Result<Prepared> {
        let ctx = self.method_context(method)?;
        let body = match method {
            Some(m) => &m.body,
            None => &self.unit.constructor,
        };
        let encoding = encode(&self.catalog, &self.unit, body, &ctx, self.include_exc)?;
        let universe = predicate_universe(&ctx, self.include_exc);
        let nd: Vec<Predicate> = universe
            .iter()
            .filter(|p| !p.is_state(&ctx))
            .cloned()
            .collect();
        let guard_atoms: Vec<Predicate> =
            nd.iter().filter(|p| p.is_equality()).cloned().collect();

        let mut register: Vec<IndexedVar> = Vec::new();
        for pred in self.space.predicates() {
            register.push(IndexedVar::new(pred.clone(), 0));
            register.push(IndexedVar::new(pred.clone(), encoding.last));
        }
        for pred in &guard_atoms {
            register.push(IndexedVar::new(pred.clone(), 0));
        }
        let cnf = CnfInstance::new(&encoding.formula, &register);
        Ok(Prepared {
            name: name.to_string(),
            encoding,
            universe,
            nd_count: nd.len(),
            guard_atoms,
            cnf,
        })
    }

    pub(super) fn prepared_bodies(&self) -> crate::Result<Vec<Prepared>> {
        let mut preps = vec![self.prepare(&self.unit.name.clone(), None)?];
        for method in &self.unit.methods {
            preps.push(self.prepare(&method.name, Some(method))?);
        }
        Ok(preps)
    }

    /// Computes the guard of one `(from, method, to)` candidate by model
    /// enumeration, projected onto the method's indeterminacy equalities at
    /// step 0. An unsatisfiable query yields the false guard.
    fn guard_for(
        &self,
        prep: &Prepared,
        from: &AbstractState,
        to: &AbstractState,
    ) -> crate::Result<(Guard, EnumStats)> {
        let mut assumptions: Vec<Lit> = Vec::new();
        for (pred, value) in from.valuation() {
            let iv = IndexedVar::new(pred.clone(), 0);
            let lit = prep
                .cnf
                .lit(&iv, *value)
                .expect("state predicates are registered at step 0");
            assumptions.push(lit);
        }
        for (pred, value) in to.valuation() {
            let iv = IndexedVar::new(pred.clone(), prep.encoding.last);
            let lit = prep
                .cnf
                .lit(&iv, *value)
                .expect("state predicates are registered at the final step");
            assumptions.push(lit);
        }
        let projection: Vec<IndexedVar> = prep
            .guard_atoms
            .iter()
            .map(|p| IndexedVar::new(p.clone(), 0))
            .collect();
        let cap = match self.blocking {
            BlockingMode::Projection => 1usize << projection.len().min(62),
            BlockingMode::FullTrace => 1usize << prep.cnf.original_count().min(62),
        };
        let mut backend = self.solver.make();
        let (rows, stats) = enumerate(
            &prep.cnf,
            backend.as_mut(),
            &assumptions,
            &projection,
            self.blocking,
            cap,
        )?;
        let rows: Vec<BTreeMap<Predicate, bool>> = rows
            .into_iter()
            .map(|row| row.into_iter().map(|(iv, v)| (iv.pred, v)).collect())
            .collect();
        Ok((Guard::new(prep.guard_atoms.clone(), rows), stats))
    }

    /// The guard atom domain of one body: its indeterminacy equalities. The
    /// unit's own name selects the constructor.
    pub fn guard_atoms_for(&self, method: &str) -> crate::Result<Vec<Predicate>> {
        let prep = self.prepare(method, self.find_method(method)?)?;
        Ok(prep.guard_atoms)
    }

    /// Satisfiability probe for one transition candidate under an additional
    /// partial assignment of guard atoms at step 0. Audits extracted guards:
    /// every DNF row must be satisfiable and every excluded row must not be.
    pub fn probe_guard_row(
        &self,
        method: &str,
        from: &AbstractState,
        to: &AbstractState,
        row: &BTreeMap<Predicate, bool>,
    ) -> crate::Result<bool> {
        let prep = self.prepare(method, self.find_method(method)?)?;
        let mut assumptions: Vec<Lit> = Vec::new();
        let mut pin = |pred: &Predicate, step: usize, value: bool| -> crate::Result<()> {
            let iv = IndexedVar::new(pred.clone(), step);
            let lit = prep.cnf.lit(&iv, value).ok_or_else(|| {
                crate::Error::Symbol(SymbolError::BadPredicate {
                    input: iv.to_string(),
                    reason: "not a variable of this method encoding".to_string(),
                })
            })?;
            assumptions.push(lit);
            Ok(())
        };
        for (pred, value) in from.valuation() {
            pin(pred, 0, *value)?;
        }
        for (pred, value) in to.valuation() {
            pin(pred, prep.encoding.last, *value)?;
        }
        for (pred, value) in row {
            pin(pred, 0, *value)?;
        }
        let mut backend = self.solver.make();
        backend.ensure_vars(prep.cnf.var_count());
        for clause in prep.cnf.clauses() {
            backend.add_clause(clause);
        }
        Ok(matches!(
            backend.solve(&assumptions)?,
            crate::sat::SatOutcome::Sat(_)
        ))
    }

    fn find_method(&self, name: &str) -> crate::Result<Option<&MethodModel>> {
        if name == self.unit.name {
            return Ok(None);
        }
        match self.unit.method(name) {
            Some(m) => Ok(Some(m)),
            None => Err(crate::Error::Symbol(SymbolError::Unknown(name.to_string()))),
        }
    }

    /// Extracts the machine: constructor transitions out of the initial
    /// state, then one task per `(state, method, state)` candidate. Tasks run
    /// in parallel under `Parallelism::Auto` and merge deterministically.
    pub fn extract(&self) -> crate::Result<(Fsm, ExtractionStats)> {
        struct Task<'a> {
            prep: &'a Prepared,
            from: &'a AbstractState,
            to: &'a AbstractState,
        }

        let preps = self.prepared_bodies()?;
        let initial = &self.space.states()[0];
        let mut tasks: Vec<Task> = Vec::new();
        for (k, prep) in preps.iter().enumerate() {
            if k == 0 {
                for to in self.space.concrete_states() {
                    tasks.push(Task {
                        prep,
                        from: initial,
                        to,
                    });
                }
            } else {
                for from in self.space.concrete_states() {
                    for to in self.space.concrete_states() {
                        tasks.push(Task { prep, from, to });
                    }
                }
            }
        }

        let outcomes = par::map_collect(self.parallelism, tasks, |task| {
            let result = self.guard_for(task.prep, task.from, task.to);
            (task.prep.name.clone(), task.from.clone(), task.to.clone(), task.prep.guard_atoms.len(), task.prep.nd_count, result)
        });

        let mut transitions: Vec<Transition> = Vec::new();
        let mut stats = ExtractionStats::default();
        for (method, from, to, atom_count, nd_count, result) in outcomes {
            let (guard, enum_stats) = result?;
            stats.tasks.push(TaskReport {
                method: method.clone(),
                solver_calls: enum_stats.solver_calls,
                models: enum_stats.models,
                guard_atom_count: atom_count,
                nd_count,
            });
            if !guard.is_false() {
                transitions.push(Transition {
                    from,
                    method,
                    to,
                    guard,
                });
            }
        }
        transitions.sort_by(|a, b| {
            (&a.from, &a.method, &a.to).cmp(&(&b.from, &b.method, &b.to))
        });

        let alphabet: BTreeSet<String> = preps.iter().map(|p| p.name.clone()).collect();
        let mut fsm = Fsm::new(
            self.space.states().to_vec(),
            alphabet.into_iter().collect(),
            transitions,
        );
        if self.prune {
            fsm = fsm.prune_unreachable();
        }
        Ok((fsm, stats))
    }
}

/// Literal operands (`null`, quoted strings) appearing anywhere in a body,
/// including conditions.
fn body_literals(body: &StatementTree) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_stmt(body, &mut out);
    out
}

fn collect_stmt(stmt: &StatementTree, out: &mut BTreeSet<String>) {
    match stmt {
        StatementTree::Seq(items) => {
            for item in items {
                collect_stmt(item, out);
            }
        }
        StatementTree::Op(op) => {
            for arg in &op.args {
                collect_arg(arg, out);
            }
        }
        StatementTree::If {
            cond,
            then_branch,
            else_branch,
            ..
        } => {
            collect_cond(cond, out);
            collect_stmt(then_branch, out);
            collect_stmt(else_branch, out);
        }
        StatementTree::While { cond, body, .. } => {
            collect_cond(cond, out);
            collect_stmt(body, out);
        }
    }
}

fn collect_arg(arg: &Arg, out: &mut BTreeSet<String>) {
    match arg {
        Arg::Ident(_) => {}
        other => {
            out.insert(other.symbol());
        }
    }
}

fn collect_cond(cond: &ConditionExpr, out: &mut BTreeSet<String>) {
    match cond {
        ConditionExpr::ValueEq(a, b) | ConditionExpr::ValueNeq(a, b) => {
            collect_arg(a, out);
            collect_arg(b, out);
        }
        ConditionExpr::Contains(_, a) => collect_arg(a, out),
        ConditionExpr::IsEmpty(_) => {}
        ConditionExpr::Not(inner) => collect_cond(inner, out),
        ConditionExpr::And(a, b) | ConditionExpr::Or(a, b) => {
            collect_cond(a, out);
            collect_cond(b, out);
        }
    }
}
