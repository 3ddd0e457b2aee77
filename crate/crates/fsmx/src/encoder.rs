//! Step-indexed encoding of method bodies.
//!
//! A body with operators numbered `1..=n` is translated into one formula over
//! `IndexedVar`s, where step 0 is the method entry and step `k` the program
//! point right after operator `k`. Plain operators conjoin their expanded
//! semantics, a frame for untouched predicates, and the axioms at their step.
//! Branches copy the predicate valuation of whichever arm ran. Loops havoc
//! the state and pin only the negated condition (plus axioms) at their step.
//!
//! When the universe carries the `exc` flag, every operator and loop aborts
//! instead: with `exc` raised on entry the whole step is a frozen copy, and
//! the ordinary semantics apply only on the `!exc` side.

use std::collections::BTreeSet;

use crate::catalog::Catalog;
use crate::formula::Formula;
use crate::predicate::{
    index_at, index_formula, instantiate_axioms, predicate_universe, Context, IndexedVar,
    Predicate,
};
use crate::source::{lower_condition, ApiUnitModel, StatementTree};

/// A fully encoded method body: the transition formula and the index of its
/// final step (0 for an empty body).
#[derive(Debug, Clone)]
pub struct MethodEncoding {
    pub formula: Formula<IndexedVar>,
    pub last: usize,
}

/// Encodes one body against a context. `include_exc` must match the universe
/// the caller reasons over; it switches the abort-style operator encoding on.
pub fn encode(
    catalog: &Catalog,
    unit: &ApiUnitModel,
    body: &StatementTree,
    ctx: &Context,
    include_exc: bool,
) -> crate::Result<MethodEncoding> {
    let env = Env {
        catalog,
        unit,
        ctx,
        universe: predicate_universe(ctx, include_exc),
        axioms: instantiate_axioms(ctx),
        include_exc,
    };
    let last = body.last_index().unwrap_or(0);
    let (encoded, end) = env.stmt(body, 0)?;
    debug_assert_eq!(end, last);
    let formula = Formula::and(vec![index_at(&env.axioms, 0), encoded]);
    Ok(MethodEncoding { formula, last })
}

struct Env<'a> {
    catalog: &'a Catalog,
    unit: &'a ApiUnitModel,
    ctx: &'a Context,
    universe: BTreeSet<Predicate>,
    axioms: Formula<Predicate>,
    include_exc: bool,
}

impl Env<'_> {
    /// Encodes `stmt` starting at step `i`; returns the formula and the step
    /// the statement ends at.
    fn stmt(&self, stmt: &StatementTree, i: usize) -> crate::Result<(Formula<IndexedVar>, usize)> {
        match stmt {
            StatementTree::Seq(children) => {
                let mut parts = Vec::new();
                let mut at = i;
                for child in children {
                    let (f, end) = self.stmt(child, at)?;
                    parts.push(f);
                    at = end;
                }
                Ok((Formula::and(parts), at))
            }
            StatementTree::Op(op) => {
                let j = op.index;
                let kind = &self
                    .unit
                    .field(&op.receiver)
                    .ok_or_else(|| {
                        crate::catalog::CatalogError::UnknownField(op.receiver.clone())
                    })?
                    .kind;
                let expanded = self.catalog.expand(kind, op, self.ctx, self.include_exc)?;
                let relation = Formula::and(vec![
                    index_formula(&expanded.formula, i, j),
                    self.frame_except(&expanded.touched, i, j),
                ]);
                Ok((self.with_abort(relation, i, j), j))
            }
            StatementTree::If { cond, then_branch, else_branch, index, .. } => {
                let j = *index;
                let cnd = index_at(&lower_condition(cond, self.ctx)?, i);
                let (f1, l1) = self.stmt(then_branch, i)?;
                let (f2, l2) = self.stmt(else_branch, i)?;
                let formula = Formula::and(vec![
                    f1,
                    f2,
                    Formula::implies(cnd.clone(), self.copy(l1, j)),
                    Formula::implies(Formula::not(cnd), self.copy(l2, j)),
                ]);
                Ok((formula, j))
            }
            StatementTree::While { cond, index, .. } => {
                let j = *index;
                let cnd_at_exit = index_at(&lower_condition(cond, self.ctx)?, j);
                let exited = Formula::not(cnd_at_exit);
                let formula = Formula::and(vec![
                    index_at(&self.axioms, j),
                    self.with_abort_bare(exited, i, j),
                ]);
                Ok((formula, j))
            }
        }
    }

    /// `p@j <-> p@i` for every universe predicate outside `touched`.
    fn frame_except(
        &self,
        touched: &BTreeSet<Predicate>,
        i: usize,
        j: usize,
    ) -> Formula<IndexedVar> {
        Formula::and(
            self.universe
                .iter()
                .filter(|p| !touched.contains(*p))
                .map(|p| Self::carry(p, i, j))
                .collect(),
        )
    }

    /// `p@j <-> p@from` over the whole universe.
    fn copy(&self, from: usize, j: usize) -> Formula<IndexedVar> {
        if from == j {
            return Formula::Const(true);
        }
        Formula::and(self.universe.iter().map(|p| Self::carry(p, from, j)).collect())
    }

    fn carry(p: &Predicate, from: usize, to: usize) -> Formula<IndexedVar> {
        Formula::iff(
            Formula::var(IndexedVar::new(p.clone(), to)),
            Formula::var(IndexedVar::new(p.clone(), from)),
        )
    }

    /// Wraps an operator relation with the step axioms and, in exception-aware
    /// universes, the abort split on `exc@i`.
    fn with_abort(&self, relation: Formula<IndexedVar>, i: usize, j: usize) -> Formula<IndexedVar> {
        Formula::and(vec![index_at(&self.axioms, j), self.with_abort_bare(relation, i, j)])
    }

    /// The abort split alone: callers add their own step axioms.
    fn with_abort_bare(
        &self,
        relation: Formula<IndexedVar>,
        i: usize,
        j: usize,
    ) -> Formula<IndexedVar> {
        if !self.include_exc {
            return relation;
        }
        let raised = Formula::var(IndexedVar::new(Predicate::Exc, i));
        Formula::and(vec![
            Formula::implies(raised.clone(), self.copy(i, j)),
            Formula::implies(Formula::not(raised), relation),
        ])
    }
}
