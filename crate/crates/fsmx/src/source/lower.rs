//! Lowering of parsed branch conditions into predicate formulas.

use crate::formula::Formula;
use crate::predicate::{Context, Predicate, SymbolError};

use super::ast::{Arg, ConditionExpr};

/// Translates a branch condition into a formula over the given context.
///
/// Equality between two collection symbols becomes `eq` over collections,
/// equality between two value symbols becomes `eq` over values; mixing the
/// two sorts is an error. Comparing a symbol with itself folds to a constant.
pub fn lower_condition(
    cond: &ConditionExpr,
    ctx: &Context,
) -> Result<Formula<Predicate>, SymbolError> {
    match cond {
        ConditionExpr::ValueEq(a, b) => lower_eq(a, b, ctx),
        ConditionExpr::ValueNeq(a, b) => Ok(Formula::not(lower_eq(a, b, ctx)?)),
        ConditionExpr::Contains(c, v) => {
            require_collection(c, ctx)?;
            let v = arg_symbol(v, ctx)?;
            require_value(&v, ctx)?;
            Ok(Formula::var(Predicate::contains(c, &v)))
        }
        ConditionExpr::IsEmpty(c) => {
            require_collection(c, ctx)?;
            Ok(Formula::var(Predicate::empty(c)))
        }
        ConditionExpr::Not(inner) => Ok(Formula::not(lower_condition(inner, ctx)?)),
        ConditionExpr::And(a, b) => Ok(Formula::and(vec![
            lower_condition(a, ctx)?,
            lower_condition(b, ctx)?,
        ])),
        ConditionExpr::Or(a, b) => Ok(Formula::or(vec![
            lower_condition(a, ctx)?,
            lower_condition(b, ctx)?,
        ])),
    }
}

fn lower_eq(a: &Arg, b: &Arg, ctx: &Context) -> Result<Formula<Predicate>, SymbolError> {
    let sa = arg_symbol(a, ctx)?;
    let sb = arg_symbol(b, ctx)?;
    let a_coll = ctx.has_collection(&sa);
    let b_coll = ctx.has_collection(&sb);
    if a_coll != b_coll {
        return Err(SymbolError::BadPredicate {
            input: format!("{sa} == {sb}"),
            reason: "cannot compare a collection with a value".to_string(),
        });
    }
    let pred = if a_coll {
        Predicate::eq_collections(&sa, &sb)
    } else {
        require_value(&sa, ctx)?;
        require_value(&sb, ctx)?;
        Predicate::eq_values(&sa, &sb)
    };
    Ok(match pred {
        Some(p) => Formula::var(p),
        None => Formula::Const(true),
    })
}

fn arg_symbol(a: &Arg, ctx: &Context) -> Result<String, SymbolError> {
    let sym = a.symbol();
    if matches!(a, Arg::Ident(_)) && !ctx.has_symbol(&sym) {
        return Err(SymbolError::Unknown(sym));
    }
    Ok(sym)
}

fn require_collection(name: &str, ctx: &Context) -> Result<(), SymbolError> {
    if ctx.has_collection(name) {
        Ok(())
    } else if ctx.has_symbol(name) {
        Err(SymbolError::BadPredicate {
            input: name.to_string(),
            reason: "expected a collection symbol".to_string(),
        })
    } else {
        Err(SymbolError::Unknown(name.to_string()))
    }
}

fn require_value(name: &str, ctx: &Context) -> Result<(), SymbolError> {
    if ctx.has_value(name) {
        Ok(())
    } else if ctx.has_collection(name) {
        Err(SymbolError::BadPredicate {
            input: name.to_string(),
            reason: "expected a value symbol".to_string(),
        })
    } else {
        Err(SymbolError::Unknown(name.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::SymbolKind;

    fn ctx() -> Context {
        let mut c = Context::default();
        c.add_collection("idSet", SymbolKind::State).unwrap();
        c.add_value("idMain", SymbolKind::Indeterminacy).unwrap();
        c.add_value("idOpt", SymbolKind::Indeterminacy).unwrap();
        c.add_value("null", SymbolKind::State).unwrap();
        c
    }

    #[test]
    fn neq_lowers_to_negated_equality() {
        let cond = ConditionExpr::ValueNeq(
            Arg::Ident("idMain".into()),
            Arg::Ident("idOpt".into()),
        );
        let f = lower_condition(&cond, &ctx()).unwrap();
        let expected = Formula::not(Formula::var(Predicate::eq_values("idMain", "idOpt").unwrap()));
        assert_eq!(f, expected);
    }

    #[test]
    fn self_equality_folds_to_true() {
        let cond = ConditionExpr::ValueEq(Arg::Null, Arg::Null);
        assert_eq!(lower_condition(&cond, &ctx()).unwrap(), Formula::Const(true));
    }

    #[test]
    fn null_comparison_uses_the_null_constant() {
        let cond = ConditionExpr::ValueEq(Arg::Ident("idMain".into()), Arg::Null);
        let f = lower_condition(&cond, &ctx()).unwrap();
        assert_eq!(f, Formula::var(Predicate::eq_values("idMain", "null").unwrap()));
    }

    #[test]
    fn mixed_sorts_are_rejected() {
        let cond = ConditionExpr::ValueEq(Arg::Ident("idSet".into()), Arg::Null);
        assert!(matches!(
            lower_condition(&cond, &ctx()),
            Err(SymbolError::BadPredicate { .. })
        ));
    }

    #[test]
    fn contains_checks_sorts() {
        let good = ConditionExpr::Contains("idSet".into(), Arg::Ident("idMain".into()));
        assert!(lower_condition(&good, &ctx()).is_ok());
        let bad = ConditionExpr::Contains("idMain".into(), Arg::Null);
        assert!(matches!(
            lower_condition(&bad, &ctx()),
            Err(SymbolError::BadPredicate { .. })
        ));
    }

    #[test]
    fn unknown_symbol_is_reported() {
        let cond = ConditionExpr::IsEmpty("ghost".into());
        assert!(matches!(
            lower_condition(&cond, &ctx()),
            Err(SymbolError::Unknown(name)) if name == "ghost"
        ));
    }
}
