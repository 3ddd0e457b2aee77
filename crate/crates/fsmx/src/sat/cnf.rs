//! Tseitin compilation of formulas into CNF.
//!
//! Every named variable of the source formula is registered first, in sorted
//! order, so variable numbering is independent of formula structure. Each
//! connective gets a definitional equivalence, which makes the translation
//! model-preserving: models of the CNF restricted to the original variables
//! are exactly the models of the formula, and each extends uniquely.

use std::collections::BTreeSet;

use crate::formula::Formula;

use super::{Lit, Var};

#[derive(Debug, Clone)]
pub struct CnfInstance<V> {
    originals: Vec<V>,
    var_count: usize,
    clauses: Vec<Vec<Lit>>,
}

impl<V: Ord + Clone> CnfInstance<V> {
    /// Compiles a formula. `also_register` names variables that must exist in
    /// the instance even when the formula never mentions them (they stay
    /// unconstrained and enumerate freely).
    pub fn new(formula: &Formula<V>, also_register: &[V]) -> CnfInstance<V> {
        let mut names: BTreeSet<V> = formula.vars();
        names.extend(also_register.iter().cloned());
        let originals: Vec<V> = names.into_iter().collect();
        let mut builder = Builder {
            next_var: originals.len() as u32,
            clauses: Vec::new(),
        };
        let folded = formula.fold_constants();
        match &folded {
            Formula::Const(true) => {}
            Formula::Const(false) => builder.clauses.push(Vec::new()),
            f => {
                let lookup = |v: &V| {
                    let idx = originals.binary_search(v).expect("registered variable");
                    Var(idx as u32)
                };
                for conjunct in f.clone().into_conjuncts() {
                    let lit = builder.define(&conjunct, &lookup);
                    builder.clauses.push(vec![lit]);
                }
            }
        }
        CnfInstance {
            originals,
            var_count: builder.next_var as usize,
            clauses: builder.clauses,
        }
    }

    /// The solver variable of an original formula variable.
    pub fn var(&self, v: &V) -> Option<Var> {
        self.originals.binary_search(v).ok().map(|i| Var(i as u32))
    }

    pub fn lit(&self, v: &V, positive: bool) -> Option<Lit> {
        self.var(v).map(|var| Lit::new(var, positive))
    }

    /// Original variables in registration order; `Var(i)` names the `i`-th.
    pub fn originals(&self) -> &[V] {
        &self.originals
    }

    pub fn original_count(&self) -> usize {
        self.originals.len()
    }

    /// Total variable count including Tseitin definitions.
    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }
}

struct Builder {
    next_var: u32,
    clauses: Vec<Vec<Lit>>,
}

impl Builder {
    fn fresh(&mut self) -> Lit {
        let v = Var(self.next_var);
        self.next_var += 1;
        Lit::positive(v)
    }

    fn define<V: Ord>(&mut self, f: &Formula<V>, lookup: &impl Fn(&V) -> Var) -> Lit {
        match f {
            Formula::Const(_) => unreachable!("constants are folded away"),
            Formula::Var(v) => Lit::positive(lookup(v)),
            Formula::Not(x) => self.define(x, lookup).negate(),
            Formula::And(xs) => {
                let lits: Vec<Lit> = xs.iter().map(|x| self.define(x, lookup)).collect();
                self.define_and(&lits)
            }
            Formula::Or(xs) => {
                let lits: Vec<Lit> = xs.iter().map(|x| self.define(x, lookup)).collect();
                self.define_or(&lits)
            }
            Formula::Implies(a, b) => {
                let la = self.define(a, lookup).negate();
                let lb = self.define(b, lookup);
                self.define_or(&[la, lb])
            }
            Formula::Iff(a, b) => {
                let la = self.define(a, lookup);
                let lb = self.define(b, lookup);
                let g = self.fresh();
                self.clauses.push(vec![g.negate(), la.negate(), lb]);
                self.clauses.push(vec![g.negate(), la, lb.negate()]);
                self.clauses.push(vec![g, la, lb]);
                self.clauses.push(vec![g, la.negate(), lb.negate()]);
                g
            }
        }
    }

    fn define_and(&mut self, lits: &[Lit]) -> Lit {
        let g = self.fresh();
        let mut long = vec![g];
        for &l in lits {
            self.clauses.push(vec![g.negate(), l]);
            long.push(l.negate());
        }
        self.clauses.push(long);
        g
    }

    fn define_or(&mut self, lits: &[Lit]) -> Lit {
        let g = self.fresh();
        let mut long = vec![g.negate()];
        for &l in lits {
            self.clauses.push(vec![g, l.negate()]);
            long.push(l);
        }
        self.clauses.push(long);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> Formula<String> {
        Formula::var(name.to_string())
    }

    /// Counts CNF models over every variable (originals and definitions) and
    /// formula models over the original variables, by brute force.
    fn model_counts(formula: &Formula<String>) -> (usize, usize) {
        let instance = CnfInstance::new(formula, &[]);
        let n = instance.var_count();
        assert!(n <= 16);
        let mut cnf_models = 0;
        for bits in 0..(1u32 << n) {
            let sat = instance.clauses().iter().all(|cl| {
                cl.iter()
                    .any(|l| (bits >> l.var().index() & 1 == 1) == l.is_positive())
            });
            if sat {
                cnf_models += 1;
            }
        }
        let names: Vec<String> = instance.originals().to_vec();
        let mut formula_models = 0;
        for bits in 0..(1u32 << names.len()) {
            let lookup = |x: &String| {
                let i = names.iter().position(|n| n == x).unwrap();
                bits >> i & 1 == 1
            };
            if formula.eval(&lookup) {
                formula_models += 1;
            }
        }
        (cnf_models, formula_models)
    }

    #[test]
    fn translation_preserves_model_counts() {
        let samples = vec![
            v("a"),
            Formula::not(v("a")),
            Formula::and(vec![v("a"), v("b")]),
            Formula::or(vec![v("a"), v("b"), v("c")]),
            Formula::implies(v("a"), v("b")),
            Formula::iff(v("a"), Formula::or(vec![v("b"), Formula::not(v("c"))])),
            Formula::iff(
                Formula::implies(v("a"), Formula::and(vec![v("b"), v("c")])),
                Formula::not(Formula::or(vec![v("a"), v("d")])),
            ),
            Formula::and(vec![
                Formula::or(vec![v("a"), v("b")]),
                Formula::or(vec![Formula::not(v("a")), v("c")]),
                Formula::iff(v("c"), v("d")),
            ]),
        ];
        for formula in samples {
            let (cnf, orig) = model_counts(&formula);
            assert_eq!(cnf, orig, "mismatch for {formula}");
        }
    }

    #[test]
    fn constants_compile_to_trivial_instances() {
        let t = CnfInstance::new(&Formula::<String>::Const(true), &[]);
        assert!(t.clauses().is_empty());
        let contradiction = Formula::and(vec![v("a"), Formula::not(v("a"))]);
        let f = CnfInstance::new(&contradiction.fold_constants(), &[]);
        // not folded to a constant: two unit clauses over one variable
        assert_eq!(f.original_count(), 1);
        let direct = CnfInstance::new(&Formula::<String>::Const(false), &[]);
        assert_eq!(direct.clauses(), &[Vec::new()]);
    }

    #[test]
    fn variables_are_numbered_in_sorted_order() {
        let formula = Formula::and(vec![v("zeta"), v("alpha"), v("mid")]);
        let instance = CnfInstance::new(&formula, &["beta".to_string()]);
        assert_eq!(
            instance.originals(),
            &["alpha", "beta", "mid", "zeta"].map(String::from)
        );
        assert_eq!(instance.var(&"alpha".to_string()), Some(Var(0)));
        assert_eq!(instance.var(&"zeta".to_string()), Some(Var(3)));
        assert_eq!(instance.var(&"nope".to_string()), None);
    }
}
