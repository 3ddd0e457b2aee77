//! A small CDCL solver: two-watched-literal propagation, first-UIP clause
//! learning, activity-guided decisions, phase saving, and Luby restarts.
//! Decisions scan variables linearly and break activity ties toward the
//! lowest index, so runs are fully deterministic.

use super::{Lit, SatOutcome, SolverBackend, SolverError, Var};

const ACTIVITY_DECAY: f64 = 0.95;
const ACTIVITY_RESCALE: f64 = 1e100;
const RESTART_UNIT: u64 = 64;

type ClauseRef = usize;

#[derive(Debug)]
struct Clause {
    lits: Vec<Lit>,
}

#[derive(Debug, Default)]
pub struct CdclSolver {
    clauses: Vec<Clause>,
    /// For each literal index, the clauses currently watching that literal.
    watches: Vec<Vec<ClauseRef>>,
    assign: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    saved_phase: Vec<bool>,
    activity: Vec<f64>,
    activity_inc: f64,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    prop_head: usize,
    /// Set once the clause set is unsatisfiable regardless of assumptions.
    hard_unsat: bool,
    restarts: u64,
    seen: Vec<bool>,
}

impl CdclSolver {
    pub fn new() -> CdclSolver {
        CdclSolver { activity_inc: 1.0, ..CdclSolver::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.assign.len()
    }

    fn grow_to(&mut self, n: usize) {
        while self.assign.len() < n {
            self.assign.push(None);
            self.level.push(0);
            self.reason.push(None);
            self.saved_phase.push(false);
            self.activity.push(0.0);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
        }
    }

    fn value(&self, l: Lit) -> Option<bool> {
        self.assign[l.var().index()].map(|b| b == l.is_positive())
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<ClauseRef>) {
        debug_assert!(self.value(l).is_none());
        let v = l.var().index();
        self.assign[v] = Some(l.is_positive());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, target: u32) {
        if self.decision_level() <= target {
            return;
        }
        let keep = self.trail_lim[target as usize];
        for &l in &self.trail[keep..] {
            let v = l.var().index();
            self.saved_phase[v] = l.is_positive();
            self.assign[v] = None;
            self.reason[v] = None;
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(target as usize);
        self.prop_head = self.trail.len();
    }

    fn attach(&mut self, cref: ClauseRef) {
        let c = &self.clauses[cref];
        debug_assert!(c.lits.len() >= 2);
        self.watches[c.lits[0].index()].push(cref);
        self.watches[c.lits[1].index()].push(cref);
    }

    fn propagate(&mut self) -> Option<ClauseRef> {
        while self.prop_head < self.trail.len() {
            let p = self.trail[self.prop_head];
            self.prop_head += 1;
            let false_lit = p.negate();
            let mut ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let mut i = 0;
            while i < ws.len() {
                let cref = ws[i];
                let first = {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                    debug_assert_eq!(lits[1], false_lit);
                    lits[0]
                };
                if self.value(first) == Some(true) {
                    i += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let cand = self.clauses[cref].lits[k];
                    if self.value(cand) != Some(false) {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[cand.index()].push(cref);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if self.value(first) == Some(false) {
                    self.watches[false_lit.index()] = ws;
                    self.prop_head = self.trail.len();
                    return Some(cref);
                }
                self.enqueue(first, Some(cref));
                i += 1;
            }
            self.watches[false_lit.index()] = ws;
        }
        None
    }

    fn bump(&mut self, v: Var) {
        self.activity[v.index()] += self.activity_inc;
        if self.activity[v.index()] > ACTIVITY_RESCALE {
            for a in &mut self.activity {
                *a /= ACTIVITY_RESCALE;
            }
            self.activity_inc /= ACTIVITY_RESCALE;
        }
    }

    /// First-UIP conflict analysis. Returns the learned clause (asserting
    /// literal first) and the level to backtrack to.
    fn analyze(&mut self, mut confl: ClauseRef) -> (Vec<Lit>, u32) {
        let current = self.decision_level();
        let mut learned: Vec<Lit> = Vec::new();
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        loop {
            let reason_lits = self.clauses[confl].lits.clone();
            for q in reason_lits {
                if p == Some(q) {
                    continue;
                }
                let v = q.var();
                if !self.seen[v.index()] && self.level[v.index()] > 0 {
                    self.seen[v.index()] = true;
                    self.bump(v);
                    if self.level[v.index()] >= current {
                        counter += 1;
                    } else {
                        learned.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let uip = self.trail[index];
            self.seen[uip.var().index()] = false;
            counter -= 1;
            if counter == 0 {
                learned.insert(0, uip.negate());
                break;
            }
            p = Some(uip);
            confl = self.reason[uip.var().index()].expect("non-decision has a reason");
        }
        for l in &learned {
            self.seen[l.var().index()] = false;
        }
        let backtrack = if learned.len() == 1 {
            0
        } else {
            let mut best = 1;
            for k in 2..learned.len() {
                if self.level[learned[k].var().index()] > self.level[learned[best].var().index()]
                {
                    best = k;
                }
            }
            learned.swap(1, best);
            self.level[learned[1].var().index()]
        };
        (learned, backtrack)
    }

    fn learn(&mut self, learned: Vec<Lit>, backtrack: u32) {
        self.cancel_until(backtrack);
        let asserting = learned[0];
        if learned.len() == 1 {
            self.enqueue(asserting, None);
            return;
        }
        let cref = self.clauses.len();
        self.clauses.push(Clause { lits: learned });
        self.attach(cref);
        self.enqueue(asserting, Some(cref));
    }

    /// Highest-activity unassigned variable, lowest index winning ties.
    fn decide_var(&self) -> Option<Var> {
        let mut best: Option<(usize, f64)> = None;
        for v in 0..self.assign.len() {
            if self.assign[v].is_some() {
                continue;
            }
            match best {
                Some((_, act)) if act >= self.activity[v] => {}
                _ => best = Some((v, self.activity[v])),
            }
        }
        best.map(|(v, _)| Var(v as u32))
    }

    fn restart_threshold(&self) -> u64 {
        RESTART_UNIT * luby(self.restarts)
    }

    fn verify_model(&self) -> Result<(), SolverError> {
        for c in &self.clauses {
            if !c.lits.iter().any(|&l| self.value(l) == Some(true)) {
                return Err(SolverError::BadModel);
            }
        }
        Ok(())
    }
}

impl SolverBackend for CdclSolver {
    fn ensure_vars(&mut self, n: usize) {
        self.grow_to(n);
    }

    /// Clauses may be added between `solve` calls; the trail is rewound to
    /// the root level first. Tautologies are dropped, literals false at the
    /// root are removed, and an emptied clause marks the instance
    /// unsatisfiable.
    fn add_clause(&mut self, lits: &[Lit]) {
        if self.hard_unsat {
            return;
        }
        self.cancel_until(0);
        let highest = lits.iter().map(|l| l.var().index() + 1).max().unwrap_or(0);
        self.grow_to(highest);

        let mut cleaned: Vec<Lit> = lits.to_vec();
        cleaned.sort();
        cleaned.dedup();
        for pair in cleaned.windows(2) {
            if pair[0].var() == pair[1].var() {
                return; // p and !p: the clause is a tautology
            }
        }
        cleaned.retain(|&l| self.value(l) != Some(false));
        if cleaned.iter().any(|&l| self.value(l) == Some(true)) {
            return;
        }
        match cleaned.len() {
            0 => self.hard_unsat = true,
            1 => {
                self.enqueue(cleaned[0], None);
                if self.propagate().is_some() {
                    self.hard_unsat = true;
                }
            }
            _ => {
                let cref = self.clauses.len();
                self.clauses.push(Clause { lits: cleaned });
                self.attach(cref);
            }
        }
    }

    fn solve(&mut self, assumptions: &[Lit]) -> Result<SatOutcome, SolverError> {
        if self.hard_unsat {
            return Ok(SatOutcome::Unsat);
        }
        let highest = assumptions.iter().map(|l| l.var().index() + 1).max().unwrap_or(0);
        self.grow_to(highest);
        self.cancel_until(0);
        let mut conflicts_since_restart = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                if self.decision_level() == 0 {
                    self.hard_unsat = true;
                    return Ok(SatOutcome::Unsat);
                }
                let (learned, backtrack) = self.analyze(confl);
                self.learn(learned, backtrack);
                self.activity_inc /= ACTIVITY_DECAY;
                conflicts_since_restart += 1;
                if conflicts_since_restart >= self.restart_threshold() {
                    self.restarts += 1;
                    conflicts_since_restart = 0;
                    self.cancel_until(0);
                }
                continue;
            }
            let level = self.decision_level() as usize;
            if level < assumptions.len() {
                let a = assumptions[level];
                match self.value(a) {
                    Some(true) => self.new_decision_level(),
                    Some(false) => {
                        self.cancel_until(0);
                        return Ok(SatOutcome::Unsat);
                    }
                    None => {
                        self.new_decision_level();
                        self.enqueue(a, None);
                    }
                }
                continue;
            }
            match self.decide_var() {
                Some(v) => {
                    self.new_decision_level();
                    let phase = self.saved_phase[v.index()];
                    self.enqueue(Lit::new(v, phase), None);
                }
                None => {
                    self.verify_model()?;
                    let model = self.assign.iter().map(|a| a.unwrap()).collect();
                    self.cancel_until(0);
                    return Ok(SatOutcome::Sat(model));
                }
            }
        }
    }
}

/// The Luby restart sequence (0-indexed): 1, 1, 2, 1, 1, 2, 4, ...
fn luby(mut x: u64) -> u64 {
    let (mut size, mut seq) = (1u64, 0u64);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1 << seq
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(n: i64) -> Lit {
        Lit::from_dimacs(n).unwrap()
    }

    fn clause(solver: &mut CdclSolver, lits: &[i64]) {
        let lits: Vec<Lit> = lits.iter().map(|&n| lit(n)).collect();
        solver.add_clause(&lits);
    }

    /// Every clause of the pigeonhole principle for `holes + 1` pigeons.
    fn pigeonhole(solver: &mut CdclSolver, holes: i64) {
        let var = |pigeon: i64, hole: i64| pigeon * holes + hole + 1;
        for p in 0..=holes {
            let row: Vec<i64> = (0..holes).map(|h| var(p, h)).collect();
            clause(solver, &row);
        }
        for h in 0..holes {
            for p1 in 0..=holes {
                for p2 in (p1 + 1)..=holes {
                    clause(solver, &[-var(p1, h), -var(p2, h)]);
                }
            }
        }
    }

    #[test]
    fn simple_instances() {
        let mut s = CdclSolver::new();
        clause(&mut s, &[1, 2]);
        clause(&mut s, &[-1, 2]);
        clause(&mut s, &[-2, 3]);
        match s.solve(&[]).unwrap() {
            SatOutcome::Sat(m) => {
                assert!(m[1] && m[2]);
            }
            SatOutcome::Unsat => panic!("expected sat"),
        }
        clause(&mut s, &[-3]);
        assert_eq!(s.solve(&[]).unwrap(), SatOutcome::Unsat);
    }

    #[test]
    fn pigeonhole_is_unsat_and_needs_learning() {
        let mut s = CdclSolver::new();
        pigeonhole(&mut s, 4);
        assert_eq!(s.solve(&[]).unwrap(), SatOutcome::Unsat);
    }

    #[test]
    fn satisfiable_pigeonhole_variant() {
        // same number of pigeons as holes: satisfiable
        let mut s = CdclSolver::new();
        let holes = 4i64;
        let var = |pigeon: i64, hole: i64| pigeon * holes + hole + 1;
        for p in 0..holes {
            let row: Vec<i64> = (0..holes).map(|h| var(p, h)).collect();
            clause(&mut s, &row);
        }
        for h in 0..holes {
            for p1 in 0..holes {
                for p2 in (p1 + 1)..holes {
                    clause(&mut s, &[-var(p1, h), -var(p2, h)]);
                }
            }
        }
        assert!(matches!(s.solve(&[]).unwrap(), SatOutcome::Sat(_)));
    }

    #[test]
    fn assumptions_do_not_stick() {
        let mut s = CdclSolver::new();
        clause(&mut s, &[1, 2]);
        assert_eq!(s.solve(&[lit(-1), lit(-2)]).unwrap(), SatOutcome::Unsat);
        assert!(matches!(s.solve(&[]).unwrap(), SatOutcome::Sat(_)));
        match s.solve(&[lit(-1)]).unwrap() {
            SatOutcome::Sat(m) => assert!(!m[0] && m[1]),
            SatOutcome::Unsat => panic!("expected sat under -1"),
        }
    }

    #[test]
    fn duplicate_and_tautological_clauses() {
        let mut s = CdclSolver::new();
        clause(&mut s, &[1, 1, 2]);
        clause(&mut s, &[3, -3]);
        clause(&mut s, &[-2]);
        match s.solve(&[]).unwrap() {
            SatOutcome::Sat(m) => assert!(m[0] && !m[1]),
            SatOutcome::Unsat => panic!("expected sat"),
        }
    }

    #[test]
    fn determinism_across_repeated_solves() {
        let mut s1 = CdclSolver::new();
        let mut s2 = CdclSolver::new();
        for s in [&mut s1, &mut s2] {
            clause(s, &[1, 2, 3]);
            clause(s, &[-1, -2]);
            clause(s, &[-2, -3]);
            clause(s, &[2, 3, 4]);
        }
        let a = s1.solve(&[]).unwrap();
        let b = s2.solve(&[]).unwrap();
        assert_eq!(a, b);
        assert_eq!(s1.solve(&[]).unwrap(), a, "resolving does not drift");
    }

    #[test]
    fn empty_clause_means_unsat() {
        let mut s = CdclSolver::new();
        s.add_clause(&[]);
        assert_eq!(s.solve(&[]).unwrap(), SatOutcome::Unsat);
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }
}
