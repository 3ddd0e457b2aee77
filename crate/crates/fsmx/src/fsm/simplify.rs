//! Two-level minimization of guard DNFs (Quine-McCluskey with a greedy
//! cover), used only for rendering. The minimized form is verified against
//! the original rows by truth table before it is returned.

use std::collections::{BTreeMap, BTreeSet};

use crate::predicate::Predicate;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimpleGuard {
    True,
    False,
    /// Cubes of (atom, polarity) literals; the guard is their disjunction.
    Dnf(Vec<Vec<(Predicate, bool)>>),
}

impl SimpleGuard {
    pub fn render(&self) -> String {
        match self {
            SimpleGuard::True => "true".to_string(),
            SimpleGuard::False => "false".to_string(),
            SimpleGuard::Dnf(cubes) => {
                let rendered: Vec<String> = cubes
                    .iter()
                    .map(|cube| {
                        let lits: Vec<String> =
                            cube.iter().map(|(p, v)| literal(p, *v)).collect();
                        lits.join(" ∧ ")
                    })
                    .collect();
                rendered.join(" ∨ ")
            }
        }
    }
}

fn literal(pred: &Predicate, value: bool) -> String {
    match pred {
        Predicate::EqV(a, b) | Predicate::EqC(a, b) => {
            if value {
                format!("{a}={b}")
            } else {
                format!("{a}≠{b}")
            }
        }
        other => {
            if value {
                other.to_string()
            } else {
                format!("¬{other}")
            }
        }
    }
}

/// An implicant: `bits` gives the polarity of every position whose bit is set
/// in `mask`; positions outside `mask` are don't-cares.
type Implicant = (u32, u32);

fn covers(imp: Implicant, minterm: u32) -> bool {
    minterm & imp.1 == imp.0
}

pub(crate) fn minimize(atoms: &[Predicate], rows: &[BTreeMap<Predicate, bool>]) -> SimpleGuard {
    let n = atoms.len();
    assert!(n <= 20, "guard atom set too large to minimize: {n}");
    if rows.is_empty() {
        return SimpleGuard::False;
    }
    if rows.len() == 1usize << n {
        return SimpleGuard::True;
    }
    let minterms: BTreeSet<u32> = rows
        .iter()
        .map(|row| {
            let mut bits = 0u32;
            for (k, atom) in atoms.iter().enumerate() {
                if row[atom] {
                    bits |= 1 << k;
                }
            }
            bits
        })
        .collect();
    let full_mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };

    let mut current: BTreeSet<Implicant> =
        minterms.iter().map(|&m| (m, full_mask)).collect();
    let mut primes: BTreeSet<Implicant> = BTreeSet::new();
    while !current.is_empty() {
        let items: Vec<Implicant> = current.iter().copied().collect();
        let mut combined: BTreeSet<Implicant> = BTreeSet::new();
        let mut next: BTreeSet<Implicant> = BTreeSet::new();
        for (i, &a) in items.iter().enumerate() {
            for &b in &items[i + 1..] {
                if a.1 != b.1 {
                    continue;
                }
                let delta = a.0 ^ b.0;
                if delta.count_ones() == 1 && delta & a.1 != 0 {
                    next.insert((a.0 & !delta, a.1 & !delta));
                    combined.insert(a);
                    combined.insert(b);
                }
            }
        }
        for &imp in &items {
            if !combined.contains(&imp) {
                primes.insert(imp);
            }
        }
        current = next;
    }

    let primes: Vec<Implicant> = primes.into_iter().collect();
    let mut remaining: BTreeSet<u32> = minterms.clone();
    let mut selected: BTreeSet<Implicant> = BTreeSet::new();
    for &m in &minterms {
        let covering: Vec<Implicant> =
            primes.iter().copied().filter(|&p| covers(p, m)).collect();
        if covering.len() == 1 {
            selected.insert(covering[0]);
        }
    }
    for &imp in &selected {
        remaining.retain(|&m| !covers(imp, m));
    }
    while !remaining.is_empty() {
        let best = primes
            .iter()
            .copied()
            .filter(|p| !selected.contains(p))
            .max_by_key(|&p| {
                let gain = remaining.iter().filter(|&&m| covers(p, m)).count();
                // Prefer wider cubes (fewer cared bits) on equal gain, then
                // lower implicant order for determinism.
                (gain, usize::try_from(p.1.count_ones()).unwrap_or(0), std::cmp::Reverse(p))
            })
            .expect("prime implicants must cover every minterm");
        selected.insert(best);
        remaining.retain(|&m| !covers(best, m));
    }

    let mut cubes: Vec<Vec<(Predicate, bool)>> = selected
        .iter()
        .map(|&(bits, mask)| {
            (0..n)
                .filter(|k| mask >> k & 1 == 1)
                .map(|k| (atoms[k].clone(), bits >> k & 1 == 1))
                .collect()
        })
        .collect();
    cubes.sort();

    if cubes.iter().any(Vec::is_empty) {
        // An empty cube is the constant true; the full-cover case above
        // should already have caught this, but the cover can also collapse.
        return SimpleGuard::True;
    }
    debug_assert!(verify(atoms, &minterms, &cubes));
    if !verify(atoms, &minterms, &cubes) {
        let raw: Vec<Vec<(Predicate, bool)>> = rows
            .iter()
            .map(|row| row.iter().map(|(p, v)| (p.clone(), *v)).collect())
            .collect();
        return SimpleGuard::Dnf(raw);
    }
    SimpleGuard::Dnf(cubes)
}

fn verify(atoms: &[Predicate], minterms: &BTreeSet<u32>, cubes: &[Vec<(Predicate, bool)>]) -> bool {
    let n = atoms.len();
    let position: BTreeMap<&Predicate, usize> =
        atoms.iter().enumerate().map(|(k, p)| (p, k)).collect();
    for bits in 0..(1u32 << n) {
        let hit = cubes.iter().any(|cube| {
            cube.iter()
                .all(|(p, v)| (bits >> position[p] & 1 == 1) == *v)
        });
        if hit != minterms.contains(&bits) {
            return false;
        }
    }
    true
}
