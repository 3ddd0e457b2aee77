//! DIMACS CNF reading and writing.

use std::fmt::{Display, Write as _};

use super::{CnfInstance, Lit, SolverError};

/// Renders an instance as DIMACS CNF. Original variables carry `c`-comment
/// name lines; Tseitin definitions are left unnamed.
pub fn render_dimacs<V: Display + Ord + Clone>(instance: &CnfInstance<V>) -> String {
    let mut out = String::new();
    for (i, name) in instance.originals().iter().enumerate() {
        let _ = writeln!(out, "c var {} = {}", i + 1, name);
    }
    out.push_str(&render_raw_dimacs(
        instance.var_count(),
        instance.clauses(),
    ));
    out
}

/// DIMACS body without name comments.
pub fn render_raw_dimacs(num_vars: usize, clauses: &[Vec<Lit>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", num_vars, clauses.len());
    for clause in clauses {
        for lit in clause {
            let _ = write!(out, "{} ", lit.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedDimacs {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
}

/// Parses DIMACS CNF text. Clauses may span lines; each must end with `0`.
pub fn parse_dimacs(text: &str) -> Result<ParsedDimacs, SolverError> {
    let err = |line: usize, msg: &str| SolverError::Dimacs { line, msg: msg.to_string() };
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut last_line = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if header.is_some() {
                return Err(err(lineno, "duplicate header"));
            }
            let fields: Vec<&str> = rest.split_whitespace().collect();
            match fields.as_slice() {
                ["cnf", vars, clauses] => {
                    let v = vars.parse().map_err(|_| err(lineno, "bad variable count"))?;
                    let c = clauses.parse().map_err(|_| err(lineno, "bad clause count"))?;
                    header = Some((v, c));
                }
                _ => return Err(err(lineno, "expected `p cnf <vars> <clauses>`")),
            }
            continue;
        }
        let (num_vars, _) = header.ok_or_else(|| err(lineno, "clause before header"))?;
        for tok in line.split_whitespace() {
            let n: i64 = tok.parse().map_err(|_| err(lineno, "literal is not an integer"))?;
            if n == 0 {
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            let lit = Lit::from_dimacs(n).ok_or_else(|| err(lineno, "literal out of range"))?;
            if lit.var().index() >= num_vars {
                return Err(err(lineno, "literal exceeds declared variable count"));
            }
            current.push(lit);
        }
    }
    let (num_vars, declared) = header.ok_or_else(|| err(last_line, "missing header"))?;
    if !current.is_empty() {
        return Err(err(last_line, "last clause is not terminated by 0"));
    }
    if clauses.len() != declared {
        return Err(err(last_line, "clause count does not match the header"));
    }
    Ok(ParsedDimacs { num_vars, clauses })
}
