//! Driving an external DIMACS solver as the backend.
//!
//! Every `solve` call writes the current clause set (with assumptions as
//! extra unit clauses) to a temporary file, runs the configured command with
//! the file path appended, and reads the standard `s`/`v` answer lines.

use std::io::Write as _;
use std::process::Command;

use super::{render_raw_dimacs, Lit, SatOutcome, SolverBackend, SolverError};

#[derive(Debug, Clone)]
pub struct ExternalSolver {
    command: String,
    args: Vec<String>,
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
}

impl ExternalSolver {
    pub fn new(command: impl Into<String>, args: Vec<String>) -> ExternalSolver {
        ExternalSolver { command: command.into(), args, num_vars: 0, clauses: Vec::new() }
    }

    fn fail(&self, detail: impl Into<String>) -> SolverError {
        SolverError::External { command: self.command.clone(), detail: detail.into() }
    }
}

impl SolverBackend for ExternalSolver {
    fn ensure_vars(&mut self, n: usize) {
        self.num_vars = self.num_vars.max(n);
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        for l in lits {
            self.num_vars = self.num_vars.max(l.var().index() + 1);
        }
        self.clauses.push(lits.to_vec());
    }

    fn solve(&mut self, assumptions: &[Lit]) -> Result<SatOutcome, SolverError> {
        let mut clauses = self.clauses.clone();
        for &a in assumptions {
            self.num_vars = self.num_vars.max(a.var().index() + 1);
            clauses.push(vec![a]);
        }
        let text = render_raw_dimacs(self.num_vars, &clauses);

        let mut file = tempfile::Builder::new()
            .prefix("fsmx-cnf-")
            .suffix(".cnf")
            .tempfile()?;
        file.write_all(text.as_bytes())?;
        file.flush()?;

        let output = Command::new(&self.command)
            .args(&self.args)
            .arg(file.path())
            .output()
            .map_err(|e| self.fail(format!("failed to run: {e}")))?;
        let stdout = String::from_utf8_lossy(&output.stdout);
        parse_solver_output(&stdout, self.num_vars)
            .map_err(|detail| self.fail(detail))
    }
}

/// Parses the answer of a DIMACS solver: one `s SATISFIABLE` or
/// `s UNSATISFIABLE` status line and, for satisfiable instances, `v` lines
/// listing the model. Variables missing from the `v` lines default to false.
fn parse_solver_output(stdout: &str, num_vars: usize) -> Result<SatOutcome, String> {
    let mut status: Option<bool> = None;
    let mut model = vec![false; num_vars];
    let mut saw_values = false;
    for line in stdout.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            if status.is_some() {
                return Err("multiple status lines".to_string());
            }
            status = match rest.trim() {
                "SATISFIABLE" => Some(true),
                "UNSATISFIABLE" => Some(false),
                other => return Err(format!("unrecognized status `{other}`")),
            };
        } else if let Some(rest) = line.strip_prefix("v ").or(match line {
            "v" => Some(""),
            _ => None,
        }) {
            saw_values = true;
            for tok in rest.split_whitespace() {
                let n: i64 = tok
                    .parse()
                    .map_err(|_| format!("bad literal `{tok}` in values line"))?;
                if n == 0 {
                    continue;
                }
                let idx = (n.unsigned_abs() - 1) as usize;
                if idx >= num_vars {
                    return Err(format!("literal {n} exceeds the instance's variables"));
                }
                model[idx] = n > 0;
            }
        }
    }
    match status {
        Some(true) if saw_values => Ok(SatOutcome::Sat(model)),
        Some(true) => Err("satisfiable answer without values lines".to_string()),
        Some(false) => Ok(SatOutcome::Unsat),
        None => Err("no status line in solver output".to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_satisfiable_output() {
        let out = "c comment\ns SATISFIABLE\nv 1 -2 3 0\n";
        assert_eq!(
            parse_solver_output(out, 3).unwrap(),
            SatOutcome::Sat(vec![true, false, true])
        );
    }

    #[test]
    fn parses_multiline_values() {
        let out = "s SATISFIABLE\nv -1 -2\nv 3 0\n";
        assert_eq!(
            parse_solver_output(out, 4).unwrap(),
            SatOutcome::Sat(vec![false, false, true, false])
        );
    }

    #[test]
    fn parses_unsatisfiable_output() {
        assert_eq!(
            parse_solver_output("s UNSATISFIABLE\n", 2).unwrap(),
            SatOutcome::Unsat
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_solver_output("hello\n", 1).is_err());
        assert!(parse_solver_output("s MAYBE\n", 1).is_err());
        assert!(parse_solver_output("s SATISFIABLE\n", 1).is_err());
        assert!(parse_solver_output("s SATISFIABLE\nv 9 0\n", 1).is_err());
    }

    #[test]
    fn missing_binary_is_reported() {
        let mut solver = ExternalSolver::new("/nonexistent/sat-solver", vec![]);
        solver.add_clause(&[Lit::from_dimacs(1).unwrap()]);
        match solver.solve(&[]) {
            Err(SolverError::External { command, .. }) => {
                assert_eq!(command, "/nonexistent/sat-solver");
            }
            other => panic!("expected external error, got {other:?}"),
        }
    }
}
