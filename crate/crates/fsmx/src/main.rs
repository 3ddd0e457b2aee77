use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use fsmx::emit::{emit_dot, emit_json, FsmDoc};
use fsmx::fsm::{first_mismatch, OracleError, OracleMode};
use fsmx::sat::{parse_dimacs, CdclSolver, SatOutcome, SolverBackend};
use fsmx::{diff, load_plan, Analyzer};

#[derive(Parser)]
#[command(
    name = "fsmx",
    version,
    about = "Extracts guarded finite-state machines from collection-backed API implementations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract a machine from a source unit and write DOT and JSON artifacts.
    Extract {
        /// Run configuration (JSON).
        config: PathBuf,
    },
    /// Compare two machine JSON documents. Exits 3 when behavior changed.
    Diff {
        a: PathBuf,
        b: PathBuf,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Re-derive the transition relation by brute force and compare it with
    /// the solver-backed extraction. Oversized bodies are skipped.
    OracleCheck {
        /// Run configuration (JSON).
        config: PathBuf,
    },
    /// Solve a DIMACS CNF file with the embedded solver.
    SolveDimacs { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(u8::try_from(err.exit_code()).unwrap_or(2))
        }
    }
}

fn run(command: Command) -> fsmx::Result<u8> {
    match command {
        Command::Extract { config } => {
            let plan = load_plan(&config)?;
            let analyzer = Analyzer::new(plan.unit, plan.catalog, plan.options)?;
            let (fsm, stats) = analyzer.extract()?;
            if let Some(dir) = plan.dot_path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            if let Some(dir) = plan.json_path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&plan.dot_path, emit_dot(&fsm))?;
            std::fs::write(&plan.json_path, emit_json(&fsm))?;
            println!(
                "{}: {} states, {} transitions, {} solver calls",
                plan.source_path.display(),
                fsm.states().len(),
                fsm.transitions().len(),
                stats.total_solver_calls()
            );
            println!("wrote {}", plan.dot_path.display());
            println!("wrote {}", plan.json_path.display());
            Ok(0)
        }
        Command::Diff { a, b, json } => {
            let read = |path: &PathBuf| -> fsmx::Result<fsmx::Fsm> {
                let text = std::fs::read_to_string(path)?;
                Ok(FsmDoc::from_json_str(&text)?.to_fsm()?)
            };
            let fsm_a = read(&a)?;
            let fsm_b = read(&b)?;
            let report = diff::diff(&fsm_a, &fsm_b)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                );
            } else {
                print!("{}", report.render());
            }
            Ok(if report.behavior_changed { 3 } else { 0 })
        }
        Command::OracleCheck { config } => {
            let plan = load_plan(&config)?;
            let mut options = plan.options;
            // The oracle enumerates the full relation; compare apples to
            // apples by keeping unreachable states in the extraction too.
            options.prune_unreachable = false;
            let analyzer = Analyzer::new(plan.unit, plan.catalog, options)?;
            let (fsm, _) = analyzer.extract()?;
            let outcomes = analyzer.oracle_relation(OracleMode::exhaustive())?;
            for outcome in &outcomes {
                if outcome.skipped {
                    println!(
                        "skip {} ({} variables over the exhaustive limit)",
                        outcome.method, outcome.vars
                    );
                } else {
                    println!(
                        "ok   {} ({} variables, {} transitions)",
                        outcome.method,
                        outcome.vars,
                        outcome.transitions.len()
                    );
                }
            }
            if let Some(method) = first_mismatch(&fsm, &outcomes) {
                return Err(OracleError::Mismatch { method }.into());
            }
            Ok(0)
        }
        Command::SolveDimacs { file } => {
            let text = std::fs::read_to_string(&file)?;
            let parsed = parse_dimacs(&text)?;
            let mut solver = CdclSolver::new();
            solver.ensure_vars(parsed.num_vars);
            for clause in &parsed.clauses {
                solver.add_clause(clause);
            }
            match solver.solve(&[])? {
                SatOutcome::Sat(model) => {
                    println!("s SATISFIABLE");
                    let mut line = String::from("v");
                    for (index, value) in model.iter().enumerate() {
                        let lit = (index + 1) as i64;
                        line.push_str(&format!(" {}", if *value { lit } else { -lit }));
                    }
                    line.push_str(" 0");
                    println!("{line}");
                }
                SatOutcome::Unsat => println!("s UNSATISFIABLE"),
            }
            Ok(0)
        }
    }
}
