//! Helpers shared by the integration suites: fixture staging, CLI invocation,
//! and a seeded generator of small random units.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use fsmx::source::{
    ApiUnitModel, Arg, ConditionExpr, FieldDecl, MethodModel, PlainOp, StatementTree,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn testdata(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("testdata")
        .join(name)
}

/// Copies the bundled example sources and configs into `dir` so CLI runs can
/// write their outputs next to them.
pub fn stage_examples(dir: &Path) {
    for name in [
        "ExampleImplV1.java",
        "ExampleImplV2.java",
        "example-hashset.json",
        "example-treeset.json",
    ] {
        fs::copy(testdata(name), dir.join(name)).unwrap();
    }
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fsmx")
}

/// Runs the CLI binary in `dir` and returns (exit code, stdout, stderr).
pub fn run_cli(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = std::process::Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn fsmx binary");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

const KINDS: [&str; 3] = ["HashSet", "TreeSet", "LinkedHashSet"];
const MUTATORS: [&str; 3] = ["add", "remove", "clear"];

/// A random unit over at most two collections whose method contexts stay
/// within three values (parameters, literals, and the `null` constant
/// combined). Bodies mix plain operators with `if` and `while` statements.
pub fn gen_unit(rng: &mut ChaCha8Rng) -> ApiUnitModel {
    let n_fields = rng.gen_range(1..=2);
    let fields: Vec<FieldDecl> = (0..n_fields)
        .map(|i| FieldDecl {
            name: format!("f{i}"),
            kind: KINDS[rng.gen_range(0..KINDS.len())].to_string(),
        })
        .collect();
    let has_treeset = fields.iter().any(|f| f.kind == "TreeSet");
    let constructor = number(StatementTree::Seq(
        fields.iter().map(|f| plain(&f.name, "construct", vec![])).collect(),
    ));
    let n_methods = rng.gen_range(1..=2);
    let methods = (0..n_methods)
        .map(|i| gen_method(rng, format!("m{i}"), &fields, has_treeset))
        .collect();
    ApiUnitModel {
        name: "RandUnit".to_string(),
        fields,
        constructor,
        methods,
    }
}

/// A random unit with a single method whose body is exactly one operator.
pub fn gen_single_op_unit(rng: &mut ChaCha8Rng) -> ApiUnitModel {
    let n_fields = rng.gen_range(1..=2);
    let fields: Vec<FieldDecl> = (0..n_fields)
        .map(|i| FieldDecl {
            name: format!("f{i}"),
            kind: KINDS[rng.gen_range(0..KINDS.len())].to_string(),
        })
        .collect();
    let has_treeset = fields.iter().any(|f| f.kind == "TreeSet");
    let constructor = number(StatementTree::Seq(
        fields.iter().map(|f| plain(&f.name, "construct", vec![])).collect(),
    ));
    let (params, pool) = gen_value_pool(rng, has_treeset);
    let field = &fields[rng.gen_range(0..fields.len())];
    let op_name = MUTATORS[rng.gen_range(0..MUTATORS.len())];
    let args = if op_name == "clear" {
        vec![]
    } else {
        vec![pick_arg(rng, &pool)]
    };
    let body = number(StatementTree::Seq(vec![plain(&field.name, op_name, args)]));
    ApiUnitModel {
        name: "RandUnit".to_string(),
        fields,
        constructor,
        methods: vec![MethodModel {
            name: "m0".to_string(),
            params,
            body,
        }],
    }
}

fn gen_method(
    rng: &mut ChaCha8Rng,
    name: String,
    fields: &[FieldDecl],
    has_treeset: bool,
) -> MethodModel {
    let (params, pool) = gen_value_pool(rng, has_treeset);
    let n_stmts = rng.gen_range(1..=3);
    let stmts = (0..n_stmts)
        .map(|_| gen_stmt(rng, fields, &pool, 1))
        .collect();
    MethodModel {
        name,
        params,
        body: number(StatementTree::Seq(stmts)),
    }
}

/// Picks method parameters plus the operand pool, keeping the resulting
/// value context at three symbols or fewer. A `TreeSet` field forces the
/// `null` constant into the context, so it reserves one slot up front.
fn gen_value_pool(rng: &mut ChaCha8Rng, has_treeset: bool) -> (Vec<String>, Vec<Arg>) {
    let mut budget = 3usize;
    let mut pool: Vec<Arg> = Vec::new();
    if has_treeset {
        budget -= 1;
        pool.push(Arg::Null);
    }
    let n_params = rng.gen_range(0..=budget.min(2));
    let params: Vec<String> = (0..n_params).map(|i| format!("p{i}")).collect();
    budget -= n_params;
    pool.extend(params.iter().cloned().map(Arg::Ident));
    if !has_treeset && budget > 0 && rng.gen_bool(0.4) {
        pool.push(Arg::Null);
        budget -= 1;
    }
    if budget > 0 && rng.gen_bool(0.3) {
        pool.push(Arg::Str("a".to_string()));
    }
    if pool.is_empty() {
        pool.push(Arg::Null);
    }
    (params, pool)
}

fn gen_stmt(
    rng: &mut ChaCha8Rng,
    fields: &[FieldDecl],
    pool: &[Arg],
    depth: usize,
) -> StatementTree {
    let roll = rng.gen_range(0..10);
    if depth == 0 || roll < 6 {
        let field = &fields[rng.gen_range(0..fields.len())];
        let op_name = MUTATORS[rng.gen_range(0..MUTATORS.len())];
        let args = if op_name == "clear" {
            vec![]
        } else {
            vec![pick_arg(rng, pool)]
        };
        plain(&field.name, op_name, args)
    } else if roll < 8 {
        StatementTree::If {
            cond: gen_cond(rng, fields, pool, 1),
            then_branch: Box::new(gen_block(rng, fields, pool, depth - 1, 1)),
            else_branch: Box::new(gen_block(rng, fields, pool, depth - 1, 0)),
            index: 0,
            line: 0,
        }
    } else {
        StatementTree::While {
            cond: gen_cond(rng, fields, pool, 1),
            body: Box::new(gen_block(rng, fields, pool, depth - 1, 1)),
            index: 0,
            line: 0,
        }
    }
}

fn gen_block(
    rng: &mut ChaCha8Rng,
    fields: &[FieldDecl],
    pool: &[Arg],
    depth: usize,
    min_stmts: usize,
) -> StatementTree {
    let n = rng.gen_range(min_stmts..=2);
    StatementTree::Seq((0..n).map(|_| gen_stmt(rng, fields, pool, depth)).collect())
}

fn gen_cond(
    rng: &mut ChaCha8Rng,
    fields: &[FieldDecl],
    pool: &[Arg],
    depth: usize,
) -> ConditionExpr {
    let roll = rng.gen_range(0..10);
    let field = fields[rng.gen_range(0..fields.len())].name.clone();
    match roll {
        0..=2 => ConditionExpr::IsEmpty(field),
        3..=4 => ConditionExpr::Contains(field, pick_arg(rng, pool)),
        5..=6 => match pick_distinct_args(rng, pool) {
            Some((a, b)) => ConditionExpr::ValueEq(a, b),
            None => ConditionExpr::IsEmpty(field),
        },
        7 => match pick_distinct_args(rng, pool) {
            Some((a, b)) => ConditionExpr::ValueNeq(a, b),
            None => ConditionExpr::IsEmpty(field),
        },
        8 if depth > 0 => ConditionExpr::Not(Box::new(gen_cond(rng, fields, pool, depth - 1))),
        _ if depth > 0 => ConditionExpr::And(
            Box::new(gen_cond(rng, fields, pool, depth - 1)),
            Box::new(gen_cond(rng, fields, pool, depth - 1)),
        ),
        _ => ConditionExpr::IsEmpty(field),
    }
}

/// Two operands naming distinct symbols, so comparisons in generated
/// conditions are never trivially constant (`while (x == x)` would encode a
/// loop with no exit).
fn pick_distinct_args(rng: &mut ChaCha8Rng, pool: &[Arg]) -> Option<(Arg, Arg)> {
    let a = pick_arg(rng, pool);
    let others: Vec<&Arg> = pool.iter().filter(|b| b.symbol() != a.symbol()).collect();
    if others.is_empty() {
        return None;
    }
    let b = others[rng.gen_range(0..others.len())].clone();
    Some((a, b))
}

fn pick_arg(rng: &mut ChaCha8Rng, pool: &[Arg]) -> Arg {
    pool[rng.gen_range(0..pool.len())].clone()
}

fn plain(receiver: &str, op: &str, args: Vec<Arg>) -> StatementTree {
    StatementTree::Op(PlainOp {
        receiver: receiver.to_string(),
        op: op.to_string(),
        args,
        index: 0,
        line: 0,
    })
}

/// Assigns operator indices in source order with branching statements
/// numbered at their closing brace, the same discipline the parser applies.
fn number(mut tree: StatementTree) -> StatementTree {
    fn walk(t: &mut StatementTree, next: &mut usize) {
        match t {
            StatementTree::Seq(children) => {
                for c in children {
                    walk(c, next);
                }
            }
            StatementTree::Op(op) => {
                *next += 1;
                op.index = *next;
            }
            StatementTree::If {
                then_branch,
                else_branch,
                index,
                ..
            } => {
                walk(then_branch, next);
                walk(else_branch, next);
                *next += 1;
                *index = *next;
            }
            StatementTree::While { body, index, .. } => {
                walk(body, next);
                *next += 1;
                *index = *next;
            }
        }
    }
    let mut n = 0;
    walk(&mut tree, &mut n);
    assert!(tree.numbering_is_valid());
    tree
}
