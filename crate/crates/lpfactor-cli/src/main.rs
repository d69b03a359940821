//! Command-line front end for the operator factorization library.
//!
//! Each verb maps onto one library entry point. Operators and expressions are
//! read in the shared text grammar, either inline or from a file path. Output
//! is a readable report by default; `--json` switches to the machine form
//! documented in `docs/json-output.md`.
//!
//! Exit codes are a function of the error class: 0 for a computed result,
//! 1 for a mathematical failure (no simple root, wrong order, a suite with
//! red fixtures), 2 for malformed arguments or input text.

use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lpfactor::expr::{self, DEFAULT_ZERO_SEED};
use lpfactor::factor::{
    factor2, factor2_auto, factor3, factor3_auto, invariant_hierarchy, Factorization2,
    Factorization3, InvariantSet,
};
use lpfactor::laplace::{
    bloch_reduce, cartan_matrix, closure_identity_check, dn_sequence, laplace_chain,
    laplace_invariants, ChainClosure, ClosureKind, Direction, HyperbolicOp, IntMatrix,
    LaplaceChain, Termination,
};
use lpfactor::parse::{parse_expr, parse_operator};
use lpfactor::verify::{self, SuiteReport};
use lpfactor::{Expr, Lpdo, ZeroCfg};

#[derive(Parser)]
#[command(
    name = "lpfactor",
    version,
    about = "Factor bivariate linear partial differential operators and \
             iterate their transform chains"
)]
struct Cli {
    /// Emit machine-readable JSON instead of the readable report
    #[arg(long, global = true)]
    json: bool,

    /// Seed for the randomized zero test (default is a fixed documented constant)
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Factor an operator at a characteristic root, reporting the remainders
    Factor {
        /// Operator order; inferred from the input when omitted
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=3))]
        order: Option<u32>,
        /// Characteristic root; when omitted, every simple rational root is tried
        #[arg(long)]
        root: Option<String>,
        /// Operator text, or a path to a file containing it
        operator: String,
    },
    /// Transform invariants of a normal-form operator, or the full remainder
    /// hierarchy of a third-order one
    Invariants {
        /// Report the remainders below every simple rational root
        #[arg(long)]
        hierarchy: bool,
        /// Operator text, or a path to a file containing it
        operator: String,
    },
    /// Iterate the transform and print the invariant trace
    #[command(name = "laplace-chain")]
    LaplaceChain {
        /// Maximum number of chain members to visit
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        /// Which invariant drives the iteration
        #[arg(long, value_enum, default_value_t = DirectionArg::A)]
        direction: DirectionArg,
        /// Operator text, or a path to a file containing it
        operator: String,
    },
    /// Decide whether two normal-form operators are gauge equivalent
    Equiv {
        /// First operator
        op1: String,
        /// Second operator
        op2: String,
    },
    /// Print the lattice coupling matrix, optionally with its determinant
    Cartan {
        /// Number of lattice sites
        #[arg(short = 'N', value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Wrap indices modulo the segment length instead of truncating
        #[arg(long)]
        periodic: bool,
        /// Also print the exact determinant
        #[arg(long)]
        det: bool,
    },
    /// Derivative-determinant ladder of a seed function
    Dn {
        /// Seed function as expression text
        #[arg(long)]
        w: String,
        /// Largest ladder index to compute
        #[arg(long, value_parser = clap::value_parser!(u64).range(0..=6))]
        n: u64,
    },
    /// Check the closed-form identities behind a named chain closure
    #[command(name = "closure-check")]
    ClosureCheck {
        /// Which closure to check
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Reduce the two-site periodic system to one second-order equation
    Bloch {
        /// First-site coefficient, expression text
        #[arg(long)]
        b1: String,
        /// Second-site coefficient, expression text
        #[arg(long)]
        b2: String,
    },
    /// Run a named identity suite and print a pass/fail table
    Verify {
        /// Which suite to run
        #[arg(long, value_enum)]
        suite: SuiteArg,
        /// Trial count: sweep size for `random`, zero-test trials for `paper`
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        trials: Option<u32>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    /// Drive the chain by the first invariant
    A,
    /// Drive the chain by the second invariant
    B,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    /// One-site truncated closure
    Liouville,
    /// Two-site periodic closure
    SinhGordon,
    /// Three-site periodic closure with the rank-one reduction
    Tzitzeica,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    /// Curated fixtures with pinned expected values
    Paper,
    /// Randomized recomposition and invariance sweeps
    Random,
}

/// Why a command did not produce a result.
enum Failure {
    /// Bad arguments or unparseable input text; exit 2.
    Usage(String),
    /// The mathematics refused: no root, wrong order, and so on; exit 1.
    Math(String),
}

fn math(e: impl std::fmt::Display) -> Failure {
    Failure::Math(e.to_string())
}

/// A computed result: both renderings plus whether it counts as a success.
struct CmdOut {
    pretty: String,
    json: Value,
    ok: bool,
}

impl CmdOut {
    fn ok(pretty: String, json: Value) -> CmdOut {
        CmdOut { pretty, json, ok: true }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let want_json = cli.json;
    match run(cli) {
        Ok(out) => {
            if want_json {
                println!("{:#}", out.json);
            } else {
                print!("{}", out.pretty);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Math(msg)) => {
            if want_json {
                println!("{:#}", json!({ "error": msg }));
            } else {
                eprintln!("error: {msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<CmdOut, Failure> {
    let cfg = zero_cfg(cli.seed)?;
    match cli.cmd {
        Cmd::Factor { order, root, operator } => cmd_factor(order, root, &operator, &cfg),
        Cmd::Invariants { hierarchy, operator } => cmd_invariants(hierarchy, &operator, &cfg),
        Cmd::LaplaceChain { steps, direction, operator } => {
            cmd_chain(steps as usize, direction, &operator, &cfg)
        }
        Cmd::Equiv { op1, op2 } => cmd_equiv(&op1, &op2, &cfg),
        Cmd::Cartan { n, periodic, det } => cmd_cartan(n as usize, periodic, det),
        Cmd::Dn { w, n } => cmd_dn(&w, n as usize),
        Cmd::ClosureCheck { kind } => cmd_closure(kind),
        Cmd::Bloch { b1, b2 } => cmd_bloch(&b1, &b2),
        Cmd::Verify { suite, trials } => cmd_verify(suite, cli.seed, trials, &cfg),
    }
}

/// The shared zero-test settings: `--seed` wins over the default constant,
/// and the `LPDO_ZERO_TRIALS` environment variable wins over the trial count.
fn zero_cfg(seed: Option<u64>) -> Result<ZeroCfg, Failure> {
    let mut cfg = ZeroCfg::default();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Ok(raw) = std::env::var("LPDO_ZERO_TRIALS") {
        match raw.trim().parse::<u32>() {
            Ok(n) if n > 0 => cfg.trials = n,
            _ => {
                return Err(Failure::Usage(format!(
                    "LPDO_ZERO_TRIALS must be a positive integer, found {raw:?}"
                )))
            }
        }
    }
    Ok(cfg)
}

/// Reads a positional operand: the contents of `arg` if it names a file,
/// otherwise `arg` itself.
fn read_operand(arg: &str) -> Result<String, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        std::fs::read_to_string(path)
            .map(|text| text.trim().to_string())
            .map_err(|e| Failure::Usage(format!("cannot read {arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

fn operand_operator(arg: &str) -> Result<Lpdo, Failure> {
    let text = read_operand(arg)?;
    parse_operator(&text).map_err(|e| Failure::Usage(e.to_string()))
}

fn operand_expr(arg: &str) -> Result<Expr, Failure> {
    let text = read_operand(arg)?;
    parse_expr(&text).map_err(|e| Failure::Usage(e.to_string()))
}

fn cmd_factor(
    order: Option<u32>,
    root: Option<String>,
    operator: &str,
    cfg: &ZeroCfg,
) -> Result<CmdOut, Failure> {
    let a = operand_operator(operator)?;
    let found = a.order();
    let ord = match order {
        Some(o) => {
            if found != o as i32 {
                return Err(Failure::Math(format!(
                    "operator must have order {o}, found {found}"
                )));
            }
            o
        }
        None => match found {
            2 => 2,
            3 => 3,
            n => {
                return Err(Failure::Math(format!(
                    "factorization covers orders 2 and 3, found order {n}"
                )))
            }
        },
    };
    let root = root.map(|r| operand_expr(&r)).transpose()?;

    let mut pretty = String::new();
    let mut results = Vec::new();
    if ord == 2 {
        let facs: Vec<Factorization2> = match root {
            Some(w) => vec![factor2(&a, &w, cfg).map_err(math)?],
            None => factor2_auto(&a, cfg).map_err(math)?,
        };
        for (i, f) in facs.iter().enumerate() {
            if i > 0 {
                pretty.push('\n');
            }
            render_factor2(&mut pretty, f);
            results.push(factor2_json(f));
        }
    } else {
        let facs: Vec<Factorization3> = match root {
            Some(w) => vec![factor3(&a, &w, cfg).map_err(math)?],
            None => factor3_auto(&a, cfg).map_err(math)?,
        };
        for (i, f) in facs.iter().enumerate() {
            if i > 0 {
                pretty.push('\n');
            }
            render_factor3(&mut pretty, f);
            results.push(factor3_json(f));
        }
    }
    Ok(CmdOut::ok(pretty, json!({ "order": ord, "results": results })))
}

fn render_factor2(out: &mut String, f: &Factorization2) {
    let _ = writeln!(out, "omega = {}", f.omega);
    let _ = writeln!(out, "left  = {}", f.left_factor());
    let _ = writeln!(out, "right = {}", f.right_factor());
    let _ = writeln!(out, "l2 = {}", f.l2);
    let _ = writeln!(out, "exact: {}", yes_no(f.exact));
}

fn factor2_json(f: &Factorization2) -> Value {
    json!({
        "omega": f.omega.to_string(),
        "factors": [f.left_factor().to_string(), f.right_factor().to_string()],
        "remainders": { "l2": f.l2.to_string() },
        "exact": f.exact,
    })
}

fn render_factor3(out: &mut String, f: &Factorization3) {
    let _ = writeln!(out, "omega = {}", f.omega);
    let _ = writeln!(out, "left  = {}", f.left_factor());
    let _ = writeln!(out, "right = {}", f.right_factor());
    let _ = writeln!(out, "l3 = {}", f.l3);
    let _ = writeln!(out, "l31 = {}", f.l31);
    let _ = writeln!(out, "exact: {}", yes_no(f.exact));
}

fn factor3_json(f: &Factorization3) -> Value {
    json!({
        "omega": f.omega.to_string(),
        "factors": [f.left_factor().to_string(), f.right_factor().to_string()],
        "remainders": { "l3": f.l3.to_string(), "l31": f.l31.to_string() },
        "exact": f.exact,
    })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn cmd_invariants(hierarchy: bool, operator: &str, cfg: &ZeroCfg) -> Result<CmdOut, Failure> {
    let a = operand_operator(operator)?;
    if hierarchy {
        let set: InvariantSet = invariant_hierarchy(&a, cfg).map_err(math)?;
        let mut pretty = String::new();
        let mut entries = Vec::new();
        for e in &set.entries {
            let _ = writeln!(pretty, "omega = {}", e.omega);
            let _ = writeln!(pretty, "  l3 = {}", e.l3);
            let _ = writeln!(pretty, "  l31 = {}", e.l31);
            for s in &e.seconds {
                let _ = writeln!(pretty, "  second level omega = {}: l2 = {}", s.omega, s.l2);
            }
            entries.push(json!({
                "omega": e.omega.to_string(),
                "l3": e.l3.to_string(),
                "l31": e.l31.to_string(),
                "seconds": e.seconds.iter().map(|s| json!({
                    "omega": s.omega.to_string(),
                    "l2": s.l2.to_string(),
                })).collect::<Vec<_>>(),
            }));
        }
        Ok(CmdOut::ok(pretty, json!({ "entries": entries })))
    } else {
        let h = HyperbolicOp::from_lpdo(&a).map_err(math)?;
        let inv = laplace_invariants(&h).map_err(math)?;
        let pretty = format!("a_hat = {}\nb_hat = {}\n", inv.a_hat, inv.b_hat);
        let json = json!({
            "a_hat": inv.a_hat.to_string(),
            "b_hat": inv.b_hat.to_string(),
        });
        Ok(CmdOut::ok(pretty, json))
    }
}

fn cmd_chain(
    steps: usize,
    direction: DirectionArg,
    operator: &str,
    cfg: &ZeroCfg,
) -> Result<CmdOut, Failure> {
    let a = operand_operator(operator)?;
    let h = HyperbolicOp::from_lpdo(&a).map_err(math)?;
    let dir = match direction {
        DirectionArg::A => Direction::AHat,
        DirectionArg::B => Direction::BHat,
    };
    let chain: LaplaceChain = laplace_chain(&h, steps, dir, cfg).map_err(math)?;

    let mut rows = vec![vec!["n".to_string(), "a_hat".to_string(), "b_hat".to_string()]];
    for (i, s) in chain.states.iter().enumerate() {
        rows.push(vec![
            i.to_string(),
            s.invariants.a_hat.to_string(),
            s.invariants.b_hat.to_string(),
        ]);
    }
    let mut pretty = render_table(&rows);
    let term = termination_name(chain.termination);
    let _ = writeln!(pretty, "termination: {term}");

    let states: Vec<Value> = chain
        .states
        .iter()
        .map(|s| {
            json!({
                "a": s.op.a.to_string(),
                "b": s.op.b.to_string(),
                "c": s.op.c.to_string(),
                "a_hat": s.invariants.a_hat.to_string(),
                "b_hat": s.invariants.b_hat.to_string(),
            })
        })
        .collect();
    let json = json!({
        "direction": match direction { DirectionArg::A => "a", DirectionArg::B => "b" },
        "states": states,
        "termination": term,
    });
    Ok(CmdOut::ok(pretty, json))
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::HitFactorizable => "hit_factorizable",
        Termination::RanToLimit => "ran_to_limit",
    }
}

/// Left-aligned columns with a two-space gutter.
fn render_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut width = vec![0usize; cols];
    for row in rows {
        for (j, cell) in row.iter().enumerate() {
            width[j] = width[j].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (j, cell) in row.iter().enumerate() {
            if j > 0 {
                line.push_str("  ");
            }
            let _ = write!(line, "{cell:<w$}", w = width[j]);
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn cmd_equiv(op1: &str, op2: &str, cfg: &ZeroCfg) -> Result<CmdOut, Failure> {
    let a = HyperbolicOp::from_lpdo(&operand_operator(op1)?).map_err(math)?;
    let b = HyperbolicOp::from_lpdo(&operand_operator(op2)?).map_err(math)?;
    let same = lpfactor::laplace::equivalent(&a, &b, cfg).map_err(math)?;
    let pretty = if same {
        "equivalent\n".to_string()
    } else {
        "not equivalent\n".to_string()
    };
    Ok(CmdOut::ok(pretty, json!({ "equivalent": same })))
}

fn cmd_cartan(n: usize, periodic: bool, det: bool) -> Result<CmdOut, Failure> {
    let closure = if periodic { ChainClosure::Periodic } else { ChainClosure::Truncated };
    let m: IntMatrix = cartan_matrix(n, closure).map_err(math)?;

    let cells: Vec<Vec<String>> =
        (0..n).map(|i| (0..n).map(|j| m.entry(i, j).to_string()).collect()).collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut pretty = String::new();
    for row in &cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(pretty, "{}", line.join(" "));
    }
    let mut json = json!({
        "n": n,
        "closure": if periodic { "periodic" } else { "open" },
        "matrix": cells
            .iter()
            .map(|row| row.iter().map(|c| int_json(c)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    });
    if det {
        let d = m.det_exact().to_string();
        let _ = writeln!(pretty, "det = {d}");
        json["det"] = int_json(&d);
    }
    Ok(CmdOut::ok(pretty, json))
}

/// Integers serialize as JSON numbers when they fit, else as strings.
fn int_json(s: &str) -> Value {
    s.parse::<i64>().map(Value::from).unwrap_or_else(|_| Value::from(s))
}

fn cmd_dn(w: &str, n: usize) -> Result<CmdOut, Failure> {
    let seed = operand_expr(w)?;
    let ladder = dn_sequence(&seed, n).map_err(math)?;
    let mut pretty = String::new();
    for (i, d) in ladder.iter().enumerate() {
        let _ = writeln!(pretty, "d{i} = {d}");
    }
    let json = json!({
        "w": seed.to_string(),
        "d": ladder.iter().map(Expr::to_string).collect::<Vec<_>>(),
    });
    Ok(CmdOut::ok(pretty, json))
}

fn cmd_closure(kind: KindArg) -> Result<CmdOut, Failure> {
    let kind = match kind {
        KindArg::Liouville => ClosureKind::Liouville,
        KindArg::SinhGordon => ClosureKind::SinhGordon,
        KindArg::Tzitzeica => ClosureKind::Tzitzeica,
    };
    let report = closure_identity_check(kind).map_err(math)?;
    let kind_name = match kind {
        ClosureKind::Liouville => "liouville",
        ClosureKind::SinhGordon => "sinh-gordon",
        ClosureKind::Tzitzeica => "tzitzeica",
    };

    let mut pretty = format!("kind: {kind_name}\n");
    for c in &report.checks {
        let tag = if c.pass { "pass" } else { "FAIL" };
        let _ = writeln!(pretty, "[{tag}] {}", c.name);
    }
    if let Some(k) = &report.kappa {
        let _ = writeln!(pretty, "kappa = {k}");
    }
    if !report.note.is_empty() {
        let _ = writeln!(pretty, "note: {}", report.note);
    }
    let ok = report.pass();
    let _ = writeln!(pretty, "result: {}", if ok { "pass" } else { "fail" });

    let json = json!({
        "kind": kind_name,
        "checks": report.checks.iter().map(|c| json!({
            "name": c.name,
            "pass": c.pass,
        })).collect::<Vec<_>>(),
        "kappa": report.kappa.as_ref().map(Expr::to_string),
        "note": report.note,
        "pass": ok,
    });
    Ok(CmdOut { pretty, json, ok })
}

fn cmd_bloch(b1: &str, b2: &str) -> Result<CmdOut, Failure> {
    let b1 = operand_expr(b1)?;
    let b2 = operand_expr(b2)?;
    let inv_k = Expr::one().div(expr::k()).map_err(math)?;
    let (a2, a1, a0) = bloch_reduce(&b1, &b2, &inv_k, &inv_k).map_err(math)?;
    let pretty = format!("a2 = {a2}\na1 = {a1}\na0 = {a0}\n");
    let json = json!({
        "a2": a2.to_string(),
        "a1": a1.to_string(),
        "a0": a0.to_string(),
    });
    Ok(CmdOut::ok(pretty, json))
}

fn cmd_verify(
    suite: SuiteArg,
    seed: Option<u64>,
    trials: Option<u32>,
    cfg: &ZeroCfg,
) -> Result<CmdOut, Failure> {
    let sweep_seed = seed.unwrap_or(DEFAULT_ZERO_SEED);
    let report: SuiteReport = match suite {
        SuiteArg::Paper => {
            let mut c = *cfg;
            if let Some(t) = trials {
                c.trials = t;
            }
            verify::reference_suite(&c)
        }
        SuiteArg::Random => verify::random_suite(sweep_seed, trials.unwrap_or(25), cfg),
    };

    let mut pretty = String::new();
    for r in &report.results {
        if r.pass {
            let _ = writeln!(pretty, "PASS {}", r.name);
        } else {
            let _ = writeln!(pretty, "FAIL {}: {}", r.name, r.detail);
        }
    }
    let _ = writeln!(pretty, "{} passed, {} failed", report.passed(), report.failed());

    let json = json!({
        "suite": report.suite,
        "seed": sweep_seed,
        "results": report.results.iter().map(|r| json!({
            "name": r.name,
            "pass": r.pass,
            "detail": r.detail,
        })).collect::<Vec<_>>(),
        "passed": report.passed(),
        "failed": report.failed(),
    });
    Ok(CmdOut { pretty, json, ok: report.pass() })
}
