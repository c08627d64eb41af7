use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kamio::combinators::{compile_function, decode_numeral, prelude, Decoded};
use kamio::equivalence::{top_equiv, weak_bisim};
use kamio::machine::{implements_on, labels, run, Bits, ExecutionContext, Outcome, RowStatus, DEFAULT_FUEL};
use kamio::scenario::{load_scenario, run_scenario};
use kamio::syntax::{parse_definitions, parse_process_in, parse_stack_in, parse_term_in, Definitions, Process, Term};
use kamio::Verdict;

#[derive(Parser)]
#[command(name = "kamio", version)]
#[command(about = "Run and analyze processes of a Krivine machine with bit-level input and output")]
struct Cli {
    /// Step budget for every bounded check
    #[arg(long, global = true, env = "KAMIO_FUEL", default_value_t = DEFAULT_FUEL)]
    fuel: u64,

    /// Number of visible actions explored by `bisim`
    #[arg(long, global = true, default_value_t = kamio::equivalence::DEFAULT_DEPTH)]
    depth: usize,

    /// Make the built-in combinators (B, C, H, S, E, Z, Y, F, Q, R, V, W) available by name
    #[arg(long, global = true)]
    prelude: bool,

    /// Load further definitions (`NAME := term;`) from a file
    #[arg(long, global = true, value_name = "PATH")]
    prelude_file: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Syntax {
    Process,
    Term,
    Stack,
    Definitions,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a file and print it back in canonical form
    Parse {
        file: PathBuf,
        #[arg(long = "as", value_enum, default_value_t = Syntax::Process)]
        syntax: Syntax,
    },
    /// Execute a process on an input
    Run {
        file: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        /// Print the full action trace, silent steps included
        #[arg(long)]
        trace: bool,
    },
    /// Same as `run --trace`
    Trace {
        file: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
    },
    /// Check two processes for weak bisimilarity
    Bisim { left: PathBuf, right: PathBuf },
    /// Check two execution contexts for ⊤-equivalence
    Topequiv {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value = "")]
        output: String,
        /// Input of the right context, if different
        #[arg(long)]
        right_input: Option<String>,
        /// Output of the right context, if different
        #[arg(long)]
        right_output: Option<String>,
    },
    /// Compile a numeral function into a process that reads n and writes f(n)
    CompileFn {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that a process implements a function table (lines `n<TAB>m`)
    VerifyImpl {
        file: PathBuf,
        #[arg(long)]
        table: PathBuf,
    },
    /// Check a realizability scenario (JSON)
    Realize { scenario: PathBuf },
    /// Read back the numeral a term stands for
    Decode { file: PathBuf },
    /// List the available definitions
    PreludeList,
}

fn read_source(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading standard input")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Prints a line; a closed stdout (e.g. `| head`) is not an error.
fn say(line: &str) {
    let _ = writeln!(io::stdout().lock(), "{line}");
}

fn bits(text: &str) -> Result<Bits> {
    text.parse().with_context(|| format!("invalid bit string `{text}`"))
}

struct Env {
    fuel: u64,
    depth: usize,
    format: Format,
    defs: Definitions,
}

impl Env {
    fn process(&self, path: &Path) -> Result<Process> {
        let src = read_source(path)?;
        parse_process_in(&src, &self.defs).with_context(|| format!("in {}", path.display()))
    }

    fn term(&self, path: &Path) -> Result<Term> {
        let src = read_source(path)?;
        let t = parse_term_in(src.trim(), &self.defs).with_context(|| format!("in {}", path.display()))?;
        if !t.is_closed() {
            let free: Vec<String> = t.free_variables().iter().map(|n| n.to_string()).collect();
            bail!("in {}: the term has free variables: {}", path.display(), free.join(", "));
        }
        Ok(t)
    }

    fn emit(&self, text: impl FnOnce() -> String, value: impl FnOnce() -> Value) {
        match self.format {
            Format::Text => say(&text()),
            Format::Json => say(&value().to_string()),
        }
    }
}

fn definitions(cli: &Cli) -> Result<Definitions> {
    let mut defs = if cli.prelude { prelude().clone() } else { Definitions::new() };
    if let Some(path) = &cli.prelude_file {
        let src = read_source(path)?;
        let own = parse_definitions(&src, Some(&defs)).with_context(|| format!("in {}", path.display()))?;
        defs.extend(&own);
    }
    Ok(defs)
}

fn verdict_code<W>(v: &Verdict<W>) -> ExitCode {
    match v {
        Verdict::Verified => ExitCode::SUCCESS,
        Verdict::Refuted(_) => ExitCode::from(2),
        Verdict::Unknown(_) => ExitCode::from(3),
    }
}

fn verdict_text<W>(v: &Verdict<W>, witness: impl FnOnce(&W) -> String) -> String {
    match v {
        Verdict::Verified => "verified".to_owned(),
        Verdict::Refuted(w) => format!("refuted: {}", witness(w)),
        Verdict::Unknown(l) => format!("unknown ({l} exhausted)"),
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn cmd_parse(env: &Env, file: &Path, syntax: Syntax) -> Result<ExitCode> {
    let src = read_source(file)?;
    let ctx = || format!("in {}", file.display());
    let (kind, text) = match syntax {
        Syntax::Process => ("process", parse_process_in(&src, &env.defs).with_context(ctx)?.to_string()),
        Syntax::Stack => ("stack", parse_stack_in(&src, &env.defs).with_context(ctx)?.to_string()),
        Syntax::Term => ("term", parse_term_in(src.trim(), &env.defs).with_context(ctx)?.to_string()),
        Syntax::Definitions => {
            let defs = parse_definitions(&src, Some(&env.defs)).with_context(ctx)?;
            ("definitions", defs.iter().map(|(n, t)| format!("{n} := {t};")).collect::<Vec<_>>().join("\n"))
        }
    };
    env.emit(|| text.clone(), || json!({ "kind": kind, "text": text }));
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(env: &Env, file: &Path, input: &str, trace: bool) -> Result<ExitCode> {
    let p = env.process(file)?;
    let r = run(ExecutionContext::start(p, bits(input)?), env.fuel);
    let visible = labels(&r.trace);
    env.emit(
        || {
            let mut lines = vec![
                format!("outcome: {}", r.outcome.as_str()),
                format!("process: {}", r.last.process),
                format!("input: {}", r.last.input),
                format!("output: {}", r.last.output),
                format!("steps: {}", r.steps),
                format!("labels: {}", join(&visible)),
            ];
            if trace {
                lines.push(format!("trace: {}", join(&r.trace)));
            }
            lines.join("\n")
        },
        || {
            let mut v = json!({
                "outcome": r.outcome.as_str(),
                "process": r.last.process.to_string(),
                "input": r.last.input.to_string(),
                "output": r.last.output.to_string(),
                "steps": r.steps,
                "labels": visible,
            });
            if trace {
                v["trace"] = json!(r.trace);
            }
            v
        },
    );
    Ok(match r.outcome {
        Outcome::Terminated => ExitCode::SUCCESS,
        Outcome::Stuck => ExitCode::from(2),
        Outcome::FuelExhausted => ExitCode::from(3),
    })
}

fn cmd_bisim(env: &Env, left: &Path, right: &Path) -> Result<ExitCode> {
    let v = weak_bisim(&env.process(left)?, &env.process(right)?, env.depth, env.fuel);
    env.emit(|| verdict_text(&v, |w| join(w)), || json!(v));
    Ok(verdict_code(&v))
}

fn cmd_topequiv(env: &Env, left: &Path, right: &Path, io: [&str; 4]) -> Result<ExitCode> {
    let [input, output, right_input, right_output] = io;
    let c1 = ExecutionContext::new(env.process(left)?, bits(input)?, bits(output)?);
    let c2 = ExecutionContext::new(env.process(right)?, bits(right_input)?, bits(right_output)?);
    let v = top_equiv(&c1, &c2, env.fuel);
    env.emit(|| verdict_text(&v, |w| format!("{} vs {}", json!(w.left), json!(w.right))), || json!(v));
    Ok(verdict_code(&v))
}

fn cmd_compile_fn(env: &Env, file: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let t = env.term(file)?;
    let p = compile_function(&t)?;
    let text = format!("{p}\n");
    match out {
        Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => say(text.trim_end()),
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_table(src: &str) -> Result<BTreeMap<u64, u64>> {
    let mut table = BTreeMap::new();
    for (k, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [n, m] = fields[..] else { bail!("line {}: expected `n<TAB>m`, found `{line}`", k + 1) };
        let n: u64 = n.parse().with_context(|| format!("line {}: `{n}` is not a natural number", k + 1))?;
        let m: u64 = m.parse().with_context(|| format!("line {}: `{m}` is not a natural number", k + 1))?;
        if table.insert(n, m).is_some() {
            bail!("line {}: {n} appears twice", k + 1);
        }
    }
    Ok(table)
}

fn cmd_verify_impl(env: &Env, file: &Path, table: &Path) -> Result<ExitCode> {
    let p = env.process(file)?;
    let table = parse_table(&read_source(table)?)?;
    let report = implements_on(&p, &table, env.fuel);
    let status = |s: RowStatus| match s {
        RowStatus::Pass => "pass",
        RowStatus::Fail => "fail",
        RowStatus::Unknown => "unknown",
    };
    env.emit(
        || {
            let mut lines = vec!["n\tm\tstatus\toutcome\tinput\toutput".to_owned()];
            for r in &report.rows {
                lines.push(format!(
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    r.input,
                    r.expected,
                    status(r.status),
                    r.run.outcome.as_str(),
                    r.run.last.input,
                    r.run.last.output
                ));
            }
            lines.push(verdict_text(&report.verdict, |w| format!("row {}", w.input)));
            lines.join("\n")
        },
        || {
            let rows: Vec<Value> = report
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "n": r.input,
                        "m": r.expected,
                        "status": status(r.status),
                        "outcome": r.run.outcome.as_str(),
                        "input": r.run.last.input.to_string(),
                        "output": r.run.last.output.to_string(),
                    })
                })
                .collect();
            let mut v = json!({ "rows": rows });
            v["verdict"] = json!(report.verdict.label());
            if let Verdict::Refuted(w) = &report.verdict {
                v["witness"] = json!(w.input);
            }
            v
        },
    );
    Ok(verdict_code(&report.verdict))
}

fn cmd_realize(env: &Env, file: &Path) -> Result<ExitCode> {
    let scenario = load_scenario(&read_source(file)?, &env.defs).with_context(|| format!("in {}", file.display()))?;
    let report = run_scenario(&scenario)?;
    let value = json!(report);
    match env.format {
        Format::Text => say(&serde_json::to_string_pretty(&value)?),
        Format::Json => say(&value.to_string()),
    }
    Ok(verdict_code(&report.verdict()))
}

fn cmd_decode(env: &Env, file: &Path) -> Result<ExitCode> {
    let t = env.term(file)?;
    let d = decode_numeral(&t, env.fuel)?;
    let n = match d {
        Decoded::Numeral(n) => Some(n),
        Decoded::Unknown => None,
    };
    env.emit(|| n.map_or_else(|| "unknown".to_owned(), |n| n.to_string()), || json!({ "numeral": n }));
    Ok(if n.is_some() { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn cmd_prelude_list(env: &Env) -> Result<ExitCode> {
    // Without --prelude the built-in library is still what users ask for here.
    let defs = if env.defs.is_empty() { prelude() } else { &env.defs };
    env.emit(
        || defs.iter().map(|(n, t)| format!("{n} := {t};")).collect::<Vec<_>>().join("\n"),
        || Value::Object(defs.iter().map(|(n, t)| (n.to_string(), json!(t.to_string()))).collect()),
    );
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    let env = Env { fuel: cli.fuel, depth: cli.depth, format: cli.format, defs: definitions(cli)? };
    match &cli.command {
        Command::Parse { file, syntax } => cmd_parse(&env, file, *syntax),
        Command::Run { file, input, trace } => cmd_run(&env, file, input, *trace),
        Command::Trace { file, input } => cmd_run(&env, file, input, true),
        Command::Bisim { left, right } => cmd_bisim(&env, left, right),
        Command::Topequiv { left, right, input, output, right_input, right_output } => cmd_topequiv(
            &env,
            left,
            right,
            [input, output, right_input.as_deref().unwrap_or(input), right_output.as_deref().unwrap_or(output)],
        ),
        Command::CompileFn { file, output } => cmd_compile_fn(&env, file, output.as_deref()),
        Command::VerifyImpl { file, table } => cmd_verify_impl(&env, file, table),
        Command::Realize { scenario } => cmd_realize(&env, scenario),
        Command::Decode { file } => cmd_decode(&env, file),
        Command::PreludeList => cmd_prelude_list(&env),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Deeply nested terms recurse; give the worker a generous stack.
    let worker = std::thread::Builder::new().stack_size(256 << 20).spawn(move || dispatch(&cli));
    let result = match worker {
        Ok(handle) => handle.join().unwrap_or_else(|_| Err(anyhow::anyhow!("internal error"))),
        Err(e) => Err(e.into()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
