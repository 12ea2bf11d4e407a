//! `hornkit`: parse, check, transform and translate constrained Horn clauses.
//!
//! Exit status: 0 sat, 1 unsat, 2 unknown, 3 errors (commands that print a
//! program exit 0 on success).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hornkit::lin::Verdict3;
use hornkit::pipeline::{
    apply_config, apply_step, check_sat, load_program, parse_steps, replay_history, run_pipeline, ImpStyle, InputKind, Method,
    OutputFormat, PipelineSpec,
};
use hornkit::syntax::{Mode, Program};

#[derive(Parser)]
#[command(name = "hornkit", version, about = "Constrained Horn clause toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse (or translate) the input and print it normalised.
    Parse(Common),
    /// Decide satisfiability.
    Sat(Common),
    /// Apply transformation steps and print the resulting program.
    Transform(Common),
    /// Translate an imperative source into clauses.
    Imp2chc(Common),
    /// Apply steps, check satisfiability and print a report.
    Pipeline(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Rat,
    Int,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Bu,
    Td,
    Cpa,
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    Bigstep,
    Reach,
}

#[derive(Args)]
struct Common {
    /// Input file: clauses, or an imperative source (`.c`, `.imp`).
    input: PathBuf,
    /// `key = value` configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Constraint domain, overriding the input's.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Top-down derivation depth bound.
    #[arg(long)]
    depth: Option<usize>,
    /// Comma-separated steps (specialise, qa, reverse, raf, far,
    /// strengthen, pair, delete-unsat, delete-useless).
    #[arg(long)]
    steps: Option<String>,
    /// Check satisfiability after every step.
    #[arg(long)]
    check_each: bool,
    #[arg(long)]
    json: bool,
    /// Write the transformation history here.
    #[arg(long)]
    emit_history: Option<PathBuf>,
    /// Re-derive the program from a history file instead of running steps.
    #[arg(long, conflicts_with = "steps")]
    replay: Option<PathBuf>,
    /// Translation of imperative sources.
    #[arg(long, value_enum, default_value = "bigstep")]
    style: StyleArg,
    /// Treat the input as an imperative source whatever its extension.
    #[arg(long)]
    imp: bool,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

impl Common {
    fn spec(&self) -> Result<PipelineSpec> {
        let mut spec = PipelineSpec::default();
        if let Some(c) = &self.config {
            apply_config(&mut spec, &read(c)?).with_context(|| format!("in {}", c.display()))?;
        }
        if let Some(m) = self.mode {
            spec.settings.mode = Some(match m {
                ModeArg::Rat => Mode::Rational,
                ModeArg::Int => Mode::Integer,
            });
        }
        if let Some(m) = self.method {
            spec.method = match m {
                MethodArg::Auto => Method::Auto,
                MethodArg::Bu => Method::Bu,
                MethodArg::Td => Method::Td,
                MethodArg::Cpa => Method::Cpa,
            };
        }
        if let Some(d) = self.depth {
            spec.settings.td_depth = d;
        }
        if let Some(s) = &self.steps {
            spec.steps = parse_steps(s).map_err(anyhow::Error::msg)?;
        }
        spec.check_each |= self.check_each;
        if self.json {
            spec.format = OutputFormat::Json;
        }
        Ok(spec)
    }

    fn load(&self, force_imp: bool) -> Result<Program> {
        let style = match self.style {
            StyleArg::Bigstep => ImpStyle::BigStep,
            StyleArg::Reach => ImpStyle::Reach,
        };
        let kind = if force_imp || self.imp { InputKind::Imp(style) } else { InputKind::for_path(&self.input, style) };
        let p = load_program(&read(&self.input)?, kind).with_context(|| format!("in {}", self.input.display()))?;
        Ok(p)
    }

    fn emit(&self, history: &str) -> Result<()> {
        if let Some(h) = &self.emit_history {
            fs::write(h, history).with_context(|| format!("cannot write {}", h.display()))?;
        }
        Ok(())
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn say(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn verdict_code(v: Verdict3) -> ExitCode {
    ExitCode::from(match v {
        Verdict3::Sat => 0,
        Verdict3::Unsat => 1,
        Verdict3::Unknown => 2,
    })
}

fn verdict_name(v: Verdict3) -> &'static str {
    match v {
        Verdict3::Sat => "sat",
        Verdict3::Unsat => "unsat",
        Verdict3::Unknown => "unknown",
    }
}

/// The program after the configured steps, or after replaying a history.
fn transformed(c: &Common, p: &Program, spec: &PipelineSpec) -> Result<(Program, String)> {
    if let Some(r) = &c.replay {
        let text = read(r)?;
        let q = replay_history(p, &text, &spec.settings).with_context(|| format!("in {}", r.display()))?;
        return Ok((q, text));
    }
    let mut cur = p.clone();
    if let Some(m) = spec.settings.mode {
        cur.mode = m;
    }
    let mut history = String::new();
    for (i, &kind) in spec.steps.iter().enumerate() {
        let (next, script) = apply_step(&cur, kind, &spec.settings)
            .with_context(|| format!("step {} ({kind})", i + 1))?;
        history.push_str(&format!("step {kind}\n{}", script.unwrap_or_default()));
        cur = next;
    }
    Ok((cur, history))
}

fn print_program(c: &Common, imp: bool) -> Result<ExitCode> {
    if c.steps.is_some() || c.replay.is_some() {
        anyhow::bail!("--steps and --replay belong to transform and pipeline");
    }
    let spec = c.spec()?;
    let mut p = c.load(imp)?;
    if let Some(m) = spec.settings.mode {
        p.mode = m;
    }
    say(&p.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Parse(c) => print_program(&c, false),
        Command::Imp2chc(c) => print_program(&c, true),
        Command::Sat(c) => {
            let spec = c.spec()?;
            let mut p = c.load(false)?;
            if let Some(m) = spec.settings.mode {
                p.mode = m;
            }
            let r = check_sat(&p, spec.method, &spec.settings);
            if c.json {
                let v = serde_json::json!({
                    "final_verdict": verdict_name(r.verdict),
                    "model": r.model.map(|m| m.to_string()),
                    "witness": r.witness,
                });
                say(&format!("{}\n", serde_json::to_string_pretty(&v)?))?;
            } else {
                let mut out = format!("{}\n", verdict_name(r.verdict));
                if let Some(w) = r.witness {
                    out += &format!("% witness: goal {} with {}\n", w.goal, w.constraint);
                }
                if let Some(m) = r.model {
                    out += &m.to_string();
                }
                say(&out)?;
            }
            Ok(verdict_code(r.verdict))
        }
        Command::Transform(c) => {
            let spec = c.spec()?;
            let p = c.load(false)?;
            let (q, history) = transformed(&c, &p, &spec)?;
            c.emit(&history)?;
            say(&q.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Pipeline(c) => {
            let spec = c.spec()?;
            let p = c.load(false)?;
            let report = match &c.replay {
                Some(_) => {
                    let (q, history) = transformed(&c, &p, &spec)?;
                    let mut r = run_pipeline(&q, &PipelineSpec { steps: Vec::new(), ..spec.clone() })?;
                    r.input_clauses = p.len();
                    r.history = history;
                    r
                }
                None => run_pipeline(&p, &spec)?,
            };
            c.emit(&report.history)?;
            let mut out = report.render(spec.format);
            if !out.ends_with('\n') {
                out.push('\n');
            }
            say(&out)?;
            Ok(verdict_code(report.verdict))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
