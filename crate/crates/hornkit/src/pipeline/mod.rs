//! Transformation pipelines: load a program, apply satisfiability-preserving
//! steps in order, optionally check satisfiability after each one, and
//! report clause counts, verdicts, timings and the rule history.
//!
//! Steps built on the fold/unfold kernel (`specialise`, `pair`,
//! `delete-unsat`, `delete-useless`) record their rule applications; the
//! others are deterministic functions of their input. The history text has
//! one `step <name>` header per step followed by its script, so
//! [`replay_history`] re-derives the output program from the input, checking
//! every kernel step on the way.

mod check;
mod config;

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use check::{check_sat, CheckResult, Method, Witness};
pub use config::{apply_config, parse_config, parse_steps};

use crate::analyze::AnalysisConfig;
use crate::imp::{parse_imp, translate_bigstep, translate_reach, ImpError};
use crate::lin::Verdict3;
use crate::syntax::{parse_program, Mode, ParseError, Program};
use crate::transform::{
    far, parse_script, predicate_pair, qa_transform, raf, replay, reverse, single_goal, specialise, strengthen,
    to_script, DeleteMode, SpecialiseConfig, TransformError, TransformState,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("syntax error: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Imp(#[from] ImpError),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("step {index} ({kind}): {source}")]
    Step { index: usize, kind: StepKind, source: TransformError },
    #[error("history line {line}: {msg}")]
    History { line: usize, msg: String },
}

/// A pipeline step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    /// Definition-driven specialisation of the goals.
    Specialise,
    /// Query-answer transformation of the (single) goal.
    Qa,
    /// Reversal of a linear program.
    Reverse,
    /// Removal of arguments that no goal needs.
    Raf,
    /// Removal of arguments that no fact constrains.
    Far,
    /// Conjoining analysed invariants to clause bodies.
    Strengthen,
    /// Specialisation that pairs body atoms sharing variables.
    Pair,
    DeleteUnsat,
    DeleteUseless,
}

impl StepKind {
    pub const ALL: [StepKind; 9] = [
        StepKind::Specialise,
        StepKind::Qa,
        StepKind::Reverse,
        StepKind::Raf,
        StepKind::Far,
        StepKind::Strengthen,
        StepKind::Pair,
        StepKind::DeleteUnsat,
        StepKind::DeleteUseless,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StepKind::Specialise => "specialise",
            StepKind::Qa => "qa",
            StepKind::Reverse => "reverse",
            StepKind::Raf => "raf",
            StepKind::Far => "far",
            StepKind::Strengthen => "strengthen",
            StepKind::Pair => "pair",
            StepKind::DeleteUnsat => "delete-unsat",
            StepKind::DeleteUseless => "delete-useless",
        }
    }

    /// Whether the step goes through the fold/unfold kernel and leaves a
    /// rule history.
    pub fn is_kernel(self) -> bool {
        matches!(self, StepKind::Specialise | StepKind::Pair | StepKind::DeleteUnsat | StepKind::DeleteUseless)
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StepKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = StepKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown step `{s}` (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected text or json)")),
        }
    }
}

/// Bounds and options of the engines used by steps and checks.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EngineSettings {
    /// Overrides the constraint domain of the input.
    pub mode: Option<Mode>,
    pub td_depth: usize,
    pub kleene_iters: usize,
    pub analysis: AnalysisConfig,
    pub specialise: SpecialiseConfig,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            mode: None,
            td_depth: 32,
            kleene_iters: 64,
            analysis: AnalysisConfig::default(),
            specialise: SpecialiseConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PipelineSpec {
    pub steps: Vec<StepKind>,
    pub settings: EngineSettings,
    pub method: Method,
    /// Check satisfiability after every step, not only at the end.
    pub check_each: bool,
    pub format: OutputFormat,
}

/// How imperative sources become clauses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImpStyle {
    /// One predicate per function and loop.
    #[default]
    BigStep,
    /// Linear clauses for reachability of the error state.
    Reach,
}

impl FromStr for ImpStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bigstep" | "big-step" => Ok(ImpStyle::BigStep),
            "reach" => Ok(ImpStyle::Reach),
            other => Err(format!("unknown style `{other}` (expected bigstep or reach)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Chc,
    Imp(ImpStyle),
}

impl InputKind {
    /// `.c` and `.imp` files are imperative sources, anything else clauses.
    pub fn for_path(path: &Path, style: ImpStyle) -> InputKind {
        match path.extension().and_then(|e| e.to_str()) {
            Some("c" | "imp") => InputKind::Imp(style),
            _ => InputKind::Chc,
        }
    }
}

/// Parses (and for imperative sources translates) an input program.
pub fn load_program(text: &str, kind: InputKind) -> Result<Program, PipelineError> {
    match kind {
        InputKind::Chc => Ok(parse_program(text)?),
        InputKind::Imp(style) => {
            let (p, t) = parse_imp(text)?;
            Ok(match style {
                ImpStyle::BigStep => translate_bigstep(&p, &t),
                ImpStyle::Reach => translate_reach(&p, &t)?,
            })
        }
    }
}

/// Result of one step, with its kernel history (if any).
pub fn apply_step(p: &Program, kind: StepKind, s: &EngineSettings) -> Result<(Program, Option<String>), TransformError> {
    let kernel = |st: TransformState| (st.program(), Some(to_script(st.history())));
    let delete = |mode| {
        let mut st = TransformState::new(p);
        st.delete(mode);
        kernel(st)
    };
    Ok(match kind {
        StepKind::Specialise => kernel(specialise(p, &s.specialise)?),
        StepKind::Pair => kernel(predicate_pair(p, &s.specialise)?),
        StepKind::DeleteUnsat => delete(DeleteMode::Unsat),
        StepKind::DeleteUseless => delete(DeleteMode::Useless),
        StepKind::Qa => (qa_transform(&single_goal(p)?, 0)?.0, None),
        StepKind::Reverse => (reverse(p)?, None),
        StepKind::Raf => (raf(p), None),
        StepKind::Far => (far(p), None),
        StepKind::Strengthen => (strengthen(p, &s.analysis)?.program, None),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepReport {
    #[serde(rename = "name")]
    pub step: StepKind,
    pub clauses_in: usize,
    pub clauses_out: usize,
    pub verdict: Option<Verdict3>,
    pub millis: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub mode: Mode,
    pub input_clauses: usize,
    pub steps: Vec<StepReport>,
    #[serde(rename = "final_verdict")]
    pub verdict: Verdict3,
    pub method: Method,
    /// Constrained facts of a model, when `sat` came with one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    pub program: String,
    pub history: String,
}

impl Report {
    /// All `sat`/`unsat` verdicts along the pipeline agree.
    pub fn consistent(&self) -> bool {
        let vs = self.steps.iter().filter_map(|s| s.verdict).chain([self.verdict]);
        let decided: Vec<Verdict3> = vs.filter(|v| *v != Verdict3::Unknown).collect();
        decided.windows(2).all(|w| w[0] == w[1])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Text => self.to_string(),
        }
    }
}

fn verdict_str(v: Verdict3) -> &'static str {
    match v {
        Verdict3::Sat => "sat",
        Verdict3::Unsat => "unsat",
        Verdict3::Unknown => "unknown",
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "% input: {} clauses ({})", self.input_clauses, self.mode)?;
        for (i, s) in self.steps.iter().enumerate() {
            let v = s.verdict.map_or("-", verdict_str);
            writeln!(f, "% step {} {}: {} -> {} clauses, {} ms, {v}", i + 1, s.step, s.clauses_in, s.clauses_out, s.millis)?;
        }
        writeln!(f, "% verdict: {}", verdict_str(self.verdict))?;
        if let Some(w) = &self.witness {
            let path: Vec<String> = w.path.iter().map(|i| i.to_string()).collect();
            writeln!(f, "% witness: goal {} with {} via [{}]", w.goal, w.constraint, path.join(","))?;
        }
        if let Some(m) = &self.model {
            f.write_str("% model:\n")?;
            for l in m.lines() {
                writeln!(f, "%   {l}")?;
            }
        }
        f.write_str(&self.program)
    }
}

fn with_mode(mut p: Program, s: &EngineSettings) -> Program {
    if let Some(m) = s.mode {
        p.mode = m;
    }
    p
}

/// Runs `spec` on `p`. The final program is always checked with
/// `spec.method`.
pub fn run_pipeline(p: &Program, spec: &PipelineSpec) -> Result<Report, PipelineError> {
    let s = &spec.settings;
    let mut cur = with_mode(p.clone(), s);
    let input_clauses = cur.len();
    let mut steps = Vec::new();
    let mut history = String::new();
    let mut last: Option<CheckResult> = None;
    for (index, &kind) in spec.steps.iter().enumerate() {
        let start = Instant::now();
        let (next, script) =
            apply_step(&cur, kind, s).map_err(|source| PipelineError::Step { index: index + 1, kind, source })?;
        let millis = start.elapsed().as_millis() as u64;
        let _ = writeln!(history, "step {kind}");
        history.push_str(&script.unwrap_or_default());
        let checked = spec.check_each.then(|| check_sat(&next, spec.method, s));
        steps.push(StepReport {
            step: kind,
            clauses_in: cur.len(),
            clauses_out: next.len(),
            verdict: checked.as_ref().map(|c| c.verdict),
            millis,
        });
        last = checked;
        cur = next;
    }
    let fin = match last {
        Some(c) => c,
        None => check_sat(&cur, spec.method, s),
    };
    Ok(Report {
        mode: cur.mode,
        input_clauses,
        steps,
        verdict: fin.verdict,
        method: spec.method,
        model: fin.model.map(|m| m.to_string()),
        witness: fin.witness,
        program: cur.to_string(),
        history,
    })
}

/// Re-derives a pipeline's output from its input and history text. Kernel
/// steps are replayed rule by rule (and audited); the other steps are
/// recomputed.
pub fn replay_history(p: &Program, text: &str, s: &EngineSettings) -> Result<Program, PipelineError> {
    let mut cur = with_mode(p.clone(), s);
    let mut sections: Vec<(usize, StepKind, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(name) = line.strip_prefix("step ") {
            let kind = name.trim().parse().map_err(|msg| PipelineError::History { line: i + 1, msg })?;
            sections.push((i + 1, kind, String::new()));
        } else if line.trim().is_empty() || line.trim_start().starts_with('%') {
            continue;
        } else {
            let sec = sections.last_mut().ok_or_else(|| PipelineError::History {
                line: i + 1,
                msg: "rule outside a `step` section".into(),
            })?;
            sec.2.push_str(line);
            sec.2.push('\n');
        }
    }
    for (index, (line, kind, script)) in sections.into_iter().enumerate() {
        let step_err = |source| PipelineError::Step { index: index + 1, kind, source };
        cur = if kind.is_kernel() {
            let rules = parse_script(&script).map_err(step_err)?;
            replay(&cur, &rules).map_err(step_err)?.program()
        } else if !script.is_empty() {
            return Err(PipelineError::History { line, msg: format!("step `{kind}` takes no rules") });
        } else {
            apply_step(&cur, kind, s).map_err(step_err)?.0
        };
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SUM_UPTO: &str = "false :- M>Sum, M>=0, sum_upto(M,Sum).
        sum_upto(X,R) :- R0=0, while(X,R0,R).
        while(X1,R1,R) :- X1>0, R2=R1+X1, X2=X1-1, while(X2,R2,R).
        while(X1,R1,R) :- X1=<0, R=R1.";

    fn spec(steps: &[StepKind]) -> PipelineSpec {
        PipelineSpec { steps: steps.to_vec(), check_each: true, ..PipelineSpec::default() }
    }

    #[test]
    fn step_names_round_trip() {
        for k in StepKind::ALL {
            assert_eq!(k.name().parse::<StepKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
        }
        assert!("unfold".parse::<StepKind>().is_err());
    }

    #[test]
    fn empty_pipeline_reports_the_input() {
        let p = parse_program(SUM_UPTO).unwrap();
        let r = run_pipeline(&p, &PipelineSpec::default()).unwrap();
        assert_eq!(r.verdict, Verdict3::Sat);
        assert!(r.steps.is_empty() && r.history.is_empty());
        assert_eq!(parse_program(&r.program).unwrap(), p);
        assert!(r.model.is_some());
    }

    #[test]
    fn every_step_keeps_the_verdict() {
        let p = parse_program(SUM_UPTO).unwrap();
        let all = [
            StepKind::DeleteUseless,
            StepKind::DeleteUnsat,
            StepKind::Specialise,
            StepKind::Raf,
            StepKind::Far,
            StepKind::Strengthen,
        ];
        let r = run_pipeline(&p, &spec(&all)).unwrap();
        assert!(r.consistent(), "{r}");
        assert_eq!(r.verdict, Verdict3::Sat);
        assert_eq!(r.steps.len(), all.len());
        assert_eq!(r.steps[0].clauses_in, 4);
        for w in r.steps.windows(2) {
            assert_eq!(w[0].clauses_out, w[1].clauses_in);
        }
    }

    #[test]
    fn unsafe_program_stays_unsat_with_a_witness() {
        let p = parse_program(&SUM_UPTO.replace("M>Sum", "M>=Sum")).unwrap();
        let r = run_pipeline(&p, &spec(&[StepKind::Specialise, StepKind::Qa, StepKind::Far])).unwrap();
        assert!(r.consistent(), "{r}");
        assert_eq!(r.verdict, Verdict3::Unsat);
        assert!(r.witness.is_some());
    }

    #[test]
    fn history_replays_to_the_same_program() {
        let p = parse_program(SUM_UPTO).unwrap();
        let steps = [StepKind::Specialise, StepKind::Raf, StepKind::DeleteUseless, StepKind::Qa];
        let r = run_pipeline(&p, &spec(&steps)).unwrap();
        assert!(r.history.lines().filter(|l| l.starts_with("define")).count() > 0);
        let q = replay_history(&p, &r.history, &EngineSettings::default()).unwrap();
        assert_eq!(q.to_string(), r.program);
    }

    #[test]
    fn tampered_history_is_rejected() {
        let p = parse_program(SUM_UPTO).unwrap();
        let r = run_pipeline(&p, &spec(&[StepKind::Specialise])).unwrap();
        let bad = r.history.lines().filter(|l| !l.starts_with("unfold")).collect::<Vec<_>>().join("\n");
        assert!(replay_history(&p, &bad, &EngineSettings::default()).is_err());
        assert!(matches!(
            replay_history(&p, "unfold 0 0\n", &EngineSettings::default()),
            Err(PipelineError::History { line: 1, .. })
        ));
        assert!(matches!(
            replay_history(&p, "step raf\nunfold 0 0\n", &EngineSettings::default()),
            Err(PipelineError::History { line: 1, .. })
        ));
    }

    #[test]
    fn step_failures_name_the_step() {
        let p = parse_program("false :- X>0, p(X), q(X). p(X) :- X=1. q(X) :- r(X), p(X). r(X) :- X=1.").unwrap();
        match run_pipeline(&p, &spec(&[StepKind::Raf, StepKind::Reverse])) {
            Err(PipelineError::Step { index: 2, kind: StepKind::Reverse, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mode_override_applies_to_the_input() {
        let p = parse_program("false :- 2*X=1, p(X). p(X) :- X>=0.").unwrap();
        assert_eq!(run_pipeline(&p, &PipelineSpec::default()).unwrap().verdict, Verdict3::Unsat);
        let mut s = PipelineSpec::default();
        s.settings.mode = Some(Mode::Integer);
        let r = run_pipeline(&p, &s).unwrap();
        assert_eq!(r.mode, Mode::Integer);
        assert_eq!(r.verdict, Verdict3::Sat);
    }

    #[test]
    fn imperative_sources_load_in_both_styles() {
        let src = "// pre: m >= 0\n// post: sum >= m\n// entry: sum = f(m);\n\
            int f(int x) { int r = 0; while (x > 0) { r = r + x; x = x - 1; } return r; }\n";
        for style in [ImpStyle::BigStep, ImpStyle::Reach] {
            let kind = InputKind::for_path(Path::new("a.c"), style);
            let p = load_program(src, kind).unwrap();
            assert_eq!(p.mode, Mode::Integer);
            assert_eq!(run_pipeline(&p, &PipelineSpec::default()).unwrap().verdict, Verdict3::Sat, "{style:?}");
        }
        assert_eq!(InputKind::for_path(Path::new("a.chc"), ImpStyle::Reach), InputKind::Chc);
    }

    #[test]
    fn reports_render_as_text_and_json() {
        let p = parse_program(SUM_UPTO).unwrap();
        let r = run_pipeline(&p, &spec(&[StepKind::Raf])).unwrap();
        let text = r.render(OutputFormat::Text);
        assert!(text.contains("% step 1 raf: 4 -> 4 clauses"));
        assert!(text.contains("% verdict: sat"));
        let v: serde_json::Value = serde_json::from_str(&r.render(OutputFormat::Json)).unwrap();
        assert_eq!(v["final_verdict"], "sat");
        assert_eq!(v["steps"][0]["name"], "raf");
        assert_eq!(v["steps"][0]["clauses_in"], 4);
        assert!(v["steps"][0]["millis"].is_u64());
        assert!(v.get("witness").is_none());
    }
}
