//! Flows across parsing, translation, transformation and checking.

use hornkit::analyze::{check_model, cpa_lfp, AnalysisConfig, Candidate};
use hornkit::eval::{kleene_lfp, success_set_k, td_derive, DerivationOutcome};
use hornkit::imp::{parse_imp, translate_bigstep, translate_reach};
use hornkit::lin::{entails_disjunction, Verdict3};
use hornkit::pipeline::{
    check_sat, load_program, parse_config, replay_history, run_pipeline, EngineSettings, ImpStyle, InputKind, Method,
    PipelineSpec, StepKind,
};
use hornkit::syntax::{parse_program, Atom, Pred, Program, Var};
use hornkit::transform::reverse;

const LOOP_SOURCE: &str = "
// pre: n >= 0
// post: c == n
// entry: c = count(n);
int count(int n) {
  int i = 0;
  while (i < n) { i = i + 1; }
  return i;
}
";

const TWO_LOOPS: &str = "
// pre: a >= 0, b >= 0
// post: s >= a + b
// entry: s = add(a, b);
int add(int a, int b) {
  int s = a;
  int k = b;
  while (k > 0) { s++; k--; }
  return s;
}
";

fn spec(steps: &[StepKind]) -> PipelineSpec {
    PipelineSpec { steps: steps.to_vec(), check_each: true, ..PipelineSpec::default() }
}

#[test]
fn translated_programs_keep_their_verdict_through_pipelines() {
    for src in [LOOP_SOURCE, TWO_LOOPS] {
        for style in [ImpStyle::BigStep, ImpStyle::Reach] {
            let p = load_program(src, InputKind::Imp(style)).unwrap();
            let direct = check_sat(&p, Method::Auto, &EngineSettings::default()).verdict;
            assert_ne!(direct, Verdict3::Unsat, "{style:?}\n{p}");
            let r = run_pipeline(&p, &spec(&[StepKind::Specialise, StepKind::Raf, StepKind::Strengthen])).unwrap();
            assert!(r.consistent(), "{r}");
            assert_eq!(r.verdict, Verdict3::Sat, "{r}");
        }
    }
}

#[test]
fn broken_postconditions_are_refuted_in_both_styles() {
    let bad = LOOP_SOURCE.replace("c == n", "c > n");
    let (p, t) = parse_imp(&bad).unwrap();
    let settings = EngineSettings { td_depth: 8, ..Default::default() };
    for q in [translate_bigstep(&p, &t), translate_reach(&p, &t).unwrap()] {
        let r = check_sat(&q, Method::Td, &settings);
        assert_eq!(r.verdict, Verdict3::Unsat, "{q}");
        assert!(!r.witness.unwrap().path.is_empty());
    }
}

#[test]
fn reversal_of_reachability_clauses_preserves_refutations() {
    let bad = TWO_LOOPS.replace("s >= a + b", "s > a + b");
    let (p, t) = parse_imp(&bad).unwrap();
    let q = translate_reach(&p, &t).unwrap();
    let r = reverse(&q).unwrap();
    assert!(r.all_linear());
    let settings = EngineSettings { td_depth: 10, ..Default::default() };
    assert_eq!(check_sat(&q, Method::Td, &settings).verdict, Verdict3::Unsat);
    assert_eq!(check_sat(&r, Method::Td, &settings).verdict, Verdict3::Unsat);
}

#[test]
fn printed_programs_parse_back_identically() {
    let texts = [
        "false :- M>Sum, M>=0, sum_upto(M,Sum).\nsum_upto(X,R) :- R0=0, while(X,R0,R).",
        ":- mode(int).\np(X,Y) :- 2*X=3*Y+1, X=\\=Y.\nfalse :- p(X,Y), p(Y,X).",
        "q.\nfalse :- q.\nr(X) :- X>=1/2, X<3.",
    ];
    for t in texts {
        let p = parse_program(t).unwrap();
        let again = parse_program(&p.to_string()).unwrap();
        assert_eq!(p, again, "{p}");
    }
}

#[test]
fn engines_agree_on_finite_programs() {
    let p = parse_program(
        ":- mode(int).
         false :- X>=4, r(X).
         r(X) :- X=0.
         r(X) :- X=Y+2, Y<4, r(Y).",
    )
    .unwrap();
    let lfp = kleene_lfp(&p, 20);
    assert!(lfp.converged);
    // every top-down answer is covered by the bottom-up model
    let pattern = Atom::with_vars(Pred::new("r"), &[Var::new("X")]);
    let answers = success_set_k(&p, &pattern, 10);
    assert!(!answers.is_empty());
    let r = Pred::new("r");
    let model: Vec<_> = lfp.interpretation.facts_for(&r).map(|f| f.constraint.clone()).collect();
    for fact in answers.facts() {
        assert!(entails_disjunction(&fact.constraint, &model), "{fact}");
    }
    let verdict = |m| check_sat(&p, m, &EngineSettings::default()).verdict;
    assert_eq!(verdict(Method::Bu), Verdict3::Unsat);
    assert_eq!(verdict(Method::Td), Verdict3::Unsat);
    // the over-approximation proves satisfiability only
    assert_eq!(verdict(Method::Cpa), Verdict3::Unknown);
    let (_, g) = p.goals().next().unwrap();
    match td_derive(&p, g, 10) {
        // r(4) from r(2) from r(0)
        DerivationOutcome::Successful(s) => assert_eq!(s.path.len(), 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn analysis_models_are_models() {
    let p = load_program(TWO_LOOPS, InputKind::Imp(ImpStyle::BigStep)).unwrap();
    let r = cpa_lfp(&p, &AnalysisConfig::default());
    assert!(r.stable);
    assert!(check_model(&p, Candidate::Poly(&r.model)));
}

#[test]
fn configured_pipelines_replay_from_their_history() {
    let cfg = parse_config("steps = delete-useless, specialise, far, raf, qa\nmethod = cpa\ncheck_each = true\n").unwrap();
    let p: Program = load_program(TWO_LOOPS, InputKind::Imp(ImpStyle::BigStep)).unwrap();
    let r = run_pipeline(&p, &cfg).unwrap();
    assert_eq!(r.steps.len(), 5);
    assert!(r.consistent());
    let q = replay_history(&p, &r.history, &cfg.settings).unwrap();
    assert_eq!(q.to_string(), r.program);
}
