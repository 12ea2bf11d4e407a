//! Regressions against printed clause sets, models and verdicts.

use std::time::{Duration, Instant};

use hornkit::analyze::{check_goals, check_model, cpa_lfp, AnalysisConfig, Candidate};
use hornkit::equiv::{facts_equivalent, programs_equivalent, programs_equivalent_up_to_argument_order};
use hornkit::eval::{kleene_lfp, td_derive, DerivationOutcome, Interpretation};
use hornkit::imp::{parse_imp, translate_bigstep, translate_reach};
use hornkit::lin::{self, Verdict3};
use hornkit::pipeline::{check_sat, EngineSettings, Method};
use hornkit::syntax::{parse_constraint, parse_program, Clause, Pred, Program};
use hornkit::transform::{
    far, parse_script, predicate_pair, qa_transform, raf, replay, specialise, strengthen, Generalisation,
    SpecialiseConfig, TransformError,
};

use super::Outcome;

fn prog(s: &str) -> Program {
    parse_program(s).unwrap_or_else(|e| panic!("{e}: {s}"))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn goals(p: &Program) -> Vec<Clause> {
    p.goals().map(|(_, g)| g.clone()).collect()
}

/// Polyhedral analysis reaches a post-fixpoint that proves every goal.
fn cpa_proves(p: &Program) -> bool {
    let r = cpa_lfp(p, &AnalysisConfig::default());
    r.stable && check_goals(&r.model, &goals(p)).iter().all(|v| *v == Verdict3::Sat)
}

/// Facts given with predicate `from`, renamed to `to`.
fn facts_for(text: &str, from: &str, to: &Pred) -> Interpretation {
    prog(&text.replace(&format!("{from}("), &format!("{}(", to.name()))).clauses.into_iter().collect()
}

/// The predicate of the first body atom of the goal.
fn goal_pred(p: &Program) -> Pred {
    p.goals().next().expect("a goal").1.body[0].pred.clone()
}

const SUM_UPTO: &str = "
    false :- M>Sum, M>=0, sum_upto(M,Sum).
    sum_upto(X,R) :- R0=0, while(X,R0,R).
    while(X1,R1,R) :- X1>0, R2=R1+X1, X2=X1-1, while(X2,R2,R).
    while(X1,R1,R) :- X1=<0, R=R1.";

pub fn sum_upto_analysis() -> Outcome {
    let start = Instant::now();
    let p = prog(SUM_UPTO);
    let r = cpa_lfp(&p, &AnalysisConfig::default());
    let verdicts = check_goals(&r.model, &goals(&p));
    let elapsed = start.elapsed();
    ensure(r.stable, || "analysis did not stabilise".into())?;
    // while(X,R1,R): R>=R1, R>=X+R1; sum_upto(X,R): R>=X, R>=0
    let w = r.model.get(&Pred::new("while")).ok_or("no invariant for while")?;
    ensure(lin::equivalent(w, &parse_constraint("X3>=X2, X3>=X1+X2").unwrap()), || format!("while: {w}"))?;
    let s = r.model.get(&Pred::new("sum_upto")).ok_or("no invariant for sum_upto")?;
    ensure(lin::equivalent(s, &parse_constraint("X2>=X1, X2>=0").unwrap()), || format!("sum_upto: {s}"))?;
    ensure(verdicts == vec![Verdict3::Sat], || format!("goal verdicts {verdicts:?}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("model matches, goal proved in {} ms", elapsed.as_millis()))
}

pub fn specialisation() -> Outcome {
    // The list argument [0] / [N|T] is represented by its first element.
    let p = prog(
        ":- mode(int).
         false :- X=0, p(X,0).
         p(X,C) :- X=Y+1, p(Y,C).
         p(X,N) :- X>N.
         p(X,N) :- N>0, q(X,N).
         q(X,N) :- X=N.
         q(X,N) :- X>N, q(X,N).",
    );
    let cfg = SpecialiseConfig { generalisation: Generalisation::Properties, ..Default::default() };
    let out = specialise(&p, &cfg).map_err(|e| e.to_string())?.program();
    let want = prog(":- mode(int). false :- X=0, sp(X). sp(X) :- X=Y+1, sp(Y). sp(X) :- X>0.");
    ensure(programs_equivalent(&out, &want), || format!("got\n{out}"))?;
    let sp = goal_pred(&out);
    let lfp = kleene_lfp(&out, 10);
    ensure(lfp.converged && lfp.iterations <= 2, || format!("kleene: {} iterations", lfp.iterations))?;
    let model = facts_for(":- mode(int). sp(X) :- X>0.", "sp", &sp);
    let model_prog = Program::new(model.facts().to_vec(), out.mode);
    ensure(facts_equivalent(&lfp.interpretation, &model_prog), || "least model differs".into())?;
    ensure(check_model(&out, Candidate::Facts(&model)), || "model check failed".into())?;
    Ok(format!("3 clauses, least model in {} iterations", lfp.iterations))
}

pub fn query_answer() -> Outcome {
    let p = prog(
        ":- mode(int).
         false :- X=0, p(X).
         p(X) :- X=1.
         p(X) :- X>1, Y=X+1, p(Y).",
    );
    let (q, _) = qa_transform(&p, 0).map_err(|e| e.to_string())?;
    let want = prog(
        ":- mode(int).
         false :- X=0, p_a(X).
         p_a(X) :- X=1, p_q(X).
         p_a(X) :- X>1, Y=X+1, p_q(X), p_a(Y).
         p_q(Y) :- X>1, Y=X+1, p_q(X).
         p_q(X) :- X=0.",
    );
    ensure(q.len() == 5 && q.to_string() == want.to_string(), || format!("got\n{q}"))?;
    let lfp = kleene_lfp(&q, 10);
    ensure(lfp.converged, || "no fixpoint".into())?;
    ensure(facts_equivalent(&lfp.interpretation, &prog(":- mode(int). p_q(X) :- X=0.")), || "fixpoint differs".into())?;
    let v = check_sat(&q, Method::Bu, &EngineSettings::default()).verdict;
    ensure(v == Verdict3::Sat, || format!("verdict {v:?}"))?;
    Ok("5 clauses, fixpoint {p_q(X) :- X=0}, sat".into())
}

pub fn widening() -> Outcome {
    let c1 = parse_constraint("X>=0, X=<0, Y>=0, Y=<0").unwrap();
    let c2 = parse_constraint("0<N, X=1, Y=1").unwrap();
    let w = lin::widen(&c1, &c2);
    ensure(lin::equivalent(&w, &parse_constraint("X>=0, Y>=0").unwrap()), || format!("got {w}"))?;
    Ok(format!("{w}"))
}

const PROPAGATION: &str = "
    false :- X=0, Y=0, p(X,Y,N).
    p(X,Y,N) :- X>=N, X>Y.
    p(X,Y,N) :- X<N, X1=X+1, Y1=X1+Y, p(X1,Y1,N).";

pub fn constraint_propagation() -> Outcome {
    // The model relies on X>Y entailing X>=Y+1, which needs integers.
    let p = prog(&format!(":- mode(int).\n{PROPAGATION}"));
    let out = specialise(&p, &SpecialiseConfig::default()).map_err(|e| e.to_string())?.program();
    let want = prog(
        ":- mode(int).
         false :- X=0, Y=0, sp(X,Y,N).
         sp(X,Y,N) :- Y>=0, X>=N, X>Y.
         sp(X,Y,N) :- X>=0, Y>=0, X<N, X1=X+1, Y1=X1+Y, sp(X1,Y1,N).",
    );
    ensure(programs_equivalent(&out, &want), || format!("got\n{out}"))?;
    ensure(cpa_proves(&out), || "analysis does not prove the goal".into())?;
    let model = facts_for(":- mode(int). sp(X,Y,N) :- X>=Y+1, Y>=0.", "sp", &goal_pred(&out));
    ensure(check_model(&out, Candidate::Facts(&model)), || "model check failed".into())?;
    Ok("goal, recursive clause and fact match; model validated".into())
}

pub fn strengthening() -> Outcome {
    let p = prog(PROPAGATION);
    let s = strengthen(&p, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    ensure(s.stable, || "analysis of the query-answer program did not stabilise".into())?;
    let (_, g) = s.program.goals().next().ok_or("no goal")?;
    ensure(!lin::is_sat(&g.constraint), || format!("goal body still satisfiable: {g}"))?;
    // Refuted by the goal constraint alone: no clause is ever resolved.
    ensure(matches!(td_derive(&s.program, g, 0), DerivationOutcome::FinitelyFailed), || "goal not refuted at depth 0".into())?;
    Ok(format!("goal `{g}` is unsatisfiable"))
}

pub fn predicate_pairing() -> Outcome {
    let p = prog(
        "false :- Z1>Z2, X1=X2, X2=<Y2, sur(X1,Z1), pr(X2,Y2,Z2).
         sur(X,Z) :- f(X,Z).
         f(N,Z) :- N=<0, Z=0.
         f(N,Z) :- N>=1, N1=N-1, Z=R+N, f(N1,R).
         pr(X,Y,Z) :- W=0, X=<Y, g(X,Y,W,Z).
         g(N,P,R,R2) :- N=<0, N=<P, R>=0, R2=R.
         g(N,P,R,R2) :- N>=1, N=<P, R>=0, N1=N-1, R1=P+R, g(N1,P,R1,R2).",
    );
    let out = predicate_pair(&p, &SpecialiseConfig::default()).map_err(|e| e.to_string())?.program();
    let want = prog(
        "false :- Z1>Z2, X1=<Y2, W=0, fg(X1,Z1,Y2,W,Z2).
         fg(N,Z1,Y,W,Z2) :- N=<0, N=<Y, W>=0, Z1=0, Z2=W.
         fg(N,Z1,Y,W,Z2) :- N>=1, N=<Y, W>=0, N1=N-1, Z1=R+N, M=Y+W, fg(N1,R,Y,M,Z2).",
    );
    ensure(programs_equivalent(&out, &want), || format!("got\n{out}"))?;
    let model = facts_for("fg(X1,Z1,Y2,W,Z2) :- Z2-W>=Z1, Z1>=0, W>=0.", "fg", &goal_pred(&out));
    ensure(check_model(&out, Candidate::Facts(&model)), || "model check failed".into())?;
    ensure(cpa_proves(&out), || "analysis does not prove the goal".into())?;
    Ok("paired program matches; model validated; goal proved".into())
}

pub fn argument_filtering() -> Outcome {
    let p = prog("false :- X>0, q(X,Y). q(X,Y) :- X<Y.");
    let r = raf(&p);
    ensure(r.to_string() == "false :- X>0, q1(X).\nq1(X) :- X<Y.\n", || format!("after raf:\n{r}"))?;
    let f = far(&r);
    ensure(f.to_string() == "false :- q2.\nq2.\n", || format!("after far:\n{f}"))?;
    Ok("{false :- q2. q2.}".into())
}

const SUM_UPTO_SOURCE: &str = "
int sum_upto(int x) {
  int r = 0;
  while (x > 0) {
    r = r + x;
    x = x - 1;
  }
  return r;
}
// pre: m >= 0
// post: sum >= m
// entry: sum = sum_upto(m);
";

pub fn imperative_translation() -> Outcome {
    let (src, triple) = parse_imp(SUM_UPTO_SOURCE).map_err(|e| e.to_string())?;
    let big = translate_bigstep(&src, &triple);
    ensure(programs_equivalent(&big, &prog(SUM_UPTO)), || format!("big-step:\n{big}"))?;
    let reach = translate_reach(&src, &triple).map_err(|e| e.to_string())?;
    let while_error = prog(
        "false :- M>=0, assign_error(M).
         assign_error(M) :- X=M, Sum=0, while_error(X,M,Sum).
         while_error(X,M,Sum) :- X=<0, M>Sum.
         while_error(X,M,Sum) :- X>0, Sum1=Sum+X, X1=X-1, while_error(X1,M,Sum1).",
    );
    ensure(programs_equivalent_up_to_argument_order(&reach, &while_error, 100), || format!("reach:\n{reach}"))?;
    ensure(cpa_proves(&big) && cpa_proves(&reach), || "valid triple not proved".into())?;

    let (bad, bad_triple) = parse_imp(&SUM_UPTO_SOURCE.replace("sum >= m", "sum > m")).map_err(|e| e.to_string())?;
    let settings = EngineSettings { td_depth: 8, ..Default::default() };
    for p in [translate_bigstep(&bad, &bad_triple), translate_reach(&bad, &bad_triple).map_err(|e| e.to_string())?] {
        let v = check_sat(&p, Method::Td, &settings).verdict;
        ensure(v == Verdict3::Unsat, || format!("invalid triple gave {v:?} for\n{p}"))?;
    }
    Ok("both translations match and are proved; invalid triple refuted within depth 8".into())
}

pub fn self_folding() -> Outcome {
    let p = prog("p. false :- p.");
    // define q :- p, then fold the goal and the definition itself with it
    let steps = parse_script("define 0 - q :- p.\nfold 1 0 0\nfold 2 0 0\n").map_err(|e| e.to_string())?;
    match replay(&p, &steps) {
        Err(TransformError::SelfFold { .. } | TransformError::FoldedBeforeUnfolded { .. }) => {}
        other => return Err(format!("self-folding accepted: {:?}", other.map(|s| s.program().to_string()))),
    }
    let (_, g) = p.goals().next().unwrap();
    ensure(matches!(td_derive(&p, g, 1), DerivationOutcome::Successful(_)), || "no refutation at depth 1".into())?;
    Ok("audit rejects the sequence; original refuted at depth 1".into())
}
