//! Randomised property suites with brute-force and cross-engine oracles.
//! Every suite runs a fixed number of cases from a deterministic seed.

use std::collections::{BTreeMap, BTreeSet};

use hornkit::eval::{tp_step, Interpretation};
use hornkit::lin::{self, Verdict3, DEFAULT_BRANCH_BUDGET};
use hornkit::pipeline::{check_sat, EngineSettings, Method};
use hornkit::syntax::{
    canonical_vars, rat, Atom, Head, AtomicConstraint, Clause, CmpOp, LinearConstraint, LinearTerm, Mode, Pred, Program,
    Rat, Var,
};
use hornkit::transform::{far, qa_transform, raf, reverse};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use super::Outcome;

const CASES: u32 = 1000;
/// Grid half-width: variables range over `-BOX..=BOX`.
const BOX: i64 = 3;

fn runner() -> TestRunner {
    let cfg = Config { cases: CASES, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(name: &str, s: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner().run(&s, test).map_err(|e| format!("{name}: {e}"))
}

fn var(i: usize) -> Var {
    Var::new(["X", "Y", "Z", "U", "V", "W"][i])
}

const OPS: [CmpOp; 5] = [CmpOp::Le, CmpOp::Lt, CmpOp::Eq, CmpOp::Ge, CmpOp::Gt];

/// `sum(coeffs[i] * vars[i]) op k`.
fn atom_over(vars: Vec<Var>) -> impl Strategy<Value = AtomicConstraint> {
    let n = vars.len();
    (prop::collection::vec(-3i64..=3, n), -4i64..=4, 0..OPS.len()).prop_map(move |(cs, k, op)| {
        let t = LinearTerm::from_parts(vars.iter().cloned().zip(cs.into_iter().map(rat)), rat(0));
        AtomicConstraint::new(&t, OPS[op], &LinearTerm::int(k))
    })
}

fn constraint_over(vars: Vec<Var>, atoms: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = LinearConstraint> {
    prop::collection::vec(atom_over(vars), atoms).prop_map(LinearConstraint::from_atoms)
}

fn boxed(c: &LinearConstraint, vars: &[Var]) -> LinearConstraint {
    let mut out = c.clone();
    for v in vars {
        let t = LinearTerm::var(v.clone());
        out.push(AtomicConstraint::ge(&t, &LinearTerm::int(-BOX)));
        out.push(AtomicConstraint::le(&t, &LinearTerm::int(BOX)));
    }
    out
}

/// All integer points of the box over `vars`.
fn grid(vars: &[Var]) -> Vec<BTreeMap<Var, Rat>> {
    let mut pts = vec![BTreeMap::new()];
    for v in vars {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                (-BOX..=BOX).map(move |x| {
                    let mut q = p.clone();
                    q.insert(v.clone(), rat(x));
                    q
                })
            })
            .collect();
    }
    pts
}

fn holds(c: &LinearConstraint, pt: &BTreeMap<Var, Rat>) -> bool {
    let mut env = pt.clone();
    for v in c.vars() {
        env.entry(v).or_insert_with(|| rat(0));
    }
    c.holds(&env)
}

fn boxed_constraint() -> impl Strategy<Value = (Vec<Var>, LinearConstraint)> {
    (1usize..=3).prop_flat_map(|n| {
        let vars: Vec<Var> = (0..n).map(var).collect();
        (Just(vars.clone()), constraint_over(vars, 1..=4))
    })
}

fn solv_suite() -> Result<(), String> {
    run("solv", boxed_constraint(), |(vars, c)| {
        let c = boxed(&c, &vars);
        let any = grid(&vars).iter().any(|p| holds(&c, p));
        let (vi, si) = lin::solv(&c, Mode::Integer, DEFAULT_BRANCH_BUDGET);
        prop_assert_ne!(vi, Verdict3::Unknown, "bounded problems are decided");
        prop_assert_eq!(vi == Verdict3::Sat, any, "integer verdict for {}", c);
        if let Some(s) = si {
            prop_assert!(holds(&c, &s) && s.values().all(|x| x.is_integer()), "bad integer sample for {}", c);
        }
        let (vr, sr) = lin::solv(&c, Mode::Rational, DEFAULT_BRANCH_BUDGET);
        prop_assert!(!(any && vr != Verdict3::Sat), "integer point but rationally {vr:?}: {}", c);
        if vr == Verdict3::Sat {
            prop_assert!(holds(&c, sr.as_ref().expect("sample")), "bad rational sample for {}", c);
        }
        Ok(())
    })
}

fn entail_suite() -> Result<(), String> {
    let s = (1usize..=3).prop_flat_map(|n| {
        let vars: Vec<Var> = (0..n).map(var).collect();
        (Just(vars.clone()), constraint_over(vars.clone(), 1..=3), constraint_over(vars, 1..=2))
    });
    run("entail", s, |(vars, c1, c2)| {
        let c1 = boxed(&c1, &vars);
        if lin::entail(&c1, &c2) {
            for p in grid(&vars) {
                prop_assert!(!holds(&c1, &p) || holds(&c2, &p), "{} ⊨ {} fails at {:?}", c1, c2, p);
            }
        } else {
            let w = lin::entail_witness(&c1, &c2).expect("non-entailment has a witness");
            prop_assert!(holds(&c1, &w) && !holds(&c2, &w), "bad witness {:?} for {} ⊭ {}", w, c1, c2);
        }
        Ok(())
    })
}

fn proj_suite() -> Result<(), String> {
    let s = boxed_constraint().prop_flat_map(|(vars, c)| {
        let n = vars.len();
        (Just(vars), Just(c), prop::collection::vec(any::<bool>(), n))
    });
    run("proj", s, |(vars, c, mask)| {
        let c = boxed(&c, &vars);
        let keep: BTreeSet<Var> = vars.iter().zip(&mask).filter(|(_, m)| **m).map(|(v, _)| v.clone()).collect();
        let kept: Vec<Var> = keep.iter().cloned().collect();
        let pc = lin::proj(&c, &keep);
        prop_assert!(pc.vars().is_subset(&keep), "projection {} mentions eliminated variables", pc);
        // every point of c survives projection
        for p in grid(&vars).into_iter().filter(|p| holds(&c, p)) {
            let q: BTreeMap<Var, Rat> = p.into_iter().filter(|(v, _)| keep.contains(v)).collect();
            prop_assert!(holds(&pc, &q), "{:?} lost by projecting {}", q, c);
        }
        // every point of the projection extends to a (rational) point of c
        for q in grid(&kept).into_iter().filter(|q| holds(&pc, q)) {
            let mut fixed = c.clone();
            for (v, x) in &q {
                fixed.push(AtomicConstraint::eq(&LinearTerm::var(v.clone()), &LinearTerm::constant(x.clone())));
            }
            prop_assert!(lin::is_sat(&fixed), "{:?} in {} has no extension in {}", q, pc, c);
        }
        Ok(())
    })
}

fn widen_suite() -> Result<(), String> {
    let vars = vec![var(0), var(1)];
    let pool = prop::collection::vec(constraint_over(vars, 1..=3), 1..=6);
    run("widen", pool, |pool| {
        let n = pool.len();
        let mut x = pool[0].clone();
        let mut calm = 0;
        let mut size = usize::MAX;
        for k in 1..=64 {
            let h = lin::convex_hull(&x, &pool[k % n]);
            let w = lin::widen(&x, &h);
            prop_assert!(lin::entail(&h, &w), "widening {} by {} gave {}, not an upper bound", x, h, w);
            let stable = lin::equivalent(&w, &x);
            calm = if stable { calm + 1 } else { 0 };
            if !x.is_falsum() && !stable {
                let atoms: usize = w.conjuncts().iter().map(|a| a.split_equality().len()).sum();
                prop_assert!(atoms < size, "widening did not drop a constraint: {} to {}", x, w);
            }
            if !w.is_falsum() {
                size = w.conjuncts().iter().map(|a| a.split_equality().len()).sum();
            }
            x = w;
            if calm >= n {
                for p in &pool {
                    prop_assert!(lin::entail(p, &x), "limit {} misses {}", x, p);
                }
                return Ok(());
            }
        }
        Err(TestCaseError::fail(format!("no stabilisation on {pool:?}")))
    })
}

/// A linear update `V1 = a*X + b*Y + k` (or no constraint at all).
fn update() -> impl Strategy<Value = Option<(i64, i64, i64)>> {
    prop_oneof![
        6 => (-1i64..=1, -1i64..=1, -2i64..=2).prop_map(Some),
        1 => Just(None),
    ]
}

#[derive(Clone, Debug)]
struct Shape {
    integer: bool,
    init: Vec<AtomicConstraint>,
    /// Per transition: updates of X, Y, Z and a guard.
    steps: Vec<([Option<(i64, i64, i64)>; 3], Vec<AtomicConstraint>)>,
    /// Route the goal through an intermediate predicate.
    exit: Option<Vec<AtomicConstraint>>,
    bad: Vec<AtomicConstraint>,
}

fn xyz() -> Vec<Var> {
    vec![var(0), var(1), var(2)]
}

fn xy() -> Vec<Var> {
    vec![var(0), var(1)]
}

fn shape() -> impl Strategy<Value = Shape> {
    let guard = || prop::collection::vec(atom_over(xy()), 0..=1);
    let step = ([update(), update(), update()], guard());
    (
        any::<bool>(),
        prop::collection::vec(atom_over(xyz()), 1..=2),
        prop::collection::vec(step, 1..=2),
        prop::option::of(guard()),
        prop::collection::vec(atom_over(xy()), 1..=2),
    )
        .prop_map(|(integer, init, steps, exit, bad)| Shape { integer, init, steps, exit, bad })
}

impl Shape {
    fn program(&self) -> Program {
        let (p, q) = (Pred::new("p"), Pred::new("q"));
        let cur = xyz();
        let next: Vec<Var> = ["X1", "Y1", "Z1"].iter().map(|n| Var::new(n)).collect();
        let mut clauses = vec![Clause::fact(Atom::with_vars(p.clone(), &cur), LinearConstraint::from_atoms(self.init.clone()))];
        for (ups, guard) in &self.steps {
            let mut c = LinearConstraint::from_atoms(guard.clone());
            for (v1, up) in next.iter().zip(ups) {
                if let Some((a, b, k)) = up {
                    let t = LinearTerm::from_parts([(var(0), rat(*a)), (var(1), rat(*b))], rat(*k));
                    c.push(AtomicConstraint::eq(&LinearTerm::var(v1.clone()), &t));
                }
            }
            clauses.push(Clause::new(
                Head::Atom(Atom::with_vars(p.clone(), &next)),
                c,
                vec![Atom::with_vars(p.clone(), &cur)],
            ));
        }
        let target = match &self.exit {
            Some(g) => {
                let body = vec![Atom::with_vars(p.clone(), &cur)];
                clauses.push(Clause::new(Head::Atom(Atom::with_vars(q.clone(), &cur)), LinearConstraint::from_atoms(g.clone()), body));
                q
            }
            None => p,
        };
        clauses.push(Clause::goal(LinearConstraint::from_atoms(self.bad.clone()), vec![Atom::with_vars(target, &cur)]));
        Program::new(clauses, if self.integer { Mode::Integer } else { Mode::Rational })
    }
}

fn verdict(p: &Program) -> Verdict3 {
    let mut s = EngineSettings { td_depth: 4, ..Default::default() };
    s.analysis.max_iters = 20;
    check_sat(p, Method::Auto, &s).verdict
}

fn preservation_suite() -> Result<String, String> {
    use std::cell::Cell;
    let decided = Cell::new(0usize);
    let total = Cell::new(0usize);
    run("preservation", shape(), |s| {
        let p = s.program();
        let before = verdict(&p);
        let err = |e: hornkit::transform::TransformError| TestCaseError::fail(format!("{e} on\n{p}"));
        let outs = [
            ("qa", qa_transform(&p, 0).map_err(err)?.0),
            ("reverse", reverse(&p).map_err(err)?),
            ("raf", raf(&p)),
            ("far", far(&p)),
        ];
        for (name, q) in outs {
            let after = verdict(&q);
            total.set(total.get() + 1);
            if before != Verdict3::Unknown && after != Verdict3::Unknown {
                decided.set(decided.get() + 1);
                prop_assert_eq!(before, after, "{} changed the verdict of\n{}into\n{}", name, p, q);
            }
        }
        Ok(())
    })?;
    let (d, t) = (decided.get(), total.get());
    if d * 2 < t {
        return Err(format!("preservation: only {d} of {t} pairs decided"));
    }
    Ok(format!("{d}/{t} transformed pairs decided"))
}

fn facts(preds: &[Pred]) -> impl Strategy<Value = Vec<(usize, LinearConstraint)>> {
    let n = preds.len();
    prop::collection::vec((0..n, constraint_over(canonical_vars(3), 1..=2)), 0..=4)
}

fn interpretation(preds: &[Pred], fs: &[(usize, LinearConstraint)]) -> Interpretation {
    let args = canonical_vars(3);
    fs.iter().map(|(i, c)| Clause::fact(Atom::with_vars(preds[*i].clone(), &args), c.clone())).collect()
}

/// Every fact of `a` is covered by the facts of `b` for its predicate.
fn covered(a: &Interpretation, b: &Interpretation) -> Result<(), String> {
    for f in a.facts() {
        let pred = f.head_pred().expect("fact");
        let ds: Vec<LinearConstraint> = b.facts_for(pred).map(|g| g.constraint.clone()).collect();
        if !lin::entails_disjunction(&f.constraint, &ds) {
            return Err(format!("{f} not covered"));
        }
    }
    Ok(())
}

fn monotonicity_suite() -> Result<(), String> {
    let preds = [Pred::new("p"), Pred::new("q")];
    let drops = prop::collection::vec(prop::collection::vec(any::<bool>(), 2), 4);
    let s = (shape(), facts(&preds), drops, facts(&preds));
    run("tp monotonicity", s, |(shape, base, drops, extra)| {
        let p = Program { mode: Mode::Rational, ..shape.program() };
        // J: every fact of I with some conjuncts dropped, plus extra facts
        let weakened: Vec<(usize, LinearConstraint)> = base
            .iter()
            .zip(&drops)
            .map(|((i, c), d)| {
                let kept = c.conjuncts().iter().zip(d.iter().chain(std::iter::repeat(&false))).filter(|(_, drop)| !**drop);
                (*i, LinearConstraint::from_atoms(kept.map(|(a, _)| a.clone())))
            })
            .chain(extra)
            .collect();
        let i = interpretation(&preds, &base);
        let j = interpretation(&preds, &weakened);
        covered(&i, &j).map_err(|e| TestCaseError::fail(format!("I ⊑ J by construction: {e}")))?;
        covered(&tp_step(&p, &i), &tp_step(&p, &j)).map_err(|e| TestCaseError::fail(format!("{e} in\n{p}")))?;
        Ok(())
    })
}

fn timed<T>(name: &str, times: &mut Vec<String>, f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    let start = std::time::Instant::now();
    let r = f()?;
    times.push(format!("{name} {} ms", start.elapsed().as_millis()));
    Ok(r)
}

pub fn property_suites() -> Outcome {
    let mut t = Vec::new();
    timed("solv", &mut t, solv_suite)?;
    timed("entail", &mut t, entail_suite)?;
    timed("proj", &mut t, proj_suite)?;
    timed("widen", &mut t, widen_suite)?;
    let pres = timed("preservation", &mut t, preservation_suite)?;
    timed("monotonicity", &mut t, monotonicity_suite)?;
    Ok(format!("6 suites x {CASES} cases; {pres}; {}", t.join(", ")))
}
