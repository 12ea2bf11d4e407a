//! Big-step verification conditions.
//!
//! A function `f(x1,…,xn)` becomes `f(X1,…,Xn,R)`, one clause per path
//! through its body. A loop becomes `w(I…,O…)` over the variables live at
//! its head (`I`) and the variables it assigns that are live after it
//! (`O`): an exit clause per disjunct of the negated condition and a
//! recursive clause per path through the body. The goal is
//! `false :- pre, ¬post, entry calls`, one per disjunct of `¬post`.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{assigned, live_before, loop_head_live, term_vars, Function, ImpProgram, Stmt, TripleSpec};
use super::cond::Cond;
use super::names::Sym;
use crate::syntax::{fresh_pred_exact, Atom, Clause, Head, LinearTerm, Mode, Pred, Program, Var};

struct Loop<'a> {
    pred: Pred,
    func: &'a Function,
    cond: &'a Cond,
    body: &'a [Stmt],
    site: Vec<usize>,
    ins: Vec<String>,
    outs: Vec<String>,
}

struct Ctx<'a> {
    prog: &'a ImpProgram,
    taken: BTreeSet<String>,
    loops: BTreeMap<(String, Vec<usize>), Pred>,
    pending: Vec<Loop<'a>>,
}

/// Orders `set` by position in `order`.
fn ordered(set: &BTreeSet<String>, order: &[String]) -> Vec<String> {
    let mut out: Vec<String> = order.iter().filter(|v| set.contains(*v)).cloned().collect();
    out.extend(set.iter().filter(|v| !order.contains(v)).cloned());
    out
}

impl<'a> Ctx<'a> {
    fn call(&self, st: &mut Sym, var: &str, func: &str, args: &[LinearTerm]) {
        let f = self.prog.function(func).expect("calls are resolved by the parser");
        let mut actual: Vec<(LinearTerm, String)> = args.iter().zip(&f.params).map(|(a, p)| (st.eval(a), p.clone())).collect();
        let out = st.new_var(var);
        actual.push((LinearTerm::var(out.clone()), var.to_string()));
        st.call(&Pred::new(func), actual);
        st.set(var, LinearTerm::var(out));
    }

    /// The predicate of the loop at `site`, and whether it is new.
    fn loop_pred(&mut self, f: &'a Function, site: &[usize]) -> (Pred, bool) {
        let key = (f.name.clone(), site.to_vec());
        if let Some(p) = self.loops.get(&key) {
            return (p.clone(), false);
        }
        let p = fresh_pred_exact(&format!("{}_while", f.name), &self.taken);
        self.taken.insert(p.name().to_string());
        self.loops.insert(key, p.clone());
        (p, true)
    }

    fn exec(&mut self, f: &'a Function, stmts: &'a [Stmt], site: &[usize], live_out: &BTreeSet<String>, mut states: Vec<Sym>) -> Vec<Sym> {
        for (i, s) in stmts.iter().enumerate() {
            let here: Vec<usize> = site.iter().copied().chain([i]).collect();
            match s {
                Stmt::Assign { var, expr } => {
                    for st in &mut states {
                        st.assign(var, expr);
                    }
                }
                Stmt::Call { var, func, args } => {
                    for st in &mut states {
                        self.call(st, var, func, args);
                    }
                }
                Stmt::If { cond, then, els } => {
                    let after = live_before(&stmts[i + 1..], live_out);
                    let mut next = Vec::new();
                    for (branch, positive, arm) in [(0, true, then), (1, false, els)] {
                        let entered = split(&states, cond, positive);
                        let arm_site: Vec<usize> = here.iter().copied().chain([branch]).collect();
                        next.extend(self.exec(f, arm, &arm_site, &after, entered));
                    }
                    states = next;
                }
                Stmt::While { cond, body } => {
                    let after = live_before(&stmts[i + 1..], live_out);
                    let order = f.variables();
                    let ins = ordered(&loop_head_live(cond, body, &after), &order);
                    let outs = ordered(&assigned(body).intersection(&after).cloned().collect(), &order);
                    let (pred, new) = self.loop_pred(f, &here);
                    if new {
                        self.pending.push(Loop { pred: pred.clone(), func: f, cond, body, site: here.clone(), ins: ins.clone(), outs: outs.clone() });
                    }
                    for st in &mut states {
                        let mut args: Vec<(LinearTerm, String)> = ins.iter().map(|v| (st.read(v), v.clone())).collect();
                        let out_vars: Vec<Var> = outs.iter().map(|v| st.new_var(v)).collect();
                        args.extend(out_vars.iter().zip(&outs).map(|(x, v)| (LinearTerm::var(x.clone()), v.clone())));
                        st.call(&pred, args);
                        for (x, v) in out_vars.iter().zip(&outs) {
                            st.set(v, LinearTerm::var(x.clone()));
                        }
                    }
                }
            }
        }
        states
    }

    fn function_clauses(&mut self, f: &'a Function) -> Vec<Clause> {
        let mut st = Sym::new(&f.variables());
        let params: Vec<Var> = f.params.iter().map(|p| st.bind(p)).collect();
        let live_out: BTreeSet<String> = term_vars(&f.ret).collect();
        let base = f.ret.as_var().map_or("ret".to_string(), |v| v.name().to_string());
        let mut out = Vec::new();
        for mut st in self.exec(f, &f.body, &[], &live_out, vec![st]) {
            let ret = st.eval(&f.ret);
            let r = st.as_var(ret, &base, &params);
            let mut head = params.clone();
            head.push(r);
            out.push(finish(st, Head::Atom(Atom::with_vars(Pred::new(&f.name), &head))));
        }
        out
    }

    fn loop_clauses(&mut self, l: &Loop<'a>) -> Vec<Clause> {
        let start = || {
            let mut st = Sym::new(&l.func.variables());
            let ins: Vec<Var> = l.ins.iter().map(|v| st.bind(v)).collect();
            (st, ins)
        };
        let mut out = Vec::new();
        for d in l.cond.dnf(false) {
            let (mut st, mut head) = start();
            st.assume(&d);
            for v in &l.outs {
                let t = st.read(v);
                let x = st.as_var(t, v, &head);
                head.push(x);
            }
            out.push(finish(st, Head::Atom(Atom::with_vars(l.pred.clone(), &head))));
        }
        let head_live: BTreeSet<String> = l.ins.iter().cloned().collect();
        let (st0, ins) = start();
        let entered = split(&[st0], l.cond, true);
        for mut st in self.exec(l.func, l.body, &l.site, &head_live, entered) {
            let mut args: Vec<(LinearTerm, String)> = l.ins.iter().map(|v| (st.read(v), v.clone())).collect();
            let mut head = ins.clone();
            let outs: Vec<Var> = l.outs.iter().map(|v| st.new_var(v)).collect();
            args.extend(outs.iter().zip(&l.outs).map(|(x, v)| (LinearTerm::var(x.clone()), v.clone())));
            head.extend(outs);
            st.call(&l.pred, args);
            out.push(finish(st, Head::Atom(Atom::with_vars(l.pred.clone(), &head))));
        }
        out
    }
}

fn split(states: &[Sym], cond: &Cond, positive: bool) -> Vec<Sym> {
    let mut out = Vec::new();
    for d in cond.dnf(positive) {
        for st in states {
            let mut s = st.clone();
            s.assume(&d);
            if s.feasible() {
                out.push(s);
            }
        }
    }
    out
}

fn finish(st: Sym, head: Head) -> Clause {
    Clause::new(head, st.constraint, st.atoms)
}

/// Big-step verification conditions for `t` over `p` (integer mode).
pub fn translate_bigstep(p: &ImpProgram, t: &TripleSpec) -> Program {
    let mut ctx = Ctx {
        prog: p,
        taken: p.functions.iter().map(|f| f.name.clone()).collect(),
        loops: BTreeMap::new(),
        pending: Vec::new(),
    };
    let mut clauses = Vec::new();
    let negated = t.negated_post();
    if !negated.is_empty() {
        let mut names: Vec<String> = t.pre.vars().iter().chain(&t.post.vars()).map(|v| v.name().to_string()).collect();
        for e in &t.entries {
            names.push(e.var.clone());
            names.extend(e.args.iter().flat_map(term_vars));
        }
        let mut st = Sym::new(&names);
        st.assume(&t.pre);
        for e in &t.entries {
            ctx.call(&mut st, &e.var, &e.func, &e.args);
        }
        for d in &negated {
            let mut g = st.clone();
            g.assume(d);
            if g.feasible() {
                clauses.push(finish(g, Head::False));
            }
        }
    }
    for f in &p.functions {
        clauses.extend(ctx.function_clauses(f));
        while !ctx.pending.is_empty() {
            let l = ctx.pending.remove(0);
            clauses.extend(ctx.loop_clauses(&l));
        }
    }
    Program::new(clauses, Mode::Integer)
}
