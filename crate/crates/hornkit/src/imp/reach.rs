//! Backward-reachability verification conditions.
//!
//! The entry calls are inlined into one control-flow graph (callee variables
//! renamed apart); its cut points are the entry and every loop head. Each
//! cut point `c` gets a predicate `err_c` over the variables live there,
//! meaning "an error state is reachable from here". Every path from a cut
//! point to the next one gives `err_c(…) :- path, err_d(…)`; every path to
//! the exit gives `err_c(…) :- path, ¬post` (one per disjunct). The goal is
//! `false :- pre, err_entry(…)`. All clauses are linear, so recursive
//! functions are rejected.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{term_vars, ImpProgram, Stmt, TripleSpec};
use super::names::Sym;
use super::ImpError;
use crate::syntax::{fresh_name, fresh_pred_exact, Atom, Clause, Head, LinearConstraint, LinearTerm, Mode, Pred, Program, Var};

struct Edge {
    guard: LinearConstraint,
    assign: Option<(String, LinearTerm)>,
    to: usize,
}

struct Builder<'a> {
    prog: &'a ImpProgram,
    recursive: BTreeSet<String>,
    edges: Vec<Vec<Edge>>,
    /// Cut points in creation order.
    cuts: Vec<(usize, Pred)>,
    taken: BTreeSet<String>,
    /// Flattened variable names in creation order.
    names: Vec<String>,
}

type Renaming = BTreeMap<Var, Var>;

impl<'a> Builder<'a> {
    fn node(&mut self) -> usize {
        self.edges.push(Vec::new());
        self.edges.len() - 1
    }

    fn edge(&mut self, from: usize, guard: LinearConstraint, assign: Option<(String, LinearTerm)>, to: usize) {
        self.edges[from].push(Edge { guard, assign, to });
    }

    fn cut(&mut self, node: usize, base: &str) {
        let p = fresh_pred_exact(base, &self.taken);
        self.taken.insert(p.name().to_string());
        self.cuts.push((node, p));
    }

    fn unique(&mut self, name: &str) -> String {
        let n = if self.names.iter().any(|m| m == name) {
            fresh_name(&format!("{name}_"), |c| self.names.iter().any(|m| m == c))
        } else {
            name.to_string()
        };
        self.names.push(n.clone());
        n
    }

    fn build(&mut self, stmts: &[Stmt], map: &Renaming, func: &str, mut cur: usize) -> Result<usize, ImpError> {
        for s in stmts {
            cur = match s {
                Stmt::Assign { var, expr } => {
                    let n = self.node();
                    self.edge(cur, LinearConstraint::top(), Some((rename_name(var, map), expr.rename(map))), n);
                    n
                }
                Stmt::Call { var, func: g, args } => {
                    if self.recursive.contains(g) {
                        return Err(ImpError::Recursive(g.clone()));
                    }
                    let gf = self.prog.function(g).expect("calls are resolved by the parser");
                    let inner: Renaming = gf.variables().iter().map(|v| (Var::new(v), Var::new(&self.unique(v)))).collect();
                    for (p, a) in gf.params.iter().zip(args) {
                        let n = self.node();
                        self.edge(cur, LinearConstraint::top(), Some((rename_name(p, &inner), a.rename(map))), n);
                        cur = n;
                    }
                    cur = self.build(&gf.body, &inner, g, cur)?;
                    let n = self.node();
                    self.edge(cur, LinearConstraint::top(), Some((rename_name(var, map), gf.ret.rename(&inner))), n);
                    n
                }
                Stmt::If { cond, then, els } => {
                    let cond = cond.rename(map);
                    let join = self.node();
                    for (positive, arm) in [(true, then), (false, els)] {
                        let start = self.node();
                        for d in cond.dnf(positive) {
                            self.edge(cur, d, None, start);
                        }
                        let end = self.build(arm, map, func, start)?;
                        self.edge(end, LinearConstraint::top(), None, join);
                    }
                    join
                }
                Stmt::While { cond, body } => {
                    let cond = cond.rename(map);
                    let head = self.node();
                    self.edge(cur, LinearConstraint::top(), None, head);
                    self.cut(head, &format!("err_{func}_while"));
                    let start = self.node();
                    for d in cond.dnf(true) {
                        self.edge(head, d, None, start);
                    }
                    let end = self.build(body, map, func, start)?;
                    self.edge(end, LinearConstraint::top(), None, head);
                    let after = self.node();
                    for d in cond.dnf(false) {
                        self.edge(head, d, None, after);
                    }
                    after
                }
            };
        }
        Ok(cur)
    }

    /// Variables live at each node, given those live at `exit`.
    fn liveness(&self, exit: usize, at_exit: BTreeSet<String>) -> Vec<BTreeSet<String>> {
        let mut live = vec![BTreeSet::new(); self.edges.len()];
        live[exit] = at_exit;
        let mut changed = true;
        while changed {
            changed = false;
            for n in (0..self.edges.len()).rev() {
                let mut l = live[n].clone();
                for e in &self.edges[n] {
                    l.extend(e.guard.vars().iter().map(|v| v.name().to_string()));
                    match &e.assign {
                        Some((v, t)) => {
                            l.extend(live[e.to].iter().filter(|x| *x != v).cloned());
                            l.extend(term_vars(t));
                        }
                        None => l.extend(live[e.to].iter().cloned()),
                    }
                }
                if l != live[n] {
                    live[n] = l;
                    changed = true;
                }
            }
        }
        live
    }
}

fn rename_name(v: &str, map: &Renaming) -> String {
    map.get(&Var::new(v)).map_or(v, |w| w.name()).to_string()
}

struct Emitter<'b> {
    edges: &'b [Vec<Edge>],
    cut_of: BTreeMap<usize, &'b Pred>,
    live: Vec<Vec<String>>,
    exit: usize,
    negated: &'b [LinearConstraint],
}

impl Emitter<'_> {
    fn walk(&self, n: usize, st: Sym, first: bool, head: &Atom, out: &mut Vec<Clause>) {
        if !first {
            if let Some(p) = self.cut_of.get(&n) {
                let mut st = st;
                let args = self.live[n].iter().map(|v| (st.read(v), v.clone())).collect();
                st.call(p, args);
                out.push(Clause::new(Head::Atom(head.clone()), st.constraint, st.atoms));
                return;
            }
        }
        if n == self.exit {
            for d in self.negated {
                let mut s = st.clone();
                s.assume(d);
                if s.feasible() {
                    out.push(Clause::new(Head::Atom(head.clone()), s.constraint, s.atoms));
                }
            }
            return;
        }
        for e in &self.edges[n] {
            let mut s = st.clone();
            s.assume(&e.guard);
            if !s.feasible() {
                continue;
            }
            if let Some((v, t)) = &e.assign {
                s.assign(v, t);
            }
            self.walk(e.to, s, false, head, out);
        }
    }
}

/// Linear backward-reachability verification conditions for `t` over `p`
/// (integer mode). Fails if an entry reaches a recursive function.
pub fn translate_reach(p: &ImpProgram, t: &TripleSpec) -> Result<Program, ImpError> {
    let mut b = Builder {
        prog: p,
        recursive: p.recursive_functions(),
        edges: Vec::new(),
        cuts: Vec::new(),
        taken: BTreeSet::new(),
        names: Vec::new(),
    };
    let mut globals: BTreeSet<String> = t.pre.vars().iter().chain(&t.post.vars()).map(|v| v.name().to_string()).collect();
    for e in &t.entries {
        globals.insert(e.var.clone());
        globals.extend(e.args.iter().flat_map(term_vars));
    }
    b.names.extend(globals.iter().cloned());
    let entry = b.node();
    b.cut(entry, "err_entry");
    let stmts: Vec<Stmt> = t.entries.iter().map(|e| e.as_stmt()).collect();
    let exit = b.build(&stmts, &Renaming::new(), "entry", entry)?;
    let at_exit = t.post.vars().iter().map(|v| v.name().to_string()).collect();
    let order = b.names.clone();
    let live: Vec<Vec<String>> = b
        .liveness(exit, at_exit)
        .into_iter()
        .map(|l| order.iter().filter(|v| l.contains(*v)).cloned().collect())
        .collect();
    let negated = t.negated_post();
    let em = Emitter { edges: &b.edges, cut_of: b.cuts.iter().map(|(n, p)| (*n, p)).collect(), live, exit, negated: &negated };

    let mut clauses = Vec::new();
    if !negated.is_empty() {
        let mut st = Sym::new(&order);
        st.assume(&t.pre);
        let args = em.live[entry].iter().map(|v| (st.read(v), v.clone())).collect();
        st.call(&b.cuts[0].1, args);
        clauses.push(Clause::new(Head::False, st.constraint, st.atoms));
    }
    for (n, pred) in &b.cuts {
        let mut st = Sym::new(&order);
        let vars: Vec<Var> = em.live[*n].iter().map(|v| st.bind(v)).collect();
        em.walk(*n, st, true, &Atom::with_vars(pred.clone(), &vars), &mut clauses);
    }
    Ok(Program::new(clauses, Mode::Integer))
}
