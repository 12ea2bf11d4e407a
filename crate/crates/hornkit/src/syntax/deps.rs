//! Predicate dependency queries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::clause::{Pred, Program};

/// A node of the dependency graph: a predicate or the goal head `false`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum DepNode {
    False,
    Pred(Pred),
}

impl fmt::Display for DepNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepNode::False => f.write_str("false"),
            DepNode::Pred(p) => write!(f, "{p}"),
        }
    }
}

pub type Relation = BTreeMap<DepNode, BTreeSet<Pred>>;

/// `p` immediately depends on `q` when some clause with head `p` has `q` in
/// its body.
pub fn immediate_dependencies(p: &Program) -> Relation {
    let mut rel = Relation::new();
    for c in &p.clauses {
        if c.body.is_empty() {
            continue;
        }
        let node = match c.head_pred() {
            None => DepNode::False,
            Some(q) => DepNode::Pred(q.clone()),
        };
        rel.entry(node).or_default().extend(c.body.iter().map(|a| a.pred.clone()));
    }
    rel
}

/// Transitive closure of immediate dependency.
pub fn dependency_relation(p: &Program) -> Relation {
    let imm = immediate_dependencies(p);
    let mut out = Relation::new();
    for (node, direct) in &imm {
        let mut seen: BTreeSet<Pred> = BTreeSet::new();
        let mut stack: Vec<Pred> = direct.iter().cloned().collect();
        while let Some(q) = stack.pop() {
            if seen.insert(q.clone()) {
                if let Some(next) = imm.get(&DepNode::Pred(q)) {
                    stack.extend(next.iter().cloned());
                }
            }
        }
        out.insert(node.clone(), seen);
    }
    out
}

/// Predicates some goal depends on.
pub fn reachable_from_goals(p: &Program) -> BTreeSet<Pred> {
    dependency_relation(p).remove(&DepNode::False).unwrap_or_default()
}

/// Predicates that (transitively) depend on themselves.
pub fn recursive_predicates(p: &Program) -> BTreeSet<Pred> {
    dependency_relation(p)
        .into_iter()
        .filter_map(|(n, deps)| match n {
            DepNode::Pred(q) if deps.contains(&q) => Some(q),
            _ => None,
        })
        .collect()
}

/// Strongly connected components of the predicate graph, callees first.
pub fn sccs(p: &Program) -> Vec<Vec<Pred>> {
    let preds: Vec<Pred> = p.predicates().into_iter().map(|(q, _)| q).collect();
    let imm = immediate_dependencies(p);
    let index_of: BTreeMap<&Pred, usize> = preds.iter().enumerate().map(|(i, q)| (q, i)).collect();
    let succ: Vec<Vec<usize>> = preds
        .iter()
        .map(|q| {
            imm.get(&DepNode::Pred(q.clone()))
                .map(|s| s.iter().filter_map(|r| index_of.get(r).copied()).collect())
                .unwrap_or_default()
        })
        .collect();
    let comps = tarjan(&succ);
    comps.into_iter().map(|c| c.into_iter().map(|i| preds[i].clone()).collect()).collect()
}

/// Tarjan's algorithm; components come out in reverse topological order of
/// the edge relation, i.e. successors (callees) first.
fn tarjan(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct St<'a> {
        succ: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn visit(s: &mut St<'_>, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for &w in &s.succ[v] {
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().expect("tarjan stack");
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            s.out.push(comp);
        }
    }
    let n = succ.len();
    let mut s = St {
        succ,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}
