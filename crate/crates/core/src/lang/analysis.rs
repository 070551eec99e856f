//! Weak acyclicity over the position graph and stratification over the
//! predicate graph.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

use super::{Program, Symbol};

/// An argument position; `index` is 0-based, displayed 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub predicate: Symbol,
    pub index: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.predicate, self.index + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Regular,
    Special,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionEdge {
    pub from: Position,
    pub to: Position,
    pub kind: EdgeKind,
    pub rule: usize,
}

impl fmt::Display for PositionEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = match self.kind {
            EdgeKind::Regular => "->",
            EdgeKind::Special => "=>",
        };
        write!(f, "{} {arrow} {}", self.from, self.to)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeakAcyclicity {
    WeaklyAcyclic,
    /// A cycle through at least one special edge; the first edge is special.
    NotWeaklyAcyclic {
        cycle: Vec<PositionEdge>,
    },
}

impl WeakAcyclicity {
    pub fn is_weakly_acyclic(&self) -> bool {
        matches!(self, WeakAcyclicity::WeaklyAcyclic)
    }
}

impl fmt::Display for WeakAcyclicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeakAcyclicity::WeaklyAcyclic => f.write_str("weakly acyclic"),
            WeakAcyclicity::NotWeaklyAcyclic { cycle } => {
                f.write_str("not weakly acyclic; cycle ")?;
                write_cycle(f, cycle)
            }
        }
    }
}

fn write_cycle<E: fmt::Display>(f: &mut fmt::Formatter<'_>, cycle: &[E]) -> fmt::Result {
    for (i, e) in cycle.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

/// Position dependency graph: for every rule and frontier variable `x` at a
/// body position `p`, a regular edge to each head position of `x` and a
/// special edge to each head position of an existential variable.
pub fn position_edges(program: &Program) -> Vec<PositionEdge> {
    let mut edges = Vec::new();
    for rule in program.rules() {
        let frontier = rule.frontier();
        let head_pos = |pred: &Symbol, var: &Symbol| -> Vec<Position> {
            rule.head
                .args
                .iter()
                .enumerate()
                .filter(|(_, t)| t.as_var() == Some(var))
                .map(|(index, _)| Position {
                    predicate: pred.clone(),
                    index,
                })
                .collect()
        };
        let existential_pos: Vec<Position> = rule
            .existentials
            .iter()
            .flat_map(|z| head_pos(&rule.head.predicate, z))
            .collect();
        for x in &frontier {
            let targets = head_pos(&rule.head.predicate, x);
            for lit in &rule.body {
                for (index, t) in lit.atom.args.iter().enumerate() {
                    if t.as_var() != Some(x) {
                        continue;
                    }
                    let from = Position {
                        predicate: lit.atom.predicate.clone(),
                        index,
                    };
                    for to in &targets {
                        edges.push(PositionEdge {
                            from: from.clone(),
                            to: to.clone(),
                            kind: EdgeKind::Regular,
                            rule: rule.id,
                        });
                    }
                    for to in &existential_pos {
                        edges.push(PositionEdge {
                            from: from.clone(),
                            to: to.clone(),
                            kind: EdgeKind::Special,
                            rule: rule.id,
                        });
                    }
                }
            }
        }
    }
    edges
}

/// A program is weakly acyclic iff no cycle of its position graph passes
/// through a special edge.
pub fn check_weak_acyclicity(program: &Program) -> WeakAcyclicity {
    let edges = position_edges(program);
    let graph = LabelledGraph::build(edges.iter().map(|e| (e.from.clone(), e.to.clone())));
    let scc = graph.scc_ids();
    for e in &edges {
        if e.kind != EdgeKind::Special {
            continue;
        }
        let (u, v) = (graph.node(&e.from), graph.node(&e.to));
        if scc[u.index()] != scc[v.index()] {
            continue;
        }
        let mut cycle = vec![e.clone()];
        let pairs: Vec<_> = edges.iter().map(|e| (&e.from, &e.to)).collect();
        cycle.extend(
            graph
                .path(v, u, &scc, &pairs)
                .into_iter()
                .map(|k| edges[k].clone()),
        );
        return WeakAcyclicity::NotWeaklyAcyclic { cycle };
    }
    WeakAcyclicity::WeaklyAcyclic
}

/// Edge `head -> body` of the predicate graph; `strict` when the body atom
/// carries a unary operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateEdge {
    pub head: Symbol,
    pub body: Symbol,
    pub strict: bool,
    pub rule: usize,
}

impl fmt::Display for PredicateEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = if self.strict { "=>" } else { "->" };
        write!(f, "{} {arrow} {}", self.head, self.body)
    }
}

pub fn predicate_edges(program: &Program) -> Vec<PredicateEdge> {
    let mut edges = Vec::new();
    for rule in program.rules() {
        for lit in &rule.body {
            edges.push(PredicateEdge {
                head: rule.head.predicate.clone(),
                body: lit.atom.predicate.clone(),
                strict: lit.op.is_some(),
                rule: rule.id,
            });
        }
    }
    edges
}

/// Stratum levels of intensional predicates (from 1) and the rule partition:
/// `strata[i]` holds the ids of rules whose head has level `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratification {
    pub levels: BTreeMap<Symbol, usize>,
    pub strata: Vec<Vec<usize>>,
}

impl Stratification {
    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    /// Levels are only assigned to intensional predicates; anything else is 0.
    pub fn level(&self, predicate: &str) -> usize {
        self.levels.get(predicate).copied().unwrap_or(0)
    }
}

impl fmt::Display for Stratification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.strata.len();
        write!(
            f,
            "stratifiable ({n} {})",
            if n == 1 { "stratum" } else { "strata" }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StratifyError {
    #[error("stratification needs a program without existential variables")]
    Existentials,
    #[error("not stratifiable; cycle {}", DisplayCycle(.cycle))]
    NotStratifiable { cycle: Vec<PredicateEdge> },
}

struct DisplayCycle<'a>(&'a [PredicateEdge]);

impl fmt::Display for DisplayCycle<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_cycle(f, self.0)
    }
}

/// The condensation of the predicate graph restricted to intensional
/// predicates. Components are numbered so that `deps[c]` only holds smaller
/// numbers; they form a valid evaluation order.
#[derive(Clone, Debug)]
pub struct Condensation {
    pub components: Vec<BTreeSet<Symbol>>,
    pub deps: Vec<BTreeSet<usize>>,
    rules_by_head: BTreeMap<Symbol, Vec<usize>>,
}

impl Condensation {
    pub fn of(program: &Program) -> Result<Condensation, StratifyError> {
        if program.uses_existentials() {
            return Err(StratifyError::Existentials);
        }
        let idb = program.intensional();
        let edges: Vec<PredicateEdge> = predicate_edges(program)
            .into_iter()
            .filter(|e| idb.contains(&e.body))
            .collect();
        let mut graph =
            LabelledGraph::build(edges.iter().map(|e| (e.head.clone(), e.body.clone())));
        for p in &idb {
            graph.ensure(p);
        }
        let scc = graph.scc_ids();
        for e in edges.iter().filter(|e| e.strict) {
            let (u, v) = (graph.node(&e.head), graph.node(&e.body));
            if scc[u.index()] == scc[v.index()] {
                let pairs: Vec<_> = edges.iter().map(|e| (&e.head, &e.body)).collect();
                let mut cycle = vec![e.clone()];
                cycle.extend(
                    graph
                        .path(v, u, &scc, &pairs)
                        .into_iter()
                        .map(|k| edges[k].clone()),
                );
                return Err(StratifyError::NotStratifiable { cycle });
            }
        }
        // tarjan_scc yields components in reverse topological order of the
        // head -> body edges, i.e. dependencies first.
        let comps = tarjan_scc(&graph.graph);
        let mut comp_of: HashMap<NodeIndex, usize> = HashMap::new();
        let mut components = Vec::with_capacity(comps.len());
        for (c, nodes) in comps.iter().enumerate() {
            let mut set = BTreeSet::new();
            for n in nodes {
                comp_of.insert(*n, c);
                set.insert(graph.graph[*n].clone());
            }
            components.push(set);
        }
        let mut deps = vec![BTreeSet::new(); components.len()];
        for e in &edges {
            let (h, b) = (comp_of[&graph.node(&e.head)], comp_of[&graph.node(&e.body)]);
            if h != b {
                debug_assert!(b < h);
                deps[h].insert(b);
            }
        }
        let mut rules_by_head: BTreeMap<Symbol, Vec<usize>> = BTreeMap::new();
        for r in program.rules() {
            rules_by_head
                .entry(r.head.predicate.clone())
                .or_default()
                .push(r.id);
        }
        Ok(Condensation {
            components,
            deps,
            rules_by_head,
        })
    }

    /// Up to `limit` topological orders of the components (dependencies
    /// first), in lexicographic order of component numbers.
    pub fn topological_orders(&self, limit: usize) -> Vec<Vec<usize>> {
        let n = self.components.len();
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        self.orders_rec(&mut current, &mut placed, limit, &mut out);
        out
    }

    fn orders_rec(
        &self,
        current: &mut Vec<usize>,
        placed: &mut [bool],
        limit: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if out.len() >= limit {
            return;
        }
        if current.len() == placed.len() {
            out.push(current.clone());
            return;
        }
        for c in 0..placed.len() {
            if placed[c] || !self.deps[c].iter().all(|d| placed[*d]) {
                continue;
            }
            placed[c] = true;
            current.push(c);
            self.orders_rec(current, placed, limit, out);
            current.pop();
            placed[c] = false;
        }
    }

    /// The finest stratification following `order`: one stratum per
    /// component. `order` must be a topological order of the components.
    pub fn stratification_for_order(&self, order: &[usize]) -> Stratification {
        let mut levels = BTreeMap::new();
        let mut strata = Vec::with_capacity(order.len());
        for (i, &c) in order.iter().enumerate() {
            let mut rules = Vec::new();
            for p in &self.components[c] {
                levels.insert(p.clone(), i + 1);
                rules.extend(self.rules_by_head.get(p).into_iter().flatten().copied());
            }
            rules.sort_unstable();
            strata.push(rules);
        }
        Stratification { levels, strata }
    }
}

/// Minimal stratification: every intensional predicate gets the least level
/// compatible with its dependencies, strict edges forcing an increase.
pub fn compute_stratification(program: &Program) -> Result<Stratification, StratifyError> {
    let cond = Condensation::of(program)?;
    let idb = program.intensional();
    let edges = predicate_edges(program);
    let mut comp_of: BTreeMap<&Symbol, usize> = BTreeMap::new();
    for (c, set) in cond.components.iter().enumerate() {
        for p in set {
            comp_of.insert(p, c);
        }
    }
    let mut comp_level = vec![1usize; cond.components.len()];
    // Components are numbered dependencies first, so one pass suffices.
    for c in 0..cond.components.len() {
        let mut level = 1;
        for e in edges.iter().filter(|e| comp_of.get(&e.head) == Some(&c)) {
            let base = if idb.contains(&e.body) {
                comp_level[comp_of[&e.body]]
            } else {
                0
            };
            level = level.max(base + usize::from(e.strict));
        }
        comp_level[c] = level;
    }
    let mut levels = BTreeMap::new();
    for (c, set) in cond.components.iter().enumerate() {
        for p in set {
            levels.insert(p.clone(), comp_level[c]);
        }
    }
    let n = comp_level.iter().copied().max().unwrap_or(0);
    let mut strata = vec![Vec::new(); n];
    for r in program.rules() {
        strata[levels[&r.head.predicate] - 1].push(r.id);
    }
    Ok(Stratification { levels, strata })
}

/// A petgraph digraph over labelled nodes.
struct LabelledGraph<N> {
    graph: DiGraph<N, ()>,
    index: HashMap<N, NodeIndex>,
}

impl<N: Clone + Eq + std::hash::Hash> LabelledGraph<N> {
    fn build(edges: impl Iterator<Item = (N, N)>) -> Self {
        let mut g = LabelledGraph {
            graph: DiGraph::new(),
            index: HashMap::new(),
        };
        for (a, b) in edges {
            let (u, v) = (g.ensure(&a), g.ensure(&b));
            g.graph.add_edge(u, v, ());
        }
        g
    }

    fn ensure(&mut self, n: &N) -> NodeIndex {
        if let Some(i) = self.index.get(n) {
            return *i;
        }
        let i = self.graph.add_node(n.clone());
        self.index.insert(n.clone(), i);
        i
    }

    fn node(&self, n: &N) -> NodeIndex {
        self.index[n]
    }

    fn scc_ids(&self) -> Vec<usize> {
        let mut ids = vec![0; self.graph.node_count()];
        for (c, comp) in tarjan_scc(&self.graph).into_iter().enumerate() {
            for n in comp {
                ids[n.index()] = c;
            }
        }
        ids
    }

    /// Shortest path `from -> to` inside one SCC, as indices into `pairs`.
    fn path(
        &self,
        from: NodeIndex,
        to: NodeIndex,
        scc: &[usize],
        pairs: &[(&N, &N)],
    ) -> Vec<usize> {
        if from == to {
            return Vec::new();
        }
        let comp = scc[from.index()];
        let mut prev: HashMap<NodeIndex, usize> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = BTreeSet::from([from]);
        while let Some(u) = queue.pop_front() {
            for (k, (a, b)) in pairs.iter().enumerate() {
                if self.node(a) != u {
                    continue;
                }
                let v = self.node(b);
                if scc[v.index()] != comp || !seen.insert(v) {
                    continue;
                }
                prev.insert(v, k);
                if v == to {
                    let mut path = Vec::new();
                    let mut cur = to;
                    while cur != from {
                        let k = prev[&cur];
                        path.push(k);
                        cur = self.node(pairs[k].0);
                    }
                    path.reverse();
                    return path;
                }
                queue.push_back(v);
            }
        }
        unreachable!("nodes share an SCC")
    }
}
