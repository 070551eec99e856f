//! Fuzzy triggers and the chase: semi-oblivious or restricted activity,
//! FIFO or truth-greedy order.

mod join;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::degrees::{k_target, TruthDegree};
use crate::lang::{check_weak_acyclicity, PositionEdge, Program, Rule, WeakAcyclicity};
use crate::model::{
    minimal_interpretation, FuzzyDataset, FuzzyInterpretation, GroundAtom, Grounding, ModelError,
    NullPool, Value,
};

pub(crate) use join::{best_match, CompiledRule};

/// When a trigger counts as active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activity {
    /// The application raises the head's degree.
    SemiOblivious,
    /// The target exceeds the degree of every atom obtained from the head by
    /// replacing the nulls the trigger invents.
    Restricted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    /// Always a maximal target degree; ties by rule id, then grounding.
    Greedy,
    /// Oldest activation first; reactivated triggers queue again.
    Fifo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepLimit {
    /// Derived from the input; refuses programs that are not weakly acyclic.
    Auto,
    Bounded(usize),
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategyConfig {
    pub activity: Activity,
    pub order: Order,
    pub k: TruthDegree,
    pub max_steps: StepLimit,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig::new(Activity::Restricted, Order::Greedy)
    }
}

impl StrategyConfig {
    pub fn new(activity: Activity, order: Order) -> Self {
        StrategyConfig {
            activity,
            order,
            k: TruthDegree::ONE,
            max_steps: StepLimit::Auto,
        }
    }

    pub fn with_k(mut self, k: TruthDegree) -> Self {
        self.k = k;
        self
    }

    pub fn with_max_steps(mut self, limit: StepLimit) -> Self {
        self.max_steps = limit;
        self
    }

    /// `so-greedy`, `r-fifo`, ...
    pub fn strategy_name(&self) -> &'static str {
        match (self.activity, self.order) {
            (Activity::SemiOblivious, Order::Greedy) => "so-greedy",
            (Activity::SemiOblivious, Order::Fifo) => "so-fifo",
            (Activity::Restricted, Order::Greedy) => "r-greedy",
            (Activity::Restricted, Order::Fifo) => "r-fifo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unknown strategy {0:?}; expected so-greedy, so-fifo, r-greedy or r-fifo")]
pub struct UnknownStrategy(pub String);

impl FromStr for StrategyConfig {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (activity, order) = match s {
            "so-greedy" => (Activity::SemiOblivious, Order::Greedy),
            "so-fifo" => (Activity::SemiOblivious, Order::Fifo),
            "r-greedy" => (Activity::Restricted, Order::Greedy),
            "r-fifo" => (Activity::Restricted, Order::Fifo),
            other => return Err(UnknownStrategy(other.to_string())),
        };
        Ok(StrategyConfig::new(activity, order))
    }
}

/// A rule (by id) together with a grounding of its body variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trigger {
    pub rule: usize,
    pub grounding: Grounding,
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(r{}, {})", self.rule, self.grounding)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    /// 1-based: step `i` turns `I_{i-1}` into `I_i`.
    pub index: usize,
    pub rule_id: usize,
    pub grounding: Grounding,
    pub head: GroundAtom,
    pub degree_before: TruthDegree,
    pub degree_after: TruthDegree,
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    index: usize,
    rule_id: usize,
    grounding: BTreeMap<String, String>,
    head: String,
    degree_before: f64,
    degree_after: f64,
    strategy: &'a str,
    #[serde(rename = "K")]
    k: f64,
}

/// One JSON object per line, in step order.
pub fn trace_to_json_lines(trace: &[TraceStep], config: &StrategyConfig) -> String {
    let mut out = String::new();
    for step in trace {
        let record = TraceRecord {
            index: step.index,
            rule_id: step.rule_id,
            grounding: step
                .grounding
                .pairs()
                .iter()
                .map(|(v, val)| (v.to_string(), val.to_string()))
                .collect(),
            head: step.head.to_string(),
            degree_before: step.degree_before.value(),
            degree_after: step.degree_after.value(),
            strategy: config.strategy_name(),
            k: config.k.value(),
        };
        out.push_str(&serde_json::to_string(&record).expect("plain record"));
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChaseStatus {
    Completed,
    /// The step budget ran out while a trigger was still active.
    StepLimitExceeded,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ChaseError {
    #[error("the program is not weakly acyclic ({}); an explicit step limit is required", show_cycle(.cycle))]
    StepLimitRequired { cycle: Vec<PositionEdge> },
    #[error("rule {rule} applies a unary operator to {predicate}, which the same run derives")]
    NotSemipositive { rule: usize, predicate: String },
    #[error("trigger {0} is not active")]
    InactiveTrigger(Trigger),
    #[error("no rule with id {0}")]
    UnknownRule(usize),
    #[error("grounding {grounding} does not bind exactly the body variables of rule {rule}")]
    BadGrounding { rule: usize, grounding: Grounding },
    #[error(transparent)]
    Data(#[from] ModelError),
}

fn show_cycle(cycle: &[PositionEdge]) -> String {
    cycle
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum InvariantViolation {
    #[error("step {index}: target {degree} exceeds the previous target {previous}")]
    IncreasingTarget {
        index: usize,
        previous: TruthDegree,
        degree: TruthDegree,
    },
    #[error("steps {first} and {second} both write {head}")]
    RepeatedHead {
        first: usize,
        second: usize,
        head: GroundAtom,
    },
}

#[derive(Clone, Debug)]
pub struct ChaseResult {
    pub status: ChaseStatus,
    pub interpretation: FuzzyInterpretation,
    pub trace: Vec<TraceStep>,
    pub config: StrategyConfig,
    /// The interpretation the trace starts from.
    pub initial: FuzzyInterpretation,
}

impl ChaseResult {
    pub fn is_complete(&self) -> bool {
        self.status == ChaseStatus::Completed
    }

    pub fn get(&self, atom: &GroundAtom) -> TruthDegree {
        self.interpretation.get(atom)
    }

    /// Target degrees never increase and no head is written twice.
    pub fn verify_greedy_invariants(&self) -> Result<(), InvariantViolation> {
        let mut seen: BTreeMap<&GroundAtom, usize> = BTreeMap::new();
        for (i, step) in self.trace.iter().enumerate() {
            if i > 0 {
                let previous = self.trace[i - 1].degree_after;
                if step.degree_after > previous {
                    return Err(InvariantViolation::IncreasingTarget {
                        index: step.index,
                        previous,
                        degree: step.degree_after,
                    });
                }
            }
            if let Some(first) = seen.insert(&step.head, step.index) {
                return Err(InvariantViolation::RepeatedHead {
                    first,
                    second: step.index,
                    head: step.head.clone(),
                });
            }
        }
        Ok(())
    }

    /// Applies the trace to the initial interpretation.
    pub fn replay(&self) -> FuzzyInterpretation {
        let mut interp = self.initial.clone();
        for step in &self.trace {
            interp.set(step.head.clone(), step.degree_after);
        }
        interp
    }

    pub fn trace_json_lines(&self) -> String {
        trace_to_json_lines(&self.trace, &self.config)
    }
}

/// Greedy agenda entry: larger target first, then smaller rule id, then
/// smaller grounding.
#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Ranked {
    target: TruthDegree,
    rule: Reverse<usize>,
    values: Reverse<Vec<Value>>,
}

enum Agenda {
    Greedy(BinaryHeap<Ranked>),
    Fifo {
        queue: VecDeque<(usize, Vec<Value>)>,
        queued: HashSet<(usize, Vec<Value>)>,
    },
}

/// A chase in progress: rules, working interpretation, null pool and trace.
pub struct Chase {
    rules: Vec<CompiledRule>,
    by_id: BTreeMap<usize, usize>,
    interp: FuzzyInterpretation,
    initial: FuzzyInterpretation,
    config: StrategyConfig,
    pool: NullPool,
    trace: Vec<TraceStep>,
}

impl Chase {
    /// Starts from the minimal interpretation of `dataset`.
    pub fn new(
        program: &Program,
        dataset: &FuzzyDataset,
        config: StrategyConfig,
    ) -> Result<Chase, ChaseError> {
        dataset.check_signature(program)?;
        Chase::with_rules(program.rules(), minimal_interpretation(dataset), config)
    }

    /// Runs `rules` (keeping their ids) from an arbitrary interpretation.
    /// Unary operators may only read predicates these rules do not derive.
    pub fn with_rules(
        rules: &[Rule],
        interp: FuzzyInterpretation,
        config: StrategyConfig,
    ) -> Result<Chase, ChaseError> {
        let heads: BTreeSet<_> = rules.iter().map(|r| r.head.predicate.clone()).collect();
        for r in rules {
            for lit in r.body.iter().filter(|l| l.op.is_some()) {
                if heads.contains(&lit.atom.predicate) {
                    return Err(ChaseError::NotSemipositive {
                        rule: r.id,
                        predicate: lit.atom.predicate.to_string(),
                    });
                }
            }
        }
        let compiled: Vec<CompiledRule> = rules.iter().map(CompiledRule::new).collect();
        let by_id = compiled
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id, i))
            .collect();
        Ok(Chase {
            rules: compiled,
            by_id,
            initial: interp.clone(),
            interp,
            config,
            pool: NullPool::new(),
            trace: Vec::new(),
        })
    }

    pub fn config(&self) -> &StrategyConfig {
        &self.config
    }

    pub fn interpretation(&self) -> &FuzzyInterpretation {
        &self.interp
    }

    pub fn trace(&self) -> &[TraceStep] {
        &self.trace
    }

    fn compiled(&self, rule: usize) -> Result<&CompiledRule, ChaseError> {
        self.by_id
            .get(&rule)
            .map(|&i| &self.rules[i])
            .ok_or(ChaseError::UnknownRule(rule))
    }

    /// Builds a trigger after checking that the grounding fits the rule.
    pub fn trigger(&self, rule: usize, grounding: Grounding) -> Result<Trigger, ChaseError> {
        let r = self.compiled(rule)?;
        if r.values_of(&grounding).is_none() {
            return Err(ChaseError::BadGrounding { rule, grounding });
        }
        Ok(Trigger { rule, grounding })
    }

    fn values(&self, t: &Trigger) -> Result<(&CompiledRule, Vec<Value>), ChaseError> {
        let r = self.compiled(t.rule)?;
        let values = r
            .values_of(&t.grounding)
            .ok_or_else(|| ChaseError::BadGrounding {
                rule: t.rule,
                grounding: t.grounding.clone(),
            })?;
        Ok((r, values))
    }

    pub fn head_of(&mut self, t: &Trigger) -> Result<GroundAtom, ChaseError> {
        let (r, values) = self.values(t)?;
        let idx = self.by_id[&r.id];
        Ok(self.rules[idx].head_atom(&values, Some(&mut self.pool)))
    }

    pub fn target_degree(&self, t: &Trigger) -> Result<TruthDegree, ChaseError> {
        let (r, values) = self.values(t)?;
        Ok(k_target(
            r.body_degree(&self.interp, &values),
            self.config.k,
        ))
    }

    pub fn is_active(&self, t: &Trigger) -> Result<bool, ChaseError> {
        let (r, values) = self.values(t)?;
        Ok(state_of(&self.interp, r, &values, &self.config).is_some())
    }

    /// Applies an active trigger and records the step.
    pub fn apply(&mut self, t: &Trigger) -> Result<&TraceStep, ChaseError> {
        let (r, values) = self.values(t)?;
        let idx = self.by_id[&r.id];
        if state_of(&self.interp, r, &values, &self.config).is_none() {
            return Err(ChaseError::InactiveTrigger(t.clone()));
        }
        self.fire(idx, values);
        Ok(self.trace.last().expect("just pushed"))
    }

    /// All active triggers, sorted by rule id and grounding.
    pub fn active_triggers(&self) -> Vec<Trigger> {
        active_in(&self.rules, &self.interp, &self.config)
    }

    /// Writes the target degree to the head and records the step. Returns
    /// the head atom.
    fn fire(&mut self, idx: usize, values: Vec<Value>) -> GroundAtom {
        let r = &self.rules[idx];
        let target = k_target(r.body_degree(&self.interp, &values), self.config.k);
        let head = r.head_atom(&values, Some(&mut self.pool));
        let before = self.interp.set(head.clone(), target);
        self.trace.push(TraceStep {
            index: self.trace.len() + 1,
            rule_id: r.id,
            grounding: r.grounding(&values),
            head: head.clone(),
            degree_before: before,
            degree_after: target,
        });
        head
    }

    /// Groundings whose body mentions `atom` in a plain literal, sorted.
    fn affected(&self, atom: &GroundAtom) -> Vec<(usize, Vec<Value>)> {
        let mut found = BTreeSet::new();
        for (idx, r) in self.rules.iter().enumerate() {
            for li in r.plain_literals_over(&atom.predicate) {
                r.join(&self.interp, Some((li, atom)), &mut |v| {
                    found.insert((idx, v));
                });
            }
        }
        found.into_iter().collect()
    }

    fn step_budget(&self) -> Result<Option<usize>, ChaseError> {
        match self.config.max_steps {
            StepLimit::Bounded(n) => Ok(Some(n)),
            StepLimit::Unbounded => Ok(None),
            StepLimit::Auto => self.auto_budget().map(Some),
        }
    }

    /// Ten times an estimate of the number of derivable heads: the ground
    /// atoms over the active domain for existential-free rules, the support
    /// of the crisp semi-oblivious chase otherwise.
    fn auto_budget(&self) -> Result<usize, ChaseError> {
        let sources: Vec<Rule> = self.rules.iter().map(|r| r.source.clone()).collect();
        if self.rules.iter().any(CompiledRule::has_existentials) {
            let program = Program::new(sources.clone()).expect("rules were valid");
            if let WeakAcyclicity::NotWeaklyAcyclic { cycle } = check_weak_acyclicity(&program) {
                return Err(ChaseError::StepLimitRequired { cycle });
            }
            let mut crisp = FuzzyInterpretation::new();
            for (atom, _) in self.interp.entries() {
                crisp.set(atom.clone(), TruthDegree::ONE);
            }
            let config = StrategyConfig::new(Activity::SemiOblivious, Order::Greedy)
                .with_max_steps(StepLimit::Unbounded);
            let mut estimate = Chase::with_rules(&sources, crisp, config)?;
            estimate.run()?;
            return Ok(estimate.interp.len().max(1).saturating_mul(10));
        }
        let mut domain: BTreeSet<Value> = self.interp.active_domain();
        for r in &sources {
            let atoms = r
                .body
                .iter()
                .map(|l| &l.atom)
                .chain(std::iter::once(&r.head));
            for a in atoms {
                for t in &a.args {
                    if let crate::lang::Term::Const(c) = t {
                        domain.insert(Value::Const(c.clone()));
                    }
                }
            }
        }
        let n = domain.len().max(1);
        let heads: BTreeMap<_, _> = self
            .rules
            .iter()
            .map(|r| (r.head_predicate.clone(), r.head.len()))
            .collect();
        let atoms = heads.values().fold(0usize, |acc, &arity| {
            acc.saturating_add(n.saturating_pow(arity as u32))
        });
        Ok(atoms.max(1).saturating_mul(10))
    }

    /// Runs the configured order from the current state until no trigger is
    /// active or the step budget is spent.
    pub fn run(&mut self) -> Result<ChaseStatus, ChaseError> {
        let budget = self.step_budget()?;
        let mut agenda = match self.config.order {
            Order::Greedy => Agenda::Greedy(BinaryHeap::new()),
            Order::Fifo => Agenda::Fifo {
                queue: VecDeque::new(),
                queued: HashSet::new(),
            },
        };
        let mut initial = Vec::new();
        for (idx, r) in self.rules.iter().enumerate() {
            let mut found = Vec::new();
            r.join(&self.interp, None, &mut |v| found.push(v));
            found.sort();
            found.dedup();
            initial.extend(found.into_iter().map(|v| (idx, v)));
        }
        self.schedule(&mut agenda, initial);
        let mut steps = 0usize;
        loop {
            let Some((idx, values)) = self.next_trigger(&mut agenda) else {
                return Ok(ChaseStatus::Completed);
            };
            if budget.is_some_and(|b| steps >= b) {
                return Ok(ChaseStatus::StepLimitExceeded);
            }
            let head = self.fire(idx, values);
            steps += 1;
            let affected = self.affected(&head);
            self.schedule(&mut agenda, affected);
        }
    }

    fn schedule(&self, agenda: &mut Agenda, candidates: Vec<(usize, Vec<Value>)>) {
        for (idx, values) in candidates {
            let r = &self.rules[idx];
            let Some(target) = state_of(&self.interp, r, &values, &self.config) else {
                continue;
            };
            match agenda {
                Agenda::Greedy(heap) => heap.push(Ranked {
                    target,
                    rule: Reverse(r.id),
                    values: Reverse(values),
                }),
                Agenda::Fifo { queue, queued } => {
                    if queued.insert((idx, values.clone())) {
                        queue.push_back((idx, values));
                    }
                }
            }
        }
    }

    /// Pops until an active trigger is found. Greedy entries whose target
    /// changed since they were pushed are stale; a fresh entry exists.
    fn next_trigger(&self, agenda: &mut Agenda) -> Option<(usize, Vec<Value>)> {
        match agenda {
            Agenda::Greedy(heap) => {
                while let Some(Ranked {
                    target,
                    rule: Reverse(id),
                    values: Reverse(values),
                }) = heap.pop()
                {
                    let idx = self.by_id[&id];
                    if state_of(&self.interp, &self.rules[idx], &values, &self.config)
                        == Some(target)
                    {
                        return Some((idx, values));
                    }
                }
                None
            }
            Agenda::Fifo { queue, queued } => {
                while let Some((idx, values)) = queue.pop_front() {
                    queued.remove(&(idx, values.clone()));
                    if state_of(&self.interp, &self.rules[idx], &values, &self.config).is_some() {
                        return Some((idx, values));
                    }
                }
                None
            }
        }
    }

    pub fn into_result(self, status: ChaseStatus) -> ChaseResult {
        ChaseResult {
            status,
            interpretation: self.interp,
            trace: self.trace,
            config: self.config,
            initial: self.initial,
        }
    }
}

/// The target degree if the trigger is active, `None` otherwise.
fn state_of(
    interp: &FuzzyInterpretation,
    rule: &CompiledRule,
    values: &[Value],
    config: &StrategyConfig,
) -> Option<TruthDegree> {
    let target = k_target(rule.body_degree(interp, values), config.k);
    if target.is_zero() {
        return None;
    }
    let bar = match config.activity {
        Activity::SemiOblivious => interp.get(&rule.head_atom(values, None)),
        // Only the nulls this trigger invents are open; inherited ones are
        // fixed like constants.
        Activity::Restricted => {
            best_match(interp, &rule.head_predicate, &rule.head_pattern(values))
        }
    };
    (target > bar).then_some(target)
}

fn single(rule: &Rule, grounding: &Grounding) -> Result<(CompiledRule, Vec<Value>), ChaseError> {
    let r = CompiledRule::new(rule);
    let values = r
        .values_of(grounding)
        .ok_or_else(|| ChaseError::BadGrounding {
            rule: rule.id,
            grounding: grounding.clone(),
        })?;
    Ok((r, values))
}

/// `max{0, body + K - 1}`; exactly the body degree at `K = 1`.
pub fn trigger_target_degree(
    interp: &FuzzyInterpretation,
    rule: &Rule,
    grounding: &Grounding,
    k: TruthDegree,
) -> Result<TruthDegree, ChaseError> {
    let (r, values) = single(rule, grounding)?;
    Ok(k_target(r.body_degree(interp, &values), k))
}

/// The head of a trigger, nulls named by rule, variable and frontier binding.
pub fn head_of(rule: &Rule, grounding: &Grounding) -> Result<GroundAtom, ChaseError> {
    let (r, values) = single(rule, grounding)?;
    Ok(r.head_atom(&values, None))
}

pub fn is_active(
    interp: &FuzzyInterpretation,
    rule: &Rule,
    grounding: &Grounding,
    config: &StrategyConfig,
) -> Result<bool, ChaseError> {
    let (r, values) = single(rule, grounding)?;
    Ok(state_of(interp, &r, &values, config).is_some())
}

/// Active triggers of `rules` in `interp`, sorted by rule id and grounding.
pub fn enumerate_active_triggers(
    interp: &FuzzyInterpretation,
    rules: &[Rule],
    config: &StrategyConfig,
) -> Vec<Trigger> {
    let compiled: Vec<CompiledRule> = rules.iter().map(CompiledRule::new).collect();
    active_in(&compiled, interp, config)
}

fn active_in(
    rules: &[CompiledRule],
    interp: &FuzzyInterpretation,
    config: &StrategyConfig,
) -> Vec<Trigger> {
    let mut out = Vec::new();
    for r in rules {
        let mut found = Vec::new();
        r.join(interp, None, &mut |v| found.push(v));
        found.sort();
        found.dedup();
        for values in found {
            if state_of(interp, r, &values, config).is_some() {
                out.push(Trigger {
                    rule: r.id,
                    grounding: r.grounding(&values),
                });
            }
        }
    }
    out.sort();
    out
}

/// `interp` with the trigger's head raised to its target degree.
pub fn apply_trigger(
    interp: &FuzzyInterpretation,
    rule: &Rule,
    grounding: &Grounding,
    config: &StrategyConfig,
) -> Result<FuzzyInterpretation, ChaseError> {
    let (r, values) = single(rule, grounding)?;
    let Some(target) = state_of(interp, &r, &values, config) else {
        return Err(ChaseError::InactiveTrigger(Trigger {
            rule: rule.id,
            grounding: grounding.clone(),
        }));
    };
    let mut out = interp.clone();
    out.set(r.head_atom(&values, None), target);
    Ok(out)
}

pub fn run_chase(
    program: &Program,
    dataset: &FuzzyDataset,
    config: StrategyConfig,
) -> Result<ChaseResult, ChaseError> {
    let mut chase = Chase::new(program, dataset, config)?;
    let status = chase.run()?;
    Ok(chase.into_result(status))
}

/// Whether every grounding of every rule is K-satisfied: the Łukasiewicz
/// implication from body to head is at least `K`, equivalently
/// `head >= max{0, body + K - 1}`. Existential heads take the best
/// completion within the support.
///
/// Groundings with a zero body are satisfied for any `K`, so only those with
/// every plain body atom in the support are visited.
pub fn check_k_model(interp: &FuzzyInterpretation, program: &Program, k: TruthDegree) -> bool {
    k_model_violation(interp, program, k).is_none()
}

/// A violated trigger with its body and head degrees.
pub fn k_model_violation(
    interp: &FuzzyInterpretation,
    program: &Program,
    k: TruthDegree,
) -> Option<(Trigger, TruthDegree, TruthDegree)> {
    for rule in program.rules() {
        let r = CompiledRule::new(rule);
        let mut found = Vec::new();
        r.join(interp, None, &mut |v| found.push(v));
        found.sort();
        for values in found {
            let body = r.body_degree(interp, &values);
            let head = if r.has_existentials() {
                best_match(interp, &r.head_predicate, &r.head_pattern(&values))
            } else {
                interp.get(&r.head_atom(&values, None))
            };
            if head < k_target(body, k) {
                let t = Trigger {
                    rule: rule.id,
                    grounding: r.grounding(&values),
                };
                return Some((t, body, head));
            }
        }
    }
    None
}
