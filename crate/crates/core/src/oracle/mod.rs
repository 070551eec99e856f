//! Reference implementations for differential testing and the randomized
//! self-test suite built on them.

mod classical;
mod fixpoint;
pub mod gen;
mod homomorphism;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use thiserror::Error;

pub use classical::classical_chase;
pub use fixpoint::{naive_fixpoint, naive_stratified};
pub use homomorphism::{find_ndf_homomorphism, DEFAULT_CANDIDATE_CAP};

use crate::chase::{
    k_model_violation, run_chase, Activity, ChaseResult, Order, StepLimit, StrategyConfig,
};
use crate::degrees::{CustomTNorm, TNorm, TruthDegree};
use crate::lang::{
    check_weak_acyclicity, compute_stratification, Condensation, Program, Stratification,
};
use crate::model::{crispify, FuzzyDataset, FuzzyInterpretation, GroundAtom, Value};
use crate::reason::{evaluate_with_stratification, stratum_fixpoints_hold};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("the oracle handles programs without existential variables only")]
    Existentials,
    #[error("unary operators must only read extensional predicates here")]
    NotSemipositive,
    #[error("the classical chase has no unary operators")]
    UnaryOperators,
    #[error("not stratifiable")]
    NotStratifiable,
    #[error("fixpoint needed more than {rounds} rounds")]
    RoundCapExceeded { rounds: usize },
    #[error("undecided: {0}")]
    Undecided(String),
}

/// Checks conditions (i) to (iv) of a stratification directly: the strata
/// partition the rules, every intensional predicate has a level and all its
/// rules sit in that stratum, plain body dependencies do not go up and unary
/// ones go strictly down.
pub fn verify_stratification(program: &Program, s: &Stratification) -> Result<(), String> {
    let mut seen = BTreeSet::new();
    for stratum in &s.strata {
        for &id in stratum {
            if id >= program.len() || !seen.insert(id) {
                return Err(format!("rule {id} is missing or listed twice"));
            }
        }
    }
    if seen.len() != program.len() {
        return Err("strata do not cover every rule".into());
    }
    let idb = program.intensional();
    for p in &idb {
        match s.levels.get(p) {
            Some(&l) if (1..=s.strata.len()).contains(&l) => {}
            _ => return Err(format!("predicate {p} has no valid level")),
        }
    }
    for (i, stratum) in s.strata.iter().enumerate() {
        for &id in stratum {
            let rule = &program.rules()[id];
            let head = s.levels[&rule.head.predicate];
            if head != i + 1 {
                return Err(format!(
                    "rule {id} is in stratum {} but its head has level {head}",
                    i + 1
                ));
            }
            for lit in &rule.body {
                if !idb.contains(&lit.atom.predicate) {
                    continue;
                }
                let body = s.levels[&lit.atom.predicate];
                if lit.op.is_some() && body >= head {
                    return Err(format!(
                        "rule {id}: unary body predicate {} at level {body}, head at {head}",
                        lit.atom.predicate
                    ));
                }
                if body > head {
                    return Err(format!(
                        "rule {id}: body predicate {} at level {body}, head at {head}",
                        lit.atom.predicate
                    ));
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(String),
    NotApplicable(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub verdict: Verdict,
}

/// Verdicts of every cross-check run on one instance, with the instance
/// itself as text so that any failure can be replayed.
#[derive(Clone, Debug)]
pub struct DifferentialReport {
    pub descriptor: String,
    pub program_text: String,
    pub dataset_text: String,
    pub checks: Vec<CheckOutcome>,
}

impl DifferentialReport {
    fn new(descriptor: impl Into<String>, program: &Program, dataset: &FuzzyDataset) -> Self {
        DifferentialReport {
            descriptor: descriptor.into(),
            program_text: program.to_string(),
            dataset_text: dataset.to_string(),
            checks: Vec::new(),
        }
    }

    fn record(&mut self, name: &'static str, verdict: Verdict) {
        self.checks.push(CheckOutcome { name, verdict });
    }

    fn check(&mut self, name: &'static str, result: Result<(), String>) {
        self.record(
            name,
            match result {
                Ok(()) => Verdict::Pass,
                Err(e) => Verdict::Fail(e),
            },
        );
    }

    pub fn passed(&self) -> bool {
        !self
            .checks
            .iter()
            .any(|c| matches!(c.verdict, Verdict::Fail(_)))
    }

    pub fn failures(&self) -> impl Iterator<Item = (&'static str, &str)> {
        self.checks.iter().filter_map(|c| match &c.verdict {
            Verdict::Fail(why) => Some((c.name, why.as_str())),
            _ => None,
        })
    }

    pub fn verdict_of(&self, name: &str) -> Option<&Verdict> {
        self.checks
            .iter()
            .find(|c| c.name == name)
            .map(|c| &c.verdict)
    }
}

impl fmt::Display for DifferentialReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instance: {}", self.descriptor)?;
        for c in &self.checks {
            match &c.verdict {
                Verdict::Pass => writeln!(f, "  pass  {}", c.name)?,
                Verdict::NotApplicable(why) => writeln!(f, "  n/a   {}: {why}", c.name)?,
                Verdict::Fail(why) => writeln!(f, "  FAIL  {}: {why}", c.name)?,
            }
        }
        if !self.passed() {
            writeln!(f, "  program:")?;
            for line in self.program_text.lines() {
                writeln!(f, "    {line}")?;
            }
            writeln!(f, "  dataset:")?;
            for line in self.dataset_text.lines() {
                writeln!(f, "    {line}")?;
            }
        }
        Ok(())
    }
}

/// Bounds for the randomized suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Instances per family.
    pub instances: usize,
    pub homomorphism: usize,
    pub classical: usize,
}

impl Caps {
    pub const TINY: Caps = Caps {
        instances: 25,
        homomorphism: 100_000,
        classical: 100_000,
    };
    pub const STANDARD: Caps = Caps {
        instances: 250,
        homomorphism: DEFAULT_CANDIDATE_CAP,
        classical: 1_000_000,
    };
}

const STRATEGIES: [(Activity, Order); 4] = [
    (Activity::SemiOblivious, Order::Greedy),
    (Activity::Restricted, Order::Greedy),
    (Activity::SemiOblivious, Order::Fifo),
    (Activity::Restricted, Order::Fifo),
];

fn eps_le(a: f64, b: f64) -> bool {
    a <= b + 1e-12
}

/// Sampled t-norm laws on the grid `{0, 0.1, ..., 1}`.
fn tnorm_laws(t: &TNorm) -> Result<(), String> {
    let grid: Vec<TruthDegree> = (0..=10)
        .map(|k| TruthDegree::new(k as f64 / 10.0).expect("grid"))
        .collect();
    let ap = |a: TruthDegree, b: TruthDegree| t.apply(a, b).value();
    for &a in &grid {
        if (ap(a, TruthDegree::ONE) - a.value()).abs() > 1e-12 {
            return Err(format!("{t}: identity fails at a = {a}"));
        }
        for &b in &grid {
            if ap(a, b) != ap(b, a) {
                return Err(format!("{t}: not commutative at ({a}, {b})"));
            }
            if !eps_le(ap(a, b), a.value().min(b.value())) {
                return Err(format!("{t}: {a} ⊗ {b} = {} exceeds the minimum", ap(a, b)));
            }
        }
    }
    for &a in &grid {
        for (i, &b) in grid.iter().enumerate() {
            for &c in &grid[i..] {
                if !eps_le(ap(a, b), ap(a, c)) {
                    return Err(format!(
                        "{t}: not monotone: {a} ⊗ {b} = {} > {a} ⊗ {c} = {}",
                        ap(a, b),
                        ap(a, c)
                    ));
                }
            }
        }
    }
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                let left = t.apply(t.apply(a, b), c).value();
                let right = t.apply(a, t.apply(b, c)).value();
                if (left - right).abs() > 1e-12 {
                    return Err(format!("{t}: not associative at ({a}, {b}, {c})"));
                }
            }
        }
    }
    Ok(())
}

fn constant_part_diff(
    a: &FuzzyInterpretation,
    b: &FuzzyInterpretation,
) -> Option<(GroundAtom, TruthDegree, TruthDegree)> {
    let (ca, cb) = (a.constant_part(), b.constant_part());
    let keys: BTreeSet<GroundAtom> = ca.into_keys().chain(cb.into_keys()).collect();
    keys.into_iter().find_map(|k| {
        let (x, y) = (a.get(&k), b.get(&k));
        (x != y).then_some((k, x, y))
    })
}

fn pointwise_diff(
    a: &FuzzyInterpretation,
    b: &FuzzyInterpretation,
) -> Option<(GroundAtom, TruthDegree, TruthDegree)> {
    let keys: BTreeSet<GroundAtom> = a.support().into_iter().chain(b.support()).collect();
    keys.into_iter().find_map(|k| {
        let (x, y) = (a.get(&k), b.get(&k));
        (x != y).then_some((k, x, y))
    })
}

/// Every ground atom over `constants` for the predicates of `arities`.
fn ground_goals(
    arities: &BTreeMap<crate::lang::Symbol, usize>,
    constants: &[Value],
) -> Vec<GroundAtom> {
    let mut out = Vec::new();
    for (p, &arity) in arities {
        let mut idx = vec![0usize; arity];
        if arity > 0 && constants.is_empty() {
            continue;
        }
        loop {
            out.push(GroundAtom::new(
                p.clone(),
                idx.iter().map(|&i| constants[i].clone()).collect(),
            ));
            let mut pos = arity;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < constants.len() {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    out
}

/// Runs every applicable cross-check on one instance.
pub fn differential_check(
    descriptor: &str,
    program: &Program,
    dataset: &FuzzyDataset,
    caps: &Caps,
) -> DifferentialReport {
    let mut report = DifferentialReport::new(descriptor, program, dataset);

    let connectives: BTreeMap<String, TNorm> = program
        .rules()
        .iter()
        .filter(|r| r.body.len() > 1)
        .map(|r| (r.connective.to_string(), r.connective.clone()))
        .collect();
    let laws = connectives.values().try_for_each(tnorm_laws);
    report.check("tnorm-laws", laws);

    if program.uses_unary_ops() {
        stratified_checks(&mut report, program, dataset);
        return report;
    }
    if !check_weak_acyclicity(program).is_weakly_acyclic() {
        report.record("chase", Verdict::NotApplicable("not weakly acyclic".into()));
        return report;
    }

    let mut results: Vec<ChaseResult> = Vec::new();
    for (activity, order) in STRATEGIES {
        let config = StrategyConfig::new(activity, order);
        match run_chase(program, dataset, config) {
            Ok(r) if r.is_complete() => results.push(r),
            Ok(r) => {
                report.record(
                    "chase",
                    Verdict::Fail(format!("{} hit its step limit", r.config.strategy_name())),
                );
                return report;
            }
            Err(e) => {
                report.record("chase", Verdict::Fail(e.to_string()));
                return report;
            }
        }
    }
    report.record("chase", Verdict::Pass);

    let initial = crate::model::minimal_interpretation(dataset);
    let crisp_facts: BTreeSet<GroundAtom> =
        crispify(dataset).iter().map(|(a, _)| a.clone()).collect();
    let crisp = classical_chase(program, &crisp_facts, caps.classical);

    // Greedy: non-increasing targets, distinct heads, at most one step per
    // derivable head.
    let greedy = results
        .iter()
        .filter(|r| r.config.order == Order::Greedy)
        .try_for_each(|r| {
            r.verify_greedy_invariants()
                .map_err(|e| format!("{}: {e}", r.config.strategy_name()))?;
            if let Ok(atoms) = &crisp {
                if r.trace.len() > atoms.len() {
                    return Err(format!(
                        "{}: {} steps but only {} derivable atoms",
                        r.config.strategy_name(),
                        r.trace.len(),
                        atoms.len()
                    ));
                }
            }
            Ok(())
        });
    report.check("greedy-invariants", greedy);

    let models = results.iter().try_for_each(|r| {
        if let Some((t, body, head)) = k_model_violation(&r.interpretation, program, r.config.k) {
            return Err(format!(
                "{}: trigger {t} has body {body} but head {head}",
                r.config.strategy_name()
            ));
        }
        if !r.interpretation.dominates(&initial) {
            return Err(format!(
                "{}: result lost dataset degrees",
                r.config.strategy_name()
            ));
        }
        if r.replay() != r.interpretation {
            return Err(format!(
                "{}: trace replay differs",
                r.config.strategy_name()
            ));
        }
        Ok(())
    });
    report.check("model", models);

    let agree = results[1..].iter().try_for_each(|r| {
        match constant_part_diff(&results[0].interpretation, &r.interpretation) {
            Some((atom, a, b)) => Err(format!(
                "{atom}: {} gives {a}, {} gives {b}",
                results[0].config.strategy_name(),
                r.config.strategy_name()
            )),
            None => Ok(()),
        }
    });
    report.check("strategy-agreement", agree);

    if program.uses_existentials() {
        report.record(
            "naive-fixpoint",
            Verdict::NotApplicable("existential rules".into()),
        );
    } else {
        let check = match naive_fixpoint(program, dataset, TruthDegree::ONE) {
            Err(e) => Err(e.to_string()),
            Ok(naive) => {
                if let Some((t, b, h)) = k_model_violation(&naive, program, TruthDegree::ONE) {
                    Err(format!("oracle result violates {t}: body {b}, head {h}"))
                } else {
                    results
                        .iter()
                        .filter(|r| r.config.order == Order::Greedy)
                        .try_for_each(|r| match pointwise_diff(&naive, &r.interpretation) {
                            Some((atom, x, y)) => Err(format!(
                                "{atom}: oracle {x}, {} {y}",
                                r.config.strategy_name()
                            )),
                            None => Ok(()),
                        })
                }
            }
        };
        report.check("naive-fixpoint", check);
    }

    match &crisp {
        Err(e) => report.record("crisp-containment", Verdict::NotApplicable(e.to_string())),
        Ok(atoms) => {
            let check = results.iter().try_for_each(|r| {
                match r
                    .interpretation
                    .support()
                    .into_iter()
                    .find(|a| !atoms.contains(a))
                {
                    Some(a) => Err(format!(
                        "{}: {a} is missing from the crisp chase",
                        r.config.strategy_name()
                    )),
                    None => Ok(()),
                }
            });
            report.check("crisp-containment", check);
        }
    }

    // Universality: the greedy results map into every other model at hand.
    let mut models: Vec<(String, FuzzyInterpretation)> = results
        .iter()
        .map(|r| {
            (
                r.config.strategy_name().to_string(),
                r.interpretation.clone(),
            )
        })
        .collect();
    if let Ok(atoms) = &crisp {
        let mut top = FuzzyInterpretation::new();
        for a in atoms {
            top.set(a.clone(), TruthDegree::ONE);
        }
        models.push(("crisp closure".into(), top));
    }
    let mut verdict = Verdict::Pass;
    'outer: for r in results.iter().filter(|r| r.config.order == Order::Greedy) {
        for (name, m) in &models {
            match find_ndf_homomorphism(&r.interpretation, m, caps.homomorphism) {
                Ok(Some(_)) => {}
                Ok(None) => {
                    verdict = Verdict::Fail(format!(
                        "no homomorphism from the {} result into the {name} model",
                        r.config.strategy_name()
                    ));
                    break 'outer;
                }
                Err(e) => {
                    verdict = Verdict::NotApplicable(e.to_string());
                }
            }
        }
    }
    report.record("universality", verdict);

    if dataset.all_ones() {
        match &crisp {
            Err(e) => report.record("classical-agreement", Verdict::NotApplicable(e.to_string())),
            Ok(atoms) => {
                let mut constants: BTreeSet<Value> =
                    dataset.constants().into_iter().map(Value::Const).collect();
                constants.extend(program.constants().into_iter().map(Value::Const));
                let constants: Vec<Value> = constants.into_iter().collect();
                let check = ground_goals(program.arities(), &constants)
                    .into_iter()
                    .try_for_each(|g| {
                        let fuzzy = results[1].get(&g) >= TruthDegree::ONE;
                        if fuzzy != atoms.contains(&g) {
                            Err(format!(
                                "goal {g}: fuzzy {fuzzy}, classical {}",
                                atoms.contains(&g)
                            ))
                        } else {
                            Ok(())
                        }
                    });
                report.check("classical-agreement", check);
            }
        }
    }
    report
}

fn stratified_checks(report: &mut DifferentialReport, program: &Program, dataset: &FuzzyDataset) {
    let strat = match compute_stratification(program) {
        Ok(s) => s,
        Err(e) => {
            report.record("stratification", Verdict::NotApplicable(e.to_string()));
            return;
        }
    };
    report.check("stratification", verify_stratification(program, &strat));
    let cond = Condensation::of(program).expect("stratifiable");
    let mut outcomes = Vec::new();
    let mut fixpoints = Ok(());
    for order in cond.topological_orders(8) {
        let s = cond.stratification_for_order(&order);
        if let Err(e) = verify_stratification(program, &s) {
            report.record(
                "stratification",
                Verdict::Fail(format!("order {order:?}: {e}")),
            );
            return;
        }
        match evaluate_with_stratification(program, dataset, &s) {
            Ok(run) => {
                if fixpoints.is_ok() && !stratum_fixpoints_hold(program, &run) {
                    fixpoints = Err(format!("order {order:?}: a stratum is not at its fixpoint"));
                }
                outcomes.push((order, run.result));
            }
            Err(e) => {
                report.record("stratified-evaluation", Verdict::Fail(e.to_string()));
                return;
            }
        }
    }
    report.check("stratum-fixpoint", fixpoints);
    let same =
        outcomes[1..]
            .iter()
            .try_for_each(|(order, r)| match pointwise_diff(&outcomes[0].1, r) {
                Some((a, x, y)) => Err(format!(
                    "{a}: order {:?} gives {x}, order {order:?} gives {y}",
                    outcomes[0].0
                )),
                None => Ok(()),
            });
    report.check("stratification-independence", same);
    let oracle = match naive_stratified(program, dataset) {
        Ok(naive) => match pointwise_diff(&naive, &outcomes[0].1) {
            Some((a, x, y)) => Err(format!("{a}: oracle {x}, engine {y}")),
            None => Ok(()),
        },
        Err(e) => Err(e.to_string()),
    };
    report.check("naive-stratified", oracle);
}

/// A deliberately non-monotone connective: above 0.5 both ways it collapses
/// to 0.25. Commutative and with identity 1, so only monotonicity and its
/// consequences give it away.
#[derive(Debug)]
pub struct BrokenTNorm;

impl CustomTNorm for BrokenTNorm {
    fn name(&self) -> &str {
        "broken"
    }

    fn apply(&self, a: f64, b: f64) -> f64 {
        if a == 1.0 || b == 1.0 || a.min(b) <= 0.5 {
            a.min(b)
        } else {
            0.25
        }
    }
}

/// The fixed negative-control instance using [`BrokenTNorm`].
pub fn negative_control() -> DifferentialReport {
    let mut registry = crate::degrees::ConnectiveRegistry::default();
    registry.register_custom_tnorm(Arc::new(BrokenTNorm));
    let program = crate::lang::parse_program_with("A(x) &broken B(x) -> C(x).", &registry)
        .expect("fixture parses");
    let dataset =
        crate::lang::parse_dataset("0.9 :: A(a).\n0.8 :: B(a).\n0.5 :: A(b).\n0.8 :: B(b).")
            .expect("fixture parses");
    differential_check(
        "negative control (broken t-norm)",
        &program,
        &dataset,
        &Caps::TINY,
    )
}

/// Reports of one randomized suite run.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub seed: u64,
    pub reports: Vec<DifferentialReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(DifferentialReport::passed)
    }

    /// `(check, pass, fail, not applicable)` per check name.
    pub fn tally(&self) -> BTreeMap<&'static str, (usize, usize, usize)> {
        let mut out: BTreeMap<&'static str, (usize, usize, usize)> = BTreeMap::new();
        for r in &self.reports {
            for c in &r.checks {
                let e = out.entry(c.name).or_default();
                match c.verdict {
                    Verdict::Pass => e.0 += 1,
                    Verdict::Fail(_) => e.1 += 1,
                    Verdict::NotApplicable(_) => e.2 += 1,
                }
            }
        }
        out
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {}: {} instances", self.seed, self.reports.len())?;
        for (name, (pass, fail, na)) in self.tally() {
            writeln!(
                f,
                "  {name:<28} pass {pass:>5}  fail {fail:>3}  n/a {na:>4}"
            )?;
        }
        let mut failing = String::new();
        for r in self.reports.iter().filter(|r| !r.passed()) {
            let _ = write!(failing, "{r}");
        }
        if !failing.is_empty() {
            writeln!(f, "failures:")?;
            f.write_str(&failing)?;
        }
        writeln!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Four families of `caps.instances` instances each: t-Datalog, weakly
/// acyclic with existentials, all-ones data with existentials, and
/// stratifiable programs with unary operators.
pub fn run_suite(seed: u64, caps: &Caps) -> SuiteReport {
    let mut reports = Vec::new();
    for i in 0..caps.instances as u64 {
        let s = seed.wrapping_mul(1_000_003).wrapping_add(i);
        let families = [
            ("t-Datalog", gen::datalog_instance(s)),
            ("existential", gen::weakly_acyclic_instance(s, true, false)),
            ("all-ones", gen::weakly_acyclic_instance(s, true, true)),
            ("stratified", gen::stratified_instance(s)),
        ];
        for (family, inst) in families {
            let name = format!("{family} seed {}", inst.seed);
            reports.push(differential_check(
                &name,
                &inst.program,
                &inst.dataset,
                caps,
            ));
        }
    }
    SuiteReport { seed, reports }
}

/// Chase configuration used for entailment-style checks at a given cap.
pub fn bounded(activity: Activity, order: Order, steps: usize) -> StrategyConfig {
    StrategyConfig::new(activity, order).with_max_steps(StepLimit::Bounded(steps))
}
