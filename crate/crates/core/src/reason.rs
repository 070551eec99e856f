//! Entailment of ground goals, conjunctive-query goals and stratified
//! evaluation of programs with unary operators.

use thiserror::Error;

use crate::chase::{
    enumerate_active_triggers, run_chase, Activity, Chase, ChaseError, ChaseStatus, Order,
    StepLimit, StrategyConfig,
};
use crate::degrees::{TNorm, TruthDegree};
use crate::lang::{
    compute_stratification, Atom, InvalidProgram, Literal, Program, Rule, Stratification,
    StratifyError,
};
use crate::model::{minimal_interpretation, FuzzyDataset, FuzzyInterpretation, GroundAtom};
use crate::oracle::{classical_chase, OracleError};

#[derive(Clone, Debug, PartialEq)]
pub struct EntailmentQuery {
    pub goal: GroundAtom,
    pub threshold: TruthDegree,
    pub k: TruthDegree,
}

impl EntailmentQuery {
    pub fn new(goal: GroundAtom, threshold: TruthDegree) -> Self {
        EntailmentQuery {
            goal,
            threshold,
            k: TruthDegree::ONE,
        }
    }

    pub fn with_k(mut self, k: TruthDegree) -> Self {
        self.k = k;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Entailment {
    pub answer: bool,
    /// Degree of the goal in the universal model.
    pub degree: TruthDegree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EntailOptions {
    pub activity: Activity,
    pub max_steps: StepLimit,
}

impl Default for EntailOptions {
    fn default() -> Self {
        EntailOptions {
            activity: Activity::Restricted,
            max_steps: StepLimit::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ReasonError {
    #[error("undecided: the chase did not finish within {steps} steps")]
    Undecided { steps: usize },
    #[error(transparent)]
    Chase(#[from] ChaseError),
    #[error(transparent)]
    Stratify(#[from] StratifyError),
    #[error(transparent)]
    Program(#[from] InvalidProgram),
    #[error("stratified evaluation is defined for K = 1 only, got K = {0}")]
    KNotSupported(TruthDegree),
    #[error("goal {0} mentions a null")]
    GoalHasNull(GroundAtom),
    #[error("dataset has degrees below 1")]
    NotCrisp,
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Decides `I(G) >= c` in the universal model, computed by the greedy chase
/// (or by stratified evaluation when the program has unary operators).
pub fn entails(
    program: &Program,
    dataset: &FuzzyDataset,
    query: &EntailmentQuery,
    options: &EntailOptions,
) -> Result<Entailment, ReasonError> {
    if query.goal.has_nulls() {
        return Err(ReasonError::GoalHasNull(query.goal.clone()));
    }
    let interp = if program.uses_unary_ops() {
        if !query.k.is_one() {
            return Err(ReasonError::KNotSupported(query.k));
        }
        evaluate_stratified(program, dataset)?
    } else {
        let config = StrategyConfig::new(options.activity, Order::Greedy)
            .with_k(query.k)
            .with_max_steps(options.max_steps);
        let res = run_chase(program, dataset, config)?;
        if res.status == ChaseStatus::StepLimitExceeded {
            return Err(ReasonError::Undecided {
                steps: res.trace.len(),
            });
        }
        res.interpretation
    };
    let degree = interp.get(&query.goal);
    Ok(Entailment {
        answer: degree >= query.threshold,
        degree,
    })
}

/// Entailment at `c = K = 1` on an all-ones dataset, cross-checked against
/// the classical chase. Disagreement is reported as an invariant violation.
pub fn entails_all_ones_classical_agreement(
    program: &Program,
    dataset: &FuzzyDataset,
    goal: &GroundAtom,
) -> Result<Entailment, ReasonError> {
    if !dataset.all_ones() {
        return Err(ReasonError::NotCrisp);
    }
    let fuzzy = entails(
        program,
        dataset,
        &EntailmentQuery::new(goal.clone(), TruthDegree::ONE),
        &EntailOptions::default(),
    )?;
    let facts = dataset.iter().map(|(a, _)| a.clone()).collect();
    let classical = classical_chase(program, &facts, CLASSICAL_CAP)?;
    if classical.contains(goal) != fuzzy.answer {
        return Err(ReasonError::InvariantViolation(format!(
            "goal {goal}: fuzzy answer {} but classical membership {}",
            fuzzy.answer,
            classical.contains(goal)
        )));
    }
    Ok(fuzzy)
}

const CLASSICAL_CAP: usize = 1_000_000;

/// Adds `body -> Goal()` for a fresh 0-ary `Goal` predicate and asks whether
/// `Goal()` is entailed.
pub fn cq_entails(
    program: &Program,
    dataset: &FuzzyDataset,
    body: &[Atom],
    connective: TNorm,
    threshold: TruthDegree,
    k: TruthDegree,
    options: &EntailOptions,
) -> Result<Entailment, ReasonError> {
    let taken = |name: &str| {
        program.arity(name).is_some() || dataset.iter().any(|(a, _)| &*a.predicate == name)
    };
    let mut name = String::from("Goal");
    let mut n = 0;
    while taken(&name) {
        n += 1;
        name = format!("Goal_{n}");
    }
    let rule = Rule::new(
        body.iter().cloned().map(Literal::plain).collect(),
        connective,
        Atom::new(&name, vec![]),
        vec![],
    );
    let extended = program.with_rule(rule)?;
    let query = EntailmentQuery::new(GroundAtom::new(name.as_str(), vec![]), threshold).with_k(k);
    entails(&extended, dataset, &query, options)
}

/// Per-stratum snapshots of a stratified evaluation.
#[derive(Clone, Debug)]
pub struct StratifiedRun {
    pub stratification: Stratification,
    /// `snapshots[i]` is the interpretation after stratum `i + 1`.
    pub snapshots: Vec<FuzzyInterpretation>,
    pub result: FuzzyInterpretation,
}

/// The semantics of a stratifiable program without existentials, using its
/// minimal stratification.
pub fn evaluate_stratified(
    program: &Program,
    dataset: &FuzzyDataset,
) -> Result<FuzzyInterpretation, ReasonError> {
    let strat = compute_stratification(program)?;
    Ok(evaluate_with_stratification(program, dataset, &strat)?.result)
}

/// Runs the greedy chase stratum by stratum, each on the accumulated
/// interpretation. Unary operators read the frozen lower strata.
pub fn evaluate_with_stratification(
    program: &Program,
    dataset: &FuzzyDataset,
    stratification: &Stratification,
) -> Result<StratifiedRun, ReasonError> {
    if program.uses_existentials() {
        return Err(StratifyError::Existentials.into());
    }
    dataset.check_signature(program).map_err(ChaseError::from)?;
    let mut interp = minimal_interpretation(dataset);
    let mut snapshots = Vec::with_capacity(stratification.len());
    for stratum in &stratification.strata {
        let rules: Vec<Rule> = stratum
            .iter()
            .map(|&id| program.rules()[id].clone())
            .collect();
        let config = StrategyConfig::new(Activity::SemiOblivious, Order::Greedy);
        let mut chase = Chase::with_rules(&rules, interp, config)?;
        match chase.run()? {
            ChaseStatus::Completed => {}
            ChaseStatus::StepLimitExceeded => {
                return Err(ReasonError::Undecided {
                    steps: chase.trace().len(),
                })
            }
        }
        interp = chase.into_result(ChaseStatus::Completed).interpretation;
        snapshots.push(interp.clone());
    }
    Ok(StratifiedRun {
        stratification: stratification.clone(),
        snapshots,
        result: interp,
    })
}

/// After stratum `i`, no rule of strata `1..=i` has an active trigger.
pub fn stratum_fixpoints_hold(program: &Program, run: &StratifiedRun) -> bool {
    let config = StrategyConfig::new(Activity::SemiOblivious, Order::Greedy);
    let mut rules: Vec<Rule> = Vec::new();
    for (stratum, snapshot) in run.stratification.strata.iter().zip(&run.snapshots) {
        rules.extend(stratum.iter().map(|&id| program.rules()[id].clone()));
        if !enumerate_active_triggers(snapshot, &rules, &config).is_empty() {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_dataset, parse_ground_atom, parse_program, Condensation, Term};

    const FIG1_TDL: &str = include_str!("../examples/fig1.tdl");
    const FIG1_TDF: &str = include_str!("../examples/fig1.tdf");

    fn d(v: f64) -> TruthDegree {
        TruthDegree::new(v).unwrap()
    }

    fn fig1() -> (Program, FuzzyDataset) {
        (
            parse_program(FIG1_TDL).unwrap(),
            parse_dataset(FIG1_TDF).unwrap(),
        )
    }

    fn ask(p: &Program, ds: &FuzzyDataset, goal: &str, c: f64) -> Entailment {
        let q = EntailmentQuery::new(parse_ground_atom(goal).unwrap(), d(c));
        entails(p, ds, &q, &EntailOptions::default()).unwrap()
    }

    #[test]
    fn image_labels_goals() {
        let (p, ds) = fig1();
        let yes = ask(&p, &ds, "CommonClass(img1, img2, fish)", 0.72);
        assert!(yes.answer);
        assert!((yes.degree.value() - 0.72).abs() <= 1e-12);
        assert!(!ask(&p, &ds, "CommonClass(img1, img2, fish)", 0.73).answer);
        let zero = ask(&p, &ds, "CommonClass(img1, img2, nothing)", 0.0);
        assert!(zero.answer);
        assert_eq!(zero.degree, TruthDegree::ZERO);
    }

    #[test]
    fn classical_agreement() {
        let (p, ds) = fig1();
        let crisp = crate::model::crispify(&ds);
        let goal = parse_ground_atom("CommonClass(img1, img2, fish)").unwrap();
        assert!(
            entails_all_ones_classical_agreement(&p, &crisp, &goal)
                .unwrap()
                .answer
        );
        let absent = parse_ground_atom("CommonClass(img1, fish, img2)").unwrap();
        assert!(
            !entails_all_ones_classical_agreement(&p, &crisp, &absent)
                .unwrap()
                .answer
        );
        let empty = Program::default();
        let fact = parse_ground_atom("Hypernym(tench, fish)").unwrap();
        assert!(
            entails_all_ones_classical_agreement(&empty, &crisp, &fact)
                .unwrap()
                .answer
        );
        assert_eq!(
            entails_all_ones_classical_agreement(&p, &ds, &goal),
            Err(ReasonError::NotCrisp)
        );
    }

    #[test]
    fn conjunctive_query_goals() {
        let (p, ds) = fig1();
        let body = [Atom::new(
            "Class",
            vec![Term::var("x"), Term::constant("fish")],
        )];
        let opts = EntailOptions::default();
        let yes = cq_entails(&p, &ds, &body, TNorm::Min, d(0.9), TruthDegree::ONE, &opts).unwrap();
        assert!(yes.answer);
        assert_eq!(yes.degree, d(0.9));
        let no = cq_entails(&p, &ds, &body, TNorm::Min, d(0.95), TruthDegree::ONE, &opts).unwrap();
        assert!(!no.answer);
        let fact = [Atom::new(
            "NeuralLabel",
            vec![Term::var("x"), Term::constant("coho")],
        )];
        let direct = cq_entails(
            &Program::default(),
            &ds,
            &fact,
            TNorm::Min,
            d(0.01),
            TruthDegree::ONE,
            &opts,
        )
        .unwrap();
        assert!(direct.answer);
        assert_eq!(direct.degree, d(0.01));
    }

    #[test]
    fn two_strata_by_hand() {
        let p = parse_program("P(x) -> Q(x).\n~Q(x) &min S(x) -> R(x).").unwrap();
        let ds = parse_dataset("0.4 :: P(a).\n0.9 :: S(a).\n0.9 :: S(b).").unwrap();
        let i = evaluate_stratified(&p, &ds).unwrap();
        let get = |s: &str| i.get(&parse_ground_atom(s).unwrap());
        assert_eq!(get("Q(a)"), d(0.4));
        assert_eq!(get("R(a)"), TruthDegree::ZERO);
        assert_eq!(get("R(b)"), d(0.9));
        let q = EntailmentQuery::new(parse_ground_atom("R(b)").unwrap(), d(0.9));
        assert!(
            entails(&p, &ds, &q, &EntailOptions::default())
                .unwrap()
                .answer
        );
        let low_k = q.clone().with_k(d(0.5));
        assert!(matches!(
            entails(&p, &ds, &low_k, &EntailOptions::default()),
            Err(ReasonError::KNotSupported(_))
        ));
    }

    #[test]
    fn negation_on_extensional() {
        let p = parse_program("!P(x) &min T(x) -> R(x).").unwrap();
        let ds = parse_dataset("0.3 :: P(a).\nT(a).").unwrap();
        let i = evaluate_stratified(&p, &ds).unwrap();
        assert!((i.get(&parse_ground_atom("R(a)").unwrap()).value() - 0.7).abs() <= 1e-12);
    }

    #[test]
    fn positive_programs_match_the_chase() {
        let (p, ds) = fig1();
        let strat = evaluate_stratified(&p, &ds).unwrap();
        let chase = run_chase(&p, &ds, StrategyConfig::default()).unwrap();
        assert_eq!(strat, chase.interpretation);
    }

    #[test]
    fn every_order_gives_the_same_result() {
        let p = parse_program(
            "A(x) -> B(x).\nA(x) &luk E(x) -> C(x).\n~B(x) &prod ~C(x) &prod E(x) -> D(x).\nD(x) -> B(x).",
        );
        // B depends negatively on itself through D, so this one is rejected.
        assert!(matches!(
            compute_stratification(&p.unwrap()),
            Err(StratifyError::NotStratifiable { .. })
        ));
        let p = parse_program(
            "A(x) -> B(x).\nA(x) &luk E(x) -> C(x).\n!B(x) &prod ~C(x) &prod E(x) -> D(x).",
        )
        .unwrap();
        let ds = parse_dataset("0.5 :: A(a).\n0.7 :: E(a).\n0.9 :: E(b).\n0.2 :: A(b).").unwrap();
        let cond = Condensation::of(&p).unwrap();
        let orders = cond.topological_orders(16);
        assert!(orders.len() >= 2);
        let minimal = evaluate_stratified(&p, &ds).unwrap();
        for o in orders {
            let run =
                evaluate_with_stratification(&p, &ds, &cond.stratification_for_order(&o)).unwrap();
            assert!(stratum_fixpoints_hold(&p, &run));
            assert_eq!(run.result, minimal);
        }
    }

    #[test]
    fn undecided_instead_of_guessing() {
        let p = parse_program("R(x,y) -> exists z . R(y,z).").unwrap();
        let ds = parse_dataset("R(a, b).").unwrap();
        let q = EntailmentQuery::new(parse_ground_atom("R(b, a)").unwrap(), d(0.5));
        let opts = EntailOptions {
            max_steps: StepLimit::Bounded(50),
            ..EntailOptions::default()
        };
        assert_eq!(
            entails(&p, &ds, &q, &opts),
            Err(ReasonError::Undecided { steps: 50 })
        );
        assert!(matches!(
            entails(&p, &ds, &q, &EntailOptions::default()),
            Err(ReasonError::Chase(ChaseError::StepLimitRequired { .. }))
        ));
    }
}
