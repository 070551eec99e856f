//! Acceptance checks. Runs without the libtest harness so that every
//! criterion prints exactly one pass/fail line.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tdatalog::chase::{
    check_k_model, is_active, run_chase, Activity, Chase, ChaseStatus, StepLimit, StrategyConfig,
};
use tdatalog::degrees::{ConnectiveRegistry, TNorm, TruthDegree};
use tdatalog::lang::{
    compute_stratification, parse_dataset, parse_ground_atom, parse_program, Condensation, Program,
    Symbol,
};
use tdatalog::model::{minimal_interpretation, FuzzyDataset, GroundAtom, Grounding, Value};
use tdatalog::oracle::gen::{datalog_instance, stratified_instance, weakly_acyclic_instance};
use tdatalog::oracle::{classical_chase, naive_fixpoint, naive_stratified};
use tdatalog::reason::{
    entails, evaluate_with_stratification, stratum_fixpoints_hold, EntailOptions, EntailmentQuery,
    ReasonError,
};

const FIG1_TDL: &str = include_str!("../examples/fig1.tdl");
const FIG1_TDF: &str = include_str!("../examples/fig1.tdf");
const COMMON_TDL: &str = include_str!("../examples/common_class.tdl");
const COMMON_TDF: &str = include_str!("../examples/common_class.tdf");
const REACT_TDL: &str = include_str!("../examples/reactivation.tdl");
const REACT_TDF: &str = include_str!("../examples/reactivation.tdf");
const GUARDED_TDL: &str = include_str!("../examples/guarded.tdl");
const GUARDED_TDF: &str = include_str!("../examples/guarded.tdf");

const STRATEGIES: [&str; 4] = ["so-greedy", "r-greedy", "so-fifo", "r-fifo"];

fn d(v: f64) -> TruthDegree {
    TruthDegree::new(v).unwrap()
}

fn cfg(name: &str) -> StrategyConfig {
    name.parse().unwrap()
}

fn load(tdl: &str, tdf: &str) -> (Program, FuzzyDataset) {
    (parse_program(tdl).unwrap(), parse_dataset(tdf).unwrap())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn image_labels() -> Result<(), String> {
    let (p, ds) = load(FIG1_TDL, FIG1_TDF);
    let start = Instant::now();
    let res = run_chase(&p, &ds, StrategyConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(res.is_complete(), || "chase did not complete".into())?;
    let expected = [
        (GroundAtom::of("Class", &["img2", "fish"]), 0.9),
        (GroundAtom::of("Class", &["img1", "fish"]), 0.8),
        (
            GroundAtom::of("CommonClass", &["img1", "img2", "fish"]),
            0.72,
        ),
        (
            GroundAtom::of("CommonClass", &["img1", "img2", "tiger_shark"]),
            0.016,
        ),
    ];
    for (atom, want) in expected {
        let got = res.get(&atom).value();
        ensure((got - want).abs() <= 1e-12, || {
            format!("{atom} = {got}, expected {want}")
        })?;
    }
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })
}

fn four_triggers() -> Result<(), String> {
    let (p, ds) = load(COMMON_TDL, COMMON_TDF);
    for name in STRATEGIES {
        let res = run_chase(&p, &ds, cfg(name)).map_err(|e| e.to_string())?;
        let mut degrees: Vec<f64> = res.trace.iter().map(|s| s.degree_after.value()).collect();
        degrees.sort_by(f64::total_cmp);
        ensure(degrees.len() == 4, || {
            format!("{name}: {} steps", degrees.len())
        })?;
        for (got, want) in degrees.iter().zip([0.6, 0.7, 0.7, 0.8]) {
            ensure((got - want).abs() <= 1e-12, || {
                format!("{name}: degrees {degrees:?}")
            })?;
        }
        let heads: BTreeSet<&GroundAtom> = res.trace.iter().map(|s| &s.head).collect();
        ensure(
            heads.len() == 4 && heads.iter().all(|h| h.has_nulls()),
            || format!("{name}: heads {heads:?}"),
        )?;
    }
    let extended = parse_dataset(&format!(
        "{COMMON_TDF}\n0.8 :: CommonClass(img1, img2, fish)."
    ))
    .unwrap();
    let i = minimal_interpretation(&extended);
    let rho1 = Grounding::of(&[
        ("x", "img1"),
        ("y", "tiger_shark"),
        ("u", "img2"),
        ("w", "tench"),
    ]);
    let rule = &p.rules()[0];
    let so = is_active(&i, rule, &rho1, &cfg("so-greedy")).map_err(|e| e.to_string())?;
    let r = is_active(&i, rule, &rho1, &cfg("r-greedy")).map_err(|e| e.to_string())?;
    ensure(so && !r, || format!("so-active {so}, r-active {r}"))
}

fn reactivation() -> Result<(), String> {
    let (p, ds) = load(REACT_TDL, REACT_TDF);
    let c2 = GroundAtom::of("Class", &["img", "c2"]);
    let mut chase = Chase::new(&p, &ds, cfg("so-fifo")).map_err(|e| e.to_string())?;
    let via_hypernym = chase
        .trigger(1, Grounding::of(&[("x", "img"), ("y", "c1"), ("z", "c2")]))
        .map_err(|e| e.to_string())?;
    let via_label = chase
        .trigger(0, Grounding::of(&[("x", "img"), ("y", "c1")]))
        .map_err(|e| e.to_string())?;
    chase.apply(&via_hypernym).map_err(|e| e.to_string())?;
    chase.apply(&via_label).map_err(|e| e.to_string())?;
    let status = chase.run().map_err(|e| e.to_string())?;
    ensure(status == ChaseStatus::Completed, || {
        "fifo did not complete".into()
    })?;
    let writes: Vec<f64> = chase
        .trace()
        .iter()
        .filter(|s| s.head == c2)
        .map(|s| s.degree_after.value())
        .collect();
    ensure(writes == [0.6, 0.9], || {
        format!("writes to {c2}: {writes:?}")
    })?;
    let fifo = chase.into_result(status);

    let greedy = run_chase(&p, &ds, cfg("so-greedy")).map_err(|e| e.to_string())?;
    greedy
        .verify_greedy_invariants()
        .map_err(|e| e.to_string())?;
    let heads: BTreeSet<&GroundAtom> = greedy.trace.iter().map(|s| &s.head).collect();
    ensure(heads.len() == greedy.trace.len(), || {
        "greedy wrote a head twice".into()
    })?;
    ensure(greedy.interpretation == fifo.interpretation, || {
        format!(
            "greedy {} vs fifo {}",
            greedy.interpretation, fifo.interpretation
        )
    })
}

const RANDOM_INSTANCES: u64 = 1000;

fn greedy_invariants() -> Result<(), String> {
    let start = Instant::now();
    for seed in 0..RANDOM_INSTANCES {
        let inst = weakly_acyclic_instance(seed, seed % 2 == 0, false);
        let idb = inst.program.intensional();
        let facts = inst.dataset.iter().map(|(a, _)| a.clone()).collect();
        let crisp = classical_chase(&inst.program, &facts, 1_000_000).map_err(|e| e.to_string())?;
        let derivable = crisp.iter().filter(|a| idb.contains(&a.predicate)).count();
        for name in ["so-greedy", "r-greedy"] {
            let res = run_chase(&inst.program, &inst.dataset, cfg(name))
                .map_err(|e| format!("seed {seed}: {e}"))?;
            ensure(res.is_complete(), || {
                format!("seed {seed} {name}: incomplete")
            })?;
            res.verify_greedy_invariants()
                .map_err(|e| format!("seed {seed} {name}: {e}"))?;
            ensure(res.trace.len() <= derivable, || {
                format!(
                    "seed {seed} {name}: {} steps > {derivable} heads",
                    res.trace.len()
                )
            })?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })
}

fn oracle_equivalence() -> Result<(), String> {
    for seed in 0..RANDOM_INSTANCES {
        let inst = datalog_instance(seed);
        let naive = naive_fixpoint(&inst.program, &inst.dataset, TruthDegree::ONE)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(
            check_k_model(&naive, &inst.program, TruthDegree::ONE),
            || format!("seed {seed}: oracle result is not a model"),
        )?;
        for name in ["so-greedy", "r-greedy"] {
            let res = run_chase(&inst.program, &inst.dataset, cfg(name))
                .map_err(|e| format!("seed {seed}: {e}"))?;
            ensure(res.interpretation == naive, || {
                format!(
                    "seed {seed} {name}:\n{}\nvs oracle\n{naive}",
                    res.interpretation
                )
            })?;
            ensure(
                check_k_model(&res.interpretation, &inst.program, TruthDegree::ONE),
                || format!("seed {seed} {name}: not a model"),
            )?;
        }
    }
    Ok(())
}

fn ground_goals(program: &Program, dataset: &FuzzyDataset) -> Vec<GroundAtom> {
    let mut preds: BTreeMap<Symbol, usize> = program.arities().clone();
    for (a, _) in dataset.iter() {
        preds.insert(a.predicate.clone(), a.args.len());
    }
    let mut consts: BTreeSet<Symbol> = dataset.constants();
    consts.extend(program.constants());
    let consts: Vec<Value> = consts.into_iter().map(Value::Const).collect();
    let mut out = Vec::new();
    for (p, arity) in preds {
        let mut tuples: Vec<Vec<Value>> = vec![Vec::new()];
        for _ in 0..arity {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    consts.iter().map(move |c| {
                        let mut t = t.clone();
                        t.push(c.clone());
                        t
                    })
                })
                .collect();
        }
        out.extend(
            tuples
                .into_iter()
                .map(|args| GroundAtom::new(p.clone(), args)),
        );
    }
    out
}

fn classical_differential() -> Result<(), String> {
    for seed in 0..500 {
        let inst = weakly_acyclic_instance(seed, true, true);
        let facts = inst.dataset.iter().map(|(a, _)| a.clone()).collect();
        let crisp = classical_chase(&inst.program, &facts, 1_000_000).map_err(|e| e.to_string())?;
        let universal = run_chase(&inst.program, &inst.dataset, StrategyConfig::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let goals = ground_goals(&inst.program, &inst.dataset);
        for (i, goal) in goals.iter().enumerate() {
            let fuzzy = if i % 16 == 0 {
                // Spot-check the public entailment entry point against the
                // shared chase result.
                let q = EntailmentQuery::new(goal.clone(), TruthDegree::ONE);
                entails(&inst.program, &inst.dataset, &q, &EntailOptions::default())
                    .map_err(|e| format!("seed {seed}: {e}"))?
                    .answer
            } else {
                universal.get(goal).is_one()
            };
            ensure(fuzzy == crisp.contains(goal), || {
                format!(
                    "seed {seed}: goal {goal}: fuzzy {fuzzy}, classical {}",
                    crisp.contains(goal)
                )
            })?;
        }
    }
    Ok(())
}

fn crisp_containment() -> Result<(), String> {
    for seed in 0..RANDOM_INSTANCES {
        let inst = weakly_acyclic_instance(seed, seed % 2 == 0, false);
        let facts = inst.dataset.iter().map(|(a, _)| a.clone()).collect();
        let crisp = classical_chase(&inst.program, &facts, 1_000_000).map_err(|e| e.to_string())?;
        for name in STRATEGIES {
            let res = run_chase(&inst.program, &inst.dataset, cfg(name))
                .map_err(|e| format!("seed {seed}: {e}"))?;
            if let Some(a) = res
                .interpretation
                .support()
                .into_iter()
                .find(|a| !crisp.contains(a))
            {
                return Err(format!("seed {seed} {name}: {a} is not in the crisp chase"));
            }
        }
    }
    Ok(())
}

fn stratification_equivalence() -> Result<(), String> {
    for seed in 0..200 {
        let inst = stratified_instance(seed);
        let cond = Condensation::of(&inst.program).map_err(|e| e.to_string())?;
        let mut strats = vec![compute_stratification(&inst.program).map_err(|e| e.to_string())?];
        let orders = cond.topological_orders(16);
        ensure(orders.len() >= 2, || format!("seed {seed}: only one order"))?;
        strats.extend(orders.iter().map(|o| cond.stratification_for_order(o)));
        let mut first = None;
        for s in &strats {
            let run = evaluate_with_stratification(&inst.program, &inst.dataset, s)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            ensure(stratum_fixpoints_hold(&inst.program, &run), || {
                format!("seed {seed}: stratum fixpoint fails for {:?}", s.strata)
            })?;
            match &first {
                None => first = Some(run.result),
                Some(r) => ensure(*r == run.result, || {
                    format!("seed {seed}: strata {:?} give a different result", s.strata)
                })?,
            }
        }
        let naive = naive_stratified(&inst.program, &inst.dataset).map_err(|e| e.to_string())?;
        ensure(first.as_ref() == Some(&naive), || {
            format!("seed {seed}: oracle disagrees")
        })?;
    }
    Ok(())
}

fn non_termination() -> Result<(), String> {
    let (p, ds) = load(GUARDED_TDL, GUARDED_TDF);
    match run_chase(&p, &ds, StrategyConfig::default()) {
        Err(tdatalog::chase::ChaseError::StepLimitRequired { .. }) => {}
        other => return Err(format!("auto limit: {other:?}")),
    }
    let goals = [
        parse_ground_atom("R(a, b)").unwrap(),
        parse_ground_atom("R(b, a)").unwrap(),
    ];
    for cap in [1, 2, 3, 5, 10, 17, 100, 1000] {
        for name in STRATEGIES {
            let config = cfg(name).with_max_steps(StepLimit::Bounded(cap));
            let res = run_chase(&p, &ds, config).map_err(|e| e.to_string())?;
            ensure(res.status == ChaseStatus::StepLimitExceeded, || {
                format!("{name} cap {cap}: {:?}", res.status)
            })?;
            ensure(res.trace.len() == cap, || {
                format!("{name} cap {cap}: {} steps", res.trace.len())
            })?;
        }
        for activity in [Activity::SemiOblivious, Activity::Restricted] {
            for goal in &goals {
                let q = EntailmentQuery::new(goal.clone(), d(1.0));
                let opts = EntailOptions {
                    activity,
                    max_steps: StepLimit::Bounded(cap),
                };
                match entails(&p, &ds, &q, &opts) {
                    Err(ReasonError::Undecided { .. }) => {}
                    other => return Err(format!("goal {goal} cap {cap}: {other:?}")),
                }
            }
        }
    }
    Ok(())
}

/// Exact on a dyadic grid where sums and differences are exact floats.
fn dyadic(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0..=1u32 << 20) as f64 / (1u32 << 20) as f64
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..20) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen::<f64>(),
    }
}

fn tnorm_laws() -> Result<(), String> {
    let registry = ConnectiveRegistry::default();
    let mut tnorms: Vec<TNorm> = Vec::new();
    for name in registry.tnorm_names().collect::<Vec<_>>() {
        if name == "ss" {
            for p in [-0.5, -1.0, -2.0] {
                tnorms.push(registry.tnorm(name, Some(p)).map_err(|e| e.to_string())?);
            }
        } else {
            tnorms.push(registry.tnorm(name, None).map_err(|e| e.to_string())?);
        }
    }
    for needed in ["min", "luk", "prod"] {
        ensure(tnorms.iter().any(|t| t.name() == needed), || {
            format!("{needed} missing")
        })?;
    }
    ensure(
        tnorms.iter().filter(|t| t.name() == "ss").count() == 3,
        || "ss missing".into(),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for t in &tnorms {
        let exact = matches!(t, TNorm::Min | TNorm::Lukasiewicz);
        let tol = if exact { 0.0 } else { 1e-12 };
        for _ in 0..100_000 {
            let draw = |rng: &mut ChaCha8Rng| d(if exact { dyadic(rng) } else { unit(rng) });
            let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
            let ap = |x: TruthDegree, y: TruthDegree| t.apply(x, y);
            let v = |x: TruthDegree| x.value();
            ensure((v(ap(a, b)) - v(ap(b, a))).abs() <= tol, || {
                format!("{t}: commutativity at {a}, {b}")
            })?;
            ensure(
                (v(ap(ap(a, b), c)) - v(ap(a, ap(b, c)))).abs() <= tol,
                || format!("{t}: associativity at {a}, {b}, {c}"),
            )?;
            let (lo, hi) = if b <= c { (b, c) } else { (c, b) };
            ensure(v(ap(a, lo)) <= v(ap(a, hi)) + tol, || {
                format!("{t}: monotonicity at {a}, {lo}, {hi}")
            })?;
            ensure((v(ap(a, TruthDegree::ONE)) - v(a)).abs() <= tol, || {
                format!("{t}: identity at {a}")
            })?;
            ensure(v(ap(a, b)) <= v(a).min(v(b)) + tol, || {
                format!("{t}: above min at {a}, {b}")
            })?;
        }
    }
    Ok(())
}

/// A chain of labels with one existential rule and one join; facts grow
/// from 10 to 10,000 and the step count must stay polynomial.
fn scaling() -> Result<(), String> {
    let program = parse_program(
        "Edge(x, y) -> exists z . Tag(y, z).\n\
         Edge(x, y) &prod Label(y) -> Label(x).\n\
         Tag(x, z) &luk Label(x) -> Marked(x).",
    )
    .unwrap();
    let start = Instant::now();
    let mut points = Vec::new();
    for n in [10usize, 100, 1000, 10_000] {
        let mut text = String::new();
        for i in 0..n - 1 {
            let deg = 0.5 + 0.5 * ((i * 7919) % 97) as f64 / 97.0;
            text.push_str(&format!("{deg} :: Edge(c{i}, c{}).\n", i + 1));
        }
        text.push_str(&format!("Label(c{}).\n", n - 1));
        let ds = parse_dataset(&text).unwrap();
        let res = run_chase(&program, &ds, StrategyConfig::default()).map_err(|e| e.to_string())?;
        ensure(res.is_complete(), || format!("n = {n}: incomplete"))?;
        points.push(((n as f64).ln(), (res.trace.len().max(1) as f64).ln()));
    }
    let m = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = num / den;
    let elapsed = start.elapsed();
    ensure(slope <= 3.0, || format!("fitted degree {slope:.2}"))?;
    ensure(elapsed < Duration::from_secs(120), || {
        format!("took {elapsed:?}")
    })?;
    eprintln!("    scaling: fitted degree {slope:.2} in {elapsed:.2?}");
    Ok(())
}

type Criterion = fn() -> Result<(), String>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("criterion 1: image-label sample reproduction", image_labels),
        (
            "criterion 2: four-trigger example and restricted activity",
            four_triggers,
        ),
        ("criterion 3: fifo reactivation versus greedy", reactivation),
        (
            "criterion 4: greedy invariants on random instances",
            greedy_invariants,
        ),
        (
            "criterion 5: greedy chase equals naive fixpoint",
            oracle_equivalence,
        ),
        (
            "criterion 6: all-ones entailment equals classical chase",
            classical_differential,
        ),
        (
            "criterion 7: fuzzy support inside the crisp chase",
            crisp_containment,
        ),
        (
            "criterion 8: stratification order independence",
            stratification_equivalence,
        ),
        ("criterion 9: non-termination detection", non_termination),
        ("criterion 10: t-norm laws", tnorm_laws),
        ("scaling smoke test", scaling),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("PASS {name} ({secs:.2}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({secs:.2}s): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
