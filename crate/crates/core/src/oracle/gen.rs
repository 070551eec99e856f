//! Seeded random instances at desk scale.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::degrees::{TNorm, TruthDegree, UnaryOp};
use crate::lang::{
    check_weak_acyclicity, compute_stratification, Atom, Condensation, Literal, Program, Rule, Term,
};
use crate::model::{FuzzyDataset, GroundAtom, Value};

/// Shape of the instances to draw.
#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub max_constants: usize,
    pub max_predicates: usize,
    pub max_rules: usize,
    pub max_body: usize,
    pub max_arity: usize,
    pub max_facts: usize,
    pub existentials: bool,
    pub unary_ops: bool,
    /// All dataset degrees equal 1.
    pub all_ones: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_constants: 6,
            max_predicates: 4,
            max_rules: 6,
            max_body: 3,
            max_arity: 3,
            max_facts: 10,
            existentials: false,
            unary_ops: false,
            all_ones: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub program: Program,
    pub dataset: FuzzyDataset,
}

impl Instance {
    pub fn program_text(&self) -> String {
        self.program.to_string()
    }

    pub fn dataset_text(&self) -> String {
        self.dataset.to_string()
    }
}

const VARS: [&str; 4] = ["x", "y", "u", "w"];

fn connective(rng: &mut ChaCha8Rng) -> TNorm {
    match rng.gen_range(0..6) {
        0 => TNorm::Min,
        1 => TNorm::Lukasiewicz,
        2 => TNorm::Product,
        3 => TNorm::schweizer_sklar(-0.5).expect("valid"),
        4 => TNorm::schweizer_sklar(-1.0).expect("valid"),
        _ => TNorm::schweizer_sklar(-2.0).expect("valid"),
    }
}

fn unary(rng: &mut ChaCha8Rng) -> UnaryOp {
    match rng.gen_range(0..3) {
        0 => UnaryOp::Neg,
        1 => UnaryOp::NNeg,
        _ => UnaryOp::delta(rng.gen_range(1..=9) as f64 / 10.0).expect("valid"),
    }
}

/// A degree `k/10` with `k` in 1..=10.
pub fn tenth(rng: &mut impl Rng) -> TruthDegree {
    TruthDegree::new(rng.gen_range(1..=10) as f64 / 10.0).expect("in range")
}

struct Signature {
    predicates: Vec<(String, usize)>,
    constants: Vec<String>,
}

fn signature(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Signature {
    let np = rng.gen_range(1..=cfg.max_predicates.max(1));
    let nc = rng.gen_range(1..=cfg.max_constants.max(1));
    Signature {
        predicates: (0..np)
            .map(|i| (format!("P{i}"), rng.gen_range(1..=cfg.max_arity.max(1))))
            .collect(),
        constants: (0..nc).map(|i| format!("c{i}")).collect(),
    }
}

fn term(rng: &mut ChaCha8Rng, sig: &Signature, vars: &[&str]) -> Term {
    if rng.gen_bool(0.1) {
        Term::constant(sig.constants.choose(rng).expect("nonempty"))
    } else {
        Term::var(vars.choose(rng).expect("nonempty"))
    }
}

fn rule(rng: &mut ChaCha8Rng, sig: &Signature, cfg: &GenConfig) -> Rule {
    let len = rng.gen_range(1..=cfg.max_body.max(1));
    let mut body = Vec::with_capacity(len);
    let mut positive_vars: Vec<&str> = Vec::new();
    for i in 0..len {
        let (pred, arity) = sig.predicates.choose(rng).expect("nonempty");
        let use_op = cfg.unary_ops && i > 0 && !positive_vars.is_empty() && rng.gen_bool(0.4);
        let pool: Vec<&str> = if use_op {
            positive_vars.clone()
        } else {
            VARS.to_vec()
        };
        let args: Vec<Term> = (0..*arity).map(|_| term(rng, sig, &pool)).collect();
        let atom = Atom::new(pred, args);
        if use_op {
            body.push(Literal::with_op(unary(rng), atom));
        } else {
            for v in atom.vars() {
                let v: &str = v;
                if let Some(s) = VARS.iter().find(|s| **s == v) {
                    positive_vars.push(s);
                }
            }
            body.push(Literal::plain(atom));
        }
    }
    let (head_pred, arity) = sig.predicates.choose(rng).expect("nonempty");
    let mut existentials = Vec::new();
    let head_args: Vec<Term> = (0..*arity)
        .map(|_| {
            if cfg.existentials && rng.gen_bool(0.3) {
                let z = if rng.gen_bool(0.8) { "z" } else { "v" };
                if !existentials.iter().any(|e: &crate::lang::Symbol| &**e == z) {
                    existentials.push(z.into());
                }
                Term::var(z)
            } else if positive_vars.is_empty() || rng.gen_bool(0.1) {
                Term::constant(sig.constants.choose(rng).expect("nonempty"))
            } else {
                Term::var(positive_vars.choose(rng).expect("nonempty"))
            }
        })
        .collect();
    // A one-atom body has no visible connective and reads back as min.
    let conn = if len == 1 {
        TNorm::Min
    } else {
        connective(rng)
    };
    Rule::new(body, conn, Atom::new(head_pred, head_args), existentials)
}

fn dataset(rng: &mut ChaCha8Rng, sig: &Signature, cfg: &GenConfig) -> FuzzyDataset {
    let n = rng.gen_range(1..=cfg.max_facts.max(1));
    let mut ds = FuzzyDataset::new();
    for _ in 0..n {
        let (pred, arity) = sig.predicates.choose(rng).expect("nonempty");
        let args = (0..*arity)
            .map(|_| Value::constant(sig.constants.choose(rng).expect("nonempty")))
            .collect();
        let degree = if cfg.all_ones {
            TruthDegree::ONE
        } else {
            tenth(rng)
        };
        // Repeated atoms are simply skipped.
        let _ = ds.insert(GroundAtom::new(pred.as_str(), args), degree);
    }
    ds
}

/// Draws instances until `accept` holds. Each attempt uses its own seed so a
/// reported instance can be regenerated from `Instance::seed` alone.
pub fn instance_where(seed: u64, cfg: &GenConfig, accept: impl Fn(&Program) -> bool) -> Instance {
    let mut attempt_seed = seed;
    loop {
        if let Some(inst) = instance_from_seed(attempt_seed, cfg) {
            if accept(&inst.program) {
                return inst;
            }
        }
        attempt_seed = attempt_seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
    }
}

/// One attempt; `None` if the drawn rules do not form a valid program.
pub fn instance_from_seed(seed: u64, cfg: &GenConfig) -> Option<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sig = signature(&mut rng, cfg);
    let n = rng.gen_range(1..=cfg.max_rules.max(1));
    let rules: Vec<Rule> = (0..n).map(|_| rule(&mut rng, &sig, cfg)).collect();
    let program = Program::new(rules).ok()?;
    let dataset = dataset(&mut rng, &sig, cfg);
    Some(Instance {
        seed,
        program,
        dataset,
    })
}

/// Weakly acyclic instances; with `existentials` at least one rule invents
/// nulls.
pub fn weakly_acyclic_instance(seed: u64, existentials: bool, all_ones: bool) -> Instance {
    let cfg = GenConfig {
        existentials,
        all_ones,
        ..GenConfig::default()
    };
    instance_where(seed, &cfg, |p| {
        (!existentials || p.uses_existentials()) && check_weak_acyclicity(p).is_weakly_acyclic()
    })
}

/// Existential-free instances without unary operators.
pub fn datalog_instance(seed: u64) -> Instance {
    instance_where(seed, &GenConfig::default(), |_| true)
}

/// Stratifiable instances with unary operators on intensional predicates
/// and at least two admissible stratum orders.
pub fn stratified_instance(seed: u64) -> Instance {
    let cfg = GenConfig {
        unary_ops: true,
        ..GenConfig::default()
    };
    instance_where(seed, &cfg, |p| {
        p.uses_unary_ops()
            && !p.is_semipositive()
            && compute_stratification(p).is_ok()
            && Condensation::of(p).is_ok_and(|c| c.topological_orders(2).len() >= 2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_dataset, parse_program};

    #[test]
    fn same_seed_same_instance() {
        let a = weakly_acyclic_instance(7, true, false);
        let b = weakly_acyclic_instance(7, true, false);
        assert_eq!(a.program_text(), b.program_text());
        assert_eq!(a.dataset_text(), b.dataset_text());
    }

    #[test]
    fn texts_round_trip() {
        for seed in 0..50 {
            let inst = weakly_acyclic_instance(seed, seed % 2 == 0, false);
            let p = parse_program(&inst.program_text()).unwrap();
            assert_eq!(p, inst.program);
            let d = parse_dataset(&inst.dataset_text()).unwrap();
            assert_eq!(d, inst.dataset);
        }
    }

    #[test]
    fn shapes() {
        for seed in 0..20 {
            let s = stratified_instance(seed);
            assert!(s.program.uses_unary_ops());
            let w = weakly_acyclic_instance(seed, true, true);
            assert!(w.program.uses_existentials());
            assert!(w.dataset.all_ones());
            assert!(w.program.len() <= 6);
            assert!(w.program.arities().len() <= 4);
        }
    }
}
