//! The Boolean semi-oblivious chase with the same null naming as the fuzzy
//! chase.

use std::collections::{BTreeMap, BTreeSet};

use crate::lang::{Atom, Program, Symbol, Term};
use crate::model::{GroundAtom, NullKey, Value};

use super::OracleError;

/// Closes `facts` under `program`, round by round. Every rule grounding adds
/// its head once; existential positions get the null named by rule, variable
/// and frontier binding. More than `cap` derived atoms is undecided.
pub fn classical_chase(
    program: &Program,
    facts: &BTreeSet<GroundAtom>,
    cap: usize,
) -> Result<BTreeSet<GroundAtom>, OracleError> {
    if program.uses_unary_ops() {
        return Err(OracleError::UnaryOperators);
    }
    let mut atoms = facts.clone();
    let mut by_pred: BTreeMap<Symbol, Vec<GroundAtom>> = BTreeMap::new();
    for a in facts {
        by_pred
            .entry(a.predicate.clone())
            .or_default()
            .push(a.clone());
    }
    let mut derived = 0usize;
    loop {
        let mut fresh = BTreeSet::new();
        for rule in program.rules() {
            let body: Vec<&Atom> = rule.body.iter().map(|l| &l.atom).collect();
            let mut emit = |b: &BTreeMap<Symbol, Value>| {
                let frontier: Vec<(Symbol, Value)> = rule
                    .frontier()
                    .into_iter()
                    .map(|v| {
                        let val = b[&v].clone();
                        (v, val)
                    })
                    .collect();
                let args = rule
                    .head
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Const(c) => Value::Const(c.clone()),
                        Term::Var(v) if rule.existentials.contains(v) => {
                            Value::Null(NullKey::new(rule.id, v, frontier.clone()).into())
                        }
                        Term::Var(v) => b[v].clone(),
                    })
                    .collect();
                let head = GroundAtom::new(rule.head.predicate.clone(), args);
                if !atoms.contains(&head) {
                    fresh.insert(head);
                }
            };
            matches(&body, &by_pred, &mut BTreeMap::new(), &mut emit);
        }
        if fresh.is_empty() {
            return Ok(atoms);
        }
        derived += fresh.len();
        if derived > cap {
            return Err(OracleError::Undecided(format!(
                "classical chase derived more than {cap} atoms"
            )));
        }
        for a in fresh {
            by_pred
                .entry(a.predicate.clone())
                .or_default()
                .push(a.clone());
            atoms.insert(a);
        }
    }
}

fn matches(
    body: &[&Atom],
    by_pred: &BTreeMap<Symbol, Vec<GroundAtom>>,
    binding: &mut BTreeMap<Symbol, Value>,
    emit: &mut dyn FnMut(&BTreeMap<Symbol, Value>),
) {
    let Some((first, rest)) = body.split_first() else {
        emit(binding);
        return;
    };
    for fact in by_pred.get(&first.predicate).into_iter().flatten() {
        let mut added = Vec::new();
        let ok = first.args.len() == fact.args.len()
            && first
                .args
                .iter()
                .zip(fact.args.iter())
                .all(|(t, v)| match t {
                    Term::Const(c) => matches!(v, Value::Const(d) if d == c),
                    Term::Var(x) => match binding.get(x) {
                        Some(b) => b == v,
                        None => {
                            binding.insert(x.clone(), v.clone());
                            added.push(x.clone());
                            true
                        }
                    },
                });
        if ok {
            matches(rest, by_pred, binding, emit);
        }
        for x in added {
            binding.remove(&x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_dataset, parse_ground_atom, parse_program};

    fn facts(text: &str) -> BTreeSet<GroundAtom> {
        parse_dataset(text)
            .unwrap()
            .iter()
            .map(|(a, _)| a.clone())
            .collect()
    }

    #[test]
    fn image_labels_crisp() {
        let p = parse_program(include_str!("../../examples/fig1.tdl")).unwrap();
        let f = facts(include_str!("../../examples/fig1.tdf"));
        let out = classical_chase(&p, &f, 100_000).unwrap();
        assert!(out.contains(&parse_ground_atom("CommonClass(img1, img2, fish)").unwrap()));
        assert!(out.is_superset(&f));
    }

    #[test]
    fn guarded_rule_hits_the_cap() {
        let p = parse_program("R(x,y) -> exists z . R(y,z).").unwrap();
        assert!(matches!(
            classical_chase(&p, &facts("R(a, b)."), 50),
            Err(OracleError::Undecided(_))
        ));
    }

    #[test]
    fn empty_program_returns_input() {
        let f = facts("A(a).\nB(a, b).");
        assert_eq!(classical_chase(&Program::default(), &f, 10).unwrap(), f);
    }

    #[test]
    fn nulls_are_per_frontier_binding() {
        let p = parse_program("A(x, y) -> exists z . B(x, z).").unwrap();
        let out = classical_chase(&p, &facts("A(a, b).\nA(a, c).\nA(d, c)."), 10).unwrap();
        assert_eq!(out.iter().filter(|a| &*a.predicate == "B").count(), 2);
    }
}
