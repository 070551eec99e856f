//! Round-based least fixpoint over the full active domain.
//!
//! Every round grounds every rule in every possible way against the
//! interpretation as it was at the start of the round, and raises heads to
//! the best target found. Nothing here is shared with the chase engine
//! besides the degree arithmetic.

use std::collections::{BTreeMap, BTreeSet};

use crate::degrees::{k_target, TruthDegree};
use crate::lang::{Program, Rule, Symbol, Term};
use crate::model::{
    body_degree, minimal_interpretation, FuzzyDataset, FuzzyInterpretation, GroundAtom, Grounding,
    Value,
};

use super::OracleError;

pub fn naive_fixpoint(
    program: &Program,
    dataset: &FuzzyDataset,
    k: TruthDegree,
) -> Result<FuzzyInterpretation, OracleError> {
    if program.uses_existentials() {
        return Err(OracleError::Existentials);
    }
    if !program.is_semipositive() {
        return Err(OracleError::NotSemipositive);
    }
    fixpoint_from(program.rules(), minimal_interpretation(dataset), k)
}

/// Least fixpoint of `rules` above `start`. Unary operators must only read
/// predicates these rules do not derive.
pub(crate) fn fixpoint_from(
    rules: &[Rule],
    start: FuzzyInterpretation,
    k: TruthDegree,
) -> Result<FuzzyInterpretation, OracleError> {
    let mut domain: BTreeSet<Value> = start.active_domain();
    for r in rules {
        for atom in r
            .body
            .iter()
            .map(|l| &l.atom)
            .chain(std::iter::once(&r.head))
        {
            for t in &atom.args {
                if let Term::Const(c) = t {
                    domain.insert(Value::Const(c.clone()));
                }
            }
        }
    }
    let domain: Vec<Value> = domain.into_iter().collect();
    let heads: BTreeMap<&Symbol, usize> = rules
        .iter()
        .map(|r| (&r.head.predicate, r.head.args.len()))
        .collect();
    let possible = heads.values().fold(0usize, |acc, &arity| {
        acc.saturating_add(domain.len().saturating_pow(arity as u32))
    });
    let cap = possible.saturating_add(2);

    let mut current = start;
    for _round in 0..cap {
        let snapshot = current.clone();
        let mut changed = false;
        for rule in rules {
            let vars = rule.body_vars();
            for_each_assignment(&domain, vars.len(), &mut |vals| {
                let g = Grounding::new(vars.iter().cloned().zip(vals.iter().cloned()).collect());
                let body = body_degree(&snapshot, rule, &g).expect("total grounding");
                let target = k_target(body, k);
                if target.is_zero() {
                    return;
                }
                let head = GroundAtom::new(
                    rule.head.predicate.clone(),
                    rule.head
                        .args
                        .iter()
                        .map(|t| match t {
                            Term::Const(c) => Value::Const(c.clone()),
                            Term::Var(v) => g.get(v).expect("frontier variable").clone(),
                        })
                        .collect(),
                );
                if current.get(&head) < target {
                    current.set(head, target);
                    changed = true;
                }
            });
        }
        if !changed {
            return Ok(current);
        }
    }
    Err(OracleError::RoundCapExceeded { rounds: cap })
}

/// Calls `f` with every tuple in `domain^n`, in lexicographic order.
fn for_each_assignment(domain: &[Value], n: usize, f: &mut dyn FnMut(&[Value])) {
    if domain.is_empty() && n > 0 {
        return;
    }
    let mut idx = vec![0usize; n];
    let mut vals: Vec<Value> = (0..n).map(|_| domain[0].clone()).collect();
    loop {
        f(&vals);
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < domain.len() {
                vals[pos] = domain[idx[pos]].clone();
                break;
            }
            idx[pos] = 0;
            vals[pos] = domain[0].clone();
        }
    }
}

/// Stratified semantics computed without the chase or the stratification
/// analysis: levels by relaxation, then one naive fixpoint per level.
pub fn naive_stratified(
    program: &Program,
    dataset: &FuzzyDataset,
) -> Result<FuzzyInterpretation, OracleError> {
    if program.uses_existentials() {
        return Err(OracleError::Existentials);
    }
    let idb = program.intensional();
    let mut level: BTreeMap<Symbol, usize> = idb.iter().map(|p| (p.clone(), 1)).collect();
    let bound = idb.len() + 1;
    loop {
        let mut changed = false;
        for r in program.rules() {
            for lit in &r.body {
                let Some(&l) = level.get(&lit.atom.predicate) else {
                    continue;
                };
                let need = l + usize::from(lit.op.is_some());
                let head = level
                    .get_mut(&r.head.predicate)
                    .expect("head is intensional");
                if *head < need {
                    *head = need;
                    changed = true;
                }
            }
        }
        if level.values().any(|&l| l > bound) {
            return Err(OracleError::NotStratifiable);
        }
        if !changed {
            break;
        }
    }
    let top = level.values().copied().max().unwrap_or(0);
    let mut interp = minimal_interpretation(dataset);
    for l in 1..=top {
        let rules: Vec<Rule> = program
            .rules()
            .iter()
            .filter(|r| level[&r.head.predicate] == l)
            .cloned()
            .collect();
        interp = fixpoint_from(&rules, interp, TruthDegree::ONE)?;
    }
    Ok(interp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_dataset, parse_ground_atom, parse_program};

    #[test]
    fn image_labels() {
        let p = parse_program(include_str!("../../examples/fig1.tdl")).unwrap();
        let ds = parse_dataset(include_str!("../../examples/fig1.tdf")).unwrap();
        let i = naive_fixpoint(&p, &ds, TruthDegree::ONE).unwrap();
        let g = parse_ground_atom("CommonClass(img1, img2, fish)").unwrap();
        assert!((i.get(&g).value() - 0.72).abs() <= 1e-12);
    }

    #[test]
    fn empty_program_is_the_dataset() {
        let ds = parse_dataset("0.5 :: A(a).\nB(a, b).").unwrap();
        let i = naive_fixpoint(&Program::default(), &ds, TruthDegree::ONE).unwrap();
        assert_eq!(i, minimal_interpretation(&ds));
    }

    #[test]
    fn rejects_existentials() {
        let p = parse_program("R(x,y) -> exists z . R(y,z).").unwrap();
        assert_eq!(
            naive_fixpoint(&p, &FuzzyDataset::new(), TruthDegree::ONE),
            Err(OracleError::Existentials)
        );
    }

    #[test]
    fn stratified_by_hand() {
        let p = parse_program("P(x) -> Q(x).\n~Q(x) &min S(x) -> R(x).").unwrap();
        let ds = parse_dataset("0.4 :: P(a).\n0.9 :: S(a).\n0.9 :: S(b).").unwrap();
        let i = naive_stratified(&p, &ds).unwrap();
        assert_eq!(i.get(&parse_ground_atom("R(b)").unwrap()).value(), 0.9);
        assert_eq!(
            i.get(&parse_ground_atom("R(a)").unwrap()),
            TruthDegree::ZERO
        );
        let bad = parse_program("~P(x) &min S(x) -> P(x).").unwrap();
        assert_eq!(
            naive_stratified(&bad, &ds),
            Err(OracleError::NotStratifiable)
        );
    }
}
