//! Brute-force search for non-decreasing homomorphisms.

use std::collections::BTreeMap;

use crate::model::{FuzzyInterpretation, GroundAtom, Value};

use super::OracleError;

pub const DEFAULT_CANDIDATE_CAP: usize = 1_000_000;

/// A map `h` on the nulls of `from` (constants fixed) with
/// `from(A) <= to(h(A))` for every atom `A`, or `None` if there is none.
/// Visiting more than `cap` partial maps is undecided.
pub fn find_ndf_homomorphism(
    from: &FuzzyInterpretation,
    to: &FuzzyInterpretation,
    cap: usize,
) -> Result<Option<BTreeMap<Value, Value>>, OracleError> {
    let nulls: Vec<Value> = from.nulls().into_iter().collect();
    let position: BTreeMap<&Value, usize> = nulls.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let image: Vec<Value> = to.active_domain().into_iter().collect();

    // Each atom is checked as soon as its last null is assigned.
    let mut ready: Vec<Vec<(&GroundAtom, f64)>> = vec![Vec::new(); nulls.len()];
    for (atom, d) in from.entries() {
        let last = atom.args.iter().filter_map(|v| position.get(v)).max();
        match last {
            Some(&i) => ready[i].push((atom, d.value())),
            None => {
                if to.get(atom).value() < d.value() {
                    return Ok(None);
                }
            }
        }
    }

    let mut assignment: Vec<Option<Value>> = vec![None; nulls.len()];
    let mut visited = 0usize;
    let found = search(
        0,
        &ready,
        &position,
        &image,
        to,
        &mut assignment,
        &mut visited,
        cap,
    )?;
    Ok(found.then(|| {
        nulls
            .into_iter()
            .zip(assignment.into_iter().map(|v| v.expect("complete")))
            .collect()
    }))
}

#[allow(clippy::too_many_arguments)]
fn search(
    i: usize,
    ready: &[Vec<(&GroundAtom, f64)>],
    position: &BTreeMap<&Value, usize>,
    image: &[Value],
    to: &FuzzyInterpretation,
    assignment: &mut Vec<Option<Value>>,
    visited: &mut usize,
    cap: usize,
) -> Result<bool, OracleError> {
    if i == assignment.len() {
        return Ok(true);
    }
    for candidate in image {
        *visited += 1;
        if *visited > cap {
            return Err(OracleError::Undecided(format!(
                "homomorphism search visited more than {cap} candidate maps"
            )));
        }
        assignment[i] = Some(candidate.clone());
        let ok = ready[i].iter().all(|(atom, d)| {
            let mapped = GroundAtom::new(
                atom.predicate.clone(),
                atom.args
                    .iter()
                    .map(|v| match position.get(v) {
                        Some(&j) => assignment[j].clone().expect("assigned before"),
                        None => v.clone(),
                    })
                    .collect(),
            );
            to.get(&mapped).value() >= *d
        });
        if ok && search(i + 1, ready, position, image, to, assignment, visited, cap)? {
            return Ok(true);
        }
    }
    assignment[i] = None;
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chase::{run_chase, StrategyConfig};
    use crate::lang::{parse_dataset, parse_ground_atom, parse_program};
    use crate::model::minimal_interpretation;

    #[test]
    fn identity_on_null_free() {
        let small = minimal_interpretation(&parse_dataset("0.5 :: A(a).").unwrap());
        let big = minimal_interpretation(&parse_dataset("0.7 :: A(a).\nB(b).").unwrap());
        assert_eq!(
            find_ndf_homomorphism(&small, &big, 10).unwrap(),
            Some(BTreeMap::new())
        );
        assert_eq!(find_ndf_homomorphism(&big, &small, 10).unwrap(), None);
    }

    #[test]
    fn collapse_onto_one_constant() {
        let p = parse_program(include_str!("../../examples/common_class.tdl")).unwrap();
        let ds = parse_dataset(include_str!("../../examples/common_class.tdf")).unwrap();
        let res = run_chase(&p, &ds, StrategyConfig::default()).unwrap();
        let mut model = minimal_interpretation(&ds);
        for (x, u) in [
            ("img1", "img2"),
            ("img2", "img1"),
            ("img1", "img1"),
            ("img2", "img2"),
        ] {
            let atom = parse_ground_atom(&format!("CommonClass({x}, {u}, fish)")).unwrap();
            model.set(atom, crate::degrees::TruthDegree::new(0.8).unwrap());
        }
        let h = find_ndf_homomorphism(&res.interpretation, &model, DEFAULT_CANDIDATE_CAP)
            .unwrap()
            .expect("a witness");
        assert_eq!(h.len(), 4);
        assert!(h.values().all(|v| *v == Value::constant("fish")));
        // Lowering one target below its source degree breaks every map.
        let atom = parse_ground_atom("CommonClass(img2, img2, fish)").unwrap();
        model.set(atom, crate::degrees::TruthDegree::new(0.75).unwrap());
        assert_eq!(
            find_ndf_homomorphism(&res.interpretation, &model, 1000).unwrap(),
            None
        );
    }

    #[test]
    fn cap_is_reported() {
        let p = parse_program(include_str!("../../examples/common_class.tdl")).unwrap();
        let ds = parse_dataset(include_str!("../../examples/common_class.tdf")).unwrap();
        let res = run_chase(&p, &ds, StrategyConfig::default()).unwrap();
        let target = minimal_interpretation(&ds);
        assert!(matches!(
            find_ndf_homomorphism(&res.interpretation, &target, 2),
            Err(OracleError::Undecided(_))
        ));
    }
}
