//! Ground values, fuzzy datasets and fuzzy interpretations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::degrees::{DegreeFormat, TNorm, TruthDegree};
use crate::lang::{is_plain_ident, write_quoted, Program, Rule, Symbol, Term};

/// Identity of a labelled null: the rule that invented it, the existential
/// variable it stands for and the frontier binding of the trigger.
///
/// Two triggers that agree on these three produce the same null, in any
/// chase, so null names are comparable across runs. The digest is computed
/// once; nulls nested in the frontier would otherwise be rehashed on every
/// comparison.
#[derive(Clone, Debug)]
pub struct NullKey {
    pub rule: usize,
    pub var: Symbol,
    /// Sorted by variable name.
    pub frontier: Vec<(Symbol, Value)>,
    digest: [u8; 8],
}

impl NullKey {
    pub fn new(rule: usize, var: &str, mut frontier: Vec<(Symbol, Value)>) -> Self {
        frontier.sort_by(|a, b| a.0.cmp(&b.0));
        let mut canon = String::new();
        for (v, val) in &frontier {
            let _ = write!(canon, "{v}={val};");
        }
        let hash = Sha256::digest(canon.as_bytes());
        let mut digest = [0u8; 8];
        digest.copy_from_slice(&hash[..8]);
        NullKey {
            rule,
            var: var.into(),
            frontier,
            digest,
        }
    }

    /// Hex digest of the canonical frontier serialisation (16 chars).
    pub fn digest(&self) -> String {
        self.digest
            .iter()
            .fold(String::with_capacity(16), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }
}

impl PartialEq for NullKey {
    fn eq(&self, other: &Self) -> bool {
        self.rule == other.rule
            && self.digest == other.digest
            && self.var == other.var
            && self.frontier == other.frontier
    }
}

impl Eq for NullKey {}

impl std::hash::Hash for NullKey {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rule.hash(state);
        self.var.hash(state);
        self.digest.hash(state);
    }
}

impl PartialOrd for NullKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Rule, variable and digest first, so the frontier is only compared on a
/// digest tie.
impl Ord for NullKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.rule, &self.var, self.digest)
            .cmp(&(other.rule, &other.var, other.digest))
            .then_with(|| self.frontier.cmp(&other.frontier))
    }
}

/// A domain element: a constant or a labelled null.
#[derive(Clone, Debug, Eq, PartialOrd, Ord)]
pub enum Value {
    Const(Symbol),
    Null(Arc<NullKey>),
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Const(a), Value::Const(b)) => a == b,
            (Value::Null(a), Value::Null(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl std::hash::Hash for Value {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Value::Const(c) => c.hash(state),
            Value::Null(k) => k.hash(state),
        }
    }
}

impl Value {
    pub fn constant(name: &str) -> Self {
        Value::Const(name.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null(_))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Const(c) if is_plain_ident(c) => f.write_str(c),
            Value::Const(c) => write_quoted(f, c),
            Value::Null(k) => write!(f, "_:r{}.{}.{}", k.rule, k.var, k.digest()),
        }
    }
}

/// Interns nulls so that equal keys share one allocation.
#[derive(Debug, Default, Clone)]
pub struct NullPool {
    nulls: HashMap<NullKey, Arc<NullKey>>,
}

impl NullPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn allocate(&mut self, key: NullKey) -> Value {
        if let Some(existing) = self.nulls.get(&key) {
            return Value::Null(existing.clone());
        }
        let arc = Arc::new(key.clone());
        self.nulls.insert(key, arc.clone());
        Value::Null(arc)
    }

    pub fn len(&self) -> usize {
        self.nulls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nulls.is_empty()
    }
}

/// Returns the null for `key`, reusing an interned one when present.
pub fn allocate_null(pool: &mut NullPool, key: NullKey) -> Value {
    pool.allocate(key)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: Symbol,
    pub args: Arc<[Value]>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<Symbol>, args: Vec<Value>) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args: args.into(),
        }
    }

    /// Shorthand for an atom over constants.
    pub fn of(predicate: &str, args: &[&str]) -> Self {
        GroundAtom::new(predicate, args.iter().map(|a| Value::constant(a)).collect())
    }

    pub fn has_nulls(&self) -> bool {
        self.args.iter().any(Value::is_null)
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        f.write_str("(")?;
        for (i, v) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ModelError {
    #[error("duplicate fact {0}")]
    Duplicate(GroundAtom),
    #[error("fact {0} mentions a null")]
    NullInData(GroundAtom),
    #[error("fact {0} has degree 0; datasets only list positive degrees")]
    ZeroDegree(GroundAtom),
    #[error("predicate {predicate} has arity {expected} in the program but {found} in the data")]
    ArityMismatch {
        predicate: Symbol,
        expected: usize,
        found: usize,
    },
}

/// A finite partial map from null-free ground atoms to degrees in `(0, 1]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FuzzyDataset {
    facts: BTreeMap<GroundAtom, TruthDegree>,
}

impl FuzzyDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, atom: GroundAtom, degree: TruthDegree) -> Result<(), ModelError> {
        if atom.has_nulls() {
            return Err(ModelError::NullInData(atom));
        }
        if degree.is_zero() {
            return Err(ModelError::ZeroDegree(atom));
        }
        if self.facts.contains_key(&atom) {
            return Err(ModelError::Duplicate(atom));
        }
        self.facts.insert(atom, degree);
        Ok(())
    }

    pub fn get(&self, atom: &GroundAtom) -> Option<TruthDegree> {
        self.facts.get(atom).copied()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroundAtom, TruthDegree)> {
        self.facts.iter().map(|(a, d)| (a, *d))
    }

    /// Union of two datasets; a shared atom is an error.
    pub fn merge(&mut self, other: FuzzyDataset) -> Result<(), ModelError> {
        for (atom, degree) in other.facts {
            self.insert(atom, degree)?;
        }
        Ok(())
    }

    pub fn all_ones(&self) -> bool {
        self.facts.values().all(|d| d.is_one())
    }

    pub fn constants(&self) -> BTreeSet<Symbol> {
        self.facts
            .keys()
            .flat_map(|a| a.args.iter())
            .filter_map(|v| match v {
                Value::Const(c) => Some(c.clone()),
                Value::Null(_) => None,
            })
            .collect()
    }

    /// Checks that every predicate shared with `program` has the same arity.
    pub fn check_signature(&self, program: &Program) -> Result<(), ModelError> {
        let mut seen: BTreeMap<&Symbol, usize> = BTreeMap::new();
        for atom in self.facts.keys() {
            let expected = program
                .arity(&atom.predicate)
                .unwrap_or(*seen.entry(&atom.predicate).or_insert(atom.args.len()));
            if expected != atom.args.len() {
                return Err(ModelError::ArityMismatch {
                    predicate: atom.predicate.clone(),
                    expected,
                    found: atom.args.len(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for FuzzyDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (atom, d) in &self.facts {
            writeln!(f, "{} :: {atom}.", d.value())?;
        }
        Ok(())
    }
}

impl FromIterator<(GroundAtom, TruthDegree)> for FuzzyDataset {
    /// Later duplicates and invalid entries are dropped.
    fn from_iter<I: IntoIterator<Item = (GroundAtom, TruthDegree)>>(iter: I) -> Self {
        let mut d = FuzzyDataset::new();
        for (a, deg) in iter {
            let _ = d.insert(a, deg);
        }
        d
    }
}

/// Same atoms, every degree raised to 1.
pub fn crispify(dataset: &FuzzyDataset) -> FuzzyDataset {
    FuzzyDataset {
        facts: dataset
            .facts
            .keys()
            .map(|a| (a.clone(), TruthDegree::ONE))
            .collect(),
    }
}

/// A total map from ground atoms to degrees, stored by its finite support.
///
/// Besides the degree table the interpretation keeps, per predicate, the list
/// of supported atoms in insertion order and an index from
/// `(predicate, position, value)` into that list. Both are what the join in
/// the chase walks.
#[derive(Clone, Debug, Default)]
pub struct FuzzyInterpretation {
    degrees: HashMap<GroundAtom, TruthDegree>,
    by_pred: HashMap<Symbol, Vec<GroundAtom>>,
    by_pos: HashMap<(Symbol, usize, Value), Vec<usize>>,
}

impl PartialEq for FuzzyInterpretation {
    fn eq(&self, other: &Self) -> bool {
        self.degrees == other.degrees
    }
}

impl FuzzyInterpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, atom: &GroundAtom) -> TruthDegree {
        self.degrees.get(atom).copied().unwrap_or(TruthDegree::ZERO)
    }

    /// Sets the degree of `atom` and returns the previous one. Setting 0
    /// removes the atom from the support.
    pub fn set(&mut self, atom: GroundAtom, degree: TruthDegree) -> TruthDegree {
        if degree.is_zero() {
            return self.remove(&atom);
        }
        match self.degrees.get_mut(&atom) {
            Some(slot) => std::mem::replace(slot, degree),
            None => {
                let list = self.by_pred.entry(atom.predicate.clone()).or_default();
                let idx = list.len();
                for (pos, v) in atom.args.iter().enumerate() {
                    self.by_pos
                        .entry((atom.predicate.clone(), pos, v.clone()))
                        .or_default()
                        .push(idx);
                }
                list.push(atom.clone());
                self.degrees.insert(atom, degree);
                TruthDegree::ZERO
            }
        }
    }

    fn remove(&mut self, atom: &GroundAtom) -> TruthDegree {
        let Some(old) = self.degrees.remove(atom) else {
            return TruthDegree::ZERO;
        };
        // Rare path: rebuild the indexes of this predicate.
        let pred = atom.predicate.clone();
        let list: Vec<GroundAtom> = self
            .by_pred
            .remove(&pred)
            .unwrap_or_default()
            .into_iter()
            .filter(|a| a != atom)
            .collect();
        self.by_pos.retain(|(p, _, _), _| *p != pred);
        for (idx, a) in list.iter().enumerate() {
            for (pos, v) in a.args.iter().enumerate() {
                self.by_pos
                    .entry((pred.clone(), pos, v.clone()))
                    .or_default()
                    .push(idx);
            }
        }
        if !list.is_empty() {
            self.by_pred.insert(pred, list);
        }
        old
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    /// Supported atoms of `predicate`, in insertion order.
    pub fn atoms_of(&self, predicate: &str) -> &[GroundAtom] {
        self.by_pred
            .get(predicate)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Supported atoms of `predicate` with `value` at argument `position`.
    pub fn atoms_with<'a>(
        &'a self,
        predicate: &Symbol,
        position: usize,
        value: &Value,
    ) -> impl Iterator<Item = &'a GroundAtom> + 'a {
        let list = self.atoms_of(predicate);
        self.by_pos
            .get(&(predicate.clone(), position, value.clone()))
            .into_iter()
            .flatten()
            .map(move |&i| &list[i])
    }

    /// Support entries sorted by atom.
    pub fn entries(&self) -> Vec<(&GroundAtom, TruthDegree)> {
        let mut v: Vec<_> = self.degrees.iter().map(|(a, d)| (a, *d)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn support(&self) -> BTreeSet<GroundAtom> {
        self.degrees.keys().cloned().collect()
    }

    /// Every constant or null that occurs in the support.
    pub fn active_domain(&self) -> BTreeSet<Value> {
        self.degrees
            .keys()
            .flat_map(|a| a.args.iter().cloned())
            .collect()
    }

    pub fn nulls(&self) -> BTreeSet<Value> {
        self.active_domain()
            .into_iter()
            .filter(Value::is_null)
            .collect()
    }

    /// `self(A) >= other(A)` for every ground atom `A`.
    pub fn dominates(&self, other: &FuzzyInterpretation) -> bool {
        other.degrees.iter().all(|(a, d)| self.get(a) >= *d)
    }

    /// The interpretation restricted to null-free atoms.
    pub fn constant_part(&self) -> BTreeMap<GroundAtom, TruthDegree> {
        self.degrees
            .iter()
            .filter(|(a, _)| !a.has_nulls())
            .map(|(a, d)| (a.clone(), *d))
            .collect()
    }

    /// `DEGREE :: Atom.` lines sorted by atom.
    pub fn dump(&self, format: DegreeFormat) -> String {
        let mut out = String::new();
        for (atom, d) in self.entries() {
            let _ = writeln!(out, "{} :: {atom}.", format.render(d));
        }
        out
    }
}

impl fmt::Display for FuzzyInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump(DegreeFormat::RoundTrip))
    }
}

/// `I_D`: the dataset's degrees, 0 elsewhere.
pub fn minimal_interpretation(dataset: &FuzzyDataset) -> FuzzyInterpretation {
    let mut interp = FuzzyInterpretation::new();
    for (atom, d) in dataset.iter() {
        interp.set(atom.clone(), d);
    }
    interp
}

/// A grounding of a rule's body variables, sorted by variable name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Grounding(Vec<(Symbol, Value)>);

impl Grounding {
    pub fn new(mut pairs: Vec<(Symbol, Value)>) -> Self {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        pairs.dedup_by(|a, b| a.0 == b.0);
        Grounding(pairs)
    }

    /// Builds a grounding over constants, e.g. `[("x", "img1")]`.
    pub fn of(pairs: &[(&str, &str)]) -> Self {
        Grounding::new(
            pairs
                .iter()
                .map(|(v, c)| (Symbol::from(*v), Value::constant(c)))
                .collect(),
        )
    }

    pub fn get(&self, var: &str) -> Option<&Value> {
        self.0
            .binary_search_by(|(v, _)| (**v).cmp(var))
            .ok()
            .map(|i| &self.0[i].1)
    }

    pub fn pairs(&self) -> &[(Symbol, Value)] {
        &self.0
    }

    pub fn values(&self) -> impl Iterator<Item = &Value> {
        self.0.iter().map(|(_, v)| v)
    }
}

impl fmt::Display for Grounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, val)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}={val}")?;
        }
        f.write_str("}")
    }
}

pub(crate) fn ground_term(term: &Term, grounding: &Grounding) -> Option<Value> {
    match term {
        Term::Const(c) => Some(Value::Const(c.clone())),
        Term::Var(v) => grounding.get(v).cloned(),
    }
}

/// Degree of `rule`'s body under `grounding`: the rule's t-norm folded left
/// to right over the body literals, unary operators applied per literal.
///
/// Returns `None` when the grounding leaves a body variable unbound.
pub fn body_degree(
    interp: &FuzzyInterpretation,
    rule: &Rule,
    grounding: &Grounding,
) -> Option<TruthDegree> {
    let mut degrees = Vec::with_capacity(rule.body.len());
    for lit in &rule.body {
        let args = lit
            .atom
            .args
            .iter()
            .map(|t| ground_term(t, grounding))
            .collect::<Option<Vec<_>>>()?;
        let d = interp.get(&GroundAtom::new(lit.atom.predicate.clone(), args));
        degrees.push(match &lit.op {
            Some(op) => op.apply(d),
            None => d,
        });
    }
    Some(fold_body(&rule.connective, &degrees))
}

fn fold_body(connective: &TNorm, degrees: &[TruthDegree]) -> TruthDegree {
    connective.fold(degrees)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_dataset, parse_program};
    use proptest::prelude::*;

    fn d(v: f64) -> TruthDegree {
        TruthDegree::new(v).unwrap()
    }

    #[test]
    fn minimal_interpretation_is_the_dataset() {
        let ds = parse_dataset("0.9 :: NeuralLabel(img2, tench).\nP(a).").unwrap();
        let i = minimal_interpretation(&ds);
        assert_eq!(
            i.get(&GroundAtom::of("NeuralLabel", &["img2", "tench"])),
            d(0.9)
        );
        assert_eq!(i.get(&GroundAtom::of("P", &["b"])), TruthDegree::ZERO);
        assert!(minimal_interpretation(&FuzzyDataset::new()).is_empty());
    }

    #[test]
    fn null_interning() {
        let mut pool = NullPool::new();
        let a = || vec![(Symbol::from("y"), Value::constant("a"))];
        let n1 = allocate_null(&mut pool, NullKey::new(0, "x", a()));
        let n2 = allocate_null(&mut pool, NullKey::new(0, "x", a()));
        match (&n1, &n2) {
            (Value::Null(p), Value::Null(q)) => assert!(Arc::ptr_eq(p, q)),
            _ => unreachable!(),
        }
        let other_binding = allocate_null(
            &mut pool,
            NullKey::new(0, "x", vec![(Symbol::from("y"), Value::constant("b"))]),
        );
        let other_var = allocate_null(&mut pool, NullKey::new(0, "z", a()));
        assert_ne!(n1, other_binding);
        assert_ne!(n1, other_var);
        assert_eq!(pool.len(), 3);
        let shown = n1.to_string();
        assert!(shown.starts_with("_:r0.x."), "{shown}");
        assert_eq!(shown.len(), "_:r0.x.".len() + 16);
    }

    #[test]
    fn crispify_raises_degrees() {
        let ds = parse_dataset("0.3 :: A(c).\nB(c).").unwrap();
        let crisp = crispify(&ds);
        assert_eq!(crisp.len(), 2);
        assert!(crisp.all_ones());
        assert!(crispify(&FuzzyDataset::new()).is_empty());
    }

    #[test]
    fn dataset_invariants() {
        let mut ds = FuzzyDataset::new();
        let a = GroundAtom::of("P", &["a"]);
        assert!(ds.insert(a.clone(), TruthDegree::ZERO).is_err());
        ds.insert(a.clone(), d(0.5)).unwrap();
        assert!(matches!(
            ds.insert(a, d(0.5)),
            Err(ModelError::Duplicate(_))
        ));
        let mut pool = NullPool::new();
        let null = pool.allocate(NullKey::new(0, "z", vec![]));
        assert!(ds.insert(GroundAtom::new("P", vec![null]), d(1.0)).is_err());
    }

    #[test]
    fn body_degree_examples() {
        let p = parse_program(
            "NeuralLabel(x,y) &luk NeuralLabel(u,w) -> exists z . CommonClass(x,u,z).\n\
             Class(x,y) &luk Hypernym(y,z) -> Class(x,z).",
        )
        .unwrap();
        let ds = parse_dataset(
            "0.8 :: NeuralLabel(img1,tiger_shark).\n0.9 :: NeuralLabel(img2,tench).\n\
             0.8 :: Class(img1,tiger_shark).\nHypernym(tiger_shark,fish).",
        )
        .unwrap();
        let i = minimal_interpretation(&ds);
        let g = Grounding::of(&[
            ("x", "img1"),
            ("y", "tiger_shark"),
            ("u", "img2"),
            ("w", "tench"),
        ]);
        let b = body_degree(&i, &p.rules()[0], &g).unwrap();
        assert!((b.value() - 0.7).abs() <= 1e-12);
        let g2 = Grounding::of(&[("x", "img1"), ("y", "tiger_shark"), ("z", "fish")]);
        assert_eq!(body_degree(&i, &p.rules()[1], &g2), Some(d(0.8)));
        let g3 = Grounding::of(&[("x", "img9"), ("y", "tiger_shark"), ("z", "fish")]);
        assert_eq!(body_degree(&i, &p.rules()[1], &g3), Some(TruthDegree::ZERO));
        assert_eq!(
            body_degree(&i, &p.rules()[1], &Grounding::of(&[("x", "a")])),
            None
        );
    }

    #[test]
    fn indexes_follow_updates() {
        let mut i = FuzzyInterpretation::new();
        i.set(GroundAtom::of("R", &["a", "b"]), d(0.5));
        i.set(GroundAtom::of("R", &["a", "c"]), d(0.6));
        i.set(GroundAtom::of("R", &["a", "b"]), d(0.7));
        assert_eq!(i.atoms_of("R").len(), 2);
        let pred: Symbol = "R".into();
        assert_eq!(i.atoms_with(&pred, 0, &Value::constant("a")).count(), 2);
        i.set(GroundAtom::of("R", &["a", "b"]), TruthDegree::ZERO);
        assert_eq!(i.len(), 1);
        let hits: Vec<_> = i.atoms_with(&pred, 1, &Value::constant("c")).collect();
        assert_eq!(hits, vec![&GroundAtom::of("R", &["a", "c"])]);
        assert_eq!(i.atoms_with(&pred, 1, &Value::constant("b")).count(), 0);
    }

    #[test]
    fn dump_is_sorted() {
        let ds = parse_dataset("0.5 :: B(a).\n0.25 :: A(b).\nA(a).").unwrap();
        let i = minimal_interpretation(&ds);
        assert_eq!(
            i.dump(DegreeFormat::Fixed),
            "1.000000 :: A(a).\n0.250000 :: A(b).\n0.500000 :: B(a).\n"
        );
    }

    fn grid() -> impl Strategy<Value = f64> {
        (0u32..=10).prop_map(|k| k as f64 / 10.0)
    }

    proptest! {
        #[test]
        fn body_degree_is_monotone_and_bounded(
            lo in proptest::collection::vec(grid(), 3),
            bump in proptest::collection::vec(grid(), 3),
            conn in 0usize..4,
        ) {
            let names = ["min", "luk", "prod", "ss(-1)"];
            let text = format!("A(x) &{0} B(x) &{0} C(x) -> H(x).", names[conn]);
            let p = parse_program(&text).unwrap();
            let rule = &p.rules()[0];
            let mut small = FuzzyInterpretation::new();
            let mut big = FuzzyInterpretation::new();
            for (k, pred) in ["A", "B", "C"].iter().enumerate() {
                let atom = GroundAtom::of(pred, &["a"]);
                small.set(atom.clone(), d(lo[k]));
                big.set(atom, d((lo[k] + bump[k]).min(1.0)));
            }
            let g = Grounding::of(&[("x", "a")]);
            let bs = body_degree(&small, rule, &g).unwrap();
            let bb = body_degree(&big, rule, &g).unwrap();
            prop_assert!(bs.value() <= bb.value() + 1e-12);
            let min_plain = lo.iter().cloned().fold(1.0, f64::min);
            prop_assert!(bs.value() <= min_plain + 1e-12);
            for (_, deg) in small.entries() {
                prop_assert!(!deg.is_zero());
            }
        }
    }
}
