//! Rules compiled to slot form and the backtracking join over the
//! interpretation's predicate index.

use std::collections::BTreeMap;

use crate::degrees::{TNorm, TruthDegree, UnaryOp};
use crate::lang::{Rule, Symbol, Term};
use crate::model::{FuzzyInterpretation, GroundAtom, Grounding, NullKey, NullPool, Value};

#[derive(Clone, Debug)]
pub(crate) enum Slot {
    Var(usize),
    Const(Value),
}

#[derive(Clone, Debug)]
pub(crate) enum HeadSlot {
    Var(usize),
    Const(Value),
    Exist(Symbol),
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledLiteral {
    pub predicate: Symbol,
    pub slots: Vec<Slot>,
    pub op: Option<UnaryOp>,
}

/// A rule with variables replaced by indices into its sorted body variables.
#[derive(Clone, Debug)]
pub(crate) struct CompiledRule {
    pub id: usize,
    pub source: Rule,
    pub vars: Vec<Symbol>,
    pub body: Vec<CompiledLiteral>,
    pub connective: TNorm,
    pub head_predicate: Symbol,
    pub head: Vec<HeadSlot>,
    /// Frontier variables with their indices, sorted by name.
    pub frontier: Vec<(Symbol, usize)>,
}

impl CompiledRule {
    pub fn new(rule: &Rule) -> Self {
        let vars = rule.body_vars();
        let index = |v: &Symbol| vars.binary_search(v).expect("body variable");
        let body = rule
            .body
            .iter()
            .map(|lit| CompiledLiteral {
                predicate: lit.atom.predicate.clone(),
                slots: lit
                    .atom
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => Slot::Var(index(v)),
                        Term::Const(c) => Slot::Const(Value::Const(c.clone())),
                    })
                    .collect(),
                op: lit.op.clone(),
            })
            .collect();
        let head = rule
            .head
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) if rule.existentials.contains(v) => HeadSlot::Exist(v.clone()),
                Term::Var(v) => HeadSlot::Var(index(v)),
                Term::Const(c) => HeadSlot::Const(Value::Const(c.clone())),
            })
            .collect();
        let frontier = rule
            .frontier()
            .into_iter()
            .map(|v| {
                let i = index(&v);
                (v, i)
            })
            .collect();
        CompiledRule {
            id: rule.id,
            source: rule.clone(),
            vars,
            body,
            connective: rule.connective.clone(),
            head_predicate: rule.head.predicate.clone(),
            head,
            frontier,
        }
    }

    pub fn grounding(&self, values: &[Value]) -> Grounding {
        Grounding::new(
            self.vars
                .iter()
                .cloned()
                .zip(values.iter().cloned())
                .collect(),
        )
    }

    /// Values in variable order, or `None` unless `g` binds exactly the body
    /// variables.
    pub fn values_of(&self, g: &Grounding) -> Option<Vec<Value>> {
        if g.pairs().len() != self.vars.len() {
            return None;
        }
        self.vars.iter().map(|v| g.get(v).cloned()).collect()
    }

    fn literal_atom(&self, lit: &CompiledLiteral, values: &[Value]) -> GroundAtom {
        GroundAtom::new(
            lit.predicate.clone(),
            lit.slots
                .iter()
                .map(|s| match s {
                    Slot::Var(i) => values[*i].clone(),
                    Slot::Const(c) => c.clone(),
                })
                .collect(),
        )
    }

    pub fn body_degree(&self, interp: &FuzzyInterpretation, values: &[Value]) -> TruthDegree {
        let degrees: Vec<TruthDegree> = self
            .body
            .iter()
            .map(|lit| {
                let d = interp.get(&self.literal_atom(lit, values));
                match &lit.op {
                    Some(op) => op.apply(d),
                    None => d,
                }
            })
            .collect();
        self.connective.fold(&degrees)
    }

    pub fn null_key(&self, var: &Symbol, values: &[Value]) -> NullKey {
        NullKey::new(
            self.id,
            var,
            self.frontier
                .iter()
                .map(|(v, i)| (v.clone(), values[*i].clone()))
                .collect(),
        )
    }

    /// The trigger head; nulls come from `pool` when given.
    pub fn head_atom(&self, values: &[Value], mut pool: Option<&mut NullPool>) -> GroundAtom {
        let args = self
            .head
            .iter()
            .map(|s| match s {
                HeadSlot::Var(i) => values[*i].clone(),
                HeadSlot::Const(c) => c.clone(),
                HeadSlot::Exist(z) => {
                    let key = self.null_key(z, values);
                    match pool.as_deref_mut() {
                        Some(p) => p.allocate(key),
                        None => Value::Null(key.into()),
                    }
                }
            })
            .collect();
        GroundAtom::new(self.head_predicate.clone(), args)
    }

    /// Head pattern with existential positions open.
    pub fn head_pattern(&self, values: &[Value]) -> Vec<Pattern> {
        let mut wild: BTreeMap<&Symbol, usize> = BTreeMap::new();
        self.head
            .iter()
            .map(|s| match s {
                HeadSlot::Var(i) => Pattern::Fixed(values[*i].clone()),
                HeadSlot::Const(c) => Pattern::Fixed(c.clone()),
                HeadSlot::Exist(z) => {
                    let n = wild.len();
                    Pattern::Wild(*wild.entry(z).or_insert(n))
                }
            })
            .collect()
    }

    pub fn has_existentials(&self) -> bool {
        self.head.iter().any(|s| matches!(s, HeadSlot::Exist(_)))
    }

    /// Calls `emit` with every grounding whose plain body atoms are all in
    /// the support of `interp`. With `seed = Some((i, atom))` only groundings
    /// that map literal `i` to `atom` are produced.
    pub fn join(
        &self,
        interp: &FuzzyInterpretation,
        seed: Option<(usize, &GroundAtom)>,
        emit: &mut dyn FnMut(Vec<Value>),
    ) {
        let mut binding: Vec<Option<Value>> = vec![None; self.vars.len()];
        let mut remaining: Vec<usize> = (0..self.body.len())
            .filter(|&i| self.body[i].op.is_none())
            .collect();
        if let Some((i, atom)) = seed {
            let mut trail = Vec::new();
            if !self.unify(&self.body[i], atom, &mut binding, &mut trail) {
                return;
            }
            remaining.retain(|&j| j != i);
        }
        self.join_rec(interp, &mut remaining, &mut binding, emit);
    }

    fn join_rec(
        &self,
        interp: &FuzzyInterpretation,
        remaining: &mut Vec<usize>,
        binding: &mut Vec<Option<Value>>,
        emit: &mut dyn FnMut(Vec<Value>),
    ) {
        if remaining.is_empty() {
            if let Some(values) = binding.iter().cloned().collect::<Option<Vec<_>>>() {
                emit(values);
            }
            return;
        }
        // Prefer the literal with the most bound arguments.
        let pick = (0..remaining.len())
            .max_by_key(|&k| {
                let lit = &self.body[remaining[k]];
                let bound = lit
                    .slots
                    .iter()
                    .filter(|s| self.bound(s, binding).is_some())
                    .count();
                (bound, std::cmp::Reverse(k))
            })
            .expect("nonempty");
        let li = remaining.swap_remove(pick);
        let lit = &self.body[li];
        let key = lit
            .slots
            .iter()
            .enumerate()
            .find_map(|(pos, s)| self.bound(s, binding).map(|v| (pos, v)));
        let candidates: Vec<&GroundAtom> = match key {
            Some((pos, v)) => interp.atoms_with(&lit.predicate, pos, &v).collect(),
            None => interp.atoms_of(&lit.predicate).iter().collect(),
        };
        for atom in candidates {
            let mut trail = Vec::new();
            if self.unify(lit, atom, binding, &mut trail) {
                self.join_rec(interp, remaining, binding, emit);
            }
            for i in trail {
                binding[i] = None;
            }
        }
        remaining.push(li);
        let last = remaining.len() - 1;
        remaining.swap(pick, last);
    }

    fn bound(&self, slot: &Slot, binding: &[Option<Value>]) -> Option<Value> {
        match slot {
            Slot::Var(i) => binding[*i].clone(),
            Slot::Const(c) => Some(c.clone()),
        }
    }

    /// Extends `binding` so that `lit` maps to `atom`; newly bound indices go
    /// to `trail` (also on failure, so callers always unwind it).
    fn unify(
        &self,
        lit: &CompiledLiteral,
        atom: &GroundAtom,
        binding: &mut [Option<Value>],
        trail: &mut Vec<usize>,
    ) -> bool {
        if atom.predicate != lit.predicate || atom.args.len() != lit.slots.len() {
            return false;
        }
        for (slot, v) in lit.slots.iter().zip(atom.args.iter()) {
            match slot {
                Slot::Const(c) if c != v => return false,
                Slot::Const(_) => {}
                Slot::Var(i) => match &binding[*i] {
                    Some(b) if b != v => return false,
                    Some(_) => {}
                    None => {
                        binding[*i] = Some(v.clone());
                        trail.push(*i);
                    }
                },
            }
        }
        true
    }

    /// Literal indices of plain body atoms over `predicate`.
    pub fn plain_literals_over<'a>(
        &'a self,
        predicate: &'a str,
    ) -> impl Iterator<Item = usize> + 'a {
        self.body
            .iter()
            .enumerate()
            .filter(move |(_, l)| l.op.is_none() && &*l.predicate == predicate)
            .map(|(i, _)| i)
    }
}

/// One argument of a search pattern: a fixed value or a numbered wildcard.
/// Equal wildcard numbers must take equal values.
#[derive(Clone, Debug)]
pub(crate) enum Pattern {
    Fixed(Value),
    Wild(usize),
}

/// Largest degree among support atoms of `predicate` matching `pattern`
/// (0 if none).
pub(crate) fn best_match(
    interp: &FuzzyInterpretation,
    predicate: &Symbol,
    pattern: &[Pattern],
) -> TruthDegree {
    let key = pattern.iter().enumerate().find_map(|(pos, p)| match p {
        Pattern::Fixed(v) => Some((pos, v)),
        Pattern::Wild(_) => None,
    });
    let matches = |atom: &GroundAtom| -> bool {
        if atom.args.len() != pattern.len() {
            return false;
        }
        let mut assigned: BTreeMap<usize, &Value> = BTreeMap::new();
        pattern.iter().zip(atom.args.iter()).all(|(p, v)| match p {
            Pattern::Fixed(f) => f == v,
            Pattern::Wild(k) => *assigned.entry(*k).or_insert(v) == v,
        })
    };
    let mut best = TruthDegree::ZERO;
    let mut consider = |atom: &GroundAtom| {
        if matches(atom) {
            best = best.max(interp.get(atom));
        }
    };
    match key {
        Some((pos, v)) => interp.atoms_with(predicate, pos, v).for_each(&mut consider),
        None => interp.atoms_of(predicate).iter().for_each(&mut consider),
    }
    best
}
