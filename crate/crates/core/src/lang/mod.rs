//! Syntax of fuzzy programs: terms, atoms, rules, programs, plus the
//! text parser, the printer and the static analyses.

mod analysis;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::degrees::{TNorm, UnaryOp};

pub use analysis::{
    check_weak_acyclicity, compute_stratification, position_edges, predicate_edges, Condensation,
    EdgeKind, Position, PositionEdge, PredicateEdge, Stratification, StratifyError, WeakAcyclicity,
};
pub use parser::{
    parse_dataset, parse_dataset_with, parse_ground_atom, parse_program, parse_program_with,
    Diagnostic, ParseError,
};

pub type Symbol = Arc<str>;

/// A term inside a rule. Nulls never occur in rules; they live in
/// [`crate::model::Value`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Symbol),
    Const(Symbol),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(name.into())
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Symbol> {
        self.args.iter().filter_map(Term::as_var)
    }
}

/// A body atom, optionally under a unary operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Literal {
    pub op: Option<UnaryOp>,
    pub atom: Atom,
}

impl Literal {
    pub fn plain(atom: Atom) -> Self {
        Literal { op: None, atom }
    }

    pub fn with_op(op: UnaryOp, atom: Atom) -> Self {
        Literal { op: Some(op), atom }
    }
}

/// `L1 ⊗ ... ⊗ Ln -> exists z. H`
///
/// `id` is the rule's index in its [`Program`]; nulls created by the rule are
/// keyed by it.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub id: usize,
    pub body: Vec<Literal>,
    pub connective: TNorm,
    pub head: Atom,
    pub existentials: Vec<Symbol>,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ValidationError {
    #[error("rule body is empty")]
    EmptyBody,
    #[error("predicate {predicate} used with arity {found}, expected {expected}")]
    ArityMismatch {
        predicate: Symbol,
        expected: usize,
        found: usize,
    },
    #[error("existential variable {0} also occurs in the body")]
    ExistentialInBody(Symbol),
    #[error("existential variable {0} does not occur in the head")]
    UnusedExistential(Symbol),
    #[error("existential variable {0} is declared twice")]
    DuplicateExistential(Symbol),
    #[error("head variable {0} does not occur in the body")]
    FrontierNotInBody(Symbol),
    #[error("variable {0} occurs only under unary operators")]
    UnsafeUnaryVariable(Symbol),
    #[error("unary operators cannot be combined with existential variables")]
    UnaryWithExistentials,
}

impl Rule {
    pub fn new(
        body: Vec<Literal>,
        connective: TNorm,
        head: Atom,
        existentials: Vec<Symbol>,
    ) -> Self {
        Rule {
            id: 0,
            body,
            connective,
            head,
            existentials,
        }
    }

    /// Distinct body variables, sorted by name. Groundings bind exactly these.
    pub fn body_vars(&self) -> Vec<Symbol> {
        let set: BTreeSet<&Symbol> = self.body.iter().flat_map(|l| l.atom.vars()).collect();
        set.into_iter().cloned().collect()
    }

    /// Head variables that are not existential, sorted by name.
    pub fn frontier(&self) -> Vec<Symbol> {
        let set: BTreeSet<&Symbol> = self
            .head
            .vars()
            .filter(|v| !self.existentials.contains(v))
            .collect();
        set.into_iter().cloned().collect()
    }

    pub fn uses_unary_ops(&self) -> bool {
        self.body.iter().any(|l| l.op.is_some())
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.body.is_empty() {
            return Err(ValidationError::EmptyBody);
        }
        let body_vars: BTreeSet<&Symbol> = self.body.iter().flat_map(|l| l.atom.vars()).collect();
        let plain_vars: BTreeSet<&Symbol> = self
            .body
            .iter()
            .filter(|l| l.op.is_none())
            .flat_map(|l| l.atom.vars())
            .collect();
        let mut seen = BTreeSet::new();
        for z in &self.existentials {
            if !seen.insert(z) {
                return Err(ValidationError::DuplicateExistential(z.clone()));
            }
            if body_vars.contains(z) {
                return Err(ValidationError::ExistentialInBody(z.clone()));
            }
            if !self.head.vars().any(|v| v == z) {
                return Err(ValidationError::UnusedExistential(z.clone()));
            }
        }
        for v in self.head.vars() {
            if !self.existentials.contains(v) && !body_vars.contains(v) {
                return Err(ValidationError::FrontierNotInBody(v.clone()));
            }
        }
        for v in &body_vars {
            if !plain_vars.contains(v) {
                return Err(ValidationError::UnsafeUnaryVariable((*v).clone()));
            }
        }
        if self.uses_unary_ops() && !self.existentials.is_empty() {
            return Err(ValidationError::UnaryWithExistentials);
        }
        Ok(())
    }
}

/// Which language fragment a program falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fragment {
    /// No existential variables, no unary operators.
    TDatalog,
    /// Existential variables present.
    TDatalogExists,
    /// Unary operators present (and therefore no existentials).
    TDatalogU,
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fragment::TDatalog => "t-Datalog",
            Fragment::TDatalogExists => "t-Datalog∃",
            Fragment::TDatalogU => "t-Datalog^U",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("rule {rule}: {error}")]
pub struct InvalidProgram {
    pub rule: usize,
    pub error: ValidationError,
}

/// A validated program. Rule ids are the rule positions.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    rules: Vec<Rule>,
    arities: BTreeMap<Symbol, usize>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Result<Self, InvalidProgram> {
        let mut arities: BTreeMap<Symbol, usize> = BTreeMap::new();
        let mut rules = rules;
        let mut uses_ex = false;
        let mut uses_un = false;
        for (i, rule) in rules.iter_mut().enumerate() {
            rule.id = i;
            rule.validate()
                .map_err(|error| InvalidProgram { rule: i, error })?;
            let atoms = rule
                .body
                .iter()
                .map(|l| &l.atom)
                .chain(std::iter::once(&rule.head));
            for atom in atoms {
                let expected = *arities
                    .entry(atom.predicate.clone())
                    .or_insert(atom.args.len());
                if expected != atom.args.len() {
                    return Err(InvalidProgram {
                        rule: i,
                        error: ValidationError::ArityMismatch {
                            predicate: atom.predicate.clone(),
                            expected,
                            found: atom.args.len(),
                        },
                    });
                }
            }
            uses_ex |= !rule.existentials.is_empty();
            uses_un |= rule.uses_unary_ops();
            if uses_ex && uses_un {
                return Err(InvalidProgram {
                    rule: i,
                    error: ValidationError::UnaryWithExistentials,
                });
            }
        }
        Ok(Program { rules, arities })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: usize) -> Option<&Rule> {
        self.rules.get(id)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn arity(&self, predicate: &str) -> Option<usize> {
        self.arities.get(predicate).copied()
    }

    pub fn arities(&self) -> &BTreeMap<Symbol, usize> {
        &self.arities
    }

    pub fn uses_existentials(&self) -> bool {
        self.rules.iter().any(|r| !r.existentials.is_empty())
    }

    pub fn uses_unary_ops(&self) -> bool {
        self.rules.iter().any(Rule::uses_unary_ops)
    }

    pub fn fragment(&self) -> Fragment {
        if self.uses_existentials() {
            Fragment::TDatalogExists
        } else if self.uses_unary_ops() {
            Fragment::TDatalogU
        } else {
            Fragment::TDatalog
        }
    }

    /// Predicates occurring in some rule head.
    pub fn intensional(&self) -> BTreeSet<Symbol> {
        self.rules
            .iter()
            .map(|r| r.head.predicate.clone())
            .collect()
    }

    /// Predicates occurring only in rule bodies.
    pub fn extensional(&self) -> BTreeSet<Symbol> {
        let idb = self.intensional();
        self.arities
            .keys()
            .filter(|p| !idb.contains(*p))
            .cloned()
            .collect()
    }

    /// Unary operators only in front of extensional predicates.
    pub fn is_semipositive(&self) -> bool {
        let idb = self.intensional();
        self.rules.iter().all(|r| {
            r.body
                .iter()
                .all(|l| l.op.is_none() || !idb.contains(&l.atom.predicate))
        })
    }

    /// Constants mentioned anywhere in the rules.
    pub fn constants(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            for atom in r
                .body
                .iter()
                .map(|l| &l.atom)
                .chain(std::iter::once(&r.head))
            {
                for t in &atom.args {
                    if let Term::Const(c) = t {
                        out.insert(c.clone());
                    }
                }
            }
        }
        out
    }

    /// A copy of this program with `rule` appended (it receives id `len()`).
    pub fn with_rule(&self, rule: Rule) -> Result<Program, InvalidProgram> {
        let mut rules = self.rules.clone();
        rules.push(rule);
        Program::new(rules)
    }
}

pub(crate) fn is_plain_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "exists"
}

pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        if c == '"' || c == '\\' {
            f.write_char('\\')?;
        }
        f.write_char(c)?;
    }
    f.write_char('"')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            // Inside rules bare identifiers are variables, so constants are quoted.
            Term::Const(c) => write_quoted(f, c),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        f.write_str("(")?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.op {
            Some(UnaryOp::Neg) => write!(f, "!{}", self.atom),
            Some(UnaryOp::NNeg) => write!(f, "~{}", self.atom),
            Some(op) => write!(f, "{op} {}", self.atom),
            None => write!(f, "{}", self.atom),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, lit) in self.body.iter().enumerate() {
            if i > 0 {
                write!(f, " {} ", self.connective)?;
            }
            write!(f, "{lit}")?;
        }
        f.write_str(" -> ")?;
        if !self.existentials.is_empty() {
            f.write_str("exists ")?;
            for (i, z) in self.existentials.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                f.write_str(z)?;
            }
            f.write_str(" . ")?;
        }
        write!(f, "{}.", self.head)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}
