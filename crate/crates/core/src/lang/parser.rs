//! Hand-written lexer and recursive-descent parser for `.tdl` programs and
//! `.tdf` datasets.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::{Atom, Literal, Program, Rule, Symbol, Term, ValidationError};
use crate::degrees::{ConnectiveRegistry, TNorm, TruthDegree, UnaryOp};
use crate::model::{FuzzyDataset, GroundAtom, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl ParseError {
    fn single(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            diagnostics: vec![Diagnostic {
                line,
                col,
                message: message.into(),
            }],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Number(f64, String),
    Null(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Arrow,
    Amp,
    Bang,
    Tilde,
    ColonColon,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Number(_, raw) => write!(f, "number `{raw}`"),
            Tok::Null(s) => write!(f, "null `{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::ColonColon => f.write_str("`::`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let peek = chars.get(i + 1).copied();
        let tok = match c {
            _ if c.is_whitespace() => {
                bump!();
                continue;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    bump!();
                }
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '&' => Tok::Amp,
            '!' => Tok::Bang,
            '~' => Tok::Tilde,
            '-' if peek == Some('>') => {
                bump!();
                Tok::Arrow
            }
            ':' if peek == Some(':') => {
                bump!();
                Tok::ColonColon
            }
            '_' if peek == Some(':') => {
                let start = i;
                bump!();
                while i + 1 < chars.len()
                    && (chars[i + 1].is_ascii_alphanumeric() || matches!(chars[i + 1], '_' | '.' | ':'))
                    // a trailing `.` terminates the statement
                    && !(chars[i + 1] == '.'
                        && !chars.get(i + 2).is_some_and(|c| c.is_ascii_alphanumeric()))
                {
                    bump!();
                }
                Tok::Null(chars[start..=i].iter().collect())
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(ParseError::single(l0, c0, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => {
                            bump!();
                            match chars.get(i) {
                                Some(&e) => s.push(e),
                                None => {
                                    return Err(ParseError::single(l0, c0, "unterminated string"))
                                }
                            }
                            bump!();
                        }
                        Some(&ch) => {
                            s.push(ch);
                            bump!();
                        }
                    }
                }
                Tok::Str(s)
            }
            _ if c.is_ascii_digit() || (c == '-' && peek.is_some_and(|p| p.is_ascii_digit())) => {
                let start = i;
                let mut end = i + 1;
                while end < chars.len() && chars[end].is_ascii_digit() {
                    end += 1;
                }
                if end + 1 < chars.len() && chars[end] == '.' && chars[end + 1].is_ascii_digit() {
                    end += 1;
                    while end < chars.len() && chars[end].is_ascii_digit() {
                        end += 1;
                    }
                }
                if end < chars.len() && matches!(chars[end], 'e' | 'E') {
                    let mut e = end + 1;
                    if e < chars.len() && matches!(chars[e], '+' | '-') {
                        e += 1;
                    }
                    if e < chars.len() && chars[e].is_ascii_digit() {
                        while e < chars.len() && chars[e].is_ascii_digit() {
                            e += 1;
                        }
                        end = e;
                    }
                }
                while i + 1 < end {
                    bump!();
                }
                let raw: String = chars[start..end].iter().collect();
                let value = raw
                    .parse::<f64>()
                    .map_err(|_| ParseError::single(l0, c0, format!("bad number `{raw}`")))?;
                Tok::Number(value, raw)
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i + 1 < chars.len()
                    && (chars[i + 1].is_ascii_alphanumeric() || chars[i + 1] == '_')
                {
                    bump!();
                }
                Tok::Ident(chars[start..=i].iter().collect())
            }
            other => {
                return Err(ParseError::single(
                    l0,
                    c0,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        bump!();
        out.push(Spanned {
            tok,
            line: l0,
            col: c0,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// Whether bare identifiers in argument position are variables or constants.
#[derive(Clone, Copy, PartialEq)]
enum ArgMode {
    Rule,
    Ground,
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    registry: &'a ConnectiveRegistry,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let idx = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (l, c) = self.here();
        Err(ParseError::single(l, c, message))
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            self.error(format!("expected {want}, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => self.error(format!("expected identifier, found {other}")),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        match self.peek().clone() {
            Tok::Number(v, _) => {
                self.next();
                Ok(v)
            }
            other => self.error(format!("expected number, found {other}")),
        }
    }

    fn atom(&mut self, mode: ArgMode) -> PResult<Atom> {
        let predicate = self.ident()?;
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            if *self.peek() != Tok::RParen {
                loop {
                    args.push(self.term(mode)?);
                    if *self.peek() == Tok::Comma {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(Atom::new(&predicate, args))
    }

    fn term(&mut self, mode: ArgMode) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(match mode {
                    ArgMode::Rule => Term::Var(s.into()),
                    ArgMode::Ground => Term::Const(s.into()),
                })
            }
            Tok::Str(s) => {
                self.next();
                Ok(Term::Const(s.into()))
            }
            Tok::Number(_, raw) => {
                self.next();
                Ok(Term::Const(raw.into()))
            }
            Tok::Null(n) => self.error(format!("null `{n}` is not allowed here")),
            other => self.error(format!("expected a term, found {other}")),
        }
    }

    fn connective(&mut self) -> PResult<TNorm> {
        self.expect(Tok::Amp)?;
        let (l, c) = self.here();
        let name = self.ident()?;
        let param = if *self.peek() == Tok::LParen {
            self.next();
            let p = self.number()?;
            self.expect(Tok::RParen)?;
            Some(p)
        } else {
            None
        };
        self.registry
            .tnorm(&name, param)
            .map_err(|e| ParseError::single(l, c, e.to_string()))
    }

    fn literal(&mut self) -> PResult<Literal> {
        let (l, c) = self.here();
        let op = match (self.peek().clone(), self.peek_at(1).clone()) {
            (Tok::Bang, _) => {
                self.next();
                Some(UnaryOp::Neg)
            }
            (Tok::Tilde, _) => {
                self.next();
                Some(UnaryOp::NNeg)
            }
            (Tok::Ident(name), Tok::LBracket) => {
                self.next();
                self.next();
                let param = if *self.peek() == Tok::RBracket {
                    None
                } else {
                    Some(self.number()?)
                };
                self.expect(Tok::RBracket)?;
                Some(
                    self.registry
                        .unary(&name, param)
                        .map_err(|e| ParseError::single(l, c, e.to_string()))?,
                )
            }
            _ => None,
        };
        let atom = self.atom(ArgMode::Rule)?;
        Ok(Literal { op, atom })
    }

    fn rule(&mut self) -> PResult<Result<Rule, Diagnostic>> {
        let (l, c) = self.here();
        let mut body = vec![self.literal()?];
        let mut connective: Option<TNorm> = None;
        while *self.peek() == Tok::Amp {
            let (cl, cc) = self.here();
            let next = self.connective()?;
            match &connective {
                Some(prev) if *prev != next => {
                    return Err(ParseError::single(
                        cl,
                        cc,
                        format!("mixed connectives {prev} and {next} in one rule"),
                    ))
                }
                _ => connective = Some(next),
            }
            body.push(self.literal()?);
        }
        self.expect(Tok::Arrow)?;
        let mut existentials = Vec::new();
        if matches!(self.peek(), Tok::Ident(s) if s == "exists")
            && matches!(self.peek_at(1), Tok::Ident(_))
        {
            self.next();
            loop {
                existentials.push(Symbol::from(self.ident()?));
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
            self.expect(Tok::Dot)?;
        }
        let head = self.atom(ArgMode::Rule)?;
        self.expect(Tok::Dot)?;
        let rule = Rule::new(body, connective.unwrap_or(TNorm::Min), head, existentials);
        // Validation problems are reported without discarding the parse position.
        Ok(rule.validate().map(|_| rule).map_err(|e| Diagnostic {
            line: l,
            col: c,
            message: e.to_string(),
        }))
    }
}

fn check_arity(
    arities: &mut BTreeMap<Symbol, usize>,
    atom_pred: &Symbol,
    n: usize,
    line: usize,
    col: usize,
) -> Option<Diagnostic> {
    let expected = *arities.entry(atom_pred.clone()).or_insert(n);
    (expected != n).then(|| Diagnostic {
        line,
        col,
        message: ValidationError::ArityMismatch {
            predicate: atom_pred.clone(),
            expected,
            found: n,
        }
        .to_string(),
    })
}

/// Parses a program using the built-in connectives.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_program_with(text, &ConnectiveRegistry::default())
}

pub fn parse_program_with(
    text: &str,
    registry: &ConnectiveRegistry,
) -> Result<Program, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        registry,
    };
    let mut rules = Vec::new();
    let mut diagnostics = Vec::new();
    let mut arities = BTreeMap::new();
    let mut first_ex: Option<(usize, usize)> = None;
    let mut first_un: Option<(usize, usize)> = None;
    while *p.peek() != Tok::Eof {
        let (l, c) = p.here();
        match p.rule() {
            Ok(Err(diag)) => diagnostics.push(diag),
            Ok(Ok(rule)) => {
                for atom in rule
                    .body
                    .iter()
                    .map(|lit| &lit.atom)
                    .chain(std::iter::once(&rule.head))
                {
                    diagnostics.extend(check_arity(
                        &mut arities,
                        &atom.predicate,
                        atom.args.len(),
                        l,
                        c,
                    ));
                }
                if !rule.existentials.is_empty() {
                    first_ex.get_or_insert((l, c));
                }
                if rule.uses_unary_ops() {
                    first_un.get_or_insert((l, c));
                }
                rules.push(rule);
            }
            Err(e) => {
                diagnostics.extend(e.diagnostics);
                // Resynchronise after the next `).`, which can only end a rule.
                let mut prev = Tok::Eof;
                while *p.peek() != Tok::Eof {
                    let t = p.next().tok;
                    if t == Tok::Dot && prev == Tok::RParen {
                        break;
                    }
                    prev = t;
                }
            }
        }
    }
    if let (Some(_), Some((l, c))) = (first_ex, first_un) {
        diagnostics.push(Diagnostic {
            line: l,
            col: c,
            message: ValidationError::UnaryWithExistentials.to_string(),
        });
    }
    if !diagnostics.is_empty() {
        return Err(ParseError { diagnostics });
    }
    Program::new(rules).map_err(|e| ParseError::single(0, 0, e.to_string()))
}

fn ground(atom: Atom) -> GroundAtom {
    let args = atom
        .args
        .into_iter()
        .map(|t| match t {
            Term::Const(c) | Term::Var(c) => Value::Const(c),
        })
        .collect();
    GroundAtom::new(atom.predicate, args)
}

/// Parses a dataset using no external arity constraints.
pub fn parse_dataset(text: &str) -> Result<FuzzyDataset, ParseError> {
    parse_dataset_with(text, &BTreeMap::new())
}

/// Parses a dataset whose predicates must agree with `arities` where they overlap.
pub fn parse_dataset_with(
    text: &str,
    arities: &BTreeMap<Symbol, usize>,
) -> Result<FuzzyDataset, ParseError> {
    let registry = ConnectiveRegistry::default();
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        registry: &registry,
    };
    let mut arities = arities.clone();
    let mut dataset = FuzzyDataset::new();
    let mut diagnostics = Vec::new();
    while *p.peek() != Tok::Eof {
        let (l, c) = p.here();
        let fact = (|| -> PResult<(f64, Atom)> {
            let degree = match (p.peek().clone(), p.peek_at(1).clone()) {
                (Tok::Number(v, _), Tok::ColonColon) => {
                    p.next();
                    p.next();
                    v
                }
                _ => 1.0,
            };
            if let Tok::Null(n) = p.peek().clone() {
                return p.error(format!("null `{n}` is not allowed in data"));
            }
            let atom = p.atom(ArgMode::Ground)?;
            p.expect(Tok::Dot)?;
            Ok((degree, atom))
        })();
        match fact {
            Ok((degree, atom)) => {
                if !(degree > 0.0 && degree <= 1.0) {
                    diagnostics.push(Diagnostic {
                        line: l,
                        col: c,
                        message: format!("degree {degree} must lie in (0, 1]"),
                    });
                    continue;
                }
                if let Some(d) = check_arity(&mut arities, &atom.predicate, atom.args.len(), l, c) {
                    diagnostics.push(d);
                    continue;
                }
                let degree = TruthDegree::new(degree).expect("checked range");
                if let Err(e) = dataset.insert(ground(atom), degree) {
                    diagnostics.push(Diagnostic {
                        line: l,
                        col: c,
                        message: e.to_string(),
                    });
                }
            }
            Err(e) => {
                diagnostics.extend(e.diagnostics);
                while !matches!(p.next().tok, Tok::Dot | Tok::Eof) {}
            }
        }
    }
    if diagnostics.is_empty() {
        Ok(dataset)
    } else {
        Err(ParseError { diagnostics })
    }
}

/// Parses a single ground atom such as `CommonClass(img1, img2, fish)`.
/// A trailing `.` is optional.
pub fn parse_ground_atom(text: &str) -> Result<GroundAtom, ParseError> {
    let registry = ConnectiveRegistry::default();
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        registry: &registry,
    };
    let atom = p.atom(ArgMode::Ground)?;
    if *p.peek() == Tok::Dot {
        p.next();
    }
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {} after atom", p.peek()));
    }
    Ok(ground(atom))
}
