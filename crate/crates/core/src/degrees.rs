//! Truth degrees and the connectives that combine them.
//!
//! A [`TruthDegree`] is a 64-bit float in `[0, 1]`. Rule bodies combine
//! degrees with a [`TNorm`]; body atoms may be wrapped in a [`UnaryOp`].
//! Both families are closed enums over the standard connectives, with a
//! `Custom` variant for connectives registered programmatically through a
//! [`ConnectiveRegistry`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DegreeError {
    #[error("truth degree {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("Schweizer-Sklar parameter must be a finite negative number, got {0}")]
    InvalidSchweizerSklar(f64),
    #[error("threshold must lie in [0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("unknown connective `{0}`")]
    UnknownConnective(String),
    #[error("unknown unary operator `{0}`")]
    UnknownUnary(String),
    #[error("connective `{name}` {problem}")]
    BadParameter { name: String, problem: &'static str },
}

/// A truth degree in `[0, 1]`.
///
/// Ordering and equality are exact float comparisons. `-0.0` is normalised to
/// `0.0` on construction so that the total order agrees with `==`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TruthDegree(f64);

impl TruthDegree {
    pub const ZERO: TruthDegree = TruthDegree(0.0);
    pub const ONE: TruthDegree = TruthDegree(1.0);

    pub fn new(value: f64) -> Result<Self, DegreeError> {
        if (0.0..=1.0).contains(&value) {
            Ok(TruthDegree(value + 0.0))
        } else {
            Err(DegreeError::OutOfRange(value))
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() || value <= 0.0 {
            TruthDegree::ZERO
        } else if value >= 1.0 {
            TruthDegree::ONE
        } else {
            TruthDegree(value)
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }
}

impl Eq for TruthDegree {}

impl PartialOrd for TruthDegree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TruthDegree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl std::hash::Hash for TruthDegree {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state)
    }
}

impl fmt::Display for TruthDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl TryFrom<f64> for TruthDegree {
    type Error = DegreeError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        TruthDegree::new(value)
    }
}

/// How degrees are rendered in dumps and CLI output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DegreeFormat {
    /// Six decimal places.
    #[default]
    Fixed,
    /// Shortest representation that round-trips to the same float.
    RoundTrip,
}

impl DegreeFormat {
    pub fn render(self, d: TruthDegree) -> String {
        match self {
            DegreeFormat::Fixed => format!("{:.6}", d.value()),
            DegreeFormat::RoundTrip => format!("{}", d.value()),
        }
    }
}

/// Parameter of a Schweizer-Sklar t-norm; always finite and negative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsParam(f64);

impl SsParam {
    pub fn new(p: f64) -> Result<Self, DegreeError> {
        if p.is_finite() && p < 0.0 {
            Ok(SsParam(p))
        } else {
            Err(DegreeError::InvalidSchweizerSklar(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Threshold of a `delta` operator; always in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(t: f64) -> Result<Self, DegreeError> {
        if (0.0..=1.0).contains(&t) {
            Ok(Threshold(t + 0.0))
        } else {
            Err(DegreeError::InvalidThreshold(t))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A user-supplied binary connective.
///
/// Nothing checks that an implementation really is a t-norm; the
/// differential suite's law checks exist to catch the ones that are not.
pub trait CustomTNorm: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn apply(&self, a: f64, b: f64) -> f64;
}

/// A user-supplied unary operator `[0,1] -> [0,1]`.
pub trait CustomUnary: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn apply(&self, a: f64) -> f64;
}

#[derive(Clone, Debug)]
pub enum TNorm {
    Min,
    Lukasiewicz,
    Product,
    SchweizerSklar(SsParam),
    Custom(Arc<dyn CustomTNorm>),
}

impl TNorm {
    pub fn schweizer_sklar(p: f64) -> Result<Self, DegreeError> {
        Ok(TNorm::SchweizerSklar(SsParam::new(p)?))
    }

    /// Registry name (`min`, `luk`, `prod`, `ss` or the custom name).
    pub fn name(&self) -> &str {
        match self {
            TNorm::Min => "min",
            TNorm::Lukasiewicz => "luk",
            TNorm::Product => "prod",
            TNorm::SchweizerSklar(_) => "ss",
            TNorm::Custom(c) => c.name(),
        }
    }

    pub fn apply(&self, a: TruthDegree, b: TruthDegree) -> TruthDegree {
        let (x, y) = (a.value(), b.value());
        match self {
            TNorm::Min => {
                if x <= y {
                    a
                } else {
                    b
                }
            }
            TNorm::Custom(c) => TruthDegree::saturating(c.apply(x, y)),
            // 1 is the identity; answering it directly keeps `a ⊗ 1 = a` exact
            // where the closed forms would round.
            _ if y == 1.0 => a,
            _ if x == 1.0 => b,
            TNorm::Lukasiewicz => TruthDegree::saturating(x + y - 1.0),
            TNorm::Product => TruthDegree::saturating(x * y),
            TNorm::SchweizerSklar(p) => {
                if x == 0.0 || y == 0.0 {
                    return TruthDegree::ZERO;
                }
                let p = p.value();
                // x^p + y^p - 1 >= 1 for p < 0 and x, y in (0, 1].
                TruthDegree::saturating((x.powf(p) + y.powf(p) - 1.0).powf(1.0 / p))
            }
        }
    }

    /// Left-to-right fold. Panics on an empty slice; rule bodies are never empty.
    pub fn fold(&self, degrees: &[TruthDegree]) -> TruthDegree {
        let (first, rest) = degrees
            .split_first()
            .expect("t-norm fold over an empty sequence");
        rest.iter().fold(*first, |acc, d| self.apply(acc, *d))
    }
}

impl PartialEq for TNorm {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (TNorm::Min, TNorm::Min)
            | (TNorm::Lukasiewicz, TNorm::Lukasiewicz)
            | (TNorm::Product, TNorm::Product) => true,
            (TNorm::SchweizerSklar(p), TNorm::SchweizerSklar(q)) => p == q,
            (TNorm::Custom(a), TNorm::Custom(b)) => a.name() == b.name(),
            _ => false,
        }
    }
}

impl fmt::Display for TNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TNorm::SchweizerSklar(p) => write!(f, "&ss({})", p.value()),
            other => write!(f, "&{}", other.name()),
        }
    }
}

/// Applies `tnorm` to `a` and `b`.
pub fn tnorm_apply(tnorm: &TNorm, a: TruthDegree, b: TruthDegree) -> TruthDegree {
    tnorm.apply(a, b)
}

/// Left-to-right fold of `tnorm` over `degrees`; `None` when empty.
pub fn tnorm_fold(tnorm: &TNorm, degrees: &[TruthDegree]) -> Option<TruthDegree> {
    (!degrees.is_empty()).then(|| tnorm.fold(degrees))
}

/// Fold with one connective per gap: `((d0 ⊗1 d1) ⊗2 d2) ...`.
///
/// `connectives.len()` must equal `degrees.len() - 1`.
pub fn fold_mixed(connectives: &[TNorm], degrees: &[TruthDegree]) -> Option<TruthDegree> {
    let (first, rest) = degrees.split_first()?;
    if rest.len() != connectives.len() {
        return None;
    }
    Some(
        connectives
            .iter()
            .zip(rest)
            .fold(*first, |acc, (t, d)| t.apply(acc, *d)),
    )
}

/// `max{0, body + K - 1}`: the least head degree that K-satisfies a rule
/// whose body has degree `body`. This is the Łukasiewicz t-norm of the two.
pub fn k_target(body: TruthDegree, k: TruthDegree) -> TruthDegree {
    TNorm::Lukasiewicz.apply(body, k)
}

#[derive(Clone, Debug)]
pub enum UnaryOp {
    /// `1 - a`
    Neg,
    /// 1 on 0, else 0.
    NNeg,
    /// 1 when `a >= T`, else 0.
    Delta(Threshold),
    Custom(Arc<dyn CustomUnary>),
}

impl UnaryOp {
    pub fn delta(t: f64) -> Result<Self, DegreeError> {
        Ok(UnaryOp::Delta(Threshold::new(t)?))
    }

    pub fn name(&self) -> &str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::NNeg => "nneg",
            UnaryOp::Delta(_) => "delta",
            UnaryOp::Custom(c) => c.name(),
        }
    }

    pub fn apply(&self, a: TruthDegree) -> TruthDegree {
        let x = a.value();
        match self {
            UnaryOp::Neg => TruthDegree::saturating(1.0 - x),
            UnaryOp::NNeg => {
                if x == 0.0 {
                    TruthDegree::ONE
                } else {
                    TruthDegree::ZERO
                }
            }
            UnaryOp::Delta(t) => {
                if x >= t.value() {
                    TruthDegree::ONE
                } else {
                    TruthDegree::ZERO
                }
            }
            UnaryOp::Custom(c) => TruthDegree::saturating(c.apply(x)),
        }
    }
}

impl PartialEq for UnaryOp {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (UnaryOp::Neg, UnaryOp::Neg) | (UnaryOp::NNeg, UnaryOp::NNeg) => true,
            (UnaryOp::Delta(a), UnaryOp::Delta(b)) => a == b,
            (UnaryOp::Custom(a), UnaryOp::Custom(b)) => a.name() == b.name(),
            _ => false,
        }
    }
}

impl fmt::Display for UnaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnaryOp::Neg => f.write_str("!"),
            UnaryOp::NNeg => f.write_str("~"),
            UnaryOp::Delta(t) => write!(f, "delta[{}]", t.value()),
            UnaryOp::Custom(c) => write!(f, "{}[]", c.name()),
        }
    }
}

/// Applies `op` to `a`.
pub fn unary_apply(op: &UnaryOp, a: TruthDegree) -> TruthDegree {
    op.apply(a)
}

type TNormCtor = Arc<dyn Fn(Option<f64>) -> Result<TNorm, DegreeError> + Send + Sync>;
type UnaryCtor = Arc<dyn Fn(Option<f64>) -> Result<UnaryOp, DegreeError> + Send + Sync>;

/// Named connectives accepted by the parser.
#[derive(Clone)]
pub struct ConnectiveRegistry {
    tnorms: BTreeMap<String, TNormCtor>,
    unary: BTreeMap<String, UnaryCtor>,
}

fn no_param(name: &str, param: Option<f64>) -> Result<(), DegreeError> {
    match param {
        None => Ok(()),
        Some(_) => Err(DegreeError::BadParameter {
            name: name.to_string(),
            problem: "takes no parameter",
        }),
    }
}

fn need_param(name: &str, param: Option<f64>) -> Result<f64, DegreeError> {
    param.ok_or_else(|| DegreeError::BadParameter {
        name: name.to_string(),
        problem: "requires a parameter",
    })
}

impl Default for ConnectiveRegistry {
    fn default() -> Self {
        let mut reg = ConnectiveRegistry {
            tnorms: BTreeMap::new(),
            unary: BTreeMap::new(),
        };
        reg.register_tnorm("min", |p| no_param("min", p).map(|_| TNorm::Min));
        reg.register_tnorm("luk", |p| no_param("luk", p).map(|_| TNorm::Lukasiewicz));
        reg.register_tnorm("prod", |p| no_param("prod", p).map(|_| TNorm::Product));
        reg.register_tnorm("ss", |p| TNorm::schweizer_sklar(need_param("ss", p)?));
        reg.register_unary("neg", |p| no_param("neg", p).map(|_| UnaryOp::Neg));
        reg.register_unary("nneg", |p| no_param("nneg", p).map(|_| UnaryOp::NNeg));
        reg.register_unary("delta", |p| UnaryOp::delta(need_param("delta", p)?));
        reg
    }
}

impl ConnectiveRegistry {
    pub fn register_tnorm<F>(&mut self, name: &str, ctor: F)
    where
        F: Fn(Option<f64>) -> Result<TNorm, DegreeError> + Send + Sync + 'static,
    {
        self.tnorms.insert(name.to_string(), Arc::new(ctor));
    }

    pub fn register_unary<F>(&mut self, name: &str, ctor: F)
    where
        F: Fn(Option<f64>) -> Result<UnaryOp, DegreeError> + Send + Sync + 'static,
    {
        self.unary.insert(name.to_string(), Arc::new(ctor));
    }

    /// Registers a parameterless custom t-norm under its own name.
    pub fn register_custom_tnorm(&mut self, tnorm: Arc<dyn CustomTNorm>) {
        let name = tnorm.name().to_string();
        let key = name.clone();
        self.register_tnorm(&key, move |p| {
            no_param(&name, p).map(|_| TNorm::Custom(tnorm.clone()))
        });
    }

    pub fn register_custom_unary(&mut self, op: Arc<dyn CustomUnary>) {
        let name = op.name().to_string();
        let key = name.clone();
        self.register_unary(&key, move |p| {
            no_param(&name, p).map(|_| UnaryOp::Custom(op.clone()))
        });
    }

    pub fn tnorm(&self, name: &str, param: Option<f64>) -> Result<TNorm, DegreeError> {
        let ctor = self
            .tnorms
            .get(name)
            .ok_or_else(|| DegreeError::UnknownConnective(name.to_string()))?;
        ctor(param)
    }

    pub fn unary(&self, name: &str, param: Option<f64>) -> Result<UnaryOp, DegreeError> {
        let ctor = self
            .unary
            .get(name)
            .ok_or_else(|| DegreeError::UnknownUnary(name.to_string()))?;
        ctor(param)
    }

    pub fn tnorm_names(&self) -> impl Iterator<Item = &str> {
        self.tnorms.keys().map(String::as_str)
    }
}

impl fmt::Debug for ConnectiveRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConnectiveRegistry")
            .field("tnorms", &self.tnorms.keys().collect::<Vec<_>>())
            .field("unary", &self.unary.keys().collect::<Vec<_>>())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(v: f64) -> TruthDegree {
        TruthDegree::new(v).unwrap()
    }

    fn all_tnorms() -> Vec<TNorm> {
        vec![
            TNorm::Min,
            TNorm::Lukasiewicz,
            TNorm::Product,
            TNorm::schweizer_sklar(-0.5).unwrap(),
            TNorm::schweizer_sklar(-1.0).unwrap(),
            TNorm::schweizer_sklar(-2.0).unwrap(),
        ]
    }

    #[test]
    fn rejects_out_of_range_degrees() {
        assert!(TruthDegree::new(1.5).is_err());
        assert!(TruthDegree::new(-0.1).is_err());
        assert!(TruthDegree::new(f64::NAN).is_err());
        assert_eq!(TruthDegree::new(-0.0).unwrap(), TruthDegree::ZERO);
    }

    #[test]
    fn worked_values() {
        let luk = TNorm::Lukasiewicz.apply(d(0.8), d(0.9));
        assert!((luk.value() - 0.7).abs() <= 1e-12);
        let prod = TNorm::Product.apply(d(0.8), d(0.9));
        assert!((prod.value() - 0.72).abs() <= 1e-12);
        let ss = TNorm::schweizer_sklar(-1.0).unwrap().apply(d(0.5), d(0.5));
        assert!((ss.value() - 1.0 / 3.0).abs() <= 1e-12);
        for t in all_tnorms() {
            assert_eq!(t.apply(d(0.37), TruthDegree::ONE), d(0.37));
        }
    }

    #[test]
    fn folds() {
        assert_eq!(TNorm::Lukasiewicz.fold(&[d(0.8), d(1.0)]), d(0.8));
        assert_eq!(TNorm::Product.fold(&[d(0.42)]), d(0.42));
        let three = TNorm::Lukasiewicz.fold(&[d(0.9), d(0.9), d(0.9)]);
        assert!((three.value() - 0.7).abs() <= 1e-12);
        assert_eq!(tnorm_fold(&TNorm::Min, &[]), None);
        let mixed = fold_mixed(
            &[TNorm::Lukasiewicz, TNorm::Product],
            &[d(0.9), d(0.9), d(0.5)],
        )
        .unwrap();
        assert!((mixed.value() - 0.4).abs() <= 1e-12);
        assert_eq!(fold_mixed(&[TNorm::Min], &[d(0.5)]), None);
    }

    #[test]
    #[should_panic]
    fn empty_fold_is_a_contract_violation() {
        TNorm::Min.fold(&[]);
    }

    #[test]
    fn unary_values() {
        assert!((UnaryOp::Neg.apply(d(0.3)).value() - 0.7).abs() <= 1e-12);
        assert_eq!(UnaryOp::NNeg.apply(TruthDegree::ZERO), TruthDegree::ONE);
        assert_eq!(UnaryOp::NNeg.apply(d(0.01)), TruthDegree::ZERO);
        assert_eq!(
            UnaryOp::delta(0.7).unwrap().apply(d(0.72)),
            TruthDegree::ONE
        );
        assert_eq!(
            UnaryOp::delta(0.7).unwrap().apply(d(0.69)),
            TruthDegree::ZERO
        );
        assert!(UnaryOp::delta(1.2).is_err());
    }

    #[test]
    fn invalid_specs_are_configuration_errors() {
        assert!(TNorm::schweizer_sklar(0.0).is_err());
        assert!(TNorm::schweizer_sklar(1.0).is_err());
        assert!(TNorm::schweizer_sklar(f64::NEG_INFINITY).is_err());
        let reg = ConnectiveRegistry::default();
        assert!(reg.tnorm("ss", None).is_err());
        assert!(reg.tnorm("min", Some(1.0)).is_err());
        assert!(reg.tnorm("hamacher", None).is_err());
        assert!(reg.unary("delta", Some(-0.5)).is_err());
        assert_eq!(
            reg.tnorm("ss", Some(-2.0)).unwrap(),
            TNorm::schweizer_sklar(-2.0).unwrap()
        );
    }

    #[test]
    fn boolean_inputs_behave_classically() {
        for t in all_tnorms() {
            for a in [0.0, 1.0] {
                for b in [0.0, 1.0] {
                    let expected = if a == 1.0 && b == 1.0 { 1.0 } else { 0.0 };
                    assert_eq!(t.apply(d(a), d(b)).value(), expected, "{t} {a} {b}");
                }
            }
        }
        assert_eq!(UnaryOp::Neg.apply(TruthDegree::ONE), TruthDegree::ZERO);
        assert_eq!(UnaryOp::Neg.apply(TruthDegree::ZERO), TruthDegree::ONE);
    }

    #[test]
    fn display_forms() {
        assert_eq!(
            TNorm::schweizer_sklar(-0.5).unwrap().to_string(),
            "&ss(-0.5)"
        );
        assert_eq!(TNorm::Lukasiewicz.to_string(), "&luk");
        assert_eq!(UnaryOp::delta(0.7).unwrap().to_string(), "delta[0.7]");
        assert_eq!(DegreeFormat::Fixed.render(d(0.72)), "0.720000");
        assert_eq!(DegreeFormat::RoundTrip.render(d(1.0)), "1");
    }

    fn unit() -> impl Strategy<Value = f64> {
        prop_oneof![Just(0.0), Just(1.0), 0.0f64..=1.0]
    }

    proptest! {
        #[test]
        fn tnorm_laws(a in unit(), b in unit(), c in unit(), b2 in unit()) {
            let (a, b, c) = (d(a), d(b), d(c));
            let (lo, hi) = if b.value() <= b2 { (b, d(b2)) } else { (d(b2), b) };
            for t in all_tnorms() {
                prop_assert_eq!(t.apply(a, b), t.apply(b, a));
                let left = t.apply(t.apply(a, b), c).value();
                let right = t.apply(a, t.apply(b, c)).value();
                prop_assert!((left - right).abs() <= 1e-12, "{} assoc {} {}", t, left, right);
                prop_assert!(t.apply(a, lo).value() <= t.apply(a, hi).value() + 1e-12);
                prop_assert_eq!(t.apply(a, TruthDegree::ONE), a);
                prop_assert!(t.apply(a, b).value() <= TNorm::Min.apply(a, b).value() + 1e-12);
            }
        }

        #[test]
        fn unary_outputs_stay_in_range(a in unit(), t in unit()) {
            let a = d(a);
            let neg = UnaryOp::Neg.apply(a).value();
            prop_assert!((0.0..=1.0).contains(&neg));
            let nneg = UnaryOp::NNeg.apply(a).value();
            prop_assert!(nneg == 0.0 || nneg == 1.0);
            let delta = UnaryOp::delta(t).unwrap().apply(a).value();
            prop_assert!(delta == 0.0 || delta == 1.0);
        }
    }
}
