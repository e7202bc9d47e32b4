//! Polynomial functor expressions, finite carriers and the values of `F(X)`.
//!
//! A [`FunctorExpr`] is plain syntax whose constant and exponent symbols name
//! finite sets. Resolving it against a [`SetTable`] yields a [`Functor`], the
//! form every algorithm in this crate works with. Elements of `F(X)` are
//! [`FValue`] trees whose leaves are indices: `State(i)` points into the
//! carrier `X` and `Const(j)` into the constant set named by the functor.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of values any single enumeration may produce.
pub const DEFAULT_GUARD: u128 = 100_000;

/// Default maximum list length for `Seq` nodes.
pub const DEFAULT_SEQ_MAX_LEN: usize = 2;

/// A named finite set with a fixed element order.
#[derive(Clone)]
pub struct Carrier {
    name: String,
    elements: Vec<String>,
    index: HashMap<String, usize>,
}

impl Carrier {
    pub fn new<N, I, S>(name: N, elements: I) -> Result<Self>
    where
        N: Into<String>,
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let name = name.into();
        let elements: Vec<String> = elements.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(Error::Validation(format!("carrier `{name}` lists element `{e}` twice")));
            }
        }
        Ok(Carrier { name, elements, index })
    }

    /// A carrier with elements `{prefix}1 .. {prefix}{n}`.
    pub fn numbered(name: impl Into<String>, prefix: &str, n: usize) -> Self {
        Carrier::new(name, (1..=n).map(|i| format!("{prefix}{i}"))).expect("generated element names are distinct")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &str {
        &self.elements[i]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize> {
        self.position(id).ok_or_else(|| Error::Validation(format!("`{id}` is not an element of `{}`", self.name)))
    }
}

impl PartialEq for Carrier {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.elements == other.elements
    }
}

impl Eq for Carrier {}

impl fmt::Debug for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{{}}}", self.name, self.elements.join(","))
    }
}

/// Named finite sets available to constant and exponent symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SetTable {
    sets: BTreeMap<String, Arc<Carrier>>,
}

impl SetTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare<I, S>(&mut self, name: &str, elements: I) -> Result<Arc<Carrier>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set = Arc::new(Carrier::new(name, elements)?);
        self.sets.insert(name.to_string(), set.clone());
        Ok(set)
    }

    pub fn with<I, S>(mut self, name: &str, elements: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.declare(name, elements)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Result<&Arc<Carrier>> {
        self.sets.get(name).ok_or_else(|| Error::UnresolvedSymbol(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Arc<Carrier>)> {
        self.sets.iter()
    }
}

/// Syntax of a polynomial functor.
///
/// The serde form is the tagged-object notation used by system files:
/// `"id"`, `{"const": "A"}`, `{"prod": [l, r]}`, `{"coprod": [l, r]}`,
/// `{"exp": [base, "A"]}`, `{"pow": f}`, `{"seq": f}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctorExpr {
    Id,
    Const(String),
    Prod(Box<FunctorExpr>, Box<FunctorExpr>),
    Coprod(Box<FunctorExpr>, Box<FunctorExpr>),
    Exp(Box<FunctorExpr>, String),
    Pow(Box<FunctorExpr>),
    Seq(Box<FunctorExpr>),
}

impl FunctorExpr {
    pub fn constant(name: &str) -> Self {
        FunctorExpr::Const(name.to_string())
    }

    pub fn prod(l: FunctorExpr, r: FunctorExpr) -> Self {
        FunctorExpr::Prod(Box::new(l), Box::new(r))
    }

    pub fn coprod(l: FunctorExpr, r: FunctorExpr) -> Self {
        FunctorExpr::Coprod(Box::new(l), Box::new(r))
    }

    pub fn exp(base: FunctorExpr, exponent: &str) -> Self {
        FunctorExpr::Exp(Box::new(base), exponent.to_string())
    }

    pub fn pow(base: FunctorExpr) -> Self {
        FunctorExpr::Pow(Box::new(base))
    }

    pub fn seq(base: FunctorExpr) -> Self {
        FunctorExpr::Seq(Box::new(base))
    }

    /// `P(AP) x P(id)`.
    pub fn kripke(ap: &str) -> Self {
        FunctorExpr::prod(FunctorExpr::pow(FunctorExpr::constant(ap)), FunctorExpr::pow(FunctorExpr::Id))
    }

    /// `P(id)^A`.
    pub fn lts(labels: &str) -> Self {
        FunctorExpr::exp(FunctorExpr::pow(FunctorExpr::Id), labels)
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            FunctorExpr::Id | FunctorExpr::Const(_) => 1,
            FunctorExpr::Prod(l, r) | FunctorExpr::Coprod(l, r) => 1 + l.depth().max(r.depth()),
            FunctorExpr::Exp(b, _) | FunctorExpr::Pow(b) | FunctorExpr::Seq(b) => 1 + b.depth(),
        }
    }

    pub fn resolve(&self, sets: &SetTable) -> Result<Functor> {
        Functor::resolve(self, sets, DEFAULT_SEQ_MAX_LEN)
    }
}

impl fmt::Display for FunctorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctorExpr::Id => write!(f, "id"),
            FunctorExpr::Const(a) => write!(f, "{a}"),
            FunctorExpr::Prod(l, r) => write!(f, "({l} x {r})"),
            FunctorExpr::Coprod(l, r) => write!(f, "({l} + {r})"),
            FunctorExpr::Exp(b, a) => write!(f, "{b}^{a}"),
            FunctorExpr::Pow(b) => write!(f, "P({b})"),
            FunctorExpr::Seq(b) => write!(f, "{b}*"),
        }
    }
}

/// A functor expression whose symbols have been resolved to finite sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Functor {
    Id,
    Const(Arc<Carrier>),
    Prod(Box<Functor>, Box<Functor>),
    Coprod(Box<Functor>, Box<Functor>),
    Exp(Box<Functor>, Arc<Carrier>),
    Pow(Box<Functor>),
    /// Lists of length at most `max_len`.
    Seq(Box<Functor>, usize),
}

impl Functor {
    pub fn resolve(expr: &FunctorExpr, sets: &SetTable, seq_max_len: usize) -> Result<Functor> {
        let r = |e: &FunctorExpr| Functor::resolve(e, sets, seq_max_len).map(Box::new);
        Ok(match expr {
            FunctorExpr::Id => Functor::Id,
            FunctorExpr::Const(a) => Functor::Const(sets.get(a)?.clone()),
            FunctorExpr::Prod(l, rr) => Functor::Prod(r(l)?, r(rr)?),
            FunctorExpr::Coprod(l, rr) => Functor::Coprod(r(l)?, r(rr)?),
            FunctorExpr::Exp(b, a) => Functor::Exp(r(b)?, sets.get(a)?.clone()),
            FunctorExpr::Pow(b) => Functor::Pow(r(b)?),
            FunctorExpr::Seq(b) => Functor::Seq(r(b)?, seq_max_len),
        })
    }

    pub fn expr(&self) -> FunctorExpr {
        match self {
            Functor::Id => FunctorExpr::Id,
            Functor::Const(a) => FunctorExpr::Const(a.name().to_string()),
            Functor::Prod(l, r) => FunctorExpr::prod(l.expr(), r.expr()),
            Functor::Coprod(l, r) => FunctorExpr::coprod(l.expr(), r.expr()),
            Functor::Exp(b, a) => FunctorExpr::exp(b.expr(), a.name()),
            Functor::Pow(b) => FunctorExpr::pow(b.expr()),
            Functor::Seq(b, _) => FunctorExpr::seq(b.expr()),
        }
    }

    pub fn contains_seq(&self) -> bool {
        match self {
            Functor::Id | Functor::Const(_) => false,
            Functor::Prod(l, r) | Functor::Coprod(l, r) => l.contains_seq() || r.contains_seq(),
            Functor::Exp(b, _) | Functor::Pow(b) => b.contains_seq(),
            Functor::Seq(..) => true,
        }
    }

    /// Finite sets referenced by `Const` and `Exp` nodes, deduplicated by name.
    pub fn referenced_sets(&self) -> BTreeMap<String, Arc<Carrier>> {
        fn walk(f: &Functor, out: &mut BTreeMap<String, Arc<Carrier>>) {
            match f {
                Functor::Id => {}
                Functor::Const(a) => {
                    out.insert(a.name().to_string(), a.clone());
                }
                Functor::Prod(l, r) | Functor::Coprod(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                Functor::Exp(b, a) => {
                    out.insert(a.name().to_string(), a.clone());
                    walk(b, out);
                }
                Functor::Pow(b) | Functor::Seq(b, _) => walk(b, out),
            }
        }
        let mut out = BTreeMap::new();
        walk(self, &mut out);
        out
    }

    /// `|F(X)|` for `|X| = n`; `None` on overflow.
    pub fn cardinality(&self, n: usize) -> Option<u128> {
        match self {
            Functor::Id => Some(n as u128),
            Functor::Const(a) => Some(a.len() as u128),
            Functor::Prod(l, r) => l.cardinality(n)?.checked_mul(r.cardinality(n)?),
            Functor::Coprod(l, r) => l.cardinality(n)?.checked_add(r.cardinality(n)?),
            Functor::Exp(b, a) => checked_pow(b.cardinality(n)?, a.len()),
            Functor::Pow(b) => {
                let k = b.cardinality(n)?;
                if k >= 128 {
                    None
                } else {
                    Some(1u128 << k)
                }
            }
            Functor::Seq(b, max_len) => {
                let k = b.cardinality(n)?;
                (0..=*max_len).try_fold(0u128, |acc, len| acc.checked_add(checked_pow(k, len)?))
            }
        }
    }

    /// Whether `v` is a well-shaped element of `F(X)` with `|X| = n`.
    pub fn validates(&self, n: usize, v: &FValue) -> bool {
        match (self, v) {
            (Functor::Id, FValue::State(i)) => *i < n,
            (Functor::Const(a), FValue::Const(j)) => *j < a.len(),
            (Functor::Prod(l, r), FValue::Pair(a, b)) => l.validates(n, a) && r.validates(n, b),
            (Functor::Coprod(l, _), FValue::Inl(a)) => l.validates(n, a),
            (Functor::Coprod(_, r), FValue::Inr(b)) => r.validates(n, b),
            (Functor::Exp(b, a), FValue::Func(vs)) => vs.len() == a.len() && vs.iter().all(|x| b.validates(n, x)),
            (Functor::Pow(b), FValue::Set(vs)) => vs.iter().all(|x| b.validates(n, x)),
            (Functor::Seq(b, max_len), FValue::List(vs)) => {
                vs.len() <= *max_len && vs.iter().all(|x| b.validates(n, x))
            }
            _ => false,
        }
    }

    pub fn validate_value(&self, carrier: &Carrier, v: &FValue) -> bool {
        self.validates(carrier.len(), v)
    }

    pub fn check_value(&self, carrier: &Carrier, v: &FValue) -> Result<()> {
        if self.validates(carrier.len(), v) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!("value {} is not an element of {}({})", v, self.expr(), carrier.name())))
        }
    }

    /// Every element of `F(X)` with `|X| = n`, in a fixed order.
    pub fn enumerate(&self, n: usize, guard: u128) -> Result<Vec<FValue>> {
        match self.cardinality(n) {
            Some(k) if k <= guard => Ok(self.enumerate_unchecked(n)),
            cardinality => Err(Error::EnumerationTooLarge { cardinality, guard }),
        }
    }

    pub fn enumerate_values(&self, carrier: &Carrier, guard: u128) -> Result<Vec<FValue>> {
        self.enumerate(carrier.len(), guard)
    }

    fn enumerate_unchecked(&self, n: usize) -> Vec<FValue> {
        match self {
            Functor::Id => (0..n).map(FValue::State).collect(),
            Functor::Const(a) => (0..a.len()).map(FValue::Const).collect(),
            Functor::Prod(l, r) => {
                let ls = l.enumerate_unchecked(n);
                let rs = r.enumerate_unchecked(n);
                let mut out = Vec::with_capacity(ls.len() * rs.len());
                for a in &ls {
                    for b in &rs {
                        out.push(FValue::pair(a.clone(), b.clone()));
                    }
                }
                out
            }
            Functor::Coprod(l, r) => l
                .enumerate_unchecked(n)
                .into_iter()
                .map(|v| FValue::Inl(Box::new(v)))
                .chain(r.enumerate_unchecked(n).into_iter().map(|v| FValue::Inr(Box::new(v))))
                .collect(),
            Functor::Exp(b, a) => {
                let base = b.enumerate_unchecked(n);
                tuples(&base, a.len()).into_iter().map(FValue::Func).collect()
            }
            Functor::Pow(b) => {
                let base = b.enumerate_unchecked(n);
                (0u128..1 << base.len())
                    .map(|mask| {
                        FValue::Set(
                            base.iter()
                                .enumerate()
                                .filter(|(i, _)| mask >> i & 1 == 1)
                                .map(|(_, v)| v.clone())
                                .collect(),
                        )
                    })
                    .collect()
            }
            Functor::Seq(b, max_len) => {
                let base = b.enumerate_unchecked(n);
                (0..=*max_len).flat_map(|len| tuples(&base, len)).map(FValue::List).collect()
            }
        }
    }
}

impl fmt::Display for Functor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr().fmt(f)
    }
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base))
}

/// All length-`len` tuples over `base`, lexicographic with the first position slowest.
fn tuples(base: &[FValue], len: usize) -> Vec<Vec<FValue>> {
    let mut out = vec![Vec::with_capacity(len)];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * base.len());
        for prefix in &out {
            for v in base {
                let mut t = prefix.clone();
                t.push(v.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// An element of `F(X)`.
///
/// `Set` is extensional by construction, so the derived equality is the
/// extensional equality on values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FValue {
    State(usize),
    Const(usize),
    Pair(Box<FValue>, Box<FValue>),
    Inl(Box<FValue>),
    Inr(Box<FValue>),
    /// Indexed by the elements of the exponent set, in its declared order.
    Func(Vec<FValue>),
    Set(BTreeSet<FValue>),
    List(Vec<FValue>),
}

impl FValue {
    pub fn pair(a: FValue, b: FValue) -> Self {
        FValue::Pair(Box::new(a), Box::new(b))
    }

    pub fn set<I: IntoIterator<Item = FValue>>(items: I) -> Self {
        FValue::Set(items.into_iter().collect())
    }

    pub fn state_set<I: IntoIterator<Item = usize>>(states: I) -> Self {
        FValue::Set(states.into_iter().map(FValue::State).collect())
    }

    /// `F(g)(self)`: rename every state leaf through `g`.
    pub fn map_states<G: Fn(usize) -> usize>(&self, g: &G) -> FValue {
        match self {
            FValue::State(i) => FValue::State(g(*i)),
            FValue::Const(j) => FValue::Const(*j),
            FValue::Pair(a, b) => FValue::pair(a.map_states(g), b.map_states(g)),
            FValue::Inl(a) => FValue::Inl(Box::new(a.map_states(g))),
            FValue::Inr(b) => FValue::Inr(Box::new(b.map_states(g))),
            FValue::Func(vs) => FValue::Func(vs.iter().map(|v| v.map_states(g)).collect()),
            FValue::Set(vs) => FValue::Set(vs.iter().map(|v| v.map_states(g)).collect()),
            FValue::List(vs) => FValue::List(vs.iter().map(|v| v.map_states(g)).collect()),
        }
    }

    /// States occurring anywhere in the value.
    pub fn support(&self) -> BTreeSet<usize> {
        fn walk(v: &FValue, out: &mut BTreeSet<usize>) {
            match v {
                FValue::State(i) => {
                    out.insert(*i);
                }
                FValue::Const(_) => {}
                FValue::Pair(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                FValue::Inl(a) | FValue::Inr(a) => walk(a, out),
                FValue::Func(vs) | FValue::List(vs) => vs.iter().for_each(|x| walk(x, out)),
                FValue::Set(vs) => vs.iter().for_each(|x| walk(x, out)),
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut out);
        out
    }

    pub fn as_set(&self) -> Option<&BTreeSet<FValue>> {
        match self {
            FValue::Set(s) => Some(s),
            _ => None,
        }
    }
}

/// Extensional equality of two values.
pub fn value_equal(a: &FValue, b: &FValue) -> bool {
    a == b
}

impl fmt::Display for FValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(
            f: &mut fmt::Formatter<'_>,
            open: &str,
            close: &str,
            it: &mut dyn Iterator<Item = &FValue>,
        ) -> fmt::Result {
            write!(f, "{open}")?;
            for (i, v) in it.enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "{close}")
        }
        match self {
            FValue::State(i) => write!(f, "#{i}"),
            FValue::Const(j) => write!(f, "'{j}"),
            FValue::Pair(a, b) => write!(f, "({a},{b})"),
            FValue::Inl(a) => write!(f, "inl {a}"),
            FValue::Inr(b) => write!(f, "inr {b}"),
            FValue::Func(vs) => list(f, "[", "]", &mut vs.iter()),
            FValue::Set(vs) => list(f, "{", "}", &mut vs.iter()),
            FValue::List(vs) => list(f, "<", ">", &mut vs.iter()),
        }
    }
}
