//! The coalgebraic temporal logic: syntax, set semantics over a coalgebra,
//! and the image/inverse translation of formulas along a relation.
//!
//! Formulas are built over named predicates (subsets of the state space) or
//! atomic propositions interpreted through a natural transformation. The
//! temporal operators are defined from the one-step lifting:
//!
//! * `○P = {x | c(x) ∈ Pred(F)(P)}`
//! * `□P` is the greatest fixed point of `S ↦ P ∩ ○S`
//! * `◇P = ¬□¬P`
//! * `P U Q` is the least fixed point of `S ↦ Q ∪ (P ∩ ¬○¬S)`

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coalgebra::Coalgebra;
use crate::error::{Error, Result};
use crate::functor::Carrier;
use crate::lifting::{pred_lift_with, Predicate, Relation};
use crate::nat::NatTrans;
use crate::simulation::is_invariant;

pub use parse::{parse_formula, ParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `RP = {y | ∃x ∈ P. x R y}`.
    Direct,
    /// `R⁻¹P = {x | ∃y ∈ P. x R y}`.
    Inverse,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Direct => Direction::Inverse,
            Direction::Inverse => Direction::Direct,
        }
    }
}

/// A reference to a named relation, possibly taken in its converse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelRef {
    pub name: String,
    pub converse: bool,
}

impl RelRef {
    pub fn new(name: impl Into<String>) -> Self {
        RelRef { name: name.into(), converse: false }
    }

    pub fn converse(&self) -> Self {
        RelRef { name: self.name.clone(), converse: !self.converse }
    }
}

/// Temporal formulas. The serde form is the tagged-object notation used by
/// system files, e.g. `{"next": {"pred": "P"}}` or `{"until": [φ, ψ]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    Pred(String),
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    /// The image of a named predicate along a named relation.
    Img {
        pred: String,
        rel: String,
        dir: Direction,
    },
}

/// Connectives, used to describe formula fragments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connective {
    Not,
    And,
    Or,
    Implies,
    Next,
    Eventually,
    Always,
    Until,
}

impl Connective {
    pub const ALL: [Connective; 8] = [
        Connective::Not,
        Connective::And,
        Connective::Or,
        Connective::Implies,
        Connective::Next,
        Connective::Eventually,
        Connective::Always,
        Connective::Until,
    ];

    pub fn arity(self) -> usize {
        match self {
            Connective::And | Connective::Or | Connective::Implies | Connective::Until => 2,
            _ => 1,
        }
    }

    /// Whether the connective embeds a negation of its argument in the
    /// user-facing sense (`¬`, and the left side of `⇒`).
    pub fn is_negating(self) -> bool {
        matches!(self, Connective::Not | Connective::Implies)
    }
}

impl Formula {
    pub fn pred(name: &str) -> Self {
        Formula::Pred(name.to_string())
    }

    pub fn atom(name: &str) -> Self {
        Formula::Atom(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Self {
        Formula::Not(Box::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(a: Formula) -> Self {
        Formula::Next(Box::new(a))
    }

    pub fn eventually(a: Formula) -> Self {
        Formula::Eventually(Box::new(a))
    }

    pub fn always(a: Formula) -> Self {
        Formula::Always(Box::new(a))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn img(pred: &str, rel: &str, dir: Direction) -> Self {
        Formula::Img { pred: pred.to_string(), rel: rel.to_string(), dir }
    }

    /// Apply a connective to its arguments; panics on an arity mismatch.
    pub fn apply(op: Connective, mut args: Vec<Formula>) -> Formula {
        assert_eq!(args.len(), op.arity(), "wrong number of arguments for {op:?}");
        let b = |f: Formula| Box::new(f);
        match op {
            Connective::Not => Formula::Not(b(args.remove(0))),
            Connective::Next => Formula::Next(b(args.remove(0))),
            Connective::Eventually => Formula::Eventually(b(args.remove(0))),
            Connective::Always => Formula::Always(b(args.remove(0))),
            Connective::And => {
                let r = args.pop().unwrap();
                Formula::And(b(args.pop().unwrap()), b(r))
            }
            Connective::Or => {
                let r = args.pop().unwrap();
                Formula::Or(b(args.pop().unwrap()), b(r))
            }
            Connective::Implies => {
                let r = args.pop().unwrap();
                Formula::Implies(b(args.pop().unwrap()), b(r))
            }
            Connective::Until => {
                let r = args.pop().unwrap();
                Formula::Until(b(args.pop().unwrap()), b(r))
            }
        }
    }

    /// Connectives occurring in the formula.
    pub fn connectives(&self) -> BTreeSet<Connective> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            let c = match f {
                Formula::Not(_) => Connective::Not,
                Formula::And(..) => Connective::And,
                Formula::Or(..) => Connective::Or,
                Formula::Implies(..) => Connective::Implies,
                Formula::Next(_) => Connective::Next,
                Formula::Eventually(_) => Connective::Eventually,
                Formula::Always(_) => Connective::Always,
                Formula::Until(..) => Connective::Until,
                _ => return,
            };
            out.insert(c);
        });
        out
    }

    pub fn is_negation_free(&self) -> bool {
        !self.connectives().iter().any(|c| c.is_negating())
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Pred(_) | Formula::Atom(_) | Formula::Img { .. } => 0,
            Formula::Not(a) | Formula::Next(a) | Formula::Eventually(a) | Formula::Always(a) => 1 + a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    fn visit<V: FnMut(&Formula)>(&self, v: &mut V) {
        v(self);
        match self {
            Formula::Pred(_) | Formula::Atom(_) | Formula::Img { .. } => {}
            Formula::Not(a) | Formula::Next(a) | Formula::Eventually(a) | Formula::Always(a) => a.visit(v),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(a, b) => {
                a.visit(v);
                b.visit(v);
            }
        }
    }

    fn map_leaves<L>(&self, leaf: &mut L) -> Result<Formula>
    where
        L: FnMut(&Formula) -> Result<Formula>,
    {
        let b = Box::new;
        Ok(match self {
            Formula::Pred(_) | Formula::Atom(_) | Formula::Img { .. } => leaf(self)?,
            Formula::Not(a) => Formula::Not(b(a.map_leaves(leaf)?)),
            Formula::Next(a) => Formula::Next(b(a.map_leaves(leaf)?)),
            Formula::Eventually(a) => Formula::Eventually(b(a.map_leaves(leaf)?)),
            Formula::Always(a) => Formula::Always(b(a.map_leaves(leaf)?)),
            Formula::And(x, y) => Formula::And(b(x.map_leaves(leaf)?), b(y.map_leaves(leaf)?)),
            Formula::Or(x, y) => Formula::Or(b(x.map_leaves(leaf)?), b(y.map_leaves(leaf)?)),
            Formula::Implies(x, y) => Formula::Implies(b(x.map_leaves(leaf)?), b(y.map_leaves(leaf)?)),
            Formula::Until(x, y) => Formula::Until(b(x.map_leaves(leaf)?), b(y.map_leaves(leaf)?)),
        })
    }

    /// Turn every `Pred(name)` with `name` in `atoms` into `Atom(name)`.
    pub fn with_atoms(&self, atoms: &BTreeSet<String>) -> Formula {
        self.map_leaves(&mut |f| {
            Ok(match f {
                Formula::Pred(n) if atoms.contains(n) => Formula::Atom(n.clone()),
                other => other.clone(),
            })
        })
        .expect("leaf map is infallible")
    }

    /// Predicate names referenced by `Pred` and `Img` leaves.
    pub fn predicate_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Pred(n) | Formula::Img { pred: n, .. } => {
                out.insert(n.clone());
            }
            _ => {}
        });
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Pred(n) => write!(f, "{n}"),
            Formula::Atom(n) => write!(f, "@{n}"),
            Formula::Not(a) => write!(f, "!{a}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Next(a) => write!(f, "X {a}"),
            Formula::Eventually(a) => write!(f, "F {a}"),
            Formula::Always(a) => write!(f, "G {a}"),
            Formula::Until(a, b) => write!(f, "({a} U {b})"),
            Formula::Img { pred, rel, dir } => match dir {
                Direction::Direct => write!(f, "img({pred}, {rel})"),
                Direction::Inverse => write!(f, "inv({pred}, {rel})"),
            },
        }
    }
}

/// Named predicates and relations a formula may refer to.
#[derive(Clone, Debug, Default)]
pub struct PredEnv {
    predicates: BTreeMap<String, Predicate>,
    relations: BTreeMap<String, Relation>,
}

impl PredEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_predicate(mut self, name: &str, p: Predicate) -> Self {
        self.predicates.insert(name.to_string(), p);
        self
    }

    pub fn with_relation(mut self, name: &str, r: Relation) -> Self {
        self.relations.insert(name.to_string(), r);
        self
    }

    pub fn insert_predicate(&mut self, name: &str, p: Predicate) {
        self.predicates.insert(name.to_string(), p);
    }

    pub fn insert_relation(&mut self, name: &str, r: Relation) {
        self.relations.insert(name.to_string(), r);
    }

    pub fn predicate(&self, name: &str) -> Result<&Predicate> {
        self.predicates.get(name).ok_or_else(|| Error::UnresolvedName(name.to_string()))
    }

    pub fn relation(&self, name: &str) -> Result<&Relation> {
        self.relations.get(name).ok_or_else(|| Error::UnresolvedName(name.to_string()))
    }

    pub fn predicates(&self) -> &BTreeMap<String, Predicate> {
        &self.predicates
    }

    pub fn relations(&self) -> &BTreeMap<String, Relation> {
        &self.relations
    }
}

/// `RP = {y | ∃x ∈ P. x R y}`.
pub fn direct_image(r: &Relation, p: &Predicate) -> Result<Predicate> {
    if r.domain() != p.carrier() {
        return Err(Error::CarrierMismatch {
            expected: r.domain().name().to_string(),
            found: p.carrier().name().to_string(),
        });
    }
    let members = r.pairs().iter().filter(|(x, _)| p.contains(*x)).map(|&(_, y)| y).collect();
    Ok(Predicate::from_set(r.codomain().clone(), members))
}

/// `R⁻¹P = {x | ∃y ∈ P. x R y}`.
pub fn inverse_image(r: &Relation, p: &Predicate) -> Result<Predicate> {
    direct_image(&r.converse(), p)
}

/// Replace every predicate `P` by its image along `rel` in direction `dir`
/// (`φ*` for [`Direction::Direct`], `φ⁻¹` for [`Direction::Inverse`]).
///
/// Taking the inverse along `R⁻¹` yields the same formula as the direct
/// image along `R`.
pub fn image_formula(phi: &Formula, rel: &RelRef, dir: Direction) -> Result<Formula> {
    let dir = if rel.converse { dir.flip() } else { dir };
    phi.map_leaves(&mut |leaf| match leaf {
        Formula::Pred(n) => Ok(Formula::Img { pred: n.clone(), rel: rel.name.clone(), dir }),
        Formula::Atom(p) => Err(Error::NotApplicable(format!(
            "image formulas are defined over predicates, found atomic proposition `{p}`"
        ))),
        Formula::Img { .. } => Err(Error::NotApplicable("formula already contains image predicates".into())),
        _ => unreachable!("map_leaves only passes leaves"),
    })
}

/// `○S` for the coalgebra `c`.
pub fn next_set(c: &Coalgebra, s: &Predicate) -> Predicate {
    let members = (0..c.len()).filter(|&x| pred_lift_with(c.functor(), &|y| s.contains(y), c.structure(x))).collect();
    Predicate::from_set(c.states().clone(), members)
}

/// `⟦φ⟧` in the coalgebra `c`.
pub fn eval(c: &Coalgebra, phi: &Formula, env: &PredEnv, nu: Option<&NatTrans>) -> Result<Predicate> {
    Evaluator { c, env, nu }.eval(phi)
}

/// `c, x ⊨ φ`.
pub fn satisfies(c: &Coalgebra, x: usize, phi: &Formula, env: &PredEnv, nu: Option<&NatTrans>) -> Result<bool> {
    if x >= c.len() {
        return Err(Error::Validation(format!("state index {x} lies outside `{}`", c.states().name())));
    }
    Ok(eval(c, phi, env, nu)?.contains(x))
}

struct Evaluator<'a> {
    c: &'a Coalgebra,
    env: &'a PredEnv,
    nu: Option<&'a NatTrans>,
}

impl Evaluator<'_> {
    fn carrier(&self) -> &Arc<Carrier> {
        self.c.states()
    }

    fn on_carrier(&self, p: Predicate) -> Result<Predicate> {
        if p.carrier() != self.carrier() {
            return Err(Error::CarrierMismatch {
                expected: self.carrier().name().to_string(),
                found: p.carrier().name().to_string(),
            });
        }
        Ok(p)
    }

    fn eval(&self, phi: &Formula) -> Result<Predicate> {
        match phi {
            Formula::Pred(n) => self.on_carrier(self.env.predicate(n)?.clone()),
            Formula::Img { pred, rel, dir } => {
                let r = self.env.relation(rel)?;
                let p = self.env.predicate(pred)?;
                let image = match dir {
                    Direction::Direct => direct_image(r, p)?,
                    Direction::Inverse => inverse_image(r, p)?,
                };
                self.on_carrier(image)
            }
            Formula::Atom(p) => {
                let nu = self.nu.ok_or(Error::MissingNu)?;
                let idx = nu.ap().position(p).ok_or_else(|| Error::UnresolvedName(p.clone()))?;
                let mut members = BTreeSet::new();
                for x in 0..self.c.len() {
                    if nu.apply(self.carrier(), self.c.structure(x))?.contains(&idx) {
                        members.insert(x);
                    }
                }
                Ok(Predicate::from_set(self.carrier().clone(), members))
            }
            Formula::Not(a) => Ok(self.eval(a)?.complement()),
            Formula::And(a, b) => Ok(self.eval(a)?.intersection(&self.eval(b)?)),
            Formula::Or(a, b) => Ok(self.eval(a)?.union(&self.eval(b)?)),
            Formula::Implies(a, b) => Ok(self.eval(a)?.complement().union(&self.eval(b)?)),
            Formula::Next(a) => Ok(next_set(self.c, &self.eval(a)?)),
            Formula::Always(a) => self.always(&self.eval(a)?),
            Formula::Eventually(a) => Ok(self.always(&self.eval(a)?.complement())?.complement()),
            Formula::Until(a, b) => self.until(&self.eval(a)?, &self.eval(b)?),
        }
    }

    /// Descending iteration from the full state space.
    fn always(&self, p: &Predicate) -> Result<Predicate> {
        let mut s = Predicate::full(self.carrier().clone());
        for _ in 0..=self.c.len() + 1 {
            let next = p.intersection(&next_set(self.c, &s));
            if next == s {
                return Ok(s);
            }
            s = next;
        }
        Err(Error::Internal("greatest fixed point did not stabilise".into()))
    }

    /// Ascending iteration from the empty set.
    fn until(&self, p: &Predicate, q: &Predicate) -> Result<Predicate> {
        let mut s = Predicate::empty(self.carrier().clone());
        for _ in 0..=self.c.len() + 1 {
            let step = next_set(self.c, &s.complement()).complement();
            let next = q.union(&p.intersection(&step));
            if next == s {
                return Ok(s);
            }
            s = next;
        }
        Err(Error::Internal("least fixed point did not stabilise".into()))
    }
}

/// `x ∈ □P` decided by searching for an invariant `Q ⊆ P` containing `x`.
pub fn always_oracle(c: &Coalgebra, p: &Predicate, x: usize, guard: u128) -> Result<bool> {
    if p.carrier() != c.states() {
        return Err(Error::CarrierMismatch {
            expected: c.states().name().to_string(),
            found: p.carrier().name().to_string(),
        });
    }
    if !p.contains(x) {
        return Ok(false);
    }
    let rest: Vec<usize> = p.members().iter().copied().filter(|&y| y != x).collect();
    let count = 1u128.checked_shl(rest.len() as u32).unwrap_or(u128::MAX);
    if count > guard {
        return Err(Error::EnumerationTooLarge { cardinality: Some(count), guard });
    }
    for mask in 0u128..count {
        let members =
            std::iter::once(x).chain(rest.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &y)| y));
        let q = Predicate::new(c.states().clone(), members)?;
        if is_invariant(c, &q)?.holds {
            return Ok(true);
        }
    }
    Ok(false)
}
