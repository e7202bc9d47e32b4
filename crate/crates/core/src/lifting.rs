//! Relation lifting `Rel(F)`, predicate lifting `Pred(F)` and the
//! order-relaxed lifting `Rel_≤(F)`, all by induction on the functor.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functor::{Carrier, FValue, Functor};
use crate::order::{OrderKind, OrderSpec};

/// A relation `R ⊆ X × Y` between two carriers.
#[derive(Clone, PartialEq, Eq)]
pub struct Relation {
    domain: Arc<Carrier>,
    codomain: Arc<Carrier>,
    pairs: BTreeSet<(usize, usize)>,
}

impl Relation {
    pub fn new<I>(domain: Arc<Carrier>, codomain: Arc<Carrier>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        if let Some(&(x, y)) = pairs.iter().find(|(x, y)| *x >= domain.len() || *y >= codomain.len()) {
            return Err(Error::Validation(format!(
                "pair ({x},{y}) lies outside {} x {}",
                domain.name(),
                codomain.name()
            )));
        }
        Ok(Relation { domain, codomain, pairs })
    }

    pub fn from_names<'a, I>(domain: Arc<Carrier>, codomain: Arc<Carrier>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let pairs = pairs
            .into_iter()
            .map(|(x, y)| Ok((domain.require(x)?, codomain.require(y)?)))
            .collect::<Result<Vec<_>>>()?;
        Relation::new(domain, codomain, pairs)
    }

    pub fn empty(domain: Arc<Carrier>, codomain: Arc<Carrier>) -> Self {
        Relation { domain, codomain, pairs: BTreeSet::new() }
    }

    pub fn full(domain: Arc<Carrier>, codomain: Arc<Carrier>) -> Self {
        let pairs = (0..domain.len()).flat_map(|x| (0..codomain.len()).map(move |y| (x, y))).collect();
        Relation { domain, codomain, pairs }
    }

    pub fn identity(carrier: Arc<Carrier>) -> Self {
        let pairs = (0..carrier.len()).map(|x| (x, x)).collect();
        Relation { domain: carrier.clone(), codomain: carrier, pairs }
    }

    /// `Δ(P) = {(x, x) | x ∈ P}`.
    pub fn diagonal(p: &Predicate) -> Self {
        Relation {
            domain: p.carrier.clone(),
            codomain: p.carrier.clone(),
            pairs: p.members.iter().map(|&x| (x, x)).collect(),
        }
    }

    pub fn domain(&self) -> &Arc<Carrier> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<Carrier> {
        &self.codomain
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.pairs.contains(&(x, y))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn converse(&self) -> Relation {
        Relation {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            pairs: self.pairs.iter().map(|&(x, y)| (y, x)).collect(),
        }
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    pub fn union(&self, other: &Relation) -> Relation {
        Relation {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            pairs: self.pairs.union(&other.pairs).copied().collect(),
        }
    }

    pub fn intersection(&self, other: &Relation) -> Relation {
        Relation {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            pairs: self.pairs.intersection(&other.pairs).copied().collect(),
        }
    }

    pub fn filter<P: FnMut(usize, usize) -> bool>(&self, mut keep: P) -> Relation {
        Relation {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            pairs: self.pairs.iter().copied().filter(|&(x, y)| keep(x, y)).collect(),
        }
    }

    pub fn named_pairs(&self) -> Vec<(&str, &str)> {
        self.pairs.iter().map(|&(x, y)| (self.domain.element(x), self.codomain.element(y))).collect()
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, y)) in self.named_pairs().into_iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({x},{y})")?;
        }
        write!(f, "}}")
    }
}

/// A subset of a carrier.
#[derive(Clone, PartialEq, Eq)]
pub struct Predicate {
    carrier: Arc<Carrier>,
    members: BTreeSet<usize>,
}

impl Predicate {
    pub fn new<I: IntoIterator<Item = usize>>(carrier: Arc<Carrier>, members: I) -> Result<Self> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&x) = members.iter().find(|&&x| x >= carrier.len()) {
            return Err(Error::Validation(format!("state index {x} lies outside {}", carrier.name())));
        }
        Ok(Predicate { carrier, members })
    }

    pub fn from_names<'a, I: IntoIterator<Item = &'a str>>(carrier: Arc<Carrier>, names: I) -> Result<Self> {
        let members = names.into_iter().map(|n| carrier.require(n)).collect::<Result<BTreeSet<_>>>()?;
        Ok(Predicate { carrier, members })
    }

    pub(crate) fn from_set(carrier: Arc<Carrier>, members: BTreeSet<usize>) -> Self {
        debug_assert!(members.iter().all(|&x| x < carrier.len()));
        Predicate { carrier, members }
    }

    pub fn empty(carrier: Arc<Carrier>) -> Self {
        Predicate { carrier, members: BTreeSet::new() }
    }

    pub fn full(carrier: Arc<Carrier>) -> Self {
        let members = (0..carrier.len()).collect();
        Predicate { carrier, members }
    }

    /// Every subset of `carrier`, in bitmask order.
    pub fn all_subsets(carrier: &Arc<Carrier>) -> impl Iterator<Item = Predicate> + '_ {
        let n = carrier.len();
        assert!(n < 64, "cannot enumerate subsets of a carrier with {n} elements");
        (0u64..1 << n).map(move |mask| Predicate {
            carrier: carrier.clone(),
            members: (0..n).filter(|i| mask >> i & 1 == 1).collect(),
        })
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.contains(&x)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn complement(&self) -> Predicate {
        Predicate {
            carrier: self.carrier.clone(),
            members: (0..self.carrier.len()).filter(|x| !self.members.contains(x)).collect(),
        }
    }

    pub fn union(&self, other: &Predicate) -> Predicate {
        Predicate { carrier: self.carrier.clone(), members: self.members.union(&other.members).copied().collect() }
    }

    pub fn intersection(&self, other: &Predicate) -> Predicate {
        Predicate {
            carrier: self.carrier.clone(),
            members: self.members.intersection(&other.members).copied().collect(),
        }
    }

    pub fn is_subset(&self, other: &Predicate) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn names(&self) -> Vec<&str> {
        self.members.iter().map(|&x| self.carrier.element(x)).collect()
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names().join(", "))
    }
}

/// `(u, v) ∈ Rel(F)(rel)` where `rel` is given as a membership test on indices.
///
/// Shapes are assumed valid; a shape mismatch is simply "not related".
pub(crate) fn rel_lift_with<R>(f: &Functor, rel: &R, u: &FValue, v: &FValue) -> bool
where
    R: Fn(usize, usize) -> bool + ?Sized,
{
    match (f, u, v) {
        (Functor::Id, FValue::State(x), FValue::State(y)) => rel(*x, *y),
        (Functor::Const(_), FValue::Const(a), FValue::Const(b)) => a == b,
        (Functor::Prod(l, r), FValue::Pair(u1, u2), FValue::Pair(v1, v2)) => {
            rel_lift_with(l, rel, u1, v1) && rel_lift_with(r, rel, u2, v2)
        }
        (Functor::Coprod(l, _), FValue::Inl(a), FValue::Inl(b)) => rel_lift_with(l, rel, a, b),
        (Functor::Coprod(_, r), FValue::Inr(a), FValue::Inr(b)) => rel_lift_with(r, rel, a, b),
        (Functor::Exp(base, _), FValue::Func(us), FValue::Func(vs)) => {
            us.len() == vs.len() && us.iter().zip(vs).all(|(a, b)| rel_lift_with(base, rel, a, b))
        }
        (Functor::Pow(base), FValue::Set(us), FValue::Set(vs)) => {
            us.iter().all(|a| vs.iter().any(|b| rel_lift_with(base, rel, a, b)))
                && vs.iter().all(|b| us.iter().any(|a| rel_lift_with(base, rel, a, b)))
        }
        (Functor::Seq(base, _), FValue::List(us), FValue::List(vs)) => {
            us.len() == vs.len() && us.iter().zip(vs).all(|(a, b)| rel_lift_with(base, rel, a, b))
        }
        _ => false,
    }
}

/// `u ∈ Pred(F)(pred)` where `pred` is a membership test on indices.
pub(crate) fn pred_lift_with<P>(f: &Functor, pred: &P, u: &FValue) -> bool
where
    P: Fn(usize) -> bool + ?Sized,
{
    match (f, u) {
        (Functor::Id, FValue::State(x)) => pred(*x),
        (Functor::Const(_), FValue::Const(_)) => true,
        (Functor::Prod(l, r), FValue::Pair(a, b)) => pred_lift_with(l, pred, a) && pred_lift_with(r, pred, b),
        (Functor::Coprod(l, _), FValue::Inl(a)) => pred_lift_with(l, pred, a),
        (Functor::Coprod(_, r), FValue::Inr(b)) => pred_lift_with(r, pred, b),
        (Functor::Exp(base, _), FValue::Func(vs)) | (Functor::Seq(base, _), FValue::List(vs)) => {
            vs.iter().all(|a| pred_lift_with(base, pred, a))
        }
        (Functor::Pow(base), FValue::Set(vs)) => vs.iter().all(|a| pred_lift_with(base, pred, a)),
        _ => false,
    }
}

/// Whether `(u, v) ∈ Rel(F)(r)`.
pub fn rel_lift(f: &Functor, r: &Relation, u: &FValue, v: &FValue) -> Result<bool> {
    f.check_value(&r.domain, u)?;
    f.check_value(&r.codomain, v)?;
    Ok(rel_lift_with(f, &|x, y| r.contains(x, y), u, v))
}

/// Whether `u ∈ Pred(F)(p)`.
pub fn pred_lift(f: &Functor, p: &Predicate, u: &FValue) -> Result<bool> {
    f.check_value(&p.carrier, u)?;
    Ok(pred_lift_with(f, &|x| p.contains(x), u))
}

/// `Pred(F)(P)` computed as the first projection of `Rel(F)(Δ(P))`, by
/// searching `F(X)` for a partner `v`.
pub fn pred_lift_via_rel(f: &Functor, p: &Predicate, u: &FValue, guard: u128) -> Result<bool> {
    f.check_value(&p.carrier, u)?;
    let diag = Relation::diagonal(p);
    let candidates = f.enumerate_values(&p.carrier, guard)?;
    Ok(candidates.iter().any(|v| rel_lift_with(f, &|x, y| diag.contains(x, y), u, v)))
}

/// Whether `(u, v) ∈ Rel_≤(F)(r)`, i.e. some `w ∈ F(R)` has
/// `u ≤ F(π₁)(w)` and `F(π₂)(w) ≤ v`.
///
/// Builtin and structural orders are decided by closed forms; extensional
/// orders fall back to [`rel_lift_ordered_search`].
pub fn rel_lift_ordered(ord: &OrderSpec, r: &Relation, u: &FValue, v: &FValue, guard: u128) -> Result<bool> {
    let f = ord.functor();
    f.check_value(&r.domain, u)?;
    f.check_value(&r.codomain, v)?;
    rel_lift_ordered_kind(f, ord.kind(), ord, r, u, v, guard)
}

fn rel_lift_ordered_kind(
    f: &Functor,
    kind: &OrderKind,
    ord: &OrderSpec,
    r: &Relation,
    u: &FValue,
    v: &FValue,
    guard: u128,
) -> Result<bool> {
    let rel = |x: usize, y: usize| r.contains(x, y);
    match kind {
        OrderKind::Equality => Ok(rel_lift_with(f, &rel, u, v)),
        // u ⊆ π₁(w), π₂(w) ⊆ v: every element of u needs a related partner in v.
        OrderKind::PowSubset => {
            let (base, us, vs) = pow_parts(f, u, v)?;
            Ok(us.iter().all(|a| vs.iter().any(|b| rel_lift_with(base, &rel, a, b))))
        }
        OrderKind::PowSupset => {
            let (base, us, vs) = pow_parts(f, u, v)?;
            Ok(vs.iter().all(|b| us.iter().any(|a| rel_lift_with(base, &rel, a, b))))
        }
        OrderKind::Structural(base) => Ok(base.rel_lift(f, &rel, u, v)),
        // u ≤ᵒᵖ π₁(w) and π₂(w) ≤ᵒᵖ v is the same as Rel_≤(R⁻¹)(v, u).
        OrderKind::Opposite(inner) => rel_lift_ordered_kind(f, inner, ord, &r.converse(), v, u, guard),
        OrderKind::Extensional(_) => rel_lift_ordered_search(ord, r, u, v, guard),
    }
}

fn pow_parts<'a>(
    f: &'a Functor,
    u: &'a FValue,
    v: &'a FValue,
) -> Result<(&'a Functor, &'a BTreeSet<FValue>, &'a BTreeSet<FValue>)> {
    match (f, u, v) {
        (Functor::Pow(base), FValue::Set(us), FValue::Set(vs)) => Ok((base, us, vs)),
        _ => Err(Error::ShapeMismatch(format!("powerset order used with functor {f}"))),
    }
}

/// `Rel_≤(F)(r)` by brute-force witness search over `F(R)`.
///
/// The carrier of the witnesses is the pair list of `r`; each candidate `w`
/// is projected to both sides and compared with `ord.leq`.
pub fn rel_lift_ordered_search(ord: &OrderSpec, r: &Relation, u: &FValue, v: &FValue, guard: u128) -> Result<bool> {
    let f = ord.functor();
    f.check_value(&r.domain, u)?;
    f.check_value(&r.codomain, v)?;
    let pairs: Vec<(usize, usize)> = r.pairs.iter().copied().collect();
    for w in f.enumerate(pairs.len(), guard)? {
        let left = w.map_states(&|i| pairs[i].0);
        if !ord.leq(&r.domain, u, &left)? {
            continue;
        }
        let right = w.map_states(&|i| pairs[i].1);
        if ord.leq(&r.codomain, &right, v)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functor::{FunctorExpr, SetTable, DEFAULT_GUARD};

    fn carrier(name: &str, ids: &[&str]) -> Arc<Carrier> {
        Arc::new(Carrier::new(name, ids.iter().copied()).unwrap())
    }

    fn pow_id() -> Functor {
        FunctorExpr::pow(FunctorExpr::Id).resolve(&SetTable::new()).unwrap()
    }

    #[test]
    fn powerset_lifting_examples() {
        let x = carrier("X", &["x1", "x2"]);
        let y = carrier("Y", &["y1", "y2"]);
        let r = Relation::from_names(x.clone(), y.clone(), [("x1", "y1")]).unwrap();
        let f = pow_id();
        assert!(rel_lift(&f, &r, &FValue::state_set([0]), &FValue::state_set([0])).unwrap());
        let empty = Relation::empty(x, y);
        assert!(rel_lift(&f, &empty, &FValue::state_set([]), &FValue::state_set([])).unwrap());
    }

    #[test]
    fn kripke_labels_must_agree() {
        let sets = SetTable::new().with("AP", ["p1", "p2"]).unwrap();
        let f = FunctorExpr::kripke("AP").resolve(&sets).unwrap();
        let x = carrier("X", &["x1", "x2"]);
        let y = carrier("Y", &["y1", "y2"]);
        let u = FValue::pair(FValue::set([FValue::Const(0)]), FValue::state_set([1]));
        let v = FValue::pair(FValue::set([FValue::Const(1)]), FValue::state_set([1]));
        let full = Relation::full(x, y);
        assert!(!rel_lift(&f, &full, &u, &v).unwrap());
    }

    #[test]
    fn rel_lift_rejects_bad_shapes() {
        let x = carrier("X", &["x1"]);
        let r = Relation::identity(x);
        let err = rel_lift(&pow_id(), &r, &FValue::State(0), &FValue::state_set([0])).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
    }

    #[test]
    fn powerset_predicate_examples() {
        let x = carrier("X", &["x1", "x2"]);
        let p = Predicate::from_names(x.clone(), ["x2"]).unwrap();
        let f = pow_id();
        assert!(pred_lift(&f, &p, &FValue::state_set([1])).unwrap());
        assert!(!pred_lift(&f, &p, &FValue::state_set([0, 1])).unwrap());
        assert!(pred_lift(&f, &Predicate::empty(x.clone()), &FValue::state_set([])).unwrap());

        let id = FunctorExpr::Id.resolve(&SetTable::new()).unwrap();
        assert!(pred_lift(&id, &Predicate::full(x), &FValue::State(1)).unwrap());
    }

    #[test]
    fn via_rel_degenerate_cases() {
        let x = carrier("X", &["x1", "x2"]);
        let id = FunctorExpr::Id.resolve(&SetTable::new()).unwrap();
        let none = Predicate::empty(x.clone());
        for s in 0..2 {
            assert!(!pred_lift(&id, &none, &FValue::State(s)).unwrap());
            assert!(!pred_lift_via_rel(&id, &none, &FValue::State(s), DEFAULT_GUARD).unwrap());
        }
        let sets = SetTable::new().with("A", ["a", "b"]).unwrap();
        let k = FunctorExpr::constant("A").resolve(&sets).unwrap();
        for c in 0..2 {
            assert!(pred_lift(&k, &none, &FValue::Const(c)).unwrap());
            assert!(pred_lift_via_rel(&k, &none, &FValue::Const(c), DEFAULT_GUARD).unwrap());
        }
    }

    #[test]
    fn via_rel_agrees_on_powerset_of_two() {
        let x = carrier("X", &["x1", "x2"]);
        let f = pow_id();
        let values = f.enumerate_values(&x, DEFAULT_GUARD).unwrap();
        let mut agreements = 0;
        for p in Predicate::all_subsets(&x) {
            for u in &values {
                let direct = pred_lift(&f, &p, u).unwrap();
                let oracle = pred_lift_via_rel(&f, &p, u, DEFAULT_GUARD).unwrap();
                assert_eq!(direct, oracle, "P={p} u={u}");
                agreements += 1;
            }
        }
        assert_eq!(agreements, 16);
    }

    #[test]
    fn relation_helpers() {
        let x = carrier("X", &["a", "b"]);
        let y = carrier("Y", &["c"]);
        let r = Relation::from_names(x.clone(), y.clone(), [("a", "c"), ("b", "c")]).unwrap();
        assert_eq!(r.converse().converse(), r);
        assert_eq!(r.converse().domain().name(), "Y");
        assert!(Relation::new(x, y, [(0, 3)]).is_err());
        assert_eq!(r.to_string(), "{(a,c), (b,c)}");
    }
}
