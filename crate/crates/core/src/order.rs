//! Functorial preorders on `F(X)` and the closure properties the transfer
//! theorems need: preorder laws, down/up-closedness and ν-naturality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functor::{Carrier, FValue, Functor};
use crate::lifting::{pred_lift_with, Predicate};
use crate::nat::NatTrans;

/// Outcome of an exhaustive check: either the property holds or a witness
/// of its failure is returned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<W> {
    Holds,
    Fails(W),
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderWitness {
    NotReflexive(FValue),
    NotTransitive(FValue, FValue, FValue),
    /// `lower ≤ upper`, `upper ∈ Pred(F)(P)` but `lower ∉ Pred(F)(P)`.
    NotDownClosed {
        lower: FValue,
        upper: FValue,
        predicate: Predicate,
    },
    /// `lower ≤ upper`, `lower ∈ Pred(F)(P)` but `upper ∉ Pred(F)(P)`.
    NotUpClosed {
        lower: FValue,
        upper: FValue,
        predicate: Predicate,
    },
    /// `lower ≤ upper` but `ν(upper) ⊄ ν(lower)`.
    NotDownNatural {
        lower: FValue,
        upper: FValue,
    },
    /// `lower ≤ upper` but `ν(lower) ⊄ ν(upper)`.
    NotUpNatural {
        lower: FValue,
        upper: FValue,
    },
}

impl fmt::Display for OrderWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderWitness::NotReflexive(a) => write!(f, "{a} is not below itself"),
            OrderWitness::NotTransitive(a, b, c) => {
                write!(f, "{a} <= {b} <= {c} but not {a} <= {c}")
            }
            OrderWitness::NotDownClosed { lower, upper, predicate } => {
                write!(f, "{lower} <= {upper}; {upper} satisfies Pred({predicate}) but {lower} does not")
            }
            OrderWitness::NotUpClosed { lower, upper, predicate } => {
                write!(f, "{lower} <= {upper}; {lower} satisfies Pred({predicate}) but {upper} does not")
            }
            OrderWitness::NotDownNatural { lower, upper } => {
                write!(f, "{lower} <= {upper} but nu({upper}) is not contained in nu({lower})")
            }
            OrderWitness::NotUpNatural { lower, upper } => {
                write!(f, "{lower} <= {upper} but nu({lower}) is not contained in nu({upper})")
            }
        }
    }
}

/// Preorders on the constant sets of a functor, keyed by set name. Sets
/// without an entry are ordered by equality.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StructuralBase {
    preorders: BTreeMap<String, BTreeSet<(usize, usize)>>,
}

impl StructuralBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn preorders(&self) -> &BTreeMap<String, BTreeSet<(usize, usize)>> {
        &self.preorders
    }

    fn leq_const(&self, set: &Carrier, a: usize, b: usize) -> bool {
        match self.preorders.get(set.name()) {
            Some(pairs) => pairs.contains(&(a, b)),
            None => a == b,
        }
    }

    fn opposite(&self) -> StructuralBase {
        StructuralBase {
            preorders: self
                .preorders
                .iter()
                .map(|(k, ps)| (k.clone(), ps.iter().map(|&(a, b)| (b, a)).collect()))
                .collect(),
        }
    }

    /// The order assembled clause by clause over the functor.
    pub(crate) fn leq(&self, f: &Functor, u: &FValue, v: &FValue) -> bool {
        match (f, u, v) {
            (Functor::Id, FValue::State(x), FValue::State(y)) => x == y,
            (Functor::Const(set), FValue::Const(a), FValue::Const(b)) => self.leq_const(set, *a, *b),
            (Functor::Prod(l, r), FValue::Pair(u1, u2), FValue::Pair(v1, v2)) => {
                self.leq(l, u1, v1) && self.leq(r, u2, v2)
            }
            (Functor::Coprod(l, _), FValue::Inl(a), FValue::Inl(b)) => self.leq(l, a, b),
            (Functor::Coprod(_, r), FValue::Inr(a), FValue::Inr(b)) => self.leq(r, a, b),
            (Functor::Exp(base, _), FValue::Func(us), FValue::Func(vs)) => {
                us.iter().zip(vs).all(|(a, b)| self.leq(base, a, b))
            }
            (Functor::Pow(base), FValue::Set(us), FValue::Set(vs)) => {
                us.iter().all(|a| vs.iter().any(|b| self.leq(base, a, b)))
                    && vs.iter().all(|b| us.iter().any(|a| self.leq(base, a, b)))
            }
            _ => false,
        }
    }

    /// `Rel_≤(F)(rel)` for the structural order, computed clause by clause.
    ///
    /// Constants relate iff ordered (witness `w = u`); products, exponents
    /// and coproducts split the witness componentwise; for powersets the
    /// witness set can be taken as the union of per-element witnesses, which
    /// reduces to the two-sided condition on the lifted base relation.
    pub(crate) fn rel_lift<R>(&self, f: &Functor, rel: &R, u: &FValue, v: &FValue) -> bool
    where
        R: Fn(usize, usize) -> bool + ?Sized,
    {
        match (f, u, v) {
            (Functor::Id, FValue::State(x), FValue::State(y)) => rel(*x, *y),
            (Functor::Const(set), FValue::Const(a), FValue::Const(b)) => self.leq_const(set, *a, *b),
            (Functor::Prod(l, r), FValue::Pair(u1, u2), FValue::Pair(v1, v2)) => {
                self.rel_lift(l, rel, u1, v1) && self.rel_lift(r, rel, u2, v2)
            }
            (Functor::Coprod(l, _), FValue::Inl(a), FValue::Inl(b)) => self.rel_lift(l, rel, a, b),
            (Functor::Coprod(_, r), FValue::Inr(a), FValue::Inr(b)) => self.rel_lift(r, rel, a, b),
            (Functor::Exp(base, _), FValue::Func(us), FValue::Func(vs)) => {
                us.iter().zip(vs).all(|(a, b)| self.rel_lift(base, rel, a, b))
            }
            (Functor::Pow(base), FValue::Set(us), FValue::Set(vs)) => {
                us.iter().all(|a| vs.iter().any(|b| self.rel_lift(base, rel, a, b)))
                    && vs.iter().all(|b| us.iter().any(|a| self.rel_lift(base, rel, a, b)))
            }
            _ => false,
        }
    }
}

/// An order on the values of one carrier, given pair by pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionalOrder {
    pub carrier: Arc<Carrier>,
    pub pairs: BTreeSet<(FValue, FValue)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderKind {
    Equality,
    /// Explicit pair lists, each scoped to the carrier it was declared for.
    Extensional(Vec<ExtensionalOrder>),
    Structural(StructuralBase),
    /// `u ≤ v` iff `u ⊆ v`, for a powerset at the top.
    PowSubset,
    /// `u ≤ v` iff `v ⊆ u`, for a powerset at the top.
    PowSupset,
    Opposite(Box<OrderKind>),
}

/// A preorder on `F(X)` for every carrier `X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderSpec {
    functor: Arc<Functor>,
    kind: OrderKind,
}

impl OrderSpec {
    pub fn equality(functor: Arc<Functor>) -> Self {
        OrderSpec { functor, kind: OrderKind::Equality }
    }

    pub fn pow_subset(functor: Arc<Functor>) -> Result<Self> {
        require_pow(&functor)?;
        Ok(OrderSpec { functor, kind: OrderKind::PowSubset })
    }

    pub fn pow_supset(functor: Arc<Functor>) -> Result<Self> {
        require_pow(&functor)?;
        Ok(OrderSpec { functor, kind: OrderKind::PowSupset })
    }

    pub fn extensional(functor: Arc<Functor>, tables: Vec<ExtensionalOrder>) -> Result<Self> {
        for t in &tables {
            for (a, b) in &t.pairs {
                functor.check_value(&t.carrier, a)?;
                functor.check_value(&t.carrier, b)?;
            }
        }
        Ok(OrderSpec { functor, kind: OrderKind::Extensional(tables) })
    }

    /// Assemble the structural order of the **Order** class: the given
    /// preorder on each constant set, equality on states, componentwise on
    /// products, exponents and coproducts, and the two-sided condition on
    /// powersets.
    pub fn build_order_class(functor: Arc<Functor>, base: BTreeMap<String, BTreeSet<(usize, usize)>>) -> Result<Self> {
        if functor.contains_seq() {
            return Err(Error::Unsupported("the Order class has no clause for finite sequences".into()));
        }
        let sets = functor.referenced_sets();
        for (name, pairs) in &base {
            let set = sets.get(name).ok_or_else(|| {
                Error::Validation(format!("base preorder given for `{name}`, which {functor} does not use"))
            })?;
            check_base_preorder(set, pairs)?;
        }
        Ok(OrderSpec { functor, kind: OrderKind::Structural(StructuralBase { preorders: base }) })
    }

    /// [`OrderSpec::build_order_class`] with base preorders given by element names.
    pub fn build_order_class_named(
        functor: Arc<Functor>,
        base: &BTreeMap<String, Vec<(String, String)>>,
    ) -> Result<Self> {
        let sets = functor.referenced_sets();
        let mut resolved = BTreeMap::new();
        for (name, pairs) in base {
            let set = sets.get(name).ok_or_else(|| {
                Error::Validation(format!("base preorder given for `{name}`, which {functor} does not use"))
            })?;
            let pairs =
                pairs.iter().map(|(a, b)| Ok((set.require(a)?, set.require(b)?))).collect::<Result<BTreeSet<_>>>()?;
            resolved.insert(name.clone(), pairs);
        }
        OrderSpec::build_order_class(functor, resolved)
    }

    /// `u ≤ᵒᵖ v` iff `v ≤ u`.
    pub fn opposite(&self) -> OrderSpec {
        let kind = match &self.kind {
            OrderKind::Equality => OrderKind::Equality,
            OrderKind::PowSubset => OrderKind::PowSupset,
            OrderKind::PowSupset => OrderKind::PowSubset,
            OrderKind::Structural(b) => OrderKind::Structural(b.opposite()),
            OrderKind::Opposite(inner) => (**inner).clone(),
            k @ OrderKind::Extensional(_) => OrderKind::Opposite(Box::new(k.clone())),
        };
        OrderSpec { functor: self.functor.clone(), kind }
    }

    pub fn functor(&self) -> &Functor {
        &self.functor
    }

    pub fn functor_arc(&self) -> &Arc<Functor> {
        &self.functor
    }

    pub fn kind(&self) -> &OrderKind {
        &self.kind
    }

    /// Whether the order is an Order-class (structural) order.
    pub fn is_structural(&self) -> bool {
        matches!(self.kind, OrderKind::Structural(_))
    }

    /// Whether `u ≤ v` in `F(carrier)`.
    pub fn leq(&self, carrier: &Carrier, u: &FValue, v: &FValue) -> Result<bool> {
        leq_kind(&self.functor, &self.kind, carrier, u, v)
    }

    /// Reflexivity and transitivity over all of `F(carrier)`.
    pub fn is_preorder(&self, carrier: &Carrier, guard: u128) -> Result<Verdict<OrderWitness>> {
        let values = self.functor.enumerate_values(carrier, guard)?;
        for a in &values {
            if !self.leq(carrier, a, a)? {
                return Ok(Verdict::Fails(OrderWitness::NotReflexive(a.clone())));
            }
        }
        let below = self.leq_matrix(carrier, &values)?;
        for (i, a) in values.iter().enumerate() {
            for j in below[i].iter().copied() {
                for k in below[j].iter().copied() {
                    if !below[i].contains(&k) {
                        return Ok(Verdict::Fails(OrderWitness::NotTransitive(
                            a.clone(),
                            values[j].clone(),
                            values[k].clone(),
                        )));
                    }
                }
            }
        }
        Ok(Verdict::Holds)
    }

    /// `a ≤ b ∧ b ∈ Pred(F)(P) ⟹ a ∈ Pred(F)(P)` for every `P ⊆ carrier`.
    pub fn is_down_closed(&self, carrier: &Arc<Carrier>, guard: u128) -> Result<Verdict<OrderWitness>> {
        self.closure_check(carrier, guard, true)
    }

    /// `a ≤ b ∧ a ∈ Pred(F)(P) ⟹ b ∈ Pred(F)(P)` for every `P ⊆ carrier`.
    pub fn is_up_closed(&self, carrier: &Arc<Carrier>, guard: u128) -> Result<Verdict<OrderWitness>> {
        self.closure_check(carrier, guard, false)
    }

    fn closure_check(&self, carrier: &Arc<Carrier>, guard: u128, down: bool) -> Result<Verdict<OrderWitness>> {
        let values = self.functor.enumerate_values(carrier, guard)?;
        let subsets = 1u128.checked_shl(carrier.len() as u32).unwrap_or(u128::MAX);
        if subsets > guard {
            return Err(Error::EnumerationTooLarge { cardinality: Some(subsets), guard });
        }
        let below = self.leq_matrix(carrier, &values)?;
        let predicates: Vec<Predicate> = Predicate::all_subsets(carrier).collect();
        for p in &predicates {
            let sat: Vec<bool> = values.iter().map(|v| pred_lift_with(&self.functor, &|x| p.contains(x), v)).collect();
            for (i, lower) in values.iter().enumerate() {
                for &j in &below[i] {
                    let upper = &values[j];
                    if down && sat[j] && !sat[i] {
                        return Ok(Verdict::Fails(OrderWitness::NotDownClosed {
                            lower: lower.clone(),
                            upper: upper.clone(),
                            predicate: p.clone(),
                        }));
                    }
                    if !down && sat[i] && !sat[j] {
                        return Ok(Verdict::Fails(OrderWitness::NotUpClosed {
                            lower: lower.clone(),
                            upper: upper.clone(),
                            predicate: p.clone(),
                        }));
                    }
                }
            }
        }
        Ok(Verdict::Holds)
    }

    /// `u ≤ u′ ⟹ ν(u′) ⊆ ν(u)` over all of `F(carrier)`.
    pub fn is_down_natural(&self, nu: &NatTrans, carrier: &Carrier, guard: u128) -> Result<Verdict<OrderWitness>> {
        self.naturality_direction(nu, carrier, guard, true)
    }

    /// `u ≤ u′ ⟹ ν(u) ⊆ ν(u′)` over all of `F(carrier)`.
    pub fn is_up_natural(&self, nu: &NatTrans, carrier: &Carrier, guard: u128) -> Result<Verdict<OrderWitness>> {
        self.naturality_direction(nu, carrier, guard, false)
    }

    fn naturality_direction(
        &self,
        nu: &NatTrans,
        carrier: &Carrier,
        guard: u128,
        down: bool,
    ) -> Result<Verdict<OrderWitness>> {
        let values = self.functor.enumerate_values(carrier, guard)?;
        let labels = values.iter().map(|v| nu.apply(carrier, v)).collect::<Result<Vec<_>>>()?;
        let below = self.leq_matrix(carrier, &values)?;
        for (i, lower) in values.iter().enumerate() {
            for &j in &below[i] {
                let ok = if down { labels[j].is_subset(&labels[i]) } else { labels[i].is_subset(&labels[j]) };
                if !ok {
                    let (lower, upper) = (lower.clone(), values[j].clone());
                    return Ok(Verdict::Fails(if down {
                        OrderWitness::NotDownNatural { lower, upper }
                    } else {
                        OrderWitness::NotUpNatural { lower, upper }
                    }));
                }
            }
        }
        Ok(Verdict::Holds)
    }

    /// For each value, the indices of the values above it.
    fn leq_matrix(&self, carrier: &Carrier, values: &[FValue]) -> Result<Vec<BTreeSet<usize>>> {
        values
            .iter()
            .map(|a| {
                let mut up = BTreeSet::new();
                for (j, b) in values.iter().enumerate() {
                    if self.leq(carrier, a, b)? {
                        up.insert(j);
                    }
                }
                Ok(up)
            })
            .collect()
    }
}

fn require_pow(f: &Functor) -> Result<()> {
    match f {
        Functor::Pow(_) => Ok(()),
        other => Err(Error::Validation(format!("subset orders need a powerset at the top, found {other}"))),
    }
}

fn check_base_preorder(set: &Carrier, pairs: &BTreeSet<(usize, usize)>) -> Result<()> {
    if let Some(&(a, b)) = pairs.iter().find(|(a, b)| *a >= set.len() || *b >= set.len()) {
        return Err(Error::Validation(format!(
            "base order on `{}` mentions indices ({a},{b}) outside the set",
            set.name()
        )));
    }
    for a in 0..set.len() {
        if !pairs.contains(&(a, a)) {
            return Err(Error::Validation(format!(
                "base order on `{}` is not reflexive at `{}`",
                set.name(),
                set.element(a)
            )));
        }
    }
    for &(a, b) in pairs {
        for &(b2, c) in pairs {
            if b == b2 && !pairs.contains(&(a, c)) {
                return Err(Error::Validation(format!(
                    "base order on `{}` is not transitive: {} <= {} <= {}",
                    set.name(),
                    set.element(a),
                    set.element(b),
                    set.element(c)
                )));
            }
        }
    }
    Ok(())
}

fn leq_kind(f: &Functor, kind: &OrderKind, carrier: &Carrier, u: &FValue, v: &FValue) -> Result<bool> {
    match kind {
        OrderKind::Equality => Ok(u == v),
        OrderKind::PowSubset => match (u, v) {
            (FValue::Set(a), FValue::Set(b)) => Ok(a.is_subset(b)),
            _ => Err(Error::ShapeMismatch("subset order compares sets only".into())),
        },
        OrderKind::PowSupset => match (u, v) {
            (FValue::Set(a), FValue::Set(b)) => Ok(b.is_subset(a)),
            _ => Err(Error::ShapeMismatch("superset order compares sets only".into())),
        },
        OrderKind::Structural(base) => Ok(base.leq(f, u, v)),
        OrderKind::Opposite(inner) => leq_kind(f, inner, carrier, v, u),
        OrderKind::Extensional(tables) => {
            let table = tables.iter().find(|t| *t.carrier == *carrier).ok_or_else(|| {
                Error::Config(format!("extensional order is not declared for carrier `{}`", carrier.name()))
            })?;
            Ok(table.pairs.contains(&(u.clone(), v.clone())))
        }
    }
}

/// Reflexive-transitive closure of `pairs` on `{0..n}`.
pub fn preorder_closure(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> BTreeSet<(usize, usize)> {
    let mut m = vec![vec![false; n]; n];
    for (a, b) in pairs {
        m[a][b] = true;
    }
    for (a, row) in m.iter_mut().enumerate() {
        row[a] = true;
    }
    for k in 0..n {
        let via = m[k].clone();
        for row in m.iter_mut().filter(|row| row[k]) {
            for (cell, &reach) in row.iter_mut().zip(&via) {
                *cell |= reach;
            }
        }
    }
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| m[i][j]).collect()
}
