//! Bisimulation, invariant and simulation checks, and the greatest
//! (bi)simulation by iterated refinement.

use std::fmt;

use serde::Serialize;

use crate::coalgebra::Coalgebra;
use crate::error::{Error, Result};
use crate::lifting::{pred_lift_with, rel_lift_ordered, rel_lift_with, Predicate, Relation};
use crate::order::OrderSpec;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub left: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<String>,
    pub explanation: String,
}

/// Result of a closure check; `witness` is present iff `holds` is false.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckReport {
    fn pass() -> Self {
        CheckReport { holds: true, witness: None }
    }

    fn fail(left: &str, right: Option<&str>, explanation: String) -> Self {
        CheckReport {
            holds: false,
            witness: Some(Witness { left: left.to_string(), right: right.map(str::to_string), explanation }),
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "holds"),
            Some(w) => match &w.right {
                Some(r) => write!(f, "fails at ({}, {}): {}", w.left, r, w.explanation),
                None => write!(f, "fails at {}: {}", w.left, w.explanation),
            },
        }
    }
}

fn check_pair(c: &Coalgebra, d: &Coalgebra, r: &Relation) -> Result<()> {
    if c.functor() != d.functor() {
        return Err(Error::FunctorMismatch { left: c.functor().to_string(), right: d.functor().to_string() });
    }
    for (expected, found) in [(c.states(), r.domain()), (d.states(), r.codomain())] {
        if expected != found {
            return Err(Error::CarrierMismatch {
                expected: expected.name().to_string(),
                found: found.name().to_string(),
            });
        }
    }
    Ok(())
}

fn check_order(c: &Coalgebra, ord: &OrderSpec) -> Result<()> {
    if c.functor() != ord.functor() {
        return Err(Error::FunctorMismatch { left: c.functor().to_string(), right: ord.functor().to_string() });
    }
    Ok(())
}

/// `(x, y) ∈ R ⟹ (c(x), d(y)) ∈ Rel(F)(R)`.
pub fn is_bisimulation(c: &Coalgebra, d: &Coalgebra, r: &Relation) -> Result<CheckReport> {
    check_pair(c, d, r)?;
    let rel = |x, y| r.contains(x, y);
    for &(x, y) in r.pairs() {
        if !rel_lift_with(c.functor(), &rel, c.structure(x), d.structure(y)) {
            return Ok(CheckReport::fail(
                c.states().element(x),
                Some(d.states().element(y)),
                format!("{} and {} are not related by the lifted relation", c.show(x), d.show(y)),
            ));
        }
    }
    Ok(CheckReport::pass())
}

/// `x ∈ P ⟹ c(x) ∈ Pred(F)(P)`.
pub fn is_invariant(c: &Coalgebra, p: &Predicate) -> Result<CheckReport> {
    if c.states() != p.carrier() {
        return Err(Error::CarrierMismatch {
            expected: c.states().name().to_string(),
            found: p.carrier().name().to_string(),
        });
    }
    for &x in p.members() {
        if !pred_lift_with(c.functor(), &|s| p.contains(s), c.structure(x)) {
            return Ok(CheckReport::fail(
                c.states().element(x),
                None,
                format!("{} leaves the predicate {}", c.show(x), p),
            ));
        }
    }
    Ok(CheckReport::pass())
}

/// `(x, y) ∈ R ⟹ (c(x), d(y)) ∈ Rel_≤(F)(R)`.
pub fn is_simulation(c: &Coalgebra, d: &Coalgebra, ord: &OrderSpec, r: &Relation, guard: u128) -> Result<CheckReport> {
    check_pair(c, d, r)?;
    check_order(c, ord)?;
    for &(x, y) in r.pairs() {
        if !rel_lift_ordered(ord, r, c.structure(x), d.structure(y), guard)? {
            return Ok(CheckReport::fail(
                c.states().element(x),
                Some(d.states().element(y)),
                format!("no witness w with {} <= F(pi1)(w) and F(pi2)(w) <= {}", c.show(x), d.show(y)),
            ));
        }
    }
    Ok(CheckReport::pass())
}

/// Greatest fixed point below `start` of `R ↦ {(x,y) ∈ R | step(R, x, y)}`.
fn refine<S>(start: &Relation, mut step: S) -> Result<Relation>
where
    S: FnMut(&Relation, usize, usize) -> Result<bool>,
{
    let bound = start.domain().len() * start.codomain().len() + 1;
    let mut current = start.clone();
    for _ in 0..bound {
        let mut keep = Vec::with_capacity(current.len());
        for &(x, y) in current.pairs() {
            if step(&current, x, y)? {
                keep.push((x, y));
            }
        }
        if keep.len() == current.len() {
            return Ok(current);
        }
        current = Relation::new(current.domain().clone(), current.codomain().clone(), keep)?;
    }
    Err(Error::Internal(format!("refinement did not stabilise within {bound} rounds")))
}

/// The largest bisimulation between `c` and `d`.
pub fn largest_bisimulation(c: &Coalgebra, d: &Coalgebra) -> Result<Relation> {
    largest_bisimulation_within(c, d, &Relation::full(c.states().clone(), d.states().clone()))
}

/// The largest bisimulation contained in `start`.
pub fn largest_bisimulation_within(c: &Coalgebra, d: &Coalgebra, start: &Relation) -> Result<Relation> {
    check_pair(c, d, start)?;
    refine(start, |r, x, y| Ok(rel_lift_with(c.functor(), &|a, b| r.contains(a, b), c.structure(x), d.structure(y))))
}

/// The largest simulation between `c` and `d` under `ord`.
pub fn largest_simulation(c: &Coalgebra, d: &Coalgebra, ord: &OrderSpec, guard: u128) -> Result<Relation> {
    largest_simulation_within(c, d, ord, &Relation::full(c.states().clone(), d.states().clone()), guard)
}

/// The largest simulation under `ord` contained in `start`.
pub fn largest_simulation_within(
    c: &Coalgebra,
    d: &Coalgebra,
    ord: &OrderSpec,
    start: &Relation,
    guard: u128,
) -> Result<Relation> {
    check_pair(c, d, start)?;
    check_order(c, ord)?;
    refine(start, |r, x, y| rel_lift_ordered(ord, r, c.structure(x), d.structure(y), guard))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functor::{Carrier, FValue, FunctorExpr, SetTable, DEFAULT_GUARD};
    use std::sync::Arc;

    fn pow_coalgebra(name: &str, ids: &[&str], succ: &[&[usize]]) -> Coalgebra {
        let f = Arc::new(FunctorExpr::pow(FunctorExpr::Id).resolve(&SetTable::new()).unwrap());
        let x = Arc::new(Carrier::new(name, ids.iter().copied()).unwrap());
        let map = succ.iter().map(|s| FValue::state_set(s.iter().copied())).collect();
        Coalgebra::new(x, f, map).unwrap()
    }

    /// c(x1)={x1,x2}, c(x2)={x2}; d(y1)={y2}, d(y2)={y2}.
    fn first_counterexample() -> (Coalgebra, Coalgebra) {
        (pow_coalgebra("X", &["x1", "x2"], &[&[0, 1], &[1]]), pow_coalgebra("Y", &["y1", "y2"], &[&[1], &[1]]))
    }

    /// c(x1)={x1}, c(x2)={x2}; d(y1)={y1,y2}, d(y2)={y2}.
    fn second_counterexample() -> (Coalgebra, Coalgebra) {
        (pow_coalgebra("X", &["x1", "x2"], &[&[0], &[1]]), pow_coalgebra("Y", &["y1", "y2"], &[&[0, 1], &[1]]))
    }

    #[test]
    fn trivial_bisimulations() {
        let (c, d) = first_counterexample();
        assert!(is_bisimulation(&c, &c, &Relation::identity(c.states().clone())).unwrap().holds);
        assert!(is_bisimulation(&c, &d, &Relation::empty(c.states().clone(), d.states().clone())).unwrap().holds);
    }

    #[test]
    fn supset_simulation_is_not_a_bisimulation() {
        let (c, d) = first_counterexample();
        let r = Relation::from_names(c.states().clone(), d.states().clone(), [("x1", "y2")]).unwrap();
        let report = is_bisimulation(&c, &d, &r).unwrap();
        assert!(!report.holds);
        let w = report.witness.unwrap();
        assert_eq!((w.left.as_str(), w.right.as_deref()), ("x1", Some("y2")));

        let sup = OrderSpec::pow_supset(c.functor_arc().clone()).unwrap();
        assert!(is_simulation(&c, &d, &sup, &r, DEFAULT_GUARD).unwrap().holds);
        let sub = OrderSpec::pow_subset(c.functor_arc().clone()).unwrap();
        assert!(!is_simulation(&c, &d, &sub, &r, DEFAULT_GUARD).unwrap().holds);
    }

    #[test]
    fn subset_simulation_second_counterexample() {
        let (c, d) = second_counterexample();
        let r = Relation::from_names(c.states().clone(), d.states().clone(), [("x1", "y1")]).unwrap();
        let sub = OrderSpec::pow_subset(c.functor_arc().clone()).unwrap();
        assert!(is_simulation(&c, &d, &sub, &r, DEFAULT_GUARD).unwrap().holds);
    }

    #[test]
    fn invariants() {
        let (c, d) = second_counterexample();
        assert!(is_invariant(&c, &Predicate::full(c.states().clone())).unwrap().holds);
        assert!(is_invariant(&c, &Predicate::from_names(c.states().clone(), ["x1"]).unwrap()).unwrap().holds);
        let report = is_invariant(&d, &Predicate::from_names(d.states().clone(), ["y1"]).unwrap()).unwrap();
        assert!(!report.holds);
        assert_eq!(report.witness.unwrap().left, "y1");
    }

    #[test]
    fn largest_bisimulation_examples() {
        let single = pow_coalgebra("S", &["s"], &[&[0]]);
        let f = Arc::new(FunctorExpr::Id.resolve(&SetTable::new()).unwrap());
        let loop_id = Coalgebra::new(single.states().clone(), f, vec![FValue::State(0)]).unwrap();
        let r = largest_bisimulation(&loop_id, &loop_id).unwrap();
        assert_eq!(r.named_pairs(), vec![("s", "s")]);

        let (c, d) = first_counterexample();
        let r = largest_bisimulation(&c, &d).unwrap();
        assert!(r.contains(1, 1));
        assert!(is_bisimulation(&c, &d, &r).unwrap().holds);
    }

    #[test]
    fn functor_mismatch_is_an_error() {
        let (c, _) = first_counterexample();
        let f = Arc::new(FunctorExpr::Id.resolve(&SetTable::new()).unwrap());
        let d = Coalgebra::new(c.states().clone(), f, vec![FValue::State(0), FValue::State(1)]).unwrap();
        let r = Relation::identity(c.states().clone());
        assert!(matches!(is_bisimulation(&c, &d, &r), Err(Error::FunctorMismatch { .. })));
    }

    #[test]
    fn equality_simulation_is_bisimulation() {
        let (c, d) = second_counterexample();
        let eq = OrderSpec::equality(c.functor_arc().clone());
        assert_eq!(largest_simulation(&c, &d, &eq, DEFAULT_GUARD).unwrap(), largest_bisimulation(&c, &d).unwrap());
    }
}
