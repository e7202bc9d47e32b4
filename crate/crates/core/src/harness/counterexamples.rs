use std::sync::Arc;

use super::{Assertion, SuiteReport, Violation};
use crate::coalgebra::Coalgebra;
use crate::description::SystemDoc;
use crate::error::Result;
use crate::functor::{Carrier, FValue, FunctorExpr, SetTable, DEFAULT_GUARD};
use crate::lifting::{Predicate, Relation};
use crate::logic::{eval, image_formula, inverse_image, Direction, Formula, PredEnv, RelRef};
use crate::order::OrderSpec;
use crate::simulation::{is_bisimulation, is_invariant, is_simulation};

fn pow_coalgebra(name: &str, prefix: &str, succ: &[&[usize]]) -> Result<Coalgebra> {
    let f = Arc::new(FunctorExpr::pow(FunctorExpr::Id).resolve(&SetTable::new())?);
    let states = Arc::new(Carrier::numbered(name, prefix, succ.len()));
    Coalgebra::new(states, f, succ.iter().map(|s| FValue::state_set(s.iter().copied())).collect())
}

struct Recorder {
    name: &'static str,
    doc: SystemDoc,
    assertions: Vec<Assertion>,
    violations: Vec<Violation>,
}

impl Recorder {
    fn new(
        name: &'static str,
        c: &Coalgebra,
        d: &Coalgebra,
        r: &Relation,
        order: &OrderSpec,
        p: &Predicate,
        phi: &Formula,
    ) -> Self {
        let mut doc = SystemDoc::new(&SetTable::new(), c.functor());
        doc.add_coalgebra(c);
        doc.add_coalgebra(d);
        doc.add_relation("R", r);
        doc.add_order("ord", order);
        doc.add_predicate("P", p);
        doc.add_formula("phi", phi);
        Recorder { name, doc, assertions: Vec::new(), violations: Vec::new() }
    }

    fn assert(&mut self, label: &str, holds: bool) {
        self.assertions.push(Assertion { label: label.to_string(), holds });
        if !holds {
            self.violations.push(Violation {
                trial: 0,
                description: format!("expected: {label}"),
                states: None,
                check: None,
                system: Some(self.doc.clone()),
            });
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            suite: self.name.to_string(),
            seed: None,
            trials_run: 1,
            vacuous_trials: 0,
            checks: self.assertions.len(),
            assertions: self.assertions,
            violations: self.violations,
            notes: Vec::new(),
        }
    }
}

/// The superset-order simulation along which `○` is not reflected.
///
/// `c(x1) = {x1, x2}`, `c(x2) = {x2}`, `d(y1) = {y2}`, `d(y2) = {y2}`,
/// `R = {(x1, y2)}`, `u ≤ v` iff `v ⊆ u`, and `φ = ○P` with `P = {y2}`.
pub fn counterexample_next() -> Result<SuiteReport> {
    let c = pow_coalgebra("c", "x", &[&[0, 1], &[1]])?;
    let d = pow_coalgebra("d", "y", &[&[1], &[1]])?;
    let r = Relation::from_names(c.states().clone(), d.states().clone(), [("x1", "y2")])?;
    let sup = OrderSpec::pow_supset(c.functor_arc().clone())?;
    let p = Predicate::from_names(d.states().clone(), ["y2"])?;
    let phi = Formula::next(Formula::pred("P"));
    let inv = image_formula(&phi, &RelRef::new("R"), Direction::Inverse)?;
    let env = PredEnv::new().with_predicate("P", p.clone()).with_relation("R", r.clone());
    let mut rec = Recorder::new("counterexample-next", &c, &d, &r, &sup, &p, &phi);

    rec.assert(
        "R = {(x1,y2)} is a simulation for the superset order",
        is_simulation(&c, &d, &sup, &r, DEFAULT_GUARD)?.holds,
    );
    rec.assert("y2 satisfies X P with P = {y2}", eval(&d, &phi, &env, None)?.contains(1));
    rec.assert("R^-1 {y2} = {x1}", inverse_image(&r, &p)?.names() == ["x1"]);
    rec.assert("x1 does not satisfy X R^-1 P", !eval(&c, &inv, &env, None)?.contains(0));

    rec.assert("R is not a bisimulation", !is_bisimulation(&c, &d, &r)?.holds);
    let sub = OrderSpec::pow_subset(c.functor_arc().clone())?;
    rec.assert("with the subset order R is not a simulation", !is_simulation(&c, &d, &sub, &r, DEFAULT_GUARD)?.holds);
    let c_fixed = pow_coalgebra("c", "x", &[&[0], &[1]])?;
    rec.assert(
        "with c(x1) = {x1} the property is reflected at (x1,y2)",
        is_simulation(&c_fixed, &d, &sup, &r, DEFAULT_GUARD)?.holds && eval(&c_fixed, &inv, &env, None)?.contains(0),
    );
    Ok(rec.finish())
}

/// The subset-order simulation along which `◇` is not reflected.
///
/// `c(x1) = {x1}`, `c(x2) = {x2}`, `d(y1) = {y1, y2}`, `d(y2) = {y2}`,
/// `R = {(x1, y1)}`, `u ≤ v` iff `u ⊆ v`, and `φ = ◇P` with `P = {y2}`.
pub fn counterexample_eventually() -> Result<SuiteReport> {
    let c = pow_coalgebra("c", "x", &[&[0], &[1]])?;
    let d = pow_coalgebra("d", "y", &[&[0, 1], &[1]])?;
    let r = Relation::from_names(c.states().clone(), d.states().clone(), [("x1", "y1")])?;
    let sub = OrderSpec::pow_subset(c.functor_arc().clone())?;
    let p = Predicate::from_names(d.states().clone(), ["y2"])?;
    let phi = Formula::eventually(Formula::pred("P"));
    let rel = RelRef::new("R");
    let inv = image_formula(&phi, &rel, Direction::Inverse)?;
    let env = PredEnv::new().with_predicate("P", p.clone()).with_relation("R", r.clone());
    let mut rec = Recorder::new("counterexample-eventually", &c, &d, &r, &sub, &p, &phi);

    let down_closed = [c.states(), d.states()]
        .into_iter()
        .map(|x| sub.is_down_closed(x, DEFAULT_GUARD).map(|v| v.holds()))
        .collect::<Result<Vec<_>>>()?;
    rec.assert("the subset order is down-closed", down_closed.iter().all(|&b| b));
    rec.assert(
        "R = {(x1,y1)} is a simulation for the subset order",
        is_simulation(&c, &d, &sub, &r, DEFAULT_GUARD)?.holds,
    );
    rec.assert("y1 satisfies F P with P = {y2}", eval(&d, &phi, &env, None)?.contains(0));
    rec.assert(
        "R^-1 {y2} is empty and x1 does not satisfy F R^-1 P",
        inverse_image(&r, &p)?.is_empty() && !eval(&c, &inv, &env, None)?.contains(0),
    );
    rec.assert("{x1} is an invariant", is_invariant(&c, &Predicate::from_names(c.states().clone(), ["x1"])?)?.holds);

    let mut reflected = true;
    for psi in box_fragment(2) {
        let holds_y = eval(&d, &psi, &env, None)?.contains(0);
        let holds_x = eval(&c, &image_formula(&psi, &rel, Direction::Inverse)?, &env, None)?.contains(0);
        reflected &= !holds_y || holds_x;
    }
    rec.assert("every formula over P built from or, and, X, G up to depth 2 is reflected at (x1,y1)", reflected);
    Ok(rec.finish())
}

/// All formulas over the single predicate `P` built from `∨ ∧ ○ □` with
/// nesting depth at most `depth`.
fn box_fragment(depth: usize) -> Vec<Formula> {
    let mut all = vec![Formula::pred("P")];
    for _ in 0..depth {
        let prev = all.clone();
        for a in &prev {
            all.push(Formula::next(a.clone()));
            all.push(Formula::always(a.clone()));
            for b in &prev {
                all.push(Formula::and(a.clone(), b.clone()));
                all.push(Formula::or(a.clone(), b.clone()));
            }
        }
        all.sort_by_key(|f| f.to_string());
        all.dedup();
    }
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_counterexamples_reproduce() {
        for report in [counterexample_next().unwrap(), counterexample_eventually().unwrap()] {
            assert!(report.passed(), "{report}");
            assert!(report.assertions.iter().all(|a| a.holds));
        }
    }

    #[test]
    fn fragment_enumeration_is_nontrivial() {
        let f = box_fragment(2);
        assert!(f.len() > 20);
        assert!(f.iter().all(|phi| phi.depth() <= 2));
    }
}
