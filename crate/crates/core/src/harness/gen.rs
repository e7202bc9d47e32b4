use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TrialConfig;
use crate::coalgebra::Coalgebra;
use crate::description::SystemDoc;
use crate::error::{Error, Result};
use crate::functor::{Carrier, FValue, Functor, SetTable};
use crate::lifting::{Predicate, Relation};
use crate::logic::{Connective, Formula};
use crate::order::{preorder_closure, OrderSpec};
use crate::simulation::{largest_bisimulation_within, largest_simulation_within};

/// The generator for trial `trial` of a run seeded with `seed`.
pub(crate) fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderFamily {
    Equality,
    PowSubset,
    PowSupset,
    /// An Order-class order with random base preorders.
    Structural,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Needs {
    Bisim,
    Sim(OrderFamily),
}

#[derive(Clone, Copy, Debug)]
pub enum Premise<'a> {
    Bisim,
    Sim(&'a OrderSpec),
}

/// Two coalgebras and a relation satisfying the requested premise.
#[derive(Clone, Debug)]
pub struct Instance {
    pub sets: SetTable,
    pub functor: Arc<Functor>,
    pub c: Coalgebra,
    pub d: Coalgebra,
    pub relation: Relation,
    pub order: Option<OrderSpec>,
}

impl Instance {
    /// The instance as a system document with the relation named `R` and
    /// the order (if any) named `ord`.
    pub fn to_doc(&self) -> SystemDoc {
        let mut doc = SystemDoc::new(&self.sets, &self.functor);
        doc.add_coalgebra(&self.c);
        doc.add_coalgebra(&self.d);
        doc.add_relation("R", &self.relation);
        if let Some(ord) = &self.order {
            doc.add_order("ord", ord);
        }
        doc
    }
}

pub(crate) fn resolve_pool(cfg: &TrialConfig) -> Result<(SetTable, Vec<Arc<Functor>>)> {
    cfg.validate()?;
    let mut sets = SetTable::new();
    for (name, elements) in &cfg.sets {
        sets.declare(name, elements.iter().map(String::as_str))?;
    }
    let pool = cfg.functor_pool.iter().map(|e| e.resolve(&sets).map(Arc::new)).collect::<Result<Vec<_>>>()?;
    Ok((sets, pool))
}

fn supports(f: &Functor, family: OrderFamily) -> bool {
    match family {
        OrderFamily::Equality => true,
        OrderFamily::PowSubset | OrderFamily::PowSupset => matches!(f, Functor::Pow(_)),
        OrderFamily::Structural => !f.contains_seq(),
    }
}

/// Draw an instance from the configured pool.
pub fn gen_instance<R: Rng + ?Sized>(cfg: &TrialConfig, needs: Needs, rng: &mut R) -> Result<Instance> {
    let (sets, pool) = resolve_pool(cfg)?;
    let candidates: Vec<&Arc<Functor>> = match needs {
        Needs::Bisim => pool.iter().collect(),
        Needs::Sim(family) => pool.iter().filter(|f| supports(f, family)).collect(),
    };
    let functor =
        (*candidates.choose(rng).ok_or_else(|| Error::Config(format!("no functor in the pool supports {needs:?}")))?)
            .clone();
    match needs {
        Needs::Bisim => gen_instance_for(cfg, &sets, &functor, Premise::Bisim, rng),
        Needs::Sim(family) => {
            let ord = family_order(&functor, family, rng)?;
            gen_instance_for(cfg, &sets, &functor, Premise::Sim(&ord), rng)
        }
    }
}

pub(crate) fn family_order<R: Rng + ?Sized>(
    functor: &Arc<Functor>,
    family: OrderFamily,
    rng: &mut R,
) -> Result<OrderSpec> {
    match family {
        OrderFamily::Equality => Ok(OrderSpec::equality(functor.clone())),
        OrderFamily::PowSubset => OrderSpec::pow_subset(functor.clone()),
        OrderFamily::PowSupset => OrderSpec::pow_supset(functor.clone()),
        OrderFamily::Structural => random_structural(functor, rng),
    }
}

/// An Order-class order with an independent random preorder on each
/// constant set.
pub(crate) fn random_structural<R: Rng + ?Sized>(functor: &Arc<Functor>, rng: &mut R) -> Result<OrderSpec> {
    let base = functor
        .referenced_sets()
        .iter()
        .map(|(name, set)| (name.clone(), random_preorder(set.len(), rng)))
        .collect::<BTreeMap<_, _>>();
    OrderSpec::build_order_class(functor.clone(), base)
}

pub(crate) fn random_preorder<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BTreeSet<(usize, usize)> {
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(0.3) {
                pairs.push((a, b));
            }
        }
    }
    preorder_closure(n, pairs)
}

/// Two random coalgebras `c` and `d` over `functor` and a relation between
/// them meeting `premise`: the largest (bi)simulation inside a random
/// starting relation.
pub fn gen_instance_for<R: Rng + ?Sized>(
    cfg: &TrialConfig,
    sets: &SetTable,
    functor: &Arc<Functor>,
    premise: Premise<'_>,
    rng: &mut R,
) -> Result<Instance> {
    let n = rng.gen_range(1..=cfg.max_states);
    let c = random_coalgebra(functor, Arc::new(Carrier::numbered("c", "x", n)), rng)?;
    let copy = rng.gen_bool(0.7);
    let d = if copy {
        // A renamed copy of c with at most one state rewired, so that
        // related pairs survive refinement more often.
        let states = Arc::new(Carrier::numbered("d", "y", n));
        let mut map = c.structures().to_vec();
        if rng.gen_bool(0.5) {
            let at = rng.gen_range(0..n);
            map[at] = random_value(functor, n, rng);
        }
        Coalgebra::new(states, functor.clone(), map)?
    } else {
        let m = rng.gen_range(1..=cfg.max_states);
        random_coalgebra(functor, Arc::new(Carrier::numbered("d", "y", m)), rng)?
    };
    // For a copy the diagonal is always offered, so refinement has a
    // nontrivial candidate to keep.
    let start =
        Relation::full(c.states().clone(), d.states().clone()).filter(|x, y| (copy && x == y) || rng.gen_bool(0.5));
    let (relation, order) = match premise {
        Premise::Bisim => (largest_bisimulation_within(&c, &d, &start)?, None),
        Premise::Sim(ord) => (largest_simulation_within(&c, &d, ord, &start, cfg.guard)?, Some(ord.clone())),
    };
    Ok(Instance { sets: sets.clone(), functor: functor.clone(), c, d, relation, order })
}

fn random_coalgebra<R: Rng + ?Sized>(functor: &Arc<Functor>, states: Arc<Carrier>, rng: &mut R) -> Result<Coalgebra> {
    let map = (0..states.len()).map(|_| random_value(functor, states.len(), rng)).collect();
    Coalgebra::new(states, functor.clone(), map)
}

/// A random element of `F(X)` for `|X| = n ≥ 1`.
pub fn random_value<R: Rng + ?Sized>(f: &Functor, n: usize, rng: &mut R) -> FValue {
    match f {
        Functor::Id => FValue::State(rng.gen_range(0..n)),
        Functor::Const(set) => FValue::Const(rng.gen_range(0..set.len())),
        Functor::Prod(l, r) => FValue::pair(random_value(l, n, rng), random_value(r, n, rng)),
        Functor::Coprod(l, r) => {
            if rng.gen_bool(0.5) {
                FValue::Inl(Box::new(random_value(l, n, rng)))
            } else {
                FValue::Inr(Box::new(random_value(r, n, rng)))
            }
        }
        Functor::Exp(base, exponent) => FValue::Func((0..exponent.len()).map(|_| random_value(base, n, rng)).collect()),
        Functor::Pow(base) => match **base {
            Functor::Id => FValue::state_set((0..n).filter(|_| rng.gen_bool(0.4))),
            _ => {
                let k = rng.gen_range(0..=3);
                FValue::set((0..k).map(|_| random_value(base, n, rng)))
            }
        },
        Functor::Seq(base, max_len) => {
            let len = rng.gen_range(0..=*max_len);
            FValue::List((0..len).map(|_| random_value(base, n, rng)).collect())
        }
    }
}

pub fn random_predicate<R: Rng + ?Sized>(carrier: &Arc<Carrier>, rng: &mut R) -> Predicate {
    Predicate::new(carrier.clone(), (0..carrier.len()).filter(|_| rng.gen_bool(0.5)))
        .expect("indices lie in the carrier")
}

fn grow<R: Rng + ?Sized>(ops: &[Connective], depth: usize, leaves: &[Formula], rng: &mut R) -> Formula {
    if depth == 0 || ops.is_empty() || rng.gen_bool(0.25) {
        return leaves.choose(rng).expect("at least one leaf").clone();
    }
    let op = *ops.choose(rng).expect("nonempty");
    let args = (0..op.arity()).map(|_| grow(ops, depth - 1, leaves, rng)).collect();
    Formula::apply(op, args)
}

/// A random formula of depth at most `depth` built from `ops` over
/// `leaves`, using every connective in `required`.
pub fn random_formula<R: Rng + ?Sized>(
    ops: &BTreeSet<Connective>,
    required: &BTreeSet<Connective>,
    depth: usize,
    leaves: &[Formula],
    rng: &mut R,
) -> Formula {
    let ops: Vec<Connective> = ops.iter().copied().collect();
    for _ in 0..200 {
        let f = grow(&ops, depth, leaves, rng);
        if required.is_subset(&f.connectives()) {
            return f;
        }
    }
    let mut f = leaves.choose(rng).expect("at least one leaf").clone();
    for &op in required {
        let mut args = vec![f];
        while args.len() < op.arity() {
            args.push(leaves.choose(rng).expect("at least one leaf").clone());
        }
        f = Formula::apply(op, args);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Suite;
    use crate::simulation::{is_bisimulation, is_simulation};

    #[test]
    fn premises_hold_by_construction() {
        let cfg = TrialConfig::for_suite(Suite::SimDown, 7, 1);
        for trial in 0..40 {
            let mut rng = trial_rng(7, trial);
            let inst = gen_instance(&cfg, Needs::Bisim, &mut rng).unwrap();
            assert!(is_bisimulation(&inst.c, &inst.d, &inst.relation).unwrap().holds);
            for family in [OrderFamily::PowSubset, OrderFamily::PowSupset, OrderFamily::Structural] {
                let inst = gen_instance(&cfg, Needs::Sim(family), &mut rng).unwrap();
                let ord = inst.order.as_ref().unwrap();
                assert!(is_simulation(&inst.c, &inst.d, ord, &inst.relation, cfg.guard).unwrap().holds);
            }
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = TrialConfig::for_suite(Suite::Bisim, 99, 1);
        let a = gen_instance(&cfg, Needs::Bisim, &mut trial_rng(99, 3)).unwrap();
        let b = gen_instance(&cfg, Needs::Bisim, &mut trial_rng(99, 3)).unwrap();
        assert_eq!(a.to_doc(), b.to_doc());
    }

    #[test]
    fn nonempty_relations_occur() {
        let mut cfg = TrialConfig::for_suite(Suite::Bisim, 0, 1);
        cfg.functor_pool = vec![crate::functor::FunctorExpr::pow(crate::functor::FunctorExpr::Id)];
        cfg.max_states = 3;
        let nonempty = (0..100u64)
            .filter(|&seed| !gen_instance(&cfg, Needs::Bisim, &mut trial_rng(seed, 0)).unwrap().relation.is_empty())
            .count();
        assert!(nonempty > 0);
    }

    #[test]
    fn required_connectives_are_used() {
        let ops: BTreeSet<Connective> = Connective::ALL.into_iter().collect();
        let required = BTreeSet::from([Connective::Not, Connective::Until]);
        let leaves = [Formula::atom("p"), Formula::atom("q")];
        let mut rng = trial_rng(1, 0);
        for _ in 0..50 {
            let f = random_formula(&ops, &required, 3, &leaves, &mut rng);
            assert!(required.is_subset(&f.connectives()), "{f}");
            assert!(f.depth() <= 3);
        }
    }
}
