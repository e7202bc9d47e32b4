#![allow(dead_code)]

use std::sync::Arc;

use coalsim::harness::random_value;
use coalsim::{Carrier, Coalgebra, Functor, FunctorExpr, Predicate, Relation, SetTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GUARD: u128 = coalsim::DEFAULT_GUARD;

pub fn sets() -> SetTable {
    SetTable::new()
        .with("A", ["a1", "a2"])
        .and_then(|s| s.with("L", ["l1", "l2"]))
        .and_then(|s| s.with("AP", ["p", "q"]))
        .unwrap()
}

/// Every functor of depth at most 2 over the constant and exponent `A`.
pub fn depth_two_pool() -> Vec<FunctorExpr> {
    let leaves = [FunctorExpr::Id, FunctorExpr::constant("A")];
    let mut pool = leaves.to_vec();
    for l in &leaves {
        pool.push(FunctorExpr::pow(l.clone()));
        pool.push(FunctorExpr::seq(l.clone()));
        pool.push(FunctorExpr::exp(l.clone(), "A"));
        for r in &leaves {
            pool.push(FunctorExpr::prod(l.clone(), r.clone()));
            pool.push(FunctorExpr::coprod(l.clone(), r.clone()));
        }
    }
    pool
}

pub fn pool_without_seq() -> Vec<FunctorExpr> {
    depth_two_pool().into_iter().filter(|e| !matches!(e, FunctorExpr::Seq(_))).collect()
}

pub fn functor(expr: &FunctorExpr) -> Arc<Functor> {
    Arc::new(expr.resolve(&sets()).unwrap())
}

pub fn carrier(name: &str, prefix: &str, n: usize) -> Arc<Carrier> {
    Arc::new(Carrier::numbered(name, prefix, n))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_coalgebra<R: Rng>(f: &Arc<Functor>, states: Arc<Carrier>, rng: &mut R) -> Coalgebra {
    let map = (0..states.len()).map(|_| random_value(f, states.len(), rng)).collect();
    Coalgebra::new(states, f.clone(), map).unwrap()
}

pub fn random_relation<R: Rng>(x: &Arc<Carrier>, y: &Arc<Carrier>, density: f64, rng: &mut R) -> Relation {
    Relation::full(x.clone(), y.clone()).filter(|_, _| rng.gen_bool(density))
}

pub fn random_subset<R: Rng>(x: &Arc<Carrier>, rng: &mut R) -> Predicate {
    Predicate::new(x.clone(), (0..x.len()).filter(|_| rng.gen_bool(0.5))).unwrap()
}
