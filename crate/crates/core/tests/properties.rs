mod common;

use std::collections::{BTreeMap, BTreeSet};

use coalsim::harness::{gen_instance_for, random_formula, Premise, Suite, TrialConfig};
use coalsim::lifting::{pred_lift, rel_lift};
use coalsim::logic::{direct_image, eval, image_formula, inverse_image, next_set, Connective};
use coalsim::order::preorder_closure;
use coalsim::simulation::{
    is_bisimulation, is_invariant, is_simulation, largest_bisimulation, largest_bisimulation_within,
};
use coalsim::{Coalgebra, Direction, Formula, Functor, FunctorExpr, OrderSpec, PredEnv, Predicate, RelRef, Relation};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn negation_free() -> BTreeSet<Connective> {
    [Connective::And, Connective::Or, Connective::Next, Connective::Always, Connective::Eventually, Connective::Until]
        .into()
}

fn box_fragment() -> BTreeSet<Connective> {
    [Connective::Or, Connective::And, Connective::Next, Connective::Always].into()
}

fn leaves() -> Vec<Formula> {
    vec![Formula::pred("P"), Formula::pred("Q")]
}

fn bisim_instance(seed: u64, expr: &FunctorExpr) -> coalsim::harness::Instance {
    let cfg = TrialConfig::for_suite(Suite::Bisim, seed, 1);
    let mut rng = rng(seed);
    gen_instance_for(&cfg, &sets(), &functor(expr), Premise::Bisim, &mut rng).unwrap()
}

/// A random preorder on every constant set `f` uses.
fn random_base<R: Rng>(f: &Functor, rng: &mut R) -> BTreeMap<String, BTreeSet<(usize, usize)>> {
    f.referenced_sets()
        .into_iter()
        .map(|(name, set)| {
            let n = set.len();
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|_| rng.gen_bool(0.4)).collect();
            (name, preorder_closure(n, pairs))
        })
        .collect()
}

fn env_on(p: Predicate, q: Predicate, r: &Relation) -> PredEnv {
    PredEnv::new().with_predicate("P", p).with_predicate("Q", q).with_relation("R", r.clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relation_lifting_is_monotone(fi in 0..depth_two_pool().len(), n in 1..=3usize, m in 1..=3usize, seed in any::<u64>()) {
        let f = functor(&depth_two_pool()[fi]);
        let (x, y) = (carrier("X", "x", n), carrier("Y", "y", m));
        let mut rng = rng(seed);
        let r = random_relation(&x, &y, 0.4, &mut rng);
        let s = r.union(&random_relation(&x, &y, 0.3, &mut rng));
        let us = f.enumerate_values(&x, GUARD).unwrap();
        let vs = f.enumerate_values(&y, GUARD).unwrap();
        for u in &us {
            for v in &vs {
                if rel_lift(&f, &r, u, v).unwrap() {
                    prop_assert!(rel_lift(&f, &s, u, v).unwrap(), "{u} {v}");
                }
            }
        }
    }

    #[test]
    fn predicate_lifting_is_monotone(fi in 0..depth_two_pool().len(), n in 1..=3usize, seed in any::<u64>()) {
        let f = functor(&depth_two_pool()[fi]);
        let x = carrier("X", "x", n);
        let mut rng = rng(seed);
        let p = random_subset(&x, &mut rng);
        let q = p.union(&random_subset(&x, &mut rng));
        for u in f.enumerate_values(&x, GUARD).unwrap() {
            if pred_lift(&f, &p, &u).unwrap() {
                prop_assert!(pred_lift(&f, &q, &u).unwrap());
            }
        }
    }

    #[test]
    fn lifted_relations_transfer_lifted_predicates(fi in 0..depth_two_pool().len(), n in 1..=3usize, m in 1..=3usize, seed in any::<u64>()) {
        let f = functor(&depth_two_pool()[fi]);
        let (x, y) = (carrier("X", "x", n), carrier("Y", "y", m));
        let mut rng = rng(seed);
        let r = random_relation(&x, &y, 0.5, &mut rng);
        let p = random_subset(&y, &mut rng);
        let back = inverse_image(&r, &p).unwrap();
        for u in f.enumerate_values(&x, GUARD).unwrap() {
            for v in f.enumerate_values(&y, GUARD).unwrap() {
                if rel_lift(&f, &r, &u, &v).unwrap() && pred_lift(&f, &p, &v).unwrap() {
                    prop_assert!(pred_lift(&f, &back, &u).unwrap(), "{u} {v}");
                }
            }
        }
    }

    #[test]
    fn structural_orders_are_preorders_and_closed_both_ways(fi in 0..pool_without_seq().len(), n in 1..=2usize, seed in any::<u64>()) {
        let f = functor(&pool_without_seq()[fi]);
        let base = random_base(&f, &mut rng(seed));
        let ord = OrderSpec::build_order_class(f, base).unwrap();
        let x = carrier("X", "x", n);
        prop_assert!(ord.is_preorder(&x, GUARD).unwrap().holds());
        prop_assert!(ord.is_down_closed(&x, GUARD).unwrap().holds());
        prop_assert!(ord.is_up_closed(&x, GUARD).unwrap().holds());
    }

    #[test]
    fn largest_bisimulation_on_one_coalgebra_is_symmetric(fi in 0..depth_two_pool().len(), n in 1..=4usize, seed in any::<u64>()) {
        let f = functor(&depth_two_pool()[fi]);
        let c = random_coalgebra(&f, carrier("c", "x", n), &mut rng(seed));
        let r = largest_bisimulation(&c, &c).unwrap();
        for &(x, y) in r.pairs() {
            prop_assert!(r.contains(y, x));
        }
    }

    #[test]
    fn converse_of_a_bisimulation_is_a_bisimulation(fi in 0..6usize, seed in any::<u64>()) {
        let pool = TrialConfig::for_suite(Suite::Bisim, 0, 1).functor_pool;
        let inst = bisim_instance(seed, &pool[fi]);
        prop_assert!(is_bisimulation(&inst.d, &inst.c, &inst.relation.converse()).unwrap().holds);
    }

    #[test]
    fn converse_of_a_simulation_is_a_simulation_for_the_opposite_order(which in 0..3usize, seed in any::<u64>()) {
        let f = functor(&FunctorExpr::pow(FunctorExpr::Id));
        let ord = match which {
            0 => OrderSpec::pow_subset(f.clone()).unwrap(),
            1 => OrderSpec::pow_supset(f.clone()).unwrap(),
            _ => OrderSpec::equality(f.clone()),
        };
        let cfg = TrialConfig::for_suite(Suite::SimDown, seed, 1);
        let inst = gen_instance_for(&cfg, &sets(), &f, Premise::Sim(&ord), &mut rng(seed)).unwrap();
        prop_assert!(is_simulation(&inst.c, &inst.d, &ord, &inst.relation, GUARD).unwrap().holds);
        prop_assert!(is_simulation(&inst.d, &inst.c, &ord.opposite(), &inst.relation.converse(), GUARD).unwrap().holds);
    }

    #[test]
    fn union_of_bisimulations_is_a_bisimulation(fi in 0..6usize, seed in any::<u64>()) {
        let pool = TrialConfig::for_suite(Suite::Bisim, 0, 1).functor_pool;
        let inst = bisim_instance(seed, &pool[fi]);
        let mut rng = rng(seed ^ 0x5eed);
        let start = random_relation(inst.c.states(), inst.d.states(), 0.6, &mut rng);
        let other = largest_bisimulation_within(&inst.c, &inst.d, &start).unwrap();
        let union = inst.relation.union(&other);
        prop_assert!(is_bisimulation(&inst.c, &inst.d, &union).unwrap().holds);
    }

    #[test]
    fn always_is_a_fixed_point_and_eventually_its_dual(fi in 0..6usize, seed in any::<u64>()) {
        let pool = TrialConfig::for_suite(Suite::Bisim, 0, 1).functor_pool;
        let f = functor(&pool[fi]);
        let mut rng = rng(seed);
        let n = rng.gen_range(1..=4);
        let c = random_coalgebra(&f, carrier("c", "x", n), &mut rng);
        let x = c.states().clone();
        let env = env_on(random_subset(&x, &mut rng), random_subset(&x, &mut rng), &Relation::identity(x.clone()));
        let mut ops = negation_free();
        ops.insert(Connective::Not);
        let phi = random_formula(&ops, &BTreeSet::new(), 2, &leaves(), &mut rng);
        let sat = eval(&c, &phi, &env, None).unwrap();
        let always = eval(&c, &Formula::always(phi.clone()), &env, None).unwrap();
        prop_assert_eq!(&always, &sat.intersection(&next_set(&c, &always)));
        let eventually = eval(&c, &Formula::eventually(phi.clone()), &env, None).unwrap();
        let dual = eval(&c, &Formula::always(Formula::not(phi)), &env, None).unwrap().complement();
        prop_assert_eq!(eventually, dual);
    }

    #[test]
    fn until_is_the_least_fixed_point(fi in 0..6usize, seed in any::<u64>()) {
        let pool = TrialConfig::for_suite(Suite::Bisim, 0, 1).functor_pool;
        let f = functor(&pool[fi]);
        let mut rng = rng(seed);
        let n = rng.gen_range(1..=4);
        let c = random_coalgebra(&f, carrier("c", "x", n), &mut rng);
        let x = c.states().clone();
        let (p, q) = (random_subset(&x, &mut rng), random_subset(&x, &mut rng));
        let env = env_on(p.clone(), q.clone(), &Relation::identity(x.clone()));
        let s = eval(&c, &Formula::until(Formula::pred("P"), Formula::pred("Q")), &env, None).unwrap();
        let step = |t: &Predicate| q.union(&p.intersection(&next_set(&c, &t.complement()).complement()));
        prop_assert_eq!(&step(&s), &s);
        for t in Predicate::all_subsets(&x) {
            if step(&t) == t {
                prop_assert!(s.is_subset(&t), "smaller fixed point {}", t);
            }
        }
    }

    #[test]
    fn negation_free_connectives_are_monotone(fi in 0..6usize, seed in any::<u64>()) {
        let pool = TrialConfig::for_suite(Suite::Bisim, 0, 1).functor_pool;
        let f = functor(&pool[fi]);
        let mut rng = rng(seed);
        let n = rng.gen_range(1..=4);
        let c = random_coalgebra(&f, carrier("c", "x", n), &mut rng);
        let x = c.states().clone();
        let (p, q) = (random_subset(&x, &mut rng), random_subset(&x, &mut rng));
        let id = Relation::identity(x.clone());
        let small = env_on(p.clone(), q.clone(), &id);
        let large = env_on(p.union(&random_subset(&x, &mut rng)), q.union(&random_subset(&x, &mut rng)), &id);
        let phi = random_formula(&negation_free(), &BTreeSet::new(), 3, &leaves(), &mut rng);
        prop_assert!(eval(&c, &phi, &small, None).unwrap().is_subset(&eval(&c, &phi, &large, None).unwrap()), "{}", phi);
    }

    #[test]
    fn direct_image_equals_inverse_image_along_the_converse(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let phi = random_formula(&negation_free(), &BTreeSet::new(), 3, &leaves(), &mut rng);
        let r = RelRef::new("R");
        prop_assert_eq!(
            image_formula(&phi, &r, Direction::Direct).unwrap(),
            image_formula(&phi, &r.converse(), Direction::Inverse).unwrap()
        );
    }

    #[test]
    fn images_of_invariants_along_bisimulations_are_invariants(fi in 0..6usize, seed in any::<u64>()) {
        let pool = TrialConfig::for_suite(Suite::Bisim, 0, 1).functor_pool;
        let inst = bisim_instance(seed, &pool[fi]);
        let (c, d, r) = (&inst.c, &inst.d, &inst.relation);
        let mut rng = rng(seed);
        let q = largest_invariant(d, random_subset(d.states(), &mut rng));
        prop_assert!(is_invariant(c, &inverse_image(r, &q).unwrap()).unwrap().holds);
        let p = largest_invariant(c, random_subset(c.states(), &mut rng));
        prop_assert!(is_invariant(d, &direct_image(r, &p).unwrap()).unwrap().holds);
    }

    #[test]
    fn bisimulations_carry_negation_free_semantics_into_images(fi in 0..6usize, seed in any::<u64>()) {
        let pool = TrialConfig::for_suite(Suite::Bisim, 0, 1).functor_pool;
        let inst = bisim_instance(seed, &pool[fi]);
        let (c, d, r) = (&inst.c, &inst.d, &inst.relation);
        let mut rng = rng(seed);
        let phi = random_formula(&negation_free(), &BTreeSet::new(), 3, &leaves(), &mut rng);
        let rel = RelRef::new("R");

        let on_d = env_on(random_subset(d.states(), &mut rng), random_subset(d.states(), &mut rng), r);
        let lhs = inverse_image(r, &eval(d, &phi, &on_d, None).unwrap()).unwrap();
        let rhs = eval(c, &image_formula(&phi, &rel, Direction::Inverse).unwrap(), &on_d, None).unwrap();
        prop_assert!(lhs.is_subset(&rhs), "{} : {} vs {}", phi, lhs, rhs);

        let on_c = env_on(random_subset(c.states(), &mut rng), random_subset(c.states(), &mut rng), r);
        let lhs = direct_image(r, &eval(c, &phi, &on_c, None).unwrap()).unwrap();
        let rhs = eval(d, &image_formula(&phi, &rel, Direction::Direct).unwrap(), &on_c, None).unwrap();
        prop_assert!(lhs.is_subset(&rhs), "{} : {} vs {}", phi, lhs, rhs);
    }

    #[test]
    fn down_closed_simulations_reflect_invariants_and_the_box_fragment(structural in any::<bool>(), seed in any::<u64>()) {
        let f = functor(&FunctorExpr::pow(FunctorExpr::Id));
        let ord = if structural {
            OrderSpec::build_order_class(f.clone(), BTreeMap::new()).unwrap()
        } else {
            OrderSpec::pow_subset(f.clone()).unwrap()
        };
        let cfg = TrialConfig::for_suite(Suite::SimDown, seed, 1);
        let mut rng = rng(seed);
        let inst = gen_instance_for(&cfg, &sets(), &f, Premise::Sim(&ord), &mut rng).unwrap();
        let (c, d, r) = (&inst.c, &inst.d, &inst.relation);
        for x in [c.states(), d.states()] {
            prop_assert!(ord.is_down_closed(x, GUARD).unwrap().holds());
        }
        let q = largest_invariant(d, random_subset(d.states(), &mut rng));
        prop_assert!(is_invariant(c, &inverse_image(r, &q).unwrap()).unwrap().holds);

        let phi = random_formula(&box_fragment(), &BTreeSet::new(), 3, &leaves(), &mut rng);
        let env = env_on(random_subset(d.states(), &mut rng), random_subset(d.states(), &mut rng), r);
        let lhs = inverse_image(r, &eval(d, &phi, &env, None).unwrap()).unwrap();
        let rhs = eval(c, &image_formula(&phi, &RelRef::new("R"), Direction::Inverse).unwrap(), &env, None).unwrap();
        prop_assert!(lhs.is_subset(&rhs), "{}", phi);
    }

    #[test]
    fn related_structures_transfer_lifted_predicates(fi in 0..5usize, order_class in any::<bool>(), seed in any::<u64>()) {
        let pool = TrialConfig::for_suite(Suite::OrderClass, 0, 1).functor_pool;
        let f = functor(&pool[fi]);
        let mut rng = rng(seed);
        let ord = OrderSpec::build_order_class(f.clone(), random_base(&f, &mut rng)).unwrap();
        let cfg = TrialConfig::for_suite(Suite::OrderClass, seed, 1);
        let premise = if order_class { Premise::Sim(&ord) } else { Premise::Bisim };
        let inst = gen_instance_for(&cfg, &sets(), &f, premise, &mut rng).unwrap();
        let (c, d, r) = (&inst.c, &inst.d, &inst.relation);
        let p = random_subset(d.states(), &mut rng);
        let q = random_subset(c.states(), &mut rng);
        let back = inverse_image(r, &p).unwrap();
        let forth = direct_image(r, &q).unwrap();
        for &(x, y) in r.pairs() {
            if pred_lift(&f, &p, d.structure(y)).unwrap() {
                prop_assert!(pred_lift(&f, &back, c.structure(x)).unwrap());
            }
            if pred_lift(&f, &q, c.structure(x)).unwrap() {
                prop_assert!(pred_lift(&f, &forth, d.structure(y)).unwrap());
            }
        }
    }
}

/// The greatest invariant inside `p`: `⟦□P⟧`.
fn largest_invariant(c: &Coalgebra, p: Predicate) -> Predicate {
    let env = PredEnv::new().with_predicate("P", p);
    eval(c, &Formula::always(Formula::pred("P")), &env, None).unwrap()
}

#[test]
fn opposite_swaps_down_and_up_closure() {
    let pow = functor(&FunctorExpr::pow(FunctorExpr::Id));
    let pow_a = functor(&FunctorExpr::pow(FunctorExpr::constant("A")));
    let mut orders = Vec::new();
    for f in [&pow, &pow_a] {
        orders.push(OrderSpec::equality(f.clone()));
        orders.push(OrderSpec::pow_subset(f.clone()).unwrap());
        orders.push(OrderSpec::pow_supset(f.clone()).unwrap());
        orders.push(OrderSpec::build_order_class(f.clone(), BTreeMap::new()).unwrap());
    }
    for n in 0..=3 {
        let x = carrier("X", "x", n);
        for ord in &orders {
            let op = ord.opposite();
            assert_eq!(ord.is_down_closed(&x, GUARD).unwrap().holds(), op.is_up_closed(&x, GUARD).unwrap().holds());
            assert_eq!(ord.is_up_closed(&x, GUARD).unwrap().holds(), op.is_down_closed(&x, GUARD).unwrap().holds());
        }
    }
}

#[test]
fn subset_is_down_closed_and_superset_up_closed_on_state_powersets() {
    let f = functor(&FunctorExpr::pow(FunctorExpr::Id));
    let sub = OrderSpec::pow_subset(f.clone()).unwrap();
    let sup = OrderSpec::pow_supset(f).unwrap();
    for n in 1..=3 {
        let x = carrier("X", "x", n);
        assert!(sub.is_down_closed(&x, GUARD).unwrap().holds());
        assert!(!sub.is_up_closed(&x, GUARD).unwrap().holds());
        assert!(sup.is_up_closed(&x, GUARD).unwrap().holds());
        assert!(!sup.is_down_closed(&x, GUARD).unwrap().holds());
    }
}

#[test]
fn structural_order_on_state_powersets_is_equality() {
    let f = functor(&FunctorExpr::pow(FunctorExpr::Id));
    let ord = OrderSpec::build_order_class(f.clone(), BTreeMap::new()).unwrap();
    for n in 0..=3 {
        let x = carrier("X", "x", n);
        let values = f.enumerate_values(&x, GUARD).unwrap();
        for u in &values {
            for v in &values {
                assert_eq!(ord.leq(&x, u, v).unwrap(), u == v, "{u} {v}");
            }
        }
    }
}

#[test]
fn empty_relation_is_both_bisimulation_and_simulation() {
    let f = functor(&FunctorExpr::pow(FunctorExpr::Id));
    let c = random_coalgebra(&f, carrier("c", "x", 3), &mut rng(1));
    let d = random_coalgebra(&f, carrier("d", "y", 2), &mut rng(2));
    let r = Relation::empty(c.states().clone(), d.states().clone());
    assert!(is_bisimulation(&c, &d, &r).unwrap().holds);
    assert!(is_simulation(&c, &d, &OrderSpec::pow_subset(f).unwrap(), &r, GUARD).unwrap().holds);
}
