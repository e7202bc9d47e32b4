use std::hint::black_box;
use std::sync::Arc;

use coalsim::harness::random_value;
use coalsim::logic::{eval, parse_formula};
use coalsim::simulation::{largest_bisimulation, largest_simulation};
use coalsim::{Carrier, Coalgebra, Functor, FunctorExpr, OrderSpec, PredEnv, Predicate, SetTable, DEFAULT_GUARD};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn functor(expr: FunctorExpr) -> Arc<Functor> {
    let sets = SetTable::new().with("A", ["a1", "a2", "a3"]).unwrap();
    Arc::new(expr.resolve(&sets).unwrap())
}

fn coalgebra(f: &Arc<Functor>, name: &str, n: usize, rng: &mut ChaCha8Rng) -> Coalgebra {
    let states = Arc::new(Carrier::numbered(name, "s", n));
    let map = (0..n).map(|_| random_value(f, n, rng)).collect();
    Coalgebra::new(states, f.clone(), map).unwrap()
}

fn labelled_pow() -> Arc<Functor> {
    functor(FunctorExpr::prod(FunctorExpr::constant("A"), FunctorExpr::pow(FunctorExpr::Id)))
}

fn bisimulation(c: &mut Criterion) {
    let f = labelled_pow();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut group = c.benchmark_group("largest_bisimulation");
    for n in [4, 8, 16] {
        let (l, r) = (coalgebra(&f, "c", n, &mut rng), coalgebra(&f, "d", n, &mut rng));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| largest_bisimulation(black_box(&l), black_box(&r)).unwrap())
        });
    }
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let f = functor(FunctorExpr::pow(FunctorExpr::Id));
    let orders = [("subset", OrderSpec::pow_subset(f.clone()).unwrap()), ("equality", OrderSpec::equality(f.clone()))];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut group = c.benchmark_group("largest_simulation");
    for n in [4, 8] {
        let (l, r) = (coalgebra(&f, "c", n, &mut rng), coalgebra(&f, "d", n, &mut rng));
        for (name, ord) in &orders {
            group.bench_with_input(BenchmarkId::new(*name, n), &n, |b, _| {
                b.iter(|| largest_simulation(black_box(&l), black_box(&r), ord, DEFAULT_GUARD).unwrap())
            });
        }
    }
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let f = labelled_pow();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let formulas = ["G P", "F (P & X Q)", "P U (Q & G !P)"];
    let mut group = c.benchmark_group("eval");
    for n in [8, 32] {
        let coalg = coalgebra(&f, "c", n, &mut rng);
        let mut pick = || Predicate::new(coalg.states().clone(), (0..n).filter(|_| rng.gen_bool(0.5))).unwrap();
        let env = PredEnv::new().with_predicate("P", pick()).with_predicate("Q", pick());
        for src in formulas {
            let phi = parse_formula(src).unwrap();
            group.bench_with_input(BenchmarkId::new(src, n), &n, |b, _| {
                b.iter(|| eval(&coalg, black_box(&phi), &env, None).unwrap())
            });
        }
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let cases = [
        ("pow-id", FunctorExpr::pow(FunctorExpr::Id)),
        ("exp-pow", FunctorExpr::exp(FunctorExpr::pow(FunctorExpr::Id), "A")),
        ("seq-id", FunctorExpr::seq(FunctorExpr::Id)),
    ];
    let x = Carrier::numbered("X", "x", 3);
    let mut group = c.benchmark_group("enumerate_values");
    for (name, expr) in cases {
        let f = functor(expr);
        group.bench_function(name, |b| b.iter(|| f.enumerate_values(black_box(&x), DEFAULT_GUARD).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bisimulation, simulation, evaluation, enumeration);
criterion_main!(benches);
