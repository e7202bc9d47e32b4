use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::gen::{family_order, random_preorder, resolve_pool, trial_rng};
use super::{
    gen_instance_for, random_formula, random_predicate, Instance, OrderFamily, Premise, PremiseDoc, Suite, SuiteReport,
    Transfer, TransferCheck, TrialConfig, Violation,
};
use crate::error::{Error, Result};
use crate::functor::{Carrier, Functor, SetTable};
use crate::logic::{Connective, Formula, PredEnv};
use crate::nat::{labelled_const, NatTrans};
use crate::order::{preorder_closure, OrderSpec};

/// Set whose elements serve as atomic propositions in the ν suites.
const AP_SET: &str = "AP";

#[derive(Default)]
struct TrialOutcome {
    checks: usize,
    vacuous: bool,
    violations: Vec<Violation>,
    probe_checks: usize,
    probe_failures: usize,
}

fn run_trials<F>(suite: Suite, cfg: &TrialConfig, body: F) -> Result<SuiteReport>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<TrialOutcome> + Sync,
{
    cfg.validate()?;
    let outcomes: Vec<Result<TrialOutcome>> =
        (0..cfg.trials).into_par_iter().map(|t| body(t, &mut trial_rng(cfg.seed, t))).collect();
    let mut report = SuiteReport {
        suite: suite.name().to_string(),
        seed: Some(cfg.seed),
        trials_run: 0,
        vacuous_trials: 0,
        checks: 0,
        assertions: Vec::new(),
        violations: Vec::new(),
        notes: Vec::new(),
    };
    let (mut probe_checks, mut probe_failures) = (0, 0);
    for outcome in outcomes {
        let o = outcome?;
        report.trials_run += 1;
        report.checks += o.checks;
        report.vacuous_trials += usize::from(o.vacuous);
        report.violations.extend(o.violations);
        probe_checks += o.probe_checks;
        probe_failures += o.probe_failures;
    }
    if probe_checks > 0 {
        report.notes.push(format!(
            "informational, not asserted: formulas with negation failed {probe_failures} of {probe_checks} transfer checks"
        ));
    }
    Ok(report)
}

/// Run `suite` with `cfg`.
pub fn run_suite(suite: Suite, cfg: &TrialConfig) -> Result<SuiteReport> {
    match suite {
        Suite::Bisim => suite_theorem_bisim(cfg),
        Suite::SimDown => suite_theorem_sim_down(cfg),
        Suite::SimUp => suite_theorem_sim_up(cfg),
        Suite::OrderClass => suite_theorem_order_class(cfg),
        Suite::ApBisim => suite_theorem_ap_bisim(cfg),
        Suite::ApNaturalDown => suite_theorem_ap_natural(cfg, Transfer::Reflect),
        Suite::ApNaturalUp => suite_theorem_ap_natural(cfg, Transfer::Preserve),
    }
}

/// Formulas over random predicates, checked along `inst.relation`.
#[allow(clippy::too_many_arguments)]
fn predicate_checks(
    cfg: &TrialConfig,
    inst: &Instance,
    premise: &PremiseDoc,
    transfers: &[Transfer],
    ops: &BTreeSet<Connective>,
    required: &BTreeSet<Connective>,
    trial: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, Vec<Violation>)> {
    let mut checks = 0;
    let mut violations = Vec::new();
    for _ in 0..cfg.formulas_per_trial {
        for &transfer in transfers {
            let (carrier, prefix) = match transfer {
                Transfer::Preserve => (inst.c.states(), "Q"),
                _ => (inst.d.states(), "P"),
            };
            let mut env = PredEnv::new().with_relation("R", inst.relation.clone());
            let mut leaves = Vec::new();
            let mut preds = Vec::new();
            for i in 1..=2 {
                let name = format!("{prefix}{i}");
                let p = random_predicate(carrier, rng);
                env.insert_predicate(&name, p.clone());
                leaves.push(Formula::Pred(name.clone()));
                preds.push((name, p));
            }
            let phi = random_formula(ops, required, cfg.formula_depth, &leaves, rng);
            let failures = super::transfer_failures(&inst.c, &inst.d, &inst.relation, "R", &phi, &env, None, transfer)?;
            checks += inst.relation.len();
            for f in failures {
                let mut doc = inst.to_doc();
                for (name, p) in &preds {
                    doc.add_predicate(name, p);
                }
                doc.add_formula("phi", &phi);
                violations.push(Violation {
                    trial,
                    description: f.detail,
                    states: Some((inst.c.states().element(f.x).to_string(), inst.d.states().element(f.y).to_string())),
                    check: Some(TransferCheck {
                        transfer,
                        premise: premise.clone(),
                        relation: "R".into(),
                        formula: "phi".into(),
                        nu: None,
                    }),
                    system: Some(doc),
                });
            }
        }
    }
    Ok((checks, violations))
}

/// Closure checks are a property of the carrier size, so their outcomes
/// are shared across trials.
#[derive(Default)]
struct ClosureCache(Mutex<HashMap<(String, usize, bool), Option<String>>>);

impl ClosureCache {
    fn check(&self, ord: &OrderSpec, carrier: &Arc<Carrier>, down: bool, guard: u128) -> Result<Option<String>> {
        let key = (format!("{} {:?}", ord.functor(), ord.kind()), carrier.len(), down);
        if let Some(hit) = self.0.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let verdict = if down { ord.is_down_closed(carrier, guard)? } else { ord.is_up_closed(carrier, guard)? };
        let result = verdict.witness().map(|w| w.to_string());
        self.0.lock().expect("cache lock").insert(key, result.clone());
        Ok(result)
    }
}

fn pick_functor<'a>(
    pool: &'a [Arc<Functor>],
    family: Option<OrderFamily>,
    rng: &mut ChaCha8Rng,
) -> Result<&'a Arc<Functor>> {
    let candidates: Vec<&Arc<Functor>> = pool
        .iter()
        .filter(|f| match family {
            None => true,
            Some(OrderFamily::PowSubset | OrderFamily::PowSupset) => matches!(***f, Functor::Pow(_)),
            Some(OrderFamily::Structural) => !f.contains_seq(),
            Some(OrderFamily::Equality) => true,
        })
        .collect();
    candidates.choose(rng).copied().ok_or_else(|| Error::Config(format!("no functor in the pool supports {family:?}")))
}

/// Bisimulations reflect and preserve negation-free formulas over
/// predicates.
pub fn suite_theorem_bisim(cfg: &TrialConfig) -> Result<SuiteReport> {
    let (sets, pool) = resolve_pool(cfg)?;
    ensure_fragment(cfg, &[Connective::Not, Connective::Implies])?;
    run_trials(Suite::Bisim, cfg, |trial, rng| {
        let functor = pick_functor(&pool, None, rng)?;
        let inst = gen_instance_for(cfg, &sets, functor, Premise::Bisim, rng)?;
        let (checks, violations) = predicate_checks(
            cfg,
            &inst,
            &PremiseDoc::Bisimulation,
            &[Transfer::Reflect, Transfer::Preserve],
            &cfg.operators,
            &cfg.required_operators,
            trial,
            rng,
        )?;
        Ok(TrialOutcome { checks, vacuous: inst.relation.is_empty(), violations, ..TrialOutcome::default() })
    })
}

fn ensure_fragment(cfg: &TrialConfig, excluded: &[Connective]) -> Result<()> {
    match excluded.iter().find(|c| cfg.operators.contains(c)) {
        Some(c) => Err(Error::Config(format!("connective {c:?} is outside this suite's fragment"))),
        None => Ok(()),
    }
}

fn ensure_within(cfg: &TrialConfig, allowed: &[Connective]) -> Result<()> {
    match cfg.operators.iter().find(|c| !allowed.contains(c)) {
        Some(c) => Err(Error::Config(format!("connective {c:?} is outside this suite's fragment"))),
        None => Ok(()),
    }
}

/// Simulations under down-closed orders reflect, and under up-closed
/// orders preserve, formulas built from `∨ ∧ ○ □`.
fn closed_order_suite(cfg: &TrialConfig, down: bool) -> Result<SuiteReport> {
    let (sets, pool) = resolve_pool(cfg)?;
    ensure_within(cfg, &[Connective::Or, Connective::And, Connective::Next, Connective::Always])?;
    let families = if down {
        [OrderFamily::PowSubset, OrderFamily::Equality, OrderFamily::Structural]
    } else {
        [OrderFamily::PowSupset, OrderFamily::Equality, OrderFamily::Structural]
    };
    let (suite, transfer, label) = if down {
        (Suite::SimDown, Transfer::Reflect, "down-closed")
    } else {
        (Suite::SimUp, Transfer::Preserve, "up-closed")
    };
    let cache = ClosureCache::default();
    run_trials(suite, cfg, |trial, rng| {
        let family = *families.choose(rng).expect("nonempty");
        let functor = pick_functor(&pool, Some(family), rng)?;
        let ord = family_order(functor, family, rng)?;
        let inst = gen_instance_for(cfg, &sets, functor, Premise::Sim(&ord), rng)?;
        for carrier in [inst.c.states(), inst.d.states()] {
            if let Some(w) = cache.check(&ord, carrier, down, cfg.guard)? {
                return Ok(TrialOutcome {
                    violations: vec![Violation {
                        trial,
                        description: format!("order drawn from the {label} pool is not {label}: {w}"),
                        states: None,
                        check: None,
                        system: Some(inst.to_doc()),
                    }],
                    ..TrialOutcome::default()
                });
            }
        }
        let (checks, violations) = predicate_checks(
            cfg,
            &inst,
            &PremiseDoc::Simulation { order: "ord".into() },
            &[transfer],
            &cfg.operators,
            &cfg.required_operators,
            trial,
            rng,
        )?;
        Ok(TrialOutcome { checks, vacuous: inst.relation.is_empty(), violations, ..TrialOutcome::default() })
    })
}

pub fn suite_theorem_sim_down(cfg: &TrialConfig) -> Result<SuiteReport> {
    closed_order_suite(cfg, true)
}

pub fn suite_theorem_sim_up(cfg: &TrialConfig) -> Result<SuiteReport> {
    closed_order_suite(cfg, false)
}

/// Simulations under Order-class orders reflect and preserve negation-free
/// formulas. Each trial also probes one formula with negation in both
/// directions; those results are tallied in the notes only.
pub fn suite_theorem_order_class(cfg: &TrialConfig) -> Result<SuiteReport> {
    let (sets, pool) = resolve_pool(cfg)?;
    ensure_fragment(cfg, &[Connective::Not, Connective::Implies])?;
    let mut probe_ops = cfg.operators.clone();
    probe_ops.insert(Connective::Not);
    let probe_required = BTreeSet::from([Connective::Not]);
    run_trials(Suite::OrderClass, cfg, |trial, rng| {
        let functor = pick_functor(&pool, Some(OrderFamily::Structural), rng)?;
        let ord = family_order(functor, OrderFamily::Structural, rng)?;
        let inst = gen_instance_for(cfg, &sets, functor, Premise::Sim(&ord), rng)?;
        let premise = PremiseDoc::Simulation { order: "ord".into() };
        let both = [Transfer::Reflect, Transfer::Preserve];
        let (checks, violations) =
            predicate_checks(cfg, &inst, &premise, &both, &cfg.operators, &cfg.required_operators, trial, rng)?;
        let probe_cfg = TrialConfig { formulas_per_trial: 1, ..cfg.clone() };
        let (probe_checks, probe) =
            predicate_checks(&probe_cfg, &inst, &premise, &both, &probe_ops, &probe_required, trial, rng)?;
        Ok(TrialOutcome {
            checks,
            vacuous: inst.relation.is_empty(),
            violations,
            probe_checks,
            probe_failures: probe.len(),
        })
    })
}

/// A natural transformation for `functor`: the Kripke projection or its
/// complement when the functor has the shape `P(AP) x G`, otherwise a
/// random labelling of the constant component.
fn random_nu(functor: &Arc<Functor>, sets: &SetTable, rng: &mut ChaCha8Rng) -> Result<NatTrans> {
    let ap = sets.get(AP_SET)?.clone();
    if NatTrans::kripke_proj(functor.clone(), ap.clone()).is_ok() {
        return if rng.gen_bool(0.5) {
            NatTrans::kripke_proj(functor.clone(), ap)
        } else {
            NatTrans::kripke_complement(functor.clone(), ap)
        };
    }
    let labelled = labelled_const(functor)
        .ok_or_else(|| Error::Config(format!("no natural transformation to P({AP_SET}) is available for {functor}")))?;
    let labels = (0..labelled.len()).map(|_| (0..ap.len()).filter(|_| rng.gen_bool(0.5)).collect()).collect();
    NatTrans::const_label(functor.clone(), ap, labels)
}

fn naturality_carriers() -> Vec<Arc<Carrier>> {
    (1..=3).map(|n| Arc::new(Carrier::numbered(format!("N{n}"), "n", n))).collect()
}

#[derive(Default)]
struct NaturalityCache(Mutex<HashMap<String, Option<String>>>);

impl NaturalityCache {
    fn check(&self, nu: &NatTrans, guard: u128) -> Result<Option<String>> {
        let key = format!("{} {:?}", nu.source(), nu.kind());
        if let Some(hit) = self.0.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let result = nu.check_naturality(&naturality_carriers(), guard)?.witness().map(|w| w.to_string());
        self.0.lock().expect("cache lock").insert(key, result.clone());
        Ok(result)
    }
}

#[allow(clippy::too_many_arguments)]
fn atom_checks(
    cfg: &TrialConfig,
    inst: &Instance,
    nu: &NatTrans,
    premise: &PremiseDoc,
    transfer: Transfer,
    trial: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, Vec<Violation>)> {
    let leaves: Vec<Formula> = nu.ap().elements().iter().map(|p| Formula::Atom(p.clone())).collect();
    let env = PredEnv::new();
    let mut checks = 0;
    let mut violations = Vec::new();
    for _ in 0..cfg.formulas_per_trial {
        let phi = random_formula(&cfg.operators, &cfg.required_operators, cfg.formula_depth, &leaves, rng);
        let failures = super::transfer_failures(&inst.c, &inst.d, &inst.relation, "R", &phi, &env, Some(nu), transfer)?;
        checks += inst.relation.len();
        for f in failures {
            let mut doc = inst.to_doc();
            doc.add_nat("nu", nu);
            doc.add_formula("phi", &phi);
            violations.push(Violation {
                trial,
                description: f.detail,
                states: Some((inst.c.states().element(f.x).to_string(), inst.d.states().element(f.y).to_string())),
                check: Some(TransferCheck {
                    transfer,
                    premise: premise.clone(),
                    relation: "R".into(),
                    formula: "phi".into(),
                    nu: Some("nu".into()),
                }),
                system: Some(doc),
            });
        }
    }
    Ok((checks, violations))
}

fn unnatural(trial: usize, inst: &Instance, nu: &NatTrans, witness: String) -> TrialOutcome {
    let mut doc = inst.to_doc();
    doc.add_nat("nu", nu);
    TrialOutcome {
        violations: vec![Violation {
            trial,
            description: format!("generated nu is not natural: {witness}"),
            states: None,
            check: None,
            system: Some(doc),
        }],
        ..TrialOutcome::default()
    }
}

/// With atomic propositions and a natural ν, bisimilar states satisfy the
/// same formulas, negation included.
pub fn suite_theorem_ap_bisim(cfg: &TrialConfig) -> Result<SuiteReport> {
    let (sets, pool) = resolve_pool(cfg)?;
    let cache = NaturalityCache::default();
    run_trials(Suite::ApBisim, cfg, |trial, rng| {
        let functor = pick_functor(&pool, None, rng)?;
        let nu = random_nu(functor, &sets, rng)?;
        let inst = gen_instance_for(cfg, &sets, functor, Premise::Bisim, rng)?;
        if let Some(w) = cache.check(&nu, cfg.guard)? {
            return Ok(unnatural(trial, &inst, &nu, w));
        }
        let (checks, violations) =
            atom_checks(cfg, &inst, &nu, &PremiseDoc::Bisimulation, Transfer::Equivalent, trial, rng)?;
        Ok(TrialOutcome { checks, vacuous: inst.relation.is_empty(), violations, ..TrialOutcome::default() })
    })
}

/// Base preorder on a constant set for the ν-natural suites. For the
/// labelled set it only orders `a` below `b` when their labels allow it;
/// other sets get a random preorder that is checked afterwards.
fn natural_base(
    functor: &Arc<Functor>,
    nu: &NatTrans,
    down: bool,
    rng: &mut ChaCha8Rng,
) -> BTreeMap<String, BTreeSet<(usize, usize)>> {
    let labelled = match nu.kind() {
        crate::nat::NatKind::ConstLabel(labels) => labelled_const(functor).map(|set| (set.name().to_string(), labels)),
        _ => None,
    };
    functor
        .referenced_sets()
        .iter()
        .map(|(name, set)| {
            let pairs = match &labelled {
                Some((l, labels)) if l == name => {
                    let mut pairs = Vec::new();
                    for a in 0..set.len() {
                        for b in 0..set.len() {
                            let fits =
                                if down { labels[b].is_subset(&labels[a]) } else { labels[a].is_subset(&labels[b]) };
                            if a != b && fits && rng.gen_bool(0.6) {
                                pairs.push((a, b));
                            }
                        }
                    }
                    preorder_closure(set.len(), pairs)
                }
                _ => random_preorder(set.len(), rng),
            };
            (name.clone(), pairs)
        })
        .collect()
}

/// Simulations under Order-class orders that are down-natural (resp.
/// up-natural) for ν reflect (resp. preserve) negation-free formulas over
/// atomic propositions.
pub fn suite_theorem_ap_natural(cfg: &TrialConfig, transfer: Transfer) -> Result<SuiteReport> {
    let (suite, down) = match transfer {
        Transfer::Reflect => (Suite::ApNaturalDown, true),
        Transfer::Preserve => (Suite::ApNaturalUp, false),
        Transfer::Equivalent => {
            return Err(Error::Config("the natural-order suites run in one direction".into()));
        }
    };
    let (sets, pool) = resolve_pool(cfg)?;
    ensure_fragment(cfg, &[Connective::Not, Connective::Implies])?;
    let cache = NaturalityCache::default();
    let sizes: Vec<Carrier> = (1..=cfg.max_states).map(|n| Carrier::numbered("N", "n", n)).collect();
    run_trials(suite, cfg, |trial, rng| {
        let functor = pick_functor(&pool, Some(OrderFamily::Structural), rng)?;
        let nu = random_nu(functor, &sets, rng)?;
        let mut ord = None;
        for _ in 0..10 {
            let candidate = OrderSpec::build_order_class(functor.clone(), natural_base(functor, &nu, down, rng))?;
            let mut ok = true;
            for carrier in &sizes {
                let verdict = if down {
                    candidate.is_down_natural(&nu, carrier, cfg.guard)?
                } else {
                    candidate.is_up_natural(&nu, carrier, cfg.guard)?
                };
                ok &= verdict.holds();
            }
            if ok {
                ord = Some(candidate);
                break;
            }
        }
        let ord = match ord {
            Some(o) => o,
            None => OrderSpec::build_order_class(functor.clone(), BTreeMap::new())?,
        };
        let inst = gen_instance_for(cfg, &sets, functor, Premise::Sim(&ord), rng)?;
        if let Some(w) = cache.check(&nu, cfg.guard)? {
            return Ok(unnatural(trial, &inst, &nu, w));
        }
        let (checks, violations) =
            atom_checks(cfg, &inst, &nu, &PremiseDoc::Simulation { order: "ord".into() }, transfer, trial, rng)?;
        Ok(TrialOutcome { checks, vacuous: inst.relation.is_empty(), violations, ..TrialOutcome::default() })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::replay;

    fn small(suite: Suite) -> TrialConfig {
        TrialConfig::for_suite(suite, 3, 40)
    }

    #[test]
    fn every_suite_passes_small_runs() {
        for suite in Suite::ALL {
            let report = run_suite(suite, &small(suite)).unwrap();
            assert!(report.passed(), "{report}");
            assert_eq!(report.trials_run, 40);
            assert!(report.checks > 0, "{report}");
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let a = run_suite(Suite::OrderClass, &small(Suite::OrderClass)).unwrap();
        let b = run_suite(Suite::OrderClass, &small(Suite::OrderClass)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn fragments_are_enforced() {
        let mut cfg = small(Suite::SimDown);
        cfg.operators.insert(Connective::Eventually);
        assert!(matches!(suite_theorem_sim_down(&cfg), Err(Error::Config(_))));
        let mut cfg = small(Suite::Bisim);
        cfg.operators.insert(Connective::Not);
        assert!(suite_theorem_bisim(&cfg).is_err());
    }

    #[test]
    fn negation_violations_replay_from_their_dump() {
        // Preservation with predicates and negation breaks along
        // bisimulations; the violation must reproduce from its own dump.
        let mut cfg = small(Suite::Bisim);
        cfg.functor_pool = vec![crate::functor::FunctorExpr::pow(crate::functor::FunctorExpr::Id)];
        cfg.trials = 60;
        cfg.operators.insert(Connective::Not);
        let (sets, pool) = resolve_pool(&cfg).unwrap();
        let mut found = None;
        for trial in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, trial);
            let inst = gen_instance_for(&cfg, &sets, &pool[0], Premise::Bisim, &mut rng).unwrap();
            let (_, v) = predicate_checks(
                &cfg,
                &inst,
                &PremiseDoc::Bisimulation,
                &[Transfer::Reflect],
                &cfg.operators,
                &BTreeSet::from([Connective::Not]),
                trial,
                &mut rng,
            )
            .unwrap();
            if let Some(v) = v.into_iter().next() {
                found = Some(v);
                break;
            }
        }
        let v = found.expect("negation should break reflection somewhere");
        assert!(replay(&v, cfg.guard).unwrap());
        let json = serde_json::to_string(&v).unwrap();
        let back: Violation = serde_json::from_str(&json).unwrap();
        assert!(replay(&back, cfg.guard).unwrap());
    }
}
