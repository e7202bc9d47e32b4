use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use coalsim::description::System;
use coalsim::harness::{self, Suite, SuiteReport, TrialConfig, Violation};
use coalsim::logic::{self, image_formula, parse_formula, Connective};
use coalsim::order::OrderWitness;
use coalsim::{
    simulation, Carrier, CheckReport, Coalgebra, Direction, Error, FValue, Formula, RelRef, Relation, Result, Verdict,
};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::{Command, Common, DirectionArg, Format, Pair, Property};

/// Runs one subcommand; `Ok(true)` when the checked property holds.
pub fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::CheckBisim { system, relation, common } => {
            let sys = System::load(system)?;
            let r = sys.relation(&relation)?;
            let (c, d) = sys.endpoints(r)?;
            let report = simulation::is_bisimulation(c, d, r)?;
            emit_check(&common, &format!("`{relation}` is a bisimulation"), &report)
        }
        Command::CheckSim { system, relation, order, common } => {
            let sys = System::load(system)?;
            let r = sys.relation(&relation)?;
            let (c, d) = sys.endpoints(r)?;
            let report = simulation::is_simulation(c, d, sys.order(&order)?, r, common.guard)?;
            emit_check(&common, &format!("`{relation}` is a simulation for `{order}`"), &report)
        }
        Command::LargestBisim { system, pair, state, common } => {
            let sys = System::load(system)?;
            let (c, d) = pair_of(&sys, &pair)?;
            let r = simulation::largest_bisimulation(c, d)?;
            emit_relation(&common, "largest bisimulation", &r, state.as_deref())
        }
        Command::LargestSim { system, order, pair, state, common } => {
            let sys = System::load(system)?;
            let (c, d) = pair_of(&sys, &pair)?;
            let r = simulation::largest_simulation(c, d, sys.order(&order)?, common.guard)?;
            emit_relation(&common, &format!("largest simulation for `{order}`"), &r, state.as_deref())
        }
        Command::Eval { system, formula, coalgebra, nu, image_of, direction, state, common } => {
            let sys = System::load(system)?;
            eval(
                &sys,
                &formula,
                coalgebra.as_deref(),
                nu.as_deref(),
                image_of.as_deref(),
                direction,
                state.as_deref(),
                &common,
            )
        }
        Command::CheckOrder { system, property, order, nu, coalgebra, common } => {
            let sys = System::load(system)?;
            check_order(&sys, property, order.as_deref(), nu.as_deref(), coalgebra.as_deref(), &common)
        }
        Command::VerifyTheorems { suite, seed, trials, max_states, formula_depth, require, common } => {
            let suites = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse::<Suite>()?] };
            let required = require.iter().map(|s| parse_connective(s)).collect::<Result<BTreeSet<_>>>()?;
            let mut reports = Vec::new();
            for s in suites {
                let mut cfg = TrialConfig::for_suite(s, seed, trials);
                cfg.max_states = max_states;
                cfg.formula_depth = formula_depth;
                cfg.guard = common.guard;
                cfg.operators.extend(required.iter().copied());
                cfg.required_operators = required.clone();
                reports.push(harness::run_suite(s, &cfg)?);
            }
            emit_reports(&common, &reports)
        }
        Command::Counterexamples { common } => {
            let reports = vec![harness::counterexample_next()?, harness::counterexample_eventually()?];
            emit_reports(&common, &reports)
        }
        Command::Replay { report, common } => replay(&report, &common),
    }
}

fn parse_connective(s: &str) -> Result<Connective> {
    Connective::ALL
        .iter()
        .copied()
        .find(|op| format!("{op:?}").eq_ignore_ascii_case(s.trim()))
        .ok_or_else(|| Error::Config(format!("unknown connective `{s}`")))
}

fn pair_of<'a>(sys: &'a System, pair: &Pair) -> Result<(&'a Coalgebra, &'a Coalgebra)> {
    Ok((sys.coalgebra(&pair.from)?, sys.coalgebra(&pair.to)?))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn emit_check(common: &Common, claim: &str, report: &CheckReport) -> Result<bool> {
    match common.format {
        Format::Json => print_json(&json!({ "claim": claim, "holds": report.holds, "witness": report.witness })),
        Format::Text => println!("{claim}: {report}"),
    }
    Ok(report.holds)
}

fn emit_relation(common: &Common, what: &str, r: &Relation, state: Option<&[String]>) -> Result<bool> {
    let pairs: Vec<(&str, &str)> = r.named_pairs();
    let queried = match state {
        Some([x, y]) => {
            let i = r.domain().require(x)?;
            let j = r.codomain().require(y)?;
            Some((x.as_str(), y.as_str(), r.contains(i, j)))
        }
        Some(_) => return Err(Error::Config("--state takes two state names".into())),
        None => None,
    };
    match common.format {
        Format::Json => {
            let mut out = json!({
                "relation": what,
                "from": r.domain().name(),
                "to": r.codomain().name(),
                "pairs": pairs,
            });
            if let Some((x, y, related)) = queried {
                out["query"] = json!({ "x": x, "y": y, "related": related });
            }
            print_json(&out);
        }
        Format::Text => {
            println!("{what} {} -> {} ({} pairs)", r.domain().name(), r.codomain().name(), pairs.len());
            for (x, y) in &pairs {
                println!("  {x} {y}");
            }
            if let Some((x, y, related)) = queried {
                println!("({x}, {y}) {}", if related { "related" } else { "not related" });
            }
        }
    }
    Ok(queried.is_none_or(|(_, _, related)| related))
}

fn formula_from(sys: &System, text: &str) -> Result<Formula> {
    if sys.doc().formulas.contains_key(text) {
        return sys.formula(text).cloned();
    }
    parse_formula(text).map_err(|e| Error::Parse { line: 1, column: e.offset + 1, message: e.message })
}

#[allow(clippy::too_many_arguments)]
fn eval(
    sys: &System,
    text: &str,
    coalgebra: Option<&str>,
    nu: Option<&str>,
    image_of: Option<&str>,
    direction: DirectionArg,
    state: Option<&str>,
    common: &Common,
) -> Result<bool> {
    let nu = match nu {
        Some(n) => Some(sys.nat(n)?),
        None if sys.nats().len() == 1 => sys.nats().values().next(),
        None => None,
    };
    let mut phi = formula_from(sys, text)?;
    if let Some(nu) = nu {
        let known: BTreeSet<&String> = sys.doc().predicates.keys().collect();
        let atoms = nu.ap().elements().iter().filter(|a| !known.contains(a)).cloned().collect();
        phi = phi.with_atoms(&atoms);
    }
    let mut target = coalgebra.map(str::to_string);
    if let Some(rel) = image_of {
        let r = sys.relation(rel)?;
        let dir = match direction {
            DirectionArg::Direct => Direction::Direct,
            DirectionArg::Inverse => Direction::Inverse,
        };
        phi = image_formula(&phi, &RelRef::new(rel), dir)?;
        if target.is_none() {
            let end = if dir == Direction::Inverse { r.domain() } else { r.codomain() };
            target = Some(end.name().to_string());
        }
    }
    let target = match target {
        Some(t) => t,
        None => infer_coalgebra(sys, &phi)?,
    };
    let c = sys.coalgebra(&target)?;
    let sat = logic::eval(c, &phi, &sys.env(), nu)?;
    let members = sat.names();
    let verdict = state.map(|s| c.states().require(s).map(|x| (s, sat.contains(x)))).transpose()?;
    match common.format {
        Format::Json => {
            let mut out = json!({ "formula": phi.to_string(), "coalgebra": target, "satisfied_by": members });
            if let Some((s, holds)) = verdict {
                out["state"] = json!(s);
                out["holds"] = json!(holds);
            }
            print_json(&out);
        }
        Format::Text => {
            println!("[[{phi}]] in {target} = {{{}}}", members.join(", "));
            if let Some((s, holds)) = verdict {
                println!("{s} {} {phi}", if holds { "satisfies" } else { "does not satisfy" });
            }
        }
    }
    Ok(verdict.is_none_or(|(_, holds)| holds))
}

fn infer_coalgebra(sys: &System, phi: &Formula) -> Result<String> {
    if sys.coalgebras().len() == 1 {
        return Ok(sys.coalgebras().keys().next().cloned().expect("one coalgebra"));
    }
    let mut carriers = BTreeSet::new();
    leaf_carriers(sys, phi, &mut carriers)?;
    match carriers.len() {
        1 => Ok(carriers.into_iter().next().expect("one carrier")),
        _ => Err(Error::Config("cannot infer the coalgebra; pass --coalgebra".into())),
    }
}

fn leaf_carriers(sys: &System, phi: &Formula, out: &mut BTreeSet<String>) -> Result<()> {
    match phi {
        Formula::Atom(_) => {}
        Formula::Pred(p) => {
            out.insert(sys.predicate(p)?.carrier().name().to_string());
        }
        Formula::Img { rel, dir, .. } => {
            let r = sys.relation(rel)?;
            let end = if *dir == Direction::Inverse { r.domain() } else { r.codomain() };
            out.insert(end.name().to_string());
        }
        Formula::Not(a) | Formula::Next(a) | Formula::Eventually(a) | Formula::Always(a) => leaf_carriers(sys, a, out)?,
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(a, b) => {
            leaf_carriers(sys, a, out)?;
            leaf_carriers(sys, b, out)?;
        }
    }
    Ok(())
}

fn render_value(sys: &System, carrier: &Carrier, v: &FValue) -> String {
    sys.encode(carrier, v).to_string()
}

fn render_order_witness(sys: &System, carrier: &Carrier, w: &OrderWitness) -> String {
    let r = |v: &FValue| render_value(sys, carrier, v);
    match w {
        OrderWitness::NotReflexive(a) => format!("{} is not below itself", r(a)),
        OrderWitness::NotTransitive(a, b, c) => {
            format!("{} <= {} <= {} but not {} <= {}", r(a), r(b), r(c), r(a), r(c))
        }
        OrderWitness::NotDownClosed { lower, upper, predicate } => format!(
            "{} <= {}; {} lies in Pred({{{}}}) but {} does not",
            r(lower),
            r(upper),
            r(upper),
            predicate.names().join(", "),
            r(lower)
        ),
        OrderWitness::NotUpClosed { lower, upper, predicate } => format!(
            "{} <= {}; {} lies in Pred({{{}}}) but {} does not",
            r(lower),
            r(upper),
            r(lower),
            predicate.names().join(", "),
            r(upper)
        ),
        OrderWitness::NotDownNatural { lower, upper } => {
            format!("{} <= {} but nu({}) is not contained in nu({})", r(lower), r(upper), r(upper), r(lower))
        }
        OrderWitness::NotUpNatural { lower, upper } => {
            format!("{} <= {} but nu({}) is not contained in nu({})", r(lower), r(upper), r(lower), r(upper))
        }
    }
}

fn check_order(
    sys: &System,
    property: Property,
    order: Option<&str>,
    nu: Option<&str>,
    coalgebra: Option<&str>,
    common: &Common,
) -> Result<bool> {
    let carriers: Vec<Arc<Carrier>> = match coalgebra {
        Some(name) => vec![sys.coalgebra(name)?.states().clone()],
        None => sys.coalgebras().values().map(|c| c.states().clone()).collect(),
    };
    let need_nu = || nu.ok_or_else(|| Error::Config("this property needs --nu".into())).and_then(|n| sys.nat(n));
    let need_order =
        || order.ok_or_else(|| Error::Config("this property needs --order".into())).and_then(|o| sys.order(o));
    let label = match property {
        Property::Preorder => "preorder",
        Property::DownClosed => "down-closed",
        Property::UpClosed => "up-closed",
        Property::DownNatural => "down-natural",
        Property::UpNatural => "up-natural",
        Property::Naturality => "natural",
    };
    let subject = match property {
        Property::Naturality => format!("`{}`", nu.unwrap_or_default()),
        _ => format!("`{}`", order.unwrap_or_default()),
    };

    let mut rows = Vec::new();
    if property == Property::Naturality {
        let verdict = need_nu()?.check_naturality(&carriers, common.guard)?;
        let detail = verdict.witness().map(|w| {
            let from = sys.coalgebra(&w.from).ok().map(|c| render_value(sys, c.states(), &w.value));
            format!(
                "g: {} -> {} = {:?} does not commute at {}",
                w.from,
                w.to,
                w.map,
                from.unwrap_or_else(|| w.value.to_string())
            )
        });
        rows.push((None, verdict.holds(), detail));
    } else {
        let ord = need_order()?;
        for carrier in &carriers {
            let verdict: Verdict<OrderWitness> = match property {
                Property::Preorder => ord.is_preorder(carrier, common.guard)?,
                Property::DownClosed => ord.is_down_closed(carrier, common.guard)?,
                Property::UpClosed => ord.is_up_closed(carrier, common.guard)?,
                Property::DownNatural => ord.is_down_natural(need_nu()?, carrier, common.guard)?,
                Property::UpNatural => ord.is_up_natural(need_nu()?, carrier, common.guard)?,
                Property::Naturality => unreachable!("handled above"),
            };
            let detail = verdict.witness().map(|w| render_order_witness(sys, carrier, w));
            rows.push((Some(carrier.name().to_string()), verdict.holds(), detail));
        }
    }

    let holds = rows.iter().all(|(_, h, _)| *h);
    match common.format {
        Format::Json => {
            let results: Vec<Value> = rows
                .iter()
                .map(|(carrier, h, detail)| json!({ "carrier": carrier, "holds": h, "witness": detail }))
                .collect();
            print_json(&json!({ "subject": subject, "property": label, "holds": holds, "results": results }));
        }
        Format::Text => {
            for (carrier, h, detail) in &rows {
                let at = carrier.as_ref().map(|c| format!(" on {c}")).unwrap_or_default();
                match detail {
                    None if *h => println!("{subject} is {label}{at}: holds"),
                    Some(d) => println!("{subject} is {label}{at}: fails: {d}"),
                    None => println!("{subject} is {label}{at}: fails"),
                }
            }
        }
    }
    Ok(holds)
}

fn emit_reports(common: &Common, reports: &[SuiteReport]) -> Result<bool> {
    let passed = reports.iter().all(SuiteReport::passed);
    match common.format {
        Format::Json => print_json(&json!({ "passed": passed, "reports": reports })),
        Format::Text => {
            for r in reports {
                println!("{r}");
            }
            println!();
            println!("{:<26} {:>7} {:>9} {:>8} {:>10}  status", "suite", "trials", "checks", "empty-R", "violations");
            for r in reports {
                println!(
                    "{:<26} {:>7} {:>9} {:>8} {:>10}  {}",
                    r.suite,
                    r.trials_run,
                    r.checks,
                    r.vacuous_trials,
                    r.violations.len(),
                    if r.passed() { "PASS" } else { "FAIL" }
                );
            }
        }
    }
    Ok(passed)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ReplayInput {
    Batch { reports: Vec<SuiteReport> },
    Report(SuiteReport),
    One(Box<Violation>),
}

fn replay(path: &Path, common: &Common) -> Result<bool> {
    let text = fs::read_to_string(path).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    let input: ReplayInput = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let violations: Vec<(String, Violation)> = match input {
        ReplayInput::Batch { reports } => reports
            .into_iter()
            .flat_map(|r| {
                let suite = r.suite;
                r.violations.into_iter().map(move |v| (suite.clone(), v))
            })
            .collect(),
        ReplayInput::Report(r) => r.violations.into_iter().map(|v| (r.suite.clone(), v)).collect(),
        ReplayInput::One(v) => vec![(String::new(), *v)],
    };
    let mut rows = Vec::new();
    for (suite, v) in &violations {
        let outcome = match harness::replay(v, common.guard) {
            Ok(true) => "reproduced",
            Ok(false) => "not reproduced",
            Err(Error::NotApplicable(_)) => "not replayable",
            Err(e) => return Err(e),
        };
        rows.push((suite.as_str(), v.trial, v.description.as_str(), outcome));
    }
    let reproduced = rows.iter().filter(|r| r.3 == "reproduced").count();
    match common.format {
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|(s, t, d, o)| json!({ "suite": s, "trial": t, "description": d, "outcome": o }))
                .collect();
            print_json(&json!({ "violations": items.len(), "reproduced": reproduced, "results": items }));
        }
        Format::Text => {
            for (s, t, d, o) in &rows {
                let prefix = if s.is_empty() { String::new() } else { format!("{s} ") };
                println!("{prefix}trial {t}: {o}: {d}");
            }
            println!("{reproduced} of {} violations reproduced", rows.len());
        }
    }
    Ok(reproduced == 0)
}
