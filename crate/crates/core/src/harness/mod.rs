//! Randomized and exhaustive checks of the property-transfer results, and
//! the two hand-built counterexamples.
//!
//! Every suite is deterministic in `(seed, config)`: trial `i` draws from a
//! ChaCha stream selected by `i`, trials run in parallel, and results are
//! merged by trial index. A violation carries a complete system document and
//! the check that failed, so it can be replayed with [`replay`].

mod counterexamples;
mod gen;
mod suites;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coalgebra::Coalgebra;
use crate::description::{System, SystemDoc};
use crate::error::{Error, Result};
use crate::functor::{FunctorExpr, DEFAULT_GUARD};
use crate::lifting::Relation;
use crate::logic::{eval, image_formula, Connective, Direction, Formula, PredEnv, RelRef};
use crate::nat::NatTrans;
use crate::simulation::{is_bisimulation, is_simulation};

pub use counterexamples::{counterexample_eventually, counterexample_next};
pub use gen::{
    gen_instance, gen_instance_for, random_formula, random_predicate, random_value, Instance, Needs, OrderFamily,
    Premise,
};
pub use suites::{
    run_suite, suite_theorem_ap_bisim, suite_theorem_ap_natural, suite_theorem_bisim, suite_theorem_order_class,
    suite_theorem_sim_down, suite_theorem_sim_up,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Bisim,
    SimDown,
    SimUp,
    OrderClass,
    ApBisim,
    ApNaturalDown,
    ApNaturalUp,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Bisim,
        Suite::SimDown,
        Suite::SimUp,
        Suite::OrderClass,
        Suite::ApBisim,
        Suite::ApNaturalDown,
        Suite::ApNaturalUp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Bisim => "bisim",
            Suite::SimDown => "sim-down",
            Suite::SimUp => "sim-up",
            Suite::OrderClass => "order-class",
            Suite::ApBisim => "ap-bisim",
            Suite::ApNaturalDown => "ap-natural-down",
            Suite::ApNaturalUp => "ap-natural-up",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

/// Parameters of a randomized suite run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_states: usize,
    pub functor_pool: Vec<FunctorExpr>,
    /// Finite sets the pool's constants and exponents refer to.
    pub sets: BTreeMap<String, Vec<String>>,
    pub formula_depth: usize,
    pub operators: BTreeSet<Connective>,
    /// Every generated formula must use all of these.
    #[serde(default)]
    pub required_operators: BTreeSet<Connective>,
    pub formulas_per_trial: usize,
    pub guard: u128,
}

const NEGATION_FREE: [Connective; 6] =
    [Connective::And, Connective::Or, Connective::Next, Connective::Always, Connective::Eventually, Connective::Until];

const BOX_FRAGMENT: [Connective; 4] = [Connective::Or, Connective::And, Connective::Next, Connective::Always];

impl TrialConfig {
    /// Default settings for `suite`: 4 states, formula depth 3, and a
    /// functor pool and operator set the suite's premises allow.
    pub fn for_suite(suite: Suite, seed: u64, trials: usize) -> TrialConfig {
        let a = || FunctorExpr::constant("A");
        let pow_id = || FunctorExpr::pow(FunctorExpr::Id);
        let labelled = || FunctorExpr::prod(a(), pow_id());
        let lts = || FunctorExpr::lts("L");
        let labelled_succ = || FunctorExpr::pow(FunctorExpr::prod(a(), FunctorExpr::Id));
        let (pool, ops): (Vec<FunctorExpr>, Vec<Connective>) = match suite {
            Suite::Bisim => (
                vec![
                    pow_id(),
                    labelled(),
                    lts(),
                    labelled_succ(),
                    FunctorExpr::coprod(a(), pow_id()),
                    FunctorExpr::seq(FunctorExpr::Id),
                ],
                NEGATION_FREE.to_vec(),
            ),
            Suite::SimDown | Suite::SimUp => {
                (vec![pow_id(), labelled(), lts(), labelled_succ()], BOX_FRAGMENT.to_vec())
            }
            Suite::OrderClass => (
                vec![pow_id(), labelled(), lts(), labelled_succ(), FunctorExpr::coprod(a(), pow_id())],
                NEGATION_FREE.to_vec(),
            ),
            Suite::ApBisim => (vec![FunctorExpr::kripke("AP"), labelled()], Connective::ALL.to_vec()),
            Suite::ApNaturalDown | Suite::ApNaturalUp => {
                (vec![FunctorExpr::kripke("AP"), labelled()], NEGATION_FREE.to_vec())
            }
        };
        let sets = [("A", ["a1", "a2"]), ("L", ["l1", "l2"]), ("AP", ["p", "q"])]
            .into_iter()
            .map(|(n, es)| (n.to_string(), es.iter().map(|e| e.to_string()).collect()))
            .collect();
        TrialConfig {
            seed,
            trials,
            max_states: 4,
            functor_pool: pool,
            sets,
            formula_depth: 3,
            operators: ops.into_iter().collect(),
            required_operators: BTreeSet::new(),
            formulas_per_trial: 3,
            guard: DEFAULT_GUARD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.max_states == 0 {
            return Err(Error::Config("max_states must be at least 1".into()));
        }
        if self.functor_pool.is_empty() {
            return Err(Error::Config("the functor pool is empty".into()));
        }
        if self.operators.is_empty() && self.formula_depth > 0 {
            return Err(Error::Config("no connectives to build formulas from".into()));
        }
        if let Some(op) = self.required_operators.iter().find(|op| !self.operators.contains(op)) {
            return Err(Error::Config(format!("required connective {op:?} is not in the operator set")));
        }
        Ok(())
    }
}

/// Which way a property is transported along `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transfer {
    /// `y ⊨ ψ ⟹ x ⊨ ψ⁻¹` (with atoms: `y ⊨ φ ⟹ x ⊨ φ`).
    Reflect,
    /// `x ⊨ φ ⟹ y ⊨ φ*` (with atoms: `x ⊨ φ ⟹ y ⊨ φ`).
    Preserve,
    /// `x ⊨ φ ⟺ y ⊨ φ`; formulas over atoms only.
    Equivalent,
}

/// The premise under which `R` was generated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PremiseDoc {
    Bisimulation,
    Simulation { order: String },
}

/// A named check inside a system document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferCheck {
    pub transfer: Transfer,
    pub premise: PremiseDoc,
    pub relation: String,
    pub formula: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub trial: usize,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<TransferCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assertion {
    pub label: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: Option<u64>,
    pub trials_run: usize,
    /// Trials whose generated relation was empty.
    pub vacuous_trials: usize,
    /// Individual `(x, y, formula)` implications checked.
    pub checks: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assertions: Vec<Assertion>,
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {} trials", self.suite, self.trials_run)?;
        if self.checks > 0 {
            write!(f, ", {} checks", self.checks)?;
        }
        if self.vacuous_trials > 0 {
            write!(f, ", {} with empty relation", self.vacuous_trials)?;
        }
        write!(f, ", {} violations", self.violations.len())?;
        for a in &self.assertions {
            write!(f, "\n  [{}] {}", if a.holds { "ok" } else { "FAILED" }, a.label)?;
        }
        for n in &self.notes {
            write!(f, "\n  note: {n}")?;
        }
        for v in &self.violations {
            write!(f, "\n  trial {}: {}", v.trial, v.description)?;
        }
        Ok(())
    }
}

/// A pair `(x, y) ∈ R` at which a transfer check fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferFailure {
    pub x: usize,
    pub y: usize,
    pub detail: String,
}

/// Check that `phi` is transported along `r` in the direction `transfer`.
///
/// Formulas that mention predicates are translated with [`image_formula`];
/// formulas over atoms alone are evaluated unchanged on both sides.
#[allow(clippy::too_many_arguments)]
pub fn transfer_failures(
    c: &Coalgebra,
    d: &Coalgebra,
    r: &Relation,
    rel_name: &str,
    phi: &Formula,
    env: &PredEnv,
    nu: Option<&NatTrans>,
    transfer: Transfer,
) -> Result<Vec<TransferFailure>> {
    let uses_predicates = !phi.predicate_names().is_empty();
    let rel = RelRef::new(rel_name);
    let (left, right) = match (uses_predicates, transfer) {
        (false, _) => (eval(c, phi, env, nu)?, eval(d, phi, env, nu)?),
        (true, Transfer::Reflect) => {
            (eval(c, &image_formula(phi, &rel, Direction::Inverse)?, env, nu)?, eval(d, phi, env, nu)?)
        }
        (true, Transfer::Preserve) => {
            (eval(c, phi, env, nu)?, eval(d, &image_formula(phi, &rel, Direction::Direct)?, env, nu)?)
        }
        (true, Transfer::Equivalent) => {
            return Err(Error::NotApplicable(
                "two-sided transfer is defined for formulas over atomic propositions".into(),
            ))
        }
    };
    let mut out = Vec::new();
    for &(x, y) in r.pairs() {
        let (lx, ry) = (left.contains(x), right.contains(y));
        let broken = match transfer {
            Transfer::Reflect => ry && !lx,
            Transfer::Preserve => lx && !ry,
            Transfer::Equivalent => lx != ry,
        };
        if broken {
            let (xn, yn) = (c.states().element(x), d.states().element(y));
            let side = |b: bool| if b { "holds" } else { "fails" };
            out.push(TransferFailure {
                x,
                y,
                detail: format!(
                    "{phi} ({transfer:?}) at ({xn}, {yn}): left side {}, right side {}",
                    side(lx),
                    side(ry)
                ),
            });
        }
    }
    Ok(out)
}

/// Run a named transfer check against a loaded system. The premise is
/// re-verified first; an unmet premise is an error.
pub fn check_transfer(sys: &System, check: &TransferCheck, guard: u128) -> Result<Vec<TransferFailure>> {
    let r = sys.relation(&check.relation)?;
    let (c, d) = sys.endpoints(r)?;
    let premise = match &check.premise {
        PremiseDoc::Bisimulation => is_bisimulation(c, d, r)?,
        PremiseDoc::Simulation { order } => is_simulation(c, d, sys.order(order)?, r, guard)?,
    };
    if !premise.holds {
        return Err(Error::Validation(format!(
            "relation `{}` does not satisfy its premise: {premise}",
            check.relation
        )));
    }
    let nu = check.nu.as_deref().map(|n| sys.nat(n)).transpose()?;
    transfer_failures(c, d, r, &check.relation, sys.formula(&check.formula)?, &sys.env(), nu, check.transfer)
}

/// Re-run a reported violation; `Ok(true)` when it reproduces at the same
/// state pair.
pub fn replay(v: &Violation, guard: u128) -> Result<bool> {
    let (Some(doc), Some(check)) = (&v.system, &v.check) else {
        return Err(Error::NotApplicable("violation does not carry a replayable instance".into()));
    };
    let sys = System::from_doc(doc.clone())?;
    let failures = check_transfer(&sys, check, guard)?;
    let r = sys.relation(&check.relation)?;
    Ok(match &v.states {
        Some((x, y)) => failures.iter().any(|f| r.domain().element(f.x) == x && r.codomain().element(f.y) == y),
        None => !failures.is_empty(),
    })
}
