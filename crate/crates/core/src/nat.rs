//! Natural transformations `ν : F ⇒ P(AP)` giving atomic propositions their
//! meaning.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::functor::{Carrier, FValue, Functor};
use crate::order::Verdict;

/// Number of random maps tried per carrier pair when the full function
/// space exceeds the guard.
const NATURALITY_SAMPLES: usize = 4096;

/// A lookup table of `ν_X` for one carrier `X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NatTable {
    pub carrier: Arc<Carrier>,
    pub entries: BTreeMap<FValue, BTreeSet<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NatKind {
    /// `(P, Q) ↦ P` on `P(AP) × G`.
    KripkeProj,
    /// `(P, Q) ↦ AP ∖ P` on `P(AP) × G`.
    KripkeComplement,
    /// `(a, _) ↦ labels[a]` on `A × G` (or `a ↦ labels[a]` on `A`).
    ConstLabel(Vec<BTreeSet<usize>>),
    /// Per-carrier tables.
    Table(Vec<NatTable>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NatTrans {
    source: Arc<Functor>,
    ap: Arc<Carrier>,
    kind: NatKind,
}

/// A renaming `g : from → to` and a value `u` with `ν(F(g)(u)) ≠ ν(u)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaturalityWitness {
    pub from: String,
    pub to: String,
    pub map: Vec<usize>,
    pub value: FValue,
}

impl fmt::Display for NaturalityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g: {} -> {} = {:?} does not commute at {}", self.from, self.to, self.map, self.value)
    }
}

impl NatTrans {
    pub fn kripke_proj(source: Arc<Functor>, ap: Arc<Carrier>) -> Result<Self> {
        check_kripke_shape(&source, &ap)?;
        Ok(NatTrans { source, ap, kind: NatKind::KripkeProj })
    }

    pub fn kripke_complement(source: Arc<Functor>, ap: Arc<Carrier>) -> Result<Self> {
        check_kripke_shape(&source, &ap)?;
        Ok(NatTrans { source, ap, kind: NatKind::KripkeComplement })
    }

    pub fn const_label(source: Arc<Functor>, ap: Arc<Carrier>, labels: Vec<BTreeSet<usize>>) -> Result<Self> {
        let set = labelled_const(&source)
            .ok_or_else(|| Error::Validation(format!("constant labelling needs A or A x G, found {source}")))?;
        if labels.len() != set.len() {
            return Err(Error::Validation(format!(
                "constant labelling lists {} entries for the {} elements of `{}`",
                labels.len(),
                set.len(),
                set.name()
            )));
        }
        check_ap_indices(&ap, labels.iter())?;
        Ok(NatTrans { source, ap, kind: NatKind::ConstLabel(labels) })
    }

    pub fn table(source: Arc<Functor>, ap: Arc<Carrier>, tables: Vec<NatTable>) -> Result<Self> {
        for t in &tables {
            for v in t.entries.keys() {
                source.check_value(&t.carrier, v)?;
            }
            check_ap_indices(&ap, t.entries.values())?;
        }
        Ok(NatTrans { source, ap, kind: NatKind::Table(tables) })
    }

    pub fn source(&self) -> &Functor {
        &self.source
    }

    pub fn ap(&self) -> &Arc<Carrier> {
        &self.ap
    }

    pub fn kind(&self) -> &NatKind {
        &self.kind
    }

    /// `ν_X(u)` as a set of indices into the AP set.
    pub fn apply(&self, carrier: &Carrier, u: &FValue) -> Result<BTreeSet<usize>> {
        match &self.kind {
            NatKind::KripkeProj | NatKind::KripkeComplement => {
                let props = match u {
                    FValue::Pair(l, _) => match &**l {
                        FValue::Set(s) => s
                            .iter()
                            .map(|p| match p {
                                FValue::Const(i) => Ok(*i),
                                _ => Err(Error::ShapeMismatch(format!("{u} has no AP component"))),
                            })
                            .collect::<Result<BTreeSet<_>>>()?,
                        _ => return Err(Error::ShapeMismatch(format!("{u} has no AP component"))),
                    },
                    _ => return Err(Error::ShapeMismatch(format!("{u} is not a pair"))),
                };
                if matches!(self.kind, NatKind::KripkeProj) {
                    Ok(props)
                } else {
                    Ok((0..self.ap.len()).filter(|p| !props.contains(p)).collect())
                }
            }
            NatKind::ConstLabel(labels) => {
                let a = match u {
                    FValue::Const(a) => *a,
                    FValue::Pair(l, _) => match &**l {
                        FValue::Const(a) => *a,
                        _ => return Err(Error::ShapeMismatch(format!("{u} has no constant label"))),
                    },
                    _ => return Err(Error::ShapeMismatch(format!("{u} has no constant label"))),
                };
                labels.get(a).cloned().ok_or_else(|| Error::ShapeMismatch(format!("label index {a} out of range")))
            }
            NatKind::Table(tables) => {
                let table = tables
                    .iter()
                    .find(|t| *t.carrier == *carrier)
                    .ok_or_else(|| Error::Config(format!("nu has no table for carrier `{}`", carrier.name())))?;
                table
                    .entries
                    .get(u)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("nu table for `{}` has no entry for {u}", carrier.name())))
            }
        }
    }

    /// Commutation with `F(g)` for maps `g` between every ordered pair of
    /// the given carriers. Exhaustive while the function space fits the
    /// guard, sampled otherwise; a `Holds` verdict can only mean "no
    /// counterexample found".
    pub fn check_naturality(&self, carriers: &[Arc<Carrier>], guard: u128) -> Result<Verdict<NaturalityWitness>> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for from in carriers {
            let values = self.source.enumerate_values(from, guard)?;
            let before = values.iter().map(|u| self.apply(from, u)).collect::<Result<Vec<_>>>()?;
            for to in carriers {
                if to.is_empty() && !from.is_empty() {
                    continue;
                }
                let maps = function_space(from.len(), to.len(), guard, &mut rng);
                for g in maps {
                    for (u, nu_u) in values.iter().zip(&before) {
                        let image = u.map_states(&|i| g[i]);
                        if self.apply(to, &image)? != *nu_u {
                            return Ok(Verdict::Fails(NaturalityWitness {
                                from: from.name().to_string(),
                                to: to.name().to_string(),
                                map: g,
                                value: u.clone(),
                            }));
                        }
                    }
                }
            }
        }
        Ok(Verdict::Holds)
    }
}

fn function_space(n: usize, m: usize, guard: u128, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let total = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(m as u128));
    match total {
        Some(t) if t <= guard => {
            let mut out = vec![Vec::with_capacity(n)];
            for _ in 0..n {
                out = out
                    .into_iter()
                    .flat_map(|prefix| {
                        (0..m).map(move |y| {
                            let mut g = prefix.clone();
                            g.push(y);
                            g
                        })
                    })
                    .collect();
            }
            out
        }
        _ => (0..NATURALITY_SAMPLES).map(|_| (0..n).map(|_| rng.gen_range(0..m)).collect()).collect(),
    }
}

fn check_kripke_shape(source: &Functor, ap: &Carrier) -> Result<()> {
    match source {
        Functor::Prod(l, _) => match &**l {
            Functor::Pow(inner) => match &**inner {
                Functor::Const(set) if **set == *ap => Ok(()),
                _ => Err(Error::Validation(format!(
                    "Kripke projection needs P({}) as the first component of {source}",
                    ap.name()
                ))),
            },
            _ => Err(Error::Validation(format!(
                "Kripke projection needs P({}) as the first component of {source}",
                ap.name()
            ))),
        },
        _ => Err(Error::Validation(format!("Kripke projection needs a product, found {source}"))),
    }
}

pub(crate) fn labelled_const(source: &Functor) -> Option<&Arc<Carrier>> {
    match source {
        Functor::Const(a) => Some(a),
        Functor::Prod(l, _) => match &**l {
            Functor::Const(a) => Some(a),
            _ => None,
        },
        _ => None,
    }
}

fn check_ap_indices<'a>(ap: &Carrier, sets: impl Iterator<Item = &'a BTreeSet<usize>>) -> Result<()> {
    for s in sets {
        if let Some(p) = s.iter().find(|&&p| p >= ap.len()) {
            return Err(Error::Validation(format!("proposition index {p} lies outside `{}`", ap.name())));
        }
    }
    Ok(())
}
