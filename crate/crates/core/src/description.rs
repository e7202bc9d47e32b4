//! System files: one JSON document declaring finite sets, a functor,
//! coalgebras, relations, orders, natural transformations, predicates and
//! formulas.
//!
//! ```json
//! {
//!   "sets": {"AP": ["p", "q"]},
//!   "functor": {"prod": [{"pow": {"const": "AP"}}, {"pow": "id"}]},
//!   "coalgebras": {
//!     "c": {"states": ["x1", "x2"],
//!           "map": {"x1": {"pair": [{"set": ["p"]}, {"set": ["x2"]}]},
//!                   "x2": {"pair": [{"set": []}, {"set": ["x2"]}]}}}
//!   },
//!   "relations": {"R": {"from": "c", "to": "c", "pairs": [["x1", "x1"]]}},
//!   "orders": {"sub": {"builtin": "pow-subset"}},
//!   "nats": {"nu": {"kripke-proj": "AP"}},
//!   "predicates": {"P": {"carrier": "c", "members": ["x2"]}},
//!   "formulas": {"phi": {"next": {"pred": "P"}}, "psi": "G (P | @p)"}
//! }
//! ```
//!
//! Values are written against the functor: states and constants are bare
//! strings, and compound values use `{"set": [..]}`, `{"pair": [a, b]}`,
//! `{"inl": v}`, `{"inr": v}`, `{"fun": {"a": v, ..}}` and `{"list": [..]}`.
//! The carrier of each coalgebra is named after the coalgebra. In formulas,
//! a bare name that is not a declared predicate but is an atomic
//! proposition of some natural transformation is read as that atom.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coalgebra::Coalgebra;
use crate::error::{Error, Result};
use crate::functor::{Carrier, FValue, Functor, FunctorExpr, SetTable, DEFAULT_SEQ_MAX_LEN};
use crate::lifting::{Predicate, Relation};
use crate::logic::{parse_formula, Formula, PredEnv};
use crate::nat::{NatKind, NatTable, NatTrans};
use crate::order::{ExtensionalOrder, OrderKind, OrderSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    #[serde(default)]
    pub sets: BTreeMap<String, Vec<String>>,
    pub functor: FunctorExpr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq_max_len: Option<usize>,
    #[serde(default)]
    pub coalgebras: BTreeMap<String, CoalgebraDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub relations: BTreeMap<String, RelationDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub orders: BTreeMap<String, OrderDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub nats: BTreeMap<String, NatDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub predicates: BTreeMap<String, PredicateDoc>,
    /// Either the tagged-object form or the text syntax of [`parse_formula`].
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty", deserialize_with = "formula_map")]
    pub formulas: BTreeMap<String, Formula>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FormulaSource {
    Text(String),
    Tree(Formula),
}

fn formula_map<'de, D>(de: D) -> std::result::Result<BTreeMap<String, Formula>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    BTreeMap::<String, FormulaSource>::deserialize(de)?
        .into_iter()
        .map(|(name, src)| match src {
            FormulaSource::Tree(f) => Ok((name, f)),
            FormulaSource::Text(t) => parse_formula(&t)
                .map(|f| (name.clone(), f))
                .map_err(|e| serde::de::Error::custom(format!("formula `{name}`: {e}"))),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoalgebraDoc {
    pub states: Vec<String>,
    pub map: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDoc {
    pub from: String,
    pub to: String,
    pub pairs: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredicateDoc {
    pub carrier: String,
    pub members: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinOrder {
    Equality,
    PowSubset,
    PowSupset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderDoc {
    Builtin(BuiltinOrder),
    /// Base preorder per constant set, as element-name pairs.
    Structural(BTreeMap<String, Vec<(String, String)>>),
    Extensional(OneOrMany<ExtensionalDoc>),
    Opposite(Box<OrderDoc>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn as_slice(&self) -> &[T] {
        match self {
            OneOrMany::One(t) => std::slice::from_ref(t),
            OneOrMany::Many(ts) => ts,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionalDoc {
    /// Name of the coalgebra whose state space the pairs range over.
    pub carrier: String,
    pub pairs: Vec<(Value, Value)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NatDoc {
    /// Names the AP set.
    KripkeProj(String),
    KripkeComplement(String),
    ConstLabel {
        ap: String,
        labels: BTreeMap<String, Vec<String>>,
    },
    Table {
        ap: String,
        tables: Vec<NatTableDoc>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NatTableDoc {
    pub carrier: String,
    pub entries: Vec<(Value, Vec<String>)>,
}

/// A loaded and fully validated system.
#[derive(Clone, Debug)]
pub struct System {
    doc: SystemDoc,
    sets: SetTable,
    functor: Arc<Functor>,
    coalgebras: BTreeMap<String, Coalgebra>,
    relations: BTreeMap<String, Relation>,
    orders: BTreeMap<String, OrderSpec>,
    nats: BTreeMap<String, NatTrans>,
    predicates: BTreeMap<String, Predicate>,
}

fn invalid(entity: &str, e: impl std::fmt::Display) -> Error {
    Error::Validation(format!("{entity}: {e}"))
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &str, name: &str) -> Result<&'a T> {
    map.get(name).ok_or_else(|| Error::UnresolvedName(format!("{kind} `{name}`")))
}

impl System {
    /// Read and validate a system file.
    pub fn load(path: impl AsRef<Path>) -> Result<System> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        System::parse(&text)
    }

    pub fn parse(text: &str) -> Result<System> {
        let doc: SystemDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        System::from_doc(doc)
    }

    pub fn from_doc(mut doc: SystemDoc) -> Result<System> {
        let mut sets = SetTable::new();
        for (name, elements) in &doc.sets {
            sets.declare(name, elements.iter().map(String::as_str))
                .map_err(|e| invalid(&format!("set `{name}`"), e))?;
        }
        let functor = Arc::new(
            Functor::resolve(&doc.functor, &sets, doc.seq_max_len.unwrap_or(DEFAULT_SEQ_MAX_LEN))
                .map_err(|e| invalid("functor", e))?,
        );

        let mut coalgebras = BTreeMap::new();
        for (name, cd) in &doc.coalgebras {
            let entity = format!("coalgebra `{name}`");
            let states = Arc::new(
                Carrier::new(name.as_str(), cd.states.iter().map(String::as_str)).map_err(|e| invalid(&entity, e))?,
            );
            if let Some(extra) = cd.map.keys().find(|k| states.position(k).is_none()) {
                return Err(invalid(&entity, format!("map defines unknown state `{extra}`")));
            }
            let mut map = Vec::with_capacity(states.len());
            for s in states.elements() {
                let raw =
                    cd.map.get(s).ok_or_else(|| invalid(&entity, format!("no structure given for state `{s}`")))?;
                let v =
                    decode_value(&functor, &states, raw).map_err(|e| invalid(&format!("{entity}, state `{s}`"), e))?;
                map.push(v);
            }
            let c = Coalgebra::new(states, functor.clone(), map).map_err(|e| invalid(&entity, e))?;
            coalgebras.insert(name.clone(), c);
        }
        let carrier = |entity: &str, name: &str| -> Result<Arc<Carrier>> {
            coalgebras
                .get(name)
                .map(|c: &Coalgebra| c.states().clone())
                .ok_or_else(|| invalid(entity, format!("unknown coalgebra `{name}`")))
        };

        let mut relations = BTreeMap::new();
        for (name, rd) in &doc.relations {
            let entity = format!("relation `{name}`");
            let r = Relation::from_names(
                carrier(&entity, &rd.from)?,
                carrier(&entity, &rd.to)?,
                rd.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())),
            )
            .map_err(|e| invalid(&entity, e))?;
            relations.insert(name.clone(), r);
        }

        let mut predicates = BTreeMap::new();
        for (name, pd) in &doc.predicates {
            let entity = format!("predicate `{name}`");
            let set: BTreeSet<&str> = pd.members.iter().map(String::as_str).collect();
            if set.len() != pd.members.len() {
                return Err(invalid(&entity, "duplicate members"));
            }
            let p = Predicate::from_names(carrier(&entity, &pd.carrier)?, set).map_err(|e| invalid(&entity, e))?;
            predicates.insert(name.clone(), p);
        }

        let mut orders = BTreeMap::new();
        for (name, od) in &doc.orders {
            let entity = format!("order `{name}`");
            let ord = build_order(&functor, od, &|c| carrier(&entity, c)).map_err(|e| match e {
                Error::Validation(m) if m.starts_with(&entity) => Error::Validation(m),
                other => invalid(&entity, other),
            })?;
            orders.insert(name.clone(), ord);
        }

        let mut nats = BTreeMap::new();
        for (name, nd) in &doc.nats {
            let entity = format!("natural transformation `{name}`");
            let nu = build_nat(&functor, &sets, nd, &|c| carrier(&entity, c)).map_err(|e| invalid(&entity, e))?;
            nats.insert(name.clone(), nu);
        }

        let atoms: BTreeSet<String> = nats
            .values()
            .flat_map(|nu: &NatTrans| nu.ap().elements().iter().cloned())
            .filter(|a| !predicates.contains_key(a))
            .collect();
        for phi in doc.formulas.values_mut() {
            *phi = phi.with_atoms(&atoms);
        }
        for (name, phi) in &doc.formulas {
            for p in phi.predicate_names() {
                if !predicates.contains_key(&p) {
                    return Err(invalid(&format!("formula `{name}`"), format!("unknown predicate `{p}`")));
                }
            }
        }

        Ok(System { doc, sets, functor, coalgebras, relations, orders, nats, predicates })
    }

    pub fn doc(&self) -> &SystemDoc {
        &self.doc
    }

    pub fn sets(&self) -> &SetTable {
        &self.sets
    }

    pub fn functor(&self) -> &Arc<Functor> {
        &self.functor
    }

    pub fn coalgebras(&self) -> &BTreeMap<String, Coalgebra> {
        &self.coalgebras
    }

    pub fn coalgebra(&self, name: &str) -> Result<&Coalgebra> {
        lookup(&self.coalgebras, "coalgebra", name)
    }

    pub fn relation(&self, name: &str) -> Result<&Relation> {
        lookup(&self.relations, "relation", name)
    }

    pub fn relations(&self) -> &BTreeMap<String, Relation> {
        &self.relations
    }

    pub fn order(&self, name: &str) -> Result<&OrderSpec> {
        lookup(&self.orders, "order", name)
    }

    pub fn orders(&self) -> &BTreeMap<String, OrderSpec> {
        &self.orders
    }

    pub fn nat(&self, name: &str) -> Result<&NatTrans> {
        lookup(&self.nats, "natural transformation", name)
    }

    pub fn nats(&self) -> &BTreeMap<String, NatTrans> {
        &self.nats
    }

    pub fn predicate(&self, name: &str) -> Result<&Predicate> {
        lookup(&self.predicates, "predicate", name)
    }

    pub fn formula(&self, name: &str) -> Result<&Formula> {
        lookup(&self.doc.formulas, "formula", name)
    }

    /// The coalgebras a relation runs between.
    pub fn endpoints(&self, r: &Relation) -> Result<(&Coalgebra, &Coalgebra)> {
        Ok((self.coalgebra(r.domain().name())?, self.coalgebra(r.codomain().name())?))
    }

    /// All predicates and relations, for formula evaluation.
    pub fn env(&self) -> PredEnv {
        let mut env = PredEnv::new();
        for (n, p) in &self.predicates {
            env.insert_predicate(n, p.clone());
        }
        for (n, r) in &self.relations {
            env.insert_relation(n, r.clone());
        }
        env
    }

    /// Encode a value of `F(states)` in the file notation.
    pub fn encode(&self, states: &Carrier, v: &FValue) -> Value {
        encode_value(&self.functor, states, v)
    }
}

fn build_order(
    functor: &Arc<Functor>,
    od: &OrderDoc,
    carrier: &dyn Fn(&str) -> Result<Arc<Carrier>>,
) -> Result<OrderSpec> {
    match od {
        OrderDoc::Builtin(BuiltinOrder::Equality) => Ok(OrderSpec::equality(functor.clone())),
        OrderDoc::Builtin(BuiltinOrder::PowSubset) => OrderSpec::pow_subset(functor.clone()),
        OrderDoc::Builtin(BuiltinOrder::PowSupset) => OrderSpec::pow_supset(functor.clone()),
        OrderDoc::Structural(base) => OrderSpec::build_order_class_named(functor.clone(), base),
        OrderDoc::Extensional(tables) => {
            let mut out = Vec::new();
            for t in tables.as_slice() {
                let states = carrier(&t.carrier)?;
                let mut pairs = BTreeSet::new();
                for (a, b) in &t.pairs {
                    pairs.insert((decode_value(functor, &states, a)?, decode_value(functor, &states, b)?));
                }
                out.push(ExtensionalOrder { carrier: states, pairs });
            }
            OrderSpec::extensional(functor.clone(), out)
        }
        OrderDoc::Opposite(inner) => Ok(build_order(functor, inner, carrier)?.opposite()),
    }
}

fn build_nat(
    functor: &Arc<Functor>,
    sets: &SetTable,
    nd: &NatDoc,
    carrier: &dyn Fn(&str) -> Result<Arc<Carrier>>,
) -> Result<NatTrans> {
    let ap_names =
        |ap: &Carrier, names: &[String]| -> Result<BTreeSet<usize>> { names.iter().map(|n| ap.require(n)).collect() };
    match nd {
        NatDoc::KripkeProj(ap) => NatTrans::kripke_proj(functor.clone(), sets.get(ap)?.clone()),
        NatDoc::KripkeComplement(ap) => NatTrans::kripke_complement(functor.clone(), sets.get(ap)?.clone()),
        NatDoc::ConstLabel { ap, labels } => {
            let ap = sets.get(ap)?.clone();
            let labelled = crate::nat::labelled_const(functor)
                .ok_or_else(|| Error::Validation(format!("constant labelling needs A or A x G, found {functor}")))?;
            if let Some(extra) = labels.keys().find(|k| labelled.position(k).is_none()) {
                return Err(Error::Validation(format!("`{extra}` is not an element of `{}`", labelled.name())));
            }
            let mut out = Vec::with_capacity(labelled.len());
            for a in labelled.elements() {
                let names = labels.get(a).ok_or_else(|| Error::Validation(format!("no label given for `{a}`")))?;
                out.push(ap_names(&ap, names)?);
            }
            NatTrans::const_label(functor.clone(), ap, out)
        }
        NatDoc::Table { ap, tables } => {
            let ap = sets.get(ap)?.clone();
            let mut out = Vec::new();
            for t in tables {
                let states = carrier(&t.carrier)?;
                let mut entries = BTreeMap::new();
                for (v, names) in &t.entries {
                    let v = decode_value(functor, &states, v)?;
                    if entries.insert(v.clone(), ap_names(&ap, names)?).is_some() {
                        return Err(Error::Validation(format!("duplicate table entry for {v}")));
                    }
                }
                out.push(NatTable { carrier: states, entries });
            }
            NatTrans::table(functor.clone(), ap, out)
        }
    }
}

fn shape(f: &Functor, what: &str, raw: &Value) -> Error {
    Error::ShapeMismatch(format!("expected {what} for {f}, found {raw}"))
}

fn tagged<'a>(raw: &'a Value, tag: &str) -> Option<&'a Value> {
    match raw.as_object() {
        Some(m) if m.len() == 1 => m.get(tag),
        _ => None,
    }
}

/// Decode a value of `F(states)` from the file notation.
pub fn decode_value(f: &Functor, states: &Carrier, raw: &Value) -> Result<FValue> {
    match f {
        Functor::Id => {
            let id = raw.as_str().ok_or_else(|| shape(f, "a state name", raw))?;
            Ok(FValue::State(
                states
                    .position(id)
                    .ok_or_else(|| Error::ShapeMismatch(format!("`{id}` is not a state of `{}`", states.name())))?,
            ))
        }
        Functor::Const(set) => {
            let id = raw.as_str().ok_or_else(|| shape(f, "a constant", raw))?;
            Ok(FValue::Const(
                set.position(id)
                    .ok_or_else(|| Error::ShapeMismatch(format!("`{id}` is not an element of `{}`", set.name())))?,
            ))
        }
        Functor::Prod(l, r) => match tagged(raw, "pair").and_then(Value::as_array).map(Vec::as_slice) {
            Some([a, b]) => Ok(FValue::pair(decode_value(l, states, a)?, decode_value(r, states, b)?)),
            _ => Err(shape(f, "{\"pair\": [a, b]}", raw)),
        },
        Functor::Coprod(l, r) => {
            if let Some(v) = tagged(raw, "inl") {
                Ok(FValue::Inl(Box::new(decode_value(l, states, v)?)))
            } else if let Some(v) = tagged(raw, "inr") {
                Ok(FValue::Inr(Box::new(decode_value(r, states, v)?)))
            } else {
                Err(shape(f, "{\"inl\": v} or {\"inr\": v}", raw))
            }
        }
        Functor::Exp(base, exponent) => {
            let m = tagged(raw, "fun").and_then(Value::as_object).ok_or_else(|| shape(f, "{\"fun\": {..}}", raw))?;
            if let Some(extra) = m.keys().find(|k| exponent.position(k).is_none()) {
                return Err(Error::ShapeMismatch(format!("`{extra}` is not an element of `{}`", exponent.name())));
            }
            let items = exponent
                .elements()
                .iter()
                .map(|a| {
                    let v =
                        m.get(a).ok_or_else(|| Error::ShapeMismatch(format!("function is not defined at `{a}`")))?;
                    decode_value(base, states, v)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FValue::Func(items))
        }
        Functor::Pow(base) => {
            let items = tagged(raw, "set").and_then(Value::as_array).ok_or_else(|| shape(f, "{\"set\": [..]}", raw))?;
            let mut set = BTreeSet::new();
            for item in items {
                let v = decode_value(base, states, item)?;
                if !set.insert(v) {
                    return Err(Error::ShapeMismatch(format!("duplicate set member {item}")));
                }
            }
            Ok(FValue::Set(set))
        }
        Functor::Seq(base, max_len) => {
            let items =
                tagged(raw, "list").and_then(Value::as_array).ok_or_else(|| shape(f, "{\"list\": [..]}", raw))?;
            if items.len() > *max_len {
                return Err(Error::ShapeMismatch(format!(
                    "list of length {} exceeds the maximum {max_len}",
                    items.len()
                )));
            }
            Ok(FValue::List(items.iter().map(|v| decode_value(base, states, v)).collect::<Result<_>>()?))
        }
    }
}

/// Encode a value of `F(states)` in the file notation.
pub fn encode_value(f: &Functor, states: &Carrier, v: &FValue) -> Value {
    match (f, v) {
        (Functor::Id, FValue::State(x)) => json!(states.element(*x)),
        (Functor::Const(set), FValue::Const(a)) => json!(set.element(*a)),
        (Functor::Prod(l, r), FValue::Pair(a, b)) => {
            json!({"pair": [encode_value(l, states, a), encode_value(r, states, b)]})
        }
        (Functor::Coprod(l, _), FValue::Inl(a)) => json!({"inl": encode_value(l, states, a)}),
        (Functor::Coprod(_, r), FValue::Inr(b)) => json!({"inr": encode_value(r, states, b)}),
        (Functor::Exp(base, exponent), FValue::Func(items)) => {
            let m: serde_json::Map<String, Value> = exponent
                .elements()
                .iter()
                .zip(items)
                .map(|(a, item)| (a.clone(), encode_value(base, states, item)))
                .collect();
            json!({ "fun": m })
        }
        (Functor::Pow(base), FValue::Set(items)) => {
            json!({"set": items.iter().map(|i| encode_value(base, states, i)).collect::<Vec<_>>()})
        }
        (Functor::Seq(base, _), FValue::List(items)) => {
            json!({"list": items.iter().map(|i| encode_value(base, states, i)).collect::<Vec<_>>()})
        }
        _ => panic!("value {v} does not have the shape of {f}"),
    }
}

/// Incremental construction of a [`SystemDoc`] from in-memory objects.
impl SystemDoc {
    pub fn new(sets: &SetTable, functor: &Functor) -> SystemDoc {
        let used = functor.referenced_sets();
        SystemDoc {
            sets: sets
                .iter()
                .filter(|(n, _)| used.contains_key(*n))
                .map(|(n, c)| (n.clone(), c.elements().to_vec()))
                .collect(),
            functor: functor.expr(),
            seq_max_len: seq_len(functor),
            coalgebras: BTreeMap::new(),
            relations: BTreeMap::new(),
            orders: BTreeMap::new(),
            nats: BTreeMap::new(),
            predicates: BTreeMap::new(),
            formulas: BTreeMap::new(),
        }
    }

    /// Add `c` under the name of its carrier.
    pub fn add_coalgebra(&mut self, c: &Coalgebra) {
        let states = c.states();
        let map = (0..c.len())
            .map(|x| (states.element(x).to_string(), encode_value(c.functor(), states, c.structure(x))))
            .collect();
        self.coalgebras.insert(states.name().to_string(), CoalgebraDoc { states: states.elements().to_vec(), map });
    }

    pub fn add_relation(&mut self, name: &str, r: &Relation) {
        self.relations.insert(
            name.to_string(),
            RelationDoc {
                from: r.domain().name().to_string(),
                to: r.codomain().name().to_string(),
                pairs: r.named_pairs().into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            },
        );
    }

    pub fn add_predicate(&mut self, name: &str, p: &Predicate) {
        self.predicates.insert(
            name.to_string(),
            PredicateDoc {
                carrier: p.carrier().name().to_string(),
                members: p.names().into_iter().map(str::to_string).collect(),
            },
        );
    }

    pub fn add_formula(&mut self, name: &str, phi: &Formula) {
        self.formulas.insert(name.to_string(), phi.clone());
    }

    pub fn add_order(&mut self, name: &str, ord: &OrderSpec) {
        self.orders.insert(name.to_string(), order_doc(ord.functor(), ord.kind()));
    }

    pub fn add_nat(&mut self, name: &str, nu: &NatTrans) {
        let ap = nu.ap();
        self.sets.entry(ap.name().to_string()).or_insert_with(|| ap.elements().to_vec());
        let names = |s: &BTreeSet<usize>| s.iter().map(|&i| ap.element(i).to_string()).collect::<Vec<_>>();
        let doc = match nu.kind() {
            NatKind::KripkeProj => NatDoc::KripkeProj(ap.name().to_string()),
            NatKind::KripkeComplement => NatDoc::KripkeComplement(ap.name().to_string()),
            NatKind::ConstLabel(labels) => {
                let set = crate::nat::labelled_const(nu.source()).expect("validated at construction");
                NatDoc::ConstLabel {
                    ap: ap.name().to_string(),
                    labels: set.elements().iter().zip(labels).map(|(a, l)| (a.clone(), names(l))).collect(),
                }
            }
            NatKind::Table(tables) => NatDoc::Table {
                ap: ap.name().to_string(),
                tables: tables
                    .iter()
                    .map(|t| NatTableDoc {
                        carrier: t.carrier.name().to_string(),
                        entries: t
                            .entries
                            .iter()
                            .map(|(v, l)| (encode_value(nu.source(), &t.carrier, v), names(l)))
                            .collect(),
                    })
                    .collect(),
            },
        };
        self.nats.insert(name.to_string(), doc);
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }
}

fn seq_len(f: &Functor) -> Option<usize> {
    match f {
        Functor::Id | Functor::Const(_) => None,
        Functor::Seq(_, n) => Some(*n),
        Functor::Prod(l, r) | Functor::Coprod(l, r) => seq_len(l).or_else(|| seq_len(r)),
        Functor::Exp(b, _) | Functor::Pow(b) => seq_len(b),
    }
}

fn order_doc(f: &Functor, kind: &OrderKind) -> OrderDoc {
    match kind {
        OrderKind::Equality => OrderDoc::Builtin(BuiltinOrder::Equality),
        OrderKind::PowSubset => OrderDoc::Builtin(BuiltinOrder::PowSubset),
        OrderKind::PowSupset => OrderDoc::Builtin(BuiltinOrder::PowSupset),
        OrderKind::Structural(base) => {
            let sets = f.referenced_sets();
            OrderDoc::Structural(
                base.preorders()
                    .iter()
                    .map(|(name, pairs)| {
                        let set = &sets[name];
                        let named = pairs
                            .iter()
                            .map(|&(a, b)| (set.element(a).to_string(), set.element(b).to_string()))
                            .collect();
                        (name.clone(), named)
                    })
                    .collect(),
            )
        }
        OrderKind::Extensional(tables) => OrderDoc::Extensional(OneOrMany::Many(
            tables
                .iter()
                .map(|t| ExtensionalDoc {
                    carrier: t.carrier.name().to_string(),
                    pairs: t
                        .pairs
                        .iter()
                        .map(|(a, b)| (encode_value(f, &t.carrier, a), encode_value(f, &t.carrier, b)))
                        .collect(),
                })
                .collect(),
        )),
        OrderKind::Opposite(inner) => OrderDoc::Opposite(Box::new(order_doc(f, inner))),
    }
}
