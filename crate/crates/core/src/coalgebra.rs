use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functor::{Carrier, FValue, Functor};

/// A finite coalgebra `c : X → F(X)`.
#[derive(Clone, PartialEq, Eq)]
pub struct Coalgebra {
    states: Arc<Carrier>,
    functor: Arc<Functor>,
    map: Vec<FValue>,
}

impl Coalgebra {
    /// `map[i]` is the structure of the `i`-th state.
    pub fn new(states: Arc<Carrier>, functor: Arc<Functor>, map: Vec<FValue>) -> Result<Self> {
        if map.len() != states.len() {
            return Err(Error::Validation(format!(
                "coalgebra on `{}` defines {} of {} states",
                states.name(),
                map.len(),
                states.len()
            )));
        }
        for (i, v) in map.iter().enumerate() {
            if !functor.validates(states.len(), v) {
                return Err(Error::ShapeMismatch(format!(
                    "structure of `{}` in `{}` is not an element of {}",
                    states.element(i),
                    states.name(),
                    functor
                )));
            }
        }
        Ok(Coalgebra { states, functor, map })
    }

    pub fn states(&self) -> &Arc<Carrier> {
        &self.states
    }

    pub fn functor(&self) -> &Functor {
        &self.functor
    }

    pub fn functor_arc(&self) -> &Arc<Functor> {
        &self.functor
    }

    /// `c(x)` in the file notation, with state and constant names.
    pub fn show(&self, x: usize) -> String {
        crate::description::encode_value(&self.functor, &self.states, &self.map[x]).to_string()
    }

    pub fn structure(&self, x: usize) -> &FValue {
        &self.map[x]
    }

    pub fn structures(&self) -> &[FValue] {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// The same coalgebra with its states renamed to `states`.
    pub fn with_carrier(&self, states: Arc<Carrier>) -> Result<Self> {
        Coalgebra::new(states, self.functor.clone(), self.map.clone())
    }
}

impl fmt::Debug for Coalgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (i, v) in self.map.iter().enumerate() {
            m.entry(&self.states.element(i), &format_args!("{v}"));
        }
        m.finish()
    }
}
