//! Coalgebraic bisimulation and simulation on finite systems, the temporal
//! logic interpreted over them, and randomized checks of the transfer
//! results between the two.

pub mod coalgebra;
pub mod description;
pub mod error;
pub mod functor;
pub mod harness;
pub mod lifting;
pub mod logic;
pub mod nat;
pub mod order;
pub mod simulation;

pub use coalgebra::Coalgebra;
pub use error::{Error, Result};
pub use functor::{Carrier, FValue, Functor, FunctorExpr, SetTable, DEFAULT_GUARD, DEFAULT_SEQ_MAX_LEN};
pub use lifting::{Predicate, Relation};
pub use logic::{Direction, Formula, PredEnv, RelRef};
pub use nat::{NatKind, NatTrans};
pub use order::{OrderKind, OrderSpec, Verdict};
pub use simulation::{CheckReport, Witness};
