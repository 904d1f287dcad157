//! Mathematical expressions: the common language of contracts, VCs and the
//! prover.

pub mod eval;
mod exp;
mod render;
mod sort;
mod state;
mod subst;

pub use exp::{Key, MathExp, Var};
pub use sort::{Sort, ANY_ENTRY};
pub use state::ValueState;
pub use subst::{substitute, Bindings, MathError};
