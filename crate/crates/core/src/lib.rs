//! Numerical tools for sequential probability assignment under log loss:
//! exact minimax regret on small games, sequential covers, regret bounds
//! and their rate exponents, lemma checks, and the bin-based lower-bound
//! construction.

pub mod assouad;
pub mod bounds;
pub mod class;
pub mod cover;
pub mod curve;
pub mod error;
pub mod game;
pub mod loss;
pub mod num;
pub mod optim;
pub mod tree;
pub mod verify;

pub use curve::EntropyCurve;
pub use error::{Error, Result};
pub use num::Real;

/// Double-precision aliases.
pub type Prob = loss::Prob<f64>;
pub type ExpertClass = class::ExpertClass<f64>;
pub type GameInstance = game::GameInstance<f64>;
pub type DualStrategy = game::DualStrategy<f64>;
pub type RegretTrace = game::RegretTrace<f64>;
pub type RestrictedClass = cover::RestrictedClass<f64>;
pub type SequentialCover = cover::SequentialCover<f64>;
