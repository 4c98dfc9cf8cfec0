//! Weighted shifts on directed forests.
//!
//! The crate models a directed forest as a finite parent map, attaches
//! squared weights and eventually constant unary tails to obtain a bounded
//! weighted shift, and certifies (power) hyponormality and subnormality in
//! exact rational arithmetic. It also builds backward extensions of
//! subnormal shifts and joint extensions of families of shifts.

pub mod error;
pub mod forest;
pub mod gauge;
pub mod gen;
pub mod hypo;
pub mod json;
pub mod linalg;
pub mod moments;
pub mod rational;
pub mod scalar;
pub mod shift;
pub mod subnormal;

pub use error::{Error, Result};
pub use forest::{DirectedForest, ForestClassification, VertexId};
pub use moments::AtomicMeasure;
pub use rational::Q;
pub use shift::{make_isometric, Node, TailProfile, WeightSystem, WeightedShift};
