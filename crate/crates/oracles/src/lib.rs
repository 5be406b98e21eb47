//! Reference implementations used to check `semistream`: dense linear
//! algebra, an exact rational simplex, exact matching solvers, dense
//! barrier calculus and seeded instance generators. Everything here keeps
//! the whole input in memory.

pub mod central;
pub mod dense;
pub mod gen;
pub mod matching;
pub mod simplex;

pub use matching::{brute_force_mwm, hungarian_mwm};
