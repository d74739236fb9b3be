//! Time-frequency limiting operators on discrete abelian groups.

pub mod approx;
pub mod error;
pub mod fast_apply;
pub mod group;
pub mod operator;
pub mod spectral;
