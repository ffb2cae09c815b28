//! Numerics for the minimal and maximal k-th fractional truncated Laplacians
//! `I_k^±` on the half-space: special constants and critical exponents,
//! operator evaluation on line sections, the explicit barrier constructions,
//! and checks of the inequalities they satisfy.

pub mod constants;
pub mod operators;
pub mod profiles;
pub mod quad;
pub mod verify;
