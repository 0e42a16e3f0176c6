//! Thermodynamic formalism on countable-alphabet shifts, conformal graph
//! directed Markov systems on intervals, and natural extensions of
//! β-transformations, with numerical checks of the dimension formulas for
//! equilibrium states.
//!
//! The crate is organised in four layers:
//!
//! * [`shift`]: shift spaces, potentials, pressure and Gibbs measures
//!   realised as stationary Markov chains on memory-`m` cylinders.
//! * [`gdms`]: one-dimensional conformal GDMS, built-in systems (Gauss,
//!   backward continued fractions, Manneville–Pomeau, Lüroth) and the jump
//!   transform for parabolic systems.
//! * [`beta`]: β-expansions, the stacked-rectangle natural extension and its
//!   induced map on the unit square, which is the natural extension of a
//!   generalized Lüroth system.
//! * [`dimension`]: Lyapunov exponents, empirical pointwise dimension,
//!   the h/χ and 2h/χ checks and pressure-equation root finding.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beta;
pub mod dimension;
pub mod error;
pub mod gdms;
pub mod numeric;
pub mod shift;

pub use error::{Error, Result};
