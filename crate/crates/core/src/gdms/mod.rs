//! Conformal graph directed Markov systems on intervals.

mod branch;
mod builtins;
mod geometric;
mod jump;
mod system;

pub use branch::{Branch, BranchMap, Interval};
pub use builtins::{backward_cf, gauss_cf, gls, gls_countable, luroth, manneville_pomeau};
pub use geometric::geometric_potential;
pub use jump::{
    jump_transform, parabolic_asymptotics, AsymptoticsReport, ContractionBound, DerivedLetter, JumpSystem,
    ParabolicPoint, ParabolicSystem, ASYMPTOTICS_RESIDUAL_LIMIT, DEFAULT_JUMP_CAP,
};
pub use system::{BdpReport, BranchImage, CodingPoint, Gdms, OscReport, Overlap, DEFAULT_GRID, MAX_CODING_PREFIX};
