//! β-expansions, the GLS partition of `[0, 1)` built from the expansion of
//! 1, and the natural extension of `T_β` as a tower of rectangles.

mod hp;
mod system;
mod tower;

pub use system::{t_beta, BetaSystem, BetaValue, GlsCell, HpReal, DEFAULT_DEPTH};
pub use tower::{
    first_return_time, gls_natural_extension, golden_conjugacy_check, golden_w_induced, identity_check,
    induced_by_iteration, induced_map_z0, natural_extension_step, ConjugacyReport, ExtensionPoint, IdentityReport,
    FIBER_DEPTH,
};
