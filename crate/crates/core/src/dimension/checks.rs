//! Measured pointwise dimensions of GLS natural-extension measures against
//! the entropy over Lyapunov exponent predictions.

use serde::{Deserialize, Serialize};

use super::gls_model::GlsModel;
use super::local::{local_dimension, LocalDimensionEstimate, LocalDimensionParams};
use super::lyapunov::LyapunovEstimate;
use crate::Result;

/// Truncation mass allowed in the closed-form Lyapunov exponent.
pub const CHECK_MAX_TAIL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionCheckParams {
    /// Cloud size.
    pub points: usize,
    /// Estimator settings for one-dimensional (base and fiber) clouds.
    pub line: LocalDimensionParams,
    /// Estimator settings for the planar cloud; coarser radii, since ball
    /// counts fall off faster in two dimensions.
    pub plane: LocalDimensionParams,
}

impl Default for DimensionCheckParams {
    fn default() -> Self {
        Self {
            points: 200_000,
            line: LocalDimensionParams::default(),
            plane: LocalDimensionParams { j_min: 3, j_max: 12, ..Default::default() },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionalDimensionReport {
    pub entropy: f64,
    pub lyapunov: LyapunovEstimate,
    /// `h / χ`.
    pub predicted: f64,
    pub fiber: LocalDimensionEstimate,
    /// `|fiber - predicted| / predicted`, or the absolute gap when the
    /// prediction is 0.
    pub relative_error: f64,
    /// Pooled fiber slope at most 1.05.
    pub within_ambient: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GlobalDimensionReport {
    pub entropy: f64,
    pub lyapunov: LyapunovEstimate,
    /// `2h / χ`.
    pub predicted: f64,
    pub global: LocalDimensionEstimate,
    pub base: LocalDimensionEstimate,
    pub fiber: LocalDimensionEstimate,
    pub relative_error: f64,
    /// `global - (base + fiber)`.
    pub additivity_gap: f64,
    /// Root sum of squares of the three pooled standard deviations.
    pub combined_error: f64,
    pub additive: bool,
}

fn relative(measured: f64, predicted: f64) -> f64 {
    if predicted == 0.0 {
        measured.abs()
    } else {
        (measured - predicted).abs() / predicted
    }
}

/// Fiber slope over a fixed typical `x` against `h/χ`.
pub fn conditional_dimension_check(
    model: &GlsModel,
    params: &DimensionCheckParams,
    seed: u64,
) -> Result<ConditionalDimensionReport> {
    let entropy = model.entropy();
    let lyapunov = model.lyapunov_closed_form(CHECK_MAX_TAIL)?;
    let predicted = entropy / lyapunov.value;
    let cloud = model.fiber_cloud(params.points, seed)?;
    let fiber = local_dimension(&cloud, &params.line, seed ^ 0x5eed)?;
    Ok(ConditionalDimensionReport {
        entropy,
        predicted,
        relative_error: relative(fiber.mean, predicted),
        within_ambient: fiber.mean <= 1.05,
        lyapunov,
        fiber,
    })
}

/// Planar slope of stationary `(x, y)` points against `2h/χ`, with the
/// base and fiber slopes measured separately.
pub fn global_dimension_check(
    model: &GlsModel,
    params: &DimensionCheckParams,
    seed: u64,
) -> Result<GlobalDimensionReport> {
    let entropy = model.entropy();
    let lyapunov = model.lyapunov_closed_form(CHECK_MAX_TAIL)?;
    let predicted = 2.0 * entropy / lyapunov.value;
    let joint = model.joint_cloud(params.points, seed)?;
    let global = local_dimension(&joint, &params.plane, seed ^ 0x5eed)?;
    let base = local_dimension(&joint.first_coordinate(), &params.line, seed ^ 0xba5e)?;
    let fiber_cloud = model.fiber_cloud(params.points, seed.wrapping_add(1))?;
    let fiber = local_dimension(&fiber_cloud, &params.line, seed ^ 0xf1be)?;
    let additivity_gap = global.mean - (base.mean + fiber.mean);
    let combined_error = (global.std.powi(2) + base.std.powi(2) + fiber.std.powi(2)).sqrt();
    Ok(GlobalDimensionReport {
        entropy,
        predicted,
        relative_error: relative(global.mean, predicted),
        additive: additivity_gap.abs() < combined_error,
        additivity_gap,
        combined_error,
        lyapunov,
        global,
        base,
        fiber,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::{BetaSystem, BetaValue, GlsCell};
    use crate::dimension::CellWeighting;
    use crate::shift::{Potential, ShiftSpace};

    #[test]
    fn single_cell_fiber_is_atomic() {
        let cell = GlsCell { n: 1, k: 0, i: 1, left: 0.0, right: 1.0, length: 1.0 };
        let model = GlsModel::from_parts(2.0, vec![cell], &ShiftSpace::full(1), Potential::constant(0.0), 0.0).unwrap();
        let p = DimensionCheckParams { points: 5000, ..Default::default() };
        let r = conditional_dimension_check(&model, &p, 3).unwrap();
        assert_eq!(r.predicted, 0.0);
        assert_eq!(r.fiber.mean, 0.0);
    }

    #[test]
    fn golden_bernoulli_fiber() {
        let b = BetaSystem::new(BetaValue::Golden).unwrap();
        let model = GlsModel::new(&b, &CellWeighting::Bernoulli { weights: vec![0.5, 0.5] }, 2).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let r = conditional_dimension_check(&model, &DimensionCheckParams::default(), 11).unwrap();
        let expected = 2f64.ln() / (phi.ln() * 1.5);
        assert!((r.predicted - expected).abs() < 1e-12);
        assert!(r.relative_error < 0.05, "{} vs {expected}", r.fiber.mean);
        assert!(r.within_ambient);
    }
}
