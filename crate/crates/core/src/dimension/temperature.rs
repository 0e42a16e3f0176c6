//! Roots of the pressure equation for the geometric potential family:
//! temperature points and the Hausdorff dimension of limit sets.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::gdms::{geometric_potential, Gdms};
use crate::numeric::brent_root;
use crate::shift::{
    rpf_eigendata, summability_report, Letter, Potential, StateGraph, SummabilityVerdict, DEFAULT_CYLINDER_CAP,
};
use crate::{Error, Result};

/// Largest accepted `|P|` at the returned root.
pub const TEMPERATURE_RESIDUAL: f64 = 1e-9;
/// Relative increment below which a countable partial sum counts as
/// converged.
pub const SUMMABILITY_TOL: f64 = 1e-3;
const INTERIOR_PROBES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PressureSettings {
    pub memory: usize,
    pub truncation: usize,
    /// Treat the first `truncation` edges as the system itself rather than
    /// as an approximation of a countable one; no summability probing.
    pub subsystem: bool,
}

impl Default for PressureSettings {
    fn default() -> Self {
        Self { memory: 1, truncation: 4096, subsystem: false }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Probe {
    pub t: f64,
    pub pressure: f64,
    pub summable: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TemperatureResult {
    pub q: f64,
    pub t: f64,
    pub bracket: (f64, f64),
    /// `|P(θ_{q,t})|` at the root.
    pub residual: f64,
    /// Bracket ends and interior probes in increasing `t`.
    pub probes: Vec<Probe>,
    /// Pressure strictly decreasing across the probes.
    pub monotone: bool,
}

/// Per-window tables of `log|φ'|` and of `θ`, so each pressure evaluation
/// only rescales numbers.
struct Family {
    space: crate::shift::ShiftSpace,
    memory: usize,
    truncation: usize,
    countable: bool,
    log_derivative: Arc<HashMap<Vec<Letter>, f64>>,
    theta: Option<Arc<HashMap<Vec<Letter>, f64>>>,
    p_theta: f64,
    q: f64,
}

impl Family {
    fn new(system: &Gdms, theta: Option<(&Potential, f64)>, q: f64, settings: &PressureSettings) -> Result<Self> {
        let memory = settings.memory.max(theta.map_or(1, |(th, _)| th.memory()));
        let space = system.shift_space();
        let graph = StateGraph::build(&space, memory, settings.truncation, DEFAULT_CYLINDER_CAP)?;
        let geometric = geometric_potential(system, 1.0, 0.0, None, 0.0, memory, settings.truncation);
        let mut log_derivative = HashMap::with_capacity(graph.len());
        let mut theta_table = theta.map(|_| HashMap::with_capacity(graph.len()));
        for s in graph.states() {
            log_derivative.insert(s.clone(), geometric.value(s)?);
            if let (Some(table), Some((th, _))) = (theta_table.as_mut(), theta) {
                table.insert(s.clone(), th.value(&s[..th.memory()])?);
            }
        }
        Ok(Self {
            space,
            memory,
            truncation: settings.truncation,
            countable: !settings.subsystem && system.edge_count().is_none_or(|k| k > settings.truncation),
            log_derivative: Arc::new(log_derivative),
            theta: theta_table.map(Arc::new),
            p_theta: theta.map_or(0.0, |(_, p)| p),
            q,
        })
    }

    fn potential(&self, t: f64) -> Potential {
        let ld = Arc::clone(&self.log_derivative);
        let th = self.theta.clone();
        let (q, p) = (self.q, self.p_theta);
        let m = self.memory;
        Potential::from_fn(m, move |w| {
            let key = &w[..m];
            let g = ld.get(key).copied().unwrap_or(f64::NEG_INFINITY);
            let geometric = if t == 0.0 { 0.0 } else { t * g };
            let weight = match &th {
                _ if q == 0.0 => 0.0,
                Some(table) => q * (table.get(key).copied().unwrap_or(f64::NEG_INFINITY) - p),
                None => -q * p,
            };
            geometric + weight
        })
    }

    fn pressure(&self, t: f64) -> Result<f64> {
        Ok(rpf_eigendata(&self.space, &self.potential(t), self.truncation)?.log_rho)
    }

    fn summable(&self, t: f64) -> bool {
        !self.countable
            || summability_report(&self.space, &self.potential(t), self.truncation, SUMMABILITY_TOL).verdict
                == SummabilityVerdict::Converged
    }
}

/// `T(q)`: the `t` with `P(t log|φ'| + q(θ - P_θ)) = 0`, found by Brent's
/// method on `bracket` (default `[1e-3, d + 1]` with `d = 1`). `theta`
/// carries `θ` and its pressure `P_θ`; without it the weight term is
/// `-q P_θ` with `P_θ = 0`.
pub fn temperature(
    system: &Gdms,
    theta: Option<(&Potential, f64)>,
    q: f64,
    bracket: Option<(f64, f64)>,
    settings: &PressureSettings,
) -> Result<TemperatureResult> {
    let (lo, hi) = bracket.unwrap_or((1e-3, 2.0));
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("bad bracket [{lo}, {hi}]")));
    }
    let family = Family::new(system, theta, q, settings)?;
    let mut probes = Vec::with_capacity(INTERIOR_PROBES + 2);
    for i in 0..=INTERIOR_PROBES + 1 {
        let t = lo + (hi - lo) * i as f64 / (INTERIOR_PROBES + 1) as f64;
        probes.push(Probe { t, pressure: family.pressure(t)?, summable: family.summable(t) });
    }
    let monotone = probes.windows(2).all(|w| w[1].pressure < w[0].pressure);
    let (p_lo, p_hi) = (probes[0].pressure, probes[INTERIOR_PROBES + 1].pressure);
    let t = if p_lo.abs() < TEMPERATURE_RESIDUAL {
        lo
    } else if p_hi.abs() < TEMPERATURE_RESIDUAL {
        hi
    } else if p_lo.signum() == p_hi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    } else {
        let f = |t: f64| family.pressure(t).unwrap_or(f64::NAN);
        brent_root(lo, hi, f, 1e-14).ok_or(Error::NoConvergence { iterations: 200, gap: hi - lo })?
    };
    let residual = family.pressure(t)?.abs();
    if !(residual < TEMPERATURE_RESIDUAL) {
        return Err(Error::NoConvergence { iterations: 200, gap: residual });
    }
    if !family.summable(t) {
        return Err(Error::NotSummable { t });
    }
    Ok(TemperatureResult { q, t, bracket: (lo, hi), residual, probes, monotone })
}

/// Hausdorff dimension of the limit set: the `q = 0` temperature.
pub fn hd_limit_set(system: &Gdms, bracket: Option<(f64, f64)>, settings: &PressureSettings) -> Result<f64> {
    temperature(system, None, 0.0, bracket, settings).map(|r| r.t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gdms::{gauss_cf, Branch, BranchMap, Interval};

    fn affine(slopes: &[f64]) -> Gdms {
        let mut offset = 0.0;
        let branches = slopes
            .iter()
            .enumerate()
            .map(|(e, &r)| {
                let b = Branch::new(e.to_string(), 0, 0, BranchMap::affine(r, offset));
                offset += r;
                b
            })
            .collect();
        Gdms::finite("affine", vec![Interval::unit()], branches).unwrap()
    }

    #[test]
    fn moran_two_thirds() {
        let s = Gdms::finite(
            "cantor",
            vec![Interval::unit()],
            vec![
                Branch::new("0", 0, 0, BranchMap::affine(1.0 / 3.0, 0.0)),
                Branch::new("1", 0, 0, BranchMap::affine(1.0 / 3.0, 2.0 / 3.0)),
            ],
        )
        .unwrap();
        let r = temperature(&s, None, 0.0, None, &PressureSettings::default()).unwrap();
        assert!((r.t - 2f64.ln() / 3f64.ln()).abs() < 1e-9);
        assert!(r.monotone && r.residual < 1e-9);
        assert_eq!(hd_limit_set(&s, None, &PressureSettings::default()).unwrap(), r.t);
    }

    #[test]
    fn full_affine_has_dimension_one() {
        for k in 2..6 {
            let s = affine(&vec![1.0 / k as f64; k]);
            assert!((hd_limit_set(&s, None, &PressureSettings::default()).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn golden_slopes() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let s = affine(&[1.0 / phi, 1.0 / (phi * phi)]);
        assert!((hd_limit_set(&s, None, &PressureSettings::default()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_branch_is_zero() {
        let s = affine(&[0.4]);
        assert!(temperature(&s, None, 0.0, None, &PressureSettings::default()).is_err());
        assert_eq!(hd_limit_set(&s, Some((0.0, 2.0)), &PressureSettings::default()).unwrap(), 0.0);
    }

    #[test]
    fn weighted_moran_temperature() {
        // θ(e) = log p_e on ratios r_e: Σ p_e^q r_e^t = 1
        let s = affine(&[0.5, 0.25]);
        let theta = Potential::letter_table(vec![0.3f64.ln(), 0.7f64.ln()]);
        for q in [-1.0, 0.5, 2.0] {
            let r = temperature(&s, Some((&theta, 0.0)), q, Some((-6.0, 6.0)), &PressureSettings::default()).unwrap();
            let lhs = 0.3f64.powf(q) * 0.5f64.powf(r.t) + 0.7f64.powf(q) * 0.25f64.powf(r.t);
            assert!((lhs - 1.0).abs() < 1e-9, "q = {q}");
        }
    }

    #[test]
    fn temperature_decreases_in_q() {
        let s = affine(&[0.5, 0.25]);
        let theta = Potential::letter_table(vec![0.3f64.ln(), 0.7f64.ln()]);
        let ts: Vec<f64> = [-1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|&q| {
                temperature(&s, Some((&theta, 0.0)), q, Some((-6.0, 6.0)), &PressureSettings::default()).unwrap().t
            })
            .collect();
        assert!(ts.windows(2).all(|w| w[1] < w[0]));
        // q = 1 with a probability vector gives T = 0
        assert!(ts[2].abs() < 1e-9);
    }

    #[test]
    fn gauss_two_branch_memory_sweep() {
        let t: Vec<f64> = (8..=12)
            .map(|m| {
                let settings = PressureSettings { memory: m, truncation: 2, subsystem: true };
                hd_limit_set(&gauss_cf(), None, &settings).unwrap()
            })
            .collect();
        let diffs: Vec<f64> = t.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        assert!(diffs.windows(2).all(|d| d[1] < d[0]));
        assert!(diffs.last().unwrap() < &1e-6);
        assert!((t.last().unwrap() - 0.5312).abs() < 1e-4);
    }

    #[test]
    fn gauss_memory_one_pressure_is_monotone() {
        let settings = PressureSettings { memory: 1, truncation: 1 << 12, subsystem: false };
        let r = temperature(&gauss_cf(), None, 0.0, Some((0.75, 2.0)), &settings).unwrap();
        assert!(r.monotone && r.residual < 1e-9);
        assert!(r.t > 0.5 && r.t < 1.0);
    }

    #[test]
    fn gauss_below_half_is_not_summable() {
        let settings = PressureSettings { memory: 1, truncation: 1 << 12, subsystem: false };
        let r = temperature(&gauss_cf(), None, 0.0, Some((0.3, 2.0)), &settings).unwrap();
        assert!(!r.probes[0].summable);
        assert!(r.probes.last().unwrap().summable);
    }
}
