//! Lyapunov exponents: Birkhoff averages along sampled orbits and the
//! closed forms available for GLS systems.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::beta::GlsCell;
use crate::gdms::Gdms;
use crate::numeric::{mean_std, pairwise_sum, task_rng};
use crate::shift::GibbsMarkovMeasure;
use crate::{Error, Result};

/// Extra letters appended to sampled words so the last tracked point is
/// determined to double precision.
const TAIL_LETTERS: usize = 64;

/// A piecewise expanding interval map with a derivative evaluator.
pub trait ExpandingMap: Sync {
    /// Half-open domain `[lo, hi)`.
    fn domain(&self) -> (f64, f64);
    fn apply(&self, x: f64) -> Result<f64>;
    /// `log|f'(x)|`.
    fn log_derivative(&self, x: f64) -> Result<f64>;
}

/// `x ↦ 1/x mod 1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct GaussMap;

impl ExpandingMap for GaussMap {
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn apply(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!("Gauss map is undefined at {x}")));
        }
        let y = 1.0 / x;
        Ok(y - y.floor())
    }

    fn log_derivative(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("Gauss map is undefined at {x}")));
        }
        Ok(-2.0 * x.ln())
    }
}

/// `x ↦ βx mod 1`.
#[derive(Clone, Copy, Debug)]
pub struct BetaMap {
    pub beta: f64,
}

impl ExpandingMap for BetaMap {
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn apply(&self, x: f64) -> Result<f64> {
        Ok(crate::beta::t_beta(self.beta, x))
    }

    fn log_derivative(&self, _x: f64) -> Result<f64> {
        Ok(self.beta.ln())
    }
}

impl ExpandingMap for Gdms {
    fn domain(&self) -> (f64, f64) {
        let lo = self.vertices().iter().map(|v| v.lo).fold(f64::INFINITY, f64::min);
        let hi = self.vertices().iter().map(|v| v.hi).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn apply(&self, x: f64) -> Result<f64> {
        self.gdms_map(x)
    }

    fn log_derivative(&self, x: f64) -> Result<f64> {
        self.log_expansion(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LyapunovMethod {
    Birkhoff,
    ClosedFormGls,
    ClosedFormGolden,
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovEstimate {
    /// Nats.
    pub value: f64,
    /// Standard error across orbits; 0 for closed forms.
    pub stderr: f64,
    pub method: LyapunovMethod,
    /// Truncation error bound of a closed form; 0 for Birkhoff estimates.
    pub tail_bound: f64,
    /// Orbits for Birkhoff estimates, summed cells for closed forms.
    pub samples: usize,
}

impl LyapunovEstimate {
    /// Standard error and truncation bound combined.
    pub fn error(&self) -> f64 {
        (self.stderr * self.stderr + self.tail_bound * self.tail_bound).sqrt()
    }
}

/// Where Birkhoff orbits start.
pub enum OrbitSampler<'a> {
    /// Lebesgue-uniform starting points, `burn_in` steps discarded. Orbits
    /// that leave the domain or hit its left endpoint are restarted.
    Lebesgue { map: &'a dyn ExpandingMap, burn_in: usize },
    /// Words from a Gibbs chain on the edges of `system`, pushed through
    /// the coding map.
    Gibbs { system: &'a Gdms, measure: &'a GibbsMarkovMeasure },
}

/// Mean of `(1/n) Σ log|f'(x_t)|` over `n_orbits` independent orbits of
/// `n_steps` steps each; the standard error is taken across orbits.
pub fn lyapunov_birkhoff(
    sampler: &OrbitSampler<'_>,
    n_steps: usize,
    n_orbits: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    if n_steps == 0 || n_orbits == 0 {
        return Err(Error::InvalidParameter("need at least one step and one orbit".into()));
    }
    let means: Vec<f64> = (0..n_orbits)
        .into_par_iter()
        .map(|o| {
            let mut rng = task_rng(seed, o as u64);
            match sampler {
                OrbitSampler::Lebesgue { map, burn_in } => lebesgue_orbit(*map, *burn_in, n_steps, &mut rng),
                OrbitSampler::Gibbs { system, measure } => gibbs_orbit(system, measure, n_steps, &mut rng),
            }
        })
        .collect::<Result<_>>()?;
    let (value, std) = mean_std(&means);
    let stderr = if n_orbits > 1 { std / (n_orbits as f64).sqrt() } else { f64::NAN };
    Ok(LyapunovEstimate { value, stderr, method: LyapunovMethod::Birkhoff, tail_bound: 0.0, samples: n_orbits })
}

fn lebesgue_orbit(map: &dyn ExpandingMap, burn_in: usize, n_steps: usize, rng: &mut impl Rng) -> Result<f64> {
    let (lo, hi) = map.domain();
    let fresh = |rng: &mut dyn rand::RngCore| lo + (hi - lo) * rng.gen::<f64>();
    let mut x = fresh(rng);
    let mut restarts = 0usize;
    let mut step = 0usize;
    let mut logs = Vec::with_capacity(n_steps);
    while logs.len() < n_steps {
        let next = map.log_derivative(x).and_then(|l| map.apply(x).map(|y| (l, y)));
        match next {
            Ok((l, y)) if y > lo && y < hi => {
                if step >= burn_in {
                    logs.push(l);
                }
                x = y;
            }
            _ => {
                restarts += 1;
                if restarts > n_steps / 10 + 10 {
                    return Err(Error::OrbitEscape { step });
                }
                x = fresh(rng);
            }
        }
        step += 1;
    }
    Ok(pairwise_sum(&logs) / n_steps as f64)
}

fn gibbs_orbit(system: &Gdms, measure: &GibbsMarkovMeasure, n_steps: usize, rng: &mut impl Rng) -> Result<f64> {
    let word = measure.sample_forward_with(n_steps + TAIL_LETTERS, rng);
    let last = system.branch(*word.last().unwrap());
    let mut x = system.vertices()[last.source].midpoint();
    let mut logs = vec![0.0; n_steps];
    for (t, &e) in word.iter().enumerate().rev() {
        let b = system.branch(e);
        if t < n_steps {
            let d = b.derivative(x).abs();
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::OrbitEscape { step: t });
            }
            logs[t] = -d.ln();
        }
        x = b.eval(x);
    }
    Ok(pairwise_sum(&logs) / n_steps as f64)
}

/// `log β · Σ_n (k(n)+1) w_n` over the given cells, `weights[i]` being the
/// mass of `cells[i]`. The missing mass `1 - Σ w_n` must not exceed
/// `max_tail`; the reported bound is `log β · (k_max + 1) · tail` with
/// `k_max` the largest block among the cells.
pub fn lyapunov_gls_closed_form(
    cells: &[GlsCell],
    weights: &[f64],
    beta: f64,
    max_tail: f64,
) -> Result<LyapunovEstimate> {
    if weights.is_empty() || weights.len() != cells.len() || weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidParameter("need one nonnegative weight per cell".into()));
    }
    if !(beta > 1.0) {
        return Err(Error::InvalidParameter(format!("β = {beta} must exceed 1")));
    }
    let total = pairwise_sum(weights);
    if total > 1.0 + 1e-9 {
        return Err(Error::InvalidParameter(format!("cell weights sum to {total} > 1")));
    }
    let tail = (1.0 - total).max(0.0);
    if tail > max_tail {
        return Err(Error::InvalidParameter(format!("tail mass {tail:e} exceeds the bound {max_tail:e}")));
    }
    let terms: Vec<f64> = cells.iter().zip(weights).map(|(c, w)| (c.k + 1) as f64 * w).collect();
    let k_max = cells.iter().map(|c| c.k).max().unwrap();
    let log_beta = beta.ln();
    Ok(LyapunovEstimate {
        value: log_beta * pairwise_sum(&terms),
        stderr: 0.0,
        method: LyapunovMethod::ClosedFormGls,
        tail_bound: log_beta * (k_max + 1) as f64 * tail,
        samples: weights.len(),
    })
}

/// Golden-ratio case: `log φ · (1 + w)` with `w` the mass of the second
/// cell `[1/φ, 1)`.
pub fn lyapunov_golden_closed_form(second_cell_mass: f64) -> Result<LyapunovEstimate> {
    if !(0.0..=1.0).contains(&second_cell_mass) {
        return Err(Error::InvalidParameter(format!("cell mass {second_cell_mass} is not a probability")));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    Ok(LyapunovEstimate {
        value: phi.ln() * (1.0 + second_cell_mass),
        stderr: 0.0,
        method: LyapunovMethod::ClosedFormGolden,
        tail_bound: 0.0,
        samples: 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::{BetaSystem, BetaValue};
    use crate::gdms::{gls, Branch, BranchMap, Interval};
    use crate::shift::{Potential, ShiftSpace};

    fn full_affine(k: usize) -> Gdms {
        let branches = (0..k)
            .map(|e| Branch::new(e.to_string(), 0, 0, BranchMap::affine(1.0 / k as f64, e as f64 / k as f64)))
            .collect();
        Gdms::finite("full", vec![Interval::unit()], branches).unwrap()
    }

    #[test]
    fn full_shift_affine_is_log_k() {
        for k in 2..5 {
            let s = full_affine(k);
            let mu = GibbsMarkovMeasure::from_potential(&ShiftSpace::full(k), &Potential::constant(0.0), k).unwrap();
            let est = lyapunov_birkhoff(&OrbitSampler::Gibbs { system: &s, measure: &mu }, 500, 4, 1).unwrap();
            assert!((est.value - (k as f64).ln()).abs() < 1e-12);
            assert!(est.stderr < 1e-12);
        }
    }

    #[test]
    fn beta_map_is_log_beta() {
        let m = BetaMap { beta: 1.8 };
        let est = lyapunov_birkhoff(&OrbitSampler::Lebesgue { map: &m, burn_in: 10 }, 1000, 4, 3).unwrap();
        assert!((est.value - 1.8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gauss_map_acim_value() {
        // trapezoid quadrature of ∫ -2 log x / ((1+x) ln 2) after x = e^{-s}
        let quad = {
            let (n, s_max) = (200_000, 60.0);
            let h = s_max / n as f64;
            let f = |s: f64| 2.0 * s * (-s).exp() / ((1.0 + (-s).exp()) * 2f64.ln());
            (1..n).map(|i| f(i as f64 * h)).sum::<f64>() * h + 0.5 * h * f(s_max)
        };
        let est = lyapunov_birkhoff(&OrbitSampler::Lebesgue { map: &GaussMap, burn_in: 100 }, 100_000, 16, 7).unwrap();
        assert!((est.value - quad).abs() / quad < 5e-3, "{} vs {quad}", est.value);
    }

    #[test]
    fn gdms_map_matches_gibbs_sampler() {
        let lengths = [0.4f64, 0.3, 0.3];
        let s = gls(&[(0.0, 0.4), (0.4, 0.7), (0.7, 1.0)]).unwrap();
        let psi = Potential::letter_table(lengths.iter().map(|l| l.ln()).collect());
        let mu = GibbsMarkovMeasure::from_potential(&ShiftSpace::full(3), &psi, 3).unwrap();
        let gibbs = lyapunov_birkhoff(&OrbitSampler::Gibbs { system: &s, measure: &mu }, 20_000, 8, 5).unwrap();
        // Lebesgue is invariant for a full-branch GLS map
        let leb = lyapunov_birkhoff(&OrbitSampler::Lebesgue { map: &s, burn_in: 0 }, 20_000, 8, 5).unwrap();
        let exact: f64 = lengths.iter().map(|l| -l * l.ln()).sum();
        assert!((gibbs.value - exact).abs() < 4.0 * gibbs.stderr + 1e-12);
        assert!((leb.value - exact).abs() < 4.0 * leb.stderr + 1e-12);
    }

    #[test]
    fn closed_form_golden_matches_gls_sum() {
        let b = BetaSystem::new(BetaValue::Golden).unwrap();
        let w2 = 0.3;
        let gls = lyapunov_gls_closed_form(&b.cells(2).unwrap(), &[1.0 - w2, w2], b.beta(), 1e-12).unwrap();
        let golden = lyapunov_golden_closed_form(w2).unwrap();
        assert!((gls.value - golden.value).abs() < 1e-15);
        assert_eq!(gls.tail_bound, 0.0);
    }

    #[test]
    fn all_mass_on_first_cell() {
        let b = BetaSystem::new(BetaValue::rational(9, 5)).unwrap();
        let e = lyapunov_gls_closed_form(&b.cells(1).unwrap(), &[1.0], b.beta(), 0.0).unwrap();
        let (k, _) = b.cell_index(1).unwrap();
        assert!((e.value - 1.8f64.ln() * (k + 1) as f64).abs() < 1e-15);
    }

    #[test]
    fn tail_mass_is_bounded() {
        let b = BetaSystem::new(BetaValue::rational(9, 5)).unwrap();
        let cells = b.cells(2).unwrap();
        assert!(lyapunov_gls_closed_form(&cells, &[0.5, 0.3], 1.8, 0.1).is_err());
        let e = lyapunov_gls_closed_form(&cells, &[0.5, 0.3], 1.8, 0.25).unwrap();
        assert!(e.tail_bound > 0.0);
        assert!(lyapunov_gls_closed_form(&cells, &[0.8, 0.3], 1.8, 1.0).is_err());
        assert!(lyapunov_gls_closed_form(&cells, &[1.0], 1.8, 1.0).is_err());
    }
}
