//! Markov Gibbs measures on the GLS cell alphabet of a β-map, their closed
//! form entropy and Lyapunov exponent, and point clouds of the natural
//! extension they induce on the unit square.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::local::{generate, Cloud};
use super::lyapunov::{
    lyapunov_birkhoff, lyapunov_gls_closed_form, lyapunov_golden_closed_form, LyapunovEstimate, OrbitSampler,
};
use crate::beta::{BetaSystem, BetaValue, GlsCell};
use crate::gdms::{Branch, BranchMap, Gdms, Interval};
use crate::numeric::{log_sum_exp, task_rng};
use crate::shift::{entropy_from_pressure, GibbsMarkovMeasure, Letter, Potential, ShiftSpace};
use crate::{Error, Result};

/// Default number of GLS cells kept for countable partitions.
pub const DEFAULT_CELLS: usize = 256;

/// How cell weights are chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CellWeighting {
    /// Golden β only: `ψ ≡ 0` on the two cells with the second cell not
    /// allowed to follow itself.
    Parry,
    /// Independent cells with the given (normalised) weights.
    Bernoulli { weights: Vec<f64> },
    /// `ψ(n) = s · log |I_n|`; `s = 1` is Lebesgue on the cells.
    Lengths { exponent: f64 },
    /// `ψ ≡ 0` on a finite partition.
    Zero,
}

#[derive(Clone, Debug)]
pub struct GlsModel {
    beta: f64,
    golden: bool,
    cells: Vec<GlsCell>,
    system: Gdms,
    potential: Potential,
    measure: GibbsMarkovMeasure,
    tail_mass: f64,
    code_len: usize,
}

impl GlsModel {
    /// Model on the first `max_cells` cells (all cells when the expansion
    /// of 1 is finite and shorter).
    pub fn new(beta: &BetaSystem, weighting: &CellWeighting, max_cells: usize) -> Result<Self> {
        let available = beta.available_cells();
        let golden = matches!(beta.value(), BetaValue::Golden);
        let (count, space, potential, tail) = match weighting {
            CellWeighting::Parry => {
                if !golden {
                    return Err(Error::InvalidParameter("the Parry weighting is defined for golden β only".into()));
                }
                (2, ShiftSpace::golden_mean(), Potential::constant(0.0), 0.0)
            }
            CellWeighting::Bernoulli { weights } => {
                if weights.is_empty()
                    || weights.len() > available
                    || weights.iter().any(|w| !(*w > 0.0 && w.is_finite()))
                {
                    return Err(Error::InvalidParameter(format!(
                        "need between 1 and {available} positive finite weights"
                    )));
                }
                let logs = weights.iter().map(|w| w.ln()).collect();
                (weights.len(), ShiftSpace::full(weights.len()), Potential::letter_table(logs), 0.0)
            }
            CellWeighting::Lengths { exponent } => {
                if !(*exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::InvalidParameter(format!("length exponent must be positive, got {exponent}")));
                }
                let all = beta.cells(available)?;
                let logs: Vec<f64> = all.iter().map(|c| -exponent * (c.k + 1) as f64 * beta.beta().ln()).collect();
                let count = max_cells.clamp(1, available);
                let kept = log_sum_exp(logs[..count].iter().copied());
                let total = log_sum_exp(logs.iter().copied());
                let tail = -(kept - total).exp_m1();
                (count, ShiftSpace::full(count), Potential::letter_table(logs[..count].to_vec()), tail.max(0.0))
            }
            CellWeighting::Zero => {
                if !beta.is_finite() {
                    return Err(Error::InvalidParameter("ψ ≡ 0 needs a finite partition".into()));
                }
                (available, ShiftSpace::full(available), Potential::constant(0.0), 0.0)
            }
        };
        let cells = beta.cells(count)?;
        let mut model = Self::from_parts(beta.beta(), cells, &space, potential, tail)?;
        model.golden = golden;
        Ok(model)
    }

    /// Model on arbitrary affine cells; letter `i` is `cells[i]`.
    pub fn from_parts(
        beta: f64,
        cells: Vec<GlsCell>,
        space: &ShiftSpace,
        potential: Potential,
        tail_mass: f64,
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidParameter("a GLS model needs at least one cell".into()));
        }
        let system = cell_system(&cells)?;
        let measure = GibbsMarkovMeasure::from_potential(space, &potential, cells.len())?;
        let max_len = cells.iter().map(|c| c.length).fold(0.0, f64::max);
        let code_len = if max_len < 1.0 { (60.0 * 2f64.ln() / -max_len.ln()).ceil() as usize + 1 } else { 256 };
        Ok(Self { beta, golden: false, cells, system, potential, measure, tail_mass, code_len: code_len.min(4096) })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn cells(&self) -> &[GlsCell] {
        &self.cells
    }

    /// The affine branches onto the cells.
    pub fn system(&self) -> &Gdms {
        &self.system
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn measure(&self) -> &GibbsMarkovMeasure {
        &self.measure
    }

    /// Weight of the cells left out of a truncated countable partition.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `μ(I_n × [0, 1))` for the kept cells, scaled by `1 - tail`.
    pub fn cell_weights(&self) -> Vec<f64> {
        self.measure.letter_marginal().iter().map(|w| w * (1.0 - self.tail_mass)).collect()
    }

    /// Entropy of the chain, from the pressure and the potential integral;
    /// the same for the induced natural extension.
    pub fn entropy(&self) -> f64 {
        entropy_from_pressure(&self.measure, &self.potential)
    }

    pub fn lyapunov_closed_form(&self, max_tail: f64) -> Result<LyapunovEstimate> {
        lyapunov_gls_closed_form(&self.cells, &self.cell_weights(), self.beta, max_tail)
    }

    /// `log φ (1 + w_2)`; golden models only.
    pub fn lyapunov_golden(&self) -> Result<LyapunovEstimate> {
        if !self.golden {
            return Err(Error::InvalidParameter("not a golden-ratio model".into()));
        }
        lyapunov_golden_closed_form(self.cell_weights()[1])
    }

    pub fn lyapunov_birkhoff(&self, n_steps: usize, n_orbits: usize, seed: u64) -> Result<LyapunovEstimate> {
        lyapunov_birkhoff(
            &OrbitSampler::Gibbs { system: &self.system, measure: &self.measure },
            n_steps,
            n_orbits,
            seed,
        )
    }

    /// `x` coded by a future word.
    fn code_future(&self, word: &[Letter]) -> f64 {
        word.iter().rev().fold(0.5, |x, &e| self.cells[e].left + self.cells[e].length * x)
    }

    /// `y` coded by a past word listed oldest first.
    fn code_past(&self, past: &[Letter]) -> f64 {
        past.iter().fold(0.5, |y, &e| self.cells[e].left + self.cells[e].length * y)
    }

    /// First coordinates of stationary points.
    pub fn base_cloud(&self, m: usize, seed: u64) -> Cloud {
        Cloud::Line(generate(m, seed, |rng| {
            let w = self.measure.sample_forward_with(self.code_len, rng);
            self.code_future(&w)
        }))
    }

    /// The future word fixed by [`GlsModel::fiber_cloud`] for `seed`.
    pub fn reference_future(&self, seed: u64) -> Vec<Letter> {
        self.measure.sample_forward_with(self.code_len, &mut task_rng(seed, u64::MAX))
    }

    /// Second coordinates over a fixed typical `x`: pasts drawn from the
    /// reversed chain conditioned on the future of `x`.
    pub fn fiber_cloud(&self, m: usize, seed: u64) -> Result<Cloud> {
        let future = self.reference_future(seed);
        let ys: Vec<Result<f64>> = generate(m, seed, |rng| {
            self.measure.sample_past_with(&future, self.code_len, rng).map(|p| self.code_past(&p))
        });
        Ok(Cloud::Line(ys.into_iter().collect::<Result<_>>()?))
    }

    /// Stationary points `(x, y)` of the natural extension.
    pub fn joint_cloud(&self, m: usize, seed: u64) -> Result<Cloud> {
        let pts: Vec<Result<[f64; 2]>> = generate(m, seed, |rng| {
            let w = self.measure.sample_forward_with(self.code_len, rng);
            let p = self.measure.sample_past_with(&w, self.code_len, rng)?;
            Ok([self.code_future(&w), self.code_past(&p)])
        });
        Ok(Cloud::Plane(pts.into_iter().collect::<Result<_>>()?))
    }

    /// One stationary point; used by tests and diagnostics.
    pub fn sample_point(&self, rng: &mut impl Rng) -> Result<(f64, f64)> {
        let w = self.measure.sample_forward_with(self.code_len, rng);
        let p = self.measure.sample_past_with(&w, self.code_len, rng)?;
        Ok((self.code_future(&w), self.code_past(&p)))
    }
}

/// Increasing affine branches onto `cells` with a binary-search locator.
pub fn cell_system(cells: &[GlsCell]) -> Result<Gdms> {
    let branches =
        cells.iter().map(|c| Branch::new(c.n.to_string(), 0, 0, BranchMap::affine(c.length, c.left))).collect();
    let mut lefts: Vec<(f64, usize)> = cells.iter().enumerate().map(|(i, c)| (c.left, i)).collect();
    lefts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let s = Gdms::finite("gls-cells", vec![Interval::unit()], branches)?;
    Ok(s.with_locator(move |x| {
        let p = lefts.partition_point(|(l, _)| *l <= x);
        (p > 0).then(|| lefts[p - 1].1)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::BetaValue;

    fn golden() -> BetaSystem {
        BetaSystem::new(BetaValue::Golden).unwrap()
    }

    #[test]
    fn parry_weighting_on_golden_cells() {
        let m = GlsModel::new(&golden(), &CellWeighting::Parry, DEFAULT_CELLS).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((m.entropy() - phi.ln()).abs() < 1e-12);
        let w = m.cell_weights();
        assert!((w[1] - 1.0 / (1.0 + phi * phi)).abs() < 1e-12);
        let a = m.lyapunov_closed_form(0.0).unwrap();
        let b = m.lyapunov_golden().unwrap();
        assert!((a.value - b.value).abs() < 1e-14);
    }

    #[test]
    fn uniform_bernoulli_entropy_is_log_m() {
        let b = BetaSystem::new(BetaValue::Pi).unwrap();
        for k in 2..6 {
            let m = GlsModel::new(&b, &CellWeighting::Bernoulli { weights: vec![1.0; k] }, DEFAULT_CELLS).unwrap();
            assert!((m.entropy() - (k as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_ignores_constant_shift() {
        let b = BetaSystem::new(BetaValue::rational(9, 5)).unwrap();
        let base = GlsModel::new(&b, &CellWeighting::Lengths { exponent: 1.0 }, 64).unwrap();
        let cells = b.cells(64).unwrap();
        let shifted = base.potential().shifted(2.5);
        let other = GlsModel::from_parts(b.beta(), cells, &ShiftSpace::full(64), shifted, 0.0).unwrap();
        assert!((base.entropy() - other.entropy()).abs() < 1e-12);
    }

    #[test]
    fn lengths_weighting_is_lebesgue() {
        let b = BetaSystem::new(BetaValue::rational(9, 5)).unwrap();
        let m = GlsModel::new(&b, &CellWeighting::Lengths { exponent: 1.0 }, DEFAULT_CELLS).unwrap();
        assert!(m.tail_mass() < 1e-12);
        for (w, c) in m.cell_weights().iter().zip(m.cells()).take(20) {
            assert!((w - c.length).abs() < 1e-12);
        }
    }

    #[test]
    fn parry_needs_golden() {
        let b = BetaSystem::new(BetaValue::rational(9, 5)).unwrap();
        assert!(GlsModel::new(&b, &CellWeighting::Parry, 8).is_err());
        assert!(GlsModel::new(&b, &CellWeighting::Zero, 8).is_err());
    }

    #[test]
    fn points_land_in_their_cells() {
        let m = GlsModel::new(&golden(), &CellWeighting::Parry, DEFAULT_CELLS).unwrap();
        let mut rng = task_rng(1, 0);
        for _ in 0..1000 {
            let (x, y) = m.sample_point(&mut rng).unwrap();
            assert!((0.0..1.0).contains(&x) && (0.0..1.0).contains(&y));
            // a past ending in the second cell cannot be followed by it
            let phi = (1.0 + 5f64.sqrt()) / 2.0;
            assert!(!(x >= 1.0 / phi && y >= 1.0 / phi));
        }
    }

    #[test]
    fn cell_locator_finds_cells() {
        let b = BetaSystem::new(BetaValue::Pi).unwrap();
        let cells = b.cells(40).unwrap();
        let s = cell_system(&cells).unwrap();
        for (i, c) in cells.iter().enumerate().filter(|(_, c)| c.length > 1e-9) {
            assert_eq!(s.locate_edge(c.left + 0.5 * c.length).unwrap(), Some(i));
        }
    }
}
