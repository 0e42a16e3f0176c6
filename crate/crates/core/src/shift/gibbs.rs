use std::collections::HashMap;
use std::ops::RangeInclusive;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::potential::Potential;
use super::space::{Letter, ShiftSpace, Word};
use crate::numeric::{log_sum_exp, task_rng};
use crate::{Error, Result};

const EIGEN_TOL: f64 = 1e-13;
const RESIDUAL_TOL: f64 = 1e-15;
const RESIDUAL_FLOOR: f64 = 1e-11;
const EIGEN_MAX_ITER: usize = 1_000_000;

#[derive(Debug)]
enum Edges {
    /// Memory 1 over a full shift: every state follows every state.
    Complete,
    Lists {
        succ: Vec<Vec<u32>>,
        pred: Vec<Vec<u32>>,
    },
}

/// Admissible `m`-words of a truncated shift with the transitions
/// `u → w = (u_2, ..., u_m, e)`.
#[derive(Debug)]
pub struct StateGraph {
    space: ShiftSpace,
    truncation: usize,
    memory: usize,
    states: Vec<Word>,
    index: HashMap<Word, usize>,
    edges: Edges,
}

impl StateGraph {
    pub fn build(space: &ShiftSpace, memory: usize, truncation: usize, cap: usize) -> Result<Self> {
        if memory == 0 {
            return Err(Error::InvalidParameter("memory must be at least 1".into()));
        }
        let states = space.enumerate_cylinders(memory, truncation, cap)?;
        let index: HashMap<Word, usize> = states.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let k = space.truncation(truncation);
        let edges = if memory == 1 && space.incidence().is_full() {
            Edges::Complete
        } else {
            let mut succ = vec![Vec::new(); states.len()];
            let mut pred = vec![Vec::new(); states.len()];
            let mut count = 0usize;
            let mut next = vec![0; memory];
            for (u, word) in states.iter().enumerate() {
                let last = word[memory - 1];
                next[..memory - 1].copy_from_slice(&word[1..]);
                for e in 0..k {
                    if !space.incidence().allows(last, e) {
                        continue;
                    }
                    next[memory - 1] = e;
                    let w = index[&next];
                    succ[u].push(w as u32);
                    pred[w].push(u as u32);
                    count += 1;
                    if count > cap {
                        return Err(Error::CylinderCap { count, cap });
                    }
                }
            }
            Edges::Lists { succ, pred }
        };
        Ok(Self { space: space.clone(), truncation, memory, states, index, edges })
    }

    pub fn states(&self) -> &[Word] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn space(&self) -> &ShiftSpace {
        &self.space
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn state_of(&self, window: &[Letter]) -> Option<usize> {
        self.index.get(window).copied()
    }

    pub fn has_edge(&self, u: usize, w: usize) -> bool {
        match &self.edges {
            Edges::Complete => true,
            Edges::Lists { succ, .. } => succ[u].contains(&(w as u32)),
        }
    }

    pub fn successors(&self, u: usize) -> Vec<usize> {
        match &self.edges {
            Edges::Complete => (0..self.len()).collect(),
            Edges::Lists { succ, .. } => succ[u].iter().map(|&w| w as usize).collect(),
        }
    }

    pub(crate) fn max_over_successors(&self, u: usize, v: &[f64]) -> f64 {
        match &self.edges {
            Edges::Complete => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Edges::Lists { succ, .. } => succ[u].iter().map(|&w| v[w as usize]).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// `log Σ_{w ∈ succ(u)} exp(v(w))` for every state `u`.
    pub(crate) fn lse_over_successors_all(&self, v: &[f64]) -> Vec<f64> {
        match &self.edges {
            Edges::Complete => vec![log_sum_exp(v.iter().copied()); self.len()],
            Edges::Lists { succ, .. } => succ.iter().map(|ws| log_sum_exp(ws.iter().map(|&w| v[w as usize]))).collect(),
        }
    }

    /// `(M v)(u) = weight(u) Σ_{w ∈ succ(u)} v(w)`.
    fn apply_right(&self, weight: &[f64], v: &[f64], out: &mut [f64]) {
        match &self.edges {
            Edges::Complete => {
                let s: f64 = v.iter().sum();
                for (o, wt) in out.iter_mut().zip(weight) {
                    *o = wt * s;
                }
            }
            Edges::Lists { succ, .. } => {
                for (u, o) in out.iter_mut().enumerate() {
                    *o = weight[u] * succ[u].iter().map(|&w| v[w as usize]).sum::<f64>();
                }
            }
        }
    }

    /// `(v M)(w) = Σ_{u ∈ pred(w)} v(u) weight(u)`.
    fn apply_left(&self, weight: &[f64], v: &[f64], out: &mut [f64]) {
        match &self.edges {
            Edges::Complete => {
                let s: f64 = v.iter().zip(weight).map(|(a, b)| a * b).sum();
                out.iter_mut().for_each(|o| *o = s);
            }
            Edges::Lists { pred, .. } => {
                for (w, o) in out.iter_mut().enumerate() {
                    *o = pred[w].iter().map(|&u| v[u as usize] * weight[u as usize]).sum();
                }
            }
        }
    }

    pub fn is_strongly_connected(&self) -> bool {
        match &self.edges {
            Edges::Complete => !self.is_empty(),
            Edges::Lists { succ, pred } => {
                if self.is_empty() {
                    return false;
                }
                reaches_all(succ) && reaches_all(pred)
            }
        }
    }
}

fn reaches_all(adj: &[Vec<u32>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            let w = w as usize;
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == adj.len()
}

/// Leading eigenvalue and positive eigenvectors of the weighted transition
/// matrix `M[u → w] = exp(ψ(u))`.
#[derive(Clone, Debug)]
pub struct EigenData {
    pub log_rho: f64,
    /// Right eigenvector `h`.
    pub right: Vec<f64>,
    /// Left eigenvector `ν_L`, normalised so `Σ ν_L = 1` and `ν_L · h = 1`.
    pub left: Vec<f64>,
    pub iterations: usize,
    graph: Arc<StateGraph>,
    /// `ψ(u)` per state.
    log_weight: Vec<f64>,
}

impl EigenData {
    pub fn rho(&self) -> f64 {
        self.log_rho.exp()
    }

    pub fn graph(&self) -> &StateGraph {
        &self.graph
    }

    pub fn states(&self) -> &[Word] {
        self.graph.states()
    }
}

/// Perron–Frobenius data of `ψ` on the `memory`-word graph of the truncated
/// shift, by shifted power iteration to a relative eigenvalue gap of 1e-13.
pub fn rpf_eigendata(space: &ShiftSpace, psi: &Potential, truncation: usize) -> Result<EigenData> {
    let graph = StateGraph::build(space, psi.memory(), truncation, super::DEFAULT_CYLINDER_CAP)?;
    if !graph.is_strongly_connected() {
        return Err(Error::NotIrreducible);
    }
    let log_weight: Vec<f64> = graph.states().iter().map(|s| psi.eval(s)).collect();
    if log_weight.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("potential is not finite on every truncated state".into()));
    }
    let scale = log_weight.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weight: Vec<f64> = log_weight.iter().map(|v| (v - scale).exp()).collect();

    let (rho_r, mut h, it_r) = power_iteration(&graph, &weight, false)?;
    let (_, mut nu, it_l) = power_iteration(&graph, &weight, true)?;
    if h.iter().chain(nu.iter()).any(|v| *v <= 0.0) {
        return Err(Error::NotIrreducible);
    }
    let s: f64 = nu.iter().sum();
    nu.iter_mut().for_each(|v| *v /= s);
    let dot: f64 = nu.iter().zip(&h).map(|(a, b)| a * b).sum();
    h.iter_mut().for_each(|v| *v /= dot);
    Ok(EigenData {
        log_rho: rho_r.ln() + scale,
        right: h,
        left: nu,
        iterations: it_r.max(it_l),
        graph: Arc::new(graph),
        log_weight,
    })
}

fn power_iteration(graph: &StateGraph, weight: &[f64], left: bool) -> Result<(f64, Vec<f64>, usize)> {
    let n = graph.len();
    let mut v = vec![1.0 / n as f64; n];
    let mut mv = vec![0.0; n];
    // the shift removes every peripheral eigenvalue other than ρ itself
    let shift = {
        if left {
            graph.apply_left(weight, &v, &mut mv);
        } else {
            graph.apply_right(weight, &v, &mut mv);
        }
        0.5 * mv.iter().sum::<f64>()
    };
    let mut lambda_prev = f64::NAN;
    let mut gap = f64::INFINITY;
    let mut best_residual = f64::INFINITY;
    let mut stalled = 0;
    for it in 1..=EIGEN_MAX_ITER {
        if left {
            graph.apply_left(weight, &v, &mut mv);
        } else {
            graph.apply_right(weight, &v, &mut mv);
        }
        let lambda: f64 = mv.iter().sum();
        let residual: f64 = mv.iter().zip(&v).map(|(y, x)| (y - lambda * x).abs()).sum::<f64>() / lambda;
        let norm = lambda + shift;
        for (x, y) in v.iter_mut().zip(&mv) {
            *x = (y + shift * *x) / norm;
        }
        gap = (lambda - lambda_prev).abs();
        if gap < EIGEN_TOL * lambda && residual < RESIDUAL_TOL {
            return Ok((lambda, v, it));
        }
        if residual < best_residual * 0.999 {
            best_residual = residual;
            stalled = 0;
        } else {
            stalled += 1;
            // rounding floor reached
            if stalled > 200 && best_residual < RESIDUAL_FLOOR && gap < RESIDUAL_FLOOR * lambda {
                return Ok((lambda, v, it));
            }
        }
        lambda_prev = lambda;
    }
    Err(Error::NoConvergence { iterations: EIGEN_MAX_ITER, gap })
}

/// The Gibbs state of a locally constant potential on a truncated shift,
/// realised as a stationary Markov chain on `m`-word states with
/// `p(u → w) = M[u → w] h(w) / (ρ h(u))` and `π(u) = ν_L(u) h(u)`.
#[derive(Clone, Debug)]
pub struct GibbsMarkovMeasure {
    eigen: EigenData,
    weight: Vec<f64>,
    /// `ρ` for the rescaled weights.
    rho_scaled: f64,
    pi: Vec<f64>,
    pi_cdf: Vec<f64>,
    forward_cdf: Option<Vec<f64>>,
    reverse_cdf: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureExport {
    pub states: Vec<Word>,
    pub kernel: Vec<Vec<f64>>,
    pub stationary: Vec<f64>,
    pub pressure: f64,
}

fn cumulative(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    v.map(|x| {
        acc += x;
        acc
    })
    .collect()
}

fn draw(cdf: &[f64], rng: &mut impl Rng) -> usize {
    let total = *cdf.last().unwrap();
    let r = rng.gen::<f64>() * total;
    cdf.partition_point(|&c| c <= r).min(cdf.len() - 1)
}

impl GibbsMarkovMeasure {
    pub fn new(eigen: EigenData) -> Self {
        let scale = eigen.log_weight.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weight: Vec<f64> = eigen.log_weight.iter().map(|v| (v - scale).exp()).collect();
        let rho_scaled = (eigen.log_rho - scale).exp();
        let pi: Vec<f64> = eigen.left.iter().zip(&eigen.right).map(|(a, b)| a * b).collect();
        let pi_cdf = cumulative(pi.iter().copied());
        let complete = matches!(eigen.graph.edges, Edges::Complete);
        let forward_cdf = complete.then(|| cumulative(eigen.right.iter().copied()));
        let reverse_cdf = complete.then(|| cumulative(eigen.left.iter().zip(&weight).map(|(a, b)| a * b)));
        Self { eigen, weight, rho_scaled, pi, pi_cdf, forward_cdf, reverse_cdf }
    }

    pub fn from_potential(space: &ShiftSpace, psi: &Potential, truncation: usize) -> Result<Self> {
        Ok(Self::new(rpf_eigendata(space, psi, truncation)?))
    }

    pub fn eigen(&self) -> &EigenData {
        &self.eigen
    }

    pub fn graph(&self) -> &StateGraph {
        &self.eigen.graph
    }

    pub fn states(&self) -> &[Word] {
        self.eigen.graph.states()
    }

    pub fn memory(&self) -> usize {
        self.eigen.graph.memory
    }

    /// `log ρ`, the pressure of the generating potential.
    pub fn pressure(&self) -> f64 {
        self.eigen.log_rho
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    /// Potential values `ψ(u)` per state.
    pub fn potential_values(&self) -> &[f64] {
        &self.eigen.log_weight
    }

    pub fn kernel(&self, u: usize, w: usize) -> f64 {
        if !self.eigen.graph.has_edge(u, w) {
            return 0.0;
        }
        let h = &self.eigen.right;
        self.weight[u] * h[w] / (self.rho_scaled * h[u])
    }

    /// Time-reversed kernel `p̄(w → u) = π(u) p(u → w) / π(w)`.
    pub fn reversed_kernel(&self, w: usize, u: usize) -> f64 {
        self.pi[u] * self.kernel(u, w) / self.pi[w]
    }

    /// `μ([ω])`: zero for inadmissible words, the marginal over completions
    /// for words shorter than the memory.
    pub fn cylinder_measure(&self, word: &[Letter]) -> f64 {
        let g = &self.eigen.graph;
        let m = g.memory;
        if word.is_empty() || !g.space.is_admissible(word) {
            return 0.0;
        }
        if word.len() < m {
            return g.states().iter().zip(&self.pi).filter(|(s, _)| s.starts_with(word)).map(|(_, p)| p).sum();
        }
        let Some(mut u) = g.state_of(&word[..m]) else { return 0.0 };
        let mut mass = self.pi[u];
        for k in 1..=word.len() - m {
            let Some(w) = g.state_of(&word[k..k + m]) else { return 0.0 };
            mass *= self.kernel(u, w);
            u = w;
        }
        mass
    }

    /// `μ([e])` for each letter of the truncation.
    pub fn letter_marginal(&self) -> Vec<f64> {
        let k = self.eigen.graph.space.truncation(self.eigen.graph.truncation);
        let mut out = vec![0.0; k];
        for (s, p) in self.states().iter().zip(&self.pi) {
            out[s[0]] += p;
        }
        out
    }

    /// `∫ψ dμ` for a potential of memory at most the chain's memory.
    pub fn integral(&self, psi: &Potential) -> f64 {
        self.states().iter().zip(&self.pi).map(|(s, p)| p * psi.eval(s)).sum()
    }

    /// Entropy of the chain computed directly from the kernel,
    /// `-Σ π(u) Σ p(u→w) log p(u→w)`.
    pub fn chain_entropy(&self) -> f64 {
        let g = &self.eigen.graph;
        (0..g.len())
            .map(|u| {
                let inner: f64 = g
                    .successors(u)
                    .into_iter()
                    .map(|w| self.kernel(u, w))
                    .filter(|p| *p > 0.0)
                    .map(|p| -p * p.ln())
                    .sum();
                self.pi[u] * inner
            })
            .sum()
    }

    fn next_state(&self, u: usize, rng: &mut impl Rng) -> usize {
        if let Some(cdf) = &self.forward_cdf {
            return draw(cdf, rng);
        }
        let succ = self.eigen.graph.successors(u);
        let cdf = cumulative(succ.iter().map(|&w| self.eigen.right[w]));
        succ[draw(&cdf, rng)]
    }

    fn prev_state(&self, w: usize, rng: &mut impl Rng) -> usize {
        if let Some(cdf) = &self.reverse_cdf {
            return draw(cdf, rng);
        }
        let Edges::Lists { pred, .. } = &self.eigen.graph.edges else { unreachable!() };
        let pred = &pred[w];
        let cdf = cumulative(pred.iter().map(|&u| self.eigen.left[u as usize] * self.weight[u as usize]));
        pred[draw(&cdf, rng)] as usize
    }

    /// A word of `length` letters from the stationary chain.
    pub fn sample_forward(&self, length: usize, seed: u64) -> Word {
        self.sample_forward_with(length, &mut task_rng(seed, 0))
    }

    pub fn sample_forward_with(&self, length: usize, rng: &mut impl Rng) -> Word {
        let m = self.memory();
        let mut u = draw(&self.pi_cdf, rng);
        let mut word = self.states()[u].clone();
        while word.len() < length {
            u = self.next_state(u, rng);
            word.push(self.states()[u][m - 1]);
        }
        word.truncate(length);
        word
    }

    /// A past `τ` of `length` letters with `τ · future_prefix` admissible,
    /// drawn from the reversed chain started at the first window of the
    /// prefix. The prefix needs at least `memory` letters.
    pub fn sample_past(&self, future_prefix: &[Letter], length: usize, seed: u64) -> Result<Word> {
        self.sample_past_with(future_prefix, length, &mut task_rng(seed, 0))
    }

    pub fn sample_past_with(&self, future_prefix: &[Letter], length: usize, rng: &mut impl Rng) -> Result<Word> {
        let g = &self.eigen.graph;
        let m = g.memory;
        if future_prefix.len() < m {
            return Err(Error::WordTooShort { needed: m, got: future_prefix.len() });
        }
        if !g.space.is_admissible(future_prefix) {
            return Err(Error::Inadmissible);
        }
        let mut w = g.state_of(&future_prefix[..m]).ok_or(Error::Inadmissible)?;
        let mut past = Vec::with_capacity(length);
        for _ in 0..length {
            w = self.prev_state(w, rng);
            past.push(self.states()[w][0]);
        }
        past.reverse();
        Ok(past)
    }

    /// Dense export; refuses graphs with more than 1024 states.
    pub fn export(&self) -> Result<MeasureExport> {
        let n = self.states().len();
        if n > 1024 {
            return Err(Error::InvalidParameter(format!("{n} states is too many to export densely")));
        }
        let kernel = (0..n).map(|u| (0..n).map(|w| self.kernel(u, w)).collect()).collect();
        Ok(MeasureExport {
            states: self.states().to_vec(),
            kernel,
            stationary: self.pi.clone(),
            pressure: self.pressure(),
        })
    }
}

/// `h_μ = P(ψ) - ∫ψ dμ` for the Gibbs state `μ` of `ψ`.
pub fn entropy_from_pressure(measure: &GibbsMarkovMeasure, psi: &Potential) -> f64 {
    measure.pressure() - measure.integral(psi)
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditLevel {
    pub n: usize,
    pub words: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub d: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub levels: Vec<AuditLevel>,
    /// `max(max r, 1/min r)` over all levels.
    pub d: f64,
    pub upward_trend: bool,
}

/// Ratios `r = μ([ω]) / exp(S_nψ(τ) - P n)` over cylinders of each length,
/// with `τ` the extension point of `ω`. All cylinders are used when there are
/// at most `sample_size` of them; otherwise `sample_size` words are drawn
/// from `μ` itself.
pub fn gibbs_audit(
    measure: &GibbsMarkovMeasure,
    psi: &Potential,
    n_range: RangeInclusive<usize>,
    sample_size: usize,
    seed: u64,
) -> Result<AuditReport> {
    let g = measure.graph();
    let m = psi.memory();
    let p = measure.pressure();
    let mut levels = Vec::new();
    for n in n_range {
        if n == 0 {
            return Err(Error::InvalidParameter("cylinder length must be >= 1".into()));
        }
        let words = match g.space().enumerate_cylinders(n, g.truncation(), sample_size) {
            Ok(w) => w,
            Err(Error::CylinderCap { .. }) => {
                let mut rng = task_rng(seed, n as u64);
                (0..sample_size).map(|_| measure.sample_forward_with(n, &mut rng)).collect()
            }
            Err(e) => return Err(e),
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut used = 0;
        for w in &words {
            let mu = measure.cylinder_measure(w);
            if mu <= 0.0 {
                continue;
            }
            let tau = g.space().extend_word(w, n + m - 1, g.truncation()).ok_or(Error::Inadmissible)?;
            let s = psi.birkhoff_sum(&tau, n)?;
            let log_r = mu.ln() - s + p * n as f64;
            lo = lo.min(log_r);
            hi = hi.max(log_r);
            used += 1;
        }
        let (min_ratio, max_ratio) = (lo.exp(), hi.exp());
        levels.push(AuditLevel { n, words: used, min_ratio, max_ratio, d: max_ratio.max(1.0 / min_ratio) });
    }
    let d = levels.iter().map(|l| l.d).fold(1.0, f64::max);
    let upward_trend = trend_up(&levels);
    Ok(AuditReport { levels, d, upward_trend })
}

/// The last third of the levels exceeds the middle third.
fn trend_up(levels: &[AuditLevel]) -> bool {
    let n = levels.len();
    if n < 3 {
        return false;
    }
    let third = n / 3;
    let mid = levels[third..n - third].iter().map(|l| l.d).fold(0.0, f64::max);
    let last = levels[n - third..].iter().map(|l| l.d).fold(0.0, f64::max);
    last > mid * (1.0 + 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::IncidenceMatrix;
    use proptest::prelude::*;

    fn phi() -> f64 {
        (1.0 + 5f64.sqrt()) / 2.0
    }

    fn golden() -> GibbsMarkovMeasure {
        GibbsMarkovMeasure::from_potential(&ShiftSpace::golden_mean(), &Potential::constant(0.0), 2).unwrap()
    }

    #[test]
    fn full_two_shift_eigendata() {
        let e = rpf_eigendata(&ShiftSpace::full(2), &Potential::constant(0.0), 2).unwrap();
        assert!((e.rho() - 2.0).abs() < 1e-12);
        assert!((e.right[0] - e.right[1]).abs() < 1e-12);
    }

    #[test]
    fn golden_eigenvalue_is_phi() {
        // [[1,1],[1,0]] has characteristic polynomial x^2 - x - 1
        let e = rpf_eigendata(&ShiftSpace::golden_mean(), &Potential::constant(0.0), 2).unwrap();
        assert!((e.rho() - phi()).abs() < 1e-12);
        let l: f64 = e.left.iter().sum();
        let dot: f64 = e.left.iter().zip(&e.right).map(|(a, b)| a * b).sum();
        assert!((l - 1.0).abs() < 1e-14 && (dot - 1.0).abs() < 1e-14);
    }

    #[test]
    fn letter_weights_give_sum_eigenvalue() {
        let (w0, w1) = (0.3f64, 1.7f64);
        let e = rpf_eigendata(&ShiftSpace::full(2), &Potential::letter_table(vec![w0.ln(), w1.ln()]), 2).unwrap();
        assert!((e.rho() - (w0 + w1)).abs() < 1e-12);
    }

    #[test]
    fn reducible_graph_is_rejected() {
        let s = ShiftSpace::new(Some(2), IncidenceMatrix::forbidding([(1, 0)]));
        assert_eq!(rpf_eigendata(&s, &Potential::constant(0.0), 2).unwrap_err(), Error::NotIrreducible);
    }

    #[test]
    fn periodic_graph_still_converges() {
        // 0 -> 1 -> 0 only: period two
        let s = ShiftSpace::new(Some(2), IncidenceMatrix::forbidding([(0, 0), (1, 1)]));
        let e = rpf_eigendata(&s, &Potential::constant(0.0), 2).unwrap();
        assert!((e.rho() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fair_coin_chain() {
        let mu = GibbsMarkovMeasure::from_potential(&ShiftSpace::full(2), &Potential::constant(0.0), 2).unwrap();
        for u in 0..2 {
            for w in 0..2 {
                assert!((mu.kernel(u, w) - 0.5).abs() < 1e-12);
            }
        }
        assert!((mu.cylinder_measure(&[0, 1, 1]) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn golden_parry_chain() {
        let mu = golden();
        let f = phi();
        assert!((mu.stationary()[0] - f * f / (1.0 + f * f)).abs() < 1e-12);
        assert!((mu.kernel(0, 0) - 1.0 / f).abs() < 1e-12);
        assert!((mu.kernel(0, 1) - 1.0 / (f * f)).abs() < 1e-12);
        assert!((mu.kernel(1, 0) - 1.0).abs() < 1e-12);
        assert_eq!(mu.kernel(1, 1), 0.0);
        // stationarity
        for w in 0..2 {
            let s: f64 = (0..2).map(|u| mu.stationary()[u] * mu.kernel(u, w)).sum();
            assert!((s - mu.stationary()[w]).abs() < 1e-12);
        }
        assert_eq!(mu.cylinder_measure(&[1, 1]), 0.0);
        assert!((mu.cylinder_measure(&[0]) - f * f / (1.0 + f * f)).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let full = GibbsMarkovMeasure::from_potential(&ShiftSpace::full(2), &Potential::constant(0.0), 2).unwrap();
        assert!((entropy_from_pressure(&full, &Potential::constant(0.0)) - 2f64.ln()).abs() < 1e-12);
        assert!((entropy_from_pressure(&golden(), &Potential::constant(0.0)) - phi().ln()).abs() < 1e-12);
        let shifted =
            GibbsMarkovMeasure::from_potential(&ShiftSpace::golden_mean(), &Potential::constant(4.5), 2).unwrap();
        assert!((entropy_from_pressure(&shifted, &Potential::constant(4.5)) - phi().ln()).abs() < 1e-12);
    }

    #[test]
    fn audit_full_shift_memory_one_is_exact() {
        let psi = Potential::letter_table(vec![0.2, -0.4, 1.1]);
        let mu = GibbsMarkovMeasure::from_potential(&ShiftSpace::full(3), &psi, 3).unwrap();
        let r = gibbs_audit(&mu, &psi, 1..=8, 4096, 3).unwrap();
        assert!(r.d >= 1.0 && r.d < 1.0 + 1e-9, "D = {}", r.d);
    }

    #[test]
    fn audit_golden_constant_is_sqrt5_and_flat() {
        // r = ρ ν(ω_0) h(ω_{n-1}) ranges over {cφ, c, c/φ} with c = φ²/(1+φ²)
        let r = gibbs_audit(&golden(), &Potential::constant(0.0), 1..=12, 4096, 1).unwrap();
        // no word of length 2 starts and ends with 1
        for l in r.levels.iter().filter(|l| l.n != 2) {
            assert!((l.d - 5f64.sqrt()).abs() < 1e-9, "n={} D={}", l.n, l.d);
        }
        assert!(!r.upward_trend);
    }

    #[test]
    fn audit_memory_two_is_finite_and_flat() {
        let psi = Potential::pair_table(vec![vec![0.3, -0.2, 0.0], vec![0.5, 0.1, -1.0], vec![0.0, 0.7, 0.2]]);
        let mu = GibbsMarkovMeasure::from_potential(&ShiftSpace::full(3), &psi, 3).unwrap();
        let r = gibbs_audit(&mu, &psi, 2..=12, 4096, 9).unwrap();
        assert!(r.d.is_finite());
        assert!(!r.upward_trend);
    }

    #[test]
    fn forward_samples_are_reproducible() {
        let mu = GibbsMarkovMeasure::from_potential(&ShiftSpace::full(2), &Potential::constant(0.0), 2).unwrap();
        assert_eq!(mu.sample_forward(10, 42), mu.sample_forward(10, 42));
        assert_ne!(mu.sample_forward(64, 42), mu.sample_forward(64, 43));
    }

    #[test]
    fn golden_past_never_puts_one_before_one() {
        let mu = golden();
        for seed in 0..200 {
            let past = mu.sample_past(&[1, 0], 5, seed).unwrap();
            assert_eq!(*past.last().unwrap(), 0);
            let mut full = past.clone();
            full.extend([1, 0]);
            assert!(ShiftSpace::golden_mean().is_admissible(&full));
        }
        assert_eq!(mu.sample_past(&[1, 1], 3, 0).unwrap_err(), Error::Inadmissible);
    }

    #[test]
    fn forward_letter_frequencies_match_stationary() {
        let mu = golden();
        let n = 200_000;
        let w = mu.sample_forward(n, 5);
        let ones = w.iter().filter(|&&e| e == 1).count() as f64;
        let p = mu.stationary()[1];
        // a Markov chain has a larger variance than binomial; bound the
        // autocorrelation inflation by (1 + λ2)/(1 - λ2) with λ2 = -1/φ²
        let lambda2 = -1.0 / (phi() * phi());
        let sigma = (p * (1.0 - p) / n as f64 * (1.0 + lambda2.abs()) / (1.0 - lambda2.abs())).sqrt();
        assert!((ones / n as f64 - p).abs() < 3.0 * sigma, "{} vs {}", ones / n as f64, p);
    }

    #[test]
    fn export_shape() {
        let e = golden().export().unwrap();
        assert_eq!(e.states, vec![vec![0], vec![1]]);
        assert_eq!(e.kernel.len(), 2);
        assert!((e.pressure - phi().ln()).abs() < 1e-12);
    }

    fn random_memory2() -> impl Strategy<Value = (Vec<Vec<f64>>, bool)> {
        (proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, 3), 3), any::<bool>())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn chain_invariants((table, restricted) in random_memory2()) {
            let space = if restricted {
                ShiftSpace::new(Some(3), IncidenceMatrix::forbidding([(2, 2), (0, 1)]))
            } else {
                ShiftSpace::full(3)
            };
            let psi = Potential::pair_table(table);
            let mu = GibbsMarkovMeasure::from_potential(&space, &psi, 3).unwrap();
            let n = mu.states().len();
            // kernel rows are stochastic
            for u in 0..n {
                let s: f64 = (0..n).map(|w| mu.kernel(u, w)).sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
            // stationarity
            for w in 0..n {
                let s: f64 = (0..n).map(|u| mu.stationary()[u] * mu.kernel(u, w)).sum();
                prop_assert!((s - mu.stationary()[w]).abs() < 1e-10);
            }
            // reversed-chain identity
            for u in 0..n {
                for w in 0..n {
                    let lhs = mu.stationary()[u] * mu.kernel(u, w);
                    let rhs = mu.stationary()[w] * mu.reversed_kernel(w, u);
                    prop_assert!((lhs - rhs).abs() < 1e-12);
                }
            }
            // entropy by pressure equals the direct chain entropy
            let h = entropy_from_pressure(&mu, &psi);
            prop_assert!(h >= -1e-10);
            prop_assert!((h - mu.chain_entropy()).abs() < 1e-9);
            // additivity and shift invariance of cylinder masses
            for w in space.enumerate_cylinders(3, 3, 100).unwrap() {
                let mass = mu.cylinder_measure(&w);
                let ext: f64 = (0..3).map(|e| {
                    let mut v = w.clone();
                    v.push(e);
                    mu.cylinder_measure(&v)
                }).sum();
                prop_assert!((ext - mass).abs() < 1e-12);
                let pre: f64 = (0..3).map(|e| {
                    let mut v = vec![e];
                    v.extend(&w);
                    mu.cylinder_measure(&v)
                }).sum();
                prop_assert!((pre - mass).abs() < 1e-12);
            }
        }
    }
}
