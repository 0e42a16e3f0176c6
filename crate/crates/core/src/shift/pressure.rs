use serde::Serialize;

use super::gibbs::StateGraph;
use super::potential::Potential;
use super::space::ShiftSpace;
use crate::numeric::log_sum_exp;
use crate::{Error, Result};

/// Per-level pressure values `(1/n) log Σ_{|ω|=n} exp(sup S_nψ|[ω])` and
/// the extrapolated limit.
#[derive(Clone, Debug, Serialize)]
pub struct PressureEstimate {
    /// `levels[n-1]` is the level-`n` value.
    pub levels: Vec<f64>,
    pub value: f64,
    pub truncation: usize,
    /// `|level(n_max) - level(n_max - 1)|`.
    pub gap: f64,
}

impl PressureEstimate {
    pub fn level(&self, n: usize) -> f64 {
        self.levels[n - 1]
    }
}

/// Topological pressure of a locally constant potential on the truncation
/// of `space` to `truncation` letters.
///
/// The cylinder sums are computed by a transfer recursion on
/// `memory`-windows: letters inside the cylinder are summed over, letters
/// past its end are maximised over (the supremum over the cylinder). The
/// returned value applies an Aitken Δ² correction to the last three
/// increments `log Z_n - log Z_{n-1}`, which converge geometrically.
pub fn pressure(space: &ShiftSpace, psi: &Potential, n_max: usize, truncation: usize) -> Result<PressureEstimate> {
    let m = psi.memory();
    if n_max < m.max(1) {
        return Err(Error::InvalidParameter(format!("n_max = {n_max} is below the memory {m}")));
    }
    let graph = StateGraph::build(space, m, truncation, super::DEFAULT_CYLINDER_CAP)?;
    let psi_s: Vec<f64> = graph.states().iter().map(|s| psi.eval(s)).collect();
    let ns = psi_s.len();

    // tails[j-1](s): best total over the last j windows, starting at s, with
    // every later letter free
    let mut tails = vec![psi_s.clone()];
    for _ in 1..m {
        let prev = tails.last().unwrap();
        let next: Vec<f64> = (0..ns).map(|s| psi_s[s] + graph.max_over_successors(s, prev)).collect();
        tails.push(next);
    }

    let mut log_z = Vec::with_capacity(n_max);
    for n in 1..m.min(n_max + 1) {
        log_z.push(short_level(&graph, &tails[n - 1], n));
    }
    let mut g = tails[m - 1].clone();
    for n in m..=n_max {
        if n > m {
            let lse = graph.lse_over_successors_all(&g);
            g = (0..ns).map(|s| psi_s[s] + lse[s]).collect();
        }
        log_z.push(log_sum_exp(g.iter().copied()));
    }
    if log_z.contains(&f64::NEG_INFINITY) {
        return Err(Error::Underflow);
    }
    let levels: Vec<f64> = log_z.iter().enumerate().map(|(i, z)| z / (i + 1) as f64).collect();
    let value = extrapolate(&log_z);
    let gap = if n_max >= 2 { (levels[n_max - 1] - levels[n_max - 2]).abs() } else { f64::NAN };
    Ok(PressureEstimate { levels, value, truncation: space.truncation(truncation), gap })
}

/// Level `n < memory`: group windows by their first `n` letters, maximise
/// within each group, sum across groups.
fn short_level(graph: &StateGraph, tail: &[f64], n: usize) -> f64 {
    let mut groups: std::collections::BTreeMap<&[usize], f64> = Default::default();
    for (s, word) in graph.states().iter().enumerate() {
        let e = groups.entry(&word[..n]).or_insert(f64::NEG_INFINITY);
        *e = e.max(tail[s]);
    }
    log_sum_exp(groups.values().copied())
}

fn extrapolate(log_z: &[f64]) -> f64 {
    let n = log_z.len();
    if n == 1 {
        return log_z[0];
    }
    let d: Vec<f64> = log_z.windows(2).map(|w| w[1] - w[0]).collect();
    let k = d.len();
    if k < 3 {
        return d[k - 1];
    }
    let (a, b, c) = (d[k - 3], d[k - 2], d[k - 1]);
    let den = (c - b) - (b - a);
    let corrected = c - (c - b) * (c - b) / den;
    if den.abs() < 1e-300 || !corrected.is_finite() || (corrected - c).abs() > (c - b).abs() * 10.0 + 1e-15 {
        c
    } else {
        corrected
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    /// `(N, pressure)` rows.
    pub rows: Vec<(usize, f64)>,
    pub converged: bool,
    pub tolerance: f64,
}

/// Pressure over increasing truncations; converged when two successive
/// values differ by less than `tol`.
pub fn truncation_sweep(
    space: &ShiftSpace,
    psi: &Potential,
    n_max: usize,
    sizes: &[usize],
    tol: f64,
) -> Result<SweepReport> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        rows.push((n, pressure(space, psi, n_max, n)?.value));
    }
    let converged = rows.len() >= 2 && (rows[rows.len() - 1].1 - rows[rows.len() - 2].1).abs() < tol;
    Ok(SweepReport { rows, converged, tolerance: tol })
}
