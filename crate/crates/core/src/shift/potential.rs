use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::space::{Letter, ShiftSpace};
use crate::numeric::log_sum_exp;
use crate::{Error, Result};

type WordFn = Arc<dyn Fn(&[Letter]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Constant(f64),
    Letter(Arc<Vec<f64>>),
    Pair(Arc<Vec<Vec<f64>>>),
    Function(WordFn),
}

/// A real function on admissible words that depends only on the first
/// `memory` letters. General Hölder potentials enter through
/// [`Potential::from_fn`], evaluated at a fixed extension point of each
/// `memory`-cylinder.
#[derive(Clone)]
pub struct Potential {
    memory: usize,
    holder_beta: f64,
    kind: Kind,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            Kind::Constant(c) => format!("constant({c})"),
            Kind::Letter(v) => format!("letter-table[{}]", v.len()),
            Kind::Pair(v) => format!("pair-table[{}]", v.len()),
            Kind::Function(_) => "function".to_string(),
        };
        f.debug_struct("Potential").field("memory", &self.memory).field("kind", &kind).finish()
    }
}

impl Potential {
    pub fn constant(c: f64) -> Self {
        Self { memory: 1, holder_beta: 1.0, kind: Kind::Constant(c) }
    }

    /// Memory-1 potential `ψ(ω) = values[ω_0]`; letters past the table get
    /// weight zero (`-inf`).
    pub fn letter_table(values: Vec<f64>) -> Self {
        Self { memory: 1, holder_beta: 1.0, kind: Kind::Letter(Arc::new(values)) }
    }

    /// Memory-2 potential `ψ(ω) = values[ω_0][ω_1]`.
    pub fn pair_table(values: Vec<Vec<f64>>) -> Self {
        Self { memory: 2, holder_beta: 1.0, kind: Kind::Pair(Arc::new(values)) }
    }

    pub fn from_fn<F>(memory: usize, f: F) -> Self
    where
        F: Fn(&[Letter]) -> f64 + Send + Sync + 'static,
    {
        assert!(memory >= 1, "memory must be at least 1");
        Self { memory, holder_beta: 1.0, kind: Kind::Function(Arc::new(f)) }
    }

    /// Exponent of the metric `d_β(ω, τ) = exp(-β |ω ∧ τ|)` the potential is
    /// Hölder with respect to. Only reported; locally constant potentials
    /// do not need it.
    pub fn with_holder_exponent(mut self, beta: f64) -> Self {
        self.holder_beta = beta;
        self
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn holder_exponent(&self) -> f64 {
        self.holder_beta
    }

    /// The potential `ψ + c`.
    pub fn shifted(&self, c: f64) -> Potential {
        let inner = self.clone();
        let memory = self.memory;
        Potential::from_fn(memory, move |w| inner.eval(w) + c).with_holder_exponent(self.holder_beta)
    }

    pub fn value(&self, word: &[Letter]) -> Result<f64> {
        if word.len() < self.memory {
            return Err(Error::WordTooShort { needed: self.memory, got: word.len() });
        }
        Ok(self.eval(word))
    }

    pub(crate) fn eval(&self, word: &[Letter]) -> f64 {
        match &self.kind {
            Kind::Constant(c) => *c,
            Kind::Letter(v) => v.get(word[0]).copied().unwrap_or(f64::NEG_INFINITY),
            Kind::Pair(v) => v.get(word[0]).and_then(|row| row.get(word[1])).copied().unwrap_or(f64::NEG_INFINITY),
            Kind::Function(f) => f(&word[..self.memory]),
        }
    }

    /// `S_n ψ(ω) = Σ_{k<n} ψ(σ^k ω)`.
    pub fn birkhoff_sum(&self, word: &[Letter], n: usize) -> Result<f64> {
        let needed = n + self.memory - 1;
        if word.len() < needed {
            return Err(Error::WordTooShort { needed, got: word.len() });
        }
        Ok((0..n).map(|k| self.eval(&word[k..])).sum())
    }

    /// `sup ψ` over the one-letter cylinder `[e]`, exact for locally constant
    /// potentials (maximum over admissible `memory`-words starting at `e`).
    pub fn sup_on_letter(&self, space: &ShiftSpace, e: Letter, truncation: usize) -> f64 {
        match &self.kind {
            Kind::Constant(c) => *c,
            Kind::Letter(v) => v.get(e).copied().unwrap_or(f64::NEG_INFINITY),
            _ if self.memory == 1 => self.eval(&[e]),
            _ => {
                let k = space.truncation(truncation);
                let mut best = f64::NEG_INFINITY;
                let mut word = vec![e];
                self.sup_rec(space, k, &mut word, &mut best);
                best
            }
        }
    }

    fn sup_rec(&self, space: &ShiftSpace, k: usize, word: &mut Vec<Letter>, best: &mut f64) {
        if word.len() == self.memory {
            *best = best.max(self.eval(word));
            return;
        }
        let last = *word.last().unwrap();
        for e in 0..k {
            if space.allows(last, e) {
                word.push(e);
                self.sup_rec(space, k, word, best);
                word.pop();
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SummabilityVerdict {
    Converged,
    NotSummableAtTruncation,
}

#[derive(Clone, Debug, Serialize)]
pub struct SummabilityReport {
    /// `(N, Σ_{e<N} exp(sup ψ|[e]))` at doubling checkpoints.
    pub partial_sums: Vec<(usize, f64)>,
    pub last_relative_increment: f64,
    pub verdict: SummabilityVerdict,
}

/// Partial sums of `exp(sup ψ|[e])` over the first `N` letters at doubling
/// checkpoints. Finite alphabets always converge; countable ones converge
/// when the last doubling changes the sum by less than `tol` relatively.
pub fn summability_report(space: &ShiftSpace, psi: &Potential, truncation: usize, tol: f64) -> SummabilityReport {
    let k = space.truncation(truncation);
    let sups: Vec<f64> = (0..k).map(|e| psi.sup_on_letter(space, e, truncation)).collect();
    let mut checkpoints = Vec::new();
    let mut c = 1;
    while c < k {
        checkpoints.push(c);
        c *= 2;
    }
    checkpoints.push(k);
    let partial_sums: Vec<(usize, f64)> =
        checkpoints.iter().map(|&n| (n, log_sum_exp(sups[..n].iter().copied()).exp())).collect();
    let last = partial_sums.last().map_or(0.0, |p| p.1);
    let prev = if partial_sums.len() >= 2 { partial_sums[partial_sums.len() - 2].1 } else { 0.0 };
    let inc = if last > 0.0 { (last - prev) / last } else { 0.0 };
    let finite = space.letters().is_some_and(|n| n <= truncation);
    let verdict = if finite || (last.is_finite() && inc < tol) {
        SummabilityVerdict::Converged
    } else {
        SummabilityVerdict::NotSummableAtTruncation
    };
    SummabilityReport { partial_sums, last_relative_increment: inc, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn birkhoff_sum_of_constant() {
        let p = Potential::constant(0.7);
        assert!((p.birkhoff_sum(&[0, 1, 1, 0], 3).unwrap() - 2.1).abs() < 1e-15);
    }

    #[test]
    fn birkhoff_sum_of_first_letter() {
        let p = Potential::letter_table(vec![0.0, 1.0]);
        assert_eq!(p.birkhoff_sum(&[1, 0, 1], 2).unwrap(), 1.0);
    }

    #[test]
    fn birkhoff_sum_memory_two_matches_direct_sum() {
        let table = vec![vec![0.1, 0.2], vec![0.3, 0.4]];
        let p = Potential::pair_table(table.clone());
        let w = [0, 1, 1, 0];
        let direct = table[0][1] + table[1][1] + table[1][0];
        assert!((p.birkhoff_sum(&w, 3).unwrap() - direct).abs() < 1e-15);
        assert!(matches!(p.birkhoff_sum(&w, 4), Err(Error::WordTooShort { needed: 5, got: 4 })));
    }

    #[test]
    fn shifted_adds_constant() {
        let p = Potential::pair_table(vec![vec![0.1, 0.2], vec![0.3, 0.4]]).shifted(2.0);
        assert_eq!(p.memory(), 2);
        assert!((p.value(&[1, 0]).unwrap() - 2.3).abs() < 1e-15);
    }

    #[test]
    fn zero_potential_on_countable_alphabet_is_not_summable() {
        let r = summability_report(&ShiftSpace::countable_full(), &Potential::constant(0.0), 1024, 1e-3);
        assert_eq!(r.verdict, SummabilityVerdict::NotSummableAtTruncation);
        assert!((r.partial_sums.last().unwrap().1 - 1024.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_square_weights_are_summable() {
        // sup of -2 log(x + n) over x in [0, 1] is -2 log n
        let psi = Potential::from_fn(1, |w| -2.0 * ((w[0] + 1) as f64).ln());
        let r = summability_report(&ShiftSpace::countable_full(), &psi, 1 << 14, 1e-3);
        assert_eq!(r.verdict, SummabilityVerdict::Converged);
        for &(n, s) in &r.partial_sums {
            let direct: f64 = (1..=n).map(|k| 1.0 / (k * k) as f64).sum();
            assert!((s - direct).abs() < 1e-12 * direct.max(1.0), "N={n}");
        }
    }

    #[test]
    fn finite_alphabet_always_converges() {
        let r = summability_report(&ShiftSpace::full(3), &Potential::constant(5.0), 100, 1e-12);
        assert_eq!(r.verdict, SummabilityVerdict::Converged);
    }
}
