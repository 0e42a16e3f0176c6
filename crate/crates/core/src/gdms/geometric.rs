use super::system::Gdms;
use crate::shift::{Letter, Potential};

const CODING_TOL: f64 = 1e-14;

fn tail_point(system: &Gdms, word: &[Letter], truncation: usize) -> Option<f64> {
    let space = system.shift_space();
    for len in [256, 4096] {
        let ext = space.extend_word(word, len + 1, truncation)?;
        let tail = |i: usize| ext[(1 + i).min(ext.len() - 1)];
        if let Ok(p) = system.coding_point(&tail, CODING_TOL) {
            if p.prefix_len + 1 < ext.len() {
                return Some(p.x);
            }
        }
    }
    None
}

/// `θ_{q,t}(ω) = t·log|φ_{ω_0}'(π(σω))| + q(θ(ω) - P_θ)` as a locally
/// constant potential of the given memory, evaluated at the extension point
/// of each `memory`-word. Words whose tail does not code a point give `-∞`.
pub fn geometric_potential(
    system: &Gdms,
    t: f64,
    q: f64,
    theta: Option<&Potential>,
    p_theta: f64,
    memory: usize,
    truncation: usize,
) -> Potential {
    let system = system.clone();
    let theta = theta.cloned();
    let memory = memory.max(theta.as_ref().map_or(1, |th| th.memory()));
    Potential::from_fn(memory, move |w| {
        let geometric = if t == 0.0 {
            0.0
        } else {
            let Some(x) = tail_point(&system, w, truncation) else { return f64::NEG_INFINITY };
            t * system.branch(w[0]).derivative(x).abs().ln()
        };
        let weight = match (&theta, q) {
            (_, q) if q == 0.0 => 0.0,
            (Some(th), q) => q * (th.value(w).unwrap_or(f64::NEG_INFINITY) - p_theta),
            (None, q) => -q * p_theta,
        };
        geometric + weight
    })
}

#[cfg(test)]
mod tests {
    use super::super::builtins::{gauss_cf, luroth};
    use super::*;

    #[test]
    fn zero_parameters_give_zero() {
        let psi = geometric_potential(&gauss_cf(), 0.0, 0.0, None, 0.0, 1, 100);
        assert_eq!(psi.value(&[3]).unwrap(), 0.0);
    }

    #[test]
    fn affine_values_are_log_slopes() {
        let psi = geometric_potential(&luroth(), 1.7, 0.0, None, 0.0, 1, 100);
        for n in 1..20usize {
            let expected = 1.7 * (1.0 / (n * (n + 1)) as f64).ln();
            assert!((psi.value(&[n - 1]).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn gauss_value_on_one_tail() {
        // the tail (1, 1, ...) codes g = (√5 - 1)/2 and |φ_n'(g)| = (g + n)^{-2}
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let psi = geometric_potential(&gauss_cf(), 1.0, 0.0, None, 0.0, 2, 100);
        for n in 1..30usize {
            let v = psi.value(&[n - 1, 0]).unwrap();
            assert!((v + 2.0 * (g + n as f64).ln()).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn weight_term() {
        let theta = Potential::letter_table(vec![0.5, 1.5]);
        let psi = geometric_potential(&luroth(), 0.0, 2.0, Some(&theta), 0.25, 1, 2);
        assert!((psi.value(&[1]).unwrap() - 2.0 * 1.25).abs() < 1e-15);
    }
}
