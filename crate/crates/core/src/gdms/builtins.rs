//! Standard systems on the unit interval.

use super::branch::{Branch, BranchMap, Interval};
use super::jump::ParabolicSystem;
use super::system::Gdms;
use crate::{Error, Result};

/// Inverse branches `φ_n(x) = 1/(x + n)` of the Gauss map; edge `k` is the
/// digit `n = k + 1`.
pub fn gauss_cf() -> Gdms {
    Gdms::countable("gauss", vec![Interval::unit()], |k| {
        let n = (k + 1) as f64;
        Branch::new((k + 1).to_string(), 0, 0, BranchMap::moebius(0.0, 1.0, 1.0, n))
    })
    .expect("gauss system is well formed")
    .with_locator(|x| (x > 0.0 && x <= 1.0).then(|| ((1.0 / x).floor() as usize).max(1) - 1))
}

/// Backward continued fractions `φ_i(x) = 1/(i - x)`, `i ≥ 2`; edge `k` is
/// `i = k + 2` and edge 0 has a neutral fixed point at 1.
pub fn backward_cf() -> ParabolicSystem {
    let s = Gdms::countable("backward-cf", vec![Interval::unit()], |k| {
        let i = (k + 2) as f64;
        Branch::new((k + 2).to_string(), 0, 0, BranchMap::moebius(0.0, 1.0, -1.0, i))
    })
    .expect("backward continued fraction system is well formed")
    .with_locator(|x| (x > 0.0 && x < 1.0).then(|| (1.0 / x).floor() as usize - 1));
    ParabolicSystem::new(s, &[0]).expect("edge 2 is parabolic")
}

/// The two inverse branches of `x ↦ x + x^{1+α} (mod 1)`: edge 0 fixes 0
/// and is parabolic, edge 1 is the right branch.
pub fn manneville_pomeau(alpha: f64) -> Result<ParabolicSystem> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("Manneville-Pomeau exponent must be positive, got {alpha}")));
    }
    let s = Gdms::finite(
        format!("manneville-pomeau({alpha})"),
        vec![Interval::unit()],
        vec![
            Branch::new("0", 0, 0, BranchMap::MpBranch { alpha, right: false }),
            Branch::new("1", 0, 0, BranchMap::MpBranch { alpha, right: true }),
        ],
    )?;
    ParabolicSystem::new(s, &[0])
}

fn affine_cell(k: usize, lo: f64, hi: f64) -> Branch {
    Branch::new((k + 1).to_string(), 0, 0, BranchMap::affine(hi - lo, lo))
}

/// The classic Lüroth system: `φ_n(x) = x/(n(n+1)) + 1/(n+1)` onto
/// `[1/(n+1), 1/n]`; edge `k` is `n = k + 1`.
pub fn luroth() -> Gdms {
    gls_countable("luroth", |k| {
        let n = (k + 1) as f64;
        (1.0 / (n + 1.0), 1.0 / n)
    })
    .expect("Lüroth system is well formed")
    .with_locator(|x| (x > 0.0 && x <= 1.0).then(|| ((1.0 / x).floor() as usize).max(1) - 1))
}

/// Increasing affine branches onto the given cells of `[0, 1]`, which must
/// be interior disjoint with total length 1.
pub fn gls(cells: &[(f64, f64)]) -> Result<Gdms> {
    let total: f64 = cells.iter().map(|(a, b)| b - a).sum();
    if cells.iter().any(|(a, b)| !(b > a) || *a < 0.0 || *b > 1.0) {
        return Err(Error::InvalidParameter("cells must be non-degenerate subintervals of [0, 1]".into()));
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("cell lengths sum to {total}, not 1")));
    }
    let branches = cells.iter().enumerate().map(|(k, &(a, b))| affine_cell(k, a, b)).collect();
    let s = Gdms::finite("gls", vec![Interval::unit()], branches)?;
    let report = s.verify_osc(cells.len());
    if !report.passed() {
        return Err(Error::InvalidParameter("cells overlap".into()));
    }
    Ok(s)
}

/// Countable GLS system from a cell generator.
pub fn gls_countable<F>(name: &str, cell: F) -> Result<Gdms>
where
    F: Fn(usize) -> (f64, f64) + Send + Sync + 'static,
{
    Gdms::countable(name, vec![Interval::unit()], move |k| {
        let (a, b) = cell(k);
        affine_cell(k, a, b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_branch_at_zero() {
        let s = gauss_cf();
        for n in 1..50 {
            assert_eq!(s.branch(n - 1).eval(0.0), 1.0 / n as f64);
        }
    }

    #[test]
    fn backward_neutral_fixed_point() {
        let p = backward_cf();
        let b = p.system().branch(0);
        assert_eq!(b.eval(1.0), 1.0);
        assert!((b.derivative(1.0).abs() - 1.0).abs() < 1e-15);
        assert_eq!(p.points()[0].fixed_point, 1.0);
    }

    #[test]
    fn backward_map_is_renyi() {
        let s = backward_cf();
        for x in [0.3f64, 0.77, 0.013, 0.6] {
            let expected = 1.0 - (1.0 / x).fract();
            assert!((s.system().gdms_map(x).unwrap() - expected).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn luroth_slopes() {
        let s = luroth();
        for n in 1..40usize {
            let BranchMap::Affine { slope, offset } = s.branch(n - 1).map else { panic!() };
            let expected = 1.0 / (n * (n + 1)) as f64;
            assert!((slope - expected).abs() < 1e-15);
            assert!((offset - 1.0 / (n + 1) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn gls_validation() {
        assert!(gls(&[(0.0, 0.5), (0.5, 1.0)]).is_ok());
        assert!(gls(&[(0.0, 0.5), (0.5, 0.9)]).is_err());
        assert!(gls(&[(0.0, 0.6), (0.4, 0.8)]).is_err());
        assert!(manneville_pomeau(0.0).is_err());
    }

    #[test]
    fn manneville_pomeau_is_parabolic_at_zero() {
        let p = manneville_pomeau(0.5).unwrap();
        assert_eq!(p.points()[0].edge, 0);
        assert_eq!(p.points()[0].fixed_point, 0.0);
        for x in [0.1, 0.4, 0.9] {
            let y = x + f64::powf(x, 1.5);
            let expected = if y < 1.0 { y } else { y - 1.0 };
            assert!((p.system().gdms_map(x).unwrap() - expected).abs() < 1e-12);
        }
    }
}
