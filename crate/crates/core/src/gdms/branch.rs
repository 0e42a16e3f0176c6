use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo: lo.min(hi), hi: lo.max(hi) }
    }

    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn diam(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn interior_contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn contains_interval(&self, other: &Interval, slack: f64) -> bool {
        other.lo >= self.lo - slack && other.hi <= self.hi + slack
    }

    /// `points` equally spaced points including both endpoints.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        let points = points.max(2);
        let h = self.diam() / (points - 1) as f64;
        (0..points).map(|k| if k == points - 1 { self.hi } else { self.lo + h * k as f64 }).collect()
    }
}

/// A monotone C¹ branch map of an interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BranchMap {
    /// `x ↦ slope·x + offset`.
    Affine { slope: f64, offset: f64 },
    /// `x ↦ (a x + b) / (c x + d)`.
    Moebius { a: f64, b: f64, c: f64, d: f64 },
    /// Inverse branches of `x ↦ x + x^{1+α} (mod 1)`: the left one fixes 0.
    MpBranch { alpha: f64, right: bool },
    /// `φ_1 ∘ φ_2 ∘ … ∘ φ_k`, applied right to left.
    Composite(Vec<BranchMap>),
}

fn mp_forward(alpha: f64, y: f64) -> f64 {
    y + y.powf(1.0 + alpha)
}

fn mp_forward_deriv(alpha: f64, y: f64) -> f64 {
    1.0 + (1.0 + alpha) * y.powf(alpha)
}

/// Solve `y + y^{1+α} = c` on `[0, 1]`. Newton from above converges
/// monotonically because the left side is increasing and convex.
fn mp_solve(alpha: f64, c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    let mut y = c.min(1.0);
    for _ in 0..200 {
        let step = (mp_forward(alpha, y) - c) / mp_forward_deriv(alpha, y);
        let next = y - step;
        if !(next < y) || step <= 4.0 * f64::EPSILON * y {
            return next.max(0.0).min(y);
        }
        y = next;
    }
    y
}

impl BranchMap {
    pub fn affine(slope: f64, offset: f64) -> Self {
        BranchMap::Affine { slope, offset }
    }

    pub fn moebius(a: f64, b: f64, c: f64, d: f64) -> Self {
        BranchMap::Moebius { a, b, c, d }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            BranchMap::Affine { slope, offset } => slope * x + offset,
            BranchMap::Moebius { a, b, c, d } => (a * x + b) / (c * x + d),
            BranchMap::MpBranch { alpha, right } => {
                if *right {
                    mp_solve(*alpha, 1.0 + x)
                } else {
                    mp_solve(*alpha, x)
                }
            }
            BranchMap::Composite(maps) => maps.iter().rev().fold(x, |y, m| m.eval(y)),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).1
    }

    /// `(φ(x), φ'(x))` by the chain rule for composites.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        match self {
            BranchMap::Affine { slope, offset } => (slope * x + offset, *slope),
            BranchMap::Moebius { a, b, c, d } => {
                let den = c * x + d;
                ((a * x + b) / den, (a * d - b * c) / (den * den))
            }
            BranchMap::MpBranch { alpha, .. } => {
                let y = self.eval(x);
                (y, 1.0 / mp_forward_deriv(*alpha, y))
            }
            BranchMap::Composite(maps) => maps.iter().rev().fold((x, 1.0), |(y, d), m| {
                let (z, dz) = m.eval_with_derivative(y);
                (z, d * dz)
            }),
        }
    }

    /// `φ^{-1}(y)` for `y` in the image.
    pub fn invert(&self, y: f64) -> Result<f64> {
        match self {
            BranchMap::Affine { slope, offset } => {
                if *slope == 0.0 {
                    return Err(Error::InvalidParameter("constant affine branch".into()));
                }
                Ok((y - offset) / slope)
            }
            BranchMap::Moebius { a, b, c, d } => Ok((d * y - b) / (a - c * y)),
            BranchMap::MpBranch { alpha, right } => {
                let x = mp_forward(*alpha, y);
                Ok(if *right { x - 1.0 } else { x })
            }
            BranchMap::Composite(maps) => maps.iter().try_fold(y, |z, m| m.invert(z)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BranchMap::Affine { slope, offset } if slope.is_finite() && offset.is_finite() && *slope != 0.0 => Ok(()),
            BranchMap::Moebius { a, b, c, d } if a * d - b * c != 0.0 && [a, b, c, d].iter().all(|v| v.is_finite()) => {
                Ok(())
            }
            BranchMap::MpBranch { alpha, .. } if *alpha > 0.0 && alpha.is_finite() => Ok(()),
            BranchMap::Composite(maps) if !maps.is_empty() => maps.iter().try_for_each(BranchMap::validate),
            other => Err(Error::InvalidParameter(format!("degenerate branch {other:?}"))),
        }
    }
}

/// An edge `e` with `φ_e : X_{source} → X_{target}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub label: String,
    pub source: usize,
    pub target: usize,
    pub map: BranchMap,
}

impl Branch {
    pub fn new(label: impl Into<String>, source: usize, target: usize, map: BranchMap) -> Self {
        Self { label: label.into(), source, target, map }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.map.eval(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.map.derivative(x)
    }

    /// `φ_e(domain)` as an interval.
    pub fn image(&self, domain: &Interval) -> Interval {
        Interval::new(self.eval(domain.lo), self.eval(domain.hi))
    }

    /// `max |φ'|` over a grid of the domain.
    pub fn contraction_bound(&self, domain: &Interval, points: usize) -> f64 {
        domain.grid(points).into_iter().map(|x| self.derivative(x).abs()).fold(0.0, f64::max)
    }

    /// Strict monotonicity on a grid of the domain.
    pub fn is_injective_on_grid(&self, domain: &Interval, points: usize) -> bool {
        let values: Vec<f64> = domain.grid(points).into_iter().map(|x| self.eval(x)).collect();
        values.windows(2).all(|w| w[1] > w[0]) || values.windows(2).all(|w| w[1] < w[0])
    }
}
