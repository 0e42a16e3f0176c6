use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::branch::{Branch, BranchMap};
use super::system::{Gdms, DEFAULT_GRID};
use crate::numeric::linear_fit;
use crate::shift::Letter;
use crate::{Error, Result};

/// Default number of jump lengths `n` per parabolic letter.
pub const DEFAULT_JUMP_CAP: usize = 1 << 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParabolicPoint {
    pub edge: Letter,
    pub fixed_point: f64,
}

/// A system together with the edges whose branches have a neutral fixed
/// point.
#[derive(Clone, Debug)]
pub struct ParabolicSystem {
    system: Gdms,
    points: Vec<ParabolicPoint>,
}

fn find_fixed_point(b: &Branch, lo: f64, hi: f64) -> Option<f64> {
    for x in [lo, hi] {
        if (b.eval(x) - x).abs() < 1e-12 {
            return Some(x);
        }
    }
    let g = |x: f64| b.eval(x) - x;
    let grid: Vec<f64> = super::branch::Interval::new(lo, hi).grid(DEFAULT_GRID);
    for w in grid.windows(2) {
        let (a, c) = (w[0], w[1]);
        if g(a) * g(c) < 0.0 {
            return crate::numeric::brent_root(a, c, g, 1e-15);
        }
    }
    None
}

impl ParabolicSystem {
    /// Mark `edges` as parabolic. Each must have a fixed point with
    /// `|φ_e'| = 1` there (to 1e-10) and be allowed to follow itself.
    pub fn new(system: Gdms, edges: &[Letter]) -> Result<Self> {
        let mut points = Vec::new();
        for &e in edges {
            let b = system.branch(e);
            let dom = system.domain(e);
            let x = find_fixed_point(&b, dom.lo, dom.hi)
                .ok_or_else(|| Error::InvalidParameter(format!("edge {} has no fixed point", b.label)))?;
            if (b.derivative(x).abs() - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidParameter(format!("edge {} is not neutral at its fixed point", b.label)));
            }
            if !system.allows(e, e) {
                return Err(Error::InvalidParameter(format!("edge {} cannot follow itself", b.label)));
            }
            points.push(ParabolicPoint { edge: e, fixed_point: x });
        }
        Ok(Self { system, points })
    }

    pub fn system(&self) -> &Gdms {
        &self.system
    }

    pub fn points(&self) -> &[ParabolicPoint] {
        &self.points
    }

    pub fn is_parabolic(&self, e: Letter) -> bool {
        self.points.iter().any(|p| p.edge == e)
    }
}

/// A letter of the jump alphabet: an original non-parabolic edge, or a run
/// `iⁿ j` of a parabolic edge `i` closed by a different edge `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DerivedLetter {
    Plain { edge: Letter },
    Jump { parabolic: Letter, run: usize, exit: Letter },
}

impl DerivedLetter {
    pub fn first(&self) -> Letter {
        match *self {
            DerivedLetter::Plain { edge } => edge,
            DerivedLetter::Jump { parabolic, .. } => parabolic,
        }
    }

    pub fn last(&self) -> Letter {
        match *self {
            DerivedLetter::Plain { edge } => edge,
            DerivedLetter::Jump { exit, .. } => exit,
        }
    }

    /// The original word this letter stands for.
    pub fn expand(&self) -> Vec<Letter> {
        match *self {
            DerivedLetter::Plain { edge } => vec![edge],
            DerivedLetter::Jump { parabolic, run, exit } => {
                let mut w = vec![parabolic; run];
                w.push(exit);
                w
            }
        }
    }
}

/// The hyperbolic system obtained by the jump transform.
#[derive(Clone, Debug)]
pub struct JumpSystem {
    base: ParabolicSystem,
    n_cap: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionBound {
    pub letter: DerivedLetter,
    pub bound: f64,
}

pub fn jump_transform(p: &ParabolicSystem, n_cap: usize) -> JumpSystem {
    JumpSystem { base: p.clone(), n_cap: n_cap.max(1) }
}

impl JumpSystem {
    pub fn base(&self) -> &ParabolicSystem {
        &self.base
    }

    pub fn n_cap(&self) -> usize {
        self.n_cap
    }

    /// Derived letters built from original edges below `truncation`:
    /// non-parabolic edges first, then runs ordered by parabolic edge, run
    /// length and exit edge.
    pub fn letters(&self, truncation: usize) -> Vec<DerivedLetter> {
        let s = self.base.system();
        let k = s.truncation(truncation);
        let mut out: Vec<DerivedLetter> =
            (0..k).filter(|&e| !self.base.is_parabolic(e)).map(|edge| DerivedLetter::Plain { edge }).collect();
        for p in self.base.points() {
            let i = p.edge;
            let exits: Vec<Letter> = (0..k).filter(|&j| j != i && s.allows(i, j)).collect();
            for run in 1..=self.n_cap {
                out.extend(exits.iter().map(|&exit| DerivedLetter::Jump { parabolic: i, run, exit }));
            }
        }
        out
    }

    /// `A*_{ab} = A_{last(a), first(b)}`.
    pub fn admissible(&self, a: &DerivedLetter, b: &DerivedLetter) -> bool {
        self.base.system().allows(a.last(), b.first())
    }

    pub fn branch_map(&self, l: &DerivedLetter) -> BranchMap {
        let s = self.base.system();
        match *l {
            DerivedLetter::Plain { edge } => s.branch(edge).map,
            DerivedLetter::Jump { .. } => {
                BranchMap::Composite(l.expand().into_iter().map(|e| s.branch(e).map).collect())
            }
        }
    }

    /// `max |φ_a'|` over a grid of the domain for every derived letter from
    /// edges below `truncation`. Run lengths are swept incrementally.
    pub fn contraction_bounds(&self, truncation: usize, grid: usize) -> Result<Vec<ContractionBound>> {
        let s = self.base.system();
        let letters = self.letters(truncation);
        let mut bounds: Vec<ContractionBound> = letters
            .iter()
            .filter_map(|l| match *l {
                DerivedLetter::Plain { edge } => {
                    Some(ContractionBound { letter: *l, bound: s.contraction_bound(edge, grid) })
                }
                _ => None,
            })
            .collect();
        let mut pairs: Vec<(Letter, Letter)> = letters
            .iter()
            .filter_map(|l| match *l {
                DerivedLetter::Jump { parabolic, run: 1, exit } => Some((parabolic, exit)),
                _ => None,
            })
            .collect();
        pairs.dedup();
        let n_cap = self.n_cap;
        let swept: Vec<Vec<ContractionBound>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let pi = s.branch(i).map;
                let pj = s.branch(j).map;
                let mut best = vec![0.0f64; n_cap];
                for x in s.domain(j).grid(grid) {
                    let (mut y, mut d) = pj.eval_with_derivative(x);
                    for b in best.iter_mut() {
                        let (z, dz) = pi.eval_with_derivative(y);
                        y = z;
                        d *= dz;
                        *b = b.max(d.abs());
                    }
                }
                best.into_iter()
                    .enumerate()
                    .map(|(n, bound)| ContractionBound {
                        letter: DerivedLetter::Jump { parabolic: i, run: n + 1, exit: j },
                        bound,
                    })
                    .collect()
            })
            .collect();
        bounds.extend(swept.into_iter().flatten());
        if let Some(bad) = bounds.iter().find(|b| !(b.bound < 1.0)) {
            let label = bad.letter.expand().iter().map(|&e| s.branch(e).label).collect::<Vec<_>>().join(" ");
            return Err(Error::NotContracting { label, bound: bad.bound });
        }
        Ok(bounds)
    }

    /// The derived system over the finite alphabet `letters(truncation)`.
    pub fn to_gdms(&self, truncation: usize) -> Result<Gdms> {
        let s = self.base.system();
        let letters = self.letters(truncation);
        let branches: Vec<Branch> = letters
            .iter()
            .map(|l| {
                let w = l.expand();
                let label = w.iter().map(|&e| s.branch(e).label).collect::<Vec<_>>().join(" ");
                let last = s.branch(*w.last().unwrap());
                let first = s.branch(w[0]);
                Branch::new(label, last.source, first.target, self.branch_map(l))
            })
            .collect();
        let mut forbidden = Vec::new();
        for (a, la) in letters.iter().enumerate() {
            for (b, lb) in letters.iter().enumerate() {
                let same_vertex = s.branch(la.last()).source == s.branch(lb.first()).target;
                if same_vertex && !self.admissible(la, lb) {
                    forbidden.push((a, b));
                }
            }
        }
        Ok(s.with_branches(format!("{}*", s.name()), branches)?.with_forbidden(forbidden))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsReport {
    /// Mean least-squares slope of `log|φ_{iⁿ}'(z)|` against `log n`.
    pub slope: f64,
    /// `β = -1 / (1 + slope)`, so that the slope is `-(β + 1)/β`.
    pub beta: f64,
    /// `max / min` of `|φ_{iⁿ}'(z)| n^{-slope}` over the sampled `n` and `z`.
    pub ratio_spread: f64,
    pub residual: f64,
    pub samples: usize,
}

/// Largest tolerated rms residual (in log units) of the per-point fits.
pub const ASYMPTOTICS_RESIDUAL_LIMIT: f64 = 0.05;

/// Power law of `|φ_{iⁿ}'(z)|` in `n` for `z` in the images of the edges that
/// may follow `i` (at most eight of them, 16 interior points each).
pub fn parabolic_asymptotics(p: &ParabolicSystem, i: Letter, n_lo: usize, n_hi: usize) -> Result<AsymptoticsReport> {
    if !p.is_parabolic(i) {
        return Err(Error::InvalidParameter(format!("edge {i} is not parabolic")));
    }
    if n_lo < 1 || n_hi < 2 * n_lo {
        return Err(Error::InvalidParameter("the run range must span at least a factor of two".into()));
    }
    let s = p.system();
    let k = s.truncation(64);
    let mut zs = Vec::new();
    for j in (0..k).filter(|&j| j != i && s.allows(i, j)).take(8) {
        let img = s.branch(j).image(&s.domain(j));
        let g = img.grid(18);
        zs.extend_from_slice(&g[1..17]);
    }
    let mut ns: Vec<usize> = (0..48)
        .map(|t| {
            ((n_lo as f64).ln() + ((n_hi as f64).ln() - (n_lo as f64).ln()) * t as f64 / 47.0).exp().round() as usize
        })
        .collect();
    ns.dedup();
    let log_n: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let map = s.branch(i).map;
    let curves: Vec<Vec<f64>> = zs
        .par_iter()
        .map(|&z| {
            let mut out = Vec::with_capacity(ns.len());
            let (mut y, mut d) = (z, 1.0f64);
            let mut next = 0;
            for n in 1..=n_hi {
                let (w, dw) = map.eval_with_derivative(y);
                y = w;
                d *= dw;
                if next < ns.len() && ns[next] == n {
                    out.push(d.abs().ln());
                    next += 1;
                }
            }
            out
        })
        .collect();
    let mut slopes = Vec::new();
    let mut residual: f64 = 0.0;
    for c in &curves {
        let (slope, _, rms) = linear_fit(&log_n, c).ok_or(Error::InsufficientCounts)?;
        slopes.push(slope);
        residual = residual.max(rms);
    }
    let slope = slopes.iter().sum::<f64>() / slopes.len() as f64;
    if residual > ASYMPTOTICS_RESIDUAL_LIMIT {
        return Err(Error::FitResidual { residual, limit: ASYMPTOTICS_RESIDUAL_LIMIT });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in &curves {
        for (v, ln) in c.iter().zip(&log_n) {
            let r = v - slope * ln;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    Ok(AsymptoticsReport {
        slope,
        beta: -1.0 / (1.0 + slope),
        ratio_spread: (hi - lo).exp(),
        residual,
        samples: zs.len() * ns.len(),
    })
}
