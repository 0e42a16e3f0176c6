use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::branch::{Branch, Interval};
use crate::numeric::{linear_fit, task_rng};
use crate::shift::{IncidenceMatrix, Letter, ShiftSpace};
use crate::{Error, Result};

/// Prefix length after which `coding_point` gives up.
pub const MAX_CODING_PREFIX: usize = 4096;

/// Default grid size for derivative and injectivity checks.
pub const DEFAULT_GRID: usize = 1 << 12;

type EdgeFn = Arc<dyn Fn(usize) -> Branch + Send + Sync>;
type LocatorFn = Arc<dyn Fn(f64) -> Option<usize> + Send + Sync>;

#[derive(Clone)]
enum Edges {
    Finite(Vec<Branch>),
    Countable(EdgeFn),
}

/// A conformal graph directed Markov system on real intervals.
#[derive(Clone)]
pub struct Gdms {
    name: String,
    vertices: Vec<Interval>,
    edges: Edges,
    forbidden: Arc<HashSet<(Letter, Letter)>>,
    xi: Option<f64>,
    locator: Option<LocatorFn>,
}

impl fmt::Debug for Gdms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gdms")
            .field("name", &self.name)
            .field("vertices", &self.vertices)
            .field("edges", &self.edge_count().map_or("countable".to_string(), |n| n.to_string()))
            .finish()
    }
}

/// Image interval of a composed branch and its derivative magnitude range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchImage {
    pub image: Interval,
    pub min_derivative: f64,
    pub max_derivative: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CodingPoint {
    pub x: f64,
    pub error: f64,
    pub prefix_len: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Overlap {
    pub first: Letter,
    pub second: Letter,
    pub length: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OscReport {
    pub edges_checked: usize,
    pub overlaps: Vec<Overlap>,
}

impl OscReport {
    pub fn passed(&self) -> bool {
        self.overlaps.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BdpReport {
    /// `(n, K_n)`: largest derivative ratio over sampled words of length `n`.
    pub per_length: Vec<(usize, f64)>,
    pub k_estimate: f64,
    /// Ratios kept growing with the word length.
    pub renyi_violation: bool,
    /// Hölder exponent of `log|φ_ω'|`; `None` when it is constant.
    pub holder_alpha: Option<f64>,
}

impl Gdms {
    pub fn finite(name: impl Into<String>, vertices: Vec<Interval>, branches: Vec<Branch>) -> Result<Self> {
        let s = Self {
            name: name.into(),
            vertices,
            edges: Edges::Finite(branches),
            forbidden: Arc::new(HashSet::new()),
            xi: None,
            locator: None,
        };
        s.validate_edges(s.edge_count().unwrap())?;
        Ok(s)
    }

    /// A system with edges `0, 1, 2, ...` produced on demand.
    pub fn countable<F>(name: impl Into<String>, vertices: Vec<Interval>, edge: F) -> Result<Self>
    where
        F: Fn(usize) -> Branch + Send + Sync + 'static,
    {
        let s = Self {
            name: name.into(),
            vertices,
            edges: Edges::Countable(Arc::new(edge)),
            forbidden: Arc::new(HashSet::new()),
            xi: None,
            locator: None,
        };
        s.validate_edges(64)?;
        Ok(s)
    }

    fn validate_edges(&self, n: usize) -> Result<()> {
        if self.vertices.is_empty() {
            return Err(Error::InvalidParameter("a system needs at least one vertex".into()));
        }
        for v in &self.vertices {
            if !(v.diam() > 0.0) {
                return Err(Error::InvalidParameter(format!("degenerate vertex interval {v:?}")));
            }
        }
        for e in 0..n {
            let b = self.branch(e);
            if b.source >= self.vertices.len() || b.target >= self.vertices.len() {
                return Err(Error::InvalidParameter(format!("edge {} references a missing vertex", b.label)));
            }
            b.map.validate()?;
            let dom = self.vertices[b.source];
            let img = b.image(&dom);
            if !self.vertices[b.target].contains_interval(&img, 1e-12) {
                return Err(Error::InvalidParameter(format!("edge {} maps outside its target interval", b.label)));
            }
        }
        Ok(())
    }

    /// Forbid extra transitions on top of the vertex matching rule.
    pub fn with_forbidden<I: IntoIterator<Item = (Letter, Letter)>>(mut self, pairs: I) -> Self {
        self.forbidden = Arc::new(pairs.into_iter().collect());
        self
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = Some(xi);
        self
    }

    /// A function returning the edge whose image probably contains `x`;
    /// neighbouring edges are checked as well.
    pub fn with_locator<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> Option<usize> + Send + Sync + 'static,
    {
        self.locator = Some(Arc::new(f));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertices(&self) -> &[Interval] {
        &self.vertices
    }

    /// `None` for a countable edge set.
    pub fn edge_count(&self) -> Option<usize> {
        match &self.edges {
            Edges::Finite(v) => Some(v.len()),
            Edges::Countable(_) => None,
        }
    }

    pub fn truncation(&self, n: usize) -> usize {
        self.edge_count().map_or(n, |k| k.min(n))
    }

    pub fn branch(&self, e: Letter) -> Branch {
        match &self.edges {
            Edges::Finite(v) => v[e].clone(),
            Edges::Countable(f) => f(e),
        }
    }

    pub fn domain(&self, e: Letter) -> Interval {
        self.vertices[self.branch(e).source]
    }

    /// `A_{ab} = 1` iff `t(a) = i(b)` and the pair is not explicitly forbidden.
    pub fn allows(&self, a: Letter, b: Letter) -> bool {
        self.branch(a).source == self.branch(b).target && !self.forbidden.contains(&(a, b))
    }

    pub fn is_admissible(&self, word: &[Letter]) -> bool {
        if let Some(k) = self.edge_count() {
            if word.iter().any(|&e| e >= k) {
                return false;
            }
        }
        !word.is_empty() && word.windows(2).all(|p| self.allows(p[0], p[1]))
    }

    /// The symbolic space of admissible edge sequences.
    pub fn shift_space(&self) -> ShiftSpace {
        if self.vertices.len() == 1 && self.forbidden.is_empty() {
            return ShiftSpace::new(self.edge_count(), IncidenceMatrix::full());
        }
        let s = self.clone();
        ShiftSpace::new(self.edge_count(), IncidenceMatrix::from_fn(move |a, b| s.allows(a, b)))
    }

    /// `φ_{ω_1} ∘ … ∘ φ_{ω_n}` at `x ∈ X_{t(ω_n)}` with its derivative.
    pub fn compose_at(&self, word: &[Letter], x: f64) -> (f64, f64) {
        word.iter().rev().fold((x, 1.0), |(y, d), &e| {
            let (z, dz) = self.branch(e).map.eval_with_derivative(y);
            (z, d * dz)
        })
    }

    /// Image of `X_{t(ω_n)}` under `φ_ω` and `|φ_ω'|` at its endpoints and
    /// midpoint.
    pub fn compose_branch(&self, word: &[Letter]) -> Result<BranchImage> {
        if !self.is_admissible(word) {
            return Err(Error::Inadmissible);
        }
        let dom = self.domain(*word.last().unwrap());
        let (a, da) = self.compose_at(word, dom.lo);
        let (m, dm) = self.compose_at(word, dom.midpoint());
        let (b, db) = self.compose_at(word, dom.hi);
        let _ = m;
        let ds = [da.abs(), dm.abs(), db.abs()];
        Ok(BranchImage {
            image: Interval::new(a, b),
            min_derivative: ds.iter().copied().fold(f64::INFINITY, f64::min),
            max_derivative: ds.iter().copied().fold(0.0, f64::max),
        })
    }

    fn prefix_image(&self, omega: &dyn Fn(usize) -> Letter, n: usize) -> Result<Interval> {
        let word: Vec<Letter> = (0..n).map(omega).collect();
        Ok(self.compose_branch(&word)?.image)
    }

    /// `π(ω)`: midpoint of the first nested image `φ_{ω|n}(X)` with
    /// diameter below `tol`.
    pub fn coding_point(&self, omega: &dyn Fn(usize) -> Letter, tol: f64) -> Result<CodingPoint> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        let mut hi = 1;
        loop {
            if self.prefix_image(omega, hi)?.diam() < tol {
                break;
            }
            if hi >= MAX_CODING_PREFIX {
                return Err(Error::NonContractingPrefix { len: hi });
            }
            hi = (hi * 2).min(MAX_CODING_PREFIX);
        }
        // images are nested, so the diameter is monotone in the length
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.prefix_image(omega, mid)?.diam() < tol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let img = self.prefix_image(omega, hi)?;
        Ok(CodingPoint { x: img.midpoint(), error: img.diam() / 2.0, prefix_len: hi })
    }

    /// The preassigned value of the system map off the branch images.
    pub fn xi(&self) -> f64 {
        self.xi.unwrap_or_else(|| {
            let b = self.branch(0);
            b.eval(self.vertices[b.source].lo)
        })
    }

    fn candidate_edges(&self, x: f64) -> Vec<Letter> {
        match (&self.locator, self.edge_count()) {
            (Some(loc), count) => match loc(x) {
                Some(e) => {
                    let mut c = vec![e];
                    if e > 0 {
                        c.push(e - 1);
                    }
                    if count.is_none_or(|k| e + 1 < k) {
                        c.push(e + 1);
                    }
                    c
                }
                None => Vec::new(),
            },
            (None, Some(k)) => (0..k).collect(),
            (None, None) => (0..DEFAULT_GRID).collect(),
        }
    }

    /// The edge whose open image contains `x`; `None` off the images.
    /// Points on the shared boundary of two images are reported as
    /// [`Error::Boundary`].
    pub fn locate_edge(&self, x: f64) -> Result<Option<Letter>> {
        let mut endpoint_hits = 0;
        for e in self.candidate_edges(x) {
            let b = self.branch(e);
            let img = b.image(&self.vertices[b.source]);
            if img.interior_contains(x) {
                return Ok(Some(e));
            }
            if img.contains(x) {
                endpoint_hits += 1;
            }
        }
        if endpoint_hits >= 2 {
            return Err(Error::Boundary(x));
        }
        Ok(None)
    }

    /// The system map `f`: `f(φ_e(x)) = x` on the interior of each image,
    /// `ξ` off the images.
    pub fn gdms_map(&self, x: f64) -> Result<f64> {
        match self.locate_edge(x)? {
            Some(e) => self.branch(e).map.invert(x),
            None => Ok(self.xi()),
        }
    }

    /// `log|f'(x)| = -log|φ_e'(f(x))|` for `x` inside the image of `e`.
    pub fn log_expansion(&self, x: f64) -> Result<f64> {
        let e = self.locate_edge(x)?.ok_or_else(|| Error::Domain(format!("{x} is not in any branch image")))?;
        let b = self.branch(e);
        let y = b.map.invert(x)?;
        Ok(-b.derivative(y).abs().ln())
    }

    /// Pairwise interior disjointness of the images of the first `n` edges.
    pub fn verify_osc(&self, n: usize) -> OscReport {
        let k = self.truncation(n);
        let mut images: Vec<(usize, Interval, Letter)> = (0..k)
            .map(|e| {
                let b = self.branch(e);
                (b.target, b.image(&self.vertices[b.source]), e)
            })
            .collect();
        images.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.lo.total_cmp(&b.1.lo)));
        let mut overlaps = Vec::new();
        for (i, (v, img, e)) in images.iter().enumerate() {
            for (w, other, f) in &images[i + 1..] {
                if w != v || other.lo >= img.hi {
                    break;
                }
                let length = img.hi.min(other.hi) - other.lo;
                if length > 1e-15 {
                    overlaps.push(Overlap { first: *e.min(f), second: *e.max(f), length });
                }
            }
        }
        OscReport { edges_checked: k, overlaps }
    }

    fn sample_word(&self, n: usize, k: usize, rng: &mut impl Rng) -> Option<Vec<Letter>> {
        let mut word = vec![rng.gen_range(0..k)];
        while word.len() < n {
            let last = *word.last().unwrap();
            let options: Vec<Letter> = (0..k).filter(|&b| self.allows(last, b)).collect();
            if options.is_empty() {
                return None;
            }
            word.push(options[rng.gen_range(0..options.len())]);
        }
        Some(word)
    }

    /// Distortion sweep over words of lengths `1..=n_max` on the first
    /// `edges` letters: every constant word `eⁿ` of the first eight edges
    /// plus 64 random admissible words per length, with `|φ_ω'|` compared
    /// over a grid of `grid` points.
    pub fn bdp_constant(&self, edges: usize, n_max: usize, grid: usize, seed: u64) -> BdpReport {
        let k = self.truncation(edges);
        let per_length: Vec<(usize, f64, Vec<f64>)> = (1..=n_max)
            .into_par_iter()
            .map(|n| {
                let mut rng = task_rng(seed, n as u64);
                let mut words: Vec<Vec<Letter>> =
                    (0..k.min(8)).filter(|&e| n == 1 || self.allows(e, e)).map(|e| vec![e; n]).collect();
                words.extend((0..64).filter_map(|_| self.sample_word(n, k, &mut rng)));
                let mut kn: f64 = 1.0;
                let mut holder = vec![0.0f64; 8];
                for w in &words {
                    let dom = self.domain(*w.last().unwrap());
                    let pts = dom.grid(grid);
                    let logs: Vec<f64> = pts.iter().map(|&x| self.compose_at(w, x).1.abs().ln()).collect();
                    let (lo, hi) =
                        logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                    kn = kn.max((hi - lo).exp());
                    for (j, h) in holder.iter_mut().enumerate() {
                        let step = 1usize << j;
                        if step >= logs.len() {
                            break;
                        }
                        let dev = logs.windows(step + 1).map(|s| (s[step] - s[0]).abs()).fold(0.0, f64::max);
                        *h = h.max(dev);
                    }
                }
                (n, kn, holder)
            })
            .collect();
        let k_estimate = per_length.iter().map(|r| r.1).fold(1.0, f64::max);
        let half = per_length[(n_max / 2).max(1) - 1].1;
        let renyi_violation = per_length.last().is_some_and(|r| r.1 > 1.25 * half);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let spacing = self.vertices.iter().map(|v| v.diam()).fold(0.0, f64::max) / (grid.max(2) - 1) as f64;
        for j in 0..8 {
            let dev = per_length.iter().map(|r| r.2[j]).fold(0.0, f64::max);
            if dev > 1e-13 {
                xs.push((spacing * (1u64 << j) as f64).ln());
                ys.push(dev.ln());
            }
        }
        let holder_alpha = linear_fit(&xs, &ys).map(|(slope, _, _)| slope.min(1.0));
        BdpReport {
            per_length: per_length.into_iter().map(|r| (r.0, r.1)).collect(),
            k_estimate,
            renyi_violation,
            holder_alpha,
        }
    }

    /// Largest `|φ_e'|` over a grid of the domain of edge `e`.
    pub fn contraction_bound(&self, e: Letter, grid: usize) -> f64 {
        self.branch(e).contraction_bound(&self.domain(e), grid)
    }

    pub fn is_injective(&self, e: Letter, grid: usize) -> bool {
        self.branch(e).is_injective_on_grid(&self.domain(e), grid)
    }

    /// A finite system whose edges are the given branches over the same
    /// vertices, keeping the forbidden pairs that survive.
    pub(crate) fn with_branches(&self, name: String, branches: Vec<Branch>) -> Result<Self> {
        Gdms::finite(name, self.vertices.clone(), branches)
    }
}
