use num_bigint::BigInt;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::hp;
use super::system::{BetaSystem, HpReal};
use crate::numeric::task_rng;
use crate::{Error, Result};

/// Minimum number of digits kept for a freshly sampled fiber coordinate;
/// small β get more, so that the truncation stays below `2^{-128}`.
pub const FIBER_DEPTH: usize = 64;

pub(crate) fn fiber_depth(beta: f64) -> usize {
    FIBER_DEPTH.max((128.0 / beta.log2()).ceil() as usize)
}

/// A point `(x, y)` of the stacked rectangle `Z_level = [0, T^level 1) ×
/// [0, β^{-level})`. The fiber coordinate is a digit string
/// `y = Σ c_j β^{-j}`, so the tower step only splices digits.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionPoint {
    pub x: HpReal,
    pub y_digits: Vec<u32>,
    pub level: usize,
}

impl ExtensionPoint {
    /// A level-0 point; `y` is expanded greedily.
    pub fn new(system: &BetaSystem, x: f64, y: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) || !(0.0..1.0).contains(&y) {
            return Err(Error::Domain(format!("({x}, {y}) is outside [0, 1)^2")));
        }
        Ok(Self { x: system.hp(x), y_digits: system.digits(y, fiber_depth(system.beta()))?, level: 0 })
    }

    pub fn from_hp(x: HpReal, y_digits: Vec<u32>) -> Self {
        Self { x, y_digits, level: 0 }
    }

    pub fn x(&self, system: &BetaSystem) -> f64 {
        system.to_f64(&self.x)
    }

    pub fn y(&self, system: &BetaSystem) -> f64 {
        system.to_f64(&self.y_hp(system))
    }

    pub(crate) fn y_hp(&self, system: &BetaSystem) -> HpReal {
        HpReal(self.y_digits.iter().enumerate().map(|(j, &c)| system.inv_pow_ext(j + 1) * c).sum())
    }
}

impl BetaSystem {
    pub(crate) fn inv_pow_ext(&self, j: usize) -> BigInt {
        let known = self.inv_pow_len() - 1;
        if j <= known {
            return self.inv_pow(j).clone();
        }
        let mut v = self.inv_pow(known).clone();
        for _ in known..j {
            v = hp::div(&v, self.beta_hp(), self.precision_bits());
        }
        v
    }
}

/// One step of the tower map. With `d = ⌊βx⌋` and level `i`: if
/// `d < b_{i+1}` the point drops to level 0 with fiber digits
/// `b_1 … b_i d c_{i+1} c_{i+2} …`, otherwise it climbs to level `i+1` with
/// fiber `y/β`.
pub fn natural_extension_step(system: &BetaSystem, p: &ExtensionPoint) -> Result<ExtensionPoint> {
    let i = p.level;
    let b = system.digits_of_one();
    if i >= b.len() {
        return Err(Error::DigitBudget(format!("level {i} exceeds the known digits of 1")));
    }
    if p.y_digits.iter().take(i).any(|&c| c != 0) {
        return Err(Error::Domain(format!("fiber coordinate too large for level {i}")));
    }
    let (d, x) = system.step_hp(&p.x.0);
    let bi = b[i];
    if d > bi {
        return Err(Error::Domain(format!("digit {d} exceeds b_{} = {bi}", i + 1)));
    }
    let tail = p.y_digits.get(i..).unwrap_or(&[]);
    if d < bi {
        let mut y = b[..i].to_vec();
        y.push(d);
        y.extend_from_slice(tail);
        Ok(ExtensionPoint { x: HpReal(x), y_digits: y, level: 0 })
    } else {
        let mut y = vec![0; i + 1];
        y.extend_from_slice(tail);
        Ok(ExtensionPoint { x: HpReal(x), y_digits: y, level: i + 1 })
    }
}

/// Steps until a level-0 point returns to level 0.
pub fn first_return_time(system: &BetaSystem, x: &HpReal) -> Result<usize> {
    let b = system.digits_of_one();
    let mut t = x.0.clone();
    for (m, &bm) in b.iter().enumerate() {
        let (d, rest) = system.step_hp(&t);
        if d < bm {
            return Ok(m + 1);
        }
        if d > bm {
            return Err(Error::Domain("point outside [0, 1)".into()));
        }
        t = rest;
    }
    Err(Error::DigitBudget(format!("no return within {} steps", b.len())))
}

/// The first return map to level 0, by iterating the tower step.
pub fn induced_by_iteration(system: &BetaSystem, p: &ExtensionPoint) -> Result<(ExtensionPoint, usize)> {
    let mut q = natural_extension_step(system, p)?;
    let mut steps = 1;
    while q.level != 0 {
        q = natural_extension_step(system, &q)?;
        steps += 1;
    }
    Ok((q, steps))
}

fn induced_closed_form_hp(system: &BetaSystem, x: &HpReal, y: &HpReal) -> Result<(BigInt, BigInt)> {
    let prec = system.precision_bits();
    let k = first_return_time(system, x)?;
    let mut t = x.0.clone();
    let mut last = 0;
    for _ in 0..k {
        let (d, rest) = system.step_hp(&t);
        last = d;
        t = rest;
    }
    let inv = system.inv_pow(k);
    let y_new = system.prefix_sum(k - 1) + inv * last + hp::mul(&y.0, inv, prec);
    Ok((t, y_new))
}

/// `(T^k x, b_1/β + … + b_{k-1}/β^{k-1} + d_k/β^k + y/β^k)` on the part of
/// `[0, 1)^2` with return time `k`.
pub fn induced_map_z0(system: &BetaSystem, x: f64, y: f64) -> Result<(f64, f64)> {
    let (a, b) = induced_closed_form_hp(system, &system.hp(x), &system.hp(y))?;
    Ok((hp::to_f64(&a, system.precision_bits()), hp::to_f64(&b, system.precision_bits())))
}

fn gls_extension_hp(system: &BetaSystem, x: &HpReal, y: &HpReal) -> Result<(BigInt, BigInt)> {
    let prec = system.precision_bits();
    let (n, k, i) = system.locate_hp(x)?;
    let _ = n;
    let left = system.cell_left_hp(k, i);
    let length = system.inv_pow(k + 1);
    let offset = &x.0 - &left;
    let mut scaled = offset;
    for _ in 0..=k {
        scaled = hp::mul(&scaled, system.beta_hp(), prec);
    }
    Ok((scaled, left + hp::mul(length, &y.0, prec)))
}

/// The natural extension of the GLS system of the partition `{I_n}`:
/// `(x, y) ↦ ((x - left_n) β^{k+1}, left_n + β^{-(k+1)} y)` for `x ∈ I_n`.
pub fn gls_natural_extension(system: &BetaSystem, x: f64, y: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&y) {
        return Err(Error::Domain(format!("{y} is outside [0, 1)")));
    }
    let xh = system.hp(x);
    let (n, k, i) = system.locate_hp(&xh)?;
    let _ = n;
    let left = system.cell_left_hp(k, i);
    if xh.0 == left {
        return Err(Error::Boundary(x));
    }
    let (a, b) = gls_extension_hp(system, &xh, &system.hp(y))?;
    Ok((hp::to_f64(&a, system.precision_bits()), hp::to_f64(&b, system.precision_bits())))
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub max_deviation: f64,
    pub samples: usize,
    pub skipped: usize,
    pub max_return_time: usize,
}

/// `max ‖S(x, y) - T_{Z_0}(x, y)‖_∞` over uniform samples, with the GLS
/// extension `S` in affine form and the induced map obtained by iterating
/// the tower step on digit strings.
pub fn identity_check(system: &BetaSystem, sample_size: usize, seed: u64) -> IdentityReport {
    let prec = system.precision_bits();
    let results: Vec<Option<(f64, usize)>> = (0..sample_size)
        .into_par_iter()
        .map(|s| {
            let mut rng = task_rng(seed, s as u64);
            let (x, y): (f64, f64) = (rng.gen(), rng.gen());
            let p = ExtensionPoint::new(system, x, y).ok()?;
            let (a, b) = gls_extension_hp(system, &p.x, &p.y_hp(system)).ok()?;
            let (q, steps) = induced_by_iteration(system, &p).ok()?;
            let dx = hp::abs(&(a - &q.x.0));
            let dy = hp::abs(&(b - q.y_hp(system).0));
            Some((hp::to_f64(&dx.max(dy), prec), steps))
        })
        .collect();
    let ok: Vec<(f64, usize)> = results.iter().flatten().copied().collect();
    IdentityReport {
        max_deviation: ok.iter().map(|r| r.0).fold(0.0, f64::max),
        samples: ok.len(),
        skipped: sample_size - ok.len(),
        max_return_time: ok.iter().map(|r| r.1).max().unwrap_or(0),
    }
}

fn golden() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

/// The golden-mean skew step `(x, y) ↦ (βx - d, (d + y)/β)`, `d = ⌊βx⌋`,
/// induced on `W = [0, 1) × [0, 1/β)`.
pub fn golden_w_induced(x: f64, y: f64) -> Result<(f64, f64)> {
    let beta = golden();
    if !(0.0..1.0).contains(&x) || !(0.0..1.0 / beta).contains(&y) {
        return Err(Error::Domain(format!("({x}, {y}) is outside W")));
    }
    let (mut x, mut y) = (x, y);
    for _ in 0..64 {
        let bx = beta * x;
        let d = bx.floor();
        x = bx - d;
        y = (d + y) / beta;
        if y < 1.0 / beta {
            return Ok((x, y));
        }
    }
    Err(Error::OrbitEscape { step: 64 })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugacyReport {
    pub max_deviation: f64,
    pub samples: usize,
}

/// `max ‖Ψ(S(x, y)) - T_W(Ψ(x, y))‖_∞` with `Ψ(x, y) = (x, y/β)` for the
/// golden mean.
pub fn golden_conjugacy_check(sample_size: usize, seed: u64) -> Result<ConjugacyReport> {
    let beta = golden();
    let system = BetaSystem::with_depth(super::BetaValue::Golden, 64)?;
    let mut rng = task_rng(seed, 0);
    let mut max_deviation: f64 = 0.0;
    let mut samples = 0;
    for _ in 0..sample_size {
        let (x, y): (f64, f64) = (rng.gen(), rng.gen());
        let Ok((sx, sy)) = gls_natural_extension(&system, x, y) else { continue };
        let (tx, ty) = golden_w_induced(x, y / beta)?;
        max_deviation = max_deviation.max((sx - tx).abs()).max((sy / beta - ty).abs());
        samples += 1;
    }
    Ok(ConjugacyReport { max_deviation, samples })
}

#[cfg(test)]
mod tests {
    use super::super::BetaValue;
    use super::*;
    use proptest::prelude::*;

    fn phi() -> f64 {
        golden()
    }

    fn sys(v: BetaValue) -> BetaSystem {
        BetaSystem::new(v).unwrap()
    }

    #[test]
    fn golden_return_times() {
        let g = sys(BetaValue::Golden);
        assert_eq!(first_return_time(&g, &g.hp(0.3)).unwrap(), 1);
        assert_eq!(first_return_time(&g, &g.hp(0.8)).unwrap(), 2);
    }

    #[test]
    fn golden_induced_closed_forms() {
        let g = sys(BetaValue::Golden);
        let (b, b2) = (phi(), phi() * phi());
        let (x, y) = (0.4, 0.2);
        let (a, c) = induced_map_z0(&g, x, y).unwrap();
        assert!((a - b * x).abs() < 1e-15 && (c - y / b).abs() < 1e-15);
        let (x, y) = (0.9, 0.5);
        let (a, c) = induced_map_z0(&g, x, y).unwrap();
        assert!((a - (b2 * x - b)).abs() < 1e-14);
        assert!((c - (y + b) / b2).abs() < 1e-15);
    }

    #[test]
    fn golden_w_domain_closed_forms() {
        let (b, b2) = (phi(), phi() * phi());
        let (x, y) = (0.9, 0.5);
        let (a, c) = golden_w_induced(x, y).unwrap();
        assert!((a - (b2 * x - b)).abs() < 1e-14);
        assert!((c - (y + 1.0) / b2).abs() < 1e-15);
        let (a, c) = golden_w_induced(0.3, 0.5).unwrap();
        assert!((a - b * 0.3).abs() < 1e-15 && (c - 0.5 / b).abs() < 1e-15);
    }

    #[test]
    fn golden_gls_extension() {
        let g = sys(BetaValue::Golden);
        let (b, b2) = (phi(), phi() * phi());
        let (a, c) = gls_natural_extension(&g, 0.9, 0.3).unwrap();
        assert!((a - (b2 * 0.9 - b)).abs() < 1e-14);
        assert!((c - (0.3 + b) / b2).abs() < 1e-15);
        assert_eq!(gls_natural_extension(&g, 0.0, 0.3).unwrap_err(), Error::Boundary(0.0));
    }

    #[test]
    fn step_climbs_when_digit_matches() {
        let g = sys(BetaValue::Golden);
        let p = ExtensionPoint::new(&g, 0.8, 0.5).unwrap();
        let q = natural_extension_step(&g, &p).unwrap();
        assert_eq!(q.level, 1);
        assert!((q.y(&g) - 0.5 / phi()).abs() < 1e-15);
        let r = natural_extension_step(&g, &q).unwrap();
        assert_eq!(r.level, 0);
    }

    #[test]
    fn step_rejects_large_fiber() {
        let g = sys(BetaValue::Golden);
        let mut p = ExtensionPoint::new(&g, 0.3, 0.9).unwrap();
        p.level = 1;
        assert!(matches!(natural_extension_step(&g, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn return_time_is_block_plus_one() {
        for v in [BetaValue::Golden, BetaValue::rational(18, 10), BetaValue::Pi] {
            let s = sys(v);
            for n in 1..=s.available_cells().min(200) {
                let cell = s.cell(n).unwrap();
                for u in [0.0, 0.001, 0.37, 0.999] {
                    let x = s.point_in_cell(n, u).unwrap();
                    assert_eq!(first_return_time(&s, &x).unwrap(), cell.k + 1, "n = {n}");
                }
            }
        }
    }

    #[test]
    fn identity_holds() {
        for v in [BetaValue::Golden, BetaValue::rational(18, 10), BetaValue::Pi] {
            let s = sys(v);
            let r = identity_check(&s, 2000, 11);
            assert!(r.max_deviation < 1e-11, "{}", r.max_deviation);
            assert!(r.samples > 1990);
        }
    }

    #[test]
    fn conjugacy_holds() {
        let r = golden_conjugacy_check(5000, 3).unwrap();
        assert!(r.max_deviation < 1e-12);
        assert!(r.samples > 4990);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn closed_form_matches_iteration(x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let s = BetaSystem::with_depth(BetaValue::rational(27, 10), 256).unwrap();
            let p = ExtensionPoint::new(&s, x, y).unwrap();
            let (q, steps) = induced_by_iteration(&s, &p).unwrap();
            prop_assert_eq!(steps, first_return_time(&s, &p.x).unwrap());
            let (a, b) = induced_map_z0(&s, x, y).unwrap();
            prop_assert!((a - q.x(&s)).abs() < 1e-12);
            prop_assert!((b - q.y(&s)).abs() < 1e-12);
        }

        #[test]
        fn extension_lands_in_the_cell(x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let s = BetaSystem::with_depth(BetaValue::Pi, 256).unwrap();
            let cell = s.locate(x).unwrap();
            let (_, b) = gls_natural_extension(&s, x, y).unwrap();
            prop_assert!(b >= cell.left && b <= cell.right);
            prop_assert!((b - (cell.left + y * cell.length)).abs() < 1e-15);
        }
    }
}
