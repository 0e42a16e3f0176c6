use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::hp;
use crate::{Error, Result};

/// Default number of digits of 1 computed up front.
pub const DEFAULT_DEPTH: usize = 1024;

/// A value of `β > 1`. Decimal strings are read exactly as rationals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum BetaValue {
    Golden,
    Pi,
    Rational { num: BigInt, den: BigInt },
}

impl BetaValue {
    pub fn rational(num: i64, den: i64) -> Self {
        BetaValue::Rational { num: num.into(), den: den.into() }
    }

    fn to_hp(&self, prec: u32) -> BigInt {
        match self {
            BetaValue::Golden => hp::golden(prec),
            BetaValue::Pi => hp::pi(prec),
            BetaValue::Rational { num, den } => hp::from_ratio(num, den, prec),
        }
    }

    pub fn approx(&self) -> f64 {
        match self {
            BetaValue::Golden => (1.0 + 5f64.sqrt()) / 2.0,
            BetaValue::Pi => std::f64::consts::PI,
            BetaValue::Rational { num, den } => hp::to_f64(&hp::from_ratio(num, den, 128), 128),
        }
    }
}

impl fmt::Display for BetaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaValue::Golden => write!(f, "golden"),
            BetaValue::Pi => write!(f, "pi"),
            BetaValue::Rational { num, den } => write!(f, "{num}/{den}"),
        }
    }
}

impl From<BetaValue> for String {
    fn from(v: BetaValue) -> String {
        v.to_string()
    }
}

impl TryFrom<String> for BetaValue {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for BetaValue {
    type Err = Error;

    /// Accepts `golden`/`phi`, `pi`, `p/q`, and decimal or exponent
    /// notation such as `1.8` or `2.5e0`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let bad = || Error::InvalidParameter(format!("cannot read beta value {s:?}"));
        let v = match t.as_str() {
            "golden" | "phi" | "φ" => BetaValue::Golden,
            "pi" | "π" => BetaValue::Pi,
            _ => {
                if let Some((p, q)) = t.split_once('/') {
                    let num: BigInt = p.trim().parse().map_err(|_| bad())?;
                    let den: BigInt = q.trim().parse().map_err(|_| bad())?;
                    if den.is_zero() {
                        return Err(bad());
                    }
                    BetaValue::Rational { num, den }
                } else {
                    let (mantissa, exp) = match t.split_once('e') {
                        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
                        None => (t.as_str(), 0),
                    };
                    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
                    if int_part.is_empty() && frac_part.is_empty() {
                        return Err(bad());
                    }
                    let digits = format!("{int_part}{frac_part}");
                    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
                    let mut den = BigInt::from(10).pow(frac_part.len() as u32);
                    if exp >= 0 {
                        num *= BigInt::from(10).pow(exp as u32);
                    } else {
                        den *= BigInt::from(10).pow((-exp) as u32);
                    }
                    BetaValue::Rational { num, den }
                }
            }
        };
        if !(v.approx() > 1.0) {
            return Err(Error::InvalidParameter(format!("beta must exceed 1, got {s}")));
        }
        if let BetaValue::Rational { num, den } = &v {
            if num <= den {
                return Err(Error::InvalidParameter(format!("beta must exceed 1, got {s}")));
            }
        }
        Ok(v)
    }
}

/// `x ↦ βx mod 1` in double precision.
pub fn t_beta(beta: f64, x: f64) -> f64 {
    let y = beta * x;
    y - y.floor()
}

/// A cell `I_n = [left, left + β^{-(k+1)})` of the GLS partition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlsCell {
    pub n: usize,
    pub k: usize,
    pub i: usize,
    pub left: f64,
    pub right: f64,
    pub length: f64,
}

impl GlsCell {
    /// Expansion factor of the cell's affine branch, `β^{k+1}`.
    pub fn slope(&self) -> f64 {
        1.0 / self.length
    }
}

/// β together with its expansion of 1 and the fixed-point data needed to
/// follow deep cells exactly.
#[derive(Clone, Debug)]
pub struct BetaSystem {
    value: BetaValue,
    beta: f64,
    prec: u32,
    beta_hp: BigInt,
    digits_of_one: Vec<u32>,
    finite: bool,
    quasi_greedy: Vec<u32>,
    /// `β^{-j}` for `j = 0..=depth+1`.
    inv_pow: Vec<BigInt>,
    /// `Σ_{j≤k} b_j β^{-j}` for `k = 0..=depth`.
    prefix: Vec<BigInt>,
    /// Cells before block `k`: `b_1 + … + b_k`.
    cumulative: Vec<usize>,
}

/// A fixed-point real at the precision of a [`BetaSystem`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HpReal(pub(crate) BigInt);

impl BetaSystem {
    pub fn new(value: BetaValue) -> Result<Self> {
        Self::with_depth(value, DEFAULT_DEPTH)
    }

    /// Compute `depth` digits of 1; precision is chosen so that cells of
    /// every block up to `depth` are resolved with 128 spare bits.
    pub fn with_depth(value: BetaValue, depth: usize) -> Result<Self> {
        let beta = value.approx();
        if !(beta > 1.0) {
            return Err(Error::InvalidParameter("beta must exceed 1".into()));
        }
        let prec = (192.0 + beta.log2() * (depth + 80) as f64).ceil() as u32;
        let beta_hp = value.to_hp(prec);
        let one = hp::one(prec);
        let snap = BigInt::from(1) << (prec / 2) as usize;

        let mut digits = Vec::new();
        let mut t = one.clone();
        let mut finite = false;
        for _ in 0..depth {
            let bt = hp::mul(&beta_hp, &t, prec);
            if hp::dist_to_integer(&bt, prec) < snap {
                let d = hp::floor(&(bt + (&one >> 1usize)), prec);
                digits.push(d.to_u32().unwrap());
                finite = true;
                break;
            }
            let d = hp::floor(&bt, prec);
            t = bt - (&d << prec as usize);
            digits.push(d.to_u32().unwrap());
        }
        let quasi_greedy = if finite {
            let mut period = digits.clone();
            *period.last_mut().unwrap() -= 1;
            period.iter().copied().cycle().take(depth.max(period.len())).collect()
        } else {
            digits.clone()
        };

        let mut inv_pow = vec![one.clone()];
        // fiber strings outgrow short expansions of 1
        let powers = depth.max(super::tower::fiber_depth(beta) + 64) + 1;
        for j in 1..=powers {
            let next = hp::div(&inv_pow[j - 1], &beta_hp, prec);
            inv_pow.push(next);
        }
        let mut prefix = vec![BigInt::zero()];
        let mut cumulative = vec![0usize];
        for (j, &b) in digits.iter().enumerate() {
            prefix.push(&prefix[j] + &inv_pow[j + 1] * b);
            cumulative.push(cumulative[j] + b as usize);
        }
        Ok(Self {
            value,
            beta,
            prec,
            beta_hp,
            digits_of_one: digits,
            finite,
            quasi_greedy,
            inv_pow,
            prefix,
            cumulative,
        })
    }

    pub fn value(&self) -> &BetaValue {
        &self.value
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn precision_bits(&self) -> u32 {
        self.prec
    }

    /// `b_1 b_2 …` (all of them when finite).
    pub fn digits_of_one(&self) -> &[u32] {
        &self.digits_of_one
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    /// The quasi-greedy expansion of 1, truncated to the computed depth.
    pub fn quasi_greedy(&self) -> &[u32] {
        &self.quasi_greedy
    }

    pub fn max_digit(&self) -> u32 {
        self.digits_of_one[0]
    }

    pub fn hp(&self, x: f64) -> HpReal {
        HpReal(hp::from_f64(x, self.prec))
    }

    pub fn to_f64(&self, x: &HpReal) -> f64 {
        hp::to_f64(&x.0, self.prec)
    }

    pub(crate) fn beta_hp(&self) -> &BigInt {
        &self.beta_hp
    }

    pub(crate) fn inv_pow(&self, j: usize) -> &BigInt {
        &self.inv_pow[j]
    }

    pub(crate) fn inv_pow_len(&self) -> usize {
        self.inv_pow.len()
    }

    pub(crate) fn prefix_sum(&self, k: usize) -> &BigInt {
        &self.prefix[k]
    }

    pub(crate) fn depth(&self) -> usize {
        self.digits_of_one.len()
    }

    /// `(⌊βx⌋, βx mod 1)` in fixed point.
    pub(crate) fn step_hp(&self, x: &BigInt) -> (u32, BigInt) {
        let bx = hp::mul(&self.beta_hp, x, self.prec);
        let d = hp::floor(&bx, self.prec);
        let rest = bx - (&d << self.prec as usize);
        (d.to_u32().unwrap_or(u32::MAX), rest)
    }

    /// First `k` greedy digits `d_j = ⌊β T^{j-1} x⌋` of `x ∈ [0, 1)`,
    /// computed exactly from the binary value of `x`.
    pub fn digits(&self, x: f64, k: usize) -> Result<Vec<u32>> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain(format!("{x} is outside [0, 1)")));
        }
        Ok(self.digits_hp(&self.hp(x), k))
    }

    pub fn digits_hp(&self, x: &HpReal, k: usize) -> Vec<u32> {
        let mut t = x.0.clone();
        (0..k)
            .map(|_| {
                let (d, rest) = self.step_hp(&t);
                t = rest;
                d
            })
            .collect()
    }

    /// `Σ d_j β^{-j}`.
    pub fn reconstruct(&self, digits: &[u32]) -> f64 {
        let v: BigInt = digits.iter().enumerate().map(|(j, &d)| self.inv_pow_ext(j + 1) * d).sum();
        hp::to_f64(&v, self.prec)
    }

    /// Parry criterion: every suffix is lexicographically at most the
    /// quasi-greedy expansion of 1 over the same length.
    pub fn is_admissible(&self, word: &[u32]) -> bool {
        if word.iter().any(|&d| d > self.max_digit()) {
            return false;
        }
        (0..word.len()).all(|j| {
            let tail = &word[j..];
            let reference = self.quasi_greedy.iter().copied().chain(std::iter::repeat(0));
            for (a, b) in tail.iter().zip(reference) {
                if *a != b {
                    return *a < b;
                }
            }
            true
        })
    }

    /// Number of cells with `k(n) < depth`, or the total when the
    /// expansion of 1 is finite.
    pub fn available_cells(&self) -> usize {
        *self.cumulative.last().unwrap()
    }

    /// `(k, i)` with `n = b_1 + … + b_k + i` and `1 ≤ i ≤ b_{k+1}`.
    pub fn cell_index(&self, n: usize) -> Result<(usize, usize)> {
        if n == 0 {
            return Err(Error::InvalidParameter("cells are numbered from 1".into()));
        }
        if n > self.available_cells() {
            return Err(if self.finite {
                Error::InvalidParameter(format!("the partition has only {} cells", self.available_cells()))
            } else {
                Error::DigitBudget(format!("cell {n} needs more than {} digits of 1", self.depth()))
            });
        }
        // first k with cumulative[k + 1] >= n
        let k = self.cumulative.partition_point(|&c| c < n) - 1;
        Ok((k, n - self.cumulative[k]))
    }

    pub(crate) fn cell_left_hp(&self, k: usize, i: usize) -> BigInt {
        &self.prefix[k] + &self.inv_pow[k + 1] * (i as u32 - 1)
    }

    pub fn cell(&self, n: usize) -> Result<GlsCell> {
        let (k, i) = self.cell_index(n)?;
        let left = self.cell_left_hp(k, i);
        let length = &self.inv_pow[k + 1];
        let right = &left + length;
        Ok(GlsCell {
            n,
            k,
            i,
            left: hp::to_f64(&left, self.prec),
            right: hp::to_f64(&right, self.prec),
            length: hp::to_f64(length, self.prec),
        })
    }

    pub fn cells(&self, count: usize) -> Result<Vec<GlsCell>> {
        (1..=count).map(|n| self.cell(n)).collect()
    }

    /// The cell containing `x`: its greedy digits follow `b_1 … b_k` and
    /// then drop below `b_{k+1}`.
    pub fn locate_hp(&self, x: &HpReal) -> Result<(usize, usize, usize)> {
        if hp::is_negative(&x.0) || x.0 >= hp::one(self.prec) {
            return Err(Error::Domain("point outside [0, 1)".into()));
        }
        let mut t = x.0.clone();
        for (k, &b) in self.digits_of_one.iter().enumerate() {
            let (d, rest) = self.step_hp(&t);
            if d < b {
                let i = d as usize + 1;
                return Ok((self.cumulative[k] + i, k, i));
            }
            if d > b {
                return Err(Error::Domain("digits exceed the expansion of 1".into()));
            }
            t = rest;
        }
        Err(Error::DigitBudget(format!("point follows the first {} digits of 1", self.depth())))
    }

    pub fn locate(&self, x: f64) -> Result<GlsCell> {
        let (n, _, _) = self.locate_hp(&self.hp(x))?;
        self.cell(n)
    }

    /// A point of `I_n` at relative position `u ∈ [0, 1)`, moved inward by
    /// 2^32 units of the working precision so that `u = 0` stays in the
    /// cell despite the rounded-down left endpoint.
    pub fn point_in_cell(&self, n: usize, u: f64) -> Result<HpReal> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::InvalidParameter(format!("relative position {u} not in [0, 1)")));
        }
        let (k, i) = self.cell_index(n)?;
        let left = self.cell_left_hp(k, i);
        let guard = BigInt::from(1) << 32usize;
        Ok(HpReal(left + hp::mul(&self.inv_pow[k + 1], &hp::from_f64(u, self.prec), self.prec) + guard))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn phi() -> f64 {
        (1.0 + 5f64.sqrt()) / 2.0
    }

    #[test]
    fn parsing() {
        assert_eq!("golden".parse::<BetaValue>().unwrap(), BetaValue::Golden);
        assert_eq!("1.8".parse::<BetaValue>().unwrap(), BetaValue::rational(18, 10));
        assert_eq!("5/2".parse::<BetaValue>().unwrap(), BetaValue::rational(5, 2));
        assert_eq!("25e-1".parse::<BetaValue>().unwrap(), BetaValue::rational(25, 10));
        assert!("0.9".parse::<BetaValue>().is_err());
        assert!("1".parse::<BetaValue>().is_err());
        assert!("abc".parse::<BetaValue>().is_err());
    }

    #[test]
    fn t_beta_examples() {
        assert_eq!(t_beta(phi(), 0.0), 0.0);
        assert!(t_beta(phi(), 1.0 / phi()).min(1.0 - t_beta(phi(), 1.0 / phi())) < 1e-15);
        assert_eq!(t_beta(2.5, 0.5), 0.25);
    }

    #[test]
    fn expansions_of_one() {
        let g = BetaSystem::new(BetaValue::Golden).unwrap();
        assert_eq!(g.digits_of_one(), &[1, 1]);
        assert!(g.is_finite());
        let two = BetaSystem::new(BetaValue::rational(2, 1)).unwrap();
        assert_eq!(two.digits_of_one(), &[2]);
        assert!(two.is_finite());
        let pi = BetaSystem::new(BetaValue::Pi).unwrap();
        assert_eq!(pi.digits_of_one()[0], 3);
        assert!(!pi.is_finite());
        assert_eq!(pi.digits_of_one().len(), DEFAULT_DEPTH);
        // b_2 = ⌊π(π - 3)⌋ = 0
        assert_eq!(pi.digits_of_one()[1], 0);
    }

    #[test]
    fn expansion_of_one_reconstructs_one() {
        for v in [BetaValue::Golden, BetaValue::Pi, BetaValue::rational(18, 10), BetaValue::rational(27, 10)] {
            let s = BetaSystem::with_depth(v, 200).unwrap();
            let sum = s.reconstruct(s.digits_of_one());
            assert!((sum - 1.0).abs() < 1e-15);
            assert!(sum <= 1.0);
        }
    }

    #[test]
    fn golden_admissibility() {
        let g = BetaSystem::new(BetaValue::Golden).unwrap();
        assert!(!g.is_admissible(&[1, 1]));
        assert!(g.is_admissible(&[0; 20]));
        assert!(g.is_admissible(&[1, 0, 1, 0, 0, 1]));
        assert!(!g.is_admissible(&[1, 0, 1, 1]));
        assert!(!g.is_admissible(&[2]));
    }

    #[test]
    fn golden_cells() {
        let g = BetaSystem::new(BetaValue::Golden).unwrap();
        assert_eq!(g.available_cells(), 2);
        let c = g.cells(2).unwrap();
        assert_eq!((c[0].left, c[0].k, c[0].i), (0.0, 0, 1));
        assert!((c[0].right - 1.0 / phi()).abs() < 1e-15);
        assert!((c[1].left - 1.0 / phi()).abs() < 1e-15);
        assert!((c[1].right - 1.0).abs() < 1e-15);
        assert_eq!((c[1].k, c[1].i), (1, 1));
        assert!(g.cell(3).is_err());
    }

    #[test]
    fn cell_lengths_sum_to_one() {
        for v in [BetaValue::Pi, BetaValue::rational(18, 10), BetaValue::rational(27, 10)] {
            let s = BetaSystem::new(v).unwrap();
            let cells = s.cells(s.available_cells().min(4000)).unwrap();
            let total: f64 = cells.iter().map(|c| c.length).sum();
            assert!((1.0 - total).abs() < 1e-12, "{total}");
            for w in cells.windows(2) {
                if w[0].k == w[1].k {
                    assert!((w[0].right - w[1].left).abs() < 1e-14);
                }
                assert!(w[0].right <= w[1].left + 1e-15);
            }
        }
    }

    #[test]
    fn locate_matches_cells() {
        let s = BetaSystem::new(BetaValue::rational(18, 10)).unwrap();
        for n in 1..=200 {
            for u in [0.0, 0.1, 0.5, 0.9] {
                let x = s.point_in_cell(n, u).unwrap();
                assert_eq!(s.locate_hp(&x).unwrap().0, n);
            }
        }
    }

    #[test]
    fn relative_position_must_be_in_unit_interval() {
        let s = BetaSystem::new(BetaValue::Golden).unwrap();
        assert!(s.point_in_cell(1, 1.0).is_err());
        assert!(s.point_in_cell(1, -0.1).is_err());
    }

    #[test]
    fn digit_budget() {
        let s = BetaSystem::with_depth(BetaValue::Pi, 10).unwrap();
        let n = s.available_cells();
        assert!(s.cell(n).is_ok());
        assert!(matches!(s.cell(n + 1), Err(Error::DigitBudget(_))));
    }

    #[test]
    fn exhaustive_golden_words_are_realised() {
        let g = BetaSystem::new(BetaValue::Golden).unwrap();
        for len in 1..=12usize {
            for code in 0..(1u32 << len) {
                let w: Vec<u32> = (0..len).map(|j| (code >> (len - 1 - j)) & 1).collect();
                if !g.is_admissible(&w) {
                    continue;
                }
                // left end of the cylinder plus a small offset inside [w 0 0 0]
                let x: BigInt = w.iter().enumerate().map(|(j, &d)| g.inv_pow(j + 1) * d).sum::<BigInt>()
                    + (g.inv_pow(len + 3) >> 1usize);
                assert_eq!(g.digits_hp(&HpReal(x), len), w);
            }
        }
    }

    proptest! {
        #[test]
        fn digit_reconstruction(x in 0.0f64..1.0, k in 1usize..48) {
            for v in [BetaValue::Golden, BetaValue::rational(18, 10), BetaValue::Pi] {
                let s = BetaSystem::with_depth(v, 64).unwrap();
                let d = s.digits(x, k).unwrap();
                prop_assert!(s.is_admissible(&d));
                let sum: BigInt = d.iter().enumerate().map(|(j, &c)| s.inv_pow(j + 1) * c).sum();
                let err = s.hp(x).0 - sum;
                prop_assert!(err >= BigInt::zero() && &err < s.inv_pow(k));
            }
        }

        #[test]
        fn golden_digits_avoid_one_one(x in 0.0f64..1.0) {
            let g = BetaSystem::with_depth(BetaValue::Golden, 64).unwrap();
            let d = g.digits(x, 60).unwrap();
            prop_assert!(!d.windows(2).any(|w| w == [1, 1]));
        }
    }

    #[test]
    fn random_points_locate_consistently() {
        let s = BetaSystem::new(BetaValue::Pi).unwrap();
        let mut rng = crate::numeric::task_rng(7, 0);
        for _ in 0..1000 {
            let x: f64 = rng.gen();
            let c = s.locate(x).unwrap();
            assert!(c.left <= x && x < c.right + 1e-16);
        }
    }
}
