//! Binary fixed-point reals: a value `v` is stored as the integer
//! `floor(v · 2^prec)`.

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact conversion of a finite `f64` (every float is dyadic).
pub fn from_f64(x: f64, prec: u32) -> BigInt {
    if x == 0.0 {
        return BigInt::zero();
    }
    let bits = x.to_bits();
    let sign = if x < 0.0 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    let m = BigInt::from(mant) * sign;
    let shift = e + prec as i64;
    if shift >= 0 {
        m << shift as usize
    } else {
        m >> (-shift) as usize
    }
}

/// Nearest-ish `f64` (truncation of the low bits, then one rounding).
pub fn to_f64(v: &BigInt, prec: u32) -> f64 {
    let bits = v.bits() as i64;
    if bits <= 63 {
        return scale(v.to_i64().unwrap() as f64, -(prec as i64));
    }
    let drop = bits - 63;
    let top = (v >> drop as usize).to_i64().unwrap() as f64;
    scale(top, drop - prec as i64)
}

/// `x · 2^e` without intermediate overflow or underflow of the factor.
fn scale(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

pub fn from_ratio(p: &BigInt, q: &BigInt, prec: u32) -> BigInt {
    (p << prec as usize) / q
}

pub fn one(prec: u32) -> BigInt {
    BigInt::one() << prec as usize
}

pub fn mul(a: &BigInt, b: &BigInt, prec: u32) -> BigInt {
    (a * b) >> prec as usize
}

pub fn div(a: &BigInt, b: &BigInt, prec: u32) -> BigInt {
    (a << prec as usize) / b
}

pub fn floor(a: &BigInt, prec: u32) -> BigInt {
    a >> prec as usize
}

/// Distance from `a` to the nearest integer, in fixed point.
pub fn dist_to_integer(a: &BigInt, prec: u32) -> BigInt {
    let f = a - (floor(a, prec) << prec as usize);
    let o = one(prec);
    let g = &o - &f;
    if f < g {
        f
    } else {
        g
    }
}

pub fn abs(a: &BigInt) -> BigInt {
    a.abs()
}

pub fn is_negative(a: &BigInt) -> bool {
    a.sign() == Sign::Minus
}

pub fn golden(prec: u32) -> BigInt {
    let root5 = (BigInt::from(5) << (2 * prec as usize)).sqrt();
    (one(prec) + root5) >> 1usize
}

fn arctan_inv(n: u64, prec: u32) -> BigInt {
    let x = one(prec) / BigInt::from(n);
    let n2 = BigInt::from(n * n);
    let mut power = x.clone();
    let mut sum = x;
    let mut k = 1u64;
    loop {
        power /= &n2;
        if power.is_zero() {
            return sum;
        }
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
}

/// `π = 16 arctan(1/5) - 4 arctan(1/239)` with 32 guard bits.
pub fn pi(prec: u32) -> BigInt {
    let p = prec + 32;
    let v = arctan_inv(5, p) * 16 - arctan_inv(239, p) * 4;
    v >> 32usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.0, 1.0, 0.1, 1e-300, 3.75, -2.5, 0.999999999] {
            assert_eq!(to_f64(&from_f64(x, 2000), 2000), x);
        }
    }

    #[test]
    fn constants() {
        assert_eq!(to_f64(&pi(300), 300), std::f64::consts::PI);
        assert_eq!(to_f64(&golden(300), 300), (1.0 + 5f64.sqrt()) / 2.0);
        // φ² = φ + 1 to the working precision
        let g = golden(400);
        let diff = mul(&g, &g, 400) - &g - one(400);
        assert!(diff.abs() < BigInt::from(4));
    }

    #[test]
    fn floor_and_distance() {
        let x = from_f64(2.75, 64);
        assert_eq!(floor(&x, 64), BigInt::from(2));
        assert_eq!(to_f64(&dist_to_integer(&x, 64), 64), 0.25);
    }
}
