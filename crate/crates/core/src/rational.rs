//! Exact rationals, certified logarithm brackets and symbolic log-ratios.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qu(n: u64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `p/q` or a bare integer. Floats are rejected on purpose.
pub fn parse_rational(s: &str) -> LabResult<Q> {
    let s = s.trim();
    let bad = || LabError::Usage(format!("not a rational p/q: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // scale both down to keep the quotient representable
            let shift = x.denom().bits().max(x.numer().bits()).saturating_sub(900);
            let n = (x.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (x.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

pub fn floor_q(x: &Q) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// Numerator/denominator pair as decimal strings, the wire form of every
/// exact rational in reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatPair(pub String, pub String);

impl From<&Q> for RatPair {
    fn from(x: &Q) -> Self {
        RatPair(x.numer().to_string(), x.denom().to_string())
    }
}

impl RatPair {
    pub fn to_q(&self) -> LabResult<Q> {
        parse_rational(&format!("{}/{}", self.0, self.1))
    }
}

/// `#[serde(with = "serde_q")]` for a single exact rational.
pub mod serde_q {
    use super::*;

    pub fn serialize<S: serde::Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        RatPair::from(x).serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        use serde::de::Error;
        RatPair::deserialize(d)?.to_q().map_err(D::Error::custom)
    }
}

/// `#[serde(with = "serde_q_vec")]` for a list of exact rationals.
pub mod serde_q_vec {
    use super::*;

    pub fn serialize<S: serde::Serializer>(x: &[Q], s: S) -> Result<S::Ok, S::Error> {
        x.iter().map(RatPair::from).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        use serde::de::Error;
        Vec::<RatPair>::deserialize(d)?
            .iter()
            .map(|p| p.to_q().map_err(D::Error::custom))
            .collect()
    }
}

/// Rational interval `[lo, hi]` certified to contain some real number.
#[derive(Clone, Debug, PartialEq)]
pub struct Bracket {
    pub lo: Q,
    pub hi: Q,
}

impl Bracket {
    pub fn mid_f64(&self) -> f64 {
        (to_f64(&self.lo) + to_f64(&self.hi)) / 2.0
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }
}

/// Certified bracket for `ln(x)` with rational `x > 0`, width about `2^-bits`.
///
/// Uses `ln x = 2 atanh((x-1)/(x+1))` after reducing `x` into `[1/2, 2]`
/// by powers of two; `ln 2` itself comes from the same series at `x = 2`.
pub fn ln_bracket(x: &Q, bits: u32) -> Bracket {
    assert!(x.is_positive(), "ln of nonpositive value");
    let two = qi(2);
    let mut y = x.clone();
    let mut k: i64 = 0;
    while y > two {
        y /= &two;
        k += 1;
    }
    let half = q(1, 2);
    while y < half {
        y *= &two;
        k -= 1;
    }
    let base = atanh_series(&y, bits + 8);
    if k == 0 {
        return base;
    }
    let ln2 = atanh_series(&two, bits + 8 + 64);
    let kq = qi(k);
    let (a, b) = (&ln2.lo * &kq, &ln2.hi * &kq);
    let (lo2, hi2) = if k > 0 { (a, b) } else { (b, a) };
    Bracket {
        lo: base.lo + lo2,
        hi: base.hi + hi2,
    }
}

fn atanh_series(x: &Q, bits: u32) -> Bracket {
    // t = (x-1)/(x+1), |t| <= 1/3 for x in [1/2, 2]
    let t = (x - Q::one()) / (x + Q::one());
    if t.is_zero() {
        return Bracket {
            lo: Q::zero(),
            hi: Q::zero(),
        };
    }
    let neg = t.is_negative();
    let t = t.abs();
    let t2 = &t * &t;
    let scale = BigInt::one() << (bits as usize + 16);
    let scale_q = Q::from_integer(scale.clone());
    // fixed point with directed rounding
    let mut lo_sum = BigInt::zero();
    let mut hi_sum = BigInt::zero();
    let mut pow = t.clone();
    let mut n: u64 = 0;
    let eps = Q::new(BigInt::one(), BigInt::one() << (bits as usize + 4));
    loop {
        let term = &pow / qu(2 * n + 1);
        let scaled = &term * &scale_q;
        let fl = floor_q(&scaled);
        let ce = if Q::from_integer(fl.clone()) == scaled {
            fl.clone()
        } else {
            &fl + 1
        };
        lo_sum += fl;
        hi_sum += ce;
        pow = &pow * &t2;
        n += 1;
        // tail bound: sum_{i>=n} t^(2i+1)/(2i+1) <= t^(2n+1) / ((2n+1)(1-t^2))
        let tail = &pow / (qu(2 * n + 1) * (Q::one() - &t2));
        if tail < eps {
            let lo = Q::new(lo_sum * 2, scale.clone());
            let hi = Q::new((hi_sum + 1) * 2, scale.clone()) + tail * qi(2);
            return if neg {
                Bracket { lo: -hi, hi: -lo }
            } else {
                Bracket { lo, hi }
            };
        }
    }
}

/// `ln(q)` for a positive integer.
pub fn ln_int(n: u64, bits: u32) -> Bracket {
    ln_bracket(&qu(n), bits)
}

/// Product of prime-power-like factors `prod base^exp`, kept unexpanded so
/// that astronomically large pattern counts stay cheap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogCount {
    pub factors: Vec<(u64, u64)>,
}

impl LogCount {
    pub fn count(n: u64) -> Self {
        LogCount {
            factors: vec![(n, 1)],
        }
    }

    pub fn power(base: u64, exp: u64) -> Self {
        LogCount {
            factors: vec![(base, exp)],
        }
    }

    pub fn ln(&self) -> f64 {
        self.factors
            .iter()
            .map(|&(b, e)| (b as f64).ln() * e as f64)
            .sum()
    }

    /// Exact value; only call on modest counts.
    pub fn value(&self) -> BigUint {
        let mut v = BigUint::one();
        for &(b, e) in &self.factors {
            v *= num_traits::pow(BigUint::from(b), e as usize);
        }
        v
    }
}

/// `ln(count) / area`: the per-site entropy of a pattern count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRatio {
    pub count: LogCount,
    pub area: u64,
    /// whether `count` is exact (true) or a sampled lower bound (false)
    pub exact: bool,
}

impl LogRatio {
    pub fn nats(&self) -> f64 {
        if self.area == 0 {
            return 0.0;
        }
        self.count.ln() / self.area as f64
    }
}

pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
