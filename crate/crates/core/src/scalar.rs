//! Real scalars in two arithmetic modes.
//!
//! [`Rational`] is exact. [`Real`] carries a binary64 mantissa with an
//! unbounded (`i64`) binary exponent: the coefficients produced by the
//! construction overflow the `f64` exponent range after the first stage,
//! while 53 bits of relative precision are still plenty for certificate
//! checks at tolerance `1e-9`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arithmetic mode of a build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    Rational,
    Binary64,
}

impl fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarMode::Rational => f.write_str("rational"),
            ScalarMode::Binary64 => f.write_str("binary64"),
        }
    }
}

/// Relative tolerance used by every binary64 comparison.
pub const BINARY64_RTOL: f64 = 1e-9;

/// Field operations needed by the construction.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: ScalarMode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exactly `2^k`.
    fn pow2(k: i64) -> Self;
    fn abs(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Square root; exact only when the mode allows it.
    fn sqrt(&self) -> Self;
    /// Approximate `log2 |x|`; `-inf` for zero.
    fn log2(&self) -> f64;
    /// Nearest `f64`, saturating to `±inf` outside the `f64` range.
    fn to_f64(&self) -> f64;
    /// Smallest power of two `>= |x|` (`1` for zero).
    fn ceil_pow2(&self) -> Self;
    /// Largest power of two `<= |x|`; `None` for zero.
    fn floor_pow2(&self) -> Option<Self>;
    /// Lossless text encoding for state files.
    fn encode(&self) -> String;
    fn decode(s: &str) -> Result<Self>;

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `lhs >= rhs` under the mode's comparison policy.
    fn ge_tol(lhs: &Self, rhs: &Self) -> bool {
        match Self::MODE {
            ScalarMode::Rational => lhs >= rhs,
            ScalarMode::Binary64 => {
                let scale = lhs.abs().max_of(rhs.abs());
                let slack = lhs.clone() - rhs.clone();
                slack >= -(scale * Self::from_f64_lossy(BINARY64_RTOL))
            }
        }
    }

    /// `lhs > rhs`; in binary64 mode a relative gap of the tolerance is required.
    fn gt_tol(lhs: &Self, rhs: &Self) -> bool {
        match Self::MODE {
            ScalarMode::Rational => lhs > rhs,
            ScalarMode::Binary64 => !Self::ge_tol(rhs, lhs),
        }
    }

    /// `(lhs - rhs) / max(|lhs|, |rhs|)`, in `[-1, 1]`; `0` when both vanish.
    fn relative_margin(lhs: &Self, rhs: &Self) -> f64 {
        let scale = lhs.abs().max_of(rhs.abs());
        if scale.is_zero() {
            return 0.0;
        }
        ((lhs.clone() - rhs.clone()) / scale).to_f64()
    }

    fn from_f64_lossy(v: f64) -> Self;
}

// ---------------------------------------------------------------------------
// Extended-exponent binary64

/// `mant * 2^exp` with `|mant|` in `[0.5, 1)`, or zero.
#[derive(Clone, Copy, Debug)]
pub struct Real {
    mant: f64,
    exp: i64,
}

fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // subnormal
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, raw - 1022)
}

fn ldexp(m: f64, e: i64) -> f64 {
    if m == 0.0 {
        return 0.0;
    }
    if e > 1100 {
        return m.signum() * f64::INFINITY;
    }
    if e < -1200 {
        return 0.0;
    }
    // split to avoid intermediate overflow of powi
    let half = e / 2;
    m * 2f64.powi(half as i32) * 2f64.powi((e - half) as i32)
}

impl Real {
    pub const ZERO: Real = Real { mant: 0.0, exp: 0 };

    pub fn new(v: f64) -> Self {
        assert!(v.is_finite(), "non-finite value {v}");
        let (mant, exp) = frexp(v);
        Real { mant, exp }
    }

    fn from_parts(mant: f64, exp: i64) -> Self {
        if mant == 0.0 {
            return Real::ZERO;
        }
        let (m, e) = frexp(mant);
        Real { mant: m, exp: exp + e }
    }

    pub fn mantissa(&self) -> f64 {
        self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.mant == other.mant && (self.mant == 0.0 || self.exp == other.exp)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let sa = self.mant.partial_cmp(&0.0)?;
        let sb = other.mant.partial_cmp(&0.0)?;
        if sa != sb {
            return Some(sa.cmp(&sb));
        }
        if self.mant == 0.0 {
            return Some(Ordering::Equal);
        }
        let mag = match self.exp.cmp(&other.exp) {
            Ordering::Equal => self.mant.abs().partial_cmp(&other.mant.abs())?,
            o => o,
        };
        Some(if self.mant > 0.0 { mag } else { mag.reverse() })
    }
}

impl Add for Real {
    type Output = Real;
    fn add(self, rhs: Real) -> Real {
        if self.mant == 0.0 {
            return rhs;
        }
        if rhs.mant == 0.0 {
            return self;
        }
        let (big, small) = if self.exp >= rhs.exp { (self, rhs) } else { (rhs, self) };
        let shift = big.exp - small.exp;
        if shift > 60 {
            return big;
        }
        Real::from_parts(big.mant + small.mant * 2f64.powi(-(shift as i32)), big.exp)
    }
}

impl Sub for Real {
    type Output = Real;
    fn sub(self, rhs: Real) -> Real {
        self + (-rhs)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { mant: -self.mant, exp: self.exp }
    }
}

impl Mul for Real {
    type Output = Real;
    fn mul(self, rhs: Real) -> Real {
        Real::from_parts(self.mant * rhs.mant, self.exp + rhs.exp)
    }
}

impl Div for Real {
    type Output = Real;
    fn div(self, rhs: Real) -> Real {
        assert!(rhs.mant != 0.0, "division by zero");
        Real::from_parts(self.mant / rhs.mant, self.exp - rhs.exp)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mant == 0.0 {
            return f.write_str("0");
        }
        if (-1000..1000).contains(&self.exp) {
            let v = ldexp(self.mant, self.exp);
            return if (1e-6..1e16).contains(&v.abs()) { write!(f, "{v}") } else { write!(f, "{v:e}") };
        }
        // m * 2^e = d * 10^k
        let l10 = (self.mant.abs().log2() + self.exp as f64) * std::f64::consts::LOG10_2;
        let k = l10.floor();
        let d = 10f64.powf(l10 - k) * self.mant.signum();
        write!(f, "{d:.6}e{}", k as i64)
    }
}

impl Scalar for Real {
    const MODE: ScalarMode = ScalarMode::Binary64;

    fn zero() -> Self {
        Real::ZERO
    }
    fn one() -> Self {
        Real { mant: 0.5, exp: 1 }
    }
    fn from_i64(v: i64) -> Self {
        Real::new(v as f64)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Real::new(num as f64) / Real::new(den as f64)
    }
    fn pow2(k: i64) -> Self {
        Real { mant: 0.5, exp: k + 1 }
    }
    fn abs(&self) -> Self {
        Real { mant: self.mant.abs(), exp: self.exp }
    }
    fn is_zero(&self) -> bool {
        self.mant == 0.0
    }
    fn sqrt(&self) -> Self {
        assert!(self.mant >= 0.0, "sqrt of negative");
        if self.mant == 0.0 {
            return Real::ZERO;
        }
        let (m, e) = if self.exp % 2 != 0 { (self.mant * 2.0, self.exp - 1) } else { (self.mant, self.exp) };
        Real::from_parts(m.sqrt(), e / 2)
    }
    fn log2(&self) -> f64 {
        if self.mant == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.mant.abs().log2() + self.exp as f64
    }
    fn to_f64(&self) -> f64 {
        ldexp(self.mant, self.exp)
    }
    fn ceil_pow2(&self) -> Self {
        if self.mant == 0.0 {
            return Self::one();
        }
        if self.mant.abs() == 0.5 {
            Real { mant: 0.5, exp: self.exp }
        } else {
            Real { mant: 0.5, exp: self.exp + 1 }
        }
    }
    fn floor_pow2(&self) -> Option<Self> {
        (self.mant != 0.0).then_some(Real { mant: 0.5, exp: self.exp })
    }
    fn encode(&self) -> String {
        if self.mant == 0.0 {
            return "0x0p+0".to_string();
        }
        // mant = 1.f * 2^-1
        let sign = if self.mant < 0.0 { "-" } else { "" };
        let bits = (self.mant.abs() * 2.0).to_bits();
        let frac = bits & ((1u64 << 52) - 1);
        let e = self.exp - 1;
        format!("{sign}0x1.{frac:013x}p{}{e}", if e >= 0 { "+" } else { "" })
    }
    fn decode(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad hex float '{s}'"));
        let (neg, body) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        if body == "0x0p+0" {
            return Ok(Real::ZERO);
        }
        let body = body.strip_prefix("0x1.").ok_or_else(bad)?;
        let (frac, exp) = body.split_once('p').ok_or_else(bad)?;
        let frac = u64::from_str_radix(frac, 16).map_err(|_| bad())?;
        if frac >= 1u64 << 52 {
            return Err(bad());
        }
        let e: i64 = exp.trim_start_matches('+').parse().map_err(|_| bad())?;
        let m = f64::from_bits(frac | (1023u64 << 52)) * 0.5;
        Ok(Real { mant: if neg { -m } else { m }, exp: e + 1 })
    }
    fn from_f64_lossy(v: f64) -> Self {
        Real::new(v)
    }
}

// ---------------------------------------------------------------------------
// Exact rationals

/// Exact rational scalar.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(num: BigInt, den: BigInt) -> Self {
        Rational(BigRational::new(num, den))
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}
impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}
impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}
impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        Rational(self.0 / rhs.0)
    }
}
impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = self.0.numer().bits().max(self.0.denom().bits());
        if bits > 96 {
            write!(f, "{}", rational_to_real(self))
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Rounds a rational to the extended-exponent binary64 type.
pub fn rational_to_real(r: &Rational) -> Real {
    if r.0.is_zero() {
        return Real::ZERO;
    }
    let n = r.0.numer();
    let d = r.0.denom();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    // keep 64 significant bits of each
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let nt = (n.abs() >> ns as usize).to_f64().unwrap_or(0.0);
    let dt = (d >> ds as usize).to_f64().unwrap_or(1.0);
    let v = Real::from_parts(nt / dt, ns - ds);
    if n.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

fn big_pow2(k: u64) -> BigInt {
    BigInt::one() << k as usize
}

impl Scalar for Rational {
    const MODE: ScalarMode = ScalarMode::Rational;

    fn zero() -> Self {
        Rational(BigRational::zero())
    }
    fn one() -> Self {
        Rational(BigRational::one())
    }
    fn from_i64(v: i64) -> Self {
        Rational(BigRational::from_integer(v.into()))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational(BigRational::new(num.into(), den.into()))
    }
    fn pow2(k: i64) -> Self {
        if k >= 0 {
            Rational(BigRational::from_integer(big_pow2(k as u64)))
        } else {
            Rational(BigRational::new(BigInt::one(), big_pow2(k.unsigned_abs())))
        }
    }
    fn abs(&self) -> Self {
        Rational(self.0.abs())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    /// Exact for perfect squares of rationals; otherwise the binary64 root
    /// converted back to a rational.
    fn sqrt(&self) -> Self {
        assert!(!self.0.is_negative(), "sqrt of negative");
        let (n, d) = (self.0.numer(), self.0.denom());
        let (rn, rd) = (n.sqrt(), d.sqrt());
        if &(&rn * &rn) == n && &(&rd * &rd) == d {
            return Rational(BigRational::new(rn, rd));
        }
        let r = rational_to_real(self).sqrt();
        Rational::from_f64_lossy(r.mantissa()) * Rational::pow2(r.exponent())
    }
    fn log2(&self) -> f64 {
        rational_to_real(self).log2()
    }
    fn to_f64(&self) -> f64 {
        rational_to_real(self).to_f64()
    }
    fn ceil_pow2(&self) -> Self {
        if self.0.is_zero() {
            return Self::one();
        }
        let a = self.abs();
        let mut k = a.0.numer().bits() as i64 - a.0.denom().bits() as i64;
        // 2^(k-1) < a <= 2^(k+1) holds for this estimate; refine.
        while Rational::pow2(k) < a {
            k += 1;
        }
        while Rational::pow2(k - 1) >= a {
            k -= 1;
        }
        Rational::pow2(k)
    }
    fn floor_pow2(&self) -> Option<Self> {
        if self.0.is_zero() {
            return None;
        }
        let a = self.abs();
        let mut k = a.0.numer().bits() as i64 - a.0.denom().bits() as i64;
        while Rational::pow2(k) > a {
            k -= 1;
        }
        while Rational::pow2(k + 1) <= a {
            k += 1;
        }
        Some(Rational::pow2(k))
    }
    fn encode(&self) -> String {
        if self.0.is_integer() {
            self.0.numer().to_string()
        } else {
            format!("{}/{}", self.0.numer(), self.0.denom())
        }
    }
    fn decode(s: &str) -> Result<Self> {
        parse_rational(s)
    }
    fn from_f64_lossy(v: f64) -> Self {
        Rational(BigRational::from_float(v).expect("finite value"))
    }
}

/// Parses `a`, `a/b` or a decimal `a.b` literal exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad rational literal '{s}'"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational(BigRational::new(n, d)));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = BigInt::from(10u32).pow(frac.len() as u32);
        let r = BigRational::new(if neg { -n } else { n }, d);
        return Ok(Rational(r));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational(BigRational::from_integer(n)))
}

/// Converts an exact literal into any scalar mode.
pub fn from_rational<S: Scalar>(r: &Rational) -> S {
    match S::MODE {
        ScalarMode::Rational => S::decode(&r.encode()).expect("rational round trip"),
        ScalarMode::Binary64 => {
            let v = rational_to_real(r);
            S::from_f64_lossy(v.mantissa()) * S::pow2(v.exponent())
        }
    }
}
