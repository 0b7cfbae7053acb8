//! Binary fixed-point reals and phases modulo one.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;

use crate::error::{Error, Result};

/// Default number of fractional bits.
pub const DEFAULT_FRAC_BITS: u32 = 128;

/// Smallest admissible number of fractional bits.
pub const MIN_FRAC_BITS: u32 = 96;

/// A real number `mantissa / 2^frac_bits` with an unbounded integer part.
///
/// All constructors round toward negative infinity, so `floor` and `frac`
/// of a `FixedReal` are exact statements about the stored value.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FixedReal {
    mantissa: BigInt,
    frac_bits: u32,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits
}

fn check_bits(frac_bits: u32) -> Result<()> {
    if frac_bits < MIN_FRAC_BITS {
        return Err(Error::arg(format!(
            "fixed-point precision {frac_bits} bits is below the minimum {MIN_FRAC_BITS}"
        )));
    }
    Ok(())
}

impl FixedReal {
    pub fn zero(frac_bits: u32) -> Self {
        FixedReal {
            mantissa: BigInt::zero(),
            frac_bits,
        }
    }

    /// Wraps a raw mantissa; the value is `mantissa / 2^frac_bits`.
    pub fn from_mantissa(mantissa: BigInt, frac_bits: u32) -> Result<Self> {
        check_bits(frac_bits)?;
        Ok(FixedReal {
            mantissa,
            frac_bits,
        })
    }

    pub fn from_int(value: impl Into<BigInt>, frac_bits: u32) -> Self {
        FixedReal {
            mantissa: value.into() << frac_bits,
            frac_bits,
        }
    }

    /// `floor(num / den * 2^frac_bits) / 2^frac_bits`.
    pub fn from_ratio(num: &BigInt, den: &BigInt, frac_bits: u32) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::arg("zero denominator"));
        }
        let scaled: BigInt = num << frac_bits;
        Ok(FixedReal {
            mantissa: scaled.div_floor(den),
            frac_bits,
        })
    }

    /// Exact conversion of a finite double, truncated toward negative
    /// infinity when the double carries more fractional bits.
    pub fn from_f64(x: f64, frac_bits: u32) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::arg(format!("non-finite value {x}")));
        }
        if x == 0.0 {
            return Ok(Self::zero(frac_bits));
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let exp_field = ((bits >> 52) & 0x7ff) as i64;
        let frac_field = bits & ((1u64 << 52) - 1);
        let (significand, exponent) = if exp_field == 0 {
            (frac_field, -1074i64)
        } else {
            (frac_field | (1u64 << 52), exp_field - 1075)
        };
        let mut m = BigInt::from(significand);
        if negative {
            m = -m;
        }
        let shift = exponent + frac_bits as i64;
        let mantissa = if shift >= 0 {
            m << shift as usize
        } else {
            m.div_floor(&pow2((-shift) as u32))
        };
        Ok(FixedReal {
            mantissa,
            frac_bits,
        })
    }

    /// A uniformly random value in `[0, 1)` with every fractional bit drawn.
    pub fn random_unit<R: RngCore + ?Sized>(rng: &mut R, frac_bits: u32) -> Self {
        let words = frac_bits.div_ceil(32) as usize;
        let mut digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
        let spare = words as u32 * 32 - frac_bits;
        if spare > 0 {
            let last = digits.last_mut().expect("at least one word");
            *last >>= spare;
        }
        FixedReal {
            mantissa: BigInt::from_slice(Sign::Plus, &digits),
            frac_bits,
        }
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    /// Re-expresses the value with a different number of fractional bits,
    /// exactly when widening and by truncation toward negative infinity
    /// when narrowing.
    pub fn with_frac_bits(&self, frac_bits: u32) -> Self {
        let mantissa = match frac_bits.cmp(&self.frac_bits) {
            Ordering::Equal => self.mantissa.clone(),
            Ordering::Greater => &self.mantissa << (frac_bits - self.frac_bits),
            Ordering::Less => self.mantissa.div_floor(&pow2(self.frac_bits - frac_bits)),
        };
        FixedReal {
            mantissa,
            frac_bits,
        }
    }

    fn aligned(&self, other: &FixedReal) -> (BigInt, BigInt, u32) {
        let bits = self.frac_bits.max(other.frac_bits);
        (
            self.with_frac_bits(bits).mantissa,
            other.with_frac_bits(bits).mantissa,
            bits,
        )
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn abs(&self) -> Self {
        FixedReal {
            mantissa: self.mantissa.abs(),
            frac_bits: self.frac_bits,
        }
    }

    pub fn floor(&self) -> BigInt {
        self.mantissa.div_floor(&pow2(self.frac_bits))
    }

    /// Smallest integer that is not below the value.
    pub fn ceil(&self) -> BigInt {
        let f = self.floor();
        if self.is_integer() {
            f
        } else {
            f + 1
        }
    }

    pub fn is_integer(&self) -> bool {
        self.frac_mantissa().is_zero()
    }

    /// Fractional mantissa in `[0, 2^frac_bits)`.
    fn frac_mantissa(&self) -> BigInt {
        self.mantissa.mod_floor(&pow2(self.frac_bits))
    }

    /// `x - floor(x)`, in `[0, 1)`.
    pub fn frac(&self) -> Self {
        FixedReal {
            mantissa: self.frac_mantissa(),
            frac_bits: self.frac_bits,
        }
    }

    /// The top 128 fractional bits as a phase.
    pub fn phase(&self) -> Phase {
        let f = self.frac_mantissa();
        let top = if self.frac_bits >= 128 {
            f >> (self.frac_bits - 128)
        } else {
            f << (128 - self.frac_bits)
        };
        Phase(top.to_u128().expect("fraction fits in 128 bits"))
    }

    pub fn mul_int(&self, n: impl Into<BigInt>) -> Self {
        FixedReal {
            mantissa: &self.mantissa * n.into(),
            frac_bits: self.frac_bits,
        }
    }

    /// Product truncated toward negative infinity at the wider precision.
    pub fn mul(&self, other: &FixedReal) -> Self {
        let (a, b, bits) = self.aligned(other);
        FixedReal {
            mantissa: (a * b).div_floor(&pow2(bits)),
            frac_bits: bits,
        }
    }

    /// Quotient by a nonzero integer, truncated toward negative infinity.
    pub fn div_int(&self, n: i64) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("division by zero"));
        }
        Ok(FixedReal {
            mantissa: self.mantissa.div_floor(&BigInt::from(n)),
            frac_bits: self.frac_bits,
        })
    }

    pub fn to_f64(&self) -> f64 {
        // Keep 128 significant fractional bits at most so the scale factor
        // below stays a normal double.
        let (m, bits) = if self.frac_bits > 128 {
            (self.mantissa.clone() >> (self.frac_bits - 128), 128)
        } else {
            (self.mantissa.clone(), self.frac_bits)
        };
        m.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-(bits as i32))
    }

    /// Number of decimal digits that makes the decimal round trip lossless.
    pub fn decimal_digits(frac_bits: u32) -> usize {
        (frac_bits as f64 * std::f64::consts::LOG10_2).ceil() as usize
    }

    /// Decimal representation rounded to nearest at
    /// [`Self::decimal_digits`] places.
    pub fn to_decimal_string(&self) -> String {
        let digits = Self::decimal_digits(self.frac_bits);
        let scale = BigInt::from(10u32).pow(digits as u32);
        let denom = pow2(self.frac_bits);
        let num: BigInt = self.mantissa.abs() * scale * 2 + &denom;
        let rounded = num.div_floor(&(denom * 2));
        let s = rounded.to_string();
        let s = if s.len() <= digits {
            format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
        } else {
            s
        };
        let (int_part, frac_part) = s.split_at(s.len() - digits);
        let sign = if self.is_negative() && !rounded.is_zero() {
            "-"
        } else {
            ""
        };
        format!("{sign}{int_part}.{frac_part}")
    }

    /// Parses `[-]digits[.digits]`, rounding to the nearest representable
    /// value (ties away from zero).
    pub fn parse_decimal(s: &str, frac_bits: u32) -> Result<Self> {
        check_bits(frac_bits)?;
        let t = s.trim();
        let (negative, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(Error::parse(0, "empty number"));
        }
        for (i, ch) in int_part.chars().chain(frac_part.chars()).enumerate() {
            if !ch.is_ascii_digit() {
                return Err(Error::parse(i, format!("unexpected character {ch:?}")));
            }
        }
        let all_digits = format!("{int_part}{frac_part}");
        let m: BigInt = if all_digits.is_empty() {
            BigInt::zero()
        } else {
            all_digits
                .parse()
                .map_err(|_| Error::parse(0, "malformed digits"))?
        };
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let num = (m << (frac_bits + 1)) + &scale;
        let mut mantissa = num.div_floor(&(scale * 2));
        if negative {
            mantissa = -mantissa;
        }
        Ok(FixedReal {
            mantissa,
            frac_bits,
        })
    }
}

impl fmt::Debug for FixedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FixedReal({}, {} bits)", self.to_decimal_string(), self.frac_bits)
    }
}

impl fmt::Display for FixedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl PartialOrd for FixedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FixedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl Add for &FixedReal {
    type Output = FixedReal;

    fn add(self, rhs: &FixedReal) -> FixedReal {
        let (a, b, frac_bits) = self.aligned(rhs);
        FixedReal {
            mantissa: a + b,
            frac_bits,
        }
    }
}

impl Sub for &FixedReal {
    type Output = FixedReal;

    fn sub(self, rhs: &FixedReal) -> FixedReal {
        let (a, b, frac_bits) = self.aligned(rhs);
        FixedReal {
            mantissa: a - b,
            frac_bits,
        }
    }
}

impl Neg for &FixedReal {
    type Output = FixedReal;

    fn neg(self) -> FixedReal {
        FixedReal {
            mantissa: -&self.mantissa,
            frac_bits: self.frac_bits,
        }
    }
}

/// A point of the circle `R/Z` stored in units of `2^-128` turns.
///
/// Integer multiples wrap, so `frac(n * x)` is computed exactly from the
/// 128-bit fractional part of `x` without ever forming `n * x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase(pub u128);

const TWO_POW_M128: f64 = 1.0 / 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

impl Phase {
    pub const ZERO: Phase = Phase(0);
    pub const HALF: Phase = Phase(1u128 << 127);

    pub fn from_f64(x: f64) -> Phase {
        let f = x - x.floor();
        let scaled = f * 2f64.powi(64);
        Phase(((scaled as u64) as u128) << 64)
    }

    pub fn mul_u64(self, n: u64) -> Phase {
        Phase(self.0.wrapping_mul(n as u128))
    }

    pub fn mul_i64(self, n: i64) -> Phase {
        let p = self.0.wrapping_mul(n.unsigned_abs() as u128);
        Phase(if n < 0 { p.wrapping_neg() } else { p })
    }

    /// Fraction of a turn in `[0, 1)`.
    pub fn turns(self) -> f64 {
        self.0 as f64 * TWO_POW_M128
    }

    /// Representative in `[-1/2, 1/2)`.
    pub fn signed_turns(self) -> f64 {
        (self.0 as i128) as f64 * TWO_POW_M128
    }

    /// Exact distance to the nearest integer in raw units.
    pub fn dist_raw(self) -> u128 {
        self.0.min(self.0.wrapping_neg())
    }

    /// Distance to the nearest integer, in `[0, 1/2]`.
    pub fn dist(self) -> f64 {
        self.dist_raw() as f64 * TWO_POW_M128
    }

    /// `e(x) = exp(2 pi i x)`.
    pub fn e(self) -> Complex64 {
        let (s, c) = (std::f64::consts::TAU * self.signed_turns()).sin_cos();
        Complex64::new(c, s)
    }
}

impl Add for Phase {
    type Output = Phase;

    fn add(self, rhs: Phase) -> Phase {
        Phase(self.0.wrapping_add(rhs.0))
    }
}

impl Sub for Phase {
    type Output = Phase;

    fn sub(self, rhs: Phase) -> Phase {
        Phase(self.0.wrapping_sub(rhs.0))
    }
}

impl Neg for Phase {
    type Output = Phase;

    fn neg(self) -> Phase {
        Phase(self.0.wrapping_neg())
    }
}

/// `min over integers m of |x - m|`.
pub fn dist_nearest_int(x: &FixedReal) -> f64 {
    if x.frac_bits() <= 128 {
        return x.phase().dist();
    }
    let f = x.frac();
    let one = FixedReal::from_int(1, x.frac_bits());
    let up = &one - &f;
    f.min(up).to_f64()
}

/// `exp(2 pi i x)`, reduced modulo one in fixed point first.
pub fn e_frac(x: &FixedReal) -> Complex64 {
    x.phase().e()
}
