use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{factorize, FixedReal};
use crate::error::{Error, Result};

/// Largest radicand accepted before square-part extraction.
pub const MAX_RADICAND: u64 = 1_000_000_000_000;

/// The real number `(u + v*sqrt(d)) / w`, `d` squarefree and at least 2.
///
/// Stored normalised: `w > 0` and `gcd(u, v, w) = 1`, so two values are
/// equal iff their fields are.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticIrrational {
    u: BigInt,
    v: BigInt,
    d: u64,
    w: BigInt,
}

/// `sign(a + b*sqrt(d))` for a non-square `d`.
pub(crate) fn sign_linear(a: &BigInt, b: &BigInt, d: u64) -> Ordering {
    let sa = a.sign();
    let sb = b.sign();
    use num_bigint::Sign::*;
    match (sa, sb) {
        (NoSign, NoSign) => Ordering::Equal,
        (_, NoSign) => a.cmp(&BigInt::zero()),
        (NoSign, _) => b.cmp(&BigInt::zero()),
        (Plus, Plus) => Ordering::Greater,
        (Minus, Minus) => Ordering::Less,
        _ => {
            // Opposite signs: compare a^2 with b^2 d.
            let a2 = a * a;
            let b2d = b * b * BigInt::from(d);
            let mag = a2.cmp(&b2d);
            if sa == Plus {
                mag
            } else {
                mag.reverse()
            }
        }
    }
}

/// `floor((u + v*sqrt(d)) / w)` for `w > 0` and non-square `d`.
pub(crate) fn floor_surd(u: &BigInt, v: &BigInt, d: u64, w: &BigInt) -> BigInt {
    debug_assert!(w.is_positive());
    if v.is_zero() {
        return u.div_floor(w);
    }
    let radicand = v * v * BigInt::from(d);
    let s = radicand.sqrt();
    // sqrt(radicand) lies strictly between s and s + 1.
    if v.is_positive() {
        (u + s).div_floor(w)
    } else {
        let num: BigInt = u - s - 1;
        num.div_floor(w)
    }
}

/// Splits `d = s^2 * r` with `r` squarefree.
fn square_part(d: u64) -> (u64, u64) {
    let mut s = 1u64;
    let mut r = 1u64;
    for (p, k) in factorize(d) {
        s *= p.pow(k / 2);
        if k % 2 == 1 {
            r *= p;
        }
    }
    (s, r)
}

impl QuadraticIrrational {
    /// Builds `(u + v*sqrt(d)) / w`, pulling square factors out of `d`.
    pub fn new(
        u: impl Into<BigInt>,
        v: impl Into<BigInt>,
        d: u64,
        w: impl Into<BigInt>,
    ) -> Result<Self> {
        let (u, v, w) = (u.into(), v.into(), w.into());
        if v.is_zero() {
            return Err(Error::arg("coefficient of the square root must be nonzero"));
        }
        if w.is_zero() {
            return Err(Error::arg("denominator must be nonzero"));
        }
        if d < 2 {
            return Err(Error::arg(format!("radicand {d} must be at least 2")));
        }
        if d > MAX_RADICAND {
            return Err(Error::arg(format!("radicand {d} exceeds {MAX_RADICAND}")));
        }
        let (s, r) = square_part(d);
        if r == 1 {
            return Err(Error::arg(format!("sqrt({d}) is rational")));
        }
        Ok(Self::normalized(u, v * BigInt::from(s), r, w))
    }

    fn normalized(mut u: BigInt, mut v: BigInt, d: u64, mut w: BigInt) -> Self {
        if w.is_negative() {
            u = -u;
            v = -v;
            w = -w;
        }
        let g = u.gcd(&v).gcd(&w);
        if !g.is_one() {
            u /= &g;
            v /= &g;
            w /= &g;
        }
        QuadraticIrrational { u, v, d, w }
    }

    pub fn sqrt2() -> Self {
        Self::new(0, 1, 2, 1).expect("valid constant")
    }

    pub fn sqrt3() -> Self {
        Self::new(0, 1, 3, 1).expect("valid constant")
    }

    /// `(1 + sqrt 5) / 2`.
    pub fn golden() -> Self {
        Self::new(1, 1, 5, 2).expect("valid constant")
    }

    pub fn u(&self) -> &BigInt {
        &self.u
    }

    pub fn v(&self) -> &BigInt {
        &self.v
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn w(&self) -> &BigInt {
        &self.w
    }

    pub fn floor(&self) -> BigInt {
        floor_surd(&self.u, &self.v, self.d, &self.w)
    }

    /// Sign of `self - p/q` for `q > 0`.
    pub fn cmp_rational(&self, p: &BigInt, q: &BigInt) -> Ordering {
        assert!(q.is_positive(), "denominator must be positive");
        // (u q - p w + v q sqrt d) / (w q), with w q > 0.
        sign_linear(&(&self.u * q - p * &self.w), &(&self.v * q), self.d)
    }

    /// `self * p / q`.
    pub fn mul_rational(&self, p: &BigInt, q: &BigInt) -> Result<Self> {
        if p.is_zero() || q.is_zero() {
            return Err(Error::arg("scaling by zero leaves the quadratic field"));
        }
        Ok(Self::normalized(&self.u * p, &self.v * p, self.d, &self.w * q))
    }

    /// `self + n`.
    pub fn add_int(&self, n: &BigInt) -> Self {
        Self::normalized(&self.u + n * &self.w, self.v.clone(), self.d, self.w.clone())
    }

    /// `self - p/q`.
    pub fn sub_rational(&self, p: &BigInt, q: &BigInt) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::arg("zero denominator"));
        }
        Ok(Self::normalized(
            &self.u * q - p * &self.w,
            &self.v * q,
            self.d,
            &self.w * q,
        ))
    }

    /// `floor(self * 2^F) / 2^F` with `F = max(frac_bits, MIN_FRAC_BITS)`.
    pub fn to_fixed(&self, frac_bits: u32) -> FixedReal {
        let bits = frac_bits.max(crate::arith::MIN_FRAC_BITS);
        let u: BigInt = &self.u << bits;
        let v: BigInt = &self.v << bits;
        let m = floor_surd(&u, &v, self.d, &self.w);
        FixedReal::from_mantissa(m, bits).expect("precision at least the minimum")
    }

    pub fn to_f64(&self) -> f64 {
        self.to_fixed(128).to_f64()
    }

    /// Exact test of `|self - p/q| < 1/q^2`.
    pub fn within_inverse_square(&self, p: &BigInt, q: &BigInt) -> bool {
        let q2 = q * q;
        // self - p/q - 1/q^2 < 0  and  self - p/q + 1/q^2 > 0, scaled by w q^2.
        let base = &self.u * &q2 - p * q * &self.w;
        let vq2 = &self.v * &q2;
        sign_linear(&(&base - &self.w), &vq2, self.d) == Ordering::Less
            && sign_linear(&(&base + &self.w), &vq2, self.d) == Ordering::Greater
    }

    /// Distance to the nearest integer as exact bounds test:
    /// is `||self|| >= p/q` (for `q > 0`)?
    pub fn dist_at_least(&self, p: &BigInt, q: &BigInt) -> bool {
        let f = self.floor();
        // self - f >= p/q  and  f + 1 - self >= p/q
        let lower = self.cmp_rational(&(&f * q + p), q) != Ordering::Less;
        let upper = self.cmp_rational(&((&f + 1) * q - p), q) != Ordering::Greater;
        lower && upper
    }
}

impl fmt::Display for QuadraticIrrational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.v.is_negative() { '-' } else { '+' };
        write!(f, "({}{}{}*sqrt({}))/{}", self.u, sign, self.v.abs(), self.d, self.w)
    }
}

/// Parser for slope constants.
///
/// ```text
/// constant := name | expr
/// name     := "sqrt2" | "sqrt3" | "golden" | "phi" | "1+sqrt3"
/// expr     := group [ "/" int ] | sum [ "/" int ]
/// group    := "(" sum ")"
/// sum      := [sign] term [ sign term ]     exactly one term is a root
/// term     := int | [ int "*" ] "sqrt" ( "(" nat ")" | nat )
/// ```
///
/// Whitespace is ignored everywhere.
impl FromStr for QuadraticIrrational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.to_ascii_lowercase().as_str() {
            "golden" | "phi" => return Ok(Self::golden()),
            "" => return Err(Error::parse(0, "empty constant")),
            _ => {}
        }
        Parser::new(&compact).constant()
    }
}

const MAX_DIGITS: usize = 60;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

struct Term {
    coeff: BigInt,
    root: Option<u64>,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser {
            src: s.as_bytes(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected '{}'", b as char)))
        }
    }

    fn digits(&mut self) -> Result<&'a str> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::parse(start, "expected digits"));
        }
        if self.pos - start > MAX_DIGITS {
            return Err(Error::parse(start, "integer literal too long"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits"))
    }

    fn int(&mut self) -> Result<BigInt> {
        let start = self.pos;
        let neg = self.eat(b'-');
        if !neg {
            self.eat(b'+');
        }
        let d = self.digits()?;
        let v: BigInt = d.parse().map_err(|_| Error::parse(start, "bad integer"))?;
        Ok(if neg { -v } else { v })
    }

    fn radicand(&mut self) -> Result<u64> {
        let at = self.pos;
        let paren = self.eat(b'(');
        let d = self.digits()?;
        if paren {
            self.expect(b')')?;
        }
        d.parse::<u64>()
            .map_err(|_| Error::parse(at, "radicand out of range"))
    }

    fn keyword_sqrt(&mut self) -> bool {
        if self.src[self.pos..].starts_with(b"sqrt") {
            self.pos += 4;
            true
        } else {
            false
        }
    }

    fn term(&mut self, sign: i32) -> Result<Term> {
        if self.keyword_sqrt() {
            return Ok(Term {
                coeff: BigInt::from(sign),
                root: Some(self.radicand()?),
            });
        }
        let coeff = BigInt::from(sign) * BigInt::from_str(self.digits()?).expect("digits");
        if self.eat(b'*') {
            if !self.keyword_sqrt() {
                return Err(Error::parse(self.pos, "expected 'sqrt' after '*'"));
            }
            return Ok(Term {
                coeff,
                root: Some(self.radicand()?),
            });
        }
        Ok(Term { coeff, root: None })
    }

    fn sign(&mut self) -> Option<i32> {
        if self.eat(b'+') {
            Some(1)
        } else if self.eat(b'-') {
            Some(-1)
        } else {
            None
        }
    }

    fn sum(&mut self) -> Result<(BigInt, BigInt, u64)> {
        let first_sign = self.sign().unwrap_or(1);
        let first = self.term(first_sign)?;
        let second = match self.sign() {
            Some(s) => Some(self.term(s)?),
            None => None,
        };
        let terms: Vec<Term> = std::iter::once(first).chain(second).collect();
        let mut u = BigInt::zero();
        let mut root: Option<(BigInt, u64)> = None;
        let mut n_int = 0;
        for t in terms {
            match t.root {
                Some(d) => {
                    if root.is_some() {
                        return Err(Error::parse(self.pos, "only one square-root term allowed"));
                    }
                    root = Some((t.coeff, d));
                }
                None => {
                    n_int += 1;
                    u = t.coeff;
                }
            }
        }
        if n_int > 1 {
            return Err(Error::parse(self.pos, "only one integer term allowed"));
        }
        let (v, d) = root.ok_or_else(|| Error::parse(self.pos, "a square-root term is required"))?;
        Ok((u, v, d))
    }

    fn constant(&mut self) -> Result<QuadraticIrrational> {
        let (u, v, d) = if self.eat(b'(') {
            let inner = self.sum()?;
            self.expect(b')')?;
            inner
        } else {
            self.sum()?
        };
        let w = if self.eat(b'/') {
            self.int()?
        } else {
            BigInt::one()
        };
        if self.pos != self.src.len() {
            return Err(Error::parse(self.pos, "trailing input"));
        }
        QuadraticIrrational::new(u, v, d, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> QuadraticIrrational {
        s.parse().unwrap()
    }

    #[test]
    fn builtins_and_forms() {
        assert_eq!(parse("sqrt2"), QuadraticIrrational::sqrt2());
        assert_eq!(parse("golden"), QuadraticIrrational::golden());
        assert_eq!(parse("(1+sqrt(5))/2"), QuadraticIrrational::golden());
        assert_eq!(parse("(1+1*sqrt(5))/2"), QuadraticIrrational::golden());
        assert_eq!(parse("1+sqrt3"), QuadraticIrrational::new(1, 1, 3, 1).unwrap());
        assert_eq!(parse(" ( sqrt(5) + 1 ) / 2 "), QuadraticIrrational::golden());
        assert_eq!(parse("(2+2*sqrt(8))/4"), QuadraticIrrational::new(1, 2, 2, 2).unwrap());
        assert_eq!(parse("(-3-sqrt(2))/-1"), QuadraticIrrational::new(3, 1, 2, 1).unwrap());
    }

    #[test]
    fn rejects_malformed() {
        for s in ["", "sqrt", "sqrt(4)", "1+2", "sqrt2+sqrt3", "(1+sqrt5", "1+sqrt5)/", "x", "(1+sqrt5)/0", "sqrt1"] {
            assert!(s.parse::<QuadraticIrrational>().is_err(), "{s:?} accepted");
        }
    }

    #[test]
    fn normalisation() {
        let a = QuadraticIrrational::new(2, 2, 5, 4).unwrap();
        assert_eq!(a, QuadraticIrrational::golden());
        let b = QuadraticIrrational::new(-1, -1, 5, -2).unwrap();
        assert_eq!(b, QuadraticIrrational::golden());
        assert!(QuadraticIrrational::new(0, 1, 9, 1).is_err());
        assert!(QuadraticIrrational::new(0, 0, 2, 1).is_err());
    }

    #[test]
    fn floor_and_fixed() {
        assert_eq!(QuadraticIrrational::sqrt2().floor(), BigInt::from(1));
        assert_eq!(QuadraticIrrational::golden().floor(), BigInt::from(1));
        let neg = QuadraticIrrational::new(0, -1, 2, 1).unwrap();
        assert_eq!(neg.floor(), BigInt::from(-2));
        let x = QuadraticIrrational::sqrt2().to_fixed(128).to_f64();
        assert_eq!(x, std::f64::consts::SQRT_2);
    }

    #[test]
    fn rational_comparison() {
        let r2 = QuadraticIrrational::sqrt2();
        assert_eq!(r2.cmp_rational(&BigInt::from(7), &BigInt::from(5)), Ordering::Greater);
        assert_eq!(r2.cmp_rational(&BigInt::from(3), &BigInt::from(2)), Ordering::Less);
        assert!(r2.within_inverse_square(&BigInt::from(7), &BigInt::from(5)));
        assert!(!r2.within_inverse_square(&BigInt::from(5), &BigInt::from(4)));
    }

    #[test]
    fn display_round_trips() {
        for c in [QuadraticIrrational::golden(), QuadraticIrrational::new(-3, -7, 11, 5).unwrap()] {
            assert_eq!(c.to_string().parse::<QuadraticIrrational>().unwrap(), c);
        }
    }
}
