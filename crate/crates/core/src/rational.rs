//! Exact rationals over `i128`, always kept in lowest terms.
//!
//! Arithmetic panics on overflow or division by zero, like the primitive
//! integer operators. All cost formulas in this crate stay far inside the
//! `i128` range for any instance whose message length fits in memory.

use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};
use core::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    /// Panics if `den == 0`.
    pub fn new(num: i128, den: i128) -> Self {
        Self::checked_new(num, den).expect("rational with zero denominator")
    }

    pub fn checked_new(num: i128, den: i128) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let g = gcd(num, den);
        let (mut num, mut den) = (num / g, den / g);
        if den < 0 {
            num = -num;
            den = -den;
        }
        Some(Rational { num, den })
    }

    pub const fn integer(n: i128) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn denominator(&self) -> i128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    pub fn abs(self) -> Self {
        Rational { num: self.num.abs(), den: self.den }
    }

    pub fn recip(self) -> Option<Self> {
        Self::checked_new(self.den, self.num)
    }

    /// `self^exp` for a possibly negative exponent; `None` for `0^-n`.
    pub fn pow(self, exp: i32) -> Option<Self> {
        let base = if exp < 0 { self.recip()? } else { self };
        let mut acc = Rational::ONE;
        for _ in 0..exp.unsigned_abs() {
            acc = acc * base;
        }
        Some(acc)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Decimal rendering rounded half away from zero to `places` digits.
    pub fn to_decimal(&self, places: u32) -> String {
        use core::fmt::Write;
        let scale = 10i128.pow(places);
        let scaled = self.num.abs() * scale;
        let mut q = scaled / self.den;
        if (scaled % self.den) * 2 >= self.den {
            q += 1;
        }
        let int = q / scale;
        let frac = q % scale;
        let mut out = String::new();
        if self.num < 0 && q != 0 {
            out.push('-');
        }
        let _ = write!(out, "{int}");
        if places > 0 {
            let _ = write!(out, ".{:0width$}", frac, width = places as usize);
        }
        out
    }

    fn combine(a: i128, b: i128, op: fn(i128, i128) -> Option<i128>) -> i128 {
        op(a, b).expect("rational arithmetic overflow")
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n as i128)
    }
}

impl From<usize> for Rational {
    fn from(n: usize) -> Self {
        Rational::integer(n as i128)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        let g = gcd(self.den, rhs.den);
        let l = self.den / g;
        let r = rhs.den / g;
        let num = Self::combine(
            Self::combine(self.num, r, i128::checked_mul),
            Self::combine(rhs.num, l, i128::checked_mul),
            i128::checked_add,
        );
        let den = Self::combine(self.den, r, i128::checked_mul);
        Rational::new(num, den)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational { num: -self.num, den: self.den }
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        self + (-rhs)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        let g1 = gcd(self.num, rhs.den).max(1);
        let g2 = gcd(rhs.num, self.den).max(1);
        let num = Self::combine(self.num / g1, rhs.num / g2, i128::checked_mul);
        let den = Self::combine(self.den / g2, rhs.den / g1, i128::checked_mul);
        Rational::new(num, den)
    }
}

impl Div for Rational {
    type Output = Rational;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Rational) -> Rational {
        self * rhs.recip().expect("rational division by zero")
    }
}

impl core::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        // denominators are positive
        let l = self.num.checked_mul(other.den).expect("rational comparison overflow");
        let r = other.num.checked_mul(self.den).expect("rational comparison overflow");
        l.cmp(&r)
    }
}

/// `a/b`, or just `a` when the denominator is 1.
impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError;

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected an integer or a fraction `a/b`")
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n = n.trim().parse().map_err(|_| ParseRationalError)?;
                let d = d.trim().parse().map_err(|_| ParseRationalError)?;
                Rational::checked_new(n, d).ok_or(ParseRationalError)
            }
            None => s.parse().map(Rational::integer).map_err(|_| ParseRationalError),
        }
    }
}
