//! Exact rational numbers.
//!
//! Values that fit in a pair of `i64`s are kept inline and combined through
//! `i128` intermediates; anything larger spills to heap-allocated big
//! integers. The representation is canonical (lowest terms, positive
//! denominator, inline whenever possible) so derived equality and hashing
//! are exact.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone)]
pub struct Rat(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(i64, i64),
    Big(Box<(BigInt, BigInt)>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRatError {
    #[error("empty number literal")]
    Empty,
    #[error("invalid number literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("exponent of `{0}` is outside +-{MAX_DECIMAL_EXPONENT}")]
    ExponentOutOfRange(String),
}

/// Largest accepted decimal exponent magnitude.
pub const MAX_DECIMAL_EXPONENT: i32 = 4096;

fn fits(v: i128) -> Option<i64> {
    i64::try_from(v).ok()
}

impl Rat {
    pub const fn zero() -> Rat {
        Rat(Repr::Small(0, 1))
    }

    pub const fn one() -> Rat {
        Rat(Repr::Small(1, 1))
    }

    pub const fn integer(n: i64) -> Rat {
        Rat(Repr::Small(n, 1))
    }

    /// `numer / denom`; panics on a zero denominator.
    pub fn new(numer: i64, denom: i64) -> Rat {
        Rat::from_i128(numer as i128, denom as i128)
    }

    fn from_i128(mut n: i128, mut d: i128) -> Rat {
        assert!(d != 0, "zero denominator");
        if d < 0 {
            // i128::MIN cannot occur: inputs are products of two i64 values
            n = -n;
            d = -d;
        }
        if n == 0 {
            return Rat::zero();
        }
        if d != 1 {
            let g = n.gcd(&d);
            if g != 1 {
                n /= g;
                d /= g;
            }
        }
        match (fits(n), fits(d)) {
            (Some(n), Some(d)) => Rat(Repr::Small(n, d)),
            _ => Rat(Repr::Big(Box::new((BigInt::from(n), BigInt::from(d))))),
        }
    }

    pub fn from_bigints(mut n: BigInt, mut d: BigInt) -> Rat {
        assert!(!d.is_zero(), "zero denominator");
        if d.is_negative() {
            n = -n;
            d = -d;
        }
        let g = n.gcd(&d);
        if !g.is_one() && !g.is_zero() {
            n /= &g;
            d /= &g;
        }
        if n.is_zero() {
            return Rat::zero();
        }
        match (n.to_i64(), d.to_i64()) {
            (Some(n), Some(d)) => Rat(Repr::Small(n, d)),
            _ => Rat(Repr::Big(Box::new((n, d)))),
        }
    }

    fn big_parts(&self) -> (BigInt, BigInt) {
        match &self.0 {
            Repr::Small(n, d) => (BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (b.0.clone(), b.1.clone()),
        }
    }

    pub fn numer(&self) -> BigInt {
        self.big_parts().0
    }

    pub fn denom(&self) -> BigInt {
        self.big_parts().1
    }

    /// Numerator and denominator both fit in an `i64`.
    pub fn is_inline(&self) -> bool {
        matches!(self.0, Repr::Small(..))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(b) => b.0.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.0.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.1.is_one(),
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn floor(&self) -> Rat {
        match &self.0 {
            Repr::Small(n, d) => Rat::integer(n.div_floor(d)),
            Repr::Big(b) => Rat::from_bigints(b.0.div_floor(&b.1), BigInt::one()),
        }
    }

    pub fn ceil(&self) -> Rat {
        -(-self).floor()
    }

    /// Nearest `f64`; for display only.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => {
                let n = b.0.to_f64().unwrap_or(f64::NAN);
                let d = b.1.to_f64().unwrap_or(f64::NAN);
                n / d
            }
        }
    }

    fn add_ref(&self, other: &Rat) -> Rat {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                if b == d {
                    Rat::from_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    let n = *a as i128 * *d as i128 + *c as i128 * *b as i128;
                    Rat::from_i128(n, *b as i128 * *d as i128)
                }
            }
            _ => {
                let (a, b) = self.big_parts();
                let (c, d) = other.big_parts();
                Rat::from_bigints(a * &d + c * &b, b * d)
            }
        }
    }

    fn mul_ref(&self, other: &Rat) -> Rat {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => Rat::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128),
            _ => {
                let (a, b) = self.big_parts();
                let (c, d) = other.big_parts();
                Rat::from_bigints(a * c, b * d)
            }
        }
    }

    pub fn recip(&self) -> Rat {
        match &self.0 {
            Repr::Small(n, d) => Rat::from_i128(*d as i128, *n as i128),
            Repr::Big(b) => Rat::from_bigints(b.1.clone(), b.0.clone()),
        }
    }
}

impl Default for Rat {
    fn default() -> Self {
        Rat::zero()
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl Eq for Rat {}

impl Hash for Rat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => {
                let (a, b) = self.big_parts();
                let (c, d) = other.big_parts();
                (a * d).cmp(&(c * b))
            }
        }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::integer(n)
    }
}

impl From<i32> for Rat {
    fn from(n: i32) -> Self {
        Rat::integer(n as i64)
    }
}

impl From<usize> for Rat {
    fn from(n: usize) -> Self {
        Rat::from_bigints(BigInt::from(n), BigInt::one())
    }
}

impl From<bool> for Rat {
    fn from(b: bool) -> Self {
        if b {
            Rat::one()
        } else {
            Rat::zero()
        }
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match &self.0 {
            Repr::Small(n, d) => Rat::from_i128(-(*n as i128), *d as i128),
            Repr::Big(b) => Rat::from_bigints(-b.0.clone(), b.1.clone()),
        }
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                let f: fn(&Rat, &Rat) -> Rat = $body;
                f(self, rhs)
            }
        }
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                (&self).$method(rhs)
            }
        }
        impl $trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_ref(b));
forward_binop!(Sub, sub, |a, b| a.add_ref(&-b));
forward_binop!(Mul, mul, |a, b| a.mul_ref(b));
forward_binop!(Div, div, |a, b| {
    assert!(!b.is_zero(), "division by zero");
    a.mul_ref(&b.recip())
});

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        *self = self.add_ref(rhs);
    }
}

impl AddAssign<Rat> for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        *self = self.add_ref(&rhs);
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        *self = &*self - rhs;
    }
}

impl SubAssign<Rat> for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        *self = &*self - &rhs;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        *self = self.mul_ref(rhs);
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) if b.1.is_one() => write!(f, "{}", b.0),
            Repr::Big(b) => write!(f, "{}/{}", b.0, b.1),
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(s: &str, whole: &str) -> Result<BigInt, ParseRatError> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRatError::Invalid(whole.to_string()));
    }
    s.trim_start_matches('+')
        .parse::<BigInt>()
        .map_err(|_| ParseRatError::Invalid(whole.to_string()))
}

fn parse_decimal(s: &str, whole: &str) -> Result<Rat, ParseRatError> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp = s[pos + 1..]
                .trim_start_matches('+')
                .parse::<i32>()
                .map_err(|_| ParseRatError::Invalid(whole.to_string()))?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, unsigned) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match unsigned.split_once('.') {
        Some((i, f)) => (i, f),
        None => (unsigned, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ParseRatError::Invalid(whole.to_string()));
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(ParseRatError::Invalid(whole.to_string()));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = digits.parse().map_err(|_| ParseRatError::Invalid(whole.to_string()))?;
    if negative {
        numer = -numer;
    }
    if exponent.abs() > MAX_DECIMAL_EXPONENT {
        return Err(ParseRatError::ExponentOutOfRange(whole.to_string()));
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    if scale >= 0 {
        Ok(Rat::from_bigints(
            numer * num_traits::pow(ten, scale as usize),
            BigInt::one(),
        ))
    } else {
        Ok(Rat::from_bigints(numer, num_traits::pow(ten, (-scale) as usize)))
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    /// Accepts integers (`-3`), decimals (`0.25`, `1e-3`) and fractions (`7/12`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.is_empty() {
            return Err(ParseRatError::Empty);
        }
        if let Some((n, d)) = t.split_once('/') {
            let n = parse_int(n.trim(), t)?;
            let d = parse_int(d.trim(), t)?;
            if d.is_zero() {
                return Err(ParseRatError::ZeroDenominator(t.to_string()));
            }
            return Ok(Rat::from_bigints(n, d));
        }
        if t.contains(['.', 'e', 'E']) {
            return parse_decimal(t, t);
        }
        Ok(Rat::from_bigints(parse_int(t, t)?, BigInt::one()))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RatVisitor;
        impl de::Visitor<'_> for RatVisitor {
            type Value = Rat;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or a \"p/q\" / decimal string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rat, E> {
                Ok(Rat::integer(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rat, E> {
                Ok(Rat::from_bigints(BigInt::from(v), BigInt::one()))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rat, E> {
                v.parse().map_err(E::custom)
            }
        }
        deserializer.deserialize_any(RatVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn parses_literal_forms() {
        assert_eq!(r("1/3"), Rat::new(1, 3));
        assert_eq!(r("-2/4"), Rat::new(-1, 2));
        assert_eq!(r("0.25"), Rat::new(1, 4));
        assert_eq!(r("-1.5"), Rat::new(-3, 2));
        assert_eq!(r("1e-3"), Rat::new(1, 1000));
        assert_eq!(r("2.5E2"), Rat::integer(250));
        assert_eq!(r("+7"), Rat::integer(7));
        assert!(matches!("1/0".parse::<Rat>(), Err(ParseRatError::ZeroDenominator(_))));
        assert!(matches!(
            "1e99999".parse::<Rat>(),
            Err(ParseRatError::ExponentOutOfRange(_))
        ));
        assert!("abc".parse::<Rat>().is_err());
        assert!("1/2/3".parse::<Rat>().is_err());
        assert!("".parse::<Rat>().is_err());
        assert!(".".parse::<Rat>().is_err());
    }

    #[test]
    fn display_is_lowest_terms() {
        assert_eq!(Rat::new(6, -4).to_string(), "-3/2");
        assert_eq!(Rat::new(8, 4).to_string(), "2");
        assert_eq!(Rat::zero().to_string(), "0");
    }

    #[test]
    fn overflow_spills_to_big_and_back() {
        let big = Rat::integer(i64::MAX) * Rat::integer(i64::MAX);
        assert!(big > Rat::integer(i64::MAX));
        let back = &big / &Rat::integer(i64::MAX);
        assert_eq!(back, Rat::integer(i64::MAX));
        assert!(matches!(back.0, Repr::Small(_, _)));
        let tiny = Rat::new(1, i64::MAX) * Rat::new(1, i64::MAX);
        assert!(tiny.is_positive());
        assert_eq!(tiny * Rat::integer(i64::MAX) * Rat::integer(i64::MAX), Rat::one());
        assert_eq!(-Rat::integer(i64::MIN), r("9223372036854775808"));
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(Rat::new(-1, 2).floor(), Rat::integer(-1));
        assert_eq!(Rat::new(-1, 2).ceil(), Rat::zero());
        assert_eq!(Rat::new(7, 2).floor(), Rat::integer(3));
        assert_eq!(Rat::integer(4).ceil(), Rat::integer(4));
    }

    fn arb_rat() -> impl Strategy<Value = Rat> {
        (any::<i64>(), 1..i64::MAX).prop_map(|(n, d)| Rat::new(n, d))
    }

    proptest! {
        #[test]
        fn display_reparses_exactly(x in arb_rat(), y in arb_rat()) {
            let z = &x * &y + &x;
            prop_assert_eq!(z.to_string().parse::<Rat>().unwrap(), z);
        }

        #[test]
        fn field_identities(x in arb_rat(), y in arb_rat(), z in arb_rat()) {
            prop_assert_eq!(&(&x + &y) - &y, x.clone());
            prop_assert_eq!(&x * &(&y + &z), &x * &y + &x * &z);
            if !y.is_zero() {
                prop_assert_eq!(&(&x / &y) * &y, x.clone());
            }
            prop_assert_eq!((&x + &y).cmp(&(&x + &z)), y.cmp(&z));
        }

        #[test]
        fn ordering_matches_bigint_cross_multiplication(x in arb_rat(), y in arb_rat()) {
            let lhs = x.numer() * y.denom();
            let rhs = y.numer() * x.denom();
            prop_assert_eq!(x.cmp(&y), lhs.cmp(&rhs));
        }
    }
}
