//! Exact rational arithmetic.
//!
//! [`Rat`] is a reduced fraction that stays in `i128` components as long as
//! it can and falls back to arbitrary precision on overflow. The simplex in
//! [`crate::polycone`] performs millions of pivot operations on these values,
//! so the small path matters; everything else in the crate just relies on the
//! exactness.
//!
//! Values serialize as strings, `"3/4"` or `"2"`, which is also the format
//! used by every JSON file the crate reads or writes.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug)]
enum Repr {
    /// Reduced, `den > 0`.
    Small(i128, i128),
    /// Reduced by construction, kept boxed so the enum stays two words wide
    /// on the hot path.
    Big(Box<BigRational>),
}

/// An exact rational number.
#[derive(Clone, Debug)]
pub struct Rat(Repr);

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal: {0}")]
    Invalid(String),
    #[error("zero denominator in rational literal")]
    ZeroDenominator,
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn make_small(num: i128, den: i128) -> Rat {
    debug_assert!(den != 0);
    let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
    if num == 0 {
        return Rat(Repr::Small(0, 1));
    }
    let g = gcd_i128(num, den);
    if g > 1 {
        num /= g;
        den /= g;
    }
    Rat(Repr::Small(num, den))
}

fn shrink(big: BigRational) -> Rat {
    if let (Some(n), Some(d)) = (big.numer().to_i128(), big.denom().to_i128()) {
        Rat(Repr::Small(n, d))
    } else {
        Rat(Repr::Big(Box::new(big)))
    }
}

impl Rat {
    pub fn zero() -> Self {
        Rat(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rat(Repr::Small(1, 1))
    }

    pub fn new(num: i64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        make_small(num as i128, den as i128)
    }

    pub fn from_int(n: i64) -> Self {
        Rat(Repr::Small(n as i128, 1))
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n == 0,
            Repr::Big(b) => b.is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(b) => b.is_positive(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Rat {
        assert!(!self.is_zero(), "division by zero");
        match &self.0 {
            Repr::Small(n, d) => make_small(*d, *n),
            Repr::Big(b) => shrink(b.recip()),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn from_big(big: BigRational) -> Rat {
        shrink(big)
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Nearest rational with the given power-of-two denominator.
    pub fn dyadic_round(value: f64, log2_den: u32) -> Rat {
        let den = 1i128 << log2_den;
        let num = (value * den as f64).round() as i128;
        make_small(num, den)
    }

    fn binop(
        &self,
        rhs: &Rat,
        small: impl Fn(i128, i128, i128, i128) -> Option<Rat>,
        big: impl Fn(&BigRational, &BigRational) -> BigRational,
    ) -> Rat {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            if let Some(r) = small(*a, *b, *c, *d) {
                return r;
            }
        }
        shrink(big(&self.to_big(), &rhs.to_big()))
    }
}

fn small_add(a: i128, b: i128, c: i128, d: i128) -> Option<Rat> {
    // a/b + c/d with the usual gcd trick to delay overflow.
    let g = gcd_i128(b, d);
    let b1 = b / g;
    let d1 = d / g;
    let num = a.checked_mul(d1)?.checked_add(c.checked_mul(b1)?)?;
    let den = b1.checked_mul(d)?;
    Some(make_small(num, den))
}

fn small_mul(a: i128, b: i128, c: i128, d: i128) -> Option<Rat> {
    let g1 = gcd_i128(a, d);
    let g2 = gcd_i128(c, b);
    let num = (a / g1).checked_mul(c / g2)?;
    let den = (b / g2).checked_mul(d / g1)?;
    Some(make_small(num, den))
}

impl Add for &Rat {
    type Output = Rat;
    fn add(self, rhs: &Rat) -> Rat {
        self.binop(rhs, small_add, |x, y| x + y)
    }
}

impl Sub for &Rat {
    type Output = Rat;
    fn sub(self, rhs: &Rat) -> Rat {
        self.binop(rhs, |a, b, c, d| small_add(a, b, c.checked_neg()?, d), |x, y| x - y)
    }
}

impl Mul for &Rat {
    type Output = Rat;
    fn mul(self, rhs: &Rat) -> Rat {
        self.binop(rhs, small_mul, |x, y| x * y)
    }
}

impl Div for &Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        self.binop(
            rhs,
            |a, b, c, d| small_mul(a, b, d, c),
            |x, y| x / y,
        )
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match &self.0 {
            Repr::Small(n, d) => match n.checked_neg() {
                Some(m) => Rat(Repr::Small(m, *d)),
                None => shrink(-self.to_big()),
            },
            Repr::Big(b) => shrink(-(**b).clone()),
        }
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
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
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        *self = &*self - rhs;
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Rat {}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &other.0) {
            if let (Some(l), Some(r)) = (a.checked_mul(*d), c.checked_mul(*b)) {
                return l.cmp(&r);
            }
        }
        self.to_big().cmp(&other.to_big())
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) => {
                if b.is_integer() {
                    write!(f, "{}", b.numer())
                } else {
                    write!(f, "{}/{}", b.numer(), b.denom())
                }
            }
        }
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRatError::Empty);
        }
        let (num_str, den_str) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let parse_int = |t: &str| -> Result<BigInt, ParseRatError> {
            t.parse::<BigInt>()
                .map_err(|_| ParseRatError::Invalid(s.to_string()))
        };
        let num = parse_int(num_str)?;
        let den = match den_str {
            Some(d) => {
                let d = parse_int(d)?;
                if d.is_zero() {
                    return Err(ParseRatError::ZeroDenominator);
                }
                d
            }
            None => BigInt::from(1),
        };
        Ok(shrink(BigRational::new(num, den)))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

impl Default for Rat {
    fn default() -> Self {
        Rat::zero()
    }
}

/// Sum of a slice of (coefficient, value) products, exact.
pub fn dot(terms: impl IntoIterator<Item = (Rat, Rat)>) -> Rat {
    let mut acc = Rat::zero();
    for (a, b) in terms {
        if !a.is_zero() && !b.is_zero() {
            acc += &(&a * &b);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(r("3/4").to_string(), "3/4");
        assert_eq!(r("6/8").to_string(), "3/4");
        assert_eq!(r("-6/8").to_string(), "-3/4");
        assert_eq!(r("6/-8").to_string(), "-3/4");
        assert_eq!(r("5").to_string(), "5");
        assert_eq!(r("0/7").to_string(), "0");
        assert!("1/0".parse::<Rat>().is_err());
        assert!("".parse::<Rat>().is_err());
        assert!("a/b".parse::<Rat>().is_err());
    }

    #[test]
    fn arithmetic_basics() {
        assert_eq!(&r("1/2") + &r("1/3"), r("5/6"));
        assert_eq!(&r("1/2") - &r("1/3"), r("1/6"));
        assert_eq!(&r("2/3") * &r("9/4"), r("3/2"));
        assert_eq!(&r("2/3") / &r("4/3"), r("1/2"));
        assert!(r("1/3") < r("1/2"));
        assert_eq!(-r("3/7"), r("-3/7"));
        assert_eq!(r("1/3").recip(), r("3"));
    }

    #[test]
    fn overflow_falls_back_to_big() {
        let big = Rat::from_int(i64::MAX);
        let mut acc = Rat::one();
        for _ in 0..4 {
            acc = &acc * &big;
        }
        // i64::MAX^4 does not fit in i128; value must still round-trip.
        let s = acc.to_string();
        assert_eq!(s.parse::<Rat>().unwrap(), acc);
        assert_eq!(&acc / &acc, Rat::one());
    }

    #[test]
    fn dyadic_round_is_exact_on_dyadics() {
        assert_eq!(Rat::dyadic_round(0.5, 20), r("1/2"));
        assert_eq!(Rat::dyadic_round(3.0, 20), r("3"));
        assert_eq!(Rat::dyadic_round(-0.25, 20), r("-1/4"));
    }

    proptest! {
        #[test]
        fn matches_bigrational_oracle(a in -1000i64..1000, b in 1i64..1000,
                                      c in -1000i64..1000, d in 1i64..1000) {
            let x = Rat::new(a, b as u64);
            let y = Rat::new(c, d as u64);
            let bx = x.to_big();
            let by = y.to_big();
            prop_assert_eq!((&x + &y).to_big(), &bx + &by);
            prop_assert_eq!((&x - &y).to_big(), &bx - &by);
            prop_assert_eq!((&x * &y).to_big(), &bx * &by);
            if c != 0 {
                prop_assert_eq!((&x / &y).to_big(), &bx / &by);
            }
            prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
        }
    }
}
