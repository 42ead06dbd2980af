//! Scalar abstraction and values extended with a symbolic infinity.
//!
//! Every closed-form quantity in this crate is computed over a [`Scalar`].
//! Exact analysis uses [`BigRational`](num_rational::BigRational); `f64` is
//! available for quick numeric cross-checks and for the scaling fits.

use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, ToPrimitive};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// A field-like scalar the DoF formulas can be evaluated over.
pub trait Scalar:
    Num + Clone + PartialOrd + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Embeds a node or antenna count.
    fn from_count(n: u64) -> Self;

    /// Lossy conversion used for log-log fits and decimal rendering.
    fn to_f64_lossy(&self) -> f64;

    /// True when arithmetic on this type never rounds.
    const EXACT: bool;

    /// Parses user input. Exact types also accept decimal literals like `0.25`.
    fn parse_scalar(s: &str) -> Result<Self, String> {
        s.trim().parse().map_err(|_| format!("not a number: {s:?}"))
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_count(n: u64) -> Self {
                n as $t
            }

            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }

            const EXACT: bool = false;
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

macro_rules! impl_ratio_scalar {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            fn from_count(n: u64) -> Self {
                Ratio::from_integer(<$int>::from(n))
            }

            fn to_f64_lossy(&self) -> f64 {
                self.to_f64().unwrap_or(f64::NAN)
            }

            const EXACT: bool = true;

            fn parse_scalar(s: &str) -> Result<Self, String> {
                let s = s.trim();
                if let Ok(v) = s.parse() {
                    return Ok(v);
                }
                parse_decimal::<$int>(s).ok_or_else(|| format!("not a number: {s:?}"))
            }
        }
    };
}

/// Exact value of a plain decimal literal (`-1.25`, `.5`, `3.`), no exponent.
fn parse_decimal<I>(s: &str) -> Option<Ratio<I>>
where
    I: Clone + num_integer::Integer + FromStr + From<u8>,
{
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.')?;
    let digits = format!("{whole}{frac}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let numer: I = digits.parse().ok()?;
    let denom = num_traits::pow(I::from(10u8), frac.len());
    let v = Ratio::new(numer, denom);
    Some(if negative { Ratio::from_integer(I::zero()) - v } else { v })
}

impl_ratio_scalar!(i128);
impl_ratio_scalar!(BigInt);

/// A node or antenna count: a positive integer or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtCount {
    Finite(u64),
    Infinite,
}

impl ExtCount {
    /// Returns `None` for zero.
    pub fn finite(n: u64) -> Option<Self> {
        (n >= 1).then_some(ExtCount::Finite(n))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtCount::Finite(_))
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self {
            ExtCount::Finite(n) => Some(*n),
            ExtCount::Infinite => None,
        }
    }

    pub fn is_one(&self) -> bool {
        *self == ExtCount::Finite(1)
    }

    pub fn to_ext<T: Scalar>(self) -> Ext<T> {
        match self {
            ExtCount::Finite(n) => Ext::Finite(T::from_count(n)),
            ExtCount::Infinite => Ext::Infinite,
        }
    }
}

impl Display for ExtCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtCount::Finite(n) => write!(f, "{n}"),
            ExtCount::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtCount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtCount::Finite(n) => serializer.serialize_u64(*n),
            ExtCount::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtCount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = NumberOrString::deserialize(deserializer)?.as_text();
        if is_infinity_token(&text) {
            return Ok(ExtCount::Infinite);
        }
        text.trim()
            .parse::<u64>()
            .ok()
            .and_then(ExtCount::finite)
            .ok_or_else(|| de::Error::custom(format!("invalid count {text:?}")))
    }
}

/// A scalar extended with `+inf`.
///
/// Ordering puts every finite value below `Infinite`. The arithmetic rules
/// are `1/inf = 0`, `1/0 = inf`, `x + inf = inf` and `min(x, inf) = x`.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub enum Ext<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Ext<T> {
    pub fn zero() -> Self {
        Ext::Finite(T::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ext::Finite(_))
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::Infinite => None,
        }
    }

    pub fn into_finite(self) -> Option<T> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::Infinite => None,
        }
    }

    pub fn recip(&self) -> Self {
        match self {
            Ext::Infinite => Ext::Finite(T::zero()),
            Ext::Finite(v) if v.is_zero() => Ext::Infinite,
            Ext::Finite(v) => Ext::Finite(T::one() / v.clone()),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => Ext::Finite(a.clone() + b.clone()),
            _ => Ext::Infinite,
        }
    }

    /// Multiplication for nonnegative operands; `0 * inf` is taken as `0`.
    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => Ext::Finite(a.clone() * b.clone()),
            (Ext::Finite(a), Ext::Infinite) | (Ext::Infinite, Ext::Finite(a)) if a.is_zero() => {
                Ext::zero()
            }
            _ => Ext::Infinite,
        }
    }

    pub fn min(&self, other: &Self) -> Self {
        match self.partial_cmp(other) {
            Some(Ordering::Greater) => other.clone(),
            _ => self.clone(),
        }
    }

    pub fn max(&self, other: &Self) -> Self {
        match self.partial_cmp(other) {
            Some(Ordering::Less) => other.clone(),
            _ => self.clone(),
        }
    }

    pub fn to_f64_lossy(&self) -> f64 {
        match self {
            Ext::Finite(v) => v.to_f64_lossy(),
            Ext::Infinite => f64::INFINITY,
        }
    }

    /// Harmonic ("series capacitor") combination: `(sum 1/x_k)^-1`.
    pub fn series<'a, I>(parts: I) -> Self
    where
        I: IntoIterator<Item = &'a Ext<T>>,
    {
        parts
            .into_iter()
            .fold(Ext::zero(), |acc, x| acc.add(&x.recip()))
            .recip()
    }
}

impl<T: Scalar> From<T> for Ext<T> {
    fn from(v: T) -> Self {
        Ext::Finite(v)
    }
}

impl<T: Display> Display for Ext<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Finite(v) => write!(f, "{v}"),
            Ext::Infinite => f.write_str("inf"),
        }
    }
}

/// Accepts `inf`/`infinity` (any case) as well as anything `T` parses.
pub fn is_infinity_token(s: &str) -> bool {
    let s = s.trim();
    s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity")
}

impl<T: Scalar> FromStr for Ext<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if is_infinity_token(s) {
            return Ok(Ext::Infinite);
        }
        T::parse_scalar(s).map(Ext::Finite)
    }
}

impl<T: Display> Serialize for Ext<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Ext<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = NumberOrString::deserialize(deserializer)?;
        raw.as_text().parse().map_err(de::Error::custom)
    }
}

/// JSON number or string; numbers are re-read through their text form so
/// integers stay exact.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum NumberOrString {
    Number(serde_json::Number),
    Text(String),
}

impl NumberOrString {
    pub(crate) fn as_text(&self) -> String {
        match self {
            NumberOrString::Number(n) => n.to_string(),
            NumberOrString::Text(s) => s.clone(),
        }
    }
}

/// Serde adapter writing a scalar as its `Display` text (`"p/q"` for rationals).
pub mod as_text {
    use super::*;

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        let raw = NumberOrString::deserialize(d)?;
        T::parse_scalar(&raw.as_text()).map_err(de::Error::custom)
    }
}

/// Six-significant-digit rendering for the `--decimal` output mode.
pub fn decimal6(v: f64) -> String {
    if v.is_infinite() {
        return "inf".to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Convenience constructor for exact rationals.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    type R = BigRational;

    #[test]
    fn infinity_rules() {
        let inf: Ext<R> = Ext::Infinite;
        let two: Ext<R> = Ext::Finite(ratio(2, 1));
        assert_eq!(inf.recip(), Ext::Finite(ratio(0, 1)));
        assert_eq!(Ext::<R>::zero().recip(), Ext::Infinite);
        assert_eq!(two.add(&inf), Ext::Infinite);
        assert_eq!(two.min(&inf), two);
        assert_eq!(inf.min(&two), two);
        assert!(two < inf);
    }

    #[test]
    fn series_combination() {
        let parts: Vec<Ext<R>> = vec![ratio(4, 3).into(), ratio(4, 3).into()];
        assert_eq!(Ext::series(&parts), Ext::Finite(ratio(2, 3)));
        let all_inf: Vec<Ext<R>> = vec![Ext::Infinite, Ext::Infinite];
        assert_eq!(Ext::series(&all_inf), Ext::Infinite);
    }

    #[test]
    fn text_round_trip() {
        let x: Ext<R> = "6/4".parse().unwrap();
        assert_eq!(x, Ext::Finite(ratio(3, 2)));
        assert_eq!(x.to_string(), "3/2");
        assert_eq!("INF".parse::<Ext<R>>().unwrap(), Ext::Infinite);
        assert!("1/0x".parse::<Ext<R>>().is_err());
        assert_eq!("0.25".parse::<Ext<R>>().unwrap(), Ext::Finite(ratio(1, 4)));
        assert_eq!(R::parse_scalar("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(R::parse_scalar(".1").unwrap(), ratio(1, 10));
        assert_eq!(Ratio::<i128>::parse_scalar("2.").unwrap(), Ratio::from_integer(2));
        for bad in [".", "1.2.3", "1e-3", "-", "0x1.5"] {
            assert!(R::parse_scalar(bad).is_err(), "{bad}");
        }
        assert_eq!(f64::parse_scalar(" 0.5 ").unwrap(), 0.5);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal6(2.0 / 3.0), "0.666667");
        assert_eq!(decimal6(199.0 / 200.0), "0.995000");
        assert_eq!(decimal6(1234.5678), "1234.57");
    }
}
