//! Scalar abstraction shared by the numeric engines.
//!
//! Value iteration, Q-learning and belief filtering are written once over
//! [`Scalar`] and instantiated with `f64`, `f32`, or the exact
//! [`BigRational`] type. Probabilities always enter as exact dice ratios
//! ([`Prob`]) and are converted with [`Scalar::from_prob`], so the exact
//! instantiation never sees a rounding error.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// An exact probability as handed out by the dice model.
pub type Prob = Ratio<u64>;

pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + Send + Sync + 'static {
    /// Exact conversion for floats up to rounding, lossless for rationals.
    fn from_prob(p: &Prob) -> Self;

    /// Lossless for rationals (every finite double is a dyadic rational).
    ///
    /// Panics on non-finite input when `Self` is exact.
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Parse a decimal (`"0.9"`) or ratio (`"9/10"`) literal. Exact types keep
    /// the decimal meaning rather than its binary approximation.
    fn parse_literal(s: &str) -> Option<Self>;

    fn from_usize(n: usize) -> Self {
        Self::from_prob(&Prob::from_integer(n as u64))
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_prob(p: &Prob) -> Self {
                (*p.numer() as f64 / *p.denom() as f64) as $t
            }

            fn from_f64(x: f64) -> Self {
                x as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn parse_literal(s: &str) -> Option<Self> {
                let s = s.trim();
                match s.split_once('/') {
                    Some((n, d)) => {
                        let n: f64 = n.trim().parse().ok()?;
                        let d: f64 = d.trim().parse().ok()?;
                        (d != 0.0).then(|| (n / d) as $t)
                    }
                    None => s.parse::<f64>().ok().map(|x| x as $t),
                }
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

impl Scalar for BigRational {
    fn from_prob(p: &Prob) -> Self {
        BigRational::new(BigInt::from(*p.numer()), BigInt::from(*p.denom()))
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("exact scalar from non-finite float")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse_literal(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            return (!d.is_zero()).then(|| BigRational::new(n, d));
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits: BigInt = format!("{int}{frac}").parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10u8), frac.len());
        let value = BigRational::new(digits, scale);
        Some(if neg { -value } else { value })
    }
}

/// Sum of a slice without assuming `Copy`.
pub fn sum<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, x| acc + x.clone())
}

/// Sup-norm distance between two equally long vectors.
pub fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (x, y)| {
        T::max_of(m, (x.clone() - y.clone()).abs())
    })
}

pub(crate) fn prob_to_string(p: &Prob) -> String {
    format!("{}/{}", p.numer(), p.denom())
}
