//! Valuations normalized by v(p) = 1, as exact rationals.
//!
//! A computed valuation is either an exact rational, +infinity (the canonical
//! zero), or a certified lower bound `AtLeast(c)` when the working precision
//! cannot pin the value.  Comparisons against bounds are explicit so that an
//! ambiguous case can raise `PrecisionExhausted` instead of guessing.

use std::fmt;

use num::rational::BigRational;
use num::{BigInt, One, Signed, Zero};

use crate::error::{Error, Result};

/// A valuation in (1/(e p^n)) Z, or a precision-limited lower bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    Exact(BigRational),
    AtLeast(BigRational),
    Infinite,
}

/// Convenience constructor for num/den rationals.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Renders a rational as "a/b" in lowest terms, omitting "/1".
pub fn format_rat(q: &BigRational) -> String {
    if q.denom().is_one() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl Valuation {
    pub fn exact(num: i64, den: i64) -> Valuation {
        Valuation::Exact(rat(num, den))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Valuation::Exact(q) => Some(q),
            _ => None,
        }
    }

    /// Whether the valuation is certainly >= bound; errors when the answer is
    /// not determined at the working precision.
    pub fn ge_bound(&self, bound: &BigRational) -> Result<bool> {
        match self {
            Valuation::Infinite => Ok(true),
            Valuation::Exact(q) => Ok(q >= bound),
            Valuation::AtLeast(c) => {
                if c >= bound {
                    Ok(true)
                } else {
                    Err(Error::PrecisionExhausted(format!(
                        "only know valuation >= {}, cannot compare against {}",
                        format_rat(c),
                        format_rat(bound)
                    )))
                }
            }
        }
    }

    /// Adds an exact rational offset; bounds shift with the offset.
    pub fn add_rat(&self, offset: &BigRational) -> Valuation {
        match self {
            Valuation::Infinite => Valuation::Infinite,
            Valuation::Exact(q) => Valuation::Exact(q + offset),
            Valuation::AtLeast(c) => Valuation::AtLeast(c + offset),
        }
    }

    /// Minimum of two valuations.  Errors when a bound overlaps an exact value
    /// (the minimum would be a guess).
    pub fn min(&self, other: &Valuation) -> Result<Valuation> {
        use Valuation::*;
        Ok(match (self, other) {
            (Infinite, v) => v.clone(),
            (v, Infinite) => v.clone(),
            (Exact(a), Exact(b)) => Exact(a.min(b).clone()),
            (Exact(a), AtLeast(c)) | (AtLeast(c), Exact(a)) => {
                if c > a {
                    Exact(a.clone())
                } else {
                    return Err(Error::PrecisionExhausted(format!(
                        "minimum of {} and a bound >= {} is ambiguous",
                        format_rat(a),
                        format_rat(c)
                    )));
                }
            }
            (AtLeast(a), AtLeast(b)) => AtLeast(a.min(b).clone()),
        })
    }

    /// Parses the display form back: "a/b", "+inf", or ">= a/b" (the space
    /// after ">=" is optional).
    pub fn parse(text: &str) -> Option<Valuation> {
        let text = text.trim();
        if text == "+inf" {
            return Some(Valuation::Infinite);
        }
        if let Some(rest) = text.strip_prefix(">=") {
            return rest.trim().parse().ok().map(Valuation::AtLeast);
        }
        text.parse().ok().map(Valuation::Exact)
    }

    /// Strict equality of two exact values (Infinite equals Infinite).
    /// Errors when either side is only bounded.
    pub fn eq_exact(&self, other: &Valuation) -> Result<bool> {
        use Valuation::*;
        match (self, other) {
            (Infinite, Infinite) => Ok(true),
            (Exact(a), Exact(b)) => Ok(a == b),
            (Infinite, Exact(_)) | (Exact(_), Infinite) => Ok(false),
            _ => Err(Error::PrecisionExhausted(
                "equality test on a precision-limited valuation".into(),
            )),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(q) => write!(out, "{}", format_rat(q)),
            Valuation::AtLeast(c) => write!(out, ">= {}", format_rat(c)),
            Valuation::Infinite => write!(out, "+inf"),
        }
    }
}

/// Exact p-adic valuation of a nonzero rational, as a rational integer;
/// None for zero.
pub fn padic_val_rational(q: &BigRational, p: u64) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v: i64 = 0;
    let mut numer = q.numer().abs();
    while (&numer % &p).is_zero() {
        numer /= &p;
        v += 1;
    }
    let mut denom = q.denom().abs();
    while (&denom % &p).is_zero() {
        denom /= &p;
        v -= 1;
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_rules() {
        assert_eq!(Valuation::exact(5, 6).to_string(), "5/6");
        assert_eq!(Valuation::exact(-1, 2).to_string(), "-1/2");
        assert_eq!(Valuation::exact(2, 1).to_string(), "2");
        assert_eq!(Valuation::Infinite.to_string(), "+inf");
        assert_eq!(Valuation::AtLeast(rat(3, 1)).to_string(), ">= 3");
    }

    #[test]
    fn parse_round_trips_the_display() {
        for v in [
            Valuation::exact(5, 6),
            Valuation::exact(-7, 2),
            Valuation::AtLeast(rat(-1, 3)),
            Valuation::Infinite,
        ] {
            assert_eq!(Valuation::parse(&v.to_string()), Some(v));
        }
        assert_eq!(
            Valuation::parse(">=3/4"),
            Some(Valuation::AtLeast(rat(3, 4)))
        );
        assert_eq!(Valuation::parse("x"), None);
    }

    #[test]
    fn min_and_bounds() {
        let a = Valuation::exact(1, 2);
        let b = Valuation::exact(3, 4);
        assert_eq!(a.min(&b).unwrap(), a);
        assert_eq!(Valuation::Infinite.min(&b).unwrap(), b);
        // Bound strictly above the exact value: resolved.
        let c = Valuation::AtLeast(rat(2, 1));
        assert_eq!(a.min(&c).unwrap(), a);
        // Overlapping bound: ambiguous.
        let d = Valuation::AtLeast(rat(1, 4));
        assert!(a.min(&d).is_err());
    }

    #[test]
    fn padic_valuation_of_rationals() {
        assert_eq!(padic_val_rational(&rat(12, 1), 2), Some(2));
        assert_eq!(padic_val_rational(&rat(1, 8), 2), Some(-3));
        assert_eq!(padic_val_rational(&rat(-9, 4), 3), Some(2));
        assert_eq!(padic_val_rational(&rat(0, 1), 3), None);
    }

    #[test]
    fn ge_bound_cases() {
        let bound = rat(0, 1);
        assert!(Valuation::Infinite.ge_bound(&bound).unwrap());
        assert!(Valuation::exact(1, 2).ge_bound(&bound).unwrap());
        assert!(!Valuation::exact(-1, 2).ge_bound(&bound).unwrap());
        assert!(Valuation::AtLeast(rat(1, 1)).ge_bound(&bound).unwrap());
        assert!(Valuation::AtLeast(rat(-1, 1)).ge_bound(&bound).is_err());
    }
}
