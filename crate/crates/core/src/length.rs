//! Lengths that may be unbounded.
//!
//! Focal distance of a straight piece, the double-critical distance of a curve
//! with no doubly-normal chord and a few bound calculations are genuinely
//! infinite. They are carried as [`Length::Unbounded`] rather than a large
//! float so that `min` stays exact.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// A nonnegative length, or the unbounded sentinel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Length {
    Finite(f64),
    Unbounded,
}

impl Length {
    pub fn finite(self) -> Option<f64> {
        match self {
            Length::Finite(v) => Some(v),
            Length::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Length::Unbounded)
    }

    /// Finite value, or `fallback` for the sentinel.
    pub fn or(self, fallback: f64) -> f64 {
        self.finite().unwrap_or(fallback)
    }

    pub fn min(self, other: Length) -> Length {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn half(self) -> Length {
        self.scale(0.5)
    }

    pub fn scale(self, factor: f64) -> Length {
        match self {
            Length::Finite(v) => Length::Finite(v * factor),
            Length::Unbounded => Length::Unbounded,
        }
    }

    /// `1/x` with `1/0` mapped to the sentinel.
    pub fn reciprocal_of(x: f64) -> Length {
        if x == 0.0 {
            Length::Unbounded
        } else {
            Length::Finite(1.0 / x)
        }
    }
}

impl PartialOrd for Length {
    fn partial_cmp(&self, other: &Length) -> Option<Ordering> {
        match (self, other) {
            (Length::Finite(a), Length::Finite(b)) => a.partial_cmp(b),
            (Length::Finite(_), Length::Unbounded) => Some(Ordering::Less),
            (Length::Unbounded, Length::Finite(_)) => Some(Ordering::Greater),
            (Length::Unbounded, Length::Unbounded) => Some(Ordering::Equal),
        }
    }
}

impl From<f64> for Length {
    fn from(v: f64) -> Length {
        if v.is_infinite() && v > 0.0 {
            Length::Unbounded
        } else {
            Length::Finite(v)
        }
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Finite(v) => write!(f, "{v}"),
            Length::Unbounded => f.write_str("unbounded"),
        }
    }
}

// JSON: a plain number, or the string "unbounded".
impl Serialize for Length {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Length::Finite(v) => s.serialize_f64(*v),
            Length::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Length, D::Error> {
        struct LengthVisitor;

        impl Visitor<'_> for LengthVisitor {
            type Value = Length;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"unbounded\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Length, E> {
                Ok(Length::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Length, E> {
                Ok(Length::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Length, E> {
                Ok(Length::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Length, E> {
                if v == "unbounded" {
                    Ok(Length::Unbounded)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        d.deserialize_any(LengthVisitor)
    }
}
