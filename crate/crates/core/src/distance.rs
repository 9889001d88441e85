use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A non-negative game distance that may be infinite.
///
/// Every finite value orders below [`Distance::Infinite`], and incrementing
/// saturates: `∞ + 1 = ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(u32),
    Infinite,
}

impl Distance {
    pub const ZERO: Distance = Distance::Finite(0);

    pub fn succ(self) -> Distance {
        match self {
            Distance::Finite(d) => Distance::Finite(d + 1),
            Distance::Infinite => Distance::Infinite,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        !self.is_finite()
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

impl From<u32> for Distance {
    fn from(d: u32) -> Self {
        Distance::Finite(d)
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid distance `{0}` (expected a non-negative integer or `inf`)")]
pub struct ParseDistanceError(String);

impl FromStr for Distance {
    type Err = ParseDistanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "∞" => Ok(Distance::Infinite),
            t => t
                .parse::<u32>()
                .map(Distance::Finite)
                .map_err(|_| ParseDistanceError(s.to_string())),
        }
    }
}

impl Serialize for Distance {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Distance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn infinity_absorbs_increment() {
        assert_eq!(Distance::Infinite.succ(), Distance::Infinite);
        assert_eq!(Distance::Finite(4).succ(), Distance::Finite(5));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("inf".parse::<Distance>().unwrap(), Distance::Infinite);
        assert_eq!("7".parse::<Distance>().unwrap(), Distance::Finite(7));
        assert!("-1".parse::<Distance>().is_err());
        assert_eq!(Distance::Infinite.to_string(), "inf");
    }

    proptest! {
        #[test]
        fn finite_below_infinity(a in 0u32..1_000_000) {
            prop_assert!(Distance::Finite(a) < Distance::Infinite);
            prop_assert!(Distance::Finite(a) < Distance::Finite(a).succ());
        }
    }
}
