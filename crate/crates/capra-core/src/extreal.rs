//! Extended reals with the Moreau lower and upper additions.
//!
//! Conjugacy arithmetic has to resolve `(+inf) + (-inf)`, and the two
//! Moreau additions resolve it in opposite directions: the lower
//! addition returns `-inf` (used inside suprema), the upper addition
//! returns `+inf` (used inside infima). IEEE floats give NaN instead,
//! so infinities are kept as tagged variants and only converted to
//! `f64` at module boundaries.

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// An element of [-inf, +inf]. Finite payloads are never NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

pub use ExtReal::{Finite, NegInf, PosInf};

impl ExtReal {
    /// Converts an IEEE float, mapping `±inf` to the infinite variants.
    ///
    /// Panics on NaN: a NaN reaching conjugacy logic is a bug upstream.
    pub fn from_f64(v: f64) -> Self {
        assert!(!v.is_nan(), "NaN cannot be converted to ExtReal");
        if v == f64::INFINITY {
            PosInf
        } else if v == f64::NEG_INFINITY {
            NegInf
        } else {
            Finite(v)
        }
    }

    /// Converts back to IEEE, with `±inf` for the infinite variants.
    pub fn to_f64(self) -> f64 {
        match self {
            NegInf => f64::NEG_INFINITY,
            Finite(v) => v,
            PosInf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Finite(_))
    }

    /// Finite payload, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn neg(self) -> Self {
        match self {
            NegInf => PosInf,
            Finite(v) => Finite(-v),
            PosInf => NegInf,
        }
    }

    /// Moreau lower addition: `(+inf) + (-inf) = -inf`.
    pub fn lower_add(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a + b),
            (NegInf, _) | (_, NegInf) => NegInf,
            (PosInf, _) | (_, PosInf) => PosInf,
        }
    }

    /// Moreau upper addition: `(+inf) + (-inf) = +inf`.
    pub fn upper_add(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a + b),
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }
}

/// Lower addition as a free function, matching the operation tables.
pub fn lower_add(a: ExtReal, b: ExtReal) -> ExtReal {
    a.lower_add(b)
}

/// Upper addition as a free function.
pub fn upper_add(a: ExtReal, b: ExtReal) -> ExtReal {
    a.upper_add(b)
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let rank = |e: &ExtReal| match e {
            NegInf => 0u8,
            Finite(_) => 1,
            PosInf => 2,
        };
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            _ => rank(self).partial_cmp(&rank(other)),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => write!(f, "-inf"),
            Finite(v) => write!(f, "{v}"),
            PosInf => write!(f, "inf"),
        }
    }
}

// JSON form: a finite number, or the strings "inf" / "-inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Finite(v) => serializer.serialize_f64(*v),
            PosInf => serializer.serialize_str("inf"),
            NegInf => serializer.serialize_str("-inf"),
        }
    }
}

struct ExtRealVisitor;

impl Visitor<'_> for ExtRealVisitor {
    type Value = ExtReal;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a finite number or one of the strings \"inf\", \"-inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
        if v.is_nan() {
            return Err(E::custom("NaN is not an extended real"));
        }
        Ok(ExtReal::from_f64(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
        Ok(Finite(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
        Ok(Finite(v as f64))
    }

    fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<ExtReal, E> {
        match s {
            "inf" | "+inf" => Ok(PosInf),
            "-inf" => Ok(NegInf),
            _ => s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Finite)
                .ok_or_else(|| E::custom(format!("not an extended real: {s:?}"))),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        deserializer.deserialize_any(ExtRealVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LATTICE: [ExtReal; 5] = [NegInf, Finite(-2.5), Finite(0.0), Finite(3.0), PosInf];

    #[test]
    fn lower_add_table() {
        assert_eq!(lower_add(Finite(2.0), Finite(3.0)), Finite(5.0));
        assert_eq!(lower_add(PosInf, NegInf), NegInf);
        assert_eq!(lower_add(NegInf, PosInf), NegInf);
        assert_eq!(lower_add(NegInf, Finite(7.0)), NegInf);
        assert_eq!(lower_add(PosInf, Finite(7.0)), PosInf);
    }

    #[test]
    fn upper_add_table() {
        assert_eq!(upper_add(Finite(2.0), Finite(3.0)), Finite(5.0));
        assert_eq!(upper_add(PosInf, NegInf), PosInf);
        assert_eq!(upper_add(NegInf, PosInf), PosInf);
        assert_eq!(upper_add(PosInf, Finite(7.0)), PosInf);
        assert_eq!(upper_add(NegInf, Finite(7.0)), NegInf);
    }

    #[test]
    fn both_additions_commute_and_associate_on_lattice() {
        for &a in &LATTICE {
            for &b in &LATTICE {
                assert_eq!(lower_add(a, b), lower_add(b, a));
                assert_eq!(upper_add(a, b), upper_add(b, a));
                for &c in &LATTICE {
                    assert_eq!(
                        lower_add(lower_add(a, b), c),
                        lower_add(a, lower_add(b, c))
                    );
                    assert_eq!(
                        upper_add(upper_add(a, b), c),
                        upper_add(a, upper_add(b, c))
                    );
                }
            }
        }
    }

    #[test]
    fn lower_below_upper_on_lattice() {
        for &a in &LATTICE {
            for &b in &LATTICE {
                assert!(lower_add(a, b) <= upper_add(a, b));
            }
        }
    }

    #[test]
    fn ordering_is_the_obvious_one() {
        assert!(NegInf < Finite(-1e300));
        assert!(Finite(1e300) < PosInf);
        assert!(Finite(1.0) < Finite(2.0));
        assert!(NegInf < PosInf);
    }

    #[test]
    fn json_round_trip() {
        for (e, s) in [
            (Finite(1.5), "1.5"),
            (PosInf, "\"inf\""),
            (NegInf, "\"-inf\""),
        ] {
            assert_eq!(serde_json::to_string(&e).unwrap(), s);
            assert_eq!(serde_json::from_str::<ExtReal>(s).unwrap(), e);
        }
        assert_eq!(serde_json::from_str::<ExtReal>("3").unwrap(), Finite(3.0));
    }

    proptest! {
        #[test]
        fn additions_coincide_with_plus_when_finite(a in -1e12f64..1e12, b in -1e12f64..1e12) {
            prop_assert_eq!(lower_add(Finite(a), Finite(b)), Finite(a + b));
            prop_assert_eq!(upper_add(Finite(a), Finite(b)), Finite(a + b));
        }

        #[test]
        fn additions_with_one_finite_agree(a in -1e12f64..1e12) {
            for inf in [NegInf, PosInf] {
                prop_assert_eq!(lower_add(Finite(a), inf), upper_add(Finite(a), inf));
            }
        }
    }
}
