//! The Chen-Sbert divergence, its two-letter closed form, and the
//! Kullback-Leibler / Jensen-Shannon baselines. Base-2 logarithms throughout.

use std::f64::consts::LN_2;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::kahan::KahanSum;
use crate::{Error, KParam, Pmf};

/// `log2(|a − b|^k + 1)` — the contribution shape shared by every operation
/// in this crate. `ln_1p` keeps tiny gaps accurate; `0^k = 0` for any `k > 0`,
/// so no special case is needed there.
pub(crate) fn gap_term(a: f64, b: f64, k: f64) -> f64 {
    let gap = (a - b).abs();
    let powered = if k == 1.0 { gap } else { gap.powf(k) };
    powered.ln_1p() / LN_2
}

fn check_lengths(p: &Pmf, q: &Pmf) -> Result<(), Error> {
    if p.len() == q.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        })
    }
}

pub(crate) fn unit_range(name: &'static str, value: f64) -> Result<(), Error> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value })
    }
}

/// Chen-Sbert divergence over slices whose validity the caller guarantees.
/// Shared by the public entry point and by the search hot loop, so both
/// routes produce bit-identical values.
pub(crate) fn chen_sbert_slices(p: &[f64], q: &[f64], k: f64) -> f64 {
    let mut acc = KahanSum::default();
    for (&pi, &qi) in p.iter().zip(q) {
        acc.add((pi + qi) * gap_term(pi, qi, k));
    }
    0.5 * acc.value()
}

/// Chen-Sbert divergence
/// `D(P,Q) = 1/2 · Σ (p_i + q_i) · log2(|p_i − q_i|^k + 1)`.
///
/// Symmetric in `(P, Q)`, zero exactly when `P = Q`, and bounded by `[0, 1]`
/// since every gap is at most 1 and the weights sum to 2.
pub fn chen_sbert(p: &Pmf, q: &Pmf, k: KParam) -> Result<f64, Error> {
    check_lengths(p, q)?;
    Ok(chen_sbert_slices(p.values(), q.values(), k.get()))
}

/// Two-letter closed form: for `P = {p, 1−p}` and `Q = {q, 1−q}` the measure
/// collapses to `log2(|p − q|^k + 1)` because both letters carry the same gap
/// and the weights sum to 2.
pub fn chen_sbert_binary(p: f64, q: f64, k: KParam) -> Result<f64, Error> {
    unit_range("p", p)?;
    unit_range("q", q)?;
    Ok(gap_term(p, q, k.get()))
}

/// A non-negative real or the positive-infinity marker: the value set of the
/// KL divergence, which blows up as soon as `Q` misses support that `P` has.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PositiveInfinity,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn as_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PositiveInfinity => f64::INFINITY,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            ExtendedReal::Finite(v)
        } else {
            ExtendedReal::PositiveInfinity
        }
    }
}

// JSON cannot carry IEEE infinities, so the marker serializes as the string
// "inf" and finite values as plain numbers.
impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => serializer.serialize_f64(*v),
            ExtendedReal::PositiveInfinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ExtendedRealVisitor;

        impl Visitor<'_> for ExtendedRealVisitor {
            type Value = ExtendedReal;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtendedReal, E> {
                Ok(ExtendedReal::from(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtendedReal, E> {
                Ok(ExtendedReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtendedReal, E> {
                Ok(ExtendedReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtendedReal, E> {
                match v {
                    "inf" => Ok(ExtendedReal::PositiveInfinity),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        deserializer.deserialize_any(ExtendedRealVisitor)
    }
}

/// Kullback-Leibler divergence `Σ p_i · log2(p_i / q_i)` with the usual
/// conventions: terms with `p_i = 0` contribute nothing, and any letter with
/// `p_i > 0` but `q_i = 0` makes the whole divergence infinite.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<ExtendedReal, Error> {
    check_lengths(p, q)?;
    let mut acc = KahanSum::default();
    for (&pi, &qi) in p.values().iter().zip(q.values()) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return Ok(ExtendedReal::PositiveInfinity);
        }
        acc.add(pi * (pi / qi).log2());
    }
    Ok(ExtendedReal::Finite(acc.value()))
}

/// Jensen-Shannon divergence `(KL(P‖M) + KL(Q‖M)) / 2` with `M = (P+Q)/2`.
/// Always finite (the mixture dominates both inputs) and within `[0, 1]`
/// in base 2.
pub fn js_divergence(p: &Pmf, q: &Pmf) -> Result<f64, Error> {
    check_lengths(p, q)?;
    let mut acc = KahanSum::default();
    for (&pi, &qi) in p.values().iter().zip(q.values()) {
        let m = 0.5 * (pi + qi);
        if pi > 0.0 {
            acc.add(0.5 * pi * (pi / m).log2());
        }
        if qi > 0.0 {
            acc.add(0.5 * qi * (qi / m).log2());
        }
    }
    Ok(acc.value())
}

/// Square root of the Jensen-Shannon divergence, which is a metric.
pub fn js_metric(p: &Pmf, q: &Pmf) -> Result<f64, Error> {
    // max(0) guards the sqrt against −1e−17-scale rounding when P ≈ Q.
    Ok(js_divergence(p, q)?.max(0.0).sqrt())
}
