use serde::{Deserialize, Serialize};

use crate::kahan::KahanSum;
use crate::Error;

/// Default tolerance for the simplex-sum check. The bundled reference
/// distributions are 3-decimal and sum exactly; ingested data may not.
pub const DEFAULT_SUM_TOLERANCE: f64 = 1e-9;

/// Validated probability mass function over an `n`-letter alphabet, `n ≥ 1`.
///
/// Validation rejects instead of renormalizing, so a recorded experiment
/// input is exactly the vector that produced the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    values: Vec<f64>,
}

impl Pmf {
    /// Validates `values`: non-empty, no entry below `−tolerance`, sum within
    /// `1 ± tolerance`. Entries are stored as given.
    pub fn new(values: Vec<f64>, tolerance: f64) -> Result<Self, Error> {
        if values.is_empty() {
            return Err(Error::EmptyPmf);
        }
        for (index, &value) in values.iter().enumerate() {
            // `!(x >= t)` also rejects NaN entries.
            if !(value >= -tolerance) {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        let mut acc = KahanSum::default();
        for &value in &values {
            acc.add(value);
        }
        let sum = acc.value();
        if !((sum - 1.0).abs() <= tolerance) {
            return Err(Error::BadSum { sum, tolerance });
        }
        Ok(Self { values })
    }

    /// Validation with [`DEFAULT_SUM_TOLERANCE`].
    pub fn validated(values: Vec<f64>) -> Result<Self, Error> {
        Self::new(values, DEFAULT_SUM_TOLERANCE)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Never true: validation requires `n ≥ 1`.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self, Error> {
        Self::validated(values)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(pmf: Pmf) -> Vec<f64> {
        pmf.values
    }
}

impl AsRef<[f64]> for Pmf {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// The positive exponent `k` applied to each pairwise difference, moderating
/// its impact relative to the other letters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct KParam(f64);

impl KParam {
    pub fn new(k: f64) -> Result<Self, Error> {
        if k.is_finite() && k > 0.0 {
            Ok(Self(k))
        } else {
            Err(Error::NotPositive { name: "k", value: k })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for KParam {
    type Error = Error;

    fn try_from(k: f64) -> Result<Self, Error> {
        Self::new(k)
    }
}

impl From<KParam> for f64 {
    fn from(k: KParam) -> f64 {
        k.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_reference_distribution() {
        let pmf = Pmf::validated(vec![0.238, 0.013, 0.749]).unwrap();
        assert_eq!(pmf.len(), 3);
        assert_eq!(pmf.values(), &[0.238, 0.013, 0.749]);
    }

    #[test]
    fn accepts_single_letter_alphabet() {
        let pmf = Pmf::validated(vec![1.0]).unwrap();
        assert_eq!(pmf.len(), 1);
    }

    #[test]
    fn rejects_bad_sum() {
        match Pmf::validated(vec![0.5, 0.6]) {
            Err(Error::BadSum { sum, .. }) => assert!((sum - 1.1).abs() < 1e-12),
            other => panic!("expected BadSum, got {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_entry() {
        match Pmf::validated(vec![1.2, -0.2]) {
            Err(Error::NegativeEntry { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected NegativeEntry, got {other:?}"),
        }
    }

    #[test]
    fn rejects_empty() {
        assert_eq!(Pmf::validated(vec![]), Err(Error::EmptyPmf));
    }

    #[test]
    fn rejects_nan_entry() {
        assert!(matches!(
            Pmf::validated(vec![f64::NAN, 1.0]),
            Err(Error::NegativeEntry { index: 0, .. })
        ));
    }

    #[test]
    fn tolerance_is_overridable() {
        let values = vec![0.5, 0.501];
        assert!(Pmf::new(values.clone(), 1e-9).is_err());
        assert!(Pmf::new(values, 1e-2).is_ok());
    }

    #[test]
    fn deserialization_revalidates() {
        let ok: Result<Pmf, _> = serde_json::from_str("[0.25, 0.75]");
        assert!(ok.is_ok());
        let bad: Result<Pmf, _> = serde_json::from_str("[0.5, 0.6]");
        assert!(bad.is_err());
    }

    #[test]
    fn k_must_be_positive_and_finite() {
        assert!(KParam::new(0.2).is_ok());
        assert!(KParam::new(50.0).is_ok());
        assert!(KParam::new(0.0).is_err());
        assert!(KParam::new(-1.0).is_err());
        assert!(KParam::new(f64::INFINITY).is_err());
        assert!(KParam::new(f64::NAN).is_err());
    }
}
