//! Validated scalar sample batches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A batch of finite scalar samples. Construction rejects NaN and infinity so
/// downstream accumulation never has to re-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SampleBatch {
    values: Vec<f64>,
}

impl SampleBatch {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }
}

impl TryFrom<Vec<f64>> for SampleBatch {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<SampleBatch> for Vec<f64> {
    fn from(batch: SampleBatch) -> Self {
        batch.values
    }
}

impl<'a> IntoIterator for &'a SampleBatch {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.values.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_finite_values() {
        let batch = SampleBatch::new(vec![0.0, -1.5, 1e300]).unwrap();
        assert_eq!(batch.len(), 3);
        assert_eq!(batch.as_slice(), &[0.0, -1.5, 1e300]);
    }

    #[test]
    fn empty_batch_is_fine() {
        let batch = SampleBatch::new(vec![]).unwrap();
        assert!(batch.is_empty());
    }

    #[test]
    fn rejects_non_finite_with_index() {
        let err = SampleBatch::new(vec![0.0, 1.0, f64::NAN, 3.0]).unwrap_err();
        match err {
            Error::NonFiniteSample { index } => assert_eq!(index, 2),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(SampleBatch::new(vec![f64::INFINITY]).is_err());
        assert!(SampleBatch::new(vec![f64::NEG_INFINITY]).is_err());
    }

    #[test]
    fn serde_validates_on_the_way_in() {
        let batch = SampleBatch::new(vec![1.0, 2.0]).unwrap();
        let text = serde_json::to_string(&batch).unwrap();
        assert_eq!(text, "[1.0,2.0]");
        let back: SampleBatch = serde_json::from_str(&text).unwrap();
        assert_eq!(back, batch);
        assert!(serde_json::from_str::<SampleBatch>("[1.0,null]").is_err());
    }
}
