//! Real-valued functions on the nonempty subsets of a ground set.
//!
//! Subsets are encoded as bit patterns over the ordered ground labels, with
//! the least significant bit standing for the first label. The value at the
//! empty set is identically zero and is not stored, so a function on a
//! ground set of `k` elements holds `2^k - 1` values, the value for mask `m`
//! living at index `m - 1`. This encoding is shared by the entropy vectors,
//! the linear programs and every file format that mentions subsets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ratio::Rat;

/// A function on all nonempty subsets of an ordered ground set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetFunction<T> {
    ground: Vec<String>,
    values: Vec<T>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SetFunctionError {
    #[error("expected {expected} subset values for ground size {ground}, got {got}")]
    LengthMismatch {
        ground: usize,
        expected: usize,
        got: usize,
    },
    #[error("unknown ground label: {0}")]
    UnknownLabel(String),
    #[error("subset mask {0:#x} out of range for ground size {1}")]
    MaskOutOfRange(usize, usize),
}

impl<T> SetFunction<T> {
    pub fn new(ground: Vec<String>, values: Vec<T>) -> Result<Self, SetFunctionError> {
        let expected = (1usize << ground.len()) - 1;
        if values.len() != expected {
            return Err(SetFunctionError::LengthMismatch {
                ground: ground.len(),
                expected,
                got: values.len(),
            });
        }
        Ok(SetFunction { ground, values })
    }

    pub fn ground(&self) -> &[String] {
        &self.ground
    }

    pub fn ground_size(&self) -> usize {
        self.ground.len()
    }

    /// Number of stored values, `2^k - 1`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn full_mask(&self) -> usize {
        (1usize << self.ground.len()) - 1
    }

    pub fn get(&self, mask: usize) -> Result<&T, SetFunctionError> {
        if mask == 0 || mask > self.full_mask() {
            return Err(SetFunctionError::MaskOutOfRange(mask, self.ground.len()));
        }
        Ok(&self.values[mask - 1])
    }

    pub fn set(&mut self, mask: usize, value: T) -> Result<(), SetFunctionError> {
        if mask == 0 || mask > self.full_mask() {
            return Err(SetFunctionError::MaskOutOfRange(mask, self.ground.len()));
        }
        self.values[mask - 1] = value;
        Ok(())
    }

    /// Iterate `(mask, value)` over all nonempty subsets in mask order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &T)> {
        self.values.iter().enumerate().map(|(i, v)| (i + 1, v))
    }

    pub fn mask_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize, SetFunctionError> {
        mask_of_labels(&self.ground, labels)
    }

    pub fn labels_of(&self, mask: usize) -> Vec<&str> {
        self.ground
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, l)| l.as_str())
            .collect()
    }
}

impl<T: Clone + Default> SetFunction<T> {
    pub fn zeroes(ground: Vec<String>) -> Self {
        let n = (1usize << ground.len()) - 1;
        SetFunction {
            ground,
            values: vec![T::default(); n],
        }
    }
}

impl SetFunction<Rat> {
    pub fn to_f64(&self) -> SetFunction<f64> {
        SetFunction {
            ground: self.ground.clone(),
            values: self.values.iter().map(Rat::to_f64).collect(),
        }
    }
}

impl<T: fmt::Display> fmt::Display for SetFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (mask, v) in self.iter() {
            writeln!(f, "h({}) = {}", self.labels_of(mask).join(","), v)?;
        }
        Ok(())
    }
}

/// Mask for a list of labels relative to an ordered ground set.
pub fn mask_of_labels<S: AsRef<str>>(
    ground: &[String],
    labels: &[S],
) -> Result<usize, SetFunctionError> {
    let mut mask = 0usize;
    for l in labels {
        let pos = ground
            .iter()
            .position(|g| g == l.as_ref())
            .ok_or_else(|| SetFunctionError::UnknownLabel(l.as_ref().to_string()))?;
        mask |= 1 << pos;
    }
    Ok(mask)
}

/// Iterate all nonempty submasks of `mask` in increasing numeric order.
pub fn submasks(mask: usize) -> impl Iterator<Item = usize> {
    (1..=mask).filter(move |s| s & mask == *s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_layout_lsb_first() {
        let mut f = SetFunction::<f64>::zeroes(vec!["a".into(), "b".into(), "c".into()]);
        f.set(0b001, 1.0).unwrap(); // {a}
        f.set(0b110, 5.0).unwrap(); // {b, c}
        assert_eq!(*f.get(0b001).unwrap(), 1.0);
        assert_eq!(*f.get(0b110).unwrap(), 5.0);
        assert_eq!(f.mask_of(&["b", "c"]).unwrap(), 0b110);
        assert_eq!(f.labels_of(0b101), vec!["a", "c"]);
        assert_eq!(f.len(), 7);
        assert!(f.get(0).is_err());
        assert!(f.get(8).is_err());
        assert!(f.mask_of(&["zz"]).is_err());
    }

    #[test]
    fn submask_enumeration() {
        let subs: Vec<usize> = submasks(0b101).collect();
        assert_eq!(subs, vec![0b001, 0b100, 0b101]);
    }
}
