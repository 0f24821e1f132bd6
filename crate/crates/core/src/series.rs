//! Return-probability series indexed by walk time.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEntry {
    /// Walk time `s`; the return index is `t = s/2`.
    pub s: u32,
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
}

/// `P[X_s = o]` for `s = 0..=s_max`, exact (`stderr = 0`) or averaged over samples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReturnSeries {
    pub entries: Vec<SeriesEntry>,
}

impl ReturnSeries {
    /// Exact series from per-time values.
    pub fn exact(values: &[f64]) -> Self {
        Self {
            entries: values
                .iter()
                .enumerate()
                .map(|(s, &value)| SeriesEntry { s: s as u32, value, stderr: 0.0, n: 1 })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn value(&self, s: u32) -> Option<f64> {
        self.entries.get(s as usize).filter(|e| e.s == s).map(|e| e.value)
    }

    /// `R_t = P[X_{2t} = o]` for `t = 0, 1, …`.
    pub fn by_return_index(&self) -> Vec<(u32, SeriesEntry)> {
        self.entries.iter().filter(|e| e.s % 2 == 0).map(|e| (e.s / 2, *e)).collect()
    }

    /// Checks the structural properties every produced series must have.
    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.entries.iter().enumerate() {
            if e.s as usize != i {
                return Err(Error::InvalidParameter(format!("entry {i} has walk time {}", e.s)));
            }
            if !(0.0..=1.0).contains(&e.value) {
                return Err(Error::InvalidParameter(format!("value {} at s = {} is outside [0,1]", e.value, e.s)));
            }
            if e.s % 2 == 1 && e.value != 0.0 {
                return Err(Error::InvalidParameter(format!("odd time {} has nonzero return value", e.s)));
            }
            if e.s >= 2 && e.value >= 1.0 {
                return Err(Error::InvalidParameter(format!("return value 1 at s = {}", e.s)));
            }
        }
        if self.entries.first().is_some_and(|e| e.value != 1.0) {
            return Err(Error::InvalidParameter("value at s = 0 must be 1".into()));
        }
        Ok(())
    }
}
