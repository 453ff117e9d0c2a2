//! Fixed histogram featurizer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::DelayRecord;

/// Geometry of the histogram layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub n_bins: usize,
    pub tau_min: f64,
    pub tau_max: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self { n_bins: 700, tau_min: 0.0, tau_max: 100.0 }
    }
}

impl HistogramSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_bins == 0 || !(self.tau_max > self.tau_min) {
            return Err(Error::InvalidConfig(format!(
                "histogram needs n_bins >= 1 and tau_max > tau_min, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        (self.tau_max - self.tau_min) / self.n_bins as f64
    }

    /// Bin index for a delay; `tau_max` lands in the last bin, delays
    /// outside the range are dropped.
    pub fn bin_index(&self, tau: f64) -> Option<usize> {
        if !tau.is_finite() || tau < self.tau_min || tau > self.tau_max {
            return None;
        }
        let idx = ((tau - self.tau_min) / self.bin_width()) as usize;
        Some(idx.min(self.n_bins - 1))
    }
}

/// Raw (un-normalized) bin counts of a record's delays.
pub fn histogram_features(record: &DelayRecord, spec: &HistogramSpec) -> Vec<u32> {
    let mut counts = vec![0u32; spec.n_bins];
    for &tau in &record.delays {
        if let Some(idx) = spec.bin_index(tau) {
            counts[idx] += 1;
        }
    }
    counts
}

/// Sparse (bin, count) pairs sorted by bin index. The fixed ordering makes
/// the downstream affine layer bitwise permutation-invariant.
pub(crate) fn sparse_features(delays: &[f64], spec: &HistogramSpec) -> Vec<(u32, f64)> {
    let mut bins: Vec<u32> = delays
        .iter()
        .filter_map(|&tau| spec.bin_index(tau).map(|i| i as u32))
        .collect();
    bins.sort_unstable();
    let mut out: Vec<(u32, f64)> = Vec::with_capacity(bins.len());
    for b in bins {
        match out.last_mut() {
            Some((prev, c)) if *prev == b => *c += 1.0,
            _ => out.push((b, 1.0)),
        }
    }
    out
}
