use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Layout of a sequence chunked into equal windows, zero-padded at the end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPartition {
    pub window_len: usize,
    pub count: usize,
    pub pad: usize,
}

impl WindowPartition {
    pub fn for_len(len: usize, window_len: usize) -> Result<Self> {
        if window_len == 0 {
            return Err(Error::PartitionMetadataMismatch("window_len must be >= 1".into()));
        }
        let count = len.div_ceil(window_len);
        Ok(Self {
            window_len,
            count,
            pad: count * window_len - len,
        })
    }

    /// Length of the unpadded sequence.
    pub fn seq_len(&self) -> usize {
        self.count * self.window_len - self.pad
    }
}

pub fn window_partition(seq: &[f64], window_len: usize) -> Result<(Vec<Vec<f64>>, WindowPartition)> {
    let part = WindowPartition::for_len(seq.len(), window_len)?;
    let windows = seq
        .chunks(window_len)
        .map(|c| {
            let mut w = c.to_vec();
            w.resize(window_len, 0.0);
            w
        })
        .collect();
    Ok((windows, part))
}

pub fn window_reverse(windows: &[Vec<f64>], part: &WindowPartition) -> Result<Vec<f64>> {
    if part.window_len == 0 || part.pad >= part.window_len {
        return Err(Error::PartitionMetadataMismatch(format!(
            "pad {} with window_len {}",
            part.pad, part.window_len
        )));
    }
    if windows.len() != part.count {
        return Err(Error::PartitionMetadataMismatch(format!(
            "{} windows, metadata says {}",
            windows.len(),
            part.count
        )));
    }
    if let Some(w) = windows.iter().find(|w| w.len() != part.window_len) {
        return Err(Error::PartitionMetadataMismatch(format!(
            "window of length {}, expected {}",
            w.len(),
            part.window_len
        )));
    }
    let mut seq: Vec<f64> = windows.iter().flatten().copied().collect();
    seq.truncate(part.seq_len());
    Ok(seq)
}
