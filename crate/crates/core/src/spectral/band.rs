use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frequency index bound `k`. Applied per axis and clamped to each axis's
/// maximum index on non-square planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyCutoff(pub usize);

impl FrequencyCutoff {
    /// Validates `k <= max(height, width) - 1`.
    pub fn checked(k: usize, height: usize, width: usize) -> Result<Self> {
        let max = height.max(width).saturating_sub(1);
        if k > max {
            return Err(Error::CutoffOutOfRange { k, max });
        }
        Ok(Self(k))
    }

    /// Per-axis bounds `(row_k, col_k)`.
    pub fn clamp_to(self, height: usize, width: usize) -> (usize, usize) {
        (self.0.min(height - 1), self.0.min(width - 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandKind {
    /// `{(0,0)}`
    Zero,
    /// `[0,k]^2` without the DC index.
    Low,
    /// `{(i,j) : i >= k or j >= k}`
    High,
    /// `[0,k]^2` including DC; the region swapped by progressive filling.
    Square,
}

/// A set of `(row, col)` spectral indices on a `height x width` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BandMask {
    pub kind: BandKind,
    pub k: FrequencyCutoff,
    pub width: usize,
    pub height: usize,
}

impl BandMask {
    pub fn new(kind: BandKind, k: usize, height: usize, width: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage("empty plane".into()));
        }
        Ok(Self {
            kind,
            k: FrequencyCutoff::checked(k, height, width)?,
            width,
            height,
        })
    }

    pub fn zero(height: usize, width: usize) -> Result<Self> {
        Self::new(BandKind::Zero, 0, height, width)
    }

    pub fn low(k: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(BandKind::Low, k, height, width)
    }

    pub fn high(k: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(BandKind::High, k, height, width)
    }

    pub fn square(k: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(BandKind::Square, k, height, width)
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        let (ki, kj) = self.k.clamp_to(self.height, self.width);
        match self.kind {
            BandKind::Zero => i == 0 && j == 0,
            BandKind::Low => i <= ki && j <= kj && (i, j) != (0, 0),
            BandKind::High => i >= ki || j >= kj,
            BandKind::Square => i <= ki && j <= kj,
        }
    }

    /// Flat row-major indices of the mask, ascending.
    pub fn indices(&self) -> Vec<usize> {
        let (ki, kj) = self.k.clamp_to(self.height, self.width);
        match self.kind {
            BandKind::Zero => vec![0],
            BandKind::Low | BandKind::Square => {
                let mut out = Vec::with_capacity((ki + 1) * (kj + 1));
                for i in 0..=ki {
                    for j in 0..=kj {
                        if self.kind == BandKind::Square || (i, j) != (0, 0) {
                            out.push(i * self.width + j);
                        }
                    }
                }
                out
            }
            BandKind::High => (0..self.width * self.height)
                .filter(|&idx| self.contains(idx / self.width, idx % self.width))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_low_high_shapes() {
        let z = BandMask::zero(4, 4).unwrap();
        assert_eq!(z.indices(), vec![0]);
        let low = BandMask::low(1, 4, 4).unwrap();
        assert_eq!(low.indices(), vec![1, 4, 5]);
        let high = BandMask::high(3, 4, 4).unwrap();
        assert_eq!(high.indices(), vec![3, 7, 11, 12, 13, 14, 15]);
        let all = BandMask::high(0, 3, 5).unwrap();
        assert_eq!(all.len(), 15);
    }

    #[test]
    fn cutoff_bounds() {
        assert!(BandMask::low(4, 4, 4).is_err());
        assert!(BandMask::low(3, 4, 4).is_ok());
        // non-square: clamps per axis
        let m = BandMask::square(5, 2, 8).unwrap();
        assert_eq!(m.indices().len(), 2 * 6);
    }

    proptest! {
        #[test]
        fn masks_cover_everything(h in 1usize..12, w in 1usize..12, k in 0usize..12) {
            let k = k.min(h.max(w) - 1);
            let z = BandMask::zero(h, w).unwrap();
            let l = BandMask::low(k, h, w).unwrap();
            let hi = BandMask::high(k, h, w).unwrap();
            let sq = BandMask::square(k, h, w).unwrap();
            let (ki, kj) = FrequencyCutoff(k).clamp_to(h, w);
            for i in 0..h {
                for j in 0..w {
                    prop_assert!(z.contains(i, j) || l.contains(i, j) || hi.contains(i, j));
                    prop_assert_eq!(sq.contains(i, j), z.contains(i, j) || l.contains(i, j));
                    prop_assert!(!(z.contains(i, j) && l.contains(i, j)));
                    // low/high overlap only on the boundary row/column of [0,k]^2
                    if l.contains(i, j) && hi.contains(i, j) {
                        prop_assert!(i == ki || j == kj);
                    }
                }
            }
            for m in [z, l, hi, sq] {
                let idx = m.indices();
                prop_assert!(idx.windows(2).all(|p| p[0] < p[1]));
                prop_assert!(idx.iter().all(|&x| m.contains(x / w, x % w)));
                let count = (0..h * w).filter(|&x| m.contains(x / w, x % w)).count();
                prop_assert_eq!(count, idx.len());
            }
        }
    }
}
