use serde::{Deserialize, Serialize};

use super::Spectrum;
use crate::error::{Error, Result};
use crate::imgio::ColorSpace;

/// JPEG-style zigzag traversal of a `height x width` index grid, low to high
/// frequency. Even anti-diagonals run bottom-left to top-right, odd ones the
/// other way.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZigzagOrder {
    width: usize,
    height: usize,
    /// Flat row-major index visited at each sequence position.
    perm: Vec<usize>,
}

impl ZigzagOrder {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("zigzag over {height}x{width}")));
        }
        let mut perm = Vec::with_capacity(width * height);
        for d in 0..height + width - 1 {
            let lo = d.saturating_sub(width - 1);
            let hi = d.min(height - 1);
            if d % 2 == 0 {
                for i in (lo..=hi).rev() {
                    perm.push(i * width + (d - i));
                }
            } else {
                for i in lo..=hi {
                    perm.push(i * width + (d - i));
                }
            }
        }
        Ok(Self {
            width,
            height,
            perm,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Flat indices in visit order.
    pub fn flat(&self) -> &[usize] {
        &self.perm
    }

    /// `(row, col)` pairs in visit order.
    pub fn positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.perm.iter().map(|&p| (p / self.width, p % self.width))
    }

    /// Reorders one row-major plane.
    pub fn scan(&self, plane: &[f64]) -> Result<Vec<f64>> {
        if plane.len() != self.perm.len() {
            return Err(Error::LengthMismatch {
                expected: self.perm.len(),
                actual: plane.len(),
            });
        }
        Ok(self.perm.iter().map(|&p| plane[p]).collect())
    }

    /// Inverse of [`scan`](Self::scan).
    pub fn unscan(&self, seq: &[f64]) -> Result<Vec<f64>> {
        if seq.len() != self.perm.len() {
            return Err(Error::LengthMismatch {
                expected: self.perm.len(),
                actual: seq.len(),
            });
        }
        let mut plane = vec![0.0; seq.len()];
        for (&p, &v) in self.perm.iter().zip(seq) {
            plane[p] = v;
        }
        Ok(plane)
    }
}

/// Convenience constructor mirroring [`ZigzagOrder::new`].
pub fn zigzag_order(height: usize, width: usize) -> Result<ZigzagOrder> {
    ZigzagOrder::new(height, width)
}

/// Flattens every channel of `spec` into its zigzag sequence.
pub fn apply_zigzag(spec: &Spectrum, order: &ZigzagOrder) -> Result<Vec<Vec<f64>>> {
    if (spec.height(), spec.width()) != (order.height, order.width) {
        return Err(Error::DimensionMismatch(format!(
            "spectrum {}x{} vs order {}x{}",
            spec.height(),
            spec.width(),
            order.height,
            order.width
        )));
    }
    spec.planes().iter().map(|p| order.scan(p)).collect()
}

/// Rebuilds a spectrum from per-channel zigzag sequences.
pub fn invert_zigzag(seq: &[Vec<f64>], order: &ZigzagOrder) -> Result<Spectrum> {
    let planes = seq
        .iter()
        .map(|s| order.unscan(s))
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(order.width, order.height, ColorSpace::Feature, planes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let z = ZigzagOrder::new(2, 2).unwrap();
        assert_eq!(z.positions().collect::<Vec<_>>(), vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn eight_by_eight_matches_jpeg_table() {
        // ISO/IEC 10918-1 Figure 5 zigzag, natural order index per position.
        const JPEG: [usize; 64] = [
            0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41,
            34, 27, 20, 13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30,
            37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
        ];
        assert_eq!(ZigzagOrder::new(8, 8).unwrap().flat(), &JPEG);
    }

    #[test]
    fn single_row_and_column() {
        assert_eq!(ZigzagOrder::new(1, 5).unwrap().flat(), &[0, 1, 2, 3, 4]);
        assert_eq!(ZigzagOrder::new(4, 1).unwrap().flat(), &[0, 1, 2, 3]);
    }

    #[test]
    fn length_checked() {
        let z = ZigzagOrder::new(3, 3).unwrap();
        assert!(matches!(z.scan(&[0.0; 8]), Err(Error::LengthMismatch { expected: 9, actual: 8 })));
        assert!(z.unscan(&[0.0; 10]).is_err());
    }
}
