//! Coefficient scan orders: the 2D zig-zag and its layer-by-layer 3D
//! extension, plus serialization of level blocks to and from flat vectors.

use crate::error::{Error, Result};
use crate::quant::{Levels2d, Levels3d};

/// Visit order over an `n x n` block that walks anti-diagonals from DC
/// outward, alternating direction so consecutive cells stay adjacent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanOrder2d {
    n: usize,
    order: Vec<(usize, usize)>,
}

impl ScanOrder2d {
    pub fn zigzag(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("scan order side must be at least 1".into()));
        }
        let mut order = Vec::with_capacity(n * n);
        for d in 0..=(2 * n - 2) {
            let lo = d.saturating_sub(n - 1);
            let hi = d.min(n - 1);
            if d % 2 == 1 {
                // Odd diagonals walk down (row increasing).
                for row in lo..=hi {
                    order.push((row, d - row));
                }
            } else {
                for row in (lo..=hi).rev() {
                    order.push((row, d - row));
                }
            }
        }
        Ok(ScanOrder2d { n, order })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> &[(usize, usize)] {
        &self.order
    }

    pub fn serialize(&self, levels: &Levels2d) -> Result<Vec<i32>> {
        if levels.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: levels.n() });
        }
        Ok(self.order.iter().map(|&(r, c)| levels.get(r, c)).collect())
    }

    pub fn deserialize(&self, flat: &[i32]) -> Result<Levels2d> {
        if flat.len() != self.n * self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n * self.n,
                got: flat.len(),
            });
        }
        let mut data = vec![0i32; self.n * self.n];
        for (&v, &(r, c)) in flat.iter().zip(&self.order) {
            data[r * self.n + c] = v;
        }
        Levels2d::new(self.n, data)
    }
}

/// Visit order over an `n x n x n` cube: each layer in sequence, zig-zag
/// within the layer. Layer 0 holds the lowest layer-axis frequency, so all
/// of its cells come first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanOrder3d {
    n: usize,
    order: Vec<(usize, usize, usize)>,
}

impl ScanOrder3d {
    pub fn layered(n: usize) -> Result<Self> {
        let plane = ScanOrder2d::zigzag(n)?;
        let mut order = Vec::with_capacity(n * n * n);
        for layer in 0..n {
            for &(r, c) in plane.order() {
                order.push((r, c, layer));
            }
        }
        Ok(ScanOrder3d { n, order })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> &[(usize, usize, usize)] {
        &self.order
    }

    pub fn serialize(&self, levels: &Levels3d) -> Result<Vec<i32>> {
        if levels.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: levels.n() });
        }
        Ok(self.order.iter().map(|&(r, c, l)| levels.get(r, c, l)).collect())
    }

    pub fn deserialize(&self, flat: &[i32]) -> Result<Levels3d> {
        if flat.len() != self.n * self.n * self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n * self.n * self.n,
                got: flat.len(),
            });
        }
        let mut data = vec![0i32; self.n * self.n * self.n];
        for (&v, &(r, c, l)) in flat.iter().zip(&self.order) {
            data[(l * self.n + r) * self.n + c] = v;
        }
        Levels3d::new(self.n, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn zigzag_starts_at_dc_and_alternates() {
        let scan = ScanOrder2d::zigzag(8).unwrap();
        assert_eq!(
            &scan.order()[..6],
            &[(0, 0), (0, 1), (1, 0), (2, 0), (1, 1), (0, 2)]
        );
        // First row coefficient lands right after the first column one.
        assert_eq!(scan.order()[2], (1, 0));
        assert_eq!(*scan.order().last().unwrap(), (7, 7));
    }

    #[test]
    fn zigzag_is_a_permutation_with_adjacent_diagonals() {
        for n in [1usize, 2, 3, 4, 8, 16] {
            let scan = ScanOrder2d::zigzag(n).unwrap();
            let seen: HashSet<_> = scan.order().iter().copied().collect();
            assert_eq!(seen.len(), n * n, "n={n}");
            assert!(scan.order().iter().all(|&(r, c)| r < n && c < n));
            for pair in scan.order().windows(2) {
                let d0 = pair[0].0 + pair[0].1;
                let d1 = pair[1].0 + pair[1].1;
                assert!(d1 == d0 || d1 == d0 + 1, "n={n}: {pair:?}");
            }
        }
        assert!(ScanOrder2d::zigzag(0).is_err());
    }

    #[test]
    fn layered_scan_finishes_each_layer_before_the_next() {
        let scan = ScanOrder3d::layered(8).unwrap();
        assert_eq!(scan.order().len(), 512);
        for (pos, &(r, c, l)) in scan.order().iter().enumerate() {
            assert_eq!(l, pos / 64, "position {pos}");
            let plane = ScanOrder2d::zigzag(8).unwrap();
            assert_eq!((r, c), plane.order()[pos % 64]);
        }
    }

    #[test]
    fn serialize_places_row_neighbor_third() {
        let mut data = vec![0i32; 64];
        data[8] = 7; // cell (1,0)
        let levels = Levels2d::new(8, data).unwrap();
        let flat = ScanOrder2d::zigzag(8).unwrap().serialize(&levels).unwrap();
        assert_eq!(flat[2], 7);
        assert_eq!(flat.iter().filter(|&&v| v != 0).count(), 1);
    }

    #[test]
    fn size_mismatches_are_rejected() {
        let scan = ScanOrder2d::zigzag(8).unwrap();
        let small = Levels2d::new(4, vec![0; 16]).unwrap();
        assert!(scan.serialize(&small).is_err());
        assert!(scan.deserialize(&[0; 63]).is_err());
        let scan3 = ScanOrder3d::layered(8).unwrap();
        assert!(scan3.deserialize(&[0; 511]).is_err());
    }

    proptest! {
        #[test]
        fn scan_roundtrip_2d(values in proptest::collection::vec(-2048i32..=2048, 64)) {
            let scan = ScanOrder2d::zigzag(8).unwrap();
            let levels = Levels2d::new(8, values).unwrap();
            let flat = scan.serialize(&levels).unwrap();
            prop_assert_eq!(scan.deserialize(&flat).unwrap(), levels);
        }

        #[test]
        fn scan_roundtrip_3d(values in proptest::collection::vec(-2048i32..=2048, 512)) {
            let scan = ScanOrder3d::layered(8).unwrap();
            let levels = Levels3d::new(8, values).unwrap();
            let flat = scan.serialize(&levels).unwrap();
            prop_assert_eq!(scan.deserialize(&flat).unwrap(), levels);
        }
    }
}
