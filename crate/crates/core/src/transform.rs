//! Forward and inverse discrete cosine transforms over square blocks and
//! cubic volumes.
//!
//! The transforms are separable: a shared orthonormal basis matrix is applied
//! along each axis in turn, so the 2D and 3D versions reduce to repeated 1D
//! passes. All arithmetic is `f64`; samples are used exactly as given, with
//! no level shift before the forward pass.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Square block of real-valued samples or transform coefficients,
/// stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Block2d {
    n: usize,
    data: Vec<f64>,
}

impl Block2d {
    /// Builds a block from row-major data. The side length must be at least 1,
    /// `data` must hold exactly `n * n` values, and every value must be finite.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("block side must be at least 1".into()));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: data.len() });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("block values must be finite".into()));
        }
        Ok(Block2d { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "block side must be at least 1");
        Block2d { n, data: vec![0.0; n * n] }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        assert!(n >= 1, "block side must be at least 1");
        assert!(value.is_finite(), "block values must be finite");
        Block2d { n, data: vec![value; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.n + col] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Cubic block of real-valued samples or transform coefficients. The third
/// index selects the layer (the temporal axis for video, the slice axis for
/// volumes); layers are stored contiguously, each one row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Block3d {
    n: usize,
    data: Vec<f64>,
}

impl Block3d {
    /// Builds a cube from layer-major data (`data[(layer * n + row) * n + col]`).
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("cube side must be at least 1".into()));
        }
        if data.len() != n * n * n {
            return Err(Error::DimensionMismatch { expected: n * n * n, got: data.len() });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("cube values must be finite".into()));
        }
        Ok(Block3d { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "cube side must be at least 1");
        Block3d { n, data: vec![0.0; n * n * n] }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        assert!(n >= 1, "cube side must be at least 1");
        assert!(value.is_finite(), "cube values must be finite");
        Block3d { n, data: vec![value; n * n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, layer: usize) -> f64 {
        self.data[(layer * self.n + row) * self.n + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, layer: usize, value: f64) {
        self.data[(layer * self.n + row) * self.n + col] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Orthonormal cosine basis of order `n`.
///
/// Row `i` holds the basis vector
/// `c[i][j] = a(i) * cos(pi * (2j + 1) * i / (2n))` with `a(0) = 1/sqrt(n)`
/// and `a(i) = sqrt(2/n)` otherwise, so `C * C^T = I` and the inverse
/// transform is the transpose.
#[derive(Clone, Debug)]
pub struct DctBasis {
    n: usize,
    c: Vec<f64>,
}

impl DctBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("basis order must be at least 1".into()));
        }
        let mut c = vec![0.0; n * n];
        let norm_dc = 1.0 / (n as f64).sqrt();
        let norm_ac = (2.0 / n as f64).sqrt();
        for i in 0..n {
            let norm = if i == 0 { norm_dc } else { norm_ac };
            for j in 0..n {
                c[i * n + j] =
                    norm * (PI * (2 * j + 1) as f64 * i as f64 / (2 * n) as f64).cos();
            }
        }
        Ok(DctBasis { n, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Basis matrix entry `c[i][j]`.
    #[inline]
    pub fn coef(&self, i: usize, j: usize) -> f64 {
        self.c[i * self.n + j]
    }

    /// Forward 1D transform: `out[u] = sum_j coef(u, j) * input[j]`.
    pub fn forward_1d(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_len(input.len())?;
        let n = self.n;
        let mut out = vec![0.0; n];
        for (u, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &x) in input.iter().enumerate() {
                acc += self.c[u * n + j] * x;
            }
            *slot = acc;
        }
        Ok(out)
    }

    /// Inverse 1D transform: `out[j] = sum_u coef(u, j) * input[u]`.
    pub fn inverse_1d(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_len(input.len())?;
        let n = self.n;
        let mut out = vec![0.0; n];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (u, &s) in input.iter().enumerate() {
                acc += self.c[u * n + j] * s;
            }
            *slot = acc;
        }
        Ok(out)
    }

    /// Forward 2D transform, rows then columns (`C * X * C^T`).
    pub fn forward_2d(&self, block: &Block2d) -> Result<Block2d> {
        self.check_len(block.n)?;
        let n = self.n;
        // Rows first: tmp = C * X.
        let mut tmp = vec![0.0; n * n];
        for u in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for m in 0..n {
                    acc += self.c[u * n + m] * block.data[m * n + j];
                }
                tmp[u * n + j] = acc;
            }
        }
        // Then columns: out = tmp * C^T.
        let mut out = Block2d::zeros(n);
        for u in 0..n {
            for v in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += tmp[u * n + j] * self.c[v * n + j];
                }
                out.data[u * n + v] = acc;
            }
        }
        Ok(out)
    }

    /// Inverse 2D transform (`C^T * S * C`).
    pub fn inverse_2d(&self, block: &Block2d) -> Result<Block2d> {
        self.check_len(block.n)?;
        let n = self.n;
        let mut tmp = vec![0.0; n * n];
        for m in 0..n {
            for v in 0..n {
                let mut acc = 0.0;
                for u in 0..n {
                    acc += self.c[u * n + m] * block.data[u * n + v];
                }
                tmp[m * n + v] = acc;
            }
        }
        let mut out = Block2d::zeros(n);
        for m in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for v in 0..n {
                    acc += tmp[m * n + v] * self.c[v * n + j];
                }
                out.data[m * n + j] = acc;
            }
        }
        Ok(out)
    }

    /// Forward 3D transform: a 2D transform per layer, then a 1D transform
    /// along the layer axis for every (row, col) position.
    pub fn forward_3d(&self, cube: &Block3d) -> Result<Block3d> {
        self.check_len(cube.n)?;
        let n = self.n;
        let mut mid = Block3d::zeros(n);
        let mut layer = Block2d::zeros(n);
        for k in 0..n {
            layer.data.copy_from_slice(&cube.data[k * n * n..(k + 1) * n * n]);
            let t = self.forward_2d(&layer)?;
            mid.data[k * n * n..(k + 1) * n * n].copy_from_slice(&t.data);
        }
        let mut out = Block3d::zeros(n);
        let mut line = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = mid.get(i, j, k);
                }
                let t = self.forward_1d(&line)?;
                for (k, &v) in t.iter().enumerate() {
                    out.set(i, j, k, v);
                }
            }
        }
        Ok(out)
    }

    /// Inverse 3D transform: undoes the layer-axis pass, then each layer.
    pub fn inverse_3d(&self, cube: &Block3d) -> Result<Block3d> {
        self.check_len(cube.n)?;
        let n = self.n;
        let mut mid = Block3d::zeros(n);
        let mut line = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = cube.get(i, j, k);
                }
                let t = self.inverse_1d(&line)?;
                for (k, &v) in t.iter().enumerate() {
                    mid.set(i, j, k, v);
                }
            }
        }
        let mut out = Block3d::zeros(n);
        let mut layer = Block2d::zeros(n);
        for k in 0..n {
            layer.data.copy_from_slice(&mid.data[k * n * n..(k + 1) * n * n]);
            let t = self.inverse_2d(&layer)?;
            out.data[k * n * n..(k + 1) * n * n].copy_from_slice(&t.data);
        }
        Ok(out)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got });
        }
        Ok(())
    }
}

/// Direct-summation reference transforms.
///
/// These evaluate the defining sums term by term, with the normalization
/// factors applied inside the loop, and share no code with the separable
/// implementations above. They exist to pin down correctness; complexity is
/// O(n^4) and O(n^6), so keep `n` small.
pub mod oracle {
    use super::{Block2d, Block3d};
    use std::f64::consts::PI;

    fn alpha(i: usize, n: usize) -> f64 {
        if i == 0 {
            1.0 / (n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        }
    }

    /// `S[u][v] = a(u) a(v) sum_m sum_n x[m][n] cos((2m+1)u pi / 2N) cos((2n+1)v pi / 2N)`.
    pub fn dct2d_direct(block: &Block2d) -> Block2d {
        let n = block.n();
        assert!(n <= 8, "direct summation is only meant for small blocks");
        let mut out = Block2d::zeros(n);
        for u in 0..n {
            for v in 0..n {
                let mut acc = 0.0;
                for m in 0..n {
                    for p in 0..n {
                        acc += block.get(m, p)
                            * (PI * (2 * m + 1) as f64 * u as f64 / (2 * n) as f64).cos()
                            * (PI * (2 * p + 1) as f64 * v as f64 / (2 * n) as f64).cos();
                    }
                }
                out.set(u, v, alpha(u, n) * alpha(v, n) * acc);
            }
        }
        out
    }

    /// Triple-sum version of `dct2d_direct` with a third cosine factor for
    /// the layer axis.
    pub fn dct3d_direct(cube: &Block3d) -> Block3d {
        let n = cube.n();
        assert!(n <= 8, "direct summation is only meant for small blocks");
        let mut out = Block3d::zeros(n);
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    let mut acc = 0.0;
                    for m in 0..n {
                        for p in 0..n {
                            for q in 0..n {
                                acc += cube.get(m, p, q)
                                    * (PI * (2 * m + 1) as f64 * u as f64 / (2 * n) as f64)
                                        .cos()
                                    * (PI * (2 * p + 1) as f64 * v as f64 / (2 * n) as f64)
                                        .cos()
                                    * (PI * (2 * q + 1) as f64 * w as f64 / (2 * n) as f64)
                                        .cos();
                            }
                        }
                    }
                    out.set(u, v, w, alpha(u, n) * alpha(v, n) * alpha(w, n) * acc);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_abs_diff_2d(a: &Block2d, b: &Block2d) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn max_abs_diff_3d(a: &Block3d, b: &Block3d) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn random_block_2d(rng: &mut impl Rng, n: usize, max: u32) -> Block2d {
        let data = (0..n * n).map(|_| rng.gen_range(0..=max) as f64).collect();
        Block2d::new(n, data).unwrap()
    }

    fn random_block_3d(rng: &mut impl Rng, n: usize, max: u32) -> Block3d {
        let data = (0..n * n * n).map(|_| rng.gen_range(0..=max) as f64).collect();
        Block3d::new(n, data).unwrap()
    }

    #[test]
    fn basis_rows_are_orthonormal() {
        for n in [1usize, 2, 3, 4, 5, 8, 16] {
            let basis = DctBasis::new(n).unwrap();
            for a in 0..n {
                for b in 0..n {
                    let dot: f64 = (0..n).map(|j| basis.coef(a, j) * basis.coef(b, j)).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!(
                        (dot - want).abs() <= 1e-12,
                        "n={n} rows {a},{b}: dot={dot}"
                    );
                }
            }
        }
    }

    #[test]
    fn forward_1d_dc_is_scaled_mean() {
        let basis = DctBasis::new(8).unwrap();
        let v = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let out = basis.forward_1d(&v).unwrap();
        let want = v.iter().sum::<f64>() / 8f64.sqrt();
        assert!((out[0] - want).abs() <= 1e-12);
    }

    #[test]
    fn forward_1d_order_two_examples() {
        let basis = DctBasis::new(2).unwrap();
        let flat = basis.forward_1d(&[1.0, 1.0]).unwrap();
        assert!((flat[0] - 2f64.sqrt()).abs() <= 1e-12, "flat input: {flat:?}");
        assert!(flat[1].abs() <= 1e-12, "flat input: {flat:?}");
        let alt = basis.forward_1d(&[1.0, -1.0]).unwrap();
        assert!(alt[0].abs() <= 1e-12, "alternating input: {alt:?}");
        assert!((alt[1] - 2f64.sqrt()).abs() <= 1e-12, "alternating input: {alt:?}");
    }

    #[test]
    fn constant_block_concentrates_in_dc() {
        let basis = DctBasis::new(8).unwrap();
        let coeffs = basis.forward_2d(&Block2d::constant(8, 255.0)).unwrap();
        // 255 * 8: every sample contributes 1/8 to the DC basis product.
        assert!((coeffs.get(0, 0) - 2040.0).abs() <= 1e-9, "dc={}", coeffs.get(0, 0));
        for u in 0..8 {
            for v in 0..8 {
                if u != 0 || v != 0 {
                    assert!(coeffs.get(u, v).abs() <= 1e-9, "({u},{v})={}", coeffs.get(u, v));
                }
            }
        }
    }

    #[test]
    fn constant_cube_concentrates_in_dc() {
        let basis = DctBasis::new(8).unwrap();
        let coeffs = basis.forward_3d(&Block3d::constant(8, 255.0)).unwrap();
        // 255 * 8^(3/2): the constant basis function has weight n^(-3/2) per cell.
        let want = 255.0 * 8f64.powf(1.5);
        assert!((coeffs.get(0, 0, 0) - want).abs() <= 0.01, "dc={}", coeffs.get(0, 0, 0));
        for u in 0..8 {
            for v in 0..8 {
                for w in 0..8 {
                    if u != 0 || v != 0 || w != 0 {
                        assert!(
                            coeffs.get(u, v, w).abs() <= 1e-9,
                            "({u},{v},{w})={}",
                            coeffs.get(u, v, w)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn separable_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x2d3d);
        for n in [2usize, 4, 8] {
            let basis = DctBasis::new(n).unwrap();
            for _ in 0..50 {
                let b = random_block_2d(&mut rng, n, 4095);
                let fast = basis.forward_2d(&b).unwrap();
                let slow = oracle::dct2d_direct(&b);
                assert!(max_abs_diff_2d(&fast, &slow) <= 1e-9, "n={n}");

                let c = random_block_3d(&mut rng, n, 4095);
                let fast3 = basis.forward_3d(&c).unwrap();
                let slow3 = oracle::dct3d_direct(&c);
                assert!(max_abs_diff_3d(&fast3, &slow3) <= 1e-9, "n={n}");
            }
        }
    }

    #[test]
    fn row_column_order_does_not_matter() {
        // Columns-first evaluation of the same product, written out by hand.
        fn forward_2d_cols_first(basis: &DctBasis, block: &Block2d) -> Block2d {
            let n = basis.n();
            let mut tmp = vec![0.0; n * n];
            for m in 0..n {
                for v in 0..n {
                    let mut acc = 0.0;
                    for p in 0..n {
                        acc += block.get(m, p) * basis.coef(v, p);
                    }
                    tmp[m * n + v] = acc;
                }
            }
            let mut out = Block2d::zeros(n);
            for u in 0..n {
                for v in 0..n {
                    let mut acc = 0.0;
                    for m in 0..n {
                        acc += basis.coef(u, m) * tmp[m * n + v];
                    }
                    out.set(u, v, acc);
                }
            }
            out
        }

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let basis = DctBasis::new(8).unwrap();
        for _ in 0..200 {
            let b = random_block_2d(&mut rng, 8, 4095);
            let rows_first = basis.forward_2d(&b).unwrap();
            let cols_first = forward_2d_cols_first(&basis, &b);
            assert!(max_abs_diff_2d(&rows_first, &cols_first) <= 1e-9);
        }
    }

    #[test]
    fn energy_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let basis = DctBasis::new(8).unwrap();
        for _ in 0..100 {
            let b = random_block_3d(&mut rng, 8, 4095);
            let t = basis.forward_3d(&b).unwrap();
            let in_energy: f64 = b.data().iter().map(|v| v * v).sum();
            let out_energy: f64 = t.data().iter().map(|v| v * v).sum();
            assert!((in_energy - out_energy).abs() <= 1e-9 * in_energy.max(1.0));
        }
    }

    #[test]
    fn mismatched_sizes_are_rejected() {
        let basis = DctBasis::new(8).unwrap();
        assert!(matches!(
            basis.forward_2d(&Block2d::zeros(4)),
            Err(Error::DimensionMismatch { expected: 8, got: 4 })
        ));
        assert!(matches!(
            basis.forward_1d(&[0.0; 3]),
            Err(Error::DimensionMismatch { expected: 8, got: 3 })
        ));
        assert!(matches!(
            basis.inverse_3d(&Block3d::zeros(2)),
            Err(Error::DimensionMismatch { expected: 8, got: 2 })
        ));
        assert!(DctBasis::new(0).is_err());
        assert!(Block2d::new(2, vec![0.0; 3]).is_err());
        assert!(Block2d::new(2, vec![0.0, 0.0, 0.0, f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_2d(values in proptest::collection::vec(0u16..=4095, 64)) {
            let basis = DctBasis::new(8).unwrap();
            let b = Block2d::new(8, values.iter().map(|&v| v as f64).collect()).unwrap();
            let back = basis.inverse_2d(&basis.forward_2d(&b).unwrap()).unwrap();
            prop_assert!(max_abs_diff_2d(&b, &back) <= 1e-6);
        }

        #[test]
        fn roundtrip_3d(values in proptest::collection::vec(0u16..=4095, 512)) {
            let basis = DctBasis::new(8).unwrap();
            let b = Block3d::new(8, values.iter().map(|&v| v as f64).collect()).unwrap();
            let back = basis.inverse_3d(&basis.forward_3d(&b).unwrap()).unwrap();
            prop_assert!(max_abs_diff_3d(&b, &back) <= 1e-6);
        }
    }
}
