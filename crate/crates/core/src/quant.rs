//! Quantization tables, quality scaling, and the 3D quantization cube.
//!
//! The 2D tables are the perceptually derived luminance and chrominance step
//! matrices used by baseline JPEG. The 3D cube extends the luminance table:
//! its three faces carry the 2D steps, low-frequency interior cells average
//! the face cells on the same anti-diagonal plane, and high-frequency interior
//! cells get one large fixed step.

use crate::error::{Error, Result};
use crate::transform::{Block2d, Block3d};

/// Luminance quantization steps at the nominal quality operating point.
pub const LUMA_STEPS: [[u16; 8]; 8] = [
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
];

/// Chrominance quantization steps at the nominal quality operating point.
pub const CHROMA_STEPS: [[u16; 8]; 8] = [
    [17, 18, 24, 47, 99, 99, 99, 99],
    [18, 21, 26, 66, 99, 99, 99, 99],
    [24, 26, 56, 99, 99, 99, 99, 99],
    [47, 66, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
];

/// Interior step for cube cells whose 1-based index sum is 18 or more.
pub const HIGH_FREQ_STEP: f64 = 100.0;

/// Quality setting in `1..=100`. 50 is the nominal operating point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QualityFactor(u8);

impl QualityFactor {
    pub fn new(q: u8) -> Result<Self> {
        if !(1..=100).contains(&q) {
            return Err(Error::InvalidArgument(format!(
                "quality must be in 1..=100, got {q}"
            )));
        }
        Ok(QualityFactor(q))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Multiplier applied to the nominal step tables: 1.0 at q=50, larger
    /// steps below 50 (50/q), smaller above (2 - q/50, reaching 0 at q=100).
    pub fn scale(self) -> f64 {
        let q = self.0 as f64;
        if self.0 >= 50 {
            2.0 - q / 50.0
        } else {
            50.0 / q
        }
    }
}

/// Square table of quantization steps. Every step is at least 1.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantTable {
    n: usize,
    steps: Vec<f64>,
}

impl QuantTable {
    pub fn luma() -> Self {
        Self::from_nominal(&LUMA_STEPS)
    }

    pub fn chroma() -> Self {
        Self::from_nominal(&CHROMA_STEPS)
    }

    fn from_nominal(nominal: &[[u16; 8]; 8]) -> Self {
        let steps = nominal.iter().flatten().map(|&s| s as f64).collect();
        QuantTable { n: 8, steps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.steps[row * self.n + col]
    }

    /// Rescales every step by `factor`, rounding to the nearest integer and
    /// clamping at 1 so the table stays usable even at factor 0.
    pub fn scaled(&self, factor: f64) -> Result<QuantTable> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be finite and non-negative, got {factor}"
            )));
        }
        let steps = self.steps.iter().map(|s| (s * factor).round().max(1.0)).collect();
        Ok(QuantTable { n: self.n, steps })
    }

    /// One CSV row per table row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in 0..self.n {
            let line: Vec<String> =
                (0..self.n).map(|col| format!("{}", self.get(row, col))).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<QuantTable> {
        let steps = parse_csv_steps(text)?;
        let n = (steps.len() as f64).sqrt().round() as usize;
        if n == 0 || n * n != steps.len() {
            return Err(Error::InvalidArgument(format!(
                "table csv must hold a square count of steps, got {}",
                steps.len()
            )));
        }
        Ok(QuantTable { n, steps })
    }
}

/// Cubic table of quantization steps for 3D coefficients, plus the scale that
/// was applied when it was built. Layout matches `Block3d` (layer-major).
#[derive(Clone, Debug, PartialEq)]
pub struct QuantCube {
    n: usize,
    steps: Vec<f64>,
    scale: f64,
}

impl QuantCube {
    /// Builds the cube from a 2D table.
    ///
    /// Face cells (any 1-based index equal to 1) copy the 2D table: the first
    /// layer takes `table[i][j]`, then the remaining cells of the `j=1` wall
    /// take `table[i][k]`, then the remaining cells of the `i=1` wall take
    /// `table[j][k]`; a cell on more than one face keeps the first value in
    /// that order. Interior cells with 1-based index sum up to 17 take the
    /// rounded mean of the face cells with the same index sum; the rest take
    /// `hf_step`. Finally every step is multiplied by `scale` and clamped
    /// to at least 1.
    pub fn build(table: &QuantTable, scale: f64, hf_step: f64) -> Result<QuantCube> {
        if table.n() != 8 {
            return Err(Error::UnsupportedSize(table.n()));
        }
        if !scale.is_finite() || scale < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "scale must be finite and non-negative, got {scale}"
            )));
        }
        if !hf_step.is_finite() || hf_step < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "high-frequency step must be at least 1, got {hf_step}"
            )));
        }
        let n = 8usize;
        let idx = |i: usize, j: usize, k: usize| (k * n + i) * n + j;
        let mut steps = vec![0.0f64; n * n * n];
        let mut assigned = vec![false; n * n * n];

        let mut put = |steps: &mut Vec<f64>, assigned: &mut Vec<bool>, i, j, k, v| {
            if !assigned[idx(i, j, k)] {
                steps[idx(i, j, k)] = v;
                assigned[idx(i, j, k)] = true;
            }
        };
        for i in 0..n {
            for j in 0..n {
                put(&mut steps, &mut assigned, i, j, 0, table.get(i, j));
            }
        }
        for i in 0..n {
            for k in 0..n {
                put(&mut steps, &mut assigned, i, 0, k, table.get(i, k));
            }
        }
        for j in 0..n {
            for k in 0..n {
                put(&mut steps, &mut assigned, 0, j, k, table.get(j, k));
            }
        }

        for i in 1..n {
            for j in 1..n {
                for k in 1..n {
                    // 1-based index sum of the cell; 18 and up is high frequency.
                    let sum = i + j + k + 3;
                    let v = if sum >= 18 {
                        hf_step
                    } else {
                        let mut acc = 0.0;
                        let mut count = 0u32;
                        for a in 0..n {
                            for b in 0..n {
                                for c in 0..n {
                                    if (a == 0 || b == 0 || c == 0) && a + b + c == i + j + k {
                                        acc += steps[idx(a, b, c)];
                                        count += 1;
                                    }
                                }
                            }
                        }
                        (acc / count as f64).round()
                    };
                    steps[idx(i, j, k)] = v;
                }
            }
        }

        for s in &mut steps {
            *s = (*s * scale).max(1.0);
        }
        Ok(QuantCube { n, steps, scale })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, layer: usize) -> f64 {
        self.steps[(layer * self.n + row) * self.n + col]
    }

    /// One CSV row per cube row, layers in order (layer-major, 64 rows of 8).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for layer in 0..self.n {
            for row in 0..self.n {
                let line: Vec<String> =
                    (0..self.n).map(|col| format!("{}", self.get(row, col, layer))).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<QuantCube> {
        let flat = parse_csv_steps(text)?;
        let n = (flat.len() as f64).cbrt().round() as usize;
        if n == 0 || n * n * n != flat.len() {
            return Err(Error::InvalidArgument(format!(
                "cube csv must hold a cubic count of steps, got {}",
                flat.len()
            )));
        }
        // Rows arrive layer-major, matching to_csv.
        let mut cube = QuantCube { n, steps: vec![0.0; n * n * n], scale: 1.0 };
        for layer in 0..n {
            for row in 0..n {
                for col in 0..n {
                    cube.steps[(layer * n + row) * n + col] = flat[(layer * n + row) * n + col];
                }
            }
        }
        Ok(cube)
    }
}

fn parse_csv_steps(text: &str) -> Result<Vec<f64>> {
    let mut steps = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("line {}: bad step value {field:?}", ln + 1))
            })?;
            if !v.is_finite() || v < 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "line {}: step {v} is below 1",
                    ln + 1
                )));
            }
            steps.push(v);
        }
    }
    Ok(steps)
}

/// Integer quantization levels for a square coefficient block, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Levels2d {
    n: usize,
    data: Vec<i32>,
}

impl Levels2d {
    pub fn new(n: usize, data: Vec<i32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("level block side must be at least 1".into()));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: data.len() });
        }
        Ok(Levels2d { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i32 {
        self.data[row * self.n + col]
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }
}

/// Integer quantization levels for a cubic coefficient block, layer-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Levels3d {
    n: usize,
    data: Vec<i32>,
}

impl Levels3d {
    pub fn new(n: usize, data: Vec<i32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("level cube side must be at least 1".into()));
        }
        if data.len() != n * n * n {
            return Err(Error::DimensionMismatch { expected: n * n * n, got: data.len() });
        }
        Ok(Levels3d { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, layer: usize) -> i32 {
        self.data[(layer * self.n + row) * self.n + col]
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }
}

fn quantize_one(value: f64, step: f64) -> i32 {
    // Round half away from zero, matching f64::round.
    (value / step).round() as i32
}

/// Divides each coefficient by its step and rounds half away from zero.
pub fn quantize2d(block: &Block2d, table: &QuantTable) -> Result<Levels2d> {
    if block.n() != table.n() {
        return Err(Error::DimensionMismatch { expected: table.n(), got: block.n() });
    }
    let n = block.n();
    let data = (0..n * n)
        .map(|p| quantize_one(block.data()[p], table.steps[p]))
        .collect();
    Ok(Levels2d { n, data })
}

/// Multiplies each level by its step.
pub fn dequantize2d(levels: &Levels2d, table: &QuantTable) -> Result<Block2d> {
    if levels.n() != table.n() {
        return Err(Error::DimensionMismatch { expected: table.n(), got: levels.n() });
    }
    let n = levels.n();
    let data: Vec<f64> =
        (0..n * n).map(|p| levels.data[p] as f64 * table.steps[p]).collect();
    Block2d::new(n, data)
}

/// Cubic version of [`quantize2d`].
pub fn quantize3d(cube: &Block3d, steps: &QuantCube) -> Result<Levels3d> {
    if cube.n() != steps.n() {
        return Err(Error::DimensionMismatch { expected: steps.n(), got: cube.n() });
    }
    let n = cube.n();
    let data = (0..n * n * n)
        .map(|p| quantize_one(cube.data()[p], steps.steps[p]))
        .collect();
    Ok(Levels3d { n, data })
}

/// Cubic version of [`dequantize2d`].
pub fn dequantize3d(levels: &Levels3d, steps: &QuantCube) -> Result<Block3d> {
    if levels.n() != steps.n() {
        return Err(Error::DimensionMismatch { expected: steps.n(), got: levels.n() });
    }
    let n = levels.n();
    let data: Vec<f64> =
        (0..n * n * n).map(|p| levels.data[p] as f64 * steps.steps[p]).collect();
    Block3d::new(n, data)
}
