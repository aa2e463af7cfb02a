//! Quality, rate, and coefficient statistics.

use crate::codec::{Frame, VideoCube, Volume};
use crate::error::{Error, Result};
use crate::quant::{Levels2d, Levels3d};
use crate::transform::Block2d;

/// Coefficient statistics accumulated while coding: how sparse the quantized
/// blocks are, where the surviving coefficients sit (per layer for cubes,
/// per anti-diagonal energy for planes).
#[derive(Clone, Debug)]
pub struct CoeffStats {
    total: u64,
    zeros: u64,
    nonzero_by_layer: Vec<u64>,
    energy_by_antidiagonal: Vec<f64>,
}

impl CoeffStats {
    pub(crate) fn plane(n: usize) -> Self {
        CoeffStats {
            total: 0,
            zeros: 0,
            nonzero_by_layer: Vec::new(),
            energy_by_antidiagonal: vec![0.0; 2 * n - 1],
        }
    }

    pub(crate) fn cube(n: usize) -> Self {
        CoeffStats {
            total: 0,
            zeros: 0,
            nonzero_by_layer: vec![0; n],
            energy_by_antidiagonal: Vec::new(),
        }
    }

    pub(crate) fn record_coeffs_2d(&mut self, coeffs: &Block2d) {
        let n = coeffs.n();
        for r in 0..n {
            for c in 0..n {
                let v = coeffs.get(r, c);
                self.energy_by_antidiagonal[r + c] += v * v;
            }
        }
    }

    pub(crate) fn record_levels_2d(&mut self, levels: &Levels2d) {
        self.total += levels.data().len() as u64;
        self.zeros += levels.data().iter().filter(|&&v| v == 0).count() as u64;
    }

    pub(crate) fn record_levels_3d(&mut self, levels: &Levels3d) {
        let n = levels.n();
        self.total += (n * n * n) as u64;
        for layer in 0..n {
            for r in 0..n {
                for c in 0..n {
                    if levels.get(r, c, layer) == 0 {
                        self.zeros += 1;
                    } else {
                        self.nonzero_by_layer[layer] += 1;
                    }
                }
            }
        }
    }

    pub fn total_coefficients(&self) -> u64 {
        self.total
    }

    pub fn zero_fraction(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.zeros as f64 / self.total as f64
    }

    /// Nonzero coefficient count per layer (empty for plane statistics).
    pub fn nonzero_by_layer(&self) -> &[u64] {
        &self.nonzero_by_layer
    }

    /// Coefficient energy per anti-diagonal (empty for cube statistics).
    pub fn energy_by_antidiagonal(&self) -> &[f64] {
        &self.energy_by_antidiagonal
    }

    /// Share of all nonzero coefficients that sit in the first layer.
    /// `None` for plane statistics or when nothing survived quantization.
    pub fn first_layer_nonzero_share(&self) -> Option<f64> {
        if self.nonzero_by_layer.is_empty() {
            return None;
        }
        let nonzero: u64 = self.nonzero_by_layer.iter().sum();
        if nonzero == 0 {
            return None;
        }
        Some(self.nonzero_by_layer[0] as f64 / nonzero as f64)
    }

    /// `key=value` lines for the stats report.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("total_coefficients={}\n", self.total));
        out.push_str(&format!("zero_fraction={:.6}\n", self.zero_fraction()));
        let nonzero: u64 = self.nonzero_by_layer.iter().sum();
        for (layer, &count) in self.nonzero_by_layer.iter().enumerate() {
            let share = if nonzero == 0 { 0.0 } else { count as f64 / nonzero as f64 };
            out.push_str(&format!("layer_nonzero_count_{layer}={count}\n"));
            out.push_str(&format!("layer_nonzero_share_{layer}={share:.6}\n"));
        }
        for (d, &energy) in self.energy_by_antidiagonal.iter().enumerate() {
            out.push_str(&format!("antidiagonal_energy_{d}={energy:.3}\n"));
        }
        out
    }
}

/// Peak signal-to-noise ratio in dB over two equally long sample slices.
/// Identical inputs give infinity.
pub fn psnr_samples(a: &[u16], b: &[u16], peak: u16) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("cannot compute PSNR of empty data".into()));
    }
    if peak == 0 {
        return Err(Error::InvalidArgument("peak must be nonzero".into()));
    }
    let sse: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse / a.len() as f64;
    Ok(10.0 * ((peak as f64) * (peak as f64) / mse).log10())
}

pub fn psnr_frame(a: &Frame, b: &Frame) -> Result<f64> {
    check_same_shape(a, b)?;
    psnr_samples(a.samples(), b.samples(), a.max_value())
}

/// PSNR pooled over every sample of the clip.
pub fn psnr_video(a: &VideoCube, b: &VideoCube) -> Result<f64> {
    if a.frame_count() != b.frame_count() {
        return Err(Error::DimensionMismatch {
            expected: a.frame_count(),
            got: b.frame_count(),
        });
    }
    psnr_frame_seq(a.frames(), b.frames())
}

/// PSNR pooled over every sample of the volume.
pub fn psnr_volume(a: &Volume, b: &Volume) -> Result<f64> {
    if a.slice_count() != b.slice_count() {
        return Err(Error::DimensionMismatch {
            expected: a.slice_count(),
            got: b.slice_count(),
        });
    }
    psnr_frame_seq(a.slices(), b.slices())
}

fn check_same_shape(a: &Frame, b: &Frame) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() || a.bit_depth() != b.bit_depth() {
        return Err(Error::InvalidArgument(format!(
            "cannot compare a {}x{} {}-bit frame with a {}x{} {}-bit frame",
            a.width(),
            a.height(),
            a.bit_depth(),
            b.width(),
            b.height(),
            b.bit_depth()
        )));
    }
    Ok(())
}

fn psnr_frame_seq(a: &[Frame], b: &[Frame]) -> Result<f64> {
    let mut sse = 0.0f64;
    let mut count = 0u64;
    for (fa, fb) in a.iter().zip(b) {
        check_same_shape(fa, fb)?;
        sse += fa
            .samples()
            .iter()
            .zip(fb.samples())
            .map(|(&x, &y)| {
                let d = x as f64 - y as f64;
                d * d
            })
            .sum::<f64>();
        count += fa.samples().len() as u64;
    }
    if count == 0 {
        return Err(Error::InvalidArgument("cannot compute PSNR of empty data".into()));
    }
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    let peak = a[0].max_value() as f64;
    Ok(10.0 * (peak * peak / (sse / count as f64)).log10())
}

/// Payload bits per second of original footage, in megabits (10^6).
pub fn bitrate_mbps(stream_bytes: u64, frame_count: u64, fps: (u16, u16)) -> Result<f64> {
    if fps.0 == 0 || fps.1 == 0 {
        return Err(Error::InvalidArgument(format!(
            "frame rate {}:{} has no duration",
            fps.0, fps.1
        )));
    }
    if frame_count == 0 {
        return Err(Error::InvalidArgument("zero frames have no duration".into()));
    }
    let seconds = frame_count as f64 * fps.1 as f64 / fps.0 as f64;
    Ok(stream_bytes as f64 * 8.0 / seconds / 1e6)
}

/// Raw sample bytes over compressed bytes.
pub fn compression_ratio(original_bytes: u64, stream_bytes: u64) -> f64 {
    if stream_bytes == 0 {
        return f64::INFINITY;
    }
    original_bytes as f64 / stream_bytes as f64
}

pub fn raw_bytes_frame(frame: &Frame) -> u64 {
    let bps = if frame.bit_depth() > 8 { 2 } else { 1 };
    (frame.width() * frame.height() * bps) as u64
}

pub fn raw_bytes_video(video: &VideoCube) -> u64 {
    video.frames().iter().map(raw_bytes_frame).sum()
}

pub fn raw_bytes_volume(volume: &Volume) -> u64 {
    volume.slices().iter().map(raw_bytes_frame).sum()
}

/// Everything the `--report` flag prints: per-plane PSNR against the input,
/// stream size against the raw input size, and coefficient sparsity.
#[derive(Clone, Debug)]
pub struct MetricsReport {
    pub psnr_db: Vec<(String, f64)>,
    pub psnr_mean_db: f64,
    pub stream_bytes: u64,
    pub original_bytes: u64,
    pub compression_ratio: f64,
    /// Only video modes have a time base.
    pub bitrate_mbps: Option<f64>,
    pub zero_fraction: f64,
    /// Only cube modes report the first-layer concentration.
    pub first_layer_nonzero_share: Option<f64>,
}

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.6}")
    }
}

impl MetricsReport {
    /// Deterministic `key=value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (plane, v) in &self.psnr_db {
            out.push_str(&format!("psnr_{plane}_db={}\n", fmt_db(*v)));
        }
        out.push_str(&format!("psnr_mean_db={}\n", fmt_db(self.psnr_mean_db)));
        out.push_str(&format!("stream_bytes={}\n", self.stream_bytes));
        out.push_str(&format!("original_bytes={}\n", self.original_bytes));
        out.push_str(&format!("compression_ratio={:.6}\n", self.compression_ratio));
        if let Some(rate) = self.bitrate_mbps {
            out.push_str(&format!("bitrate_mbps={rate:.6}\n"));
        }
        out.push_str(&format!("zero_fraction={:.6}\n", self.zero_fraction));
        if let Some(share) = self.first_layer_nonzero_share {
            out.push_str(&format!("first_layer_nonzero_share={share:.6}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{encode_still_with_stats, encode_video_mono_with_stats};
    use crate::quant::QualityFactor;

    #[test]
    fn psnr_matches_hand_computation() {
        let v = psnr_samples(&[0, 0], &[10, 0], 255).unwrap();
        // mse 50 against peak 255: 10 log10(65025/50).
        assert!((v - 31.141104).abs() < 1e-4, "got {v}");
        assert!(psnr_samples(&[5, 6], &[5, 6], 255).unwrap().is_infinite());
        assert!(psnr_samples(&[0], &[0, 1], 255).is_err());
        assert!(psnr_samples(&[], &[], 255).is_err());
    }

    #[test]
    fn psnr_uses_the_bit_depth_peak() {
        let a = Frame::new(2, 1, 12, vec![0, 0]).unwrap();
        let b = Frame::new(2, 1, 12, vec![160, 0]).unwrap();
        let v = psnr_frame(&a, &b).unwrap();
        // mse 12800 against peak 4095: 10 log10(4095^2/12800).
        assert!((v - 31.172978).abs() < 1e-4, "got {v}");
        let eight = Frame::new(2, 1, 8, vec![0, 0]).unwrap();
        assert!(psnr_frame(&a, &eight).is_err());
    }

    #[test]
    fn bitrate_matches_the_raw_reference_rate() {
        // Uncompressed CIF at 30 fps: 352*288 bytes a frame, 300 frames.
        let raw = bitrate_mbps(352 * 288 * 300, 300, (30, 1)).unwrap();
        assert!((raw - 24.33024).abs() < 1e-9, "got {raw}");
        assert!(bitrate_mbps(100, 300, (0, 1)).is_err());
    }

    #[test]
    fn compression_ratio_is_original_over_stream() {
        assert_eq!(compression_ratio(1000, 20), 50.0);
        assert!(compression_ratio(1000, 0).is_infinite());
    }

    #[test]
    fn constant_still_leaves_only_dc() {
        let frame = Frame::constant(16, 16, 8, 255).unwrap();
        let (_, stats) = encode_still_with_stats(&frame, QualityFactor::new(50).unwrap()).unwrap();
        assert_eq!(stats.total_coefficients(), 256);
        assert!((stats.zero_fraction() - 63.0 / 64.0).abs() < 1e-12);
        assert!(stats.first_layer_nonzero_share().is_none());
        let energy = stats.energy_by_antidiagonal();
        assert_eq!(energy.len(), 15);
        assert!(energy[0] > 0.0);
        assert!(energy[1..].iter().all(|&e| e < 1e-9));
    }

    #[test]
    fn constant_clip_concentrates_in_the_first_layer() {
        let frames = vec![Frame::constant(16, 16, 8, 200).unwrap(); 8];
        let clip = crate::codec::VideoCube::new(frames, (30, 1)).unwrap();
        let (_, stats) =
            encode_video_mono_with_stats(&clip, QualityFactor::new(50).unwrap(), 1.0).unwrap();
        assert_eq!(stats.total_coefficients(), 4 * 512);
        assert!((stats.zero_fraction() - 511.0 / 512.0).abs() < 1e-12);
        assert_eq!(stats.first_layer_nonzero_share(), Some(1.0));
        let text = stats.to_text();
        assert!(text.contains("zero_fraction=0.998047\n"));
        assert!(text.contains("layer_nonzero_count_0=4\n"));
        assert!(text.contains("layer_nonzero_share_7=0.000000\n"));
    }

    #[test]
    fn report_text_is_stable() {
        let report = MetricsReport {
            psnr_db: vec![("y".into(), 41.5), ("cb".into(), f64::INFINITY)],
            psnr_mean_db: f64::INFINITY,
            stream_bytes: 1234,
            original_bytes: 123400,
            compression_ratio: 100.0,
            bitrate_mbps: Some(0.47),
            zero_fraction: 0.9543,
            first_layer_nonzero_share: Some(0.8123),
        };
        let text = report.to_text();
        assert_eq!(
            text,
            "psnr_y_db=41.500000\n\
             psnr_cb_db=inf\n\
             psnr_mean_db=inf\n\
             stream_bytes=1234\n\
             original_bytes=123400\n\
             compression_ratio=100.000000\n\
             bitrate_mbps=0.470000\n\
             zero_fraction=0.954300\n\
             first_layer_nonzero_share=0.812300\n"
        );
    }
}
