//! Coding pipelines for the four modes and the compressed container format.
//!
//! Still images are coded as independent 8x8 blocks. Video and volumes are
//! coded as 8x8x8 cubes: frames (or slices) are grouped eight at a time,
//! every group is split spatially into cubes, and each cube runs through the
//! 3D transform, the quantization cube, the layered scan, and the Huffman
//! coder. Frames are padded to multiples of 8 by edge replication, groups by
//! repeating the last frame; the header keeps the original dimensions so
//! decoders can crop the padding back off.

use crate::bits::{BitReader, BitWriter};
use crate::entropy::{decode_block, detokenize, encode_block, tokenize, HuffmanTables};
use crate::error::{Error, Result};
use crate::metrics::CoeffStats;
use crate::quant::{
    dequantize2d, dequantize3d, quantize2d, quantize3d, QualityFactor, QuantCube, QuantTable,
    HIGH_FREQ_STEP,
};
use crate::scan::{ScanOrder2d, ScanOrder3d};
use crate::transform::{Block2d, Block3d, DctBasis};

/// Frames and groups are padded to multiples of this size.
pub const BLOCK: usize = 8;
/// Frames per group in the cubic pipeline.
pub const GOP: usize = 8;

const MAGIC: &[u8; 4] = b"3DCT";
const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 1 + 6 * 4 + 2 * 2 + 1 + 4 + 1 + 1 + 2 * 4;

/// One plane of unsigned samples at 8 or 12 bits per sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    bit_depth: u8,
    samples: Vec<u16>,
}

impl Frame {
    pub fn new(width: usize, height: usize, bit_depth: u8, samples: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "frame dimensions must be nonzero, got {width}x{height}"
            )));
        }
        if bit_depth != 8 && bit_depth != 12 {
            return Err(Error::InvalidArgument(format!(
                "bit depth must be 8 or 12, got {bit_depth}"
            )));
        }
        if samples.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                got: samples.len(),
            });
        }
        let max = (1u16 << bit_depth) - 1;
        if let Some(&bad) = samples.iter().find(|&&s| s > max) {
            return Err(Error::DataRange(format!(
                "sample {bad} exceeds the {bit_depth}-bit maximum {max}"
            )));
        }
        Ok(Frame { width, height, bit_depth, samples })
    }

    /// Skips the sample-range scan; for internal use where samples are
    /// produced already clamped.
    fn from_raw(width: usize, height: usize, bit_depth: u8, samples: Vec<u16>) -> Self {
        debug_assert_eq!(samples.len(), width * height);
        Frame { width, height, bit_depth, samples }
    }

    pub fn constant(width: usize, height: usize, bit_depth: u8, value: u16) -> Result<Self> {
        Frame::new(width, height, bit_depth, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    pub fn max_value(&self) -> u16 {
        (1u16 << self.bit_depth) - 1
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.samples[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u16) {
        debug_assert!(value <= self.max_value());
        self.samples[row * self.width + col] = value;
    }

    pub fn samples(&self) -> &[u16] {
        &self.samples
    }
}

/// A sequence of equally sized frames with a frame rate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VideoCube {
    frames: Vec<Frame>,
    fps: (u16, u16),
}

impl VideoCube {
    pub fn new(frames: Vec<Frame>, fps: (u16, u16)) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidArgument("video needs at least one frame".into()))?;
        let (w, h, d) = (first.width(), first.height(), first.bit_depth());
        if let Some(bad) = frames.iter().position(|f| {
            f.width() != w || f.height() != h || f.bit_depth() != d
        }) {
            return Err(Error::InvalidArgument(format!(
                "frame {bad} does not match the first frame's shape"
            )));
        }
        if fps.1 == 0 {
            return Err(Error::InvalidArgument("frame rate denominator must be nonzero".into()));
        }
        Ok(VideoCube { frames, fps })
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn bit_depth(&self) -> u8 {
        self.frames[0].bit_depth()
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn fps(&self) -> (u16, u16) {
        self.fps
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }
}

/// A stack of equally sized slices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Volume {
    slices: Vec<Frame>,
}

impl Volume {
    pub fn new(slices: Vec<Frame>) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::InvalidArgument("volume needs at least one slice".into()))?;
        let (w, h, d) = (first.width(), first.height(), first.bit_depth());
        if let Some(bad) = slices.iter().position(|f| {
            f.width() != w || f.height() != h || f.bit_depth() != d
        }) {
            return Err(Error::InvalidArgument(format!(
                "slice {bad} does not match the first slice's shape"
            )));
        }
        Ok(Volume { slices })
    }

    pub fn width(&self) -> usize {
        self.slices[0].width()
    }

    pub fn height(&self) -> usize {
        self.slices[0].height()
    }

    pub fn bit_depth(&self) -> u8 {
        self.slices[0].bit_depth()
    }

    pub fn slice_count(&self) -> usize {
        self.slices.len()
    }

    pub fn slices(&self) -> &[Frame] {
        &self.slices
    }
}

/// Which pipeline a stream was coded with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodecMode {
    Still,
    VideoMono,
    VideoColor,
    Volume,
}

impl CodecMode {
    pub fn component_count(self) -> usize {
        match self {
            CodecMode::VideoColor => 3,
            _ => 1,
        }
    }

    fn to_byte(self) -> u8 {
        match self {
            CodecMode::Still => 0,
            CodecMode::VideoMono => 1,
            CodecMode::VideoColor => 2,
            CodecMode::Volume => 3,
        }
    }

    fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(CodecMode::Still),
            1 => Ok(CodecMode::VideoMono),
            2 => Ok(CodecMode::VideoColor),
            3 => Ok(CodecMode::Volume),
            _ => Err(Error::CorruptStream(format!("unknown mode byte {b}"))),
        }
    }
}

impl std::fmt::Display for CodecMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CodecMode::Still => "still",
            CodecMode::VideoMono => "video-mono",
            CodecMode::VideoColor => "video-color",
            CodecMode::Volume => "volume",
        })
    }
}

/// Stream-level parameters. Dimensions are for the luma plane; chroma plane
/// dimensions are derived from them. `sample_map` records the linear map
/// `(lo, hi) -> (0, 255)` applied to volume samples before coding, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamHeader {
    pub mode: CodecMode,
    pub padded_width: u32,
    pub padded_height: u32,
    pub padded_frames: u32,
    pub width: u32,
    pub height: u32,
    pub frames: u32,
    pub fps_num: u16,
    pub fps_den: u16,
    pub q: u8,
    pub q3_scale: f32,
    pub bit_depth: u8,
    pub sample_map: Option<(f32, f32)>,
}

impl StreamHeader {
    pub fn group_count(&self) -> usize {
        match self.mode {
            CodecMode::Still => 1,
            _ => self.padded_frames as usize / GOP,
        }
    }
}

/// A parsed or freshly encoded compressed stream: the header plus, per group
/// of frames, one coded payload per component.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedStream {
    pub header: StreamHeader,
    pub groups: Vec<Vec<Vec<u8>>>,
}

impl EncodedStream {
    /// Total size of the serialized stream in bytes.
    pub fn serialized_len(&self) -> usize {
        HEADER_LEN
            + self
                .groups
                .iter()
                .map(|g| 1 + g.iter().map(|p| 4 + p.len()).sum::<usize>())
                .sum::<usize>()
    }

    pub fn serialize(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(self.serialized_len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(h.mode.to_byte());
        for dim in [h.padded_width, h.padded_height, h.padded_frames, h.width, h.height, h.frames]
        {
            out.extend_from_slice(&dim.to_le_bytes());
        }
        out.extend_from_slice(&h.fps_num.to_le_bytes());
        out.extend_from_slice(&h.fps_den.to_le_bytes());
        out.push(h.q);
        out.extend_from_slice(&h.q3_scale.to_le_bytes());
        out.push(h.bit_depth);
        let (flag, lo, hi) = match h.sample_map {
            Some((lo, hi)) => (1u8, lo, hi),
            None => (0u8, 0.0, 0.0),
        };
        out.push(flag);
        out.extend_from_slice(&lo.to_le_bytes());
        out.extend_from_slice(&hi.to_le_bytes());
        for group in &self.groups {
            out.push(group.len() as u8);
            for payload in group {
                out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
                out.extend_from_slice(payload);
            }
        }
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<EncodedStream> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::TruncatedStream(format!(
                "header needs {HEADER_LEN} bytes, stream holds {}",
                bytes.len()
            )));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::UnsupportedFormat("not a compressed stream (bad magic)".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::UnsupportedFormat(format!(
                "container version {} is not supported",
                bytes[4]
            )));
        }
        let mode = CodecMode::from_byte(bytes[5])?;
        let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
        let u16_at = |off: usize| u16::from_le_bytes(bytes[off..off + 2].try_into().unwrap());
        let padded_width = u32_at(6);
        let padded_height = u32_at(10);
        let padded_frames = u32_at(14);
        let width = u32_at(18);
        let height = u32_at(22);
        let frames = u32_at(26);
        let fps_num = u16_at(30);
        let fps_den = u16_at(32);
        let q = bytes[34];
        let q3_scale = f32::from_le_bytes(bytes[35..39].try_into().unwrap());
        let bit_depth = bytes[39];
        let flag = bytes[40];
        let lo = f32::from_le_bytes(bytes[41..45].try_into().unwrap());
        let hi = f32::from_le_bytes(bytes[45..49].try_into().unwrap());

        if width == 0 || height == 0 || frames == 0 {
            return Err(Error::CorruptStream("zero dimensions".into()));
        }
        if padded_width != pad_len(width as usize, BLOCK) as u32
            || padded_height != pad_len(height as usize, BLOCK) as u32
        {
            return Err(Error::CorruptStream("padded dimensions do not match original".into()));
        }
        let expect_frames = match mode {
            CodecMode::Still => 1,
            _ => pad_len(frames as usize, GOP) as u32,
        };
        if padded_frames != expect_frames || (mode == CodecMode::Still && frames != 1) {
            return Err(Error::CorruptStream("padded frame count does not match".into()));
        }
        if (padded_width as u64) * (padded_height as u64) * (padded_frames as u64) > 1 << 32 {
            return Err(Error::CorruptStream("implausibly large dimensions".into()));
        }
        if !(1..=100).contains(&q) {
            return Err(Error::CorruptStream(format!("quality {q} out of range")));
        }
        if bit_depth != 8 && bit_depth != 12 {
            return Err(Error::CorruptStream(format!("bit depth {bit_depth} out of range")));
        }
        if fps_den == 0 {
            return Err(Error::CorruptStream("frame rate denominator is zero".into()));
        }
        let video = matches!(mode, CodecMode::VideoMono | CodecMode::VideoColor);
        if video && fps_num == 0 {
            return Err(Error::CorruptStream("video stream with zero frame rate".into()));
        }
        if !q3_scale.is_finite() || q3_scale < 0.0 {
            return Err(Error::CorruptStream(format!("bad quantization scale {q3_scale}")));
        }
        let sample_map = match flag {
            0 => None,
            1 => {
                if mode != CodecMode::Volume {
                    return Err(Error::CorruptStream(
                        "sample rescale flag set outside volume mode".into(),
                    ));
                }
                if !lo.is_finite() || !hi.is_finite() || lo > hi {
                    return Err(Error::CorruptStream(format!("bad sample map {lo}..{hi}")));
                }
                Some((lo, hi))
            }
            _ => return Err(Error::CorruptStream(format!("bad rescale flag {flag}"))),
        };

        let header = StreamHeader {
            mode,
            padded_width,
            padded_height,
            padded_frames,
            width,
            height,
            frames,
            fps_num,
            fps_den,
            q,
            q3_scale,
            bit_depth,
            sample_map,
        };

        let mut groups = Vec::with_capacity(header.group_count());
        let mut off = HEADER_LEN;
        for g in 0..header.group_count() {
            if off >= bytes.len() {
                return Err(Error::TruncatedStream(format!(
                    "stream ends before group {g} of {}",
                    header.group_count()
                )));
            }
            let count = bytes[off] as usize;
            off += 1;
            if count != mode.component_count() {
                return Err(Error::CorruptStream(format!(
                    "group {g} declares {count} components, mode {mode} has {}",
                    mode.component_count()
                )));
            }
            let mut group = Vec::with_capacity(count);
            for c in 0..count {
                if off + 4 > bytes.len() {
                    return Err(Error::TruncatedStream(format!(
                        "stream ends inside group {g} component {c} length"
                    )));
                }
                let len = u32_at(off) as usize;
                off += 4;
                if off + len > bytes.len() {
                    return Err(Error::TruncatedStream(format!(
                        "group {g} component {c} declares {len} bytes, {} remain",
                        bytes.len() - off
                    )));
                }
                group.push(bytes[off..off + len].to_vec());
                off += len;
            }
            groups.push(group);
        }
        if off != bytes.len() {
            return Err(Error::CorruptStream(format!(
                "{} trailing bytes after the last group",
                bytes.len() - off
            )));
        }
        Ok(EncodedStream { header, groups })
    }
}

fn pad_len(len: usize, m: usize) -> usize {
    len.div_ceil(m) * m
}

/// Grows a frame to multiples of `BLOCK` by replicating the last row and
/// column.
pub(crate) fn pad_frame(frame: &Frame) -> Frame {
    let (w, h) = (frame.width(), frame.height());
    let (pw, ph) = (pad_len(w, BLOCK), pad_len(h, BLOCK));
    if (pw, ph) == (w, h) {
        return frame.clone();
    }
    let mut samples = vec![0u16; pw * ph];
    for r in 0..ph {
        let sr = r.min(h - 1);
        for c in 0..pw {
            samples[r * pw + c] = frame.get(sr, c.min(w - 1));
        }
    }
    Frame::from_raw(pw, ph, frame.bit_depth(), samples)
}

/// Pads each frame spatially and repeats the last frame until the count is a
/// multiple of `GOP`.
pub(crate) fn pad_sequence(frames: &[Frame]) -> Vec<Frame> {
    let mut out: Vec<Frame> = frames.iter().map(pad_frame).collect();
    let target = pad_len(out.len(), GOP);
    while out.len() < target {
        out.push(out.last().expect("sequence is nonempty").clone());
    }
    out
}

fn crop_frame(frame: &Frame, width: usize, height: usize) -> Frame {
    if (width, height) == (frame.width(), frame.height()) {
        return frame.clone();
    }
    let mut samples = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            samples.push(frame.get(r, c));
        }
    }
    Frame::from_raw(width, height, frame.bit_depth(), samples)
}

fn extract_block2d(frame: &Frame, block_row: usize, block_col: usize) -> Block2d {
    let mut b = Block2d::zeros(BLOCK);
    for r in 0..BLOCK {
        for c in 0..BLOCK {
            b.set(r, c, frame.get(block_row * BLOCK + r, block_col * BLOCK + c) as f64);
        }
    }
    b
}

fn clamp_sample(value: f64, max: u16) -> u16 {
    let rounded = value.round();
    if rounded < 0.0 {
        0
    } else if rounded > max as f64 {
        max
    } else {
        rounded as u16
    }
}

fn place_block2d(frame: &mut Frame, block_row: usize, block_col: usize, b: &Block2d, max: u16) {
    for r in 0..BLOCK {
        for c in 0..BLOCK {
            let v = clamp_sample(b.get(r, c), max);
            frame.samples[(block_row * BLOCK + r) * frame.width + block_col * BLOCK + c] = v;
        }
    }
}

fn extract_cube(frames: &[Frame], block_row: usize, block_col: usize) -> Block3d {
    let mut b = Block3d::zeros(BLOCK);
    for (k, frame) in frames.iter().enumerate() {
        for r in 0..BLOCK {
            for c in 0..BLOCK {
                b.set(r, c, k, frame.get(block_row * BLOCK + r, block_col * BLOCK + c) as f64);
            }
        }
    }
    b
}

fn place_cube(frames: &mut [Frame], block_row: usize, block_col: usize, b: &Block3d, max: u16) {
    for (k, frame) in frames.iter_mut().enumerate() {
        for r in 0..BLOCK {
            for c in 0..BLOCK {
                let v = clamp_sample(b.get(r, c, k), max);
                frame.samples[(block_row * BLOCK + r) * frame.width + block_col * BLOCK + c] = v;
            }
        }
    }
}

fn with_context(err: Error, context: String) -> Error {
    match err {
        Error::OutOfRange(m) => Error::OutOfRange(format!("{context}: {m}")),
        Error::CorruptStream(m) => Error::CorruptStream(format!("{context}: {m}")),
        Error::TruncatedStream(m) => Error::TruncatedStream(format!("{context}: {m}")),
        other => other,
    }
}

/// Codes one still frame.
pub fn encode_still(frame: &Frame, q: QualityFactor) -> Result<EncodedStream> {
    Ok(encode_still_with_stats(frame, q)?.0)
}

/// Codes one still frame and reports coefficient statistics from the run.
pub fn encode_still_with_stats(
    frame: &Frame,
    q: QualityFactor,
) -> Result<(EncodedStream, CoeffStats)> {
    let table = QuantTable::luma().scaled(q.scale())?;
    let basis = DctBasis::new(BLOCK)?;
    let scan = ScanOrder2d::zigzag(BLOCK)?;
    let tables = HuffmanTables::baseline();
    let mut stats = CoeffStats::plane(BLOCK);

    let padded = pad_frame(frame);
    let (rows, cols) = (padded.height() / BLOCK, padded.width() / BLOCK);
    let mut writer = BitWriter::new();
    for br in 0..rows {
        for bc in 0..cols {
            let coeffs = basis.forward_2d(&extract_block2d(&padded, br, bc))?;
            stats.record_coeffs_2d(&coeffs);
            let levels = quantize2d(&coeffs, &table)?;
            stats.record_levels_2d(&levels);
            let tokens = tokenize(&scan.serialize(&levels)?)?;
            encode_block(&tokens, &tables, &mut writer)
                .map_err(|e| with_context(e, format!("block row {br} col {bc}")))?;
        }
    }

    let header = StreamHeader {
        mode: CodecMode::Still,
        padded_width: padded.width() as u32,
        padded_height: padded.height() as u32,
        padded_frames: 1,
        width: frame.width() as u32,
        height: frame.height() as u32,
        frames: 1,
        fps_num: 0,
        fps_den: 1,
        q: q.value(),
        q3_scale: 1.0,
        bit_depth: frame.bit_depth(),
        sample_map: None,
    };
    let stream = EncodedStream { header, groups: vec![vec![writer.into_bytes()]] };
    Ok((stream, stats))
}

/// Decodes a still stream back to a frame at its original dimensions.
pub fn decode_still(stream: &EncodedStream) -> Result<Frame> {
    let h = &stream.header;
    if h.mode != CodecMode::Still {
        return Err(Error::InvalidArgument(format!("expected a still stream, got {}", h.mode)));
    }
    let table = QuantTable::luma().scaled(QualityFactor::new(h.q)?.scale())?;
    let basis = DctBasis::new(BLOCK)?;
    let scan = ScanOrder2d::zigzag(BLOCK)?;
    let tables = HuffmanTables::baseline();

    let (pw, ph) = (h.padded_width as usize, h.padded_height as usize);
    let mut padded = Frame::from_raw(pw, ph, h.bit_depth, vec![0u16; pw * ph]);
    let max = padded.max_value();
    let payload = &stream.groups[0][0];
    let mut reader = BitReader::new(payload);
    for br in 0..ph / BLOCK {
        for bc in 0..pw / BLOCK {
            let tokens = decode_block(&mut reader, &tables, BLOCK * BLOCK)
                .map_err(|e| with_context(e, format!("block row {br} col {bc}")))?;
            let levels = scan.deserialize(&detokenize(&tokens, BLOCK * BLOCK)?)?;
            let block = basis.inverse_2d(&dequantize2d(&levels, &table)?)?;
            place_block2d(&mut padded, br, bc, &block, max);
        }
    }
    if reader.remaining_bits() >= 8 {
        return Err(Error::CorruptStream(format!(
            "{} unread payload bits after the last block",
            reader.remaining_bits()
        )));
    }
    Ok(crop_frame(&padded, h.width as usize, h.height as usize))
}

struct CubeCoder {
    qcube: QuantCube,
    basis: DctBasis,
    scan: ScanOrder3d,
    tables: HuffmanTables,
}

impl CubeCoder {
    fn new(table: &QuantTable, q: QualityFactor, q3_scale: f32) -> Result<Self> {
        if !q3_scale.is_finite() || q3_scale < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "quantization scale must be finite and non-negative, got {q3_scale}"
            )));
        }
        Ok(CubeCoder {
            qcube: QuantCube::build(table, q3_scale as f64 * q.scale(), HIGH_FREQ_STEP)?,
            basis: DctBasis::new(BLOCK)?,
            scan: ScanOrder3d::layered(BLOCK)?,
            tables: HuffmanTables::baseline(),
        })
    }

    /// Codes a padded frame sequence, one payload per group of 8 frames.
    fn encode(&self, padded: &[Frame], stats: &mut CoeffStats) -> Result<Vec<Vec<u8>>> {
        debug_assert!(padded.len() % GOP == 0);
        let (rows, cols) = (padded[0].height() / BLOCK, padded[0].width() / BLOCK);
        let mut payloads = Vec::with_capacity(padded.len() / GOP);
        for (g, group) in padded.chunks(GOP).enumerate() {
            let mut writer = BitWriter::new();
            for br in 0..rows {
                for bc in 0..cols {
                    let coeffs = self.basis.forward_3d(&extract_cube(group, br, bc))?;
                    let levels = quantize3d(&coeffs, &self.qcube)?;
                    stats.record_levels_3d(&levels);
                    let tokens = tokenize(&self.scan.serialize(&levels)?)?;
                    encode_block(&tokens, &self.tables, &mut writer).map_err(|e| {
                        with_context(e, format!("group {g} block row {br} col {bc}"))
                    })?;
                }
            }
            payloads.push(writer.into_bytes());
        }
        Ok(payloads)
    }

    /// Decodes per-group payloads into `payloads.len() * 8` padded frames.
    fn decode(
        &self,
        payloads: &[&[u8]],
        padded_width: usize,
        padded_height: usize,
        bit_depth: u8,
    ) -> Result<Vec<Frame>> {
        let (rows, cols) = (padded_height / BLOCK, padded_width / BLOCK);
        let mut frames: Vec<Frame> = (0..payloads.len() * GOP)
            .map(|_| {
                Frame::from_raw(
                    padded_width,
                    padded_height,
                    bit_depth,
                    vec![0u16; padded_width * padded_height],
                )
            })
            .collect();
        let max = frames[0].max_value();
        for (g, payload) in payloads.iter().enumerate() {
            let mut reader = BitReader::new(payload);
            let group = &mut frames[g * GOP..(g + 1) * GOP];
            for br in 0..rows {
                for bc in 0..cols {
                    let tokens = decode_block(&mut reader, &self.tables, BLOCK * BLOCK * BLOCK)
                        .map_err(|e| {
                            with_context(e, format!("group {g} block row {br} col {bc}"))
                        })?;
                    let levels =
                        self.scan.deserialize(&detokenize(&tokens, BLOCK * BLOCK * BLOCK)?)?;
                    let cube = self.basis.inverse_3d(&dequantize3d(&levels, &self.qcube)?)?;
                    place_cube(group, br, bc, &cube, max);
                }
            }
            if reader.remaining_bits() >= 8 {
                return Err(Error::CorruptStream(format!(
                    "group {g} has {} unread payload bits after the last block",
                    reader.remaining_bits()
                )));
            }
        }
        Ok(frames)
    }
}

/// Codes a monochrome 8-bit video.
pub fn encode_video_mono(video: &VideoCube, q: QualityFactor, q3_scale: f32) -> Result<EncodedStream> {
    Ok(encode_video_mono_with_stats(video, q, q3_scale)?.0)
}

/// Codes a monochrome 8-bit video and reports coefficient statistics.
pub fn encode_video_mono_with_stats(
    video: &VideoCube,
    q: QualityFactor,
    q3_scale: f32,
) -> Result<(EncodedStream, CoeffStats)> {
    if video.bit_depth() != 8 {
        return Err(Error::InvalidArgument(format!(
            "video coding expects 8-bit frames, got {}-bit",
            video.bit_depth()
        )));
    }
    let coder = CubeCoder::new(&QuantTable::luma(), q, q3_scale)?;
    let mut stats = CoeffStats::cube(BLOCK);
    let padded = pad_sequence(video.frames());
    let payloads = coder.encode(&padded, &mut stats)?;

    let header = StreamHeader {
        mode: CodecMode::VideoMono,
        padded_width: padded[0].width() as u32,
        padded_height: padded[0].height() as u32,
        padded_frames: padded.len() as u32,
        width: video.width() as u32,
        height: video.height() as u32,
        frames: video.frame_count() as u32,
        fps_num: video.fps().0,
        fps_den: video.fps().1,
        q: q.value(),
        q3_scale,
        bit_depth: 8,
        sample_map: None,
    };
    let groups = payloads.into_iter().map(|p| vec![p]).collect();
    Ok((EncodedStream { header, groups }, stats))
}

/// Decodes a monochrome video stream to its original dimensions and length.
pub fn decode_video_mono(stream: &EncodedStream) -> Result<VideoCube> {
    let h = &stream.header;
    if h.mode != CodecMode::VideoMono {
        return Err(Error::InvalidArgument(format!(
            "expected a monochrome video stream, got {}",
            h.mode
        )));
    }
    let coder = CubeCoder::new(&QuantTable::luma(), QualityFactor::new(h.q)?, h.q3_scale)?;
    let payloads: Vec<&[u8]> = stream.groups.iter().map(|g| g[0].as_slice()).collect();
    let frames = coder.decode(
        &payloads,
        h.padded_width as usize,
        h.padded_height as usize,
        h.bit_depth,
    )?;
    let cropped = frames
        .iter()
        .take(h.frames as usize)
        .map(|f| crop_frame(f, h.width as usize, h.height as usize))
        .collect();
    VideoCube::new(cropped, (h.fps_num, h.fps_den))
}

/// Halves a plane in both directions by averaging 2x2 neighborhoods; odd
/// edges replicate the last row or column before averaging.
pub fn subsample_420(frame: &Frame) -> Frame {
    let (w, h) = (frame.width(), frame.height());
    let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
    let mut samples = Vec::with_capacity(cw * ch);
    for r in 0..ch {
        for c in 0..cw {
            let r0 = 2 * r;
            let r1 = (2 * r + 1).min(h - 1);
            let c0 = 2 * c;
            let c1 = (2 * c + 1).min(w - 1);
            let sum = frame.get(r0, c0) as u32
                + frame.get(r0, c1) as u32
                + frame.get(r1, c0) as u32
                + frame.get(r1, c1) as u32;
            samples.push(((sum + 2) / 4) as u16);
        }
    }
    Frame::from_raw(cw, ch, frame.bit_depth(), samples)
}

/// Doubles a subsampled plane back to `width x height` by replication.
pub fn upsample_420(frame: &Frame, width: usize, height: usize) -> Result<Frame> {
    if frame.width() != width.div_ceil(2) || frame.height() != height.div_ceil(2) {
        return Err(Error::InvalidArgument(format!(
            "plane {}x{} cannot upsample to {width}x{height}",
            frame.width(),
            frame.height()
        )));
    }
    let mut samples = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            samples.push(frame.get(r / 2, c / 2));
        }
    }
    Ok(Frame::from_raw(width, height, frame.bit_depth(), samples))
}

fn check_chroma_plane(name: &str, luma: &VideoCube, chroma: &VideoCube) -> Result<()> {
    if chroma.bit_depth() != 8 {
        return Err(Error::InvalidArgument(format!(
            "{name} plane must be 8-bit, got {}-bit",
            chroma.bit_depth()
        )));
    }
    if chroma.frame_count() != luma.frame_count() {
        return Err(Error::InvalidArgument(format!(
            "{name} plane has {} frames, luma has {}",
            chroma.frame_count(),
            luma.frame_count()
        )));
    }
    let (cw, ch) = (luma.width().div_ceil(2), luma.height().div_ceil(2));
    if chroma.width() != cw || chroma.height() != ch {
        return Err(Error::InvalidArgument(format!(
            "{name} plane is {}x{}, expected the subsampled {cw}x{ch}",
            chroma.width(),
            chroma.height()
        )));
    }
    Ok(())
}

/// Codes 4:2:0 color video. The chroma planes must already be at the
/// subsampled dimensions.
pub fn encode_video_color(
    y: &VideoCube,
    cb: &VideoCube,
    cr: &VideoCube,
    q: QualityFactor,
    q3_scale: f32,
) -> Result<EncodedStream> {
    Ok(encode_video_color_with_stats(y, cb, cr, q, q3_scale)?.0)
}

/// Codes 4:2:0 color video, reporting per-plane coefficient statistics.
pub fn encode_video_color_with_stats(
    y: &VideoCube,
    cb: &VideoCube,
    cr: &VideoCube,
    q: QualityFactor,
    q3_scale: f32,
) -> Result<(EncodedStream, Vec<(String, CoeffStats)>)> {
    if y.bit_depth() != 8 {
        return Err(Error::InvalidArgument(format!(
            "video coding expects 8-bit frames, got {}-bit",
            y.bit_depth()
        )));
    }
    check_chroma_plane("cb", y, cb)?;
    check_chroma_plane("cr", y, cr)?;

    let luma_coder = CubeCoder::new(&QuantTable::luma(), q, q3_scale)?;
    let chroma_coder = CubeCoder::new(&QuantTable::chroma(), q, q3_scale)?;
    let mut all_stats = Vec::new();
    let mut plane_payloads = Vec::new();
    for (name, cube, coder) in [
        ("y", y, &luma_coder),
        ("cb", cb, &chroma_coder),
        ("cr", cr, &chroma_coder),
    ] {
        let mut stats = CoeffStats::cube(BLOCK);
        let padded = pad_sequence(cube.frames());
        let payloads = coder
            .encode(&padded, &mut stats)
            .map_err(|e| with_context(e, format!("{name} plane")))?;
        plane_payloads.push(payloads);
        all_stats.push((name.to_string(), stats));
    }

    let group_count = plane_payloads[0].len();
    let mut groups = Vec::with_capacity(group_count);
    let mut iters: Vec<_> = plane_payloads.into_iter().map(|p| p.into_iter()).collect();
    for _ in 0..group_count {
        groups.push(iters.iter_mut().map(|it| it.next().expect("equal group counts")).collect());
    }

    let header = StreamHeader {
        mode: CodecMode::VideoColor,
        padded_width: pad_len(y.width(), BLOCK) as u32,
        padded_height: pad_len(y.height(), BLOCK) as u32,
        padded_frames: pad_len(y.frame_count(), GOP) as u32,
        width: y.width() as u32,
        height: y.height() as u32,
        frames: y.frame_count() as u32,
        fps_num: y.fps().0,
        fps_den: y.fps().1,
        q: q.value(),
        q3_scale,
        bit_depth: 8,
        sample_map: None,
    };
    Ok((EncodedStream { header, groups }, all_stats))
}

/// Decodes a color stream to its (luma, cb, cr) planes; chroma planes come
/// back at the subsampled dimensions.
pub fn decode_video_color(stream: &EncodedStream) -> Result<(VideoCube, VideoCube, VideoCube)> {
    let h = &stream.header;
    if h.mode != CodecMode::VideoColor {
        return Err(Error::InvalidArgument(format!(
            "expected a color video stream, got {}",
            h.mode
        )));
    }
    let q = QualityFactor::new(h.q)?;
    let luma_coder = CubeCoder::new(&QuantTable::luma(), q, h.q3_scale)?;
    let chroma_coder = CubeCoder::new(&QuantTable::chroma(), q, h.q3_scale)?;

    let (cw, ch) = ((h.width as usize).div_ceil(2), (h.height as usize).div_ceil(2));
    let mut planes = Vec::with_capacity(3);
    for (c, (coder, width, height)) in [
        (&luma_coder, h.width as usize, h.height as usize),
        (&chroma_coder, cw, ch),
        (&chroma_coder, cw, ch),
    ]
    .into_iter()
    .enumerate()
    {
        let payloads: Vec<&[u8]> = stream.groups.iter().map(|g| g[c].as_slice()).collect();
        let frames = coder.decode(
            &payloads,
            pad_len(width, BLOCK),
            pad_len(height, BLOCK),
            h.bit_depth,
        )?;
        let cropped: Vec<Frame> = frames
            .iter()
            .take(h.frames as usize)
            .map(|f| crop_frame(f, width, height))
            .collect();
        planes.push(VideoCube::new(cropped, (h.fps_num, h.fps_den))?);
    }
    let cr = planes.pop().expect("three planes");
    let cb = planes.pop().expect("three planes");
    let y = planes.pop().expect("three planes");
    Ok((y, cb, cr))
}

fn volume_advice(err: Error) -> Error {
    match err {
        Error::OutOfRange(m) => Error::OutOfRange(format!(
            "{m}; enable 8-bit sample rescaling or use a larger quantization scale"
        )),
        other => other,
    }
}

/// Codes a volume slice by slice through the cubic pipeline. With `rescale`
/// set, samples are first mapped linearly from their observed range to 0..255
/// and the map is recorded in the header.
pub fn encode_volume(
    volume: &Volume,
    q: QualityFactor,
    q3_scale: f32,
    rescale: bool,
) -> Result<EncodedStream> {
    Ok(encode_volume_with_stats(volume, q, q3_scale, rescale)?.0)
}

/// Codes a volume and reports coefficient statistics from the run.
pub fn encode_volume_with_stats(
    volume: &Volume,
    q: QualityFactor,
    q3_scale: f32,
    rescale: bool,
) -> Result<(EncodedStream, CoeffStats)> {
    let coder = CubeCoder::new(&QuantTable::luma(), q, q3_scale)?;
    let mut stats = CoeffStats::cube(BLOCK);

    let (coded_slices, sample_map) = if rescale {
        let lo = volume
            .slices()
            .iter()
            .flat_map(|s| s.samples())
            .copied()
            .min()
            .expect("volume is nonempty");
        let hi = volume
            .slices()
            .iter()
            .flat_map(|s| s.samples())
            .copied()
            .max()
            .expect("volume is nonempty");
        let mapped: Vec<Frame> = volume
            .slices()
            .iter()
            .map(|s| {
                let samples = s
                    .samples()
                    .iter()
                    .map(|&v| map_to_byte(v, lo, hi))
                    .collect();
                Frame::from_raw(s.width(), s.height(), 8, samples)
            })
            .collect();
        (mapped, Some((lo as f32, hi as f32)))
    } else {
        (volume.slices().to_vec(), None)
    };

    let padded = pad_sequence(&coded_slices);
    let payloads = coder.encode(&padded, &mut stats).map_err(volume_advice)?;

    let header = StreamHeader {
        mode: CodecMode::Volume,
        padded_width: padded[0].width() as u32,
        padded_height: padded[0].height() as u32,
        padded_frames: padded.len() as u32,
        width: volume.width() as u32,
        height: volume.height() as u32,
        frames: volume.slice_count() as u32,
        fps_num: 0,
        fps_den: 1,
        q: q.value(),
        q3_scale,
        bit_depth: volume.bit_depth(),
        sample_map,
    };
    let groups = payloads.into_iter().map(|p| vec![p]).collect();
    Ok((EncodedStream { header, groups }, stats))
}

fn map_to_byte(v: u16, lo: u16, hi: u16) -> u16 {
    if hi == lo {
        return 0;
    }
    let scaled = (v - lo) as f64 * 255.0 / (hi - lo) as f64;
    scaled.round() as u16
}

fn map_from_byte(v: u16, lo: f32, hi: f32, max: u16) -> u16 {
    let restored = v as f64 * (hi as f64 - lo as f64) / 255.0 + lo as f64;
    clamp_sample(restored, max)
}

/// Decodes a volume stream, undoing the sample rescale if one was recorded.
pub fn decode_volume(stream: &EncodedStream) -> Result<Volume> {
    let h = &stream.header;
    if h.mode != CodecMode::Volume {
        return Err(Error::InvalidArgument(format!("expected a volume stream, got {}", h.mode)));
    }
    let coder = CubeCoder::new(&QuantTable::luma(), QualityFactor::new(h.q)?, h.q3_scale)?;
    let payloads: Vec<&[u8]> = stream.groups.iter().map(|g| g[0].as_slice()).collect();
    // Rescaled streams reconstruct in the 8-bit intermediate range first.
    let coded_depth = if h.sample_map.is_some() { 8 } else { h.bit_depth };
    let frames = coder.decode(
        &payloads,
        h.padded_width as usize,
        h.padded_height as usize,
        coded_depth,
    )?;
    let max = (1u16 << h.bit_depth) - 1;
    let slices: Vec<Frame> = frames
        .iter()
        .take(h.frames as usize)
        .map(|f| {
            let cropped = crop_frame(f, h.width as usize, h.height as usize);
            match h.sample_map {
                Some((lo, hi)) => {
                    let samples = cropped
                        .samples()
                        .iter()
                        .map(|&v| map_from_byte(v, lo, hi, max))
                        .collect();
                    Frame::from_raw(cropped.width(), cropped.height(), h.bit_depth, samples)
                }
                None => cropped,
            }
        })
        .collect();
    Volume::new(slices)
}
