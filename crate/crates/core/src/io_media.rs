//! Media file formats: YUV4MPEG2 video, binary PGM stills, and raw volume
//! blobs described by a JSON sidecar.
//!
//! Readers reject truncation deterministically: a file that ends inside a
//! declared frame or plane never yields partial data.

use crate::codec::{Frame, VideoCube, Volume};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// Chroma layout tag of a YUV4MPEG2 stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChromaFormat {
    C420,
    C420Jpeg,
    C420Mpeg2,
    Mono,
}

impl ChromaFormat {
    pub fn is_mono(self) -> bool {
        self == ChromaFormat::Mono
    }

    fn tag(self) -> &'static str {
        match self {
            ChromaFormat::C420 => "420",
            ChromaFormat::C420Jpeg => "420jpeg",
            ChromaFormat::C420Mpeg2 => "420mpeg2",
            ChromaFormat::Mono => "mono",
        }
    }

    fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "420" => Ok(ChromaFormat::C420),
            "420jpeg" => Ok(ChromaFormat::C420Jpeg),
            "420mpeg2" => Ok(ChromaFormat::C420Mpeg2),
            "mono" => Ok(ChromaFormat::Mono),
            other => Err(Error::UnsupportedFormat(format!("chroma layout C{other}"))),
        }
    }
}

/// Parsed YUV4MPEG2 stream header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Y4mHeader {
    pub width: usize,
    pub height: usize,
    pub fps: (u16, u16),
    pub interlace: String,
    pub aspect: String,
    pub chroma: ChromaFormat,
}

/// A decoded YUV4MPEG2 stream: the luma plane always, chroma planes at
/// quarter size unless the stream is monochrome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Y4mVideo {
    pub header: Y4mHeader,
    pub y: VideoCube,
    pub cb: Option<VideoCube>,
    pub cr: Option<VideoCube>,
}

impl Y4mVideo {
    pub fn is_color(&self) -> bool {
        self.cb.is_some()
    }
}

pub fn read_y4m(mut reader: impl Read) -> Result<Y4mVideo> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    parse_y4m(&bytes)
}

pub fn parse_y4m(bytes: &[u8]) -> Result<Y4mVideo> {
    if bytes.is_empty() {
        return Err(Error::TruncatedInput("empty stream".into()));
    }
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::TruncatedInput("stream header is not terminated".into()))?;
    let header_line = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| Error::UnsupportedFormat("stream header is not ASCII".into()))?;
    let mut tokens = header_line.split_ascii_whitespace();
    if tokens.next() != Some("YUV4MPEG2") {
        return Err(Error::UnsupportedFormat("missing YUV4MPEG2 signature".into()));
    }

    let mut width = None;
    let mut height = None;
    let mut fps = (30u16, 1u16);
    let mut interlace = "p".to_string();
    let mut aspect = "0:0".to_string();
    let mut chroma = ChromaFormat::C420;
    for token in tokens {
        let (key, value) = token.split_at(1);
        match key {
            "W" => width = Some(parse_dim(value, "width")?),
            "H" => height = Some(parse_dim(value, "height")?),
            "F" => fps = parse_ratio(value)?,
            "I" => interlace = value.to_string(),
            "A" => aspect = value.to_string(),
            "C" => chroma = ChromaFormat::from_tag(value)?,
            // X parameters and unknown tags carry no sample data.
            _ => {}
        }
    }
    let width = width.ok_or_else(|| Error::UnsupportedFormat("header lacks a width".into()))?;
    let height = height.ok_or_else(|| Error::UnsupportedFormat("header lacks a height".into()))?;
    let header = Y4mHeader { width, height, fps, interlace, aspect, chroma };

    let (cw, ch) = (width.div_ceil(2), height.div_ceil(2));
    let mut y_frames = Vec::new();
    let mut cb_frames = Vec::new();
    let mut cr_frames = Vec::new();
    let mut pos = header_end + 1;
    while pos < bytes.len() {
        if !bytes[pos..].starts_with(b"FRAME") {
            return Err(Error::UnsupportedFormat(format!(
                "expected a FRAME marker at byte {pos}"
            )));
        }
        let marker_end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::TruncatedInput("frame marker is not terminated".into()))?;
        pos += marker_end + 1;
        y_frames.push(read_plane(bytes, &mut pos, width, height, y_frames.len(), "Y")?);
        if !chroma.is_mono() {
            cb_frames.push(read_plane(bytes, &mut pos, cw, ch, cb_frames.len(), "Cb")?);
            cr_frames.push(read_plane(bytes, &mut pos, cw, ch, cr_frames.len(), "Cr")?);
        }
    }
    if y_frames.is_empty() {
        return Err(Error::TruncatedInput("stream contains no frames".into()));
    }

    let y = VideoCube::new(y_frames, fps)?;
    let (cb, cr) = if chroma.is_mono() {
        (None, None)
    } else {
        (
            Some(VideoCube::new(cb_frames, fps)?),
            Some(VideoCube::new(cr_frames, fps)?),
        )
    };
    Ok(Y4mVideo { header, y, cb, cr })
}

fn parse_dim(text: &str, what: &str) -> Result<usize> {
    let v: usize = text
        .parse()
        .map_err(|_| Error::UnsupportedFormat(format!("bad {what} {text:?}")))?;
    if v == 0 {
        return Err(Error::UnsupportedFormat(format!("{what} must be nonzero")));
    }
    Ok(v)
}

fn parse_ratio(text: &str) -> Result<(u16, u16)> {
    let (num, den) = text
        .split_once(':')
        .ok_or_else(|| Error::UnsupportedFormat(format!("bad frame rate {text:?}")))?;
    let num: u32 = num
        .parse()
        .map_err(|_| Error::UnsupportedFormat(format!("bad frame rate {text:?}")))?;
    let den: u32 = den
        .parse()
        .map_err(|_| Error::UnsupportedFormat(format!("bad frame rate {text:?}")))?;
    if num == 0 || den == 0 {
        return Err(Error::UnsupportedFormat(format!("frame rate {text:?} has a zero term")));
    }
    if num > u16::MAX as u32 || den > u16::MAX as u32 {
        return Err(Error::UnsupportedFormat(format!("frame rate {text:?} is too large")));
    }
    Ok((num as u16, den as u16))
}

fn read_plane(
    bytes: &[u8],
    pos: &mut usize,
    width: usize,
    height: usize,
    frame_index: usize,
    plane: &str,
) -> Result<Frame> {
    let len = width * height;
    if *pos + len > bytes.len() {
        return Err(Error::TruncatedInput(format!(
            "frame {frame_index} {plane} plane needs {len} bytes, {} remain",
            bytes.len() - *pos
        )));
    }
    let samples = bytes[*pos..*pos + len].iter().map(|&b| b as u16).collect();
    *pos += len;
    Frame::new(width, height, 8, samples)
}

pub fn write_y4m(mut writer: impl Write, video: &Y4mVideo) -> Result<()> {
    let h = &video.header;
    if video.y.width() != h.width || video.y.height() != h.height {
        return Err(Error::InvalidArgument(format!(
            "luma plane is {}x{} but header says {}x{}",
            video.y.width(),
            video.y.height(),
            h.width,
            h.height
        )));
    }
    if video.y.bit_depth() != 8 {
        return Err(Error::InvalidArgument("YUV4MPEG2 output must be 8-bit".into()));
    }
    if h.chroma.is_mono() != video.cb.is_none() || video.cb.is_some() != video.cr.is_some() {
        return Err(Error::InvalidArgument(
            "chroma planes do not match the header's chroma layout".into(),
        ));
    }
    if let (Some(cb), Some(cr)) = (&video.cb, &video.cr) {
        let (cw, ch) = (h.width.div_ceil(2), h.height.div_ceil(2));
        for (name, plane) in [("Cb", cb), ("Cr", cr)] {
            if plane.width() != cw || plane.height() != ch {
                return Err(Error::InvalidArgument(format!(
                    "{name} plane is {}x{}, expected {cw}x{ch}",
                    plane.width(),
                    plane.height()
                )));
            }
            if plane.frame_count() != video.y.frame_count() {
                return Err(Error::InvalidArgument(format!(
                    "{name} plane has {} frames, luma has {}",
                    plane.frame_count(),
                    video.y.frame_count()
                )));
            }
        }
    }

    write!(
        writer,
        "YUV4MPEG2 W{} H{} F{}:{} I{} A{} C{}\n",
        h.width,
        h.height,
        h.fps.0,
        h.fps.1,
        h.interlace,
        h.aspect,
        h.chroma.tag()
    )?;
    for i in 0..video.y.frame_count() {
        writer.write_all(b"FRAME\n")?;
        write_plane(&mut writer, &video.y.frames()[i])?;
        if let (Some(cb), Some(cr)) = (&video.cb, &video.cr) {
            write_plane(&mut writer, &cb.frames()[i])?;
            write_plane(&mut writer, &cr.frames()[i])?;
        }
    }
    Ok(())
}

fn write_plane(writer: &mut impl Write, frame: &Frame) -> Result<()> {
    let bytes: Vec<u8> = frame.samples().iter().map(|&s| s as u8).collect();
    writer.write_all(&bytes)?;
    Ok(())
}

pub fn read_pgm(mut reader: impl Read) -> Result<Frame> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    parse_pgm(&bytes)
}

/// Binary (P5) PGM with maxval 255 or 4095; 12-bit samples are two bytes,
/// most significant first.
pub fn parse_pgm(bytes: &[u8]) -> Result<Frame> {
    if bytes.is_empty() {
        return Err(Error::TruncatedInput("empty file".into()));
    }
    if bytes.starts_with(b"P2") {
        return Err(Error::UnsupportedFormat("plain-text (P2) PGM is not supported".into()));
    }
    if !bytes.starts_with(b"P5") {
        return Err(Error::UnsupportedFormat("missing P5 signature".into()));
    }
    let mut pos = 2;
    let width = read_pgm_number(bytes, &mut pos)?;
    let height = read_pgm_number(bytes, &mut pos)?;
    let maxval = read_pgm_number(bytes, &mut pos)?;
    // A single whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        Some(_) => return Err(Error::UnsupportedFormat("header is not terminated".into())),
        None => return Err(Error::TruncatedInput("file ends inside the header".into())),
    }
    if width == 0 || height == 0 {
        return Err(Error::UnsupportedFormat("image dimensions must be nonzero".into()));
    }
    let (bit_depth, bytes_per_sample) = match maxval {
        255 => (8u8, 1usize),
        4095 => (12u8, 2usize),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "maxval {other} (only 255 and 4095 are supported)"
            )))
        }
    };
    let need = width * height * bytes_per_sample;
    let raster = &bytes[pos..];
    if raster.len() < need {
        return Err(Error::TruncatedInput(format!(
            "raster needs {need} bytes, {} remain",
            raster.len()
        )));
    }
    if raster.len() > need {
        return Err(Error::UnsupportedFormat(format!(
            "{} trailing bytes after the raster",
            raster.len() - need
        )));
    }
    let samples: Vec<u16> = if bytes_per_sample == 1 {
        raster.iter().map(|&b| b as u16).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|pair| u16::from_be_bytes([pair[0], pair[1]]))
            .collect()
    };
    Frame::new(width, height, bit_depth, samples)
}

fn read_pgm_number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(b) if b.is_ascii_digit() => break,
            Some(&b) => {
                return Err(Error::UnsupportedFormat(format!(
                    "unexpected byte 0x{b:02x} in header"
                )))
            }
            None => return Err(Error::TruncatedInput("file ends inside the header".into())),
        }
    }
    let mut value = 0usize;
    while let Some(&b) = bytes.get(*pos) {
        if !b.is_ascii_digit() {
            break;
        }
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add((b - b'0') as usize))
            .ok_or_else(|| Error::UnsupportedFormat("header number overflows".into()))?;
        *pos += 1;
    }
    Ok(value)
}

pub fn write_pgm(mut writer: impl Write, frame: &Frame) -> Result<()> {
    let maxval = frame.max_value();
    write!(writer, "P5\n{} {}\n{}\n", frame.width(), frame.height(), maxval)?;
    if frame.bit_depth() == 8 {
        let bytes: Vec<u8> = frame.samples().iter().map(|&s| s as u8).collect();
        writer.write_all(&bytes)?;
    } else {
        let mut bytes = Vec::with_capacity(frame.samples().len() * 2);
        for &s in frame.samples() {
            bytes.extend_from_slice(&s.to_be_bytes());
        }
        writer.write_all(&bytes)?;
    }
    Ok(())
}

/// Byte order of multi-byte samples in a raw volume blob.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endianness {
    #[default]
    Little,
    Big,
}

/// Sidecar description of a raw volume: dimensions, sample layout, and the
/// blob files (in slice order; the volume may be split across several).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawVolumeSpec {
    pub width: usize,
    pub height: usize,
    pub slices: usize,
    pub bit_depth: u8,
    #[serde(default)]
    pub endian: Endianness,
    pub files: Vec<String>,
}

pub fn read_volume_spec(path: &Path) -> Result<RawVolumeSpec> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::UnsupportedFormat(format!("bad volume spec: {e}")))
}

/// Loads the blobs named by `spec`, resolved relative to `dir`.
pub fn read_raw_volume(spec: &RawVolumeSpec, dir: &Path) -> Result<Volume> {
    if spec.width == 0 || spec.height == 0 || spec.slices == 0 {
        return Err(Error::InvalidArgument("volume dimensions must be nonzero".into()));
    }
    if spec.bit_depth != 8 && spec.bit_depth != 12 {
        return Err(Error::InvalidArgument(format!(
            "bit depth must be 8 or 12, got {}",
            spec.bit_depth
        )));
    }
    if spec.files.is_empty() {
        return Err(Error::InvalidArgument("volume spec names no blob files".into()));
    }
    let bytes_per_sample = if spec.bit_depth == 8 { 1 } else { 2 };
    let expected = spec.width * spec.height * spec.slices * bytes_per_sample;
    let mut blob = Vec::with_capacity(expected);
    for name in &spec.files {
        let mut file = std::fs::File::open(dir.join(name))?;
        file.read_to_end(&mut blob)?;
    }
    if blob.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "blobs hold {} bytes, spec declares {expected}",
            blob.len()
        )));
    }

    let samples: Vec<u16> = if bytes_per_sample == 1 {
        blob.iter().map(|&b| b as u16).collect()
    } else {
        blob.chunks_exact(2)
            .map(|pair| match spec.endian {
                Endianness::Little => u16::from_le_bytes([pair[0], pair[1]]),
                Endianness::Big => u16::from_be_bytes([pair[0], pair[1]]),
            })
            .collect()
    };
    let per_slice = spec.width * spec.height;
    let slices = samples
        .chunks_exact(per_slice)
        .map(|chunk| Frame::new(spec.width, spec.height, spec.bit_depth, chunk.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Volume::new(slices)
}

/// Writes the volume as one little-endian blob plus its JSON sidecar.
pub fn write_raw_volume(volume: &Volume, blob_path: &Path, spec_path: &Path) -> Result<()> {
    let bytes_per_sample = if volume.bit_depth() == 8 { 1 } else { 2 };
    let mut blob =
        Vec::with_capacity(volume.width() * volume.height() * volume.slice_count() * bytes_per_sample);
    for slice in volume.slices() {
        for &s in slice.samples() {
            if bytes_per_sample == 1 {
                blob.push(s as u8);
            } else {
                blob.extend_from_slice(&s.to_le_bytes());
            }
        }
    }
    std::fs::write(blob_path, blob)?;

    let blob_name = blob_path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument("blob path has no file name".into()))?
        .to_string_lossy()
        .into_owned();
    let spec = RawVolumeSpec {
        width: volume.width(),
        height: volume.height(),
        slices: volume.slice_count(),
        bit_depth: volume.bit_depth(),
        endian: Endianness::Little,
        files: vec![blob_name],
    };
    let json = serde_json::to_string_pretty(&spec)
        .map_err(|e| Error::InvalidArgument(format!("cannot serialize volume spec: {e}")))?;
    std::fs::write(spec_path, json + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_y4m() -> Vec<u8> {
        let mut bytes = b"YUV4MPEG2 W4 H2 F25:1 Ip A1:1 C420jpeg\n".to_vec();
        for f in 0..2u8 {
            bytes.extend_from_slice(b"FRAME\n");
            bytes.extend_from_slice(&[10 + f, 20, 30, 40, 50, 60, 70, 80 + f]); // Y 4x2
            bytes.extend_from_slice(&[100, 110]); // Cb 2x1
            bytes.extend_from_slice(&[120, 130]); // Cr 2x1
        }
        bytes
    }

    #[test]
    fn y4m_parse_reads_header_and_planes() {
        let video = parse_y4m(&sample_y4m()).unwrap();
        assert_eq!(video.header.width, 4);
        assert_eq!(video.header.height, 2);
        assert_eq!(video.header.fps, (25, 1));
        assert_eq!(video.header.chroma, ChromaFormat::C420Jpeg);
        assert!(video.is_color());
        assert_eq!(video.y.frame_count(), 2);
        assert_eq!(video.y.frames()[0].get(0, 0), 10);
        assert_eq!(video.y.frames()[1].get(0, 0), 11);
        let cb = video.cb.as_ref().unwrap();
        assert_eq!((cb.width(), cb.height()), (2, 1));
        assert_eq!(cb.frames()[0].get(0, 1), 110);
    }

    #[test]
    fn y4m_roundtrips_byte_exactly() {
        let source = sample_y4m();
        let video = parse_y4m(&source).unwrap();
        let mut out = Vec::new();
        write_y4m(&mut out, &video).unwrap();
        assert_eq!(out, source);
    }

    #[test]
    fn y4m_mono_streams_have_no_chroma() {
        let mut bytes = b"YUV4MPEG2 W4 H2 F30:1 Ip A0:0 Cmono\n".to_vec();
        bytes.extend_from_slice(b"FRAME\n");
        bytes.extend_from_slice(&[1, 2, 3, 4, 5, 6, 7, 8]);
        let video = parse_y4m(&bytes).unwrap();
        assert!(!video.is_color());
        assert_eq!(video.y.frame_count(), 1);
        let mut out = Vec::new();
        write_y4m(&mut out, &video).unwrap();
        assert_eq!(out, bytes);
    }

    #[test]
    fn y4m_defaults_and_unknown_tags() {
        let mut bytes = b"YUV4MPEG2 W2 H2 Xsomething\n".to_vec();
        bytes.extend_from_slice(b"FRAME\n");
        bytes.extend_from_slice(&[1, 2, 3, 4]); // Y
        bytes.extend_from_slice(&[9]); // Cb 1x1
        bytes.extend_from_slice(&[8]); // Cr 1x1
        let video = parse_y4m(&bytes).unwrap();
        assert_eq!(video.header.fps, (30, 1));
        assert_eq!(video.header.chroma, ChromaFormat::C420);
    }

    #[test]
    fn y4m_rejects_bad_streams() {
        assert!(matches!(parse_y4m(b""), Err(Error::TruncatedInput(_))));
        assert!(matches!(parse_y4m(b"JUNK W2 H2\n"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 H2\nFRAME\n\x01\x02"),
            Err(Error::UnsupportedFormat(_))
        ));
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 W2 H2 C444\n"),
            Err(Error::UnsupportedFormat(_))
        ));
        // Header only: no frames.
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 W2 H2 Cmono\n"),
            Err(Error::TruncatedInput(_))
        ));
        // Frame data cut short.
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 W2 H2 Cmono\nFRAME\n\x01\x02"),
            Err(Error::TruncatedInput(_))
        ));
        // Garbage where the next FRAME marker should be.
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 W2 H2 Cmono\nFRAME\n\x01\x02\x03\x04JUNK"),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn pgm_eight_bit_roundtrip() {
        let mut bytes = b"P5\n# test image\n4 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 64, 128, 255, 1, 2, 3, 4]);
        let frame = parse_pgm(&bytes).unwrap();
        assert_eq!((frame.width(), frame.height(), frame.bit_depth()), (4, 2, 8));
        assert_eq!(frame.get(0, 3), 255);
        assert_eq!(frame.get(1, 0), 1);
        let mut out = Vec::new();
        write_pgm(&mut out, &frame).unwrap();
        // The writer drops the comment but keeps the raster identical.
        assert_eq!(parse_pgm(&out).unwrap(), frame);
    }

    #[test]
    fn pgm_twelve_bit_uses_big_endian_pairs() {
        let mut bytes = b"P5\n2 1\n4095\n".to_vec();
        bytes.extend_from_slice(&4095u16.to_be_bytes());
        bytes.extend_from_slice(&256u16.to_be_bytes());
        let frame = parse_pgm(&bytes).unwrap();
        assert_eq!(frame.bit_depth(), 12);
        assert_eq!(frame.get(0, 0), 4095);
        assert_eq!(frame.get(0, 1), 256);
        let mut out = Vec::new();
        write_pgm(&mut out, &frame).unwrap();
        assert_eq!(out, bytes);

        // A sample above the declared maxval is a data error.
        let mut bad = b"P5\n1 1\n4095\n".to_vec();
        bad.extend_from_slice(&4096u16.to_be_bytes());
        assert!(matches!(parse_pgm(&bad), Err(Error::DataRange(_))));
    }

    #[test]
    fn pgm_rejects_bad_files() {
        assert!(matches!(parse_pgm(b""), Err(Error::TruncatedInput(_))));
        assert!(matches!(parse_pgm(b"P2\n1 1\n255\n0"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(parse_pgm(b"P6\n1 1\n255\n"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(parse_pgm(b"P5\n1 1\n65535\n\x00\x00"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(parse_pgm(b"P5\n2 2\n255\n\x00\x01"), Err(Error::TruncatedInput(_))));
        let mut trailing = b"P5\n1 1\n255\n".to_vec();
        trailing.extend_from_slice(&[7, 8]);
        assert!(matches!(parse_pgm(&trailing), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn raw_volume_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let slices: Vec<Frame> = (0..3)
            .map(|k| {
                let samples = (0..4 * 2).map(|i| (k * 100 + i * 37) as u16 % 4096).collect();
                Frame::new(4, 2, 12, samples).unwrap()
            })
            .collect();
        let volume = Volume::new(slices).unwrap();

        let blob = dir.path().join("vol.raw");
        let spec_path = dir.path().join("vol.json");
        write_raw_volume(&volume, &blob, &spec_path).unwrap();
        let spec = read_volume_spec(&spec_path).unwrap();
        assert_eq!(spec.slices, 3);
        assert_eq!(spec.endian, Endianness::Little);
        let back = read_raw_volume(&spec, dir.path()).unwrap();
        assert_eq!(back, volume);
    }

    #[test]
    fn raw_volume_validates_sizes_and_depth() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("short.raw"), [0u8; 10]).unwrap();
        let spec = RawVolumeSpec {
            width: 4,
            height: 2,
            slices: 2,
            bit_depth: 8,
            endian: Endianness::Little,
            files: vec!["short.raw".into()],
        };
        assert!(matches!(
            read_raw_volume(&spec, dir.path()),
            Err(Error::InvalidArgument(_))
        ));
        let bad_depth = RawVolumeSpec { bit_depth: 10, ..spec.clone() };
        assert!(read_raw_volume(&bad_depth, dir.path()).is_err());
        let no_files = RawVolumeSpec { files: vec![], ..spec };
        assert!(read_raw_volume(&no_files, dir.path()).is_err());
    }

    #[test]
    fn raw_volume_split_across_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.raw"), [1u8, 2, 3, 4]).unwrap();
        std::fs::write(dir.path().join("b.raw"), [5u8, 6, 7, 8]).unwrap();
        let spec = RawVolumeSpec {
            width: 2,
            height: 2,
            slices: 2,
            bit_depth: 8,
            endian: Endianness::Little,
            files: vec!["a.raw".into(), "b.raw".into()],
        };
        let volume = read_raw_volume(&spec, dir.path()).unwrap();
        assert_eq!(volume.slice_count(), 2);
        assert_eq!(volume.slices()[1].get(1, 1), 8);
    }

    #[test]
    fn big_endian_volume_samples() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("be.raw"), 0x0abcu16.to_be_bytes()).unwrap();
        let spec = RawVolumeSpec {
            width: 1,
            height: 1,
            slices: 1,
            bit_depth: 12,
            endian: Endianness::Big,
            files: vec!["be.raw".into()],
        };
        assert_eq!(read_raw_volume(&spec, dir.path()).unwrap().slices()[0].get(0, 0), 0x0abc);
    }
}
