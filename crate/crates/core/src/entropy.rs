//! Huffman entropy coding of quantized coefficient vectors.
//!
//! A flat coefficient vector becomes one DC value plus (zero-run, value)
//! tokens. The DC value is coded directly (no prediction from the previous
//! block): a category code followed by that many magnitude bits. AC tokens
//! combine the run and the value's category into one symbol; runs of 16 or
//! more are split into ZRL (16-zero) symbols plus a remainder token. A block
//! whose trailing coefficients are all zero ends with an EOB symbol.
//!
//! Negative magnitudes use one's-complement bits: `v + 2^cat - 1`, so -1 is
//! `0`, -10 is `0101`, and the leading bit distinguishes sign.

use crate::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;

/// Largest DC category the embedded tables cover (|value| <= 2047).
pub const DC_MAX_CATEGORY: u8 = 11;
/// Largest AC category the embedded tables cover (|value| <= 1023).
pub const AC_MAX_CATEGORY: u8 = 10;

/// Number of bits needed for |v|: 0 for 0, 1 for +-1, 2 for +-2..3, and so on.
pub fn category(v: i32) -> u8 {
    let mag = (v as i64).unsigned_abs();
    (64 - mag.leading_zeros()) as u8
}

/// Sign-carrying magnitude bits for a nonzero value, `(bits, len)` with
/// `len = category(v)`.
pub fn magnitude_bits(v: i32) -> Result<(u32, u8)> {
    if v == 0 {
        return Err(Error::InvalidArgument("zero has no magnitude bits".into()));
    }
    let cat = category(v);
    let bits = if v > 0 {
        v as i64
    } else {
        v as i64 + (1i64 << cat) - 1
    };
    Ok((bits as u32, cat))
}

/// Inverse of [`magnitude_bits`]; `cat` must be the bit count that was coded.
pub fn magnitude_from_bits(bits: u32, cat: u8) -> i32 {
    debug_assert!((1..=16).contains(&cat));
    if (bits >> (cat - 1)) & 1 == 1 {
        bits as i32
    } else {
        bits as i32 - (1i32 << cat) + 1
    }
}

/// One Huffman codeword, MSB-first in the low `len` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Code {
    pub bits: u16,
    pub len: u8,
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for shift in (0..self.len).rev() {
            f.write_str(if (self.bits >> shift) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

// Code length counts and symbol order for the embedded DC and AC tables
// (baseline luminance set). Codes are rebuilt canonically from these.
const DC_BITS: [u8; 16] = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
const DC_VALUES: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

const AC_BITS: [u8; 16] = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d];
const AC_VALUES: [u8; 162] = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61,
    0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52,
    0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25,
    0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64,
    0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83,
    0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99,
    0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6,
    0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3,
    0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8,
    0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
];

/// DC category codes plus AC (run, category) codes, with decode maps.
#[derive(Clone, Debug)]
pub struct HuffmanTables {
    dc_codes: [Option<Code>; 12],
    ac_codes: [[Option<Code>; 11]; 16],
    dc_decode: HashMap<(u8, u16), u8>,
    ac_decode: HashMap<(u8, u16), (u8, u8)>,
}

impl HuffmanTables {
    /// The embedded baseline luminance tables, shared by every component.
    pub fn baseline() -> Self {
        let dc = assign_canonical(&DC_BITS, &DC_VALUES);
        let ac = assign_canonical(&AC_BITS, &AC_VALUES);
        check_prefix_free(dc.iter().map(|&(_, c)| c).collect::<Vec<_>>())
            .expect("embedded DC table is prefix-free");
        check_prefix_free(ac.iter().map(|&(_, c)| c).collect::<Vec<_>>())
            .expect("embedded AC table is prefix-free");

        let mut dc_codes = [None; 12];
        let mut dc_decode = HashMap::new();
        for (sym, code) in dc {
            dc_codes[sym as usize] = Some(code);
            dc_decode.insert((code.len, code.bits), sym);
        }
        let mut ac_codes = [[None; 11]; 16];
        let mut ac_decode = HashMap::new();
        for (sym, code) in ac {
            let run = sym >> 4;
            let cat = sym & 0x0f;
            ac_codes[run as usize][cat as usize] = Some(code);
            ac_decode.insert((code.len, code.bits), (run, cat));
        }
        HuffmanTables { dc_codes, ac_codes, dc_decode, ac_decode }
    }

    pub fn dc_code(&self, cat: u8) -> Option<Code> {
        self.dc_codes.get(cat as usize).copied().flatten()
    }

    /// `(0, 0)` is EOB and `(15, 0)` is ZRL.
    pub fn ac_code(&self, run: u8, cat: u8) -> Option<Code> {
        self.ac_codes
            .get(run as usize)
            .and_then(|row| row.get(cat as usize))
            .copied()
            .flatten()
    }

    /// Deterministic text listing of every codeword, for inspection and
    /// golden tests.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for cat in 0..12 {
            if let Some(code) = self.dc_codes[cat] {
                out.push_str(&format!("dc {cat} -> {code}\n"));
            }
        }
        for run in 0..16 {
            for cat in 0..11 {
                if let Some(code) = self.ac_codes[run][cat] {
                    let label = match (run, cat) {
                        (0, 0) => "ac eob".to_string(),
                        (15, 0) => "ac zrl".to_string(),
                        _ => format!("ac {run}/{cat}"),
                    };
                    out.push_str(&format!("{label} -> {code}\n"));
                }
            }
        }
        out
    }
}

/// Canonical code assignment: symbols listed in `values`, `bits[i]` of them
/// with length `i + 1`, codes counting up within a length and shifting left
/// at each length step.
fn assign_canonical(bits: &[u8], values: &[u8]) -> Vec<(u8, Code)> {
    let mut out = Vec::with_capacity(values.len());
    let mut code = 0u32;
    let mut next = 0usize;
    for (i, &count) in bits.iter().enumerate() {
        let len = (i + 1) as u8;
        for _ in 0..count {
            out.push((values[next], Code { bits: code as u16, len }));
            next += 1;
            code += 1;
        }
        code <<= 1;
    }
    assert_eq!(next, values.len(), "length counts must cover every symbol");
    out
}

fn check_prefix_free(codes: Vec<Code>) -> Result<()> {
    for (i, a) in codes.iter().enumerate() {
        for b in &codes[i + 1..] {
            let (short, long) = if a.len <= b.len { (a, b) } else { (b, a) };
            if long.bits >> (long.len - short.len) == short.bits {
                return Err(Error::InvalidArgument(format!(
                    "code {short} is a prefix of {long}"
                )));
            }
        }
    }
    Ok(())
}

/// One AC token: `run` zeros (any count; runs of 16+ are split into ZRL
/// symbols when coded) followed by a nonzero `value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AcToken {
    pub run: u16,
    pub value: i32,
}

/// Token form of one coefficient vector: the DC value, the AC tokens, and
/// whether trailing zeros were cut (in which case the coded block ends with
/// EOB).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenStream {
    pub dc: i32,
    pub ac: Vec<AcToken>,
    pub terminated: bool,
}

/// Splits a flat coefficient vector (DC first) into tokens.
pub fn tokenize(flat: &[i32]) -> Result<TokenStream> {
    let (&dc, rest) = flat
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("cannot tokenize an empty vector".into()))?;
    let mut ac = Vec::new();
    let mut run = 0u16;
    for &v in rest {
        if v == 0 {
            run += 1;
        } else {
            ac.push(AcToken { run, value: v });
            run = 0;
        }
    }
    Ok(TokenStream { dc, ac, terminated: run > 0 })
}

/// Rebuilds the flat vector, zero-filling to `block_len`.
pub fn detokenize(stream: &TokenStream, block_len: usize) -> Result<Vec<i32>> {
    let mut out = vec![0i32; block_len];
    if block_len == 0 {
        return Err(Error::InvalidArgument("block length must be at least 1".into()));
    }
    out[0] = stream.dc;
    let mut pos = 1usize;
    for token in &stream.ac {
        pos += token.run as usize;
        if pos >= block_len {
            return Err(Error::InvalidArgument(format!(
                "tokens need at least {} positions but the block holds {block_len}",
                pos + 1
            )));
        }
        out[pos] = token.value;
        pos += 1;
    }
    Ok(out)
}

/// Codes one token stream. DC first (category code + magnitude bits), then
/// each AC token with its run split into ZRL symbols as needed, then EOB if
/// the block was terminated early.
pub fn encode_block(
    stream: &TokenStream,
    tables: &HuffmanTables,
    writer: &mut BitWriter,
) -> Result<()> {
    let dc_cat = category(stream.dc);
    if dc_cat > DC_MAX_CATEGORY {
        return Err(Error::OutOfRange(format!(
            "DC level {} needs category {dc_cat}; the tables stop at {DC_MAX_CATEGORY}",
            stream.dc
        )));
    }
    let code = tables.dc_code(dc_cat).expect("all DC categories up to 11 have codes");
    writer.write_bits(code.bits as u32, code.len);
    if dc_cat > 0 {
        let (bits, len) = magnitude_bits(stream.dc)?;
        writer.write_bits(bits, len);
    }

    let zrl = tables.ac_code(15, 0).expect("ZRL is always present");
    for token in &stream.ac {
        if token.value == 0 {
            return Err(Error::InvalidArgument("AC token value must be nonzero".into()));
        }
        let cat = category(token.value);
        if cat > AC_MAX_CATEGORY {
            return Err(Error::OutOfRange(format!(
                "AC level {} needs category {cat}; the tables stop at {AC_MAX_CATEGORY}",
                token.value
            )));
        }
        let mut run = token.run;
        while run >= 16 {
            writer.write_bits(zrl.bits as u32, zrl.len);
            run -= 16;
        }
        let code = tables
            .ac_code(run as u8, cat)
            .expect("all runs below 16 and categories up to 10 have codes");
        writer.write_bits(code.bits as u32, code.len);
        let (bits, len) = magnitude_bits(token.value)?;
        writer.write_bits(bits, len);
    }

    if stream.terminated {
        let eob = tables.ac_code(0, 0).expect("EOB is always present");
        writer.write_bits(eob.bits as u32, eob.len);
    }
    Ok(())
}

fn read_symbol<T: Copy>(reader: &mut BitReader, map: &HashMap<(u8, u16), T>) -> Result<T> {
    let mut bits = 0u16;
    for len in 1..=16u8 {
        bits = (bits << 1) | reader.read_bit()? as u16;
        if let Some(&sym) = map.get(&(len, bits)) {
            return Ok(sym);
        }
    }
    Err(Error::CorruptStream(format!("no codeword matches bit pattern {bits:016b}")))
}

/// Decodes one block of `block_len` coefficients worth of tokens. The
/// returned stream's `terminated` flag records whether an EOB was read.
pub fn decode_block(
    reader: &mut BitReader,
    tables: &HuffmanTables,
    block_len: usize,
) -> Result<TokenStream> {
    if block_len == 0 {
        return Err(Error::InvalidArgument("block length must be at least 1".into()));
    }
    let dc_cat = read_symbol(reader, &tables.dc_decode)?;
    let dc = if dc_cat == 0 {
        0
    } else {
        magnitude_from_bits(reader.read_bits(dc_cat)?, dc_cat)
    };

    let mut ac = Vec::new();
    let mut consumed = 1usize;
    let mut pending_run = 0u16;
    let mut terminated = false;
    while consumed < block_len {
        let (run, cat) = read_symbol(reader, &tables.ac_decode)?;
        match (run, cat) {
            (0, 0) => {
                if pending_run > 0 {
                    return Err(Error::CorruptStream(
                        "zero-run symbol not followed by a value".into(),
                    ));
                }
                terminated = true;
                break;
            }
            (15, 0) => {
                pending_run += 16;
                consumed += 16;
                if consumed >= block_len {
                    return Err(Error::CorruptStream(format!(
                        "zero run overruns the block ({consumed} of {block_len} positions)"
                    )));
                }
            }
            (run, cat) => {
                consumed += run as usize + 1;
                if consumed > block_len {
                    return Err(Error::CorruptStream(format!(
                        "coefficients overrun the block ({consumed} of {block_len} positions)"
                    )));
                }
                let value = magnitude_from_bits(reader.read_bits(cat)?, cat);
                ac.push(AcToken { run: pending_run + run as u16, value });
                pending_run = 0;
            }
        }
    }
    if pending_run > 0 {
        return Err(Error::CorruptStream("zero-run symbol not followed by a value".into()));
    }
    Ok(TokenStream { dc, ac, terminated })
}
