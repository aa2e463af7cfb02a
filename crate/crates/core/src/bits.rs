//! MSB-first bit packing for the entropy coder.

use crate::error::{Error, Result};

/// Appends bit strings to a byte vector, most significant bit first.
#[derive(Clone, Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    /// Bits already written, including those in the partial last byte.
    len_bits: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Writes the low `len` bits of `bits`, highest first. `len` may be 0.
    pub fn write_bits(&mut self, bits: u32, len: u8) {
        debug_assert!(len <= 32);
        debug_assert!(len == 32 || bits < (1u64 << len) as u32, "value wider than len");
        for shift in (0..len).rev() {
            let bit = (bits >> shift) & 1;
            let offset = self.len_bits % 8;
            if offset == 0 {
                self.bytes.push(0);
            }
            if bit == 1 {
                *self.bytes.last_mut().unwrap() |= 0x80 >> offset;
            }
            self.len_bits += 1;
        }
    }

    pub fn len_bits(&self) -> usize {
        self.len_bits
    }

    /// Fills the partial last byte with 1-bits so the output ends on a byte
    /// boundary.
    pub fn pad_to_byte(&mut self) {
        while self.len_bits % 8 != 0 {
            self.write_bits(1, 1);
        }
    }

    pub fn into_bytes(mut self) -> Vec<u8> {
        self.pad_to_byte();
        self.bytes
    }
}

/// Reads bits most significant first from a byte slice.
#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos_bits: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos_bits: 0 }
    }

    pub fn read_bit(&mut self) -> Result<u32> {
        if self.pos_bits >= self.bytes.len() * 8 {
            return Err(Error::TruncatedStream(format!(
                "bit {} requested but payload holds {} bits",
                self.pos_bits,
                self.bytes.len() * 8
            )));
        }
        let byte = self.bytes[self.pos_bits / 8];
        let bit = (byte >> (7 - self.pos_bits % 8)) & 1;
        self.pos_bits += 1;
        Ok(bit as u32)
    }

    pub fn read_bits(&mut self, len: u8) -> Result<u32> {
        debug_assert!(len <= 32);
        let mut out = 0u32;
        for _ in 0..len {
            out = (out << 1) | self.read_bit()?;
        }
        Ok(out)
    }

    pub fn pos_bits(&self) -> usize {
        self.pos_bits
    }

    pub fn remaining_bits(&self) -> usize {
        self.bytes.len() * 8 - self.pos_bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn writes_msb_first() {
        let mut w = BitWriter::new();
        w.write_bits(0b1, 1);
        w.write_bits(0b01, 2);
        w.write_bits(0b10100, 5);
        assert_eq!(w.into_bytes(), vec![0b1011_0100]);
    }

    #[test]
    fn pads_final_byte_with_ones() {
        let mut w = BitWriter::new();
        w.write_bits(0b0, 1);
        assert_eq!(w.into_bytes(), vec![0b0111_1111]);
    }

    #[test]
    fn empty_writer_yields_no_bytes() {
        assert_eq!(BitWriter::new().into_bytes(), Vec::<u8>::new());
    }

    #[test]
    fn reader_tracks_position_and_detects_end() {
        let bytes = [0b1100_0001u8];
        let mut r = BitReader::new(&bytes);
        assert_eq!(r.read_bits(2).unwrap(), 0b11);
        assert_eq!(r.read_bits(6).unwrap(), 0b000001);
        assert_eq!(r.remaining_bits(), 0);
        assert!(matches!(r.read_bit(), Err(Error::TruncatedStream(_))));
    }

    proptest! {
        #[test]
        fn roundtrip_random_bit_strings(
            chunks in proptest::collection::vec((0u32..=0xffff, 1u8..=16), 0..200)
        ) {
            let mut w = BitWriter::new();
            for &(bits, len) in &chunks {
                w.write_bits(bits & ((1u32 << len) - 1), len);
            }
            let total: usize = chunks.iter().map(|&(_, len)| len as usize).sum();
            prop_assert_eq!(w.len_bits(), total);
            let bytes = w.into_bytes();
            let mut r = BitReader::new(&bytes);
            for &(bits, len) in &chunks {
                prop_assert_eq!(r.read_bits(len)?, bits & ((1u32 << len) - 1));
            }
            prop_assert!(r.remaining_bits() < 8);
        }
    }
}
