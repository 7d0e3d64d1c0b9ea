//! Bit-exact stream primitives. MSB-first within each byte, so the first
//! bit written lands in bit 7 of byte 0; rate accounting depends on
//! `bit_len` counting exactly what was written.

use crate::{Error, Result};

#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn write_bit(&mut self, bit: bool) {
        let slot = self.bit_len / 8;
        if slot == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[slot] |= 0x80 >> (self.bit_len % 8);
        }
        self.bit_len += 1;
    }

    /// Writes the low `width` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, width: u32) {
        assert!(width <= 64, "width {width} exceeds u64");
        assert!(
            width == 64 || value >> width == 0,
            "value {value} does not fit in {width} bits"
        );
        for shift in (0..width).rev() {
            self.write_bit((value >> shift) & 1 == 1);
        }
    }

    /// Zero-pads to the next byte boundary.
    pub fn align_to_byte(&mut self) {
        while self.bit_len % 8 != 0 {
            self.write_bit(false);
        }
    }

    pub fn write_bytes(&mut self, data: &[u8]) {
        if self.bit_len % 8 == 0 {
            self.bytes.extend_from_slice(data);
            self.bit_len += 8 * data.len();
        } else {
            for &b in data {
                self.write_bits(b as u64, 8);
            }
        }
    }

    /// LEB128: 7 payload bits per byte, low group first, high bit marks
    /// continuation.
    pub fn write_varint(&mut self, mut value: u64) {
        loop {
            let group = (value & 0x7f) as u64;
            value >>= 7;
            if value == 0 {
                self.write_bits(group, 8);
                return;
            }
            self.write_bits(group | 0x80, 8);
        }
    }

    pub fn into_bytes(mut self) -> Vec<u8> {
        self.align_to_byte();
        self.bytes
    }
}

#[derive(Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn bit_pos(&self) -> usize {
        self.pos
    }

    pub fn remaining_bits(&self) -> usize {
        8 * self.bytes.len() - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        let slot = self.pos / 8;
        if slot >= self.bytes.len() {
            return Err(Error::Format("bitstream truncated".into()));
        }
        let bit = self.bytes[slot] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, width: u32) -> Result<u64> {
        assert!(width <= 64, "width {width} exceeds u64");
        if self.remaining_bits() < width as usize {
            return Err(Error::Format("bitstream truncated".into()));
        }
        let mut value = 0u64;
        for _ in 0..width {
            value = (value << 1) | self.read_bit()? as u64;
        }
        Ok(value)
    }

    /// Skips padding bits; errors if any padding bit is set, which catches
    /// streams assembled with a different alignment convention.
    pub fn align_to_byte(&mut self) -> Result<()> {
        while self.pos % 8 != 0 {
            if self.read_bit()? {
                return Err(Error::Format("nonzero padding bit".into()));
            }
        }
        Ok(())
    }

    pub fn read_bytes(&mut self, count: usize) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(self.read_bits(8)? as u8);
        }
        Ok(out)
    }

    pub fn read_varint(&mut self) -> Result<u64> {
        let mut value = 0u64;
        let mut shift = 0u32;
        loop {
            let byte = self.read_bits(8)?;
            if shift >= 63 && byte > 1 {
                return Err(Error::Format("varint overflows 64 bits".into()));
            }
            value |= (byte & 0x7f) << shift;
            if byte & 0x80 == 0 {
                return Ok(value);
            }
            shift += 7;
            if shift > 63 {
                return Err(Error::Format("varint overflows 64 bits".into()));
            }
        }
    }
}
