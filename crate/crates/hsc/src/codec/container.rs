//! The .hsc container. Multi-byte scalar fields are little-endian; packed
//! sub-byte fields (support payloads, coefficient levels) are MSB-first
//! bit groups. Everything before the block region is byte-aligned; the
//! block region is one contiguous bitstream, zero-padded to a byte at the
//! very end. Every category's bit count is tracked exactly so the rate
//! formula can be checked against the stream, not a model of it.

use super::bits::{BitReader, BitWriter};
use super::{ceil_log2, decode_partition, CompressedBlock, CompressedMesh};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"HSC1";
pub const FORMAT_VERSION: u16 = 1;

/// Reorder flag; all other flag bits must be zero in version 1.
const FLAG_REORDERED: u8 = 0x01;

/// Exact bit tally by category. `geometry` covers coefficients, support
/// payloads, and stored strengths; `side` covers per-block bookkeeping
/// (counts, permutations, selector bits, ranges, the reorder size table);
/// `padding` is the terminal byte fill.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RateBreakdown {
    pub header_bits: u64,
    pub connectivity_bits: u64,
    pub geometry_bits: u64,
    pub side_bits: u64,
    pub padding_bits: u64,
}

impl RateBreakdown {
    pub fn total_bits(&self) -> u64 {
        self.header_bits + self.connectivity_bits + self.geometry_bits + self.side_bits
            + self.padding_bits
    }
}

pub fn serialize(cm: &CompressedMesh) -> (Vec<u8>, RateBreakdown) {
    assert_eq!(
        cm.block_sizes.len(),
        cm.blocks.len(),
        "every block needs a size entry"
    );
    let mut w = BitWriter::new();
    let mut rb = RateBreakdown::default();

    w.write_bytes(MAGIC);
    w.write_bytes(&cm.version.to_le_bytes());
    w.write_bytes(&cm.n.to_le_bytes());
    w.write_bytes(&(cm.faces.len() as u32).to_le_bytes());
    w.write_bytes(&cm.block_size.to_le_bytes());
    w.write_bytes(&[cm.coefficient_bits]);
    w.write_bytes(&[if cm.reordered { FLAG_REORDERED } else { 0 }]);
    rb.header_bits = w.bit_len() as u64;

    for f in &cm.faces {
        for &v in f {
            w.write_varint(v as u64);
        }
    }
    rb.connectivity_bits = w.bit_len() as u64 - rb.header_bits;

    if cm.reordered {
        let mark = w.bit_len();
        w.write_bytes(&(cm.block_sizes.len() as u32).to_le_bytes());
        for &s in &cm.block_sizes {
            w.write_bytes(&s.to_le_bytes());
        }
        rb.side_bits += (w.bit_len() - mark) as u64;
    }

    for (i, block) in cm.blocks.iter().enumerate() {
        let n_b = cm.block_sizes[i] as usize;
        write_block(&mut w, &mut rb, block, n_b, cm.coefficient_bits);
    }
    let mark = w.bit_len();
    w.align_to_byte();
    rb.padding_bits = (w.bit_len() - mark) as u64;

    (w.into_bytes(), rb)
}

fn write_block(
    w: &mut BitWriter,
    rb: &mut RateBreakdown,
    block: &CompressedBlock,
    n_b: usize,
    k_d: u8,
) {
    let mut side = 0u64;
    let mut geometry = 0u64;
    let tally = |w: &BitWriter, acc: &mut u64, mark: usize| *acc += (w.bit_len() - mark) as u64;

    let mark = w.bit_len();
    w.write_bytes(&block.k.to_le_bytes());
    w.write_bits(block.mus.len() as u64, 8);
    tally(w, &mut side, mark);

    let mark = w.bit_len();
    for &mu in &block.mus {
        w.write_bytes(&mu.to_le_bytes());
    }
    tally(w, &mut geometry, mark);

    let mark = w.bit_len();
    if let Some(perm) = &block.permutation {
        let mut prev = 0u16;
        for (i, &p) in perm.iter().enumerate() {
            let delta = if i == 0 { p } else { p.wrapping_sub(prev) };
            w.write_bytes(&delta.to_le_bytes());
            prev = p;
        }
    }
    tally(w, &mut side, mark);

    let m = block.dictionary_size(n_b);
    let k = block.k as u64;
    let width = ceil_log2(m);
    let use_bitvec = m < k * width as u64;
    w.write_bit(use_bitvec);
    side += 1;

    let mark = w.bit_len();
    if use_bitvec {
        let mut member = vec![false; m as usize];
        for &s in &block.support {
            member[s as usize] = true;
        }
        for bit in member {
            w.write_bit(bit);
        }
    } else {
        for &s in &block.support {
            w.write_bits(s as u64, width);
        }
    }
    tally(w, &mut geometry, mark);

    let mark = w.bit_len();
    for range in &block.ranges {
        w.write_bytes(&range[0].to_le_bytes());
        w.write_bytes(&range[1].to_le_bytes());
    }
    tally(w, &mut side, mark);

    let mark = w.bit_len();
    for row in &block.levels {
        for &level in row {
            w.write_bits(level as u64, k_d as u32);
        }
    }
    tally(w, &mut geometry, mark);

    rb.side_bits += side;
    rb.geometry_bits += geometry;
}

pub fn parse(bytes: &[u8]) -> Result<CompressedMesh> {
    let mut r = BitReader::new(bytes);
    let magic = r.read_bytes(4)?;
    if magic != MAGIC {
        return Err(Error::Format("not an hsc stream (bad magic)".into()));
    }
    let version = read_u16(&mut r)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {version} (this build reads {FORMAT_VERSION})"
        )));
    }
    let n = read_u32(&mut r)?;
    let f = read_u32(&mut r)?;
    let block_size = read_u16(&mut r)?;
    let coefficient_bits = r.read_bits(8)? as u8;
    let flags = r.read_bits(8)? as u8;
    if flags & !FLAG_REORDERED != 0 {
        return Err(Error::Format(format!("unknown flag bits {flags:#04x}")));
    }
    let reordered = flags & FLAG_REORDERED != 0;
    if n == 0 {
        return Err(Error::Format("container holds no vertices".into()));
    }
    if !(2..=32).contains(&coefficient_bits) {
        return Err(Error::Format(format!(
            "coefficient width {coefficient_bits} outside [2, 32]"
        )));
    }
    if block_size == 0 {
        return Err(Error::Format("block size zero".into()));
    }

    let mut faces = Vec::with_capacity(f as usize);
    for _ in 0..f {
        let mut tri = [0u32; 3];
        for v in &mut tri {
            let idx = r.read_varint()?;
            if idx >= n as u64 {
                return Err(Error::Format(format!(
                    "face references vertex {idx}, only {n} exist"
                )));
            }
            *v = idx as u32;
        }
        faces.push(tri);
    }

    let block_sizes: Vec<u16> = if reordered {
        let count = read_u32(&mut r)? as usize;
        let mut sizes = Vec::with_capacity(count);
        for _ in 0..count {
            sizes.push(read_u16(&mut r)?);
        }
        let total: u64 = sizes.iter().map(|&s| s as u64).sum();
        if total != n as u64 {
            return Err(Error::Format(format!(
                "block sizes sum to {total}, header says {n} vertices"
            )));
        }
        sizes
    } else {
        // membership is not stored: re-run the deterministic partitioner
        let probe = CompressedMesh {
            version,
            n,
            faces: faces.clone(),
            block_size,
            coefficient_bits,
            reordered: false,
            block_sizes: Vec::new(),
            blocks: Vec::new(),
            mu_grid_id: None,
        };
        decode_partition(&probe)?
            .blocks
            .iter()
            .map(|b| b.len() as u16)
            .collect()
    };

    let mut blocks = Vec::with_capacity(block_sizes.len());
    for &n_b in &block_sizes {
        blocks.push(read_block(&mut r, n_b as usize, coefficient_bits, reordered)?);
    }
    r.align_to_byte()?;
    if r.remaining_bits() != 0 {
        return Err(Error::Format(format!(
            "{} trailing bits after the block region",
            r.remaining_bits()
        )));
    }

    Ok(CompressedMesh {
        version,
        n,
        faces,
        block_size,
        coefficient_bits,
        reordered,
        block_sizes,
        blocks,
        mu_grid_id: None,
    })
}

fn read_block(
    r: &mut BitReader,
    n_b: usize,
    k_d: u8,
    reordered: bool,
) -> Result<CompressedBlock> {
    let k = read_u16(r)?;
    let n_mu = r.read_bits(8)? as usize;
    let mut mus = Vec::with_capacity(n_mu);
    for _ in 0..n_mu {
        mus.push(f32::from_le_bytes(read_u32(r)?.to_le_bytes()));
    }
    let permutation = if n_mu > 0 && !reordered {
        let mut perm = Vec::with_capacity(n_b);
        let mut prev = 0u16;
        for i in 0..n_b {
            let delta = read_u16(r)?;
            let p = if i == 0 { delta } else { prev.wrapping_add(delta) };
            perm.push(p);
            prev = p;
        }
        let mut seen = vec![false; n_b];
        for &p in &perm {
            if p as usize >= n_b || seen[p as usize] {
                return Err(Error::Format("stored order is not a permutation".into()));
            }
            seen[p as usize] = true;
        }
        Some(perm)
    } else {
        None
    };

    let m = (1 + n_mu as u64) * n_b as u64;
    let width = ceil_log2(m);
    let use_bitvec = r.read_bit()?;
    let mut support = Vec::with_capacity(k as usize);
    if use_bitvec {
        for p in 0..m {
            if r.read_bit()? {
                support.push(p as u32);
            }
        }
        if support.len() != k as usize {
            return Err(Error::Format(format!(
                "support vector holds {} atoms, block header says {k}",
                support.len()
            )));
        }
    } else {
        for _ in 0..k {
            let s = r.read_bits(width)?;
            if s >= m {
                return Err(Error::Format(format!(
                    "support index {s} outside dictionary of {m}"
                )));
            }
            support.push(s as u32);
        }
    }

    let mut ranges = [[0.0f32; 2]; 3];
    for range in &mut ranges {
        range[0] = f32::from_le_bytes(read_u32(r)?.to_le_bytes());
        range[1] = f32::from_le_bytes(read_u32(r)?.to_le_bytes());
    }

    let mut levels = Vec::with_capacity(k as usize);
    for _ in 0..k {
        let mut row = [0u32; 3];
        for level in &mut row {
            *level = r.read_bits(k_d as u32)? as u32;
        }
        levels.push(row);
    }

    Ok(CompressedBlock {
        k,
        mus,
        permutation,
        support,
        ranges,
        levels,
    })
}

fn read_u16(r: &mut BitReader) -> Result<u16> {
    let b = r.read_bytes(2)?;
    Ok(u16::from_le_bytes([b[0], b[1]]))
}

fn read_u32(r: &mut BitReader) -> Result<u32> {
    let b = r.read_bytes(4)?;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{encode, EncoderConfig};
    use crate::synth::{detail_sphere, icosphere};

    fn sample(ratio: f64, reorder: bool) -> CompressedMesh {
        let mesh = detail_sphere(2, 6, None);
        let config = EncoderConfig {
            target_ratio: ratio,
            block_size: 100,
            reorder_in_place: reorder,
            ..EncoderConfig::default()
        };
        encode(&mesh, &config).unwrap()
    }

    #[test]
    fn round_trip_preserves_every_field() {
        for (ratio, reorder) in [(1.0, false), (0.3, false), (0.3, true)] {
            let cm = sample(ratio, reorder);
            let (bytes, _) = serialize(&cm);
            let back = parse(&bytes).unwrap();
            assert_eq!(back.n, cm.n);
            assert_eq!(back.faces, cm.faces);
            assert_eq!(back.block_size, cm.block_size);
            assert_eq!(back.coefficient_bits, cm.coefficient_bits);
            assert_eq!(back.reordered, cm.reordered);
            assert_eq!(back.block_sizes, cm.block_sizes);
            assert_eq!(back.blocks, cm.blocks);
        }
    }

    #[test]
    fn serialization_is_byte_deterministic() {
        let cm = sample(0.4, false);
        assert_eq!(serialize(&cm).0, serialize(&cm).0);
    }

    #[test]
    fn geometry_bits_match_the_rate_formula() {
        for (ratio, reorder) in [(1.0, false), (0.25, false), (0.5, true)] {
            let cm = sample(ratio, reorder);
            let (_, rb) = serialize(&cm);
            let expect: u64 = (0..cm.blocks.len())
                .map(|i| cm.block_geometry_bits(i))
                .sum();
            assert_eq!(rb.geometry_bits, expect, "ratio {ratio} reorder {reorder}");
        }
    }

    #[test]
    fn breakdown_accounts_for_every_bit() {
        let cm = sample(0.3, false);
        let (bytes, rb) = serialize(&cm);
        assert_eq!(rb.total_bits(), 8 * bytes.len() as u64);
        assert!(rb.padding_bits < 8);
        assert_eq!(rb.header_bits, 144);
    }

    #[test]
    fn corrupted_streams_are_rejected() {
        let cm = sample(0.4, false);
        let (bytes, _) = serialize(&cm);

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(parse(&bad_magic), Err(Error::Format(_))));

        let mut bad_version = bytes.clone();
        bad_version[4] = 99;
        assert!(matches!(parse(&bad_version), Err(Error::Format(_))));

        let truncated = &bytes[..bytes.len() - 3];
        assert!(matches!(parse(truncated), Err(Error::Format(_))));

        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(matches!(parse(&trailing), Err(Error::Format(_))));

        let mut bad_flags = bytes.clone();
        bad_flags[17] = 0xfe;
        assert!(matches!(parse(&bad_flags), Err(Error::Format(_))));
    }

    #[test]
    fn full_rate_icosahedron_stream_parses() {
        let mesh = icosphere(0);
        let cm = encode(&mesh, &EncoderConfig::default()).unwrap();
        let (bytes, rb) = serialize(&cm);
        let back = parse(&bytes).unwrap();
        assert_eq!(back.blocks, cm.blocks);
        assert!(rb.geometry_bits > 0);
    }
}
