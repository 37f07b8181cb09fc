//! Canonical Huffman coding over small integer alphabets.
//!
//! Serialized block (little-endian):
//! `[u32 symbol count][u16 alphabet size][u8 bit length per symbol][bitstream, MSB first, byte padded]`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Longest code the encoder will emit.
pub const MAX_CODE_LEN: u8 = 31;

/// Largest alphabet the u16 size field can describe.
pub const MAX_ALPHABET: usize = u16::MAX as usize;

pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    nbits: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self {
            bytes: Vec::new(),
            acc: 0,
            nbits: 0,
        }
    }

    #[inline]
    pub fn write(&mut self, code: u32, len: u8) {
        debug_assert!(len <= 32);
        self.acc = (self.acc << len) | u64::from(code) & ((1u64 << len) - 1);
        self.nbits += u32::from(len);
        while self.nbits >= 8 {
            self.nbits -= 8;
            self.bytes.push((self.acc >> self.nbits) as u8);
        }
    }

    pub fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            self.bytes.push((self.acc << (8 - self.nbits)) as u8);
        }
        self.bytes
    }
}

impl Default for BitWriter {
    fn default() -> Self {
        Self::new()
    }
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    bit: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, bit: 0 }
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<u32> {
        let byte = *self
            .bytes
            .get(self.bit / 8)
            .ok_or_else(|| Error::corrupt("bitstream ended early"))?;
        let b = (byte >> (7 - self.bit % 8)) & 1;
        self.bit += 1;
        Ok(u32::from(b))
    }

    /// Bytes consumed, counting a partial trailing byte.
    pub fn bytes_consumed(&self) -> usize {
        self.bit.div_ceil(8)
    }
}

/// Huffman code lengths for `freqs`, limited to `MAX_CODE_LEN`.
/// Unused symbols get length 0; a lone used symbol gets length 1.
pub fn code_lengths(freqs: &[u64]) -> Vec<u8> {
    let mut freqs = freqs.to_vec();
    loop {
        let lengths = unlimited_lengths(&freqs);
        if lengths.iter().all(|&l| l <= MAX_CODE_LEN) {
            return lengths;
        }
        // flatten the distribution and retry
        for f in freqs.iter_mut().filter(|f| **f > 0) {
            *f = (*f >> 1).max(1);
        }
    }
}

fn unlimited_lengths(freqs: &[u64]) -> Vec<u8> {
    let mut lengths = vec![0u8; freqs.len()];
    let used: Vec<usize> = (0..freqs.len()).filter(|&s| freqs[s] > 0).collect();
    match used.len() {
        0 => return lengths,
        1 => {
            lengths[used[0]] = 1;
            return lengths;
        }
        _ => {}
    }
    // nodes: leaves are 0..used.len(), internal nodes appended after
    let mut parent = vec![usize::MAX; 2 * used.len() - 1];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = used
        .iter()
        .enumerate()
        .map(|(node, &s)| Reverse((freqs[s], node)))
        .collect();
    let mut next = used.len();
    while heap.len() > 1 {
        let Reverse((fa, a)) = heap.pop().unwrap();
        let Reverse((fb, b)) = heap.pop().unwrap();
        parent[a] = next;
        parent[b] = next;
        heap.push(Reverse((fa + fb, next)));
        next += 1;
    }
    let root = next - 1;
    let mut depth = vec![0u32; 2 * used.len() - 1];
    for node in (0..root).rev() {
        depth[node] = depth[parent[node]] + 1;
    }
    for (leaf, &s) in used.iter().enumerate() {
        lengths[s] = depth[leaf].min(255) as u8;
    }
    lengths
}

/// Canonical codes: shorter codes first, ties by symbol value.
pub fn canonical_codes(lengths: &[u8]) -> Vec<u32> {
    let max = lengths.iter().copied().max().unwrap_or(0) as usize;
    let mut count = vec![0u32; max + 1];
    for &l in lengths.iter().filter(|&&l| l > 0) {
        count[l as usize] += 1;
    }
    let mut next = vec![0u32; max + 2];
    let mut code = 0u32;
    for len in 1..=max {
        code = (code + count[len - 1]) << 1;
        next[len] = code;
    }
    lengths
        .iter()
        .map(|&l| {
            if l == 0 {
                0
            } else {
                let c = next[l as usize];
                next[l as usize] += 1;
                c
            }
        })
        .collect()
}

struct Decoder {
    count: Vec<u64>,
    symbols: Vec<u32>,
}

impl Decoder {
    fn new(lengths: &[u8]) -> Result<Self> {
        let max = lengths.iter().copied().max().unwrap_or(0);
        if max > MAX_CODE_LEN {
            return Err(Error::corrupt(format!("code length {max} exceeds limit")));
        }
        let mut count = vec![0u64; max as usize + 1];
        for &l in lengths.iter().filter(|&&l| l > 0) {
            count[l as usize] += 1;
        }
        // Kraft sum in units of 2^-max; over-subscription means a corrupt table
        let kraft: u64 = (1..=max as usize)
            .map(|l| count[l] << (max as usize - l))
            .sum();
        if max > 0 && kraft > 1u64 << max {
            return Err(Error::corrupt("over-subscribed Huffman table"));
        }
        let mut symbols: Vec<u32> = (0..lengths.len() as u32)
            .filter(|&s| lengths[s as usize] > 0)
            .collect();
        symbols.sort_by_key(|&s| lengths[s as usize]);
        Ok(Self { count, symbols })
    }

    #[inline]
    fn decode(&self, reader: &mut BitReader<'_>) -> Result<u32> {
        let (mut code, mut first, mut index) = (0u64, 0u64, 0u64);
        for len in 1..self.count.len() {
            code |= u64::from(reader.read_bit()?);
            let n = self.count[len];
            if code < first + n {
                return Ok(self.symbols[(index + code - first) as usize]);
            }
            index += n;
            first = (first + n) << 1;
            code <<= 1;
        }
        Err(Error::corrupt("invalid Huffman code"))
    }
}

/// Appends the serialized block for `symbols` to `out`.
///
/// Every symbol must be below [`MAX_ALPHABET`].
pub fn encode_block(symbols: &[u32], out: &mut Vec<u8>) {
    let count = u32::try_from(symbols.len()).expect("Huffman block exceeds u32 symbols");
    out.extend_from_slice(&count.to_le_bytes());
    let alphabet = symbols.iter().map(|&s| s as usize + 1).max().unwrap_or(0);
    assert!(
        alphabet <= MAX_ALPHABET,
        "symbol out of range for Huffman alphabet"
    );
    let mut freqs = vec![0u64; alphabet];
    for &s in symbols {
        freqs[s as usize] += 1;
    }
    let lengths = code_lengths(&freqs);
    let codes = canonical_codes(&lengths);
    out.extend_from_slice(&(alphabet as u16).to_le_bytes());
    out.extend_from_slice(&lengths);
    let mut w = BitWriter::new();
    for &s in symbols {
        w.write(codes[s as usize], lengths[s as usize]);
    }
    out.extend_from_slice(&w.finish());
}

/// Decodes one block starting at `bytes[*pos]` and advances `pos` past it.
pub fn decode_block(bytes: &[u8], pos: &mut usize) -> Result<Vec<u32>> {
    let mut cur = Cursor { bytes, pos: *pos };
    let count = cur.u32()? as usize;
    let alphabet = cur.u16()? as usize;
    let lengths = cur.take(alphabet)?;
    if count > 0 && alphabet == 0 {
        return Err(Error::corrupt("symbols present but empty Huffman table"));
    }
    let decoder = Decoder::new(lengths)?;
    let mut reader = BitReader::new(&bytes[cur.pos..]);
    // every symbol costs at least one bit
    if count > (bytes.len() - cur.pos).saturating_mul(8) {
        return Err(Error::corrupt("symbol count exceeds bitstream size"));
    }
    let mut symbols = Vec::with_capacity(count);
    for _ in 0..count {
        symbols.push(decoder.decode(&mut reader)?);
    }
    *pos = cur.pos + reader.bytes_consumed();
    Ok(symbols)
}

/// Little-endian reader with corrupt-payload errors on truncation.
pub(crate) struct Cursor<'a> {
    pub bytes: &'a [u8],
    pub pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::corrupt("unexpected end of data"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A u64 length that must fit in the remaining bytes.
    pub fn len(&mut self) -> Result<usize> {
        let n = self.u64()?;
        usize::try_from(n)
            .ok()
            .filter(|&n| n <= self.remaining())
            .ok_or_else(|| Error::corrupt(format!("length {n} exceeds remaining data")))
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}
