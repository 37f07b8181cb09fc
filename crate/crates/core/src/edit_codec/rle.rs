//! Byte run-length coding. A run of 4 or more equal bytes, and every
//! occurrence of the marker byte itself, becomes `MARKER, byte, u16 count`.

use crate::error::{Error, Result};

pub const MARKER: u8 = 0xFF;
pub const MIN_RUN: usize = 4;

pub fn encode(input: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(input.len());
    let mut i = 0;
    while i < input.len() {
        let b = input[i];
        let run = input[i..].iter().take_while(|&&x| x == b).count();
        if run >= MIN_RUN || b == MARKER {
            let mut left = run;
            while left > 0 {
                let chunk = left.min(u16::MAX as usize);
                out.push(MARKER);
                out.push(b);
                out.extend_from_slice(&(chunk as u16).to_le_bytes());
                left -= chunk;
            }
        } else {
            out.extend(std::iter::repeat_n(b, run));
        }
        i += run;
    }
    out
}

pub fn decode(input: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(input.len());
    let mut i = 0;
    while i < input.len() {
        if input[i] == MARKER {
            let rec = input
                .get(i + 1..i + 4)
                .ok_or_else(|| Error::corrupt("truncated run record"))?;
            let count = u16::from_le_bytes([rec[1], rec[2]]) as usize;
            if count == 0 {
                return Err(Error::corrupt("zero-length run"));
            }
            out.extend(std::iter::repeat_n(rec[0], count));
            i += 4;
        } else {
            out.push(input[i]);
            i += 1;
        }
    }
    Ok(out)
}
