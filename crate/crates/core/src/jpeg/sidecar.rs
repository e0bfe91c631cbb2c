//! `COEF1` coefficient sidecar.
//!
//! Layout, all little-endian:
//!
//! | offset | size            | content                                        |
//! |--------|-----------------|------------------------------------------------|
//! | 0      | 5               | ASCII `COEF1`                                  |
//! | 5      | 4               | width (u32)                                    |
//! | 9      | 4               | height (u32)                                   |
//! | 13     | 128             | 64 quantization steps (u16), natural order     |
//! | 141    | 128 per block   | 64 coefficients (i16) per block, natural order |
//!
//! Blocks follow in raster order over the `ceil(h/8) × ceil(w/8)` grid.

use super::{JpegImage, QuantTable};
use crate::error::{Error, Result};
use crate::grid::BlockGrid;

pub const MAGIC: &[u8; 5] = b"COEF1";
const HEADER_LEN: usize = 5 + 8 + 128;

/// Byte length of a sidecar for an image of the given size.
pub fn sidecar_len(width: u32, height: u32) -> u64 {
    let (rows, cols) = JpegImage::grid_dims(width, height);
    (rows as u64 * cols as u64)
        .saturating_mul(128)
        .saturating_add(HEADER_LEN as u64)
}

pub fn dump_sidecar(image: &JpegImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(sidecar_len(image.width, image.height) as usize);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&image.width.to_le_bytes());
    out.extend_from_slice(&image.height.to_le_bytes());
    for q in image.quant_table.steps() {
        out.extend_from_slice(&q.to_le_bytes());
    }
    for c in image.coeffs.values() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out
}

/// Loads a sidecar. The result carries no Huffman tables or restart interval.
pub fn load_sidecar(bytes: &[u8]) -> Result<JpegImage> {
    if bytes.len() < 5 || &bytes[..5] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::LengthMismatch {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let (width, height) = (word(5), word(9));
    let expected = sidecar_len(width, height);
    if expected != bytes.len() as u64 {
        return Err(Error::LengthMismatch {
            expected: usize::try_from(expected).unwrap_or(usize::MAX),
            actual: bytes.len(),
        });
    }
    let mut steps = [0u16; 64];
    for (k, q) in steps.iter_mut().enumerate() {
        *q = u16::from_le_bytes([bytes[13 + 2 * k], bytes[14 + 2 * k]]);
    }
    let (rows, cols) = JpegImage::grid_dims(width, height);
    let blocks = bytes[HEADER_LEN..]
        .chunks_exact(128)
        .map(|chunk| {
            let mut block = [0i16; 64];
            for (k, c) in block.iter_mut().enumerate() {
                *c = i16::from_le_bytes([chunk[2 * k], chunk[2 * k + 1]]);
            }
            block
        })
        .collect();
    let coeffs = BlockGrid::from_blocks(rows, cols, blocks).expect("length checked above");
    JpegImage::new(width, height, QuantTable::new(steps)?, coeffs)
}
