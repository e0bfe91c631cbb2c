//! Baseline grayscale JPEG in coefficient form.
//!
//! The decoder stops at the entropy-decoded, quantized DCT coefficients; no
//! dequantization or inverse transform happens here. The encoder writes those
//! coefficients back with per-image optimal Huffman tables, so coefficient
//! fidelity (not byte fidelity) is what a round trip preserves.
//!
//! Supported: SOF0 (and 8-bit SOF1) with a single component, Huffman coding,
//! restart intervals. Rejected: progressive, lossless, hierarchical and
//! arithmetic-coded frames, 12-bit samples, multi-component images.

mod decode;
mod encode;
mod huffman;
pub mod quality;
pub mod sidecar;

pub use decode::parse_jpeg;
pub use encode::serialize_jpeg;
pub use huffman::HuffmanTable;

use crate::error::{Error, Result};
use crate::grid::{BlockGrid, MODES};

/// Smallest coefficient value the decoder accepts (12-bit signed).
pub const COEFF_MIN: i16 = -2048;
/// Largest coefficient value the decoder accepts.
pub const COEFF_MAX: i16 = 2047;
/// Largest magnitude the encoder can write (11 magnitude bits).
pub const WRITABLE_MAX: i16 = 2047;

/// Natural-order index of the k-th coefficient in zig-zag scan order.
pub(crate) const ZIGZAG_TO_NATURAL: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27,
    20, 13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58,
    59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

/// 8×8 quantization steps in natural (row-major) mode order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantTable(pub [u16; MODES]);

impl QuantTable {
    pub fn new(steps: [u16; MODES]) -> Result<Self> {
        if let Some(k) = steps.iter().position(|&q| q == 0) {
            return Err(Error::InvalidImage(format!("quantization step at mode {k} is zero")));
        }
        Ok(Self(steps))
    }

    /// Step for mode `(a, b)`.
    pub fn step(&self, a: usize, b: usize) -> u16 {
        self.0[a * 8 + b]
    }

    pub fn steps(&self) -> &[u16; MODES] {
        &self.0
    }
}

/// A parsed single-component baseline JPEG.
#[derive(Debug, Clone, PartialEq)]
pub struct JpegImage {
    pub width: u32,
    pub height: u32,
    pub quant_table: QuantTable,
    /// `ceil(height/8) × ceil(width/8)` blocks of quantized coefficients.
    pub coeffs: BlockGrid<i16>,
    /// Huffman tables as found in the file; absent for sidecar-loaded images.
    pub dc_table: Option<HuffmanTable>,
    pub ac_table: Option<HuffmanTable>,
    /// MCUs between restart markers, 0 when the file had none.
    pub restart_interval: u16,
}

impl JpegImage {
    /// Builds an image from coefficients alone, checking the type invariants.
    pub fn new(width: u32, height: u32, quant_table: QuantTable, coeffs: BlockGrid<i16>) -> Result<Self> {
        let image = Self {
            width,
            height,
            quant_table,
            coeffs,
            dc_table: None,
            ac_table: None,
            restart_interval: 0,
        };
        image.validate()?;
        Ok(image)
    }

    /// Block grid `(rows, cols)` implied by the pixel dimensions.
    pub fn grid_dims(width: u32, height: u32) -> (usize, usize) {
        (height.div_ceil(8) as usize, width.div_ceil(8) as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidImage("zero width or height".into()));
        }
        let (rows, cols) = Self::grid_dims(self.width, self.height);
        if self.coeffs.blocks_high() != rows || self.coeffs.blocks_wide() != cols {
            return Err(Error::InvalidImage(format!(
                "coefficient grid {}x{} does not match {}x{} pixels",
                self.coeffs.blocks_high(),
                self.coeffs.blocks_wide(),
                self.width,
                self.height
            )));
        }
        if self.quant_table.0.contains(&0) {
            return Err(Error::InvalidImage("zero quantization step".into()));
        }
        if self.coeffs.values().any(|c| !(COEFF_MIN..=COEFF_MAX).contains(&c)) {
            return Err(Error::InvalidImage("coefficient outside 12-bit range".into()));
        }
        Ok(())
    }

    pub fn count_nonzero_ac(&self) -> usize {
        count_nonzero_ac(self)
    }
}

/// Non-zero coefficients over the 63 AC modes of every block.
pub fn count_nonzero_ac(image: &JpegImage) -> usize {
    image
        .coeffs
        .blocks()
        .iter()
        .map(|b| b[1..].iter().filter(|&&c| c != 0).count())
        .sum()
}
