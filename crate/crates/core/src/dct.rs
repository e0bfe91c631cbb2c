//! 8×8 orthonormal DCT in matrix form and the spatial footprint of
//! coefficient changes.
//!
//! With `A` the DCT-II basis (row `r` is the `r`-th basis vector), a block of
//! dequantized coefficients `C` maps to pixels as `Aᵀ·C·A`. A unit change of
//! the quantized coefficient at mode `(a, b)` therefore changes the pixel
//! block by `q_ab · Aᵀ·t_ab·A`, where `t_ab` is the unit impulse at `(a, b)`,
//! whatever the image content.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::grid::MODES;
use crate::jpeg::{JpegImage, QuantTable};

/// An 8×8 block of reals in row-major order.
pub type Block = [f64; MODES];

/// The orthonormal 8×8 DCT matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DctBasis {
    m: [[f64; 8]; 8],
}

impl DctBasis {
    /// Assembles the matrix from the seven half-cosine constants and the
    /// butterfly sign layout of the DCT-II.
    pub fn build() -> Self {
        let c = |x: f64| 0.5 * x.cos();
        let a = c(PI / 4.0);
        let b = c(PI / 16.0);
        let cc = c(PI / 8.0);
        let d = c(3.0 * PI / 16.0);
        let e = c(5.0 * PI / 16.0);
        let f = c(3.0 * PI / 8.0);
        let g = c(7.0 * PI / 16.0);
        let m = [
            [a, a, a, a, a, a, a, a],
            [b, d, e, g, -g, -e, -d, -b],
            [cc, f, -f, -cc, -cc, -f, f, cc],
            [d, -g, -b, -e, e, b, g, -d],
            [a, -a, -a, a, a, -a, -a, a],
            [e, -b, g, d, -d, -g, b, -e],
            [f, -cc, cc, -f, -f, cc, -cc, f],
            [g, -e, d, -b, b, -d, e, -g],
        ];
        Self { m }
    }

    /// Shared instance.
    pub fn get() -> &'static DctBasis {
        static BASIS: OnceLock<DctBasis> = OnceLock::new();
        BASIS.get_or_init(DctBasis::build)
    }

    pub fn matrix(&self) -> &[[f64; 8]; 8] {
        &self.m
    }

    /// `Aᵀ·C·A`. Zero entries of `C` are skipped; since adding a zero product
    /// never changes a running sum, the result matches the dense product.
    pub fn inverse(&self, coeffs: &Block) -> Block {
        let a = &self.m;
        // tmp = Aᵀ·C, column k only touched where C has support.
        let mut tmp = [0.0f64; MODES];
        let mut live_cols = [false; 8];
        for r in 0..8 {
            for k in 0..8 {
                let c = coeffs[r * 8 + k];
                if c == 0.0 {
                    continue;
                }
                live_cols[k] = true;
                for i in 0..8 {
                    tmp[i * 8 + k] += a[r][i] * c;
                }
            }
        }
        let mut out = [0.0f64; MODES];
        for i in 0..8 {
            for k in 0..8 {
                if !live_cols[k] {
                    continue;
                }
                let t = tmp[i * 8 + k];
                for j in 0..8 {
                    out[i * 8 + j] += t * a[k][j];
                }
            }
        }
        out
    }

    /// `A·P·Aᵀ`.
    pub fn forward(&self, pixels: &Block) -> Block {
        let a = &self.m;
        let mut tmp = [0.0f64; MODES];
        for r in 0..8 {
            for j in 0..8 {
                let mut s = 0.0;
                for i in 0..8 {
                    s += a[r][i] * pixels[i * 8 + j];
                }
                tmp[r * 8 + j] = s;
            }
        }
        let mut out = [0.0f64; MODES];
        for r in 0..8 {
            for c in 0..8 {
                let mut s = 0.0;
                for j in 0..8 {
                    s += tmp[r * 8 + j] * a[c][j];
                }
                out[r * 8 + c] = s;
            }
        }
        out
    }
}

/// Forward 2-D DCT of one pixel block.
pub fn forward_dct_block(pixels: &Block) -> Block {
    DctBasis::get().forward(pixels)
}

/// Inverse 2-D DCT of one coefficient block.
pub fn inverse_dct_block(coeffs: &Block) -> Block {
    DctBasis::get().inverse(coeffs)
}

/// Spatial change caused by `+1` on the quantized coefficient at mode
/// `(a, b)` with quantization step `q`.
pub fn spatial_change(a: usize, b: usize, q: u16) -> Result<Block> {
    if a >= 8 || b >= 8 {
        return Err(Error::ModeOutOfRange(a, b));
    }
    let mut impulse = [0.0; MODES];
    impulse[a * 8 + b] = q as f64;
    Ok(inverse_dct_block(&impulse))
}

/// Spatial change of simultaneous changes `t` (entries in {-1, 0, +1}) over
/// one block: `Aᵀ·(t ⊙ q)·A`.
pub fn block_change(t: &[i8; MODES], quant: &QuantTable) -> Block {
    let mut scaled = [0.0; MODES];
    for ((s, &ti), &q) in scaled.iter_mut().zip(t.iter()).zip(quant.steps()) {
        *s = ti as f64 * q as f64;
    }
    inverse_dct_block(&scaled)
}

/// Unit-step spatial patterns `Aᵀ·t_ab·A` for all 64 modes.
#[derive(Debug, Clone)]
pub struct ModePatterns {
    patterns: Vec<Block>,
}

impl ModePatterns {
    pub fn new() -> Self {
        let patterns = (0..MODES)
            .map(|k| spatial_change(k / 8, k % 8, 1).expect("mode in range"))
            .collect();
        Self { patterns }
    }

    pub fn pattern(&self, a: usize, b: usize) -> &Block {
        &self.patterns[a * 8 + b]
    }
}

impl Default for ModePatterns {
    fn default() -> Self {
        Self::new()
    }
}

/// Absolute spatial change `|s_ab|` of every mode for one quantization table.
#[derive(Debug, Clone)]
pub(crate) struct AbsChangeTable {
    pub(crate) modes: Vec<Block>,
}

impl AbsChangeTable {
    pub(crate) fn new(quant: &QuantTable) -> Self {
        let modes = (0..MODES)
            .map(|k| {
                let (a, b) = (k / 8, k % 8);
                spatial_change(a, b, quant.step(a, b))
                    .expect("mode in range")
                    .map(f64::abs)
            })
            .collect();
        Self { modes }
    }
}

/// How decompressed pixel values are finalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reconstruction {
    /// Round half away from zero and clamp to [0, 255], as a decoder would.
    #[default]
    Rounded,
    /// Raw inverse-transform output plus the level shift.
    Exact,
}

/// A decompressed image covering the full padded block grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl SpatialImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        assert_eq!(pixels.len(), width * height, "pixel buffer size");
        Self { width, height, pixels }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// The 8×8 pixel block at block coordinates `(m, n)`.
    pub fn block(&self, m: usize, n: usize) -> Block {
        let mut out = [0.0; MODES];
        for i in 0..8 {
            let start = (m * 8 + i) * self.width + n * 8;
            out[i * 8..i * 8 + 8].copy_from_slice(&self.pixels[start..start + 8]);
        }
        out
    }
}

pub fn decompress(image: &JpegImage) -> SpatialImage {
    decompress_with(image, Reconstruction::Rounded)
}

/// Dequantize, inverse transform and level shift every block.
pub fn decompress_with(image: &JpegImage, mode: Reconstruction) -> SpatialImage {
    let rows = image.coeffs.blocks_high();
    let cols = image.coeffs.blocks_wide();
    let width = cols * 8;
    let mut pixels = vec![0.0; width * rows * 8];
    let steps = image.quant_table.steps();
    for (m, n, block) in image.coeffs.iter_blocks() {
        let mut deq = [0.0; MODES];
        for k in 0..MODES {
            deq[k] = block[k] as f64 * steps[k] as f64;
        }
        let spatial = inverse_dct_block(&deq);
        for i in 0..8 {
            for j in 0..8 {
                let v = spatial[i * 8 + j] + 128.0;
                pixels[(m * 8 + i) * width + n * 8 + j] = match mode {
                    Reconstruction::Rounded => v.round().clamp(0.0, 255.0),
                    Reconstruction::Exact => v,
                };
            }
        }
    }
    SpatialImage::new(width, rows * 8, pixels)
}
