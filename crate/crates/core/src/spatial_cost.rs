//! Per-pixel spatial embedding costs.

use std::fmt::Write as _;

use crate::dct::SpatialImage;
use crate::error::{Error, Result};

/// Cost of a ±1 change at every pixel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl CostMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} cost map",
                values.len()
            )));
        }
        Ok(Self { width, height, values })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.width + col] = value;
    }

    /// Block rows and columns fully covered by the map.
    pub fn block_dims(&self) -> (usize, usize) {
        (self.height / 8, self.width / 8)
    }

    /// Comma-separated values, one image row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(self.width.max(1)) {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Any spatial cost function.
pub trait SpatialCost {
    fn cost_map(&self, image: &SpatialImage) -> CostMap;
}

impl<F: Fn(&SpatialImage) -> CostMap> SpatialCost for F {
    fn cost_map(&self, image: &SpatialImage) -> CostMap {
        self(image)
    }
}

/// HiLL: a KB high-pass residual, a 3×3 mean of its magnitude, the
/// reciprocal, then a 15×15 mean. Every filter uses symmetric padding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hill {
    pub epsilon: f64,
}

impl Default for Hill {
    fn default() -> Self {
        Self { epsilon: 1e-10 }
    }
}

pub const KB: [[f64; 3]; 3] = [[-1.0, 2.0, -1.0], [2.0, -4.0, 2.0], [-1.0, 2.0, -1.0]];

/// Index into `0..n` after symmetric extension (`x[-1] = x[0]`), valid for
/// any offset.
pub(crate) fn mirror(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let r = i.rem_euclid(period) as usize;
    if r < n {
        r
    } else {
        2 * n - 1 - r
    }
}

/// Mean over a `size`×`size` window (odd size) with symmetric padding,
/// computed as a horizontal pass followed by a vertical pass.
fn box_mean(src: &[f64], width: usize, height: usize, size: usize) -> Vec<f64> {
    let half = (size / 2) as isize;
    let mut horizontal = vec![0.0; src.len()];
    for r in 0..height {
        let row = &src[r * width..(r + 1) * width];
        for c in 0..width {
            let mut s = 0.0;
            for k in -half..=half {
                s += row[mirror(c as isize + k, width)];
            }
            horizontal[r * width + c] = s;
        }
    }
    let area = (size * size) as f64;
    let mut out = vec![0.0; src.len()];
    for r in 0..height {
        for c in 0..width {
            let mut s = 0.0;
            for k in -half..=half {
                s += horizontal[mirror(r as isize + k, height) * width + c];
            }
            out[r * width + c] = s / area;
        }
    }
    out
}

fn high_pass_magnitude(image: &SpatialImage) -> Vec<f64> {
    let (w, h) = (image.width, image.height);
    let mut out = vec![0.0; w * h];
    for r in 0..h {
        for c in 0..w {
            let mut s = 0.0;
            for (dr, kr) in KB.iter().enumerate() {
                let rr = mirror(r as isize + dr as isize - 1, h);
                for (dc, &k) in kr.iter().enumerate() {
                    let cc = mirror(c as isize + dc as isize - 1, w);
                    s += k * image.pixels[rr * w + cc];
                }
            }
            out[r * w + c] = s.abs();
        }
    }
    out
}

impl SpatialCost for Hill {
    fn cost_map(&self, image: &SpatialImage) -> CostMap {
        let (w, h) = (image.width, image.height);
        let residual = high_pass_magnitude(image);
        let mut smoothed = box_mean(&residual, w, h, 3);
        for v in smoothed.iter_mut() {
            *v = 1.0 / (*v + self.epsilon);
        }
        CostMap {
            width: w,
            height: h,
            values: box_mean(&smoothed, w, h, 15),
        }
    }
}

pub fn hill_cost(image: &SpatialImage) -> CostMap {
    Hill::default().cost_map(image)
}

/// Sum of the 64 pixel costs of block `(m, n)`.
pub fn block_cost_sum(costs: &CostMap, m: usize, n: usize) -> Result<f64> {
    let (rows, cols) = costs.block_dims();
    if m >= rows || n >= cols {
        return Err(Error::BlockOutOfRange(m, n));
    }
    let mut s = 0.0;
    for i in 0..8 {
        let start = (m * 8 + i) * costs.width + n * 8;
        for &v in &costs.values[start..start + 8] {
            s += v;
        }
    }
    Ok(s)
}

/// Block sums for every block, raster order.
pub fn block_cost_sums(costs: &CostMap) -> Vec<f64> {
    let (rows, cols) = costs.block_dims();
    let mut out = Vec::with_capacity(rows * cols);
    for m in 0..rows {
        for n in 0..cols {
            out.push(block_cost_sum(costs, m, n).expect("block in range"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn noise(w: usize, h: usize, seed: u64) -> SpatialImage {
        let mut s = seed;
        let pixels = (0..w * h)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s % 256) as f64
            })
            .collect();
        SpatialImage::new(w, h, pixels)
    }

    /// Direct 2-D correlation with an explicit kernel and symmetric padding.
    fn correlate(src: &[f64], w: usize, h: usize, kernel: &[Vec<f64>]) -> Vec<f64> {
        let half = (kernel.len() / 2) as isize;
        let reflect = |i: isize, n: usize| -> usize {
            let mut i = i;
            loop {
                if i < 0 {
                    i = -i - 1;
                } else if i >= n as isize {
                    i = 2 * n as isize - i - 1;
                } else {
                    return i as usize;
                }
            }
        };
        let mut out = vec![0.0; w * h];
        for r in 0..h {
            for c in 0..w {
                let mut s = 0.0;
                for (u, krow) in kernel.iter().enumerate() {
                    for (v, &k) in krow.iter().enumerate() {
                        let rr = reflect(r as isize + u as isize - half, h);
                        let cc = reflect(c as isize + v as isize - half, w);
                        s += k * src[rr * w + cc];
                    }
                }
                out[r * w + c] = s;
            }
        }
        out
    }

    fn naive_hill(img: &SpatialImage) -> Vec<f64> {
        let (w, h) = (img.width, img.height);
        let kb: Vec<Vec<f64>> = KB.iter().map(|r| r.to_vec()).collect();
        let l1 = vec![vec![1.0 / 9.0; 3]; 3];
        let l2 = vec![vec![1.0 / 225.0; 15]; 15];
        let r: Vec<f64> = correlate(&img.pixels, w, h, &kb).iter().map(|v| v.abs()).collect();
        let xi: Vec<f64> = correlate(&r, w, h, &l1).iter().map(|v| 1.0 / (v + 1e-10)).collect();
        correlate(&xi, w, h, &l2)
    }

    fn assert_rel_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol * y.abs().max(x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn mirror_indexing() {
        assert_eq!(mirror(-1, 5), 0);
        assert_eq!(mirror(-2, 5), 1);
        assert_eq!(mirror(5, 5), 4);
        assert_eq!(mirror(6, 5), 3);
        assert_eq!(mirror(-7, 1), 0);
        assert_eq!(mirror(9, 2), 1);
        for i in -40..40 {
            assert!(mirror(i, 3) < 3);
        }
    }

    #[test]
    fn constant_image_is_uniformly_expensive() {
        let img = SpatialImage::new(16, 24, vec![93.0; 16 * 24]);
        let c = hill_cost(&img);
        assert!(c.values.iter().all(|&v| (v - 1e10).abs() <= 1e10 * 1e-12));
    }

    #[test]
    fn matches_direct_correlation_oracle() {
        for (w, h, seed) in [(32, 32, 1), (17, 9, 2), (8, 8, 3), (3, 40, 4), (1, 1, 5)] {
            let img = noise(w, h, seed);
            assert_rel_close(&hill_cost(&img).values, &naive_hill(&img), 1e-9);
        }
    }

    #[test]
    fn epsilon_is_a_monotone_stabilizer() {
        let img = noise(24, 24, 9);
        let mut smooth = img.clone();
        for p in smooth.pixels.iter_mut().take(200) {
            *p = 50.0;
        }
        let lo = Hill { epsilon: 1e-10 }.cost_map(&smooth);
        let hi = Hill { epsilon: 1e-3 }.cost_map(&smooth);
        assert!(lo.values.iter().zip(&hi.values).all(|(a, b)| b <= a));
    }

    #[test]
    fn translation_equivariance_in_the_interior() {
        let (w, h) = (64, 64);
        let big = noise(w + 8, h + 8, 12);
        let crop = |dr: usize, dc: usize| {
            let mut px = Vec::with_capacity(w * h);
            for r in 0..h {
                px.extend_from_slice(&big.pixels[(r + dr) * (w + 8) + dc..(r + dr) * (w + 8) + dc + w]);
            }
            SpatialImage::new(w, h, px)
        };
        let a = hill_cost(&crop(0, 0));
        let b = hill_cost(&crop(8, 8));
        for r in 23..h - 15 {
            for c in 23..w - 15 {
                assert_eq!(a.get(r, c), b.get(r - 8, c - 8));
            }
        }
    }

    #[test]
    fn block_sums() {
        let mut c = CostMap::filled(16, 16, 1.0);
        assert_eq!(block_cost_sum(&c, 1, 1), Ok(64.0));
        c.set(9, 3, 2.0);
        assert_eq!(block_cost_sum(&c, 1, 0), Ok(65.0));
        assert_eq!(block_cost_sum(&c, 2, 0), Err(Error::BlockOutOfRange(2, 0)));
        assert_eq!(block_cost_sums(&c), vec![64.0, 64.0, 65.0, 64.0]);
    }

    #[test]
    fn block_sum_against_explicit_indexing() {
        let c = hill_cost(&noise(40, 24, 77));
        for m in 0..3 {
            for n in 0..5 {
                let mut s = 0.0;
                for i in 0..8 {
                    for j in 0..8 {
                        s += c.values[(8 * m + i) * 40 + 8 * n + j];
                    }
                }
                assert_eq!(block_cost_sum(&c, m, n).unwrap(), s);
            }
        }
    }

    #[test]
    fn closures_are_cost_functions() {
        let unit = |img: &SpatialImage| CostMap::filled(img.width, img.height, 1.0);
        let c = unit.cost_map(&noise(8, 8, 1));
        assert_eq!(c.values, vec![1.0; 64]);
    }

    #[test]
    fn csv_layout() {
        let c = CostMap::new(2, 2, vec![1.0, 0.5, 3.0, 4.25]).unwrap();
        assert_eq!(c.to_csv(), "1,0.5\n3,4.25\n");
        assert!(CostMap::new(2, 2, vec![1.0]).is_err());
    }

    proptest! {
        #[test]
        fn positive_and_finite(w in 1usize..20, h in 1usize..20, seed in 1u64..u64::MAX) {
            let c = hill_cost(&noise(w, h, seed));
            prop_assert!(c.values.iter().all(|v| v.is_finite() && *v > 0.0));
            prop_assert_eq!((c.width, c.height), (w, h));
        }
    }
}
