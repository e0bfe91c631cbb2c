//! Rank correlation of block costs and per-mode change histograms.

use std::fmt::Write as _;

use crate::dct::decompress;
use crate::embed::{MapEntry, ModificationMap};
use crate::error::{Error, Result};
use crate::grid::MODES;
use crate::jpeg::JpegImage;
use crate::rng::StegoRng;
use crate::spatial_cost::{block_cost_sums, hill_cost};

/// Fractional ranks starting at 1; tied values share their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::DegenerateInput("need at least two values"));
    }
    pearson(&average_ranks(x), &average_ranks(y)).ok_or(Error::DegenerateInput("constant ranking"))
}

/// One cost per block, block-raster order.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCostVector {
    pub values: Vec<f64>,
    pub label: String,
}

impl BlockCostVector {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            values,
            label: label.into(),
        }
    }

    /// The label as a `#` comment, then one value per line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\n", self.label);
        for v in &self.values {
            writeln!(out, "{v}").unwrap();
        }
        out
    }

    /// One value per line; a leading `#` line sets the label, blank lines
    /// are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut label = String::new();
        let mut values = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let row = raw.trim();
            if row.is_empty() {
                continue;
            }
            if let Some(comment) = row.strip_prefix('#') {
                if values.is_empty() && label.is_empty() {
                    label = comment.trim().to_string();
                }
                continue;
            }
            let v: f64 = row.parse().map_err(|_| Error::InvalidCsv {
                line: i + 1,
                msg: format!("not a number: {row:?}"),
            })?;
            values.push(v);
        }
        Ok(Self { values, label })
    }
}

/// `n` independent uniforms on `(0, 1]`.
pub fn random_block_costs(n: usize, seed: u64) -> BlockCostVector {
    let mut rng = StegoRng::new(seed);
    BlockCostVector::new("rand", (0..n).map(|_| rng.uniform_open_low()).collect())
}

/// HiLL cost summed over each block of the decompressed image.
pub fn hill_block_costs(image: &JpegImage) -> BlockCostVector {
    BlockCostVector::new("hill", block_cost_sums(&hill_cost(&decompress(image))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeHistogram {
    pub counts: [u64; MODES],
    pub percentages: [f64; MODES],
    pub total: u64,
}

impl ModeHistogram {
    pub fn from_counts(counts: [u64; MODES]) -> Self {
        let total: u64 = counts.iter().sum();
        let percentages = if total == 0 {
            [0.0; MODES]
        } else {
            counts.map(|c| 100.0 * c as f64 / total as f64)
        };
        Self {
            counts,
            percentages,
            total,
        }
    }

    /// True when no change was counted.
    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Pools the counts of several histograms.
    pub fn merge<'a>(hists: impl IntoIterator<Item = &'a ModeHistogram>) -> Self {
        let mut counts = [0u64; MODES];
        for h in hists {
            for (c, x) in counts.iter_mut().zip(h.counts) {
                *c += x;
            }
        }
        Self::from_counts(counts)
    }

    /// Share of changes on modes with `a + b ≥ min_index_sum`, in percent.
    pub fn high_frequency_mass(&self, min_index_sum: usize) -> f64 {
        (0..MODES)
            .filter(|k| k / 8 + k % 8 >= min_index_sum)
            .map(|k| self.percentages[k])
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode_row,mode_col,count,percentage\n");
        for k in 0..MODES {
            writeln!(out, "{},{},{},{}", k / 8, k % 8, self.counts[k], self.percentages[k]).unwrap();
        }
        out
    }
}

pub fn mode_histogram(map: &ModificationMap) -> ModeHistogram {
    let mut counts = [0u64; MODES];
    for block in map.m.blocks() {
        for (c, &v) in counts.iter_mut().zip(block) {
            *c += (v != 0) as u64;
        }
    }
    ModeHistogram::from_counts(counts)
}

/// Histogram straight from map CSV entries.
pub fn mode_histogram_from_entries(entries: &[MapEntry]) -> ModeHistogram {
    let mut counts = [0u64; MODES];
    for e in entries.iter().filter(|e| e.change != 0) {
        counts[e.mode] += 1;
    }
    ModeHistogram::from_counts(counts)
}
