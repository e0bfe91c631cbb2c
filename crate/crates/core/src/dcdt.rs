//! Spatial-to-JPEG cost transformation.
//!
//! The cost of a unit change of coefficient `(a, b)` in block `(m, n)` is
//! `ρ = Σ d(i,j)^p · |s_ab(i,j)|`, the spatial cost of the block weighted by
//! the magnitude of the pixel change that coefficient causes.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::dct::{block_change, AbsChangeTable, Block};
use crate::error::{Error, Result};
use crate::grid::{BlockGrid, MODES};
use crate::jpeg::QuantTable;
use crate::spatial_cost::CostMap;

/// Per-coefficient embedding costs. `rho` holds the symmetric cost; after
/// cost updating the `+1` and `-1` directions may differ.
#[derive(Debug, Clone, PartialEq)]
pub struct JpegCostMap {
    pub rho: BlockGrid<f64>,
    pub directional: Option<(BlockGrid<f64>, BlockGrid<f64>)>,
}

impl JpegCostMap {
    pub fn symmetric(rho: BlockGrid<f64>) -> Self {
        Self { rho, directional: None }
    }

    pub fn directional(plus: BlockGrid<f64>, minus: BlockGrid<f64>) -> Result<Self> {
        if !plus.same_shape(&minus) {
            return Err(Error::DimensionMismatch("directional cost grids differ in shape".into()));
        }
        Ok(Self {
            rho: plus.clone(),
            directional: Some((plus, minus)),
        })
    }

    pub fn plus(&self) -> &BlockGrid<f64> {
        self.directional.as_ref().map_or(&self.rho, |(p, _)| p)
    }

    pub fn minus(&self) -> &BlockGrid<f64> {
        self.directional.as_ref().map_or(&self.rho, |(_, m)| m)
    }

    pub fn is_symmetric(&self) -> bool {
        self.directional.is_none()
    }

    pub fn blocks_high(&self) -> usize {
        self.rho.blocks_high()
    }

    pub fn blocks_wide(&self) -> usize {
        self.rho.blocks_wide()
    }

    /// One line per coefficient: `block_row,block_col,mode_row,mode_col,rho`
    /// for symmetric maps, with `rho_plus,rho_minus` in place of `rho`
    /// otherwise.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match &self.directional {
            None => {
                out.push_str("block_row,block_col,mode_row,mode_col,rho\n");
                for (m, n, block) in self.rho.iter_blocks() {
                    for (k, v) in block.iter().enumerate() {
                        writeln!(out, "{m},{n},{},{},{v}", k / 8, k % 8).unwrap();
                    }
                }
            }
            Some((plus, minus)) => {
                out.push_str("block_row,block_col,mode_row,mode_col,rho_plus,rho_minus\n");
                for ((m, n, bp), bm) in plus.iter_blocks().zip(minus.blocks()) {
                    for k in 0..MODES {
                        writeln!(out, "{m},{n},{},{},{},{}", k / 8, k % 8, bp[k], bm[k]).unwrap();
                    }
                }
            }
        }
        out
    }
}

/// `d^p`, leaving values untouched for `p = 1`.
pub(crate) fn weighted(d: &Block, p: f64) -> Block {
    if p == 1.0 {
        *d
    } else {
        d.map(|v| v.powf(p))
    }
}

/// `Σ w·|s|` over the 64 cells in row-major order.
pub(crate) fn weighted_sum(weights: &Block, abs_change: &Block) -> f64 {
    let mut s = 0.0;
    for (w, a) in weights.iter().zip(abs_change) {
        s += w * a;
    }
    s
}

/// Cost block of block `(m, n)` of a spatial cost map.
pub fn spatial_block(costs: &CostMap, m: usize, n: usize) -> Block {
    let mut out = [0.0; MODES];
    for i in 0..8 {
        let start = (m * 8 + i) * costs.width + n * 8;
        out[i * 8..i * 8 + 8].copy_from_slice(&costs.values[start..start + 8]);
    }
    out
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p must be positive and finite, got {p}")))
    }
}

/// Symmetric JPEG costs from a spatial cost map covering whole blocks.
pub fn dcdt_cost(costs: &CostMap, quant: &QuantTable, p: f64) -> Result<JpegCostMap> {
    check_p(p)?;
    if costs.width == 0 || costs.height == 0 || !costs.width.is_multiple_of(8) || !costs.height.is_multiple_of(8) {
        return Err(Error::DimensionMismatch(format!(
            "cost map {}x{} does not cover whole 8x8 blocks",
            costs.width, costs.height
        )));
    }
    let table = AbsChangeTable::new(quant);
    let (rows, cols) = costs.block_dims();
    let mut rho = BlockGrid::filled(rows, cols, 0.0);
    for m in 0..rows {
        for n in 0..cols {
            let dp = weighted(&spatial_block(costs, m, n), p);
            let out = rho.block_mut(m, n);
            for (k, abs) in table.modes.iter().enumerate() {
                out[k] = weighted_sum(&dp, abs);
            }
        }
    }
    Ok(JpegCostMap::symmetric(rho))
}

/// Cost of changing a whole block by `t` (entries in {-1, 0, +1}) against
/// spatial block costs `d`.
pub fn block_pattern_cost(t: &[i8; MODES], d: &Block, quant: &QuantTable, p: f64) -> f64 {
    let abs = block_change(t, quant).map(f64::abs);
    weighted_sum(&weighted(d, p), &abs)
}

/// Affine quality rule for `p`, defined on quality factors 75 to 95.
pub fn p_for_qf(qf: i32) -> Result<f64> {
    if !(75..=95).contains(&qf) {
        return Err(Error::QfOutOfRange(qf));
    }
    Ok(0.02 * (qf - 75) as f64 + 0.48)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Steganalyzer {
    CcJrm,
    Gfr,
    ScaGfr,
}

impl fmt::Display for Steganalyzer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Steganalyzer::CcJrm => "cc-jrm",
            Steganalyzer::Gfr => "gfr",
            Steganalyzer::ScaGfr => "sca-gfr",
        })
    }
}

impl FromStr for Steganalyzer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "cc-jrm" | "ccjrm" => Ok(Steganalyzer::CcJrm),
            "gfr" => Ok(Steganalyzer::Gfr),
            "sca-gfr" | "scagfr" => Ok(Steganalyzer::ScaGfr),
            _ => Err(Error::InvalidParameter(format!("unknown steganalyzer {s:?}"))),
        }
    }
}

/// Tabulated best `p` per quality factor and steganalyzer.
pub fn p_from_table(qf: i32, steganalyzer: Steganalyzer) -> Result<f64> {
    use Steganalyzer::*;
    let p = match (qf, steganalyzer) {
        (75, CcJrm) => 0.7,
        (75, Gfr) => 0.7,
        (75, ScaGfr) => 0.5,
        (95, CcJrm) => 0.9,
        (95, Gfr) => 1.1,
        (95, ScaGfr) => 0.9,
        (80, ScaGfr) => 0.6,
        (85, ScaGfr) => 0.6,
        (90, ScaGfr) => 0.8,
        _ => {
            return Err(Error::NoTableEntry {
                qf,
                steganalyzer: steganalyzer.to_string(),
            })
        }
    };
    Ok(p)
}

/// Where a `p` value came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PSource {
    Explicit,
    Table { qf: i32, steganalyzer: Steganalyzer },
    Regression { qf: i32 },
}

impl fmt::Display for PSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PSource::Explicit => f.write_str("explicit"),
            PSource::Table { qf, steganalyzer } => write!(f, "table:qf{qf}:{steganalyzer}"),
            PSource::Regression { qf } => write!(f, "regression:qf{qf}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcdtParams {
    pub p: f64,
    pub source: PSource,
}

impl DcdtParams {
    pub fn explicit(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Self { p, source: PSource::Explicit })
    }

    pub fn table(qf: i32, steganalyzer: Steganalyzer) -> Result<Self> {
        Ok(Self {
            p: p_from_table(qf, steganalyzer)?,
            source: PSource::Table { qf, steganalyzer },
        })
    }

    pub fn regression(qf: i32) -> Result<Self> {
        Ok(Self {
            p: p_for_qf(qf)?,
            source: PSource::Regression { qf },
        })
    }

    /// Table entry for `steganalyzer` when one exists, otherwise the rule.
    pub fn auto(qf: i32, steganalyzer: Steganalyzer) -> Result<Self> {
        match Self::table(qf, steganalyzer) {
            Err(Error::NoTableEntry { .. }) => Self::regression(qf),
            other => other,
        }
    }
}
