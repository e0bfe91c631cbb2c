//! Payload-limited embedding simulation.
//!
//! Each coefficient changes by `+1` with probability
//! `β⁺ = e^{-λρ⁺} / (1 + e^{-λρ⁺} + e^{-λρ⁻})` and by `-1` with the
//! symmetric expression; `λ` is chosen so the total ternary entropy equals
//! the payload. Changes are then drawn from the seeded generator.

use std::fmt::Write as _;

use crate::dcdt::{dcdt_cost, DcdtParams, JpegCostMap};
use crate::dct::decompress;
use crate::error::{Error, Result};
use crate::grid::{BlockGrid, MODES};
use crate::jpeg::{JpegImage, WRITABLE_MAX};
use crate::rng::StegoRng;
use crate::spatial_cost::{CostMap, Hill, SpatialCost};

/// Cost the range guard assigns to forbidden change directions. Its Gibbs
/// weight underflows to exactly zero for any `λ` above about `7.5e-11`; an
/// infinite cost is closed at every `λ` and drops out of the capacity.
pub const WET_COST: f64 = 1e13;

const MAX_BISECTIONS: usize = 200;
const MAX_BRACKET_STEPS: usize = 1100;

/// Ternary changes `{-1, 0, +1}` per coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct ModificationMap {
    pub m: BlockGrid<i8>,
}

impl ModificationMap {
    pub fn zeros(blocks_high: usize, blocks_wide: usize) -> Self {
        Self {
            m: BlockGrid::filled(blocks_high, blocks_wide, 0),
        }
    }

    pub fn change_count(&self) -> usize {
        self.m.values().filter(|&v| v != 0).count()
    }

    /// Nonzero entries as `block_row,block_col,mode_row,mode_col,change`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("block_row,block_col,mode_row,mode_col,change\n");
        for (r, c, block) in self.m.iter_blocks() {
            for (k, &v) in block.iter().enumerate() {
                if v != 0 {
                    writeln!(out, "{r},{c},{},{},{v}", k / 8, k % 8).unwrap();
                }
            }
        }
        out
    }

    /// Reads a map CSV onto a grid of the given shape.
    pub fn from_csv(text: &str, blocks_high: usize, blocks_wide: usize) -> Result<Self> {
        let mut map = Self::zeros(blocks_high, blocks_wide);
        for entry in parse_map_csv(text)? {
            if entry.block_row >= blocks_high || entry.block_col >= blocks_wide {
                return Err(Error::InvalidCsv {
                    line: entry.line,
                    msg: format!("block ({},{}) outside the grid", entry.block_row, entry.block_col),
                });
            }
            map.m.set(entry.block_row, entry.block_col, entry.mode, entry.change);
        }
        Ok(map)
    }
}

/// One row of a map CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapEntry {
    pub line: usize,
    pub block_row: usize,
    pub block_col: usize,
    pub mode: usize,
    pub change: i8,
}

pub fn parse_map_csv(text: &str) -> Result<Vec<MapEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() || row.starts_with('#') || row.starts_with("block_row") {
            continue;
        }
        let bad = |msg: &str| Error::InvalidCsv { line, msg: msg.to_string() };
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(bad("expected 5 fields"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("expected a non-negative integer"));
        let (block_row, block_col, a, b) = (num(fields[0])?, num(fields[1])?, num(fields[2])?, num(fields[3])?);
        if a >= 8 || b >= 8 {
            return Err(bad("mode index outside 0..8"));
        }
        let change: i8 = fields[4].parse().map_err(|_| bad("expected -1, 0 or 1"))?;
        if !(-1..=1).contains(&change) {
            return Err(bad("expected -1, 0 or 1"));
        }
        out.push(MapEntry {
            line,
            block_row,
            block_col,
            mode: a * 8 + b,
            change,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChangeProbabilities {
    pub beta_plus: BlockGrid<f64>,
    pub beta_minus: BlockGrid<f64>,
}

impl ChangeProbabilities {
    pub fn zeros(blocks_high: usize, blocks_wide: usize) -> Self {
        Self {
            beta_plus: BlockGrid::filled(blocks_high, blocks_wide, 0.0),
            beta_minus: BlockGrid::filled(blocks_high, blocks_wide, 0.0),
        }
    }

    /// `Σ (β⁺ + β⁻)`.
    pub fn expected_changes(&self) -> f64 {
        self.beta_plus.values().zip(self.beta_minus.values()).map(|(p, m)| p + m).sum()
    }
}

fn gibbs_weight(rho: f64, lambda: f64) -> f64 {
    if rho == f64::INFINITY {
        0.0
    } else {
        (-lambda * rho).exp()
    }
}

/// `(β⁺, β⁻, β⁰)` of one coefficient.
fn triple(rho_plus: f64, rho_minus: f64, lambda: f64) -> (f64, f64, f64) {
    let ep = gibbs_weight(rho_plus, lambda);
    let em = gibbs_weight(rho_minus, lambda);
    let z = 1.0 + ep + em;
    (ep / z, em / z, 1.0 / z)
}

fn ternary_entropy(bp: f64, bm: f64, b0: f64) -> f64 {
    let term = |b: f64| if b > 0.0 { -b * b.log2() } else { 0.0 };
    term(bp) + term(bm) + term(b0)
}

pub fn change_probs(costs: &JpegCostMap, lambda: f64) -> ChangeProbabilities {
    let (plus, minus) = (costs.plus(), costs.minus());
    let mut out = ChangeProbabilities::zeros(plus.blocks_high(), plus.blocks_wide());
    let bp = out.beta_plus.blocks_mut().iter_mut();
    let bm = out.beta_minus.blocks_mut().iter_mut();
    for (((op, om), rp), rm) in bp.zip(bm).zip(plus.blocks()).zip(minus.blocks()) {
        for k in 0..MODES {
            let (p, m, _) = triple(rp[k], rm[k], lambda);
            op[k] = p;
            om[k] = m;
        }
    }
    out
}

/// Total ternary entropy in bits.
pub fn total_entropy(probs: &ChangeProbabilities) -> f64 {
    probs
        .beta_plus
        .values()
        .zip(probs.beta_minus.values())
        .map(|(p, m)| ternary_entropy(p, m, 1.0 - p - m))
        .sum()
}

/// Entropy at `λ` without materializing the probabilities.
fn entropy_at(costs: &JpegCostMap, lambda: f64) -> f64 {
    let mut h = 0.0;
    for (p, m) in costs.plus().values().zip(costs.minus().values()) {
        let (bp, bm, b0) = triple(p, m, lambda);
        h += ternary_entropy(bp, bm, b0);
    }
    h
}

/// Entropy as `λ → 0`: `log₂(1 + directions with finite cost)` per coefficient.
pub fn max_entropy(costs: &JpegCostMap) -> f64 {
    costs
        .plus()
        .values()
        .zip(costs.minus().values())
        .map(|(p, m)| {
            let open = (p < f64::INFINITY) as u32 + (m < f64::INFINITY) as u32;
            (1.0 + open as f64).log2()
        })
        .sum()
}

/// `λ` whose entropy is within `tol × target` of `target` bits. A zero target
/// gives an infinite `λ`.
pub fn solve_lambda(costs: &JpegCostMap, target_bits: f64, tol: f64) -> Result<f64> {
    if target_bits.is_nan() || target_bits < 0.0 || !target_bits.is_finite() {
        return Err(Error::InvalidParameter(format!("payload target {target_bits}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tol}")));
    }
    if target_bits == 0.0 {
        return Ok(f64::INFINITY);
    }
    let max = max_entropy(costs);
    if max == 0.0 {
        return Err(Error::DegenerateCosts("every change direction has infinite cost"));
    }
    if target_bits >= max {
        return Err(Error::TargetUnreachable { target: target_bits, max });
    }
    let close = |h: f64| (h - target_bits).abs() <= tol * target_bits;

    let mut lambda = 1.0f64;
    let mut h = entropy_at(costs, lambda);
    if close(h) {
        return Ok(lambda);
    }
    let (mut lo, mut hi);
    let mut steps = 0;
    if h > target_bits {
        loop {
            lambda *= 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || !lambda.is_finite() {
                return Err(Error::DegenerateCosts("entropy does not fall to the target"));
            }
            h = entropy_at(costs, lambda);
            if close(h) {
                return Ok(lambda);
            }
            if h < target_bits {
                break;
            }
        }
        lo = lambda / 2.0;
        hi = lambda;
    } else {
        loop {
            lambda /= 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || lambda == 0.0 {
                return Err(Error::DegenerateCosts("entropy does not rise to the target"));
            }
            h = entropy_at(costs, lambda);
            if close(h) {
                return Ok(lambda);
            }
            if h > target_bits {
                break;
            }
        }
        lo = lambda;
        hi = lambda * 2.0;
    }
    let mut mid = (lo + hi) / 2.0;
    for _ in 0..MAX_BISECTIONS {
        mid = (lo + hi) / 2.0;
        h = entropy_at(costs, mid);
        if close(h) {
            break;
        }
        if h > target_bits {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Draws one uniform per coefficient, block-raster then mode row-major.
pub fn simulate(probs: &ChangeProbabilities, rng: &mut StegoRng) -> ModificationMap {
    let mut map = ModificationMap::zeros(probs.beta_plus.blocks_high(), probs.beta_plus.blocks_wide());
    let blocks = probs.beta_plus.blocks().iter().zip(probs.beta_minus.blocks());
    for (out, (bp, bm)) in map.m.blocks_mut().iter_mut().zip(blocks) {
        for k in 0..MODES {
            let u = rng.uniform();
            out[k] = if u < bp[k] {
                1
            } else if u < bp[k] + bm[k] {
                -1
            } else {
                0
            };
        }
    }
    map
}

pub fn simulate_seeded(probs: &ChangeProbabilities, seed: u64) -> ModificationMap {
    simulate(probs, &mut StegoRng::new(seed))
}

/// Adds the map to the coefficients.
pub fn apply(image: &JpegImage, map: &ModificationMap) -> Result<JpegImage> {
    if !image.coeffs.same_shape(&map.m) {
        return Err(Error::DimensionMismatch("map and image block grids differ".into()));
    }
    let mut out = image.clone();
    let wide = image.coeffs.blocks_wide();
    for (index, (block, changes)) in out.coeffs.blocks_mut().iter_mut().zip(map.m.blocks()).enumerate() {
        for k in 0..MODES {
            if changes[k] == 0 {
                continue;
            }
            let value = block[k] as i32 + changes[k] as i32;
            if value.abs() > WRITABLE_MAX as i32 {
                return Err(Error::CoefficientOverflow {
                    value,
                    block_row: index / wide,
                    block_col: index % wide,
                    mode: k,
                });
            }
            block[k] = value as i16;
        }
    }
    Ok(out)
}

/// Makes every change direction that would leave the writable coefficient
/// range wet. Returns the input unchanged when nothing needs guarding.
pub fn guard_range(costs: &JpegCostMap, image: &JpegImage, wet: f64) -> Result<JpegCostMap> {
    if !costs.plus().same_shape(&image.coeffs) {
        return Err(Error::DimensionMismatch("cost and coefficient grids differ".into()));
    }
    let limit = WRITABLE_MAX as i32;
    let needs_guard = image.coeffs.values().any(|c| (c as i32).abs() >= limit);
    if !needs_guard {
        return Ok(costs.clone());
    }
    let mut plus = costs.plus().clone();
    let mut minus = costs.minus().clone();
    let cells = plus.blocks_mut().iter_mut().zip(minus.blocks_mut().iter_mut());
    for ((bp, bm), coeffs) in cells.zip(image.coeffs.blocks()) {
        for k in 0..MODES {
            let c = coeffs[k] as i32;
            if c + 1 > limit {
                bp[k] = wet;
            }
            if c - 1 < -limit {
                bm[k] = wet;
            }
        }
    }
    JpegCostMap::directional(plus, minus)
}

/// `α × (number of nonzero AC coefficients)`.
pub fn payload_bits(alpha: f64, image: &JpegImage) -> f64 {
    alpha * image.count_nonzero_ac() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedConfig {
    /// Bits per nonzero AC coefficient.
    pub alpha: f64,
    pub p_source: DcdtParams,
    pub seed: u64,
    pub wet_cost: f64,
    pub lambda_tol: f64,
    pub mde: bool,
    /// Largest per-block change count the joint optimization enumerates.
    pub t: usize,
    /// Cost penalty factor of the joint optimization.
    pub v: f64,
}

impl EmbedConfig {
    pub fn new(alpha: f64, p_source: DcdtParams, seed: u64) -> Self {
        Self {
            alpha,
            p_source,
            seed,
            wet_cost: WET_COST,
            lambda_tol: 1e-3,
            mde: false,
            t: 10,
            v: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=3f64.log2()).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!("payload {} outside [0, log2 3]", self.alpha)));
        }
        if !(self.p_source.p > 0.0 && self.p_source.p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p = {}", self.p_source.p)));
        }
        if self.mde && !(self.v > 1.0 && self.v.is_finite()) {
            return Err(Error::InvalidParameter(format!("penalty factor v = {} must exceed 1", self.v)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EmbedOutcome {
    pub stego: JpegImage,
    pub map: ModificationMap,
    pub lambda: f64,
    /// Entropy of the final change distribution, in bits.
    pub entropy: f64,
    pub target_bits: f64,
    pub nnz_ac: usize,
    pub expected_changes: f64,
}

impl EmbedOutcome {
    pub fn changes(&self) -> usize {
        self.map.change_count()
    }

    /// Changed coefficients over all coefficients.
    pub fn change_rate(&self) -> f64 {
        self.changes() as f64 / self.map.m.len() as f64
    }
}

/// Spatial costs of the decompressed image and the transformed JPEG costs.
pub fn jpeg_costs(image: &JpegImage, cost_fn: &dyn SpatialCost, p: f64) -> Result<(CostMap, JpegCostMap)> {
    let spatial = cost_fn.cost_map(&decompress(image));
    let rho = dcdt_cost(&spatial, &image.quant_table, p)?;
    Ok((spatial, rho))
}

/// Solves for the payload on `costs` and draws a map from `rng`.
pub(crate) fn simulate_payload(
    costs: &JpegCostMap,
    target_bits: f64,
    tol: f64,
    rng: &mut StegoRng,
) -> Result<(ModificationMap, f64, ChangeProbabilities)> {
    let lambda = solve_lambda(costs, target_bits, tol)?;
    let probs = if lambda.is_infinite() {
        ChangeProbabilities::zeros(costs.blocks_high(), costs.blocks_wide())
    } else {
        change_probs(costs, lambda)
    };
    Ok((simulate(&probs, rng), lambda, probs))
}

/// Full pipeline with HiLL spatial costs.
pub fn embed(image: &JpegImage, config: &EmbedConfig) -> Result<EmbedOutcome> {
    embed_with(image, config, &Hill::default())
}

pub fn embed_with(image: &JpegImage, config: &EmbedConfig, cost_fn: &dyn SpatialCost) -> Result<EmbedOutcome> {
    config.validate()?;
    if config.mde {
        return crate::mde::mde_embed_with(image, config, cost_fn);
    }
    let (_, rho) = jpeg_costs(image, cost_fn, config.p_source.p)?;
    let guarded = guard_range(&rho, image, config.wet_cost)?;
    let target = payload_bits(config.alpha, image);
    let mut rng = StegoRng::new(config.seed);
    let (map, lambda, probs) = simulate_payload(&guarded, target, config.lambda_tol, &mut rng)?;
    Ok(EmbedOutcome {
        stego: apply(image, &map)?,
        lambda,
        entropy: total_entropy(&probs),
        expected_changes: probs.expected_changes(),
        target_bits: target,
        nnz_ac: image.count_nonzero_ac(),
        map,
    })
}
