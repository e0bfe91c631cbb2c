//! Mutually dependent embedding.
//!
//! Changes inside one block interfere in the pixel domain, so the cost of a
//! block's change pattern is not the sum of its coefficients' costs. After a
//! trial embedding, every block's signs are re-chosen to minimize the joint
//! cost of the pattern, the costs are skewed toward those signs, and the
//! payload is embedded again.

use crate::dcdt::{block_pattern_cost, spatial_block, JpegCostMap};
use crate::dct::Block;
use crate::embed::{
    apply, guard_range, jpeg_costs, payload_bits, simulate_payload, total_entropy, EmbedConfig, EmbedOutcome,
    ModificationMap,
};
use crate::error::{Error, Result};
use crate::grid::MODES;
use crate::jpeg::{JpegImage, QuantTable};
use crate::rng::StegoRng;
use crate::spatial_cost::{CostMap, Hill, SpatialCost};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdeConfig {
    /// Blocks with more changes than this are left alone.
    pub t: usize,
    /// Penalty factor, above 1.
    pub v: f64,
}

impl Default for MdeConfig {
    fn default() -> Self {
        Self { t: 10, v: 10.0 }
    }
}

/// Joint cost of changing a block by `t` against its spatial costs.
pub fn candidate_cost(t: &[i8; MODES], d: &Block, quant: &QuantTable, p: f64) -> f64 {
    block_pattern_cost(t, d, quant, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockChoice {
    pub block: [i8; MODES],
    pub skipped: bool,
}

/// Best sign assignment over the support of `trial`.
///
/// Candidates are visited as a binary counter over the support in row-major
/// order, the first support cell being the most significant bit and a clear
/// bit meaning `-1`. The trial block wins any tie; otherwise the first
/// minimum in that order wins.
pub fn optimize_block(trial: &[i8; MODES], d: &Block, quant: &QuantTable, p: f64, t: usize) -> BlockChoice {
    let support: Vec<usize> = (0..MODES).filter(|&k| trial[k] != 0).collect();
    let n = support.len();
    if n == 0 || n > t {
        return BlockChoice {
            block: *trial,
            skipped: n > t,
        };
    }
    let mut best = *trial;
    let mut best_cost = f64::INFINITY;
    let mut candidate = [0i8; MODES];
    for counter in 0u32..(1u32 << n) {
        for (i, &k) in support.iter().enumerate() {
            candidate[k] = if counter >> (n - 1 - i) & 1 == 1 { 1 } else { -1 };
        }
        let cost = candidate_cost(&candidate, d, quant, p);
        if cost < best_cost {
            best_cost = cost;
            best = candidate;
        }
    }
    if candidate_cost(trial, d, quant, p) == best_cost {
        best = *trial;
    }
    BlockChoice {
        block: best,
        skipped: false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizedMap {
    pub m_prime: ModificationMap,
    pub skipped_blocks: Vec<(usize, usize)>,
}

/// Runs [`optimize_block`] over every block of a trial map.
pub fn optimize_map(
    trial: &ModificationMap,
    spatial: &CostMap,
    quant: &QuantTable,
    p: f64,
    t: usize,
) -> Result<OptimizedMap> {
    let (rows, cols) = spatial.block_dims();
    if rows != trial.m.blocks_high() || cols != trial.m.blocks_wide() {
        return Err(Error::DimensionMismatch("trial map and spatial costs differ in block grid".into()));
    }
    let mut m_prime = trial.clone();
    let mut skipped_blocks = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let choice = optimize_block(trial.m.block(r, c), &spatial_block(spatial, r, c), quant, p, t);
            if choice.skipped {
                skipped_blocks.push((r, c));
            }
            *m_prime.m.block_mut(r, c) = choice.block;
        }
    }
    Ok(OptimizedMap { m_prime, skipped_blocks })
}

/// Directional costs steered toward the optimized signs: the chosen
/// direction is divided by `v`, the opposite one multiplied by `v`. Skipped
/// blocks and unchanged cells keep their costs.
pub fn update_costs(rho: &JpegCostMap, optimized: &OptimizedMap, v: f64) -> Result<JpegCostMap> {
    if !(v > 1.0 && v.is_finite()) {
        return Err(Error::InvalidParameter(format!("penalty factor v = {v} must exceed 1")));
    }
    let map = &optimized.m_prime.m;
    if !map.same_shape(&rho.rho) {
        return Err(Error::DimensionMismatch("cost map and optimized map differ in block grid".into()));
    }
    let mut plus = rho.plus().clone();
    let mut minus = rho.minus().clone();
    let wide = map.blocks_wide();
    for (index, changes) in map.blocks().iter().enumerate() {
        let (r, c) = (index / wide, index % wide);
        if optimized.skipped_blocks.contains(&(r, c)) {
            continue;
        }
        let (bp, bm) = (plus.block_mut(r, c), minus.block_mut(r, c));
        for k in 0..MODES {
            match changes[k] {
                1 => {
                    bp[k] /= v;
                    bm[k] *= v;
                }
                -1 => {
                    bp[k] *= v;
                    bm[k] /= v;
                }
                _ => {}
            }
        }
    }
    JpegCostMap::directional(plus, minus)
}

/// Everything the joint pipeline produces.
#[derive(Debug, Clone)]
pub struct MdeOutcome {
    pub outcome: EmbedOutcome,
    pub trial: ModificationMap,
    pub optimized: OptimizedMap,
    pub trial_lambda: f64,
}

pub fn mde_embed(image: &JpegImage, config: &EmbedConfig) -> Result<EmbedOutcome> {
    mde_embed_with(image, config, &Hill::default())
}

pub fn mde_embed_with(image: &JpegImage, config: &EmbedConfig, cost_fn: &dyn SpatialCost) -> Result<EmbedOutcome> {
    Ok(mde_embed_detailed(image, config, cost_fn)?.outcome)
}

/// Trial embedding, per-block sign optimization, cost update and a second
/// embedding that continues the same random stream.
pub fn mde_embed_detailed(image: &JpegImage, config: &EmbedConfig, cost_fn: &dyn SpatialCost) -> Result<MdeOutcome> {
    let mut checked = config.clone();
    checked.mde = true;
    checked.validate()?;
    let p = config.p_source.p;
    let (spatial, rho) = jpeg_costs(image, cost_fn, p)?;
    let target = payload_bits(config.alpha, image);
    let mut rng = StegoRng::new(config.seed);

    let guarded = guard_range(&rho, image, config.wet_cost)?;
    let (trial, trial_lambda, _) = simulate_payload(&guarded, target, config.lambda_tol, &mut rng)?;
    let optimized = optimize_map(&trial, &spatial, &image.quant_table, p, config.t)?;
    let updated = update_costs(&rho, &optimized, config.v)?;
    let guarded = guard_range(&updated, image, config.wet_cost)?;
    let (map, lambda, probs) = simulate_payload(&guarded, target, config.lambda_tol, &mut rng)?;

    let outcome = EmbedOutcome {
        stego: apply(image, &map)?,
        lambda,
        entropy: total_entropy(&probs),
        expected_changes: probs.expected_changes(),
        target_bits: target,
        nnz_ac: image.count_nonzero_ac(),
        map,
    };
    Ok(MdeOutcome {
        outcome,
        trial,
        optimized,
        trial_lambda,
    })
}
