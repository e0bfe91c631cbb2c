//! Block-structured storage shared by coefficients, costs, probabilities and maps.

/// Number of DCT modes in an 8×8 block.
pub const MODES: usize = 64;

/// A grid of 8×8 blocks stored in block-raster order, each block holding its
/// 64 values in natural (row-major) mode order, so mode `(a, b)` sits at
/// index `8 * a + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid<T> {
    blocks_high: usize,
    blocks_wide: usize,
    blocks: Vec<[T; MODES]>,
}

impl<T: Copy> BlockGrid<T> {
    pub fn filled(blocks_high: usize, blocks_wide: usize, value: T) -> Self {
        Self {
            blocks_high,
            blocks_wide,
            blocks: vec![[value; MODES]; blocks_high * blocks_wide],
        }
    }

    /// Wraps an existing block vector; `None` if the length disagrees with the shape.
    pub fn from_blocks(blocks_high: usize, blocks_wide: usize, blocks: Vec<[T; MODES]>) -> Option<Self> {
        (blocks.len() == blocks_high * blocks_wide).then_some(Self {
            blocks_high,
            blocks_wide,
            blocks,
        })
    }

    pub fn blocks_high(&self) -> usize {
        self.blocks_high
    }

    pub fn blocks_wide(&self) -> usize {
        self.blocks_wide
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Total number of per-mode cells.
    pub fn len(&self) -> usize {
        self.blocks.len() * MODES
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn same_shape<U>(&self, other: &BlockGrid<U>) -> bool {
        self.blocks_high == other.blocks_high && self.blocks_wide == other.blocks_wide
    }

    pub fn block(&self, row: usize, col: usize) -> &[T; MODES] {
        &self.blocks[row * self.blocks_wide + col]
    }

    pub fn block_mut(&mut self, row: usize, col: usize) -> &mut [T; MODES] {
        &mut self.blocks[row * self.blocks_wide + col]
    }

    pub fn get(&self, row: usize, col: usize, mode: usize) -> T {
        self.blocks[row * self.blocks_wide + col][mode]
    }

    pub fn set(&mut self, row: usize, col: usize, mode: usize, value: T) {
        self.blocks[row * self.blocks_wide + col][mode] = value;
    }

    pub fn blocks(&self) -> &[[T; MODES]] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [[T; MODES]] {
        &mut self.blocks
    }

    /// Iterates all cells in block-raster, then mode row-major order.
    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.blocks.iter().flat_map(|b| b.iter().copied())
    }

    /// Iterates `(block_row, block_col, block)` in raster order.
    pub fn iter_blocks(&self) -> impl Iterator<Item = (usize, usize, &[T; MODES])> + '_ {
        let wide = self.blocks_wide.max(1);
        self.blocks
            .iter()
            .enumerate()
            .map(move |(i, b)| (i / wide, i % wide, b))
    }

    pub fn map<U: Copy, F: Fn(T) -> U>(&self, f: F) -> BlockGrid<U> {
        BlockGrid {
            blocks_high: self.blocks_high,
            blocks_wide: self.blocks_wide,
            blocks: self.blocks.iter().map(|b| b.map(&f)).collect(),
        }
    }
}
