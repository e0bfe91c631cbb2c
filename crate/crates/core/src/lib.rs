//! Cost-based JPEG steganography: coefficient codec, DCT footprints, spatial
//! and transform-domain distortion, embedding simulation and multi-coefficient
//! joint embedding.

pub mod analysis;
pub mod dcdt;
pub mod dct;
pub mod embed;
pub mod error;
pub mod grid;
pub mod jpeg;
pub mod mde;
pub mod rng;
pub mod spatial_cost;

pub use error::{Error, Result};
pub use grid::{BlockGrid, MODES};
pub use jpeg::{parse_jpeg, serialize_jpeg, JpegImage, QuantTable};
