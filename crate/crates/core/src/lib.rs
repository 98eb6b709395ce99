//! Voxel-level kernels for CT volumes: NIfTI I/O, windowed rendering,
//! morphometry on label masks and radiomics features.
//!
//! Voxels are addressed `[i, j, k]` with `i` varying fastest in memory.

pub mod error;
pub mod morphometry;
pub mod phantom;
pub mod radiomics;
pub mod render;
pub mod volume;

pub use error::{Error, Result};
pub use volume::{Dims, Volume, Voxel};
