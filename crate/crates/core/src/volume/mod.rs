//! Calibrated CT volumes: NIfTI ingestion, metadata and intensity windowing.

pub mod nifti;
mod window;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use nifti::Datatype;
pub use window::{apply_window, list_window_presets, preset, round_half_up, Window, WindowPreset};

/// Voxel counts along (i, j, k).
pub type Dims = [usize; 3];
/// Integer voxel coordinate (i, j, k).
pub type Voxel = [usize; 3];

/// Linear offset of a voxel in i-fastest order.
#[inline]
pub fn linear_index(dims: Dims, v: Voxel) -> usize {
    v[0] + dims[0] * (v[1] + dims[1] * v[2])
}

/// Inverse of [`linear_index`].
#[inline]
pub fn voxel_of(dims: Dims, idx: usize) -> Voxel {
    let i = idx % dims[0];
    let rest = idx / dims[0];
    [i, rest % dims[1], rest / dims[1]]
}

/// Checks a signed coordinate against `dims`, returning it as a voxel.
pub fn checked_voxel(dims: Dims, p: [i64; 3]) -> Result<Voxel> {
    if (0..3).all(|a| p[a] >= 0 && (p[a] as usize) < dims[a]) {
        Ok([p[0] as usize, p[1] as usize, p[2] as usize])
    } else {
        Err(Error::PointOutOfRange { point: p, dims })
    }
}

/// A CT scan on a regular grid, in Hounsfield units.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: Dims,
    spacing: [f64; 3],
    voxels: Vec<f64>,
    datatype: Datatype,
    source_digest: String,
}

impl Volume {
    /// Builds a volume from HU values held in memory.
    ///
    /// The digest covers dims, spacing and the voxel bit patterns.
    pub fn new(dims: Dims, spacing: [f64; 3], voxels: Vec<f64>) -> Result<Self> {
        let mut hasher = Sha256::new();
        for d in dims {
            hasher.update((d as u64).to_le_bytes());
        }
        for s in spacing {
            hasher.update(s.to_le_bytes());
        }
        for v in &voxels {
            hasher.update(v.to_le_bytes());
        }
        let digest = hex::encode(hasher.finalize());
        Self::with_digest(dims, spacing, voxels, Datatype::Float64, digest)
    }

    fn with_digest(
        dims: Dims,
        spacing: [f64; 3],
        voxels: Vec<f64>,
        datatype: Datatype,
        source_digest: String,
    ) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::MalformedHeader(format!("zero dimension in {dims:?}")));
        }
        if spacing.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::MalformedHeader(format!("non-positive spacing {spacing:?}")));
        }
        let expected = dims.iter().product::<usize>();
        if voxels.len() != expected {
            return Err(Error::MalformedHeader(format!(
                "{} voxels for dims {dims:?}",
                voxels.len()
            )));
        }
        if let Some(idx) = voxels.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteVoxel(idx));
        }
        Ok(Volume {
            dims,
            spacing,
            voxels,
            datatype,
            source_digest,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn voxels(&self) -> &[f64] {
        &self.voxels
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    /// SHA-256 of the bytes the volume was parsed from (hex).
    pub fn source_digest(&self) -> &str {
        &self.source_digest
    }

    #[inline]
    pub fn get(&self, v: Voxel) -> f64 {
        self.voxels[linear_index(self.dims, v)]
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    /// (min, max) over every voxel.
    pub fn hu_range(&self) -> (f64, f64) {
        self.voxels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Parses a NIfTI-1 file (plain or gzip) into a calibrated volume.
pub fn parse_nifti(bytes: &[u8]) -> Result<Volume> {
    let raw = nifti::read(bytes)?;
    let voxels = raw.scaled()?;
    let digest = hex::encode(Sha256::digest(bytes));
    Volume::with_digest(
        raw.header.dims,
        raw.header.spacing,
        voxels,
        raw.header.datatype,
        digest,
    )
}

/// Summary returned by `inspect_metadata`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetadataReport {
    pub dims: Dims,
    pub spacing: [f64; 3],
    pub datatype: String,
    pub hu_min: f64,
    pub hu_max: f64,
    pub window_presets: Vec<String>,
}

pub fn inspect_metadata(volume: &Volume) -> MetadataReport {
    let (hu_min, hu_max) = volume.hu_range();
    MetadataReport {
        dims: volume.dims(),
        spacing: volume.spacing(),
        datatype: volume.datatype().name().to_string(),
        hu_min,
        hu_max,
        window_presets: list_window_presets()
            .iter()
            .map(|p| p.name.to_string())
            .collect(),
    }
}
