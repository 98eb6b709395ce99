use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphometry::MaskVolume;
use crate::render::BoundingBox;
use crate::volume::Volume;

/// Region argument shared by the quantitative tools: a mask label or a
/// voxel box against the volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoiSelector {
    Label(u32),
    Box(BoundingBox),
}

/// Linear indices of the selected voxels, ascending.
pub fn roi_indices(volume: &Volume, mask: Option<&MaskVolume>, roi: &RoiSelector) -> Result<Vec<usize>> {
    match roi {
        RoiSelector::Label(label) => {
            let mask = mask.ok_or(Error::MaskRequired)?;
            if mask.dims() != volume.dims() {
                return Err(Error::GeometryMismatch("mask does not match volume".into()));
            }
            mask.require(*label)
        }
        RoiSelector::Box(b) => {
            let checked = BoundingBox::new(b.lo, b.hi, volume.dims())?;
            Ok(checked.linear_indices(volume.dims()))
        }
    }
}
