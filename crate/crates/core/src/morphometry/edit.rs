use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::edt::{distance_inside, distance_to_features};
use super::mask::MaskVolume;

/// Tolerance on the `distance <= radius` comparison.
const RADIUS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphOp {
    Dilate,
    Erode,
    Open,
    Close,
}

fn dilate(mask: &MaskVolume, label: u32, radius: f64) -> MaskVolume {
    let inside = mask.indicator(label);
    let d = distance_to_features(mask.dims(), mask.spacing(), &inside);
    let grown: Vec<bool> = mask
        .labels()
        .iter()
        .zip(&d)
        .map(|(&l, &dist)| l == label || (l == 0 && dist <= radius + RADIUS_EPS))
        .collect();
    mask.with_label(label, &grown)
}

fn erode(mask: &MaskVolume, label: u32, radius: f64) -> MaskVolume {
    let inside = mask.indicator(label);
    let d = distance_inside(mask.dims(), mask.spacing(), &inside, false);
    let kept: Vec<bool> = inside
        .iter()
        .zip(&d)
        .map(|(&on, &dist)| on && dist > radius + RADIUS_EPS)
        .collect();
    mask.with_label(label, &kept)
}

/// Morphological edit of one label with a Euclidean ball of `radius_mm`.
///
/// Dilation only claims background voxels; other labels are never changed.
/// Erosion measures distance to in-grid non-label voxels. Opening is
/// erosion followed by dilation, closing the reverse. Returns a new mask.
pub fn edit_geometry(mask: &MaskVolume, label: u32, op: MorphOp, radius_mm: f64) -> Result<MaskVolume> {
    if !(radius_mm.is_finite() && radius_mm > 0.0) {
        return Err(Error::InvalidRadius(radius_mm));
    }
    mask.require(label)?;
    Ok(match op {
        MorphOp::Dilate => dilate(mask, label, radius_mm),
        MorphOp::Erode => erode(mask, label, radius_mm),
        MorphOp::Open => dilate(&erode(mask, label, radius_mm), label, radius_mm),
        MorphOp::Close => erode(&dilate(mask, label, radius_mm), label, radius_mm),
    })
}
