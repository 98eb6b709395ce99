//! Quantitative region features: intensity statistics, shape, texture.

mod chart;
mod firstorder;
pub mod glcm;
pub mod marching_cubes;
mod roi;
mod shape;
mod signature;

use crate::error::Result;
use crate::morphometry::MaskVolume;
use crate::volume::Volume;

pub use chart::{format_sig4, visualize_radiomics_chart, CHART_HEIGHT, CHART_WIDTH, SVG_MEDIA_TYPE};
pub use firstorder::{bin_of, first_order, percentile, FirstOrderStats, HISTOGRAM_BINS};
pub use glcm::{analyze_texture, GlcmFeatures, DEFAULT_BINS};
pub use roi::{roi_indices, RoiSelector};
pub use shape::{analyze_shape_properties, principal_moments, ShapeReport};
pub use signature::{extract_radiomics_signature, RadiomicsSignature, SIGNATURE_KEYS};

pub fn analyze_hu_distribution(volume: &Volume, mask: Option<&MaskVolume>, roi: &RoiSelector) -> Result<FirstOrderStats> {
    let idx = roi_indices(volume, mask, roi)?;
    let values: Vec<f64> = idx.iter().map(|&i| volume.voxels()[i]).collect();
    first_order(&values)
}

pub fn analyze_lesion_texture(
    volume: &Volume,
    mask: Option<&MaskVolume>,
    roi: &RoiSelector,
    bins: usize,
) -> Result<GlcmFeatures> {
    let idx = roi_indices(volume, mask, roi)?;
    analyze_texture(volume.dims(), volume.voxels(), &idx, bins)
}
