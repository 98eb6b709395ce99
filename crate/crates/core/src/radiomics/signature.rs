use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphometry::MaskVolume;
use crate::volume::Volume;

use super::firstorder::first_order;
use super::glcm::{region_features, DEFAULT_BINS};
use super::shape::analyze_shape_properties;

/// Every key of a signature, in serialization order.
pub const SIGNATURE_KEYS: [&str; 18] = [
    "firstorder.count",
    "firstorder.max",
    "firstorder.mean",
    "firstorder.median",
    "firstorder.min",
    "firstorder.p10",
    "firstorder.p90",
    "firstorder.std",
    "glcm.contrast",
    "glcm.correlation",
    "glcm.energy",
    "glcm.entropy",
    "glcm.homogeneity",
    "shape.elongation",
    "shape.flatness",
    "shape.sphericity",
    "shape.surface_area_mm2",
    "shape.volume_mm3",
];

/// Named feature vector; keys iterate in sorted order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RadiomicsSignature(pub BTreeMap<String, f64>);

impl RadiomicsSignature {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

impl FromIterator<(String, f64)> for RadiomicsSignature {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// First-order, shape and texture features of one mask label.
///
/// Texture uses the default bin count; a one-voxel label scores as the
/// degenerate single-cell matrix.
pub fn extract_radiomics_signature(volume: &Volume, mask: &MaskVolume, label: u32) -> Result<RadiomicsSignature> {
    if mask.dims() != volume.dims() {
        return Err(Error::GeometryMismatch("mask does not match volume".into()));
    }
    let roi = mask.require(label)?;
    let values: Vec<f64> = roi.iter().map(|&i| volume.voxels()[i]).collect();
    let fo = first_order(&values)?;
    let shape = analyze_shape_properties(mask, label)?;
    let glcm = region_features(volume.dims(), volume.voxels(), &roi, DEFAULT_BINS);

    let entries = [
        ("firstorder.count", fo.count as f64),
        ("firstorder.mean", fo.mean),
        ("firstorder.std", fo.std),
        ("firstorder.min", fo.min),
        ("firstorder.max", fo.max),
        ("firstorder.median", fo.median),
        ("firstorder.p10", fo.p10),
        ("firstorder.p90", fo.p90),
        ("shape.volume_mm3", shape.volume_mm3),
        ("shape.surface_area_mm2", shape.surface_area_mm2),
        ("shape.sphericity", shape.sphericity),
        ("shape.elongation", shape.elongation),
        ("shape.flatness", shape.flatness),
        ("glcm.contrast", glcm.contrast),
        ("glcm.energy", glcm.energy),
        ("glcm.homogeneity", glcm.homogeneity),
        ("glcm.correlation", glcm.correlation),
        ("glcm.entropy", glcm.entropy),
    ];
    Ok(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiomics::glcm::analyze_texture;

    fn fixture() -> (Volume, MaskVolume) {
        let dims = [6, 6, 6];
        let n = 216;
        let voxels: Vec<f64> = (0..n).map(|i| ((i * 37) % 101) as f64 - 50.0).collect();
        let labels: Vec<u32> = (0..n)
            .map(|i| {
                let v = crate::volume::voxel_of(dims, i);
                u32::from(v.iter().all(|&c| (1..5).contains(&c)))
            })
            .collect();
        (
            Volume::new(dims, [1.0, 1.0, 2.0], voxels).unwrap(),
            MaskVolume::new(dims, [1.0, 1.0, 2.0], labels, BTreeMap::new()),
        )
    }

    #[test]
    fn key_set_is_the_schema() {
        let (vol, mask) = fixture();
        let sig = extract_radiomics_signature(&vol, &mask, 1).unwrap();
        let keys: Vec<&str> = sig.iter().map(|(k, _)| k).collect();
        assert_eq!(keys, SIGNATURE_KEYS);
        assert!(sig.iter().all(|(_, v)| v.is_finite()));
    }

    #[test]
    fn matches_underlying_operations() {
        let (vol, mask) = fixture();
        let sig = extract_radiomics_signature(&vol, &mask, 1).unwrap();
        let roi = mask.require(1).unwrap();
        let values: Vec<f64> = roi.iter().map(|&i| vol.voxels()[i]).collect();
        let fo = first_order(&values).unwrap();
        let shape = analyze_shape_properties(&mask, 1).unwrap();
        let glcm = analyze_texture(vol.dims(), vol.voxels(), &roi, DEFAULT_BINS).unwrap();
        assert_eq!(sig.get("firstorder.p90"), Some(fo.p90));
        assert_eq!(sig.get("shape.sphericity"), Some(shape.sphericity));
        assert_eq!(sig.get("glcm.entropy"), Some(glcm.entropy));
        assert_eq!(sig.get("firstorder.count"), Some(64.0));
    }

    #[test]
    fn serialization_is_stable() {
        let (vol, mask) = fixture();
        let a = serde_json::to_string(&extract_radiomics_signature(&vol, &mask, 1).unwrap()).unwrap();
        let b = serde_json::to_string(&extract_radiomics_signature(&vol, &mask, 1).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("{\"firstorder.count\":64.0"));
    }

    #[test]
    fn missing_label() {
        let (vol, mask) = fixture();
        assert_eq!(extract_radiomics_signature(&vol, &mask, 9).unwrap_err(), Error::LabelNotFound(9));
    }
}
