use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::volume::{nifti, Dims, Volume};

use super::vocab::Vocabulary;

/// Relative tolerance when comparing mask and volume spacing.
const SPACING_RTOL: f64 = 1e-4;

/// Integer anatomy labels registered to a [`Volume`]. Label 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskVolume {
    dims: Dims,
    spacing: [u64; 3],
    labels: Vec<u32>,
    label_names: BTreeMap<u32, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelInfo {
    pub label: u32,
    pub name: String,
    pub voxel_count: usize,
}

impl MaskVolume {
    /// Builds a mask; labels present without a name get `label_<n>`.
    pub fn new(dims: Dims, spacing: [f64; 3], labels: Vec<u32>, mut names: BTreeMap<u32, String>) -> Self {
        assert_eq!(labels.len(), dims.iter().product::<usize>());
        let mut present: Vec<u32> = labels.iter().copied().filter(|&l| l != 0).collect();
        present.sort_unstable();
        present.dedup();
        for l in present {
            names.entry(l).or_insert_with(|| format!("label_{l}"));
        }
        MaskVolume {
            dims,
            spacing: spacing.map(f64::to_bits),
            labels,
            label_names: names,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing.map(f64::from_bits)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_names(&self) -> &BTreeMap<u32, String> {
        &self.label_names
    }

    pub fn name_of(&self, label: u32) -> Option<&str> {
        self.label_names.get(&label).map(String::as_str)
    }

    /// Looks a label up by name, case-insensitively.
    pub fn label_by_name(&self, name: &str) -> Option<u32> {
        let lower = name.to_lowercase();
        self.label_names
            .iter()
            .find(|(_, n)| n.to_lowercase() == lower)
            .map(|(&l, _)| l)
    }

    /// Linear indices holding `label`, ascending.
    pub fn voxels_of(&self, label: u32) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// Like [`voxels_of`](Self::voxels_of) but fails on an absent label.
    pub fn require(&self, label: u32) -> Result<Vec<usize>> {
        let v = if label == 0 { Vec::new() } else { self.voxels_of(label) };
        if v.is_empty() {
            Err(Error::LabelNotFound(label))
        } else {
            Ok(v)
        }
    }

    pub fn indicator(&self, label: u32) -> Vec<bool> {
        self.labels.iter().map(|&l| l == label).collect()
    }

    pub fn voxel_volume_mm3(&self) -> f64 {
        self.spacing().iter().product()
    }

    /// Copy with the voxels of `label` replaced by `indicator`. Voxels
    /// leaving the label become background.
    pub fn with_label(&self, label: u32, indicator: &[bool]) -> MaskVolume {
        let mut out = self.clone();
        for (l, &on) in out.labels.iter_mut().zip(indicator) {
            if on {
                *l = label;
            } else if *l == label {
                *l = 0;
            }
        }
        out
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for d in self.dims {
            h.update((d as u64).to_le_bytes());
        }
        for s in self.spacing {
            h.update(s.to_le_bytes());
        }
        for l in &self.labels {
            h.update(l.to_le_bytes());
        }
        for (l, n) in &self.label_names {
            h.update(l.to_le_bytes());
            h.update(n.as_bytes());
            h.update([0]);
        }
        hex::encode(h.finalize())
    }
}

/// Parses an integer NIfTI mask and registers it to `volume`.
///
/// Names come from `sidecar` first, then `vocabulary` by id.
pub fn load_mask(
    bytes: &[u8],
    volume: &Volume,
    vocabulary: &Vocabulary,
    sidecar: Option<&Vocabulary>,
) -> Result<MaskVolume> {
    let raw = nifti::read(bytes)?;
    if !raw.header.datatype.is_integer() {
        return Err(Error::UnsupportedDatatype(raw.header.datatype.code()));
    }
    if raw.header.dims != volume.dims() {
        return Err(Error::GeometryMismatch(format!(
            "mask dims {:?} vs volume dims {:?}",
            raw.header.dims,
            volume.dims()
        )));
    }
    for a in 0..3 {
        let (m, v) = (raw.header.spacing[a], volume.spacing()[a]);
        if (m - v).abs() > SPACING_RTOL * v.max(m) {
            return Err(Error::GeometryMismatch(format!(
                "mask spacing {:?} vs volume spacing {:?}",
                raw.header.spacing,
                volume.spacing()
            )));
        }
    }
    let labels = raw
        .scaled()?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(Error::InvalidLabelValue(v))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut names = BTreeMap::new();
    for &l in &labels {
        if l == 0 || names.contains_key(&l) {
            continue;
        }
        let name = sidecar
            .and_then(|s| s.get(l))
            .or_else(|| vocabulary.get(l))
            .map(|e| e.name.clone());
        if let Some(n) = name {
            names.insert(l, n);
        }
    }
    Ok(MaskVolume::new(volume.dims(), volume.spacing(), labels, names))
}

/// One entry per nonzero label, ascending, with exact counts.
pub fn inspect_mask_labels(mask: &MaskVolume) -> Vec<LabelInfo> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &l in mask.labels() {
        if l != 0 {
            *counts.entry(l).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|(label, voxel_count)| LabelInfo {
            label,
            name: mask.name_of(label).unwrap_or_default().to_string(),
            voxel_count,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::nifti::{Datatype, Writer};

    fn ct(dims: Dims) -> Volume {
        Volume::new(dims, [1.0; 3], vec![0.0; dims.iter().product()]).unwrap()
    }

    #[test]
    fn sidecar_names_label() {
        let vol = ct([3, 3, 3]);
        let mut raw = vec![0.0; 27];
        raw[4] = 1.0;
        let bytes = Writer::new(Datatype::Uint8).encode([3, 3, 3], [1.0; 3], &raw);
        let sidecar = Vocabulary::parse("1\tlesion\n").unwrap();
        let mask = load_mask(&bytes, &vol, &Vocabulary::default(), Some(&sidecar)).unwrap();
        let info = inspect_mask_labels(&mask);
        assert_eq!(info, vec![LabelInfo { label: 1, name: "lesion".into(), voxel_count: 1 }]);
    }

    #[test]
    fn unnamed_labels_get_placeholder() {
        let vol = ct([2, 2, 1]);
        let bytes = Writer::new(Datatype::Int16).encode([2, 2, 1], [1.0; 3], &[0.0, 77.0, 77.0, 0.0]);
        let mask = load_mask(&bytes, &vol, &Vocabulary::default(), None).unwrap();
        assert_eq!(mask.name_of(77), Some("label_77"));
    }

    #[test]
    fn dims_mismatch() {
        let vol = ct([3, 3, 3]);
        let bytes = Writer::new(Datatype::Uint8).encode([3, 3, 2], [1.0; 3], &[0.0; 18]);
        let err = load_mask(&bytes, &vol, &Vocabulary::default(), None).unwrap_err();
        assert!(matches!(err, Error::GeometryMismatch(_)));
    }

    #[test]
    fn float_mask_rejected() {
        let vol = ct([2, 1, 1]);
        let bytes = Writer::new(Datatype::Float32).encode([2, 1, 1], [1.0; 3], &[0.0, 1.0]);
        let err = load_mask(&bytes, &vol, &Vocabulary::default(), None).unwrap_err();
        assert_eq!(err, Error::UnsupportedDatatype(16));
    }

    #[test]
    fn negative_label_rejected() {
        let vol = ct([2, 1, 1]);
        let bytes = Writer::new(Datatype::Int16).encode([2, 1, 1], [1.0; 3], &[0.0, -1.0]);
        let err = load_mask(&bytes, &vol, &Vocabulary::default(), None).unwrap_err();
        assert_eq!(err, Error::InvalidLabelValue(-1.0));
    }

    #[test]
    fn empty_mask_loads() {
        let vol = ct([2, 2, 2]);
        let bytes = Writer::new(Datatype::Uint8).encode([2, 2, 2], [1.0; 3], &[0.0; 8]);
        let mask = load_mask(&bytes, &vol, &Vocabulary::builtin(), None).unwrap();
        assert!(inspect_mask_labels(&mask).is_empty());
    }

    #[test]
    fn counts_sorted_by_label() {
        let mut labels = vec![0u32; 30];
        labels[..9].fill(2);
        labels[20..25].fill(1);
        let mask = MaskVolume::new([30, 1, 1], [1.0; 3], labels, BTreeMap::new());
        let info = inspect_mask_labels(&mask);
        assert_eq!(info.iter().map(|i| (i.label, i.voxel_count)).collect::<Vec<_>>(), [(1, 5), (2, 9)]);
    }

    #[test]
    fn seven_voxels_of_label_three() {
        let mut labels = vec![0u32; 27];
        for idx in [0, 3, 5, 8, 13, 21, 26] {
            labels[idx] = 3;
        }
        let mask = MaskVolume::new([3, 3, 3], [1.0; 3], labels, BTreeMap::new());
        assert_eq!(inspect_mask_labels(&mask)[0].voxel_count, 7);
    }
}
