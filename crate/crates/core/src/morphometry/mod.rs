//! Masks, anatomy lookup and physical measurements.

mod centerline;
pub mod edt;
mod edit;
mod mask;
mod measure;
mod vocab;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use centerline::{extract_vessel_centerline, step_costs};
pub use edit::{edit_geometry, MorphOp};
pub use mask::{inspect_mask_labels, load_mask, LabelInfo, MaskVolume};
pub use measure::{
    find_organ_center, measure_distance, measure_max_diameter, surface_voxels, Diameter, PhysicalPoint,
};
pub use vocab::{
    closest_names, rank_term, search_anatomy_names, AnatomyEntry, AnatomyMatch, Vocabulary, MAX_RESULTS,
};

/// Outcome of resolving one requested structure against the loaded mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum AnatomySummary {
    Found {
        query: String,
        label: u32,
        name: String,
        voxel_count: usize,
        volume_mm3: f64,
        centroid: PhysicalPoint,
    },
    Missing {
        query: String,
    },
}

/// Search candidates for the labels present in `mask`, carrying synonyms
/// from `vocabulary` for entries whose id and name both agree.
pub fn mask_anatomy_entries(mask: &MaskVolume, vocabulary: &Vocabulary) -> Vec<AnatomyEntry> {
    inspect_mask_labels(mask)
        .into_iter()
        .map(|info| {
            let synonyms = vocabulary
                .get(info.label)
                .filter(|e| e.name.eq_ignore_ascii_case(&info.name))
                .map(|e| e.synonyms.clone())
                .unwrap_or_default();
            AnatomyEntry { id: info.label, name: info.name, synonyms }
        })
        .collect()
}

/// Mask-backed stand-in for whole-body segmentation: resolves each requested
/// name to a loaded label and summarises it.
pub fn segment_total_anatomy(
    mask: Option<&MaskVolume>,
    names: &[String],
    vocabulary: &Vocabulary,
) -> Result<Vec<AnatomySummary>> {
    let mask = mask.ok_or(Error::MaskRequired)?;
    let entries = mask_anatomy_entries(mask, vocabulary);
    names
        .iter()
        .map(|query| {
            let hit = match search_anatomy_names(query, &entries) {
                Ok(m) => m.into_iter().next(),
                Err(Error::EmptyQuery) => None,
                Err(e) => return Err(e),
            };
            let Some(hit) = hit else {
                return Ok(AnatomySummary::Missing { query: query.clone() });
            };
            let voxel_count = mask.voxels_of(hit.id).len();
            Ok(AnatomySummary::Found {
                query: query.clone(),
                label: hit.id,
                name: hit.name,
                voxel_count,
                volume_mm3: voxel_count as f64 * mask.voxel_volume_mm3(),
                centroid: find_organ_center(mask, hit.id)?,
            })
        })
        .collect()
}
