use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::morphometry::MaskVolume;
use crate::render::BoundingBox;
use crate::volume::voxel_of;

use super::marching_cubes::surface_area;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub volume_mm3: f64,
    pub surface_area_mm2: f64,
    pub sphericity: f64,
    pub elongation: f64,
    pub flatness: f64,
    pub bounding_box: BoundingBox,
}

/// Principal-axis eigenvalues (descending, clamped at 0) of the population
/// covariance of voxel-centre coordinates in mm.
pub fn principal_moments(points: &[[f64; 3]]) -> [f64; 3] {
    let n = points.len() as f64;
    let mut mean = [0.0; 3];
    for p in points {
        for a in 0..3 {
            mean[a] += p[a] / n;
        }
    }
    let mut cov = Matrix3::<f64>::zeros();
    for p in points {
        for r in 0..3 {
            for c in 0..3 {
                cov[(r, c)] += (p[r] - mean[r]) * (p[c] - mean[c]) / n;
            }
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(cov).eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    [ev[0], ev[1], ev[2]]
}

/// Shape descriptors of one label. Volume counts voxels while area comes
/// from the iso-surface, so labels of a few voxels score sphericity above 1.
pub fn analyze_shape_properties(mask: &MaskVolume, label: u32) -> Result<ShapeReport> {
    let voxels = mask.require(label)?;
    let dims = mask.dims();
    let spacing = mask.spacing();
    let coords: Vec<_> = voxels.iter().map(|&i| voxel_of(dims, i)).collect();
    let bounding_box = BoundingBox::enclosing(coords.iter().copied()).expect("label is non-empty");

    let volume_mm3 = voxels.len() as f64 * mask.voxel_volume_mm3();
    let inside = mask.indicator(label);
    let surface_area_mm2 = surface_area(dims, spacing, &inside, bounding_box.lo, bounding_box.hi);
    let sphericity =
        std::f64::consts::PI.cbrt() * (6.0 * volume_mm3).powf(2.0 / 3.0) / surface_area_mm2;

    let mm: Vec<[f64; 3]> = coords
        .iter()
        .map(|v| [0, 1, 2].map(|a| v[a] as f64 * spacing[a]))
        .collect();
    let [l1, l2, l3] = principal_moments(&mm);
    // a single voxel has no preferred axis
    let (elongation, flatness) = if l1 > 0.0 { ((l2 / l1).sqrt(), (l3 / l1).sqrt()) } else { (1.0, 1.0) };

    Ok(ShapeReport {
        volume_mm3,
        surface_area_mm2,
        sphericity,
        elongation,
        flatness,
        bounding_box,
    })
}
