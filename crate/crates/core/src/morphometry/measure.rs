use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::render::crop::{face_neighbors, offset};
use crate::volume::{checked_voxel, linear_index, round_half_up, voxel_of, Dims, Voxel};

use super::mask::MaskVolume;

/// A voxel together with its position in millimetres (`voxel * spacing`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalPoint {
    pub voxel: Voxel,
    pub mm: [f64; 3],
}

impl PhysicalPoint {
    pub fn new(voxel: Voxel, spacing: [f64; 3]) -> Self {
        PhysicalPoint {
            voxel,
            mm: [0, 1, 2].map(|a| voxel[a] as f64 * spacing[a]),
        }
    }
}

#[inline]
pub(crate) fn physical_distance(a: Voxel, b: Voxel, spacing: [f64; 3]) -> f64 {
    squared_distance(a, b, spacing).sqrt()
}

#[inline]
fn squared_distance(a: Voxel, b: Voxel, spacing: [f64; 3]) -> f64 {
    (0..3)
        .map(|x| ((b[x] as f64 - a[x] as f64) * spacing[x]).powi(2))
        .sum()
}

/// Centroid of `label`, rounded half-up per component.
pub fn find_organ_center(mask: &MaskVolume, label: u32) -> Result<PhysicalPoint> {
    let voxels = mask.require(label)?;
    let dims = mask.dims();
    let mut sum = [0f64; 3];
    for &idx in &voxels {
        let v = voxel_of(dims, idx);
        for a in 0..3 {
            sum[a] += v[a] as f64;
        }
    }
    let n = voxels.len() as f64;
    let center = [0, 1, 2].map(|a| round_half_up(sum[a] / n) as usize);
    Ok(PhysicalPoint::new(center, mask.spacing()))
}

pub fn measure_distance(p1: [i64; 3], p2: [i64; 3], spacing: [f64; 3], dims: Dims) -> Result<f64> {
    let a = checked_voxel(dims, p1)?;
    let b = checked_voxel(dims, p2)?;
    Ok(physical_distance(a, b, spacing))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diameter {
    pub mm: f64,
    pub endpoints: [Voxel; 2],
}

/// Label voxels with at least one 6-neighbour outside the label (or outside
/// the grid), in lexicographic (i, j, k) order.
pub fn surface_voxels(mask: &MaskVolume, label: u32) -> Vec<Voxel> {
    let dims = mask.dims();
    let labels = mask.labels();
    let mut out: Vec<Voxel> = mask
        .voxels_of(label)
        .into_iter()
        .map(|idx| voxel_of(dims, idx))
        .filter(|&v| {
            let inside = face_neighbors(dims, v).filter(|&n| labels[linear_index(dims, n)] == label).count();
            inside < 6
        })
        .collect();
    out.sort_unstable();
    out
}

/// Largest centre-to-centre distance between surface voxels of `label`.
/// Ties keep the lexicographically smallest endpoint pair.
pub fn measure_max_diameter(mask: &MaskVolume, label: u32) -> Result<Diameter> {
    mask.require(label)?;
    let spacing = mask.spacing();
    let surface = surface_voxels(mask, label);
    let mut best = (0.0, [surface[0], surface[0]]);
    for (n, &a) in surface.iter().enumerate() {
        for &b in &surface[n + 1..] {
            let d = squared_distance(a, b, spacing);
            if d > best.0 {
                best = (d, [a, b]);
            }
        }
    }
    Ok(Diameter { mm: best.0.sqrt(), endpoints: best.1 })
}

/// All 26 unit steps in a fixed order.
pub(crate) const STEPS26: [[i64; 3]; 26] = {
    let mut out = [[0i64; 3]; 26];
    let mut n = 0;
    let mut k = -1;
    while k <= 1 {
        let mut j = -1;
        while j <= 1 {
            let mut i = -1;
            while i <= 1 {
                if !(i == 0 && j == 0 && k == 0) {
                    out[n] = [i, j, k];
                    n += 1;
                }
                i += 1;
            }
            j += 1;
        }
        k += 1;
    }
    out
};

pub(crate) fn neighbors26(dims: Dims, v: Voxel) -> impl Iterator<Item = Voxel> {
    STEPS26.into_iter().filter_map(move |s| offset(dims, v, s))
}
