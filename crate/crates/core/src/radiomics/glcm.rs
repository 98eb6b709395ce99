//! Gray-level co-occurrence texture over a 3D region.
//!
//! Values are quantised into equal-width bins over the region's own
//! [min, max]. Pairs are counted symmetrically along the 13 unique unit
//! offsets of the 26-neighbourhood, only when both voxels are in the region.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::render::crop::offset;
use crate::volume::{linear_index, voxel_of, Dims};

use super::firstorder::bin_of;

pub const DEFAULT_BINS: usize = 32;

/// The 13 offsets whose first nonzero component, scanning k, j, i, is positive.
pub const DIRECTIONS: [[i64; 3]; 13] = [
    [1, 0, 0],
    [-1, 1, 0],
    [0, 1, 0],
    [1, 1, 0],
    [-1, -1, 1],
    [0, -1, 1],
    [1, -1, 1],
    [-1, 0, 1],
    [0, 0, 1],
    [1, 0, 1],
    [-1, 1, 1],
    [0, 1, 1],
    [1, 1, 1],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlcmFeatures {
    pub bins: usize,
    pub contrast: f64,
    pub energy: f64,
    pub homogeneity: f64,
    pub correlation: f64,
    pub entropy: f64,
}

/// Symmetric pair counts, `bins x bins` row-major.
pub fn cooccurrence(dims: Dims, values: &[f64], roi: &[usize], bins: usize) -> Vec<u64> {
    let (min, max) = roi
        .iter()
        .map(|&i| values[i])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let mut level = vec![usize::MAX; values.len()];
    for &i in roi {
        level[i] = bin_of(values[i], min, max, bins);
    }
    let mut counts = vec![0u64; bins * bins];
    for &i in roi {
        let v = voxel_of(dims, i);
        for d in DIRECTIONS {
            let Some(n) = offset(dims, v, d) else { continue };
            let (a, b) = (level[i], level[linear_index(dims, n)]);
            if b == usize::MAX {
                continue;
            }
            counts[a * bins + b] += 1;
            counts[b * bins + a] += 1;
        }
    }
    counts
}

/// Normalised co-occurrence matrix; `None` when no pair exists.
pub fn probability_matrix(counts: &[u64]) -> Option<Vec<f64>> {
    let total: u64 = counts.iter().sum();
    (total > 0).then(|| counts.iter().map(|&c| c as f64 / total as f64).collect())
}

pub fn features(p: &[f64], bins: usize) -> GlcmFeatures {
    let mut out = GlcmFeatures { bins, contrast: 0.0, energy: 0.0, homogeneity: 0.0, correlation: 0.0, entropy: 0.0 };
    let (mut mu_i, mut mu_j) = (0.0, 0.0);
    for i in 0..bins {
        for j in 0..bins {
            let pij = p[i * bins + j];
            mu_i += i as f64 * pij;
            mu_j += j as f64 * pij;
        }
    }
    let (mut var_i, mut var_j, mut cov) = (0.0, 0.0, 0.0);
    for i in 0..bins {
        for j in 0..bins {
            let pij = p[i * bins + j];
            if pij == 0.0 {
                continue;
            }
            let (di, dj) = (i as f64 - mu_i, j as f64 - mu_j);
            let diff = i.abs_diff(j) as f64;
            out.contrast += pij * diff * diff;
            out.energy += pij * pij;
            out.homogeneity += pij / (1.0 + diff);
            out.entropy -= pij * pij.log2();
            var_i += pij * di * di;
            var_j += pij * dj * dj;
            cov += pij * di * dj;
        }
    }
    let denom = (var_i * var_j).sqrt();
    out.correlation = if denom == 0.0 { 1.0 } else { cov / denom };
    // -0.0 from a single-cell matrix
    out.entropy = out.entropy.max(0.0);
    out
}

/// GLCM features of the voxels `roi` (linear indices into `values`).
///
/// A region with no adjacent pair is scored as a single-cell matrix.
pub fn analyze_texture(dims: Dims, values: &[f64], roi: &[usize], bins: usize) -> Result<GlcmFeatures> {
    if bins < 2 {
        return Err(Error::InvalidBins(bins));
    }
    if roi.len() < 2 {
        return Err(Error::EmptyRoi);
    }
    Ok(region_features(dims, values, roi, bins))
}

/// Unchecked core of [`analyze_texture`]; also scores regions of one voxel.
pub(crate) fn region_features(dims: Dims, values: &[f64], roi: &[usize], bins: usize) -> GlcmFeatures {
    let counts = cooccurrence(dims, values, roi, bins);
    let p = probability_matrix(&counts).unwrap_or_else(|| {
        let mut single = vec![0.0; bins * bins];
        single[0] = 1.0;
        single
    });
    features(&p, bins)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_half_of_26() {
        let mut all: Vec<[i64; 3]> = DIRECTIONS.to_vec();
        all.extend(DIRECTIONS.iter().map(|d| d.map(|c| -c)));
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 26);
    }

    #[test]
    fn constant_region_is_degenerate() {
        let values = vec![42.0; 27];
        let roi: Vec<usize> = (0..27).collect();
        let f = analyze_texture([3, 3, 3], &values, &roi, 32).unwrap();
        assert_eq!((f.energy, f.contrast, f.homogeneity, f.entropy, f.correlation), (1.0, 0.0, 1.0, 0.0, 1.0));
    }

    #[test]
    fn two_voxel_pair() {
        let values = vec![0.0, 100.0];
        let f = analyze_texture([2, 1, 1], &values, &[0, 1], 2).unwrap();
        assert_eq!(f.contrast, 1.0);
        assert_eq!(f.energy, 0.5);
        assert_eq!(f.homogeneity, 0.5);
        assert_eq!(f.entropy, 1.0);
        assert_eq!(f.correlation, -1.0);
        let counts = cooccurrence([2, 1, 1], &values, &[0, 1], 2);
        assert_eq!(counts, vec![0, 1, 1, 0]);
    }

    #[test]
    fn argument_errors() {
        assert_eq!(analyze_texture([2, 1, 1], &[0.0, 1.0], &[0, 1], 1).unwrap_err(), Error::InvalidBins(1));
        assert_eq!(analyze_texture([2, 1, 1], &[0.0, 1.0], &[0], 8).unwrap_err(), Error::EmptyRoi);
    }

    #[test]
    fn isolated_voxels_score_as_single_cell() {
        let f = analyze_texture([3, 1, 1], &[1.0, 0.0, 5.0], &[0, 2], 4).unwrap();
        assert_eq!((f.energy, f.correlation), (1.0, 1.0));
    }
}
