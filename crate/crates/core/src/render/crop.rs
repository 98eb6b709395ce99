use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{linear_index, voxel_of, Dims, Volume, Voxel};

pub const BODY_THRESHOLD_HU: f64 = -500.0;
pub const BODY_MARGIN: usize = 2;

/// Inclusive voxel box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Voxel,
    pub hi: Voxel,
}

impl BoundingBox {
    pub fn new(lo: Voxel, hi: Voxel, dims: Dims) -> Result<Self> {
        if (0..3).any(|a| lo[a] > hi[a]) {
            return Err(Error::InvalidBox(format!("lo {lo:?} exceeds hi {hi:?}")));
        }
        if (0..3).any(|a| hi[a] >= dims[a]) {
            return Err(Error::InvalidBox(format!("hi {hi:?} outside dims {dims:?}")));
        }
        Ok(BoundingBox { lo, hi })
    }

    pub fn contains(&self, v: Voxel) -> bool {
        (0..3).all(|a| self.lo[a] <= v[a] && v[a] <= self.hi[a])
    }

    pub fn voxel_count(&self) -> usize {
        (0..3).map(|a| self.hi[a] - self.lo[a] + 1).product()
    }

    /// Tight box around a non-empty set of voxels.
    pub fn enclosing(voxels: impl IntoIterator<Item = Voxel>) -> Option<Self> {
        voxels.into_iter().fold(None, |acc: Option<BoundingBox>, v| {
            Some(match acc {
                None => BoundingBox { lo: v, hi: v },
                Some(b) => BoundingBox {
                    lo: [b.lo[0].min(v[0]), b.lo[1].min(v[1]), b.lo[2].min(v[2])],
                    hi: [b.hi[0].max(v[0]), b.hi[1].max(v[1]), b.hi[2].max(v[2])],
                },
            })
        })
    }

    /// Linear indices of the voxels inside the box, ascending.
    pub fn linear_indices(&self, dims: Dims) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.voxel_count());
        for k in self.lo[2]..=self.hi[2] {
            for j in self.lo[1]..=self.hi[1] {
                for i in self.lo[0]..=self.hi[0] {
                    out.push(linear_index(dims, [i, j, k]));
                }
            }
        }
        out
    }
}

/// 6-neighbours of `v` that lie inside `dims`.
pub(crate) fn face_neighbors(dims: Dims, v: Voxel) -> impl Iterator<Item = Voxel> {
    const STEPS: [[i64; 3]; 6] = [[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0], [0, 0, -1], [0, 0, 1]];
    STEPS.into_iter().filter_map(move |s| offset(dims, v, s))
}

#[inline]
pub(crate) fn offset(dims: Dims, v: Voxel, s: [i64; 3]) -> Option<Voxel> {
    let mut out = [0; 3];
    for a in 0..3 {
        let c = v[a] as i64 + s[a];
        if c < 0 || c as usize >= dims[a] {
            return None;
        }
        out[a] = c as usize;
    }
    Some(out)
}

/// Labels the 6-connected components of `foreground`; returns
/// (component id per voxel or usize::MAX, sizes). Ids follow the linear scan
/// order of each component's first voxel.
pub(crate) fn components6(dims: Dims, foreground: &[bool]) -> (Vec<usize>, Vec<usize>) {
    let mut ids = vec![usize::MAX; foreground.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..foreground.len() {
        if !foreground[start] || ids[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        ids[start] = id;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            size += 1;
            for n in face_neighbors(dims, voxel_of(dims, idx)) {
                let ni = linear_index(dims, n);
                if foreground[ni] && ids[ni] == usize::MAX {
                    ids[ni] = id;
                    queue.push_back(ni);
                }
            }
        }
        sizes.push(size);
    }
    (ids, sizes)
}

/// Bounding box of the largest 6-connected component above
/// [`BODY_THRESHOLD_HU`], grown by [`BODY_MARGIN`] voxels and clipped.
/// Equal-sized components resolve to the one met first in scan order.
pub fn auto_crop_body(volume: &Volume) -> Result<BoundingBox> {
    let dims = volume.dims();
    let foreground: Vec<bool> = volume.voxels().iter().map(|&v| v > BODY_THRESHOLD_HU).collect();
    let (ids, sizes) = components6(dims, &foreground);
    let best = sizes
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, usize)>, (id, &size)| match best {
            Some((_, s)) if s >= size => best,
            _ => Some((id, size)),
        })
        .ok_or(Error::EmptyBody)?
        .0;
    let tight = BoundingBox::enclosing(
        ids.iter()
            .enumerate()
            .filter(|(_, &id)| id == best)
            .map(|(idx, _)| voxel_of(dims, idx)),
    )
    .expect("component is non-empty");
    Ok(BoundingBox {
        lo: [0, 1, 2].map(|a| tight.lo[a].saturating_sub(BODY_MARGIN)),
        hi: [0, 1, 2].map(|a| (tight.hi[a] + BODY_MARGIN).min(dims[a] - 1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_blocks(dims: Dims, blocks: &[(Voxel, usize)]) -> Volume {
        let mut data = vec![-1000.0; dims.iter().product()];
        for &(origin, size) in blocks {
            for k in 0..size {
                for j in 0..size {
                    for i in 0..size {
                        data[linear_index(dims, [origin[0] + i, origin[1] + j, origin[2] + k])] = 0.0;
                    }
                }
            }
        }
        Volume::new(dims, [1.0; 3], data).unwrap()
    }

    #[test]
    fn single_block_with_margin() {
        let vol = with_blocks([32, 32, 32], &[([5, 5, 5], 10)]);
        let b = auto_crop_body(&vol).unwrap();
        assert_eq!(b, BoundingBox { lo: [3, 3, 3], hi: [16, 16, 16] });
    }

    #[test]
    fn air_only_is_empty_body() {
        let vol = Volume::new([4, 4, 4], [1.0; 3], vec![-1000.0; 64]).unwrap();
        assert_eq!(auto_crop_body(&vol).unwrap_err(), Error::EmptyBody);
    }

    #[test]
    fn largest_component_wins() {
        let vol = with_blocks([32, 32, 32], &[([20, 20, 20], 3), ([2, 2, 2], 10)]);
        let b = auto_crop_body(&vol).unwrap();
        assert_eq!(b, BoundingBox { lo: [0, 0, 0], hi: [13, 13, 13] });
    }

    #[test]
    fn margin_is_clipped_to_volume() {
        let vol = with_blocks([8, 8, 8], &[([6, 6, 6], 2)]);
        assert_eq!(auto_crop_body(&vol).unwrap(), BoundingBox { lo: [4, 4, 4], hi: [7, 7, 7] });
    }

    #[test]
    fn diagonal_contact_is_not_connected() {
        // two voxels touching at a corner form two components of size 1
        let dims = [3, 3, 3];
        let mut fg = vec![false; 27];
        fg[linear_index(dims, [0, 0, 0])] = true;
        fg[linear_index(dims, [1, 1, 1])] = true;
        let (_, sizes) = components6(dims, &fg);
        assert_eq!(sizes, vec![1, 1]);
    }

    #[test]
    fn box_validation() {
        assert!(BoundingBox::new([0, 0, 0], [3, 3, 3], [4, 4, 4]).is_ok());
        assert!(BoundingBox::new([2, 0, 0], [1, 3, 3], [4, 4, 4]).is_err());
        assert!(BoundingBox::new([0, 0, 0], [4, 3, 3], [4, 4, 4]).is_err());
        assert_eq!(BoundingBox { lo: [1, 1, 1], hi: [2, 3, 1] }.voxel_count(), 6);
    }
}
