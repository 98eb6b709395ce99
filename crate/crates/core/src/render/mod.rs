//! Visual observations: slices, projections, montages, MPR composites and
//! body cropping.
//!
//! Planes are laid out without flipping. The axial plane at `k` has width
//! `dims[0]` (i) and height `dims[1]` (j); coronal at `j` is (i, k); sagittal
//! at `i` is (j, k).

pub(crate) mod crop;
pub mod png;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Dims, Volume, Voxel, Window};

pub use crop::{auto_crop_body, BoundingBox, BODY_MARGIN, BODY_THRESHOLD_HU};
pub use png::encode_png;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Axial,
    Coronal,
    Sagittal,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Axial, Axis::Coronal, Axis::Sagittal];

    /// Index of the volume dimension this axis walks through.
    pub fn dim(self) -> usize {
        match self {
            Axis::Sagittal => 0,
            Axis::Coronal => 1,
            Axis::Axial => 2,
        }
    }

    /// Volume dimensions mapped to image (x, y).
    fn plane_dims(self) -> (usize, usize) {
        match self {
            Axis::Axial => (0, 1),
            Axis::Coronal => (0, 2),
            Axis::Sagittal => (1, 2),
        }
    }

    pub fn plane_size(self, dims: Dims) -> (usize, usize) {
        let (x, y) = self.plane_dims();
        (dims[x], dims[y])
    }

    /// Voxel under image pixel (x, y) of the plane at `index`.
    #[inline]
    pub fn voxel(self, x: usize, y: usize, index: usize) -> Voxel {
        let mut v = [0; 3];
        let (dx, dy) = self.plane_dims();
        v[dx] = x;
        v[dy] = y;
        v[self.dim()] = index;
        v
    }

    /// In-plane coordinates of `v` when viewed along this axis.
    pub fn project_point(self, v: Voxel) -> (usize, usize) {
        let (dx, dy) = self.plane_dims();
        (v[dx], v[dy])
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::Axial => "axial",
            Axis::Coronal => "coronal",
            Axis::Sagittal => "sagittal",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "axial" => Ok(Axis::Axial),
            "coronal" => Ok(Axis::Coronal),
            "sagittal" => Ok(Axis::Sagittal),
            other => Err(format!("unknown axis {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionMode {
    Max,
    Min,
    Avg,
}

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image2D {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Image2D {
    pub fn new(width: usize, height: usize) -> Self {
        Image2D { width, height, pixels: vec![0; width * height] }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    /// Copies `src` with its top-left corner at (x0, y0).
    fn blit(&mut self, src: &Image2D, x0: usize, y0: usize) {
        for y in 0..src.height {
            let dst = (y0 + y) * self.width + x0;
            self.pixels[dst..dst + src.width]
                .copy_from_slice(&src.pixels[y * src.width..(y + 1) * src.width]);
        }
    }
}

/// Raw HU values of the plane at `index`, row-major in image order.
pub fn slice_values(volume: &Volume, axis: Axis, index: usize) -> Result<(usize, usize, Vec<f64>)> {
    let dims = volume.dims();
    let len = dims[axis.dim()];
    if index >= len {
        return Err(Error::SliceOutOfRange { index, len });
    }
    let (w, h) = axis.plane_size(dims);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            out.push(volume.get(axis.voxel(x, y, index)));
        }
    }
    Ok((w, h, out))
}

pub fn extract_slice(volume: &Volume, axis: Axis, index: usize, window: Window) -> Result<Image2D> {
    let (width, height, values) = slice_values(volume, axis, index)?;
    Ok(Image2D {
        width,
        height,
        pixels: values.into_iter().map(|v| window.map(v)).collect(),
    })
}

/// Per-pixel reduction along `axis`, before windowing.
pub fn projection_values(volume: &Volume, axis: Axis, mode: ProjectionMode) -> (usize, usize, Vec<f64>) {
    let dims = volume.dims();
    let (w, h) = axis.plane_size(dims);
    let depth = dims[axis.dim()];
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let samples = (0..depth).map(|d| volume.get(axis.voxel(x, y, d)));
            let v = match mode {
                ProjectionMode::Max => samples.fold(f64::NEG_INFINITY, f64::max),
                ProjectionMode::Min => samples.fold(f64::INFINITY, f64::min),
                ProjectionMode::Avg => samples.sum::<f64>() / depth as f64,
            };
            out.push(v);
        }
    }
    (w, h, out)
}

pub fn project(volume: &Volume, axis: Axis, mode: ProjectionMode, window: Window) -> Image2D {
    let (width, height, values) = projection_values(volume, axis, mode);
    Image2D {
        width,
        height,
        pixels: values.into_iter().map(|v| window.map(v)).collect(),
    }
}

/// Slice indices shown by a `rows x cols` montage over an axis of length `n`.
pub fn montage_indices(n: usize, tiles: usize) -> Vec<usize> {
    if tiles == 1 {
        return vec![(n - 1) / 2];
    }
    (0..tiles).map(|t| t * (n - 1) / (tiles - 1)).collect()
}

pub fn montage(volume: &Volume, axis: Axis, rows: usize, cols: usize, window: Window) -> Result<Image2D> {
    let tiles = rows.checked_mul(cols).filter(|&t| t >= 1).ok_or(Error::InvalidLayout)?;
    let (w, h) = axis.plane_size(volume.dims());
    let mut out = Image2D::new(cols * w + (cols - 1), rows * h + (rows - 1));
    for (t, index) in montage_indices(volume.dims()[axis.dim()], tiles).into_iter().enumerate() {
        let tile = extract_slice(volume, axis, index, window)?;
        out.blit(&tile, (t % cols) * (w + 1), (t / cols) * (h + 1));
    }
    Ok(out)
}

/// Half-length of the crosshair arms in pixels.
pub const CROSSHAIR_ARM: usize = 3;

fn draw_crosshair(img: &mut Image2D, cx: usize, cy: usize) {
    for x in cx.saturating_sub(CROSSHAIR_ARM)..=(cx + CROSSHAIR_ARM).min(img.width - 1) {
        img.set(x, cy, 255);
    }
    for y in cy.saturating_sub(CROSSHAIR_ARM)..=(cy + CROSSHAIR_ARM).min(img.height - 1) {
        img.set(cx, y, 255);
    }
}

/// Axial, coronal and sagittal planes through `point`, left to right,
/// separated by one black column and bottom-padded to a common height.
pub fn ortho_views(volume: &Volume, point: [i64; 3], window: Window) -> Result<Image2D> {
    let p = crate::volume::checked_voxel(volume.dims(), point)?;
    let mut panels = Vec::with_capacity(3);
    for axis in Axis::ALL {
        let mut img = extract_slice(volume, axis, p[axis.dim()], window)?;
        let (cx, cy) = axis.project_point(p);
        draw_crosshair(&mut img, cx, cy);
        panels.push(img);
    }
    let width = panels.iter().map(|p| p.width).sum::<usize>() + panels.len() - 1;
    let height = panels.iter().map(|p| p.height).max().unwrap_or(0);
    let mut out = Image2D::new(width, height);
    let mut x0 = 0;
    for panel in &panels {
        out.blit(panel, x0, 0);
        x0 += panel.width + 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(dims: Dims) -> Volume {
        let n = dims.iter().product::<usize>();
        Volume::new(dims, [1.0; 3], (0..n).map(|v| v as f64).collect()).unwrap()
    }

    #[test]
    fn axial_slice_indexes_directly() {
        let vol = ramp([4, 4, 2]);
        let win = Window::new(15.5, 32.0).unwrap();
        let img = extract_slice(&vol, Axis::Axial, 1, win).unwrap();
        assert_eq!((img.width, img.height), (4, 4));
        for j in 0..4 {
            for i in 0..4 {
                assert_eq!(img.get(i, j), win.map(vol.get([i, j, 1])));
            }
        }
    }

    #[test]
    fn slice_out_of_range() {
        let vol = ramp([4, 4, 2]);
        let err = extract_slice(&vol, Axis::Axial, 2, Window::new(0.0, 1.0).unwrap()).unwrap_err();
        assert_eq!(err, Error::SliceOutOfRange { index: 2, len: 2 });
    }

    #[test]
    fn constant_volume_constant_slice() {
        let vol = Volume::new([5, 6, 7], [1.0; 3], vec![-1000.0; 210]).unwrap();
        for axis in Axis::ALL {
            let img = extract_slice(&vol, axis, 0, crate::volume::preset("lung").unwrap()).unwrap();
            assert!(img.pixels.iter().all(|&p| p == img.pixels[0]));
        }
    }

    #[test]
    fn hot_voxel_projections() {
        let mut data = vec![-1000.0; 64];
        data[crate::volume::linear_index([4, 4, 4], [1, 2, 3])] = 100.0;
        let vol = Volume::new([4, 4, 4], [1.0; 3], data).unwrap();
        let win = crate::volume::preset("soft_tissue").unwrap();
        let mip = project(&vol, Axis::Axial, ProjectionMode::Max, win);
        assert_eq!(mip.get(1, 2), win.map(100.0));
        assert_eq!(mip.get(0, 0), win.map(-1000.0));
        let minip = project(&vol, Axis::Axial, ProjectionMode::Min, win);
        assert!(minip.pixels.iter().all(|&p| p == win.map(-1000.0)));
    }

    #[test]
    fn montage_sampling() {
        assert_eq!(montage_indices(5, 4), vec![0, 1, 2, 4]);
        assert_eq!(montage_indices(7, 1), vec![3]);
        assert_eq!(montage_indices(8, 1), vec![3]);
        assert_eq!(montage_indices(3, 5), vec![0, 0, 1, 1, 2]);
    }

    #[test]
    fn single_tile_montage_is_middle_slice() {
        let vol = ramp([3, 4, 6]);
        let win = Window::new(36.0, 72.0).unwrap();
        let m = montage(&vol, Axis::Axial, 1, 1, win).unwrap();
        assert_eq!(m, extract_slice(&vol, Axis::Axial, 2, win).unwrap());
    }

    #[test]
    fn montage_layout() {
        let vol = ramp([3, 4, 5]);
        let win = Window::new(30.0, 60.0).unwrap();
        let m = montage(&vol, Axis::Axial, 2, 3, win).unwrap();
        assert_eq!(m.width, 3 * 3 + 2);
        assert_eq!(m.height, 2 * 4 + 1);
        // border column between first and second tile
        assert!((0..m.height).all(|y| m.get(3, y) == 0));
        assert_eq!(montage(&vol, Axis::Axial, 0, 3, win).unwrap_err(), Error::InvalidLayout);
    }

    #[test]
    fn ortho_layout_and_crosshair() {
        let vol = Volume::new([6, 5, 4], [1.0; 3], vec![-1000.0; 120]).unwrap();
        let win = crate::volume::preset("lung").unwrap();
        let img = ortho_views(&vol, [2, 3, 1], win).unwrap();
        // axial 6x5, coronal 6x4, sagittal 5x4
        assert_eq!(img.width, 6 + 6 + 5 + 2);
        assert_eq!(img.height, 5);
        assert_eq!(img.get(2, 3), 255);
        assert_eq!(img.get(7 + 2, 1), 255);
        assert_eq!(img.get(14 + 3, 1), 255);
        assert_eq!(
            ortho_views(&vol, [6, 0, 0], win).unwrap_err(),
            Error::PointOutOfRange { point: [6, 0, 0], dims: [6, 5, 4] }
        );
    }

    #[test]
    fn ortho_at_origin_uses_first_slices() {
        let vol = ramp([3, 3, 3]);
        let win = Window::new(13.0, 26.0).unwrap();
        let img = ortho_views(&vol, [0, 0, 0], win).unwrap();
        let axial = extract_slice(&vol, Axis::Axial, 0, win).unwrap();
        // away from the crosshair arms the panel matches the plain slice
        assert_eq!(img.get(2, 2), axial.get(2, 2));
    }
}
