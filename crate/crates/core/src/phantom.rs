//! Synthetic chest phantom with a matching label mask.
//!
//! Geometry is analytic in voxel units; HU values carry seeded integer noise
//! so the volume round-trips exactly through int16 storage.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::morphometry::MaskVolume;
use crate::volume::nifti::{Datatype, Writer};
use crate::volume::{linear_index, Dims, Voxel, Volume};

pub const AIR_HU: f64 = -1000.0;
pub const TISSUE_HU: f64 = 40.0;
pub const LUNG_HU: f64 = -850.0;
pub const LIVER_HU: f64 = 60.0;
pub const AORTA_HU: f64 = 200.0;
pub const BONE_HU: f64 = 700.0;
pub const LESION_HU: f64 = 30.0;

pub const LESION: u32 = 1;
pub const LIVER: u32 = 6;
pub const AORTA: u32 = 25;
pub const VERTEBRAE: u32 = 31;
pub const LUNG: u32 = 34;
pub const BODY: u32 = 35;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhantomSpec {
    pub dims: Dims,
    pub spacing: [f64; 3],
    pub seed: u64,
    /// Peak amplitude of the uniform integer noise, in HU.
    pub noise: i32,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self { dims: [64, 64, 32], spacing: [1.0, 1.0, 2.0], seed: 0, noise: 10 }
    }
}

#[derive(Debug, Clone)]
pub struct Phantom {
    pub volume: Volume,
    pub mask: MaskVolume,
    pub lesion_center: Voxel,
    pub lesion_radius: f64,
}

fn ellipsoid(v: Voxel, c: [f64; 3], r: [f64; 3]) -> bool {
    (0..3).map(|a| ((v[a] as f64 - c[a]) / r[a]).powi(2)).sum::<f64>() <= 1.0
}

fn disc(v: Voxel, cx: f64, cy: f64, r: f64) -> bool {
    (v[0] as f64 - cx).powi(2) + (v[1] as f64 - cy).powi(2) <= r * r
}

/// Label names of the phantom mask, matching the builtin vocabulary ids.
pub fn label_names() -> BTreeMap<u32, String> {
    [(LESION, "lesion"), (LIVER, "liver"), (AORTA, "aorta"), (VERTEBRAE, "vertebrae"), (LUNG, "lung"), (BODY, "body")]
        .into_iter()
        .map(|(l, n)| (l, n.to_string()))
        .collect()
}

pub fn generate(spec: &PhantomSpec) -> Phantom {
    let dims = spec.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let [nx, ny, nz] = dims.map(|d| d as f64);
    let (cx, cy, cz) = ((nx - 1.0) / 2.0, (ny - 1.0) / 2.0, (nz - 1.0) / 2.0);

    let lung_r = [0.13 * nx, 0.22 * ny, 0.4 * nz];
    let lung_right = [cx - 0.2 * nx, cy - 0.02 * ny, cz];
    let lung_left = [cx + 0.2 * nx, cy - 0.02 * ny, cz];
    let jitter = |rng: &mut ChaCha8Rng, c: f64| (c + rng.gen_range(-2i32..=2) as f64).round().max(0.0) as usize;
    let lesion_center = [
        jitter(&mut rng, lung_right[0]).min(dims[0] - 1),
        jitter(&mut rng, lung_right[1]).min(dims[1] - 1),
        jitter(&mut rng, cz).min(dims[2] - 1),
    ];
    let lesion_radius = rng.gen_range(3..=5) as f64;
    let lesion_c = lesion_center.map(|c| c as f64);
    // spacing-aware radius so the lesion is a physical ball
    let lesion_r = [0, 1, 2].map(|a| lesion_radius * spec.spacing[0] / spec.spacing[a]);

    let n = dims.iter().product();
    let mut voxels = vec![AIR_HU; n];
    let mut labels = vec![0u32; n];
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let v = [i, j, k];
                let (mut hu, mut label) = (AIR_HU, 0);
                if ellipsoid(v, [cx, cy, 0.0], [0.45 * nx, 0.38 * ny, f64::INFINITY]) {
                    (hu, label) = (TISSUE_HU, BODY);
                    if ellipsoid(v, [cx - 0.15 * nx, cy + 0.05 * ny, 0.0], [0.2 * nx, 0.25 * ny, 0.3 * nz]) {
                        (hu, label) = (LIVER_HU, LIVER);
                    }
                    if ellipsoid(v, lung_right, lung_r) || ellipsoid(v, lung_left, lung_r) {
                        (hu, label) = (LUNG_HU, LUNG);
                    }
                    if disc(v, cx, cy - 0.1 * ny, 0.045 * nx) {
                        (hu, label) = (AORTA_HU, AORTA);
                    }
                    if disc(v, cx, cy + 0.25 * ny, 0.07 * nx) {
                        (hu, label) = (BONE_HU, VERTEBRAE);
                    }
                    if ellipsoid(v, lesion_c, lesion_r) {
                        (hu, label) = (LESION_HU, LESION);
                    }
                }
                let noise = if spec.noise > 0 { rng.gen_range(-spec.noise..=spec.noise) } else { 0 };
                let idx = linear_index(dims, v);
                voxels[idx] = hu + noise as f64;
                labels[idx] = label;
            }
        }
    }
    Phantom {
        volume: Volume::new(dims, spec.spacing, voxels).expect("phantom voxels are finite"),
        mask: MaskVolume::new(dims, spec.spacing, labels, label_names()),
        lesion_center,
        lesion_radius,
    }
}

impl Phantom {
    pub fn volume_nifti(&self, gzip: bool) -> Vec<u8> {
        Writer::new(Datatype::Int16).gzip(gzip).encode(self.volume.dims(), self.volume.spacing(), self.volume.voxels())
    }

    pub fn mask_nifti(&self, gzip: bool) -> Vec<u8> {
        let raw: Vec<f64> = self.mask.labels().iter().map(|&l| l as f64).collect();
        Writer::new(Datatype::Uint8).gzip(gzip).encode(self.mask.dims(), self.mask.spacing(), &raw)
    }

    /// `<stem>.nii.gz`, `<stem>_mask.nii.gz` and the mask's label sidecar
    /// `<stem>_mask.labels.tsv`, written into `dir`. Returns the file names.
    pub fn write_files(&self, dir: &Path, stem: &str) -> std::io::Result<[String; 3]> {
        let names = [format!("{stem}.nii.gz"), format!("{stem}_mask.nii.gz"), format!("{stem}_mask.labels.tsv")];
        std::fs::write(dir.join(&names[0]), self.volume_nifti(true))?;
        std::fs::write(dir.join(&names[1]), self.mask_nifti(true))?;
        let mut tsv = String::from("# phantom labels\n");
        for (id, name) in self.mask.label_names() {
            tsv.push_str(&format!("{id}\t{name}\n"));
        }
        std::fs::write(dir.join(&names[2]), tsv)?;
        Ok(names)
    }
}

/// Digital ball: voxels whose centre lies within `radius` of `center`.
pub fn ball(dims: Dims, center: [f64; 3], radius: f64) -> Vec<bool> {
    let mut out = vec![false; dims.iter().product()];
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                out[linear_index(dims, [i, j, k])] = ellipsoid([i, j, k], center, [radius; 3]);
            }
        }
    }
    out
}
