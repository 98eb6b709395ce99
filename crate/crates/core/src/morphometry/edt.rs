//! Exact Euclidean distance transform on anisotropic grids.
//!
//! Separable lower-envelope-of-parabolas algorithm (Felzenszwalb &
//! Huttenlocher), one pass per axis over squared distances.

use crate::volume::Dims;

/// Distance in millimetres from every voxel to the nearest `feature` voxel
/// centre. Infinite everywhere when there are no features.
pub fn distance_to_features(dims: Dims, spacing: [f64; 3], feature: &[bool]) -> Vec<f64> {
    assert_eq!(feature.len(), dims.iter().product::<usize>());
    let mut sq: Vec<f64> = feature.iter().map(|&f| if f { 0.0 } else { f64::INFINITY }).collect();
    let longest = dims.iter().copied().max().unwrap_or(0);
    let mut line = vec![0.0; longest];
    let mut out = vec![0.0; longest];
    let mut env = Envelope::with_capacity(longest);
    let strides = [1, dims[0], dims[0] * dims[1]];
    for axis in 0..3 {
        let n = dims[axis];
        let stride = strides[axis];
        let (o1, o2) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for b in 0..dims[o2] {
            for a in 0..dims[o1] {
                let base = a * strides[o1] + b * strides[o2];
                for (p, slot) in line[..n].iter_mut().enumerate() {
                    *slot = sq[base + p * stride];
                }
                env.transform(&line[..n], spacing[axis], &mut out[..n]);
                for (p, &v) in out[..n].iter().enumerate() {
                    sq[base + p * stride] = v;
                }
            }
        }
    }
    sq.into_iter().map(f64::sqrt).collect()
}

/// Distance from each `inside` voxel to the nearest non-inside voxel
/// (0 for voxels outside). With `border_is_outside` the grid is treated as
/// surrounded by one layer of outside voxels.
pub fn distance_inside(dims: Dims, spacing: [f64; 3], inside: &[bool], border_is_outside: bool) -> Vec<f64> {
    if !border_is_outside {
        let outside: Vec<bool> = inside.iter().map(|&v| !v).collect();
        return distance_to_features(dims, spacing, &outside);
    }
    let padded = [dims[0] + 2, dims[1] + 2, dims[2] + 2];
    let mut outside = vec![true; padded.iter().product()];
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let src = i + dims[0] * (j + dims[1] * k);
                outside[(i + 1) + padded[0] * ((j + 1) + padded[1] * (k + 1))] = !inside[src];
            }
        }
    }
    let d = distance_to_features(padded, spacing, &outside);
    let mut res = Vec::with_capacity(inside.len());
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                res.push(d[(i + 1) + padded[0] * ((j + 1) + padded[1] * (k + 1))]);
            }
        }
    }
    res
}

struct Envelope {
    sites: Vec<usize>,
    bounds: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Envelope { sites: Vec::with_capacity(n), bounds: Vec::with_capacity(n) }
    }

    /// out[p] = min_q f[q] + ((p - q) * h)^2
    fn transform(&mut self, f: &[f64], h: f64, out: &mut [f64]) {
        self.sites.clear();
        self.bounds.clear();
        let h2 = h * h;
        for q in 0..f.len() {
            if !f[q].is_finite() {
                continue;
            }
            loop {
                let Some(&p) = self.sites.last() else {
                    self.sites.push(q);
                    self.bounds.push(f64::NEG_INFINITY);
                    break;
                };
                let (qf, pf) = (q as f64, p as f64);
                let s = ((f[q] + h2 * qf * qf) - (f[p] + h2 * pf * pf)) / (2.0 * h2 * (qf - pf));
                if s <= *self.bounds.last().unwrap() {
                    self.sites.pop();
                    self.bounds.pop();
                } else {
                    self.sites.push(q);
                    self.bounds.push(s);
                    break;
                }
            }
        }
        if self.sites.is_empty() {
            out.fill(f64::INFINITY);
            return;
        }
        let mut k = 0;
        for (p, o) in out.iter_mut().enumerate() {
            let pf = p as f64;
            while k + 1 < self.sites.len() && self.bounds[k + 1] < pf {
                k += 1;
            }
            let d = (pf - self.sites[k] as f64) * h;
            *o = d * d + f[self.sites[k]];
        }
    }
}
