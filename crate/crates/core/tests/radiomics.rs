use std::collections::BTreeMap;

use ctflow_core::morphometry::MaskVolume;
use ctflow_core::phantom::{ball, generate, PhantomSpec, LESION};
use ctflow_core::radiomics::glcm::{cooccurrence, probability_matrix};
use ctflow_core::radiomics::{
    analyze_hu_distribution, analyze_lesion_texture, analyze_shape_properties, analyze_texture,
    extract_radiomics_signature, first_order, visualize_radiomics_chart, GlcmFeatures, RoiSelector,
    SIGNATURE_KEYS,
};
use ctflow_core::render::BoundingBox;
use ctflow_core::volume::{linear_index, voxel_of, Volume};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || a == b
}

fn ball_mask(r: f64, spacing: [f64; 3]) -> MaskVolume {
    let n = 2 * r as usize + 5;
    let c = (n / 2) as f64;
    let on = ball([n; 3], [c; 3], r);
    MaskVolume::new([n; 3], spacing, on.iter().map(|&b| u32::from(b)).collect(), BTreeMap::new())
}

#[test]
fn ball_shape_against_sphere_formulas() {
    let r = 15.0;
    let report = analyze_shape_properties(&ball_mask(r, [1.0; 3]), 1).unwrap();
    let v = 4.0 / 3.0 * std::f64::consts::PI * r * r * r;
    assert!((report.volume_mm3 - v).abs() <= 0.02 * v, "{}", report.volume_mm3);
    assert_eq!(report.volume_mm3, 14147.0);
    // Binary-indicator marching cubes overestimates a sphere by ~9%; the
    // reference mesh area is scikit-image's marching_cubes + mesh_surface_area
    // on the same padded indicator.
    assert!((report.surface_area_mm2 - 3080.5444).abs() < 1e-3, "{}", report.surface_area_mm2);
    assert!((report.sphericity - 0.918261).abs() < 1e-5, "{}", report.sphericity);
    assert!(report.elongation > 0.99 && report.flatness > 0.99);

    let doubled = analyze_shape_properties(&ball_mask(r, [2.0; 3]), 1).unwrap();
    assert!(rel_close(doubled.volume_mm3, 8.0 * report.volume_mm3, 1e-6));
    assert!(rel_close(doubled.surface_area_mm2, 4.0 * report.surface_area_mm2, 1e-6));
    assert!(rel_close(doubled.sphericity, report.sphericity, 1e-9));
}

#[test]
fn mesh_area_matches_reference_for_other_radii() {
    for (r, area) in [(10.0, 1372.042), (20.0, 5452.9463)] {
        let report = analyze_shape_properties(&ball_mask(r, [1.0; 3]), 1).unwrap();
        assert!((report.surface_area_mm2 - area).abs() < 1e-2, "r={r}: {}", report.surface_area_mm2);
    }
}

#[test]
fn flat_faces_have_exact_area() {
    // an n-cube meshes to flat faces, chamfered edges and corner triangles
    let n = 6;
    let dims = [n + 2; 3];
    let mut labels = vec![0; dims.iter().product()];
    for k in 1..=n {
        for j in 1..=n {
            for i in 1..=n {
                labels[linear_index(dims, [i, j, k])] = 1;
            }
        }
    }
    let s = analyze_shape_properties(&MaskVolume::new(dims, [1.0; 3], labels, BTreeMap::new()), 1).unwrap();
    let m = (n - 1) as f64;
    let want = 6.0 * m * m + 12.0 * m * 0.5f64.sqrt() + 8.0 * 3f64.sqrt() / 8.0;
    assert!((s.surface_area_mm2 - want).abs() < 1e-9, "{} vs {want}", s.surface_area_mm2);
}

#[test]
fn shape_invariants_on_phantom_lesions() {
    for seed in 0..5 {
        let p = generate(&PhantomSpec { seed, ..PhantomSpec::default() });
        let s = analyze_shape_properties(&p.mask, LESION).unwrap();
        assert_eq!(s.volume_mm3, p.mask.voxels_of(LESION).len() as f64 * 2.0);
        assert!(s.sphericity > 0.0 && s.sphericity <= 1.05, "seed {seed}: {}", s.sphericity);
        assert!(0.0 <= s.flatness && s.flatness <= s.elongation && s.elongation <= 1.0);
    }
}

#[test]
fn rod_elongation_from_hand_moments() {
    let dims = [3, 3, 12];
    let mut labels = vec![0; 108];
    for k in 1..11 {
        labels[linear_index(dims, [1, 1, k])] = 1;
    }
    let s = analyze_shape_properties(&MaskVolume::new(dims, [1.0; 3], labels, BTreeMap::new()), 1).unwrap();
    // covariance eigenvalues (99/12, 0, 0)
    assert!(s.elongation <= 0.2);
    assert!((s.elongation - s.flatness).abs() < 1e-9);
    assert_eq!(s.volume_mm3, 10.0);
}

/// Summation oracle: two-pass mean/variance, explicit order statistics.
#[test]
fn first_order_matches_summation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let values: Vec<f64> = (0..1000).map(|_| rng.gen_range(-1024.0..3071.0)).collect();
        let s = first_order(&values).unwrap();
        let n = values.len() as f64;
        let mut mean = 0.0;
        for v in &values {
            mean += v;
        }
        mean /= n;
        let mut ss = 0.0;
        for v in &values {
            ss += (v - mean) * (v - mean);
        }
        let std = (ss / n).sqrt();
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pct = |q: f64| {
            let h = (sorted.len() - 1) as f64 * q;
            let lo = h.floor() as usize;
            sorted[lo] + (h - lo as f64) * (sorted[(lo + 1).min(sorted.len() - 1)] - sorted[lo])
        };
        assert!(rel_close(s.mean, mean, 1e-9));
        assert!(rel_close(s.std, std, 1e-9));
        assert_eq!((s.min, s.max), (sorted[0], sorted[999]));
        for (got, q) in [(s.median, 0.5), (s.p10, 0.1), (s.p90, 0.9)] {
            assert!(rel_close(got, pct(q), 1e-9));
        }
        let width = (sorted[999] - sorted[0]) / 16.0;
        let mut hist = [0u64; 16];
        for v in &values {
            let b = ((v - sorted[0]) / width).floor() as usize;
            hist[b.min(15)] += 1;
        }
        assert_eq!(s.histogram, hist);
        assert_eq!(s.histogram.iter().sum::<u64>(), 1000);
        assert!(s.min <= s.p10 && s.p10 <= s.median && s.median <= s.p90 && s.p90 <= s.max);
    }
}

#[test]
fn constant_roi_statistics() {
    let s = first_order(&[7.0; 30]).unwrap();
    assert_eq!(s.std, 0.0);
    assert_eq!(s.histogram.iter().filter(|&&c| c > 0).count(), 1);
}

/// Texture by enumerating every ordered pair of distinct 26-adjacent roi voxels.
// index form mirrors the textbook sums on purpose
#[allow(clippy::needless_range_loop)]
fn glcm_oracle(dims: [usize; 3], values: &[f64], roi: &[usize], bins: usize) -> (GlcmFeatures, f64) {
    let min = roi.iter().map(|&i| values[i]).fold(f64::INFINITY, f64::min);
    let max = roi.iter().map(|&i| values[i]).fold(f64::NEG_INFINITY, f64::max);
    let level = |v: f64| {
        if max == min {
            0
        } else {
            (((v - min) / (max - min) * bins as f64).floor() as usize).min(bins - 1)
        }
    };
    let mut m = vec![vec![0.0f64; bins]; bins];
    let mut total = 0.0;
    for &a in roi {
        for &b in roi {
            let (va, vb) = (voxel_of(dims, a), voxel_of(dims, b));
            let cheb = (0..3).map(|x| va[x].abs_diff(vb[x])).max().unwrap();
            if cheb == 1 {
                m[level(values[a])][level(values[b])] += 1.0;
                total += 1.0;
            }
        }
    }
    let p: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|c| c / total).collect()).collect();
    let psum: f64 = p.iter().flatten().sum();
    let (mut mi, mut mj) = (0.0, 0.0);
    for i in 0..bins {
        for j in 0..bins {
            mi += i as f64 * p[i][j];
            mj += j as f64 * p[i][j];
        }
    }
    let (mut contrast, mut energy, mut homog, mut entropy, mut vi, mut vj, mut cov) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..bins {
        for j in 0..bins {
            let q = p[i][j];
            let d = i as f64 - j as f64;
            contrast += q * d * d;
            energy += q * q;
            homog += q / (1.0 + d.abs());
            if q > 0.0 {
                entropy -= q * q.log2();
            }
            vi += q * (i as f64 - mi).powi(2);
            vj += q * (j as f64 - mj).powi(2);
            cov += q * (i as f64 - mi) * (j as f64 - mj);
        }
    }
    let correlation = if vi * vj == 0.0 { 1.0 } else { cov / (vi.sqrt() * vj.sqrt()) };
    (GlcmFeatures { bins, contrast, energy, homogeneity: homog, correlation, entropy }, psum)
}

#[test]
fn glcm_matches_pair_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dims = [10, 10, 10];
    for t in 0..20 {
        let values: Vec<f64> = (0..1000).map(|_| rng.gen_range(-200..300) as f64).collect();
        let lo = [rng.gen_range(0..3), rng.gen_range(0..3), rng.gen_range(0..3)];
        let hi = lo.map(|c| c + 7);
        let mut roi = BoundingBox { lo, hi }.linear_indices(dims);
        if t % 2 == 1 {
            // sparse irregular region inside the box
            roi.retain(|_| rng.gen_bool(0.6));
        }
        let bins = [8, 16, 32][t % 3];
        let got = analyze_texture(dims, &values, &roi, bins).unwrap();
        let (want, psum) = glcm_oracle(dims, &values, &roi, bins);
        assert!((psum - 1.0).abs() <= 1e-12);
        for (g, w, name) in [
            (got.contrast, want.contrast, "contrast"),
            (got.energy, want.energy, "energy"),
            (got.homogeneity, want.homogeneity, "homogeneity"),
            (got.correlation, want.correlation, "correlation"),
            (got.entropy, want.entropy, "entropy"),
        ] {
            assert!(rel_close(g, w, 1e-9), "roi {t} {name}: {g} vs {w}");
        }
        let p = probability_matrix(&cooccurrence(dims, &values, &roi, bins)).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert!(got.energy > 0.0 && got.energy <= 1.0 && got.homogeneity > 0.0 && got.homogeneity <= 1.0);
    }
}

#[test]
fn roi_selectors_route_to_the_same_kernels() {
    let p = generate(&PhantomSpec::default());
    let by_label = analyze_hu_distribution(&p.volume, Some(&p.mask), &RoiSelector::Label(LESION)).unwrap();
    assert_eq!(by_label.count, p.mask.voxels_of(LESION).len());
    let b = BoundingBox { lo: [0, 0, 0], hi: [3, 3, 3] };
    let by_box = analyze_hu_distribution(&p.volume, None, &RoiSelector::Box(b)).unwrap();
    assert_eq!(by_box.count, 64);
    assert!(analyze_hu_distribution(&p.volume, None, &RoiSelector::Label(LESION)).is_err());
    let tex = analyze_lesion_texture(&p.volume, Some(&p.mask), &RoiSelector::Label(LESION), 32).unwrap();
    assert!(tex.contrast >= 0.0 && tex.entropy >= 0.0);
    let json = serde_json::to_string(&RoiSelector::Box(b)).unwrap();
    assert_eq!(json, r#"{"box":{"lo":[0,0,0],"hi":[3,3,3]}}"#);
}

#[test]
fn signature_and_chart_on_phantom() {
    let p = generate(&PhantomSpec { seed: 4, ..PhantomSpec::default() });
    let sig = extract_radiomics_signature(&p.volume, &p.mask, LESION).unwrap();
    assert_eq!(sig.iter().map(|(k, _)| k).collect::<Vec<_>>(), SIGNATURE_KEYS);
    let svg = visualize_radiomics_chart(&sig).unwrap();
    let text = String::from_utf8(svg.clone()).unwrap();
    assert_eq!(text.matches("class=\"bar\"").count(), 18);
    assert_eq!(svg, visualize_radiomics_chart(&extract_radiomics_signature(&p.volume, &p.mask, LESION).unwrap()).unwrap());
}

#[test]
fn constant_volume_texture_is_degenerate() {
    let vol = Volume::new([4, 4, 4], [1.0; 3], vec![12.0; 64]).unwrap();
    let roi = RoiSelector::Box(BoundingBox { lo: [0, 0, 0], hi: [3, 3, 3] });
    let f = analyze_lesion_texture(&vol, None, &roi, 32).unwrap();
    assert_eq!((f.energy, f.contrast, f.homogeneity, f.entropy, f.correlation), (1.0, 0.0, 1.0, 0.0, 1.0));
}
