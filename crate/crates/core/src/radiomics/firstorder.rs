use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HISTOGRAM_BINS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderStats {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub p10: f64,
    pub p90: f64,
    /// Equal-width bins over [min, max]; the last bin is closed.
    pub histogram: Vec<u64>,
}

/// Linear interpolation between order statistics (`q` in [0, 1]).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Histogram bin of `v` among `bins` equal-width bins over [min, max].
#[inline]
pub fn bin_of(v: f64, min: f64, max: f64, bins: usize) -> usize {
    if max > min {
        (((v - min) / (max - min) * bins as f64).floor() as usize).min(bins - 1)
    } else {
        0
    }
}

pub fn first_order(values: &[f64]) -> Result<FirstOrderStats> {
    if values.is_empty() {
        return Err(Error::EmptyRoi);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let mut histogram = vec![0u64; HISTOGRAM_BINS];
    for &v in values {
        histogram[bin_of(v, min, max, HISTOGRAM_BINS)] += 1;
    }
    Ok(FirstOrderStats {
        count: values.len(),
        mean,
        std: var.sqrt(),
        min,
        max,
        median: percentile(&sorted, 0.5),
        p10: percentile(&sorted, 0.1),
        p90: percentile(&sorted, 0.9),
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_population_stats() {
        let s = first_order(&[0.0, 100.0]).unwrap();
        assert_eq!((s.mean, s.std, s.min, s.max), (50.0, 50.0, 0.0, 100.0));
        assert_eq!(s.median, 50.0);
        assert_eq!(s.p10, 10.0);
        assert_eq!(s.p90, 90.0);
        assert_eq!(s.histogram[0], 1);
        assert_eq!(s.histogram[15], 1);
    }

    #[test]
    fn constant_values() {
        let s = first_order(&[7.0; 9]).unwrap();
        assert_eq!(s.std, 0.0);
        assert_eq!(s.histogram.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(s.histogram[0], 9);
    }

    #[test]
    fn empty_roi() {
        assert_eq!(first_order(&[]).unwrap_err(), Error::EmptyRoi);
    }

    #[test]
    fn percentiles_interpolate() {
        let s = first_order(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert!((s.p10 - 1.3).abs() < 1e-12);
        assert!((s.p90 - 3.7).abs() < 1e-12);
    }
}
