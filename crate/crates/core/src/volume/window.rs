use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named display window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPreset {
    pub name: &'static str,
    pub center: f64,
    pub width: f64,
}

const PRESETS: [WindowPreset; 5] = [
    WindowPreset { name: "lung", center: -600.0, width: 1500.0 },
    WindowPreset { name: "soft_tissue", center: 40.0, width: 400.0 },
    WindowPreset { name: "bone", center: 300.0, width: 1500.0 },
    WindowPreset { name: "brain", center: 40.0, width: 80.0 },
    WindowPreset { name: "liver", center: 60.0, width: 150.0 },
];

pub fn list_window_presets() -> &'static [WindowPreset] {
    &PRESETS
}

pub fn preset(name: &str) -> Option<Window> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .map(|p| Window { center: p.center, width: p.width })
}

/// A validated (center, width) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: f64,
    pub width: f64,
}

impl Window {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) || !center.is_finite() {
            return Err(Error::InvalidWindow(width));
        }
        Ok(Window { center, width })
    }

    /// Maps one HU value to a gray level.
    #[inline]
    pub fn map(&self, v: f64) -> u8 {
        let lo = self.center - self.width / 2.0;
        round_half_up((v - lo) / self.width * 255.0).clamp(0.0, 255.0) as u8
    }
}

#[inline]
pub fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

pub fn apply_window(values: &[f64], center: f64, width: f64) -> Result<Vec<u8>> {
    let w = Window::new(center, width)?;
    Ok(values.iter().map(|&v| w.map(v)).collect())
}
