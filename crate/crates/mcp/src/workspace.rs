use ctflow_core::morphometry::MaskVolume;
use ctflow_core::Volume;
use serde_json::{json, Value};

use crate::result::{canonical_string, sha256_hex};

/// Per-session state: at most one volume and one mask registered to it.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    pub session_id: String,
    volume: Option<Volume>,
    mask: Option<MaskVolume>,
    history: Vec<(String, String)>,
}

impl Workspace {
    pub fn new(session_id: impl Into<String>) -> Self {
        Workspace { session_id: session_id.into(), ..Default::default() }
    }

    pub fn volume(&self) -> Option<&Volume> {
        self.volume.as_ref()
    }

    pub fn mask(&self) -> Option<&MaskVolume> {
        self.mask.as_ref()
    }

    /// Successful state-changing calls: (tool name, args digest).
    pub fn history(&self) -> &[(String, String)] {
        &self.history
    }

    /// Installs a new volume; any previous mask no longer applies and is dropped.
    pub(crate) fn set_volume(&mut self, volume: Volume, tool: &str, args: &Value) {
        self.volume = Some(volume);
        self.mask = None;
        self.record(tool, args);
    }

    pub(crate) fn set_mask(&mut self, mask: MaskVolume, tool: &str, args: &Value) {
        debug_assert_eq!(self.volume.as_ref().map(Volume::dims), Some(mask.dims()));
        self.mask = Some(mask);
        self.record(tool, args);
    }

    fn record(&mut self, tool: &str, args: &Value) {
        self.history.push((tool.to_string(), sha256_hex(canonical_string(args).as_bytes())));
    }

    /// Hash of the volume, mask and load history.
    pub fn digest(&self) -> String {
        let state = json!({
            "volume": self.volume.as_ref().map(|v| v.source_digest().to_string()),
            "mask": self.mask.as_ref().map(MaskVolume::digest),
            "history": self.history,
        });
        sha256_hex(canonical_string(&state).as_bytes())
    }
}
