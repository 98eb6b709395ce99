#![allow(dead_code)]

use ctflow_core::phantom::{generate, PhantomSpec};
use ctflow_mcp::{Toolbox, ToolboxConfig};
use tempfile::TempDir;

/// Data root holding `chest.nii.gz`, `chest_mask.nii.gz` and its sidecar.
pub fn data_root() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    generate(&PhantomSpec::default()).write_files(dir.path(), "chest").unwrap();
    dir
}

pub fn toolbox(dir: &TempDir) -> Toolbox {
    Toolbox::new(ToolboxConfig::new(dir.path()).unwrap())
}

/// Toolbox with the phantom volume and mask already loaded.
pub fn loaded(dir: &TempDir) -> Toolbox {
    let mut tb = toolbox(dir);
    for (tool, path) in [("load_data", "chest.nii.gz"), ("load_mask", "chest_mask.nii.gz")] {
        let r = tb.call_tool(tool, &serde_json::json!({"path": path})).unwrap();
        assert!(!r.is_error, "{tool}: {:?}", r.text());
    }
    tb
}

