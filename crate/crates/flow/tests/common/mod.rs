#![allow(dead_code)]

use std::collections::BTreeMap;

use ctflow_core::phantom::{generate, PhantomSpec, LESION};
use ctflow_flow::{CaseType, Scenario, TaskCase, ToolCall};
use ctflow_mcp::{Toolbox, ToolboxConfig};
use serde_json::json;
use tempfile::TempDir;

pub fn data_root() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    generate(&PhantomSpec::default()).write_files(dir.path(), "chest").unwrap();
    dir
}

pub fn config(dir: &TempDir) -> ToolboxConfig {
    ToolboxConfig::new(dir.path()).unwrap()
}

pub fn toolbox(dir: &TempDir) -> Toolbox {
    Toolbox::new(config(dir))
}

pub fn sop() -> Vec<ToolCall> {
    vec![
        ToolCall::new("load_data", json!({"path": "chest.nii.gz"})),
        ToolCall::new("load_mask", json!({"path": "chest_mask.nii.gz"})),
        ToolCall::new("find_organ_center", json!({"label": LESION})),
        ToolCall::new("view_slice", json!({"index": 16, "window": "liver"})),
        ToolCall::new("measure_max_diameter", json!({"label": LESION})),
    ]
}

/// Four-option case over the default phantom; the answer is C.
pub fn case(id: &str) -> TaskCase {
    TaskCase {
        id: id.into(),
        scenario: Scenario::QA,
        case_type: CaseType::B,
        volume_path: "chest.nii.gz".into(),
        mask_path: Some("chest_mask.nii.gz".into()),
        query: "How wide is the lesion at its widest?".into(),
        options: BTreeMap::from([
            ("A".into(), "about 4 mm".into()),
            ("B".into(), "about 8 mm".into()),
            ("C".into(), "about 12 mm".into()),
            ("D".into(), "about 30 mm".into()),
        ]),
        answer_key: "C".into(),
        sop: Some(sop()),
    }
}
