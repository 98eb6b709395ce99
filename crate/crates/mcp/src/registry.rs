//! The fixed tool catalogue and its argument schemas.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Tool family, in workflow order. Ordering is the listing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Ingestion,
    Global,
    Detail,
    Advanced,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Ingestion, Category::Global, Category::Detail, Category::Advanced];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Ingestion => "ingestion",
            Category::Global => "global",
            Category::Detail => "detail",
            Category::Advanced => "advanced",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown tool category '{0}'")]
pub struct InvalidCategory(pub String);

impl FromStr for Category {
    type Err = InvalidCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| InvalidCategory(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolDescriptor {
    pub name: String,
    pub category: Category,
    pub description: String,
    #[serde(rename = "inputSchema")]
    pub input_schema: Value,
}

fn object(properties: Value, required: &[&str]) -> Value {
    json!({
        "type": "object",
        "properties": properties,
        "required": required,
        "additionalProperties": false,
    })
}

fn label() -> Value {
    json!({"type": "integer", "minimum": 1, "maximum": u32::MAX, "description": "Mask label value"})
}

fn voxel_point(description: &str) -> Value {
    json!({
        "type": "array",
        "items": {"type": "integer", "minimum": 0},
        "minItems": 3,
        "maxItems": 3,
        "x-bound": "voxel_point",
        "description": description,
    })
}

fn axis() -> Value {
    json!({"type": "string", "enum": ["axial", "coronal", "sagittal"], "default": "axial"})
}

/// `window` preset plus optional per-field overrides.
fn window_props(mut props: Value) -> Value {
    let presets: Vec<&str> = ctflow_core::volume::list_window_presets().iter().map(|p| p.name).collect();
    let map = props.as_object_mut().expect("properties object");
    map.insert("window".into(), json!({"type": "string", "enum": presets, "default": "soft_tissue"}));
    map.insert("center".into(), json!({"type": "number", "description": "Overrides the preset window center (HU)"}));
    map.insert(
        "width".into(),
        json!({"type": "number", "exclusiveMinimum": 0, "description": "Overrides the preset window width (HU)"}),
    );
    props
}

fn roi() -> Value {
    json!({
        "type": "object",
        "description": "Exactly one of a mask label or a voxel box",
        "properties": {
            "label": label(),
            "box": object(json!({
                "lo": voxel_point("Inclusive lower corner"),
                "hi": voxel_point("Inclusive upper corner"),
            }), &["lo", "hi"]),
        },
        "minProperties": 1,
        "maxProperties": 1,
        "additionalProperties": false,
    })
}

fn path_arg(what: &str) -> Value {
    object(
        json!({"path": {"type": "string", "minLength": 1, "description": format!("{what} path relative to the data root")}}),
        &["path"],
    )
}

fn tool(name: &str, category: Category, description: &str, input_schema: Value) -> ToolDescriptor {
    ToolDescriptor { name: name.into(), category, description: description.into(), input_schema }
}

fn build() -> Vec<ToolDescriptor> {
    use Category::*;
    let label_only = || object(json!({"label": label()}), &["label"]);
    let projection = |mode: &str| {
        tool(
            &format!("view_{mode}"),
            Global,
            &format!("Render the {mode} intensity projection along an axis as a PNG."),
            object(window_props(json!({"axis": axis()})), &[]),
        )
    };
    let mut tools = vec![
        tool("load_data", Ingestion, "Load a CT volume (NIfTI-1, optionally gzipped) into the workspace and report its metadata.", path_arg("Volume")),
        tool("load_mask", Ingestion, "Load an integer label mask registered to the current volume.", path_arg("Mask")),
        tool("inspect_metadata", Ingestion, "Report dims, spacing, storage type, HU range and window presets of the loaded volume.", object(json!({}), &[])),
        tool("inspect_mask_labels", Ingestion, "List the labels present in the loaded mask with names and voxel counts.", object(json!({}), &[])),
        tool(
            "search_anatomy_names",
            Ingestion,
            "Rank anatomy names matching a query (exact, prefix, substring, then typo-tolerant).",
            object(json!({"query": {"type": "string", "minLength": 1}}), &["query"]),
        ),
        tool("list_window_presets", Ingestion, "List the named display windows (center, width in HU).", object(json!({}), &[])),
        tool(
            "view_montage",
            Global,
            "Render evenly spaced slices along an axis as a grid of tiles.",
            object(
                window_props(json!({
                    "axis": axis(),
                    "rows": {"type": "integer", "minimum": 1, "maximum": 8, "default": 3},
                    "cols": {"type": "integer", "minimum": 1, "maximum": 8, "default": 3},
                })),
                &[],
            ),
        ),
        projection("mip"),
        projection("minip"),
        projection("avgip"),
        tool(
            "view_slice",
            Detail,
            "Render one windowed slice as a PNG.",
            object(
                window_props(json!({
                    "axis": axis(),
                    "index": {"type": "integer", "minimum": 0, "x-bound": "slice_index", "description": "Slice index along the axis"},
                })),
                &["index"],
            ),
        ),
        tool(
            "view_ortho",
            Detail,
            "Render axial, coronal and sagittal planes through a voxel with a crosshair.",
            object(window_props(json!({"point": voxel_point("Voxel [i, j, k]")})), &["point"]),
        ),
        tool(
            "measure_distance",
            Detail,
            "Physical distance in mm between two voxel centers.",
            object(json!({"p1": voxel_point("First voxel"), "p2": voxel_point("Second voxel")}), &["p1", "p2"]),
        ),
        tool("measure_max_diameter", Detail, "Largest center-to-center distance across a label's surface voxels.", label_only()),
        tool("find_organ_center", Detail, "Rounded centroid voxel of a label and its position in mm.", label_only()),
        tool("extract_vessel_centerline", Detail, "Medial voxel path between the far ends of a tubular label.", label_only()),
        tool("auto_crop_body", Detail, "Bounding box of the largest body component above -500 HU, with a 2-voxel margin.", object(json!({}), &[])),
        tool(
            "edit_geometry",
            Detail,
            "Dilate, erode, open or close a label with a Euclidean ball; the workspace mask is replaced.",
            object(
                json!({
                    "label": label(),
                    "op": {"type": "string", "enum": ["dilate", "erode", "open", "close"]},
                    "radius_mm": {"type": "number", "exclusiveMinimum": 0, "maximum": 100},
                }),
                &["label", "op", "radius_mm"],
            ),
        ),
        tool(
            "segment_total_anatomy",
            Advanced,
            "Resolve structure names against the loaded mask and summarise each (volume, centroid).",
            object(
                json!({"names": {"type": "array", "items": {"type": "string", "minLength": 1}, "minItems": 1, "maxItems": 64}}),
                &["names"],
            ),
        ),
        tool(
            "analyze_hu_distribution",
            Advanced,
            "First-order HU statistics and a 16-bin histogram over a region.",
            object(json!({"roi": roi()}), &["roi"]),
        ),
        tool("analyze_shape_properties", Advanced, "Volume, surface area, sphericity, elongation and flatness of a label.", label_only()),
        tool("extract_radiomics_signature", Advanced, "First-order, shape and texture features of a label as one named vector.", label_only()),
        tool("visualize_radiomics_chart", Advanced, "Bar chart (SVG) of a label's radiomics signature.", label_only()),
        tool(
            "analyze_lesion_texture",
            Advanced,
            "Gray-level co-occurrence texture features over a region.",
            object(
                json!({"roi": roi(), "bins": {"type": "integer", "minimum": 2, "maximum": 256, "default": 32}}),
                &["roi"],
            ),
        ),
    ];
    tools.sort_by(|a, b| (a.category, &a.name).cmp(&(b.category, &b.name)));
    tools
}

/// All tools, ordered by category then name.
pub fn registry() -> &'static [ToolDescriptor] {
    static TOOLS: OnceLock<Vec<ToolDescriptor>> = OnceLock::new();
    TOOLS.get_or_init(build)
}

pub fn descriptor(name: &str) -> Option<&'static ToolDescriptor> {
    registry().iter().find(|t| t.name == name)
}

/// Registry subset whose category is in `filter` (all when `None`).
pub fn list_tools(filter: Option<&[Category]>) -> Vec<&'static ToolDescriptor> {
    registry()
        .iter()
        .filter(|t| filter.is_none_or(|f| f.contains(&t.category)))
        .collect()
}
