//! In-process tool execution: argument validation, sandboxed file access and
//! dispatch to the volume kernels.

use std::collections::BTreeSet;
use std::path::{Component, Path, PathBuf};

use ctflow_core::morphometry::{
    closest_names, edit_geometry, extract_vessel_centerline, find_organ_center, inspect_mask_labels, load_mask,
    mask_anatomy_entries, measure_distance, measure_max_diameter, search_anatomy_names, segment_total_anatomy,
    MorphOp, Vocabulary,
};
use ctflow_core::radiomics::{
    analyze_hu_distribution, analyze_lesion_texture, analyze_shape_properties, extract_radiomics_signature,
    visualize_radiomics_chart, RoiSelector, CHART_HEIGHT, CHART_WIDTH, DEFAULT_BINS, SVG_MEDIA_TYPE,
};
use ctflow_core::render::{
    self, auto_crop_body, encode_png, extract_slice, montage, ortho_views, project, Axis, Image2D, ProjectionMode,
};
use ctflow_core::volume::{self, inspect_metadata, list_window_presets, Window};
use ctflow_core::{Error as CoreError, Volume};
use serde::Serialize;
use serde_json::{json, Value};

use crate::registry::{self, Category, ToolDescriptor};
use crate::result::{ContentBlock, ErrorKind, ToolResult};
use crate::schema::{validate, ArgsViolation};
use crate::workspace::Workspace;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("the ingestion category cannot be disabled")]
    InvalidAblation,
    #[error("data root {0} is not a directory")]
    DataRoot(String),
}

/// Tool-call failure outside the in-band result contract.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("tool arguments must be a JSON object")]
pub struct ArgumentsNotObject;

#[derive(Debug, Clone)]
pub struct ToolboxConfig {
    data_root: PathBuf,
    pub vocabulary: Vocabulary,
    disabled: BTreeSet<Category>,
}

impl ToolboxConfig {
    pub fn new(data_root: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let root = data_root.as_ref();
        let data_root = root
            .canonicalize()
            .ok()
            .filter(|p| p.is_dir())
            .ok_or_else(|| ConfigError::DataRoot(root.display().to_string()))?;
        Ok(ToolboxConfig { data_root, vocabulary: Vocabulary::builtin(), disabled: BTreeSet::new() })
    }

    pub fn with_vocabulary(mut self, vocabulary: Vocabulary) -> Self {
        self.vocabulary = vocabulary;
        self
    }

    /// Hides whole categories from listing and dispatch.
    pub fn with_disabled(mut self, disabled: impl IntoIterator<Item = Category>) -> Result<Self, ConfigError> {
        let disabled: BTreeSet<Category> = disabled.into_iter().collect();
        if disabled.contains(&Category::Ingestion) {
            return Err(ConfigError::InvalidAblation);
        }
        self.disabled = disabled;
        Ok(self)
    }

    pub fn data_root(&self) -> &Path {
        &self.data_root
    }

    pub fn disabled(&self) -> &BTreeSet<Category> {
        &self.disabled
    }
}

enum Failure {
    Args(ArgsViolation),
    Exec { name: &'static str, message: String },
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure::Exec { name: e.name(), message: e.to_string() }
    }
}

impl From<ArgsViolation> for Failure {
    fn from(v: ArgsViolation) -> Self {
        Failure::Args(v)
    }
}

type Outcome = Result<Vec<ContentBlock>, Failure>;

fn exec(name: &'static str, message: impl Into<String>) -> Failure {
    Failure::Exec { name, message: message.into() }
}

fn data<T: Serialize>(v: &T) -> ContentBlock {
    ContentBlock::Data(serde_json::to_value(v).expect("tool outputs serialize"))
}

fn text(s: impl Into<String>) -> ContentBlock {
    ContentBlock::Text(s.into())
}

fn png(img: &Image2D) -> Result<ContentBlock, Failure> {
    Ok(ContentBlock::Image {
        bytes: encode_png(img)?,
        media_type: render::png::MEDIA_TYPE.into(),
        width: img.width,
        height: img.height,
    })
}

fn fmt_num(v: f64) -> String {
    format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
}

// Argument accessors. The schema has already been checked, so shapes are known.
fn arg_str<'a>(args: &'a Value, key: &str) -> Option<&'a str> {
    args.get(key).and_then(Value::as_str)
}

fn arg_u64(args: &Value, key: &str) -> Option<u64> {
    args.get(key).and_then(Value::as_u64)
}

fn arg_label(args: &Value) -> u32 {
    arg_u64(args, "label").expect("label validated") as u32
}

fn arg_point(args: &Value, key: &str) -> [i64; 3] {
    let a = args[key].as_array().expect("point validated");
    [0, 1, 2].map(|i| a[i].as_i64().expect("integer coordinate"))
}

fn arg_axis(args: &Value) -> Axis {
    arg_str(args, "axis").map(|a| a.parse().expect("axis validated")).unwrap_or(Axis::Axial)
}

fn arg_window(args: &Value) -> Result<Window, Failure> {
    let name = arg_str(args, "window").unwrap_or("soft_tissue");
    let base = volume::preset(name).expect("preset validated");
    let center = args.get("center").and_then(Value::as_f64).unwrap_or(base.center);
    let width = args.get("width").and_then(Value::as_f64).unwrap_or(base.width);
    Ok(Window::new(center, width)?)
}

fn window_json(w: Window) -> Value {
    json!({"center": w.center, "width": w.width})
}

fn arg_roi(args: &Value) -> RoiSelector {
    serde_json::from_value(args["roi"].clone()).expect("roi validated")
}

/// Lexically resolves `rel` under `root`; `None` when it escapes.
fn confine(root: &Path, rel: &str) -> Option<PathBuf> {
    let p = Path::new(rel);
    let start = if p.is_absolute() { PathBuf::new() } else { root.to_path_buf() };
    let mut out = start;
    for c in p.components() {
        match c {
            Component::Prefix(_) | Component::RootDir => out.push(c.as_os_str()),
            Component::CurDir => {}
            Component::ParentDir => {
                if !out.pop() {
                    return None;
                }
            }
            Component::Normal(n) => out.push(n),
        }
    }
    out.starts_with(root).then_some(out)
}

/// `<stem>.labels.tsv` beside a `.nii` / `.nii.gz` mask.
pub fn sidecar_path(mask: &Path) -> PathBuf {
    let name = mask.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = name.strip_suffix(".gz").unwrap_or(&name);
    let stem = stem.strip_suffix(".nii").unwrap_or(stem);
    mask.with_file_name(format!("{stem}.labels.tsv"))
}

/// Tool catalogue plus one workspace; the unit the server and the agent
/// loop both drive.
#[derive(Debug, Clone)]
pub struct Toolbox {
    config: ToolboxConfig,
    workspace: Workspace,
}

impl Toolbox {
    pub fn new(config: ToolboxConfig) -> Self {
        Toolbox { config, workspace: Workspace::new("session-0") }
    }

    pub fn config(&self) -> &ToolboxConfig {
        &self.config
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    /// Enabled tools, optionally restricted to `filter`.
    pub fn list_tools(&self, filter: Option<&[Category]>) -> Vec<&'static ToolDescriptor> {
        registry::list_tools(filter)
            .into_iter()
            .filter(|t| !self.config.disabled.contains(&t.category))
            .collect()
    }

    fn enabled(&self, name: &str) -> Option<&'static ToolDescriptor> {
        registry::descriptor(name).filter(|t| !self.config.disabled.contains(&t.category))
    }

    /// Runs one tool. All tool-level failures come back in-band; only a
    /// non-object `args` is refused. `Null` counts as `{}`.
    pub fn call_tool(&mut self, name: &str, args: &Value) -> Result<ToolResult, ArgumentsNotObject> {
        let args = match args {
            Value::Null => Value::Object(Default::default()),
            Value::Object(_) => args.clone(),
            _ => return Err(ArgumentsNotObject),
        };
        let Some(tool) = self.enabled(name) else {
            let names = self.list_tools(None).into_iter().map(|t| t.name.as_str());
            let suggestions = closest_names(name, names, 3);
            return Ok(ToolResult::error(
                ErrorKind::NameError,
                format!("Unknown tool '{name}'. Did you mean: {}?", suggestions.join(", ")),
                json!({"suggestions": suggestions}),
            ));
        };
        let dims = self.workspace.volume().map(Volume::dims);
        let outcome = match validate(&tool.input_schema, &args, dims) {
            Ok(()) => self.dispatch(name, &args),
            Err(v) => Err(Failure::Args(v)),
        };
        Ok(match outcome {
            Ok(content) => ToolResult::success(content),
            Err(Failure::Args(v)) => ToolResult::error(
                ErrorKind::ArgsError,
                format!("Invalid arguments for {name}: {v}"),
                json!({"path": v.path, "message": v.message}),
            ),
            Err(Failure::Exec { name: err, message }) => ToolResult::error(
                ErrorKind::ExecutionError,
                format!("{name} failed: {err}: {message}"),
                json!({"error": err}),
            ),
        })
    }

    fn volume(&self) -> Result<&Volume, Failure> {
        self.workspace.volume().ok_or_else(|| exec("NoVolumeLoaded", "load a volume with load_data first"))
    }

    fn read_file(&self, rel: &str) -> Result<(PathBuf, Vec<u8>), Failure> {
        let root = self.config.data_root.as_path();
        let denied = || {
            Failure::Args(ArgsViolation { path: "$.path".into(), message: format!("PathDenied: '{rel}' is outside the data root") })
        };
        let path = confine(root, rel).ok_or_else(denied)?;
        if !path.is_file() {
            return Err(exec("FileNotFound", format!("'{rel}' does not exist under the data root")));
        }
        let real = path.canonicalize().map_err(|e| exec("IoError", e.to_string()))?;
        if !real.starts_with(root) {
            return Err(denied());
        }
        let bytes = std::fs::read(&real).map_err(|e| exec("IoError", e.to_string()))?;
        Ok((path, bytes))
    }

    fn dispatch(&mut self, name: &str, args: &Value) -> Outcome {
        match name {
            "load_data" => self.load_data(args),
            "load_mask" => self.load_mask(args),
            "inspect_metadata" => {
                let report = inspect_metadata(self.volume()?);
                Ok(vec![
                    text(format!(
                        "Volume {}x{}x{} {}, spacing {} mm, HU range [{}, {}].",
                        report.dims[0],
                        report.dims[1],
                        report.dims[2],
                        report.datatype,
                        report.spacing.map(fmt_num).join("x"),
                        fmt_num(report.hu_min),
                        fmt_num(report.hu_max)
                    )),
                    data(&report),
                ])
            }
            "inspect_mask_labels" => {
                self.volume()?;
                let mask = self.workspace.mask().ok_or(CoreError::MaskRequired)?;
                let labels = inspect_mask_labels(mask);
                let names: Vec<String> = labels.iter().map(|l| format!("{}={}", l.label, l.name)).collect();
                Ok(vec![text(format!("{} label(s): {}.", labels.len(), names.join(", "))), data(&json!({"labels": labels}))])
            }
            "search_anatomy_names" => {
                let query = arg_str(args, "query").expect("query validated");
                let entries = match self.workspace.mask() {
                    Some(mask) => mask_anatomy_entries(mask, &self.config.vocabulary),
                    None => self.config.vocabulary.entries.clone(),
                };
                let matches = search_anatomy_names(query, &entries)?;
                let summary = if matches.is_empty() {
                    format!("No anatomy names match '{query}'.")
                } else {
                    let names: Vec<&str> = matches.iter().map(|m| m.name.as_str()).collect();
                    format!("{} match(es) for '{query}': {}.", matches.len(), names.join(", "))
                };
                Ok(vec![text(summary), data(&json!({"query": query, "matches": matches}))])
            }
            "list_window_presets" => {
                let presets = list_window_presets();
                let names: Vec<&str> = presets.iter().map(|p| p.name).collect();
                Ok(vec![text(format!("Window presets: {}.", names.join(", "))), data(&json!({"presets": presets}))])
            }
            "view_montage" => {
                let (axis, window) = (arg_axis(args), arg_window(args)?);
                let rows = arg_u64(args, "rows").unwrap_or(3) as usize;
                let cols = arg_u64(args, "cols").unwrap_or(3) as usize;
                let vol = self.volume()?;
                let img = montage(vol, axis, rows, cols, window)?;
                let indices = render::montage_indices(vol.dims()[axis.dim()], rows * cols);
                Ok(vec![
                    text(format!("{} montage {rows}x{cols}, slices {indices:?}.", axis.name())),
                    png(&img)?,
                    data(&json!({"axis": axis, "rows": rows, "cols": cols, "slices": indices, "window": window_json(window)})),
                ])
            }
            "view_mip" => self.projection(args, ProjectionMode::Max),
            "view_minip" => self.projection(args, ProjectionMode::Min),
            "view_avgip" => self.projection(args, ProjectionMode::Avg),
            "view_slice" => {
                let (axis, window) = (arg_axis(args), arg_window(args)?);
                let index = arg_u64(args, "index").expect("index validated") as usize;
                let img = extract_slice(self.volume()?, axis, index, window)?;
                Ok(vec![
                    text(format!("{} slice {index} ({}x{}).", axis.name(), img.width, img.height)),
                    png(&img)?,
                    data(&json!({"axis": axis, "index": index, "window": window_json(window)})),
                ])
            }
            "view_ortho" => {
                let point = arg_point(args, "point");
                let window = arg_window(args)?;
                let img = ortho_views(self.volume()?, point, window)?;
                Ok(vec![
                    text(format!("Axial, coronal and sagittal planes through {point:?}.")),
                    png(&img)?,
                    data(&json!({"point": point, "window": window_json(window)})),
                ])
            }
            "measure_distance" => {
                let vol = self.volume()?;
                let (p1, p2) = (arg_point(args, "p1"), arg_point(args, "p2"));
                let mm = measure_distance(p1, p2, vol.spacing(), vol.dims())?;
                Ok(vec![text(format!("Distance {p1:?} to {p2:?}: {} mm.", fmt_num(mm))), data(&json!({"mm": mm}))])
            }
            "measure_max_diameter" => {
                let label = arg_label(args);
                let d = measure_max_diameter(self.mask()?, label)?;
                Ok(vec![
                    text(format!("Label {label} maximum diameter {} mm between {:?} and {:?}.", fmt_num(d.mm), d.endpoints[0], d.endpoints[1])),
                    data(&json!({"label": label, "mm": d.mm, "endpoints": d.endpoints})),
                ])
            }
            "find_organ_center" => {
                let label = arg_label(args);
                let c = find_organ_center(self.mask()?, label)?;
                Ok(vec![
                    text(format!("Label {label} center voxel {:?} ({} mm).", c.voxel, c.mm.map(fmt_num).join(", "))),
                    data(&json!({"label": label, "voxel": c.voxel, "mm": c.mm})),
                ])
            }
            "extract_vessel_centerline" => {
                let label = arg_label(args);
                let mask = self.mask()?;
                let path = extract_vessel_centerline(mask, label)?;
                let s = mask.spacing();
                let length_mm: f64 = path
                    .windows(2)
                    .map(|w| (0..3).map(|a| ((w[1][a] as f64 - w[0][a] as f64) * s[a]).powi(2)).sum::<f64>().sqrt())
                    .sum();
                Ok(vec![
                    text(format!("Label {label} centerline: {} points, {} mm.", path.len(), fmt_num(length_mm))),
                    data(&json!({"label": label, "points": path.len(), "length_mm": length_mm, "path": path})),
                ])
            }
            "auto_crop_body" => {
                let b = auto_crop_body(self.volume()?)?;
                Ok(vec![
                    text(format!("Body box {:?} to {:?}.", b.lo, b.hi)),
                    data(&json!({"lo": b.lo, "hi": b.hi, "voxel_count": b.voxel_count()})),
                ])
            }
            "edit_geometry" => {
                let label = arg_label(args);
                let op: MorphOp = serde_json::from_value(args["op"].clone()).expect("op validated");
                let radius = args["radius_mm"].as_f64().expect("radius validated");
                let mask = self.mask()?;
                let before = mask.voxels_of(label).len();
                let edited = edit_geometry(mask, label, op, radius)?;
                let after = edited.voxels_of(label).len();
                self.workspace.set_mask(edited, "edit_geometry", args);
                Ok(vec![
                    text(format!("Label {label} {:?} by {} mm: {before} -> {after} voxels.", op, fmt_num(radius)).to_lowercase()),
                    data(&json!({"label": label, "op": op, "radius_mm": radius, "voxels_before": before, "voxels_after": after})),
                ])
            }
            "segment_total_anatomy" => {
                let names: Vec<String> = serde_json::from_value(args["names"].clone()).expect("names validated");
                self.volume()?;
                let out = segment_total_anatomy(self.workspace.mask(), &names, &self.config.vocabulary)?;
                let found = out.iter().filter(|s| matches!(s, ctflow_core::morphometry::AnatomySummary::Found { .. })).count();
                Ok(vec![text(format!("{found} of {} structure(s) found.", names.len())), data(&json!({"structures": out}))])
            }
            "analyze_hu_distribution" => {
                let stats = analyze_hu_distribution(self.volume()?, self.workspace.mask(), &arg_roi(args))?;
                Ok(vec![
                    text(format!("{} voxels, mean {} HU, std {} HU.", stats.count, fmt_num(stats.mean), fmt_num(stats.std))),
                    data(&stats),
                ])
            }
            "analyze_shape_properties" => {
                let label = arg_label(args);
                let s = analyze_shape_properties(self.mask()?, label)?;
                Ok(vec![
                    text(format!("Label {label}: {} mm3, sphericity {}.", fmt_num(s.volume_mm3), fmt_num(s.sphericity))),
                    data(&s),
                ])
            }
            "extract_radiomics_signature" => {
                let label = arg_label(args);
                let sig = extract_radiomics_signature(self.volume()?, self.mask()?, label)?;
                Ok(vec![text(format!("Label {label}: {} features.", sig.len())), data(&sig)])
            }
            "visualize_radiomics_chart" => {
                let label = arg_label(args);
                let sig = extract_radiomics_signature(self.volume()?, self.mask()?, label)?;
                let svg = visualize_radiomics_chart(&sig)?;
                Ok(vec![
                    text(format!("Label {label}: chart of {} features.", sig.len())),
                    ContentBlock::Image { bytes: svg, media_type: SVG_MEDIA_TYPE.into(), width: CHART_WIDTH, height: CHART_HEIGHT },
                ])
            }
            "analyze_lesion_texture" => {
                let bins = arg_u64(args, "bins").map_or(DEFAULT_BINS, |b| b as usize);
                let f = analyze_lesion_texture(self.volume()?, self.workspace.mask(), &arg_roi(args), bins)?;
                Ok(vec![
                    text(format!("Texture ({bins} bins): contrast {}, entropy {}.", fmt_num(f.contrast), fmt_num(f.entropy))),
                    data(&f),
                ])
            }
            other => unreachable!("registered tool without handler: {other}"),
        }
    }

    fn mask(&self) -> Result<&ctflow_core::morphometry::MaskVolume, Failure> {
        self.volume()?;
        Ok(self.workspace.mask().ok_or(CoreError::MaskRequired)?)
    }

    fn projection(&self, args: &Value, mode: ProjectionMode) -> Outcome {
        let (axis, window) = (arg_axis(args), arg_window(args)?);
        let img = project(self.volume()?, axis, mode, window);
        let mode_name = serde_json::to_value(mode).expect("mode serializes");
        Ok(vec![
            text(format!("{} {} projection ({}x{}).", axis.name(), mode_name.as_str().unwrap_or_default(), img.width, img.height)),
            png(&img)?,
            data(&json!({"axis": axis, "mode": mode, "window": window_json(window)})),
        ])
    }

    fn load_data(&mut self, args: &Value) -> Outcome {
        let rel = arg_str(args, "path").expect("path validated");
        let (_, bytes) = self.read_file(rel)?;
        let vol = volume::parse_nifti(&bytes)?;
        let report = inspect_metadata(&vol);
        self.workspace.set_volume(vol, "load_data", args);
        Ok(vec![
            text(format!(
                "Loaded '{rel}': {}x{}x{} {}, spacing {} mm.",
                report.dims[0],
                report.dims[1],
                report.dims[2],
                report.datatype,
                report.spacing.map(fmt_num).join("x")
            )),
            data(&report),
        ])
    }

    fn load_mask(&mut self, args: &Value) -> Outcome {
        let rel = arg_str(args, "path").expect("path validated");
        let (path, bytes) = self.read_file(rel)?;
        let vol = self.volume()?;
        let sidecar = sidecar_path(&path);
        let sidecar = if sidecar.is_file() {
            let text = std::fs::read_to_string(&sidecar).map_err(|e| exec("IoError", e.to_string()))?;
            Some(Vocabulary::parse(&text)?)
        } else {
            None
        };
        let mask = load_mask(&bytes, vol, &self.config.vocabulary, sidecar.as_ref())?;
        let labels = inspect_mask_labels(&mask);
        self.workspace.set_mask(mask, "load_mask", args);
        let names: Vec<String> = labels.iter().map(|l| format!("{}={}", l.label, l.name)).collect();
        Ok(vec![
            text(format!("Loaded mask '{rel}' with {} label(s): {}.", labels.len(), names.join(", "))),
            data(&json!({"labels": labels})),
        ])
    }
}
