//! Synthetic benchmark over phantoms, with reference tool sequences.
//!
//! Answer keys come from the volume kernels run directly on the generated
//! phantom, never from the tool server.

use std::collections::BTreeMap;
use std::path::Path;

use ctflow_core::morphometry::{find_organ_center, measure_max_diameter};
use ctflow_core::phantom::{generate, PhantomSpec, LESION, LIVER};
use ctflow_core::radiomics::{analyze_shape_properties, first_order};
use serde_json::json;

use crate::agent::ToolCall;
use crate::manifest::{option_labels, CaseType, Scenario, TaskCase};

pub const BENCH_SEEDS: [u64; 2] = [0, 1];

/// Options with the correct value in `slot` and scaled distractors elsewhere.
fn numeric_options(correct: f64, decimals: usize, slot: usize, unit: &str) -> (BTreeMap<String, String>, String) {
    let mut values = vec![0.6 * correct, 1.4 * correct, 1.8 * correct];
    values.insert(slot, correct);
    let labels = option_labels(values.len());
    let options = labels.iter().zip(&values).map(|(l, v)| (l.clone(), format!("{v:.decimals$} {unit}"))).collect();
    (options, labels[slot].clone())
}

fn text_options(choices: &[&str], correct: usize) -> (BTreeMap<String, String>, String) {
    let labels = option_labels(choices.len());
    (labels.iter().cloned().zip(choices.iter().map(|s| s.to_string())).collect(), labels[correct].clone())
}

fn call(name: &str, args: serde_json::Value) -> ToolCall {
    ToolCall::new(name, args)
}

/// Writes the phantoms into `dir` and returns the cases (six per seed).
pub fn synthetic_benchmark(dir: &Path) -> std::io::Result<Vec<TaskCase>> {
    let mut cases = Vec::new();
    for seed in BENCH_SEEDS {
        let phantom = generate(&PhantomSpec { seed, ..Default::default() });
        let stem = format!("chest_s{seed}");
        let [volume, mask, _] = phantom.write_files(dir, &stem)?;
        let load = || vec![call("load_data", json!({"path": volume})), call("load_mask", json!({"path": mask}))];
        let with = |extra: Vec<ToolCall>| load().into_iter().chain(extra).collect::<Vec<_>>();
        let slot = seed as usize;

        let diameter = measure_max_diameter(&phantom.mask, LESION).expect("phantom has a lesion");
        let shape = analyze_shape_properties(&phantom.mask, LESION).expect("phantom has a lesion");
        let center = find_organ_center(&phantom.mask, LESION).expect("phantom has a lesion");
        let liver_center = find_organ_center(&phantom.mask, LIVER).expect("phantom has a liver");
        let mean_of = |label| {
            let values: Vec<f64> = phantom.mask.voxels_of(label).iter().map(|&i| phantom.volume.voxels()[i]).collect();
            first_order(&values).expect("nonempty label").mean
        };
        let dims = phantom.volume.dims();

        let mut push = |n: usize, scenario, case_type, query: &str, (options, key): (BTreeMap<String, String>, String), sop| {
            cases.push(TaskCase {
                id: format!("s{seed}-{n:02}"),
                scenario,
                case_type,
                volume_path: volume.clone(),
                mask_path: Some(mask.clone()),
                query: query.into(),
                options,
                answer_key: key,
                sop: Some(sop),
            });
        };

        push(
            1,
            Scenario::QA,
            CaseType::A,
            "What is the maximum diameter of the lesion?",
            numeric_options(diameter.mm, 1, slot, "mm"),
            with(vec![call("measure_max_diameter", json!({"label": LESION}))]),
        );
        push(
            2,
            Scenario::QA,
            CaseType::B,
            "What is the volume of the lesion?",
            numeric_options(shape.volume_mm3, 0, (slot + 1) % 4, "mm3"),
            with(vec![
                call("search_anatomy_names", json!({"query": "lesion"})),
                call("analyze_shape_properties", json!({"label": LESION})),
            ]),
        );
        let axial = center.voxel[2];
        push(
            3,
            Scenario::AM,
            CaseType::A,
            "Which axial slice passes through the centre of the lesion?",
            text_options(
                &[&axial.to_string(), &(axial + 6).to_string(), &(axial.saturating_sub(6)).to_string(), &(dims[2] - 1).to_string()],
                0,
            ),
            with(vec![call("find_organ_center", json!({"label": LESION}))]),
        );
        let liver_low = (liver_center.voxel[0] as f64) < dims[0] as f64 / 2.0;
        push(
            4,
            Scenario::AM,
            CaseType::B,
            "On which side of the image midline along the first axis does the liver lie?",
            text_options(&["lower indices", "higher indices", "straddles the midline"], if liver_low { 0 } else { 1 }),
            with(vec![
                call("auto_crop_body", json!({})),
                call("find_organ_center", json!({"label": LIVER})),
                call("view_ortho", json!({"point": liver_center.voxel})),
            ]),
        );
        let hypo = mean_of(LESION) < mean_of(LIVER);
        push(
            5,
            Scenario::DD,
            CaseType::B,
            "How does the lesion attenuate relative to the surrounding liver?",
            text_options(&["hyperattenuating", "hypoattenuating", "isoattenuating"], if hypo { 1 } else { 0 }),
            with(vec![
                call("analyze_hu_distribution", json!({"roi": {"label": LESION}})),
                call("analyze_hu_distribution", json!({"roi": {"label": LIVER}})),
            ]),
        );
        let round = shape.elongation > 0.8 && shape.flatness > 0.8;
        push(
            6,
            Scenario::DD,
            CaseType::C,
            "Is the lesion morphology round or elongated?",
            text_options(&["elongated", "round"], if round { 1 } else { 0 }),
            with(vec![
                call("view_slice", json!({"axis": "axial", "index": axial, "window": "liver"})),
                call("analyze_shape_properties", json!({"label": LESION})),
                call("analyze_lesion_texture", json!({"roi": {"label": LESION}})),
                call("extract_radiomics_signature", json!({"label": LESION})),
            ]),
        );
    }
    Ok(cases)
}
