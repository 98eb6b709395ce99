//! Seeded option shuffling, identical on every platform.

use std::collections::BTreeMap;

use crate::manifest::{option_labels, TaskCase};

/// The splitmix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Fisher-Yates permutation of `0..n`; `perm[new] = old`.
pub fn permutation(n: usize, seed: u64, case_id: &str) -> Vec<usize> {
    let mut rng = SplitMix64::new(seed ^ fnv1a64(case_id.as_bytes()));
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    perm
}

/// Shuffled copy of `case` and the map from shown label to original label.
pub fn randomize_options(case: &TaskCase, seed: u64) -> (TaskCase, BTreeMap<String, String>) {
    let labels = option_labels(case.options.len());
    let perm = permutation(labels.len(), seed, &case.id);
    let mut out = case.clone();
    let mut key_map = BTreeMap::new();
    out.options.clear();
    for (new, &old) in perm.iter().enumerate() {
        out.options.insert(labels[new].clone(), case.options[&labels[old]].clone());
        key_map.insert(labels[new].clone(), labels[old].clone());
        if labels[old] == case.answer_key {
            out.answer_key = labels[new].clone();
        }
    }
    (out, key_map)
}
