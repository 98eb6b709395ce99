//! Vessel centerline as a distance-transform-weighted shortest path.
//!
//! The path joins the endpoints of the label's maximum diameter. Entering a
//! voxel costs `1 / (1 + dt)^2`, where `dt` is its distance (mm) to the
//! nearest non-label voxel, so cheap routes hug the medial ridge.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Error, Result};
use crate::volume::{linear_index, voxel_of, Voxel};

use super::edt::distance_inside;
use super::mask::MaskVolume;
use super::measure::{measure_max_diameter, neighbors26};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    idx: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // reversed for a min-heap; ties pop the lower linear index first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Per-voxel entry cost used by the path search (infinite off-label).
pub fn step_costs(mask: &MaskVolume, label: u32) -> Vec<f64> {
    let inside = mask.indicator(label);
    let dt = distance_inside(mask.dims(), mask.spacing(), &inside, true);
    inside
        .iter()
        .zip(&dt)
        .map(|(&on, &d)| if on { 1.0 / (1.0 + d).powi(2) } else { f64::INFINITY })
        .collect()
}

fn is_26_connected(mask: &MaskVolume, label: u32, voxels: &[usize]) -> bool {
    let dims = mask.dims();
    let labels = mask.labels();
    let mut seen = vec![false; labels.len()];
    let mut queue = VecDeque::from([voxels[0]]);
    seen[voxels[0]] = true;
    let mut reached = 0;
    while let Some(idx) = queue.pop_front() {
        reached += 1;
        for n in neighbors26(dims, voxel_of(dims, idx)) {
            let ni = linear_index(dims, n);
            if labels[ni] == label && !seen[ni] {
                seen[ni] = true;
                queue.push_back(ni);
            }
        }
    }
    reached == voxels.len()
}

/// Ordered voxel path from the first to the second max-diameter endpoint.
pub fn extract_vessel_centerline(mask: &MaskVolume, label: u32) -> Result<Vec<Voxel>> {
    let voxels = mask.require(label)?;
    if !is_26_connected(mask, label, &voxels) {
        return Err(Error::DisconnectedLabel(label));
    }
    let [start, goal] = measure_max_diameter(mask, label)?.endpoints;
    let dims = mask.dims();
    let costs = step_costs(mask, label);
    let (s, g) = (linear_index(dims, start), linear_index(dims, goal));

    let mut dist = vec![f64::INFINITY; costs.len()];
    let mut prev = vec![usize::MAX; costs.len()];
    let mut heap = BinaryHeap::new();
    dist[s] = costs[s];
    heap.push(Entry { cost: dist[s], idx: s });
    while let Some(Entry { cost, idx }) = heap.pop() {
        if cost > dist[idx] {
            continue;
        }
        if idx == g {
            break;
        }
        for n in neighbors26(dims, voxel_of(dims, idx)) {
            let ni = linear_index(dims, n);
            let next = cost + costs[ni];
            if next < dist[ni] {
                dist[ni] = next;
                prev[ni] = idx;
                heap.push(Entry { cost: next, idx: ni });
            }
        }
    }

    let mut path = vec![goal];
    let mut cur = g;
    while cur != s {
        cur = prev[cur];
        path.push(voxel_of(dims, cur));
    }
    path.reverse();
    Ok(path)
}
