//! Input cloud handling for the point-cloud planner: range cut, distance
//! sort, streamlining and the first-hit segment check.

use rand::seq::index::sample;
use rand::Rng;

use crate::types::{point_segment_distance, Vec3};

/// Points within `r` of `p`, sorted by increasing distance (stable on ties).
pub fn sorted_within(points: &[Vec3], p: &Vec3, r: f64) -> Vec<Vec3> {
    let mut near: Vec<(f64, Vec3)> = points
        .iter()
        .map(|q| ((q - p).norm(), *q))
        .filter(|(d, _)| *d <= r)
        .collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0));
    near.into_iter().map(|(_, q)| q).collect()
}

/// Merges two clouds that are each sorted by distance to `p`.
pub fn merge_sorted(a: &[Vec3], b: &[Vec3], p: &Vec3) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if (a[i] - p).norm() <= (b[j] - p).norm() {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Reduces a distance-sorted cloud to at most `n_use` points, keeping the
/// points most likely to be hit first: those in the near half of the range
/// or in front of the drone relative to `g_n`. A surplus of those is thinned
/// at even index spacing; a shortfall is topped up by uniform sampling from
/// the rest. The output stays sorted.
pub fn streamline<R: Rng + ?Sized>(sorted: &[Vec3], p_n: &Vec3, g_n: &Vec3, n_use: usize, rng: &mut R) -> Vec<Vec3> {
    if sorted.len() <= n_use {
        return sorted.to_vec();
    }
    let d_ft = sorted.last().map_or(0.0, |q| (q - p_n).norm());
    let ahead = g_n - p_n;
    let (priority, rest): (Vec<usize>, Vec<usize>) = (0..sorted.len()).partition(|&j| {
        let rel = sorted[j] - p_n;
        rel.norm() <= 0.5 * d_ft || rel.dot(&ahead) >= 0.0
    });
    let mut keep: Vec<usize> = if priority.len() > n_use {
        (0..n_use).map(|k| priority[k * priority.len() / n_use]).collect()
    } else {
        let extra = sample(rng, rest.len(), n_use - priority.len());
        let mut all = priority;
        all.extend(extra.into_iter().map(|k| rest[k]));
        all
    };
    keep.sort_unstable();
    keep.into_iter().map(|j| sorted[j]).collect()
}

/// First point of `cloud` (in its order) closer than `r_safe` to the segment.
pub fn collision_check_segment<'a>(a: &Vec3, b: &Vec3, cloud: &'a [Vec3], r_safe: f64) -> Option<&'a Vec3> {
    cloud.iter().find(|q| point_segment_distance(q, a, b) < r_safe)
}

/// Smallest distance from `p` to any point, `∞` for an empty cloud.
pub fn min_distance(p: &Vec3, cloud: &[Vec3]) -> f64 {
    cloud.iter().map(|q| (q - p).norm()).fold(f64::INFINITY, f64::min)
}
