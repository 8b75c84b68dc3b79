//! Plot-ready files for finished episodes: trajectory and timing series as
//! CSV, metrics as JSON, and a manifest tying them together.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dualplan_runtime::EpisodeResult;

/// Histogram bin width for planner step times, milliseconds.
pub const TIMING_BIN_MS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_ms: f64,
    /// `counts[i]` covers `[i·bin_ms, (i+1)·bin_ms)`.
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn from_seconds(xs: &[f64], bin_ms: f64) -> Self {
        let mut counts = Vec::new();
        for x in xs {
            let i = ((x * 1e3 / bin_ms).floor().max(0.0)) as usize;
            if counts.len() <= i {
                counts.resize(i + 1, 0);
            }
            counts[i] += 1;
        }
        Self { bin_ms, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_start_ms,bin_end_ms,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let lo = i as f64 * self.bin_ms;
            writeln!(s, "{:.3},{:.3},{c}", lo, lo + self.bin_ms).expect("write to string");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub trajectory_csv: PathBuf,
    pub metrics_json: PathBuf,
    pub pcp_timing_csv: PathBuf,
    pub mp_timing_csv: PathBuf,
    pub pcp_steps: usize,
    pub mp_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub episodes: Vec<ManifestEntry>,
}

/// Writes one subdirectory per episode under `dir` plus `manifest.json`.
/// Paths in the manifest are relative to `dir`.
pub fn export_plots(results: &[EpisodeResult], dir: &Path) -> std::io::Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let mut episodes = Vec::with_capacity(results.len());
    for (i, ep) in results.iter().enumerate() {
        let name = format!("{:03}-{}", i, ep.metrics.scenario);
        let sub = PathBuf::from(&name);
        std::fs::create_dir_all(dir.join(&sub))?;
        let entry = ManifestEntry {
            trajectory_csv: sub.join("trajectory.csv"),
            metrics_json: sub.join("metrics.json"),
            pcp_timing_csv: sub.join("pcp_timing.csv"),
            mp_timing_csv: sub.join("mp_timing.csv"),
            pcp_steps: ep.step_times.pcp.len(),
            mp_steps: ep.step_times.mp.len(),
            name,
        };
        std::fs::write(dir.join(&entry.trajectory_csv), ep.trajectory_csv())?;
        std::fs::write(dir.join(&entry.metrics_json), ep.metrics_json())?;
        let pcp = Histogram::from_seconds(&ep.step_times.pcp, TIMING_BIN_MS);
        std::fs::write(dir.join(&entry.pcp_timing_csv), pcp.to_csv())?;
        let mp = Histogram::from_seconds(&ep.step_times.mp, TIMING_BIN_MS);
        std::fs::write(dir.join(&entry.mp_timing_csv), mp.to_csv())?;
        episodes.push(entry);
    }
    let manifest = Manifest { schema: 1, episodes };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_conserves_counts() {
        let xs = [0.0, 0.0004, 0.0005, 0.0031, 0.016, 0.0161];
        let h = Histogram::from_seconds(&xs, 0.5);
        assert_eq!(h.total(), xs.len());
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[32], 2);
        assert_eq!(h.to_csv().lines().count(), h.counts.len() + 1);
    }

    #[test]
    fn empty_input_gives_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let m = export_plots(&[], dir.path()).unwrap();
        assert!(m.episodes.is_empty());
        let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        assert_eq!(serde_json::from_str::<Manifest>(&text).unwrap(), m);
    }
}
