//! Full-stack flight benchmark: episodes against the ground-truth world,
//! scored by the grid oracle.

use serde::{Deserialize, Serialize};

use dualplan_core::PathKind;
use dualplan_runtime::{run_episode, EpisodeResult, Outcome, RunMode, RuntimeError, Scenario};
use dualplan_sim::gen::RandomWorldParams;
use dualplan_sim::EventKind;

use crate::oracle::{oracle_shortest_path, OracleParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeStats {
    pub count: usize,
    pub mean_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

impl TimeStats {
    pub fn from_seconds(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self {
                count: 0,
                mean_ms: 0.0,
                p95_ms: 0.0,
                max_ms: 0.0,
            };
        }
        let mut s: Vec<f64> = xs.iter().map(|x| x * 1e3).collect();
        s.sort_by(f64::total_cmp);
        let idx = ((s.len() as f64 * 0.95).ceil() as usize).clamp(1, s.len()) - 1;
        Self {
            count: s.len(),
            mean_ms: s.iter().sum::<f64>() / s.len() as f64,
            p95_ms: s[idx],
            max_ms: s[s.len() - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub seed: u64,
    pub outcome: Outcome,
    /// Flown length plus the leftover distance to the goal, so runs that stop
    /// inside the goal tolerance are not credited for it.
    pub len_actual: f64,
    pub len_oracle: Option<f64>,
    /// `(len_actual − len_oracle) / len_oracle`.
    pub eta: Option<f64>,
    pub min_obstacle_distance: f64,
    pub collisions: usize,
    pub backup_activations: usize,
    pub replans: usize,
    pub plans_3d: usize,
    /// Measured planner step times; wall-clock runs only, so virtual reports
    /// stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mp_time: Option<TimeStats>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pcp_time: Option<TimeStats>,
}

/// The oracle's clearance: the least true clearance the planner keeps when
/// it holds `r_safe` from voxel centers (a surface point can sit up to half
/// a voxel diagonal from its center).
pub fn planner_clearance(s: &Scenario) -> f64 {
    s.config.pcp.r_safe - s.config.map.voxel_size * 3f64.sqrt() / 2.0
}

pub fn oracle_params(s: &Scenario, resolution: f64) -> OracleParams {
    OracleParams {
        resolution,
        clearance: planner_clearance(s),
        z_min: s.config.pcp.z_min,
        z_max: s.config.pcp.z_max,
    }
}

pub fn score(s: &Scenario, ep: &EpisodeResult, oracle_resolution: Option<f64>) -> MetricsReport {
    let m = &ep.metrics;
    let end = ep.trajectory.last().map(|r| r.position).unwrap_or(s.start);
    let len_actual = m.path_length + (s.goal - end).norm();
    let timed = m.mode == RunMode::Wallclock;
    let len_oracle = oracle_resolution
        .and_then(|res| oracle_shortest_path(&s.world, &s.start, &s.goal, &oracle_params(s, res)).ok())
        .map(|o| o.length);
    MetricsReport {
        scenario: s.name.clone(),
        seed: s.seed,
        outcome: m.outcome,
        len_actual,
        eta: len_oracle.map(|o| (len_actual - o) / o),
        len_oracle,
        min_obstacle_distance: m.min_obstacle_distance,
        collisions: usize::from(m.outcome == Outcome::Collision),
        backup_activations: m.backup_steer + m.backup_brake,
        replans: m.replans,
        plans_3d: m.plans_3d,
        mp_time: timed.then(|| TimeStats::from_seconds(&ep.step_times.mp)),
        pcp_time: timed.then(|| TimeStats::from_seconds(&ep.step_times.pcp)),
    }
}

/// One episode, scored. Failures are part of the report, not errors.
pub fn run_flight(s: &Scenario, mode: RunMode, oracle_resolution: Option<f64>) -> Result<(EpisodeResult, MetricsReport), RuntimeError> {
    let ep = run_episode(s, mode)?;
    let report = score(s, &ep, oracle_resolution);
    Ok((ep, report))
}

/// Runs every scenario, on scoped threads when `parallel` (episodes share
/// nothing). Output order follows the input.
pub fn run_all(
    scenarios: &[Scenario],
    mode: RunMode,
    oracle_resolution: Option<f64>,
    parallel: bool,
) -> Result<Vec<(EpisodeResult, MetricsReport)>, RuntimeError> {
    if !parallel {
        return scenarios.iter().map(|s| run_flight(s, mode, oracle_resolution)).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| scope.spawn(move || run_flight(s, mode, oracle_resolution)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("episode thread panicked")).collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagsComparison {
    pub len_with: f64,
    pub len_without: f64,
    /// `1 − len_with / len_without`.
    pub shortening: f64,
    pub outcome_with: Outcome,
    pub outcome_without: Outcome,
    /// Number of 3D paths the map planner emitted in the run with DAGS.
    pub paths_3d: usize,
    /// Smallest clearance of an emitted 3D path from the local map it was
    /// planned on.
    pub min_3d_clearance: f64,
    pub r_safe: f64,
}

/// The wall world flown with and without the angular 3D search.
pub fn dags_comparison(mode: RunMode) -> Result<DagsComparison, RuntimeError> {
    let with = Scenario::wall(true);
    let without = Scenario::wall(false);
    let a = run_episode(&with, mode)?;
    let b = run_episode(&without, mode)?;
    let clearances: Vec<f64> = a
        .events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::MpReplan {
                path_kind: PathKind::Spatial3D,
                clearance,
                ..
            } => Some(*clearance),
            _ => None,
        })
        .collect();
    let (la, lb) = (a.metrics.path_length, b.metrics.path_length);
    Ok(DagsComparison {
        len_with: la,
        len_without: lb,
        shortening: 1.0 - la / lb,
        outcome_with: a.outcome(),
        outcome_without: b.outcome(),
        paths_3d: clearances.len(),
        min_3d_clearance: clearances.iter().copied().fold(f64::INFINITY, f64::min),
        r_safe: with.config.mp.dags.r_safe,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flight3dReport {
    pub schema: u32,
    pub mode: RunMode,
    pub world: RandomWorldParams,
    pub oracle_resolution: f64,
    pub reports: Vec<MetricsReport>,
    /// Mean η over the episodes that have an oracle length.
    pub mean_eta: Option<f64>,
    pub min_eta: Option<f64>,
    pub collisions: usize,
    pub goals_reached: usize,
    pub dags: Option<DagsComparison>,
}

/// Random worlds seeded `seed..seed + n`, plus the wall comparison when
/// `with_dags_comparison`.
pub fn bench_flight3d(
    n: usize,
    seed: u64,
    world: &RandomWorldParams,
    mode: RunMode,
    oracle_resolution: f64,
    parallel: bool,
    with_dags_comparison: bool,
) -> Result<(Flight3dReport, Vec<EpisodeResult>), RuntimeError> {
    let scenarios: Vec<Scenario> = (0..n as u64).map(|i| Scenario::random(seed + i, world)).collect();
    let runs = run_all(&scenarios, mode, Some(oracle_resolution), parallel)?;
    let (episodes, reports): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let etas: Vec<f64> = reports.iter().filter_map(|r| r.eta).collect();
    let report = Flight3dReport {
        schema: 1,
        mode,
        world: *world,
        oracle_resolution,
        mean_eta: (!etas.is_empty()).then(|| etas.iter().sum::<f64>() / etas.len() as f64),
        min_eta: etas.iter().copied().reduce(f64::min),
        collisions: reports.iter().map(|r| r.collisions).sum(),
        goals_reached: reports.iter().filter(|r| r.outcome == Outcome::GoalReached).count(),
        reports,
        dags: if with_dags_comparison { Some(dags_comparison(mode)?) } else { None },
    };
    Ok((report, episodes))
}
