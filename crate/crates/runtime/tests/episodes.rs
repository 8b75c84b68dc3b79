use dualplan_runtime::{run_episode, Outcome, RunMode, Scenario};
use dualplan_sim::gen::RandomWorldParams;

#[test]
fn wall_episode_reaches_the_goal_and_writes_outputs() {
    let s = Scenario::wall(true);
    let ep = run_episode(&s, RunMode::Virtual).unwrap();
    assert_eq!(ep.outcome(), Outcome::GoalReached);
    let m = &ep.metrics;
    assert!(m.min_obstacle_distance > s.drone_radius);
    assert!(m.path_length >= m.straight_line - s.goal_tolerance);
    assert!(m.replans > 0 && m.pcp_steps > 0);
    assert!(m.timings.is_none(), "virtual metrics carry no wall timings");
    let end = ep.positions().last().copied().unwrap();
    assert!((end - s.goal).norm() <= s.goal_tolerance);

    assert!(ep.trajectory.windows(2).all(|w| w[0].time < w[1].time));
    assert!(ep.events.windows(2).all(|w| w[0].time <= w[1].time));
    assert_eq!(ep.events_named("goal_reached").count(), 1);

    let dir = tempfile::tempdir().unwrap();
    ep.write_to(dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), ep.trajectory.len() + 1);
    assert!(csv.starts_with("t,x,y,z,vx,vy,vz,mode\n"));
    let metrics: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["outcome"], serde_json::json!("goal_reached"));
    let events: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("events.json")).unwrap()).unwrap();
    assert_eq!(events.as_array().unwrap().len(), ep.events.len());
}

#[test]
fn virtual_runs_depend_only_on_the_scenario() {
    let p = RandomWorldParams::default();
    let a = run_episode(&Scenario::random(4, &p), RunMode::Virtual).unwrap();
    let b = run_episode(&Scenario::random(4, &p), RunMode::Virtual).unwrap();
    assert_eq!(a.trajectory_csv(), b.trajectory_csv());
    assert_eq!(a.events_json(), b.events_json());
    assert_eq!(a.metrics_json(), b.metrics_json());
    let c = run_episode(&Scenario::random(5, &p), RunMode::Virtual).unwrap();
    assert_ne!(a.trajectory_csv(), c.trajectory_csv());
}

#[test]
fn scenario_files_reproduce_the_preset() {
    let s = Scenario::intruder(1);
    let reloaded = Scenario::from_json(&s.to_json()).unwrap();
    assert_eq!(reloaded, s);
    let a = run_episode(&s, RunMode::Virtual).unwrap();
    let b = run_episode(&reloaded, RunMode::Virtual).unwrap();
    assert_eq!(a.trajectory_csv(), b.trajectory_csv());
}

#[test]
fn invalid_scenarios_are_rejected_before_running() {
    let mut s = Scenario::wall(true);
    s.config.pcp.v_max = -1.0;
    assert!(run_episode(&s, RunMode::Virtual).is_err());
}

#[test]
fn wallclock_run_flies_and_reports_timings() {
    let mut s = Scenario::wall(true);
    s.timeout = 1.5;
    let ep = run_episode(&s, RunMode::Wallclock).unwrap();
    assert_ne!(ep.outcome(), Outcome::Collision);
    assert!(!ep.trajectory.is_empty());
    assert!(ep.trajectory.windows(2).all(|w| w[0].time <= w[1].time));
    assert!(ep.metrics.flight_time <= s.timeout + 0.5);
    let t = ep.metrics.timings.as_ref().expect("wall-clock runs report timings");
    assert!(t.pcp_mean_ms > 0.0 && t.pcp_max_ms >= t.pcp_mean_ms);
    assert!(!ep.step_times.pcp.is_empty());
    let moved = (ep.positions().last().unwrap() - s.start).norm();
    assert!(moved > 0.1, "drone moved only {moved:.3} m in {} s", s.timeout);
}

/// The map planner only publishes a new path when the old one is missing,
/// was a lifted 2D path, has been flown to its end short of the goal, or now
/// collides with the map.
#[test]
fn replans_happen_only_for_a_logged_reason() {
    use dualplan_core::PathKind;
    use dualplan_sim::EventKind;

    let p = RandomWorldParams::default();
    for s in [Scenario::wall(true), Scenario::random(0, &p), Scenario::random(1, &p), Scenario::intruder(0)] {
        let ep = run_episode(&s, RunMode::Virtual).unwrap();
        let mut previous: Option<PathKind> = None;
        for e in &ep.events {
            if let EventKind::MpReplan { reason, path_kind, .. } = &e.kind {
                let expected = match previous {
                    None => reason == "absent",
                    Some(PathKind::Lifted2D) => reason == "no_3d_path",
                    Some(PathKind::Spatial3D) => reason == "consumed" || reason == "collision",
                };
                assert!(expected, "{}: replan at t={:.3} after {previous:?} gave reason {reason}", s.name, e.time);
                previous = Some(*path_kind);
            }
        }
        assert!(previous.is_some(), "{}: no plan was ever published", s.name);
    }
}
