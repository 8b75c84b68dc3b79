//! Scenario selection and `key=value` overrides for the command line.

use clap::ValueEnum;
use serde_json::Value;

use dualplan_runtime::Scenario;
use dualplan_sim::gen::RandomWorldParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Wall world with the 3D search.
    Wall,
    /// Wall world, 2D paths only.
    Wall2d,
    Random,
    Intruder,
    TrapRest,
    TrapMoving,
}

pub fn preset(p: Preset, seed: u64) -> Scenario {
    let mut s = match p {
        Preset::Wall => Scenario::wall(true),
        Preset::Wall2d => Scenario::wall(false),
        Preset::Random => Scenario::random(seed, &RandomWorldParams::default()),
        Preset::Intruder => Scenario::intruder(seed),
        Preset::TrapRest => Scenario::trap(false),
        Preset::TrapMoving => Scenario::trap(true),
    };
    s.seed = seed;
    s
}

/// Applies `a.b.c=value` overrides. The path must name an existing field and
/// the result must deserialize back into a scenario; `value` is parsed as
/// JSON, falling back to a plain string.
pub fn apply_overrides(base: &Scenario, overrides: &[String]) -> Result<Scenario, String> {
    let mut doc = serde_json::to_value(base).map_err(|e| e.to_string())?;
    for o in overrides {
        let (key, raw) = o.split_once('=').ok_or_else(|| format!("override `{o}` is not KEY=VALUE"))?;
        let pointer = format!("/{}", key.trim().replace('.', "/"));
        let slot = doc
            .pointer_mut(&pointer)
            .ok_or_else(|| format!("unknown field `{key}`"))?;
        *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    }
    serde_json::from_value(doc).map_err(|e| format!("override does not fit the scenario: {e}"))
}
