use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dualplan_bench::cli::{apply_overrides, preset, Preset};
use dualplan_bench::export::export_plots;
use dualplan_bench::flight3d::{bench_flight3d, run_all};
use dualplan_bench::map2d::{bench_map2d, Map2dParams};
use dualplan_bench::optimizer::{bench_optimizer, InstanceParams};
use dualplan_runtime::{RunMode, Scenario};
use dualplan_sim::gen::RandomWorldParams;

#[derive(Parser)]
#[command(name = "dualplan", version, about = "Simulation runs and benchmarks for the dual-planner UAV stack")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Virtual,
    Wallclock,
}

impl From<Mode> for RunMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Virtual => RunMode::Virtual,
            Mode::Wallclock => RunMode::Wallclock,
        }
    }
}

#[derive(Args)]
struct ScenarioArgs {
    /// Built-in scenario.
    #[arg(long, value_enum, default_value = "wall")]
    scenario: Preset,
    /// Full scenario JSON; replaces --scenario.
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    /// Overrides as `path.to.field=json`, e.g. `config.pcp.v_max=0.8`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "virtual")]
    mode: Mode,
}

impl ScenarioArgs {
    fn scenarios(&self, repetitions: usize) -> Result<Vec<Scenario>, String> {
        (0..repetitions as u64)
            .map(|i| {
                let base = match &self.scenario_file {
                    Some(path) => {
                        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                        Scenario::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?
                    }
                    None => preset(self.scenario, self.seed + i),
                };
                let s = apply_overrides(&base, &self.overrides)?;
                s.validate()?;
                Ok(s)
            })
            .collect()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Global vs local vs stitched planning on large random 2D maps.
    BenchMap2d {
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 800)]
        size: usize,
        #[arg(long, default_value_t = 200)]
        local: usize,
        #[arg(long, default_value_t = 100)]
        center: usize,
        #[arg(long, default_value_t = 0.15)]
        density: f64,
        #[arg(long, default_value_t = 500.0)]
        min_distance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full-stack flights in random 3D worlds scored against the grid oracle,
    /// plus the wall-world comparison with and without the 3D search.
    BenchFlight3d {
        #[arg(long, default_value_t = 10)]
        worlds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 14)]
        n_boxes: usize,
        #[arg(long, default_value_t = 0.1)]
        oracle_resolution: f64,
        #[arg(long, value_enum, default_value = "virtual")]
        mode: Mode,
        /// Run episodes on parallel threads.
        #[arg(long)]
        parallel: bool,
        /// Write flight3d.json and plot files here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence rate of the motion solver per iteration cap.
    BenchOptimizer {
        #[arg(long, default_value_t = 10_000)]
        instances: usize,
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,80")]
        caps: Vec<usize>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One episode; writes trajectory.csv, metrics.json and events.json.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs episodes and writes plot-ready CSV/JSON with a manifest.
    Export {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Episodes with consecutive seeds.
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Prints to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_out(text: &str) -> Result<(), String> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
        _ => Ok(()),
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>, file: &str) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
            std::fs::write(dir.join(file), &text).map_err(|e| e.to_string())?;
            eprintln!("wrote {}", dir.join(file).display());
        }
        None => print_out(&text)?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::BenchMap2d {
            trials,
            seed,
            size,
            local,
            center,
            density,
            min_distance,
            out,
        } => {
            let p = Map2dParams {
                size,
                local,
                center,
                density,
                min_distance,
                ..Map2dParams::default()
            };
            let report = bench_map2d(&p, trials, seed)?;
            emit(&report, out.as_deref(), "map2d.json")
        }
        Command::BenchFlight3d {
            worlds,
            seed,
            n_boxes,
            oracle_resolution,
            mode,
            parallel,
            out,
        } => {
            let world = RandomWorldParams {
                n_boxes,
                ..RandomWorldParams::default()
            };
            let (report, episodes) =
                bench_flight3d(worlds, seed, &world, mode.into(), oracle_resolution, parallel, true).map_err(|e| e.to_string())?;
            if let Some(dir) = &out {
                export_plots(&episodes, &dir.join("episodes")).map_err(|e| e.to_string())?;
            }
            emit(&report, out.as_deref(), "flight3d.json")
        }
        Command::BenchOptimizer {
            instances,
            caps,
            tol,
            seed,
            out,
        } => {
            let report = bench_optimizer(instances, &caps, tol, &InstanceParams::default(), seed);
            emit(&report, out.as_deref(), "optimizer.json")
        }
        Command::Run { scenario, out } => {
            let s = scenario.scenarios(1)?.remove(0);
            let ep = dualplan_runtime::run_episode(&s, scenario.mode.into()).map_err(|e| e.to_string())?;
            if let Some(dir) = &out {
                ep.write_to(dir).map_err(|e| e.to_string())?;
                eprintln!("wrote {}", dir.display());
            }
            print_out(&ep.metrics_json())
        }
        Command::Export {
            scenario,
            repetitions,
            parallel,
            out,
        } => {
            let scenarios = scenario.scenarios(repetitions)?;
            let runs = run_all(&scenarios, scenario.mode.into(), None, parallel).map_err(|e| e.to_string())?;
            let episodes: Vec<_> = runs.into_iter().map(|(ep, _)| ep).collect();
            let manifest = export_plots(&episodes, &out).map_err(|e| e.to_string())?;
            emit(&manifest, None, "")
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
