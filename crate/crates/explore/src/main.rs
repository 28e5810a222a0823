use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ipp_core::harness::{
    emit_outputs, read_path_csv, render_svg, run_experiment, scenario, write_run, write_summary, ExperimentResult,
    ScenarioSpec, Settings,
};
use ipp_core::load_map;
use ipp_core::planner::PlannerRegistry;

#[derive(Parser)]
#[command(
    name = "explore",
    version,
    about = "Grid-world exploration planners and their benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explore an unknown map online with one seed.
    Hipp {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Solve the remapping benchmark on a known map.
    Posterior {
        #[command(flatten)]
        run: RunArgs,
        /// Initial waypoint count.
        #[arg(long, default_value_t = 12)]
        waypoints: usize,
        /// Free-arc generations.
        #[arg(long, default_value_t = 100)]
        generations: usize,
    },
    /// Run both planners over seeded runs of a built-in scenario.
    Compare {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        scenario: u8,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        /// First seed; runs use consecutive seeds.
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Draw a trace or solution CSV over its map as SVG.
    Render {
        trace: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Flat `key = value` settings file.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn load_settings(path: Option<&Path>) -> Result<Settings> {
    match path {
        None => Ok(Settings::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Settings::parse(&text).with_context(|| format!("in {}", p.display()))
        }
    }
}

fn load_scenario(path: &Path) -> Result<ScenarioSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let map = load_map(&text).with_context(|| format!("parsing {}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "map".into());
    Ok(ScenarioSpec::from_map(name, map)?)
}

/// One seeded run written straight into `out`.
fn single_run(planner: &str, run: &RunArgs, settings: Settings) -> Result<()> {
    let scen = load_scenario(&run.map)?;
    let registry = PlannerRegistry::with_defaults(&settings);
    let result = run_experiment(registry.get(planner)?, &scen, 1, run.seed)?;
    fs::create_dir_all(&run.out).with_context(|| format!("creating {}", run.out.display()))?;
    write_summary(&run.out.join("summary.csv"), std::slice::from_ref(&result))?;
    let r = &result.runs[0];
    write_run(&run.out, &result.map, r)?;
    let s = &r.summary;
    println!(
        "{planner} {} seed {}: {} steps, {:.3} m, {} cells identified, {:.3} cells/m",
        scen.name, s.seed, s.steps, s.ttd_m, s.identified_cells, s.cells_per_td
    );
    Ok(())
}

fn compare(number: u8, runs: usize, base_seed: u64, out: &Path, settings: Settings) -> Result<()> {
    let scen = scenario(number as usize)?;
    let registry = PlannerRegistry::with_defaults(&settings);
    let results: Vec<ExperimentResult> = registry
        .names()
        .into_iter()
        .map(|name| run_experiment(registry.get(name)?, &scen, runs, base_seed))
        .collect::<ipp_core::Result<_>>()?;
    emit_outputs(&results, out)?;
    for r in &results {
        let a = &r.aggregate;
        println!(
            "{:<9} {}: ttd {:.3} m, cells {:.1}, cells/m {:.3} (std {:.3}), equivalent cells/m {:.3}",
            r.planner,
            r.scenario,
            a.ttd_m.mean,
            a.identified_cells.mean,
            a.cells_per_td.mean,
            a.cells_per_td.std,
            a.equivalent_cells_per_td.mean
        );
    }
    let by = |n: &str| results.iter().find(|r| r.planner == n).map(|r| &r.aggregate);
    if let (Some(h), Some(p)) = (by("hipp"), by("posterior")) {
        println!(
            "relative efficiency {:.3}",
            h.equivalent_cells_per_td.mean / p.cells_per_td.mean
        );
    }
    Ok(())
}

fn render(trace: &Path, map_path: &Path, output: &Path) -> Result<()> {
    let scen = load_scenario(map_path)?;
    let (line, waypoints) = read_path_csv(trace, scen.map.cell_width())?;
    let svg = render_svg(&scen.map, &line, &[], &waypoints);
    fs::write(output, svg).with_context(|| format!("writing {}", output.display()))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Hipp { run } => {
            let settings = load_settings(run.config.as_deref())?;
            single_run("hipp", &run, settings)
        }
        Command::Posterior {
            run,
            waypoints,
            generations,
        } => {
            let settings = Settings {
                waypoints,
                generations,
                ..load_settings(run.config.as_deref())?
            };
            single_run("posterior", &run, settings)
        }
        Command::Compare {
            scenario,
            runs,
            base_seed,
            out,
            config,
        } => compare(scenario, runs, base_seed, &out, load_settings(config.as_deref())?),
        Command::Render { trace, map, output } => render(&trace, &map, &output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
