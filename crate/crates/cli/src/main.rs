//! Command-line front end for the green-wave corridor toolkit.

mod manifest;
mod render;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use greenwave_core::formats::timing_table_to_csv;
use greenwave_core::sim::DirectedView;
use greenwave_core::{
    build_timing_table, eta, optimize_plan, run_scenario, Corridor, GreenbergModel, NodePlan,
    NodePlanDoc, PlacementConfig, Scenario, SimOptions, SpeedBand, TimingTable, XiThresholds,
};

use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "greenwave",
    version,
    about = "Green-wave signal timing plans and a driver-mixture microsimulation for arterial corridors"
)]
struct Cli {
    /// Write the primary output to this path instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the random seed of seeded subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the plan's cycle time, seconds.
    #[arg(long, global = true)]
    cycle_time: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the per-site signal timing table as CSV.
    Plan {
        #[arg(long)]
        corridor: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        /// Uniform ξ threshold applied during validation.
        #[arg(long, default_value_t = 0.45)]
        xi_max: f64,
    },
    /// Evaluate the RMS deviation of wave speed from the speed limit.
    Eta {
        #[arg(long)]
        corridor: PathBuf,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Search for a better node plan under speed and ξ constraints.
    Optimize {
        #[arg(long)]
        corridor: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        /// Candidate-evaluation budget.
        #[arg(long, default_value_t = 20_000)]
        iters: usize,
        /// Initial coordinate step, km.
        #[arg(long, default_value_t = 0.256)]
        step: f64,
        /// Jittered restarts beyond the seed plan.
        #[arg(long, default_value_t = 3)]
        starts: usize,
        /// Allowed wave-speed shortfall below the local limit, km/h.
        #[arg(long, default_value_t = 16.0)]
        band_below: f64,
        /// Allowed wave-speed excess above the local limit, km/h.
        #[arg(long, default_value_t = 16.0)]
        band_above: f64,
        #[arg(long, default_value_t = 0.45)]
        xi_max: f64,
        /// Write the η trace CSV here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Sweep the speed-density model and emit a (rho, u, q) CSV.
    FlowCurve {
        #[arg(long, default_value_t = 8.0)]
        rho_min: f64,
        #[arg(long, default_value_t = 115.0)]
        rho_max: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
    },
    /// Emit green-arrow positions over time and per-site phase timelines.
    Waves {
        #[arg(long)]
        corridor: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        /// End of the emitted window, seconds; defaults to one full
        /// traversal plus a cycle.
        #[arg(long)]
        t_end: Option<f64>,
        /// Sampling step for arrow positions, seconds.
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        /// Write per-site phase intervals here.
        #[arg(long)]
        phases_out: Option<PathBuf>,
    },
    /// Run a scenario and emit its metrics JSON.
    Simulate {
        #[arg(long)]
        corridor: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Also write per-vehicle (t, x) trajectories as CSV.
        #[arg(long)]
        trajectories: Option<PathBuf>,
    },
    /// Render a time-space diagram (SVG, or CSV with --csv).
    Diagram {
        #[arg(long)]
        corridor: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated vehicle indices; empty selects none, omitting
        /// the flag selects all.
        #[arg(long)]
        vehicles: Option<String>,
        /// Emit the diagram data as CSV instead of SVG.
        #[arg(long)]
        csv: bool,
        /// Dump one vehicle's trajectory as a (t, x, v, a) CSV instead of
        /// the diagram.
        #[arg(long)]
        kinematics: Option<usize>,
    },
}

enum CliError {
    /// Bad invocation or unusable inputs.
    Usage(anyhow::Error),
    /// The computation itself failed.
    Runtime(anyhow::Error),
}

fn usage<T>(r: Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::Usage)
}

fn runtime<T>(r: Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::Runtime)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            std::io::stdout()
                .write_all(content.as_bytes())
                .context("cannot write to stdout")
        }
    }
}

struct Inputs {
    corridor: Corridor,
    plan: NodePlan,
}

fn load_inputs(
    m: &mut RunManifest,
    corridor_path: &Path,
    plan_path: &Path,
    cycle_override: Option<f64>,
) -> Result<Inputs> {
    let corridor_text = m.read_input(corridor_path)?;
    let corridor = Corridor::from_csv(&corridor_text)
        .with_context(|| format!("parsing {}", corridor_path.display()))?;
    let plan_text = m.read_input(plan_path)?;
    let doc: NodePlanDoc = serde_json::from_str(&plan_text)
        .with_context(|| format!("parsing {}", plan_path.display()))?;
    let mut plan = NodePlan::resolve(&doc, &corridor)
        .with_context(|| format!("resolving {}", plan_path.display()))?;
    if let Some(cycle) = cycle_override {
        m.param("cycle_time", cycle);
        plan = plan.with_cycle_time(cycle).context("bad --cycle-time")?;
    }
    Ok(Inputs { corridor, plan })
}

fn build_table(inputs: &Inputs, xi_max: f64) -> Result<TimingTable> {
    build_timing_table(&inputs.corridor, &inputs.plan, &XiThresholds::uniform(xi_max))
        .map_err(|e| anyhow!("{e}"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Plan { corridor, plan, xi_max } => {
            let mut m = RunManifest::new("plan");
            m.param("xi_max", xi_max);
            let inputs = usage(load_inputs(&mut m, corridor, plan, cli.cycle_time))?;
            let table = usage(build_table(&inputs, *xi_max))?;
            let content = format!("{}{}", m.csv_comment(), timing_table_to_csv(&table));
            usage(write_output(&cli.out, &content))
        }
        Command::Eta { corridor, plan } => {
            let mut m = RunManifest::new("eta");
            let inputs = usage(load_inputs(&mut m, corridor, plan, cli.cycle_time))?;
            let value = usage(
                eta(&inputs.corridor, &inputs.plan).map_err(|e| anyhow!("{e}")),
            )?;
            let content = format!("{}eta_kph\n{value:.6}\n", m.csv_comment());
            usage(write_output(&cli.out, &content))?;
            eprintln!("eta = {value:.4} km/h");
            Ok(())
        }
        Command::Optimize {
            corridor,
            plan,
            iters,
            step,
            starts,
            band_below,
            band_above,
            xi_max,
            trace_out,
        } => {
            let mut m = RunManifest::new("optimize");
            let seed = cli.seed.unwrap_or(0);
            for (k, v) in [
                ("iters", *iters as f64),
                ("step", *step),
                ("starts", *starts as f64),
                ("band_below", *band_below),
                ("band_above", *band_above),
                ("xi_max", *xi_max),
                ("seed", seed as f64),
            ] {
                m.param(k, v);
            }
            let inputs = usage(load_inputs(&mut m, corridor, plan, cli.cycle_time))?;
            let config = PlacementConfig {
                speed_band: SpeedBand::RelativeToLimit {
                    below_kph: *band_below,
                    above_kph: *band_above,
                },
                xi_max: XiThresholds::uniform(*xi_max),
                max_iterations: *iters,
                step_km: *step,
                seed,
                starts: *starts,
            };
            let outcome = runtime(
                optimize_plan(&inputs.corridor, &inputs.plan, &config).map_err(|e| anyhow!("{e}")),
            )?;
            let mut doc = serde_json::to_value(outcome.plan.to_doc())
                .map_err(|e| CliError::Runtime(e.into()))?;
            doc["manifest"] = serde_json::Value::String(m.hash());
            doc["eta_kph"] = serde_json::json!(outcome.eta_kph);
            doc["feasible"] = serde_json::json!(outcome.feasible);
            let content = serde_json::to_string_pretty(&doc).unwrap() + "\n";
            usage(write_output(&cli.out, &content))?;
            if let Some(path) = trace_out {
                let mut csv = format!("{}evaluations,eta_kph,violations\n", m.csv_comment());
                for p in &outcome.trace {
                    csv.push_str(&format!(
                        "{},{:.6},{}\n",
                        p.evaluations, p.eta_kph, p.violations
                    ));
                }
                usage(write_output(&Some(path.clone()), &csv))?;
            }
            eprintln!(
                "eta {:.4} km/h, feasible: {}",
                outcome.eta_kph, outcome.feasible
            );
            Ok(())
        }
        Command::FlowCurve { rho_min, rho_max, step } => {
            let mut m = RunManifest::new("flow-curve");
            for (k, v) in [("rho_min", rho_min), ("rho_max", rho_max), ("step", step)] {
                m.param(k, v);
            }
            let model = GreenbergModel::default();
            if *rho_min < model.rho_min || *rho_max > model.rho_max || *step <= 0.0 {
                return Err(CliError::Usage(anyhow!(
                    "sweep must stay within the model domain [{}, {}] with a positive step",
                    model.rho_min,
                    model.rho_max
                )));
            }
            let mut csv = format!("{}rho_veh_per_km,u_kph,q_vphpl\n", m.csv_comment());
            let mut rho = *rho_min;
            while rho <= *rho_max + 1e-9 {
                let u = model.speed_at_density(rho).map_err(|e| CliError::Usage(e.into()))?;
                let q = rho * u;
                csv.push_str(&format!("{rho:.3},{u:.4},{q:.3}\n"));
                rho += step;
            }
            usage(write_output(&cli.out, &csv))
        }
        Command::Waves { corridor, plan, t_end, dt, phases_out } => {
            let mut m = RunManifest::new("waves");
            m.param("dt", dt);
            let inputs = usage(load_inputs(&mut m, corridor, plan, cli.cycle_time))?;
            let table = usage(build_table(&inputs, 0.5))?;
            let content = render::waves_csv(&m, &inputs.plan, *t_end, *dt)
                .map_err(CliError::Runtime)?;
            usage(write_output(&cli.out, &content))?;
            if let Some(path) = phases_out {
                let csv = render::phases_csv(&m, &table, *t_end, inputs.plan.cycle_time_s());
                usage(write_output(&Some(path.clone()), &csv))?;
            }
            Ok(())
        }
        Command::Simulate { corridor, plan, scenario, trajectories } => {
            let mut m = RunManifest::new("simulate");
            let inputs = usage(load_inputs(&mut m, corridor, plan, cli.cycle_time))?;
            let scenario_text = usage(m.read_input(scenario))?;
            let mut scenario: Scenario = usage(
                serde_json::from_str(&scenario_text)
                    .with_context(|| format!("parsing {}", scenario.display())),
            )?;
            if let Some(seed) = cli.seed {
                m.param("seed", seed);
                scenario.rng_seed = seed;
            }
            usage(scenario.validate().map_err(|e| anyhow!("{e}")))?;
            let table = usage(build_table(&inputs, 0.45))?;
            let run = runtime(
                run_scenario(
                    &inputs.corridor,
                    &inputs.plan,
                    &table,
                    &scenario,
                    &SimOptions::default(),
                )
                .map_err(|e| anyhow!("{e}")),
            )?;
            let json = render::metrics_json(&m, &run);
            usage(write_output(&cli.out, &json))?;
            if let Some(path) = trajectories {
                let view = usage(
                    DirectedView::build(&inputs.corridor, &inputs.plan, &table, scenario.direction)
                        .map_err(|e| anyhow!("{e}")),
                )?;
                let csv = render::trajectories_csv(&m, &run, &view, &inputs.plan);
                usage(write_output(&Some(path.clone()), &csv))?;
            }
            if !run.audit.clean() {
                return Err(CliError::Runtime(anyhow!(
                    "audit failed: {} obedience, {} headway, {} ordering violations",
                    run.audit.obedience_violations.len(),
                    run.audit.headway_violations,
                    run.audit.ordering_violations
                )));
            }
            Ok(())
        }
        Command::Diagram { corridor, plan, scenario, vehicles, csv, kinematics } => {
            let mut m = RunManifest::new("diagram");
            let inputs = usage(load_inputs(&mut m, corridor, plan, cli.cycle_time))?;
            let scenario_text = usage(m.read_input(scenario))?;
            let mut sc: Scenario = usage(
                serde_json::from_str(&scenario_text)
                    .with_context(|| format!("parsing {}", scenario.display())),
            )?;
            if let Some(seed) = cli.seed {
                m.param("seed", seed);
                sc.rng_seed = seed;
            }
            let table = usage(build_table(&inputs, 0.45))?;
            let run = runtime(
                run_scenario(&inputs.corridor, &inputs.plan, &table, &sc, &SimOptions::default())
                    .map_err(|e| anyhow!("{e}")),
            )?;
            let selection: Vec<usize> = match vehicles {
                None => (0..run.logs.len()).collect(),
                Some(list) if list.trim().is_empty() => Vec::new(),
                Some(list) => usage(
                    list.split(',')
                        .map(|s| {
                            s.trim()
                                .parse::<usize>()
                                .with_context(|| format!("bad vehicle index {s:?}"))
                        })
                        .collect::<Result<Vec<_>>>(),
                )?,
            };
            if let Some(&bad) = selection.iter().find(|&&i| i >= run.logs.len()) {
                return Err(CliError::Usage(anyhow!(
                    "vehicle index {bad} out of range (run has {})",
                    run.logs.len()
                )));
            }
            let content = if let Some(idx) = kinematics {
                if *idx >= run.logs.len() {
                    return Err(CliError::Usage(anyhow!(
                        "vehicle index {idx} out of range (run has {})",
                        run.logs.len()
                    )));
                }
                render::kinematics_csv(&m, &run.logs[*idx])
            } else if *csv {
                render::diagram_csv(&m, &run, &selection)
            } else {
                render::diagram_svg(&m, &run, &table, &inputs.plan, &sc, &selection)
            };
            usage(write_output(&cli.out, &content))
        }
    }
}
