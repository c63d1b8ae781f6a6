use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lightcast::files;
use lightcast::gen;
use lightcast::lamp;
use lightcast::rewardspec;
use lightcast::selfcheck;
use lightcast_core::forecast::{evaluate, Forecaster};
use lightcast_core::grid::features;
use lightcast_core::irl::{train, ModelKind, TrainConfig};
use lightcast_core::mdp::Mdp;
use lightcast_core::pipeline::run_scenario;

/// Personalized-lighting engine: learn movement rewards from
/// demonstrations, forecast resident paths, and drive zone lighting
/// through a simulated sensing pipeline.
#[derive(Parser)]
#[command(name = "lightcast", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Linear,
    Mlp,
}

#[derive(Subcommand)]
enum Command {
    /// Sample synthetic demonstrations from a declarative ground-truth
    /// reward spec.
    GenDemos {
        #[arg(long)]
        map: PathBuf,
        /// Reward spec file of `feature weight` lines.
        #[arg(long)]
        reward: PathBuf,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Minimum visited cells per demo.
        #[arg(long, default_value_t = 10)]
        min_cells: usize,
        #[arg(long, default_value_t = 0.5)]
        cell_size: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        /// Output directory; writes demos.traj.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fit a reward model to demonstrations.
    Train {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        demos: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::Linear)]
        model: ModelArg,
        #[arg(long, default_value_t = 16)]
        hidden: usize,
        #[arg(long, default_value_t = 60)]
        epochs: usize,
        #[arg(long, default_value_t = 0.05)]
        lr: f64,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        #[arg(long, default_value_t = 0.5)]
        cell_size: f64,
        /// Output directory; writes model.ckpt and loss.csv.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Score forecasts on held-out demonstrations.
    Eval {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        demos: PathBuf,
        /// Fraction of each demo that is observed.
        #[arg(long, default_value_t = 0.4)]
        obs_frac: f64,
        /// Comma-separated K values.
        #[arg(long, default_value = "20,5")]
        k: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        #[arg(long, default_value_t = 0.5)]
        cell_size: f64,
        /// Score the uniform-policy baseline instead of a checkpoint.
        #[arg(long)]
        baseline: bool,
        /// Output directory; writes metrics.csv.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Replay a scripted scenario through the sensing pipeline.
    Simulate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        profiles: PathBuf,
        /// Trained model; required when the scenario forecasts.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        #[arg(long, default_value_t = 0.5)]
        cell_size: f64,
        /// Stream commands to this lamp service (falls back to
        /// LIGHTCAST_LAMP_ADDR; offline when neither is set).
        #[arg(long)]
        lamp_addr: Option<String>,
        /// Output directory; writes events.log and latency.csv.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the lamp controller service.
    LampServe {
        /// Bind address (falls back to LIGHTCAST_LAMP_ADDR, then
        /// 127.0.0.1:4760).
        #[arg(long)]
        lamp_addr: Option<String>,
    },
    /// Run the built-in correctness checks.
    Selfcheck {
        /// Smaller instance counts, finishes in seconds.
        #[arg(long)]
        quick: bool,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::GenDemos {
            map,
            reward,
            count,
            min_cells,
            cell_size,
            seed,
            horizon,
            out,
        } => cmd_gen_demos(&map, &reward, count, min_cells, cell_size, seed, horizon, &out),
        Command::Train {
            map,
            demos,
            model,
            hidden,
            epochs,
            lr,
            batch,
            seed,
            horizon,
            cell_size,
            out,
        } => cmd_train(
            &map, &demos, model, hidden, epochs, lr, batch, seed, horizon, cell_size, &out,
        ),
        Command::Eval {
            map,
            checkpoint,
            demos,
            obs_frac,
            k,
            samples,
            points,
            seed,
            horizon,
            cell_size,
            baseline,
            out,
        } => cmd_eval(
            &map, checkpoint.as_deref(), &demos, obs_frac, &k, samples, points, seed, horizon,
            cell_size, baseline, &out,
        ),
        Command::Simulate {
            map,
            scenario,
            profiles,
            checkpoint,
            horizon,
            cell_size,
            lamp_addr,
            out,
        } => cmd_simulate(
            &map,
            &scenario,
            &profiles,
            checkpoint.as_deref(),
            horizon,
            cell_size,
            lamp_addr.as_deref(),
            &out,
        ),
        Command::LampServe { lamp_addr } => cmd_lamp_serve(lamp_addr.as_deref()),
        Command::Selfcheck { quick } => cmd_selfcheck(quick),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen_demos(
    map_path: &Path,
    reward_path: &Path,
    count: usize,
    min_cells: usize,
    cell_size: f64,
    seed: u64,
    horizon: usize,
    out: &Path,
) -> Result<()> {
    let map = files::load_map(map_path, cell_size)?;
    let mdp = Mdp::build(&map);
    let field = features(&map);
    let spec_text = std::fs::read_to_string(reward_path)
        .with_context(|| format!("reading {}", reward_path.display()))?;
    let truth = rewardspec::parse_reward_spec(&spec_text, &map, &field)?;
    let demos = gen::gen_demos(&map, &mdp, &field, &truth, count, min_cells, horizon, seed)?;
    let out_file = out.join("demos.traj");
    files::save_trajectories(&out_file, &demos, &map, &mdp)?;
    let mean = gen::mean_cells(&demos);
    let meters = mean * map.cell_size();
    println!(
        "wrote {} demos to {} (mean length {:.1} cells = {:.1} m)",
        demos.len(),
        out_file.display(),
        mean,
        meters
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    map_path: &Path,
    demos_path: &Path,
    model: ModelArg,
    hidden: usize,
    epochs: usize,
    lr: f64,
    batch: usize,
    seed: u64,
    horizon: usize,
    cell_size: f64,
    out: &Path,
) -> Result<()> {
    let map = files::load_map(map_path, cell_size)?;
    let mdp = Mdp::build(&map);
    let demos: Vec<_> = files::load_trajectories(demos_path, &map, &mdp)?
        .into_iter()
        .map(|(_, t)| t)
        .collect();
    let config = TrainConfig {
        learning_rate: lr,
        epochs,
        batch,
        seed,
        horizon,
        model: match model {
            ModelArg::Linear => ModelKind::Linear,
            ModelArg::Mlp => ModelKind::Mlp { hidden },
        },
    };
    let outcome = train(&demos, &map, &config)?;
    files::save_checkpoint(&out.join("model.ckpt"), &outcome.model)?;
    let mut csv = String::from("epoch,mean_log_likelihood\n");
    for (i, ll) in outcome.loss_curve.iter().enumerate() {
        csv.push_str(&format!("{i},{ll:.9}\n"));
    }
    files::atomic_write(&out.join("loss.csv"), &csv)?;
    println!(
        "trained on {} demos for {epochs} epochs; final mean log-likelihood {:.4}",
        demos.len(),
        outcome.loss_curve.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    map_path: &Path,
    checkpoint: Option<&Path>,
    demos_path: &Path,
    obs_frac: f64,
    k: &str,
    samples: usize,
    points: usize,
    seed: u64,
    horizon: usize,
    cell_size: f64,
    baseline: bool,
    out: &Path,
) -> Result<()> {
    let map = files::load_map(map_path, cell_size)?;
    let mdp = Mdp::build(&map);
    let field = features(&map);
    let demos = files::load_trajectories(demos_path, &map, &mdp)?;
    let examples = gen::eval_examples(&demos, obs_frac);
    if examples.is_empty() {
        bail!("no usable evaluation examples (demos too short for obs-frac {obs_frac})");
    }
    let ks: Vec<usize> = k
        .split(',')
        .map(|s| s.trim().parse().context("bad --k value"))
        .collect::<Result<_>>()?;
    let forecaster = if baseline {
        Forecaster::uniform(&map, &mdp, horizon)?
    } else {
        let path = checkpoint.context("--checkpoint is required unless --baseline is set")?;
        let model = files::load_checkpoint(path)?;
        Forecaster::from_model(&model, &map, &field, &mdp, horizon)?
    };
    let table = evaluate(&examples, &forecaster, &mdp, &ks, samples, points, seed)?;
    files::atomic_write(&out.join("metrics.csv"), &table.to_csv())?;
    print!("{}", table.to_csv());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    map_path: &Path,
    scenario_path: &Path,
    profiles_path: &Path,
    checkpoint: Option<&Path>,
    horizon: usize,
    cell_size: f64,
    lamp_addr: Option<&str>,
    out: &Path,
) -> Result<()> {
    let map = files::load_map(map_path, cell_size)?;
    let mdp = Mdp::build(&map);
    let field = features(&map);
    let scenario = files::load_scenario(scenario_path)?;
    let profiles = files::load_profiles(profiles_path)?;
    let forecaster = match checkpoint {
        Some(path) => {
            let model = files::load_checkpoint(path)?;
            Some(Forecaster::from_model(&model, &map, &field, &mdp, horizon)?)
        }
        None => None,
    };
    let report = run_scenario(&scenario, &map, &mdp, &profiles, forecaster.as_ref())?;

    let addr = lamp_addr
        .map(|a| a.to_string())
        .or_else(|| std::env::var(lamp::LAMP_ADDR_ENV).ok());
    if let Some(addr) = addr {
        let mut client = lamp::LampClient::connect(&addr)?;
        for record in &report.commands {
            client.send(&record.command)?;
        }
        println!("streamed {} commands to {addr}", report.commands.len());
    }

    files::atomic_write(&out.join("events.log"), &report.log)?;
    files::atomic_write(&out.join("latency.csv"), &report.latency_csv())?;
    println!(
        "{} log lines, {} commands, {} episodes (mean {:?} ms, max {:?} ms)",
        report.log.lines().count(),
        report.commands.len(),
        report.episodes.len(),
        report.latency_mean(),
        report.latency_max()
    );
    Ok(())
}

fn cmd_lamp_serve(lamp_addr: Option<&str>) -> Result<()> {
    let addr = lamp::resolve_addr(lamp_addr);
    let server = lamp::serve(&addr)?;
    println!("lamp service listening on {}", server.local_addr());
    loop {
        std::thread::sleep(std::time::Duration::from_secs(3600));
    }
}

fn cmd_selfcheck(quick: bool) -> Result<()> {
    let report = selfcheck::run(quick);
    print!("{}", report.render());
    if !report.all_pass() {
        std::process::exit(1);
    }
    Ok(())
}
