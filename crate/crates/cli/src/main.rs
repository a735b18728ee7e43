use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tamer_core::channels::ChannelSpec;
use tamer_core::harness::{compare_channels, evaluate_policy, run_live_training, run_replay_training, ExperimentConfig, TrainingLog};
use tamer_core::learner::HumanRewardModel;
use tamer_core::sim::LevelSet;
use tamer_live::{AppState, SessionConfig};

#[derive(Parser)]
#[command(name = "tamer", version, about = "Train a platformer agent from human-style reward")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Experiment configuration as JSON; defaults apply to anything left out.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<ExperimentConfig> {
        match &self.config {
            Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display())),
            None => Ok(ExperimentConfig::default()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the three levels of a level seed as JSON.
    GenerateLevels {
        #[arg(long, default_value_t = tamer_core::sim::DEFAULT_LEVEL_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train online against the simulated trainer and write the log.
    TrainLive {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        env_seed: u64,
        /// Defaults to the configured run length.
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the final model here.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Retrain from a log under a feedback channel and test each checkpoint.
    Replay {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        log: PathBuf,
        /// keypress, binary, random:seed=S, noisy:p=P,seed=S, noisy:ppos=P,pneg=Q,seed=S or preset:NAME,seed=S
        #[arg(long, default_value = "keypress")]
        channel: ChannelSpec,
        /// Learning curve as CSV.
        #[arg(long)]
        out: PathBuf,
        /// Checkpoint models are written here as step-<n>.json.
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Test a saved model's greedy policy.
    Evaluate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        games: Option<usize>,
        #[arg(long)]
        seed_base: Option<u64>,
    },
    /// Replay many logs under several channels and summarize.
    Compare {
        #[command(flatten)]
        config: ConfigArg,
        /// Log files to replay.
        #[arg(long = "log")]
        logs: Vec<PathBuf>,
        /// Simulate this many training runs instead, on consecutive env seeds.
        #[arg(long)]
        simulate: Option<u64>,
        #[arg(long, default_value_t = 1)]
        env_seed_base: u64,
        /// Where to keep the simulated logs.
        #[arg(long)]
        save_logs: Option<PathBuf>,
        /// Repeat for each channel, in the order they should rank.
        #[arg(long = "channel", required = true)]
        channels: Vec<ChannelSpec>,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the live training server.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Session settings as JSON.
        #[arg(long)]
        session_config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Finished session logs are written here.
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    match Cli::parse().command {
        Command::GenerateLevels { seed, out } => {
            let levels = LevelSet::generate(seed);
            for d in 0..3u8 {
                let path = out.join(format!("level-{d}.json"));
                write(&path, &levels.get(d).to_json()?)?;
                println!("{}", path.display());
            }
        }
        Command::TrainLive { config, env_seed, steps, out, model } => {
            let config = config.load()?;
            let run = run_live_training(env_seed, &config, steps.unwrap_or(config.steps))?;
            write(&out, &run.log.to_jsonl())?;
            if let Some(path) = model {
                write(&path, &run.model.to_json())?;
            }
            println!("{} steps, {} keypresses, log {}", run.log.records.len(), run.log.event_count(), run.log.hash());
        }
        Command::Replay { config, log, channel, out, models } => {
            let config = config.load()?;
            let log = TrainingLog::read(&log)?;
            let curve = run_replay_training(&log, &channel, &config)?;
            let mut csv = String::from("step,channel,mean_score,std_score\n");
            for c in &curve.checkpoints {
                let std = tamer_core::harness::stats::std_dev(&c.scores);
                csv.push_str(&format!("{},{},{:.4},{:.4}\n", c.step, channel.label(), c.mean_score, std));
            }
            write(&out, &csv)?;
            if let Some(dir) = models {
                for c in &curve.checkpoints {
                    if let Some(m) = &c.model {
                        write(&dir.join(format!("step-{}.json", c.step)), &m.to_json())?;
                    }
                }
            }
            print!("{csv}");
        }
        Command::Evaluate { config, model, games, seed_base } => {
            let mut config = config.load()?;
            if let Some(g) = games {
                config.eval.games = g;
            }
            if let Some(s) = seed_base {
                config.eval.seed_base = s;
            }
            config.validate()?;
            let model = HumanRewardModel::from_json(&fs::read_to_string(&model)?)?;
            let levels = Arc::new(LevelSet::generate(config.level_seed));
            let eval = evaluate_policy(&model, &levels, config.physics, &config.eval);
            println!("{}", serde_json::to_string_pretty(&eval)?);
        }
        Command::Compare { config, logs, simulate, env_seed_base, save_logs, channels, csv, report } => {
            let config = config.load()?;
            let mut loaded = Vec::new();
            for p in &logs {
                loaded.push(TrainingLog::read(p).with_context(|| format!("reading {}", p.display()))?);
            }
            if let Some(n) = simulate {
                for i in 0..n {
                    let run = run_live_training(env_seed_base + i, &config, config.steps)?;
                    if let Some(dir) = &save_logs {
                        write(&dir.join(format!("log-{}.jsonl", env_seed_base + i)), &run.log.to_jsonl())?;
                    }
                    loaded.push(run.log);
                }
            }
            if loaded.is_empty() {
                bail!("nothing to compare: pass --log files or --simulate N");
            }
            let result = compare_channels(&loaded, &channels, &config)?;
            write(&csv, &result.to_csv())?;
            if let Some(path) = report {
                write(&path, &result.to_json())?;
            }
            for c in &result.channels {
                println!("{:<24} final {:>8.2} +- {:.2}", c.label, c.final_mean, c.final_std);
            }
            if let Some(o) = &result.ordering {
                println!("spearman {:.3}, last over first p = {:.4}", o.spearman, o.last_over_first.p_value);
            }
            println!("runs in ({}, {}): {:.1}%", tamer_core::harness::GAP_BAND.0, tamer_core::harness::GAP_BAND.1, 100.0 * result.gap_fraction);
        }
        Command::Serve { addr, session_config, seed, log_dir } => {
            let config = match session_config {
                Some(p) => serde_json::from_str::<SessionConfig>(&fs::read_to_string(&p)?)?,
                None => SessionConfig::default(),
            };
            let state = AppState::new(config, seed, log_dir)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&addr).await?;
                println!("listening on http://{}", listener.local_addr()?);
                axum_serve(listener, state).await
            })?;
        }
    }
    Ok(())
}

async fn axum_serve(listener: tokio::net::TcpListener, state: AppState) -> Result<()> {
    tamer_live::server::serve(listener, state).await?;
    Ok(())
}
