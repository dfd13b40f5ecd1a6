use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use peghole::agents::load_checkpoint;
use peghole::augment::AugSpec;
use peghole::env::Env;
use peghole::harness::{
    augment_preview, evaluate, parse_config, preset_names, render_preview, render_table, run_preset, train_to_dir,
    ExperimentConfig, HarnessError, Policy, PoseFile, Protocol, OUTPUT_ENV_VAR,
};

#[derive(Parser)]
#[command(name = "phrl", version, about = "Peg-in-hole insertion: training, evaluation and previews")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent from an experiment file.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the fixed-pose evaluation for a checkpoint or the classical baseline.
    Eval(EvalArgs),
    /// Run a named experiment preset.
    Preset {
        name: String,
        /// Override every run's step budget (smoke runs).
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Write a contact sheet of an augmentation spec applied to an image.
    AugmentPreview {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render the camera view for a scene described in a pose file.
    RenderPreview {
        #[arg(long)]
        pose_file: PathBuf,
    },
}

#[derive(Args)]
#[command(group(ArgGroup::new("policy").required(true).args(["checkpoint", "baseline"])))]
struct EvalArgs {
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    baseline: bool,
    #[arg(long)]
    protocol: Option<PathBuf>,
    /// Experiment file for the environment; defaults to `config.toml` beside the checkpoint.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn output_root(default: &Path) -> PathBuf {
    std::env::var_os(OUTPUT_ENV_VAR)
        .filter(|v| !v.is_empty())
        .map_or_else(|| default.to_path_buf(), PathBuf::from)
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Train { config, seed } => {
            let mut cfg = parse_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let name = if cfg.name.is_empty() { "train".to_string() } else { cfg.name.clone() };
            let dir = cfg.resolved_output_dir().join(format!("{name}-s{}", cfg.seed));
            let run = train_to_dir(&cfg, &dir, |row| {
                eprintln!(
                    "step {:>7}  return {:>8.2}  success {:>5.1}%",
                    row.step,
                    row.mean_return,
                    100.0 * row.success_rate
                )
            })?;
            println!("checkpoint {}", run.checkpoint.display());
            println!("curve {}", run.curve.display());
        }
        Command::Eval(args) => {
            let protocol = match &args.protocol {
                Some(p) => Protocol::load(p)?,
                None => Protocol::default(),
            };
            let config_path = args.config.clone().or_else(|| {
                args.checkpoint
                    .as_ref()
                    .and_then(|c| c.parent())
                    .map(|d| d.join("config.toml"))
                    .filter(|p| p.exists())
            });
            let cfg = match &config_path {
                Some(p) => parse_config(p)?,
                None if args.baseline => ExperimentConfig::default(),
                None => {
                    return Err(HarnessError::Validation(
                        "config: no config.toml beside the checkpoint; pass --config".into(),
                    ))
                }
            };
            let env = Env::new(cfg.env.clone())?;
            let (report, label) = if let Some(ckpt) = &args.checkpoint {
                let agent = load_checkpoint(ckpt)?;
                (evaluate(&env, Policy::Agent(&agent), &protocol, "agent")?, "agent")
            } else {
                (evaluate(&env, Policy::Baseline(&cfg.baseline), &protocol, "baseline")?, "baseline")
            };
            let dir = cfg.resolved_output_dir().join(format!("eval-{label}"));
            std::fs::create_dir_all(&dir)?;
            report.write_episodes_csv(std::fs::File::create(dir.join("episodes.csv"))?)?;
            report.write_summary_csv(std::fs::File::create(dir.join("summary.csv"))?)?;
            let table = render_table(&[(label.to_string(), report.aggregate)]);
            std::fs::write(dir.join("table.txt"), &table)?;
            print!("{table}");
            println!("written to {}", dir.display());
        }
        Command::Preset { name, steps } => {
            if !preset_names().contains(&name.as_str()) {
                eprintln!("known presets: {}", preset_names().join(", "));
                return Err(HarnessError::UnknownPreset(name));
            }
            let out = output_root(Path::new("runs"));
            let report = run_preset(&name, &out, steps, |line| eprintln!("{line}"))?;
            print!("{}", report.text);
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::AugmentPreview { input, spec, seed } => {
            let text = std::fs::read_to_string(&spec)?;
            let stem = spec.file_stem().map_or("spec".into(), |s| s.to_string_lossy().into_owned());
            let spec: AugSpec = toml::from_str(&text).map_err(|e| HarnessError::Parse(e.message().to_string()))?;
            let depth_max = ExperimentConfig::default().env.intrinsics.depth_max as f32;
            let dir = output_root(Path::new("runs")).join("augment-preview").join(stem);
            let (path, labels) = augment_preview(&input, &spec, seed, depth_max, &dir)?;
            println!("tiles (row-major, 4 per row): {}", labels.join(", "));
            println!("wrote {}", path.display());
        }
        Command::RenderPreview { pose_file } => {
            let pose = PoseFile::load(&pose_file)?;
            let cfg = match &pose.config {
                Some(p) => parse_config(p)?,
                None => ExperimentConfig::default(),
            };
            let env = Env::new(cfg.env.clone())?;
            let dir = output_root(Path::new("runs")).join("render-preview");
            let (files, status) = render_preview(&env, &pose, &dir)?;
            println!("{status}");
            for f in files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
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
