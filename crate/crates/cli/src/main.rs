use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::Ordering;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use semnav::bridge::{BridgeConfig, Server, DEFAULT_PORT};
use semnav::keyframe::{self, KeyframeModel, TrainConfig};
use semnav::labels::NUM_CLASSES;
use semnav::nn::miou;
use semnav::pgm::load_semantic_map_lenient;
use semnav::sim::{self, templates, EpisodeConfig, Outcome, RawScenario};

#[derive(Parser)]
#[command(name = "semnav", version, about = "Semantic-aware UAV navigation: simulate, evaluate, serve")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fly one episode and write its run CSV.
    ///
    /// Exit status: 0 reached, 2 timeout or stuck in recovery, 1 error.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// KEY=VALUE, where KEY is `section.key` or a key unique across sections.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Recompute flight and unreliable distance of a run CSV.
    Metrics {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Mean IoU of a predicted label map against a reference (both PGM).
    Miou { pred: PathBuf, reference: PathBuf },
    /// Train the keyframe classifier on a directory of PGMs plus labels.txt.
    KeyframeTrain {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 0.5)]
        lr: f64,
        #[arg(long, default_value_t = 4)]
        patch: usize,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Evaluate keyframe weights on a labelled directory.
    ///
    /// Prints accuracy and the true-positive rate on "Yes" frames. For
    /// reference, the original keyframe model reported accuracy 0.72 and a
    /// Yes-class true-positive rate of 0.83 on its (unavailable) dataset.
    KeyframeEval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        weights: PathBuf,
    },
    /// Serve the planner over TCP (newline-delimited JSON) until interrupted.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Generate a synthetic world: PREFIX.pgm, PREFIX.meta and PREFIX.toy.
    MakeWorld {
        /// One of: village, bay.
        #[arg(long)]
        template: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_prefix: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SEMNAV_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", render(&e));
            ExitCode::from(1)
        }
    }
}

/// Error chain on one line, skipping causes the outer message already quotes.
fn render(e: &anyhow::Error) -> String {
    let mut out = e.to_string();
    for cause in e.chain().skip(1) {
        let c = cause.to_string();
        if !out.contains(&c) {
            out.push_str(": ");
            out.push_str(&c);
        }
    }
    out
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run {
            scenario,
            out,
            overrides,
        } => cmd_run(&scenario, &out, &overrides),
        Command::Metrics { run, scenario } => cmd_metrics(&run, &scenario),
        Command::Miou { pred, reference } => cmd_miou(&pred, &reference),
        Command::KeyframeTrain {
            data,
            out,
            epochs,
            lr,
            patch,
            threshold,
        } => cmd_keyframe_train(
            &data,
            &out,
            &TrainConfig {
                patch_size: patch,
                epochs,
                learning_rate: lr,
                threshold,
            },
        ),
        Command::KeyframeEval { data, weights } => cmd_keyframe_eval(&data, &weights),
        Command::Serve { port, scenario } => cmd_serve(port, &scenario),
        Command::MakeWorld {
            template,
            seed,
            out_prefix,
        } => cmd_make_world(&template, seed, &out_prefix),
    }
}

fn load_keyframe(path: Option<&Path>) -> Result<Option<KeyframeModel>> {
    path.map(|p| KeyframeModel::load(p).with_context(|| format!("loading keyframe weights {}", p.display())))
        .transpose()
}

fn cmd_run(scenario: &Path, out: &Path, overrides: &[String]) -> Result<ExitCode> {
    let mut raw = RawScenario::load(scenario)?;
    for o in overrides {
        raw.apply_override(o)?;
    }
    let (scn, world) = sim::load_raw_scenario(raw)?;
    let keyframe = load_keyframe(scn.keyframe_weights.as_deref())?;
    let record = sim::run_episode(&world, &EpisodeConfig::from_scenario(&scn), keyframe.as_ref())?;
    let comment = format!(
        "outcome={} world={} {}",
        record.outcome,
        record.world_name,
        sim::planner_summary(&scn.planner)
    );
    sim::export_run_with_comment(&record, out, &comment)?;
    let m = sim::compute_metrics(&record.steps, &world);
    println!(
        "outcome={} flight_distance={:.6} unreliable_distance={:.6}",
        record.outcome, m.flight_distance, m.unreliable_distance
    );
    Ok(match record.outcome {
        Outcome::Reached => ExitCode::SUCCESS,
        Outcome::Timeout | Outcome::RecoveryStuck => ExitCode::from(2),
    })
}

fn cmd_metrics(run: &Path, scenario: &Path) -> Result<ExitCode> {
    let (_, world) = sim::load_scenario(scenario)?;
    let parsed = sim::read_run(run)?;
    let m = sim::compute_metrics(&parsed.steps, &world);
    println!(
        "flight_distance={:.6} unreliable_distance={:.6}",
        m.flight_distance, m.unreliable_distance
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_miou(pred: &Path, reference: &Path) -> Result<ExitCode> {
    let p = load_semantic_map_lenient(pred)?;
    let r = load_semantic_map_lenient(reference)?;
    if p.geometry() != r.geometry() {
        bail!(
            "geometry mismatch: {} is {:?}, {} is {:?}",
            pred.display(),
            p.geometry(),
            reference.display(),
            r.geometry()
        );
    }
    println!("miou={:.6}", miou(&p, &r, NUM_CLASSES)?);
    Ok(ExitCode::SUCCESS)
}

fn load_pairs(dir: &Path) -> Result<Vec<(semnav::nn::Image, bool)>> {
    Ok(keyframe::load_dataset(dir)?
        .into_iter()
        .map(|s| (s.image, s.keyframe))
        .collect())
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"))
}

fn cmd_keyframe_train(data: &Path, out: &Path, cfg: &TrainConfig) -> Result<ExitCode> {
    let pairs = load_pairs(data)?;
    let trained = keyframe::train_keyframe(&pairs, cfg)?;
    trained.model.save(out)?;
    let report = keyframe::evaluate(&trained.model, &pairs)?;
    println!(
        "accuracy={:.6} tpr_yes={} tpr_no={}",
        report.accuracy,
        fmt_rate(report.tpr_yes),
        fmt_rate(report.tpr_no)
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_keyframe_eval(data: &Path, weights: &Path) -> Result<ExitCode> {
    let model = KeyframeModel::load(weights)?;
    let pairs = load_pairs(data)?;
    let report = keyframe::evaluate(&model, &pairs)?;
    println!("accuracy={:.6} tpr_yes={}", report.accuracy, fmt_rate(report.tpr_yes));
    Ok(ExitCode::SUCCESS)
}

fn cmd_serve(port: u16, scenario: &Path) -> Result<ExitCode> {
    let scn = RawScenario::load(scenario)?.resolve()?;
    let keyframe = load_keyframe(scn.keyframe_weights.as_deref())?;
    let server = Server::bind(("127.0.0.1", port), BridgeConfig::from_scenario(&scn, keyframe))
        .with_context(|| format!("binding 127.0.0.1:{port}"))?;
    let stop = server.shutdown_handle();
    ctrlc::set_handler(move || stop.store(true, Ordering::SeqCst)).context("installing signal handler")?;
    eprintln!("listening on {}", server.local_addr()?);
    server.run()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_make_world(template: &str, seed: u64, prefix: &Path) -> Result<ExitCode> {
    let template: templates::Template = template.parse().map_err(anyhow::Error::msg)?;
    let world = templates::generate(template, seed);
    let toy = world.write(prefix)?;
    println!("wrote {}", toy.display());
    Ok(ExitCode::SUCCESS)
}
