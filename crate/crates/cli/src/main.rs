mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Ctx, Status, Strategy};
use config::RunConfig;

/// Document structure reconstruction, QA annotation and evaluation.
#[derive(Debug, Parser)]
#[command(name = "vrdoc", version)]
struct Cli {
    /// Run configuration file (flat `key = value`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Extra `key=value` settings; override the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fuse multi-engine OCR candidates into page text.
    Fuse {
        #[arg(long)]
        pages: Option<PathBuf>,
        #[arg(long)]
        candidates: Option<PathBuf>,
    },
    /// Align page lines with crawled HTML blocks.
    Align {
        #[arg(long)]
        pages: Option<PathBuf>,
        #[arg(long)]
        html: Option<PathBuf>,
    },
    /// Predict reading order and screen it with the geometric filter.
    Order {
        /// html, hierarchy or segment.
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        pages: Option<PathBuf>,
        #[arg(long)]
        images: Option<PathBuf>,
    },
    /// Generate and filter QA samples.
    Qagen {
        #[arg(long)]
        pages: Option<PathBuf>,
        /// mock or http.
        #[arg(long)]
        provider: Option<String>,
        /// Scripted replies for the mock provider (JSONL).
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Score predictions against ground truth.
    Eval {
        /// vqa, ocr, rop_line, rop_para or complexity.
        #[arg(long)]
        task: Option<String>,
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long)]
        gt: Option<PathBuf>,
    },
    /// Summarize and validate a page file.
    Stats {
        #[arg(long)]
        pages: Option<PathBuf>,
    },
    /// Write the seeded synthetic corpus.
    Synth {
        #[arg(long)]
        dir: PathBuf,
    },
}

const EXIT_PARTIAL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn build_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for pair in &cli.set {
        cfg.set_pair(pair)?;
    }
    let mut flag = |key: &str, value: Option<String>| -> anyhow::Result<()> {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
        Ok(())
    };
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.to_string_lossy().into_owned());
    flag("seed", cli.seed.map(|s| s.to_string()))?;
    flag("jobs", cli.jobs.map(|j| j.to_string()))?;
    flag("out", path(&cli.out))?;
    match &cli.command {
        Command::Fuse { pages, candidates } => {
            flag("pages", path(pages))?;
            flag("candidates", path(candidates))?;
        }
        Command::Align { pages, html } => {
            flag("align.pages", path(pages))?;
            flag("html", path(html))?;
        }
        Command::Order { strategy, pages, images } => {
            flag("order.strategy", strategy.clone())?;
            flag("order.pages", path(pages))?;
            flag("images", path(images))?;
        }
        Command::Qagen { pages, provider, script } => {
            flag("qagen.pages", path(pages))?;
            flag("provider.kind", provider.clone())?;
            flag("provider.script", path(script))?;
        }
        Command::Eval { task, pred, gt } => {
            flag("eval.task", task.clone())?;
            flag("eval.predictions", path(pred))?;
            flag("ground_truth", path(gt))?;
        }
        Command::Stats { pages } => flag("pages", path(pages))?,
        Command::Synth { .. } => {}
    }
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let cfg = build_config(&cli)?;
    if let Command::Synth { dir } = &cli.command {
        commands::synth(dir, cfg.int("seed", 7) as u64)?;
        return Ok(Status::Complete);
    }
    let ctx = Ctx::new(cfg)?;
    match &cli.command {
        Command::Fuse { .. } => commands::fuse(&ctx),
        Command::Align { .. } => commands::align(&ctx),
        Command::Order { .. } => {
            let strategy: Strategy = ctx
                .cfg
                .text("order.strategy", "html")
                .parse()
                .map_err(|e: String| anyhow::anyhow!(e))?;
            commands::order(&ctx, strategy)
        }
        Command::Qagen { .. } => commands::qagen(&ctx),
        Command::Eval { .. } => commands::eval(&ctx),
        Command::Stats { .. } => commands::stats(&ctx),
        Command::Synth { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Status::Complete) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(EXIT_PARTIAL),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
