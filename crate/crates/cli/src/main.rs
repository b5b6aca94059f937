use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use skillfit::model::Level;
use skillfit::pipeline::{
    cmd_heatmap, cmd_pipeline, cmd_spectroscopy, ClassField, HeatField, HeatmapRequest, Overrides, PipelineError,
    RunConfig, RunSummary,
};
use skillfit::report::{format_ratio, DEFAULT_GRID_CELLS};

#[derive(Parser)]
#[command(name = "skillfit", version, about = "Fitness, complexity and relatedness of job-skill networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Seed for null-model sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Level for fitness and the jobs projection.
    #[arg(long)]
    level: Option<Level>,
    /// Number of null-model samples.
    #[arg(long)]
    samples: Option<usize>,
    /// Validation threshold in (0, 1).
    #[arg(long)]
    threshold: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage and write the full artifact tree.
    Pipeline {
        #[command(flatten)]
        common: Common,
    },
    /// Write a job's skills ordered by complexity.
    Spectroscopy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        job: String,
    },
    /// Write smoothed per-class density grids.
    Heatmap {
        #[command(flatten)]
        common: Common,
        /// fitness, average_coherence or annual_wage_usd
        #[arg(long)]
        x: HeatField,
        #[arg(long)]
        y: HeatField,
        /// abstract_manual or routine
        #[arg(long)]
        class: ClassField,
        /// Kernel standard deviation in grid cells.
        #[arg(long, default_value_t = 32.0)]
        sigma: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_CELLS)]
        nx: usize,
        #[arg(long, default_value_t = DEFAULT_GRID_CELLS)]
        ny: usize,
    },
}

fn config(common: &Common) -> Result<RunConfig, PipelineError> {
    let mut config = RunConfig::load(&common.config)?;
    config.apply(&Overrides {
        seed: common.seed,
        level: common.level,
        samples: common.samples,
        threshold: common.threshold,
        out: common.out.clone(),
    });
    Ok(config)
}

fn report(summary: &RunSummary) {
    for (level, (jobs, skills)) in &summary.dropped {
        if !jobs.is_empty() {
            eprintln!("note: {level} matrix: dropped jobs without skills: {}", jobs.join(", "));
        }
        if !skills.is_empty() {
            eprintln!("note: {level} matrix: dropped skills without jobs: {}", skills.join(", "));
        }
    }
    if !summary.efc_converged {
        eprintln!(
            "warning: fitness stopped at the iteration budget ({}) before reaching the stopping criterion",
            summary.efc_iterations
        );
    }
    if !summary.vanishing_jobs.is_empty() {
        eprintln!("warning: vanishing fitness for: {}", summary.vanishing_jobs.join(", "));
    }
    if summary.clamped_points > 0 {
        eprintln!("warning: {} points clamped to the grid border", summary.clamped_points);
    }
    if let Some(w) = &summary.wage_summary {
        eprintln!(
            "wage ratio {} / {}: {} ({:.0} / {:.0})",
            w.max_job,
            w.min_job,
            format_ratio(w.ratio(), 2),
            w.max_wage,
            w.min_wage
        );
    }
    for f in &summary.files {
        println!("{}", summary.output_dir.join(f).display());
    }
}

fn run(cli: Cli) -> Result<RunSummary, PipelineError> {
    match cli.command {
        Command::Pipeline { common } => cmd_pipeline(&config(&common)?),
        Command::Spectroscopy { common, job } => cmd_spectroscopy(&config(&common)?, &job),
        Command::Heatmap {
            common,
            x,
            y,
            class,
            sigma,
            nx,
            ny,
        } => {
            let mut req = HeatmapRequest::new(x, y, class, sigma);
            req.nx = nx;
            req.ny = ny;
            cmd_heatmap(&config(&common)?, &req)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            report(&summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
