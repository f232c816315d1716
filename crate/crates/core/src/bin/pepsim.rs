use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pepsim::analysis::SensitivityScales;
use pepsim::pipeline::{self, RunConfig};

/// Simulate current-on/off CCD campaigns on a copper conductor and set
/// limits on anomalous Kα emission.
#[derive(Parser)]
#[command(name = "pepsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `[output] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides $PEPSIM_OUT_DIR and `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate both runs and write spectrum_on.csv / spectrum_off.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        geom_factor: Option<PathBuf>,
    },
    /// Subtract the spectra and count the region of interest.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Defaults to <out>/spectrum_on.csv.
        #[arg(long)]
        on: Option<PathBuf>,
        /// Defaults to <out>/spectrum_off.csv.
        #[arg(long)]
        off: Option<PathBuf>,
    },
    /// Turn an analysis report into a limit on β²/2.
    Limit {
        #[command(flatten)]
        common: Common,
        /// Defaults to <out>/analysis.txt.
        #[arg(long)]
        analysis: Option<PathBuf>,
        /// Report written by `geom-factor`.
        #[arg(long)]
        geom_factor: Option<PathBuf>,
        #[arg(long)]
        n_sigma: Option<f64>,
    },
    /// Rescale a limit to other background, live time and current.
    Project {
        #[command(flatten)]
        common: Common,
        /// Defaults to <out>/limit.txt.
        #[arg(long)]
        limit: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        background_scale: f64,
        #[arg(long, default_value_t = 1.0)]
        live_time_scale: f64,
        #[arg(long, default_value_t = 1.0)]
        current_scale: f64,
    },
    /// Monte Carlo estimate of the geometric factor.
    GeomFactor {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Synthetic CCD corpus: reconstruction statistics and frame dumps.
    Frames {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        frames: Option<u64>,
    },
}

fn load(common: &Common) -> pepsim::Result<(RunConfig, PathBuf)> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let out = config.resolve_output_dir(common.out.as_deref());
    Ok((config, out))
}

fn run(cli: Cli) -> pepsim::Result<()> {
    match cli.command {
        Command::Simulate { common, geom_factor } => {
            let (config, out) = load(&common)?;
            let sim = pipeline::run_simulate(&config, &out, geom_factor.as_deref())?;
            println!(
                "wrote {} and {} to {} ({} signal events injected)",
                pipeline::SPECTRUM_ON_FILE,
                pipeline::SPECTRUM_OFF_FILE,
                out.display(),
                sim.injected_signal_counts
            );
        }
        Command::Analyze { common, on, off } => {
            let (config, out) = load(&common)?;
            let on = on.unwrap_or_else(|| out.join(pipeline::SPECTRUM_ON_FILE));
            let off = off.unwrap_or_else(|| out.join(pipeline::SPECTRUM_OFF_FILE));
            let a = pipeline::run_analyze(&config, &on, &off, &out)?;
            println!("{}", a.to_report(None).get("summary").unwrap_or_default());
        }
        Command::Limit {
            common,
            analysis,
            geom_factor,
            n_sigma,
        } => {
            let (config, out) = load(&common)?;
            let analysis = analysis.unwrap_or_else(|| out.join(pipeline::ANALYSIS_FILE));
            let r = pipeline::run_limit(&config, &analysis, geom_factor.as_deref(), n_sigma, &out)?;
            println!(
                "beta^2/2 <= {:.1e} ({}), K = {:.3e}",
                r.result.beta2_over_2_limit, r.result.confidence_label, r.result.coefficient_k
            );
        }
        Command::Project {
            common,
            limit,
            background_scale,
            live_time_scale,
            current_scale,
        } => {
            let (config, out) = load(&common)?;
            let limit = limit.unwrap_or_else(|| out.join(pipeline::LIMIT_FILE));
            let scales = SensitivityScales {
                background: background_scale,
                live_time: live_time_scale,
                current: current_scale,
            };
            let p = pipeline::run_project(&config, &limit, scales, &out)?;
            println!("projected beta^2/2 <= {:.2e}", p.projected_limit);
        }
        Command::GeomFactor { common, samples } => {
            let (config, out) = load(&common)?;
            let e = pipeline::run_geom_factor(&config, samples, &out)?;
            println!(
                "survival x acceptance = {:.5} ± {:.5}, geometric factor = {:.5}",
                e.survival_times_acceptance, e.statistical_error, e.total_factor
            );
        }
        Command::Frames { common, frames } => {
            let (config, out) = load(&common)?;
            let s = pipeline::run_frames(&config, frames, &out)?;
            println!(
                "x-ray acceptance {:.4}, track rejection {:.4} over {} frames",
                s.xray_acceptance(),
                s.track_rejection(),
                s.frames
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pepsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
