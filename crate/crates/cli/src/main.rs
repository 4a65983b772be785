use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use atw_cli::animate::{parse_alphas, DEFAULT_ALPHAS};
use atw_cli::bench::{to_csv, to_table};
use atw_cli::{
    cmd_decompose, cmd_mockgen, cmd_reswarp, run_animation, run_bench, AnimationJob, FieldSource,
    ReswarpJob, ReswarpSource, SelfCheckFailed,
};
use atw_core::{load_field, MockFieldSpec, Mode, ReswarpConfig, ResamplingMethod};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "atw", version, about = "Animate high-resolution stills by residual warping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Recomposition mode.
    #[arg(long, default_value = "vanilla")]
    mode: Mode,
    /// Side of the low-resolution component.
    #[arg(long, default_value_t = 128)]
    base: usize,
    /// Image up-sampling kernel: nearest, bilinear or bicubic.
    #[arg(long, default_value = "bilinear")]
    upsample: ResamplingMethod,
    /// Worker threads (ATW_THREADS takes precedence).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

impl Common {
    fn config(&self) -> ReswarpConfig {
        ReswarpConfig {
            mode: self.mode,
            base_size: self.base,
            upsample_method: self.upsample,
        }
    }
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct FieldArgs {
    /// Motion field at base resolution (ATWF).
    #[arg(long)]
    field: Option<PathBuf>,
    /// Analytic field, e.g. "translate:6,0" or "radial:64,64,0.1".
    #[arg(long)]
    mock: Option<MockFieldSpec>,
}

#[derive(Subcommand)]
enum Command {
    /// Split an image into its low component and residuals.
    Decompose {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Render a single frame.
    Reswarp {
        /// Input image; omit when --decomposition is given.
        #[arg(required_unless_present = "decomposition")]
        input: Option<PathBuf>,
        /// Directory written by `atw decompose`.
        #[arg(long, conflicts_with = "input")]
        decomposition: Option<PathBuf>,
        #[command(flatten)]
        field: FieldArgs,
        /// Generated low-resolution result (defaults to the decomposed low component).
        #[arg(long)]
        low_result: Option<PathBuf>,
        /// Fraction of the motion field to apply.
        #[arg(long, default_value_t = 1.0)]
        alpha: f32,
        #[command(flatten)]
        common: Common,
    },
    /// Render one frame per alpha.
    Animate {
        input: PathBuf,
        #[arg(long, conflicts_with_all = ["mock", "field_dir"])]
        field: Option<PathBuf>,
        #[arg(long, conflicts_with = "field_dir")]
        mock: Option<MockFieldSpec>,
        /// Directory with one ATWF per frame, used in file-name order.
        #[arg(long)]
        field_dir: Option<PathBuf>,
        /// Comma-separated alpha schedule.
        #[arg(long)]
        alphas: Option<String>,
        #[arg(long)]
        low_result: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Write an analytic motion field as ATWF.
    Mockgen {
        #[arg(long)]
        mock: MockFieldSpec,
        #[arg(long, default_value_t = 128)]
        base: usize,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Time decomposition plus recomposition.
    Bench {
        #[arg(long, default_value = "1024", value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, default_value = "vanilla,multiscale", value_delimiter = ',')]
        modes: Vec<Mode>,
        #[arg(long, default_value_t = 5)]
        iterations: usize,
        #[arg(long, default_value_t = 128)]
        base: usize,
        #[arg(long, default_value = "bilinear")]
        upsample: ResamplingMethod,
        #[arg(long)]
        threads: Option<usize>,
        /// Directory for bench.csv; the table is always printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let from_env = match std::env::var("ATW_THREADS") {
        Ok(v) => Some(v.trim().parse::<usize>().context("ATW_THREADS must be a positive integer")?),
        Err(_) => None,
    };
    if let Some(n) = from_env.or(flag).filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Decompose { input, common } => {
            configure_threads(common.threads)?;
            let m = cmd_decompose(&input, common.config(), &common.out)?;
            println!(
                "{} {}x{} -> {} ({} levels, reconstruction error {:e})",
                m.mode,
                m.width,
                m.height,
                common.out.display(),
                m.levels,
                m.reconstruction_error
            );
        }
        Command::Reswarp {
            input,
            decomposition,
            field,
            low_result,
            alpha,
            common,
        } => {
            configure_threads(common.threads)?;
            let cfg = common.config();
            let (motion, label) = match (field.field, field.mock) {
                (Some(p), _) => (load_field(&p)?, p.display().to_string()),
                (None, Some(spec)) => (spec.generate(cfg.base_size)?, format!("mock {spec}")),
                (None, None) => unreachable!("clap enforces one field source"),
            };
            let source = match (input, decomposition) {
                (_, Some(dir)) => ReswarpSource::Decomposition(dir),
                (Some(p), None) => ReswarpSource::Image(p),
                (None, None) => unreachable!("clap enforces an input"),
            };
            let job = ReswarpJob {
                source,
                field: motion,
                field_label: label,
                low_result,
                alpha,
                cfg,
                out_dir: common.out.clone(),
            };
            let img = cmd_reswarp(&job)?;
            println!("{}x{} frame -> {}", img.width(), img.height(), common.out.join("frame.png").display());
        }
        Command::Animate {
            input,
            field,
            mock,
            field_dir,
            alphas,
            low_result,
            common,
        } => {
            configure_threads(common.threads)?;
            let source = match (field, mock, field_dir) {
                (Some(p), _, _) => FieldSource::File(p),
                (_, Some(spec), _) => FieldSource::Mock(spec),
                (_, _, Some(dir)) => FieldSource::Dir(dir),
                _ => anyhow::bail!("one of --field, --mock or --field-dir is required"),
            };
            let alphas = match (&alphas, &source) {
                (Some(s), _) => parse_alphas(s)?,
                (None, FieldSource::Dir(dir)) => {
                    let n = std::fs::read_dir(dir)
                        .with_context(|| format!("reading {}", dir.display()))?
                        .filter_map(|e| e.ok())
                        .filter(|e| e.path().extension().is_some_and(|x| x.eq_ignore_ascii_case("atwf")))
                        .count();
                    vec![1.0; n.max(1)]
                }
                (None, _) => DEFAULT_ALPHAS.to_vec(),
            };
            let mut job = AnimationJob::new(input, source, common.out.clone());
            job.alphas = alphas;
            job.low_result = low_result;
            job.cfg = common.config();
            let outcome = run_animation(&job)?;
            let r = &outcome.report;
            println!(
                "{} frames -> {} (coherency proxy {})",
                r.frames.len(),
                common.out.display(),
                r.coherency.value.map_or("n/a".to_string(), |v| format!("{v:.6}"))
            );
        }
        Command::Mockgen { mock, base, out } => {
            let f = cmd_mockgen(&mock, base, &out)?;
            println!("{mock} at {}x{} -> {}", f.width(), f.height(), out.display());
        }
        Command::Bench {
            sizes,
            modes,
            iterations,
            base,
            upsample,
            threads,
            out,
        } => {
            configure_threads(threads)?;
            let rows = run_bench(&sizes, &modes, iterations, base, upsample)?;
            print!("{}", to_table(&rows));
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                let path = dir.join("bench.csv");
                std::fs::write(&path, to_csv(&rows)).with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<SelfCheckFailed>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<atw_core::Error>() {
            return match e {
                atw_core::Error::IoFailure { .. } => 1,
                _ => 2,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("atw: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
