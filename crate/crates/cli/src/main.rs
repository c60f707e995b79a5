use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use locbc_cli::{parse_config_text, run, CliError, ExperimentConfig, Task};

/// Experiments on constant-dimension multiplicative linear operator broadcast channels.
#[derive(Parser, Debug)]
#[command(name = "locbc", version)]
struct Args {
    /// lattice | channel | degrade | capacity | region | pg22 | erasure-check
    task: String,
    /// Flat key=value settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// example1 ... example5
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    l: Option<String>,
    /// Comma-separated erasure pattern of subchannel 1.
    #[arg(long, allow_hyphen_values = true)]
    eps1: Option<String>,
    /// Comma-separated erasure pattern of subchannel 2.
    #[arg(long, allow_hyphen_values = true)]
    eps2: Option<String>,
    #[arg(long)]
    rho1: Option<String>,
    #[arg(long)]
    rho2: Option<String>,
    #[arg(long)]
    x_size: Option<String>,
    #[arg(long)]
    r1: Option<String>,
    #[arg(long)]
    r2: Option<String>,
    /// Number of sampled joints.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    u_size: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    mu_min: Option<String>,
    #[arg(long)]
    mu_max: Option<String>,
    #[arg(long)]
    mu_points: Option<String>,
    #[arg(long)]
    restarts: Option<String>,
    /// Number of sigma values on the pg22 curve.
    #[arg(long)]
    points: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// nats | bits | qary
    #[arg(long)]
    log_base: Option<String>,
}

impl Args {
    fn flag_pairs(&self) -> Vec<(String, String)> {
        let fields: [(&str, &Option<String>); 24] = [
            ("preset", &self.preset),
            ("q", &self.q),
            ("m", &self.m),
            ("l", &self.l),
            ("eps1", &self.eps1),
            ("eps2", &self.eps2),
            ("rho1", &self.rho1),
            ("rho2", &self.rho2),
            ("x-size", &self.x_size),
            ("r1", &self.r1),
            ("r2", &self.r2),
            ("n", &self.n),
            ("seed", &self.seed),
            ("u-size", &self.u_size),
            ("tol", &self.tol),
            ("max-iter", &self.max_iter),
            ("mu-min", &self.mu_min),
            ("mu-max", &self.mu_max),
            ("mu-points", &self.mu_points),
            ("restarts", &self.restarts),
            ("points", &self.points),
            ("out", &self.out),
            ("format", &self.format),
            ("log-base", &self.log_base),
        ];
        fields
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

fn execute(args: &Args) -> Result<Vec<String>, CliError> {
    let task = Task::parse(&args.task)?;
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_config_text(&text)?
        }
        None => Vec::new(),
    };
    let cfg = ExperimentConfig::resolve(task, &file, &args.flag_pairs())?;
    let written = run(&cfg)?;
    Ok(written.into_iter().map(|(name, _)| cfg.out.join(name).display().to_string()).collect())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(files) => {
            for f in files {
                println!("{f}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("locbc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
