use std::path::PathBuf;
use std::process::ExitCode;

use periodlab::experiments::ExperimentError;
use periodlab::periods::PeriodError;
use periodlab_cli::{CliError, ConfigFile, RunOutcome, Subcommand, USAGE};

struct Args {
    subcommand: Subcommand,
    config_path: PathBuf,
    h_override: Option<Vec<f64>>,
    d_override: Option<f64>,
    p_override: Option<Vec<u32>>,
    q_override: Option<Vec<f64>>,
    samples_override: Option<usize>,
    seed_override: Option<u64>,
    workers_override: Option<usize>,
    out_dir: PathBuf,
    negative_control: bool,
}

fn parse_list<T: std::str::FromStr>(flag: &str, value: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("cannot parse {flag} element '{part}'")))
        })
        .collect()
}

fn parse_args(argv: &[String]) -> Result<Args, CliError> {
    let mut it = argv.iter();
    let sub = it
        .next()
        .ok_or_else(|| CliError::Usage("missing subcommand".into()))?;
    let subcommand = Subcommand::parse(sub)
        .ok_or_else(|| CliError::Usage(format!("unknown subcommand '{sub}'")))?;

    let mut config_path = None;
    let mut args = Args {
        subcommand,
        config_path: PathBuf::new(),
        h_override: None,
        d_override: None,
        p_override: None,
        q_override: None,
        samples_override: None,
        seed_override: None,
        workers_override: None,
        out_dir: std::env::var_os("PERIODLAB_OUT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out")),
        negative_control: false,
    };

    while let Some(flag) = it.next() {
        let mut value_for = |name: &str| -> Result<&String, CliError> {
            it.next()
                .ok_or_else(|| CliError::Usage(format!("{name} needs a value")))
        };
        match flag.as_str() {
            "--config" => config_path = Some(PathBuf::from(value_for("--config")?)),
            "--h" => args.h_override = Some(parse_list("--h", value_for("--h")?)?),
            "--D" => {
                args.d_override = Some(
                    value_for("--D")?
                        .parse()
                        .map_err(|_| CliError::Usage("--D needs a positive real".into()))?,
                )
            }
            "--p" => args.p_override = Some(parse_list("--p", value_for("--p")?)?),
            "--q" => args.q_override = Some(parse_list("--q", value_for("--q")?)?),
            "--samples" => {
                args.samples_override = Some(
                    value_for("--samples")?
                        .parse()
                        .map_err(|_| CliError::Usage("--samples needs an integer".into()))?,
                )
            }
            "--seed" => {
                args.seed_override = Some(
                    value_for("--seed")?
                        .parse()
                        .map_err(|_| CliError::Usage("--seed needs an integer".into()))?,
                )
            }
            "--workers" => {
                args.workers_override = Some(
                    value_for("--workers")?
                        .parse()
                        .map_err(|_| CliError::Usage("--workers needs an integer".into()))?,
                )
            }
            "--out" => args.out_dir = PathBuf::from(value_for("--out")?),
            "--negative-control" => args.negative_control = true,
            other => return Err(CliError::Usage(format!("unknown flag '{other}'"))),
        }
    }
    args.config_path =
        config_path.ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    Ok(args)
}

fn apply_overrides(config: &mut ConfigFile, args: &Args) {
    if let Some(h) = &args.h_override {
        config.h_list = h.clone();
    }
    if let Some(d) = args.d_override {
        config.window.width_constant = d;
    }
    if let Some(p) = &args.p_override {
        config.p_list = p.clone();
    }
    if let Some(q) = &args.q_override {
        config.q_list = q.clone();
    }
    if let Some(m) = args.samples_override {
        config.samples = m;
    }
    if let Some(s) = args.seed_override {
        config.seed = s;
    }
    if let Some(w) = args.workers_override {
        config.workers = w;
    }
    if args.negative_control {
        config.negative_control = true;
    }
}

fn run() -> Result<RunOutcome, CliError> {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let args = parse_args(&argv)?;
    let mut config = ConfigFile::load(&args.config_path)?;
    apply_overrides(&mut config, &args);
    periodlab_cli::execute(args.subcommand, &config, &args.out_dir)
}

fn main() -> ExitCode {
    match run() {
        Ok(RunOutcome::Passed) => ExitCode::SUCCESS,
        Ok(RunOutcome::StatisticalFailure) => {
            eprintln!("statistical assertion failed (see report files)");
            ExitCode::from(2)
        }
        Err(err) => {
            // PoorFit means the experiment ran and its statistical check
            // failed; everything else is a usage/config/runtime error.
            if let CliError::Experiment(ExperimentError::Period(PeriodError::PoorFit { .. })) = &err
            {
                eprintln!("{err}");
                return ExitCode::from(2);
            }
            eprintln!("{err}");
            if matches!(err, CliError::Usage(_)) {
                eprintln!("\n{USAGE}");
            }
            ExitCode::from(1)
        }
    }
}
