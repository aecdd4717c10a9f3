use std::path::PathBuf;
use std::process::ExitCode;

use polyadapt_cli::config::{load_config, Overrides};
use polyadapt_cli::runner::{cmd_run, cmd_sweep};
use polyadapt_cli::EXIT_CONFIG;

const USAGE: &str = "\
polyadapt — adaptive-learning-rate optimization experiments

USAGE:
  polyadapt run --config PATH [--eta0 F] [--optimizer NAME] [--fstar F]
                [--noise MODE[:VALUE]] [--iters N] [--seed N] [--out PATH]
  polyadapt sweep --config PATH --etas F,F,... [--jobs N]

Noise modes: zero | fixed:R | clt | prop:C
Optimizers:  sgd | adagrad | rmsprop | momentum | adam

The POLYADAPT_OUT_DIR environment variable sets the default output directory.
Exit codes: 0 completed, 1 configuration error, 2 run diverged.";

struct ParsedArgs {
    config: PathBuf,
    overrides: Overrides,
    etas: Vec<f64>,
    jobs: usize,
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    eprintln!("{USAGE}");
    ExitCode::from(EXIT_CONFIG as u8)
}

fn parse_args(args: &[String], is_sweep: bool) -> Result<ParsedArgs, String> {
    let mut config = None;
    let mut overrides = Overrides::default();
    let mut etas = Vec::new();
    let mut jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut take = |name: &str| -> Result<String, String> {
            it.next()
                .map(|s| s.to_string())
                .ok_or_else(|| format!("flag {name} needs a value"))
        };
        match arg.as_str() {
            "--config" => config = Some(PathBuf::from(take("--config")?)),
            "--eta0" => {
                overrides.eta0 = Some(
                    take("--eta0")?
                        .parse()
                        .map_err(|_| "invalid --eta0 value".to_string())?,
                )
            }
            "--optimizer" => overrides.optimizer = Some(take("--optimizer")?),
            "--fstar" => {
                overrides.f_star = Some(
                    take("--fstar")?
                        .parse()
                        .map_err(|_| "invalid --fstar value".to_string())?,
                )
            }
            "--noise" => overrides.noise = Some(take("--noise")?),
            "--iters" => {
                overrides.iters = Some(
                    take("--iters")?
                        .parse()
                        .map_err(|_| "invalid --iters value".to_string())?,
                )
            }
            "--seed" => {
                overrides.seed = Some(
                    take("--seed")?
                        .parse()
                        .map_err(|_| "invalid --seed value".to_string())?,
                )
            }
            "--out" => overrides.out = Some(PathBuf::from(take("--out")?)),
            "--etas" if is_sweep => {
                for part in take("--etas")?.split(',') {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    etas.push(
                        part.parse()
                            .map_err(|_| format!("invalid eta value '{part}' in --etas"))?,
                    );
                }
            }
            "--jobs" if is_sweep => {
                jobs = take("--jobs")?
                    .parse()
                    .map_err(|_| "invalid --jobs value".to_string())?
            }
            other => return Err(format!("unknown flag '{other}'")),
        }
    }
    let config = config.ok_or_else(|| "--config is required".to_string())?;
    Ok(ParsedArgs {
        config,
        overrides,
        etas,
        jobs,
    })
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        return fail("missing subcommand");
    };
    match command.as_str() {
        "run" | "sweep" => {}
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            return ExitCode::SUCCESS;
        }
        other => return fail(&format!("unknown subcommand '{other}'")),
    }
    let is_sweep = command == "sweep";
    let parsed = match parse_args(&args[1..], is_sweep) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let mut cfg = match load_config(&parsed.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Err(e) = cfg.apply_overrides(&parsed.overrides) {
        eprintln!("{e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    let code = if is_sweep {
        if parsed.etas.is_empty() {
            eprintln!("error: sweep needs a non-empty --etas grid");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        cmd_sweep(&cfg, &parsed.etas, parsed.jobs)
    } else {
        cmd_run(&cfg)
    };
    ExitCode::from(code as u8)
}
