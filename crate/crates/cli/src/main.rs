//! `l2flow` — experiment runner for the curvature-energy flow simulator.
//!
//! Subcommands: `run`, `gradcheck`, `xcheck`, `diffeo-check`, `sweep`.

use std::process::ExitCode;

use l2flow_cli::config::ExperimentConfig;
use l2flow_cli::runner::{cmd_run, RunOutcome};
use l2flow_cli::sweep::cmd_sweep;
use l2flow_cli::{checks, ConfigError};

const USAGE: &str = "\
usage: l2flow <command> [flags]

commands:
  run           integrate a flow from a config file; writes series.csv,
                final_checkpoint.json and (optionally) summary.svg
  gradcheck     variational oracle: directional derivatives of F vs the
                assembled gradient on randomized metrics
  xcheck        cross-check grad F (general coordinate route) against the
                conformal surface route, with convergence orders
  diffeo-check  pullback invariance of F, the Hessian/Lie identity, and
                the full-flow residual of the corrected family
  sweep         run the volume-normalized flow over a family of initial
                amplitudes and tabulate outcomes against the threshold
                energy 16*pi^2*(|chi|+1)^2

flags:
  --config <path>    experiment config (required: run, sweep)
  --out <dir>        override output.dir
  --resolution <n>   override grid resolution (also: gradcheck/xcheck size)
  --seed <s>         override init.seed / randomized-check seed
  --eps <x>          gradcheck finite-difference step (default 1e-5)

exit codes: 0 success, 1 config/check failure, 2 step-size collapse
";

struct Flags {
    config: Option<String>,
    out: Option<String>,
    resolution: Option<usize>,
    seed: Option<u64>,
    eps: Option<f64>,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags {
        config: None,
        out: None,
        resolution: None,
        seed: None,
        eps: None,
    };
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let mut grab = || -> Result<&String, String> {
            it.next().ok_or_else(|| format!("flag {a} needs a value"))
        };
        match a.as_str() {
            "--config" => flags.config = Some(grab()?.clone()),
            "--out" => flags.out = Some(grab()?.clone()),
            "--resolution" => {
                flags.resolution =
                    Some(grab()?.parse().map_err(|_| "bad --resolution".to_string())?)
            }
            "--seed" => flags.seed = Some(grab()?.parse().map_err(|_| "bad --seed".to_string())?),
            "--eps" => flags.eps = Some(grab()?.parse().map_err(|_| "bad --eps".to_string())?),
            other => return Err(format!("unknown flag `{other}`")),
        }
    }
    Ok(flags)
}

fn load_config(flags: &Flags) -> Result<ExperimentConfig, ConfigError> {
    let path = flags
        .config
        .as_deref()
        .ok_or_else(|| ConfigError("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(dir) = &flags.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(n) = flags.resolution {
        cfg.set_resolution(n);
    }
    if let Some(s) = flags.seed {
        cfg.set_seed(s);
    }
    Ok(cfg)
}

fn dispatch(cmd: &str, flags: Flags) -> Result<ExitCode, ConfigError> {
    match cmd {
        "run" => {
            let cfg = load_config(&flags)?;
            let art = cmd_run(&cfg)?;
            println!(
                "run: {} records to t = {:.6} in {}",
                art.records,
                art.final_t,
                art.out_dir.display()
            );
            Ok(match art.outcome {
                RunOutcome::Clean => ExitCode::SUCCESS,
                RunOutcome::StepSizeCollapse => {
                    eprintln!("run aborted: step-size collapse (see series.csv for the tail)");
                    ExitCode::from(2)
                }
            })
        }
        "gradcheck" => {
            let rep = checks::gradcheck(
                flags.resolution.unwrap_or(48),
                flags.eps.unwrap_or(1e-5),
                flags.seed.unwrap_or(7),
            )?;
            rep.print();
            Ok(if rep.pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        "xcheck" => {
            let rep = checks::xcheck(flags.resolution.unwrap_or(64))?;
            rep.print();
            Ok(if rep.pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        "diffeo-check" => {
            let rep = checks::diffeo_check(flags.resolution.unwrap_or(64))?;
            rep.print();
            Ok(if rep.pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        "sweep" => {
            let cfg = load_config(&flags)?;
            let result = cmd_sweep(&cfg)?;
            print!("{}", result.table());
            let dir = std::path::PathBuf::from(&cfg.output.dir);
            std::fs::create_dir_all(&dir)
                .map_err(|e| ConfigError(format!("cannot create `{}`: {e}", dir.display())))?;
            std::fs::write(dir.join("sweep.csv"), result.csv())
                .map_err(|e| ConfigError(format!("cannot write sweep.csv: {e}")))?;
            Ok(ExitCode::SUCCESS)
        }
        other => Err(ConfigError(format!("unknown command `{other}`"))),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(cmd) = args.first() else {
        eprint!("{USAGE}");
        return ExitCode::FAILURE;
    };
    if cmd == "--help" || cmd == "-h" || cmd == "help" {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let flags = match parse_flags(&args[1..]) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{e}");
            eprint!("{USAGE}");
            return ExitCode::FAILURE;
        }
    };
    match dispatch(cmd, flags) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
