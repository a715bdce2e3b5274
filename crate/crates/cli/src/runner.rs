//! The `run` subcommand: synthesize initial data, integrate the flow, and
//! write `series.csv`, checkpoints, and the optional `summary.svg` into the
//! output directory.

use std::path::{Path, PathBuf};

use l2flow_core::error::Error as CoreError;
use l2flow_core::flow::{self, FlowState};

use crate::checkpoint::Checkpoint;
use crate::config::{ConfigError, ExperimentConfig, InitSpec};
use crate::csvout;
use crate::init::synthesize_initial;
use crate::svg;

/// How a run finished, mapped to process exit codes by `main`.
#[derive(Debug, PartialEq, Eq, Clone, Copy)]
pub enum RunOutcome {
    /// Reached t_end or the Calabi stop threshold. Exit 0.
    Clean,
    /// Step-size collapse (blow-up / instability). Exit 2.
    StepSizeCollapse,
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub outcome: RunOutcome,
    pub out_dir: PathBuf,
    pub records: usize,
    pub final_t: f64,
}

pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunArtifacts, ConfigError> {
    let bg = cfg.background.build()?;
    let u0 = synthesize_initial(&bg, &cfg.init)?;

    let state = match &cfg.init {
        InitSpec::FromCheckpoint { path } => {
            let ck = Checkpoint::load(path)?;
            FlowState::resume(u0, ck.t, ck.step_count, ck.dt, ck.accepts_since_growth)
                .map_err(|e| ConfigError(e.to_string()))?
        }
        _ => FlowState::new(u0, &cfg.flow).map_err(|e| ConfigError(e.to_string()))?,
    };

    let out_dir = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| ConfigError(format!("cannot create `{}`: {e}", out_dir.display())))?;

    let mut record_index: u64 = 0;
    let mut ck_error: Option<ConfigError> = None;
    let out = flow::run_with(state, &cfg.flow, |st, _rec| {
        record_index += 1;
        let every = cfg.output.checkpoint_every;
        if every > 0 && record_index % every == 0 && ck_error.is_none() {
            let ck = Checkpoint::of_state(st, &cfg.background, &cfg.echo);
            let path = out_dir.join(format!("checkpoint_{:08}.json", st.step_count));
            if let Err(e) = ck.save(&path) {
                ck_error = Some(e);
            }
        }
    })
    .map_err(|e| ConfigError(e.to_string()))?;
    if let Some(e) = ck_error {
        return Err(e);
    }

    let csv = csvout::series_csv(&out.records)?;
    write_file(&out_dir.join("series.csv"), csv.as_bytes())?;

    Checkpoint::of_state(&out.final_state, &cfg.background, &cfg.echo)
        .save(&out_dir.join("final_checkpoint.json"))?;

    if cfg.output.svg {
        let svg = svg::summary_svg(&out.records);
        write_file(&out_dir.join("summary.svg"), svg.as_bytes())?;
    }

    let outcome = match out.aborted {
        None => RunOutcome::Clean,
        Some(CoreError::StepSizeCollapse { .. }) => RunOutcome::StepSizeCollapse,
        Some(e) => return Err(ConfigError(format!("run failed: {e}"))),
    };
    Ok(RunArtifacts {
        outcome,
        out_dir,
        records: out.records.len(),
        final_t: out.final_state.t,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ConfigError> {
    std::fs::write(path, bytes)
        .map_err(|e| ConfigError(format!("cannot write `{}`: {e}", path.display())))
}
