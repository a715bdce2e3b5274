//! The convergence-threshold sweep: run the volume-normalized flow for a
//! family of initial data with increasing scale-invariant energy E(g₀) and
//! tabulate the outcomes against the threshold 16π²(|χ|+1)².

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use l2flow_core::flow::{self, FlowConfig};
use l2flow_core::geometry::ConformalMetric;

use crate::config::{ConfigError, ExperimentConfig};
use crate::init::synthesize_initial;

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub amplitude: f64,
    pub e0: f64,
    pub below_threshold: bool,
    pub converged: bool,
    pub rate: Option<f64>,
    pub r_squared: Option<f64>,
    pub final_max_dev: f64,
    pub error: Option<String>,
}

pub struct SweepResult {
    pub threshold: f64,
    pub rows: Vec<SweepRow>,
}

fn run_one(cfg: &ExperimentConfig, amplitude: f64, threshold: f64) -> SweepRow {
    let mut row = SweepRow {
        amplitude,
        e0: f64::NAN,
        below_threshold: false,
        converged: false,
        rate: None,
        r_squared: None,
        final_max_dev: f64::NAN,
        error: None,
    };
    let mut attempt = || -> Result<(), ConfigError> {
        let mut cfg = cfg.clone();
        cfg.set_amplitude(amplitude);
        let bg = cfg.background.build()?;
        let u0 = synthesize_initial(&bg, &cfg.init)?;
        let e0 = ConformalMetric::new(u0.clone())
            .map_err(|e| ConfigError(e.to_string()))?
            .energies()
            .map_err(|e| ConfigError(e.to_string()))?
            .e;
        row.e0 = e0;
        row.below_threshold = e0 < threshold;

        // The sweep always runs the volume-normalized flow, with a default
        // convergence cutoff when the config does not set one.
        let flow_cfg = FlowConfig {
            normalized: true,
            stop_calabi_below: Some(cfg.flow.stop_calabi_below.unwrap_or(1e-10)),
            ..cfg.flow.clone()
        };
        let out = flow::run(u0, &flow_cfg).map_err(|e| ConfigError(e.to_string()))?;
        if let Some(e) = out.aborted {
            row.error = Some(e.to_string());
        }
        let last = out
            .records
            .last()
            .ok_or_else(|| ConfigError("no records".into()))?;
        row.converged = last.calabi < flow_cfg.stop_calabi_below.unwrap();

        // fitted Calabi decay rate over the middle of the realized time span
        let t0 = out.records[0].t;
        let t1 = last.t;
        let fit = flow::fit_decay_rate(
            &out.records,
            t0 + 0.2 * (t1 - t0),
            t0 + 0.9 * (t1 - t0),
        );
        if let Ok(fit) = fit {
            row.rate = Some(fit.rate);
            row.r_squared = Some(fit.r_squared);
        }

        // final max|s − s̄|
        let rep = out
            .final_state
            .metric
            .energies()
            .map_err(|e| ConfigError(e.to_string()))?;
        let s = out
            .final_state
            .metric
            .scalar_curvature()
            .map_err(|e| ConfigError(e.to_string()))?;
        row.final_max_dev = s.map(|v| v - rep.s_bar).max_abs();
        Ok(())
    };
    if let Err(e) = attempt() {
        row.error = Some(e.to_string());
    }
    row
}

fn thread_cap(n_jobs: usize) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let capped = match std::env::var("L2FLOW_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n >= 1).unwrap_or(available),
        Err(_) => available,
    };
    capped.min(n_jobs).max(1)
}

pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<SweepResult, ConfigError> {
    if cfg.sweep_amplitudes.is_empty() {
        return Err(ConfigError("sweep needs `sweep.amplitudes`".into()));
    }
    let bg = cfg.background.build()?;
    let chi = bg.chi().unsigned_abs() as f64;
    let threshold = 16.0 * std::f64::consts::PI * std::f64::consts::PI * (chi + 1.0) * (chi + 1.0);

    let amps = cfg.sweep_amplitudes.clone();
    let rows: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; amps.len()]);
    let next = AtomicUsize::new(0);
    let workers = thread_cap(amps.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= amps.len() {
                    break;
                }
                let row = run_one(cfg, amps[i], threshold);
                rows.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let rows: Vec<SweepRow> = rows
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("worker filled every slot"))
        .collect();
    Ok(SweepResult { threshold, rows })
}

impl SweepResult {
    pub fn table(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "threshold 16*pi^2*(|chi|+1)^2 = {:.6} (volume-normalized flow)\n",
            self.threshold
        ));
        s.push_str(
            "amplitude    E0           vs-threshold  converged  rate        r2        final_max_dev  error\n",
        );
        for r in &self.rows {
            let mark = if r.below_threshold { "below" } else { "ABOVE" };
            let rate = r.rate.map_or("-".to_string(), |v| format!("{v:.4}"));
            let r2 = r.r_squared.map_or("-".to_string(), |v| format!("{v:.5}"));
            let err = r.error.as_deref().unwrap_or("-");
            s.push_str(&format!(
                "{:<12.5} {:<12.5} {:<13} {:<10} {:<11} {:<9} {:<14.3e} {}\n",
                r.amplitude, r.e0, mark, r.converged, rate, r2, r.final_max_dev, err
            ));
        }
        s
    }

    pub fn csv(&self) -> String {
        let mut s = String::from(
            "amplitude,e0,below_threshold,converged,rate,r_squared,final_max_dev,error\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:.16e},{:.16e},{},{},{},{},{:.16e},{}\n",
                r.amplitude,
                r.e0,
                r.below_threshold,
                r.converged,
                r.rate.map_or("".to_string(), |v| format!("{v:.16e}")),
                r.r_squared.map_or("".to_string(), |v| format!("{v:.16e}")),
                r.final_max_dev,
                r.error.as_deref().unwrap_or("")
            ));
        }
        s
    }
}
