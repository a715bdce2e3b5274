//! Time integration of the conformal flow `∂t g = (Δs + ¼s²)g` and its
//! volume-normalized variant `∂t g = (Δs + ¼s² − ¼F/Vol)g`, written for the
//! conformal exponent: `u̇ = ½Δ_g s + ⅛s²` (minus `⅛F/Vol` when normalized).
//!
//! Two schemes: a first-order stabilized semi-implicit splitting (the stiff
//! biharmonic scale handled by a constant-coefficient shift `c·Δ₀²`, solved
//! spectrally on the torus and by a pentadiagonal solve on the sphere), and
//! classical RK4 under its fourth-order step-size cap. An adaptive controller
//! halves dt on rejection and grows it 1.2× after ten accepted steps.

use alloc::vec::Vec;

use crate::background::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::ConformalMetric;

/// Time integrator selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    SemiImplicit,
    ExplicitRk4,
}

#[derive(Clone, Debug)]
pub struct FlowConfig {
    /// Evolve the volume-normalized flow instead of the plain one.
    pub normalized: bool,
    pub scheme: Scheme,
    pub dt_init: f64,
    pub dt_max: f64,
    pub t_end: f64,
    /// Safety factor for the RK4 stability cap, in (0, 1].
    pub safety: f64,
    /// Emit a diagnostics record every this many accepted steps.
    pub record_every: usize,
    /// Stop early once the Calabi energy falls below this.
    pub stop_calabi_below: Option<f64>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            normalized: false,
            scheme: Scheme::SemiImplicit,
            dt_init: 1e-4,
            dt_max: 1e-2,
            t_end: 1.0,
            safety: 0.9,
            record_every: 1,
            stop_calabi_below: None,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_init > 0.0 && self.dt_max > 0.0 && self.dt_init <= self.dt_max) {
            return Err(Error::InvalidParam("need 0 < dt_init <= dt_max"));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidParam("t_end must be positive"));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::InvalidParam("safety must lie in (0, 1]"));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParam("record_every must be >= 1"));
        }
        if let Some(c) = self.stop_calabi_below {
            if c < 0.0 {
                return Err(Error::InvalidParam("stop_calabi_below must be >= 0"));
            }
        }
        Ok(())
    }
}

/// Integrator state: time, metric, and the adaptive-controller internals.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub t: f64,
    pub metric: ConformalMetric,
    pub step_count: u64,
    /// Current requested step size.
    pub dt: f64,
    /// dt actually used by the last accepted step.
    pub dt_last: f64,
    accepts_since_growth: u32,
}

impl FlowState {
    /// Accepted steps since the controller last grew dt (checkpointed so a
    /// resumed run reproduces the uninterrupted one exactly).
    pub fn accepts_since_growth(&self) -> u32 {
        self.accepts_since_growth
    }
}

impl FlowState {
    pub fn new(u0: ScalarField, cfg: &FlowConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(FlowState {
            t: 0.0,
            metric: ConformalMetric::new(u0)?,
            step_count: 0,
            dt: cfg.dt_init,
            dt_last: 0.0,
            accepts_since_growth: 0,
        })
    }

    /// Resume from a checkpointed state.
    pub fn resume(
        u: ScalarField,
        t: f64,
        step_count: u64,
        dt: f64,
        accepts_since_growth: u32,
    ) -> Result<Self> {
        if !(t >= 0.0 && dt > 0.0) {
            return Err(Error::InvalidParam("resume state needs t >= 0 and dt > 0"));
        }
        Ok(FlowState {
            t,
            metric: ConformalMetric::new(u)?,
            step_count,
            dt,
            dt_last: 0.0,
            accepts_since_growth,
        })
    }
}

/// One time slice of every monitored functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub vol: f64,
    pub f: f64,
    pub e: f64,
    pub calabi: f64,
    pub total_curvature: f64,
    /// Dissipation of the flow being run (vn variant when normalized).
    pub dissipation: f64,
    pub max_abs_s: f64,
    pub dt_used: f64,
}

/// `u̇` for the selected flow. On the torus every pointwise product inside
/// the right-hand side passes through the 2/3-rule dealias filter.
pub fn rhs(metric: &ConformalMetric, normalized: bool) -> Result<ScalarField> {
    let u = metric.u();
    let s0 = metric.background().s0();
    let lap_u = u.laplacian()?;
    let s = u
        .zip(&lap_u, |uu, lu| libm::exp(-2.0 * uu) * (s0 - 2.0 * lu))
        .dealias();
    let lap_s = s.laplacian()?;
    let lap_g_s = u
        .zip(&lap_s, |uu, l| libm::exp(-2.0 * uu) * l)
        .dealias();
    let s2 = s.mul(&s).dealias();
    let mut offset = 0.0;
    if normalized {
        let f = metric.integrate_g(&s.mul(&s));
        let vol = metric.volume();
        offset = 0.125 * f / vol;
    }
    Ok(lap_g_s.zip(&s2, move |l, q| 0.5 * l + 0.125 * q - offset))
}

fn max_exp_minus_4u(u: &ScalarField) -> f64 {
    // exp is monotone, so only the minimum of u matters.
    let min_u = u.values().iter().fold(f64::INFINITY, |m, &v| m.min(v));
    libm::exp(-4.0 * min_u)
}

/// Proposed increment for one step of size dt (no acceptance logic).
fn increment(metric: &ConformalMetric, cfg: &FlowConfig, dt: f64) -> Result<ScalarField> {
    match cfg.scheme {
        Scheme::SemiImplicit => {
            // (I + dt·c·Δ₀²) δ = dt·rhs, with c = ½·max(e^{−4u})·1.1 the
            // frozen stiff coefficient (margin 0.1).
            let r = rhs(metric, cfg.normalized)?;
            let c = 0.5 * max_exp_minus_4u(metric.u()) * 1.1;
            r.scale(dt).solve_stabilized(dt * c)
        }
        Scheme::ExplicitRk4 => {
            let u = metric.u();
            let stage = |du: &ScalarField, h: f64| -> Result<ScalarField> {
                let m = ConformalMetric::new(u.zip(du, move |a, b| a + h * b))?;
                rhs(&m, cfg.normalized)
            };
            let k1 = rhs(metric, cfg.normalized)?;
            let k2 = stage(&k1, 0.5 * dt)?;
            let k3 = stage(&k2, 0.5 * dt)?;
            let k4 = stage(&k3, dt)?;
            let mut out = Vec::with_capacity(u.len());
            for i in 0..u.len() {
                out.push(
                    dt / 6.0
                        * (k1.values()[i]
                            + 2.0 * k2.values()[i]
                            + 2.0 * k3.values()[i]
                            + k4.values()[i]),
                );
            }
            ScalarField::from_values(u.background().clone(), out)
        }
    }
}

/// RK4 stability cap `safety·h⁴/(8·max e^{−4u})`.
fn rk4_cap(metric: &ConformalMetric, cfg: &FlowConfig) -> f64 {
    let h = metric.background().min_spacing();
    cfg.safety * h * h * h * h / (8.0 * max_exp_minus_4u(metric.u()))
}

/// One accepted time step; halves dt and retries on rejection
/// (non-finite values or max|δu| > 0.1), errors out on dt collapse.
pub fn step(state: &FlowState, cfg: &FlowConfig) -> Result<FlowState> {
    step_capped(state, cfg, f64::INFINITY)
}

fn step_capped(state: &FlowState, cfg: &FlowConfig, t_cap: f64) -> Result<FlowState> {
    cfg.validate()?;
    let mut dt_req = state.dt.min(cfg.dt_max);
    let mut accepts = state.accepts_since_growth;
    loop {
        let mut dt_try = dt_req;
        if cfg.scheme == Scheme::ExplicitRk4 {
            dt_try = dt_try.min(rk4_cap(&state.metric, cfg));
        }
        let remaining = t_cap - state.t;
        if remaining.is_finite() && remaining > 0.0 {
            dt_try = dt_try.min(remaining);
        }
        let delta = match increment(&state.metric, cfg, dt_try) {
            Ok(d) => d,
            Err(Error::NonFiniteField) => {
                // blow-up inside the stage evaluations: treat as rejection
                dt_req *= 0.5;
                accepts = 0;
                if dt_req < 1e-14 * cfg.dt_init {
                    return Err(Error::StepSizeCollapse {
                        t: state.t,
                        dt: dt_req,
                    });
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let ok = delta.is_finite() && delta.max_abs() <= 0.1;
        if !ok {
            dt_req *= 0.5;
            accepts = 0;
            if dt_req < 1e-14 * cfg.dt_init {
                return Err(Error::StepSizeCollapse {
                    t: state.t,
                    dt: dt_req,
                });
            }
            continue;
        }
        let u_next = state.metric.u().add(&delta);
        accepts += 1;
        let mut dt_next = dt_req;
        if accepts >= 10 {
            dt_next = (dt_req * 1.2).min(cfg.dt_max);
            accepts = 0;
        }
        return Ok(FlowState {
            t: state.t + dt_try,
            metric: ConformalMetric::new(u_next)?,
            step_count: state.step_count + 1,
            dt: dt_next,
            dt_last: dt_try,
            accepts_since_growth: accepts,
        });
    }
}

/// Result of an integration run. `aborted` carries the step failure when the
/// run did not reach its stopping condition; the records up to the failure
/// time are kept either way.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: FlowState,
    pub aborted: Option<Error>,
}

fn record_of(state: &FlowState, normalized: bool) -> Result<DiagnosticsRecord> {
    let rep = state.metric.energies()?;
    let dissipation = if normalized {
        state.metric.vn_dissipation()?
    } else {
        state.metric.dissipation()?
    };
    Ok(DiagnosticsRecord {
        t: state.t,
        vol: rep.vol,
        f: rep.f,
        e: rep.e,
        calabi: rep.calabi,
        total_curvature: rep.total_curvature,
        dissipation,
        max_abs_s: rep.max_abs_s,
        dt_used: state.dt_last,
    })
}

/// Integrate from `u0` to `t_end` (or until the Calabi stop threshold),
/// emitting a record at t = 0, every `record_every` accepted steps, and at
/// the final state.
pub fn run(u0: ScalarField, cfg: &FlowConfig) -> Result<RunOutput> {
    let state = FlowState::new(u0, cfg)?;
    run_from(state, cfg)
}

/// Continue a run from an existing state (used by checkpoint resume).
pub fn run_from(state: FlowState, cfg: &FlowConfig) -> Result<RunOutput> {
    run_with(state, cfg, |_, _| {})
}

/// Like [`run_from`], with an observer called at every emitted record
/// (streaming export, intermediate checkpoints).
pub fn run_with(
    mut state: FlowState,
    cfg: &FlowConfig,
    mut on_record: impl FnMut(&FlowState, &DiagnosticsRecord),
) -> Result<RunOutput> {
    cfg.validate()?;
    let mut records = Vec::new();
    let first = record_of(&state, cfg.normalized)?;
    let mut stopped = cfg.stop_calabi_below.is_some_and(|c| first.calabi < c);
    on_record(&state, &first);
    records.push(first);
    let mut last_recorded_step = state.step_count;
    let mut aborted = None;

    while !stopped && state.t < cfg.t_end * (1.0 - 1e-15) {
        match step_capped(&state, cfg, cfg.t_end) {
            Ok(next) => state = next,
            Err(e) => {
                aborted = Some(e);
                break;
            }
        }
        let due = state.step_count % cfg.record_every as u64 == 0;
        let done = state.t >= cfg.t_end * (1.0 - 1e-15);
        if due || done {
            let rec = record_of(&state, cfg.normalized)?;
            if let Some(thresh) = cfg.stop_calabi_below {
                if rec.calabi < thresh {
                    stopped = true;
                }
            }
            on_record(&state, &rec);
            records.push(rec);
            last_recorded_step = state.step_count;
        }
    }
    if state.step_count != last_recorded_step {
        let rec = record_of(&state, cfg.normalized)?;
        on_record(&state, &rec);
        records.push(rec);
    }
    Ok(RunOutput {
        records,
        final_state: state,
        aborted,
    })
}

/// Least-squares exponential fit of the Calabi energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    /// Positive rate means `calabi ~ e^{−rate·t}`.
    pub rate: f64,
    pub r_squared: f64,
}

/// Fit `log(calabi)` against `t` over records with `t ∈ [t_lo, t_hi]`.
pub fn fit_decay_rate(records: &[DiagnosticsRecord], t_lo: f64, t_hi: f64) -> Result<DecayFit> {
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for r in records {
        if r.t >= t_lo && r.t <= t_hi {
            if r.calabi <= 0.0 {
                return Err(Error::NonPositiveCalabi);
            }
            ts.push(r.t);
            ys.push(libm::log(r.calabi));
        }
    }
    let n = ts.len();
    if n < 4 {
        return Err(Error::TooFewSamples { needed: 4, got: n });
    }
    let nf = n as f64;
    let tbar = ts.iter().sum::<f64>() / nf;
    let ybar = ys.iter().sum::<f64>() / nf;
    let mut stt = 0.0;
    let mut sty = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dt = ts[i] - tbar;
        let dy = ys[i] - ybar;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(Error::InvalidParam("degenerate time window"));
    }
    let slope = sty / stt;
    let r_squared = if syy == 0.0 { 1.0 } else { (sty * sty) / (stt * syy) };
    Ok(DecayFit {
        rate: -slope,
        r_squared,
    })
}
