//! Behavior of the integrated flows: the dissipation identity dF/dt = −2D,
//! conservation laws, monotonicity, and the linearized decay rates.

use l2flow_core::background::{Background, ScalarField};
use l2flow_core::flow::{self, DiagnosticsRecord, FlowConfig, Scheme};

use std::sync::Arc;

const PI: f64 = std::f64::consts::PI;

fn torus(n: usize) -> Arc<Background> {
    Background::flat_torus(2.0 * PI, 2.0 * PI, n, n).unwrap()
}

/// Worst interior-record residual of |ΔF/Δt + 2D|/(2D).
fn dissipation_residual(records: &[DiagnosticsRecord]) -> f64 {
    let mut worst: f64 = 0.0;
    for w in records.windows(3) {
        let dfdt = (w[2].f - w[0].f) / (w[2].t - w[0].t);
        let d = w[1].dissipation;
        if d > 0.0 {
            worst = worst.max((dfdt + 2.0 * d).abs() / (2.0 * d));
        }
    }
    worst
}

fn low_mode_u(bg: Arc<Background>) -> ScalarField {
    ScalarField::from_fn_torus(bg, |x, y| 0.22 * libm::cos(x) + 0.11 * libm::cos(y) * libm::cos(x))
        .unwrap()
}

#[test]
fn dissipation_identity_and_dt_refinement() {
    let run_at = |dt: f64| {
        let cfg = FlowConfig {
            dt_init: dt,
            dt_max: dt,
            t_end: 0.02,
            record_every: 1,
            ..FlowConfig::default()
        };
        let out = flow::run(low_mode_u(torus(32)), &cfg).unwrap();
        assert!(out.aborted.is_none());
        dissipation_residual(&out.records)
    };
    let r1 = run_at(1e-4);
    let r2 = run_at(5e-5);
    println!("dissipation residual: dt=1e-4 -> {r1:.3e}, dt=5e-5 -> {r2:.3e}");
    assert!(r1 < 1e-2, "identity residual {r1}");
    assert!(r2 < r1, "halving dt must reduce the residual");
}

#[test]
fn vn_dissipation_identity_along_normalized_flow() {
    let cfg = FlowConfig {
        normalized: true,
        dt_init: 1e-4,
        dt_max: 1e-4,
        t_end: 0.02,
        record_every: 1,
        ..FlowConfig::default()
    };
    let out = flow::run(low_mode_u(torus(32)), &cfg).unwrap();
    assert!(out.aborted.is_none());
    let r = dissipation_residual(&out.records);
    println!("vn dissipation residual: {r:.3e}");
    assert!(r < 1e-2, "normalized identity residual {r}");
}

#[test]
fn unnormalized_volume_grows_at_rate_quarter_f() {
    // V̇ = ¼F along the plain flow, checked by central differences, plus the
    // integrated linear bound vol(t) ≤ vol(0) + ¼F(0)·t.
    let cfg = FlowConfig {
        dt_init: 1e-4,
        dt_max: 1e-4,
        t_end: 0.05,
        record_every: 1,
        ..FlowConfig::default()
    };
    let bg = torus(32);
    let u0 = ScalarField::from_fn_torus(bg, |x, y| 0.3 * libm::cos(x) * libm::cos(y)).unwrap();
    let out = flow::run(u0, &cfg).unwrap();
    let recs = &out.records;
    let mut worst: f64 = 0.0;
    for w in recs.windows(3) {
        let vdot = (w[2].vol - w[0].vol) / (w[2].t - w[0].t);
        let rel = (vdot - 0.25 * w[1].f).abs() / (0.25 * w[1].f);
        worst = worst.max(rel);
    }
    println!("V-dot vs F/4 worst relative error: {worst:.3e}");
    assert!(worst < 1e-2);
    let v0 = recs[0].vol;
    let f0 = recs[0].f;
    for r in recs {
        // first-order stepping overshoots the continuum bound by O(dt) per
        // unit time; allow 0.1% of the bound itself
        let bound = v0 + 0.25 * f0 * r.t;
        assert!(r.vol <= bound * (1.0 + 1e-3), "linear growth bound at t={}", r.t);
    }
}

#[test]
fn normalized_flow_conserves_volume_long_run() {
    // t_end = 10 with mild data; volume drift stays below 1e-6 relative.
    let bg = torus(32);
    let u0 = ScalarField::from_fn_torus(bg, |x, _| 1e-2 * libm::cos(x)).unwrap();
    let cfg = FlowConfig {
        normalized: true,
        dt_init: 1e-4,
        dt_max: 1e-3,
        t_end: 10.0,
        record_every: 100,
        ..FlowConfig::default()
    };
    let out = flow::run(u0, &cfg).unwrap();
    assert!(out.aborted.is_none());
    let v0 = out.records[0].vol;
    for r in &out.records {
        assert!(
            (r.vol - v0).abs() < 1e-6 * v0,
            "volume drift {} at t={}",
            (r.vol - v0).abs() / v0,
            r.t
        );
    }
}

#[test]
fn gauss_bonnet_conserved_along_flows() {
    // Torus: ∫s dV stays at 0 (1e-8 absolute); sphere: at 8π (1e-6 relative).
    let cfg = FlowConfig {
        dt_init: 1e-4,
        dt_max: 1e-3,
        t_end: 0.5,
        record_every: 20,
        ..FlowConfig::default()
    };
    let out = flow::run(low_mode_u(torus(32)), &cfg).unwrap();
    for r in &out.records {
        assert!(r.total_curvature.abs() < 1e-8, "torus GB at t={}", r.t);
    }

    let bgs = Background::sphere(64).unwrap();
    let u0 = ScalarField::from_fn_sphere(bgs, |t| {
        let c = libm::cos(t);
        0.1 * 0.5 * (3.0 * c * c - 1.0)
    })
    .unwrap();
    let cfg = FlowConfig {
        normalized: true,
        dt_init: 1e-5,
        dt_max: 2e-4,
        t_end: 0.5,
        record_every: 20,
        ..FlowConfig::default()
    };
    let out = flow::run(u0, &cfg).unwrap();
    assert!(out.aborted.is_none());
    for r in &out.records {
        assert!(
            (r.total_curvature - 8.0 * PI).abs() < 1e-6 * 8.0 * PI,
            "sphere GB at t={}",
            r.t
        );
    }
}

#[test]
fn f_monotone_and_e_monotone() {
    // F nonincreasing along both flows; E nonincreasing along the
    // normalized flow (it is the gradient flow of E).
    for normalized in [false, true] {
        let cfg = FlowConfig {
            normalized,
            dt_init: 1e-4,
            dt_max: 1e-3,
            t_end: 1.0,
            record_every: 10,
            ..FlowConfig::default()
        };
        let out = flow::run(low_mode_u(torus(32)), &cfg).unwrap();
        assert!(out.aborted.is_none());
        let f0 = out.records[0].f;
        for w in out.records.windows(2) {
            assert!(
                w[1].f <= w[0].f + 1e-6 * f0 * (w[1].t - w[0].t),
                "F monotonicity (normalized={normalized}) at t={}",
                w[1].t
            );
            if normalized {
                assert!(
                    w[1].e <= w[0].e + 1e-8 * out.records[0].e.max(1.0),
                    "E monotonicity at t={}",
                    w[1].t
                );
            }
        }
    }
}

#[test]
fn torus_mode_decays_at_linearized_rate() {
    // u₀ = 1e-3 cos x on the 2π torus, normalized flow: the Calabi energy
    // decays like e^{−2t} (rate 2|k|⁴ with |k| = 1).
    let bg = torus(32);
    let u0 = ScalarField::from_fn_torus(bg, |x, _| 1e-3 * libm::cos(x)).unwrap();
    let cfg = FlowConfig {
        normalized: true,
        dt_init: 1e-4,
        dt_max: 5e-3,
        t_end: 3.0,
        record_every: 5,
        ..FlowConfig::default()
    };
    let out = flow::run(u0, &cfg).unwrap();
    assert!(out.aborted.is_none());
    let fit = flow::fit_decay_rate(&out.records, 0.5, 2.5).unwrap();
    println!("torus calabi decay: rate = {}, r² = {}", fit.rate, fit.r_squared);
    assert!(fit.rate > 1.9 && fit.rate < 2.1, "rate {}", fit.rate);
    assert!(fit.r_squared > 0.999);
}

#[test]
fn sphere_mode_decays_at_linearized_rate() {
    // l = 2 perturbation of the round sphere under the normalized flow:
    // u-rate (l(l+1)−2)(l(l+1)−1) = 20, Calabi rate 40.
    let bg = Background::sphere(128).unwrap();
    let u0 = ScalarField::from_fn_sphere(bg, |t| {
        let c = libm::cos(t);
        1e-2 * 0.5 * (3.0 * c * c - 1.0)
    })
    .unwrap();
    let cfg = FlowConfig {
        normalized: true,
        dt_init: 1e-5,
        dt_max: 2e-4,
        t_end: 0.35,
        record_every: 5,
        ..FlowConfig::default()
    };
    let out = flow::run(u0, &cfg).unwrap();
    assert!(out.aborted.is_none());
    let fit = flow::fit_decay_rate(&out.records, 0.05, 0.3).unwrap();
    println!("sphere calabi decay: rate = {}, r² = {}", fit.rate, fit.r_squared);
    assert!(fit.rate > 38.0 && fit.rate < 42.0, "rate {}", fit.rate);
    assert!(fit.r_squared > 0.999);
}

#[test]
fn sphere_perturbation_converges_below_stop_threshold() {
    let bg = Background::sphere(64).unwrap();
    let u0 = ScalarField::from_fn_sphere(bg, |t| {
        let c = libm::cos(t);
        5e-3 * 0.5 * (3.0 * c * c - 1.0)
    })
    .unwrap();
    let cfg = FlowConfig {
        normalized: true,
        dt_init: 1e-5,
        dt_max: 5e-4,
        t_end: 2.0,
        record_every: 10,
        stop_calabi_below: Some(1e-10),
        ..FlowConfig::default()
    };
    let out = flow::run(u0, &cfg).unwrap();
    assert!(out.aborted.is_none());
    let last = out.records.last().unwrap();
    assert!(last.calabi < 1e-10, "calabi {}", last.calabi);
    assert!(last.t < 2.0, "stopped early via the calabi threshold");
    // Calabi decays monotonically on this run.
    for w in out.records.windows(2) {
        assert!(w[1].calabi <= w[0].calabi * (1.0 + 1e-9) + 1e-18);
    }
}

#[test]
fn rk4_respects_stability_cap() {
    // Requesting a huge dt under RK4 must clamp to the h⁴ cap, not blow up.
    let bg = torus(16);
    let u0 = ScalarField::from_fn_torus(bg.clone(), |x, _| 0.05 * libm::cos(x)).unwrap();
    let cfg = FlowConfig {
        scheme: Scheme::ExplicitRk4,
        dt_init: 1e-2,
        dt_max: 1e-2,
        t_end: 0.02,
        record_every: 100,
        ..FlowConfig::default()
    };
    let out = flow::run(u0, &cfg).unwrap();
    assert!(out.aborted.is_none());
    let h = bg.min_spacing();
    let cap = cfg.safety * h * h * h * h / 8.0; // e^{-4u} ≥ e^{-0.2}
    for r in out.records.iter().skip(1) {
        assert!(r.dt_used <= cap * libm::exp(0.2) * (1.0 + 1e-12));
    }
}
