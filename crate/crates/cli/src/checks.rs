//! Verification subcommands: the variational oracle (`gradcheck`), the
//! two-route gradient cross-check (`xcheck`), and the diffeomorphism
//! correction check (`diffeo-check`).

use std::sync::Arc;

use l2flow_core::background::{Background, ScalarField};
use l2flow_core::diffeo::{self, GridDiffeo};
use l2flow_core::flow::{self, FlowConfig, FlowState, Scheme};
use l2flow_core::geometry::ConformalMetric;
use l2flow_core::rng::Rng;
use l2flow_core::tensor::{self, DerivScheme, SymTensorField};

use crate::config::ConfigError;

const PI: f64 = std::f64::consts::PI;

fn torus(n: usize) -> Result<Arc<Background>, ConfigError> {
    Background::flat_torus(2.0 * PI, 2.0 * PI, n, n).map_err(|e| ConfigError(e.to_string()))
}

fn ce(e: l2flow_core::error::Error) -> ConfigError {
    ConfigError(e.to_string())
}

/// Smooth random symmetric tensor with modes |k|∞ ≤ 2, max-normalized.
fn random_sym(bg: &Arc<Background>, rng: &mut Rng, amp: f64) -> Result<SymTensorField, ConfigError> {
    let component = |rng: &mut Rng| -> Result<ScalarField, ConfigError> {
        let mut coeffs = Vec::new();
        for kx in 0i64..=2 {
            for ky in -2i64..=2 {
                if kx == 0 && ky <= 0 {
                    continue;
                }
                coeffs.push((kx as f64, ky as f64, rng.next_normal(), rng.next_normal()));
            }
        }
        let f = ScalarField::from_fn_torus(bg.clone(), move |x, y| {
            coeffs
                .iter()
                .map(|&(kx, ky, a, b)| {
                    a * (kx * x + ky * y).cos() + b * (kx * x + ky * y).sin()
                })
                .sum()
        })
        .map_err(ce)?;
        let m = f.max_abs().max(1e-300);
        Ok(f.scale(amp / m))
    };
    let c11 = component(rng)?;
    let c12 = component(rng)?;
    let c22 = component(rng)?;
    SymTensorField::from_components(c11, c12, c22).map_err(ce)
}

fn random_metric(bg: &Arc<Background>, rng: &mut Rng) -> Result<SymTensorField, ConfigError> {
    let pert = random_sym(bg, rng, 0.15)?;
    let one = ScalarField::constant(bg.clone(), 1.0);
    let m = SymTensorField::from_components(
        one.add(pert.c11()),
        pert.c12().clone(),
        one.add(pert.c22()),
    )
    .map_err(ce)?;
    m.ensure_spd().map_err(ce)?;
    Ok(m)
}

pub struct GradcheckReport {
    pub resolution: usize,
    pub eps: f64,
    pub trials: usize,
    pub homothety_rel: f64,
    pub worst_rel: f64,
    pub pass: bool,
}

impl GradcheckReport {
    pub fn print(&self) {
        println!(
            "gradcheck: {} randomized directions at {}^2, eps = {:.1e}",
            self.trials, self.resolution, self.eps
        );
        println!("  homothety direction:   rel error {:.3e} (want < 1e-6)", self.homothety_rel);
        println!("  max over directions:   rel error {:.3e} (want < 1e-3)", self.worst_rel);
        println!("  => {}", if self.pass { "PASS" } else { "FAIL" });
    }
}

/// Central-difference directional derivatives of F against the assembled
/// gradient pairing `2∫⟨grad F, h⟩dV` on randomized metrics.
pub fn gradcheck(resolution: usize, eps: f64, seed: u64) -> Result<GradcheckReport, ConfigError> {
    let bg = torus(resolution)?;
    let mut rng = Rng::seed_from(seed);
    let trials = 20;

    let g0 = random_metric(&bg, &mut rng)?;
    let f0 = tensor::energy_f(&g0, DerivScheme::Spectral).map_err(ce)?;
    let dd0 = tensor::directional_derivative_f(&g0, &g0, eps, DerivScheme::Spectral).map_err(ce)?;
    let homothety_rel = (dd0 + f0).abs() / f0;

    let mut worst_rel: f64 = 0.0;
    for _ in 0..trials {
        let g = random_metric(&bg, &mut rng)?;
        let h = random_sym(&bg, &mut rng, 0.2)?;
        let dd = tensor::directional_derivative_f(&g, &h, eps, DerivScheme::Spectral).map_err(ce)?;
        let grad = tensor::energy_gradient_general(&g, DerivScheme::Spectral).map_err(ce)?;
        let pairing = 2.0 * tensor::inner_product_integral(&g, &grad, &h).map_err(ce)?;
        let rel = (dd - pairing).abs() / dd.abs().max(pairing.abs()).max(1e-12);
        worst_rel = worst_rel.max(rel);
    }
    let pass = worst_rel < 1e-3 && homothety_rel < 1e-6;
    Ok(GradcheckReport {
        resolution,
        eps,
        trials,
        homothety_rel,
        worst_rel,
        pass,
    })
}

pub struct XcheckReport {
    pub resolution: usize,
    pub grad_coarse: f64,
    pub grad_fine: f64,
    pub grad_order: f64,
    pub div_coarse: f64,
    pub div_fine: f64,
    pub div_order: f64,
    pub identity_residual: f64,
    pub pass: bool,
}

impl XcheckReport {
    pub fn print(&self) {
        let n = self.resolution;
        println!("xcheck: grad F cross-route comparison at {n}^2 and {}^2", 2 * n);
        println!(
            "  |grad_general - grad_surface|: {:.3e} -> {:.3e}, observed order {:.2}",
            self.grad_coarse, self.grad_fine, self.grad_order
        );
        println!(
            "  divergence-free residual:      {:.3e} -> {:.3e}, observed order {:.2}",
            self.div_coarse, self.div_fine, self.div_order
        );
        println!(
            "  2D curvature identity residual (spectral): {:.3e}",
            self.identity_residual
        );
        println!("  => {}", if self.pass { "PASS" } else { "FAIL" });
    }
}

fn xcheck_u(bg: Arc<Background>) -> Result<ScalarField, ConfigError> {
    ScalarField::from_fn_torus(bg, |x, y| 0.1 * (x).cos() + 0.07 * (y).sin()).map_err(ce)
}

/// grad_F_general vs grad_F_surface and the surface curvature identity, with
/// an observed-order estimate between `resolution` and `2·resolution`.
pub fn xcheck(resolution: usize) -> Result<XcheckReport, ConfigError> {
    let discrepancy = |n: usize| -> Result<(f64, f64), ConfigError> {
        let bg = torus(n)?;
        let u = xcheck_u(bg)?;
        let surface = ConformalMetric::new(u.clone())
            .map_err(ce)?
            .energy_gradient()
            .map_err(ce)?;
        let coord = SymTensorField::conformal_on_torus(&u).map_err(ce)?;
        let general = tensor::energy_gradient_general(&coord, DerivScheme::Centered2).map_err(ce)?;
        let d = general.add_scaled(&surface, -1.0).max_abs();
        let (d0, d1) = tensor::divergence(&general, &coord, DerivScheme::Centered2).map_err(ce)?;
        Ok((d, d0.max_abs().max(d1.max_abs())))
    };
    let (grad_coarse, div_coarse) = discrepancy(resolution)?;
    let (grad_fine, div_fine) = discrepancy(2 * resolution)?;
    let grad_order = (grad_coarse / grad_fine).log2();
    let div_order = (div_coarse / div_fine).log2();

    // pointwise R_{ijkl} = ½s(g_il g_jk − g_ik g_jl) through the spectral route
    let bg = torus(resolution)?;
    let u = xcheck_u(bg)?;
    let coord = SymTensorField::conformal_on_torus(&u).map_err(ce)?;
    let ct = tensor::curvature_tensors(&coord, DerivScheme::Spectral).map_err(ce)?;
    let mut identity_residual: f64 = 0.0;
    for p in 0..coord.len() {
        let gv = |i: usize, j: usize| coord.component(i.min(j), i.max(j)).values()[p];
        let s = ct.scalar.values()[p];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let want = 0.5 * s * (gv(i, l) * gv(j, k) - gv(i, k) * gv(j, l));
                        identity_residual =
                            identity_residual.max((ct.riemann(p, i, j, k, l) - want).abs());
                    }
                }
            }
        }
    }

    let pass = grad_order >= 1.7 && div_order >= 1.7 && identity_residual < 1e-7;
    Ok(XcheckReport {
        resolution,
        grad_coarse,
        grad_fine,
        grad_order,
        div_coarse,
        div_fine,
        div_order,
        identity_residual,
        pass,
    })
}

pub struct DiffeoCheckReport {
    pub f_invariance_rel: f64,
    pub hessian_lie_rel: f64,
    pub residuals: Vec<(f64, f64)>,
    pub residual_order: f64,
    pub pass: bool,
}

impl DiffeoCheckReport {
    pub fn print(&self) {
        println!("diffeo-check: pullback through the integrated point flow");
        println!(
            "  F-invariance of pullback:  rel error {:.3e} (want < 1e-4)",
            self.f_invariance_rel
        );
        println!(
            "  hessian/Lie identity:      rel defect {:.3e} (want < 1e-8)",
            self.hessian_lie_rel
        );
        for (dt, r) in &self.residuals {
            println!("  full-flow residual @ dt_snap = {dt:.2e}: {r:.4e}");
        }
        println!(
            "  residual decay order {:.2} (want >= 1.7, O(dt^2))",
            self.residual_order
        );
        println!("  => {}", if self.pass { "PASS" } else { "FAIL" });
    }
}

/// Build snapshots of the conformal flow together with the correcting
/// diffeomorphism (generating field sampled at stride midpoints).
pub fn diffeo_trajectory(
    u0: ScalarField,
    scheme: Scheme,
    dt_flow: f64,
    stride: usize,
    n_snaps: usize,
) -> Result<Vec<(f64, GridDiffeo, ConformalMetric)>, ConfigError> {
    assert!(stride % 2 == 0);
    let cfg = FlowConfig {
        scheme,
        dt_init: dt_flow,
        dt_max: dt_flow,
        t_end: f64::MAX,
        record_every: 1,
        ..FlowConfig::default()
    };
    let mut states = vec![FlowState::new(u0, &cfg).map_err(ce)?];
    for _ in 0..(n_snaps - 1) * stride {
        states.push(flow::step(states.last().unwrap(), &cfg).map_err(ce)?);
    }
    let mut phi = GridDiffeo::identity(states[0].metric.background().clone()).map_err(ce)?;
    let dt_snap = stride as f64 * dt_flow;
    let mut out = vec![(0.0, phi.clone(), states[0].metric.clone())];
    for k in 0..n_snaps - 1 {
        let mid = &states[k * stride + stride / 2].metric;
        phi = phi.advance(mid, dt_snap).map_err(ce)?;
        out.push((
            states[(k + 1) * stride].t,
            phi.clone(),
            states[(k + 1) * stride].metric.clone(),
        ));
    }
    Ok(out)
}

pub fn default_diffeo_u(bg: Arc<Background>) -> Result<ScalarField, ConfigError> {
    ScalarField::from_fn_torus(bg, |x, y| {
        0.15 * (x).cos() * (y).cos() + 0.08 * (x).sin()
    })
    .map_err(ce)
}

pub fn diffeo_check(resolution: usize) -> Result<DiffeoCheckReport, ConfigError> {
    // F-invariance over a finite-displacement trajectory.
    let traj = diffeo_trajectory(
        default_diffeo_u(torus(resolution)?)?,
        Scheme::SemiImplicit,
        1e-4,
        100,
        5,
    )?;
    let mut f_invariance_rel: f64 = 0.0;
    for (_, phi, g) in &traj {
        let f_conf = g.energies().map_err(ce)?.f;
        let pb = diffeo::filtered(&phi.pullback(g).map_err(ce)?);
        let f_pb = tensor::energy_f(&pb, DerivScheme::Spectral).map_err(ce)?;
        f_invariance_rel = f_invariance_rel.max((f_pb - f_conf).abs() / f_conf);
    }

    // ∇²s = ½ L_{(∇s)♯} g at the snapshots.
    let mut hessian_lie_rel: f64 = 0.0;
    for (_, _, g) in &traj {
        let s = g.scalar_curvature().map_err(ce)?;
        let (hxx, hxy, hyy) = g.hessian_g(&s).map_err(ce)?;
        let x0 = g.u().zip(&s.dx().map_err(ce)?, |u, d| (-2.0 * u).exp() * d);
        let x1 = g.u().zip(&s.dy().map_err(ce)?, |u, d| (-2.0 * u).exp() * d);
        let coord = SymTensorField::conformal_on_torus(g.u()).map_err(ce)?;
        let lie =
            tensor::lie_derivative_metric(&coord, &x0, &x1, DerivScheme::Spectral).map_err(ce)?;
        let scale = hxx.max_abs().max(hyy.max_abs()).max(1e-300);
        let defect = hxx
            .zip(lie.c11(), |h, l| h - 0.5 * l)
            .max_abs()
            .max(hxy.zip(lie.c12(), |h, l| h - 0.5 * l).max_abs())
            .max(hyy.zip(lie.c22(), |h, l| h - 0.5 * l).max_abs());
        hessian_lie_rel = hessian_lie_rel.max(defect / scale);
    }

    // residual decay under snapshot refinement (RK4 trajectory at 32²).
    let dt_flow = 2e-5;
    let mut residuals = Vec::new();
    for &stride in &[16usize, 8, 4] {
        let n_snaps = 1 + 48 / stride;
        let traj = diffeo_trajectory(
            default_diffeo_u(torus(32)?)?,
            Scheme::ExplicitRk4,
            dt_flow,
            stride,
            n_snaps,
        )?;
        let r = diffeo::full_flow_residual(&traj).map_err(ce)?;
        residuals.push((stride as f64 * dt_flow, r));
    }
    let residual_order = (residuals[0].1 / residuals[2].1).log2() / 2.0;

    let pass = f_invariance_rel < 1e-4
        && hessian_lie_rel < 1e-8
        && residual_order >= 1.7
        && residuals[2].1 < 5e-2;
    Ok(DiffeoCheckReport {
        f_invariance_rel,
        hessian_lie_rel,
        residuals,
        residual_order,
        pass,
    })
}
