//! Cross-route identities: the conformal gradient against the general
//! coordinate pipeline, the variational (directional-derivative) oracle, and
//! divergence-freeness of the gradient.

use l2flow_core::background::{Background, ScalarField};
use l2flow_core::geometry::ConformalMetric;
use l2flow_core::rng::Rng;
use l2flow_core::tensor::{
    self, DerivScheme, SymTensorField,
};

use std::sync::Arc;

const PI: f64 = std::f64::consts::PI;

fn torus(n: usize) -> Arc<Background> {
    Background::flat_torus(2.0 * PI, 2.0 * PI, n, n).unwrap()
}

/// u = 0.1 cos x + 0.07 sin y, the cross-check conformal factor.
fn xcheck_u(bg: Arc<Background>) -> ScalarField {
    ScalarField::from_fn_torus(bg, |x, y| 0.1 * libm::cos(x) + 0.07 * libm::sin(y)).unwrap()
}

/// Max pointwise discrepancy between the two gradient routes at resolution n.
fn gradient_discrepancy(n: usize, scheme: DerivScheme) -> f64 {
    let bg = torus(n);
    let u = xcheck_u(bg);
    let g = ConformalMetric::new(u.clone()).unwrap();
    let surface = g.energy_gradient().unwrap();
    let coord = SymTensorField::conformal_on_torus(&u).unwrap();
    let general = tensor::energy_gradient_general(&coord, scheme).unwrap();
    general.add_scaled(&surface, -1.0).max_abs()
}

#[test]
fn general_gradient_matches_surface_gradient_spectrally() {
    let d = gradient_discrepancy(64, DerivScheme::Spectral);
    assert!(d < 1e-9, "spectral-route discrepancy {d}");
}

#[test]
fn general_gradient_converges_at_second_order() {
    let d64 = gradient_discrepancy(64, DerivScheme::Centered2);
    let d128 = gradient_discrepancy(128, DerivScheme::Centered2);
    assert!(d64 > 1e-9, "coarse discrepancy suspiciously small: {d64}");
    let order = libm::log2(d64 / d128);
    println!("gradient cross-check: d64 = {d64:.3e}, d128 = {d128:.3e}, order = {order:.2}");
    assert!(order >= 1.7, "observed order {order}");
}

fn divergence_residual(n: usize, scheme: DerivScheme) -> f64 {
    let bg = torus(n);
    let u = xcheck_u(bg);
    let coord = SymTensorField::conformal_on_torus(&u).unwrap();
    let grad = tensor::energy_gradient_general(&coord, scheme).unwrap();
    let (d0, d1) = tensor::divergence(&grad, &coord, scheme).unwrap();
    d0.max_abs().max(d1.max_abs())
}

#[test]
fn gradient_is_divergence_free() {
    // Spectral route: residual at the smooth-field floor.
    let r = divergence_residual(64, DerivScheme::Spectral);
    assert!(r < 1e-9, "spectral divergence residual {r}");
    // FD route: truncation-limited, decaying at second order.
    let r64 = divergence_residual(64, DerivScheme::Centered2);
    let r128 = divergence_residual(128, DerivScheme::Centered2);
    let order = libm::log2(r64 / r128);
    println!("divergence residual: r64 = {r64:.3e}, r128 = {r128:.3e}, order = {order:.2}");
    assert!(r64 > 1e-9, "coarse residual suspiciously small");
    assert!(order >= 1.7, "observed order {order}");
}

#[test]
fn surface_gradient_divergence_free_on_conformal_metrics() {
    // The geometry-module tensor, fed through the FD divergence at two
    // resolutions: second-order decay toward zero.
    let res: Vec<f64> = [64usize, 128]
        .iter()
        .map(|&n| {
            let bg = torus(n);
            let u = xcheck_u(bg);
            let g = ConformalMetric::new(u.clone()).unwrap();
            let grad = g.energy_gradient().unwrap();
            let coord = SymTensorField::conformal_on_torus(&u).unwrap();
            let (d0, d1) = tensor::divergence(&grad, &coord, DerivScheme::Centered2).unwrap();
            d0.max_abs().max(d1.max_abs())
        })
        .collect();
    let order = libm::log2(res[0] / res[1]);
    println!("surface-gradient divergence: {res:?}, order {order:.2}");
    assert!(order >= 1.7, "observed order {order}");
}

/// Smooth random symmetric tensor with a low-mode spectrum.
fn random_sym_tensor(bg: &Arc<Background>, rng: &mut Rng, amp: f64) -> SymTensorField {
    let component = |rng: &mut Rng| {
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
            let mut acc = 0.0;
            for &(kx, ky, a, b) in &coeffs {
                acc += a * libm::cos(kx * x + ky * y) + b * libm::sin(kx * x + ky * y);
            }
            acc
        })
        .unwrap();
        let m = f.max_abs().max(1e-300);
        f.scale(amp / m)
    };
    let c11 = component(rng);
    let c12 = component(rng);
    let c22 = component(rng);
    SymTensorField::from_components(c11, c12, c22).unwrap()
}

/// Random SPD metric: δ plus a small smooth symmetric perturbation.
fn random_metric(bg: &Arc<Background>, rng: &mut Rng) -> SymTensorField {
    let pert = random_sym_tensor(bg, rng, 0.15);
    let one = ScalarField::constant(bg.clone(), 1.0);
    let m = SymTensorField::from_components(
        one.add(pert.c11()),
        pert.c12().clone(),
        one.add(pert.c22()),
    )
    .unwrap();
    m.ensure_spd().unwrap();
    m
}

#[test]
fn divergence_decays_on_random_spd_metrics() {
    // Same continuum random metric sampled at two resolutions (the seeded
    // coefficient draw does not depend on the grid), divergence of the
    // assembled gradient decaying at second order.
    let res: Vec<f64> = [64usize, 128]
        .iter()
        .map(|&n| {
            let bg = torus(n);
            let mut rng = Rng::seed_from(31);
            let g = random_metric(&bg, &mut rng);
            let grad = tensor::energy_gradient_general(&g, DerivScheme::Centered2).unwrap();
            let (d0, d1) = tensor::divergence(&grad, &g, DerivScheme::Centered2).unwrap();
            d0.max_abs().max(d1.max_abs())
        })
        .collect();
    let order = libm::log2(res[0] / res[1]);
    println!("random-SPD divergence residuals {res:?}, order {order:.2}");
    assert!(res[0] > 1e-9);
    assert!(order >= 1.7, "observed order {order}");
}

#[test]
fn variational_oracle_homothety() {
    // h = g: the scaling law F(λg) = λ⁻¹F(g) forces dF = −F.
    let bg = torus(48);
    let mut rng = Rng::seed_from(2024);
    let g = random_metric(&bg, &mut rng);
    let f = tensor::energy_f(&g, DerivScheme::Spectral).unwrap();
    let dd = tensor::directional_derivative_f(&g, &g, 1e-5, DerivScheme::Spectral).unwrap();
    let rel = (dd + f).abs() / f;
    println!("homothety: F = {f}, dF = {dd}, rel = {rel:.3e}");
    assert!(rel < 1e-6, "homothety relative error {rel}");
}

#[test]
fn variational_oracle_random_directions() {
    // dF = 2∫⟨grad F, h⟩ dV on twenty random (g, h) pairs, ε = 1e-5.
    let bg = torus(48);
    let mut rng = Rng::seed_from(7);
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let g = random_metric(&bg, &mut rng);
        let h = random_sym_tensor(&bg, &mut rng, 0.2);
        let dd = tensor::directional_derivative_f(&g, &h, 1e-5, DerivScheme::Spectral).unwrap();
        let grad = tensor::energy_gradient_general(&g, DerivScheme::Spectral).unwrap();
        let pairing = 2.0 * tensor::inner_product_integral(&g, &grad, &h).unwrap();
        let scale = dd.abs().max(pairing.abs()).max(1e-12);
        let rel = (dd - pairing).abs() / scale;
        worst = worst.max(rel);
        assert!(rel < 1e-3, "trial {trial}: dd = {dd}, pairing = {pairing}, rel = {rel}");
    }
    println!("variational oracle worst relative error: {worst:.3e}");
}

#[test]
fn variational_oracle_lie_directions() {
    // h = L_X g is tangent to the diffeomorphism orbit, so dF vanishes.
    let bg = torus(48);
    let mut rng = Rng::seed_from(99);
    for _ in 0..5 {
        let g = random_metric(&bg, &mut rng);
        let x0 = random_sym_tensor(&bg, &mut rng, 0.3).c11().clone();
        let x1 = random_sym_tensor(&bg, &mut rng, 0.3).c22().clone();
        let h = tensor::lie_derivative_metric(&g, &x0, &x1, DerivScheme::Spectral).unwrap();
        let dd = tensor::directional_derivative_f(&g, &h, 1e-5, DerivScheme::Spectral).unwrap();
        // scale: a generic pairing magnitude for this h
        let grad = tensor::energy_gradient_general(&g, DerivScheme::Spectral).unwrap();
        let gnorm = tensor::inner_product_integral(&g, &grad, &grad).unwrap();
        let hnorm = tensor::inner_product_integral(&g, &h, &h).unwrap();
        let scale = 2.0 * libm::sqrt(gnorm.max(0.0) * hnorm.max(0.0)).max(1e-12);
        let rel = dd.abs() / scale;
        println!("lie direction: dd = {dd:.3e}, scale = {scale:.3e}, rel = {rel:.3e}");
        assert!(rel < 1e-6, "diffeo-invariance violated: rel {rel}");
    }
}

#[test]
fn conformal_scalar_curvature_against_fd_oracle() {
    // geometry's spectral transformation law vs the coordinate FD oracle on
    // the full tensor e^{2u}δ for u = 0.1 cos x. The oracle is second order,
    // so Richardson extrapolation over the nested 64/128 grids removes the
    // leading h² term and lands at the 1e-6 bar.
    let fd_scalar = |n: usize| -> Vec<f64> {
        let bg = torus(n);
        let u = ScalarField::from_fn_torus(bg, |x, _| 0.1 * libm::cos(x)).unwrap();
        let coord = SymTensorField::conformal_on_torus(&u).unwrap();
        tensor::curvature_tensors(&coord, DerivScheme::Centered2)
            .unwrap()
            .scalar
            .values()
            .to_vec()
    };
    let bg = torus(64);
    let u = ScalarField::from_fn_torus(bg, |x, _| 0.1 * libm::cos(x)).unwrap();
    let s_conf = ConformalMetric::new(u).unwrap().scalar_curvature().unwrap();
    let coarse = fd_scalar(64);
    let fine = fd_scalar(128);
    let mut worst: f64 = 0.0;
    for iy in 0..64 {
        for ix in 0..64 {
            let extrap = (4.0 * fine[2 * iy * 128 + 2 * ix] - coarse[iy * 64 + ix]) / 3.0;
            worst = worst.max((extrap - s_conf.values()[iy * 64 + ix]).abs());
        }
    }
    println!("scalar curvature vs extrapolated FD oracle: {worst:.3e}");
    assert!(worst < 1e-6, "oracle mismatch {worst}");
}
