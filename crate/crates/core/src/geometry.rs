//! Conformal metrics `g = e^{2u} g₀`, their curvature, the energy
//! functionals, the surface form of the energy gradient, and the dissipation
//! functionals that govern the decay of `F = ∫ s² dV` along the flows.
//!
//! Conventions: `s` is twice the Gaussian curvature (s = 2 on the round unit
//! sphere); the gradient tensor is `−Δs·g + ∇²s − ¼s²g`, which is one half
//! of the true L² first variation of F, so variational identities carry an
//! explicit factor 2 (`dF = 2∫⟨grad F, h⟩ dV`, `dF/dt = −2D`).

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::background::{Background, ScalarField};
use crate::error::{Error, Result};
use crate::tensor::SymTensorField;

/// Conformal metric `g = e^{2u} g₀` over a fixed background.
#[derive(Clone, Debug)]
pub struct ConformalMetric {
    u: ScalarField,
}

/// All monitored functionals of one metric.
///
/// `f` is `∫s²dV`, `e` the scale-invariant `F·Vol`, `calabi` the curvature
/// variance `∫(s−s̄)²dV` (equal to `f − total_curvature²/vol` by expansion —
/// note the minus sign), `total_curvature` is `∫s dV = 4πχ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    pub f: f64,
    pub e: f64,
    pub calabi: f64,
    pub vol: f64,
    pub total_curvature: f64,
    pub s_bar: f64,
    pub max_abs_s: f64,
}

impl EnergyReport {
    /// Check the report's internal invariants (positivity, Cauchy–Schwarz,
    /// and the Calabi expansion identity), with floating-point-aware slack.
    pub fn validate(&self) -> Result<()> {
        if !(self.vol > 0.0) || self.f < 0.0 || self.calabi < 0.0 {
            return Err(Error::InvalidParam("energy report positivity violated"));
        }
        let tc2 = self.total_curvature * self.total_curvature;
        let scale = self.f.max(tc2 / self.vol).max(1e-300);
        if self.e < tc2 - 1e-8 * scale.max(1.0) {
            return Err(Error::InvalidParam("E >= (total curvature)^2 violated"));
        }
        let expanded = self.f - tc2 / self.vol;
        if (self.calabi - expanded).abs() > 1e-8 * (self.f + tc2 / self.vol + self.calabi + 1e-300)
        {
            return Err(Error::InvalidParam("calabi expansion identity violated"));
        }
        Ok(())
    }
}

impl ConformalMetric {
    pub fn new(u: ScalarField) -> Result<Self> {
        u.ensure_finite()?;
        Ok(ConformalMetric { u })
    }

    /// The background with u ≡ 0 (flat torus or round unit sphere).
    pub fn background_metric(background: Arc<Background>) -> Self {
        ConformalMetric {
            u: ScalarField::zeros(background),
        }
    }

    #[inline]
    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    #[inline]
    pub fn background(&self) -> &Arc<Background> {
        self.u.background()
    }

    /// e^{2u}, the conformal area density.
    pub fn conformal_factor(&self) -> ScalarField {
        self.u.map(|u| libm::exp(2.0 * u))
    }

    pub fn volume(&self) -> f64 {
        self.conformal_factor().integrate()
    }

    /// Scalar curvature via the 2D conformal transformation law
    /// `s = e^{−2u}(s₀ − 2Δ₀u)`.
    pub fn scalar_curvature(&self) -> Result<ScalarField> {
        let s0 = self.background().s0();
        let lap_u = self.u.laplacian()?;
        Ok(self
            .u
            .zip(&lap_u, |u, lu| libm::exp(-2.0 * u) * (s0 - 2.0 * lu)))
    }

    /// Laplace–Beltrami of `f` with respect to g: `e^{−2u} Δ₀ f`.
    pub fn laplacian_g(&self, f: &ScalarField) -> Result<ScalarField> {
        f.same_background(&self.u)?;
        let lap = f.laplacian()?;
        Ok(self.u.zip(&lap, |u, l| libm::exp(-2.0 * u) * l))
    }

    /// `∫ f dV` with respect to the conformal volume element.
    pub fn integrate_g(&self, f: &ScalarField) -> f64 {
        self.u.zip(f, |u, v| libm::exp(2.0 * u) * v).integrate()
    }

    /// All energy functionals of this metric.
    pub fn energies(&self) -> Result<EnergyReport> {
        let s = self.scalar_curvature()?;
        let vol = self.volume();
        let f = self.integrate_g(&s.mul(&s));
        let total_curvature = self.integrate_g(&s);
        let s_bar = total_curvature / vol;
        let dev = s.map(|v| (v - s_bar) * (v - s_bar));
        let calabi = self.integrate_g(&dev);
        Ok(EnergyReport {
            f,
            e: f * vol,
            calabi,
            vol,
            total_curvature,
            s_bar,
            max_abs_s: s.max_abs(),
        })
    }

    /// Covariant Hessian of `f` w.r.t. g, as coordinate components.
    ///
    /// Torus chart: conformal Christoffels Γ^k_ij = δᵢᵏ∂ⱼu + δⱼᵏ∂ᵢu − δᵢⱼ∂ᵏu.
    /// Sphere (axisymmetric): H_θθ = f″ − u′f′, H_θφ = 0,
    /// H_φφ = (sinθ cosθ + sin²θ·u′)·f′.
    pub fn hessian_g(&self, f: &ScalarField) -> Result<(ScalarField, ScalarField, ScalarField)> {
        f.same_background(&self.u)?;
        match self.background().as_ref() {
            Background::FlatTorus(_) => {
                let (fx, fy) = (f.dx()?, f.dy()?);
                let (ux, uy) = (self.u.dx()?, self.u.dy()?);
                let hxx_raw = f.dxx()?;
                let hxy_raw = f.dxy()?;
                let hyy_raw = f.dyy()?;
                let n = f.len();
                let mut hxx = Vec::with_capacity(n);
                let mut hxy = Vec::with_capacity(n);
                let mut hyy = Vec::with_capacity(n);
                for i in 0..n {
                    let (sx, sy) = (fx.values()[i], fy.values()[i]);
                    let (ax, ay) = (ux.values()[i], uy.values()[i]);
                    hxx.push(hxx_raw.values()[i] - ax * sx + ay * sy);
                    hxy.push(hxy_raw.values()[i] - ay * sx - ax * sy);
                    hyy.push(hyy_raw.values()[i] + ax * sx - ay * sy);
                }
                let bg = self.u.background().clone();
                Ok((
                    ScalarField::from_values(bg.clone(), hxx)?,
                    ScalarField::from_values(bg.clone(), hxy)?,
                    ScalarField::from_values(bg, hyy)?,
                ))
            }
            Background::SphereAxisym(sg) => {
                let fp = f.dtheta()?;
                let fpp = f.d2theta()?;
                let up = self.u.dtheta()?;
                let n = sg.ntheta;
                let mut htt = Vec::with_capacity(n);
                let mut hpp = Vec::with_capacity(n);
                for j in 0..n {
                    let st = sg.sin_theta(j);
                    let ct = sg.cot_theta(j) * st; // cos θ
                    htt.push(fpp.values()[j] - up.values()[j] * fp.values()[j]);
                    hpp.push((st * ct + st * st * up.values()[j]) * fp.values()[j]);
                }
                let bg = self.u.background().clone();
                Ok((
                    ScalarField::from_values(bg.clone(), htt)?,
                    ScalarField::zeros(bg.clone()),
                    ScalarField::from_values(bg, hpp)?,
                ))
            }
        }
    }

    /// The energy gradient tensor `−Δ_g s·g + ∇²s − ¼s²g` in coordinate
    /// components (x/y on the torus chart, θ/φ on the sphere).
    pub fn energy_gradient(&self) -> Result<SymTensorField> {
        let s = self.scalar_curvature()?;
        let lap_g_s = self.laplacian_g(&s)?;
        let (hxx, hxy, hyy) = self.hessian_g(&s)?;
        let e2u = self.conformal_factor();
        let n = self.u.len();
        let mut c11 = Vec::with_capacity(n);
        let mut c12 = Vec::with_capacity(n);
        let mut c22 = Vec::with_capacity(n);
        match self.background().as_ref() {
            Background::FlatTorus(_) => {
                for i in 0..n {
                    let trace_part = (-lap_g_s.values()[i]
                        - 0.25 * s.values()[i] * s.values()[i])
                        * e2u.values()[i];
                    c11.push(trace_part + hxx.values()[i]);
                    c12.push(hxy.values()[i]);
                    c22.push(trace_part + hyy.values()[i]);
                }
            }
            Background::SphereAxisym(sg) => {
                for j in 0..n {
                    let st = sg.sin_theta(j);
                    let trace_part = (-lap_g_s.values()[j]
                        - 0.25 * s.values()[j] * s.values()[j])
                        * e2u.values()[j];
                    c11.push(trace_part + hxx.values()[j]);
                    c12.push(0.0);
                    c22.push(trace_part * st * st + hyy.values()[j]);
                }
            }
        }
        let bg = self.u.background().clone();
        SymTensorField::from_components(
            ScalarField::from_values(bg.clone(), c11)?,
            ScalarField::from_values(bg.clone(), c12)?,
            ScalarField::from_values(bg, c22)?,
        )
    }

    /// `a = Δ_g s + ¼s²`, the conformal factor of the flow right-hand side
    /// (`∂t g = a·g`, so the flow advances `u̇ = a/2`).
    pub fn rhs_trace(&self) -> Result<ScalarField> {
        let s = self.scalar_curvature()?;
        let lap_g_s = self.laplacian_g(&s)?;
        Ok(lap_g_s.zip(&s, |l, sv| l + 0.25 * sv * sv))
    }

    /// Squared g-norm of the trace-free part of the Hessian of s,
    /// `|∇²s − ½(Δ_g s)g|²_g`, as a field.
    fn hessian_tracefree_norm2(&self, s: &ScalarField) -> Result<ScalarField> {
        match self.background().as_ref() {
            Background::FlatTorus(_) => {
                let lap_g_s = self.laplacian_g(s)?;
                let (hxx, hxy, hyy) = self.hessian_g(s)?;
                let n = s.len();
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let u = self.u.values()[i];
                    let e2u = libm::exp(2.0 * u);
                    let half_tr = 0.5 * lap_g_s.values()[i] * e2u;
                    let txx = hxx.values()[i] - half_tr;
                    let txy = hxy.values()[i];
                    let tyy = hyy.values()[i] - half_tr;
                    out.push(libm::exp(-4.0 * u) * (txx * txx + 2.0 * txy * txy + tyy * tyy));
                }
                ScalarField::from_values(self.u.background().clone(), out)
            }
            Background::SphereAxisym(sg) => {
                let sp = s.dtheta()?;
                let spp = s.d2theta()?;
                let up = self.u.dtheta()?;
                let n = sg.ntheta;
                let mut out = Vec::with_capacity(n);
                for j in 0..n {
                    let t_tt = 0.5 * (spp.values()[j] - sg.cot_theta(j) * sp.values()[j])
                        - up.values()[j] * sp.values()[j];
                    out.push(2.0 * libm::exp(-4.0 * self.u.values()[j]) * t_tt * t_tt);
                }
                ScalarField::from_values(self.u.background().clone(), out)
            }
        }
    }

    fn dissipation_with_offset(&self, offset: f64) -> Result<f64> {
        let s = self.scalar_curvature()?;
        let lap_g_s = self.laplacian_g(&s)?;
        let tracefree = self.hessian_tracefree_norm2(&s)?;
        let n = s.len();
        let mut density = Vec::with_capacity(n);
        for i in 0..n {
            let tr = lap_g_s.values()[i] + 0.5 * s.values()[i] * s.values()[i] - offset;
            density.push(0.5 * tr * tr + tracefree.values()[i]);
        }
        let density = ScalarField::from_values(self.u.background().clone(), density)?;
        Ok(self.integrate_g(&density))
    }

    /// Dissipation `D = ∫ ½(Δ_g s + ½s²)² + |∇̂²s|² dV` of the conformal
    /// flow; `dF/dt = −2D` along it.
    pub fn dissipation(&self) -> Result<f64> {
        self.dissipation_with_offset(0.0)
    }

    /// Dissipation of the volume-normalized flow: the trace term becomes
    /// `Δ_g s + ½s² − ½F/Vol`; `dF/dt = −2D_vn` along the normalized flow.
    pub fn vn_dissipation(&self) -> Result<f64> {
        let s = self.scalar_curvature()?;
        let f = self.integrate_g(&s.mul(&s));
        let vol = self.volume();
        self.dissipation_with_offset(0.5 * f / vol)
    }
}
