//! The diffeomorphism correction on the torus chart: integrate the
//! point-flow of the curvature gradient vector field, pull the conformal
//! metric back through it, and measure how well the pulled-back family
//! solves the full gradient flow `∂t g̃ = −grad F(g̃)`.
//!
//! The conformal flow carries `+∇²s` relative to the full flow; since
//! `d/dt(φ_t*g) = φ_t*(∂t g + L_X g)` for `X = φ̇∘φ⁻¹` and
//! `L_{(∇s)♯} g = 2∇²s`, the correcting family satisfies
//! `φ̇(p) = −½ (∇s)♯(φ(p))`, `φ₀ = Id`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::background::{Background, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::ConformalMetric;
use crate::interp::PeriodicSpline2;
use crate::tensor::{energy_gradient_general, DerivScheme, SymTensorField};

/// Grid diffeomorphism of the torus, stored as a periodic displacement from
/// the identity: `φ(p) = p + d(p)`.
#[derive(Clone, Debug)]
pub struct GridDiffeo {
    disp_x: ScalarField,
    disp_y: ScalarField,
}

impl GridDiffeo {
    pub fn identity(background: Arc<Background>) -> Result<Self> {
        background.as_torus()?;
        Ok(GridDiffeo {
            disp_x: ScalarField::zeros(background.clone()),
            disp_y: ScalarField::zeros(background),
        })
    }

    pub fn background(&self) -> &Arc<Background> {
        self.disp_x.background()
    }

    pub fn displacement(&self) -> (&ScalarField, &ScalarField) {
        (&self.disp_x, &self.disp_y)
    }

    pub fn max_displacement(&self) -> f64 {
        self.disp_x.max_abs().max(self.disp_y.max_abs())
    }

    /// ∂_i φ^a = δ_i^a + ∂_i d^a by spectral differentiation of the
    /// displacement (periodic by construction).
    fn jacobian(&self) -> Result<[ScalarField; 4]> {
        Ok([
            self.disp_x.dx()?.map(|v| 1.0 + v), // ∂x φ^x
            self.disp_x.dy()?,                  // ∂y φ^x
            self.disp_y.dx()?,                  // ∂x φ^y
            self.disp_y.dy()?.map(|v| 1.0 + v), // ∂y φ^y
        ])
    }

    fn ensure_orientation(&self) -> Result<()> {
        let [a, b, c, d] = self.jacobian()?;
        for p in 0..a.len() {
            let det = a.values()[p] * d.values()[p] - b.values()[p] * c.values()[p];
            if !(det > 0.0) {
                return Err(Error::DiffeoDegenerated);
            }
        }
        Ok(())
    }

    /// One explicit-midpoint (RK2) step of `φ̇(p) = −½(∇s)♯(φ(p))` using the
    /// metric at the step's sampling time; the vector field is evaluated at
    /// displaced points by periodic bicubic interpolation.
    pub fn advance(&self, g: &ConformalMetric, dt: f64) -> Result<GridDiffeo> {
        g.u().same_background(&self.disp_x)?;
        let grid = self.background().as_torus()?.clone();
        let s = g.scalar_curvature()?;
        let sx = s.dx()?;
        let sy = s.dy()?;
        // (∇s)♯ = e^{−2u} ∇₀ s on the torus chart.
        let vx = g.u().zip(&sx, |u, d| -0.5 * libm::exp(-2.0 * u) * d);
        let vy = g.u().zip(&sy, |u, d| -0.5 * libm::exp(-2.0 * u) * d);
        let spx = PeriodicSpline2::new(&vx)?;
        let spy = PeriodicSpline2::new(&vy)?;

        let n = self.disp_x.len();
        let mut ndx = Vec::with_capacity(n);
        let mut ndy = Vec::with_capacity(n);
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let p = iy * grid.nx + ix;
                let px = grid.x(ix) + self.disp_x.values()[p];
                let py = grid.y(iy) + self.disp_y.values()[p];
                let k1 = (spx.eval(px, py), spy.eval(px, py));
                let (mx, my) = (px + 0.5 * dt * k1.0, py + 0.5 * dt * k1.1);
                let k2 = (spx.eval(mx, my), spy.eval(mx, my));
                ndx.push(self.disp_x.values()[p] + dt * k2.0);
                ndy.push(self.disp_y.values()[p] + dt * k2.1);
            }
        }
        let bg = self.disp_x.background().clone();
        let next = GridDiffeo {
            disp_x: ScalarField::from_values(bg.clone(), ndx)?,
            disp_y: ScalarField::from_values(bg, ndy)?,
        };
        next.ensure_orientation()?;
        Ok(next)
    }

    /// Pull the conformal metric back: `(φ*g)_ij = ∂_iφ^a ∂_jφ^b g_ab∘φ`,
    /// i.e. `e^{2u∘φ}·(JᵀJ)_ij` on the flat chart.
    pub fn pullback(&self, g: &ConformalMetric) -> Result<SymTensorField> {
        g.u().same_background(&self.disp_x)?;
        let grid = self.background().as_torus()?.clone();
        let [a, b, c, d] = self.jacobian()?;
        for p in 0..a.len() {
            if !(a.values()[p] * d.values()[p] - b.values()[p] * c.values()[p] > 0.0) {
                return Err(Error::DiffeoDegenerated);
            }
        }
        let u_spline = PeriodicSpline2::new(g.u())?;
        let n = a.len();
        let mut c11 = Vec::with_capacity(n);
        let mut c12 = Vec::with_capacity(n);
        let mut c22 = Vec::with_capacity(n);
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let p = iy * grid.nx + ix;
                let px = grid.x(ix) + self.disp_x.values()[p];
                let py = grid.y(iy) + self.disp_y.values()[p];
                let w = libm::exp(2.0 * u_spline.eval(px, py));
                let (ax, bx) = (a.values()[p], b.values()[p]); // ∂φ^x
                let (cy, dy) = (c.values()[p], d.values()[p]); // ∂φ^y
                c11.push(w * (ax * ax + cy * cy));
                c12.push(w * (ax * bx + cy * dy));
                c22.push(w * (bx * bx + dy * dy));
            }
        }
        let bg = self.disp_x.background().clone();
        SymTensorField::from_components(
            ScalarField::from_values(bg.clone(), c11)?,
            ScalarField::from_values(bg.clone(), c12)?,
            ScalarField::from_values(bg, c22)?,
        )
    }
}

/// Low-pass a pulled-back tensor to the resolved band (2/3 rule) before
/// spectral differentiation; interpolation noise at the grid scale would
/// otherwise be amplified by the curvature operators.
pub fn filtered(t: &SymTensorField) -> SymTensorField {
    SymTensorField::from_components(
        t.c11().dealias(),
        t.c12().dealias(),
        t.c22().dealias(),
    )
    .expect("components share a background")
}

/// Max-norm residual of `∂t(φ*g) + grad F(φ*g)` over the interior snapshots
/// of a uniformly spaced trajectory, normalized by `max|grad F|`.
pub fn full_flow_residual(trajectory: &[(f64, GridDiffeo, ConformalMetric)]) -> Result<f64> {
    if trajectory.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: trajectory.len(),
        });
    }
    let dt = trajectory[1].0 - trajectory[0].0;
    if !(dt > 0.0) {
        return Err(Error::NonUniformSnapshots);
    }
    for w in trajectory.windows(2) {
        if ((w[1].0 - w[0].0) - dt).abs() > 1e-9 * dt {
            return Err(Error::NonUniformSnapshots);
        }
    }
    let pullbacks: Vec<SymTensorField> = trajectory
        .iter()
        .map(|(_, phi, g)| Ok(filtered(&phi.pullback(g)?)))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for i in 1..trajectory.len() - 1 {
        let grad = energy_gradient_general(&pullbacks[i], DerivScheme::Spectral)?;
        let scale = grad.max_abs();
        if scale == 0.0 {
            continue;
        }
        let mut res: f64 = 0.0;
        for (cidx, comp) in [(0usize, 0usize), (0, 1), (1, 1)].iter().enumerate() {
            let _ = cidx;
            let prev = pullbacks[i - 1].component(comp.0, comp.1);
            let next = pullbacks[i + 1].component(comp.0, comp.1);
            let gcomp = grad.component(comp.0, comp.1);
            for p in 0..prev.len() {
                let dpdt = (next.values()[p] - prev.values()[p]) / (2.0 * dt);
                res = res.max((dpdt + gcomp.values()[p]).abs());
            }
        }
        worst = worst.max(res / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = core::f64::consts::PI;

    fn torus(n: usize) -> Arc<Background> {
        Background::flat_torus(2.0 * PI, 2.0 * PI, n, n).unwrap()
    }

    #[test]
    fn identity_preserved_on_critical_metrics() {
        // s ≡ 0 on the flat torus, so the generating field vanishes exactly.
        let bg = torus(16);
        let phi = GridDiffeo::identity(bg.clone()).unwrap();
        let flat = ConformalMetric::background_metric(bg);
        let next = phi.advance(&flat, 0.1).unwrap();
        assert_eq!(next.max_displacement(), 0.0);
    }

    #[test]
    fn identity_pullback_reproduces_metric() {
        let bg = torus(32);
        let u = ScalarField::from_fn_torus(bg.clone(), |x, y| {
            0.2 * libm::cos(x) + 0.1 * libm::sin(y)
        })
        .unwrap();
        let g = ConformalMetric::new(u.clone()).unwrap();
        let phi = GridDiffeo::identity(bg).unwrap();
        let pb = phi.pullback(&g).unwrap();
        let e2u = u.map(|v| libm::exp(2.0 * v));
        assert!(pb.c11().sub(&e2u).max_abs() < 1e-11);
        assert!(pb.c12().max_abs() < 1e-11);
        assert!(pb.c22().sub(&e2u).max_abs() < 1e-11);
    }

    #[test]
    fn rigid_translation_pullback_shifts_field() {
        // Displacement by one whole grid cell in x: φ*g = e^{2u(x+h,y)}δ.
        let bg = torus(32);
        let t = bg.as_torus().unwrap().clone();
        let u = ScalarField::from_fn_torus(bg.clone(), |x, y| {
            0.1 * libm::cos(x) * libm::cos(2.0 * y)
        })
        .unwrap();
        let g = ConformalMetric::new(u).unwrap();
        let h = t.hx();
        let phi = GridDiffeo {
            disp_x: ScalarField::constant(bg.clone(), h),
            disp_y: ScalarField::zeros(bg.clone()),
        };
        let pb = phi.pullback(&g).unwrap();
        let want = ScalarField::from_fn_torus(bg, move |x, y| {
            libm::exp(2.0 * 0.1 * libm::cos(x + h) * libm::cos(2.0 * y))
        })
        .unwrap();
        assert!(pb.c11().sub(&want).max_abs() < 1e-10);
        assert!(pb.c12().max_abs() < 1e-10);
        assert!(pb.c22().sub(&want).max_abs() < 1e-10);
    }

    #[test]
    fn degenerate_jacobian_is_an_error() {
        let bg = torus(16);
        // d_x = −x folds the chart: ∂xφ^x crosses zero.
        let phi = GridDiffeo {
            disp_x: ScalarField::from_fn_torus(bg.clone(), |x, _| -1.2 * libm::sin(x)).unwrap(),
            disp_y: ScalarField::zeros(bg.clone()),
        };
        let g = ConformalMetric::background_metric(bg);
        assert!(matches!(
            phi.pullback(&g),
            Err(Error::DiffeoDegenerated)
        ));
    }

    #[test]
    fn residual_rejects_bad_snapshot_sets() {
        let bg = torus(16);
        let phi = GridDiffeo::identity(bg.clone()).unwrap();
        let g = ConformalMetric::background_metric(bg);
        let short = [(0.0, phi.clone(), g.clone()), (0.1, phi.clone(), g.clone())];
        assert!(matches!(
            full_flow_residual(&short),
            Err(Error::TooFewSamples { .. })
        ));
        let uneven = [
            (0.0, phi.clone(), g.clone()),
            (0.1, phi.clone(), g.clone()),
            (0.3, phi, g),
        ];
        assert!(matches!(
            full_flow_residual(&uneven),
            Err(Error::NonUniformSnapshots)
        ));
    }
}
