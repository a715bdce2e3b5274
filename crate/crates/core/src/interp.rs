//! Periodic bicubic interpolation on the torus grid, implemented as a
//! tensor-product cubic B-spline with an exact spectral prefilter (the
//! interpolation condition is a convolution, diagonal in Fourier space).
//!
//! Used by the diffeomorphism module to evaluate fields at off-grid points.

use alloc::vec::Vec;

use crate::background::{fft2, ScalarField, TorusGrid};
use crate::error::Result;
use crate::fft::Complex;

/// Interpolating periodic cubic spline over a torus grid.
pub struct PeriodicSpline2 {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    /// B-spline coefficients, row-major like the field values.
    coeff: Vec<f64>,
}

/// Cubic B-spline segment weights for local coordinate t ∈ [0,1): the value
/// at x between knots i and i+1 is Σ c[i−1+m]·w[m](t).
#[inline]
fn bspline_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        (1.0 - 3.0 * t + 3.0 * t2 - t3) / 6.0,
        (4.0 - 6.0 * t2 + 3.0 * t3) / 6.0,
        (1.0 + 3.0 * t + 3.0 * t2 - 3.0 * t3) / 6.0,
        t3 / 6.0,
    ]
}

impl PeriodicSpline2 {
    pub fn new(field: &ScalarField) -> Result<Self> {
        let t = field.background().as_torus()?;
        field.ensure_finite()?;
        let (nx, ny) = (t.nx, t.ny);
        // Prefilter: divide by the B-spline symbol (4 + 2cos k)/6 per axis.
        let mut spec: Vec<Complex> = field
            .values()
            .iter()
            .map(|&v| Complex::new(v, 0.0))
            .collect();
        fft2(&mut spec, nx, ny, false);
        for iy in 0..ny {
            let by = (4.0 + 2.0 * libm::cos(2.0 * core::f64::consts::PI * iy as f64 / ny as f64))
                / 6.0;
            for ix in 0..nx {
                let bx = (4.0
                    + 2.0 * libm::cos(2.0 * core::f64::consts::PI * ix as f64 / nx as f64))
                    / 6.0;
                spec[iy * nx + ix] = spec[iy * nx + ix].scale(1.0 / (bx * by));
            }
        }
        fft2(&mut spec, nx, ny, true);
        Ok(PeriodicSpline2 {
            nx,
            ny,
            lx: t.lx,
            ly: t.ly,
            coeff: spec.into_iter().map(|z| z.re).collect(),
        })
    }

    /// Evaluate at an arbitrary point (periodic wrap).
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let fx = x / self.lx * nx as f64;
        let fy = y / self.ly * ny as f64;
        let ix = libm::floor(fx);
        let iy = libm::floor(fy);
        let wx = bspline_weights(fx - ix);
        let wy = bspline_weights(fy - iy);
        let ix = ix as i64;
        let iy = iy as i64;
        let mut acc = 0.0;
        for (my, wyv) in wy.iter().enumerate() {
            let jy = (iy + my as i64 - 1).rem_euclid(ny as i64) as usize;
            let mut row = 0.0;
            for (mx, wxv) in wx.iter().enumerate() {
                let jx = (ix + mx as i64 - 1).rem_euclid(nx as i64) as usize;
                row += wxv * self.coeff[jy * nx + jx];
            }
            acc += wyv * row;
        }
        acc
    }
}

/// Convenience: spline-interpolated samples of `field` at the image points
/// of a displacement map (`x_p + dx_p`, `y_p + dy_p`).
pub fn compose(field: &ScalarField, grid: &TorusGrid, dx: &[f64], dy: &[f64]) -> Result<Vec<f64>> {
    let sp = PeriodicSpline2::new(field)?;
    let mut out = Vec::with_capacity(dx.len());
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let p = iy * grid.nx + ix;
            out.push(sp.eval(grid.x(ix) + dx[p], grid.y(iy) + dy[p]));
        }
    }
    Ok(out)
}
