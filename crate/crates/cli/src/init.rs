//! Initial-data synthesis from an [`InitSpec`]: explicit mode sums, seeded
//! random smooth fields (bit-reproducible), or a checkpoint file.

use std::sync::Arc;

use l2flow_core::background::{Background, ScalarField};
use l2flow_core::rng::Rng;

use crate::checkpoint;
use crate::config::{ConfigError, InitSpec};

/// Legendre polynomial P_l(x) by the three-term recurrence.
pub fn legendre(l: u32, x: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => x,
        _ => {
            let mut pm = 1.0;
            let mut p = x;
            for n in 1..l {
                let next = ((2 * n + 1) as f64 * x * p - n as f64 * pm) / (n + 1) as f64;
                pm = p;
                p = next;
            }
            p
        }
    }
}

/// Largest mode index drawn by `random_smooth` per axis.
const RANDOM_KMAX: i64 = 8;

fn random_smooth_torus(
    bg: &Arc<Background>,
    seed: u64,
    amplitude: f64,
    k0: f64,
) -> Result<ScalarField, ConfigError> {
    let mut rng = Rng::seed_from(seed);
    // one (cos, sin) coefficient pair per mode over a fixed half-plane of
    // wavenumbers, weighted by e^{−|k|²/k0²}
    let mut coeffs: Vec<(f64, f64, f64, f64)> = Vec::new();
    for kx in 0..=RANDOM_KMAX {
        for ky in -RANDOM_KMAX..=RANDOM_KMAX {
            if kx == 0 && ky <= 0 {
                continue;
            }
            let k2 = (kx * kx + ky * ky) as f64;
            let w = (-k2 / (k0 * k0)).exp();
            coeffs.push((
                kx as f64,
                ky as f64,
                w * rng.next_normal(),
                w * rng.next_normal(),
            ));
        }
    }
    let f = ScalarField::from_fn_torus(bg.clone(), move |x, y| {
        let mut acc = 0.0;
        for &(kx, ky, a, b) in &coeffs {
            let phase = kx * x + ky * y;
            acc += a * (phase).cos() + b * (phase).sin();
        }
        acc
    })
    .map_err(|e| ConfigError(e.to_string()))?;
    let m = f.max_abs();
    if m == 0.0 {
        return Err(ConfigError("random field degenerated to zero".into()));
    }
    Ok(f.scale(amplitude / m))
}

fn random_smooth_sphere(
    bg: &Arc<Background>,
    seed: u64,
    amplitude: f64,
    k0: f64,
) -> Result<ScalarField, ConfigError> {
    let mut rng = Rng::seed_from(seed);
    let coeffs: Vec<f64> = (1..=RANDOM_KMAX)
        .map(|l| (-(l * l) as f64 / (k0 * k0)).exp() * rng.next_normal())
        .collect();
    let f = ScalarField::from_fn_sphere(bg.clone(), move |theta| {
        let x = (theta).cos();
        coeffs
            .iter()
            .enumerate()
            .map(|(i, &a)| a * legendre(i as u32 + 1, x))
            .sum()
    })
    .map_err(|e| ConfigError(e.to_string()))?;
    let m = f.max_abs();
    if m == 0.0 {
        return Err(ConfigError("random field degenerated to zero".into()));
    }
    Ok(f.scale(amplitude / m))
}

/// Build the initial conformal exponent u₀ on the given background.
///
/// For `from_checkpoint` the stored background must match; the checkpoint's
/// time/step state is available through [`checkpoint::Checkpoint::load`].
pub fn synthesize_initial(
    bg: &Arc<Background>,
    init: &InitSpec,
) -> Result<ScalarField, ConfigError> {
    match init {
        InitSpec::FourierModes(modes) => {
            let t = bg
                .as_torus()
                .map_err(|e| ConfigError(e.to_string()))?
                .clone();
            let modes = modes.clone();
            ScalarField::from_fn_torus(bg.clone(), move |x, y| {
                let mut acc = 0.0;
                for &(kx, ky, amp, phase) in &modes {
                    let arg = 2.0 * std::f64::consts::PI
                        * (kx as f64 * x / t.lx + ky as f64 * y / t.ly)
                        + phase;
                    acc += amp * (arg).cos();
                }
                acc
            })
            .map_err(|e| ConfigError(e.to_string()))
        }
        InitSpec::LegendreModes(modes) => {
            let modes = modes.clone();
            ScalarField::from_fn_sphere(bg.clone(), move |theta| {
                let x = (theta).cos();
                modes.iter().map(|&(l, a)| a * legendre(l, x)).sum()
            })
            .map_err(|e| ConfigError(e.to_string()))
        }
        InitSpec::RandomSmooth { seed, amplitude, k0 } => {
            if !(*amplitude > 0.0 && *k0 > 0.0) {
                return Err(ConfigError("random_smooth needs amplitude, k0 > 0".into()));
            }
            match bg.as_ref() {
                Background::FlatTorus(_) => random_smooth_torus(bg, *seed, *amplitude, *k0),
                Background::SphereAxisym(_) => random_smooth_sphere(bg, *seed, *amplitude, *k0),
            }
        }
        InitSpec::FromCheckpoint { path } => {
            let ck = checkpoint::Checkpoint::load(path)?;
            let stored = ck.background.build()?;
            if stored.as_ref() != bg.as_ref() {
                return Err(ConfigError(
                    "checkpoint background does not match the configured one".into(),
                ));
            }
            ScalarField::from_values(bg.clone(), ck.u).map_err(|e| ConfigError(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn single_fourier_mode_is_a_cosine() {
        let bg = Background::flat_torus(2.0 * PI, 2.0 * PI, 32, 32).unwrap();
        let u = synthesize_initial(&bg, &InitSpec::FourierModes(vec![(1, 0, 0.3, 0.0)])).unwrap();
        let want = ScalarField::from_fn_torus(bg, |x, _| 0.3 * (x).cos()).unwrap();
        assert!(u.sub(&want).max_abs() < 1e-15);
    }

    #[test]
    fn legendre_l2_matches_closed_form() {
        let bg = Background::sphere(64).unwrap();
        let u = synthesize_initial(&bg, &InitSpec::LegendreModes(vec![(2, 0.1)])).unwrap();
        let want = ScalarField::from_fn_sphere(bg, |t| {
            let c = (t).cos();
            0.1 * 0.5 * (3.0 * c * c - 1.0)
        })
        .unwrap();
        assert!(u.sub(&want).max_abs() < 1e-14);
    }

    #[test]
    fn random_fields_are_bit_reproducible() {
        for bg in [
            Background::flat_torus(2.0 * PI, 2.0 * PI, 32, 32).unwrap(),
            Background::sphere(64).unwrap(),
        ] {
            let spec = InitSpec::RandomSmooth {
                seed: 42,
                amplitude: 0.3,
                k0: 1.2,
            };
            let a = synthesize_initial(&bg, &spec).unwrap();
            let b = synthesize_initial(&bg, &spec).unwrap();
            assert_eq!(a.values(), b.values(), "same seed must give identical bits");
            assert!((a.max_abs() - 0.3).abs() < 1e-12, "max-normalized amplitude");

            let other = synthesize_initial(
                &bg,
                &InitSpec::RandomSmooth {
                    seed: 43,
                    amplitude: 0.3,
                    k0: 1.2,
                },
            )
            .unwrap();
            assert!(a.sub(&other).max_abs() > 1e-3, "different seed, different field");
        }
    }

    #[test]
    fn legendre_recurrence_spot_values() {
        // P₄(x) = (35x⁴ − 30x² + 3)/8 at a few points.
        for &x in &[-0.7, 0.0, 0.3, 1.0] {
            let want = (35.0 * x * x * x * x - 30.0 * x * x + 3.0) / 8.0;
            assert!((legendre(4, x) - want).abs() < 1e-14);
        }
    }
}
