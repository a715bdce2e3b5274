//! Minimal complex FFT: iterative radix-2 for power-of-two lengths and
//! Bluestein's chirp-z algorithm for everything else.
//!
//! Hand-rolled so that transform results are bit-identical across runs and
//! platforms (fixed butterfly order, libm trig), which the determinism
//! contract of the flow runner relies on.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    #[inline]
    pub fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    #[inline]
    pub fn conj(self) -> Self {
        Complex::new(self.re, -self.im)
    }

    #[inline]
    pub fn scale(self, a: f64) -> Self {
        Complex::new(self.re * a, self.im * a)
    }

    /// e^{iθ}
    #[inline]
    pub fn cis(theta: f64) -> Self {
        Complex::new(libm::cos(theta), libm::sin(theta))
    }
}

impl Add for Complex {
    type Output = Complex;
    #[inline]
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    #[inline]
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    #[inline]
    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Neg for Complex {
    type Output = Complex;
    #[inline]
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

/// Discrete Fourier transform in place.
///
/// Forward uses the e^{-2πi jk/n} convention; `inverse` flips the sign and
/// scales by 1/n, so `fft(inverse) ∘ fft(forward)` is the identity.
pub fn fft_in_place(data: &mut [Complex], inverse: bool) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        fft_pow2(data, inverse);
        if inverse {
            let s = 1.0 / n as f64;
            for z in data.iter_mut() {
                *z = z.scale(s);
            }
        }
    } else {
        bluestein(data, inverse);
    }
}

fn fft_pow2(data: &mut [Complex], inverse: bool) {
    let n = data.len();
    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * core::f64::consts::PI / len as f64;
        let wlen = Complex::cis(ang);
        let mut i = 0;
        while i < n {
            let mut w = Complex::new(1.0, 0.0);
            for k in 0..len / 2 {
                let a = data[i + k];
                let b = data[i + k + len / 2] * w;
                data[i + k] = a + b;
                data[i + k + len / 2] = a - b;
                w = w * wlen;
            }
            i += len;
        }
        len <<= 1;
    }
}

/// Chirp-z transform for arbitrary n, via a power-of-two convolution.
fn bluestein(data: &mut [Complex], inverse: bool) {
    let n = data.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    // w_k = e^{sign·iπ k²/n}, with k² reduced mod 2n in integers so the
    // angle stays in [0, 2π) without precision loss.
    let chirp: Vec<Complex> = (0..n)
        .map(|k| {
            let r = ((k as u64 * k as u64) % (2 * n as u64)) as f64;
            Complex::cis(sign * core::f64::consts::PI * r / n as f64)
        })
        .collect();

    let m = (2 * n - 1).next_power_of_two();
    let mut a = vec![Complex::ZERO; m];
    let mut b = vec![Complex::ZERO; m];
    for k in 0..n {
        a[k] = data[k] * chirp[k];
        b[k] = chirp[k].conj();
    }
    for k in 1..n {
        b[m - k] = chirp[k].conj();
    }
    fft_pow2(&mut a, false);
    fft_pow2(&mut b, false);
    for k in 0..m {
        a[k] = a[k] * b[k];
    }
    fft_pow2(&mut a, true);
    let norm = 1.0 / m as f64;
    let out_scale = if inverse { norm / n as f64 } else { norm };
    for k in 0..n {
        data[k] = (a[k] * chirp[k]).scale(out_scale);
    }
}
