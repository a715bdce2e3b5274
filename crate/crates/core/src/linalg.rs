//! Small banded linear solver used by the semi-implicit sphere stepper
//! (I + dt·c·Δ₀² is pentadiagonal there).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Banded matrix with `kl` sub- and `ku` superdiagonals, with room for the
/// `kl` extra superdiagonals that partial pivoting can fill in.
#[derive(Clone, Debug)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let w = 2 * kl + ku + 1;
        Banded {
            n,
            kl,
            ku,
            w,
            data: vec![0.0; n * w],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku + self.kl).min(self.n - 1);
        if j < lo || j > hi {
            None
        } else {
            Some(i * self.w + (j + self.kl - i))
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map_or(0.0, |k| self.data[k])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j).expect("entry outside band");
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j).expect("entry outside band");
        self.data[k] += v;
    }

    /// Solve `A x = b` in place by banded Gaussian elimination with partial
    /// pivoting. Consumes the matrix; returns the solution.
    pub fn solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let imax = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=imax {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < 1e-300 {
                return Err(Error::InvalidParam("singular banded system"));
            }
            if p != k {
                let jmax = (k + self.ku + self.kl).min(n - 1);
                for j in k..=jmax {
                    let a = self.get(k, j);
                    let c = self.get(p, j);
                    self.set(k, j, c);
                    self.set(p, j, a);
                }
                b.swap(k, p);
            }
            let piv = self.get(k, k);
            let jmax = (k + self.ku + self.kl).min(n - 1);
            for i in k + 1..=imax {
                let f = self.get(i, k) / piv;
                if f != 0.0 {
                    for j in k + 1..=jmax {
                        let v = self.get(k, j);
                        if v != 0.0 {
                            self.add(i, j, -f * v);
                        }
                    }
                    b[i] -= f * b[k];
                    self.set(i, k, 0.0);
                }
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + self.ku + self.kl).min(n - 1);
            let mut acc = b[k];
            for j in k + 1..=jmax {
                acc -= self.get(k, j) * b[j];
            }
            b[k] = acc / self.get(k, k);
        }
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x: Vec<f64> = b.to_vec();
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if m[i][k].abs() > m[p][k].abs() {
                    p = i;
                }
            }
            m.swap(k, p);
            x.swap(k, p);
            for i in k + 1..n {
                let f = m[i][k] / m[k][k];
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            for j in k + 1..n {
                let t = m[k][j] * x[j];
                x[k] -= t;
            }
            x[k] /= m[k][k];
        }
        x
    }

    #[test]
    fn banded_matches_dense() {
        let mut rng = Rng::seed_from(11);
        for &n in &[5usize, 17, 40] {
            let (kl, ku) = (2usize, 2usize);
            let mut band = Banded::zeros(n, kl, ku);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    let v = rng.next_f64() - 0.5 + if i == j { 3.0 } else { 0.0 };
                    band.set(i, j, v);
                    dense[i][j] = v;
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
            let got = band.solve(b.clone()).unwrap();
            let want = dense_solve(&dense, &b);
            for (g, w) in got.iter().zip(want.iter()) {
                assert!((g - w).abs() < 1e-10, "{g} vs {w}");
            }
        }
    }
}
