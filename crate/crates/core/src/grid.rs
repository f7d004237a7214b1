//! Uniform periodic grid on [0, 2π)² and its 2-D transforms.
//!
//! Layout is row-major with x₁ on the fast axis: sample `values[j * n + i]`
//! sits at `(i·h, j·h)`. Spectral arrays use the same layout, index `i`
//! carrying k₁ and `j` carrying k₂. Forward transforms are unnormalized,
//! inverse transforms divide by n².

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

const ROWS_PER_TASK: usize = 16;
const BLOCK: usize = 32;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// N×N discretization of the torus with cached FFT plans.
#[derive(Clone)]
pub struct TorusGrid {
    n: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid").field("n", &self.n).finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for TorusGrid {}

/// Builds a grid with `n` points per axis.
pub fn make_grid(n: usize) -> Result<TorusGrid> {
    TorusGrid::new(n)
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(n));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(TorusGrid { n, plans: Arc::new(plans) })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of samples, n².
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Coordinate of index `i` along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Signed wavenumber of FFT index `i`, in [−n/2, n/2).
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// All signed wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    /// Wavenumber used for odd derivatives: the Nyquist index has no
    /// real-valued derivative and maps to zero.
    #[inline]
    pub fn derivative_wavenumber(&self, i: usize) -> f64 {
        if i == self.n / 2 {
            0.0
        } else {
            self.wavenumber(i) as f64
        }
    }

    /// |k|² for flat spectral index `idx`.
    #[inline]
    pub fn k_squared(&self, idx: usize) -> f64 {
        let k1 = self.wavenumber(idx % self.n) as f64;
        let k2 = self.wavenumber(idx / self.n) as f64;
        k1 * k1 + k2 * k2
    }

    /// True when mode (i, j) survives the 2/3 rule.
    #[inline]
    pub fn keeps_mode(&self, i: usize, j: usize) -> bool {
        let k = self.wavenumber(i).abs().max(self.wavenumber(j).abs()) as usize;
        3 * k <= self.n
    }

    /// Flat index of the mode with signed wavenumbers (k1, k2).
    #[inline]
    pub fn mode_index(&self, k1: i64, k2: i64) -> usize {
        let n = self.n as i64;
        let i = k1.rem_euclid(n) as usize;
        let j = k2.rem_euclid(n) as usize;
        j * self.n + i
    }

    /// Unnormalized forward 2-D transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.plans.forward);
    }

    /// Inverse 2-D transform in place, including the 1/n² factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.plans.inverse);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "buffer length does not match grid");
        self.rows(data, plan);
        transpose(data, self.n);
        self.rows(data, plan);
        transpose(data, self.n);
    }

    fn rows(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let scratch_len = plan.get_inplace_scratch_len();
        data.par_chunks_mut(n * ROWS_PER_TASK).for_each_init(
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, chunk| plan.process_with_scratch(chunk, scratch),
        );
    }

    /// Forward transform of a real array.
    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Inverse transform keeping the real part.
    pub fn inverse_real(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut buf = spectrum.to_vec();
        self.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Transforms two real arrays with one complex FFT.
    pub fn forward_pair(&self, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
        self.forward(&mut buf);
        self.split_pair(&buf)
    }

    /// Separates F = Â + iB̂ of two real signals into Â and B̂.
    pub fn split_pair(&self, f: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.n;
        let mut a = vec![Complex64::new(0.0, 0.0); f.len()];
        let mut b = vec![Complex64::new(0.0, 0.0); f.len()];
        for j in 0..n {
            let jm = (n - j) % n;
            for i in 0..n {
                let im = (n - i) % n;
                let fk = f[j * n + i];
                let fm = f[jm * n + im].conj();
                a[j * n + i] = (fk + fm) * 0.5;
                b[j * n + i] = (fk - fm) * Complex64::new(0.0, -0.5);
            }
        }
        (a, b)
    }

    /// Inverse of two Hermitian spectra with one complex FFT.
    pub fn inverse_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let i = Complex64::new(0.0, 1.0);
        let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| x + i * y).collect();
        self.inverse(&mut buf);
        let re = buf.iter().map(|z| z.re).collect();
        let im = buf.iter().map(|z| z.im).collect();
        (re, im)
    }
}

/// In-place blocked transpose of an n×n array.
fn transpose(data: &mut [Complex64], n: usize) {
    for jb in (0..n).step_by(BLOCK) {
        for ib in (jb..n).step_by(BLOCK) {
            let jmax = (jb + BLOCK).min(n);
            let imax = (ib + BLOCK).min(n);
            for j in jb..jmax {
                let i0 = if ib == jb { j + 1 } else { ib };
                for i in i0..imax {
                    data.swap(j * n + i, i * n + j);
                }
            }
        }
    }
}

/// Smallest even n ≥ `n_min` whose only prime factors are 2, 3 and 5.
pub fn fft_friendly_at_least(n_min: usize) -> usize {
    let smooth = |mut m: usize| {
        for p in [2, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        m == 1
    };
    let mut n = n_min.max(4);
    n += n % 2;
    while !smooth(n) {
        n += 2;
    }
    n
}

/// Smallest FFT-friendly n with spacing ≤ √ν/8.
pub fn min_resolved_n(nu: f64) -> usize {
    let need = 16.0 * std::f64::consts::PI / nu.sqrt();
    fft_friendly_at_least(need.ceil() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn friendly_sizes() {
        assert_eq!(fft_friendly_at_least(503), 512);
        assert_eq!(fft_friendly_at_least(7), 8);
        assert_eq!(fft_friendly_at_least(1537), 1600);
        assert_eq!(min_resolved_n(1e-2), 512);
        assert_eq!(min_resolved_n(10f64.powf(-2.5)), 900);
        assert_eq!(min_resolved_n(1e-3), 1600);
    }

    #[test]
    fn spacing_and_size() {
        let g = make_grid(4).unwrap();
        assert_eq!(g.spacing(), PI / 2.0);
        assert_eq!(make_grid(128).unwrap().len(), 16384);
        assert!(matches!(make_grid(3), Err(Error::InvalidGrid(3))));
        assert!(make_grid(2).is_err());
        assert!(make_grid(0).is_err());
    }

    #[test]
    fn spacing_times_n_is_tau() {
        for n in [4, 8, 64, 128, 256, 512, 1024] {
            let g = make_grid(n).unwrap();
            assert_eq!(g.spacing() * n as f64, TAU);
        }
    }

    #[test]
    fn wavenumber_layout() {
        let g = make_grid(8).unwrap();
        assert_eq!(g.wavenumbers(), vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(g.mode_index(-1, 2), 2 * 8 + 7);
    }

    #[test]
    fn transpose_matches_naive() {
        for n in [6, 40, 70] {
            let orig: Vec<Complex64> = (0..n * n).map(|k| Complex64::new(k as f64, -(k as f64))).collect();
            let mut t = orig.clone();
            transpose(&mut t, n);
            for j in 0..n {
                for i in 0..n {
                    assert_eq!(t[j * n + i], orig[i * n + j]);
                }
            }
        }
    }

    #[test]
    fn single_mode_lands_on_its_index() {
        let g = make_grid(16).unwrap();
        let n = g.n();
        // e^{i(2x₁ − 3x₂)}
        let mut buf: Vec<Complex64> = (0..g.len())
            .map(|idx| {
                let (i, j) = (idx % n, idx / n);
                let ph = 2.0 * g.coord(i) - 3.0 * g.coord(j);
                Complex64::new(ph.cos(), ph.sin())
            })
            .collect();
        g.forward(&mut buf);
        let target = g.mode_index(2, -3);
        for (idx, z) in buf.iter().enumerate() {
            let expect = if idx == target { (n * n) as f64 } else { 0.0 };
            assert!((z.re - expect).abs() < 1e-9 && z.im.abs() < 1e-9, "idx {idx}: {z}");
        }
    }

    #[test]
    fn pair_transforms_match_single() {
        let g = make_grid(12).unwrap();
        let a: Vec<f64> = (0..g.len()).map(|k| ((k * 7919) % 101) as f64 / 101.0 - 0.5).collect();
        let b: Vec<f64> = (0..g.len()).map(|k| ((k * 104729) % 97) as f64 / 97.0 - 0.5).collect();
        let (fa, fb) = g.forward_pair(&a, &b);
        let ea = g.forward_real(&a);
        let eb = g.forward_real(&b);
        for k in 0..g.len() {
            assert!((fa[k] - ea[k]).norm() < 1e-12);
            assert!((fb[k] - eb[k]).norm() < 1e-12);
        }
        let (ra, rb) = g.inverse_pair(&fa, &fb);
        for k in 0..g.len() {
            assert!((ra[k] - a[k]).abs() < 1e-14);
            assert!((rb[k] - b[k]).abs() < 1e-14);
        }
    }
}
