//! Real-space fields on the torus and their spectral operators.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::TorusGrid;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative tolerance for the mean-zero flag.
pub const MEAN_ZERO_TOL: f64 = 1e-12;
/// Relative tolerance for the divergence-free flag.
pub const DIV_FREE_TOL: f64 = 1e-10;

/// Scalar samples on a grid (vorticity, densities, stream functions).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(ScalarField { grid: grid.clone(), values })
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        ScalarField { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: &TorusGrid, c: f64) -> Self {
        ScalarField { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    /// Samples `f(x₁, x₂)` at the grid points.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let values = (0..grid.len()).map(|idx| f(grid.coord(idx % n), grid.coord(idx / n))).collect();
        ScalarField { grid: grid.clone(), values }
    }

    pub fn from_spectrum(grid: &TorusGrid, spectrum: &[Complex64]) -> Self {
        ScalarField { grid: grid.clone(), values: grid.inverse_real(spectrum) }
    }

    #[inline]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.n() + i]
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.forward_real(&self.values)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Quadrature of the field over the torus.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn is_mean_zero(&self) -> bool {
        self.mean().abs() <= MEAN_ZERO_TOL * self.max_abs()
    }

    pub fn ensure_mean_zero(&self) -> Result<()> {
        if self.is_mean_zero() {
            Ok(())
        } else {
            Err(Error::NotMeanZero { mean: self.mean(), max: self.max_abs() })
        }
    }

    /// Copy with the average subtracted.
    pub fn remove_mean(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(ScalarField { grid: self.grid.clone(), values })
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Quadrature inner product ∫ f g.
    pub fn dot(&self, other: &ScalarField) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_area())
    }

    /// Spectral Laplacian.
    pub fn laplacian(&self) -> Self {
        let mut s = self.spectrum();
        for (idx, z) in s.iter_mut().enumerate() {
            *z *= -self.grid.k_squared(idx);
        }
        ScalarField::from_spectrum(&self.grid, &s)
    }

    /// Spectral gradient.
    pub fn gradient(&self) -> VectorField {
        let s = self.spectrum();
        let (d1, d2) = spectral_gradient(&self.grid, &s);
        let (g1, g2) = self.grid.inverse_pair(&d1, &d2);
        VectorField { grid: self.grid.clone(), u1: g1, u2: g2 }
    }

    /// ∇⊥f = (−∂₂f, ∂₁f).
    pub fn perp_gradient(&self) -> VectorField {
        let g = self.gradient();
        let u1 = g.u2.iter().map(|v| -v).collect();
        VectorField { grid: self.grid.clone(), u1, u2: g.u1 }
    }

    /// Exact trigonometric resampling onto another grid.
    pub fn resample(&self, target: &TorusGrid) -> Self {
        if *target == self.grid {
            return self.clone();
        }
        let s = resample_spectrum(&self.grid, &self.spectrum(), target);
        ScalarField::from_spectrum(target, &s)
    }
}

/// Two-component velocity-like field.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: TorusGrid,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl VectorField {
    pub fn new(grid: &TorusGrid, u1: Vec<f64>, u2: Vec<f64>) -> Result<Self> {
        if u1.len() != grid.len() || u2.len() != grid.len() {
            return Err(Error::InvalidArgument("component length does not match grid".into()));
        }
        Ok(VectorField { grid: grid.clone(), u1, u2 })
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        VectorField { grid: grid.clone(), u1: vec![0.0; grid.len()], u2: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: &TorusGrid, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let n = grid.n();
        let (u1, u2) = (0..grid.len()).map(|idx| f(grid.coord(idx % n), grid.coord(idx / n))).unzip();
        VectorField { grid: grid.clone(), u1, u2 }
    }

    pub fn from_spectra(grid: &TorusGrid, s1: &[Complex64], s2: &[Complex64]) -> Self {
        let (u1, u2) = grid.inverse_pair(s1, s2);
        VectorField { grid: grid.clone(), u1, u2 }
    }

    #[inline]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    #[inline]
    pub fn u1(&self) -> &[f64] {
        &self.u1
    }

    #[inline]
    pub fn u2(&self) -> &[f64] {
        &self.u2
    }

    pub fn components(&self) -> (ScalarField, ScalarField) {
        (
            ScalarField { grid: self.grid.clone(), values: self.u1.clone() },
            ScalarField { grid: self.grid.clone(), values: self.u2.clone() },
        )
    }

    pub fn spectra(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        self.grid.forward_pair(&self.u1, &self.u2)
    }

    /// Pointwise |u|².
    pub fn magnitude_squared(&self) -> ScalarField {
        let values = self.u1.iter().zip(&self.u2).map(|(a, b)| a * a + b * b).collect();
        ScalarField { grid: self.grid.clone(), values }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.u1.iter().zip(&self.u2).fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn max_abs_component(&self) -> f64 {
        self.u1.iter().chain(&self.u2).fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        VectorField {
            grid: self.grid.clone(),
            u1: self.u1.iter().map(|v| v * s).collect(),
            u2: self.u2.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        Ok(VectorField {
            grid: self.grid.clone(),
            u1: self.u1.iter().zip(&other.u1).map(|(a, b)| a - b).collect(),
            u2: self.u2.iter().zip(&other.u2).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &VectorField) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        Ok(VectorField {
            grid: self.grid.clone(),
            u1: self.u1.iter().zip(&other.u1).map(|(a, b)| a + b).collect(),
            u2: self.u2.iter().zip(&other.u2).map(|(a, b)| a + b).collect(),
        })
    }

    /// (1−w)·self + w·other.
    pub fn lerp(&self, other: &VectorField, w: f64) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (1.0 - w) * x + w * y).collect();
        Ok(VectorField { grid: self.grid.clone(), u1: mix(&self.u1, &other.u1), u2: mix(&self.u2, &other.u2) })
    }

    /// Quadrature inner product ∫ u·v.
    pub fn dot(&self, other: &VectorField) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        let s: f64 = self
            .u1
            .iter()
            .zip(&other.u1)
            .chain(self.u2.iter().zip(&other.u2))
            .map(|(a, b)| a * b)
            .sum();
        Ok(s * self.grid.cell_area())
    }

    /// Max modulus of the spectral divergence.
    pub fn spectral_divergence_max(&self) -> f64 {
        let (s1, s2) = self.spectra();
        let g = &self.grid;
        let n = g.n();
        (0..g.len())
            .map(|idx| {
                let k1 = g.derivative_wavenumber(idx % n);
                let k2 = g.derivative_wavenumber(idx / n);
                (s1[idx] * k1 + s2[idx] * k2).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_divergence_free(&self) -> bool {
        let (s1, s2) = self.spectra();
        let scale = s1.iter().chain(&s2).fold(0.0f64, |m, z| m.max(z.norm()));
        self.spectral_divergence_max() <= DIV_FREE_TOL * scale
    }

    pub fn resample(&self, target: &TorusGrid) -> Self {
        if *target == self.grid {
            return self.clone();
        }
        let (s1, s2) = self.spectra();
        let r1 = resample_spectrum(&self.grid, &s1, target);
        let r2 = resample_spectrum(&self.grid, &s2, target);
        VectorField::from_spectra(target, &r1, &r2)
    }
}

pub(crate) fn same_grid(a: &TorusGrid, b: &TorusGrid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch(a.n(), b.n()))
    }
}

/// (i k₁ f̂, i k₂ f̂) with the Nyquist odd-derivative convention.
pub fn spectral_gradient(grid: &TorusGrid, s: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = grid.n();
    let mut d1 = vec![ZERO; s.len()];
    let mut d2 = vec![ZERO; s.len()];
    for idx in 0..s.len() {
        let k1 = grid.derivative_wavenumber(idx % n);
        let k2 = grid.derivative_wavenumber(idx / n);
        d1[idx] = Complex64::new(0.0, k1) * s[idx];
        d2[idx] = Complex64::new(0.0, k2) * s[idx];
    }
    (d1, d2)
}

/// Velocity spectra from a vorticity spectrum: û = (i k₂, −i k₁) ω̂ / |k|².
pub fn biot_savart_spectral(grid: &TorusGrid, omega_hat: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = grid.n();
    let mut u1 = vec![ZERO; omega_hat.len()];
    let mut u2 = vec![ZERO; omega_hat.len()];
    for idx in 1..omega_hat.len() {
        let k2sq = grid.k_squared(idx);
        let k1 = grid.derivative_wavenumber(idx % n);
        let k2 = grid.derivative_wavenumber(idx / n);
        let w = omega_hat[idx] / k2sq;
        u1[idx] = Complex64::new(0.0, k2) * w;
        u2[idx] = Complex64::new(0.0, -k1) * w;
    }
    (u1, u2)
}

/// Velocity of a mean-zero vorticity, u = ∇⊥Δ⁻¹ω.
pub fn biot_savart(omega: &ScalarField) -> Result<VectorField> {
    omega.ensure_mean_zero()?;
    let (s1, s2) = biot_savart_spectral(omega.grid(), &omega.spectrum());
    Ok(VectorField::from_spectra(omega.grid(), &s1, &s2))
}

/// Scalar curl ∂₁u₂ − ∂₂u₁.
pub fn curl(u: &VectorField) -> ScalarField {
    let g = u.grid();
    let n = g.n();
    let (s1, s2) = u.spectra();
    let w: Vec<Complex64> = (0..g.len())
        .map(|idx| {
            let k1 = g.derivative_wavenumber(idx % n);
            let k2 = g.derivative_wavenumber(idx / n);
            Complex64::new(0.0, k1) * s2[idx] - Complex64::new(0.0, k2) * s1[idx]
        })
        .collect();
    ScalarField::from_spectrum(g, &w)
}

/// Divergence ∂₁u₁ + ∂₂u₂.
pub fn divergence(u: &VectorField) -> ScalarField {
    let g = u.grid();
    let n = g.n();
    let (s1, s2) = u.spectra();
    let d: Vec<Complex64> = (0..g.len())
        .map(|idx| {
            let k1 = g.derivative_wavenumber(idx % n);
            let k2 = g.derivative_wavenumber(idx / n);
            Complex64::new(0.0, k1) * s1[idx] + Complex64::new(0.0, k2) * s2[idx]
        })
        .collect();
    ScalarField::from_spectrum(g, &d)
}

/// Zeros modes with max(|k₁|,|k₂|) > n/3.
pub fn dealias(grid: &TorusGrid, spectrum: &mut [Complex64]) {
    let n = grid.n();
    for j in 0..n {
        for i in 0..n {
            if !grid.keeps_mode(i, j) {
                spectrum[j * n + i] = ZERO;
            }
        }
    }
}

/// Moves a spectrum between grids, truncating or zero-padding. Modes at or
/// beyond the target Nyquist are dropped; a source Nyquist mode is split
/// evenly between ±n/2 when padding.
pub fn resample_spectrum(source: &TorusGrid, s: &[Complex64], target: &TorusGrid) -> Vec<Complex64> {
    let (ns, nt) = (source.n(), target.n());
    let scale = (nt * nt) as f64 / (ns * ns) as f64;
    let mut out = vec![ZERO; target.len()];
    let half_t = (nt / 2) as i64;
    for j in 0..ns {
        let k2 = source.wavenumber(j);
        for i in 0..ns {
            let k1 = source.wavenumber(i);
            let z = s[j * ns + i];
            if z == ZERO {
                continue;
            }
            // Source Nyquist lines carry the ±n/2 pair.
            let k1s: &[(i64, f64)] = if i == ns / 2 && nt > ns { &[(k1, 0.5), (-k1, 0.5)] } else { &[(k1, 1.0)] };
            let k2s: &[(i64, f64)] = if j == ns / 2 && nt > ns { &[(k2, 0.5), (-k2, 0.5)] } else { &[(k2, 1.0)] };
            for &(a, wa) in k1s {
                for &(b, wb) in k2s {
                    if a.abs() >= half_t || b.abs() >= half_t {
                        continue;
                    }
                    out[target.mode_index(a, b)] += z * (wa * wb * scale);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn biot_savart_single_mode() {
        let g = make_grid(32).unwrap();
        let w = ScalarField::from_fn(&g, |_, x2| -x2.cos());
        let u = biot_savart(&w).unwrap();
        let n = g.n();
        for idx in 0..g.len() {
            let x2 = g.coord(idx / n);
            assert!((u.u1()[idx] - x2.sin()).abs() < 1e-13);
            assert!(u.u2()[idx].abs() < 1e-13);
        }
    }

    #[test]
    fn biot_savart_zero() {
        let g = make_grid(8).unwrap();
        let u = biot_savart(&ScalarField::zeros(&g)).unwrap();
        assert_eq!(u.max_abs_component(), 0.0);
    }

    #[test]
    fn biot_savart_rejects_mean() {
        let g = make_grid(8).unwrap();
        let w = ScalarField::from_fn(&g, |x1, _| 1.0 + x1.sin());
        assert!(matches!(biot_savart(&w), Err(Error::NotMeanZero { .. })));
    }

    #[test]
    fn dealias_examples() {
        let g = make_grid(128).unwrap();
        let mut s = vec![ZERO; g.len()];
        s[g.mode_index(1, 0)] = Complex64::new(1.0, 0.0);
        let keep = s.clone();
        dealias(&g, &mut s);
        assert_eq!(s, keep);
        let mut s = vec![ZERO; g.len()];
        s[g.mode_index(60, 0)] = Complex64::new(1.0, 0.0);
        dealias(&g, &mut s);
        assert!(s.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn dealias_count_n96() {
        let g = make_grid(96).unwrap();
        let mut s = vec![Complex64::new(1.0, 0.5); g.len()];
        dealias(&g, &mut s);
        let survivors = s.iter().filter(|z| **z != ZERO).count();
        // Independent count: |k| ≤ 32 on each axis.
        let mut expect = 0;
        for k2 in -48i64..48 {
            for k1 in -48i64..48 {
                if k1.abs() <= 32 && k2.abs() <= 32 {
                    expect += 1;
                }
            }
        }
        assert_eq!(expect, 65 * 65);
        assert_eq!(survivors, expect);
    }

    #[test]
    fn resample_round_trip() {
        let g = make_grid(16).unwrap();
        let f = ScalarField::from_fn(&g, |x1, x2| (2.0 * x1).sin() * (3.0 * x2).cos() + 0.3 * (x1 - 5.0 * x2).cos());
        let big = make_grid(40).unwrap();
        let up = f.resample(&big);
        let exact = ScalarField::from_fn(&big, |x1, x2| (2.0 * x1).sin() * (3.0 * x2).cos() + 0.3 * (x1 - 5.0 * x2).cos());
        for (a, b) in up.values().iter().zip(exact.values()) {
            assert!((a - b).abs() < 1e-13);
        }
        let back = up.resample(&g);
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn perp_gradient_of_stream() {
        let g = make_grid(32).unwrap();
        let psi = ScalarField::from_fn(&g, |x1, x2| x1.sin() * x2.sin());
        let u = psi.perp_gradient();
        let w = curl(&u);
        let lap = psi.laplacian();
        for (a, b) in w.values().iter().zip(lap.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(divergence(&u).max_abs() < 1e-12);
    }
}
