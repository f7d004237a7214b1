//! Convolution with the rescaled bump ρ_α(x) = α⁻²ρ(x/α).

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::TorusGrid;

/// Unnormalized bump exp(−1/(1−|x|²)) on the unit disk.
#[inline]
pub fn bump(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

/// Minimal-image displacement of index `i` on an n-periodic axis.
#[inline]
pub(crate) fn displacement(grid: &TorusGrid, i: usize) -> f64 {
    grid.wavenumber(i) as f64 * grid.spacing()
}

#[derive(Clone, Debug)]
pub struct Mollifier {
    alpha: f64,
    grid: TorusGrid,
    kernel_hat: Vec<f64>,
    mass: f64,
}

impl Mollifier {
    /// Discretizes ρ_α on `grid`; the sampled kernel is normalized to unit
    /// quadrature mass.
    pub fn new(grid: &TorusGrid, alpha: f64) -> Result<Self> {
        let min = 2.0 * grid.spacing();
        if !(alpha > min) {
            return Err(Error::UnderResolved { what: "mollifier alpha", scale: alpha, min });
        }
        if alpha >= std::f64::consts::PI {
            return Err(Error::OutOfRange(format!("mollifier alpha {alpha} must be below pi")));
        }
        let n = grid.n();
        let mut k = vec![0.0; grid.len()];
        for j in 0..n {
            let y2 = displacement(grid, j);
            for i in 0..n {
                let y1 = displacement(grid, i);
                k[j * n + i] = bump(y1.hypot(y2) / alpha);
            }
        }
        let total: f64 = k.iter().sum::<f64>() * grid.cell_area();
        let w = grid.cell_area() / total;
        k.iter_mut().for_each(|v| *v *= w);
        let mass = k.iter().sum::<f64>();
        let kernel_hat = grid.forward_real(&k).into_iter().map(|z| z.re).collect();
        Ok(Mollifier { alpha, grid: grid.clone(), kernel_hat, mass })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Quadrature integral of the discretized kernel.
    pub fn kernel_integral(&self) -> f64 {
        self.mass
    }

    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        crate::field::same_grid(&self.grid, f.grid())?;
        let mut s = f.spectrum();
        s.iter_mut().zip(&self.kernel_hat).for_each(|(z, k)| *z *= *k);
        Ok(ScalarField::from_spectrum(&self.grid, &s))
    }

    pub fn apply_vector(&self, u: &VectorField) -> Result<VectorField> {
        crate::field::same_grid(&self.grid, u.grid())?;
        let (mut s1, mut s2) = u.spectra();
        for ((a, b), k) in s1.iter_mut().zip(s2.iter_mut()).zip(&self.kernel_hat) {
            *a *= *k;
            *b *= *k;
        }
        Ok(VectorField::from_spectra(&self.grid, &s1, &s2))
    }
}

pub trait Mollify: Sized {
    fn mollify(&self, alpha: f64) -> Result<Self>;
}

impl Mollify for ScalarField {
    fn mollify(&self, alpha: f64) -> Result<Self> {
        Mollifier::new(self.grid(), alpha)?.apply(self)
    }
}

impl Mollify for VectorField {
    fn mollify(&self, alpha: f64) -> Result<Self> {
        Mollifier::new(self.grid(), alpha)?.apply_vector(self)
    }
}

/// Convolution with ρ_α via the discretized kernel transform.
pub fn mollify<F: Mollify>(f: &F, alpha: f64) -> Result<F> {
    f.mollify(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::norms::norms;

    #[test]
    fn constant_is_fixed() {
        let g = make_grid(64).unwrap();
        let f = ScalarField::constant(&g, 2.5);
        let m = mollify(&f, 0.4).unwrap();
        assert!(m.values().iter().all(|v| (v - 2.5).abs() < 1e-8));
    }

    #[test]
    fn kernel_mass_is_one() {
        let g = make_grid(128).unwrap();
        let m = Mollifier::new(&g, 0.2).unwrap();
        assert!((m.kernel_integral() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_small_alpha() {
        let g = make_grid(64).unwrap();
        let h = g.spacing();
        assert!(matches!(Mollifier::new(&g, 2.0 * h), Err(Error::UnderResolved { .. })));
        assert!(Mollifier::new(&g, 2.01 * h).is_ok());
    }

    #[test]
    fn smooth_field_error_scales_with_alpha() {
        // ‖f_α − f‖ / (α‖∇f‖) stays O(1) across α.
        let g = make_grid(1024).unwrap();
        let f = ScalarField::from_fn(&g, |x1, x2| (x1 + x2).sin() + 0.5 * (2.0 * x1).cos() * x2.sin());
        let grad = norms(&f).h1_seminorm;
        let mut ratios = Vec::new();
        for alpha in [0.1, 0.05, 0.025] {
            let fa = mollify(&f, alpha).unwrap();
            let err = norms(&fa.sub(&f).unwrap()).l2;
            ratios.push(err / (alpha * grad));
        }
        for r in &ratios {
            assert!(*r > 0.0 && *r < 1.0, "{ratios:?}");
        }
        // Second-order kernel: ratio shrinks with α.
        assert!(ratios[2] < ratios[0]);
    }
}
