//! Ball integrals x ↦ ∫_{B_r(x)} f via FFT convolution with a sampled disk.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{same_grid, ScalarField};
use crate::grid::TorusGrid;
use crate::mollify::displacement;

/// Disk indicator of radius r sampled at grid displacements, weight h².
#[derive(Clone, Debug)]
pub struct BallKernel {
    grid: TorusGrid,
    radius: f64,
    count: usize,
    offsets: Vec<(i64, i64)>,
    hat: Vec<f64>,
}

impl BallKernel {
    pub fn new(grid: &TorusGrid, radius: f64) -> Result<Self> {
        if !(radius >= grid.spacing()) {
            return Err(Error::UnderResolved { what: "ball radius", scale: radius, min: grid.spacing() });
        }
        if radius > PI {
            return Err(Error::RadiusTooLarge(radius));
        }
        let n = grid.n();
        let mut k = vec![0.0; grid.len()];
        let mut offsets = Vec::new();
        for j in 0..n {
            let y2 = displacement(grid, j);
            for i in 0..n {
                let y1 = displacement(grid, i);
                if y1.hypot(y2) <= radius {
                    k[j * n + i] = grid.cell_area();
                    offsets.push((grid.wavenumber(i), grid.wavenumber(j)));
                }
            }
        }
        let hat = grid.forward_real(&k).into_iter().map(|z| z.re).collect();
        Ok(BallKernel { grid: grid.clone(), radius, count: offsets.len(), offsets, hat })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Number of grid points inside the disk.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Discrete disk area, count·h².
    pub fn area(&self) -> f64 {
        self.count as f64 * self.grid.cell_area()
    }

    /// x ↦ ∫_{B_r(x)} f.
    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        same_grid(&self.grid, f.grid())?;
        let mut s = f.spectrum();
        s.iter_mut().zip(&self.hat).for_each(|(z, k)| *z *= *k);
        Ok(ScalarField::from_spectrum(&self.grid, &s))
    }

    /// Ball integrals of two real fields with one forward and one inverse
    /// transform (the kernel transform is real).
    pub fn apply_pair(&self, a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
        self.grid.forward(&mut buf);
        buf.iter_mut().zip(&self.hat).for_each(|(z, k)| *z *= *k);
        self.grid.inverse(&mut buf);
        (buf.iter().map(|z| z.re).collect(), buf.iter().map(|z| z.im).collect())
    }

    /// Direct sum ∫_{B_r(x)} f at grid point (i, j).
    pub fn integral_at(&self, f: &ScalarField, i: usize, j: usize) -> Result<f64> {
        same_grid(&self.grid, f.grid())?;
        let n = self.grid.n() as i64;
        let s: f64 = self
            .offsets
            .iter()
            .map(|&(a, b)| {
                let ii = (i as i64 + a).rem_euclid(n) as usize;
                let jj = (j as i64 + b).rem_euclid(n) as usize;
                f.at(ii, jj)
            })
            .sum();
        Ok(s * self.grid.cell_area())
    }
}

/// x ↦ ∫_{B_r(x)} f(y) dy.
pub fn ball_convolve(f: &ScalarField, r: f64) -> Result<ScalarField> {
    BallKernel::new(f.grid(), r)?.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::mollify::mollify;

    #[test]
    fn constant_gives_disk_area() {
        let g = make_grid(128).unwrap();
        let out = ball_convolve(&ScalarField::constant(&g, 1.0), 0.5).unwrap();
        let tol = 2.0 * g.spacing() / 0.5;
        for v in out.values() {
            assert!((v - PI * 0.25).abs() <= tol * PI * 0.25);
        }
    }

    #[test]
    fn zero_gives_zero() {
        let g = make_grid(32).unwrap();
        let out = ball_convolve(&ScalarField::zeros(&g), 0.5).unwrap();
        assert!(out.max_abs() < 1e-15);
    }

    #[test]
    fn radius_limits() {
        let g = make_grid(32).unwrap();
        let f = ScalarField::zeros(&g);
        assert!(matches!(ball_convolve(&f, 3.2), Err(Error::RadiusTooLarge(_))));
        assert!(matches!(ball_convolve(&f, 0.5 * g.spacing()), Err(Error::UnderResolved { .. })));
    }

    #[test]
    fn narrow_bump_mass_captured() {
        let g = make_grid(256).unwrap();
        let r = 0.3;
        // Discrete delta at the origin, mollified below r/4.
        let mut d = ScalarField::zeros(&g);
        d.values_mut()[0] = 1.0 / g.cell_area();
        let bump = mollify(&d, 0.07).unwrap();
        assert!((bump.integral() - 1.0).abs() < 1e-10);
        let out = ball_convolve(&bump, r).unwrap();
        assert!(out.values()[0] >= 0.99);
        // Direct quadrature agrees with the FFT route.
        let k = BallKernel::new(&g, r).unwrap();
        assert!((k.integral_at(&bump, 0, 0).unwrap() - out.values()[0]).abs() < 1e-12);
    }

    #[test]
    fn pair_matches_single() {
        let g = make_grid(64).unwrap();
        let a = ScalarField::from_fn(&g, |x1, x2| (x1 * 3.0).sin() + x2.cos());
        let b = ScalarField::from_fn(&g, |x1, x2| (x1 - x2).cos().powi(2));
        let k = BallKernel::new(&g, 0.7).unwrap();
        let (pa, pb) = k.apply_pair(a.values(), b.values());
        let sa = k.apply(&a).unwrap();
        let sb = k.apply(&b).unwrap();
        for idx in 0..g.len() {
            assert!((pa[idx] - sa.values()[idx]).abs() < 1e-12);
            assert!((pb[idx] - sb.values()[idx]).abs() < 1e-12);
        }
    }
}
