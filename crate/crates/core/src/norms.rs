//! Quadrature norms.

use serde::{Deserialize, Serialize};

use crate::field::{ScalarField, VectorField};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    /// ‖∇f‖_{L²}, evaluated spectrally.
    pub h1_seminorm: f64,
    /// ½‖f‖²_{L²}.
    pub energy: f64,
}

pub trait Normed {
    fn norms(&self) -> Norms;
}

/// Norms of a scalar or vector field.
pub fn norms<F: Normed>(field: &F) -> Norms {
    field.norms()
}

impl Normed for ScalarField {
    fn norms(&self) -> Norms {
        let g = self.grid();
        let w = g.cell_area();
        let l1 = self.values().iter().map(|v| v.abs()).sum::<f64>() * w;
        let sq = self.values().iter().map(|v| v * v).sum::<f64>() * w;
        let s = self.spectrum();
        let grad_sq: f64 = s.iter().enumerate().map(|(idx, z)| g.k_squared(idx) * z.norm_sqr()).sum();
        Norms {
            l1,
            l2: sq.sqrt(),
            h1_seminorm: (grad_sq * parseval_weight(g.n())).sqrt(),
            energy: 0.5 * sq,
        }
    }
}

impl Normed for VectorField {
    fn norms(&self) -> Norms {
        let g = self.grid();
        let w = g.cell_area();
        let l1 = self.u1().iter().zip(self.u2()).map(|(a, b)| a.hypot(*b)).sum::<f64>() * w;
        let sq = self.magnitude_squared().values().iter().sum::<f64>() * w;
        let (s1, s2) = self.spectra();
        let grad_sq: f64 = (0..g.len()).map(|idx| g.k_squared(idx) * (s1[idx].norm_sqr() + s2[idx].norm_sqr())).sum();
        Norms {
            l1,
            l2: sq.sqrt(),
            h1_seminorm: (grad_sq * parseval_weight(g.n())).sqrt(),
            energy: 0.5 * sq,
        }
    }
}

/// ∫|f|² = parseval_weight(n)·Σ|f̂|² for the unnormalized transform.
#[inline]
pub fn parseval_weight(n: usize) -> f64 {
    let nn = (n * n) as f64;
    (std::f64::consts::TAU * std::f64::consts::TAU) / (nn * nn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::biot_savart;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn shear_closed_forms() {
        let g = make_grid(64).unwrap();
        let u = VectorField::from_fn(&g, |_, x2| (x2.sin(), 0.0));
        let nm = norms(&u);
        assert!((nm.energy - PI * PI).abs() < 1e-12);
        assert!((nm.h1_seminorm.powi(2) - 2.0 * PI * PI).abs() < 1e-11);
    }

    #[test]
    fn zero_field() {
        let g = make_grid(8).unwrap();
        assert_eq!(norms(&ScalarField::zeros(&g)), Norms::default());
        assert_eq!(norms(&VectorField::zeros(&g)), Norms::default());
    }

    #[test]
    fn grad_u_equals_omega_single() {
        let g = make_grid(32).unwrap();
        let w = ScalarField::from_fn(&g, |x1, x2| (x1 + 2.0 * x2).sin() - 0.5 * (3.0 * x1).cos());
        let u = biot_savart(&w).unwrap();
        let a = norms(&u).h1_seminorm;
        let b = norms(&w).l2;
        assert!((a - b).abs() <= 1e-12 * b);
    }
}
