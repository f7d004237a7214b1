//! Residual of the steady forced equations with the pressure eliminated.

use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::field::{resample_spectrum, same_grid, VectorField, ZERO};
use crate::grid::TorusGrid;
use crate::norms::parseval_weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PressureMode {
    /// Project onto divergence-free fields (pressure absorbs gradients).
    Leray,
    /// p = 0: no projection.
    Zero,
}

/// ‖P[∇·(u⊗u) − νΔu − f]‖_{L²}. Products are formed on a grid of twice the
/// resolution, which is exact for fields resolved on the input grid.
pub fn steady_residual(u: &VectorField, pressure: PressureMode, f: &VectorField, nu: f64) -> Result<f64> {
    let g = u.grid();
    same_grid(g, f.grid())?;
    let n = g.n();
    let fine = TorusGrid::new(2 * n)?;
    let (s1, s2) = u.spectra();
    let (v1, v2) = fine.inverse_pair(&resample_spectrum(g, &s1, &fine), &resample_spectrum(g, &s2, &fine));
    let (p11, p12) = fine.forward_pair(
        &v1.iter().map(|a| a * a).collect::<Vec<_>>(),
        &v1.iter().zip(&v2).map(|(a, b)| a * b).collect::<Vec<_>>(),
    );
    let p22 = fine.forward_real(&v2.iter().map(|b| b * b).collect::<Vec<_>>());
    let (p11, p12, p22) = (
        resample_spectrum(&fine, &p11, g),
        resample_spectrum(&fine, &p12, g),
        resample_spectrum(&fine, &p22, g),
    );
    let (f1, f2) = f.spectra();
    let mut total = 0.0;
    for idx in 0..g.len() {
        let k1 = g.derivative_wavenumber(idx % n);
        let k2 = g.derivative_wavenumber(idx / n);
        let ksq = g.k_squared(idx);
        let i = Complex64::new(0.0, 1.0);
        let mut r1 = i * (p11[idx] * k1 + p12[idx] * k2) + s1[idx] * (nu * ksq) - f1[idx];
        let mut r2 = i * (p12[idx] * k1 + p22[idx] * k2) + s2[idx] * (nu * ksq) - f2[idx];
        if pressure == PressureMode::Leray {
            let kk = k1 * k1 + k2 * k2;
            if kk > 0.0 {
                let dot = (r1 * k1 + r2 * k2) / kk;
                r1 -= dot * k1;
                r2 -= dot * k2;
            } else if idx != 0 {
                // Nyquist lines: no projection direction is resolved.
                r1 = ZERO;
                r2 = ZERO;
            }
        }
        total += r1.norm_sqr() + r2.norm_sqr();
    }
    Ok((total * parseval_weight(n)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn shear_with_self_force() {
        let m = 4.0;
        let g = make_grid(64).unwrap();
        let u = VectorField::from_fn(&g, |_, x2| ((m * x2).sin(), 0.0));
        let r = steady_residual(&u, PressureMode::Zero, &u, 1.0 / (m * m)).unwrap();
        assert!(r <= 1e-10, "{r}");
    }

    #[test]
    fn zero_is_steady() {
        let g = make_grid(16).unwrap();
        let z = VectorField::zeros(&g);
        assert_eq!(steady_residual(&z, PressureMode::Leray, &z, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn nonsteady_has_residual() {
        let g = make_grid(32).unwrap();
        let u = VectorField::from_fn(&g, |_, x2| (x2.sin(), 0.0));
        let f = VectorField::zeros(&g);
        let r = steady_residual(&u, PressureMode::Leray, &f, 0.1).unwrap();
        // νΔu = −0.1u, ‖u‖ = π√2.
        assert!((r - 0.1 * std::f64::consts::PI * 2f64.sqrt()).abs() < 1e-12);
    }
}
