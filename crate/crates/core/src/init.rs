//! Initial vorticity fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, ZERO};
use crate::grid::TorusGrid;
use crate::mollify::Mollifier;
use crate::Complex64;

/// ω₀ = −2 sin x₁ sin x₂.
pub fn taylor_green(grid: &TorusGrid) -> ScalarField {
    ScalarField::from_fn(grid, |x1, x2| -2.0 * x1.sin() * x2.sin())
}

/// ω₀ = −k cos(k x₂), the vorticity of u = (sin k x₂, 0).
pub fn shear(grid: &TorusGrid, k: u32) -> Result<ScalarField> {
    if k == 0 || 3 * k as usize > grid.n() {
        return Err(Error::InvalidArgument(format!("shear wavenumber {k} not resolved on n={}", grid.n())));
    }
    let k = k as f64;
    Ok(ScalarField::from_fn(grid, |_, x2| -k * (k * x2).cos()))
}

/// Parameters of [`random_smooth`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSpectrum {
    pub seed: u64,
    /// Exponent of the shell energy spectrum E(|k|) ∝ |k|^slope.
    pub slope: f64,
    /// Modes with max(|k₁|,|k₂|) ≤ kmax are populated.
    pub kmax: u32,
    /// Target ‖u₀‖_{L²}.
    pub l2: f64,
}

impl Default for RandomSpectrum {
    fn default() -> Self {
        RandomSpectrum { seed: 0, slope: -4.0, kmax: 16, l2: 1.0 }
    }
}

/// Random trigonometric polynomial with seeded phases. The coefficients
/// depend on `spec` only, so the same field is produced on every grid
/// resolving kmax.
pub fn random_smooth(grid: &TorusGrid, spec: &RandomSpectrum) -> Result<ScalarField> {
    let n = grid.n();
    if spec.kmax == 0 || 3 * spec.kmax as usize > n {
        return Err(Error::InvalidArgument(format!(
            "kmax={} must be positive and at most n/3 (n={n})",
            spec.kmax
        )));
    }
    if !(spec.l2 >= 0.0) || !spec.slope.is_finite() {
        return Err(Error::InvalidArgument("random spectrum needs finite slope and l2 ≥ 0".into()));
    }
    let km = spec.kmax as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut coeffs = Vec::new();
    // Half-plane k₂ > 0 or (k₂ = 0, k₁ > 0), fixed order.
    for k2 in 0..=km {
        for k1 in -km..=km {
            if k2 == 0 && k1 <= 0 {
                continue;
            }
            let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let k = ((k1 * k1 + k2 * k2) as f64).sqrt();
            // |ω̂|² = |k|²|û|² and |û_k|² ∝ E(|k|)/|k| on a 2-D shell.
            let amp = k.powf(0.5 * (spec.slope + 1.0));
            coeffs.push((k1, k2, Complex64::from_polar(amp, theta)));
        }
    }
    // ‖u‖² = (2π)² Σ_{all k} |c_k|²/|k|², both half-planes.
    let u_sq: f64 = coeffs
        .iter()
        .map(|(k1, k2, c)| 2.0 * c.norm_sqr() / (k1 * k1 + k2 * k2) as f64)
        .sum::<f64>()
        * std::f64::consts::TAU.powi(2);
    let scale = if u_sq > 0.0 { spec.l2 / u_sq.sqrt() } else { 0.0 };
    let nn = (n * n) as f64;
    let mut s = vec![ZERO; grid.len()];
    for (k1, k2, c) in coeffs {
        let c = c * scale * nn;
        s[grid.mode_index(k1, k2)] = c;
        s[grid.mode_index(-k1, -k2)] = c.conj();
    }
    Ok(ScalarField::from_spectrum(grid, &s))
}

/// Default mollification scale for measure-like data: max(4h, √ν/4).
pub fn measure_scale(grid: &TorusGrid, nu: f64) -> f64 {
    (4.0 * grid.spacing()).max(0.25 * nu.sqrt())
}

/// Non-negative bump of total mass `circulation` centred on the grid
/// point nearest `center`, with radius `scale`. Not mean-zero.
pub fn vortex_bump(grid: &TorusGrid, center: (f64, f64), circulation: f64, scale: f64) -> Result<ScalarField> {
    let m = Mollifier::new(grid, scale)?;
    let n = grid.n();
    let h = grid.spacing();
    let idx = |x: f64| ((x.rem_euclid(std::f64::consts::TAU) / h).round() as usize) % n;
    let mut delta = ScalarField::zeros(grid);
    delta.values_mut()[idx(center.1) * n + idx(center.0)] = circulation / grid.cell_area();
    let mut out = m.apply(&delta)?;
    // Round-off of the FFT product can leave tiny negative values.
    out.values_mut().iter_mut().for_each(|v| {
        if circulation >= 0.0 {
            *v = v.max(0.0)
        } else {
            *v = v.min(0.0)
        }
    });
    Ok(out)
}

/// Mollified point vortex of circulation `sign·circulation` with the
/// uniform compensating background removed.
pub fn mollified_vortex(
    grid: &TorusGrid,
    center: (f64, f64),
    sign: f64,
    circulation: f64,
    scale: f64,
) -> Result<ScalarField> {
    Ok(vortex_bump(grid, center, sign.signum() * circulation, scale)?.remove_mean())
}

/// Counter-rotating pair at (π ∓ d/2, π), circulations ±Γ.
pub fn vortex_pair(grid: &TorusGrid, separation: f64, circulation: f64, scale: f64) -> Result<ScalarField> {
    let pi = std::f64::consts::PI;
    let a = vortex_bump(grid, (pi - 0.5 * separation, pi), circulation, scale)?;
    let b = vortex_bump(grid, (pi + 0.5 * separation, pi), -circulation, scale)?;
    Ok(a.add(&b)?.remove_mean())
}

/// Two flat sheets of opposite strength at x₂ = π/2 and 3π/2, smoothed at
/// `scale`. The velocity jumps by `strength` across each sheet.
pub fn vortex_sheet_approx(grid: &TorusGrid, strength: f64, scale: f64) -> Result<ScalarField> {
    let m = Mollifier::new(grid, scale)?;
    let n = grid.n();
    let h = grid.spacing();
    let mut lines = ScalarField::zeros(grid);
    let (j1, j2) = (n / 4, 3 * n / 4);
    for i in 0..n {
        lines.values_mut()[j1 * n + i] = -strength / h;
        lines.values_mut()[j2 * n + i] = strength / h;
    }
    Ok(m.apply(&lines)?.remove_mean())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::biot_savart;
    use crate::grid::make_grid;
    use crate::norms::norms;

    #[test]
    fn random_smooth_is_normalized_and_grid_independent() {
        let spec = RandomSpectrum { seed: 7, slope: -3.0, kmax: 8, l2: 1.0 };
        let a = random_smooth(&make_grid(32).unwrap(), &spec).unwrap();
        let b = random_smooth(&make_grid(64).unwrap(), &spec).unwrap();
        assert!(a.is_mean_zero());
        let ua = biot_savart(&a).unwrap();
        assert!((norms(&ua).l2 - 1.0).abs() < 1e-12);
        // Coarse samples are the even-index samples of the fine grid.
        for j in 0..32 {
            for i in 0..32 {
                assert!((a.at(i, j) - b.at(2 * i, 2 * j)).abs() < 1e-12);
            }
        }
        let c = random_smooth(&make_grid(32).unwrap(), &RandomSpectrum { seed: 8, ..spec }).unwrap();
        assert!(a.sub(&c).unwrap().max_abs() > 1e-3);
    }

    #[test]
    fn random_smooth_rejects_unresolved_kmax() {
        let g = make_grid(32).unwrap();
        assert!(random_smooth(&g, &RandomSpectrum { kmax: 11, ..Default::default() }).is_err());
    }

    #[test]
    fn shear_matches_velocity() {
        let g = make_grid(32).unwrap();
        let u = biot_savart(&shear(&g, 3).unwrap()).unwrap();
        for (idx, v) in u.u1().iter().enumerate() {
            let x2 = g.coord(idx / 32);
            assert!((v - (3.0 * x2).sin()).abs() < 1e-12);
        }
        assert!(u.u2().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn vortex_bump_mass_and_sign() {
        let g = make_grid(128).unwrap();
        let b = vortex_bump(&g, (1.0, 2.0), 0.3, 0.2).unwrap();
        assert!((b.integral() - 0.3).abs() < 1e-10);
        assert!(b.min() >= 0.0);
        let w = mollified_vortex(&g, (1.0, 2.0), -1.0, 0.3, 0.2).unwrap();
        assert!(w.is_mean_zero());
        assert!(w.min() < 0.0);
    }

    #[test]
    fn sheet_velocity_jumps() {
        let g = make_grid(128).unwrap();
        let w = vortex_sheet_approx(&g, 1.0, 0.2).unwrap();
        let u = biot_savart(&w).unwrap();
        // Between the sheets u₁ is +½, outside −½.
        let n = 128;
        assert!((u.u1()[(n / 2) * n] - 0.5).abs() < 1e-3);
        assert!((u.u1()[0] + 0.5).abs() < 1e-3);
    }
}
