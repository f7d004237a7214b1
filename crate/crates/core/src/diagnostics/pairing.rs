//! Pairings of densities with test functions, and ball masses at a point.

use serde::{Deserialize, Serialize};

use crate::ball::BallKernel;
use crate::error::{Error, Result};
use crate::field::ScalarField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingRecord {
    pub test_function: String,
    /// ⟨density_k, φ⟩ in sequence order.
    pub values: Vec<f64>,
    /// Aitken Δ² extrapolation of the last three values when the
    /// increments contract geometrically, else the last value.
    pub limit_estimate: f64,
    /// |last increment|, a Cauchy estimate of the remaining error.
    pub cauchy_gap: f64,
}

/// ∫ density·φ by cell quadrature.
pub fn pair(density: &ScalarField, phi: &dyn Fn(f64, f64) -> f64) -> f64 {
    let g = density.grid();
    let n = g.n();
    let mut s = 0.0;
    for j in 0..n {
        let x2 = g.coord(j);
        for i in 0..n {
            s += density.at(i, j) * phi(g.coord(i), x2);
        }
    }
    s * g.cell_area()
}

fn aitken(v: &[f64]) -> f64 {
    let k = v.len();
    let last = v[k - 1];
    if k < 3 {
        return last;
    }
    let (a, b, c) = (v[k - 3], v[k - 2], v[k - 1]);
    let (d1, d2) = (b - a, c - b);
    let denom = d2 - d1;
    // Geometric contraction with a common sign.
    if d1 * d2 > 0.0 && d2.abs() < d1.abs() && denom != 0.0 {
        c - d2 * d2 / denom
    } else {
        last
    }
}

/// ⟨ρ_k, φ⟩ along a sequence of densities (grids may differ) with a limit
/// estimate.
pub fn weak_star_pairing(
    densities: &[ScalarField],
    test_function: &str,
    phi: &dyn Fn(f64, f64) -> f64,
) -> Result<PairingRecord> {
    if densities.is_empty() {
        return Err(Error::InvalidArgument("no densities to pair".into()));
    }
    let values: Vec<f64> = densities.iter().map(|d| pair(d, phi)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: f64::NAN, step: 0 });
    }
    let k = values.len();
    let cauchy_gap = if k >= 2 { (values[k - 1] - values[k - 2]).abs() } else { f64::INFINITY };
    Ok(PairingRecord { test_function: test_function.into(), limit_estimate: aitken(&values), values, cauchy_gap })
}

/// ⟨ρ⊗ρ, φ⊗ψ⟩ = ⟨ρ, φ⟩⟨ρ, ψ⟩, returned with its two factors.
pub fn separable_pairing(
    density: &ScalarField,
    phi: &dyn Fn(f64, f64) -> f64,
    psi: &dyn Fn(f64, f64) -> f64,
) -> (f64, f64, f64) {
    let a = pair(density, phi);
    let b = pair(density, psi);
    (a, b, a * b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomProfile {
    /// Grid point nearest the requested centre.
    pub x0: (f64, f64),
    /// Resolvable radii (≥ spacing), decreasing.
    pub radii: Vec<f64>,
    pub masses: Vec<f64>,
    /// Mass at the smallest resolvable radius.
    pub score: f64,
}

/// ∫_{B_r(x₀)} density for each radius, largest first.
pub fn atom_mass(density: &ScalarField, x0: (f64, f64), radii: &[f64]) -> Result<AtomProfile> {
    let g = density.grid();
    let n = g.n();
    let h = g.spacing();
    let idx = |x: f64| ((x.rem_euclid(std::f64::consts::TAU) / h).round() as usize) % n;
    let (i, j) = (idx(x0.0), idx(x0.1));
    let mut rs: Vec<f64> = radii.iter().copied().filter(|r| *r >= h).collect();
    rs.sort_by(|a, b| b.total_cmp(a));
    if rs.is_empty() {
        return Err(Error::UnderResolved { what: "atom radius", scale: radii.iter().copied().fold(0.0, f64::max), min: h });
    }
    let mut masses = Vec::with_capacity(rs.len());
    for r in &rs {
        let k = BallKernel::new(g, *r)?;
        masses.push(k.integral_at(density, i, j)?);
    }
    Ok(AtomProfile { x0: (g.coord(i), g.coord(j)), score: *masses.last().unwrap(), radii: rs, masses })
}
