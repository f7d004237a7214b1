//! Conservation and monotonicity checks on trajectories.

use serde::{Deserialize, Serialize};

use super::{DecompositionPair, Trajectory};
use crate::error::{Error, Result};

/// Relative slack for ‖ω(t)‖_{L¹} ≤ ‖ω₀‖_{L¹}.
pub const L1_TOL: f64 = 1e-6;
/// Relative slack for ‖ω(t)‖² ≤ ‖u₀‖²/(2tν).
pub const ENSTROPHY_TOL: f64 = 1e-3;

/// max_t |E(t) + ν∫₀ᵗ‖∇u‖² − E(0)| / E(0); zero data returns 0.
pub fn energy_balance_residual(traj: &Trajectory) -> Result<f64> {
    if !traj.force().is_none() {
        return Err(Error::InvalidArgument("energy balance residual needs an unforced trajectory".into()));
    }
    let ledger = traj.ledger();
    if ledger.is_empty() {
        return Err(Error::InvalidArgument("trajectory has no ledger".into()));
    }
    let e0 = ledger.initial_energy();
    let worst = ledger.entries().iter().map(|e| e.residual(e0).abs()).fold(0.0, f64::max);
    if e0 == 0.0 {
        return Ok(if worst == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(worst / e0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub l1_ok: bool,
    pub enstrophy_bound_ok: bool,
    /// First time with ‖ω(t)‖_{L¹} > ‖ω₀‖_{L¹}(1 + tol).
    pub first_l1_violation: Option<f64>,
    /// First time with ‖ω(t)‖² above the decay bound.
    pub first_enstrophy_violation: Option<f64>,
    /// max_t ‖ω(t)‖_{L¹}/‖ω₀‖_{L¹}.
    pub l1_ratio: f64,
    /// max_{t ≥ 10dt} ‖ω(t)‖²·2tν/‖u₀‖².
    pub enstrophy_ratio: f64,
}

/// L¹ monotonicity and ‖ω(t)‖² ≤ ‖u₀‖²/(2tν) over every ledger entry,
/// with relative slacks `l1_tol` and `enstrophy_tol`.
pub fn monotonicity_checks(traj: &Trajectory, l1_tol: f64, enstrophy_tol: f64) -> Result<MonotonicityReport> {
    if !traj.force().is_none() {
        return Err(Error::InvalidArgument("monotonicity checks need an unforced trajectory".into()));
    }
    let entries = traj.ledger().entries();
    if entries.is_empty() {
        return Err(Error::InvalidArgument("trajectory has no ledger".into()));
    }
    let l1_0 = entries[0].l1_vorticity;
    let u0_sq = 2.0 * entries[0].energy;
    let t_min = 10.0 * traj.dt();
    let mut rep = MonotonicityReport {
        l1_ok: true,
        enstrophy_bound_ok: true,
        first_l1_violation: None,
        first_enstrophy_violation: None,
        l1_ratio: if l1_0 > 0.0 { 1.0 } else { 0.0 },
        enstrophy_ratio: 0.0,
    };
    for e in entries {
        if e.l1_vorticity > l1_0 * (1.0 + l1_tol) {
            rep.l1_ok = false;
            rep.first_l1_violation.get_or_insert(e.t);
        }
        if l1_0 > 0.0 {
            rep.l1_ratio = rep.l1_ratio.max(e.l1_vorticity / l1_0);
        }
        if e.t >= t_min && e.t > 0.0 {
            let bound = u0_sq / (2.0 * e.t * traj.nu());
            if e.enstrophy > bound * (1.0 + enstrophy_tol) {
                rep.enstrophy_bound_ok = false;
                rep.first_enstrophy_violation.get_or_insert(e.t);
            }
            if bound > 0.0 {
                rep.enstrophy_ratio = rep.enstrophy_ratio.max(e.enstrophy / bound);
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// max_t ‖f + μ − ω‖_∞ / max|ω|.
    pub sum_error: f64,
    /// min_t min_x μ / max μ (negative means undershoot).
    pub min_mu_ratio: f64,
    pub mu_ok: bool,
    /// max_t max_x (|ω| − 2|f| − ω)₊ / max|ω|.
    pub pointwise_excess: f64,
    pub pointwise_ok: bool,
    /// max_t ∫β(|f(t)|) / ∫β(|f₀|).
    pub beta_ratio: f64,
    pub beta_ok: bool,
}

/// Checks |ω| ≤ 2|f| + ω, ∫β(|f(t)|) ≤ ∫β(|f₀|) and the μ undershoot at
/// every snapshot; `tol` is the relative slack for all three.
pub fn check_decomposition(
    traj: &Trajectory,
    pair: &DecompositionPair,
    beta: &dyn Fn(f64) -> f64,
    tol: f64,
) -> Result<DecompositionReport> {
    if pair.times.len() != traj.len() {
        return Err(Error::InvalidArgument("decomposition does not match the parent's snapshots".into()));
    }
    let wmax = traj.snapshots().iter().map(|w| w.max_abs()).fold(0.0, f64::max);
    let mumax = pair.mu_part.iter().map(|m| m.max()).fold(0.0, f64::max);
    let beta_int = |f: &crate::field::ScalarField| f.values().iter().map(|v| beta(v.abs())).sum::<f64>() * f.grid().cell_area();
    let b0 = beta_int(&pair.f_part[0]);
    let mut rep = DecompositionReport {
        sum_error: 0.0,
        min_mu_ratio: 0.0,
        mu_ok: true,
        pointwise_excess: 0.0,
        pointwise_ok: true,
        beta_ratio: if b0 > 0.0 { 1.0 } else { 0.0 },
        beta_ok: true,
    };
    for ((w, f), mu) in traj.snapshots().iter().zip(&pair.f_part).zip(&pair.mu_part) {
        let mut err: f64 = 0.0;
        let mut excess: f64 = 0.0;
        for ((&wv, &fv), &mv) in w.values().iter().zip(f.values()).zip(mu.values()) {
            err = err.max((fv + mv - wv).abs());
            excess = excess.max(wv.abs() - 2.0 * fv.abs() - wv);
        }
        if wmax > 0.0 {
            rep.sum_error = rep.sum_error.max(err / wmax);
            rep.pointwise_excess = rep.pointwise_excess.max(excess / wmax);
        }
        if mumax > 0.0 {
            rep.min_mu_ratio = rep.min_mu_ratio.min(mu.min() / mumax);
        }
        let b = beta_int(f);
        if b0 > 0.0 {
            rep.beta_ratio = rep.beta_ratio.max(b / b0);
        } else if b > 0.0 {
            rep.beta_ratio = f64::INFINITY;
        }
    }
    rep.mu_ok = rep.min_mu_ratio >= -tol;
    rep.pointwise_ok = rep.pointwise_excess <= tol;
    rep.beta_ok = rep.beta_ratio <= 1.0 + tol;
    Ok(rep)
}
