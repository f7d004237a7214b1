//! Inequality certificates: constant-free bounds checked directly, and
//! bounds with unknown constants fitted at the largest ν.

use serde::{Deserialize, Serialize};

use super::functionals::{FunctionalSeries, UReference};
use crate::dynamics::{monotonicity_checks, Trajectory};
use crate::equi::InverseTables;
use crate::error::{Error, Result};
use crate::mollify::Mollifier;
use crate::norms::norms;

/// Slack for constant-free inequalities.
pub const CONSTANT_FREE_TOL: f64 = 1e-2;
/// Slack for the higher-order bound.
pub const HIGHER_ORDER_TOL: f64 = 1e-3;
/// Allowed growth of a fitted constant across a sweep.
pub const DRIFT_FACTOR: f64 = 2.0;
/// ε values scanned in the concentration bounds.
pub const EPS_SCAN: [f64; 3] = [1e-2, 1e-1, 1.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant_free: bool,
    /// Constant-free: lhs/rhs. Fitted: lhs/(C·rhs) once calibrated.
    pub margin: f64,
    pub pass: bool,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs > 0.0 {
        lhs / rhs
    } else {
        f64::INFINITY
    }
}

impl Certificate {
    /// lhs ≤ rhs·(1 + tol).
    pub fn constant_free(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = ratio(lhs, rhs);
        Certificate { name: name.into(), lhs, rhs, constant_free: true, margin, pass: margin <= 1.0 + tol }
    }

    /// lhs ≤ C·rhs with C unknown until [`Certificate::calibrate`].
    pub fn fitted(name: &str, lhs: f64, rhs: f64) -> Self {
        Certificate { name: name.into(), lhs, rhs, constant_free: false, margin: 1.0, pass: true }
    }

    pub fn ratio(&self) -> f64 {
        ratio(self.lhs, self.rhs)
    }

    /// Sets margin = lhs/(C·rhs) and pass = margin ≤ 2.
    pub fn calibrate(&mut self, c: f64) {
        if self.constant_free {
            return;
        }
        let r = self.ratio();
        self.margin = if r == 0.0 {
            0.0
        } else if c > 0.0 && c.is_finite() {
            r / c
        } else {
            f64::INFINITY
        };
        self.pass = self.margin <= DRIFT_FACTOR;
    }
}

/// Calibrates fitted certificates with matching names across a sweep: C is
/// the ratio in the set with the largest ν. Returns the constants by name.
pub fn calibrate_sweep(sets: &mut [(f64, &mut Vec<Certificate>)]) -> Vec<(String, f64)> {
    let Some(cal) = sets.iter().map(|(nu, _)| *nu).reduce(f64::max) else {
        return Vec::new();
    };
    let reference: Vec<(String, f64)> = sets
        .iter()
        .find(|(nu, _)| *nu == cal)
        .map(|(_, c)| c.iter().filter(|c| !c.constant_free).map(|c| (c.name.clone(), c.ratio())).collect())
        .unwrap_or_default();
    for (_, certs) in sets.iter_mut() {
        for c in certs.iter_mut() {
            if let Some((_, k)) = reference.iter().find(|(n, _)| *n == c.name) {
                c.calibrate(*k);
            }
        }
    }
    reference
}

/// Quantities and certificates of one run at ℓ = multiplier·√ν.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KolmogorovReport {
    pub nu: f64,
    pub ell: f64,
    pub delta: f64,
    pub multiplier: f64,
    /// ν∫_δ^T‖∇u‖².
    pub diss_total: f64,
    /// ν∫₀ᵀ‖∇u‖².
    pub diss_full: f64,
    pub s2: f64,
    pub lambda_con: f64,
    pub omega_con: f64,
    pub q_con: f64,
    /// Λ_con with u_ref = 0.
    pub lambda_zero: f64,
    pub certificates: Vec<Certificate>,
}

fn scan_eps(con: f64, extra: f64, delta: f64) -> f64 {
    EPS_SCAN.iter().map(|e| con / e + extra + (e / delta).sqrt()).fold(f64::INFINITY, f64::min)
}

/// Evaluates every inequality tying dissipation to S2, Ω_con, Q_con and
/// Λ_con at ℓ = multiplier·√ν, plus the ledger checks when the run has one.
pub fn kolmogorov_equivalence_report(
    traj: &Trajectory,
    u_ref: UReference<'_>,
    multiplier: f64,
    delta: f64,
) -> Result<KolmogorovReport> {
    let ell = multiplier * traj.nu().sqrt();
    let t_end = traj.end_time();
    if !(delta > 0.0) || delta >= t_end {
        return Err(Error::EmptyWindow(delta, t_end));
    }
    let series = FunctionalSeries::compute(traj, ell, u_ref)?;
    let nu = traj.nu();
    let grad_full = series.integral(|r| r.omega_sq);
    let diss_full = nu * grad_full;
    let diss_total = series.dissipation(delta, t_end)?;
    let s2 = series.s2();
    let omega_con = series.omega_con();
    let q_con = series.q_con();
    let lambda_con = series.lambda_con();
    let lambda_zero = series.integral(|r| r.lambda_zero);
    let ref_mass = series.ref_mass();

    let mut certs = vec![
        Certificate::constant_free("s2_le_diss", s2, ell * ell * grad_full, CONSTANT_FREE_TOL),
        Certificate::constant_free(
            "omega_con_cauchy_schwarz",
            omega_con,
            (series.disk_area * t_end * grad_full).sqrt(),
            CONSTANT_FREE_TOL,
        ),
        Certificate::constant_free("q_le_lambda_zero", q_con, lambda_zero, CONSTANT_FREE_TOL),
        Certificate::fitted("diss_by_s2", diss_total, s2.sqrt() / delta.sqrt()),
        Certificate::fitted("diss_by_omega_con", diss_total, scan_eps(omega_con, 0.0, delta)),
        Certificate::fitted("diss_by_q_con", diss_total, scan_eps(q_con, 0.0, delta)),
        Certificate::fitted("diss_by_lambda_con", diss_total, scan_eps(lambda_con, ref_mass, delta)),
        Certificate::fitted("q_con_by_diss", q_con, diss_full.sqrt()),
        Certificate::fitted("omega_con_by_diss", omega_con, diss_full.sqrt()),
    ];
    if traj.force().is_none() && !traj.ledger().is_empty() {
        let m = monotonicity_checks(traj, CONSTANT_FREE_TOL, CONSTANT_FREE_TOL)?;
        certs.push(Certificate::constant_free("l1_monotone", m.l1_ratio, 1.0, CONSTANT_FREE_TOL));
        certs.push(Certificate::constant_free("enstrophy_decay", m.enstrophy_ratio, 1.0, CONSTANT_FREE_TOL));
        let u0 = series.rows[0].u_sq;
        let lhs = nu * nu * series.window(|r| r.grad_omega_sq, delta, t_end)?;
        certs.push(Certificate::constant_free("higher_order", lhs, u0 / delta, HIGHER_ORDER_TOL));
    }
    Ok(KolmogorovReport {
        nu,
        ell,
        delta,
        multiplier,
        diss_total,
        diss_full,
        s2,
        lambda_con,
        omega_con,
        q_con,
        lambda_zero,
        certificates: certs,
    })
}

/// ν²∫_δ^T‖∇ω‖² ≤ ‖u₀‖²/δ with slack 1+10⁻³.
pub fn higher_order_certificate(traj: &Trajectory, delta: f64) -> Result<Certificate> {
    let t_end = traj.end_time();
    if !(delta > 0.0) || delta >= t_end {
        return Err(Error::EmptyWindow(delta, t_end));
    }
    let grid = traj.grid();
    let pw = crate::norms::parseval_weight(grid.n());
    let grad: Vec<f64> = traj
        .snapshots()
        .iter()
        .map(|w| w.spectrum().iter().enumerate().map(|(i, z)| grid.k_squared(i) * z.norm_sqr()).sum::<f64>() * pw)
        .collect();
    let lhs = traj.nu().powi(2) * super::functionals::trapezoid_window(traj.times(), &grad, delta, t_end)?;
    let u0 = norms(&traj.velocity(0)).l2.powi(2);
    Ok(Certificate::constant_free("higher_order", lhs, u0 / delta, HIGHER_ORDER_TOL))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortTimeRow {
    pub nu: f64,
    /// ‖u(δ) − u₀‖².
    pub increment_sq: f64,
    /// ν∫₀^δ‖∇u‖².
    pub dissipation: f64,
    pub increment: Certificate,
    pub dissipation_cert: Certificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortTimeCertificate {
    pub eps: f64,
    pub delta: f64,
    /// Φ(ε) over the family's initial velocities.
    pub phi: f64,
    pub rows: Vec<ShortTimeRow>,
    pub worst_margin: f64,
    pub pass: bool,
}

/// ‖u(δ) − u₀‖² ≲ Φ(ε) + δ/ε² and ν∫₀^δ‖∇u‖² ≲ (Φ(ε) + δ/ε²)^{1/2}, with
/// constants fitted at the largest ν.
pub fn short_time_certificate(family: &[&Trajectory], eps: f64, delta: f64) -> Result<ShortTimeCertificate> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory family".into()));
    }
    let mut phi: f64 = 0.0;
    for tr in family {
        if !(delta > 0.0) || delta > tr.end_time() {
            return Err(Error::EmptyWindow(0.0, delta));
        }
        let u0 = tr.velocity(0);
        let m = Mollifier::new(tr.grid(), eps)?;
        phi = phi.max(norms(&m.apply_vector(&u0)?.sub(&u0)?).l2);
    }
    let env = phi + delta / (eps * eps);
    let mut rows = Vec::with_capacity(family.len());
    for tr in family {
        let u0 = tr.velocity(0);
        let ud = tr.velocity_at(delta)?;
        let inc = norms(&ud.sub(&u0)?).l2.powi(2);
        let diss = super::functionals::dissipation_total(tr, 0.0, delta)?;
        rows.push(ShortTimeRow {
            nu: tr.nu(),
            increment_sq: inc,
            dissipation: diss,
            increment: Certificate::fitted("short_time_increment", inc, env),
            dissipation_cert: Certificate::fitted("short_time_dissipation", diss, env.sqrt()),
        });
    }
    let cal = rows.iter().map(|r| r.nu).fold(f64::NEG_INFINITY, f64::max);
    let cal_row = rows.iter().find(|r| r.nu == cal).unwrap();
    let (c1, c2) = (cal_row.increment.ratio(), cal_row.dissipation_cert.ratio());
    for r in rows.iter_mut() {
        r.increment.calibrate(c1);
        r.dissipation_cert.calibrate(c2);
    }
    let worst_margin = rows.iter().map(|r| r.increment.margin.max(r.dissipation_cert.margin)).fold(0.0, f64::max);
    let pass = rows.iter().all(|r| r.increment.pass && r.dissipation_cert.pass);
    Ok(ShortTimeCertificate { eps, delta, phi, rows, worst_margin, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub nu: f64,
    pub t_end: f64,
    /// ν∫_δ^T‖∇u‖².
    pub dissipation: f64,
    /// G_β(√ν).
    pub g_term: f64,
    /// (log 1/ν)^{−1/2}.
    pub log_term: f64,
    /// √((T/δ)(G_β(√ν) + (log 1/ν)^{−1/2})).
    pub envelope_shape: f64,
    /// T(G_β(√ν) + (log 1/ν)^{−1/2}) ≤ ½.
    pub side_condition: bool,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub beta_name: String,
    pub delta: f64,
    pub fitted_c: f64,
    pub rows: Vec<RateRow>,
    pub pass: bool,
}

/// Dissipation of one run over [δ, T].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub nu: f64,
    pub t_end: f64,
    pub dissipation: f64,
}

impl RateSample {
    pub fn from_trajectory(tr: &Trajectory, delta: f64) -> Result<Self> {
        let t_end = tr.end_time();
        let dissipation = if delta >= t_end {
            if delta > t_end * (1.0 + 1e-12) {
                return Err(Error::EmptyWindow(delta, t_end));
            }
            0.0
        } else {
            super::functionals::dissipation_total(tr, delta, t_end)?
        };
        Ok(RateSample { nu: tr.nu(), t_end, dissipation })
    }
}

/// Dissipation against C√((T/δ)(G_β(√ν) + (log 1/ν)^{−1/2})), C fitted at
/// the largest ν. The side condition is reported, not enforced.
pub fn rate_certificate(family: &[&Trajectory], tables: &InverseTables, delta: f64) -> Result<RateCertificate> {
    let samples = family.iter().map(|tr| RateSample::from_trajectory(tr, delta)).collect::<Result<Vec<_>>>()?;
    rate_certificate_from_samples(&samples, tables, delta)
}

/// [`rate_certificate`] on precomputed dissipations.
pub fn rate_certificate_from_samples(
    samples: &[RateSample],
    tables: &InverseTables,
    delta: f64,
) -> Result<RateCertificate> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory family".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let mut rows = Vec::with_capacity(samples.len());
    for smp in samples {
        let (nu, t_end) = (smp.nu, smp.t_end);
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::OutOfRange(format!("rate envelope needs 0 < nu < 1, got {nu}")));
        }
        let g_term = tables.big_g(nu.sqrt())?;
        let log_term = 1.0 / (1.0 / nu).ln().sqrt();
        let s = g_term + log_term;
        rows.push(RateRow {
            nu,
            t_end,
            dissipation: smp.dissipation,
            g_term,
            log_term,
            envelope_shape: (t_end / delta * s).sqrt(),
            side_condition: t_end * s <= 0.5,
            margin: 0.0,
        });
    }
    let cal = rows.iter().max_by(|a, b| a.nu.total_cmp(&b.nu)).unwrap();
    let fitted_c = ratio(cal.dissipation, cal.envelope_shape);
    for r in rows.iter_mut() {
        let q = ratio(r.dissipation, r.envelope_shape);
        r.margin = if q == 0.0 { 0.0 } else if fitted_c > 0.0 { q / fitted_c } else { f64::INFINITY };
    }
    let pass = rows.iter().all(|r| r.margin <= DRIFT_FACTOR);
    Ok(RateCertificate { beta_name: tables.beta().name().into(), delta, fitted_c, rows, pass })
}
