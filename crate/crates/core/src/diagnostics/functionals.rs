//! Per-snapshot concentration functionals and their time integrals.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::ball::BallKernel;
use crate::bessel::one_minus_jinc;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::field::{biot_savart_spectral, resample_spectrum, same_grid, ScalarField, VectorField};
use crate::grid::TorusGrid;
use crate::norms::parseval_weight;

/// Certificate windows with fewer snapshots than this trigger a warning.
pub const MIN_WINDOW_SNAPSHOTS: usize = 50;

/// Stand-in for the weak limit u in Λ_con.
#[derive(Clone, Copy, Debug)]
pub enum UReference<'a> {
    /// u = 0, the ∫|u^ν|² form.
    Zero,
    /// Frozen in time; must share the trajectory's grid.
    Field(&'a VectorField),
    /// Another run, resampled spectrally to the trajectory's grid and
    /// interpolated linearly in time.
    Trajectory(&'a Trajectory),
}

impl UReference<'_> {
    fn velocity(&self, grid: &TorusGrid, t: f64) -> Result<Option<VectorField>> {
        match self {
            UReference::Zero => Ok(None),
            UReference::Field(u) => {
                same_grid(grid, u.grid())?;
                Ok(Some((*u).clone()))
            }
            UReference::Trajectory(tr) => {
                let w = tr.omega_at(t)?;
                let s = resample_spectrum(w.grid(), &w.spectrum(), grid);
                let (s1, s2) = biot_savart_spectral(grid, &s);
                Ok(Some(VectorField::from_spectra(grid, &s1, &s2)))
            }
        }
    }
}

/// Functionals of one snapshot at ball radius ℓ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SnapshotFunctionals {
    pub t: f64,
    /// ‖ω‖², equal to ‖∇u‖².
    pub omega_sq: f64,
    pub omega_l1: f64,
    pub grad_omega_sq: f64,
    pub u_sq: f64,
    /// ⨍_{B_ℓ}‖u(·+y) − u‖² dy.
    pub s2: f64,
    /// max_x ∫_{B_ℓ(x)}|ω|.
    pub omega_con: f64,
    /// (max_x ∫_{B_ℓ(x)}|u − ⨍_{B_ℓ(x)}u|²)^{1/2}.
    pub q_con: f64,
    /// (max_x ∫_{B_ℓ(x)}|u − u_ref|²)^{1/2}.
    pub lambda_con: f64,
    /// (max_x ∫_{B_ℓ(x)}|u|²)^{1/2}.
    pub lambda_zero: f64,
    /// (max_x ∫_{B_ℓ(x)}|u_ref|²)^{1/2}.
    pub ref_mass: f64,
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// All functionals of one vorticity snapshot.
pub fn analyze_snapshot(
    omega: &ScalarField,
    kernel: &BallKernel,
    u_ref: Option<&VectorField>,
) -> Result<SnapshotFunctionals> {
    let grid = omega.grid();
    same_grid(grid, kernel.grid())?;
    if let Some(r) = u_ref {
        same_grid(grid, r.grid())?;
    }
    let ell = kernel.radius();
    let w = grid.cell_area();
    let pw = parseval_weight(grid.n());
    let s = omega.spectrum();
    let (s1, s2) = biot_savart_spectral(grid, &s);
    let mut grad = 0.0;
    let mut usq = 0.0;
    let mut incr = 0.0;
    for idx in 1..s.len() {
        let k2 = grid.k_squared(idx);
        grad += k2 * s[idx].norm_sqr();
        let p = s1[idx].norm_sqr() + s2[idx].norm_sqr();
        usq += p;
        incr += 2.0 * one_minus_jinc(k2.sqrt() * ell) * p;
    }
    let (u1, u2) = grid.inverse_pair(&s1, &s2);
    let vals = omega.values();
    let omega_sq = vals.iter().map(|v| v * v).sum::<f64>() * w;
    let omega_l1 = vals.iter().map(|v| v.abs()).sum::<f64>() * w;

    let absw: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    let mag: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| a * a + b * b).collect();
    let (ball_w, ball_u2) = kernel.apply_pair(&absw, &mag);
    let (m1, m2) = kernel.apply_pair(&u1, &u2);
    let area = kernel.area();
    let mut qmax = f64::NEG_INFINITY;
    for k in 0..grid.len() {
        let q = ball_u2[k] - (m1[k] * m1[k] + m2[k] * m2[k]) / area;
        qmax = qmax.max(q);
    }
    let lambda_zero = max_of(&ball_u2).max(0.0).sqrt();
    let (lambda_con, ref_mass) = match u_ref {
        None => (lambda_zero, 0.0),
        Some(r) => {
            let d: Vec<f64> = (0..grid.len())
                .map(|k| {
                    let a = u1[k] - r.u1()[k];
                    let b = u2[k] - r.u2()[k];
                    a * a + b * b
                })
                .collect();
            let rm: Vec<f64> = r.u1().iter().zip(r.u2()).map(|(a, b)| a * a + b * b).collect();
            let (bd, br) = kernel.apply_pair(&d, &rm);
            (max_of(&bd).max(0.0).sqrt(), max_of(&br).max(0.0).sqrt())
        }
    };
    Ok(SnapshotFunctionals {
        t: 0.0,
        omega_sq,
        omega_l1,
        grad_omega_sq: grad * pw,
        u_sq: usq * pw,
        s2: incr * pw,
        omega_con: max_of(&ball_w).max(0.0),
        q_con: qmax.max(0.0).sqrt(),
        lambda_con,
        lambda_zero,
        ref_mass,
    })
}

/// Trapezoid rule on the given nodes.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
}

/// Trapezoid rule over [a, b] on the nodes inside it plus linearly
/// interpolated end values.
pub fn trapezoid_window(times: &[f64], values: &[f64], a: f64, b: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::EmptyWindow(a, b));
    }
    let (t0, t1) = (times[0], *times.last().unwrap());
    let tol = 1e-12 * t1.abs().max(1.0);
    if a < t0 - tol || b > t1 + tol {
        return Err(Error::OutOfRange(format!("window [{a}, {b}] outside [{t0}, {t1}]")));
    }
    let (a, b) = (a.max(t0), b.min(t1));
    let interp = |t: f64| {
        let k = times.partition_point(|&s| s <= t).saturating_sub(1);
        if k + 1 >= times.len() {
            return values[k];
        }
        let w = (t - times[k]) / (times[k + 1] - times[k]);
        (1.0 - w) * values[k] + w * values[k + 1]
    };
    let mut ts = vec![a];
    let mut vs = vec![interp(a)];
    for (t, v) in times.iter().zip(values) {
        if *t > a && *t < b {
            ts.push(*t);
            vs.push(*v);
        }
    }
    ts.push(b);
    vs.push(interp(b));
    Ok(trapezoid(&ts, &vs))
}

/// Per-snapshot functionals of a whole trajectory at one radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSeries {
    pub nu: f64,
    pub ell: f64,
    /// Discrete disk area count·h².
    pub disk_area: f64,
    pub rows: Vec<SnapshotFunctionals>,
}

fn check_ell(grid: &TorusGrid, ell: f64) -> Result<()> {
    let min = 4.0 * grid.spacing();
    if !(ell >= min) {
        return Err(Error::UnderResolved { what: "ell", scale: ell, min });
    }
    Ok(())
}

impl FunctionalSeries {
    pub fn compute(traj: &Trajectory, ell: f64, u_ref: UReference<'_>) -> Result<Self> {
        let grid = traj.grid();
        check_ell(grid, ell)?;
        let kernel = BallKernel::new(grid, ell)?;
        let mut rows = Vec::with_capacity(traj.len());
        for (t, w) in traj.times().iter().zip(traj.snapshots()) {
            let r = u_ref.velocity(grid, *t)?;
            let mut row = analyze_snapshot(w, &kernel, r.as_ref())?;
            row.t = *t;
            rows.push(row);
        }
        Ok(FunctionalSeries { nu: traj.nu(), ell, disk_area: kernel.area(), rows })
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn end_time(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.t)
    }

    /// ∫₀ᵀ of a per-snapshot quantity.
    pub fn integral(&self, f: impl Fn(&SnapshotFunctionals) -> f64) -> f64 {
        let v: Vec<f64> = self.rows.iter().map(f).collect();
        trapezoid(&self.times(), &v)
    }

    /// ∫ₐᵇ of a per-snapshot quantity.
    pub fn window(&self, f: impl Fn(&SnapshotFunctionals) -> f64, a: f64, b: f64) -> Result<f64> {
        let ts = self.times();
        let inside = ts.iter().filter(|t| **t >= a && **t <= b).count();
        if inside < MIN_WINDOW_SNAPSHOTS {
            warn!("window [{a}, {b}] holds {inside} snapshots; time quadrature may be coarse");
        }
        let v: Vec<f64> = self.rows.iter().map(f).collect();
        trapezoid_window(&ts, &v, a, b)
    }

    pub fn s2(&self) -> f64 {
        self.integral(|r| r.s2)
    }

    pub fn omega_con(&self) -> f64 {
        self.integral(|r| r.omega_con)
    }

    pub fn q_con(&self) -> f64 {
        self.integral(|r| r.q_con)
    }

    pub fn lambda_con(&self) -> f64 {
        self.integral(|r| r.lambda_con)
    }

    /// ∫₀ᵀ(sup_x ∫_{B_ℓ(x)}|u_ref|²)^{1/2}.
    pub fn ref_mass(&self) -> f64 {
        self.integral(|r| r.ref_mass)
    }

    /// ν∫ₐᵇ‖∇u‖².
    pub fn dissipation(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.nu * self.window(|r| r.omega_sq, a, b)?)
    }
}

/// ν∫_δ^T‖ω‖² by the snapshot trapezoid.
pub fn dissipation_total(traj: &Trajectory, delta: f64, t_end: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!("delta {delta} must be non-negative")));
    }
    if t_end > traj.end_time() * (1.0 + 1e-12) {
        return Err(Error::OutOfRange(format!("T = {t_end} beyond trajectory end {}", traj.end_time())));
    }
    let w = traj.grid().cell_area();
    let v: Vec<f64> =
        traj.snapshots().iter().map(|s| s.values().iter().map(|x| x * x).sum::<f64>() * w).collect();
    Ok(traj.nu() * trapezoid_window(traj.times(), &v, delta, t_end)?)
}

/// S²(ℓ) = ∫₀ᵀ⨍_{B_ℓ}‖u(·+y) − u‖² dy dt, with the exact disk average
/// 2J₁(|k|ℓ)/(|k|ℓ) of each Fourier mode.
pub fn structure_function_s2(traj: &Trajectory, ell: f64) -> Result<f64> {
    Ok(FunctionalSeries::compute(traj, ell, UReference::Zero)?.s2())
}

/// Λ_con(ℓ) against `u_ref`.
pub fn lambda_con(traj: &Trajectory, u_ref: UReference<'_>, ell: f64) -> Result<f64> {
    Ok(FunctionalSeries::compute(traj, ell, u_ref)?.lambda_con())
}

/// Ω_con(ℓ).
pub fn omega_con(traj: &Trajectory, ell: f64) -> Result<f64> {
    Ok(FunctionalSeries::compute(traj, ell, UReference::Zero)?.omega_con())
}

/// Q_con(ℓ); the ball mean uses the discrete disk area.
pub fn q_con(traj: &Trajectory, ell: f64) -> Result<f64> {
    Ok(FunctionalSeries::compute(traj, ell, UReference::Zero)?.q_con())
}

/// Ω̂ = |ω|·∫_{B_√ν(x)}|ω|.
pub fn omega_hat_field(omega: &ScalarField, nu: f64) -> Result<ScalarField> {
    let ell = nu.sqrt();
    check_ell(omega.grid(), ell)?;
    let a = omega.abs();
    let b = BallKernel::new(omega.grid(), ell)?.apply(&a)?;
    a.mul(&b)
}

/// Φ(ε) = sup over the family of ‖u_ε − u‖_{L²}, one entry per ε.
pub fn modulus_of_compactness(family: &[VectorField], eps_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    if let Some(first) = family.first() {
        for u in family {
            same_grid(first.grid(), u.grid())?;
        }
    }
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let mut phi: f64 = 0.0;
        if let Some(first) = family.first() {
            let m = crate::mollify::Mollifier::new(first.grid(), eps)?;
            for u in family {
                let d = m.apply_vector(u)?.sub(u)?;
                phi = phi.max(crate::norms::norms(&d).l2);
            }
        }
        out.push((eps, phi));
    }
    Ok(out)
}
