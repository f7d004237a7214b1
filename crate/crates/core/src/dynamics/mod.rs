//! Vorticity dynamics: time stepping, bookkeeping and steady residuals.

mod checks;
mod steady;
mod stepper;

pub use checks::{
    check_decomposition, energy_balance_residual, monotonicity_checks, DecompositionReport, MonotonicityReport,
    L1_TOL, ENSTROPHY_TOL,
};
pub use steady::{steady_residual, PressureMode};
pub use stepper::{evolve, evolve_decomposition, evolve_with, DecompositionPair, EvolveOptions};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{biot_savart_spectral, curl, ScalarField, VectorField};
use crate::grid::TorusGrid;

/// Body force in the momentum equation.
#[derive(Clone, Debug, Default)]
pub enum ForceSpec {
    #[default]
    None,
    /// Closed-form steady forces: `shear` with params `[m]` gives
    /// f = (sin m x₂, 0); `oscillating_stream` with params `[m, ν]` gives
    /// f = 2νm²(sin m x₁ sin m x₂, cos m x₁ cos m x₂).
    SteadyAnalytic { name: String, params: Vec<f64> },
    Custom(VectorField),
}

impl ForceSpec {
    pub fn is_none(&self) -> bool {
        matches!(self, ForceSpec::None)
    }

    /// Samples the force on `grid`.
    pub fn field(&self, grid: &TorusGrid) -> Result<Option<VectorField>> {
        match self {
            ForceSpec::None => Ok(None),
            ForceSpec::Custom(f) => {
                let f = f.resample(grid);
                let (a, b) = f.components();
                let scale = f.max_abs_component();
                if a.mean().abs() > 1e-12 * scale || b.mean().abs() > 1e-12 * scale {
                    return Err(Error::InvalidArgument("custom force must be mean-zero".into()));
                }
                Ok(Some(f))
            }
            ForceSpec::SteadyAnalytic { name, params } => match (name.as_str(), params.as_slice()) {
                ("shear", [m]) => {
                    let m = *m;
                    Ok(Some(VectorField::from_fn(grid, |_, x2| ((m * x2).sin(), 0.0))))
                }
                ("oscillating_stream", [m, nu]) => {
                    let (m, c) = (*m, 2.0 * nu * m * m);
                    Ok(Some(VectorField::from_fn(grid, |x1, x2| {
                        (c * (m * x1).sin() * (m * x2).sin(), c * (m * x1).cos() * (m * x2).cos())
                    })))
                }
                _ => Err(Error::InvalidArgument(format!("unknown analytic force {name} with {} params", params.len()))),
            },
        }
    }

    /// Scalar curl of the force.
    pub fn curl_field(&self, grid: &TorusGrid) -> Result<Option<ScalarField>> {
        Ok(self.field(grid)?.map(|f| curl(&f)))
    }
}

/// One row of the energy bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub t: f64,
    /// ½‖u‖².
    pub energy: f64,
    /// ν∫₀ᵗ‖∇u‖².
    pub cumulative_dissipation: f64,
    /// ‖ω‖² (no ½).
    pub enstrophy: f64,
    pub l1_vorticity: f64,
    /// ∫₀ᵗ⟨f, u⟩, zero when unforced.
    pub cumulative_work: f64,
}

impl LedgerEntry {
    /// E(t) + D(t) − W(t) − E(0).
    pub fn residual(&self, e0: f64) -> f64 {
        self.energy + self.cumulative_dissipation - self.cumulative_work - e0
    }
}

/// Energy balance time series, one entry per accepted step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BalanceLedger {
    entries: Vec<LedgerEntry>,
}

impl BalanceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push(&mut self, e: LedgerEntry) {
        self.entries.push(e);
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn initial_energy(&self) -> f64 {
        self.entries.first().map_or(0.0, |e| e.energy)
    }

    pub fn times(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.t).collect()
    }

    /// CSV with columns t, energy, cumulative_dissipation, enstrophy,
    /// l1_vorticity, balance_residual.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,energy,cumulative_dissipation,enstrophy,l1_vorticity,balance_residual")?;
        let e0 = self.initial_energy();
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                e.t,
                e.energy,
                e.cumulative_dissipation,
                e.enstrophy,
                e.l1_vorticity,
                e.residual(e0)
            )?;
        }
        Ok(())
    }
}

/// Vorticity snapshots of one run at fixed ν.
#[derive(Clone, Debug)]
pub struct Trajectory {
    nu: f64,
    dt: f64,
    snap_every: usize,
    force: ForceSpec,
    times: Vec<f64>,
    snapshots: Vec<ScalarField>,
    ledger: BalanceLedger,
}

impl Trajectory {
    /// Assembles a trajectory from stored snapshots; the ledger is empty.
    pub fn from_snapshots(nu: f64, times: Vec<f64>, snapshots: Vec<ScalarField>) -> Result<Self> {
        if times.is_empty() || times.len() != snapshots.len() {
            return Err(Error::InvalidArgument("need equal, non-zero numbers of times and snapshots".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        let grid = snapshots[0].grid().clone();
        for s in &snapshots {
            crate::field::same_grid(&grid, s.grid())?;
            s.ensure_mean_zero()?;
        }
        Ok(Trajectory {
            nu,
            dt: f64::NAN,
            snap_every: 0,
            force: ForceSpec::None,
            times,
            snapshots,
            ledger: BalanceLedger::new(),
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn snap_every(&self) -> usize {
        self.snap_every
    }

    pub fn force(&self) -> &ForceSpec {
        &self.force
    }

    pub fn grid(&self) -> &TorusGrid {
        self.snapshots[0].grid()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[ScalarField] {
        &self.snapshots
    }

    pub fn ledger(&self) -> &BalanceLedger {
        &self.ledger
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Velocity of snapshot `k`.
    pub fn velocity(&self, k: usize) -> VectorField {
        velocity_of(&self.snapshots[k])
    }

    /// Vorticity at time t, linear in time between snapshots.
    pub fn omega_at(&self, t: f64) -> Result<ScalarField> {
        let (k, w) = self.bracket(t)?;
        if w == 0.0 {
            return Ok(self.snapshots[k].clone());
        }
        self.snapshots[k].zip_with(&self.snapshots[k + 1], |a, b| (1.0 - w) * a + w * b)
    }

    pub fn velocity_at(&self, t: f64) -> Result<VectorField> {
        Ok(velocity_of(&self.omega_at(t)?))
    }

    /// Index k and weight w with t = (1−w)·t_k + w·t_{k+1}.
    pub(crate) fn bracket(&self, t: f64) -> Result<(usize, f64)> {
        let ts = &self.times;
        let (t0, t1) = (ts[0], *ts.last().unwrap());
        let tol = 1e-12 * t1.abs().max(1.0);
        if t < t0 - tol || t > t1 + tol {
            return Err(Error::OutOfRange(format!("time {t} outside [{t0}, {t1}]")));
        }
        let t = t.clamp(t0, t1);
        let k = ts.partition_point(|&s| s <= t).saturating_sub(1);
        if k + 1 >= ts.len() {
            return Ok((k, 0.0));
        }
        let w = (t - ts[k]) / (ts[k + 1] - ts[k]);
        Ok((k, w))
    }

    /// Writes every snapshot with the "VLL1" format into `dir`.
    pub fn save_snapshots(&self, dir: &std::path::Path, stem: &str) -> Result<Vec<std::path::PathBuf>> {
        let mut paths = Vec::with_capacity(self.len());
        for (k, (t, w)) in self.times.iter().zip(&self.snapshots).enumerate() {
            let p = dir.join(format!("{stem}_{k:05}.vll"));
            crate::snapshot::save_snapshot(&p, w, self.nu, *t)?;
            paths.push(p);
        }
        Ok(paths)
    }
}

/// Biot–Savart velocity without the mean-zero guard (snapshots carry an
/// exactly zero k = 0 mode).
pub(crate) fn velocity_of(omega: &ScalarField) -> VectorField {
    let (s1, s2) = biot_savart_spectral(omega.grid(), &omega.spectrum());
    VectorField::from_spectra(omega.grid(), &s1, &s2)
}
