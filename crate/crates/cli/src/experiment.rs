//! `run` and `sweep`: evolve every ν, tabulate, calibrate, compare.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vll_core::diagnostics::{
    calibrate_sweep, kolmogorov_equivalence_report, rate_certificate_from_samples, DiagnosticTable, KolmogorovReport,
    RateCertificate, RateSample, TableRow, UReference, CONSTANT_FREE_CERTIFICATES,
};
use vll_core::dynamics::{energy_balance_residual, evolve, ForceSpec, Trajectory};
use vll_core::equi::{build_inverses, BetaFunction};
use vll_core::init::{self, RandomSpectrum};
use vll_core::snapshot::save_snapshot;
use vll_core::{gallery, make_grid, ScalarField, TorusGrid};

use crate::config::{ForceConfig, InitialConfig, RunConfig, Scale, SnapshotPolicy};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Run,
    Sweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub index: usize,
    pub nu: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub snapshots: usize,
    /// max_t |E + D − W − E₀|/E₀ from the ledger.
    pub balance_residual: f64,
    pub ledger: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub name: String,
    pub constant_free: bool,
    pub evaluated: usize,
    pub failed: usize,
    pub worst_margin: f64,
}

/// Fitted constants of one (multiplier, δ) column of the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub multiplier: f64,
    pub delta: f64,
    pub reference_nu: f64,
    pub constants: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendTest {
    pub multiplier: f64,
    pub delta: f64,
    pub quantity: String,
    /// (ν, value) with ν decreasing.
    pub values: Vec<(f64, f64)>,
    pub strictly_decreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KendallRecord {
    pub multiplier: f64,
    pub delta: f64,
    /// τ between S2 and the dissipation across ν.
    pub tau: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trends {
    pub notice: Option<String>,
    pub monotone: Vec<TrendTest>,
    pub kendall: Vec<KendallRecord>,
}

impl Trends {
    pub fn all_decreasing(&self) -> bool {
        self.notice.is_none() && self.monotone.iter().all(|t| t.strictly_decreasing)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config_hash: String,
    pub mode: Mode,
    pub environment: Environment,
    pub runs: Vec<RunSummary>,
    pub table: DiagnosticTable,
    pub certificates: Vec<CertificateSummary>,
    pub calibration: Vec<Calibration>,
    pub trends: Trends,
    pub rate: Vec<RateCertificate>,
}

impl Report {
    pub fn constant_free_failures(&self) -> usize {
        self.certificates.iter().filter(|c| c.constant_free).map(|c| c.failed).sum()
    }

    pub fn fitted_failures(&self) -> usize {
        self.certificates.iter().filter(|c| !c.constant_free).map(|c| c.failed).sum()
    }

    pub fn rate_pass(&self) -> bool {
        self.rate.iter().all(|r| r.pass)
    }

    /// Exit status: failure on any constant-free or rate certificate.
    pub fn exit_code(&self) -> i32 {
        if self.constant_free_failures() > 0 || !self.rate_pass() {
            crate::EXIT_FAIL
        } else {
            0
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<(), CliError> {
        let s = serde_json::to_string_pretty(self).map_err(|e| CliError::Input(e.to_string()))?;
        std::fs::write(path, s + "\n")?;
        Ok(())
    }
}

/// Everything kept from one ν once its trajectory is dropped.
struct NuResult {
    summary: RunSummary,
    reports: Vec<KolmogorovReport>,
    rate: Vec<RateSample>,
}

/// ω₀ and force for `nu` on `grid`.
pub fn initial_data(cfg: &RunConfig, nu: f64, grid: &TorusGrid) -> Result<(ScalarField, ForceSpec), CliError> {
    let scale = |s: &Scale| match s {
        Scale::Value(a) => *a,
        Scale::Auto(_) => init::measure_scale(grid, nu),
    };
    let mut item_force = None;
    let omega = match &cfg.initial {
        InitialConfig::TaylorGreen => init::taylor_green(grid),
        InitialConfig::Shear { k } => init::shear(grid, *k)?,
        InitialConfig::RandomSmooth { seed, spectrum_slope, kmax, l2 } => init::random_smooth(
            grid,
            &RandomSpectrum { seed: *seed, slope: *spectrum_slope, kmax: *kmax, l2: *l2 },
        )?,
        InitialConfig::MollifiedVortex { sign, scale: s, circulation } => {
            init::mollified_vortex(grid, (PI, PI), *sign, *circulation, scale(s))?
        }
        InitialConfig::VortexSheetApprox { scale: s, strength } => init::vortex_sheet_approx(grid, *strength, scale(s))?,
        InitialConfig::Gallery { name, params } => {
            let item = gallery::build(name, params, Some(grid))?;
            item_force = item.force;
            item.omega
        }
    };
    let force = match &cfg.force {
        ForceConfig::None => ForceSpec::None,
        ForceConfig::Shear { m } => ForceSpec::SteadyAnalytic { name: "shear".into(), params: vec![*m as f64] },
        ForceConfig::OscillatingStream { m } => {
            ForceSpec::SteadyAnalytic { name: "oscillating_stream".into(), params: vec![*m as f64, nu] }
        }
        ForceConfig::Gallery => ForceSpec::Custom(
            item_force.ok_or_else(|| CliError::Config(vec!["gallery item carries no force".into()]))?,
        ),
    };
    Ok((omega, force))
}

fn ledger_residual(traj: &Trajectory) -> Result<f64, CliError> {
    if traj.force().is_none() {
        return Ok(energy_balance_residual(traj)?);
    }
    let l = traj.ledger();
    let e0 = l.initial_energy();
    let worst = l.entries().iter().map(|e| e.residual(e0).abs()).fold(0.0, f64::max);
    Ok(if e0 > 0.0 { worst / e0 } else { worst })
}

fn run_nu(cfg: &RunConfig, index: usize, nu: f64, out: Option<&Path>) -> Result<NuResult, CliError> {
    let n = cfg.grid_size(nu);
    let grid = make_grid(n)?;
    let (omega0, force) = initial_data(cfg, nu, &grid)?;
    info!("nu = {nu}: evolving on n = {n} to T = {}", cfg.time.t_end);
    let traj = evolve(&omega0, nu, &force, cfg.time.t_end, cfg.time.dt, cfg.time.snap_every)?;
    drop(omega0);
    let balance_residual = ledger_residual(&traj)?;

    let mut reports = Vec::new();
    for &m in &cfg.diagnostics.scales {
        for &delta in &cfg.diagnostics.deltas {
            info!("nu = {nu}: diagnostics at ell = {m}*sqrt(nu), delta = {delta}");
            reports.push(kolmogorov_equivalence_report(&traj, UReference::Zero, m, delta)?);
        }
    }
    let rate = cfg
        .diagnostics
        .deltas
        .iter()
        .map(|&d| RateSample::from_trajectory(&traj, d))
        .collect::<vll_core::Result<Vec<_>>>()?;

    let ledger = format!("ledger_nu{index}.csv");
    if let Some(dir) = out {
        let mut w = BufWriter::new(File::create(dir.join(&ledger))?);
        traj.ledger().write_csv(&mut w)?;
        w.flush()?;
        match cfg.output.snapshots {
            SnapshotPolicy::None => {}
            SnapshotPolicy::Final => {
                let k = traj.len() - 1;
                save_snapshot(dir.join(format!("omega_nu{index}_final.vll")), &traj.snapshots()[k], nu, traj.times()[k])?;
            }
            SnapshotPolicy::All => {
                traj.save_snapshots(dir, &format!("omega_nu{index}"))?;
            }
        }
    }
    let summary = RunSummary {
        index,
        nu,
        n,
        dt: cfg.time.dt,
        t_end: traj.end_time(),
        snapshots: traj.len(),
        balance_residual,
        ledger,
    };
    info!("nu = {nu}: done, balance residual {balance_residual:.3e}");
    Ok(NuResult { summary, reports, rate })
}

/// Strictly decreasing along the given order.
fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Kendall τ-a of paired samples.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return f64::NAN;
    }
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let x = (a[j] - a[i]).signum() * (b[j] - b[i]).signum();
            if x > 0.0 {
                s += 1;
            } else if x < 0.0 {
                s -= 1;
            }
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits()
}

fn trends(reports: &[KolmogorovReport], scales: &[f64], deltas: &[f64]) -> Trends {
    let nus: Vec<f64> = {
        let mut v: Vec<f64> = reports.iter().map(|r| r.nu).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v.dedup_by(|a, b| same(*a, *b));
        v
    };
    if nus.len() < 2 {
        return Trends {
            notice: Some("trend tests skipped: the sweep has a single viscosity".into()),
            ..Trends::default()
        };
    }
    let mut out = Trends::default();
    for &m in scales {
        for &d in deltas {
            let mut col: Vec<&KolmogorovReport> =
                reports.iter().filter(|r| same(r.multiplier, m) && same(r.delta, d)).collect();
            col.sort_by(|a, b| b.nu.total_cmp(&a.nu));
            let quantities: [(&str, fn(&KolmogorovReport) -> f64); 4] = [
                ("s2", |r| r.s2),
                ("omega_con", |r| r.omega_con),
                ("q_con", |r| r.q_con),
                ("diss_total", |r| r.diss_total),
            ];
            for (name, f) in quantities {
                let values: Vec<(f64, f64)> = col.iter().map(|r| (r.nu, f(r))).collect();
                let v: Vec<f64> = values.iter().map(|p| p.1).collect();
                out.monotone.push(TrendTest {
                    multiplier: m,
                    delta: d,
                    quantity: name.into(),
                    strictly_decreasing: strictly_decreasing(&v),
                    values,
                });
            }
            let s2: Vec<f64> = col.iter().map(|r| r.s2).collect();
            let diss: Vec<f64> = col.iter().map(|r| r.diss_total).collect();
            out.kendall.push(KendallRecord { multiplier: m, delta: d, tau: kendall_tau(&s2, &diss) });
        }
    }
    out
}

fn summarize(table: &DiagnosticTable) -> Vec<CertificateSummary> {
    table
        .certificate_names()
        .into_iter()
        .map(|name| {
            let cells: Vec<_> = table.rows.iter().flat_map(|r| r.certificates.iter()).filter(|c| c.name == name).collect();
            CertificateSummary {
                constant_free: CONSTANT_FREE_CERTIFICATES.contains(&name.as_str()),
                evaluated: cells.len(),
                failed: cells.iter().filter(|c| !c.pass).count(),
                worst_margin: cells.iter().map(|c| c.margin).fold(0.0, f64::max),
                name,
            }
        })
        .collect()
}

/// Validates, evolves every ν on a pool of VLL_THREADS workers and
/// assembles the report. Per-ν artifacts go to `out` when given.
pub fn execute(cfg: &RunConfig, mode: Mode, out: Option<&Path>) -> Result<Report, CliError> {
    cfg.validate()?;
    let threads = crate::thread_count()?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    let nus = &cfg.physics.nu_list;
    let results: Vec<NuResult> = pool.install(|| {
        nus.par_iter().enumerate().map(|(i, &nu)| run_nu(cfg, i, nu, out)).collect::<Result<Vec<_>, _>>()
    })?;

    let mut reports: Vec<KolmogorovReport> = results.iter().flat_map(|r| r.reports.iter().cloned()).collect();
    let mut calibration = Vec::new();
    for &m in &cfg.diagnostics.scales {
        for &d in &cfg.diagnostics.deltas {
            let mut sets: Vec<(f64, &mut Vec<_>)> = reports
                .iter_mut()
                .filter(|r| same(r.multiplier, m) && same(r.delta, d))
                .map(|r| (r.nu, &mut r.certificates))
                .collect();
            let reference_nu = sets.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
            let constants = calibrate_sweep(&mut sets);
            calibration.push(Calibration { multiplier: m, delta: d, reference_nu, constants });
        }
    }
    let mut table = DiagnosticTable::new();
    for r in &reports {
        table.push(TableRow::from(r));
    }
    table.validate()?;

    let (trend, rate) = match mode {
        Mode::Run => (Trends::default(), Vec::new()),
        Mode::Sweep => {
            let t = trends(&reports, &cfg.diagnostics.scales, &cfg.diagnostics.deltas);
            if let Some(n) = &t.notice {
                info!("{n}");
            }
            let mut rate = Vec::new();
            if let Some(b) = &cfg.beta {
                let tables = build_inverses(&BetaFunction::from_name(&b.name, &b.params)?)?;
                for (k, &d) in cfg.diagnostics.deltas.iter().enumerate() {
                    let samples: Vec<RateSample> = results.iter().map(|r| r.rate[k]).collect();
                    rate.push(rate_certificate_from_samples(&samples, &tables, d)?);
                }
            }
            (t, rate)
        }
    };

    let report = Report {
        config_hash: cfg.hash(),
        mode,
        environment: Environment {
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            threads,
        },
        runs: results.into_iter().map(|r| r.summary).collect(),
        certificates: summarize(&table),
        table,
        calibration,
        trends: trend,
        rate,
    };
    if let Some(dir) = out {
        let mut w = BufWriter::new(File::create(dir.join("table.csv"))?);
        report.table.write_csv(&mut w)?;
        w.flush()?;
        report.write_json(&dir.join("report.json"))?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kendall_extremes() {
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]), 1.0);
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[6.0, 5.0, 4.0]), -1.0);
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]), 4.0 / 6.0);
        assert!(kendall_tau(&[1.0], &[1.0]).is_nan());
    }

    #[test]
    fn strict_decrease() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0, 1.0]));
        assert!(strictly_decreasing(&[1.0]));
    }
}
