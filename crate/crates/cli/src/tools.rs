//! `diagnose` on stored snapshots and the gallery commands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use vll_core::diagnostics::{kolmogorov_equivalence_report, DiagnosticTable, TableRow, UReference};
use vll_core::dynamics::Trajectory;
use vll_core::gallery::{self, GalleryItem, GALLERY};
use vll_core::snapshot::{load_snapshot, save_snapshot};
use vll_core::make_grid;

use crate::CliError;

/// Diagnostic table of one ν from "VLL1" snapshots at absolute ℓ.
pub fn diagnose(paths: &[PathBuf], ell: f64, delta: f64) -> Result<DiagnosticTable, CliError> {
    if paths.is_empty() {
        return Err(CliError::Input("no snapshots given".into()));
    }
    let mut snaps = Vec::with_capacity(paths.len());
    for p in paths {
        snaps.push(load_snapshot(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?);
    }
    snaps.sort_by(|a, b| a.t.total_cmp(&b.t));
    let nu = snaps[0].nu;
    if let Some(s) = snaps.iter().find(|s| s.nu.to_bits() != nu.to_bits()) {
        return Err(CliError::Input(format!("snapshots mix viscosities {nu} and {}", s.nu)));
    }
    if !(nu > 0.0) {
        return Err(CliError::Input(format!("snapshot viscosity {nu} must be positive")));
    }
    if !(ell > 0.0) {
        return Err(CliError::Input(format!("--ell {ell} must be positive")));
    }
    let times = snaps.iter().map(|s| s.t).collect();
    let fields = snaps.into_iter().map(|s| s.omega).collect();
    let traj = Trajectory::from_snapshots(nu, times, fields)?;
    let rep = kolmogorov_equivalence_report(&traj, UReference::Zero, ell / nu.sqrt(), delta)?;
    let mut table = DiagnosticTable::new();
    table.push(TableRow::from(&rep));
    Ok(table)
}

pub fn gallery_list() -> String {
    let mut s = String::new();
    for (name, params) in GALLERY {
        let p: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(s, "{name:<22} {}", p.join(" "));
    }
    s
}

/// Builds an item and writes ω, u₁, u₂ snapshots plus a JSON sidecar.
pub fn gallery_emit(name: &str, params: &[f64], out: &Path, n: Option<usize>) -> Result<GalleryItem, CliError> {
    gallery::resolve_params(name, params).map_err(|e| CliError::Input(e.to_string()))?;
    let item = match n {
        Some(n) => gallery::build(name, params, Some(&make_grid(n)?))?,
        None => gallery::build(name, params, None)?,
    };
    std::fs::create_dir_all(out)?;
    let nu = item.nu.unwrap_or(0.0);
    let (u1, u2) = item.velocity.components();
    save_snapshot(out.join(format!("{name}_omega.vll")), &item.omega, nu, 0.0)?;
    save_snapshot(out.join(format!("{name}_u1.vll")), &u1, nu, 0.0)?;
    save_snapshot(out.join(format!("{name}_u2.vll")), &u2, nu, 0.0)?;
    let json = serde_json::to_string_pretty(&item.sidecar()).map_err(|e| CliError::Input(e.to_string()))?;
    std::fs::write(out.join(format!("{name}.json")), json + "\n")?;
    Ok(item)
}
