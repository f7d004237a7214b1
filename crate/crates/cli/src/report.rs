//! Pass/fail matrix of a stored diagnostic table.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use vll_core::diagnostics::{read_certificate_cells, CertificateCell};

use crate::experiment::Report;
use crate::CliError;

pub struct Rendered {
    pub text: String,
    pub constant_free_failures: usize,
    pub fitted_failures: usize,
}

impl Rendered {
    /// Nonzero iff a constant-free certificate failed.
    pub fn exit_code(&self) -> i32 {
        if self.constant_free_failures > 0 {
            crate::EXIT_FAIL
        } else {
            0
        }
    }
}

fn table_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join("table.csv")
    } else {
        path.to_path_buf()
    }
}

/// Reads `path` (an output directory or a table CSV) and renders it.
pub fn render(path: &Path) -> Result<Rendered, CliError> {
    let csv = table_path(path);
    let file = File::open(&csv).map_err(|e| CliError::Input(format!("cannot open {}: {e}", csv.display())))?;
    let cells = read_certificate_cells(BufReader::new(file))
        .map_err(|e| CliError::Input(format!("{}: {e}", csv.display())))?;
    let mut text = render_cells(&cells);
    let json = csv.with_file_name("report.json");
    if json.is_file() {
        let raw = std::fs::read_to_string(&json)?;
        let rep: Report =
            serde_json::from_str(&raw).map_err(|e| CliError::Input(format!("{}: {e}", json.display())))?;
        text.push_str(&render_sweep(&rep));
    }
    let cf = cells.iter().filter(|c| c.constant_free() && !c.pass).count();
    let fitted = cells.iter().filter(|c| !c.constant_free() && !c.pass).count();
    Ok(Rendered { text, constant_free_failures: cf, fitted_failures: fitted })
}

pub fn render_cells(cells: &[CertificateCell]) -> String {
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    let mut names: Vec<&str> = Vec::new();
    for c in cells {
        if !rows.iter().any(|r| *r == (c.nu, c.ell, c.delta)) {
            rows.push((c.nu, c.ell, c.delta));
        }
        if !names.contains(&c.name.as_str()) {
            names.push(&c.name);
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "{:>4}  {:>11}  {:>11}  {:>8}", "row", "nu", "ell", "delta");
    for (i, (nu, ell, d)) in rows.iter().enumerate() {
        let _ = writeln!(s, "{i:>4}  {nu:>11.4e}  {ell:>11.4e}  {d:>8}");
    }
    let width = names.iter().map(|n| n.len()).max().unwrap_or(0).max(11);
    let _ = write!(s, "\n{:<width$}  {:<6}", "certificate", "kind");
    for i in 0..rows.len() {
        let _ = write!(s, " {i:>5}");
    }
    s.push('\n');
    for name in &names {
        let cf = vll_core::diagnostics::CONSTANT_FREE_CERTIFICATES.contains(name);
        let _ = write!(s, "{name:<width$}  {:<6}", if cf { "hard" } else { "fitted" });
        for r in &rows {
            let mark = match cells.iter().find(|c| c.name == *name && (c.nu, c.ell, c.delta) == *r) {
                Some(c) if c.pass => "ok",
                Some(_) => "FAIL",
                None => "-",
            };
            let _ = write!(s, " {mark:>5}");
        }
        s.push('\n');
    }
    let count = |hard: bool| {
        let sel: Vec<_> = cells.iter().filter(|c| c.constant_free() == hard).collect();
        (sel.len(), sel.iter().filter(|c| !c.pass).count())
    };
    let (ch, fh) = count(true);
    let (cs, fs) = count(false);
    let _ = writeln!(s, "\nconstant-free: {ch} evaluated, {fh} failed");
    let _ = writeln!(s, "fitted (2x drift): {cs} evaluated, {fs} failed");
    s
}

fn render_sweep(rep: &Report) -> String {
    let mut s = format!("\nconfig {}\n", rep.config_hash);
    for r in &rep.runs {
        let _ = writeln!(s, "nu = {:.4e}: n = {}, balance residual {:.3e}", r.nu, r.n, r.balance_residual);
    }
    if let Some(n) = &rep.trends.notice {
        let _ = writeln!(s, "{n}");
    }
    for t in &rep.trends.monotone {
        let _ = writeln!(
            s,
            "trend {} (scale {}, delta {}): {}",
            t.quantity,
            t.multiplier,
            t.delta,
            if t.strictly_decreasing { "strictly decreasing" } else { "NOT decreasing" }
        );
    }
    for k in &rep.trends.kendall {
        let _ = writeln!(s, "kendall tau(S2, diss) (scale {}, delta {}): {:.3}", k.multiplier, k.delta, k.tau);
    }
    for r in &rep.rate {
        let worst = r.rows.iter().map(|x| x.margin).fold(0.0, f64::max);
        let _ = writeln!(
            s,
            "rate certificate ({}, delta {}): C = {:.4e}, worst margin {:.3}: {}",
            r.beta_name,
            r.delta,
            r.fitted_c,
            worst,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(nu: f64, name: &str, pass: bool) -> CertificateCell {
        CertificateCell { nu, ell: 0.1, delta: 0.1, name: name.into(), pass, margin: 0.5 }
    }

    #[test]
    fn matrix_marks_cells() {
        let cells = vec![cell(0.01, "s2_le_diss", true), cell(0.01, "diss_by_s2", false), cell(0.001, "s2_le_diss", false)];
        let s = render_cells(&cells);
        assert!(s.contains("constant-free: 2 evaluated, 1 failed"));
        assert!(s.contains("fitted (2x drift): 1 evaluated, 1 failed"));
        let line = s.lines().find(|l| l.starts_with("diss_by_s2")).unwrap();
        assert!(line.contains("FAIL") && line.trim_end().ends_with('-'));
    }
}
