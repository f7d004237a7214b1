//! Per-(ν, ℓ, δ) table of functionals and certificates.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::certificates::{Certificate, KolmogorovReport};
use crate::error::{Error, Result};

/// Certificates whose failure is a hard error.
pub const CONSTANT_FREE_CERTIFICATES: [&str; 6] = [
    "s2_le_diss",
    "omega_con_cauchy_schwarz",
    "q_le_lambda_zero",
    "l1_monotone",
    "enstrophy_decay",
    "higher_order",
];

const FIXED_COLUMNS: [&str; 8] = ["nu", "ell", "delta", "diss_total", "s2", "lambda_con", "omega_con", "q_con"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub nu: f64,
    pub ell: f64,
    pub delta: f64,
    pub dissipation_total: f64,
    pub s2: f64,
    pub lambda_con: f64,
    pub omega_con: f64,
    pub q_con: f64,
    pub certificates: Vec<Certificate>,
}

impl From<&KolmogorovReport> for TableRow {
    fn from(r: &KolmogorovReport) -> Self {
        TableRow {
            nu: r.nu,
            ell: r.ell,
            delta: r.delta,
            dissipation_total: r.diss_total,
            s2: r.s2,
            lambda_con: r.lambda_con,
            omega_con: r.omega_con,
            q_con: r.q_con,
            certificates: r.certificates.clone(),
        }
    }
}

impl TableRow {
    fn scalars(&self) -> [f64; 8] {
        [self.nu, self.ell, self.delta, self.dissipation_total, self.s2, self.lambda_con, self.omega_con, self.q_con]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticTable {
    pub rows: Vec<TableRow>,
}

/// One certificate cell read back from CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateCell {
    pub nu: f64,
    pub ell: f64,
    pub delta: f64,
    pub name: String,
    pub pass: bool,
    pub margin: f64,
}

impl CertificateCell {
    pub fn constant_free(&self) -> bool {
        CONSTANT_FREE_CERTIFICATES.contains(&self.name.as_str())
    }
}

impl DiagnosticTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: TableRow) {
        self.rows.push(row);
    }

    /// All scalar entries finite and non-negative.
    pub fn validate(&self) -> Result<()> {
        for r in &self.rows {
            if r.scalars().iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Format(format!("row at nu={} ell={} has an invalid entry", r.nu, r.ell)));
            }
        }
        Ok(())
    }

    /// Certificate names in first-seen order.
    pub fn certificate_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.rows {
            for c in &r.certificates {
                if !names.contains(&c.name) {
                    names.push(c.name.clone());
                }
            }
        }
        names
    }

    /// CSV: the fixed columns, then one column per certificate holding
    /// "pass:margin" (empty when the certificate does not apply).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let names = self.certificate_names();
        let mut out = csv::Writer::from_writer(w);
        let header: Vec<&str> = FIXED_COLUMNS.iter().copied().chain(names.iter().map(String::as_str)).collect();
        out.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.scalars().iter().map(|v| v.to_string()).collect();
            for n in &names {
                rec.push(match r.certificates.iter().find(|c| &c.name == n) {
                    Some(c) => format!("{}:{}", c.pass, c.margin),
                    None => String::new(),
                });
            }
            out.write_record(&rec).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Format(format!("bad {what} value {s:?}")))
}

/// Reads the certificate cells back from a table CSV.
pub fn read_certificate_cells<R: BufRead>(r: R) -> Result<Vec<CertificateCell>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.len() < FIXED_COLUMNS.len() || header.iter().zip(FIXED_COLUMNS).any(|(a, b)| a != b) {
        return Err(Error::Format("unexpected diagnostic table header".into()));
    }
    let mut cells = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != header.len() {
            return Err(Error::Format("ragged diagnostic table row".into()));
        }
        let nu = parse_f64(&rec[0], "nu")?;
        let ell = parse_f64(&rec[1], "ell")?;
        let delta = parse_f64(&rec[2], "delta")?;
        for k in 3..FIXED_COLUMNS.len() {
            parse_f64(&rec[k], FIXED_COLUMNS[k])?;
        }
        for k in FIXED_COLUMNS.len()..header.len() {
            let cell = rec[k].trim();
            if cell.is_empty() {
                continue;
            }
            let (p, m) = cell.split_once(':').ok_or_else(|| Error::Format(format!("bad certificate cell {cell:?}")))?;
            let pass = match p {
                "true" => true,
                "false" => false,
                _ => return Err(Error::Format(format!("bad pass flag {p:?}"))),
            };
            cells.push(CertificateCell {
                nu,
                ell,
                delta,
                name: header[k].to_string(),
                pass,
                margin: parse_f64(m, "margin")?,
            });
        }
    }
    Ok(cells)
}
