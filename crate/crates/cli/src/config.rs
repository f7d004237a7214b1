//! Experiment configuration: TOML schema, defaults and validation.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vll_core::equi::BetaFunction;
use vll_core::gallery;
use vll_core::{fft_friendly_at_least, min_resolved_n};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub time: TimeConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub force: ForceConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub beta: Option<BetaConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// An integer, or "auto" for the smallest grid the policy allows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSize {
    Fixed(usize),
    Auto(AutoTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: GridSize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub nu_list: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "one")]
    pub snap_every: usize,
}

/// A length, or "auto" for the measure scale max(4h, √ν/4).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scale {
    Value(f64),
    Auto(AutoTag),
}

impl Default for Scale {
    fn default() -> Self {
        Scale::Auto(AutoTag::Auto)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    TaylorGreen,
    Shear {
        k: u32,
    },
    RandomSmooth {
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_slope")]
        spectrum_slope: f64,
        #[serde(default = "default_kmax")]
        kmax: u32,
        #[serde(default = "one_f")]
        l2: f64,
    },
    MollifiedVortex {
        #[serde(default = "one_f")]
        sign: f64,
        #[serde(default)]
        scale: Scale,
        #[serde(default = "one_f")]
        circulation: f64,
    },
    VortexSheetApprox {
        #[serde(default)]
        scale: Scale,
        #[serde(default = "one_f")]
        strength: f64,
    },
    Gallery {
        name: String,
        #[serde(default)]
        params: Vec<f64>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceConfig {
    #[default]
    None,
    /// f = (sin m x₂, 0).
    Shear { m: u32 },
    /// The steady cellular force at the run's ν.
    OscillatingStream { m: u32 },
    /// The force carried by a gallery initial condition.
    Gallery,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotPolicy {
    None,
    #[default]
    Final,
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// ℓ = scale·√ν.
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig { scales: default_scales(), deltas: default_deltas() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaConfig {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub snapshots: SnapshotPolicy,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir(), snapshots: SnapshotPolicy::default() }
    }
}

fn one() -> usize {
    1
}
fn one_f() -> f64 {
    1.0
}
fn default_slope() -> f64 {
    -4.0
}
fn default_kmax() -> u32 {
    16
}
fn default_scales() -> Vec<f64> {
    vec![1.0]
}
fn default_deltas() -> Vec<f64> {
    vec![0.1]
}
fn default_dir() -> PathBuf {
    PathBuf::from("vll_out")
}

/// Spacing ≤ √ν/8.
pub fn resolves(n: usize, nu: f64) -> bool {
    2.0 * PI / n as f64 <= nu.sqrt() / 8.0 * (1.0 + 1e-12)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(vec![e.to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if cfg.output.dir.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.output.dir = parent.join(&cfg.output.dir);
            }
        }
        Ok(cfg)
    }

    /// Grid used for `nu`.
    pub fn grid_size(&self, nu: f64) -> usize {
        match self.grid.n {
            GridSize::Fixed(n) => n,
            GridSize::Auto(_) => {
                let n = min_resolved_n(nu);
                match &self.initial {
                    InitialConfig::Gallery { name, params } => {
                        gallery::default_grid_size(name, params).map(|g| fft_friendly_at_least(g.max(n))).unwrap_or(n)
                    }
                    _ => n,
                }
            }
        }
    }

    /// sha256 of the canonical JSON form, output location excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig { dir: PathBuf::new(), snapshots: self.output.snapshots };
        let json = serde_json::to_string(&c).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Every violated constraint, checked before any time stepping.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut errs = Vec::new();
        let nus = &self.physics.nu_list;
        if nus.is_empty() {
            errs.push("physics.nu_list is empty".to_string());
        }
        let mut seen: Vec<f64> = Vec::new();
        for &nu in nus {
            if !(nu.is_finite() && nu > 0.0) {
                errs.push(format!("physics.nu_list: nu = {nu} must be positive and finite"));
                continue;
            }
            if seen.contains(&nu) {
                errs.push(format!("physics.nu_list: nu = {nu} appears twice"));
            }
            seen.push(nu);
        }
        if let GridSize::Fixed(n) = self.grid.n {
            if n < 4 || n % 2 == 1 {
                errs.push(format!("grid.n = {n} must be an even integer >= 4"));
            }
        }

        let t = &self.time;
        if !(t.t_end.is_finite() && t.t_end > 0.0) {
            errs.push(format!("time.T = {} must be positive", t.t_end));
        }
        if !(t.dt.is_finite() && t.dt > 0.0) {
            errs.push(format!("time.dt = {} must be positive", t.dt));
        } else if t.dt > t.t_end {
            errs.push(format!("time.dt = {} exceeds time.T = {}", t.dt, t.t_end));
        }
        if t.snap_every == 0 {
            errs.push("time.snap_every must be at least 1".into());
        }

        let d = &self.diagnostics;
        if d.scales.is_empty() {
            errs.push("diagnostics.scales is empty".into());
        }
        if d.deltas.is_empty() {
            errs.push("diagnostics.deltas is empty".into());
        }
        for &dl in &d.deltas {
            if !(dl > 0.0 && dl < t.t_end) {
                errs.push(format!("diagnostics.deltas: delta = {dl} must lie in (0, T = {})", t.t_end));
            }
        }
        for &s in &d.scales {
            if !(s.is_finite() && s > 0.0) {
                errs.push(format!("diagnostics.scales: {s} must be positive"));
            }
        }

        if let Some(b) = &self.beta {
            if let Err(e) = BetaFunction::from_name(&b.name, &b.params).and_then(|b| b.check_admissible()) {
                errs.push(format!("beta: {e}"));
            }
            for &nu in nus.iter().filter(|nu| !(**nu < 1.0)) {
                errs.push(format!("beta: the rate envelope needs nu < 1, got {nu}"));
            }
        }

        match (&self.force, &self.initial) {
            (ForceConfig::Gallery, InitialConfig::Gallery { name, params }) => {
                if let Ok(item) = gallery::build(name, params, None) {
                    if item.force.is_none() {
                        errs.push(format!("force.kind = gallery but {name} carries no force"));
                    }
                }
            }
            (ForceConfig::Gallery, _) => errs.push("force.kind = gallery needs initial.kind = gallery".into()),
            (ForceConfig::Shear { m } | ForceConfig::OscillatingStream { m }, _) if *m == 0 => {
                errs.push("force.m must be positive".into())
            }
            _ => {}
        }

        if let InitialConfig::Gallery { name, params } = &self.initial {
            if let Err(e) = gallery::resolve_params(name, params).and_then(|_| gallery::default_grid_size(name, params)) {
                errs.push(format!("initial: {e}"));
            }
        }

        for &nu in nus.iter().filter(|nu| nu.is_finite() && **nu > 0.0) {
            let n = self.grid_size(nu);
            if n < 4 || n % 2 == 1 {
                continue;
            }
            let h = 2.0 * PI / n as f64;
            if !resolves(n, nu) {
                errs.push(format!(
                    "nu = {nu}: grid spacing 2pi/{n} = {h:.3e} exceeds sqrt(nu)/8 = {:.3e}; minimal n is {}",
                    nu.sqrt() / 8.0,
                    min_resolved_n(nu)
                ));
            }
            for &s in d.scales.iter().filter(|s| **s > 0.0) {
                let ell = s * nu.sqrt();
                if ell < h || ell > PI {
                    errs.push(format!("nu = {nu}: ell = {s}*sqrt(nu) = {ell:.3e} must lie in [{h:.3e}, pi]"));
                }
            }
            self.validate_initial(nu, n, &mut errs);
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(errs))
        }
    }

    fn validate_initial(&self, nu: f64, n: usize, errs: &mut Vec<String>) {
        let h = 2.0 * PI / n as f64;
        let scale_ok = |what: &str, s: &Scale, errs: &mut Vec<String>| {
            if let Scale::Value(a) = s {
                if !(*a > 2.0 * h && *a < PI) {
                    errs.push(format!("nu = {nu}: initial.scale = {a} for {what} must lie in (2h, pi) with h = {h:.3e}"));
                }
            }
        };
        match &self.initial {
            InitialConfig::TaylorGreen => {}
            InitialConfig::Shear { k } => {
                if *k == 0 || 3 * *k as usize >= n {
                    errs.push(format!("nu = {nu}: shear k = {k} must satisfy 1 <= k < n/3 (n = {n})"));
                }
            }
            InitialConfig::RandomSmooth { spectrum_slope, kmax, l2, .. } => {
                if *kmax == 0 || 3 * *kmax as usize > n {
                    errs.push(format!("nu = {nu}: random_smooth kmax = {kmax} must satisfy 1 <= kmax <= n/3 (n = {n})"));
                }
                if !spectrum_slope.is_finite() {
                    errs.push("initial.spectrum_slope must be finite".into());
                }
                if !(*l2 >= 0.0 && l2.is_finite()) {
                    errs.push(format!("initial.l2 = {l2} must be non-negative"));
                }
            }
            InitialConfig::MollifiedVortex { sign, scale, circulation } => {
                if *sign == 0.0 || !sign.is_finite() {
                    errs.push("initial.sign must be nonzero".into());
                }
                if !circulation.is_finite() {
                    errs.push("initial.circulation must be finite".into());
                }
                scale_ok("mollified_vortex", scale, errs);
            }
            InitialConfig::VortexSheetApprox { scale, strength } => {
                if !strength.is_finite() {
                    errs.push("initial.strength must be finite".into());
                }
                scale_ok("vortex_sheet_approx", scale, errs);
            }
            InitialConfig::Gallery { name, params } => {
                if let Ok(min) = gallery::default_grid_size(name, params) {
                    if n < min {
                        errs.push(format!("nu = {nu}: gallery item {name} needs n >= {min}, got {n}"));
                    }
                }
            }
        }
    }
}
