//! Closed-form example fields with the analytic facts they must satisfy.

mod family;
mod items;
pub mod profiles;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{make_grid, TorusGrid};

pub use family::family_facts;
pub use items::{
    checkerboard, concentrating_vortex, concentrating_vortex_scaled, heat_self_similar, oscillating_stream,
    radial_patch, steady_shear, w11_failure_family,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// |measured − expected| ≤ tol·|expected|.
    Rel,
    /// |measured − expected| ≤ tol.
    Abs,
    /// measured ≤ expected + tol.
    AtMost,
    /// measured ≥ expected − tol.
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticFact {
    pub quantity: String,
    pub relation: Relation,
    pub expected: f64,
    pub measured: f64,
    pub tolerance: f64,
    /// False when the fact is out of reach for this construction; such
    /// facts are reported but not required.
    pub attainable: bool,
    pub note: Option<String>,
    pub pass: bool,
}

impl AnalyticFact {
    pub fn new(quantity: &str, relation: Relation, expected: f64, measured: f64, tolerance: f64) -> Self {
        let pass = measured.is_finite()
            && match relation {
                Relation::Rel => (measured - expected).abs() <= tolerance * expected.abs(),
                Relation::Abs => (measured - expected).abs() <= tolerance,
                Relation::AtMost => measured <= expected + tolerance,
                Relation::AtLeast => measured >= expected - tolerance,
            };
        AnalyticFact {
            quantity: quantity.into(),
            relation,
            expected,
            measured,
            tolerance,
            attainable: true,
            note: None,
            pass,
        }
    }

    pub fn unattainable(mut self, note: &str) -> Self {
        self.attainable = false;
        self.note = Some(note.into());
        self
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Failing and required.
    pub fn is_violation(&self) -> bool {
        self.attainable && !self.pass
    }
}

#[derive(Clone, Debug)]
pub struct GalleryItem {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub nu: Option<f64>,
    pub omega: ScalarField,
    pub velocity: VectorField,
    pub force: Option<VectorField>,
    pub facts: Vec<AnalyticFact>,
    /// Measured scalars used by family-level trend facts.
    pub metrics: BTreeMap<String, f64>,
}

impl GalleryItem {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn metric(&self, name: &str) -> f64 {
        self.metrics.get(name).copied().unwrap_or(f64::NAN)
    }

    pub fn fact(&self, quantity: &str) -> Option<&AnalyticFact> {
        self.facts.iter().find(|f| f.quantity == quantity)
    }

    pub fn violations(&self) -> Vec<&AnalyticFact> {
        self.facts.iter().filter(|f| f.is_violation()).collect()
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            name: self.name.clone(),
            params: self.params.iter().cloned().collect(),
            n: self.omega.grid().n(),
            nu: self.nu,
            facts: self.facts.clone(),
            metrics: self.metrics.clone(),
        }
    }
}

/// JSON companion of an emitted item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub n: usize,
    pub nu: Option<f64>,
    pub facts: Vec<AnalyticFact>,
    pub metrics: BTreeMap<String, f64>,
}

/// Names, parameter lists and defaults.
pub const GALLERY: [(&str, &[(&str, f64)]); 7] = [
    ("concentrating_vortex", &[("n", 2.0)]),
    ("w11_failure_family", &[("n", 16.0), ("eps", 1.0)]),
    ("checkerboard", &[("n", 8.0), ("m", 4.0)]),
    ("steady_shear", &[("m", 4.0)]),
    ("oscillating_stream", &[("kappa", -0.25), ("m", 2.0)]),
    ("radial_patch", &[("scale", 0.5)]),
    ("heat_self_similar", &[("nu", 0.25)]),
];

fn positive_int(name: &str, v: f64) -> Result<u32> {
    if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as u32)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be a positive integer, got {v}")))
    }
}

/// Parameters with defaults filled in, in declaration order.
pub fn resolve_params(name: &str, given: &[f64]) -> Result<Vec<(String, f64)>> {
    let (_, defaults) = GALLERY
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown gallery item {name:?}")))?;
    if given.len() > defaults.len() {
        return Err(Error::InvalidArgument(format!("{name} takes at most {} parameters", defaults.len())));
    }
    Ok(defaults
        .iter()
        .enumerate()
        .map(|(i, (k, d))| (k.to_string(), given.get(i).copied().unwrap_or(*d)))
        .collect())
}

/// Smallest grid resolving the item.
pub fn default_grid_size(name: &str, params: &[f64]) -> Result<usize> {
    let p = resolve_params(name, params)?;
    let v = |i: usize| p[i].1;
    match name {
        "concentrating_vortex" => Ok(items::concentrating_grid(positive_int("n", v(0))?, 1.0 / v(0))),
        "w11_failure_family" => Ok(items::w11_grid(positive_int("n", v(0))?, v(1))),
        "checkerboard" => Ok(items::checkerboard_grid(positive_int("n", v(0))?, positive_int("m", v(1))?)),
        "steady_shear" => Ok(items::mode_grid(positive_int("m", v(0))?)),
        "oscillating_stream" => Ok(items::mode_grid(positive_int("m", v(1))?)),
        "radial_patch" => Ok(items::radial_patch_grid(v(0))),
        "heat_self_similar" => Ok(items::heat_grid(v(0))),
        _ => unreachable!(),
    }
}

/// Builds a gallery item by name on `grid`, or on its default grid.
pub fn build(name: &str, params: &[f64], grid: Option<&TorusGrid>) -> Result<GalleryItem> {
    let p = resolve_params(name, params)?;
    let owned;
    let g = match grid {
        Some(g) => g,
        None => {
            owned = make_grid(default_grid_size(name, params)?)?;
            &owned
        }
    };
    let v = |i: usize| p[i].1;
    match name {
        "concentrating_vortex" => concentrating_vortex(g, positive_int("n", v(0))?),
        "w11_failure_family" => w11_failure_family(g, positive_int("n", v(0))?, v(1)),
        "checkerboard" => checkerboard(g, positive_int("n", v(0))?, positive_int("m", v(1))?),
        "steady_shear" => steady_shear(g, positive_int("m", v(0))?),
        "oscillating_stream" => oscillating_stream(g, v(0), positive_int("m", v(1))?),
        "radial_patch" => radial_patch(g, v(0)),
        "heat_self_similar" => heat_self_similar(g, v(0)),
        _ => unreachable!(),
    }
}
