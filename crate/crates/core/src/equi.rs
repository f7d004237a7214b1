//! Convex superlinear weights β, the inverses g_β and G_β, and ball-mass
//! bounds derived from them.
//!
//! g_β inverts s ↦ s/β(s) on [s₀, ∞) and G_β inverts ε ↦ ε/g_β(ε). Writing
//! σ = g_β(ε) gives ε/g_β(ε) = 1/β(σ), so G_β(s) = s·σ with β(σ) = 1/s.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ball::BallKernel;
use crate::error::{Error, Result};
use crate::field::{same_grid, ScalarField, VectorField};
use crate::mollify::displacement;
use crate::norms::norms;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct BetaFunction {
    name: String,
    eval: RealFn,
    analytic_g: Option<RealFn>,
}

impl fmt::Debug for BetaFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BetaFunction").field("name", &self.name).finish_non_exhaustive()
    }
}

impl BetaFunction {
    /// β(s) = s^p with p > 1; G_β(s) = s^{(p−1)/p}.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::BetaNotAdmissible(format!("power {p} is not superlinear")));
        }
        Ok(BetaFunction {
            name: format!("s^{p}"),
            eval: Arc::new(move |s: f64| s.powf(p)),
            analytic_g: Some(Arc::new(move |s: f64| s.powf((p - 1.0) / p))),
        })
    }

    /// β(s) = s·log(e + s).
    pub fn s_log() -> Self {
        BetaFunction {
            name: "s*log(e+s)".into(),
            eval: Arc::new(|s: f64| s * (std::f64::consts::E + s).ln()),
            analytic_g: None,
        }
    }

    pub fn custom(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        BetaFunction { name: name.into(), eval: Arc::new(f), analytic_g: None }
    }

    /// Parses "power" with `[p]` or "s_log" with no parameters.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        match (name, params) {
            ("power", [p]) => Self::power(*p),
            ("s_log", []) => Ok(Self::s_log()),
            _ => Err(Error::InvalidArgument(format!("unknown beta {name} with {} params", params.len()))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.eval)(s)
    }

    /// Closed-form G_β when known.
    pub fn analytic_big_g(&self, s: f64) -> Option<f64> {
        self.analytic_g.as_ref().map(|g| g(s))
    }

    /// (β(10⁶s₀)/(10⁶s₀)) / (β(s₀)/s₀) at s₀ = 1.
    pub fn superlinearity_ratio(&self) -> f64 {
        let big = 1e6;
        (self.eval(big) / big) / self.eval(1.0)
    }

    /// Largest violation of β(λa+(1−λ)b) ≤ λβ(a)+(1−λ)β(b) over 100 seeded
    /// triples with a, b log-uniform in [10⁻³, 10³], relative to the right side.
    pub fn convexity_defect(&self) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let a = 10f64.powf(rng.random_range(-3.0..3.0));
            let b = 10f64.powf(rng.random_range(-3.0..3.0));
            let l: f64 = rng.random();
            let rhs = l * self.eval(a) + (1.0 - l) * self.eval(b);
            let lhs = self.eval(l * a + (1.0 - l) * b);
            if rhs > 0.0 {
                worst = worst.max((lhs - rhs) / rhs);
            }
        }
        worst
    }

    /// Runs both probes.
    pub fn check_admissible(&self) -> Result<()> {
        let ratio = self.superlinearity_ratio();
        if !(ratio >= 10.0) {
            return Err(Error::BetaNotAdmissible(format!(
                "{}: superlinearity ratio {ratio:.3} below 10",
                self.name
            )));
        }
        let defect = self.convexity_defect();
        if defect > 1e-12 {
            return Err(Error::BetaNotAdmissible(format!("{}: convexity defect {defect:e}", self.name)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct InverseTables {
    beta: BetaFunction,
    s0: f64,
    c1: f64,
    c2: f64,
    c3: f64,
}

const MAX_BISECT: usize = 400;

/// Smallest σ ≥ lo with pred(σ) true, assuming pred is monotone; bisection
/// on log σ to relative width `rel`.
fn bisect_up(lo: f64, pred: impl Fn(f64) -> bool, rel: f64) -> Result<f64> {
    if pred(lo) {
        return Ok(lo);
    }
    let mut a = lo;
    let mut b = lo * 2.0;
    let mut k = 0;
    while !pred(b) {
        a = b;
        b *= 2.0;
        k += 1;
        if k > 2000 || !b.is_finite() {
            return Err(Error::OutOfRange("bisection bracket escaped to infinity".into()));
        }
    }
    for _ in 0..MAX_BISECT {
        if b / a - 1.0 <= rel {
            break;
        }
        let m = (a * b).sqrt();
        if pred(m) {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Locates s₀, c₁, c₂, c₃ for an admissible β.
pub fn build_inverses(beta: &BetaFunction) -> Result<InverseTables> {
    beta.check_admissible()?;
    let b = |s: f64| beta.eval(s);
    let excess = |s: f64| {
        let h = 1e-6 * s;
        let d = (b(s + h) - b(s - h)) / (2.0 * h);
        s * d - b(s)
    };
    let mut s0 = 1.0;
    let mut k = 0;
    while !(excess(s0) > 1e-9 * b(s0)) {
        s0 *= 2.0;
        k += 1;
        if k > 200 {
            return Err(Error::BetaNotAdmissible(format!("{}: s·β'(s) − β(s) never positive", beta.name())));
        }
    }
    let c1 = s0 / b(s0);
    let c2 = s0;
    // g(c₁) = s₀.
    let c3 = c1 / s0;
    Ok(InverseTables { beta: beta.clone(), s0, c1, c2, c3 })
}

impl InverseTables {
    pub fn beta(&self) -> &BetaFunction {
        &self.beta
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn c3(&self) -> f64 {
        self.c3
    }

    /// g_β(ε) for ε ∈ (0, c₁].
    pub fn g(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0) || eps > self.c1 * (1.0 + 1e-12) {
            return Err(Error::OutOfRange(format!("g_beta needs 0 < eps <= c1 = {}", self.c1)));
        }
        bisect_up(self.s0, |s| s / self.beta.eval(s) <= eps, 1e-14)
    }

    /// G_β(s) for s ∈ [0, c₃].
    pub fn big_g(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) || s > self.c3 * (1.0 + 1e-12) {
            return Err(Error::OutOfRange(format!("G_beta needs 0 <= s <= c3 = {}", self.c3)));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let sigma = bisect_up(self.s0, |x| self.beta.eval(x) * s >= 1.0, 1e-15)?;
        Ok(s * sigma)
    }
}

/// JSON record of one certificate row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub beta_name: String,
    pub r: f64,
    pub empirical: f64,
    pub envelope: f64,
    #[serde(rename = "fitted_C")]
    pub fitted_c: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallDecayRow {
    pub r: f64,
    /// sup over fields and grid points of ∫_{B_r(x)}|f|.
    pub sup_mass: f64,
    /// G_β(r²).
    pub g_value: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallDecayCertificate {
    pub beta_name: String,
    /// Rows by increasing r.
    pub rows: Vec<BallDecayRow>,
    /// Largest ratio, the empirical constant.
    pub fitted_c: f64,
    /// Ratio at the smallest r exceeds twice the ratio at the largest r.
    pub flagged: bool,
}

impl BallDecayCertificate {
    pub fn pass(&self) -> bool {
        !self.flagged
    }

    pub fn records(&self) -> Vec<CertificateRecord> {
        self.rows
            .iter()
            .map(|r| CertificateRecord {
                beta_name: self.beta_name.clone(),
                r: r.r,
                empirical: r.sup_mass,
                envelope: self.fitted_c * r.g_value,
                fitted_c: self.fitted_c,
                pass: !self.flagged,
            })
            .collect()
    }
}

/// sup_{f, x} ∫_{B_r(x)}|f| against G_β(r²) over a list of radii.
pub fn ball_decay_certificate(
    fields: &[ScalarField],
    tables: &InverseTables,
    radii: &[f64],
) -> Result<BallDecayCertificate> {
    if fields.is_empty() || radii.is_empty() {
        return Err(Error::InvalidArgument("need at least one field and one radius".into()));
    }
    let grid = fields[0].grid();
    for f in fields {
        same_grid(grid, f.grid())?;
    }
    let abs: Vec<ScalarField> = fields.iter().map(|f| f.abs()).collect();
    let mut rs = radii.to_vec();
    rs.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(rs.len());
    for r in rs {
        let min = 4.0 * grid.spacing();
        if r < min {
            return Err(Error::UnderResolved { what: "ball radius", scale: r, min });
        }
        let g_value = tables.big_g(r * r)?;
        let kernel = BallKernel::new(grid, r)?;
        let mut sup: f64 = 0.0;
        for f in &abs {
            sup = sup.max(kernel.apply(f)?.max());
        }
        rows.push(BallDecayRow { r, sup_mass: sup, g_value, ratio: sup / g_value });
    }
    let fitted_c = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let flagged = rows[0].ratio > 2.0 * rows[rows.len() - 1].ratio;
    Ok(BallDecayCertificate { beta_name: tables.beta.name().into(), rows, fitted_c, flagged })
}

/// χ_r at distance ρ from the centre: 1 on B_r, log(ρ/√r)/log(√r) on the
/// annulus, 0 beyond √r.
pub fn log_cutoff(r: f64, rho: f64) -> f64 {
    let sr = r.sqrt();
    if rho <= r {
        1.0
    } else if rho >= sr {
        0.0
    } else {
        (rho / sr).ln() / sr.ln()
    }
}

/// 2π/|log √r|, the exact ‖∇χ_r‖²_{L²}.
pub fn log_cutoff_gradient_sq_exact(r: f64) -> f64 {
    std::f64::consts::TAU / r.sqrt().ln().abs()
}

/// Midpoint quadrature of |∇χ_r|² over [−√r, √r]² with `cells_per_r`
/// cells per length r.
pub fn log_cutoff_gradient_sq(r: f64, cells_per_r: usize) -> f64 {
    let sr = r.sqrt();
    let h = r / cells_per_r as f64;
    let m = (sr / h).ceil() as i64;
    let l2 = sr.ln().powi(2);
    let mut sum = 0.0;
    // One quadrant, times four.
    for j in 0..m {
        let y = (j as f64 + 0.5) * h;
        for i in 0..m {
            let x = (i as f64 + 0.5) * h;
            let rho2 = x * x + y * y;
            if rho2 > r * r && rho2 < r {
                sum += 1.0 / (rho2 * l2);
            }
        }
    }
    4.0 * sum * h * h
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogCutoffReport {
    pub r: f64,
    /// max_x ∫_{B_r(x)}|ω|.
    pub sup_ball_mass: f64,
    /// Grid point attaining the maximum.
    pub argmax: (f64, f64),
    /// G_β(r).
    pub g_term: f64,
    /// (log 1/r)^{−1/2}.
    pub log_term: f64,
    /// ∫|ω(y)|χ_r(y − x*) dy at the maximizing x*.
    pub cutoff_integral: f64,
    /// ‖∇χ_r‖²_{L²}, exact.
    pub cutoff_gradient_sq: f64,
    /// ‖u‖²_{L²} and ∫β(|f|), the data the constant depends on.
    pub energy: f64,
    pub f_beta_mass: f64,
}

impl LogCutoffReport {
    /// G_β(r) + (log 1/r)^{−1/2}.
    pub fn envelope_shape(&self) -> f64 {
        self.g_term + self.log_term
    }
}

/// Ball mass of |ω| at radius r together with the pieces of the
/// log-cutoff envelope.
pub fn log_cutoff_bound(
    u: &VectorField,
    omega: &ScalarField,
    f_part: &ScalarField,
    tables: &InverseTables,
    r: f64,
) -> Result<LogCutoffReport> {
    let grid = omega.grid();
    same_grid(grid, u.grid())?;
    same_grid(grid, f_part.grid())?;
    let rmax = tables.c3.min(0.5);
    if !(r > 0.0) || r >= rmax {
        return Err(Error::OutOfRange(format!("log cutoff radius {r} must lie in (0, {rmax})")));
    }
    let kernel = BallKernel::new(grid, r)?;
    let absw = omega.abs();
    let mass = kernel.apply(&absw)?;
    let (imax, sup) = mass
        .values()
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let n = grid.n();
    let (ci, cj) = (imax % n, imax / n);
    let sr = r.sqrt();
    let mut cut = 0.0;
    for dj in 0..n {
        let y2 = displacement(grid, dj);
        if y2.abs() >= sr {
            continue;
        }
        for di in 0..n {
            let y1 = displacement(grid, di);
            let chi = log_cutoff(r, y1.hypot(y2));
            if chi > 0.0 {
                cut += chi * absw.at((ci + di) % n, (cj + dj) % n);
            }
        }
    }
    cut *= grid.cell_area();
    let f_beta_mass = f_part.values().iter().map(|v| tables.beta.eval(v.abs())).sum::<f64>() * grid.cell_area();
    Ok(LogCutoffReport {
        r,
        sup_ball_mass: sup.max(0.0),
        argmax: (grid.coord(ci), grid.coord(cj)),
        g_term: tables.big_g(r)?,
        log_term: 1.0 / (1.0 / r).ln().sqrt(),
        cutoff_integral: cut,
        cutoff_gradient_sq: log_cutoff_gradient_sq_exact(r),
        energy: norms(u).l2.powi(2),
        f_beta_mass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    /// Calibrated at the largest r.
    pub fitted_c: f64,
    /// empirical / (C·shape) per report, in input order.
    pub margins: Vec<f64>,
    /// Every margin ≤ 2.
    pub pass: bool,
}

/// Fits C·(G_β(r) + (log 1/r)^{−1/2}) at the largest r and tests the other
/// radii against twice the fitted envelope.
pub fn fit_log_cutoff(reports: &[LogCutoffReport]) -> Result<EnvelopeFit> {
    let cal = reports
        .iter()
        .max_by(|a, b| a.r.total_cmp(&b.r))
        .ok_or_else(|| Error::InvalidArgument("no reports to fit".into()))?;
    let fitted_c = cal.sup_ball_mass / cal.envelope_shape();
    let margins: Vec<f64> = reports
        .iter()
        .map(|r| {
            if r.sup_ball_mass == 0.0 {
                0.0
            } else {
                r.sup_ball_mass / (fitted_c * r.envelope_shape())
            }
        })
        .collect();
    let pass = margins.iter().all(|m| *m <= 2.0);
    Ok(EnvelopeFit { fitted_c, margins, pass })
}

/// JSON records for a fitted log-cutoff sweep.
pub fn log_cutoff_records(tables: &InverseTables, reports: &[LogCutoffReport], fit: &EnvelopeFit) -> Vec<CertificateRecord> {
    reports
        .iter()
        .zip(&fit.margins)
        .map(|(r, m)| CertificateRecord {
            beta_name: tables.beta.name().into(),
            r: r.r,
            empirical: r.sup_ball_mass,
            envelope: fit.fitted_c * r.envelope_shape(),
            fitted_c: fit.fitted_c,
            pass: *m <= 2.0,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_tables() {
        let t = build_inverses(&BetaFunction::power(2.0).unwrap()).unwrap();
        assert_eq!((t.s0(), t.c1(), t.c2()), (1.0, 1.0, 1.0));
        assert!((t.c3() - 1.0).abs() < 1e-15);
        assert!((t.g(0.25).unwrap() - 4.0).abs() < 1e-12);
        assert!((t.big_g(0.01).unwrap() - 0.1).abs() < 1e-14);
        assert_eq!(t.big_g(0.0).unwrap(), 0.0);
        assert!(t.big_g(1.5).is_err());
        assert!(t.g(0.0).is_err());
    }

    #[test]
    fn cube_tables() {
        let t = build_inverses(&BetaFunction::power(3.0).unwrap()).unwrap();
        assert!((t.big_g(0.001).unwrap() - 0.01).abs() < 1e-13);
    }

    #[test]
    fn s_log_has_closed_form_g() {
        // s/β(s) = 1/log(e+s), so g(ε) = e^{1/ε} − e.
        let t = build_inverses(&BetaFunction::s_log()).unwrap();
        for eps in [0.7f64, 0.3, 0.1] {
            let want = (1.0 / eps).exp() - std::f64::consts::E;
            assert!((t.g(eps).unwrap() / want - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_linear_and_concave() {
        assert!(build_inverses(&BetaFunction::custom("linear", |s| 2.0 * s)).is_err());
        assert!(BetaFunction::custom("sqrt", |s| s.sqrt()).check_admissible().is_err());
        assert!(BetaFunction::power(1.0).is_err());
        // Superlinear but not convex.
        let wiggly = BetaFunction::custom("wiggly", |s| s * s * (1.0 + 0.5 * s.sin()));
        assert!(wiggly.check_admissible().is_err());
    }

    #[test]
    fn cutoff_profile() {
        let r = 0.01;
        assert_eq!(log_cutoff(r, 0.005), 1.0);
        assert_eq!(log_cutoff(r, 0.2), 0.0);
        assert!((log_cutoff(r, r) - 1.0).abs() < 1e-15);
        assert!(log_cutoff(r, 0.0999999).abs() < 1e-6);
    }

    #[test]
    fn cutoff_gradient_quadrature() {
        let r = 1e-2;
        let q = log_cutoff_gradient_sq(r, 128);
        let exact = log_cutoff_gradient_sq_exact(r);
        assert!((exact - 4.0 * std::f64::consts::PI / (1.0 / r).ln()).abs() < 1e-12);
        assert!((q / exact - 1.0).abs() < 1e-2, "{q} vs {exact}");
    }
}
