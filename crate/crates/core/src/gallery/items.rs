use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use super::profiles::{offset, radial_integral, sample_radial, LogPotential, PolyBump, RadialPatchProfile};
use super::{AnalyticFact, GalleryItem, Relation};
use crate::diagnostics::{atom_mass, pair};
use crate::dynamics::{evolve, steady_residual, ForceSpec, PressureMode};
use crate::error::{Error, Result};
use crate::field::{biot_savart, dealias, ScalarField, VectorField};
use crate::grid::{fft_friendly_at_least, TorusGrid};
use crate::norms::{norms, parseval_weight};

const CENTER: (f64, f64) = (PI, PI);

/// Grid cells across the smallest feature of a compact profile.
pub(super) const MIN_CELLS: f64 = 10.0;
/// Grid cells across a mollification radius.
pub(super) const MOLLIFIER_CELLS: f64 = 5.0;
/// Grid cells across the cutoff transition of a log-potential seed.
pub(super) const CUTOFF_CELLS: f64 = 16.0;

const SEED: PolyBump = PolyBump { k: 6 };
const SEED_RADIUS: f64 = 0.3;
const PATCH: RadialPatchProfile = RadialPatchProfile { radius: 0.8, k: 8 };
const HEAT: RadialPatchProfile = RadialPatchProfile { radius: 1.0, k: 8 };

fn cells_needed(feature: f64, cells: f64) -> usize {
    fft_friendly_at_least((cells * TAU / feature).ceil() as usize)
}

fn require(grid: &TorusGrid, what: &'static str, feature: f64, cells: f64) -> Result<()> {
    let min = cells * grid.spacing();
    if feature < min {
        Err(Error::UnderResolved { what, scale: feature, min })
    } else {
        Ok(())
    }
}

fn require_support(what: &str, radius: f64) -> Result<()> {
    if radius > 1.0 {
        Err(Error::InvalidArgument(format!("{what}: support radius {radius} exceeds 1")))
    } else {
        Ok(())
    }
}

/// Divergence and mean flags shared by every item.
fn common_facts(u: &VectorField, omega: &ScalarField) -> Vec<AnalyticFact> {
    let (s1, s2) = u.spectra();
    let scale = s1.iter().chain(&s2).fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
    let w = omega.max_abs().max(f64::MIN_POSITIVE);
    vec![
        AnalyticFact::new(
            "divergence_relative",
            Relation::AtMost,
            0.0,
            u.spectral_divergence_max() / scale,
            1e-10,
        ),
        AnalyticFact::new("omega_mean_relative", Relation::AtMost, 0.0, omega.mean().abs() / w, 1e-12),
    ]
}

struct Builder {
    name: &'static str,
    params: Vec<(String, f64)>,
    nu: Option<f64>,
    facts: Vec<AnalyticFact>,
    metrics: BTreeMap<String, f64>,
}

impl Builder {
    fn new(name: &'static str, params: &[(&str, f64)]) -> Self {
        Builder {
            name,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            nu: None,
            facts: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    fn fact(&mut self, f: AnalyticFact) {
        self.facts.push(f);
    }

    fn metric(&mut self, k: &str, v: f64) {
        self.metrics.insert(k.into(), v);
    }

    fn finish(mut self, omega: ScalarField, velocity: VectorField, force: Option<VectorField>) -> GalleryItem {
        let mut facts = common_facts(&velocity, &omega);
        facts.append(&mut self.facts);
        let nu = norms(&velocity);
        let no = norms(&omega);
        self.metrics.entry("u_l1".into()).or_insert(nu.l1);
        self.metrics.entry("u_l2".into()).or_insert(nu.l2);
        self.metrics.entry("omega_l1".into()).or_insert(no.l1);
        GalleryItem {
            name: self.name.into(),
            params: self.params,
            nu: self.nu,
            omega,
            velocity,
            force,
            facts,
            metrics: self.metrics,
        }
    }
}

// ---------------------------------------------------------------------------
// Concentrating vortex

fn seed_level(j: u32) -> ((f64, f64), f64) {
    let s = SEED_RADIUS * 2f64.powi(1 - j as i32);
    let th = TAU / 3.0 * (j - 1) as f64;
    ((2.0 * s * th.cos(), 2.0 * s * th.sin()), s)
}

pub(super) fn concentrating_grid(n: u32, eps: f64) -> usize {
    cells_needed(seed_level(n).1 * eps, MIN_CELLS)
}

/// Levels j ≤ n of the self-similar seed, rescaled to ε = 1/n.
pub fn concentrating_vortex(grid: &TorusGrid, n: u32) -> Result<GalleryItem> {
    concentrating_vortex_scaled(grid, n, 1.0 / n as f64)
}

/// As [`concentrating_vortex`] with an explicit rescaling ε.
pub fn concentrating_vortex_scaled(grid: &TorusGrid, n: u32, eps: f64) -> Result<GalleryItem> {
    if n == 0 || !(eps > 0.0) {
        return Err(Error::InvalidArgument("concentrating_vortex needs n >= 1 and eps > 0".into()));
    }
    require_support("concentrating_vortex", 3.0 * SEED_RADIUS * eps)?;
    require(grid, "seed level radius", seed_level(n).1 * eps, MIN_CELLS)?;
    let levels: Vec<((f64, f64), f64, f64)> = (1..=n)
        .map(|j| {
            let (c, s) = seed_level(j);
            (c, s, 1.0 / j as f64)
        })
        .collect();
    let harmonic: f64 = levels.iter().map(|l| l.2).sum();
    let square: f64 = levels.iter().map(|l| l.2 * l.2).sum();
    let total_l1 = SEED.laplacian_l1() * harmonic;
    let raw = ScalarField::from_fn(grid, |x1, x2| {
        let y = (offset(x1, CENTER.0) / eps, offset(x2, CENTER.1) / eps);
        levels
            .iter()
            .map(|((c1, c2), s, a)| {
                let r = (y.0 - c1).hypot(y.1 - c2) / s;
                if r < 1.0 {
                    a * SEED.laplacian(r) / (s * s)
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            / (eps * eps)
    });
    let omega = raw.scale(1.0 / total_l1).remove_mean();
    let u = biot_savart(&omega)?;
    let mut b = Builder::new("concentrating_vortex", &[("n", n as f64), ("eps", eps)]);
    b.fact(AnalyticFact::new("omega_l1", Relation::Rel, 1.0, norms(&omega).l1, 1e-3));
    let expected_u = (SEED.grad_sq() * square).sqrt() / total_l1;
    b.fact(AnalyticFact::new("u_l2", Relation::Rel, expected_u, norms(&u).l2, 1e-3));
    let atom = atom_mass(&omega.abs(), CENTER, &[2.0 * eps])?;
    b.fact(AnalyticFact::new("omega_atom_2eps", Relation::AtLeast, 0.99, atom.score, 0.0));
    Ok(b.finish(omega, u, None))
}

// ---------------------------------------------------------------------------
// W^{1,1} failure family

fn cutoff_width() -> f64 {
    let c = LogPotential::new(0.5).cutoff;
    c.b - c.a
}

pub(super) fn w11_grid(n: u32, eps: f64) -> usize {
    cells_needed(eps / n as f64, MOLLIFIER_CELLS).max(cells_needed(cutoff_width() * eps, CUTOFF_CELLS))
}

struct LogSeed {
    pot: LogPotential,
    /// ‖∇ψ‖_{L²(ℝ²)} by quadrature.
    grad: f64,
}

impl LogSeed {
    fn new(m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument("log-potential seed needs index >= 2".into()));
        }
        let pot = LogPotential::new(1.0 / m as f64);
        let grad = radial_integral(|r| pot.derivative(r).powi(2), &pot.breaks(), pot.support()).sqrt();
        Ok(LogSeed { pot, grad })
    }

    fn integral(&self, g: impl Fn(f64) -> f64, r1: f64) -> f64 {
        radial_integral(g, &self.pot.breaks(), r1)
    }

    /// ‖v‖_{L¹} and ‖curl v‖_{L¹} of v = ∇⊥ψ/‖∇ψ‖.
    fn l1_norms(&self) -> (f64, f64) {
        let s = self.pot.support();
        (
            self.integral(|r| self.pot.derivative(r).abs(), s) / self.grad,
            self.integral(|r| self.pot.laplacian(r).abs(), s) / self.grad,
        )
    }
}

/// u_n(x) = ε⁻¹v_n(x/ε), v_n the normalized cut-off log potential mollified
/// at scale 1/n.
pub fn w11_failure_family(grid: &TorusGrid, n: u32, eps: f64) -> Result<GalleryItem> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let seed = LogSeed::new(n)?;
    require_support("w11_failure_family", seed.pot.support() * eps)?;
    require(grid, "mollification radius", eps / n as f64, MOLLIFIER_CELLS)?;
    require(grid, "cutoff width", cutoff_width() * eps, CUTOFF_CELLS)?;
    let pot = seed.pot;
    let omega = sample_radial(grid, CENTER, |r| pot.laplacian(r / eps) / (eps * eps * seed.grad)).remove_mean();
    let u = biot_savart(&omega)?;
    let nu = norms(&u);
    let no = norms(&omega);
    let (v_l1, curl_l1) = seed.l1_norms();
    let mut b = Builder::new("w11_failure_family", &[("n", n as f64), ("eps", eps)]);
    b.fact(AnalyticFact::new("u_l2", Relation::Rel, 1.0, nu.l2, 1e-3));
    b.fact(AnalyticFact::new("u_l1", Relation::Rel, eps * v_l1, nu.l1, 1e-3));
    b.fact(AnalyticFact::new("omega_l1", Relation::Rel, curl_l1, no.l1, 1e-2));
    let r0 = 0.25;
    let frac = seed.integral(|r| pot.derivative(r).powi(2), r0) / (seed.grad * seed.grad);
    let atom = atom_mass(&u.magnitude_squared(), CENTER, &[r0 * eps])?;
    b.fact(AnalyticFact::new("u_sq_atom_quarter", Relation::Rel, frac, atom.score, 2e-2));
    b.metric("grad_psi_sq", seed.grad * seed.grad);
    b.metric("u_sq_atom_quarter", atom.score);
    Ok(b.finish(omega, u, None))
}

// ---------------------------------------------------------------------------
// Checkerboard

/// Smooth radial test function exp(−1/(1 − r²)) on the unit disk.
fn test_bump(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

fn test_bump_integral() -> f64 {
    radial_integral(test_bump, &[], 1.0)
}

/// Upper bound on max|∇ test_bump| (≈ 0.798).
const TEST_BUMP_LIP: f64 = 0.8;

pub(super) fn checkerboard_grid(n: u32, m: u32) -> usize {
    let n = n as usize;
    let min = (2.0 * MOLLIFIER_CELLS * (n * m as usize) as f64).max(2.0 * CUTOFF_CELLS * n as f64 / cutoff_width());
    let min = min.ceil() as usize;
    let mut q = min.div_ceil(2 * n).max(1);
    loop {
        let size = 2 * n * q;
        if fft_friendly_at_least(size) == size {
            return size;
        }
        q += 1;
    }
}

/// n×n tiles of half-width ε = π/n, each carrying ε·ψ_m((x − x_i)/ε)/‖∇ψ_m‖
/// for the log-potential seed of index m.
pub fn checkerboard(grid: &TorusGrid, n: u32, m: u32) -> Result<GalleryItem> {
    if n == 0 {
        return Err(Error::InvalidArgument("checkerboard needs n >= 1".into()));
    }
    let seed = LogSeed::new(m)?;
    let size = grid.n();
    if size % (2 * n as usize) != 0 {
        return Err(Error::InvalidArgument(format!(
            "non-integer tiling: grid size {size} is not a multiple of 2n = {}",
            2 * n
        )));
    }
    let eps = PI / n as f64;
    require(grid, "mollification radius", eps / m as f64, MOLLIFIER_CELLS)?;
    require(grid, "cutoff width", cutoff_width() * eps, CUTOFF_CELLS)?;
    let pot = seed.pot;
    let width = 2.0 * eps;
    let local = |x: f64| {
        let i = (x / width).floor();
        x - (i + 0.5) * width
    };
    let omega = ScalarField::from_fn(grid, |x1, x2| {
        let r = local(x1).hypot(local(x2)) / eps;
        pot.laplacian(r) / (eps * seed.grad)
    })
    .remove_mean();
    let u = biot_savart(&omega)?;

    // Overlap integral over neighbouring supports.
    let support = pot.support() * eps;
    let h = grid.spacing();
    let mut overlap = 0usize;
    for j in 0..size {
        for i in 0..size {
            let (x1, x2) = (grid.coord(i), grid.coord(j));
            let (c1, c2) = (((x1 / width).floor() + 0.5) * width, ((x2 / width).floor() + 0.5) * width);
            let mut count = 0;
            for a in -1..=1 {
                for bb in -1..=1 {
                    let d1 = offset(x1, c1 + a as f64 * width);
                    let d2 = offset(x2, c2 + bb as f64 * width);
                    if d1.hypot(d2) < support {
                        count += 1;
                    }
                }
            }
            overlap += count.max(1) - 1;
        }
    }

    let usq = u.magnitude_squared();
    let quarter = |phi: &dyn Fn(f64, f64) -> f64, exact: f64| (pair(&usq, phi), 0.25 * exact);
    let (p_one, e_one) = quarter(&|_, _| 1.0, TAU * TAU);
    let (p_cos, e_cos) = quarter(&|x1, _| x1.cos(), 0.0);
    let (p_bump, e_bump) = quarter(&|x1, x2| test_bump(offset(x1, PI).hypot(offset(x2, PI))), test_bump_integral());
    let (v_l1, curl_l1) = seed.l1_norms();
    let no = norms(&omega);
    let nu = norms(&u);
    // Per tile |φ(x_i + y) − φ(x_i)| ≤ Lip·ε, plus the midpoint error over cells of diameter 2√2ε.
    let lipschitz_bound = PI * PI * (1.0 + 2f64.sqrt());
    let mut b = Builder::new("checkerboard", &[("n", n as f64), ("m", m as f64)]);
    b.fact(AnalyticFact::new("tile_overlap", Relation::AtMost, 0.0, overlap as f64 * h * h, 0.0));
    b.fact(AnalyticFact::new("pairing_one", Relation::Abs, e_one, p_one, 1e-3 * e_one));
    b.fact(AnalyticFact::new("pairing_cos_x1", Relation::Abs, e_cos, p_cos, PI * PI * eps));
    b.fact(AnalyticFact::new("u_l1_tiling_law", Relation::Rel, PI * PI * v_l1, nu.l1, 1e-3));
    b.fact(AnalyticFact::new("omega_l1_tiling_law", Relation::Rel, n as f64 * PI * curl_l1, no.l1, 1e-2));
    b.fact(
        AnalyticFact::new("omega_l1_unit", Relation::Rel, 1.0, no.l1, 1e-3)
            .unattainable("unit vorticity mass needs a seed with curl/L2 ratio 1/(n pi)"),
    );
    b.metric("pairing_one_error", (p_one - e_one).abs());
    b.fact(AnalyticFact::new("pairing_bump", Relation::Abs, e_bump, p_bump, lipschitz_bound * eps * TEST_BUMP_LIP));
    b.metric("pairing_cos_error", (p_cos - e_cos).abs());
    b.metric("pairing_bump_error", (p_bump - e_bump).abs());
    Ok(b.finish(omega, u, None))
}

// ---------------------------------------------------------------------------
// Steady shear and oscillating stream

pub(super) fn mode_grid(m: u32) -> usize {
    fft_friendly_at_least((8 * m as usize).max(32))
}

fn require_mode(grid: &TorusGrid, m: u32) -> Result<()> {
    if 3 * m as usize >= grid.n() {
        Err(Error::UnderResolved { what: "mode", scale: m as f64, min: grid.n() as f64 / 3.0 })
    } else {
        Ok(())
    }
}

/// Modified Bessel I_k(x) by its power series.
fn bessel_i(k: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(k as i32) / (1..=k).map(f64::from).product::<f64>();
    let mut s = term;
    for j in 1..60 {
        term *= half * half / (j as f64 * (j + k) as f64);
        s += term;
    }
    s
}

/// u = (sin m x₂, 0) with f = u and ν = 1/m².
pub fn steady_shear(grid: &TorusGrid, m: u32) -> Result<GalleryItem> {
    if m == 0 {
        return Err(Error::InvalidArgument("steady_shear needs m >= 1".into()));
    }
    require_mode(grid, m)?;
    let mf = m as f64;
    let nu = 1.0 / (mf * mf);
    let u = VectorField::from_fn(grid, |_, x2| ((mf * x2).sin(), 0.0));
    let omega = ScalarField::from_fn(grid, |_, x2| -mf * (mf * x2).cos());
    let dens = ScalarField::from_fn(grid, |_, x2| (mf * x2).cos().powi(2));
    let weight = |x2: f64| x2.sin().exp();
    let sign = |p: u32| if p % 2 == 0 { 1.0 } else { -1.0 };
    let mut b = Builder::new("steady_shear", &[("m", mf)]);
    b.nu = Some(nu);
    b.fact(AnalyticFact::new("steady_residual", Relation::AtMost, 0.0, steady_residual(&u, PressureMode::Zero, &u, nu)?, 1e-10));
    b.fact(AnalyticFact::new("dissipation", Relation::Rel, 2.0 * PI * PI, nu * norms(&u).h1_seminorm.powi(2), 1e-8));
    b.fact(AnalyticFact::new("dissipation_vs_cos_x1", Relation::Abs, 0.0, pair(&dens, &|x1, _| x1.cos()), 1e-10));
    // e^{sin x} = I₀(1) + 2Σ_{k odd}(−1)^{(k−1)/2}I_k(1) sin kx + 2Σ_{k even}(−1)^{k/2}I_k(1) cos kx.
    let half_mean = 0.5 * TAU * TAU * bessel_i(0, 1.0);
    b.fact(AnalyticFact::new(
        "dissipation_vs_exp_sin_x2",
        Relation::Abs,
        half_mean + 2.0 * PI * PI * sign(m) * bessel_i(2 * m, 1.0),
        pair(&dens, &|_, x2| weight(x2)),
        1e-10,
    ));
    let u1 = u.components().0;
    let expected_u = if m % 2 == 1 { TAU * TAU * sign((m - 1) / 2) * bessel_i(m, 1.0) } else { 0.0 };
    b.fact(AnalyticFact::new("u1_vs_exp_sin_x2", Relation::Abs, expected_u, pair(&u1, &|_, x2| weight(x2)), 1e-10));
    let f = u.clone();
    Ok(b.finish(omega, u, Some(f)))
}

/// ψ = m⁻¹ sin(m x₁) cos(m x₂) with ν^κ = m and f = −νΔu.
pub fn oscillating_stream(grid: &TorusGrid, kappa: f64, m: u32) -> Result<GalleryItem> {
    if !(kappa > -0.5 && kappa < 0.0) {
        return Err(Error::InvalidArgument(format!("kappa must lie in (-1/2, 0), got {kappa}")));
    }
    if m < 2 {
        return Err(Error::InvalidArgument("oscillating_stream needs m >= 2".into()));
    }
    require_mode(grid, m)?;
    let mf = m as f64;
    let nu = mf.powf(1.0 / kappa);
    let psi = ScalarField::from_fn(grid, |x1, x2| (mf * x1).sin() * (mf * x2).cos() / mf);
    let u = psi.perp_gradient();
    let omega = psi.laplacian();
    let f = ForceSpec::SteadyAnalytic { name: "oscillating_stream".into(), params: vec![mf, nu] }
        .field(grid)?
        .expect("analytic force");
    let eig = omega.sub(&psi.scale(-2.0 * mf * mf))?.max_abs() / omega.max_abs();
    let (nu_n, nf) = (norms(&u), norms(&f));
    let mut b = Builder::new("oscillating_stream", &[("kappa", kappa), ("m", mf)]);
    b.nu = Some(nu);
    b.fact(AnalyticFact::new("eigenrelation", Relation::AtMost, 0.0, eig, 1e-12));
    b.fact(AnalyticFact::new("force_l2", Relation::Rel, 2.0 * nu * mf * mf * nu_n.l2, nf.l2, 1e-12));
    b.fact(AnalyticFact::new("u_l2_sq", Relation::Rel, 2.0 * PI * PI, nu_n.l2 * nu_n.l2, 1e-12));
    b.fact(AnalyticFact::new("steady_residual", Relation::AtMost, 0.0, steady_residual(&u, PressureMode::Leray, &f, nu)?, 1e-8));
    let scaled = nf.l2 / nu.powf(1.0 + 2.0 * kappa);
    b.fact(AnalyticFact::new("force_scaled", Relation::Rel, 2.0 * nu_n.l2, scaled, 1e-10));
    b.metric("force_scaled", scaled);
    Ok(b.finish(omega, u, Some(f)))
}

// ---------------------------------------------------------------------------
// Radial patch

pub(super) fn radial_patch_grid(scale: f64) -> usize {
    cells_needed(PATCH.radius * scale, 3.0 * MIN_CELLS)
}

fn gradient_sq(u: &VectorField) -> ScalarField {
    let (a, b) = u.components();
    let (ga, gb) = (a.gradient(), b.gradient());
    let s = ga.magnitude_squared().add(&gb.magnitude_squared()).expect("same grid");
    s
}

/// u^λ(x) = λ⁻¹u(x/λ) for a compactly supported radial vortex, ν = λ² and
/// f = −νΔu.
pub fn radial_patch(grid: &TorusGrid, scale: f64) -> Result<GalleryItem> {
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument("scale must be positive".into()));
    }
    let lam = scale;
    let support = PATCH.radius * lam;
    require_support("radial_patch", support)?;
    require(grid, "patch radius", support, 3.0 * MIN_CELLS)?;
    let nu = lam * lam;
    let omega = sample_radial(grid, CENTER, |r| PATCH.omega(r / lam) / (lam * lam)).remove_mean();
    let u = biot_savart(&omega)?;
    let lap_u = {
        let (a, b) = u.components();
        VectorField::new(grid, a.laplacian().into_values(), b.laplacian().into_values())?
    };
    let f = lap_u.scale(-nu);
    let umax = u.max_magnitude();

    let h = grid.spacing();
    let n = grid.n();
    let ci = (CENTER.0 / h).round() as usize;
    let (mut inside, mut beyond) = (0.0f64, 0.0f64);
    for frac in [0.2, 0.35, 0.5, 0.65, 0.8, 1.05, 1.2, 1.4, 1.7, 2.0] {
        let k = ((frac * support) / h).round() as usize;
        let r = k as f64 * h;
        let measured = u.u2()[ci * n + (ci + k) % n];
        let expected = PATCH.u_theta(r / lam) / lam;
        if r < support {
            inside = inside.max((measured - expected).abs() / umax);
        } else {
            beyond = beyond.max(measured.abs() / umax);
        }
    }

    let transport = {
        let g = omega.gradient();
        let adv: f64 = u
            .u1()
            .iter()
            .zip(u.u2())
            .zip(g.u1().iter().zip(g.u2()))
            .map(|((a, b), (c, d))| (a * c + b * d).abs())
            .fold(0.0, f64::max);
        adv / (umax * g.max_magnitude())
    };

    let dissipation = gradient_sq(&u).scale(nu);
    let ball = &[1.1 * support];
    let atoms = [
        ("u_sq", u.magnitude_squared()),
        ("omega_abs", omega.abs()),
        ("dissipation", dissipation.clone()),
        ("force_sq", f.magnitude_squared()),
    ];
    let mut b = Builder::new("radial_patch", &[("scale", lam)]);
    b.nu = Some(nu);
    b.fact(AnalyticFact::new("u_theta_profile", Relation::AtMost, 0.0, inside, 1e-6));
    b.fact(AnalyticFact::new("u_beyond_support", Relation::AtMost, 0.0, beyond, 1e-8));
    b.fact(AnalyticFact::new("transport_residual", Relation::AtMost, 0.0, transport, 1e-8));
    let res = steady_residual(&u, PressureMode::Leray, &f, nu)? / norms(&f).l2;
    b.fact(AnalyticFact::new("steady_residual_relative", Relation::AtMost, 0.0, res, 1e-8));
    for (name, d) in &atoms {
        let total = d.integral();
        let score = atom_mass(d, CENTER, ball)?.score;
        b.fact(AnalyticFact::new(&format!("{name}_atom_fraction"), Relation::AtLeast, 1.0, score / total, 1e-6));
    }
    let diss_atom = atom_mass(&dissipation, CENTER, ball)?.score;
    b.fact(AnalyticFact::new("dissipation_atom", Relation::Rel, PATCH.omega_sq(), diss_atom, 1e-6));
    b.metric("dissipation_atom", diss_atom);
    Ok(b.finish(omega, u, Some(f)))
}

// ---------------------------------------------------------------------------
// Self-similar heat flow

pub(super) fn heat_grid(nu: f64) -> usize {
    cells_needed(HEAT.radius * nu, 2.0 * MIN_CELLS)
}

/// Steps per unit of ν in the evolution check.
const HEAT_STEPS: usize = 200;
const HEAT_SNAPSHOTS: usize = 10;

/// ω^ν(x, t) = ν⁻²ω(x/ν, t/ν) under ∂ₜω = νΔω, checked up to t = ν.
pub fn heat_self_similar(grid: &TorusGrid, nu: f64) -> Result<GalleryItem> {
    if !(nu > 0.0) {
        return Err(Error::InvalidArgument("nu must be positive".into()));
    }
    let support = HEAT.radius * nu;
    require_support("heat_self_similar", support)?;
    require(grid, "heat profile radius", support, 2.0 * MIN_CELLS)?;
    let omega0 = sample_radial(grid, CENTER, |r| HEAT.omega(r / nu) / (nu * nu)).remove_mean();
    let u = biot_savart(&omega0)?;
    let mut hat = omega0.spectrum();
    dealias(grid, &mut hat);
    let w = parseval_weight(grid.n());

    // ν∫₀^ν‖ω^ν(t)‖² dt for the spectral heat flow.
    let identity: f64 = hat
        .iter()
        .enumerate()
        .filter(|(idx, _)| grid.k_squared(*idx) > 0.0)
        .map(|(idx, z)| {
            let k2 = grid.k_squared(idx);
            w * z.norm_sqr() * (1.0 - (-2.0 * nu * nu * k2).exp()) / (2.0 * k2)
        })
        .sum();

    let t_end = nu;
    let dt = nu / HEAT_STEPS as f64;
    let traj = evolve(&omega0, nu, &ForceSpec::None, t_end, dt, HEAT_STEPS / HEAT_SNAPSHOTS)?;
    let heat_at = |t: f64| {
        let s: Vec<_> = hat.iter().enumerate().map(|(idx, z)| z * (-nu * grid.k_squared(idx) * t).exp()).collect();
        ScalarField::from_spectrum(grid, &s)
    };
    let mut worst = 0.0f64;
    let mut l1_growth = f64::NEG_INFINITY;
    let l1_0 = norms(&traj.snapshots()[0]).l1;
    for (t, snap) in traj.times().iter().zip(traj.snapshots()) {
        let exact = heat_at(*t);
        worst = worst.max(norms(&snap.sub(&exact)?).l2 / norms(&exact).l2);
        l1_growth = l1_growth.max(norms(snap).l1 - l1_0);
    }
    let ledger = traj.ledger().entries().last().map_or(0.0, |e| e.cumulative_dissipation);

    let mut b = Builder::new("heat_self_similar", &[("nu", nu)]);
    b.nu = Some(nu);
    b.fact(AnalyticFact::new("evolve_vs_heat", Relation::AtMost, 0.0, worst, 1e-6));
    b.fact(AnalyticFact::new("l1_nonincreasing", Relation::AtMost, 0.0, l1_growth, 1e-12 * l1_0));
    b.fact(AnalyticFact::new("dissipation_ledger", Relation::Rel, identity, ledger, 1e-3));
    b.metric("dissipation_identity", identity);
    Ok(b.finish(omega0, u, None))
}
