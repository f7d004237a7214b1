//! Integrating-factor SSP-RK3 for ∂ₜω + u·∇ω = νΔω + curl f.
//!
//! With E(s) = exp(−ν|k|²s) and N(ω) = −∇·(uω) + curl f:
//!   ω₁ = E(h)(ω₀ + hN₀)
//!   ω₂ = E(h/2)(ω₀ + ¼hN₀) + ¼h E(−h/2) N₁
//!   ω₃ = ⅓E(h)ω₀ + ⅔E(h/2)(ω₂ + hN₂)
//! The ledger integrates ν‖ω‖² and ⟨f, u⟩ with the matching weights
//! (⅙, ⅙, ⅔) at the stage times (t, t+h, t+h/2).

use log::warn;
use rustfft::num_complex::Complex64;

use super::{BalanceLedger, ForceSpec, LedgerEntry, Trajectory};
use crate::error::{Error, Result};
use crate::field::{dealias, same_grid, ScalarField, ZERO};
use crate::grid::TorusGrid;
use crate::norms::parseval_weight;

/// Largest admissible advective Courant number.
pub const CFL_MAX: f64 = 0.5;
/// The step may be halved at most this many times below the nominal dt.
pub const MAX_HALVINGS: u32 = 10;

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub cfl_max: f64,
    pub max_halvings: u32,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { cfl_max: CFL_MAX, max_halvings: MAX_HALVINGS }
    }
}

/// f and μ carried passively by a parent flow.
#[derive(Clone, Debug)]
pub struct DecompositionPair {
    pub times: Vec<f64>,
    pub f_part: Vec<ScalarField>,
    pub mu_part: Vec<ScalarField>,
}

struct Operators {
    grid: TorusGrid,
    nu: f64,
    k2: Vec<f64>,
    kd1: Vec<f64>,
    kd2: Vec<f64>,
    keep: Vec<bool>,
    curl_f: Option<Vec<Complex64>>,
    force: Option<(Vec<f64>, Vec<f64>)>,
    /// Passive scalar that receives curl f.
    forced_passive: Option<usize>,
}

struct Eval {
    n_omega: Vec<Complex64>,
    n_passive: Vec<Vec<Complex64>>,
    omega_real: Vec<f64>,
    umax: f64,
    l1: f64,
    work: f64,
}

struct Factors {
    h: f64,
    full: Vec<f64>,
    half: Vec<f64>,
}

impl Operators {
    fn new(grid: &TorusGrid, nu: f64, force: &ForceSpec, forced_passive: Option<usize>) -> Result<Self> {
        let n = grid.n();
        let len = grid.len();
        let mut k2 = vec![0.0; len];
        let mut kd1 = vec![0.0; len];
        let mut kd2 = vec![0.0; len];
        let mut keep = vec![false; len];
        for j in 0..n {
            for i in 0..n {
                let idx = j * n + i;
                k2[idx] = grid.k_squared(idx);
                kd1[idx] = grid.derivative_wavenumber(i);
                kd2[idx] = grid.derivative_wavenumber(j);
                keep[idx] = grid.keeps_mode(i, j);
            }
        }
        let (curl_f, force) = match force.field(grid)? {
            Some(f) => {
                let mut c = crate::field::curl(&f).spectrum();
                c[0] = ZERO;
                dealias(grid, &mut c);
                (Some(c), Some((f.u1().to_vec(), f.u2().to_vec())))
            }
            None => (None, None),
        };
        Ok(Operators { grid: grid.clone(), nu, k2, kd1, kd2, keep, curl_f, force, forced_passive })
    }

    fn factors(&self, h: f64) -> Factors {
        let nu = self.nu;
        Factors {
            h,
            full: self.k2.iter().map(|k| (-nu * k * h).exp()).collect(),
            half: self.k2.iter().map(|k| (-0.5 * nu * k * h).exp()).collect(),
        }
    }

    /// −∇·(u s) in spectral form, dealiased.
    fn flux_divergence(&self, u1: &[f64], u2: &[f64], s: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = u1
            .iter()
            .zip(u2)
            .zip(s)
            .map(|((a, b), w)| Complex64::new(a * w, b * w))
            .collect();
        self.grid.forward(&mut buf);
        let n = self.grid.n();
        let mut out = vec![ZERO; buf.len()];
        for j in 0..n {
            let jm = (n - j) % n;
            for i in 0..n {
                let idx = j * n + i;
                if !self.keep[idx] {
                    continue;
                }
                let im = (n - i) % n;
                let fk = buf[idx];
                let fm = buf[jm * n + im].conj();
                let a = (fk + fm) * 0.5;
                let b = (fk - fm) * Complex64::new(0.0, -0.5);
                out[idx] = -(Complex64::new(0.0, self.kd1[idx]) * a + Complex64::new(0.0, self.kd2[idx]) * b);
            }
        }
        out
    }

    fn eval(&self, w: &[Complex64], passive: &[Vec<Complex64>]) -> Eval {
        let len = w.len();
        let mut s1 = vec![ZERO; len];
        let mut s2 = vec![ZERO; len];
        for idx in 1..len {
            let q = w[idx] / self.k2[idx];
            s1[idx] = Complex64::new(0.0, self.kd2[idx]) * q;
            s2[idx] = Complex64::new(0.0, -self.kd1[idx]) * q;
        }
        let (u1, u2) = self.grid.inverse_pair(&s1, &s2);
        drop((s1, s2));
        let omega_real = self.grid.inverse_real(w);
        let umax = u1.iter().zip(&u2).fold(0.0f64, |m, (a, b)| {
            let v = a.hypot(*b);
            if v.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(v)
            }
        });
        let da = self.grid.cell_area();
        let l1 = omega_real.iter().map(|v| v.abs()).sum::<f64>() * da;
        let work = match &self.force {
            Some((f1, f2)) => {
                (f1.iter().zip(&u1).map(|(a, b)| a * b).sum::<f64>()
                    + f2.iter().zip(&u2).map(|(a, b)| a * b).sum::<f64>())
                    * da
            }
            None => 0.0,
        };
        let mut n_omega = self.flux_divergence(&u1, &u2, &omega_real);
        if let Some(c) = &self.curl_f {
            n_omega.iter_mut().zip(c).for_each(|(a, b)| *a += *b);
        }
        let n_passive = passive
            .iter()
            .enumerate()
            .map(|(p, s)| {
                let sr = self.grid.inverse_real(s);
                let mut ns = self.flux_divergence(&u1, &u2, &sr);
                if self.forced_passive == Some(p) {
                    if let Some(c) = &self.curl_f {
                        ns.iter_mut().zip(c).for_each(|(a, b)| *a += *b);
                    }
                }
                ns
            })
            .collect();
        Eval { n_omega, n_passive, omega_real, umax, l1, work }
    }

    fn enstrophy(&self, w: &[Complex64]) -> f64 {
        w.iter().map(|z| z.norm_sqr()).sum::<f64>() * parseval_weight(self.grid.n())
    }

    fn energy(&self, w: &[Complex64]) -> f64 {
        0.5 * w.iter().zip(&self.k2).skip(1).map(|(z, k)| z.norm_sqr() / k).sum::<f64>()
            * parseval_weight(self.grid.n())
    }
}

fn stage1(f: &Factors, w0: &[Complex64], n0: &[Complex64]) -> Vec<Complex64> {
    w0.iter().zip(n0).zip(&f.full).map(|((w, n), e)| (w + n * f.h) * e).collect()
}

fn stage2(f: &Factors, w0: &[Complex64], n0: &[Complex64], n1: &[Complex64]) -> Vec<Complex64> {
    let q = 0.25 * f.h;
    (0..w0.len())
        .map(|i| {
            let e = f.half[i];
            // E(−h/2) only multiplies dealiased modes where e > 0.
            let back = if e > 0.0 { n1[i] * (q / e) } else { ZERO };
            (w0[i] + n0[i] * q) * e + back
        })
        .collect()
}

fn stage3(f: &Factors, w0: &[Complex64], w2: &[Complex64], n2: &[Complex64]) -> Vec<Complex64> {
    (0..w0.len())
        .map(|i| w0[i] * (f.full[i] / 3.0) + (w2[i] + n2[i] * f.h) * (2.0 * f.half[i] / 3.0))
        .collect()
}

fn prepare(field: &ScalarField, keep_mean: bool) -> Vec<Complex64> {
    let g = field.grid();
    let mut s = field.spectrum();
    if !keep_mean {
        s[0] = ZERO;
    }
    dealias(g, &mut s);
    s
}

struct RunOutput {
    traj: Trajectory,
    passive: Vec<Vec<ScalarField>>,
}

#[allow(clippy::too_many_arguments)]
fn run(
    omega0: &ScalarField,
    nu: f64,
    force: &ForceSpec,
    t_end: f64,
    dt: f64,
    snap_every: usize,
    passive0: &[&ScalarField],
    forced_passive: Option<usize>,
    opts: EvolveOptions,
) -> Result<RunOutput> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::InvalidArgument(format!("viscosity {nu} must be finite and non-negative")));
    }
    if !(dt > 0.0) || !(t_end > 0.0) || !dt.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("need T > 0 and dt > 0 (T = {t_end}, dt = {dt})")));
    }
    if snap_every == 0 {
        return Err(Error::InvalidArgument("snap_every must be positive".into()));
    }
    let steps_f = t_end / dt;
    let steps = steps_f.round() as usize;
    if steps == 0 || (steps_f - steps as f64).abs() > 1e-9 * steps_f.max(1.0) {
        return Err(Error::InvalidArgument(format!("T = {t_end} is not an integer multiple of dt = {dt}")));
    }
    omega0.ensure_mean_zero()?;
    let grid = omega0.grid().clone();
    for p in passive0 {
        same_grid(&grid, p.grid())?;
    }
    let ops = Operators::new(&grid, nu, force, forced_passive)?;
    let dx = grid.spacing();
    let units = 1u64 << opts.max_halvings;
    let dt_min = dt / units as f64;

    let mut w = prepare(omega0, false);
    let mut ps: Vec<Vec<Complex64>> = passive0.iter().map(|p| prepare(p, true)).collect();
    let mut ev = ops.eval(&w, &ps);
    if !ev.umax.is_finite() {
        return Err(Error::NonFinite { t: 0.0, step: 0 });
    }

    let mut ledger = BalanceLedger::new();
    let mut diss = 0.0;
    let mut work = 0.0;
    let entry = |t: f64, w: &[Complex64], ev: &Eval, diss: f64, work: f64| LedgerEntry {
        t,
        energy: ops.energy(w),
        cumulative_dissipation: diss,
        enstrophy: ops.enstrophy(w),
        l1_vorticity: ev.l1,
        cumulative_work: work,
    };
    ledger.push(entry(0.0, &w, &ev, diss, work));

    let mut times = vec![0.0];
    let mut snaps = vec![ScalarField::new(&grid, ev.omega_real.clone())?];
    let mut psnaps: Vec<Vec<ScalarField>> =
        ps.iter().map(|s| vec![ScalarField::from_spectrum(&grid, s)]).collect();

    let mut factors = ops.factors(dt);
    let mut warned = false;
    for step in 0..steps {
        let t_start = step as f64 * dt;
        let mut level = 0u32;
        let mut done = 0u64;
        while done < units {
            loop {
                let h = dt / (1u64 << level) as f64;
                if h * ev.umax / dx <= opts.cfl_max {
                    break;
                }
                if level == opts.max_halvings {
                    return Err(Error::StepTooSmall(dt_min, t_start + done as f64 * dt_min));
                }
                level += 1;
                if !warned {
                    warn!(
                        "CFL {:.3} exceeds {} at t = {:.6}; halving dt",
                        dt * ev.umax / dx,
                        opts.cfl_max,
                        t_start + done as f64 * dt_min
                    );
                    warned = true;
                }
            }
            let h = dt / (1u64 << level) as f64;
            if factors.h != h {
                factors = ops.factors(h);
            }
            let g0 = nu * ops.enstrophy(&w);
            let w1 = stage1(&factors, &w, &ev.n_omega);
            let p1: Vec<Vec<Complex64>> =
                ps.iter().zip(&ev.n_passive).map(|(s, n)| stage1(&factors, s, n)).collect();
            let ev1 = ops.eval(&w1, &p1);
            let g1 = nu * ops.enstrophy(&w1);
            let w2 = stage2(&factors, &w, &ev.n_omega, &ev1.n_omega);
            let p2: Vec<Vec<Complex64>> = ps
                .iter()
                .zip(&ev.n_passive)
                .zip(&ev1.n_passive)
                .map(|((s, n0), n1)| stage2(&factors, s, n0, n1))
                .collect();
            drop(p1);
            let ev2 = ops.eval(&w2, &p2);
            let g2 = nu * ops.enstrophy(&w2);
            let w3 = stage3(&factors, &w, &w2, &ev2.n_omega);
            let p3: Vec<Vec<Complex64>> = ps
                .iter()
                .zip(&p2)
                .zip(&ev2.n_passive)
                .map(|((s, s2), n2)| stage3(&factors, s, s2, n2))
                .collect();
            diss += h * (g0 / 6.0 + g1 / 6.0 + 2.0 * g2 / 3.0);
            work += h * (ev.work / 6.0 + ev1.work / 6.0 + 2.0 * ev2.work / 3.0);
            w = w3;
            ps = p3;
            done += units >> level;
            let t = if done == units { (step + 1) as f64 * dt } else { t_start + done as f64 * dt_min };
            ev = ops.eval(&w, &ps);
            if !ev.umax.is_finite() || !diss.is_finite() {
                return Err(Error::NonFinite { t, step: step + 1 });
            }
            ledger.push(entry(t, &w, &ev, diss, work));
        }
        if (step + 1) % snap_every == 0 || step + 1 == steps {
            times.push((step + 1) as f64 * dt);
            snaps.push(ScalarField::new(&grid, ev.omega_real.clone())?);
            for (acc, s) in psnaps.iter_mut().zip(&ps) {
                acc.push(ScalarField::from_spectrum(&grid, s));
            }
        }
    }
    let traj = Trajectory { nu, dt, snap_every, force: force.clone(), times, snapshots: snaps, ledger };
    Ok(RunOutput { traj, passive: psnaps })
}

/// Integrates the vorticity equation from `omega0` to time `t_end` with
/// nominal step `dt`, storing a snapshot every `snap_every` steps and at the
/// end. The initial field is truncated by the 2/3 rule; snapshot 0 is the
/// truncated field.
pub fn evolve(
    omega0: &ScalarField,
    nu: f64,
    force: &ForceSpec,
    t_end: f64,
    dt: f64,
    snap_every: usize,
) -> Result<Trajectory> {
    evolve_with(omega0, nu, force, t_end, dt, snap_every, EvolveOptions::default())
}

pub fn evolve_with(
    omega0: &ScalarField,
    nu: f64,
    force: &ForceSpec,
    t_end: f64,
    dt: f64,
    snap_every: usize,
    opts: EvolveOptions,
) -> Result<Trajectory> {
    Ok(run(omega0, nu, force, t_end, dt, snap_every, &[], None, opts)?.traj)
}

/// Re-integrates the parent run carrying f and μ as passive scalars in the
/// parent's velocity. Any force is attached to f.
pub fn evolve_decomposition(traj: &Trajectory, f0: &ScalarField, mu0: &ScalarField) -> Result<DecompositionPair> {
    if traj.snap_every() == 0 || !traj.dt().is_finite() {
        return Err(Error::InvalidArgument("parent trajectory lacks integration metadata".into()));
    }
    let grid = traj.grid();
    same_grid(grid, f0.grid())?;
    same_grid(grid, mu0.grid())?;
    let scale = mu0.max_abs().max(f0.max_abs());
    if mu0.min() < -1e-12 * scale {
        return Err(Error::InconsistentSplit(format!("mu0 has negative values (min {:e})", mu0.min())));
    }
    let sum = f0.add(mu0)?;
    let mut s = sum.spectrum();
    dealias(grid, &mut s);
    let sum = ScalarField::from_spectrum(grid, &s);
    let w0 = &traj.snapshots()[0];
    let err = sum.sub(w0)?.max_abs();
    if err > 1e-10 * w0.max_abs().max(f64::MIN_POSITIVE) && err > 1e-300 {
        return Err(Error::InconsistentSplit(format!("f0 + mu0 differs from omega0 by {err:e}")));
    }
    let out = run(
        w0,
        traj.nu(),
        traj.force(),
        traj.end_time(),
        traj.dt(),
        traj.snap_every(),
        &[f0, mu0],
        Some(0),
        EvolveOptions::default(),
    )?;
    let mut it = out.passive.into_iter();
    let f_part = it.next().unwrap();
    let mu_part = it.next().unwrap();
    Ok(DecompositionPair { times: out.traj.times().to_vec(), f_part, mu_part })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::norms::norms;

    fn taylor_green(g: &TorusGrid) -> ScalarField {
        ScalarField::from_fn(g, |x1, x2| -2.0 * x1.sin() * x2.sin())
    }

    #[test]
    fn zero_stays_zero() {
        let g = make_grid(16).unwrap();
        let tr = evolve(&ScalarField::zeros(&g), 0.1, &ForceSpec::None, 0.1, 0.01, 5).unwrap();
        assert_eq!(tr.times(), &[0.0, 0.05, 0.1]);
        assert!(tr.snapshots().iter().all(|s| s.max_abs() == 0.0));
    }

    #[test]
    fn taylor_green_decays_exactly() {
        let g = make_grid(32).unwrap();
        let nu = 0.05;
        let tr = evolve(&taylor_green(&g), nu, &ForceSpec::None, 0.5, 0.01, 10).unwrap();
        for (t, w) in tr.times().iter().zip(tr.snapshots()) {
            let exact = taylor_green(&g).scale((-2.0 * nu * t).exp());
            let err = norms(&w.sub(&exact).unwrap()).l2 / norms(&exact).l2;
            assert!(err < 1e-10, "t={t}: {err}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = make_grid(16).unwrap();
        let w = taylor_green(&g);
        assert!(evolve(&w, 0.1, &ForceSpec::None, 0.1, 0.03, 1).is_err());
        assert!(evolve(&w, 0.1, &ForceSpec::None, 0.1, 0.01, 0).is_err());
        let biased = w.map(|v| v + 1.0);
        assert!(matches!(evolve(&biased, 0.1, &ForceSpec::None, 0.1, 0.01, 1), Err(Error::NotMeanZero { .. })));
    }

    #[test]
    fn cfl_halving_keeps_nominal_times() {
        let g = make_grid(32).unwrap();
        // max|u| = 2; dt = 0.2 gives Courant ≈ 2, needs two halvings.
        let w = taylor_green(&g).scale(2.0);
        let tr = evolve(&w, 0.01, &ForceSpec::None, 0.4, 0.2, 1).unwrap();
        assert_eq!(tr.times(), &[0.0, 0.2, 0.4]);
        assert!(tr.ledger().entries().len() > 3);
    }

    #[test]
    fn too_large_step_errors() {
        let g = make_grid(32).unwrap();
        let w = taylor_green(&g).scale(1e6);
        let opts = EvolveOptions { cfl_max: 0.5, max_halvings: 2 };
        assert!(matches!(
            evolve_with(&w, 0.01, &ForceSpec::None, 0.1, 0.1, 1, opts),
            Err(Error::StepTooSmall(..))
        ));
    }
}
