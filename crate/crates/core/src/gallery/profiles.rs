//! Radial profiles with closed-form potentials, and 1-D quadrature.

use std::f64::consts::{PI, TAU};

use crate::field::ScalarField;
use crate::grid::TorusGrid;

/// Composite Simpson rule with `m` panels (rounded up to even).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let m = m + m % 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for k in 1..m {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// ∫ g(|x|) dx over the disk of radius `r1`, with breakpoints.
pub fn radial_integral(g: impl Fn(f64) -> f64, breaks: &[f64], r1: f64) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|b| *b > 0.0 && *b < r1).collect();
    pts.push(0.0);
    pts.push(r1);
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| simpson(|r| TAU * r * g(r), w[0], w[1], 2000)).sum()
}

fn e(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn de(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp() / (t * t)
    } else {
        0.0
    }
}

/// C^∞ cutoff: 1 on [0, a], 0 on [b, ∞).
#[derive(Clone, Copy, Debug)]
pub struct Cutoff {
    pub a: f64,
    pub b: f64,
}

impl Cutoff {
    pub fn value(&self, r: f64) -> f64 {
        let s = (r - self.a) / (self.b - self.a);
        let (p, q) = (e(1.0 - s), e(s));
        p / (p + q)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let s = (r - self.a) / (self.b - self.a);
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let (p, q) = (e(1.0 - s), e(s));
        let (dp, dq) = (-de(1.0 - s), de(s));
        (dp * q - p * dq) / ((p + q) * (p + q)) / (self.b - self.a)
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        let h = 1e-5 * (self.b - self.a);
        (self.derivative(r + h) - self.derivative(r - h)) / (2.0 * h)
    }
}

/// φ(r) = (1 − r²)^k on the unit disk.
#[derive(Clone, Copy, Debug)]
pub struct PolyBump {
    pub k: i32,
}

impl PolyBump {
    pub fn value(&self, r: f64) -> f64 {
        if r >= 1.0 {
            0.0
        } else {
            (1.0 - r * r).powi(self.k)
        }
    }

    /// Δφ = −4k(1 − r²)^{k−2}(1 − kr²).
    pub fn laplacian(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        let (k, t) = (self.k as f64, r * r);
        -4.0 * k * (1.0 - t).powi(self.k - 2) * (1.0 - k * t)
    }

    /// ‖∇φ‖²_{L²(ℝ²)} = 2πk/(2k − 1).
    pub fn grad_sq(&self) -> f64 {
        let k = self.k as f64;
        TAU * k / (2.0 * k - 1.0)
    }

    /// ‖Δφ‖_{L¹(ℝ²)} = 8π(1 − 1/k)^{k−1}.
    pub fn laplacian_l1(&self) -> f64 {
        let k = self.k as f64;
        8.0 * PI * (1.0 - 1.0 / k).powi(self.k - 1)
    }
}

/// Cut-off Newtonian potential of the polynomial mollifier
/// ρ_α = (k+1)/(πα²)·(1 − |x|²/α²)^k, i.e. χ·ψ̃ with Δψ̃ = ρ_α.
#[derive(Clone, Copy, Debug)]
pub struct LogPotential {
    pub alpha: f64,
    pub k: i32,
    pub cutoff: Cutoff,
}

impl LogPotential {
    pub fn new(alpha: f64) -> Self {
        LogPotential { alpha, k: 3, cutoff: Cutoff { a: 0.3, b: 0.95 } }
    }

    /// Mass of ρ_α inside radius r.
    fn mass(&self, r: f64) -> f64 {
        let t = r / self.alpha;
        if t >= 1.0 {
            1.0
        } else {
            1.0 - (1.0 - t * t).powi(self.k + 1)
        }
    }

    /// ψ̃(r); equals log(r)/2π outside the mollifier support.
    pub fn newtonian(&self, r: f64) -> f64 {
        let t = r / self.alpha;
        if t >= 1.0 {
            return r.ln() / TAU;
        }
        let u = 1.0 - t * t;
        let mut s = 0.0;
        let mut p = 1.0;
        for i in 1..=self.k + 1 {
            p *= u;
            s += p / i as f64;
        }
        (self.alpha.ln() - 0.5 * s) / TAU
    }

    pub fn newtonian_derivative(&self, r: f64) -> f64 {
        if r <= 0.0 {
            0.0
        } else {
            self.mass(r) / (TAU * r)
        }
    }

    pub fn density(&self, r: f64) -> f64 {
        let t = r / self.alpha;
        if t >= 1.0 {
            0.0
        } else {
            (self.k + 1) as f64 / (PI * self.alpha * self.alpha) * (1.0 - t * t).powi(self.k)
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        let c = self.cutoff.value(r);
        if c == 0.0 {
            0.0
        } else {
            c * self.newtonian(r)
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.cutoff.derivative(r) * self.newtonian(r) + self.cutoff.value(r) * self.newtonian_derivative(r)
    }

    /// Δψ = χρ_α + 2χ'ψ̃' + ψ̃(χ'' + χ'/r).
    pub fn laplacian(&self, r: f64) -> f64 {
        let c = &self.cutoff;
        let mut v = c.value(r) * self.density(r);
        if r > c.a && r < c.b {
            let d1 = c.derivative(r);
            v += 2.0 * d1 * self.newtonian_derivative(r) + self.newtonian(r) * (c.second_derivative(r) + d1 / r);
        }
        v
    }

    /// Radii where the integrands change regime.
    pub fn breaks(&self) -> Vec<f64> {
        vec![self.alpha, self.cutoff.a, self.cutoff.b]
    }

    pub fn support(&self) -> f64 {
        self.cutoff.b
    }
}

/// Mean-zero radial vorticity p(τ) = (1 − τ)^k(1 − (k+2)τ), τ = (r/R)².
#[derive(Clone, Copy, Debug)]
pub struct RadialPatchProfile {
    pub radius: f64,
    pub k: i32,
}

impl RadialPatchProfile {
    pub fn omega(&self, r: f64) -> f64 {
        let t = (r / self.radius).powi(2);
        if t >= 1.0 {
            0.0
        } else {
            (1.0 - t).powi(self.k) * (1.0 - (self.k + 2) as f64 * t)
        }
    }

    /// u_θ(r) = r^{-1}∫₀^r sω(s)ds = r(1 − τ)^{k+1}/2.
    pub fn u_theta(&self, r: f64) -> f64 {
        let t = (r / self.radius).powi(2);
        if t >= 1.0 {
            0.0
        } else {
            0.5 * r * (1.0 - t).powi(self.k + 1)
        }
    }

    /// ‖ω‖²_{L²(ℝ²)} = πR²∫₀¹(1−t)^{2k}(1−(k+2)t)²dt, by Beta integrals.
    pub fn omega_sq(&self) -> f64 {
        let k = self.k as f64;
        let c = k + 2.0;
        let a = 2.0 * k + 1.0;
        let i0 = 1.0 / a;
        let i1 = 1.0 / (a * (a + 1.0));
        let i2 = 2.0 / (a * (a + 1.0) * (a + 2.0));
        PI * self.radius * self.radius * (i0 - 2.0 * c * i1 + c * c * i2)
    }
}

/// Minimal-image offset of x from c on the 2π-periodic line.
#[inline]
pub fn offset(x: f64, c: f64) -> f64 {
    (x - c + PI).rem_euclid(TAU) - PI
}

/// Samples g(|x − center|) on the grid.
pub fn sample_radial(grid: &TorusGrid, center: (f64, f64), g: impl Fn(f64) -> f64) -> ScalarField {
    ScalarField::from_fn(grid, |x1, x2| g(offset(x1, center.0).hypot(offset(x2, center.1))))
}
