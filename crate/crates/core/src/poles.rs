//! Resonance poles: the fourth-quadrant zeros `k^(n)` of `D(k) = 4 a_k b_k`
//! and the per-resonance frequency, width and residue strength.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{DecayError, Result};
use crate::special::sinc;
use crate::spectral::{denominator, denominator_derivative, denominator_scale, Coupling};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// One resonance of the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonancePole {
    pub n: usize,
    /// Complex wavenumber, `Re k > |Im k|`, `Im k < 0`.
    pub k: Complex64,
    /// Diagonal residue strength `Z^(n)`; `1 - g/2 + O(g²)` for small `g`.
    pub z: Complex64,
    /// `(Re k)² - (Im k)²`.
    pub omega: f64,
    /// `-4 Re k Im k`.
    pub gamma: f64,
    pub g: f64,
    /// `|D(k)|` at the returned root.
    pub residual: f64,
}

impl ResonancePole {
    /// `e^{-i k² t} = e^{-iωt - Γt/2}`.
    pub fn time_factor(&self, t: f64) -> Complex64 {
        (-I * self.k * self.k * t).exp()
    }

    pub fn lifetime(&self) -> f64 {
        1.0 / self.gamma
    }

    /// `D'(k^(n))`, the residue denominator of the simple pole.
    pub fn derivative(&self) -> Complex64 {
        denominator_derivative(self.k, self.g)
    }

    /// Diagonal pole wavefunction `sqrt(2/π) Z sin(k x) e^{-iωt - Γt/2}`.
    pub fn wavefunction(&self, x: f64, t: f64) -> Complex64 {
        (2.0 / PI).sqrt() * self.z * (self.k * x).sin() * self.time_factor(t)
    }
}

/// Truncated small-coupling expansion `n - gn + g²n - iπg²n²`.
pub fn pole_seed(n: usize, g: Coupling) -> Complex64 {
    let nf = n as f64;
    let gv = g.value();
    Complex64::new(nf - gv * nf + gv * gv * nf, -PI * gv * gv * nf * nf)
}

/// Branch label of a zero of `b_k`: since `b_k = 0` is equivalent to
/// `e^{2πik} = 1 - 2πigk`, every such zero satisfies
/// `k - Log(1 - 2πigk)/(2πi) = n` for an integer `n`, which is the pole index.
pub fn branch_index(k: Complex64, g: f64) -> Complex64 {
    k - (1.0 - 2.0 * PI * I * g * k).ln() / (2.0 * PI * I)
}

/// Fixed point of `k = n + Log(1 - 2πigk)/(2πi)`.
///
/// The map contracts with factor `|g/(1 - 2πigk)| < 1/(2π|k|)`, so this
/// converges for every `n >= 1`, including the non-perturbative range `g n ≳ 1`
/// where [`pole_seed`] is useless.
pub fn branch_seed(n: usize, g: Coupling) -> Complex64 {
    let gv = g.value();
    let mut k = Complex64::new(n as f64, 0.0);
    for _ in 0..500 {
        let next = n as f64 + (1.0 - 2.0 * PI * I * gv * k).ln() / (2.0 * PI * I);
        let done = (next - k).norm() < 1e-15 * next.norm();
        k = next;
        if done {
            break;
        }
    }
    k
}

fn newton(mut k: Complex64, g: f64, tol: &Tolerances) -> Option<Complex64> {
    for _ in 0..tol.newton_max_iter {
        let d = denominator(k, g);
        let dp = denominator_derivative(k, g);
        let step = d / dp;
        if !(step.re.is_finite() && step.im.is_finite()) {
            return None;
        }
        k -= step;
        if step.norm() < tol.newton_step_tol * k.norm().max(1.0) {
            // one more step so the returned root sits at round-off level
            let d = denominator(k, g);
            let dp = denominator_derivative(k, g);
            let polish = d / dp;
            if polish.norm() < step.norm() {
                k -= polish;
            }
            return Some(k);
        }
    }
    None
}

fn in_fourth_quadrant(k: Complex64) -> bool {
    k.im < 0.0 && k.re > k.im.abs()
}

/// Locates the `n`-th pole with default tolerances.
pub fn find_pole(n: usize, g: Coupling) -> Result<ResonancePole> {
    find_pole_with(n, g, &Tolerances::default())
}

/// Locates the `n`-th pole.
///
/// Newton on the closed form of `D` from [`pole_seed`]; if that fails or lands
/// on another branch, restarts from a 3×3 grid of radius `g²n` around the seed
/// and finally from [`branch_seed`]. A root is accepted only if its
/// [`branch_index`] equals `n`.
pub fn find_pole_with(n: usize, g: Coupling, tol: &Tolerances) -> Result<ResonancePole> {
    if n == 0 {
        return Err(DecayError::domain("pole index n must be >= 1"));
    }
    let gv = g.value();
    let seed = pole_seed(n, g);
    let mut seeds = Vec::with_capacity(11);
    // The perturbative seed is only meaningful while g n stays small.
    if (gv * n as f64).abs() < 0.3 {
        seeds.push(seed);
        let radius = gv * gv * n as f64;
        for i in -1..=1 {
            for j in -1..=1 {
                if i != 0 || j != 0 {
                    seeds.push(seed + Complex64::new(i as f64 * radius, j as f64 * radius));
                }
            }
        }
    }
    seeds.push(branch_seed(n, g));

    let mut last = seed;
    for start in seeds {
        let Some(k) = newton(start, gv, tol) else {
            continue;
        };
        last = k;
        if (branch_index(k, gv) - n as f64).norm() > 1e-6 {
            continue;
        }
        if !in_fourth_quadrant(k) {
            return Err(DecayError::Constraint { n, k });
        }
        return Ok(assemble(n, k, gv));
    }
    Err(DecayError::Convergence { n, last })
}

fn assemble(n: usize, k: Complex64, g: f64) -> ResonancePole {
    let mut pole = ResonancePole {
        n,
        k,
        z: Complex64::new(0.0, 0.0),
        omega: k.re * k.re - k.im * k.im,
        gamma: -4.0 * k.re * k.im,
        g,
        residual: denominator(k, g).norm(),
    };
    pole.z = pole_strength(&pole, n);
    pole
}

/// Residue strength of pole `n` in the evolution of the initial mode `l`.
///
/// Defined so that the residue term equals
/// `sqrt(2/π) Z_{l,n} sin(k^(n) x) e^{-iωt - Γt/2}`:
/// `Z_{l,n} = -4i (-1)^l l sin(kπ) / ((k² - l²) D'(k))`.
/// For `l = n` this is the exact `Z^(n)`; for `l ≠ n` it is
/// `g c_{l,n} Z^(n) (1 + O(g))`.
pub fn pole_strength(pole: &ResonancePole, l: usize) -> Complex64 {
    let lf = l as f64;
    let k = pole.k;
    // (-1)^l sin(kπ)/(k² - l²) = π sinc(π(k - l))/(k + l)
    let shape = PI * sinc(PI * (k - lf)) / (k + lf);
    -4.0 * I * lf * shape / denominator_derivative(k, pole.g)
}

/// Off-diagonal mixing coefficient `c_{l,n} = (-1)^{l+n} 2ln/(l² - n²)`.
pub fn offdiagonal_coefficient(l: usize, n: usize) -> f64 {
    assert_ne!(l, n, "c_(l,n) is defined for l != n");
    let sign = if (l + n).is_multiple_of(2) { 1.0 } else { -1.0 };
    let (lf, nf) = (l as f64, n as f64);
    sign * 2.0 * lf * nf / (lf * lf - nf * nf)
}

/// Poles `1..=n_max` for one coupling, checked to be distinct.
#[derive(Debug, Clone)]
pub struct PoleTable {
    pub g: f64,
    pub poles: Vec<ResonancePole>,
}

impl PoleTable {
    pub fn compute(g: Coupling, n_max: usize, tol: &Tolerances) -> Result<Self> {
        let mut table = Self {
            g: g.value(),
            poles: Vec::with_capacity(n_max),
        };
        table.extend_to(n_max, tol)?;
        Ok(table)
    }

    pub fn extend_to(&mut self, n_max: usize, tol: &Tolerances) -> Result<()> {
        let g = Coupling::new(self.g)?;
        for n in self.poles.len() + 1..=n_max {
            let pole = find_pole_with(n, g, tol)?;
            if let Some(prev) = self.poles.last() {
                if (prev.k - pole.k).norm() < tol.pole_identity_tol {
                    return Err(DecayError::Convergence { n, last: pole.k });
                }
            }
            self.poles.push(pole);
        }
        Ok(())
    }

    /// Extends the table until a pole with `Γ t / 2 >= decay_exponent`
    /// has been added (or `max_poles` is reached); returns its index.
    pub fn extend_until_decayed(
        &mut self,
        t: f64,
        decay_exponent: f64,
        tol: &Tolerances,
    ) -> Result<usize> {
        loop {
            if let Some(last) = self.poles.last() {
                if last.gamma * t / 2.0 >= decay_exponent {
                    return Ok(last.n);
                }
            }
            let next = self.poles.len() + 1;
            if next > tol.max_poles {
                return Err(DecayError::Accuracy {
                    what: format!("pole table capped at {} poles", tol.max_poles),
                    estimate: self.poles.last().map_or(0.0, |p| p.gamma * t / 2.0),
                    tolerance: decay_exponent,
                });
            }
            self.extend_to(next, tol)?;
        }
    }

    pub fn get(&self, n: usize) -> Option<&ResonancePole> {
        self.poles.get(n.checked_sub(1)?)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ResonancePole> {
        self.poles.iter()
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }
}

/// Relative `|D(k)|`: `|D| / (sum of magnitudes of its terms)`.
pub fn relative_residual(k: Complex64, g: f64) -> f64 {
    denominator(k, g).norm() / denominator_scale(k, g)
}
