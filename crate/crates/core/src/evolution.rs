//! Time evolution of the cavity modes `sqrt(2/π) sin(lx)` prepared at `t = 0`.
//!
//! Three routes are offered and cross-validate each other:
//!
//! * **direct**: the spectral integral along the real `k` axis. The tail
//!   beyond a cut `K` is folded onto the vertical line `K - iy`, which is
//!   exact as long as every pole right of `K` has already decayed.
//! * **decomposed**: the integral along the ray `arg k = -π/4` (power part)
//!   plus the residues of the resonance poles (exponential part).
//! * **asymptotic**: the two leading terms of the large-`t` expansion of the
//!   power part.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{DecayError, Result};
use crate::poles::{offdiagonal_coefficient, pole_strength, PoleTable, ResonancePole};
use crate::quadrature::AdaptiveQuadrature;
use crate::special::sinc;
use crate::spectral::{
    bound_state, cavity_mode_complex, denominator, denominator_scale, BoundState, Coupling,
};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Exponent at which a decaying factor counts as zero.
const NEGLIGIBLE_EXPONENT: f64 = 40.0;
/// Earliest positive time accepted by the direct route.
pub const DIRECT_T_MIN: f64 = 1e-3;
/// Default cap on the number of residues summed by the decomposed route.
pub const DEFAULT_POLE_CAP: usize = 400;

fn prefactor() -> f64 {
    (2.0 / PI).powf(1.5)
}

fn parity(l: usize) -> f64 {
    if l.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// The prepared state `sqrt(2/π) sin(lx)` on `[0, π]`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InitialState {
    l: usize,
}

impl InitialState {
    pub fn new(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(DecayError::domain("mode number l must be >= 1"));
        }
        Ok(Self { l })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn value(&self, x: f64) -> f64 {
        if (0.0..=PI).contains(&x) {
            (2.0 / PI).sqrt() * (self.l as f64 * x).sin()
        } else {
            0.0
        }
    }
}

/// How a wavefunction value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Route {
    Direct,
    DecomposedTotal,
    PowerPart,
    ExponentialPart,
    Asymptotic,
}

impl Route {
    pub const ALL: [Route; 5] = [
        Route::Direct,
        Route::DecomposedTotal,
        Route::PowerPart,
        Route::ExponentialPart,
        Route::Asymptotic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Route::Direct => "direct",
            Route::DecomposedTotal => "decomposed",
            Route::PowerPart => "power",
            Route::ExponentialPart => "exponential",
            Route::Asymptotic => "asymptotic",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = DecayError;

    fn from_str(s: &str) -> Result<Self> {
        Route::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| {
                DecayError::domain(format!(
                    "unknown route '{s}' (expected direct, decomposed, power, exponential or asymptotic)"
                ))
            })
    }
}

/// One evaluated wavefunction value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSample {
    pub x: f64,
    pub t: f64,
    pub psi: Complex64,
    pub route: Route,
    /// Series truncation order, asymptotic route only.
    pub order: Option<u8>,
}

/// Uniform space grid on `[0, π]` times a list of instants.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionGrid {
    pub state: InitialState,
    pub g: Coupling,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
}

impl EvolutionGrid {
    pub fn new(state: InitialState, g: Coupling, nx: usize, ts: Vec<f64>) -> Result<Self> {
        if nx < 2 {
            return Err(DecayError::domain("x grid needs at least 2 points"));
        }
        if ts.is_empty() {
            return Err(DecayError::domain("time list is empty"));
        }
        if ts.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(DecayError::domain("times must be finite and >= 0"));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DecayError::domain("times must be strictly increasing"));
        }
        let xs = (0..nx).map(|j| PI * j as f64 / (nx - 1) as f64).collect();
        Ok(Self { state, g, xs, ts })
    }

    /// Checks every instant against the domain of `route`.
    pub fn validate_route(&self, route: Route, order: u8, tol: &Tolerances) -> Result<()> {
        self.ts
            .iter()
            .try_for_each(|&t| check_route(route, self.g, t, order, tol))
    }
}

/// Domain check shared by the grid, the CLI and [`Propagator::evaluate`].
pub fn check_route(route: Route, g: Coupling, t: f64, order: u8, tol: &Tolerances) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(DecayError::domain(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    match route {
        Route::Direct => {
            if t != 0.0 && !(DIRECT_T_MIN..=tol.t_direct_max).contains(&t) {
                return Err(DecayError::domain(format!(
                    "direct route needs t = 0 or {DIRECT_T_MIN} <= t <= {}, got {t}",
                    tol.t_direct_max
                )));
            }
        }
        Route::DecomposedTotal | Route::PowerPart | Route::ExponentialPart => {
            if !g.is_repulsive() {
                return Err(DecayError::domain(
                    "the power/exponential decomposition needs g > 0",
                ));
            }
            if t < tol.t_min_ray {
                return Err(DecayError::domain(format!(
                    "decomposed route needs t >= {}, got {t}",
                    tol.t_min_ray
                )));
            }
        }
        Route::Asymptotic => {
            if t < 1.0 {
                return Err(DecayError::domain(format!(
                    "asymptotic series needs t >= 1, got {t}"
                )));
            }
            if !(1..=2).contains(&order) {
                return Err(DecayError::domain(format!(
                    "series order must be 1 or 2, got {order}"
                )));
            }
        }
    }
    Ok(())
}

/// `(-1)^l l sin(kπ)/(k² - l²)`, analytic through `k = ±l`.
fn mode_kernel(k: Complex64, l: usize) -> Complex64 {
    let lf = l as f64;
    if (k - lf).norm() < 0.25 {
        lf * PI * sinc(PI * (k - lf)) / (k + lf)
    } else if (k + lf).norm() < 0.25 {
        lf * PI * sinc(PI * (k + lf)) / (k - lf)
    } else {
        parity(l) * lf * (PI * k).sin() / ((k - lf) * (k + lf))
    }
}

/// Expansion coefficient `φ_k^(l) = (2/π) N_k(g) (-1)^l l sin(kπ)/(k² - l²)`
/// of the prepared state on the continuum eigenfunctions.
pub fn spectral_coefficient(k: f64, l: usize, g: Coupling) -> Result<f64> {
    if !(k.is_finite() && k > 0.0) {
        return Err(DecayError::domain(format!(
            "wavenumber must be real and > 0, got {k}"
        )));
    }
    InitialState::new(l)?;
    let kc = Complex64::new(k, 0.0);
    let reduced = 1.0 / denominator(kc, g.value()).re.sqrt();
    Ok(2.0 / PI * reduced * mode_kernel(kc, l).re)
}

fn checked_inverse_denominator(k: Complex64, g: f64, tol: &Tolerances) -> Result<Complex64> {
    let d = denominator(k, g);
    let scale = denominator_scale(k, g);
    if d.norm() < tol.pole_proximity * scale {
        return Err(DecayError::PoleProximity {
            k,
            distance: d.norm() / scale,
        });
    }
    Ok(1.0 / d)
}

/// The spectral integrand `p^(l)(k; x, g)` for `x` in the cavity.
pub fn integrand_p(k: Complex64, l: usize, g: Coupling, x: f64) -> Result<Complex64> {
    integrand_p_with(k, l, g, x, &Tolerances::default())
}

pub fn integrand_p_with(
    k: Complex64,
    l: usize,
    g: Coupling,
    x: f64,
    tol: &Tolerances,
) -> Result<Complex64> {
    InitialState::new(l)?;
    if !(0.0..=PI).contains(&x) {
        return Err(DecayError::domain(format!("x must lie in [0, π], got {x}")));
    }
    if k == ZERO {
        return Ok(ZERO);
    }
    let inv = checked_inverse_denominator(k, g.value(), tol)?;
    Ok(mode_kernel(k, l) * (k * x).sin() * inv)
}

/// Power and exponential parts of the decomposed evolution on a set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub power: Vec<Complex64>,
    pub exponential: Vec<Complex64>,
    /// Number of residues included.
    pub poles_used: usize,
    /// Bound on the first omitted residue term.
    pub truncation_bound: f64,
}

impl Decomposition {
    pub fn total(&self) -> Vec<Complex64> {
        self.power
            .iter()
            .zip(&self.exponential)
            .map(|(p, e)| p + e)
            .collect()
    }
}

/// Residue sum together with its truncation data.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueSum {
    pub values: Vec<Complex64>,
    pub poles_used: usize,
    pub truncation_bound: f64,
}

/// Evaluator for one initial mode and coupling.
///
/// Pole data are computed on demand and cached; the cache only grows and its
/// contents do not depend on the order of requests, so a `Propagator` can be
/// shared between threads.
#[derive(Debug)]
pub struct Propagator {
    state: InitialState,
    g: Coupling,
    tol: Tolerances,
    poles: RwLock<PoleTable>,
    bound: Option<BoundState>,
}

impl Propagator {
    pub fn new(state: InitialState, g: Coupling) -> Self {
        Self::with_tolerances(state, g, Tolerances::default())
    }

    pub fn with_tolerances(state: InitialState, g: Coupling, tol: Tolerances) -> Self {
        Self {
            state,
            g,
            tol,
            poles: RwLock::new(PoleTable {
                g: g.value(),
                poles: Vec::new(),
            }),
            bound: bound_state(g),
        }
    }

    pub fn state(&self) -> InitialState {
        self.state
    }

    pub fn coupling(&self) -> Coupling {
        self.g
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// Pole `n`, computing the table up to `n` if needed.
    pub fn pole(&self, n: usize) -> Result<ResonancePole> {
        if n == 0 {
            return Err(DecayError::domain("pole index n must be >= 1"));
        }
        if let Some(p) = self.poles.read().expect("pole cache poisoned").get(n) {
            return Ok(*p);
        }
        if n > self.tol.max_poles {
            return Err(DecayError::Accuracy {
                what: format!("pole {n} requested beyond max_poles"),
                estimate: n as f64,
                tolerance: self.tol.max_poles as f64,
            });
        }
        let mut table = self.poles.write().expect("pole cache poisoned");
        table.extend_to(n, &self.tol)?;
        Ok(*table.get(n).expect("table extended"))
    }

    fn check_points(&self, xs: &[f64], allow_outside: bool) -> Result<()> {
        for &x in xs {
            let ok = x.is_finite() && x >= 0.0 && (allow_outside || x <= PI);
            if !ok {
                let range = if allow_outside { "[0, ∞)" } else { "[0, π]" };
                return Err(DecayError::domain(format!(
                    "x must lie in {range}, got {x}"
                )));
            }
        }
        Ok(())
    }

    /// `(2/π)^{3/2} (-1)^l l sin(kπ)/((k² - l²) D(k)) e^{-ik²t}`.
    fn spectral_weight(&self, k: Complex64, t: f64) -> Result<Complex64> {
        let inv = checked_inverse_denominator(k, self.g.value(), &self.tol)?;
        Ok(prefactor() * mode_kernel(k, self.state.l) * inv * (-I * k * k * t).exp())
    }

    /// Dispatches to the requested route. `n_poles` caps the residue sum and
    /// `order` selects the series truncation.
    pub fn evaluate(
        &self,
        route: Route,
        xs: &[f64],
        t: f64,
        n_poles: usize,
        order: u8,
    ) -> Result<Vec<Complex64>> {
        check_route(route, self.g, t, order, &self.tol)?;
        match route {
            Route::Direct => self.direct(xs, t),
            Route::DecomposedTotal => Ok(self.decomposed(xs, t, n_poles)?.total()),
            Route::PowerPart => self.power_part(xs, t),
            Route::ExponentialPart => Ok(self.exponential_part(xs, t, n_poles)?.values),
            Route::Asymptotic => self.asymptotic(xs, t, order),
        }
    }

    /// Same as [`Propagator::evaluate`], tagged per point.
    pub fn samples(
        &self,
        route: Route,
        xs: &[f64],
        t: f64,
        n_poles: usize,
        order: u8,
    ) -> Result<Vec<WaveSample>> {
        let values = self.evaluate(route, xs, t, n_poles, order)?;
        Ok(xs
            .iter()
            .zip(values)
            .map(|(&x, psi)| WaveSample {
                x,
                t,
                psi,
                route,
                order: (route == Route::Asymptotic).then_some(order),
            })
            .collect())
    }

    // ---------------------------------------------------------------- direct

    /// `ψ(x, t)` from the spectral integral along the real axis.
    ///
    /// Points beyond the barrier (`x > π`) are accepted here, so that the
    /// probability carried away from the cavity can be accounted for.
    pub fn direct(&self, xs: &[f64], t: f64) -> Result<Vec<Complex64>> {
        check_route(Route::Direct, self.g, t, 1, &self.tol)?;
        self.check_points(xs, true)?;
        if xs.is_empty() {
            return Ok(Vec::new());
        }
        let mut values = if t == 0.0 {
            self.direct_initial(xs)?
        } else {
            self.direct_evolved(xs, t)?
        };
        if let Some(b) = &self.bound {
            let weight = b.overlap_with_mode(self.state.l) * (I * b.k2 * b.k2 * t).exp();
            for (v, &x) in values.iter_mut().zip(xs) {
                *v += weight * b.value(x);
            }
        }
        Ok(values)
    }

    fn quadrature(&self) -> AdaptiveQuadrature {
        AdaptiveQuadrature::new(self.tol.direct_abs_tol, self.tol.direct_rel_tol)
            .with_max_panels(2_000_000)
    }

    fn accuracy_gate(
        what: &str,
        r: &crate::quadrature::QuadratureResult,
        target: f64,
    ) -> Result<()> {
        if !r.converged {
            return Err(DecayError::Accuracy {
                what: what.to_string(),
                estimate: r.error,
                tolerance: target,
            });
        }
        Ok(())
    }

    /// `t = 0`: the free part of the integrand integrates to the initial
    /// state in closed form; only the barrier correction is integrated.
    fn direct_initial(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        let g = self.g.value();
        let l = self.state.l;
        let lf = l as f64;
        let target = 1e-9;
        // Tail of the correction is bounded by l (1/(π|g|) + 1/(π²g²)) / K³.
        let amplitude = lf * (1.0 / (PI * g.abs()) + 1.0 / (PI * PI * g * g));
        let cutoff = (amplitude / target).cbrt().max(4.0 * lf + 4.0);
        if cutoff > 1e6 {
            return Err(DecayError::Accuracy {
                what: "t = 0 spectral integral needs a cutoff beyond 1e6".into(),
                estimate: cutoff,
                tolerance: 1e6,
            });
        }
        let x_max = xs.iter().cloned().fold(0.0, f64::max);
        let width = (PI / (x_max + 2.0 * PI)).min(0.5);
        let breaks = uniform_breaks(0.0, cutoff, width);
        let mut fail = None;
        let r = self.quadrature().integrate(xs.len(), &breaks, |k, out| {
            let kc = Complex64::new(k, 0.0);
            match self.spectral_weight(kc, 0.0) {
                Ok(w) => {
                    let free = prefactor() * mode_kernel(kc, l).re;
                    for (o, &x) in out.iter_mut().zip(xs) {
                        let u = cavity_mode_complex(kc, g, x).re;
                        *o = w * u - free * (k * x).sin();
                    }
                }
                Err(e) => {
                    fail.get_or_insert(e);
                    out.fill(ZERO);
                }
            }
        });
        if let Some(e) = fail {
            return Err(e);
        }
        Self::accuracy_gate("t = 0 spectral integral", &r, self.tol.direct_abs_tol)?;
        let state = self.state;
        Ok(r.values
            .iter()
            .zip(xs)
            .map(|(v, &x)| v + state.value(x))
            .collect())
    }

    /// Picks the closure abscissae `K1 < K2`, halfway between consecutive
    /// pole real parts, beyond which every pole term is below `e^{-40}`.
    fn closure_points(&self, t: f64, excess: f64) -> Result<(f64, f64, Vec<f64>)> {
        let lf = self.state.l as f64;
        let k_floor = (4.0 * lf + 4.0).max(excess / t);
        let decayed = |p: &ResonancePole| {
            -p.k.im * (2.0 * p.k.re * t - excess) >= NEGLIGIBLE_EXPONENT && p.k.re > k_floor
        };
        let mut n = 2;
        loop {
            let prev = self.pole(n - 1)?;
            let cur = self.pole(n)?;
            let next = self.pole(n + 1)?;
            let after = self.pole(n + 2)?;
            if prev.k.re > k_floor && decayed(&cur) && decayed(&next) && decayed(&after) {
                let k1 = 0.5 * (prev.k.re + cur.k.re);
                let k2 = 0.5 * (cur.k.re + next.k.re);
                let peaks = (1..n)
                    .map(|m| self.pole(m).map(|p| p.k.re))
                    .collect::<Result<_>>()?;
                return Ok((k1, k2, peaks));
            }
            n += 1;
        }
    }

    fn direct_evolved(&self, xs: &[f64], t: f64) -> Result<Vec<Complex64>> {
        let g = self.g.value();
        let x_max = xs.iter().cloned().fold(0.0, f64::max);
        let excess = (x_max - PI).max(0.0);
        let (k1, k2, peaks) = self.closure_points(t, excess)?;
        let dim = xs.len();
        let quad = self.quadrature();

        let mut fail: Option<DecayError> = None;
        let mut real_axis = |a: f64, b: f64, peaks: &[f64]| {
            let width = (PI / (x_max + 2.0 * PI)).min(0.5);
            let mut breaks = uniform_breaks(a, b, width);
            breaks.extend(peaks.iter().copied().filter(|&p| p > a && p < b));
            // One break per period of the phase k²t.
            let j0 = (a * a * t / (2.0 * PI)).ceil() as usize;
            let j1 = (b * b * t / (2.0 * PI)).floor() as usize;
            breaks.extend((j0.max(1)..=j1).map(|j| (2.0 * PI * j as f64 / t).sqrt()));
            breaks.sort_by(f64::total_cmp);
            breaks.dedup_by(|p, q| (*p - *q).abs() < 1e-12);
            quad.integrate(dim, &breaks, |k, out| {
                let kc = Complex64::new(k, 0.0);
                match self.spectral_weight(kc, t) {
                    Ok(w) => {
                        for (o, &x) in out.iter_mut().zip(xs) {
                            *o = w * cavity_mode_complex(kc, g, x).re;
                        }
                    }
                    Err(e) => {
                        fail.get_or_insert(e);
                        out.fill(ZERO);
                    }
                }
            })
        };
        let main = real_axis(0.0, k1, &peaks);
        let bridge = real_axis(k1, k2, &[]);
        if let Some(e) = fail.take() {
            return Err(e);
        }
        Self::accuracy_gate(
            "real-axis spectral integral",
            &main,
            self.tol.direct_abs_tol,
        )?;
        Self::accuracy_gate(
            "real-axis spectral integral",
            &bridge,
            self.tol.direct_abs_tol,
        )?;

        let v1 = self.vertical_closure(xs, t, k1, excess)?;
        let v2 = self.vertical_closure(xs, t, k2, excess)?;
        let mismatch = (0..dim)
            .map(|j| (v1[j] - bridge.values[j] - v2[j]).norm())
            .fold(0.0, f64::max);
        if mismatch > self.tol.direct_crosscheck {
            return Err(DecayError::Accuracy {
                what: "direct route closure cross-check".into(),
                estimate: mismatch,
                tolerance: self.tol.direct_crosscheck,
            });
        }
        Ok((0..dim).map(|j| main.values[j] + v1[j]).collect())
    }

    /// `∫_K^{K - i y_max}` of the integrand, with `e^{-2Kyt}` below `e^{-40}`
    /// (after the growth of the outgoing wave) at `y_max`.
    fn vertical_closure(
        &self,
        xs: &[f64],
        t: f64,
        cut: f64,
        excess: f64,
    ) -> Result<Vec<Complex64>> {
        let g = self.g.value();
        let rate = 2.0 * cut * t - excess;
        let y_max = NEGLIGIBLE_EXPONENT / rate;
        if y_max * PI > 300.0 {
            return Err(DecayError::Accuracy {
                what: "vertical closure would overflow".into(),
                estimate: y_max,
                tolerance: 300.0 / PI,
            });
        }
        let breaks = uniform_breaks(0.0, y_max, (y_max / 8.0).min(0.25));
        let mut fail = None;
        let r = self.quadrature().integrate(xs.len(), &breaks, |y, out| {
            let k = Complex64::new(cut, -y);
            match self.spectral_weight(k, t) {
                Ok(w) => {
                    for (o, &x) in out.iter_mut().zip(xs) {
                        *o = -I * w * cavity_mode_complex(k, g, x);
                    }
                }
                Err(e) => {
                    fail.get_or_insert(e);
                    out.fill(ZERO);
                }
            }
        });
        if let Some(e) = fail {
            return Err(e);
        }
        Self::accuracy_gate("vertical closure integral", &r, self.tol.direct_abs_tol)?;
        Ok(r.values)
    }

    // ------------------------------------------------------------ decomposed

    /// Power part: the integral along the ray `k = κ e^{-iπ/4}`.
    pub fn power_part(&self, xs: &[f64], t: f64) -> Result<Vec<Complex64>> {
        check_route(Route::PowerPart, self.g, t, 1, &self.tol)?;
        self.check_points(xs, false)?;
        if xs.is_empty() {
            return Ok(Vec::new());
        }
        let sqrt_t = t.sqrt();
        let u_max = NEGLIGIBLE_EXPONENT.sqrt() + 4.0 * sqrt_t;
        self.check_ray_clearance(u_max / sqrt_t)?;

        let dir = Complex64::from_polar(1.0 / sqrt_t, -FRAC_PI_4);
        let g = self.g.value();
        let l = self.state.l;
        let breaks = uniform_breaks(0.0, u_max, 0.5);
        let quad =
            AdaptiveQuadrature::new(self.tol.ray_abs_tol * t.powf(-1.5), self.tol.ray_rel_tol)
                .with_max_panels(200_000);
        let mut fail = None;
        let r = quad.integrate(xs.len(), &breaks, |u, out| {
            let k = dir * u;
            if u == 0.0 {
                out.fill(ZERO);
                return;
            }
            match checked_inverse_denominator(k, g, &self.tol) {
                Ok(inv) => {
                    let w = mode_kernel(k, l) * inv * (-u * u).exp();
                    for (o, &x) in out.iter_mut().zip(xs) {
                        *o = w * (k * x).sin();
                    }
                }
                Err(e) => {
                    fail.get_or_insert(e);
                    out.fill(ZERO);
                }
            }
        });
        if let Some(e) = fail {
            return Err(e);
        }
        Self::accuracy_gate("ray integral", &r, quad.abs_tol)?;
        let factor = Complex64::from_polar(prefactor() / sqrt_t, -FRAC_PI_4);
        Ok(r.values.into_iter().map(|v| factor * v).collect())
    }

    /// Refuses the ray if a pole sits within `ray_pole_distance` of it.
    fn check_ray_clearance(&self, kappa_max: f64) -> Result<()> {
        let mut n = 1;
        loop {
            let p = self.pole(n)?;
            if p.k.norm() > kappa_max + 1.0 {
                return Ok(());
            }
            let distance = p.k.norm() * (p.k.arg() + FRAC_PI_4).sin();
            if distance < self.tol.ray_pole_distance {
                return Err(DecayError::PoleProximity { k: p.k, distance });
            }
            n += 1;
        }
    }

    /// Exponential part: residues of the poles `1..=n_poles`, stopping early
    /// once the bound on the terms drops below `residue_truncation`.
    pub fn exponential_part(&self, xs: &[f64], t: f64, n_poles: usize) -> Result<ResidueSum> {
        check_route(Route::ExponentialPart, self.g, t, 1, &self.tol)?;
        self.check_points(xs, false)?;
        if n_poles == 0 {
            return Err(DecayError::domain("n_poles must be >= 1"));
        }
        let x_max = xs.iter().cloned().fold(0.0, f64::max);
        let l = self.state.l;
        let term_bound = |p: &ResonancePole| {
            (2.0 / PI).sqrt()
                * pole_strength(p, l).norm()
                * (-p.k.im * x_max).cosh()
                * p.time_factor(t).norm()
        };
        let cap = n_poles.min(self.tol.max_poles);
        let mut values = vec![ZERO; xs.len()];
        let mut quiet = 0;
        let mut bound = f64::INFINITY;
        let mut used = 0;
        for n in 1..=cap {
            let p = self.pole(n)?;
            let amp = (2.0 / PI).sqrt() * pole_strength(&p, l) * p.time_factor(t);
            for (v, &x) in values.iter_mut().zip(xs) {
                *v += amp * (p.k * x).sin();
            }
            used = n;
            bound = term_bound(&p);
            if n > l && bound < self.tol.residue_truncation {
                quiet += 1;
                if quiet >= 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        if quiet < 2 && used < self.tol.max_poles {
            bound = term_bound(&self.pole(used + 1)?);
        }
        Ok(ResidueSum {
            values,
            poles_used: used,
            truncation_bound: bound,
        })
    }

    pub fn decomposed(&self, xs: &[f64], t: f64, n_poles: usize) -> Result<Decomposition> {
        let power = self.power_part(xs, t)?;
        let exp = self.exponential_part(xs, t, n_poles)?;
        Ok(Decomposition {
            power,
            exponential: exp.values,
            poles_used: exp.poles_used,
            truncation_bound: exp.truncation_bound,
        })
    }

    // ------------------------------------------------------------ asymptotic

    /// Leading (`order = 1`) or two leading (`order = 2`) terms of the
    /// large-`t` expansion of the power part.
    pub fn asymptotic(&self, xs: &[f64], t: f64, order: u8) -> Result<Vec<Complex64>> {
        check_route(Route::Asymptotic, self.g, t, order, &self.tol)?;
        self.check_points(xs, false)?;
        let g = self.g.value();
        let lf = self.state.l as f64;
        let ratio = g / (1.0 + g);
        let lead = Complex64::from_polar(1.0 / 2f64.sqrt(), FRAC_PI_4) * parity(self.state.l) / lf
            * ratio
            * ratio
            / t.powf(1.5);
        Ok(xs
            .iter()
            .map(|&x| {
                let mut series = Complex64::new(1.0, 0.0);
                if order >= 2 {
                    let bracket = 1.0 / (lf * lf) + PI * PI / 6.0 + 2.0 / 3.0 * PI * PI * ratio
                        - PI * PI * ratio * ratio
                        - x * x / 6.0;
                    series -= 1.5 * I / t * bracket;
                }
                lead * x * series
            })
            .collect())
    }

    // --------------------------------------------------------- pole picture

    /// Diagonal pole wavefunction `ψ_pole^(n)` with exact `Z^(n)` and `k^(n)`.
    pub fn pole_term(&self, n: usize, xs: &[f64], t: f64) -> Result<Vec<Complex64>> {
        self.check_points(xs, false)?;
        let p = self.pole(n)?;
        Ok(xs.iter().map(|&x| p.wavefunction(x, t)).collect())
    }

    /// `ψ_pole^(l)`, optionally plus `g Σ_{n≠l} c_{l,n} ψ_pole^(n)` truncated like
    /// the residue sum.
    pub fn pole_approximation(
        &self,
        xs: &[f64],
        t: f64,
        include_offdiagonal: bool,
        n_poles: usize,
    ) -> Result<Vec<Complex64>> {
        let g = self.g.value();
        if !(g > 0.0 && g <= 0.3) {
            return Err(DecayError::domain(format!(
                "pole approximation needs 0 < g <= 0.3, got {g}"
            )));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(DecayError::domain(format!(
                "time must be finite and >= 0, got {t}"
            )));
        }
        let l = self.state.l;
        let mut values = self.pole_term(l, xs, t)?;
        if !include_offdiagonal {
            return Ok(values);
        }
        let x_max = xs.iter().cloned().fold(0.0, f64::max);
        let mut quiet = 0;
        for n in (1..=n_poles.min(self.tol.max_poles)).filter(|&n| n != l) {
            let p = self.pole(n)?;
            let c = g * offdiagonal_coefficient(l, n);
            for (v, &x) in values.iter_mut().zip(xs) {
                *v += c * p.wavefunction(x, t);
            }
            let bound = c.abs() * p.z.norm() * (-p.k.im * x_max).cosh() * p.time_factor(t).norm();
            if n > l && bound < self.tol.residue_truncation {
                quiet += 1;
                if quiet >= 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        Ok(values)
    }
}

fn uniform_breaks(a: f64, b: f64, max_width: f64) -> Vec<f64> {
    let panels = ((b - a) / max_width).ceil().max(1.0) as usize;
    (0..=panels)
        .map(|i| {
            if i == panels {
                b
            } else {
                a + (b - a) * i as f64 / panels as f64
            }
        })
        .collect()
}

/// Single-point direct evolution with default tolerances.
pub fn evolve_direct(state: InitialState, g: Coupling, x: f64, t: f64) -> Result<Complex64> {
    Ok(Propagator::new(state, g).direct(&[x], t)?[0])
}

/// Single-point decomposition `(ψ_pow, ψ_exp)` with default tolerances.
pub fn evolve_decomposed(
    state: InitialState,
    g: Coupling,
    x: f64,
    t: f64,
    n_poles: usize,
) -> Result<(Complex64, Complex64)> {
    let d = Propagator::new(state, g).decomposed(&[x], t, n_poles)?;
    Ok((d.power[0], d.exponential[0]))
}

pub fn asymptotic_psi_pow(
    state: InitialState,
    g: Coupling,
    x: f64,
    t: f64,
    order: u8,
) -> Result<Complex64> {
    Ok(Propagator::new(state, g).asymptotic(&[x], t, order)?[0])
}

pub fn pole_approximation(
    state: InitialState,
    g: Coupling,
    x: f64,
    t: f64,
    include_offdiagonal: bool,
) -> Result<Complex64> {
    Ok(Propagator::new(state, g).pole_approximation(
        &[x],
        t,
        include_offdiagonal,
        DEFAULT_POLE_CAP,
    )?[0])
}
