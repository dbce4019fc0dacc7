//! Integrated diagnostics: cavity norms of the evolved state and of its
//! power and exponential parts, the time at which the power tail takes over,
//! and the competition between diagonal and off-diagonal pole terms.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{DecayError, Result};
use crate::evolution::{check_route, InitialState, Propagator, Route, DEFAULT_POLE_CAP};
use crate::poles::ResonancePole;
use crate::quadrature::CompositeGauss;
use crate::spectral::Coupling;

const GAUSS_ORDER: usize = 16;
const MAX_PANELS: usize = 256;

/// `∫_0^π |f(x)|² dx` with composite Gauss panels, doubled from 4×16 nodes
/// until two successive values agree to `rel_tol`.
pub fn cavity_norm<F>(mut f: F, rel_tol: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<Vec<Complex64>>,
{
    let mut panels = 4;
    let mut previous: Option<f64> = None;
    loop {
        let rule = CompositeGauss::new(0.0, PI, panels, GAUSS_ORDER);
        let values = f(&rule.nodes)?;
        let density: Vec<f64> = values.iter().map(|z| z.norm_sqr()).collect();
        let norm = rule.apply(&density);
        if let Some(prev) = previous {
            let change = (norm - prev).abs();
            if change <= rel_tol * norm.abs().max(f64::MIN_POSITIVE) {
                return Ok(norm);
            }
            if panels >= MAX_PANELS {
                return Err(DecayError::Accuracy {
                    what: "cavity norm quadrature".into(),
                    estimate: change / norm.abs().max(f64::MIN_POSITIVE),
                    tolerance: rel_tol,
                });
            }
        }
        previous = Some(norm);
        panels *= 2;
    }
}

/// `∫_0^π |ψ(x, t)|² dx` along the given route.
pub fn survival_probability(prop: &Propagator, t: f64, route: Route) -> Result<f64> {
    check_route(route, prop.coupling(), t, 2, prop.tolerances())?;
    let tol = prop.tolerances().norm_tol;
    cavity_norm(|xs| prop.evaluate(route, xs, t, DEFAULT_POLE_CAP, 2), tol)
}

/// `∫_0^π |ψ_pole^(n)|² dx` in closed form, using
/// `|sin((α + iβ)x)|² = (cosh 2βx - cos 2αx)/2`.
pub fn pole_norm(pole: &ResonancePole, t: f64) -> f64 {
    let (a, b) = (pole.k.re, pole.k.im);
    let cosh_part = if b == 0.0 {
        PI
    } else {
        (2.0 * b * PI).sinh() / (2.0 * b)
    };
    let cos_part = (2.0 * a * PI).sin() / (2.0 * a);
    2.0 / PI * pole.z.norm_sqr() * 0.5 * (cosh_part - cos_part) * (-pole.gamma * t).exp()
}

/// Integrated norms on a list of instants.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries {
    pub l: usize,
    pub g: f64,
    pub times: Vec<f64>,
    /// Norm of the full state (direct route up to `t_direct_max`, decomposed beyond).
    pub total: Vec<f64>,
    /// Norm of the ray-integral part; `None` where the decomposition is not defined.
    pub power: Vec<Option<f64>>,
    /// Norm of the residue sum; `None` where the decomposition is not defined.
    pub exponential: Vec<Option<f64>>,
    /// Norm of the diagonal pole wavefunction `ψ_pole^(n)`.
    pub per_pole: BTreeMap<usize, Vec<f64>>,
}

/// Rejects empty, negative, non-finite or non-increasing time lists.
pub fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(DecayError::domain("time list is empty"));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(DecayError::domain("times must be finite and >= 0"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DecayError::domain("times must be strictly increasing"));
    }
    Ok(())
}

/// Norms at a single instant: `(total, power, exponential)`.
pub fn norms_at(prop: &Propagator, t: f64) -> Result<(f64, Option<f64>, Option<f64>)> {
    let tol = prop.tolerances();
    let decomposable = check_route(Route::DecomposedTotal, prop.coupling(), t, 2, tol).is_ok();
    let total_route = if t <= tol.t_direct_max {
        Route::Direct
    } else {
        Route::DecomposedTotal
    };
    let total = survival_probability(prop, t, total_route)?;
    if !decomposable {
        return Ok((total, None, None));
    }
    let power = survival_probability(prop, t, Route::PowerPart)?;
    let exponential = survival_probability(prop, t, Route::ExponentialPart)?;
    Ok((total, Some(power), Some(exponential)))
}

/// Norm series on `times`, with per-pole curves for the indices in `poles`.
pub fn decay_series(prop: &Propagator, times: &[f64], poles: &[usize]) -> Result<DecaySeries> {
    check_times(times)?;
    let mut series = DecaySeries {
        l: prop.state().l(),
        g: prop.coupling().value(),
        times: times.to_vec(),
        total: Vec::with_capacity(times.len()),
        power: Vec::with_capacity(times.len()),
        exponential: Vec::with_capacity(times.len()),
        per_pole: BTreeMap::new(),
    };
    for &t in times {
        let (total, power, exponential) = norms_at(prop, t)?;
        series.total.push(total);
        series.power.push(power);
        series.exponential.push(exponential);
    }
    for &n in poles {
        let pole = prop.pole(n)?;
        series
            .per_pole
            .insert(n, times.iter().map(|&t| pole_norm(&pole, t)).collect());
    }
    Ok(series)
}

/// Power and exponential norms only (the two curves of the decay plot).
pub fn component_norms(prop: &Propagator, t: f64) -> Result<(f64, f64)> {
    Ok((
        survival_probability(prop, t, Route::PowerPart)?,
        survival_probability(prop, t, Route::ExponentialPart)?,
    ))
}

/// Where the power-tail norm overtakes the exponential norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossover {
    pub time: f64,
    /// `ln(1/g)/g²`, the natural scale of the crossover.
    pub estimate: f64,
}

impl Crossover {
    pub fn ratio(&self) -> f64 {
        self.time / self.estimate
    }
}

/// Domain of [`crossover_time`].
pub fn check_crossover(g: Coupling) -> Result<()> {
    let g = g.value();
    if !(g > 0.0 && g <= 0.5) {
        return Err(DecayError::domain(format!(
            "crossover needs 0 < g <= 0.5, got {g}"
        )));
    }
    Ok(())
}

/// Smallest `t >= t_min_ray` at which `∫|ψ_pow|² >= ∫|ψ_exp|²` after an
/// exponential-dominated stretch, located by a geometric scan followed by
/// bisection in `ln t`.
pub fn crossover_time(prop: &Propagator) -> Result<Crossover> {
    check_crossover(prop.coupling())?;
    let g = prop.coupling().value();
    let tol = prop.tolerances();
    let cap = 1e4 / (g * g);
    let power_leads = |t: f64| -> Result<bool> {
        let (p, e) = component_norms(prop, t)?;
        Ok(p >= e)
    };
    let step = 1.25_f64;
    let mut lo = tol.t_min_ray;
    let mut seen_exponential = !power_leads(lo)?;
    let mut hi = None;
    while lo < cap {
        let next = (lo * step).min(cap);
        let leads = power_leads(next)?;
        if leads && seen_exponential {
            hi = Some(next);
            break;
        }
        seen_exponential |= !leads;
        lo = next;
    }
    let Some(mut hi) = hi else {
        return Err(DecayError::NotFound(format!(
            "no power/exponential crossover below t = {cap:.3e}"
        )));
    };
    while (hi - lo) > tol.crossover_rel * hi {
        let mid = (lo * hi).sqrt();
        if power_leads(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Crossover {
        time: hi,
        estimate: (1.0 / g).ln() / (g * g),
    })
}

/// The three curves of the pole-competition plot for the first excited mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleCompetition {
    pub series: DecaySeries,
    /// `(16/9) g² ∫|ψ_pole^(1)|²`: the leading off-diagonal pole contribution.
    pub first_pole_scaled: Vec<f64>,
    /// `∫|ψ_pole^(2)|²`: the diagonal pole contribution.
    pub second_pole: Vec<f64>,
    /// `∫|ψ_pow|²`.
    pub power: Vec<f64>,
}

/// Index of the largest curve at each instant, and the instants where it changes.
pub fn envelope_leaders(curves: &[&[f64]], times: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let mut leaders = Vec::new();
    let mut switches = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let lead = (0..curves.len())
            .max_by(|&a, &b| curves[a][i].total_cmp(&curves[b][i]))
            .expect("at least one curve");
        if leaders.last() != Some(&lead) {
            if !leaders.is_empty() {
                switches.push(t);
            }
            leaders.push(lead);
        }
    }
    (leaders, switches)
}

impl PoleCompetition {
    /// Leader sequence of the three curves in the order
    /// (scaled first pole, second pole, power).
    pub fn leaders(&self) -> (Vec<usize>, Vec<f64>) {
        envelope_leaders(
            &[&self.first_pole_scaled, &self.second_pole, &self.power],
            &self.series.times,
        )
    }
}

/// Domain of [`pole_competition`].
pub fn check_pole_competition(
    state: InitialState,
    g: Coupling,
    times: &[f64],
    tol: &Tolerances,
) -> Result<()> {
    let g = g.value();
    if state.l() != 2 {
        return Err(DecayError::domain("pole competition is defined for l = 2"));
    }
    if !(g > 0.0 && g <= 0.3) {
        return Err(DecayError::domain(format!(
            "pole competition needs 0 < g <= 0.3, got {g}"
        )));
    }
    check_times(times)?;
    if times[0] < tol.t_min_ray {
        return Err(DecayError::domain(format!(
            "pole competition needs t >= {}",
            tol.t_min_ray
        )));
    }
    Ok(())
}

/// Curves for `l = 2` on `times` (all `>= t_min_ray`).
pub fn pole_competition(prop: &Propagator, times: &[f64]) -> Result<PoleCompetition> {
    check_pole_competition(prop.state(), prop.coupling(), times, prop.tolerances())?;
    let g = prop.coupling().value();
    let series = decay_series(prop, times, &[1, 2])?;
    let weight = 16.0 / 9.0 * g * g;
    let first_pole_scaled = series.per_pole[&1].iter().map(|v| weight * v).collect();
    let second_pole = series.per_pole[&2].clone();
    let power = series
        .power
        .iter()
        .map(|p| p.expect("t >= t_min_ray"))
        .collect();
    Ok(PoleCompetition {
        series,
        first_pole_scaled,
        second_pole,
        power,
    })
}

/// Time at which `(16/9) g² ∫|ψ_pole^(1)|² = ∫|ψ_pole^(2)|²`, from the closed
/// form pole norms.
pub fn first_second_pole_crossing(prop: &Propagator) -> Result<f64> {
    let g = prop.coupling().value();
    let p1 = prop.pole(1)?;
    let p2 = prop.pole(2)?;
    let a0 = 16.0 / 9.0 * g * g * pole_norm(&p1, 0.0);
    let b0 = pole_norm(&p2, 0.0);
    if p2.gamma <= p1.gamma || a0 >= b0 {
        return Err(DecayError::NotFound(
            "first and second pole curves do not cross".into(),
        ));
    }
    Ok((b0 / a0).ln() / (p2.gamma - p1.gamma))
}

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Decay rate of the exponential-part norm fitted over `[t0, t1]` on `samples` points.
pub fn fitted_exponential_rate(prop: &Propagator, t0: f64, t1: f64, samples: usize) -> Result<f64> {
    if t0.is_nan() || t1.is_nan() || t0 >= t1 || samples < 2 {
        return Err(DecayError::domain(
            "fit needs t0 < t1 and at least 2 samples",
        ));
    }
    let ts: Vec<f64> = (0..samples)
        .map(|i| t0 + (t1 - t0) * i as f64 / (samples - 1) as f64)
        .collect();
    let logs = ts
        .iter()
        .map(|&t| survival_probability(prop, t, Route::ExponentialPart).map(f64::ln))
        .collect::<Result<Vec<_>>>()?;
    Ok(-least_squares_slope(&ts, &logs))
}
