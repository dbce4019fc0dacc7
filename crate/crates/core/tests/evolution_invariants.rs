use std::f64::consts::PI;

use cavity_decay::observables::{least_squares_slope, survival_probability};
use cavity_decay::quadrature::CompositeGauss;
use cavity_decay::{Coupling, InitialState, Propagator, Route};

fn prop(l: usize, g: f64) -> Propagator {
    Propagator::new(InitialState::new(l).unwrap(), Coupling::new(g).unwrap())
}

#[test]
fn direct_and_decomposed_routes_agree() {
    let xs: Vec<f64> = (1..=8).map(|j| PI * j as f64 / 8.5).collect();
    for &(l, g) in &[(1usize, 0.2), (1, 0.1), (2, 0.1)] {
        let p = prop(l, g);
        for &t in &[2.0, 5.0, 10.0, 20.0, 50.0] {
            let direct = p.direct(&xs, t).unwrap();
            let total = p.decomposed(&xs, t, 400).unwrap().total();
            for (j, (a, b)) in direct.iter().zip(&total).enumerate() {
                assert!((a - b).norm() < 1e-6, "l={l} g={g} t={t} x={}", xs[j]);
            }
        }
    }
}

#[test]
fn no_amplification() {
    let xs: Vec<f64> = (0..=12).map(|j| PI * j as f64 / 12.0).collect();
    let bound = 1.1 * (2.0 / PI).sqrt();
    for &(l, g) in &[(1usize, 0.2), (2, 0.1)] {
        let p = prop(l, g);
        for &t in &[0.0, 0.5, 3.0, 30.0] {
            assert!(p.direct(&xs, t).unwrap().iter().all(|z| z.norm() <= bound));
        }
    }
}

#[test]
fn cavity_norm_decreases() {
    let p = prop(1, 0.2);
    let ts = [0.2, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0, 30.0, 50.0];
    let norms: Vec<f64> = ts
        .iter()
        .map(|&t| survival_probability(&p, t, Route::Direct).unwrap())
        .collect();
    for w in norms.windows(2) {
        assert!(w[1] <= w[0] + 1e-6, "{norms:?}");
    }
}

#[test]
fn probability_leaks_out_of_the_cavity_without_loss() {
    let p = prop(1, 0.2);
    let rule = CompositeGauss::new(0.0, 50.0 * PI, 160, 16);
    for &t in &[0.0, 5.0] {
        let psi = p.direct(&rule.nodes, t).unwrap();
        let density: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
        let total = rule.apply(&density);
        assert!((total - 1.0).abs() < 1e-3, "t={t}: {total}");
    }
}

#[test]
fn power_tail_exponent_and_coefficient() {
    let ts: Vec<f64> = (0..=8).map(|i| 10f64.powf(3.0 + 0.25 * i as f64)).collect();
    for &l in &[1usize, 2] {
        for &g in &[0.1, 0.5] {
            let p = prop(l, g);
            let logs: Vec<f64> = ts
                .iter()
                .map(|&t| survival_probability(&p, t, Route::PowerPart).unwrap().ln())
                .collect();
            let log_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
            let slope = least_squares_slope(&log_t, &logs);
            assert!((slope + 3.0).abs() < 0.01, "l={l} g={g}: {slope}");

            let t = 1e5;
            let xs = [0.5, 1.5, 2.5];
            let pow = p.power_part(&xs, t).unwrap();
            let ratio = (g / (1.0 + g)).powi(2);
            for (z, &x) in pow.iter().zip(&xs) {
                let want = 0.5 * ratio * ratio * x * x / (l * l) as f64;
                assert!((t.powi(3) * z.norm_sqr() / want - 1.0).abs() < 0.01);
            }
        }
    }
}

#[test]
fn survival_varies_smoothly_with_coupling() {
    let values: Vec<f64> = (5..=30)
        .map(|i| survival_probability(&prop(1, 0.01 * i as f64), 2.0, Route::Direct).unwrap())
        .collect();
    for w in values.windows(2) {
        assert!((w[1] / w[0] - 1.0).abs() < 0.05, "{values:?}");
    }
    for w in values.windows(3) {
        let curvature = (w[2] - 2.0 * w[1] + w[0]).abs();
        assert!(curvature < 0.2 * (w[2] - w[0]).abs(), "{values:?}");
    }
}

#[test]
fn attractive_coupling_keeps_bound_component() {
    let g = -0.5;
    let p = prop(1, g);
    let bound = cavity_decay::bound_state(Coupling::new(g).unwrap()).unwrap();
    let weight = bound.overlap_with_mode(1).powi(2);
    assert!((survival_probability(&p, 0.0, Route::Direct).unwrap() - 1.0).abs() < 1e-6);
    // all probability on the half-line stays within the bound part plus the escaping continuum
    let rule = CompositeGauss::new(0.0, 50.0 * PI, 160, 16);
    let psi = p.direct(&rule.nodes, 5.0).unwrap();
    let total = rule.apply(&psi.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
    assert!((total - 1.0).abs() < 1e-3);
    assert!(weight > 0.0 && weight < 1.0);
}
