//! End-to-end acceptance checks, one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use cavity_decay::evolution::spectral_coefficient;
use cavity_decay::observables::{
    crossover_time, first_second_pole_crossing, fitted_exponential_rate, least_squares_slope,
    pole_competition, survival_probability,
};
use cavity_decay::poles::pole_seed;
use cavity_decay::quadrature::{AdaptiveQuadrature, CompositeGauss};
use cavity_decay::spectral::{denominator_trig, eigen_coefficients};
use cavity_decay::{bound_state, find_pole, Coupling, InitialState, Propagator, Route};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn prop(l: usize, g: f64) -> Propagator {
    Propagator::new(InitialState::new(l).unwrap(), Coupling::new(g).unwrap())
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn route_agreement() -> Check {
    let start = Instant::now();
    let xs = [0.5, 1.5, 2.5, 3.0];
    let mut worst: f64 = 0.0;
    for &(l, g) in &[(1usize, 0.2), (1, 0.1), (2, 0.1)] {
        let p = prop(l, g);
        for &t in &[2.0, 5.0, 10.0, 20.0, 50.0] {
            let direct = p.direct(&xs, t).map_err(err)?;
            let split = p.decomposed(&xs, t, 400).map_err(err)?.total();
            for (a, b) in direct.iter().zip(&split) {
                worst = worst.max((a - b).norm());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst < 1e-6 && secs < 60.0,
        format!("max |direct - (pow + exp)| = {worst:.2e}, {secs:.1} s"),
    )
}

fn power_tail() -> Check {
    let ts: Vec<f64> = (0..=8).map(|i| 10f64.powf(3.0 + 0.25 * i as f64)).collect();
    let log_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let mut worst_slope: f64 = 0.0;
    let mut worst_coef: f64 = 0.0;
    for &l in &[1usize, 2] {
        for &g in &[0.1, 0.5] {
            let p = prop(l, g);
            let logs = ts
                .iter()
                .map(|&t| survival_probability(&p, t, Route::PowerPart).map(f64::ln))
                .collect::<Result<Vec<_>, _>>()
                .map_err(err)?;
            worst_slope = worst_slope.max((least_squares_slope(&log_t, &logs) + 3.0).abs());
            let t = 1e5;
            let xs = [0.25, 0.75, 1.5, 2.25, 3.0];
            let psi = p.power_part(&xs, t).map_err(err)?;
            for (z, &x) in psi.iter().zip(&xs) {
                let want = 0.5 * (g / (1.0 + g)).powi(4) * x * x / (l * l) as f64;
                worst_coef = worst_coef.max((t.powi(3) * z.norm_sqr() / want - 1.0).abs());
            }
        }
    }
    ensure(
        worst_slope < 0.01 && worst_coef < 0.01,
        format!("|slope + 3| <= {worst_slope:.2e}, coefficient error <= {worst_coef:.2e}"),
    )
}

fn width_law() -> Check {
    let start = Instant::now();
    let gs: Vec<f64> = (0..12)
        .map(|i| 1e-3 * 30f64.powf(i as f64 / 11.0))
        .collect();
    let mut details = Vec::new();
    let mut ok = true;
    for n in 1..=3usize {
        let mut reduced = Vec::new();
        let mut near_one = 0.0;
        for &g in &gs {
            let gamma = find_pole(n, Coupling::new(g).unwrap()).map_err(err)?.gamma;
            let ratio = gamma / (4.0 * PI * (n as f64).powi(3) * g * g);
            if g == gs[0] {
                near_one = ratio;
            }
            reduced.push((ratio - 1.0) / g);
        }
        // (ratio - 1)/g = s + c g: the intercept s is the first-order slope
        let c = least_squares_slope(&gs, &reduced);
        let mean_g = gs.iter().sum::<f64>() / gs.len() as f64;
        let mean_r = reduced.iter().sum::<f64>() / reduced.len() as f64;
        let slope = mean_r - c * mean_g;
        ok &= (slope + 4.0).abs() < 0.5 && (near_one - 1.0).abs() < 0.01;
        details.push(format!("n={n}: slope {slope:.3}"));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        ok && secs < 5.0,
        format!("{}, {secs:.2} s", details.join(", ")),
    )
}

fn seed_accuracy() -> Check {
    let mut ok = true;
    let mut details = Vec::new();
    for n in 1..=3usize {
        let c: Vec<f64> = [1e-2, 3e-3, 1e-3]
            .iter()
            .map(|&g| {
                let gc = Coupling::new(g).unwrap();
                let exact = find_pole(n, gc)
                    .map(|p| p.k)
                    .unwrap_or(Complex64::new(f64::NAN, 0.0));
                (exact - pole_seed(n, gc)).norm() / (g.powi(3) * n as f64)
            })
            .collect();
        let mean = c.iter().sum::<f64>() / 3.0;
        ok &= c.iter().all(|v| (v / mean - 1.0).abs() <= 0.5);
        details.push(format!(
            "n={n}: C in [{:.2}, {:.2}]",
            c[0].min(c[2]),
            c[0].max(c[2])
        ));
    }
    ensure(ok, details.join(", "))
}

fn bound_state_check() -> Check {
    let mut ok = true;
    let mut details = Vec::new();
    for &g in &[-0.99, -0.5, -0.1] {
        let b = bound_state(Coupling::new(g).unwrap()).ok_or("missing bound state")?;
        let s = 2.0 * PI * b.k2;
        let residual = ((-s).exp() - 1.0 - s * g).abs();
        let inside = CompositeGauss::new(0.0, PI, 64, 16);
        let outside = CompositeGauss::new(PI, PI + 40.0 / b.k2, 4000, 16);
        let norm = inside.apply(
            &inside
                .nodes
                .iter()
                .map(|&x| b.value(x).powi(2))
                .collect::<Vec<_>>(),
        ) + outside.apply(
            &outside
                .nodes
                .iter()
                .map(|&x| b.value(x).powi(2))
                .collect::<Vec<_>>(),
        );
        ok &= residual < 1e-14 && b.residual.abs() < 1e-14 && (norm - 1.0).abs() < 1e-8;
        if g == -0.99 {
            let approx = (g + 1.0) / PI;
            ok &= (b.k2 / approx - 1.0).abs() < 0.05;
        }
        if g == -0.1 {
            let approx = -(1.0 - (1.0 / g).exp()) / (2.0 * PI * g);
            ok &= (b.k2 / approx - 1.0).abs() < 1e-4;
        }
        details.push(format!("g={g}: k2={:.6e}, norm-1={:.1e}", b.k2, norm - 1.0));
    }
    for &g in &[1e-3, 0.3, 5.0] {
        ok &= bound_state(Coupling::new(g).unwrap()).is_none();
    }
    ensure(ok, details.join("; "))
}

fn initial_and_stability() -> Check {
    let mut worst: f64 = 0.0;
    for &(l, g) in &[(1usize, 0.2), (2, 0.1), (1, -0.5)] {
        let s = survival_probability(&prop(l, g), 0.0, Route::Direct).map_err(err)?;
        worst = worst.max((s - 1.0).abs());
    }
    let stable = survival_probability(&prop(1, 1e-4), 10.0, Route::DecomposedTotal).map_err(err)?;
    ensure(
        worst < 1e-6 && (stable - 1.0).abs() < 5e-3,
        format!("|P(0) - 1| <= {worst:.1e}, P(10) at g=1e-4 is {stable:.8}"),
    )
}

fn decay_curves() -> Check {
    let p = prop(1, 0.2);
    let pow = survival_probability(&p, 5.0, Route::PowerPart).map_err(err)?;
    let exp = survival_probability(&p, 5.0, Route::ExponentialPart).map_err(err)?;
    let cross = crossover_time(&p).map_err(err)?;
    let rate = fitted_exponential_rate(&p, 2.0, 8.0, 25).map_err(err)?;
    let gamma = p.pole(1).map_err(err)?.gamma;
    let rel = rate / gamma - 1.0;
    ensure(
        exp / pow > 1e2 && cross.time.is_finite() && cross.time < 1e3 && rel.abs() < 0.01,
        format!(
            "exp/pow at t=5 is {:.3e}, crossing at t={:.2}, fitted rate off by {:.2}%",
            exp / pow,
            cross.time,
            100.0 * rel
        ),
    )
}

fn excited_state_competition() -> Check {
    let g = 0.1;
    let p = prop(2, g);
    let ts: Vec<f64> = (0..=260).map(|i| 0.5 * 1.03f64.powi(i)).collect();
    let comp = pole_competition(&p, &ts).map_err(err)?;
    let (leaders, switches) = comp.leaders();
    let crossing = first_second_pole_crossing(&p).map_err(err)?;
    let (g1, g2) = (p.pole(1).map_err(err)?.gamma, p.pole(2).map_err(err)?.gamma);
    let closed = (9.0 / (16.0 * g * g)).ln() / (g2 - g1);
    let rel = crossing / closed - 1.0;
    ensure(
        leaders == [1, 0, 2] && switches.len() == 2 && rel.abs() < 0.02,
        format!(
            "leaders {leaders:?} switching at {switches:.1?}, pole crossing {crossing:.4} vs closed form {closed:.4} ({:.2}%)",
            100.0 * rel
        ),
    )
}

fn asymptotic_series() -> Check {
    let p = prop(1, 0.2);
    let ts: Vec<f64> = (0..=8).map(|i| 10f64.powf(2.0 + 0.25 * i as f64)).collect();
    let mut log_err = Vec::new();
    for &t in &ts {
        let exact = p.power_part(&[1.0], t).map_err(err)?[0];
        let series = p.asymptotic(&[1.0], t, 2).map_err(err)?[0];
        log_err.push(((series - exact).norm() / exact.norm()).ln());
    }
    let log_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let slope = least_squares_slope(&log_t, &log_err);
    ensure(
        (slope + 2.0).abs() < 0.1,
        format!("relative error slope {slope:.4}"),
    )
}

fn spectral_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut failures = 0;
    for _ in 0..10_000 {
        let k: f64 = rng.gen_range(0.01..20.0);
        let mag = 10f64.powf(rng.gen_range(-2.0..2.0));
        let g = if rng.gen_bool(0.5) { mag } else { -mag };
        let gc = Coupling::new(g).unwrap();
        let plus = eigen_coefficients(Complex64::new(k, 0.0), gc).map_err(err)?;
        let minus = eigen_coefficients(Complex64::new(-k, 0.0), gc).map_err(err)?;
        let closed = denominator_trig(Complex64::new(k, 0.0), g);
        let scale = plus.a.norm().max(1.0);
        let bad = (plus.four_ab() - closed).norm() > 1e-12 * closed.norm().max(1.0)
            || (plus.b - plus.a.conj()).norm() > 1e-12 * scale
            || (minus.b + plus.a).norm() > 1e-12 * scale;
        failures += bad as usize;
    }
    let mut norms = Vec::new();
    for &(l, g) in &[(1usize, 0.2), (2, 0.1)] {
        let cut = 2000.0;
        let breaks: Vec<f64> = (0..=4000).map(|i| cut * i as f64 / 4000.0).collect();
        let q = AdaptiveQuadrature::new(1e-11, 1e-11);
        let gc = Coupling::new(g).unwrap();
        let (v, _, converged) = q.integrate_real(&breaks, |k| {
            if k == 0.0 {
                0.0
            } else {
                spectral_coefficient(k, l, gc).unwrap().powi(2)
            }
        });
        // |φ|² ~ (4/π²) l² sin²(kπ)/k⁴ beyond the cut
        let tail = 4.0 / (PI * PI) * (l * l) as f64 / (6.0 * cut.powi(3));
        if !converged {
            return Err(format!("Parseval quadrature did not converge for l={l}"));
        }
        norms.push(v + tail);
    }
    let worst = norms.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    ensure(
        failures == 0 && worst < 1e-4,
        format!("{failures} of 10000 identity checks failed, |∫φ² - 1| <= {worst:.1e}"),
    )
}

fn determinism() -> Check {
    let dir = std::env::temp_dir().join(format!("cavity-decay-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(err)?;
    let configs: [&[&str]; 3] = [
        &["figure2", "--t", "log:0.5:300:16"],
        &["poles", "--g", "0.1", "--n-max", "8", "--format", "json"],
        &[
            "evolve", "--g", "0.1", "--l", "2", "--t", "0:10:2.5", "--x-grid", "9",
        ],
    ];
    let mut ok = true;
    for (c, args) in configs.iter().enumerate() {
        let mut outputs = Vec::new();
        for (r, threads) in ["1", "1", "4"].iter().enumerate() {
            let path = dir.join(format!("c{c}_r{r}.out"));
            let status = Command::new(env!("CARGO_BIN_EXE_cavity-decay"))
                .args(*args)
                .args(["--threads", threads, "--out", path.to_str().unwrap()])
                .status()
                .map_err(err)?;
            ok &= status.success();
            outputs.push(std::fs::read(&path).map_err(err)?);
        }
        ok &= outputs.iter().all(|o| *o == outputs[0] && !o.is_empty());
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(
        ok,
        "3 configurations: repeated runs and 1 vs 4 threads byte-identical".into(),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("route agreement", route_agreement),
        ("power-law tail", power_tail),
        ("width law", width_law),
        ("pole seed accuracy", seed_accuracy),
        ("bound state", bound_state_check),
        (
            "initial condition and stability limit",
            initial_and_stability,
        ),
        ("decay curves: exponential vs power", decay_curves),
        ("pole competition in the first excited state", excited_state_competition),
        ("asymptotic series convergence", asymptotic_series),
        ("spectral identities", spectral_identities),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {:>2} {tag}: {name}: {detail} [{:.1} s]",
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
