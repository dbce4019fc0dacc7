//! Quadrature rules for complex, vector-valued integrands.
//!
//! The evolution routes integrate the same k-dependent factor against many
//! spatial points at once, so the adaptive rule works on a vector of
//! complex outputs and refines where the worst component demands it.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

// Gauss-Kronrod 10/21 abscissae and weights (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_749_018_260,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Settings for the globally adaptive Gauss-Kronrod 21-point rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveQuadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for AdaptiveQuadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_panels: 200_000,
        }
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone)]
pub struct QuadratureResult {
    pub values: Vec<Complex64>,
    /// Sum over panels of the Gauss/Kronrod discrepancy (max over components).
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    values: Vec<Complex64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl AdaptiveQuadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    fn panel<F>(a: f64, b: f64, dim: usize, f: &mut F, buf: &mut [Complex64]) -> Panel
    where
        F: FnMut(f64, &mut [Complex64]),
    {
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut kronrod = vec![Complex64::new(0.0, 0.0); dim];
        let mut gauss = vec![Complex64::new(0.0, 0.0); dim];

        f(center, buf);
        for j in 0..dim {
            kronrod[j] += buf[j] * WGK[10];
        }
        for i in 0..10 {
            let dx = half * XGK[i];
            for &x in &[center - dx, center + dx] {
                f(x, buf);
                for j in 0..dim {
                    kronrod[j] += buf[j] * WGK[i];
                    if i % 2 == 1 {
                        gauss[j] += buf[j] * WG[i / 2];
                    }
                }
            }
        }
        let mut error = 0.0_f64;
        for j in 0..dim {
            kronrod[j] *= half;
            gauss[j] *= half;
            error = error.max((kronrod[j] - gauss[j]).norm());
        }
        Panel {
            a,
            b,
            values: kronrod,
            error,
        }
    }

    /// Integrates `f` over the interval spanned by `breakpoints`
    /// (sorted, at least two entries). `f(x, out)` fills `dim` outputs.
    pub fn integrate<F>(&self, dim: usize, breakpoints: &[f64], mut f: F) -> QuadratureResult
    where
        F: FnMut(f64, &mut [Complex64]),
    {
        assert!(breakpoints.len() >= 2, "need at least one interval");
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        let mut heap = BinaryHeap::new();
        let mut done: Vec<Panel> = Vec::new();
        for w in breakpoints.windows(2) {
            if w[1] > w[0] {
                heap.push(Self::panel(w[0], w[1], dim, &mut f, &mut buf));
            }
        }
        let mut converged = true;
        loop {
            let total_err: f64 = heap.iter().map(|p: &Panel| p.error).sum::<f64>()
                + done.iter().map(|p| p.error).sum::<f64>();
            let mut total = vec![Complex64::new(0.0, 0.0); dim];
            for p in heap.iter().chain(done.iter()) {
                for (acc, v) in total.iter_mut().zip(&p.values) {
                    *acc += v;
                }
            }
            let target = self.abs_tol.max(self.rel_tol * max_norm(&total));
            if total_err <= target {
                break;
            }
            if heap.len() + done.len() >= self.max_panels {
                converged = false;
                break;
            }
            // Refine the worst panels in one sweep so the bookkeeping above
            // stays proportional to the number of panels.
            let batch = (heap.len() / 8).max(1);
            let mut split_any = false;
            for _ in 0..batch {
                let Some(worst) = heap.pop() else { break };
                let mid = 0.5 * (worst.a + worst.b);
                if !(mid > worst.a && mid < worst.b) || worst.b - worst.a < 1e-15 * worst.a.abs() {
                    done.push(worst);
                    continue;
                }
                heap.push(Self::panel(worst.a, mid, dim, &mut f, &mut buf));
                heap.push(Self::panel(mid, worst.b, dim, &mut f, &mut buf));
                split_any = true;
            }
            if !split_any && heap.is_empty() {
                converged = false;
                break;
            }
        }
        let mut panels: Vec<Panel> = heap.into_vec();
        panels.extend(done);
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        let mut values = vec![Complex64::new(0.0, 0.0); dim];
        let mut error = 0.0;
        for p in &panels {
            for (acc, v) in values.iter_mut().zip(&p.values) {
                *acc += v;
            }
            error += p.error;
        }
        QuadratureResult {
            values,
            error,
            panels: panels.len(),
            converged,
        }
    }

    /// Scalar real integrand convenience wrapper.
    pub fn integrate_real<F>(&self, breakpoints: &[f64], mut f: F) -> (f64, f64, bool)
    where
        F: FnMut(f64) -> f64,
    {
        let r = self.integrate(1, breakpoints, |x, out| out[0] = Complex64::new(f(x), 0.0));
        (r.values[0].re, r.error, r.converged)
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule: `panels` equal panels of `order` points.
#[derive(Debug, Clone)]
pub struct CompositeGauss {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeGauss {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        Self { nodes, weights }
    }

    pub fn apply(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}
