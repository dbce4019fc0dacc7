//! Entire trigonometric kernels used throughout the spectral formulas.
//!
//! Writing `sin z / z` and its derivative as power series near the origin
//! keeps the denominator `D(k)` and the removable singularities of the
//! spectral coefficients free of cancellation, for real and complex `k`.

use num_complex::Complex64;

const SERIES_RADIUS: f64 = 0.25;

// sin z / z = sum (-1)^m z^{2m} / (2m+1)!, coefficients up to z^14.
const SINC_COEFFS: [f64; 8] = [
    1.0,
    -1.0 / 6.0,
    1.0 / 120.0,
    -1.0 / 5040.0,
    1.0 / 362_880.0,
    -1.0 / 39_916_800.0,
    1.0 / 6_227_020_800.0,
    -1.0 / 1_307_674_368_000.0,
];

fn even_series(z: Complex64, coeffs: &[f64]) -> Complex64 {
    let z2 = z * z;
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z2 + c)
}

/// `sin(z)/z`, equal to 1 at the origin.
pub fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        even_series(z, &SINC_COEFFS)
    } else {
        z.sin() / z
    }
}

/// Derivative of [`sinc`], `(cos z - sinc z)/z`.
pub fn sinc_prime(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        // d/dz of the sinc series: sum 2m (-1)^m z^{2m-1}/(2m+1)!
        let derived: Vec<f64> = SINC_COEFFS
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, c)| 2.0 * m as f64 * c)
            .collect();
        z * even_series(z, &derived)
    } else {
        (z.cos() - z.sin() / z) / z
    }
}

/// Real-argument convenience wrapper around [`sinc`].
pub fn sinc_re(x: f64) -> f64 {
    sinc(Complex64::new(x, 0.0)).re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_formula_away_from_origin() {
        for &z in &[
            Complex64::new(0.3, 0.0),
            Complex64::new(1.7, -0.4),
            Complex64::new(-2.5, 3.0),
        ] {
            assert!((sinc(z) - z.sin() / z).norm() < 1e-15 * (1.0 + sinc(z).norm()));
        }
    }

    #[test]
    fn continuous_across_series_switch() {
        for &arg in &[0.0, 0.7, 1.9, -2.4] {
            let dir = Complex64::from_polar(1.0, arg);
            let z = dir * SERIES_RADIUS;
            assert!((even_series(z, &SINC_COEFFS) - z.sin() / z).norm() < 1e-15);
            let series_prime = sinc_prime(dir * (SERIES_RADIUS * (1.0 - 1e-15)));
            assert!((series_prime - (z.cos() - z.sin() / z) / z).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let z = Complex64::new(0.9, -0.2);
        let h = 1e-6;
        let fd = (sinc(z + h) - sinc(z - h)) / (2.0 * h);
        assert!((fd - sinc_prime(z)).norm() < 1e-9);
        let small = Complex64::new(0.01, 0.02);
        let fd = (sinc(small + h) - sinc(small - h)) / (2.0 * h);
        assert!((fd - sinc_prime(small)).norm() < 1e-9);
    }

    #[test]
    fn origin_values() {
        assert_eq!(sinc(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        assert_eq!(
            sinc_prime(Complex64::new(0.0, 0.0)),
            Complex64::new(0.0, 0.0)
        );
    }
}
