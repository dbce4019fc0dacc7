use crate::error::{DecayError, Result};

/// Numerical tolerances and domain limits shared by all routines.
///
/// `Tolerances::default()` holds the values the library is validated with;
/// individual fields can be overridden by name through [`Tolerances::set`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Newton iteration cap for the pole search.
    pub newton_max_iter: usize,
    /// Newton stops when |dk| < newton_step_tol * max(1, |k|).
    pub newton_step_tol: f64,
    /// Two pole indices converging closer than this are reported as a clash.
    pub pole_identity_tol: f64,
    /// Relative |D(k)| below which the integrand refuses to evaluate.
    pub pole_proximity: f64,
    /// Minimum distance between a pole and the steepest-descent ray.
    pub ray_pole_distance: f64,
    /// Residue sum stops once the bound on the next term drops below this.
    pub residue_truncation: f64,
    /// Absolute/relative targets of the real-axis spectral integral.
    pub direct_abs_tol: f64,
    pub direct_rel_tol: f64,
    /// Absolute/relative targets of the rotated-ray integral.
    pub ray_abs_tol: f64,
    pub ray_rel_tol: f64,
    /// Allowed disagreement between the two closure points of the direct route.
    pub direct_crosscheck: f64,
    /// Stopping threshold of the doubling x-quadrature for norms.
    pub norm_tol: f64,
    /// Earliest time served by the rotated-ray decomposition.
    pub t_min_ray: f64,
    /// Latest time served by the real-axis route.
    pub t_direct_max: f64,
    /// Relative bracket width at which the crossover bisection stops.
    pub crossover_rel: f64,
    /// Upper bound on the number of poles used by any routine.
    pub max_poles: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            newton_max_iter: 50,
            newton_step_tol: 1e-13,
            pole_identity_tol: 1e-8,
            pole_proximity: 1e-10,
            ray_pole_distance: 1e-3,
            residue_truncation: 1e-12,
            direct_abs_tol: 1e-10,
            direct_rel_tol: 1e-10,
            ray_abs_tol: 1e-15,
            ray_rel_tol: 1e-13,
            direct_crosscheck: 1e-8,
            norm_tol: 1e-8,
            t_min_ray: 0.5,
            t_direct_max: 200.0,
            crossover_rel: 1e-7,
            max_poles: 20_000,
        }
    }
}

impl Tolerances {
    /// Field names accepted by [`Tolerances::set`].
    pub const KEYS: [&'static str; 16] = [
        "newton_max_iter",
        "newton_step_tol",
        "pole_identity_tol",
        "pole_proximity",
        "ray_pole_distance",
        "residue_truncation",
        "direct_abs_tol",
        "direct_rel_tol",
        "ray_abs_tol",
        "ray_rel_tol",
        "direct_crosscheck",
        "norm_tol",
        "t_min_ray",
        "t_direct_max",
        "crossover_rel",
        "max_poles",
    ];

    /// Overrides one field by name.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !value.is_finite() || value <= 0.0 {
            return Err(DecayError::domain(format!(
                "tolerance {key} must be positive and finite, got {value}"
            )));
        }
        let as_count = || -> Result<usize> {
            if value.fract() != 0.0 {
                return Err(DecayError::domain(format!("{key} must be an integer")));
            }
            Ok(value as usize)
        };
        match key {
            "newton_max_iter" => self.newton_max_iter = as_count()?,
            "newton_step_tol" => self.newton_step_tol = value,
            "pole_identity_tol" => self.pole_identity_tol = value,
            "pole_proximity" => self.pole_proximity = value,
            "ray_pole_distance" => self.ray_pole_distance = value,
            "residue_truncation" => self.residue_truncation = value,
            "direct_abs_tol" => self.direct_abs_tol = value,
            "direct_rel_tol" => self.direct_rel_tol = value,
            "ray_abs_tol" => self.ray_abs_tol = value,
            "ray_rel_tol" => self.ray_rel_tol = value,
            "direct_crosscheck" => self.direct_crosscheck = value,
            "norm_tol" => self.norm_tol = value,
            "t_min_ray" => self.t_min_ray = value,
            "t_direct_max" => self.t_direct_max = value,
            "crossover_rel" => self.crossover_rel = value,
            "max_poles" => self.max_poles = as_count()?,
            _ => {
                return Err(DecayError::domain(format!(
                    "unknown tolerance '{key}' (expected one of {})",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// `(name, value)` pairs in a fixed order, for run manifests.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("newton_max_iter", self.newton_max_iter as f64),
            ("newton_step_tol", self.newton_step_tol),
            ("pole_identity_tol", self.pole_identity_tol),
            ("pole_proximity", self.pole_proximity),
            ("ray_pole_distance", self.ray_pole_distance),
            ("residue_truncation", self.residue_truncation),
            ("direct_abs_tol", self.direct_abs_tol),
            ("direct_rel_tol", self.direct_rel_tol),
            ("ray_abs_tol", self.ray_abs_tol),
            ("ray_rel_tol", self.ray_rel_tol),
            ("direct_crosscheck", self.direct_crosscheck),
            ("norm_tol", self.norm_tol),
            ("t_min_ray", self.t_min_ray),
            ("t_direct_max", self.t_direct_max),
            ("crossover_rel", self.crossover_rel),
            ("max_poles", self.max_poles as f64),
        ]
    }
}
