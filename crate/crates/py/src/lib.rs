//! Python bindings: poles, bound state, spectral data, wavefunction routes
//! and integrated norms.

use std::collections::HashMap;

use decay::evolution::{self, Route};
use decay::observables;
use decay::poles::{self, pole_strength};
use decay::spectral;
use decay::{Coupling, DecayError, InitialState, Tolerances};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

create_exception!(
    cavity_decay,
    NumericalError,
    PyArithmeticError,
    "A quadrature, root search or cross-check missed its accuracy target."
);

fn to_py(e: DecayError) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        NumericalError::new_err(e.to_string())
    }
}

fn coupling(g: f64) -> PyResult<Coupling> {
    Coupling::new(g).map_err(to_py)
}

fn route(name: &str, t: f64, tol: &Tolerances) -> PyResult<Route> {
    if name == "auto" {
        return Ok(if t <= tol.t_direct_max {
            Route::Direct
        } else {
            Route::DecomposedTotal
        });
    }
    name.parse::<Route>().map_err(to_py)
}

#[pyclass(
    name = "ResonancePole",
    frozen,
    skip_from_py_object,
    module = "cavity_decay"
)]
#[derive(Clone)]
struct PyPole(poles::ResonancePole);

#[pymethods]
impl PyPole {
    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }
    /// Complex wavenumber of the pole.
    #[getter]
    fn k(&self) -> Complex64 {
        self.0.k
    }
    /// Residue weight `Z`.
    #[getter]
    fn z(&self) -> Complex64 {
        self.0.z
    }
    #[getter]
    fn omega(&self) -> f64 {
        self.0.omega
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma
    }
    #[getter]
    fn g(&self) -> f64 {
        self.0.g
    }
    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }
    fn lifetime(&self) -> f64 {
        self.0.lifetime()
    }
    /// Residue coupling to the prepared mode `l`.
    fn strength(&self, l: usize) -> Complex64 {
        pole_strength(&self.0, l)
    }
    /// Closed-form `∫_0^π |ψ_pole|² dx` at time `t`.
    fn norm(&self, t: f64) -> f64 {
        observables::pole_norm(&self.0, t)
    }
    fn __repr__(&self) -> String {
        format!(
            "ResonancePole(n={}, k={:.12}{:+.12}j, gamma={:.6e})",
            self.0.n, self.0.k.re, self.0.k.im, self.0.gamma
        )
    }
}

#[pyclass(name = "BoundState", frozen, module = "cavity_decay")]
struct PyBoundState(spectral::BoundState);

#[pymethods]
impl PyBoundState {
    #[getter]
    fn k2(&self) -> f64 {
        self.0.k2
    }
    #[getter]
    fn norm(&self) -> f64 {
        self.0.norm
    }
    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }
    #[getter]
    fn energy(&self) -> f64 {
        self.0.energy()
    }
    fn value(&self, x: f64) -> f64 {
        self.0.value(x)
    }
    fn overlap(&self, l: usize) -> f64 {
        self.0.overlap_with_mode(l)
    }
    fn __repr__(&self) -> String {
        format!("BoundState(k2={:.12e}, g={})", self.0.k2, self.0.g)
    }
}

/// Time evolution of the prepared cavity mode `l` for coupling `g`.
#[pyclass(name = "Propagator", frozen, module = "cavity_decay")]
struct PyPropagator(decay::Propagator);

#[pymethods]
impl PyPropagator {
    /// `tolerances` overrides fields of the default tolerance set by name.
    #[new]
    #[pyo3(signature = (l, g, tolerances = None))]
    fn new(l: usize, g: f64, tolerances: Option<HashMap<String, f64>>) -> PyResult<Self> {
        let mut tol = Tolerances::default();
        let mut items: Vec<_> = tolerances.unwrap_or_default().into_iter().collect();
        items.sort_by(|a, b| a.0.cmp(&b.0));
        for (key, value) in items {
            tol.set(&key, value).map_err(to_py)?;
        }
        let state = InitialState::new(l).map_err(to_py)?;
        Ok(Self(decay::Propagator::with_tolerances(
            state,
            coupling(g)?,
            tol,
        )))
    }

    #[getter]
    fn l(&self) -> usize {
        self.0.state().l()
    }

    #[getter]
    fn g(&self) -> f64 {
        self.0.coupling().value()
    }

    /// Active tolerances as a dict.
    fn tolerances(&self) -> HashMap<&'static str, f64> {
        self.0.tolerances().entries().into_iter().collect()
    }

    /// ψ(x, t) along a named route: direct, decomposed, power, exponential,
    /// asymptotic or auto.
    #[pyo3(signature = (xs, t, route = "auto", n_poles = 400, order = 2))]
    fn psi(
        &self,
        py: Python<'_>,
        xs: Vec<f64>,
        t: f64,
        route: &str,
        n_poles: usize,
        order: u8,
    ) -> PyResult<Vec<Complex64>> {
        let r = self::route(route, t, self.0.tolerances())?;
        py.detach(|| self.0.evaluate(r, &xs, t, n_poles, order))
            .map_err(to_py)
    }

    /// `(power, exponential)` parts of ψ at `xs`.
    #[pyo3(signature = (xs, t, n_poles = 400))]
    fn decomposed(
        &self,
        py: Python<'_>,
        xs: Vec<f64>,
        t: f64,
        n_poles: usize,
    ) -> PyResult<(Vec<Complex64>, Vec<Complex64>)> {
        let d = py
            .detach(|| self.0.decomposed(&xs, t, n_poles))
            .map_err(to_py)?;
        Ok((d.power, d.exponential))
    }

    /// Survival probability `∫_0^π |ψ|² dx`.
    #[pyo3(signature = (t, route = "auto"))]
    fn survival(&self, py: Python<'_>, t: f64, route: &str) -> PyResult<f64> {
        let r = self::route(route, t, self.0.tolerances())?;
        py.detach(|| observables::survival_probability(&self.0, t, r))
            .map_err(to_py)
    }

    /// `(power_norm, exponential_norm)` at `t`.
    fn component_norms(&self, py: Python<'_>, t: f64) -> PyResult<(f64, f64)> {
        py.detach(|| observables::component_norms(&self.0, t))
            .map_err(to_py)
    }

    /// `(time, estimate)` where the power norm overtakes the exponential norm.
    fn crossover(&self, py: Python<'_>) -> PyResult<(f64, f64)> {
        let c = py
            .detach(|| observables::crossover_time(&self.0))
            .map_err(to_py)?;
        Ok((c.time, c.estimate))
    }

    /// Curves `{"t", "pole1_scaled", "pole2", "power"}` for the first excited state.
    fn pole_competition(
        &self,
        py: Python<'_>,
        times: Vec<f64>,
    ) -> PyResult<HashMap<&'static str, Vec<f64>>> {
        let c = py
            .detach(|| observables::pole_competition(&self.0, &times))
            .map_err(to_py)?;
        Ok(HashMap::from([
            ("t", times),
            ("pole1_scaled", c.first_pole_scaled),
            ("pole2", c.second_pole),
            ("power", c.power),
        ]))
    }

    fn pole(&self, n: usize) -> PyResult<PyPole> {
        self.0.pole(n).map(PyPole).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Propagator(l={}, g={})", self.l(), self.g())
    }
}

/// The `n`-th resonance pole for coupling `g`.
#[pyfunction]
fn find_pole(n: usize, g: f64) -> PyResult<PyPole> {
    poles::find_pole(n, coupling(g)?).map(PyPole).map_err(to_py)
}

/// Perturbative starting point of the pole search.
#[pyfunction]
fn pole_seed(n: usize, g: f64) -> PyResult<Complex64> {
    Ok(poles::pole_seed(n, coupling(g)?))
}

/// The bound state for `-1 < g < 0`, else `None`.
#[pyfunction]
fn bound_state(g: f64) -> PyResult<Option<PyBoundState>> {
    Ok(spectral::bound_state(coupling(g)?).map(PyBoundState))
}

/// `(a_k, b_k)` for complex `k`.
#[pyfunction]
fn eigen_coefficients(k: Complex64, g: f64) -> PyResult<(Complex64, Complex64)> {
    let c = spectral::eigen_coefficients(k, coupling(g)?).map_err(to_py)?;
    Ok((c.a, c.b))
}

/// `D(k) = 4 a_k b_k`.
#[pyfunction]
fn denominator(k: Complex64, g: f64) -> PyResult<Complex64> {
    Ok(spectral::denominator(k, coupling(g)?.value()))
}

/// `N_k² = 1/(4 a_k b_k)` for real `k > 0`.
#[pyfunction]
fn continuum_normalization(k: f64, g: f64) -> PyResult<f64> {
    spectral::continuum_normalization(k, coupling(g)?)
        .map(|n| n.reduced_squared())
        .map_err(to_py)
}

/// Delta-normalized eigenfunction `ψ_k(x)`.
#[pyfunction]
fn eigenfunction(k: f64, g: f64, x: f64) -> PyResult<f64> {
    spectral::eigenfunction_value(k, coupling(g)?, x).map_err(to_py)
}

/// Expansion coefficient of mode `l` on the continuum.
#[pyfunction]
fn spectral_coefficient(k: f64, l: usize, g: f64) -> PyResult<f64> {
    evolution::spectral_coefficient(k, l, coupling(g)?).map_err(to_py)
}

#[pymodule]
fn cavity_decay(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", decay::VERSION)?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyPole>()?;
    m.add_class::<PyBoundState>()?;
    m.add_class::<PyPropagator>()?;
    m.add_function(wrap_pyfunction!(find_pole, m)?)?;
    m.add_function(wrap_pyfunction!(pole_seed, m)?)?;
    m.add_function(wrap_pyfunction!(bound_state, m)?)?;
    m.add_function(wrap_pyfunction!(eigen_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(denominator, m)?)?;
    m.add_function(wrap_pyfunction!(continuum_normalization, m)?)?;
    m.add_function(wrap_pyfunction!(eigenfunction, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_coefficient, m)?)?;
    Ok(())
}
