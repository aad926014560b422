//! Python bindings for `subtraction_core`.
//!
//! Domain errors raise `ValueError`, convergence failures raise `RuntimeError`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyAny, PyDict};

use subtraction_core::curved::{self, CurvatureInvariants, GravitationalConstants};
use subtraction_core::functional::{self, KernelFamily, SpectrumGrid, VHOperator, VHState};
use subtraction_core::graphs::{self, KinematicPoint, DEFAULT_QUAD_TOL};
use subtraction_core::hadamard::{self, HadamardInput, SingularBasisExpansion};
use subtraction_core::laurent;
use subtraction_core::renorm::{self, CouplingSet};
use subtraction_core::{Error, ErrorClass};

fn py_err(e: Error) -> PyErr {
    match e.class() {
        ErrorClass::Domain => PyValueError::new_err(e.to_string()),
        ErrorClass::Convergence => PyRuntimeError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for subtraction_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Truncated Laurent series in `ε = n − 4`.
#[pyclass(name = "EpsilonSeries", module = "subtraction", from_py_object)]
#[derive(Clone)]
struct PySeries(laurent::EpsilonSeries);

#[pymethods]
impl PySeries {
    /// `coeffs[i]` multiplies `ε^(min_order + i)`.
    #[new]
    fn new(min_order: i32, coeffs: Vec<Complex64>) -> PyResult<Self> {
        laurent::EpsilonSeries::new(min_order, coeffs).py().map(PySeries)
    }

    #[getter]
    fn min_order(&self) -> i32 {
        self.0.min_order()
    }

    #[getter]
    fn max_order(&self) -> i32 {
        self.0.max_order()
    }

    #[getter]
    fn coeffs(&self) -> Vec<Complex64> {
        self.0.coeffs().to_vec()
    }

    fn coeff(&self, power: i32) -> Complex64 {
        self.0.coeff(power)
    }

    fn eval(&self, epsilon: f64) -> PyResult<Complex64> {
        self.0.eval(epsilon).py()
    }

    /// `({order: residue}, finite)`.
    fn split(&self) -> (BTreeMap<u32, Complex64>, Complex64) {
        let s = self.0.split();
        (s.singular, s.finite)
    }

    fn reciprocal(&self) -> PyResult<Self> {
        self.0.reciprocal().py().map(PySeries)
    }

    fn exp(&self) -> PyResult<Self> {
        self.0.exp().py().map(PySeries)
    }

    fn truncate(&self, max_order: i32) -> PyResult<Self> {
        self.0.truncate(max_order).py().map(PySeries)
    }

    fn __add__(&self, other: &Self) -> Self {
        PySeries(self.0.add(&other.0))
    }

    fn __sub__(&self, other: &Self) -> Self {
        PySeries(self.0.sub(&other.0))
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        self.0.mul(&other.0).py().map(PySeries)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("EpsilonSeries({})", self.0)
    }
}

fn point(m_sq: f64, lambda0: f64, mu: f64) -> PyResult<KinematicPoint> {
    KinematicPoint::new(m_sq, lambda0, mu, 0.0).py()
}

fn couplings(lambda0: f64, m_sq: f64, mu: f64, cosmological: f64) -> PyResult<CouplingSet> {
    CouplingSet::new(lambda0, m_sq, cosmological, mu).py()
}

#[pyfunction]
fn gamma_laurent(a: i32, b: f64, order: i32) -> PyResult<PySeries> {
    laurent::gamma_laurent(a, b, order).py().map(PySeries)
}

#[pyfunction]
fn scale_power(ratio: f64, b: f64, order: i32) -> PyResult<PySeries> {
    laurent::scale_power(ratio, b, order).py().map(PySeries)
}

#[pyfunction]
#[pyo3(signature = (m_sq, mu = 1.0, order = 1))]
fn tadpole(m_sq: f64, mu: f64, order: i32) -> PyResult<PySeries> {
    Ok(PySeries(graphs::tadpole(&point(m_sq, 0.0, mu)?, order).py()?.series))
}

/// Euclidean fish graph by Feynman-parameter quadrature.
#[pyfunction]
#[pyo3(signature = (p_sq, m_sq, mu = 1.0, order = 0, tol = DEFAULT_QUAD_TOL))]
fn fish(p_sq: f64, m_sq: f64, mu: f64, order: i32, tol: f64) -> PyResult<PySeries> {
    Ok(PySeries(graphs::fish(p_sq, &point(m_sq, 0.0, mu)?, order, tol).py()?.series))
}

/// Finite part of the fish graph in the Mandelstam variable `s`.
#[pyfunction]
#[pyo3(signature = (s, m_sq, mu = 1.0))]
fn fish_closed_form(s: f64, m_sq: f64, mu: f64) -> PyResult<Complex64> {
    graphs::fish_closed_form(s, &point(m_sq, 0.0, mu)?).py()
}

#[pyfunction]
#[pyo3(signature = (m_sq, lambda0, mu = 1.0, order = 1))]
fn double_scoop(m_sq: f64, lambda0: f64, mu: f64, order: i32) -> PyResult<PySeries> {
    Ok(PySeries(graphs::double_scoop(&point(m_sq, lambda0, mu)?, order).py()?.series))
}

#[pyfunction]
#[pyo3(signature = (p_sq, m_sq, lambda0, mu = 1.0, order = 1))]
fn setting_sun(p_sq: f64, m_sq: f64, lambda0: f64, mu: f64, order: i32) -> PyResult<PySeries> {
    Ok(PySeries(graphs::setting_sun(p_sq, &point(m_sq, lambda0, mu)?, order).py()?.series))
}

#[pyfunction]
#[pyo3(signature = (lambda0, m_sq, s, t, u, mu = 1.0))]
fn amplitude_t(lambda0: f64, m_sq: f64, s: f64, t: f64, u: f64, mu: f64) -> PyResult<Complex64> {
    renorm::amplitude_T(&couplings(lambda0, m_sq, mu, 0.0)?, s, t, u).py()
}

#[pyfunction]
#[pyo3(signature = (lambda0, m_sq, mu = 1.0))]
fn physical_mass_sq(lambda0: f64, m_sq: f64, mu: f64) -> PyResult<f64> {
    renorm::physical_mass_sq(&couplings(lambda0, m_sq, mu, 0.0)?).py()
}

#[pyfunction]
#[pyo3(signature = (p_sq, lambda0, m_sq, mu = 1.0))]
fn propagator_inverse(p_sq: f64, lambda0: f64, m_sq: f64, mu: f64) -> PyResult<f64> {
    renorm::propagator_inverse(p_sq, &couplings(lambda0, m_sq, mu, 0.0)?).py()
}

/// `(subtraction, standard, offset)` energy densities.
#[pyfunction]
#[pyo3(signature = (lambda0, m_sq, mu = 1.0, cosmological = 0.0, order = 1))]
fn energy_density(lambda0: f64, m_sq: f64, mu: f64, cosmological: f64, order: u8) -> PyResult<(f64, f64, f64)> {
    let c = couplings(lambda0, m_sq, mu, cosmological)?;
    Ok((
        renorm::energy_density(&c, order).py()?,
        renorm::energy_density_standard(&c, order).py()?,
        renorm::energy_scheme_offset(&c, order).py()?,
    ))
}

#[pyfunction]
#[pyo3(signature = (lambda0, m_sq, mu = 1.0, cosmological = 0.0))]
fn beta_functions<'py>(
    py: Python<'py>,
    lambda0: f64,
    m_sq: f64,
    mu: f64,
    cosmological: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let b = renorm::beta_functions(&couplings(lambda0, m_sq, mu, cosmological)?).py()?;
    let d = PyDict::new(py);
    d.set_item("beta_lambda", b.beta_lambda)?;
    d.set_item("gamma_m", b.gamma_m)?;
    d.set_item("beta_Lambda", b.beta_cosmological)?;
    Ok(d)
}

/// `([(mu, lambda0, m0_sq, Lambda0), …], halted_at_landau)`.
type FlowPoints = Vec<(f64, f64, f64, f64)>;

#[pyfunction]
#[pyo3(signature = (lambda0, m_sq, mu, mu_end, steps = 256, cosmological = 0.0))]
fn rg_flow(
    lambda0: f64,
    m_sq: f64,
    mu: f64,
    mu_end: f64,
    steps: usize,
    cosmological: f64,
) -> PyResult<(FlowPoints, bool)> {
    let t = renorm::rg_flow(&couplings(lambda0, m_sq, mu, cosmological)?, mu_end, steps).py()?;
    let points = t
        .points
        .iter()
        .map(|p| (p.mu, p.lambda0, p.m0_sq, p.cosmological))
        .collect();
    Ok((points, t.halted_at_landau))
}

#[pyfunction]
#[pyo3(signature = (lambda0, m_sq, mu = 1.0))]
fn pole_cancellation_report<'py>(
    py: Python<'py>,
    lambda0: f64,
    m_sq: f64,
    mu: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let reports = renorm::pole_cancellation_report(&couplings(lambda0, m_sq, mu, 0.0)?).py()?;
    reports
        .into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("quantity_name", r.quantity_name)?;
            d.set_item("residuals", r.residuals)?;
            d.set_item("finite", r.finite)?;
            d.set_item("is_finite", r.is_finite)?;
            Ok(d)
        })
        .collect()
}

fn invariants(r: f64, ricci_sq: f64, riemann_sq: f64, box_r: f64, xi: f64) -> PyResult<CurvatureInvariants> {
    let c = CurvatureInvariants {
        r,
        ricci_sq,
        riemann_sq,
        box_r,
        xi,
    };
    c.validate().py()?;
    Ok(c)
}

/// `(a0, a1, a2)`.
#[pyfunction]
#[pyo3(signature = (r = 0.0, ricci_sq = 0.0, riemann_sq = 0.0, box_r = 0.0, xi = 0.0))]
fn dewitt_coefficients(r: f64, ricci_sq: f64, riemann_sq: f64, box_r: f64, xi: f64) -> PyResult<(f64, f64, f64)> {
    let a = curved::dewitt_coefficients(&invariants(r, ricci_sq, riemann_sq, box_r, xi)?);
    Ok((a.a0, a.a1, a.a2))
}

/// Euclidean coincidence value `−i · lim Δ_F^(r)`.
#[pyfunction]
#[pyo3(signature = (m, l, g = 0.0, tail = Vec::new(), r = 0.0, ricci_sq = 0.0, riemann_sq = 0.0, box_r = 0.0, xi = 0.0))]
#[allow(clippy::too_many_arguments)]
fn coincidence_limit(
    m: f64,
    l: f64,
    g: f64,
    tail: Vec<f64>,
    r: f64,
    ricci_sq: f64,
    riemann_sq: f64,
    box_r: f64,
    xi: f64,
) -> PyResult<f64> {
    let c = invariants(r, ricci_sq, riemann_sq, box_r, xi)?;
    Ok(curved::coincidence_limit(&c, m, &tail, l, g).py()?.euclidean())
}

#[pyfunction]
fn l_from_mu(m: f64, mu: f64) -> f64 {
    curved::l_from_mu(m, mu)
}

/// `(G_phys, Lambda_phys)`.
#[pyfunction]
#[pyo3(signature = (g0, m, l, g, cosmological = 0.0))]
fn renormalized_constants(g0: f64, m: f64, l: f64, g: f64, cosmological: f64) -> PyResult<(f64, f64)> {
    let gc = GravitationalConstants {
        g0,
        cosmological,
        l,
        g,
        alpha_abc: [0.0; 3],
    };
    let r = curved::renormalized_constants(&gc, m).py()?;
    Ok((r.g_phys, r.lambda_phys))
}

type TermTuple = (String, String, usize, f64);

fn name<T: std::fmt::Debug>(v: &T) -> String {
    // snake_case of the Rust variant name, matching the JSON form
    let s = format!("{v:?}");
    let mut out = String::new();
    for (i, ch) in s.chars().enumerate() {
        if ch.is_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.extend(ch.to_lowercase());
        } else {
            out.push(ch);
        }
    }
    out
}

fn terms(e: &SingularBasisExpansion) -> Vec<TermTuple> {
    e.term_list()
        .into_iter()
        .map(|t| (name(&t.key.channel), name(&t.key.tag), t.key.source, t.coefficient))
        .collect()
}

/// `[(channel, tag, source, coefficient), …]`.
#[pyfunction]
#[pyo3(signature = (sigma, m, a, vanvleck = 1.0))]
fn hadamard_expand(sigma: f64, m: f64, a: Vec<f64>, vanvleck: f64) -> PyResult<Vec<TermTuple>> {
    let e = hadamard::hadamard_expand(&HadamardInput { sigma, m, a, vanvleck }).py()?;
    Ok(terms(&e))
}

/// `(singular_terms, regular_terms)`.
#[pyfunction]
#[pyo3(signature = (sigma, m, a, a_count = 3, vanvleck = 1.0))]
fn hadamard_split(
    sigma: f64,
    m: f64,
    a: Vec<f64>,
    a_count: usize,
    vanvleck: f64,
) -> PyResult<(Vec<TermTuple>, Vec<TermTuple>)> {
    let e = hadamard::hadamard_expand(&HadamardInput { sigma, m, a, vanvleck }).py()?;
    let s = hadamard::hadamard_split(&e, a_count).py()?;
    Ok((terms(&s.singular), terms(&s.regular)))
}

/// `(family, center, width)` or `(family, center, width, amplitude)`.
type KernelArg<'py> = Bound<'py, PyAny>;

fn kernel(k: &KernelArg) -> PyResult<KernelFamily> {
    let (family, center, width, amplitude) = match k.extract::<(String, f64, f64, f64)>() {
        Ok(full) => full,
        Err(_) => {
            let (family, center, width) = k.extract::<(String, f64, f64)>()?;
            (family, center, width, 1.0)
        }
    };
    let f = match family.as_str() {
        "gaussian" => KernelFamily::Gaussian { center, width, amplitude },
        "lorentzian" => KernelFamily::Lorentzian { center, width, amplitude },
        other => return Err(PyValueError::new_err(format!("unknown kernel family '{other}'"))),
    };
    f.validate().py()?;
    Ok(f)
}

/// `[(t, diagonal, off_diagonal, aliasing), …]` for family kernels on
/// `[omega_min, omega_max]`. Each kernel is `(diagonal_spec, regular_spec)`.
#[pyfunction]
#[pyo3(signature = (state, observable, times, omega_min = 0.0, omega_max = functional::DEFAULT_OMEGA_MAX, nodes = 257))]
fn decoherence_scan<'py>(
    state: (KernelArg<'py>, KernelArg<'py>),
    observable: (KernelArg<'py>, KernelArg<'py>),
    times: Vec<f64>,
    omega_min: f64,
    omega_max: f64,
    nodes: usize,
) -> PyResult<Vec<(f64, Complex64, Complex64, bool)>> {
    let grid = SpectrumGrid::new(omega_min, omega_max, nodes).py()?;
    let rho = VHState::from_family(&grid, &kernel(&state.0)?, &kernel(&state.1)?).py()?;
    let op = VHOperator::from_family(&grid, &kernel(&observable.0)?, &kernel(&observable.1)?).py()?;
    let scan = functional::decoherence_scan(&rho, &op, &times).py()?;
    Ok(scan
        .into_iter()
        .map(|p| (p.t, p.diagonal, p.off_diagonal, p.aliasing))
        .collect())
}

/// Phase-free pairing `⟨ρ, O⟩` for family kernels.
#[pyfunction]
#[pyo3(signature = (state, observable, omega_min = 0.0, omega_max = functional::DEFAULT_OMEGA_MAX, nodes = 257))]
fn pairing<'py>(
    state: (KernelArg<'py>, KernelArg<'py>),
    observable: (KernelArg<'py>, KernelArg<'py>),
    omega_min: f64,
    omega_max: f64,
    nodes: usize,
) -> PyResult<Complex64> {
    let grid = SpectrumGrid::new(omega_min, omega_max, nodes).py()?;
    let rho = VHState::from_family(&grid, &kernel(&state.0)?, &kernel(&state.1)?).py()?;
    let op = VHOperator::from_family(&grid, &kernel(&observable.0)?, &kernel(&observable.1)?).py()?;
    functional::pairing(&rho, &op).py()
}

/// Dimensional-regularization workbench: Laurent series in ε, φ⁴ graphs,
/// renormalization, curved-space coefficients and kernel pairings.
#[pymodule]
mod subtraction {
    #[pymodule_export]
    use super::{
        amplitude_t, beta_functions, coincidence_limit, decoherence_scan, dewitt_coefficients,
        double_scoop, energy_density, fish, fish_closed_form, gamma_laurent, hadamard_expand,
        hadamard_split, l_from_mu, pairing, physical_mass_sq, pole_cancellation_report,
        propagator_inverse, renormalized_constants, rg_flow, scale_power, setting_sun, tadpole,
        PySeries,
    };
}
