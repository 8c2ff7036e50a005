//! Python bindings for the qchan library: channel parameters, the
//! transmission basis, capacity optimization, the closed form f(νt),
//! extreme-limit residuals and pulse-shaped rate control.
//!
//! Built as the `qchan_py` extension module; see python/smoke_test.py for a
//! usage tour.

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qchan::capacity::{self, LimitCase};
use qchan::channel;
use qchan::error::Error;
use qchan::pulse;
use qchan::state;

fn err(e: Error) -> PyErr {
    match e {
        Error::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix_to_rows(m: &state::Matrix4c) -> Vec<Vec<C64>> {
    (0..4)
        .map(|i| (0..4).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Two-qubit density matrix (basis order |00>, |01>, |10>, |11>).
#[pyclass(name = "DensityMatrix", frozen, from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix {
    inner: state::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// Validates a 4x4 matrix given as rows of complex numbers.
    #[new]
    fn new(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
            return Err(PyValueError::new_err("expected a 4x4 matrix"));
        }
        let m = state::Matrix4c::from_fn(|i, j| rows[i][j]);
        Ok(Self {
            inner: state::DensityMatrix::new(m).map_err(err)?,
        })
    }

    #[staticmethod]
    fn maximally_mixed() -> Self {
        Self {
            inner: state::DensityMatrix::maximally_mixed(),
        }
    }

    /// Matrix entries as a list of four rows of complex numbers.
    fn matrix(&self) -> Vec<Vec<C64>> {
        matrix_to_rows(self.inner.matrix())
    }

    fn eigenvalues(&self) -> [f64; 4] {
        self.inner.eigenvalues().into()
    }

    /// Von Neumann entropy in bits.
    fn entropy(&self) -> f64 {
        state::von_neumann_entropy(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(entropy={:.6})", self.entropy())
    }
}

/// Entanglement parameters (m_phi, m_psi) of the transmission basis.
#[pyclass(name = "BasisParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBasisParams {
    inner: state::BasisParams,
}

#[pymethods]
impl PyBasisParams {
    #[new]
    fn new(m_phi: f64, m_psi: f64) -> PyResult<Self> {
        Ok(Self {
            inner: state::BasisParams::new(m_phi, m_psi).map_err(err)?,
        })
    }

    #[staticmethod]
    fn bell() -> Self {
        Self {
            inner: state::BasisParams::bell(),
        }
    }

    #[staticmethod]
    fn factorized() -> Self {
        Self {
            inner: state::BasisParams::factorized(),
        }
    }

    #[staticmethod]
    fn combined() -> Self {
        Self {
            inner: state::BasisParams::combined(),
        }
    }

    #[getter]
    fn m_phi(&self) -> f64 {
        self.inner.m_phi()
    }

    #[getter]
    fn m_psi(&self) -> f64 {
        self.inner.m_psi()
    }

    fn __repr__(&self) -> String {
        format!("BasisParams(m_phi={}, m_psi={})", self.m_phi(), self.m_psi())
    }
}

/// Channel decoherence parameters (nu1, alpha, zeta, mu).
#[pyclass(name = "ChannelParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyChannelParams {
    inner: channel::ChannelParams,
}

#[pymethods]
impl PyChannelParams {
    #[new]
    fn new(nu1: f64, alpha: f64, zeta: f64, mu: f64) -> PyResult<Self> {
        Ok(Self {
            inner: channel::ChannelParams::new(nu1, alpha, zeta, mu).map_err(err)?,
        })
    }

    #[getter]
    fn nu1(&self) -> f64 {
        self.inner.nu1()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn zeta(&self) -> f64 {
        self.inner.zeta()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu()
    }

    #[getter]
    fn nu0(&self) -> f64 {
        self.inner.nu0()
    }

    fn __repr__(&self) -> String {
        format!(
            "ChannelParams(nu1={}, alpha={}, zeta={}, mu={})",
            self.nu1(),
            self.alpha(),
            self.zeta(),
            self.mu()
        )
    }
}

/// Result of the joint capacity maximization.
#[pyclass(name = "CapacityResult", frozen)]
struct PyCapacityResult {
    inner: capacity::CapacityResult,
}

#[pymethods]
impl PyCapacityResult {
    #[getter]
    fn capacity_bits(&self) -> f64 {
        self.inner.capacity_bits
    }

    #[getter]
    fn p(&self) -> [f64; 4] {
        self.inner.p
    }

    #[getter]
    fn m_phi(&self) -> f64 {
        self.inner.m_phi
    }

    #[getter]
    fn m_psi(&self) -> f64 {
        self.inner.m_psi
    }

    #[getter]
    fn evaluations(&self) -> usize {
        self.inner.evaluations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    fn __repr__(&self) -> String {
        format!(
            "CapacityResult(capacity_bits={:.6}, m_phi={:.3}, m_psi={:.3})",
            self.inner.capacity_bits, self.inner.m_phi, self.inner.m_psi
        )
    }
}

/// One evaluated extreme-limit capacity relation.
#[pyclass(name = "LimitResidual", frozen)]
struct PyLimitResidual {
    inner: capacity::LimitResidual,
}

#[pymethods]
impl PyLimitResidual {
    #[getter]
    fn case(&self) -> String {
        self.inner.case.tag().to_string()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p
    }

    #[getter]
    fn chi_lhs(&self) -> f64 {
        self.inner.chi_lhs
    }

    #[getter]
    fn chi_rhs(&self) -> f64 {
        self.inner.chi_rhs
    }

    #[getter]
    fn f_term(&self) -> f64 {
        self.inner.f_term
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    fn __repr__(&self) -> String {
        format!(
            "LimitResidual(case='{}', p={}, epsilon={:.6})",
            self.inner.case.tag(),
            self.inner.p,
            self.inner.epsilon
        )
    }
}

/// Temporal pulse shape for one qubit.
#[pyclass(name = "PulseSpec", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPulseSpec {
    inner: pulse::PulseSpec,
}

#[pymethods]
impl PyPulseSpec {
    #[staticmethod]
    fn flat(amplitude: f64, duration: f64, delay: f64) -> PyResult<Self> {
        Ok(Self {
            inner: pulse::PulseSpec::flat(amplitude, duration, delay).map_err(err)?,
        })
    }

    #[staticmethod]
    fn gaussian(amplitude: f64, sigma: f64, delay: f64) -> PyResult<Self> {
        Ok(Self {
            inner: pulse::PulseSpec::gaussian(amplitude, sigma, delay).map_err(err)?,
        })
    }

    #[staticmethod]
    fn silent() -> Self {
        Self {
            inner: pulse::PulseSpec::silent(),
        }
    }

    fn with_chirp(&self, rate: f64) -> Self {
        Self {
            inner: self.inner.clone().with_chirp(rate),
        }
    }

    fn with_carrier(&self, omega: f64) -> Self {
        Self {
            inner: self.inner.clone().with_carrier(omega),
        }
    }

    fn envelope_at(&self, t: f64) -> f64 {
        self.inner.envelope_at(t)
    }

    #[getter]
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    #[getter]
    fn delay(&self) -> f64 {
        self.inner.delay()
    }
}

/// Bath correlation function with correlation time t_c and bias factor.
#[pyclass(name = "CorrelationFn", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCorrelationFn {
    inner: pulse::CorrelationFn,
}

#[pymethods]
impl PyCorrelationFn {
    /// kind: "exponential", "gaussian" or "delta".
    #[new]
    #[pyo3(signature = (kind, t_c, scale, bias=1.0, temperature_tag="".to_string()))]
    fn new(kind: &str, t_c: f64, scale: f64, bias: f64, temperature_tag: String) -> PyResult<Self> {
        let kind = match kind {
            "exponential" | "exp" => pulse::CorrelationKind::Exponential,
            "gaussian" => pulse::CorrelationKind::Gaussian,
            "delta" | "delta-approx" => pulse::CorrelationKind::DeltaApprox,
            other => {
                return Err(PyValueError::new_err(format!(
                    "correlation kind `{other}`: want exponential, gaussian or delta"
                )))
            }
        };
        Ok(Self {
            inner: pulse::CorrelationFn::new(kind, t_c, scale, bias, temperature_tag)
                .map_err(err)?,
        })
    }

    fn eval(&self, tau: f64) -> f64 {
        self.inner.eval(tau)
    }

    #[getter]
    fn t_c(&self) -> f64 {
        self.inner.t_c()
    }

    #[getter]
    fn bias(&self) -> f64 {
        self.inner.bias()
    }
}

/// Pair decoherence rates along a time grid.
#[pyclass(name = "RateTrajectory", frozen)]
struct PyRateTrajectory {
    inner: pulse::RateTrajectory,
}

#[pymethods]
impl PyRateTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    /// Decay-sector rate matrices as [[r11, r12], [r21, r22]] per time.
    fn r1(&self) -> Vec<[[f64; 2]; 2]> {
        self.inner
            .rates()
            .iter()
            .map(|r| {
                let m = r.r1();
                [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
            })
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.times().len()
    }
}

/// The four transmission basis states as amplitude vectors.
#[pyfunction]
fn make_basis(basis: &PyBasisParams) -> Vec<Vec<C64>> {
    state::make_basis(basis.inner)
        .iter()
        .map(|psi| psi.amplitudes().iter().copied().collect())
        .collect()
}

/// The four basis states propagated through the channel for time t.
#[pyfunction]
fn apply_channel(
    basis: &PyBasisParams,
    params: &PyChannelParams,
    t: f64,
) -> PyResult<Vec<PyDensityMatrix>> {
    let outs = channel::apply_channel(basis.inner, &params.inner, t).map_err(err)?;
    Ok(outs
        .into_iter()
        .map(|inner| PyDensityMatrix { inner })
        .collect())
}

/// Holevo chi of an ensemble, in bits.
#[pyfunction]
fn holevo_chi(probabilities: [f64; 4], states: Vec<PyDensityMatrix>) -> PyResult<f64> {
    if states.len() != 4 {
        return Err(PyValueError::new_err("expected exactly four states"));
    }
    let e = state::Ensemble::new(
        probabilities,
        [
            states[0].inner.clone(),
            states[1].inner.clone(),
            states[2].inner.clone(),
            states[3].inner.clone(),
        ],
    )
    .map_err(err)?;
    Ok(state::holevo_chi(&e))
}

/// Maximum of chi over the input probabilities for a fixed basis:
/// returns (chi, [p1, p2, p3, p4]).
#[pyfunction]
fn chi_for_basis(
    params: &PyChannelParams,
    t: f64,
    basis: &PyBasisParams,
) -> PyResult<(f64, [f64; 4])> {
    let out = capacity::chi_for_basis(&params.inner, t, basis.inner).map_err(err)?;
    Ok((out.chi, out.p))
}

/// Joint capacity maximum over probabilities and basis entanglement.
#[pyfunction]
fn optimize_capacity(params: &PyChannelParams, t: f64) -> PyResult<PyCapacityResult> {
    Ok(PyCapacityResult {
        inner: capacity::optimize_capacity(&params.inner, t).map_err(err)?,
    })
}

/// Closed-form capacity offset f(nu t).
#[pyfunction]
fn f_closed_form(nu_t: f64) -> PyResult<f64> {
    capacity::f_closed_form(nu_t).map_err(err)
}

/// Residual of the extreme-limit relation whose left-hand side is `case`
/// ("a", "b", "c" or "d").
#[pyfunction]
fn limit_relation_residual(case: &str, p: f64, nu_t: f64) -> PyResult<PyLimitResidual> {
    let case = match case {
        "a" => LimitCase::A,
        "b" => LimitCase::B,
        "c" => LimitCase::C,
        "d" => LimitCase::D,
        other => {
            return Err(PyValueError::new_err(format!(
                "limit case `{other}`: want a, b, c or d"
            )))
        }
    };
    Ok(PyLimitResidual {
        inner: capacity::limit_relation_residual(case, p, nu_t).map_err(err)?,
    })
}

/// Pair decoherence rate R_jk(t) from the pulse pair and the correlation
/// function (0-based qubit indices).
#[pyfunction]
fn compute_rate(
    j: usize,
    k: usize,
    pulse1: &PyPulseSpec,
    pulse2: &PyPulseSpec,
    corr: &PyCorrelationFn,
    t: f64,
) -> PyResult<f64> {
    let pulses = [pulse1.inner.clone(), pulse2.inner.clone()];
    pulse::compute_rate(j, k, &pulses, &corr.inner, t).map_err(err)
}

/// All pair rates on a time grid.
#[pyfunction]
fn rate_trajectory(
    pulse1: &PyPulseSpec,
    pulse2: &PyPulseSpec,
    corr: &PyCorrelationFn,
    grid: Vec<f64>,
) -> PyResult<PyRateTrajectory> {
    let pulses = [pulse1.inner.clone(), pulse2.inner.clone()];
    Ok(PyRateTrajectory {
        inner: pulse::rate_trajectory(&pulses, &corr.inner, &grid).map_err(err)?,
    })
}

/// Channel parameters of the time-averaged trajectory rates over [0, t].
#[pyfunction]
fn effective_params(traj: &PyRateTrajectory, t: f64) -> PyResult<PyChannelParams> {
    Ok(PyChannelParams {
        inner: pulse::effective_params(&traj.inner, t).map_err(err)?,
    })
}

/// Propagates a state under the rate trajectory; returns the final state and
/// the number of non-CP substeps encountered.
#[pyfunction]
fn propagate_with_trajectory(
    rho0: &PyDensityMatrix,
    traj: &PyRateTrajectory,
) -> PyResult<(PyDensityMatrix, usize)> {
    let out = pulse::propagate_with_trajectory(&rho0.inner, &traj.inner).map_err(err)?;
    Ok((PyDensityMatrix { inner: out.state }, out.non_cp_steps))
}

#[pymodule]
fn qchan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyBasisParams>()?;
    m.add_class::<PyChannelParams>()?;
    m.add_class::<PyCapacityResult>()?;
    m.add_class::<PyLimitResidual>()?;
    m.add_class::<PyPulseSpec>()?;
    m.add_class::<PyCorrelationFn>()?;
    m.add_class::<PyRateTrajectory>()?;
    m.add_function(wrap_pyfunction!(make_basis, m)?)?;
    m.add_function(wrap_pyfunction!(apply_channel, m)?)?;
    m.add_function(wrap_pyfunction!(holevo_chi, m)?)?;
    m.add_function(wrap_pyfunction!(chi_for_basis, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(f_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(limit_relation_residual, m)?)?;
    m.add_function(wrap_pyfunction!(compute_rate, m)?)?;
    m.add_function(wrap_pyfunction!(rate_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(effective_params, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_with_trajectory, m)?)?;
    Ok(())
}
