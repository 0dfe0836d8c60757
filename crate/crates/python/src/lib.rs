//! Python bindings. Points are 1-based on the Python side.

use num_bigint::BigUint;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cyclewalk::analytics::{self, ThresholdForm};
use cyclewalk::{distance, experiments, replica_rng, ExperimentConfig, StepEvent};
use rand_chacha::ChaCha8Rng;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_zero_based(xs: &[u32], n: usize) -> PyResult<Vec<u32>> {
    xs.iter()
        .map(|&x| {
            if x == 0 || x as usize > n {
                Err(value_err(format!("point {x} is outside 1..={n}")))
            } else {
                Ok(x - 1)
            }
        })
        .collect()
}

fn one_based(cycles: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    cycles
        .into_iter()
        .map(|c| c.into_iter().map(|x| x + 1).collect())
        .collect()
}

fn event_tuple(ev: StepEvent) -> (&'static str, Vec<u32>) {
    match ev {
        StepEvent::Coagulation { merged } => ("coagulation", vec![merged]),
        StepEvent::Fragmentation { pieces: (a, b) } => ("fragmentation", vec![a, b]),
    }
}

#[pyclass(name = "Permutation", module = "cyclewalk", skip_from_py_object)]
#[derive(Clone)]
struct PyPermutation {
    inner: cyclewalk::Permutation,
}

#[pymethods]
impl PyPermutation {
    /// `Permutation(n, cycles=[])` with 1-based cycles.
    #[new]
    #[pyo3(signature = (n, cycles = Vec::new()))]
    fn new(n: usize, cycles: Vec<Vec<u32>>) -> PyResult<Self> {
        let cycles = cycles
            .iter()
            .map(|c| to_zero_based(c, n))
            .collect::<PyResult<Vec<_>>>()?;
        let inner = cyclewalk::Permutation::from_cycles(n, &cycles).map_err(value_err)?;
        Ok(Self { inner })
    }

    /// From the image list `[σ(1), …, σ(n)]`.
    #[staticmethod]
    fn from_images(images: Vec<u32>) -> PyResult<Self> {
        let succ = to_zero_based(&images, images.len())?;
        let inner = cyclewalk::Permutation::from_succ(succ).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn parse(n: usize, text: &str) -> PyResult<Self> {
        let cycles = cyclewalk::parse_cycle_notation(text).map_err(value_err)?;
        let inner = cyclewalk::Permutation::from_cycles(n, &cycles).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn images(&self) -> Vec<u32> {
        self.inner.succ().iter().map(|x| x + 1).collect()
    }

    fn cycles(&self) -> Vec<Vec<u32>> {
        one_based(self.inner.cycles())
    }

    fn num_cycles(&self) -> usize {
        self.inner.num_cycles()
    }

    fn largest(&self) -> u32 {
        self.inner.largest()
    }

    fn is_identity(&self) -> bool {
        self.inner.is_identity()
    }

    /// Left-multiply by `(i j)`; returns `("coagulation", [merged])` or
    /// `("fragmentation", [piece_i, piece_j])`.
    fn apply_transposition(&mut self, i: u32, j: u32) -> PyResult<(&'static str, Vec<u32>)> {
        let ij = to_zero_based(&[i, j], self.inner.len())?;
        let ev = self.inner.apply_transposition(ij[0], ij[1]).map_err(value_err)?;
        Ok(event_tuple(ev))
    }

    fn apply_cycle(&mut self, cycle: Vec<u32>) -> PyResult<Vec<(&'static str, Vec<u32>)>> {
        let c = to_zero_based(&cycle, self.inner.len())?;
        let evs = self.inner.apply_cycle(&c).map_err(value_err)?;
        Ok(evs.into_iter().map(event_tuple).collect())
    }

    fn audit(&self) -> PyResult<()> {
        self.inner.audit().map_err(PyRuntimeError::new_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __str__(&self) -> String {
        self.inner.to_cycle_notation()
    }

    fn __repr__(&self) -> String {
        format!("Permutation({}, '{}')", self.inner.len(), self.inner.to_cycle_notation())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner.succ() == other.inner.succ()
    }
}

#[pyclass(name = "ConjugacyClass", module = "cyclewalk", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyClass {
    inner: cyclewalk::ConjugacyClass,
}

#[pymethods]
impl PyClass {
    /// `ConjugacyClass("k2=1,k3=2")`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Self { inner: spec.parse().map_err(value_err)? })
    }

    #[staticmethod]
    fn k_cycles(k: u32) -> PyResult<Self> {
        if k < 2 {
            return Err(value_err("k must be >= 2"));
        }
        Ok(Self { inner: cyclewalk::ConjugacyClass::k_cycles(k) })
    }

    fn count(&self, j: u32) -> u32 {
        self.inner.count(j)
    }

    #[getter]
    fn weight(&self) -> u32 {
        self.inner.weight()
    }

    #[getter]
    fn support_size(&self) -> usize {
        self.inner.support_size()
    }

    #[getter]
    fn branching_rate(&self) -> f64 {
        self.inner.branching_rate()
    }

    #[getter]
    fn critical_time(&self) -> f64 {
        self.inner.critical_time()
    }

    fn class_size(&self, n: usize) -> PyResult<BigUint> {
        self.inner.class_size(n).map_err(value_err)
    }

    /// One uniform element on `n` points as 1-based cycles.
    #[pyo3(signature = (n, seed, stream = 0))]
    fn sample(&self, n: usize, seed: u64, stream: u64) -> PyResult<Vec<Vec<u32>>> {
        let mut rng = replica_rng(seed, stream);
        Ok(one_based(self.inner.sample_step(n, &mut rng).map_err(value_err)?))
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("ConjugacyClass('{}')", self.inner)
    }
}

#[pyclass(name = "WalkState", module = "cyclewalk")]
struct PyWalk {
    inner: cyclewalk::WalkState,
    rng: ChaCha8Rng,
    replica: u64,
}

#[pymethods]
impl PyWalk {
    /// Walk on `n` points from the identity; `watch` lists 1-based vertices
    /// whose hypergraph degree is tracked.
    #[new]
    #[pyo3(signature = (class_, n, seed = 0, replica = 0, poissonize = false, watch = Vec::new()))]
    fn new(
        class_: &PyClass,
        n: usize,
        seed: u64,
        replica: u64,
        poissonize: bool,
        watch: Vec<u32>,
    ) -> PyResult<Self> {
        let opts = cyclewalk::HyperOptions {
            full_edge_log: false,
            watch: to_zero_based(&watch, n)?,
        };
        let inner = cyclewalk::WalkState::with_options(class_.inner.clone(), n, opts)
            .map_err(value_err)?
            .poissonized(poissonize);
        Ok(Self { inner, rng: replica_rng(seed, replica), replica })
    }

    fn advance(&mut self, steps: u64) -> PyResult<()> {
        self.inner.advance(&mut self.rng, steps).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn advance_to(&mut self, t: f64) -> PyResult<()> {
        self.inner.advance_to(&mut self.rng, t).map_err(value_err)
    }

    #[getter]
    fn steps(&self) -> u64 {
        self.inner.steps()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }

    fn permutation(&self) -> PyPermutation {
        PyPermutation { inner: self.inner.permutation().clone() }
    }

    /// Degree `Σ (|e| − 1)` of a watched 1-based vertex.
    fn degree(&self, v: u32) -> PyResult<Option<u64>> {
        let v = to_zero_based(&[v], self.inner.n())?[0];
        Ok(self.inner.hypergraph().degree(v))
    }

    fn census<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let snap = self.inner.hypergraph().snapshot();
        let d = PyDict::new(py);
        d.set_item("components", snap.components)?;
        d.set_item("largest", snap.largest)?;
        d.set_item("hypertrees", snap.census)?;
        d.set_item("good_edges", snap.good_edges)?;
        Ok(d)
    }

    fn checkpoint<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = self.inner.checkpoint(self.replica);
        let d = PyDict::new(py);
        d.set_item("replica", r.replica)?;
        d.set_item("t", r.t)?;
        d.set_item("steps", r.steps)?;
        d.set_item("N", r.cycles)?;
        d.set_item("Nbar", r.components)?;
        d.set_item("lambda", r.largest_cycle)?;
        d.set_item("L", r.largest_component)?;
        d.set_item("frag", r.frag)?;
        d.set_item("frag_small", r.frag_small)?;
        d.set_item("lb_dist", r.lb_dist)?;
        Ok(d)
    }

    fn audit(&self) -> PyResult<()> {
        self.inner.audit_coupling().map_err(PyRuntimeError::new_err)
    }
}

fn threshold_form(form: &str) -> PyResult<ThresholdForm> {
    match form {
        "derived" => Ok(ThresholdForm::Derived),
        "displayed" => Ok(ThresholdForm::Displayed),
        _ => Err(value_err(format!("unknown threshold form {form:?}"))),
    }
}

#[pyfunction]
fn theta(class_: &PyClass, t: f64) -> PyResult<f64> {
    analytics::theta(&class_.inner, t).map_err(value_err)
}

#[pyfunction]
fn u_of_t(class_: &PyClass, t: f64) -> PyResult<f64> {
    analytics::u_of_t(&class_.inner, t).map_err(value_err)
}

#[pyfunction]
fn phi_integral(class_: &PyClass, t: f64) -> PyResult<f64> {
    analytics::phi_integral(&class_.inner, t).map_err(value_err)
}

#[pyfunction]
fn phi_pairwise(class_: &PyClass, t: f64) -> PyResult<f64> {
    analytics::phi_pairwise(&class_.inner, t).map_err(value_err)
}

#[pyfunction]
fn phi_series(k: u32, t: f64) -> PyResult<f64> {
    analytics::phi_series(k, t).map_err(value_err)
}

#[pyfunction]
fn component_limit_series(d: u32, t: f64) -> PyResult<f64> {
    analytics::component_limit_series(d, t).map_err(value_err)
}

#[pyfunction]
fn hypertree_count(d: u32, h: u32) -> PyResult<BigUint> {
    analytics::hypertree_count(d, h).map_err(value_err)
}

/// `(exact, asymptotic)` expected number of `h`-edge hypertree components.
#[pyfunction]
fn expected_hypertrees(n: u64, d: u32, t: f64, h: u32) -> PyResult<(f64, f64)> {
    let e = analytics::expected_hypertrees(n, d, t, h).map_err(value_err)?;
    Ok((e.exact, e.asymptotic))
}

#[pyfunction]
#[pyo3(signature = (class_, t, form = "derived"))]
fn giant_cycle_threshold(class_: &PyClass, t: f64, form: &str) -> PyResult<f64> {
    analytics::giant_cycle_threshold(&class_.inner, t, threshold_form(form)?).map_err(value_err)
}

/// `(exact, bound)`.
#[pyfunction]
fn m_ratio(class_: &PyClass, t: f64) -> PyResult<(f64, f64)> {
    let r = analytics::m_ratio(&class_.inner, t).map_err(value_err)?;
    Ok((r.exact, r.bound))
}

#[pyfunction]
fn profile_csv(class_: &PyClass, grid: Vec<f64>) -> PyResult<String> {
    Ok(analytics::AnalyticProfile::compute(&class_.inner, &grid)
        .map_err(value_err)?
        .to_csv())
}

#[pyfunction]
fn lower_bound(sigma: &PyPermutation, class_: &PyClass) -> u64 {
    distance::lower_bound(&sigma.inner, &class_.inner)
}

/// Product of `k`-cycles equal to `sigma`, leftmost factor applied last.
#[pyfunction]
fn decompose<'py>(py: Python<'py>, sigma: &PyPermutation, k: u32) -> PyResult<Bound<'py, PyDict>> {
    let f = distance::decompose_to_kcycles(&sigma.inner, k).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("k", f.k)?;
    d.set_item("length", f.length)?;
    d.set_item("base", f.base)?;
    d.set_item("correction", f.correction)?;
    d.set_item("residues", f.residues)?;
    d.set_item("constant", f.constant())?;
    d.set_item("factors", one_based(f.factors))?;
    Ok(d)
}

/// Exact Cayley-graph distance, or `None` when `sigma` is not generated.
#[pyfunction]
#[pyo3(signature = (sigma, class_, cap = distance::DEFAULT_BFS_CAP))]
fn bfs_distance(sigma: &PyPermutation, class_: &PyClass, cap: usize) -> PyResult<Option<u32>> {
    distance::bfs_distance(&sigma.inner, &class_.inner, cap).map_err(value_err)
}

/// Run an experiment from a JSON config; returns `(csv, summary_json, passed)`.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_json: &str) -> PyResult<(String, String, bool)> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(value_err)?;
    let out = py
        .detach(|| experiments::run(&cfg))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let passed = out.summary.passed();
    Ok((out.csv, out.summary.to_json(), passed))
}

#[pymodule(name = "cyclewalk")]
fn cyclewalk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPermutation>()?;
    m.add_class::<PyClass>()?;
    m.add_class::<PyWalk>()?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(u_of_t, m)?)?;
    m.add_function(wrap_pyfunction!(phi_integral, m)?)?;
    m.add_function(wrap_pyfunction!(phi_pairwise, m)?)?;
    m.add_function(wrap_pyfunction!(phi_series, m)?)?;
    m.add_function(wrap_pyfunction!(component_limit_series, m)?)?;
    m.add_function(wrap_pyfunction!(hypertree_count, m)?)?;
    m.add_function(wrap_pyfunction!(expected_hypertrees, m)?)?;
    m.add_function(wrap_pyfunction!(giant_cycle_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(m_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(profile_csv, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(bfs_distance, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
