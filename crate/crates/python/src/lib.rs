//! Python bindings. Element vectors cross the boundary as lists of five
//! floats, labelings as lists of ±1 spins.

use annealfem::box_solver::{self, BoxConfig, BoxState};
use annealfem::fem::{self, Coefficient, ElementVector, NodalState, PiecewiseLinear, Problem1D};
use annealfem::ising::{self, NodeCandidates, QubitLabeling};
use annealfem::sampler::{self, AnnealSchedule, Sampler};
use pyo3::exceptions::{PyOverflowError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: annealfem::Error) -> PyErr {
    match e {
        annealfem::Error::Capacity { .. } => PyOverflowError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[derive(FromPyObject)]
enum CoefficientArg {
    Constant(f64),
    Table(Vec<(f64, f64)>),
}

impl CoefficientArg {
    fn into_coefficient(self) -> PyResult<Coefficient> {
        Ok(match self {
            CoefficientArg::Constant(v) => Coefficient::Constant(v),
            CoefficientArg::Table(points) => Coefficient::Table(PiecewiseLinear::new(points).map_err(err)?),
        })
    }
}

fn to_elements(elements: Vec<[f64; 5]>) -> Vec<ElementVector> {
    elements.into_iter().map(ElementVector).collect()
}

fn from_elements(elements: Vec<ElementVector>) -> Vec<[f64; 5]> {
    elements.into_iter().map(|e| e.0).collect()
}

fn candidates(values: Vec<[f64; 3]>) -> PyResult<Vec<NodeCandidates>> {
    values
        .into_iter()
        .map(|v| NodeCandidates::new(v).map_err(err))
        .collect()
}

fn labeling(spins: Vec<i8>) -> PyResult<QubitLabeling> {
    QubitLabeling::new(spins).map_err(err)
}

/// Element vectors `[S_ll, S_rr, S_lr, F_l, F_r]` for `-(p u')' + q u = f`
/// on a uniform mesh. Coefficients are floats or lists of `(x, value)` pairs.
#[pyfunction]
#[pyo3(signature = (x_l, x_r, p, elements, q = CoefficientArg::Constant(0.0), f = CoefficientArg::Constant(0.0), quad_order = 2))]
fn element_vectors(
    x_l: f64,
    x_r: f64,
    p: CoefficientArg,
    elements: usize,
    q: CoefficientArg,
    f: CoefficientArg,
    quad_order: usize,
) -> PyResult<Vec<[f64; 5]>> {
    let problem = Problem1D::new(
        x_l,
        x_r,
        p.into_coefficient()?,
        q.into_coefficient()?,
        f.into_coefficient()?,
        0.0,
        0.0,
    )
    .map_err(err)?;
    let mesh = problem.uniform_mesh(elements).map_err(err)?;
    fem::compute_element_vectors(&problem, &mesh, quad_order)
        .map(from_elements)
        .map_err(err)
}

/// Element vectors of a bar on `[0, 1]` with per-element stiffness and load.
#[pyfunction]
fn truss_vectors(ea: Vec<f64>, f: Vec<f64>) -> PyResult<Vec<[f64; 5]>> {
    let n = ea.len();
    fem::truss_functional_vectors(&ea, &f, n)
        .map(from_elements)
        .map_err(err)
}

#[pyfunction]
fn functional_value(elements: Vec<[f64; 5]>, state: Vec<f64>) -> PyResult<f64> {
    fem::functional_value(&to_elements(elements), &state).map_err(err)
}

/// Nodal values of the direct finite element solve.
#[pyfunction]
fn oracle(elements: Vec<[f64; 5]>, u_l: f64, u_r: f64) -> PyResult<Vec<f64>> {
    fem::classical_fem_solve(&to_elements(elements), u_l, u_r)
        .map(NodalState::into_inner)
        .map_err(err)
}

/// 3x3 coupling block between two nodes' candidate values.
#[pyfunction]
fn element_coupling(element: [f64; 5], left: [f64; 3], right: [f64; 3]) -> PyResult<[[f64; 3]; 3]> {
    let l = NodeCandidates::new(left).map_err(err)?;
    let r = NodeCandidates::new(right).map_err(err)?;
    ising::estimate_element_coupling(&ElementVector(element), &l, &r)
        .map(|j| j.0)
        .map_err(err)
}

/// Nodal values and feasibility of a labeling.
#[pyfunction]
fn decode(spins: Vec<i8>, candidates: Vec<[f64; 3]>) -> PyResult<(Vec<f64>, bool)> {
    let d = ising::decode_state(&labeling(spins)?, &self::candidates(candidates)?).map_err(err)?;
    Ok((d.state.into_inner(), d.feasible))
}

#[pyclass(name = "IsingGraph", module = "annealfem_py", skip_from_py_object)]
#[derive(Clone)]
struct PyIsingGraph {
    inner: ising::IsingGraph,
}

#[pymethods]
impl PyIsingGraph {
    #[new]
    fn new(n_qubits: usize) -> Self {
        Self {
            inner: ising::IsingGraph::new(n_qubits),
        }
    }

    #[staticmethod]
    fn from_edge_list(text: &str) -> PyResult<Self> {
        ising::IsingGraph::from_edge_list(text)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    #[getter]
    fn fields(&self) -> Vec<f64> {
        self.inner.fields().to_vec()
    }

    #[getter]
    fn couplings(&self) -> Vec<(usize, usize, f64)> {
        self.inner.couplings().iter().map(|(&(i, k), &v)| (i, k, v)).collect()
    }

    fn add_field(&mut self, i: usize, value: f64) -> PyResult<()> {
        self.inner.add_field(i, value).map_err(err)
    }

    fn add_coupling(&mut self, i: usize, k: usize, value: f64) -> PyResult<()> {
        self.inner.add_coupling(i, k, value).map_err(err)
    }

    fn energy(&self, spins: Vec<i8>) -> PyResult<f64> {
        ising::ising_energy(&self.inner, &labeling(spins)?).map_err(err)
    }

    /// Discrete functional value behind the energy of an admissible labeling.
    fn functional_from_energy(&self, energy: f64) -> Option<f64> {
        self.inner.functional_from_energy(energy)
    }

    fn to_edge_list(&self) -> String {
        self.inner.to_edge_list()
    }

    fn __repr__(&self) -> String {
        format!(
            "IsingGraph(n_qubits={}, couplings={})",
            self.inner.n_qubits(),
            self.inner.couplings().len()
        )
    }
}

/// Graph for every node's candidates, pinned at `dirichlet` `(node, slot)` pairs.
#[pyfunction]
#[pyo3(signature = (elements, candidates, dirichlet = Vec::new(), penalty_scale = None, gap_factor = 10.0))]
fn assemble(
    elements: Vec<[f64; 5]>,
    candidates: Vec<[f64; 3]>,
    dirichlet: Vec<(usize, usize)>,
    penalty_scale: Option<f64>,
    gap_factor: f64,
) -> PyResult<PyIsingGraph> {
    let cands = self::candidates(candidates)?;
    if cands.len() != elements.len() + 1 {
        return Err(PyValueError::new_err(format!(
            "{} elements need {} candidate triples, got {}",
            elements.len(),
            elements.len() + 1,
            cands.len()
        )));
    }
    let couplings = elements
        .iter()
        .enumerate()
        .map(|(e, s)| ising::estimate_element_coupling(&ElementVector(*s), &cands[e], &cands[e + 1]).map_err(err))
        .collect::<PyResult<Vec<_>>>()?;
    let pins = dirichlet
        .into_iter()
        .map(|(node, slot)| {
            ising::Slot::from_index(slot)
                .map(|s| (node, s))
                .ok_or_else(|| PyValueError::new_err(format!("slot must be 0, 1 or 2, got {slot}")))
        })
        .collect::<PyResult<Vec<_>>>()?;
    let ps = penalty_scale.unwrap_or_else(|| ising::penalty_scale_for(&couplings, gap_factor, 1.0));
    ising::assemble(&cands, &couplings, &pins, ps, 1.0)
        .map(|inner| PyIsingGraph { inner })
        .map_err(err)
}

/// Box graph around `center` with candidates `center ± slack`.
#[pyfunction]
#[pyo3(signature = (elements, center, slack, gap_factor = 10.0, energy_ceiling = Some(1.0)))]
fn box_graph(
    elements: Vec<[f64; 5]>,
    center: Vec<f64>,
    slack: f64,
    gap_factor: f64,
    energy_ceiling: Option<f64>,
) -> PyResult<PyIsingGraph> {
    let config = BoxConfig {
        gap_factor,
        energy_ceiling,
        ..BoxConfig::default()
    };
    let state = BoxState::new(NodalState(center), slack).map_err(err)?;
    box_solver::box_graph(&state, &to_elements(elements), &config)
        .map(|inner| PyIsingGraph { inner })
        .map_err(err)
}

/// Lowest-energy labeling by enumeration, as `(spins, energy)`.
#[pyfunction]
fn solve_exact(graph: &PyIsingGraph) -> PyResult<(Vec<i8>, f64)> {
    let r = sampler::solve_exact(&graph.inner).map_err(err)?;
    Ok((r.labeling.spins().to_vec(), r.energy))
}

/// Annealed reads sorted by energy, as `(spins, energy)` pairs.
#[pyfunction]
#[pyo3(signature = (graph, sweeps = 2000, beta_start = 0.1, beta_end = 10.0, reads = 50, seed = 0))]
fn solve_sa(
    py: Python<'_>,
    graph: &PyIsingGraph,
    sweeps: usize,
    beta_start: f64,
    beta_end: f64,
    reads: usize,
    seed: u64,
) -> PyResult<Vec<(Vec<i8>, f64)>> {
    let schedule = AnnealSchedule {
        sweeps,
        beta_start,
        beta_end,
        reads,
        seed,
    };
    let g = graph.inner.clone();
    let results = py.detach(move || sampler::solve_sa(&g, &schedule)).map_err(err)?;
    Ok(results
        .into_iter()
        .map(|r| (r.labeling.spins().to_vec(), r.energy))
        .collect())
}

/// Runs the box search and returns a dict with `center`, `slack`,
/// `converged`, `bound` and a `history` list.
#[pyfunction]
#[pyo3(signature = (
    elements, u_l, u_r, r_init = 0.2, r_min = 1e-3, gap_factor = 10.0, sampler = "exact", seed = 0,
    sweeps = 2000, reads = 50, max_iterations = 200, energy_ceiling = Some(1.0), init_center = None
))]
#[allow(clippy::too_many_arguments)]
fn run_box<'py>(
    py: Python<'py>,
    elements: Vec<[f64; 5]>,
    u_l: f64,
    u_r: f64,
    r_init: f64,
    r_min: f64,
    gap_factor: f64,
    sampler: &str,
    seed: u64,
    sweeps: usize,
    reads: usize,
    max_iterations: usize,
    energy_ceiling: Option<f64>,
    init_center: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let sampler = match sampler {
        "exact" => Sampler::Exact,
        "sa" => Sampler::SimulatedAnnealing(AnnealSchedule {
            sweeps,
            reads,
            seed,
            ..AnnealSchedule::default()
        }),
        other => {
            return Err(PyValueError::new_err(format!(
                "sampler must be \"exact\" or \"sa\", got {other:?}"
            )))
        }
    };
    let config = BoxConfig {
        r_init,
        r_min,
        gap_factor,
        sampler,
        max_iterations,
        energy_ceiling,
        ..BoxConfig::default()
    };
    let elements = to_elements(elements);
    let run = py
        .detach(|| box_solver::run_box(&elements, u_l, u_r, &config, init_center.as_deref()))
        .map_err(err)?;
    let bound = box_solver::bound_for(&elements, run.slack).map_err(err)?;

    let history = run
        .history
        .iter()
        .map(|rec| {
            let d = PyDict::new(py);
            d.set_item("iteration", rec.iteration)?;
            d.set_item("move", rec.move_kind.as_str())?;
            d.set_item("slack_before", rec.slack_before)?;
            d.set_item("slack_after", rec.slack_after)?;
            d.set_item("energy_before", rec.energy_before)?;
            d.set_item("energy_after", rec.energy_after)?;
            d.set_item("feasible_fraction", rec.feasible_fraction)?;
            d.set_item("center", rec.center.0.clone())?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let out = PyDict::new(py);
    out.set_item("center", run.center.0)?;
    out.set_item("slack", run.slack)?;
    out.set_item("converged", run.converged)?;
    out.set_item("bound", bound)?;
    out.set_item("history", history)?;
    Ok(out)
}

/// Worst-case distance to the exact discrete solution for slack `r`.
#[pyfunction]
fn error_bound(elements: Vec<[f64; 5]>, r: f64) -> PyResult<f64> {
    box_solver::bound_for(&to_elements(elements), r).map_err(err)
}

#[pymodule]
fn annealfem_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyIsingGraph>()?;
    m.add_function(wrap_pyfunction!(element_vectors, m)?)?;
    m.add_function(wrap_pyfunction!(truss_vectors, m)?)?;
    m.add_function(wrap_pyfunction!(functional_value, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(element_coupling, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(assemble, m)?)?;
    m.add_function(wrap_pyfunction!(box_graph, m)?)?;
    m.add_function(wrap_pyfunction!(solve_exact, m)?)?;
    m.add_function(wrap_pyfunction!(solve_sa, m)?)?;
    m.add_function(wrap_pyfunction!(run_box, m)?)?;
    m.add_function(wrap_pyfunction!(error_bound, m)?)?;
    m.add("EXACT_QUBIT_LIMIT", sampler::EXACT_QUBIT_LIMIT)?;
    Ok(())
}
