//! JSON problem files read by the command-line front end.
//!
//! ```json
//! {
//!   "problem": { "kind": "truss", "ea": [1.0, 1.0, 0.5, 0.5], "f": [0, 0, 0, 0] },
//!   "mesh": { "elements": 4 },
//!   "boundary": { "u_l": 0.0, "u_r": 1.0 },
//!   "solver": { "r_init": 0.2, "r_min": 1e-4, "sampler": "exact" }
//! }
//! ```
//!
//! `"kind": "general"` problems take `x_l`, `x_r`, coefficients `p`, `q`, `f`
//! (a number or `{"table": [[x, y], ...]}`) and an optional `quad_order`.
//! Truss problems live on the unit interval; per-element `ea` and `f` are
//! either arrays or tables sampled at element midpoints.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::box_solver::BoxConfig;
use crate::error::Error;
use crate::fem::{
    compute_element_vectors, truss_functional_vectors, Coefficient, ElementVector, Mesh1D, PiecewiseLinear, Problem1D,
};
use crate::sampler::{AnnealSchedule, Sampler, SamplerKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub problem: ProblemKind,
    pub mesh: MeshInput,
    pub boundary: BoundaryInput,
    #[serde(default)]
    pub solver: SolverInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemKind {
    General {
        x_l: f64,
        x_r: f64,
        p: CoefficientInput,
        #[serde(default = "zero_coefficient")]
        q: CoefficientInput,
        #[serde(default = "zero_coefficient")]
        f: CoefficientInput,
        #[serde(default = "default_quad_order")]
        quad_order: usize,
    },
    Truss {
        ea: ElementValues,
        #[serde(default = "zero_loads")]
        f: ElementValues,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientInput {
    Constant(f64),
    Table { table: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementValues {
    Constant(f64),
    PerElement(Vec<f64>),
    Table { table: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeshInput {
    Uniform { elements: usize },
    Nodes { nodes: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryInput {
    pub u_l: f64,
    pub u_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleInput {
    pub sweeps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub reads: usize,
}

impl Default for ScheduleInput {
    fn default() -> Self {
        let d = AnnealSchedule::default();
        Self {
            sweeps: d.sweeps,
            beta_start: d.beta_start,
            beta_end: d.beta_end,
            reads: d.reads,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverInput {
    pub r_init: f64,
    pub r_min: f64,
    pub gap_factor: f64,
    pub sampler: SamplerKind,
    pub schedule: ScheduleInput,
    pub seed: u64,
    pub init_center: Option<Vec<f64>>,
    pub max_iterations: usize,
    pub energy_ceiling: Option<f64>,
}

impl Default for SolverInput {
    fn default() -> Self {
        let d = BoxConfig::default();
        Self {
            r_init: d.r_init,
            r_min: d.r_min,
            gap_factor: d.gap_factor,
            sampler: SamplerKind::Exact,
            schedule: ScheduleInput::default(),
            seed: 0,
            init_center: None,
            max_iterations: d.max_iterations,
            energy_ceiling: d.energy_ceiling,
        }
    }
}

fn zero_coefficient() -> CoefficientInput {
    CoefficientInput::Constant(0.0)
}

fn zero_loads() -> ElementValues {
    ElementValues::Constant(0.0)
}

fn default_quad_order() -> usize {
    2
}

/// A problem file that failed to parse or validate.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "{field}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for InputError {}

/// Everything the solver needs, derived from a [`ProblemFile`].
#[derive(Debug, Clone)]
pub struct BuiltProblem {
    pub nodes: Vec<f64>,
    pub elements: Vec<ElementVector>,
    pub u_l: f64,
    pub u_r: f64,
    pub config: BoxConfig,
    pub init_center: Option<Vec<f64>>,
}

impl BuiltProblem {
    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }
}

impl ProblemFile {
    /// Parses JSON; syntax and schema errors carry the serde line number.
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        serde_json::from_str(text).map_err(|e| InputError {
            line: Some(e.line()).filter(|&l| l > 0),
            field: None,
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem input serializes")
    }

    /// Validates and builds the element vectors and solver configuration.
    /// `source` is the original file text, used to anchor errors to a line.
    pub fn build(&self, source: Option<&str>) -> Result<BuiltProblem, InputError> {
        let fail = |field: &str, message: String| InputError {
            line: source.and_then(|s| locate_field(s, field)),
            field: Some(field.to_string()),
            message,
        };

        let BoundaryInput { u_l, u_r } = self.boundary;
        if !u_l.is_finite() {
            return Err(fail("u_l", "boundary value must be finite".into()));
        }
        if !u_r.is_finite() {
            return Err(fail("u_r", "boundary value must be finite".into()));
        }

        let (nodes, elements) = match &self.problem {
            ProblemKind::General {
                x_l,
                x_r,
                p,
                q,
                f,
                quad_order,
            } => {
                if !(x_l < x_r) {
                    return Err(fail("x_l", format!("x_l must be less than x_r, got {x_l} >= {x_r}")));
                }
                if *quad_order < 2 {
                    return Err(fail("quad_order", format!("must be at least 2, got {quad_order}")));
                }
                let p = coefficient(p).map_err(|e| fail("p", e.to_string()))?;
                let q = coefficient(q).map_err(|e| fail("q", e.to_string()))?;
                let f = coefficient(f).map_err(|e| fail("f", e.to_string()))?;
                let problem =
                    Problem1D::new(*x_l, *x_r, p, q, f, u_l, u_r).map_err(|e| fail("problem", e.to_string()))?;
                let mesh = match &self.mesh {
                    MeshInput::Uniform { elements } => problem
                        .uniform_mesh(*elements)
                        .map_err(|e| fail("elements", e.to_string()))?,
                    MeshInput::Nodes { nodes } => {
                        if nodes.first() != Some(x_l) || nodes.last() != Some(x_r) {
                            return Err(fail(
                                "nodes",
                                format!("nodes must start at x_l = {x_l} and end at x_r = {x_r}"),
                            ));
                        }
                        Mesh1D::new(nodes.clone()).map_err(|e| fail("nodes", e.to_string()))?
                    }
                };
                let elements = compute_element_vectors(&problem, &mesh, *quad_order).map_err(|e| {
                    let msg = e.to_string();
                    let field = if msg.contains("p must") {
                        "p"
                    } else if msg.contains("q must") {
                        "q"
                    } else if msg.contains("f must") {
                        "f"
                    } else {
                        "mesh"
                    };
                    fail(field, msg)
                })?;
                (mesh.nodes().to_vec(), elements)
            }
            ProblemKind::Truss { ea, f } => {
                let n = match &self.mesh {
                    MeshInput::Uniform { elements } if *elements >= 1 => *elements,
                    MeshInput::Uniform { .. } => {
                        return Err(fail("elements", "at least one element is required".into()))
                    }
                    MeshInput::Nodes { .. } => {
                        return Err(fail(
                            "nodes",
                            "truss problems use a uniform mesh, give \"elements\"".into(),
                        ))
                    }
                };
                let ea_values = element_values(ea, n).map_err(|m| fail("ea", m))?;
                let f_values = element_values(f, n).map_err(|m| fail("f", m))?;
                let elements =
                    truss_functional_vectors(&ea_values, &f_values, n).map_err(|e| fail("ea", e.to_string()))?;
                let mesh = Mesh1D::uniform(0.0, 1.0, n).map_err(|e| fail("elements", e.to_string()))?;
                (mesh.nodes().to_vec(), elements)
            }
        };

        let solver = &self.solver;
        let sampler = match solver.sampler {
            SamplerKind::Exact => Sampler::Exact,
            SamplerKind::Sa => Sampler::SimulatedAnnealing(AnnealSchedule {
                sweeps: solver.schedule.sweeps,
                beta_start: solver.schedule.beta_start,
                beta_end: solver.schedule.beta_end,
                reads: solver.schedule.reads,
                seed: solver.seed,
            }),
        };
        if let Sampler::SimulatedAnnealing(s) = &sampler {
            s.validate().map_err(|e| fail("schedule", e.to_string()))?;
        }
        let config = BoxConfig {
            r_init: solver.r_init,
            r_min: solver.r_min,
            gap_factor: solver.gap_factor,
            sampler,
            max_iterations: solver.max_iterations,
            energy_ceiling: solver.energy_ceiling,
            ..BoxConfig::default()
        };
        if !(solver.r_init > 0.0) || !solver.r_init.is_finite() {
            return Err(fail("r_init", format!("must be positive, got {}", solver.r_init)));
        }
        if !(solver.r_min > 0.0 && solver.r_min < solver.r_init) {
            return Err(fail(
                "r_min",
                format!(
                    "need 0 < r_min < r_init, got r_min = {}, r_init = {}",
                    solver.r_min, solver.r_init
                ),
            ));
        }
        config.validate().map_err(|e| {
            let msg = e.to_string();
            let field = if msg.contains("gap factor") {
                "gap_factor"
            } else if msg.contains("max_iterations") {
                "max_iterations"
            } else if msg.contains("ceiling") {
                "energy_ceiling"
            } else {
                "solver"
            };
            fail(field, msg)
        })?;

        if let Some(c) = &solver.init_center {
            if c.len() != nodes.len() {
                return Err(fail(
                    "init_center",
                    format!("has {} values, the mesh has {} nodes", c.len(), nodes.len()),
                ));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(fail("init_center", "values must be finite".into()));
            }
        }

        Ok(BuiltProblem {
            nodes,
            elements,
            u_l,
            u_r,
            config,
            init_center: solver.init_center.clone(),
        })
    }
}

fn table(points: &[[f64; 2]]) -> Result<PiecewiseLinear, Error> {
    PiecewiseLinear::new(points.iter().map(|&[x, y]| (x, y)).collect())
}

fn coefficient(input: &CoefficientInput) -> Result<Coefficient, Error> {
    match input {
        CoefficientInput::Constant(c) => Ok(Coefficient::Constant(*c)),
        CoefficientInput::Table { table: t } => Ok(Coefficient::Table(table(t)?)),
    }
}

fn element_values(input: &ElementValues, n: usize) -> Result<Vec<f64>, String> {
    match input {
        ElementValues::Constant(c) => Ok(vec![*c; n]),
        ElementValues::PerElement(v) if v.len() == n => Ok(v.clone()),
        ElementValues::PerElement(v) => Err(format!("expected {n} per-element values, got {}", v.len())),
        ElementValues::Table { table: t } => {
            let t = table(t).map_err(|e| e.to_string())?;
            Ok((0..n).map(|i| t.eval((i as f64 + 0.5) / n as f64)).collect())
        }
    }
}

/// First line (1-based) on which `"field"` appears as a JSON key.
fn locate_field(source: &str, field: &str) -> Option<usize> {
    let needle = format!("\"{field}\"");
    source.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}
