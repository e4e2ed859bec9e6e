//! Iterative box search: each node may take one of
//! `{center - r, center, center + r}`; the sampled minimizer either becomes
//! the new center (translation) or, when the center itself is best, the
//! slack is halved (contraction).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{functional_value, reduced_stiffness, ElementVector, NodalState};
use crate::ising::{assemble, estimate_element_coupling, penalty_scale_for, IsingGraph, NodeCandidates, Slot};
use crate::linalg::symmetric_tridiagonal_eigenvalues;
use crate::sampler::{best_feasible, feasible_fraction, Sampler};

/// Center `u^c` and slack `r` of the current search box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxState {
    pub center: NodalState,
    pub slack: f64,
}

impl BoxState {
    pub fn new(center: NodalState, slack: f64) -> Result<Self> {
        if !(slack > 0.0) || !slack.is_finite() {
            return Err(Error::Argument(format!("slack must be positive, got {slack}")));
        }
        if center.len() < 2 {
            return Err(Error::Argument("box center needs at least two nodes".into()));
        }
        Ok(Self { center, slack })
    }

    pub fn num_nodes(&self) -> usize {
        self.center.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Translate,
    Contract,
}

impl MoveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MoveKind::Translate => "translate",
            MoveKind::Contract => "contract",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub move_kind: MoveKind,
    pub slack_before: f64,
    pub slack_after: f64,
    /// Functional at the center before and after the move.
    pub energy_before: f64,
    pub energy_after: f64,
    /// Best admissible decoded sample, if any.
    pub minimizer: Option<NodalState>,
    pub minimizer_energy: Option<f64>,
    pub feasible_fraction: f64,
    /// Center after the move.
    pub center: NodalState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxConfig {
    pub r_init: f64,
    pub r_min: f64,
    /// Nodal penalty as a multiple of the largest element coupling.
    pub gap_factor: f64,
    pub sampler: Sampler,
    pub max_iterations: usize,
    /// Largest `|J|` after uniform rescaling; `None` leaves the graph unscaled.
    pub energy_ceiling: Option<f64>,
    /// Relative margin by which the sampled minimum must beat the center to translate.
    pub tie_tolerance: f64,
}

impl Default for BoxConfig {
    fn default() -> Self {
        Self {
            r_init: 0.2,
            r_min: 1e-3,
            gap_factor: 10.0,
            sampler: Sampler::Exact,
            max_iterations: 200,
            energy_ceiling: Some(1.0),
            tie_tolerance: 1e-12,
        }
    }
}

impl BoxConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < self.r_init && self.r_init.is_finite()) {
            return Err(Error::Argument(format!(
                "need 0 < r_min < r_init, got r_min = {}, r_init = {}",
                self.r_min, self.r_init
            )));
        }
        if !(self.gap_factor > 0.0) || !self.gap_factor.is_finite() {
            return Err(Error::Argument(format!(
                "gap factor must be positive, got {}",
                self.gap_factor
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Argument("max_iterations must be at least 1".into()));
        }
        if let Some(c) = self.energy_ceiling {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::Argument(format!("energy ceiling must be positive, got {c}")));
            }
        }
        if !(self.tie_tolerance >= 0.0) {
            return Err(Error::Argument("tie tolerance must be non-negative".into()));
        }
        if let Sampler::SimulatedAnnealing(schedule) = &self.sampler {
            schedule.validate()?;
        }
        Ok(())
    }
}

/// `{u_i - r, u_i, u_i + r}` at every node.
pub fn candidates_from_box(state: &BoxState) -> Result<Vec<NodeCandidates>> {
    let r = state.slack;
    state
        .center
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            NodeCandidates::new([c - r, c, c + r])
                .map_err(|e| Error::Construction(format!("node {i}: {e} (slack {r} below resolution)")))
        })
        .collect()
}

/// Logical graph for the current box: candidates from the box, element
/// couplings fitted to them, nodal penalty `gap_factor * max |J|`, both end
/// nodes pinned at the center slot, then the optional uniform rescaling.
pub fn box_graph(state: &BoxState, elements: &[ElementVector], config: &BoxConfig) -> Result<IsingGraph> {
    let num_nodes = elements.len() + 1;
    if state.num_nodes() != num_nodes {
        return Err(Error::Argument(format!(
            "box has {} nodes but the mesh has {num_nodes}",
            state.num_nodes()
        )));
    }
    let candidates = candidates_from_box(state)?;
    let couplings = elements
        .iter()
        .enumerate()
        .map(|(e, s)| estimate_element_coupling(s, &candidates[e], &candidates[e + 1]))
        .collect::<Result<Vec<_>>>()?;
    let penalty = penalty_scale_for(&couplings, config.gap_factor, 1.0);
    let dirichlet = [(0, Slot::Center), (num_nodes - 1, Slot::Center)];
    let mut graph = assemble(&candidates, &couplings, &dirichlet, penalty, 1.0)?;
    if let Some(ceiling) = config.energy_ceiling {
        graph.rescale_to_ceiling(ceiling)?;
    }
    Ok(graph)
}

/// One iteration of the box search. Both end nodes are Dirichlet nodes
/// pinned at the center slot.
pub fn box_step(
    state: &BoxState,
    elements: &[ElementVector],
    config: &BoxConfig,
    iteration: usize,
) -> Result<(BoxState, IterationRecord)> {
    let graph = box_graph(state, elements, config)?;

    let sampler = match config.sampler {
        Sampler::SimulatedAnnealing(mut schedule) => {
            schedule.seed = schedule
                .seed
                .wrapping_add((iteration as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            Sampler::SimulatedAnnealing(schedule)
        }
        other => other,
    };
    let results = sampler.sample(&graph)?;
    let fraction = feasible_fraction(&results, &graph);
    let best = best_feasible(&results, &graph, elements);

    let energy_before = functional_value(elements, &state.center)?;
    let improves = best.as_ref().is_some_and(|b| {
        let tol = config.tie_tolerance * energy_before.abs().max(b.functional.abs());
        b.functional < energy_before - tol
    });

    let (next, move_kind, energy_after) = match (&best, improves) {
        (Some(b), true) => (
            BoxState {
                center: b.state.clone(),
                slack: state.slack,
            },
            MoveKind::Translate,
            b.functional,
        ),
        _ => (
            BoxState {
                center: state.center.clone(),
                slack: 0.5 * state.slack,
            },
            MoveKind::Contract,
            energy_before,
        ),
    };

    let record = IterationRecord {
        iteration,
        move_kind,
        slack_before: state.slack,
        slack_after: next.slack,
        energy_before,
        energy_after,
        minimizer: best.as_ref().map(|b| b.state.clone()),
        minimizer_energy: best.as_ref().map(|b| b.functional),
        feasible_fraction: fraction,
        center: next.center.clone(),
    };
    Ok((next, record))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxRun {
    pub initial_center: NodalState,
    pub center: NodalState,
    pub slack: f64,
    pub history: Vec<IterationRecord>,
    /// Slack reached `r_min` within `max_iterations`.
    pub converged: bool,
}

/// Runs the box search from `initial_center` (or the straight line between
/// the boundary values) until the slack drops to `r_min` or the iteration
/// budget is spent. End values of a supplied center are replaced by
/// `u_l` and `u_r`.
pub fn run_box(
    elements: &[ElementVector],
    u_l: f64,
    u_r: f64,
    config: &BoxConfig,
    initial_center: Option<&[f64]>,
) -> Result<BoxRun> {
    config.validate()?;
    if elements.is_empty() {
        return Err(Error::Argument("at least one element is required".into()));
    }
    let num_nodes = elements.len() + 1;
    let mut center = match initial_center {
        Some(c) if c.len() != num_nodes => {
            return Err(Error::Argument(format!(
                "initial center has {} values, the mesh has {num_nodes} nodes",
                c.len()
            )))
        }
        Some(c) => NodalState(c.to_vec()),
        None => NodalState::linear(u_l, u_r, num_nodes),
    };
    center.0[0] = u_l;
    center.0[num_nodes - 1] = u_r;

    let initial_center = center.clone();
    let mut state = BoxState::new(center, config.r_init)?;
    let mut history = Vec::new();
    while state.slack > config.r_min && history.len() < config.max_iterations {
        let (next, record) = box_step(&state, elements, config, history.len() + 1)?;
        state = next;
        history.push(record);
    }
    Ok(BoxRun {
        initial_center,
        converged: state.slack <= config.r_min,
        center: state.center,
        slack: state.slack,
        history,
    })
}

/// `2 (1 + (n - 1) lambda_max / lambda_min) r / sqrt(n)`, the distance bound
/// between a box minimizer with slack `r` and the exact discrete minimizer
/// for `n` free unknowns.
pub fn error_bound(r: f64, n: usize, lambda_max: f64, lambda_min: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("error bound needs at least one free unknown".into()));
    }
    if !(lambda_min > 0.0) {
        return Err(Error::Argument(format!(
            "lambda_min must be positive, got {lambda_min}"
        )));
    }
    if !(r >= 0.0) {
        return Err(Error::Argument(format!("slack must be non-negative, got {r}")));
    }
    let nf = n as f64;
    Ok(2.0 * (1.0 + (nf - 1.0) * lambda_max / lambda_min) * r / nf.sqrt())
}

/// `sqrt(2) r (1 + lambda_max / lambda_min)`, the geometric bound for two
/// free unknowns. It does not coincide with [`error_bound`] at `n = 2`.
pub fn planar_error_bound(r: f64, lambda_max: f64, lambda_min: f64) -> Result<f64> {
    if !(lambda_min > 0.0) {
        return Err(Error::Argument(format!(
            "lambda_min must be positive, got {lambda_min}"
        )));
    }
    Ok(std::f64::consts::SQRT_2 * r * (1.0 + lambda_max / lambda_min))
}

/// Extreme eigenvalues of the interior-node Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub free_unknowns: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

pub fn stiffness_spectrum(elements: &[ElementVector]) -> Result<Spectrum> {
    let (diag, off) = reduced_stiffness(elements);
    if diag.is_empty() {
        return Err(Error::Argument("no free unknowns".into()));
    }
    let ev = symmetric_tridiagonal_eigenvalues(&diag, &off)?;
    Ok(Spectrum {
        free_unknowns: diag.len(),
        lambda_min: ev[0],
        lambda_max: ev[ev.len() - 1],
    })
}

/// Bound for a final slack `r`; zero when every node is a Dirichlet node.
pub fn bound_for(elements: &[ElementVector], r: f64) -> Result<f64> {
    if elements.len() < 2 {
        return Ok(0.0);
    }
    let s = stiffness_spectrum(elements)?;
    error_bound(r, s.free_unknowns, s.lambda_max, s.lambda_min)
}
