//! Low-energy labelings of an [`IsingGraph`]: exhaustive enumeration for
//! small graphs and seeded single-spin-flip simulated annealing.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{functional_value, ElementVector, NodalState};
use crate::ising::{decode_state, ising_energy, raw_energy, IsingGraph, QubitLabeling};

/// Largest graph [`solve_exact`] will enumerate.
pub const EXACT_QUBIT_LIMIT: usize = 24;

/// Energies are recomputed from scratch this often during enumeration.
const RESYNC_INTERVAL: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub labeling: QubitLabeling,
    pub energy: f64,
    pub num_occurrences: usize,
}

impl SampleResult {
    /// Wraps a labeling, computing its energy on `graph`.
    pub fn new(graph: &IsingGraph, labeling: QubitLabeling) -> Result<Self> {
        let energy = ising_energy(graph, &labeling)?;
        Ok(Self {
            labeling,
            energy,
            num_occurrences: 1,
        })
    }
}

/// Geometric inverse-temperature schedule for simulated annealing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealSchedule {
    pub sweeps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub reads: usize,
    pub seed: u64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            sweeps: 2000,
            beta_start: 0.1,
            beta_end: 10.0,
            reads: 50,
            seed: 0,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::Argument("schedule needs at least one sweep".into()));
        }
        if self.reads == 0 {
            return Err(Error::Argument("schedule needs at least one read".into()));
        }
        if !(self.beta_start > 0.0 && self.beta_start <= self.beta_end && self.beta_end.is_finite()) {
            return Err(Error::Argument(format!(
                "schedule needs 0 < beta_start <= beta_end, got {} and {}",
                self.beta_start, self.beta_end
            )));
        }
        Ok(())
    }

    /// Inverse temperature of each sweep.
    pub fn betas(&self) -> Vec<f64> {
        if self.sweeps == 1 {
            return vec![self.beta_start];
        }
        let ratio = (self.beta_end / self.beta_start).ln() / (self.sweeps - 1) as f64;
        (0..self.sweeps)
            .map(|k| self.beta_start * (ratio * k as f64).exp())
            .collect()
    }
}

/// Sampler choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampler {
    Exact,
    SimulatedAnnealing(AnnealSchedule),
}

impl Sampler {
    pub fn sample(&self, graph: &IsingGraph) -> Result<Vec<SampleResult>> {
        match self {
            Sampler::Exact => Ok(vec![solve_exact(graph)?]),
            Sampler::SimulatedAnnealing(schedule) => solve_sa(graph, schedule),
        }
    }

    pub fn kind(&self) -> SamplerKind {
        match self {
            Sampler::Exact => SamplerKind::Exact,
            Sampler::SimulatedAnnealing(_) => SamplerKind::Sa,
        }
    }
}

/// Sampler selection string: `"exact"` or `"sa"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Exact,
    Sa,
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SamplerKind::Exact),
            "sa" => Ok(SamplerKind::Sa),
            other => Err(Error::Argument(format!(
                "unknown sampler {other:?}, expected \"exact\" or \"sa\""
            ))),
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerKind::Exact => "exact",
            SamplerKind::Sa => "sa",
        })
    }
}

/// Global minimum by Gray-code enumeration of all `2^n` labelings. Ties go
/// to the lexicographically smallest labeling (`-1 < +1`).
pub fn solve_exact(graph: &IsingGraph) -> Result<SampleResult> {
    let n = graph.n_qubits();
    if n > EXACT_QUBIT_LIMIT {
        return Err(Error::Capacity {
            n_qubits: n,
            limit: EXACT_QUBIT_LIMIT,
        });
    }
    if n == 0 {
        return SampleResult::new(graph, QubitLabeling::all_down(0));
    }

    let adjacency = graph.adjacency();
    let h = graph.fields();
    let magnitude =
        1.0 + h.iter().map(|v| v.abs()).sum::<f64>() + graph.couplings().values().map(|v| v.abs()).sum::<f64>();
    let tie_eps = 1e-12 * magnitude;

    let mut spins = vec![-1.0_f64; n];
    let full_energy = |spins: &[f64]| -> f64 {
        let field: f64 = h.iter().zip(spins).map(|(a, b)| a * b).sum();
        let coupling: f64 = graph
            .couplings()
            .iter()
            .map(|(&(i, k), j)| j * spins[i] * spins[k])
            .sum();
        field + coupling
    };
    let mut energy = full_energy(&spins);
    let mut code: u64 = 0;
    let mut best_energy = energy;
    let mut best_code: u64 = 0;

    let total: u64 = 1 << n;
    for step in 1..total {
        let bit = step.trailing_zeros() as usize;
        let qubit = n - 1 - bit;
        let local = h[qubit] + adjacency[qubit].iter().map(|&(k, j)| j * spins[k]).sum::<f64>();
        energy -= 2.0 * spins[qubit] * local;
        spins[qubit] = -spins[qubit];
        code ^= 1 << bit;
        if step % RESYNC_INTERVAL == 0 {
            energy = full_energy(&spins);
        }

        if energy < best_energy - tie_eps {
            best_energy = energy;
            best_code = code;
        } else if energy <= best_energy + tie_eps && code < best_code {
            best_energy = best_energy.min(energy);
            best_code = code;
        }
    }

    SampleResult::new(graph, QubitLabeling::from_bits(best_code, n))
}

/// `reads` independent Metropolis annealing runs, each keeping the lowest
/// energy labeling it visited. Read `k` draws from a ChaCha8 stream `k`
/// keyed by the schedule seed, so results do not depend on thread count.
/// Results are sorted by energy; equal energies keep read order.
pub fn solve_sa(graph: &IsingGraph, schedule: &AnnealSchedule) -> Result<Vec<SampleResult>> {
    schedule.validate()?;
    let adjacency = graph.adjacency();
    let betas = schedule.betas();

    let mut results = (0..schedule.reads)
        .into_par_iter()
        .map(|read| {
            let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
            rng.set_stream(read as u64);
            let labeling = anneal_once(graph, &adjacency, &betas, &mut rng);
            SampleResult::new(graph, labeling)
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(results)
}

fn anneal_once(
    graph: &IsingGraph,
    adjacency: &[Vec<(usize, f64)>],
    betas: &[f64],
    rng: &mut impl Rng,
) -> QubitLabeling {
    let n = graph.n_qubits();
    let h = graph.fields();
    let mut spins: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    let mut energy = raw_energy(graph, &spins);
    let mut best = spins.clone();
    let mut best_energy = energy;

    for &beta in betas {
        for i in 0..n {
            let local = h[i] + adjacency[i].iter().map(|&(k, j)| j * f64::from(spins[k])).sum::<f64>();
            let delta = -2.0 * f64::from(spins[i]) * local;
            if delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp() {
                spins[i] = -spins[i];
                energy += delta;
                if energy < best_energy {
                    best_energy = energy;
                    best.copy_from_slice(&spins);
                }
            }
        }
    }
    QubitLabeling::from_spins_unchecked(best)
}

/// A decoded, admissible sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSample {
    pub state: NodalState,
    /// Discrete functional at `state`.
    pub functional: f64,
    /// Ising energy reported by the sampler.
    pub energy: f64,
    /// Position in the result list.
    pub index: usize,
}

/// Decodes each result, drops labelings that are not one-hot or that break a
/// Dirichlet pin, and returns the one with the lowest functional value (first
/// in list order on ties). `None` when nothing admissible was sampled or the
/// graph carries no mesh layout.
pub fn best_feasible(
    results: &[SampleResult],
    graph: &IsingGraph,
    elements: &[ElementVector],
) -> Option<FeasibleSample> {
    let layout = graph.layout()?;
    let mut best: Option<FeasibleSample> = None;
    for (index, result) in results.iter().enumerate() {
        if !layout.is_admissible(&result.labeling) {
            continue;
        }
        let Ok(decoded) = decode_state(&result.labeling, &layout.candidates) else {
            continue;
        };
        let Ok(functional) = functional_value(elements, &decoded.state) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| functional < b.functional) {
            best = Some(FeasibleSample {
                state: decoded.state,
                functional,
                energy: result.energy,
                index,
            });
        }
    }
    best
}

/// Fraction of results that are admissible for the graph's layout.
pub fn feasible_fraction(results: &[SampleResult], graph: &IsingGraph) -> f64 {
    let Some(layout) = graph.layout() else {
        return 0.0;
    };
    if results.is_empty() {
        return 0.0;
    }
    let ok = results.iter().filter(|r| layout.is_admissible(&r.labeling)).count();
    ok as f64 / results.len() as f64
}
