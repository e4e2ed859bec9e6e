//! Three-qubit one-hot encoding of nodal values, nodal and element
//! subgraphs, and assembly of the logical Ising graph
//! `E(q) = sum_i H_i q_i + sum_(i,j) J_ij q_i q_j`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fem::{ElementVector, NodalState};
use crate::linalg;

/// Qubits per mesh node.
pub const QUBITS_PER_NODE: usize = 3;

/// One of the three candidate values at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Low,
    Center,
    High,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Low, Slot::Center, Slot::High];

    /// Zero-based position within the node triple.
    pub fn index(self) -> usize {
        match self {
            Slot::Low => 0,
            Slot::Center => 1,
            Slot::High => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Slot> {
        Slot::ALL.get(i).copied()
    }
}

/// Qubit index of `(node, slot)` in an assembled graph.
pub fn qubit_index(node: usize, slot: Slot) -> usize {
    QUBITS_PER_NODE * node + slot.index()
}

/// The three admissible values of one node, strictly increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCandidates([f64; 3]);

impl NodeCandidates {
    pub fn new(values: [f64; 3]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Construction(format!(
                "candidate values must be finite, got {values:?}"
            )));
        }
        if !(values[0] < values[1] && values[1] < values[2]) {
            return Err(Error::Construction(format!(
                "candidate values must be pairwise distinct and increasing, got {values:?}"
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> [f64; 3] {
        self.0
    }

    pub fn value(&self, slot: Slot) -> f64 {
        self.0[slot.index()]
    }
}

/// A spin assignment `q_i in {-1, +1}`, three consecutive qubits per node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QubitLabeling(Vec<i8>);

impl QubitLabeling {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(i) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::Argument(format!("spin {i} is {}, expected -1 or +1", spins[i])));
        }
        Ok(Self(spins))
    }

    pub(crate) fn from_spins_unchecked(spins: Vec<i8>) -> Self {
        Self(spins)
    }

    pub fn all_down(n: usize) -> Self {
        Self(vec![-1; n])
    }

    /// Labeling whose node `i` is one-hot at `slots[i]`.
    pub fn one_hot(slots: &[Slot]) -> Self {
        let mut spins = vec![-1; QUBITS_PER_NODE * slots.len()];
        for (node, &slot) in slots.iter().enumerate() {
            spins[qubit_index(node, slot)] = 1;
        }
        Self(spins)
    }

    /// Labeling encoded by the low `n` bits of `bits`; qubit 0 is the most
    /// significant bit and a set bit is `+1`, so integer order is
    /// lexicographic order with `-1 < +1`.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        Self(
            (0..n)
                .map(|i| if (bits >> (n - 1 - i)) & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn node(&self, node: usize) -> [i8; 3] {
        let b = QUBITS_PER_NODE * node;
        [self.0[b], self.0[b + 1], self.0[b + 2]]
    }

    /// The selected slot when node `node` is one-hot.
    pub fn node_slot(&self, node: usize) -> Option<Slot> {
        match self.node(node) {
            [1, -1, -1] => Some(Slot::Low),
            [-1, 1, -1] => Some(Slot::Center),
            [-1, -1, 1] => Some(Slot::High),
            _ => None,
        }
    }
}

/// Nodal values decoded from a labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedState {
    pub state: NodalState,
    /// Every node has exactly one `+1` spin.
    pub feasible: bool,
}

/// `a_i = sum_j v_ij (q_ij + 1) / 2` at every node. Labelings that are not
/// one-hot still decode, and are flagged infeasible.
pub fn decode_state(labeling: &QubitLabeling, candidates: &[NodeCandidates]) -> Result<DecodedState> {
    if labeling.len() != QUBITS_PER_NODE * candidates.len() {
        return Err(Error::Argument(format!(
            "labeling has {} spins, {} nodes need {}",
            labeling.len(),
            candidates.len(),
            QUBITS_PER_NODE * candidates.len()
        )));
    }
    let mut feasible = true;
    let values = candidates
        .iter()
        .enumerate()
        .map(|(node, cand)| {
            let q = labeling.node(node);
            feasible &= q.iter().filter(|&&s| s == 1).count() == 1;
            q.iter()
                .zip(cand.values())
                .filter(|(&s, _)| s == 1)
                .map(|(_, v)| v)
                .sum::<f64>()
        })
        .collect();
    Ok(DecodedState {
        state: NodalState(values),
        feasible,
    })
}

/// Fields and couplings of one node triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalGraph {
    pub h: [f64; 3],
    /// Couplings on the pairs `(0,1)`, `(0,2)`, `(1,2)`.
    pub j: [f64; 3],
}

pub const NODAL_PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

impl NodalGraph {
    pub fn energy(&self, q: [i8; 3]) -> f64 {
        let q = q.map(f64::from);
        let field: f64 = self.h.iter().zip(q).map(|(h, s)| h * s).sum();
        let coupling: f64 = NODAL_PAIRS.iter().zip(self.j).map(|(&(a, b), j)| j * q[a] * q[b]).sum();
        field + coupling
    }
}

/// Unit fields and couplings times `scale`, which make the three one-hot
/// labelings the degenerate minimum (energy `-2 scale`). A Dirichlet slot has
/// its field flipped to `-scale`, which lowers that labeling to `-4 scale` and
/// leaves the other two one-hot labelings at `0`.
pub fn nodal_graph(scale: f64, dirichlet_slot: Option<Slot>) -> NodalGraph {
    let mut h = [scale; 3];
    if let Some(slot) = dirichlet_slot {
        h[slot.index()] = -scale;
    }
    NodalGraph { h, j: [scale; 3] }
}

/// Couplings between the triple of an element's left node (rows) and right
/// node (columns).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementCoupling(pub [[f64; 3]; 3]);

impl ElementCoupling {
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `sum_kl J_kl q^left_k q^right_l`.
    pub fn energy(&self, left: [i8; 3], right: [i8; 3]) -> f64 {
        let mut e = 0.0;
        for (k, row) in self.0.iter().enumerate() {
            for (l, j) in row.iter().enumerate() {
                e += j * f64::from(left[k]) * f64::from(right[l]);
            }
        }
        e
    }
}

/// Rows: the nine one-hot pairs, left slot varying fastest. Columns: the
/// couplings `J_11, J_12, ..., J_33` in row-major order. Each entry is the
/// spin product `q^left_k q^right_l` for that pair.
pub const COUPLING_SYSTEM: [[f64; 9]; 9] = [
    [1.0, -1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0, -1.0],
    [1.0, 1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, -1.0],
    [1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0],
];

/// Solves for the element couplings that reproduce the element's share of
/// the functional on every one-hot pair:
/// `sum_kl J_kl q^left_k q^right_l = A(v_left, v_right) . S`.
pub fn estimate_element_coupling(
    element: &ElementVector,
    left: &NodeCandidates,
    right: &NodeCandidates,
) -> Result<ElementCoupling> {
    let mut rhs = [0.0; 9];
    for (row, value) in rhs.iter_mut().enumerate() {
        let k = row % 3;
        let l = row / 3;
        *value = element.energy(left.values()[k], right.values()[l]);
    }
    let x = linalg::solve_dense(COUPLING_SYSTEM, rhs)
        .map_err(|e| Error::Construction(format!("element coupling system: {e}")))?;
    let mut jt = [[0.0; 3]; 3];
    for (c, v) in x.into_iter().enumerate() {
        jt[c / 3][c % 3] = v;
    }
    Ok(ElementCoupling(jt))
}

/// Per-graph bookkeeping for graphs assembled from a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphLayout {
    pub candidates: Vec<NodeCandidates>,
    pub dirichlet: Vec<(usize, Slot)>,
    /// Multiplier on the nodal subgraphs.
    pub penalty_scale: f64,
    /// Multiplier on the element couplings.
    pub coupling_scale: f64,
    /// Product of all uniform rescalings applied after assembly.
    pub rescale_factor: f64,
}

impl GraphLayout {
    pub fn num_nodes(&self) -> usize {
        self.candidates.len()
    }

    pub fn dirichlet_slot(&self, node: usize) -> Option<Slot> {
        self.dirichlet.iter().find(|(n, _)| *n == node).map(|&(_, s)| s)
    }

    /// Sum of the nodal-graph energies of any one-hot labeling that honors
    /// every Dirichlet slot.
    pub fn nodal_baseline(&self) -> f64 {
        let pinned = self.dirichlet.len() as f64;
        let free = self.num_nodes() as f64 - pinned;
        -self.penalty_scale * (2.0 * free + 4.0 * pinned)
    }

    /// One-hot at every node, with Dirichlet nodes at their pinned slot.
    pub fn is_admissible(&self, labeling: &QubitLabeling) -> bool {
        (0..self.num_nodes()).all(|node| match labeling.node_slot(node) {
            None => false,
            Some(slot) => self.dirichlet_slot(node).is_none_or(|pinned| pinned == slot),
        })
    }
}

/// Sparse Ising hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingGraph {
    h: Vec<f64>,
    j: BTreeMap<(usize, usize), f64>,
    layout: Option<GraphLayout>,
}

impl IsingGraph {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            h: vec![0.0; n_qubits],
            j: BTreeMap::new(),
            layout: None,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.h.len()
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    /// Couplings keyed by `(i, j)` with `i < j`.
    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.j
    }

    pub fn layout(&self) -> Option<&GraphLayout> {
        self.layout.as_ref()
    }

    pub fn add_field(&mut self, i: usize, value: f64) -> Result<()> {
        if i >= self.h.len() {
            return Err(Error::Argument(format!(
                "qubit {i} out of range for {} qubits",
                self.h.len()
            )));
        }
        self.h[i] += value;
        Ok(())
    }

    pub fn add_coupling(&mut self, i: usize, k: usize, value: f64) -> Result<()> {
        let n = self.h.len();
        if i >= n || k >= n || i == k {
            return Err(Error::Argument(format!("invalid coupling ({i}, {k}) for {n} qubits")));
        }
        *self.j.entry((i.min(k), i.max(k))).or_insert(0.0) += value;
        Ok(())
    }

    pub fn coupling(&self, i: usize, k: usize) -> f64 {
        self.j.get(&(i.min(k), i.max(k))).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coupling(&self) -> f64 {
        self.j.values().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Neighbor lists `(other qubit, J)` per qubit.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.h.len()];
        for (&(i, k), &v) in &self.j {
            adj[i].push((k, v));
            adj[k].push((i, v));
        }
        adj
    }

    /// Multiplies every field and coupling by `factor > 0`.
    pub fn scale(&mut self, factor: f64) -> Result<()> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::Argument(format!("scale factor must be positive, got {factor}")));
        }
        self.h.iter_mut().for_each(|h| *h *= factor);
        self.j.values_mut().for_each(|j| *j *= factor);
        if let Some(layout) = self.layout.as_mut() {
            layout.penalty_scale *= factor;
            layout.coupling_scale *= factor;
            layout.rescale_factor *= factor;
        }
        Ok(())
    }

    /// Uniformly rescales the graph so the largest `|J|` equals `ceiling`.
    /// Returns the factor applied (1 for a graph without couplings).
    pub fn rescale_to_ceiling(&mut self, ceiling: f64) -> Result<f64> {
        let max = self.max_abs_coupling();
        if max == 0.0 {
            return Ok(1.0);
        }
        let factor = ceiling / max;
        self.scale(factor)?;
        Ok(factor)
    }

    /// Functional value of an admissible labeling with energy `energy`,
    /// with the nodal baseline removed and the coupling scale divided out.
    pub fn functional_from_energy(&self, energy: f64) -> Option<f64> {
        self.layout
            .as_ref()
            .map(|l| (energy - l.nodal_baseline()) / l.coupling_scale)
    }

    /// Plain-text edge list: the qubit count, then `h <i> <val>` for every
    /// qubit and `j <i> <k> <val>` for every coupling.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.h.len());
        for (i, h) in self.h.iter().enumerate() {
            let _ = writeln!(out, "h {i} {h}");
        }
        for (&(i, k), j) in &self.j {
            let _ = writeln!(out, "j {i} {k} {j}");
        }
        out
    }

    /// Parses the edge-list format written by [`IsingGraph::to_edge_list`].
    /// Layout metadata is not part of the format.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Argument("edge list is empty".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::Argument(format!("line 1: expected qubit count, got {header:?}")))?;
        let mut graph = IsingGraph::new(n);
        for (lineno, line) in lines {
            let bad = || Error::Argument(format!("line {lineno}: malformed entry {line:?}"));
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["h", i, v] => {
                    let i = i.parse().map_err(|_| bad())?;
                    let v = v.parse().map_err(|_| bad())?;
                    graph
                        .add_field(i, v)
                        .map_err(|e| Error::Argument(format!("line {lineno}: {e}")))?;
                }
                ["j", i, k, v] => {
                    let i = i.parse().map_err(|_| bad())?;
                    let k = k.parse().map_err(|_| bad())?;
                    let v = v.parse().map_err(|_| bad())?;
                    graph
                        .add_coupling(i, k, v)
                        .map_err(|e| Error::Argument(format!("line {lineno}: {e}")))?;
                }
                _ => return Err(bad()),
            }
        }
        Ok(graph)
    }
}

/// Maximum `|J|` over a set of element couplings.
pub fn max_element_coupling(couplings: &[ElementCoupling]) -> f64 {
    couplings.iter().fold(0.0_f64, |m, c| m.max(c.max_abs()))
}

/// Nodal penalty `gap_factor * coupling_scale * max |J_element|`. A graph with
/// no element couplings uses `gap_factor * coupling_scale`.
pub fn penalty_scale_for(couplings: &[ElementCoupling], gap_factor: f64, coupling_scale: f64) -> f64 {
    let m = max_element_coupling(couplings);
    let m = if m > 0.0 { m } else { 1.0 };
    gap_factor * coupling_scale * m
}

/// Builds the logical graph: one nodal subgraph per node at `penalty_scale`,
/// one element subgraph per element at `coupling_scale`.
pub fn assemble(
    candidates: &[NodeCandidates],
    couplings: &[ElementCoupling],
    dirichlet: &[(usize, Slot)],
    penalty_scale: f64,
    coupling_scale: f64,
) -> Result<IsingGraph> {
    let num_nodes = candidates.len();
    if num_nodes < 2 || couplings.len() + 1 != num_nodes {
        return Err(Error::Argument(format!(
            "{num_nodes} node candidate sets need {} element couplings, got {}",
            num_nodes.saturating_sub(1),
            couplings.len()
        )));
    }
    if !(penalty_scale >= 0.0) || !penalty_scale.is_finite() {
        return Err(Error::Argument(format!(
            "penalty scale must be non-negative, got {penalty_scale}"
        )));
    }
    if !(coupling_scale > 0.0) || !coupling_scale.is_finite() {
        return Err(Error::Argument(format!(
            "coupling scale must be positive, got {coupling_scale}"
        )));
    }
    for (idx, &(node, _)) in dirichlet.iter().enumerate() {
        if node >= num_nodes {
            return Err(Error::Argument(format!("Dirichlet node {node} does not exist")));
        }
        if dirichlet[..idx].iter().any(|&(n, _)| n == node) {
            return Err(Error::Argument(format!("Dirichlet node {node} given twice")));
        }
    }

    let mut graph = IsingGraph::new(QUBITS_PER_NODE * num_nodes);
    for node in 0..num_nodes {
        let pinned = dirichlet.iter().find(|(n, _)| *n == node).map(|&(_, s)| s);
        let sub = nodal_graph(penalty_scale, pinned);
        let base = QUBITS_PER_NODE * node;
        for (k, h) in sub.h.iter().enumerate() {
            graph.add_field(base + k, *h)?;
        }
        for (&(a, b), j) in NODAL_PAIRS.iter().zip(sub.j) {
            graph.add_coupling(base + a, base + b, j)?;
        }
    }
    for (e, coupling) in couplings.iter().enumerate() {
        let left = QUBITS_PER_NODE * e;
        let right = QUBITS_PER_NODE * (e + 1);
        for (k, row) in coupling.0.iter().enumerate() {
            for (l, j) in row.iter().enumerate() {
                graph.add_coupling(left + k, right + l, coupling_scale * j)?;
            }
        }
    }
    graph.layout = Some(GraphLayout {
        candidates: candidates.to_vec(),
        dirichlet: dirichlet.to_vec(),
        penalty_scale,
        coupling_scale,
        rescale_factor: 1.0,
    });
    Ok(graph)
}

/// Exact evaluation of the Ising energy.
pub fn ising_energy(graph: &IsingGraph, labeling: &QubitLabeling) -> Result<f64> {
    if labeling.len() != graph.n_qubits() {
        return Err(Error::Argument(format!(
            "labeling has {} spins, graph has {} qubits",
            labeling.len(),
            graph.n_qubits()
        )));
    }
    Ok(raw_energy(graph, labeling.spins()))
}

pub(crate) fn raw_energy(graph: &IsingGraph, q: &[i8]) -> f64 {
    let field: f64 = graph.h.iter().zip(q).map(|(h, &s)| h * f64::from(s)).sum();
    let coupling: f64 = graph
        .j
        .iter()
        .map(|(&(i, k), j)| j * f64::from(q[i]) * f64::from(q[k]))
        .sum();
    field + coupling
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::fem::ElementVector;

    fn enumerate3() -> impl Iterator<Item = [i8; 3]> {
        (0..8u8).map(|b| [b >> 2 & 1, b >> 1 & 1, b & 1].map(|x| if x == 1 { 1 } else { -1 }))
    }

    fn half_grid() -> NodeCandidates {
        NodeCandidates::new([0.0, 0.5, 1.0]).unwrap()
    }

    #[test]
    fn coupling_system_is_one_hot_spin_products() {
        for row in 0..9 {
            let (k_row, l_row) = (row % 3, row / 3);
            let left = QubitLabeling::one_hot(&[Slot::from_index(k_row).unwrap()]).node(0);
            let right = QubitLabeling::one_hot(&[Slot::from_index(l_row).unwrap()]).node(0);
            for col in 0..9 {
                let (k, l) = (col / 3, col % 3);
                let want = f64::from(left[k] * right[l]);
                assert_eq!(COUPLING_SYSTEM[row][col], want, "row {row} col {col}");
            }
        }
    }

    #[test]
    fn decode_table_rows() {
        let c = [half_grid()];
        let cases: [([i8; 3], f64, bool); 8] = [
            ([1, 1, 1], 1.5, false),
            ([1, 1, -1], 0.5, false),
            ([1, -1, 1], 1.0, false),
            ([1, -1, -1], 0.0, true),
            ([-1, 1, 1], 1.5, false),
            ([-1, 1, -1], 0.5, true),
            ([-1, -1, 1], 1.0, true),
            ([-1, -1, -1], 0.0, false),
        ];
        for (q, a, feasible) in cases {
            let d = decode_state(&QubitLabeling::new(q.to_vec()).unwrap(), &c).unwrap();
            assert_eq!(d.state.0, vec![a], "{q:?}");
            assert_eq!(d.feasible, feasible, "{q:?}");
        }
    }

    #[test]
    fn decode_rejects_length_mismatch() {
        assert!(decode_state(&QubitLabeling::all_down(4), &[half_grid()]).is_err());
    }

    #[test]
    fn labeling_validation() {
        assert!(QubitLabeling::new(vec![1, 0, -1]).is_err());
        let l = QubitLabeling::from_bits(0b001, 3);
        assert_eq!(l.spins(), &[-1, -1, 1]);
    }

    #[test]
    fn candidates_must_be_distinct() {
        assert!(NodeCandidates::new([0.0, 0.0, 1.0]).is_err());
        assert!(NodeCandidates::new([1.0, 0.5, 0.0]).is_err());
        assert!(NodeCandidates::new([0.0, f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn nodal_graph_energies() {
        let g = nodal_graph(1.0, None);
        let mut energies: Vec<(i32, [i8; 3])> = enumerate3().map(|q| (g.energy(q) as i32, q)).collect();
        energies.sort();
        assert_eq!(
            energies.iter().map(|e| e.0).collect::<Vec<_>>(),
            vec![-2, -2, -2, 0, 0, 0, 0, 6]
        );
        assert!(energies[..3]
            .iter()
            .all(|(_, q)| q.iter().filter(|&&s| s == 1).count() == 1));

        let g2 = nodal_graph(2.0, None);
        for q in enumerate3() {
            assert_eq!(g2.energy(q), 2.0 * g.energy(q));
        }
    }

    #[test]
    fn nodal_graph_dirichlet() {
        let g = nodal_graph(1.0, Some(Slot::Center));
        assert_eq!(g.h, [1.0, -1.0, 1.0]);
        assert_eq!(g.energy([-1, 1, -1]), -4.0);
        assert_eq!(g.energy([1, -1, -1]), 0.0);
        assert_eq!(g.energy([-1, -1, 1]), 0.0);
        let min = enumerate3().map(|q| g.energy(q)).fold(f64::INFINITY, f64::min);
        assert_eq!(min, -4.0);
    }

    #[test]
    fn laplace_element_coupling() {
        let s = ElementVector([1.0, 1.0, -2.0, 0.0, 0.0]);
        let j = estimate_element_coupling(&s, &half_grid(), &half_grid()).unwrap();
        let want = [[0.125, 0.375, 0.375], [0.375, 0.5, 0.375], [0.375, 0.375, 0.125]];
        for k in 0..3 {
            for l in 0..3 {
                assert!((j.0[k][l] - want[k][l]).abs() < 1e-12, "{j:?}");
            }
        }
        assert!((j.0[0][0] - j.0[2][2]).abs() < 1e-14);
        assert!((j.0[0][1] - j.0[2][1]).abs() < 1e-14);
    }

    #[test]
    fn zero_element_gives_zero_coupling() {
        let j = estimate_element_coupling(&ElementVector::ZERO, &half_grid(), &half_grid()).unwrap();
        assert!(j.max_abs() < 1e-15);
    }

    #[test]
    fn assembled_sizes() {
        let s = ElementVector([1.0, 1.0, -2.0, 0.0, 0.0]);
        let j = estimate_element_coupling(&s, &half_grid(), &half_grid()).unwrap();
        let g = assemble(&[half_grid(); 2], &[j], &[], 1.0, 1.0).unwrap();
        assert_eq!(g.n_qubits(), 6);
        assert_eq!(g.couplings().len(), 3 + 3 + 9);

        let g = assemble(&[half_grid(); 5], &[j; 4], &[], 1.0, 1.0).unwrap();
        assert_eq!(g.n_qubits(), 15);
        assert_eq!(g.couplings().len(), 5 * 3 + 4 * 9);
        for &(a, b) in g.couplings().keys() {
            let (na, nb) = (a / 3, b / 3);
            assert!(na == nb || nb == na + 1, "unexpected coupling ({a}, {b})");
        }
    }

    #[test]
    fn assemble_rejects_bad_input() {
        let j = ElementCoupling([[0.0; 3]; 3]);
        assert!(assemble(&[half_grid(); 3], &[j], &[], 1.0, 1.0).is_err());
        assert!(assemble(&[half_grid(); 2], &[j], &[(2, Slot::Center)], 1.0, 1.0).is_err());
        assert!(assemble(&[half_grid(); 2], &[j], &[(0, Slot::Low), (0, Slot::High)], 1.0, 1.0).is_err());
        assert!(assemble(&[half_grid(); 2], &[j], &[], 1.0, 0.0).is_err());
        assert!(assemble(&[half_grid(); 2], &[j], &[], -1.0, 1.0).is_err());
    }

    #[test]
    fn energy_of_simple_graphs() {
        let mut g = IsingGraph::new(3);
        for (i, k) in NODAL_PAIRS {
            g.add_coupling(i, k, 1.0).unwrap();
        }
        for i in 0..3 {
            g.add_field(i, 1.0).unwrap();
        }
        assert_eq!(ising_energy(&g, &QubitLabeling::all_down(3)).unwrap(), 0.0);
        assert_eq!(
            ising_energy(&IsingGraph::new(0), &QubitLabeling::all_down(0)).unwrap(),
            0.0
        );
        assert!(ising_energy(&g, &QubitLabeling::all_down(2)).is_err());
    }

    #[test]
    fn laplace_graph_energy_at_solution() {
        let s = ElementVector([1.0, 1.0, -2.0, 0.0, 0.0]);
        let j = estimate_element_coupling(&s, &half_grid(), &half_grid()).unwrap();
        let g = assemble(&[half_grid(); 3], &[j; 2], &[], 1.0, 1.0).unwrap();
        let labeling = QubitLabeling::one_hot(&[Slot::Low, Slot::Center, Slot::High]);
        let e = ising_energy(&g, &labeling).unwrap();
        assert!((e - (-6.0 + 0.5)).abs() < 1e-12, "{e}");
        assert!((g.functional_from_energy(e).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rescale_preserves_functional_readout() {
        let s = ElementVector([1.0, 1.0, -2.0, 0.0, 0.0]);
        let j = estimate_element_coupling(&s, &half_grid(), &half_grid()).unwrap();
        let mut g = assemble(&[half_grid(); 3], &[j; 2], &[(0, Slot::Low)], 5.0, 1.0).unwrap();
        let factor = g.rescale_to_ceiling(1.0).unwrap();
        assert!((factor - 0.2).abs() < 1e-15);
        assert!((g.max_abs_coupling() - 1.0).abs() < 1e-15);
        let labeling = QubitLabeling::one_hot(&[Slot::Low, Slot::Center, Slot::High]);
        let e = ising_energy(&g, &labeling).unwrap();
        assert!((g.functional_from_energy(e).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn edge_list_format() {
        let mut g = IsingGraph::new(2);
        g.add_field(0, 1.5).unwrap();
        g.add_coupling(1, 0, -0.25).unwrap();
        let text = g.to_edge_list();
        assert_eq!(text, "2\nh 0 1.5\nh 1 0\nj 0 1 -0.25\n");
        let back = IsingGraph::from_edge_list(&text).unwrap();
        assert_eq!(back.fields(), g.fields());
        assert_eq!(back.couplings(), g.couplings());
        assert!(IsingGraph::from_edge_list("2\nq 0 1\n").is_err());
        assert!(IsingGraph::from_edge_list("2\nh 5 1\n").is_err());
    }
}
