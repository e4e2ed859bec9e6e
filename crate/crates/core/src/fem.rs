//! Continuous problem, mesh, hat-function element vectors and the discrete
//! energy functional.
//!
//! The functional of a linear finite element state `a` splits element by
//! element into `sum_i A_i . S_i`, where `A_i` depends only on the two nodal
//! values of element `i` and `S_i` only on the coefficients. `S_i` is
//! computed once per problem; everything downstream works from it.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature::GaussLegendre;

/// Piecewise-linear table `(x, y)` with constant extension outside its range.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Construction("piecewise-linear table is empty".into()));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Construction(
                "piecewise-linear table has non-finite entries".into(),
            ));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Construction(
                "piecewise-linear table abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        if x >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let k = pts.partition_point(|&(px, _)| px <= x);
        let (x0, y0) = pts[k - 1];
        let (x1, y1) = pts[k];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// A coefficient function of `x`.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Table(PiecewiseLinear),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Function(Arc::new(f))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Table(t) => t.eval(x),
            Coefficient::Function(f) => f(x),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Coefficient::Table(t) => f.debug_tuple("Table").field(t).finish(),
            Coefficient::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(c: f64) -> Self {
        Coefficient::Constant(c)
    }
}

impl From<PiecewiseLinear> for Coefficient {
    fn from(t: PiecewiseLinear) -> Self {
        Coefficient::Table(t)
    }
}

/// `-(p u')' + q u = f` on `(x_l, x_r)` with `u(x_l) = u_l`, `u(x_r) = u_r`.
#[derive(Debug, Clone)]
pub struct Problem1D {
    x_l: f64,
    x_r: f64,
    pub p: Coefficient,
    pub q: Coefficient,
    pub f: Coefficient,
    pub u_l: f64,
    pub u_r: f64,
}

impl Problem1D {
    pub fn new(
        x_l: f64,
        x_r: f64,
        p: impl Into<Coefficient>,
        q: impl Into<Coefficient>,
        f: impl Into<Coefficient>,
        u_l: f64,
        u_r: f64,
    ) -> Result<Self> {
        if !(x_l.is_finite() && x_r.is_finite()) || x_l >= x_r {
            return Err(Error::Construction(format!(
                "x_l must be less than x_r, got x_l = {x_l}, x_r = {x_r}"
            )));
        }
        if !(u_l.is_finite() && u_r.is_finite()) {
            return Err(Error::Construction("boundary values must be finite".into()));
        }
        Ok(Self {
            x_l,
            x_r,
            p: p.into(),
            q: q.into(),
            f: f.into(),
            u_l,
            u_r,
        })
    }

    pub fn x_l(&self) -> f64 {
        self.x_l
    }

    pub fn x_r(&self) -> f64 {
        self.x_r
    }

    pub fn uniform_mesh(&self, elements: usize) -> Result<Mesh1D> {
        Mesh1D::uniform(self.x_l, self.x_r, elements)
    }
}

/// Strictly increasing node coordinates `x_0 < ... < x_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
}

impl Mesh1D {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Construction(
                "a mesh needs at least one element (two nodes)".into(),
            ));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Construction("mesh nodes must be finite".into()));
        }
        if let Some(k) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Construction(format!(
                "mesh nodes must be strictly increasing, node {} ({}) >= node {} ({})",
                k,
                nodes[k],
                k + 1,
                nodes[k + 1]
            )));
        }
        Ok(Self { nodes })
    }

    pub fn uniform(x_l: f64, x_r: f64, elements: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::Construction("a mesh needs at least one element".into()));
        }
        let h = (x_r - x_l) / elements as f64;
        let mut nodes: Vec<f64> = (0..=elements).map(|i| x_l + h * i as f64).collect();
        nodes[elements] = x_r;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn num_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_bounds(&self, element: usize) -> (f64, f64) {
        (self.nodes[element], self.nodes[element + 1])
    }
}

/// Per-element coefficient vector, ordered as
/// `[stiff(left,left), stiff(right,right), stiff(left,right), load(left), load(right)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementVector(pub [f64; 5]);

impl ElementVector {
    pub const ZERO: ElementVector = ElementVector([0.0; 5]);

    /// `A . S` for nodal values `(left, right)`.
    pub fn energy(&self, left: f64, right: f64) -> f64 {
        let a = build_a_vector(left, right);
        a.iter().zip(&self.0).map(|(x, y)| x * y).sum()
    }

    pub fn as_array(&self) -> &[f64; 5] {
        &self.0
    }
}

/// Nodal coefficients of the hat-function expansion, one per mesh node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalState(pub Vec<f64>);

impl NodalState {
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Straight line from `u_l` to `u_r` over `num_nodes` equally indexed nodes.
    pub fn linear(u_l: f64, u_r: f64, num_nodes: usize) -> Self {
        let last = (num_nodes.max(2) - 1) as f64;
        let mut values: Vec<f64> = (0..num_nodes).map(|i| u_l + (u_r - u_l) * i as f64 / last).collect();
        if let Some(v) = values.last_mut() {
            *v = u_r;
        }
        NodalState(values)
    }
}

impl Deref for NodalState {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for NodalState {
    fn from(v: Vec<f64>) -> Self {
        NodalState(v)
    }
}

/// `[a_l^2, a_r^2, a_l a_r, a_l, a_r]`.
pub fn build_a_vector(a_left: f64, a_right: f64) -> [f64; 5] {
    [a_left * a_left, a_right * a_right, a_left * a_right, a_left, a_right]
}

/// Integrates the five element-vector entries on every element with a
/// Gauss–Legendre rule of `quad_order` points.
///
/// `p` must be strictly positive and `q` non-negative at every quadrature point.
pub fn compute_element_vectors(problem: &Problem1D, mesh: &Mesh1D, quad_order: usize) -> Result<Vec<ElementVector>> {
    if quad_order < 2 {
        return Err(Error::Argument(format!(
            "quadrature order must be at least 2, got {quad_order}"
        )));
    }
    let nodes = mesh.nodes();
    let tol = 1e-12 * (problem.x_r - problem.x_l);
    if (nodes[0] - problem.x_l).abs() > tol || (nodes[nodes.len() - 1] - problem.x_r).abs() > tol {
        return Err(Error::Construction(format!(
            "mesh spans [{}, {}] but the problem is posed on [{}, {}]",
            nodes[0],
            nodes[nodes.len() - 1],
            problem.x_l,
            problem.x_r
        )));
    }

    let rule = GaussLegendre::new(quad_order)?;
    let mut out = Vec::with_capacity(mesh.num_elements());
    for e in 0..mesh.num_elements() {
        let (xa, xb) = mesh.element_bounds(e);
        let h = xb - xa;
        let half = 0.5 * h;
        let dphi_sq = 1.0 / (h * h);
        let mut s = [0.0; 5];
        for (x, &w) in rule.mapped_points(xa, xb).zip(&rule.weights) {
            let p = problem.p.eval(x);
            let q = problem.q.eval(x);
            let f = problem.f.eval(x);
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::Construction(format!(
                    "p must be positive, element {} has p({x}) = {p}",
                    e + 1
                )));
            }
            if !(q >= 0.0) || !q.is_finite() {
                return Err(Error::Construction(format!(
                    "q must be non-negative, element {} has q({x}) = {q}",
                    e + 1
                )));
            }
            if !f.is_finite() {
                return Err(Error::Construction(format!(
                    "f must be finite, element {} has f({x}) = {f}",
                    e + 1
                )));
            }
            let phi_l = (xb - x) / h;
            let phi_r = (x - xa) / h;
            let wh = w * half;
            s[0] += wh * (0.5 * p * dphi_sq + 0.5 * q * phi_l * phi_l);
            s[1] += wh * (0.5 * p * dphi_sq + 0.5 * q * phi_r * phi_r);
            s[2] += wh * (-p * dphi_sq + q * phi_l * phi_r);
            s[3] -= wh * f * phi_l;
            s[4] -= wh * f * phi_r;
        }
        out.push(ElementVector(s));
    }
    Ok(out)
}

/// Discrete functional `sum_i A_i(a_{i-1}, a_i) . S_i`.
pub fn functional_value(elements: &[ElementVector], state: &[f64]) -> Result<f64> {
    if state.len() != elements.len() + 1 {
        return Err(Error::Argument(format!(
            "state has {} values but {} elements need {}",
            state.len(),
            elements.len(),
            elements.len() + 1
        )));
    }
    Ok(elements
        .iter()
        .zip(state.windows(2))
        .map(|(s, a)| s.energy(a[0], a[1]))
        .sum())
}

/// Hessian of the functional restricted to the interior nodes, as
/// `(diagonal, off_diagonal)` of a symmetric tridiagonal matrix.
pub fn reduced_stiffness(elements: &[ElementVector]) -> (Vec<f64>, Vec<f64>) {
    let n_free = elements.len().saturating_sub(1);
    let diag = (1..=n_free)
        .map(|k| 2.0 * (elements[k - 1].0[1] + elements[k].0[0]))
        .collect();
    let off = (1..n_free).map(|k| elements[k].0[2]).collect();
    (diag, off)
}

/// Exact minimizer of the discrete functional with both ends held at the
/// Dirichlet values: the stationarity system over the interior nodes is
/// tridiagonal and is solved directly.
pub fn classical_fem_solve(elements: &[ElementVector], u_l: f64, u_r: f64) -> Result<NodalState> {
    let n_elem = elements.len();
    if n_elem == 0 {
        return Err(Error::Argument("at least one element is required".into()));
    }
    if n_elem == 1 {
        return Ok(NodalState(vec![u_l, u_r]));
    }
    let n_free = n_elem - 1;
    let (diag, off) = reduced_stiffness(elements);
    let mut rhs: Vec<f64> = (1..=n_free)
        .map(|k| -(elements[k - 1].0[4] + elements[k].0[3]))
        .collect();
    rhs[0] -= elements[0].0[2] * u_l;
    rhs[n_free - 1] -= elements[n_elem - 1].0[2] * u_r;

    let interior = linalg::solve_tridiagonal(&off, &diag, &off, &rhs)?;
    let mut a = Vec::with_capacity(n_elem + 1);
    a.push(u_l);
    a.extend(interior);
    a.push(u_r);
    Ok(NodalState(a))
}

/// Element vectors of the axial-bar potential energy on the unit interval
/// with `n` equal elements and per-element stiffness `EA_i` and body force `f_i`.
pub fn truss_functional_vectors(ea: &[f64], f: &[f64], n: usize) -> Result<Vec<ElementVector>> {
    if n == 0 || ea.len() != n || f.len() != n {
        return Err(Error::Argument(format!(
            "expected {n} per-element values, got {} stiffnesses and {} loads",
            ea.len(),
            f.len()
        )));
    }
    let nf = n as f64;
    ea.iter()
        .zip(f)
        .enumerate()
        .map(|(i, (&ea, &f))| {
            if !(ea > 0.0) || !ea.is_finite() {
                return Err(Error::Construction(format!(
                    "EA must be positive, element {} has EA = {ea}",
                    i + 1
                )));
            }
            if !f.is_finite() {
                return Err(Error::Construction(format!("element {} has non-finite load", i + 1)));
            }
            let k = nf * ea;
            let load = -f / (2.0 * nf);
            Ok(ElementVector([0.5 * k, 0.5 * k, -k, load, load]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_vec_close(got: &ElementVector, want: [f64; 5], tol: f64) {
        for (g, w) in got.0.iter().zip(want) {
            assert!((g - w).abs() <= tol, "{got:?} vs {want:?}");
        }
    }

    fn laplace2() -> Vec<ElementVector> {
        let problem = Problem1D::new(0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let mesh = problem.uniform_mesh(2).unwrap();
        compute_element_vectors(&problem, &mesh, 2).unwrap()
    }

    #[test]
    fn laplace_two_elements() {
        let s = laplace2();
        assert_eq!(s.len(), 2);
        for e in &s {
            assert_vec_close(e, [1.0, 1.0, -2.0, 0.0, 0.0], 1e-14);
        }
    }

    #[test]
    fn stiffness_scales_with_p() {
        let problem = Problem1D::new(0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let s = compute_element_vectors(&problem, &problem.uniform_mesh(2).unwrap(), 2).unwrap();
        assert_vec_close(&s[0], [2.0, 2.0, -4.0, 0.0, 0.0], 1e-14);
    }

    #[test]
    fn unit_coefficients_single_element() {
        // closed-form integrals of the hat-function products on [0, 1]
        let problem = Problem1D::new(0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        let s = compute_element_vectors(&problem, &problem.uniform_mesh(1).unwrap(), 2).unwrap();
        assert_vec_close(&s[0], [2.0 / 3.0, 2.0 / 3.0, -5.0 / 6.0, -0.5, -0.5], 1e-14);
    }

    #[test]
    fn rejects_low_quadrature_order() {
        let problem = Problem1D::new(0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let mesh = problem.uniform_mesh(2).unwrap();
        assert!(matches!(
            compute_element_vectors(&problem, &mesh, 1),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn positivity_violation_names_element() {
        let problem = Problem1D::new(0.0, 1.0, Coefficient::function(|x| x - 0.6), 0.0, 0.0, 0.0, 1.0).unwrap();
        let mesh = problem.uniform_mesh(4).unwrap();
        let err = compute_element_vectors(&problem, &mesh, 2).unwrap_err();
        assert!(err.to_string().contains("element 1"), "{err}");

        let problem = Problem1D::new(0.0, 1.0, 1.0, Coefficient::function(|x| 0.5 - x), 0.0, 0.0, 1.0).unwrap();
        let err = compute_element_vectors(&problem, &mesh, 2).unwrap_err();
        assert!(err.to_string().contains("element 3"), "{err}");
    }

    #[test]
    fn interval_must_be_ordered() {
        assert!(Problem1D::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(Problem1D::new(2.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn mesh_validation() {
        assert!(Mesh1D::new(vec![0.0]).is_err());
        assert!(Mesh1D::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(Mesh1D::uniform(0.0, 1.0, 0).is_err());
        let m = Mesh1D::uniform(0.0, 1.0, 3).unwrap();
        assert_eq!(m.num_nodes(), 4);
        assert_eq!(m.nodes()[3], 1.0);
    }

    #[test]
    fn mesh_must_cover_problem() {
        let problem = Problem1D::new(0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let mesh = Mesh1D::uniform(0.0, 2.0, 2).unwrap();
        assert!(compute_element_vectors(&problem, &mesh, 2).is_err());
    }

    #[test]
    fn a_vector() {
        assert_eq!(build_a_vector(0.0, 0.0), [0.0; 5]);
        assert_eq!(build_a_vector(0.0, 0.5), [0.0, 0.25, 0.0, 0.0, 0.5]);
        assert_eq!(build_a_vector(1.0, 1.0), [1.0; 5]);
    }

    #[test]
    fn functional_laplace_example() {
        // (a0 - a1)^2 + (a1 - a2)^2
        let s = laplace2();
        assert!((functional_value(&s, &[0.0, 0.5, 1.0]).unwrap() - 0.5).abs() < 1e-14);
        assert!((functional_value(&s, &[0.0, 0.0, 1.0]).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(functional_value(&s, &[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(functional_value(&s, &[0.0, 1.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn oracle_laplace() {
        let a = classical_fem_solve(&laplace2(), 0.0, 1.0).unwrap();
        assert_eq!(a.len(), 3);
        assert!((a[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn oracle_constant_solution() {
        let problem = Problem1D::new(0.0, 3.0, 2.5, 0.0, 0.0, 1.7, 1.7).unwrap();
        let s = compute_element_vectors(&problem, &problem.uniform_mesh(6).unwrap(), 2).unwrap();
        let a = classical_fem_solve(&s, 1.7, 1.7).unwrap();
        for v in a.iter() {
            assert!((v - 1.7).abs() < 1e-13);
        }
    }

    #[test]
    fn oracle_single_element_is_boundary_data() {
        let s = truss_functional_vectors(&[1.0], &[0.0], 1).unwrap();
        assert_eq!(classical_fem_solve(&s, 0.0, 2.0).unwrap().0, vec![0.0, 2.0]);
    }

    #[test]
    fn oracle_truss_stiffness_jump() {
        // EA = 1 on [0, 1/2], 1/2 on [1/2, 1], f = 0: EA u' = c with
        // 0.5 c / 1 + 0.5 c / 0.5 = 1, so c = 2/3 and the nodal values are
        // 0, 1/6, 1/3, 2/3, 1.
        let s = truss_functional_vectors(&[1.0, 1.0, 0.5, 0.5], &[0.0; 4], 4).unwrap();
        let a = classical_fem_solve(&s, 0.0, 1.0).unwrap();
        let want = [0.0, 1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        for (g, w) in a.iter().zip(want) {
            assert!((g - w).abs() < 1e-14, "{a:?}");
        }
    }

    #[test]
    fn truss_vectors() {
        let s = truss_functional_vectors(&[1.0, 1.0], &[0.0, 0.0], 2).unwrap();
        assert_vec_close(&s[0], [1.0, 1.0, -2.0, 0.0, 0.0], 0.0);
        let s = truss_functional_vectors(&[2.0], &[0.0], 1).unwrap();
        assert_vec_close(&s[0], [1.0, 1.0, -2.0, 0.0, 0.0], 0.0);
        let s = truss_functional_vectors(&[1.0; 4], &[1.0; 4], 4).unwrap();
        for e in &s {
            assert_vec_close(e, [2.0, 2.0, -4.0, -0.125, -0.125], 0.0);
        }
        assert!(truss_functional_vectors(&[1.0, 0.0], &[0.0, 0.0], 2).is_err());
        assert!(truss_functional_vectors(&[1.0], &[0.0, 0.0], 2).is_err());
    }

    #[test]
    fn truss_matches_bar_energy() {
        // sum N/2 EA_i (a_i - a_{i-1})^2 - f_i (a_i + a_{i-1}) / (2N)
        let ea = [1.3, 0.7, 2.0];
        let f = [0.4, -1.0, 0.25];
        let a: [f64; 4] = [0.0, 0.3, -0.2, 1.0];
        let s = truss_functional_vectors(&ea, &f, 3).unwrap();
        let n = 3.0;
        let direct: f64 = (0..3usize)
            .map(|i| n / 2.0 * ea[i] * (a[i + 1] - a[i]).powi(2) - f[i] * (a[i + 1] + a[i]) / (2.0 * n))
            .sum();
        assert!((functional_value(&s, &a).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn piecewise_linear_table() {
        let t = PiecewiseLinear::new(vec![(0.0, 1.0), (1.0, 3.0), (2.0, 3.0)]).unwrap();
        assert_eq!(t.eval(-1.0), 1.0);
        assert_eq!(t.eval(0.5), 2.0);
        assert_eq!(t.eval(1.5), 3.0);
        assert_eq!(t.eval(5.0), 3.0);
        assert!(PiecewiseLinear::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(PiecewiseLinear::new(vec![]).is_err());
    }

    #[test]
    fn linear_initial_state() {
        assert_eq!(NodalState::linear(0.0, 1.0, 5).0, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
