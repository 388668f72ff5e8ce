//! Controllability and observability Gramians.
//!
//! `W_tau = int_0^tau U(tau,s) B(s) B(s)^T U(tau,s)^T ds` is computed two
//! ways: by grid quadrature over the propagator and by integrating the
//! differential Lyapunov equation
//!
//! ```text
//! W'(t) = -A(t) W - W A(t)^T + B(t) B(t)^T,   W(0) = 0
//! ```
//!
//! which is the form that matches `x' = -A(t) x + B(t) u`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::propagate::{integrate_interval, Propagator, PropagatorOptions};
use crate::sysmodel::LtvSystem;

/// Relative eigenvalue threshold separating rank deficiency from
/// quadrature noise.
pub const DEFAULT_COERCIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GramianKind {
    Controllability,
    Observability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GramianMethod {
    Quadrature,
    LyapunovOde,
}

#[derive(Debug, Clone)]
pub struct GramianResult {
    pub matrix: DMatrix<f64>,
    pub kind: GramianKind,
    pub method: GramianMethod,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Frobenius distance to the other method's result, when both ran.
    pub cross_residual: Option<f64>,
}

/// Eigen-decomposition of `(m + m^T)/2` sorted ascending.
pub(crate) fn sym_eigen(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(sym.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (sym, values, vectors)
}

impl GramianResult {
    pub fn new(matrix: DMatrix<f64>, kind: GramianKind, method: GramianMethod) -> Self {
        let (matrix, eigenvalues, eigenvectors) = sym_eigen(&matrix);
        let lambda_min = eigenvalues[0];
        let lambda_max = *eigenvalues.last().unwrap();
        Self {
            matrix,
            kind,
            method,
            eigenvalues,
            eigenvectors,
            lambda_min,
            lambda_max,
            cross_residual: None,
        }
    }

    /// Records the Frobenius distance to `other` on both results.
    pub fn cross_check(&mut self, other: &mut GramianResult) -> f64 {
        let r = (&self.matrix - &other.matrix).norm();
        self.cross_residual = Some(r);
        other.cross_residual = Some(r);
        r
    }

    /// `sqrt(lambda_min)`, clamped at zero: the constant of the lower
    /// estimate `delta ||z|| <= ||...||_{L2}` this Gramian encodes.
    pub fn delta(&self) -> f64 {
        self.lambda_min.max(0.0).sqrt()
    }
}

pub fn ctrl_gramian_quadrature(p: &Propagator) -> GramianResult {
    let sys = p.system();
    let nodes = p.grid().nodes();
    let to_end = p.transitions_to_end();
    let n = sys.n();
    let mut w = DMatrix::zeros(n, n);
    for (i, &wi) in p.weights().iter().enumerate() {
        let g = &to_end[i] * sys.b().eval_clamped(nodes[i]);
        w += &g * g.transpose() * wi;
    }
    GramianResult::new(w, GramianKind::Controllability, GramianMethod::Quadrature)
}

/// `W(tau)` from the differential Lyapunov equation, stepped with the
/// integrator and substep count in `options` across every grid interval.
pub fn ctrl_gramian_lyapunov(sys: &LtvSystem, options: &PropagatorOptions) -> GramianResult {
    let n = sys.n();
    let a = sys.a();
    let b = sys.b();
    let rhs = |t: f64, w: &DMatrix<f64>| {
        let at = a.eval_clamped(t);
        let bt = b.eval_clamped(t);
        let aw = &at * w;
        -(&aw + aw.transpose()) + &bt * bt.transpose()
    };
    let nodes = sys.grid().nodes();
    let mut w = DMatrix::zeros(n, n);
    for k in 0..sys.grid().steps() {
        w = integrate_interval(options.integrator, options.substeps.max(1), &rhs, nodes[k], nodes[k + 1], w);
    }
    GramianResult::new(w, GramianKind::Controllability, GramianMethod::LyapunovOde)
}

/// `Q_tau = int_0^tau U(t,0)^T C(t)^T C(t) U(t,0) dt`, so that
/// `<Q x, x> = ||C U(.,0) x||^2_{L2}`.
pub fn obs_gramian(p: &Propagator) -> GramianResult {
    let sys = p.system();
    let nodes = p.grid().nodes();
    let from_start = p.transitions_from_start();
    let n = sys.n();
    let mut q = DMatrix::zeros(n, n);
    for (i, &wi) in p.weights().iter().enumerate() {
        let g = sys.c().eval_clamped(nodes[i]) * &from_start[i];
        q += g.transpose() * &g * wi;
    }
    GramianResult::new(q, GramianKind::Observability, GramianMethod::Quadrature)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coercivity {
    pub coercive: bool,
    pub lambda_min: f64,
}

/// `coercive` iff `lambda_min > tol * lambda_max`.
pub fn coercivity_check(g: &GramianResult, tol: f64) -> Coercivity {
    Coercivity {
        coercive: g.lambda_min > tol * g.lambda_max,
        lambda_min: g.lambda_min,
    }
}
