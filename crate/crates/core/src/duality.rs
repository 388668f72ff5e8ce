//! The input-to-state map `Psi_tau u = int_0^tau U(tau,s) B(s) u(s) ds`, its
//! adjoint `(Psi_tau^T z)(t) = B(t)^T U(tau,t)^T z`, and the verdicts built
//! on them: exact controllability through coercivity of
//! `W_tau = Psi_tau Psi_tau^T`, admissibility of the observation operator,
//! and null controllability as the range inclusion
//! `Ran U(tau,0) ⊆ Ran Psi_tau`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::gramian::{coercivity_check, ctrl_gramian_quadrature, sym_eigen, GramianResult};
use crate::json::finite_or_inf;
use crate::propagate::Propagator;
use crate::sysmodel::ControlSignal;

/// A column of `U(tau,0)` lies in `Ran W_tau` when its projection residual
/// is at most this fraction of its norm.
pub const RANGE_INCLUSION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub controllable: bool,
    #[serde(rename = "lambda_min_W")]
    pub lambda_min_w: f64,
    #[serde(rename = "lambda_max_W")]
    pub lambda_max_w: f64,
    /// `delta` in `delta ||z|| <= ||Psi_tau^T z||_{L2}`; equals `sqrt(lambda_min_W)`.
    pub obs_constant_delta: f64,
    #[serde(rename = "admissibility_M")]
    pub admissibility_m: f64,
    pub null_controllable: bool,
    /// Range-inclusion constant; `+inf` when the inclusion fails.
    #[serde(serialize_with = "finite_or_inf")]
    pub null_inclusion_c: f64,
}

pub fn input_map(p: &Propagator, u: &ControlSignal) -> Result<DVector<f64>> {
    p.check_signal(u)?;
    let sys = p.system();
    let nodes = p.grid().nodes();
    let to_end = p.transitions_to_end();
    let mut x = DVector::zeros(sys.n());
    for (i, &wi) in p.weights().iter().enumerate() {
        x += &to_end[i] * (sys.b().eval_clamped(nodes[i]) * &u.values()[i]) * wi;
    }
    Ok(x)
}

/// The signal `t_i -> B(t_i)^T U(tau,t_i)^T z`. It is also the adjoint
/// output `h(t) = B(t)^T z(t)` of the dual final-time problem.
pub fn input_map_adjoint(p: &Propagator, z: &DVector<f64>) -> Result<ControlSignal> {
    let sys = p.system();
    let nodes = p.grid().nodes();
    let values = (0..nodes.len())
        .map(|i| Ok(sys.b().eval_clamped(nodes[i]).tr_mul(&p.adjoint_state(z, i)?)))
        .collect::<Result<Vec<_>>>()?;
    ControlSignal::new(p.grid().clone(), values)
}

/// `|<Psi u, z> - <u, Psi^T z>_{L2}|`.
pub fn adjoint_identity_residual(p: &Propagator, u: &ControlSignal, z: &DVector<f64>) -> Result<f64> {
    let lhs = input_map(p, u)?.dot(z);
    let rhs = u.inner(&input_map_adjoint(p, z)?, p.quadrature())?;
    Ok((lhs - rhs).abs())
}

/// `|<x(tau), z_tau> - int_0^tau <u(s), B(s)^T z(s)> ds|` with `x(0) = 0`,
/// `x` from forward propagation and `z` from the backward adjoint equation.
pub fn key_identity_residual(p: &Propagator, u: &ControlSignal, z_tau: &DVector<f64>) -> Result<f64> {
    let n = p.system().n();
    let x_tau = p.propagate_state(&DVector::zeros(n), Some(u), p.last_index())?;
    let sys = p.system();
    let nodes = p.grid().nodes();
    let mut rhs = 0.0;
    for (i, &wi) in p.weights().iter().enumerate() {
        let z = p.adjoint_state(z_tau, i)?;
        let h = sys.b().eval_clamped(nodes[i]).tr_mul(&z);
        rhs += wi * u.values()[i].dot(&h);
    }
    Ok((x_tau.dot(z_tau) - rhs).abs())
}

/// Smallest `M` with `int_s^tau ||C(t) U(t,s) x||^2 dt <= M^2 ||x||^2` for
/// every `x` and every grid node `s`.
pub fn admissibility_constant(p: &Propagator) -> Result<f64> {
    let sys = p.system();
    let nodes = p.grid().nodes();
    let steps = p.step_transitions();
    let rule = p.quadrature();
    let n = sys.n();
    let c: Vec<DMatrix<f64>> = nodes.iter().map(|&t| sys.c().eval_clamped(t)).collect();
    let per_window: Vec<f64> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let w = rule.weights(&nodes[i..])?;
            let mut u = DMatrix::<f64>::identity(n, n);
            let mut q = DMatrix::<f64>::zeros(n, n);
            for (k, &wk) in w.iter().enumerate() {
                if k > 0 {
                    u = &steps[i + k - 1] * u;
                }
                let g = &c[i + k] * &u;
                q += g.transpose() * g * wk;
            }
            Ok(sym_eigen(&q).1.last().copied().unwrap_or(0.0).max(0.0))
        })
        .collect::<Result<_>>()?;
    Ok(per_window.into_iter().fold(0.0, f64::max).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullControllability {
    pub feasible: bool,
    #[serde(serialize_with = "finite_or_inf")]
    pub c: f64,
    /// Largest relative projection residual over the columns of `U(tau,0)`.
    pub max_projection_residual: f64,
}

/// Orthonormal basis of the eigenvectors of `g` above `tol * lambda_max`,
/// with their eigenvalues.
pub(crate) fn range_basis(g: &GramianResult, tol: f64) -> (DMatrix<f64>, Vec<f64>) {
    let cols: Vec<usize> = if g.lambda_max > 0.0 {
        (0..g.eigenvalues.len())
            .filter(|&k| g.eigenvalues[k] > tol * g.lambda_max)
            .collect()
    } else {
        Vec::new()
    };
    let basis = DMatrix::from_fn(g.matrix.nrows(), cols.len(), |r, c| g.eigenvectors[(r, cols[c])]);
    (basis, cols.iter().map(|&k| g.eigenvalues[k]).collect())
}

/// Range-inclusion test of `F = U(tau,0)` against `G = Psi_tau`, and the
/// constant `c` of `||F^T z|| <= c ||G^T z||_{L2}`.
pub fn null_controllability_test(p: &Propagator, tol: f64) -> NullControllability {
    let w = ctrl_gramian_quadrature(p);
    null_controllability_with(p, &w, tol)
}

pub(crate) fn null_controllability_with(p: &Propagator, w: &GramianResult, tol: f64) -> NullControllability {
    let f = &p.transitions_from_start()[p.last_index()];
    let (basis, lambdas) = range_basis(w, tol);
    let mut worst = 0.0f64;
    for col in f.column_iter() {
        let norm = col.norm();
        if norm == 0.0 {
            continue;
        }
        let proj = &basis * (basis.tr_mul(&col));
        worst = worst.max((col - proj).norm() / norm);
    }
    let feasible = worst <= RANGE_INCLUSION_TOL;
    let c = if !feasible {
        f64::INFINITY
    } else if lambdas.is_empty() {
        0.0
    } else {
        // z = V_r diag(lambda)^{-1/2} y turns the pencil into a plain
        // symmetric eigenproblem.
        let scale = DMatrix::from_fn(lambdas.len(), lambdas.len(), |r, c| {
            if r == c {
                1.0 / lambdas[r].sqrt()
            } else {
                0.0
            }
        });
        let k = scale * basis.tr_mul(f);
        let pencil = &k * k.transpose();
        sym_eigen(&pencil).1.last().copied().unwrap_or(0.0).max(0.0).sqrt()
    };
    NullControllability {
        feasible,
        c,
        max_projection_residual: worst,
    }
}

pub fn exact_controllability_test(p: &Propagator, tol: f64) -> Result<DualityReport> {
    let w = ctrl_gramian_quadrature(p);
    let verdict = coercivity_check(&w, tol);
    let null = null_controllability_with(p, &w, tol);
    Ok(DualityReport {
        controllable: verdict.coercive,
        lambda_min_w: w.lambda_min,
        lambda_max_w: w.lambda_max,
        obs_constant_delta: w.delta(),
        admissibility_m: admissibility_constant(p)?,
        null_controllable: null.feasible,
        null_inclusion_c: null.c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gramian::DEFAULT_COERCIVITY_TOL;
    use crate::propagate::PropagatorOptions;
    use crate::sysmodel::{LtvSystem, Quadrature};

    fn scalar(a: f64, b: f64, c: f64, steps: usize) -> Propagator {
        let m = |x: f64| DMatrix::from_element(1, 1, x);
        let sys = LtvSystem::constant(m(a), m(b), m(c), 1.0, steps).unwrap();
        Propagator::with_defaults(&sys).unwrap()
    }

    fn scalar_signal(p: &Propagator, f: impl Fn(f64) -> f64) -> ControlSignal {
        ControlSignal::from_fn(p.grid().clone(), |t| DVector::from_element(1, f(t))).unwrap()
    }

    #[test]
    fn input_map_examples() {
        let p = scalar(0.0, 1.0, 1.0, 100);
        assert_eq!(input_map(&p, &ControlSignal::zeros(p.grid().clone(), 1)).unwrap()[0], 0.0);
        assert!((input_map(&p, &scalar_signal(&p, |_| 1.0)).unwrap()[0] - 1.0).abs() < 1e-8);

        let p = scalar(1.0, 1.0, 1.0, 2000);
        let u = scalar_signal(&p, |s| (-(1.0 - s)).exp());
        let exact = (1.0 - (-2.0f64).exp()) / 2.0;
        assert!((input_map(&p, &u).unwrap()[0] - exact).abs() < 1e-7);
    }

    #[test]
    fn input_map_matches_forced_propagation() {
        let p = scalar(0.8, 1.3, 1.0, 77);
        let u = scalar_signal(&p, |s| (5.0 * s).sin());
        let a = input_map(&p, &u).unwrap()[0];
        let b = p.propagate_state(&DVector::zeros(1), Some(&u), 77).unwrap()[0];
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn input_map_adjoint_examples() {
        let p = scalar(0.0, 1.0, 1.0, 50);
        let zero = input_map_adjoint(&p, &DVector::zeros(1)).unwrap();
        assert!(zero.values().iter().all(|v| v[0] == 0.0));
        let ones = input_map_adjoint(&p, &DVector::from_element(1, 1.0)).unwrap();
        assert!(ones.values().iter().all(|v| v[0] == 1.0));

        let p = scalar(1.0, 1.0, 1.0, 100);
        let h = input_map_adjoint(&p, &DVector::from_element(1, 1.0)).unwrap();
        assert!((h.values()[0][0] - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn residuals_vanish_on_trivial_inputs() {
        let p = scalar(1.0, 1.0, 1.0, 100);
        let zero_u = ControlSignal::zeros(p.grid().clone(), 1);
        let u = scalar_signal(&p, |s| s.cos());
        let z = DVector::from_element(1, 0.7);
        assert_eq!(adjoint_identity_residual(&p, &zero_u, &z).unwrap(), 0.0);
        assert_eq!(adjoint_identity_residual(&p, &u, &DVector::zeros(1)).unwrap(), 0.0);
        assert_eq!(key_identity_residual(&p, &zero_u, &z).unwrap(), 0.0);
        assert!(adjoint_identity_residual(&p, &u, &z).unwrap() < 1e-12);

        let p = scalar(0.0, 1.0, 1.0, 100);
        let ones = scalar_signal(&p, |_| 1.0);
        assert!(key_identity_residual(&p, &ones, &DVector::from_element(1, 1.0)).unwrap() < 1e-8);
    }

    #[test]
    fn controllability_examples() {
        let p = scalar(0.0, 1.0, 1.0, 100);
        let r = exact_controllability_test(&p, DEFAULT_COERCIVITY_TOL).unwrap();
        assert!(r.controllable);
        assert!((r.obs_constant_delta - 1.0).abs() < 1e-10);

        let sys = LtvSystem::constant(
            DMatrix::from_row_slice(2, 2, &[0.3, 1.0, -1.0, 0.0]),
            DMatrix::zeros(2, 1),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            1.0,
            50,
        )
        .unwrap();
        let r = exact_controllability_test(&Propagator::with_defaults(&sys).unwrap(), DEFAULT_COERCIVITY_TOL).unwrap();
        assert!(!r.controllable);
        assert_eq!(r.lambda_min_w, 0.0);

        let sys = LtvSystem::constant(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            1.0,
            100,
        )
        .unwrap();
        let r = exact_controllability_test(&Propagator::with_defaults(&sys).unwrap(), DEFAULT_COERCIVITY_TOL).unwrap();
        assert!(r.controllable);
        assert!((r.obs_constant_delta.powi(2) - r.lambda_min_w).abs() <= 1e-8 * r.lambda_min_w);
    }

    #[test]
    fn admissibility_examples() {
        assert_eq!(admissibility_constant(&scalar(0.4, 1.0, 0.0, 20)).unwrap(), 0.0);
        assert!((admissibility_constant(&scalar(0.0, 1.0, 1.0, 100)).unwrap() - 1.0).abs() < 1e-12);
        let sys = LtvSystem::constant(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            1.0,
            400,
        )
        .unwrap();
        let p = Propagator::new(&sys, PropagatorOptions::default().with_quadrature(Quadrature::Simpson)).unwrap();
        assert!((admissibility_constant(&p).unwrap() - 0.657519).abs() < 1e-6);
    }

    #[test]
    fn null_controllability_examples() {
        let r = null_controllability_test(&scalar(0.0, 0.0, 1.0, 20), DEFAULT_COERCIVITY_TOL);
        assert!(!r.feasible);
        assert!(r.c.is_infinite());

        let r = null_controllability_test(&scalar(1.0, 1.0, 1.0, 1000), DEFAULT_COERCIVITY_TOL);
        assert!(r.feasible);
        let exact = (-1.0f64).exp() / ((1.0 - (-2.0f64).exp()) / 2.0).sqrt();
        assert!((r.c - exact).abs() < 1e-6, "c = {}", r.c);
    }

    #[test]
    fn range_inclusion_on_singular_gramian() {
        // Reachable subspace span(e1); U(tau,0) = I has full range, so the
        // inclusion fails even though W is nonzero.
        let sys = LtvSystem::constant(
            DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.0, 1.0]),
            DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            1.0,
            50,
        )
        .unwrap();
        let r = null_controllability_test(&Propagator::with_defaults(&sys).unwrap(), DEFAULT_COERCIVITY_TOL);
        assert!(!r.feasible);
        assert!(r.max_projection_residual > 0.1);
    }
}
