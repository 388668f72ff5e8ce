//! Minimum-energy steering controls.
//!
//! For `d = x_tau - U(tau,0) x0` the control
//! `u(s) = B(s)^T U(tau,s)^T W_tau^{-1} d` reaches `x_tau` and is the unique
//! L2-smallest one: any other steering control differs from it by a kernel
//! element of `Psi_tau`, which is orthogonal to `Ran Psi_tau^T`. Its energy
//! is `<W_tau^{-1} d, d>`.

use nalgebra::DVector;

use crate::duality::{input_map_adjoint, null_controllability_with, range_basis};
use crate::error::{Error, Result};
use crate::gramian::{coercivity_check, ctrl_gramian_quadrature, GramianResult};
use crate::propagate::Propagator;
use crate::sysmodel::ControlSignal;

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub control: ControlSignal,
    /// `||x(tau) - x_target||`.
    pub target_residual: f64,
    /// `||u||_{L2}^2`.
    pub cost: f64,
    /// `<W_tau^{-1} d, d>`.
    pub gramian_cost: f64,
    /// `lambda_max / lambda_min` of the part of `W_tau` that was inverted.
    pub condition: f64,
    /// The multiplier `eta = W_tau^{-1} d`, so that `u = Psi_tau^T eta`.
    pub multiplier: DVector<f64>,
}

fn check_vec(v: &DVector<f64>, n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::Dimension(format!("{what} has length {}, state dimension is {n}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precondition(format!("{what} has non-finite entries")));
    }
    Ok(())
}

fn finish(
    p: &Propagator,
    x0: &DVector<f64>,
    target: &DVector<f64>,
    d: &DVector<f64>,
    eta: DVector<f64>,
    condition: f64,
) -> Result<SynthesisResult> {
    let control = input_map_adjoint(p, &eta)?;
    let cost = control.l2_norm_with(p.quadrature())?.powi(2);
    let target_residual = verify_steering(p, &control, x0, target)?;
    Ok(SynthesisResult {
        control,
        target_residual,
        cost,
        gramian_cost: eta.dot(d),
        condition,
        multiplier: eta,
    })
}

fn free_response_gap(p: &Propagator, x0: &DVector<f64>, x_tau: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(x_tau - p.propagate_state(x0, None, p.last_index())?)
}

fn solve_coercive(w: &GramianResult, d: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let condition = w.lambda_max / w.lambda_min;
    let chol = w
        .matrix
        .clone()
        .cholesky()
        .ok_or(Error::LinearSolve { condition })?;
    let eta = chol.solve(d);
    if eta.iter().any(|x| !x.is_finite()) {
        return Err(Error::LinearSolve { condition });
    }
    Ok((eta, condition))
}

/// Minimum-L2-norm control steering `x0` to `x_tau` at time `tau`.
pub fn min_norm_control(
    p: &Propagator,
    x0: &DVector<f64>,
    x_tau: &DVector<f64>,
    tol: f64,
) -> Result<SynthesisResult> {
    let n = p.system().n();
    check_vec(x0, n, "x0")?;
    check_vec(x_tau, n, "x_tau")?;
    let w = ctrl_gramian_quadrature(p);
    if !coercivity_check(&w, tol).coercive {
        return Err(Error::NotControllable {
            lambda_min: w.lambda_min,
            lambda_max: w.lambda_max,
        });
    }
    let d = free_response_gap(p, x0, x_tau)?;
    let (eta, condition) = solve_coercive(&w, &d)?;
    finish(p, x0, x_tau, &d, eta, condition)
}

/// Minimum-norm control steering `x0` to the origin. When `W_tau` is
/// singular but the range inclusion holds, `W_tau` is inverted on its range.
pub fn null_control(p: &Propagator, x0: &DVector<f64>, tol: f64) -> Result<SynthesisResult> {
    let n = p.system().n();
    check_vec(x0, n, "x0")?;
    let w = ctrl_gramian_quadrature(p);
    if !null_controllability_with(p, &w, tol).feasible {
        return Err(Error::NotNullControllable);
    }
    let zero = DVector::zeros(n);
    let d = free_response_gap(p, x0, &zero)?;
    let (eta, condition) = if coercivity_check(&w, tol).coercive {
        solve_coercive(&w, &d)?
    } else {
        let (basis, lambdas) = range_basis(&w, tol);
        let coords = basis.tr_mul(&d);
        let scaled = DVector::from_iterator(lambdas.len(), coords.iter().zip(&lambdas).map(|(c, l)| c / l));
        let condition = match lambdas.first() {
            Some(lo) => lambdas.last().unwrap() / lo,
            None => 1.0,
        };
        (basis * scaled, condition)
    };
    finish(p, x0, &zero, &d, eta, condition)
}

/// `||x(tau) - x_target||` for the state reached from `x0` under `u`.
pub fn verify_steering(
    p: &Propagator,
    u: &ControlSignal,
    x0: &DVector<f64>,
    x_target: &DVector<f64>,
) -> Result<f64> {
    let x = p.propagate_state(x0, Some(u), p.last_index())?;
    Ok((x - x_target).norm())
}
