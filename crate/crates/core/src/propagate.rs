//! Evolution family of `x' = -A(t) x` on the system grid.
//!
//! Only the per-interval step maps `Phi_i ~ U(t_{i+1}, t_i)` are stored;
//! longer transitions are products of them. With this sign convention
//! `d/dt U(t,s) = -A(t) U(t,s)` and `d/ds U(t,s) = U(t,s) A(s)`, so the
//! adjoint `z(t) = U(tau,t)^T z_tau` solves `z' = A(t)^T z`, `z(tau) = z_tau`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sysmodel::{ControlSignal, LtvSystem, Quadrature, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Rk4,
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropagatorOptions {
    pub integrator: Integrator,
    /// Integrator steps per grid interval.
    pub substeps: usize,
    /// Rule for every time integral computed from this propagator.
    pub quadrature: Quadrature,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        Self {
            integrator: Integrator::Rk4,
            substeps: 4,
            quadrature: Quadrature::Trapezoid,
        }
    }
}

impl PropagatorOptions {
    pub fn with_quadrature(mut self, quadrature: Quadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps;
        self
    }
}

/// One explicit step of `y' = f(t, y)` for matrix-valued `y`.
pub(crate) fn matrix_ode_step<F>(
    integrator: Integrator,
    f: &F,
    t: f64,
    h: f64,
    y: &DMatrix<f64>,
) -> DMatrix<f64>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    match integrator {
        Integrator::Rk4 => {
            let k1 = f(t, y);
            let k2 = f(t + 0.5 * h, &(y + &k1 * (0.5 * h)));
            let k3 = f(t + 0.5 * h, &(y + &k2 * (0.5 * h)));
            let k4 = f(t + h, &(y + &k3 * h));
            y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
        }
        Integrator::Midpoint => {
            let k1 = f(t, y);
            let k2 = f(t + 0.5 * h, &(y + &k1 * (0.5 * h)));
            y + k2 * h
        }
    }
}

/// Integrates a matrix ODE across one grid interval `[t0, t1]` with
/// `substeps` equal steps. Stage times are formed from the interval ends so
/// the last one lands on `t1`.
pub(crate) fn integrate_interval<F>(
    integrator: Integrator,
    substeps: usize,
    f: &F,
    t0: f64,
    t1: f64,
    y0: DMatrix<f64>,
) -> DMatrix<f64>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    let h = (t1 - t0) / substeps as f64;
    let mut y = y0;
    for j in 0..substeps {
        let t = t0 + (t1 - t0) * (j as f64 / substeps as f64);
        y = matrix_ode_step(integrator, f, t, h, &y);
    }
    y
}

/// Least-squares exponential bound `||U(t,s)|| <= m * exp(omega (t - s))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBound {
    pub m: f64,
    pub omega: f64,
}

#[derive(Debug)]
pub struct Propagator {
    sys: LtvSystem,
    options: PropagatorOptions,
    steps: Vec<DMatrix<f64>>,
    weights: Vec<f64>,
    to_end: OnceLock<Vec<DMatrix<f64>>>,
    from_start: OnceLock<Vec<DMatrix<f64>>>,
}

impl Propagator {
    pub fn new(sys: &LtvSystem, options: PropagatorOptions) -> Result<Self> {
        if options.substeps == 0 {
            return Err(Error::Precondition("substeps must be >= 1".into()));
        }
        let weights = options.quadrature.weights(sys.grid().nodes())?;
        let nodes = sys.grid().nodes();
        let n = sys.n();
        let a = sys.a();
        let rhs = |t: f64, y: &DMatrix<f64>| -(a.eval_clamped(t) * y);
        let steps = (0..sys.grid().steps())
            .into_par_iter()
            .map(|i| {
                integrate_interval(
                    options.integrator,
                    options.substeps,
                    &rhs,
                    nodes[i],
                    nodes[i + 1],
                    DMatrix::identity(n, n),
                )
            })
            .collect();
        Ok(Self {
            sys: sys.clone(),
            options,
            steps,
            weights,
            to_end: OnceLock::new(),
            from_start: OnceLock::new(),
        })
    }

    pub fn with_defaults(sys: &LtvSystem) -> Result<Self> {
        Self::new(sys, PropagatorOptions::default())
    }

    pub fn system(&self) -> &LtvSystem {
        &self.sys
    }

    pub fn grid(&self) -> &TimeGrid {
        self.sys.grid()
    }

    pub fn options(&self) -> PropagatorOptions {
        self.options
    }

    pub fn quadrature(&self) -> Quadrature {
        self.options.quadrature
    }

    /// Quadrature weights on the full grid.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn step_transitions(&self) -> &[DMatrix<f64>] {
        &self.steps
    }

    pub fn last_index(&self) -> usize {
        self.steps.len()
    }

    /// `U(t_{t_idx}, t_{s_idx})`.
    pub fn transition(&self, s_idx: usize, t_idx: usize) -> Result<DMatrix<f64>> {
        self.grid().check_index(t_idx)?;
        if s_idx > t_idx {
            return Err(Error::BackwardTransition { s_idx, t_idx });
        }
        let n = self.sys.n();
        let mut u = DMatrix::identity(n, n);
        for phi in &self.steps[s_idx..t_idx] {
            u = phi * u;
        }
        Ok(u)
    }

    /// `U(tau, t_i)` for every node, cached on first use.
    pub fn transitions_to_end(&self) -> &[DMatrix<f64>] {
        self.to_end.get_or_init(|| {
            let n = self.sys.n();
            let mut out = vec![DMatrix::identity(n, n); self.steps.len() + 1];
            for i in (0..self.steps.len()).rev() {
                out[i] = &out[i + 1] * &self.steps[i];
            }
            out
        })
    }

    /// `U(t_i, 0)` for every node, cached on first use.
    pub fn transitions_from_start(&self) -> &[DMatrix<f64>] {
        self.from_start.get_or_init(|| {
            let n = self.sys.n();
            let mut out = Vec::with_capacity(self.steps.len() + 1);
            out.push(DMatrix::identity(n, n));
            for phi in &self.steps {
                let next = phi * out.last().unwrap();
                out.push(next);
            }
            out
        })
    }

    /// Variation-of-constants state `x(t_k) = U(t_k,0) x0 + int_0^{t_k} U(t_k,s) B(s) u(s) ds`,
    /// with the integral taken by the propagator's quadrature on `[0, t_k]`.
    pub fn propagate_state(
        &self,
        x0: &DVector<f64>,
        u: Option<&ControlSignal>,
        t_idx: usize,
    ) -> Result<DVector<f64>> {
        self.grid().check_index(t_idx)?;
        if x0.len() != self.sys.n() {
            return Err(Error::Dimension(format!(
                "x0 has length {}, state dimension is {}",
                x0.len(),
                self.sys.n()
            )));
        }
        if x0.iter().any(|x| !x.is_finite()) {
            return Err(Error::Precondition("x0 has non-finite entries".into()));
        }
        let nodes = self.grid().nodes();
        let forcing = match u {
            None => None,
            Some(u) => {
                self.check_signal(u)?;
                let w = self.options.quadrature.weights(&nodes[..=t_idx])?;
                Some((u, w))
            }
        };
        let b = self.sys.b();
        let mut x = x0.clone();
        let add_forcing = |x: &mut DVector<f64>, i: usize| {
            if let Some((u, w)) = &forcing {
                *x += b.eval_clamped(nodes[i]) * &u.values()[i] * w[i];
            }
        };
        add_forcing(&mut x, 0);
        for i in 0..t_idx {
            x = &self.steps[i] * x;
            add_forcing(&mut x, i + 1);
        }
        Ok(x)
    }

    /// `z(t_i) = U(tau, t_i)^T z_tau`: the solution of `z' = A(t)^T z` with
    /// final datum `z_tau`.
    pub fn adjoint_state(&self, z_tau: &DVector<f64>, t_idx: usize) -> Result<DVector<f64>> {
        self.grid().check_index(t_idx)?;
        if z_tau.len() != self.sys.n() {
            return Err(Error::Dimension(format!(
                "z_tau has length {}, state dimension is {}",
                z_tau.len(),
                self.sys.n()
            )));
        }
        Ok(self.transitions_to_end()[t_idx].tr_mul(z_tau))
    }

    pub(crate) fn check_signal(&self, u: &ControlSignal) -> Result<()> {
        if u.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        if u.dim() != self.sys.m() {
            return Err(Error::Dimension(format!(
                "control has dimension {}, system has {} inputs",
                u.dim(),
                self.sys.m()
            )));
        }
        Ok(())
    }

    /// Fits `log ||U(t_j,t_i)||_2 ~ log m + omega (t_j - t_i)` over all grid
    /// pairs `i < j` by least squares, then takes the smallest `m >= 1` that
    /// makes the bound hold at every pair (so it is attained at one of them).
    pub fn growth_bound(&self) -> GrowthBound {
        let nodes = self.grid().nodes();
        let n = self.sys.n();
        let samples: Vec<(f64, f64)> = (0..self.steps.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut u = DMatrix::<f64>::identity(n, n);
                let mut row = Vec::with_capacity(self.steps.len() - i);
                for j in i..self.steps.len() {
                    u = &self.steps[j] * u;
                    let norm = spectral_norm(&u).max(f64::MIN_POSITIVE);
                    row.push((nodes[j + 1] - nodes[i], norm.ln()));
                }
                row
            })
            .collect();

        let count = samples.len() as f64;
        let mean_x = samples.iter().map(|s| s.0).sum::<f64>() / count;
        let mean_y = samples.iter().map(|s| s.1).sum::<f64>() / count;
        let sxx: f64 = samples.iter().map(|s| (s.0 - mean_x).powi(2)).sum();
        let sxy: f64 = samples.iter().map(|s| (s.0 - mean_x) * (s.1 - mean_y)).sum();
        let omega = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let log_m = samples
            .iter()
            .map(|&(dt, y)| y - omega * dt)
            .fold(0.0f64, f64::max);
        GrowthBound {
            m: log_m.exp(),
            omega,
        }
    }
}

pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().max()
}
