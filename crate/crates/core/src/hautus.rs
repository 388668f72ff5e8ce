//! Hautus-type observability certificates.
//!
//! Two families of inequalities live here.
//!
//! * The frequency-domain test for a single generator `G`: for `Re s < 0`,
//!   `||(sI - G)x||^2 + |Re s| ||Cx||^2 >= m^2 |Re s|^2 ||x||^2`.
//!   Frozen generators of `x' + A(t)x = 0` are `G = -A(s0)`.
//!
//! * The time-varying necessary condition. Differentiating
//!   `s -> e^{-lambda s} U(t,s) x` and integrating over `[0,t]` gives
//!   `U(t,0)x = e^{-lambda t} x + int_0^t U(t,s) (lambda + G(s)) x e^{-lambda s} ds`
//!   with `G(s) = -A(s)`. Exact observability with constant `delta` and
//!   admissibility of `C` with constant `M` then force, for `Re lambda > 0`,
//!
//!   ```text
//!   delta ||x|| <= ||Cx|| / sqrt(2 Re lambda) + M int_0^tau ||(lambda + G(s)) x|| e^{-Re(lambda) s} ds
//!   ```
//!
//!   and the margin reported is right side minus left side.
//!
//! The module also has a witness search (a large integral
//! forces a large sample) and a numerical check of the averaging identity
//! `f(0) = (1/sigma) int_0^sigma f - int_0^sigma t^{-2} int_0^t (f(t) - f(s)) ds dt`.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen, SVD};
use rayon::prelude::*;
use serde::Serialize;

use crate::duality::admissibility_constant;
use crate::error::{Error, Result};
use crate::gramian::obs_gramian;
use crate::propagate::Propagator;
use crate::rng::Lcg64;
use crate::sysmodel::LtvSystem;

pub type C64 = Complex<f64>;

fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// `count` points log-spaced on `[lo, hi]`, endpoints exact.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|k| match k {
            0 => lo,
            _ if k + 1 == count => hi,
            _ => 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64),
        })
        .collect()
}

/// Re lambda values of the default sweep: 7 points log-spaced on [0.1, 10].
pub fn default_real_parts() -> Vec<f64> {
    log_spaced(0.1, 10.0, 7)
}

pub const DEFAULT_IMAG_PARTS: [f64; 5] = [0.0, 1.0, -1.0, 10.0, -10.0];

/// Every `sign * re` paired with every `im`, real part outermost.
pub fn spectral_grid(re: &[f64], im: &[f64], sign: f64) -> Vec<C64> {
    re.iter()
        .flat_map(|&r| im.iter().map(move |&i| C64::new(sign * r, i)))
        .collect()
}

/// [`default_real_parts`] times [`DEFAULT_IMAG_PARTS`]. `sign` is `1.0`
/// for the right half-plane, `-1.0` for the left.
pub fn default_spectral_grid(sign: f64) -> Vec<C64> {
    spectral_grid(&default_real_parts(), &DEFAULT_IMAG_PARTS, sign)
}

#[derive(Debug, Clone)]
pub struct HautusGrid {
    lambdas: Vec<C64>,
    test_vectors: Vec<DVector<C64>>,
}

impl HautusGrid {
    /// `lambdas` must lie in the open right half-plane and test vectors must
    /// have unit norm.
    pub fn new(lambdas: Vec<C64>, test_vectors: Vec<DVector<C64>>) -> Result<Self> {
        for l in &lambdas {
            if !(l.re > 0.0) || !l.im.is_finite() || !l.re.is_finite() {
                return Err(Error::HalfPlane {
                    re: l.re,
                    im: l.im,
                    expected: "Re lambda > 0",
                });
            }
        }
        for (k, x) in test_vectors.iter().enumerate() {
            if (x.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Precondition(format!("test vector {k} is not a unit vector")));
            }
        }
        Ok(Self { lambdas, test_vectors })
    }

    /// Default lambda grid with `count` seeded random unit vectors.
    pub fn random(n: usize, count: usize, seed: u64) -> Self {
        let mut rng = Lcg64::new(seed);
        let vectors = (0..count).map(|_| rng.unit_complex_vector(n)).collect();
        Self {
            lambdas: default_spectral_grid(1.0),
            test_vectors: vectors,
        }
    }

    pub fn with_vectors(mut self, extra: impl IntoIterator<Item = DVector<C64>>) -> Result<Self> {
        self.test_vectors.extend(extra);
        Self::new(self.lambdas, self.test_vectors)
    }

    pub fn lambdas(&self) -> &[C64] {
        &self.lambdas
    }

    pub fn test_vectors(&self) -> &[DVector<C64>] {
        &self.test_vectors
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub lambda_index: usize,
    pub vector_index: usize,
    pub lambda: [f64; 2],
    /// `[re, im]` per component.
    pub vector: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HautusReport {
    /// `margins[i][j]` for lambda `i` and test vector `j`.
    pub margins: Vec<Vec<f64>>,
    pub min_margin: f64,
    pub witness: Witness,
    pub delta: f64,
    #[serde(rename = "admissibility_M")]
    pub admissibility_m: f64,
    /// True when `C` varies in time; the boundary term then uses
    /// `max_t ||C(t) x||`.
    pub c_time_varying: bool,
}

fn check_left(s: C64) -> Result<()> {
    if s.re < 0.0 {
        Ok(())
    } else {
        Err(Error::HalfPlane {
            re: s.re,
            im: s.im,
            expected: "Re s < 0",
        })
    }
}

fn check_right(l: C64) -> Result<()> {
    if l.re > 0.0 {
        Ok(())
    } else {
        Err(Error::HalfPlane {
            re: l.re,
            im: l.im,
            expected: "Re lambda > 0",
        })
    }
}

/// `||(sI - G)x||^2 + |Re s| ||Cx||^2 - m^2 |Re s|^2 ||x||^2`.
pub fn russell_weiss_margin(
    g: &DMatrix<f64>,
    c: &DMatrix<f64>,
    s: C64,
    x: &DVector<C64>,
    m: f64,
) -> Result<f64> {
    check_left(s)?;
    let gx = complexify(g) * x;
    let resolvent = x * s - gx;
    let cx = complexify(c) * x;
    let r = s.re.abs();
    Ok(resolvent.norm_squared() + r * cx.norm_squared() - m * m * r * r * x.norm_squared())
}

/// Minimum of [`russell_weiss_margin`] over unit `x`, with a minimizer.
pub fn russell_weiss_min_margin(
    g: &DMatrix<f64>,
    c: &DMatrix<f64>,
    s: C64,
    m: f64,
) -> Result<(f64, DVector<C64>)> {
    check_left(s)?;
    let n = g.nrows();
    let shifted = DMatrix::<C64>::identity(n, n) * s - complexify(g);
    let r = s.re.abs();
    let cc = complexify(&(c.transpose() * c));
    let h = shifted.adjoint() * &shifted + cc * C64::new(r, 0.0);
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let (k, lmin) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let x = eig.eigenvectors.column(k).into_owned();
    Ok((lmin - m * m * r * r, x))
}

/// Largest `m` (to `digits` significant digits, rounded down) for which
/// [`russell_weiss_min_margin`] is nonnegative at every `s` in `s_grid`.
pub fn russell_weiss_max_m(g: &DMatrix<f64>, c: &DMatrix<f64>, s_grid: &[C64], digits: u32) -> Result<f64> {
    let feasible = |m: f64| -> Result<bool> {
        for &s in s_grid {
            if russell_weiss_min_margin(g, c, s, m)?.0 < 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if !feasible(0.0)? {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while feasible(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e150 {
            return Ok(lo);
        }
    }
    let rel = 10f64.powi(-(digits as i32));
    while hi - lo > rel * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `phi1(z) = (1 - e^{-z})/z` and `phi2(z) = (1 - e^{-z}(1 + z))/z^2`.
fn exp_moments(z: f64) -> (f64, f64) {
    if z < 0.1 {
        // sum_k (-z)^k / (k! (k+1)) and sum_k (-z)^k / (k! (k+2))
        let mut term = 1.0;
        let mut p1 = 0.0;
        let mut p2 = 0.0;
        for k in 0..20 {
            p1 += term / (k + 1) as f64;
            p2 += term / (k + 2) as f64;
            term *= -z / (k + 1) as f64;
        }
        (p1, p2)
    } else {
        let e = (-z).exp();
        (-(-z).exp_m1() / z, (1.0 - e * (1.0 + z)) / (z * z))
    }
}

/// `int_0^tau f(s) e^{-sigma s} ds` for `f` linear between grid samples,
/// with the exponential integrated exactly on every interval.
fn exp_weighted_integral(nodes: &[f64], f: &[f64], sigma: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..nodes.len() - 1 {
        let h = nodes[k + 1] - nodes[k];
        let (phi1, phi2) = exp_moments(sigma * h);
        let decay = (-sigma * nodes[k]).exp();
        total += decay * h * (f[k] * (phi1 - phi2) + f[k + 1] * phi2);
    }
    total
}

struct NodeData {
    nodes: Vec<f64>,
    a: Vec<DMatrix<C64>>,
    c: Vec<DMatrix<C64>>,
    c_varies: bool,
}

impl NodeData {
    fn new(p: &Propagator) -> Self {
        let sys = p.system();
        let nodes = p.grid().nodes().to_vec();
        let a = nodes.iter().map(|&t| complexify(&sys.a().eval_clamped(t))).collect();
        let c_varies = !sys.c().is_constant();
        let c = if c_varies {
            nodes.iter().map(|&t| complexify(&sys.c().eval_clamped(t))).collect()
        } else {
            vec![complexify(&sys.c().eval_clamped(0.0))]
        };
        Self { nodes, a, c, c_varies }
    }

    fn max_output(&self, x: &DVector<C64>) -> f64 {
        self.c.iter().map(|c| (c * x).norm()).fold(0.0, f64::max)
    }

    /// `A(t_k) x` at every node.
    fn a_times(&self, x: &DVector<C64>) -> Vec<DVector<C64>> {
        self.a.iter().map(|a| a * x).collect()
    }

    fn integral_term(&self, ax: &[DVector<C64>], lambda: C64, x: &DVector<C64>) -> f64 {
        let lx = x * lambda;
        let f: Vec<f64> = ax.iter().map(|v| (&lx - v).norm()).collect();
        exp_weighted_integral(&self.nodes, &f, lambda.re)
    }
}

/// `int_0^tau ||(lambda + G(s)) x|| e^{-Re(lambda) s} ds` with `G = -A`.
pub fn hautus_integral_term(p: &Propagator, lambda: C64, x: &DVector<C64>) -> Result<f64> {
    check_right(lambda)?;
    let data = NodeData::new(p);
    Ok(data.integral_term(&data.a_times(x), lambda, x))
}

/// Signed margin of the time-varying Hautus inequality at `(lambda, x)`.
pub fn nonautonomous_hautus_margin(
    p: &Propagator,
    lambda: C64,
    x: &DVector<C64>,
    delta: f64,
    m: f64,
) -> Result<f64> {
    check_right(lambda)?;
    let data = NodeData::new(p);
    Ok(margin_at(&data, &data.a_times(x), lambda, x, delta, m))
}

fn margin_at(data: &NodeData, ax: &[DVector<C64>], lambda: C64, x: &DVector<C64>, delta: f64, m: f64) -> f64 {
    let boundary = data.max_output(x) / (2.0 * lambda.re).sqrt();
    boundary + m * data.integral_term(ax, lambda, x) - delta * x.norm()
}

/// Margins over the whole grid with `delta = sqrt(lambda_min(Q_tau))` and
/// the admissibility constant computed from `p`.
pub fn hautus_sweep(p: &Propagator, grid: &HautusGrid) -> Result<HautusReport> {
    let n = p.system().n();
    if let Some(x) = grid.test_vectors().iter().find(|x| x.len() != n) {
        return Err(Error::Dimension(format!("test vector of length {}, state dimension {n}", x.len())));
    }
    if grid.lambdas().is_empty() || grid.test_vectors().is_empty() {
        return Err(Error::Precondition("empty Hautus grid".into()));
    }
    let delta = obs_gramian(p).delta();
    let m = admissibility_constant(p)?;
    let data = NodeData::new(p);

    let by_vector: Vec<Vec<f64>> = grid
        .test_vectors()
        .par_iter()
        .map(|x| {
            let ax = data.a_times(x);
            grid.lambdas()
                .iter()
                .map(|&l| margin_at(&data, &ax, l, x, delta, m))
                .collect()
        })
        .collect();
    let margins: Vec<Vec<f64>> = (0..grid.lambdas().len())
        .map(|i| by_vector.iter().map(|row| row[i]).collect())
        .collect();

    let mut best = (0, 0, f64::INFINITY);
    for (i, row) in margins.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v < best.2 {
                best = (i, j, v);
            }
        }
    }
    let (i, j, min_margin) = best;
    let lambda = grid.lambdas()[i];
    Ok(HautusReport {
        margins,
        min_margin,
        witness: Witness {
            lambda_index: i,
            vector_index: j,
            lambda: [lambda.re, lambda.im],
            vector: grid.test_vectors()[j].iter().map(|z| [z.re, z.im]).collect(),
        },
        delta,
        admissibility_m: m,
        c_time_varying: data.c_varies,
    })
}

/// Unit eigenvectors of `A(t)` at each of `times`.
pub fn eigenvector_test_vectors(sys: &LtvSystem, times: &[f64]) -> Result<Vec<DVector<C64>>> {
    let n = sys.n();
    let mut out = Vec::new();
    for &t in times {
        let a = sys.a().eval(t)?;
        for mu in a.complex_eigenvalues().iter() {
            let shifted = complexify(&a) - DMatrix::<C64>::identity(n, n) * *mu;
            let svd = SVD::new(shifted, false, true);
            let vt = svd.v_t.expect("right singular vectors requested");
            let k = svd
                .singular_values
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(y.1))
                .unwrap()
                .0;
            let v = vt.row(k).adjoint();
            out.push(v.unscale(v.norm()));
        }
    }
    Ok(out)
}

/// Observability constant of the autonomous system with `A` frozen at
/// `A(s0)`: `sqrt(lambda_min(int_0^tau e^{-A(s0)^T t} C^T C e^{-A(s0) t} dt))`.
pub fn frozen_observability_constant(p: &Propagator, s0: f64) -> Result<f64> {
    let frozen = p.system().frozen_at(s0)?;
    let fp = Propagator::new(&frozen, p.options())?;
    Ok(obs_gramian(&fp).delta())
}

#[derive(Debug, Clone, Serialize)]
pub struct FrozenComparison {
    pub times: Vec<f64>,
    pub frozen_constants: Vec<f64>,
    pub inf_frozen: f64,
    pub delta_ltv: f64,
}

/// Frozen constants `m(s)` at every `stride`-th grid node (the last node is
/// always included) alongside the time-varying constant `delta`.
pub fn frozen_vs_ltv_report(p: &Propagator, stride: usize) -> Result<FrozenComparison> {
    let stride = stride.max(1);
    let nodes = p.grid().nodes();
    let mut idx: Vec<usize> = (0..nodes.len()).step_by(stride).collect();
    if *idx.last().unwrap() != nodes.len() - 1 {
        idx.push(nodes.len() - 1);
    }
    let times: Vec<f64> = idx.iter().map(|&i| nodes[i]).collect();
    let frozen_constants = times
        .par_iter()
        .map(|&s| frozen_observability_constant(p, s))
        .collect::<Result<Vec<_>>>()?;
    let inf_frozen = frozen_constants.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(FrozenComparison {
        times,
        frozen_constants,
        inf_frozen,
        delta_ltv: obs_gramian(p).delta(),
    })
}

/// Given samples `(s, ||f(s) x||)` spanning `[a, b]` whose trapezoid
/// integral is at least `delta * x_norm`, returns the sample time of the
/// largest value. That value is at least `delta x_norm / (b - a)`.
pub fn find_witness_time(samples: &[(f64, f64)], a: f64, b: f64, delta: f64, x_norm: f64) -> Result<f64> {
    if !(b > a) {
        return Err(Error::Precondition(format!("empty interval [{a}, {b}]")));
    }
    if samples.len() < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    if samples[0].0 != a || samples[samples.len() - 1].0 != b {
        return Err(Error::Precondition("samples must start at a and end at b".into()));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Precondition("sample times must be strictly increasing".into()));
    }
    if samples.iter().any(|s| !s.1.is_finite() || s.1 < 0.0) {
        return Err(Error::Precondition("sample values must be finite and nonnegative".into()));
    }
    let integral: f64 = samples
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    if integral < delta * x_norm {
        return Err(Error::Precondition(format!(
            "integral {integral} is below delta * |x| = {}",
            delta * x_norm
        )));
    }
    let best = samples
        .iter()
        .fold(samples[0], |best, &s| if s.1 > best.1 { s } else { best });
    Ok(best.0)
}

/// Integral over each interval of the cubic through four neighbouring
/// samples (one-sided stencils at the ends).
fn cubic_interval_integrals(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len() - 1;
    (0..n)
        .map(|k| {
            let s = if k == 0 {
                9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]
            } else if k == n - 1 {
                f[n - 3] - 5.0 * f[n - 2] + 19.0 * f[n - 1] + 9.0 * f[n]
            } else {
                -f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2]
            };
            s * h / 24.0
        })
        .collect()
}

/// Right side of the averaging identity for `f` sampled uniformly on
/// `[0, sigma]`. The outer integrand `(t f(t) - F(t))/t^2`, `F` the running
/// integral, is bounded with limit `f'(0)/2` at `t = 0`; that limit is used
/// at the first node.
pub fn averaging_identity_rhs(f: &[f64], sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Precondition(format!("sigma must be > 0, got {sigma}")));
    }
    if f.len() < 4 {
        return Err(Error::Precondition("need at least 4 samples".into()));
    }
    let n = f.len() - 1;
    let h = sigma / n as f64;
    let mut running = Vec::with_capacity(n + 1);
    running.push(0.0);
    for piece in cubic_interval_integrals(f, h) {
        running.push(running.last().unwrap() + piece);
    }
    let slope0 = (-11.0 * f[0] + 18.0 * f[1] - 9.0 * f[2] + 2.0 * f[3]) / (6.0 * h);
    let inner: Vec<f64> = (0..=n)
        .map(|k| {
            if k == 0 {
                0.5 * slope0
            } else {
                let t = k as f64 * h;
                (t * f[k] - running[k]) / (t * t)
            }
        })
        .collect();
    let outer: f64 = cubic_interval_integrals(&inner, h).iter().sum();
    Ok(running[n] / sigma - outer)
}

/// `|f(0) - rhs|` for [`averaging_identity_rhs`].
pub fn averaging_identity_residual(f: &[f64], sigma: f64) -> Result<f64> {
    Ok((f[0] - averaging_identity_rhs(f, sigma)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagate::PropagatorOptions;
    use crate::sysmodel::{CoeffRepr, TimeGrid};
    use proptest::prelude::*;

    fn r(x: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, x)
    }

    fn cv(xs: &[f64]) -> DVector<C64> {
        DVector::from_iterator(xs.len(), xs.iter().map(|&x| C64::new(x, 0.0)))
    }

    #[test]
    fn russell_weiss_margin_examples() {
        let s = C64::new(-1.0, 0.0);
        assert_eq!(russell_weiss_margin(&r(-1.0), &r(1.0), s, &cv(&[0.0]), 1.0).unwrap(), 0.0);
        assert_eq!(russell_weiss_margin(&r(-1.0), &r(1.0), s, &cv(&[1.0]), 1.0).unwrap(), 0.0);
        assert_eq!(russell_weiss_margin(&r(-1.0), &r(0.0), s, &cv(&[1.0]), 1.0).unwrap(), -1.0);
        assert!(matches!(
            russell_weiss_margin(&r(-1.0), &r(1.0), C64::new(0.0, 1.0), &cv(&[1.0]), 1.0),
            Err(Error::HalfPlane { .. })
        ));
    }

    #[test]
    fn russell_weiss_min_margin_examples() {
        let s = C64::new(-1.0, 0.0);
        let (v, x) = russell_weiss_min_margin(&r(-1.0), &r(1.0), s, 1.0).unwrap();
        assert!(v.abs() < 1e-14);
        assert!((x[0].norm() - 1.0).abs() < 1e-14);

        let g = -DMatrix::<f64>::identity(2, 2);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let (v, x) = russell_weiss_min_margin(&g, &c, s, 1.0).unwrap();
        assert!((v + 1.0).abs() < 1e-14);
        assert!(x[0].norm() < 1e-12 && (x[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bisection_finds_largest_m() {
        // scalar G = -1, C = 1: m^2 = min_s (|s+1|^2 + |s|)/|s|^2 over the grid.
        let grid = default_spectral_grid(-1.0);
        let m = russell_weiss_max_m(&r(-1.0), &r(1.0), &grid, 4).unwrap();
        let exact = grid
            .iter()
            .map(|s| ((s + 1.0).norm_sqr() + s.re.abs()) / (s.re * s.re))
            .fold(f64::INFINITY, f64::min)
            .sqrt();
        assert!(m <= exact && exact - m <= 1e-4 * exact);
    }

    fn scalar_zero() -> Propagator {
        let sys = LtvSystem::constant(r(0.0), r(1.0), r(1.0), 1.0, 100).unwrap();
        Propagator::with_defaults(&sys).unwrap()
    }

    #[test]
    fn hautus_margin_examples() {
        let p = scalar_zero();
        let l = C64::new(2.0, 0.0);
        assert_eq!(nonautonomous_hautus_margin(&p, l, &cv(&[0.0]), 1.0, 1.0).unwrap(), 0.0);
        let v = nonautonomous_hautus_margin(&p, l, &cv(&[1.0]), 1.0, 1.0).unwrap();
        assert!((v - 0.364665).abs() < 1e-6);
        let exact = 0.5 + (1.0 - (-2.0f64).exp()) - 1.0;
        assert!((v - exact).abs() < 1e-14);

        // Large real lambda: the integral tends to 1, the margin to 0 from above.
        let big = nonautonomous_hautus_margin(&p, C64::new(1e4, 0.0), &cv(&[1.0]), 1.0, 1.0).unwrap();
        assert!(big > 0.0 && big < 1e-2);
        assert!(nonautonomous_hautus_margin(&p, C64::new(0.0, 1.0), &cv(&[1.0]), 1.0, 1.0).is_err());
    }

    #[test]
    fn exponential_moments_continuous_at_switch() {
        let (a1, a2) = exp_moments(0.1 - 1e-12);
        let (b1, b2) = exp_moments(0.1 + 1e-12);
        assert!((a1 - b1).abs() < 1e-12 && (a2 - b2).abs() < 1e-12);
        let (p1, p2) = exp_moments(0.0);
        assert_eq!((p1, p2), (1.0, 0.5));
    }

    #[test]
    fn sweep_on_scalar_integrator() {
        let p = scalar_zero();
        let grid = HautusGrid::random(1, 50, 3);
        let report = hautus_sweep(&p, &grid).unwrap();
        assert!(report.min_margin >= -1e-9);
        assert_eq!(report.margins.len(), 35);
        assert!(!report.c_time_varying);
        let w = &report.witness;
        assert_eq!(report.margins[w.lambda_index][w.vector_index], report.min_margin);
    }

    #[test]
    fn sweep_on_unobserved_system() {
        let sys = LtvSystem::constant(r(0.5), r(1.0), r(0.0), 1.0, 50).unwrap();
        let p = Propagator::with_defaults(&sys).unwrap();
        let report = hautus_sweep(&p, &HautusGrid::random(1, 5, 1)).unwrap();
        assert_eq!(report.delta, 0.0);
        assert!(report.min_margin >= 0.0);
    }

    #[test]
    fn sweep_on_diagonal_system() {
        let sys = LtvSystem::constant(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            1.0,
            200,
        )
        .unwrap();
        let p = Propagator::with_defaults(&sys).unwrap();
        let eig = eigenvector_test_vectors(&sys, &[0.0]).unwrap();
        let grid = HautusGrid::random(2, 50, 11).with_vectors(eig).unwrap();
        assert!(hautus_sweep(&p, &grid).unwrap().min_margin >= -1e-9);
    }

    #[test]
    fn log_spacing() {
        let re = default_real_parts();
        assert_eq!((re[0], re[6]), (0.1, 10.0));
        assert!((re[3] - 1.0).abs() < 1e-15);
        assert_eq!(log_spaced(2.0, 5.0, 1), vec![2.0]);
        assert_eq!(default_spectral_grid(-1.0).len(), 35);
    }

    #[test]
    fn grid_validation() {
        assert!(HautusGrid::new(vec![C64::new(-0.1, 0.0)], vec![]).is_err());
        assert!(HautusGrid::new(vec![C64::new(0.1, 0.0)], vec![cv(&[2.0])]).is_err());
        assert!(HautusGrid::new(vec![C64::new(0.1, 0.0)], vec![cv(&[1.0])]).is_ok());
    }

    #[test]
    fn eigenvectors_are_eigenvectors() {
        let sys = LtvSystem::constant(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            1.0,
            10,
        )
        .unwrap();
        let a = complexify(&sys.a().eval(0.0).unwrap());
        for v in eigenvector_test_vectors(&sys, &[0.0]).unwrap() {
            let av = &a * &v;
            let mu = v.dotc(&av);
            assert!((av - &v * mu).norm() < 1e-10);
        }
    }

    #[test]
    fn frozen_constants() {
        let sys = LtvSystem::constant(r(0.0), r(1.0), r(1.0), 1.0, 100).unwrap();
        let p = Propagator::with_defaults(&sys).unwrap();
        for s in [0.0, 0.5, 1.0] {
            assert!((frozen_observability_constant(&p, s).unwrap() - 1.0).abs() < 1e-12);
        }

        let sys = LtvSystem::new(
            CoeffRepr::Poly(vec![r(0.0), r(1.0)]),
            CoeffRepr::Constant(r(1.0)),
            CoeffRepr::Constant(r(1.0)),
            TimeGrid::uniform(1.0, 1000).unwrap(),
        )
        .unwrap();
        let p = Propagator::with_defaults(&sys).unwrap();
        assert!((frozen_observability_constant(&p, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let m1 = ((1.0 - (-2.0f64).exp()) / 2.0).sqrt();
        assert!((frozen_observability_constant(&p, 1.0).unwrap() - m1).abs() < 1e-5);
    }

    #[test]
    fn frozen_report_shapes() {
        let sys = LtvSystem::constant(
            DMatrix::from_row_slice(2, 2, &[0.1, 1.0, -1.0, 0.2]),
            DMatrix::identity(2, 1).clone_owned(),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            1.0,
            20,
        )
        .unwrap();
        let p = Propagator::new(&sys, PropagatorOptions::default()).unwrap();
        let rep = frozen_vs_ltv_report(&p, 3).unwrap();
        assert_eq!(rep.times.first(), Some(&0.0));
        assert_eq!(rep.times.last(), Some(&1.0));
        assert!(rep.frozen_constants.iter().all(|&m| m == rep.delta_ltv));

        let sys = LtvSystem::constant(r(0.5), r(1.0), r(0.0), 1.0, 20).unwrap();
        let rep = frozen_vs_ltv_report(&Propagator::with_defaults(&sys).unwrap(), 1).unwrap();
        assert_eq!((rep.inf_frozen, rep.delta_ltv), (0.0, 0.0));
    }

    #[test]
    fn witness_examples() {
        let flat: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64 / 10.0, 2.0)).collect();
        assert_eq!(find_witness_time(&flat, 0.0, 1.0, 1.0, 1.0).unwrap(), 0.0);

        let ramp: Vec<(f64, f64)> = (0..=100).map(|i| (i as f64 / 100.0, i as f64 / 100.0)).collect();
        let s = find_witness_time(&ramp, 0.0, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(s, 1.0);

        let h = 0.01;
        let mut spike: Vec<(f64, f64)> = (0..=100).map(|i| (i as f64 * h, 0.0)).collect();
        spike[37].1 = 0.3 / h;
        assert_eq!(find_witness_time(&spike, 0.0, 1.0, 0.3 - 1e-12, 1.0).unwrap(), spike[37].0);
        assert!(find_witness_time(&spike, 0.0, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn averaging_identity_examples() {
        let n = 1000;
        let ones = vec![1.0; n + 1];
        assert!(averaging_identity_residual(&ones, 1.0).unwrap() < 1e-13);
        let line: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        assert!(averaging_identity_residual(&line, 1.0).unwrap() <= 1e-10);
        let cos: Vec<f64> = (0..=n).map(|k| (k as f64 / n as f64).cos()).collect();
        assert!(averaging_identity_residual(&cos, 1.0).unwrap() <= 1e-5);
        assert!(averaging_identity_residual(&cos, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn russell_weiss_form_is_psd_at_m_zero(
            g in proptest::collection::vec(-3.0f64..3.0, 9),
            c in proptest::collection::vec(-3.0f64..3.0, 6),
            re in -10.0f64..-0.01,
            im in -10.0f64..10.0,
        ) {
            let g = DMatrix::from_row_slice(3, 3, &g);
            let c = DMatrix::from_row_slice(2, 3, &c);
            let (v, _) = russell_weiss_min_margin(&g, &c, C64::new(re, im), 0.0).unwrap();
            prop_assert!(v >= -1e-12 * (1.0 + re * re + im * im));
        }

        #[test]
        fn russell_weiss_margin_is_quadratic(
            g in proptest::collection::vec(-3.0f64..3.0, 4),
            x in proptest::collection::vec(-1.0f64..1.0, 4),
            alpha in -10.0f64..10.0,
            m in 0.0f64..3.0,
        ) {
            let g = DMatrix::from_row_slice(2, 2, &g);
            let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.5]);
            let x = DVector::from_vec(vec![C64::new(x[0], x[1]), C64::new(x[2], x[3])]);
            let s = C64::new(-0.7, 2.0);
            let base = russell_weiss_margin(&g, &c, s, &x, m).unwrap();
            let scaled = russell_weiss_margin(&g, &c, s, &(&x * C64::new(alpha, 0.0)), m).unwrap();
            let mag = russell_weiss_margin(&g, &c, s, &x, 0.0).unwrap() + m * m * 0.49 * x.norm_squared();
            prop_assert!((scaled - alpha * alpha * base).abs() <= 1e-10 * alpha * alpha * mag.max(1e-300));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn witness_meets_lower_bound(
            vals in proptest::collection::vec(0.0f64..5.0, 2..60),
            frac in 0.0f64..1.0,
        ) {
            let b = 2.0;
            let h = b / (vals.len() - 1) as f64;
            let samples: Vec<(f64, f64)> = vals.iter().enumerate()
                .map(|(i, &v)| (if i + 1 == vals.len() { b } else { i as f64 * h }, v)).collect();
            let integral: f64 = samples.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
            let delta = frac * integral;
            let s = find_witness_time(&samples, 0.0, b, delta, 1.0).unwrap();
            let max = vals.iter().copied().fold(0.0, f64::max);
            let value = samples.iter().find(|x| x.0 == s).unwrap().1;
            prop_assert_eq!(value, max);
            prop_assert!(value >= delta / b);
        }
    }
}
