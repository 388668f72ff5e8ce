//! Oracles and random system generators shared by the integration suites.
//! The oracles use nothing from the library beyond its data types.

#![allow(dead_code)]

use ltv_core::propagate::Propagator;
use ltv_core::rng::Lcg64;
use ltv_core::sysmodel::{CoeffRepr, LtvSystem, TimeGrid};
use nalgebra::DMatrix;

/// `e^M` by scaling and squaring with a degree-18 Taylor polynomial.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = m.iter().map(|x| x.abs()).sum::<f64>();
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
    let scaled = m / 2f64.powi(squarings);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=18 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Rank of `[B, AB, ..., A^{n-1} B]`, counting singular values above
/// `rel_tol * sigma_max`.
pub fn kalman_rank(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_tol: f64) -> usize {
    let n = a.nrows();
    let m = b.ncols();
    let mut k = DMatrix::zeros(n, n * m);
    let mut block = b.clone();
    for j in 0..n {
        k.view_mut((0, j * m), (n, m)).copy_from(&block);
        block = a * block;
    }
    let sv = k.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

pub fn random_matrix(rng: &mut Lcg64, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * rng.normal())
}

/// Random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal(rng: &mut Lcg64, n: usize) -> DMatrix<f64> {
    random_matrix(rng, n, n, 1.0).qr().q()
}

pub fn usize_in(rng: &mut Lcg64, lo: usize, hi: usize) -> usize {
    lo + rng.below((hi - lo + 1) as u64) as usize
}

/// Constant system with entries of scale `1/sqrt(n)`.
pub fn random_constant(rng: &mut Lcg64, n: usize, m: usize, p: usize, tau: f64, steps: usize) -> LtvSystem {
    let s = 1.0 / (n as f64).sqrt();
    LtvSystem::constant(
        random_matrix(rng, n, n, s),
        random_matrix(rng, n, m, 1.0),
        random_matrix(rng, p, n, 1.0),
        tau,
        steps,
    )
    .unwrap()
}

/// Polynomial `A(t)` of the given degree; `B` and `C` constant or linear.
pub fn random_poly(rng: &mut Lcg64, n: usize, m: usize, p: usize, degree: usize, steps: usize) -> LtvSystem {
    let s = 1.0 / (n as f64).sqrt();
    let a = (0..=degree)
        .map(|k| random_matrix(rng, n, n, s / (k + 1) as f64))
        .collect();
    let b = vec![random_matrix(rng, n, m, 1.0), random_matrix(rng, n, m, 0.5)];
    let c = vec![random_matrix(rng, p, n, 1.0), random_matrix(rng, p, n, 0.5)];
    LtvSystem::new(
        CoeffRepr::Poly(a),
        CoeffRepr::Poly(b),
        CoeffRepr::Poly(c),
        TimeGrid::uniform(1.0, steps).unwrap(),
    )
    .unwrap()
}

/// Constant pair whose reachable subspace has dimension `n - deficit`:
/// a block-triangular `A`, `B` supported on the leading block, then a
/// random orthogonal change of coordinates.
pub fn rank_deficient(rng: &mut Lcg64, n: usize, m: usize, deficit: usize, tau: f64, steps: usize) -> LtvSystem {
    let r = n - deficit;
    let s = 1.0 / (n as f64).sqrt();
    let mut a = random_matrix(rng, n, n, s);
    a.view_mut((r, 0), (deficit, r)).fill(0.0);
    let mut b = random_matrix(rng, n, m, 1.0);
    b.view_mut((r, 0), (deficit, m)).fill(0.0);
    let q = random_orthogonal(rng, n);
    LtvSystem::constant(
        &q * a * q.transpose(),
        &q * b,
        random_matrix(rng, 1, n, 1.0),
        tau,
        steps,
    )
    .unwrap()
}

/// `A = P + K` with `P` symmetric positive definite (smallest eigenvalue
/// at least `floor`) and `K` skew, so `x' = -A x` is uniformly stable.
pub fn stable_generator(rng: &mut Lcg64, n: usize, floor: f64) -> DMatrix<f64> {
    let g = random_matrix(rng, n, n, 1.0 / (n as f64).sqrt());
    let k = random_matrix(rng, n, n, 1.0 / (n as f64).sqrt());
    &g * g.transpose() + DMatrix::identity(n, n) * floor + (&k - k.transpose()) * 0.5
}

pub fn propagator(sys: &LtvSystem) -> Propagator {
    Propagator::with_defaults(sys).unwrap()
}

pub fn scalar(a: f64, b: f64, c: f64, tau: f64, steps: usize) -> LtvSystem {
    let s = |x: f64| DMatrix::from_element(1, 1, x);
    LtvSystem::constant(s(a), s(b), s(c), tau, steps).unwrap()
}
