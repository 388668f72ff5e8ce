//! System data model: time grids, matrix-valued coefficient functions,
//! sampled signals, and the JSON system document.
//!
//! The system is `x'(t) + A(t) x(t) = B(t) u(t)`, `y(t) = C(t) x(t)` on
//! `[0, tau]` with real coefficients. Every other module consumes an
//! [`LtvSystem`] built here.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

pub const MAX_STATE_DIM: usize = 64;
pub const MAX_POLY_DEGREE: usize = 8;

/// Quadrature rule used for every integral over the time grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    #[default]
    Trapezoid,
    /// Composite Simpson over pairs of intervals (non-uniform spacing
    /// allowed); an odd trailing interval falls back to the trapezoid.
    Simpson,
}

impl Quadrature {
    /// Per-node weights of the rule on `nodes`.
    ///
    /// Fails when a Simpson panel has a spacing ratio that produces a
    /// non-positive weight, since the weights must define a norm.
    pub fn weights(self, nodes: &[f64]) -> Result<Vec<f64>> {
        let n = nodes.len();
        let mut w = vec![0.0; n];
        if n < 2 {
            return Ok(w);
        }
        match self {
            Quadrature::Trapezoid => {
                for i in 0..n - 1 {
                    let h = nodes[i + 1] - nodes[i];
                    w[i] += 0.5 * h;
                    w[i + 1] += 0.5 * h;
                }
            }
            Quadrature::Simpson => {
                let panels = (n - 1) / 2;
                for k in 0..panels {
                    let i = 2 * k;
                    let h0 = nodes[i + 1] - nodes[i];
                    let h1 = nodes[i + 2] - nodes[i + 1];
                    let s = h0 + h1;
                    w[i] += s / 6.0 * (2.0 - h1 / h0);
                    w[i + 1] += s * s * s / (6.0 * h0 * h1);
                    w[i + 2] += s / 6.0 * (2.0 - h0 / h1);
                }
                if (n - 1) % 2 == 1 {
                    let h = nodes[n - 1] - nodes[n - 2];
                    w[n - 2] += 0.5 * h;
                    w[n - 1] += 0.5 * h;
                }
                if let Some(i) = w.iter().position(|&x| x <= 0.0) {
                    return Err(Error::Quadrature(format!(
                        "Simpson weight at node {i} is not positive; grid spacing too uneven"
                    )));
                }
            }
        }
        Ok(w)
    }
}

/// Ordered sample times `0 = t_0 < t_1 < ... < t_N = tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(tau: f64, steps: usize) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::field("tau", format!("horizon must be finite and > 0, got {tau}")));
        }
        if steps < 2 {
            return Err(Error::field("steps", format!("need at least 2 steps, got {steps}")));
        }
        let mut nodes: Vec<f64> = (0..=steps).map(|i| tau * i as f64 / steps as f64).collect();
        nodes[steps] = tau;
        Ok(Self { nodes })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::field("nodes", "need at least 3 nodes (2 steps)"));
        }
        if nodes[0] != 0.0 {
            return Err(Error::field("nodes", "first node must be 0"));
        }
        for (i, w) in nodes.windows(2).enumerate() {
            if !(w[1].is_finite() && w[1] > w[0]) {
                return Err(Error::field(
                    format!("nodes[{}]", i + 1),
                    "nodes must be finite and strictly increasing",
                ));
            }
        }
        Ok(Self { nodes })
    }

    pub fn tau(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Number of intervals `N`.
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn is_uniform(&self) -> bool {
        let h = self.tau() / self.steps() as f64;
        self.nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * self.tau())
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index > self.steps() {
            return Err(Error::IndexOutOfRange {
                index,
                last: self.steps(),
            });
        }
        Ok(())
    }
}

/// How a coefficient matrix depends on time.
#[derive(Debug, Clone, PartialEq)]
pub enum CoeffRepr {
    Constant(DMatrix<f64>),
    /// `sum_k coeffs[k] * t^k`.
    Poly(Vec<DMatrix<f64>>),
    /// Piecewise-linear interpolation of `values[i]` at `times[i]`.
    Samples {
        times: Vec<f64>,
        values: Vec<DMatrix<f64>>,
    },
}

/// A real matrix-valued function of time on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffMatrixFn {
    rows: usize,
    cols: usize,
    horizon: f64,
    repr: CoeffRepr,
}

fn check_finite(m: &DMatrix<f64>, field: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::field(field, "non-finite entry"))
    }
}

impl CoeffMatrixFn {
    /// Validates the representation; `field` names it in error messages.
    pub fn new(repr: CoeffRepr, horizon: f64, field: &str) -> Result<Self> {
        let (rows, cols) = match &repr {
            CoeffRepr::Constant(m) => {
                check_finite(m, field)?;
                m.shape()
            }
            CoeffRepr::Poly(coeffs) => {
                if coeffs.is_empty() {
                    return Err(Error::field(field, "polynomial needs at least one coefficient"));
                }
                if coeffs.len() > MAX_POLY_DEGREE + 1 {
                    return Err(Error::field(
                        field,
                        format!("polynomial degree {} exceeds cap {MAX_POLY_DEGREE}", coeffs.len() - 1),
                    ));
                }
                let shape = coeffs[0].shape();
                for (k, c) in coeffs.iter().enumerate() {
                    if c.shape() != shape {
                        return Err(Error::field(
                            format!("{field}.data[{k}]"),
                            format!("coefficient shape {:?} differs from {:?}", c.shape(), shape),
                        ));
                    }
                    check_finite(c, &format!("{field}.data[{k}]"))?;
                }
                shape
            }
            CoeffRepr::Samples { times, values } => {
                if times.len() != values.len() {
                    return Err(Error::field(
                        field,
                        format!("{} sample times but {} sample values", times.len(), values.len()),
                    ));
                }
                if times.len() < 2 {
                    return Err(Error::field(field, "need at least two samples"));
                }
                if times[0] != 0.0 {
                    return Err(Error::field(format!("{field}.times"), "first sample time must be 0"));
                }
                if times.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
                    return Err(Error::field(
                        format!("{field}.times"),
                        "sample times must be finite and strictly increasing",
                    ));
                }
                let shape = values[0].shape();
                for (k, v) in values.iter().enumerate() {
                    if v.shape() != shape {
                        return Err(Error::field(
                            format!("{field}.data[{k}]"),
                            format!("sample shape {:?} differs from {:?}", v.shape(), shape),
                        ));
                    }
                    check_finite(v, &format!("{field}.data[{k}]"))?;
                }
                shape
            }
        };
        let mut f = Self {
            rows,
            cols,
            horizon: 0.0,
            repr,
        };
        f.set_horizon(horizon, field)?;
        Ok(f)
    }

    pub fn constant(m: DMatrix<f64>, horizon: f64) -> Result<Self> {
        Self::new(CoeffRepr::Constant(m), horizon, "coefficient")
    }

    pub fn poly(coeffs: Vec<DMatrix<f64>>, horizon: f64) -> Result<Self> {
        Self::new(CoeffRepr::Poly(coeffs), horizon, "coefficient")
    }

    fn set_horizon(&mut self, horizon: f64, field: &str) -> Result<()> {
        if let CoeffRepr::Samples { times, .. } = &self.repr {
            let last = *times.last().unwrap();
            if horizon > last {
                return Err(Error::field(
                    format!("{field}.times"),
                    format!("samples end at {last} but the horizon is {horizon}"),
                ));
            }
        }
        self.horizon = horizon;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn repr(&self) -> &CoeffRepr {
        &self.repr
    }

    pub fn is_constant(&self) -> bool {
        match &self.repr {
            CoeffRepr::Constant(_) => true,
            CoeffRepr::Poly(c) => c.len() == 1,
            CoeffRepr::Samples { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
        }
    }

    /// Value at `t`; fails outside `[0, horizon]`.
    pub fn eval(&self, t: f64) -> Result<DMatrix<f64>> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::OutOfDomain {
                t,
                lo: 0.0,
                hi: self.horizon,
            });
        }
        Ok(self.eval_clamped(t))
    }

    /// Value at `t` clamped into the domain. Integrators use this so that
    /// stage times rounded one ulp past `tau` stay valid.
    pub(crate) fn eval_clamped(&self, t: f64) -> DMatrix<f64> {
        let t = t.clamp(0.0, self.horizon);
        match &self.repr {
            CoeffRepr::Constant(m) => m.clone(),
            CoeffRepr::Poly(coeffs) => {
                let mut acc = coeffs.last().unwrap().clone();
                for c in coeffs.iter().rev().skip(1) {
                    acc *= t;
                    acc += c;
                }
                acc
            }
            CoeffRepr::Samples { times, values } => {
                let i = match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
                    Ok(i) => return values[i].clone(),
                    Err(i) => i.clamp(1, times.len() - 1) - 1,
                };
                let theta = (t - times[i]) / (times[i + 1] - times[i]);
                &values[i] + (&values[i + 1] - &values[i]) * theta
            }
        }
    }
}

/// `x' + A(t) x = B(t) u`, `y = C(t) x` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LtvSystem {
    n: usize,
    m: usize,
    p: usize,
    a: CoeffMatrixFn,
    b: CoeffMatrixFn,
    c: CoeffMatrixFn,
    grid: TimeGrid,
}

impl LtvSystem {
    pub fn new(a: CoeffRepr, b: CoeffRepr, c: CoeffRepr, grid: TimeGrid) -> Result<Self> {
        let tau = grid.tau();
        let a = CoeffMatrixFn::new(a, tau, "A")?;
        let b = CoeffMatrixFn::new(b, tau, "B")?;
        let c = CoeffMatrixFn::new(c, tau, "C")?;
        let n = a.rows();
        let m = b.cols();
        let p = c.rows();
        Self::check_dims(n, m, p, &a, &b, &c)?;
        Ok(Self { n, m, p, a, b, c, grid })
    }

    fn check_dims(
        n: usize,
        m: usize,
        p: usize,
        a: &CoeffMatrixFn,
        b: &CoeffMatrixFn,
        c: &CoeffMatrixFn,
    ) -> Result<()> {
        if n == 0 || n > MAX_STATE_DIM {
            return Err(Error::field("n", format!("state dimension must be in 1..={MAX_STATE_DIM}, got {n}")));
        }
        if m == 0 {
            return Err(Error::field("m", "input dimension must be >= 1"));
        }
        if p == 0 {
            return Err(Error::field("p", "output dimension must be >= 1"));
        }
        let expect = |name: &str, f: &CoeffMatrixFn, r: usize, k: usize| {
            if f.shape() != (r, k) {
                Err(Error::field(
                    name,
                    format!("expected {r}x{k} matrix, found {}x{}", f.rows(), f.cols()),
                ))
            } else {
                Ok(())
            }
        };
        expect("A", a, n, n)?;
        expect("B", b, n, m)?;
        expect("C", c, p, n)
    }

    /// Constant-coefficient system on a uniform grid.
    pub fn constant(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        tau: f64,
        steps: usize,
    ) -> Result<Self> {
        Self::new(
            CoeffRepr::Constant(a),
            CoeffRepr::Constant(b),
            CoeffRepr::Constant(c),
            TimeGrid::uniform(tau, steps)?,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn tau(&self) -> f64 {
        self.grid.tau()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn a(&self) -> &CoeffMatrixFn {
        &self.a
    }

    pub fn b(&self) -> &CoeffMatrixFn {
        &self.b
    }

    pub fn c(&self) -> &CoeffMatrixFn {
        &self.c
    }

    /// Same coefficients on a different grid (possibly a different horizon).
    pub fn with_grid(&self, grid: TimeGrid) -> Result<Self> {
        let tau = grid.tau();
        let mut out = self.clone();
        out.a.set_horizon(tau, "A")?;
        out.b.set_horizon(tau, "B")?;
        out.c.set_horizon(tau, "C")?;
        out.grid = grid;
        Ok(out)
    }

    /// The autonomous system with `A` frozen at `A(s0)`; `B`, `C` and the
    /// grid are kept.
    pub fn frozen_at(&self, s0: f64) -> Result<Self> {
        let a0 = self.a.eval(s0)?;
        let mut out = self.clone();
        out.a = CoeffMatrixFn::new(CoeffRepr::Constant(a0), self.tau(), "A")?;
        Ok(out)
    }
}

/// `eval_coeff`: value of a coefficient function at `t` in `[0, tau]`.
pub fn eval_coeff(f: &CoeffMatrixFn, t: f64) -> Result<DMatrix<f64>> {
    f.eval(t)
}

/// A vector-valued signal sampled at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    grid: TimeGrid,
    values: Vec<DVector<f64>>,
}

impl ControlSignal {
    pub fn new(grid: TimeGrid, values: Vec<DVector<f64>>) -> Result<Self> {
        if values.len() != grid.nodes().len() {
            return Err(Error::Dimension(format!(
                "signal has {} samples for {} grid nodes",
                values.len(),
                grid.nodes().len()
            )));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::Dimension("signal samples have differing lengths".into()));
        }
        if values.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::Precondition("signal has non-finite entries".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TimeGrid, dim: usize) -> Self {
        let values = vec![DVector::zeros(dim); grid.nodes().len()];
        Self { grid, values }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: TimeGrid, mut f: impl FnMut(f64) -> DVector<f64>) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * alpha).collect(),
        }
    }

    /// Pointwise `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &ControlSignal) -> Result<Self> {
        if self.grid != other.grid || self.dim() != other.dim() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b * alpha)
                .collect(),
        })
    }

    /// L2 inner product under `rule`.
    pub fn inner(&self, other: &ControlSignal, rule: Quadrature) -> Result<f64> {
        if self.grid != other.grid || self.dim() != other.dim() {
            return Err(Error::GridMismatch);
        }
        let w = rule.weights(self.grid.nodes())?;
        Ok(w.iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(wi, (a, b))| wi * a.dot(b))
            .sum())
    }

    /// L2 norm with the trapezoid rule.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_with(Quadrature::Trapezoid)
            .expect("trapezoid weights are always valid")
    }

    pub fn l2_norm_with(&self, rule: Quadrature) -> Result<f64> {
        let w = rule.weights(self.grid.nodes())?;
        let sq: f64 = w
            .iter()
            .zip(&self.values)
            .map(|(wi, v)| wi * v.norm_squared())
            .sum();
        Ok(sq.max(0.0).sqrt())
    }
}

/// `l2_norm` with the default trapezoid rule.
pub fn l2_norm(s: &ControlSignal) -> f64 {
    s.l2_norm()
}

// ---------------------------------------------------------------------------
// JSON system document

fn matrix_from_value(v: &Value, field: &str) -> Result<DMatrix<f64>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::field(field, "expected an array of rows"))?;
    if rows.is_empty() {
        return Err(Error::field(field, "matrix has no rows"));
    }
    let mut data = Vec::new();
    let mut ncols = None;
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::field(format!("{field}[{i}]"), "expected an array of numbers"))?;
        match ncols {
            None => ncols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::field(format!("{field}[{i}]"), "ragged matrix rows"))
            }
            _ => {}
        }
        for (j, x) in row.iter().enumerate() {
            let x = x
                .as_f64()
                .ok_or_else(|| Error::field(format!("{field}[{i}][{j}]"), "expected a number"))?;
            if !x.is_finite() {
                return Err(Error::field(format!("{field}[{i}][{j}]"), "non-finite entry"));
            }
            data.push(x);
        }
    }
    let ncols = ncols.unwrap();
    if ncols == 0 {
        return Err(Error::field(field, "matrix has no columns"));
    }
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &data))
}

fn matrix_list(v: &Value, field: &str) -> Result<Vec<DMatrix<f64>>> {
    let items = v
        .as_array()
        .ok_or_else(|| Error::field(field, "expected an array of matrices"))?;
    items
        .iter()
        .enumerate()
        .map(|(k, m)| matrix_from_value(m, &format!("{field}[{k}]")))
        .collect()
}

fn f64_list(v: &Value, field: &str) -> Result<Vec<f64>> {
    let items = v
        .as_array()
        .ok_or_else(|| Error::field(field, "expected an array of numbers"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::field(format!("{field}[{i}]"), "expected a finite number"))
        })
        .collect()
}

fn coeff_from_value(v: &Value, name: &str, grid: &TimeGrid) -> Result<CoeffRepr> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::field(name, "expected an object with `kind` and `data`"))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::field(format!("{name}.kind"), "missing or not a string"))?;
    let data = obj
        .get("data")
        .ok_or_else(|| Error::field(format!("{name}.data"), "missing"))?;
    let data_field = format!("{name}.data");
    match kind {
        "constant" => Ok(CoeffRepr::Constant(matrix_from_value(data, &data_field)?)),
        "poly" => Ok(CoeffRepr::Poly(matrix_list(data, &data_field)?)),
        "samples" => {
            let values = matrix_list(data, &data_field)?;
            let times = match obj.get("times") {
                Some(t) => f64_list(t, &format!("{name}.times"))?,
                None => {
                    if values.len() != grid.nodes().len() {
                        return Err(Error::field(
                            data_field,
                            format!(
                                "{} samples given but the grid has {} nodes (supply `times` otherwise)",
                                values.len(),
                                grid.nodes().len()
                            ),
                        ));
                    }
                    grid.nodes().to_vec()
                }
            };
            Ok(CoeffRepr::Samples { times, values })
        }
        other => Err(Error::field(
            format!("{name}.kind"),
            format!("unknown kind `{other}` (expected constant, poly or samples)"),
        )),
    }
}

fn usize_field(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    obj.get(key)
        .ok_or_else(|| Error::field(key, "missing"))?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::field(key, "expected a non-negative integer"))
}

/// Parses and validates a system document.
pub fn parse_system(spec_text: &str) -> Result<LtvSystem> {
    let doc: Value = serde_json::from_str(spec_text).map_err(|e| Error::Malformed(e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::Malformed("top level must be a JSON object".into()))?;

    let n = usize_field(obj, "n")?;
    let m = usize_field(obj, "m")?;
    let p = usize_field(obj, "p")?;
    let tau = obj
        .get("tau")
        .ok_or_else(|| Error::field("tau", "missing"))?
        .as_f64()
        .ok_or_else(|| Error::field("tau", "expected a number"))?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::field("tau", format!("horizon must be finite and > 0, got {tau}")));
    }
    let steps = usize_field(obj, "steps")?;

    let grid = match obj.get("nodes") {
        None | Some(Value::Null) => TimeGrid::uniform(tau, steps)?,
        Some(v) => {
            let nodes = f64_list(v, "nodes")?;
            if nodes.len() != steps + 1 {
                return Err(Error::field(
                    "nodes",
                    format!("expected steps+1 = {} nodes, found {}", steps + 1, nodes.len()),
                ));
            }
            if *nodes.last().unwrap() != tau {
                return Err(Error::field("nodes", "last node must equal tau"));
            }
            TimeGrid::from_nodes(nodes)?
        }
    };

    let mut coeffs = Vec::with_capacity(3);
    for name in ["A", "B", "C"] {
        let v = obj.get(name).ok_or_else(|| Error::field(name, "missing"))?;
        coeffs.push(coeff_from_value(v, name, &grid)?);
    }
    let c = coeffs.pop().unwrap();
    let b = coeffs.pop().unwrap();
    let a = coeffs.pop().unwrap();

    let tau = grid.tau();
    let a = CoeffMatrixFn::new(a, tau, "A")?;
    let b = CoeffMatrixFn::new(b, tau, "B")?;
    let c = CoeffMatrixFn::new(c, tau, "C")?;
    LtvSystem::check_dims(n, m, p, &a, &b, &c)?;
    Ok(LtvSystem { n, m, p, a, b, c, grid })
}

fn matrix_to_value(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|&x| json!(x)).collect()))
            .collect(),
    )
}

fn coeff_to_value(f: &CoeffMatrixFn) -> Value {
    match f.repr() {
        CoeffRepr::Constant(m) => json!({"kind": "constant", "data": matrix_to_value(m)}),
        CoeffRepr::Poly(c) => json!({
            "kind": "poly",
            "data": c.iter().map(matrix_to_value).collect::<Vec<_>>(),
        }),
        CoeffRepr::Samples { times, values } => json!({
            "kind": "samples",
            "times": times,
            "data": values.iter().map(matrix_to_value).collect::<Vec<_>>(),
        }),
    }
}

/// Writes a system document that [`parse_system`] reads back exactly.
pub fn serialize_system(sys: &LtvSystem) -> String {
    let mut doc = json!({
        "n": sys.n,
        "m": sys.m,
        "p": sys.p,
        "tau": sys.tau(),
        "steps": sys.grid.steps(),
        "A": coeff_to_value(&sys.a),
        "B": coeff_to_value(&sys.b),
        "C": coeff_to_value(&sys.c),
    });
    if TimeGrid::uniform(sys.tau(), sys.grid.steps()).ok().as_ref() != Some(&sys.grid) {
        doc["nodes"] = json!(sys.grid.nodes());
    }
    serde_json::to_string_pretty(&doc).expect("system document serializes")
}
