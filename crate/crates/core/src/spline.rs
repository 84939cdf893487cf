//! Cubic spline fractal interpolation functions and their pooling into a
//! super IFS.
//!
//! For a scaling factor `γ` the cubic `q_n` is written in Hermite form on
//! `[x_0, x_N]` with
//!
//! ```text
//! q_n(x_0) = y_{n-1} - γ y_0        q_n'(x_0) = a d_{n-1} - γ d_0
//! q_n(x_N) = y_n     - γ y_N        q_n'(x_N) = a d_n     - γ d_N
//! ```
//!
//! where `a = 1/N` and `d_n` are the knot slopes of the FIF. The unknown
//! slopes and the end moments `M_0`, `M_N` come from the second derivative
//! matching at the interior knots,
//!
//! ```text
//! γ M_N + q_n''(x_N) = γ M_0 + q_{n+1}''(x_0),   n = 1..N-1
//! (a² - γ) M_0 = q_1''(x_0),   (a² - γ) M_N = q_N''(x_N)
//! ```
//!
//! closed by either clamped slopes or natural (zero) end moments. At `γ = 0`
//! this is the classical cubic spline system.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SfifError};
use crate::model::{check_join_up, CubicPoly, InterpolationData, Sifs};

/// Largest accepted condition estimate of the (row-equilibrated) C² system.
pub const MAX_CONDITION: f64 = 1e12;

/// Join-up tolerance (relative to `max(1, ‖y‖∞)`) enforced on built and loaded models.
pub const JOIN_UP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// Prescribed end slopes, shared by every IFS of the pool.
    Clamped { d0: f64, dn: f64 },
    /// Zero end moments `M_0 = M_N = 0`.
    Natural,
}

impl BoundaryCondition {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BoundaryCondition::Clamped { d0, dn } if !(d0.is_finite() && dn.is_finite()) => {
                Err(SfifError::InvalidParameter(format!(
                    "clamped slopes must be finite, got ({d0}, {dn})"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// One cubic spline FIF for a single scaling factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineFif {
    pub gamma: f64,
    /// `q[n]` for `n = 0..N`.
    pub q: Vec<CubicPoly>,
    /// Knot slopes `d_0 .. d_N`.
    pub d: Vec<f64>,
    pub m0: f64,
    pub mn: f64,
}

impl SplineFif {
    /// Second derivative of the FIF at every knot. Interior values are taken
    /// from the interval on the left.
    pub fn knot_moments(&self, data: &InterpolationData) -> Vec<f64> {
        knot_moments(data, self.gamma, &self.q, self.m0, self.mn)
    }
}

fn knot_moments(
    data: &InterpolationData,
    gamma: f64,
    q: &[CubicPoly],
    m0: f64,
    mn: f64,
) -> Vec<f64> {
    let n = data.n();
    let n2 = (n as f64).powi(2);
    let xn = data.x_end();
    let mut out = Vec::with_capacity(n + 1);
    out.push(m0);
    for qn in &q[..n - 1] {
        out.push(n2 * (gamma * mn + qn.eval_derivative(2, xn)));
    }
    out.push(mn);
    out
}

/// Largest admissible `|γ|` for `N` intervals.
pub fn admissible_limit(n: usize) -> f64 {
    1.0 / (n as f64).powi(2)
}

fn check_admissible(n: usize, gamma: f64) -> Result<()> {
    let limit = admissible_limit(n);
    if !gamma.is_finite() || gamma.abs() >= limit {
        return Err(SfifError::Regime(format!(
            "|gamma| = {} must be < 1/N^2 = {limit} for N = {n}",
            gamma.abs()
        )));
    }
    Ok(())
}

fn check_spline_data(data: &InterpolationData) -> Result<()> {
    if data.x0() != 0.0 {
        return Err(SfifError::InvalidData(format!(
            "spline models require x_0 = 0, got x_0 = {}",
            data.x0()
        )));
    }
    Ok(())
}

/// Linear form `Σ coef_i u_i + constant` over the unknowns
/// `u = (d_0, ..., d_N, M_0, M_N)`.
#[derive(Clone)]
struct Form {
    coef: Vec<f64>,
    constant: f64,
}

impl Form {
    fn zero(len: usize) -> Self {
        Self {
            coef: vec![0.0; len],
            constant: 0.0,
        }
    }

    fn axpy(&mut self, s: f64, other: &Form) {
        self.coef
            .iter_mut()
            .zip(&other.coef)
            .for_each(|(a, b)| *a += s * b);
        self.constant += s * other.constant;
    }
}

/// Endpoint values and slopes of `q_n` as linear forms in the unknowns.
struct HermiteForms {
    p0: Form,
    p1: Form,
    s0: Form,
    s1: Form,
}

fn hermite_forms(data: &InterpolationData, gamma: f64, n: usize) -> HermiteForms {
    let big_n = data.n();
    let len = big_n + 3;
    let y = data.ordinates();
    let a = 1.0 / big_n as f64;
    let mut p0 = Form::zero(len);
    p0.constant = y[n] - gamma * y[0];
    let mut p1 = Form::zero(len);
    p1.constant = y[n + 1] - gamma * y[big_n];
    let mut s0 = Form::zero(len);
    s0.coef[n] += a;
    s0.coef[0] -= gamma;
    let mut s1 = Form::zero(len);
    s1.coef[n + 1] += a;
    s1.coef[big_n] -= gamma;
    HermiteForms { p0, p1, s0, s1 }
}

/// `q''(x_0)` and `q''(x_N)` of the Hermite cubic as linear forms.
fn second_derivative_forms(h: &HermiteForms, l: f64) -> (Form, Form) {
    let len = h.p0.coef.len();
    let mut at_start = Form::zero(len);
    at_start.axpy(6.0 / (l * l), &h.p1);
    at_start.axpy(-6.0 / (l * l), &h.p0);
    at_start.axpy(-4.0 / l, &h.s0);
    at_start.axpy(-2.0 / l, &h.s1);
    let mut at_end = Form::zero(len);
    at_end.axpy(-6.0 / (l * l), &h.p1);
    at_end.axpy(6.0 / (l * l), &h.p0);
    at_end.axpy(2.0 / l, &h.s0);
    at_end.axpy(4.0 / l, &h.s1);
    (at_start, at_end)
}

/// Builds the cubic spline FIF for one scaling factor.
pub fn build_spline_fif(
    data: &InterpolationData,
    gamma: f64,
    boundary: BoundaryCondition,
) -> Result<SplineFif> {
    check_spline_data(data)?;
    boundary.validate()?;
    let n = data.n();
    check_admissible(n, gamma)?;

    let len = n + 3;
    let (i_m0, i_mn) = (n + 1, n + 2);
    let l = data.interval_length();
    let a = 1.0 / n as f64;

    let second: Vec<(Form, Form)> = (0..n)
        .map(|i| second_derivative_forms(&hermite_forms(data, gamma, i), l))
        .collect();

    let mut rows: Vec<Form> = Vec::with_capacity(len);
    // C² at interior knots
    for i in 0..n - 1 {
        let mut r = Form::zero(len);
        r.axpy(1.0, &second[i].1);
        r.axpy(-1.0, &second[i + 1].0);
        r.coef[i_mn] += gamma;
        r.coef[i_m0] -= gamma;
        rows.push(r);
    }
    // end moments
    let mut r = Form::zero(len);
    r.coef[i_m0] = a * a - gamma;
    r.axpy(-1.0, &second[0].0);
    rows.push(r);
    let mut r = Form::zero(len);
    r.coef[i_mn] = a * a - gamma;
    r.axpy(-1.0, &second[n - 1].1);
    rows.push(r);
    // boundary closure
    match boundary {
        BoundaryCondition::Clamped { d0, dn } => {
            let mut r = Form::zero(len);
            r.coef[0] = 1.0;
            r.constant = -d0;
            rows.push(r);
            let mut r = Form::zero(len);
            r.coef[n] = 1.0;
            r.constant = -dn;
            rows.push(r);
        }
        BoundaryCondition::Natural => {
            let mut r = Form::zero(len);
            r.coef[i_m0] = 1.0;
            rows.push(r);
            let mut r = Form::zero(len);
            r.coef[i_mn] = 1.0;
            rows.push(r);
        }
    }

    let mut matrix = DMatrix::<f64>::zeros(len, len);
    let mut rhs = DVector::<f64>::zeros(len);
    for (i, row) in rows.iter().enumerate() {
        let scale = row.coef.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        let scale = if scale > 0.0 { 1.0 / scale } else { 1.0 };
        for (j, c) in row.coef.iter().enumerate() {
            matrix[(i, j)] = c * scale;
        }
        rhs[i] = -row.constant * scale;
    }
    let u = solve_checked(matrix, rhs)?;

    let mut d: Vec<f64> = u.iter().take(n + 1).copied().collect();
    let (mut m0, mut mn) = (u[i_m0], u[i_mn]);
    // boundary rows hold exactly; drop the round-off of the solve
    match boundary {
        BoundaryCondition::Clamped { d0, dn } => {
            d[0] = d0;
            d[n] = dn;
        }
        BoundaryCondition::Natural => {
            m0 = 0.0;
            mn = 0.0;
        }
    }
    let y = data.ordinates();
    let q = (0..n)
        .map(|i| {
            CubicPoly::hermite(
                data.x0(),
                l,
                y[i] - gamma * y[0],
                y[i + 1] - gamma * y[n],
                a * d[i] - gamma * d[0],
                a * d[i + 1] - gamma * d[n],
            )
        })
        .collect();
    Ok(SplineFif {
        gamma,
        q,
        d,
        m0,
        mn,
    })
}

/// Dense LU solve with partial pivoting and a 1-norm condition estimate.
fn solve_checked(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    let norm1 = |m: &DMatrix<f64>| {
        m.column_iter()
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let a_norm = norm1(&matrix);
    let lu = matrix.lu();
    let inverse = lu.try_inverse().ok_or(SfifError::Singular(f64::INFINITY))?;
    let cond = a_norm * norm1(&inverse);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(SfifError::Singular(cond));
    }
    let u = lu.solve(&rhs).ok_or(SfifError::Singular(cond))?;
    if u.iter().any(|v| !v.is_finite()) {
        return Err(SfifError::Singular(cond));
    }
    Ok(u)
}

/// Lipschitz-in-`γ` constants `A_j` and bounds `B_j` for a designated `k0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub gamma_star: f64,
    pub beta_k0: f64,
    /// Zero-based designated IFS.
    pub k0: usize,
}

/// A pool of cubic spline FIFs sharing one data set.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineModel {
    sifs: Sifs,
    /// `d_knots[k][i]`
    d_knots: Vec<Vec<f64>>,
    /// `(M_0, M_N)` per IFS.
    moments: Vec<[f64; 2]>,
    /// second derivatives at every knot, per IFS
    knot_moments: Vec<Vec<f64>>,
    boundary: BoundaryCondition,
    constants: BoundConstants,
}

impl SplineModel {
    /// Assembles a model from already solved parts, validating every
    /// structural invariant. Used by [`build_sifs_spline`] and the model file reader.
    pub fn from_parts(
        sifs: Sifs,
        d_knots: Vec<Vec<f64>>,
        moments: Vec<[f64; 2]>,
        boundary: BoundaryCondition,
        k0: Option<usize>,
    ) -> Result<Self> {
        let data = sifs.data();
        let n = data.n();
        check_spline_data(data)?;
        boundary.validate()?;
        for (k, &g) in sifs.gammas().iter().enumerate() {
            check_admissible(n, g).map_err(|e| SfifError::InIfs {
                k: k + 1,
                source: Box::new(e),
            })?;
        }
        if d_knots.len() != sifs.m() || d_knots.iter().any(|d| d.len() != n + 1) {
            return Err(SfifError::InvalidParameter(format!(
                "d_knots must be {} rows of {} slopes",
                sifs.m(),
                n + 1
            )));
        }
        if moments.len() != sifs.m() {
            return Err(SfifError::InvalidParameter(format!(
                "moments must have {} rows",
                sifs.m()
            )));
        }
        if let BoundaryCondition::Clamped { d0, dn } = boundary {
            let tol = 1e-12 * (1.0 + d0.abs().max(dn.abs()));
            if let Some(k) = d_knots
                .iter()
                .position(|d| (d[0] - d0).abs() > tol || (d[n] - dn).abs() > tol)
            {
                return Err(SfifError::InvalidParameter(format!(
                    "IFS {}: end slopes differ from the clamped boundary",
                    k + 1
                )));
            }
        }
        let report = check_join_up(&sifs, JOIN_UP_TOL);
        if let Some(v) = report.offenders().first() {
            return Err(SfifError::InvalidParameter(format!(
                "join-up violated at n = {}, k = {} by {:e}",
                v.n + 1,
                v.k + 1,
                v.max()
            )));
        }
        let knot_moments = (0..sifs.m())
            .map(|k| {
                let q: Vec<CubicPoly> = (0..n).map(|i| *sifs.q(i, k)).collect();
                knot_moments(data, sifs.gammas()[k], &q, moments[k][0], moments[k][1])
            })
            .collect();
        let k0 = k0.unwrap_or_else(|| sifs.argmin_abs_gamma());
        if k0 >= sifs.m() {
            return Err(SfifError::InvalidParameter(format!(
                "designated IFS {} out of range 1..={}",
                k0 + 1,
                sifs.m()
            )));
        }
        let constants = bound_constants_for(&sifs, k0);
        Ok(Self {
            sifs,
            d_knots,
            moments,
            knot_moments,
            boundary,
            constants,
        })
    }

    pub fn sifs(&self) -> &Sifs {
        &self.sifs
    }

    pub fn data(&self) -> &InterpolationData {
        self.sifs.data()
    }

    pub fn d_knots(&self) -> &[Vec<f64>] {
        &self.d_knots
    }

    pub fn moments(&self) -> &[[f64; 2]] {
        &self.moments
    }

    pub fn knot_moments(&self, k: usize) -> &[f64] {
        &self.knot_moments[k]
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.boundary
    }

    pub fn constants(&self) -> &BoundConstants {
        &self.constants
    }

    pub fn k0(&self) -> usize {
        self.constants.k0
    }

    pub fn n(&self) -> usize {
        self.sifs.n()
    }

    pub fn m(&self) -> usize {
        self.sifs.m()
    }

    pub fn derivative_regime(&self) -> bool {
        self.sifs.derivative_regime(self.k0())
    }

    /// Same model with a different designated IFS.
    pub fn with_k0(&self, k0: usize) -> Result<Self> {
        if k0 >= self.m() {
            return Err(SfifError::InvalidParameter(format!(
                "designated IFS {} out of range 1..={}",
                k0 + 1,
                self.m()
            )));
        }
        let mut out = self.clone();
        out.constants = compute_bound_constants(self, k0);
        Ok(out)
    }

    /// Knot values of the `order`-th derivative of IFS `k` alone: ordinates,
    /// slopes or second derivatives.
    pub fn knot_values(&self, order: usize, k: usize) -> Vec<f64> {
        match order {
            0 => self.data().ordinates().to_vec(),
            1 => self.d_knots[k].clone(),
            _ => self.knot_moments[k].clone(),
        }
    }
}

/// Solves every IFS of the pool and assembles the model. The designated
/// IFS defaults to the one with the smallest `|γ_k|`.
pub fn build_sifs_spline(
    data: &InterpolationData,
    gammas: &[f64],
    boundary: BoundaryCondition,
) -> Result<SplineModel> {
    build_sifs_spline_with_k0(data, gammas, boundary, None)
}

pub fn build_sifs_spline_with_k0(
    data: &InterpolationData,
    gammas: &[f64],
    boundary: BoundaryCondition,
    k0: Option<usize>,
) -> Result<SplineModel> {
    if gammas.is_empty() {
        return Err(SfifError::InvalidParameter(
            "need at least one scaling factor".into(),
        ));
    }
    let fifs = gammas
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            build_spline_fif(data, g, boundary).map_err(|e| SfifError::InIfs {
                k: k + 1,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let q = fifs.iter().map(|f| f.q.clone()).collect();
    let sifs = Sifs::new(data.clone(), gammas.to_vec(), q)?;
    let d_knots = fifs.iter().map(|f| f.d.clone()).collect();
    let moments = fifs.iter().map(|f| [f.m0, f.mn]).collect();
    SplineModel::from_parts(sifs, d_knots, moments, boundary, k0)
}

/// Recomputes `A_j`, `B_j`, `γ_*` and `β_{k0}` for the designated `k0`.
pub fn compute_bound_constants(model: &SplineModel, k0: usize) -> BoundConstants {
    bound_constants_for(model.sifs(), k0)
}

fn bound_constants_for(sifs: &Sifs, k0: usize) -> BoundConstants {
    let (lo, hi) = (sifs.data().x0(), sifs.data().x_end());
    let g = sifs.gammas();
    let mut a = [0.0_f64; 3];
    let mut b = [0.0_f64; 3];
    for n in 0..sifs.n() {
        for k in 0..sifs.m() {
            for l in k + 1..sifs.m() {
                let diff = sifs
                    .q(n, k)
                    .sub(sifs.q(n, l))
                    .scale(1.0 / (g[k] - g[l]).abs());
                for (j, aj) in a.iter_mut().enumerate() {
                    *aj = aj.max(diff.nth_derivative(j).max_abs_on(lo, hi));
                }
            }
        }
        let q0 = sifs.q(n, k0);
        for (j, bj) in b.iter_mut().enumerate() {
            *bj = bj.max(q0.nth_derivative(j).max_abs_on(lo, hi));
        }
    }
    BoundConstants {
        a,
        b,
        gamma_star: sifs.gamma_star(),
        beta_k0: sifs.beta(k0),
        k0,
    }
}

/// The pool extended with a `γ = 0` IFS (if absent) designated as `k0`, so
/// that `β_{k0} = γ_*`.
pub fn with_zero_comparison(model: &SplineModel) -> Result<SplineModel> {
    let gammas = model.sifs().gammas();
    if let Some(k) = gammas.iter().position(|&g| g == 0.0) {
        return model.with_k0(k);
    }
    let mut extended = gammas.to_vec();
    extended.push(0.0);
    let k0 = extended.len() - 1;
    build_sifs_spline_with_k0(model.data(), &extended, model.boundary(), Some(k0))
}
