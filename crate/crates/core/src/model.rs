//! Data model of a super iterated function system (SIFS): interpolation
//! data, the horizontal affine maps `L_n`, the cubic vertical maps
//! `G_{n,k}`, the pool of IFSs, code words and base-`N` addresses.
//!
//! Indices are zero-based throughout the API (`n` in `0..N`, `k` in `0..M`).
//! Code words print one-based digits, matching the usual `σ = 1 2 1 ...`
//! notation.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;

use crate::error::{Result, SfifError};

/// Relative slack (in units of `|I|`) accepted on abscissae.
pub const X_SLACK: f64 = 1e-12;

/// Knots and ordinates the interpolant must pass through.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationData {
    knots: Vec<f64>,
    ordinates: Vec<f64>,
    h: f64,
    interval_length: f64,
}

impl InterpolationData {
    /// Validates equidistant knots `x_0 < ... < x_N` (`N >= 2`) and finite ordinates.
    pub fn new(knots: Vec<f64>, ordinates: Vec<f64>) -> Result<Self> {
        if knots.len() != ordinates.len() {
            return Err(SfifError::InvalidData(format!(
                "{} knots but {} ordinates",
                knots.len(),
                ordinates.len()
            )));
        }
        if knots.len() < 3 {
            return Err(SfifError::InvalidData(format!(
                "need N >= 2 intervals, got N = {}",
                knots.len().saturating_sub(1)
            )));
        }
        if let Some(bad) = knots.iter().chain(&ordinates).find(|v| !v.is_finite()) {
            return Err(SfifError::InvalidData(format!("non-finite value {bad}")));
        }
        if let Some(w) = knots.windows(2).position(|w| w[1] <= w[0]) {
            return Err(SfifError::InvalidData(format!(
                "knots not strictly increasing at index {}",
                w + 1
            )));
        }
        let n = knots.len() - 1;
        let interval_length = knots[n] - knots[0];
        let h = interval_length / n as f64;
        for (i, w) in knots.windows(2).enumerate() {
            if ((w[1] - w[0]) - h).abs() > X_SLACK * interval_length {
                return Err(SfifError::InvalidData(format!(
                    "knots not equidistant: spacing {} at interval {} differs from h = {h}",
                    w[1] - w[0],
                    i + 1
                )));
            }
        }
        Ok(Self {
            knots,
            ordinates,
            h,
            interval_length,
        })
    }

    /// Samples `f` at `n + 1` equidistant knots on `[x0, x_end]`.
    pub fn from_fn(x0: f64, x_end: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(SfifError::InvalidData(format!(
                "need N >= 2 intervals, got N = {n}"
            )));
        }
        let step = (x_end - x0) / n as f64;
        let knots: Vec<f64> = (0..=n)
            .map(|i| if i == n { x_end } else { x0 + i as f64 * step })
            .collect();
        let ordinates = knots.iter().map(|&x| f(x)).collect();
        Self::new(knots, ordinates)
    }

    /// Number of intervals `N`.
    pub fn n(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `|I| = x_N - x_0`.
    pub fn interval_length(&self) -> f64 {
        self.interval_length
    }

    pub fn x0(&self) -> f64 {
        self.knots[0]
    }

    pub fn x_end(&self) -> f64 {
        self.knots[self.n()]
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.knots
            .iter()
            .copied()
            .zip(self.ordinates.iter().copied())
            .collect()
    }

    /// `‖y‖∞` over the ordinates.
    pub fn max_abs_ordinate(&self) -> f64 {
        self.ordinates.iter().fold(0.0, |m, y| m.max(y.abs()))
    }

    /// Clamps `x` into `[x_0, x_N]`, rejecting points further out than the slack.
    pub fn clamp_to_domain(&self, x: f64) -> Result<f64> {
        let (lo, hi) = (self.x0(), self.x_end());
        let slack = X_SLACK * self.interval_length;
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(SfifError::Domain { x, lo, hi });
        }
        Ok(x.clamp(lo, hi))
    }

    /// Uniform grid of `size` points covering `[x_0, x_N]` including both ends.
    pub fn uniform_grid(&self, size: usize) -> Vec<f64> {
        uniform_grid(self.x0(), self.x_end(), size)
    }
}

/// `size` equally spaced points on `[lo, hi]`, endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, size: usize) -> Vec<f64> {
    match size {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (size - 1) as f64;
            (0..size)
                .map(|i| {
                    if i + 1 == size {
                        hi
                    } else {
                        lo + i as f64 * step
                    }
                })
                .collect()
        }
    }
}

/// Horizontal map `L_n(x) = a x + b` sending `[x_0, x_N]` onto `[x_{n-1}, x_n]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub a: f64,
    pub b: f64,
    /// Zero-based interval index.
    pub index: usize,
}

impl AffineMap {
    pub fn apply(&self, x: f64) -> f64 {
        self.a * x + self.b
    }

    pub fn inverse(&self, x: f64) -> f64 {
        (x - self.b) / self.a
    }
}

/// Builds the `N` contractive maps `L_n` from the knots.
pub fn build_maps(data: &InterpolationData) -> Vec<AffineMap> {
    let x = data.knots();
    let (x0, xn) = (data.x0(), data.x_end());
    let len = xn - x0;
    (1..=data.n())
        .map(|n| AffineMap {
            a: (x[n] - x[n - 1]) / len,
            b: (xn * x[n - 1] - x0 * x[n]) / len,
            index: n - 1,
        })
        .collect()
}

/// Cubic `c_0 + c_1 x + c_2 x^2 + c_3 x^3` in the global abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CubicPoly {
    pub coeffs: [f64; 4],
}

impl CubicPoly {
    pub fn new(coeffs: [f64; 4]) -> Self {
        Self { coeffs }
    }

    /// Cubic on `[lo, lo + len]` with end values `p0, p1` and end slopes `s0, s1`.
    pub fn hermite(lo: f64, len: f64, p0: f64, p1: f64, s0: f64, s1: f64) -> Self {
        let c2 = (3.0 * (p1 - p0) / len - 2.0 * s0 - s1) / len;
        let c3 = (2.0 * (p0 - p1) / len + s0 + s1) / (len * len);
        // expand about `lo` into the global monomial basis
        let (t, t2, t3) = (lo, lo * lo, lo * lo * lo);
        Self::new([
            p0 - s0 * t + c2 * t2 - c3 * t3,
            s0 - 2.0 * c2 * t + 3.0 * c3 * t2,
            c2 - 3.0 * c3 * t,
            c3,
        ])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let [c0, c1, c2, c3] = self.coeffs;
        ((c3 * x + c2) * x + c1) * x + c0
    }

    pub fn derivative(&self) -> Self {
        let [_, c1, c2, c3] = self.coeffs;
        Self::new([c1, 2.0 * c2, 3.0 * c3, 0.0])
    }

    pub fn nth_derivative(&self, order: usize) -> Self {
        (0..order).fold(*self, |p, _| p.derivative())
    }

    pub fn eval_derivative(&self, order: usize, x: f64) -> f64 {
        match order {
            0 => self.eval(x),
            _ => self.nth_derivative(order).eval(x),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut c = self.coeffs;
        c.iter_mut().zip(other.coeffs).for_each(|(a, b)| *a -= b);
        Self::new(c)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.map(|c| c * s))
    }

    /// Exact `max |p(x)|` over `[lo, hi]` from the endpoints and the real
    /// roots of `p'` inside the interval.
    pub fn max_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let mut best = self.eval(lo).abs().max(self.eval(hi).abs());
        for r in self.critical_points() {
            if r > lo && r < hi {
                best = best.max(self.eval(r).abs());
            }
        }
        best
    }

    /// Real roots of `p'(x) = c_1 + 2 c_2 x + 3 c_3 x^2`.
    fn critical_points(&self) -> Vec<f64> {
        let [_, c1, c2, c3] = self.coeffs;
        let (a, b, c) = (3.0 * c3, 2.0 * c2, c1);
        if a == 0.0 {
            return if b != 0.0 { vec![-c / b] } else { Vec::new() };
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return Vec::new();
        }
        let q = -0.5 * (b + b.signum_or_one() * disc.sqrt());
        if q == 0.0 {
            return vec![0.0];
        }
        vec![q / a, c / q]
    }
}

trait SignumOrOne {
    fn signum_or_one(self) -> f64;
}

impl SignumOrOne for f64 {
    fn signum_or_one(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Vertical map `G_{n,k}(x, y) = γ y + q(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalMap {
    pub gamma: f64,
    pub q: CubicPoly,
    pub n: usize,
    pub k: usize,
    domain: (f64, f64),
}

impl VerticalMap {
    pub fn new(gamma: f64, q: CubicPoly, n: usize, k: usize, domain: (f64, f64)) -> Self {
        Self {
            gamma,
            q,
            n,
            k,
            domain,
        }
    }

    /// `γ y + q(x)`, rejecting `x` outside `[x_0, x_N]` beyond the slack.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let (lo, hi) = self.domain;
        let slack = X_SLACK * (hi - lo);
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(SfifError::Domain { x, lo, hi });
        }
        Ok(self.gamma * y + self.q.eval(x))
    }

    /// Vertical map of the `order`-th derivative system:
    /// `N^j γ y + N^j q^{(j)}(x)`. No domain check.
    pub fn eval_order(&self, order: usize, scale: f64, x: f64, y: f64) -> f64 {
        scale * (self.gamma * y + self.q.eval_derivative(order, x))
    }
}

/// The pool of `M` IFSs sharing one set of interpolation data.
#[derive(Debug, Clone, PartialEq)]
pub struct Sifs {
    data: InterpolationData,
    gammas: Vec<f64>,
    maps: Vec<AffineMap>,
    /// `vertical[k][n]`
    vertical: Vec<Vec<VerticalMap>>,
    gamma_star: f64,
}

impl Sifs {
    /// Assembles the pool from one scaling factor per IFS and the cubic
    /// `q_coeffs[k][n]`. Join-up is not enforced here; see [`check_join_up`].
    pub fn new(data: InterpolationData, gammas: Vec<f64>, q: Vec<Vec<CubicPoly>>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(SfifError::InvalidParameter(
                "the pool needs M >= 1 IFS".into(),
            ));
        }
        for (k, g) in gammas.iter().enumerate() {
            if !g.is_finite() || g.abs() >= 1.0 {
                return Err(SfifError::Regime(format!(
                    "|gamma_{}| = {} must be < 1",
                    k + 1,
                    g.abs()
                )));
            }
        }
        for k in 0..gammas.len() {
            for l in k + 1..gammas.len() {
                if gammas[k] == gammas[l] {
                    return Err(SfifError::InvalidParameter(format!(
                        "gamma_{} = gamma_{} = {}; scaling factors must be pairwise distinct",
                        k + 1,
                        l + 1,
                        gammas[k]
                    )));
                }
            }
        }
        let n = data.n();
        if q.len() != gammas.len() || q.iter().any(|row| row.len() != n) {
            return Err(SfifError::InvalidParameter(format!(
                "expected {}x{} cubic polynomials",
                gammas.len(),
                n
            )));
        }
        let domain = (data.x0(), data.x_end());
        let vertical = q
            .into_iter()
            .enumerate()
            .map(|(k, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(i, p)| VerticalMap::new(gammas[k], p, i, k, domain))
                    .collect()
            })
            .collect();
        let gamma_star = gammas.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        Ok(Self {
            maps: build_maps(&data),
            data,
            gammas,
            vertical,
            gamma_star,
        })
    }

    /// Like [`Sifs::new`] but accepts a per-`(k, n)` scaling table, which must
    /// not vary with `n`.
    pub fn from_gamma_table(
        data: InterpolationData,
        table: Vec<Vec<f64>>,
        q: Vec<Vec<CubicPoly>>,
    ) -> Result<Self> {
        let mut gammas = Vec::with_capacity(table.len());
        for (k, row) in table.iter().enumerate() {
            let first = *row.first().ok_or_else(|| {
                SfifError::InvalidParameter(format!("empty scaling row for IFS {}", k + 1))
            })?;
            if row.iter().any(|&g| g != first) {
                return Err(SfifError::InvalidParameter(format!(
                    "IFS {}: scaling factors varying with n are not supported",
                    k + 1
                )));
            }
            gammas.push(first);
        }
        Self::new(data, gammas, q)
    }

    pub fn data(&self) -> &InterpolationData {
        &self.data
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    /// Number of IFSs `M`.
    pub fn m(&self) -> usize {
        self.gammas.len()
    }

    /// Number of intervals `N`.
    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn vertical(&self, n: usize, k: usize) -> &VerticalMap {
        &self.vertical[k][n]
    }

    pub fn q(&self, n: usize, k: usize) -> &CubicPoly {
        &self.vertical[k][n].q
    }

    /// `γ_* = max_k |γ_k|`.
    pub fn gamma_star(&self) -> f64 {
        self.gamma_star
    }

    /// `β_{k0} = max_l |γ_l - γ_{k0}|`.
    pub fn beta(&self, k0: usize) -> f64 {
        let g0 = self.gammas[k0];
        self.gammas.iter().fold(0.0, |m, g| m.max((g - g0).abs()))
    }

    /// Whether the first and second derivative systems contract for the
    /// designated `k0`: `γ_* < 1/N²` and `β_{k0} < 1/N²`.
    pub fn derivative_regime(&self, k0: usize) -> bool {
        let limit = 1.0 / (self.n() as f64).powi(2);
        self.gamma_star < limit && self.beta(k0) < limit
    }

    /// Index of the IFS with the smallest `|γ_k|` (first on ties).
    pub fn argmin_abs_gamma(&self) -> usize {
        let mut best = 0;
        for (k, g) in self.gammas.iter().enumerate() {
            if g.abs() < self.gammas[best].abs() {
                best = k;
            }
        }
        best
    }

    pub fn argmax_abs_gamma(&self) -> usize {
        let mut best = 0;
        for (k, g) in self.gammas.iter().enumerate() {
            if g.abs() > self.gammas[best].abs() {
                best = k;
            }
        }
        best
    }
}

/// Join-up defect of one vertical map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinUpViolation {
    pub n: usize,
    pub k: usize,
    /// `|G_{n,k}(x_0, y_0) - y_{n-1}|`
    pub left: f64,
    /// `|G_{n,k}(x_N, y_N) - y_n|`
    pub right: f64,
}

impl JoinUpViolation {
    pub fn max(&self) -> f64 {
        self.left.max(self.right)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinUpReport {
    pub entries: Vec<JoinUpViolation>,
    /// `max(1, ‖y‖∞)`; tolerances are applied relative to this.
    pub scale: f64,
    pub tol: f64,
}

impl JoinUpReport {
    pub fn max_violation(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.max()))
    }

    /// Entries whose violation exceeds `tol · max(1, ‖y‖∞)`.
    pub fn offenders(&self) -> Vec<JoinUpViolation> {
        self.entries
            .iter()
            .filter(|e| e.max() > self.tol * self.scale)
            .copied()
            .collect()
    }

    pub fn passes(&self) -> bool {
        self.offenders().is_empty()
    }
}

/// Evaluates the join-up conditions for every `(n, k)`.
pub fn check_join_up(sifs: &Sifs, tol: f64) -> JoinUpReport {
    let data = sifs.data();
    let y = data.ordinates();
    let (x0, xn) = (data.x0(), data.x_end());
    let (y0, yn) = (y[0], y[data.n()]);
    let mut entries = Vec::with_capacity(sifs.m() * sifs.n());
    for k in 0..sifs.m() {
        for n in 0..sifs.n() {
            let g = sifs.vertical(n, k);
            let left = (g.gamma * y0 + g.q.eval(x0) - y[n]).abs();
            let right = (g.gamma * yn + g.q.eval(xn) - y[n + 1]).abs();
            entries.push(JoinUpViolation { n, k, left, right });
        }
    }
    JoinUpReport {
        entries,
        scale: data.max_abs_ordinate().max(1.0),
        tol,
    }
}

/// One application of the Hutchinson operator `W_k` to a point set.
pub fn apply_w(sifs: &Sifs, k: usize, points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    apply_w_order(sifs, k, 0, points)
}

/// Hutchinson operator of the `order`-th derivative system
/// (`order = 0` is the SIFS itself).
pub fn apply_w_order(
    sifs: &Sifs,
    k: usize,
    order: usize,
    points: &[(f64, f64)],
) -> Result<Vec<(f64, f64)>> {
    if k >= sifs.m() {
        return Err(SfifError::InvalidParameter(format!(
            "IFS index {} out of range 1..={}",
            k + 1,
            sifs.m()
        )));
    }
    let data = sifs.data();
    let scale = (sifs.n() as f64).powi(order as i32);
    let clamped = points
        .iter()
        .map(|&(x, y)| data.clamp_to_domain(x).map(|x| (x, y)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(clamped.len() * sifs.n());
    for (n, map) in sifs.maps().iter().enumerate() {
        let g = sifs.vertical(n, k);
        for &(x, y) in &clamped {
            out.push((map.apply(x), g.eval_order(order, scale, x, y)));
        }
    }
    Ok(coalesce(out, X_SLACK * data.interval_length()))
}

/// Sorts by `x` and merges points that agree in both coordinates within `slack`.
pub fn coalesce(mut points: Vec<(f64, f64)>, slack: f64) -> Vec<(f64, f64)> {
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for p in points {
        let duplicate = out
            .iter()
            .rev()
            .take_while(|q| p.0 - q.0 <= slack)
            .any(|q| (p.1 - q.1).abs() <= slack * q.1.abs().max(1.0));
        if !duplicate {
            out.push(p);
        }
    }
    out
}

/// Finite prefix `σ_1 ... σ_K` of a code sequence over `M` symbols.
/// Symbols are stored zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodeWord {
    symbols: Vec<usize>,
    m: usize,
}

impl CodeWord {
    pub fn new(symbols: Vec<usize>, m: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(SfifError::InvalidParameter(
                "code word must be non-empty".into(),
            ));
        }
        if let Some(s) = symbols.iter().find(|&&s| s >= m) {
            return Err(SfifError::InvalidParameter(format!(
                "symbol {} out of range 1..={m}",
                s + 1
            )));
        }
        Ok(Self { symbols, m })
    }

    /// Parses one-based digits such as `"121221"`. Separators `-`, `,`, `.`
    /// and spaces are accepted and required when `M > 9`.
    pub fn parse(text: &str, m: usize) -> Result<Self> {
        let text = text.trim();
        let parts: Vec<&str> = if text.contains(['-', ',', '.', ' ']) {
            text.split(['-', ',', '.', ' '])
                .filter(|s| !s.is_empty())
                .collect()
        } else {
            text.split("").filter(|s| !s.is_empty()).collect()
        };
        let symbols = parts
            .iter()
            .map(|p| match p.parse::<usize>() {
                Ok(d) if d >= 1 => Ok(d - 1),
                _ => Err(SfifError::InvalidParameter(format!(
                    "invalid code symbol '{p}' (expected 1..={m})"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols, m)
    }

    pub fn constant(k: usize, len: usize, m: usize) -> Result<Self> {
        Self::new(vec![k; len], m)
    }

    /// Uniformly random word drawn from a SplitMix64 stream seeded with `seed`.
    pub fn seeded(seed: u64, len: usize, m: usize) -> Result<Self> {
        let mut rng = SplitMix64::seed_from_u64(seed);
        Self::random(&mut rng, len, m)
    }

    pub fn random<R: Rng>(rng: &mut R, len: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(SfifError::InvalidParameter("M must be >= 1".into()));
        }
        Self::new((0..len).map(|_| rng.gen_range(0..m)).collect(), m)
    }

    /// Repeats the word periodically until it has `len` symbols.
    pub fn cycled(&self, len: usize) -> Self {
        Self {
            symbols: self
                .symbols
                .iter()
                .copied()
                .cycle()
                .take(len.max(1))
                .collect(),
            m: self.m,
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Zero-based symbol used at level `p` (`p = 0` is the coarsest level).
    pub fn get(&self, p: usize) -> usize {
        self.symbols[p]
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    /// Whether more than one IFS appears in the word.
    pub fn is_mixed(&self) -> bool {
        self.symbols.iter().any(|&s| s != self.symbols[0])
    }
}

impl fmt::Display for CodeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.m > 9 { "-" } else { "" };
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            write!(f, "{}", s + 1)?;
        }
        Ok(())
    }
}

/// Base-`N` address of a point: interval digits from the coarsest level
/// down, together with the successive pull-backs through the `L_n^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Address {
    /// `digits[0]` is the interval containing `x`; `digits[p]` the interval
    /// containing the `p`-fold pull-back.
    pub digits: Vec<usize>,
    /// `pullbacks[p] = L_{digits[p]}^{-1}(... L_{digits[0]}^{-1}(x))`.
    pub pullbacks: Vec<f64>,
}

impl Address {
    /// The fully pulled-back point `ξ`.
    pub fn residual(&self) -> f64 {
        *self.pullbacks.last().expect("depth >= 1")
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    /// `L_{digits[0]} ∘ ... ∘ L_{digits[K-1]}(ξ)`.
    pub fn reconstruct(&self, maps: &[AffineMap]) -> f64 {
        self.digits
            .iter()
            .rev()
            .fold(self.residual(), |x, &d| maps[d].apply(x))
    }
}

/// Interval index containing `x`; interior knots belong to the interval on their left.
fn interval_of(knots: &[f64], x: f64) -> usize {
    let n = knots.len() - 1;
    knots
        .partition_point(|&k| k < x)
        .saturating_sub(1)
        .min(n - 1)
}

/// Expands `x` into `depth` base-`N` digits plus a residual in `[x_0, x_N]`.
pub fn address_of(data: &InterpolationData, x: f64, depth: usize) -> Result<Address> {
    if depth == 0 {
        return Err(SfifError::Depth("address depth must be >= 1".into()));
    }
    let mut x = data.clamp_to_domain(x)?;
    let knots = data.knots();
    let (x0, xn) = (data.x0(), data.x_end());
    let len = data.interval_length();
    let mut digits = Vec::with_capacity(depth);
    let mut pullbacks = Vec::with_capacity(depth);
    for _ in 0..depth {
        let i = interval_of(knots, x);
        let width = knots[i + 1] - knots[i];
        x = (x0 + (x - knots[i]) * (len / width)).clamp(x0, xn);
        digits.push(i);
        pullbacks.push(x);
    }
    Ok(Address { digits, pullbacks })
}
