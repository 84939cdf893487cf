//! Quantitative side of the cubic spline SFIF: right-hand sides of the
//! distance bounds, the `γ(h)` schedule, and empirical convergence orders.

use crate::error::{Result, SfifError};
use crate::eval::{depth_for_tolerance, eval_at_depth, self_consistency, StartFunction, MAX_DEPTH};
use crate::functions::DataFunction;
use crate::model::{uniform_grid, CodeWord, InterpolationData};
use crate::spline::{
    admissible_limit, build_sifs_spline, with_zero_comparison, BoundConstants, BoundaryCondition,
    SplineModel,
};

/// Slope-floor margin `ε` of the shipped acceptance profile.
pub const EPSILON: f64 = 0.25;
/// Schedule exponent `s` of the shipped acceptance profile.
pub const DEFAULT_S: f64 = 0.8;
/// Default number of grid points for sup-norm estimates.
pub const SUP_GRID: usize = 10_000;
/// Relative round-off level: an order-`j` error below
/// `UNDERFLOW · N^j · max(1, ‖y^{(j)}‖∞)` counts as exact and is left out of order fits.
pub const UNDERFLOW: f64 = 1e-14;
/// Evaluation tolerance used by convergence studies.
pub const STUDY_TOL: f64 = 1e-11;

/// `(N^j, N^j γ_*, N^j β_{k0})`, failing if either product reaches 1.
fn scaled_factors(k: &BoundConstants, n: usize, order: usize) -> Result<(f64, f64, f64)> {
    if order > 2 {
        return Err(SfifError::InvalidParameter(format!(
            "order {order} not in 0..=2"
        )));
    }
    let nj = (n as f64).powi(order as i32);
    let (cg, cb) = (nj * k.gamma_star, nj * k.beta_k0);
    if cg >= 1.0 || cb >= 1.0 {
        return Err(SfifError::Regime(format!(
            "order {order}: N^j gamma_* = {cg} and N^j beta_k0 = {cb} must both be < 1"
        )));
    }
    Ok((nj, cg, cb))
}

/// `N^j β (‖g‖ + A_j/(1 - N^j γ_*) + N^j B_j/(1 - N^j β))`: bound on
/// `‖T_j(σ, g) - T_j(ς, g)‖∞`.
pub fn prop_t_rhs(k: &BoundConstants, n: usize, order: usize, norm_g: f64) -> Result<f64> {
    let (nj, cg, cb) = scaled_factors(k, n, order)?;
    Ok(cb * (norm_g + k.a[order] / (1.0 - cg) + nj * k.b[order] / (1.0 - cb)))
}

/// `N^j β/(1 - N^j γ_*) · (‖g_ς^{(j)}‖ + A_j/(1 - N^j γ_*) + N^j B_j/(1 - N^j β))`:
/// bound on `‖g_σ^{(j)} - g_ς^{(j)}‖∞`.
pub fn sfif_distance_rhs(
    k: &BoundConstants,
    n: usize,
    order: usize,
    norm_g_varsigma: f64,
) -> Result<f64> {
    let (nj, cg, cb) = scaled_factors(k, n, order)?;
    Ok(
        cb / (1.0 - cg)
            * (norm_g_varsigma + k.a[order] / (1.0 - cg) + nj * k.b[order] / (1.0 - cb)),
    )
}

pub fn rhs_prop_t_bound(model: &SplineModel, order: usize, norm_g: f64) -> Result<f64> {
    prop_t_rhs(model.constants(), model.n(), order, norm_g)
}

pub fn rhs_sfif_distance(model: &SplineModel, order: usize, norm_g_varsigma: f64) -> Result<f64> {
    sfif_distance_rhs(model.constants(), model.n(), order, norm_g_varsigma)
}

/// Bound on `‖y^{(j)} - g_σ^{(j)}‖∞` obtained by comparing against the
/// `γ = 0` member of the pool: `classical_err` stands for the classical
/// spline error and `norm_classical` for the sup norm of its `j`-th derivative.
pub fn interpolation_error_bound(
    model: &SplineModel,
    order: usize,
    classical_err: f64,
    norm_classical: f64,
) -> Result<f64> {
    let zero = with_zero_comparison(model)?;
    Ok(classical_err + rhs_sfif_distance(&zero, order, norm_classical)?)
}

/// `max |f|` over the points of a grid.
pub fn grid_sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `γ_k(h) = c_k h^{2+s} / |I|^{2+s}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSchedule {
    s: f64,
    multipliers: Vec<f64>,
}

impl GammaSchedule {
    pub fn new(s: f64, multipliers: Vec<f64>) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(SfifError::InvalidParameter(format!(
                "schedule exponent s = {s} must lie in (0, 1)"
            )));
        }
        if multipliers.is_empty() {
            return Err(SfifError::InvalidParameter(
                "schedule needs at least one multiplier".into(),
            ));
        }
        if let Some(c) = multipliers.iter().find(|&&c| !(c > 0.0 && c <= 1.0)) {
            return Err(SfifError::InvalidParameter(format!(
                "schedule multiplier {c} must lie in (0, 1]"
            )));
        }
        for i in 0..multipliers.len() {
            if multipliers[i + 1..].contains(&multipliers[i]) {
                return Err(SfifError::InvalidParameter(format!(
                    "schedule multiplier {} repeated; multipliers must be distinct",
                    multipliers[i]
                )));
            }
        }
        Ok(Self { s, multipliers })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    /// Scaling factors for `N` intervals of an interval of length `len`.
    pub fn gammas(&self, n: usize, len: f64) -> Vec<f64> {
        let h = len / n as f64;
        let base = (h / len).powf(2.0 + self.s);
        self.multipliers.iter().map(|c| c * base).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleEntry {
    pub n: usize,
    pub h: f64,
    pub gammas: Vec<f64>,
}

/// Evaluates the schedule for every data size, checking `γ_* < 1/N²`.
pub fn make_schedule(
    schedule: &GammaSchedule,
    len: f64,
    sizes: &[usize],
) -> Result<Vec<ScheduleEntry>> {
    sizes
        .iter()
        .map(|&n| {
            if n < 2 {
                return Err(SfifError::InvalidParameter(format!(
                    "data size N = {n} must be >= 2"
                )));
            }
            let gammas = schedule.gammas(n, len);
            let star = gammas.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
            if star >= admissible_limit(n) {
                return Err(SfifError::Regime(format!(
                    "schedule gives gamma_* = {star} >= 1/N^2 for N = {n}"
                )));
            }
            Ok(ScheduleEntry {
                n,
                h: len / n as f64,
                gammas,
            })
        })
        .collect()
}

/// Least-squares line through `(x, y)` pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation of a point from the fitted line.
    pub residual: f64,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<OrderFit> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(SfifError::Fit(
            "all abscissae equal; slope undefined".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs.iter().zip(ys).fold(0.0_f64, |m, (x, y)| {
        m.max((y - (intercept + slope * x)).abs())
    });
    Ok(OrderFit {
        slope,
        intercept,
        residual,
    })
}

/// Slope of `log err` against `log h` over at least four `(h, err)` rows.
pub fn fit_order(rows: &[(f64, f64)]) -> Result<OrderFit> {
    if rows.len() < 4 {
        return Err(SfifError::Fit(format!(
            "need at least 4 rows, got {}",
            rows.len()
        )));
    }
    if let Some(&(h, e)) = rows.iter().find(|(h, e)| !(*h > 0.0 && *e > 0.0)) {
        return Err(SfifError::Fit(format!(
            "non-positive entry (h = {h}, err = {e})"
        )));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    least_squares(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq)]
pub enum GammaPolicy {
    Schedule(GammaSchedule),
    /// A single IFS with `γ = 0`: the classical clamped spline.
    Zero,
}

impl GammaPolicy {
    fn gammas(&self, n: usize, len: f64) -> Vec<f64> {
        match self {
            GammaPolicy::Schedule(s) => s.gammas(n, len),
            GammaPolicy::Zero => vec![0.0],
        }
    }

    fn m(&self) -> usize {
        match self {
            GammaPolicy::Schedule(s) => s.multipliers().len(),
            GammaPolicy::Zero => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SigmaPolicy {
    /// The same word for every size, cycled to the required depth.
    Fixed(CodeWord),
    /// A fresh SplitMix64 word per size, seeded from the base seed and `N`.
    SeededRandom(u64),
}

/// Seed used for the row with `N` intervals under [`SigmaPolicy::SeededRandom`].
pub fn row_seed(seed: u64, n: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub function: DataFunction,
    /// Data live on `[0, interval_length]`.
    pub interval_length: f64,
    pub sizes: Vec<usize>,
    pub gammas: GammaPolicy,
    pub sigma: SigmaPolicy,
    pub grid_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub h: f64,
    /// `sup |y^{(j)} - g_σ^{(j)}|` for `j = 0, 1, 2`.
    pub err: [f64; 3],
    pub sigma_seed: Option<u64>,
    pub sigma: CodeWord,
    pub depth: [usize; 3],
    /// Whether doubling the grid changed every error by at most 1 %.
    pub stable: bool,
    /// Round-off level below which an error counts as exact.
    pub roundoff: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderEstimate {
    Fitted(OrderFit),
    /// Every error is at round-off level.
    Exact,
    /// Fewer than four rows above round-off.
    Insufficient(usize),
}

impl OrderEstimate {
    pub fn slope(&self) -> Option<f64> {
        match self {
            OrderEstimate::Fitted(f) => Some(f.slope),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Sorted by decreasing `h`.
    pub rows: Vec<StudyRow>,
    pub orders: [OrderEstimate; 3],
    pub epsilon: f64,
    /// Schedule exponent, if a schedule was used.
    pub s: Option<f64>,
}

impl ConvergenceReport {
    /// The slope floor `2 - j + ε`.
    pub fn floor(&self, order: usize) -> f64 {
        2.0 - order as f64 + self.epsilon
    }
}

/// Sup errors of `g_σ^{(j)}` against `y^{(j)}` over a grid refinement in `N`.
pub fn convergence_study(cfg: &StudyConfig) -> Result<ConvergenceReport> {
    if cfg.sizes.len() < 4 {
        return Err(SfifError::Fit(format!(
            "a convergence study needs at least 4 data sizes, got {}",
            cfg.sizes.len()
        )));
    }
    if cfg.grid_size < 2 {
        return Err(SfifError::InvalidParameter("grid size must be >= 2".into()));
    }
    if !(cfg.interval_length > 0.0) {
        return Err(SfifError::InvalidParameter(
            "interval length must be > 0".into(),
        ));
    }
    if let SigmaPolicy::Fixed(w) = &cfg.sigma {
        if w.m() != cfg.gammas.m() {
            return Err(SfifError::InvalidParameter(format!(
                "fixed code word is over {} symbols but the pool has M = {}",
                w.m(),
                cfg.gammas.m()
            )));
        }
    }
    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    if let GammaPolicy::Schedule(s) = &cfg.gammas {
        make_schedule(s, cfg.interval_length, &sizes)?;
    }
    let rows = std::thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .map(|&n| scope.spawn(move || study_row(cfg, n)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("study row panicked"))
            .collect::<Result<Vec<_>>>()
    })?;

    let orders = [0, 1, 2].map(|j| {
        let usable: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.err[j] >= r.roundoff[j])
            .map(|r| (r.h, r.err[j]))
            .collect();
        match usable.len() {
            0 => OrderEstimate::Exact,
            k if k < 4 => OrderEstimate::Insufficient(k),
            _ => fit_order(&usable).map_or(
                OrderEstimate::Insufficient(usable.len()),
                OrderEstimate::Fitted,
            ),
        }
    });
    Ok(ConvergenceReport {
        rows,
        orders,
        epsilon: EPSILON,
        s: match &cfg.gammas {
            GammaPolicy::Schedule(s) => Some(s.s()),
            GammaPolicy::Zero => None,
        },
    })
}

fn study_row(cfg: &StudyConfig, n: usize) -> Result<StudyRow> {
    let f = cfg.function;
    let len = cfg.interval_length;
    let data = InterpolationData::from_fn(0.0, len, n, |x| f.value(x))?;
    let boundary = BoundaryCondition::Clamped {
        d0: f.derivative(1, 0.0),
        dn: f.derivative(1, len),
    };
    let gammas = cfg.gammas.gammas(n, len);
    let model = build_sifs_spline(&data, &gammas, boundary)?;
    let (sigma, sigma_seed) = match &cfg.sigma {
        SigmaPolicy::Fixed(w) => (w.cycled(MAX_DEPTH), None),
        SigmaPolicy::SeededRandom(seed) => {
            let s = row_seed(*seed, n);
            (CodeWord::seeded(s, MAX_DEPTH, model.m())?, Some(s))
        }
    };
    let coarse = uniform_grid(0.0, len, cfg.grid_size);
    let fine = uniform_grid(0.0, len, 2 * cfg.grid_size);
    let mut err = [0.0; 3];
    let mut depth = [0; 3];
    let mut roundoff = [0.0; 3];
    let mut stable = true;
    for j in 0..3 {
        let k = depth_for_tolerance(&model, j, STUDY_TOL)?;
        let sup = |grid: &[f64]| -> Result<f64> {
            let g = eval_at_depth(&model, &sigma, j, k, grid)?;
            Ok(grid
                .iter()
                .zip(&g)
                .fold(0.0, |m, (&x, v)| m.max((f.derivative(j, x) - v).abs())))
        };
        let (e1, e2) = (sup(&coarse)?, sup(&fine)?);
        let e = e1.max(e2);
        let scale = fine
            .iter()
            .fold(1.0_f64, |m, &x| m.max(f.derivative(j, x).abs()));
        roundoff[j] = UNDERFLOW * (n as f64).powi(j as i32) * scale;
        if e >= roundoff[j] && (e2 - e1).abs() > 0.01 * e {
            stable = false;
        }
        err[j] = e;
        depth[j] = k;
    }
    Ok(StudyRow {
        n,
        h: len / n as f64,
        err,
        sigma_seed,
        sigma,
        depth,
        stable,
        roundoff,
    })
}

/// One line of a bound-domination check.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub sigma: CodeWord,
    pub order: usize,
    pub empirical: f64,
    pub bound: f64,
    pub margin: f64,
}

/// Grid-estimated `‖g_σ^{(j)} - g_ς^{(j)}‖∞` against [`rhs_sfif_distance`]
/// for `count` seeded random words; `ς` repeats the designated IFS.
pub fn bound_check(
    model: &SplineModel,
    orders: &[usize],
    count: usize,
    seed: u64,
    grid_size: usize,
    tol: f64,
) -> Result<Vec<BoundRow>> {
    let grid = model.data().uniform_grid(grid_size);
    let varsigma = CodeWord::constant(model.k0(), MAX_DEPTH, model.m())?;
    let sigmas = (0..count)
        .map(|i| CodeWord::seeded(seed.wrapping_add(i as u64), MAX_DEPTH, model.m()))
        .collect::<Result<Vec<_>>>()?;
    let mut per_order = Vec::with_capacity(orders.len());
    for &j in orders {
        let k = depth_for_tolerance(model, j, tol)?;
        let reference = eval_at_depth(model, &varsigma, j, k, &grid)?;
        let bound = rhs_sfif_distance(model, j, grid_sup(&reference))?;
        let empirical = sigmas
            .iter()
            .map(|s| {
                let g = eval_at_depth(model, s, j, k, &grid)?;
                Ok(g.iter()
                    .zip(&reference)
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
            })
            .collect::<Result<Vec<f64>>>()?;
        per_order.push((j, bound, empirical));
    }
    let mut rows = Vec::with_capacity(count * orders.len());
    for (i, s) in sigmas.iter().enumerate() {
        for (j, bound, empirical) in &per_order {
            rows.push(BoundRow {
                sigma: s.clone(),
                order: *j,
                empirical: empirical[i],
                bound: *bound,
                margin: bound - empirical[i],
            });
        }
    }
    Ok(rows)
}

/// `‖T_j(σ, g⁰) - T_j(ς, g⁰)‖∞` at matched depth against [`rhs_prop_t_bound`],
/// with `g⁰` the broken-line start function.
pub fn operator_bound_check(
    model: &SplineModel,
    order: usize,
    count: usize,
    seed: u64,
    grid_size: usize,
    depth: usize,
) -> Result<Vec<BoundRow>> {
    let grid = model.data().uniform_grid(grid_size);
    let start = StartFunction::new(model, order);
    let norm_g = grid_sup(&grid.iter().map(|&x| start.eval(x)).collect::<Vec<_>>());
    let bound = rhs_prop_t_bound(model, order, norm_g)?;
    let varsigma = CodeWord::constant(model.k0(), depth, model.m())?;
    let reference = eval_at_depth(model, &varsigma, order, depth, &grid)?;
    (0..count)
        .map(|i| {
            let sigma = CodeWord::seeded(seed.wrapping_add(i as u64), depth, model.m())?;
            let g = eval_at_depth(model, &sigma, order, depth, &grid)?;
            let empirical = g
                .iter()
                .zip(&reference)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            Ok(BoundRow {
                sigma,
                order,
                empirical,
                bound,
                margin: bound - empirical,
            })
        })
        .collect()
}

/// Fits `log defect(K)` against `K` over the given depths, skipping depths
/// whose defect is at round-off. The slope estimates `log(N^j γ_*)`.
pub fn contraction_slope(
    model: &SplineModel,
    sigma: &CodeWord,
    order: usize,
    grid: &[f64],
    depths: &[usize],
) -> Result<(OrderFit, Vec<(usize, f64)>)> {
    let mut samples = Vec::new();
    for &k in depths {
        let d = self_consistency(model, sigma, order, grid, k)?;
        samples.push((k, d));
    }
    let scale = grid_sup(&eval_at_depth(model, sigma, order, 1, grid)?).max(1.0);
    let usable: Vec<&(usize, f64)> = samples.iter().filter(|(_, d)| *d > 1e-13 * scale).collect();
    if usable.len() < 3 {
        return Err(SfifError::Fit(format!(
            "only {} depths above round-off; slope undefined",
            usable.len()
        )));
    }
    let xs: Vec<f64> = usable.iter().map(|(k, _)| *k as f64).collect();
    let ys: Vec<f64> = usable.iter().map(|(_, d)| d.ln()).collect();
    Ok((least_squares(&xs, &ys)?, samples))
}
