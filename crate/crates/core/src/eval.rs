//! Evaluation of `g_σ` and its derivative SFIFs.
//!
//! Two independent routes are provided. [`eval_backward`] expands each query
//! point into base-`N` digits and folds the nested vertical maps of the
//! Read–Bajraktarević operator from the innermost level outwards.
//! [`eval_forward`] iterates the Hutchinson operators on the knot set.
//!
//! Level `p = 0` is the coarsest: the depth-`K` approximant is
//! `W_{σ_1} ∘ W_{σ_2} ∘ ... ∘ W_{σ_K}` applied to the start graph, so the
//! symbol `σ_1` acts on the interval that contains `x`. With this ordering a
//! longer prefix of the same code sequence refines the previous
//! approximant and the limit exists for every `σ`.
//!
//! The start graph of order `j` is the broken line through the knot values
//! of the designated IFS `k0` (ordinates, slopes or second derivatives).

use crate::error::{Result, SfifError};
use crate::model::{address_of, apply_w_order, CodeWord};
use crate::spline::SplineModel;

/// Maximum truncation depth.
pub const MAX_DEPTH: usize = 64;

/// Forward iteration refuses to produce more than this many images per knot.
pub const MAX_FORWARD_IMAGES: f64 = (1u64 << 22) as f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Depth {
    Fixed(usize),
    /// Smallest depth whose geometric tail bound is below the tolerance.
    Tolerance(f64),
}

#[derive(Debug, Clone)]
pub struct EvalRequest<'a> {
    pub model: &'a SplineModel,
    pub sigma: &'a CodeWord,
    /// Derivative order `j` in `0..=2`.
    pub order: usize,
    pub points: &'a [f64],
    pub depth: Depth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Forward,
    Backward,
}

/// Points on the graph of a depth-`level` approximant, sorted by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub points: Vec<(f64, f64)>,
    pub provenance: Provenance,
    pub level: usize,
}

/// `N^j γ_*`, the contraction factor of the order-`j` system.
pub fn contraction_factor(model: &SplineModel, order: usize) -> f64 {
    (model.n() as f64).powi(order as i32) * model.sifs().gamma_star()
}

/// Checks the order is supported and its system contracts.
pub fn check_order(model: &SplineModel, order: usize) -> Result<()> {
    if order > 2 {
        return Err(SfifError::InvalidParameter(format!(
            "derivative order {order} not in 0..=2"
        )));
    }
    if order >= 1 && !model.derivative_regime() {
        return Err(SfifError::Regime(format!(
            "derivative order {order} needs gamma_* < 1/N^2 and beta_k0 < 1/N^2 \
             (gamma_* = {}, beta_k0 = {}, 1/N^2 = {})",
            model.constants().gamma_star,
            model.constants().beta_k0,
            1.0 / (model.n() as f64).powi(2)
        )));
    }
    let c = contraction_factor(model, order);
    if c >= 1.0 {
        return Err(SfifError::Regime(format!(
            "N^{order} gamma_* = {c} >= 1: the order-{order} system does not contract"
        )));
    }
    Ok(())
}

/// Knot values the order-`j` start graph passes through.
pub fn start_set(model: &SplineModel, order: usize) -> Vec<(f64, f64)> {
    model
        .data()
        .knots()
        .iter()
        .copied()
        .zip(model.knot_values(order, model.k0()))
        .collect()
}

/// Broken-line start function through [`start_set`].
#[derive(Debug, Clone)]
pub struct StartFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl StartFunction {
    pub fn new(model: &SplineModel, order: usize) -> Self {
        Self {
            knots: model.data().knots().to_vec(),
            values: model.knot_values(order, model.k0()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.knots.len() - 1;
        let i = self
            .knots
            .partition_point(|&k| k < x)
            .saturating_sub(1)
            .min(n - 1);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `R = ‖g⁰‖∞ + (N^j B_j + A_j) / (1 - N^j γ_*)`, the diameter bound the
/// truncation error is measured against.
pub fn tail_radius(model: &SplineModel, order: usize) -> Result<f64> {
    check_order(model, order)?;
    let c = contraction_factor(model, order);
    let nj = (model.n() as f64).powi(order as i32);
    let k = model.constants();
    let g0 = StartFunction::new(model, order).sup_norm();
    Ok(g0 + (nj * k.b[order] + k.a[order]) / (1.0 - c))
}

/// Smallest `K >= 1` with `(N^j γ_*)^K R <= tol`.
pub fn depth_for_tolerance(model: &SplineModel, order: usize, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(SfifError::InvalidParameter(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    let r = tail_radius(model, order)?;
    let c = contraction_factor(model, order);
    if tol >= r || c == 0.0 {
        return Ok(1);
    }
    let mut k = ((tol / r).ln() / c.ln()).ceil().max(1.0) as usize;
    while k > 1 && c.powi(k as i32 - 1) * r <= tol {
        k -= 1;
    }
    while c.powi(k as i32) * r > tol {
        k += 1;
    }
    if k > MAX_DEPTH {
        return Err(SfifError::Depth(format!(
            "tolerance {tol:e} needs depth {k} > {MAX_DEPTH} (contraction {c})"
        )));
    }
    Ok(k)
}

fn resolve_depth(model: &SplineModel, order: usize, depth: Depth) -> Result<usize> {
    let k = match depth {
        Depth::Fixed(k) => k,
        Depth::Tolerance(tol) => depth_for_tolerance(model, order, tol)?,
    };
    if k == 0 || k > MAX_DEPTH {
        return Err(SfifError::Depth(format!(
            "depth {k} not in 1..={MAX_DEPTH}"
        )));
    }
    Ok(k)
}

fn check_sigma(model: &SplineModel, sigma: &CodeWord, depth: usize) -> Result<()> {
    if sigma.m() != model.m() {
        return Err(SfifError::InvalidParameter(format!(
            "code word is over {} symbols but the pool has M = {}",
            sigma.m(),
            model.m()
        )));
    }
    if sigma.len() < depth {
        return Err(SfifError::Depth(format!(
            "code word has {} symbols but depth {depth} is required",
            sigma.len()
        )));
    }
    Ok(())
}

/// Backward nested evaluation at every requested point. Returns the depth
/// used alongside the values.
pub fn eval_backward(req: &EvalRequest<'_>) -> Result<(usize, Vec<f64>)> {
    let model = req.model;
    check_order(model, req.order)?;
    let depth = resolve_depth(model, req.order, req.depth)?;
    check_sigma(model, req.sigma, depth)?;
    let start = StartFunction::new(model, req.order);
    let values = req
        .points
        .iter()
        .map(|&x| eval_point(model, req.sigma, req.order, depth, &start, x))
        .collect::<Result<Vec<_>>>()?;
    Ok((depth, values))
}

/// Convenience wrapper over [`eval_backward`] for a fixed depth.
pub fn eval_at_depth(
    model: &SplineModel,
    sigma: &CodeWord,
    order: usize,
    depth: usize,
    points: &[f64],
) -> Result<Vec<f64>> {
    eval_backward(&EvalRequest {
        model,
        sigma,
        order,
        points,
        depth: Depth::Fixed(depth),
    })
    .map(|(_, v)| v)
}

fn eval_point(
    model: &SplineModel,
    sigma: &CodeWord,
    order: usize,
    depth: usize,
    start: &StartFunction,
    x: f64,
) -> Result<f64> {
    let sifs = model.sifs();
    let scale = (sifs.n() as f64).powi(order as i32);
    let address = address_of(sifs.data(), x, depth)?;
    let mut v = start.eval(address.residual());
    for p in (0..depth).rev() {
        let g = sifs.vertical(address.digits[p], sigma.get(p));
        v = g.eval_order(order, scale, address.pullbacks[p], v);
    }
    Ok(v)
}

/// Forward set iteration `S_K = W_{σ_1}(W_{σ_2}(... W_{σ_K}(S_0)))`.
pub fn eval_forward(
    model: &SplineModel,
    sigma: &CodeWord,
    levels: usize,
    order: usize,
) -> Result<SampleSet> {
    check_order(model, order)?;
    if levels == 0 || levels > MAX_DEPTH {
        return Err(SfifError::Depth(format!(
            "levels {levels} not in 1..={MAX_DEPTH}"
        )));
    }
    let images = (model.n() as f64).powi(levels as i32);
    if images > MAX_FORWARD_IMAGES {
        return Err(SfifError::Depth(format!(
            "N^K = {images:e} exceeds the forward iteration limit 2^22"
        )));
    }
    check_sigma(model, sigma, levels)?;
    let mut points = start_set(model, order);
    for p in (0..levels).rev() {
        points = apply_w_order(model.sifs(), sigma.get(p), order, &points)?;
    }
    Ok(SampleSet {
        points,
        provenance: Provenance::Forward,
        level: levels,
    })
}

/// `max_x |g^{(depth)}(x) - g^{(depth + 5)}(x)|` over the grid.
pub fn self_consistency(
    model: &SplineModel,
    sigma: &CodeWord,
    order: usize,
    grid: &[f64],
    depth: usize,
) -> Result<f64> {
    let coarse = eval_at_depth(model, sigma, order, depth, grid)?;
    let fine = eval_at_depth(model, sigma, order, depth + 5, grid)?;
    Ok(coarse
        .iter()
        .zip(&fine)
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// `(N^j γ_*)^K R`, the bound [`self_consistency`] must respect.
pub fn self_consistency_bound(model: &SplineModel, order: usize, depth: usize) -> Result<f64> {
    Ok(contraction_factor(model, order).powi(depth as i32) * tail_radius(model, order)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InterpolationData;
    use crate::spline::{build_sifs_spline, BoundaryCondition};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sin_model(n: usize, gammas: &[f64]) -> SplineModel {
        let data = InterpolationData::from_fn(0.0, 1.0, n, |x| (PI * x).sin()).unwrap();
        build_sifs_spline(
            &data,
            gammas,
            BoundaryCondition::Clamped { d0: PI, dn: -PI },
        )
        .unwrap()
    }

    #[test]
    fn knots_are_interpolated() {
        let model = sin_model(4, &[0.01, 0.03, 0.05]);
        let sigma = CodeWord::seeded(3, 64, 3).unwrap();
        let (_, v) = eval_backward(&EvalRequest {
            model: &model,
            sigma: &sigma,
            order: 0,
            points: model.data().knots(),
            depth: Depth::Fixed(4),
        })
        .unwrap();
        for (a, b) in v.iter().zip(model.data().ordinates()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn line_is_the_attractor_for_every_word() {
        let data = InterpolationData::from_fn(0.0, 1.0, 4, |x| 1.5 * x - 0.25).unwrap();
        let model = build_sifs_spline(
            &data,
            &[0.01, 0.04],
            BoundaryCondition::Clamped { d0: 1.5, dn: 1.5 },
        )
        .unwrap();
        let sigma = CodeWord::parse("1221121", 2).unwrap();
        let grid = data.uniform_grid(37);
        let expect = [
            grid.iter().map(|x| 1.5 * x - 0.25).collect::<Vec<_>>(),
            vec![1.5; grid.len()],
            vec![0.0; grid.len()],
        ];
        for order in 0..3 {
            let v = eval_at_depth(&model, &sigma, order, 7, &grid).unwrap();
            for (a, b) in v.iter().zip(&expect[order]) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn forward_level_one_is_one_hutchinson_step() {
        let model = sin_model(3, &[0.02, 0.05]);
        let sigma = CodeWord::parse("2", 2).unwrap();
        let s1 = eval_forward(&model, &sigma, 1, 0).unwrap();
        let sifs = model.sifs();
        for (n, l) in sifs.maps().iter().enumerate() {
            for (x, y) in model.data().points() {
                let p = (l.apply(x), sifs.vertical(n, 1).eval(x, y).unwrap());
                assert!(s1
                    .points
                    .iter()
                    .any(|q| (q.0 - p.0).abs() < 1e-14 && (q.1 - p.1).abs() < 1e-14));
            }
        }
        assert_eq!(s1.points.len(), 3 * 4 - 2);
        assert_eq!(s1.provenance, Provenance::Forward);
    }

    #[test]
    fn forward_guard_and_word_length() {
        let model = sin_model(4, &[0.01, 0.02]);
        let long = CodeWord::constant(0, 64, 2).unwrap();
        assert!(matches!(
            eval_forward(&model, &long, 12, 0),
            Err(SfifError::Depth(_))
        ));
        let short = CodeWord::constant(0, 2, 2).unwrap();
        assert!(matches!(
            eval_forward(&model, &short, 3, 0),
            Err(SfifError::Depth(_))
        ));
    }

    #[test]
    fn depth_rules() {
        let model = sin_model(4, &[0.01, 0.05]);
        let r = tail_radius(&model, 0).unwrap();
        assert_eq!(depth_for_tolerance(&model, 0, r * 2.0).unwrap(), 1);
        let mut last = 0;
        let mut tol = 1e-1;
        while tol > 1e-14 {
            let k = depth_for_tolerance(&model, 1, tol).unwrap();
            assert!(k >= last);
            let halved = depth_for_tolerance(&model, 1, tol / 2.0).unwrap();
            let c = contraction_factor(&model, 1);
            assert!(halved >= k);
            assert!(halved - k <= (2f64.ln() / -c.ln()).ceil() as usize);
            last = k;
            tol /= 3.0;
        }
        let zero = sin_model(4, &[0.0]);
        assert_eq!(depth_for_tolerance(&zero, 2, 1e-15).unwrap(), 1);
    }

    #[test]
    fn order_regime_errors() {
        // β_{k0} = 0.11 > 1/16 with admissible gammas
        let model = sin_model(4, &[-0.06, 0.05]);
        assert!(!model.derivative_regime());
        let sigma = CodeWord::constant(0, 10, 2).unwrap();
        let err = eval_at_depth(&model, &sigma, 1, 3, &[0.5]).unwrap_err();
        assert!(matches!(err, SfifError::Regime(_)));
        assert!(eval_at_depth(&model, &sigma, 0, 3, &[0.5]).is_ok());
        assert!(eval_at_depth(&model, &sigma, 3, 3, &[0.5]).is_err());
    }

    #[test]
    fn zero_gamma_is_exact_after_one_level() {
        let model = sin_model(5, &[0.0]);
        let sigma = CodeWord::constant(0, 10, 1).unwrap();
        let grid = model.data().uniform_grid(101);
        for order in 0..3 {
            assert!(self_consistency(&model, &sigma, order, &grid, 1).unwrap() < 1e-12);
        }
    }
}
