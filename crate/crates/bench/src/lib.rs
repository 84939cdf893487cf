//! Benchmark fixtures shared by the criterion benches.

use std::f64::consts::PI;

use sfif_core::spline::build_sifs_spline;
use sfif_core::{BoundaryCondition, InterpolationData, SplineModel};

/// `sin(πx)` on `[0, 1]` with `N` intervals and a two-IFS pool on the
/// `s = 0.8` schedule.
pub fn sin_pool(n: usize) -> SplineModel {
    let data = InterpolationData::from_fn(0.0, 1.0, n, |x| (PI * x).sin()).unwrap();
    let g = (1.0 / n as f64).powf(2.8);
    build_sifs_spline(
        &data,
        &[g, 0.5 * g],
        BoundaryCondition::Clamped { d0: PI, dn: -PI },
    )
    .unwrap()
}
