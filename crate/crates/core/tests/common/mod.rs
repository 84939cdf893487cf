#![allow(dead_code)]

use std::f64::consts::PI;

use sfif_core::{BoundaryCondition, InterpolationData, SplineModel};

/// Textbook cubic spline on equidistant knots, written in second-derivative
/// (moment) form and solved with the Thomas algorithm.
pub struct ClassicalSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
    h: f64,
}

impl ClassicalSpline {
    pub fn clamped(x: &[f64], y: &[f64], d0: f64, dn: f64) -> Self {
        let n = x.len() - 1;
        let h = x[1] - x[0];
        let mut sub = vec![1.0; n + 1];
        let mut diag = vec![4.0; n + 1];
        let mut sup = vec![1.0; n + 1];
        let mut rhs = vec![0.0; n + 1];
        diag[0] = 2.0;
        sup[0] = 1.0;
        rhs[0] = 6.0 / h * ((y[1] - y[0]) / h - d0);
        for i in 1..n {
            rhs[i] = 6.0 / (h * h) * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
        }
        sub[n] = 1.0;
        diag[n] = 2.0;
        rhs[n] = 6.0 / h * (dn - (y[n] - y[n - 1]) / h);
        let m = thomas(&sub, &diag, &sup, &rhs);
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
            h,
        }
    }

    pub fn natural(x: &[f64], y: &[f64]) -> Self {
        let n = x.len() - 1;
        let h = x[1] - x[0];
        let mut m = vec![0.0; n + 1];
        if n > 1 {
            let k = n - 1;
            let rhs: Vec<f64> = (1..n)
                .map(|i| 6.0 / (h * h) * (y[i + 1] - 2.0 * y[i] + y[i - 1]))
                .collect();
            let inner = thomas(&vec![1.0; k], &vec![4.0; k], &vec![1.0; k], &rhs);
            m[1..n].copy_from_slice(&inner);
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
            h,
        }
    }

    /// `S^{(order)}(x)` for `order <= 2`.
    pub fn eval(&self, order: usize, x: f64) -> f64 {
        let n = self.x.len() - 1;
        let i = (((x - self.x[0]) / self.h).floor().max(0.0) as usize).min(n - 1);
        let (a, b) = (self.x[i + 1] - x, x - self.x[i]);
        let h = self.h;
        let (mi, mj) = (self.m[i], self.m[i + 1]);
        let ci = self.y[i] / h - mi * h / 6.0;
        let cj = self.y[i + 1] / h - mj * h / 6.0;
        match order {
            0 => mi * a.powi(3) / (6.0 * h) + mj * b.powi(3) / (6.0 * h) + ci * a + cj * b,
            1 => -mi * a * a / (2.0 * h) + mj * b * b / (2.0 * h) - ci + cj,
            _ => mi * a / h + mj * b / h,
        }
    }
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let w = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / w;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / w;
    }
    let mut out = vec![0.0; n];
    out[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = d[i] - c[i] * out[i + 1];
    }
    out
}

pub fn sin_data(n: usize) -> InterpolationData {
    InterpolationData::from_fn(0.0, 1.0, n, |x| (PI * x).sin()).unwrap()
}

pub fn sin_clamped() -> BoundaryCondition {
    BoundaryCondition::Clamped { d0: PI, dn: -PI }
}

/// `sin(πx)` on `[0, 1]`, `N = 4`, three IFSs.
pub fn demo_model() -> SplineModel {
    sfif_core::spline::build_sifs_spline(&sin_data(4), &[0.01, 0.02, 0.03], sin_clamped()).unwrap()
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
