//! Closed-form data-generating functions with derivatives up to order 4.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::SfifError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFunction {
    /// `sin(πx)`
    SinPi,
    /// `e^x`
    Exp,
    /// `1 / (1 + 25 x²)`
    Runge,
    /// `x³ - 2x² + x/2 + 1`
    Poly3,
}

impl DataFunction {
    pub const ALL: [DataFunction; 4] = [
        DataFunction::SinPi,
        DataFunction::Exp,
        DataFunction::Runge,
        DataFunction::Poly3,
    ];

    /// `y^{(order)}(x)` for `order <= 4`.
    pub fn derivative(&self, order: usize, x: f64) -> f64 {
        match self {
            DataFunction::SinPi => {
                let p = PI.powi(order as i32);
                match order % 4 {
                    0 => p * (PI * x).sin(),
                    1 => p * (PI * x).cos(),
                    2 => -p * (PI * x).sin(),
                    _ => -p * (PI * x).cos(),
                }
            }
            DataFunction::Exp => x.exp(),
            DataFunction::Runge => {
                let u = 1.0 + 25.0 * x * x;
                match order {
                    0 => 1.0 / u,
                    1 => -50.0 * x / u.powi(2),
                    2 => (3750.0 * x * x - 50.0) / u.powi(3),
                    3 => (15_000.0 * x - 375_000.0 * x.powi(3)) / u.powi(4),
                    _ => (15_000.0 - 3_750_000.0 * x * x + 46_875_000.0 * x.powi(4)) / u.powi(5),
                }
            }
            DataFunction::Poly3 => match order {
                0 => ((x - 2.0) * x + 0.5) * x + 1.0,
                1 => (3.0 * x - 4.0) * x + 0.5,
                2 => 6.0 * x - 4.0,
                3 => 6.0,
                _ => 0.0,
            },
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    pub fn name(&self) -> &'static str {
        match self {
            DataFunction::SinPi => "sin_pi",
            DataFunction::Exp => "exp",
            DataFunction::Runge => "runge",
            DataFunction::Poly3 => "poly3",
        }
    }
}

impl fmt::Display for DataFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DataFunction {
    type Err = SfifError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                SfifError::InvalidParameter(format!(
                    "unknown function '{s}' (expected sin_pi, exp, runge or poly3)"
                ))
            })
    }
}
