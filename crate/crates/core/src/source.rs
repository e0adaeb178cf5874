//! Named analytic right-hand sides.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{distance, DomainMask, Point};
use crate::operator::ScalarField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub width: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Constant { value: f64 },
    /// `Σ a exp(−|x − c|² / (2w²))`.
    GaussianBumps { bumps: Vec<Bump> },
    /// `value` on the closed ball, zero elsewhere.
    Indicator {
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "one")]
        value: f64,
    },
}

fn point(v: &[f64]) -> Point {
    let mut p = [0.0; 3];
    for (a, x) in v.iter().take(3).enumerate() {
        p[a] = *x;
    }
    p
}

impl SourceSpec {
    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            SourceSpec::Constant { value } => *value,
            SourceSpec::GaussianBumps { bumps } => bumps
                .iter()
                .map(|b| b.amplitude * (-distance(x, &point(&b.center)).powi(2) / (2.0 * b.width * b.width)).exp())
                .sum(),
            SourceSpec::Indicator { center, radius, value } => {
                if distance(x, &point(center)) <= *radius {
                    *value
                } else {
                    0.0
                }
            }
        }
    }

    pub fn to_field(&self, mask: Arc<DomainMask>) -> Result<ScalarField> {
        ScalarField::from_fn(mask, |x| self.eval(x))
    }

    /// Two unit bumps of width 0.15 at a quarter and three quarters of the
    /// long side of the `4 × 1` strip.
    pub fn two_bumps_on_strip() -> Self {
        SourceSpec::GaussianBumps {
            bumps: vec![
                Bump {
                    center: vec![1.0, 0.5],
                    width: 0.15,
                    amplitude: 1.0,
                },
                Bump {
                    center: vec![3.0, 0.5],
                    width: 0.15,
                    amplitude: 1.0,
                },
            ],
        }
    }
}
