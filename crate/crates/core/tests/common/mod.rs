//! Manufactured solutions with known exact answers.
#![allow(dead_code)]

use std::sync::Arc;
use std::time::Instant;

use plate_harnack::geometry::{build_domain, Shape};
use plate_harnack::operator::{PlateOperator, ScalarField};

/// `x²(1−x)²` and its second and fourth derivatives.
pub fn p(x: f64) -> f64 {
    x * x * (1.0 - x) * (1.0 - x)
}

pub fn p2(x: f64) -> f64 {
    2.0 - 12.0 * x + 12.0 * x * x
}

pub const P4: f64 = 24.0;

/// Right-hand side for `u = p(x) p(y)` on the unit square.
pub fn square_source(q: &[f64; 3], gamma: f64) -> f64 {
    let (x, y) = (q[0], q[1]);
    let bih = P4 * p(y) + 2.0 * p2(x) * p2(y) + p(x) * P4;
    let lap = p2(x) * p(y) + p(x) * p2(y);
    bih - gamma * lap
}

pub struct Run {
    /// Max-norm error against the exact solution.
    pub error: f64,
    /// Max of the exact solution over the compared cells.
    pub scale: f64,
    pub energy_residual: f64,
    pub converged: bool,
    pub seconds: f64,
}

pub fn square_run(h: f64, gamma: f64) -> Run {
    let t0 = Instant::now();
    let mask = Arc::new(build_domain(&Shape::unit_square(), h).unwrap());
    let exact = |q: &[f64; 3]| p(q[0]) * p(q[1]);
    let f = ScalarField::from_fn(mask.clone(), |q| square_source(q, gamma)).unwrap();
    let op = PlateOperator::assemble(mask.clone()).unwrap();
    let (u, stats) = op.solve(gamma, &f, 1e-10).unwrap();
    let seconds = t0.elapsed().as_secs_f64();
    let energy_residual = op.energy_report(gamma, &u, &f).unwrap().identity_residual;
    let (error, scale) = (0..mask.n_cells())
        .map(|c| {
            let e = exact(&mask.cell_point(c));
            ((u.value(c) - e).abs(), e.abs())
        })
        .fold((0.0, 0.0), |a: (f64, f64), b| (a.0.max(b.0), a.1.max(b.1)));
    Run {
        error,
        scale,
        energy_residual,
        converged: stats.at_precision_limit(),
        seconds,
    }
}

/// `u = (1 − r²)²` on the unit disk, compared where the interior distance
/// exceeds `4h`.
pub fn disk_run(h: f64, gamma: f64) -> Run {
    let t0 = Instant::now();
    let mask = Arc::new(build_domain(&Shape::unit_disk(), h).unwrap());
    let r2 = |q: &[f64; 3]| q[0] * q[0] + q[1] * q[1];
    let f = ScalarField::from_fn(mask.clone(), |q| 64.0 + gamma * (8.0 - 16.0 * r2(q))).unwrap();
    let op = PlateOperator::assemble(mask.clone()).unwrap();
    let (u, stats) = op.solve(gamma, &f, 1e-10).unwrap();
    let seconds = t0.elapsed().as_secs_f64();
    let energy_residual = op.energy_report(gamma, &u, &f).unwrap().identity_residual;
    let (error, scale) = (0..mask.n_cells())
        .filter(|&c| mask.cell_interior_distance(c) > 4.0 * h)
        .map(|c| {
            let e = (1.0 - r2(&mask.cell_point(c))).powi(2);
            ((u.value(c) - e).abs(), e)
        })
        .fold((0.0, 0.0), |a: (f64, f64), b| (a.0.max(b.0), a.1.max(b.1)));
    Run {
        error,
        scale,
        energy_residual,
        converged: stats.at_precision_limit(),
        seconds,
    }
}
