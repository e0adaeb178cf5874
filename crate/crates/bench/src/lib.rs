//! Shared fixtures for the criterion benchmarks.

use std::sync::Arc;

use plate_harnack::{build_domain, DomainMask, ScalarField, Shape};

pub fn disk(h: f64) -> Arc<DomainMask> {
    Arc::new(build_domain(&Shape::unit_disk(), h).expect("unit disk"))
}

/// A smooth bump vanishing with its gradient on the unit circle.
pub fn bump(mask: &Arc<DomainMask>) -> ScalarField {
    ScalarField::from_fn(mask.clone(), |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        (1.0 - r2).max(0.0).powi(2) * (1.0 + 0.3 * (3.0 * x[0]).sin())
    })
    .expect("finite")
}
