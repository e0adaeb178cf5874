//! Harnack-type bounds: sup over a half ball against inf over the ball, and
//! the oscillation bound along a chain of balls.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exponents::ExponentSet;
use crate::geometry::{Ball, Point};
use crate::levelset::{ensure_ball_inside, CheckContext, CheckKind, CheckReport};
use crate::operator::ScalarField;

/// An interval of levels with explicit endpoint closure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

/// Split of the levels in `(min u, max u)` over a ball.
///
/// `i1` holds the levels whose open superlevel set covers less than half the
/// ball, `i2` those whose closed superlevel set covers at least half.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelClassification {
    pub i1: Option<LevelInterval>,
    pub i2: Option<LevelInterval>,
    /// `inf I₁ = sup I₂` when both are nonempty.
    pub k0: Option<f64>,
}

pub fn classify_levels(u: &ScalarField, center: &Point, r: f64) -> Result<LevelClassification> {
    ensure_ball_inside(u, center, r)?;
    let mut vals: Vec<f64> = u
        .mask()
        .ball_cells(&Ball::new(*center, r))
        .into_iter()
        .map(|c| u.value(c))
        .collect();
    vals.sort_by(f64::total_cmp);
    let empty = LevelClassification {
        i1: None,
        i2: None,
        k0: None,
    };
    let n = vals.len();
    if n == 0 || vals[0] == vals[n - 1] {
        return Ok(empty);
    }
    let (lo, hi) = (vals[0], vals[n - 1]);
    // first distinct value v with #{u > v} < n/2
    let mut k0 = hi;
    let mut i = 0;
    while i < n {
        let v = vals[i];
        let mut j = i;
        while j < n && vals[j] == v {
            j += 1;
        }
        if 2 * (n - j) < n {
            k0 = v;
            break;
        }
        i = j;
    }
    if k0 == lo {
        // fewer than half the cells exceed the minimum: every level is in I₁
        return Ok(LevelClassification {
            i1: Some(LevelInterval {
                lo,
                hi,
                lo_closed: false,
                hi_closed: false,
            }),
            i2: None,
            k0: None,
        });
    }
    Ok(LevelClassification {
        i1: Some(LevelInterval {
            lo: k0,
            hi,
            lo_closed: true,
            hi_closed: false,
        }),
        i2: Some(LevelInterval {
            lo,
            hi: k0,
            lo_closed: false,
            hi_closed: true,
        }),
        k0: Some(k0),
    })
}

/// `sup_{B(r/2)} u ≤ inf_{B(r)} u + c r^b (∫|∇u|ᵗ)^{(ξ/η)(p−1)/(tp)} (∫|∇u|²)^{ξ(θ−1)/(2η)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport {
    pub center: Point,
    pub r: f64,
    pub sup_half: f64,
    pub inf_half: f64,
    pub inf_full: f64,
    pub grad_t_term: f64,
    pub grad_2_term: f64,
    pub r_power: f64,
    pub rhs_unit: f64,
    pub implied_constant: f64,
    pub k0: Option<f64>,
    pub c: f64,
    pub passes: bool,
}

impl HarnackReport {
    pub fn to_check(&self, h: f64) -> CheckReport {
        CheckReport::new(
            CheckKind::Harnack,
            self.sup_half - self.inf_full,
            self.rhs_unit,
            CheckContext {
                center: self.center,
                r: self.r,
                k: self.k0,
                h,
                ..Default::default()
            },
        )
    }
}

/// `(ln ∫|∇u|ᵗ, ln ∫|∇u|²)` over `cells`, scaled by the largest gradient so
/// that nearly flat fields do not underflow.
fn ln_gradient_integrals(u: &ScalarField, cells: impl Iterator<Item = usize>, t: f64) -> (f64, f64) {
    let g: Vec<f64> = cells.map(|c| u.grad_norm(c)).collect();
    let gmax = g.iter().copied().fold(0.0, f64::max);
    if gmax == 0.0 {
        return (f64::NEG_INFINITY, f64::NEG_INFINITY);
    }
    let (mut gt, mut g2) = (0.0, 0.0);
    for v in &g {
        let q = v / gmax;
        gt += q.powf(t);
        g2 += q * q;
    }
    let lw = u.mask().cell_volume().ln();
    (t * gmax.ln() + gt.ln() + lw, 2.0 * gmax.ln() + g2.ln() + lw)
}

/// The gradient factor shared by both Harnack bounds, with constant 1, as logs.
fn ln_gradient_terms(e: &ExponentSet, lgt: f64, lg2: f64) -> (f64, f64) {
    let ratio = e.xi / e.eta;
    (
        lgt * ratio * (e.p - 1.0) / (e.t * e.p),
        lg2 * e.xi * (e.theta - 1.0) / (2.0 * e.eta),
    )
}

/// lhs over a rhs known only through its log.
fn ratio_from_ln(lhs: f64, ln_rhs: f64) -> f64 {
    if lhs <= 0.0 {
        0.0
    } else if ln_rhs == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        (lhs.ln() - ln_rhs).exp()
    }
}

pub fn harnack_check(u: &ScalarField, center: &Point, r: f64, e: &ExponentSet, c: f64) -> Result<HarnackReport> {
    ensure_ball_inside(u, center, r)?;
    let mask = u.mask();
    let full = mask.ball_cells(&Ball::new(*center, r));
    let half = mask.ball_cells(&Ball::new(*center, r / 2.0));
    let fold = |cells: &[usize], init: f64, f: fn(f64, f64) -> f64| {
        cells.iter().map(|&c| u.value(c)).fold(init, f)
    };
    let sup_half = fold(&half, f64::NEG_INFINITY, f64::max);
    let inf_half = fold(&half, f64::INFINITY, f64::min);
    let inf_full = fold(&full, f64::INFINITY, f64::min);
    let (lgt, lg2) = ln_gradient_integrals(u, full.iter().copied(), e.t);
    let (ln_t, ln_2) = ln_gradient_terms(e, lgt, lg2);
    let ln_r = e.b_bold * r.ln();
    let (grad_t_term, grad_2_term, r_power) = (ln_t.exp(), ln_2.exp(), ln_r.exp());
    let rhs_unit = (ln_r + ln_t + ln_2).exp();
    let lhs = sup_half - inf_full;
    let implied_constant = ratio_from_ln(lhs, ln_r + ln_t + ln_2);
    Ok(HarnackReport {
        center: *center,
        r,
        sup_half,
        inf_half,
        inf_full,
        grad_t_term,
        grad_2_term,
        r_power,
        rhs_unit,
        implied_constant,
        k0: classify_levels(u, center, r)?.k0,
        c,
        passes: implied_constant <= c,
    })
}

/// `u(x_max) ≤ u(x_min) + c h r^b (∫_Ω|∇u|ᵗ)^{ξ(p−1)/(tpη)} (∫_Ω|∇u|²)^{ξ(θ−1)/(2η)}`
/// with `h` the length of a chain of balls from `x_max` to `x_min`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub x_max: Point,
    pub x_min: Point,
    pub u_max: f64,
    pub u_min: f64,
    pub steps: usize,
    pub radius: f64,
    pub rhs_unit: f64,
    pub implied_constant: f64,
    pub c: f64,
    pub passes: bool,
}

impl OscillationReport {
    pub fn to_check(&self, h: f64) -> CheckReport {
        CheckReport::new(
            CheckKind::Oscillation,
            self.u_max - self.u_min,
            self.rhs_unit,
            CheckContext {
                center: self.x_max,
                r: self.radius,
                h,
                ..Default::default()
            },
        )
    }
}

/// Values at the interior cells nearest to the two points.
fn point_value(u: &ScalarField, x: &Point) -> Result<f64> {
    u.mask()
        .cell_at(x)
        .map(|c| u.value(c))
        .ok_or(crate::error::Error::PointOutOfRange(*x))
}

pub fn chain_bound(
    u: &ScalarField,
    x_max: &Point,
    x_min: &Point,
    r: f64,
    e: &ExponentSet,
    c: f64,
) -> Result<OscillationReport> {
    let chain = u.mask().chain_of_balls(x_max, x_min, r)?;
    let u_max = point_value(u, x_max)?;
    let u_min = point_value(u, x_min)?;
    let (lgt, lg2) = ln_gradient_integrals(u, 0..u.len(), e.t);
    let (a, b) = ln_gradient_terms(e, lgt, lg2);
    let ln_rhs = (chain.steps as f64).ln() + e.b_bold * r.ln() + a + b;
    let rhs_unit = ln_rhs.exp();
    let implied_constant = ratio_from_ln(u_max - u_min, ln_rhs);
    Ok(OscillationReport {
        x_max: *x_max,
        x_min: *x_min,
        u_max,
        u_min,
        steps: chain.steps,
        radius: r,
        rhs_unit,
        implied_constant,
        c,
        passes: implied_constant <= c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::default_exponents;
    use crate::geometry::{build_domain, DomainMask, Shape};
    use std::sync::Arc;

    fn square(h: f64) -> Arc<DomainMask> {
        Arc::new(build_domain(&Shape::unit_square(), h).unwrap())
    }

    const C: Point = [0.5, 0.5, 0.0];

    #[test]
    fn constant_field_has_no_levels() {
        let u = ScalarField::from_fn(square(1.0 / 32.0), |_| 2.0).unwrap();
        let cl = classify_levels(&u, &C, 0.3).unwrap();
        assert_eq!(cl, LevelClassification { i1: None, i2: None, k0: None });
        let e = default_exponents(2).unwrap();
        let rep = harnack_check(&u, &C, 0.3, &e, 0.0).unwrap();
        assert_eq!(rep.sup_half, rep.inf_full);
        assert!(rep.passes);
    }

    #[test]
    fn ramp_splits_at_the_center_value() {
        let h = 1.0 / 64.0;
        let u = ScalarField::from_fn(square(h), |x| x[0]).unwrap();
        let cl = classify_levels(&u, &C, 0.3).unwrap();
        let k0 = cl.k0.unwrap();
        assert!((k0 - 0.5).abs() <= h);
        let (i1, i2) = (cl.i1.unwrap(), cl.i2.unwrap());
        assert_eq!(i1.lo, i2.hi);
        assert!(i1.lo_closed && i2.hi_closed);
    }

    #[test]
    fn radial_bump_splits_at_half_area_level() {
        let h = 1.0 / 128.0;
        let r: f64 = 0.3;
        let g = |rho: f64| 1.0 - (rho / 0.4).powi(2);
        let u = ScalarField::from_fn(square(h), |x| g(crate::geometry::distance(x, &C))).unwrap();
        let k0 = classify_levels(&u, &C, r).unwrap().k0.unwrap();
        // the superlevel disk of half the ball's area has radius r/√2
        let oracle = g(r / 2f64.sqrt());
        let quantum = 2.0 * r * h / (0.4 * 0.4);
        assert!((k0 - oracle).abs() <= quantum, "{k0} vs {oracle}");
    }

    #[test]
    fn report_terms_are_ordered() {
        let e = default_exponents(2).unwrap();
        let u = ScalarField::from_fn(square(1.0 / 48.0), |x| (3.0 * x[0]).sin() + x[1] * x[1]).unwrap();
        let rep = harnack_check(&u, &[0.45, 0.55, 0.0], 0.3, &e, 1.0).unwrap();
        assert!(rep.sup_half >= rep.inf_half && rep.inf_half >= rep.inf_full);
        assert!(rep.grad_t_term > 0.0 && rep.grad_2_term > 0.0 && rep.r_power > 0.0);
        // degree one in u
        let rep2 = harnack_check(&u.scaled(4.0).unwrap(), &[0.45, 0.55, 0.0], 0.3, &e, 1.0).unwrap();
        assert!((rep2.implied_constant - rep.implied_constant).abs() < 1e-12 * rep.implied_constant);
    }

    #[test]
    fn shift_leaves_the_constant_unchanged_exactly() {
        let e = default_exponents(2).unwrap();
        // dyadic values keep every sum and difference exact
        let q = 2f64.powi(-30);
        let u = ScalarField::from_fn(square(1.0 / 40.0), |x| ((x[0] * x[1] * 2.7).sin() / q).round() * q).unwrap();
        let a = harnack_check(&u, &C, 0.35, &e, 2.0).unwrap();
        let b = harnack_check(&u.map(|v| v + 3.0).unwrap(), &C, 0.35, &e, 2.0).unwrap();
        assert_eq!(a.implied_constant, b.implied_constant);
        assert_eq!(a.passes, b.passes);
    }

    #[test]
    fn oscillation_degenerates_at_a_single_point() {
        let e = default_exponents(2).unwrap();
        let u = ScalarField::from_fn(square(1.0 / 32.0), |x| x[0]).unwrap();
        let rep = chain_bound(&u, &C, &C, 0.2, &e, 1.0).unwrap();
        assert_eq!(rep.steps, 0);
        assert_eq!(rep.u_max, rep.u_min);
        assert!(rep.passes);
    }
}
