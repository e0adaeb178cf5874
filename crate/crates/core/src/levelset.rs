//! Superlevel sets on balls, the level estimates built on them, the
//! De Giorgi iteration and the half-vanishing Poincaré check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ExponentSet;
use crate::geometry::{unit_ball_volume, Ball, Point};
use crate::operator::ScalarField;

/// `Φ` values below this are treated as exact zeros.
pub const PHI_ZERO: f64 = 1e-300;

/// Default depth of the De Giorgi iteration.
pub const DEFAULT_M_MAX: usize = 12;

/// Values with `|u|` at most this count as zeros in the Poincaré hypothesis.
pub const ZERO_TOL: f64 = 1e-14;

/// Quadratures over the superlevel set `{x ∈ B(center, r) : u(x) > k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetStats {
    pub center: Point,
    pub k: f64,
    pub r: f64,
    pub measure: f64,
    /// `(e, ∫(u−k)^e)` for each requested exponent.
    pub integrals: Vec<(f64, f64)>,
    pub t: f64,
    pub grad_t_integral: f64,
}

impl LevelSetStats {
    /// `∫(u−k)^e`, if `e` was requested.
    pub fn integral(&self, e: f64) -> Option<f64> {
        self.integrals.iter().find(|(x, _)| *x == e).map(|(_, v)| *v)
    }
}

/// Fails unless `B(center, r)` is inside the domain.
pub fn ensure_ball_inside(u: &ScalarField, center: &Point, r: f64) -> Result<()> {
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("radius must be positive, got {r}")));
    }
    let distance = u.mask().interior_distance(center)?;
    if r >= distance {
        return Err(Error::BallEscapes { radius: r, distance });
    }
    Ok(())
}

/// Sums over `cells` restricted to `u > k`, without containment checks.
fn superlevel(u: &ScalarField, cells: &[usize], k: f64, exps: &[f64], t: f64) -> (f64, Vec<f64>, f64) {
    let mut count = 0usize;
    let mut sums = vec![0.0; exps.len()];
    let mut grad = 0.0;
    for &c in cells {
        let v = u.value(c) - k;
        if v > 0.0 {
            count += 1;
            for (s, &e) in sums.iter_mut().zip(exps) {
                *s += v.powf(e);
            }
            grad += u.grad_norm(c).powf(t);
        }
    }
    let w = u.mask().cell_volume();
    (count as f64 * w, sums.into_iter().map(|s| s * w).collect(), grad * w)
}

fn ball_cells(u: &ScalarField, center: &Point, r: f64) -> Vec<usize> {
    u.mask().ball_cells(&Ball::new(*center, r))
}

pub fn level_stats(
    u: &ScalarField,
    center: &Point,
    k: f64,
    r: f64,
    exponents: &[f64],
    t: f64,
) -> Result<LevelSetStats> {
    ensure_ball_inside(u, center, r)?;
    let cells = ball_cells(u, center, r);
    let (measure, sums, grad_t_integral) = superlevel(u, &cells, k, exponents, t);
    Ok(LevelSetStats {
        center: *center,
        k,
        r,
        measure,
        integrals: exponents.iter().copied().zip(sums).collect(),
        t,
        grad_t_integral,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    LevelEstimate,
    IteratedEstimate,
    DegiorgiSup,
    Harnack,
    Oscillation,
    Poincare,
}

impl CheckKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckKind::LevelEstimate => "level_estimate",
            CheckKind::IteratedEstimate => "iterated_estimate",
            CheckKind::DegiorgiSup => "degiorgi_sup",
            CheckKind::Harnack => "harnack",
            CheckKind::Oscillation => "oscillation",
            CheckKind::Poincare => "poincare",
        }
    }
}

/// Parameters of one inequality evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckContext {
    pub center: Point,
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_norm: Option<f64>,
    pub h: f64,
}

/// One inequality `lhs ≤ c · rhs_unit`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs_unit: f64,
    /// `lhs / rhs_unit`; 0 when `lhs ≤ 0`, infinite when only the right side vanishes.
    pub implied_constant: f64,
    pub context: CheckContext,
}

impl CheckReport {
    pub fn new(kind: CheckKind, lhs: f64, rhs_unit: f64, context: CheckContext) -> Self {
        let implied_constant = if lhs <= 0.0 {
            0.0
        } else if rhs_unit <= 0.0 {
            f64::INFINITY
        } else {
            lhs / rhs_unit
        };
        CheckReport {
            kind,
            lhs,
            rhs_unit,
            implied_constant,
            context,
        }
    }

    /// Whether the inequality holds with constant `c`.
    pub fn passes(&self, c: f64) -> bool {
        self.implied_constant <= c
    }
}

fn context(u: &ScalarField, center: &Point, r: f64) -> CheckContext {
    CheckContext {
        center: *center,
        r,
        h: u.mask().h(),
        ..Default::default()
    }
}

fn check_radii(rho: f64, r: f64) -> Result<()> {
    if !(rho > 0.0 && rho < r) {
        return Err(Error::Precondition(format!("need 0 < rho < r, got rho = {rho}, r = {r}")));
    }
    Ok(())
}

/// Sobolev level estimate:
/// `∫_{A⁺(k,ρ)}(u−k)^{s*} ≤ c (r−ρ)^{−s*} |A⁺(k,r)|^{(1−s/t)s*/s} [∫(u−k)ᵗ + rᵗ∫|∇u|ᵗ]^{s*/t}`.
pub fn check_level_estimate(
    u: &ScalarField,
    center: &Point,
    k: f64,
    rho: f64,
    r: f64,
    e: &ExponentSet,
) -> Result<CheckReport> {
    check_radii(rho, r)?;
    ensure_ball_inside(u, center, r)?;
    let (ss, t, s) = (e.s_star, e.t, e.s);
    let inner = superlevel(u, &ball_cells(u, center, rho), k, &[ss], t);
    let outer = superlevel(u, &ball_cells(u, center, r), k, &[t], t);
    let lhs = inner.1[0];
    let bracket = outer.1[0] + r.powf(t) * outer.2;
    let rhs_unit = (r - rho).powf(-ss) * outer.0.powf((1.0 - s / t) * ss / s) * bracket.powf(ss / t);
    let mut ctx = context(u, center, r);
    ctx.rho = Some(rho);
    ctx.k = Some(k);
    Ok(CheckReport::new(CheckKind::LevelEstimate, lhs, rhs_unit, ctx))
}

/// Iterated level estimate between levels `l > k`:
/// `∫_{A⁺(l,ρ)}(u−l)² ≤ c (r−ρ)^{−2(p−1)/p} |A⁺(k,r)|^β [∫(u−k)²]^{1/p} [∫(u−k)ᵗ + rᵗ∫|∇u|ᵗ]^{2(p−1)/(pt)}`.
#[allow(clippy::too_many_arguments)]
pub fn check_iterated_estimate(
    u: &ScalarField,
    center: &Point,
    l: f64,
    k: f64,
    rho: f64,
    r: f64,
    e: &ExponentSet,
) -> Result<CheckReport> {
    if !(l > k) {
        return Err(Error::Precondition(format!("need l > k, got l = {l}, k = {k}")));
    }
    check_radii(rho, r)?;
    ensure_ball_inside(u, center, r)?;
    let (p, t) = (e.p, e.t);
    let inner = superlevel(u, &ball_cells(u, center, rho), l, &[2.0], t);
    let outer = superlevel(u, &ball_cells(u, center, r), k, &[2.0, t], t);
    let lhs = inner.1[0];
    let bracket = outer.1[1] + r.powf(t) * outer.2;
    let rhs_unit = (r - rho).powf(-2.0 * (p - 1.0) / p)
        * outer.0.powf(e.beta)
        * outer.1[0].powf(1.0 / p)
        * bracket.powf(2.0 * (p - 1.0) / (p * t));
    let mut ctx = context(u, center, r);
    ctx.rho = Some(rho);
    ctx.k = Some(k);
    ctx.l = Some(l);
    Ok(CheckReport::new(CheckKind::IteratedEstimate, lhs, rhs_unit, ctx))
}

/// `ln` of the displayed De Giorgi increment with constant 1, from the
/// superlevel data `(|A⁺|, ∫(u−k)², ∫(u−k)ᵗ, ∫|∇u|ᵗ)`; `None` if it vanishes.
fn ln_d_unit(e: &ExponentSet, r: f64, measure: f64, i2: f64, it: f64, grad_t: f64) -> Option<f64> {
    if measure <= 0.0 || i2 <= 0.0 {
        return None;
    }
    let (xi, eta, p, t, th) = (e.xi, e.eta, e.p, e.t, e.theta);
    let bracket = it + r.powf(t) * grad_t;
    Some(
        -xi * (p - 1.0) / (eta * p) * r.ln()
            + xi * (p - 1.0) / (t * p * eta) * bracket.ln()
            + xi * (th - 1.0) / (2.0 * eta) * i2.ln()
            + (th - 1.0) / 2.0 * measure.ln(),
    )
}

/// The De Giorgi increment
/// `d = c r^{−ξ(p−1)/(ηp)} [∫(u−k)ᵗ + rᵗ∫|∇u|ᵗ]^{ξ(p−1)/(tpη)} [∫(u−k)²]^{ξ(θ−1)/(2η)} |A⁺(k,r)|^{(θ−1)/2}`.
pub fn degiorgi_d(u: &ScalarField, center: &Point, k: f64, r: f64, e: &ExponentSet, c: f64) -> Result<f64> {
    ensure_ball_inside(u, center, r)?;
    let (measure, sums, grad) = superlevel(u, &ball_cells(u, center, r), k, &[2.0, e.t], e.t);
    Ok(match ln_d_unit(e, r, measure, sums[0], sums[1], grad) {
        Some(l) => c * l.exp(),
        None => 0.0,
    })
}

fn sup_on_ball(u: &ScalarField, center: &Point, r: f64) -> Option<f64> {
    ball_cells(u, center, r)
        .into_iter()
        .map(|c| u.value(c))
        .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
}

/// `sup_{B(r/2)} u ≤ k + c d_unit`, reported as `(sup − k)⁺` against `d_unit`.
pub fn check_degiorgi_sup(u: &ScalarField, center: &Point, k: f64, r: f64, e: &ExponentSet) -> Result<CheckReport> {
    let d_unit = degiorgi_d(u, center, k, r, e, 1.0)?;
    let sup = sup_on_ball(u, center, r / 2.0).unwrap_or(f64::NEG_INFINITY);
    let mut ctx = context(u, center, r);
    ctx.k = Some(k);
    Ok(CheckReport::new(CheckKind::DegiorgiSup, (sup - k).max(0.0), d_unit, ctx))
}

/// One run of the De Giorgi scheme on shrinking balls and rising levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub center: Point,
    pub r: f64,
    pub k0: f64,
    pub d: f64,
    /// `ln A` with `A = 2^{2(p−1)ξ/p + 2η + μ} r^{−2(p−1)ξ/p} M^ξ`.
    pub ln_a: f64,
    pub levels: Vec<f64>,
    pub radii: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub mu: f64,
    /// `Ψ_m ≤ Ψ₀` for every step.
    pub psi_bounded: bool,
    /// `Φ(k_m, r_m) ≤ 2^{−μm} Φ(k₀, r)` for every step.
    pub phi_decay: bool,
    pub sup_half: f64,
    /// `sup_{B(r/2)} u ≤ k₀ + d`.
    pub sup_bound_holds: bool,
    pub converged: bool,
}

/// The constant of the displayed increment that reproduces the iteration's
/// `d` for a given level-estimate constant.
pub fn theorem_constant(e: &ExponentSet, c_lemma: f64) -> f64 {
    let pow2 = 2.0 * (e.p - 1.0) * e.xi / e.p + 2.0 * e.eta + e.mu;
    (pow2 * std::f64::consts::LN_2 / (2.0 * e.eta) + e.xi / (2.0 * e.eta) * c_lemma.ln()).exp()
}

/// Runs the iteration with `M = c_lemma [∫(u−k₀)ᵗ + rᵗ∫|∇u|ᵗ]^{2(p−1)/(pt)}`
/// and `d` chosen so that `A Ψ₀^{θ−1} / d^{2η} = 1`.
pub fn degiorgi_iterate(
    u: &ScalarField,
    center: &Point,
    k0: f64,
    r: f64,
    e: &ExponentSet,
    c_lemma: f64,
    m_max: usize,
) -> Result<IterationTrace> {
    if !(c_lemma > 0.0) {
        return Err(Error::Precondition(format!("constant must be positive, got {c_lemma}")));
    }
    ensure_ball_inside(u, center, r)?;
    let (xi, eta, p, t, th, mu) = (e.xi, e.eta, e.p, e.t, e.theta, e.mu);
    let phi_of = |measure: f64, i2: f64| {
        let v = i2.powf(xi) * measure.powf(eta);
        if v < PHI_ZERO {
            0.0
        } else {
            v
        }
    };

    let (measure, sums, grad) = superlevel(u, &ball_cells(u, center, r), k0, &[2.0, t], t);
    let phi0 = phi_of(measure, sums[0]);
    let sup_half = sup_on_ball(u, center, r / 2.0).unwrap_or(f64::NEG_INFINITY);

    let bracket = sums[1] + r.powf(t) * grad;
    let ln_m = c_lemma.ln() + 2.0 * (p - 1.0) / (p * t) * bracket.ln();
    let ln_a = (2.0 * (p - 1.0) * xi / p + 2.0 * eta + mu) * std::f64::consts::LN_2
        - 2.0 * (p - 1.0) * xi / p * r.ln()
        + xi * ln_m;
    let d = if phi0 == 0.0 {
        0.0
    } else {
        ((ln_a + (th - 1.0) * phi0.ln()) / (2.0 * eta)).exp()
    };

    let mut trace = IterationTrace {
        center: *center,
        r,
        k0,
        d,
        ln_a,
        levels: Vec::with_capacity(m_max + 1),
        radii: Vec::with_capacity(m_max + 1),
        phi: Vec::with_capacity(m_max + 1),
        psi: Vec::with_capacity(m_max + 1),
        mu,
        psi_bounded: true,
        phi_decay: true,
        sup_half,
        sup_bound_holds: sup_half <= k0 + d,
        converged: true,
    };
    for m in 0..=m_max {
        let scale = 0.5f64.powi(m as i32);
        let k_m = k0 + d - d * scale;
        let r_m = r / 2.0 + r * scale / 2.0;
        let phi_m = if m == 0 {
            phi0
        } else {
            let (meas, s, _) = superlevel(u, &ball_cells(u, center, r_m), k_m, &[2.0], t);
            phi_of(meas, s[0])
        };
        let psi_m = 2f64.powf(mu * m as f64) * phi_m;
        if psi_m > phi0 {
            trace.psi_bounded = false;
        }
        if phi_m > 2f64.powf(-mu * m as f64) * phi0 {
            trace.phi_decay = false;
        }
        trace.levels.push(k_m);
        trace.radii.push(r_m);
        trace.phi.push(phi_m);
        trace.psi.push(psi_m);
    }
    trace.converged = trace.psi_bounded && trace.phi_decay;
    Ok(trace)
}

/// Poincaré inequality for functions vanishing on half the ball:
/// `(∫_{B_r}|u|^p)^{1/p} ≤ c ω_N p (N−1)/N r (∫_{B_r}|∇u|^p)^{1/p}`.
pub fn check_poincare_half(u: &ScalarField, center: &Point, r: f64, p_norm: f64) -> Result<CheckReport> {
    if !(p_norm > 1.0) {
        return Err(Error::Precondition(format!("norm exponent must exceed 1, got {p_norm}")));
    }
    ensure_ball_inside(u, center, r)?;
    let cells = ball_cells(u, center, r);
    let zero = cells.iter().filter(|&&c| u.value(c).abs() <= ZERO_TOL).count();
    if 2 * zero < cells.len() {
        return Err(Error::ZeroSetTooSmall {
            zero,
            total: cells.len(),
        });
    }
    let w = u.mask().cell_volume();
    let (mut su, mut sg) = (0.0, 0.0);
    for &c in &cells {
        su += u.value(c).abs().powf(p_norm);
        sg += u.grad_norm(c).powf(p_norm);
    }
    let lhs = (su * w).powf(1.0 / p_norm);
    let n = u.mask().dim() as f64;
    let rhs_unit = unit_ball_volume(u.mask().dim()) * p_norm * (n - 1.0) / n * r * (sg * w).powf(1.0 / p_norm);
    let mut ctx = context(u, center, r);
    ctx.p_norm = Some(p_norm);
    Ok(CheckReport::new(CheckKind::Poincare, lhs, rhs_unit, ctx))
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

    fn bump(mask: Arc<DomainMask>, center: Point, r: f64) -> ScalarField {
        ScalarField::from_fn(mask, |x| {
            let d = crate::geometry::distance(x, &center);
            (1.0 - d / r).max(0.0).powi(2)
        })
        .unwrap()
    }

    const C: Point = [0.5, 0.5, 0.0];

    #[test]
    fn zero_field_has_empty_superlevel() {
        let u = ScalarField::zeros(square(1.0 / 32.0));
        let s = level_stats(&u, &C, 0.0, 0.3, &[1.0, 2.0], 5.0).unwrap();
        assert_eq!(s.measure, 0.0);
        assert_eq!(s.integral(1.0), Some(0.0));
        assert_eq!(s.grad_t_integral, 0.0);
    }

    #[test]
    fn half_disk_measure_and_moment() {
        let u = ScalarField::from_fn(square(1.0 / 128.0), |x| x[0]).unwrap();
        let r: f64 = 0.4;
        let s = level_stats(&u, &C, 0.5, r, &[1.0], 5.0).unwrap();
        let area = std::f64::consts::PI * r * r / 2.0;
        assert!((s.measure - area).abs() <= 0.02 * area, "{}", s.measure);
        // ∫∫ x' dA over the half disk = 2r³/3
        let moment = 2.0 * r.powi(3) / 3.0;
        let got = s.integral(1.0).unwrap();
        assert!((got - moment).abs() <= 0.02 * moment, "{got} vs {moment}");
    }

    #[test]
    fn escaping_ball_is_rejected() {
        let u = ScalarField::zeros(square(1.0 / 32.0));
        assert!(matches!(
            level_stats(&u, &C, 0.0, 0.6, &[], 5.0),
            Err(Error::BallEscapes { .. })
        ));
    }

    #[test]
    fn measure_is_monotone_in_level() {
        let u = bump(square(1.0 / 48.0), [0.45, 0.55, 0.0], 0.35);
        let mut last = f64::INFINITY;
        for i in 0..10 {
            let k = 0.1 * i as f64;
            let m = level_stats(&u, &C, k, 0.4, &[], 5.0).unwrap().measure;
            assert!(m <= last);
            last = m;
        }
    }

    #[test]
    fn level_estimate_homogeneity() {
        let e = default_exponents(2).unwrap();
        let u = bump(square(1.0 / 48.0), C, 0.4);
        let a = check_level_estimate(&u, &C, 0.1, 0.2, 0.4, &e).unwrap();
        let u2 = u.scaled(2.0).unwrap();
        let b = check_level_estimate(&u2, &C, 0.2, 0.2, 0.4, &e).unwrap();
        let f = 2f64.powf(e.s_star);
        assert!((b.lhs / a.lhs - f).abs() < 1e-12 * f);
        assert!((b.rhs_unit / a.rhs_unit - f).abs() < 1e-12 * f);
        assert!((b.implied_constant - a.implied_constant).abs() < 1e-12 * a.implied_constant);
    }

    #[test]
    fn constant_field_passes_trivially() {
        let e = default_exponents(2).unwrap();
        let u = ScalarField::from_fn(square(1.0 / 32.0), |_| 0.3).unwrap();
        let rep = check_level_estimate(&u, &C, 0.3, 0.2, 0.4, &e).unwrap();
        assert_eq!((rep.lhs, rep.rhs_unit), (0.0, 0.0));
        assert!(rep.passes(0.0));
    }

    #[test]
    fn iterated_estimate_cases() {
        let e = default_exponents(2).unwrap();
        let u = bump(square(1.0 / 48.0), C, 0.4);
        let rep = check_iterated_estimate(&u, &C, 5.0, 0.1, 0.2, 0.4, &e).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.passes(0.0));
        assert!(check_iterated_estimate(&u, &C, 0.1, 0.1, 0.2, 0.4, &e).is_err());
        // the left side never exceeds the same integral at the lower level
        for (l, k) in [(0.2, 0.1), (0.1 + 1e-9, 0.1), (0.6, 0.0)] {
            let rep = check_iterated_estimate(&u, &C, l, k, 0.3, 0.4, &e).unwrap();
            let lower = level_stats(&u, &C, k, 0.3, &[2.0], e.t).unwrap();
            assert!(rep.lhs <= lower.integral(2.0).unwrap());
            // Chebyshev on the level sets
            let upper = level_stats(&u, &C, l, 0.3, &[], e.t).unwrap();
            assert!(upper.measure <= lower.integral(2.0).unwrap() / ((l - k) * (l - k)));
        }
    }

    #[test]
    fn increment_vanishes_above_the_field() {
        let e = default_exponents(2).unwrap();
        let u = bump(square(1.0 / 32.0), C, 0.3);
        assert_eq!(degiorgi_d(&u, &C, 1.0, 0.4, &e, 1.0).unwrap(), 0.0);
        let tr = degiorgi_iterate(&u, &C, 1.0, 0.4, &e, 1.0, 12).unwrap();
        assert_eq!(tr.d, 0.0);
        assert!(tr.phi.iter().all(|&p| p == 0.0));
        assert!(tr.converged && tr.sup_bound_holds);
    }

    #[test]
    fn increment_is_one_homogeneous() {
        let e = default_exponents(2).unwrap();
        let u = bump(square(1.0 / 48.0), [0.48, 0.52, 0.0], 0.35);
        let d1 = degiorgi_d(&u, &C, 0.1, 0.4, &e, 1.0).unwrap();
        let d2 = degiorgi_d(&u.scaled(2.0).unwrap(), &C, 0.2, 0.4, &e, 1.0).unwrap();
        let expected = 2f64.powf(e.degiorgi_degree());
        assert!((d2 / d1 - expected).abs() < 1e-12 * expected);
        assert!((expected - 2.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_increment_matches_display() {
        let e = default_exponents(2).unwrap();
        let u = bump(square(1.0 / 48.0), [0.48, 0.52, 0.0], 0.35);
        let c_lemma = 3.7;
        let tr = degiorgi_iterate(&u, &C, 0.05, 0.4, &e, c_lemma, 12).unwrap();
        let d = degiorgi_d(&u, &C, 0.05, 0.4, &e, theorem_constant(&e, c_lemma)).unwrap();
        assert!((tr.d - d).abs() <= 1e-12 * d);
        assert_eq!(tr.levels.len(), 13);
        assert!(tr.levels.windows(2).all(|w| w[0] < w[1]));
        assert!(tr.radii.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(tr.radii[0], 0.4);
        assert_eq!(tr.psi[0], tr.phi[0]);
    }

    #[test]
    fn poincare_half_vanishing_ramp() {
        let mut prev = None;
        for h in [1.0 / 64.0, 1.0 / 128.0] {
            let u = ScalarField::from_fn(square(h), |x| (x[0] - 0.5).max(0.0)).unwrap();
            let rep = check_poincare_half(&u, &C, 0.3, 2.0).unwrap();
            assert!(rep.implied_constant.is_finite() && rep.implied_constant > 0.0);
            let scaled = check_poincare_half(&u.scaled(3.0).unwrap(), &C, 0.3, 2.0).unwrap();
            assert!((scaled.implied_constant - rep.implied_constant).abs() < 1e-12 * rep.implied_constant);
            if let Some(p) = prev {
                let rel: f64 = (rep.implied_constant - p) / p;
                assert!(rel.abs() < 0.2);
            }
            prev = Some(rep.implied_constant);
        }
        let zero = ScalarField::zeros(square(1.0 / 32.0));
        assert_eq!(check_poincare_half(&zero, &C, 0.3, 2.0).unwrap().lhs, 0.0);
        let pos = ScalarField::from_fn(square(1.0 / 32.0), |x| x[0]).unwrap();
        assert!(matches!(
            check_poincare_half(&pos, &C, 0.3, 2.0),
            Err(Error::ZeroSetTooSmall { .. })
        ));
    }
}
