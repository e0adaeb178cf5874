//! Seeded random test fields and the calibrate-then-verify protocol for the
//! unspecified constants of the level, De Giorgi and Harnack inequalities.
//!
//! A constant is set to a safety multiple of the largest implied constant
//! over a training suite, then checked on a held-out suite drawn from the
//! next seed.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ExponentSet;
use crate::geometry::{build_domain, Ball, DomainMask, Point, Shape};
use crate::harnack::harnack_check;
use crate::levelset::{
    check_degiorgi_sup, check_iterated_estimate, degiorgi_d, degiorgi_iterate, DEFAULT_M_MAX,
};
use crate::operator::ScalarField;

pub const DEFAULT_SAFETY: f64 = 1.5;

/// Which constant a suite calibrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Constant of the displayed increment `d` in `sup_{B(r/2)} u ≤ k + d`.
    DegiorgiSup,
    /// Constant of the iterated level estimate, used inside the iteration.
    IteratedEstimate,
    /// Constant of the half-ball Harnack bound.
    Harnack,
}

/// Shape of the training and held-out suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub shape: Shape,
    pub h: f64,
    pub n_fields: usize,
    pub probes_per_field: usize,
    pub seed: u64,
    pub r_min: f64,
    pub r_max: f64,
    pub safety: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            shape: Shape::unit_disk(),
            h: 1.0 / 64.0,
            n_fields: 50,
            probes_per_field: 8,
            seed: 20_240_601,
            r_min: 0.12,
            r_max: 0.25,
            safety: DEFAULT_SAFETY,
        }
    }
}

/// Sum of up to five Gaussian bumps times the squared distance to the
/// boundary, so the field and its gradient vanish there.
pub fn random_smooth_field(mask: &Arc<DomainMask>, rng: &mut ChaCha8Rng) -> ScalarField {
    let (lo, hi) = bounding_box(mask);
    let n_bumps = rng.gen_range(1..=5);
    let bumps: Vec<(Point, f64, f64)> = (0..n_bumps)
        .map(|_| {
            let mut c = [0.0; 3];
            for a in 0..mask.dim() {
                c[a] = rng.gen_range(lo[a]..hi[a]);
            }
            (c, rng.gen_range(0.2..1.0), rng.gen_range(0.08..0.25))
        })
        .collect();
    let values = (0..mask.n_cells())
        .map(|c| {
            let x = mask.cell_point(c);
            let env = mask.node_distance(mask.cell_node(c)).powi(2);
            let s: f64 = bumps
                .iter()
                .map(|(b, amp, w)| amp * (-crate::geometry::distance(&x, b).powi(2) / (2.0 * w * w)).exp())
                .sum();
            env * s
        })
        .collect();
    ScalarField::new(mask.clone(), values).expect("finite field")
}

fn bounding_box(mask: &DomainMask) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for c in 0..mask.n_cells() {
        let x = mask.cell_point(c);
        for a in 0..3 {
            lo[a] = lo[a].min(x[a]);
            hi[a] = hi[a].max(x[a]);
        }
    }
    for a in mask.dim()..3 {
        lo[a] = 0.0;
        hi[a] = 0.0;
    }
    (lo, hi)
}

/// A ball and levels at which to evaluate an inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub field: usize,
    pub center: Point,
    pub r: f64,
    /// Base level.
    pub k: f64,
    /// Upper level for the iterated estimate.
    pub l: f64,
    /// Inner radius for the iterated estimate.
    pub rho: f64,
}

/// Draws a probe whose ball stays at least one cell away from the boundary.
pub fn random_probe(u: &ScalarField, field: usize, cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<Probe> {
    let mask = u.mask();
    let (lo, hi) = bounding_box(mask);
    for _ in 0..10_000 {
        let r = rng.gen_range(cfg.r_min..cfg.r_max);
        let mut center = [0.0; 3];
        for a in 0..mask.dim() {
            center[a] = rng.gen_range(lo[a]..=hi[a]);
        }
        let dist = match mask.interior_distance(&center) {
            Ok(d) => d,
            Err(_) => continue,
        };
        if dist <= r + mask.h() {
            continue;
        }
        let vals: Vec<f64> = mask
            .ball_cells(&Ball::new(center, r))
            .into_iter()
            .map(|c| u.value(c))
            .collect();
        let vmin = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let vmax = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let k = vmin + rng.gen_range(0.0..0.9) * (vmax - vmin);
        let l = k + rng.gen_range(0.01..0.5) * (vmax - k);
        let rho = rng.gen_range(0.5..0.95) * r;
        return Ok(Probe {
            field,
            center,
            r,
            k,
            l,
            rho,
        });
    }
    Err(Error::Precondition(format!(
        "no ball of radius in [{}, {}) fits inside the domain",
        cfg.r_min, cfg.r_max
    )))
}

/// The fields and probes of one suite.
pub struct Suite {
    pub mask: Arc<DomainMask>,
    pub fields: Vec<ScalarField>,
    pub probes: Vec<Probe>,
    pub seed: u64,
}

pub fn build_suite(cfg: &SuiteConfig, seed: u64) -> Result<Suite> {
    let mask = Arc::new(build_domain(&cfg.shape, cfg.h)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fields = Vec::with_capacity(cfg.n_fields);
    let mut probes = Vec::with_capacity(cfg.n_fields * cfg.probes_per_field);
    for i in 0..cfg.n_fields {
        let u = random_smooth_field(&mask, &mut rng);
        for _ in 0..cfg.probes_per_field {
            probes.push(random_probe(&u, i, cfg, &mut rng)?);
        }
        fields.push(u);
    }
    Ok(Suite {
        mask,
        fields,
        probes,
        seed,
    })
}

/// Implied constant of `target` at one probe.
pub fn implied_constant(u: &ScalarField, probe: &Probe, target: Target, e: &ExponentSet) -> Result<f64> {
    Ok(match target {
        Target::DegiorgiSup => check_degiorgi_sup(u, &probe.center, probe.k, probe.r, e)?.implied_constant,
        Target::IteratedEstimate => {
            check_iterated_estimate(u, &probe.center, probe.l, probe.k, probe.rho, probe.r, e)?.implied_constant
        }
        Target::Harnack => harnack_check(u, &probe.center, probe.r, e, 0.0)?.implied_constant,
    })
}

impl Suite {
    /// Implied constants at every probe, in probe order.
    pub fn implied_constants(&self, target: Target, e: &ExponentSet) -> Result<Vec<f64>> {
        self.probes
            .par_iter()
            .map(|p| implied_constant(&self.fields[p.field], p, target, e))
            .collect()
    }
}

/// A calibrated constant and where it came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub target: Target,
    pub c: f64,
    pub train_max: f64,
    pub safety: f64,
    pub seed: u64,
    pub n_fields: usize,
    pub n_probes: usize,
}

pub fn calibrate(cfg: &SuiteConfig, target: Target, e: &ExponentSet) -> Result<Calibration> {
    let suite = build_suite(cfg, cfg.seed)?;
    calibrate_on(&suite, cfg.safety, target, e)
}

pub fn calibrate_on(suite: &Suite, safety: f64, target: Target, e: &ExponentSet) -> Result<Calibration> {
    let cs = suite.implied_constants(target, e)?;
    let train_max = cs.iter().copied().fold(0.0, f64::max);
    if !train_max.is_finite() {
        return Err(Error::Precondition(format!("{target:?}: infinite implied constant in the training suite")));
    }
    Ok(Calibration {
        target,
        c: safety * train_max,
        train_max,
        safety,
        seed: suite.seed,
        n_fields: suite.fields.len(),
        n_probes: suite.probes.len(),
    })
}

/// Outcome on a held-out suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub target: Target,
    pub c: f64,
    pub seed: u64,
    pub evaluations: usize,
    pub violations: usize,
    pub max_implied: f64,
}

pub fn verify_on(suite: &Suite, cal: &Calibration, e: &ExponentSet) -> Result<Verification> {
    let cs = suite.implied_constants(cal.target, e)?;
    Ok(Verification {
        target: cal.target,
        c: cal.c,
        seed: suite.seed,
        evaluations: cs.len(),
        violations: cs.iter().filter(|&&v| !(v <= cal.c)).count(),
        max_implied: cs.iter().copied().fold(0.0, f64::max),
    })
}

/// Held-out outcome of the full De Giorgi scheme with calibrated constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegiorgiVerification {
    pub c_theorem: f64,
    pub c_lemma: f64,
    pub evaluations: usize,
    /// `sup_{B(r/2)} u > k + d` with the displayed `d` and `c_theorem`.
    pub sup_violations: usize,
    /// Some `Ψ_m > Ψ₀` with `d` from the iteration.
    pub psi_violations: usize,
    /// `sup_{B(r/2)} u > k + d` with `d` from the iteration.
    pub iteration_sup_violations: usize,
}

pub fn verify_degiorgi(suite: &Suite, c_theorem: f64, c_lemma: f64, e: &ExponentSet) -> Result<DegiorgiVerification> {
    let rows: Vec<(bool, bool, bool)> = suite
        .probes
        .par_iter()
        .map(|p| {
            let u = &suite.fields[p.field];
            let d = degiorgi_d(u, &p.center, p.k, p.r, e, c_theorem)?;
            let tr = degiorgi_iterate(u, &p.center, p.k, p.r, e, c_lemma, DEFAULT_M_MAX)?;
            Ok((tr.sup_half > p.k + d, !tr.psi_bounded, !tr.sup_bound_holds))
        })
        .collect::<Result<_>>()?;
    Ok(DegiorgiVerification {
        c_theorem,
        c_lemma,
        evaluations: rows.len(),
        sup_violations: rows.iter().filter(|r| r.0).count(),
        psi_violations: rows.iter().filter(|r| r.1).count(),
        iteration_sup_violations: rows.iter().filter(|r| r.2).count(),
    })
}

/// A field vanishing on the half-space `(x − x0)·n ≤ 0` and growing like
/// `((x − x0)·n)^α` on the other side, with a smooth positive modulation.
pub fn half_vanishing_field(mask: &Arc<DomainMask>, x0: &Point, rng: &mut ChaCha8Rng) -> ScalarField {
    let dim = mask.dim();
    let mut n = [0.0f64; 3];
    loop {
        for v in n.iter_mut().take(dim) {
            *v = rng.gen_range(-1.0..1.0);
        }
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if len > 0.1 && len <= 1.0 {
            n.iter_mut().for_each(|v| *v /= len);
            break;
        }
    }
    let alpha = if rng.gen_bool(0.5) { 1.0 } else { 2.0 };
    let freq = [rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0)];
    let amp = rng.gen_range(0.0..0.5);
    ScalarField::from_fn(mask.clone(), |x| {
        let s = (x[0] - x0[0]) * n[0] + (x[1] - x0[1]) * n[1] + (x[2] - x0[2]) * n[2];
        if s <= 0.0 {
            return 0.0;
        }
        let m = 1.0 + amp * (freq[0] * x[0] + freq[1] * x[1] + freq[2] * x[2]).sin();
        s.powf(alpha) * m
    })
    .expect("finite field")
}

/// Poincaré constants of one half-vanishing field at two resolutions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareRow {
    pub field: usize,
    pub p_norm: f64,
    pub coarse: f64,
    pub fine: f64,
    /// `|fine − coarse| / coarse`.
    pub variation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareStudy {
    pub center: Point,
    pub r: f64,
    pub h: f64,
    pub rows: Vec<PoincareRow>,
    pub coarse_reports: Vec<crate::levelset::CheckReport>,
    pub max_variation: f64,
    pub all_finite: bool,
}

/// The lattice node deepest inside `mask`, and its distance to the boundary.
pub fn deepest_node(mask: &DomainMask) -> (Point, f64) {
    (0..mask.n_cells())
        .map(|c| (mask.cell_point(c), mask.node_distance(mask.cell_node(c))))
        .fold(([0.0; 3], f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
}

/// Evaluates the half-ball Poincaré constant on `n_fields` half-vanishing
/// fields at spacings `h` and `h/2`. `center` must be a node of the coarse
/// lattice so that both lattices split the ball the same way.
pub fn poincare_refinement(
    shape: &Shape,
    h: f64,
    center: &Point,
    r: f64,
    p_norms: &[f64],
    n_fields: usize,
    seed: u64,
) -> Result<PoincareStudy> {
    let coarse = Arc::new(build_domain(shape, h)?);
    let fine = Arc::new(build_domain(shape, h / 2.0)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut coarse_reports = Vec::new();
    for field in 0..n_fields {
        let mut twin = rng.clone();
        let uc = half_vanishing_field(&coarse, center, &mut rng);
        let uf = half_vanishing_field(&fine, center, &mut twin);
        for &p_norm in p_norms {
            let a = crate::levelset::check_poincare_half(&uc, center, r, p_norm)?;
            let b = crate::levelset::check_poincare_half(&uf, center, r, p_norm)?;
            rows.push(PoincareRow {
                field,
                p_norm,
                coarse: a.implied_constant,
                fine: b.implied_constant,
                variation: (b.implied_constant - a.implied_constant).abs() / a.implied_constant,
            });
            coarse_reports.push(a);
        }
    }
    Ok(PoincareStudy {
        center: *center,
        r,
        h,
        max_variation: rows.iter().map(|r| r.variation).fold(0.0, f64::max),
        all_finite: rows.iter().all(|r| r.coarse.is_finite() && r.fine.is_finite()),
        rows,
        coarse_reports,
    })
}
