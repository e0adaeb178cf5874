//! The positivity threshold γ₀, γ-scans of the discrete plate problem, the
//! exhaustion/decomposition argument behind positivity on general domains,
//! and the interpolation and dilation experiments.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ExponentSet;
use crate::geometry::{build_domain, DomainMask, Point, Shape, ShapeTag};
use crate::linalg::SolveStats;
use crate::operator::{PlateOperator, ScalarField};

/// Default positivity tolerance, relative to `max u`.
pub const DEFAULT_TOL_POS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gamma0Variant {
    /// Exponent `2η / (ξ(θ − 1))`, the threshold as displayed.
    TwoEta,
    /// Exponent `4η / (ξ(θ − 1))`, the bound used to keep the exhausting
    /// thresholds from blowing up.
    FourEta,
}

impl Gamma0Variant {
    pub const ALL: [Gamma0Variant; 2] = [Gamma0Variant::TwoEta, Gamma0Variant::FourEta];

    pub fn exponent(self, e: &ExponentSet) -> f64 {
        let k = match self {
            Gamma0Variant::TwoEta => 2.0,
            Gamma0Variant::FourEta => 4.0,
        };
        k * e.eta / (e.xi * (e.theta - 1.0))
    }
}

/// `γ₀ = c^E · d^{E((2/t)(3 − N) c_bold + b_bold)} · (∫f)^{a_bold E}` with `E`
/// from the variant. Returns 0 for a zero source.
pub fn compute_gamma0(f_integral: f64, d_omega: f64, e: &ExponentSet, c: f64, variant: Gamma0Variant) -> Result<f64> {
    if !(f_integral >= 0.0) || !(d_omega > 0.0) || !(c > 0.0) {
        return Err(Error::Precondition(format!(
            "γ₀ needs ∫f ≥ 0, d > 0, c > 0; got ∫f = {f_integral}, d = {d_omega}, c = {c}"
        )));
    }
    if f_integral == 0.0 {
        return Ok(0.0);
    }
    let big = variant.exponent(e);
    let d_pow = big * ((2.0 / e.t) * (3.0 - e.n as f64) * e.c_bold + e.b_bold);
    Ok((big * c.ln() + d_pow * d_omega.ln() + e.a_bold * big * f_integral.ln()).exp())
}

/// One γ₀ value with everything needed to reproduce it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gamma0 {
    pub variant: Gamma0Variant,
    pub value: f64,
    pub c: f64,
    pub d_omega: f64,
    pub f_integral: f64,
}

pub fn gamma0_both(f_integral: f64, d_omega: f64, e: &ExponentSet, c: f64) -> Result<Vec<Gamma0>> {
    Gamma0Variant::ALL
        .iter()
        .map(|&variant| {
            Ok(Gamma0 {
                variant,
                value: compute_gamma0(f_integral, d_omega, e, c, variant)?,
                c,
                d_omega,
                f_integral,
            })
        })
        .collect()
}

/// `{0, 1, 2, 4, …, top}`: powers of two below `top`, then `top`.
pub fn doubling_grid(top: f64) -> Vec<f64> {
    let mut g = vec![0.0];
    let mut x = 1.0;
    while x < top {
        g.push(x);
        x *= 2.0;
    }
    if top > 0.0 {
        g.push(top);
    }
    g
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSummary {
    pub shape_tag: ShapeTag,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
    pub dim: usize,
    pub h: f64,
    pub n_cells: usize,
    pub diameter: f64,
}

impl From<&DomainMask> for DomainSummary {
    fn from(m: &DomainMask) -> Self {
        DomainSummary {
            shape_tag: m.shape_tag(),
            shape: m.shape().cloned(),
            dim: m.dim(),
            h: m.h(),
            n_cells: m.n_cells(),
            diameter: m.diameter(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub gamma: f64,
    pub min_u: f64,
    pub max_u: f64,
    /// `∫ f u`.
    pub energy: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// A positive energy forces a positive maximum.
    pub energy_sign_ok: bool,
}

impl ScanPoint {
    pub fn is_positive(&self, tol_pos: f64) -> bool {
        self.min_u >= -tol_pos * self.max_u
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaScanResult {
    pub points: Vec<ScanPoint>,
    pub gamma0: Vec<Gamma0>,
    pub gamma_star_empirical: Option<f64>,
    pub f_integral: f64,
    pub tol_pos: f64,
    pub domain: DomainSummary,
    /// False when some solve stopped short of the working precision.
    pub complete: bool,
}

impl GammaScanResult {
    pub fn gammas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gamma).collect()
    }

    pub fn min_u(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.min_u).collect()
    }

    pub fn energy_strictly_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].energy < w[0].energy)
    }

    pub fn gamma0_value(&self, variant: Gamma0Variant) -> Option<f64> {
        self.gamma0.iter().find(|g| g.variant == variant).map(|g| g.value)
    }
}

fn check_source(f: &ScalarField) -> Result<f64> {
    if f.min() < 0.0 {
        return Err(Error::Precondition("the source must be nonnegative".into()));
    }
    let fi = f.integral();
    if !(fi > 0.0) {
        return Err(Error::Precondition("the source must have positive integral".into()));
    }
    Ok(fi)
}

fn solve_all(op: &PlateOperator, f: &ScalarField, gammas: &[f64], tol: f64) -> Result<Vec<(ScalarField, SolveStats)>> {
    gammas.par_iter().map(|&g| op.solve_unchecked(g, f, tol)).collect()
}

/// Solves at every γ of the grid and records the sign of the solution.
pub fn scan_gamma(
    op: &PlateOperator,
    f: &ScalarField,
    gammas: &[f64],
    tol_pos: f64,
    e: &ExponentSet,
    c: f64,
    solver_tol: f64,
) -> Result<GammaScanResult> {
    let f_integral = check_source(f)?;
    if gammas.is_empty() || gammas[0] < 0.0 || gammas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("γ grid must be nonnegative and strictly increasing".into()));
    }
    let mask = op.mask();
    let solves = solve_all(op, f, gammas, solver_tol)?;
    let points: Vec<ScanPoint> = gammas
        .iter()
        .zip(&solves)
        .map(|(&gamma, (u, st))| {
            let energy = u.inner(f);
            let max_u = u.max();
            ScanPoint {
                gamma,
                min_u: u.min(),
                max_u,
                energy,
                iterations: st.iterations,
                residual: st.final_residual,
                converged: st.at_precision_limit(),
                energy_sign_ok: !(energy > 0.0) || max_u > 0.0,
            }
        })
        .collect();
    let gamma_star_empirical = points.iter().find(|p| p.is_positive(tol_pos)).map(|p| p.gamma);
    Ok(GammaScanResult {
        complete: points.iter().all(|p| p.converged),
        gamma0: gamma0_both(f_integral, mask.diameter(), e, c)?,
        gamma_star_empirical,
        f_integral,
        tol_pos,
        domain: DomainSummary::from(&**mask),
        points,
    })
}

/// Nested cell sets `Ω₁ ⊂ Ω₂ ⊂ … ⊂ Ω_M` of one mask.
#[derive(Clone, Debug, PartialEq)]
pub struct Exhaustion {
    /// Distance thresholds, when the sets are interior-distance super-level
    /// sets; the last one is 0.
    pub deltas: Vec<f64>,
    pub members: Vec<Vec<bool>>,
}

impl Exhaustion {
    /// Checks that the sets are non-empty and strictly nested.
    pub fn from_members(mask: &DomainMask, members: Vec<Vec<bool>>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Precondition("empty exhaustion".into()));
        }
        for m in &members {
            if m.len() != mask.n_cells() {
                return Err(Error::DimensionMismatch {
                    expected: mask.n_cells(),
                    got: m.len(),
                });
            }
        }
        if !members[0].iter().any(|&b| b) {
            return Err(Error::Precondition("first exhaustion set is empty".into()));
        }
        for w in members.windows(2) {
            let inside = w[0].iter().zip(&w[1]).all(|(&a, &b)| !a || b);
            let grows = w[0].iter().zip(&w[1]).any(|(&a, &b)| !a && b);
            if !inside || !grows {
                return Err(Error::Precondition("exhaustion sets must be strictly nested".into()));
            }
        }
        Ok(Exhaustion {
            deltas: Vec::new(),
            members,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn size(&self, m: usize) -> usize {
        self.members[m].iter().filter(|&&b| b).count()
    }
}

/// `Ω_m = {dist(x, ∂Ω) > δ_m}` with `δ_m = δ₀ / 2^{m−1}` for `m < M`, and
/// `Ω_M = Ω`.
pub fn default_exhaustion(mask: &DomainMask, levels: usize, delta0: f64) -> Result<Exhaustion> {
    if levels == 0 || !(delta0 > 0.0) {
        return Err(Error::Precondition("need at least one level and δ₀ > 0".into()));
    }
    let mut deltas: Vec<f64> = (0..levels - 1).map(|m| delta0 / 2f64.powi(m as i32)).collect();
    deltas.push(0.0);
    let members = deltas
        .iter()
        .map(|&d| (0..mask.n_cells()).map(|c| d == 0.0 || mask.cell_interior_distance(c) > d).collect())
        .collect();
    let mut ex = Exhaustion::from_members(mask, members)?;
    ex.deltas = deltas;
    Ok(ex)
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub exhaustion: Exhaustion,
    /// `S = Σ_m χ_m / m²`.
    pub weights: ScalarField,
    /// `g_m = (χ_m / m²) f / S`.
    pub parts: Vec<ScalarField>,
}

impl Decomposition {
    /// `max |Σ_m (χ_m/m²)/S − 1|` over cells with `S > 0`.
    pub fn partition_residual(&self) -> f64 {
        let s = self.weights.values();
        (0..s.len())
            .filter(|&c| s[c] > 0.0)
            .map(|c| {
                let sum: f64 = self
                    .exhaustion
                    .members
                    .iter()
                    .enumerate()
                    .filter(|(_, mem)| mem[c])
                    .map(|(m, _)| 1.0 / ((m + 1) as f64).powi(2) / s[c])
                    .sum();
                (sum - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max |Σ g_m − f| / max |f|`.
    pub fn sum_residual(&self, f: &ScalarField) -> f64 {
        let scale = f.max_abs();
        if scale == 0.0 {
            return self.parts.iter().map(|g| g.max_abs()).fold(0.0, f64::max);
        }
        (0..f.len())
            .map(|c| (self.parts.iter().map(|g| g.value(c)).sum::<f64>() - f.value(c)).abs())
            .fold(0.0, f64::max)
            / scale
    }
}

pub fn decompose_source(f: &ScalarField, ex: &Exhaustion) -> Result<Decomposition> {
    if f.min() < 0.0 {
        return Err(Error::Precondition("the source must be nonnegative".into()));
    }
    let n = f.len();
    let union = ex.members.last().expect("non-empty exhaustion");
    if union.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: union.len(),
        });
    }
    let escaped = (0..n).filter(|&c| f.value(c) != 0.0 && !union[c]).count();
    if escaped > 0 {
        return Err(Error::SourceEscapesExhaustion(escaped));
    }
    let w = |m: usize| 1.0 / ((m + 1) as f64).powi(2);
    let s: Vec<f64> = (0..n)
        .map(|c| ex.members.iter().enumerate().filter(|(_, mem)| mem[c]).map(|(m, _)| w(m)).sum())
        .collect();
    let parts = ex
        .members
        .iter()
        .enumerate()
        .map(|(m, mem)| {
            let vals = (0..n)
                .map(|c| if mem[c] { w(m) / s[c] * f.value(c) } else { 0.0 })
                .collect();
            f.with_values(vals)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Decomposition {
        exhaustion: ex.clone(),
        weights: f.with_values(s)?,
        parts,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionReport {
    pub gamma: f64,
    /// `‖solve(f) − Σ_m solve(g_m)‖∞ / ‖solve(f)‖∞`.
    pub relative_gap: f64,
    /// The same gap for the partial sums `Σ_{i≤m}`.
    pub partial_gaps: Vec<f64>,
    /// Minimum of each part's solution.
    pub part_minima: Vec<f64>,
    pub converged: bool,
}

pub fn superposition_check(
    op: &PlateOperator,
    gamma: f64,
    f: &ScalarField,
    dec: &Decomposition,
    solver_tol: f64,
) -> Result<SuperpositionReport> {
    let mut rhs: Vec<&ScalarField> = vec![f];
    rhs.extend(dec.parts.iter());
    let solves: Vec<(ScalarField, SolveStats)> =
        rhs.par_iter().map(|g| op.solve(gamma, g, solver_tol)).collect::<Result<_>>()?;
    let full = &solves[0].0;
    let scale = full.max_abs().max(f64::MIN_POSITIVE);
    let mut acc = vec![0.0; full.len()];
    let mut partial_gaps = Vec::with_capacity(dec.parts.len());
    for (u, _) in &solves[1..] {
        for (a, v) in acc.iter_mut().zip(u.values()) {
            *a += v;
        }
        let gap = acc
            .iter()
            .zip(full.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        partial_gaps.push(gap / scale);
    }
    Ok(SuperpositionReport {
        gamma,
        relative_gap: *partial_gaps.last().unwrap_or(&0.0),
        partial_gaps,
        part_minima: solves[1..].iter().map(|(u, _)| u.min()).collect(),
        converged: solves.iter().all(|(_, s)| s.at_precision_limit()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationVerdict {
    /// Positive at both endpoints and at every interior τ.
    PositiveThroughout,
    /// Positive at both endpoints but not at some interior τ.
    InteriorLoss,
    /// One of the endpoint solutions is not positive.
    EndpointHypothesisFails,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationResult {
    pub taus: Vec<f64>,
    pub gamma_taus: Vec<f64>,
    pub min_w: Vec<f64>,
    pub max_w: Vec<f64>,
    pub tol_pos: f64,
    pub verdict: InterpolationVerdict,
}

/// Solves at `γ_τ = τ γ₀` for `n_tau` uniform `τ ∈ [0, 1]`.
pub fn interpolation_scan(
    op: &PlateOperator,
    f: &ScalarField,
    gamma0: f64,
    n_tau: usize,
    tol_pos: f64,
    solver_tol: f64,
) -> Result<InterpolationResult> {
    check_source(f)?;
    if n_tau < 2 || !(gamma0 >= 0.0) {
        return Err(Error::Precondition("need n_tau ≥ 2 and γ₀ ≥ 0".into()));
    }
    let taus: Vec<f64> = (0..n_tau).map(|i| i as f64 / (n_tau - 1) as f64).collect();
    let gamma_taus: Vec<f64> = taus.iter().map(|t| t * gamma0).collect();
    let solves = gamma_taus
        .par_iter()
        .map(|&g| op.solve(g, f, solver_tol))
        .collect::<Result<Vec<_>>>()?;
    let min_w: Vec<f64> = solves.iter().map(|(u, _)| u.min()).collect();
    let max_w: Vec<f64> = solves.iter().map(|(u, _)| u.max()).collect();
    let pos: Vec<bool> = min_w.iter().zip(&max_w).map(|(lo, hi)| *lo >= -tol_pos * hi).collect();
    let verdict = if !pos[0] || !pos[n_tau - 1] {
        InterpolationVerdict::EndpointHypothesisFails
    } else if pos.iter().all(|&b| b) {
        InterpolationVerdict::PositiveThroughout
    } else {
        InterpolationVerdict::InteriorLoss
    };
    Ok(InterpolationResult {
        taus,
        gamma_taus,
        min_w,
        max_w,
        tol_pos,
        verdict,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub s: f64,
    pub h: f64,
    pub gamma: f64,
    /// `max |v(s x) − u(x)| / max |u|`.
    pub relative_gap: f64,
    pub n_cells: usize,
}

/// Solves `(Δ² − γΔ) u = g` on `Ω` at cell size `h` and
/// `(Δ² − (γ/s²)Δ) v = s⁻⁴ g(·/s)` on `sΩ` at cell size `s h`, then compares
/// `v(s x)` with `u(x)`.
pub fn dilation_check<G>(shape: &Shape, h: f64, s: f64, gamma: f64, g: G, solver_tol: f64) -> Result<DilationReport>
where
    G: Fn(&Point) -> f64,
{
    if !(s > 0.0) {
        return Err(Error::Precondition(format!("dilation factor must be positive, got {s}")));
    }
    let base = Arc::new(build_domain(shape, h)?);
    let big = Arc::new(build_domain(&shape.dilated(s), s * h)?);
    let f = ScalarField::from_fn(base.clone(), &g)?;
    let fs = ScalarField::from_fn(big.clone(), |y| g(&[y[0] / s, y[1] / s, y[2] / s]) / s.powi(4))?;
    let (u, _) = PlateOperator::assemble(base.clone())?.solve(gamma, &f, solver_tol)?;
    let (v, _) = PlateOperator::assemble(big.clone())?.solve(gamma / (s * s), &fs, solver_tol)?;
    let scale = u.max_abs().max(f64::MIN_POSITIVE);
    let mut gap: f64 = 0.0;
    for c in 0..base.n_cells() {
        let x = base.cell_point(c);
        let y = [s * x[0], s * x[1], s * x[2]];
        let vy = big
            .cell_at(&y)
            .map(|k| v.value(k))
            .ok_or_else(|| Error::Precondition("dilated lattice does not cover the base lattice".into()))?;
        gap = gap.max((vy - u.value(c)).abs());
    }
    Ok(DilationReport {
        s,
        h,
        gamma,
        relative_gap: gap / scale,
        n_cells: base.n_cells(),
    })
}
