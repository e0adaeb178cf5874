//! The exponent bundle shared by the level estimates, the De Giorgi
//! iteration and the positivity threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All exponents derived from `(N, t, p, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    #[serde(rename = "N")]
    pub n: usize,
    pub t: f64,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub s_star: f64,
    pub beta: f64,
    pub theta: f64,
    pub xi: f64,
    pub eta: f64,
    pub mu: f64,
    pub a_bold: f64,
    pub b_bold: f64,
    pub c_bold: f64,
}

/// Sobolev-type exponent `s = 2qN(p−1) / (N(2p−q) + 2q(p−1))`.
pub fn sobolev_s(n: usize, p: f64, q: f64) -> f64 {
    let nf = n as f64;
    2.0 * q * nf * (p - 1.0) / (nf * (2.0 * p - q) + 2.0 * q * (p - 1.0))
}

/// Larger root of `θ² − θ/p − β = 0`.
pub fn theta_root(p: f64, beta: f64) -> f64 {
    (1.0 / p + (1.0 / (p * p) + 4.0 * beta).sqrt()) / 2.0
}

/// Default `t` for dimension `n`: 5 in 2D, 6 in 3D.
pub fn default_t(n: usize) -> f64 {
    if n == 3 {
        6.0
    } else {
        5.0
    }
}

pub const DEFAULT_P: f64 = 2.0;
pub const DEFAULT_Q: f64 = 3.0;

pub fn derive_exponents(n: usize, t: f64, p: f64, q: f64) -> Result<ExponentSet> {
    if !(2..=3).contains(&n) {
        return Err(Error::Precondition(format!("dimension must be 2 or 3, got {n}")));
    }
    let nf = n as f64;
    if !(t > nf) || !t.is_finite() {
        return Err(Error::Precondition(format!("t must exceed N = {n}, got {t}")));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Precondition(format!("p must exceed 1, got {p}")));
    }
    if !(q > 2.0 && q < 2.0 * p) {
        return Err(Error::Precondition(format!("q must lie in (2, 2p) = (2, {}), got {q}", 2.0 * p)));
    }
    let s = sobolev_s(n, p, q);
    if !(s > 1.0 && s < nf) {
        return Err(Error::InadmissibleExponents { s, n });
    }
    let s_star = nf * s / (nf - s);
    let beta = 1.0 - 2.0 / q + (1.0 - s / t) * (s_star / s) * (2.0 * p - q) / (p * q);
    let theta = theta_root(p, beta);
    if !(theta > 1.0) {
        return Err(Error::DegenerateExponents(theta));
    }
    Ok(ExponentSet::from_parts(n, t, p, q, s, s_star, beta, theta, 1.0, beta / theta))
}

/// The default bundle for dimension `n`.
pub fn default_exponents(n: usize) -> Result<ExponentSet> {
    derive_exponents(n, default_t(n), DEFAULT_P, DEFAULT_Q)
}

impl ExponentSet {
    #[allow(clippy::too_many_arguments)]
    fn from_parts(
        n: usize,
        t: f64,
        p: f64,
        q: f64,
        s: f64,
        s_star: f64,
        beta: f64,
        theta: f64,
        xi: f64,
        eta: f64,
    ) -> Self {
        let nf = n as f64;
        let mu = (2.0 * xi * (p - 1.0) / p + 2.0 * eta) / (theta - 1.0);
        let a_bold = xi * (theta - 1.0) / (2.0 * eta) + xi * (p - 1.0) / (2.0 * eta * p);
        let b_bold = (xi / eta + nf / 2.0) * (theta - 1.0);
        let c_bold = (xi / eta) * (p - 1.0) / p;
        ExponentSet {
            n,
            t,
            p,
            q,
            s,
            s_star,
            beta,
            theta,
            xi,
            eta,
            mu,
            a_bold,
            b_bold,
            c_bold,
        }
    }

    /// The same bundle with `ξ` and `η` multiplied by `lambda` and the
    /// dependent exponents recomputed.
    pub fn rescaled(&self, lambda: f64) -> Self {
        Self::from_parts(
            self.n,
            self.t,
            self.p,
            self.q,
            self.s,
            self.s_star,
            self.beta,
            self.theta,
            lambda * self.xi,
            lambda * self.eta,
        )
    }

    /// Homogeneity degree of the De Giorgi increment in `(u, k)`.
    pub fn degiorgi_degree(&self) -> f64 {
        self.xi * (self.p - 1.0) / (self.eta * self.p) + self.xi * (self.theta - 1.0) / self.eta
    }
}

/// Residuals of the algebraic relations an [`ExponentSet`] must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentCheck {
    /// `|θ² − θ/p − β|`.
    pub quadratic_residual: f64,
    /// `|ξ/p + η − θξ|`.
    pub first_system_residual: f64,
    /// `|βξ − θη|`.
    pub second_system_residual: f64,
    /// Relative gap between `Ns/(N−s)` and `2q(p−1)/(2p−q)`.
    pub s_star_residual: f64,
    pub theta_positive: bool,
    pub theta_gt_one: bool,
    pub a_bold_lt_one: bool,
}

impl ExponentCheck {
    pub fn is_valid(&self, tol: f64) -> bool {
        self.quadratic_residual <= tol
            && self.first_system_residual <= tol
            && self.second_system_residual <= tol
            && self.s_star_residual <= tol
            && self.theta_gt_one
            && self.a_bold_lt_one
    }
}

pub fn validate_exponents(e: &ExponentSet) -> ExponentCheck {
    let closed = 2.0 * e.q * (e.p - 1.0) / (2.0 * e.p - e.q);
    ExponentCheck {
        quadratic_residual: (e.theta * e.theta - e.theta / e.p - e.beta).abs(),
        first_system_residual: (e.xi / e.p + e.eta - e.theta * e.xi).abs(),
        second_system_residual: (e.beta * e.xi - e.theta * e.eta).abs(),
        s_star_residual: (e.s_star - closed).abs() / closed.abs(),
        theta_positive: e.theta > 0.0,
        theta_gt_one: e.theta > 1.0,
        a_bold_lt_one: e.a_bold < 1.0,
    }
}

/// `k` admissible values of `q` for the given `(N, p)`: interior points of
/// the open interval where `2 < q < 2p` and `1 < s < N`.
pub fn admissible_q(n: usize, p: f64, k: usize) -> Vec<f64> {
    let nf = n as f64;
    // s = 1 at q = 2pN / (2(p−1)(N−1) + N); s grows with q
    let q_s = 2.0 * p * nf / (2.0 * (p - 1.0) * (nf - 1.0) + nf);
    let lo = q_s.max(2.0);
    let hi = 2.0 * p;
    (1..=k).map(|i| lo + (hi - lo) * i as f64 / (k + 1) as f64).collect()
}

/// Summary of a sweep over an admissible `(t, p, q)` grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub points: usize,
    pub rejected: usize,
    pub theta_violations: usize,
    pub a_bold_violations: usize,
    pub max_quadratic_residual: f64,
    pub max_system_residual: f64,
    pub max_s_star_residual: f64,
    pub min_theta: f64,
    pub max_a_bold: f64,
}

/// Derives and validates the bundle on a `k × k × k` grid with
/// `t ∈ (N, N+10)`, `p ∈ [1.1, 5)` and admissible `q`.
pub fn sweep_exponents(n: usize, k: usize) -> SweepReport {
    let nf = n as f64;
    let mut rep = SweepReport {
        n,
        min_theta: f64::INFINITY,
        max_a_bold: f64::NEG_INFINITY,
        ..Default::default()
    };
    for i in 0..k {
        let t = nf + 0.25 + 9.5 * i as f64 / k.max(1) as f64;
        for j in 0..k {
            let p = 1.1 + 3.9 * j as f64 / k.max(1) as f64;
            for q in admissible_q(n, p, k) {
                rep.points += 1;
                let e = match derive_exponents(n, t, p, q) {
                    Ok(e) => e,
                    Err(Error::DegenerateExponents(theta)) => {
                        rep.theta_violations += 1;
                        rep.min_theta = rep.min_theta.min(theta);
                        continue;
                    }
                    Err(_) => {
                        rep.rejected += 1;
                        continue;
                    }
                };
                let c = validate_exponents(&e);
                rep.max_quadratic_residual = rep.max_quadratic_residual.max(c.quadratic_residual);
                rep.max_system_residual = rep
                    .max_system_residual
                    .max(c.first_system_residual)
                    .max(c.second_system_residual);
                rep.max_s_star_residual = rep.max_s_star_residual.max(c.s_star_residual);
                rep.min_theta = rep.min_theta.min(e.theta);
                rep.max_a_bold = rep.max_a_bold.max(e.a_bold);
                if !c.theta_gt_one {
                    rep.theta_violations += 1;
                }
                if !c.a_bold_lt_one {
                    rep.a_bold_violations += 1;
                }
            }
        }
    }
    rep
}
