//! Maximization of the action along rays and projection onto the Nehari
//! manifold `M_K = {W ≠ 0 : ℱ(W) = 0}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{FunctionalValues, Functionals};
use crate::grid::{norm2_sq, GridProfile, ModelParams};
use crate::operator::OperatorMode;

/// Profiles with `𝒫(W)` below this are treated as `𝒜W = 0`.
pub const DEGENERATE_P: f64 = 1e-30;

/// Relative tolerance for `ℱ(W) = 0`, measured against `2σ²‖W‖² + q𝒬 + p𝒫`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

pub const DEFAULT_RAY_TOL: f64 = 1e-15;

/// Coefficients of `λ_c(ξ) = c₂ξ² + c_qξ^q − c_pξ^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayCoefficients {
    pub c2: f64,
    pub cq: f64,
    pub cp: f64,
}

impl RayCoefficients {
    pub fn new(c2: f64, cq: f64, cp: f64) -> Result<Self> {
        for (name, v) in [("c2", c2), ("cq", cq), ("cp", cp)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidCoefficients(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { c2, cq, cp })
    }

    /// `(½σ²‖W‖², 𝒬(W), 𝒫(W))`.
    pub fn from_values(values: &FunctionalValues) -> Result<Self> {
        Self::new(values.kinetic, values.q_energy, values.p_energy)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { c2: a * self.c2, cq: a * self.cq, cp: a * self.cp }
    }

    pub fn lambda(&self, xi: f64, p: f64, q: f64) -> f64 {
        self.c2 * xi * xi + self.cq * xi.powf(q) - self.cp * xi.powf(p)
    }

    /// `f_c(ξ) = ξλ'_c(ξ) = 2c₂ξ² + qc_qξ^q − pc_pξ^p`.
    pub fn f(&self, xi: f64, p: f64, q: f64) -> f64 {
        2.0 * self.c2 * xi * xi + q * self.cq * xi.powf(q) - p * self.cp * xi.powf(p)
    }

    fn f_scale(&self, xi: f64, p: f64, q: f64) -> f64 {
        2.0 * self.c2 * xi * xi + q * self.cq * xi.powf(q) + p * self.cp * xi.powf(p)
    }

    /// Enclosure of the maximizer obtained from `f_c(ξ̄) = 0`.
    pub fn bracket(&self, p: f64, q: f64) -> (f64, f64) {
        let pc = p * self.cp;
        let lo = (2.0 * self.c2 / pc).powf(1.0 / (p - 2.0)).max((q * self.cq / pc).powf(1.0 / (p - q)));
        let hi = (4.0 * self.c2 / pc).powf(1.0 / (p - 2.0)).max((2.0 * q * self.cq / pc).powf(1.0 / (p - q)));
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayMaximum {
    pub xi: f64,
    pub value: f64,
    pub bracket: (f64, f64),
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p > 2.0 && q > 1.0 && q < p && p.is_finite()) {
        return Err(Error::InvalidParams(format!("need p > 2 and 1 < q < p, got p={p}, q={q}")));
    }
    Ok(())
}

/// Unique positive maximizer of `λ_c`, located by bisection of `f_c` on the
/// a-priori bracket until `|f_c| ≤ tol·(2c₂ξ² + qc_qξ^q + pc_pξ^p)`.
pub fn ray_maximum(c: &RayCoefficients, p: f64, q: f64, tol: f64) -> Result<RayMaximum> {
    check_exponents(p, q)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    let c = RayCoefficients::new(c.c2, c.cq, c.cp)?;
    let bracket = c.bracket(p, q);
    let (mut lo, mut hi) = bracket;
    let (f_lo, f_hi) = (c.f(lo, p, q), c.f(hi, p, q));
    // at an endpoint two terms may balance exactly, leaving a rounding-level sign
    let slack = |xi: f64| 64.0 * f64::EPSILON * c.f_scale(xi, p, q);
    if f_lo < -slack(lo) || f_hi > slack(hi) || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::BracketFailure { lo, hi });
    }
    let xi = if f_lo <= 0.0 {
        lo
    } else if f_hi >= 0.0 {
        hi
    } else {
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let fm = c.f(mid, p, q);
            if fm.abs() <= tol * c.f_scale(mid, p, q) || hi - lo <= 2.0 * f64::EPSILON * hi {
                break;
            }
            if fm > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        mid
    };
    let value = c.lambda(xi, p, q);
    if !(value > 0.0) {
        return Err(Error::InvalidCoefficients(format!("ray maximum λ_c(ξ̄) = {value} is not positive")));
    }
    Ok(RayMaximum { xi, value, bracket })
}

pub fn ray_maximizer(c: &RayCoefficients, p: f64, q: f64, tol: f64) -> Result<f64> {
    Ok(ray_maximum(c, p, q, tol)?.xi)
}

/// The scaling `ζ̄(W)` that carries `W` onto `M_K`, from already computed values.
pub fn projection_factor(values: &FunctionalValues, params: &ModelParams) -> Result<f64> {
    if !(values.p_energy >= DEGENERATE_P) {
        return Err(Error::Degenerate(format!(
            "P(W) = {:e} below {DEGENERATE_P:e}; projection onto the Nehari manifold undefined",
            values.p_energy
        )));
    }
    let c = RayCoefficients::from_values(values)?;
    ray_maximizer(&c, params.p, params.q, DEFAULT_RAY_TOL)
}

impl Functionals {
    /// `(ζ̄W, ζ̄)`.
    pub fn project_to_nehari(&self, w: &GridProfile) -> Result<(GridProfile, f64)> {
        let values = self.evaluate(w)?;
        let zeta = projection_factor(&values, self.params())?;
        Ok((w.scaled(zeta), zeta))
    }

    pub fn on_nehari(&self, w: &GridProfile) -> Result<bool> {
        Ok(is_on_nehari(&self.evaluate(w)?, self.params()))
    }

    pub fn nehari_estimates(&self, w: &GridProfile) -> Result<NehariReport> {
        let grads = self.gradients(w)?;
        let values = grads.values;
        let params = self.params();
        if !is_on_nehari(&values, params) {
            return Err(Error::InvalidConfig(format!(
                "profile is not on the Nehari manifold: F = {:e}, scale = {:e}",
                values.constraint,
                values.constraint_scale(params)
            )));
        }
        let aw = self.operator().apply(w)?;
        let dfw = crate::grid::inner(&grads.constraint, w)?;
        Ok(NehariReport::new(params, &values, norm2_sq(w), aw.max_abs(), dfw))
    }
}

pub fn is_on_nehari(values: &FunctionalValues, params: &ModelParams) -> bool {
    values.p_energy > 0.0 && values.constraint.abs() <= MEMBERSHIP_TOL * values.constraint_scale(params)
}

pub fn project_to_nehari(w: &GridProfile, params: &ModelParams, mode: OperatorMode) -> Result<(GridProfile, f64)> {
    Functionals::new(*params, *w.spec(), mode)?.project_to_nehari(w)
}

pub fn nehari_estimates(w: &GridProfile, params: &ModelParams, mode: OperatorMode) -> Result<NehariReport> {
    Functionals::new(*params, *w.spec(), mode)?.nehari_estimates(w)
}

/// One inequality `lhs ≤ rhs` of the Nehari estimate suite.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateCheck {
    pub label: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; negative beyond the slack means a violation.
    pub margin: f64,
    pub holds: bool,
}

/// Explicit-constant versions of the six Nehari-manifold estimates.
#[derive(Debug, Clone, Serialize)]
pub struct NehariReport {
    pub checks: Vec<EstimateCheck>,
    pub amplitude: f64,
    pub amplitude_threshold: f64,
}

impl NehariReport {
    fn new(params: &ModelParams, v: &FunctionalValues, w_sq: f64, amplitude: f64, dfw: f64) -> Self {
        let ModelParams { p, q, sigma2 } = *params;
        let thr = params.amplitude_threshold();
        let kin = sigma2 * (0.5 - 1.0 / p);
        let action = v.action;
        // identities that use ℱ = 0 are off by at most |ℱ|
        let slack_abs = v.constraint.abs();
        let mut checks = Vec::new();
        let mut push = |label: &'static str, lhs: f64, rhs: f64| {
            let slack = slack_abs + 1e-9 * (lhs.abs() + rhs.abs());
            checks.push(EstimateCheck { label, lhs, rhs, margin: rhs - lhs, holds: lhs <= rhs + slack });
        };
        push("(i) (q/p)^{2/(p-q)} <= |W|_2^2", thr * thr, w_sq);
        push("(i) |W|_2^2 <= L / (sigma2 (1/2 - 1/p))", w_sq, action / kin);
        push("(ii) (q/p)^{1/(p-q)} <= |AW|_inf", thr, amplitude);
        push("(ii) |AW|_inf^2 <= |W|_2^2 <= L / (sigma2 (1/2 - 1/p))", amplitude * amplitude, w_sq.min(action / kin));
        push("(iii) sigma2 (1/2 - 1/p) (q/p)^{2/(p-q)} <= L", kin * thr * thr, action);
        push("(iv) sigma2 (q/p)^{2/(p-q)} <= p P", sigma2 * thr * thr, p * v.p_energy);
        push("(iv) P <= max(2/(p-2), q/(p-q)) L", v.p_energy, (2.0 / (p - 2.0)).max(q / (p - q)) * action);
        push("(v) Q <= p/(p-q) L", v.q_energy, p / (p - q) * action);
        push("(vi) <dF(W), W> <= -(p-2) sigma2 |W|_2^2", dfw, -(p - 2.0) * sigma2 * w_sq);
        Self { checks, amplitude, amplitude_threshold: thr }
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &EstimateCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}
