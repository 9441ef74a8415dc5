//! Action `ℒ = ½σ²‖W‖² + 𝒬 − 𝒫`, the Nehari functional
//! `ℱ = σ²‖W‖² + q𝒬 − p𝒫`, their gradients and the flow multiplier.
//!
//! `𝒜W` is computed once per evaluation and shared by the values and both
//! gradients, so values and gradients always come from the same discretization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dot, GridProfile, GridSpec, ModelParams};
use crate::operator::{AveragingOperator, OperatorMode};

/// `Ψ_r(w) = r·sgn(w)·|w|^{r−1}`, with `Ψ_r(0) = 0`.
pub fn psi(w: f64, r: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    r * w.signum() * ((r - 1.0) * w.abs().ln()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FunctionalValues {
    pub action: f64,
    pub kinetic: f64,
    #[serde(rename = "Q")]
    pub q_energy: f64,
    #[serde(rename = "P")]
    pub p_energy: f64,
    pub constraint: f64,
}

impl FunctionalValues {
    pub fn from_parts(params: &ModelParams, norm2_sq: f64, q_energy: f64, p_energy: f64) -> Self {
        let kinetic = 0.5 * params.sigma2 * norm2_sq;
        Self {
            action: kinetic + q_energy - p_energy,
            kinetic,
            q_energy,
            p_energy,
            constraint: 2.0 * kinetic + params.q * q_energy - params.p * p_energy,
        }
    }

    /// Values of `ζW` from those of `W` via homogeneity of each term.
    pub fn scaled(&self, params: &ModelParams, zeta: f64) -> Self {
        let z = zeta.abs();
        let norm2_sq = 2.0 * self.kinetic / params.sigma2 * z * z;
        Self::from_parts(params, norm2_sq, self.q_energy * z.powf(params.q), self.p_energy * z.powf(params.p))
    }

    pub fn norm2_sq(&self, params: &ModelParams) -> f64 {
        2.0 * self.kinetic / params.sigma2
    }

    /// Natural magnitude of `ℱ`: `2σ²‖W‖² + q𝒬 + p𝒫`.
    pub fn constraint_scale(&self, params: &ModelParams) -> f64 {
        4.0 * self.kinetic + params.q * self.q_energy + params.p * self.p_energy
    }
}

/// `x ↦ x^e` for `x > 0`, with multiply-only paths for the integer and
/// half-integer exponents that dominate in practice.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Power {
    Int(i32),
    HalfInt(i32),
    General(f64),
}

impl Power {
    fn new(e: f64) -> Self {
        let twice = 2.0 * e;
        if e == e.round() && e.abs() <= 16.0 {
            Power::Int(e as i32)
        } else if twice == twice.round() && e.abs() <= 16.0 {
            Power::HalfInt((e - 0.5) as i32)
        } else {
            Power::General(e)
        }
    }

    #[inline(always)]
    fn eval(self, x: f64) -> f64 {
        match self {
            Power::Int(k) => small_powi(x, k),
            Power::HalfInt(k) => small_powi(x, k) * x.sqrt(),
            Power::General(e) => x.powf(e),
        }
    }
}

#[inline(always)]
fn small_powi(x: f64, k: i32) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        2 => x * x,
        3 => x * x * x,
        4 => {
            let x2 = x * x;
            x2 * x2
        }
        _ => x.powi(k),
    }
}

/// Pointwise nonlinear terms of one `𝒜W`: fills `Ψ_q(𝒜W)`, `Ψ_p(𝒜W)` and
/// returns `(𝒬, 𝒫)`.
pub(crate) fn nonlinear_terms(
    aw: &[f64],
    params: &ModelParams,
    h: f64,
    psi_q: &mut [f64],
    psi_p: &mut [f64],
) -> (f64, f64) {
    let (p, q) = (params.p, params.q);
    let run = |fq: &dyn Fn(f64) -> f64, fp: &dyn Fn(f64) -> f64, psi_q: &mut [f64], psi_p: &mut [f64]| {
        terms_with(aw, p, q, h, psi_q, psi_p, fq, fp)
    };
    match (Power::new(q - 1.0), Power::new(p - 1.0)) {
        // the exponent pairs used by the default sweep get fully inlined loops
        (Power::Int(2), Power::Int(3)) => terms_with(aw, p, q, h, psi_q, psi_p, |x| x * x, |x| x * x * x),
        (Power::HalfInt(0), Power::Int(2)) => terms_with(aw, p, q, h, psi_q, psi_p, f64::sqrt, |x| x * x),
        (Power::Int(1), Power::Int(3)) => terms_with(aw, p, q, h, psi_q, psi_p, |x| x, |x| x * x * x),
        (Power::General(_), Power::General(_)) => {
            terms_with(aw, p, q, h, psi_q, psi_p, |x| ((q - 1.0) * x.ln()).exp(), |x| ((p - 1.0) * x.ln()).exp())
        }
        (eq, ep) => run(&|x| eq.eval(x), &|x| ep.eval(x), psi_q, psi_p),
    }
}

/// `|a|^{r−1}` evaluators for `q` and `p`; zero samples need no special case
/// because both exponents are positive.
#[allow(clippy::too_many_arguments)]
#[inline(always)]
fn terms_with(
    aw: &[f64],
    p: f64,
    q: f64,
    h: f64,
    psi_q: &mut [f64],
    psi_p: &mut [f64],
    fq: impl Fn(f64) -> f64,
    fp: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let mut q_sum = 0.0;
    let mut p_sum = 0.0;
    for ((&a, pq), pp) in aw.iter().zip(psi_q.iter_mut()).zip(psi_p.iter_mut()) {
        let abs = a.abs();
        let aq1 = fq(abs);
        let ap1 = fp(abs);
        *pq = q * aq1.copysign(a);
        *pp = p * ap1.copysign(a);
        q_sum += abs * aq1;
        p_sum += abs * ap1;
    }
    (h * q_sum, h * p_sum)
}

/// Everything derived from one `𝒜W`.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub aw: Vec<f64>,
    pub psi_q: Vec<f64>,
    pub psi_p: Vec<f64>,
    pub values: FunctionalValues,
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub action: GridProfile,
    pub constraint: GridProfile,
    pub values: FunctionalValues,
}

impl Gradients {
    /// `λ = ⟨∂ℒ, ∂ℱ⟩ / ‖∂ℱ‖²`.
    pub fn multiplier(&self) -> Result<f64> {
        let h = self.action.spec().spacing();
        let denom = h * dot(self.constraint.values(), self.constraint.values());
        if !(denom > f64::MIN_POSITIVE) {
            return Err(Error::Degenerate("constraint gradient vanishes; multiplier undefined".into()));
        }
        Ok(h * dot(self.action.values(), self.constraint.values()) / denom)
    }

    /// `∂ℒ − λ∂ℱ`.
    pub fn projected(&self) -> Result<GridProfile> {
        let lambda = self.multiplier()?;
        let values = self.action.values().iter().zip(self.constraint.values()).map(|(a, c)| a - lambda * c).collect();
        Ok(GridProfile::from_raw(*self.action.spec(), values))
    }
}

/// Model parameters bound to a discretized operator.
#[derive(Debug)]
pub struct Functionals {
    params: ModelParams,
    op: AveragingOperator,
}

impl Functionals {
    pub fn new(params: ModelParams, spec: GridSpec, mode: OperatorMode) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, op: AveragingOperator::new(spec, mode)? })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn operator(&self) -> &AveragingOperator {
        &self.op
    }

    pub fn spec(&self) -> &GridSpec {
        self.op.spec()
    }

    pub fn evaluation(&self, w: &GridProfile) -> Result<Evaluation> {
        self.spec().check_same(w.spec())?;
        let n = w.len();
        let mut aw = vec![0.0; n];
        self.op.apply_into(w.values(), &mut aw);
        let mut psi_q = vec![0.0; n];
        let mut psi_p = vec![0.0; n];
        let h = self.spec().spacing();
        let (q_energy, p_energy) = nonlinear_terms(&aw, &self.params, h, &mut psi_q, &mut psi_p);
        let norm2_sq = h * dot(w.values(), w.values());
        let values = FunctionalValues::from_parts(&self.params, norm2_sq, q_energy, p_energy);
        Ok(Evaluation { aw, psi_q, psi_p, values })
    }

    pub fn evaluate(&self, w: &GridProfile) -> Result<FunctionalValues> {
        Ok(self.evaluation(w)?.values)
    }

    pub fn gradients(&self, w: &GridProfile) -> Result<Gradients> {
        let eval = self.evaluation(w)?;
        let n = w.len();
        let mut gq = vec![0.0; n];
        let mut gp = vec![0.0; n];
        self.op.apply_adjoint_into(&eval.psi_q, &mut gq);
        self.op.apply_adjoint_into(&eval.psi_p, &mut gp);
        let ModelParams { p, q, sigma2 } = self.params;
        let mut action = vec![0.0; n];
        let mut constraint = vec![0.0; n];
        for i in 0..n {
            let wi = w.values()[i];
            action[i] = sigma2 * wi + gq[i] - gp[i];
            constraint[i] = 2.0 * sigma2 * wi + q * gq[i] - p * gp[i];
        }
        let spec = *self.spec();
        Ok(Gradients {
            action: GridProfile::from_raw(spec, action),
            constraint: GridProfile::from_raw(spec, constraint),
            values: eval.values,
        })
    }

    /// `∂ℒ(W) = σ²W + 𝒜Ψ_q(𝒜W) − 𝒜Ψ_p(𝒜W)`, also the residual of the
    /// traveling wave equation.
    pub fn grad_action(&self, w: &GridProfile) -> Result<GridProfile> {
        Ok(self.gradients(w)?.action)
    }

    /// `∂ℱ(W) = 2σ²W + q𝒜Ψ_q(𝒜W) − p𝒜Ψ_p(𝒜W)`.
    pub fn grad_constraint(&self, w: &GridProfile) -> Result<GridProfile> {
        Ok(self.gradients(w)?.constraint)
    }

    pub fn multiplier(&self, w: &GridProfile) -> Result<f64> {
        self.gradients(w)?.multiplier()
    }
}

pub fn evaluate(w: &GridProfile, params: &ModelParams, mode: OperatorMode) -> Result<FunctionalValues> {
    Functionals::new(*params, *w.spec(), mode)?.evaluate(w)
}

pub fn grad_action(w: &GridProfile, params: &ModelParams, mode: OperatorMode) -> Result<GridProfile> {
    Functionals::new(*params, *w.spec(), mode)?.grad_action(w)
}

pub fn grad_constraint(w: &GridProfile, params: &ModelParams, mode: OperatorMode) -> Result<GridProfile> {
    Functionals::new(*params, *w.spec(), mode)?.grad_constraint(w)
}

pub fn multiplier(w: &GridProfile, params: &ModelParams, mode: OperatorMode) -> Result<f64> {
    Functionals::new(*params, *w.spec(), mode)?.multiplier(w)
}
