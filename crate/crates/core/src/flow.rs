//! Discrete constrained gradient flow for `ℒ` on the Nehari manifold.
//!
//! Each iteration is an explicit Euler step along `−(∂ℒ − λ∂ℱ)` (tangential
//! to `M_K`) followed by a radial correction, either the first-order
//! `W ↦ (1 + Δτ·ℱ(W))W` or the exact rescaling `W ↦ ζ̄(W)W`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{nonlinear_terms, FunctionalValues, Functionals};
use crate::grid::{dot, GridProfile, GridSpec, ModelParams};
use crate::nehari::projection_factor;
use crate::operator::OperatorMode;
use crate::shape;

/// Per-step clamp of the first-order radial factor `1 + Δτ·ℱ`.
pub const RADIAL_FACTOR_RANGE: (f64, f64) = (0.5, 2.0);

/// Accepted steps may raise the action by at most this much.
pub const DESCENT_SLACK: f64 = 1e-10;

/// Relative spread `max W − min W ≤ 1e-8·‖W‖_∞` classifies a profile as constant.
/// Step halvings granted to a stalled run before it stops as stalled.
pub const MAX_STALL_HALVINGS: usize = 4;
pub const CONSTANT_SPREAD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionMode {
    #[default]
    PaperRadial,
    ExactNehari,
}

impl FromStr for ProjectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "paper-radial" => Ok(ProjectionMode::PaperRadial),
            "exact" | "exact-nehari" => Ok(ProjectionMode::ExactNehari),
            other => Err(Error::InvalidConfig(format!("unknown projection mode '{other}'"))),
        }
    }
}

impl fmt::Display for ProjectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProjectionMode::PaperRadial => "paper",
            ProjectionMode::ExactNehari => "exact",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialData {
    /// `exp(−φ²)`.
    #[default]
    Gaussian,
    /// `exp(−(φ − φ₀)²)`.
    GaussianAt(f64),
    Constant(f64),
    /// A Gaussian bump of random width, height and sign, centred on a random
    /// cell boundary; drawn from the configured seed.
    RandomBump,
    /// Samples on the solver grid.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub dtau: f64,
    pub max_iters: usize,
    pub tol_grad: f64,
    pub tol_constraint: f64,
    pub operator_mode: OperatorMode,
    pub projection_mode: ProjectionMode,
    pub init: InitialData,
    pub stall_detection: bool,
    /// Flow time without a 1% residual improvement after which a run is
    /// declared stalled.
    pub stall_window: f64,
    /// Restart once from a random bump when non-constant data collapses onto
    /// the constant branch.
    pub restart_on_constant: bool,
    pub seed: u64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dtau: 5e-4,
            max_iters: 2_000_000,
            tol_grad: 1e-8,
            tol_constraint: 1e-10,
            operator_mode: OperatorMode::Quadrature,
            projection_mode: ProjectionMode::PaperRadial,
            init: InitialData::Gaussian,
            stall_detection: true,
            stall_window: 100.0,
            restart_on_constant: true,
            seed: 0,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dtau > 0.0 && self.dtau.is_finite()) {
            return Err(Error::InvalidConfig(format!("dtau must be positive, got {}", self.dtau)));
        }
        if !(self.tol_grad > 0.0 && self.tol_constraint > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if !(self.stall_window > 0.0) {
            return Err(Error::InvalidConfig("stall window must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    NonConstant,
    Constant,
    NotConverged,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::NonConstant => "NonConstant",
            Classification::Constant => "Constant",
            Classification::NotConverged => "NotConverged",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    Converged,
    MaxIters,
    Stalled,
    StepCollapse,
}

/// Diagnostics accumulated along one run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RunStats {
    /// Largest action increase over accepted steps.
    pub max_action_increase: f64,
    /// Largest `|ℱ|` after a radial correction.
    pub max_abs_constraint: f64,
    pub rejected_steps: usize,
    pub dtau_halvings: usize,
    pub flow_time: f64,
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub params: ModelParams,
    pub spec: GridSpec,
    /// Candidate `ℓ_K`.
    pub ell: f64,
    pub values: FunctionalValues,
    /// `‖∂ℒ − λ∂ℱ‖₂`.
    pub residual: f64,
    /// `‖∂ℒ‖₂`, the traveling-wave residual.
    pub tw_residual: f64,
    pub multiplier: f64,
    pub iterations: usize,
    /// `‖𝒜W‖_∞`.
    pub amplitude: f64,
    pub converged: bool,
    pub classification: Classification,
    pub stop: StopReason,
    pub dtau_final: f64,
    pub stats: RunStats,
}

/// Flat record written as the run summary JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub sigma2: f64,
    pub p: f64,
    pub q: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub dtau_final: f64,
    pub iterations: usize,
    pub action: f64,
    #[serde(rename = "Q")]
    pub q_energy: f64,
    #[serde(rename = "P")]
    pub p_energy: f64,
    pub kinetic: f64,
    pub constraint: f64,
    pub residual: f64,
    pub amplitude: f64,
    pub classification: String,
    pub converged: bool,
    pub multiplier: f64,
    pub tw_residual: f64,
}

impl RunSummary {
    pub fn record(&self) -> SummaryRecord {
        SummaryRecord {
            sigma2: self.params.sigma2,
            p: self.params.p,
            q: self.params.q,
            k: self.spec.half_period,
            n: self.spec.points,
            dtau_final: self.dtau_final,
            iterations: self.iterations,
            action: self.values.action,
            q_energy: self.values.q_energy,
            p_energy: self.values.p_energy,
            kinetic: self.values.kinetic,
            constraint: self.values.constraint,
            residual: self.residual,
            amplitude: self.amplitude,
            classification: self.classification.to_string(),
            converged: self.converged,
            multiplier: self.multiplier,
            tw_residual: self.tw_residual,
        }
    }
}

/// Outcome of one call to [`FlowRun::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// Residual and constraint are within tolerance; the state is unchanged.
    Converged,
    Accepted {
        action: f64,
        constraint: f64,
    },
    /// The trial step raised the action, or `Δτ` exceeded the stability
    /// limit of the first-order radial correction; `Δτ` was halved.
    Rejected {
        dtau: f64,
    },
}

pub struct FlowSolver {
    functionals: Functionals,
    cfg: FlowConfig,
}

impl FlowSolver {
    pub fn new(params: ModelParams, spec: GridSpec, cfg: FlowConfig) -> Result<Self> {
        cfg.validate()?;
        let functionals = Functionals::new(params, spec, cfg.operator_mode)?;
        Ok(Self { functionals, cfg })
    }

    pub fn functionals(&self) -> &Functionals {
        &self.functionals
    }

    pub fn config(&self) -> &FlowConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ModelParams {
        self.functionals.params()
    }

    pub fn spec(&self) -> &GridSpec {
        self.functionals.spec()
    }

    /// Samples the configured initial data (before projection).
    pub fn initial_profile(&self, init: &InitialData) -> Result<GridProfile> {
        let spec = *self.spec();
        match init {
            InitialData::Gaussian => Ok(GridProfile::from_fn(spec, |x| (-x * x).exp())),
            InitialData::GaussianAt(c) => Ok(GridProfile::from_fn(spec, |x| {
                let d = periodic_offset(x - c, spec.period());
                (-d * d).exp()
            })),
            InitialData::Constant(c) => Ok(GridProfile::constant(spec, *c)),
            InitialData::RandomBump => Ok(random_bump(&spec, self.cfg.seed)),
            InitialData::Custom(values) => GridProfile::new(spec, values.clone()),
        }
    }

    /// `W − Δτ(∂ℒ(W) − λ(W)∂ℱ(W))`.
    pub fn tangential_step(&self, w: &GridProfile) -> Result<GridProfile> {
        let g = self.functionals.gradients(w)?.projected()?;
        let dtau = self.cfg.dtau;
        let values = w.values().iter().zip(g.values()).map(|(a, b)| a - dtau * b).collect();
        GridProfile::new(*w.spec(), values)
    }

    pub fn radial_step(&self, w: &GridProfile) -> Result<GridProfile> {
        let values = self.functionals.evaluate(w)?;
        let factor = self.radial_factor(&values, self.cfg.dtau)?;
        Ok(w.scaled(factor))
    }

    /// Largest `Δτ` for which the first-order radial map contracts `ℱ`
    /// without overshoot; unlimited for the exact projection.
    fn radial_step_limit(&self, values: &FunctionalValues) -> f64 {
        match self.cfg.projection_mode {
            ProjectionMode::PaperRadial => 1.0 / radial_stiffness(values, self.params()),
            ProjectionMode::ExactNehari => f64::INFINITY,
        }
    }

    fn radial_factor(&self, values: &FunctionalValues, dtau: f64) -> Result<f64> {
        match self.cfg.projection_mode {
            ProjectionMode::PaperRadial => {
                let (lo, hi) = RADIAL_FACTOR_RANGE;
                Ok((1.0 + dtau * values.constraint).clamp(lo, hi))
            }
            ProjectionMode::ExactNehari => projection_factor(values, self.params()),
        }
    }

    /// Projects `w0` onto the Nehari manifold and prepares a run from it.
    pub fn start(&self, w0: &GridProfile) -> Result<FlowRun<'_>> {
        let (w, _) = self.functionals.project_to_nehari(w0)?;
        Ok(FlowRun::new(self, w))
    }

    pub fn solve(&self) -> Result<(GridProfile, RunSummary)> {
        let w0 = self.initial_profile(&self.cfg.init)?;
        let (w, mut summary) = self.start(&w0)?.run()?;
        let collapsed = summary.classification == Classification::Constant;
        let from_constant = matches!(self.cfg.init, InitialData::Constant(_));
        if !(collapsed && self.cfg.restart_on_constant && !from_constant) {
            return Ok((w, summary));
        }
        let bump = self.initial_profile(&InitialData::RandomBump)?;
        let (w2, mut s2) = self.start(&bump)?.run()?;
        if s2.classification == Classification::NonConstant && s2.ell < summary.ell {
            s2.stats.restarts = 1;
            Ok((w2, s2))
        } else {
            summary.stats.restarts = 1;
            Ok((w, summary))
        }
    }
}

/// `S = 2(p−2)·½σ²‖W‖² + q(p−q)𝒬`, which equals `−⟨∂ℱ, W⟩` on the manifold.
/// Near `M_K` one radial step maps `ℱ ↦ (1 − Δτ·S)ℱ`.
pub fn radial_stiffness(values: &FunctionalValues, params: &ModelParams) -> f64 {
    let ModelParams { p, q, .. } = *params;
    2.0 * (p - 2.0) * values.kinetic + q * (p - q) * values.q_energy
}

fn periodic_offset(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

fn random_bump(spec: &GridSpec, seed: u64) -> GridProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.points;
    let boundary = rng.random_range(n / 4..=3 * n / 4);
    let center = -spec.half_period + boundary as f64 * spec.spacing();
    let width = rng.random_range(0.6..1.6);
    let height = rng.random_range(0.5..2.0);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    GridProfile::from_fn(*spec, |x| {
        let d = periodic_offset(x - center, spec.period()) / width;
        sign * height * (-d * d).exp()
    })
}

/// State of one flow trajectory. All buffers are allocated once.
pub struct FlowRun<'a> {
    solver: &'a FlowSolver,
    w: Vec<f64>,
    aw: Vec<f64>,
    psi_q: Vec<f64>,
    psi_p: Vec<f64>,
    values: FunctionalValues,
    // scratch
    gq: Vec<f64>,
    gp: Vec<f64>,
    g: Vec<f64>,
    w_t: Vec<f64>,
    aw_t: Vec<f64>,
    psi_q_t: Vec<f64>,
    psi_p_t: Vec<f64>,
    dtau: f64,
    iterations: usize,
    accepted_streak: usize,
    dtau_cap: f64,
    stats: RunStats,
    last: Option<Diagnostics>,
}

/// Gradient data of the current state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub residual: f64,
    pub tw_residual: f64,
    pub multiplier: f64,
}

impl<'a> FlowRun<'a> {
    fn new(solver: &'a FlowSolver, w: GridProfile) -> Self {
        let n = w.len();
        let mut run = Self {
            solver,
            w: w.into_values(),
            aw: vec![0.0; n],
            psi_q: vec![0.0; n],
            psi_p: vec![0.0; n],
            values: FunctionalValues::default(),
            gq: vec![0.0; n],
            gp: vec![0.0; n],
            g: vec![0.0; n],
            w_t: vec![0.0; n],
            aw_t: vec![0.0; n],
            psi_q_t: vec![0.0; n],
            psi_p_t: vec![0.0; n],
            dtau: solver.cfg.dtau,
            iterations: 0,
            accepted_streak: 0,
            dtau_cap: solver.cfg.dtau,
            stats: RunStats::default(),
            last: None,
        };
        run.refresh();
        run
    }

    /// Recomputes `𝒜W` and the nonlinear terms from `w`.
    fn refresh(&mut self) {
        let f = &self.solver.functionals;
        let h = f.spec().spacing();
        f.operator().apply_into(&self.w, &mut self.aw);
        let (qe, pe) = nonlinear_terms(&self.aw, f.params(), h, &mut self.psi_q, &mut self.psi_p);
        self.values = FunctionalValues::from_parts(f.params(), h * dot(&self.w, &self.w), qe, pe);
        self.last = None;
    }

    pub fn values(&self) -> &FunctionalValues {
        &self.values
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn profile(&self) -> GridProfile {
        GridProfile::from_raw(*self.solver.spec(), self.w.clone())
    }

    /// Fills `g = ∂ℒ − λ∂ℱ` for the current state.
    pub fn diagnostics(&mut self) -> Result<Diagnostics> {
        if let Some(d) = self.last {
            return Ok(d);
        }
        let f = &self.solver.functionals;
        let op = f.operator();
        let ModelParams { p, q, sigma2 } = *f.params();
        let h = f.spec().spacing();
        op.apply_adjoint_into(&self.psi_q, &mut self.gq);
        op.apply_adjoint_into(&self.psi_p, &mut self.gp);
        let (mut lf, mut ff, mut ll) = (0.0, 0.0, 0.0);
        for i in 0..self.w.len() {
            let wi = self.w[i];
            let gl = sigma2 * wi + self.gq[i] - self.gp[i];
            let gf = 2.0 * sigma2 * wi + q * self.gq[i] - p * self.gp[i];
            lf += gl * gf;
            ff += gf * gf;
            ll += gl * gl;
        }
        if !(ff > f64::MIN_POSITIVE) {
            return Err(Error::Degenerate("constraint gradient vanishes along the flow".into()));
        }
        let lambda = lf / ff;
        let mut gg = 0.0;
        for i in 0..self.w.len() {
            let wi = self.w[i];
            let gl = sigma2 * wi + self.gq[i] - self.gp[i];
            let gf = 2.0 * sigma2 * wi + q * self.gq[i] - p * self.gp[i];
            let gi = gl - lambda * gf;
            self.g[i] = gi;
            gg += gi * gi;
        }
        let d = Diagnostics { residual: (h * gg).sqrt(), tw_residual: (h * ll).sqrt(), multiplier: lambda };
        self.last = Some(d);
        Ok(d)
    }

    pub fn is_converged(&mut self) -> Result<bool> {
        let d = self.diagnostics()?;
        let cfg = &self.solver.cfg;
        Ok(d.residual <= cfg.tol_grad && self.values.constraint.abs() <= cfg.tol_constraint)
    }

    pub fn step(&mut self) -> Result<Step> {
        if self.is_converged()? {
            return Ok(Step::Converged);
        }
        let solver = self.solver;
        let f = &solver.functionals;
        let params = *f.params();
        let h = f.spec().spacing();
        if self.dtau > solver.radial_step_limit(&self.values) {
            self.halve();
            return Ok(Step::Rejected { dtau: self.dtau });
        }
        let dtau = self.dtau;

        for i in 0..self.w.len() {
            self.w_t[i] = self.w[i] - dtau * self.g[i];
        }
        f.operator().apply_into(&self.w_t, &mut self.aw_t);
        let (qe, pe) = nonlinear_terms(&self.aw_t, &params, h, &mut self.psi_q_t, &mut self.psi_p_t);
        let trial = FunctionalValues::from_parts(&params, h * dot(&self.w_t, &self.w_t), qe, pe);
        let factor = solver.radial_factor(&trial, dtau)?;
        let next = trial.scaled(&params, factor);

        let increase = next.action - self.values.action;
        if !(increase <= DESCENT_SLACK) || !next.action.is_finite() {
            self.stats.rejected_steps += 1;
            self.halve();
            return Ok(Step::Rejected { dtau: self.dtau });
        }

        let fq = factor.powf(params.q - 1.0);
        let fp = factor.powf(params.p - 1.0);
        for i in 0..self.w.len() {
            self.w[i] = factor * self.w_t[i];
            self.aw[i] = factor * self.aw_t[i];
            self.psi_q[i] = fq * self.psi_q_t[i];
            self.psi_p[i] = fp * self.psi_p_t[i];
        }
        self.values = next;
        self.last = None;
        self.iterations += 1;
        self.stats.flow_time += dtau;
        self.stats.max_action_increase = self.stats.max_action_increase.max(increase);
        self.stats.max_abs_constraint = self.stats.max_abs_constraint.max(next.constraint.abs());
        self.accepted_streak += 1;
        let grown = (2.0 * self.dtau).min(self.dtau_cap);
        if self.accepted_streak >= 1000 && self.dtau < self.dtau_cap && grown <= solver.radial_step_limit(&next) {
            self.dtau = grown;
            self.accepted_streak = 0;
        }
        Ok(Step::Accepted { action: next.action, constraint: next.constraint })
    }

    fn halve(&mut self) {
        self.dtau *= 0.5;
        self.accepted_streak = 0;
        self.stats.dtau_halvings += 1;
    }

    /// Iterates until convergence, `max_iters` step attempts, a stall, or a
    /// collapse of `Δτ`; returns the centred profile.
    pub fn run(mut self) -> Result<(GridProfile, RunSummary)> {
        let cfg = &self.solver.cfg;
        let mut best = f64::INFINITY;
        let mut best_time = 0.0;
        let mut stop = StopReason::MaxIters;
        let mut attempts = 0usize;
        let mut stall_halvings = 0;
        while attempts < cfg.max_iters {
            match self.step()? {
                Step::Converged => {
                    stop = StopReason::Converged;
                    break;
                }
                Step::Rejected { dtau } => {
                    if dtau < 1e-12 * cfg.dtau {
                        stop = StopReason::StepCollapse;
                        break;
                    }
                }
                Step::Accepted { .. } => {}
            }
            attempts += 1;
            if cfg.stall_detection && attempts.is_multiple_of(256) {
                let r = self.diagnostics()?.residual;
                if r < 0.99 * best {
                    best = r;
                    best_time = self.stats.flow_time;
                } else if self.stats.flow_time - best_time > cfg.stall_window {
                    if stall_halvings == MAX_STALL_HALVINGS {
                        stop = StopReason::Stalled;
                        break;
                    }
                    // A stalled residual at a fixed step is an explicit-Euler
                    // two-cycle; it disappears at a smaller step.
                    stall_halvings += 1;
                    self.halve();
                    self.dtau_cap = self.dtau;
                    best = r;
                    best_time = self.stats.flow_time;
                }
            }
        }
        if stop == StopReason::MaxIters && self.is_converged()? {
            stop = StopReason::Converged;
        }
        self.finish(stop)
    }

    pub fn finish(mut self, stop: StopReason) -> Result<(GridProfile, RunSummary)> {
        let d = self.diagnostics()?;
        let converged = stop == StopReason::Converged;
        let spec = *self.solver.spec();
        let w = GridProfile::from_raw(spec, std::mem::take(&mut self.w));
        let aw = GridProfile::from_raw(spec, std::mem::take(&mut self.aw));
        let shift = shape::centering_shift(&aw);
        let w = w.shifted(shift);
        let classification = if !converged {
            Classification::NotConverged
        } else if shape::is_constant(&w, CONSTANT_SPREAD) {
            Classification::Constant
        } else {
            Classification::NonConstant
        };
        let summary = RunSummary {
            params: *self.solver.params(),
            spec,
            ell: self.values.action,
            values: self.values,
            residual: d.residual,
            tw_residual: d.tw_residual,
            multiplier: d.multiplier,
            iterations: self.iterations,
            amplitude: aw.max_abs(),
            converged,
            classification,
            stop,
            dtau_final: self.dtau,
            stats: self.stats,
        };
        Ok((w, summary))
    }
}

pub fn tangential_step(w: &GridProfile, params: &ModelParams, cfg: &FlowConfig) -> Result<GridProfile> {
    FlowSolver::new(*params, *w.spec(), cfg.clone())?.tangential_step(w)
}

pub fn radial_step(w: &GridProfile, params: &ModelParams, cfg: &FlowConfig) -> Result<GridProfile> {
    FlowSolver::new(*params, *w.spec(), cfg.clone())?.radial_step(w)
}

pub fn solve(params: &ModelParams, spec: &GridSpec, cfg: &FlowConfig) -> Result<(GridProfile, RunSummary)> {
    FlowSolver::new(*params, *spec, cfg.clone())?.solve()
}

/// One row of a continuation in the half period `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationStep {
    #[serde(rename = "K")]
    pub half_period: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub ell: f64,
    pub tail_mass: f64,
    /// Action of the zero-padded previous wave on the new cell, before
    /// projection and flow (`None` on the first row).
    pub padded_action: Option<f64>,
    pub summary: RunSummary,
}

/// Solves on `spec_start`, then repeatedly enlarges the cell by `factor`
/// (same spacing), zero-pads the previous centred wave into it, projects
/// and re-runs the flow.
pub fn continue_in_k(
    params: &ModelParams,
    cfg: &FlowConfig,
    spec_start: &GridSpec,
    factor: f64,
    steps: usize,
) -> Result<(Vec<ContinuationStep>, GridProfile)> {
    if !(factor > 1.0) {
        return Err(Error::InvalidConfig(format!("continuation factor must exceed 1, got {factor}")));
    }
    let (mut w, summary) = solve(params, spec_start, cfg)?;
    let mut rows = vec![ContinuationStep {
        half_period: spec_start.half_period,
        points: spec_start.points,
        ell: summary.ell,
        tail_mass: shape::tail_mass(&w),
        padded_action: None,
        summary,
    }];
    for _ in 0..steps {
        let old = *w.spec();
        let spec = old.with_half_period(old.half_period * factor)?;
        if (spec.points - old.points) % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "cannot embed N={} symmetrically into N={}",
                old.points, spec.points
            )));
        }
        let padded = zero_pad(&w, &spec);
        let solver = FlowSolver::new(
            *params,
            spec,
            FlowConfig { init: InitialData::Custom(padded.values().to_vec()), ..cfg.clone() },
        )?;
        let padded_action = solver.functionals().evaluate(&padded)?.action;
        let (next, summary) = solver.solve()?;
        rows.push(ContinuationStep {
            half_period: spec.half_period,
            points: spec.points,
            ell: summary.ell,
            tail_mass: shape::tail_mass(&next),
            padded_action: Some(padded_action),
            summary,
        });
        w = next;
    }
    Ok((rows, w))
}

/// Embeds a centred profile into a larger cell with the same spacing,
/// filling the new samples with zeros.
pub fn zero_pad(w: &GridProfile, spec: &GridSpec) -> GridProfile {
    let offset = (spec.points - w.len()) / 2;
    let mut values = vec![0.0; spec.points];
    values[offset..offset + w.len()].copy_from_slice(w.values());
    GridProfile::from_raw(*spec, values)
}
