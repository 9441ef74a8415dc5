//! Atomistic check of a traveling wave: reconstruct a periodic chain from a
//! profile and integrate `ẍ_j = Φ'(x_{j+1} − x_j) − Φ'(x_j − x_{j−1})`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridProfile, ModelParams};
use crate::operator::{AveragingOperator, OperatorMode};

/// Magnitude of a position or velocity at which integration aborts.
pub const BLOW_UP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainState {
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub t: f64,
    /// `x_{j+M} = x_j + period_length`.
    pub period_length: f64,
}

impl ChainState {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `x_{j+1} − x_j`, wrapping across the periodic seam.
    pub fn strains(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        strains_into(&self.positions, self.period_length, &mut out);
        out
    }

    /// `Σ ½ẋ_j² + Φ(x_{j+1} − x_j)`.
    pub fn energy(&self, params: &ModelParams) -> f64 {
        let kinetic: f64 = self.velocities.iter().map(|v| 0.5 * v * v).sum();
        let potential: f64 = self.strains().iter().map(|&s| params.potential(s)).sum();
        kinetic + potential
    }

    pub fn momentum(&self) -> f64 {
        self.velocities.iter().sum()
    }
}

fn strains_into(x: &[f64], period_length: f64, out: &mut Vec<f64>) {
    let m = x.len();
    out.clear();
    out.extend((0..m).map(|j| if j + 1 < m { x[j + 1] - x[j] } else { x[0] + period_length - x[j] }));
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveEmbedding {
    pub w: GridProfile,
    /// Mean strain.
    pub r: f64,
    /// Signed wave speed.
    pub sigma: f64,
    /// `𝒜W` on the profile grid; the predicted strain field.
    pub aw: GridProfile,
    /// Atoms per periodic cell of the profile, `2K`.
    pub cell_atoms: usize,
}

impl WaveEmbedding {
    /// Strain `(𝒜W)(j + ½ − σt)` predicted for bond `j`.
    pub fn predicted_strain(&self, j: usize, t: f64) -> f64 {
        self.aw.interpolate(j as f64 + 0.5 - self.sigma * t)
    }
}

/// Builds `x_j(0) = r·j + X(j)` and `ẋ_j(0) = −σ(W(j) − r)` on `n_cells`
/// copies of the profile cell, with `X` the running integral of `W − r`.
pub fn embed_wave(w: &GridProfile, sigma2: f64, n_cells: usize) -> Result<(WaveEmbedding, ChainState)> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParams(format!("need sigma2 > 0, got {sigma2}")));
    }
    if n_cells == 0 {
        return Err(Error::InvalidParams("need at least one cell".into()));
    }
    let spec = *w.spec();
    let period = spec.period();
    let cell_atoms = period.round();
    if (period - cell_atoms).abs() > 1e-9 * period || cell_atoms < 1.0 {
        return Err(Error::InvalidGrid(format!("2K must be a positive integer, got {period}")));
    }
    let cell_atoms = cell_atoms as usize;
    let mode = if spec.cells_per_half_unit().is_some() { OperatorMode::Quadrature } else { OperatorMode::Spectral };
    let aw = AveragingOperator::new(spec, mode)?.apply(w)?;

    let h = spec.spacing();
    let r = w.mean();
    let sigma = sigma2.sqrt();
    // X at the cell boundaries −K + k·h, X(−K) = 0
    let mut x_nodes = Vec::with_capacity(spec.points + 1);
    x_nodes.push(0.0);
    let mut acc = 0.0;
    for v in w.values() {
        acc += h * (v - r);
        x_nodes.push(acc);
    }
    let big_x = |phi: f64| {
        let s = (phi + spec.half_period).rem_euclid(period) / h;
        let k = (s.floor() as usize).min(spec.points - 1);
        let frac = s - k as f64;
        (1.0 - frac) * x_nodes[k] + frac * x_nodes[k + 1]
    };

    let m = n_cells * cell_atoms;
    let positions = (0..m).map(|j| r * j as f64 + big_x(j as f64)).collect();
    let velocities = (0..m).map(|j| -sigma * (w.interpolate(j as f64) - r)).collect();
    let chain = ChainState { positions, velocities, t: 0.0, period_length: r * m as f64 };
    Ok((WaveEmbedding { w: w.clone(), r, sigma, aw, cell_atoms }, chain))
}

/// Velocity Verlet with `ceil(T/dt)` equal steps.
pub fn integrate(chain: &ChainState, params: &ModelParams, dt: f64, t_final: f64) -> Result<ChainState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidConfig(format!("T must be non-negative, got {t_final}")));
    }
    let steps = (t_final / dt).ceil() as usize;
    let mut out = chain.clone();
    if steps == 0 {
        return Ok(out);
    }
    let dt = t_final / steps as f64;
    let m = out.len();
    let mut strain = Vec::with_capacity(m);
    let mut acc = vec![0.0; m];
    let forces = |x: &[f64], strain: &mut Vec<f64>, acc: &mut [f64]| {
        strains_into(x, out.period_length, strain);
        for s in strain.iter_mut() {
            *s = params.force(*s);
        }
        for j in 0..m {
            let prev = if j == 0 { strain[m - 1] } else { strain[j - 1] };
            acc[j] = strain[j] - prev;
        }
    };
    forces(&out.positions, &mut strain, &mut acc);
    let t0 = out.t;
    for step in 1..=steps {
        for j in 0..m {
            out.velocities[j] += 0.5 * dt * acc[j];
            out.positions[j] += dt * out.velocities[j];
        }
        forces(&out.positions, &mut strain, &mut acc);
        let mut max_abs = 0.0f64;
        for j in 0..m {
            out.velocities[j] += 0.5 * dt * acc[j];
            max_abs = max_abs.max(out.velocities[j].abs()).max(out.positions[j].abs());
        }
        let t = t0 + step as f64 * dt;
        if !(max_abs <= BLOW_UP) {
            return Err(Error::BlowUp { t, max_abs });
        }
        out.t = t;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftReport {
    #[serde(rename = "T")]
    pub t: f64,
    pub dt: f64,
    #[serde(rename = "M")]
    pub atoms: usize,
    /// `‖s(T) − s*(T)‖₂ / ‖s*(T)‖₂` over all bonds.
    pub drift_l2: f64,
    pub drift_sup: f64,
    /// `|H(T) − H(0)| / |H(0)|`.
    pub energy_drift: f64,
    /// `|Σẋ_j(T) − Σẋ_j(0)|`.
    pub momentum_drift: f64,
}

pub const DEFAULT_CELLS: usize = 4;

/// Embeds `w`, integrates to `t_final` and compares the bond strains with
/// the transported profile `(𝒜W)(j + ½ − σT)`.
pub fn validate_wave(w: &GridProfile, params: &ModelParams, dt: f64, t_final: f64) -> Result<DriftReport> {
    validate_wave_cells(w, params, dt, t_final, DEFAULT_CELLS)
}

pub fn validate_wave_cells(
    w: &GridProfile,
    params: &ModelParams,
    dt: f64,
    t_final: f64,
    n_cells: usize,
) -> Result<DriftReport> {
    params.validate()?;
    let (embedding, chain) = embed_wave(w, params.sigma2, n_cells)?;
    let end = integrate(&chain, params, dt, t_final)?;
    let measured = end.strains();
    let (mut err2, mut ref2, mut sup) = (0.0, 0.0, 0.0f64);
    for (j, s) in measured.iter().enumerate() {
        let pred = embedding.predicted_strain(j, t_final);
        err2 += (s - pred).powi(2);
        ref2 += pred * pred;
        sup = sup.max((s - pred).abs());
    }
    let h0 = chain.energy(params);
    let h1 = end.energy(params);
    let energy_drift = if h0 == 0.0 { (h1 - h0).abs() } else { ((h1 - h0) / h0).abs() };
    let steps = (t_final / dt).ceil().max(1.0);
    Ok(DriftReport {
        t: t_final,
        dt: t_final / steps,
        atoms: chain.len(),
        drift_l2: if ref2 == 0.0 { err2.sqrt() } else { (err2 / ref2).sqrt() },
        drift_sup: sup,
        energy_drift,
        momentum_drift: (end.momentum() - chain.momentum()).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn params() -> ModelParams {
        ModelParams::new(4.0, 3.0, 1.0).unwrap()
    }

    #[test]
    fn constant_profile_embeds_uniformly() {
        let spec = GridSpec::new(3.0, 240).unwrap();
        let w = GridProfile::constant(spec, 0.7);
        let (e, chain) = embed_wave(&w, 1.0, 2).unwrap();
        assert_eq!(chain.len(), 12);
        assert!((e.r - 0.7).abs() < 1e-14);
        for (j, x) in chain.positions.iter().enumerate() {
            assert!((x - 0.7 * j as f64).abs() < 1e-12);
        }
        assert!(chain.velocities.iter().all(|v| v.abs() < 1e-14));
        assert!(chain.strains().iter().all(|s| (s - 0.7).abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_input() {
        let spec = GridSpec::new(3.0, 240).unwrap();
        let w = GridProfile::constant(spec, 1.0);
        assert!(embed_wave(&w, 0.0, 4).is_err());
        let odd = GridProfile::constant(GridSpec::new(1.25, 100).unwrap(), 1.0);
        assert!(embed_wave(&odd, 1.0, 4).is_err());
    }

    #[test]
    fn strain_identity_at_time_zero() {
        let mut errs = Vec::new();
        for n in [240, 480] {
            let spec = GridSpec::new(3.0, n).unwrap();
            let w = GridProfile::from_fn(spec, |x| 0.3 + (-x * x).exp() * (1.0 + 0.2 * x));
            let (e, chain) = embed_wave(&w, 1.0, 2).unwrap();
            let err = chain
                .strains()
                .iter()
                .enumerate()
                .map(|(j, s)| (s - e.predicted_strain(j, 0.0)).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[0] < 5e-4, "{errs:?}");
        assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
    }

    #[test]
    fn frozen_chain_at_the_force_zero() {
        let p = params();
        let w0 = p.amplitude_threshold();
        let spec = GridSpec::new(3.0, 240).unwrap();
        let (_, chain) = embed_wave(&GridProfile::constant(spec, w0), 1.0, 4).unwrap();
        let end = integrate(&chain, &p, 1e-2, 5.0).unwrap();
        for (a, b) in end.positions.iter().zip(&chain.positions) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((end.t - 5.0).abs() < 1e-12);
    }

    #[test]
    fn conserves_energy_and_momentum() {
        let p = params();
        let spec = GridSpec::new(3.0, 240).unwrap();
        let w = GridProfile::from_fn(spec, |x| 0.5 * (-x * x).exp());
        let (_, chain) = embed_wave(&w, 1.0, 4).unwrap();
        let h0 = chain.energy(&p);
        let drift = |dt: f64| {
            let end = integrate(&chain, &p, dt, 20.0).unwrap();
            assert!((end.momentum() - chain.momentum()).abs() < 1e-10);
            ((end.energy(&p) - h0) / h0).abs()
        };
        let (coarse, fine) = (drift(2e-3), drift(1e-3));
        assert!(coarse < 1e-4, "{coarse}");
        assert!((coarse / fine - 4.0).abs() < 1.0, "{coarse} {fine}");
    }

    #[test]
    fn blow_up_is_reported() {
        let p = params();
        let spec = GridSpec::new(1.0, 40).unwrap();
        let w = GridProfile::from_fn(spec, |x| 50.0 * (-x * x).exp());
        let (_, chain) = embed_wave(&w, 1.0, 4).unwrap();
        assert!(matches!(integrate(&chain, &p, 0.5, 100.0), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn constant_wave_has_no_drift() {
        let p = ModelParams::new(4.0, 2.0, 2.0).unwrap();
        let spec = GridSpec::new(6.0, 2400).unwrap();
        let r = validate_wave(&GridProfile::constant(spec, 1.0), &p, 1e-3, 12.0 / 2f64.sqrt()).unwrap();
        assert!(r.drift_l2 <= 1e-8 && r.drift_sup <= 1e-8, "{r:?}");
        assert_eq!(r.atoms, 48);
    }
}
