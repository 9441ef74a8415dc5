//! Periodic cell-centred grid on (−K, K], sampled profiles and their discrete
//! norms. Every integral is a plain Riemann sum with weight `h = 2K/N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Half period `K` of the periodicity cell.
    #[serde(rename = "K")]
    pub half_period: f64,
    /// Number of samples `N`.
    #[serde(rename = "N")]
    pub points: usize,
}

impl GridSpec {
    pub fn new(half_period: f64, points: usize) -> Result<Self> {
        if !(half_period.is_finite() && half_period > 0.0) {
            return Err(Error::InvalidGrid(format!("K must be positive, got {half_period}")));
        }
        if points == 0 {
            return Err(Error::InvalidGrid("N must be positive".into()));
        }
        Ok(Self { half_period, points })
    }

    /// Grid with the same spacing as `self` on a cell of half period `half_period`.
    pub fn with_half_period(&self, half_period: f64) -> Result<Self> {
        let points = (half_period / self.half_period * self.points as f64).round() as usize;
        Self::new(half_period, points)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_period / self.points as f64
    }

    pub fn period(&self) -> f64 {
        2.0 * self.half_period
    }

    /// Cell midpoint `φ_i = −K + (i + ½)h`.
    pub fn phi(&self, i: usize) -> f64 {
        -self.half_period + (i as f64 + 0.5) * self.spacing()
    }

    pub fn phis(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.phi(i)).collect()
    }

    /// Number of cells in half a unit of phase, `N/(4K)`, if it is a positive integer.
    pub fn cells_per_half_unit(&self) -> Option<usize> {
        let m = self.points as f64 / (4.0 * self.half_period);
        let rounded = m.round();
        if rounded >= 1.0 && (m - rounded).abs() <= 1e-9 * m.max(1.0) {
            Some(rounded as usize)
        } else {
            None
        }
    }

    pub fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.points as isize) as usize
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self.points != other.points || self.half_period != other.half_period {
            return Err(Error::GridMismatch(self.half_period, self.points, other.half_period, other.points));
        }
        Ok(())
    }
}

/// Exponents of `Φ(w) = |w|^p − |w|^q` together with the squared wave speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub p: f64,
    pub q: f64,
    pub sigma2: f64,
}

impl ModelParams {
    pub fn new(p: f64, q: f64, sigma2: f64) -> Result<Self> {
        let params = Self { p, q, sigma2 };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { p, q, sigma2 } = *self;
        if !(p.is_finite() && q.is_finite() && sigma2.is_finite()) {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if p <= 2.0 {
            return Err(Error::InvalidParams(format!("need p > 2, got p={p}")));
        }
        if !(1.0 < q && q < p) {
            return Err(Error::InvalidParams(format!("need 1 < q < p, got q={q}, p={p}")));
        }
        if sigma2 <= 0.0 {
            return Err(Error::InvalidParams(format!("need sigma2 > 0, got {sigma2}")));
        }
        Ok(())
    }

    /// Interaction potential `Φ(w) = |w|^p − |w|^q`.
    pub fn potential(&self, w: f64) -> f64 {
        let a = w.abs();
        a.powf(self.p) - a.powf(self.q)
    }

    /// `Φ'(w) = Ψ_p(w) − Ψ_q(w)`.
    pub fn force(&self, w: f64) -> f64 {
        crate::functionals::psi(w, self.p) - crate::functionals::psi(w, self.q)
    }

    /// Strain amplitude threshold `(q/p)^{1/(p−q)}`.
    pub fn amplitude_threshold(&self) -> f64 {
        (self.q / self.p).powf(1.0 / (self.p - self.q))
    }
}

/// A real function sampled at the cell midpoints of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridProfile {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridProfile {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.points {
            return Err(Error::InvalidGrid(format!("expected {} samples, got {}", spec.points, values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite sample at index {i}")));
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self { spec, values: vec![0.0; spec.points] }
    }

    pub fn constant(spec: GridSpec, c: f64) -> Self {
        Self { spec, values: vec![c; spec.points] }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..spec.points).map(|i| f(spec.phi(i))).collect();
        Self { spec, values }
    }

    pub(crate) fn from_raw(spec: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.points);
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Periodic read: `values[i mod N]`.
    pub fn at(&self, i: isize) -> f64 {
        self.values[self.spec.wrap(i)]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_raw(self.spec, self.values.iter().map(|v| v * factor).collect())
    }

    /// `out[i] = self[i - shift]`, i.e. the graph moves right by `shift` cells.
    pub fn shifted(&self, shift: isize) -> Self {
        let n = self.values.len() as isize;
        let values = (0..n).map(|i| self.values[(i - shift).rem_euclid(n) as usize]).collect();
        Self::from_raw(self.spec, values)
    }

    /// `W(φ) ↦ W(−φ)`; exact on the midpoint grid since `φ_{N−1−i} = −φ_i`.
    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self::from_raw(self.spec, values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Linear interpolation at an arbitrary phase, periodic in `2K`.
    pub fn interpolate(&self, phi: f64) -> f64 {
        let h = self.spec.spacing();
        // position in units of cells relative to the first midpoint
        let s = (phi + self.spec.half_period) / h - 0.5;
        let base = s.floor();
        let frac = s - base;
        let i = base as isize;
        (1.0 - frac) * self.at(i) + frac * self.at(i + 1)
    }
}

pub fn norm2_sq(w: &GridProfile) -> f64 {
    w.spec.spacing() * w.values.iter().map(|v| v * v).sum::<f64>()
}

/// Discrete `L^r` norm; pass `f64::INFINITY` for the sup norm.
pub fn norm_r(w: &GridProfile, r: f64) -> Result<f64> {
    if r.is_nan() || r < 1.0 {
        return Err(Error::InvalidExponent(r));
    }
    if r.is_infinite() {
        return Ok(w.max_abs());
    }
    let h = w.spec.spacing();
    let sum: f64 = if r == 1.0 {
        w.values.iter().map(|v| v.abs()).sum()
    } else if r == 2.0 {
        w.values.iter().map(|v| v * v).sum()
    } else {
        w.values.iter().map(|v| v.abs().powf(r)).sum()
    };
    Ok((h * sum).powf(1.0 / r))
}

pub fn inner(w: &GridProfile, v: &GridProfile) -> Result<f64> {
    w.spec.check_same(&v.spec)?;
    Ok(dot(&w.values, &v.values) * w.spec.spacing())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
