//! The unit-window averaging operator `(𝒜W)(φ) = ∫_{φ−½}^{φ+½} W(s) ds` on a
//! periodic grid.
//!
//! Three discretizations are available:
//!
//! * [`OperatorMode::Quadrature`]: Riemann sum over the `2m + 1` samples
//!   `φ_{i−m} … φ_{i+m}` with half weight on the two end samples
//!   (`m = N/(4K)`). The window endpoints `φ_i ± ½` are grid points, the
//!   stencil is symmetric, so the matrix is self-adjoint and rows/columns sum
//!   to one. Symbol: `sin(k/2)·(h/2)cot(kh/2)`, i.e. second order in `h`.
//! * [`OperatorMode::LeftRiemann`]: the plain left-closed sum over the `2m`
//!   cells `j = i−m … i+m−1`. Its window is offset by `h/2`, so it is *not*
//!   self-adjoint; [`AveragingOperator::apply_adjoint`] returns the true
//!   transpose and gradients are built with it.
//! * [`OperatorMode::Spectral`]: multiplication of the discrete Fourier
//!   coefficients by the exact symbol `ϱ(k/2) = sin(k/2)/(k/2)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridProfile, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorMode {
    #[default]
    Quadrature,
    LeftRiemann,
    Spectral,
}

impl OperatorMode {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorMode::Quadrature => "quadrature",
            OperatorMode::LeftRiemann => "left-riemann",
            OperatorMode::Spectral => "spectral",
        }
    }
}

impl fmt::Display for OperatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(OperatorMode::Quadrature),
            "left-riemann" => Ok(OperatorMode::LeftRiemann),
            "spectral" => Ok(OperatorMode::Spectral),
            other => Err(Error::InvalidConfig(format!("unknown operator mode '{other}'"))),
        }
    }
}

/// Fourier symbol `ϱ(κ) = sin κ / κ` with `ϱ(0) = 1`.
pub fn sinc_symbol(kappa: f64) -> f64 {
    if kappa == 0.0 {
        1.0
    } else {
        kappa.sin() / kappa
    }
}

struct SpectralPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    symbol: Vec<f64>,
}

/// A discretized `𝒜` bound to one grid. Immutable after construction, so a
/// single instance can be shared across threads.
pub struct AveragingOperator {
    spec: GridSpec,
    mode: OperatorMode,
    half_cells: Option<usize>,
    spectral: Option<SpectralPlan>,
}

impl fmt::Debug for AveragingOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AveragingOperator")
            .field("spec", &self.spec)
            .field("mode", &self.mode)
            .field("half_cells", &self.half_cells)
            .finish()
    }
}

impl AveragingOperator {
    pub fn new(spec: GridSpec, mode: OperatorMode) -> Result<Self> {
        let half_cells = spec.cells_per_half_unit();
        let spectral = match mode {
            OperatorMode::Quadrature | OperatorMode::LeftRiemann => {
                if half_cells.is_none() {
                    return Err(Error::ModeConstraint {
                        mode: mode.name(),
                        reason: format!(
                            "N/(4K) = {} is not a positive integer",
                            spec.points as f64 / (4.0 * spec.half_period)
                        ),
                    });
                }
                None
            }
            OperatorMode::Spectral => {
                if !spec.points.is_multiple_of(2) {
                    return Err(Error::ModeConstraint {
                        mode: mode.name(),
                        reason: format!("N = {} is odd", spec.points),
                    });
                }
                Some(Self::plan_spectral(&spec))
            }
        };
        Ok(Self { spec, mode, half_cells, spectral })
    }

    fn plan_spectral(spec: &GridSpec) -> SpectralPlan {
        let n = spec.points;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let period = spec.period();
        let symbol = (0..n)
            .map(|idx| {
                let l = if idx <= n / 2 { idx as f64 } else { idx as f64 - n as f64 };
                // k/2 = πℓ/(2K); exact zeros where ℓ/(2K) is a non-zero integer
                let ratio = l / period;
                if l != 0.0 && (ratio - ratio.round()).abs() < 1e-12 {
                    0.0
                } else {
                    sinc_symbol(std::f64::consts::PI * ratio)
                }
            })
            .collect();
        SpectralPlan { forward, inverse, symbol }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn mode(&self) -> OperatorMode {
        self.mode
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.mode != OperatorMode::LeftRiemann
    }

    /// `out = 𝒜 input`.
    pub fn apply_into(&self, input: &[f64], out: &mut [f64]) {
        debug_assert_eq!(input.len(), self.spec.points);
        debug_assert_eq!(out.len(), self.spec.points);
        match self.mode {
            OperatorMode::Quadrature => self.trapezoid(input, out),
            OperatorMode::LeftRiemann => {
                let m = self.half_cells.unwrap() as isize;
                self.window_sum(input, out, -m, m - 1)
            }
            OperatorMode::Spectral => self.spectral(input, out),
        }
    }

    /// `out = 𝒜ᵀ input` with respect to the grid inner product.
    pub fn apply_adjoint_into(&self, input: &[f64], out: &mut [f64]) {
        match self.mode {
            OperatorMode::LeftRiemann => {
                // rows i with i−m ≤ j ≤ i+m−1, i.e. i ∈ [j−m+1, j+m]
                let m = self.half_cells.unwrap() as isize;
                self.window_sum(input, out, 1 - m, m)
            }
            _ => self.apply_into(input, out),
        }
    }

    pub fn apply(&self, w: &GridProfile) -> Result<GridProfile> {
        self.spec.check_same(w.spec())?;
        let mut out = vec![0.0; self.spec.points];
        self.apply_into(w.values(), &mut out);
        Ok(GridProfile::from_raw(self.spec, out))
    }

    pub fn apply_adjoint(&self, w: &GridProfile) -> Result<GridProfile> {
        self.spec.check_same(w.spec())?;
        let mut out = vec![0.0; self.spec.points];
        self.apply_adjoint_into(w.values(), &mut out);
        Ok(GridProfile::from_raw(self.spec, out))
    }

    /// `(DW)_i = W_{i+m} − W_{i−m}`, the exact derivative `(𝒜W)'` at `φ_i`.
    pub fn difference_derivative(&self, w: &GridProfile) -> Result<GridProfile> {
        self.spec.check_same(w.spec())?;
        difference_derivative(w)
    }

    /// `out_i = h · Σ_{j=i+lo0}^{i+hi0} input_j`, periodic.
    fn window_sum(&self, input: &[f64], out: &mut [f64], lo0: isize, hi0: isize) {
        let n = input.len();
        let h = self.spec.spacing();
        let mut sum: f64 = (lo0..=hi0).map(|j| input[j.rem_euclid(n as isize) as usize]).sum();
        let enter = (hi0 + 1).rem_euclid(n as isize) as usize;
        let leave = lo0.rem_euclid(n as isize) as usize;
        for i in 0..n {
            out[i] = h * sum;
            sum += input[wrap_add(i, enter, n)] - input[wrap_add(i, leave, n)];
        }
    }

    fn trapezoid(&self, input: &[f64], out: &mut [f64]) {
        let n = input.len();
        let m = self.half_cells.unwrap();
        let h = self.spec.spacing();
        let mut sum: f64 = (-(m as isize)..=m as isize).map(|j| input[j.rem_euclid(n as isize) as usize]).sum();
        let (lo, hi, enter) = ((n - m) % n, m % n, (m + 1) % n);
        for i in 0..n {
            let a = input[wrap_add(i, lo, n)];
            out[i] = h * (sum - 0.5 * (a + input[wrap_add(i, hi, n)]));
            sum += input[wrap_add(i, enter, n)] - a;
        }
    }

    fn spectral(&self, input: &[f64], out: &mut [f64]) {
        let plan = self.spectral.as_ref().expect("spectral plan");
        let mut buf: Vec<Complex<f64>> = input.iter().map(|&x| Complex::new(x, 0.0)).collect();
        plan.forward.process(&mut buf);
        for (c, s) in buf.iter_mut().zip(&plan.symbol) {
            *c *= *s;
        }
        plan.inverse.process(&mut buf);
        let scale = 1.0 / input.len() as f64;
        for (o, c) in out.iter_mut().zip(&buf) {
            *o = c.re * scale;
        }
    }
}

/// `(i + k) mod n` for `i, k < n`.
#[inline(always)]
fn wrap_add(i: usize, k: usize, n: usize) -> usize {
    let j = i + k;
    if j >= n {
        j - n
    } else {
        j
    }
}

/// One-shot `𝒜W`.
pub fn apply_a(w: &GridProfile, mode: OperatorMode) -> Result<GridProfile> {
    AveragingOperator::new(*w.spec(), mode)?.apply(w)
}

/// One-shot `𝒜ᵀW`.
pub fn apply_a_adjoint(w: &GridProfile, mode: OperatorMode) -> Result<GridProfile> {
    AveragingOperator::new(*w.spec(), mode)?.apply_adjoint(w)
}

pub fn difference_derivative(w: &GridProfile) -> Result<GridProfile> {
    let spec = *w.spec();
    let m = spec.cells_per_half_unit().ok_or_else(|| Error::ModeConstraint {
        mode: "difference-derivative",
        reason: "N/(4K) is not a positive integer".into(),
    })? as isize;
    let values = (0..spec.points as isize).map(|i| w.at(i + m) - w.at(i - m)).collect();
    Ok(GridProfile::from_raw(spec, values))
}
