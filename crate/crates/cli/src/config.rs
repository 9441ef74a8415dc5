//! Run configuration: JSON config file merged under command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use nehari_waves::flow::{FlowConfig, InitialData, ProjectionMode};
use nehari_waves::grid::{GridSpec, ModelParams};
use nehari_waves::io::parse_profile_csv;
use nehari_waves::operator::OperatorMode;

pub const DEFAULT_K: f64 = 6.0;
pub const DEFAULT_N: usize = 2400;

/// Keys accepted in a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub sigma2: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub dtau: Option<f64>,
    pub tol_grad: Option<f64>,
    pub tol_constraint: Option<f64>,
    pub max_iters: Option<usize>,
    pub init: Option<String>,
    pub operator: Option<String>,
    pub projection: Option<String>,
    pub seed: Option<u64>,
    pub stall_detection: Option<bool>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub plot: Option<bool>,
    pub jobs: Option<usize>,
    pub sigma2_list: Option<Vec<f64>>,
    pub pairs: Option<Vec<(f64, f64)>>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// Squared wave speed.
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct FlowArgs {
    /// Half period of the cell [default: 6]
    #[arg(long = "K")]
    pub k: Option<f64>,
    /// Grid points [default: 2400]
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Flow step [default: 5e-4]
    #[arg(long)]
    pub dtau: Option<f64>,
    /// Projected-gradient tolerance [default: 1e-8]
    #[arg(long)]
    pub tol_grad: Option<f64>,
    /// Constraint tolerance [default: 1e-10]
    #[arg(long)]
    pub tol_constraint: Option<f64>,
    /// Step budget [default: 2000000]
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// gaussian | constant[:VALUE] | bump | file:PATH
    #[arg(long)]
    pub init: Option<String>,
    /// quadrature | spectral | left-riemann
    #[arg(long)]
    pub operator: Option<String>,
    /// paper | exact
    #[arg(long)]
    pub projection: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep iterating when the residual stops improving.
    #[arg(long)]
    pub no_stall_detection: bool,
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutputArgs {
    /// Output directory [default: .]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON path [default: OUT/summary.json]
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Also write an SVG chart.
    #[arg(long)]
    pub plot: bool,
}

/// Fully resolved settings shared by the solving commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub sigma2: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub spec: GridSpec,
    pub flow: FlowConfig,
    pub out: PathBuf,
    pub summary: Option<PathBuf>,
    pub plot: bool,
    pub file: FileConfig,
}

impl RunConfig {
    pub fn resolve(model: &ModelArgs, flow: &FlowArgs, output: &OutputArgs) -> Result<Self> {
        let file = FileConfig::load(flow.config.as_deref())?;
        let defaults = FlowConfig::default();
        let init_text = flow.init.clone().or(file.init.clone());
        let k = flow.k.or(file.k);
        let n = flow.n.or(file.n);
        let (init, file_spec) = match init_text.as_deref() {
            None => (InitialData::Gaussian, None),
            Some(s) => parse_init(s)?,
        };
        let spec = match (file_spec, k, n) {
            (Some(fs), None, None) => fs,
            (Some(fs), k, n) => {
                let spec = GridSpec::new(k.unwrap_or(fs.half_period), n.unwrap_or(fs.points))?;
                if spec != fs {
                    bail!(
                        "initial profile grid (K={}, N={}) does not match K={}, N={}",
                        fs.half_period,
                        fs.points,
                        spec.half_period,
                        spec.points
                    );
                }
                spec
            }
            (None, k, n) => GridSpec::new(k.unwrap_or(DEFAULT_K), n.unwrap_or(DEFAULT_N))?,
        };
        let operator_mode = match flow.operator.as_deref().or(file.operator.as_deref()) {
            None => defaults.operator_mode,
            Some(s) => s.parse::<OperatorMode>()?,
        };
        let projection_mode = match flow.projection.as_deref().or(file.projection.as_deref()) {
            None => defaults.projection_mode,
            Some(s) => s.parse::<ProjectionMode>()?,
        };
        let stall_detection = if flow.no_stall_detection { false } else { file.stall_detection.unwrap_or(true) };
        let cfg = FlowConfig {
            dtau: flow.dtau.or(file.dtau).unwrap_or(defaults.dtau),
            max_iters: flow.max_iters.or(file.max_iters).unwrap_or(defaults.max_iters),
            tol_grad: flow.tol_grad.or(file.tol_grad).unwrap_or(defaults.tol_grad),
            tol_constraint: flow.tol_constraint.or(file.tol_constraint).unwrap_or(defaults.tol_constraint),
            operator_mode,
            projection_mode,
            init,
            stall_detection,
            seed: flow.seed.or(file.seed).unwrap_or(defaults.seed),
            ..defaults
        };
        cfg.validate()?;
        Ok(Self {
            sigma2: model.sigma2.or(file.sigma2),
            p: model.p.or(file.p),
            q: model.q.or(file.q),
            spec,
            flow: cfg,
            out: output.out.clone().or(file.out.clone()).unwrap_or_else(|| PathBuf::from(".")),
            summary: output.summary.clone().or(file.summary.clone()),
            plot: output.plot || file.plot.unwrap_or(false),
            file,
        })
    }

    pub fn params(&self) -> Result<ModelParams> {
        let sigma2 = self.sigma2.context("missing --sigma2")?;
        let p = self.p.context("missing --p")?;
        let q = self.q.context("missing --q")?;
        Ok(ModelParams::new(p, q, sigma2)?)
    }

    pub fn summary_path(&self) -> PathBuf {
        self.summary.clone().unwrap_or_else(|| self.out.join("summary.json"))
    }
}

/// Parses `--init`; a `file:` profile also fixes the grid.
pub fn parse_init(s: &str) -> Result<(InitialData, Option<GridSpec>)> {
    if let Some(path) = s.strip_prefix("file:") {
        let text = fs::read_to_string(path).with_context(|| format!("reading initial profile {path}"))?;
        let table = parse_profile_csv(&text).with_context(|| format!("parsing initial profile {path}"))?;
        let spec = *table.w.spec();
        return Ok((InitialData::Custom(table.w.into_values()), Some(spec)));
    }
    if let Some(v) = s.strip_prefix("constant:") {
        let c: f64 = v.parse().with_context(|| format!("bad constant '{v}'"))?;
        return Ok((InitialData::Constant(c), None));
    }
    match s {
        "gaussian" => Ok((InitialData::Gaussian, None)),
        "constant" => Ok((InitialData::Constant(1.0), None)),
        "bump" => Ok((InitialData::RandomBump, None)),
        other => bail!("unknown --init '{other}' (expected gaussian, constant[:VALUE], bump or file:PATH)"),
    }
}

/// Parses `p:q` pairs separated by commas, e.g. `4:3,3:1.5`.
pub fn parse_pairs(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|item| {
            let (p, q) = item.split_once(':').with_context(|| format!("expected p:q, got '{item}'"))?;
            Ok((p.trim().parse()?, q.trim().parse()?))
        })
        .collect()
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number '{v}'"))).collect()
}
