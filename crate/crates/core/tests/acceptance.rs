//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). Criteria listed in
//! `EXPECTED_RED` are reported as FAIL without failing the process; any other
//! failure exits non-zero.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nehari_waves::flow::{continue_in_k, solve, Classification, FlowConfig, InitialData, ProjectionMode, RunSummary};
use nehari_waves::functionals::Functionals;
use nehari_waves::grid::{inner, norm2_sq, norm_r, GridProfile, GridSpec, ModelParams};
use nehari_waves::lattice::validate_wave;
use nehari_waves::nehari::{nehari_estimates, ray_maximizer, RayCoefficients, DEFAULT_RAY_TOL};
use nehari_waves::operator::{apply_a, difference_derivative, OperatorMode};
use nehari_waves::shape::{aligned_distance, count_local_extrema, tail_mass};

/// Strict unimodality of `|𝒜W|` at σ² = 10 is contradicted by the computed
/// waves: their sign-changing tails carry side lobes near 0.1% of the peak,
/// far above the 1e-6 prominence floor.
const EXPECTED_RED: &[usize] = &[7];

const SIGMA2_LIST: [f64; 4] = [0.01, 0.1, 1.0, 10.0];
const PAIRS: [(f64, f64); 2] = [(4.0, 3.0), (3.0, 1.5)];
const SWEEP_DTAU: f64 = 2e-2;
const PROMINENCE: f64 = 1e-6;
/// Relative changes of `ℓ_K` below this are treated as zero.
const ELL_NOISE: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

struct Run {
    params: ModelParams,
    w: GridProfile,
    summary: RunSummary,
}

fn reference_grid() -> GridSpec {
    GridSpec::new(6.0, 2400).unwrap()
}

fn run(params: ModelParams, spec: GridSpec, cfg: &FlowConfig) -> Run {
    let (w, summary) = solve(&params, &spec, cfg).expect("flow run");
    Run { params, w, summary }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Maximizer of `λ_c` on a geometric grid of `n` points over `[a, b]`,
/// refined by a parabola through the best sample and its neighbours.
fn scan_maximizer(c: &RayCoefficients, p: f64, q: f64, a: f64, b: f64, n: usize) -> (f64, usize) {
    let du = (b / a).ln() / (n - 1) as f64;
    let (r2, rq, rp) = ((2.0 * du).exp(), (q * du).exp(), (p * du).exp());
    let (mut best, mut best_k) = (f64::NEG_INFINITY, 0);
    let (mut x2, mut xq, mut xp) = (0.0, 0.0, 0.0);
    for k in 0..n {
        if k.is_multiple_of(1024) {
            let x = a * (k as f64 * du).exp();
            (x2, xq, xp) = (x * x, x.powf(q), x.powf(p));
        }
        let v = c.c2 * x2 + c.cq * xq - c.cp * xp;
        if v > best {
            best = v;
            best_k = k;
        }
        x2 *= r2;
        xq *= rq;
        xp *= rp;
    }
    let at = |k: usize| c.lambda(a * (k as f64 * du).exp(), p, q);
    let mut u = best_k as f64 * du;
    if best_k > 0 && best_k + 1 < n {
        let (l, m, r) = (at(best_k - 1), at(best_k), at(best_k + 1));
        let denom = l - 2.0 * m + r;
        if denom < 0.0 {
            u += 0.5 * du * (l - r) / denom;
        }
    }
    (a * u.exp(), best_k)
}

fn c1_ray_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut outside, mut edge) = (0.0f64, 0, 0);
    let n = 1_000_000;
    for _ in 0..1000 {
        let c = RayCoefficients::new(
            log_uniform(&mut rng, 1e-3, 1e3),
            log_uniform(&mut rng, 1e-3, 1e3),
            log_uniform(&mut rng, 1e-3, 1e3),
        )
        .unwrap();
        let p = rng.random_range(2.1..6.0);
        let q = 1.0 + rng.random_range(0.02..0.98) * (p - 1.0);
        let xi = ray_maximizer(&c, p, q, DEFAULT_RAY_TOL).unwrap();
        let (lo, hi) = c.bracket(p, q);
        if !(lo * (1.0 - 1e-12) <= xi && xi <= hi * (1.0 + 1e-12)) {
            outside += 1;
        }
        let (scan, k) = scan_maximizer(&c, p, q, 0.25 * lo, 4.0 * hi, n);
        if k == 0 || k == n - 1 {
            edge += 1;
        }
        worst = worst.max((xi - scan).abs() / scan);
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst <= 1e-5 && outside == 0 && edge == 0 && secs < 10.0,
        format!(
            "1000 triples, max rel err {worst:.2e}, {outside} outside bracket, {edge} scan-edge maxima, {secs:.1} s"
        ),
    )
}

fn random_smooth_profile(rng: &mut ChaCha8Rng, spec: GridSpec) -> GridProfile {
    let k = spec.half_period;
    let modes: Vec<(f64, f64)> = (0..6).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..6.3))).collect();
    let bump = rng.random_range(0.5..2.0);
    let noise: Vec<f64> = (0..spec.points).map(|_| rng.random_range(-0.05..0.05)).collect();
    let smooth = GridProfile::from_fn(spec, |x| {
        let waves: f64 = modes
            .iter()
            .enumerate()
            .map(|(m, (a, ph))| a / (1.0 + m as f64) * (std::f64::consts::PI * m as f64 * x / k + ph).cos())
            .sum();
        bump * (-x * x).exp() + 0.5 * waves
    });
    GridProfile::new(spec, smooth.values().iter().zip(&noise).map(|(a, b)| a + b).collect()).unwrap()
}

fn c2_gradients() -> Outcome {
    let start = Instant::now();
    let spec = GridSpec::new(6.0, 240).unwrap();
    let h = spec.spacing();
    let cases = [(4.0, 3.0, 1.0), (3.0, 1.5, 10.0), (5.0, 2.5, 0.1), (4.0, 3.0, 0.01)];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_l, mut worst_f) = (0.0f64, 0.0f64);
    for trial in 0..20 {
        let (p, q, s) = cases[trial % cases.len()];
        let params = ModelParams::new(p, q, s).unwrap();
        let f = Functionals::new(params, spec, OperatorMode::Quadrature).unwrap();
        let w = random_smooth_profile(&mut rng, spec);
        let g = f.gradients(&w).unwrap();
        let (mut err_l, mut err_f, mut ref_l, mut ref_f) = (0.0, 0.0, 0.0, 0.0);
        let mut probe = w.clone();
        for j in 0..spec.points {
            let wj = w.values()[j];
            let eps = 1e-4 * wj.abs().max(1.0);
            probe.values_mut()[j] = wj + eps;
            let up = f.evaluate(&probe).unwrap();
            probe.values_mut()[j] = wj - eps;
            let down = f.evaluate(&probe).unwrap();
            probe.values_mut()[j] = wj;
            let fd_l = (up.action - down.action) / (2.0 * eps);
            let fd_f = (up.constraint - down.constraint) / (2.0 * eps);
            let (gl, gf) = (h * g.action.values()[j], h * g.constraint.values()[j]);
            err_l += (fd_l - gl).powi(2);
            err_f += (fd_f - gf).powi(2);
            ref_l += gl * gl;
            ref_f += gf * gf;
        }
        worst_l = worst_l.max((err_l / ref_l).sqrt());
        worst_f = worst_f.max((err_f / ref_f).sqrt());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst_l <= 1e-5 && worst_f <= 1e-5 && secs < 5.0,
        format!("20 profiles, max rel err dL {worst_l:.2e}, dF {worst_f:.2e}, {secs:.2} s"),
    )
}

fn c3_operator() -> Outcome {
    let spec = GridSpec::new(6.0, 240).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut bounds_ok, mut adjoint_err) = (true, 0.0f64);
    for _ in 0..50 {
        let w = GridProfile::new(spec, (0..spec.points).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
        let v = random_smooth_profile(&mut rng, spec);
        let aw = apply_a(&w, OperatorMode::Quadrature).unwrap();
        for r in [1.0, 1.5, 2.0, 3.0, 4.0, 8.0, f64::INFINITY] {
            bounds_ok &= norm_r(&aw, r).unwrap() <= norm_r(&w, r).unwrap() * (1.0 + 1e-12);
        }
        let w2 = norm2_sq(&w).sqrt();
        bounds_ok &= aw.max_abs() <= w2 * (1.0 + 1e-12);
        bounds_ok &= norm2_sq(&difference_derivative(&w).unwrap()).sqrt() <= 2.0 * w2 * (1.0 + 1e-12);
        for mode in [OperatorMode::Quadrature, OperatorMode::Spectral] {
            let lhs = inner(&apply_a(&w, mode).unwrap(), &v).unwrap();
            let rhs = inner(&w, &apply_a(&v, mode).unwrap()).unwrap();
            adjoint_err = adjoint_err.max((lhs - rhs).abs() / (w2 * norm2_sq(&v).sqrt()));
        }
    }
    let band = |x: f64| {
        let t = std::f64::consts::PI * x / 6.0;
        (t + 0.3).cos() + 0.5 * (2.0 * t).sin() - 0.25 * (3.0 * t + 1.0).cos() + 0.125 * (4.0 * t).cos()
    };
    let gap = |n: usize| {
        let spec = GridSpec::new(6.0, n).unwrap();
        let w = GridProfile::from_fn(spec, band);
        let a = apply_a(&w, OperatorMode::Quadrature).unwrap();
        let b = apply_a(&w, OperatorMode::Spectral).unwrap();
        let diff: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
        norm2_sq(&GridProfile::new(spec, diff).unwrap()).sqrt()
    };
    let e: Vec<f64> = [240, 480, 960].iter().map(|&n| gap(n)).collect();
    let ratios = [e[0] / e[1], e[1] / e[2]];
    let ratios_ok = ratios.iter().all(|r| (r - 4.0).abs() <= 0.5);
    Outcome::new(
        bounds_ok && adjoint_err <= 1e-12 && ratios_ok,
        format!(
            "norm bounds {}, self-adjoint err {adjoint_err:.1e}, quadrature-spectral gaps {:.2e}/{:.2e}/{:.2e}, ratios {:.3}, {:.3}",
            if bounds_ok { "hold" } else { "VIOLATED" },
            e[0],
            e[1],
            e[2],
            ratios[0],
            ratios[1]
        ),
    )
}

fn c4_descent(reference: &Run, halved: &Run) -> Outcome {
    let dt = [5e-4, 2.5e-4];
    let s = [&reference.summary, &halved.summary];
    let c: Vec<f64> = s.iter().zip(dt).map(|(s, dt)| s.stats.max_abs_constraint / dt).collect();
    let descent = s.iter().map(|s| s.stats.max_action_increase).fold(f64::NEG_INFINITY, f64::max);
    let ratio = c[0] / c[1];
    let pass = descent <= 1e-10
        && (0.5..=2.0).contains(&ratio)
        && s.iter().all(|s| s.converged && s.residual <= 1e-8 && s.iterations <= 2_000_000);
    Outcome::new(
        pass,
        format!(
            "max action increase {descent:.1e}, C = max|F|/dtau = {:.4} (dtau 5e-4) vs {:.4} (dtau 2.5e-4), {} and {} iterations, residual {:.2e}",
            c[0], c[1], s[0].iterations, s[1].iterations, s[0].residual
        ),
    )
}

fn c5_certificate(runs: &[&Run]) -> Outcome {
    let (mut worst_tw, mut worst_lambda, mut all) = (0.0f64, 0.0f64, true);
    for r in runs {
        all &= r.summary.converged;
        worst_tw = worst_tw.max(r.summary.tw_residual / norm2_sq(&r.w).sqrt());
        worst_lambda = worst_lambda.max(r.summary.multiplier.abs());
    }
    Outcome::new(
        all && worst_tw <= 1e-7 && worst_lambda <= 1e-7,
        format!(
            "{} converged profiles, max TW residual/|W| {worst_tw:.2e}, max |lambda| {worst_lambda:.2e}",
            runs.len()
        ),
    )
}

fn c6_estimates(runs: &[&Run]) -> Outcome {
    let (mut all_hold, mut worst_gap) = (true, f64::INFINITY);
    let mut amp43 = f64::INFINITY;
    let mut failures = Vec::new();
    for r in runs {
        let report = nehari_estimates(&r.w, &r.params, OperatorMode::Quadrature).expect("on manifold");
        if !report.all_hold() {
            all_hold = false;
            failures.extend(report.violations().map(|v| v.label));
        }
        worst_gap = worst_gap.min(report.amplitude - report.amplitude_threshold);
        if r.params.p == 4.0 && r.params.q == 3.0 {
            amp43 = amp43.min(report.amplitude);
        }
    }
    Outcome::new(
        all_hold && worst_gap >= -1e-6,
        format!(
            "{} profiles, six estimates {}, min amplitude margin {worst_gap:.3e}, min |AW|_inf for (4,3) {amp43:.4} >= 0.75{}",
            runs.len(),
            if all_hold { "hold" } else { "VIOLATED" },
            if failures.is_empty() { String::new() } else { format!(" ({failures:?})") }
        ),
    )
}

/// Local maxima of the periodic sequence, largest first.
fn peaks(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut out: Vec<f64> =
        (0..n).filter(|&i| v[i] > v[(i + n - 1) % n] && v[i] >= v[(i + 1) % n]).map(|i| v[i]).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

fn c7_sweep_shape(sweep: &[Run]) -> Outcome {
    let mut localized = true;
    let mut nonconstant = true;
    let mut tails = Vec::new();
    let mut unimodal = true;
    let mut lobes = Vec::new();
    let mut extrema_ok = true;
    let mut extrema = Vec::new();
    let smallest = SIGMA2_LIST[0];
    let largest = SIGMA2_LIST[SIGMA2_LIST.len() - 1];
    for r in sweep {
        let prm = r.params;
        nonconstant &= r.summary.converged && r.summary.classification == Classification::NonConstant;
        let tail = tail_mass(&r.w);
        if prm.p == 4.0 && prm.q == 3.0 {
            localized &= tail < 0.1;
        }
        tails.push(tail);
        if prm.sigma2 == largest {
            let aw = apply_a(&r.w, OperatorMode::Quadrature).unwrap();
            let abs = GridProfile::new(*aw.spec(), aw.values().iter().map(|v| v.abs()).collect()).unwrap();
            let maxima = count_local_extrema(&abs, PROMINENCE) / 2;
            unimodal &= maxima == 1;
            let pk = peaks(abs.values());
            lobes.push(format!(
                "({},{}) {maxima} maxima, side lobe {:.1}%",
                prm.p,
                prm.q,
                100.0 * pk.get(1).unwrap_or(&0.0) / pk[0]
            ));
        }
        if prm.sigma2 == smallest {
            let count = count_local_extrema(&r.w, PROMINENCE);
            extrema_ok &= count >= 3;
            extrema.push(format!("({},{}) {count}", prm.p, prm.q));
        }
    }
    let max_tail = tails.iter().copied().fold(0.0, f64::max);
    Outcome::new(
        localized && nonconstant && unimodal && extrema_ok,
        format!(
            "non-constant {nonconstant}, localized {localized} (max tail mass {max_tail:.3}); unimodal |AW| at sigma2={largest}: {unimodal} [{}]; W extrema at sigma2={smallest}: {}",
            lobes.join("; "),
            extrema.join(", ")
        ),
    )
}

fn c8_solitary(seed: &Run) -> Outcome {
    let cfg =
        FlowConfig { dtau: SWEEP_DTAU, init: InitialData::Custom(seed.w.values().to_vec()), ..FlowConfig::default() };
    let (rows, _) = continue_in_k(&seed.params, &cfg, seed.w.spec(), 2.0, 3).expect("continuation");
    let rel: Vec<f64> = rows
        .windows(2)
        .map(|w| {
            let r = (w[1].ell - w[0].ell).abs() / w[0].ell;
            if r < ELL_NOISE {
                0.0
            } else {
                r
            }
        })
        .collect();
    let tails: Vec<f64> = rows.iter().map(|r| r.tail_mass).collect();
    let rel_ok = rel.windows(2).all(|w| w[1] <= w[0]) && *rel.last().unwrap() <= 1e-2;
    let tail_ok = tails.windows(2).all(|w| w[1] <= w[0]) && tails[tails.len() - 1] < tails[0];
    let converged = rows.iter().all(|r| r.summary.converged);
    Outcome::new(
        rel_ok && tail_ok && converged && rows.len() == 4,
        format!(
            "sigma2={} (4,3), K = {:?}, ell = {:.12e}, rel changes {:?}, tail mass {:?}",
            seed.params.sigma2,
            rows.iter().map(|r| r.half_period).collect::<Vec<_>>(),
            rows[rows.len() - 1].ell,
            rel.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>(),
            tails.iter().map(|t| format!("{t:.1e}")).collect::<Vec<_>>()
        ),
    )
}

fn c9_lattice(reference: &Run) -> Outcome {
    let params = reference.params;
    let t = 2.0 * reference.w.spec().half_period / params.sigma2.sqrt();
    let cfg = FlowConfig { dtau: SWEEP_DTAU, ..FlowConfig::default() };
    let coarse = run(params, GridSpec::new(6.0, 1200).unwrap(), &cfg);
    let fine = run(params, GridSpec::new(6.0, 4800).unwrap(), &cfg);
    let reports: Vec<_> = [(&coarse.w, 2e-3), (&reference.w, 1e-3), (&fine.w, 5e-4)]
        .iter()
        .map(|(w, dt)| validate_wave(w, &params, *dt, t).expect("lattice run"))
        .collect();
    let base = &reports[1];
    let drifts: Vec<f64> = reports.iter().map(|r| r.drift_l2).collect();
    let refines = drifts.windows(2).all(|w| w[1] < w[0]);
    Outcome::new(
        base.drift_l2 <= 1e-2 && base.energy_drift <= 1e-6 && base.momentum_drift <= 1e-10 && refines,
        format!(
            "T={t}, dt=1e-3: strain drift {:.2e}, energy drift {:.2e}, momentum drift {:.1e}; (N, dt) refinement drifts {:.2e} -> {:.2e} -> {:.2e}",
            base.drift_l2, base.energy_drift, base.momentum_drift, drifts[0], drifts[1], drifts[2]
        ),
    )
}

fn c10_modes(reference: &Run) -> Outcome {
    let params = reference.params;
    let exact_cfg = FlowConfig { projection_mode: ProjectionMode::ExactNehari, ..FlowConfig::default() };
    let exact = run(params, reference_grid(), &exact_cfg);
    let projection_gap = aligned_distance(&reference.w, &exact.w);
    let operator_gap = |n: usize| {
        let spec = GridSpec::new(6.0, n).unwrap();
        let base = FlowConfig { dtau: SWEEP_DTAU, ..FlowConfig::default() };
        let quad = run(params, spec, &base);
        let spec_run = run(params, spec, &FlowConfig { operator_mode: OperatorMode::Spectral, ..base });
        (quad.summary.converged && spec_run.summary.converged, aligned_distance(&quad.w, &spec_run.w))
    };
    let (ok_coarse, gap_coarse) = operator_gap(2400);
    let (ok_fine, gap_fine) = operator_gap(19200);
    Outcome::new(
        reference.summary.converged && exact.summary.converged && ok_coarse && ok_fine && projection_gap <= 1e-6 && gap_fine <= 1e-6,
        format!(
            "paper vs exact projection {projection_gap:.1e}; quadrature vs spectral {gap_coarse:.2e} at N=2400, {gap_fine:.2e} at N=19200"
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |id: usize, name: &'static str, outcome: Outcome| {
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        let note = if !outcome.pass && EXPECTED_RED.contains(&id) { " [expected red]" } else { "" };
        println!("{tag} C{id:<2} {name}: {}{note}", outcome.detail);
        results.push((id, name, outcome));
    };

    report(1, "ray-maximizer oracle", c1_ray_oracle());
    report(2, "gradient correctness", c2_gradients());
    report(3, "operator invariants", c3_operator());

    let params = ModelParams::new(4.0, 3.0, 1.0).unwrap();
    let reference = run(params, reference_grid(), &FlowConfig::default());
    let halved = run(params, reference_grid(), &FlowConfig { dtau: 2.5e-4, ..FlowConfig::default() });
    report(4, "flow descent and constraint", c4_descent(&reference, &halved));

    let sweep_cfg = FlowConfig { dtau: SWEEP_DTAU, ..FlowConfig::default() };
    let sweep: Vec<Run> = PAIRS
        .iter()
        .flat_map(|&(p, q)| SIGMA2_LIST.iter().map(move |&s| (p, q, s)))
        .map(|(p, q, s)| run(ModelParams::new(p, q, s).unwrap(), reference_grid(), &sweep_cfg))
        .collect();
    let mut converged: Vec<&Run> = vec![&reference, &halved];
    converged.extend(sweep.iter());
    report(5, "critical-point certificate", c5_certificate(&converged));
    report(6, "Nehari estimate suite", c6_estimates(&converged));
    report(7, "sweep qualitative shape", c7_sweep_shape(&sweep));

    let seed = sweep.iter().find(|r| r.params.p == 4.0 && r.params.sigma2 == SIGMA2_LIST[0]).unwrap();
    report(8, "solitary limit", c8_solitary(seed));
    report(9, "lattice fidelity", c9_lattice(&reference));
    report(10, "cross-mode agreement", c10_modes(&reference));

    let passed = results.iter().filter(|r| r.2.pass).count();
    let unexpected: Vec<usize> =
        results.iter().filter(|r| !r.2.pass && !EXPECTED_RED.contains(&r.0)).map(|r| r.0).collect();
    println!(
        "acceptance: {passed}/{} criteria pass, expected red {:?}, unexpected failures {:?}, {:.0} s",
        results.len(),
        EXPECTED_RED,
        unexpected,
        start.elapsed().as_secs_f64()
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
