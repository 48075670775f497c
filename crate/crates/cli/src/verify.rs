//! Acceptance criteria as executable checks.
//!
//! `Level::Full` uses the reference sizes (32³ runs, 1000-sample
//! ensembles); `Level::Fast` shrinks everything to 16³ or smaller so the
//! whole table finishes in well under a minute. Tolerances are the same at
//! both levels.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_complex::Complex64 as C;
use tcm_core::bench::{run_bench, sample_ratio, BenchId, EnsembleConfig};
use tcm_core::diagnostics::{
    cancellation_suite, monotone_damping_check, monotone_damping_scale, twin_run_probe, DiagnosticsConfig,
    DiagnosticsRecord,
};
use tcm_core::model::{initial_condition, InitialCondition, ModelParams, State, Switches};
use tcm_core::multiplier::{apply_multiplier, Multiplier};
use tcm_core::norms::{l2_norm, l2_norm_vector};
use tcm_core::ops::{dealiased_product, gradient, leray_project};
use tcm_core::random::{random_band_limited_field, random_band_limited_vector};
use tcm_core::stepper::{integrate, step, StepperConfig};
use tcm_core::{Axis, Field, Grid, Representation, VectorField};

use crate::checkpoint;
use crate::commands::execute;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Level, String> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            _ => Err(format!("unknown level {s:?} (expected fast or full)")),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Fast => "fast",
            Level::Full => "full",
        })
    }
}

/// Pass thresholds, one group per criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// 1: `r(T) / E(0)` ceiling.
    pub energy_residual: f64,
    /// 1: minimum reduction of `r(T)` when `dt` is halved.
    pub dt_halving_gain: f64,
    /// 2: normalized cancellation residual ceiling.
    pub cancellation: f64,
    /// 2: the broken control must exceed this.
    pub broken_control: f64,
    /// 3: monotonicity quadrature floor, as a multiple of `-scale`.
    pub damping: f64,
    /// 4: relative error of the fractional symbol.
    pub symbol: f64,
    /// 4: relative per-step error of linear single-mode evolution.
    pub linear_mode: f64,
    /// 5: idempotence and gradient annihilation, relative.
    pub leray: f64,
    /// 5: `||div u|| / ||u||` after every reference step.
    pub divergence: f64,
    /// 6: allowed rise of `E` between samples, relative to `E(0)`.
    pub energy_slack: f64,
    /// 6: monitored norms must stay below this multiple of their initial value.
    pub growth: f64,
    /// 7: relative error of `δ(0) = ε²`.
    pub twin_initial: f64,
    /// 7: relative disagreement of `δ/ε²` between `ε` and `ε/2`.
    pub twin_agreement: f64,
    /// 8: relative change of a ratio under rescaling.
    pub bench_scale: f64,
    /// 9: expected order and allowed deviation.
    pub order: f64,
    pub order_band: f64,
    /// 10: bytes allowed to differ between repeated runs and round trips.
    pub differing_bytes: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            energy_residual: 1e-5,
            dt_halving_gain: 4.0,
            cancellation: 1e-11,
            broken_control: 1e-3,
            damping: 1e-12,
            symbol: 1e-14,
            linear_mode: 1e-13,
            leray: 1e-13,
            divergence: 1e-10,
            energy_slack: 1e-12,
            growth: 10.0,
            twin_initial: 1e-10,
            twin_agreement: 0.1,
            bench_scale: 1e-12,
            order: 3.0,
            order_band: 0.3,
            differing_bytes: 0.0,
        }
    }
}

impl Tolerances {
    /// Fault injection: makes criterion `n` impossible to pass.
    pub fn tampered(mut self, n: usize) -> Tolerances {
        let never = f64::NEG_INFINITY;
        match n {
            1 => self.energy_residual = never,
            2 => self.cancellation = never,
            3 => self.damping = never,
            4 => self.symbol = never,
            5 => self.leray = never,
            6 => self.growth = never,
            7 => self.twin_agreement = never,
            8 => self.bench_scale = never,
            9 => self.order_band = never,
            10 => self.differing_bytes = never,
            _ => {}
        }
        self
    }
}

pub const NAMES: [&str; 10] = [
    "energy identity",
    "cancellation suite",
    "damping monotonicity",
    "operator exactness",
    "Leray projection",
    "boundedness monitors",
    "twin-run probe",
    "inequality bench",
    "self-convergence",
    "reproducibility",
];

#[derive(Clone, Debug)]
pub struct Outcome {
    pub number: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:>2} {:<22} {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.number,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

struct Sizes {
    ref_n: usize,
    ref_t: f64,
    ref_dt: f64,
    cancel_n: usize,
    cancel_states: usize,
    cancel_band: usize,
    damping_n: usize,
    damping_pairs: usize,
    twin_n: usize,
    twin_t: f64,
    twin_dt: f64,
    bench_n: usize,
    bench_samples: usize,
    bench_band: usize,
    conv_n: usize,
    conv_t: f64,
    conv_dt: f64,
    repro_n: usize,
}

impl Sizes {
    fn of(level: Level) -> Sizes {
        match level {
            Level::Full => Sizes {
                ref_n: 32,
                ref_t: 1.0,
                ref_dt: 1e-3,
                cancel_n: 32,
                cancel_states: 100,
                cancel_band: 10,
                damping_n: 16,
                damping_pairs: 1000,
                twin_n: 32,
                twin_t: 0.5,
                twin_dt: 2e-3,
                bench_n: 32,
                bench_samples: 1000,
                bench_band: 5,
                conv_n: 16,
                conv_t: 0.5,
                conv_dt: 5e-3,
                repro_n: 16,
            },
            Level::Fast => Sizes {
                ref_n: 16,
                ref_t: 0.5,
                ref_dt: 2e-3,
                cancel_n: 16,
                cancel_states: 20,
                cancel_band: 5,
                damping_n: 8,
                damping_pairs: 200,
                twin_n: 16,
                twin_t: 0.25,
                twin_dt: 5e-3,
                bench_n: 16,
                bench_samples: 200,
                bench_band: 4,
                conv_n: 16,
                conv_t: 0.25,
                conv_dt: 5e-3,
                repro_n: 8,
            },
        }
    }
}

/// The Taylor-Green run shared by criteria 1, 5 and 6.
struct Reference {
    records: Vec<DiagnosticsRecord>,
    max_divergence: f64,
    residual: f64,
    residual_half: f64,
}

fn reference_params() -> ModelParams {
    ModelParams::new(1.5, 4.0).expect("valid parameters")
}

fn taylor_green(n: usize) -> Result<State, String> {
    let g = Grid::cube(n).map_err(|e| e.to_string())?;
    initial_condition(&g, InitialCondition::TaylorGreen, 1.0, 0).map_err(|e| e.to_string())
}

fn reference_run(sz: &Sizes) -> Result<Reference, String> {
    let s0 = taylor_green(sz.ref_n)?;
    let p = reference_params();
    let diag = DiagnosticsConfig::default();
    let mut max_divergence: f64 = 0.0;
    let out = integrate(&s0, &p, &StepperConfig::fixed(sz.ref_dt, sz.ref_t), &diag, |snap| {
        max_divergence = max_divergence.max(snap.state().divergence_ratio());
    })
    .map_err(|e| e.to_string())?;
    let half = integrate(&s0, &p, &StepperConfig::fixed(sz.ref_dt / 2.0, sz.ref_t), &diag, |_| {})
        .map_err(|e| e.to_string())?;
    let e0 = out.records[0].energy;
    let last = |r: &[DiagnosticsRecord]| r.last().map_or(f64::NAN, |x| x.energy_residual) / e0;
    Ok(Reference {
        residual: last(&out.records),
        residual_half: last(&half.records),
        records: out.records,
        max_divergence,
    })
}

pub struct Verifier {
    level: Level,
    sizes: Sizes,
    tol: Tolerances,
    reference: OnceLock<Result<Reference, String>>,
    scratch: PathBuf,
}

type Check = Result<(bool, String), String>;

impl Verifier {
    pub fn new(level: Level) -> Verifier {
        Verifier::with_tolerances(level, Tolerances::default())
    }

    pub fn with_tolerances(level: Level, tol: Tolerances) -> Verifier {
        let nanos = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos());
        let scratch = std::env::temp_dir().join(format!("tcm-verify-{}-{nanos}", std::process::id()));
        Verifier { level, sizes: Sizes::of(level), tol, reference: OnceLock::new(), scratch }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    fn reference(&self) -> Result<&Reference, String> {
        self.reference.get_or_init(|| reference_run(&self.sizes)).as_ref().map_err(|e| format!("reference run: {e}"))
    }

    pub fn check(&self, n: usize) -> Outcome {
        let start = Instant::now();
        let result = match n {
            1 => self.energy_identity(),
            2 => self.cancellations(),
            3 => self.damping_monotonicity(),
            4 => self.operator_exactness(),
            5 => self.leray(),
            6 => self.boundedness(),
            7 => self.twin_runs(),
            8 => self.inequality_bench(),
            9 => self.self_convergence(),
            10 => self.reproducibility(),
            _ => Err(format!("no criterion {n}")),
        };
        let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
        Outcome {
            number: n,
            name: NAMES.get(n.wrapping_sub(1)).copied().unwrap_or("?"),
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    pub fn run_all(&self, mut each: impl FnMut(&Outcome)) -> Vec<Outcome> {
        (1..=10)
            .map(|n| {
                let o = self.check(n);
                each(&o);
                o
            })
            .collect()
    }

    fn energy_identity(&self) -> Check {
        let r = self.reference()?;
        let gain = r.residual / r.residual_half;
        let passed = r.residual <= self.tol.energy_residual && gain >= self.tol.dt_halving_gain;
        Ok((
            passed,
            format!(
                "{n}³, dt = {dt:e}: r(T)/E(0) = {:.3e} (<= {:e}); dt/2 gives {:.3e}, reduction {gain:.2}x (>= {})",
                r.residual,
                self.tol.energy_residual,
                r.residual_half,
                self.tol.dt_halving_gain,
                n = self.sizes.ref_n,
                dt = self.sizes.ref_dt,
            ),
        ))
    }

    fn cancellations(&self) -> Check {
        let sz = &self.sizes;
        let g = Grid::cube(sz.cancel_n).map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        let mut broken_min = f64::INFINITY;
        for seed in 0..sz.cancel_states as u64 {
            let kind = InitialCondition::RandomBand { max_mode: sz.cancel_band };
            let s = initial_condition(&g, kind, 1.0, seed).map_err(|e| e.to_string())?;
            let rep = cancellation_suite(&s).map_err(|e| e.to_string())?;
            worst = worst.max(rep.max_normalized());
            if seed < 10 {
                let broken = broken_control(&s).map_err(|e| e.to_string())?;
                let rep = cancellation_suite(&broken).map_err(|e| e.to_string())?;
                broken_min = broken_min.min(rep.max_normalized());
            }
        }
        let passed = worst <= self.tol.cancellation && broken_min > self.tol.broken_control;
        Ok((
            passed,
            format!(
                "{} states on {}³: max normalized residual {worst:.2e} (<= {:e}); unprojected control min {broken_min:.2e} (> {:e})",
                sz.cancel_states, sz.cancel_n, self.tol.cancellation, self.tol.broken_control
            ),
        ))
    }

    fn damping_monotonicity(&self) -> Check {
        let sz = &self.sizes;
        let g = Grid::cube(sz.damping_n).map_err(|e| e.to_string())?;
        let band = sz.damping_n / 3;
        let mut worst = f64::INFINITY;
        for i in 0..sz.damping_pairs as u64 {
            let beta = if i % 2 == 0 { 4.0 } else { 5.0 };
            let a = random_band_limited_vector(&g, band, 2 * i, false).map_err(|e| e.to_string())?;
            let w = random_band_limited_vector(&g, band, 2 * i + 1, false).map_err(|e| e.to_string())?;
            let b = match i % 4 {
                0 | 1 => w.scaled([0.1, 1.0, 10.0][(i / 4 % 3) as usize]),
                2 => a.axpy(1e-3, &w).map_err(|e| e.to_string())?,
                _ => a.scaled(-0.5).axpy(1.0, &w).map_err(|e| e.to_string())?,
            };
            let q = monotone_damping_check(&a, &b, beta).map_err(|e| e.to_string())?;
            let scale = monotone_damping_scale(&a, &b, beta).map_err(|e| e.to_string())?;
            worst = worst.min(q / scale);
        }
        let passed = worst >= -self.tol.damping;
        Ok((
            passed,
            format!(
                "{} pairs on {}³, beta in {{4, 5}}: min quadrature/scale {worst:.3e} (>= -{:e})",
                sz.damping_pairs, sz.damping_n, self.tol.damping
            ),
        ))
    }

    fn operator_exactness(&self) -> Check {
        let g = Grid::new([16, 12, 8], [2.0, 3.0, 5.0]).map_err(|e| e.to_string())?;
        let f = random_band_limited_field(&g, 2, 9).map_err(|e| e.to_string())?;
        let [n1, n2, _] = g.dims();
        let l = g.lengths();
        let mut symbol_err: f64 = 0.0;
        for alpha in [0.75, 1.5, 2.3] {
            let out = apply_multiplier(&f, Multiplier::FractionalLaplacian { alpha }).map_err(|e| e.to_string())?;
            let (a, b) = (f.spectral().map_err(|e| e.to_string())?, out.spectral().map_err(|e| e.to_string())?);
            for idx in 0..g.len() {
                let i = [idx % n1, (idx / n1) % n2, idx / (n1 * n2)];
                let m = Axis::ALL.map(|ax| g.modes(ax)[i[ax.index()]] as f64);
                let k2: f64 = (0..3).map(|j| (std::f64::consts::TAU * m[j] / l[j]).powi(2)).sum();
                let want = a[idx] * k2.powf(alpha);
                if want.norm() > 0.0 {
                    symbol_err = symbol_err.max((b[idx] - want).norm() / want.norm());
                } else if b[idx].norm() > 0.0 {
                    symbol_err = f64::INFINITY;
                }
            }
        }
        let linear_err = linear_mode_error(&g)?;
        let passed = symbol_err <= self.tol.symbol && linear_err <= self.tol.linear_mode;
        Ok((
            passed,
            format!(
                "|k|^(2 alpha) max rel error {symbol_err:.2e} (<= {:e}); linear single-mode steps max rel error {linear_err:.2e} (<= {:e})",
                self.tol.symbol, self.tol.linear_mode
            ),
        ))
    }

    fn leray(&self) -> Check {
        let g = Grid::cube(self.sizes.ref_n).map_err(|e| e.to_string())?;
        let mut idem: f64 = 0.0;
        let mut annihilation: f64 = 0.0;
        for seed in 0..10 {
            let w = random_band_limited_vector(&g, 5, seed, false).map_err(|e| e.to_string())?;
            let p1 = leray_project(&w).map_err(|e| e.to_string())?;
            let p2 = leray_project(&p1).map_err(|e| e.to_string())?;
            idem = idem.max(l2_norm_vector(&p2.axpy(-1.0, &p1).map_err(|e| e.to_string())?) / l2_norm_vector(&p1));
            let q = random_band_limited_field(&g, 5, seed + 100).map_err(|e| e.to_string())?;
            let gq = gradient(&q).map_err(|e| e.to_string())?;
            let pg = leray_project(&gq).map_err(|e| e.to_string())?;
            annihilation = annihilation.max(l2_norm_vector(&pg) / l2_norm_vector(&gq));
        }
        let r = self.reference()?;
        let passed =
            idem <= self.tol.leray && annihilation <= self.tol.leray && r.max_divergence <= self.tol.divergence;
        Ok((
            passed,
            format!(
                "idempotence {idem:.2e}, gradients {annihilation:.2e} (<= {:e}); max ||div u||/||u|| over the reference run {:.2e} (<= {:e})",
                self.tol.leray, r.max_divergence, self.tol.divergence
            ),
        ))
    }

    fn boundedness(&self) -> Check {
        let r = self.reference()?;
        let recs = &r.records;
        let e0 = recs[0].energy;
        let increases =
            recs.windows(2).filter(|w| !(w[1].energy <= w[0].energy + self.tol.energy_slack * e0)).count();
        // records hold squared norms
        let monitored: [(&str, fn(&DiagnosticsRecord) -> f64); 9] = [
            ("d3_u", |x| x.d3_u),
            ("grad_v", |x| x.grad_v),
            ("grad_theta", |x| x.grad_theta),
            ("lap_theta", |x| x.lap_theta),
            ("lap_u", |x| x.lap_u),
            ("lap_v", |x| x.lap_v),
            ("lambda_s_u", |x| x.lambda_s_u),
            ("lambda_s_v", |x| x.lambda_s_v),
            ("lambda_s_theta", |x| x.lambda_s_theta),
        ];
        let mut worst = ("", 0.0f64);
        let mut all_ok = true;
        for (name, get) in monitored {
            let initial = get(&recs[0]).sqrt();
            for x in recs {
                let v = get(x).sqrt();
                let growth = v / initial;
                let ok = v.is_finite() && initial > 0.0 && v < self.tol.growth * initial;
                all_ok &= ok;
                if !(growth <= worst.1) {
                    worst = (name, growth);
                }
            }
        }
        let passed = increases == 0 && all_ok;
        Ok((
            passed,
            format!(
                "{} samples: {increases} energy increases; largest norm growth {:.3} ({}) (< {})",
                recs.len(),
                worst.1,
                worst.0,
                self.tol.growth
            ),
        ))
    }

    fn twin_runs(&self) -> Check {
        let sz = &self.sizes;
        let s0 = taylor_green(sz.twin_n)?;
        let g = s0.grid().clone();
        let d = random_band_limited_vector(&g, 4.min(sz.twin_n / 3), 17, true).map_err(|e| e.to_string())?;
        let eps = 1e-3;
        let cfg = StepperConfig { cadence: 10, ..StepperConfig::fixed(sz.twin_dt, sz.twin_t) };
        let rep = twin_run_probe(&s0, &d, &[eps, eps / 2.0], &reference_params(), &cfg).map_err(|e| e.to_string())?;
        let (a, b) = (&rep.curves[0].normalized, &rep.curves[1].normalized);
        let initial = (a[0] - 1.0).abs().max((b[0] - 1.0).abs());
        let disagreement = a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs())).fold(0.0, f64::max);
        let passed = initial <= self.tol.twin_initial && disagreement <= self.tol.twin_agreement;
        Ok((
            passed,
            format!(
                "{}³, T = {}, eps = {eps:e} and {:e}: |delta(0)/eps² - 1| = {initial:.2e} (<= {:e}); curve disagreement {disagreement:.2e} (<= {})",
                sz.twin_n,
                sz.twin_t,
                eps / 2.0,
                self.tol.twin_initial,
                self.tol.twin_agreement
            ),
        ))
    }

    fn inequality_bench(&self) -> Check {
        let sz = &self.sizes;
        let g = Grid::cube(sz.bench_n).map_err(|e| e.to_string())?;
        let mut parts = Vec::new();
        let mut passed = true;
        let mut worst_scale: f64 = 0.0;
        let lambdas = [1e-3, -2.5, 1e3];
        for id in BenchId::ALL {
            let cfg = EnsembleConfig::new(g.clone(), sz.bench_samples, sz.bench_band, 0);
            let a = run_bench(id, &cfg).map_err(|e| e.to_string())?;
            let b = run_bench(id, &cfg).map_err(|e| e.to_string())?;
            let same = a.max_ratio.to_bits() == b.max_ratio.to_bits()
                && a.argmax_seed == b.argmax_seed
                && a.samples.iter().zip(&b.samples).all(|(x, y)| x.1.map(f64::to_bits) == y.1.map(f64::to_bits));
            let finite = a.max_ratio.is_finite() && a.max_ratio > 0.0 && a.samples.iter().all(|s| s.1.is_none_or(f64::is_finite));
            for (i, &(seed, r)) in a.samples.iter().enumerate() {
                let Some(r) = r else { continue };
                let psi = random_band_limited_field(&g, sz.bench_band, seed).map_err(|e| e.to_string())?;
                let scaled = sample_ratio(id, &psi.scaled(lambdas[i % 3]), cfg.alpha).map_err(|e| e.to_string())?;
                let err = scaled.map_or(f64::INFINITY, |x| (x - r).abs() / r);
                worst_scale = worst_scale.max(err);
            }
            passed &= same && finite;
            parts.push(format!("{id} max {:.4e}{}", a.max_ratio, if same { "" } else { " NOT reproducible" }));
        }
        passed &= worst_scale <= self.tol.bench_scale;
        Ok((
            passed,
            format!(
                "{} samples on {}³: {}; rescaling error {worst_scale:.2e} (<= {:e})",
                sz.bench_samples,
                sz.bench_n,
                parts.join(", "),
                self.tol.bench_scale
            ),
        ))
    }

    fn self_convergence(&self) -> Check {
        let sz = &self.sizes;
        let s0 = taylor_green(sz.conv_n)?;
        let p = reference_params();
        let run = |dt: f64| -> Result<State, String> {
            let cfg = StepperConfig { cadence: usize::MAX, ..StepperConfig::fixed(dt, sz.conv_t) };
            Ok(integrate(&s0, &p, &cfg, &DiagnosticsConfig::default(), |_| {}).map_err(|e| e.to_string())?.state)
        };
        let h = sz.conv_dt;
        let (a, b, c) = (run(h)?, run(h / 2.0)?, run(h / 4.0)?);
        let (e1, e2) = (state_distance(&a, &b)?, state_distance(&b, &c)?);
        let order = (e1 / e2).log2();
        let passed = (order - self.tol.order).abs() <= self.tol.order_band;
        Ok((
            passed,
            format!(
                "{}³ Taylor-Green, dt = {h:e}/{:e}/{:e}: differences {e1:.3e}, {e2:.3e}, observed order {order:.3} ({} ± {})",
                sz.conv_n,
                h / 2.0,
                h / 4.0,
                self.tol.order,
                self.tol.order_band
            ),
        ))
    }

    fn reproducibility(&self) -> Check {
        let dir = self.scratch.join("repro");
        let result = reproducibility_in(&dir, self.sizes.repro_n, self.tol.differing_bytes);
        let _ = std::fs::remove_dir_all(&self.scratch);
        result
    }
}

/// `u + κ ∇(|u|^2)` with `κ` chosen so the added gradient has the size of `u`:
/// an unprojected velocity whose divergence correlates with `|u|^2`.
pub fn broken_control(s: &State) -> tcm_core::Result<State> {
    let up = s.u.to_physical()?;
    let mut q: Option<Field> = None;
    for c in up.components() {
        let sq = dealiased_product(c, c)?;
        q = Some(match q {
            None => sq,
            Some(acc) => acc.axpy(1.0, &sq)?,
        });
    }
    let gq = gradient(&q.expect("three components"))?;
    let mut out = s.clone();
    out.u = s.u.clone().into_spectral().axpy(l2_norm_vector(&s.u) / l2_norm_vector(&gq), &gq)?;
    Ok(out)
}

fn state_distance(a: &State, b: &State) -> Result<f64, String> {
    let e = |x: tcm_core::Result<VectorField>| x.map(|w| l2_norm_vector(&w).powi(2)).map_err(|e| e.to_string());
    let du = e(a.u.axpy(-1.0, &b.u))?;
    let dv = e(a.v.axpy(-1.0, &b.v))?;
    let dt = l2_norm(&a.theta.axpy(-1.0, &b.theta).map_err(|e| e.to_string())?).powi(2);
    Ok((du + dv + dt).sqrt())
}

/// Spectral field with only the modes `±m`, set to `amp e^{i m.x} + c.c.`.
fn single_mode(g: &Arc<Grid>, m: [i64; 3], amp: C) -> Result<Field, String> {
    let mut c = vec![C::default(); g.len()];
    let [n1, n2, n3] = g.dims();
    let wrap = |mj: i64, nj: usize| mj.rem_euclid(nj as i64) as usize;
    let idx = g.index(wrap(m[0], n1), wrap(m[1], n2), wrap(m[2], n3));
    c[idx] = amp;
    c[g.mirror_index(idx)] = amp.conj();
    Field::from_spectral(g, c).map_err(|e| e.to_string())
}

/// Largest relative per-step deviation from the exact exponential for
/// single-mode data evolved with every explicit term off.
fn linear_mode_error(g: &Arc<Grid>) -> Result<f64, String> {
    let alpha = 1.5;
    let p = ModelParams::new(alpha, 4.0).map_err(|e| e.to_string())?.with_switches(Switches::linear_only());
    let l = g.lengths();
    let dt = 0.01;
    let cfg = StepperConfig::fixed(dt, dt);
    let mut worst: f64 = 0.0;
    for m in [[1i64, 0, 0], [0, 2, 1], [3, -1, 2], [-2, 4, 3]] {
        let k = [0, 1, 2].map(|j| std::f64::consts::TAU * m[j] as f64 / l[j]);
        // a ⊥ k keeps u solenoidal
        let e = if k[2] != 0.0 { [1.0, 0.0, 0.0] } else { [0.0, 0.0, 1.0] };
        let a = [k[1] * e[2] - k[2] * e[1], k[2] * e[0] - k[0] * e[2], k[0] * e[1] - k[1] * e[0]];
        let comps = |coef: [f64; 3], phase: C| -> Result<VectorField, String> {
            let f = |j: usize| single_mode(g, m, phase * coef[j]);
            VectorField::new([f(0)?, f(1)?, f(2)?]).map_err(|e| e.to_string())
        };
        let mut s = State::zeros(g);
        s.u = comps(a, C::new(0.5, 0.25))?;
        s.v = comps([1.0, -0.5, 0.25], C::new(0.0, 0.5))?;
        s.theta = single_mode(g, m, C::new(0.3, -0.1))?;
        let kh2 = k[0] * k[0] + k[1] * k[1];
        let k2 = kh2 + k[2] * k[2];
        let factors = [(-kh2 * dt).exp(), (-k2.powf(alpha) * dt).exp(), (-k2 * dt).exp()];
        for _ in 0..10 {
            let next = step(&s, &p, &cfg).map_err(|e| e.to_string())?;
            let before = s.u.components().iter().chain(s.v.components()).chain([&s.theta]);
            let after = next.u.components().iter().chain(next.v.components()).chain([&next.theta]);
            for (j, (x, y)) in before.zip(after).enumerate() {
                let factor = factors[[0, 0, 0, 1, 1, 1, 2][j]];
                let (cx, cy) = (x.spectral_data(), y.spectral_data());
                for (p0, p1) in cx.iter().zip(cy.iter()) {
                    let want = p0 * factor;
                    // coefficients are O(1); projection roundoff elsewhere only has to stay tiny
                    if p0.norm() > 1e-8 {
                        worst = worst.max((p1 - want).norm() / want.norm());
                    } else if (p1 - want).norm() > 1e-15 {
                        worst = f64::INFINITY;
                    }
                }
            }
            s = next;
        }
    }
    Ok(worst)
}

fn reproducibility_in(dir: &Path, n: usize, allowed: f64) -> Check {
    let text = format!(
        "grid.n1 = {n}\ngrid.n2 = {n}\ngrid.n3 = {n}\nic.kind = random_band\nic.max_mode = 2\nic.seed = 5\n\
         step.dt = 0.01\nstep.t_end = 0.06\nout.cadence = 1\nout.checkpoint_every = 2\ndiag.cancellations = true\n\
         diag.alias_defect = true\nout.dir = {}\n",
        dir.display()
    );
    let cfg = RunConfig::parse(&text).map_err(|e| e.to_string())?;
    let read = |p: &Path| std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()));
    execute(&cfg, false).map_err(|e| e.to_string())?;
    let first = read(&dir.join("diagnostics.csv"))?;
    let first_ckpt = read(&dir.join("checkpoint_00000004.bin"))?;
    execute(&cfg, false).map_err(|e| e.to_string())?;
    let second = read(&dir.join("diagnostics.csv"))?;
    let second_ckpt = read(&dir.join("checkpoint_00000004.bin"))?;
    let csv_diff = differing_bytes(&first, &second) + differing_bytes(&first_ckpt, &second_ckpt);

    let loaded = checkpoint::decode(&first_ckpt).map_err(|e| e.to_string())?;
    let reencoded = checkpoint::encode(&loaded.state, loaded.alpha, loaded.beta);
    let g = Grid::new([n, n + 2, n], [1.0, 2.0, 3.0]).map_err(|e| e.to_string())?;
    let fresh = initial_condition(&g, InitialCondition::RandomBand { max_mode: 1 }, 0.9, 3)
        .map_err(|e| e.to_string())?
        .into_physical();
    let path = dir.join("fresh.bin");
    checkpoint::save(&path, &fresh, 1.5, 4.0).map_err(|e| e.to_string())?;
    let back = checkpoint::load(&path).map_err(|e| e.to_string())?;
    let bits = |s: &State| -> Vec<u64> {
        let fields = s.u.components().iter().chain(s.v.components()).chain([&s.theta]);
        fields.flat_map(|f| f.physical_data().iter().map(|x| x.to_bits()).collect::<Vec<_>>()).collect()
    };
    let mut rt_diff = differing_bytes(&reencoded, &first_ckpt);
    let (x, y) = (bits(&back.state), bits(&fresh));
    rt_diff += x.iter().zip(&y).filter(|(a, b)| a != b).count() + x.len().abs_diff(y.len());
    if back.state.time.to_bits() != fresh.time.to_bits() || back.state.u.representation() != Representation::Physical {
        rt_diff += 1;
    }
    let passed = csv_diff as f64 <= allowed && rt_diff as f64 <= allowed;
    Ok((
        passed,
        format!(
            "repeated run: {csv_diff} differing bytes in CSV ({} bytes) and checkpoints; save/load round trip: {rt_diff} differing values (<= {allowed})",
            first.len()
        ),
    ))
}

fn differing_bytes(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len())
}

/// `tcm verify`: prints one line per criterion; fails naming every criterion
/// that did not pass.
pub fn cmd_verify(level: Level, tamper: Option<usize>) -> Result<(), CliError> {
    let mut tol = Tolerances::default();
    if let Some(n) = tamper {
        tol = tol.tampered(n);
    }
    let v = Verifier::with_tolerances(level, tol);
    println!("verification level: {level}");
    let outcomes = v.run_all(|o| println!("{o}"));
    let failed: Vec<String> =
        outcomes.iter().filter(|o| !o.passed).map(|o| format!("{} {}", o.number, o.name)).collect();
    if failed.is_empty() {
        println!("all {} criteria passed", outcomes.len());
        Ok(())
    } else {
        Err(CliError::VerifyFailed(failed))
    }
}
