//! `run`, `sweep` and `bench`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use tcm_core::bench::{run_bench, BenchId, BenchReport, EnsembleConfig};
use tcm_core::diagnostics::{bound_monitor, BoundReport, Ceiling, DiagnosticsRecord, TheoremClass};
use tcm_core::model::{initial_condition, InitialCondition, State};
use tcm_core::stepper::{integrate, IntegrateError};
use tcm_core::Grid;

use crate::checkpoint;
use crate::config::{IcKind, RunConfig, SweepSpec};
use crate::error::CliError;
use crate::output;

pub fn initial_state(cfg: &RunConfig) -> Result<State, CliError> {
    let grid = cfg.grid()?;
    let kind = match &cfg.ic.kind {
        IcKind::TaylorGreen => InitialCondition::TaylorGreen,
        IcKind::RandomBand => InitialCondition::RandomBand { max_mode: cfg.ic.max_mode },
        IcKind::Checkpoint(path) => {
            let c = checkpoint::load(path)?;
            let g = c.state.grid();
            if g.dims() != grid.dims() || g.lengths() != grid.lengths() {
                return Err(CliError::Config {
                    line: None,
                    message: format!(
                        "checkpoint grid {:?} / {:?} does not match the configured grid",
                        g.dims(),
                        g.lengths()
                    ),
                });
            }
            return Ok(c.state);
        }
    };
    Ok(initial_condition(&grid, kind, cfg.ic.amplitude, cfg.ic.seed)?)
}

/// What a run produced, whether or not it reached `t_end`.
#[derive(Debug)]
pub struct RunOutcome {
    pub records: Vec<DiagnosticsRecord>,
    pub steps: usize,
    /// Set when the blow-up detector stopped the run.
    pub blowup: Option<(f64, String)>,
    pub global: BoundReport,
    /// Present in the smooth-solution regime.
    pub smooth: Option<BoundReport>,
}

impl RunOutcome {
    /// `bounded`, `blow-up` or `unbounded`.
    pub fn verdict(&self) -> &'static str {
        if self.blowup.is_some() {
            "blow-up"
        } else if self.global.bounded && self.smooth.as_ref().is_none_or(|r| r.bounded) {
            "bounded"
        } else {
            "unbounded"
        }
    }

    pub fn max_grad_u(&self) -> f64 {
        self.records.iter().map(|r| r.grad_u).fold(0.0, f64::max).sqrt()
    }

    pub fn final_energy(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.energy)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        match &self.blowup {
            Some((t, reason)) => writeln!(s, "status: blow-up at t = {t:e} ({reason})"),
            None => writeln!(s, "status: completed"),
        }
        .expect("write to string");
        let last = self.records.last();
        writeln!(s, "steps: {}", self.steps).expect("write to string");
        if let Some(r) = last {
            writeln!(s, "final time: {:e}\nfinal energy: {:e}", r.time, r.energy).expect("write to string");
            let e0 = self.records[0].energy;
            if e0 > 0.0 {
                writeln!(s, "energy residual / E(0): {:e}", r.energy_residual / e0).expect("write to string");
            }
        }
        writeln!(s, "verdict: {}", self.verdict()).expect("write to string");
        writeln!(s, "{}", self.global.summary()).expect("write to string");
        if let Some(r) = &self.smooth {
            writeln!(s, "{}", r.summary()).expect("write to string");
        }
        s
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Integrates `cfg` and writes `manifest.txt`, `diagnostics.csv`,
/// `summary.txt`, checkpoints and, on request, `plot/*.dat` into `cfg.out.dir`.
pub fn execute(cfg: &RunConfig, emit_plot_data: bool) -> Result<RunOutcome, CliError> {
    let state0 = initial_state(cfg)?;
    let dir = &cfg.out.dir;
    create_dir(dir)?;
    output::write_file(&dir.join("manifest.txt"), &cfg.to_manifest())?;

    let mut checkpoint_error = None;
    let every = cfg.out.checkpoint_every;
    let result = integrate(&state0, &cfg.model, &cfg.step, &cfg.diag, |snap| {
        if every > 0 && snap.step > 0 && snap.step % every == 0 && checkpoint_error.is_none() {
            let path = dir.join(format!("checkpoint_{:08}.bin", snap.step));
            let state = snap.state().into_physical();
            if let Err(e) = checkpoint::save(&path, &state, cfg.model.alpha, cfg.model.beta) {
                checkpoint_error = Some(e);
            }
        }
    });
    let (records, steps, blowup, final_state) = match result {
        Ok(out) => (out.records, out.steps, None, Some(out.state)),
        Err(IntegrateError::BlowUp(b)) => (b.records, b.steps, Some((b.time, b.reason)), None),
        Err(IntegrateError::Invalid(e)) => return Err(e.into()),
    };
    output::write_file(&dir.join("diagnostics.csv"), &output::csv(&records))?;
    if emit_plot_data {
        output::write_plot_data(&dir.join("plot"), &records)?;
    }
    if let Some(e) = checkpoint_error {
        return Err(e);
    }
    if let (true, Some(s)) = (every > 0, &final_state) {
        checkpoint::save(&dir.join("final.bin"), &s.clone().into_physical(), cfg.model.alpha, cfg.model.beta)?;
    }
    let blowup_time = blowup.as_ref().map(|b| b.0);
    let global = bound_monitor(&records, TheoremClass::GlobalSolution, Ceiling::default(), blowup_time);
    let smooth = cfg
        .model
        .regime()
        .smooth_solution
        .then(|| bound_monitor(&records, TheoremClass::SmoothSolution, Ceiling::default(), blowup_time));
    let outcome = RunOutcome { records, steps, blowup, global, smooth };
    output::write_file(&dir.join("summary.txt"), &outcome.summary())?;
    Ok(outcome)
}

pub fn cmd_run(config: &Path, emit_plot_data: bool) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let outcome = execute(&cfg, emit_plot_data)?;
    print!("{}", outcome.summary());
    match outcome.blowup {
        Some((time, reason)) => Err(CliError::BlowUp { time, reason }),
        None => Ok(()),
    }
}

/// One row of the sweep summary.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub verdict: String,
    pub max_grad_u: f64,
    pub final_energy: f64,
    pub steps: usize,
    pub message: String,
}

pub const SWEEP_COLUMNS: &str = "alpha,beta,verdict,max_grad_u,final_energy,steps,message";

fn cell_dir(root: &Path, alpha: f64, beta: f64) -> PathBuf {
    root.join(format!("alpha_{alpha}_beta_{beta}"))
}

fn run_cell(template: &RunConfig, alpha: f64, beta: f64) -> SweepRow {
    let mut cfg = template.clone();
    cfg.model.alpha = alpha;
    cfg.model.beta = beta;
    cfg.out.dir = cell_dir(&template.out.dir, alpha, beta);
    let failed = |message: String| SweepRow {
        alpha,
        beta,
        verdict: "error".into(),
        max_grad_u: f64::NAN,
        final_energy: f64::NAN,
        steps: 0,
        message,
    };
    if let Err(e) = cfg.model.validate() {
        return failed(e.to_string());
    }
    match execute(&cfg, false) {
        Ok(o) => SweepRow {
            alpha,
            beta,
            verdict: o.verdict().into(),
            max_grad_u: o.max_grad_u(),
            final_energy: o.final_energy(),
            steps: o.steps,
            message: o.blowup.map(|b| b.1).unwrap_or_default(),
        },
        Err(e) => failed(e.to_string()),
    }
}

/// Runs every `(α, β)` cell on `spec.workers` threads. Rows come back in
/// grid order regardless of which worker finished first.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, CliError> {
    create_dir(&spec.template.out.dir)?;
    let cells: Vec<(f64, f64)> =
        spec.alphas.iter().flat_map(|&a| spec.betas.iter().map(move |&b| (a, b))).collect();
    let rows: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..spec.workers.min(cells.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(a, b)) = cells.get(i) else { break };
                let row = run_cell(&spec.template, a, b);
                rows.lock().expect("no worker panics while holding the lock")[i] = Some(row);
            });
        }
    });
    let rows: Vec<SweepRow> =
        rows.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every cell ran")).collect();
    let mut csv = format!("{SWEEP_COLUMNS}\n");
    for r in &rows {
        writeln!(
            csv,
            "{:e},{:e},{},{:e},{:e},{},{}",
            r.alpha,
            r.beta,
            r.verdict,
            r.max_grad_u,
            r.final_energy,
            r.steps,
            r.message.replace([',', '\n'], ";")
        )
        .expect("write to string");
    }
    output::write_file(&spec.template.out.dir.join("sweep_summary.csv"), &csv)?;
    Ok(rows)
}

pub fn cmd_sweep(path: &Path) -> Result<(), CliError> {
    let spec = SweepSpec::load(path)?;
    let rows = sweep(&spec)?;
    for r in &rows {
        println!("alpha = {}, beta = {}: {} (max |grad u| = {:e})", r.alpha, r.beta, r.verdict, r.max_grad_u);
    }
    println!("summary: {}", spec.template.out.dir.join("sweep_summary.csv").display());
    Ok(())
}

/// Inputs of `tcm bench`.
#[derive(Clone, Debug)]
pub struct BenchArgs {
    pub id: String,
    pub n: usize,
    pub samples: usize,
    pub max_mode: usize,
    pub seed: u64,
    pub alpha: f64,
    pub out: PathBuf,
}

pub fn bench_csv(report: &BenchReport) -> String {
    let mut s = String::from("seed,ratio\n");
    for (seed, r) in &report.samples {
        match r {
            Some(r) => writeln!(s, "{seed},{r:e}"),
            None => writeln!(s, "{seed},skipped"),
        }
        .expect("write to string");
    }
    s
}

pub fn bench(args: &BenchArgs) -> Result<BenchReport, CliError> {
    let id: BenchId = args.id.parse().map_err(|e: tcm_core::Error| CliError::Other(e.to_string()))?;
    let grid = Grid::cube(args.n)?;
    let cfg = EnsembleConfig { alpha: args.alpha, ..EnsembleConfig::new(grid, args.samples, args.max_mode, args.seed) };
    let report = run_bench(id, &cfg)?;
    create_dir(&args.out)?;
    output::write_file(&args.out.join(format!("bench_{id}.csv")), &bench_csv(&report))?;
    output::write_file(&args.out.join(format!("bench_{id}.txt")), &format!("{}\n", report.summary()))?;
    Ok(report)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    println!("{}", bench(args)?.summary());
    Ok(())
}
