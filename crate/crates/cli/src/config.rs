//! `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Unknown or repeated keys are errors. [`RunConfig::to_manifest`] writes every
//! key back out, and re-parsing a manifest yields an equal config.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use tcm_core::diagnostics::DiagnosticsConfig;
use tcm_core::model::{ModelParams, Switches};
use tcm_core::stepper::{Scheme, StepperConfig};
use tcm_core::Grid;

use crate::error::CliError;

/// Parsed `key = value` lines with the line each key came from.
#[derive(Debug, Default)]
pub struct Assignments {
    entries: Vec<(String, String, usize)>,
}

impl Assignments {
    pub fn parse(text: &str) -> Result<Assignments, CliError> {
        let mut entries: Vec<(String, String, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::config(line, format!("expected `key = value`, found {content:?}")));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(CliError::config(line, "empty key"));
            }
            if let Some((_, _, first)) = entries.iter().find(|(k, _, _)| k == key) {
                return Err(CliError::config(line, format!("duplicate key {key:?} (first set on line {first})")));
            }
            entries.push((key.to_string(), value.to_string(), line));
        }
        Ok(Assignments { entries })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, usize)> {
        self.entries.iter().map(|(k, v, l)| (k.as_str(), v.as_str(), *l))
    }

    /// Splits off the keys starting with `prefix`.
    pub fn partition(self, prefix: &str) -> (Assignments, Assignments) {
        let (a, b) = self.entries.into_iter().partition(|(k, _, _)| k.starts_with(prefix));
        (Assignments { entries: a }, Assignments { entries: b })
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::config(line, format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str, line: usize) -> Result<bool, CliError> {
    match value {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(CliError::config(line, format!("invalid boolean {value:?} for {key}"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum IcKind {
    TaylorGreen,
    RandomBand,
    /// Restart from a checkpoint file.
    Checkpoint(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IcSpec {
    pub kind: IcKind,
    pub amplitude: f64,
    pub seed: u64,
    pub max_mode: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Diagnostics every this many steps.
    pub cadence: usize,
    /// Checkpoint every this many steps; 0 disables checkpoints.
    pub checkpoint_every: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: [usize; 3],
    pub l: [f64; 3],
    pub model: ModelParams,
    pub step: StepperConfig,
    pub ic: IcSpec,
    pub out: OutputSpec,
    pub diag: DiagnosticsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let tau = std::f64::consts::TAU;
        RunConfig {
            n: [32, 32, 32],
            l: [tau, tau, tau],
            model: ModelParams::new(1.5, 4.0).expect("valid defaults"),
            step: StepperConfig { cadence: 10, ..StepperConfig::fixed(1e-3, 1.0) },
            ic: IcSpec { kind: IcKind::TaylorGreen, amplitude: 1.0, seed: 0, max_mode: 4 },
            out: OutputSpec { dir: PathBuf::from("out"), cadence: 10, checkpoint_every: 0 },
            diag: DiagnosticsConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        RunConfig::from_assignments(&Assignments::parse(text)?)
    }

    pub fn from_assignments(a: &Assignments) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::default();
        let mut lines: HashMap<&str, usize> = HashMap::new();
        let mut ic_kind: Option<(String, usize)> = None;
        let mut ic_checkpoint: Option<PathBuf> = None;
        for (key, value, line) in a.iter() {
            lines.insert(key, line);
            let axis = |k: &str| k.chars().last().and_then(|ch| ch.to_digit(10)).map(|d| d as usize - 1);
            match key {
                "grid.n1" | "grid.n2" | "grid.n3" => c.n[axis(key).unwrap()] = parse_value(key, value, line)?,
                "grid.l1" | "grid.l2" | "grid.l3" => c.l[axis(key).unwrap()] = parse_value(key, value, line)?,
                "model.alpha" => c.model.alpha = parse_value(key, value, line)?,
                "model.beta" => c.model.beta = parse_value(key, value, line)?,
                "model.damping_fine_grid" => c.model.damping_fine_grid = parse_bool(key, value, line)?,
                "step.scheme" => {
                    c.step.scheme = value.parse::<Scheme>().map_err(|e| CliError::config(line, e.to_string()))?
                }
                "step.dt" => c.step.dt = parse_value(key, value, line)?,
                "step.cfl_safety" => {
                    c.step.cfl_safety = if value == "none" { None } else { Some(parse_value(key, value, line)?) }
                }
                "step.t_end" => c.step.t_end = parse_value(key, value, line)?,
                "step.blowup_threshold" => c.step.blowup_threshold = parse_value(key, value, line)?,
                "ic.kind" => ic_kind = Some((value.to_string(), line)),
                "ic.amplitude" => c.ic.amplitude = parse_value(key, value, line)?,
                "ic.seed" => c.ic.seed = parse_value(key, value, line)?,
                "ic.max_mode" => c.ic.max_mode = parse_value(key, value, line)?,
                "ic.checkpoint" => ic_checkpoint = Some(PathBuf::from(value)),
                "out.dir" => c.out.dir = PathBuf::from(value),
                "out.cadence" => c.out.cadence = parse_value(key, value, line)?,
                "out.checkpoint_every" => c.out.checkpoint_every = parse_value(key, value, line)?,
                "diag.s" => c.diag.lambda_s = parse_value(key, value, line)?,
                "diag.cancellations" => c.diag.cancellations = parse_bool(key, value, line)?,
                "diag.alias_defect" => c.diag.alias_defect = parse_bool(key, value, line)?,
                _ => match key.strip_prefix("model.switches.") {
                    Some(name) => {
                        let on = parse_bool(key, value, line)?;
                        c.model
                            .switches
                            .set(name, on)
                            .ok_or_else(|| CliError::config(line, format!("unknown switch {name:?}")))?;
                    }
                    None => return Err(CliError::config(line, format!("unknown key {key:?}"))),
                },
            }
        }
        if let Some((kind, line)) = ic_kind {
            c.ic.kind = match kind.as_str() {
                "taylor_green" => IcKind::TaylorGreen,
                "random_band" => IcKind::RandomBand,
                "checkpoint" => IcKind::Checkpoint(
                    ic_checkpoint
                        .take()
                        .ok_or_else(|| CliError::config(line, "ic.kind = checkpoint needs ic.checkpoint"))?,
                ),
                other => return Err(CliError::config(line, format!("unknown initial condition {other:?}"))),
            };
        }
        if let (Some(_), Some(&line)) = (ic_checkpoint, lines.get("ic.checkpoint")) {
            return Err(CliError::config(line, "ic.checkpoint is only used with ic.kind = checkpoint"));
        }
        c.step.cadence = c.out.cadence;
        c.validate(&lines)?;
        Ok(c)
    }

    fn validate(&self, lines: &HashMap<&str, usize>) -> Result<(), CliError> {
        let at = |keys: &[&str], msg: String| -> CliError {
            match keys.iter().filter_map(|k| lines.get(k)).min() {
                Some(&line) => CliError::config(line, msg),
                None => CliError::Config { line: None, message: msg },
            }
        };
        self.grid().map_err(|e| at(&["grid.n1", "grid.n2", "grid.n3", "grid.l1", "grid.l2", "grid.l3"], e.to_string()))?;
        self.model.validate().map_err(|e| at(&["model.alpha", "model.beta"], e.to_string()))?;
        self.step.validate().map_err(|e| {
            at(&["step.dt", "step.cfl_safety", "step.t_end", "step.blowup_threshold", "out.cadence"], e.to_string())
        })?;
        if self.step.t_end < 0.0 {
            return Err(at(&["step.t_end"], format!("t_end = {} must be >= 0", self.step.t_end)));
        }
        if !(self.ic.amplitude.is_finite() && self.ic.amplitude >= 0.0) {
            return Err(at(&["ic.amplitude"], format!("amplitude {} must be >= 0", self.ic.amplitude)));
        }
        if self.ic.kind == IcKind::RandomBand {
            let max = self.n.iter().min().copied().unwrap_or(0) / 3;
            if self.ic.max_mode == 0 || self.ic.max_mode > max {
                return Err(at(&["ic.max_mode"], format!("max_mode {} must lie in 1..={max}", self.ic.max_mode)));
            }
        }
        if !(self.diag.lambda_s.is_finite()) {
            return Err(at(&["diag.s"], format!("diag.s = {}", self.diag.lambda_s)));
        }
        Ok(())
    }

    pub fn grid(&self) -> tcm_core::Result<Arc<Grid>> {
        Grid::new(self.n, self.l)
    }

    /// Every key with its resolved value, in a form [`RunConfig::parse`] accepts.
    pub fn to_manifest(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("write to string");
        for j in 0..3 {
            kv(&format!("grid.n{}", j + 1), self.n[j].to_string());
        }
        for j in 0..3 {
            kv(&format!("grid.l{}", j + 1), format!("{:e}", self.l[j]));
        }
        kv("model.alpha", format!("{:e}", self.model.alpha));
        kv("model.beta", format!("{:e}", self.model.beta));
        for name in Switches::NAMES {
            kv(&format!("model.switches.{name}"), self.model.switches.get(name).expect("known switch").to_string());
        }
        kv("model.damping_fine_grid", self.model.damping_fine_grid.to_string());
        kv("step.scheme", self.step.scheme.to_string());
        kv("step.dt", format!("{:e}", self.step.dt));
        kv("step.cfl_safety", self.step.cfl_safety.map_or("none".into(), |c| format!("{c:e}")));
        kv("step.t_end", format!("{:e}", self.step.t_end));
        kv("step.blowup_threshold", format!("{:e}", self.step.blowup_threshold));
        match &self.ic.kind {
            IcKind::TaylorGreen => kv("ic.kind", "taylor_green".into()),
            IcKind::RandomBand => kv("ic.kind", "random_band".into()),
            IcKind::Checkpoint(p) => {
                kv("ic.kind", "checkpoint".into());
                kv("ic.checkpoint", p.display().to_string());
            }
        }
        kv("ic.amplitude", format!("{:e}", self.ic.amplitude));
        kv("ic.seed", self.ic.seed.to_string());
        kv("ic.max_mode", self.ic.max_mode.to_string());
        kv("out.dir", self.out.dir.display().to_string());
        kv("out.cadence", self.out.cadence.to_string());
        kv("out.checkpoint_every", self.out.checkpoint_every.to_string());
        kv("diag.s", format!("{:e}", self.diag.lambda_s));
        kv("diag.cancellations", self.diag.cancellations.to_string());
        kv("diag.alias_defect", self.diag.alias_defect.to_string());
        s
    }
}

/// A grid of `(α, β)` runs sharing one template.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub workers: usize,
    pub template: RunConfig,
}

fn parse_list(key: &str, value: &str, line: usize) -> Result<Vec<f64>, CliError> {
    let items: Vec<f64> = value
        .split(',')
        .map(|x| parse_value(key, x.trim(), line))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(CliError::config(line, format!("{key} is empty")));
    }
    Ok(items)
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<SweepSpec, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        SweepSpec::parse(&text)
    }

    /// Run-config keys plus `sweep.alpha`, `sweep.beta` (comma-separated)
    /// and `sweep.workers`.
    pub fn parse(text: &str) -> Result<SweepSpec, CliError> {
        let (sweep, rest) = Assignments::parse(text)?.partition("sweep.");
        let mut alphas = None;
        let mut betas = None;
        let mut workers = 1;
        for (key, value, line) in sweep.iter() {
            match key {
                "sweep.alpha" => alphas = Some(parse_list(key, value, line)?),
                "sweep.beta" => betas = Some(parse_list(key, value, line)?),
                "sweep.workers" => {
                    workers = parse_value(key, value, line)?;
                    if workers == 0 {
                        return Err(CliError::config(line, "sweep.workers must be at least 1"));
                    }
                }
                _ => return Err(CliError::config(line, format!("unknown key {key:?}"))),
            }
        }
        let missing = |k: &str| CliError::Config { line: None, message: format!("missing {k}") };
        Ok(SweepSpec {
            alphas: alphas.ok_or_else(|| missing("sweep.alpha"))?,
            betas: betas.ok_or_else(|| missing("sweep.beta"))?,
            workers,
            template: RunConfig::from_assignments(&rest)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(e: CliError) -> Option<usize> {
        match e {
            CliError::Config { line, .. } => line,
            other => panic!("{other}"),
        }
    }

    #[test]
    fn defaults_from_empty_file() {
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn parses_keys_and_comments() {
        let c = RunConfig::parse(
            "grid.n1 = 16 # x\ngrid.n2=8\ngrid.l3 = 2.5\nmodel.alpha = 2\nmodel.switches.damping = off\n\
             step.scheme = if_euler\nstep.cfl_safety = 0.5\nic.kind = random_band\nic.max_mode = 2\nout.cadence = 3\n",
        )
        .unwrap();
        assert_eq!(c.n, [16, 8, 32]);
        assert_eq!(c.l[2], 2.5);
        assert_eq!(c.model.alpha, 2.0);
        assert!(!c.model.switches.damping);
        assert_eq!(c.step.scheme, Scheme::IfEuler);
        assert_eq!(c.step.cfl_safety, Some(0.5));
        assert_eq!(c.ic.kind, IcKind::RandomBand);
        assert_eq!(c.step.cadence, 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of(RunConfig::parse("grid.n1 = 16\nbogus = 1\n").unwrap_err()), Some(2));
        assert_eq!(line_of(RunConfig::parse("\n\ngrid.n1 = x\n").unwrap_err()), Some(3));
        assert_eq!(line_of(RunConfig::parse("grid.n1 = 15\n").unwrap_err()), Some(1));
        assert_eq!(line_of(RunConfig::parse("model.beta = 0.5\n").unwrap_err()), Some(1));
        assert_eq!(line_of(RunConfig::parse("step.dt = 1\nstep.dt = 2\n").unwrap_err()), Some(2));
        assert_eq!(line_of(RunConfig::parse("no equals sign\n").unwrap_err()), Some(1));
        assert_eq!(line_of(RunConfig::parse("model.switches.nope = on\n").unwrap_err()), Some(1));
        assert_eq!(line_of(RunConfig::parse("ic.kind = checkpoint\n").unwrap_err()), Some(1));
    }

    #[test]
    fn manifest_round_trips() {
        let mut c = RunConfig::default();
        c.l = [1.0 / 3.0, 2.0, 7.25];
        c.model.switches.advection = false;
        c.step.cfl_safety = Some(0.3);
        c.ic.kind = IcKind::Checkpoint(PathBuf::from("a/b.bin"));
        c.diag.cancellations = true;
        assert_eq!(RunConfig::parse(&c.to_manifest()).unwrap(), c);
    }

    #[test]
    fn sweep_spec() {
        let s = SweepSpec::parse("sweep.alpha = 1.5\nsweep.beta = 4, 5\nsweep.workers = 2\ngrid.n1 = 8\n").unwrap();
        assert_eq!(s.alphas, vec![1.5]);
        assert_eq!(s.betas, vec![4.0, 5.0]);
        assert_eq!(s.template.n[0], 8);
        assert!(SweepSpec::parse("sweep.beta = 4\n").is_err());
        assert!(SweepSpec::parse("sweep.alpha = 1.5\nsweep.beta = 4,x\n").is_err());
    }
}
