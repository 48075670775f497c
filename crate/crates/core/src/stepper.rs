//! Integrating-factor Runge-Kutta time stepping.
//!
//! The diagonal dissipation `L` is integrated exactly through the factors
//! `e^{L h}` and `e^{L h / 2}`; everything else is explicit. The default
//! scheme is Kutta's third-order method in integrating-factor form.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::diagnostics::{Budget, DiagnosticsConfig, DiagnosticsRecord, Recorder};
use crate::error::{Error, Result};
use crate::grid::{Axis, Grid};
use crate::model::{damping_factor, Engine, ModelParams, Packed, State};
use crate::norms::weighted_energy;
use crate::ops::leray_in_place;

pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheme {
    #[default]
    IfRk3,
    /// First order; kept as a reference.
    IfEuler,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::IfRk3 => "if_rk3",
            Scheme::IfEuler => "if_euler",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scheme> {
        match s {
            "if_rk3" => Ok(Scheme::IfRk3),
            "if_euler" => Ok(Scheme::IfEuler),
            _ => Err(Error::InvalidParameter(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepperConfig {
    pub scheme: Scheme,
    /// Fixed step, or the largest allowed step when `cfl_safety` is set.
    pub dt: f64,
    /// Enables adaptive stepping.
    pub cfl_safety: Option<f64>,
    /// Final time.
    pub t_end: f64,
    /// Diagnostics are recorded every `cadence` steps (and at both ends).
    pub cadence: usize,
    /// Halt when `||∇u||` exceeds this.
    pub blowup_threshold: f64,
}

impl StepperConfig {
    pub fn fixed(dt: f64, t_end: f64) -> StepperConfig {
        StepperConfig {
            scheme: Scheme::IfRk3,
            dt,
            cfl_safety: None,
            t_end,
            cadence: 1,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if let Some(c) = self.cfl_safety {
            if !(c > 0.0 && c <= 1.0) {
                return bad(format!("cfl_safety = {c} must lie in (0, 1]"));
            }
        }
        if !self.t_end.is_finite() {
            return bad(format!("t_end = {}", self.t_end));
        }
        if self.cadence == 0 {
            return bad("cadence must be at least 1".into());
        }
        if !(self.blowup_threshold > 0.0) {
            return bad(format!("blowup_threshold = {}", self.blowup_threshold));
        }
        Ok(())
    }
}

struct Factors {
    h: f64,
    full: [Vec<f64>; 3],
    half: [Vec<f64>; 3],
}

fn group(i: usize) -> usize {
    match i {
        0..=2 => 0,
        3..=5 => 1,
        _ => 2,
    }
}

pub(crate) struct Stepper {
    engine: Engine,
    scheme: Scheme,
    cache: Vec<Factors>,
}

impl Stepper {
    pub fn new(grid: &Arc<Grid>, params: &ModelParams, scheme: Scheme) -> Result<Stepper> {
        Ok(Stepper { engine: Engine::new(grid, params)?, scheme, cache: Vec::new() })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    fn factors(&mut self, h: f64) -> &Factors {
        if let Some(pos) = self.cache.iter().position(|f| f.h.to_bits() == h.to_bits()) {
            return &self.cache[pos];
        }
        let make = |scale: f64| -> [Vec<f64>; 3] {
            [0, 3, 6].map(|i| self.engine.linear_symbol(i).iter().map(|&l| (l * scale).exp()).collect())
        };
        let f = Factors { h, full: make(h), half: make(0.5 * h) };
        // a fixed step and the shortened final step
        if self.cache.len() >= 2 {
            self.cache.remove(0);
        }
        self.cache.push(f);
        self.cache.last().expect("just pushed")
    }

    /// One step of size `h` from `s`, given `n1 = explicit(s)`.
    pub fn advance(&mut self, s: &Packed, n1: &Packed, h: f64) -> Packed {
        let grid = self.engine.grid().clone();
        let scheme = self.scheme;
        self.factors(h);
        let f = self.cache.iter().find(|f| f.h.to_bits() == h.to_bits()).expect("cached");
        let mut out = match scheme {
            Scheme::IfEuler => Packed {
                c: std::array::from_fn(|i| {
                    let e = &f.full[group(i)];
                    (0..e.len()).map(|x| (s.c[i][x] + n1.c[i][x] * h) * e[x]).collect()
                }),
            },
            Scheme::IfRk3 => {
                let mut u2 = Packed {
                    c: std::array::from_fn(|i| {
                        let e = &f.half[group(i)];
                        (0..e.len()).map(|x| (s.c[i][x] + n1.c[i][x] * (0.5 * h)) * e[x]).collect()
                    }),
                };
                project_u(&grid, &mut u2);
                let n2 = self.engine.explicit(&u2);
                drop(u2);
                let mut u3 = Packed {
                    c: std::array::from_fn(|i| {
                        let (e, eh) = (&f.full[group(i)], &f.half[group(i)]);
                        (0..e.len())
                            .map(|x| (s.c[i][x] - n1.c[i][x] * h) * e[x] + n2.c[i][x] * (2.0 * h * eh[x]))
                            .collect()
                    }),
                };
                project_u(&grid, &mut u3);
                let n3 = self.engine.explicit(&u3);
                drop(u3);
                let w = h / 6.0;
                Packed {
                    c: std::array::from_fn(|i| {
                        let (e, eh) = (&f.full[group(i)], &f.half[group(i)]);
                        (0..e.len())
                            .map(|x| {
                                (s.c[i][x] + n1.c[i][x] * w) * e[x] + n2.c[i][x] * (4.0 * w * eh[x]) + n3.c[i][x] * w
                            })
                            .collect()
                    }),
                }
            }
        };
        project_u(&grid, &mut out);
        out
    }
}

fn project_u(grid: &Grid, p: &mut Packed) {
    let [a, b, c, ..] = &mut p.c;
    leray_in_place(grid, [a, b, c]);
}

/// `||∇u||` of a packed state.
pub(crate) fn grad_u_norm(grid: &Grid, s: &Packed) -> f64 {
    let ksq = grid.ksq();
    s.u().iter().map(|c| weighted_energy(grid, c, |i| ksq[i])).sum::<f64>().sqrt()
}

pub(crate) fn blowup_check(grid: &Grid, s: &Packed, threshold: f64) -> Option<String> {
    if !s.is_finite() {
        return Some("non-finite value".into());
    }
    let g = grad_u_norm(grid, s);
    if !(g <= threshold) {
        return Some(format!("||grad u|| = {g:e} exceeds {threshold:e}"));
    }
    None
}

fn cfl_dt_packed(engine: &Engine, s: &Packed, safety: f64, dt_max: f64) -> f64 {
    let grid = engine.grid();
    let params = engine.params();
    let u = grid.fft().inverse_real_many(&s.u());
    let mut vmax = [0.0f64; 3];
    let mut m2max = 0.0f64;
    for x in 0..grid.len() {
        let mut m2 = 0.0;
        for j in 0..3 {
            vmax[j] = vmax[j].max(u[j][x].abs());
            m2 += u[j][x] * u[j][x];
        }
        m2max = m2max.max(m2);
    }
    let mut dt = dt_max;
    for axis in Axis::ALL {
        let m = vmax[axis.index()];
        if m > 0.0 {
            dt = dt.min(safety * grid.spacing(axis) / m);
        }
    }
    if params.switches.damping {
        let d = damping_factor(m2max, params.beta);
        if d > 0.0 {
            dt = dt.min(safety / d);
        }
    }
    dt
}

/// Advective step limit `safety * min_j dx_j / max|u_j|`, capped by
/// `safety / max|u|^(β-1)` when damping is on. A zero state gets `cfg.dt`.
pub fn cfl_dt(state: &State, params: &ModelParams, cfg: &StepperConfig) -> Result<f64> {
    cfg.validate()?;
    let engine = Engine::new(state.grid(), params)?;
    let safety = cfg.cfl_safety.unwrap_or(1.0);
    Ok(cfl_dt_packed(&engine, &state.pack(), safety, cfg.dt))
}

/// A single step of size `cfg.dt` (or the adaptive step when `cfl_safety` is set).
pub fn step(state: &State, params: &ModelParams, cfg: &StepperConfig) -> Result<State> {
    cfg.validate()?;
    let mut stepper = Stepper::new(state.grid(), params, cfg.scheme)?;
    let s = state.pack();
    let h = match cfg.cfl_safety {
        Some(safety) => cfl_dt_packed(stepper.engine(), &s, safety, cfg.dt),
        None => cfg.dt,
    };
    let n1 = stepper.engine().explicit(&s);
    let next = stepper.advance(&s, &n1, h);
    let time = state.time + h;
    if let Some(reason) = blowup_check(state.grid(), &next, cfg.blowup_threshold) {
        return Err(Error::BlowUp { time, reason });
    }
    Ok(State::unpack(state.grid(), next, time))
}

/// Step sequence from `t0` to `t_end`: fixed steps land on `t0 + n dt`
/// with a shortened final step; adaptive steps are chosen one at a time.
pub(crate) struct Clock {
    t0: f64,
    t_end: f64,
    dt: f64,
    fixed_steps: Option<usize>,
    pub step: usize,
    pub time: f64,
}

impl Clock {
    pub fn new(t0: f64, cfg: &StepperConfig) -> Clock {
        let fixed_steps = match cfg.cfl_safety {
            None => Some(if cfg.t_end > t0 { ((cfg.t_end - t0) / cfg.dt - 1e-9).ceil().max(1.0) as usize } else { 0 }),
            Some(_) => None,
        };
        Clock { t0, t_end: cfg.t_end, dt: cfg.dt, fixed_steps, step: 0, time: t0 }
    }

    pub fn done(&self) -> bool {
        match self.fixed_steps {
            Some(n) => self.step >= n,
            None => self.time >= self.t_end * (1.0 - 1e-14) - 1e-300,
        }
    }

    /// Size of the next step; `cfl` is consulted only in adaptive mode.
    pub fn next_h(&self, cfl: impl FnOnce() -> f64) -> f64 {
        match self.fixed_steps {
            Some(n) => {
                let next = if self.step + 1 >= n { self.t_end } else { self.t0 + (self.step + 1) as f64 * self.dt };
                next - self.time
            }
            None => cfl().min(self.dt).min(self.t_end - self.time),
        }
    }

    pub fn advance(&mut self, h: f64) {
        self.step += 1;
        self.time = match self.fixed_steps {
            Some(n) if self.step >= n => self.t_end,
            Some(_) => self.t0 + self.step as f64 * self.dt,
            None => {
                if self.t_end - (self.time + h) <= 1e-14 * self.t_end.abs() {
                    self.t_end
                } else {
                    self.time + h
                }
            }
        };
    }
}

/// Read-only view of the integration after each step.
pub struct Snapshot<'a> {
    pub step: usize,
    pub time: f64,
    /// Present on diagnostic steps.
    pub record: Option<&'a DiagnosticsRecord>,
    grid: &'a Arc<Grid>,
    packed: &'a Packed,
}

impl Snapshot<'_> {
    pub fn state(&self) -> State {
        State::unpack(self.grid, self.packed.clone(), self.time)
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub state: State,
    pub records: Vec<DiagnosticsRecord>,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct BlowUp {
    pub time: f64,
    pub reason: String,
    /// Records up to and including the detection time.
    pub records: Vec<DiagnosticsRecord>,
    pub steps: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum IntegrateError {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("blow-up at t = {}: {}", .0.time, .0.reason)]
    BlowUp(Box<BlowUp>),
}

/// Integrates from `state0` to `cfg.t_end`, recording diagnostics at the
/// configured cadence. `observer` sees every step.
pub fn integrate(
    state0: &State,
    params: &ModelParams,
    cfg: &StepperConfig,
    diag: &DiagnosticsConfig,
    mut observer: impl FnMut(&Snapshot<'_>),
) -> std::result::Result<RunOutput, IntegrateError> {
    cfg.validate()?;
    let grid = state0.grid().clone();
    let mut stepper = Stepper::new(&grid, params, cfg.scheme)?;
    let recorder = Recorder::new(&grid, params, diag)?;
    let mut budget = Budget::new();
    let mut records = Vec::new();
    let mut clock = Clock::new(state0.time, cfg);
    let mut s = state0.pack();
    loop {
        let done = clock.done();
        let n1: Packed = stepper.engine().explicit(&s);
        let record = if clock.step % cfg.cadence == 0 || done {
            records.push(recorder.record(stepper.engine(), &s, &n1, clock.time, &mut budget));
            records.last()
        } else {
            None
        };
        observer(&Snapshot { step: clock.step, time: clock.time, record, grid: &grid, packed: &s });
        if done {
            break;
        }
        let safety = cfg.cfl_safety.unwrap_or(1.0);
        let h = clock.next_h(|| cfl_dt_packed(stepper.engine(), &s, safety, cfg.dt));
        s = stepper.advance(&s, &n1, h);
        clock.advance(h);
        if let Some(reason) = blowup_check(&grid, &s, cfg.blowup_threshold) {
            // the record at detection time closes the series
            let n1 = stepper.engine().explicit(&s);
            records.push(recorder.record(stepper.engine(), &s, &n1, clock.time, &mut budget));
            return Err(IntegrateError::BlowUp(Box::new(BlowUp {
                time: clock.time,
                reason,
                records,
                steps: clock.step,
            })));
        }
    }
    let state = if clock.step == 0 { state0.clone() } else { State::unpack(&grid, s, clock.time) };
    Ok(RunOutput { state, records, steps: clock.step })
}

/// Sum of squared spectral differences, `||a - b||^2` over all seven components.
pub(crate) fn packed_distance_sq(grid: &Grid, a: &Packed, b: &Packed) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.c.iter().zip(&b.c) {
        sum += x.iter().zip(y).map(|(p, q): (&Complex64, &Complex64)| (p - q).norm_sqr()).sum::<f64>();
    }
    grid.volume() * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Field, Representation, VectorField};
    use crate::model::{initial_condition, InitialCondition, Switches};
    use crate::norms::{l2_norm, l2_norm_vector};

    fn linear_params(alpha: f64) -> ModelParams {
        ModelParams::new(alpha, 4.0).unwrap().with_switches(Switches::linear_only())
    }

    fn single_mode_state(g: &Arc<Grid>) -> State {
        let mut s = State::zeros(g);
        s.u = VectorField::from_fn(g, |x| [0.0, x[0].cos(), 0.0]).to_spectral().unwrap();
        s.v = VectorField::from_fn(g, |x| [(2.0 * x[1]).sin(), 0.0, 0.0]).to_spectral().unwrap();
        s
    }

    #[test]
    fn linear_modes_decay_exactly() {
        let g = Grid::cube(8).unwrap();
        let s0 = single_mode_state(&g);
        let p = linear_params(1.5);
        for scheme in [Scheme::IfRk3, Scheme::IfEuler] {
            let cfg = StepperConfig { scheme, ..StepperConfig::fixed(0.01, 0.3) };
            let out = integrate(&s0, &p, &cfg, &DiagnosticsConfig::default(), |_| {}).unwrap();
            assert_eq!(out.steps, 30);
            assert_eq!(out.state.time, 0.3);
            let gu = l2_norm_vector(&out.state.u) / l2_norm_vector(&s0.u);
            let gv = l2_norm_vector(&out.state.v) / l2_norm_vector(&s0.v);
            assert!((gu / (-0.3f64).exp() - 1.0).abs() < 1e-13, "{gu}");
            assert!((gv / (-8.0 * 0.3f64).exp() - 1.0).abs() < 1e-13, "{gv}");
        }
    }

    #[test]
    fn zero_duration_returns_initial_state() {
        let g = Grid::cube(8).unwrap();
        let s0 = initial_condition(&g, InitialCondition::TaylorGreen, 1.0, 0).unwrap();
        let out = integrate(
            &s0,
            &ModelParams::new(1.5, 4.0).unwrap(),
            &StepperConfig::fixed(0.1, 0.0),
            &DiagnosticsConfig::default(),
            |_| {},
        )
        .unwrap();
        assert_eq!(out.state, s0);
        assert_eq!(out.steps, 0);
        assert_eq!(out.records.len(), 1);
    }

    #[test]
    fn fixed_step_count_and_final_time() {
        let g = Grid::cube(4).unwrap();
        let s0 = State::zeros(&g);
        let p = ModelParams::new(1.5, 4.0).unwrap();
        let mut times = Vec::new();
        let cfg = StepperConfig { cadence: 2, ..StepperConfig::fixed(0.3, 1.0) };
        let out = integrate(&s0, &p, &cfg, &DiagnosticsConfig::default(), |snap| times.push(snap.time)).unwrap();
        assert_eq!(out.steps, 4);
        assert_eq!(times.len(), 5);
        assert_eq!(*times.last().unwrap(), 1.0);
        let rec: Vec<f64> = out.records.iter().map(|r| r.time).collect();
        assert_eq!(rec.len(), 3);
        assert_eq!(rec[2], 1.0);
    }

    #[test]
    fn cfl_limits() {
        let g = Grid::cube(32).unwrap();
        let mut s = State::zeros(&g);
        let p = ModelParams::new(1.5, 4.0).unwrap();
        let cfg = StepperConfig { cfl_safety: Some(0.5), ..StepperConfig::fixed(10.0, 1.0) };
        assert_eq!(cfl_dt(&s, &p, &cfg).unwrap(), 10.0);
        s.u = VectorField::from_fn(&g, |_| [1.0, 0.0, 0.0]);
        let dt = cfl_dt(&s, &p, &cfg).unwrap();
        assert!((dt - 0.5 * std::f64::consts::TAU / 32.0).abs() < 1e-15);
        // damping cap 0.5 / |u|^3 takes over at large amplitude
        s.u = VectorField::from_fn(&g, |_| [3.0, 0.0, 0.0]);
        let a = cfl_dt(&s, &p, &cfg).unwrap();
        s.u = VectorField::from_fn(&g, |_| [6.0, 0.0, 0.0]);
        let b = cfl_dt(&s, &p, &cfg).unwrap();
        assert!((a / b - 8.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_run_reaches_end_time() {
        let g = Grid::cube(16).unwrap();
        let s0 = initial_condition(&g, InitialCondition::TaylorGreen, 1.0, 0).unwrap();
        let cfg = StepperConfig { cfl_safety: Some(0.5), ..StepperConfig::fixed(0.05, 0.4) };
        let out = integrate(&s0, &ModelParams::new(1.5, 4.0).unwrap(), &cfg, &DiagnosticsConfig::default(), |_| {})
            .unwrap();
        assert_eq!(out.state.time, 0.4);
        assert!(out.steps >= 8);
    }

    #[test]
    fn divergence_stays_small() {
        let g = Grid::cube(16).unwrap();
        let s0 = initial_condition(&g, InitialCondition::RandomBand { max_mode: 5 }, 1.0, 4).unwrap();
        let p = ModelParams::new(1.5, 4.0).unwrap();
        let mut worst = 0.0f64;
        integrate(&s0, &p, &StepperConfig::fixed(0.005, 0.05), &DiagnosticsConfig::default(), |snap| {
            worst = worst.max(snap.state().divergence_ratio())
        })
        .unwrap();
        assert!(worst <= 1e-10, "{worst}");
    }

    #[test]
    fn nan_triggers_blowup() {
        let g = Grid::cube(4).unwrap();
        let mut s = State::zeros(&g);
        let mut t = Field::zeros(&g, Representation::Physical);
        t.physical_mut().unwrap()[3] = f64::NAN;
        s.theta = t;
        let r = step(&s, &ModelParams::new(1.5, 4.0).unwrap(), &StepperConfig::fixed(0.1, 1.0));
        assert!(matches!(r, Err(Error::BlowUp { .. })));
    }

    #[test]
    fn blowup_keeps_history() {
        let g = Grid::cube(16).unwrap();
        let s0 = initial_condition(&g, InitialCondition::TaylorGreen, 1.0, 0).unwrap();
        let cfg = StepperConfig { blowup_threshold: 1.0, ..StepperConfig::fixed(0.01, 1.0) };
        let err = integrate(&s0, &ModelParams::new(1.5, 4.0).unwrap(), &cfg, &DiagnosticsConfig::default(), |_| {})
            .unwrap_err();
        match err {
            IntegrateError::BlowUp(b) => {
                assert_eq!(b.steps, 1);
                assert_eq!(b.records.len(), 2);
                assert!(b.time > 0.0);
                assert_eq!(b.records[1].time, b.time);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let g = Grid::cube(8).unwrap();
        let s0 = initial_condition(&g, InitialCondition::RandomBand { max_mode: 2 }, 1.0, 1).unwrap();
        let p = ModelParams::new(1.5, 4.5).unwrap();
        let cfg = StepperConfig::fixed(0.01, 0.1);
        let a = integrate(&s0, &p, &cfg, &DiagnosticsConfig::default(), |_| {}).unwrap();
        let b = integrate(&s0, &p, &cfg, &DiagnosticsConfig::default(), |_| {}).unwrap();
        assert_eq!(a.state, b.state);
        assert_eq!(a.records, b.records);
        assert!(l2_norm(&a.state.theta) > 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(StepperConfig::fixed(0.0, 1.0).validate().is_err());
        assert!(StepperConfig { cfl_safety: Some(1.5), ..StepperConfig::fixed(0.1, 1.0) }.validate().is_err());
        assert!(StepperConfig { cadence: 0, ..StepperConfig::fixed(0.1, 1.0) }.validate().is_err());
        assert_eq!("if_euler".parse::<Scheme>().unwrap(), Scheme::IfEuler);
        assert!("rk4".parse::<Scheme>().is_err());
    }
}
