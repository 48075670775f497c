//! Energy budget, norm records, cancellation residuals, bound monitoring
//! and the twin-run continuous-dependence probe.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::{Axis, Grid};
use crate::model::{damping_factor, damping_term, Engine, ModelParams, Packed, State};
use crate::multiplier::derivative;
use crate::norms::{energy, lp_norm_vector, weighted_energy};
use crate::ops::{leray_project, zero_pad};
use crate::stepper::{blowup_check, packed_distance_sq, BlowUp, Clock, IntegrateError, Stepper, StepperConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsConfig {
    /// Index of the `||Λ^s ·||^2` columns.
    pub lambda_s: f64,
    /// Evaluate the five cancellation residuals on every record.
    pub cancellations: bool,
    /// Compare `∫|u|^(β+1)` against its doubled-grid quadrature.
    pub alias_defect: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig { lambda_s: 2.5, cancellations: false, alias_defect: false }
    }
}

/// One row of diagnostics. `l2_*` are norms; every other norm entry is squared.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    /// `E = (||u||^2 + ||v||^2 + ||θ||^2) / 2`.
    pub energy: f64,
    /// `D(t) = 2 ∫ Φ`, with `Φ` the dissipation rate below.
    pub dissipation_budget: f64,
    /// `|2E(t) + D(t) - 2E(0)|`.
    pub energy_residual: f64,
    pub l2_u: f64,
    pub l2_v: f64,
    pub l2_theta: f64,
    pub gradh_u: f64,
    pub lambda_alpha_v: f64,
    pub grad_theta: f64,
    /// `||u||_{L^{β+1}}^{β+1}`.
    pub lbeta1_u: f64,
    pub d3_u: f64,
    pub grad_u: f64,
    pub grad_v: f64,
    pub lap_theta: f64,
    pub lap_u: f64,
    pub lap_v: f64,
    pub lambda_s_u: f64,
    pub lambda_s_v: f64,
    pub lambda_s_theta: f64,
    /// `|∫|u|^(β+1)|` on the grid minus the doubled-grid value; 0 when disabled.
    pub damping_alias_defect: f64,
    /// Normalized cancellation residuals (a)-(e); zeros when disabled.
    pub cancellations: [f64; 5],
    /// `Φ`: sum of the enabled dissipation terms.
    pub dissipation_rate: f64,
    /// `dΦ/dt` along the flow.
    pub dissipation_slope: f64,
}

impl DiagnosticsRecord {
    pub fn is_finite_nonnegative(&self) -> bool {
        let mut vals = vec![
            self.time,
            self.energy,
            self.dissipation_budget,
            self.energy_residual,
            self.l2_u,
            self.l2_v,
            self.l2_theta,
            self.gradh_u,
            self.lambda_alpha_v,
            self.grad_theta,
            self.lbeta1_u,
            self.d3_u,
            self.grad_u,
            self.grad_v,
            self.lap_theta,
            self.lap_u,
            self.lap_v,
            self.lambda_s_u,
            self.lambda_s_v,
            self.lambda_s_theta,
            self.damping_alias_defect,
            self.dissipation_rate,
        ];
        vals.extend(self.cancellations);
        vals.iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// Running state of the dissipation budget.
#[derive(Clone, Debug, Default)]
pub struct Budget {
    initial_energy: Option<f64>,
    total: f64,
    last: Option<(f64, f64, f64)>,
}

impl Budget {
    pub fn new() -> Budget {
        Budget::default()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Adds the interval since the previous sample using the trapezoid rule
    /// with endpoint slope correction (exact for cubics).
    fn push(&mut self, time: f64, rate: f64, slope: f64, energy: f64) {
        if self.initial_energy.is_none() {
            self.initial_energy = Some(energy);
        }
        if let Some((t0, r0, s0)) = self.last {
            let h = time - t0;
            let piece = 0.5 * h * (r0 + rate) - h * h / 12.0 * (slope - s0);
            self.total += 2.0 * piece;
        }
        self.last = Some((time, rate, slope));
    }
}

/// Precomputed spectral weights for one grid and parameter set.
pub(crate) struct Recorder {
    grid: Arc<Grid>,
    params: ModelParams,
    cfg: DiagnosticsConfig,
    k3sq: Vec<f64>,
    w_alpha: Vec<f64>,
    w_s: Vec<f64>,
}

impl Recorder {
    pub fn new(grid: &Arc<Grid>, params: &ModelParams, cfg: &DiagnosticsConfig) -> Result<Recorder> {
        params.validate()?;
        if !cfg.lambda_s.is_finite() {
            return Err(Error::InvalidParameter(format!("diagnostic index s = {}", cfg.lambda_s)));
        }
        let ksq = grid.ksq();
        let k3 = grid.wavenumbers(Axis::X3);
        let n12 = grid.dims()[0] * grid.dims()[1];
        Ok(Recorder {
            grid: grid.clone(),
            params: *params,
            cfg: *cfg,
            k3sq: (0..grid.len()).map(|i| k3[i / n12] * k3[i / n12]).collect(),
            w_alpha: ksq.iter().map(|&k| if k == 0.0 { 0.0 } else { k.powf(params.alpha) }).collect(),
            w_s: ksq.iter().map(|&k| if k == 0.0 { 0.0 } else { k.powf(cfg.lambda_s) }).collect(),
        })
    }

    /// Record for state `s` whose explicit tendency is `n1`.
    pub fn record(&self, engine: &Engine, s: &Packed, n1: &Packed, time: f64, budget: &mut Budget) -> DiagnosticsRecord {
        let g = &*self.grid;
        let p = &self.params;
        let sw = p.switches;
        let ksq = g.ksq();
        let khsq = g.khsq();
        let sum3 = |f: [&[Complex64]; 3], w: &dyn Fn(usize) -> f64| -> f64 {
            f.iter().map(|c| weighted_energy(g, c, w)).sum()
        };
        let (u, v, th) = (s.u(), s.v(), s.theta());
        let e_u = sum3(u, &|_| 1.0);
        let e_v = sum3(v, &|_| 1.0);
        let e_t = energy(g, th);
        let energy_total = 0.5 * (e_u + e_v + e_t);

        let gradh_u = sum3(u, &|i| khsq[i]);
        let lambda_alpha_v = sum3(v, &|i| self.w_alpha[i]);
        let grad_theta = weighted_energy(g, th, |i| ksq[i]);

        // time derivative of each component: diagonal part plus explicit part
        let dt_of = |i: usize| -> Vec<Complex64> {
            let l = engine.linear_symbol(i);
            s.c[i].iter().zip(&n1.c[i]).zip(l).map(|((z, n), &l)| z * l + n).collect()
        };
        let ut: Vec<Vec<Complex64>> = (0..3).map(dt_of).collect();
        let mut slope = 0.0;
        if sw.horizontal_viscosity {
            slope += 2.0 * (0..3).map(|i| weighted_inner(g, &s.c[i], &ut[i], khsq)).sum::<f64>();
        }
        if sw.fractional_dissipation {
            slope += 2.0 * (3..6).map(|i| weighted_inner(g, &s.c[i], &dt_of(i), &self.w_alpha)).sum::<f64>();
        }
        if sw.thermal_diffusion {
            slope += 2.0 * weighted_inner(g, &s.c[6], &dt_of(6), ksq);
        }

        // physical-space quadrature of |u|^(β+1) and its rate (β+1) ∫|u|^(β-1) u.u_t
        let mut arrays: Vec<&[Complex64]> = u.to_vec();
        if sw.damping {
            arrays.extend(ut.iter().map(|c| c.as_slice()));
        }
        let phys = g.fft().inverse_real_many(&arrays);
        let beta = p.beta;
        let (mut lb, mut dlb) = (0.0, 0.0);
        for x in 0..g.len() {
            let m2 = phys[0][x] * phys[0][x] + phys[1][x] * phys[1][x] + phys[2][x] * phys[2][x];
            let f = damping_factor(m2, beta);
            lb += f * m2;
            if sw.damping {
                dlb += f * (phys[0][x] * phys[3][x] + phys[1][x] * phys[4][x] + phys[2][x] * phys[5][x]);
            }
        }
        let lbeta1_u = lb * g.cell_volume();
        if sw.damping {
            slope += (beta + 1.0) * dlb * g.cell_volume();
        }

        let mut rate = 0.0;
        if sw.horizontal_viscosity {
            rate += gradh_u;
        }
        if sw.fractional_dissipation {
            rate += lambda_alpha_v;
        }
        if sw.thermal_diffusion {
            rate += grad_theta;
        }
        if sw.damping {
            rate += lbeta1_u;
        }
        budget.push(time, rate, slope, energy_total);
        let e0 = budget.initial_energy.unwrap_or(energy_total);
        let residual = (2.0 * energy_total + budget.total - 2.0 * e0).abs();

        let damping_alias_defect = if self.cfg.alias_defect {
            (lbeta1_u - fine_grid_lp(g, u, beta + 1.0)).abs()
        } else {
            0.0
        };
        let cancellations = if self.cfg.cancellations {
            let st = State::unpack(&self.grid, s.clone(), time);
            cancellation_suite(&st).map(|r| r.normalized()).unwrap_or([f64::NAN; 5])
        } else {
            [0.0; 5]
        };
        let k4 = |i: usize| ksq[i] * ksq[i];
        DiagnosticsRecord {
            time,
            energy: energy_total,
            dissipation_budget: budget.total,
            energy_residual: residual,
            l2_u: e_u.sqrt(),
            l2_v: e_v.sqrt(),
            l2_theta: e_t.sqrt(),
            gradh_u,
            lambda_alpha_v,
            grad_theta,
            lbeta1_u,
            d3_u: sum3(u, &|i| self.k3sq[i]),
            grad_u: sum3(u, &|i| ksq[i]),
            grad_v: sum3(v, &|i| ksq[i]),
            lap_theta: weighted_energy(g, th, k4),
            lap_u: sum3(u, &k4),
            lap_v: sum3(v, &k4),
            lambda_s_u: sum3(u, &|i| self.w_s[i]),
            lambda_s_v: sum3(v, &|i| self.w_s[i]),
            lambda_s_theta: weighted_energy(g, th, |i| self.w_s[i]),
            damping_alias_defect,
            cancellations,
            dissipation_rate: rate,
            dissipation_slope: slope,
        }
    }
}

fn weighted_inner(grid: &Grid, a: &[Complex64], b: &[Complex64], w: &[f64]) -> f64 {
    let s: f64 = a.iter().zip(b).zip(w).map(|((x, y), &k)| k * (x.re * y.re + x.im * y.im)).sum();
    grid.volume() * s
}

/// `∫|u|^p` by quadrature on the doubled grid.
fn fine_grid_lp(grid: &Grid, u: [&[Complex64]; 3], p: f64) -> f64 {
    let fine = grid.refined();
    let padded: Vec<Vec<Complex64>> = u.iter().map(|c| zero_pad(grid, &fine, c)).collect();
    let refs: Vec<&[Complex64]> = padded.iter().map(|c| c.as_slice()).collect();
    let phys = fine.fft().inverse_real_many(&refs);
    let sum: f64 = (0..fine.len())
        .map(|x| {
            let m2 = phys[0][x] * phys[0][x] + phys[1][x] * phys[1][x] + phys[2][x] * phys[2][x];
            m2.sqrt().powf(p)
        })
        .sum();
    sum * fine.cell_volume()
}

/// Diagnostics of a single state; `budget` carries the running time integral.
pub fn record(
    state: &State,
    params: &ModelParams,
    cfg: &DiagnosticsConfig,
    budget: &mut Budget,
) -> Result<DiagnosticsRecord> {
    let engine = Engine::new(state.grid(), params)?;
    let recorder = Recorder::new(state.grid(), params, cfg)?;
    let s = state.pack();
    let n1 = engine.explicit(&s);
    Ok(recorder.record(&engine, &s, &n1, state.time, budget))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub name: &'static str,
    /// The integral itself.
    pub raw: f64,
    /// Product of the norms bounding it by Hölder.
    pub scale: f64,
}

impl Residual {
    pub fn normalized(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.raw.abs() / self.scale
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CancellationReport {
    /// (a) `∫(u.∇)u.u`, (b) `∫(u.∇)v.v`, (c) `∫(u.∇)θ θ`,
    /// (d) `∫∇.(v⊗v).u + ∫(v.∇)u.v`, (e) `∫∇θ.v + ∫(∇.v)θ`.
    pub residuals: [Residual; 5],
}

impl CancellationReport {
    pub fn normalized(&self) -> [f64; 5] {
        self.residuals.map(|r| r.normalized())
    }

    pub fn max_normalized(&self) -> f64 {
        self.normalized().into_iter().fold(0.0, f64::max)
    }
}

/// Quadrature of the integrals that vanish by integration by parts. Valid
/// for band-limited fields (products then integrate exactly on the grid).
pub fn cancellation_suite(state: &State) -> Result<CancellationReport> {
    let g = state.grid();
    let s = state.pack();
    let mut spec: Vec<Vec<Complex64>> = Vec::with_capacity(27);
    spec.extend(s.u().iter().map(|c| c.to_vec()));
    spec.extend(s.v().iter().map(|c| c.to_vec()));
    spec.push(s.theta().to_vec());
    for f in [s.u(), s.v()] {
        for c in f {
            for a in Axis::ALL {
                spec.push(derivative(g, a, c));
            }
        }
    }
    for a in Axis::ALL {
        spec.push(derivative(g, a, s.theta()));
    }
    let refs: Vec<&[Complex64]> = spec.iter().map(|c| c.as_slice()).collect();
    let f = g.fft().inverse_real_many(&refs);
    drop(spec);
    let (u0, v0, t0, gu, gv, gt) = (0, 3, 6, 7, 16, 25);
    let mut sums = [0.0f64; 5];
    // fourth powers for the L^4 norms in the Hölder scales
    let (mut u4, mut v4, mut t4) = (0.0f64, 0.0f64, 0.0f64);
    for x in 0..g.len() {
        let u = [f[u0][x], f[u0 + 1][x], f[u0 + 2][x]];
        let v = [f[v0][x], f[v0 + 1][x], f[v0 + 2][x]];
        let th = f[t0][x];
        u4 += (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).powi(2);
        v4 += (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).powi(2);
        t4 += th.powi(4);
        let div_v = f[gv][x] + f[gv + 4][x] + f[gv + 8][x];
        for i in 0..3 {
            let mut uu = 0.0;
            let mut uv = 0.0;
            let mut vv = 0.0;
            let mut vu = 0.0;
            for j in 0..3 {
                uu += u[j] * f[gu + 3 * i + j][x];
                uv += u[j] * f[gv + 3 * i + j][x];
                vv += v[j] * f[gv + 3 * i + j][x];
                vu += v[j] * f[gu + 3 * i + j][x];
            }
            sums[0] += uu * u[i];
            sums[1] += uv * v[i];
            sums[3] += (vv + div_v * v[i]) * u[i] + vu * v[i];
            sums[4] += f[gt + i][x] * v[i];
        }
        sums[2] += th * (u[0] * f[gt][x] + u[1] * f[gt + 1][x] + u[2] * f[gt + 2][x]);
        sums[4] += div_v * th;
    }
    let dv = g.cell_volume();
    let l2 = |c: [&[Complex64]; 3]| c.iter().map(|z| energy(g, z)).sum::<f64>().sqrt();
    let h1 = |c: [&[Complex64]; 3]| c.iter().map(|z| weighted_energy(g, z, |i| g.ksq()[i])).sum::<f64>().sqrt();
    let (nv, nt) = (l2(s.v()), energy(g, s.theta()).sqrt());
    let l4 = |p4: f64| (p4 * dv).powf(0.25);
    let (qu, qv, qt) = (l4(u4), l4(v4), l4(t4));
    let (gnu, gnv, gnt) = (h1(s.u()), h1(s.v()), weighted_energy(g, s.theta(), |i| g.ksq()[i]).sqrt());
    let r = |name, raw: f64, scale| Residual { name, raw: raw * dv, scale };
    Ok(CancellationReport {
        residuals: [
            r("advect_u", sums[0], gnu * qu * qu),
            r("advect_v", sums[1], gnv * qu * qv),
            r("advect_theta", sums[2], gnt * qu * qt),
            r("baroclinic", sums[3], 2.0 * gnu * qv * qv),
            r("thermal", sums[4], gnt * nv + gnv * nt),
        ],
    })
}

/// `∫(|a|^(β-1)a - |b|^(β-1)b).(a - b) dx` by quadrature.
pub fn monotone_damping_check(a: &VectorField, b: &VectorField, beta: f64) -> Result<f64> {
    a.grid().check_same(b.grid())?;
    let pa = a.clone().into_physical();
    let pb = b.clone().into_physical();
    let (da, db) = (damping_term(&pa, beta)?, damping_term(&pb, beta)?);
    let mut sum = 0.0;
    for i in 0..3 {
        let (xa, xb) = (pa.components()[i].physical()?, pb.components()[i].physical()?);
        let (ya, yb) = (da.components()[i].physical()?, db.components()[i].physical()?);
        for x in 0..xa.len() {
            sum += (ya[x] - yb[x]) * (xa[x] - xb[x]);
        }
    }
    Ok(sum * a.grid().cell_volume())
}

/// Natural size of [`monotone_damping_check`]: `(||a||_{L^{β+1}} + ||b||_{L^{β+1}})^(β+1)`.
pub fn monotone_damping_scale(a: &VectorField, b: &VectorField, beta: f64) -> Result<f64> {
    let p = beta + 1.0;
    Ok((lp_norm_vector(a, p)? + lp_norm_vector(b, p)?).powf(p))
}

/// Which family of norms to watch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TheoremClass {
    /// `E`, `||∂3 u||^2`, `||∇v||^2`, `||∇θ||^2` and the budget.
    GlobalSolution,
    /// `||Λ^s ·||^2`, `||Δ ·||^2` and `||∇u||^2`.
    SmoothSolution,
}

impl TheoremClass {
    fn quantities(self) -> &'static [(&'static str, fn(&DiagnosticsRecord) -> f64)] {
        match self {
            TheoremClass::GlobalSolution => &[
                ("E", |r| r.energy),
                ("d3_u", |r| r.d3_u),
                ("grad_v", |r| r.grad_v),
                ("grad_theta", |r| r.grad_theta),
                ("D_cum", |r| r.dissipation_budget),
            ],
            TheoremClass::SmoothSolution => &[
                ("lambda_s_u", |r| r.lambda_s_u),
                ("lambda_s_v", |r| r.lambda_s_v),
                ("lambda_s_theta", |r| r.lambda_s_theta),
                ("lap_u", |r| r.lap_u),
                ("lap_v", |r| r.lap_v),
                ("lap_theta", |r| r.lap_theta),
                ("grad_u", |r| r.grad_u),
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ceiling {
    /// `factor * max(initial value, initial energy)`.
    Growth(f64),
    Absolute(f64),
}

impl Default for Ceiling {
    fn default() -> Self {
        Ceiling::Growth(1e6)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantityVerdict {
    pub name: &'static str,
    pub max: f64,
    pub ceiling: f64,
    pub bounded: bool,
    pub first_exceedance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub class: TheoremClass,
    pub quantities: Vec<QuantityVerdict>,
    /// `E` never rose by more than `1e-12 E(0)` between records.
    pub energy_nonincreasing: bool,
    pub first_energy_increase: Option<f64>,
    pub bounded: bool,
    /// Earliest time anything went wrong (exceedance, energy growth or blow-up).
    pub first_failure: Option<f64>,
}

impl BoundReport {
    pub fn summary(&self) -> String {
        let what = match self.class {
            TheoremClass::GlobalSolution => "global-solution bounds",
            TheoremClass::SmoothSolution => "smooth-solution bounds",
        };
        match (self.bounded, self.first_failure) {
            (true, _) => format!("bounded: consistent with the {what} on the sampled interval"),
            (false, Some(t)) => format!("unbounded: inconsistent with the {what}, first failure at t = {t:e}"),
            (false, None) => format!("unbounded: inconsistent with the {what}"),
        }
    }
}

/// Boundedness verdict over a completed (or halted) run. `blowup_time`
/// marks a run stopped by the blow-up detector.
pub fn bound_monitor(
    records: &[DiagnosticsRecord],
    class: TheoremClass,
    ceiling: Ceiling,
    blowup_time: Option<f64>,
) -> BoundReport {
    let e0 = records.first().map(|r| r.energy).unwrap_or(0.0);
    let mut quantities = Vec::new();
    for &(name, get) in class.quantities() {
        let initial = records.first().map(get).unwrap_or(0.0);
        let limit = match ceiling {
            Ceiling::Growth(f) => f * initial.max(e0),
            Ceiling::Absolute(c) => c,
        };
        let mut max = 0.0f64;
        let mut first = None;
        for r in records {
            let q = get(r);
            if q.is_nan() || q > max {
                max = q;
            }
            if first.is_none() && !(q.is_finite() && q <= limit) {
                first = Some(r.time);
            }
        }
        quantities.push(QuantityVerdict { name, max, ceiling: limit, bounded: first.is_none(), first_exceedance: first });
    }
    let mut first_energy_increase = None;
    for w in records.windows(2) {
        if !(w[1].energy <= w[0].energy + 1e-12 * e0) {
            first_energy_increase = Some(w[1].time);
            break;
        }
    }
    let candidates = quantities
        .iter()
        .filter_map(|q| q.first_exceedance)
        .chain(first_energy_increase)
        .chain(blowup_time);
    let first_failure = candidates.fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.min(t))));
    BoundReport {
        class,
        bounded: first_failure.is_none(),
        energy_nonincreasing: first_energy_increase.is_none(),
        first_energy_increase,
        quantities,
        first_failure,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwinCurve {
    pub epsilon: f64,
    /// `δ(t) = ||δu||^2 + ||δv||^2 + ||δθ||^2`.
    pub delta: Vec<f64>,
    /// `δ(t) / ε^2` (zeros for `ε = 0`).
    pub normalized: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwinRunReport {
    pub times: Vec<f64>,
    pub curves: Vec<TwinCurve>,
}

/// Runs the base state and one copy per `ε` with `u0 + ε d`, where `d` is
/// the solenoidal part of `direction` scaled to unit `L^2` norm, and samples
/// the squared distance at the configured cadence. Requires fixed steps.
pub fn twin_run_probe(
    state0: &State,
    direction: &VectorField,
    epsilons: &[f64],
    params: &ModelParams,
    cfg: &StepperConfig,
) -> std::result::Result<TwinRunReport, IntegrateError> {
    cfg.validate()?;
    if cfg.cfl_safety.is_some() {
        return Err(Error::InvalidParameter("twin runs need a fixed step".into()).into());
    }
    let g = state0.grid().clone();
    g.check_same(direction.grid())?;
    let d = leray_project(&direction.clone().into_spectral())?;
    let norm = crate::norms::l2_norm_vector(&d);
    if norm <= 1e-12 * crate::norms::l2_norm_vector(direction) {
        return Err(Error::InvalidParameter("perturbation direction has no solenoidal part".into()).into());
    }
    let d = d.scaled(1.0 / norm);
    let mut runs: Vec<Packed> = vec![state0.pack()];
    for &eps in epsilons {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon = {eps}")).into());
        }
        let mut s = state0.clone();
        s.u = s.u.clone().into_spectral().axpy(eps, &d)?;
        runs.push(s.pack());
    }
    let mut stepper = Stepper::new(&g, params, cfg.scheme)?;
    let mut clock = Clock::new(state0.time, cfg);
    let mut times = Vec::new();
    let mut deltas: Vec<Vec<f64>> = vec![Vec::new(); epsilons.len()];
    loop {
        let done = clock.done();
        if clock.step % cfg.cadence == 0 || done {
            times.push(clock.time);
            for (k, curve) in deltas.iter_mut().enumerate() {
                curve.push(packed_distance_sq(&g, &runs[0], &runs[k + 1]));
            }
        }
        if done {
            break;
        }
        let h = clock.next_h(|| cfg.dt);
        for run in runs.iter_mut() {
            let n1 = stepper.engine().explicit(run);
            *run = stepper.advance(run, &n1, h);
        }
        clock.advance(h);
        for run in &runs {
            if let Some(reason) = blowup_check(&g, run, cfg.blowup_threshold) {
                return Err(IntegrateError::BlowUp(Box::new(BlowUp {
                    time: clock.time,
                    reason,
                    records: Vec::new(),
                    steps: clock.step,
                })));
            }
        }
    }
    let curves = epsilons
        .iter()
        .zip(deltas)
        .map(|(&epsilon, delta)| {
            let normalized = delta.iter().map(|&x| if epsilon == 0.0 { 0.0 } else { x / (epsilon * epsilon) }).collect();
            TwinCurve { epsilon, delta, normalized }
        })
        .collect();
    Ok(TwinRunReport { times, curves })
}
