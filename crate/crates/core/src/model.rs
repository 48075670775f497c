//! Right-hand side of the tropical climate system
//!
//! ```text
//! u_t + (u.∇)u - Δ_h u + |u|^(β-1) u + ∇.(v⊗v) + ∇p = 0,   ∇.u = 0
//! v_t + (u.∇)v + (-Δ)^α v + (v.∇)u + ∇θ = 0
//! θ_t + (u.∇)θ - Δθ + ∇.v = 0
//! ```
//!
//! with the pressure eliminated by Leray projection. Quadratic terms are
//! formed pointwise from spectrally differentiated fields and truncated with
//! the two-thirds rule; the damping term is evaluated pointwise and then
//! truncated as well.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, Representation, VectorField};
use crate::grid::{Axis, Grid};
use crate::multiplier::derivative;
use crate::norms::{l2_norm, l2_norm_vector};
use crate::ops::{dealias_in_place, divergence, divergence_of, leray_in_place, truncate, zero_pad};
use crate::random::{random_band_limited_field, random_band_limited_vector};

/// Independent on/off switches for every group of terms. All on by default.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Switches {
    /// `Δ_h u`
    pub horizontal_viscosity: bool,
    /// `-(-Δ)^α v`
    pub fractional_dissipation: bool,
    /// `Δθ`
    pub thermal_diffusion: bool,
    /// `-|u|^(β-1) u`
    pub damping: bool,
    /// `-(u.∇)u`, `-(u.∇)v`, `-(u.∇)θ`
    pub advection: bool,
    /// `-∇.(v⊗v)` and `-(v.∇)u`
    pub baroclinic_coupling: bool,
    /// `-∇θ` and `-∇.v`
    pub thermal_coupling: bool,
}

impl Default for Switches {
    fn default() -> Self {
        Switches {
            horizontal_viscosity: true,
            fractional_dissipation: true,
            thermal_diffusion: true,
            damping: true,
            advection: true,
            baroclinic_coupling: true,
            thermal_coupling: true,
        }
    }
}

impl Switches {
    /// Dissipative linear terms only; every explicit term disabled.
    pub fn linear_only() -> Self {
        Switches {
            damping: false,
            advection: false,
            baroclinic_coupling: false,
            thermal_coupling: false,
            ..Switches::default()
        }
    }

    pub const NAMES: [&'static str; 7] = [
        "horizontal_viscosity",
        "fractional_dissipation",
        "thermal_diffusion",
        "damping",
        "advection",
        "baroclinic_coupling",
        "thermal_coupling",
    ];

    pub fn get(&self, name: &str) -> Option<bool> {
        Some(match name {
            "horizontal_viscosity" => self.horizontal_viscosity,
            "fractional_dissipation" => self.fractional_dissipation,
            "thermal_diffusion" => self.thermal_diffusion,
            "damping" => self.damping,
            "advection" => self.advection,
            "baroclinic_coupling" => self.baroclinic_coupling,
            "thermal_coupling" => self.thermal_coupling,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, on: bool) -> Option<()> {
        let slot = match name {
            "horizontal_viscosity" => &mut self.horizontal_viscosity,
            "fractional_dissipation" => &mut self.fractional_dissipation,
            "thermal_diffusion" => &mut self.thermal_diffusion,
            "damping" => &mut self.damping,
            "advection" => &mut self.advection,
            "baroclinic_coupling" => &mut self.baroclinic_coupling,
            "thermal_coupling" => &mut self.thermal_coupling,
            _ => return None,
        };
        *slot = on;
        Some(())
    }
}

/// Which well-posedness regime a parameter pair falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Regime {
    /// `α >= 3/2` and `β >= 4`: global solutions with `H^{0,1} x H^1 x H^1` data.
    pub global_solution: bool,
    /// Additionally `β <= 5`: global smooth solutions in `H^s`, `s > 2`.
    pub smooth_solution: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Fractional dissipation exponent on `v`.
    pub alpha: f64,
    /// Damping exponent on `u`.
    pub beta: f64,
    pub switches: Switches,
    /// Evaluate the damping term on the doubled grid before truncation.
    pub damping_fine_grid: bool,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64) -> Result<ModelParams> {
        let p = ModelParams { alpha, beta, switches: Switches::default(), damping_fine_grid: false };
        p.validate()?;
        Ok(p)
    }

    pub fn with_switches(mut self, switches: Switches) -> ModelParams {
        self.switches = switches;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha = {} must be >= 1", self.alpha)));
        }
        check_beta(self.beta)
    }

    pub fn regime(&self) -> Regime {
        let global_solution = self.alpha >= 1.5 && self.beta >= 4.0;
        Regime { global_solution, smooth_solution: global_solution && self.beta <= 5.0 }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("beta = {beta} must be >= 1")))
    }
}

/// `|u|^(β-1)` from `|u|^2`; zero where `u = 0`.
#[inline]
pub(crate) fn damping_factor(m2: f64, beta: f64) -> f64 {
    if m2 == 0.0 {
        return 0.0;
    }
    let half = 0.5 * (beta - 1.0);
    if half.fract() == 0.0 && half <= 16.0 {
        m2.powi(half as i32)
    } else if (half - 0.5).fract() == 0.0 && half <= 16.0 {
        m2.powi((half - 0.5) as i32) * m2.sqrt()
    } else {
        m2.powf(half)
    }
}

/// `(u, v, θ)` at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub u: VectorField,
    pub v: VectorField,
    pub theta: Field,
    pub time: f64,
}

impl State {
    pub fn new(u: VectorField, v: VectorField, theta: Field, time: f64) -> Result<State> {
        u.grid().check_same(v.grid())?;
        u.grid().check_same(theta.grid())?;
        Ok(State { u, v, theta, time })
    }

    pub fn zeros(grid: &Arc<Grid>) -> State {
        State {
            u: VectorField::zeros(grid, Representation::Spectral),
            v: VectorField::zeros(grid, Representation::Spectral),
            theta: Field::zeros(grid, Representation::Spectral),
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub fn into_spectral(self) -> State {
        State {
            u: self.u.into_spectral(),
            v: self.v.into_spectral(),
            theta: self.theta.into_spectral(),
            time: self.time,
        }
    }

    pub fn into_physical(self) -> State {
        State {
            u: self.u.into_physical(),
            v: self.v.into_physical(),
            theta: self.theta.into_physical(),
            time: self.time,
        }
    }

    /// `||div u|| / ||u||` (zero for `u = 0`).
    pub fn divergence_ratio(&self) -> f64 {
        let u = self.u.clone().into_spectral();
        let norm = l2_norm_vector(&u);
        if norm == 0.0 {
            return 0.0;
        }
        l2_norm(&divergence(&u).expect("spectral")) / norm
    }

    pub(crate) fn pack(&self) -> Packed {
        let [a, b, c] = self.u.spectral_vecs().map(|x| x.into_owned());
        let [d, e, f] = self.v.spectral_vecs().map(|x| x.into_owned());
        let t = self.theta.spectral_data().into_owned();
        Packed { c: [a, b, c, d, e, f, t] }
    }

    pub(crate) fn unpack(grid: &Arc<Grid>, p: Packed, time: f64) -> State {
        let [a, b, d, e, f, g, t] = p.c;
        State {
            u: VectorField::from_spectral_vecs(grid, [a, b, d]),
            v: VectorField::from_spectral_vecs(grid, [e, f, g]),
            theta: Field::from_spectral(grid, t).expect("grid-sized"),
            time,
        }
    }
}

/// The seven spectral components `u1 u2 u3 v1 v2 v3 θ` as raw arrays.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Packed {
    pub c: [Vec<Complex64>; 7],
}

impl Packed {
    pub fn zeros(len: usize) -> Packed {
        Packed { c: std::array::from_fn(|_| vec![Complex64::default(); len]) }
    }

    pub fn u(&self) -> [&[Complex64]; 3] {
        [&self.c[0], &self.c[1], &self.c[2]]
    }

    pub fn v(&self) -> [&[Complex64]; 3] {
        [&self.c[3], &self.c[4], &self.c[5]]
    }

    pub fn theta(&self) -> &[Complex64] {
        &self.c[6]
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

/// One group of time derivatives, spectral.
#[derive(Clone, Debug, PartialEq)]
pub struct Parts {
    pub du: VectorField,
    pub dv: VectorField,
    pub dtheta: Field,
}

impl Parts {
    fn from_packed(grid: &Arc<Grid>, p: Packed) -> Parts {
        let [a, b, c, d, e, f, t] = p.c;
        Parts {
            du: VectorField::from_spectral_vecs(grid, [a, b, c]),
            dv: VectorField::from_spectral_vecs(grid, [d, e, f]),
            dtheta: Field::from_spectral(grid, t).expect("grid-sized"),
        }
    }

    pub fn sum(&self, other: &Parts) -> Result<Parts> {
        Ok(Parts {
            du: self.du.axpy(1.0, &other.du)?,
            dv: self.dv.axpy(1.0, &other.dv)?,
            dtheta: self.dtheta.axpy(1.0, &other.dtheta)?,
        })
    }
}

/// Time derivative split into the diagonal linear dissipation (exactly
/// integrable) and everything else.
#[derive(Clone, Debug, PartialEq)]
pub struct Tendency {
    /// `Δ_h u`, `-(-Δ)^α v`, `Δθ`.
    pub linear: Parts,
    /// Advection, damping, coupling terms; `du` already projected.
    pub explicit: Parts,
}

impl Tendency {
    pub fn total(&self) -> Parts {
        self.linear.sum(&self.explicit).expect("same grid")
    }
}

/// Precomputed evaluator of the right-hand side on raw spectral arrays.
pub(crate) struct Engine {
    grid: Arc<Grid>,
    params: ModelParams,
    lin: [Vec<f64>; 3],
}

impl Engine {
    pub fn new(grid: &Arc<Grid>, params: &ModelParams) -> Result<Engine> {
        params.validate()?;
        let sw = params.switches;
        let len = grid.len();
        let lin_u = if sw.horizontal_viscosity {
            grid.khsq().iter().map(|&k| -k).collect()
        } else {
            vec![0.0; len]
        };
        let lin_v = if sw.fractional_dissipation {
            grid.ksq().iter().map(|&k| -k.powf(params.alpha)).collect()
        } else {
            vec![0.0; len]
        };
        let lin_t = if sw.thermal_diffusion {
            grid.ksq().iter().map(|&k| -k).collect()
        } else {
            vec![0.0; len]
        };
        Ok(Engine { grid: grid.clone(), params: *params, lin: [lin_u, lin_v, lin_t] })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Diagonal symbol of component `i` (0..7).
    pub fn linear_symbol(&self, i: usize) -> &[f64] {
        &self.lin[match i {
            0..=2 => 0,
            3..=5 => 1,
            _ => 2,
        }]
    }

    pub fn linear(&self, s: &Packed) -> Packed {
        Packed {
            c: std::array::from_fn(|i| {
                s.c[i].iter().zip(self.linear_symbol(i)).map(|(z, &l)| z * l).collect()
            }),
        }
    }

    /// Everything except the diagonal dissipation.
    pub fn explicit(&self, s: &Packed) -> Packed {
        let g = &*self.grid;
        let sw = self.params.switches;
        let beta = self.params.beta;
        let coarse_damping = sw.damping && !self.params.damping_fine_grid;
        let need_u = sw.advection || coarse_damping;
        let need_v = sw.baroclinic_coupling;
        let need_grad_u = sw.advection || sw.baroclinic_coupling;
        let need_grad_v = sw.advection || sw.baroclinic_coupling;
        let need_grad_t = sw.advection;

        // Spectral arrays to bring to physical space, in a fixed order.
        let mut spec: Vec<Vec<Complex64>> = Vec::new();
        let mut slot = |on: bool, make: &mut dyn FnMut() -> Vec<Vec<Complex64>>| -> Option<usize> {
            if on {
                let start = spec.len();
                spec.extend(make());
                Some(start)
            } else {
                None
            }
        };
        let u_at = slot(need_u, &mut || s.u().iter().map(|c| c.to_vec()).collect());
        let v_at = slot(need_v, &mut || s.v().iter().map(|c| c.to_vec()).collect());
        // gradient blocks store d_j f_i at offset 3*i + j
        let grad = |f: [&[Complex64]; 3]| -> Vec<Vec<Complex64>> {
            f.iter().flat_map(|c| Axis::ALL.map(|a| derivative(g, a, c))).collect()
        };
        let gu_at = slot(need_grad_u, &mut || grad(s.u()));
        let gv_at = slot(need_grad_v, &mut || grad(s.v()));
        let gt_at = slot(need_grad_t, &mut || Axis::ALL.map(|a| derivative(g, a, s.theta())).to_vec());

        let refs: Vec<&[Complex64]> = spec.iter().map(|v| v.as_slice()).collect();
        let phys = g.fft().inverse_real_many(&refs);
        drop(spec);

        let len = g.len();
        let any_u = sw.advection || coarse_damping || sw.baroclinic_coupling;
        let any_v = sw.advection || sw.baroclinic_coupling;
        let mut fu: [Vec<f64>; 3] = std::array::from_fn(|_| if any_u { vec![0.0; len] } else { Vec::new() });
        let mut fv: [Vec<f64>; 3] = std::array::from_fn(|_| if any_v { vec![0.0; len] } else { Vec::new() });
        let mut ft = if sw.advection { vec![0.0; len] } else { Vec::new() };

        let view = |start: Option<usize>| -> [&[f64]; 3] {
            let k = start.unwrap_or(0);
            std::array::from_fn(|i| if start.is_some() { &phys[k + i][..len] } else { &[][..] })
        };
        let grad_view = |start: Option<usize>| -> [&[f64]; 9] {
            let k = start.unwrap_or(0);
            std::array::from_fn(|i| if start.is_some() { &phys[k + i][..len] } else { &[][..] })
        };
        let (uu, vv, gt) = (view(u_at), view(v_at), view(gt_at));
        let (gu, gv) = (grad_view(gu_at), grad_view(gv_at));

        if sw.advection {
            for x in 0..len {
                let w = [uu[0][x], uu[1][x], uu[2][x]];
                for i in 0..3 {
                    let (a, b) = (&gu[3 * i..3 * i + 3], &gv[3 * i..3 * i + 3]);
                    fu[i][x] += w[0] * a[0][x] + w[1] * a[1][x] + w[2] * a[2][x];
                    fv[i][x] += w[0] * b[0][x] + w[1] * b[1][x] + w[2] * b[2][x];
                }
                ft[x] += w[0] * gt[0][x] + w[1] * gt[1][x] + w[2] * gt[2][x];
            }
        }
        if coarse_damping {
            for x in 0..len {
                let w = [uu[0][x], uu[1][x], uu[2][x]];
                let f = damping_factor(w[0] * w[0] + w[1] * w[1] + w[2] * w[2], beta);
                for i in 0..3 {
                    fu[i][x] += f * w[i];
                }
            }
        }
        if sw.baroclinic_coupling {
            for x in 0..len {
                let w = [vv[0][x], vv[1][x], vv[2][x]];
                let div = gv[0][x] + gv[4][x] + gv[8][x];
                for i in 0..3 {
                    let (a, b) = (&gu[3 * i..3 * i + 3], &gv[3 * i..3 * i + 3]);
                    // ∇.(v⊗v) = (v.∇)v + (∇.v)v; exact after truncation for band-limited v
                    fu[i][x] += div * w[i] + w[0] * b[0][x] + w[1] * b[1][x] + w[2] * b[2][x];
                    fv[i][x] += w[0] * a[0][x] + w[1] * a[1][x] + w[2] * a[2][x];
                }
            }
        }
        drop(phys);

        let mut out = Packed::zeros(len);
        let mut fwd: Vec<&[f64]> = Vec::new();
        let mut dest: Vec<usize> = Vec::new();
        if any_u {
            fwd.extend(fu.iter().map(|v| v.as_slice()));
            dest.extend(0..3);
        }
        if any_v {
            fwd.extend(fv.iter().map(|v| v.as_slice()));
            dest.extend(3..6);
        }
        if sw.advection {
            fwd.push(&ft);
            dest.push(6);
        }
        for (spec, d) in g.fft().forward_real_many(&fwd).into_iter().zip(dest) {
            out.c[d] = spec;
        }
        for c in out.c.iter_mut() {
            for z in c.iter_mut() {
                *z = -*z;
            }
            dealias_in_place(g, c);
        }
        if sw.damping && self.params.damping_fine_grid {
            let d = fine_grid_damping(g, s.u(), beta);
            for i in 0..3 {
                for (z, w) in out.c[i].iter_mut().zip(&d[i]) {
                    *z -= w;
                }
            }
        }
        {
            let [a, b, c, ..] = &mut out.c;
            leray_in_place(g, [a, b, c]);
        }
        if sw.thermal_coupling {
            let t = s.theta();
            for (i, a) in Axis::ALL.into_iter().enumerate() {
                for (z, w) in out.c[3 + i].iter_mut().zip(derivative(g, a, t)) {
                    *z -= w;
                }
            }
            let div = divergence_of(g, s.v());
            for (z, w) in out.c[6].iter_mut().zip(div) {
                *z -= w;
            }
        }
        out
    }
}

/// Damping evaluated on the doubled grid, truncated back to the two-thirds band.
pub(crate) fn fine_grid_damping(grid: &Grid, u: [&[Complex64]; 3], beta: f64) -> [Vec<Complex64>; 3] {
    let fine = grid.refined();
    let padded: Vec<Vec<Complex64>> = u.iter().map(|c| zero_pad(grid, &fine, c)).collect();
    let refs: Vec<&[Complex64]> = padded.iter().map(|v| v.as_slice()).collect();
    let mut phys = fine.fft().inverse_real_many(&refs);
    for x in 0..fine.len() {
        let w = [phys[0][x], phys[1][x], phys[2][x]];
        let f = damping_factor(w[0] * w[0] + w[1] * w[1] + w[2] * w[2], beta);
        for p in phys.iter_mut() {
            p[x] *= f;
        }
    }
    let refs: Vec<&[f64]> = phys.iter().map(|v| v.as_slice()).collect();
    let mut out = fine.fft().forward_real_many(&refs).into_iter().map(|c| {
        let mut t = truncate(&fine, grid, &c);
        dealias_in_place(grid, &mut t);
        t
    });
    std::array::from_fn(|_| out.next().expect("three components"))
}

/// Pointwise `|u|^(β-1) u`, zero where `u = 0`.
pub fn damping_term(u: &VectorField, beta: f64) -> Result<VectorField> {
    check_beta(beta)?;
    let [a, b, c] = u.components().each_ref().map(|f| f.physical());
    let (a, b, c) = (a?, b?, c?);
    let mut out: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(a.len()));
    for x in 0..a.len() {
        let f = damping_factor(a[x] * a[x] + b[x] * b[x] + c[x] * c[x], beta);
        out[0].push(f * a[x]);
        out[1].push(f * b[x]);
        out[2].push(f * c[x]);
    }
    Ok(VectorField::from_physical_vecs(u.grid(), out))
}

/// Convective derivative `(w.∇)f`, returned spectral and dealiased.
/// `w` need not be divergence-free.
pub fn advect(w: &VectorField, f: &Field) -> Result<Field> {
    w.grid().check_same(f.grid())?;
    let g = w.grid();
    let c = f.spectral_data();
    let grads: Vec<Vec<Complex64>> = Axis::ALL.iter().map(|&a| derivative(g, a, &c)).collect();
    let refs: Vec<&[Complex64]> = grads.iter().map(|v| v.as_slice()).collect();
    let dphys = g.fft().inverse_real_many(&refs);
    let wp = w.physical_vecs();
    let prod: Vec<f64> = (0..g.len())
        .map(|x| wp[0][x] * dphys[0][x] + wp[1][x] * dphys[1][x] + wp[2][x] * dphys[2][x])
        .collect();
    let mut out = g.fft().forward_real(&prod);
    dealias_in_place(g, &mut out);
    Field::from_spectral(g, out)
}

/// Componentwise [`advect`].
pub fn advect_vector(w: &VectorField, f: &VectorField) -> Result<VectorField> {
    let [a, b, c] = f.components();
    let comps = [advect(w, a)?, advect(w, b)?, advect(w, c)?];
    VectorField::new(comps)
}

/// `[∇.(v⊗v)]_i = sum_j ∂_j (v_j v_i)` with dealiased products. Spectral.
pub fn tensor_divergence(v: &VectorField) -> Result<VectorField> {
    let g = v.grid();
    let p = v.physical_vecs();
    let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let prods: Vec<Vec<f64>> =
        pairs.iter().map(|&(i, j)| p[i].iter().zip(p[j].iter()).map(|(a, b)| a * b).collect()).collect();
    let refs: Vec<&[f64]> = prods.iter().map(|v| v.as_slice()).collect();
    let mut spec = g.fft().forward_real_many(&refs);
    for c in spec.iter_mut() {
        dealias_in_place(g, c);
    }
    let at = |i: usize, j: usize| -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        pairs.iter().position(|&q| q == (a, b)).expect("symmetric pair")
    };
    let comps: [Vec<Complex64>; 3] = std::array::from_fn(|i| {
        let mut acc = vec![Complex64::default(); g.len()];
        for (j, axis) in Axis::ALL.into_iter().enumerate() {
            for (z, d) in acc.iter_mut().zip(derivative(g, axis, &spec[at(i, j)])) {
                *z += d;
            }
        }
        acc
    });
    Ok(VectorField::from_spectral_vecs(g, comps))
}

/// Full right-hand side with pressure eliminated.
pub fn rhs(state: &State, params: &ModelParams) -> Result<Tendency> {
    state.u.grid().check_same(state.v.grid())?;
    state.u.grid().check_same(state.theta.grid())?;
    let engine = Engine::new(state.grid(), params)?;
    let packed = state.pack();
    let g = state.grid();
    Ok(Tendency {
        linear: Parts::from_packed(g, engine.linear(&packed)),
        explicit: Parts::from_packed(g, engine.explicit(&packed)),
    })
}

/// Unprojected momentum forcing `-[(u.∇)u + |u|^(β-1)u + ∇.(v⊗v)]`, per switches.
pub fn momentum_forcing(state: &State, params: &ModelParams) -> Result<VectorField> {
    params.validate()?;
    let g = state.grid();
    let sw = params.switches;
    let mut acc = VectorField::zeros(g, Representation::Spectral);
    let u = state.u.clone().into_physical();
    if sw.advection {
        acc = acc.axpy(-1.0, &advect_vector(&u, &state.u.clone().into_spectral())?)?;
    }
    if sw.damping {
        let d = if params.damping_fine_grid {
            let us = state.u.spectral_vecs();
            VectorField::from_spectral_vecs(g, fine_grid_damping(g, [&us[0], &us[1], &us[2]], params.beta))
        } else {
            let mut d = damping_term(&u, params.beta)?.into_spectral().into_components();
            for f in d.iter_mut() {
                dealias_in_place(g, f.spectral_mut()?);
            }
            VectorField::new(d)?
        };
        acc = acc.axpy(-1.0, &d)?;
    }
    if sw.baroclinic_coupling {
        acc = acc.axpy(-1.0, &tensor_divergence(&state.v)?)?;
    }
    Ok(acc)
}

/// Pressure `p = (-Δ)^-1 ∇.[(u.∇)u + |u|^(β-1)u + ∇.(v⊗v)]`, zero mean. Spectral.
pub fn pressure_recover(state: &State, params: &ModelParams) -> Result<Field> {
    let forcing = momentum_forcing(state, params)?;
    let mut c = divergence(&forcing)?.into_spectral_vec();
    let ksq = state.grid().ksq();
    for (z, &k2) in c.iter_mut().zip(ksq) {
        *z = if k2 == 0.0 { Complex64::default() } else { -*z / k2 };
    }
    Field::from_spectral(state.grid(), c)
}

/// Initial data families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialCondition {
    /// `u = A (sin x cos y cos z, -cos x sin y cos z, 0)` (rescaled to the box),
    /// `v` the same profile shifted by an eighth period on every axis,
    /// `θ = A sin z`.
    TaylorGreen,
    /// Seeded random fields on `|m_j| <= max_mode`, each scaled to RMS `A`.
    RandomBand { max_mode: usize },
}

pub fn initial_condition(
    grid: &Arc<Grid>,
    kind: InitialCondition,
    amplitude: f64,
    seed: u64,
) -> Result<State> {
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::InvalidParameter(format!("amplitude {amplitude} must be >= 0")));
    }
    let state = match kind {
        InitialCondition::TaylorGreen => {
            let [l1, l2, l3] = grid.lengths();
            let k = [TAU / l1, TAU / l2, TAU / l3];
            let a = amplitude;
            let b = amplitude * k[0] / k[1];
            let tg = move |x: [f64; 3]| {
                let (s1, c1) = (k[0] * x[0]).sin_cos();
                let (s2, c2) = (k[1] * x[1]).sin_cos();
                let c3 = (k[2] * x[2]).cos();
                [a * s1 * c2 * c3, -b * c1 * s2 * c3, 0.0]
            };
            let shift = [l1 / 8.0, l2 / 8.0, l3 / 8.0];
            let u = VectorField::from_fn(grid, tg).to_spectral()?;
            let v = VectorField::from_fn(grid, |x| tg([x[0] + shift[0], x[1] + shift[1], x[2] + shift[2]]))
                .to_spectral()?;
            let theta = Field::from_fn(grid, |x| amplitude * (k[2] * x[2]).sin()).to_spectral()?;
            let [mut u0, mut u1, mut u2] = u.into_components().map(|f| f.into_spectral_vec());
            leray_in_place(grid, [&mut u0, &mut u1, &mut u2]);
            let u = VectorField::from_spectral_vecs(grid, [u0, u1, u2]);
            State::new(u, v, theta, 0.0)?
        }
        InitialCondition::RandomBand { max_mode } => {
            let rms = |norm: f64| if norm == 0.0 { 0.0 } else { amplitude * grid.volume().sqrt() / norm };
            let s = seed.wrapping_mul(3);
            let u = random_band_limited_vector(grid, max_mode, s, true)?;
            let v = random_band_limited_vector(grid, max_mode, s.wrapping_add(1), false)?;
            let t = random_band_limited_field(grid, max_mode, s.wrapping_add(2))?;
            let (su, sv, st) = (rms(l2_norm_vector(&u)), rms(l2_norm_vector(&v)), rms(l2_norm(&t)));
            State::new(u.scaled(su), v.scaled(sv), t.scaled(st), 0.0)?
        }
    };
    Ok(state)
}
