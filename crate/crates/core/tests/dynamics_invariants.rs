use std::sync::Arc;

use proptest::prelude::*;
use tcm_core::diagnostics::{
    cancellation_suite, monotone_damping_check, monotone_damping_scale, DiagnosticsConfig,
};
use tcm_core::model::{
    advect_vector, initial_condition, rhs, tensor_divergence, InitialCondition, ModelParams, State, Switches,
};
use tcm_core::multiplier::{apply_multiplier, Multiplier};
use tcm_core::norms::{
    inner_product, inner_product_vector, l2_norm, l2_norm_vector, lp_norm_vector, sobolev_norm,
};
use tcm_core::ops::{divergence, gradient};
use tcm_core::random::{random_band_limited_field, random_band_limited_vector};
use tcm_core::stepper::{integrate, step, Scheme, StepperConfig};
use tcm_core::{Axis, Field, Grid, VectorField};

fn random_state(g: &Arc<Grid>, band: usize, amplitude: f64, seed: u64) -> State {
    initial_condition(g, InitialCondition::RandomBand { max_mode: band }, amplitude, seed).unwrap()
}

fn dx(f: &Field, a: Axis) -> Field {
    apply_multiplier(f, Multiplier::Derivative(a)).unwrap()
}

/// `||∇_h u||^2 + ||Λ^α v||^2 + ||∇θ||^2 + ||u||^{β+1}_{L^{β+1}}`.
fn dissipation(s: &State, p: &ModelParams) -> f64 {
    let mut gh = 0.0;
    for c in s.u.components() {
        for a in [Axis::X1, Axis::X2] {
            gh += l2_norm(&dx(c, a)).powi(2);
        }
    }
    let lv: f64 = s.v.components().iter().map(|c| sobolev_norm(c, p.alpha, true).unwrap().powi(2)).sum();
    let gt: f64 = Axis::ALL.iter().map(|&a| l2_norm(&dx(&s.theta, a)).powi(2)).sum();
    gh + lv + gt + lp_norm_vector(&s.u, p.beta + 1.0).unwrap().powf(p.beta + 1.0)
}

fn energy_rate(s: &State, p: &ModelParams) -> f64 {
    let t = rhs(s, p).unwrap().total();
    inner_product_vector(&t.du, &s.u).unwrap()
        + inner_product_vector(&t.dv, &s.v).unwrap()
        + inner_product(&t.dtheta, &s.theta).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn energy_rate_is_minus_dissipation(
        seed in any::<u64>(),
        alpha in 1.0f64..3.0,
        beta in prop::sample::select(vec![1.0, 2.0, 3.0, 4.0, 4.5, 5.0]),
        amplitude in 0.05f64..1.0,
    ) {
        let g = Grid::cube(16).unwrap();
        let s = random_state(&g, 5, amplitude, seed);
        let p = ModelParams::new(alpha, beta).unwrap();
        let rate = energy_rate(&s, &p);
        let d = dissipation(&s, &p);
        prop_assert!((rate + d).abs() <= 1e-9 * d, "{} vs {}", rate, d);
    }

    #[test]
    fn coupling_integrals_cancel(seed in any::<u64>()) {
        let g = Grid::cube(16).unwrap();
        let u = random_band_limited_vector(&g, 4, seed, true).unwrap();
        let v = random_band_limited_vector(&g, 4, seed.wrapping_add(1), false).unwrap();
        let theta = random_band_limited_field(&g, 4, seed.wrapping_add(2)).unwrap();
        let scale = l2_norm_vector(&u) * l2_norm_vector(&v).powi(2);
        let a = inner_product_vector(&tensor_divergence(&v).unwrap(), &u).unwrap();
        let b = inner_product_vector(&advect_vector(&v, &u).unwrap(), &v).unwrap();
        prop_assert!((a + b).abs() <= 1e-11 * scale, "{} {}", a, b);

        let c = inner_product_vector(&gradient(&theta).unwrap(), &v).unwrap();
        let d = inner_product(&divergence(&v).unwrap(), &theta).unwrap();
        prop_assert!((c + d).abs() <= 1e-11 * (c.abs() + d.abs()).max(1e-300));
    }

    #[test]
    fn damping_is_monotone(
        seed in any::<u64>(),
        beta in prop::sample::select(vec![1.0, 2.5, 4.0, 5.0, 6.0]),
        shift in -1.0f64..1.0,
    ) {
        let g = Grid::cube(8).unwrap();
        let a = random_band_limited_vector(&g, 2, seed, false).unwrap();
        let b = random_band_limited_vector(&g, 2, seed.wrapping_add(7), false).unwrap();
        let b = b.axpy(shift, &a).unwrap();
        let q = monotone_damping_check(&a, &b, beta).unwrap();
        let scale = monotone_damping_scale(&a, &b, beta).unwrap();
        prop_assert!(q >= -1e-12 * scale, "{} vs {}", q, scale);
    }

    #[test]
    fn cancellations_vanish_on_solenoidal_states(seed in any::<u64>(), amplitude in 0.01f64..10.0) {
        let g = Grid::cube(16).unwrap();
        let s = random_state(&g, 5, amplitude, seed);
        let r = cancellation_suite(&s).unwrap();
        prop_assert!(r.max_normalized() <= 1e-11, "{:?}", r.normalized());
    }

    #[test]
    fn linear_modes_evolve_by_exact_exponential(
        m in (0i64..3, 0i64..3, 1i64..3),
        alpha in 1.0f64..3.0,
        dt in 1e-3f64..0.1,
    ) {
        let g = Grid::cube(8).unwrap();
        let (m1, m2, m3) = (m.0 as f64, m.1 as f64, m.2 as f64);
        let phase = move |x: [f64; 3]| m1 * x[0] + m2 * x[1] + m3 * x[2];
        // a ⊥ k keeps u solenoidal
        let a = [m3, 0.0, -m1];
        let mut s = State::zeros(&g);
        s.u = VectorField::from_fn(&g, |x| a.map(|ai| ai * phase(x).cos())).to_spectral().unwrap();
        s.v = VectorField::from_fn(&g, |x| [phase(x).sin(), 0.5 * phase(x).cos(), 0.0]).to_spectral().unwrap();
        s.theta = Field::from_fn(&g, |x| phase(x).cos()).to_spectral().unwrap();
        let p = ModelParams::new(alpha, 4.0).unwrap().with_switches(Switches::linear_only());
        let k2 = m1 * m1 + m2 * m2 + m3 * m3;
        let gu = (-(m1 * m1 + m2 * m2) * dt).exp();
        let gv = (-k2.powf(alpha) * dt).exp();
        let gt = (-k2 * dt).exp();
        for scheme in [Scheme::IfRk3, Scheme::IfEuler] {
            let cfg = StepperConfig { scheme, ..StepperConfig::fixed(dt, dt) };
            let out = step(&s, &p, &cfg).unwrap();
            let pairs: [(&Field, &Field, f64); 7] = [
                (&s.u.components()[0], &out.u.components()[0], gu),
                (&s.u.components()[1], &out.u.components()[1], gu),
                (&s.u.components()[2], &out.u.components()[2], gu),
                (&s.v.components()[0], &out.v.components()[0], gv),
                (&s.v.components()[1], &out.v.components()[1], gv),
                (&s.v.components()[2], &out.v.components()[2], gv),
                (&s.theta, &out.theta, gt),
            ];
            for (before, after, factor) in pairs {
                let b = before.spectral_data();
                let c = after.spectral_data();
                for (x, y) in b.iter().zip(c.iter()) {
                    let want = x * factor;
                    // coefficients are O(1); transform roundoff elsewhere only has to stay tiny
                    let tol = if x.norm() > 1e-8 { 1e-13 * want.norm() } else { 1e-15 };
                    prop_assert!((y - want).norm() <= tol, "{} vs {} ({})", y, want, factor);
                }
            }
        }
    }
}

#[test]
fn short_run_respects_energy_and_divergence_invariants() {
    let g = Grid::cube(16).unwrap();
    let s0 = random_state(&g, 4, 0.5, 21);
    let p = ModelParams::new(1.5, 4.0).unwrap();
    let cfg = StepperConfig { cadence: 1, ..StepperConfig::fixed(1e-3, 0.04) };
    let mut max_div: f64 = 0.0;
    let out = integrate(&s0, &p, &cfg, &DiagnosticsConfig::default(), |snap| {
        max_div = max_div.max(snap.state().divergence_ratio());
    })
    .unwrap();
    assert_eq!(out.steps, 40);
    assert!(max_div <= 1e-10, "{max_div}");
    let e0 = out.records[0].energy;
    for w in out.records.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-12 * e0);
        assert!(w[1].dissipation_budget >= w[0].dissipation_budget);
        assert!(w[1].is_finite_nonnegative());
    }
    let last = out.records.last().unwrap();
    assert!(last.energy_residual <= 1e-4 * e0, "{}", last.energy_residual);
}

#[test]
fn integration_is_deterministic() {
    let g = Grid::cube(8).unwrap();
    let s0 = random_state(&g, 2, 0.5, 3);
    let p = ModelParams::new(1.5, 5.0).unwrap();
    let cfg = StepperConfig::fixed(0.01, 0.1);
    let a = integrate(&s0, &p, &cfg, &DiagnosticsConfig::default(), |_| {}).unwrap();
    let b = integrate(&s0, &p, &cfg, &DiagnosticsConfig::default(), |_| {}).unwrap();
    assert_eq!(a.state, b.state);
    assert_eq!(a.records.len(), b.records.len());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.energy.to_bits(), y.energy.to_bits());
        assert_eq!(x.dissipation_budget.to_bits(), y.dissipation_budget.to_bits());
    }
}
