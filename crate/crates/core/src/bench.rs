//! Empirical constants for anisotropic and interpolation inequalities.
//!
//! Each bench draws an ensemble of band-limited random scalar fields, one
//! per seed `base_seed + i`, evaluates `LHS / RHS` on every sample and keeps
//! the largest ratio. Samples with a vanishing right-hand side are skipped
//! and counted.
//!
//! Inequalities, on the periodic box:
//!
//! - `horizontal-l4`: `||ψ||^2_{L^2_{x3}(L^4_h)} <= C ||ψ|| ||∇_h ψ||`
//! - `vertical-sup`: `max_{x3} ||ψ(., x3)||^2_{L^2_h} <= C (||ψ|| ||∂_3 ψ|| + ||ψ||^2 / l3)`
//! - `interpolation`: `||ψ||_{L^p} <= C ||ψ||^(1-θ) ||Λ^α ψ||^θ` with
//!   `p = 3/(α-1)`, `θ = (5-2α)/(2α)` and the mean of `ψ` removed.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Axis, Grid};
use crate::norms::{anisotropic_mixed_norm, horizontal_plane_energies, l2_norm, lp_norm, weighted_energy, MixedOrder};
use crate::random::random_band_limited_field;

/// Relative size below which a right-hand-side factor counts as zero.
const DEGENERATE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BenchId {
    HorizontalL4,
    VerticalSup,
    Interpolation,
}

impl BenchId {
    pub const ALL: [BenchId; 3] = [BenchId::HorizontalL4, BenchId::VerticalSup, BenchId::Interpolation];

    pub fn name(self) -> &'static str {
        match self {
            BenchId::HorizontalL4 => "horizontal-l4",
            BenchId::VerticalSup => "vertical-sup",
            BenchId::Interpolation => "interpolation",
        }
    }

    /// Human-readable statement of the tested inequality.
    pub fn statement(self) -> &'static str {
        match self {
            BenchId::HorizontalL4 => "||psi||^2_{L2_x3(L4_h)} <= C ||psi|| ||grad_h psi||",
            BenchId::VerticalSup => {
                "max_x3 ||psi(.,x3)||^2_{L2_h} <= C (||psi|| ||d3 psi|| + ||psi||^2 / l3)"
            }
            BenchId::Interpolation => {
                "||psi - mean||_{Lp} <= C ||psi - mean||^(1-theta) ||Lambda^alpha psi||^theta, p = 3/(alpha-1)"
            }
        }
    }

    /// Caveat attached to every report: how the torus version differs from
    /// the whole-space statement.
    pub fn torus_note(self) -> &'static str {
        match self {
            BenchId::HorizontalL4 => "periodic box; no extra term needed, the estimate is scale-free in x3",
            BenchId::VerticalSup => {
                "periodic box; the mean term ||psi||^2/l3 replaces decay at infinity and is kept explicit"
            }
            BenchId::Interpolation => "periodic box; the mean is removed since Lambda^alpha annihilates it",
        }
    }
}

impl fmt::Display for BenchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown bench id {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct EnsembleConfig {
    pub grid: Arc<Grid>,
    pub samples: usize,
    pub max_mode: usize,
    pub base_seed: u64,
    /// Dissipation exponent of the interpolation bench; ignored elsewhere.
    pub alpha: f64,
}

impl EnsembleConfig {
    pub fn new(grid: Arc<Grid>, samples: usize, max_mode: usize, base_seed: u64) -> Self {
        EnsembleConfig { grid, samples, max_mode, base_seed, alpha: 1.5 }
    }
}

/// Rejects `α` outside `[5/4, 5/2)`.
pub fn check_interpolation_alpha(alpha: f64) -> Result<()> {
    if (1.25..2.5).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("interpolation exponent alpha = {alpha} outside [5/4, 5/2)")))
    }
}

/// `(p, θ)` of the interpolation bench.
pub fn interpolation_exponents(alpha: f64) -> (f64, f64) {
    (3.0 / (alpha - 1.0), (5.0 - 2.0 * alpha) / (2.0 * alpha))
}

/// Left- and right-hand sides of one inequality for one field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

fn derivative_energy(grid: &Grid, c: &[Complex64], axes: &[Axis]) -> f64 {
    let [n1, n2, _] = grid.dims();
    let k = Axis::ALL.map(|a| grid.derivative_wavenumbers(a));
    weighted_energy(grid, c, |idx| {
        let i = [idx % n1, (idx / n1) % n2, idx / (n1 * n2)];
        axes.iter().map(|a| k[a.index()][i[a.index()]].powi(2)).sum()
    })
}

/// Both sides of inequality `id` for `psi`, or `None` when the right-hand
/// side vanishes.
pub fn evaluate(id: BenchId, psi: &Field, alpha: f64) -> Result<Option<Sides>> {
    let grid = psi.grid().clone();
    let c = psi.spectral_data().into_owned();
    let l = grid.lengths();
    let kmin = l.iter().map(|&lj| std::f64::consts::TAU / lj).fold(f64::INFINITY, f64::min);
    match id {
        BenchId::HorizontalL4 => {
            let l2 = weighted_energy(&grid, &c, |_| 1.0).sqrt();
            let gh = derivative_energy(&grid, &c, &[Axis::X1, Axis::X2]).sqrt();
            if l2 == 0.0 || gh <= DEGENERATE * kmin * l2 {
                return Ok(None);
            }
            let lhs = anisotropic_mixed_norm(psi, 4.0, 2.0, MixedOrder::VerticalOuter)?.powi(2);
            Ok(Some(Sides { lhs, rhs: l2 * gh }))
        }
        BenchId::VerticalSup => {
            let l2sq = weighted_energy(&grid, &c, |_| 1.0);
            if l2sq == 0.0 {
                return Ok(None);
            }
            let d3 = derivative_energy(&grid, &c, &[Axis::X3]).sqrt();
            let lhs = horizontal_plane_energies(psi).into_iter().fold(0.0, f64::max);
            Ok(Some(Sides { lhs, rhs: l2sq.sqrt() * d3 + l2sq / l[2] }))
        }
        BenchId::Interpolation => {
            check_interpolation_alpha(alpha)?;
            let (p, theta) = interpolation_exponents(alpha);
            let mut fluct = c;
            fluct[0] = Complex64::default();
            let l2 = weighted_energy(&grid, &fluct, |_| 1.0).sqrt();
            if l2 <= DEGENERATE * l2_norm(psi) {
                return Ok(None);
            }
            let ksq = grid.ksq();
            let lam = weighted_energy(&grid, &fluct, |i| ksq[i].powf(alpha)).sqrt();
            let lhs = lp_norm(&Field::from_spectral(&grid, fluct)?, p)?;
            Ok(Some(Sides { lhs, rhs: l2.powf(1.0 - theta) * lam.powf(theta) }))
        }
    }
}

/// `LHS / RHS` of inequality `id` for `psi`; `None` for degenerate input.
pub fn sample_ratio(id: BenchId, psi: &Field, alpha: f64) -> Result<Option<f64>> {
    Ok(evaluate(id, psi, alpha)?.map(|s| s.ratio()))
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub id: BenchId,
    pub ensemble_size: usize,
    pub skipped: usize,
    /// Empirical constant; `0.0` when every sample was skipped.
    pub max_ratio: f64,
    pub argmax_seed: Option<u64>,
    pub dims: [usize; 3],
    pub lengths: [f64; 3],
    pub max_mode: usize,
    pub alpha: Option<f64>,
    /// `(seed, ratio)` per sample, `None` for skipped ones.
    pub samples: Vec<(u64, Option<f64>)>,
}

impl BenchReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "bench {}\n  inequality: {}\n  note: {}\n  grid: {}x{}x{}, box {:?}, max_mode {}\n",
            self.id,
            self.id.statement(),
            self.id.torus_note(),
            self.dims[0],
            self.dims[1],
            self.dims[2],
            self.lengths,
            self.max_mode,
        );
        if let Some(a) = self.alpha {
            let (p, theta) = interpolation_exponents(a);
            s += &format!("  alpha: {a} (p = {p}, theta = {theta})\n");
        }
        s += &format!(
            "  samples: {} ({} skipped as degenerate)\n  max ratio: {:e}",
            self.ensemble_size, self.skipped, self.max_ratio
        );
        if let Some(seed) = self.argmax_seed {
            s += &format!(" at seed {seed}");
        }
        s
    }
}

/// Evaluates `samples` as one ensemble. The maximum is reduced with ties
/// going to the smallest seed, so the result does not depend on order.
pub fn report_from_samples(id: BenchId, cfg: &EnsembleConfig, samples: Vec<(u64, Option<f64>)>) -> BenchReport {
    let mut max_ratio = 0.0;
    let mut argmax_seed = None;
    let mut skipped = 0;
    for &(seed, r) in &samples {
        match r {
            None => skipped += 1,
            Some(r) => {
                let better = r > max_ratio || (r == max_ratio && argmax_seed.is_some_and(|s| seed < s));
                if better || argmax_seed.is_none() {
                    max_ratio = r;
                    argmax_seed = Some(seed);
                }
            }
        }
    }
    BenchReport {
        id,
        ensemble_size: samples.len(),
        skipped,
        max_ratio,
        argmax_seed,
        dims: cfg.grid.dims(),
        lengths: cfg.grid.lengths(),
        max_mode: cfg.max_mode,
        alpha: (id == BenchId::Interpolation).then_some(cfg.alpha),
        samples,
    }
}

/// Ratio for the ensemble member with the given seed.
pub fn seeded_ratio(id: BenchId, cfg: &EnsembleConfig, seed: u64) -> Result<Option<f64>> {
    let psi = random_band_limited_field(&cfg.grid, cfg.max_mode, seed)?;
    sample_ratio(id, &psi, cfg.alpha)
}

pub fn run_bench(id: BenchId, cfg: &EnsembleConfig) -> Result<BenchReport> {
    if id == BenchId::Interpolation {
        check_interpolation_alpha(cfg.alpha)?;
    }
    if cfg.max_mode == 0 {
        return Err(Error::InvalidParameter("max_mode must be positive".into()));
    }
    let samples = (0..cfg.samples as u64)
        .map(|i| {
            let seed = cfg.base_seed.wrapping_add(i);
            Ok((seed, seeded_ratio(id, cfg, seed)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(report_from_samples(id, cfg, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// `(1/2π) ∫_0^{2π} |sin x|^p dx` by a fine midpoint rule.
    fn mean_abs_sin_pow(p: f64) -> f64 {
        let m = 200_000;
        (0..m).map(|j| ((j as f64 + 0.5) * 2.0 * PI / m as f64).sin().abs().powf(p)).sum::<f64>() / m as f64
    }

    #[test]
    fn horizontal_l4_on_sin_x1() {
        let grid = Grid::cube(16).unwrap();
        let psi = Field::from_fn(&grid, |x| x[0].sin());
        let got = sample_ratio(BenchId::HorizontalL4, &psi, 1.5).unwrap().unwrap();
        let v = 8.0 * PI.powi(3);
        // L^4_h norm per plane, then L^2 in x3.
        let l4h = (4.0 * PI * PI * mean_abs_sin_pow(4.0)).powf(0.25);
        let lhs = 2.0 * PI * l4h * l4h;
        let l2 = (v / 2.0).sqrt();
        let want = lhs / (l2 * l2);
        assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn horizontal_l4_skips_vertical_only_fields() {
        let grid = Grid::cube(16).unwrap();
        let psi = Field::from_fn(&grid, |x| x[2].sin());
        assert_eq!(sample_ratio(BenchId::HorizontalL4, &psi, 1.5).unwrap(), None);
        let zero = Field::from_fn(&grid, |_| 0.0);
        assert_eq!(sample_ratio(BenchId::HorizontalL4, &zero, 1.5).unwrap(), None);
    }

    #[test]
    fn vertical_sup_on_x3_independent_field_is_mean_term() {
        let grid = Grid::new([8, 8, 8], [2.0 * PI, 3.0, 5.0]).unwrap();
        let psi = Field::from_fn(&grid, |x| 1.0 + (2.0 * PI * x[1] / 3.0).cos());
        let s = evaluate(BenchId::VerticalSup, &psi, 1.5).unwrap().unwrap();
        let l2sq = l2_norm(&psi).powi(2);
        assert!((s.lhs - l2sq / 5.0).abs() < 1e-12 * s.lhs);
        assert!((s.rhs - l2sq / 5.0).abs() < 1e-12 * s.rhs);
    }

    #[test]
    fn vertical_sup_on_sin_x3() {
        let grid = Grid::cube(16).unwrap();
        let psi = Field::from_fn(&grid, |x| x[2].sin());
        let got = sample_ratio(BenchId::VerticalSup, &psi, 1.5).unwrap().unwrap();
        // plane energy peaks at x3 = π/2; ||ψ||^2 = ||∂3ψ||^2 = V/2
        let v = 8.0 * PI.powi(3);
        let want = 4.0 * PI * PI / (v / 2.0 + v / 2.0 / (2.0 * PI));
        assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
    }

    #[test]
    fn interpolation_single_mode() {
        let grid = Grid::cube(32).unwrap();
        let psi = Field::from_fn(&grid, |x| 3.0 + x[0].sin());
        for alpha in [1.25, 1.5, 1.75] {
            let (p, _) = interpolation_exponents(alpha);
            let got = sample_ratio(BenchId::Interpolation, &psi, alpha).unwrap().unwrap();
            let v = 8.0 * PI.powi(3);
            let want = (v * mean_abs_sin_pow(p)).powf(1.0 / p) / (v / 2.0).sqrt();
            assert!((got - want).abs() < 1e-12 * want, "alpha {alpha}: {got} vs {want}");
        }
    }

    #[test]
    fn interpolation_rejects_out_of_range_alpha() {
        let grid = Grid::cube(8).unwrap();
        let psi = Field::from_fn(&grid, |x| x[0].sin());
        assert!(sample_ratio(BenchId::Interpolation, &psi, 1.2).is_err());
        assert!(sample_ratio(BenchId::Interpolation, &psi, 2.5).is_err());
        let constant = Field::from_fn(&grid, |_| 2.0);
        assert_eq!(sample_ratio(BenchId::Interpolation, &constant, 1.5).unwrap(), None);
    }

    #[test]
    fn ensemble_is_reproducible_and_bounds_every_sample() {
        let grid = Grid::cube(16).unwrap();
        for id in BenchId::ALL {
            let cfg = EnsembleConfig::new(grid.clone(), 20, 4, 7);
            let a = run_bench(id, &cfg).unwrap();
            let b = run_bench(id, &cfg).unwrap();
            assert_eq!(a.max_ratio.to_bits(), b.max_ratio.to_bits());
            assert_eq!(a.argmax_seed, b.argmax_seed);
            assert_eq!(a.skipped, 0);
            for (_, r) in &a.samples {
                let r = r.unwrap();
                assert!(r.is_finite() && r > 0.0 && r <= a.max_ratio);
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for id in BenchId::ALL {
            assert_eq!(id.name().parse::<BenchId>().unwrap(), id);
        }
        assert!("nope".parse::<BenchId>().is_err());
    }
}
