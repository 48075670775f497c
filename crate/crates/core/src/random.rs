//! Seeded band-limited random fields.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::{Field, VectorField};
use crate::grid::{Axis, Grid};
use crate::ops::leray_in_place;

fn check_band(grid: &Grid, max_mode: usize) -> Result<()> {
    if max_mode > grid.max_resolved_mode() {
        return Err(Error::InvalidParameter(format!(
            "max_mode {max_mode} exceeds n/3 = {} for grid {:?}",
            grid.max_resolved_mode(),
            grid.dims()
        )));
    }
    Ok(())
}

fn fill(grid: &Grid, max_mode: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut c = vec![Complex64::default(); grid.len()];
    let [m1, m2, m3] = Axis::ALL.map(|a| grid.modes(a));
    let band = max_mode as u64;
    for idx in 0..grid.len() {
        let [i1, i2, i3] = grid.unravel(idx);
        if m1[i1].unsigned_abs() > band || m2[i2].unsigned_abs() > band || m3[i3].unsigned_abs() > band {
            continue;
        }
        let mirror = grid.mirror_index(idx);
        if idx == mirror {
            c[idx] = Complex64::new(rng.sample(StandardNormal), 0.0);
        } else if idx < mirror {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            c[idx] = z;
            c[mirror] = z.conj();
        }
    }
    c
}

/// Real scalar field with independent unit-variance complex Gaussian
/// coefficients on `|m_j| <= max_mode`, Hermitian-symmetrized. Spectral.
pub fn random_band_limited_field(grid: &Arc<Grid>, max_mode: usize, seed: u64) -> Result<Field> {
    check_band(grid, max_mode)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Field::from_spectral(grid, fill(grid, max_mode, &mut rng))
}

/// Vector version of [`random_band_limited_field`]; Leray-projected when
/// `solenoidal` is set.
pub fn random_band_limited_vector(
    grid: &Arc<Grid>,
    max_mode: usize,
    seed: u64,
    solenoidal: bool,
) -> Result<VectorField> {
    check_band(grid, max_mode)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = fill(grid, max_mode, &mut rng);
    let mut b = fill(grid, max_mode, &mut rng);
    let mut c = fill(grid, max_mode, &mut rng);
    if solenoidal {
        leray_in_place(grid, [&mut a, &mut b, &mut c]);
    }
    Ok(VectorField::from_spectral_vecs(grid, [a, b, c]))
}
