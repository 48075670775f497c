//! Projection, dealiasing and spectral differential operators.

use num_complex::Complex64;

use crate::error::Result;
use crate::field::{Field, VectorField};
use crate::grid::{Axis, Grid};
use crate::multiplier::derivative;

/// Applies `I - k k^T / |k|^2` mode by mode on raw coefficient arrays.
///
/// Uses the derivative wavenumbers, so the projection is exact with respect
/// to the spectral divergence and keeps Hermitian symmetry at Nyquist.
pub(crate) fn leray_in_place(grid: &Grid, w: [&mut [Complex64]; 3]) {
    let [k1, k2, k3] = Axis::ALL.map(|a| grid.derivative_wavenumbers(a));
    let [n1, n2, n3] = grid.dims();
    let [a, b, c] = w;
    let mut idx = 0;
    for i3 in 0..n3 {
        for i2 in 0..n2 {
            for i1 in 0..n1 {
                let k = [k1[i1], k2[i2], k3[i3]];
                let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if kk > 0.0 {
                    let dot = (a[idx] * k[0] + b[idx] * k[1] + c[idx] * k[2]) / kk;
                    a[idx] -= dot * k[0];
                    b[idx] -= dot * k[1];
                    c[idx] -= dot * k[2];
                }
                idx += 1;
            }
        }
    }
}

pub(crate) fn dealias_in_place(grid: &Grid, c: &mut [Complex64]) {
    for (z, &keep) in c.iter_mut().zip(grid.dealias_mask()) {
        if !keep {
            *z = Complex64::default();
        }
    }
}

pub(crate) fn divergence_of(grid: &Grid, w: [&[Complex64]; 3]) -> Vec<Complex64> {
    let [k1, k2, k3] = Axis::ALL.map(|a| grid.derivative_wavenumbers(a));
    let [n1, n2, n3] = grid.dims();
    let mut out = Vec::with_capacity(grid.len());
    let mut idx = 0;
    for i3 in 0..n3 {
        for i2 in 0..n2 {
            for i1 in 0..n1 {
                let s = w[0][idx] * k1[i1] + w[1][idx] * k2[i2] + w[2][idx] * k3[i3];
                out.push(Complex64::new(-s.im, s.re));
                idx += 1;
            }
        }
    }
    out
}

/// Leray projection onto divergence-free fields. The mean mode passes through.
pub fn leray_project(w: &VectorField) -> Result<VectorField> {
    let grid = w.grid();
    let [a, b, c] = w.components().each_ref().map(|f| f.spectral().map(<[_]>::to_vec));
    let (mut a, mut b, mut c) = (a?, b?, c?);
    leray_in_place(grid, [&mut a, &mut b, &mut c]);
    Ok(VectorField::from_spectral_vecs(grid, [a, b, c]))
}

/// Spectral divergence of a spectral vector field.
pub fn divergence(w: &VectorField) -> Result<Field> {
    let [a, b, c] = w.components().each_ref().map(|f| f.spectral());
    Field::from_spectral(w.grid(), divergence_of(w.grid(), [a?, b?, c?]))
}

/// Spectral gradient of a spectral scalar field.
pub fn gradient(f: &Field) -> Result<VectorField> {
    let c = f.spectral()?;
    let g = f.grid();
    Ok(VectorField::from_spectral_vecs(g, Axis::ALL.map(|a| derivative(g, a, c))))
}

/// Two-thirds truncation: zero every mode with `|m_j| > n_j / 3` on any axis.
pub fn dealias(f: &Field) -> Result<Field> {
    let mut c = f.spectral()?.to_vec();
    dealias_in_place(f.grid(), &mut c);
    Field::from_spectral(f.grid(), c)
}

/// Pointwise product of two fields, returned spectral and dealiased.
pub fn dealiased_product(a: &Field, b: &Field) -> Result<Field> {
    a.grid().check_same(b.grid())?;
    let grid = a.grid();
    let (x, y) = (a.physical_data(), b.physical_data());
    let prod: Vec<f64> = x.iter().zip(y.iter()).map(|(p, q)| p * q).collect();
    let mut c = grid.fft().forward_real(&prod);
    dealias_in_place(grid, &mut c);
    Field::from_spectral(grid, c)
}

/// Copies coarse coefficients into the corresponding modes of `fine`.
/// Coarse Nyquist modes have no symmetric partner on the finer grid and
/// are dropped.
pub(crate) fn zero_pad(coarse: &Grid, fine: &Grid, c: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); fine.len()];
    let [n1, n2, n3] = coarse.dims();
    let [f1, f2, f3] = fine.dims();
    let map = |m: i64, nc: usize, nf: usize| -> Option<usize> {
        if m == -(nc as i64) / 2 {
            None
        } else {
            Some(m.rem_euclid(nf as i64) as usize)
        }
    };
    let [m1, m2, m3] = Axis::ALL.map(|a| coarse.modes(a));
    let mut idx = 0;
    for i3 in 0..n3 {
        for i2 in 0..n2 {
            for i1 in 0..n1 {
                if let (Some(j1), Some(j2), Some(j3)) =
                    (map(m1[i1], n1, f1), map(m2[i2], n2, f2), map(m3[i3], n3, f3))
                {
                    out[j1 + f1 * (j2 + f2 * j3)] = c[idx];
                }
                idx += 1;
            }
        }
    }
    out
}

/// Restricts fine-grid coefficients to the modes representable on `coarse`
/// (coarse Nyquist modes set to zero).
pub(crate) fn truncate(fine: &Grid, coarse: &Grid, c: &[Complex64]) -> Vec<Complex64> {
    let [n1, n2, n3] = coarse.dims();
    let [f1, f2, _] = fine.dims();
    let fd = fine.dims();
    let [m1, m2, m3] = Axis::ALL.map(|a| coarse.modes(a));
    let mut out = Vec::with_capacity(coarse.len());
    for i3 in 0..n3 {
        for i2 in 0..n2 {
            for i1 in 0..n1 {
                let ms = [m1[i1], m2[i2], m3[i3]];
                let nyq = ms.iter().zip([n1, n2, n3]).any(|(&m, n)| m == -(n as i64) / 2);
                if nyq {
                    out.push(Complex64::default());
                } else {
                    let j = ms
                        .iter()
                        .zip(fd)
                        .map(|(&m, nf)| m.rem_euclid(nf as i64) as usize)
                        .collect::<Vec<_>>();
                    out.push(c[j[0] + f1 * (j[1] + f2 * j[2])]);
                }
            }
        }
    }
    out
}
