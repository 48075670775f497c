//! Fourier-multiplier operators.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Axis, Grid};

/// A diagonal operator in Fourier space, described by its symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Multiplier {
    /// `(-Δ)^alpha`, symbol `|k|^(2 alpha)`.
    FractionalLaplacian { alpha: f64 },
    /// `-Δ_h`, symbol `k1^2 + k2^2`.
    HorizontalLaplacian,
    /// `-Δ`, symbol `|k|^2`.
    FullLaplacian,
    /// `∂_axis`, symbol `i k_axis` (zero at the Nyquist index).
    Derivative(Axis),
    /// `(-Δ)^-1` with the mean mode mapped to zero.
    InverseLaplacianZeroMean,
    /// `Λ^s = (-Δ)^(s/2)`, symbol `|k|^s`; the mean mode maps to zero unless `s == 0`.
    LambdaPower { s: f64 },
    /// `(1 + k1^2 + k2^2)^(s/2) (1 + k3^2)^(s'/2)`.
    AnisotropicWeight { s: f64, s_prime: f64 },
    /// `(1 + |k|^2)^(s/2)`.
    BesselWeight { s: f64 },
}

impl Multiplier {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Multiplier::FractionalLaplacian { alpha } => alpha.is_finite() && alpha >= 0.0,
            Multiplier::LambdaPower { s } | Multiplier::BesselWeight { s } => s.is_finite(),
            Multiplier::AnisotropicWeight { s, s_prime } => s.is_finite() && s_prime.is_finite(),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad multiplier {self:?}")))
        }
    }

    /// Whether the symbol is real (all variants except derivatives).
    pub fn is_real(&self) -> bool {
        !matches!(self, Multiplier::Derivative(_))
    }

    /// Real symbol of a real multiplier at wavevector `k`.
    fn real_symbol(&self, k: [f64; 3]) -> f64 {
        let kh2 = k[0] * k[0] + k[1] * k[1];
        let k2 = kh2 + k[2] * k[2];
        match *self {
            Multiplier::FractionalLaplacian { alpha } => k2.powf(alpha),
            Multiplier::HorizontalLaplacian => kh2,
            Multiplier::FullLaplacian => k2,
            Multiplier::InverseLaplacianZeroMean => {
                if k2 == 0.0 {
                    0.0
                } else {
                    1.0 / k2
                }
            }
            Multiplier::LambdaPower { s } => {
                if s == 0.0 {
                    1.0
                } else if k2 == 0.0 {
                    0.0
                } else {
                    k2.powf(0.5 * s)
                }
            }
            Multiplier::AnisotropicWeight { s, s_prime } => {
                (1.0 + kh2).powf(0.5 * s) * (1.0 + k[2] * k[2]).powf(0.5 * s_prime)
            }
            Multiplier::BesselWeight { s } => (1.0 + k2).powf(0.5 * s),
            Multiplier::Derivative(_) => unreachable!("derivative symbol is imaginary"),
        }
    }

    /// Symbol values in storage order.
    pub fn symbol(&self, grid: &Grid) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(grid.len());
        match *self {
            Multiplier::Derivative(axis) => {
                let kd = grid.derivative_wavenumbers(axis);
                for idx in 0..grid.len() {
                    let i = grid.unravel(idx)[axis.index()];
                    out.push(Complex64::new(0.0, kd[i]));
                }
            }
            _ => {
                let [k1, k2, k3] = Axis::ALL.map(|a| grid.wavenumbers(a));
                let [n1, n2, n3] = grid.dims();
                for i3 in 0..n3 {
                    for i2 in 0..n2 {
                        for i1 in 0..n1 {
                            out.push(Complex64::new(self.real_symbol([k1[i1], k2[i2], k3[i3]]), 0.0));
                        }
                    }
                }
            }
        }
        out
    }

    /// Multiplies spectral coefficients in place.
    pub(crate) fn apply_in_place(&self, grid: &Grid, c: &mut [Complex64]) {
        match *self {
            Multiplier::Derivative(axis) => derivative_in_place(grid, axis, c),
            Multiplier::FullLaplacian => {
                for (z, &k2) in c.iter_mut().zip(grid.ksq()) {
                    *z *= k2;
                }
            }
            Multiplier::HorizontalLaplacian => {
                for (z, &k2) in c.iter_mut().zip(grid.khsq()) {
                    *z *= k2;
                }
            }
            _ => {
                let [k1, k2, k3] = Axis::ALL.map(|a| grid.wavenumbers(a));
                let [n1, n2, n3] = grid.dims();
                let mut idx = 0;
                for i3 in 0..n3 {
                    for i2 in 0..n2 {
                        for i1 in 0..n1 {
                            c[idx] *= self.real_symbol([k1[i1], k2[i2], k3[i3]]);
                            idx += 1;
                        }
                    }
                }
            }
        }
    }
}

pub(crate) fn derivative_in_place(grid: &Grid, axis: Axis, c: &mut [Complex64]) {
    let kd = grid.derivative_wavenumbers(axis);
    let [n1, n2, n3] = grid.dims();
    let mut idx = 0;
    for i3 in 0..n3 {
        for i2 in 0..n2 {
            for i1 in 0..n1 {
                let k = kd[[i1, i2, i3][axis.index()]];
                let z = c[idx];
                c[idx] = Complex64::new(-k * z.im, k * z.re);
                idx += 1;
            }
        }
    }
}

pub(crate) fn derivative(grid: &Grid, axis: Axis, c: &[Complex64]) -> Vec<Complex64> {
    let mut out = c.to_vec();
    derivative_in_place(grid, axis, &mut out);
    out
}

/// Applies `m` to a spectral field.
pub fn apply_multiplier(f: &Field, m: Multiplier) -> Result<Field> {
    m.validate()?;
    let mut c = f.spectral()?.to_vec();
    m.apply_in_place(f.grid(), &mut c);
    Field::from_spectral(f.grid(), c)
}
