//! Isotropic, fractional and anisotropic norms.
//!
//! Physical-space integrals use the plain uniform Riemann sum with cell
//! volume `l1 l2 l3 / (n1 n2 n3)`, which is spectrally accurate for smooth
//! periodic integrands and exact for trigonometric polynomials of degree
//! below the grid size. Spectral sums use Parseval: `||f||^2 = V sum |c_k|^2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, Representation, VectorField};
use crate::grid::{Axis, Grid};

/// `V * sum_k w_k |c_k|^2`.
pub(crate) fn weighted_energy(grid: &Grid, c: &[Complex64], weight: impl Fn(usize) -> f64) -> f64 {
    let sum: f64 = c.iter().enumerate().map(|(i, z)| weight(i) * z.norm_sqr()).sum();
    grid.volume() * sum
}

pub(crate) fn energy(grid: &Grid, c: &[Complex64]) -> f64 {
    grid.volume() * c.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// `V * sum_k Re(conj(a_k) b_k)`.
pub(crate) fn inner(grid: &Grid, a: &[Complex64], b: &[Complex64]) -> f64 {
    grid.volume() * a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum::<f64>()
}

/// `L^2` inner product `∫ a b dx`, evaluated through Parseval.
pub fn inner_product(a: &Field, b: &Field) -> Result<f64> {
    a.grid().check_same(b.grid())?;
    Ok(inner(a.grid(), &a.spectral_data(), &b.spectral_data()))
}

pub fn inner_product_vector(a: &VectorField, b: &VectorField) -> Result<f64> {
    let mut sum = 0.0;
    for (x, y) in a.components().iter().zip(b.components()) {
        sum += inner_product(x, y)?;
    }
    Ok(sum)
}

pub fn l2_norm(f: &Field) -> f64 {
    match f.representation() {
        Representation::Physical => {
            let x = f.physical().expect("physical");
            (f.grid().cell_volume() * x.iter().map(|v| v * v).sum::<f64>()).sqrt()
        }
        Representation::Spectral => energy(f.grid(), f.spectral().expect("spectral")).sqrt(),
    }
}

pub fn l2_norm_vector(w: &VectorField) -> f64 {
    w.components().iter().map(|c| l2_norm(c).powi(2)).sum::<f64>().sqrt()
}

fn check_exponent(p: f64) -> Result<()> {
    if p == f64::INFINITY || (p.is_finite() && p >= 1.0) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("exponent {p} must be >= 1 or infinite")))
    }
}

fn lp_of_values(values: impl Iterator<Item = f64>, p: f64, cell: f64) -> f64 {
    if p == f64::INFINITY {
        values.map(f64::abs).fold(0.0, f64::max)
    } else if p == 2.0 {
        (cell * values.map(|v| v * v).sum::<f64>()).sqrt()
    } else {
        (cell * values.map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }
}

/// `L^p` norm by uniform quadrature; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let x = f.physical_data();
    Ok(lp_of_values(x.iter().copied(), p, f.grid().cell_volume()))
}

/// `L^p` norm of the Euclidean magnitude `|w(x)|`.
pub fn lp_norm_vector(w: &VectorField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let [a, b, c] = w.physical_vecs();
    let mags = a.iter().zip(b.iter()).zip(c.iter()).map(|((x, y), z)| (x * x + y * y + z * z).sqrt());
    Ok(lp_of_values(mags, p, w.grid().cell_volume()))
}

/// Nesting order of a mixed Lebesgue norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixedOrder {
    /// `L^p_h(L^q_v)`: integrate in `x3` first, then over `x_h`.
    HorizontalOuter,
    /// `L^q_v(L^p_h)`: integrate over `x_h` first, then in `x3`.
    VerticalOuter,
}

fn inner_outer(values: &[f64], p: f64, cell: f64) -> f64 {
    lp_of_values(values.iter().copied(), p, cell)
}

/// Mixed norm with horizontal exponent `p_h` and vertical exponent `q_v`;
/// either may be `f64::INFINITY`.
pub fn anisotropic_mixed_norm(f: &Field, p_h: f64, q_v: f64, order: MixedOrder) -> Result<f64> {
    check_exponent(p_h)?;
    check_exponent(q_v)?;
    let grid = f.grid();
    let [n1, n2, n3] = grid.dims();
    let dh = grid.spacing(Axis::X1) * grid.spacing(Axis::X2);
    let dv = grid.spacing(Axis::X3);
    let x = f.physical_data();
    let slab = n1 * n2;
    match order {
        MixedOrder::HorizontalOuter => {
            let mut column = vec![0.0; n3];
            let mut inner = Vec::with_capacity(slab);
            for ih in 0..slab {
                for (i3, c) in column.iter_mut().enumerate() {
                    *c = x[ih + slab * i3];
                }
                inner.push(inner_outer(&column, q_v, dv));
            }
            Ok(inner_outer(&inner, p_h, dh))
        }
        MixedOrder::VerticalOuter => {
            let inner: Vec<f64> =
                (0..n3).map(|i3| inner_outer(&x[i3 * slab..(i3 + 1) * slab], p_h, dh)).collect();
            Ok(inner_outer(&inner, q_v, dv))
        }
    }
}

/// `||f(., x3)||_{L^2_h}^2` for every grid plane `x3`.
pub fn horizontal_plane_energies(f: &Field) -> Vec<f64> {
    let grid = f.grid();
    let [n1, n2, n3] = grid.dims();
    let dh = grid.spacing(Axis::X1) * grid.spacing(Axis::X2);
    let x = f.physical_data();
    let slab = n1 * n2;
    (0..n3).map(|i3| dh * x[i3 * slab..(i3 + 1) * slab].iter().map(|v| v * v).sum::<f64>()).collect()
}

/// `H^s` norm with weight `(1+|k|^2)^(s/2)`, or the homogeneous `||Λ^s f||`.
pub fn sobolev_norm(f: &Field, s: f64, homogeneous: bool) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::InvalidParameter(format!("Sobolev index {s}")));
    }
    let c = f.spectral_data();
    let ksq = f.grid().ksq();
    let e = if homogeneous {
        weighted_energy(f.grid(), &c, |i| lambda_weight(ksq[i], s))
    } else {
        weighted_energy(f.grid(), &c, |i| (1.0 + ksq[i]).powf(s))
    };
    Ok(e.sqrt())
}

/// `|k|^(2s)` with the mean mode kept only when `s == 0`.
pub(crate) fn lambda_weight(k2: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if k2 == 0.0 {
        0.0
    } else {
        k2.powf(s)
    }
}

/// `H^{s,s'}` norm: `H^s` in `x_h`, `H^{s'}` in `x3`. The homogeneous
/// variant uses `|k_h|^s |k3|^{s'}`.
pub fn anisotropic_sobolev_norm(f: &Field, s: f64, s_prime: f64, homogeneous: bool) -> Result<f64> {
    if !(s.is_finite() && s_prime.is_finite()) {
        return Err(Error::InvalidParameter(format!("Sobolev indices ({s}, {s_prime})")));
    }
    let grid = f.grid();
    let c = f.spectral_data();
    let khsq = grid.khsq();
    let k3 = grid.wavenumbers(Axis::X3);
    let n12 = grid.dims()[0] * grid.dims()[1];
    let e = weighted_energy(grid, &c, |i| {
        let v2 = k3[i / n12] * k3[i / n12];
        if homogeneous {
            lambda_weight(khsq[i], s) * lambda_weight(v2, s_prime)
        } else {
            (1.0 + khsq[i]).powf(s) * (1.0 + v2).powf(s_prime)
        }
    });
    Ok(e.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier::{apply_multiplier, Multiplier};
    use crate::random::random_band_limited_field;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn constant_l2() {
        let g = Grid::cube(8).unwrap();
        let f = Field::from_fn(&g, |_| -3.0);
        assert_relative_eq!(l2_norm(&f), 3.0 * TAU.powf(1.5), max_relative = 1e-14);
        assert_relative_eq!(l2_norm(&f.to_spectral().unwrap()), 3.0 * TAU.powf(1.5), max_relative = 1e-14);
    }

    #[test]
    fn sine_l2_and_l4() {
        let g = Grid::cube(16).unwrap();
        let f = Field::from_fn(&g, |x| x[0].sin());
        assert_relative_eq!(l2_norm(&f).powi(2), TAU.powi(3) / 2.0, max_relative = 1e-14);
        // closed form: int_0^{2pi} sin^4 = 3 pi / 4
        let want = TAU.powi(2) * 3.0 * PI / 4.0;
        assert_relative_eq!(lp_norm(&f, 4.0).unwrap().powi(4), want, max_relative = 1e-13);
        assert_relative_eq!(lp_norm(&f, f64::INFINITY).unwrap(), 1.0, max_relative = 1e-15);
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn parseval_on_random_fields() {
        let g = Grid::new([8, 12, 6], [1.0, 2.0, 3.0]).unwrap();
        for seed in 0..50 {
            let f = random_band_limited_field(&g, 2, seed).unwrap();
            let p = f.to_physical().unwrap();
            assert_relative_eq!(l2_norm(&f), l2_norm(&p), max_relative = 1e-12);
        }
    }

    #[test]
    fn mixed_norm_of_constant() {
        let g = Grid::new([8, 8, 8], [1.0, 2.0, 3.0]).unwrap();
        let f = Field::from_fn(&g, |_| 2.0);
        for (p, q) in [(1.0, 1.0), (2.0, 4.0), (3.0, f64::INFINITY), (f64::INFINITY, 2.0)] {
            let area: f64 = 2.0;
            let len: f64 = 3.0;
            let want = 2.0 * area.powf(1.0 / p) * len.powf(1.0 / q);
            for order in [MixedOrder::HorizontalOuter, MixedOrder::VerticalOuter] {
                let got = anisotropic_mixed_norm(&f, p, q, order).unwrap();
                assert_relative_eq!(got, want, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn mixed_norm_of_separable_field() {
        // Oracle: direct nested quadrature of g(x_h) h(x3) written out loop by loop.
        let g = Grid::new([8, 8, 16], [TAU, TAU, 2.0]).unwrap();
        let gh = |x: f64, y: f64| 1.5 + x.sin() * (2.0 * y).cos();
        let hv = |z: f64| 0.3 + (PI * z).cos().powi(2);
        let f = Field::from_fn(&g, |x| gh(x[0], x[1]) * hv(x[2]));
        let (p, q) = (4.0, 2.0);
        let [n1, n2, n3] = g.dims();
        let (dx, dy, dz) = (g.spacing(Axis::X1), g.spacing(Axis::X2), g.spacing(Axis::X3));
        let mut outer = 0.0;
        for i2 in 0..n2 {
            for i1 in 0..n1 {
                let mut inner = 0.0;
                for i3 in 0..n3 {
                    let v = gh(i1 as f64 * dx, i2 as f64 * dy) * hv(i3 as f64 * dz);
                    inner += v.abs().powf(q) * dz;
                }
                outer += inner.powf(p / q) * dx * dy;
            }
        }
        let want = outer.powf(1.0 / p);
        let got = anisotropic_mixed_norm(&f, p, q, MixedOrder::HorizontalOuter).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-10);
        // separable: product of the 2D and 1D norms
        let hnorm: f64 = (0..n3).map(|i| hv(i as f64 * dz).powf(q) * dz).sum::<f64>().powf(1.0 / q);
        let gnorm: f64 = (0..n1 * n2)
            .map(|i| gh((i % n1) as f64 * dx, (i / n1) as f64 * dy).abs().powf(p) * dx * dy)
            .sum::<f64>()
            .powf(1.0 / p);
        assert_relative_eq!(got, hnorm * gnorm, max_relative = 1e-10);
    }

    #[test]
    fn mixed_l2_l2_is_l2() {
        let g = Grid::cube(16).unwrap();
        let f = random_band_limited_field(&g, 5, 3).unwrap();
        let m = anisotropic_mixed_norm(&f, 2.0, 2.0, MixedOrder::VerticalOuter).unwrap();
        assert_relative_eq!(m, l2_norm(&f), max_relative = 1e-12);
    }

    #[test]
    fn sobolev_basics() {
        let g = Grid::cube(8).unwrap();
        let f = random_band_limited_field(&g, 2, 1).unwrap();
        assert_relative_eq!(sobolev_norm(&f, 0.0, false).unwrap(), l2_norm(&f), max_relative = 1e-14);
        let e = Field::from_fn(&g, |x| x[0].sin()).to_spectral().unwrap();
        assert_relative_eq!(sobolev_norm(&e, 2.0, true).unwrap(), l2_norm(&e), max_relative = 1e-14);
    }

    #[test]
    fn anisotropic_h01_against_derivative() {
        let g = Grid::cube(8).unwrap();
        let f = Field::from_fn(&g, |x| x[2].sin()).to_spectral().unwrap();
        let d3 = apply_multiplier(&f, Multiplier::Derivative(Axis::X3)).unwrap();
        let want = (l2_norm(&f).powi(2) + l2_norm(&d3).powi(2)).sqrt();
        let got = anisotropic_sobolev_norm(&f, 0.0, 1.0, false).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-12);
    }

    #[test]
    fn plane_energies_sum_to_l2() {
        let g = Grid::cube(8).unwrap();
        let f = random_band_limited_field(&g, 2, 4).unwrap();
        let s: f64 = horizontal_plane_energies(&f).iter().sum::<f64>() * g.spacing(Axis::X3);
        assert_relative_eq!(s, l2_norm(&f).powi(2), max_relative = 1e-12);
    }
}
