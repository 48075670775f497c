//! Scalar and vector fields in dual physical/spectral representation.

use std::borrow::Cow;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Axis, Grid};

/// Relative Hermitian asymmetry accepted by [`Field::to_physical`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Spectral,
}

#[derive(Clone, Debug, PartialEq)]
enum Data {
    Physical(Vec<f64>),
    Spectral(Vec<Complex64>),
}

/// A real scalar field on a [`Grid`].
///
/// Physical data holds point samples; spectral data holds the coefficients
/// `c_k` of `f(x) = sum_k c_k exp(i k.x)`, which satisfy `c_{-k} = conj(c_k)`.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    data: Data,
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>, repr: Representation) -> Field {
        let len = grid.len();
        let data = match repr {
            Representation::Physical => Data::Physical(vec![0.0; len]),
            Representation::Spectral => Data::Spectral(vec![Complex64::default(); len]),
        };
        Field { grid: grid.clone(), data }
    }

    pub fn from_physical(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Field> {
        check_len(grid, values.len())?;
        Ok(Field { grid: grid.clone(), data: Data::Physical(values) })
    }

    pub fn from_spectral(grid: &Arc<Grid>, coefs: Vec<Complex64>) -> Result<Field> {
        check_len(grid, coefs.len())?;
        Ok(Field { grid: grid.clone(), data: Data::Spectral(coefs) })
    }

    /// Samples `f(x1, x2, x3)` at the grid points.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 3]) -> f64) -> Field {
        let [n1, n2, n3] = grid.dims();
        let mut values = Vec::with_capacity(grid.len());
        for i3 in 0..n3 {
            let x3 = grid.coord(Axis::X3, i3);
            for i2 in 0..n2 {
                let x2 = grid.coord(Axis::X2, i2);
                for i1 in 0..n1 {
                    values.push(f([grid.coord(Axis::X1, i1), x2, x3]));
                }
            }
        }
        Field { grid: grid.clone(), data: Data::Physical(values) }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        match self.data {
            Data::Physical(_) => Representation::Physical,
            Data::Spectral(_) => Representation::Spectral,
        }
    }

    pub fn physical(&self) -> Result<&[f64]> {
        match &self.data {
            Data::Physical(v) => Ok(v),
            Data::Spectral(_) => Err(self.wrong_repr(Representation::Physical)),
        }
    }

    pub fn physical_mut(&mut self) -> Result<&mut [f64]> {
        match &mut self.data {
            Data::Physical(v) => Ok(v),
            Data::Spectral(_) => Err(Error::Representation {
                expected: Representation::Physical,
                found: Representation::Spectral,
            }),
        }
    }

    pub fn spectral(&self) -> Result<&[Complex64]> {
        match &self.data {
            Data::Spectral(c) => Ok(c),
            Data::Physical(_) => Err(self.wrong_repr(Representation::Spectral)),
        }
    }

    pub fn spectral_mut(&mut self) -> Result<&mut [Complex64]> {
        match &mut self.data {
            Data::Spectral(c) => Ok(c),
            Data::Physical(_) => Err(Error::Representation {
                expected: Representation::Spectral,
                found: Representation::Physical,
            }),
        }
    }

    fn wrong_repr(&self, expected: Representation) -> Error {
        Error::Representation { expected, found: self.representation() }
    }

    /// Forward transform. Fails unless the field is physical.
    pub fn to_spectral(&self) -> Result<Field> {
        let values = self.physical()?;
        Ok(Field {
            grid: self.grid.clone(),
            data: Data::Spectral(self.grid.fft().forward_real(values)),
        })
    }

    /// Inverse transform. Fails unless the field is spectral and Hermitian
    /// to within [`HERMITIAN_TOLERANCE`].
    pub fn to_physical(&self) -> Result<Field> {
        let coefs = self.spectral()?;
        let asymmetry = hermitian_asymmetry(&self.grid, coefs);
        if asymmetry > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Field {
            grid: self.grid.clone(),
            data: Data::Physical(self.grid.fft().inverse_real(coefs)),
        })
    }

    /// Spectral coefficients, transforming if needed.
    pub fn spectral_data(&self) -> Cow<'_, [Complex64]> {
        match &self.data {
            Data::Spectral(c) => Cow::Borrowed(c),
            Data::Physical(v) => Cow::Owned(self.grid.fft().forward_real(v)),
        }
    }

    /// Physical samples, transforming if needed (imaginary residue dropped).
    pub fn physical_data(&self) -> Cow<'_, [f64]> {
        match &self.data {
            Data::Physical(v) => Cow::Borrowed(v),
            Data::Spectral(c) => Cow::Owned(self.grid.fft().inverse_real(c)),
        }
    }

    /// Converts to spectral representation if not already there.
    pub fn into_spectral(self) -> Field {
        match self.data {
            Data::Spectral(_) => self,
            Data::Physical(ref v) => {
                let c = self.grid.fft().forward_real(v);
                Field { grid: self.grid, data: Data::Spectral(c) }
            }
        }
    }

    /// Converts to physical representation if not already there.
    pub fn into_physical(self) -> Field {
        match self.data {
            Data::Physical(_) => self,
            Data::Spectral(ref c) => {
                let v = self.grid.fft().inverse_real(c);
                Field { grid: self.grid, data: Data::Physical(v) }
            }
        }
    }

    pub(crate) fn into_spectral_vec(self) -> Vec<Complex64> {
        match self.into_spectral().data {
            Data::Spectral(c) => c,
            Data::Physical(_) => unreachable!(),
        }
    }

    /// Largest `|c_k - conj(c_{-k})|` relative to the largest `|c_k|`.
    pub fn hermitian_asymmetry(&self) -> Result<f64> {
        Ok(hermitian_asymmetry(&self.grid, self.spectral()?))
    }

    /// `self * a`, in whatever representation `self` is.
    pub fn scaled(&self, a: f64) -> Field {
        let data = match &self.data {
            Data::Physical(v) => Data::Physical(v.iter().map(|x| x * a).collect()),
            Data::Spectral(c) => Data::Spectral(c.iter().map(|x| x * a).collect()),
        };
        Field { grid: self.grid.clone(), data }
    }

    /// `self + a * other`; both operands must share grid and representation.
    pub fn axpy(&self, a: f64, other: &Field) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        let data = match (&self.data, &other.data) {
            (Data::Physical(x), Data::Physical(y)) => {
                Data::Physical(x.iter().zip(y).map(|(p, q)| p + a * q).collect())
            }
            (Data::Spectral(x), Data::Spectral(y)) => {
                Data::Spectral(x.iter().zip(y).map(|(p, q)| p + q * a).collect())
            }
            _ => return Err(other.wrong_repr(self.representation())),
        };
        Ok(Field { grid: self.grid.clone(), data })
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Field) -> bool {
        self.grid.same_as(&other.grid) && self.data == other.data
    }
}

fn check_len(grid: &Grid, found: usize) -> Result<()> {
    if found == grid.len() {
        Ok(())
    } else {
        Err(Error::Length { expected: grid.len(), found })
    }
}

pub(crate) fn hermitian_asymmetry(grid: &Grid, c: &[Complex64]) -> f64 {
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let [n1, n2, n3] = grid.dims();
    let (m1, m2, m3) =
        (grid.mirror_table(Axis::X1), grid.mirror_table(Axis::X2), grid.mirror_table(Axis::X3));
    let mut worst: f64 = 0.0;
    let mut idx = 0;
    for i3 in 0..n3 {
        for i2 in 0..n2 {
            let base = n1 * (m2[i2] + n2 * m3[i3]);
            for i1 in 0..n1 {
                worst = worst.max((c[idx] - c[base + m1[i1]].conj()).norm());
                idx += 1;
            }
        }
    }
    worst / scale
}

/// Three scalar fields sharing one grid and one representation.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: [Field; 3],
}

impl VectorField {
    pub fn new(comps: [Field; 3]) -> Result<VectorField> {
        let repr = comps[0].representation();
        for c in &comps[1..] {
            comps[0].grid.check_same(&c.grid)?;
            if c.representation() != repr {
                return Err(Error::Representation { expected: repr, found: c.representation() });
            }
        }
        Ok(VectorField { comps })
    }

    pub fn zeros(grid: &Arc<Grid>, repr: Representation) -> VectorField {
        VectorField { comps: std::array::from_fn(|_| Field::zeros(grid, repr)) }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 3]) -> [f64; 3]) -> VectorField {
        VectorField { comps: std::array::from_fn(|i| Field::from_fn(grid, |x| f(x)[i])) }
    }

    pub(crate) fn from_spectral_vecs(grid: &Arc<Grid>, c: [Vec<Complex64>; 3]) -> VectorField {
        let [a, b, d] = c;
        VectorField {
            comps: [a, b, d].map(|v| Field { grid: grid.clone(), data: Data::Spectral(v) }),
        }
    }

    pub(crate) fn from_physical_vecs(grid: &Arc<Grid>, c: [Vec<f64>; 3]) -> VectorField {
        VectorField {
            comps: c.map(|v| Field { grid: grid.clone(), data: Data::Physical(v) }),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.comps[0].grid
    }

    pub fn representation(&self) -> Representation {
        self.comps[0].representation()
    }

    pub fn components(&self) -> &[Field; 3] {
        &self.comps
    }

    pub fn component(&self, axis: Axis) -> &Field {
        &self.comps[axis.index()]
    }

    pub fn into_components(self) -> [Field; 3] {
        self.comps
    }

    pub fn to_spectral(&self) -> Result<VectorField> {
        let x: Vec<&[f64]> = self.comps.iter().map(|c| c.physical()).collect::<Result<_>>()?;
        let out = self.grid().fft().forward_real_many(&x);
        let [a, b, c]: [Vec<Complex64>; 3] = out.try_into().expect("three components");
        Ok(VectorField::from_spectral_vecs(self.grid(), [a, b, c]))
    }

    pub fn to_physical(&self) -> Result<VectorField> {
        let cs: Vec<&[Complex64]> =
            self.comps.iter().map(|c| c.spectral()).collect::<Result<_>>()?;
        for c in &cs {
            let asymmetry = hermitian_asymmetry(self.grid(), c);
            if asymmetry > HERMITIAN_TOLERANCE {
                return Err(Error::NotHermitian { asymmetry });
            }
        }
        let out = self.grid().fft().inverse_real_many(&cs);
        let [a, b, c]: [Vec<f64>; 3] = out.try_into().expect("three components");
        Ok(VectorField::from_physical_vecs(self.grid(), [a, b, c]))
    }

    pub fn into_spectral(self) -> VectorField {
        match self.representation() {
            Representation::Spectral => self,
            Representation::Physical => self.to_spectral().expect("physical components"),
        }
    }

    pub fn into_physical(self) -> VectorField {
        match self.representation() {
            Representation::Physical => self,
            Representation::Spectral => {
                let grid = self.grid().clone();
                let cs: Vec<&[Complex64]> =
                    self.comps.iter().map(|c| c.spectral().expect("spectral")).collect();
                let out = grid.fft().inverse_real_many(&cs);
                let [a, b, c]: [Vec<f64>; 3] = out.try_into().expect("three components");
                VectorField::from_physical_vecs(&grid, [a, b, c])
            }
        }
    }

    pub(crate) fn spectral_vecs(&self) -> [Cow<'_, [Complex64]>; 3] {
        if self.representation() == Representation::Spectral {
            return std::array::from_fn(|i| self.comps[i].spectral_data());
        }
        let x: Vec<&[f64]> = self.comps.iter().map(|c| c.physical().expect("physical")).collect();
        let mut out = self.grid().fft().forward_real_many(&x).into_iter();
        std::array::from_fn(|_| Cow::Owned(out.next().expect("three components")))
    }

    pub(crate) fn physical_vecs(&self) -> [Cow<'_, [f64]>; 3] {
        if self.representation() == Representation::Physical {
            return std::array::from_fn(|i| self.comps[i].physical_data());
        }
        let c: Vec<&[Complex64]> =
            self.comps.iter().map(|c| c.spectral().expect("spectral")).collect();
        let mut out = self.grid().fft().inverse_real_many(&c).into_iter();
        std::array::from_fn(|_| Cow::Owned(out.next().expect("three components")))
    }

    pub fn scaled(&self, a: f64) -> VectorField {
        VectorField { comps: std::array::from_fn(|i| self.comps[i].scaled(a)) }
    }

    pub fn axpy(&self, a: f64, other: &VectorField) -> Result<VectorField> {
        let [x, y, z] = &self.comps;
        let [p, q, r] = &other.comps;
        Ok(VectorField { comps: [x.axpy(a, p)?, y.axpy(a, q)?, z.axpy(a, r)?] })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrong_representation_is_rejected() {
        let g = Grid::cube(4).unwrap();
        let p = Field::zeros(&g, Representation::Physical);
        let s = Field::zeros(&g, Representation::Spectral);
        assert!(matches!(p.to_physical(), Err(Error::Representation { .. })));
        assert!(matches!(s.to_spectral(), Err(Error::Representation { .. })));
        assert!(p.axpy(1.0, &s).is_err());
    }

    #[test]
    fn length_is_checked() {
        let g = Grid::cube(4).unwrap();
        assert!(matches!(Field::from_physical(&g, vec![0.0; 63]), Err(Error::Length { .. })));
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let g = Grid::cube(8).unwrap();
        let mut c = vec![Complex64::default(); g.len()];
        c[g.index(1, 0, 0)] = Complex64::new(1.0, 0.0);
        let f = Field::from_spectral(&g, c).unwrap();
        assert!(matches!(f.to_physical(), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn zero_spectral_gives_zero_physical() {
        let g = Grid::cube(8).unwrap();
        let zero = Field::zeros(&g, Representation::Physical).to_spectral().unwrap();
        let back = zero.to_physical().unwrap();
        assert!(back.physical().unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_mode_pair_is_a_cosine() {
        let g = Grid::cube(8).unwrap();
        let mut c = vec![Complex64::default(); g.len()];
        c[g.index(1, 0, 0)] = Complex64::new(0.5, 0.0);
        c[g.index(7, 0, 0)] = Complex64::new(0.5, 0.0);
        let f = Field::from_spectral(&g, c).unwrap().to_physical().unwrap();
        let expect = Field::from_fn(&g, |x| x[0].cos());
        for (a, b) in f.physical().unwrap().iter().zip(expect.physical().unwrap()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_has_only_the_mean_mode() {
        let g = Grid::cube(8).unwrap();
        let f = Field::from_fn(&g, |_| 2.5).to_spectral().unwrap();
        let c = f.spectral().unwrap();
        assert!((c[0].re - 2.5).abs() < 1e-15);
        assert!(c[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn sine_has_two_modes() {
        let g = Grid::cube(8).unwrap();
        let f = Field::from_fn(&g, |x| x[0].sin()).to_spectral().unwrap();
        let c = f.spectral().unwrap();
        let nonzero: Vec<usize> = (0..g.len()).filter(|&i| c[i].norm() > 1e-14).collect();
        assert_eq!(nonzero, vec![g.index(1, 0, 0), g.index(7, 0, 0)]);
        assert!((c[g.index(1, 0, 0)] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn vector_components_must_agree() {
        let g = Grid::cube(4).unwrap();
        let h = Grid::cube(6).unwrap();
        let a = Field::zeros(&g, Representation::Physical);
        let b = Field::zeros(&h, Representation::Physical);
        assert!(VectorField::new([a.clone(), a.clone(), b]).is_err());
        let s = Field::zeros(&g, Representation::Spectral);
        assert!(VectorField::new([a.clone(), a, s]).is_err());
    }
}
