//! Periodic box discretization and wavenumber tables.

use std::f64::consts::TAU;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::fft::Fft3;

/// Coordinate axis of the box. `X1`/`X2` are horizontal, `X3` is vertical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        match i {
            0 => Some(Axis::X1),
            1 => Some(Axis::X2),
            2 => Some(Axis::X3),
            _ => None,
        }
    }
}

/// Uniform grid on `[0,l1) x [0,l2) x [0,l3)` with periodic boundaries.
///
/// Data is laid out with `x1` fastest: `idx = i1 + n1 * (i2 + n2 * i3)`, for
/// both physical samples and Fourier coefficients. Signed mode indices run
/// over `-n/2 ..= n/2 - 1`; the Nyquist index `n/2` is stored as `-n/2`.
pub struct Grid {
    n: [usize; 3],
    l: [f64; 3],
    modes: [Vec<i64>; 3],
    k: [Vec<f64>; 3],
    kd: [Vec<f64>; 3],
    mirror: [Vec<usize>; 3],
    ksq: Vec<f64>,
    khsq: Vec<f64>,
    kept: Vec<bool>,
    fft: Fft3,
    refined: OnceLock<Arc<Grid>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).field("l", &self.l).finish()
    }
}

impl Grid {
    /// Builds a grid. Every `n_j` must be even and at least 4; every `l_j`
    /// finite and positive.
    pub fn new(n: [usize; 3], l: [f64; 3]) -> Result<Arc<Grid>> {
        for (j, &nj) in n.iter().enumerate() {
            if nj < 4 || nj % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "n{} = {nj} must be even and >= 4",
                    j + 1
                )));
            }
        }
        for (j, &lj) in l.iter().enumerate() {
            if !(lj.is_finite() && lj > 0.0) {
                return Err(Error::InvalidGrid(format!("l{} = {lj} must be positive", j + 1)));
            }
        }

        let modes: [Vec<i64>; 3] = std::array::from_fn(|j| {
            let nj = n[j] as i64;
            (0..nj).map(|i| if i < nj / 2 { i } else { i - nj }).collect()
        });
        let k: [Vec<f64>; 3] = std::array::from_fn(|j| {
            modes[j].iter().map(|&m| TAU * m as f64 / l[j]).collect()
        });
        // Odd symbols vanish at Nyquist so derivatives of real fields stay real.
        let kd: [Vec<f64>; 3] = std::array::from_fn(|j| {
            let nyq = -(n[j] as i64) / 2;
            modes[j]
                .iter()
                .zip(&k[j])
                .map(|(&m, &kk)| if m == nyq { 0.0 } else { kk })
                .collect()
        });
        let mirror: [Vec<usize>; 3] =
            std::array::from_fn(|j| (0..n[j]).map(|i| (n[j] - i) % n[j]).collect());

        let len = n[0] * n[1] * n[2];
        let mut ksq = Vec::with_capacity(len);
        let mut khsq = Vec::with_capacity(len);
        let mut kept = Vec::with_capacity(len);
        for i3 in 0..n[2] {
            for i2 in 0..n[1] {
                for i1 in 0..n[0] {
                    let h = k[0][i1] * k[0][i1] + k[1][i2] * k[1][i2];
                    khsq.push(h);
                    ksq.push(h + k[2][i3] * k[2][i3]);
                    // |m_j| <= n_j / 3 on every axis
                    kept.push(
                        3 * modes[0][i1].unsigned_abs() as usize <= n[0]
                            && 3 * modes[1][i2].unsigned_abs() as usize <= n[1]
                            && 3 * modes[2][i3].unsigned_abs() as usize <= n[2],
                    );
                }
            }
        }

        Ok(Arc::new(Grid {
            n,
            l,
            modes,
            k,
            kd,
            mirror,
            ksq,
            khsq,
            kept,
            fft: Fft3::new(n),
            refined: OnceLock::new(),
        }))
    }

    /// `n^3` grid on the default `(2 pi)^3` box.
    pub fn cube(n: usize) -> Result<Arc<Grid>> {
        Grid::new([n; 3], [TAU; 3])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.n
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.l
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.l[0] * self.l[1] * self.l[2]
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn spacing(&self, axis: Axis) -> f64 {
        let j = axis.index();
        self.l[j] / self.n[j] as f64
    }

    /// Physical coordinate of sample `i` along `axis`.
    pub fn coord(&self, axis: Axis, i: usize) -> f64 {
        i as f64 * self.spacing(axis)
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        i1 + self.n[0] * (i2 + self.n[1] * i3)
    }

    /// Inverse of [`Grid::index`].
    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let i1 = idx % self.n[0];
        let r = idx / self.n[0];
        [i1, r % self.n[1], r / self.n[1]]
    }

    /// Signed mode indices along `axis`, in storage order.
    pub fn modes(&self, axis: Axis) -> &[i64] {
        &self.modes[axis.index()]
    }

    /// Wavenumbers `2 pi m / l` along `axis`, in storage order.
    pub fn wavenumbers(&self, axis: Axis) -> &[f64] {
        &self.k[axis.index()]
    }

    /// Wavenumbers used by first-derivative symbols (Nyquist entry is zero).
    pub fn derivative_wavenumbers(&self, axis: Axis) -> &[f64] {
        &self.kd[axis.index()]
    }

    /// Storage index of the mode `-k` for the mode stored at `idx`.
    #[inline]
    pub fn mirror_index(&self, idx: usize) -> usize {
        let [i1, i2, i3] = self.unravel(idx);
        self.index(self.mirror[0][i1], self.mirror[1][i2], self.mirror[2][i3])
    }

    pub(crate) fn mirror_table(&self, axis: Axis) -> &[usize] {
        &self.mirror[axis.index()]
    }

    /// `|k|^2` per mode.
    pub fn ksq(&self) -> &[f64] {
        &self.ksq
    }

    /// `k1^2 + k2^2` per mode.
    pub fn khsq(&self) -> &[f64] {
        &self.khsq
    }

    /// Two-thirds-rule mask: `true` where every `|m_j| <= n_j / 3`.
    pub fn dealias_mask(&self) -> &[bool] {
        &self.kept
    }

    /// Largest mode index retained by the two-thirds rule on every axis.
    pub fn max_resolved_mode(&self) -> usize {
        self.n.iter().map(|&nj| nj / 3).min().unwrap_or(0)
    }

    pub(crate) fn fft(&self) -> &Fft3 {
        &self.fft
    }

    /// The same box with twice the points per axis. Cached.
    pub fn refined(&self) -> Arc<Grid> {
        self.refined
            .get_or_init(|| {
                Grid::new(self.n.map(|nj| 2 * nj), self.l).expect("doubling a valid grid")
            })
            .clone()
    }

    /// Grids are interchangeable when point counts and box lengths agree.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n
            && self.l.iter().zip(&other.l).all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_or_tiny_axes() {
        assert!(Grid::new([6, 8, 3], [1.0; 3]).is_err());
        assert!(Grid::new([2, 8, 8], [1.0; 3]).is_err());
        assert!(Grid::new([8, 8, 8], [1.0, -1.0, 1.0]).is_err());
        assert!(Grid::new([4, 6, 8], [1.0, 2.0, 3.0]).is_ok());
    }

    #[test]
    fn wavenumber_table_is_symmetric_except_nyquist() {
        let g = Grid::new([8, 6, 4], [TAU, 2.0 * TAU, 1.0]).unwrap();
        for axis in Axis::ALL {
            let modes = g.modes(axis);
            let n = modes.len() as i64;
            assert_eq!(modes.iter().filter(|&&m| m == -n / 2).count(), 1);
            for &m in modes {
                if m != -n / 2 {
                    assert!(modes.contains(&-m));
                }
            }
        }
        assert_eq!(g.wavenumbers(Axis::X2)[1], 0.5);
        assert_eq!(g.derivative_wavenumbers(Axis::X1)[4], 0.0);
        assert_eq!(g.wavenumbers(Axis::X1)[4], -4.0);
    }

    #[test]
    fn index_roundtrip_and_mirror() {
        let g = Grid::new([4, 6, 8], [TAU; 3]).unwrap();
        for idx in 0..g.len() {
            let [a, b, c] = g.unravel(idx);
            assert_eq!(g.index(a, b, c), idx);
            assert_eq!(g.mirror_index(g.mirror_index(idx)), idx);
        }
    }

    #[test]
    fn dealias_mask_keeps_a_third() {
        let g = Grid::cube(8).unwrap();
        let kept: Vec<i64> = (0..8)
            .filter(|&i| g.dealias_mask()[g.index(i, 0, 0)])
            .map(|i| g.modes(Axis::X1)[i])
            .collect();
        assert_eq!(kept, vec![0, 1, 2, -2, -1]);
        assert_eq!(g.max_resolved_mode(), 2);
    }
}
