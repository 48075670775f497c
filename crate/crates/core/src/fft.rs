//! Three-dimensional FFTs on the `x1`-fastest layout.
//!
//! Coefficients are normalized so that `f(x) = sum_k c_k exp(i k.x)`, i.e.
//! the forward transform divides by the number of points and the inverse
//! does not. Real fields are transformed two at a time by packing them into
//! the real and imaginary parts of one complex array.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft3 {
    n: [usize; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
    mirror: [Vec<usize>; 3],
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

/// Runs `plan` over every line of length `n` and stride `stride` in `data`.
/// Lines are gathered in blocks of neighbouring offsets so memory access
/// stays contiguous.
fn strided_lines(
    plan: &dyn Fft<f64>,
    data: &mut [Complex64],
    n: usize,
    stride: usize,
    outer: usize,
    buf: &mut [Complex64],
    scratch: &mut [Complex64],
) {
    const B: usize = 16;
    let span = n * stride;
    for o in 0..outer {
        let base = o * span;
        for p0 in (0..stride).step_by(B) {
            let w = B.min(stride - p0);
            let lines = &mut buf[..w * n];
            for i in 0..n {
                let row = &data[base + p0 + i * stride..base + p0 + i * stride + w];
                for (b, z) in row.iter().enumerate() {
                    lines[b * n + i] = *z;
                }
            }
            plan.process_with_scratch(lines, scratch);
            for i in 0..n {
                let row = &mut data[base + p0 + i * stride..base + p0 + i * stride + w];
                for (b, z) in row.iter_mut().enumerate() {
                    *z = lines[b * n + i];
                }
            }
        }
    }
}

impl Fft3 {
    pub(crate) fn new(n: [usize; 3]) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let forward = std::array::from_fn(|j| planner.plan_fft_forward(n[j]));
        let inverse = std::array::from_fn(|j| planner.plan_fft_inverse(n[j]));
        let mirror = std::array::from_fn(|j| (0..n[j]).map(|i| (n[j] - i) % n[j]).collect());
        Fft3 { n, forward, inverse, mirror }
    }

    fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    fn run(&self, data: &mut [Complex64], dir: Direction) {
        let [n1, n2, n3] = self.n;
        assert_eq!(data.len(), self.len());
        let plans = match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        let scratch_len = plans.iter().map(|p| p.get_inplace_scratch_len()).max().unwrap_or(0);
        let mut scratch = vec![Complex64::default(); scratch_len];
        let mut buf = vec![Complex64::default(); 16 * n2.max(n3)];
        plans[0].process_with_scratch(data, &mut scratch);
        strided_lines(&*plans[1], data, n2, n1, n3, &mut buf, &mut scratch);
        strided_lines(&*plans[2], data, n3, n1 * n2, 1, &mut buf, &mut scratch);
    }

    /// Unnormalized forward transform in place.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(data, Direction::Forward);
    }

    /// Unnormalized inverse transform in place.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, Direction::Inverse);
    }

    pub(crate) fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let scale = 1.0 / self.len() as f64;
        let mut z: Vec<Complex64> = x.iter().map(|&a| Complex64::new(a * scale, 0.0)).collect();
        self.forward(&mut z);
        z
    }

    pub(crate) fn forward_real_pair(&self, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let scale = 1.0 / self.len() as f64;
        let mut z: Vec<Complex64> =
            a.iter().zip(b).map(|(&x, &y)| Complex64::new(x * scale, y * scale)).collect();
        self.forward(&mut z);

        let [n1, n2, n3] = self.n;
        let [m1, m2, m3] = &self.mirror;
        let mut ca = Vec::with_capacity(z.len());
        let mut cb = Vec::with_capacity(z.len());
        for i3 in 0..n3 {
            for i2 in 0..n2 {
                let row = &z[n1 * (i2 + n2 * i3)..n1 * (i2 + n2 * i3 + 1)];
                let mirror_row = &z[n1 * (m2[i2] + n2 * m3[i3])..n1 * (m2[i2] + n2 * m3[i3] + 1)];
                for (i1, &zk) in row.iter().enumerate() {
                    let zm = mirror_row[m1[i1]].conj();
                    ca.push((zk + zm) * 0.5);
                    // (zk - zm) / 2i
                    let d = zk - zm;
                    cb.push(Complex64::new(0.5 * d.im, -0.5 * d.re));
                }
            }
        }
        (ca, cb)
    }

    pub(crate) fn inverse_real(&self, c: &[Complex64]) -> Vec<f64> {
        let mut z = c.to_vec();
        self.inverse(&mut z);
        z.into_iter().map(|v| v.re).collect()
    }

    pub(crate) fn inverse_real_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let mut z: Vec<Complex64> =
            a.iter().zip(b).map(|(&x, &y)| Complex64::new(x.re - y.im, x.im + y.re)).collect();
        self.inverse(&mut z);
        z.into_iter().map(|v| (v.re, v.im)).unzip()
    }

    /// Forward transforms of several real arrays, paired internally.
    pub(crate) fn forward_real_many(&self, xs: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(xs.len());
        for chunk in xs.chunks(2) {
            match chunk {
                [a, b] => {
                    let (ca, cb) = self.forward_real_pair(a, b);
                    out.push(ca);
                    out.push(cb);
                }
                [a] => out.push(self.forward_real(a)),
                _ => unreachable!(),
            }
        }
        out
    }

    /// Inverse transforms of several Hermitian arrays, paired internally.
    pub(crate) fn inverse_real_many(&self, cs: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(cs.len());
        for chunk in cs.chunks(2) {
            match chunk {
                [a, b] => {
                    let (xa, xb) = self.inverse_real_pair(a, b);
                    out.push(xa);
                    out.push(xb);
                }
                [a] => out.push(self.inverse_real(a)),
                _ => unreachable!(),
            }
        }
        out
    }
}
