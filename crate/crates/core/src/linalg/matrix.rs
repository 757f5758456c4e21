use num_complex::Complex64;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        CMat { n, data }
    }

    /// Builds from row-major data. Panics if `data.len()` is not a square.
    pub fn from_vec(n: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), n * n, "CMat::from_vec: length is not n*n");
        CMat { n, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n);
        for (i, &x) in d.iter().enumerate() {
            m.data[i * n + i] = C64::new(x, 0.0);
        }
        m
    }

    /// |v><v|
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        Self::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.n + i].re).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        CMat { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_c(&self, s: C64) -> Self {
        CMat { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// self += s * other
    pub fn add_scaled(&mut self, other: &CMat, s: f64) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let orow = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        CMat { n, data: out }
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.n;
        assert_eq!(v.len(), n);
        (0..n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Kronecker product `self ⊗ other` (self's index is the more significant).
    pub fn kron(&self, other: &CMat) -> CMat {
        let (na, nb) = (self.n, other.n);
        let n = na * nb;
        let mut data = vec![ZERO; n * n];
        for ia in 0..na {
            for ja in 0..na {
                let a = self.data[ia * na + ja];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for ib in 0..nb {
                    let row = ia * nb + ib;
                    let base = row * n + ja * nb;
                    let brow = &other.data[ib * nb..(ib + 1) * nb];
                    for (jb, b) in brow.iter().enumerate() {
                        data[base + jb] = a * b;
                    }
                }
            }
        }
        CMat { n, data }
    }

    pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMat>) -> CMat {
        let mut acc = CMat::identity(1);
        for f in factors {
            acc = acc.kron(f);
        }
        acc
    }

    /// Max |A_ij - conj(A_ji)|.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.n;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                dev = dev.max(d);
            }
        }
        dev
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn commutator(&self, other: &CMat) -> CMat {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Re Tr(self · other) without forming the product.
    pub fn trace_product_re(&self, other: &CMat) -> f64 {
        let n = self.n;
        assert_eq!(n, other.n);
        let mut acc = 0.0;
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                let b = other.data[k * n + i];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    /// <v| self |v>, real part.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let n = self.n;
        let mut acc = ZERO;
        for i in 0..n {
            let s: C64 = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
            acc += v[i].conj() * s;
        }
        acc.re
    }

    /// Sets the matrix to (A + A†)/2, removing rounding asymmetry.
    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg.conj();
            }
        }
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        CMat { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        CMat { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        self.matmul(rhs)
    }
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_matches_index_formula() {
        let a = CMat::from_fn(2, |i, j| C64::new((i * 2 + j) as f64, 1.0));
        let b = CMat::from_fn(3, |i, j| C64::new(i as f64, j as f64));
        let k = a.kron(&b);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(k[(i, j)], a[(i / 3, j / 3)] * b[(i % 3, j % 3)]);
            }
        }
    }

    #[test]
    fn trace_product_matches_matmul() {
        let a = CMat::from_fn(3, |i, j| C64::new(i as f64 - j as f64, (i * j) as f64));
        let b = CMat::from_fn(3, |i, j| C64::new((i + 2 * j) as f64, -(i as f64)));
        let direct = a.matmul(&b).trace().re;
        assert!((a.trace_product_re(&b) - direct).abs() < 1e-12);
    }
}
