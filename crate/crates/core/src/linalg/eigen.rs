//! Hermitian eigensolvers.
//!
//! Two independent solvers are provided: cyclic complex Jacobi rotations and
//! Householder tridiagonalization followed by implicit QL. `Auto` uses Jacobi
//! for small operators and the tridiagonal route above [`JACOBI_MAX_DIM`].

use super::matrix::{CMat, C64, ONE, ZERO};
use super::{HermitianOperator, TOL};
use crate::error::{Error, Result};

/// Largest dimension handled by Jacobi under [`EigenMethod::Auto`].
pub const JACOBI_MAX_DIM: usize = 16;

/// Jacobi sweep budget.
pub const JACOBI_SWEEPS: usize = 100;

/// QL iteration budget per eigenvalue.
const QL_ITERATIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    #[default]
    Auto,
    Jacobi,
    Tridiagonal,
}

/// Eigenvalues sorted descending, with orthonormal eigenvectors stored as the
/// columns of `vectors` in the same order.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// The k-th eigenvector as an owned column.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        let n = self.dim();
        (0..n).map(|r| self.vectors[(r, k)]).collect()
    }

    /// Σ_k f(λ_k) |k><k| over the eigenvectors selected by `keep`.
    pub fn spectral_sum(&self, mut weight: impl FnMut(usize, f64) -> Option<f64>) -> CMat {
        let n = self.dim();
        let picked: Vec<(usize, f64)> = self
            .values
            .iter()
            .enumerate()
            .filter_map(|(k, &l)| weight(k, l).map(|w| (k, w)))
            .collect();
        let mut out = vec![ZERO; n * n];
        if picked.is_empty() {
            return CMat::from_vec(n, out);
        }
        // W[r][s] = V[r][k_s]; out = W diag(w) W†
        let m = picked.len();
        let mut w = vec![ZERO; n * m];
        for r in 0..n {
            for (s, &(k, _)) in picked.iter().enumerate() {
                w[r * m + s] = self.vectors[(r, k)];
            }
        }
        for i in 0..n {
            let wi = &w[i * m..(i + 1) * m];
            for j in 0..=i {
                let wj = &w[j * m..(j + 1) * m];
                let mut acc = ZERO;
                for s in 0..m {
                    acc += wi[s] * wj[s].conj() * picked[s].1;
                }
                out[i * n + j] = acc;
                out[j * n + i] = acc.conj();
            }
        }
        CMat::from_vec(n, out)
    }

    /// Σ λ_k |k><k|.
    pub fn reconstruct(&self) -> CMat {
        self.spectral_sum(|_, l| Some(l))
    }
}

/// Eigendecomposition of a Hermitian operator with the default method.
pub fn eig_herm(h: &HermitianOperator) -> Result<EigenSystem> {
    eig_herm_with(h, EigenMethod::Auto)
}

pub fn eig_herm_with(h: &HermitianOperator, method: EigenMethod) -> Result<EigenSystem> {
    let a = h.matrix();
    let n = a.dim();
    let (values, vectors) = match resolve(method, n) {
        EigenMethod::Jacobi => jacobi(a)?,
        _ => tridiagonal_ql(a, true).map(|(v, z)| (v, z.expect("vectors requested")))?,
    };
    Ok(canonicalize(values, vectors))
}

/// Eigenvalues only, sorted descending.
pub fn eigvals_herm(h: &HermitianOperator) -> Result<Vec<f64>> {
    eigvals_matrix(h.matrix())
}

/// Eigenvalues of a matrix already known to be Hermitian.
pub(crate) fn eigvals_matrix(a: &CMat) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut values = match resolve(EigenMethod::Auto, n) {
        EigenMethod::Jacobi => jacobi(a)?.0,
        _ => tridiagonal_ql(a, false)?.0,
    };
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

fn resolve(method: EigenMethod, n: usize) -> EigenMethod {
    match method {
        EigenMethod::Auto if n <= JACOBI_MAX_DIM => EigenMethod::Jacobi,
        EigenMethod::Auto => EigenMethod::Tridiagonal,
        m => m,
    }
}

/// Orders eigenpairs descending, fixes each vector's phase so its
/// largest-magnitude component is real positive, and breaks eigenvalue ties by
/// the lexicographic order of the rounded vectors.
fn canonicalize(values: Vec<f64>, vectors: CMat) -> EigenSystem {
    let n = values.len();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|k| (0..n).map(|r| vectors[(r, k)]).collect()).collect();
    for col in cols.iter_mut() {
        let mut best = 0;
        let mut best_mag = -1.0;
        for (i, z) in col.iter().enumerate() {
            let m = z.norm();
            if m > best_mag * (1.0 + 1e-12) + 1e-15 {
                best = i;
                best_mag = m;
            }
        }
        if best_mag > 0.0 {
            let ph = col[best].conj() / best_mag;
            for z in col.iter_mut() {
                *z *= ph;
            }
            col[best] = C64::new(col[best].re, 0.0);
        }
    }
    let keys: Vec<Vec<(i64, i64)>> = cols
        .iter()
        .map(|c| c.iter().map(|z| ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64)).collect())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let sorted_values: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    // clusters of numerically equal eigenvalues are ordered by vector key;
    // the (sorted) values stay in place so the list remains descending
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n {
            let scale = 1.0f64.max(sorted_values[end - 1].abs());
            if sorted_values[end - 1] - sorted_values[end] > 1e-12 * scale {
                break;
            }
            end += 1;
        }
        order[start..end].sort_by(|&a, &b| keys[b].cmp(&keys[a]));
        start = end;
    }
    let out = CMat::from_fn(n, |r, s| cols[order[s]][r]);
    EigenSystem { values: sorted_values, vectors: out }
}

fn jacobi(a0: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a0.dim();
    let mut a = a0.clone();
    a.symmetrize();
    let mut v = CMat::identity(n);
    let norm = a.frobenius();
    if norm == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let threshold = TOL.jacobi_rel * norm;
    let mut converged = false;
    for _sweep in 0..JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau == 0.0 { 1.0 } else { tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt()) };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let ec = phase.conj();
                let (upp, upq, uqp, uqq) = (C64::new(c, 0.0), C64::new(s, 0.0), -ec * s, ec * c);
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * upp + akq * uqp;
                    a[(k, q)] = akp * upq + akq * uqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
                    a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * upp + vkq * uqp;
                    v[(k, q)] = vkp * upq + vkq * uqq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { budget: JACOBI_SWEEPS });
    }
    Ok((a.diagonal_real(), v))
}

/// Householder reduction to real tridiagonal form plus implicit QL.
fn tridiagonal_ql(a0: &CMat, want_vectors: bool) -> Result<(Vec<f64>, Option<CMat>)> {
    let n = a0.dim();
    if n == 1 {
        return Ok((vec![a0[(0, 0)].re], want_vectors.then(|| CMat::identity(1))));
    }
    let mut a = a0.as_slice().to_vec();
    let mut reflectors: Vec<(usize, Vec<C64>, f64)> = Vec::new();
    let mut sub = vec![ZERO; n - 1];
    for k in 0..n - 2 {
        let m = n - k - 1;
        let x0 = a[(k + 1) * n + k];
        let mut sigma = 0.0;
        for j in 1..m {
            sigma += a[(k + 1 + j) * n + k].norm_sqr();
        }
        if sigma <= f64::MIN_POSITIVE {
            sub[k] = x0;
            continue;
        }
        let xnorm = (x0.norm_sqr() + sigma).sqrt();
        let ph = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -ph * xnorm;
        let mut v: Vec<C64> = (0..m).map(|j| a[(k + 1 + j) * n + k]).collect();
        v[0] = x0 - alpha;
        let tau = 2.0 / (v[0].norm_sqr() + sigma);
        // p = tau * A22 v from the lower triangle
        let mut p = vec![ZERO; m];
        for i in 0..m {
            let base = (k + 1 + i) * n + k + 1;
            let row = &a[base..base + i + 1];
            let vi = v[i];
            let mut acc = C64::new(row[i].re, 0.0) * vi;
            for j in 0..i {
                acc += row[j] * v[j];
                p[j] += row[j].conj() * vi;
            }
            p[i] += acc;
        }
        let mut vp = 0.0;
        for i in 0..m {
            p[i] *= tau;
            vp += (v[i].conj() * p[i]).re;
        }
        let kk = 0.5 * tau * vp;
        let w: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kk).collect();
        for i in 0..m {
            let base = (k + 1 + i) * n + k + 1;
            let row = &mut a[base..base + i + 1];
            let (vi, wi) = (v[i], w[i]);
            for j in 0..=i {
                row[j] -= vi * w[j].conj() + wi * v[j].conj();
            }
        }
        sub[k] = alpha;
        if want_vectors {
            reflectors.push((k, v, tau));
        }
    }
    sub[n - 2] = a[(n - 1) * n + n - 2];
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![ONE; n];
    for k in 0..n - 1 {
        let s = sub[k];
        let mag = s.norm();
        e[k] = mag;
        phases[k + 1] = if mag > 0.0 { phases[k] * s / mag } else { phases[k] };
    }

    let mut zt = if want_vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        Some(z)
    } else {
        None
    };
    tql(&mut d, &mut e, zt.as_deref_mut(), n)?;

    if !want_vectors {
        return Ok((d, None));
    }
    // Q = H_0 H_1 ... accumulated backwards.
    let mut q = vec![ZERO; n * n];
    for i in 0..n {
        q[i * n + i] = ONE;
    }
    for (k, v, tau) in reflectors.iter().rev() {
        let m = n - k - 1;
        let off = k + 1;
        let mut s = vec![ZERO; m];
        for r in 0..m {
            let vr = v[r].conj();
            let base = (off + r) * n + off;
            for (sc, qv) in s.iter_mut().zip(&q[base..base + m]) {
                *sc += vr * qv;
            }
        }
        for r in 0..m {
            let coef = v[r] * *tau;
            let base = (off + r) * n + off;
            for (qv, sc) in q[base..base + m].iter_mut().zip(&s) {
                *qv -= coef * sc;
            }
        }
    }
    for r in 0..n {
        for k in 0..n {
            q[r * n + k] *= phases[k];
        }
    }
    let zt = zt.expect("vectors requested");
    let mut out = vec![ZERO; n * n];
    for r in 0..n {
        let qrow = &q[r * n..(r + 1) * n];
        for c in 0..n {
            let zrow = &zt[c * n..(c + 1) * n];
            let mut re = 0.0;
            let mut im = 0.0;
            for (qv, z) in qrow.iter().zip(zrow) {
                re += qv.re * z;
                im += qv.im * z;
            }
            out[r * n + c] = C64::new(re, im);
        }
    }
    Ok((d, Some(CMat::from_vec(n, out))))
}

/// Implicit QL on a real symmetric tridiagonal matrix. `e[i]` couples `d[i]`
/// and `d[i+1]`. If `zt` is given, its row k holds column k of the rotation
/// accumulator.
fn tql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>, n: usize) -> Result<()> {
    if n > 0 {
        e[n - 1] = 0.0;
    }
    // couplings at rounding level of the whole matrix also split it
    let tnorm = (0..n).map(|i| d[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 }).fold(0.0, f64::max);
    let floor = f64::EPSILON * tnorm;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_ITERATIONS {
                return Err(Error::NoConvergence { budget: QL_ITERATIONS });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..(i + 1) * n];
                    let zi1 = &mut hi[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HermitianOperator;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> HermitianOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = CMat::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        m = &m + &m.adjoint();
        HermitianOperator::new(m).unwrap()
    }

    fn check_system(h: &HermitianOperator, es: &EigenSystem) {
        let n = h.dim();
        assert!(es.reconstruct().max_abs_diff(h.matrix()) <= 1e-9);
        for a in 0..n {
            for b in 0..n {
                let ip: C64 = (0..n).map(|r| es.vectors[(r, a)].conj() * es.vectors[(r, b)]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((ip - target).norm() <= 1e-10, "inner product ({a},{b}) = {ip}");
            }
        }
        for w in es.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn diagonal_input() {
        let h = HermitianOperator::new(CMat::diag_real(&[3.0, 1.0])).unwrap();
        let es = eig_herm(&h).unwrap();
        assert_eq!(es.values, vec![3.0, 1.0]);
        assert!((es.vectors[(0, 0)] - ONE).norm() < 1e-15);
        assert!((es.vectors[(1, 1)] - ONE).norm() < 1e-15);
    }

    #[test]
    fn pauli_x_closed_form() {
        let h = HermitianOperator::new(CMat::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        for method in [EigenMethod::Jacobi, EigenMethod::Tridiagonal] {
            let es = eig_herm_with(&h, method).unwrap();
            assert!((es.values[0] - 1.0).abs() < 1e-14);
            assert!((es.values[1] + 1.0).abs() < 1e-14);
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let v0 = es.vector(0);
            let v1 = es.vector(1);
            assert!((v0[0] - r).norm() < 1e-12 && (v0[1] - r).norm() < 1e-12);
            assert!((v1[0] - r).norm() < 1e-12 && (v1[1] + r).norm() < 1e-12);
        }
    }

    #[test]
    fn random_reconstruction_both_methods() {
        for (n, seed) in [(8, 1), (8, 2), (17, 3), (40, 4)] {
            let h = random_hermitian(n, seed);
            let j = eig_herm_with(&h, EigenMethod::Jacobi).unwrap();
            let t = eig_herm_with(&h, EigenMethod::Tridiagonal).unwrap();
            check_system(&h, &j);
            check_system(&h, &t);
            for (a, b) in j.values.iter().zip(&t.values) {
                assert!((a - b).abs() < 1e-10);
            }
            let vals = eigvals_herm(&h).unwrap();
            for (a, b) in vals.iter().zip(&t.values) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        // identity plus a rank-one bump: eigenvalue 1 with multiplicity n-1
        let n = 20;
        let v: Vec<C64> = (0..n).map(|i| C64::new(1.0 / (n as f64).sqrt(), 0.1 * i as f64 / n as f64)).collect();
        let mut m = CMat::identity(n);
        m.add_scaled(&CMat::outer(&v), 2.0);
        let h = HermitianOperator::new(m).unwrap();
        for method in [EigenMethod::Jacobi, EigenMethod::Tridiagonal] {
            let es = eig_herm_with(&h, method).unwrap();
            check_system(&h, &es);
        }
    }

    #[test]
    fn tie_order_is_deterministic() {
        let h = HermitianOperator::new(CMat::identity(3)).unwrap();
        let es = eig_herm(&h).unwrap();
        for k in 0..3 {
            assert!((es.vectors[(k, k)] - ONE).norm() < 1e-15);
        }
    }
}
