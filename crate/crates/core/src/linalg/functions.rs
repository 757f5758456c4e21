use super::eigen::{eig_herm, eigvals_herm, eigvals_matrix};
use super::matrix::{CMat, C64, ZERO};
use super::{DensityOperator, HermitianOperator, TOL};
use crate::error::{Error, Result};

/// Default mixing weight for rank-deficient states in the geometric mean.
pub const DEFAULT_DELTA: f64 = 1e-9;

/// Projector onto the eigenspace of eigenvalues ≥ 0. Eigenvalues with
/// |λ| ≤ `TOL.zero` count as non-negative.
pub fn pos_projector(h: &HermitianOperator) -> Result<HermitianOperator> {
    let es = eig_herm(h)?;
    let p = es.spectral_sum(|_, l| (l >= -TOL.zero).then_some(1.0));
    Ok(HermitianOperator::from_constructed(p))
}

/// Σ f(λ)|y><y|. With `support_only`, eigenvalues with |λ| ≤ `TOL.zero` are
/// dropped; otherwise they are clamped to zero before applying `f`.
pub fn func_herm(h: &HermitianOperator, f: impl Fn(f64) -> f64, support_only: bool) -> Result<HermitianOperator> {
    let es = eig_herm(h)?;
    let mut bad = None;
    let m = es.spectral_sum(|_, l| {
        let near_zero = l.abs() <= TOL.zero;
        if support_only && near_zero {
            return None;
        }
        let x = if near_zero { 0.0 } else { l };
        let y = f(x);
        if !y.is_finite() {
            bad.get_or_insert(l);
            return None;
        }
        Some(y)
    });
    if let Some(eigenvalue) = bad {
        return Err(Error::UndefinedAtEigenvalue { eigenvalue });
    }
    Ok(HermitianOperator::from_constructed(m))
}

/// Sum of singular values of a square matrix.
pub fn trace_norm(a: &CMat) -> Result<f64> {
    let dev = a.hermitian_deviation();
    if dev <= TOL.herm {
        let vals = eigvals_herm(&HermitianOperator::from_constructed(a.clone()))?;
        return Ok(vals.iter().map(|l| l.abs()).sum());
    }
    let mut ata = a.adjoint().matmul(a);
    ata.symmetrize();
    let vals = eigvals_matrix(&ata)?;
    Ok(sqrt_spectrum_sum(&vals))
}

/// ‖√ρ0 √ρ1‖₁, through the eigenvalues of √ρ0 ρ1 √ρ0.
pub fn fidelity(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<f64> {
    check_dims(rho0.dim(), rho1.dim())?;
    // small positive eigenvalues are kept: zeroing λ would drop √λ
    let s0 = eig_herm(rho0.op())?.spectral_sum(|_, l| Some(l.max(0.0).sqrt()));
    let mut m = s0.matmul(rho1.matrix()).matmul(&s0);
    m.symmetrize();
    let vals = eigvals_matrix(&m)?;
    Ok(sqrt_spectrum_sum(&vals))
}

/// Fidelity through pivoted Cholesky factors ρ0 = L0 L0†, ρ1 = L1 L1†: the
/// trace norm of the r0×r1 matrix L0†L1. Near-orthogonal low-rank states
/// keep their overlap to full relative precision, since L0†L1 is formed
/// before squaring.
pub fn cholesky_fidelity(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<f64> {
    check_dims(rho0.dim(), rho1.dim())?;
    let l0 = pivoted_cholesky(rho0.matrix());
    let l1 = pivoted_cholesky(rho1.matrix());
    let (r0, r1) = (l0.len(), l1.len());
    if r0 == 0 || r1 == 0 {
        return Ok(0.0);
    }
    let a: Vec<Vec<C64>> =
        l0.iter().map(|p| l1.iter().map(|q| p.iter().zip(q).map(|(x, y)| x.conj() * y).sum()).collect()).collect();
    // A A† (r0×r0)
    let mut m = vec![ZERO; r0 * r0];
    for i in 0..r0 {
        for j in 0..=i {
            let v: C64 = (0..r1).map(|k| a[i][k] * a[j][k].conj()).sum();
            m[i * r0 + j] = v;
            m[j * r0 + i] = v.conj();
        }
        m[i * r0 + i].im = 0.0;
    }
    let vals = eigvals_matrix(&CMat::from_vec(r0, m))?;
    Ok(sqrt_spectrum_sum(&vals))
}

/// Columns of L with A ≈ L L†, pivoting on the largest remaining diagonal and
/// stopping once it reaches rounding level.
fn pivoted_cholesky(a: &CMat) -> Vec<Vec<C64>> {
    let n = a.dim();
    let mut d = a.diagonal_real();
    let scale = d.iter().cloned().fold(0.0, f64::max);
    let stop = 1e-15 * scale.max(f64::MIN_POSITIVE);
    let mut done = vec![false; n];
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for _ in 0..n {
        let mut p = usize::MAX;
        let mut best = stop;
        for i in 0..n {
            if !done[i] && d[i] > best {
                best = d[i];
                p = i;
            }
        }
        if p == usize::MAX {
            break;
        }
        done[p] = true;
        let piv = d[p].sqrt();
        let mut col = vec![ZERO; n];
        col[p] = C64::new(piv, 0.0);
        for i in 0..n {
            if done[i] {
                continue;
            }
            let mut v = a[(i, p)];
            for c in &cols {
                v -= c[i] * c[p].conj();
            }
            let l = v / piv;
            col[i] = l;
            d[i] -= l.norm_sqr();
        }
        cols.push(col);
    }
    cols
}

/// Σ √λ over eigenvalues above the rounding floor of the spectrum.
fn sqrt_spectrum_sum(vals: &[f64]) -> f64 {
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let floor = 4.0 * vals.len() as f64 * f64::EPSILON * top;
    vals.iter().filter(|&&l| l > floor).map(|l| l.sqrt()).sum()
}

/// How rank-deficient states are treated in [`geometric_mean_ratio_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    /// Mix both states with `DEFAULT_DELTA` of I/d when either is rank deficient.
    Auto,
    /// Always mix with the given weight (0 disables mixing).
    Fixed(f64),
}

impl Regularization {
    /// The weight actually used for this pair.
    pub fn resolve(self, rho0: &DensityOperator, rho1: &DensityOperator) -> Result<f64> {
        match self {
            Regularization::Fixed(d) if d < 0.0 || d >= 1.0 => {
                Err(Error::Domain(format!("regularization weight {d} outside [0, 1)")))
            }
            Regularization::Fixed(d) => Ok(d),
            Regularization::Auto => {
                let deficient = rho0.min_eigenvalue()? <= TOL.zero || rho1.min_eigenvalue()? <= TOL.zero;
                Ok(if deficient { DEFAULT_DELTA } else { 0.0 })
            }
        }
    }
}

/// ρ0 # ρ1⁻¹ = ρ1^{-1/2} √(ρ1^{1/2} ρ0 ρ1^{1/2}) ρ1^{-1/2}, with `delta`
/// mixing applied to both states first.
pub fn geometric_mean_ratio(rho0: &DensityOperator, rho1: &DensityOperator, delta: f64) -> Result<HermitianOperator> {
    check_dims(rho0.dim(), rho1.dim())?;
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Domain(format!("regularization weight {delta} outside [0, 1)")));
    }
    let (r0, r1) = if delta > 0.0 {
        (rho0.mix_with_identity(delta), rho1.mix_with_identity(delta))
    } else {
        (rho0.clone(), rho1.clone())
    };
    let es1 = eig_herm(r1.op())?;
    let min1 = es1.values.last().copied().unwrap_or(0.0);
    // mixing guarantees min eigenvalue ≥ δ/d
    let floor = if delta > 0.0 { 0.5 * delta / rho1.dim() as f64 } else { TOL.zero };
    if min1 <= floor {
        return Err(Error::RankDeficient { min_eigenvalue: min1 });
    }
    let s = es1.spectral_sum(|_, l| Some(l.sqrt()));
    let s_inv = es1.spectral_sum(|_, l| Some(1.0 / l.sqrt()));
    let inner = HermitianOperator::from_constructed(s.matmul(r0.matrix()).matmul(&s));
    let mid = eig_herm(&inner)?.spectral_sum(|_, l| Some(l.max(0.0).sqrt()));
    Ok(HermitianOperator::from_constructed(s_inv.matmul(&mid).matmul(&s_inv)))
}

/// Geometric-mean ratio with the weight chosen by `reg`; returns the weight used.
pub fn geometric_mean_ratio_with(
    rho0: &DensityOperator,
    rho1: &DensityOperator,
    reg: Regularization,
) -> Result<(HermitianOperator, f64)> {
    let delta = reg.resolve(rho0, rho1)?;
    Ok((geometric_mean_ratio(rho0, rho1, delta)?, delta))
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    von_neumann_entropy_matrix(rho.matrix())
}

pub fn von_neumann_entropy_matrix(m: &CMat) -> Result<f64> {
    let vals = eigvals_matrix(m)?;
    Ok(entropy_of_spectrum(&vals))
}

pub(crate) fn entropy_of_spectrum(vals: &[f64]) -> f64 {
    let nats: f64 = vals.iter().filter(|&&l| l > TOL.entropy_floor).map(|&l| -l * l.ln()).sum();
    nats / std::f64::consts::LN_2
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}
