//! Random states, channels and measurements for tests and experiments.

use crate::channel::{CqChannel, Povm};
use crate::error::Result;
use crate::linalg::{func_herm, CMat, DensityOperator, HermitianOperator, C64};
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Unit vector with i.i.d. complex Gaussian components before normalization.
pub fn random_pure_state(d: usize, rng: &mut impl Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
    let n = crate::linalg::norm_sqr(&v).sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// G G† / Tr(G G†) for a square complex Gaussian G.
pub fn random_density(d: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = CMat::from_fn(d, |_, _| gaussian(rng));
    let m = g.matmul(&g.adjoint());
    let t = m.trace().re;
    DensityOperator::from_constructed(HermitianOperator::from_constructed(m.scale(1.0 / t)))
}

/// (1 − w)|ψ⟩⟨ψ| + w·σ with σ a random density operator.
pub fn random_noisy_state(d: usize, noise: f64, rng: &mut impl Rng) -> DensityOperator {
    let psi = random_pure_state(d, rng);
    let mut m = CMat::outer(&psi).scale(1.0 - noise);
    m.add_scaled(random_density(d, rng).matrix(), noise);
    DensityOperator::from_constructed(HermitianOperator::from_constructed(m))
}

/// Default noise weight for random channels.
pub const DEFAULT_NOISE: f64 = 0.2;

/// Channel with independent random outputs at the default noise weight.
pub fn random_channel(d: usize, rng: &mut impl Rng) -> CqChannel {
    random_channel_with_noise(d, DEFAULT_NOISE, rng)
}

pub fn random_channel_with_noise(d: usize, noise: f64, rng: &mut impl Rng) -> CqChannel {
    let r0 = random_noisy_state(d, noise, rng);
    let r1 = random_noisy_state(d, noise, rng);
    CqChannel::new(r0, r1).expect("equal dimensions")
}

/// Unitary from the QR decomposition (Gram-Schmidt) of a Gaussian matrix.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMat {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
        for c in &cols {
            let ip = crate::linalg::inner(c, &v);
            for (x, y) in v.iter_mut().zip(c) {
                *x -= ip * y;
            }
        }
        let n = crate::linalg::norm_sqr(&v).sqrt();
        if n > 1e-8 {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    CMat::from_fn(d, |r, c| cols[c][r])
}

/// Random `k`-outcome POVM: S^{-1/2} G_j G_j† S^{-1/2} with S = Σ G_j G_j†.
pub fn random_povm(d: usize, k: usize, rng: &mut impl Rng) -> Result<Povm> {
    let parts: Vec<CMat> = (0..k)
        .map(|_| {
            let g = CMat::from_fn(d, |_, _| gaussian(rng));
            g.matmul(&g.adjoint())
        })
        .collect();
    let mut s = CMat::zeros(d);
    for p in &parts {
        s.add_scaled(p, 1.0);
    }
    let s_inv_half = func_herm(&HermitianOperator::from_constructed(s), |x| x.powf(-0.5), true)?;
    let elements = parts
        .iter()
        .map(|p| HermitianOperator::from_constructed(s_inv_half.matrix().matmul(p).matmul(s_inv_half.matrix())))
        .collect();
    Povm::new(elements)
}

/// Projective measurement in a random orthonormal basis.
pub fn random_basis_povm(d: usize, rng: &mut impl Rng) -> Result<Povm> {
    Povm::from_basis(&random_unitary(d, rng))
}
