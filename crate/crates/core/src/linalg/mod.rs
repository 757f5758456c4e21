//! Dense Hermitian linear algebra: operator types, eigensolvers, operator
//! functions, trace norm, fidelity and the matrix geometric-mean ratio.

mod eigen;
mod functions;
mod matrix;

pub use eigen::{eig_herm, eig_herm_with, eigvals_herm, EigenMethod, EigenSystem, JACOBI_MAX_DIM, JACOBI_SWEEPS};
pub use functions::{
    cholesky_fidelity, fidelity, func_herm, geometric_mean_ratio, geometric_mean_ratio_with, pos_projector,
    trace_norm, von_neumann_entropy, von_neumann_entropy_matrix, Regularization, DEFAULT_DELTA,
};
pub use matrix::{inner, norm_sqr, CMat, C64, ONE, ZERO};

use crate::error::{Error, Result};

/// Numerical tolerances shared across the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max |A_ij - conj(A_ji)| accepted as Hermitian.
    pub herm: f64,
    /// Eigenvalues with |λ| at or below this are treated as zero.
    pub zero: f64,
    /// Smallest eigenvalue accepted for a density operator.
    pub density_min_eig: f64,
    /// Trace deviation accepted for a density operator.
    pub density_trace: f64,
    /// Relative off-diagonal Frobenius mass at which Jacobi stops.
    pub jacobi_rel: f64,
    /// Smallest eigenvalue accepted for a POVM element.
    pub povm_min_eig: f64,
    /// Max entry deviation of a POVM sum from the identity.
    pub povm_sum: f64,
    /// Column-sum deviation accepted for a classical channel.
    pub channel_sum: f64,
    /// Entries above -channel_neg are clamped to zero.
    pub channel_neg: f64,
    /// Eigenvalues below this contribute nothing to entropies.
    pub entropy_floor: f64,
}

pub const TOL: Tolerances = Tolerances {
    herm: 1e-12,
    zero: 1e-10,
    density_min_eig: -1e-10,
    density_trace: 1e-10,
    jacobi_rel: 1e-14,
    povm_min_eig: -1e-9,
    povm_sum: 1e-8,
    channel_sum: 1e-9,
    channel_neg: 1e-12,
    entropy_floor: 1e-15,
};

impl Default for Tolerances {
    fn default() -> Self {
        TOL
    }
}

/// Square complex matrix that is Hermitian within `TOL.herm`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(CMat);

impl HermitianOperator {
    /// Validates and symmetrizes `m`.
    pub fn new(mut m: CMat) -> Result<Self> {
        if m.dim() == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let dev = m.hermitian_deviation();
        if dev > TOL.herm || !dev.is_finite() {
            return Err(Error::NotHermitian { max_deviation: dev });
        }
        m.symmetrize();
        Ok(HermitianOperator(m))
    }

    /// Symmetrizes without checking; for operators Hermitian by construction
    /// whose rounding error may exceed `TOL.herm` (large sums and products).
    pub fn from_constructed(mut m: CMat) -> Self {
        m.symmetrize();
        HermitianOperator(m)
    }

    pub fn zeros(n: usize) -> Self {
        HermitianOperator(CMat::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        HermitianOperator(CMat::identity(n))
    }

    pub fn diag(d: &[f64]) -> Self {
        HermitianOperator(CMat::diag_real(d))
    }

    pub fn projector_onto(v: &[C64]) -> Self {
        let nrm = norm_sqr(v).sqrt();
        let u: Vec<C64> = v.iter().map(|z| z / nrm).collect();
        HermitianOperator(CMat::outer(&u))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn kron(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator(self.0.kron(&other.0))
    }

    pub fn add(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> HermitianOperator {
        HermitianOperator(self.0.scale(s))
    }

    /// I - self
    pub fn complement(&self) -> HermitianOperator {
        HermitianOperator(&CMat::identity(self.dim()) - &self.0)
    }

    /// U self U†
    pub fn conjugate_by(&self, u: &CMat) -> HermitianOperator {
        HermitianOperator::from_constructed(u.matmul(&self.0).matmul(&u.adjoint()))
    }

    /// Re Tr(self · other).
    pub fn trace_with(&self, other: &HermitianOperator) -> f64 {
        self.0.trace_product_re(&other.0)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    /// Max entry of P² - P.
    pub fn idempotency_residual(&self) -> f64 {
        self.0.matmul(&self.0).max_abs_diff(&self.0)
    }
}

/// Positive semidefinite, unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(HermitianOperator);

impl DensityOperator {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > TOL.density_trace {
            return Err(Error::InvalidDensity { reason: format!("trace = {tr:.12}") });
        }
        let min = eigvals_herm(&op)?.last().copied().unwrap_or(0.0);
        if min < TOL.density_min_eig {
            return Err(Error::InvalidDensity { reason: format!("min eigenvalue = {min:.3e}") });
        }
        Ok(DensityOperator(op))
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    /// For states that are valid by construction (mixtures and products of
    /// valid states), skips the spectral check.
    pub fn from_constructed(op: HermitianOperator) -> Self {
        DensityOperator(op)
    }

    pub fn pure(v: &[C64]) -> Self {
        DensityOperator(HermitianOperator::projector_onto(v))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        DensityOperator(HermitianOperator::identity(n).scale(1.0 / n as f64))
    }

    pub fn diag(p: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::diag(p))
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn matrix(&self) -> &CMat {
        self.0.matrix()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn kron(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator(self.0.kron(&other.0))
    }

    /// (1-δ)ρ + δ I/d
    pub fn mix_with_identity(&self, delta: f64) -> DensityOperator {
        let n = self.dim();
        let mut m = self.matrix().scale(1.0 - delta);
        m.add_scaled(&CMat::identity(n), delta / n as f64);
        DensityOperator(HermitianOperator(m))
    }

    /// Equal-weight mixture.
    pub fn average(states: &[&DensityOperator]) -> DensityOperator {
        assert!(!states.is_empty());
        let n = states[0].dim();
        let mut m = CMat::zeros(n);
        let w = 1.0 / states.len() as f64;
        for s in states {
            m.add_scaled(s.matrix(), w);
        }
        DensityOperator(HermitianOperator(m))
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigvals_herm(&self.0)?.last().copied().unwrap_or(0.0))
    }
}
