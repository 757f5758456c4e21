//! The Fuchs-Caves measurement: eigenbasis of ρ0 # ρ1⁻¹, its likelihood-ratio
//! decision rule, and product tests over N copies.

use crate::channel::{ClassicalChannel, CqChannel, Povm};
use crate::error::{Error, Result};
use crate::linalg::{
    eig_herm, geometric_mean_ratio_with, CMat, DensityOperator, EigenSystem, HermitianOperator, Regularization,
};

/// Outcome tuples are enumerated only while N·log₂(d) stays at or below this.
pub const ENUMERATION_LOG2_LIMIT: f64 = 24.0;

/// Ratios within this distance of 1 count as ties and decide 0.
pub const TIE_TOL: f64 = 1e-10;

/// Likelihood ratio attached to one outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodRecord {
    pub outcome: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct FcMeasurement {
    /// Eigenvectors of ρ0 # ρ1⁻¹ (columns), eigenvalues descending.
    pub basis: EigenSystem,
    pub lambdas: Vec<f64>,
    pub pi0: HermitianOperator,
    pub pi1: HermitianOperator,
    /// Mixing weight applied to both states before the construction.
    pub delta: f64,
}

impl FcMeasurement {
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// Outcome y decides 0 when λ_y ≥ 1.
    pub fn decides_zero(&self, y: usize) -> bool {
        self.lambdas[y] >= 1.0 - TIE_TOL
    }

    pub fn records(&self) -> Vec<LikelihoodRecord> {
        self.lambdas.iter().enumerate().map(|(outcome, &lambda)| LikelihoodRecord { outcome, lambda }).collect()
    }

    /// One rank-one element per eigenvector.
    pub fn povm(&self) -> Result<Povm> {
        Povm::from_basis(&self.basis.vectors)
    }

    /// ⟨y|ρ|y⟩ for every basis vector.
    pub fn diagonal_of(&self, rho: &DensityOperator) -> Vec<f64> {
        (0..self.dim()).map(|y| rho.matrix().expectation(&self.basis.vector(y)).max(0.0)).collect()
    }

    /// The classical channel p(y|x) = ⟨y|ρ_x|y⟩ of the original states.
    pub fn induced(&self, w: &CqChannel) -> Result<ClassicalChannel> {
        let p0 = self.diagonal_of(w.rho0());
        let p1 = self.diagonal_of(w.rho1());
        ClassicalChannel::new(p0.into_iter().zip(p1).map(|(a, b)| [a, b]).collect())
    }

    /// Tolerance for comparisons against the fidelity.
    pub fn tolerance(&self) -> f64 {
        fc_tolerance(self.delta, self.dim())
    }
}

/// max(1e-7, 10·δ·d)
pub fn fc_tolerance(delta: f64, dim: usize) -> f64 {
    1e-7f64.max(10.0 * delta * dim as f64)
}

pub fn fc_measurement(w: &CqChannel) -> Result<FcMeasurement> {
    fc_measurement_with(w, Regularization::Auto)
}

pub fn fc_measurement_with(w: &CqChannel, reg: Regularization) -> Result<FcMeasurement> {
    fc_measurement_states(w.rho0(), w.rho1(), reg)
}

pub fn fc_measurement_states(rho0: &DensityOperator, rho1: &DensityOperator, reg: Regularization) -> Result<FcMeasurement> {
    let (g, delta) = geometric_mean_ratio_with(rho0, rho1, reg)?;
    let basis = eig_herm(&g)?;
    let lambdas: Vec<f64> = basis.values.iter().map(|l| l.max(0.0)).collect();
    let pi0 = HermitianOperator::from_constructed(basis.spectral_sum(|_, l| (l >= 1.0 - TIE_TOL).then_some(1.0)));
    let pi1 = pi0.complement();
    Ok(FcMeasurement { basis, lambdas, pi0, pi1, delta })
}

/// ½(Tr{Π₀ρ1} + Tr{Π₁ρ0}) for the Fuchs-Caves decision.
pub fn fc_error_prob(w: &CqChannel) -> Result<f64> {
    let m = fc_measurement(w)?;
    Ok(crate::channel::two_outcome_error(w, &m.pi0))
}

/// Per-eigenvector terms of the single-use error bound: (error mass, overlap
/// √(⟨y|ρ0|y⟩⟨y|ρ1|y⟩)). The error mass is ⟨y|ρ1|y⟩ when y decides 0 and
/// ⟨y|ρ0|y⟩ otherwise; 2p_e is the sum of the first column.
pub fn fc_error_terms(w: &CqChannel, m: &FcMeasurement) -> Vec<(f64, f64)> {
    let p0 = m.diagonal_of(w.rho0());
    let p1 = m.diagonal_of(w.rho1());
    (0..m.dim())
        .map(|y| {
            let err = if m.decides_zero(y) { p1[y] } else { p0[y] };
            (err, (p0[y] * p1[y]).sqrt())
        })
        .collect()
}

fn check_guard(d: usize, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("number of copies must be at least 1".into()));
    }
    if n as f64 * (d as f64).log2() > ENUMERATION_LOG2_LIMIT {
        return Err(Error::GuardExceeded {
            what: format!("enumeration of {d}^{n} outcome tuples"),
            limit: 1 << ENUMERATION_LOG2_LIMIT as u32,
        });
    }
    Ok(())
}

/// Digits of `index` in base `d`, most significant first (system 1 first).
pub fn tuple_digits(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = index % d;
        index /= d;
    }
    out
}

/// Decision table and error probability of the product Fuchs-Caves test
/// between ρ0^{⊗N} and ρ1^{⊗N}.
#[derive(Debug, Clone)]
pub struct ProductTest {
    /// Indexed by outcome tuple (system 1 most significant); true decides 0.
    pub decide_zero: Vec<bool>,
    pub error: f64,
    pub measurement: FcMeasurement,
}

/// Decide ρ0^{⊗N} iff λ_{y1}⋯λ_{yN} ≥ 1, with the product formed in the log
/// domain.
pub fn fc_product_test(rho0: &DensityOperator, rho1: &DensityOperator, n: usize) -> Result<ProductTest> {
    let d = rho0.dim();
    check_guard(d, n)?;
    let m = fc_measurement_states(rho0, rho1, Regularization::Auto)?;
    let logs: Vec<f64> = m.lambdas.iter().map(|l| l.ln()).collect();
    let p0 = m.diagonal_of(rho0);
    let p1 = m.diagonal_of(rho1);
    let total = d.pow(n as u32);
    let mut decide_zero = Vec::with_capacity(total);
    let mut error = 0.0;
    for t in 0..total {
        let digits = tuple_digits(t, d, n);
        let ll: f64 = digits.iter().map(|&y| logs[y]).sum();
        let zero = ll >= -TIE_TOL || ll.is_nan();
        let (q0, q1) = digits.iter().fold((1.0, 1.0), |(a, b), &y| (a * p0[y], b * p1[y]));
        error += if zero { q1 } else { q0 };
        decide_zero.push(zero);
    }
    Ok(ProductTest { decide_zero, error: 0.5 * error, measurement: m })
}

/// Σ |y₁…y_N⟩⟨y₁…y_N| over outcome tuples accepted by `predicate`, which
/// receives the tuple and Σ ln λ.
pub fn fc_decision_projectors(
    rho0: &DensityOperator,
    rho1: &DensityOperator,
    n: usize,
    predicate: impl Fn(&[usize], f64) -> bool,
) -> Result<HermitianOperator> {
    let d = rho0.dim();
    check_guard(d, n)?;
    let m = fc_measurement_states(rho0, rho1, Regularization::Auto)?;
    let logs: Vec<f64> = m.lambdas.iter().map(|l| l.ln()).collect();
    let total = d.pow(n as u32);
    let mask: Vec<bool> = (0..total)
        .map(|t| {
            let digits = tuple_digits(t, d, n);
            let ll = digits.iter().map(|&y| logs[y]).sum();
            predicate(&digits, ll)
        })
        .collect();
    Ok(product_basis_projector(&m.basis.vectors, n, &mask))
}

/// V diag(mask) V† with V = U^{⊗n}.
pub fn product_basis_projector(u: &CMat, n: usize, mask: &[bool]) -> HermitianOperator {
    let v = CMat::kron_all(std::iter::repeat(u).take(n));
    let dim = v.dim();
    let mut vm = CMat::zeros(dim);
    for r in 0..dim {
        for (c, &keep) in mask.iter().enumerate() {
            if keep {
                vm[(r, c)] = v[(r, c)];
            }
        }
    }
    HermitianOperator::from_constructed(vm.matmul(&v.adjoint()))
}

/// Lifts a single-system operator to system `k` of `n`.
pub fn lift(op: &HermitianOperator, k: usize, n: usize) -> HermitianOperator {
    let d = op.dim();
    let id = HermitianOperator::identity(d);
    let mut acc = HermitianOperator::identity(1);
    for j in 0..n {
        acc = acc.kron(if j == k { op } else { &id });
    }
    acc
}
