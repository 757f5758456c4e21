//! Binary-input classical-quantum channels, measurements and the classical
//! channels they induce.

use crate::error::{Error, Result};
use crate::linalg::{
    eig_herm, eigvals_herm, cholesky_fidelity, pos_projector, von_neumann_entropy, CMat, DensityOperator,
    HermitianOperator, C64, TOL,
};
use std::f64::consts::{LN_2, PI};

/// x ↦ ρ_x for x ∈ {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct CqChannel {
    rho0: DensityOperator,
    rho1: DensityOperator,
}

impl CqChannel {
    pub fn new(rho0: DensityOperator, rho1: DensityOperator) -> Result<Self> {
        if rho0.dim() != rho1.dim() {
            return Err(Error::DimensionMismatch { expected: rho0.dim(), found: rho1.dim() });
        }
        Ok(CqChannel { rho0, rho1 })
    }

    /// Channel with pure outputs |a⟩, |b⟩ (normalized internally).
    pub fn pure_pair(a: &[C64], b: &[C64]) -> Result<Self> {
        Self::new(DensityOperator::pure(a), DensityOperator::pure(b))
    }

    /// Classical channel embedded on the diagonal: ρ_x = Σ_y p(y|x)|y⟩⟨y|.
    pub fn diagonal(c: &ClassicalChannel) -> Result<Self> {
        let p0: Vec<f64> = c.p.iter().map(|r| r[0]).collect();
        let p1: Vec<f64> = c.p.iter().map(|r| r[1]).collect();
        Self::new(DensityOperator::diag(&p0)?, DensityOperator::diag(&p1)?)
    }

    pub fn rho(&self, x: u8) -> &DensityOperator {
        if x == 0 {
            &self.rho0
        } else {
            &self.rho1
        }
    }

    pub fn rho0(&self) -> &DensityOperator {
        &self.rho0
    }

    pub fn rho1(&self) -> &DensityOperator {
        &self.rho1
    }

    pub fn dim(&self) -> usize {
        self.rho0.dim()
    }

    /// (ρ0 + ρ1)/2
    pub fn average(&self) -> DensityOperator {
        DensityOperator::average(&[&self.rho0, &self.rho1])
    }

    /// ρ0 − ρ1
    pub fn difference(&self) -> HermitianOperator {
        self.rho0.op().sub(self.rho1.op())
    }

    /// Both outputs mixed with δ of the maximally mixed state.
    pub fn mixed(&self, delta: f64) -> CqChannel {
        CqChannel { rho0: self.rho0.mix_with_identity(delta), rho1: self.rho1.mix_with_identity(delta) }
    }

    /// Inputs swapped.
    pub fn swapped(&self) -> CqChannel {
        CqChannel { rho0: self.rho1.clone(), rho1: self.rho0.clone() }
    }

    /// True when both outputs have full rank.
    pub fn is_faithful(&self) -> Result<bool> {
        Ok(self.rho0.min_eigenvalue()? > TOL.zero && self.rho1.min_eigenvalue()? > TOL.zero)
    }
}

/// Finite list of positive operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<HermitianOperator>,
}

impl Povm {
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidPovm { reason: "no elements".into() });
        };
        let n = first.dim();
        let mut sum = CMat::zeros(n);
        for (k, e) in elements.iter().enumerate() {
            if e.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: e.dim() });
            }
            let min = eigvals_herm(e)?.last().copied().unwrap_or(0.0);
            if min < TOL.povm_min_eig {
                return Err(Error::InvalidPovm { reason: format!("element {k} has eigenvalue {min:.3e}") });
            }
            sum.add_scaled(e.matrix(), 1.0);
        }
        let dev = sum.max_abs_diff(&CMat::identity(n));
        if dev > TOL.povm_sum {
            return Err(Error::InvalidPovm { reason: format!("elements sum to identity only within {dev:.3e}") });
        }
        Ok(Povm { elements })
    }

    /// Measurement in the orthonormal basis given by the columns of `u`.
    pub fn from_basis(u: &CMat) -> Result<Self> {
        let n = u.dim();
        let elements = (0..n)
            .map(|k| HermitianOperator::projector_onto(&(0..n).map(|r| u[(r, k)]).collect::<Vec<_>>()))
            .collect();
        Self::new(elements)
    }

    pub fn computational_basis(n: usize) -> Self {
        Povm { elements: (0..n).map(|k| {
            let mut d = vec![0.0; n];
            d[k] = 1.0;
            HermitianOperator::diag(&d)
        }).collect() }
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }
}

/// p(y|x) stored as rows [p(y|0), p(y|1)].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalChannel {
    pub p: Vec<[f64; 2]>,
}

impl ClassicalChannel {
    /// Validates column sums and clamps tiny negative entries to zero.
    pub fn new(mut p: Vec<[f64; 2]>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidClassicalChannel { reason: "empty output alphabet".into() });
        }
        for (y, row) in p.iter_mut().enumerate() {
            for v in row.iter_mut() {
                if !v.is_finite() || *v < -TOL.channel_neg {
                    return Err(Error::InvalidClassicalChannel { reason: format!("p({y}|x) = {v}") });
                }
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        for x in 0..2 {
            let s: f64 = p.iter().map(|r| r[x]).sum();
            if (s - 1.0).abs() > TOL.channel_sum {
                return Err(Error::InvalidClassicalChannel { reason: format!("column {x} sums to {s:.12}") });
            }
        }
        Ok(ClassicalChannel { p })
    }

    pub fn bsc(p: f64) -> Result<Self> {
        Self::new(vec![[1.0 - p, p], [p, 1.0 - p]])
    }

    /// Outputs 0, 1, erasure.
    pub fn bec(eps: f64) -> Result<Self> {
        Self::new(vec![[1.0 - eps, 0.0], [0.0, 1.0 - eps], [eps, eps]])
    }

    pub fn outputs(&self) -> usize {
        self.p.len()
    }

    pub fn prob(&self, y: usize, x: u8) -> f64 {
        self.p[y][x as usize]
    }
}

/// h(x) = −x log₂ x with 0 log 0 = 0.
fn plogp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln() / LN_2
    }
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// Symmetric Holevo information in bits.
pub fn holevo_information(w: &CqChannel) -> Result<f64> {
    let avg = von_neumann_entropy(&w.average())?;
    Ok(avg - 0.5 * (von_neumann_entropy(&w.rho0)? + von_neumann_entropy(&w.rho1)?))
}

/// F(ρ0, ρ1), through Cholesky factors of both states.
pub fn quantum_fidelity(w: &CqChannel) -> Result<f64> {
    cholesky_fidelity(&w.rho0, &w.rho1)
}

/// p(y|x) = Tr{Λ_y ρ_x}.
pub fn induce_classical(w: &CqChannel, povm: &Povm) -> Result<ClassicalChannel> {
    if povm.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), found: povm.dim() });
    }
    let p = povm.elements.iter().map(|e| [e.trace_with(w.rho0.op()), e.trace_with(w.rho1.op())]).collect();
    ClassicalChannel::new(p)
}

/// I(X;Y) in bits for uniform X.
pub fn mutual_information(c: &ClassicalChannel) -> f64 {
    let mut i = 0.0;
    for row in &c.p {
        let q = 0.5 * (row[0] + row[1]);
        for &p in row {
            if p > 0.0 {
                i += 0.5 * p * (p / q).ln();
            }
        }
    }
    i / LN_2
}

/// Z = Σ_y √(p(y|0) p(y|1)).
pub fn bhattacharyya(c: &ClassicalChannel) -> f64 {
    c.p.iter().map(|r| (r[0] * r[1]).sqrt()).sum()
}

/// {ρ0 − ρ1 ≥ 0} and its complement.
pub fn helstrom_povm(w: &CqChannel) -> Result<Povm> {
    let pi0 = pos_projector(&w.difference())?;
    let pi1 = pi0.complement();
    Ok(Povm { elements: vec![pi0, pi1] })
}

/// Error probability ½(Tr{Π₀ρ1} + Tr{Π₁ρ0}) of a two-outcome measurement.
pub fn two_outcome_error(w: &CqChannel, pi0: &HermitianOperator) -> f64 {
    let e0 = pi0.trace_with(w.rho1.op());
    let e1 = 1.0 - pi0.trace_with(w.rho0.op());
    0.5 * (e0 + e1)
}

/// Best mutual information over rank-one projective qubit measurements.
#[derive(Debug, Clone)]
pub struct AccessibleInformation {
    pub value: f64,
    pub povm: Povm,
    /// Bloch angles (θ, φ) of the first measurement vector.
    pub angles: (f64, f64),
}

fn bloch_povm(theta: f64, phi: f64) -> Povm {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = C64::from_polar(1.0, phi);
    let v0 = [C64::new(c, 0.0), e * s];
    let v1 = [-e.conj() * s, C64::new(c, 0.0)];
    Povm { elements: vec![HermitianOperator::projector_onto(&v0), HermitianOperator::projector_onto(&v1)] }
}

fn bloch_angles_of(v: &[C64]) -> (f64, f64) {
    let nrm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let theta = 2.0 * (v[1].norm() / nrm).clamp(0.0, 1.0).asin();
    let phi = if v[0].norm() > 0.0 { (v[1] / v[0]).arg() } else { v[1].arg() };
    (theta, phi.rem_euclid(2.0 * PI))
}

/// Maximizes I(W, Λ) over an `n_grid` × `n_grid` grid of Bloch angles,
/// followed by three rounds of golden-section refinement. The Helstrom and
/// Fuchs-Caves bases are included as starting candidates.
pub fn accessible_information_qubit(w: &CqChannel, n_grid: usize) -> Result<AccessibleInformation> {
    if w.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: w.dim() });
    }
    let n_grid = n_grid.max(2);
    let eval = |theta: f64, phi: f64| -> f64 {
        let povm = bloch_povm(theta, phi);
        let p = povm.elements.iter().map(|e| [e.trace_with(w.rho0.op()), e.trace_with(w.rho1.op())]).collect();
        mutual_information(&ClassicalChannel { p: clamp_rows(p) })
    };

    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for a in 0..n_grid {
        let theta = PI * a as f64 / (n_grid - 1) as f64;
        for b in 0..n_grid {
            let phi = 2.0 * PI * b as f64 / n_grid as f64;
            let v = eval(theta, phi);
            if v > best.0 {
                best = (v, theta, phi);
            }
        }
    }
    let mut candidates = Vec::new();
    let hel = eig_herm(&w.difference())?;
    candidates.push(bloch_angles_of(&hel.vector(0)));
    let fc = crate::fuchs_caves::fc_measurement(w)?;
    candidates.push(bloch_angles_of(&fc.basis.vector(0)));
    for (theta, phi) in candidates {
        let v = eval(theta, phi);
        if v > best.0 {
            best = (v, theta, phi);
        }
    }

    let (mut ht, mut hp) = (PI / (n_grid - 1) as f64, 2.0 * PI / n_grid as f64);
    for _ in 0..3 {
        let (_, t0, p0) = best;
        let t = golden_max(|t| eval(t, p0), t0 - ht, t0 + ht, 60);
        let p = golden_max(|p| eval(t, p), p0 - hp, p0 + hp, 60);
        let v = eval(t, p);
        if v > best.0 {
            best = (v, t, p);
        }
        ht /= 4.0;
        hp /= 4.0;
    }
    let (value, theta, phi) = best;
    Ok(AccessibleInformation { value, povm: bloch_povm(theta, phi), angles: (theta, phi.rem_euclid(2.0 * PI)) })
}

fn clamp_rows(p: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    p.into_iter().map(|r| [r[0].max(0.0), r[1].max(0.0)]).collect()
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        c
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ket(a: f64, b: f64) -> Vec<C64> {
        vec![C64::new(a, 0.0), C64::new(b, 0.0)]
    }

    fn zero_plus() -> CqChannel {
        CqChannel::pure_pair(&ket(1.0, 0.0), &ket(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).unwrap()
    }

    fn orthogonal() -> CqChannel {
        CqChannel::pure_pair(&ket(1.0, 0.0), &ket(0.0, 1.0)).unwrap()
    }

    #[test]
    fn holevo_examples() {
        let same = CqChannel::new(DensityOperator::diag(&[0.3, 0.7]).unwrap(), DensityOperator::diag(&[0.3, 0.7]).unwrap()).unwrap();
        assert!(holevo_information(&same).unwrap().abs() < 1e-12);
        assert!((holevo_information(&orthogonal()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn induced_channel_examples() {
        let w = zero_plus();
        let trivial = Povm::new(vec![HermitianOperator::identity(2)]).unwrap();
        let c = induce_classical(&w, &trivial).unwrap();
        assert_eq!(c.outputs(), 1);
        assert!((c.p[0][0] - 1.0).abs() < 1e-12 && (c.p[0][1] - 1.0).abs() < 1e-12);

        let w = CqChannel::new(DensityOperator::diag(&[0.2, 0.8]).unwrap(), DensityOperator::diag(&[0.6, 0.4]).unwrap()).unwrap();
        let c = induce_classical(&w, &Povm::computational_basis(2)).unwrap();
        assert_eq!(c.p, vec![[0.2, 0.6], [0.8, 0.4]]);

        let c = induce_classical(&orthogonal(), &helstrom_povm(&orthogonal()).unwrap()).unwrap();
        assert!((c.p[0][0] - 1.0).abs() < 1e-12 && c.p[0][1].abs() < 1e-12);
        assert!((c.p[1][1] - 1.0).abs() < 1e-12 && c.p[1][0].abs() < 1e-12);
    }

    #[test]
    fn classical_quantities() {
        let id = ClassicalChannel::new(vec![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((mutual_information(&id) - 1.0).abs() < 1e-15);
        assert_eq!(bhattacharyya(&id), 0.0);
        let useless = ClassicalChannel::new(vec![[0.4, 0.4], [0.6, 0.6]]).unwrap();
        assert!(mutual_information(&useless).abs() < 1e-15);
        assert!((bhattacharyya(&useless) - 1.0).abs() < 1e-15);
        let bsc = ClassicalChannel::bsc(0.11).unwrap();
        // 1 − h2(0.11) and 2√(0.11·0.89)
        let h = -(0.11f64 * 0.11f64.log2() + 0.89 * 0.89f64.log2());
        assert!((mutual_information(&bsc) - (1.0 - h)).abs() < 1e-12);
        assert!((mutual_information(&bsc) - 0.500084).abs() < 1e-6);
        assert!((bhattacharyya(&bsc) - 0.62578).abs() < 1e-5);
    }

    #[test]
    fn classical_channel_validation() {
        assert!(ClassicalChannel::new(vec![[0.5, 0.5], [0.6, 0.5]]).is_err());
        let c = ClassicalChannel::new(vec![[1.0 + 1e-13, 1.0], [-1e-13, 0.0]]).unwrap();
        assert_eq!(c.p[1][0], 0.0);
        assert!(ClassicalChannel::new(vec![[1.0, 1.0], [-1e-6, 0.0]]).is_err());
    }

    #[test]
    fn helstrom_examples() {
        let same = CqChannel::new(DensityOperator::maximally_mixed(2), DensityOperator::maximally_mixed(2)).unwrap();
        let h = helstrom_povm(&same).unwrap();
        assert!(h.elements()[0].max_abs_diff(&HermitianOperator::identity(2)) < 1e-12);
        assert!(h.elements()[1].max_abs_diff(&HermitianOperator::zeros(2)) < 1e-12);

        let w = zero_plus();
        let h = helstrom_povm(&w).unwrap();
        let pe = two_outcome_error(&w, &h.elements()[0]);
        // ρ0 − ρ1 for |0⟩, |+⟩ has eigenvalues ±1/√2
        let oracle = 0.5 * (1.0 - 0.5 * 2.0 * FRAC_1_SQRT_2);
        assert!((pe - oracle).abs() < 1e-12);
    }

    #[test]
    fn accessible_information_trivial_cases() {
        let a = accessible_information_qubit(&orthogonal(), 16).unwrap();
        assert!((a.value - 1.0).abs() < 1e-9);
        let same = CqChannel::new(DensityOperator::diag(&[0.3, 0.7]).unwrap(), DensityOperator::diag(&[0.3, 0.7]).unwrap()).unwrap();
        assert!(accessible_information_qubit(&same, 16).unwrap().value.abs() < 1e-12);
        let qutrit = CqChannel::new(DensityOperator::maximally_mixed(3), DensityOperator::maximally_mixed(3)).unwrap();
        assert_eq!(accessible_information_qubit(&qutrit, 8).unwrap_err(), Error::UnsupportedDimension { dim: 3 });
    }
}
