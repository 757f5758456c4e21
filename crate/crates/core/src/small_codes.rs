//! Explicit successive-cancellation Helstrom tests for two-, four- and
//! eight-bit codes, checked against their factorized forms, against the
//! synthesized-channel projectors, and against Fuchs-Caves product
//! approximations.

use crate::channel::{helstrom_povm, quantum_fidelity, CqChannel};
use crate::decoder::ScDecoder;
use crate::error::{Error, Result};
use crate::fuchs_caves::{fc_measurement, product_basis_projector, tuple_digits, TIE_TOL};
use crate::linalg::{eig_herm, pos_projector, CMat, HermitianOperator, ONE, TOL, ZERO};
use crate::polar::bits_of;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Eigenvalues at or below this (in magnitude) mark a difference as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Max-entry tolerance for projector identities.
pub const IDENTITY_TOL: f64 = 1e-7;

/// Idempotency tolerance for every constructed projector.
pub const PROJECTOR_TOL: f64 = 1e-8;

/// Slack on Δ = p_e(FC) − p_e(Helstrom) ≥ 0.
pub const EXCESS_TOL: f64 = 1e-9;

/// Prefixes sampled per index at N = 8 for i ≥ 5.
pub const SAMPLED_PREFIXES: usize = 16;

// x_j = Σ_{k ∈ row j} u_k
const GEN2: [&[usize]; 2] = [&[1, 2], &[2]];
const GEN4: [&[usize]; 4] = [&[1, 2, 3, 4], &[3, 4], &[2, 4], &[4]];
const GEN8: [&[usize]; 8] = [
    &[1, 2, 3, 4, 5, 6, 7, 8],
    &[5, 6, 7, 8],
    &[3, 4, 7, 8],
    &[7, 8],
    &[2, 4, 6, 8],
    &[6, 8],
    &[4, 8],
    &[8],
];

fn generator(n: usize) -> Result<&'static [&'static [usize]]> {
    match n {
        2 => Ok(&GEN2),
        4 => Ok(&GEN4),
        8 => Ok(&GEN8),
        _ => Err(Error::Domain(format!("explicit tests exist for N ∈ {{2, 4, 8}}, not {n}"))),
    }
}

fn codeword(gen: &[&[usize]], u: &[u8]) -> Vec<u8> {
    gen.iter().map(|row| row.iter().fold(0, |a, &k| a ^ u[k - 1])).collect()
}

/// (bit index, blocklength, prefix bits)
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestLabel {
    pub n: usize,
    pub index: usize,
    pub prefix: Vec<u8>,
}

impl fmt::Display for TestLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}@{}", self.index, self.n)?;
        if !self.prefix.is_empty() {
            let p: String = self.prefix.iter().map(|b| char::from(b'0' + b)).collect();
            write!(f, "[{p}]")?;
        }
        Ok(())
    }
}

/// What the `factored` projector of a [`TestPair`] is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    /// Parity of independent tests on disjoint output blocks.
    Parity,
    /// Regrouped state difference; no product decomposition known.
    BlockForm,
    /// No second construction.
    DirectOnly,
}

/// Outcome-parity approximation built from single-output Fuchs-Caves
/// measurements.
#[derive(Debug, Clone)]
pub struct FcApproximation {
    pub projector: HermitianOperator,
    /// Output-block sizes whose likelihood decisions are combined by parity.
    pub groups: Vec<usize>,
    pub error: f64,
    pub helstrom_error: f64,
    /// error − helstrom_error
    pub excess: f64,
    /// ½F^N when the two hypotheses are product states.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TestPair {
    pub label: TestLabel,
    pub form: Form,
    pub note: &'static str,
    /// {σ̄0 − σ̄1 ≥ 0} from the generator matrix.
    pub direct: HermitianOperator,
    pub factored: Option<HermitianOperator>,
    /// Max entry of Q(direct − factored)Q, Q the nondegenerate subspace.
    pub residual: Option<f64>,
    pub degenerate: bool,
    /// Smallest |λ| among the difference and its building blocks.
    pub min_abs_eigenvalue: f64,
    /// σ̄0 − σ̄1 for unit-trace hypothesis states.
    pub difference: HermitianOperator,
    pub fc: Option<FcApproximation>,
    support: HermitianOperator,
}

impl TestPair {
    /// ½(1 − Tr{Π(σ̄0 − σ̄1)})
    pub fn error_of(&self, pi0: &HermitianOperator) -> f64 {
        0.5 * (1.0 - pi0.trace_with(&self.difference))
    }

    pub fn helstrom_error(&self) -> f64 {
        self.error_of(&self.direct)
    }

    /// Projector onto eigenvectors of the difference with |λ| above the
    /// degeneracy floor.
    pub fn support(&self) -> &HermitianOperator {
        &self.support
    }

    /// Max entry of Q(direct − p)Q.
    pub fn restricted_distance(&self, p: &HermitianOperator) -> f64 {
        restricted(&self.support, &self.direct, p)
    }

    /// Largest ‖P² − P‖ over the projectors carried by this pair.
    pub fn idempotency(&self) -> f64 {
        let mut r = self.direct.idempotency_residual();
        if let Some(f) = &self.factored {
            r = r.max(f.idempotency_residual());
        }
        if let Some(fc) = &self.fc {
            r = r.max(fc.projector.idempotency_residual());
        }
        r
    }
}

fn restricted(q: &HermitianOperator, a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    let mut d = a.matrix().clone();
    d.add_scaled(b.matrix(), -1.0);
    q.matrix().matmul(&d).matmul(q.matrix()).max_abs()
}

fn states(w: &CqChannel, x: &[u8]) -> CMat {
    CMat::kron_all(x.iter().map(|&b| w.rho(b).matrix()))
}

/// Σ over t ∈ {0,1}^k of ⊗ρ_{f(t)}.
fn state_sum(w: &CqChannel, k: usize, f: impl Fn(&[u8]) -> Vec<u8>) -> CMat {
    let mut acc: Option<CMat> = None;
    for t in 0..1usize << k {
        let m = states(w, &f(&bits_of(t, k)));
        match acc.as_mut() {
            Some(a) => a.add_scaled(&m, 1.0),
            None => acc = Some(m),
        }
    }
    acc.expect("at least one term")
}

fn minus(a: &CMat, b: &CMat) -> CMat {
    let mut d = a.clone();
    d.add_scaled(b, -1.0);
    d
}

/// ⊗ρ_{x} − ⊗ρ_{x⊕1}
fn flip_difference(w: &CqChannel, x: &[u8]) -> CMat {
    let y: Vec<u8> = x.iter().map(|b| b ^ 1).collect();
    minus(&states(w, x), &states(w, &y))
}

/// (Σ_v ρ_{a+v}⊗ρ_v)⊗(Σ_t ρ_t⊗ρ_t) − (Σ_v ρ_{a+1+v}⊗ρ_v)⊗(Σ_t ρ_{1+t}⊗ρ_t)
fn two_block(w: &CqChannel, a: u8) -> CMat {
    let half = |b: u8| {
        let l = state_sum(w, 1, |v| vec![a ^ b ^ v[0], v[0]]);
        let r = state_sum(w, 1, |t| vec![b ^ t[0], t[0]]);
        l.kron(&r)
    };
    minus(&half(0), &half(1))
}

/// Σ_suffix ⊗ρ_{x(prefix, 0, suffix)} − ⊗ρ_{x(prefix, 1, suffix)}
fn defining_difference(w: &CqChannel, gen: &[&[usize]], i: usize, prefix: &[u8]) -> CMat {
    let n = gen.len();
    let free = n - i;
    let term = |ui: u8| {
        state_sum(w, free, |s| {
            let mut u = prefix.to_vec();
            u.push(ui);
            u.extend_from_slice(s);
            codeword(gen, &u)
        })
    };
    minus(&term(0), &term(1))
}

enum Second {
    Parity(Vec<CMat>),
    Block(CMat),
    None,
}

fn plus_projector(m: &CMat) -> Result<(CMat, f64)> {
    let es = eig_herm(&HermitianOperator::from_constructed(m.clone()))?;
    let min_abs = es.values.iter().fold(f64::INFINITY, |a, l| a.min(l.abs()));
    Ok((es.spectral_sum(|_, l| (l >= -TOL.zero).then_some(1.0)), min_abs))
}

/// Σ over sign patterns with an even number of negative outcomes of
/// ⊗_k P_{±}(D_k). Also returns the smallest |λ| over all blocks.
pub fn parity_projector(blocks: &[CMat]) -> Result<(HermitianOperator, f64)> {
    let mut even = CMat::identity(1);
    let mut odd = CMat::zeros(1);
    let mut min_abs = f64::INFINITY;
    for b in blocks {
        let (plus, m) = plus_projector(b)?;
        min_abs = min_abs.min(m);
        let neg = minus(&CMat::identity(b.dim()), &plus);
        let mut e = even.kron(&plus);
        e.add_scaled(&odd.kron(&neg), 1.0);
        let mut o = even.kron(&neg);
        o.add_scaled(&odd.kron(&plus), 1.0);
        even = e;
        odd = o;
    }
    Ok((HermitianOperator::from_constructed(even), min_abs))
}

/// Product Fuchs-Caves approximation: each group of consecutive outputs
/// decides between ⊗ρ_{x} and ⊗ρ_{x⊕1} by likelihood on the induced
/// channel (ties decide 0), and the test outcome is the parity of the group
/// outcomes.
pub fn fc_parity_projector(w: &CqChannel, groups: &[Vec<u8>]) -> Result<HermitianOperator> {
    let n: usize = groups.iter().map(Vec::len).sum();
    let d = w.dim();
    let m = fc_measurement(w)?;
    let c = m.induced(w)?;
    let logp: Vec<[f64; 2]> = (0..d).map(|y| [c.prob(y, 0).ln(), c.prob(y, 1).ln()]).collect();
    let mask: Vec<bool> = (0..d.pow(n as u32))
        .map(|t| {
            let ys = tuple_digits(t, d, n);
            let mut odd = false;
            let mut at = 0;
            for g in groups {
                let ll: f64 = g
                    .iter()
                    .zip(&ys[at..at + g.len()])
                    .map(|(&x, &y)| logp[y][x as usize] - logp[y][(x ^ 1) as usize])
                    .sum();
                at += g.len();
                odd ^= !(ll >= -TIE_TOL || ll.is_nan());
            }
            !odd
        })
        .collect();
    Ok(product_basis_projector(&m.basis.vectors, n, &mask))
}

fn assemble(
    w: &CqChannel,
    n: usize,
    i: usize,
    prefix: &[u8],
    form: Form,
    note: &'static str,
    second: Second,
    fc_groups: Option<Vec<Vec<u8>>>,
) -> Result<TestPair> {
    let gen = generator(n)?;
    if i == 0 || i > n || prefix.len() != i - 1 || prefix.iter().any(|&b| b > 1) {
        return Err(Error::Domain(format!("no test u{i}@{n} for prefix {prefix:?}")));
    }
    let weight = 0.5f64.powi((n - i) as i32);
    let floor = DEGENERACY_TOL.max(10.0 * TOL.zero / weight);
    let disp = defining_difference(w, gen, i, prefix);
    let es = eig_herm(&HermitianOperator::from_constructed(disp.clone()))?;
    let direct = HermitianOperator::from_constructed(es.spectral_sum(|_, l| (l >= -TOL.zero).then_some(1.0)));
    let support = HermitianOperator::from_constructed(es.spectral_sum(|_, l| (l.abs() > floor).then_some(1.0)));
    let mut min_abs = es.values.iter().fold(f64::INFINITY, |a, l| a.min(l.abs()));
    let mut degenerate = min_abs <= floor;
    let factored = match second {
        Second::Parity(blocks) => {
            let (p, m) = parity_projector(&blocks)?;
            degenerate |= m <= DEGENERACY_TOL;
            min_abs = min_abs.min(m);
            Some(p)
        }
        Second::Block(m) => Some(pos_projector(&HermitianOperator::from_constructed(m))?),
        Second::None => None,
    };
    let residual = factored.as_ref().map(|f| restricted(&support, &direct, f));
    let difference = HermitianOperator::from_constructed(disp.scale(weight));
    let mut pair = TestPair {
        label: TestLabel { n, index: i, prefix: prefix.to_vec() },
        form,
        note,
        direct,
        factored,
        residual,
        degenerate,
        min_abs_eigenvalue: min_abs,
        difference,
        fc: None,
        support,
    };
    if let Some(groups) = fc_groups {
        let projector = fc_parity_projector(w, &groups)?;
        let error = pair.error_of(&projector);
        let helstrom_error = pair.helstrom_error();
        let bound = if groups.len() == 1 { Some(0.5 * quantum_fidelity(w)?.powi(n as i32)) } else { None };
        pair.fc = Some(FcApproximation {
            projector,
            groups: groups.iter().map(Vec::len).collect(),
            error,
            helstrom_error,
            excess: error - helstrom_error,
            bound,
        });
    }
    Ok(pair)
}

fn rho_diff(w: &CqChannel) -> CMat {
    w.difference().into_matrix()
}

/// u₁ of the two-bit code against {(ρ0−ρ1)⊗(ρ0−ρ1) ≥ 0}.
pub fn two_bit_u1(w: &CqChannel) -> Result<TestPair> {
    let d = rho_diff(w);
    assemble(w, 2, 1, &[], Form::Parity, "parity of two single-output Helstrom tests", Second::Parity(vec![d.clone(), d]), None)
}

/// u₂ of the two-bit code given u₁, with its product Fuchs-Caves approximation.
pub fn two_bit_u2(w: &CqChannel, u1: u8) -> Result<TestPair> {
    assemble(w, 2, 2, &[u1], Form::DirectOnly, "product hypotheses", Second::None, Some(vec![vec![u1, 0]]))
}

/// Test for u_i of the four-bit code given u₁^{i−1} = `prefix`.
pub fn four_bit_test(w: &CqChannel, i: usize, prefix: &[u8]) -> Result<TestPair> {
    if prefix.len() + 1 != i {
        return Err(Error::Domain(format!("u{i}@4 needs {} prefix bits, got {}", i.saturating_sub(1), prefix.len())));
    }
    let u = |k: usize| prefix[k - 1];
    match i {
        1 => {
            let d = rho_diff(w);
            assemble(w, 4, 1, prefix, Form::Parity, "parity of four single-output Helstrom tests", Second::Parity(vec![d; 4]), None)
        }
        2 => assemble(w, 4, 2, prefix, Form::BlockForm, "no known factorization", Second::Block(two_block(w, u(1))), None),
        3 => {
            let blocks = vec![flip_difference(w, &[u(1) ^ u(2), 0]), flip_difference(w, &[u(2), 0])];
            assemble(w, 4, 3, prefix, Form::Parity, "parity of two pair tests", Second::Parity(blocks), None)
        }
        4 => {
            let x = vec![u(1) ^ u(2) ^ u(3), u(3), u(2), 0];
            assemble(w, 4, 4, prefix, Form::DirectOnly, "product hypotheses", Second::None, Some(vec![x]))
        }
        _ => Err(Error::Domain(format!("no bit u{i} in a four-bit code"))),
    }
}

/// All four tests, using the leading bits of `prefix` for each.
pub fn four_bit_tests(w: &CqChannel, prefix: &[u8; 3]) -> Result<Vec<TestPair>> {
    (1..=4).map(|i| four_bit_test(w, i, &prefix[..i - 1])).collect()
}

/// Test for u_i of the eight-bit code given u₁^{i−1} = `prefix`.
pub fn eight_bit_test(w: &CqChannel, i: usize, prefix: &[u8]) -> Result<TestPair> {
    if prefix.len() + 1 != i {
        return Err(Error::Domain(format!("u{i}@8 needs {} prefix bits, got {}", i.saturating_sub(1), prefix.len())));
    }
    let u = |k: usize| prefix[k - 1];
    let s = |k: usize| prefix[..k].iter().fold(0, |a, b| a ^ b);
    match i {
        1 => {
            let d = rho_diff(w);
            assemble(w, 8, 1, prefix, Form::Parity, "parity of eight single-output Helstrom tests", Second::Parity(vec![d; 8]), None)
        }
        2 => {
            let side = |b: u8| {
                let a = state_sum(w, 3, |v| vec![u(1) ^ b ^ v[0] ^ v[1] ^ v[2], v[0], v[1], v[2]]);
                let c = state_sum(w, 3, |v| vec![b ^ v[0] ^ v[1] ^ v[2], v[0], v[1], v[2]]);
                a.kron(&c)
            };
            let m = minus(&side(0), &side(1));
            assemble(w, 8, 2, prefix, Form::BlockForm, "no known factorization", Second::Block(m), None)
        }
        3 => {
            let blocks = vec![two_block(w, u(1) ^ u(2)), two_block(w, u(2))];
            assemble(w, 8, 3, prefix, Form::Parity, "no known factorization beyond the parity of two collective tests", Second::Parity(blocks), None)
        }
        4 => {
            let c = [s(3), u(3), u(2), 0];
            let side = |b: u8| CMat::kron_all(&c.map(|ck| state_sum(w, 1, |v| vec![ck ^ b ^ v[0], v[0]])));
            let m = minus(&side(0), &side(1));
            assemble(w, 8, 4, prefix, Form::BlockForm, "no known factorization", Second::Block(m), None)
        }
        5 => {
            let groups: Vec<Vec<u8>> = [s(4), u(3) ^ u(4), u(2) ^ u(4), u(4)].iter().map(|&a| vec![a, 0]).collect();
            let blocks = groups.iter().map(|x| flip_difference(w, x)).collect();
            assemble(w, 8, 5, prefix, Form::Parity, "parity of four pair tests", Second::Parity(blocks), Some(groups))
        }
        6 => {
            let side = |b: u8| {
                let a = state_sum(w, 1, |v| vec![s(5) ^ b ^ v[0], u(5) ^ b ^ v[0], u(3) ^ u(4) ^ v[0], v[0]]);
                let c = state_sum(w, 1, |v| vec![u(2) ^ u(4) ^ b ^ v[0], b ^ v[0], u(4) ^ v[0], v[0]]);
                a.kron(&c)
            };
            let m = minus(&side(0), &side(1));
            assemble(w, 8, 6, prefix, Form::BlockForm, "no known factorization", Second::Block(m), None)
        }
        7 => {
            let groups = vec![vec![s(6), u(5) ^ u(6), u(3) ^ u(4), 0], vec![u(2) ^ u(4) ^ u(6), u(6), u(4), 0]];
            let blocks = groups.iter().map(|x| flip_difference(w, x)).collect();
            assemble(w, 8, 7, prefix, Form::Parity, "parity of two four-output tests", Second::Parity(blocks), Some(groups))
        }
        8 => {
            let x = vec![s(7), u(5) ^ u(6) ^ u(7), u(3) ^ u(4) ^ u(7), u(7), u(2) ^ u(4) ^ u(6), u(6), u(4), 0];
            assemble(w, 8, 8, prefix, Form::DirectOnly, "product hypotheses", Second::None, Some(vec![x]))
        }
        _ => Err(Error::Domain(format!("no bit u{i} in an eight-bit code"))),
    }
}

/// All eight tests, using the leading bits of `prefix` for each.
pub fn eight_bit_tests(w: &CqChannel, prefix: &[u8; 7]) -> Result<Vec<TestPair>> {
    (1..=8).map(|i| eight_bit_test(w, i, &prefix[..i - 1])).collect()
}

/// Explicit test for u_i at blocklength N ∈ {2, 4, 8}.
pub fn explicit_test(w: &CqChannel, n: usize, i: usize, prefix: &[u8]) -> Result<TestPair> {
    match n {
        2 if i == 1 && prefix.is_empty() => two_bit_u1(w),
        2 if i == 2 && prefix.len() == 1 => two_bit_u2(w, prefix[0]),
        2 => Err(Error::Domain(format!("no test u{i}@2 for prefix {prefix:?}"))),
        4 => four_bit_test(w, i, prefix),
        8 => eight_bit_test(w, i, prefix),
        _ => Err(generator(n).unwrap_err()),
    }
}

/// Max entry of Q(direct − Π_SCD)Q against the decoder's projector for the
/// same (N, i, prefix).
pub fn synthesis_residual(pair: &TestPair, dec: &mut ScDecoder) -> Result<f64> {
    if dec.block_length() != pair.label.n {
        return Err(Error::DimensionMismatch { expected: pair.label.n, found: dec.block_length() });
    }
    let p = dec.projector(pair.label.index, &pair.label.prefix)?;
    Ok(pair.restricted_distance(&p))
}

/// U₁ = I⊗Π₊⊗I + I⊗Π₋⊗σ_X and U₂ = Π₊⊗I⊗I + Π₋⊗I⊗σ_X on B₁B₂A.
#[derive(Debug, Clone)]
pub struct ControlledGates {
    pub u1: CMat,
    pub u2: CMat,
    /// (Π₊⊗Π₊ + Π₋⊗Π₋)⊗I + (Π₋⊗Π₊ + Π₊⊗Π₋)⊗σ_X
    pub parity_form: CMat,
    /// Max entry of U₁U₂ − parity_form.
    pub form_residual: f64,
}

fn sigma_x() -> CMat {
    CMat::from_vec(2, vec![ZERO, ONE, ONE, ZERO])
}

fn sum(a: CMat, b: &CMat) -> CMat {
    let mut a = a;
    a.add_scaled(b, 1.0);
    a
}

pub fn two_bit_controlled_gates(w: &CqChannel) -> Result<ControlledGates> {
    let povm = helstrom_povm(w)?;
    let (pp, pm) = (povm.elements()[0].matrix(), povm.elements()[1].matrix());
    let id = CMat::identity(w.dim());
    let ia = CMat::identity(2);
    let x = sigma_x();
    let u1 = sum(CMat::kron_all([&id, pp, &ia]), &CMat::kron_all([&id, pm, &x]));
    let u2 = sum(CMat::kron_all([pp, &id, &ia]), &CMat::kron_all([pm, &id, &x]));
    let even = sum(pp.kron(pp), &pm.kron(pm));
    let odd = sum(pm.kron(pp), &pp.kron(pm));
    let parity_form = sum(even.kron(&ia), &odd.kron(&x));
    let form_residual = u1.matmul(&u2).max_abs_diff(&parity_form);
    Ok(ControlledGates { u1, u2, parity_form, form_residual })
}

impl ControlledGates {
    /// Probability that the ancilla reads 0 after U₁U₂ acts on ρ ⊗ |0⟩⟨0|.
    pub fn ancilla_zero_probability(&self, rho: &CMat) -> f64 {
        let zero = CMat::from_vec(2, vec![ONE, ZERO, ZERO, ZERO]);
        let u = self.u1.matmul(&self.u2);
        let out = u.matmul(&rho.kron(&zero)).matmul(&u.adjoint());
        let meas = CMat::identity(rho.dim()).kron(&zero);
        out.trace_product_re(&meas)
    }
}

/// One row of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub label: String,
    pub n: usize,
    pub index: usize,
    pub prefix: Vec<u8>,
    pub form: Form,
    pub note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub synthesis_residual: f64,
    pub idempotency: f64,
    pub degenerate: bool,
    pub min_abs_eigenvalue: f64,
    pub helstrom_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fc_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fc_excess: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fc_bound: Option<f64>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual.is_none_or(|r| r <= IDENTITY_TOL)
            && self.synthesis_residual <= IDENTITY_TOL
            && self.idempotency <= PROJECTOR_TOL
            && self.fc_excess.is_none_or(|e| e >= -EXCESS_TOL)
            && match (self.fc_error, self.fc_bound) {
                (Some(e), Some(b)) => e <= b + EXCESS_TOL,
                _ => true,
            }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<IdentityCheck>,
    pub gate_form_residual: f64,
    /// Max |P(ancilla = 0) − Tr{Π·ρ}| over the four codeword states.
    pub gate_statistics_residual: f64,
    pub max_residual: f64,
    pub max_synthesis_residual: f64,
    pub min_fc_excess: f64,
    pub degenerate_count: usize,
    pub passed: bool,
}

fn check_row(pair: &TestPair, dec: &mut ScDecoder) -> Result<IdentityCheck> {
    Ok(IdentityCheck {
        label: pair.label.to_string(),
        n: pair.label.n,
        index: pair.label.index,
        prefix: pair.label.prefix.clone(),
        form: pair.form,
        note: pair.note.to_string(),
        residual: pair.residual,
        synthesis_residual: synthesis_residual(pair, dec)?,
        idempotency: pair.idempotency(),
        degenerate: pair.degenerate,
        min_abs_eigenvalue: pair.min_abs_eigenvalue,
        helstrom_error: pair.helstrom_error(),
        fc_error: pair.fc.as_ref().map(|f| f.error),
        fc_excess: pair.fc.as_ref().map(|f| f.excess),
        fc_bound: pair.fc.as_ref().and_then(|f| f.bound),
    })
}

/// Prefixes checked for u_i at blocklength N: all of them, except at N = 8
/// for i ≥ 5, where [`SAMPLED_PREFIXES`] distinct prefixes are drawn.
pub fn prefixes_for(n: usize, i: usize, seed: u64) -> Vec<Vec<u8>> {
    let total = 1usize << (i - 1);
    if n < 8 || i < 5 || total <= SAMPLED_PREFIXES {
        return (0..total).map(|p| bits_of(p, i - 1)).collect();
    }
    let mut rng = crate::rng::stream(seed, (n * 16 + i) as u64);
    let mut picks = sample(&mut rng, total, SAMPLED_PREFIXES).into_vec();
    picks.sort_unstable();
    picks.into_iter().map(|p| bits_of(p, i - 1)).collect()
}

/// Every explicit test at N ∈ {2, 4, 8} over the prefixes of
/// [`prefixes_for`], the two-bit controlled-gate identity, and cross-checks
/// against the synthesized Helstrom projectors.
pub fn verify_small_codes(w: &CqChannel, seed: u64) -> Result<VerificationReport> {
    use crate::decoder::DecoderVariant;
    use crate::polar::Synthesizer;
    use std::sync::Arc;

    let d = w.dim();
    if d.checked_pow(8).is_none_or(|x| x > crate::polar::MAX_SYNTH_DIM) {
        return Err(Error::GuardExceeded {
            what: format!("eight-bit tests on output dimension {d}"),
            limit: crate::polar::MAX_SYNTH_DIM as u64,
        });
    }
    let mut checks = Vec::new();
    for n in [2usize, 4, 8] {
        let mut dec = ScDecoder::new(Arc::new(Synthesizer::new(w, n)?), DecoderVariant::Helstrom)?;
        for i in 1..=n {
            for prefix in prefixes_for(n, i, seed) {
                let pair = explicit_test(w, n, i, &prefix)?;
                checks.push(check_row(&pair, &mut dec)?);
            }
        }
    }
    let gates = two_bit_controlled_gates(w)?;
    let u1 = two_bit_u1(w)?;
    let mut stat: f64 = 0.0;
    for x in 0..4u8 {
        let rho = states(w, &[x >> 1, x & 1]);
        let direct = rho.trace_product_re(u1.direct.matrix());
        stat = stat.max((gates.ancilla_zero_probability(&rho) - direct).abs());
    }
    let max_residual = checks.iter().filter_map(|c| c.residual).fold(0.0, f64::max);
    let max_synthesis_residual = checks.iter().map(|c| c.synthesis_residual).fold(0.0, f64::max);
    let min_fc_excess = checks.iter().filter_map(|c| c.fc_excess).fold(f64::INFINITY, f64::min);
    let degenerate_count = checks.iter().filter(|c| c.degenerate).count();
    let passed = checks.iter().all(IdentityCheck::passed) && gates.form_residual <= 1e-9 && stat <= 1e-9;
    Ok(VerificationReport {
        checks,
        gate_form_residual: gates.form_residual,
        gate_statistics_residual: stat,
        max_residual,
        max_synthesis_residual,
        min_fc_excess,
        degenerate_count,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ClassicalChannel;
    use crate::linalg::DensityOperator;

    fn commuting() -> CqChannel {
        CqChannel::diagonal(&ClassicalChannel::bsc(0.2).unwrap()).unwrap()
    }

    #[test]
    fn generator_rows_match_recursive_encoder() {
        for n in [2usize, 4, 8] {
            let gen = generator(n).unwrap();
            for u in 0..1usize << n {
                let bits = bits_of(u, n);
                assert_eq!(codeword(gen, &bits), crate::polar::encode(&bits).unwrap(), "n={n} u={bits:?}");
            }
        }
    }

    #[test]
    fn commuting_identities_exact() {
        let w = commuting();
        let t = two_bit_u1(&w).unwrap();
        assert!(t.residual.unwrap() < 1e-14);
        for p in 0..8 {
            let pre = bits_of(p, 3);
            for t in four_bit_tests(&w, &[pre[0], pre[1], pre[2]]).unwrap() {
                assert!(t.residual.is_none_or(|r| r < 1e-12), "{}", t.label);
                assert!(t.direct.matrix().hermitian_deviation() < 1e-12);
            }
        }
    }

    #[test]
    fn orthogonal_two_bit_is_even_parity() {
        let w = CqChannel::new(DensityOperator::diag(&[1.0, 0.0]).unwrap(), DensityOperator::diag(&[0.0, 1.0]).unwrap())
            .unwrap();
        let t = two_bit_u1(&w).unwrap();
        let even = HermitianOperator::diag(&[1.0, 0.0, 0.0, 1.0]);
        assert!(t.direct.max_abs_diff(&even) < 1e-14);
        assert!(t.factored.as_ref().unwrap().max_abs_diff(&even) < 1e-14);
        assert!(t.helstrom_error().abs() < 1e-14);
    }

    #[test]
    fn label_format() {
        let l = TestLabel { n: 8, index: 3, prefix: vec![1, 0] };
        assert_eq!(l.to_string(), "u3@8[10]");
    }

    #[test]
    fn parity_of_one_block_is_helstrom() {
        let d = CMat::diag_real(&[0.3, -0.2]);
        let (p, m) = parity_projector(&[d]).unwrap();
        assert!(p.max_abs_diff(&HermitianOperator::diag(&[1.0, 0.0])) < 1e-15);
        assert!((m - 0.2).abs() < 1e-15);
    }

    #[test]
    fn prefix_sampling() {
        assert_eq!(prefixes_for(8, 4, 1).len(), 8);
        assert_eq!(prefixes_for(8, 5, 1).len(), 16);
        let p = prefixes_for(8, 8, 1);
        assert_eq!(p.len(), SAMPLED_PREFIXES);
        assert_eq!(p, prefixes_for(8, 8, 1));
        let mut q = p.clone();
        q.dedup();
        assert_eq!(q.len(), p.len());
    }
}
