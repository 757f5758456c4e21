use cqpolar::channel::{CqChannel, ClassicalChannel};
use cqpolar::decoder::{DecoderVariant, ScDecoder};
use cqpolar::fuchs_caves::{fc_measurement, tuple_digits};
use cqpolar::linalg::{CMat, DensityOperator, HermitianOperator, C64};
use cqpolar::polar::{bits_of, Synthesizer};
use cqpolar::random::random_channel;
use cqpolar::rng::stream;
use cqpolar::small_codes::*;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

fn zero_plus() -> CqChannel {
    let z = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let p = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)];
    CqChannel::pure_pair(&z, &p).unwrap()
}

fn orthogonal() -> CqChannel {
    CqChannel::new(DensityOperator::diag(&[1.0, 0.0]).unwrap(), DensityOperator::diag(&[0.0, 1.0]).unwrap()).unwrap()
}

fn identical() -> CqChannel {
    let r = DensityOperator::diag(&[0.7, 0.3]).unwrap();
    CqChannel::new(r.clone(), r).unwrap()
}

#[test]
fn two_bit_random_channels() {
    let mut rng = stream(11, 0);
    for _ in 0..20 {
        let w = random_channel(2, &mut rng);
        let t = two_bit_u1(&w).unwrap();
        assert!(!t.degenerate);
        assert!(t.residual.unwrap() <= IDENTITY_TOL, "{:?}", t.residual);
        assert!(t.idempotency() <= PROJECTOR_TOL);
    }
}

#[test]
fn controlled_gates_reproduce_statistics() {
    let mut rng = stream(12, 0);
    for _ in 0..10 {
        let w = random_channel(2, &mut rng);
        let g = two_bit_controlled_gates(&w).unwrap();
        assert!(g.form_residual < 1e-12);
        let t = two_bit_u1(&w).unwrap();
        for b in 0..2 {
            let mut s0 = CMat::zeros(4);
            for u2 in 0..2u8 {
                let x = [b ^ u2, u2];
                s0.add_scaled(&w.rho(x[0]).matrix().kron(w.rho(x[1]).matrix()), 0.5);
            }
            let p = g.ancilla_zero_probability(&s0);
            assert!((p - s0.trace_product_re(t.direct.matrix())).abs() < 1e-9);
        }
    }
}

#[test]
fn controlled_gates_extreme_channels() {
    let w = orthogonal();
    let g = two_bit_controlled_gates(&w).unwrap();
    for x in 0..4u8 {
        let rho = w.rho(x >> 1).matrix().kron(w.rho(x & 1).matrix());
        let parity = ((x >> 1) ^ (x & 1)) as f64;
        assert!((g.ancilla_zero_probability(&rho) - (1.0 - parity)).abs() < 1e-12);
    }
    // identical outputs: the ancilla carries no information about u₁, so it
    // agrees with a uniform u₁ half of the time
    let w = identical();
    let g = two_bit_controlled_gates(&w).unwrap();
    let mut agree = 0.0;
    for u1 in 0..2u8 {
        for u2 in 0..2u8 {
            let rho = w.rho(u1 ^ u2).matrix().kron(w.rho(u2).matrix());
            let p0 = g.ancilla_zero_probability(&rho);
            agree += 0.25 * if u1 == 0 { p0 } else { 1.0 - p0 };
        }
    }
    assert!((agree - 0.5).abs() < 1e-9);
}

#[test]
fn four_bit_random_channels() {
    let mut rng = stream(13, 0);
    for _ in 0..5 {
        let w = random_channel(2, &mut rng);
        let mut dec = ScDecoder::new(Arc::new(Synthesizer::new(&w, 4).unwrap()), DecoderVariant::Helstrom).unwrap();
        for p in 0..8 {
            let pre = bits_of(p, 3);
            for t in four_bit_tests(&w, &[pre[0], pre[1], pre[2]]).unwrap() {
                assert!(t.residual.is_none_or(|r| r <= IDENTITY_TOL), "{} {:?}", t.label, t.residual);
                assert!(synthesis_residual(&t, &mut dec).unwrap() <= IDENTITY_TOL, "{}", t.label);
                if let Some(fc) = &t.fc {
                    assert!(fc.excess >= -EXCESS_TOL);
                    assert!(fc.error <= fc.bound.unwrap() + 1e-9);
                }
            }
        }
    }
}

#[test]
fn four_bit_orthogonal_u4_errorless() {
    let w = orthogonal();
    let t = four_bit_test(&w, 4, &[0, 1, 1]).unwrap();
    let fc = t.fc.unwrap();
    assert!(fc.helstrom_error.abs() < 1e-12 && fc.error.abs() < 1e-12);
}

#[test]
fn four_bit_u4_zero_plus_bound_by_enumeration() {
    let w = zero_plus();
    let t = four_bit_test(&w, 4, &[0, 0, 0]).unwrap();
    let fc = t.fc.as_ref().unwrap();
    // hypotheses ρ0⊗ρ0⊗ρ0⊗ρ0 vs ρ1⊗ρ1⊗ρ1⊗ρ1
    let c = fc_measurement(&w).unwrap().induced(&w).unwrap();
    let mut brute = 0.0;
    for y in 0..16 {
        let ys = tuple_digits(y, 2, 4);
        let q0: f64 = ys.iter().map(|&y| c.prob(y, 0)).product();
        let q1: f64 = ys.iter().map(|&y| c.prob(y, 1)).product();
        brute += 0.5 * q0.min(q1);
    }
    let f = FRAC_1_SQRT_2.powi(4);
    assert!((brute - fc.error).abs() < 1e-9, "{brute} vs {}", fc.error);
    assert!(fc.error <= 0.5 * f + 1e-9);
    assert!((fc.bound.unwrap() - 0.5 * f).abs() < 1e-9);
    assert!(fc.excess >= -EXCESS_TOL);
}

#[test]
fn eight_bit_commuting_diagonal() {
    let w = CqChannel::diagonal(&ClassicalChannel::bsc(0.15).unwrap()).unwrap();
    for i in 1..=8 {
        let t = eight_bit_test(&w, i, &vec![1; i - 1]).unwrap();
        let m = t.direct.matrix();
        let off = (0..256).flat_map(|r| (0..256).map(move |c| (r, c))).filter(|(r, c)| r != c).map(|(r, c)| m[(r, c)].norm()).fold(0.0, f64::max);
        assert!(off < 1e-12, "{}", t.label);
        if matches!(i, 1 | 5 | 7) {
            assert!(t.residual.unwrap() < 1e-12, "{}", t.label);
        }
    }
}

#[test]
fn eight_bit_orthogonal_errorless() {
    let w = orthogonal();
    for t in eight_bit_tests(&w, &[0, 1, 1, 0, 1, 0, 0]).unwrap() {
        assert!(t.helstrom_error().abs() < 1e-12, "{}", t.label);
        if let Some(fc) = &t.fc {
            assert!(fc.error.abs() < 1e-12);
        }
    }
}

#[test]
fn eight_bit_random_channel_report() {
    let mut rng = stream(14, 0);
    let w = random_channel(2, &mut rng);
    let rep = verify_small_codes(&w, 3).unwrap();
    for c in &rep.checks {
        assert!(c.passed(), "{c:?}");
    }
    assert!(rep.passed);
    assert!(rep.max_residual <= IDENTITY_TOL && rep.max_synthesis_residual <= IDENTITY_TOL);
    let labels: Vec<&str> = rep.checks.iter().map(|c| c.label.as_str()).collect();
    assert!(labels.contains(&"u1@2") && labels.contains(&"u4@8[111]"));
    assert_eq!(rep.checks.iter().filter(|c| c.n == 8 && c.index == 8).count(), SAMPLED_PREFIXES);
    let json = serde_json::to_string(&rep).unwrap();
    assert!(json.contains("\"form\":\"block-form\""));
}

#[test]
fn projectors_complete_and_orthogonal() {
    let mut rng = stream(15, 0);
    let w = random_channel(2, &mut rng);
    for t in eight_bit_tests(&w, &[1, 0, 0, 1, 1, 0, 1]).unwrap() {
        let p = &t.direct;
        let q = p.complement();
        let sum = p.add(&q);
        assert!(sum.max_abs_diff(&HermitianOperator::identity(256)) < 1e-8);
        assert!(p.matrix().matmul(q.matrix()).max_abs() < 1e-8);
        assert!(t.idempotency() < PROJECTOR_TOL, "{}", t.label);
    }
}
