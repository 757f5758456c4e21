use cqpolar::channel::{helstrom_povm, ClassicalChannel, CqChannel};
use cqpolar::decoder::*;
use cqpolar::linalg::{trace_norm, DensityOperator, HermitianOperator, C64};
use cqpolar::polar::{bits_of, encode, Synthesizer};
use cqpolar::random::random_channel;
use cqpolar::rng::{stream, Purpose, TrialRng};
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

fn ket(a: f64, b: f64) -> Vec<C64> {
    vec![C64::new(a, 0.0), C64::new(b, 0.0)]
}

fn zero_plus() -> CqChannel {
    CqChannel::pure_pair(&ket(1.0, 0.0), &ket(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).unwrap()
}

fn orthogonal() -> CqChannel {
    CqChannel::pure_pair(&ket(1.0, 0.0), &ket(0.0, 1.0)).unwrap()
}

fn decoder(w: &CqChannel, n: usize, v: DecoderVariant) -> ScDecoder {
    ScDecoder::new(Arc::new(Synthesizer::new(w, n).unwrap()), v).unwrap()
}

const VARIANTS: [DecoderVariant; 3] = [DecoderVariant::Helstrom, DecoderVariant::SqrtHelstrom, DecoderVariant::FuchsCaves];

#[test]
fn single_use_elements_are_helstrom() {
    let mut rng = stream(21, 0);
    let w = random_channel(2, &mut rng);
    let mut d = decoder(&w, 1, DecoderVariant::Helstrom);
    let code = CodeSpec::with_zeros(1, &[1], FrozenMode::Fixed).unwrap();
    let hel = helstrom_povm(&w).unwrap();
    for u in 0..2u8 {
        let l = scd_povm_element(&mut d, &code, &[u]).unwrap();
        assert!(l.max_abs_diff(&hel.elements()[u as usize]) < 1e-12);
    }
}

#[test]
fn orthogonal_states_decode_perfectly() {
    let w = orthogonal();
    let code = CodeSpec::with_zeros(2, &[1, 2], FrozenMode::Fixed).unwrap();
    for v in VARIANTS {
        let mut d = decoder(&w, 2, v);
        assert!(exact_error(&mut d, &code).unwrap().abs() < 1e-9, "{v}");
        for a in 0..4 {
            let u = bits_of(a, 2);
            let l = scd_povm_element(&mut d, &code, &u).unwrap();
            let rho = d.codeword_state(&u).unwrap();
            assert!((l.trace_with(rho.op()) - 1.0).abs() < 1e-9);
            assert!(l.idempotency_residual() < 1e-9);
        }
        let sim = simulate(&mut d, &code, 500, 3).unwrap();
        assert_eq!(sim.errors, 0);
    }
}

#[test]
fn useless_channel_is_a_coin() {
    let rho = DensityOperator::diag(&[0.7, 0.3]).unwrap();
    let w = CqChannel::new(rho.clone(), rho).unwrap();
    let code = CodeSpec::with_zeros(2, &[2], FrozenMode::Fixed).unwrap();
    let mut d = decoder(&w, 2, DecoderVariant::Helstrom);
    assert!((exact_error(&mut d, &code).unwrap() - 0.5).abs() < 1e-12);
    let sim = simulate(&mut d, &code, 10_000, 9).unwrap();
    assert!(sim.ci_low <= 0.5 && 0.5 <= sim.ci_high, "{sim:?}");
}

#[test]
fn povm_completeness_at_four_uses() {
    let mut rng = stream(22, 0);
    let w = random_channel(2, &mut rng);
    let codes = [
        CodeSpec::with_zeros(4, &[2, 4], FrozenMode::Fixed).unwrap(),
        CodeSpec::new(4, &[3, 4], vec![1, 0, 0, 0], FrozenMode::Fixed).unwrap(),
        CodeSpec::with_zeros(4, &[1, 2, 3, 4], FrozenMode::Fixed).unwrap(),
    ];
    let mut variants = VARIANTS.to_vec();
    variants.push(DecoderVariant::Hybrid { beta: 0.45 });
    for v in variants {
        let mut d = decoder(&w, 4, v);
        for code in &codes {
            let k = code.k();
            let mut sum = HermitianOperator::zeros(16);
            for a in 0..(1 << k) {
                let u = code.word(&bits_of(a, k), code.frozen_values());
                let l = scd_povm_element(&mut d, code, &u).unwrap();
                assert!(cqpolar::linalg::eigvals_herm(&l).unwrap().last().unwrap() > &-1e-9);
                sum = sum.add(&l);
            }
            let res = sum.max_abs_diff(&HermitianOperator::identity(16));
            assert!(res <= 1e-7, "{v} residual {res}");
        }
    }
}

#[test]
fn helstrom_first_test_is_optimal() {
    let mut rng = stream(23, 0);
    for _ in 0..3 {
        let w = random_channel(2, &mut rng);
        let code = CodeSpec::with_zeros(4, &[2, 3, 4], FrozenMode::Fixed).unwrap();
        let mut hel = decoder(&w, 4, DecoderVariant::Helstrom);
        let e = first_test_error(&mut hel, &code).unwrap();
        let (s0, s1) = hel.synthesizer().block(&[0]).unwrap();
        let tn = trace_norm(s0.op().sub(s1.op()).matrix()).unwrap();
        assert!((e - 0.5 * (1.0 - 0.5 * tn)).abs() < 1e-9);
        for v in [DecoderVariant::SqrtHelstrom, DecoderVariant::FuchsCaves] {
            let mut d = decoder(&w, 4, v);
            assert!(first_test_error(&mut d, &code).unwrap() >= e - 1e-9);
        }
    }
}

#[test]
fn errors_respect_the_fidelity_bound() {
    let w = zero_plus();
    let syn = Arc::new(Synthesizer::new(&w, 4).unwrap());
    let f = syn.fidelities().unwrap();
    let info = CodeSpec::best_indices(&f, 2).unwrap();
    let bound = prop_error_bound(&info.iter().map(|&i| f[i - 1]).collect::<Vec<_>>());
    for mode in [FrozenMode::Fixed, FrozenMode::UniformRandom] {
        let code = CodeSpec::with_zeros(4, &info, mode).unwrap();
        for v in VARIANTS {
            let mut d = ScDecoder::new(syn.clone(), v).unwrap();
            let e = exact_error(&mut d, &code).unwrap();
            assert!(e <= bound, "{v} {e} {bound}");
        }
    }
}

#[test]
fn simulation_matches_exact_error() {
    let w = zero_plus();
    let syn = Arc::new(Synthesizer::new(&w, 4).unwrap());
    let f = syn.fidelities().unwrap();
    let info = CodeSpec::best_indices(&f, 2).unwrap();
    let code = CodeSpec::with_zeros(4, &info, FrozenMode::UniformRandom).unwrap();
    for v in [DecoderVariant::Helstrom, DecoderVariant::SqrtHelstrom] {
        let mut d = ScDecoder::new(syn.clone(), v).unwrap();
        let exact = exact_error(&mut d, &code).unwrap();
        let sim = simulate(&mut d, &code, 100_000, 17).unwrap();
        assert!((sim.error - exact).abs() <= 3.0 * sim.sigma_at(exact), "{v}: {} vs {exact}", sim.error);
    }
}

#[test]
fn simulation_is_deterministic() {
    let mut rng = stream(24, 0);
    let w = random_channel(2, &mut rng);
    let code = CodeSpec::with_zeros(4, &[3, 4], FrozenMode::UniformRandom).unwrap();
    let mut d = decoder(&w, 4, DecoderVariant::FuchsCaves);
    let a = simulate(&mut d, &code, 300, 5).unwrap();
    let b = simulate(&mut d, &code, 300, 5).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.strategy_histogram.frozen, 600);
    assert_eq!(a.strategy_histogram.collective, 600);
}

#[test]
fn arikan_identity_and_ties() {
    let id = ClassicalChannel::new(vec![[1.0, 0.0], [0.0, 1.0]]).unwrap();
    let code = CodeSpec::with_zeros(8, &(1..=8).collect::<Vec<_>>(), FrozenMode::Fixed).unwrap();
    for a in 0..256 {
        let u = bits_of(a, 8);
        let y: Vec<usize> = encode(&u).unwrap().iter().map(|&b| b as usize).collect();
        assert_eq!(arikan_decode(&id, &code, &y).unwrap(), u);
    }
    let bec = ClassicalChannel::bec(0.4).unwrap();
    let code = CodeSpec::with_zeros(2, &[1, 2], FrozenMode::Fixed).unwrap();
    assert_eq!(arikan_decode(&bec, &code, &[2, 2]).unwrap(), vec![0, 0]);
    let code = CodeSpec::new(2, &[2], vec![1, 0], FrozenMode::Fixed).unwrap();
    assert_eq!(arikan_decode(&bec, &code, &[2, 2]).unwrap(), vec![1, 0]);
}

/// Same decisions from likelihoods summed over all completions.
fn brute_force_sc(c: &ClassicalChannel, code: &CodeSpec, y: &[usize]) -> Vec<u8> {
    let n = code.n();
    let mut u: Vec<u8> = Vec::new();
    for i in 1..=n {
        if !code.is_info(i) {
            u.push(code.frozen_values()[i - 1]);
            continue;
        }
        let mut lik = [0.0f64; 2];
        for b in 0..2u8 {
            let free = n - i;
            for t in 0..(1usize << free) {
                let mut full = u.clone();
                full.push(b);
                full.extend(bits_of(t, free));
                let x = encode(&full).unwrap();
                lik[b as usize] += x.iter().zip(y).map(|(&x, &y)| c.prob(y, x)).product::<f64>();
            }
        }
        let tie = (lik[0] - lik[1]).abs() <= 1e-9 * lik[0].max(lik[1]);
        u.push(u8::from(!tie && lik[0] < lik[1]));
    }
    u
}

#[test]
fn arikan_matches_brute_force() {
    let c = ClassicalChannel::bsc(0.05).unwrap();
    let code = CodeSpec::with_zeros(8, &[4, 6, 7, 8], FrozenMode::Fixed).unwrap();
    let words = 10_000u64;
    let (mut e_fast, mut e_slow, mut disagree) = (0u64, 0u64, 0u64);
    for t in 0..words {
        let mut rng = TrialRng::new(77, t);
        let info: Vec<u8> = (0..4).map(|k| rng.bit(Purpose::InfoBits, k)).collect();
        let u = code.word(&info, code.frozen_values());
        let y: Vec<usize> = encode(&u)
            .unwrap()
            .iter()
            .enumerate()
            .map(|(j, &x)| (x ^ u8::from(rng.uniform(Purpose::ChannelOutput, j as u64) < 0.05)) as usize)
            .collect();
        let a = arikan_decode(&c, &code, &y).unwrap();
        let b = brute_force_sc(&c, &code, &y);
        e_fast += u64::from(a != u);
        e_slow += u64::from(b != u);
        disagree += u64::from(a != b);
    }
    let p = e_slow as f64 / words as f64;
    let sigma = (p * (1.0 - p) / words as f64).sqrt().max(1.0 / words as f64);
    assert!(((e_fast as f64 - e_slow as f64) / words as f64).abs() <= 3.0 * sigma);
    assert!(disagree <= words / 1000, "disagreements {disagree}");
}

#[test]
fn hybrid_on_commuting_channel_is_all_product() {
    let w = CqChannel::diagonal(&ClassicalChannel::bsc(0.02).unwrap()).unwrap();
    let mut d = decoder(&w, 4, DecoderVariant::Hybrid { beta: 0.45 });
    let report = d.report().unwrap().clone();
    assert_eq!(report.good_w(), report.good_wfc());
    let code = CodeSpec::with_zeros(4, &report.good_w(), FrozenMode::Fixed).unwrap();
    let t = hybrid_decode(&mut d, &code, &code.word(&vec![1; code.k()], code.frozen_values()), 1, 0).unwrap();
    for b in &t.bits {
        assert!(b.strategy != Strategy::Collective);
    }
}

#[test]
fn hybrid_on_orthogonal_states() {
    let w = orthogonal();
    let mut d = decoder(&w, 4, DecoderVariant::Hybrid { beta: 0.45 });
    let code = CodeSpec::with_zeros(4, &[1, 2, 3, 4], FrozenMode::Fixed).unwrap();
    let sim = simulate(&mut d, &code, 200, 2).unwrap();
    assert_eq!(sim.errors, 0);
    assert_eq!(sim.strategy_histogram.product, 800);
    assert!(exact_error(&mut d, &code).unwrap().abs() < 1e-9);
}

#[test]
fn hybrid_product_steps_commute() {
    let w = zero_plus();
    let mut d = decoder(&w, 4, DecoderVariant::Hybrid { beta: 0.45 });
    let good = d.report().unwrap().good_wfc();
    assert!(!good.is_empty());
    let mut ops = Vec::new();
    for &i in &good {
        for p in 0..(1usize << (i - 1)).min(4) {
            ops.push(d.projector(i, &bits_of(p, i - 1)).unwrap());
        }
    }
    for a in &ops {
        for b in &ops {
            assert!(a.matrix().commutator(b.matrix()).max_abs() <= 1e-9);
        }
    }
}

#[test]
fn hybrid_rejects_mismatched_report() {
    let w = zero_plus();
    let d4 = decoder(&w, 4, DecoderVariant::Hybrid { beta: 0.45 });
    let syn2 = Arc::new(Synthesizer::new(&w, 2).unwrap());
    assert!(ScDecoder::with_report(syn2, d4.report().unwrap().clone()).is_err());
    let mut plain = decoder(&w, 2, DecoderVariant::Helstrom);
    let code = CodeSpec::with_zeros(2, &[2], FrozenMode::Fixed).unwrap();
    assert!(hybrid_decode(&mut plain, &code, &[0, 0], 0, 0).is_err());
}

#[test]
fn variant_names_round_trip() {
    for v in VARIANTS {
        assert_eq!(v.name().parse::<DecoderVariant>().unwrap(), v);
    }
    assert_eq!("hybrid:0.3".parse::<DecoderVariant>().unwrap(), DecoderVariant::Hybrid { beta: 0.3 });
    assert!("ml".parse::<DecoderVariant>().is_err());
}
