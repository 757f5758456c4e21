use cqpolar::channel::{
    bhattacharyya, helstrom_povm, holevo_information, induce_classical, mutual_information, quantum_fidelity, CqChannel,
    Povm,
};
use cqpolar::fuchs_caves::fc_measurement;
use cqpolar::linalg::{geometric_mean_ratio, trace_norm, CMat, C64};
use cqpolar::polar::{classical_split_all, Synthesizer};
use cqpolar::random::{random_basis_povm, random_channel, random_povm, random_unitary};
use cqpolar::rng::stream;
use proptest::prelude::*;
use rand::Rng;

fn channel(seed: u64, d: usize) -> CqChannel {
    random_channel(d, &mut stream(seed, 0))
}

fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMat {
    let a = CMat::from_fn(d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let mut h = a.clone();
    h.add_scaled(&a.adjoint(), 1.0);
    h.scale(0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn geometric_means_are_mutual_inverses(seed in any::<u64>(), d in 2usize..=3) {
        let w = channel(seed, d);
        let a = geometric_mean_ratio(w.rho0(), w.rho1(), 0.0).unwrap();
        let b = geometric_mean_ratio(w.rho1(), w.rho0(), 0.0).unwrap();
        let prod = b.matrix().matmul(a.matrix());
        prop_assert!(prod.max_abs_diff(&CMat::identity(d)) <= 1e-7);
        prop_assert!(a.matrix().commutator(b.matrix()).max_abs() <= 1e-7);
    }

    #[test]
    fn fc_lambdas_invert_under_swap(seed in any::<u64>(), d in 2usize..=3) {
        let w = channel(seed, d);
        let mut l = fc_measurement(&w).unwrap().lambdas;
        let mut r: Vec<f64> = fc_measurement(&w.swapped()).unwrap().lambdas.iter().map(|x| 1.0 / x).collect();
        l.sort_by(f64::total_cmp);
        r.sort_by(f64::total_cmp);
        for (x, y) in l.iter().zip(&r) {
            prop_assert!((x - y).abs() <= 1e-6);
        }
    }

    #[test]
    fn trace_norm_is_multiplicative(seed in any::<u64>(), d in 2usize..=3) {
        let mut rng = stream(seed, 1);
        let a = random_hermitian(d, &mut rng);
        let b = random_hermitian(2, &mut rng);
        let lhs = trace_norm(&a.kron(&b)).unwrap();
        prop_assert!((lhs - trace_norm(&a).unwrap() * trace_norm(&b).unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn measurements_respect_holevo_and_fidelity(seed in any::<u64>(), d in 2usize..=3, k in 2usize..=4) {
        let w = channel(seed, d);
        let chi = holevo_information(&w).unwrap();
        let f = quantum_fidelity(&w).unwrap();
        let mut rng = stream(seed, 2);
        let povms = [random_povm(d, k, &mut rng).unwrap(), random_basis_povm(d, &mut rng).unwrap(), helstrom_povm(&w).unwrap()];
        for p in &povms {
            let c = induce_classical(&w, p).unwrap();
            prop_assert!(mutual_information(&c) <= chi + 1e-8);
            prop_assert!(bhattacharyya(&c) >= f - 1e-7);
        }
    }

    #[test]
    fn fidelity_is_the_overlap_in_the_fc_basis(seed in any::<u64>(), d in 2usize..=3) {
        let w = channel(seed, d);
        let m = fc_measurement(&w).unwrap();
        let overlap: f64 = (0..d)
            .map(|y| {
                let v = m.basis.vector(y);
                (w.rho0().matrix().expectation(&v) * w.rho1().matrix().expectation(&v)).max(0.0).sqrt()
            })
            .sum();
        prop_assert!((overlap - quantum_fidelity(&w).unwrap()).abs() <= 1e-7);
    }

    #[test]
    fn one_step_degradation_ordering(seed in any::<u64>()) {
        let w = channel(seed, 2);
        let f1 = vec![quantum_fidelity(&w).unwrap()];
        let f2 = Synthesizer::new(&w, 2).unwrap().fidelities().unwrap();
        let f4 = Synthesizer::new(&w, 4).unwrap().fidelities().unwrap();
        for (short, long) in [(&f1, &f2), (&f2, &f4)] {
            for (i, &fi) in short.iter().enumerate() {
                prop_assert!(long[2 * i + 1] <= fi + 1e-7);
                prop_assert!(fi <= long[2 * i] + 1e-7);
            }
        }
    }

    #[test]
    fn product_measurements_never_beat_synthesized_fidelity(seed in any::<u64>()) {
        let w = channel(seed, 2);
        let f = Synthesizer::new(&w, 4).unwrap().fidelities().unwrap();
        let u = random_unitary(2, &mut stream(seed, 3));
        let povms = [helstrom_povm(&w).unwrap(), Povm::computational_basis(2), Povm::from_basis(&u).unwrap(), fc_measurement(&w).unwrap().povm().unwrap()];
        for p in &povms {
            let splits = classical_split_all(&induce_classical(&w, p).unwrap(), 4).unwrap();
            for (s, fi) in splits.iter().zip(&f) {
                prop_assert!(s.z >= fi - 1e-7);
            }
        }
    }

    #[test]
    fn classical_chain_rule_for_induced_channels(seed in any::<u64>(), n in prop::sample::select(vec![2usize, 4, 8])) {
        let w = channel(seed, 2);
        let c = induce_classical(&w, &helstrom_povm(&w).unwrap()).unwrap();
        let total: f64 = classical_split_all(&c, n).unwrap().iter().map(|s| s.mutual_information).sum();
        prop_assert!((total - n as f64 * mutual_information(&c)).abs() <= 1e-6);
    }
}
