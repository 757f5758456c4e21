use super::encoder::{bits_of, encode, index_of, log2_blocklength, split_pairs};
use crate::channel::CqChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_fidelity, fidelity, von_neumann_entropy as entropy_of, CMat, DensityOperator, HermitianOperator,
};
use std::sync::Arc;

/// Largest output dimension d^N synthesized exactly.
pub const MAX_SYNTH_DIM: usize = 1024;

/// Averaged output states ρ̄_{u₁^k} of N uses of a cq channel.
///
/// States of the N/2 transform are tabulated by direct enumeration; states at
/// blocklength N are assembled from two half-length tables.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    channel: CqChannel,
    average: DensityOperator,
    n: usize,
    /// half[k][p]: level-k state of the N/2 transform, p = prefix index.
    half: Vec<Vec<DensityOperator>>,
    half_entropy: Vec<Vec<f64>>,
}

/// How a level state factors over the two halves of the output.
#[derive(Debug, Clone, Copy)]
pub enum LevelState<'a> {
    Single(&'a DensityOperator),
    Product(&'a DensityOperator, &'a DensityOperator),
    /// ½ Σ_t A_t ⊗ B_t
    Mixture([(&'a DensityOperator, &'a DensityOperator); 2]),
}

impl LevelState<'_> {
    pub fn dense(&self) -> DensityOperator {
        match *self {
            LevelState::Single(r) => r.clone(),
            LevelState::Product(a, b) => a.kron(b),
            LevelState::Mixture([(a0, b0), (a1, b1)]) => {
                let mut m = a0.matrix().kron(b0.matrix()).scale(0.5);
                m.add_scaled(&a1.matrix().kron(b1.matrix()), 0.5);
                DensityOperator::from_constructed(HermitianOperator::from_constructed(m))
            }
        }
    }
}

fn check_dim(d: usize, n: usize) -> Result<()> {
    let total = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > MAX_SYNTH_DIM as u128 {
        return Err(Error::GuardExceeded {
            what: format!("synthesized output dimension {d}^{n}"),
            limit: MAX_SYNTH_DIM as u64,
        });
    }
    Ok(())
}

/// ρ̄_{u₁^k} = 2^{−(N−k)} Σ over completions of ⊗_j ρ_{x_j}, x = uG_N.
pub fn averaged_state_direct(w: &CqChannel, n: usize, prefix: &[u8]) -> Result<DensityOperator> {
    log2_blocklength(n)?;
    check_dim(w.dim(), n)?;
    if prefix.len() > n {
        return Err(Error::Domain(format!("prefix of length {} exceeds N = {n}", prefix.len())));
    }
    let free = n - prefix.len();
    let dim = w.dim().pow(n as u32);
    let mut acc = CMat::zeros(dim);
    let weight = 0.5f64.powi(free as i32);
    for c in 0..(1usize << free) {
        let mut u = prefix.to_vec();
        u.extend(bits_of(c, free));
        let x = encode(&u)?;
        let prod = CMat::kron_all(x.iter().map(|&b| w.rho(b).matrix()));
        acc.add_scaled(&prod, weight);
    }
    Ok(DensityOperator::from_constructed(HermitianOperator::from_constructed(acc)))
}

impl Synthesizer {
    pub fn new(w: &CqChannel, n: usize) -> Result<Self> {
        log2_blocklength(n)?;
        check_dim(w.dim(), n)?;
        let m = n / 2;
        let mut half = Vec::new();
        let mut half_entropy = Vec::new();
        if m >= 1 {
            for k in 0..=m {
                let mut level = Vec::with_capacity(1 << k);
                let mut ent = Vec::with_capacity(1 << k);
                for p in 0..(1usize << k) {
                    let s = averaged_state_direct(w, m, &bits_of(p, k))?;
                    ent.push(entropy_of(&s)?);
                    level.push(s);
                }
                half.push(level);
                half_entropy.push(ent);
            }
        }
        Ok(Synthesizer { channel: w.clone(), average: w.average(), n, half, half_entropy })
    }

    pub fn channel(&self) -> &CqChannel {
        &self.channel
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    /// d^N
    pub fn output_dim(&self) -> usize {
        self.channel.dim().pow(self.n as u32)
    }

    /// Half-table coordinates of a level-k prefix: for even k the two
    /// half prefixes; for odd k the two shared prefixes and the last bit.
    fn coords(prefix: &[u8]) -> (usize, usize, usize, Option<u8>) {
        let k = prefix.len();
        if k % 2 == 0 {
            let (a, b) = split_pairs(prefix);
            (k / 2, index_of(&a), index_of(&b), None)
        } else {
            let (a, b) = split_pairs(&prefix[..k - 1]);
            ((k + 1) / 2, index_of(&a), index_of(&b), Some(prefix[k - 1]))
        }
    }

    /// Factored form of ρ̄_{prefix}.
    pub fn structure(&self, prefix: &[u8]) -> Result<LevelState<'_>> {
        if prefix.len() > self.n {
            return Err(Error::Domain(format!("prefix of length {} exceeds N = {}", prefix.len(), self.n)));
        }
        if self.n == 1 {
            return Ok(match prefix.first() {
                None => LevelState::Single(&self.average),
                Some(&u) => LevelState::Single(self.channel.rho(u)),
            });
        }
        let (j, a, b, last) = Self::coords(prefix);
        let tab = &self.half[j];
        Ok(match last {
            None => LevelState::Product(&tab[a], &tab[b]),
            Some(c) => {
                // a_j = c ⊕ t, b_j = t
                let c = c as usize;
                LevelState::Mixture([(&tab[2 * a + c], &tab[2 * b]), (&tab[2 * a + (c ^ 1)], &tab[2 * b + 1])])
            }
        })
    }

    /// Dense ρ̄_{prefix}.
    pub fn state(&self, prefix: &[u8]) -> Result<DensityOperator> {
        Ok(self.structure(prefix)?.dense())
    }

    /// ρ̄_{prefix} by enumeration of all completions.
    pub fn state_direct(&self, prefix: &[u8]) -> Result<DensityOperator> {
        averaged_state_direct(&self.channel, self.n, prefix)
    }

    /// (ρ̄_{prefix 0}, ρ̄_{prefix 1})
    pub fn block(&self, prefix: &[u8]) -> Result<(DensityOperator, DensityOperator)> {
        let mut p = prefix.to_vec();
        p.push(0);
        let s0 = self.state(&p)?;
        *p.last_mut().unwrap() = 1;
        Ok((s0, self.state(&p)?))
    }

    /// F(ρ̄_{prefix 0}, ρ̄_{prefix 1}); product blocks factor into two
    /// half-length fidelities.
    pub fn block_fidelity(&self, prefix: &[u8]) -> Result<f64> {
        if self.n == 1 {
            return fidelity(self.channel.rho0(), self.channel.rho1());
        }
        let mut p = prefix.to_vec();
        p.push(0);
        if p.len() % 2 == 0 {
            let (j, a, b, _) = Self::coords(&p);
            let c = prefix[prefix.len() - 1] as usize;
            let tab = &self.half[j];
            let a0 = 2 * (a >> 1) + c;
            let a1 = 2 * (a >> 1) + (c ^ 1);
            let b0 = 2 * (b >> 1);
            let fa = fidelity(&tab[a0], &tab[a1])?;
            let fb = fidelity(&tab[b0], &tab[b0 + 1])?;
            Ok(fa * fb)
        } else {
            let (s0, s1) = self.block(prefix)?;
            cholesky_fidelity(&s0, &s1)
        }
    }

    /// S(ρ̄_{prefix}) in bits; products add half-length entropies.
    pub fn level_entropy(&self, prefix: &[u8]) -> Result<f64> {
        if self.n == 1 {
            return entropy_of(&self.state(prefix)?);
        }
        match self.structure(prefix)? {
            LevelState::Product(..) => {
                let (j, a, b, _) = Self::coords(prefix);
                Ok(self.half_entropy[j][a] + self.half_entropy[j][b])
            }
            s => entropy_of(&s.dense()),
        }
    }

    /// F(W_N^{(i)}) for i = 1..N.
    pub fn fidelities(&self) -> Result<Vec<f64>> {
        (1..=self.n)
            .map(|i| {
                let count = 1usize << (i - 1);
                let mut f = 0.0;
                for p in 0..count {
                    f += self.block_fidelity(&bits_of(p, i - 1))?;
                }
                Ok(f / count as f64)
            })
            .collect()
    }

    /// I(W_N^{(i)}) for i = 1..N, from one entropy per level state.
    pub fn holevos(&self) -> Result<Vec<f64>> {
        let mut levels: Vec<Vec<f64>> = Vec::with_capacity(self.n + 1);
        for k in 0..=self.n {
            let mut ent = Vec::with_capacity(1 << k);
            for p in 0..(1usize << k) {
                ent.push(self.level_entropy(&bits_of(p, k))?);
            }
            levels.push(ent);
        }
        Ok((1..=self.n)
            .map(|i| {
                let count = 1usize << (i - 1);
                let mut acc = 0.0;
                for p in 0..count {
                    acc += levels[i - 1][p] - 0.5 * (levels[i][2 * p] + levels[i][2 * p + 1]);
                }
                acc / count as f64
            })
            .collect())
    }
}

/// How [`SplitChannel`] blocks are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Sum over all completions of the prefix.
    Enumeration,
    /// Assembled from half-length tables.
    Recursive,
}

/// W_N^{(i)}: for each prefix u₁^{i−1}, the pair (ρ̄_{u₁^{i−1}0}, ρ̄_{u₁^{i−1}1})
/// with weight 2^{−(i−1)}. Blocks are produced on demand.
#[derive(Debug, Clone)]
pub struct SplitChannel {
    synth: Arc<Synthesizer>,
    index: usize,
    route: Route,
}

impl SplitChannel {
    pub fn new(synth: Arc<Synthesizer>, index: usize, route: Route) -> Result<Self> {
        if index == 0 || index > synth.block_length() {
            return Err(Error::Domain(format!("index {index} outside 1..={}", synth.block_length())));
        }
        Ok(SplitChannel { synth, index, route })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn block_length(&self) -> usize {
        self.synth.block_length()
    }

    pub fn synthesizer(&self) -> &Synthesizer {
        &self.synth
    }

    pub fn prefix_count(&self) -> usize {
        1 << (self.index - 1)
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.prefix_count() as f64
    }

    pub fn block(&self, prefix: &[u8]) -> Result<(DensityOperator, DensityOperator)> {
        if prefix.len() != self.index - 1 {
            return Err(Error::DimensionMismatch { expected: self.index - 1, found: prefix.len() });
        }
        match self.route {
            Route::Recursive => self.synth.block(prefix),
            Route::Enumeration => {
                let mut p = prefix.to_vec();
                p.push(0);
                let s0 = self.synth.state_direct(&p)?;
                *p.last_mut().unwrap() = 1;
                Ok((s0, self.synth.state_direct(&p)?))
            }
        }
    }

    /// All blocks in prefix order.
    pub fn blocks(&self) -> impl Iterator<Item = Result<(DensityOperator, DensityOperator)>> + '_ {
        (0..self.prefix_count()).map(move |p| self.block(&bits_of(p, self.index - 1)))
    }
}

/// W_N^{(i)} with blocks by direct enumeration.
pub fn synthesize(w: &CqChannel, n: usize, i: usize) -> Result<SplitChannel> {
    SplitChannel::new(Arc::new(Synthesizer::new(w, n)?), i, Route::Enumeration)
}

/// Σ_p 2^{−(i−1)} F(ρ̄_{p0}, ρ̄_{p1}) over dense blocks.
pub fn split_fidelity(s: &SplitChannel) -> Result<f64> {
    let mut f = 0.0;
    for b in s.blocks() {
        let (s0, s1) = b?;
        f += cholesky_fidelity(&s0, &s1)?;
    }
    Ok(f * s.weight())
}

/// Σ_p 2^{−(i−1)} [S(avg) − ½S(ρ̄_{p0}) − ½S(ρ̄_{p1})] over dense blocks.
pub fn split_holevo(s: &SplitChannel) -> Result<f64> {
    let mut acc = 0.0;
    for b in s.blocks() {
        let (s0, s1) = b?;
        let avg = DensityOperator::average(&[&s0, &s1]);
        acc += entropy_of(&avg)? - 0.5 * (entropy_of(&s0)? + entropy_of(&s1)?);
    }
    Ok(acc * s.weight())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{holevo_information, quantum_fidelity, ClassicalChannel};
    use crate::random::random_channel;
    use crate::rng::stream;

    #[test]
    fn recursive_states_match_enumeration() {
        let mut rng = stream(11, 0);
        let w = random_channel(2, &mut rng);
        for n in [2, 4, 8] {
            let s = Synthesizer::new(&w, n).unwrap();
            for k in 0..=n {
                for p in [0usize, (1 << k) - 1, (1 << k) / 3] {
                    let prefix = bits_of(p, k);
                    let a = s.state(&prefix).unwrap();
                    let b = s.state_direct(&prefix).unwrap();
                    assert!(a.op().max_abs_diff(b.op()) < 1e-12, "n={n} k={k} p={p}");
                }
            }
        }
    }

    #[test]
    fn trivial_blocklength() {
        let mut rng = stream(12, 0);
        let w = random_channel(2, &mut rng);
        let s = synthesize(&w, 1, 1).unwrap();
        let (a, b) = s.block(&[]).unwrap();
        assert!(a.op().max_abs_diff(w.rho0().op()) < 1e-15);
        assert!(b.op().max_abs_diff(w.rho1().op()) < 1e-15);
        let f = split_fidelity(&s).unwrap();
        assert!((f - quantum_fidelity(&w).unwrap()).abs() < 1e-9);
        let i = split_holevo(&s).unwrap();
        assert!((i - holevo_information(&w).unwrap()).abs() < 1e-9);
        let syn = Synthesizer::new(&w, 1).unwrap();
        assert!((syn.holevos().unwrap()[0] - i).abs() < 1e-9);
    }

    #[test]
    fn two_use_blocks() {
        let mut rng = stream(13, 0);
        let w = random_channel(2, &mut rng);
        let r = |x: u8| w.rho(x);
        let s1 = synthesize(&w, 2, 1).unwrap();
        let (a, b) = s1.block(&[]).unwrap();
        let mut e0 = r(0).kron(r(0)).matrix().scale(0.5);
        e0.add_scaled(r(1).kron(r(1)).matrix(), 0.5);
        let mut e1 = r(1).kron(r(0)).matrix().scale(0.5);
        e1.add_scaled(r(0).kron(r(1)).matrix(), 0.5);
        assert!(a.matrix().max_abs_diff(&e0) < 1e-14);
        assert!(b.matrix().max_abs_diff(&e1) < 1e-14);
        let s2 = synthesize(&w, 2, 2).unwrap();
        for u1 in 0..2u8 {
            let (a, b) = s2.block(&[u1]).unwrap();
            assert!(a.op().max_abs_diff(r(u1).kron(r(0)).op()) < 1e-14);
            assert!(b.op().max_abs_diff(r(u1 ^ 1).kron(r(1)).op()) < 1e-14);
        }
    }

    #[test]
    fn bsc_fidelity_recursion() {
        let c = ClassicalChannel::bsc(0.11).unwrap();
        let w = CqChannel::diagonal(&c).unwrap();
        let z = 2.0 * (0.11f64 * 0.89).sqrt();
        let f1 = split_fidelity(&synthesize(&w, 2, 1).unwrap()).unwrap();
        let f2 = split_fidelity(&synthesize(&w, 2, 2).unwrap()).unwrap();
        assert!((f2 - z * z).abs() < 1e-9);
        assert!((f2 - 0.39160).abs() < 1e-5);
        assert!(f1 <= 2.0 * z - z * z + 1e-12);
    }

    #[test]
    fn structured_matches_dense() {
        let mut rng = stream(14, 0);
        let w = random_channel(2, &mut rng);
        let syn = Arc::new(Synthesizer::new(&w, 4).unwrap());
        let f = syn.fidelities().unwrap();
        let h = syn.holevos().unwrap();
        for i in 1..=4 {
            let s = SplitChannel::new(syn.clone(), i, Route::Enumeration).unwrap();
            assert!((split_fidelity(&s).unwrap() - f[i - 1]).abs() < 1e-10);
            assert!((split_holevo(&s).unwrap() - h[i - 1]).abs() < 1e-10);
        }
    }

    #[test]
    fn perfect_and_useless_channels() {
        let zero = DensityOperator::diag(&[1.0, 0.0]).unwrap();
        let one = DensityOperator::diag(&[0.0, 1.0]).unwrap();
        let w = CqChannel::new(zero.clone(), one).unwrap();
        let syn = Synthesizer::new(&w, 4).unwrap();
        assert!(syn.fidelities().unwrap().iter().all(|f| f.abs() < 1e-9));
        let u = CqChannel::new(zero.clone(), zero).unwrap();
        let syn = Synthesizer::new(&u, 4).unwrap();
        assert!(syn.holevos().unwrap().iter().all(|i| i.abs() < 1e-9));
    }

    #[test]
    fn guard() {
        let w = CqChannel::diagonal(&ClassicalChannel::bsc(0.1).unwrap()).unwrap();
        assert!(matches!(Synthesizer::new(&w, 16), Err(Error::GuardExceeded { .. })));
    }
}
