use super::encoder::split_pairs;
use crate::channel::ClassicalChannel;

/// ln((L_a L_b + 1)/(L_a + L_b)) for λ = ln L, evaluated without overflow.
pub fn boxplus(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        return 0.0;
    }
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) => a.signum() * b.signum() * f64::INFINITY,
        (true, false) => a.signum() * b,
        (false, true) => b.signum() * a,
        (false, false) => {
            let s = a.signum() * b.signum();
            let m = a.abs().min(b.abs());
            if m == 0.0 {
                return 0.0;
            }
            s * m + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
        }
    }
}

/// λ_y = ln(p(y|0)/p(y|1)) per received symbol; 0/0 gives 0.
pub fn base_llrs(c: &ClassicalChannel, y: &[usize]) -> Vec<f64> {
    y.iter()
        .map(|&s| {
            let (p0, p1) = (c.prob(s, 0), c.prob(s, 1));
            if p0 == 0.0 && p1 == 0.0 {
                0.0
            } else {
                p0.ln() - p1.ln()
            }
        })
        .collect()
}

/// ln(W_N^{(i)}(y, u₁^{i−1}|0) / W_N^{(i)}(y, u₁^{i−1}|1)) from the per-symbol
/// log-likelihood ratios, with `prefix` = u₁^{i−1}. O(N) work.
pub fn split_llr(base: &[f64], prefix: &[u8]) -> f64 {
    let n = base.len();
    let i = prefix.len() + 1;
    debug_assert!(i <= n);
    if n == 1 {
        return base[0];
    }
    let h = n / 2;
    let j = (i + 1) / 2;
    let (a, b) = split_pairs(&prefix[..2 * (j - 1)]);
    let la = split_llr(&base[..h], &a);
    let lb = split_llr(&base[h..], &b);
    let out = if i % 2 == 1 {
        boxplus(la, lb)
    } else {
        let c = prefix[i - 2];
        if c == 0 {
            la + lb
        } else {
            lb - la
        }
    };
    if out.is_nan() {
        0.0
    } else {
        out
    }
}
