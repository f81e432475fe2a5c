//! Reproducible reductions and small sample statistics.

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise summation in a fixed split order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().fold(0.0, |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..n` without allocating.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(n: usize, f: &F) -> f64 {
    fn go<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= PAIRWISE_BLOCK {
            return (lo..hi).fold(0.0, |acc, i| acc + f(i));
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    go(0, n, f)
}

/// SplitMix64 finaliser, used to derive independent stream seeds.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Moments of a sample with standard errors for mean and variance.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SampleMoments {
    pub count: usize,
    pub mean: f64,
    pub var: f64,
    pub se_mean: f64,
    pub se_var: f64,
}

pub fn moments(xs: &[f64]) -> SampleMoments {
    let n = xs.len();
    if n < 2 {
        let mean = xs.first().copied().unwrap_or(0.0);
        return SampleMoments { count: n, mean, var: 0.0, se_mean: f64::NAN, se_var: f64::NAN };
    }
    let nf = n as f64;
    let mean = pairwise_sum(xs) / nf;
    let m2 = pairwise_sum_by(n, &|i| (xs[i] - mean).powi(2)) / nf;
    let m4 = pairwise_sum_by(n, &|i| (xs[i] - mean).powi(4)) / nf;
    let var = m2 * nf / (nf - 1.0);
    SampleMoments { count: n, mean, var, se_mean: (var / nf).sqrt(), se_var: ((m4 - m2 * m2).max(0.0) / nf).sqrt() }
}
