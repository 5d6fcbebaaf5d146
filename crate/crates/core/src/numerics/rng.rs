//! Reproducible random streams.
//!
//! A stream is a ChaCha generator keyed by the seed with the stream id as
//! its nonce, so `(seed, id)` pairs give independent, order-free sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

pub type StreamRng = ChaCha12Rng;

pub fn rng_stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Uniform draw from the open interval (0, 1).
pub fn uniform_open(rng: &mut impl Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

pub fn std_normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_sequence() {
        let mut a = rng_stream(42, 7);
        let mut b = rng_stream(42, 7);
        for _ in 0..1000 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }

    #[test]
    fn uniform_mean() {
        let mut r = rng_stream(1, 0);
        let n = 1_000_000;
        let m = (0..n).map(|_| uniform_open(&mut r)).sum::<f64>() / n as f64;
        assert!((m - 0.5).abs() < 0.002, "mean {m}");
    }

    #[test]
    fn streams_uncorrelated() {
        let mut a = rng_stream(9, 0);
        let mut b = rng_stream(9, 1);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| uniform_open(&mut a)).collect();
        let ys: Vec<f64> = (0..n).map(|_| uniform_open(&mut b)).collect();
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (x, y) in xs.iter().zip(&ys) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
        }
        let r = sxy / (sxx * syy).sqrt();
        assert!(r.abs() < 0.01, "r = {r}");
    }
}
