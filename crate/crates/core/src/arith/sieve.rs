//! Smallest-prime-factor sieves and the segmented variant used above the
//! configured threshold.

use rayon::prelude::*;

/// Linear sieve recording the smallest prime factor of every `n <= limit`.
///
/// `spf[p] == p` for primes; `spf[0]` and `spf[1]` are 0.
#[derive(Debug, Clone)]
pub struct PrimeSieve {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl PrimeSieve {
    pub fn new(limit: usize) -> Self {
        assert!(
            limit < u32::MAX as usize,
            "prime sieve limit must fit in u32"
        );
        let mut spf = vec![0u32; limit + 1];
        let mut primes = Vec::new();
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > si || m > limit {
                    break;
                }
                spf[m] = p;
            }
        }
        PrimeSieve { spf, primes }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn smallest_factor(&self, n: usize) -> u32 {
        self.spf[n]
    }

    pub(crate) fn spf(&self) -> &[u32] {
        &self.spf
    }

    /// Prime factorization `(p, e)` in increasing order of `p`.
    pub fn factorize(&self, mut n: usize) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        out
    }
}

/// Trial-division factorization, for arguments outside any sieve.
pub fn factorize_trial(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Primes up to `limit` by the sieve of Eratosthenes.
pub(crate) fn base_primes(limit: usize) -> Vec<u64> {
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Evaluates a multiplicative function on `1..=limit` segment by segment.
///
/// `apply(acc, p, e)` folds the prime power `p^e` into the running value;
/// primes are visited in increasing order within each `n`. Segments are
/// independent, so the output does not depend on the rayon thread count.
/// Index 0 of the returned vector holds `zero`.
pub(crate) fn segmented_multiplicative<T, F>(
    limit: usize,
    segment_len: usize,
    one: T,
    zero: T,
    apply: F,
) -> Vec<T>
where
    T: Copy + Send + Sync,
    F: Fn(T, u64, u32) -> T + Sync,
{
    let segment_len = segment_len.max(1);
    let primes = base_primes(isqrt(limit as u64) as usize);
    let mut out = vec![one; limit + 1];
    out[0] = zero;
    out[1..]
        .par_chunks_mut(segment_len)
        .enumerate()
        .for_each(|(c, chunk)| {
            let lo = 1 + (c * segment_len) as u64;
            let hi = lo + chunk.len() as u64;
            let mut rem: Vec<u64> = (lo..hi).collect();
            for &p in &primes {
                if p * p >= hi {
                    break;
                }
                let first = lo.div_ceil(p) * p;
                let mut m = first;
                while m < hi {
                    let i = (m - lo) as usize;
                    let mut e = 0;
                    while rem[i] % p == 0 {
                        rem[i] /= p;
                        e += 1;
                    }
                    chunk[i] = apply(chunk[i], p, e);
                    m += p;
                }
            }
            for (slot, &r) in chunk.iter_mut().zip(&rem) {
                if r > 1 {
                    *slot = apply(*slot, r, 1);
                }
            }
        });
    out
}
