//! Sieved arithmetic functions, Mertens prefix sums and partial summation.

mod abel;
pub mod format;
pub mod sieve;
mod table;

pub use abel::abel_sum;
pub use sieve::{factorize_trial, PrimeSieve};
pub use table::{
    mertens_values, sieve_dk, sieve_euler_phi, sieve_mobius, sieve_phi_ratio, sieve_sigma_ratio,
    FunctionKind, FunctionTable, MertensValues, SieveConfig, TableValues, DEFAULT_MEMORY_BUDGET,
    DEFAULT_SEGMENT_THRESHOLD,
};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `mu(n)` by trial division.
pub fn mobius_of(n: u64) -> i64 {
    let f = factorize_trial(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Number of divisors by trial division.
pub fn divisor_count(n: u64) -> u64 {
    factorize_trial(n)
        .iter()
        .map(|&(_, e)| e as u64 + 1)
        .product()
}

/// `sigma(n) = sum_{d | n} d`.
pub fn divisor_sum(n: u64) -> u64 {
    factorize_trial(n)
        .iter()
        .map(|&(p, e)| (p.pow(e + 1) - 1) / (p - 1))
        .product()
}

/// All divisors of `n` in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mu_oracle(n: u64) -> i64 {
        let mut m = n;
        let mut sign = 1;
        let mut p = 2;
        while p <= m {
            if m % p == 0 {
                m /= p;
                if m % p == 0 {
                    return 0;
                }
                sign = -sign;
            }
            p += 1;
        }
        sign
    }

    fn phi_oracle(n: u64) -> i64 {
        (1..=n).filter(|&a| gcd(a, n) == 1).count() as i64
    }

    fn dk_oracle(k: u32, n: u64) -> i64 {
        if k == 1 {
            return 1;
        }
        (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| dk_oracle(k - 1, n / d))
            .sum()
    }

    #[test]
    fn mobius_examples() {
        let t = sieve_mobius(1).unwrap();
        assert_eq!(t.get_int(1), Some(1));
        let t = sieve_mobius(30).unwrap();
        assert_eq!(t.get_int(4), Some(0));
        assert_eq!(t.get_int(6), Some(1));
        assert_eq!(t.get_int(10), Some(1));
        assert_eq!(t.get_int(30), Some(-1));
    }

    #[test]
    fn phi_examples() {
        let t = sieve_euler_phi(100).unwrap();
        assert_eq!(t.get_int(1), Some(1));
        assert_eq!(t.get_int(12), Some(4));
        let total: i64 = (1..=100).map(|n| t.get_int(n).unwrap()).sum();
        let oracle: i64 = (1..=100).map(phi_oracle).sum();
        assert_eq!(oracle, 3044);
        assert_eq!(total, 3044);
    }

    #[test]
    fn dk_examples() {
        let d2 = sieve_dk(2, 10).unwrap();
        let d4 = sieve_dk(4, 10).unwrap();
        assert_eq!(d2.get_int(1), Some(1));
        assert_eq!(d4.get_int(1), Some(1));
        assert_eq!(dk_oracle(4, 6), 16);
        assert_eq!(d4.get_int(6), Some(16));
    }

    #[test]
    fn integer_tables_match_trial_division_to_ten_thousand() {
        let n = 10_000;
        let mu = sieve_mobius(n).unwrap();
        let phi = sieve_euler_phi(n).unwrap();
        let d3 = sieve_dk(3, n).unwrap();
        for i in 1..=n {
            assert_eq!(mu.get_int(i).unwrap(), mu_oracle(i as u64), "mu({i})");
            assert_eq!(mu.get_int(i).unwrap(), mobius_of(i as u64));
        }
        // gcd counting is quadratic; a stride keeps it quick
        for i in (1..=n).step_by(7) {
            assert_eq!(phi.get_int(i).unwrap(), phi_oracle(i as u64), "phi({i})");
        }
        for i in 1..=2_000 {
            assert_eq!(d3.get_int(i).unwrap(), dk_oracle(3, i as u64), "d3({i})");
        }
    }

    #[test]
    fn sigma_ratio_examples() {
        let t = sieve_sigma_ratio(1.0, 6).unwrap();
        assert_eq!(t.get(1), 1.0);
        assert!((t.get(6) - 2.0).abs() < 1e-14);
        let t = sieve_sigma_ratio(2.0, 4).unwrap();
        assert!((t.get(4) - 1.3125).abs() < 1e-14);
    }

    #[test]
    fn phi_ratio_examples() {
        let t = sieve_phi_ratio(1.0, 6).unwrap();
        assert_eq!(t.get(1), 1.0);
        assert!((t.get(4) - 0.5).abs() < 1e-15);
        assert!((t.get(6) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ratio_tables_match_divisor_enumeration() {
        let s = 0.75;
        let sig = sieve_sigma_ratio(s, 3000).unwrap();
        let ph = sieve_phi_ratio(s, 3000).unwrap();
        for n in 1..=3000u64 {
            let divs = divisors(n);
            let want: f64 = divs.iter().map(|&d| (d as f64).powf(-s)).sum();
            let got = sig.get(n as usize);
            assert!(
                (got - want).abs() <= 1e-12 * divs.len() as f64 * want,
                "sigma n = {n}"
            );
            let want: f64 = factorize_trial(n)
                .iter()
                .map(|&(p, _)| 1.0 - (p as f64).powf(-s))
                .product();
            assert!((ph.get(n as usize) - want).abs() <= 1e-14, "phi n = {n}");
        }
    }

    #[test]
    fn table_invariants() {
        let n = 5000;
        let phi = sieve_euler_phi(n).unwrap();
        let sig = sieve_sigma_ratio(0.6, n).unwrap();
        let ph = sieve_phi_ratio(0.6, n).unwrap();
        let d4 = sieve_dk(4, n).unwrap();
        for i in 1..=n {
            let p = phi.get_int(i).unwrap();
            assert!(p <= i as i64 && (p == i as i64) == (i == 1));
            assert!(sig.get(i) >= 1.0);
            let r = ph.get(i);
            assert!(r > 0.0 && r <= 1.0 && (r == 1.0) == (i == 1));
            assert!(d4.get_int(i).unwrap() >= 1);
        }
    }

    #[test]
    fn multiplicative_on_coprime_pairs() {
        let n = 10_000;
        let mu = sieve_mobius(n).unwrap();
        let phi = sieve_euler_phi(n).unwrap();
        let d4 = sieve_dk(4, n).unwrap();
        let sig = sieve_sigma_ratio(1.0, n).unwrap();
        let ph = sieve_phi_ratio(2.0, n).unwrap();
        for a in 1..=n {
            for b in 1..=n / a {
                if gcd(a as u64, b as u64) != 1 {
                    continue;
                }
                let ab = a * b;
                for t in [&mu, &phi, &d4] {
                    assert_eq!(
                        t.get_int(ab).unwrap(),
                        t.get_int(a).unwrap() * t.get_int(b).unwrap()
                    );
                }
                for t in [&sig, &ph] {
                    let want = t.get(a) * t.get(b);
                    assert!((t.get(ab) - want).abs() <= 1e-12 * want.abs(), "{ab}");
                }
            }
        }
    }

    #[test]
    fn d4_is_convolution_of_divisor_counts() {
        let n = 1000;
        let d = sieve_dk(2, n).unwrap();
        let d4 = sieve_dk(4, n).unwrap();
        for t in 1..=n {
            let conv: i64 = divisors(t as u64)
                .iter()
                .map(|&r| d.get_int(r as usize).unwrap() * d.get_int(t / r as usize).unwrap())
                .sum();
            assert_eq!(conv, d4.get_int(t).unwrap(), "t = {t}");
        }
    }

    #[test]
    fn mertens_examples() {
        let m = mertens_values(10_000).unwrap();
        assert_eq!(m.get(1), Some(1));
        assert_eq!(m.get(2), Some(0));
        assert_eq!(m.get(10), Some(-1));
        assert_eq!(m.get(0), Some(0));
        assert_eq!(m.at(10.9), Some(-1));
        let brute: i64 = (1..=10_000u64).map(mu_oracle).sum();
        assert_eq!(brute, -23);
        assert_eq!(m.get(10_000), Some(-23));
        for w in m.prefix().windows(2).skip(1) {
            assert!((w[1] - w[0]).abs() <= 1);
        }
    }

    #[test]
    fn segmented_sieves_agree_with_linear() {
        let linear = SieveConfig::default();
        let seg = SieveConfig {
            segment_threshold: 0,
            segment_len: 1013,
            ..SieveConfig::default()
        };
        let n = 200_000;
        assert_eq!(linear.mobius(n).unwrap(), seg.mobius(n).unwrap());
        assert_eq!(linear.euler_phi(n).unwrap(), seg.euler_phi(n).unwrap());
        let a = linear.phi_ratio(1.25, n).unwrap();
        let b = seg.phi_ratio(1.25, n).unwrap();
        for i in 1..=n {
            assert!((a.get(i) - b.get(i)).abs() <= 1e-14 * a.get(i), "{i}");
        }
    }

    #[test]
    fn budget_and_domain_errors() {
        let tiny = SieveConfig::with_budget(1024);
        assert!(matches!(
            tiny.mobius(1000),
            Err(crate::Error::LimitExceeded { .. })
        ));
        assert!(matches!(
            tiny.sigma_ratio(1.0, 1000),
            Err(crate::Error::LimitExceeded { .. })
        ));
        assert!(sieve_mobius(0).is_err());
        assert!(sieve_dk(1, 10).is_err());
        assert!(sieve_sigma_ratio(0.0, 10).is_err());
        assert!(sieve_phi_ratio(-1.0, 10).is_err());
    }

    #[test]
    fn dk_overflow_is_reported() {
        // d_k(2^e) = C(e + k - 1, k - 1) blows past i64 for large k
        let err = sieve_dk(2000, 1 << 12).unwrap_err();
        assert!(matches!(err, crate::Error::Overflow { .. }));
    }

    #[test]
    fn abel_sum_matches_direct_for_polynomials() {
        let a: Vec<f64> = (1..=50).map(|n| ((n * 37) % 11) as f64 - 5.0).collect();
        for m in 0..=3i32 {
            for &x in &[1.0, 7.5, 31.0, 50.0] {
                let direct: f64 = (1..=x as usize)
                    .map(|n| a[n - 1] * (n as f64).powi(m))
                    .sum();
                let f = |t: f64| t.powi(m);
                let fp = |t: f64| {
                    if m == 0 {
                        0.0
                    } else {
                        m as f64 * t.powi(m - 1)
                    }
                };
                let v = abel_sum(&a, f, fp, x).unwrap();
                assert!(
                    (v - direct).abs() <= 1e-10 * direct.abs().max(1.0),
                    "m = {m}, x = {x}: {v} vs {direct}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn mertens_is_prefix_of_mobius(n in 1usize..3000) {
            let mu = sieve_mobius(n).unwrap();
            let m = MertensValues::from_mobius(&mu);
            let mut acc = 0;
            for i in 1..=n {
                acc += mu.get_int(i).unwrap();
                prop_assert_eq!(m.get(i), Some(acc));
            }
        }
    }
}
