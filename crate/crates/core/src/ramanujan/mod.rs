//! Ramanujan sums `c_r(n)`, their partial sums over `r`, coefficient families
//! and truncated Ramanujan expansions.

mod expansion;
mod family;

use std::io::Write;

pub use expansion::{truncated_expansion, Expansion, ExpansionEvaluator};
pub use family::{coeff_phi, coeff_sigma, CoefficientFamily, FamilyDescriptor, FamilyKind};

use crate::arith::{divisors, factorize_trial, gcd, MertensValues, PrimeSieve, SieveConfig};
use crate::error::{domain, Error, Result};

/// `c_r(n) = sum_{d | gcd(n, r)} mu(r / d) d`, with `gcd(0, r) = r`.
///
/// Divisors of the gcd are enumerated from the factorization of `r`; the
/// Mobius factor is read off the exponents of `r / d`.
pub fn ramanujan_sum(r: u64, n: u64) -> i64 {
    assert!(r >= 1, "Ramanujan sums need r >= 1");
    let factors = factorize_trial(r);
    let g = gcd(n, r);
    // exponent of p in gcd(n, r)
    let gexp: Vec<u32> = factors
        .iter()
        .map(|&(p, _)| {
            let mut e = 0;
            let mut m = g;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            e
        })
        .collect();

    let mut total = 0i64;
    let mut j = vec![0u32; factors.len()];
    loop {
        // d = prod p^j, r / d has exponents a - j
        let mut mu = 1i64;
        let mut d = 1i64;
        for (i, &(p, a)) in factors.iter().enumerate() {
            match a - j[i] {
                0 => {}
                1 => mu = -mu,
                _ => mu = 0,
            }
            d *= (p as i64).pow(j[i]);
        }
        total += mu * d;

        let mut i = 0;
        while i < j.len() {
            if j[i] < gexp[i] {
                j[i] += 1;
                break;
            }
            j[i] = 0;
            i += 1;
        }
        if i == j.len() {
            break;
        }
    }
    total
}

/// `c_r(n)` from the prime factorization of `r`, one factor per prime power.
///
/// For `p^a || r` and `p^b || gcd(n, r)` the local factor of the divisor sum
/// is `[b >= a] p^a - [b >= a - 1] p^(a-1)`.
pub fn ramanujan_sum_factored(factors: &[(u64, u32)], n: u64) -> i64 {
    let mut value = 1i64;
    for &(p, a) in factors {
        let mut b = 0;
        if n == 0 {
            b = a;
        } else {
            let mut m = n;
            while b < a && m % p == 0 {
                m /= p;
                b += 1;
            }
        }
        let hi = (p as i64).pow(a);
        let lo = hi / p as i64;
        let local = if b >= a {
            hi - lo
        } else if b + 1 == a {
            -lo
        } else {
            return 0;
        };
        value *= local;
    }
    value
}

/// Result of the exponential-sum definition of `c_r(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: i64,
    /// Distance from the real part to the nearest integer.
    pub rounding_distance: f64,
}

pub const ORACLE_MAX_R: u64 = 10_000;
const ORACLE_MAX_DISTANCE: f64 = 1e-6;

/// `c_r(n)` straight from the sum of primitive `r`-th roots of unity.
pub fn ramanujan_sum_oracle(r: u64, n: u64) -> Result<OracleValue> {
    if r == 0 || r > ORACLE_MAX_R {
        return Err(domain(format!(
            "oracle needs 1 <= r <= {ORACLE_MAX_R}, got {r}"
        )));
    }
    let nr = n % r;
    let mut re = 0.0;
    for a in 1..=r {
        if gcd(a, r) == 1 {
            let k = (a * nr) % r;
            re += (std::f64::consts::TAU * k as f64 / r as f64).cos();
        }
    }
    let value = re.round();
    let rounding_distance = (re - value).abs();
    if rounding_distance > ORACLE_MAX_DISTANCE {
        return Err(Error::OracleRounding {
            r,
            n,
            distance: rounding_distance,
        });
    }
    Ok(OracleValue {
        value: value as i64,
        rounding_distance,
    })
}

/// `c_r(n)` for `1 <= r <= r_max`, `0 <= n <= n_max`, row-major by `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RamanujanSumTable {
    r_max: usize,
    n_max: usize,
    values: Vec<i64>,
}

impl RamanujanSumTable {
    pub fn new(r_max: usize, n_max: usize) -> Result<Self> {
        Self::with_config(r_max, n_max, &SieveConfig::default())
    }

    pub fn with_config(r_max: usize, n_max: usize, config: &SieveConfig) -> Result<Self> {
        if r_max == 0 {
            return Err(domain("r_max must be at least 1"));
        }
        let cells = r_max
            .checked_mul(n_max + 1)
            .ok_or(Error::Overflow { what: "table size" })?;
        config.check(cells, 8)?;
        let sieve = PrimeSieve::new(r_max);
        let width = n_max + 1;
        let mut values = vec![0i64; cells];
        for r in 1..=r_max {
            let factors = sieve.factorize(r);
            let period: Vec<i64> = (0..r as u64)
                .map(|n| ramanujan_sum_factored(&factors, n))
                .collect();
            let row = &mut values[(r - 1) * width..r * width];
            for (n, slot) in row.iter_mut().enumerate() {
                *slot = period[n % r];
            }
        }
        Ok(RamanujanSumTable {
            r_max,
            n_max,
            values,
        })
    }

    pub fn r_max(&self) -> usize {
        self.r_max
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn get(&self, r: usize, n: usize) -> i64 {
        self.row(r)[n]
    }

    /// `c_r(0), ..., c_r(n_max)`.
    pub fn row(&self, r: usize) -> &[i64] {
        assert!(r >= 1 && r <= self.r_max, "r = {r} outside table");
        let width = self.n_max + 1;
        &self.values[(r - 1) * width..r * width]
    }

    /// Rows `r,n,value` under a `r,n,value` header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,n,value")?;
        for r in 1..=self.r_max {
            for (n, v) in self.row(r).iter().enumerate() {
                writeln!(w, "{r},{n},{v}")?;
            }
        }
        Ok(())
    }
}

/// `sum_{r <= x} c_r(h)` through `sum_{d | h} d M(x / d)`.
pub fn ramanujan_partial_sum(h: u64, x: f64, mertens: &MertensValues) -> Result<i64> {
    if h == 0 {
        return Err(domain("h must be at least 1"));
    }
    if !(x >= 1.0) || !x.is_finite() {
        return Err(domain(format!("x must be at least 1, got {x}")));
    }
    let xf = x.floor() as u64;
    if xf as usize > mertens.limit() {
        return Err(Error::TableTooShort {
            have: mertens.limit(),
            need: xf as usize,
        });
    }
    let mut total = 0i64;
    for d in divisors(h) {
        let m = mertens.get((xf / d) as usize).expect("checked above");
        total = (d as i64)
            .checked_mul(m)
            .and_then(|t| total.checked_add(t))
            .ok_or(Error::Overflow {
                what: "partial sum of c_r(h)",
            })?;
    }
    Ok(total)
}

/// `sum_{r <= x} c_r(h)` by summing each term.
pub fn ramanujan_partial_sum_direct(h: u64, x: f64) -> Result<i64> {
    if h == 0 {
        return Err(domain("h must be at least 1"));
    }
    if !(x >= 1.0) || !x.is_finite() {
        return Err(domain(format!("x must be at least 1, got {x}")));
    }
    let xf = x.floor() as usize;
    let sieve = SieveConfig::default().prime_sieve(xf)?;
    Ok((1..=xf)
        .map(|r| ramanujan_sum_factored(&sieve.factorize(r), h))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{mertens_values, mobius_of, sieve_euler_phi, sieve_mobius};

    #[test]
    fn examples() {
        for n in [0, 1, 2, 17, 1000] {
            assert_eq!(ramanujan_sum(1, n), 1);
        }
        assert_eq!(ramanujan_sum(5, 10), 4);
        assert_eq!(ramanujan_sum(5, 7), -1);
        assert_eq!(ramanujan_sum(4, 2), -2);
        let o = ramanujan_sum_oracle(4, 2).unwrap();
        assert_eq!(o.value, -2);
        assert_eq!(ramanujan_sum_oracle(1, 0).unwrap().value, 1);
        assert_eq!(ramanujan_sum_oracle(6, 1).unwrap().value, 1);
    }

    #[test]
    fn oracle_equivalence_grid() {
        for r in 1..=64u64 {
            let factors = factorize_trial(r);
            for n in 0..=256u64 {
                let want = ramanujan_sum_oracle(r, n).unwrap().value;
                assert_eq!(ramanujan_sum(r, n), want, "c_{r}({n})");
                assert_eq!(ramanujan_sum_factored(&factors, n), want);
            }
        }
    }

    #[test]
    fn oracle_domain() {
        assert!(ramanujan_sum_oracle(0, 1).is_err());
        assert!(ramanujan_sum_oracle(10_001, 1).is_err());
    }

    #[test]
    fn structural_identities_to_200() {
        let phi = sieve_euler_phi(200).unwrap();
        for r in 1..=200u64 {
            assert_eq!(ramanujan_sum(r, 0), phi.get_int(r as usize).unwrap());
            let period: i64 = (1..=r).map(|n| ramanujan_sum(r, n)).sum();
            assert_eq!(period, if r == 1 { 1 } else { 0 }, "r = {r}");
            for n in 0..=400u64 {
                assert_eq!(ramanujan_sum(r, n), ramanujan_sum(r, gcd(n, r)));
            }
        }
        for r1 in 1..=200u64 {
            for r2 in 1..=200 / r1 {
                if gcd(r1, r2) != 1 {
                    continue;
                }
                for n in 0..=60u64 {
                    assert_eq!(
                        ramanujan_sum(r1 * r2, n),
                        ramanujan_sum(r1, n) * ramanujan_sum(r2, n)
                    );
                }
            }
        }
    }

    #[test]
    fn c_r_of_one_is_mobius() {
        let mu = sieve_mobius(10_000).unwrap();
        let t = RamanujanSumTable::new(10_000, 1).unwrap();
        for r in 1..=10_000usize {
            assert_eq!(t.get(r, 1), mu.get_int(r).unwrap());
        }
        assert_eq!(ramanujan_sum(9_999, 1), mobius_of(9_999));
    }

    #[test]
    fn table_matches_pointwise() {
        let t = RamanujanSumTable::new(40, 300).unwrap();
        for r in 1..=40 {
            for n in 0..=300 {
                assert_eq!(t.get(r, n), ramanujan_sum(r as u64, n as u64));
            }
        }
        let mut csv = Vec::new();
        RamanujanSumTable::new(2, 2)
            .unwrap()
            .write_csv(&mut csv)
            .unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "r,n,value\n1,0,1\n1,1,1\n1,2,1\n2,0,1\n2,1,-1\n2,2,1\n"
        );
    }

    #[test]
    fn partial_sum_examples() {
        let m = mertens_values(10_000).unwrap();
        assert_eq!(ramanujan_partial_sum(1, 1.0, &m).unwrap(), 1);
        assert_eq!(ramanujan_partial_sum(1, 10.0, &m).unwrap(), -1);
        let via_m: i64 = [1i64, 2, 3, 6]
            .iter()
            .map(|&d| d * m.get(100 / d as usize).unwrap())
            .sum();
        assert_eq!(ramanujan_partial_sum(6, 100.0, &m).unwrap(), via_m);
        assert_eq!(ramanujan_partial_sum_direct(6, 100.0).unwrap(), via_m);
    }

    #[test]
    fn partial_sum_routes_agree() {
        let m = mertens_values(10_000).unwrap();
        let sieve = PrimeSieve::new(10_000);
        for h in 1..=24u64 {
            let mut direct = 0i64;
            for r in 1..=10_000usize {
                direct += ramanujan_sum_factored(&sieve.factorize(r), h);
                if r % 97 == 0 || r == 10_000 || r < 50 {
                    assert_eq!(
                        ramanujan_partial_sum(h, r as f64 + 0.5, &m).unwrap(),
                        direct
                    );
                }
            }
        }
    }

    #[test]
    fn partial_sum_errors() {
        let m = mertens_values(100).unwrap();
        assert!(ramanujan_partial_sum(0, 10.0, &m).is_err());
        assert!(ramanujan_partial_sum(1, 0.5, &m).is_err());
        assert!(matches!(
            ramanujan_partial_sum(1, 101.0, &m),
            Err(Error::TableTooShort { .. })
        ));
    }
}
