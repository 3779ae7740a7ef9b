//! Prime-field arithmetic over `F_p` with `p < 2^62`.
//!
//! Residues are plain `u64` values in `[0, p)`. All arithmetic goes through a
//! [`PrimeField`], which also carries the primitive element used by the
//! transforms and the decoder.

use crate::error::{Error, Result};

/// Largest modulus accepted: `p < 2^62`.
pub const MAX_MODULUS_BITS: u32 = 62;

/// The field `F_p` together with its smallest primitive element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
    gamma: u64,
}

impl PrimeField {
    /// Builds `F_p`, checking primality and locating the smallest generator of `F_p^*`.
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || p >= 1u64 << MAX_MODULUS_BITS || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let gamma = smallest_primitive_root(p);
        Ok(Self { p, gamma })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Smallest element of multiplicative order `p - 1`.
    #[inline]
    pub fn gamma(&self) -> u64 {
        self.gamma
    }

    /// Reduces an arbitrary signed integer into `[0, p)`.
    #[inline]
    pub fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn reduce(&self, v: u64) -> u64 {
        v % self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.p <= 1u64 << 32 {
            (a * b) % self.p
        } else {
            ((a as u128 * b as u128) % self.p as u128) as u64
        }
    }

    pub fn pow(&self, base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        let mut b = base % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat.
    pub fn inv(&self, a: u64) -> Result<u64> {
        if a % self.p == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.p - 2))
    }

    pub fn div(&self, a: u64, b: u64) -> Result<u64> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: u64) -> Result<u64> {
        if a % self.p == 0 {
            return Err(Error::DivisionByZero);
        }
        let mut ord = self.p - 1;
        for (q, _) in factorize(self.p - 1) {
            while ord % q == 0 && self.pow(a, ord / q) == 1 {
                ord /= q;
            }
        }
        Ok(ord)
    }

    /// An element of exact order `n`, derived from the primitive element.
    pub fn root_of_unity(&self, n: u64) -> Result<u64> {
        if n == 0 || (self.p - 1) % n != 0 {
            return Err(Error::NoRootOfUnity { p: self.p, order: n });
        }
        Ok(self.pow(self.gamma, (self.p - 1) / n))
    }
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u64(acc, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Prime factors with multiplicity, smallest first.
pub fn prime_factors_with_multiplicity(n: u64) -> Vec<u64> {
    factorize(n)
        .into_iter()
        .flat_map(|(q, e)| std::iter::repeat(q).take(e as usize))
        .collect()
}

/// Smallest generator of `(Z/pZ)^*` for prime `p`.
pub fn smallest_primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let qs: Vec<u64> = factorize(p - 1).into_iter().map(|(q, _)| q).collect();
    (2..p)
        .find(|&g| qs.iter().all(|&q| pow_mod_u64(g, (p - 1) / q, p) != 1))
        .expect("a prime field has a primitive root")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sieve(n: usize) -> Vec<bool> {
        let mut s = vec![true; n + 1];
        s[0] = false;
        s[1] = false;
        let mut i = 2;
        while i * i <= n {
            if s[i] {
                let mut j = i * i;
                while j <= n {
                    s[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        s
    }

    #[test]
    fn miller_rabin_matches_sieve() {
        let s = sieve(20_000);
        for n in 0..=20_000u64 {
            assert_eq!(is_prime(n), s[n as usize], "n = {n}");
        }
    }

    #[test]
    fn large_primes() {
        assert!(is_prime(65537));
        assert!(is_prime((1u64 << 61) - 1));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
        assert!(PrimeField::new((1u64 << 61) - 1).is_ok());
    }

    #[test]
    fn generators() {
        assert_eq!(PrimeField::new(7).unwrap().gamma(), 3);
        assert_eq!(PrimeField::new(11).unwrap().gamma(), 2);
        assert_eq!(PrimeField::new(65537).unwrap().gamma(), 3);
        assert_eq!(PrimeField::new(97).unwrap().gamma(), 5);
    }

    #[test]
    fn rejects_composites() {
        assert!(matches!(PrimeField::new(12), Err(Error::NotPrime(12))));
        assert!(matches!(PrimeField::new(1), Err(Error::NotPrime(1))));
        assert!(PrimeField::new(1u64 << 62).is_err());
    }

    #[test]
    fn inverse_of_zero() {
        let f = PrimeField::new(13).unwrap();
        assert!(matches!(f.inv(0), Err(Error::DivisionByZero)));
    }

    #[test]
    fn small_field_tables() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            let f = PrimeField::new(p).unwrap();
            for a in 0..p {
                for b in 0..p {
                    assert_eq!(f.add(a, b), (a + b) % p);
                    assert_eq!(f.sub(a, b), (a + p - b) % p);
                    assert_eq!(f.mul(a, b), a * b % p);
                }
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
            }
            assert_eq!(f.order(f.gamma()).unwrap(), p - 1);
        }
    }

    #[test]
    fn factorization_roundtrip() {
        for n in 1..5000u64 {
            let prod: u64 = factorize(n).iter().map(|&(q, e)| q.pow(e)).product();
            assert_eq!(prod, n);
        }
        assert_eq!(factorize(65536), vec![(2, 16)]);
        assert_eq!(prime_factors_with_multiplicity(58), vec![2, 29]);
    }
}
