//! Small integer helpers shared by every module: sieves, factorization,
//! square roots and the fundamental-discriminant test.

use num_integer::Integer;

/// Floor of the square root of a non-negative integer.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

pub fn isqrt_i128(n: i128) -> i128 {
    if n <= 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Returns `Some(r)` with `r*r == n` when `n` is a perfect square.
pub fn exact_sqrt(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let r = isqrt(n as u64) as i64;
    (r * r == n).then_some(r)
}

pub fn is_square(n: i64) -> bool {
    exact_sqrt(n).is_some()
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Inverse of `a` modulo `m` (m >= 1), if it exists, in `[0, m)`.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    if m == 1 {
        return Some(0);
    }
    let e = a.rem_euclid(m).extended_gcd(&m);
    (e.gcd == 1).then(|| e.x.rem_euclid(m))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization by trial division, as (prime, exponent) pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
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

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factorize(n).iter().all(|&(_, e)| e == 1)
}

/// Möbius function for n >= 1.
pub fn mobius(n: u64) -> i32 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Fundamental discriminant test: D = 1 mod 4 squarefree, or D = 4m with
/// m = 2, 3 mod 4 squarefree. D = 1 is reported as fundamental (the trivial
/// discriminant); callers that count quadratic fields exclude it.
pub fn is_fundamental(d: i64) -> bool {
    if d == 0 {
        return false;
    }
    let r = d.rem_euclid(4);
    if r == 1 {
        return is_squarefree(d.unsigned_abs());
    }
    if r == 0 {
        let m = d / 4;
        let mr = m.rem_euclid(4);
        return (mr == 2 || mr == 3) && is_squarefree(m.unsigned_abs());
    }
    false
}

/// Smallest-prime-factor table on `[0, n]`.
#[derive(Debug, Clone)]
pub struct SpfSieve {
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn new(n: u64) -> Self {
        let n = n as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Self { spf }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    /// Factorization via the table; falls back to trial division beyond it.
    pub fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        if n as usize >= self.spf.len() {
            return factorize(n);
        }
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            n /= p;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn is_squarefree(&self, n: u64) -> bool {
        n != 0 && self.factorize(n).iter().all(|&(_, e)| e == 1)
    }

    pub fn is_fundamental(&self, d: i64) -> bool {
        if d == 0 {
            return false;
        }
        let r = d.rem_euclid(4);
        if r == 1 {
            return self.is_squarefree(d.unsigned_abs());
        }
        if r == 0 {
            let m = d / 4;
            let mr = m.rem_euclid(4);
            return (mr == 2 || mr == 3) && self.is_squarefree(m.unsigned_abs());
        }
        false
    }
}

/// Primes up to and including `n` (simple Eratosthenes).
pub fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Squarefree flags on `[0, n]`.
pub fn squarefree_table(n: u64) -> Vec<bool> {
    let n = n as usize;
    let mut sf = vec![true; n + 1];
    sf[0] = false;
    let mut p = 2usize;
    while p * p <= n {
        let sq = p * p;
        let mut j = sq;
        while j <= n {
            sf[j] = false;
            j += sq;
        }
        p += 1;
    }
    sf
}

/// Distinct prime divisors of a squarefree q; `None` if q is not squarefree.
pub fn squarefree_primes(q: u64) -> Option<Vec<u64>> {
    if q == 0 {
        return None;
    }
    let f = factorize(q);
    f.iter()
        .all(|&(_, e)| e == 1)
        .then(|| f.into_iter().map(|(p, _)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_helpers() {
        assert_eq!(isqrt(0), 0);
        assert_eq!(isqrt(15), 3);
        assert_eq!(isqrt(16), 4);
        assert_eq!(isqrt(u64::MAX), 4294967295);
        assert_eq!(exact_sqrt(49), Some(7));
        assert_eq!(exact_sqrt(50), None);
        assert_eq!(exact_sqrt(-4), None);
    }

    #[test]
    fn fundamental_discriminants() {
        let neg: Vec<i64> = (-24..0).filter(|&d| is_fundamental(d)).collect();
        assert_eq!(neg, vec![-24, -23, -20, -19, -15, -11, -8, -7, -4, -3]);
        assert!(is_fundamental(-104));
        assert!(!is_fundamental(9));
        assert!(!is_fundamental(49));
        let sieve = SpfSieve::new(1000);
        for d in -1000..1000 {
            assert_eq!(sieve.is_fundamental(d), is_fundamental(d), "{d}");
        }
    }

    #[test]
    fn mobius_and_inverse() {
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(6), 1);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(2, 4), None);
        assert_eq!(mod_inverse(5, 1), Some(0));
    }

    #[test]
    fn sieve_factorization_matches_trial_division() {
        let s = SpfSieve::new(5000);
        for n in 1..5000u64 {
            assert_eq!(s.factorize(n), factorize(n));
        }
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }
}
