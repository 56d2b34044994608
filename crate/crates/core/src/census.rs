//! Counting functions over enumerated class streams: cubic fields, weighted
//! class counts, residue-class tables, sieve terms, the nonmaximality
//! identity, and quadratic fields.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, SpfSieve};
use crate::enumeration::{enumerate_all_orbits, enumerate_orbits, FieldStream, Scope};
use crate::error::{invalid, Result};
use crate::forms::{BinaryCubicForm, OrbitRecord};
use crate::maximality::{is_maximal_with, nonmaximal_coeffs};
use crate::sign::Sign;

/// Sieve size cap; larger discriminants fall back to trial division.
const SIEVE_CAP: u64 = 1 << 25;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusTable {
    pub sign: Sign,
    pub max_disc: u64,
    pub modulus: u64,
    pub counts: Vec<u64>,
    pub total: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveTerm {
    pub q: u64,
    pub mu: i32,
    pub count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedCount {
    pub sign: Sign,
    pub max_disc: u64,
    pub value: Ratio<i64>,
}

impl WeightedCount {
    pub fn to_f64(&self) -> f64 {
        *self.value.numer() as f64 / *self.value.denom() as f64
    }
}

/// `6 / |Stab|`, so that weighted sums stay integral until the end.
#[inline]
fn six_over_stab(r: &OrbitRecord) -> i64 {
    6 / r.stab_order as i64
}

/// Irreducible classes of one sign with their maximality flags, ready for
/// repeated counting at any bound up to `max_disc`.
#[derive(Clone, Debug)]
pub struct Census {
    stream: FieldStream,
    maximal: Vec<bool>,
}

impl Census {
    /// Build from a stream; reducible records are dropped.
    pub fn from_stream(stream: FieldStream) -> Self {
        let stream = stream.irreducible();
        let sieve = SpfSieve::new(stream.max_disc.min(SIEVE_CAP));
        let maximal = stream
            .records
            .par_iter()
            .map(|r| is_maximal_with(&r.canonical, r.disc, &sieve))
            .collect();
        Self { stream, maximal }
    }

    pub fn new(sign: Sign, max_disc: u64) -> Result<Self> {
        Ok(Self::from_stream(enumerate_orbits(sign, max_disc)?))
    }

    pub fn sign(&self) -> Sign {
        self.stream.sign
    }

    pub fn max_disc(&self) -> u64 {
        self.stream.max_disc
    }

    pub fn stream(&self) -> &FieldStream {
        &self.stream
    }

    /// Records with `|disc| < x` paired with their maximality flag.
    fn prefix(&self, x: u64) -> Result<impl Iterator<Item = (&OrbitRecord, bool)> + Clone> {
        if x > self.stream.max_disc {
            return Err(invalid(format!(
                "census covers X <= {}, asked for {x}",
                self.stream.max_disc
            )));
        }
        let end = self
            .stream
            .records
            .partition_point(|r| r.disc.unsigned_abs() < x);
        Ok(self.stream.records[..end]
            .iter()
            .zip(self.maximal[..end].iter().copied()))
    }

    /// Cubic fields with `0 < +-disc < x`.
    pub fn count_cubic_fields(&self, x: u64) -> Result<u64> {
        Ok(self.prefix(x)?.filter(|(_, m)| *m).count() as u64)
    }

    /// Discriminants of the cubic fields with `0 < +-disc < x`, ascending in
    /// absolute value.
    pub fn field_discriminants(&self, x: u64) -> Result<Vec<i64>> {
        Ok(self.prefix(x)?.filter(|(_, m)| *m).map(|(r, _)| r.disc).collect())
    }

    /// `sum 1/|Stab|` over irreducible classes with `0 < +-disc < x`.
    pub fn count_weighted_classes(&self, x: u64) -> Result<WeightedCount> {
        let six: i64 = self.prefix(x)?.map(|(r, _)| six_over_stab(r)).sum();
        Ok(WeightedCount {
            sign: self.sign(),
            max_disc: x,
            value: Ratio::new(six, 6),
        })
    }

    /// Cubic fields tallied by `disc mod m`.
    pub fn census_by_progression(&self, x: u64, m: u64) -> Result<CensusTable> {
        if m == 0 || m > 10_000 {
            return Err(invalid(format!("modulus must lie in 1..=10000, got {m}")));
        }
        let mut counts = vec![0u64; m as usize];
        for (r, _) in self.prefix(x)?.filter(|(_, mx)| *mx) {
            counts[r.disc.rem_euclid(m as i64) as usize] += 1;
        }
        let total = counts.iter().sum();
        Ok(CensusTable {
            sign: self.sign(),
            max_disc: x,
            modulus: m,
            counts,
            total,
        })
    }

    /// Irreducible classes nonmaximal at every prime dividing `q`.
    pub fn count_nonmaximal_q(&self, q: u64, x: u64) -> Result<SieveTerm> {
        let primes = arith::squarefree_primes(q)
            .ok_or_else(|| invalid(format!("q = {q} is not squarefree")))?;
        let q2 = (q as u128) * (q as u128);
        let count = self
            .prefix(x)?
            .filter(|(r, _)| {
                (r.disc.unsigned_abs() as u128) % q2 == 0
                    && primes
                        .iter()
                        .all(|&p| nonmaximal_coeffs(r.canonical.coeffs(), p))
            })
            .count() as u64;
        Ok(SieveTerm {
            q,
            mu: arith::mobius(q),
            count,
        })
    }

    /// All nonzero sieve terms `N(q, x)` for squarefree `q` with `q^2 < x`.
    pub fn sieve_terms(&self, x: u64) -> Result<Vec<SieveTerm>> {
        let q_max = arith::isqrt(x.saturating_sub(1));
        let sf = arith::squarefree_table(q_max);
        (1..=q_max)
            .filter(|&q| sf[q as usize])
            .map(|q| self.count_nonmaximal_q(q, x))
            .collect()
    }

    /// `sum_q mu(q) N(q, x)`.
    pub fn mobius_assembly(&self, x: u64) -> Result<i64> {
        Ok(self
            .sieve_terms(x)?
            .iter()
            .map(|t| t.mu as i64 * t.count as i64)
            .sum())
    }
}

/// Number of cubic fields with `0 < +-disc < X`.
pub fn count_cubic_fields(sign: Sign, x: u64) -> Result<u64> {
    Census::new(sign, x)?.count_cubic_fields(x)
}

pub fn count_weighted_classes(sign: Sign, x: u64) -> Result<WeightedCount> {
    Census::new(sign, x)?.count_weighted_classes(x)
}

pub fn census_by_progression(sign: Sign, x: u64, m: u64) -> Result<CensusTable> {
    Census::new(sign, x)?.census_by_progression(x, m)
}

pub fn count_nonmaximal_q(sign: Sign, q: u64, x: u64) -> Result<SieveTerm> {
    Census::new(sign, x)?.count_nonmaximal_q(q, x)
}

/// Number of points of `P^1(F_p)` at which `f` vanishes mod `p`.
pub fn roots_mod_p(f: &BinaryCubicForm, p: u64) -> u64 {
    let pi = p as i128;
    let c = f.coeffs().map(|v| (v as i128).rem_euclid(pi));
    if c.iter().all(|&v| v == 0) {
        return p + 1;
    }
    let at_infinity = u64::from(c[0] == 0);
    let affine = (0..pi)
        .filter(|&x| (((c[0] * x + c[1]) % pi * x + c[2]) % pi * x + c[3]) % pi == 0)
        .count() as u64;
    at_infinity + affine
}

/// Both sides of the nonmaximality identity at `p`, over all nondegenerate
/// classes weighted by `1/|Stab|`:
/// `lhs = sum_{nonmaximal at p, |disc| < X} 1/|Stab|` and
/// `rhs = P(X/p^2) - P(X/p^4) + T(X/p^4)`, where `P(Y)` weights each class
/// by its number of roots in `P^1(F_p)` and `T(Y)` is the plain weighted
/// count. Bounds `|disc| < X/p^k` are tested as `|disc| p^k < X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BstReport {
    pub p: u64,
    pub sign: Sign,
    pub max_disc: u64,
    pub lhs: Ratio<i64>,
    pub rhs: Ratio<i64>,
}

impl BstReport {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn verify_bst_identity(p: u64, sign: Sign, x: u64) -> Result<BstReport> {
    let stream = enumerate_all_orbits(sign, x)?;
    bst_from_stream(p, &stream, x)
}

/// Same as [`verify_bst_identity`] on an existing all-classes stream.
pub fn bst_from_stream(p: u64, stream: &FieldStream, x: u64) -> Result<BstReport> {
    if !arith::is_prime(p) {
        return Err(invalid(format!("{p} is not prime")));
    }
    if stream.scope != Scope::All {
        return Err(invalid("the identity needs reducible classes too"));
    }
    if x > stream.max_disc {
        return Err(invalid("stream does not cover the requested bound"));
    }
    let below = |r: &OrbitRecord, k: u32| (r.disc.unsigned_abs() as u128) * (p as u128).pow(k) < x as u128;
    let (mut lhs6, mut p2, mut p4, mut t4) = (0i64, 0i64, 0i64, 0i64);
    for r in stream.records.iter().filter(|r| below(r, 0)) {
        let w = six_over_stab(r);
        if nonmaximal_coeffs(r.canonical.coeffs(), p) {
            lhs6 += w;
        }
        if below(r, 2) {
            let roots = roots_mod_p(&r.canonical, p) as i64;
            p2 += roots * w;
            if below(r, 4) {
                p4 += roots * w;
                t4 += w;
            }
        }
    }
    Ok(BstReport {
        p,
        sign: stream.sign,
        max_disc: x,
        lhs: Ratio::new(lhs6, 6),
        rhs: Ratio::new(p2 - p4 + t4, 6),
    })
}

/// Number of fundamental discriminants `D != 1` with `|D| < X`.
pub fn count_quadratic_fields(x: u64) -> u64 {
    if x <= 1 {
        return 0;
    }
    let sf = arith::squarefree_table(x - 1);
    let mut n = 0u64;
    for k in 2..x {
        if !sf[k as usize] {
            continue;
        }
        // -k and k with D = 1 mod 4.
        match k % 4 {
            3 => n += 1, // -k = 1 mod 4
            1 => n += 1, // k = 1 mod 4
            _ => {}
        }
    }
    // D = +-4m with m = 2, 3 mod 4 squarefree.
    let m_max = (x - 1) / 4;
    for m in 1..=m_max {
        if !sf[m as usize] {
            continue;
        }
        match m % 4 {
            2 => n += 2,         // both 4m and -4m
            3 | 1 => n += 1,     // 4m for m = 3, -4m for -m = 3 mod 4
            _ => {}
        }
    }
    n
}
