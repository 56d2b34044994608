//! Local conditions at primes: the mod-`p^2` maximality test, total
//! ramification, fundamental discriminants, and the dual exponential sums of
//! the nonmaximality indicator.

use num_complex::Complex64;
use num_rational::Ratio;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::arith::{self, SpfSieve};
use crate::error::{invalid, Error, Result};
use crate::forms::{discriminant, BinaryCubicForm};

/// Four residues modulo `q^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueForm {
    pub modulus: u64,
    pub x: [u64; 4],
}

impl ResidueForm {
    /// Reduction of `f` modulo `q^2`.
    pub fn reduce(f: &BinaryCubicForm, q: u64) -> Self {
        let n = (q * q) as i64;
        Self {
            modulus: q * q,
            x: f.coeffs().map(|c| c.rem_euclid(n) as u64),
        }
    }

    fn as_form(&self) -> BinaryCubicForm {
        let [a, b, c, d] = self.x.map(|v| v as i64);
        BinaryCubicForm::new(a, b, c, d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalProfile {
    pub p: u64,
    pub maximal_at_p: bool,
    pub totally_ramified_at_p: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximalityProfile {
    pub profiles: Vec<LocalProfile>,
    pub fundamental_disc: bool,
}

impl MaximalityProfile {
    pub fn is_maximal(&self) -> bool {
        self.profiles.iter().all(|l| l.maximal_at_p)
    }
}

fn check_prime(p: u64) -> Result<()> {
    if arith::is_prime(p) {
        Ok(())
    } else {
        Err(invalid(format!("{p} is not prime")))
    }
}

fn check_nondegenerate(f: &BinaryCubicForm) -> Result<i64> {
    match discriminant(f)? {
        0 => Err(Error::Degenerate),
        d => Ok(d),
    }
}

/// Values of `f`, `f_u`, `f_v` at `(x, y)`.
#[inline]
fn eval_with_gradient(c: &[i128; 4], x: i128, y: i128) -> (i128, i128, i128) {
    let [a, b, cc, d] = *c;
    let (x2, y2, xy) = (x * x, y * y, x * y);
    let f = a * x2 * x + b * x2 * y + cc * x * y2 + d * y2 * y;
    let fu = 3 * a * x2 + 2 * b * xy + cc * y2;
    let fv = b * x2 + 2 * cc * xy + 3 * d * y2;
    (f, fu, fv)
}

/// Nonmaximality at `p` of any form with these coefficients: either `p`
/// divides every coefficient, or some point of `P^1(F_p)` is a multiple root
/// mod `p` at which a lift of the point is a root mod `p^2`.
pub(crate) fn nonmaximal_coeffs(coeffs: [i64; 4], p: u64) -> bool {
    let p = p as i128;
    let p2 = p * p;
    let c = coeffs.map(|v| (v as i128).rem_euclid(p2));
    if c.iter().all(|v| v % p == 0) {
        return true;
    }
    let test = |x: i128, y: i128| {
        let (f, fu, fv) = eval_with_gradient(&c, x, y);
        f % p2 == 0 && fu % p == 0 && fv % p == 0
    };
    test(1, 0) || (0..p).any(|x| test(x, 1))
}

/// Whether `f` lies in `U_p`.
pub fn is_maximal_at(f: &BinaryCubicForm, p: u64) -> Result<bool> {
    check_nondegenerate(f)?;
    check_prime(p)?;
    Ok(!nonmaximal_coeffs(f.coeffs(), p))
}

/// Whether `f mod p` is a nonzero multiple of the cube of a linear form.
pub fn is_totally_ramified_at(f: &BinaryCubicForm, p: u64) -> Result<bool> {
    check_nondegenerate(f)?;
    check_prime(p)?;
    Ok(totally_ramified_coeffs(f.coeffs(), p))
}

pub(crate) fn totally_ramified_coeffs(coeffs: [i64; 4], p: u64) -> bool {
    let pi = p as i64;
    let c = coeffs.map(|v| v.rem_euclid(pi));
    let Some(k) = c.iter().position(|&v| v != 0) else {
        return false;
    };
    // The cube of y u - x v for each point [x : y] of P^1(F_p).
    let cube = |x: i64, y: i64| -> [i64; 4] {
        let m = |v: i128| v.rem_euclid(p as i128) as i64;
        let (x, y) = (x as i128, y as i128);
        [
            m(y * y * y),
            m(-3 * y * y * x),
            m(3 * y * x * x),
            m(-x * x * x),
        ]
    };
    let matches = |l: [i64; 4]| -> bool {
        if l[k] == 0 {
            return false;
        }
        let Some(inv) = arith::mod_inverse(l[k], pi) else {
            return false;
        };
        let lambda = (c[k] as i128 * inv as i128).rem_euclid(p as i128);
        (0..4).all(|i| (lambda * l[i] as i128).rem_euclid(p as i128) == c[i] as i128)
    };
    matches(cube(1, 0)) || (0..pi).any(|x| matches(cube(x, 1)))
}

/// Profiles at every prime whose square divides the discriminant.
pub fn maximality_profile(f: &BinaryCubicForm) -> Result<MaximalityProfile> {
    let disc = check_nondegenerate(f)?;
    let profiles = arith::factorize(disc.unsigned_abs())
        .into_iter()
        .filter(|&(_, e)| e >= 2)
        .map(|(p, _)| LocalProfile {
            p,
            maximal_at_p: !nonmaximal_coeffs(f.coeffs(), p),
            totally_ramified_at_p: totally_ramified_coeffs(f.coeffs(), p),
        })
        .collect();
    Ok(MaximalityProfile {
        profiles,
        fundamental_disc: arith::is_fundamental(disc),
    })
}

/// Maximality at every prime, factoring the discriminant with a sieve.
pub fn is_maximal_with(f: &BinaryCubicForm, disc: i64, sieve: &SpfSieve) -> bool {
    sieve
        .factorize(disc.unsigned_abs())
        .into_iter()
        .all(|(p, e)| e < 2 || !nonmaximal_coeffs(f.coeffs(), p))
}

/// Indicator of failing `U_p` at every prime dividing the squarefree `q`.
pub fn phi_q(x: &ResidueForm, q: u64) -> Result<u8> {
    let primes = arith::squarefree_primes(q)
        .ok_or_else(|| invalid(format!("modulus {q} is not squarefree")))?;
    if x.modulus != q * q {
        return Err(invalid(format!(
            "residue form modulus {} does not match q^2 = {}",
            x.modulus,
            q * q
        )));
    }
    let f = x.as_form();
    Ok(primes.iter().all(|&p| nonmaximal_coeffs(f.coeffs(), p)) as u8)
}

/// Count of residues mod `p^2` failing `U_p`, by exhaustive scan.
pub fn nonmaximal_residue_count_scan(p: u64) -> Result<u64> {
    check_prime(p)?;
    if p > 7 {
        return Err(invalid("exhaustive residue scan is limited to p <= 7"));
    }
    Ok(indicator_table(p).iter().filter(|&&b| b).count() as u64)
}

fn nonmaximal_count_at_prime(p: u64) -> u128 {
    let p = p as u128;
    p.pow(8) - p.pow(3) * (p * p - 1) * (p.pow(3) - 1)
}

/// `#{x mod q^2 : phi_q(x) = 1}`; by the Chinese remainder theorem this is
/// the product over `p | q` of the per-prime counts.
pub fn nonmaximal_residue_count(q: u64) -> Result<u128> {
    let primes = arith::squarefree_primes(q)
        .ok_or_else(|| invalid(format!("modulus {q} is not squarefree")))?;
    Ok(primes.iter().map(|&p| nonmaximal_count_at_prime(p)).product())
}

/// Nonmaximality indicator on all residues mod `p^2`, indexed by
/// `((a N + b) N + c) N + d` with `N = p^2`.
fn indicator_table(p: u64) -> Vec<bool> {
    let n = (p * p) as i64;
    let len = (n as usize).pow(4);
    let mut out = vec![false; len];
    let mut idx = 0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    out[idx] = nonmaximal_coeffs([a, b, c, d], p);
                    idx += 1;
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualSumReport {
    pub q: u64,
    /// Exact density as `(numerator, denominator)` in lowest terms.
    pub density_nonmaximal: (u128, u128),
    pub abs_sum: f64,
    pub term_count: u128,
}

impl DualSumReport {
    pub fn density_string(&self) -> String {
        format!("{}/{}", self.density_nonmaximal.0, self.density_nonmaximal.1)
    }

    pub fn density_f64(&self) -> f64 {
        self.density_nonmaximal.0 as f64 / self.density_nonmaximal.1 as f64
    }
}

/// Symplectic-type pairing `[x, y]` modulo `n`, with `inv3 = 3^{-1} mod n`.
#[inline]
fn pairing(x: &[i64; 4], y: &[i64; 4], inv3: i64, n: i64) -> i64 {
    let v = x[3] as i128 * y[0] as i128 - (inv3 as i128 * x[2] as i128 % n as i128) * y[1] as i128
        + (inv3 as i128 * x[1] as i128 % n as i128) * y[2] as i128
        - x[0] as i128 * y[3] as i128;
    v.rem_euclid(n as i128) as i64
}

fn check_dual_modulus(q: u64) -> Result<Vec<u64>> {
    let primes = arith::squarefree_primes(q)
        .ok_or_else(|| invalid(format!("modulus {q} is not squarefree")))?;
    if q % 3 == 0 {
        return Err(invalid("modulus divisible by 3 is not supported"));
    }
    Ok(primes)
}

/// Kahan-compensated sum in index order.
pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let y = v - comp;
        let t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    s
}

/// `Phi^_q(x)` by direct summation over the support of `Phi_q`.
pub fn phihat_direct(q: u64, x: &[i64; 4]) -> Result<Complex64> {
    let primes = check_dual_modulus(q)?;
    if q == 1 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if q > 14 {
        return Err(invalid("direct dual sum is limited to q <= 14"));
    }
    let n = (q * q) as i64;
    let inv3 = arith::mod_inverse(3, n).expect("3 is invertible");
    let table: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64))
        .collect();
    let xr = x.map(|v| v.rem_euclid(n));
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let y = [a, b, c, d];
                    if primes.iter().all(|&p| nonmaximal_coeffs(y, p)) {
                        let e = table[pairing(&xr, &y, inv3, n) as usize];
                        re.push(e.re);
                        im.push(e.im);
                    }
                }
            }
        }
    }
    let scale = (q as f64).powi(8);
    Ok(Complex64::new(kahan_sum(re) / scale, kahan_sum(im) / scale))
}

/// Full table of `Phi^_p(x)` for a prime `p != 3`, indexed like the residues
/// (`((x1 N + x2) N + x3) N + x4`), computed by a four-dimensional DFT.
pub fn phihat_table(p: u64) -> Result<Vec<Complex64>> {
    check_dual_modulus(p)?;
    check_prime(p)?;
    if p > 7 {
        return Err(invalid("dual sum tables are limited to p <= 7"));
    }
    let n = (p * p) as usize;
    let ind = indicator_table(p);
    let mut data: Vec<Complex64> = ind
        .iter()
        .map(|&b| Complex64::new(b as u8 as f64, 0.0))
        .collect();
    // Unnormalized inverse transform computes sum_y Phi(y) e(z . y / N).
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..4 {
        let stride = n.pow(3 - axis as u32);
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[start + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[start + k * stride] = *v;
                }
            }
        }
    }
    // Phi^(x) = F(z) / p^8 with z = (x4, -x3/3, x2/3, -x1).
    let ni = n as i64;
    let inv3 = arith::mod_inverse(3, ni).expect("3 is invertible");
    let scale = (p as f64).powi(8);
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    let mut idx = 0;
    for x1 in 0..ni {
        for x2 in 0..ni {
            for x3 in 0..ni {
                for x4 in 0..ni {
                    let z = [
                        x4,
                        (-inv3 * x3).rem_euclid(ni),
                        (inv3 * x2).rem_euclid(ni),
                        (-x1).rem_euclid(ni),
                    ];
                    let zi = ((z[0] as usize * n + z[1] as usize) * n + z[2] as usize) * n
                        + z[3] as usize;
                    out[idx] = data[zi] / scale;
                    idx += 1;
                }
            }
        }
    }
    Ok(out)
}

/// `sum_x |Phi^_q(x)|` with the exact nonmaximal density, for squarefree `q`
/// coprime to 3. Prime moduli up to 7 are computed from full tables; the
/// sum is multiplicative across coprime factors.
pub fn phihat_abs_sum(q: u64) -> Result<DualSumReport> {
    let primes = check_dual_modulus(q)?;
    let mut abs_sum = 1.0;
    for &p in &primes {
        let table = phihat_table(p)?;
        abs_sum *= kahan_sum(table.iter().map(|z| z.norm()));
    }
    let count = nonmaximal_residue_count(q)?;
    let total = (q as u128).pow(8);
    let r = Ratio::new(count, total);
    Ok(DualSumReport {
        q,
        density_nonmaximal: (*r.numer(), *r.denom()),
        abs_sum,
        term_count: total,
    })
}

/// `Phi^_q(x)` for composite `q = q1 q2` assembled from the factors:
/// `Phi^_q(x) = Phi^_{q1}(u x) Phi^_{q2}(v x)` with `1/q^2 = u/q1^2 + v/q2^2`.
pub fn phihat_by_crt(q1: u64, q2: u64, x: &[i64; 4]) -> Result<Complex64> {
    if arith::gcd(q1 as i64, q2 as i64) != 1 {
        return Err(invalid("factors must be coprime"));
    }
    let (n1, n2) = ((q1 * q1) as i64, (q2 * q2) as i64);
    let u = arith::mod_inverse(n2, n1).ok_or_else(|| invalid("no inverse"))?;
    let v = arith::mod_inverse(n1, n2).ok_or_else(|| invalid("no inverse"))?;
    let x1 = x.map(|c| (u as i128 * c as i128).rem_euclid(n1 as i128) as i64);
    let x2 = x.map(|c| (v as i128 * c as i128).rem_euclid(n2 as i128) as i64);
    Ok(phihat_direct(q1, &x1)? * phihat_direct(q2, &x2)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(a: i64, b: i64, c: i64, d: i64) -> BinaryCubicForm {
        BinaryCubicForm::new(a, b, c, d)
    }

    #[test]
    fn maximality_examples() {
        assert!(!is_maximal_at(&f(4, 2, 1, 1), 2).unwrap());
        for p in [2, 3, 5, 7, 11, 23] {
            assert!(is_maximal_at(&f(1, 0, -1, -1), p).unwrap());
        }
        assert!(is_maximal_at(&f(1, 1, -2, -1), 7).unwrap());
        assert!(is_maximal_at(&f(1, 0, 0, 0), 2).is_err());
        assert!(is_maximal_at(&f(1, 0, -1, -1), 4).is_err());
    }

    #[test]
    fn ramification_examples() {
        // (1,3,3,1) is itself degenerate, so the public entry point rejects
        // it; the residue-level test and a nondegenerate lift both apply.
        assert!(totally_ramified_coeffs([1, 3, 3, 1], 2));
        assert!(matches!(is_totally_ramified_at(&f(1, 3, 3, 1), 2), Err(Error::Degenerate)));
        assert!(is_totally_ramified_at(&f(1, 3, 3, 3), 2).unwrap());
        assert!(!is_totally_ramified_at(&f(1, 0, -1, -1), 23).unwrap());
        for p in [2, 3, 5, 7, 11] {
            assert!(!is_totally_ramified_at(&f(0, 1, -1, 0), p).unwrap());
        }
    }

    #[test]
    fn profile_examples() {
        let prof = maximality_profile(&f(1, 0, -1, -1)).unwrap();
        assert!(prof.profiles.is_empty());
        assert!(prof.fundamental_disc);
        assert!(arith::is_fundamental(-104));
        assert!(!arith::is_fundamental(9));
    }

    #[test]
    fn phi_examples() {
        let x = ResidueForm::reduce(&f(5, -3, 2, 7), 1);
        assert_eq!(phi_q(&x, 1).unwrap(), 1);
        assert_eq!(phi_q(&ResidueForm::reduce(&f(4, 2, 1, 1), 2), 2).unwrap(), 1);
        assert_eq!(phi_q(&ResidueForm::reduce(&f(1, 0, -1, -1), 2), 2).unwrap(), 0);
        assert!(phi_q(&ResidueForm::reduce(&f(1, 0, 0, 0), 4), 4).is_err());
    }

    #[test]
    fn residue_counts() {
        assert_eq!(nonmaximal_residue_count_scan(2).unwrap(), 88);
        assert_eq!(nonmaximal_residue_count(2).unwrap(), 88);
        assert_eq!(nonmaximal_residue_count(1).unwrap(), 1);
        assert_eq!(
            nonmaximal_residue_count_scan(3).unwrap() as u128,
            nonmaximal_residue_count(3).unwrap()
        );
        assert_eq!(nonmaximal_residue_count(10).unwrap(), 88 * 18625);
        assert!(nonmaximal_residue_count(4).is_err());
    }

    #[test]
    fn dual_sum_small() {
        let r = phihat_abs_sum(1).unwrap();
        assert_eq!(r.abs_sum, 1.0);
        let r = phihat_abs_sum(2).unwrap();
        assert_eq!(r.density_string(), "11/32");
        assert!(r.abs_sum >= r.density_f64());
        assert!(phihat_abs_sum(3).is_err());
        assert!(phihat_abs_sum(12).is_err());
    }

    #[test]
    fn fft_table_matches_direct_sum_at_q2() {
        let t = phihat_table(2).unwrap();
        let mut idx = 0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let direct = phihat_direct(2, &[a, b, c, d]).unwrap();
                        assert!((direct - t[idx]).norm() < 1e-12);
                        idx += 1;
                    }
                }
            }
        }
    }
}
