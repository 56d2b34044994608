//! Ideals of `Q(sqrt(-D))` whose `k`-th power is principal, through the
//! quadruples `l m^k = l^2 n^2 + t^2 D`, their Heegner points, and counts of
//! those points in cusp regions and the fundamental domain.
//!
//! Throughout `D` is squarefree with `D = 2 mod 4`, so the ring of integers
//! is `Z[sqrt(-D)]` of discriminant `-4D`. The ideal `[N, beta + sqrt(-D)]`
//! corresponds to the form `(N, -2 beta, (beta^2 + D) / N)` and to the point
//! `(beta + sqrt(-D)) / N` of the upper half plane.

use std::collections::BTreeSet;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::classgroups::{compose_unchecked, power, reduce, QuadForm};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SoundararajanSolution {
    pub l: u64,
    pub m: u64,
    pub n: u64,
    pub t: u64,
    pub d: u64,
    pub k: u32,
}

impl SoundararajanSolution {
    pub fn norm(&self) -> u64 {
        self.l * self.m
    }

    /// Checks the defining equation and coprimality conditions.
    pub fn is_valid(&self) -> bool {
        let (l, m, n, t, d) = (
            self.l as u128,
            self.m as u128,
            self.n as u128,
            self.t as u128,
            self.d as u128,
        );
        let Some(mk) = m.checked_pow(self.k) else {
            return false;
        };
        l > 0
            && m > 0
            && n > 0
            && t > 0
            && d % l == 0
            && l * mk == l * l * n * n + t * t * d
            && m.gcd(&(n * t * d)) == 1
    }
}

/// The primitive ideal `[norm, beta + sqrt(-D)]` of `Z[sqrt(-D)]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IdealBasis {
    pub norm: u64,
    pub beta: u64,
    pub d: u64,
}

impl IdealBasis {
    pub fn new(norm: u64, beta: u64, d: u64) -> Result<Self> {
        if norm == 0 {
            return Err(invalid("ideal norm must be positive"));
        }
        let beta = beta % norm;
        let n = norm as u128;
        if ((beta as u128).pow(2) + d as u128) % n != 0 {
            return Err(Error::Internal(format!(
                "beta^2 + D = {}^2 + {d} is not divisible by {norm}",
                beta
            )));
        }
        Ok(Self { norm, beta, d })
    }

    /// Binary quadratic form of discriminant `-4D` attached to the ideal.
    pub fn form(&self) -> QuadForm {
        let (n, b, d) = (self.norm as i64, self.beta as i64, self.d as i64);
        QuadForm::new(n, -2 * b, (b * b + d) / n)
    }

    pub fn conjugate(&self) -> Self {
        Self {
            norm: self.norm,
            beta: (self.norm - self.beta) % self.norm,
            d: self.d,
        }
    }

    pub fn is_self_conjugate(&self) -> bool {
        *self == self.conjugate()
    }

    pub fn is_principal(&self) -> bool {
        reduce(self.form()) == QuadForm::identity(-4 * self.d as i64)
    }

    pub fn power_is_principal(&self, k: u64) -> bool {
        power(&self.form(), k) == QuadForm::identity(-4 * self.d as i64)
    }

    /// Orientation-free label of the pair `{a, conj(a)}`.
    pub fn pair_key(&self) -> (u64, u64) {
        (self.norm, self.beta.min(self.conjugate().beta))
    }

    /// Whether `n + t sqrt(-D)` lies in the ideal.
    pub fn contains(&self, n: i128, t: i128) -> bool {
        // n + t sqrt(-D) = t (beta + sqrt(-D)) + (n - t beta).
        (n - t * self.beta as i128).rem_euclid(self.norm as i128) == 0
    }
}

/// A point `x + i y` of the upper half plane with exact coordinates
/// `x = x_num / x_den` and `y^2 = y2_num / y2_den`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeegnerPoint {
    pub x_num: i64,
    pub x_den: i64,
    pub y2_num: u64,
    pub y2_den: u64,
    pub x: f64,
    pub y: f64,
    pub source: Option<SoundararajanSolution>,
}

impl HeegnerPoint {
    /// Point `(-B + sqrt(B^2 - 4AC)) / 2A` of a positive definite form whose
    /// discriminant is `-4D`: `x = -B / 2A`, `y = sqrt(D) / A`.
    fn of_form(f: &QuadForm, d: u64, source: Option<SoundararajanSolution>) -> Self {
        let g = f.b.gcd(&(2 * f.a));
        let (x_num, x_den) = (-f.b / g, 2 * f.a / g);
        let a2 = (f.a as u64).pow(2);
        let g2 = d.gcd(&a2);
        Self {
            x_num,
            x_den,
            y2_num: d / g2,
            y2_den: a2 / g2,
            x: x_num as f64 / x_den as f64,
            y: (d as f64).sqrt() / f.a as f64,
            source,
        }
    }

    /// Exact test of `|z| >= 1`, `-1/2 <= x < 1/2`, and `x >= 0` on `|z| = 1`.
    pub fn is_reduced(&self) -> bool {
        let (xn, xd) = (self.x_num as i128, self.x_den as i128);
        let (yn, yd) = (self.y2_num as i128, self.y2_den as i128);
        // |z|^2 - 1 = (xn^2 yd + yn xd^2 - xd^2 yd) / (xd^2 yd).
        let circle = xn * xn * yd + yn * xd * xd - xd * xd * yd;
        -xd <= 2 * xn && 2 * xn < xd && circle >= 0 && (circle > 0 || xn >= 0)
    }
}

/// Reduce a positive definite form so that its point satisfies the boundary
/// convention `-1/2 <= x < 1/2`, with `x >= 0` on the unit circle.
pub fn reduce_for_points(f: QuadForm) -> QuadForm {
    let mut g = reduce(f);
    if g.a == g.c && g.b > 0 {
        g.b = -g.b;
    }
    g
}

/// Floating-point reduction of a point into the same closed domain.
pub fn reduce_point(mut x: f64, mut y: f64) -> (f64, f64) {
    for _ in 0..10_000 {
        x -= (x + 0.5).floor();
        let r2 = x * x + y * y;
        if r2 < 1.0 - 1e-15 {
            x = -x / r2;
            y /= r2;
        } else {
            break;
        }
    }
    if (x * x + y * y - 1.0).abs() <= 1e-15 && x < 0.0 && x > -0.5 {
        x = -x;
    }
    (x, y)
}

fn check_parameters(d: u64, k: u32) -> Result<()> {
    if d % 4 != 2 || !arith::is_squarefree(d) {
        return Err(invalid(format!("D = {d} must be squarefree and 2 mod 4")));
    }
    if k < 3 || k % 2 == 0 {
        return Err(invalid(format!("k must be odd and at least 3, got {k}")));
    }
    Ok(())
}

fn divisors(n: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (1..=arith::isqrt(n))
        .filter(|i| n % i == 0)
        .flat_map(|i| [i, n / i])
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// All quadruples with `l m <= B`, ordered by `(l, m, n, t)`.
pub fn soundararajan_solutions(d: u64, k: u32, bound: u64) -> Result<Vec<SoundararajanSolution>> {
    check_parameters(d, k)?;
    Ok(solutions_unchecked(d, k, bound))
}

fn solutions_unchecked(d: u64, k: u32, bound: u64) -> Vec<SoundararajanSolution> {
    let mut out = Vec::new();
    let dd = d as u128;
    for l in divisors(d) {
        if l > bound {
            break;
        }
        let l2 = (l as u128) * (l as u128);
        for m in 1..=bound / l {
            if m.gcd(&d) != 1 {
                continue;
            }
            let Some(lmk) = (m as u128).checked_pow(k).map(|v| v * l as u128) else {
                break;
            };
            let t_max = arith::isqrt_i128((lmk / dd) as i128) as u128;
            if lmk < 1 << 62 {
                scan_t_u64(lmk as u64, l, m, d, k, t_max as u64, &mut out);
                continue;
            }
            for t in 1..=t_max {
                let rem = lmk - t * t * dd;
                if rem == 0 || rem % l2 != 0 {
                    continue;
                }
                let n2 = rem / l2;
                let n = arith::isqrt_i128(n2 as i128) as u128;
                if n * n != n2 {
                    continue;
                }
                let (n, t) = (n as u64, t as u64);
                if n.gcd(&m) != 1 || t.gcd(&m) != 1 {
                    continue;
                }
                out.push(SoundararajanSolution { l, m, n, t, d, k });
            }
        }
    }
    out.sort_unstable();
    out
}

fn scan_t_u64(lmk: u64, l: u64, m: u64, d: u64, k: u32, t_max: u64, out: &mut Vec<SoundararajanSolution>) {
    let l2 = l * l;
    for t in 1..=t_max {
        let rem = lmk - t * t * d;
        if rem == 0 || rem % l2 != 0 {
            continue;
        }
        let n2 = rem / l2;
        let n = arith::isqrt(n2);
        if n * n != n2 || n.gcd(&m) != 1 || t.gcd(&m) != 1 {
            continue;
        }
        out.push(SoundararajanSolution { l, m, n, t, d, k });
    }
}

/// `[lm, l (n t^{-1} mod m) + sqrt(-D)]`.
pub fn ideal_of_solution(s: &SoundararajanSolution) -> Result<IdealBasis> {
    if !s.is_valid() {
        return Err(invalid(format!("{s:?} is not a valid solution")));
    }
    let m = s.m as i64;
    let t_inv = arith::mod_inverse((s.t % s.m) as i64, m)
        .ok_or_else(|| Error::Internal(format!("t not invertible mod m in {s:?}")))?;
    let r = ((s.n % s.m) as i128 * t_inv as i128).rem_euclid(m as i128) as u64;
    IdealBasis::new(s.norm(), s.l * r, s.d)
}

/// Lift of `beta` from a root of `x^2 = -D mod m` to a root mod `m^e`, for
/// odd `m` coprime to `D`.
pub fn hensel_lift(beta: u64, d: u64, m: u64, e: u32) -> Result<u64> {
    let target = (m as u128).checked_pow(e).ok_or(Error::Overflow("hensel lift"))?;
    if target > i64::MAX as u128 {
        return Err(Error::Overflow("hensel lift"));
    }
    let mut b = (beta % m) as i128;
    let mut modulus = m as i128;
    while (modulus as u128) < target {
        modulus = (modulus * modulus).min(target as i128);
        let f = (b * b + d as i128).rem_euclid(modulus);
        let inv = arith::mod_inverse((2 * b).rem_euclid(modulus) as i64, modulus as i64)
            .ok_or_else(|| Error::Internal("derivative not invertible".into()))?;
        b = (b - f * inv as i128 % modulus).rem_euclid(modulus);
    }
    Ok(b as u64)
}

/// For `l = 1`, checks that the `k`-th power of the ideal is
/// `(n + t sqrt(-D))`, by comparing `[m^k, beta_k + sqrt(-D)]` with the
/// principal ideal's basis. Returns `None` when `l > 1`.
pub fn power_generator_check(s: &SoundararajanSolution) -> Result<Option<bool>> {
    if s.l != 1 {
        return Ok(None);
    }
    let a = ideal_of_solution(s)?;
    let beta_k = hensel_lift(a.beta, s.d, s.m, s.k)?;
    let ak = IdealBasis::new(s.m.pow(s.k), beta_k, s.d)?;
    Ok(Some(ak.contains(s.n as i128, s.t as i128)))
}

/// Reduced Heegner point of the ideal of a solution.
pub fn heegner_point(s: &SoundararajanSolution) -> Result<HeegnerPoint> {
    let a = ideal_of_solution(s)?;
    Ok(HeegnerPoint::of_form(&reduce_for_points(a.form()), s.d, Some(*s)))
}

/// Point of the ideal itself, translated into `-1/2 <= x < 1/2`.
pub fn strip_point(a: &IdealBasis) -> HeegnerPoint {
    let n = a.norm as i64;
    let mut b = a.beta as i64;
    // x = beta / N in [-1/2, 1/2).
    if 2 * b >= n {
        b -= n;
    }
    let f = QuadForm::new(n, -2 * b, (b * b + a.d as i64) / n);
    HeegnerPoint::of_form(&f, a.d, None)
}

/// Squarefree `D = 2 mod 4` below `x`.
pub fn admissible_discriminants(x: u64) -> Vec<u64> {
    let sf = arith::squarefree_table(x);
    (2..x).step_by(4).filter(|&d| sf[d as usize]).collect()
}

/// Outcome of a region count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub max_d: u64,
    pub y_cut: f64,
    pub count: u64,
    pub expected: f64,
    pub ratio: f64,
    /// Points with imaginary part above `X^{1/6}`; always zero.
    pub above_cusp: u64,
}

/// Nonprincipal `k`-torsion ideals of `D` with `N < Y sqrt(D)` (both
/// members of each conjugate pair), with their strip points.
fn region_points(d: u64, k: u32, y_cut: f64) -> Vec<HeegnerPoint> {
    let bound = (y_cut * (d as f64).sqrt()).ceil() as u64;
    let mut out = Vec::new();
    for s in solutions_unchecked(d, k, bound) {
        let a = ideal_of_solution(&s).expect("solutions are valid by construction");
        if (a.norm as f64) >= y_cut * (d as f64).sqrt() || a.is_principal() {
            continue;
        }
        for ideal in [a, a.conjugate()] {
            let mut p = strip_point(&ideal);
            p.source = Some(s);
            out.push(p);
        }
    }
    out
}

/// Heegner points of nonprincipal 3-torsion ideals in
/// `R_Y = {|x| < 1/2, y > 1/Y}` over admissible `D < X`.
pub fn count_in_region(x: u64, y_cut: f64, k: u32) -> Result<RegionReport> {
    if x < 3 || x > 10_000_000 {
        return Err(invalid("X must lie in 3..=10^7"));
    }
    if !(y_cut > 0.0) {
        return Err(invalid("Y must be positive"));
    }
    if k < 3 || k % 2 == 0 {
        return Err(invalid("k must be odd and at least 3"));
    }
    let cusp = (x as f64).powf(1.0 / 6.0);
    let (count, above) = admissible_discriminants(x)
        .into_par_iter()
        .map(|d| {
            let pts = region_points(d, k, y_cut);
            let inside = pts.iter().filter(|p| p.x > -0.5 && p.x < 0.5).count() as u64;
            let above = pts.iter().filter(|p| p.y > cusp).count() as u64;
            (inside, above)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let expected = 6.0 / std::f64::consts::PI.powi(3) * y_cut * x as f64;
    Ok(RegionReport {
        max_d: x,
        y_cut,
        count,
        expected,
        ratio: count as f64 / expected,
        above_cusp: above,
    })
}

/// Vertical distribution of the region points as `(bin_lo, bin_hi, count)`
/// over `y` in `[1/Y, X^{1/6}]`.
pub fn vertical_histogram(x: u64, y_cut: f64, bins: usize) -> Result<Vec<(f64, f64, u64)>> {
    if bins == 0 {
        return Err(invalid("at least one bin is required"));
    }
    let lo = 1.0 / y_cut;
    let hi = (x as f64).powf(1.0 / 6.0).max(lo * (1.0 + 1e-9));
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for d in admissible_discriminants(x) {
        for p in region_points(d, 3, y_cut) {
            if p.x <= -0.5 || p.x >= 0.5 {
                continue;
            }
            let i = (((p.y - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
    }
    Ok((0..bins)
        .map(|i| (lo + i as f64 * width, lo + (i + 1) as f64 * width, counts[i]))
        .collect())
}

/// Nonprincipal 3-torsion points in the fundamental domain for one `D`.
pub fn fundamental_domain_count(d: u64) -> Result<u64> {
    check_parameters(d, 3)?;
    // Points in the domain have y >= sqrt(3)/2, so N <= sqrt(4D/3).
    let bound = arith::isqrt(4 * d / 3) + 1;
    let mut n = 0;
    for s in solutions_unchecked(d, 3, bound) {
        let a = ideal_of_solution(&s)?;
        if a.is_principal() {
            continue;
        }
        for ideal in [a, a.conjugate()] {
            if strip_point(&ideal).is_reduced() {
                n += 1;
            }
        }
    }
    Ok(n)
}

/// `#Cl_3(-4D) - 1` from reduced forms.
pub fn nontrivial_three_torsion(d: u64) -> Result<u64> {
    let disc = -4 * d as i64;
    let forms = crate::classgroups::reduced_forms(disc)?;
    Ok(forms
        .iter()
        .filter(|f| compose_unchecked(f, f) == f.inverse())
        .count() as u64
        - 1)
}

/// Comparison of solution-derived ideals against direct enumeration.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BijectionAudit {
    pub d: u64,
    pub matched: usize,
    /// Pairs produced by solutions but not found directly.
    pub only_solutions: Vec<(u64, u64)>,
    /// Pairs found directly but produced by no solution.
    pub only_direct: Vec<(u64, u64)>,
    /// Self-conjugate ideals with principal `k`-th power, reported apart.
    pub self_conjugate: Vec<(u64, u64)>,
    /// Solutions whose pair was produced more than once.
    pub duplicate_solutions: usize,
}

impl BijectionAudit {
    pub fn is_exact(&self) -> bool {
        self.only_solutions.is_empty() && self.only_direct.is_empty() && self.duplicate_solutions == 0
    }
}

/// Audit the parameterization for one `D`: ideals `[N, beta + sqrt(-D)]`
/// with `2 <= N <= B` and principal `k`-th power, one per conjugate pair.
pub fn audit_bijection(d: u64, k: u32, bound: u64) -> Result<BijectionAudit> {
    check_parameters(d, k)?;
    let mut from_solutions = BTreeSet::new();
    let mut duplicates = 0;
    for s in solutions_unchecked(d, k, bound) {
        if !from_solutions.insert(ideal_of_solution(&s)?.pair_key()) {
            duplicates += 1;
        }
    }
    let mut direct = BTreeSet::new();
    let mut self_conjugate = Vec::new();
    for n in 2..=bound {
        for beta in 0..n {
            if ((beta as u128).pow(2) + d as u128) % n as u128 != 0 {
                continue;
            }
            let a = IdealBasis::new(n, beta, d)?;
            if !a.power_is_principal(k as u64) {
                continue;
            }
            if a.is_self_conjugate() {
                self_conjugate.push((n, beta));
            } else {
                direct.insert(a.pair_key());
            }
        }
    }
    Ok(BijectionAudit {
        d,
        matched: from_solutions.intersection(&direct).count(),
        only_solutions: from_solutions.difference(&direct).copied().collect(),
        only_direct: direct.difference(&from_solutions).copied().collect(),
        self_conjugate,
        duplicate_solutions: duplicates,
    })
}
