//! Class groups of imaginary quadratic orders via reduced positive definite
//! binary quadratic forms, with `k`-torsion counts and the two routes to
//! `sum #Cl_3(D)`.

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::census::Census;
use crate::error::{invalid, Error, Result};
use crate::sign::Sign;

/// `A x^2 + B x y + C y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        Self { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    /// Principal form of discriminant `d`.
    pub fn identity(d: i64) -> Self {
        let b = d.rem_euclid(2);
        Self::new(1, b, (b * b - d) / 4)
    }

    /// `(A, -B, C)`, reduced.
    pub fn inverse(&self) -> Self {
        reduce(Self::new(self.a, -self.b, self.c))
    }
}

fn check_discriminant(d: i64) -> Result<()> {
    if d >= 0 {
        return Err(invalid(format!("discriminant {d} must be negative")));
    }
    if !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(invalid(format!("{d} is not 0 or 1 mod 4")));
    }
    Ok(())
}

/// Reduce a positive definite form.
pub fn reduce(f: QuadForm) -> QuadForm {
    let d = f.discriminant() as i128;
    let (mut a, mut b, mut c) = (f.a as i128, f.b as i128, f.c as i128);
    loop {
        // Bring b into (-a, a].
        if b > a || b <= -a {
            let two_a = 2 * a;
            let mut r = b.rem_euclid(two_a);
            if r > a {
                r -= two_a;
            }
            b = r;
            c = (b * b - d) / (4 * a);
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        if (a == c || b == -a) && b < 0 {
            b = -b;
        }
        break;
    }
    QuadForm::new(a as i64, b as i64, c as i64)
}

/// All reduced primitive forms of discriminant `d`; one per class.
pub fn reduced_forms(d: i64) -> Result<Vec<QuadForm>> {
    check_discriminant(d)?;
    let mut out = Vec::new();
    let a_max = arith::isqrt((-d / 3) as u64) as i64;
    for a in 1..=a_max {
        let mut b = -a + 1;
        // b must share the parity of d.
        if (b - d).rem_euclid(2) != 0 {
            b += 1;
        }
        while b <= a {
            let num = b * b - d;
            if num % (4 * a) == 0 {
                let f = QuadForm::new(a, b, num / (4 * a));
                if f.is_reduced() && f.is_primitive() {
                    out.push(f);
                }
            }
            b += 2;
        }
    }
    Ok(out)
}

/// Gauss composition of primitive forms of the same discriminant, reduced.
pub fn compose(f: &QuadForm, g: &QuadForm, d: i64) -> Result<QuadForm> {
    if f.discriminant() != d || g.discriminant() != d {
        return Err(invalid("forms do not have the stated discriminant"));
    }
    Ok(compose_unchecked(f, g))
}

pub(crate) fn compose_unchecked(f: &QuadForm, g: &QuadForm) -> QuadForm {
    let (f1, f2) = if f.a > g.a { (g, f) } else { (f, g) };
    let (a1, b1) = (f1.a as i128, f1.b as i128);
    let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
    let s = (b1 + b2) / 2;
    let n = b2 - s;
    let (y1, d) = if a2 % a1 == 0 {
        (0, a1)
    } else {
        let e = a2.extended_gcd(&a1);
        (e.x, e.gcd)
    };
    let (x2, y2, d1) = if s % d == 0 {
        (0, -1, d)
    } else {
        let e = s.extended_gcd(&d);
        (e.x, -e.y, e.gcd)
    };
    let v1 = a1 / d1;
    let v2 = a2 / d1;
    let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
    let b3 = b2 + 2 * v2 * r;
    let a3 = v1 * v2;
    let c3 = (c2 * d1 + r * (b2 + v2 * r)) / v1;
    reduce(QuadForm::new(a3 as i64, b3 as i64, c3 as i64))
}

/// `f^k` by square-and-multiply.
pub fn power(f: &QuadForm, mut k: u64) -> QuadForm {
    let d = f.discriminant();
    let mut result = QuadForm::identity(d);
    let mut base = reduce(*f);
    while k > 0 {
        if k & 1 == 1 {
            result = compose_unchecked(&result, &base);
        }
        base = compose_unchecked(&base, &base);
        k >>= 1;
    }
    result
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassGroup {
    pub discriminant: i64,
    pub forms: Vec<QuadForm>,
}

impl ClassGroup {
    pub fn new(d: i64) -> Result<Self> {
        Ok(Self {
            discriminant: d,
            forms: reduced_forms(d)?,
        })
    }

    pub fn order(&self) -> usize {
        self.forms.len()
    }

    pub fn identity(&self) -> QuadForm {
        QuadForm::identity(self.discriminant)
    }

    pub fn compose(&self, f: &QuadForm, g: &QuadForm) -> Result<QuadForm> {
        compose(f, g, self.discriminant)
    }

    /// Order of an element.
    pub fn element_order(&self, f: &QuadForm) -> usize {
        let id = self.identity();
        let mut g = reduce(*f);
        let mut n = 1;
        while g != id {
            g = compose_unchecked(&g, f);
            n += 1;
        }
        n
    }

    /// Number of classes with `c^k = 1`.
    pub fn torsion_count(&self, k: u64) -> usize {
        let id = self.identity();
        self.forms.iter().filter(|f| power(f, k) == id).count()
    }
}

/// `#{c in Cl(D) : c^k = 1}` for odd `k >= 3`.
pub fn k_torsion_count(d: i64, k: u64) -> Result<u64> {
    if k < 3 || k % 2 == 0 {
        return Err(invalid(format!("k must be odd and at least 3, got {k}")));
    }
    Ok(ClassGroup::new(d)?.torsion_count(k) as u64)
}

/// `c^3 = 1` tested as `c^2 = c^{-1}`.
#[inline]
fn is_three_torsion(f: &QuadForm) -> bool {
    compose_unchecked(f, f) == f.inverse()
}

/// `1 + 2 m(D)`, with `m(D)` the number of cubic fields of discriminant `D`
/// read off a census of the matching sign.
pub fn cl3_via_cubic(d: i64, census: &Census) -> Result<u64> {
    if d == 1 || !arith::is_fundamental(d) {
        return Err(invalid(format!("{d} is not a fundamental discriminant")));
    }
    if !census.sign().matches(d) {
        return Err(invalid("census sign does not match the discriminant"));
    }
    if d.unsigned_abs() >= census.max_disc() {
        return Err(invalid("census bound does not cover the discriminant"));
    }
    let discs = census.field_discriminants(d.unsigned_abs() + 1)?;
    let m = discs.iter().rev().take_while(|&&x| x == d).count() as u64;
    Ok(1 + 2 * m)
}

/// Per-discriminant class numbers and 3-torsion sizes from a form sieve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionRow {
    pub d: i64,
    pub h: u64,
    pub cl3: u64,
}

/// `h(D)` and `#Cl_3(D)` for every fundamental `-X < D < 0`, by sweeping all
/// reduced forms with `|disc| < X` in blocks of discriminants.
pub fn bqf_torsion_table(x: u64) -> Result<Vec<TorsionRow>> {
    if x == 0 || x > 100_000_000 {
        return Err(invalid("bound must lie in 1..=10^8"));
    }
    const BLOCK: u64 = 20_000;
    let sf = arith::squarefree_table(x);
    let fundamental = |n: u64| -> bool {
        // D = -n.
        match n % 4 {
            3 => sf[n as usize],
            0 => matches!((n / 4) % 4, 1 | 2) && sf[(n / 4) as usize],
            _ => false,
        }
    };
    let blocks: Vec<(u64, u64)> = (0..x.div_ceil(BLOCK))
        .map(|i| (i * BLOCK, ((i + 1) * BLOCK).min(x)))
        .collect();
    let rows: Vec<Vec<TorsionRow>> = blocks
        .into_par_iter()
        .map(|(lo, hi)| {
            // Forms with lo <= |D| < hi, bucketed by |D|.
            let width = (hi - lo) as usize;
            let mut h = vec![0u64; width];
            let mut cl3 = vec![0u64; width];
            let a_max = arith::isqrt(hi / 3) as i64 + 1;
            for a in 1..=a_max {
                for b in (-a + 1)..=a {
                    // |D| = 4ac - b^2 with c >= a.
                    let c_lo = ((lo as i64 + b * b) + 4 * a - 1).div_euclid(4 * a).max(a);
                    let c_hi = (hi as i64 - 1 + b * b).div_euclid(4 * a);
                    for c in c_lo..=c_hi {
                        let f = QuadForm::new(a, b, c);
                        let n = (4 * a * c - b * b) as u64;
                        if n < lo.max(1) || n >= hi || !fundamental(n) || !f.is_reduced() {
                            continue;
                        }
                        let i = (n - lo) as usize;
                        h[i] += 1;
                        if is_three_torsion(&f) {
                            cl3[i] += 1;
                        }
                    }
                }
            }
            (0..width)
                .filter(|&i| h[i] > 0)
                .map(|i| TorsionRow {
                    d: -((lo + i as u64) as i64),
                    h: h[i],
                    cl3: cl3[i],
                })
                .collect()
        })
        .collect();
    let mut out: Vec<TorsionRow> = rows.into_iter().flatten().collect();
    out.sort_unstable_by_key(|r| std::cmp::Reverse(r.d));
    Ok(out)
}

/// Totals of `#Cl_3(D)` over fundamental `0 < +-D < X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cl3Sum {
    pub sign: Sign,
    pub max_disc: u64,
    pub cubic_route: u64,
    /// Present for negative discriminants only.
    pub bqf_route: Option<u64>,
}

impl Cl3Sum {
    pub fn routes_agree(&self) -> bool {
        self.bqf_route.is_none_or(|b| b == self.cubic_route)
    }
}

/// Number of fundamental discriminants of one sign with `|D| < X`.
pub fn count_quadratic_fields_signed(sign: Sign, x: u64) -> u64 {
    let sf = arith::squarefree_table(x);
    (2..x)
        .filter(|&n| {
            let d = sign.as_i64() * n as i64;
            match d.rem_euclid(4) {
                1 => sf[n as usize],
                0 => {
                    let m = d / 4;
                    matches!(m.rem_euclid(4), 2 | 3) && sf[m.unsigned_abs() as usize]
                }
                _ => false,
            }
        })
        .count() as u64
}

/// `sum #Cl_3(D)` via cubic fields: `N_2(X) + 2 #{fields with fundamental
/// discriminant}`.
pub fn sum_cl3_cubic(census: &Census, x: u64) -> Result<u64> {
    let fields = census
        .field_discriminants(x)?
        .into_iter()
        .filter(|&d| arith::is_fundamental(d))
        .count() as u64;
    Ok(count_quadratic_fields_signed(census.sign(), x) + 2 * fields)
}

/// Both routes for sign `-` (they must agree); the cubic route for `+`.
pub fn sum_cl3(sign: Sign, x: u64) -> Result<Cl3Sum> {
    let census = Census::new(sign, x)?;
    sum_cl3_with(&census, x)
}

pub fn sum_cl3_with(census: &Census, x: u64) -> Result<Cl3Sum> {
    let cubic_route = sum_cl3_cubic(census, x)?;
    let bqf_route = match census.sign() {
        Sign::Minus => Some(bqf_torsion_table(x)?.iter().map(|r| r.cl3).sum()),
        Sign::Plus => None,
    };
    let s = Cl3Sum {
        sign: census.sign(),
        max_disc: x,
        cubic_route,
        bqf_route,
    };
    if !s.routes_agree() {
        return Err(Error::Internal(format!(
            "3-torsion routes disagree: cubic {cubic_route}, forms {bqf_route:?}"
        )));
    }
    Ok(s)
}

/// Whether `n` is a power of 3 (including 1).
pub fn is_power_of_three(mut n: u64) -> bool {
    if n == 0 {
        return false;
    }
    while n % 3 == 0 {
        n /= 3;
    }
    n == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::count_quadratic_fields;

    #[test]
    fn reduced_form_examples() {
        assert_eq!(
            reduced_forms(-23).unwrap(),
            vec![QuadForm::new(1, 1, 6), QuadForm::new(2, -1, 3), QuadForm::new(2, 1, 3)]
        );
        assert_eq!(reduced_forms(-4).unwrap(), vec![QuadForm::new(1, 0, 1)]);
        assert_eq!(reduced_forms(-104).unwrap().len(), 6);
        assert!(reduced_forms(-5).is_err());
        assert!(reduced_forms(5).is_err());
    }

    #[test]
    fn composition_examples() {
        let d = -23;
        let g = ClassGroup::new(d).unwrap();
        for f in &g.forms {
            assert_eq!(g.compose(&g.identity(), f).unwrap(), *f);
        }
        let f = QuadForm::new(2, 1, 3);
        assert_eq!(compose(&f, &f, d).unwrap(), QuadForm::new(2, -1, 3));
        for d in [-23, -104] {
            let g = ClassGroup::new(d).unwrap();
            for f in &g.forms {
                assert_eq!(g.compose(f, &f.inverse()).unwrap(), g.identity());
            }
        }
        assert!(compose(&QuadForm::new(1, 1, 6), &QuadForm::new(1, 0, 1), -23).is_err());
    }

    #[test]
    fn torsion_examples() {
        assert_eq!(k_torsion_count(-23, 3).unwrap(), 3);
        assert_eq!(k_torsion_count(-4, 3).unwrap(), 1);
        assert_eq!(k_torsion_count(-104, 3).unwrap(), 3);
        assert!(k_torsion_count(-23, 2).is_err());
        let g = ClassGroup::new(-104).unwrap();
        let mut orders: Vec<usize> = g.forms.iter().map(|f| g.element_order(f)).collect();
        orders.sort();
        assert_eq!(orders, vec![1, 2, 3, 3, 6, 6]);
    }

    #[test]
    fn cubic_route_examples() {
        let census = Census::new(Sign::Minus, 200).unwrap();
        assert_eq!(cl3_via_cubic(-23, &census).unwrap(), 3);
        assert_eq!(cl3_via_cubic(-4, &census).unwrap(), 1);
        assert!(cl3_via_cubic(49, &census).is_err());
    }

    #[test]
    fn small_sums() {
        let s = sum_cl3(Sign::Minus, 24).unwrap();
        assert_eq!(s.cubic_route, 11);
        assert_eq!(s.bqf_route, Some(11));
        let s = sum_cl3(Sign::Minus, 5000).unwrap();
        assert!(s.routes_agree());
    }

    #[test]
    fn sieve_table_matches_per_discriminant() {
        let table = bqf_torsion_table(3000).unwrap();
        let direct: Vec<TorsionRow> = (1..3000i64)
            .map(|n| -n)
            .filter(|&d| arith::is_fundamental(d))
            .map(|d| TorsionRow {
                d,
                h: reduced_forms(d).unwrap().len() as u64,
                cl3: k_torsion_count(d, 3).unwrap(),
            })
            .collect();
        assert_eq!(table, direct);
    }

    #[test]
    fn quadratic_counts_split_by_sign() {
        for x in [10u64, 100, 1234] {
            assert_eq!(
                count_quadratic_fields_signed(Sign::Plus, x)
                    + count_quadratic_fields_signed(Sign::Minus, x),
                count_quadratic_fields(x)
            );
        }
    }
}
