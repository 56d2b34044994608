//! Integral binary cubic forms `a u^3 + b u^2 v + c u v^2 + d v^3` and the
//! `GL_2(Z)` action on them.
//!
//! The action is `(g . f)(u, v) = f((u, v) g) / det g`. It is a left action:
//! `g1 . (g2 . f) = (g1 g2) . f`, and it preserves the discriminant exactly.
//!
//! Reduction attaches to every nondegenerate form a point of the upper half
//! plane that moves equivariantly under the action: for positive discriminant
//! the root of the (definite) Hessian, for negative discriminant the complex
//! root of the form itself. A form is *in the domain* when that point lies in
//! the closed standard fundamental domain `|Re z| <= 1/2, |z| >= 1`. All
//! in-domain forms of one class are related by maps with entries in
//! `{-1, 0, 1}`, so the canonical representative is the lexicographically
//! smallest in-domain form with positive leading coefficient.

use std::fmt;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryCubicForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl BinaryCubicForm {
    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { a, b, c, d }
    }

    pub fn coeffs(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }

    /// Discriminant in 128-bit arithmetic; exact for |coefficients| < 2^31.
    #[inline]
    pub fn discriminant_i128(&self) -> i128 {
        let (a, b, c, d) = (
            self.a as i128,
            self.b as i128,
            self.c as i128,
            self.d as i128,
        );
        b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d
            + 18 * a * b * c * d
    }

    /// `f(p, q)` evaluated exactly, or `None` on overflow.
    pub fn eval(&self, p: i128, q: i128) -> Option<i128> {
        let p2 = p.checked_mul(p)?;
        let q2 = q.checked_mul(q)?;
        let t0 = (self.a as i128).checked_mul(p2.checked_mul(p)?)?;
        let t1 = (self.b as i128).checked_mul(p2.checked_mul(q)?)?;
        let t2 = (self.c as i128).checked_mul(p.checked_mul(q2)?)?;
        let t3 = (self.d as i128).checked_mul(q2.checked_mul(q)?)?;
        t0.checked_add(t1)?.checked_add(t2)?.checked_add(t3)
    }

    /// Leading nonzero coefficient is positive.
    pub fn is_positively_oriented(&self) -> bool {
        self.a > 0 || (self.a == 0 && self.b > 0)
    }
}

impl fmt::Display for BinaryCubicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.a, self.b, self.c, self.d)
    }
}

/// An element of `GL_2(Z)` stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnimodularMap {
    pub e11: i64,
    pub e12: i64,
    pub e21: i64,
    pub e22: i64,
}

impl UnimodularMap {
    pub const IDENTITY: Self = Self {
        e11: 1,
        e12: 0,
        e21: 0,
        e22: 1,
    };

    /// Validating constructor.
    pub fn new(e11: i64, e12: i64, e21: i64, e22: i64) -> Result<Self> {
        let m = Self::new_unchecked(e11, e12, e21, e22);
        match m.det_i128() {
            1 | -1 => Ok(m),
            d => Err(Error::NotUnimodular(d.clamp(i64::MIN as i128, i64::MAX as i128) as i64)),
        }
    }

    pub(crate) const fn new_unchecked(e11: i64, e12: i64, e21: i64, e22: i64) -> Self {
        Self { e11, e12, e21, e22 }
    }

    fn det_i128(&self) -> i128 {
        self.e11 as i128 * self.e22 as i128 - self.e12 as i128 * self.e21 as i128
    }

    pub fn det(&self) -> i64 {
        self.det_i128() as i64
    }

    pub fn is_unimodular(&self) -> bool {
        matches!(self.det_i128(), 1 | -1)
    }

    /// Matrix product `self * other`; acting by it equals acting by `other`
    /// first and then by `self`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let m = |x: i64, y: i64, z: i64, w: i64| -> Result<i64> {
            let v = x as i128 * y as i128 + z as i128 * w as i128;
            i64::try_from(v).map_err(|_| Error::Overflow("map composition"))
        };
        Ok(Self {
            e11: m(self.e11, other.e11, self.e12, other.e21)?,
            e12: m(self.e11, other.e12, self.e12, other.e22)?,
            e21: m(self.e21, other.e11, self.e22, other.e21)?,
            e22: m(self.e21, other.e12, self.e22, other.e22)?,
        })
    }

    pub fn inverse(&self) -> Self {
        let d = self.det();
        Self::new_unchecked(self.e22 * d, -self.e12 * d, -self.e21 * d, self.e11 * d)
    }

    /// Translation of the attached point by `-k`.
    pub(crate) const fn shear(k: i64) -> Self {
        Self::new_unchecked(1, 0, k, 1)
    }

    pub(crate) const SWAP: Self = Self::new_unchecked(0, 1, 1, 0);
}

/// All maps with entries in `{-1, 0, 1}` and determinant `+-1`.
pub(crate) static SMALL_MAPS: Lazy<Vec<UnimodularMap>> = Lazy::new(|| {
    let mut v = Vec::new();
    for e11 in -1..=1 {
        for e12 in -1..=1 {
            for e21 in -1..=1 {
                for e22 in -1..=1 {
                    let m = UnimodularMap::new_unchecked(e11, e12, e21, e22);
                    if m.is_unimodular() {
                        v.push(m);
                    }
                }
            }
        }
    }
    v
});

/// Quadratic covariant `(P, Q, R)` for `P x^2 + Q x y + R y^2`.
pub type QuadTriple = (i64, i64, i64);

fn to_i64(v: i128, what: &'static str) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow(what))
}

/// `b^2 c^2 - 4 a c^3 - 4 b^3 d - 27 a^2 d^2 + 18 a b c d`.
pub fn discriminant(f: &BinaryCubicForm) -> Result<i64> {
    let bound = 1i64 << 31;
    if f.coeffs().iter().any(|&x| x.unsigned_abs() > bound as u64) {
        return discriminant_wide(f);
    }
    to_i64(f.discriminant_i128(), "discriminant")
}

fn discriminant_wide(f: &BinaryCubicForm) -> Result<i64> {
    let (a, b, c, d) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
    let ov = || Error::Overflow("discriminant");
    let prod = |xs: &[i128]| -> Result<i128> {
        xs.iter()
            .try_fold(1i128, |acc, &x| acc.checked_mul(x))
            .ok_or_else(ov)
    };
    let terms = [
        prod(&[b, b, c, c])?,
        prod(&[-4, a, c, c, c])?,
        prod(&[-4, b, b, b, d])?,
        prod(&[-27, a, a, d, d])?,
        prod(&[18, a, b, c, d])?,
    ];
    let s = terms
        .iter()
        .try_fold(0i128, |acc, &t| acc.checked_add(t))
        .ok_or_else(ov)?;
    to_i64(s, "discriminant")
}

/// `(g . f)(u, v) = f((u, v) g) / det g`.
pub fn apply(g: &UnimodularMap, f: &BinaryCubicForm) -> Result<BinaryCubicForm> {
    let det = g.det_i128();
    if det != 1 && det != -1 {
        return Err(Error::NotUnimodular(det as i64));
    }
    let (p, q, r, s) = (g.e11 as i128, g.e12 as i128, g.e21 as i128, g.e22 as i128);
    let (a, b, c, d) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
    let ov = || Error::Overflow("group action");
    // Coefficient growth is polynomial of degree 3 in the entries; guard the
    // magnitudes up front so the expansion below cannot wrap.
    let emax = [p, q, r, s].iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
    let cmax = [a, b, c, d].iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
    let bound = 1u128 << 120;
    if emax.checked_pow(3).and_then(|e| e.checked_mul(cmax)).and_then(|x| x.checked_mul(64)).is_none_or(|x| x > bound) {
        return Err(ov());
    }
    let na = a * p * p * p + b * p * p * q + c * p * q * q + d * q * q * q;
    let nb = 3 * a * p * p * r + b * (p * p * s + 2 * p * q * r) + c * (2 * p * q * s + q * q * r)
        + 3 * d * q * q * s;
    let nc = 3 * a * p * r * r + b * (2 * p * r * s + q * r * r) + c * (p * s * s + 2 * q * r * s)
        + 3 * d * q * s * s;
    let nd = a * r * r * r + b * r * r * s + c * r * s * s + d * s * s * s;
    Ok(BinaryCubicForm::new(
        to_i64(na * det, "group action")?,
        to_i64(nb * det, "group action")?,
        to_i64(nc * det, "group action")?,
        to_i64(nd * det, "group action")?,
    ))
}

/// Fast action for maps with entries in `{-1, 0, 1}` and small coefficients.
#[inline]
fn apply_small(g: &UnimodularMap, f: &BinaryCubicForm) -> BinaryCubicForm {
    let (p, q, r, s) = (g.e11, g.e12, g.e21, g.e22);
    let det = p * s - q * r;
    let (a, b, c, d) = (f.a, f.b, f.c, f.d);
    let na = a * p * p * p + b * p * p * q + c * p * q * q + d * q * q * q;
    let nb = 3 * a * p * p * r + b * (p * p * s + 2 * p * q * r) + c * (2 * p * q * s + q * q * r)
        + 3 * d * q * q * s;
    let nc = 3 * a * p * r * r + b * (2 * p * r * s + q * r * r) + c * (p * s * s + 2 * q * r * s)
        + 3 * d * q * s * s;
    let nd = a * r * r * r + b * r * r * s + c * r * s * s + d * s * s * s;
    BinaryCubicForm::new(na * det, nb * det, nc * det, nd * det)
}

/// Coefficients small enough for `apply_small` to be exact in i64.
#[inline]
fn small_enough(f: &BinaryCubicForm) -> bool {
    f.coeffs().iter().all(|x| x.unsigned_abs() < (1u64 << 58))
}

/// Hessian covariant `(b^2 - 3ac, bc - 9ad, c^2 - 3bd)`; its discriminant is
/// `-3 disc(f)`.
pub fn hessian(f: &BinaryCubicForm) -> Result<QuadTriple> {
    let (p, q, r) = hessian_i128(f);
    Ok((
        to_i64(p, "hessian")?,
        to_i64(q, "hessian")?,
        to_i64(r, "hessian")?,
    ))
}

#[inline]
fn hessian_i128(f: &BinaryCubicForm) -> (i128, i128, i128) {
    let (a, b, c, d) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
    (b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d)
}

/// Whether the attached point of a form with the given discriminant sign lies
/// in the closed fundamental domain. Exact.
pub(crate) fn in_domain(f: &BinaryCubicForm, disc_positive: bool) -> Result<bool> {
    if disc_positive {
        let (p, q, r) = hessian_i128(f);
        return Ok(p > 0 && q.abs() <= p && p <= r);
    }
    let f = if f.is_positively_oriented() { *f } else { f.neg() };
    if f.a == 0 {
        return Ok(f.c.abs() <= f.b && f.d >= f.b);
    }
    let ev = |p: i128, q: i128| f.eval(p, q).ok_or(Error::Overflow("domain test"));
    let (a, b, d) = (f.a as i128, f.b as i128, f.d as i128);
    // The real root alpha satisfies sign(alpha - p/q) = -sign(f(p, q)) for a > 0.
    if ev(-(a + b), a)? > 0 || ev(a - b, a)? < 0 {
        return Ok(false);
    }
    if d == 0 {
        return Ok(f.c >= f.a);
    }
    Ok(ev(-d.abs(), a)? <= 0 && ev(d.abs(), a)? >= 0)
}

/// Approximate attached point `(Re z, |z|^2)`.
fn approx_point(f: &BinaryCubicForm, disc_positive: bool) -> (f64, f64) {
    if disc_positive {
        let (p, q, r) = hessian_i128(f);
        let (p, q, r) = (p as f64, q as f64, r as f64);
        return (-q / (2.0 * p), r / p);
    }
    let f = if f.is_positively_oriented() { *f } else { f.neg() };
    let (qa, qb, qc) = if f.a == 0 {
        (f.b as f64, f.c as f64, f.d as f64)
    } else {
        let alpha = real_root(&f);
        let (a, b, c) = (f.a as f64, f.b as f64, f.c as f64);
        (a, b + a * alpha, c + alpha * b + a * alpha * alpha)
    };
    (-qb / (2.0 * qa), qc / qa)
}

/// The unique real root of `f(x, 1)` for a negative-discriminant form with
/// `a != 0`, by bisection followed by Newton polishing.
fn real_root(f: &BinaryCubicForm) -> f64 {
    let (a, b, c, d) = (f.a as f64, f.b as f64, f.c as f64, f.d as f64);
    let g = |x: f64| ((a * x + b) * x + c) * x + d;
    let dg = |x: f64| (3.0 * a * x + 2.0 * b) * x + c;
    let bound = 1.0 + [b, c, d].iter().map(|v| (v / a).abs()).fold(0.0, f64::max);
    let (mut lo, mut hi) = (-bound, bound);
    let s_lo = g(lo).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let dx = dg(x);
        if dx != 0.0 {
            let nx = x - g(x) / dx;
            if nx.is_finite() && (nx - x).abs() < 1e-3 * (1.0 + x.abs()) {
                x = nx;
            }
        }
    }
    x
}

/// Move `f` into the domain, returning the reduced form and a witness `m`
/// with `m . f` equal to it.
pub(crate) fn reduce_to_domain(
    f: &BinaryCubicForm,
    disc_positive: bool,
) -> Result<(BinaryCubicForm, UnimodularMap)> {
    let mut g = *f;
    let mut m = UnimodularMap::IDENTITY;
    for _ in 0..10_000 {
        if in_domain(&g, disc_positive)? {
            return Ok((g, m));
        }
        let (re, abs2) = approx_point(&g, disc_positive);
        let step = if re.abs() > 0.5 + 1e-12 {
            UnimodularMap::shear(re.round() as i64)
        } else if abs2 < 1.0 - 1e-12 {
            UnimodularMap::SWAP
        } else {
            // Floating point places the point on the boundary; settle it
            // exactly among the small maps.
            for s in SMALL_MAPS.iter() {
                let h = apply(s, &g)?;
                if in_domain(&h, disc_positive)? {
                    return Ok((h, s.compose(&m)?));
                }
            }
            return Err(Error::Internal(format!("reduction stalled at {g}")));
        };
        g = apply(&step, &g)?;
        m = step.compose(&m)?;
    }
    Err(Error::Internal(format!("reduction did not terminate for {f}")))
}

/// Canonical representative and stabilizer order of an in-domain form.
fn canonical_from_domain(
    g: &BinaryCubicForm,
    disc_positive: bool,
) -> Result<(BinaryCubicForm, UnimodularMap, u8)> {
    let fast = small_enough(g);
    let mut best: Option<(BinaryCubicForm, UnimodularMap)> = None;
    let mut stab = 0u8;
    for s in SMALL_MAPS.iter() {
        let h = if fast { apply_small(s, g) } else { apply(s, g)? };
        if h == *g {
            stab += 1;
        }
        if !h.is_positively_oriented() || !in_domain(&h, disc_positive)? {
            continue;
        }
        if best.as_ref().is_none_or(|(b, _)| h < *b) {
            best = Some((h, *s));
        }
    }
    let (c, s) = best.ok_or_else(|| Error::Internal(format!("no oriented domain form for {g}")))?;
    Ok((c, s, stab))
}

/// Canonical class representative and a witness map carrying `f` to it.
pub fn canonicalize(f: &BinaryCubicForm) -> Result<(BinaryCubicForm, UnimodularMap)> {
    let disc = discriminant(f)?;
    if disc == 0 {
        return Err(Error::Degenerate);
    }
    let (g, m) = reduce_to_domain(f, disc > 0)?;
    let (c, s, _) = canonical_from_domain(&g, disc > 0)?;
    Ok((c, s.compose(&m)?))
}

/// Order of the stabilizer of `f` in `GL_2(Z)`.
pub fn stabilizer_order(f: &BinaryCubicForm) -> Result<u8> {
    let disc = discriminant(f)?;
    if disc == 0 {
        return Err(Error::Degenerate);
    }
    let (g, _) = reduce_to_domain(f, disc > 0)?;
    Ok(canonical_from_domain(&g, disc > 0)?.2)
}

/// True iff `f` has no zero in `P^1(Q)`.
pub fn is_irreducible(f: &BinaryCubicForm) -> Result<bool> {
    if discriminant(f)? == 0 {
        return Err(Error::Degenerate);
    }
    Ok(irreducible_unchecked(f))
}

pub(crate) fn irreducible_unchecked(f: &BinaryCubicForm) -> bool {
    if f.a == 0 || f.d == 0 {
        return false;
    }
    let qs = divisors(f.a.unsigned_abs());
    let ps = divisors(f.d.unsigned_abs());
    for &q in &qs {
        for &p in &ps {
            if num_integer::Integer::gcd(&p, &q) != 1 {
                continue;
            }
            for sp in [p as i128, -(p as i128)] {
                if f.eval(sp, q as i128) == Some(0) {
                    return false;
                }
            }
        }
    }
    true
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1u64;
    while i * i <= n {
        if n % i == 0 {
            small.push(i);
            if i * i != n {
                large.push(n / i);
            }
        }
        i += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Canonical data of one `GL_2(Z)`-class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub canonical: BinaryCubicForm,
    pub disc: i64,
    pub stab_order: u8,
    pub irreducible: bool,
}

impl OrbitRecord {
    pub fn from_form(f: &BinaryCubicForm) -> Result<Self> {
        let disc = discriminant(f)?;
        if disc == 0 {
            return Err(Error::Degenerate);
        }
        let (g, _) = reduce_to_domain(f, disc > 0)?;
        Self::from_domain_form(&g, disc)
    }

    /// For forms already known to be in the domain (the enumerator's output).
    pub(crate) fn from_domain_form(g: &BinaryCubicForm, disc: i64) -> Result<Self> {
        let (canonical, _, stab_order) = canonical_from_domain(g, disc > 0)?;
        Ok(Self {
            canonical,
            disc,
            stab_order,
            irreducible: irreducible_unchecked(&canonical),
        })
    }

    /// Stream order: |disc| ascending, then canonical coefficients.
    pub fn sort_key(&self) -> (u64, BinaryCubicForm) {
        (self.disc.unsigned_abs(), self.canonical)
    }
}

/// Multiplication table of the cubic ring attached to a form, on the basis
/// `(1, omega, theta)`; each product is stored as coordinates on that basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubicRingTable {
    pub omega_sq: [i64; 3],
    pub theta_sq: [i64; 3],
    pub omega_theta: [i64; 3],
}

pub type RingElement = [i128; 3];

impl CubicRingTable {
    pub fn mul(&self, x: &RingElement, y: &RingElement) -> RingElement {
        let w2 = self.omega_sq.map(|v| v as i128);
        let t2 = self.theta_sq.map(|v| v as i128);
        let wt = self.omega_theta.map(|v| v as i128);
        let mut out = [
            x[0] * y[0],
            x[0] * y[1] + x[1] * y[0],
            x[0] * y[2] + x[2] * y[0],
        ];
        let (k_ww, k_wt, k_tt) = (x[1] * y[1], x[1] * y[2] + x[2] * y[1], x[2] * y[2]);
        for i in 0..3 {
            out[i] += k_ww * w2[i] + k_wt * wt[i] + k_tt * t2[i];
        }
        out
    }

    pub fn trace(&self, x: &RingElement) -> i128 {
        let basis: [RingElement; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        (0..3).map(|i| self.mul(x, &basis[i])[i]).sum()
    }

    /// Gram matrix of the trace pairing on the basis.
    pub fn trace_form(&self) -> [[i128; 3]; 3] {
        let basis: [RingElement; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        let mut g = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = self.trace(&self.mul(&basis[i], &basis[j]));
            }
        }
        g
    }

    pub fn discriminant(&self) -> i128 {
        let m = self.trace_form();
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// `(xy)z = x(yz)` on all basis triples.
    pub fn is_associative(&self) -> bool {
        let basis: [RingElement; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        basis.iter().all(|x| {
            basis.iter().all(|y| {
                basis
                    .iter()
                    .all(|z| self.mul(&self.mul(x, y), z) == self.mul(x, &self.mul(y, z)))
            })
        })
    }
}

/// Normalized table: `omega^2 = -ac - b omega + a theta`,
/// `theta^2 = -bd - d omega + c theta`, `omega theta = -ad`.
pub fn ring_table(f: &BinaryCubicForm) -> Result<CubicRingTable> {
    let (a, b, c, d) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
    let v = |x: i128| to_i64(x, "ring table");
    Ok(CubicRingTable {
        omega_sq: [v(-a * c)?, v(-b)?, v(a)?],
        theta_sq: [v(-b * d)?, v(-d)?, v(c)?],
        omega_theta: [v(-a * d)?, 0, 0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(a: i64, b: i64, c: i64, d: i64) -> BinaryCubicForm {
        BinaryCubicForm::new(a, b, c, d)
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(discriminant(&f(0, 1, -1, 0)).unwrap(), 1);
        assert_eq!(discriminant(&f(1, 0, 0, 0)).unwrap(), 0);
        assert_eq!(discriminant(&f(1, 0, -1, -1)).unwrap(), -23);
        assert_eq!(discriminant(&f(1, 1, -2, -1)).unwrap(), 49);
    }

    #[test]
    fn discriminant_overflow_is_reported() {
        let big = 1i64 << 40;
        assert!(matches!(
            discriminant(&f(big, big, big, big)),
            Err(Error::Overflow(_))
        ));
        let edge = (1i64 << 31) - 1;
        // |disc| of this form is below 2^62 only for modest coefficients;
        // at the edge we must either answer exactly or flag overflow.
        match discriminant(&f(edge, 0, 0, 1)) {
            Ok(v) => assert_eq!(v as i128, f(edge, 0, 0, 1).discriminant_i128()),
            Err(e) => assert!(matches!(e, Error::Overflow(_))),
        }
    }

    #[test]
    fn action_examples() {
        let g = f(1, 0, -1, -1);
        assert_eq!(apply(&UnimodularMap::IDENTITY, &g).unwrap(), g);
        let swap = UnimodularMap::new(0, 1, 1, 0).unwrap();
        let h = apply(&swap, &g).unwrap();
        assert_eq!(h, f(1, 1, 0, -1));
        assert_eq!(discriminant(&h).unwrap(), -23);
        let shear = UnimodularMap::new(1, 0, 1, 1).unwrap();
        assert_eq!(apply(&shear, &f(1, 0, 0, 0)).unwrap(), f(1, 3, 3, 1));
    }

    #[test]
    fn non_unimodular_rejected() {
        assert!(matches!(UnimodularMap::new(2, 0, 0, 1), Err(Error::NotUnimodular(2))));
        let bad = UnimodularMap::new_unchecked(1, 1, 1, 1);
        assert!(apply(&bad, &f(1, 0, 0, 1)).is_err());
    }

    #[test]
    fn irreducibility_examples() {
        assert!(!is_irreducible(&f(0, 1, -1, 0)).unwrap());
        assert!(is_irreducible(&f(1, 0, -1, -1)).unwrap());
        assert!(!is_irreducible(&f(1, 0, -1, 0)).unwrap());
        assert!(is_irreducible(&f(1, 1, -2, -1)).unwrap());
        // 2u^3 - 3u^2 v + v^3 = (u - v)^2 (2u + v)... degenerate; use a
        // nondegenerate form with a non-integral rational root instead.
        let g = f(2, 1, 1, -1); // root u/v = 1/2
        assert_eq!(g.eval(1, 2), Some(0));
        assert!(!is_irreducible(&g).unwrap());
        assert!(matches!(is_irreducible(&f(1, 0, 0, 0)), Err(Error::Degenerate)));
    }

    #[test]
    fn hessian_examples() {
        assert_eq!(hessian(&f(1, 0, -1, -1)).unwrap(), (3, 9, 1));
        assert_eq!(hessian(&f(1, 0, 0, 0)).unwrap(), (0, 0, 0));
        assert_eq!(hessian(&f(0, 1, -1, 0)).unwrap(), (1, -1, 1));
        for g in [f(1, 0, -1, -1), f(0, 1, -1, 0), f(2, 1, -3, 1), f(3, -7, 2, 5)] {
            let (p, q, r) = hessian(&g).unwrap();
            assert_eq!(q * q - 4 * p * r, -3 * discriminant(&g).unwrap());
        }
    }

    #[test]
    fn canonicalize_examples() {
        let c1 = canonicalize(&f(1, 1, 0, -1)).unwrap().0;
        let c2 = canonicalize(&f(1, 0, -1, -1)).unwrap().0;
        assert_eq!(c1, c2);
        let g = f(2, 1, -3, 1);
        let c = canonicalize(&g).unwrap().0;
        assert_eq!(canonicalize(&c).unwrap().0, c);
        let c = canonicalize(&f(0, 1, -1, 0)).unwrap().0;
        assert_eq!(discriminant(&c).unwrap(), 1);
        assert!(matches!(canonicalize(&f(1, 0, 0, 0)), Err(Error::Degenerate)));
    }

    #[test]
    fn canonicalize_witness_is_correct() {
        for g in [f(1, 1, 0, -1), f(5, -17, 3, 40), f(-3, 11, 2, -9), f(7, 100, -3, 2)] {
            let (c, m) = canonicalize(&g).unwrap();
            assert_eq!(apply(&m, &g).unwrap(), c);
        }
    }

    #[test]
    fn stabilizer_examples() {
        assert_eq!(stabilizer_order(&f(0, 1, -1, 0)).unwrap(), 6);
        assert_eq!(stabilizer_order(&f(1, 1, -2, -1)).unwrap(), 3);
        assert_eq!(stabilizer_order(&f(1, 0, -1, -1)).unwrap(), 1);
    }

    #[test]
    fn ring_table_examples() {
        let t = ring_table(&f(1, 0, -1, -1)).unwrap();
        assert_eq!(t.omega_sq, [1, 0, 1]);
        assert_eq!(t.theta_sq, [0, 1, -1]);
        assert_eq!(t.omega_theta, [1, 0, 0]);
        assert_eq!(t.discriminant(), -23);
        assert!(t.is_associative());

        // With xi^3 = xi + 1, omega = xi and theta = xi^2 - 1 satisfy the table.
        // Represent elements of Z[xi] on (1, xi, xi^2) and check each relation.
        let mul_xi = |x: [i64; 3], y: [i64; 3]| -> [i64; 3] {
            let mut c = [0i64; 5];
            for i in 0..3 {
                for j in 0..3 {
                    c[i + j] += x[i] * y[j];
                }
            }
            // xi^4 = xi^2 + xi, xi^3 = xi + 1
            [c[0] + c[3], c[1] + c[3] + c[4], c[2] + c[4]]
        };
        let omega = [0, 1, 0];
        let theta = [-1, 0, 1];
        let lin = |v: [i64; 3]| -> [i64; 3] {
            [v[0] + v[2] * theta[0], v[1] + v[2] * theta[1], v[2] * theta[2]]
        };
        assert_eq!(mul_xi(omega, omega), lin(t.omega_sq));
        assert_eq!(mul_xi(theta, theta), lin(t.theta_sq));
        assert_eq!(mul_xi(omega, theta), lin(t.omega_theta));

        let t = ring_table(&f(0, 1, -1, 0)).unwrap();
        assert_eq!(t.omega_sq, [0, -1, 0]);
        assert_eq!(t.discriminant(), 1);
    }

    #[test]
    fn small_map_set() {
        assert_eq!(SMALL_MAPS.len(), 40);
        for m in SMALL_MAPS.iter() {
            assert!(SMALL_MAPS.contains(&m.inverse()));
        }
    }
}
