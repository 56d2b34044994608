//! Special values with rigorous truncation bounds, the main and secondary
//! coefficients of the cubic-field and 3-torsion counts, secondary-term
//! fitting and the Minkowski bound.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{invalid, Error, Result};
use crate::sign::Sign;

const EPS: f64 = f64::EPSILON;

/// A real number with an absolute error bound and the method producing it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounded {
    pub value: f64,
    pub bound: f64,
    pub method: String,
}

impl Bounded {
    fn new(value: f64, bound: f64, method: impl Into<String>) -> Self {
        Self {
            value,
            bound,
            method: method.into(),
        }
    }

    pub fn relative_bound(&self) -> f64 {
        self.bound / self.value.abs()
    }

    /// Whether `other` lies within this value's bound.
    pub fn contains(&self, other: f64) -> bool {
        (self.value - other).abs() <= self.bound
    }
}

/// Product and quotient of bounded factors, with first-order relative
/// error propagation plus a second-order allowance.
fn combine(value: f64, rel: &[f64], method: &str) -> Bounded {
    let r: f64 = rel.iter().sum();
    let r = r * (1.0 + 2.0 * r) + 8.0 * EPS * rel.len() as f64;
    Bounded::new(value, value.abs() * r, method)
}

/// Truncation parameters; `refined()` doubles each of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkingPrecision {
    /// Leading terms summed directly (zeta) or shift applied (gamma).
    pub head: u32,
    /// Prime cutoff for Euler products.
    pub prime_cutoff: u64,
}

impl Default for WorkingPrecision {
    fn default() -> Self {
        Self {
            head: 32,
            prime_cutoff: 5_000_000,
        }
    }
}

impl WorkingPrecision {
    pub fn refined(self) -> Self {
        Self {
            head: self.head * 2,
            prime_cutoff: self.prime_cutoff * 2,
        }
    }
}

/// `B_0, ..., B_{2 * MAX_BERNOULLI}` as exact rationals converted once.
const MAX_BERNOULLI: usize = 60;

static BERNOULLI: Lazy<Vec<f64>> = Lazy::new(|| {
    let n = 2 * MAX_BERNOULLI + 2;
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    b.push(BigRational::one());
    // sum_{k=0}^{m} C(m+1, k) B_k = 0.
    for m in 1..=n {
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for (k, bk) in b.iter().enumerate() {
            acc += BigRational::from_integer(binom.clone()) * bk;
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
});

/// Exact Bernoulli number `B_n` rounded to `f64`.
pub fn bernoulli(n: usize) -> Result<f64> {
    BERNOULLI
        .get(n)
        .copied()
        .ok_or_else(|| invalid(format!("Bernoulli index {n} exceeds the table")))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Riemann zeta on `(-1, infinity)`, `s != 1`, by Euler-Maclaurin summation
/// to the requested absolute tolerance.
pub fn zeta(s: f64, tol: f64) -> Result<Bounded> {
    zeta_with(s, tol, WorkingPrecision::default())
}

pub fn zeta_with(s: f64, tol: f64, wp: WorkingPrecision) -> Result<Bounded> {
    if !(s > -1.0) || (s - 1.0).abs() < 1e-12 || !s.is_finite() {
        return Err(invalid(format!("zeta argument {s} outside (-1, 1) U (1, inf)")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let n = wp.head.max(8) as f64;
    let mut head = 0.0;
    let mut comp = 0.0;
    let mut magnitude = 0.0;
    for k in 1..wp.head.max(8) {
        let t = (k as f64).powf(-s);
        magnitude += t;
        let y = t - comp;
        let z = head + y;
        comp = (z - head) - y;
        head = z;
    }
    let mut value = head + n.powf(-s) / 2.0 + n.powf(1.0 - s) / (s - 1.0);
    magnitude += n.powf(-s) + (n.powf(1.0 - s) / (s - 1.0)).abs();
    // T_j = B_{2j} / (2j)! * s (s+1) ... (s+2j-2) * N^{-s-2j+1}.
    let mut rising = s;
    let mut remainder = f64::INFINITY;
    for j in 1..MAX_BERNOULLI {
        let term = bernoulli(2 * j)? / factorial(2 * j) * rising * n.powf(-s - 2.0 * j as f64 + 1.0);
        rising *= (s + 2.0 * j as f64 - 1.0) * (s + 2.0 * j as f64);
        let next = bernoulli(2 * j + 2)? / factorial(2 * j + 2) * rising
            * n.powf(-s - 2.0 * j as f64 - 1.0);
        value += term;
        magnitude += term.abs();
        // Real s with s + 2j + 1 > 0: the remainder is at most the first
        // omitted term.
        remainder = next.abs();
        if remainder < tol * 1e-2 {
            break;
        }
    }
    let rounding = 4.0 * EPS * magnitude;
    let bound = remainder + rounding;
    if bound > tol {
        return Err(Error::Incomplete(format!(
            "zeta({s}) reached bound {bound:e}, above tolerance {tol:e}"
        )));
    }
    Ok(Bounded::new(value, bound, "Euler-Maclaurin"))
}

/// Independent evaluation of `zeta(1/3)` as the limit of
/// `sum_{a <= A} a^{-1/3} - (3/2) A^{2/3}`, extrapolated over
/// `A, 2A, 4A, 8A` to remove the `A^{-1/3}`, `A^{-4/3}`, `A^{-10/3}` terms.
pub fn zeta_one_third_partial_sums(a0: u64) -> Result<Bounded> {
    if a0 < 100 {
        return Err(invalid("starting cutoff must be at least 100"));
    }
    let estimate = |a0: u64| -> f64 {
        let levels: Vec<u64> = (0..4).map(|i| a0 << i).collect();
        let mut sums = Vec::with_capacity(4);
        let (mut s, mut comp) = (0.0f64, 0.0f64);
        let mut k = 1u64;
        for &a in &levels {
            while k <= a {
                let y = (k as f64).powf(-1.0 / 3.0) - comp;
                let z = s + y;
                comp = (z - s) - y;
                s = z;
                k += 1;
            }
            sums.push(s - 1.5 * (a as f64).powf(2.0 / 3.0));
        }
        let exps = [1.0 / 3.0, 4.0 / 3.0, 10.0 / 3.0];
        let rows: Vec<Vec<f64>> = levels
            .iter()
            .map(|&a| {
                let mut r = vec![1.0];
                r.extend(exps.iter().map(|e| (a as f64 / a0 as f64).powf(-e)));
                r
            })
            .collect();
        solve_linear(rows, sums).map(|x| x[0]).unwrap_or(f64::NAN)
    };
    let v = estimate(a0);
    let w = estimate(2 * a0);
    let bound = 4.0 * (v - w).abs() + 1e-12;
    Ok(Bounded::new(w, bound, "partial sums with Richardson extrapolation"))
}

fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .ok_or_else(|| Error::Internal("empty system".into()))?;
        if a[piv][col].abs() < 1e-300 {
            return Err(invalid("singular linear system"));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// Gamma on `(0, infinity)` by the Stirling series after shifting the
/// argument up by `head / 2`.
pub fn gamma(x: f64, tol: f64) -> Result<Bounded> {
    gamma_with(x, tol, WorkingPrecision::default())
}

pub fn gamma_with(x: f64, tol: f64, wp: WorkingPrecision) -> Result<Bounded> {
    if !(x > 0.0) || !x.is_finite() || x > 170.0 {
        return Err(invalid(format!("gamma argument {x} outside (0, 170]")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let shift = (wp.head / 2).max(8);
    let z = x + shift as f64;
    let mut lg = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln();
    let mut remainder = f64::INFINITY;
    for j in 1..MAX_BERNOULLI {
        let j2 = 2 * j as i32;
        let term = bernoulli(2 * j)? / ((j2 * (j2 - 1)) as f64 * z.powi(j2 - 1));
        let next = bernoulli(2 * j + 2)? / (((j2 + 2) * (j2 + 1)) as f64 * z.powi(j2 + 1));
        lg += term;
        // For real z > 0 the Stirling remainder is bounded by the first
        // omitted term.
        remainder = next.abs();
        if remainder < tol * 1e-3 || remainder < EPS {
            break;
        }
    }
    let mut denom = 1.0;
    for i in 0..shift {
        denom *= x + i as f64;
    }
    let value = lg.exp() / denom;
    let truncation = value * remainder.exp_m1();
    let bound = truncation + value * 8.0 * EPS * (lg.abs() + shift as f64 + 1.0);
    if truncation > tol {
        return Err(Error::Incomplete(format!(
            "gamma({x}) reached bound {bound:e}, above tolerance {tol:e}"
        )));
    }
    Ok(Bounded::new(value, bound, "shifted Stirling series"))
}

/// Sum of `p^{-alpha}` over primes `p > cutoff`, bounded above through
/// `pi(t) < 1.25506 t / ln t` for `t > 1`.
fn prime_tail_bound(alpha: f64, cutoff: u64) -> f64 {
    let p = cutoff.max(17) as f64;
    // Partial summation: sum_{p > P} p^{-alpha} <= alpha * int_P^inf pi(t) t^{-alpha-1} dt.
    alpha * 1.25506 / p.ln() * p.powf(1.0 - alpha) / (alpha - 1.0)
}

/// Product over primes `p <= cutoff` of `1 + f(p)`, and a bound for the
/// omitted tail given `|f(p)| <= c p^{-alpha}` for `p > cutoff`.
fn euler_product(
    cutoff: u64,
    skip_two: bool,
    f: impl Fn(f64) -> f64,
    c: f64,
    alpha: f64,
    method: &str,
) -> Bounded {
    let primes = arith::primes_up_to(cutoff);
    let mut log_sum = 0.0;
    let mut comp = 0.0;
    for &p in &primes {
        if skip_two && p == 2 {
            continue;
        }
        let y = f(p as f64).ln_1p() - comp;
        let z = log_sum + y;
        comp = (z - log_sum) - y;
        log_sum = z;
    }
    let value = log_sum.exp();
    let tail = c * prime_tail_bound(alpha, cutoff);
    // |log(1 + v)| <= |v| / (1 - |v|) for |v| < 1.
    let tail_log = tail / (1.0 - c * (cutoff as f64).powf(-alpha));
    let rounding = 4.0 * EPS * (primes.len() as f64 + log_sum.abs());
    Bounded::new(value, value * ((tail_log + rounding).exp() - 1.0), method)
}

/// `prod_p (1 - (p^{1/3} + 1) / (p (p + 1)))`.
pub fn euler_product_torsion(wp: WorkingPrecision) -> Bounded {
    // (p^{1/3} + 1) / (p (p + 1)) <= 2 p^{-5/3}.
    euler_product(
        wp.prime_cutoff,
        false,
        |p| -(p.cbrt() + 1.0) / (p * (p + 1.0)),
        2.0,
        5.0 / 3.0,
        "truncated Euler product with prime-counting tail bound",
    )
}

/// Product over primes up to `cutoff`, without a tail, for monotonicity
/// checks.
pub fn euler_product_torsion_partial(cutoff: u64) -> f64 {
    arith::primes_up_to(cutoff)
        .iter()
        .map(|&p| {
            let p = p as f64;
            1.0 - (p.cbrt() + 1.0) / (p * (p + 1.0))
        })
        .product()
}

/// Conjectural secondary constant `C_{1,k}` for the `k`-torsion count,
/// together with its exponent `1/2 + 1/k`.
pub fn hough_constant(k: u32, tol: f64) -> Result<(Bounded, f64)> {
    hough_constant_with(k, tol, WorkingPrecision::default())
}

pub fn hough_constant_with(k: u32, tol: f64, wp: WorkingPrecision) -> Result<(Bounded, f64)> {
    if k < 3 || k % 2 == 0 {
        return Err(invalid(format!("k must be odd and at least 3, got {k}")));
    }
    let kf = k as f64;
    let z1 = zeta_with(1.0 - 2.0 / kf, tol, wp)?;
    let z2 = zeta_with(2.0, tol, wp)?;
    let g1 = gamma_with(0.5, tol, wp)?;
    let g2 = gamma_with(0.5 - 1.0 / kf, tol, wp)?;
    let g3 = gamma_with(1.0 - 1.0 / kf, tol, wp)?;
    let two = 1.0 - 2f64.powf(1.0 / kf) + 2f64.powf(1.0 - 1.0 / kf);
    // Each local term is at most 4 p^{-1-1/k} in absolute value.
    let prod = euler_product(
        wp.prime_cutoff,
        true,
        |p| {
            (p.powf(-1.0 / kf) - p.powf(-1.0 + 2.0 / kf) - p.powf(-1.0 + 1.0 / kf) - 1.0 / p)
                / (p + 1.0)
        },
        4.0,
        1.0 + 1.0 / kf,
        "",
    );
    let value = 1.0 / (6.0 * kf) * (z1.value / z2.value) * (g1.value * g2.value / g3.value) * two
        * prod.value;
    let c = combine(
        value,
        &[
            z1.relative_bound(),
            z2.relative_bound(),
            g1.relative_bound(),
            g2.relative_bound(),
            g3.relative_bound(),
            prod.relative_bound(),
        ],
        "special values and truncated Euler product",
    );
    Ok((c, 0.5 + 1.0 / kf))
}

/// The special values entering the two counting theorems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialValues {
    pub zeta3: Bounded,
    pub zeta13: Bounded,
    pub zeta53: Bounded,
    pub gamma23: Bounded,
    pub euler_torsion: Bounded,
}

impl SpecialValues {
    pub fn compute(tol: f64) -> Result<Self> {
        Self::compute_with(tol, WorkingPrecision::default())
    }

    pub fn compute_with(tol: f64, wp: WorkingPrecision) -> Result<Self> {
        Ok(Self {
            zeta3: zeta_with(3.0, tol, wp)?,
            zeta13: zeta_with(1.0 / 3.0, tol, wp)?,
            zeta53: zeta_with(5.0 / 3.0, tol, wp)?,
            gamma23: gamma_with(2.0 / 3.0, tol, wp)?,
            euler_torsion: euler_product_torsion(wp),
        })
    }

    pub fn named(&self) -> [(&'static str, &Bounded); 5] {
        [
            ("zeta(3)", &self.zeta3),
            ("zeta(1/3)", &self.zeta13),
            ("zeta(5/3)", &self.zeta53),
            ("gamma(2/3)", &self.gamma23),
            ("euler_torsion", &self.euler_torsion),
        ]
    }

    /// Re-evaluate at doubled working precision and report, per value,
    /// whether the refined value lies within the original bound.
    pub fn validate_bounds(&self, tol: f64, wp: WorkingPrecision) -> Result<Vec<(&'static str, bool)>> {
        let refined = Self::compute_with(tol, wp.refined())?;
        Ok(self
            .named()
            .iter()
            .zip(refined.named().iter())
            .map(|((name, a), (_, b))| (*name, a.contains(b.value)))
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    Cubic,
    Torsion,
}

impl std::str::FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cubic" => Ok(Theorem::Cubic),
            "torsion" => Ok(Theorem::Torsion),
            _ => Err(invalid(format!("unknown theorem `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Formula,
    Fitted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionModel {
    pub sign: Sign,
    pub a: f64,
    pub b: f64,
    pub provenance: Provenance,
}

impl PredictionModel {
    pub fn predict(&self, x: f64) -> f64 {
        self.a * x + self.b * x.powf(5.0 / 6.0)
    }
}

fn c_sign(sign: Sign) -> f64 {
    match sign {
        Sign::Plus => 1.0,
        Sign::Minus => 3.0,
    }
}

fn k_sign(sign: Sign) -> f64 {
    match sign {
        Sign::Plus => 1.0,
        Sign::Minus => 3f64.sqrt(),
    }
}

/// Formula coefficients of `A X + B X^{5/6}`.
pub fn formula_model(sign: Sign, theorem: Theorem, sv: &SpecialValues) -> PredictionModel {
    let g3 = sv.gamma23.value.powi(3);
    let (a, b) = match theorem {
        Theorem::Cubic => (
            c_sign(sign) / (12.0 * sv.zeta3.value),
            k_sign(sign) * 4.0 * sv.zeta13.value / (5.0 * g3 * sv.zeta53.value),
        ),
        Theorem::Torsion => (
            (3.0 + c_sign(sign)) / (PI * PI),
            k_sign(sign) * 8.0 * sv.zeta13.value / (5.0 * g3) * sv.euler_torsion.value,
        ),
    };
    PredictionModel {
        sign,
        a,
        b,
        provenance: Provenance::Formula,
    }
}

static DEFAULT_VALUES: Lazy<Result<SpecialValues>> = Lazy::new(|| SpecialValues::compute(1e-12));

fn default_values() -> Result<&'static SpecialValues> {
    DEFAULT_VALUES.as_ref().map_err(|e| Error::Internal(e.to_string()))
}

pub fn predicted_counts(sign: Sign, x: f64, theorem: Theorem) -> Result<f64> {
    if !(x > 0.0) {
        return Err(invalid("X must be positive"));
    }
    Ok(formula_model(sign, theorem, default_values()?).predict(x))
}

pub fn prediction_model(sign: Sign, theorem: Theorem) -> Result<PredictionModel> {
    Ok(formula_model(sign, theorem, default_values()?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub residual_norm: f64,
    pub grid: Vec<(f64, f64)>,
}

/// Least-squares `(A, B)` for `count = A X + B X^{5/6}`, by Householder-free
/// modified Gram-Schmidt on column-scaled data.
pub fn fit_secondary(grid: &[(f64, f64)]) -> Result<FitResult> {
    if grid.len() < 2 {
        return Err(invalid("at least two grid points are required"));
    }
    let mut xs: Vec<f64> = grid.iter().map(|g| g.0).collect();
    if xs.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(invalid("grid abscissae must be positive"));
    }
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("grid abscissae must be distinct"));
    }
    let scale = xs[xs.len() - 1];
    let c1: Vec<f64> = grid.iter().map(|g| g.0 / scale).collect();
    let c2: Vec<f64> = grid.iter().map(|g| (g.0 / scale).powf(5.0 / 6.0)).collect();
    let y: Vec<f64> = grid.iter().map(|g| g.1).collect();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let r11 = dot(&c1, &c1).sqrt();
    let q1: Vec<f64> = c1.iter().map(|v| v / r11).collect();
    let r12 = dot(&q1, &c2);
    let w: Vec<f64> = c2.iter().zip(&q1).map(|(c, q)| c - r12 * q).collect();
    let r22 = dot(&w, &w).sqrt();
    if r22 <= 1e-12 * r11 {
        return Err(invalid("degenerate grid"));
    }
    let q2: Vec<f64> = w.iter().map(|v| v / r22).collect();
    let z1 = dot(&q1, &y);
    let z2 = dot(&q2, &y);
    let bs = z2 / r22;
    let as_ = (z1 - r12 * bs) / r11;
    let a = as_ / scale;
    let b = bs / scale.powf(5.0 / 6.0);
    let residual_norm = grid
        .iter()
        .map(|&(x, c)| (c - a * x - b * x.powf(5.0 / 6.0)).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(FitResult {
        a,
        b,
        residual_norm,
        grid: grid.to_vec(),
    })
}

/// `(n^n / n!)^2 (pi / 4)^{2s}`.
pub fn minkowski_bound(n: u32, s: u32) -> Result<f64> {
    if n == 0 || 2 * s > n || n > 100 {
        return Err(invalid(format!("invalid degree {n} with {s} complex pairs")));
    }
    let nf = n as f64;
    let ratio = nf.powi(n as i32) / factorial(n as usize);
    Ok(ratio * ratio * (PI / 4.0).powi(2 * s as i32))
}
