//! Complete, duplicate-free streams of `GL_2(Z)`-classes of nondegenerate
//! integral binary cubic forms with `0 < +-disc < X`.
//!
//! The production enumerator walks the forms whose attached point lies in the
//! closed fundamental domain, using coefficient bounds implied by that
//! condition; every class has at least one such form. The oracle scans a
//! coefficient box blindly and enlarges it until the output stops changing.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::forms::{in_domain, irreducible_unchecked, BinaryCubicForm, OrbitRecord};
use crate::sign::Sign;

/// Largest supported discriminant bound.
pub const MAX_DISC: u64 = 1_000_000_000;

/// Bump whenever the cache layout or record semantics change.
pub const CACHE_FORMAT_VERSION: u32 = 1;

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "CUBIC_CACHE_DIR";

/// Which classes a stream contains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scope {
    /// Irreducible classes only (orders in cubic fields).
    Irreducible,
    /// Every nondegenerate class, reducible ones included.
    All,
}

/// One unit of enumeration work.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationTask {
    pub sign: Sign,
    pub max_disc: u64,
    pub scope: Scope,
    /// Disjoint inclusive ranges of the leading coefficient `a` covering
    /// `0..=a_max`.
    pub slices: Vec<(i64, i64)>,
}

impl EnumerationTask {
    pub fn new(sign: Sign, max_disc: u64, scope: Scope) -> Result<Self> {
        validate_bound(max_disc)?;
        let a_max = leading_bound(sign, max_disc);
        let slices = (0..=a_max).map(|a| (a, a)).collect();
        Ok(Self {
            sign,
            max_disc,
            scope,
            slices,
        })
    }

    /// Same task split into `n` contiguous slices of the leading coefficient.
    pub fn with_slices(mut self, n: usize) -> Self {
        let a_max = leading_bound(self.sign, self.max_disc);
        let total = (a_max + 1) as usize;
        let n = n.clamp(1, total);
        let mut out = Vec::with_capacity(n);
        let mut start = 0i64;
        for i in 0..n {
            let len = (total / n + usize::from(i < total % n)) as i64;
            out.push((start, start + len - 1));
            start += len;
        }
        self.slices = out;
        self
    }
}

/// Records sorted by `|disc|`, then canonical coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldStream {
    pub sign: Sign,
    pub max_disc: u64,
    pub scope: Scope,
    pub records: Vec<OrbitRecord>,
}

impl FieldStream {
    fn from_unsorted(sign: Sign, max_disc: u64, scope: Scope, mut records: Vec<OrbitRecord>) -> Self {
        records.sort_unstable_by_key(OrbitRecord::sort_key);
        records.dedup_by_key(|r| r.canonical);
        Self {
            sign,
            max_disc,
            scope,
            records,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The stream for a smaller bound, by prefix truncation.
    pub fn truncate_to(&self, max_disc: u64) -> Result<Self> {
        if max_disc > self.max_disc {
            return Err(invalid(format!(
                "cannot extend a stream for X = {} to X = {max_disc}",
                self.max_disc
            )));
        }
        let end = self
            .records
            .partition_point(|r| r.disc.unsigned_abs() < max_disc);
        Ok(Self {
            sign: self.sign,
            max_disc,
            scope: self.scope,
            records: self.records[..end].to_vec(),
        })
    }

    /// Irreducible records only.
    pub fn irreducible(&self) -> Self {
        Self {
            sign: self.sign,
            max_disc: self.max_disc,
            scope: Scope::Irreducible,
            records: self.records.iter().filter(|r| r.irreducible).copied().collect(),
        }
    }
}

fn validate_bound(x: u64) -> Result<()> {
    if x == 0 || x > MAX_DISC {
        return Err(invalid(format!(
            "discriminant bound must lie in 1..={MAX_DISC}, got {x}"
        )));
    }
    Ok(())
}

/// Bound on the leading coefficient of in-domain forms with `|disc| < X`.
fn leading_bound(sign: Sign, x: u64) -> i64 {
    let x = x as f64;
    let v = match sign {
        Sign::Plus => (2.0f64 / 3.0).powf(1.5) * x.powf(0.25),
        Sign::Minus => (16.0 * x / 27.0).powf(0.25),
    };
    v.floor() as i64 + 1
}

#[inline]
fn disc_in_range(disc: i128, sign: Sign, x: u64) -> bool {
    match sign {
        Sign::Plus => disc > 0 && disc < x as i128,
        Sign::Minus => disc < 0 && -disc < x as i128,
    }
}

struct Collector {
    scope: Scope,
    out: Vec<OrbitRecord>,
}

impl Collector {
    #[inline]
    fn push(&mut self, f: BinaryCubicForm, disc: i128, positive: bool) -> Result<()> {
        if !in_domain(&f, positive)? {
            return Ok(());
        }
        if self.scope == Scope::Irreducible && !irreducible_unchecked(&f) {
            return Ok(());
        }
        self.out.push(OrbitRecord::from_domain_form(&f, disc as i64)?);
        Ok(())
    }
}

/// In-domain forms with `disc > 0` and the given `(a, b)`, `a > 0`.
fn scan_positive(a: i64, b: i64, x: u64, col: &mut Collector) -> Result<()> {
    let sqrt_x = (x as f64).sqrt();
    let p_max = sqrt_x.floor() as i64 + 1;
    // P = b^2 - 3ac must lie in [1, sqrt(X)].
    let c_lo = (b * b - p_max).div_euclid(3 * a);
    let c_hi = (b * b - 1).div_euclid(3 * a);
    for c in c_lo..=c_hi {
        let p = b * b - 3 * a * c;
        if p < 1 || (p as f64) > sqrt_x + 1.0 {
            continue;
        }
        // |Q| <= P with Q = bc - 9ad.
        let d_lo = (b as i128 * c as i128 - p as i128).div_euclid(9 * a as i128);
        let d_hi = (b as i128 * c as i128 + p as i128).div_euclid(9 * a as i128) + 1;
        for d in d_lo as i64..=d_hi as i64 {
            let f = BinaryCubicForm::new(a, b, c, d);
            let disc = f.discriminant_i128();
            if disc_in_range(disc, Sign::Plus, x) {
                col.push(f, disc, true)?;
            }
        }
    }
    Ok(())
}

/// In-domain forms with `disc > 0`, `a = 0`, `b > 0` (all reducible).
fn scan_positive_a0(b: i64, x: u64, col: &mut Collector) -> Result<()> {
    for c in -b..=b {
        // R >= P reads d <= (c^2 - b^2) / (3b); disc = b^2 (c^2 - 4bd) < X.
        let d_hi = (c * c - b * b).div_euclid(3 * b);
        let d_lo = ((b * b * c * c) as i128 - x as i128).div_euclid(4 * (b as i128).pow(3)) as i64;
        for d in d_lo..=d_hi {
            let f = BinaryCubicForm::new(0, b, c, d);
            let disc = f.discriminant_i128();
            if disc_in_range(disc, Sign::Plus, x) {
                col.push(f, disc, true)?;
            }
        }
    }
    Ok(())
}

fn concave_roots(alpha: f64, beta: f64, gamma: f64, target: f64) -> Option<(f64, f64)> {
    let c = gamma - target;
    let disc = beta * beta - 4.0 * alpha * c;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let r1 = (-beta + s) / (2.0 * alpha);
    let r2 = (-beta - s) / (2.0 * alpha);
    Some(if r1 < r2 { (r1, r2) } else { (r2, r1) })
}

/// Integer intervals covering `{d : lo < q(d) < hi}` for the concave
/// quadratic `q(d) = alpha d^2 + beta d + gamma` (`alpha < 0`), widened by a
/// safety margin so that floating-point error cannot drop a solution. The
/// set is a band around the two roots of `q = hi`, hence at most two pieces.
fn concave_band(alpha: f64, beta: f64, gamma: f64, lo: f64, hi: f64) -> Vec<(i64, i64)> {
    let Some((r1, r2)) = concave_roots(alpha, beta, gamma, lo) else {
        return Vec::new();
    };
    let margin = |v: f64| 2.0 + 1e-9 * v.abs();
    let fl = |v: f64| (v - margin(v)).floor() as i64;
    let ce = |v: f64| (v + margin(v)).ceil() as i64;
    match concave_roots(alpha, beta, gamma, hi) {
        Some((s1, s2)) if ce(s1) < fl(s2) => vec![(fl(r1), ce(s1)), (fl(s2), ce(r2))],
        _ => vec![(fl(r1), ce(r2))],
    }
}

/// In-domain forms with `disc < 0` and the given `(a, b)`, `a > 0`.
fn scan_negative(a: i64, b: i64, x: u64, col: &mut Collector) -> Result<()> {
    let xf = x as f64;
    let af = a as f64;
    let y_max2 = (xf / (4.0 * af.powi(4))).powf(1.0 / 3.0);
    let alpha_max = 0.5 + (xf / (3.0 * af.powi(4))).powf(0.25);
    let c_max = (af * (0.25 + y_max2) + af * alpha_max).ceil() as i64 + 1;
    let d_max = (af * alpha_max * (0.25 + y_max2)).ceil() as i64 + 1;
    let a2 = (a * a) as f64;
    for c in -c_max..=c_max {
        // disc(d) = -27 a^2 d^2 + (18abc - 4b^3) d + (b^2 c^2 - 4ac^3) > -X.
        let beta = 18.0 * af * b as f64 * c as f64 - 4.0 * (b as f64).powi(3);
        let gamma = (b as f64 * c as f64).powi(2) - 4.0 * af * (c as f64).powi(3);
        for (lo, hi) in concave_band(-27.0 * a2, beta, gamma, -xf, 0.0) {
            for d in lo.max(-d_max)..=hi.min(d_max) {
                let f = BinaryCubicForm::new(a, b, c, d);
                let disc = f.discriminant_i128();
                if disc_in_range(disc, Sign::Minus, x) {
                    col.push(f, disc, false)?;
                }
            }
        }
    }
    Ok(())
}

/// In-domain forms with `disc < 0`, `a = 0`, `b > 0` (all reducible):
/// `|c| <= b <= d` and `b^2 (4bd - c^2) < X`.
fn scan_negative_a0(b: i64, x: u64, col: &mut Collector) -> Result<()> {
    for c in -b..=b {
        let d_hi = (x as i128 + (b * b * c * c) as i128).div_euclid(4 * (b as i128).pow(3)) as i64 + 1;
        for d in b..=d_hi {
            let f = BinaryCubicForm::new(0, b, c, d);
            let disc = f.discriminant_i128();
            if disc_in_range(disc, Sign::Minus, x) {
                col.push(f, disc, false)?;
            }
        }
    }
    Ok(())
}

fn b_bound(sign: Sign, a: i64, x: u64) -> i64 {
    let xf = x as f64;
    let af = a as f64;
    let v = match sign {
        // |b + 3a Re z| <= sqrt(6 P) and P <= sqrt(X).
        Sign::Plus => 1.5 * af + 6.0f64.sqrt() * xf.powf(0.25),
        Sign::Minus => 1.5 * af + (xf / 3.0).powf(0.25),
    };
    v.ceil() as i64 + 1
}

/// Work for one leading coefficient and one `b`.
fn scan_cell(sign: Sign, x: u64, scope: Scope, a: i64, b: i64) -> Result<Vec<OrbitRecord>> {
    let mut col = Collector {
        scope,
        out: Vec::new(),
    };
    match (sign, a) {
        (Sign::Plus, 0) => scan_positive_a0(b, x, &mut col)?,
        (Sign::Minus, 0) => scan_negative_a0(b, x, &mut col)?,
        (Sign::Plus, _) => scan_positive(a, b, x, &mut col)?,
        (Sign::Minus, _) => scan_negative(a, b, x, &mut col)?,
    }
    Ok(col.out)
}

fn cells(task: &EnumerationTask) -> Vec<(i64, i64)> {
    let x = task.max_disc;
    let mut out = Vec::new();
    for &(lo, hi) in &task.slices {
        for a in lo..=hi {
            if a == 0 {
                if task.scope == Scope::All {
                    let b_max = (x as f64).powf(0.25).ceil() as i64 + 1;
                    out.extend((1..=b_max).map(|b| (0, b)));
                }
                continue;
            }
            let bb = b_bound(task.sign, a, x);
            out.extend((-bb..=bb).map(|b| (a, b)));
        }
    }
    out
}

/// Run a task; the result is independent of the slicing and thread count.
pub fn run_task(task: &EnumerationTask) -> Result<FieldStream> {
    validate_bound(task.max_disc)?;
    let parts: Vec<Vec<OrbitRecord>> = cells(task)
        .into_par_iter()
        .map(|(a, b)| scan_cell(task.sign, task.max_disc, task.scope, a, b))
        .collect::<Result<_>>()?;
    let records = parts.into_iter().flatten().collect();
    Ok(FieldStream::from_unsorted(
        task.sign,
        task.max_disc,
        task.scope,
        records,
    ))
}

/// Irreducible classes with `0 < +-disc < X`.
pub fn enumerate_orbits(sign: Sign, x: u64) -> Result<FieldStream> {
    run_task(&EnumerationTask::new(sign, x, Scope::Irreducible)?)
}

/// Every nondegenerate class with `0 < +-disc < X`.
pub fn enumerate_all_orbits(sign: Sign, x: u64) -> Result<FieldStream> {
    run_task(&EnumerationTask::new(sign, x, Scope::All)?)
}

/// Integer intervals covering `{d : 0 < +-q(d) < X}` for
/// `q(d) = alpha d^2 + beta d + gamma` with `alpha <= 0`, clipped to `[-h, h]`.
fn oracle_d_ranges(alpha: f64, beta: f64, gamma: f64, sign: Sign, x: f64, h: i64) -> Vec<(i64, i64)> {
    let (lo_t, hi_t) = match sign {
        Sign::Plus => (0.0, x),
        Sign::Minus => (-x, 0.0),
    };
    let raw = if alpha == 0.0 {
        if beta == 0.0 {
            return Vec::new();
        }
        let e1 = (lo_t - gamma) / beta;
        let e2 = (hi_t - gamma) / beta;
        let (l, r) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        vec![((l - 2.0).floor() as i64, (r + 2.0).ceil() as i64)]
    } else {
        concave_band(alpha, beta, gamma, lo_t, hi_t)
    };
    raw.into_iter()
        .map(|(l, r)| (l.max(-h), r.min(h)))
        .filter(|(l, r)| l <= r)
        .collect()
}

/// One blind scan of the box `max(|a|,|b|,|c|,|d|) <= h` (with `a >= 0` by
/// the symmetry `f -> -f`), canonicalizing every form in range. Reducible
/// classes need boxes of size about `X / 4` to saturate, so the `All` scope
/// is only practical for small `X`.
pub fn oracle_scan(sign: Sign, x: u64, h: i64, scope: Scope) -> Result<FieldStream> {
    validate_bound(x)?;
    if h < 1 {
        return Err(invalid("coefficient bound must be positive"));
    }
    let xf = x as f64;
    let parts: Vec<HashSet<OrbitRecord>> = (0..=h)
        .into_par_iter()
        .map(|a| -> Result<HashSet<OrbitRecord>> {
            let mut seen = HashSet::new();
            if a == 0 && scope == Scope::Irreducible {
                return Ok(seen);
            }
            for b in -h..=h {
                for c in -h..=h {
                    let (af, bf, cf) = (a as f64, b as f64, c as f64);
                    let alpha = -27.0 * af * af;
                    let beta = 18.0 * af * bf * cf - 4.0 * bf.powi(3);
                    let gamma = bf * bf * cf * cf - 4.0 * af * cf.powi(3);
                    for (lo, hi) in oracle_d_ranges(alpha, beta, gamma, sign, xf, h) {
                        for d in lo..=hi {
                            let f = BinaryCubicForm::new(a, b, c, d);
                            let disc = f.discriminant_i128();
                            if !disc_in_range(disc, sign, x) {
                                continue;
                            }
                            if scope == Scope::Irreducible && !irreducible_unchecked(&f) {
                                continue;
                            }
                            seen.insert(OrbitRecord::from_form(&f)?);
                        }
                    }
                }
            }
            Ok(seen)
        })
        .collect::<Result<_>>()?;
    let mut all = BTreeMap::new();
    for p in parts {
        all.extend(p.into_iter().map(|r| (r.sort_key(), r)));
    }
    Ok(FieldStream::from_unsorted(
        sign,
        x,
        scope,
        all.into_values().collect(),
    ))
}

/// Box-scan oracle with saturation: starting from `h` (default
/// `2 X^{1/4}`), the box is doubled until two consecutive doublings leave the
/// stream unchanged. Gives up after `max_doublings` doublings.
pub fn oracle_enumerate(
    sign: Sign,
    x: u64,
    scope: Scope,
    h: Option<i64>,
    max_doublings: u32,
) -> Result<FieldStream> {
    let mut h = h.unwrap_or_else(|| (2.0 * (x as f64).powf(0.25)).ceil() as i64);
    let mut prev = oracle_scan(sign, x, h, scope)?;
    let mut stable = 0;
    for _ in 0..max_doublings {
        h *= 2;
        let next = oracle_scan(sign, x, h, scope)?;
        if next.len() < prev.len() {
            return Err(Error::Internal("oracle count decreased with a larger box".into()));
        }
        if next == prev {
            stable += 1;
            if stable == 2 {
                return Ok(next);
            }
        } else {
            stable = 0;
        }
        prev = next;
    }
    Err(Error::Incomplete(format!(
        "oracle not saturated for X = {x} at coefficient bound {h}"
    )))
}

/// Manifest stored next to each cached stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CacheManifest {
    pub format_version: u32,
    pub sign: Sign,
    pub max_disc: u64,
    pub scope: Scope,
    pub checksum: String,
    pub record_count: u64,
}

/// How a cached stream was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheOutcome {
    /// Served from an existing file, possibly truncated from a larger bound.
    Hit,
    /// No usable file existed; enumerated and written.
    Built,
    /// A matching file failed validation; enumerated and rewritten.
    Rebuilt,
}

/// Default cache directory: `$CUBIC_CACHE_DIR`, else `./.cubic-cache`.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".cubic-cache"))
}

fn scope_word(scope: Scope) -> &'static str {
    match scope {
        Scope::Irreducible => "irr",
        Scope::All => "all",
    }
}

fn cache_stem(sign: Sign, max_disc: u64, scope: Scope) -> String {
    format!(
        "forms-v{CACHE_FORMAT_VERSION}-{}-{}-{max_disc}",
        sign.word(),
        scope_word(scope)
    )
}

/// CSV body (header plus rows) of a stream.
pub fn stream_csv_body(stream: &FieldStream) -> String {
    let mut s = String::with_capacity(32 * stream.len() + 40);
    s.push_str("disc,a,b,c,d,stab,irreducible\n");
    for r in &stream.records {
        let f = r.canonical;
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.disc,
            f.a,
            f.b,
            f.c,
            f.d,
            r.stab_order,
            u8::from(r.irreducible)
        ));
    }
    s
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Full cache file contents: body plus `#sha256:<hex>` trailer.
pub fn encode_stream(stream: &FieldStream) -> (String, String) {
    let body = stream_csv_body(stream);
    let sum = sha256_hex(body.as_bytes());
    (format!("{body}#sha256:{sum}\n"), sum)
}

fn corrupt(path: &Path, reason: impl Into<String>) -> Error {
    Error::CacheCorrupt {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Parse and verify a cache file written by [`encode_stream`].
pub fn decode_stream(path: &Path, text: &str, manifest: &CacheManifest) -> Result<FieldStream> {
    let trailer_at = text
        .rfind("#sha256:")
        .ok_or_else(|| corrupt(path, "missing checksum line"))?;
    let (body, trailer) = text.split_at(trailer_at);
    let sum = trailer.trim_start_matches("#sha256:").trim_end();
    if sum != sha256_hex(body.as_bytes()) || sum != manifest.checksum {
        return Err(corrupt(path, "checksum mismatch"));
    }
    let mut lines = body.lines();
    if lines.next() != Some("disc,a,b,c,d,stab,irreducible") {
        return Err(corrupt(path, "unexpected header"));
    }
    let mut records = Vec::with_capacity(manifest.record_count as usize);
    for line in lines {
        let v: Vec<i64> = line
            .split(',')
            .map(|t| t.parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| corrupt(path, format!("bad row {line:?}: {e}")))?;
        if v.len() != 7 {
            return Err(corrupt(path, format!("bad row {line:?}")));
        }
        records.push(OrbitRecord {
            canonical: BinaryCubicForm::new(v[1], v[2], v[3], v[4]),
            disc: v[0],
            stab_order: v[5] as u8,
            irreducible: v[6] != 0,
        });
    }
    if records.len() as u64 != manifest.record_count {
        return Err(corrupt(path, "record count mismatch"));
    }
    Ok(FieldStream {
        sign: manifest.sign,
        max_disc: manifest.max_disc,
        scope: manifest.scope,
        records,
    })
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("cache"),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_manifest(path: &Path) -> Option<CacheManifest> {
    let text = fs::read_to_string(path).ok()?;
    serde_json::from_str(&text).ok()
}

/// Smallest cached bound `>= max_disc` for this sign and scope.
fn find_cached(dir: &Path, sign: Sign, max_disc: u64, scope: Scope) -> Option<(PathBuf, CacheManifest)> {
    let entries = fs::read_dir(dir).ok()?;
    let mut best: Option<(PathBuf, CacheManifest)> = None;
    for e in entries.flatten() {
        let p = e.path();
        if p.extension().and_then(|s| s.to_str()) != Some("json") {
            continue;
        }
        let Some(m) = read_manifest(&p) else { continue };
        if m.format_version != CACHE_FORMAT_VERSION
            || m.sign != sign
            || m.scope != scope
            || m.max_disc < max_disc
        {
            continue;
        }
        if best.as_ref().is_none_or(|(_, b)| m.max_disc < b.max_disc) {
            best = Some((p, m));
        }
    }
    best
}

/// Return the stream for `task`, from the cache when possible. A file that
/// fails validation is rebuilt rather than reported.
pub fn load_or_build_cache(task: &EnumerationTask, dir: &Path) -> Result<(FieldStream, CacheOutcome)> {
    validate_bound(task.max_disc)?;
    fs::create_dir_all(dir)?;
    let mut outcome = CacheOutcome::Built;
    if let Some((manifest_path, manifest)) = find_cached(dir, task.sign, task.max_disc, task.scope) {
        let csv_path = manifest_path.with_extension("csv");
        let loaded = fs::read_to_string(&csv_path)
            .map_err(Error::from)
            .and_then(|text| decode_stream(&csv_path, &text, &manifest));
        match loaded {
            Ok(stream) => return Ok((stream.truncate_to(task.max_disc)?, CacheOutcome::Hit)),
            Err(_) => outcome = CacheOutcome::Rebuilt,
        }
    }
    let stream = run_task(task)?;
    store_stream(&stream, dir)?;
    Ok((stream, outcome))
}

/// Write a stream and its manifest atomically.
pub fn store_stream(stream: &FieldStream, dir: &Path) -> Result<()> {
    let stem = cache_stem(stream.sign, stream.max_disc, stream.scope);
    let (contents, checksum) = encode_stream(stream);
    let manifest = CacheManifest {
        format_version: CACHE_FORMAT_VERSION,
        sign: stream.sign,
        max_disc: stream.max_disc,
        scope: stream.scope,
        checksum,
        record_count: stream.len() as u64,
    };
    let csv_path = dir.join(format!("{stem}.csv"));
    write_atomic(&csv_path, contents.as_bytes())?;
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Internal(format!("manifest serialization: {e}")))?;
    write_atomic(&dir.join(format!("{stem}.json")), json.as_bytes())?;
    Ok(())
}
