//! Subcommand implementations. Each returns a table and whether every
//! verification it performed passed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cubic_core::asymptotics::{
    fit_secondary, hough_constant, prediction_model, zeta_one_third_partial_sums, Bounded,
    SpecialValues, Theorem,
};
use cubic_core::census::{verify_bst_identity, Census};
use cubic_core::classgroups::{bqf_torsion_table, count_quadratic_fields_signed, sum_cl3_cubic};
use cubic_core::enumeration::{
    load_or_build_cache, run_task, EnumerationTask, CACHE_DIR_ENV,
};
use cubic_core::golden::{reference_tables, REFERENCE_MAX_DISC};
use cubic_core::hough::{
    admissible_discriminants, ideal_of_solution, soundararajan_solutions, count_in_region,
    vertical_histogram,
};
use cubic_core::maximality::phihat_abs_sum;
use cubic_core::{arith, FieldStream, Scope, Sign};

use crate::output::{Cell, Table};

pub struct Report {
    pub table: Table,
    pub verified: bool,
}

impl Report {
    fn ok(table: Table) -> Self {
        Self {
            table,
            verified: true,
        }
    }
}

/// Cache directory from the flag, else from the environment.
pub fn cache_dir(flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
}

fn stream(sign: Sign, x: u64, scope: Scope, cache: Option<&Path>) -> Result<FieldStream> {
    let task = EnumerationTask::new(sign, x, scope)?;
    Ok(match cache {
        Some(dir) => load_or_build_cache(&task, dir)?.0,
        None => run_task(&task)?,
    })
}

fn census(sign: Sign, x: u64, cache: Option<&Path>) -> Result<Census> {
    Ok(Census::from_stream(stream(sign, x, Scope::Irreducible, cache)?))
}

pub fn fields(sign: Sign, x: u64, scope: Scope, cache: Option<&Path>) -> Result<Report> {
    let s = stream(sign, x, scope, cache)?;
    let mut t = Table::new(&["disc", "a", "b", "c", "d", "stab", "irreducible"]);
    for r in &s.records {
        let f = r.canonical;
        t.push(vec![
            r.disc.into(),
            f.a.into(),
            f.b.into(),
            f.c.into(),
            f.d.into(),
            (r.stab_order as u64).into(),
            r.irreducible.into(),
        ]);
    }
    Ok(Report::ok(t))
}

fn progression_rows(t: &mut Table, c: &Census, x: u64, m: u64) -> Result<()> {
    let table = c.census_by_progression(x, m)?;
    for (r, n) in table.counts.iter().enumerate() {
        t.push(vec![m.into(), (r as u64).into(), (*n).into()]);
    }
    Ok(())
}

pub fn census_cmd(sign: Sign, x: u64, modulus: Option<u64>, cache: Option<&Path>) -> Result<Report> {
    let c = census(sign, x, cache)?;
    let mut t = Table::new(&["modulus", "residue", "count"]);
    progression_rows(&mut t, &c, x, modulus.unwrap_or(1))?;
    let w = c.count_weighted_classes(x)?;
    t.notes.push(format!(
        "sign {sign}, 0 < |disc| < {x}: {} cubic fields, weighted irreducible classes {}",
        c.count_cubic_fields(x)?,
        w.value
    ));
    Ok(Report::ok(t))
}

pub fn tables(x: u64, reproduce: bool, cache: Option<&Path>) -> Result<Report> {
    let x = if reproduce { REFERENCE_MAX_DISC } else { x };
    let c = census(Sign::Plus, x, cache)?;
    if !reproduce {
        let mut t = Table::new(&["modulus", "residue", "count"]);
        for m in [5, 7] {
            progression_rows(&mut t, &c, x, m)?;
        }
        return Ok(Report::ok(t));
    }
    let golden = reference_tables()?;
    let mut t = Table::new(&["modulus", "residue", "count", "reference", "diff"]);
    let mut verified = true;
    for (m, reference) in &golden.progressions {
        let table = c.census_by_progression(x, *m)?;
        for (r, (n, g)) in table.counts.iter().zip(reference).enumerate() {
            let diff = *n as i64 - *g as i64;
            verified &= diff == 0;
            t.push(vec![(*m).into(), (r as u64).into(), (*n).into(), (*g).into(), diff.into()]);
        }
    }
    let total = c.count_cubic_fields(x)?;
    verified &= total == golden.total;
    t.notes.push(format!(
        "totally real cubic fields with disc < {x}: {total} (reference {})",
        golden.total
    ));
    Ok(Report { table: t, verified })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Route {
    Cubic,
    Bqf,
    Both,
}

pub fn torsion(sign: Sign, x: u64, route: Route, cache: Option<&Path>) -> Result<Report> {
    if sign == Sign::Plus && route != Route::Cubic {
        bail!(cubic_core::Error::InvalidArgument(
            "positive discriminants support only the cubic route".into()
        ));
    }
    let mut t = Table::new(&["D", "h", "cl3"]);
    let mut verified = true;
    let cubic = if route == Route::Bqf {
        None
    } else {
        let c = census(sign, x, cache)?;
        let mut per_disc: BTreeMap<i64, u64> = BTreeMap::new();
        for d in c.field_discriminants(x)? {
            *per_disc.entry(d).or_default() += 1;
        }
        t.notes.push(format!("sum of #Cl3 over fundamental 0 < |D| < {x}: {}", sum_cl3_cubic(&c, x)?));
        Some(per_disc)
    };
    let cubic_cl3 = |d: i64| 1 + 2 * cubic.as_ref().and_then(|m| m.get(&d)).copied().unwrap_or(0);
    if route == Route::Cubic {
        for n in 2..x {
            let d = sign.as_i64() * n as i64;
            if arith::is_fundamental(d) {
                t.push(vec![d.into(), Cell::Null, cubic_cl3(d).into()]);
            }
        }
        debug_assert_eq!(t.rows.len() as u64, count_quadratic_fields_signed(sign, x));
        return Ok(Report { table: t, verified });
    }
    for row in bqf_torsion_table(x)? {
        if route == Route::Both && cubic_cl3(row.d) != row.cl3 {
            verified = false;
            t.notes.push(format!("routes disagree at D = {}", row.d));
        }
        t.push(vec![row.d.into(), row.h.into(), row.cl3.into()]);
    }
    Ok(Report { table: t, verified })
}

pub fn hough(
    k: u32,
    max_d: u64,
    norm_bound: u64,
    region: Option<f64>,
    histogram: Option<usize>,
) -> Result<Report> {
    if let Some(bins) = histogram {
        let y = region.unwrap_or(5.0);
        let mut t = Table::new(&["bin_lo", "bin_hi", "count"]);
        for (lo, hi, n) in vertical_histogram(max_d, y, bins)? {
            t.push(vec![lo.into(), hi.into(), n.into()]);
        }
        return Ok(Report::ok(t));
    }
    if let Some(y) = region {
        let r = count_in_region(max_d, y, k)?;
        let mut t = Table::new(&["max_d", "y_cut", "count", "expected", "ratio", "above_cusp"]);
        t.push(vec![
            r.max_d.into(),
            r.y_cut.into(),
            r.count.into(),
            r.expected.into(),
            r.ratio.into(),
            r.above_cusp.into(),
        ]);
        return Ok(Report {
            verified: r.above_cusp == 0,
            table: t,
        });
    }
    let mut t = Table::new(&["D", "l", "m", "n", "t", "norm", "principal"]);
    for d in admissible_discriminants(max_d) {
        for s in soundararajan_solutions(d, k, norm_bound)? {
            let a = ideal_of_solution(&s)?;
            t.push(vec![
                d.into(),
                s.l.into(),
                s.m.into(),
                s.n.into(),
                s.t.into(),
                a.norm.into(),
                a.is_principal().into(),
            ]);
        }
    }
    Ok(Report::ok(t))
}

pub fn phihat(qs: &[u64]) -> Result<Report> {
    let mut t = Table::new(&["q", "densityNonmaximal", "absSum", "termCount"]);
    for &q in qs {
        let r = phihat_abs_sum(q)?;
        t.push(vec![q.into(), r.density_string().into(), r.abs_sum.into(), r.term_count.into()]);
    }
    Ok(Report::ok(t))
}

fn constant_json(name: &str, b: &Bounded) -> serde_json::Value {
    serde_json::json!({
        "name": name,
        "value": round15(b.value),
        "bound": round15(b.bound),
        "method": b.method,
    })
}

fn round15(v: f64) -> f64 {
    crate::output::format_real(v).parse().unwrap_or(v)
}

/// JSON document with every special value, its bound and method.
pub fn constants(precision: u32) -> Result<String> {
    if !(4..=14).contains(&precision) {
        bail!(cubic_core::Error::InvalidArgument(format!(
            "precision must lie in 4..=14, got {precision}"
        )));
    }
    let tol = 10f64.powi(-(precision as i32));
    let sv = SpecialValues::compute(tol)?;
    let mut values: Vec<serde_json::Value> =
        sv.named().iter().map(|(n, b)| constant_json(n, b)).collect();
    values.push(constant_json("zeta(1/3) partial sums", &zeta_one_third_partial_sums(20_000)?));
    for k in [3u32, 5] {
        let (c, e) = hough_constant(k, tol)?;
        let mut v = constant_json(&format!("C_1,{k}"), &c);
        v["exponent"] = serde_json::json!(round15(e));
        values.push(v);
    }
    let mut models = Vec::new();
    for theorem in [Theorem::Cubic, Theorem::Torsion] {
        for sign in Sign::BOTH {
            let m = prediction_model(sign, theorem)?;
            models.push(serde_json::json!({
                "theorem": theorem,
                "sign": sign,
                "A": round15(m.a),
                "B": round15(m.b),
            }));
        }
    }
    let doc = serde_json::json!({ "precision": precision, "constants": values, "models": models });
    Ok(format!("{}\n", serde_json::to_string_pretty(&doc)?))
}

/// Reads `X,count` pairs; `#` lines and a non-numeric header are skipped.
pub fn read_counts(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let (Some(a), Some(b)) = (parts.next(), parts.next()) else {
            bail!(cubic_core::Error::InvalidArgument(format!("line {}: expected X,count", i + 1)));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(c)) => out.push((x, c)),
            _ if out.is_empty() && i == 0 => continue,
            _ => bail!(cubic_core::Error::InvalidArgument(format!("line {}: not numeric", i + 1))),
        }
    }
    Ok(out)
}

pub fn fit(input: &Path, compare: Option<(Sign, Theorem)>) -> Result<Report> {
    let grid = read_counts(input)?;
    let f = fit_secondary(&grid)?;
    let mut t = Table::new(&["A", "B", "residualNorm", "formulaA", "formulaB"]);
    let formula = compare.map(|(s, th)| prediction_model(s, th)).transpose()?;
    t.push(vec![
        f.a.into(),
        f.b.into(),
        f.residual_norm.into(),
        formula.map(|m| m.a).into(),
        formula.map(|m| m.b).into(),
    ]);
    t.notes.push(format!("{} grid points", grid.len()));
    Ok(Report::ok(t))
}

pub fn bst_check(p: u64, sign: Sign, x: u64) -> Result<Report> {
    let r = verify_bst_identity(p, sign, x)?;
    let mut t = Table::new(&["p", "sign", "maxDisc", "lhs", "rhs", "holds"]);
    t.push(vec![
        p.into(),
        sign.to_string().into(),
        x.into(),
        r.lhs.to_string().into(),
        r.rhs.to_string().into(),
        r.holds().into(),
    ]);
    Ok(Report {
        verified: r.holds(),
        table: t,
    })
}
