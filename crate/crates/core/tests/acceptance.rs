//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use cubic_core::asymptotics::{
    fit_secondary, gamma, hough_constant, hough_constant_with, prediction_model,
    predicted_counts, zeta, zeta_one_third_partial_sums, SpecialValues, Theorem,
    WorkingPrecision,
};
use cubic_core::census::{bst_from_stream, count_quadratic_fields, Census};
use cubic_core::classgroups::{bqf_torsion_table, sum_cl3_cubic};
use cubic_core::golden::{reference_tables, REFERENCE_MAX_DISC};
use cubic_core::hough::{
    admissible_discriminants, audit_bijection, count_in_region, fundamental_domain_count,
    heegner_point, ideal_of_solution, nontrivial_three_torsion, power_generator_check,
    soundararajan_solutions, strip_point, SoundararajanSolution,
};
use cubic_core::maximality::{
    nonmaximal_residue_count, nonmaximal_residue_count_scan, phihat_abs_sum, phihat_by_crt,
    phihat_direct, phihat_table,
};
use cubic_core::{enumerate_all_orbits, Result, Sign};

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl Into<String>) {
        let detail = detail.into();
        self.lines.push(format!("    [{}] {detail}", if ok { "ok" } else { "FAILED" }));
        self.pass &= ok;
    }
}

struct Data {
    plus: Census,
    minus: Census,
}

impl Data {
    fn census(&self, sign: Sign) -> &Census {
        match sign {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1(data: &Data, o: &mut Outcome) -> Result<()> {
    let golden = reference_tables()?;
    let x = REFERENCE_MAX_DISC;
    let total = data.plus.count_cubic_fields(x)?;
    o.check(total == golden.total, format!("N3+(2e6) = {total}, reference {}", golden.total));
    for (m, expected) in &golden.progressions {
        let t = data.plus.census_by_progression(x, *m)?;
        let sum: u64 = t.counts.iter().sum();
        o.check(
            &t.counts == expected && sum == total,
            format!("mod {m}: {:?}, reference {expected:?}, sum {sum}", t.counts),
        );
    }
    Ok(())
}

fn criterion_2(data: &Data, o: &mut Outcome) -> Result<()> {
    let model = prediction_model(Sign::Plus, Theorem::Cubic)?;
    let x = 2e6;
    let actual = data.plus.count_cubic_fields(2_000_000)? as f64;
    let pred = model.predict(x);
    o.check(
        rel(pred, actual) < 0.005,
        format!("prediction {pred:.1} vs actual {actual}, relative {:.4}", rel(pred, actual)),
    );
    for x in [500_000u64, 1_000_000, 2_000_000] {
        let n = data.plus.count_cubic_fields(x)? as f64;
        let residual = n - model.a * x as f64;
        let ratio = residual / (model.b * (x as f64).powf(5.0 / 6.0));
        o.check(
            residual < 0.0 && (0.9..=1.1).contains(&ratio),
            format!("X = {x}: residual {residual:.1}, ratio to B X^(5/6) {ratio:.4}"),
        );
    }
    Ok(())
}

fn criterion_3(data: &Data, o: &mut Outcome) -> Result<()> {
    for sign in Sign::BOTH {
        let model = prediction_model(sign, Theorem::Cubic)?;
        let grid: Vec<(f64, f64)> = [200_000u64, 500_000, 1_000_000, 2_000_000]
            .iter()
            .map(|&x| Ok((x as f64, data.census(sign).count_cubic_fields(x)? as f64)))
            .collect::<Result<_>>()?;
        let fit = fit_secondary(&grid)?;
        o.check(
            rel(fit.b, model.b) < 0.10,
            format!(
                "sign {sign}: fitted B {:.5} vs formula {:.5} ({:.2}%), fitted A {:.5} vs {:.5}",
                fit.b,
                model.b,
                100.0 * rel(fit.b, model.b),
                fit.a,
                model.a
            ),
        );
    }
    Ok(())
}

fn criterion_4(data: &Data, o: &mut Outcome) -> Result<()> {
    for (sign, target) in [(Sign::Plus, PI * PI / 72.0), (Sign::Minus, PI * PI / 24.0)] {
        let grid: Vec<(f64, f64)> = [100_000u64, 200_000, 500_000, 1_000_000]
            .iter()
            .map(|&x| Ok((x as f64, data.census(sign).count_weighted_classes(x)?.to_f64())))
            .collect::<Result<_>>()?;
        let fit = fit_secondary(&grid)?;
        o.check(
            rel(fit.a, target) < 0.01,
            format!("sign {sign}: fitted A {:.6} vs {target:.6} ({:.3}%)", fit.a, 100.0 * rel(fit.a, target)),
        );
    }
    Ok(())
}

fn criterion_5(o: &mut Outcome) -> Result<()> {
    for sign in Sign::BOTH {
        let stream = enumerate_all_orbits(sign, 10_000)?;
        for x in [1_000u64, 10_000] {
            for p in [2u64, 3, 5] {
                let r = bst_from_stream(p, &stream, x)?;
                o.check(
                    r.holds(),
                    format!("p = {p}, sign {sign}, X = {x}: lhs {} rhs {}", r.lhs, r.rhs),
                );
            }
        }
    }
    Ok(())
}

fn criterion_6(data: &Data, o: &mut Outcome) -> Result<()> {
    for sign in Sign::BOTH {
        let c = data.census(sign);
        let assembled = c.mobius_assembly(10_000)?;
        let direct = c.count_cubic_fields(10_000)? as i64;
        o.check(
            assembled == direct,
            format!("sign {sign}: Mobius assembly {assembled}, direct {direct}"),
        );
    }
    Ok(())
}

fn criterion_7(data: &Data, o: &mut Outcome) -> Result<()> {
    let mut per_disc: HashMap<i64, u64> = HashMap::new();
    for d in data.minus.field_discriminants(100_000)? {
        *per_disc.entry(d).or_default() += 1;
    }
    let rows = bqf_torsion_table(100_000)?;
    let bad: Vec<i64> = rows
        .iter()
        .filter(|r| r.cl3 != 1 + 2 * per_disc.get(&r.d).copied().unwrap_or(0))
        .map(|r| r.d)
        .collect();
    o.check(
        bad.is_empty(),
        format!("{} fundamental D in (-1e5, 0): form route equals 1 + 2 N(D); mismatches {bad:?}", rows.len()),
    );
    for sign in Sign::BOTH {
        let model = prediction_model(sign, Theorem::Torsion)?;
        let x = 1_000_000u64;
        let sum = sum_cl3_cubic(data.census(sign), x)? as f64;
        let ratio = sum / x as f64;
        o.check(
            rel(ratio, model.a) < 0.02,
            format!(
                "sign {sign}: sum Cl3 / X = {ratio:.6} vs {:.6} ({:+.2}%)",
                model.a,
                100.0 * (ratio / model.a - 1.0)
            ),
        );
        for x in [100_000u64, 200_000, 500_000, 1_000_000] {
            let sum = sum_cl3_cubic(data.census(sign), x)? as f64;
            let xf = x as f64;
            let plain = (sum - model.a * xf).abs();
            let corrected = (sum - model.predict(xf)).abs();
            o.check(
                corrected < plain,
                format!("sign {sign}, X = {x}: residual {plain:.1} -> {corrected:.1} with X^(5/6) term"),
            );
        }
    }
    Ok(())
}

fn criterion_8(o: &mut Outcome) -> Result<()> {
    let n2 = nonmaximal_residue_count_scan(2)?;
    o.check(n2 == 88, format!("nonmaximal residues mod 4: {n2} of 256"));
    for p in [2u64, 5, 7] {
        let table = phihat_table(p)?;
        let count = nonmaximal_residue_count(p)? as f64;
        let density = count / (p as f64).powi(8);
        let parseval: f64 = table.iter().map(|z| z.norm_sqr()).sum();
        o.check(
            (parseval - density).abs() < 1e-9,
            format!("q = {p}: sum |Phi^|^2 = {parseval:.12}, density {density:.12}"),
        );
        o.check(
            (table[0].re - density).abs() < 1e-9 && table[0].im.abs() < 1e-9,
            format!("q = {p}: Phi^(0) = {:.12}, density {density:.12}", table[0].re),
        );
    }
    let composite = phihat_abs_sum(10)?.abs_sum;
    let product = phihat_abs_sum(2)?.abs_sum * phihat_abs_sum(5)?.abs_sum;
    o.check(
        rel(composite, product) < 1e-6,
        format!("q = 10: abs sum {composite:.9} vs product of factors {product:.9}"),
    );
    let mut worst: f64 = 0.0;
    for x in [[7i64, 11, 13, 17]] {
        let direct = phihat_direct(10, &x)?;
        let crt = phihat_by_crt(2, 5, &x)?;
        worst = worst.max((direct - crt).norm());
    }
    o.check(worst < 1e-12, format!("q = 10: direct sum vs CRT factorization, max deviation {worst:.2e}"));
    let mut last = f64::INFINITY;
    let mut ratios = Vec::new();
    let mut monotone = true;
    for q in [2u64, 5, 7, 10, 14] {
        let r = phihat_abs_sum(q)?.abs_sum / (q as f64).powf(1.5);
        monotone &= r <= last;
        last = r;
        ratios.push(format!("{q}: {r:.4}"));
    }
    o.check(monotone, format!("abs sum / q^(3/2) non-increasing: {}", ratios.join(", ")));
    Ok(())
}

fn criterion_9(o: &mut Outcome) -> Result<()> {
    let s2 = SoundararajanSolution { l: 1, m: 3, n: 5, t: 1, d: 2, k: 3 };
    let a2 = ideal_of_solution(&s2)?;
    o.check(
        soundararajan_solutions(2, 3, 10)?.contains(&s2)
            && (a2.norm, a2.beta) == (3, 2)
            && a2.is_principal()
            && a2.contains(-1, 1)
            && power_generator_check(&s2)? == Some(true),
        "D = 2: (1,3,5,1) gives [3, 2 + sqrt(-2)] = (-1 + sqrt(-2)), cube (5 + sqrt(-2))",
    );
    let s26 = SoundararajanSolution { l: 1, m: 3, n: 1, t: 1, d: 26, k: 3 };
    let a26 = ideal_of_solution(&s26)?;
    let z = heegner_point(&s26)?;
    o.check(
        soundararajan_solutions(26, 3, 10)?.contains(&s26)
            && (a26.norm, a26.beta) == (3, 1)
            && !a26.is_principal()
            && a26.power_is_principal(3)
            && (z.x_num, z.x_den, z.y2_num, z.y2_den) == (1, 3, 26, 9),
        "D = 26: (1,3,1,1) gives nonprincipal [3, 1 + sqrt(-26)], point (1 + sqrt(-26))/3",
    );
    let ds = admissible_discriminants(10_001);
    let mut inexact = Vec::new();
    let mut self_conjugate = 0;
    let mut matched = 0;
    for &d in &ds {
        let a = audit_bijection(d, 3, 200)?;
        if !a.is_exact() {
            inexact.push(d);
        }
        self_conjugate += a.self_conjugate.len();
        matched += a.matched;
    }
    o.check(
        inexact.is_empty(),
        format!(
            "bijection audit over {} D <= 1e4, B = 200: {matched} pairs matched, \
             {self_conjugate} self-conjugate ideals reported apart, inexact D {inexact:?}",
            ds.len()
        ),
    );
    for k in [3u32, 5] {
        let mut checked = 0;
        let mut violations = 0;
        for &d in &ds {
            for s in soundararajan_solutions(d, k, 200)? {
                checked += 1;
                let lm = s.norm() as u128;
                let p = strip_point(&ideal_of_solution(&s)?);
                let ymax = (d as f64).powf(0.5 - 1.0 / k as f64);
                if lm.pow(k) < d as u128 || p.y > ymax * (1.0 + 1e-12) {
                    violations += 1;
                }
            }
        }
        o.check(
            violations == 0,
            format!("cusp bound k = {k}: {checked} solutions, {violations} violations"),
        );
    }
    let (mut fd, mut cl) = (0u64, 0u64);
    for d in admissible_discriminants(100_000) {
        fd += fundamental_domain_count(d)?;
        cl += nontrivial_three_torsion(d)?;
    }
    o.check(fd == cl, format!("fundamental domain count {fd}, sum (#Cl3(-4D) - 1) = {cl}"));
    let r = count_in_region(100_000, 5.0, 3)?;
    o.check(
        (0.9..=1.1).contains(&r.ratio) && r.above_cusp == 0,
        format!(
            "R_Y count {} vs (6/pi^3) Y X = {:.1}, ratio {:.4}, above cusp {}",
            r.count, r.expected, r.ratio, r.above_cusp
        ),
    );
    Ok(())
}

fn criterion_10(o: &mut Outcome) -> Result<()> {
    let start = Instant::now();
    let n = count_quadratic_fields(10_000_000) as f64;
    let secs = start.elapsed().as_secs_f64();
    let target = 6.0 / (PI * PI) * 1e7;
    o.check(
        rel(n, target) < 0.005,
        format!("{n} fundamental discriminants vs {target:.1} ({:.4}%)", 100.0 * rel(n, target)),
    );
    o.check(secs <= 30.0, format!("runtime {secs:.2} s"));
    Ok(())
}

fn criterion_11(o: &mut Outcome) -> Result<()> {
    let em = zeta(1.0 / 3.0, 1e-12)?;
    let ps = zeta_one_third_partial_sums(20_000)?;
    o.check(
        em.value < 0.0 && (em.value - ps.value).abs() < 1e-8,
        format!("zeta(1/3): {:.15} vs {:.15}", em.value, ps.value),
    );
    let refl = gamma(2.0 / 3.0, 1e-12)?.value * gamma(1.0 / 3.0, 1e-12)?.value;
    let target = 2.0 * PI / 3f64.sqrt();
    o.check(
        (refl - target).abs() < 1e-10,
        format!("Gamma(1/3) Gamma(2/3) - 2 pi / sqrt 3 = {:.2e}", refl - target),
    );
    let wp = WorkingPrecision::default();
    let sv = SpecialValues::compute_with(1e-12, wp)?;
    for (name, ok) in sv.validate_bounds(1e-12, wp)? {
        o.check(ok, format!("{name}: refined value within reported bound"));
    }
    for k in [3u32, 5] {
        let (c, _) = hough_constant(k, 1e-12)?;
        let (r, _) = hough_constant_with(k, 1e-12, wp.refined())?;
        o.check(
            c.contains(r.value),
            format!("C_1,{k} = {:.8} +- {:.1e}, refined {:.8}", c.value, c.bound, r.value),
        );
    }
    let p = predicted_counts(Sign::Plus, 2e6, Theorem::Cubic)?;
    o.check(p.is_finite(), format!("prediction(+, 2e6) = {p:.3}"));
    Ok(())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let data = match (Census::new(Sign::Plus, 2_000_000), Census::new(Sign::Minus, 2_000_000)) {
        (Ok(plus), Ok(minus)) => Data { plus, minus },
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("census construction failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!("censuses to 2e6 built in {:.1} s", start.elapsed().as_secs_f64());
    type Criterion<'a> = Box<dyn Fn(&mut Outcome) -> Result<()> + 'a>;
    let criteria: Vec<(&str, Criterion)> = vec![
        ("exact table reproduction", Box::new(|o| criterion_1(&data, o))),
        ("secondary term at desk scale", Box::new(|o| criterion_2(&data, o))),
        ("fitted secondary coefficient", Box::new(|o| criterion_3(&data, o))),
        ("main-term volume constants", Box::new(|o| criterion_4(&data, o))),
        ("nonmaximality identity", Box::new(criterion_5)),
        ("sieve consistency", Box::new(|o| criterion_6(&data, o))),
        ("two-route torsion agreement", Box::new(|o| criterion_7(&data, o))),
        ("exponential sums", Box::new(criterion_8)),
        ("Heegner points", Box::new(criterion_9)),
        ("quadratic fields", Box::new(criterion_10)),
        ("constants", Box::new(criterion_11)),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut o = Outcome::new();
        if let Err(e) = run(&mut o) {
            o.check(false, format!("error: {e}"));
        }
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict}: {name} ({:.1} s)",
            i + 1,
            t.elapsed().as_secs_f64()
        );
        for line in &o.lines {
            println!("{line}");
        }
        if !o.pass {
            failed.push(i + 1);
        }
    }
    println!(
        "acceptance: {} of {} criteria pass; failing {failed:?}",
        criteria.len() - failed.len(),
        criteria.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
