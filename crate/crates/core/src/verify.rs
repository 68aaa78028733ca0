//! The verification suites behind `fglwb verify`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_traits::{Signed, Zero};

use crate::arith::{binom, rat, rat_int, BigInt, Rat};
use crate::cache::{self, CacheFile};
use crate::combinat::{build_combo, novikov_admissible, s_number, verify_gcd_laws, ComboKind};
use crate::error::{Error, Result};
use crate::fgl::{
    fgl_axiom_check, formal_inverse, invariant_differential, pairing_series, universal_fgl, FglTable, PairingTable,
};
use crate::genera::{
    abelian_map, annihilation_report, buchstaber_map, kh_buchstaber_agreement, kh_factors_through_buchstaber,
    kh_residual_check, kh_solve, n_stability_check, odd_denominators, quartic_certificate, schreieder_genus,
    su_restriction_report, IdealFamily,
};
use crate::graded::{Generator, GradedPoly, Monomial, QuadElem};
use crate::report::{Check, Report};
use crate::su::{
    build_bk_xk, build_x234, chern_number, lemma_snumber_table, newton_check, partitions, reference_alpha22,
    s_number_manifold, star_product, su_check, w_coefficients, Partition, WClass, DEFAULT_PARTITION_CAP,
};

/// Gcd laws run to this bound whatever the weight bound of the tables.
pub const COMBINAT_BOUND: u32 = 64;
/// Lemma table range.
pub const LEMMA_BOUND: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Combinat,
    Fgl,
    Genera,
    Su,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["combinat", "fgl", "genera", "su", "all"];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "combinat" => Suite::Combinat,
            "fgl" => Suite::Fgl,
            "genera" => Suite::Genera,
            "su" => Suite::Su,
            "all" => Suite::All,
            _ => return Err(Error::domain(format!("unknown suite '{s}'"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i =
            [Suite::Combinat, Suite::Fgl, Suite::Genera, Suite::Su, Suite::All].iter().position(|s| s == self).unwrap();
        f.write_str(Suite::NAMES[i])
    }
}

fn poly(terms: &[(Rat, &[(u32, u32)])]) -> GradedPoly {
    let mut p = GradedPoly::zero();
    for (c, f) in terms {
        let m = Monomial::from_factors(f.iter().map(|&(n, e)| (Generator::Cp(n), e)));
        p += &GradedPoly::term(m, c.clone());
    }
    p
}

fn first_bad<T>(items: impl IntoIterator<Item = T>, bad: impl Fn(&T) -> Option<String>) -> Option<String> {
    items.into_iter().find_map(|t| bad(&t))
}

/// The universal law and its pairing series at one weight bound.
pub struct Tables {
    pub f: FglTable,
    pub a: PairingTable,
}

impl Tables {
    pub fn new(n: u32) -> Result<Tables> {
        let f = universal_fgl(n)?;
        let a = pairing_series(&f)?;
        Ok(Tables { f, a })
    }

    pub fn from_cache(file: &CacheFile) -> Result<Tables> {
        Ok(Tables { f: file.fgl_table()?, a: file.pairing_table()? })
    }
}

pub fn combinat_suite(t: &Tables) -> Result<Report> {
    let n = t.f.max_degree();
    let mut report = verify_gcd_laws(COMBINAT_BOUND)?;
    report.title = format!("combinatorics (gcd laws to {COMBINAT_BOUND}, combos to weight {n})");

    let bad = first_bad((1..=n as usize).flat_map(|k| (1..=k).map(move |i| (i, k + 1 - i))), |&(i, j)| {
        let s = s_number(t.f.alpha(i, j), (i + j - 1) as u32).ok()?;
        (s != -rat_int(binom((i + j) as i64, i as i64))).then(|| format!("s(alpha({i},{j})) = {s}"))
    });
    report.push(Check::new("s(alpha(i,j)) = -C(i+j,i)", bad.is_none(), bad.unwrap_or(format!("i + j <= {}", n + 1))));

    let s34 = if n >= 5 { s_number(t.a.a(3, 4), 5)? } else { Rat::zero() };
    if n >= 5 {
        report.push(Check::new("s5(A(3,4)) = 5", s34 == rat_int(5), s34.to_string()));
    }

    for kind in [ComboKind::E, ComboKind::T, ComboKind::Z] {
        let mut bad = None;
        let lo = kind.min_weight();
        for m in lo..=n {
            let c = build_combo(m, kind, &t.f, &t.a)?;
            if !c.certificate.verify() || c.s.abs() != Rat::from_integer(c.target.clone()) {
                bad = Some(format!("m = {m}: s = {}, gcd {}", c.s, c.target));
                break;
            }
        }
        let name = format!("|s({kind}_m)| equals its gcd");
        report.push(match bad {
            Some(msg) => Check::fail(name, msg),
            None if lo > n => Check::pass(name, "no weights in range"),
            None => Check::pass(name, format!("{lo} <= m <= {n}")),
        });
    }
    Ok(report)
}

pub fn fgl_suite(t: &Tables) -> Result<Report> {
    let f = &t.f;
    let n = f.max_degree();
    let mut report = fgl_axiom_check(f);
    report.title = format!("formal group law to weight {n}");
    report.push(match invariant_differential(f) {
        Ok(_) => Check::pass("omega = 1/log'", "agrees with dF/dy(x,0)"),
        Err(e) => Check::fail("omega = 1/log'", e.to_string()),
    });
    report.push(match formal_inverse(f) {
        Ok(inv) => Check::pass("F(u, inverse(u)) = 0", format!("u^2 coefficient {}", inv.coeff(2))),
        Err(e) => Check::fail("F(u, inverse(u)) = 0", e.to_string()),
    });
    let cp1 = GradedPoly::cp(1);
    report.push(Check::new("alpha(1,1) = -CP1", *f.alpha(1, 1) == -&cp1, f.alpha(1, 1).to_string()));
    let a12 = &cp1.pow(2) - &GradedPoly::cp(2);
    report.push(Check::new("alpha(1,2) = CP1^2 - CP2", *f.alpha(1, 2) == a12, f.alpha(1, 2).to_string()));
    if n >= 3 {
        let ok = *f.alpha(2, 2) == reference_alpha22();
        report.push(Check::new(
            "2 alpha(2,2) = -3CP3 + 8CP1CP2 - 5CP1^3",
            ok,
            f.alpha(2, 2).scale(&rat_int(2)).to_string(),
        ));
    }
    if n >= 4 {
        // The CP1-only specialization log = x + a x²/2 forces the CP1^4 coefficient 9/2.
        let c = f.alpha(2, 3).coeff_of(&Monomial::from_factors([(Generator::Cp(1), 4)]));
        report.push(Check::new("alpha(2,3) has CP1^4 coefficient 9/2", c == rat(9, 2), c.to_string()));
        if let Ok(low) = build_x234(f) {
            report.notes.extend(low.report.notes);
        }
    }
    let a = t.a.series();
    report.push(Check::new("A(x,y) is antisymmetric", a.is_antisymmetric(), format!("i + j <= {}", n + 2)));
    Ok(report)
}

pub fn genera_suite(t: &Tables) -> Result<Vec<Report>> {
    let (f, a) = (&t.f, &t.a);
    let n = f.max_degree();
    if n < 5 {
        return Err(Error::domain("the genera suite needs N >= 5"));
    }
    let mut out = Vec::new();

    let kh = kh_solve(n)?;
    let mut r = Report::new(format!("Krichever-Hoehn genus to weight {n}"));
    r.push(Check::pass("ODE residual vanishes", format!("x^0..x^{n}")));
    r.push(kh_residual_check(&kh));
    let q1 = GradedPoly::q(1);
    let img1 = kh.map.image(1).unwrap();
    r.push(Check::new("KH(CP1) = q1/2", img1 == q1.scale(&rat(1, 2)), img1.to_string()));
    let zero: std::collections::BTreeMap<_, _> = (1..=4).map(|i| (Generator::Q(i), GradedPoly::zero())).collect();
    let bad = (1..=n).find(|&k| !kh.map.image(k).unwrap().substitute(&zero, n).map(|p| p.is_zero()).unwrap_or(false));
    r.push(Check::new("q = 0 gives the zero genus", bad.is_none(), bad.map_or(String::new(), |k| format!("CP{k}"))));
    r.extend(kh_factors_through_buchstaber(&kh.map, f, a)?);
    out.push(r);

    let s = schreieder_genus(n)?;
    let mut r = Report::new(format!("Schreieder genus to weight {n}"));
    let e1 = q1.scale(&rat(-1, 2));
    let e2 = &q1.pow(2).scale(&rat(3, 8)) - &GradedPoly::q(2).scale(&rat(1, 2));
    r.push(Check::new("S(CP1) = -q1/2", s.image(1).unwrap() == e1, s.image(1).unwrap().to_string()));
    r.push(Check::new("S(CP2) = 3q1^2/8 - q2/2", s.image(2).unwrap() == e2, s.image(2).unwrap().to_string()));
    out.push(r);

    let fb = buchstaber_map(f, a)?;
    let mut r = annihilation_report(&fb, IdealFamily::Pairing, f, a)?;
    r.title = format!("Buchstaber map kills A(i,j), i,j >= 3, to weight {n}");
    let fixed = (1..=4).all(|k| fb.image(k).unwrap() == GradedPoly::cp(k));
    r.push(Check::new("f_B fixes CP1..CP4", fixed, ""));
    for (k, primes) in odd_denominators(&fb) {
        if !primes.is_empty() {
            let ps: Vec<String> = primes.iter().map(BigInt::to_string).collect();
            r.note(format!("f_B(CP{k}) has odd primes {} in denominators", ps.join(", ")));
        }
    }
    out.push(r);

    let cert = quartic_certificate(&fb, f)?;
    let mut r = Report::new("quartic certificate");
    r.push(cert.check());
    if let Some(k) = cert.forward_first_tail {
        r.note(format!("composing with x/omega_B instead of its inverse leaves a nonzero x^{k} coefficient"));
    }
    r.extend(kh_buchstaber_agreement(&kh.map, &fb, &cert)?);
    out.push(r);

    let fab = abelian_map(f, a)?;
    let mut r = annihilation_report(&fab, IdealFamily::Alpha, f, a)?;
    r.title = format!("abelian map kills alpha(i,j), i,j >= 2, to weight {n}");
    out.push(r);
    let w = w_coefficients(f)?;
    out.push(su_restriction_report(f, &fb, &fab, &w, DEFAULT_PARTITION_CAP)?.1);

    if n >= 7 {
        let small = Tables::new(n - 2)?;
        out.push(n_stability_check(&small.f, &small.a, (f, a))?);
    }
    Ok(out)
}

/// A monomial in the CP generators as `(index, exponent)` pairs, with its
/// Chern numbers in the order of the column partitions.
type ChernRow<'a> = (&'a [(u32, u32)], [i64; 3]);

/// Reference Chern numbers: rows are classes, columns partitions.
fn chern_reference() -> Vec<(GradedPoly, Partition, i64)> {
    let p = |s: &str| s.parse::<Partition>().unwrap();
    let one = |f: &[(u32, u32)]| poly(&[(rat_int(1), f)]);
    let mut out = Vec::new();
    let w3 = [p("3"), p("1,2"), p("1,1,1")];
    let rows3: [ChernRow; 3] = [(&[(3, 1)], [4, 24, 64]), (&[(1, 1), (2, 1)], [6, 24, 54]), (&[(1, 3)], [8, 24, 48])];
    for (f, vals) in rows3 {
        for (w, v) in w3.iter().zip(vals) {
            out.push((one(f), w.clone(), v));
        }
    }
    let w4 = [p("1,1,1,1"), p("1,1,2"), p("1,3")];
    let rows4: [ChernRow; 5] = [
        (&[(1, 4)], [384, 192, 64]),
        (&[(1, 2), (2, 1)], [432, 204, 60]),
        (&[(2, 2)], [486, 216, 54]),
        (&[(1, 1), (3, 1)], [512, 224, 56]),
        (&[(4, 1)], [625, 250, 50]),
    ];
    for (f, vals) in rows4 {
        for (w, v) in w4.iter().zip(vals) {
            out.push((one(f), w.clone(), v));
        }
    }
    for (f, w, v) in
        [(&[(1u32, 2u32)][..], "1,1", 8), (&[(2, 1)][..], "1,1", 9), (&[(1, 2)][..], "2", 4), (&[(2, 1)][..], "2", 3)]
    {
        out.push((one(f), p(w), v));
    }
    out
}

/// The product rule on `(a + τ∂a)(b + τ∂b)` for every pair of W coefficients
/// of total weight `<= max_weight`.
fn star_rule_check(t: &Tables, max_weight: u32) -> Result<Check> {
    let w = w_coefficients(&t.f)?;
    let params = w.params().clone();
    let entries: Vec<_> = w.entries().into_iter().filter(|e| e.i <= e.j).collect();
    let cp1 = GradedPoly::cp(1);
    let mut count = 0;
    for x in &entries {
        for y in &entries {
            if (x.i + x.j + y.i + y.j - 2) as u32 > max_weight {
                continue;
            }
            let (a, b) = (WClass::new(x.cls.clone(), x.bnd.clone()), WClass::new(y.cls.clone(), y.bnd.clone()));
            let prod = QuadElem::new(a.cls.clone(), a.bnd.clone(), params.clone()).try_mul(&QuadElem::new(
                b.cls.clone(),
                b.bnd.clone(),
                params.clone(),
            ))?;
            let star = star_product(&a, &b, &params);
            let rule = &(&(&a.cls * &b.bnd) + &(&a.bnd * &b.cls)) - &(&(&cp1 * &a.bnd) * &b.bnd);
            if prod.odd != rule || star.bnd != rule || star.cls != prod.even {
                return Ok(Check::fail(
                    "d(a*b) = a db + da b - CP1 da db",
                    format!("w({},{}) * w({},{})", x.i, x.j, y.i, y.j),
                ));
            }
            count += 1;
        }
    }
    Ok(Check::pass("d(a*b) = a db + da b - CP1 da db", format!("{count} pairs to weight {max_weight}")))
}

pub fn su_suite(t: &Tables) -> Result<Vec<Report>> {
    let f = &t.f;
    let n = f.max_degree();
    if n < 4 {
        return Err(Error::domain("the su suite needs N >= 4"));
    }
    let mut out = Vec::new();

    let mut r = Report::new("Chern numbers");
    let reference = chern_reference();
    let bad = first_bad(&reference, |(m, w, v)| {
        let c = chern_number(m, w).ok()?;
        (c != rat_int(*v)).then(|| format!("{} of {m} is {c}, expected {v}", w.label()))
    });
    r.push(Check::new("reference table", bad.is_none(), bad.unwrap_or(format!("{} entries", reference.len()))));
    let mut newton = None;
    'outer: for k in 1..=6 {
        for p in partitions(k) {
            let m = poly(&[(rat_int(1), &p.parts().iter().map(|&d| (d, 1)).collect::<Vec<_>>())]);
            let c = newton_check(&m)?;
            if !c.passed {
                newton = Some(c);
                break 'outer;
            }
        }
    }
    r.push(newton.unwrap_or_else(|| Check::pass("s-number three ways", "products of CP_n to weight 6")));
    out.push(r);

    let low = build_x234(f)?;
    let mut r = Report::new("SU generators x2, x3, x4");
    for (name, x, k, s) in [("x2", &low.x2, 2, 3), ("x3", &low.x3, 3, 6), ("x4", &low.x4, 4, 10)] {
        let su = su_check(x, DEFAULT_PARTITION_CAP)?;
        r.push(Check::new(
            format!("{name} is SU"),
            su.passed(),
            su.first_failure().map_or(String::new(), |c| c.to_string()),
        ));
        let sv = s_number_manifold(x)?;
        r.push(Check::new(format!("s{k}({name}) = {s}"), sv == rat_int(s), sv.to_string()));
        let nv = novikov_admissible(k, &sv)?;
        r.push(Check::new(
            format!("{name} satisfies the Novikov condition"),
            nv.admissible,
            format!("required {}", nv.required),
        ));
    }
    let lit = chern_number(&low.x4_literal, &"1,3".parse()?)?;
    r.notes.extend(low.report.notes.clone());
    r.note(format!("-alpha(2,3) - 3/2 x3 CP1 has c1c3 = {lit}"));
    out.push(r);

    let w = w_coefficients(f)?;
    let mut r = Report::new(format!("W coefficients to weight {n}"));
    let w11 = w.w(1, 1);
    let ok = w11.cls == -&GradedPoly::cp(1) && w11.bnd == GradedPoly::constant(rat_int(-2));
    r.push(Check::new("(w11, dw11) = (-CP1, -2)", ok, format!("({}, {})", w11.cls, w11.bnd)));
    let sym = w.entries().iter().all(|e| {
        let t = w.w(e.j, e.i);
        t.cls == e.cls && t.bnd == e.bnd
    });
    r.push(Check::new("w(i,j) = w(j,i)", sym, ""));
    r.push(star_rule_check(t, n.min(8))?);
    for e in build_bk_xk(f, &w, DEFAULT_PARTITION_CAP)? {
        let k = e.k;
        if let Some(su) = &e.su {
            r.push(Check::new(
                format!("x{k} is SU"),
                su.passed(),
                su.first_failure().map_or(String::new(), |c| c.to_string()),
            ));
        }
        r.push(Check::new(
            format!("s{k}(x{k}) = 2 s{k}(b{k})"),
            e.s_x == &e.s_b * rat_int(2),
            format!("{} = 2 * {}", e.s_x, e.s_b),
        ));
        match &e.novikov {
            Some(v) if !v.admissible => {
                r.note(format!("s{k}(x{k}) = {} fails the Novikov condition (required {})", e.s_x, v.required))
            }
            None => r.note(format!("s{k}(x{k}) = 0")),
            _ => {}
        }
    }
    out.push(r);

    out.push(lemma_snumber_table(LEMMA_BOUND)?.1);
    Ok(out)
}

/// Every cache file in `dir` must load and agree with freshly computed tables.
pub fn cache_consistency(dir: &Path, n: u32) -> Result<Report> {
    let mut report = Report::new(format!("cache files in {}", dir.display()));
    let files = cache::list(dir)?;
    if files.is_empty() {
        report.note("no cache files");
    }
    for (m, path) in files {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        match cache::load(&path) {
            Err(e) => report.push(Check::fail(format!("{name} loads"), e.to_string())),
            Ok(file) if file.max_degree != m => {
                report.push(Check::fail(format!("{name} loads"), format!("header says N = {}", file.max_degree)))
            }
            Ok(file) => {
                report.push(Check::pass(format!("{name} loads"), ""));
                let fresh = CacheFile::compute(m.min(n))?;
                let cmp = file.validate_against(&fresh)?;
                report.push(match cmp.first_failure() {
                    None => Check::pass(format!("{name} matches recomputation"), format!("to weight {}", m.min(n))),
                    Some(c) => {
                        Check::fail(format!("{name} matches recomputation"), format!("[{}] {}", c.name, c.detail))
                    }
                });
            }
        }
    }
    Ok(report)
}

/// Runs a suite at weight bound `n`. With a cache directory, tables come from
/// the cache and every file there is validated.
pub fn run_verify(suite: Suite, n: u32, cache_dir: Option<&Path>) -> Result<Vec<Report>> {
    let tables = match cache_dir {
        // a broken cache is reported by the consistency check below
        Some(dir) => match cache::load_or_compute(Some(dir), n).and_then(|c| Tables::from_cache(&c)) {
            Ok(t) => t,
            Err(Error::Cache(_)) => Tables::new(n)?,
            Err(e) => return Err(e),
        },
        None => Tables::new(n)?,
    };
    let mut out = Vec::new();
    if matches!(suite, Suite::Combinat | Suite::All) {
        out.push(combinat_suite(&tables)?);
    }
    if matches!(suite, Suite::Fgl | Suite::All) {
        out.push(fgl_suite(&tables)?);
    }
    if matches!(suite, Suite::Genera | Suite::All) {
        out.extend(genera_suite(&tables)?);
    }
    if matches!(suite, Suite::Su | Suite::All) {
        out.extend(su_suite(&tables)?);
    }
    if let Some(dir) = cache_dir {
        out.push(cache_consistency(dir, n)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_at_small_n() {
        for r in run_verify(Suite::All, 8, None).unwrap() {
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn corrupted_cache_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let good = run_verify(Suite::Fgl, 6, Some(dir.path())).unwrap();
        assert!(good.iter().all(Report::passed));
        let path = cache::cache_path(dir.path(), 6);
        let text = std::fs::read_to_string(&path).unwrap().replacen("1,1 = -1 * CP1", "1,1 = 1 * CP1", 1);
        std::fs::write(&path, text).unwrap();
        let reports = run_verify(Suite::Fgl, 6, Some(dir.path())).unwrap();
        assert!(reports[0].passed());
        let last = reports.last().unwrap();
        assert!(last.first_failure().unwrap().detail.contains("checksum"), "{last}");
    }

    #[test]
    fn suite_names() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().to_string(), name);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }
}
