//! Genera as ring maps out of `Q[CP_1, CP_2, ...]`: the Krichever–Hoehn and
//! Schreieder genera from their defining series, and the Buchstaber and
//! abelian classifying maps by degreewise elimination.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{rat, rat_int, BigInt, Rat};
use crate::combinat::{build_combo, ComboKind};
use crate::error::{Error, Result};
use crate::fgl::{FglTable, PairingTable};
use crate::graded::{Generator, GradedPoly, Monomial};
use crate::report::{Check, Report};
use crate::series::Series1;
use crate::su::{build_bk_xk, build_x234, WTable};

/// A ring map determined by the images of `CP_1..CP_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyingMap {
    n: u32,
    images: BTreeMap<Generator, GradedPoly>,
    target_gens: Vec<Generator>,
}

impl ClassifyingMap {
    pub fn new(n: u32, images: BTreeMap<Generator, GradedPoly>, target_gens: Vec<Generator>) -> Result<Self> {
        for k in 1..=n {
            let img = images.get(&Generator::Cp(k)).ok_or_else(|| Error::domain(format!("missing image of CP{k}")))?;
            if !img.is_homogeneous_of(k) {
                return Err(Error::domain(format!("image of CP{k} is not homogeneous of weight {k}")));
            }
            if let Some(g) = img.generators().into_iter().find(|g| !target_gens.contains(g)) {
                return Err(Error::domain(format!("image of CP{k} uses {g} outside the target generators")));
            }
        }
        Ok(ClassifyingMap { n, images, target_gens })
    }

    /// Builds a map from `φ(CP_n)` given as the coefficients of `log'`.
    pub fn from_log_derivative(series: &Series1<GradedPoly>, n: u32, target_gens: Vec<Generator>) -> Result<Self> {
        if series.order() < n as usize {
            return Err(Error::domain("series too short for the requested weight"));
        }
        let images = (1..=n).map(|k| (Generator::Cp(k), series.coeff(k as usize).clone())).collect();
        ClassifyingMap::new(n, images, target_gens)
    }

    pub fn max_degree(&self) -> u32 {
        self.n
    }

    /// Image of `CP_k`; `CP_0` maps to 1.
    pub fn image(&self, k: u32) -> Option<GradedPoly> {
        if k == 0 {
            return Some(GradedPoly::one());
        }
        self.images.get(&Generator::Cp(k)).cloned()
    }

    pub fn images(&self) -> &BTreeMap<Generator, GradedPoly> {
        &self.images
    }

    pub fn target_gens(&self) -> &[Generator] {
        &self.target_gens
    }

    /// Multiplicative extension of the generator images.
    pub fn eval(&self, cls: &GradedPoly) -> Result<GradedPoly> {
        if let Some(w) = cls.max_weight() {
            if w > self.n {
                return Err(Error::domain(format!("class of weight {w} exceeds the map's bound {}", self.n)));
            }
        }
        if cls.generators().iter().any(|g| matches!(g, Generator::Q(_))) {
            return Err(Error::domain("classes must be polynomials in CP generators"));
        }
        cls.substitute(&self.images, self.n)
    }

    /// `Σ φ(CP_n) x^(n+1)/(n+1)` to order `N + 1`.
    pub fn log_series(&self) -> Series1<GradedPoly> {
        Series1::from_fn(self.n as usize + 1, |k| {
            if k == 0 {
                GradedPoly::zero()
            } else {
                self.image(k as u32 - 1).unwrap().scale(&rat(1, k as i64))
            }
        })
    }

    /// Applies the map coefficientwise.
    pub fn apply_series(&self, s: &Series1<GradedPoly>) -> Result<Series1<GradedPoly>> {
        s.try_map(|c| self.eval(c))
    }
}

impl fmt::Display for ClassifyingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (g, img) in &self.images {
            writeln!(f, "{g} -> {img}")?;
        }
        Ok(())
    }
}

fn q_gens() -> Vec<Generator> {
    (1..=4).map(Generator::Q).collect()
}

fn cp_gens(n: u32) -> Vec<Generator> {
    (1..=n).map(Generator::Cp).collect()
}

/// `1 + q_1 x + q_2 x² + q_3 x³ + q_4 x⁴`.
pub fn quartic(order: usize) -> Series1<GradedPoly> {
    Series1::from_fn(order, |k| match k {
        0 => GradedPoly::one(),
        1..=4 => GradedPoly::q(k as u8),
        _ => GradedPoly::zero(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KhSolution {
    /// `f = x + Σ a_k x^k`.
    pub f: Series1<GradedPoly>,
    /// `g = f⁻¹`, the logarithm of the genus.
    pub g: Series1<GradedPoly>,
    pub map: ClassifyingMap,
}

/// `(f''f - f'²)² - (f'⁴ + q_1 f'³f + q_2 f'²f² + q_3 f'f³ + q_4 f⁴)`.
fn kh_residual(f: &Series1<GradedPoly>) -> Series1<GradedPoly> {
    let fp = f.derive();
    let fpp = fp.derive();
    let order = fpp.order();
    let (f, fp) = (f.truncate(order), fp.truncate(order));
    let lhs = fpp.mul(&f).sub(&fp.mul(&fp)).pow(2);
    let mut rhs = fp.pow(4);
    let mut f_pow = f.clone();
    for i in 1..=4u32 {
        let term = fp.pow(4 - i).mul(&f_pow).scale_by(&GradedPoly::q(i as u8));
        rhs = rhs.add(&term);
        f_pow = f_pow.mul(&f);
    }
    lhs.sub(&rhs)
}

/// Solves the pole-free form of `(h')² = S(h)`, `h = f'/f`, order by order.
pub fn kh_solve(n: u32) -> Result<KhSolution> {
    if n < 2 {
        return Err(Error::domain("KH solve needs N >= 2"));
    }
    // g' to order N needs f to order N + 1; two zero slots keep f'' long enough.
    let order = n as usize + 3;
    let mut coeffs = vec![GradedPoly::zero(); order + 1];
    coeffs[1] = GradedPoly::one();
    for k in 2..=n as usize + 1 {
        let res = kh_residual(&Series1::new(coeffs.clone())?);
        // a_k enters the x^(k-1) coefficient as -2k(k-1) a_k
        let r0 = res.coeff(k - 1);
        coeffs[k] = r0.scale(&rat(1, 2 * (k * (k - 1)) as i64));
    }
    let f = Series1::new(coeffs)?.truncate(n as usize + 1).with_grading(-1)?;
    let check = kh_residual(&Series1::new({
        let mut c = f.coeffs().to_vec();
        c.extend([GradedPoly::zero(), GradedPoly::zero()]);
        c
    })?);
    if let Some(k) = (0..=n as usize).find(|&k| !check.coeff(k).is_zero()) {
        return Err(Error::Consistency(format!("KH residual nonzero at x^{k}")));
    }
    let g = f.revert()?;
    let map = ClassifyingMap::from_log_derivative(&g.derive(), n, q_gens())?;
    Ok(KhSolution { f, g, map })
}

/// Rechecks the KH solution through `u = f/x`, `v = u'/u`:
/// `(x²v' - 1)² = (1+xv)⁴ + q_1 x(1+xv)³ + q_2 x²(1+xv)² + q_3 x³(1+xv) + q_4 x⁴`.
pub fn kh_residual_check(sol: &KhSolution) -> Check {
    let f = &sol.f;
    let order = f.order() - 1;
    let u = Series1::from_fn(order, |k| f.coeff(k + 1).clone());
    let v = match u.reciprocal() {
        Ok(inv) => u.derive().mul(&inv.truncate(order - 1)),
        Err(e) => return Check::fail("KH residual via u = f/x", e.to_string()),
    };
    let m = v.order();
    let one = GradedPoly::one();
    let x = Series1::variable(m, &one);
    let x2 = x.mul(&x);
    let lhs = x2
        .truncate(m)
        .mul(&v.derive().truncate(m).add(&Series1::zeros(m, &one)))
        .sub(&Series1::constant(m, one.clone()))
        .pow(2);
    let w = Series1::constant(m, one.clone()).add(&x.mul(&v));
    let mut rhs = w.pow(4);
    let mut xp = Series1::constant(m, one.clone());
    for i in 1..=4u32 {
        xp = xp.mul(&x);
        rhs = rhs.add(&xp.mul(&w.pow(4 - i)).scale_by(&GradedPoly::q(i as u8)));
    }
    // v' loses one order, so coefficients of x^0..x^m are exact
    let diff = lhs.sub(&rhs);
    match (0..=diff.order().min(m)).find(|&k| !diff.coeff(k).is_zero()) {
        None => Check::pass("KH residual via u = f/x", format!("zero to x^{}", diff.order().min(m))),
        Some(k) => Check::fail("KH residual via u = f/x", format!("coefficient of x^{k} is {}", diff.coeff(k))),
    }
}

/// `log' = (1 + q_1 x + ... + q_4 x⁴)^(-1/2)`.
pub fn schreieder_genus(n: u32) -> Result<ClassifyingMap> {
    if n < 1 {
        return Err(Error::domain("Schreieder genus needs N >= 1"));
    }
    let series = quartic(n as usize).binomial_pow(&rat(-1, 2))?;
    ClassifyingMap::from_log_derivative(&series, n, q_gens())
}

fn eliminate(fgl: &FglTable, pairing: &PairingTable, kind: ComboKind, keep: u32) -> Result<ClassifyingMap> {
    let n = fgl.max_degree();
    let mut images: BTreeMap<Generator, GradedPoly> =
        (1..=keep.min(n)).map(|k| (Generator::Cp(k), GradedPoly::cp(k))).collect();
    for k in keep + 1..=n {
        let combo = build_combo(k, kind, fgl, pairing)?;
        let lead = Monomial::generator(Generator::Cp(k));
        let c = combo.cls.coeff_of(&lead);
        if c.is_zero() {
            return Err(Error::Consistency(format!("{kind}_{k} has no CP{k} term")));
        }
        let rest = &combo.cls - &GradedPoly::term(lead, c.clone());
        let img = rest.substitute(&images, k)?.scale(&-c.recip());
        images.insert(Generator::Cp(k), img);
    }
    ClassifyingMap::new(n, images, cp_gens(keep))
}

/// Kills `T_5, ..., T_N`, keeping `CP_1..CP_4`.
pub fn buchstaber_map(fgl: &FglTable, pairing: &PairingTable) -> Result<ClassifyingMap> {
    if fgl.max_degree() < 5 {
        return Err(Error::domain("Buchstaber map needs N >= 5"));
    }
    eliminate(fgl, pairing, ComboKind::T, 4)
}

/// Kills `z_3, ..., z_N`, keeping `CP_1, CP_2`.
pub fn abelian_map(fgl: &FglTable, pairing: &PairingTable) -> Result<ClassifyingMap> {
    if fgl.max_degree() < 3 {
        return Err(Error::domain("abelian map needs N >= 3"));
    }
    eliminate(fgl, pairing, ComboKind::Z, 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdealFamily {
    /// `A_ij` with `i, j >= 3`.
    Pairing,
    /// `α_ij` with `i, j >= 2`.
    Alpha,
}

impl fmt::Display for IdealFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdealFamily::Pairing => "A",
            IdealFamily::Alpha => "alpha",
        })
    }
}

/// Images of the ideal generators `(i, j)` with `i <= j` inside the map's range.
pub fn annihilation_report(
    map: &ClassifyingMap,
    family: IdealFamily,
    fgl: &FglTable,
    pairing: &PairingTable,
) -> Result<Report> {
    let n = map.max_degree() as usize;
    let mut report = Report::new(format!("image of the {family} ideal to weight {n}"));
    let (lo, extra) = match family {
        IdealFamily::Pairing => (3, 2),
        IdealFamily::Alpha => (2, 1),
    };
    for total in 2 * lo..=n + extra {
        for i in lo..=total / 2 {
            let j = total - i;
            let cls = match family {
                IdealFamily::Pairing => pairing.a(i, j),
                IdealFamily::Alpha => fgl.alpha(i, j),
            };
            let img = map.eval(cls)?;
            report.push(Check::new(format!("{family}({i},{j})"), img.is_zero(), img.to_string()));
        }
    }
    Ok(report)
}

/// `φ_KH(A_ij) = 0` for `3 <= i <= j` within the solution's range.
pub fn kh_factors_through_buchstaber(kh: &ClassifyingMap, fgl: &FglTable, pairing: &PairingTable) -> Result<Report> {
    let mut r = annihilation_report(kh, IdealFamily::Pairing, fgl, pairing)?;
    r.title = format!("KH genus kills A(i,j), i,j >= 3, to weight {}", kh.max_degree());
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuarticCertificate {
    /// `L = g_B ∘ t⁻¹` with `t = x / ω_B`, so that `g_B = L ∘ t`.
    pub l: Series1<GradedPoly>,
    /// `1 / (L')²`.
    pub radicand: Series1<GradedPoly>,
    /// Coefficients of `x^5..x^N` of the radicand.
    pub tail_residuals: Vec<(usize, GradedPoly)>,
    /// Coefficients of `x^0..x^4` of the radicand.
    pub q_dictionary: Vec<GradedPoly>,
    /// First nonvanishing tail index of `1/((g_B ∘ t)')²`, the opposite direction.
    pub forward_first_tail: Option<usize>,
}

impl QuarticCertificate {
    pub fn passed(&self) -> bool {
        self.q_dictionary[0].is_one() && self.tail_residuals.iter().all(|(_, c)| c.is_zero())
    }

    pub fn check(&self) -> Check {
        let name = "1/(L')^2 is a quartic";
        if !self.q_dictionary[0].is_one() {
            return Check::fail(name, format!("constant term {}", self.q_dictionary[0]));
        }
        match self.tail_residuals.iter().find(|(_, c)| !c.is_zero()) {
            None => Check::pass(name, format!("x^5..x^{} vanish", self.tail_residuals.last().map_or(4, |(k, _)| *k))),
            Some((k, c)) => Check::fail(name, format!("coefficient of x^{k} is {c}")),
        }
    }
}

pub fn quartic_certificate(map: &ClassifyingMap, fgl: &FglTable) -> Result<QuarticCertificate> {
    let n = map.max_degree().min(fgl.max_degree()) as usize;
    if n < 4 {
        return Err(Error::domain("quartic certificate needs N >= 4"));
    }
    let omega_b = map.apply_series(&fgl.omega().truncate(n))?;
    let inv = omega_b.reciprocal()?;
    let t = Series1::from_fn(n + 1, |k| if k == 0 { GradedPoly::zero() } else { inv.coeff(k - 1).clone() });
    let g_b = map.log_series().truncate(n + 1);
    let l = g_b.compose(&t.revert()?)?;
    let radicand = l.derive().binomial_pow(&rat_int(-2))?;
    let tail_residuals = (5..=radicand.order()).map(|k| (k, radicand.coeff(k).clone())).collect();
    let q_dictionary = (0..=4).map(|k| radicand.coeff(k).clone()).collect();
    let forward = g_b.compose(&t)?.derive().binomial_pow(&rat_int(-2))?;
    let forward_first_tail = (5..=forward.order()).find(|&k| !forward.coeff(k).is_zero());
    Ok(QuarticCertificate { l, radicand, tail_residuals, q_dictionary, forward_first_tail })
}

/// `φ_KH` applied to the certificate's radicand coefficients, for comparison with `q_i`.
pub fn parameter_matching(kh: &ClassifyingMap, cert: &QuarticCertificate) -> Result<Vec<GradedPoly>> {
    cert.q_dictionary.iter().map(|c| kh.eval(c)).collect()
}

/// `φ_KH ∘ f_B = φ_KH` on `CP_1..CP_N`, and `φ_KH` of the quartic's coefficients.
pub fn kh_buchstaber_agreement(kh: &ClassifyingMap, fb: &ClassifyingMap, cert: &QuarticCertificate) -> Result<Report> {
    let n = kh.max_degree().min(fb.max_degree());
    let mut report = Report::new(format!("KH genus against the Buchstaber map to weight {n}"));
    for k in 1..=n {
        let lhs = kh.eval(&fb.image(k).unwrap())?;
        report.push(Check::new(
            format!("KH(f_B(CP{k})) = KH(CP{k})"),
            Some(&lhs) == kh.image(k).as_ref(),
            lhs.to_string(),
        ));
    }
    for (i, m) in parameter_matching(kh, cert)?.into_iter().enumerate().skip(1) {
        let q = GradedPoly::q(i as u8);
        report.push(Check::new(format!("KH(quartic coefficient {i}) = q{i}"), m == q, m.to_string()));
    }
    Ok(report)
}

/// Odd primes dividing a denominator of each image, for `CP_1..CP_N`.
pub fn odd_denominators(map: &ClassifyingMap) -> Vec<(u32, Vec<BigInt>)> {
    let mut out = Vec::new();
    for (g, img) in map.images() {
        let Generator::Cp(k) = *g else { continue };
        let mut den = BigInt::one();
        for (_, c) in img.terms() {
            den = den.lcm(c.denom());
        }
        while den.is_even() && !den.is_zero() {
            den /= 2;
        }
        let mut primes = Vec::new();
        let mut p = BigInt::from(3);
        while den > BigInt::one() {
            if (&den % &p).is_zero() {
                primes.push(p.clone());
                while (&den % &p).is_zero() {
                    den /= &p;
                }
            }
            p += 2;
        }
        out.push((k, primes));
    }
    out
}

/// Rebuilds both elimination maps at `N + 2` and compares images of `CP_1..CP_N`.
pub fn n_stability_check(fgl: &FglTable, pairing: &PairingTable, bigger: (&FglTable, &PairingTable)) -> Result<Report> {
    let n = fgl.max_degree();
    let mut report = Report::new(format!("elimination maps stable from N = {n} to N = {}", bigger.0.max_degree()));
    type Build = fn(&FglTable, &PairingTable) -> Result<ClassifyingMap>;
    let builds: [(&str, Build); 2] = [("buchstaber", buchstaber_map), ("abelian", abelian_map)];
    for (name, build) in builds {
        let small = build(fgl, pairing)?;
        let large = build(bigger.0, bigger.1)?;
        let bad = (1..=n).find(|&k| small.image(k) != large.image(k));
        report.push(match bad {
            None => Check::pass(format!("{name} images stable"), format!("CP1..CP{n}")),
            Some(k) => Check::fail(format!("{name} images stable"), format!("CP{k} differs")),
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionRow {
    pub name: String,
    pub weight: u32,
    pub cls: GradedPoly,
    pub buchstaber: GradedPoly,
    pub abelian: GradedPoly,
}

/// Denominator a power of two.
fn is_dyadic(c: &Rat) -> bool {
    let d = c.denom();
    (d & (d - 1u32)).is_zero()
}

/// `c` with `p = c q`, when one exists.
fn rational_multiple(p: &GradedPoly, q: &GradedPoly) -> Option<Rat> {
    let (m, qc) = q.terms().next()?;
    let c = p.coeff_of(m) / qc;
    (*p == q.scale(&c)).then_some(c)
}

/// Images of the SU generators under the Buchstaber and abelian maps.
pub fn su_restriction_report(
    fgl: &FglTable,
    fb: &ClassifyingMap,
    fab: &ClassifyingMap,
    w: &WTable,
    cap: u32,
) -> Result<(Vec<RestrictionRow>, Report)> {
    let low = build_x234(fgl)?;
    let mut rows = Vec::new();
    let mut push = |name: String, weight: u32, cls: GradedPoly| -> Result<()> {
        let buchstaber = fb.eval(&cls)?;
        let abelian = fab.eval(&cls)?;
        rows.push(RestrictionRow { name, weight, cls, buchstaber, abelian });
        Ok(())
    };
    push("x2".into(), 2, low.x2.clone())?;
    push("x3".into(), 3, low.x3.clone())?;
    push("x4".into(), 4, low.x4.clone())?;
    for e in build_bk_xk(fgl, w, cap)? {
        if e.k >= 5 {
            push(format!("x{}", e.k), e.k, e.x)?;
        }
    }

    let mut report = Report::new("restriction of SU generators");
    let r_x2 = rows[0].abelian.clone();
    report.push(Check::new("r_Ab(x2) = x2", r_x2 == low.x2, r_x2.to_string()));
    for row in &rows[1..3] {
        report.push(Check::new(format!("r_Ab({}) = 0", row.name), row.abelian.is_zero(), row.abelian.to_string()));
    }
    for row in &rows[3..] {
        let k = row.weight;
        let name = format!("r_Ab({}) in Z[1/2] r_Ab(x2)^(k/2)", row.name);
        let check = if k % 2 == 1 {
            Check::new(name, row.abelian.is_zero(), row.abelian.to_string())
        } else {
            match rational_multiple(&row.abelian, &r_x2.pow(k / 2)) {
                Some(c) if is_dyadic(&c) => Check::pass(name, format!("factor {c}")),
                Some(c) => Check::fail(name, format!("factor {c} is not in Z[1/2]")),
                None => Check::fail(name, format!("{} is not a multiple of r_Ab(x2)^{}", row.abelian, k / 2)),
            }
        };
        report.push(check);
    }
    Ok((rows, report))
}

/// Sign-insensitive comparison used when matching parameter conventions.
pub fn same_up_to_sign(a: &GradedPoly, b: &GradedPoly) -> bool {
    a == b || *a == -b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgl::{pairing_series, universal_fgl};
    use crate::su::w_coefficients;
    use proptest::prelude::*;

    fn q(i: u8) -> GradedPoly {
        GradedPoly::q(i)
    }

    fn tables(n: u32) -> (FglTable, PairingTable) {
        let f = universal_fgl(n).unwrap();
        let a = pairing_series(&f).unwrap();
        (f, a)
    }

    #[test]
    fn kh_low_coefficients() {
        let sol = kh_solve(8).unwrap();
        assert_eq!(*sol.f.coeff(2), q(1).scale(&rat(-1, 4)));
        assert_eq!(*sol.f.coeff(3), &q(1).pow(2).scale(&rat(1, 16)) - &q(2).scale(&rat(1, 12)));
        assert_eq!(sol.map.image(1).unwrap(), q(1).scale(&rat(1, 2)));
        assert!(kh_residual_check(&sol).passed);
        assert!(kh_solve(1).is_err());
        for k in 1..=8 {
            assert!(sol.map.image(k).unwrap().is_homogeneous_of(k));
        }
    }

    #[test]
    fn kh_zero_parameters() {
        let sol = kh_solve(6).unwrap();
        let zero: BTreeMap<Generator, GradedPoly> = (1..=4).map(|i| (Generator::Q(i), GradedPoly::zero())).collect();
        for k in 1..=6 {
            assert!(sol.map.image(k).unwrap().substitute(&zero, 6).unwrap().is_zero());
        }
        assert!(sol.f.coeffs()[2..].iter().all(|c| !c.is_zero()));
    }

    #[test]
    fn schreieder_examples() {
        let s = schreieder_genus(6).unwrap();
        assert_eq!(s.image(1).unwrap(), q(1).scale(&rat(-1, 2)));
        assert_eq!(s.image(2).unwrap(), &q(1).pow(2).scale(&rat(3, 8)) - &q(2).scale(&rat(1, 2)));
        // squaring log' recovers 1/R²
        let lp = Series1::from_fn(6, |k| s.image(k as u32).unwrap());
        let r2 = quartic(6).binomial_pow(&rat_int(-1)).unwrap();
        assert_eq!(lp.pow(2), r2);
    }

    #[test]
    fn eval_is_ring_map_and_bounded() {
        let sol = kh_solve(6).unwrap();
        assert!(sol.map.eval(&GradedPoly::one()).unwrap().is_one());
        assert_eq!(sol.map.eval(&GradedPoly::cp(1)).unwrap(), q(1).scale(&rat(1, 2)));
        assert!(sol.map.eval(&GradedPoly::cp(7)).is_err());
        assert!(sol.map.eval(&q(1)).is_err());
    }

    #[test]
    fn buchstaber_examples() {
        let (f, a) = tables(9);
        let fb = buchstaber_map(&f, &a).unwrap();
        assert_eq!(fb.image(4).unwrap(), GradedPoly::cp(4));
        assert_eq!(fb.eval(a.a(3, 4)).unwrap(), GradedPoly::zero());
        let r = annihilation_report(&fb, IdealFamily::Pairing, &f, &a).unwrap();
        assert!(r.passed(), "{r}");
        // CP5 -> -(6/s5(T5)) f_B(T5 - c CP5) with T5 = A_34 and s5 = 5
        let t5 = a.a(3, 4);
        let lead = Monomial::generator(Generator::Cp(5));
        let rest = t5 - &GradedPoly::term(lead.clone(), t5.coeff_of(&lead));
        assert_eq!(fb.image(5).unwrap(), fb.eval(&rest).unwrap().scale(&rat(-6, 5)));
        for k in 1..=9 {
            let img = fb.image(k).unwrap();
            assert!(img.is_homogeneous_of(k));
            assert!(img.generators().iter().all(|g| matches!(g, Generator::Cp(1..=4))));
        }
        let (f4, a4) = tables(4);
        assert!(buchstaber_map(&f4, &a4).is_err());
    }

    #[test]
    fn abelian_examples() {
        let (f, a) = tables(8);
        let fab = abelian_map(&f, &a).unwrap();
        assert_eq!(fab.image(2).unwrap(), GradedPoly::cp(2));
        let expect = (&(&GradedPoly::cp(1) * &GradedPoly::cp(2)).scale(&rat_int(8))
            - &GradedPoly::cp(1).pow(3).scale(&rat_int(5)))
            .scale(&rat(1, 3));
        assert_eq!(fab.image(3).unwrap(), expect);
        assert!(annihilation_report(&fab, IdealFamily::Alpha, &f, &a).unwrap().passed());
        assert!(annihilation_report(&fab, IdealFamily::Pairing, &f, &a).unwrap().passed());
    }

    #[test]
    fn kh_kills_pairing_ideal() {
        let (f, a) = tables(10);
        let sol = kh_solve(10).unwrap();
        let r = kh_factors_through_buchstaber(&sol.map, &f, &a).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.find("A(3,4)").unwrap().passed);
        assert!(r.find("A(4,5)").unwrap().passed);
    }

    #[test]
    fn quartic_certificate_holds() {
        let (f, a) = tables(9);
        let fb = buchstaber_map(&f, &a).unwrap();
        let cert = quartic_certificate(&fb, &f).unwrap();
        assert!(cert.passed(), "{}", cert.check());
        assert!(cert.q_dictionary[0].is_one());
        let c1 = cert.q_dictionary[1].coeff_of(&Monomial::generator(Generator::Cp(1)));
        assert_eq!(cert.q_dictionary[1], GradedPoly::cp(1).scale(&c1));
        assert_eq!(cert.tail_residuals.first().unwrap().0, 5);
        assert_eq!(cert.tail_residuals.last().unwrap().0, 9);
        assert_eq!(cert.forward_first_tail, Some(5));
        // the KH genus takes the linear coefficient to q_1
        let kh = kh_solve(9).unwrap();
        let matched = parameter_matching(&kh.map, &cert).unwrap();
        assert_eq!(matched[1], q(1));
        let r = kh_buchstaber_agreement(&kh.map, &fb, &cert).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn maps_are_stable_in_n() {
        let (f, a) = tables(8);
        let (g, b) = tables(10);
        let r = n_stability_check(&f, &a, (&g, &b)).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn restriction_examples() {
        let (f, a) = tables(8);
        let fb = buchstaber_map(&f, &a).unwrap();
        let fab = abelian_map(&f, &a).unwrap();
        let w = w_coefficients(&f).unwrap();
        let (rows, report) = su_restriction_report(&f, &fb, &fab, &w, 10).unwrap();
        assert_eq!(rows[0].buchstaber, rows[0].cls);
        assert_eq!(rows[0].abelian, rows[0].cls);
        assert!(report.find("r_Ab(x3) = 0").unwrap().passed);
        assert!(report.find("r_Ab(x4) = 0").unwrap().passed);
        assert_eq!(rows.len(), 7);
    }

    fn arb_cp_poly(w: u32) -> impl Strategy<Value = GradedPoly> {
        let parts = crate::su::partitions(w);
        proptest::collection::vec((-4i64..=4, 0..parts.len()), 1..4).prop_map(move |terms| {
            let mut p = GradedPoly::zero();
            for (c, k) in terms {
                let m = Monomial::from_factors(parts[k].parts().iter().map(|&n| (Generator::Cp(n), 1)));
                p += &GradedPoly::term(m, rat_int(c));
            }
            p
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn genus_eval_is_multiplicative(a in arb_cp_poly(2), b in arb_cp_poly(4)) {
            let (f, p) = tables(6);
            let fb = buchstaber_map(&f, &p).unwrap();
            let lhs = fb.eval(&(&a * &b)).unwrap();
            let rhs = &fb.eval(&a).unwrap() * &fb.eval(&b).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
