//! Binomial gcd functions, λ-vectors and the generator combinations built
//! from them, plus the s-number functional and Novikov's criterion.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::arith::{
    binom, dyadic_split, ext_gcd_vector, gcd_all, prime_power_base, rat_int, BigInt, DyadicSplit, GcdCertificate, Rat,
};
use crate::error::{Error, Result};
use crate::fgl::{FglTable, PairingTable};
use crate::graded::{GradedPoly, Monomial};
use crate::report::{Check, Report};

/// `gcd(C(m+1, i))` for `1 <= i <= m`.
pub fn d(m: u32) -> Result<BigInt> {
    if m < 1 {
        return Err(Error::domain("d(m) needs m >= 1"));
    }
    let n = i64::from(m) + 1;
    Ok(gcd_all(&(1..n).map(|i| binom(n, i)).collect::<Vec<_>>()))
}

/// `p` when `m + 1` is a power of the prime `p`, otherwise 1.
pub fn d_closed_form(m: u32) -> BigInt {
    prime_power_base(u64::from(m) + 1).map_or_else(BigInt::one, BigInt::from)
}

fn big_d_entries(m: u32) -> Vec<BigInt> {
    let n = i64::from(m) + 1;
    (3..i64::from(m)).map(|i| binom(n, i) - binom(n, i - 1)).collect()
}

/// `gcd(C(m+1, i) - C(m+1, i-1))` for `2 < i <= m - 1`, zero entries skipped.
pub fn big_d(m: u32) -> Result<BigInt> {
    if m < 5 {
        return Err(Error::domain("D(m) needs m >= 5"));
    }
    Ok(gcd_all(&big_d_entries(m)))
}

/// `gcd(C(m+1, i))` for `2 <= i <= m - 1`. For `m = 3` this is `C(4, 2) = 6`.
pub fn d2(m: u32) -> Result<BigInt> {
    if m < 3 {
        return Err(Error::domain("d2(m) needs m >= 3"));
    }
    let n = i64::from(m) + 1;
    Ok(gcd_all(&(2..i64::from(m)).map(|i| binom(n, i)).collect::<Vec<_>>()))
}

fn is_two_power_minus_two(m: u32) -> bool {
    (m + 2).is_power_of_two()
}

pub fn verify_gcd_laws(max_m: u32) -> Result<Report> {
    if max_m < 5 {
        return Err(Error::domain("gcd laws need M >= 5"));
    }
    let mut report = Report::new(format!("gcd laws for m <= {max_m}"));

    let bad = (1..=max_m).find(|&m| d(m).unwrap() != d_closed_form(m));
    report.push(match bad {
        None => Check::pass("d(m) closed form", format!("1 <= m <= {max_m}")),
        Some(m) => {
            Check::fail("d(m) closed form", format!("m = {m}: d = {}, closed form {}", d(m).unwrap(), d_closed_form(m)))
        }
    });

    let mut bad = None;
    for m in 5..=max_m {
        let (big, small, prev) = (big_d(m)?, d(m)?, d(m - 1)?);
        let expect = if is_two_power_minus_two(m) { BigInt::from(2) } else { prev };
        if !(&big % &small).is_zero() || &big / &small != expect {
            bad = Some(format!("m = {m}: D = {big}, d = {small}, expected ratio {expect}"));
            break;
        }
    }
    report.push(match bad {
        None => Check::pass("D(m)/d(m) = d(m-1), or 2 when m = 2^k - 2", format!("5 <= m <= {max_m}")),
        Some(msg) => Check::fail("D(m)/d(m) = d(m-1), or 2 when m = 2^k - 2", msg),
    });

    let bad = (3..=max_m).find(|&m| d2(m).unwrap() != d(m).unwrap() * d(m - 1).unwrap());
    report.push(match bad {
        None => Check::pass("d2(m) = d(m) d(m-1)", format!("3 <= m <= {max_m}")),
        Some(m) => Check::fail("d2(m) = d(m) d(m-1)", format!("m = {m}: d2 = {}", d2(m).unwrap())),
    });
    Ok(report)
}

/// `s_n(p) = (n+1) [CP_n] p`, which vanishes on decomposables.
pub fn s_number(p: &GradedPoly, n: u32) -> Result<Rat> {
    if n < 1 {
        return Err(Error::domain("s-number needs n >= 1"));
    }
    if !p.is_homogeneous_of(n) {
        return Err(Error::domain(format!("s_{n} of a polynomial that is not homogeneous of weight {n}")));
    }
    let m = Monomial::generator(crate::graded::Generator::Cp(n));
    Ok(p.coeff_of(&m) * rat_int(i64::from(n) + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComboKind {
    /// `Σ λ_i α_{i,m+1-i}`, `1 <= i <= m`.
    E,
    /// `Σ λ_i A_{i,m+2-i}`, `3 <= i <= m-1`.
    T,
    /// `Σ λ_i α_{i,m+1-i}`, `2 <= i <= m-1`.
    Z,
}

impl fmt::Display for ComboKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComboKind::E => "e",
            ComboKind::T => "T",
            ComboKind::Z => "z",
        })
    }
}

impl ComboKind {
    pub fn min_weight(self) -> u32 {
        match self {
            ComboKind::E => 2,
            ComboKind::T => 5,
            ComboKind::Z => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorCombo {
    pub m: u32,
    pub kind: ComboKind,
    /// First index of the summation range; `lambda[k]` multiplies term `first + k`.
    pub first: u32,
    pub lambda: Vec<BigInt>,
    pub cls: GradedPoly,
    pub s: Rat,
    /// The gcd the s-number must equal up to sign.
    pub target: BigInt,
    pub certificate: GcdCertificate,
}

/// Extended gcd that tolerates zero entries by giving them `λ = 0`.
fn certificate_with_zeros(values: &[BigInt]) -> Result<(Vec<BigInt>, GcdCertificate)> {
    let nonzero: Vec<BigInt> = values.iter().filter(|v| !v.is_zero()).cloned().collect();
    let cert = ext_gcd_vector(&nonzero)?;
    let mut it = cert.lambda.iter();
    let lambda = values.iter().map(|v| if v.is_zero() { BigInt::zero() } else { it.next().unwrap().clone() }).collect();
    Ok((lambda, cert))
}

pub fn build_combo(m: u32, kind: ComboKind, fgl: &FglTable, pairing: &PairingTable) -> Result<GeneratorCombo> {
    if m < kind.min_weight() {
        return Err(Error::domain(format!("{kind} combination needs m >= {}", kind.min_weight())));
    }
    if m > fgl.max_degree() || m > pairing.max_degree() {
        return Err(Error::domain(format!("weight {m} exceeds the table bound {}", fgl.max_degree())));
    }
    let n = i64::from(m) + 1;
    let mi = m as usize;
    let (first, last, values, target) = match kind {
        ComboKind::E => (1, m, (1..=i64::from(m)).map(|i| binom(n, i)).collect::<Vec<_>>(), d(m)?),
        ComboKind::T => (3, m - 1, big_d_entries(m), big_d(m)?),
        ComboKind::Z => (2, m - 1, (2..i64::from(m)).map(|i| binom(n, i)).collect(), d2(m)?),
    };
    let (lambda, certificate) = certificate_with_zeros(&values)?;
    let mut cls = GradedPoly::zero();
    for (k, l) in lambda.iter().enumerate() {
        if l.is_zero() {
            continue;
        }
        let i = first as usize + k;
        let term = match kind {
            ComboKind::T => pairing.a(i, mi + 2 - i),
            _ => fgl.alpha(i, mi + 1 - i),
        };
        cls += &term.scale(&Rat::from_integer(l.clone()));
    }
    debug_assert_eq!(last - first + 1, lambda.len() as u32);
    let s = s_number(&cls, m)?;
    if s.abs() != Rat::from_integer(target.clone()) {
        return Err(Error::Consistency(format!("s_{m} of {kind}_{m} is {s}, expected ±{target}")));
    }
    Ok(GeneratorCombo { m, kind, first, lambda, cls, s, target, certificate })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NovikovVerdict {
    pub admissible: bool,
    /// The odd prime `p` the odd part must equal up to sign, or 1.
    pub required: u64,
    pub split: DyadicSplit,
}

/// Novikov's criterion for a polynomial generator of `MSU_*[1/2]` in weight `n`.
pub fn novikov_admissible(n: u32, s: &Rat) -> Result<NovikovVerdict> {
    if n < 2 {
        return Err(Error::domain("Novikov criterion needs n >= 2"));
    }
    if s.is_zero() {
        return Err(Error::domain("Novikov criterion of a zero s-number"));
    }
    let odd_base = |k: u64| prime_power_base(k).filter(|&p| p != 2);
    let required = odd_base(u64::from(n)).or_else(|| odd_base(u64::from(n) + 1)).unwrap_or(1);
    let split = dyadic_split(s)?;
    let admissible = split.odd.abs() == rat_int(required);
    Ok(NovikovVerdict { admissible, required, split })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::fgl::{pairing_series, universal_fgl};
    use crate::graded::Generator;
    use proptest::prelude::*;

    fn tables(n: u32) -> (FglTable, PairingTable) {
        let f = universal_fgl(n).unwrap();
        let a = pairing_series(&f).unwrap();
        (f, a)
    }

    #[test]
    fn gcd_function_examples() {
        assert_eq!(d(3).unwrap(), BigInt::from(2));
        assert_eq!(d(4).unwrap(), BigInt::from(5));
        assert_eq!(d(5).unwrap(), BigInt::from(1));
        assert_eq!(d(1).unwrap(), BigInt::from(2));
        assert!(d(0).is_err());
        assert_eq!(big_d(5).unwrap(), BigInt::from(5));
        assert_eq!(big_d(6).unwrap(), BigInt::from(14));
        assert!(big_d(4).is_err());
        assert_eq!(d2(4).unwrap(), BigInt::from(10));
        assert_eq!(d2(3).unwrap(), BigInt::from(6));
        assert!(d2(2).is_err());
    }

    #[test]
    fn gcd_laws_to_64() {
        let r = verify_gcd_laws(64).unwrap();
        assert!(r.passed(), "{r}");
        assert!(verify_gcd_laws(4).is_err());
    }

    #[test]
    fn s_number_examples() {
        let (f, _) = tables(4);
        for n in 1..6 {
            assert_eq!(s_number(&GradedPoly::cp(n), n).unwrap(), rat_int(i64::from(n) + 1));
        }
        assert_eq!(s_number(f.alpha(1, 2), 2).unwrap(), rat_int(-3));
        assert_eq!(s_number(&-f.alpha(2, 2), 3).unwrap(), rat_int(6));
        assert!(s_number(&GradedPoly::cp(2), 3).is_err());
        assert!(s_number(&(&GradedPoly::cp(2) + &GradedPoly::cp(1)), 2).is_err());
    }

    #[test]
    fn alpha_s_numbers_are_negative_binomials() {
        let (f, _) = tables(10);
        for (i, j, c) in f.alpha_series().iter() {
            if i >= 1 && j >= 1 {
                let n = (i + j - 1) as u32;
                let expect = -Rat::from_integer(binom((i + j) as i64, i as i64));
                assert_eq!(s_number(c, n).unwrap(), expect, "alpha({i},{j})");
            }
        }
        for m in 2..=10u32 {
            let vals: Vec<BigInt> =
                (1..=m as usize).map(|i| s_number(f.alpha(i, m as usize + 1 - i), m).unwrap().numer().abs()).collect();
            assert_eq!(gcd_all(&vals), d(m).unwrap());
        }
    }

    #[test]
    fn combo_examples() {
        let (f, a) = tables(10);
        let t5 = build_combo(5, ComboKind::T, &f, &a).unwrap();
        assert_eq!(t5.s, rat_int(5));
        assert_eq!(t5.cls, *a.a(3, 4));

        let z3 = build_combo(3, ComboKind::Z, &f, &a).unwrap();
        assert_eq!(z3.cls, *f.alpha(2, 2));
        assert_eq!(z3.s, rat_int(-6));

        let e2 = build_combo(2, ComboKind::E, &f, &a).unwrap();
        assert_eq!(e2.lambda, vec![BigInt::from(1), BigInt::from(0)]);
        assert_eq!(e2.cls, *f.alpha(1, 2));
        assert_eq!(e2.s, rat_int(-3));

        assert!(build_combo(4, ComboKind::T, &f, &a).is_err());
        assert!(build_combo(2, ComboKind::Z, &f, &a).is_err());
        assert!(build_combo(11, ComboKind::E, &f, &a).is_err());
    }

    #[test]
    fn combos_hit_their_gcds() {
        let (f, a) = tables(10);
        for m in 2..=10 {
            for kind in [ComboKind::E, ComboKind::T, ComboKind::Z] {
                if m < kind.min_weight() {
                    continue;
                }
                let c = build_combo(m, kind, &f, &a).unwrap();
                assert!(c.certificate.verify());
                assert!(c.cls.is_homogeneous_of(m));
                assert_eq!(c.s.abs(), Rat::from_integer(c.target.clone()), "{kind}_{m}");
                // the T-combination has s = +D(m); the others carry the minus sign of s(α)
                let sign = if kind == ComboKind::T { 1 } else { -1 };
                assert_eq!(c.s, Rat::from_integer(c.target.clone() * sign));
            }
        }
        // m = 6 has a zero difference at i = 4
        let t6 = build_combo(6, ComboKind::T, &f, &a).unwrap();
        assert!(t6.lambda[1].is_zero());
        assert_eq!(t6.s, rat_int(14));
    }

    #[test]
    fn novikov_examples() {
        assert!(novikov_admissible(3, &rat_int(6)).unwrap().admissible);
        assert!(novikov_admissible(4, &rat_int(10)).unwrap().admissible);
        let v = novikov_admissible(5, &rat_int(6)).unwrap();
        assert!(!v.admissible);
        assert_eq!(v.required, 5);
        assert!(novikov_admissible(2, &rat_int(3)).unwrap().admissible);
        assert!(novikov_admissible(14, &rat(-1, 4)).unwrap().admissible);
        assert_eq!(novikov_admissible(6, &rat(-7, 4)).unwrap().required, 7);
        assert!(novikov_admissible(3, &rat_int(0)).is_err());
        assert!(novikov_admissible(1, &rat_int(2)).is_err());
        // 8 + 1 = 3^2
        assert_eq!(novikov_admissible(8, &rat_int(3)).unwrap().required, 3);
    }

    fn arb_homogeneous(w: u32) -> impl Strategy<Value = GradedPoly> {
        let parts = crate::su::partitions(w);
        proptest::collection::vec((-5i64..=5, 0..parts.len()), 1..4).prop_map(move |terms| {
            let mut p = GradedPoly::zero();
            for (c, k) in terms {
                let m = Monomial::from_factors(parts[k].parts().iter().map(|&n| (Generator::Cp(n), 1)));
                p += &GradedPoly::term(m, rat_int(c));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn s_number_vanishes_on_products(a in arb_homogeneous(2), b in arb_homogeneous(3)) {
            prop_assert!(s_number(&(&a * &b), 5).unwrap().is_zero());
        }

        #[test]
        fn s_number_is_linear(a in arb_homogeneous(4), b in arb_homogeneous(4), c in -7i64..7) {
            let lhs = s_number(&(&a + &b.scale(&rat_int(c))), 4).unwrap();
            let rhs = s_number(&a, 4).unwrap() + s_number(&b, 4).unwrap() * rat_int(c);
            prop_assert_eq!(lhs, rhs);
        }
    }
}
