//! Exact integers and rationals, extended gcd certificates, dyadic splitting
//! and binomial coefficients.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub use num_bigint::BigInt;
pub use num_rational::BigRational as Rat;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rat {
    Rat::from_integer(n.into())
}

/// Bezout certificate for the gcd of a list of nonzero integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcdCertificate {
    pub inputs: Vec<BigInt>,
    pub g: BigInt,
    pub lambda: Vec<BigInt>,
}

impl GcdCertificate {
    /// Checks `Σ λ_i m_i = g` and that `g` divides every input.
    pub fn verify(&self) -> bool {
        if self.inputs.len() != self.lambda.len() || !self.g.is_positive() {
            return false;
        }
        let sum: BigInt = self.inputs.iter().zip(&self.lambda).map(|(m, l)| m * l).sum();
        sum == self.g && self.inputs.iter().all(|m| (m % &self.g).is_zero())
    }
}

/// Extended Euclid on two integers, `a, b >= 0`: returns `(g, s, t)` with `s a + t b = g`.
fn ext_euclid(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (BigInt::one(), BigInt::zero());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    (r0, s0, t0)
}

/// Left fold of two-term extended Euclid over `m`.
///
/// When the running gcd already divides the next entry that entry gets
/// `λ = 0`; otherwise the coefficients seen so far are rescaled. The result is
/// a deterministic function of the input order.
pub fn ext_gcd_vector(m: &[BigInt]) -> Result<GcdCertificate> {
    if m.is_empty() {
        return Err(Error::domain("ext_gcd_vector of an empty list"));
    }
    if let Some(pos) = m.iter().position(|x| x.is_zero()) {
        return Err(Error::domain(format!("ext_gcd_vector: entry {pos} is zero")));
    }
    let sign = |x: &BigInt| if x.is_negative() { -BigInt::one() } else { BigInt::one() };
    let mut g = m[0].abs();
    let mut lambda = vec![BigInt::zero(); m.len()];
    lambda[0] = sign(&m[0]);
    for (k, x) in m.iter().enumerate().skip(1) {
        let ax = x.abs();
        if (&ax % &g).is_zero() {
            continue;
        }
        let (ng, s, t) = ext_euclid(&g, &ax);
        for l in lambda.iter_mut().take(k) {
            *l *= &s;
        }
        lambda[k] = t * sign(x);
        g = ng;
    }
    Ok(GcdCertificate { inputs: m.to_vec(), g, lambda })
}

/// gcd of the absolute values, skipping zeros; zero if every entry is zero.
pub fn gcd_all<'a>(values: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    values.into_iter().fold(BigInt::zero(), |acc, v| acc.gcd(v))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicSplit {
    pub sign: i8,
    pub exponent: i64,
    pub odd: Rat,
}

fn strip_twos(n: &BigInt) -> (BigInt, i64) {
    let tz = n.trailing_zeros().unwrap_or(0);
    (n >> tz, tz as i64)
}

/// Writes `r = sign · 2^a · odd` with `odd > 0` having odd numerator and denominator.
pub fn dyadic_split(r: &Rat) -> Result<DyadicSplit> {
    if r.is_zero() {
        return Err(Error::domain("dyadic_split of zero"));
    }
    let sign = if r.is_negative() { -1 } else { 1 };
    let (num, a) = strip_twos(&r.numer().abs());
    let (den, b) = strip_twos(r.denom());
    Ok(DyadicSplit { sign, exponent: a - b, odd: Rat::new(num, den) })
}

impl DyadicSplit {
    pub fn recombine(&self) -> Rat {
        let two = rat_int(2);
        let mut p = Rat::one();
        for _ in 0..self.exponent.unsigned_abs() {
            p *= &two;
        }
        if self.exponent < 0 {
            p = p.recip();
        }
        p * &self.odd * rat_int(self.sign as i64)
    }
}

/// True when `r` is `±2^a` for some integer `a`.
pub fn is_dyadic_unit(r: &Rat) -> bool {
    dyadic_split(r).map(|s| s.odd.is_one()).unwrap_or(false)
}

pub fn binomial(n: i64, k: i64) -> Result<BigInt> {
    if k < 0 || n < 0 || k > n {
        return Err(Error::domain(format!("binomial({n}, {k}) out of range")));
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Ok(acc)
}

/// `binomial` for arguments already known to be in range.
pub(crate) fn binom(n: i64, k: i64) -> BigInt {
    binomial(n, k).expect("binomial arguments in range")
}

/// Returns `Some(p)` when `n = p^s` for a prime `p` and `s >= 1`.
pub fn prime_power_base(n: u64) -> Option<u64> {
    if n < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut m = n;
            while m.is_multiple_of(p) {
                m /= p;
            }
            return (m == 1).then_some(p);
        }
        p += 1;
    }
    Some(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn ext_gcd_first_element_already_gcd() {
        let c = ext_gcd_vector(&ints(&[3, 3])).unwrap();
        assert_eq!(c.g, BigInt::from(3));
        assert_eq!(c.lambda, ints(&[1, 0]));
    }

    #[test]
    fn ext_gcd_examples_verify_by_substitution() {
        for (v, g) in [(vec![4, 6, 4], 2), (vec![6, 15, 20, 15, 6], 1), (vec![-5, 5], 5)] {
            let c = ext_gcd_vector(&ints(&v)).unwrap();
            assert_eq!(c.g, BigInt::from(g));
            let sum: BigInt = c.inputs.iter().zip(&c.lambda).map(|(a, b)| a * b).sum();
            assert_eq!(sum, BigInt::from(g));
            assert!(c.verify());
        }
    }

    #[test]
    fn ext_gcd_rejects_bad_input() {
        assert!(ext_gcd_vector(&[]).is_err());
        assert!(ext_gcd_vector(&ints(&[4, 0, 2])).is_err());
    }

    #[test]
    fn dyadic_split_examples() {
        let s = dyadic_split(&rat(3, 1)).unwrap();
        assert_eq!((s.sign, s.exponent, s.odd), (1, 0, rat(3, 1)));
        let s = dyadic_split(&rat(-12, 5)).unwrap();
        assert_eq!((s.sign, s.exponent, s.odd), (-1, 2, rat(3, 5)));
        let s = dyadic_split(&rat(1, 8)).unwrap();
        assert_eq!((s.sign, s.exponent, s.odd), (1, -3, rat(1, 1)));
        assert!(dyadic_split(&rat(0, 1)).is_err());
    }

    fn pascal(n: usize, k: usize) -> BigInt {
        let mut row = vec![BigInt::one()];
        for _ in 0..n {
            let mut next = vec![BigInt::one(); row.len() + 1];
            for i in 1..row.len() {
                next[i] = &row[i - 1] + &row[i];
            }
            row = next;
        }
        row[k].clone()
    }

    #[test]
    fn binomial_matches_pascal_recurrence() {
        assert_eq!(binomial(4, 2).unwrap(), BigInt::from(6));
        assert_eq!(binomial(6, 3).unwrap(), pascal(6, 3));
        assert_eq!(binomial(7, 3).unwrap(), pascal(7, 3));
        assert_eq!(pascal(7, 3), BigInt::from(35));
        for n in 0..30 {
            for k in 0..=n {
                assert_eq!(binomial(n as i64, k as i64).unwrap(), pascal(n, k));
            }
        }
        assert!(binomial(3, 4).is_err());
        assert!(binomial(3, -1).is_err());
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power_base(4), Some(2));
        assert_eq!(prime_power_base(9), Some(3));
        assert_eq!(prime_power_base(5), Some(5));
        assert_eq!(prime_power_base(6), None);
        assert_eq!(prime_power_base(1), None);
        assert_eq!(prime_power_base(64), Some(2));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

            #[test]
            fn gcd_certificate_holds(v in prop::collection::vec((-5000i64..5000).prop_filter("nonzero", |x| *x != 0), 1..8)) {
                let c = ext_gcd_vector(&ints(&v)).unwrap();
                prop_assert!(c.verify());
                let again = ext_gcd_vector(&ints(&v)).unwrap();
                prop_assert_eq!(c, again);
            }

            #[test]
            fn dyadic_split_round_trips(n in -100000i64..100000, d in 1i64..100000) {
                prop_assume!(n != 0);
                let r = rat(n, d);
                let s = dyadic_split(&r).unwrap();
                prop_assert!(s.odd.numer().is_odd() && s.odd.denom().is_odd());
                prop_assert_eq!(s.recombine(), r);
            }

            #[test]
            fn rationals_form_a_field(a in (-50i64..50, 1i64..50), b in (-50i64..50, 1i64..50), c in (-50i64..50, 1i64..50)) {
                let (a, b, c) = (rat(a.0, a.1), rat(b.0, b.1), rat(c.0, c.1));
                prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
                prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
                prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
                prop_assert!(a.denom().is_positive());
                prop_assert_eq!(a.numer().gcd(a.denom()), if a.is_zero() { a.denom().clone() } else { BigInt::one() });
            }
        }
    }
}
