//! Sparse polynomials over Q in weighted generators.
//!
//! Generators are the projective-space classes `CP_n` (weight `n`) and the
//! four elliptic parameters `q_1..q_4` (weight `i`). A weight is half the
//! topological degree.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::arith::Rat;
use crate::error::{Error, Result};

/// Ordered with every `CP` before every `q`, then by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    Cp(u32),
    Q(u8),
}

impl Generator {
    pub fn cp(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("CP_0 is the unit, not a generator"));
        }
        Ok(Generator::Cp(n))
    }

    pub fn q(i: u8) -> Result<Self> {
        if !(1..=4).contains(&i) {
            return Err(Error::domain(format!("q_{i}: index must be in 1..=4")));
        }
        Ok(Generator::Q(i))
    }

    pub fn weight(self) -> u32 {
        match self {
            Generator::Cp(n) => n,
            Generator::Q(i) => i as u32,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Cp(n) => write!(f, "CP{n}"),
            Generator::Q(i) => write!(f, "q{i}"),
        }
    }
}

/// A product of generators. Ordered by weight first, then lexicographically
/// on the sorted factor list; this is the canonical term order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    weight: u32,
    factors: Vec<(Generator, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn generator(g: Generator) -> Self {
        Monomial { weight: g.weight(), factors: vec![(g, 1)] }
    }

    pub fn from_factors(factors: impl IntoIterator<Item = (Generator, u32)>) -> Self {
        let mut map: BTreeMap<Generator, u32> = BTreeMap::new();
        for (g, e) in factors {
            *map.entry(g).or_default() += e;
        }
        let factors: Vec<_> = map.into_iter().filter(|&(_, e)| e > 0).collect();
        let weight = factors.iter().map(|&(g, e)| g.weight() * e).sum();
        Monomial { weight, factors }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn factors(&self) -> &[(Generator, u32)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Total number of generator factors counted with multiplicity.
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    /// The generator if this monomial is a single generator to the first power.
    pub fn as_generator(&self) -> Option<Generator> {
        match self.factors.as_slice() {
            [(g, 1)] => Some(*g),
            _ => None,
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.factors, &other.factors);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial { weight: self.weight + other.weight, factors: out }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (k, (g, e)) in self.factors.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{g}")?;
            } else {
                write!(f, "{g}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial over Q. No zero coefficients are stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GradedPoly {
    terms: BTreeMap<Monomial, Rat>,
}

impl GradedPoly {
    pub fn zero() -> Self {
        GradedPoly::default()
    }

    pub fn one() -> Self {
        GradedPoly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        GradedPoly::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        GradedPoly { terms }
    }

    pub fn generator(g: Generator) -> Self {
        GradedPoly::term(Monomial::generator(g), Rat::one())
    }

    /// `CP_n`, with `CP_0 = 1`.
    pub fn cp(n: u32) -> Self {
        if n == 0 {
            GradedPoly::one()
        } else {
            GradedPoly::generator(Generator::Cp(n))
        }
    }

    pub fn q(i: u8) -> Self {
        GradedPoly::generator(Generator::Q(i))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Monomial::one()).is_some_and(|c| c.is_one())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff_of(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    /// Constant term.
    pub fn constant_term(&self) -> Rat {
        self.coeff_of(&Monomial::one())
    }

    /// The common weight of all terms; `None` for zero or mixed-weight polynomials.
    pub fn homogeneous_weight(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(Monomial::weight);
        let w = it.next()?;
        it.all(|x| x == w).then_some(w)
    }

    /// Zero counts as homogeneous of every weight.
    pub fn is_homogeneous_of(&self, w: u32) -> bool {
        self.terms.keys().all(|m| m.weight() == w)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.homogeneous_weight().is_some()
    }

    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::weight).max()
    }

    pub fn generators(&self) -> BTreeSet<Generator> {
        self.terms.keys().flat_map(|m| m.factors().iter().map(|&(g, _)| g)).collect()
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rat) -> GradedPoly {
        if c.is_zero() {
            return GradedPoly::zero();
        }
        GradedPoly { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    /// Product, dropping terms of weight above `cap` when one is given.
    pub fn mul_capped(&self, other: &GradedPoly, cap: Option<u32>) -> GradedPoly {
        let mut acc: HashMap<Monomial, Rat> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if cap.is_some_and(|c| ma.weight() + mb.weight() > c) {
                    continue;
                }
                *acc.entry(ma.mul(mb)).or_insert_with(Rat::zero) += ca * cb;
            }
        }
        GradedPoly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn pow(&self, e: u32) -> GradedPoly {
        let mut acc = GradedPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn truncate(&self, cap: u32) -> GradedPoly {
        GradedPoly {
            terms: self.terms.iter().filter(|(m, _)| m.weight() <= cap).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Weight-`w` part.
    pub fn component(&self, w: u32) -> GradedPoly {
        GradedPoly {
            terms: self.terms.iter().filter(|(m, _)| m.weight() == w).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Ring-map evaluation sending each generator to its image, truncated at `weight_cap`.
    ///
    /// Images must be homogeneous of their generator's weight.
    pub fn substitute(&self, images: &BTreeMap<Generator, GradedPoly>, weight_cap: u32) -> Result<GradedPoly> {
        let mut subst = Substitution::new(images)?;
        subst.apply(self, weight_cap)
    }
}

/// Reusable substitution that memoizes generator powers.
pub struct Substitution<'a> {
    images: &'a BTreeMap<Generator, GradedPoly>,
    powers: HashMap<(Generator, u32), GradedPoly>,
}

impl<'a> Substitution<'a> {
    pub fn new(images: &'a BTreeMap<Generator, GradedPoly>) -> Result<Self> {
        for (g, img) in images {
            if !img.is_homogeneous_of(g.weight()) {
                return Err(Error::domain(format!("image of {g} is not homogeneous of weight {}", g.weight())));
            }
        }
        Ok(Substitution { images, powers: HashMap::new() })
    }

    fn power(&mut self, g: Generator, e: u32, cap: u32) -> Result<GradedPoly> {
        if let Some(p) = self.powers.get(&(g, e)) {
            return Ok(p.clone());
        }
        let img = self.images.get(&g).ok_or_else(|| Error::domain(format!("no image for generator {g}")))?;
        let p = if e == 1 { img.clone() } else { self.power(g, e - 1, cap)?.mul_capped(img, Some(cap)) };
        self.powers.insert((g, e), p.clone());
        Ok(p)
    }

    pub fn apply(&mut self, p: &GradedPoly, weight_cap: u32) -> Result<GradedPoly> {
        let mut out = GradedPoly::zero();
        for (m, c) in p.terms() {
            if m.weight() > weight_cap {
                continue;
            }
            let mut acc = GradedPoly::constant(c.clone());
            for &(g, e) in m.factors() {
                let pw = self.power(g, e, weight_cap)?;
                acc = acc.mul_capped(&pw, Some(weight_cap));
            }
            out += &acc;
        }
        Ok(out)
    }
}

impl<'a> Add<&'a GradedPoly> for &'a GradedPoly {
    type Output = GradedPoly;
    fn add(self, rhs: &GradedPoly) -> GradedPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> Sub<&'a GradedPoly> for &'a GradedPoly {
    type Output = GradedPoly;
    fn sub(self, rhs: &GradedPoly) -> GradedPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<'a> Mul<&'a GradedPoly> for &'a GradedPoly {
    type Output = GradedPoly;
    fn mul(self, rhs: &GradedPoly) -> GradedPoly {
        self.mul_capped(rhs, None)
    }
}

impl Neg for &GradedPoly {
    type Output = GradedPoly;
    fn neg(self) -> GradedPoly {
        GradedPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl AddAssign<&GradedPoly> for GradedPoly {
    fn add_assign(&mut self, rhs: &GradedPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&GradedPoly> for GradedPoly {
    fn sub_assign(&mut self, rhs: &GradedPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl From<Rat> for GradedPoly {
    fn from(c: Rat) -> Self {
        GradedPoly::constant(c)
    }
}

/// Canonical text form: terms in `(weight, monomial)` order, each written
/// `num/den * CP1^a*CP2^b`, signs folded into the separators.
impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            write!(f, "{}", c.abs())?;
            if !m.is_one() {
                write!(f, " * {m}")?;
            }
        }
        Ok(())
    }
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, message: &str) -> Error {
        Error::Parse { offset: self.pos, message: message.to_string() }
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.s[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Result<&str> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits"))
    }

    fn generator(&mut self) -> Result<Generator> {
        let at = self.pos;
        let g = if self.eat("CP") {
            let n: u32 = self.digits()?.parse().map_err(|_| self.err("index too large"))?;
            Generator::cp(n)
        } else if self.eat("q") {
            let i: u8 = self.digits()?.parse().map_err(|_| self.err("index too large"))?;
            Generator::q(i)
        } else {
            return Err(self.err("expected generator"));
        };
        g.map_err(|e| Error::Parse { offset: at, message: e.to_string() })
    }
}

impl FromStr for GradedPoly {
    type Err = Error;

    /// Parses the canonical text form. Input that is not byte-identical to
    /// the canonical printing of its value is rejected.
    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor { s: s.as_bytes(), pos: 0 };
        let mut out = GradedPoly::zero();
        if s == "0" {
            return Ok(out);
        }
        let mut first = true;
        while cur.pos < cur.s.len() || first {
            let negative = if first {
                cur.eat("-")
            } else if cur.eat(" + ") {
                false
            } else if cur.eat(" - ") {
                true
            } else {
                return Err(cur.err("expected ' + ' or ' - '"));
            };
            first = false;
            let num: Rat = cur.digits()?.parse().map_err(|_| cur.err("bad numerator"))?;
            let c = if cur.eat("/") {
                let d: Rat = cur.digits()?.parse().map_err(|_| cur.err("bad denominator"))?;
                if d.is_zero() {
                    return Err(cur.err("zero denominator"));
                }
                num / d
            } else {
                num
            };
            let mut factors = Vec::new();
            if cur.eat(" * ") {
                loop {
                    let g = cur.generator()?;
                    let e = if cur.eat("^") { cur.digits()?.parse().map_err(|_| cur.err("bad exponent"))? } else { 1 };
                    factors.push((g, e));
                    if !cur.eat("*") {
                        break;
                    }
                }
            }
            out.add_term(Monomial::from_factors(factors), if negative { -c } else { c });
        }
        if out.to_string() != s {
            return Err(Error::Parse { offset: 0, message: format!("not in canonical form: {s:?}") });
        }
        Ok(out)
    }
}

/// Parameters `(r1, r0)` of the quadratic extension `τ² = r1·τ + r0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadParams {
    pub r1: GradedPoly,
    pub r0: GradedPoly,
}

/// An element `even + τ·odd` of the rank-2 extension, with `weight(τ) = 1`.
#[derive(Debug, Clone)]
pub struct QuadElem {
    pub even: GradedPoly,
    pub odd: GradedPoly,
    params: Arc<QuadParams>,
}

impl PartialEq for QuadElem {
    fn eq(&self, other: &Self) -> bool {
        self.even == other.even && self.odd == other.odd && self.same_ring(other)
    }
}

impl QuadElem {
    pub fn new(even: GradedPoly, odd: GradedPoly, params: Arc<QuadParams>) -> Self {
        QuadElem { even, odd, params }
    }

    pub fn from_even(even: GradedPoly, params: Arc<QuadParams>) -> Self {
        QuadElem::new(even, GradedPoly::zero(), params)
    }

    pub fn tau(params: Arc<QuadParams>) -> Self {
        QuadElem::new(GradedPoly::zero(), GradedPoly::one(), params)
    }

    pub fn params(&self) -> &Arc<QuadParams> {
        &self.params
    }

    pub fn same_ring(&self, other: &QuadElem) -> bool {
        Arc::ptr_eq(&self.params, &other.params) || *self.params == *other.params
    }

    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }

    pub fn add(&self, other: &QuadElem) -> QuadElem {
        QuadElem::new(&self.even + &other.even, &self.odd + &other.odd, self.params.clone())
    }

    pub fn sub(&self, other: &QuadElem) -> QuadElem {
        QuadElem::new(&self.even - &other.even, &self.odd - &other.odd, self.params.clone())
    }

    pub fn scale(&self, c: &Rat) -> QuadElem {
        QuadElem::new(self.even.scale(c), self.odd.scale(c), self.params.clone())
    }

    /// `(a + τb)(c + τd) = (ac + r0·bd) + τ(ad + bc + r1·bd)`.
    pub fn try_mul(&self, other: &QuadElem) -> Result<QuadElem> {
        if !self.same_ring(other) {
            return Err(Error::domain("QuadElem product over different (r1, r0)"));
        }
        let bd = &self.odd * &other.odd;
        let even = &(&self.even * &other.even) + &(&self.params.r0 * &bd);
        let odd = &(&(&self.even * &other.odd) + &(&self.odd * &other.even)) + &(&self.params.r1 * &bd);
        Ok(QuadElem::new(even, odd, self.params.clone()))
    }

    /// Weight of a homogeneous element: the even part has this weight and the
    /// odd part one less. `None` when zero or inhomogeneous.
    pub fn homogeneous_weight(&self) -> Option<u32> {
        match (self.even.homogeneous_weight(), self.odd.homogeneous_weight()) {
            (Some(w), None) if self.odd.is_zero() => Some(w),
            (None, Some(v)) if self.even.is_zero() => Some(v + 1),
            (Some(w), Some(v)) if w == v + 1 => Some(w),
            _ => None,
        }
    }

    pub fn is_homogeneous_of(&self, w: u32) -> bool {
        self.even.is_homogeneous_of(w) && (self.odd.is_zero() || (w >= 1 && self.odd.is_homogeneous_of(w - 1)))
    }
}

/// Free function form of [`QuadElem::try_mul`].
pub fn quad_mul(a: &QuadElem, b: &QuadElem) -> Result<QuadElem> {
    a.try_mul(b)
}
