//! Truncated power series in one and two variables over a coefficient ring.
//!
//! Series carry an optional grading tag `shift`: a tagged series has every
//! nonzero coefficient of `x^k` (or `x^i y^j`) homogeneous of weight
//! `k + shift` (or `i + j + shift`). Logarithm-type series have shift `-1`,
//! invariant-differential-type series shift `0`. Tags are propagated by the
//! operations that preserve them and can be re-checked at any time.

use std::fmt::Debug;

use num_traits::{One, Zero};

use crate::arith::{rat_int, Rat};
use crate::error::{Error, Result};
use crate::graded::{GradedPoly, QuadElem};

/// Ring operations needed by the series kernel.
pub trait Coefficient: Clone + Debug + PartialEq {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, c: &Rat) -> Self;
    /// Multiplicative inverse, when this element is a unit of the ring.
    fn inverse(&self) -> Option<Self>;
    /// Zero counts as homogeneous of every weight.
    fn is_homogeneous_of(&self, w: u32) -> bool;

    fn neg(&self) -> Self {
        self.scale(&-Rat::one())
    }
}

impl Coefficient for Rat {
    fn zero_like(&self) -> Self {
        Rat::zero()
    }
    fn one_like(&self) -> Self {
        Rat::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, c: &Rat) -> Self {
        self * c
    }
    fn inverse(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
    fn is_homogeneous_of(&self, w: u32) -> bool {
        w == 0 || Zero::is_zero(self)
    }
}

impl Coefficient for GradedPoly {
    fn zero_like(&self) -> Self {
        GradedPoly::zero()
    }
    fn one_like(&self) -> Self {
        GradedPoly::one()
    }
    fn is_zero(&self) -> bool {
        GradedPoly::is_zero(self)
    }
    fn is_one(&self) -> bool {
        GradedPoly::is_one(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, c: &Rat) -> Self {
        GradedPoly::scale(self, c)
    }
    fn inverse(&self) -> Option<Self> {
        let c = self.constant_term();
        (self.len() == 1 && !Zero::is_zero(&c)).then(|| GradedPoly::constant(c.recip()))
    }
    fn is_homogeneous_of(&self, w: u32) -> bool {
        GradedPoly::is_homogeneous_of(self, w)
    }
}

impl Coefficient for QuadElem {
    fn zero_like(&self) -> Self {
        QuadElem::new(GradedPoly::zero(), GradedPoly::zero(), self.params().clone())
    }
    fn one_like(&self) -> Self {
        QuadElem::from_even(GradedPoly::one(), self.params().clone())
    }
    fn is_zero(&self) -> bool {
        QuadElem::is_zero(self)
    }
    fn is_one(&self) -> bool {
        self.even.is_one() && self.odd.is_zero()
    }
    fn add(&self, other: &Self) -> Self {
        QuadElem::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        QuadElem::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("series coefficients share one quadratic extension")
    }
    fn scale(&self, c: &Rat) -> Self {
        QuadElem::scale(self, c)
    }
    fn inverse(&self) -> Option<Self> {
        if !self.odd.is_zero() {
            return None;
        }
        Coefficient::inverse(&self.even).map(|e| QuadElem::from_even(e, self.params().clone()))
    }
    fn is_homogeneous_of(&self, w: u32) -> bool {
        QuadElem::is_homogeneous_of(self, w)
    }
}

fn weight_ok<C: Coefficient>(c: &C, w: i64) -> bool {
    if w < 0 {
        c.is_zero()
    } else {
        c.is_homogeneous_of(w as u32)
    }
}

/// Truncated series `c_0 + c_1 x + ... + c_K x^K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series1<C> {
    coeffs: Vec<C>,
    grading: Option<i32>,
}

impl<C: Coefficient> Series1<C> {
    pub fn new(coeffs: Vec<C>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::domain("a series needs at least its constant term"));
        }
        Ok(Series1 { coeffs, grading: None })
    }

    pub fn zeros(order: usize, zero: &C) -> Self {
        Series1 { coeffs: vec![zero.zero_like(); order + 1], grading: None }
    }

    pub fn constant(order: usize, c: C) -> Self {
        let mut s = Series1::zeros(order, &c);
        s.coeffs[0] = c;
        s
    }

    /// The series `x`.
    pub fn variable(order: usize, one: &C) -> Self {
        let mut s = Series1::zeros(order, one);
        if order >= 1 {
            s.coeffs[1] = one.one_like();
        }
        s
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize) -> C) -> Self {
        Series1 { coeffs: (0..=order).map(f).collect(), grading: None }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &C {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    fn zero_elem(&self) -> C {
        self.coeffs[0].zero_like()
    }

    pub fn grading(&self) -> Option<i32> {
        self.grading
    }

    pub fn check_grading(&self, shift: i32) -> bool {
        self.coeffs.iter().enumerate().all(|(k, c)| weight_ok(c, k as i64 + shift as i64))
    }

    /// Attaches a grading tag after verifying it.
    pub fn with_grading(mut self, shift: i32) -> Result<Self> {
        if !self.check_grading(shift) {
            return Err(Error::domain(format!("series is not graded with shift {shift}")));
        }
        self.grading = Some(shift);
        Ok(self)
    }

    fn tagged(mut self, shift: Option<i32>) -> Self {
        debug_assert!(shift.is_none_or(|s| self.check_grading(s)), "grading tag {shift:?} violated");
        self.grading = shift;
        self
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        Series1 { coeffs: self.coeffs[..=n].to_vec(), grading: self.grading }
    }

    fn same_tag(&self, other: &Self) -> Option<i32> {
        (self.grading == other.grading).then_some(self.grading).flatten()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Series1::from_fn(n, |k| self.coeffs[k].add(&other.coeffs[k])).tagged(self.same_tag(other))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Series1::from_fn(n, |k| self.coeffs[k].sub(&other.coeffs[k])).tagged(self.same_tag(other))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Series1::from_fn(self.order(), |k| self.coeffs[k].scale(c)).tagged(self.grading)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rat::one())
    }

    /// Multiplies every coefficient by a ring element.
    pub fn scale_by(&self, c: &C) -> Self {
        Series1::from_fn(self.order(), |k| c.mul(&self.coeffs[k]))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut out = Series1::zeros(n, &self.zero_elem());
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    out.coeffs[i + j] = out.coeffs[i + j].add(&a.mul(b));
                }
            }
        }
        let tag = self.grading.zip(other.grading).map(|(a, b)| a + b);
        out.tagged(tag)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Series1::constant(self.order(), self.coeffs[0].one_like());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// `self ∘ inner`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::domain("composition with a series whose constant term is nonzero"));
        }
        let n = self.order().min(inner.order());
        let inner = inner.truncate(n);
        let mut acc = Series1::constant(n, self.coeffs[n].clone());
        for k in (0..n).rev() {
            acc = acc.mul(&inner);
            acc.coeffs[0] = acc.coeffs[0].add(&self.coeffs[k]);
        }
        let tag = if inner.grading == Some(-1) { self.grading } else { None };
        Ok(acc.tagged(tag))
    }

    /// Compositional inverse of `u·x + O(x²)` with `u` a unit, by Lagrange
    /// inversion: `[x^k] g = (1/k) [x^(k-1)] (x / self)^k`.
    pub fn revert(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::domain("reversion needs a zero constant term"));
        }
        let n = self.order();
        if n == 0 {
            return Err(Error::domain("reversion needs order at least 1"));
        }
        if self.coeffs[1].inverse().is_none() {
            return Err(Error::domain("reversion needs a unit linear coefficient"));
        }
        let mut g = Series1::zeros(n, &self.zero_elem());
        let h = Series1::from_fn(n - 1, |k| self.coeffs[k + 1].clone()).reciprocal()?;
        let mut power = h.clone();
        for k in 1..=n {
            g.coeffs[k] = power.coeffs[k - 1].scale(&Rat::new(1.into(), (k as i64).into()));
            if k < n {
                power = power.mul(&h);
            }
        }
        let tag = if self.grading == Some(-1) { Some(-1) } else { None };
        Ok(g.tagged(tag))
    }

    /// `self^e` by the binomial series; requires constant term 1.
    pub fn binomial_pow(&self, e: &Rat) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return Err(Error::domain("binomial power needs constant term 1"));
        }
        let n = self.order();
        let mut t = self.clone();
        t.coeffs[0] = self.zero_elem();
        t.grading = None;
        // Σ_k binom(e, k) t^k, Horner from the top
        let mut binoms = vec![Rat::one()];
        for k in 1..=n {
            let prev = binoms[k - 1].clone();
            binoms.push(prev * (e - rat_int(k as i64 - 1)) / rat_int(k as i64));
        }
        let one = self.coeffs[0].one_like();
        let mut acc = Series1::constant(n, one.scale(&binoms[n]));
        for k in (0..n).rev() {
            acc = acc.mul(&t);
            acc.coeffs[0] = acc.coeffs[0].add(&one.scale(&binoms[k]));
        }
        let tag = if self.grading == Some(0) { Some(0) } else { None };
        Ok(acc.tagged(tag))
    }

    pub fn derive(&self) -> Self {
        let n = self.order();
        if n == 0 {
            return Series1::zeros(0, &self.zero_elem());
        }
        Series1::from_fn(n - 1, |k| self.coeffs[k + 1].scale(&rat_int(k as i64 + 1)))
            .tagged(self.grading.map(|s| s + 1))
    }

    /// Antiderivative with zero constant term: `x^k ↦ x^(k+1)/(k+1)`.
    pub fn integrate(&self) -> Self {
        let n = self.order() + 1;
        let zero = self.zero_elem();
        Series1::from_fn(n, |k| {
            if k == 0 {
                zero.clone()
            } else {
                self.coeffs[k - 1].scale(&Rat::new(1.into(), (k as i64).into()))
            }
        })
        .tagged(self.grading.map(|s| s - 1))
    }

    pub fn reciprocal(&self) -> Result<Self> {
        let inv0 = self.coeffs[0]
            .inverse()
            .ok_or_else(|| Error::domain("reciprocal of a series with non-unit constant term"))?;
        let n = self.order();
        let mut out = Series1::zeros(n, &self.zero_elem());
        out.coeffs[0] = inv0.clone();
        for k in 1..=n {
            let mut acc = self.zero_elem();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() && !out.coeffs[k - j].is_zero() {
                    acc = acc.add(&self.coeffs[j].mul(&out.coeffs[k - j]));
                }
            }
            out.coeffs[k] = acc.mul(&inv0).neg();
        }
        let tag = if self.grading == Some(0) { Some(0) } else { None };
        Ok(out.tagged(tag))
    }

    pub fn map<D: Coefficient>(&self, f: impl FnMut(&C) -> D) -> Series1<D> {
        Series1 { coeffs: self.coeffs.iter().map(f).collect(), grading: None }
    }

    pub fn try_map<D: Coefficient>(&self, f: impl FnMut(&C) -> Result<D>) -> Result<Series1<D>> {
        Ok(Series1 { coeffs: self.coeffs.iter().map(f).collect::<Result<_>>()?, grading: None })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Coefficient::is_zero)
    }

    /// Index of the first nonzero coefficient.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }
}

/// Truncated series `Σ c_ij x^i y^j` over `i + j <= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series2<C> {
    bound: usize,
    rows: Vec<Vec<C>>,
    grading: Option<i32>,
}

impl<C: Coefficient> Series2<C> {
    pub fn zeros(bound: usize, zero: &C) -> Self {
        let rows = (0..=bound).map(|i| vec![zero.zero_like(); bound - i + 1]).collect();
        Series2 { bound, rows, grading: None }
    }

    pub fn from_fn(bound: usize, mut f: impl FnMut(usize, usize) -> C) -> Self {
        let rows = (0..=bound).map(|i| (0..=bound - i).map(|j| f(i, j)).collect()).collect();
        Series2 { bound, rows, grading: None }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// Coefficient of `x^i y^j`; panics outside the stored triangle.
    pub fn coeff(&self, i: usize, j: usize) -> &C {
        &self.rows[i][j]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&C> {
        self.rows.get(i).and_then(|r| r.get(j))
    }

    pub fn set(&mut self, i: usize, j: usize, c: C) {
        self.rows[i][j] = c;
    }

    fn zero_elem(&self) -> C {
        self.rows[0][0].zero_like()
    }

    pub fn grading(&self) -> Option<i32> {
        self.grading
    }

    pub fn check_grading(&self, shift: i32) -> bool {
        self.iter().all(|(i, j, c)| weight_ok(c, (i + j) as i64 + shift as i64))
    }

    pub fn with_grading(mut self, shift: i32) -> Result<Self> {
        if !self.check_grading(shift) {
            return Err(Error::domain(format!("bivariate series is not graded with shift {shift}")));
        }
        self.grading = Some(shift);
        Ok(self)
    }

    fn tagged(mut self, shift: Option<i32>) -> Self {
        debug_assert!(shift.is_none_or(|s| self.check_grading(s)), "grading tag {shift:?} violated");
        self.grading = shift;
        self
    }

    /// All stored `(i, j, c_ij)`, row by row.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &C)> {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().enumerate().map(move |(j, c)| (i, j, c)))
    }

    pub fn map<D: Coefficient>(&self, mut f: impl FnMut(&C) -> D) -> Series2<D> {
        Series2::from_fn(self.bound, |i, j| f(&self.rows[i][j]))
    }

    pub fn truncate(&self, bound: usize) -> Self {
        let b = bound.min(self.bound);
        Series2::from_fn(b, |i, j| self.rows[i][j].clone()).tagged(self.grading)
    }

    /// `s(x)` viewed as a bivariate series.
    pub fn from_x(s: &Series1<C>, bound: usize) -> Self {
        let b = bound.min(s.order());
        let zero = s.coeff(0).zero_like();
        Series2::from_fn(b, |i, j| if j == 0 { s.coeff(i).clone() } else { zero.clone() })
    }

    pub fn from_y(s: &Series1<C>, bound: usize) -> Self {
        Series2::from_x(s, bound).transpose()
    }

    pub fn transpose(&self) -> Self {
        Series2::from_fn(self.bound, |i, j| self.rows[j][i].clone()).tagged(self.grading)
    }

    pub fn add(&self, other: &Self) -> Self {
        let b = self.bound.min(other.bound);
        let tag = (self.grading == other.grading).then_some(self.grading).flatten();
        Series2::from_fn(b, |i, j| self.rows[i][j].add(&other.rows[i][j])).tagged(tag)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let b = self.bound.min(other.bound);
        let tag = (self.grading == other.grading).then_some(self.grading).flatten();
        Series2::from_fn(b, |i, j| self.rows[i][j].sub(&other.rows[i][j])).tagged(tag)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Series2::from_fn(self.bound, |i, j| self.rows[i][j].scale(c)).tagged(self.grading)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let b = self.bound.min(other.bound);
        let mut out = Series2::zeros(b, &self.zero_elem());
        for (i1, j1, a) in self.iter() {
            if a.is_zero() || i1 + j1 > b {
                continue;
            }
            for i2 in 0..=b - i1 - j1 {
                for j2 in 0..=b - i1 - j1 - i2 {
                    let c = &other.rows[i2][j2];
                    if !c.is_zero() {
                        let slot = &mut out.rows[i1 + i2][j1 + j2];
                        *slot = slot.add(&a.mul(c));
                    }
                }
            }
        }
        let tag = self.grading.zip(other.grading).map(|(a, b)| a + b);
        out.tagged(tag)
    }

    /// `G(s(u), y)`; `s` must have zero constant term.
    pub fn substitute_x(&self, s: &Series1<C>) -> Result<Self> {
        if !s.coeff(0).is_zero() {
            return Err(Error::domain("substituting a series with nonzero constant term"));
        }
        let b = self.bound.min(s.order());
        let s = s.truncate(b);
        let mut powers = vec![Series1::constant(b, s.coeff(0).one_like())];
        for i in 1..=b {
            powers.push(powers[i - 1].mul(&s));
        }
        let mut out = Series2::zeros(b, &self.zero_elem());
        for k in 0..=b {
            for j in 0..=b - k {
                let mut acc = self.zero_elem();
                for (i, pw) in powers.iter().enumerate().take(k + 1) {
                    let (c, p) = (&self.rows[i][j], pw.coeff(k));
                    if !c.is_zero() && !p.is_zero() {
                        acc = acc.add(&p.mul(c));
                    }
                }
                out.rows[k][j] = acc;
            }
        }
        let tag = if s.grading() == Some(-1) { self.grading } else { None };
        Ok(out.tagged(tag))
    }

    /// `G(x, s(v))`.
    pub fn substitute_y(&self, s: &Series1<C>) -> Result<Self> {
        Ok(self.transpose().substitute_x(s)?.transpose())
    }

    /// The univariate series `G(u, u)`.
    pub fn diagonal(&self) -> Series1<C> {
        let zero = self.zero_elem();
        Series1::from_fn(self.bound, |n| (0..=n).fold(zero.clone(), |acc, i| acc.add(&self.rows[i][n - i])))
    }

    pub fn is_zero(&self) -> bool {
        self.iter().all(|(_, _, c)| c.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(i, j, c)| *c == self.rows[j][i])
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.iter().all(|(i, j, c)| c.add(&self.rows[j][i]).is_zero())
    }

    /// First `(i, j)` in row order whose coefficient is nonzero.
    pub fn first_nonzero(&self) -> Option<(usize, usize)> {
        self.iter().find(|(_, _, c)| !c.is_zero()).map(|(i, j, _)| (i, j))
    }
}

/// `a(G(x, y))` for a univariate `a`; `G` must have zero constant term.
pub fn compose_outer<C: Coefficient>(a: &Series1<C>, g: &Series2<C>) -> Result<Series2<C>> {
    if !g.coeff(0, 0).is_zero() {
        return Err(Error::domain("outer composition with a bivariate series whose constant term is nonzero"));
    }
    let b = g.bound().min(a.order());
    let g = g.truncate(b);
    let mut acc = Series2::zeros(b, &g.zero_elem());
    acc.set(0, 0, a.coeff(b).clone());
    for k in (0..b).rev() {
        acc = acc.mul(&g);
        let c0 = acc.coeff(0, 0).add(a.coeff(k));
        acc.set(0, 0, c0);
    }
    let tag = if g.grading() == Some(-1) { a.grading() } else { None };
    Ok(acc.tagged(tag))
}

/// `a(s(x) + s(y))` without forming the bivariate powers: with `P_k = s^k`,
/// the `x^i y^j` coefficient is `Σ_k P_k[i] Σ_l C(k+l, k) a_(k+l) P_l[j]`.
pub fn compose_sum<C: Coefficient>(a: &Series1<C>, s: &Series1<C>, bound: usize) -> Result<Series2<C>> {
    if !s.coeff(0).is_zero() {
        return Err(Error::domain("composition with a series whose constant term is nonzero"));
    }
    let b = bound.min(a.order()).min(s.order());
    let s = s.truncate(b);
    let mut powers = vec![Series1::constant(b, s.coeff(0).one_like())];
    for k in 1..=b {
        powers.push(powers[k - 1].mul(&s));
    }
    let zero = s.zero_elem();
    // q[k][j] = Σ_l C(k+l, k) a_(k+l) P_l[j]
    let mut q = vec![vec![zero.clone(); b + 1]; b + 1];
    for (k, row) in q.iter_mut().enumerate() {
        for (l, pl) in powers.iter().enumerate().take(b - k + 1) {
            let c = a.coeff(k + l);
            if c.is_zero() {
                continue;
            }
            let c = c.scale(&rat_int(crate::arith::binom((k + l) as i64, k as i64)));
            for (slot, p) in row.iter_mut().zip(pl.coeffs()).take(b - k + 1).skip(l) {
                if !p.is_zero() {
                    *slot = slot.add(&c.mul(p));
                }
            }
        }
    }
    let mut out = Series2::zeros(b, &zero);
    for i in 0..=b {
        for j in 0..=b - i {
            let mut acc = zero.clone();
            for (k, qk) in q.iter().enumerate().take(i + 1) {
                let (p, r) = (powers[k].coeff(i), &qk[j]);
                if !p.is_zero() && !r.is_zero() {
                    acc = acc.add(&p.mul(r));
                }
            }
            out.rows[i][j] = acc;
        }
    }
    let tag = if s.grading() == Some(-1) { a.grading() } else { None };
    Ok(out.tagged(tag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn s(v: &[i64]) -> Series1<Rat> {
        Series1::new(v.iter().map(|&x| rat_int(x)).collect()).unwrap()
    }

    #[test]
    fn mul_and_compose_examples() {
        let x = s(&[0, 1, 0, 0, 0]);
        let t = s(&[0, 2, -1, 3, 5]);
        assert_eq!(x.compose(&t).unwrap(), t);
        assert_eq!(s(&[1, 1, 0, 0]).mul(&s(&[1, -1, 0, 0])), s(&[1, 0, -1, 0]));
        assert_eq!(s(&[0, 0, 1, 0, 0]).compose(&s(&[0, 1, 1, 0, 0])).unwrap(), s(&[0, 0, 1, 2, 1]));
        assert!(x.compose(&s(&[1, 1, 0, 0, 0])).is_err());
    }

    /// Lagrange inversion: `[x^n] g = (1/n) [t^(n-1)] (t / s(t))^n`.
    /// Term-by-term reversion: the `x^k` coefficient of `f ∘ g` must vanish.
    fn compose_revert(ser: &Series1<Rat>) -> Series1<Rat> {
        let n = ser.order();
        let u_inv = ser.coeff(1).recip();
        let mut g = Series1::zeros(n, &rat_int(0));
        g.coeffs[1] = u_inv.clone();
        for k in 2..=n {
            let partial = ser.truncate(k).compose(&g.truncate(k)).unwrap();
            g.coeffs[k] = -(partial.coeffs[k].clone() * &u_inv);
        }
        g
    }

    #[test]
    fn revert_examples() {
        let x = s(&[0, 1, 0, 0, 0]);
        assert_eq!(x.revert().unwrap(), x);
        let catalan = s(&[0, 1, -1, 0, 0]).revert().unwrap();
        assert_eq!(catalan, s(&[0, 1, 1, 2, 5]));
        assert_eq!(compose_revert(&s(&[0, 1, -1, 0, 0])), catalan);
        let odd = s(&[0, 3, 1, -2, 7, 1]);
        assert_eq!(odd.revert().unwrap(), compose_revert(&odd));
        assert!(s(&[0, 0, 1]).revert().is_err());
    }

    #[test]
    fn binomial_pow_examples() {
        let r = s(&[1, 1, 0, 0]).binomial_pow(&rat(-1, 2)).unwrap();
        assert_eq!(r.coeffs(), &[rat(1, 1), rat(-1, 2), rat(3, 8), rat(-5, 16)]);
        let q = s(&[1, 4, -2, 9]);
        assert_eq!(q.binomial_pow(&rat(0, 1)).unwrap(), s(&[1, 0, 0, 0]));
        let h = q.binomial_pow(&rat(1, 2)).unwrap();
        assert_eq!(h.mul(&h), q);
        assert!(s(&[2, 1]).binomial_pow(&rat(1, 2)).is_err());
    }

    #[test]
    fn calculus_examples() {
        assert_eq!(s(&[0, 0, 0, 1]).derive(), s(&[0, 0, 3]));
        let i = Series1::new(vec![rat(1, 1), rat(-1, 2)]).unwrap().integrate();
        assert_eq!(i.coeffs(), &[rat(0, 1), rat(1, 1), rat(-1, 4)]);
        let cp1 = GradedPoly::cp(1);
        let one_plus = Series1::new(vec![GradedPoly::one(), cp1.clone(), GradedPoly::zero()]).unwrap();
        let r = one_plus.reciprocal().unwrap();
        assert_eq!(r.coeffs(), &[GradedPoly::one(), -&cp1, &cp1 * &cp1]);
        assert!(s(&[0, 1]).reciprocal().is_err());
    }

    #[test]
    fn grading_tags_are_checked() {
        let cp1 = GradedPoly::cp(1);
        let good = Series1::new(vec![GradedPoly::zero(), GradedPoly::one(), cp1.clone()]).unwrap();
        assert!(good.clone().with_grading(-1).is_ok());
        assert!(good.with_grading(0).is_err());
    }

    #[test]
    fn sum_composition_matches_outer() {
        let a = s(&[3, 1, -2, 5, 7, -1, 4]);
        let l = s(&[0, 2, 1, -3, 0, 6, 1]);
        let g = Series2::from_x(&l, 6).add(&Series2::from_y(&l, 6));
        assert_eq!(compose_sum(&a, &l, 6).unwrap(), compose_outer(&a, &g).unwrap());
        assert!(compose_sum(&a, &a, 6).is_err());
    }

    #[test]
    fn bivariate_substitution_and_outer_compose() {
        // G(x, y) = x + y, a(z) = z^2 -> x^2 + 2xy + y^2
        let one = rat_int(1);
        let g = Series2::from_fn(3, |i, j| if i + j == 1 { one.clone() } else { rat_int(0) });
        let sq = s(&[0, 0, 1, 0]);
        let out = compose_outer(&sq, &g).unwrap();
        assert_eq!(*out.coeff(1, 1), rat_int(2));
        assert_eq!(*out.coeff(2, 0), rat_int(1));
        assert!(out.is_symmetric());
        // substitute x -> x + x^2 into x + y
        let sub = g.substitute_x(&s(&[0, 1, 1, 0])).unwrap();
        assert_eq!(*sub.coeff(2, 0), rat_int(1));
        assert_eq!(*sub.coeff(0, 1), rat_int(1));
        assert!(!sub.is_symmetric());
        assert_eq!(sub.diagonal(), s(&[0, 2, 1, 0]));
    }
}
