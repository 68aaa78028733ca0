//! Chern numbers of products of projective spaces, SU checks, W-theory
//! coefficients over the quadratic extension `Γ` and the SU generators built
//! from them.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::arith::{binom, dyadic_split, ext_gcd_vector, gcd_all, prime_power_base, rat, rat_int, BigInt, Rat};
use crate::combinat::{d, novikov_admissible, s_number, NovikovVerdict};
use crate::error::{Error, Result};
use crate::fgl::{formal_inverse, FglTable};
use crate::graded::{Generator, GradedPoly, Monomial, QuadElem, QuadParams};
use crate::report::{Check, Report};
use crate::series::{compose_sum, Series1, Series2};

/// Default largest weight for which `su_check` enumerates partitions.
pub const DEFAULT_PARTITION_CAP: u32 = 10;

/// A partition stored in descending order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::domain("partition parts must be positive and nonempty"));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition(parts))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn contains_one(&self) -> bool {
        self.0.last() == Some(&1)
    }

    /// Chern monomial label in ascending order, e.g. `c1c1c2`.
    pub fn label(&self) -> String {
        self.0.iter().rev().map(|p| format!("c{p}")).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = Vec::new();
        let mut offset = 0;
        for piece in s.split(',') {
            let t = piece.trim();
            let v: u32 = t
                .parse()
                .map_err(|_| Error::Parse { offset, message: format!("expected a positive integer, found {t:?}") })?;
            parts.push(v);
            offset += piece.len() + 1;
        }
        Partition::new(parts)
    }
}

/// All partitions of `n` in descending lexicographic order.
pub fn partitions(n: u32) -> Vec<Partition> {
    fn go(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(n, n, &mut Vec::new(), &mut out);
    }
    out
}

/// `Q[x_1..x_r] / (x_j^(n_j + 1))` stored densely.
struct TruncRing {
    dims: Vec<u32>,
    exps: Vec<Vec<u32>>,
    strides: Vec<usize>,
    top: usize,
}

impl TruncRing {
    fn new(dims: Vec<u32>) -> Self {
        let mut strides = Vec::with_capacity(dims.len());
        let mut size = 1usize;
        for &n in &dims {
            strides.push(size);
            size *= n as usize + 1;
        }
        let exps = (0..size)
            .map(|idx| dims.iter().zip(&strides).map(|(&n, &s)| ((idx / s) % (n as usize + 1)) as u32).collect())
            .collect();
        TruncRing { top: size - 1, dims, exps, strides }
    }

    fn size(&self) -> usize {
        self.top + 1
    }

    fn degree(&self, idx: usize) -> u32 {
        self.exps[idx].iter().sum()
    }

    fn mul(&self, a: &[i128], b: &[i128]) -> Vec<i128> {
        let mut out = vec![0i128; self.size()];
        for (ia, &ca) in a.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            'inner: for (ib, &cb) in b.iter().enumerate() {
                if cb == 0 {
                    continue;
                }
                let mut idx = 0;
                for (j, (&ea, &eb)) in self.exps[ia].iter().zip(&self.exps[ib]).enumerate() {
                    let e = ea + eb;
                    if e > self.dims[j] {
                        continue 'inner;
                    }
                    idx += e as usize * self.strides[j];
                }
                out[idx] += ca * cb;
            }
        }
        out
    }

    /// Homogeneous components `c_0..c_n` of `Π (1 + x_j)^(n_j + 1)`.
    fn chern_classes(&self) -> Vec<Vec<i128>> {
        let mut total = vec![0i128; self.size()];
        total[0] = 1;
        for (j, &n) in self.dims.iter().enumerate() {
            let mut factor = vec![0i128; self.size()];
            for e in 0..=n {
                factor[e as usize * self.strides[j]] =
                    binom(i64::from(n) + 1, i64::from(e)).try_into().expect("small binomial");
            }
            total = self.mul(&total, &factor);
        }
        let n: u32 = self.dims.iter().sum();
        (0..=n)
            .map(|k| total.iter().enumerate().map(|(idx, &c)| if self.degree(idx) == k { c } else { 0 }).collect())
            .collect()
    }
}

fn monomial_dims(m: &Monomial) -> Vec<u32> {
    let mut dims = Vec::new();
    for &(g, e) in m.factors() {
        match g {
            Generator::Cp(n) => dims.extend(std::iter::repeat_n(n, e as usize)),
            Generator::Q(_) => {}
        }
    }
    dims
}

fn require_cp_only(m: &GradedPoly) -> Result<()> {
    if m.generators().iter().any(|g| matches!(g, Generator::Q(_))) {
        return Err(Error::domain("manifold expressions may only contain CP generators"));
    }
    Ok(())
}

/// Chern number `c_w[CP_{n_1} × ... × CP_{n_r}]`.
fn product_chern_number(dims: Vec<u32>, w: &Partition) -> i128 {
    if dims.is_empty() {
        return 0;
    }
    let ring = TruncRing::new(dims);
    let classes = ring.chern_classes();
    let mut acc = classes[w.parts()[0] as usize].clone();
    for &p in &w.parts()[1..] {
        acc = ring.mul(&acc, &classes[p as usize]);
    }
    acc[ring.top]
}

/// Chern number `c_w[M]` extended linearly over the monomials of `M`.
pub fn chern_number(m: &GradedPoly, w: &Partition) -> Result<Rat> {
    require_cp_only(m)?;
    let n = w.weight();
    if !m.is_homogeneous_of(n) {
        return Err(Error::domain(format!("Chern number {} needs a class of weight {n}", w.label())));
    }
    let mut acc = Rat::zero();
    for (mono, c) in m.terms() {
        acc += c * rat_int(product_chern_number(monomial_dims(mono), w));
    }
    Ok(acc)
}

/// Chern numbers of `M` for every partition in `ws`, sharing the Chern classes per monomial.
pub fn chern_numbers(m: &GradedPoly, ws: &[Partition]) -> Result<Vec<Rat>> {
    require_cp_only(m)?;
    let mut out = vec![Rat::zero(); ws.len()];
    for w in ws {
        if !m.is_homogeneous_of(w.weight()) {
            return Err(Error::domain(format!("Chern number {} needs a class of weight {}", w.label(), w.weight())));
        }
    }
    for (mono, c) in m.terms() {
        let ring = TruncRing::new(monomial_dims(mono));
        let classes = ring.chern_classes();
        for (slot, w) in out.iter_mut().zip(ws) {
            let mut acc = classes[w.parts()[0] as usize].clone();
            for &p in &w.parts()[1..] {
                acc = ring.mul(&acc, &classes[p as usize]);
            }
            *slot += c * rat_int(acc[ring.top]);
        }
    }
    Ok(out)
}

/// Power-sum Chern number `Σ x_j^n` over the Chern roots.
pub fn s_number_manifold(m: &GradedPoly) -> Result<Rat> {
    require_cp_only(m)?;
    let n = match m.homogeneous_weight() {
        Some(n) => n,
        None if m.is_zero() => return Ok(Rat::zero()),
        None => return Err(Error::domain("s-number of an inhomogeneous class")),
    };
    let mut acc = Rat::zero();
    for (mono, c) in m.terms() {
        let ring = TruncRing::new(monomial_dims(mono));
        let mut p = vec![0i128; ring.size()];
        for (j, &nj) in ring.dims.iter().enumerate() {
            if n <= nj {
                p[n as usize * ring.strides[j]] += i128::from(nj) + 1;
            }
        }
        acc += c * rat_int(p[ring.top]);
    }
    Ok(acc)
}

/// The power sum `p_n` as a polynomial in the elementary symmetric functions,
/// keyed by partitions.
pub fn newton_power_sum(n: u32) -> Vec<(Partition, BigInt)> {
    // p_k = (-1)^(k-1) k e_k + Σ_{i=1}^{k-1} (-1)^(k-1+i) e_{k-i} p_i
    let mut ps: Vec<HashMap<Vec<u32>, BigInt>> = vec![HashMap::new()];
    for k in 1..=n {
        let mut pk: HashMap<Vec<u32>, BigInt> = HashMap::new();
        let sign = |e: u32| if e.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
        *pk.entry(vec![k]).or_default() += sign(k - 1) * BigInt::from(k);
        for i in 1..k {
            for (parts, c) in &ps[i as usize] {
                let mut key = parts.clone();
                key.push(k - i);
                key.sort_unstable_by(|a, b| b.cmp(a));
                *pk.entry(key).or_default() += sign(k - 1 + i) * c;
            }
        }
        pk.retain(|_, c| !c.is_zero());
        ps.push(pk);
    }
    let mut out: Vec<(Partition, BigInt)> = ps.pop().unwrap().into_iter().map(|(k, c)| (Partition(k), c)).collect();
    out.sort();
    out
}

/// Checks that the Newton expansion of `p_n` in Chern numbers, the power-sum
/// computation and `(n+1)[CP_n]` all agree on `m`.
pub fn newton_check(m: &GradedPoly) -> Result<Check> {
    let n = m.homogeneous_weight().ok_or_else(|| Error::domain("Newton check of an inhomogeneous or zero class"))?;
    let expansion = newton_power_sum(n);
    let ws: Vec<Partition> = expansion.iter().map(|(w, _)| w.clone()).collect();
    let nums = chern_numbers(m, &ws)?;
    let via_newton: Rat = expansion.iter().zip(&nums).map(|((_, c), v)| Rat::from_integer(c.clone()) * v).sum();
    let direct = s_number_manifold(m)?;
    let algebraic = s_number(m, n)?;
    let ok = via_newton == direct && direct == algebraic;
    Ok(Check::new(
        format!("s_{n} three ways"),
        ok,
        format!("newton {via_newton}, power sum {direct}, coefficient {algebraic}"),
    ))
}

/// Evaluates every Chern number of `m` whose partition contains a 1.
pub fn su_check(m: &GradedPoly, cap: u32) -> Result<Report> {
    let n = match m.homogeneous_weight() {
        Some(n) => n,
        None if m.is_zero() => return Ok(Report::new("SU check of 0")),
        None => return Err(Error::domain("SU check of an inhomogeneous class")),
    };
    if n > cap {
        return Err(Error::domain(format!("weight {n} exceeds the partition cap {cap}")));
    }
    let ws: Vec<Partition> = partitions(n).into_iter().filter(Partition::contains_one).collect();
    let nums = chern_numbers(m, &ws)?;
    let mut report = Report::new(format!("Chern numbers with a c1 factor in weight {n}"));
    for (w, v) in ws.iter().zip(nums) {
        report.push(Check::new(w.label(), v.is_zero(), v.to_string()));
    }
    Ok(report)
}

/// The weight 2, 3 and 4 generators of `MSU_*[1/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowGenerators {
    pub x2: GradedPoly,
    pub x3: GradedPoly,
    pub x4: GradedPoly,
    /// `-α_23 - (3/2) x3 CP_1` with the computed `α_23`.
    pub x4_literal: GradedPoly,
    /// Comparison of the computed coefficients with the reference expressions.
    pub report: Report,
}

fn cp_poly(terms: &[(Rat, &[(u32, u32)])]) -> GradedPoly {
    let mut out = GradedPoly::zero();
    for (c, fs) in terms {
        out += &GradedPoly::term(Monomial::from_factors(fs.iter().map(|&(n, e)| (Generator::Cp(n), e))), c.clone());
    }
    out
}

/// `2α_22 = -3CP_3 + 8CP_1CP_2 - 5CP_1³`.
pub fn reference_alpha22() -> GradedPoly {
    cp_poly(&[(rat(-3, 2), &[(3, 1)]), (rat_int(4), &[(1, 1), (2, 1)]), (rat(-5, 2), &[(1, 3)])])
}

/// `2CP_1⁴ - 7CP_1²CP_2 + 3CP_2² + 4CP_1CP_3 - 2CP_4`, the reference expression for `α_23`.
/// Adding `CP_1 α_22` to the computed coefficient gives this expression.
pub fn reference_alpha23() -> GradedPoly {
    cp_poly(&[
        (rat_int(2), &[(1, 4)]),
        (rat_int(-7), &[(1, 2), (2, 1)]),
        (rat_int(3), &[(2, 2)]),
        (rat_int(4), &[(1, 1), (3, 1)]),
        (rat_int(-2), &[(4, 1)]),
    ])
}

pub fn build_x234(f: &FglTable) -> Result<LowGenerators> {
    if f.max_degree() < 4 {
        return Err(Error::domain("the weight 4 generator needs a table to weight 4"));
    }
    let cp1 = GradedPoly::cp(1);
    let a22 = f.alpha(2, 2).clone();
    let a23 = f.alpha(2, 3).clone();
    if a22 != reference_alpha22() {
        return Err(Error::Consistency(format!("alpha(2,2) = {a22} disagrees with the reference expression")));
    }
    let mut report = Report::new("low SU generators");
    report.push(Check::pass("alpha(2,2) matches reference", a22.to_string()));
    let r23 = reference_alpha23();
    if a23 != r23 {
        report.note(format!("alpha(2,3) = {a23} differs from the reference expression by {}", &a23 - &r23));
    }

    let x2 = &GradedPoly::cp(2) - &cp1.pow(2).scale(&rat(9, 8));
    let x3 = -&a22;
    let x3cp1 = &x3 * &cp1;
    // The reference polynomial for x4 equals -α_23 - (1/2) x3 CP_1 in computed coefficients.
    let x4 = &(-&a23) - &x3cp1.scale(&rat(1, 2));
    let x4_literal = &(-&a23) - &x3cp1.scale(&rat(3, 2));
    let x4_reference = &(-&r23) - &x3cp1.scale(&rat(3, 2));
    report.push(Check::new("x4 equals the reference polynomial", x4 == x4_reference, x4.to_string()));
    Ok(LowGenerators { x2, x3, x4, x4_literal, report })
}

/// The `Γ` parameters `τ² = α_11 τ + 2α_12`.
pub fn gamma_params(f: &FglTable) -> Arc<QuadParams> {
    Arc::new(QuadParams { r1: f.alpha(1, 1).clone(), r0: f.alpha(1, 2).scale(&rat_int(2)) })
}

/// `γ(u) = u + τ u ū + Σ_{i≥2} α_i1 u ū^i` over `Γ`.
pub fn gamma_series(f: &FglTable, params: &Arc<QuadParams>) -> Result<Series1<QuadElem>> {
    let order = f.max_degree() as usize + 1;
    let lift = |p: &GradedPoly| QuadElem::from_even(p.clone(), params.clone());
    let ubar = formal_inverse(f)?.truncate(order).map(lift);
    let u = Series1::variable(order, &lift(&GradedPoly::one()));
    let mut gamma = u.add(&u.mul(&ubar).scale_by(&QuadElem::tau(params.clone())));
    let mut power = ubar.clone();
    for i in 2..order {
        power = power.mul(&ubar);
        gamma = gamma.add(&u.mul(&power).scale_by(&lift(f.alpha(i, 1))));
    }
    gamma.with_grading(-1)
}

/// A class of `W` together with its boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WClass {
    pub cls: GradedPoly,
    pub bnd: GradedPoly,
}

impl WClass {
    pub fn new(cls: GradedPoly, bnd: GradedPoly) -> Self {
        WClass { cls, bnd }
    }

    pub fn unit() -> Self {
        WClass::new(GradedPoly::one(), GradedPoly::zero())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WCoefficient {
    pub i: usize,
    pub j: usize,
    pub cls: GradedPoly,
    pub bnd: GradedPoly,
}

#[derive(Debug, Clone)]
pub struct WTable {
    n: u32,
    params: Arc<QuadParams>,
    coeffs: Series2<QuadElem>,
}

impl WTable {
    pub fn max_degree(&self) -> u32 {
        self.n
    }

    pub fn params(&self) -> &Arc<QuadParams> {
        &self.params
    }

    /// `(w_ij, ∂w_ij)`; panics if `i + j > N + 1`.
    pub fn w(&self, i: usize, j: usize) -> WCoefficient {
        let c = self.coeffs.coeff(i, j);
        WCoefficient { i, j, cls: c.even.clone(), bnd: c.odd.clone() }
    }

    pub fn series(&self) -> &Series2<QuadElem> {
        &self.coeffs
    }

    /// Coefficients with `i, j >= 1`, in row order.
    pub fn entries(&self) -> Vec<WCoefficient> {
        self.coeffs.iter().filter(|(i, j, _)| *i >= 1 && *j >= 1).map(|(i, j, _)| self.w(i, j)).collect()
    }
}

/// Coefficients of `γ(F(γ⁻¹u, γ⁻¹v))` split as `w_ij + τ ∂w_ij`.
///
/// Computed as `exp_W(log_W u + log_W v)` with `log_W = log ∘ γ⁻¹` and
/// `exp_W = γ ∘ exp`.
pub fn w_coefficients(f: &FglTable) -> Result<WTable> {
    let params = gamma_params(f);
    let gamma = gamma_series(f, &params)?;
    let lift = |p: &GradedPoly| QuadElem::from_even(p.clone(), params.clone());
    let order = gamma.order();
    let log_w = f.log().truncate(order).map(lift).compose(&gamma.revert()?)?;
    let exp_w = gamma.compose(&f.exp().truncate(order).map(lift))?;
    let coeffs = compose_sum(&exp_w, &log_w, order)?;
    if let Some((i, j, _)) = coeffs.iter().find(|(i, j, c)| i + j >= 1 && !c.is_homogeneous_of((i + j - 1) as u32)) {
        return Err(Error::Consistency(format!("W coefficient ({i},{j}) is not homogeneous of weight {}", i + j - 1)));
    }
    Ok(WTable { n: f.max_degree(), params, coeffs })
}

/// `a ∗ b = ab + 2α_12 ∂a ∂b` with `∂(a ∗ b) = a ∂b + ∂a b + α_11 ∂a ∂b`.
pub fn star_product(a: &WClass, b: &WClass, params: &QuadParams) -> WClass {
    let bb = &a.bnd * &b.bnd;
    WClass {
        cls: &(&a.cls * &b.cls) + &(&params.r0 * &bb),
        bnd: &(&(&a.cls * &b.bnd) + &(&a.bnd * &b.cls)) + &(&params.r1 * &bb),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BkEntry {
    pub k: u32,
    pub lambda: Vec<BigInt>,
    pub b: WClass,
    /// `∂(CP_1 ∗ b_k) = 2 b_k - CP_1 ∂b_k`.
    pub x: GradedPoly,
    pub s_b: Rat,
    pub s_x: Rat,
    /// `None` when `s_x` is zero.
    pub novikov: Option<NovikovVerdict>,
    /// `None` when the weight exceeds the partition cap.
    pub su: Option<Report>,
}

pub fn build_bk_xk(f: &FglTable, w: &WTable, cap: u32) -> Result<Vec<BkEntry>> {
    let cp1 = GradedPoly::cp(1);
    let mut out = Vec::new();
    for k in 2..=w.max_degree().min(f.max_degree()) {
        let n = i64::from(k) + 1;
        let values: Vec<BigInt> = (1..n).map(|i| binom(n, i)).collect();
        let cert = ext_gcd_vector(&values)?;
        let mut b = WClass::new(GradedPoly::zero(), GradedPoly::zero());
        for (idx, l) in cert.lambda.iter().enumerate() {
            if l.is_zero() {
                continue;
            }
            let i = idx + 1;
            let c = w.w(i, k as usize + 1 - i);
            let l = Rat::from_integer(l.clone());
            b.cls += &c.cls.scale(&l);
            b.bnd += &c.bnd.scale(&l);
        }
        let x = &b.cls.scale(&rat_int(2)) - &(&cp1 * &b.bnd);
        let s_b = s_number(&b.cls, k)?;
        let s_x = s_number(&x, k)?;
        let novikov = if s_x.is_zero() { None } else { Some(novikov_admissible(k, &s_x)?) };
        let su = if k <= cap { Some(su_check(&x, cap)?) } else { None };
        out.push(BkEntry { k, lambda: cert.lambda, b, x, s_b, s_x, novikov, su });
    }
    Ok(out)
}

/// `k` is a power of two with `k + 1` an odd prime power.
pub fn is_exceptional_weight(k: u32) -> bool {
    k >= 3 && k.is_power_of_two() && prime_power_base(u64::from(k) + 1).is_some_and(|p| p != 2)
}

/// The value `1 + (-1)^k (k+1) - s_k(w_k)` prescribed for the tuned orientation.
pub fn orientation_target(k: u32) -> Result<Rat> {
    if !is_exceptional_weight(k) {
        return Ok(Rat::from_integer(d(k - 1)?));
    }
    if k == 8 {
        return Ok(rat_int(4));
    }
    let l = k.trailing_zeros();
    if l.is_power_of_two() {
        Ok(-rat_int(i64::from(k)))
    } else {
        Err(Error::domain(format!("no orientation target for exceptional weight {k}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaRow {
    pub k: u32,
    pub exceptional: bool,
    pub s_wk: Rat,
    /// `(i, s_k(w_{i,k+1-i}), s_k(w)/s_k(α))` for `1 <= i <= k`.
    pub ratios: Vec<(u32, Rat, Rat)>,
    pub gcd: BigInt,
}

/// s-numbers of the tuned W coefficients from the formulas modulo decomposables
/// `w_1k = α_1k + (k+1)((-1)^k α_1k + w_k)` and
/// `w_ij = α_ij + (-1)^k C(k+1,i) α_1k + C(k+1,i) w_k`.
pub fn lemma_snumber_table(max_k: u32) -> Result<(Vec<LemmaRow>, Report)> {
    if max_k < 3 {
        return Err(Error::domain("the s-number table starts at k = 3"));
    }
    let mut rows = Vec::new();
    let mut report = Report::new(format!("tuned W s-numbers for 3 <= k <= {max_k}"));
    for k in 3..=max_k {
        let sign = if k % 2 == 0 { Rat::one() } else { -Rat::one() };
        let k1 = rat_int(i64::from(k) + 1);
        let s_wk = Rat::one() + &sign * &k1 - orientation_target(k)?;
        let s_alpha = |i: u32| -Rat::from_integer(binom(i64::from(k) + 1, i64::from(i)));
        let s_a1k = s_alpha(1);
        let mut ratios = Vec::new();
        for i in 1..=k {
            let s_w = if i == 1 {
                &s_a1k + &k1 * (&sign * &s_a1k + &s_wk)
            } else {
                let c = Rat::from_integer(binom(i64::from(k) + 1, i64::from(i)));
                s_alpha(i) + &sign * &c * &s_a1k + &c * &s_wk
            };
            let ratio = &s_w / s_alpha(i);
            ratios.push((i, s_w, ratio));
        }
        let nums: Vec<BigInt> = ratios.iter().map(|(_, s, _)| s.numer().clone()).collect();
        let gcd = gcd_all(&nums);
        let exceptional = is_exceptional_weight(k);

        let first = ratios[0].2.clone();
        let uniform = ratios.iter().all(|(_, _, r)| *r == first);
        let expected = if exceptional {
            orientation_target(k)?
        } else {
            rat_int(prime_power_base(u64::from(k)).map_or(1, |p| p as i64))
        };
        report.push(Check::new(
            format!("k = {k} ratio"),
            uniform && first == expected,
            format!("ratio {first}, expected {expected}{}", if exceptional { " (exceptional)" } else { "" }),
        ));
        let target = d(k)? * d(k - 1)?;
        let odd_gcd = dyadic_split(&Rat::from_integer(gcd.clone()))?.odd;
        let odd_target = dyadic_split(&Rat::from_integer(target.clone()))?.odd;
        report.push(Check::new(
            format!("k = {k} gcd"),
            odd_gcd.abs() == odd_target.abs(),
            format!("gcd {gcd}, d(k)d(k-1) = {target}"),
        ));
        rows.push(LemmaRow { k, exceptional, s_wk, ratios, gcd });
    }
    Ok((rows, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgl::universal_fgl;

    fn cp(n: u32) -> GradedPoly {
        GradedPoly::cp(n)
    }

    fn part(p: &[u32]) -> Partition {
        Partition::new(p.to_vec()).unwrap()
    }

    /// Chern number by brute force over Chern roots: each CP_n contributes
    /// n+1 roots equal to h_j, and c_w is a product of elementary symmetric
    /// functions evaluated by expanding monomials in the h_j.
    fn chern_oracle(dims: &[u32], w: &[u32]) -> i128 {
        let roots: Vec<usize> =
            dims.iter().enumerate().flat_map(|(j, &n)| std::iter::repeat_n(j, n as usize + 1)).collect();
        // polynomial in h_j as map from exponent vector to coefficient
        type P = HashMap<Vec<u32>, i128>;
        let r = dims.len();
        let mul = |a: &P, b: &P| -> P {
            let mut out = P::new();
            for (ea, ca) in a {
                for (eb, cb) in b {
                    let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                    if e.iter().zip(dims).all(|(x, n)| x <= n) {
                        *out.entry(e).or_default() += ca * cb;
                    }
                }
            }
            out
        };
        let elementary = |k: u32| -> P {
            let mut out = P::new();
            let m = roots.len();
            for mask in 0u64..(1 << m) {
                if mask.count_ones() == k {
                    let mut e = vec![0u32; r];
                    for (bit, &j) in roots.iter().enumerate() {
                        if mask >> bit & 1 == 1 {
                            e[j] += 1;
                        }
                    }
                    if e.iter().zip(dims).all(|(x, n)| x <= n) {
                        *out.entry(e).or_default() += 1;
                    }
                }
            }
            out
        };
        let mut acc: P = [(vec![0; r], 1)].into_iter().collect();
        for &k in w {
            acc = mul(&acc, &elementary(k));
        }
        acc.get(dims).copied().unwrap_or(0)
    }

    #[test]
    fn partition_enumeration() {
        let counts: Vec<usize> = (1..=10).map(|n| partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
        assert_eq!(partitions(3), vec![part(&[3]), part(&[2, 1]), part(&[1, 1, 1])]);
        assert_eq!(part(&[1, 2]).label(), "c1c2");
        assert_eq!("1, 2".parse::<Partition>().unwrap(), part(&[2, 1]));
        assert!("1,,2".parse::<Partition>().is_err());
        assert!(Partition::new(vec![0]).is_err());
    }

    #[test]
    fn chern_tables() {
        let x = |ps: &[(u32, u32)]| cp_poly(&[(Rat::one(), ps)]);
        let rows = [(x(&[(3, 1)]), [4, 24, 64]), (x(&[(1, 1), (2, 1)]), [6, 24, 54]), (x(&[(1, 3)]), [8, 24, 48])];
        let ws = [part(&[3]), part(&[1, 2]), part(&[1, 1, 1])];
        for (m, vals) in &rows {
            for (w, v) in ws.iter().zip(vals) {
                assert_eq!(chern_number(m, w).unwrap(), rat_int(*v), "{m} {}", w.label());
            }
        }
        let rows = [
            (x(&[(1, 4)]), [384, 192, 64]),
            (x(&[(1, 2), (2, 1)]), [432, 204, 60]),
            (x(&[(2, 2)]), [486, 216, 54]),
            (x(&[(1, 1), (3, 1)]), [512, 224, 56]),
            (x(&[(4, 1)]), [625, 250, 50]),
        ];
        let ws = [part(&[1, 1, 1, 1]), part(&[1, 1, 2]), part(&[1, 3])];
        for (m, vals) in &rows {
            for (w, v) in ws.iter().zip(vals) {
                assert_eq!(chern_number(m, w).unwrap(), rat_int(*v), "{m} {}", w.label());
            }
        }
        assert!(chern_number(&cp(3), &part(&[2])).is_err());
    }

    #[test]
    fn chern_numbers_match_root_oracle() {
        for n in 1..=5 {
            for shape in partitions(n) {
                let dims = shape.parts().to_vec();
                let m = cp_poly(&[(Rat::one(), &dims.iter().map(|&d| (d, 1)).collect::<Vec<_>>())]);
                for w in partitions(n) {
                    let expect = chern_oracle(&dims, w.parts());
                    assert_eq!(chern_number(&m, &w).unwrap(), rat_int(expect), "{m} {}", w.label());
                }
            }
        }
    }

    #[test]
    fn s_number_examples() {
        assert_eq!(s_number_manifold(&cp(2)).unwrap(), rat_int(3));
        assert_eq!(s_number_manifold(&(&cp(1) * &cp(2))).unwrap(), rat_int(0));
        assert_eq!(s_number_manifold(&GradedPoly::zero()).unwrap(), rat_int(0));
        for n in 1..=8 {
            assert_eq!(chern_number(&cp(n), &part(&[n])).unwrap(), rat_int(i64::from(n) + 1));
        }
    }

    #[test]
    fn newton_identity_to_weight_5() {
        assert_eq!(newton_power_sum(2), vec![(part(&[1, 1]), BigInt::from(1)), (part(&[2]), BigInt::from(-2))]);
        for n in 1..=5 {
            for shape in partitions(n) {
                let m = cp_poly(&[(Rat::one(), &shape.parts().iter().map(|&d| (d, 1)).collect::<Vec<_>>())]);
                let c = newton_check(&m).unwrap();
                assert!(c.passed, "{m}: {c}");
            }
        }
    }

    #[test]
    fn su_checks() {
        let f = universal_fgl(6).unwrap();
        let g = build_x234(&f).unwrap();
        for x in [&g.x2, &g.x3, &g.x4] {
            let r = su_check(x, DEFAULT_PARTITION_CAP).unwrap();
            assert!(r.passed(), "{x}: {r}");
        }
        assert_eq!(su_check(&g.x2, 10).unwrap().checks[0].detail, "0");
        let r = su_check(&cp(1), 10).unwrap();
        assert!(!r.passed());
        assert_eq!(r.checks[0].detail, "2");
        assert!(su_check(&cp(11), 10).is_err());

        // with the computed α_23 the literal formula leaves c1c3 = -4
        let r = su_check(&g.x4_literal, 10).unwrap();
        assert_eq!(r.find("c1c3").unwrap().detail, "-4");
    }

    #[test]
    fn low_generators() {
        let f = universal_fgl(6).unwrap();
        let g = build_x234(&f).unwrap();
        assert_eq!(g.x3, cp_poly(&[(rat(3, 2), &[(3, 1)]), (rat_int(-4), &[(1, 1), (2, 1)]), (rat(5, 2), &[(1, 3)])]));
        assert_eq!(s_number(&g.x2, 2).unwrap(), rat_int(3));
        assert_eq!(s_number(&g.x3, 3).unwrap(), rat_int(6));
        assert_eq!(s_number(&g.x4, 4).unwrap(), rat_int(10));
        assert_eq!(s_number_manifold(&g.x4).unwrap(), rat_int(10));
        assert!(novikov_admissible(2, &rat_int(3)).unwrap().admissible);
        let expected_x4 = cp_poly(&[
            (rat(-23, 4), &[(1, 4)]),
            (rat_int(13), &[(1, 2), (2, 1)]),
            (rat_int(-3), &[(2, 2)]),
            (rat(-25, 4), &[(1, 1), (3, 1)]),
            (rat_int(2), &[(4, 1)]),
        ]);
        assert_eq!(g.x4, expected_x4);
        assert!(g.report.notes[0].starts_with("alpha(2,3) = "));
        assert!(g.report.find("x4 equals the reference polynomial").unwrap().passed);
    }

    #[test]
    fn w_coefficients_match_direct_conjugation() {
        let f = universal_fgl(6).unwrap();
        let params = gamma_params(&f);
        let gamma = gamma_series(&f, &params).unwrap();
        let lifted = f.alpha_series().map(|p| QuadElem::from_even(p.clone(), params.clone()));
        let direct = crate::fgl::apply_strong_iso(&gamma, &lifted).unwrap();
        let w = w_coefficients(&f).unwrap();
        for (i, j, c) in direct.iter() {
            assert_eq!(w.series().coeff(i, j), c, "({i},{j})");
        }
    }

    #[test]
    fn gamma_low_order() {
        let f = universal_fgl(6).unwrap();
        let params = gamma_params(&f);
        let g = gamma_series(&f, &params).unwrap();
        assert!(g.coeff(0).is_zero());
        assert!(g.coeff(1).even.is_one() && g.coeff(1).odd.is_zero());
        // ū = -u - CP_1 u² gives τuū = -τu² and α_21 u ū² = α_21 u³ at the next order
        assert!(g.coeff(2).even.is_zero());
        assert_eq!(g.coeff(2).odd, GradedPoly::constant(rat_int(-1)));
    }

    #[test]
    fn w_coefficient_examples() {
        let f = universal_fgl(8).unwrap();
        let w = w_coefficients(&f).unwrap();
        let w11 = w.w(1, 1);
        assert_eq!(w11.cls, -&cp(1));
        assert_eq!(w11.bnd, GradedPoly::constant(rat_int(-2)));
        assert!(w.w(1, 0).cls.is_one());
        for c in w.entries() {
            assert_eq!(c, WCoefficient { i: c.i, j: c.j, ..w.w(c.j, c.i) });
            assert!(c.cls.is_homogeneous_of((c.i + c.j - 1) as u32));
            assert!(c.bnd.is_homogeneous_of((c.i + c.j - 2) as u32));
        }
    }

    #[test]
    fn star_product_examples() {
        let f = universal_fgl(4).unwrap();
        let params = gamma_params(&f);
        let cp1 = WClass::new(cp(1), GradedPoly::constant(rat_int(2)));
        let x = WClass::new(cp(2), GradedPoly::zero());
        assert_eq!(star_product(&cp1, &x, &params), WClass::new(&cp(1) * &cp(2), cp(2).scale(&rat_int(2))));
        assert_eq!(star_product(&WClass::unit(), &cp1, &params), cp1);
        let y = WClass::new(cp(1).pow(2), cp(1));
        let p = star_product(&cp1, &y, &params);
        // the boundary follows a∂b + ∂a b - CP_1 ∂a ∂b
        let rule = &(&(&cp1.cls * &y.bnd) + &(&cp1.bnd * &y.cls)) - &(&cp(1) * &(&cp1.bnd * &y.bnd));
        assert_eq!(p.bnd, rule);
        let q = QuadElem::new(cp1.cls.clone(), cp1.bnd.clone(), params.clone())
            .try_mul(&QuadElem::new(y.cls.clone(), y.bnd.clone(), params.clone()))
            .unwrap();
        assert_eq!((q.even, q.odd), (p.cls, p.bnd));
    }

    #[test]
    fn bk_xk_are_su_to_weight_8() {
        let f = universal_fgl(8).unwrap();
        let w = w_coefficients(&f).unwrap();
        let table = build_bk_xk(&f, &w, DEFAULT_PARTITION_CAP).unwrap();
        for e in &table {
            assert_eq!(e.s_x, &e.s_b * rat_int(2), "k = {}", e.k);
            assert_eq!(s_number_manifold(&e.x).unwrap(), e.s_x);
            let su = e.su.as_ref().unwrap();
            assert!(su.passed(), "x_{}: {su}", e.k);
        }
        // the default orientation scales s-numbers by -k (k odd) or k + 2 (k even)
        let s_x: Vec<Rat> = table.iter().map(|e| e.s_x.clone()).collect();
        let expect: Vec<Rat> = [0, 12, -60, 10, -112, 28, -60].into_iter().map(rat_int).collect();
        assert_eq!(s_x, expect);
        assert!(table[0].novikov.is_none());
        let admissible: Vec<bool> = table[1..].iter().map(|e| e.novikov.as_ref().unwrap().admissible).collect();
        assert_eq!(admissible, vec![true, false, true, true, true, false]);
    }

    #[test]
    fn lemma_table_examples() {
        let (rows, report) = lemma_snumber_table(20).unwrap();
        assert!(report.passed(), "{report}");
        let row = |k: u32| rows.iter().find(|r| r.k == k).unwrap();
        assert!(row(9).ratios.iter().all(|(_, _, r)| *r == rat_int(3)));
        assert!(row(6).ratios.iter().all(|(_, _, r)| r.is_one()));
        assert!(row(8).ratios.iter().all(|(_, _, r)| *r == rat_int(4)));
        assert!(row(16).ratios.iter().all(|(_, _, r)| *r == rat_int(-16)));
        assert!(row(8).exceptional && row(4).exceptional && row(16).exceptional && !row(9).exceptional);
        assert!(lemma_snumber_table(2).is_err());
    }
}
