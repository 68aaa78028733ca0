//! The universal formal group law over `Q[CP_1, CP_2, ...]`.
//!
//! The basis is fixed by the Mishchenko logarithm
//! `log(x) = Σ_{n≥0} CP_n x^(n+1)/(n+1)`, which gives `α_11 = -CP_1` and
//! `α_12 = CP_1² - CP_2`.

use crate::arith::rat;
use crate::error::{Error, Result};
use crate::graded::GradedPoly;
use crate::report::{Check, Report};
use crate::series::{compose_outer, compose_sum, Coefficient, Series1, Series2};

/// Coefficients of `F(x, y) = Σ α_ij x^i y^j` for `i + j <= N + 1` together
/// with the logarithm, exponential and invariant differential.
#[derive(Debug, Clone, PartialEq)]
pub struct FglTable {
    n: u32,
    alpha: Series2<GradedPoly>,
    log: Series1<GradedPoly>,
    exp: Series1<GradedPoly>,
    omega: Series1<GradedPoly>,
}

/// Coefficients `A_ij` of `A(x, y) = F(x, y)(x ω(y) - y ω(x))` for `i + j <= N + 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingTable {
    n: u32,
    a: Series2<GradedPoly>,
}

pub fn mishchenko_log(n: u32) -> Result<Series1<GradedPoly>> {
    if n < 1 {
        return Err(Error::domain("weight bound must be at least 1"));
    }
    let order = n as usize + 1;
    Series1::from_fn(order, |k| {
        if k == 0 {
            GradedPoly::zero()
        } else {
            GradedPoly::cp(k as u32 - 1).scale(&rat(1, k as i64))
        }
    })
    .with_grading(-1)
}

pub fn universal_fgl(n: u32) -> Result<FglTable> {
    let log = mishchenko_log(n)?;
    let exp = log.revert()?;
    let bound = n as usize + 1;
    let alpha = compose_sum(&exp, &log, bound)?.with_grading(-1)?;
    let omega = Series1::from_fn(n as usize, |i| if i == 0 { GradedPoly::one() } else { alpha.coeff(i, 1).clone() })
        .with_grading(0)?;
    Ok(FglTable { n, alpha, log, exp, omega })
}

impl FglTable {
    /// Builds a table from raw coefficients, e.g. a perturbed one for testing
    /// the axiom check. The logarithm is recomputed from the basis convention.
    pub fn from_alpha(n: u32, alpha: Series2<GradedPoly>) -> Result<FglTable> {
        if alpha.bound() != n as usize + 1 {
            return Err(Error::domain("alpha table bound must be N + 1"));
        }
        let log = mishchenko_log(n)?;
        let exp = log.revert()?;
        let omega =
            Series1::from_fn(n as usize, |i| if i == 0 { GradedPoly::one() } else { alpha.coeff(i, 1).clone() });
        Ok(FglTable { n, alpha, log, exp, omega })
    }

    pub fn max_degree(&self) -> u32 {
        self.n
    }

    /// `α_ij`; panics if `i + j > N + 1`.
    pub fn alpha(&self, i: usize, j: usize) -> &GradedPoly {
        self.alpha.coeff(i, j)
    }

    pub fn alpha_series(&self) -> &Series2<GradedPoly> {
        &self.alpha
    }

    pub fn log(&self) -> &Series1<GradedPoly> {
        &self.log
    }

    pub fn exp(&self) -> &Series1<GradedPoly> {
        &self.exp
    }

    /// `ω(x) = 1 + Σ α_i1 x^i`.
    pub fn omega(&self) -> &Series1<GradedPoly> {
        &self.omega
    }
}

impl PairingTable {
    pub fn from_series(n: u32, a: Series2<GradedPoly>) -> Result<PairingTable> {
        if a.bound() != n as usize + 2 {
            return Err(Error::domain("pairing table bound must be N + 2"));
        }
        Ok(PairingTable { n, a })
    }

    pub fn max_degree(&self) -> u32 {
        self.n
    }

    /// `A_ij`; panics if `i + j > N + 2`.
    pub fn a(&self, i: usize, j: usize) -> &GradedPoly {
        self.a.coeff(i, j)
    }

    pub fn series(&self) -> &Series2<GradedPoly> {
        &self.a
    }
}

/// `ω` computed as `1 / log'`, cross-checked against `∂F/∂y (x, 0)`.
pub fn invariant_differential(f: &FglTable) -> Result<Series1<GradedPoly>> {
    let from_log = f.log.derive().reciprocal()?;
    if let Some(k) = (0..=from_log.order()).find(|&k| from_log.coeff(k) != f.omega.coeff(k)) {
        return Err(Error::Consistency(format!(
            "invariant differential: 1/log' and dF/dy(x,0) differ at x^{k}: {} vs {}",
            from_log.coeff(k),
            f.omega.coeff(k)
        )));
    }
    Ok(from_log)
}

fn pad(s: &Series2<GradedPoly>, bound: usize) -> Series2<GradedPoly> {
    Series2::from_fn(bound, |i, j| s.get(i, j).cloned().unwrap_or_default())
}

pub fn pairing_series(f: &FglTable) -> Result<PairingTable> {
    let bound = f.n as usize + 2;
    let omega = &f.omega;
    let mut d = Series2::zeros(bound, &GradedPoly::zero());
    for k in 0..=omega.order() {
        if k < bound {
            let c = d.coeff(1, k) + omega.coeff(k);
            d.set(1, k, c);
            let c = d.coeff(k, 1) - omega.coeff(k);
            d.set(k, 1, c);
        }
    }
    // Padding with zeros is exact here: both factors have no constant term,
    // so degree-(N+2) terms of either never reach total degree N + 2.
    let a = pad(&f.alpha, bound).mul(&d).with_grading(-2)?;
    Ok(PairingTable { n: f.n, a })
}

/// `ū(u)` with `F(u, ū) = 0`, computed as `exp(-log u)` and checked by substitution.
pub fn formal_inverse(f: &FglTable) -> Result<Series1<GradedPoly>> {
    let inv = f.exp.compose(&f.log.neg())?;
    let residual = f.alpha.substitute_y(&inv)?.diagonal();
    if let Some(k) = residual.first_nonzero() {
        return Err(Error::Consistency(format!("F(u, ū(u)) has nonzero coefficient at u^{k}")));
    }
    Ok(inv)
}

/// Residuals of the unit, commutativity and associativity axioms, the last
/// to total weight `N`.
pub fn fgl_axiom_check(f: &FglTable) -> Report {
    let alpha = &f.alpha;
    let b = alpha.bound();
    let mut report = Report::new(format!("formal group law axioms to weight {}", f.n));

    let unit = (0..=b).find(|&i| {
        let expect = if i == 1 { GradedPoly::one() } else { GradedPoly::zero() };
        *alpha.coeff(i, 0) != expect || *alpha.coeff(0, i) != expect
    });
    report.push(match unit {
        None => Check::pass("unit F(x,0) = x", ""),
        Some(i) => Check::fail("unit F(x,0) = x", format!("coefficient of x^{i} is {}", alpha.coeff(i, 0))),
    });

    let comm = alpha.iter().find(|(i, j, c)| *c != alpha.coeff(*j, *i)).map(|(i, j, _)| (i, j));
    report.push(match comm {
        None => Check::pass("commutativity F(x,y) = F(y,x)", ""),
        Some((i, j)) => Check::fail("commutativity F(x,y) = F(y,x)", format!("alpha({i},{j}) != alpha({j},{i})")),
    });

    // F(F(x,y),z) at x^i y^j z^k is Σ_a α_ak [x^i y^j] F^a, and
    // F(x,F(y,z)) is Σ_b α_ib [y^j z^k] F^b.
    let mut powers = vec![Series2::from_fn(b, |i, j| if i + j == 0 { GradedPoly::one() } else { GradedPoly::zero() })];
    for a in 1..=b {
        powers.push(powers[a - 1].mul(alpha));
    }
    let mut bad = None;
    'outer: for total in 1..=b {
        for i in 0..=total {
            for j in 0..=total - i {
                let k = total - i - j;
                let mut left = GradedPoly::zero();
                for (a, pa) in powers.iter().enumerate().take(i + j + 1) {
                    if a + k <= b {
                        left += &(alpha.coeff(a, k) * pa.coeff(i, j));
                    }
                }
                let mut right = GradedPoly::zero();
                for (c, pc) in powers.iter().enumerate().take(j + k + 1) {
                    if i + c <= b {
                        right += &(alpha.coeff(i, c) * pc.coeff(j, k));
                    }
                }
                if left != right {
                    bad = Some((i, j, k, &left - &right));
                    break 'outer;
                }
            }
        }
    }
    report.push(match bad {
        None => Check::pass("associativity F(F(x,y),z) = F(x,F(y,z))", format!("all coefficients to weight {}", f.n)),
        Some((i, j, k, r)) => {
            Check::fail("associativity F(F(x,y),z) = F(x,F(y,z))", format!("residual at x^{i} y^{j} z^{k}: {r}"))
        }
    });
    report
}

/// Transports a bivariate law along `t = x + O(x²)`: returns `t(F(t⁻¹x, t⁻¹y))`.
pub fn apply_strong_iso<C: Coefficient>(t: &Series1<C>, f: &Series2<C>) -> Result<Series2<C>> {
    if !t.coeff(0).is_zero() || t.order() < 1 || !t.coeff(1).is_one() {
        return Err(Error::domain("strong isomorphism must be x + O(x^2)"));
    }
    let t_inv = t.revert()?;
    let g = f.substitute_x(&t_inv)?.substitute_y(&t_inv)?;
    let out = compose_outer(t, &g)?;
    if out.check_grading(-1) {
        out.with_grading(-1)
    } else {
        Ok(out)
    }
}

/// The coefficient `1/(n+1)` of `CP_n x^(n+1)` in the logarithm, as used by
/// genera: `log_φ(x) = Σ φ(CP_n) x^(n+1)/(n+1)`.
pub fn log_from_images(images: impl Fn(u32) -> GradedPoly, order: usize) -> Series1<GradedPoly> {
    Series1::from_fn(order, |k| if k == 0 { GradedPoly::zero() } else { images(k as u32 - 1).scale(&rat(1, k as i64)) })
}
