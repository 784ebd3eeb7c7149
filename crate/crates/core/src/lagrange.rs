//! Truncated multivariate power series with exact rational coefficients
//! and the arborescent inversion formula: the coefficient of the
//! implicit system `g_i = x_i f_i(g)` equals a normalized sum of graph
//! derivatives over elementary-forest codes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::branching::OffspringLaw;
use crate::cyclic::{elementary_forests, is_elementary_code};
use crate::error::{Error, Result};

/// Exponent vector ordered by total degree, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total().cmp(&other.total()).then_with(|| self.0.cmp(&other.0))
    }
}

/// Sparse truncated power series: every stored exponent has total
/// degree at most the truncation order, and arithmetic truncates
/// eagerly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiSeries {
    vars: usize,
    order: u32,
    terms: BTreeMap<Monomial, BigRational>,
}

impl MultiSeries {
    pub fn zero(vars: usize, order: u32) -> Self {
        MultiSeries { vars, order, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, order: u32, value: BigRational) -> Self {
        let mut s = Self::zero(vars, order);
        s.add_term(vec![0; vars], value);
        s
    }

    pub fn one(vars: usize, order: u32) -> Self {
        Self::constant(vars, order, BigRational::one())
    }

    /// The variable `x_{i+1}`.
    pub fn variable(vars: usize, order: u32, i: usize) -> Self {
        let mut expo = vec![0u32; vars];
        expo[i] = 1;
        let mut s = Self::zero(vars, order);
        s.add_term(expo, BigRational::one());
        s
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, expo: Vec<u32>, coef: BigRational) {
        debug_assert_eq!(expo.len(), self.vars);
        let m = Monomial(expo);
        if m.total() > self.order || coef.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Coefficient at an exponent; reading past the truncation order is
    /// an error because the value there is unknown, not zero.
    pub fn coefficient(&self, expo: &[u32]) -> Result<BigRational> {
        let m = Monomial(expo.to_vec());
        if m.total() > self.order {
            return Err(Error::Hypothesis(format!(
                "coefficient at total degree {} beyond truncation order {}",
                m.total(),
                self.order
            )));
        }
        Ok(self.terms.get(&m).cloned().unwrap_or_else(BigRational::zero))
    }

    pub fn constant_term(&self) -> BigRational {
        self.terms
            .get(&Monomial(vec![0; self.vars]))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.vars, other.vars);
        let order = self.order.min(other.order);
        let mut out = Self::zero(self.vars, order);
        for (m, c) in &self.terms {
            out.add_term(m.0.clone(), c.clone());
        }
        for (m, c) in &other.terms {
            out.add_term(m.0.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        let mut out = Self::zero(self.vars, self.order);
        for (m, c) in &self.terms {
            out.add_term(m.0.clone(), c * factor);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.vars, other.vars);
        let order = self.order.min(other.order);
        let mut out = Self::zero(self.vars, order);
        for (ma, ca) in &self.terms {
            if ma.total() > order {
                continue;
            }
            for (mb, cb) in &other.terms {
                if ma.total() + mb.total() > order {
                    continue;
                }
                let expo: Vec<u32> = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                out.add_term(expo, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one(self.vars, self.order);
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }

    /// Symbolic partial derivative: multiply by the exponent, decrement
    /// it. The result is reliable one order lower than the input.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.vars, self.order.saturating_sub(1));
        for (m, c) in &self.terms {
            if m.0[i] == 0 {
                continue;
            }
            let mut expo = m.0.clone();
            expo[i] -= 1;
            out.add_term(expo, c * BigRational::from_integer(BigInt::from(m.0[i])));
        }
        out
    }

    /// Restricts the series to a lower truncation order.
    pub fn truncated(&self, order: u32) -> Self {
        let mut out = Self::zero(self.vars, order.min(self.order));
        for (m, c) in &self.terms {
            out.add_term(m.0.clone(), c.clone());
        }
        out
    }

    /// Substitutes the vector `g` into `self` (which must be a
    /// polynomial: all its exponents are materialized terms).
    pub fn compose(&self, g: &[Self]) -> Self {
        debug_assert_eq!(g.len(), self.vars);
        let order = g.iter().map(|s| s.order).min().unwrap_or(self.order).min(self.order);
        let vars = g.first().map(|s| s.vars).unwrap_or(self.vars);
        let mut out = Self::zero(vars, order);
        for (m, c) in &self.terms {
            let mut term = Self::constant(vars, order, c.clone());
            for (j, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&g[j].pow(e));
                }
            }
            out = out.add(&term);
        }
        out
    }
}

/// Generating function of one component of an offspring law, as a
/// polynomial series.
pub fn series_from_law(law: &OffspringLaw, i: usize, order: u32) -> MultiSeries {
    let d = law.d();
    let mut s = MultiSeries::zero(d, order);
    for (z, w) in law.support(i) {
        let expo: Vec<u32> = z.iter().map(|&e| e as u32).collect();
        s.add_term(expo, w.clone());
    }
    s
}

/// The monomial `x_1^{r_1} ... x_d^{r_d}` seeding the progeny system.
pub fn root_monomial(r: &[i64], order: u32) -> Result<MultiSeries> {
    let d = r.len();
    if r.iter().any(|&v| v < 0) || r.iter().sum::<i64>() < 1 {
        return Err(Error::Hypothesis("root exponents must be nonnegative with at least one".into()));
    }
    let mut s = MultiSeries::zero(d, order);
    s.add_term(r.iter().map(|&v| v as u32).collect(), BigRational::one());
    Ok(s)
}

/// Solves the implicit system `g_i = x_i f_i(g)` by degree-graded
/// iteration; each round fixes one more total degree, so `order + 1`
/// rounds reach a fixed point for well-posed inputs.
pub fn solve_fixed_point(f: &[MultiSeries], order: u32) -> Result<Vec<MultiSeries>> {
    let d = f.len();
    for (i, fi) in f.iter().enumerate() {
        if !fi.constant_term().is_positive() {
            return Err(Error::Hypothesis(format!(
                "component {i} has nonpositive constant term; the system is not well posed"
            )));
        }
    }
    let mut g: Vec<MultiSeries> = (0..d).map(|_| MultiSeries::zero(d, order)).collect();
    for _ in 0..=order {
        let next: Vec<MultiSeries> = (0..d)
            .map(|i| MultiSeries::variable(d, order, i).mul(&f[i].compose(&g)))
            .collect();
        if next == g {
            return Ok(g);
        }
        g = next;
    }
    // one final stability check after the full round budget
    let next: Vec<MultiSeries> =
        (0..d).map(|i| MultiSeries::variable(d, order, i).mul(&f[i].compose(&g))).collect();
    if next == g {
        Ok(g)
    } else {
        Err(Error::Hypothesis("fixed-point iteration did not stabilize".into()))
    }
}

/// Derivative of the vector `(g_0, ..., g_d)` with respect to an
/// elementary-forest code: for each `k`, the mixed partial of `g_k`
/// with respect to the variables whose code entry is `k` (the empty set
/// acting as the identity), all multiplied together.
pub fn graph_derivative(g: &[MultiSeries], code: &[usize]) -> Result<MultiSeries> {
    let d = code.len();
    if g.len() != d + 1 {
        return Err(Error::Parse(format!("expected {} series, got {}", d + 1, g.len())));
    }
    if !is_elementary_code(code) {
        return Err(Error::Hypothesis("code does not describe an elementary forest".into()));
    }
    let vars = g[0].vars();
    let order = g.iter().map(MultiSeries::order).min().unwrap_or(0);
    let mut product = MultiSeries::one(vars, order);
    for k in 0..=d {
        let mut factor = g[k].clone();
        for (i, &parent) in code.iter().enumerate() {
            if parent == k {
                factor = factor.partial(i);
            }
        }
        product = product.mul(&factor);
    }
    Ok(product)
}

/// Left-hand side: the coefficient of `x^n` in `f_0(g)` where `g`
/// solves the progeny system for the law.
pub fn fixed_point_coefficient(law: &OffspringLaw, r: &[i64], n: &[i64]) -> Result<BigRational> {
    let d = law.d();
    if n.len() != d || r.len() != d {
        return Err(Error::Parse("dimension mismatch".into()));
    }
    if n.iter().any(|&v| v < 0) {
        return Err(Error::Hypothesis("negative exponent".into()));
    }
    let order: u32 = n.iter().map(|&v| v as u32).sum();
    let f: Vec<MultiSeries> = (0..d).map(|i| series_from_law(law, i, order)).collect();
    let g = solve_fixed_point(&f, order)?;
    let f0 = root_monomial(r, order)?;
    let value = f0.compose(&g);
    let expo: Vec<u32> = n.iter().map(|&v| v as u32).collect();
    value.coefficient(&expo)
}

/// Right-hand side of the inversion formula: the normalized sum over
/// elementary-forest codes of graph derivatives of
/// `(f_0, f_1^{n_1}, ..., f_d^{n_d})`, read at `x^{n - 1}`.
pub fn arborescent_coefficient(law: &OffspringLaw, r: &[i64], n: &[i64]) -> Result<BigRational> {
    let d = law.d();
    if n.len() != d || r.len() != d {
        return Err(Error::Parse("dimension mismatch".into()));
    }
    if n.iter().any(|&v| v < 1) {
        return Err(Error::Hypothesis("every exponent must be positive".into()));
    }
    let order: u32 = n.iter().map(|&v| v as u32).sum();
    let f0 = root_monomial(r, order)?;
    let mut vector = Vec::with_capacity(d + 1);
    vector.push(f0);
    for i in 0..d {
        vector.push(series_from_law(law, i, order).pow(n[i] as u32));
    }
    let mut sum = MultiSeries::zero(d, order.saturating_sub(1));
    for code in elementary_forests(d) {
        sum = sum.add(&graph_derivative(&vector, &code)?);
    }
    let expo: Vec<u32> = n.iter().map(|&v| (v - 1) as u32).collect();
    let mut value = sum.coefficient(&expo)?;
    for &ni in n {
        value /= BigRational::from_integer(BigInt::from(ni));
    }
    Ok(value)
}
