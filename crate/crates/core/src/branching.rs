//! Multitype offspring laws with exact rational weights and closed forms
//! for the joint law of the total progeny.
//!
//! Probabilities are `BigRational` throughout; the only floating point
//! in this module's orbit lives in the spectral-radius reporting of
//! [`classify`] (and even there the enclosure bounds are exact
//! rationals).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact;
use crate::forest::Signature;

/// Offspring vector: entry `j` counts children of type `j + 1`.
pub type Offspring = Vec<usize>;

/// Sparse distribution on `Z_+^d` with exact weights.
pub type SparseDist = BTreeMap<Offspring, BigRational>;

pub const DEFAULT_SUPPORT_CAP: usize = 1 << 20;

/// A progeny distribution: one finite-support law on `Z_+^d` per type,
/// each summing to one exactly. Support is kept sorted in its canonical
/// key order, which is also the inverse-CDF sampling order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffspringLaw {
    d: usize,
    nu: Vec<Vec<(Offspring, BigRational)>>,
}

impl OffspringLaw {
    pub fn new(d: usize, nu: Vec<Vec<(Offspring, BigRational)>>) -> Result<Self> {
        if nu.len() != d {
            return Err(Error::InvalidLaw(format!("expected {d} laws, got {}", nu.len())));
        }
        let mut clean = Vec::with_capacity(d);
        for (i, support) in nu.into_iter().enumerate() {
            let mut map: SparseDist = BTreeMap::new();
            let mut total = BigRational::zero();
            for (z, w) in support {
                if z.len() != d {
                    return Err(Error::InvalidLaw(format!(
                        "law {i}: offspring vector of length {}, expected {d}",
                        z.len()
                    )));
                }
                if w.is_negative() {
                    return Err(Error::InvalidLaw(format!("law {i}: negative weight")));
                }
                if w.is_zero() {
                    continue;
                }
                total += &w;
                *map.entry(z).or_insert_with(BigRational::zero) += w;
            }
            if !total.is_one() {
                return Err(Error::InvalidLaw(format!(
                    "law {i}: weights sum to {}, not 1",
                    exact::format_rational(&total)
                )));
            }
            clean.push(map.into_iter().collect());
        }
        Ok(OffspringLaw { d, nu: clean })
    }

    /// Convenience constructor with `p/q` string weights.
    pub fn from_parts(d: usize, parts: &[&[(&[usize], &str)]]) -> Result<Self> {
        let nu = parts
            .iter()
            .map(|support| {
                support
                    .iter()
                    .map(|(z, w)| Ok((z.to_vec(), exact::parse_rational(w)?)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        OffspringLaw::new(d, nu)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Sorted support of the law of type `i` (0-based).
    pub fn support(&self, i: usize) -> &[(Offspring, BigRational)] {
        &self.nu[i]
    }

    pub fn prob(&self, i: usize, z: &[usize]) -> BigRational {
        self.nu[i]
            .iter()
            .find(|(key, _)| key.as_slice() == z)
            .map(|(_, w)| w.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// Mean matrix: entry `(i, j)` is the expected number of type-`j+1`
    /// children of a type-`i+1` individual.
    pub fn mean_matrix(&self) -> Vec<Vec<BigRational>> {
        (0..self.d)
            .map(|i| {
                (0..self.d)
                    .map(|j| {
                        self.nu[i]
                            .iter()
                            .map(|(z, w)| BigRational::from_integer(BigInt::from(z[j])) * w)
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// True when every individual has exactly one child almost surely;
    /// such laws never go extinct even at spectral radius one.
    pub fn is_degenerate(&self) -> bool {
        self.nu
            .iter()
            .all(|support| support.iter().all(|(z, _)| z.iter().sum::<usize>() == 1))
    }
}

/// Sparse convolution with a support-size guard.
fn convolve(a: &SparseDist, b: &SparseDist, cap: usize) -> Result<SparseDist> {
    let mut out: SparseDist = BTreeMap::new();
    for (za, wa) in a {
        for (zb, wb) in b {
            let key: Offspring = za.iter().zip(zb).map(|(x, y)| x + y).collect();
            *out.entry(key).or_insert_with(BigRational::zero) += wa * wb;
            if out.len() > cap {
                return Err(Error::SupportCapExceeded { cap });
            }
        }
    }
    Ok(out)
}

/// `n`-fold convolution power by repeated squaring; the zeroth power is
/// the point mass at the origin.
pub fn convolution_power(
    support: &[(Offspring, BigRational)],
    n: usize,
    cap: usize,
) -> Result<SparseDist> {
    let d = support.first().map(|(z, _)| z.len()).unwrap_or(0);
    let mut acc: SparseDist = BTreeMap::new();
    acc.insert(vec![0; d], BigRational::one());
    if n == 0 {
        return Ok(acc);
    }
    let mut base: SparseDist = support.iter().cloned().collect();
    let mut exp = n;
    loop {
        if exp & 1 == 1 {
            acc = convolve(&acc, &base, cap)?;
        }
        exp >>= 1;
        if exp == 0 {
            return Ok(acc);
        }
        base = convolve(&base, &base, cap)?;
    }
}

/// Convolution power of a law component with the crate's default cap.
pub fn law_convolution_power(law: &OffspringLaw, i: usize, n: usize) -> Result<SparseDist> {
    convolution_power(law.support(i), n, DEFAULT_SUPPORT_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Subcritical => write!(f, "subcritical"),
            Regime::Critical => write!(f, "critical"),
            Regime::Supercritical => write!(f, "supercritical"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub irreducible: bool,
    pub degenerate: bool,
    pub regime: Regime,
    /// Certified enclosure of the spectral radius of the mean matrix;
    /// both ends coincide when the radius was decided exactly.
    pub rho: (BigRational, BigRational),
    pub mean: Vec<Vec<BigRational>>,
}

/// Strongly connected components of the positivity pattern, in some
/// deterministic order.
fn components(m: &[Vec<BigRational>]) -> Vec<Vec<usize>> {
    let d = m.len();
    let mut reach = vec![vec![false; d]; d];
    for i in 0..d {
        reach[i][i] = true;
        for j in 0..d {
            if m[i][j].is_positive() {
                reach[i][j] = true;
            }
        }
    }
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);
            }
        }
    }
    let mut seen = vec![false; d];
    let mut comps = Vec::new();
    for i in 0..d {
        if seen[i] {
            continue;
        }
        let comp: Vec<usize> =
            (0..d).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &comp {
            seen[j] = true;
        }
        comps.push(comp);
    }
    comps
}

/// Rational Gaussian elimination; returns `None` for singular systems.
pub fn solve_linear(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for entry in &mut m[col] {
            *entry /= &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..=n {
                    let delta = &factor * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

/// A basis description of the kernel: `(nullity, one kernel vector)`.
fn kernel(a: &[Vec<BigRational>]) -> (usize, Option<Vec<BigRational>>) {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a.to_vec();
    let mut pivot_cols = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        if let Some(p) = (row..n).find(|&r| !m[r][col].is_zero()) {
            m.swap(row, p);
            let pv = m[row][col].clone();
            for entry in &mut m[row] {
                *entry /= &pv;
            }
            for r in 0..n {
                if r != row && !m[r][col].is_zero() {
                    let factor = m[r][col].clone();
                    for c in 0..n {
                        let delta = &factor * &m[row][c];
                        m[r][c] -= delta;
                    }
                }
            }
            pivot_cols.push(col);
            row += 1;
        }
    }
    let nullity = n - pivot_cols.len();
    if nullity == 0 {
        return (0, None);
    }
    let free = (0..n).find(|c| !pivot_cols.contains(c)).unwrap();
    let mut v = vec![BigRational::zero(); n];
    v[free] = BigRational::one();
    for (ri, &pc) in pivot_cols.iter().enumerate() {
        v[pc] = -m[ri][free].clone();
    }
    (nullity, Some(v))
}

fn ratio_bounds(
    m: &[Vec<BigRational>],
    v: &[BigRational],
) -> (BigRational, BigRational) {
    // bounds for the shifted matrix M + I evaluated at a positive v
    let n = m.len();
    let mut lo: Option<BigRational> = None;
    let mut hi: Option<BigRational> = None;
    for i in 0..n {
        let mut acc = v[i].clone();
        for j in 0..n {
            acc += &m[i][j] * &v[j];
        }
        let ratio = acc / &v[i];
        lo = Some(match lo {
            None => ratio.clone(),
            Some(cur) => cur.min(ratio.clone()),
        });
        hi = Some(match hi {
            None => ratio,
            Some(cur) => cur.max(ratio),
        });
    }
    (lo.unwrap(), hi.unwrap())
}

/// Rounds a positive rational vector to bounded denominators; the
/// eigenvalue bounds stay valid for any positive vector, so this only
/// limits coefficient growth.
fn round_positive(v: &mut [BigRational]) {
    let scale = BigInt::from(1u64 << 32);
    for entry in v.iter_mut() {
        let scaled = (&*entry * BigRational::from_integer(scale.clone())).floor();
        let mut num = scaled.to_integer();
        if num.is_zero() {
            num = BigInt::one();
        }
        *entry = BigRational::new(num, scale.clone());
    }
}

/// Enclosure of the spectral radius of an irreducible nonnegative block
/// via shifted power iteration; `None` if the budget runs out before
/// the interval separates from the requested point.
fn component_rho(
    m: &[Vec<BigRational>],
    budget: usize,
) -> Result<(BigRational, BigRational)> {
    let n = m.len();
    let one = BigRational::one();
    if n == 1 {
        return Ok((m[0][0].clone(), m[0][0].clone()));
    }
    // exact decision at one: 1 is an eigenvalue iff det(I - M) = 0; for
    // an irreducible block the radius equals one iff the eigenspace is
    // one-dimensional with a sign-definite vector
    let shifted: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut e = -m[i][j].clone();
                    if i == j {
                        e += &one;
                    }
                    e
                })
                .collect()
        })
        .collect();
    let (nullity, vec) = kernel(&shifted);
    let above_one_only = if nullity == 0 {
        // one is not an eigenvalue, so the radius sits strictly on one side
        false
    } else {
        if nullity == 1 {
            let v = vec.unwrap();
            let positive = v.iter().all(|x| x.is_positive());
            let negative = v.iter().all(|x| x.is_negative());
            if positive || negative {
                return Ok((one.clone(), one));
            }
        }
        // one is an eigenvalue but not the Perron root: radius > 1
        true
    };
    let mut v = vec![one.clone(); n];
    for _ in 0..budget {
        let (lo, hi) = ratio_bounds(m, &v);
        let lo_rho = lo - &one;
        let hi_rho = hi - &one;
        if lo_rho > one || (!above_one_only && hi_rho < one) {
            return Ok((lo_rho, hi_rho));
        }
        let mut next: Vec<BigRational> = (0..n)
            .map(|i| {
                let mut acc = v[i].clone();
                for j in 0..n {
                    acc += &m[i][j] * &v[j];
                }
                acc
            })
            .collect();
        round_positive(&mut next);
        v = next;
    }
    Err(Error::EnclosureStraddlesOne)
}

/// Classifies a law: irreducibility of the mean matrix, degeneracy, and
/// the criticality regime decided from a certified enclosure of the
/// spectral radius (exact at one via the rational eigenproblem).
pub fn classify(law: &OffspringLaw) -> Result<Classification> {
    classify_with_budget(law, 500)
}

pub fn classify_with_budget(law: &OffspringLaw, budget: usize) -> Result<Classification> {
    let m = law.mean_matrix();
    let comps = components(&m);
    let irreducible = comps.len() == 1;
    let one = BigRational::one();
    let mut rho_lo = BigRational::zero();
    let mut rho_hi = BigRational::zero();
    for comp in &comps {
        let sub: Vec<Vec<BigRational>> = comp
            .iter()
            .map(|&i| comp.iter().map(|&j| m[i][j].clone()).collect())
            .collect();
        let (lo, hi) = component_rho(&sub, budget)?;
        rho_lo = rho_lo.max(lo);
        rho_hi = rho_hi.max(hi);
    }
    let regime = if rho_hi < one {
        Regime::Subcritical
    } else if rho_lo > one {
        Regime::Supercritical
    } else if rho_lo == one && rho_hi == one {
        Regime::Critical
    } else {
        return Err(Error::EnclosureStraddlesOne);
    };
    Ok(Classification {
        irreducible,
        degenerate: law.is_degenerate(),
        regime,
        rho: (rho_lo, rho_hi),
        mean: m,
    })
}

/// Joint law of the total progeny per type together with the
/// off-diagonal parent-type counts, as an exact rational.
pub fn progeny_law(
    law: &OffspringLaw,
    r: &[i64],
    n: &[i64],
    k: &[Vec<i64>],
) -> Result<BigRational> {
    progeny_law_with_cap(law, r, n, k, DEFAULT_SUPPORT_CAP)
}

pub fn progeny_law_with_cap(
    law: &OffspringLaw,
    r: &[i64],
    n: &[i64],
    k: &[Vec<i64>],
    cap: usize,
) -> Result<BigRational> {
    let d = law.d();
    Signature::new(d, r.to_vec(), n.to_vec(), k.iter().map(|row| row.to_vec()).collect())?;
    let tables: Vec<SparseDist> = (0..d)
        .map(|i| convolution_power(law.support(i), n[i] as usize, cap))
        .collect::<Result<Vec<_>>>()?;
    Ok(progeny_term(&tables, r, n, k))
}

/// Evaluates one term of the progeny law from precomputed convolution
/// tables; hypotheses are assumed already validated.
fn progeny_term(tables: &[SparseDist], _r: &[i64], n: &[i64], k: &[Vec<i64>]) -> BigRational {
    let d = n.len();
    let kept: Vec<usize> = (0..d).filter(|&i| n[i] > 0).collect();
    let reduced: Vec<Vec<i64>> =
        kept.iter().map(|&i| kept.iter().map(|&j| -k[i][j]).collect()).collect();
    let det = exact::determinant_i64(&reduced);
    if det.is_zero() {
        return BigRational::zero();
    }
    let mut prob = BigRational::from_integer(det);
    for i in 0..d {
        prob /= BigRational::from_integer(BigInt::from(n[i].max(1)));
    }
    for i in 0..d {
        let mut point: Offspring = Vec::with_capacity(d);
        for j in 0..d {
            let e = if i == j { n[i] + k[i][i] } else { k[i][j] };
            debug_assert!(e >= 0);
            point.push(e as usize);
        }
        match tables[i].get(&point) {
            Some(w) => prob *= w,
            None => return BigRational::zero(),
        }
    }
    prob
}

/// All admissible off-diagonal count matrices for given roots and
/// progeny totals: off-diagonal entries nonnegative, column sums plus
/// roots at most the totals, diagonal fixed by the column identity.
pub fn admissible_matrices(r: &[i64], n: &[i64]) -> Vec<Vec<Vec<i64>>> {
    let d = r.len();
    // per-column choices: values of (k[i][j])_{i != j} for fixed j
    fn compositions(total_max: i64, parts: usize) -> Vec<Vec<i64>> {
        fn rec(remaining: i64, parts: usize, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if parts == 0 {
                out.push(prefix.clone());
                return;
            }
            for v in 0..=remaining {
                prefix.push(v);
                rec(remaining - v, parts - 1, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if total_max >= 0 {
            rec(total_max, parts, &mut Vec::new(), &mut out);
        }
        out
    }
    let per_column: Vec<Vec<Vec<i64>>> =
        (0..d).map(|j| compositions(n[j] - r[j], d - 1)).collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; d];
    if per_column.iter().any(|c| c.is_empty()) {
        return out;
    }
    loop {
        let mut k = vec![vec![0i64; d]; d];
        for j in 0..d {
            let col = &per_column[j][choice[j]];
            let mut idx = 0;
            for i in 0..d {
                if i != j {
                    k[i][j] = col[idx];
                    idx += 1;
                }
            }
        }
        for j in 0..d {
            let colsum: i64 = (0..d).filter(|&i| i != j).map(|i| k[i][j]).sum();
            k[j][j] = -(r[j] + colsum);
        }
        out.push(k);
        let mut carry = 0;
        while carry < d {
            choice[carry] += 1;
            if choice[carry] < per_column[carry].len() {
                break;
            }
            choice[carry] = 0;
            carry += 1;
        }
        if carry == d {
            return out;
        }
    }
}

/// Marginal law of the progeny totals, summing the joint law over all
/// admissible off-diagonal matrices.
pub fn marginal_progeny_law(law: &OffspringLaw, r: &[i64], n: &[i64]) -> Result<BigRational> {
    marginal_progeny_law_with_cap(law, r, n, DEFAULT_SUPPORT_CAP)
}

pub fn marginal_progeny_law_with_cap(
    law: &OffspringLaw,
    r: &[i64],
    n: &[i64],
    cap: usize,
) -> Result<BigRational> {
    let d = law.d();
    if r.len() != d || n.len() != d {
        return Err(Error::Parse("dimension mismatch".into()));
    }
    if r.iter().any(|&v| v < 0) || r.iter().sum::<i64>() < 1 {
        return Err(Error::Hypothesis("roots must be nonnegative with at least one".into()));
    }
    if n.iter().any(|&v| v < 0) {
        return Err(Error::Hypothesis("negative progeny total".into()));
    }
    if (0..d).any(|j| n[j] < r[j]) {
        return Ok(BigRational::zero());
    }
    let tables: Vec<SparseDist> = (0..d)
        .map(|i| convolution_power(law.support(i), n[i] as usize, cap))
        .collect::<Result<Vec<_>>>()?;
    let mut total = BigRational::zero();
    for k in admissible_matrices(r, n) {
        total += progeny_term(&tables, r, n, &k);
    }
    Ok(total)
}

/// Single-type total-progeny law: probability that `k` ancestors leave
/// a total of `n` individuals.
pub fn otter_dwass(law: &OffspringLaw, k: usize, n: usize) -> Result<BigRational> {
    if law.d() != 1 {
        return Err(Error::InvalidLaw("single-type law required".into()));
    }
    if k < 1 || k > n {
        return Err(Error::Hypothesis(format!("need 1 <= k <= n, got k={k} n={n}")));
    }
    let table = law_convolution_power(law, 0, n)?;
    let at = table.get(&vec![n - k]).cloned().unwrap_or_else(BigRational::zero);
    Ok(BigRational::new(BigInt::from(k), BigInt::from(n)) * at)
}

/// Two-type regime detection for the reducible closed forms.
fn two_type_means(law: &OffspringLaw) -> Result<Vec<Vec<BigRational>>> {
    if law.d() != 2 {
        return Err(Error::InvalidLaw("two-type law required".into()));
    }
    Ok(law.mean_matrix())
}

/// Reducible case with a sterile second type: both progeny totals in
/// one shot, first type seeding everything.
pub fn reducible_sterile_second(
    law: &OffspringLaw,
    r1: i64,
    n1: i64,
    n2: i64,
) -> Result<BigRational> {
    let m = two_type_means(law)?;
    let one = BigRational::one();
    if !(m[0][1].is_positive()
        && m[0][0].is_positive()
        && m[0][0] <= one
        && m[1][0].is_zero()
        && m[1][1].is_zero())
    {
        return Err(Error::RegimeMismatch(
            "needs type 2 sterile and type 1 self-mean in (0, 1]".into(),
        ));
    }
    if !(1 <= r1 && r1 <= n1) || n2 < 0 {
        return Err(Error::Hypothesis(format!("need 1 <= r1 <= n1 and n2 >= 0, got {r1}, {n1}, {n2}")));
    }
    let table = law_convolution_power(law, 0, n1 as usize)?;
    let at = table
        .get(&vec![(n1 - r1) as usize, n2 as usize])
        .cloned()
        .unwrap_or_else(BigRational::zero);
    Ok(BigRational::new(BigInt::from(r1), BigInt::from(n1)) * at)
}

/// Reducible cascade case: the second type reproduces among itself but
/// never produces type 1.
pub fn reducible_cascade(law: &OffspringLaw, r1: i64, n1: i64, n2: i64) -> Result<BigRational> {
    let m = two_type_means(law)?;
    let one = BigRational::one();
    if !(m[0][1].is_positive()
        && m[0][0].is_positive()
        && m[0][0] <= one
        && m[1][0].is_zero()
        && m[1][1].is_positive()
        && m[1][1] <= one)
    {
        return Err(Error::RegimeMismatch(
            "needs type 2 self-sustaining but not producing type 1".into(),
        ));
    }
    if !(1 <= r1 && r1 <= n1) || n2 < 1 {
        return Err(Error::Hypothesis(format!("need 1 <= r1 <= n1 and n2 >= 1, got {r1}, {n1}, {n2}")));
    }
    let t1 = law_convolution_power(law, 0, n1 as usize)?;
    let t2 = law_convolution_power(law, 1, n2 as usize)?;
    let mut sum = BigRational::zero();
    for j in 0..=n2 {
        let a = t1
            .get(&vec![(n1 - r1) as usize, j as usize])
            .cloned()
            .unwrap_or_else(BigRational::zero);
        if a.is_zero() {
            continue;
        }
        let b = t2
            .get(&vec![0usize, (n2 - j) as usize])
            .cloned()
            .unwrap_or_else(BigRational::zero);
        sum += BigRational::from_integer(BigInt::from(j)) * a * b;
    }
    Ok(BigRational::new(BigInt::from(r1), BigInt::from(n1) * BigInt::from(n2)) * sum)
}

/// Dispatches to the reducible closed form matching the law's mean
/// pattern.
pub fn reducible_two_type(law: &OffspringLaw, r1: i64, n1: i64, n2: i64) -> Result<BigRational> {
    let m = two_type_means(law)?;
    if m[1][0].is_zero() && m[1][1].is_zero() {
        reducible_sterile_second(law, r1, n1, n2)
    } else {
        reducible_cascade(law, r1, n1, n2)
    }
}

/// Expected total progeny per type from roots `r`, for subcritical
/// laws: the row vector `r (I - M)^{-1}`.
pub fn expected_progeny(law: &OffspringLaw, r: &[i64]) -> Result<Vec<BigRational>> {
    let d = law.d();
    let m = law.mean_matrix();
    let one = BigRational::one();
    // transpose of (I - M), one solve per right-hand side basis handled jointly
    let a: Vec<Vec<BigRational>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let mut e = -m[j][i].clone();
                    if i == j {
                        e += &one;
                    }
                    e
                })
                .collect()
        })
        .collect();
    let b: Vec<BigRational> =
        r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect();
    solve_linear(&a, &b)
        .ok_or_else(|| Error::Hypothesis("mean matrix has spectral radius one or above".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_one_type() -> OffspringLaw {
        OffspringLaw::from_parts(1, &[&[(&[0], "1/2"), (&[2], "1/2")]]).unwrap()
    }

    fn swap_law() -> OffspringLaw {
        OffspringLaw::from_parts(2, &[&[(&[0, 1], "1")], &[(&[1, 0], "1")]]).unwrap()
    }

    fn critical_exchange() -> OffspringLaw {
        OffspringLaw::from_parts(
            2,
            &[&[(&[0, 0], "1/2"), (&[0, 2], "1/2")], &[(&[0, 0], "1/2"), (&[2, 0], "1/2")]],
        )
        .unwrap()
    }

    #[test]
    fn law_validation() {
        assert!(OffspringLaw::from_parts(1, &[&[(&[0], "1/3")]]).is_err());
        assert!(OffspringLaw::from_parts(1, &[&[(&[0], "-1"), (&[1], "2")]]).is_err());
        assert!(OffspringLaw::from_parts(2, &[&[(&[0], "1")], &[(&[0, 0], "1")]]).is_err());
    }

    #[test]
    fn convolution_zeroth_power_is_point_mass() {
        let law = binary_one_type();
        let t = law_convolution_power(&law, 0, 0).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t[&vec![0usize]].is_one());
    }

    #[test]
    fn convolution_of_point_mass() {
        let law = OffspringLaw::from_parts(2, &[&[(&[1, 2], "1")], &[(&[0, 0], "1")]]).unwrap();
        let t = law_convolution_power(&law, 0, 3).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t[&vec![3usize, 6]].is_one());
    }

    #[test]
    fn convolution_binary_cube() {
        let law = binary_one_type();
        let t = law_convolution_power(&law, 0, 3).unwrap();
        assert_eq!(t[&vec![2usize]], exact::parse_rational("3/8").unwrap());
    }

    #[test]
    fn support_cap_guard() {
        let law = OffspringLaw::from_parts(
            1,
            &[&[(&[0], "1/2"), (&[1], "1/4"), (&[2], "1/4")]],
        )
        .unwrap();
        assert!(matches!(
            convolution_power(law.support(0), 40, 10),
            Err(Error::SupportCapExceeded { cap: 10 })
        ));
    }

    #[test]
    fn classify_zero_law_subcritical() {
        let law = OffspringLaw::from_parts(2, &[&[(&[0, 0], "1")], &[(&[0, 0], "1")]]).unwrap();
        let c = classify(&law).unwrap();
        assert_eq!(c.regime, Regime::Subcritical);
        assert!(!c.degenerate);
        assert!(c.rho.1.is_zero());
    }

    #[test]
    fn classify_swap_critical_and_degenerate() {
        let c = classify(&swap_law()).unwrap();
        assert_eq!(c.regime, Regime::Critical);
        assert!(c.irreducible);
        assert!(c.degenerate);
        assert!(c.rho.0.is_one() && c.rho.1.is_one());
    }

    #[test]
    fn classify_critical_exchange() {
        let c = classify(&critical_exchange()).unwrap();
        assert_eq!(c.regime, Regime::Critical);
        assert!(c.irreducible);
        assert!(!c.degenerate);
    }

    #[test]
    fn classify_supercritical() {
        let law = OffspringLaw::from_parts(1, &[&[(&[0], "1/3"), (&[2], "2/3")]]).unwrap();
        let c = classify(&law).unwrap();
        assert_eq!(c.regime, Regime::Supercritical);
    }

    #[test]
    fn classify_reducible() {
        let law = OffspringLaw::from_parts(
            2,
            &[&[(&[0, 0], "1/2"), (&[1, 1], "1/2")], &[(&[0, 0], "2/3"), (&[0, 1], "1/3")]],
        )
        .unwrap();
        let c = classify(&law).unwrap();
        assert!(!c.irreducible);
        assert_eq!(c.regime, Regime::Subcritical);
    }

    #[test]
    fn progeny_law_forced_forest() {
        // type 1 bears exactly one type-2 child, type 2 bears nothing
        let law = OffspringLaw::from_parts(2, &[&[(&[0, 1], "1")], &[(&[0, 0], "1")]]).unwrap();
        let k = vec![vec![-1, 1], vec![0, -1]];
        let p = progeny_law(&law, &[1, 0], &[1, 1], &k).unwrap();
        assert!(p.is_one());
    }

    #[test]
    fn progeny_law_unreachable_event() {
        let law = critical_exchange();
        // one type-1 vertex cannot parent three type-2 children
        let k = vec![vec![-1, 3], vec![0, -3]];
        let p = progeny_law(&law, &[1, 0], &[1, 3], &k).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn progeny_law_rejects_bad_hypotheses() {
        let law = critical_exchange();
        let k = vec![vec![-1, 1], vec![0, -1]];
        assert!(progeny_law(&law, &[0, 0], &[1, 1], &k).is_err());
        assert!(progeny_law(&law, &[1, 0], &[0, 1], &k).is_err());
    }

    #[test]
    fn zero_total_types_need_zero_rows() {
        // a type with zero progeny total cannot have parented anyone:
        // the zeroth convolution power is a point mass at the origin,
        // so a nonzero row entry kills the probability
        let law = critical_exchange();
        let k = vec![vec![-2, 0], vec![1, 0]];
        let p = progeny_law(&law, &[1, 0], &[2, 0], &k).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn marginal_single_vertex() {
        let law = critical_exchange();
        let p = marginal_progeny_law(&law, &[1, 0], &[1, 0]).unwrap();
        assert_eq!(p, exact::parse_rational("1/2").unwrap());
    }

    #[test]
    fn marginal_mass_bounded_and_monotone() {
        let law = critical_exchange();
        let mut prev = BigRational::zero();
        for cap in 1..=6i64 {
            let mut total = BigRational::zero();
            for n1 in 0..=cap {
                for n2 in 0..=(cap - n1) {
                    if n1 + n2 == 0 {
                        continue;
                    }
                    total += marginal_progeny_law(&law, &[1, 0], &[n1, n2]).unwrap();
                }
            }
            assert!(total <= BigRational::one());
            assert!(total >= prev);
            prev = total;
        }
    }

    #[test]
    fn otter_dwass_examples() {
        let law = binary_one_type();
        assert_eq!(otter_dwass(&law, 1, 3).unwrap(), exact::parse_rational("1/8").unwrap());
        // all roots childless
        assert_eq!(otter_dwass(&law, 4, 4).unwrap(), exact::parse_rational("1/16").unwrap());
        // parity: even totals from one root are impossible
        assert!(otter_dwass(&law, 1, 4).unwrap().is_zero());
        assert!(otter_dwass(&law, 0, 3).is_err());
    }

    #[test]
    fn reducible_sterile_examples() {
        let law = OffspringLaw::from_parts(
            2,
            &[&[(&[0, 0], "1/2"), (&[1, 1], "1/2")], &[(&[0, 0], "1")]],
        )
        .unwrap();
        // childless root
        let p = reducible_sterile_second(&law, 2, 2, 0).unwrap();
        assert_eq!(p, exact::parse_rational("1/4").unwrap());
        // regime check rejects the wrong law
        assert!(reducible_sterile_second(&critical_exchange(), 1, 2, 1).is_err());
    }

    #[test]
    fn reducible_sterile_sums_to_single_type_marginal() {
        let law = OffspringLaw::from_parts(
            2,
            &[&[(&[0, 0], "1/2"), (&[1, 1], "1/2")], &[(&[0, 0], "1")]],
        )
        .unwrap();
        // marginal of the first coordinate: 0 or 1 child, half each
        let marginal = OffspringLaw::from_parts(1, &[&[(&[0], "1/2"), (&[1], "1/2")]]).unwrap();
        for n1 in 1..=6i64 {
            let mut sum = BigRational::zero();
            for n2 in 0..=n1 {
                sum += reducible_sterile_second(&law, 1, n1, n2).unwrap();
            }
            assert_eq!(sum, otter_dwass(&marginal, 1, n1 as usize).unwrap());
        }
    }

    #[test]
    fn expected_progeny_geometric_chain() {
        // single type, mean 1/2: expected progeny from one root is 2
        let law = OffspringLaw::from_parts(1, &[&[(&[0], "1/2"), (&[1], "1/2")]]).unwrap();
        let e = expected_progeny(&law, &[1]).unwrap();
        assert_eq!(e[0], BigRational::from_integer(2.into()));
    }
}
