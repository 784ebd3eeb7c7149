//! Arbitrary-precision helpers shared by the counting and probability
//! modules: factorials, binomials, exact determinants and `p/q` parsing.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Memoized factorial table.
pub struct Factorials {
    table: Vec<BigInt>,
}

impl Factorials {
    pub fn new() -> Self {
        Factorials { table: vec![BigInt::one()] }
    }

    pub fn get(&mut self, n: usize) -> BigInt {
        while self.table.len() <= n {
            let k = self.table.len();
            let next = &self.table[k - 1] * BigInt::from(k);
            self.table.push(next);
        }
        self.table[n].clone()
    }
}

impl Default for Factorials {
    fn default() -> Self {
        Self::new()
    }
}

/// Binomial coefficient with the usual out-of-range convention:
/// zero when `k < 0` or `k > n`, and zero for `n < 0` (negative upper
/// arguments do not occur in the counting formulas here).
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..k {
        num *= BigInt::from(n - j);
        den *= BigInt::from(j + 1);
    }
    num / den
}

/// Exact integer determinant by fraction-free (Bareiss) elimination.
pub fn determinant(matrix: &[Vec<BigInt>]) -> BigInt {
    let n = matrix.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = matrix.to_vec();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let swap = (k + 1..n).find(|&r| !m[r][k].is_zero());
            match swap {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                // Bareiss guarantees exact divisibility by the previous pivot.
                m[i][j] = t / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Determinant of an `i64` matrix, exact.
pub fn determinant_i64(matrix: &[Vec<i64>]) -> BigInt {
    let m: Vec<Vec<BigInt>> =
        matrix.iter().map(|row| row.iter().map(|&e| BigInt::from(e)).collect()).collect();
    determinant(&m)
}

/// Divides `num` by `den` asserting the quotient is an integer; counting
/// formulas must clear their denominators exactly.
pub fn exact_div(num: BigInt, den: BigInt) -> Result<BigInt> {
    if den.is_zero() {
        return Err(Error::Hypothesis("division by zero in closed form".into()));
    }
    let (q, r) = num_integer::Integer::div_rem(&num, &den);
    if !r.is_zero() {
        return Err(Error::Hypothesis(format!(
            "closed form did not clear its denominator: {num} / {den}"
        )));
    }
    let _ = num;
    Ok(q)
}

/// Parses an exact rational from `p`, `p/q`, or a leading-sign variant.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let mk_err = || Error::Parse(format!("bad rational literal {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| mk_err())?;
    let d: BigInt = den.parse().map_err(|_| mk_err())?;
    if d.is_zero() {
        return Err(mk_err());
    }
    Ok(BigRational::new(n, d))
}

/// Renders a rational as `p/q` (or `p` when the denominator is one).
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Renders a rational as `p/q` with the denominator always spelled out.
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Decimal rendering for reports; exact values stay authoritative.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let scale = BigInt::from(1u64 << 53);
        let scaled = (r * BigRational::from_integer(scale.clone())).round();
        scaled.numer().to_f64().unwrap_or(if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }) / (1u64 << 53) as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_table() {
        let mut f = Factorials::new();
        assert_eq!(f.get(0), BigInt::from(1));
        assert_eq!(f.get(5), BigInt::from(120));
        assert_eq!(f.get(3), BigInt::from(6));
    }

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(5, 0), BigInt::from(1));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(binomial(3, -1), BigInt::zero());
        assert_eq!(binomial(0, 0), BigInt::from(1));
    }

    #[test]
    fn determinant_small() {
        assert_eq!(determinant_i64(&[vec![1, -1], vec![0, 1]]), BigInt::from(1));
        assert_eq!(determinant_i64(&[vec![2, 1], vec![1, 2]]), BigInt::from(3));
        // singular
        assert_eq!(determinant_i64(&[vec![1, 2], vec![2, 4]]), BigInt::zero());
        // empty matrix has determinant one by convention
        assert_eq!(determinant(&[]), BigInt::one());
        // needs a row swap
        assert_eq!(determinant_i64(&[vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        let m = vec![vec![2, 0, 1], vec![1, 3, 2], vec![0, 1, 4]];
        assert_eq!(determinant_i64(&m), BigInt::from(21));
    }

    #[test]
    fn rational_round_trip() {
        let r = parse_rational("3/8").unwrap();
        assert_eq!(format_rational(&r), "3/8");
        assert_eq!(format_rational(&parse_rational("4/2").unwrap()), "2");
        assert_eq!(format_rational(&parse_rational("-1/3").unwrap()), "-1/3");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn exact_div_checks() {
        assert_eq!(exact_div(BigInt::from(12), BigInt::from(4)).unwrap(), BigInt::from(3));
        assert!(exact_div(BigInt::from(7), BigInt::from(2)).is_err());
    }
}
