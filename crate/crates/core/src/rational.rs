//! Exact rational scalars and the small amount of exact linear algebra the
//! combinatorial side of the crate needs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Exact binary value of a finite float.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: scale down before dividing.
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn vec_to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"-0.25"`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Ok(p) = s.parse::<BigInt>() {
        return Ok(Rational::from_integer(p));
    }
    // Decimal literal: read it digit-exactly rather than through f64.
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').ok_or_else(bad)?;
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || whole.len() + frac.len() == 0 {
        return Err(bad());
    }
    let digits: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let q = Rational::new(digits, denom);
    Ok(if neg { -q } else { q })
}

pub fn format(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Serde adapter: rationals travel as `"p/q"` strings; integer JSON numbers
/// are accepted on input.
pub mod serde_rational {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Str(String),
        Int(i64),
    }

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Str(s) => parse(&s).map_err(serde::de::Error::custom),
            Raw::Int(i) => Ok(int(i)),
        }
    }
}

pub mod serde_rational_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    #[derive(Deserialize)]
    struct Wrapped(#[serde(with = "super::serde_rational")] Rational);

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&format(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let raw: Vec<Wrapped> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|w| w.0).collect())
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_int(a: &[i64], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| y * BigInt::from(*x)).sum()
}

/// Solves the square system `rows · x = rhs` exactly; `None` when singular.
pub fn solve(rows: &[Vec<Rational>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    let n = rows.len();
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut r = r.clone();
            r.push(b.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for k in col..=n {
            m[col][k] = &m[col][k] * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for k in col..=n {
                    let delta = &factor * &m[col][k];
                    m[r][k] -= delta;
                }
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

pub fn det(rows: &[Vec<Rational>]) -> Rational {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut acc = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            m.swap(col, pivot);
            acc = -acc;
        }
        acc *= &m[col][col];
        for r in col + 1..n {
            if !m[r][col].is_zero() {
                let factor = &m[r][col] / &m[col][col];
                for k in col..n {
                    let delta = &factor * &m[col][k];
                    m[r][k] -= delta;
                }
            }
        }
    }
    acc
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut m = rows.to_vec();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if !m[i][c].is_zero() {
                let factor = &m[i][c] / &m[r][c];
                for k in c..cols {
                    let delta = &factor * &m[r][k];
                    m[i][k] -= delta;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Affine dimension of a point set (−1 encoded as `None` for the empty set).
pub fn affine_dim(points: &[&Vec<Rational>]) -> Option<usize> {
    let (first, rest) = points.split_first()?;
    let diffs: Vec<Vec<Rational>> =
        rest.iter().map(|p| p.iter().zip(first.iter()).map(|(a, b)| a - b).collect()).collect();
    Some(rank(&diffs))
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}
