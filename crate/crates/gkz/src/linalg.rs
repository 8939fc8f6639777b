//! Dense exact linear algebra over `BigRational` and `BigInt`.

#![allow(clippy::needless_range_loop)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{GkzError, Result};

pub type Q = BigRational;
pub type Z = BigInt;
pub type QMat = Vec<Vec<Q>>;
pub type ZMat = Vec<Vec<Z>>;

pub fn qi(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qz(v: &Z) -> Q {
    Q::from_integer(v.clone())
}

/// Parses "p/q", "p" or a finite decimal such as "-0.25".
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || GkzError::InvalidInput(format!("not a rational: {s:?}"));
    if let Some((a, b)) = t.split_once('/') {
        let num: Z = a.trim().parse().map_err(|_| bad())?;
        let den: Z = b.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(num, den));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let ip: Z = if ip.is_empty() { Z::zero() } else { ip.parse().map_err(|_| bad())? };
        let scale = num_traits::pow(Z::from(10), fp.len());
        let frac: Z = fp.parse().map_err(|_| bad())?;
        let mut v = Q::new(ip * &scale + frac, scale);
        if neg {
            v = -v;
        }
        return Ok(v);
    }
    let num: Z = t.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(num))
}

pub fn fmt_q(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn q_to_f64(v: &Q) -> f64 {
    match (v.numer().to_f64(), v.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            // huge numerator/denominator: scale down first
            let shift = v.numer().bits().max(v.denom().bits()).saturating_sub(1000);
            let a = (v.numer() >> shift).to_f64().unwrap_or(0.0);
            let b = (v.denom() >> shift).to_f64().unwrap_or(1.0);
            a / b
        }
    }
}

pub fn zmat_to_q(m: &ZMat) -> QMat {
    m.iter().map(|r| r.iter().map(qz).collect()).collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn mat_vec(m: &QMat, v: &[Q]) -> Vec<Q> {
    m.iter().map(|r| dot(r, v)).collect()
}

pub fn vec_mat(v: &[Q], m: &QMat) -> Vec<Q> {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols).map(|j| v.iter().zip(m).fold(Q::zero(), |acc, (x, r)| acc + x * &r[j])).collect()
}

pub fn mat_mul(a: &QMat, b: &QMat) -> QMat {
    a.iter().map(|r| vec_mat(r, b)).collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn identity(n: usize) -> QMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut QMat) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &QMat) -> usize {
    let mut w = m.clone();
    rref(&mut w).len()
}

pub fn det(m: &QMat) -> Q {
    let n = m.len();
    let mut w = m.clone();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !w[i][c].is_zero()) else { return Q::zero() };
        if p != c {
            w.swap(p, c);
            d = -d;
        }
        d *= &w[c][c];
        for i in c + 1..n {
            if !w[i][c].is_zero() {
                let f = &w[i][c] / &w[c][c];
                for j in c..n {
                    let t = &f * &w[c][j];
                    w[i][j] -= t;
                }
            }
        }
    }
    d
}

pub fn inverse(m: &QMat) -> Option<QMat> {
    let n = m.len();
    let mut aug: QMat = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            row
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `m x = b` for square nonsingular `m`.
pub fn solve(m: &QMat, b: &[Q]) -> Option<Vec<Q>> {
    inverse(m).map(|inv| mat_vec(&inv, b))
}

/// Basis of the rational null space of `m` (columns as vectors).
pub fn nullspace(m: &QMat) -> Vec<Vec<Q>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut w = m.clone();
    let piv = rref(&mut w);
    let free: Vec<usize> = (0..cols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (r, &p) in piv.iter().enumerate() {
                v[p] = -w[r][f].clone();
            }
            v
        })
        .collect()
}

/// Scales a rational vector to a primitive integer vector (same direction).
pub fn primitive(v: &[Q]) -> Vec<Z> {
    let l = v.iter().fold(Z::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<Z> = v.iter().map(|x| (x * qz(&l)).to_integer()).collect();
    let g = ints.iter().fold(Z::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

pub fn is_integral(v: &[Q]) -> bool {
    v.iter().all(|x| x.is_integer())
}

/// Column-style Hermite reduction: returns (H, U) with `a * U = H`,
/// U unimodular and H lower echelon with the zero columns last.
pub fn column_hermite(a: &ZMat) -> (ZMat, ZMat) {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut h = a.clone();
    let mut u: ZMat = (0..cols).map(|i| (0..cols).map(|j| if i == j { Z::one() } else { Z::zero() }).collect()).collect();
    let col_op = |m: &mut ZMat, i: usize, j: usize, a: &Z, b: &Z, c: &Z, d: &Z| {
        // (col_i, col_j) <- (a col_i + b col_j, c col_i + d col_j)
        for r in m.iter_mut() {
            let x = r[i].clone();
            let y = r[j].clone();
            r[i] = a * &x + b * &y;
            r[j] = c * &x + d * &y;
        }
    };
    let mut pc = 0;
    for r in 0..rows {
        if pc == cols {
            break;
        }
        for j in pc + 1..cols {
            if h[r][j].is_zero() {
                continue;
            }
            let x = h[r][pc].clone();
            let y = h[r][j].clone();
            let e = x.extended_gcd(&y);
            let g = e.gcd;
            let (s, t) = (e.x, e.y);
            let xg = &x / &g;
            let yg = &y / &g;
            let ny = -&yg;
            col_op(&mut h, pc, j, &s, &t, &ny, &xg);
            col_op(&mut u, pc, j, &s, &t, &ny, &xg);
        }
        if h[r][pc].is_zero() {
            continue;
        }
        if h[r][pc].is_negative() {
            for m in [&mut h, &mut u] {
                for row in m.iter_mut() {
                    row[pc] = -row[pc].clone();
                }
            }
        }
        pc += 1;
    }
    (h, u)
}

/// Diagonal of the Smith normal form (nonzero elementary divisors).
pub fn smith_diagonal(a: &ZMat) -> Vec<Z> {
    let mut m = a.clone();
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[i][j].is_zero() && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        m.swap(t, bi);
        for r in m.iter_mut() {
            r.swap(t, bj);
        }
        loop {
            let mut dirty = false;
            let p = m[t][t].clone();
            for i in t + 1..rows {
                let q = m[i][t].div_floor(&p);
                if !q.is_zero() {
                    for j in t..cols {
                        let d = &q * &m[t][j];
                        m[i][j] -= d;
                    }
                }
                if !m[i][t].is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                let q = m[t][j].div_floor(&p);
                if !q.is_zero() {
                    for i in t..rows {
                        let d = &q * &m[i][t];
                        m[i][j] -= d;
                    }
                }
                if !m[t][j].is_zero() {
                    dirty = true;
                }
            }
            if !dirty {
                // divisibility of the remaining block
                let mut fix = None;
                'outer: for i in t + 1..rows {
                    for j in t + 1..cols {
                        if !m[i][j].is_multiple_of(&p) {
                            fix = Some(i);
                            break 'outer;
                        }
                    }
                }
                match fix {
                    None => break,
                    Some(i) => {
                        for j in t..cols {
                            let v = m[i][j].clone();
                            m[t][j] += v;
                        }
                        continue;
                    }
                }
            }
            // move the smallest nonzero of row/column t to the pivot
            let mut best = (t, t);
            for i in t..rows {
                if !m[i][t].is_zero() && m[i][t].abs() < m[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if !m[t][j].is_zero() && m[t][j].abs() < m[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            m.swap(t, best.0);
            for r in m.iter_mut() {
                r.swap(t, best.1);
            }
        }
        diag.push(m[t][t].abs());
        t += 1;
    }
    diag
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zm(rows: &[&[i64]]) -> ZMat {
        rows.iter().map(|r| r.iter().map(|&x| Z::from(x)).collect()).collect()
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_q("3/6").unwrap(), qf(1, 2));
        assert_eq!(parse_q("-0.25").unwrap(), qf(-1, 4));
        assert_eq!(parse_q(" 7 ").unwrap(), qi(7));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
        assert_eq!(fmt_q(&qf(-2, 4)), "-1/2");
    }

    #[test]
    fn inverse_roundtrip() {
        let m = zmat_to_q(&zm(&[&[1, 1, 1], &[0, 2, 0], &[0, 0, 1]]));
        let inv = inverse(&m).unwrap();
        assert_eq!(mat_mul(&inv, &m), identity(3));
        assert_eq!(det(&m), qi(2));
    }

    #[test]
    fn smith_small() {
        assert_eq!(smith_diagonal(&zm(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]])), vec![Z::from(2), Z::from(6), Z::from(12)]);
        assert_eq!(smith_diagonal(&zm(&[&[2, 0]])), vec![Z::from(2)]);
    }

    #[test]
    fn hermite_kernel_columns() {
        let a = zm(&[&[1, 1, 1, 1, 1], &[0, 1, 2, 0, 0], &[0, 0, 0, 1, -1]]);
        let (h, u) = column_hermite(&a);
        for r in &h {
            assert!(r[3].is_zero() && r[4].is_zero());
        }
        for j in 3..5 {
            for row in &a {
                let s: Z = row.iter().zip(&u).map(|(x, ur)| x * &ur[j]).sum();
                assert!(s.is_zero());
            }
        }
    }
}
