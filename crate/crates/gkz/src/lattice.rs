//! Configurations, simplices and the lattice quotients attached to them.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GkzError, Result};
use crate::linalg::{self, qi, QMat, ZMat, Q, Z};

/// The integer n x N matrix A. Columns are labelled 1..=N.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    n: usize,
    big_n: usize,
    rows: Vec<Vec<i64>>,
    cols: Vec<Vec<Q>>,
    phi: Option<Vec<Q>>,
}

#[derive(Serialize, Deserialize)]
struct ConfigurationJson {
    n: usize,
    #[serde(rename = "N")]
    big_n: usize,
    rows: Vec<Vec<i64>>,
}

impl Serialize for Configuration {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConfigurationJson { n: self.n, big_n: self.big_n, rows: self.rows.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ConfigurationJson::deserialize(d)?;
        if j.rows.len() != j.n || j.rows.iter().any(|r| r.len() != j.big_n) {
            return Err(serde::de::Error::custom("row/column counts do not match n, N"));
        }
        Configuration::new(j.rows).map_err(serde::de::Error::custom)
    }
}

impl Configuration {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        let big_n = rows.first().map_or(0, |r| r.len());
        if n == 0 || rows.iter().any(|r| r.len() != big_n) {
            return Err(GkzError::InvalidConfiguration("ragged or empty matrix".into()));
        }
        if n >= big_n {
            return Err(GkzError::InvalidConfiguration(format!("need n < N, got {n}x{big_n}")));
        }
        let qrows: QMat = rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect();
        if linalg::rank(&qrows) != n {
            return Err(GkzError::InvalidConfiguration("rank of A is less than n".into()));
        }
        let cols = linalg::transpose(&qrows);
        // phi . a(j) = 1 for all j
        let mut aug: QMat = cols
            .iter()
            .map(|c| {
                let mut r = c.clone();
                r.push(Q::one());
                r
            })
            .collect();
        let piv = linalg::rref(&mut aug);
        let phi = if piv.contains(&n) {
            None
        } else {
            let mut phi = vec![Q::zero(); n];
            for (r, &p) in piv.iter().enumerate() {
                phi[p] = aug[r][n].clone();
            }
            Some(phi)
        };
        Ok(Configuration { n, big_n, rows, cols, phi })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| GkzError::InvalidInput(e.to_string()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn big_n(&self) -> usize {
        self.big_n
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    /// Column a(j), `j` 1-based.
    pub fn col(&self, j: usize) -> &[Q] {
        &self.cols[j - 1]
    }

    pub fn col_i64(&self, j: usize) -> Vec<i64> {
        self.rows.iter().map(|r| r[j - 1]).collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        (1..=self.big_n).collect()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.phi.is_some()
    }

    /// The functional phi with phi . a(j) = 1, if any.
    pub fn homogeneity(&self) -> Option<&[Q]> {
        self.phi.as_deref()
    }

    /// Submatrix with the given columns, as a rational n x |cols| matrix.
    pub fn submatrix(&self, cols: &[usize]) -> QMat {
        (0..self.n).map(|i| cols.iter().map(|&j| self.cols[j - 1][i].clone()).collect()).collect()
    }

    pub fn zmatrix(&self) -> ZMat {
        self.rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    pub fn check_labels(&self, set: &[usize]) -> Result<()> {
        for &j in set {
            if j == 0 || j > self.big_n {
                return Err(GkzError::InvalidInput(format!("column label {j} out of range 1..={}", self.big_n)));
            }
        }
        Ok(())
    }
}

/// A simplex sigma with its exact inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexData {
    pub sigma: Vec<usize>,
    pub inv: QMat,
    pub det: Q,
}

impl SimplexData {
    pub fn det_abs(&self) -> Z {
        self.det.abs().to_integer()
    }

    /// r_sigma as a machine integer.
    pub fn r(&self) -> usize {
        self.det_abs().to_usize().expect("simplex volume fits usize")
    }

    pub fn position(&self, i: usize) -> Option<usize> {
        self.sigma.iter().position(|&s| s == i)
    }

    /// A_sigma^{-1} v.
    pub fn coords(&self, v: &[Q]) -> Vec<Q> {
        linalg::mat_vec(&self.inv, v)
    }

    pub fn contains(&self, j: usize) -> bool {
        self.sigma.contains(&j)
    }
}

pub fn simplex_data(a: &Configuration, sigma: &[usize]) -> Result<SimplexData> {
    a.check_labels(sigma)?;
    let mut s = sigma.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != a.n() {
        return Err(GkzError::InvalidInput(format!("simplex {sigma:?} must have {} columns", a.n())));
    }
    let m = a.submatrix(&s);
    let det = linalg::det(&m);
    if det.is_zero() {
        return Err(GkzError::DegenerateSimplex(s));
    }
    let inv = linalg::inverse(&m).ok_or_else(|| GkzError::DegenerateSimplex(s.clone()))?;
    Ok(SimplexData { sigma: s, inv, det })
}

/// p_{sigma i}(v): the entry of A_sigma^{-1} v at column label `i`.
pub fn p(sd: &SimplexData, i: usize, v: &[Q]) -> Result<Q> {
    let k = sd.position(i).ok_or_else(|| GkzError::IndexNotInSimplex(i, sd.sigma.clone()))?;
    Ok(linalg::dot(&sd.inv[k], v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientReps {
    pub sigma: Vec<usize>,
    pub reps: Vec<Vec<i64>>,
    /// Column used for the sector normalization, if any.
    pub j0: Option<usize>,
}

/// True when k1 - k2 lies in Z tA_sigma.
pub fn same_class(sd: &SimplexData, k1: &[i64], k2: &[i64]) -> bool {
    let d: Vec<Q> = k1.iter().zip(k2).map(|(x, y)| qi(x - y)).collect();
    // w = tA_sigma^{-1} d
    let n = d.len();
    (0..n).all(|j| (0..n).fold(Q::zero(), |acc, i| acc + &sd.inv[i][j] * &d[i]).is_integer())
}

/// The w with k1 - k2 = tA_sigma w.
pub fn class_difference(sd: &SimplexData, k1: &[i64], k2: &[i64]) -> Vec<Q> {
    let n = k1.len();
    (0..n).map(|j| (0..n).fold(Q::zero(), |acc, i| acc + &sd.inv[i][j] * qi(k1[i] - k2[i]))).collect()
}

/// sum_i k_i p_{sigma i}(a(j0)).
pub fn sector_level(a: &Configuration, sd: &SimplexData, k: &[i64], j0: usize) -> Q {
    let pa = sd.coords(a.col(j0));
    k.iter().zip(&pa).fold(Q::zero(), |acc, (&x, y)| acc + qi(x) * y)
}

/// Shifts `k` by a multiple of 1_sigma into the window 0 <= level < 1.
pub fn normalize_rep(a: &Configuration, sd: &SimplexData, k: &[i64], j0: usize) -> Result<Vec<i64>> {
    if !a.is_homogeneous() {
        return Err(GkzError::NormalizationImpossible);
    }
    let level = sector_level(a, sd, k, j0);
    let t = -level.floor().to_integer().to_i64().ok_or_else(|| GkzError::Internal("shift overflow".into()))?;
    let shifted: Vec<i64> = k.iter().map(|x| x + t).collect();
    if !same_class(sd, k, &shifted) {
        return Err(GkzError::NormalizationImpossible);
    }
    Ok(shifted)
}

fn compositions_desc(total: usize, parts: usize, cap: usize, out: &mut Vec<Vec<i64>>) {
    fn rec(rem: usize, left: usize, cap: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if left == 1 {
            if rem < cap {
                cur.push(rem as i64);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for v in (0..=rem.min(cap.saturating_sub(1))).rev() {
            cur.push(v as i64);
            rec(rem - v, left - 1, cap, cur, out);
            cur.pop();
        }
    }
    rec(total, parts, cap, &mut Vec::new(), out);
}

/// A complete system of representatives of Z^sigma / Z tA_sigma.
///
/// Representatives are the first hits in the order (coordinate sum, then
/// descending lexicographic), so unit vectors on early columns win.
pub fn quotient_reps(a: &Configuration, sd: &SimplexData, j0: Option<usize>) -> Result<QuotientReps> {
    if let Some(j) = j0 {
        a.check_labels(&[j])?;
        if sd.contains(j) {
            return Err(GkzError::InvalidInput(format!("j0 = {j} lies in the simplex")));
        }
        if !a.is_homogeneous() {
            return Err(GkzError::NormalizationImpossible);
        }
    }
    let r = sd.r();
    let n = sd.sigma.len();
    let mut reps: Vec<Vec<i64>> = Vec::with_capacity(r);
    let mut total = 0;
    while reps.len() < r {
        let mut cands = Vec::new();
        compositions_desc(total, n, r.max(1), &mut cands);
        for c in cands {
            if reps.iter().all(|k| !same_class(sd, k, &c)) {
                reps.push(c);
                if reps.len() == r {
                    break;
                }
            }
        }
        total += 1;
        if total > n * r {
            return Err(GkzError::Internal("representative search exhausted".into()));
        }
    }
    if let Some(j) = j0 {
        reps = reps.iter().map(|k| normalize_rep(a, sd, k, j)).collect::<Result<_>>()?;
    }
    Ok(QuotientReps { sigma: sd.sigma.clone(), reps, j0 })
}

/// Saturated Z-basis of ker(A: Z^N -> Z^n).
pub fn kernel_basis(a: &Configuration) -> Vec<Vec<Z>> {
    let (_, u) = linalg::column_hermite(&a.zmatrix());
    (a.n()..a.big_n()).map(|j| u.iter().map(|row| row[j].clone()).collect()).collect()
}

/// [Z^n : ZA].
pub fn lattice_index(a: &Configuration) -> Z {
    linalg::smith_diagonal(&a.zmatrix()).into_iter().fold(Z::one(), |acc, d| acc * d)
}

/// Hermite column basis Q of the lattice ZA (so ZA = ZQ).
pub fn lattice_basis(a: &Configuration) -> ZMat {
    let (h, _) = linalg::column_hermite(&a.zmatrix());
    h.iter().map(|r| r[..a.n()].to_vec()).collect()
}
