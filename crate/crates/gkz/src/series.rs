//! Gamma-series psi^{sigma_u}_{sigma_d, k}(z; c), the operator D_j and boundary values.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GkzError, Result};
use crate::geometry;
use crate::lattice::{self, simplex_data, Configuration, SimplexData};
use crate::linalg::{self, Q};
use crate::special::{is_nonpositive_integer, ln_factorial, ln_gamma};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GammaSeriesSpec {
    pub sigma: Vec<usize>,
    pub sigma_u: Vec<usize>,
    pub sigma_d: Vec<usize>,
    pub ktilde: Vec<i64>,
    /// Columns the series runs over; all columns when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
}

impl GammaSeriesSpec {
    pub fn new(sigma: &[usize], sigma_u: &[usize], ktilde: &[i64]) -> Self {
        let mut s = sigma.to_vec();
        s.sort_unstable();
        let mut u = sigma_u.to_vec();
        u.sort_unstable();
        let d = s.iter().copied().filter(|j| !u.contains(j)).collect();
        GammaSeriesSpec { sigma: s, sigma_u: u, sigma_d: d, ktilde: ktilde.to_vec(), support: None }
    }

    pub fn with_support(mut self, support: &[usize]) -> Self {
        let mut s = support.to_vec();
        s.sort_unstable();
        self.support = Some(s);
        self
    }

    pub fn support_cols(&self, a: &Configuration) -> Vec<usize> {
        self.support.clone().unwrap_or_else(|| a.labels())
    }

    pub fn bar(&self, a: &Configuration) -> Vec<usize> {
        self.support_cols(a).into_iter().filter(|j| !self.sigma.contains(j)).collect()
    }

    pub fn validate(&self, a: &Configuration) -> Result<SimplexData> {
        let sd = simplex_data(a, &self.sigma)?;
        let mut all: Vec<usize> = self.sigma_u.iter().chain(&self.sigma_d).copied().collect();
        all.sort_unstable();
        if all != sd.sigma {
            return Err(GkzError::InvalidInput(format!(
                "sigmaU {:?} and sigmaD {:?} do not partition {:?}",
                self.sigma_u, self.sigma_d, sd.sigma
            )));
        }
        if self.ktilde.len() != sd.sigma.len() {
            return Err(GkzError::InvalidInput("ktilde length differs from |sigma|".into()));
        }
        if let Some(s) = &self.support {
            a.check_labels(s)?;
            if !sd.sigma.iter().all(|j| s.contains(j)) {
                return Err(GkzError::InvalidInput("support must contain sigma".into()));
            }
        }
        Ok(sd)
    }
}

/// Point of (C*)^N given by log|z_j| and explicit arguments. A log|z_j| of -inf stands for z_j = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LogPoint {
    pub log_abs: Vec<f64>,
    pub arg: Vec<f64>,
}

impl LogPoint {
    pub fn new(log_abs: Vec<f64>, arg: Vec<f64>) -> Self {
        LogPoint { log_abs, arg }
    }

    pub fn from_polar(abs: &[f64], arg: &[f64]) -> Self {
        LogPoint { log_abs: abs.iter().map(|x| x.ln()).collect(), arg: arg.to_vec() }
    }

    /// log z_j on the chosen branch.
    pub fn log(&self, j: usize) -> C64 {
        C64::new(self.log_abs[j - 1], self.arg[j - 1])
    }

    pub fn value(&self, j: usize) -> C64 {
        self.log(j).exp()
    }

    pub fn is_zero(&self, j: usize) -> bool {
        self.log_abs[j - 1] == f64::NEG_INFINITY
    }

    /// t^A . z for t = exp(i theta) on the compact torus.
    pub fn torus_act(&self, a: &Configuration, theta: &[f64]) -> LogPoint {
        let mut out = self.clone();
        for j in 1..=a.big_n() {
            let col = a.col_i64(j);
            out.arg[j - 1] += col.iter().zip(theta).map(|(&x, t)| x as f64 * t).sum::<f64>();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint(#[serde(with = "crate::serde_c::vec")] pub Vec<C64>);

impl ParameterPoint {
    pub fn shifted(&self, a: &Configuration, cols: &[usize], m: &[u32]) -> Vec<C64> {
        let mut c = self.0.clone();
        for (&j, &k) in cols.iter().zip(m) {
            for (ci, x) in c.iter_mut().zip(a.col_i64(j)) {
                *ci += (x * k as i64) as f64;
            }
        }
        c
    }
}

/// Advisory check that no A_sigma^{-1}(c + k) entry is integral for k in a window.
pub fn very_generic(a: &Configuration, t: &[Vec<usize>], c: &[C64], window: i64) -> Result<bool> {
    let n = a.n();
    for cell in t {
        let sd = simplex_data(a, cell)?;
        let inv = to_f64(&sd.inv);
        let mut k = vec![-window; n];
        loop {
            for row in &inv {
                let v: C64 = row.iter().zip(c.iter().zip(&k)).map(|(r, (ci, &ki))| *ci * *r + r * ki as f64).sum();
                if v.im.abs() < 1e-9 && (v.re - v.re.round()).abs() < 1e-9 {
                    return Ok(false);
                }
            }
            let mut i = 0;
            while i < n {
                k[i] += 1;
                if k[i] <= window {
                    break;
                }
                k[i] = -window;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    Ok(true)
}

fn to_f64(m: &[Vec<Q>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(linalg::q_to_f64).collect()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeriesValue {
    #[serde(with = "crate::serde_c::scalar")]
    pub value: C64,
    /// Sum of |terms| on the last shell |m| = order.
    pub last_shell: f64,
    pub terms: usize,
}

/// Lattice points m in N^d with |m| <= order, by total degree then lexicographic.
pub fn lattice_points(d: usize, order: u32) -> Vec<Vec<u32>> {
    fn rec(d: usize, rem: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == d {
            cur.push(rem);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in (0..=rem).rev() {
            cur.push(v);
            rec(d, rem - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        out.push(Vec::new());
        return out;
    }
    for deg in 0..=order {
        rec(d, deg, &mut Vec::new(), &mut out);
    }
    out
}

struct Prepared {
    u_mask: Vec<bool>,
    bar: Vec<usize>,
    /// A_sigma^{-1} A_bar as integer numerators over `den`.
    b_num: Vec<Vec<i64>>,
    den: i64,
    p0: Vec<C64>,
    lsig: Vec<C64>,
    lbar: Vec<C64>,
    bar_zero: Vec<bool>,
}

fn prepare(a: &Configuration, spec: &GammaSeriesSpec, z: &LogPoint, c: &[C64]) -> Result<Prepared> {
    let sd = spec.validate(a)?;
    if z.log_abs.len() != a.big_n() || z.arg.len() != a.big_n() || c.len() != a.n() {
        return Err(GkzError::InvalidInput("point dimensions do not match the configuration".into()));
    }
    let bar = spec.bar(a);
    let bq: Vec<Vec<Q>> =
        sd.sigma.iter().enumerate().map(|(i, _)| bar.iter().map(|&j| linalg::dot(&sd.inv[i], a.col(j))).collect()).collect();
    let den = bq.iter().flatten().fold(num_bigint::BigInt::from(1), |acc, x| acc.lcm(x.denom()));
    let den_i = den.to_i64().ok_or_else(|| GkzError::Internal("denominator overflow".into()))?;
    let b_num = bq.iter().map(|r| r.iter().map(|x| (x * linalg::qz(&den)).to_integer().to_i64().unwrap_or(i64::MAX)).collect()).collect();
    let inv = to_f64(&sd.inv);
    let p0 = inv.iter().map(|r| r.iter().zip(c).map(|(x, ci)| *ci * *x).sum()).collect();
    let u_mask: Vec<bool> = sd.sigma.iter().map(|j| spec.sigma_u.contains(j)).collect();
    let mut lsig = Vec::new();
    for (pos, &i) in sd.sigma.iter().enumerate() {
        if z.is_zero(i) {
            return Err(GkzError::NotASeriesInZj(i));
        }
        let extra = 2.0 * PI * spec.ktilde[pos] as f64 + if u_mask[pos] { PI } else { 0.0 };
        lsig.push(z.log(i) + C64::new(0.0, extra));
    }
    let lbar = bar.iter().map(|&j| z.log(j)).collect();
    let bar_zero = bar.iter().map(|&j| z.is_zero(j)).collect();
    Ok(Prepared { u_mask, bar, b_num, den: den_i, p0, lsig, lbar, bar_zero })
}

impl Prepared {
    fn term(&self, m: &[u32]) -> Result<C64> {
        if m.iter().zip(&self.bar_zero).any(|(&k, &z)| z && k > 0) {
            return Ok(C64::zero());
        }
        let mut log = C64::zero();
        for (i, row) in self.b_num.iter().enumerate() {
            let q: i64 = row.iter().zip(m).map(|(b, &k)| b * k as i64).sum();
            let p = self.p0[i] + q as f64 / self.den as f64;
            if self.u_mask[i] {
                if is_nonpositive_integer(p) {
                    return Err(GkzError::PoleHit(m.to_vec()));
                }
                log += ln_gamma(p);
            } else {
                let w = 1.0 - p;
                if is_nonpositive_integer(w) {
                    return Ok(C64::zero());
                }
                log -= ln_gamma(w);
            }
            log -= p * self.lsig[i];
        }
        for (k, &mj) in m.iter().enumerate() {
            if mj > 0 {
                log += self.lbar[k] * mj as f64 - ln_factorial(mj);
            }
        }
        Ok(log.exp())
    }
}

/// Truncated psi over |m| <= order.
pub fn evaluate(a: &Configuration, spec: &GammaSeriesSpec, z: &LogPoint, c: &ParameterPoint, order: u32, tol: f64) -> Result<SeriesValue> {
    let prep = prepare(a, spec, z, &c.0)?;
    let mut value = C64::zero();
    let mut last = 0.0;
    let pts = lattice_points(prep.bar.len(), order);
    for m in &pts {
        let t = prep.term(m)?;
        value += t;
        if m.iter().sum::<u32>() == order {
            last += t.norm();
        }
    }
    if last > tol * value.norm().max(f64::MIN_POSITIVE) {
        return Err(GkzError::NonConverged { last_shell: last, tol });
    }
    Ok(SeriesValue { value, last_shell: last, terms: pts.len() })
}

/// Moduli |z_sigma^{-A_sigma^{-1} a(j)} z_j| for the summation columns j.
pub fn local_coordinates(a: &Configuration, spec: &GammaSeriesSpec, z: &LogPoint) -> Result<Vec<(usize, f64)>> {
    let sd = spec.validate(a)?;
    Ok(spec
        .bar(a)
        .into_iter()
        .map(|j| {
            let x = sd.coords(a.col(j));
            let l = z.log_abs[j - 1] - sd.sigma.iter().zip(&x).map(|(&i, xi)| linalg::q_to_f64(xi) * z.log_abs[i - 1]).sum::<f64>();
            (j, l.exp())
        })
        .collect())
}

/// `evaluate` after checking every local coordinate of a column in H_sigma is below `limit`.
pub fn evaluate_in_domain(
    a: &Configuration,
    spec: &GammaSeriesSpec,
    z: &LogPoint,
    c: &ParameterPoint,
    order: u32,
    tol: f64,
    limit: f64,
) -> Result<SeriesValue> {
    let sd = spec.validate(a)?;
    for (j, v) in local_coordinates(a, spec, z)? {
        let h = sd.coords(a.col(j)).iter().sum::<Q>() == Q::from_integer(1.into());
        if h && v >= limit {
            return Err(GkzError::OutsideDomain(v));
        }
    }
    evaluate(a, spec, z, c, order, tol)
}

pub type EvalFn = Arc<dyn Fn(&LogPoint, &[C64]) -> Result<C64> + Send + Sync>;

/// Something that can be evaluated at (z, c), closed under D_j and linear combination.
#[derive(Clone)]
pub enum Evaluator {
    Series { spec: GammaSeriesSpec, order: u32 },
    D { inner: Box<Evaluator>, cols: Vec<usize>, order: u32 },
    Sum(Vec<(C64, Evaluator)>),
    Func(EvalFn),
}

impl std::fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Evaluator::Series { spec, order } => write!(f, "Series({spec:?}, {order})"),
            Evaluator::D { inner, cols, order } => write!(f, "D{cols:?}[{order}]({inner:?})"),
            Evaluator::Sum(v) => write!(f, "Sum({v:?})"),
            Evaluator::Func(_) => write!(f, "Func"),
        }
    }
}

impl Evaluator {
    pub fn series(spec: GammaSeriesSpec, order: u32) -> Self {
        Evaluator::Series { spec, order }
    }

    pub fn eval(&self, a: &Configuration, z: &LogPoint, c: &[C64]) -> Result<C64> {
        self.eval_budget(a, z, c, u32::MAX)
    }

    fn eval_budget(&self, a: &Configuration, z: &LogPoint, c: &[C64], budget: u32) -> Result<C64> {
        match self {
            Evaluator::Series { spec, order } => {
                let pp = ParameterPoint(c.to_vec());
                Ok(evaluate(a, spec, z, &pp, (*order).min(budget), f64::INFINITY)?.value)
            }
            Evaluator::D { inner, cols, order } => {
                let ord = (*order).min(budget);
                let pp = ParameterPoint(c.to_vec());
                let mut acc = C64::zero();
                for m in lattice_points(cols.len(), ord) {
                    let mut w = C64::zero();
                    let mut skip = false;
                    for (&j, &k) in cols.iter().zip(&m) {
                        if k > 0 {
                            if z.is_zero(j) {
                                skip = true;
                                break;
                            }
                            w += z.log(j) * k as f64 - ln_factorial(k);
                        }
                    }
                    if skip {
                        continue;
                    }
                    let deg: u32 = m.iter().sum();
                    let cs = pp.shifted(a, cols, &m);
                    acc += inner.eval_budget(a, z, &cs, ord - deg)? * w.exp();
                }
                Ok(acc)
            }
            Evaluator::Sum(parts) => {
                let mut acc = C64::zero();
                for (k, e) in parts {
                    acc += *k * e.eval_budget(a, z, c, budget)?;
                }
                Ok(acc)
            }
            Evaluator::Func(f) => f(z, c),
        }
    }
}

/// D_j f for the given columns, truncated at total degree `order`.
pub fn apply_d(f: Evaluator, cols: &[usize], order: u32) -> Evaluator {
    Evaluator::D { inner: Box::new(f), cols: cols.to_vec(), order }
}

/// bv_j: the evaluator with z_j = 0.
pub fn boundary_value(f: &Evaluator, a: &Configuration, j: usize) -> Result<Evaluator> {
    match f {
        Evaluator::Series { spec, order } => {
            if spec.sigma.contains(&j) {
                return Err(GkzError::NotASeriesInZj(j));
            }
            let support: Vec<usize> = spec.support_cols(a).into_iter().filter(|&x| x != j).collect();
            Ok(Evaluator::Series { spec: spec.clone().with_support(&support), order: *order })
        }
        Evaluator::D { inner, cols, order } => {
            if cols.contains(&j) {
                let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != j).collect();
                if rest.is_empty() {
                    Ok((**inner).clone())
                } else {
                    Ok(Evaluator::D { inner: inner.clone(), cols: rest, order: *order })
                }
            } else {
                Ok(Evaluator::D { inner: Box::new(boundary_value(inner, a, j)?), cols: cols.clone(), order: *order })
            }
        }
        Evaluator::Sum(parts) => Ok(Evaluator::Sum(parts.iter().map(|(k, e)| Ok((*k, boundary_value(e, a, j)?))).collect::<Result<_>>()?)),
        Evaluator::Func(_) => Err(GkzError::InvalidInput("no series representation in z_j".into())),
    }
}

/// Lattice points m over `bar` hitting each class of Z^n / Z A_sigma once, paired with the
/// fractional parts of A_sigma^{-1} A_bar m.
pub fn class_reps(a: &Configuration, sd: &SimplexData, bar: &[usize]) -> Vec<(Vec<u32>, Vec<Q>)> {
    let r = sd.r();
    let mut found: BTreeMap<Vec<Q>, Vec<u32>> = BTreeMap::new();
    let max_deg = (r * bar.len().max(1)) as u32;
    'deg: for m in lattice_points(bar.len(), max_deg) {
        let mut v = vec![Q::zero(); a.n()];
        for (&j, &k) in bar.iter().zip(&m) {
            for (vi, x) in v.iter_mut().zip(a.col(j)) {
                *vi += x * Q::from_integer(k.into());
            }
        }
        let f: Vec<Q> = sd.coords(&v).into_iter().map(|x| &x - x.floor()).collect();
        found.entry(f).or_insert(m);
        if found.len() == r {
            break 'deg;
        }
    }
    let mut out: Vec<(Vec<u32>, Vec<Q>)> = found.into_iter().map(|(f, m)| (m, f)).collect();
    out.sort_by(|x, y| x.0.iter().sum::<u32>().cmp(&y.0.iter().sum()).then(y.0.cmp(&x.0)));
    out
}

/// (1/sqrt r)(exp(-2 pi i k(i) . f_j)) for representatives k(i) and class fractions f_j.
pub fn character_matrix(reps: &[Vec<i64>], classes: &[(Vec<u32>, Vec<Q>)]) -> Vec<Vec<C64>> {
    let r = reps.len() as f64;
    reps.iter()
        .map(|k| {
            classes
                .iter()
                .map(|(_, f)| {
                    let t = k.iter().zip(f).fold(Q::zero(), |acc, (&x, y)| acc + y * Q::from_integer(x.into()));
                    let t = &t - t.floor();
                    C64::from_polar(1.0 / r.sqrt(), -2.0 * PI * linalg::q_to_f64(&t))
                })
                .collect()
        })
        .collect()
}

/// Phi_T: one spec per (simplex, representative).
pub fn build_basis(
    a: &Configuration,
    t: &[Vec<usize>],
    partitions: &BTreeMap<Vec<usize>, Vec<usize>>,
    reps: &BTreeMap<Vec<usize>, Vec<Vec<i64>>>,
) -> Result<Vec<GammaSeriesSpec>> {
    let cells = geometry::canonical(t.to_vec());
    let sub = geometry::Subdivision {
        cells: cells.clone(),
        weight: Vec::new(),
        is_triangulation: cells.iter().all(|c| c.len() == a.n()),
        is_almost: false,
    };
    if !geometry::is_convergent(a, &sub)? {
        return Err(GkzError::NotConvergent);
    }
    let mut out = Vec::new();
    for s in &cells {
        let sd = simplex_data(a, s)?;
        let u = partitions.get(s).cloned().unwrap_or_default();
        let ks = match reps.get(s) {
            Some(k) => k.clone(),
            None => lattice::quotient_reps(a, &sd, None)?.reps,
        };
        for k in ks {
            out.push(GammaSeriesSpec::new(s, &u, &k));
        }
    }
    Ok(out)
}
