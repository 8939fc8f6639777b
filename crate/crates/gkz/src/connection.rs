//! Connection matrices between the Gamma-series bases of adjacent regular triangulations,
//! the continuation path, and numerical verification through the Mellin-Barnes integral.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::character::{CharacterSum, Fraction};
use crate::error::{GkzError, Result};
use crate::geometry::{self, Modification, Triangulation};
use crate::lattice::{quotient_reps, same_class, simplex_data, Configuration, SimplexData};
use crate::linalg::{self, qi, Q};
use crate::lp::{self, Cmp, Constraint, LpResult};
use crate::mellin_barnes::{MBIntegrand, QuadConfig};
use crate::series::{class_reps, evaluate, lattice_points, GammaSeriesSpec, LogPoint, ParameterPoint};
use crate::special::ln_factorial;

/// A basis element together with the corank-1 cell and column j0 it is attached to, when it
/// sits on a simplex of the form I \ j0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BasisEntry {
    pub spec: GammaSeriesSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j0: Option<usize>,
}

/// Row i reads: source_i continues to sum_j entries[i][j] target_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConnectionMatrix {
    pub n: usize,
    pub t: Triangulation,
    pub tprime: Triangulation,
    pub source_basis: Vec<BasisEntry>,
    pub target_basis: Vec<BasisEntry>,
    pub entries: Vec<Vec<Fraction>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathSpec>,
}

pub type RepChoice = BTreeMap<Vec<usize>, Vec<Vec<i64>>>;

fn check_complete(sd: &SimplexData, reps: &[Vec<i64>]) -> Result<()> {
    if reps.len() != sd.r() || reps.iter().any(|k| k.len() != sd.sigma.len()) {
        return Err(GkzError::RepresentativeMismatch(format!(
            "{:?} needs {} representatives of length {}",
            sd.sigma,
            sd.r(),
            sd.sigma.len()
        )));
    }
    for (x, k) in reps.iter().enumerate() {
        if reps[x + 1..].iter().any(|l| same_class(sd, k, l)) {
            return Err(GkzError::RepresentativeMismatch(format!("{:?}: {k:?} repeats a class", sd.sigma)));
        }
    }
    Ok(())
}

/// Coefficients x with src = sum_i x_i targets[i], where all targets share the simplex and
/// partition and run over a complete system of representatives.
pub fn convert(a: &Configuration, src: &GammaSeriesSpec, targets: &[GammaSeriesSpec]) -> Result<Vec<Fraction>> {
    let sd = src.validate(a)?;
    let n = a.n();
    let ut = targets.first().map(|t| t.sigma_u.clone()).unwrap_or_default();
    for t in targets {
        if t.sigma != sd.sigma || t.sigma_u != ut {
            return Err(GkzError::RepresentativeMismatch(format!(
                "target {:?}/{:?} does not match {:?}/{:?}",
                t.sigma, t.sigma_u, sd.sigma, ut
            )));
        }
    }
    let reps: Vec<Vec<i64>> = targets.iter().map(|t| t.ktilde.clone()).collect();
    check_complete(&sd, &reps)?;
    let r = sd.r();
    let bar: Vec<usize> = a.labels().into_iter().filter(|j| !sd.contains(*j)).collect();
    let classes = class_reps(a, &sd, &bar);
    if classes.len() != r {
        return Err(GkzError::Internal("class enumeration incomplete".into()));
    }
    let pos = |i: usize| sd.position(i).unwrap();
    let gains: Vec<usize> = src.sigma_u.iter().copied().filter(|i| !ut.contains(i)).collect();
    let losses: Vec<usize> = ut.iter().copied().filter(|i| !src.sigma_u.contains(i)).collect();
    let power = gains.len() as i32 - losses.len() as i32;
    let mut out = Vec::with_capacity(targets.len());
    for t in targets {
        let d: Vec<Q> = src.ktilde.iter().zip(&t.ktilde).map(|(x, y)| qi(x - y)).collect();
        // e^{-2 pi i d . A^{-1} c}
        let mut rho = vec![Q::zero(); n];
        for (k, dk) in d.iter().enumerate() {
            for (rj, v) in rho.iter_mut().zip(&sd.inv[k]) {
                *rj -= dk * v;
            }
        }
        let mut acc = Fraction::zero(n);
        for (_, f) in &classes {
            let phase = -linalg::dot(&d, f);
            let mut num = CharacterSum::term(Q::one(), phase, rho.clone());
            let mut den = CharacterSum::one(n);
            for &i in &losses {
                num = num.mul(&CharacterSum::character_minus_one(sd.inv[pos(i)].clone(), f[pos(i)].clone()));
            }
            for &i in &gains {
                den = den.mul(&CharacterSum::character_minus_one(sd.inv[pos(i)].clone(), f[pos(i)].clone()));
            }
            acc = acc.add(&Fraction::new(num, den, power)?)?;
        }
        out.push(acc.scale(&Q::new(1.into(), (r as i64).into())));
    }
    Ok(out)
}

fn cell_of(m: &Modification, sigma: &[usize]) -> Option<(Vec<usize>, usize)> {
    m.corank1_cells.iter().find_map(|cell| {
        let extra: Vec<usize> = cell.iter().copied().filter(|j| !sigma.contains(j)).collect();
        (extra.len() == 1 && sigma.iter().all(|j| cell.contains(j))).then(|| (cell.clone(), extra[0]))
    })
}

fn reps_for(a: &Configuration, sd: &SimplexData, j0: Option<usize>, choice: Option<&RepChoice>) -> Result<Vec<Vec<i64>>> {
    if let Some(reps) = choice.and_then(|c| c.get(&sd.sigma)) {
        check_complete(sd, reps)?;
        return Ok(reps.clone());
    }
    Ok(quotient_reps(a, sd, j0)?.reps)
}

/// Theorem-style bases: on T, U = Z- for simplices I \ j0 (j0 in Z+) with sector-normalized
/// representatives and U empty on T_irr; on T', U = (Z- \ i) + {max Z+} on I \ i.
pub fn source_basis(a: &Configuration, m: &Modification, reps: Option<&RepChoice>) -> Result<Vec<BasisEntry>> {
    let mut out = Vec::new();
    for s in &m.t {
        let sd = simplex_data(a, s)?;
        if m.tirr.contains(s) {
            for k in reps_for(a, &sd, None, reps)? {
                out.push(BasisEntry { spec: GammaSeriesSpec::new(s, &[], &k), cell: None, j0: None });
            }
            continue;
        }
        let (cell, j0) = cell_of(m, s).ok_or_else(|| GkzError::Internal(format!("{s:?} lies in no corank-1 cell")))?;
        if !m.circuit.zplus.contains(&j0) {
            return Err(GkzError::Internal(format!("{s:?} is not of the form I \\ j0 with j0 in Z+")));
        }
        for k in reps_for(a, &sd, Some(j0), reps)? {
            out.push(BasisEntry { spec: GammaSeriesSpec::new(s, &m.circuit.zminus, &k), cell: Some(cell.clone()), j0: Some(j0) });
        }
    }
    Ok(out)
}

pub fn target_basis(a: &Configuration, m: &Modification, reps: Option<&RepChoice>) -> Result<Vec<BasisEntry>> {
    let jstar = *m.circuit.zplus.iter().max().ok_or_else(|| GkzError::Internal("empty Z+".into()))?;
    let mut out = Vec::new();
    for s in &m.tprime {
        let sd = simplex_data(a, s)?;
        if m.tirr.contains(s) {
            for k in reps_for(a, &sd, None, reps)? {
                out.push(BasisEntry { spec: GammaSeriesSpec::new(s, &[], &k), cell: None, j0: None });
            }
            continue;
        }
        let (cell, i) = cell_of(m, s).ok_or_else(|| GkzError::Internal(format!("{s:?} lies in no corank-1 cell")))?;
        let mut u: Vec<usize> = m.circuit.zminus.iter().copied().filter(|&x| x != i).collect();
        u.push(jstar);
        for k in reps_for(a, &sd, None, reps)? {
            out.push(BasisEntry { spec: GammaSeriesSpec::new(s, &u, &k), cell: Some(cell.clone()), j0: None });
        }
    }
    Ok(out)
}

/// The right-hand side of the circuit identity for one source element: pairs of exact
/// coefficients 1/p_{sigma i}(a(j0)) and Gamma-series on I \ i.
pub fn circuit_rhs(a: &Configuration, m: &Modification, e: &BasisEntry) -> Result<Vec<(Q, GammaSeriesSpec)>> {
    let (cell, j0) = match (&e.cell, e.j0) {
        (Some(c), Some(j)) => (c.clone(), j),
        _ => return Err(GkzError::InvalidInput("not a circuit basis element".into())),
    };
    let sd = simplex_data(a, &e.spec.sigma)?;
    let beta = sd.coords(a.col(j0));
    let mut out = Vec::new();
    for &i in &m.circuit.zminus {
        let pos = sd.position(i).ok_or_else(|| GkzError::IndexNotInSimplex(i, sd.sigma.clone()))?;
        let sp: Vec<usize> = cell.iter().copied().filter(|&j| j != i).collect();
        let kt: Vec<i64> = sp.iter().map(|&j| sd.position(j).map_or(0, |p| e.spec.ktilde[p])).collect();
        let mut u: Vec<usize> = m.circuit.zminus.iter().copied().filter(|&x| x != i).collect();
        u.push(j0);
        out.push((beta[pos].recip(), GammaSeriesSpec::new(&sp, &u, &kt)));
    }
    Ok(out)
}

fn group_targets(basis: &[BasisEntry]) -> BTreeMap<Vec<usize>, Vec<usize>> {
    let mut g: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (idx, e) in basis.iter().enumerate() {
        g.entry(e.spec.sigma.clone()).or_default().push(idx);
    }
    g
}

pub fn build_connection(
    a: &Configuration,
    m: &Modification,
    source_reps: Option<&RepChoice>,
    target_reps: Option<&RepChoice>,
) -> Result<ConnectionMatrix> {
    let n = a.n();
    let source = source_basis(a, m, source_reps)?;
    let target = target_basis(a, m, target_reps)?;
    let groups = group_targets(&target);
    let mut entries = vec![vec![Fraction::zero(n); target.len()]; source.len()];
    for (row, e) in source.iter().enumerate() {
        if e.cell.is_none() {
            let col = target
                .iter()
                .position(|t| t.spec == e.spec)
                .ok_or_else(|| GkzError::RepresentativeMismatch(format!("{:?} has no matching target", e.spec.sigma)))?;
            entries[row][col] = Fraction::constant(n, Q::one());
            continue;
        }
        for (coef, rhs) in circuit_rhs(a, m, e)? {
            let cols = groups.get(&rhs.sigma).ok_or_else(|| GkzError::Internal(format!("{:?} missing from the target", rhs.sigma)))?;
            let specs: Vec<GammaSeriesSpec> = cols.iter().map(|&c| target[c].spec.clone()).collect();
            for (x, &col) in convert(a, &rhs, &specs)?.into_iter().zip(cols) {
                entries[row][col] = entries[row][col].add(&x.scale(&coef))?;
            }
        }
    }
    Ok(ConnectionMatrix { n, t: m.t.clone(), tprime: m.tprime.clone(), source_basis: source, target_basis: target, entries, path: None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PathMargins {
    /// Smallest pi - |arg zeta| over all circuit rows.
    pub sector: f64,
    /// Largest local coordinate of the source basis at the start.
    pub local_start: f64,
    /// Largest local coordinate of the target basis at the end.
    pub local_end: f64,
    /// Largest expansion variable z_sigma^{-A_sigma^{-1} a(k)} z_k, k outside I, at either end.
    pub expansion: f64,
}

/// Straight line in -log|z| from zStart to zEnd with fixed arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PathSpec {
    pub z_start: LogPoint,
    pub z_end: LogPoint,
    pub args: Vec<f64>,
    #[serde(with = "crate::serde_q::vec")]
    pub omega_t: Vec<Q>,
    #[serde(with = "crate::serde_q::vec")]
    pub omega_tprime: Vec<Q>,
    #[serde(with = "crate::serde_q::vec")]
    pub omega_q: Vec<Q>,
    /// Multiplier of omega_T and omega_T'.
    #[serde(with = "crate::serde_q::scalar")]
    pub scale: Q,
    /// Multiplier of omega_Q.
    #[serde(with = "crate::serde_q::scalar")]
    pub r: Q,
    pub margins: PathMargins,
}

/// theta / pi = constant + coeffs . (args / pi) for one circuit row.
fn sector_form(a: &Configuration, e: &BasisEntry, zminus: &[usize]) -> Result<(Vec<Q>, Q)> {
    let j0 = e.j0.ok_or_else(|| GkzError::InvalidInput("not a circuit basis element".into()))?;
    let sd = simplex_data(a, &e.spec.sigma)?;
    let beta = sd.coords(a.col(j0));
    let mut w = vec![Q::zero(); a.big_n()];
    w[j0 - 1] = Q::one();
    let mut c = Q::one();
    for (k, &i) in sd.sigma.iter().enumerate() {
        w[i - 1] -= &beta[k];
        let shift = qi(2 * e.spec.ktilde[k] + i64::from(zminus.contains(&i)));
        c -= &beta[k] * shift;
    }
    Ok((w, c))
}

fn slack(a: &Configuration, sd: &SimplexData, j: usize, omega: &[Q]) -> Q {
    let x = sd.coords(a.col(j));
    sd.sigma.iter().zip(&x).fold(omega[j - 1].clone(), |acc, (&i, xi)| acc - xi * &omega[i - 1])
}

fn min_slack(a: &Configuration, basis: &[BasisEntry], omega: &[Q]) -> Result<Q> {
    let mut best: Option<Q> = None;
    for e in basis {
        let sd = simplex_data(a, &e.spec.sigma)?;
        for j in a.labels().into_iter().filter(|j| !sd.contains(*j)) {
            let s = slack(a, &sd, j, omega);
            if best.as_ref().is_none_or(|b| s < *b) {
                best = Some(s);
            }
        }
    }
    best.ok_or_else(|| GkzError::Internal("empty basis".into()))
}

fn expansion_slacks(a: &Configuration, cm: &ConnectionMatrix, omega: &[Q], wq: &[Q]) -> Result<Vec<(Q, Q)>> {
    let mut out = Vec::new();
    for e in &cm.source_basis {
        let Some(cell) = &e.cell else { continue };
        let sd = simplex_data(a, &e.spec.sigma)?;
        for j in a.labels().into_iter().filter(|j| !cell.contains(j)) {
            out.push((slack(a, &sd, j, omega), slack(a, &sd, j, wq)));
        }
    }
    Ok(out)
}

fn pow2_at_least(x: f64) -> Result<Q> {
    let mut k = 0u32;
    while ((1u64 << k) as f64) < x {
        k += 1;
        if k > 50 {
            return Err(GkzError::MarginTooSmall { suggested_r: "inf".into() });
        }
    }
    Ok(Q::from_integer((1i64 << k).into()))
}

const LOCAL_BOUND: f64 = 0.25;

fn log_point(omega: &[Q], args: &[f64]) -> LogPoint {
    LogPoint::new(omega.iter().map(|x| -linalg::q_to_f64(x)).collect(), args.to_vec())
}

/// Endpoints and arguments for the continuation along which `cm` holds.
pub fn build_path(a: &Configuration, m: &Modification, cm: &ConnectionMatrix, args: Option<&[f64]>, r: Option<Q>) -> Result<PathSpec> {
    let nn = a.big_n();
    let forms: Vec<(Vec<Q>, Q)> =
        cm.source_basis.iter().filter(|e| e.cell.is_some()).map(|e| sector_form(a, e, &m.circuit.zminus)).collect::<Result<_>>()?;
    let args: Vec<f64> = match args {
        Some(x) => {
            if x.len() != nn {
                return Err(GkzError::InvalidInput(format!("need {nn} arguments")));
            }
            x.to_vec()
        }
        None => {
            // Chebyshev centre of |theta| < pi over the circuit arguments, in units of pi.
            let circ = &m.circuit.z;
            let nv = nn + 1;
            let mut cons = Vec::new();
            for (w, c) in &forms {
                for sign in [1i64, -1] {
                    let mut row: Vec<Q> = w.iter().map(|x| x * qi(sign)).collect();
                    row.push(Q::one());
                    cons.push(Constraint::new(row, Cmp::Le, Q::one() - c * qi(sign)));
                }
            }
            for j in 0..nn {
                let mut row = vec![Q::zero(); nv];
                row[j] = Q::one();
                if circ.contains(&(j + 1)) {
                    cons.push(Constraint::new(row.clone(), Cmp::Le, qi(2)));
                    cons.push(Constraint::new(row, Cmp::Ge, qi(-2)));
                } else {
                    cons.push(Constraint::new(row, Cmp::Eq, Q::zero()));
                }
            }
            let mut obj = vec![Q::zero(); nv];
            obj[nn] = Q::one();
            match lp::maximize(&obj, &cons) {
                LpResult::Optimal { x, value } if value.is_positive() => x[..nn].iter().map(|y| linalg::q_to_f64(y) * PI).collect(),
                _ => return Err(GkzError::EmptySector),
            }
        }
    };
    let mut sector = f64::INFINITY;
    for (w, c) in &forms {
        let theta = PI * linalg::q_to_f64(c) + w.iter().zip(&args).map(|(x, y)| linalg::q_to_f64(x) * y).sum::<f64>();
        if theta.abs() >= PI {
            return Err(GkzError::SectorViolation(theta));
        }
        sector = sector.min(PI - theta.abs());
    }

    let omega_t = geometry::cone_interior(a, &m.t).ok_or_else(|| GkzError::Internal("T is not regular".into()))?;
    let mut strict = geometry::cone_inequalities(a, &m.tprime);
    strict.extend(m.ctilde.iter().cloned());
    let (omega_tprime, _) = lp::interior_point(&strict, &[], nn).ok_or_else(|| GkzError::Internal("C_T' and C~+ do not meet".into()))?;
    let wq = m.omega_q.clone();

    let ln_bound = -LOCAL_BOUND.ln();
    let s0 = linalg::q_to_f64(&min_slack(a, &cm.source_basis, &omega_t)?);
    let s1 = linalg::q_to_f64(&min_slack(a, &cm.target_basis, &omega_tprime)?);
    if s0 <= 0.0 || s1 <= 0.0 {
        return Err(GkzError::Internal("cone interior point has no slack".into()));
    }
    let scale = pow2_at_least(ln_bound / s0.min(s1))?;

    let mut need: f64 = 0.0;
    for base in [&omega_t, &omega_tprime] {
        let scaled: Vec<Q> = base.iter().map(|x| x * &scale).collect();
        for (s, sq) in expansion_slacks(a, cm, &scaled, &wq)? {
            let (s, sq) = (linalg::q_to_f64(&s), linalg::q_to_f64(&sq));
            if s >= ln_bound {
                continue;
            }
            if sq <= 0.0 {
                return Err(GkzError::Internal("omega_Q does not separate the expansion variables".into()));
            }
            need = need.max((ln_bound - s) / sq);
        }
    }
    let suggested = pow2_at_least(need.max(1.0))?;
    let r = match r {
        Some(r) if linalg::q_to_f64(&r) + 1e-12 < need => {
            return Err(GkzError::MarginTooSmall { suggested_r: linalg::fmt_q(&suggested) });
        }
        Some(r) => r,
        None => suggested,
    };

    let end = |base: &[Q]| -> Vec<Q> { base.iter().zip(&wq).map(|(x, q)| x * &scale + q * &r).collect() };
    let ws = end(&omega_t);
    let we = end(&omega_tprime);
    let local_start = (-linalg::q_to_f64(&min_slack(a, &cm.source_basis, &ws)?)).exp();
    let local_end = (-linalg::q_to_f64(&min_slack(a, &cm.target_basis, &we)?)).exp();
    let mut expansion: f64 = 0.0;
    for w in [&ws, &we] {
        for (s, _) in expansion_slacks(a, cm, w, &wq)? {
            expansion = expansion.max((-linalg::q_to_f64(&s)).exp());
        }
    }
    Ok(PathSpec {
        z_start: log_point(&ws, &args),
        z_end: log_point(&we, &args),
        args,
        omega_t,
        omega_tprime,
        omega_q: wq,
        scale,
        r,
        margins: PathMargins { sector, local_start, local_end, expansion },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RowReport {
    pub row: usize,
    pub source: GammaSeriesSpec,
    /// "circuit" or "identity".
    pub kind: String,
    pub defect: f64,
    pub defect_start: f64,
    pub defect_end: f64,
    pub lhs_mag: f64,
    pub rhs_mag: f64,
    pub order: u32,
    /// Last-shell sizes of the series at zStart and zEnd, relative to their values.
    pub tail_start: f64,
    pub tail_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReport {
    pub rows: Vec<RowReport>,
    pub max_defect: f64,
    pub tol: f64,
    pub passed: bool,
    pub margins: PathMargins,
    #[serde(with = "crate::serde_c::vec")]
    pub c: Vec<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyConfig {
    pub order: u32,
    pub tol: f64,
    pub quad: QuadConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { order: 40, tol: 1e-6, quad: QuadConfig::default() }
    }
}

/// sum over m in N^{columns outside I} of z^m/m! I_sigma(z; c + A m): the continuation of a
/// circuit row along the path.
pub fn mb_expansion(a: &Configuration, e: &BasisEntry, z: &LogPoint, c: &[C64], order: u32, quad: &QuadConfig) -> Result<C64> {
    let (cell, j0) = match (&e.cell, e.j0) {
        (Some(c), Some(j)) => (c.clone(), j),
        _ => return Err(GkzError::InvalidInput("not a circuit basis element".into())),
    };
    let base = MBIntegrand::new(a, &cell, j0, c, &e.spec.ktilde)?;
    let outside: Vec<usize> = a.labels().into_iter().filter(|j| !cell.contains(j)).collect();
    let pp = ParameterPoint(c.to_vec());
    let pts = lattice_points(outside.len(), order);
    let terms: Vec<Result<C64>> = pts
        .par_iter()
        .map(|m| {
            let mut w = C64::zero();
            for (&j, &k) in outside.iter().zip(m) {
                if k > 0 {
                    if z.is_zero(j) {
                        return Ok(C64::zero());
                    }
                    w += z.log(j) * k as f64 - ln_factorial(k);
                }
            }
            let cs = pp.shifted(a, &outside, m);
            let v = base.with_parameter(a, &cs)?.mb_evaluate(z, quad)?.value;
            Ok(v * w.exp())
        })
        .collect();
    let mut acc = C64::zero();
    for t in terms {
        acc += t?;
    }
    Ok(acc)
}

fn rel(x: C64, y: C64) -> f64 {
    let d = (x - y).norm();
    let s = x.norm().max(y.norm());
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

fn series_at(a: &Configuration, spec: &GammaSeriesSpec, z: &LogPoint, c: &[C64], order: u32) -> Result<(C64, f64)> {
    let v = evaluate(a, spec, z, &ParameterPoint(c.to_vec()), order, f64::INFINITY)?;
    Ok((v.value, v.last_shell / v.value.norm().max(f64::MIN_POSITIVE)))
}

fn verify_row(a: &Configuration, cm: &ConnectionMatrix, path: &PathSpec, row: usize, c: &[C64], cfg: &VerifyConfig) -> Result<RowReport> {
    let e = &cm.source_basis[row];
    let order = cfg.order;
    let (src, tail_start) = series_at(a, &e.spec, &path.z_start, c, order)?;
    let mut tail_end: f64 = 0.0;
    let mut rhs = C64::zero();
    let mut rhs_abs: f64 = 0.0;
    for (col, f) in cm.entries[row].iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        let (v, tail) = series_at(a, &cm.target_basis[col].spec, &path.z_end, c, order)?;
        tail_end = tail_end.max(tail);
        let term = f.eval(c) * v;
        rhs += term;
        rhs_abs += term.norm();
    }
    if e.cell.is_none() {
        return Ok(RowReport {
            row,
            source: e.spec.clone(),
            kind: "identity".into(),
            defect: 0.0,
            defect_start: 0.0,
            defect_end: 0.0,
            lhs_mag: src.norm(),
            rhs_mag: rhs.norm(),
            order,
            tail_start,
            tail_end,
            error: None,
        });
    }
    let mb_start = mb_expansion(a, e, &path.z_start, c, order, &cfg.quad)?;
    let mb_end = mb_expansion(a, e, &path.z_end, c, order, &cfg.quad)?;
    let defect_start = rel(src, mb_start);
    let defect_end = (mb_end - rhs).norm() / mb_end.norm().max(rhs_abs).max(f64::MIN_POSITIVE);
    Ok(RowReport {
        row,
        source: e.spec.clone(),
        kind: "circuit".into(),
        defect: defect_start.max(defect_end),
        defect_start,
        defect_end,
        lhs_mag: src.norm(),
        rhs_mag: rhs.norm(),
        order,
        tail_start,
        tail_end,
        error: None,
    })
}

/// Row by row: the source series at zStart against the Mellin-Barnes expansion there, and the
/// same expansion at zEnd against the matrix row applied to the target series.
pub fn verify_connection(a: &Configuration, cm: &ConnectionMatrix, path: &PathSpec, c: &[C64], cfg: &VerifyConfig) -> Result<VerifyReport> {
    if c.len() != a.n() {
        return Err(GkzError::InvalidInput("parameter length differs from n".into()));
    }
    let rows: Vec<RowReport> = (0..cm.source_basis.len())
        .into_par_iter()
        .map(|row| {
            verify_row(a, cm, path, row, c, cfg).unwrap_or_else(|err| RowReport {
                row,
                source: cm.source_basis[row].spec.clone(),
                kind: if cm.source_basis[row].cell.is_some() { "circuit" } else { "identity" }.into(),
                defect: f64::INFINITY,
                defect_start: f64::INFINITY,
                defect_end: f64::INFINITY,
                lhs_mag: 0.0,
                rhs_mag: 0.0,
                order: cfg.order,
                tail_start: f64::NAN,
                tail_end: f64::NAN,
                error: Some(err.to_string()),
            })
        })
        .collect();
    let max_defect = rows.iter().map(|r| r.defect).fold(0.0, f64::max);
    Ok(VerifyReport { passed: max_defect < cfg.tol, max_defect, tol: cfg.tol, rows, margins: path.margins.clone(), c: c.to_vec() })
}

/// Matrix of exact coefficients re-expressing `from` in `to` (same simplices, any partitions
/// and representatives, `to` complete on each simplex).
pub fn change_of_basis(a: &Configuration, from: &[BasisEntry], to: &[BasisEntry]) -> Result<Vec<Vec<Fraction>>> {
    let n = a.n();
    let groups = group_targets(to);
    let mut out = vec![vec![Fraction::zero(n); to.len()]; from.len()];
    for (row, e) in from.iter().enumerate() {
        let cols = groups.get(&e.spec.sigma).ok_or_else(|| GkzError::RepresentativeMismatch(format!("{:?} missing", e.spec.sigma)))?;
        let specs: Vec<GammaSeriesSpec> = cols.iter().map(|&c| to[c].spec.clone()).collect();
        for (x, &col) in convert(a, &e.spec, &specs)?.into_iter().zip(cols) {
            out[row][col] = x;
        }
    }
    Ok(out)
}

pub fn mat_mul(a: &[Vec<Fraction>], b: &[Vec<Fraction>], n: usize) -> Result<Vec<Vec<Fraction>>> {
    let cols = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![Fraction::zero(n); cols]; a.len()];
    for (i, row) in a.iter().enumerate() {
        for (k, x) in row.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for j in 0..cols {
                if !b[k][j].is_zero() {
                    out[i][j] = out[i][j].add(&x.mul(&b[k][j])?)?;
                }
            }
        }
    }
    Ok(out)
}

pub fn is_identity(m: &[Vec<Fraction>], n: usize) -> bool {
    let one = Fraction::constant(n, Q::one());
    m.iter().enumerate().all(|(i, row)| row.iter().enumerate().all(|(j, x)| if i == j { *x == one } else { x.is_zero() }))
}

/// Translation invariance of every entry, tested exactly.
pub fn entries_translation_invariant(a: &Configuration, cm: &ConnectionMatrix) -> bool {
    cm.entries.iter().flatten().all(|f| f.is_translation_invariant(a))
}

pub fn to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}
