//! Regular subdivisions, secondary-fan cones, circuits and modifications.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GkzError, Result};
use crate::lattice::{simplex_data, Configuration, SimplexData};
use crate::linalg::{self, qi, Q, Z};
use crate::lp;

pub type Triangulation = Vec<Vec<usize>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Subdivision {
    pub cells: Vec<Vec<usize>>,
    #[serde(with = "crate::serde_q::vec")]
    pub weight: Vec<Q>,
    pub is_triangulation: bool,
    pub is_almost: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Circuit {
    pub z: Vec<usize>,
    /// Generator entries aligned with `z`.
    pub u: Vec<i64>,
    pub zplus: Vec<usize>,
    pub zminus: Vec<usize>,
}

impl Circuit {
    pub fn from_u(z: Vec<usize>, u: Vec<i64>) -> Self {
        let zplus = z.iter().zip(&u).filter(|(_, &x)| x > 0).map(|(&j, _)| j).collect();
        let zminus = z.iter().zip(&u).filter(|(_, &x)| x < 0).map(|(&j, _)| j).collect();
        Circuit { z, u, zplus, zminus }
    }

    pub fn negated(&self) -> Circuit {
        Circuit::from_u(self.z.clone(), self.u.iter().map(|x| -x).collect())
    }

    pub fn u_of(&self, j: usize) -> i64 {
        self.z.iter().position(|&x| x == j).map_or(0, |k| self.u[k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Modification {
    pub t: Triangulation,
    pub tprime: Triangulation,
    pub q: Subdivision,
    pub tirr: Triangulation,
    pub corank1_cells: Vec<Vec<usize>>,
    /// Oriented so that T = T_irr + {I \ j : j in Z+}.
    pub circuit: Circuit,
    #[serde(with = "crate::serde_q::vec")]
    pub omega_q: Vec<Q>,
    /// Rows g meaning g . omega > 0; together they cut out C~+.
    #[serde(with = "crate::serde_q::mat")]
    pub ctilde: Vec<Vec<Q>>,
}

impl Modification {
    pub fn core(&self) -> Vec<usize> {
        let mut it = self.corank1_cells.iter();
        let first: BTreeSet<usize> = it.next().map(|c| c.iter().copied().collect()).unwrap_or_default();
        it.fold(first, |acc, c| acc.intersection(&c.iter().copied().collect()).copied().collect()).into_iter().collect()
    }
}

pub fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

pub fn canonical(mut t: Triangulation) -> Triangulation {
    for c in t.iter_mut() {
        c.sort_unstable();
    }
    t.sort();
    t.dedup();
    t
}

fn bases(a: &Configuration, cols: &[usize]) -> Vec<SimplexData> {
    combinations(cols, a.n()).into_iter().filter_map(|s| simplex_data(a, &s).ok()).collect()
}

/// Maximal cells of the lower hull of `cols` lifted by `levels`, compared lexicographically.
fn lower_cells(a: &Configuration, cols: &[usize], levels: &[Vec<Q>]) -> Vec<Vec<usize>> {
    let mut cells = BTreeSet::new();
    'basis: for sd in bases(a, cols) {
        let normals: Vec<Vec<Q>> = levels
            .iter()
            .map(|w| {
                let wt: Vec<Q> = sd.sigma.iter().map(|&i| w[i - 1].clone()).collect();
                linalg::vec_mat(&wt, &sd.inv)
            })
            .collect();
        let mut cell = Vec::new();
        for &j in cols {
            let mut on = true;
            for (w, nv) in levels.iter().zip(&normals) {
                let d = &w[j - 1] - linalg::dot(nv, a.col(j));
                if d.is_negative() {
                    continue 'basis;
                }
                if d.is_positive() {
                    on = false;
                    break;
                }
            }
            if on {
                cell.push(j);
            }
        }
        cells.insert(cell);
    }
    cells.into_iter().collect()
}

/// The circuit inside a corank-1 cell, oriented so its first entry is positive.
pub fn circuit_of_cell(a: &Configuration, cell: &[usize]) -> Option<Circuit> {
    let ns = linalg::nullspace(&a.submatrix(cell));
    if ns.len() != 1 {
        return None;
    }
    let prim = linalg::primitive(&ns[0]);
    let (z, u): (Vec<usize>, Vec<Z>) = cell.iter().zip(prim).filter(|(_, x)| !x.is_zero()).map(|(&j, x)| (j, x)).unzip();
    let mut u: Vec<i64> = u.iter().map(|x| x.to_i64().expect("circuit entry fits i64")).collect();
    if u[0] < 0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    Some(Circuit::from_u(z, u))
}

fn classify(a: &Configuration, cells: Vec<Vec<usize>>, weight: Vec<Q>) -> Subdivision {
    let n = a.n();
    let is_triangulation = cells.iter().all(|c| c.len() == n);
    let mut is_almost = false;
    if !is_triangulation && cells.iter().all(|c| c.len() <= n + 1) {
        let circuits: BTreeSet<Circuit> = cells.iter().filter(|c| c.len() == n + 1).filter_map(|c| circuit_of_cell(a, c)).collect();
        is_almost = circuits.len() == 1;
    }
    Subdivision { cells, weight, is_triangulation, is_almost }
}

/// S(omega).
pub fn regular_subdivision(a: &Configuration, omega: &[Q]) -> Result<Subdivision> {
    check_weight(a, omega)?;
    let cells = lower_cells(a, &a.labels(), &[omega.to_vec()]);
    Ok(classify(a, cells, omega.to_vec()))
}

fn check_weight(a: &Configuration, omega: &[Q]) -> Result<()> {
    if omega.len() != a.big_n() {
        return Err(GkzError::InvalidInput(format!("weight needs {} entries", a.big_n())));
    }
    Ok(())
}

fn unit(nn: usize, j: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); nn];
    v[j] = Q::one();
    v
}

/// The triangulation refining S(omega) obtained from omega + e(1,2,4,...), ties broken by
/// further infinitesimal unit weights. The stored weight realizes it exactly.
pub fn regular_triangulation_perturbed(a: &Configuration, omega: &[Q]) -> Result<Subdivision> {
    check_weight(a, omega)?;
    let nn = a.big_n();
    let mut levels = vec![omega.to_vec(), (0..nn).map(|j| qi(1i64 << j.min(62))).collect()];
    levels.extend((0..nn).map(|j| unit(nn, j)));
    let cells = lower_cells(a, &a.labels(), &levels);
    let weight = cone_interior(a, &cells).ok_or_else(|| GkzError::Internal("lexicographic triangulation not regular".into()))?;
    Ok(classify(a, cells, weight))
}

/// Strict rows g (g . omega > 0) and equalities (g . omega = 0) cutting out the relatively
/// open cone of weights inducing the subdivision with the given maximal cells.
pub fn cone_system(a: &Configuration, cells: &[Vec<usize>]) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
    let nn = a.big_n();
    let mut strict = Vec::new();
    let mut eq = Vec::new();
    for cell in cells {
        let Some(sd) = bases(a, cell).into_iter().next() else { continue };
        for j in 1..=nn {
            if sd.contains(j) {
                continue;
            }
            let x = sd.coords(a.col(j));
            let mut g = vec![Q::zero(); nn];
            g[j - 1] = Q::one();
            for (k, &i) in sd.sigma.iter().enumerate() {
                g[i - 1] -= &x[k];
            }
            if cell.contains(&j) {
                eq.push(g);
            } else {
                strict.push(g);
            }
        }
    }
    (dedup_rows(strict), dedup_rows(eq))
}

fn dedup_rows(rows: Vec<Vec<Q>>) -> Vec<Vec<Q>> {
    let mut seen = BTreeSet::new();
    rows.into_iter().filter(|r| seen.insert(r.clone())).collect()
}

/// C_T as strict inequalities.
pub fn cone_inequalities(a: &Configuration, t: &[Vec<usize>]) -> Vec<Vec<Q>> {
    cone_system(a, t).0
}

/// An exact weight in the relative interior of the cone of the given subdivision.
pub fn cone_interior(a: &Configuration, cells: &[Vec<usize>]) -> Option<Vec<Q>> {
    let (strict, eq) = cone_system(a, cells);
    let (x, _) = lp::interior_point(&strict, &eq, a.big_n())?;
    let got = lower_cells(a, &a.labels(), std::slice::from_ref(&x));
    (canonical(got) == canonical(cells.to_vec())).then_some(x)
}

pub fn satisfies(rows: &[Vec<Q>], omega: &[Q]) -> bool {
    rows.iter().all(|g| linalg::dot(g, omega).is_positive())
}

pub fn is_convergent(a: &Configuration, t: &Subdivision) -> Result<bool> {
    if !t.is_triangulation {
        return Err(GkzError::NotATriangulation);
    }
    for cell in &t.cells {
        let sd = simplex_data(a, cell)?;
        for j in a.labels() {
            if !sd.contains(j) && sd.coords(a.col(j)).iter().sum::<Q>() > Q::one() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Normalized volume of conv(0, a(1), ..., a(N)).
pub fn normalized_volume(a: &Configuration) -> Result<Z> {
    let n = a.n();
    let nn = a.big_n();
    // homogenize the points 0, a(1..N) and lift by squared norms
    let mut rows = vec![vec![1i64; nn + 1]];
    for r in a.rows() {
        let mut row = vec![0i64];
        row.extend_from_slice(r);
        rows.push(row);
    }
    let b = Configuration::new(rows).map_err(|_| GkzError::ZeroVolume)?;
    let mut lift = vec![Q::zero()];
    lift.extend((1..=nn).map(|j| qi(a.col_i64(j).iter().map(|x| x * x).sum())));
    let mut levels = vec![lift];
    levels.extend((0..=nn).map(|j| unit(nn + 1, j)));
    let cells = lower_cells(&b, &b.labels(), &levels);
    let mut vol = Z::zero();
    for c in &cells {
        if c.len() != n + 1 {
            return Err(GkzError::Internal("volume lifting not generic".into()));
        }
        vol += simplex_data(&b, c)?.det_abs();
    }
    if vol.is_zero() {
        return Err(GkzError::ZeroVolume);
    }
    Ok(vol)
}

/// vol_Z(Delta_A) / [Z^n : ZA].
pub fn rank_gg(a: &Configuration) -> Result<Z> {
    let v = normalized_volume(a)?;
    let idx = crate::lattice::lattice_index(a);
    if !(&v % &idx).is_zero() {
        return Err(GkzError::Internal(format!("volume {v} not divisible by index {idx}")));
    }
    Ok(v / idx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Facet {
    pub columns: Vec<usize>,
    /// Supporting functional h with h . a(j) = 1 on the facet.
    #[serde(with = "crate::serde_q::vec")]
    pub normal: Vec<Q>,
    pub volume: String,
}

/// Facets of Delta_A not containing the origin with vol_Z(conv(0 u F)).
pub fn facets_off_origin(a: &Configuration) -> Result<Vec<Facet>> {
    let mut found: BTreeMap<Vec<usize>, Vec<Q>> = BTreeMap::new();
    'basis: for sd in bases(a, &a.labels()) {
        let ones = vec![Q::one(); a.n()];
        let h = linalg::vec_mat(&ones, &sd.inv);
        let mut f = Vec::new();
        for j in a.labels() {
            let v = linalg::dot(&h, a.col(j));
            if v > Q::one() {
                continue 'basis;
            }
            if v == Q::one() {
                f.push(j);
            }
        }
        found.entry(f).or_insert(h);
    }
    let nn = a.big_n();
    let mut out = Vec::new();
    for (cols, h) in found {
        let mut levels = Vec::new();
        levels.extend((0..nn).map(|j| unit(nn, j)));
        let cells = lower_cells(a, &cols, &levels);
        let mut vol = Z::zero();
        for c in &cells {
            vol += simplex_data(a, c)?.det_abs();
        }
        out.push(Facet { columns: cols, normal: h, volume: vol.to_string() });
    }
    Ok(out)
}

/// All circuits, u normalized primitive with first entry positive.
pub fn find_circuits(a: &Configuration) -> Vec<Circuit> {
    let labels = a.labels();
    let mut out = Vec::new();
    for k in 2..=a.n() + 1 {
        for z in combinations(&labels, k) {
            let ns = linalg::nullspace(&a.submatrix(&z));
            if ns.len() != 1 || ns[0].iter().any(|x| x.is_zero()) {
                continue;
            }
            if let Some(c) = circuit_of_cell(a, &z) {
                out.push(c);
            }
        }
    }
    out
}

/// Coordinates of the linear form g in a basis of L_A (g must lie in the Q-span).
pub fn project_form(g: &[Q], basis: &[Vec<Z>]) -> Result<Vec<Q>> {
    let d = basis.len();
    let nn = g.len();
    let mut m: Vec<Vec<Q>> = (0..nn)
        .map(|i| {
            let mut r: Vec<Q> = basis.iter().map(|u| linalg::qz(&u[i])).collect();
            r.push(g[i].clone());
            r
        })
        .collect();
    let piv = linalg::rref(&mut m);
    if piv.contains(&d) {
        return Err(GkzError::InvalidInput("form not in the span of the lattice basis".into()));
    }
    let mut lam = vec![Q::zero(); d];
    for (r, &p) in piv.iter().enumerate() {
        lam[p] = m[r][d].clone();
    }
    Ok(lam)
}

/// pi_A(omega) = (omega . u_k)_k.
pub fn project_weight(omega: &[Q], basis: &[Vec<Z>]) -> Vec<Q> {
    basis.iter().map(|u| omega.iter().zip(u).fold(Q::zero(), |acc, (w, x)| acc + w * linalg::qz(x))).collect()
}

/// Projected strict inequalities lambda . w > 0, primitive integer, deduplicated.
pub fn project_inequalities(rows: &[Vec<Q>], basis: &[Vec<Z>]) -> Result<Vec<Vec<Z>>> {
    let mut set = BTreeSet::new();
    for g in rows {
        let lam = project_form(g, basis)?;
        if lam.iter().all(|x| x.is_zero()) {
            continue;
        }
        set.insert(linalg::primitive(&lam));
    }
    Ok(set.into_iter().collect())
}

/// Drops inequalities implied by the others (a row is redundant if the rest, with the row
/// reversed to <= 0, admit no nonzero point).
pub fn irredundant(rows: &[Vec<Z>]) -> Vec<Vec<Z>> {
    let q: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(linalg::qz).collect()).collect();
    let mut keep: Vec<usize> = (0..rows.len()).collect();
    let mut i = 0;
    while i < keep.len() {
        let idx = keep[i];
        let others: Vec<Vec<Q>> = keep.iter().filter(|&&k| k != idx).map(|&k| q[k].clone()).collect();
        // implied iff {others >= 0 (closed), row < 0} has no solution: test strictly
        let mut strict = others.clone();
        strict.push(q[idx].iter().map(|x| -x).collect());
        let dim = q[idx].len();
        let implied = lp::interior_point(&strict, &[], dim).is_none() && {
            // closure check: others open and row < 0 infeasible too
            let mut cons: Vec<lp::Constraint> = others.iter().map(|g| lp::Constraint::new(g.clone(), lp::Cmp::Ge, Q::zero())).collect();
            cons.push(lp::Constraint::new(q[idx].iter().map(|x| -x).collect(), lp::Cmp::Ge, Q::one()));
            matches!(lp::maximize(&vec![Q::zero(); dim], &cons), lp::LpResult::Infeasible)
        };
        if implied {
            keep.remove(i);
        } else {
            i += 1;
        }
    }
    keep.into_iter().map(|k| rows[k].clone()).collect()
}

fn difference(x: &[Vec<usize>], y: &[Vec<usize>]) -> Vec<Vec<usize>> {
    x.iter().filter(|c| !y.contains(c)).cloned().collect()
}

fn minus(cell: &[usize], j: usize) -> Vec<usize> {
    cell.iter().copied().filter(|&x| x != j).collect()
}

/// The modification taking T to T'.
pub fn modification(a: &Configuration, t: &[Vec<usize>], tprime: &[Vec<usize>]) -> Result<Modification> {
    let t = canonical(t.to_vec());
    let tp = canonical(tprime.to_vec());
    for c in t.iter().chain(&tp) {
        a.check_labels(c)?;
        if c.len() != a.n() {
            return Err(GkzError::NotATriangulation);
        }
    }
    let d = difference(&t, &tp);
    let dp = difference(&tp, &t);
    if d.is_empty() || dp.is_empty() {
        return Err(GkzError::NotAdjacent);
    }
    let tirr: Triangulation = t.iter().filter(|c| tp.contains(c)).cloned().collect();
    let used: BTreeSet<usize> = d.iter().chain(&dp).flatten().copied().collect();
    for base in find_circuits(a) {
        if !base.z.iter().all(|j| used.contains(j)) {
            continue;
        }
        for circ in [base.clone(), base.negated()] {
            let mut cells = BTreeSet::new();
            let mut ok = true;
            for s in &d {
                let missing: Vec<usize> = circ.z.iter().copied().filter(|j| !s.contains(j)).collect();
                if missing.len() != 1 || !circ.zplus.contains(&missing[0]) {
                    ok = false;
                    break;
                }
                let mut cell = s.clone();
                cell.push(missing[0]);
                cell.sort_unstable();
                cells.insert(cell);
            }
            if !ok {
                continue;
            }
            let plus: Triangulation = canonical(cells.iter().flat_map(|c| circ.zplus.iter().map(move |&j| minus(c, j))).collect());
            let minus_side: Triangulation = canonical(cells.iter().flat_map(|c| circ.zminus.iter().map(move |&j| minus(c, j))).collect());
            if plus != canonical(d.clone()) || minus_side != canonical(dp.clone()) {
                continue;
            }
            let cells: Vec<Vec<usize>> = cells.into_iter().collect();
            let mut qcells = tirr.clone();
            qcells.extend(cells.iter().cloned());
            let qcells = canonical(qcells);
            let Some(wq) = cone_interior(a, &qcells) else { continue };
            let q = classify(a, qcells, wq.clone());
            if !q.is_almost {
                continue;
            }
            let omega_q = omega_q(a, &wq, &cells)?;
            let ctilde = ctilde_rows(a, &cells, &circ)?;
            return Ok(Modification {
                t: t.clone(),
                tprime: tp.clone(),
                q,
                tirr: tirr.clone(),
                corank1_cells: cells,
                circuit: circ,
                omega_q,
                ctilde,
            });
        }
    }
    Err(GkzError::NotAdjacent)
}

fn omega_q(a: &Configuration, wq: &[Q], cells: &[Vec<usize>]) -> Result<Vec<Q>> {
    let nn = a.big_n();
    let mut acc = vec![Q::zero(); nn];
    for cell in cells {
        let sd = bases(a, cell).into_iter().next().ok_or_else(|| GkzError::Internal("cell without basis".into()))?;
        let wt: Vec<Q> = sd.sigma.iter().map(|&i| wq[i - 1].clone()).collect();
        let nv = linalg::vec_mat(&wt, &sd.inv);
        for j in 1..=nn {
            acc[j - 1] += &wq[j - 1] - linalg::dot(&nv, a.col(j));
        }
    }
    let min_pos = acc.iter().filter(|x| x.is_positive()).min().cloned();
    if let Some(m) = min_pos {
        for x in acc.iter_mut() {
            *x = &*x / &m;
        }
    }
    Ok(acc)
}

fn ctilde_rows(a: &Configuration, cells: &[Vec<usize>], circ: &Circuit) -> Result<Vec<Vec<Q>>> {
    let nn = a.big_n();
    let mut rows = Vec::new();
    for cell in cells {
        for &j in &circ.zplus {
            let sd = simplex_data(a, &minus(cell, j))?;
            for k in 1..=nn {
                if cell.contains(&k) {
                    continue;
                }
                let x = sd.coords(a.col(k));
                let mut g = vec![Q::zero(); nn];
                g[k - 1] = Q::one();
                for (pos, &i) in sd.sigma.iter().enumerate() {
                    g[i - 1] -= &x[pos];
                }
                rows.push(g);
            }
        }
    }
    Ok(dedup_rows(rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FlipNode {
    pub triangulation: Triangulation,
    #[serde(with = "crate::serde_q::vec")]
    pub weight: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FlipEdge {
    pub from: usize,
    pub to: usize,
    /// Circuit oriented for the move from `from` to `to`.
    pub circuit: Circuit,
    pub corank1_cells: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FlipGraph {
    pub nodes: Vec<FlipNode>,
    pub edges: Vec<FlipEdge>,
    pub truncated: bool,
}

/// Regular triangulations adjacent to `t` (which has interior weight `wt`).
pub fn neighbours(a: &Configuration, t: &[Vec<usize>], wt: &[Q]) -> Vec<Triangulation> {
    let (rows, _) = cone_system(a, t);
    // group rows by direction to avoid repeated facet tests
    let mut dirs: BTreeMap<Vec<Z>, Vec<Q>> = BTreeMap::new();
    for g in &rows {
        dirs.entry(linalg::primitive(g)).or_insert_with(|| g.clone());
    }
    let mut out = BTreeSet::new();
    let nn = a.big_n();
    for (key, g) in &dirs {
        let others: Vec<Vec<Q>> = dirs.iter().filter(|(k, _)| *k != key).map(|(_, v)| v.clone()).collect();
        let Some((wf, _)) = lp::interior_point(&others, std::slice::from_ref(g), nn) else { continue };
        let away: Vec<Q> = wt.iter().map(|x| -x).collect();
        let mut levels = vec![wf, away];
        levels.extend((0..nn).map(|j| unit(nn, j)));
        let tp = canonical(lower_cells(a, &a.labels(), &levels));
        if tp.iter().all(|c| c.len() == a.n()) && tp != canonical(t.to_vec()) {
            out.insert(tp);
        }
    }
    out.into_iter().collect()
}

/// Breadth-first enumeration of regular triangulations by modifications.
pub fn flip_graph(a: &Configuration, max_nodes: usize) -> Result<FlipGraph> {
    let seed = regular_triangulation_perturbed(a, &vec![Q::zero(); a.big_n()])?;
    let mut nodes = vec![FlipNode { triangulation: canonical(seed.cells), weight: seed.weight }];
    let mut index: BTreeMap<Triangulation, usize> = BTreeMap::new();
    index.insert(nodes[0].triangulation.clone(), 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;
    while let Some(i) = queue.pop_front() {
        let (t, wt) = (nodes[i].triangulation.clone(), nodes[i].weight.clone());
        for tp in neighbours(a, &t, &wt) {
            let j = match index.get(&tp) {
                Some(&j) => j,
                None => {
                    if nodes.len() >= max_nodes {
                        truncated = true;
                        continue;
                    }
                    let w = cone_interior(a, &tp).ok_or_else(|| GkzError::Internal("neighbour not regular".into()))?;
                    nodes.push(FlipNode { triangulation: tp.clone(), weight: w });
                    index.insert(tp.clone(), nodes.len() - 1);
                    queue.push_back(nodes.len() - 1);
                    nodes.len() - 1
                }
            };
            if i < j {
                let m = modification(a, &t, &tp)?;
                edges.push(FlipEdge { from: i, to: j, circuit: m.circuit, corank1_cells: m.corank1_cells });
            }
        }
    }
    edges.sort_by_key(|e| (e.from, e.to));
    Ok(FlipGraph { nodes, edges, truncated })
}
