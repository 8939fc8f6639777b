//! Exact rational linear programming (dense tableau, Bland's rule).

use num_traits::{One, Signed, Zero};

use crate::linalg::{qi, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Q>,
    pub cmp: Cmp,
    pub rhs: Q,
}

impl Constraint {
    pub fn new(coeffs: Vec<Q>, cmp: Cmp, rhs: Q) -> Self {
        Constraint { coeffs, cmp, rhs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Q>>, // each row: coefficients then rhs
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for x in self.rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    if !p.is_zero() {
                        *x -= &f * p;
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `obj` over columns `0..allowed`; returns false if unbounded.
    fn optimize(&mut self, obj: &[Q], allowed: usize) -> bool {
        loop {
            // reduced costs: obj_j - sum_b obj_b * row_b[j]
            let mut enter = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut rc = obj[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !obj[b].is_zero() && !self.rows[i][j].is_zero() {
                        rc -= &obj[b] * &self.rows[i][j];
                    }
                }
                if rc.is_positive() {
                    enter = Some(j);
                    break;
                }
            }
            let Some(c) = enter else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[self.width] / &row[c];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Maximizes obj . x over free variables x subject to `cons`.
pub fn maximize(obj: &[Q], cons: &[Constraint]) -> LpResult {
    let nv = obj.len();
    let m = cons.len();
    // columns: x+ (nv), x- (nv), slacks (m), artificials (m)
    let n_struct = 2 * nv;
    let slack0 = n_struct;
    let art0 = slack0 + m;
    let width = art0 + m;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for (i, c) in cons.iter().enumerate() {
        let mut row = vec![Q::zero(); width + 1];
        let flip = c.rhs.is_negative();
        let sgn = if flip { -Q::one() } else { Q::one() };
        for (j, a) in c.coeffs.iter().enumerate() {
            row[j] = a * &sgn;
            row[nv + j] = -a * &sgn;
        }
        let cmp = match (c.cmp, flip) {
            (Cmp::Le, true) => Cmp::Ge,
            (Cmp::Ge, true) => Cmp::Le,
            (k, _) => k,
        };
        match cmp {
            Cmp::Le => row[slack0 + i] = Q::one(),
            Cmp::Ge => row[slack0 + i] = -Q::one(),
            Cmp::Eq => {}
        }
        row[art0 + i] = Q::one();
        row[width] = c.rhs.abs();
        rows.push(row);
        basis.push(art0 + i);
    }
    let mut t = Tableau { rows, basis, width };
    // phase 1
    let mut obj1 = vec![Q::zero(); width];
    for x in obj1.iter_mut().skip(art0) {
        *x = -Q::one();
    }
    t.optimize(&obj1, width);
    let infeas: Q = t.basis.iter().enumerate().filter(|(_, &b)| b >= art0).fold(Q::zero(), |acc, (i, _)| acc + &t.rows[i][width]);
    if infeas.is_positive() {
        return LpResult::Infeasible;
    }
    // drive zero-level artificials out of the basis where possible
    for i in 0..m {
        if t.basis[i] >= art0 {
            if let Some(c) = (0..art0).find(|&c| !t.rows[i][c].is_zero()) {
                t.pivot(i, c);
            }
        }
    }
    let mut obj2 = vec![Q::zero(); width];
    for j in 0..nv {
        obj2[j] = obj[j].clone();
        obj2[nv + j] = -obj[j].clone();
    }
    // artificials still basic sit in redundant rows at level 0; keep them out of entering set
    if !t.optimize(&obj2, art0) {
        return LpResult::Unbounded;
    }
    let mut full = vec![Q::zero(); width];
    for (i, &b) in t.basis.iter().enumerate() {
        full[b] = t.rows[i][width].clone();
    }
    let x: Vec<Q> = (0..nv).map(|j| &full[j] - &full[nv + j]).collect();
    let value = x.iter().zip(obj).fold(Q::zero(), |acc, (a, b)| acc + a * b);
    LpResult::Optimal { x, value }
}

/// Finds x with `eq . x = 0` and `strict . x > 0` for every row, maximizing the
/// smallest slack inside the box |x_i| <= 1. Returns (x, slack) when the slack is positive.
pub fn interior_point(strict: &[Vec<Q>], eq: &[Vec<Q>], dim: usize) -> Option<(Vec<Q>, Q)> {
    interior_point_affine(strict, &vec![Q::zero(); strict.len()], eq, dim)
}

/// As `interior_point` with strict rows `g . x > b`.
pub fn interior_point_affine(strict: &[Vec<Q>], rhs: &[Q], eq: &[Vec<Q>], dim: usize) -> Option<(Vec<Q>, Q)> {
    let nv = dim + 1;
    let mut cons = Vec::new();
    for (g, b) in strict.iter().zip(rhs) {
        let mut c = g.clone();
        c.push(-Q::one());
        cons.push(Constraint::new(c, Cmp::Ge, b.clone()));
    }
    for g in eq {
        let mut c = g.clone();
        c.push(Q::zero());
        cons.push(Constraint::new(c, Cmp::Eq, Q::zero()));
    }
    for i in 0..dim {
        let mut c = vec![Q::zero(); nv];
        c[i] = Q::one();
        cons.push(Constraint::new(c.clone(), Cmp::Le, Q::one()));
        cons.push(Constraint::new(c, Cmp::Ge, -Q::one()));
    }
    let mut c = vec![Q::zero(); nv];
    c[dim] = Q::one();
    cons.push(Constraint::new(c, Cmp::Le, Q::one()));
    let mut obj = vec![Q::zero(); nv];
    obj[dim] = qi(1);
    match maximize(&obj, &cons) {
        LpResult::Optimal { mut x, value } if value.is_positive() => {
            x.pop();
            Some((x, value))
        }
        _ => None,
    }
}
