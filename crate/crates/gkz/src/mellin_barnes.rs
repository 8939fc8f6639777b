//! The univariate circuit Mellin-Barnes integral and its two residue expansions.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GkzError, Result};
use crate::geometry::{circuit_of_cell, Circuit};
use crate::lattice::{simplex_data, Configuration};
use crate::linalg::{self, Q};
use crate::series::{evaluate, GammaSeriesSpec, LogPoint, ParameterPoint};
use crate::special::{is_nonpositive_integer, ln_factorial, ln_gamma};

/// Integrand data for a corank-1 cell I, a column j0 with u_{j0} > 0 and sigma = I \ j0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MBIntegrand {
    pub cell: Vec<usize>,
    pub circuit: Circuit,
    pub j0: usize,
    pub sigma: Vec<usize>,
    /// p_{sigma i}(a(j0)) aligned with `sigma`.
    #[serde(with = "crate::serde_q::vec")]
    pub beta: Vec<Q>,
    pub ktilde: Vec<i64>,
    /// p_{sigma i}(c) aligned with `sigma`.
    #[serde(with = "crate::serde_c::vec")]
    pub pc: Vec<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuadConfig {
    /// Largest |Im s| allowed.
    pub height: f64,
    /// Initial step; halved until two successive results agree.
    pub step: Option<f64>,
    /// Re s of the integration line; chosen automatically when absent.
    pub shift: Option<f64>,
    pub tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { height: 4000.0, step: None, shift: None, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MBValue {
    #[serde(with = "crate::serde_c::scalar")]
    pub value: C64,
    pub estimate: f64,
    pub sector_margin: f64,
    pub shift: f64,
    pub residue_corrections: usize,
}

enum Skip {
    None,
    Positive,
    Negative(usize),
}

impl MBIntegrand {
    pub fn new(a: &Configuration, cell: &[usize], j0: usize, c: &[C64], ktilde: &[i64]) -> Result<Self> {
        let mut cell = cell.to_vec();
        cell.sort_unstable();
        a.check_labels(&cell)?;
        if c.len() != a.n() {
            return Err(GkzError::InvalidInput("parameter length differs from n".into()));
        }
        let mut circuit =
            circuit_of_cell(a, &cell).ok_or_else(|| GkzError::InvalidInput(format!("{cell:?} is not a corank-1 configuration")))?;
        match circuit.u_of(j0) {
            0 => return Err(GkzError::InvalidInput(format!("column {j0} is not in the circuit {:?}", circuit.z))),
            x if x < 0 => circuit = circuit.negated(),
            _ => {}
        }
        let sigma: Vec<usize> = cell.iter().copied().filter(|&j| j != j0).collect();
        let sd = simplex_data(a, &sigma)?;
        if ktilde.len() != sigma.len() {
            return Err(GkzError::InvalidInput("ktilde length differs from |sigma|".into()));
        }
        let beta = sd.coords(a.col(j0));
        let pc = sd.inv.iter().map(|r| r.iter().zip(c).map(|(x, ci)| *ci * linalg::q_to_f64(x)).sum()).collect();
        Ok(MBIntegrand { cell, circuit, j0, sigma, beta, ktilde: ktilde.to_vec(), pc })
    }

    /// The same integrand at another parameter c.
    pub fn with_parameter(&self, a: &Configuration, c: &[C64]) -> Result<Self> {
        let sd = simplex_data(a, &self.sigma)?;
        let pc = sd.inv.iter().map(|r| r.iter().zip(c).map(|(x, ci)| *ci * linalg::q_to_f64(x)).sum()).collect();
        Ok(MBIntegrand { pc, ..self.clone() })
    }

    fn in_zminus(&self, i: usize) -> bool {
        self.circuit.zminus.contains(&i)
    }

    fn beta_f(&self, k: usize) -> f64 {
        linalg::q_to_f64(&self.beta[k])
    }

    fn logs(&self, z: &LogPoint) -> Result<(Vec<C64>, C64)> {
        let mut l = Vec::new();
        for (k, &i) in self.sigma.iter().enumerate() {
            if z.is_zero(i) {
                return Err(GkzError::NotASeriesInZj(i));
            }
            let extra = 2.0 * PI * self.ktilde[k] as f64 + if self.in_zminus(i) { PI } else { 0.0 };
            l.push(z.log(i) + C64::new(0.0, extra));
        }
        Ok((l, z.log(self.j0) + C64::new(0.0, PI)))
    }

    /// log zeta, the variable the integrand is a Mellin transform in.
    pub fn log_zeta(&self, z: &LogPoint) -> Result<C64> {
        let (l, lj) = self.logs(z)?;
        Ok(lj - l.iter().enumerate().map(|(k, x)| *x * self.beta_f(k)).sum::<C64>())
    }

    /// Exponential decay rate of the Gamma factors along vertical lines.
    fn decay_rate(&self) -> f64 {
        let total: f64 = (0..self.sigma.len()).map(|k| self.beta_f(k)).sum();
        0.5 * PI * (1.0 + total)
    }

    /// Distance of arg zeta from the boundary of the convergence sector.
    pub fn sector_margin(&self, z: &LogPoint) -> Result<f64> {
        Ok(self.decay_rate() - self.log_zeta(z)?.im.abs())
    }

    pub fn check_sector(&self, z: &LogPoint) -> Result<f64> {
        let theta = self.log_zeta(z)?.im;
        let m = self.decay_rate() - theta.abs();
        if m <= 0.0 {
            return Err(GkzError::SectorViolation(theta));
        }
        Ok(m)
    }

    fn ln_parts(&self, l: &[C64], lj: C64, s: C64, skip: Skip) -> Option<C64> {
        let mut acc = s * lj;
        if !matches!(skip, Skip::Positive) {
            acc += ln_gamma(-s);
        }
        for (k, &i) in self.sigma.iter().enumerate() {
            let p = self.pc[k] + s * self.beta_f(k);
            if self.in_zminus(i) {
                if !matches!(skip, Skip::Negative(x) if x == k) {
                    acc += ln_gamma(p);
                }
            } else {
                if is_nonpositive_integer(1.0 - p) {
                    return None;
                }
                acc -= ln_gamma(1.0 - p);
            }
            acc -= p * l[k];
        }
        Some(acc)
    }

    fn integrand(&self, l: &[C64], lj: C64, s: C64) -> C64 {
        self.ln_parts(l, lj, s, Skip::None).map_or(C64::zero(), |x| x.exp())
    }

    /// Poles s = -(p_i(c) + m)/beta_i of the Gamma factors over Z-, with Re s above `floor`.
    fn negative_poles(&self, floor: f64) -> Vec<(usize, u32, C64)> {
        let mut out = Vec::new();
        for (k, &i) in self.sigma.iter().enumerate() {
            if !self.in_zminus(i) {
                continue;
            }
            let b = self.beta_f(k);
            for m in 0u32.. {
                let s = -(self.pc[k] + m as f64) / b;
                if s.re <= floor {
                    break;
                }
                out.push((k, m, s));
            }
        }
        out
    }

    fn default_shift(&self) -> f64 {
        let neg = self.negative_poles(-3.0);
        let top = neg.iter().map(|p| p.2.re).fold(f64::NEG_INFINITY, f64::max);
        if top < 0.0 {
            return if top == f64::NEG_INFINITY { -0.5 } else { 0.5 * top };
        }
        // No separating line: take the widest gap between pole real parts.
        let mut xs: Vec<f64> = neg.iter().map(|p| p.2.re).chain((0..4).map(|k| k as f64)).collect();
        xs.push(-3.0);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (mut best, mut mid) = (0.0, -0.5);
        for w in xs.windows(2) {
            if w[1] - w[0] > best + 1e-12 {
                best = w[1] - w[0];
                mid = 0.5 * (w[0] + w[1]);
            }
        }
        mid
    }

    fn check_resonance(&self) -> Result<()> {
        let neg = self.negative_poles(-60.0);
        for (x, &(k1, _, s1)) in neg.iter().enumerate() {
            if s1.im.abs() < 1e-9 && s1.re > -1e-9 && (s1.re - s1.re.round()).abs() < 1e-9 {
                return Err(GkzError::ResonantParameters(format!("pole {s1} meets s = 0, 1, 2, ...")));
            }
            for &(k2, _, s2) in &neg[x + 1..] {
                if k1 != k2 && (s1 - s2).norm() < 1e-9 {
                    return Err(GkzError::ResonantParameters(format!("negative spirals meet at {s1}")));
                }
            }
        }
        Ok(())
    }

    /// Quadrature along Re s = shift plus the residues of poles on the wrong side of that line.
    pub fn mb_evaluate(&self, z: &LogPoint, quad: &QuadConfig) -> Result<MBValue> {
        let margin = self.check_sector(z)?;
        self.check_resonance()?;
        let (l, lj) = self.logs(z)?;
        let shift = quad.shift.unwrap_or_else(|| self.default_shift());
        let neg = self.negative_poles(shift - 1.0);
        let near_neg = neg.iter().map(|p| (p.2.re - shift).abs()).fold(f64::INFINITY, f64::min);
        let near_pos = (0..=(shift.max(0.0).ceil() as u32 + 1)).map(|k| (k as f64 - shift).abs()).fold(f64::INFINITY, f64::min);
        let gap = near_neg.min(near_pos);
        if gap < 1e-6 {
            return Err(GkzError::ContourHitsPole(shift));
        }

        // Height: march outward until the integrand has decayed for good.
        let f = |t: f64| self.integrand(&l, lj, C64::new(shift, t));
        let mut peak = f(0.0).norm();
        let mut top = [0.0f64; 2];
        for (side, sign) in [1.0f64, -1.0].into_iter().enumerate() {
            let mut t = 0.0;
            let mut quiet = 0.0;
            loop {
                t += 0.25;
                if t > quad.height {
                    return Err(GkzError::QuadratureNotConverged(t));
                }
                let v = f(sign * t).norm();
                peak = peak.max(v);
                let envelope = (-margin * t).exp() * (1.0 + t).powi(4);
                if v <= 1e-18 * peak && envelope < 1e-16 {
                    quiet += 0.25;
                } else {
                    quiet = 0.0;
                }
                if quiet >= 4.0 {
                    break;
                }
            }
            top[side] = t;
        }

        let trap = |h: f64| -> (C64, f64) {
            let lo = -(top[1] / h).ceil() as i64;
            let hi = (top[0] / h).ceil() as i64;
            let vals: Vec<C64> = (lo..=hi).into_par_iter().map(|k| f(k as f64 * h)).collect();
            let sum: C64 = vals.iter().sum();
            let abs: f64 = vals.iter().map(|v| v.norm()).sum();
            (sum * h / (2.0 * PI), abs * h / (2.0 * PI))
        };
        let mut h = quad.step.unwrap_or((0.5f64).min(gap / 2.0));
        let (mut prev, _) = trap(h);
        let (value_l, estimate) = loop {
            h /= 2.0;
            if h < 1e-4 {
                return Err(GkzError::QuadratureNotConverged(h));
            }
            let (cur, scale) = trap(h);
            let diff = (cur - prev).norm();
            if diff <= quad.tol * scale.max(cur.norm()) {
                break (cur, diff);
            }
            prev = cur;
        };

        let mut value = value_l;
        let mut corrections = 0;
        for &(k, m, s) in neg.iter().filter(|p| p.2.re > shift) {
            let rest = self.ln_parts(&l, lj, s, Skip::Negative(k)).map_or(C64::zero(), |x| x.exp());
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            value += rest * sign / (self.beta_f(k) * ln_factorial(m).exp());
            corrections += 1;
        }
        let mut k = 0u32;
        while (k as f64) < shift {
            let s = C64::new(k as f64, 0.0);
            let rest = self.ln_parts(&l, lj, s, Skip::Positive).map_or(C64::zero(), |x| x.exp());
            let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            value += rest * sign / ln_factorial(k).exp();
            corrections += 1;
            k += 1;
        }
        Ok(MBValue { value, estimate, sector_margin: margin, shift, residue_corrections: corrections })
    }

    /// The Gamma-series given by the residues at s = 0, 1, 2, ...
    pub fn positive_spec(&self) -> GammaSeriesSpec {
        GammaSeriesSpec::new(&self.sigma, &self.circuit.zminus, &self.ktilde).with_support(&self.cell)
    }

    /// The Gamma-series of the residues along the negative spirals, with their coefficients
    /// 1/p_{sigma i}(a(j0)).
    pub fn negative_specs(&self) -> Vec<(Q, GammaSeriesSpec)> {
        let mut out = Vec::new();
        for (k, &i) in self.sigma.iter().enumerate() {
            if !self.in_zminus(i) {
                continue;
            }
            let sp: Vec<usize> = self.cell.iter().copied().filter(|&j| j != i).collect();
            let kt: Vec<i64> = sp.iter().map(|&j| self.sigma.iter().position(|&x| x == j).map_or(0, |pos| self.ktilde[pos])).collect();
            let mut u: Vec<usize> = self.circuit.zminus.iter().copied().filter(|&j| j != i).collect();
            u.push(self.j0);
            out.push((self.beta[k].recip(), GammaSeriesSpec::new(&sp, &u, &kt).with_support(&self.cell)));
        }
        out
    }

    fn params(&self, a: &Configuration) -> Result<ParameterPoint> {
        // c = A_sigma p(c)
        let m = a.submatrix(&self.sigma);
        let c = m.iter().map(|row| row.iter().zip(&self.pc).map(|(x, p)| *p * linalg::q_to_f64(x)).sum()).collect();
        Ok(ParameterPoint(c))
    }

    pub fn residues_positive(&self, a: &Configuration, z: &LogPoint, order: u32) -> Result<C64> {
        let c = self.params(a)?;
        Ok(evaluate(a, &self.positive_spec(), z, &c, order, f64::INFINITY)?.value)
    }

    pub fn residues_negative(&self, a: &Configuration, z: &LogPoint, order: u32) -> Result<C64> {
        self.check_resonance()?;
        let c = self.params(a)?;
        let mut acc = C64::zero();
        for (coef, spec) in self.negative_specs() {
            acc += evaluate(a, &spec, z, &c, order, f64::INFINITY)?.value * linalg::q_to_f64(&coef);
        }
        Ok(acc)
    }
}

/// Exact coefficients 1/p_{sigma i}(a(j0)) for i in Z-, in label order.
pub fn negative_coefficients(ig: &MBIntegrand) -> Vec<(usize, Q)> {
    ig.sigma.iter().zip(&ig.beta).filter(|(i, b)| ig.circuit.zminus.contains(i) && b.is_positive()).map(|(&i, b)| (i, b.recip())).collect()
}
