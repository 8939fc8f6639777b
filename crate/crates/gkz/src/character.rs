//! Finite sums q e^{2 pi i (rho . c + theta)} with rational q, rho, theta, and their quotients.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GkzError, Result};
use crate::lattice::Configuration;
use crate::linalg::{self, fmt_q, qi, Q, Z};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "crate::serde_q::scalar")]
    pub coeff: Q,
    /// Constant phase theta in [0, 1).
    #[serde(with = "crate::serde_q::scalar")]
    pub phase: Q,
    #[serde(with = "crate::serde_q::vec")]
    pub rho: Vec<Q>,
}

/// Terms are merged on (rho, phase) and sorted; zero coefficients are dropped.
/// Equality is the exact zero test of the difference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharacterSum {
    pub n: usize,
    pub terms: Vec<Term>,
}

fn frac(x: &Q) -> Q {
    x - x.floor()
}

impl CharacterSum {
    pub fn zero(n: usize) -> Self {
        CharacterSum { n, terms: Vec::new() }
    }

    pub fn constant(n: usize, q: Q) -> Self {
        Self::term(q, Q::zero(), vec![Q::zero(); n])
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Q::one())
    }

    /// q e^{2 pi i (rho . c + phase)}
    pub fn term(coeff: Q, phase: Q, rho: Vec<Q>) -> Self {
        let n = rho.len();
        Self::from_terms(n, vec![Term { coeff, phase, rho }])
    }

    /// e^{2 pi i (rho . c + phase)} - 1
    pub fn character_minus_one(rho: Vec<Q>, phase: Q) -> Self {
        let n = rho.len();
        Self::term(Q::one(), phase, rho).sub(&Self::one(n))
    }

    pub fn from_terms(n: usize, terms: Vec<Term>) -> Self {
        let mut map: BTreeMap<(Vec<Q>, Q), Q> = BTreeMap::new();
        for t in terms {
            *map.entry((t.rho, frac(&t.phase))).or_insert_with(Q::zero) += t.coeff;
        }
        let terms = map.into_iter().filter(|(_, c)| !c.is_zero()).map(|((rho, phase), coeff)| Term { coeff, phase, rho }).collect();
        CharacterSum { n, terms }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_terms(self.n, self.terms.iter().chain(&o.terms).cloned().collect())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, q: &Q) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|t| Term { coeff: &t.coeff * q, ..t.clone() }).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Vec::new();
        for x in &self.terms {
            for y in &o.terms {
                out.push(Term {
                    coeff: &x.coeff * &y.coeff,
                    phase: &x.phase + &y.phase,
                    rho: x.rho.iter().zip(&y.rho).map(|(a, b)| a + b).collect(),
                });
            }
        }
        Self::from_terms(self.n, out)
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Inverse of a single-term sum.
    pub fn monomial_inverse(&self) -> Option<Self> {
        if !self.is_monomial() {
            return None;
        }
        let t = &self.terms[0];
        Some(Self::term(t.coeff.recip(), -&t.phase, t.rho.iter().map(|x| -x).collect()))
    }

    /// Value at c.
    pub fn eval(&self, c: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|t| {
                let e: C64 = t.rho.iter().zip(c).map(|(r, ci)| *ci * linalg::q_to_f64(r)).sum::<C64>() + linalg::q_to_f64(&t.phase);
                (C64::new(0.0, 2.0 * PI) * e).exp() * linalg::q_to_f64(&t.coeff)
            })
            .sum()
    }

    /// The sum with c replaced by c + v.
    pub fn translate(&self, v: &[Q]) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|t| Term { phase: &t.phase + linalg::dot(&t.rho, v), ..t.clone() }).collect())
    }

    /// Exact zero test. Characters with distinct rho are independent, so each rho group
    /// must vanish as an element of Q(zeta_M).
    pub fn is_zero(&self) -> bool {
        let mut groups: BTreeMap<&[Q], Vec<&Term>> = BTreeMap::new();
        for t in &self.terms {
            groups.entry(&t.rho).or_default().push(t);
        }
        groups.values().all(|g| cyclotomic_zero(g))
    }

    /// Every rho . a(j) integral: the sum is invariant under c -> c + a(j).
    pub fn is_translation_invariant(&self, a: &Configuration) -> bool {
        self.terms.iter().all(|t| a.labels().into_iter().all(|j| linalg::dot(&t.rho, a.col(j)).is_integer()))
    }
}

impl PartialEq for CharacterSum {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n && self.sub(o).is_zero()
    }
}

fn poly_rem(mut p: Vec<Q>, d: &[Q]) -> Vec<Q> {
    let dl = d.len() - 1;
    while p.len() > dl {
        let lead = p.pop().unwrap();
        if lead.is_zero() {
            continue;
        }
        let f = lead / &d[dl];
        let off = p.len() - dl;
        for k in 0..dl {
            p[off + k] -= &f * &d[k];
        }
    }
    p
}

fn poly_div_exact(p: &[Q], d: &[Q]) -> Vec<Q> {
    let mut r = p.to_vec();
    let dl = d.len() - 1;
    let mut q = vec![Q::zero(); p.len() - dl];
    for k in (0..q.len()).rev() {
        let f = &r[k + dl] / &d[dl];
        for i in 0..=dl {
            r[k + i] -= &f * &d[i];
        }
        q[k] = f;
    }
    q
}

/// Coefficients of the M-th cyclotomic polynomial, constant term first.
pub fn cyclotomic(m: usize) -> Vec<Q> {
    let mut p = vec![Q::zero(); m + 1];
    p[0] = -Q::one();
    p[m] = Q::one();
    for d in 1..m {
        if m.is_multiple_of(d) {
            p = poly_div_exact(&p, &cyclotomic(d));
        }
    }
    p
}

fn cyclotomic_zero(terms: &[&Term]) -> bool {
    let m = terms.iter().fold(Z::one(), |acc, t| acc.lcm(t.phase.denom()));
    let m = m.to_usize().expect("phase denominator fits usize");
    let mut p = vec![Q::zero(); m];
    for t in terms {
        let k = (&t.phase * qi(m as i64)).to_integer().to_usize().unwrap() % m;
        p[k] += &t.coeff;
    }
    poly_rem(p, &cyclotomic(m)).iter().all(|x| x.is_zero())
}

fn fmt_lin(rho: &[Q], phase: &Q) -> String {
    let mut parts = Vec::new();
    for (i, r) in rho.iter().enumerate() {
        if r.is_zero() {
            continue;
        }
        let s = if r.is_one() {
            format!("c{}", i + 1)
        } else if *r == -Q::one() {
            format!("-c{}", i + 1)
        } else {
            format!("{}*c{}", fmt_q(r), i + 1)
        };
        parts.push(s);
    }
    if !phase.is_zero() {
        parts.push(fmt_q(phase));
    }
    parts.join(" + ").replace("+ -", "- ")
}

impl fmt::Display for CharacterSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let lin = fmt_lin(&t.rho, &t.phase);
                if lin.is_empty() {
                    fmt_q(&t.coeff)
                } else if t.coeff.is_one() {
                    format!("e(2pi i({lin}))")
                } else {
                    format!("{} e(2pi i({lin}))", fmt_q(&t.coeff))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// (2 pi i)^k num / den.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Fraction {
    pub num: CharacterSum,
    pub den: CharacterSum,
    pub two_pi_i_power: i32,
}

impl Fraction {
    pub fn new(num: CharacterSum, den: CharacterSum, two_pi_i_power: i32) -> Result<Self> {
        if den.is_zero() {
            return Err(GkzError::Internal("zero denominator".into()));
        }
        Ok(Fraction { num, den, two_pi_i_power }.tidy())
    }

    pub fn zero(n: usize) -> Self {
        Fraction { num: CharacterSum::zero(n), den: CharacterSum::one(n), two_pi_i_power: 0 }
    }

    pub fn from_sum(s: CharacterSum) -> Self {
        let n = s.n;
        Fraction { num: s, den: CharacterSum::one(n), two_pi_i_power: 0 }
    }

    pub fn constant(n: usize, q: Q) -> Self {
        Self::from_sum(CharacterSum::constant(n, q))
    }

    fn tidy(mut self) -> Self {
        if self.num.is_zero() {
            return Fraction::zero(self.num.n);
        }
        if let Some(inv) = self.den.monomial_inverse() {
            self.num = self.num.mul(&inv);
            self.den = CharacterSum::one(self.num.n);
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(o.clone());
        }
        if self.two_pi_i_power != o.two_pi_i_power {
            return Err(GkzError::Internal("adding terms with different powers of 2 pi i".into()));
        }
        let (num, den) = if self.den == o.den {
            (self.num.add(&o.num), self.den.clone())
        } else {
            (self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
        };
        Fraction::new(num, den, self.two_pi_i_power)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        Fraction::new(self.num.mul(&o.num), self.den.mul(&o.den), self.two_pi_i_power + o.two_pi_i_power)
    }

    pub fn scale(&self, q: &Q) -> Self {
        Fraction { num: self.num.scale(q), ..self.clone() }.tidy()
    }

    pub fn eval(&self, c: &[C64]) -> C64 {
        self.num.eval(c) / self.den.eval(c) * C64::new(0.0, 2.0 * PI).powi(self.two_pi_i_power)
    }

    pub fn translate(&self, v: &[Q]) -> Self {
        Fraction { num: self.num.translate(v), den: self.den.translate(v), two_pi_i_power: self.two_pi_i_power }
    }

    /// f(c + a(j)) = f(c) for every column, tested exactly by cross multiplication.
    pub fn is_translation_invariant(&self, a: &Configuration) -> bool {
        a.labels().into_iter().all(|j| self.translate(a.col(j)) == *self)
    }
}

impl PartialEq for Fraction {
    fn eq(&self, o: &Self) -> bool {
        if self.is_zero() || o.is_zero() {
            return self.is_zero() && o.is_zero();
        }
        self.two_pi_i_power == o.two_pi_i_power && self.num.mul(&o.den) == o.num.mul(&self.den)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.two_pi_i_power {
            0 => String::new(),
            k => format!("(2pi i)^{k} "),
        };
        if self.den.terms.len() == 1 && self.den.terms[0].rho.iter().all(|x| x.is_zero()) && self.den.terms[0].coeff.is_one() {
            write!(f, "{p}{}", self.num)
        } else {
            write!(f, "{p}[{}] / [{}]", self.num, self.den)
        }
    }
}

/// sin(pi (rho . c)) as (e^{i pi x} - e^{-i pi x}) / 2i, i.e. a sum with phases -1/4 and 1/4.
pub fn sin_pi(rho: &[Q]) -> CharacterSum {
    let half: Vec<Q> = rho.iter().map(|x| x / qi(2)).collect();
    let neg: Vec<Q> = half.iter().map(|x| -x).collect();
    let h = Q::new(1.into(), 2.into());
    CharacterSum::term(h.clone(), Q::new((-1).into(), 4.into()), half).add(&CharacterSum::term(h, Q::new(1.into(), 4.into()), neg))
}
