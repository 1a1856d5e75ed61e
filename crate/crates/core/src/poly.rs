//! Sparse multivariate polynomials with exact or numeric coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::ring::{qi, qi_to_c64, Magnitude, Qi, Ring};

/// Exponent vector with trailing zeros trimmed, so that the same monomial
/// has a single representation regardless of how many variables exist.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn var(i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let len = self.0.len().max(other.0.len());
        let e = (0..len)
            .map(|i| self.exponent(i) + other.exponent(i))
            .collect();
        Monomial(e)
    }

    fn with_exponent(&self, i: usize, k: u32) -> Monomial {
        let mut e = self.0.clone();
        if e.len() <= i {
            e.resize(i + 1, 0);
        }
        e[i] = k;
        Monomial::new(e)
    }
}

/// Polynomial `Σ c_m x^m` over a coefficient ring. Zero coefficients are
/// never stored.
#[derive(Clone, PartialEq)]
pub struct Poly<R> {
    terms: BTreeMap<Monomial, R>,
}

impl<R: Ring> Poly<R> {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: R) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(i: usize) -> Self {
        Self::term(Monomial::var(i), R::one())
    }

    pub fn term(m: Monomial, c: R) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    /// Builds from `(exponents, coefficient)` pairs; repeated monomials add.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, R)>,
    {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(Monomial::new(e), c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: R) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &R)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> R {
        self.terms.get(m).cloned().unwrap_or_else(R::zero)
    }

    pub fn constant_term(&self) -> R {
        self.coefficient(&Monomial::one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// Total degree; the zero polynomial reports 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.exponent(i)).max().unwrap_or(0)
    }

    /// One past the highest variable index that occurs.
    pub fn num_vars(&self) -> usize {
        self.terms.keys().map(|m| m.0.len()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &R) -> Self {
        let mut p = Self::zero();
        for (m, v) in &self.terms {
            p.add_term(m.clone(), v.clone() * c.clone());
        }
        p
    }

    pub fn map_coeffs<S: Ring>(&self, f: impl Fn(&R) -> S) -> Poly<S> {
        let mut p = Poly::zero();
        for (m, v) in &self.terms {
            p.add_term(m.clone(), f(v));
        }
        p
    }

    /// Exact partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero();
        for (m, v) in &self.terms {
            let k = m.exponent(i);
            if k > 0 {
                p.add_term(m.with_exponent(i, k - 1), v.clone() * R::from_i64(k as i64));
            }
        }
        p
    }

    /// Antiderivative in variable `i` with zero constant of integration.
    pub fn antiderivative(&self, i: usize) -> Self {
        let mut p = Self::zero();
        for (m, v) in &self.terms {
            let k = m.exponent(i);
            let factor = R::from_qi(&qi(1, k as i64 + 1));
            p.add_term(m.with_exponent(i, k + 1), v.clone() * factor);
        }
        p
    }

    /// Evaluates at `args` in another ring, converting coefficients with
    /// `conv`. Missing trailing arguments are an error in the caller.
    pub fn eval_with<S: Ring>(&self, args: &[S], conv: impl Fn(&R) -> S) -> S {
        let mut powers: Vec<Vec<S>> = args.iter().map(|a| vec![S::one(), a.clone()]).collect();
        let mut acc = S::zero();
        for (m, v) in &self.terms {
            assert!(
                m.0.len() <= args.len(),
                "polynomial uses {} variables, {} supplied",
                m.0.len(),
                args.len()
            );
            let mut t = conv(v);
            for (i, &k) in m.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let table = &mut powers[i];
                while table.len() <= k as usize {
                    let next = table.last().unwrap().clone() * args[i].clone();
                    table.push(next);
                }
                t = t * table[k as usize].clone();
            }
            acc = acc + t;
        }
        acc
    }

    /// Substitutes a constant for variable `i`.
    pub fn substitute_var(&self, i: usize, value: &R) -> Self {
        let mut p = Self::zero();
        for (m, v) in &self.terms {
            let k = m.exponent(i);
            let mut c = v.clone();
            for _ in 0..k {
                c = c * value.clone();
            }
            p.add_term(m.with_exponent(i, 0), c);
        }
        p
    }
}

impl Poly<Qi> {
    /// Evaluates with exact coefficients embedded into `S`.
    pub fn eval<S: Ring>(&self, args: &[S]) -> S {
        self.eval_with(args, S::from_qi)
    }

    /// Numeric form for fast repeated evaluation at real points.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.0.clone(), qi_to_c64(v).re))
                .collect(),
        }
    }

    /// Largest coefficient magnitude, used for residual reporting.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(Magnitude::magnitude)
            .fold(0.0, f64::max)
    }
}

impl<R: Ring> Default for Poly<R> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<R: Ring + Magnitude> Magnitude for Poly<R> {
    fn magnitude(&self) -> f64 {
        self.terms
            .values()
            .map(Magnitude::magnitude)
            .fold(0.0, f64::max)
    }
}

impl<R: Ring> Ring for Poly<R> {
    fn zero() -> Self {
        Poly::zero()
    }

    fn one() -> Self {
        Poly::constant(R::one())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn from_qi(c: &Qi) -> Self {
        Poly::constant(R::from_qi(c))
    }

    fn try_inverse(&self) -> Option<Self> {
        if self.is_constant() {
            self.constant_term().try_inverse().map(Poly::constant)
        } else {
            None
        }
    }

    fn try_exp(&self) -> Option<Self> {
        if self.is_constant() {
            self.constant_term().try_exp().map(Poly::constant)
        } else {
            None
        }
    }
}

impl<R: Ring> Add for Poly<R> {
    type Output = Poly<R>;
    fn add(mut self, rhs: Poly<R>) -> Poly<R> {
        for (m, v) in rhs.terms {
            self.add_term(m, v);
        }
        self
    }
}

impl<R: Ring> Add for &Poly<R> {
    type Output = Poly<R>;
    fn add(self, rhs: &Poly<R>) -> Poly<R> {
        self.clone() + rhs.clone()
    }
}

impl<R: Ring> Neg for Poly<R> {
    type Output = Poly<R>;
    fn neg(self) -> Poly<R> {
        Poly {
            terms: self.terms.into_iter().map(|(m, v)| (m, -v)).collect(),
        }
    }
}

impl<R: Ring> Neg for &Poly<R> {
    type Output = Poly<R>;
    fn neg(self) -> Poly<R> {
        -self.clone()
    }
}

impl<R: Ring> Sub for Poly<R> {
    type Output = Poly<R>;
    fn sub(self, rhs: Poly<R>) -> Poly<R> {
        self + (-rhs)
    }
}

impl<R: Ring> Sub for &Poly<R> {
    type Output = Poly<R>;
    fn sub(self, rhs: &Poly<R>) -> Poly<R> {
        self.clone() - rhs.clone()
    }
}

impl<R: Ring> Mul for &Poly<R> {
    type Output = Poly<R>;
    fn mul(self, rhs: &Poly<R>) -> Poly<R> {
        let mut p = Poly::zero();
        for (ma, va) in &self.terms {
            for (mb, vb) in &rhs.terms {
                p.add_term(ma.mul(mb), va.clone() * vb.clone());
            }
        }
        p
    }
}

impl<R: Ring> Mul for Poly<R> {
    type Output = Poly<R>;
    fn mul(self, rhs: Poly<R>) -> Poly<R> {
        &self * &rhs
    }
}

impl<R: Ring> fmt::Debug for Poly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, v) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:?})", v)?;
            for (i, &k) in m.0.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "·x{}", i)?,
                    _ => write!(f, "·x{}^{}", i, k)?,
                }
            }
        }
        Ok(())
    }
}

/// Real-valued polynomial prepared for fast evaluation at `f64` points.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(Vec<u32>, f64)>,
}

impl CompiledPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .enumerate()
                    .fold(*c, |acc, (i, &k)| acc * x[i].powi(k as i32))
            })
            .sum()
    }
}
