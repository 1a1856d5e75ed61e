//! Finite Grassmann algebras with coefficients in a pluggable ring.
//!
//! Monomials are stored as bitmasks over the generator list; bit `i` is the
//! `i`-th declared generator and a set bit pattern always denotes the
//! product of its generators in ascending declaration order. All sign
//! normalization happens when terms are built, so equality is structural.
//!
//! Conventions fixed here and used by every other module:
//!
//! * derivatives act from the left unless named `right_derivative`;
//! * `berezin_integrate(x, [g1, .., gk])` is `∫dg1 … dgk x`, evaluated by
//!   applying the left derivative in `gk` first. With the generator pair
//!   `(θ, θ̄)` this gives `∫dθ dθ̄ θ̄θ = 1`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

use crate::poly::Poly;
use crate::ring::{qi, Magnitude, Qi, Ring};

pub const MAX_GENERATORS: usize = 64;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GrassmannError {
    #[error("duplicate generator label `{0}`")]
    DuplicateGenerator(String),
    #[error("{0} generators requested, at most {MAX_GENERATORS} are supported")]
    TooManyGenerators(usize),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("operands belong to different Grassmann algebras")]
    AlgebraMismatch,
    #[error("a supernumber with zero body does not admit an inverse")]
    NoInverse,
    #[error("exponential needs exp(body), which the coefficient ring cannot represent")]
    NonNilpotentExp,
}

/// Ordered list of odd generators. Order is fixed for the algebra's lifetime
/// and defines the canonical monomial order.
#[derive(Debug, PartialEq, Eq)]
pub struct GrassmannAlgebra {
    labels: Vec<String>,
}

impl GrassmannAlgebra {
    pub fn new<I, S>(labels: I) -> Result<Arc<Self>, GrassmannError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() > MAX_GENERATORS {
            return Err(GrassmannError::TooManyGenerators(labels.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(GrassmannError::DuplicateGenerator(l.clone()));
            }
        }
        Ok(Arc::new(GrassmannAlgebra { labels }))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize, GrassmannError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| GrassmannError::UnknownGenerator(label.to_string()))
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    fn check_index(&self, i: usize) -> Result<usize, GrassmannError> {
        if i < self.labels.len() {
            Ok(i)
        } else {
            Err(GrassmannError::UnknownGenerator(format!("#{}", i)))
        }
    }
}

/// Something that names a generator: its index or its label.
pub trait Generator {
    fn resolve(&self, alg: &GrassmannAlgebra) -> Result<usize, GrassmannError>;
}

impl Generator for usize {
    fn resolve(&self, alg: &GrassmannAlgebra) -> Result<usize, GrassmannError> {
        alg.check_index(*self)
    }
}

impl Generator for &str {
    fn resolve(&self, alg: &GrassmannAlgebra) -> Result<usize, GrassmannError> {
        alg.index_of(self)
    }
}

impl Generator for String {
    fn resolve(&self, alg: &GrassmannAlgebra) -> Result<usize, GrassmannError> {
        alg.index_of(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Sign of `m_a · m_b` relative to the canonical monomial `m_a | m_b`.
/// Returns `None` when the product vanishes.
pub(crate) fn product_sign(a: u64, b: u64) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a.checked_shr(j + 1).unwrap_or(0)).count_ones();
        rest &= rest - 1;
    }
    Some(swaps % 2 == 1)
}

fn bits_below(m: u64, g: usize) -> u32 {
    (m & ((1u64 << g) - 1)).count_ones()
}

fn bits_above(m: u64, g: usize) -> u32 {
    m.checked_shr(g as u32 + 1).unwrap_or(0).count_ones()
}

/// Element of a finite Grassmann algebra.
#[derive(Clone)]
pub struct Supernumber<R> {
    algebra: Arc<GrassmannAlgebra>,
    terms: BTreeMap<u64, R>,
}

impl<R: Ring> PartialEq for Supernumber<R> {
    fn eq(&self, other: &Self) -> bool {
        self.same_algebra(other) && self.terms == other.terms
    }
}

impl<R: Ring> Supernumber<R> {
    pub fn zero(algebra: &Arc<GrassmannAlgebra>) -> Self {
        Supernumber {
            algebra: Arc::clone(algebra),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(algebra: &Arc<GrassmannAlgebra>) -> Self {
        Self::scalar(algebra, R::one())
    }

    pub fn scalar(algebra: &Arc<GrassmannAlgebra>, c: R) -> Self {
        let mut x = Self::zero(algebra);
        x.add_term(0, c);
        x
    }

    pub fn generator<G: Generator>(
        algebra: &Arc<GrassmannAlgebra>,
        g: G,
    ) -> Result<Self, GrassmannError> {
        let i = g.resolve(algebra)?;
        let mut x = Self::zero(algebra);
        x.add_term(1u64 << i, R::one());
        Ok(x)
    }

    /// `c · g_{i1} g_{i2} …` for generators given in any order; repeated
    /// generators give zero.
    pub fn monomial<G: Generator>(
        algebra: &Arc<GrassmannAlgebra>,
        gens: &[G],
        c: R,
    ) -> Result<Self, GrassmannError> {
        let mut mask = 0u64;
        let mut negative = false;
        for g in gens {
            let bit = 1u64 << g.resolve(algebra)?;
            match product_sign(mask, bit) {
                None => return Ok(Self::zero(algebra)),
                Some(s) => negative ^= s,
            }
            mask |= bit;
        }
        let mut x = Self::zero(algebra);
        x.add_term(mask, if negative { -c } else { c });
        Ok(x)
    }

    pub fn algebra(&self) -> &Arc<GrassmannAlgebra> {
        &self.algebra
    }

    pub fn same_algebra(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra == other.algebra
    }

    /// Adds `c` to the coefficient of the canonical monomial `mask`.
    pub fn add_term(&mut self, mask: u64, c: R) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mask) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&mask);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(mask, c);
            }
        }
    }

    /// Canonical terms `(monomial bitmask, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &R)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, mask: u64) -> R {
        self.terms.get(&mask).cloned().unwrap_or_else(R::zero)
    }

    /// Coefficient of the monomial named by an ordered generator list,
    /// with the sign of reordering it into canonical form.
    pub fn coefficient_of<G: Generator>(&self, gens: &[G]) -> Result<R, GrassmannError> {
        let unit = Self::monomial(&self.algebra, gens, R::one())?;
        match unit.terms.iter().next() {
            None => Ok(R::zero()),
            Some((m, s)) => Ok(self.coefficient(*m) * s.clone()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for m in self.terms.keys() {
            if m.count_ones() % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Parity::Even
    }

    pub fn is_odd(&self) -> bool {
        self.is_zero() || self.parity() == Parity::Odd
    }

    /// Highest number of generators in any monomial.
    pub fn grade(&self) -> u32 {
        self.terms.keys().map(|m| m.count_ones()).max().unwrap_or(0)
    }

    pub fn body(&self) -> R {
        self.coefficient(0)
    }

    pub fn soul(&self) -> Self {
        let mut s = self.clone();
        s.terms.remove(&0);
        s
    }

    pub fn body_soul(&self) -> (R, Self) {
        (self.body(), self.soul())
    }

    pub fn scale(&self, c: &R) -> Self {
        let mut x = Self::zero(&self.algebra);
        for (m, v) in &self.terms {
            x.add_term(*m, v.clone() * c.clone());
        }
        x
    }

    pub fn map_coeffs<S: Ring>(&self, f: impl Fn(&R) -> S) -> Supernumber<S> {
        let mut x = Supernumber::zero(&self.algebra);
        for (m, v) in &self.terms {
            x.add_term(*m, f(v));
        }
        x
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, GrassmannError> {
        if !self.same_algebra(other) {
            return Err(GrassmannError::AlgebraMismatch);
        }
        let mut x = self.clone();
        for (m, v) in &other.terms {
            x.add_term(*m, v.clone());
        }
        Ok(x)
    }

    /// Graded product. Fails only when the operands live in different algebras.
    pub fn try_mul(&self, other: &Self) -> Result<Self, GrassmannError> {
        if !self.same_algebra(other) {
            return Err(GrassmannError::AlgebraMismatch);
        }
        let mut x = Self::zero(&self.algebra);
        for (ma, va) in &self.terms {
            for (mb, vb) in &other.terms {
                if let Some(neg) = product_sign(*ma, *mb) {
                    let c = va.clone() * vb.clone();
                    x.add_term(ma | mb, if neg { -c } else { c });
                }
            }
        }
        Ok(x)
    }

    /// Left derivative `∂/∂g` acting from the left.
    pub fn left_derivative<G: Generator>(&self, g: G) -> Result<Self, GrassmannError> {
        let i = g.resolve(&self.algebra)?;
        let bit = 1u64 << i;
        let mut x = Self::zero(&self.algebra);
        for (m, v) in &self.terms {
            if m & bit != 0 {
                let c = v.clone();
                x.add_term(
                    m & !bit,
                    if bits_below(*m, i) % 2 == 1 { -c } else { c },
                );
            }
        }
        Ok(x)
    }

    /// Right derivative, acting from the right.
    pub fn right_derivative<G: Generator>(&self, g: G) -> Result<Self, GrassmannError> {
        let i = g.resolve(&self.algebra)?;
        let bit = 1u64 << i;
        let mut x = Self::zero(&self.algebra);
        for (m, v) in &self.terms {
            if m & bit != 0 {
                let c = v.clone();
                x.add_term(
                    m & !bit,
                    if bits_above(*m, i) % 2 == 1 { -c } else { c },
                );
            }
        }
        Ok(x)
    }

    /// Iterated Berezin integral `∫dg1 … dgk x`.
    pub fn berezin_integrate<G: Generator>(&self, vars: &[G]) -> Result<Self, GrassmannError> {
        let idx: Vec<usize> = vars
            .iter()
            .map(|g| g.resolve(&self.algebra))
            .collect::<Result<_, _>>()?;
        let mut x = self.clone();
        for &i in idx.iter().rev() {
            x = x.left_derivative(i)?;
        }
        Ok(x)
    }

    /// Splits off the dependence on a set of generators: returns `x_S` in
    /// `x = Σ_S g^S x_S`, where `g^S` is the ordered product of the
    /// generators in `subset` and `x_S` contains none of `gens`.
    pub fn component<G: Generator>(&self, gens: &[G], subset: &[G]) -> Result<Self, GrassmannError> {
        let mut gmask = 0u64;
        for g in gens {
            gmask |= 1u64 << g.resolve(&self.algebra)?;
        }
        let mut smask = 0u64;
        for g in subset {
            let bit = 1u64 << g.resolve(&self.algebra)?;
            if bit & gmask == 0 {
                return Err(GrassmannError::UnknownGenerator(
                    self.algebra.label(bit.trailing_zeros() as usize).to_string(),
                ));
            }
            smask |= bit;
        }
        let mut x = Self::zero(&self.algebra);
        for (m, v) in &self.terms {
            if m & gmask != smask {
                continue;
            }
            let rest = m & !gmask;
            // canonical m = ± g^S · rest; the sign counts rest-generators
            // that sit in front of subset-generators
            let neg = product_sign(smask, rest).expect("disjoint");
            let c = v.clone();
            x.add_term(rest, if neg { -c } else { c });
        }
        Ok(x)
    }

    /// Sets the listed generators to zero.
    pub fn drop_generators<G: Generator>(&self, gens: &[G]) -> Result<Self, GrassmannError> {
        self.component(gens, &[])
    }

    /// Re-expresses `self` in another algebra that contains all generators
    /// it uses (matched by label).
    pub fn embed(&self, target: &Arc<GrassmannAlgebra>) -> Result<Self, GrassmannError> {
        let map: Vec<usize> = self
            .algebra
            .labels
            .iter()
            .map(|l| target.index_of(l))
            .collect::<Result<_, _>>()?;
        let mut x = Self::zero(target);
        for (m, v) in &self.terms {
            let gens: Vec<usize> = (0..self.algebra.len())
                .filter(|i| m & (1u64 << i) != 0)
                .map(|i| map[i])
                .collect();
            let t = Self::monomial(target, &gens, v.clone())?;
            for (tm, tv) in t.terms {
                x.add_term(tm, tv);
            }
        }
        Ok(x)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(&self.algebra);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Two-sided inverse by a terminating geometric series in the soul.
    pub fn invert(&self) -> Result<Self, GrassmannError> {
        let (b, s) = self.body_soul();
        let binv = b.try_inverse().ok_or(GrassmannError::NoInverse)?;
        // x = b (1 + y) with y = s / b nilpotent
        let y = s.scale(&binv);
        let mut term = Self::one(&self.algebra);
        let mut acc = Self::one(&self.algebra);
        loop {
            term = -(&term * &y);
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
        }
        Ok(acc.scale(&binv))
    }

    /// `exp(x) = exp(body) · Σ soul^k / k!`; the series stops at the
    /// nilpotency order of the soul.
    pub fn exp(&self) -> Result<Self, GrassmannError> {
        let (b, s) = self.body_soul();
        let eb = b.try_exp().ok_or(GrassmannError::NonNilpotentExp)?;
        let mut term = Self::one(&self.algebra);
        let mut acc = Self::one(&self.algebra);
        let mut k = 1i64;
        loop {
            term = (&term * &s).scale(&R::from_qi(&qi(1, k)));
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
            k += 1;
        }
        Ok(acc.scale(&eb))
    }
}

impl<R: Ring + Magnitude> Supernumber<R> {
    /// Largest coefficient magnitude; zero for the zero element.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(Magnitude::magnitude)
            .fold(0.0, f64::max)
    }
}

impl<R: Ring> Supernumber<Poly<R>> {
    /// Applies a map to every polynomial coefficient.
    pub fn map_polys(&self, f: impl Fn(&Poly<R>) -> Poly<R>) -> Self {
        self.map_coeffs(f)
    }
}

/// Evaluates an exact polynomial at supernumber arguments. The arguments
/// must be even so that the monomials are unambiguous.
pub fn eval_poly_super<R: Ring>(p: &Poly<Qi>, args: &[Supernumber<R>]) -> Supernumber<R> {
    assert!(!args.is_empty(), "need at least one argument to fix the algebra");
    debug_assert!(args.iter().all(Supernumber::is_even));
    let algebra = Arc::clone(args[0].algebra());
    let mut powers: Vec<Vec<Supernumber<R>>> = args
        .iter()
        .map(|a| vec![Supernumber::one(&algebra), a.clone()])
        .collect();
    let mut acc = Supernumber::zero(&algebra);
    for (m, c) in p.terms() {
        let mut t = Supernumber::scalar(&algebra, R::from_qi(c));
        for (i, &k) in m.exponents().iter().enumerate() {
            if k == 0 {
                continue;
            }
            let table = &mut powers[i];
            while table.len() <= k as usize {
                let next = table.last().unwrap() * &args[i];
                table.push(next);
            }
            t = &t * &table[k as usize];
        }
        acc = &acc + &t;
    }
    acc
}

impl<R: Ring> Add for &Supernumber<R> {
    type Output = Supernumber<R>;
    fn add(self, rhs: &Supernumber<R>) -> Supernumber<R> {
        self.try_add(rhs).expect("supernumbers from different algebras")
    }
}

impl<R: Ring> Add for Supernumber<R> {
    type Output = Supernumber<R>;
    fn add(self, rhs: Supernumber<R>) -> Supernumber<R> {
        &self + &rhs
    }
}

impl<R: Ring> Neg for &Supernumber<R> {
    type Output = Supernumber<R>;
    fn neg(self) -> Supernumber<R> {
        Supernumber {
            algebra: Arc::clone(&self.algebra),
            terms: self.terms.iter().map(|(m, v)| (*m, -v.clone())).collect(),
        }
    }
}

impl<R: Ring> Neg for Supernumber<R> {
    type Output = Supernumber<R>;
    fn neg(self) -> Supernumber<R> {
        -&self
    }
}

impl<R: Ring> Sub for &Supernumber<R> {
    type Output = Supernumber<R>;
    fn sub(self, rhs: &Supernumber<R>) -> Supernumber<R> {
        self + &(-rhs)
    }
}

impl<R: Ring> Sub for Supernumber<R> {
    type Output = Supernumber<R>;
    fn sub(self, rhs: Supernumber<R>) -> Supernumber<R> {
        &self - &rhs
    }
}

impl<R: Ring> Mul for &Supernumber<R> {
    type Output = Supernumber<R>;
    fn mul(self, rhs: &Supernumber<R>) -> Supernumber<R> {
        self.try_mul(rhs).expect("supernumbers from different algebras")
    }
}

impl<R: Ring> Mul for Supernumber<R> {
    type Output = Supernumber<R>;
    fn mul(self, rhs: Supernumber<R>) -> Supernumber<R> {
        &self * &rhs
    }
}

impl<R: Ring> fmt::Debug for Supernumber<R> {
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
            for i in 0..self.algebra.len() {
                if m & (1u64 << i) != 0 {
                    write!(f, "·{}", self.algebra.label(i))?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{qi_i, qi_int};

    type S = Supernumber<Qi>;

    fn tt() -> Arc<GrassmannAlgebra> {
        GrassmannAlgebra::new(["θ", "θ̄"]).unwrap()
    }

    fn g(alg: &Arc<GrassmannAlgebra>, l: &str) -> S {
        S::generator(alg, l).unwrap()
    }

    fn one(alg: &Arc<GrassmannAlgebra>) -> S {
        S::one(alg)
    }

    #[test]
    fn nilpotent_generators() {
        let a = tt();
        let th = g(&a, "θ");
        assert!((&th * &th).is_zero());
    }

    #[test]
    fn anticommutation() {
        let a = tt();
        let (th, tb) = (g(&a, "θ"), g(&a, "θ̄"));
        let m = S::monomial(&a, &["θ", "θ̄"], Qi::one()).unwrap();
        assert_eq!(&th * &tb, m);
        assert_eq!(&tb * &th, -&m);
    }

    #[test]
    fn distributive_expansion() {
        let a = tt();
        let (th, tb) = (g(&a, "θ"), g(&a, "θ̄"));
        let lhs = &(&one(&a) + &th) * &(&one(&a) + &tb);
        let rhs = &(&(&one(&a) + &th) + &tb) + &(&th * &tb);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn mismatched_algebras_are_rejected() {
        let a = tt();
        let b = GrassmannAlgebra::new(["c"]).unwrap();
        let x = g(&a, "θ");
        let y = S::generator(&b, "c").unwrap();
        assert_eq!(x.try_mul(&y), Err(GrassmannError::AlgebraMismatch));
    }

    #[test]
    fn duplicate_labels_are_rejected() {
        assert!(matches!(
            GrassmannAlgebra::new(["θ", "θ"]),
            Err(GrassmannError::DuplicateGenerator(_))
        ));
    }

    #[test]
    fn berezin_normalization() {
        let a = tt();
        let tbt = S::monomial(&a, &["θ̄", "θ"], Qi::one()).unwrap();
        assert_eq!(tbt.berezin_integrate(&["θ", "θ̄"]).unwrap(), one(&a));
        assert!(one(&a).berezin_integrate(&["θ", "θ̄"]).unwrap().is_zero());
    }

    #[test]
    fn berezin_of_multiplet_picks_top_component() {
        // H + θN + N̄θ̄ − iθ̄θℋ with scalar stand-ins N, N̄ multiplying
        // an extra odd generator so that they are odd
        let a = GrassmannAlgebra::new(["θ", "θ̄", "c", "c̄"]).unwrap();
        let h = S::scalar(&a, qi_int(3));
        let n = g(&a, "c").scale(&qi_int(5));
        let nb = g(&a, "c̄").scale(&qi_int(7));
        let calh = S::scalar(&a, qi_int(11));
        let x = &(&(&h + &(&g(&a, "θ") * &n)) + &(&nb * &g(&a, "θ̄")))
            - &(&S::monomial(&a, &["θ̄", "θ"], qi_i()).unwrap() * &calh);
        let r = x.berezin_integrate(&["θ", "θ̄"]).unwrap();
        assert_eq!(r, calh.scale(&-qi_i()));
    }

    #[test]
    fn berezin_rejects_unknown_label() {
        let a = tt();
        assert!(matches!(
            one(&a).berezin_integrate(&["η"]),
            Err(GrassmannError::UnknownGenerator(_))
        ));
    }

    #[test]
    fn left_derivative_signs() {
        let a = tt();
        let tt_ = S::monomial(&a, &["θ", "θ̄"], Qi::one()).unwrap();
        let tbt = S::monomial(&a, &["θ̄", "θ"], Qi::one()).unwrap();
        assert_eq!(tt_.left_derivative("θ").unwrap(), g(&a, "θ̄"));
        assert_eq!(tbt.left_derivative("θ").unwrap(), -g(&a, "θ̄"));
        assert!(one(&a).left_derivative("θ").unwrap().is_zero());
    }

    #[test]
    fn right_derivative_signs() {
        let a = tt();
        let tt_ = S::monomial(&a, &["θ", "θ̄"], Qi::one()).unwrap();
        assert_eq!(tt_.right_derivative("θ̄").unwrap(), g(&a, "θ"));
        assert_eq!(tt_.right_derivative("θ").unwrap(), -g(&a, "θ̄"));
    }

    #[test]
    fn regularized_inverse() {
        // (ε − iθ̄θ/ħ)⁻¹ = 1/ε + iθ̄θ/(ε²ħ), ε = 1/3, ħ = 2
        let a = tt();
        let eps = qi(1, 3);
        let hbar = qi(2, 1);
        let tbt = S::monomial(&a, &["θ̄", "θ"], Qi::one()).unwrap();
        let x = &S::scalar(&a, eps.clone()) - &tbt.scale(&(qi_i() / hbar.clone()));
        let expected = &S::scalar(&a, Qi::one() / eps.clone())
            + &tbt.scale(&(qi_i() / (eps.clone() * eps * hbar)));
        let inv = x.invert().unwrap();
        assert_eq!(inv, expected);
        assert_eq!(&x * &inv, one(&a));
        assert_eq!(&inv * &x, one(&a));
    }

    #[test]
    fn zero_body_has_no_inverse() {
        let a = tt();
        let tbt = S::monomial(&a, &["θ̄", "θ"], -qi_i()).unwrap();
        assert_eq!(tbt.invert(), Err(GrassmannError::NoInverse));
        assert_eq!(one(&a).invert().unwrap(), one(&a));
    }

    #[test]
    fn nilpotent_exponential() {
        let a = tt();
        let tt_ = S::monomial(&a, &["θ", "θ̄"], Qi::one()).unwrap();
        assert_eq!(tt_.exp().unwrap(), &one(&a) + &tt_);
        assert_eq!(&tt_.exp().unwrap() * &(-&tt_).exp().unwrap(), one(&a));
        let with_body = &S::scalar(&a, qi_int(1)) + &tt_;
        assert_eq!(with_body.exp(), Err(GrassmannError::NonNilpotentExp));
    }

    #[test]
    fn body_soul_split() {
        let a = tt();
        let tbt = S::monomial(&a, &["θ̄", "θ"], qi_int(4)).unwrap();
        let b = &S::scalar(&a, qi_int(2)) + &tbt;
        assert_eq!(b.body_soul(), (qi_int(2), tbt));
        assert_eq!(S::zero(&a).body_soul(), (Qi::zero(), S::zero(&a)));
        assert_eq!(g(&a, "θ").body_soul(), (Qi::zero(), g(&a, "θ")));
    }

    #[test]
    fn components_recombine() {
        let a = GrassmannAlgebra::new(["θ", "θ̄", "c"]).unwrap();
        let th = S::generator(&a, "θ").unwrap();
        let tb = S::generator(&a, "θ̄").unwrap();
        let c = S::generator(&a, "c").unwrap();
        let x = &(&(&tb * &c) + &(&th * &c)) + &S::scalar(&a, qi_int(2));
        let gens = ["θ", "θ̄"];
        let x0 = x.component(&gens, &[]).unwrap();
        let xt = x.component(&gens, &["θ"]).unwrap();
        let xb = x.component(&gens, &["θ̄"]).unwrap();
        let xtb = x.component(&gens, &["θ", "θ̄"]).unwrap();
        let back = &(&(&x0 + &(&th * &xt)) + &(&tb * &xb)) + &(&(&th * &tb) * &xtb);
        assert_eq!(back, x);
    }

    #[test]
    fn embed_reorders_with_sign() {
        let a = GrassmannAlgebra::new(["x", "y"]).unwrap();
        let b = GrassmannAlgebra::new(["y", "z", "x"]).unwrap();
        let xy = S::monomial(&a, &["x", "y"], Qi::one()).unwrap();
        let e = xy.embed(&b).unwrap();
        assert_eq!(e, S::monomial(&b, &["x", "y"], Qi::one()).unwrap());
        assert_eq!(e.coefficient_of(&["y", "x"]).unwrap(), -Qi::one());
    }

    #[test]
    fn parity_classification() {
        let a = tt();
        assert_eq!(g(&a, "θ").parity(), Parity::Odd);
        assert_eq!(one(&a).parity(), Parity::Even);
        assert_eq!((&one(&a) + &g(&a, "θ")).parity(), Parity::Mixed);
    }
}
