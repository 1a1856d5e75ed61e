//! Extended phase space `(φ^a, λ_a, c^a, c̄_a)`: the graded extended Poisson
//! bracket, the superhamiltonian `ℋ`, the conserved charges and the
//! extended equations of motion.
//!
//! An [`ExtendedFunction`] is a supernumber over the ghost generators whose
//! coefficients are exact polynomials in `(φ, λ)`. Polynomial variable `a`
//! is `φ^a`, variable `2n + a` is `λ_a`. The algebra may carry extra
//! generators in front of the ghosts (the supertime partners `θ, θ̄`);
//! the bracket treats them as constants.

use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::grassmann::{eval_poly_super, GrassmannAlgebra, GrassmannError, Supernumber};
use crate::ode::{integrate, OdeOptions, StepStats};
use crate::phase_flow::{omega, FlowError, Observable};
use crate::poly::{CompiledPoly, Poly};
use crate::ring::{qi_i, qi_int, Qi, Ring, C64};

pub type ExtendedFunction = Supernumber<Poly<Qi>>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExtendedError {
    #[error("dimension mismatch: expected n = {expected}, found n = {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("charge {0} needs a Hamiltonian")]
    MissingHamiltonian(Charge),
    #[error("unknown charge `{0}`")]
    UnknownCharge(String),
    #[error("generator `{0}` has no substitution")]
    Unsubstituted(String),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Charge {
    Q,
    QBar,
    QH,
    QBarH,
    N,
    NBar,
}

impl Charge {
    pub const ALL: [Charge; 6] = [
        Charge::Q,
        Charge::QBar,
        Charge::QH,
        Charge::QBarH,
        Charge::N,
        Charge::NBar,
    ];

    pub fn needs_hamiltonian(self) -> bool {
        !matches!(self, Charge::Q | Charge::QBar)
    }
}

impl std::fmt::Display for Charge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Charge::Q => "Q",
            Charge::QBar => "Qbar",
            Charge::QH => "Q_H",
            Charge::QBarH => "Qbar_H",
            Charge::N => "N",
            Charge::NBar => "Nbar",
        };
        f.write_str(s)
    }
}

impl FromStr for Charge {
    type Err = ExtendedError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Charge::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| ExtendedError::UnknownCharge(s.to_string()))
    }
}

/// Layout of the extended phase space for `n` degrees of freedom.
#[derive(Debug, Clone)]
pub struct ExtendedSpace {
    n: usize,
    algebra: Arc<GrassmannAlgebra>,
    c: Vec<usize>,
    cbar: Vec<usize>,
}

pub fn ghost_label(a: usize) -> String {
    format!("c^{}", a + 1)
}

pub fn antighost_label(a: usize) -> String {
    format!("cb_{}", a + 1)
}

impl ExtendedSpace {
    pub fn new(n: usize) -> Self {
        Self::with_prefix(n, &[])
    }

    /// Extra generators (e.g. `θ, θ̄`) are declared before the ghosts.
    pub fn with_prefix(n: usize, prefix: &[&str]) -> Self {
        let mut labels: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
        labels.extend((0..2 * n).map(ghost_label));
        labels.extend((0..2 * n).map(antighost_label));
        let algebra = GrassmannAlgebra::new(labels).expect("valid ghost labels");
        let k = prefix.len();
        ExtendedSpace {
            n,
            algebra,
            c: (0..2 * n).map(|a| k + a).collect(),
            cbar: (0..2 * n).map(|a| k + 2 * n + a).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn algebra(&self) -> &Arc<GrassmannAlgebra> {
        &self.algebra
    }

    pub fn ghost_index(&self, a: usize) -> usize {
        self.c[a]
    }

    pub fn antighost_index(&self, a: usize) -> usize {
        self.cbar[a]
    }

    pub fn phi_var(&self, a: usize) -> usize {
        a
    }

    pub fn lambda_var(&self, a: usize) -> usize {
        2 * self.n + a
    }

    pub fn constant(&self, c: Qi) -> ExtendedFunction {
        Supernumber::scalar(&self.algebra, Poly::constant(c))
    }

    pub fn from_poly(&self, p: Poly<Qi>) -> ExtendedFunction {
        Supernumber::scalar(&self.algebra, p)
    }

    pub fn phi(&self, a: usize) -> ExtendedFunction {
        self.from_poly(Poly::var(self.phi_var(a)))
    }

    pub fn lambda(&self, a: usize) -> ExtendedFunction {
        self.from_poly(Poly::var(self.lambda_var(a)))
    }

    pub fn c(&self, a: usize) -> ExtendedFunction {
        Supernumber::generator(&self.algebra, self.c[a]).expect("ghost index")
    }

    pub fn cbar(&self, a: usize) -> ExtendedFunction {
        Supernumber::generator(&self.algebra, self.cbar[a]).expect("antighost index")
    }

    /// An observable `G(φ)` viewed as a ghost-free extended function.
    pub fn lift(&self, g: &Observable) -> Result<ExtendedFunction, ExtendedError> {
        self.check(g)?;
        Ok(self.from_poly(g.poly().clone()))
    }

    fn check(&self, g: &Observable) -> Result<(), ExtendedError> {
        if g.n() != self.n {
            return Err(ExtendedError::DimensionMismatch {
                expected: self.n,
                found: g.n(),
            });
        }
        Ok(())
    }

    fn poly_derivative(f: &ExtendedFunction, var: usize) -> ExtendedFunction {
        f.map_coeffs(|p| p.derivative(var))
    }

    /// Extended Poisson bracket
    /// `{A,B} = A∂⃖_{φ^a} ∂⃗_{λ_a}B − A∂⃖_{λ_a} ∂⃗_{φ^a}B
    ///        − i (A∂⃖_{c̄_a} ∂⃗_{c^a}B + A∂⃖_{c^a} ∂⃗_{c̄_a}B)`.
    pub fn bracket(
        &self,
        a: &ExtendedFunction,
        b: &ExtendedFunction,
    ) -> Result<ExtendedFunction, ExtendedError> {
        if !Arc::ptr_eq(a.algebra(), &self.algebra) && a.algebra() != &self.algebra {
            return Err(GrassmannError::AlgebraMismatch.into());
        }
        let mut acc = Supernumber::zero(&self.algebra);
        for i in 0..self.dim() {
            let (phi, lam) = (self.phi_var(i), self.lambda_var(i));
            acc = &acc + &(&Self::poly_derivative(a, phi) * &Self::poly_derivative(b, lam));
            acc = &acc - &(&Self::poly_derivative(a, lam) * &Self::poly_derivative(b, phi));
        }
        let mut ghost = Supernumber::zero(&self.algebra);
        for i in 0..self.dim() {
            let (c, cb) = (self.c[i], self.cbar[i]);
            ghost = &ghost + &a.right_derivative(cb)?.try_mul(&b.left_derivative(c)?)?;
            ghost = &ghost + &a.right_derivative(c)?.try_mul(&b.left_derivative(cb)?)?;
        }
        Ok(&acc - &ghost.scale(&Poly::constant(qi_i())))
    }

    /// `ℋ = λ_a ω^{ab} ∂_b H + i c̄_a ω^{ad} ∂_d ∂_b H c^b`.
    pub fn superhamiltonian(&self, h: &Observable) -> Result<ExtendedFunction, ExtendedError> {
        self.check(h)?;
        let d = self.dim();
        let grad = h.gradient();
        let mut acc = Supernumber::zero(&self.algebra);
        for a in 0..d {
            for b in 0..d {
                let w = omega(self.n, a, b);
                if w == 0 {
                    continue;
                }
                let wq = Poly::constant(qi_int(w));
                acc = &acc + &self.lambda(a).scale(&(&grad[b] * &wq));
                let hess_row: Vec<Poly<Qi>> = (0..d).map(|e| grad[b].derivative(e)).collect();
                for (e, hbe) in hess_row.iter().enumerate() {
                    if Ring::is_zero(hbe) {
                        continue;
                    }
                    let coeff = &(hbe * &wq) * &Poly::constant(qi_i());
                    acc = &acc + &(&self.cbar(a) * &self.c(e)).scale(&coeff);
                }
            }
        }
        Ok(acc)
    }

    pub fn charge(
        &self,
        which: Charge,
        h: Option<&Observable>,
    ) -> Result<ExtendedFunction, ExtendedError> {
        let d = self.dim();
        let i = Poly::constant(qi_i());
        let grad = match (which.needs_hamiltonian(), h) {
            (true, None) => return Err(ExtendedError::MissingHamiltonian(which)),
            (_, Some(h)) => {
                self.check(h)?;
                h.gradient()
            }
            (false, None) => vec![Poly::zero(); d],
        };
        let mut acc = Supernumber::zero(&self.algebra);
        for a in 0..d {
            // c^a-sector: Q, Q_H, N
            let mut ca = Poly::zero();
            // c̄_a-sector: Q̄, Q̄_H, N̄, with ω^{ab} contracted
            let mut cba = Poly::zero();
            match which {
                Charge::Q => ca = &i * &Poly::var(self.lambda_var(a)),
                Charge::QH => ca = &i * &Poly::var(self.lambda_var(a)) - grad[a].clone(),
                Charge::N => ca = grad[a].clone(),
                _ => {}
            }
            for b in 0..d {
                let w = omega(self.n, a, b);
                if w == 0 {
                    continue;
                }
                let wq = Poly::constant(qi_int(w));
                let lam = &i * &Poly::var(self.lambda_var(b));
                let term = match which {
                    Charge::QBar => lam,
                    Charge::QBarH => lam + grad[b].clone(),
                    Charge::NBar => grad[b].clone(),
                    _ => Poly::zero(),
                };
                cba = cba + &term * &wq;
            }
            acc = &acc + &self.c(a).scale(&ca);
            acc = &acc + &self.cbar(a).scale(&cba);
        }
        Ok(acc)
    }

    /// Substitutes numeric `φ`, even supernumbers for `λ`, and odd
    /// supernumbers for the ghosts. All substitutes must share one algebra.
    pub fn substitute(
        &self,
        f: &ExtendedFunction,
        phi: &[f64],
        lambda: &[Supernumber<C64>],
        c: &[Supernumber<C64>],
        cbar: &[Supernumber<C64>],
    ) -> Result<Supernumber<C64>, ExtendedError> {
        let d = self.dim();
        if phi.len() != d || lambda.len() != d || c.len() != d || cbar.len() != d {
            return Err(ExtendedError::DimensionMismatch {
                expected: self.n,
                found: phi.len() / 2,
            });
        }
        let target = Arc::clone(c[0].algebra());
        let mut gens: Vec<Option<&Supernumber<C64>>> = vec![None; self.algebra.len()];
        for a in 0..d {
            gens[self.c[a]] = Some(&c[a]);
            gens[self.cbar[a]] = Some(&cbar[a]);
        }
        let mut args: Vec<Supernumber<C64>> = phi
            .iter()
            .map(|&x| Supernumber::scalar(&target, C64::new(x, 0.0)))
            .collect();
        args.extend(lambda.iter().cloned());
        let mut acc = Supernumber::zero(&target);
        for (mask, coeff) in f.terms() {
            let mut t = eval_poly_super(coeff, &args);
            for (g, sub) in gens.iter().enumerate() {
                if mask & (1u64 << g) == 0 {
                    continue;
                }
                let s = sub.ok_or_else(|| {
                    ExtendedError::Unsubstituted(self.algebra.label(g).to_string())
                })?;
                t = t.try_mul(s)?;
            }
            acc = acc.try_add(&t)?;
        }
        Ok(acc)
    }
}

/// Numeric point of the extended phase space; the ghost sector stays symbolic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPoint {
    pub phi: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Solution of the extended equations of motion from `(φ₀, λ₀, c₀, c̄₀)`:
/// `c(t) = C c₀`, `c̄(t) = c̄₀ K`, and
/// `λ_b(t) = Λ_b + i Σ_{g,h} G_b[g][h] c̄₀_g c₀^h`.
#[derive(Debug, Clone)]
pub struct ExtendedFlowResult {
    pub phi: Vec<f64>,
    pub lambda: Vec<f64>,
    pub c_transport: DMatrix<f64>,
    pub cbar_transport: DMatrix<f64>,
    pub lambda_ghost: Vec<DMatrix<f64>>,
    pub stats: StepStats,
}

impl ExtendedFlowResult {
    /// Ghost-sector state at the endpoint as supernumbers over a ghost-only
    /// algebra whose generators stand for the initial ghosts.
    pub fn symbolic_state(
        &self,
        space: &ExtendedSpace,
    ) -> (Vec<Supernumber<C64>>, Vec<Supernumber<C64>>, Vec<Supernumber<C64>>) {
        let d = space.dim();
        let alg = Arc::clone(space.algebra());
        let c0: Vec<Supernumber<C64>> = (0..d)
            .map(|a| Supernumber::generator(&alg, space.ghost_index(a)).unwrap())
            .collect();
        let cb0: Vec<Supernumber<C64>> = (0..d)
            .map(|a| Supernumber::generator(&alg, space.antighost_index(a)).unwrap())
            .collect();
        let lin = |coeffs: &dyn Fn(usize) -> f64, basis: &[Supernumber<C64>]| {
            let mut acc = Supernumber::zero(&alg);
            for (h, g) in basis.iter().enumerate() {
                acc = &acc + &g.scale(&C64::new(coeffs(h), 0.0));
            }
            acc
        };
        let c: Vec<_> = (0..d)
            .map(|a| lin(&|h| self.c_transport[(a, h)], &c0))
            .collect();
        let cbar: Vec<_> = (0..d)
            .map(|b| lin(&|g| self.cbar_transport[(g, b)], &cb0))
            .collect();
        let lambda: Vec<_> = (0..d)
            .map(|b| {
                let mut acc = Supernumber::scalar(&alg, C64::new(self.lambda[b], 0.0));
                for g in 0..d {
                    for h in 0..d {
                        let v = self.lambda_ghost[b][(g, h)];
                        if v != 0.0 {
                            acc = &acc + &(&cb0[g] * &c0[h]).scale(&C64::new(0.0, v));
                        }
                    }
                }
                acc
            })
            .collect();
        (lambda, c, cbar)
    }
}

/// Right-hand sides of the extended equations, read off from `{Z, ℋ}`.
struct ExtendedRhs {
    d: usize,
    phi_dot: Vec<CompiledPoly>,
    /// `ċ^a = A[a][b] c^b`
    a: Vec<Vec<CompiledPoly>>,
    /// `ċ̄_b = c̄_a B[a][b]`
    b: Vec<Vec<CompiledPoly>>,
    /// `λ̇_b = L[a][b] λ_a + i c̄_a S[a][b][f] c^f`
    l: Vec<Vec<CompiledPoly>>,
    s: Vec<Vec<Vec<CompiledPoly>>>,
}

fn body_poly(x: &ExtendedFunction) -> Poly<Qi> {
    x.body()
}

impl ExtendedRhs {
    fn new(space: &ExtendedSpace, h: &Observable) -> Result<Self, ExtendedError> {
        let d = space.dim();
        let ham = space.superhamiltonian(h)?;
        let compile_lambda_free = |p: &Poly<Qi>| {
            debug_assert!((0..d).all(|a| p.degree_in(space.lambda_var(a)) == 0));
            debug_assert!(p.terms().all(|(_, c)| c.im == num_traits::Zero::zero()));
            p.compile()
        };
        let mut phi_dot = Vec::new();
        let mut a_m = Vec::new();
        let mut b_m = vec![Vec::new(); d];
        let mut l_m = vec![Vec::new(); d];
        let mut s_m = vec![vec![Vec::new(); d]; d];
        for z in 0..d {
            phi_dot.push(compile_lambda_free(&body_poly(&space.bracket(&space.phi(z), &ham)?)));
            let cdot = space.bracket(&space.c(z), &ham)?;
            a_m.push(
                (0..d)
                    .map(|b| {
                        let x = cdot.left_derivative(space.ghost_index(b)).unwrap();
                        compile_lambda_free(&body_poly(&x))
                    })
                    .collect(),
            );
        }
        for bidx in 0..d {
            let cbdot = space.bracket(&space.cbar(bidx), &ham)?;
            let ldot = space.bracket(&space.lambda(bidx), &ham)?;
            let ldot_body = ldot.body();
            for a in 0..d {
                let x = cbdot.right_derivative(space.antighost_index(a))?;
                b_m[a].push(compile_lambda_free(&body_poly(&x)));
                let la = ldot_body.derivative(space.lambda_var(a));
                l_m[a].push(compile_lambda_free(&la));
                for f in 0..d {
                    let x = ldot
                        .right_derivative(space.ghost_index(f))?
                        .right_derivative(space.antighost_index(a))?;
                    // the source is i·(real), carried without the i
                    let x = x.scale(&Poly::constant(-qi_i()));
                    s_m[a][bidx].push(compile_lambda_free(&body_poly(&x)));
                }
            }
        }
        Ok(ExtendedRhs {
            d,
            phi_dot,
            a: a_m,
            b: b_m,
            l: l_m,
            s: s_m,
        })
    }

    // state layout: φ | C (row-major) | K (row-major) | Λ | G[b][g][h]
    fn eval(&self, y: &[f64], dy: &mut [f64]) {
        let d = self.d;
        let x = &y[..d];
        let off_c = d;
        let off_k = off_c + d * d;
        let off_l = off_k + d * d;
        let off_g = off_l + d;
        let ev = |m: &Vec<Vec<CompiledPoly>>| -> Vec<f64> {
            m.iter().flat_map(|r| r.iter().map(|p| p.eval(x))).collect()
        };
        let am = ev(&self.a);
        let bm = ev(&self.b);
        let lm = ev(&self.l);
        let sm: Vec<f64> = self
            .s
            .iter()
            .flat_map(|ra| ra.iter().flat_map(|rb| rb.iter().map(|p| p.eval(x))))
            .collect();
        for (a, p) in self.phi_dot.iter().enumerate() {
            dy[a] = p.eval(x);
        }
        let cm = &y[off_c..off_k];
        let km = &y[off_k..off_l];
        let lam = &y[off_l..off_g];
        let gm = &y[off_g..];
        for i in 0..d {
            for j in 0..d {
                let mut c_acc = 0.0;
                let mut k_acc = 0.0;
                for k in 0..d {
                    c_acc += am[i * d + k] * cm[k * d + j];
                    k_acc += km[i * d + k] * bm[k * d + j];
                }
                dy[off_c + i * d + j] = c_acc;
                dy[off_k + i * d + j] = k_acc;
            }
        }
        for b in 0..d {
            let mut acc = 0.0;
            for a in 0..d {
                acc += lm[a * d + b] * lam[a];
            }
            dy[off_l + b] = acc;
        }
        for b in 0..d {
            for g in 0..d {
                for h in 0..d {
                    let mut acc = 0.0;
                    for a in 0..d {
                        acc += lm[a * d + b] * gm[(a * d + g) * d + h];
                        let mut sc = 0.0;
                        for f in 0..d {
                            sc += sm[(a * d + b) * d + f] * cm[f * d + h];
                        }
                        acc += km[g * d + a] * sc;
                    }
                    dy[off_g + (b * d + g) * d + h] = acc;
                }
            }
        }
    }
}

/// Integrates all four lines of the extended equations of motion, with each
/// right-hand side obtained as `{Z, ℋ}`.
pub fn extended_flow(
    h: &Observable,
    x0: &ExtendedPoint,
    t: f64,
    tol: f64,
) -> Result<ExtendedFlowResult, ExtendedError> {
    let space = ExtendedSpace::new(h.n());
    let d = space.dim();
    if x0.phi.len() != d || x0.lambda.len() != d {
        return Err(ExtendedError::DimensionMismatch {
            expected: h.n(),
            found: x0.phi.len() / 2,
        });
    }
    let rhs = ExtendedRhs::new(&space, h)?;
    let mut y0 = x0.phi.clone();
    let eye: Vec<f64> = (0..d * d)
        .map(|k| if k / d == k % d { 1.0 } else { 0.0 })
        .collect();
    y0.extend(&eye);
    y0.extend(&eye);
    y0.extend(&x0.lambda);
    y0.extend(std::iter::repeat(0.0).take(d * d * d));
    let (y, stats) = integrate(
        |_, y, dy| rhs.eval(y, dy),
        0.0,
        &y0,
        t,
        &OdeOptions::with_tol(tol),
    )
    .map_err(FlowError::from)?;
    let off_c = d;
    let off_k = off_c + d * d;
    let off_l = off_k + d * d;
    let off_g = off_l + d;
    Ok(ExtendedFlowResult {
        phi: y[..d].to_vec(),
        c_transport: DMatrix::from_row_slice(d, d, &y[off_c..off_k]),
        cbar_transport: DMatrix::from_row_slice(d, d, &y[off_k..off_l]),
        lambda: y[off_l..off_g].to_vec(),
        lambda_ghost: (0..d)
            .map(|b| DMatrix::from_row_slice(d, d, &y[off_g + b * d * d..off_g + (b + 1) * d * d]))
            .collect(),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::qi;

    fn ho() -> Observable {
        Observable::harmonic_oscillator()
    }

    fn ic(k: i64) -> Poly<Qi> {
        Poly::constant(qi_i() * qi_int(k))
    }

    #[test]
    fn fundamental_brackets() {
        let s = ExtendedSpace::new(1);
        let one = s.constant(qi_int(1));
        let zero = ExtendedFunction::zero(s.algebra());
        for a in 0..2 {
            for b in 0..2 {
                let expect = if a == b { one.clone() } else { zero.clone() };
                assert_eq!(s.bracket(&s.phi(a), &s.lambda(b)).unwrap(), expect);
                assert!(s.bracket(&s.phi(a), &s.phi(b)).unwrap().is_zero());
                let g = if a == b { s.constant(-qi_i()) } else { zero.clone() };
                assert_eq!(s.bracket(&s.cbar(b), &s.c(a)).unwrap(), g);
            }
        }
    }

    #[test]
    fn oscillator_superhamiltonian() {
        let s = ExtendedSpace::new(1);
        let got = s.superhamiltonian(&ho()).unwrap();
        // λ_q p − λ_p q + i c̄_q c^p − i c̄_p c^q
        let expect = &(&(&(&s.lambda(0) * &s.phi(1)) - &(&s.lambda(1) * &s.phi(0)))
            + &(&s.cbar(0) * &s.c(1)).scale(&ic(1)))
            - &(&s.cbar(1) * &s.c(0)).scale(&ic(1));
        assert_eq!(got, expect);
        assert!(s.superhamiltonian(&Observable::zero(1)).unwrap().is_zero());
        let free = s.superhamiltonian(&Observable::free_particle()).unwrap();
        let expect = &(&s.lambda(0) * &s.phi(1)) + &(&s.cbar(0) * &s.c(1)).scale(&ic(1));
        assert_eq!(free, expect);
    }

    #[test]
    fn charges() {
        let s = ExtendedSpace::new(1);
        let n = s.charge(Charge::N, Some(&ho())).unwrap();
        let expect = &(&s.c(0) * &s.phi(0)) + &(&s.c(1) * &s.phi(1));
        assert_eq!(n, expect);
        let q = s.charge(Charge::Q, None).unwrap();
        let expect = &(&s.c(0) * &s.lambda(0)).scale(&ic(1)) + &(&s.c(1) * &s.lambda(1)).scale(&ic(1));
        assert_eq!(q, expect);
        let qh0 = s.charge(Charge::QH, Some(&Observable::zero(1))).unwrap();
        assert_eq!(qh0, q);
        assert_eq!(
            s.charge(Charge::N, None),
            Err(ExtendedError::MissingHamiltonian(Charge::N))
        );
    }

    #[test]
    fn charge_names_round_trip() {
        for c in Charge::ALL {
            assert_eq!(c.to_string().parse::<Charge>().unwrap(), c);
        }
        assert!("X".parse::<Charge>().is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let s = ExtendedSpace::new(2);
        assert!(matches!(
            s.superhamiltonian(&ho()),
            Err(ExtendedError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn susy_anticommutator_oscillator() {
        let s = ExtendedSpace::new(1);
        let qh = s.charge(Charge::QH, Some(&ho())).unwrap();
        let qbh = s.charge(Charge::QBarH, Some(&ho())).unwrap();
        let ham = s.superhamiltonian(&ho()).unwrap();
        let got = s.bracket(&qh, &qbh).unwrap();
        assert_eq!(got, ham.scale(&Poly::constant(qi_int(2))));
    }

    #[test]
    fn oscillator_ghost_transport_is_rotation() {
        let t = 0.7;
        let r = extended_flow(
            &ho(),
            &ExtendedPoint {
                phi: vec![1.0, 0.0],
                lambda: vec![0.0, 0.0],
            },
            t,
            1e-11,
        )
        .unwrap();
        let (c, s) = (t.cos(), t.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        assert!((&r.c_transport - &rot).amax() < 1e-9);
        assert!((&r.cbar_transport * &r.c_transport - DMatrix::identity(2, 2)).amax() < 1e-9);
    }

    #[test]
    fn free_particle_lambda_line() {
        let r = extended_flow(
            &Observable::free_particle(),
            &ExtendedPoint {
                phi: vec![0.0, 1.0],
                lambda: vec![2.0, 3.0],
            },
            1.5,
            1e-11,
        )
        .unwrap();
        assert!((r.lambda[0] - 2.0).abs() < 1e-10);
        assert!((r.lambda[1] - (3.0 - 2.0 * 1.5)).abs() < 1e-10);
        assert!(r.lambda_ghost.iter().all(|g| g.amax() < 1e-12));
    }

    #[test]
    fn zero_time_gives_identity_transport() {
        let h = Observable::quartic_oscillator();
        let r = extended_flow(
            &h,
            &ExtendedPoint {
                phi: vec![0.5, 0.5],
                lambda: vec![1.0, 1.0],
            },
            0.0,
            1e-10,
        )
        .unwrap();
        assert_eq!(r.c_transport, DMatrix::identity(2, 2));
        assert_eq!(r.cbar_transport, DMatrix::identity(2, 2));
    }

    #[test]
    fn quartic_sources_lambda_ghost_term() {
        let h = Observable::new(
            1,
            Poly::from_terms([
                (vec![0, 2], qi(1, 2)),
                (vec![4], qi(1, 4)),
            ]),
        )
        .unwrap();
        let r = extended_flow(
            &h,
            &ExtendedPoint {
                phi: vec![0.8, 0.0],
                lambda: vec![0.0, 0.0],
            },
            1.0,
            1e-10,
        )
        .unwrap();
        assert!(r.lambda_ghost.iter().any(|g| g.amax() > 1e-3));
    }
}
