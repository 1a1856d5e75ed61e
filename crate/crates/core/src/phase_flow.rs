//! Polynomial observables on phase space, the symplectic form, Hamiltonian
//! flows with their Jacobi matrices, and the Liouvillian vector field.
//!
//! Coordinates are ordered `φ = (q^1..q^n, p^1..p^n)` and the symplectic
//! matrix is `ω = [[0, I], [−I, 0]]`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::ode::{integrate, OdeError, OdeOptions, StepStats};
use crate::poly::{CompiledPoly, Monomial, Poly};
use crate::ring::{qi, qi_int, Qi, Ring};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FlowError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("integration failed: {0}")]
    IntegrationFailure(#[from] OdeError),
}

/// `ω^{ab}` for `n` degrees of freedom.
pub fn omega(n: usize, a: usize, b: usize) -> i64 {
    if a < n && b == a + n {
        1
    } else if a >= n && b + n == a {
        -1
    } else {
        0
    }
}

pub fn symplectic_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |a, b| omega(n, a, b) as f64)
}

/// Exact polynomial function of `φ^1..φ^{2n}`.
#[derive(Clone, PartialEq)]
pub struct Observable {
    n: usize,
    poly: Poly<Qi>,
}

impl std::fmt::Debug for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Observable[n={}]({:?})", self.n, self.poly)
    }
}

impl Observable {
    pub fn new(n: usize, poly: Poly<Qi>) -> Result<Self, FlowError> {
        if poly.num_vars() > 2 * n {
            return Err(FlowError::DimensionMismatch {
                expected: 2 * n,
                found: poly.num_vars(),
            });
        }
        Ok(Observable { n, poly })
    }

    pub fn zero(n: usize) -> Self {
        Observable {
            n,
            poly: Poly::zero(),
        }
    }

    /// The coordinate function `φ^a`.
    pub fn coordinate(n: usize, a: usize) -> Self {
        assert!(a < 2 * n, "coordinate index out of range");
        Observable {
            n,
            poly: Poly::var(a),
        }
    }

    /// `(p² + q²)/2` for one degree of freedom.
    pub fn harmonic_oscillator() -> Self {
        let q = Poly::<Qi>::var(0);
        let p = Poly::<Qi>::var(1);
        Observable {
            n: 1,
            poly: (&q * &q + &p * &p).scale(&qi(1, 2)),
        }
    }

    /// `p²/2`.
    pub fn free_particle() -> Self {
        let p = Poly::<Qi>::var(1);
        Observable {
            n: 1,
            poly: (&p * &p).scale(&qi(1, 2)),
        }
    }

    /// `p²/2 + q⁴/4`.
    pub fn quartic_oscillator() -> Self {
        Observable {
            n: 1,
            poly: Poly::from_terms([
                (vec![0, 2], qi(1, 2)),
                (vec![4], qi(1, 4)),
            ]),
        }
    }

    /// `p²/2 + V(q)` with `V` given as a polynomial in variable 0.
    pub fn kinetic_plus_potential(v: &Poly<Qi>) -> Result<Self, FlowError> {
        let p = Poly::<Qi>::var(1);
        Observable::new(1, (&p * &p).scale(&qi(1, 2)) + v.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn poly(&self) -> &Poly<Qi> {
        &self.poly
    }

    pub fn derivative(&self, a: usize) -> Poly<Qi> {
        self.poly.derivative(a)
    }

    pub fn gradient(&self) -> Vec<Poly<Qi>> {
        (0..self.dim()).map(|a| self.poly.derivative(a)).collect()
    }

    pub fn hessian(&self) -> Vec<Vec<Poly<Qi>>> {
        let g = self.gradient();
        g.iter()
            .map(|ga| (0..self.dim()).map(|b| ga.derivative(b)).collect())
            .collect()
    }

    pub fn third_derivative(&self, a: usize, b: usize, c: usize) -> Poly<Qi> {
        self.poly.derivative(a).derivative(b).derivative(c)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.poly.compile().eval(x)
    }

    fn check_same(&self, other: &Self) -> Result<(), FlowError> {
        if self.n != other.n {
            return Err(FlowError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }
}

/// `{f, g} = ∂_a f ω^{ab} ∂_b g`.
pub fn poisson_bracket(f: &Observable, g: &Observable) -> Result<Observable, FlowError> {
    f.check_same(g)?;
    let n = f.n;
    let mut acc = Poly::zero();
    for a in 0..n {
        let (q, p) = (a, a + n);
        acc = acc + &f.derivative(q) * &g.derivative(p) - &f.derivative(p) * &g.derivative(q);
    }
    Ok(Observable { n, poly: acc })
}

/// Hamiltonian vector field `v^a = ω^{ab} ∂_b H`; the Liouvillian is
/// `L̂ = −i v^a ∂_a`.
pub fn liouvillian_coefficients(h: &Observable) -> Vec<Poly<Qi>> {
    hamiltonian_field(h)
}

pub(crate) fn hamiltonian_field(h: &Observable) -> Vec<Poly<Qi>> {
    let n = h.n;
    let grad = h.gradient();
    (0..2 * n)
        .map(|a| {
            if a < n {
                grad[a + n].clone()
            } else {
                -grad[a - n].clone()
            }
        })
        .collect()
}

/// `M^a_b = ω^{ad} ∂_d ∂_b H` as exact polynomials.
pub(crate) fn field_jacobian(h: &Observable) -> Vec<Vec<Poly<Qi>>> {
    let field = hamiltonian_field(h);
    field
        .iter()
        .map(|v| (0..h.dim()).map(|b| v.derivative(b)).collect())
        .collect()
}

/// Hamiltonian vector field and its Jacobian compiled for fast evaluation.
pub struct CompiledFlow {
    dim: usize,
    field: Vec<CompiledPoly>,
    jac: Vec<Vec<CompiledPoly>>,
}

impl CompiledFlow {
    pub fn new(h: &Observable) -> Self {
        CompiledFlow {
            dim: h.dim(),
            field: hamiltonian_field(h).iter().map(Poly::compile).collect(),
            jac: field_jacobian(h)
                .iter()
                .map(|row| row.iter().map(Poly::compile).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self, x: &[f64], out: &mut [f64]) {
        for (o, f) in out.iter_mut().zip(&self.field) {
            *o = f.eval(x);
        }
    }

    pub fn jacobian_at(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |a, b| self.jac[a][b].eval(x))
    }

    /// Endpoint only, without the variational equation.
    pub fn point(&self, x0: &[f64], t: f64, opts: &OdeOptions) -> Result<Vec<f64>, FlowError> {
        let (y, _) = integrate(|_, y, dy| self.field(y, dy), 0.0, x0, t, opts)?;
        Ok(y)
    }

    pub fn flow(&self, x0: &[f64], t: f64, opts: &OdeOptions) -> Result<FlowResult, FlowError> {
        let d = self.dim;
        if x0.len() != d {
            return Err(FlowError::DimensionMismatch {
                expected: d,
                found: x0.len(),
            });
        }
        let mut y0 = x0.to_vec();
        // J stored column-major after the point
        for j in 0..d {
            for i in 0..d {
                y0.push(if i == j { 1.0 } else { 0.0 });
            }
        }
        let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
            let x = &y[..d];
            self.field(x, &mut dy[..d]);
            let m: Vec<f64> = (0..d * d).map(|k| self.jac[k / d][k % d].eval(x)).collect();
            for j in 0..d {
                for i in 0..d {
                    let mut acc = 0.0;
                    for k in 0..d {
                        acc += m[i * d + k] * y[d + j * d + k];
                    }
                    dy[d + j * d + i] = acc;
                }
            }
        };
        let (y, stats) = integrate(rhs, 0.0, &y0, t, opts)?;
        Ok(FlowResult {
            endpoint: y[..d].to_vec(),
            jacobi: DMatrix::from_column_slice(d, d, &y[d..]),
            stats,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub endpoint: Vec<f64>,
    /// `J = ∂φ(t)/∂φ₀`.
    pub jacobi: DMatrix<f64>,
    pub stats: StepStats,
}

/// Integrates `φ̇ = ω ∂H` together with `J̇ = (ω · Hess H) J`.
pub fn hamilton_flow(
    h: &Observable,
    x0: &[f64],
    t: f64,
    tol: f64,
) -> Result<FlowResult, FlowError> {
    CompiledFlow::new(h).flow(x0, t, &OdeOptions::with_tol(tol))
}

/// Largest entry of `JᵀωJ − ω`.
pub fn symplectic_defect(j: &DMatrix<f64>) -> f64 {
    let n = j.nrows() / 2;
    let w = symplectic_matrix(n);
    (j.transpose() * &w * j - w).amax()
}

/// Polynomial observable with the listed coefficients on `q^i p^j` (n = 1).
pub fn observable_1d(terms: &[(u32, u32, i64, i64)]) -> Observable {
    let poly = Poly::from_terms(
        terms
            .iter()
            .map(|&(i, j, num, den)| (vec![i, j], qi(num, den))),
    );
    Observable { n: 1, poly }
}

impl Observable {
    /// Adds `c · φ^a` style terms; convenience for tests and configs.
    pub fn with_term(mut self, exps: Vec<u32>, c: Qi) -> Result<Self, FlowError> {
        if exps.len() > self.dim() {
            return Err(FlowError::DimensionMismatch {
                expected: self.dim(),
                found: exps.len(),
            });
        }
        self.poly.add_term(Monomial::new(exps), c);
        Ok(self)
    }

    pub fn scaled(&self, k: i64) -> Self {
        Observable {
            n: self.n,
            poly: self.poly.scale(&qi_int(k)),
        }
    }

    pub fn is_zero(&self) -> bool {
        Ring::is_zero(&self.poly)
    }
}
