//! Superfields `Φ^a(t, θ, θ̄) = φ^a + θc^a + θ̄ω^{ab}c̄_b + iθ̄θω^{ab}λ_b`,
//! their composites, the Lagrangian and action multiplets, and the
//! dequantization of configurational weights.
//!
//! Point mode keeps `(φ, λ)` as polynomial variables and the ghosts as
//! generators. Path mode ([`SuperPath`]) makes every component a
//! polynomial in `t`; ghost paths are odd combinations of the ghost
//! generators with polynomial profiles.

use std::sync::Arc;

use rand::Rng;

use crate::extended::{Charge, ExtendedError, ExtendedFunction, ExtendedSpace};
use crate::grassmann::{eval_poly_super, GrassmannAlgebra, GrassmannError, Supernumber};
use crate::phase_flow::{omega, Observable};
use crate::poly::Poly;
use crate::ring::{qi, qi_i, qi_int, Qi, Ring, C64};
use crate::supergeometry::{THETA, THETA_BAR};

pub const THETA_PRIME: &str = "θ′";
pub const THETA_BAR_PRIME: &str = "θ̄′";

type Tp = Poly<Qi>;
/// Supernumber with coefficients polynomial in `t`.
pub type PathValue = Supernumber<Tp>;

fn cpoly(c: Qi) -> Tp {
    Poly::constant(c)
}

fn ipoly() -> Tp {
    cpoly(qi_i())
}

/// Components of `x = x₀ + θ N + N̄ θ̄ − iθ̄θ 𝒢`.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplet<R: Ring> {
    pub base: Supernumber<R>,
    pub n: Supernumber<R>,
    pub nbar: Supernumber<R>,
    pub top: Supernumber<R>,
}

/// Splits off the `(θ, θ̄)` dependence in the normalization above.
pub fn multiplet<R: Ring>(x: &Supernumber<R>) -> Result<Multiplet<R>, GrassmannError> {
    let gens = [THETA, THETA_BAR];
    let minus_i = -R::from_qi(&qi_i());
    Ok(Multiplet {
        base: x.component(&gens, &[])?,
        n: x.component(&gens, &[THETA])?,
        nbar: -x.component(&gens, &[THETA_BAR])?,
        // iθθ̄ 𝒢 = −iθ̄θ 𝒢, so the θθ̄ component is i𝒢
        top: x.component(&gens, &[THETA, THETA_BAR])?.scale(&minus_i),
    })
}

/// Extended phase space enlarged by the supertime partners.
#[derive(Debug, Clone)]
pub struct SuperfieldSpace {
    ext: ExtendedSpace,
}

impl SuperfieldSpace {
    pub fn new(n: usize) -> Self {
        SuperfieldSpace {
            ext: ExtendedSpace::with_prefix(n, &[THETA, THETA_BAR]),
        }
    }

    /// Two copies `(θ, θ̄)` and `(θ′, θ̄′)` of the supertime partners.
    pub fn doubled(n: usize) -> Self {
        SuperfieldSpace {
            ext: ExtendedSpace::with_prefix(n, &[THETA, THETA_BAR, THETA_PRIME, THETA_BAR_PRIME]),
        }
    }

    pub fn extended(&self) -> &ExtendedSpace {
        &self.ext
    }

    pub fn n(&self) -> usize {
        self.ext.n()
    }

    pub fn algebra(&self) -> &Arc<GrassmannAlgebra> {
        self.ext.algebra()
    }

    pub fn generator(&self, label: &str) -> Result<ExtendedFunction, GrassmannError> {
        Supernumber::generator(self.algebra(), label)
    }

    pub fn theta(&self) -> ExtendedFunction {
        self.generator(THETA).expect("θ present")
    }

    pub fn thetabar(&self) -> ExtendedFunction {
        self.generator(THETA_BAR).expect("θ̄ present")
    }

    /// `Φ^a` at arbitrary odd values of `(θ, θ̄)`.
    pub fn superfield_at(
        &self,
        a: usize,
        theta: &ExtendedFunction,
        thetabar: &ExtendedFunction,
    ) -> ExtendedFunction {
        let e = &self.ext;
        let n = e.n();
        let mut cb = ExtendedFunction::zero(self.algebra());
        let mut lam = ExtendedFunction::zero(self.algebra());
        for b in 0..2 * n {
            let w = omega(n, a, b);
            if w != 0 {
                let wq = cpoly(qi_int(w));
                cb = &cb + &e.cbar(b).scale(&wq);
                lam = &lam + &e.lambda(b).scale(&wq);
            }
        }
        let top = (&(thetabar * theta) * &lam).scale(&ipoly());
        &(&(&e.phi(a) + &(theta * &e.c(a))) + &(thetabar * &cb)) + &top
    }

    pub fn superfield(&self, a: usize) -> ExtendedFunction {
        self.superfield_at(a, &self.theta(), &self.thetabar())
    }

    pub fn superfields(&self) -> Vec<ExtendedFunction> {
        (0..2 * self.n()).map(|a| self.superfield(a)).collect()
    }

    /// `G(Φ)` by exact expansion; the Taylor series in the nilpotent
    /// displacement terminates on its own.
    pub fn compose(&self, g: &Observable) -> Result<ExtendedFunction, ExtendedError> {
        if g.n() != self.n() {
            return Err(ExtendedError::DimensionMismatch {
                expected: self.n(),
                found: g.n(),
            });
        }
        Ok(eval_poly_super(g.poly(), &self.superfields()))
    }

    /// `exp(ad_X) G` with `X = θQ + Q̄θ̄` and `ad_X Y = i{X, Y}`, summed
    /// until the series terminates.
    pub fn susy_conjugation(
        &self,
        g: &Observable,
        theta: &ExtendedFunction,
        thetabar: &ExtendedFunction,
    ) -> Result<ExtendedFunction, ExtendedError> {
        let e = &self.ext;
        let q = e.charge(Charge::Q, None)?;
        let qb = e.charge(Charge::QBar, None)?;
        let x = &(theta * &q) + &(&qb * thetabar);
        let mut term = e.lift(g)?;
        let mut acc = term.clone();
        let mut k = 1i64;
        loop {
            term = e.bracket(&x, &term)?.scale(&cpoly(qi_i() * qi(1, k)));
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
            k += 1;
        }
        Ok(acc)
    }

    /// `{Φ^a(θ,θ̄), Φ^b(θ′,θ̄′)}` in the doubled algebra, alongside the
    /// expected `−iω^{ab}(θ̄−θ̄′)(θ−θ′)`.
    pub fn superfield_bracket(
        &self,
        a: usize,
        b: usize,
    ) -> Result<(ExtendedFunction, ExtendedFunction), ExtendedError> {
        let th = self.theta();
        let tb = self.thetabar();
        let thp = self.generator(THETA_PRIME)?;
        let tbp = self.generator(THETA_BAR_PRIME)?;
        let lhs = self.ext.bracket(
            &self.superfield_at(a, &th, &tb),
            &self.superfield_at(b, &thp, &tbp),
        )?;
        let w = omega(self.n(), a, b);
        let rhs = (&(&tb - &tbp) * &(&th - &thp)).scale(&cpoly(-qi_i() * qi_int(w)));
        Ok((lhs, rhs))
    }
}

/// Polynomial-in-`t` path through the extended phase space.
#[derive(Debug, Clone)]
pub struct SuperPath {
    space: SuperfieldSpace,
    phi: Vec<Tp>,
    lambda: Vec<Tp>,
    c: Vec<PathValue>,
    cbar: Vec<PathValue>,
}

impl SuperPath {
    /// Ghost paths must be odd, `θ`-free elements of the superfield algebra.
    pub fn new(
        space: SuperfieldSpace,
        phi: Vec<Tp>,
        lambda: Vec<Tp>,
        c: Vec<PathValue>,
        cbar: Vec<PathValue>,
    ) -> Result<Self, ExtendedError> {
        let d = 2 * space.n();
        for len in [phi.len(), lambda.len(), c.len(), cbar.len()] {
            if len != d {
                return Err(ExtendedError::DimensionMismatch {
                    expected: space.n(),
                    found: len / 2,
                });
            }
        }
        for g in c.iter().chain(&cbar) {
            if !g.is_odd() || !Arc::ptr_eq(g.algebra(), space.algebra()) {
                return Err(GrassmannError::AlgebraMismatch.into());
            }
            if !g.drop_generators(&[THETA, THETA_BAR])?.eq(g) {
                return Err(GrassmannError::AlgebraMismatch.into());
            }
        }
        Ok(SuperPath {
            space,
            phi,
            lambda,
            c,
            cbar,
        })
    }

    /// Random path: components of degree ≤ `degree` with small rational
    /// coefficients; each ghost path is a combination of all ghost
    /// generators of the matching kind.
    pub fn random<G: Rng>(n: usize, degree: u32, rng: &mut G) -> Self {
        let space = SuperfieldSpace::new(n);
        let d = 2 * n;
        let rpoly = |rng: &mut G| -> Tp {
            Poly::from_terms((0..=degree).map(|k| {
                (
                    vec![k],
                    qi(rng.gen_range(-4..=4), rng.gen_range(1..=3)),
                )
            }))
        };
        let phi: Vec<Tp> = (0..d).map(|_| rpoly(rng)).collect();
        let lambda: Vec<Tp> = (0..d).map(|_| rpoly(rng)).collect();
        let alg = Arc::clone(space.algebra());
        let ghost = |rng: &mut G, gens: &dyn Fn(usize) -> usize| -> PathValue {
            let mut acc = PathValue::zero(&alg);
            for h in 0..d {
                let g = Supernumber::generator(&alg, gens(h)).unwrap();
                acc = &acc + &g.scale(&rpoly(rng));
            }
            acc
        };
        let ext = space.extended().clone();
        let c: Vec<PathValue> = (0..d)
            .map(|_| ghost(rng, &|h| ext.ghost_index(h)))
            .collect();
        let cbar: Vec<PathValue> = (0..d)
            .map(|_| ghost(rng, &|h| ext.antighost_index(h)))
            .collect();
        SuperPath {
            space,
            phi,
            lambda,
            c,
            cbar,
        }
    }

    /// Path with only `φ` nonzero.
    pub fn bosonic(n: usize, phi: Vec<Tp>) -> Result<Self, ExtendedError> {
        let space = SuperfieldSpace::new(n);
        let d = 2 * n;
        let z = PathValue::zero(space.algebra());
        SuperPath::new(
            space,
            phi,
            vec![Poly::zero(); d],
            vec![z.clone(); d],
            vec![z; d],
        )
    }

    pub fn space(&self) -> &SuperfieldSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn algebra(&self) -> &Arc<GrassmannAlgebra> {
        self.space.algebra()
    }

    pub fn phi(&self) -> &[Tp] {
        &self.phi
    }

    pub fn lambda(&self) -> &[Tp] {
        &self.lambda
    }

    pub fn c(&self) -> &[PathValue] {
        &self.c
    }

    pub fn cbar(&self) -> &[PathValue] {
        &self.cbar
    }

    fn scalar(&self, p: Tp) -> PathValue {
        PathValue::scalar(self.algebra(), p)
    }

    pub fn superfield(&self, a: usize) -> PathValue {
        let n = self.n();
        let th = PathValue::generator(self.algebra(), THETA).unwrap();
        let tb = PathValue::generator(self.algebra(), THETA_BAR).unwrap();
        let mut cb = PathValue::zero(self.algebra());
        let mut lam = Poly::zero();
        for b in 0..2 * n {
            let w = omega(n, a, b);
            if w != 0 {
                cb = &cb + &self.cbar[b].scale(&cpoly(qi_int(w)));
                lam = lam + self.lambda[b].scale(&qi_int(w));
            }
        }
        let top = (&tb * &th).scale(&(&lam * &ipoly()));
        &(&(&self.scalar(self.phi[a].clone()) + &(&th * &self.c[a])) + &(&tb * &cb)) + &top
    }

    pub fn superfields(&self) -> Vec<PathValue> {
        (0..2 * self.n()).map(|a| self.superfield(a)).collect()
    }

    /// Evaluates an extended function of `space` along the path; ghost
    /// generators are matched by label.
    pub fn evaluate(
        &self,
        space: &ExtendedSpace,
        f: &ExtendedFunction,
    ) -> Result<PathValue, ExtendedError> {
        if space.n() != self.n() {
            return Err(ExtendedError::DimensionMismatch {
                expected: self.n(),
                found: space.n(),
            });
        }
        let d = 2 * self.n();
        let mut subs: Vec<Option<&PathValue>> = vec![None; space.algebra().len()];
        for a in 0..d {
            subs[space.ghost_index(a)] = Some(&self.c[a]);
            subs[space.antighost_index(a)] = Some(&self.cbar[a]);
        }
        let args: Vec<Tp> = self.phi.iter().chain(&self.lambda).cloned().collect();
        let mut acc = PathValue::zero(self.algebra());
        for (mask, coeff) in f.terms() {
            let mut t = self.scalar(coeff.eval_with(&args, |c| Poly::constant(c.clone())));
            for (g, sub) in subs.iter().enumerate() {
                if mask & (1u64 << g) == 0 {
                    continue;
                }
                let s = sub.ok_or_else(|| {
                    ExtendedError::Unsubstituted(space.algebra().label(g).to_string())
                })?;
                t = t.try_mul(s)?;
            }
            acc = acc.try_add(&t)?;
        }
        Ok(acc)
    }
}

pub fn time_derivative(x: &PathValue) -> PathValue {
    x.map_coeffs(|p| p.derivative(0))
}

/// `∫_{t0}^{t1} x dt` coefficientwise.
pub fn integrate_path(x: &PathValue, t0: &Qi, t1: &Qi) -> Supernumber<Qi> {
    x.map_coeffs(|p| {
        let a = p.antiderivative(0);
        a.eval::<Qi>(std::slice::from_ref(t1)) - a.eval::<Qi>(std::slice::from_ref(t0))
    })
}

/// `L(Φ) = Σ_i P_i ∂_t Q_i − H(Φ)` along a path.
pub fn super_lagrangian(h: &Observable, path: &SuperPath) -> PathValue {
    let n = path.n();
    let phis = path.superfields();
    let mut acc = PathValue::zero(path.algebra());
    for i in 0..n {
        acc = &acc + &(&phis[n + i] * &time_derivative(&phis[i]));
    }
    &acc - &eval_poly_super(h.poly(), &phis)
}

/// `L(φ) = Σ_i p_i q̇_i − H(φ)` for the bosonic part of the path.
pub fn bosonic_lagrangian(h: &Observable, path: &SuperPath) -> Tp {
    let n = path.n();
    let phi = path.phi();
    let mut acc = Poly::zero();
    for i in 0..n {
        acc = acc + &phi[n + i] * &phi[i].derivative(0);
    }
    acc - h.poly().eval_with(phi, |c| Poly::constant(c.clone()))
}

/// CPI Lagrangian `ℒ = λ_a φ̇^a + i c̄_a ċ^a − ℋ` along a path.
pub fn cpi_lagrangian(h: &Observable, path: &SuperPath) -> Result<PathValue, ExtendedError> {
    let space = ExtendedSpace::new(path.n());
    let ham = path.evaluate(&space, &space.superhamiltonian(h)?)?;
    let mut kin = PathValue::zero(path.algebra());
    for a in 0..2 * path.n() {
        kin = &kin + &path.scalar(&path.lambda[a] * &path.phi[a].derivative(0));
        kin = &kin + &(&path.cbar[a] * &time_derivative(&path.c[a])).scale(&ipoly());
    }
    Ok(&kin - &ham)
}

/// `B = Σ_i (λ_{p_i} p_i + i c̄_{p_i} c^{p_i})`, whose time derivative
/// separates `i∫dθdθ̄ L(Φ)` from `ℒ`.
pub fn boundary_term(path: &SuperPath) -> PathValue {
    let n = path.n();
    let mut acc = PathValue::zero(path.algebra());
    for i in 0..n {
        let p = n + i;
        acc = &acc + &path.scalar(&path.lambda[p] * &path.phi[p]);
        acc = &acc + &(&path.cbar[p] * &path.c[p]).scale(&ipoly());
    }
    acc
}

#[derive(Debug, Clone)]
pub struct LagrangianIdentityReport {
    /// `i∫dθdθ̄ L(Φ) − ℒ + dB/dt`; identically zero when the identity holds.
    pub residual: PathValue,
}

impl LagrangianIdentityReport {
    pub fn passed(&self) -> bool {
        self.residual.is_zero()
    }
}

pub fn lagrangian_identity_check(
    h: &Observable,
    path: &SuperPath,
) -> Result<LagrangianIdentityReport, ExtendedError> {
    let lhs = super_lagrangian(h, path)
        .berezin_integrate(&[THETA, THETA_BAR])?
        .scale(&ipoly());
    let rhs = &cpi_lagrangian(h, path)? - &time_derivative(&boundary_term(path));
    Ok(LagrangianIdentityReport {
        residual: &lhs - &rhs,
    })
}

/// `S[Φ] = base + θ𝒯 + θ̄𝒱 + iθθ̄·top` over `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct SuperActionExpansion {
    pub action: Supernumber<Qi>,
    pub base: Supernumber<Qi>,
    pub theta_component: Supernumber<Qi>,
    pub thetabar_component: Supernumber<Qi>,
    pub top: Supernumber<Qi>,
    /// `∫ℒ dt` over the interval.
    pub cpi_action: Supernumber<Qi>,
    /// `−[B]_{t0}^{t1}`.
    pub surface: Supernumber<Qi>,
}

impl SuperActionExpansion {
    pub fn reassemble(&self) -> Supernumber<Qi> {
        let alg = self.action.algebra();
        let th = Supernumber::<Qi>::generator(alg, THETA).unwrap();
        let tb = Supernumber::<Qi>::generator(alg, THETA_BAR).unwrap();
        let ttb = (&th * &tb).scale(&qi_i());
        &(&(&self.base + &(&th * &self.theta_component)) + &(&tb * &self.thetabar_component))
            + &(&ttb * &self.top)
    }

    /// `base = ∫L(φ)dt` and `top = ∫ℒ dt + s.t.`.
    pub fn consistent(&self, bosonic_action: &Qi) -> bool {
        let alg = self.action.algebra();
        self.base == Supernumber::scalar(alg, bosonic_action.clone())
            && self.top == &self.cpi_action + &self.surface
            && self.reassemble() == self.action
    }
}

pub fn action_multiplet_expansion(
    h: &Observable,
    path: &SuperPath,
    t0: &Qi,
    t1: &Qi,
) -> Result<(SuperActionExpansion, Qi), ExtendedError> {
    let action = integrate_path(&super_lagrangian(h, path), t0, t1);
    let gens = [THETA, THETA_BAR];
    let base = action.component(&gens, &[])?;
    let theta_component = action.component(&gens, &[THETA])?;
    let thetabar_component = action.component(&gens, &[THETA_BAR])?;
    let top = action
        .component(&gens, &[THETA, THETA_BAR])?
        .scale(&-qi_i());
    let cpi_action = integrate_path(&cpi_lagrangian(h, path)?, t0, t1);
    let b = boundary_term(path);
    let b_at = |t: &Qi| b.map_coeffs(|p| p.eval::<Qi>(std::slice::from_ref(t)));
    let surface = &b_at(t0) - &b_at(t1);
    let lb = bosonic_lagrangian(h, path).antiderivative(0);
    let bosonic = lb.eval::<Qi>(std::slice::from_ref(t1)) - lb.eval::<Qi>(std::slice::from_ref(t0));
    Ok((
        SuperActionExpansion {
            action,
            base,
            theta_component,
            thetabar_component,
            top,
            cpi_action,
            surface,
        },
        bosonic,
    ))
}

/// Endpoint data `(p, λ_p, c^p, c̄_p)` for each degree of freedom.
#[derive(Debug, Clone)]
pub struct EndpointData<R: Ring> {
    pub p: Vec<R>,
    pub lambda_p: Vec<R>,
    pub c_p: Vec<Supernumber<R>>,
    pub cbar_p: Vec<Supernumber<R>>,
}

/// The five exponents: surface terms and the four mixed-basis Fourier
/// factors `e^{−iλ_p p} e^{c̄_p c^p} e^{iλ_{p₀}p₀} e^{−c̄_{p₀}c^{p₀}}`.
fn surface_exponents<R: Ring>(
    end: &EndpointData<R>,
    start: &EndpointData<R>,
    alg: &Arc<GrassmannAlgebra>,
) -> Vec<Supernumber<R>> {
    let i = R::from_qi(&qi_i());
    let mut st = Supernumber::zero(alg);
    let mut f = vec![Supernumber::zero(alg); 4];
    for k in 0..end.p.len() {
        let lp = Supernumber::scalar(alg, i.clone() * end.lambda_p[k].clone() * end.p[k].clone());
        let lp0 =
            Supernumber::scalar(alg, i.clone() * start.lambda_p[k].clone() * start.p[k].clone());
        let cc = &end.cbar_p[k] * &end.c_p[k];
        let cc0 = &start.cbar_p[k] * &start.c_p[k];
        st = &(&(&(&st + &lp) - &lp0) - &cc) + &cc0;
        f[0] = &f[0] - &lp;
        f[1] = &f[1] + &cc;
        f[2] = &f[2] + &lp0;
        f[3] = &f[3] - &cc0;
    }
    let mut out = vec![st];
    out.extend(f);
    out
}

/// Product of the surface-term exponential with the Fourier factors. All
/// exponents are even, so the product is `exp` of their sum; for exact
/// rings this is how it is evaluated.
pub fn surface_term_cancellation(
    end: &EndpointData<Qi>,
    start: &EndpointData<Qi>,
    alg: &Arc<GrassmannAlgebra>,
) -> Result<Supernumber<Qi>, GrassmannError> {
    let exps = surface_exponents(end, start, alg);
    let mut sum = Supernumber::zero(alg);
    for e in &exps {
        sum = sum.try_add(e)?;
    }
    sum.exp()
}

/// Same product, with each exponential evaluated separately in floating
/// point and multiplied in order.
pub fn surface_term_product_numeric(
    end: &EndpointData<C64>,
    start: &EndpointData<C64>,
    alg: &Arc<GrassmannAlgebra>,
) -> Result<Supernumber<C64>, GrassmannError> {
    let mut acc = Supernumber::one(alg);
    for e in surface_exponents(end, start, alg) {
        acc = acc.try_mul(&e.exp()?)?;
    }
    Ok(acc)
}

/// Configurational Lagrangian `½q̇² − V(q)` evaluated on the configuration
/// superfield `Q = q + θc^q + θ̄c̄_p + iθ̄θλ_p` of a one-dimensional path.
pub fn configurational_super_lagrangian(v: &Poly<Qi>, path: &SuperPath) -> PathValue {
    let q = path.superfield(0);
    let qd = time_derivative(&q);
    let kin = (&qd * &qd).scale(&cpoly(qi(1, 2)));
    &kin - &eval_poly_super(v, std::slice::from_ref(&q))
}

#[derive(Debug, Clone)]
pub struct DequantizedWeight {
    /// Density of the classical weight, `i∫dθdθ̄ (½Q̇² − V(Q))`.
    pub density: PathValue,
    /// The superfield with `θ, θ̄ → 0`.
    pub shrunk: PathValue,
}

/// Applies `∫dτ → iħ∫dτdθdθ̄` and `q → Q` to the quantum weight
/// `(i/ħ)∫dτ(½q̇² − V)`. The returned density is the exponent divided by
/// `i`, so it is directly comparable with a classical action density.
pub fn dequantize_action(
    v: &Poly<Qi>,
    path: &SuperPath,
    hbar: &Qi,
) -> Result<DequantizedWeight, ExtendedError> {
    if path.n() != 1 {
        return Err(ExtendedError::DimensionMismatch {
            expected: 1,
            found: path.n(),
        });
    }
    let l = configurational_super_lagrangian(v, path);
    let ih = cpoly(qi_i() * hbar.clone());
    let inv_h = cpoly(Ring::try_inverse(hbar).ok_or(GrassmannError::NoInverse)?);
    // (1/ħ) · iħ ∫dθdθ̄ L(Q)
    let density = l
        .berezin_integrate(&[THETA, THETA_BAR])?
        .scale(&ih)
        .scale(&inv_h);
    let shrunk = path.superfield(0).drop_generators(&[THETA, THETA_BAR])?;
    Ok(DequantizedWeight { density, shrunk })
}

/// Phase-space path matched to a configurational one: `p = q̇`,
/// `c^p = ċ^q`; other components are taken from `path`.
pub fn on_kinematic_shell(path: &SuperPath) -> Result<SuperPath, ExtendedError> {
    let mut phi = path.phi.clone();
    let mut c = path.c.clone();
    phi[1] = phi[0].derivative(0);
    c[1] = time_derivative(&c[0]);
    SuperPath::new(
        path.space.clone(),
        phi,
        path.lambda.clone(),
        c,
        path.cbar.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ho() -> Observable {
        Observable::harmonic_oscillator()
    }

    #[test]
    fn superfield_components_for_one_degree() {
        let s = SuperfieldSpace::new(1);
        let e = s.extended();
        let (th, tb) = (s.theta(), s.thetabar());
        let i = ipoly();
        let q = &(&(&e.phi(0) + &(&th * &e.c(0))) + &(&tb * &e.cbar(1)))
            + &(&(&tb * &th) * &e.lambda(1)).scale(&i);
        assert_eq!(s.superfield(0), q);
        let p = &(&(&e.phi(1) + &(&th * &e.c(1))) - &(&tb * &e.cbar(0)))
            - &(&(&tb * &th) * &e.lambda(0)).scale(&i);
        assert_eq!(s.superfield(1), p);
    }

    #[test]
    fn oscillator_multiplet() {
        let s = SuperfieldSpace::new(1);
        let e = s.extended();
        let m = multiplet(&s.compose(&ho()).unwrap()).unwrap();
        assert_eq!(m.base, e.lift(&ho()).unwrap());
        assert_eq!(m.n, e.charge(Charge::N, Some(&ho())).unwrap());
        assert_eq!(m.nbar, e.charge(Charge::NBar, Some(&ho())).unwrap());
        assert_eq!(m.top, e.superhamiltonian(&ho()).unwrap());
    }

    #[test]
    fn berezin_projection_gives_superhamiltonian() {
        let s = SuperfieldSpace::new(1);
        let hphi = s.compose(&Observable::quartic_oscillator()).unwrap();
        let got = hphi
            .berezin_integrate(&[THETA, THETA_BAR])
            .unwrap()
            .scale(&ipoly());
        let plain = ExtendedSpace::new(1);
        let expect = plain
            .superhamiltonian(&Observable::quartic_oscillator())
            .unwrap()
            .embed(s.algebra())
            .unwrap();
        assert_eq!(got, expect);
    }

    #[test]
    fn constant_composes_to_itself() {
        let s = SuperfieldSpace::new(1);
        let g = Observable::new(1, Poly::constant(qi(7, 3))).unwrap();
        assert_eq!(s.compose(&g).unwrap(), s.extended().constant(qi(7, 3)));
    }

    #[test]
    fn susy_conjugation_of_coordinate_is_superfield() {
        let s = SuperfieldSpace::new(1);
        for a in 0..2 {
            let g = Observable::coordinate(1, a);
            let got = s.susy_conjugation(&g, &s.theta(), &s.thetabar()).unwrap();
            assert_eq!(got, s.superfield(a));
        }
        let zero = ExtendedFunction::zero(s.algebra());
        let g = Observable::quartic_oscillator();
        assert_eq!(
            s.susy_conjugation(&g, &zero, &zero).unwrap(),
            s.extended().lift(&g).unwrap()
        );
        let q2 = crate::phase_flow::observable_1d(&[(2, 0, 1, 1)]);
        assert_eq!(
            s.susy_conjugation(&q2, &s.theta(), &s.thetabar()).unwrap(),
            s.compose(&q2).unwrap()
        );
    }

    #[test]
    fn superfield_bracket_is_grassmann_delta() {
        let s = SuperfieldSpace::doubled(1);
        for a in 0..2 {
            for b in 0..2 {
                let (lhs, rhs) = s.superfield_bracket(a, b).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn lagrangian_identity_random_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for h in [ho(), Observable::quartic_oscillator()] {
            let path = SuperPath::random(1, 3, &mut rng);
            let r = lagrangian_identity_check(&h, &path).unwrap();
            assert!(r.passed(), "{:?}", r.residual);
        }
    }

    #[test]
    fn lagrangian_identity_constant_path() {
        let path =
            SuperPath::bosonic(1, vec![Poly::constant(qi(1, 2)), Poly::constant(qi(3, 1))])
                .unwrap();
        let h = Observable::zero(1);
        assert!(lagrangian_identity_check(&h, &path).unwrap().passed());
        assert!(super_lagrangian(&h, &path).berezin_integrate(&[THETA, THETA_BAR]).unwrap().is_zero());
    }

    #[test]
    fn action_multiplet_on_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let path = SuperPath::random(1, 2, &mut rng);
        let (exp, bos) =
            action_multiplet_expansion(&ho(), &path, &qi_int(0), &qi_int(1)).unwrap();
        assert!(exp.consistent(&bos));
    }

    #[test]
    fn bosonic_path_has_no_odd_components() {
        let path = SuperPath::bosonic(1, vec![Poly::var(0), Poly::constant(qi_int(1))]).unwrap();
        let (exp, bos) =
            action_multiplet_expansion(&ho(), &path, &qi_int(0), &qi_int(2)).unwrap();
        assert!(exp.theta_component.is_zero());
        assert!(exp.thetabar_component.is_zero());
        assert!(exp.consistent(&bos));
    }

    fn endpoints(
        alg: &Arc<GrassmannAlgebra>,
        p: Qi,
        l: Qi,
        c: &str,
        cb: &str,
    ) -> EndpointData<Qi> {
        EndpointData {
            p: vec![p],
            lambda_p: vec![l],
            c_p: vec![Supernumber::generator(alg, c).unwrap()],
            cbar_p: vec![Supernumber::generator(alg, cb).unwrap()],
        }
    }

    #[test]
    fn surface_terms_cancel() {
        let alg = GrassmannAlgebra::new(["c", "cb", "c0", "cb0"]).unwrap();
        let end = endpoints(&alg, qi(3, 2), qi(-2, 5), "c", "cb");
        let start = endpoints(&alg, qi(1, 7), qi(4, 1), "c0", "cb0");
        let r = surface_term_cancellation(&end, &start, &alg).unwrap();
        assert_eq!(r, Supernumber::one(&alg));
        let ghosts_only = endpoints(&alg, qi_int(0), qi_int(0), "c", "cb");
        let r = surface_term_cancellation(&ghosts_only, &start, &alg).unwrap();
        assert_eq!(r, Supernumber::one(&alg));
    }

    #[test]
    fn numeric_surface_product_is_one() {
        let alg = GrassmannAlgebra::new(["c", "cb", "c0", "cb0"]).unwrap();
        let conv = |e: EndpointData<Qi>| EndpointData {
            p: e.p.iter().map(C64::from_qi).collect(),
            lambda_p: e.lambda_p.iter().map(C64::from_qi).collect(),
            c_p: e.c_p.iter().map(|x| x.map_coeffs(C64::from_qi)).collect(),
            cbar_p: e.cbar_p.iter().map(|x| x.map_coeffs(C64::from_qi)).collect(),
        };
        let end = conv(endpoints(&alg, qi(3, 2), qi(-2, 5), "c", "cb"));
        let start = conv(endpoints(&alg, qi(1, 7), qi(4, 1), "c0", "cb0"));
        let r = surface_term_product_numeric(&end, &start, &alg).unwrap();
        let diff = &r - &Supernumber::one(&alg);
        assert!(diff.max_abs_coeff() < 1e-12);
    }

    #[test]
    fn dequantization_is_hbar_free_and_shrinks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let path = SuperPath::random(1, 2, &mut rng);
        let v = Poly::var(0) * Poly::var(0);
        let a = dequantize_action(&v, &path, &qi(1, 3)).unwrap();
        let b = dequantize_action(&v, &path, &qi(7, 2)).unwrap();
        assert_eq!(a.density, b.density);
        assert_eq!(a.shrunk, path.scalar(path.phi()[0].clone()));
    }

    #[test]
    fn dequantized_weight_matches_cpi_modulo_total_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let path = on_kinematic_shell(&SuperPath::random(1, 3, &mut rng)).unwrap();
        let v: Poly<Qi> = (Poly::var(0) * Poly::var(0)).scale(&qi(1, 2));
        let h = Observable::kinetic_plus_potential(&v).unwrap();
        let w = dequantize_action(&v, &path, &qi_int(1)).unwrap();
        let l = cpi_lagrangian(&h, &path).unwrap();
        let qd = path.phi()[0].derivative(0);
        let b = &path.scalar(&path.lambda()[1] * &qd)
            + &(&path.cbar()[1] * &time_derivative(&path.c()[0])).scale(&ipoly());
        let resid = &(&w.density - &l) + &time_derivative(&b);
        assert!(resid.is_zero(), "{:?}", resid);
    }
}
