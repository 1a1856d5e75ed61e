//! Vierbeins on supertime, the reparametrization-invariant action built
//! from them, and the families of vierbeins reproducing the classical and
//! quantum path-integral weights.
//!
//! The vierbein is the matrix `V[A][M] = E^M_A` laid out as
//!
//! ```text
//! a  α  β
//! γ  b  c
//! δ  d  e
//! ```
//!
//! so `D_τ = a∂_τ + α∂_θ + β∂_θ̄` and `E = sdet(E^A_M) = sdet(V)⁻¹`.

use std::sync::Arc;

use thiserror::Error;

use crate::grassmann::{eval_poly_super, GrassmannAlgebra, GrassmannError, Supernumber};
use crate::poly::Poly;
use crate::ring::{qi_i, qi_int, Qi, Ring};
use crate::superfield::{integrate_path, time_derivative, PathValue, SuperPath};
use crate::supergeometry::{
    metric_from_vierbein, supertime_algebra, SuperMatrix, SuperMatrixError, THETA, THETA_BAR,
};

#[derive(Debug, Error, PartialEq)]
pub enum VierbeinError {
    #[error("both e_B and d_B vanish: no solution branch")]
    NoSolutionBranch,
    #[error("ε = 0 leaves the superdeterminant without an inverse")]
    RegulatorRequired,
    #[error("ħ must be nonzero")]
    ZeroHbar,
    #[error("constraint check failed: {0}")]
    ConstraintViolation(String),
    #[error("configuration paths have one degree of freedom")]
    Dimension,
    #[error(transparent)]
    SuperMatrix(#[from] SuperMatrixError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

type Sn = Supernumber<Qi>;

fn alg() -> Arc<GrassmannAlgebra> {
    supertime_algebra()
}

/// `θ̄θ` in the supertime algebra.
pub fn thetabar_theta(alg: &Arc<GrassmannAlgebra>) -> Sn {
    Sn::monomial(alg, &[THETA_BAR, THETA], <Qi as Ring>::one()).expect("supertime generators")
}

/// Even entry `x_B + x_S θ̄θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenEntry {
    pub body: Qi,
    pub soul: Qi,
}

impl EvenEntry {
    pub fn new(body: Qi, soul: Qi) -> Self {
        EvenEntry { body, soul }
    }

    pub fn constant(body: Qi) -> Self {
        EvenEntry {
            body,
            soul: <Qi as Ring>::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(<Qi as Ring>::zero())
    }

    pub fn to_super(&self, alg: &Arc<GrassmannAlgebra>) -> Sn {
        &Sn::scalar(alg, self.body.clone()) + &thetabar_theta(alg).scale(&self.soul)
    }

    pub fn from_super(x: &Sn) -> Result<Self, GrassmannError> {
        let body = x.body();
        let soul = x.coefficient_of(&[THETA_BAR, THETA])?;
        let rebuilt = EvenEntry::new(body, soul);
        if rebuilt.to_super(x.algebra()) != *x {
            return Err(GrassmannError::AlgebraMismatch);
        }
        Ok(rebuilt)
    }
}

/// Odd entry `x_θ θ + x_θ̄ θ̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct OddEntry {
    pub theta: Qi,
    pub thetabar: Qi,
}

impl OddEntry {
    pub fn new(theta: Qi, thetabar: Qi) -> Self {
        OddEntry { theta, thetabar }
    }

    pub fn zero() -> Self {
        OddEntry::new(<Qi as Ring>::zero(), <Qi as Ring>::zero())
    }

    pub fn to_super(&self, alg: &Arc<GrassmannAlgebra>) -> Sn {
        let th = Sn::generator(alg, THETA).expect("θ");
        let tb = Sn::generator(alg, THETA_BAR).expect("θ̄");
        &th.scale(&self.theta) + &tb.scale(&self.thetabar)
    }
}

/// Sign choice `±`, tied to `a = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> Qi {
        match self {
            Sign::Plus => qi_int(1),
            Sign::Minus => qi_int(-1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VierbeinParams {
    pub a: EvenEntry,
    pub b: EvenEntry,
    pub c: EvenEntry,
    pub d: EvenEntry,
    pub e: EvenEntry,
    pub alpha: OddEntry,
    pub beta: OddEntry,
    pub gamma: OddEntry,
    pub delta: OddEntry,
}

impl VierbeinParams {
    pub fn identity() -> Self {
        VierbeinParams {
            a: EvenEntry::constant(qi_int(1)),
            b: EvenEntry::constant(qi_int(1)),
            c: EvenEntry::zero(),
            d: EvenEntry::zero(),
            e: EvenEntry::constant(qi_int(1)),
            alpha: OddEntry::zero(),
            beta: OddEntry::zero(),
            gamma: OddEntry::zero(),
            delta: OddEntry::zero(),
        }
    }

    /// `a = ±1`, `α = β = 0`, lower rows from a solved block.
    pub fn from_block(sign: Sign, block: &Block, gamma: OddEntry, delta: OddEntry) -> Self {
        VierbeinParams {
            a: EvenEntry::constant(sign.value()),
            b: block.b.clone(),
            c: block.c.clone(),
            d: block.d.clone(),
            e: block.e.clone(),
            alpha: OddEntry::zero(),
            beta: OddEntry::zero(),
            gamma,
            delta,
        }
    }

    pub fn matrix(&self) -> Result<SuperMatrix<Qi>, VierbeinError> {
        let al = alg();
        let ev = |x: &EvenEntry| x.to_super(&al);
        let od = |x: &OddEntry| x.to_super(&al);
        Ok(SuperMatrix::new(
            1,
            2,
            vec![
                vec![ev(&self.a), od(&self.alpha), od(&self.beta)],
                vec![od(&self.gamma), ev(&self.b), ev(&self.c)],
                vec![od(&self.delta), ev(&self.d), ev(&self.e)],
            ],
        )?)
    }

    /// `E = sdet(E^A_M) = sdet(V)⁻¹`.
    pub fn density(&self) -> Result<Sn, VierbeinError> {
        Ok(self.matrix()?.superdeterminant()?.invert()?)
    }
}

/// Lower-right 2×2 block `(b c; d e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub b: EvenEntry,
    pub c: EvenEntry,
    pub d: EvenEntry,
    pub e: EvenEntry,
}

impl Block {
    pub fn determinant(&self) -> Sn {
        let al = alg();
        let (b, c, d, e) = (
            self.b.to_super(&al),
            self.c.to_super(&al),
            self.d.to_super(&al),
            self.e.to_super(&al),
        );
        &(&b * &e) - &(&c * &d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `e_B ≠ 0`: solve for `b`.
    One,
    /// `e_B = 0`, `d_B ≠ 0`: solve for `c`.
    Two,
}

fn branch(block: &Block) -> Result<Branch, VierbeinError> {
    if !block.e.body.is_zero() {
        Ok(Branch::One)
    } else if !block.d.body.is_zero() {
        Ok(Branch::Two)
    } else {
        Err(VierbeinError::NoSolutionBranch)
    }
}

/// Which superdeterminant the quantum family is built to reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantumTarget {
    /// The printed solution formulas, whose block determinant is
    /// `±(ε − (1−ε) iθ̄θ/ħ)`: classical weight at `ε = 1`, quantum at `ε → 0`.
    Interpolating,
    /// `E = ε − iθ̄θ/ħ` with inverse `1/ε + iθ̄θ/(ε²ħ)` for every `ε`.
    Regularized,
}

/// Solves `be − cd = s·(ε − w iθ̄θ/ħ)` for the free entry; `s = ±1`.
/// `(ε, w) = (1, 0)` is the classical constraint.
fn solve_block(block: &Block, sign: Sign, eps: &Qi, w: &Qi) -> Result<(Branch, Block), VierbeinError> {
    let s = sign.value();
    let which = branch(block)?;
    let Block { b, c, d, e } = block;
    let mut out = block.clone();
    // soul of the target, s·(−w i/ħ) with ħ folded into w by the caller
    let target_soul = -(s.clone() * w.clone() * qi_i());
    match which {
        Branch::One => {
            let inv = Ring::try_inverse(&e.body).ok_or(VierbeinError::NoSolutionBranch)?;
            let bb = (s.clone() * eps.clone() + c.body.clone() * d.body.clone()) * inv.clone();
            let num = -(s.clone() * eps.clone() * e.soul.clone())
                - c.body.clone() * d.body.clone() * e.soul.clone()
                + c.body.clone() * d.soul.clone() * e.body.clone()
                + c.soul.clone() * d.body.clone() * e.body.clone()
                + target_soul * e.body.clone();
            out.b = EvenEntry::new(bb, num * inv.clone() * inv);
        }
        Branch::Two => {
            let inv = Ring::try_inverse(&d.body).ok_or(VierbeinError::NoSolutionBranch)?;
            let cb = -(s.clone() * eps.clone()) * inv.clone();
            let num = s.clone() * eps.clone() * d.soul.clone()
                + b.body.clone() * d.body.clone() * e.soul.clone()
                - target_soul * d.body.clone();
            out.c = EvenEntry::new(cb, num * inv.clone() * inv);
        }
    }
    Ok((which, out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSolution {
    pub branch: Branch,
    pub block: Block,
    pub sign: Sign,
}

impl ClassicalSolution {
    pub fn vierbein(&self, gamma: OddEntry, delta: OddEntry) -> VierbeinParams {
        VierbeinParams::from_block(self.sign, &self.block, gamma, delta)
    }
}

/// `be − cd = ±1`: fills `b` (branch one) or `c` (branch two) and checks
/// the determinant as a full supernumber identity.
pub fn solve_classical(block: &Block, sign: Sign) -> Result<ClassicalSolution, VierbeinError> {
    let (branch, out) = solve_block(block, sign, &qi_int(1), &qi_int(0))?;
    let det = out.determinant();
    if det != Sn::scalar(det.algebra(), sign.value()) {
        return Err(VierbeinError::ConstraintViolation(format!("be − cd = {det:?}")));
    }
    Ok(ClassicalSolution {
        branch,
        block: out,
        sign,
    })
}

/// `E⁻¹ = (±1 + a_Sθ̄θ − pθ̄θ)(q + rθ̄θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetDecomposition {
    pub p: Qi,
    pub q: Qi,
    pub r: Qi,
    pub inverse_density: Sn,
}

/// Computes `pθ̄θ = (α β) M⁻¹ (γ δ)ᵀ` and `q + rθ̄θ = det⁻¹ M` for the block
/// `M`, assembles `E⁻¹` from them and checks it against the
/// superdeterminant computed from the full matrix.
pub fn decompose(v: &VierbeinParams) -> Result<DetDecomposition, VierbeinError> {
    let al = alg();
    let m = v.matrix()?;
    let ent = |i: usize, j: usize| m.entry(i, j).clone();
    let det = &(&ent(1, 1) * &ent(2, 2)) - &(&ent(1, 2) * &ent(2, 1));
    let det_inv = det
        .invert()
        .map_err(|_| SuperMatrixError::SingularOddBlock)?;
    // M⁻¹ = det⁻¹ (e −c; −d b)
    let minv = [
        [ent(2, 2), -ent(1, 2)],
        [-ent(2, 1), ent(1, 1)],
    ];
    let row = [ent(0, 1), ent(0, 2)];
    let col = [ent(1, 0), ent(2, 0)];
    let mut sandwich = Sn::zero(&al);
    for i in 0..2 {
        for j in 0..2 {
            sandwich = &sandwich + &(&(&row[i] * &minv[i][j]) * &col[j]);
        }
    }
    let sandwich = &sandwich * &det_inv;
    let p = sandwich.coefficient_of(&[THETA_BAR, THETA])?;
    if sandwich != thetabar_theta(&al).scale(&p) {
        return Err(VierbeinError::ConstraintViolation(
            "odd sandwich is not proportional to θ̄θ".into(),
        ));
    }
    let qr = EvenEntry::from_super(&det_inv)?;
    let a_part = &v.a.to_super(&al) - &thetabar_theta(&al).scale(&p);
    let inverse_density = &a_part * &det_inv;
    if inverse_density != m.superdeterminant()? {
        return Err(VierbeinError::ConstraintViolation(
            "p, q, r decomposition disagrees with the superdeterminant".into(),
        ));
    }
    Ok(DetDecomposition {
        p,
        q: qr.body,
        r: qr.soul,
        inverse_density,
    })
}

/// `ε − w iθ̄θ/ħ` with `w = 1 − ε` or `1`.
pub fn target_density(eps: &Qi, hbar: &Qi, target: QuantumTarget) -> Result<Sn, VierbeinError> {
    let al = alg();
    let w = soul_weight(eps, target);
    let inv_h = Ring::try_inverse(hbar).ok_or(VierbeinError::ZeroHbar)?;
    Ok(&Sn::scalar(&al, eps.clone()) - &thetabar_theta(&al).scale(&(w * qi_i() * inv_h)))
}

fn soul_weight(eps: &Qi, target: QuantumTarget) -> Qi {
    match target {
        QuantumTarget::Interpolating => qi_int(1) - eps.clone(),
        QuantumTarget::Regularized => qi_int(1),
    }
}

/// `1/ε + iθ̄θ/(ε²ħ)`.
pub fn regularized_inverse(eps: &Qi, hbar: &Qi) -> Result<Sn, VierbeinError> {
    let al = alg();
    let ie = Ring::try_inverse(eps).ok_or(VierbeinError::RegulatorRequired)?;
    let ih = Ring::try_inverse(hbar).ok_or(VierbeinError::ZeroHbar)?;
    Ok(&Sn::scalar(&al, ie.clone()) + &thetabar_theta(&al).scale(&(qi_i() * ie.clone() * ie * ih)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSolution {
    pub branch: Branch,
    pub block: Block,
    pub sign: Sign,
    pub target: QuantumTarget,
    pub decomposition: DetDecomposition,
    /// Whether `E⁻¹` equals `1/ε + iθ̄θ/(ε²ħ)`.
    pub matches_regularized_inverse: bool,
}

impl QuantumSolution {
    pub fn vierbein(&self, gamma: OddEntry, delta: OddEntry) -> VierbeinParams {
        VierbeinParams::from_block(self.sign, &self.block, gamma, delta)
    }
}

/// Quantum family with `a = ±1`, `a_S = α = β = 0`. The assembled vierbein
/// is checked to have `E` equal to the chosen target density.
pub fn solve_quantum(
    block: &Block,
    sign: Sign,
    eps: &Qi,
    hbar: &Qi,
    target: QuantumTarget,
) -> Result<QuantumSolution, VierbeinError> {
    if eps.is_zero() {
        return Err(VierbeinError::RegulatorRequired);
    }
    let ih = Ring::try_inverse(hbar).ok_or(VierbeinError::ZeroHbar)?;
    let w = soul_weight(eps, target) * ih;
    let (branch, out) = solve_block(block, sign, eps, &w)?;
    let v = VierbeinParams::from_block(sign, &out, OddEntry::zero(), OddEntry::zero());
    let decomposition = decompose(&v)?;
    let expected = target_density(eps, hbar, target)?.invert()?;
    if decomposition.inverse_density != expected {
        return Err(VierbeinError::ConstraintViolation(format!(
            "E⁻¹ = {:?}",
            decomposition.inverse_density
        )));
    }
    let matches_regularized_inverse =
        decomposition.inverse_density == regularized_inverse(eps, hbar)?;
    Ok(QuantumSolution {
        branch,
        block: out,
        sign,
        target,
        decomposition,
        matches_regularized_inverse,
    })
}

/// Vierbein entries lifted into the path algebra as constants in `t`.
fn lift(x: &Sn, path: &SuperPath) -> Result<PathValue, VierbeinError> {
    Ok(x.embed(path.algebra())?.map_coeffs(|c| Poly::constant(c.clone())))
}

/// `D_τQ = a∂_τQ + α∂_θQ + β∂_θ̄Q`.
pub fn covariant_derivative(v: &VierbeinParams, q: &PathValue, path: &SuperPath) -> Result<PathValue, VierbeinError> {
    let al = alg();
    let a = lift(&v.a.to_super(&al), path)?;
    let alpha = lift(&v.alpha.to_super(&al), path)?;
    let beta = lift(&v.beta.to_super(&al), path)?;
    Ok(&(&(&a * &time_derivative(q)) + &(&alpha * &q.left_derivative(THETA)?))
        + &(&beta * &q.left_derivative(THETA_BAR)?))
}

fn config_superfield(path: &SuperPath) -> Result<PathValue, VierbeinError> {
    if path.n() != 1 {
        return Err(VierbeinError::Dimension);
    }
    Ok(path.superfield(0))
}

/// `D_τQ D_τQ − ∂_τQ ∂_τQ`.
pub fn check_kinetic_constraint(v: &VierbeinParams, path: &SuperPath) -> Result<PathValue, VierbeinError> {
    let q = config_superfield(path)?;
    let dq = covariant_derivative(v, &q, path)?;
    let qd = time_derivative(&q);
    Ok(&(&dq * &dq) - &(&qd * &qd))
}

/// `S = i∫dτdθdθ̄ E[½D_τQ D_τQ − V(Q)]` over `[t0, t1]`, from an explicit
/// density `E` (a supertime function constant in `τ`).
pub fn action_with_density(
    v: &VierbeinParams,
    density: &Sn,
    potential: &Poly<Qi>,
    path: &SuperPath,
    t0: &Qi,
    t1: &Qi,
) -> Result<Sn, VierbeinError> {
    let q = config_superfield(path)?;
    let dq = covariant_derivative(v, &q, path)?;
    let half = Poly::constant(crate::ring::qi(1, 2));
    let lag = &(&dq * &dq).scale(&half) - &eval_poly_super(potential, std::slice::from_ref(&q));
    let weighted = &lift(density, path)? * &lag;
    let top = weighted
        .berezin_integrate(&[THETA, THETA_BAR])?
        .scale(&Poly::constant(qi_i()));
    Ok(integrate_path(&top, t0, t1))
}

/// The action with `E` computed from the vierbein itself.
pub fn action_from_vierbein(
    v: &VierbeinParams,
    potential: &Poly<Qi>,
    path: &SuperPath,
    t0: &Qi,
    t1: &Qi,
) -> Result<Sn, VierbeinError> {
    action_with_density(v, &v.density()?, potential, path, t0, t1)
}

/// `(1/ħ)∫dτ(½a_B² q̇² − V(q))` on the bosonic part of the path.
pub fn quantum_weight(
    a_body: &Qi,
    potential: &Poly<Qi>,
    path: &SuperPath,
    hbar: &Qi,
    t0: &Qi,
    t1: &Qi,
) -> Result<Qi, VierbeinError> {
    if path.n() != 1 {
        return Err(VierbeinError::Dimension);
    }
    let q = &path.phi()[0];
    let qd = q.derivative(0);
    let kin = (&qd * &qd).scale(&(crate::ring::qi(1, 2) * a_body.clone() * a_body.clone()));
    let v = potential.eval_with(std::slice::from_ref(q), |c| Poly::constant(c.clone()));
    let anti = (kin - v).antiderivative(0);
    let val = anti.eval::<Qi>(std::slice::from_ref(t1)) - anti.eval::<Qi>(std::slice::from_ref(t0));
    let ih = Ring::try_inverse(hbar).ok_or(VierbeinError::ZeroHbar)?;
    Ok(val * ih)
}

/// `π₁ … π₅` from the γ, δ components and the block bodies.
pub fn pi_parameters(v: &VierbeinParams) -> [Qi; 5] {
    let (g, d) = (&v.gamma, &v.delta);
    let (bb, cb, db, eb) = (&v.b.body, &v.c.body, &v.d.body, &v.e.body);
    [
        g.theta.clone() * eb.clone() - d.theta.clone() * cb.clone(),
        g.thetabar.clone() * eb.clone() - d.thetabar.clone() * cb.clone(),
        d.theta.clone() * bb.clone() - g.theta.clone() * db.clone(),
        d.thetabar.clone() * bb.clone() - g.thetabar.clone() * db.clone(),
        g.thetabar.clone() * d.theta.clone() - g.theta.clone() * d.thetabar.clone(),
    ]
}

/// The five-parameter pattern of the classical metric, upper sign for `a = +1`.
pub fn metric_pattern(sign: Sign, pi: &[Qi; 5]) -> Result<SuperMatrix<Qi>, VierbeinError> {
    let al = alg();
    let s = sign.value();
    let th = Sn::generator(&al, THETA)?;
    let tb = Sn::generator(&al, THETA_BAR)?;
    let tbt = thetabar_theta(&al);
    let lin = |x: &Qi, y: &Qi| (&th.scale(x) + &tb.scale(y)).scale(&s);
    let g1 = lin(&pi[0], &pi[1]);
    let g2 = lin(&pi[2], &pi[3]);
    let odd = (&Sn::one(&al) + &tbt.scale(&pi[4])).scale(&s);
    let zero = Sn::zero(&al);
    Ok(SuperMatrix::new(
        1,
        2,
        vec![
            vec![Sn::one(&al), -g1.clone(), -g2.clone()],
            vec![g1, zero.clone(), -odd.clone()],
            vec![g2, odd, zero],
        ],
    )?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricFamilyReport {
    pub metric: SuperMatrix<Qi>,
    pub pattern: SuperMatrix<Qi>,
    pub pi: [Qi; 5],
    /// Entries `(M, N)` where the computed metric differs from the pattern.
    pub mismatches: Vec<(usize, usize)>,
}

impl MetricFamilyReport {
    pub fn matches(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Builds the classical vierbein with soul-free block entries, solves
/// `be − cd = ±1`, and compares its metric with the five-parameter pattern.
pub fn classical_metric_family(
    sign: Sign,
    gamma: OddEntry,
    delta: OddEntry,
    block: &Block,
) -> Result<MetricFamilyReport, VierbeinError> {
    let sol = solve_classical(block, sign)?;
    let v = sol.vierbein(gamma, delta);
    let metric = metric_from_vierbein(&v.matrix()?)?;
    let pi = pi_parameters(&v);
    let pattern = metric_pattern(sign, &pi)?;
    let mut mismatches = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if metric.entry(i, j) != pattern.entry(i, j) {
                mismatches.push((i, j));
            }
        }
    }
    Ok(MetricFamilyReport {
        metric,
        pattern,
        pi,
        mismatches,
    })
}

/// The `ε → 0` member of the quantum family, `be − cd = ∓iθ̄θ/ħ`. Its
/// block has zero body, so the metric cannot be formed.
pub fn quantum_limit_metric(block: &Block, sign: Sign, hbar: &Qi) -> Result<SuperMatrix<Qi>, VierbeinError> {
    let ih = Ring::try_inverse(hbar).ok_or(VierbeinError::ZeroHbar)?;
    let (_, out) = solve_block(block, sign, &<Qi as Ring>::zero(), &ih)?;
    let v = VierbeinParams::from_block(sign, &out, OddEntry::zero(), OddEntry::zero());
    Ok(metric_from_vierbein(&v.matrix()?)?)
}

/// One row of an ε sweep: relative distance of the action from the
/// classical and quantum weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub classical_residual: f64,
    pub quantum_residual: f64,
}

/// Evaluates the quantum-family action for each ε and compares it with
/// the classical action (`E = 1`) and with `(1/ħ)∫(½q̇² − V)`.
pub fn epsilon_sweep(
    block: &Block,
    sign: Sign,
    hbar: &Qi,
    target: QuantumTarget,
    eps: &[Qi],
    potential: &Poly<Qi>,
    path: &SuperPath,
    t0: &Qi,
    t1: &Qi,
) -> Result<Vec<SweepRow>, VierbeinError> {
    let classical = solve_classical(block, sign)?;
    let cv = classical.vierbein(OddEntry::zero(), OddEntry::zero());
    let s_cl = action_from_vierbein(&cv, potential, path, t0, t1)?;
    let q = quantum_weight(&sign.value(), potential, path, hbar, t0, t1)?;
    let s_q = Sn::scalar(s_cl.algebra(), q);
    let scale = |x: &Sn| x.max_abs_coeff().max(f64::MIN_POSITIVE);
    eps.iter()
        .map(|e| {
            let sol = solve_quantum(block, sign, e, hbar, target)?;
            let s = action_from_vierbein(&sol.vierbein(OddEntry::zero(), OddEntry::zero()), potential, path, t0, t1)?;
            Ok(SweepRow {
                eps: crate::ring::rat_to_f64(&e.re),
                classical_residual: (&s - &s_cl).max_abs_coeff() / scale(&s_cl),
                quantum_residual: (&s - &s_q).max_abs_coeff() / scale(&s_q),
            })
        })
        .collect()
}

/// Rows `eps,classical_residual,quantum_residual` with a header line.
pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "eps,classical_residual,quantum_residual")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.eps, r.classical_residual, r.quantum_residual)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{qi, qi_from_f64};
    use crate::superfield::dequantize_action;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ent(b: i64) -> EvenEntry {
        EvenEntry::constant(qi_int(b))
    }

    fn block(b: i64, c: i64, d: i64, e: i64) -> Block {
        Block {
            b: ent(b),
            c: ent(c),
            d: ent(d),
            e: ent(e),
        }
    }

    fn path(seed: u64) -> SuperPath {
        SuperPath::random(1, 2, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn half_q2() -> Poly<Qi> {
        (Poly::var(0) * Poly::var(0)).scale(&qi(1, 2))
    }

    #[test]
    fn classical_examples() {
        let s = solve_classical(&block(0, 1, 1, 1), Sign::Plus).unwrap();
        assert_eq!(s.block.b, EvenEntry::constant(qi_int(2)));
        assert_eq!(s.branch, Branch::One);
        let s = solve_classical(&block(0, 0, 0, 2), Sign::Plus).unwrap();
        assert_eq!(s.block.b.body, qi(1, 2));
        let s = solve_classical(&block(3, 0, 2, 0), Sign::Minus).unwrap();
        assert_eq!(s.block.c.body, qi(1, 2));
        assert_eq!(s.branch, Branch::Two);
        assert_eq!(
            solve_classical(&block(1, 1, 0, 0), Sign::Plus),
            Err(VierbeinError::NoSolutionBranch)
        );
    }

    #[test]
    fn classical_solutions_have_unit_sdet() {
        let souls = Block {
            b: EvenEntry::zero(),
            c: EvenEntry::new(qi(2, 3), qi(-1, 2)),
            d: EvenEntry::new(qi(-1, 1), qi(5, 7)),
            e: EvenEntry::new(qi(3, 2), qi(1, 4)),
        };
        for sign in [Sign::Plus, Sign::Minus] {
            let s = solve_classical(&souls, sign).unwrap();
            let v = s.vierbein(OddEntry::new(qi(1, 3), qi(2, 1)), OddEntry::new(qi(-1, 1), qi(0, 1)));
            assert_eq!(v.density().unwrap(), Sn::one(&alg()));
        }
        let two = Block {
            b: EvenEntry::new(qi(2, 1), qi(1, 1)),
            c: EvenEntry::zero(),
            d: EvenEntry::new(qi(3, 1), qi(-2, 1)),
            e: EvenEntry::new(qi(0, 1), qi(4, 1)),
        };
        let s = solve_classical(&two, Sign::Minus).unwrap();
        assert_eq!(s.vierbein(OddEntry::zero(), OddEntry::zero()).density().unwrap(), Sn::one(&alg()));
    }

    #[test]
    fn quantum_reduces_to_classical_at_unit_epsilon() {
        let b = Block {
            b: EvenEntry::zero(),
            c: EvenEntry::new(qi(1, 1), qi(2, 1)),
            d: EvenEntry::new(qi(1, 1), qi(-1, 3)),
            e: EvenEntry::new(qi(1, 1), qi(1, 5)),
        };
        let c = solve_classical(&b, Sign::Plus).unwrap();
        let q = solve_quantum(&b, Sign::Plus, &qi_int(1), &qi_int(1), QuantumTarget::Interpolating).unwrap();
        assert_eq!(q.block, c.block);
        assert!(!q.matches_regularized_inverse);
    }

    #[test]
    fn quantum_half_epsilon() {
        let q = solve_quantum(&block(0, 1, 1, 1), Sign::Plus, &qi(1, 2), &qi_int(1), QuantumTarget::Interpolating)
            .unwrap();
        assert_eq!(q.block.b.body, qi(3, 2));
        assert_eq!(q.decomposition.p, qi_int(0));
        let r = solve_quantum(&block(0, 1, 1, 1), Sign::Plus, &qi(1, 2), &qi_int(1), QuantumTarget::Regularized)
            .unwrap();
        assert!(r.matches_regularized_inverse);
        let two = solve_quantum(&block(2, 0, 3, 0), Sign::Minus, &qi(1, 3), &qi(2, 1), QuantumTarget::Regularized)
            .unwrap();
        assert!(two.matches_regularized_inverse);
    }

    #[test]
    fn zero_regulator_is_rejected() {
        assert_eq!(
            solve_quantum(&block(0, 1, 1, 1), Sign::Plus, &qi_int(0), &qi_int(1), QuantumTarget::Regularized),
            Err(VierbeinError::RegulatorRequired)
        );
    }

    #[test]
    fn kinetic_constraint() {
        let p = path(1);
        let ident = VierbeinParams::identity();
        assert!(check_kinetic_constraint(&ident, &p).unwrap().is_zero());
        let mut minus = ident.clone();
        minus.a = ent(-1);
        assert!(check_kinetic_constraint(&minus, &p).unwrap().is_zero());
        let mut bad = ident.clone();
        bad.alpha = OddEntry::new(qi_int(1), qi_int(0));
        assert!(!check_kinetic_constraint(&bad, &p).unwrap().is_zero());
        let mut scaled = ident;
        scaled.a = ent(2);
        assert!(!check_kinetic_constraint(&scaled, &p).unwrap().is_zero());
    }

    #[test]
    fn decomposition_with_odd_entries() {
        let mut v = VierbeinParams::identity();
        v.alpha = OddEntry::new(qi(1, 2), qi(1, 1));
        v.beta = OddEntry::new(qi(-1, 1), qi(2, 1));
        v.gamma = OddEntry::new(qi(1, 1), qi(3, 1));
        v.delta = OddEntry::new(qi(0, 1), qi(1, 1));
        v.a = EvenEntry::new(qi_int(1), qi(1, 3));
        v.c = EvenEntry::new(qi(1, 2), qi(1, 1));
        let d = decompose(&v).unwrap();
        assert_eq!(d.inverse_density, v.matrix().unwrap().superdeterminant().unwrap());
    }

    #[test]
    fn classical_action_is_dequantized_weight() {
        let p = path(4);
        let v = half_q2();
        let sol = solve_classical(&block(0, 2, 1, 3), Sign::Plus).unwrap();
        let vb = sol.vierbein(OddEntry::new(qi(1, 1), qi(2, 1)), OddEntry::zero());
        let s = action_from_vierbein(&vb, &v, &p, &qi_int(0), &qi_int(1)).unwrap();
        let w = dequantize_action(&v, &p, &qi_int(1)).unwrap();
        let expect = integrate_path(&w.density, &qi_int(0), &qi_int(1));
        assert_eq!(s.embed(expect.algebra()).unwrap(), expect);
    }

    #[test]
    fn constant_path_free_action_vanishes() {
        let p = SuperPath::bosonic(1, vec![Poly::constant(qi(3, 2)), Poly::zero()]).unwrap();
        let s = action_from_vierbein(&VierbeinParams::identity(), &Poly::zero(), &p, &qi_int(0), &qi_int(1)).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn quantum_family_action_limit() {
        let p = path(7);
        let v = half_q2();
        let hbar = qi(1, 2);
        let eps = qi_from_f64(1e-6);
        let sol = solve_quantum(&block(0, 1, 1, 2), Sign::Plus, &eps, &hbar, QuantumTarget::Regularized).unwrap();
        let vb = sol.vierbein(OddEntry::zero(), OddEntry::zero());
        let s = action_from_vierbein(&vb, &v, &p, &qi_int(0), &qi_int(1)).unwrap();
        let q = quantum_weight(&qi_int(1), &v, &p, &hbar, &qi_int(0), &qi_int(1)).unwrap();
        let target = Sn::scalar(s.algebra(), q);
        let rel = (&s - &target).max_abs_coeff() / target.max_abs_coeff();
        assert!(rel < 1e-5, "{rel}");
        // ε-term is exactly ε times the classical weight
        let cl = action_from_vierbein(&VierbeinParams::identity(), &v, &p, &qi_int(0), &qi_int(1)).unwrap();
        assert_eq!(&s - &target, cl.scale(&eps));
    }

    #[test]
    fn metric_family_examples() {
        let r = classical_metric_family(Sign::Plus, OddEntry::zero(), OddEntry::zero(), &block(0, 0, 0, 1)).unwrap();
        assert!(r.matches());
        assert!(r.pi.iter().all(|p| p.is_zero()));
        let r = classical_metric_family(
            Sign::Plus,
            OddEntry::new(qi_int(1), qi_int(0)),
            OddEntry::zero(),
            &block(0, 0, 0, 1),
        )
        .unwrap();
        assert!(r.matches());
        assert_eq!(r.pi, [qi_int(1), qi_int(0), qi_int(0), qi_int(0), qi_int(0)]);
        for sign in [Sign::Plus, Sign::Minus] {
            let r = classical_metric_family(
                sign,
                OddEntry::new(qi(2, 3), qi(-1, 1)),
                OddEntry::new(qi(1, 2), qi(5, 1)),
                &block(0, 3, -2, 5),
            )
            .unwrap();
            assert!(r.matches(), "{:?}", r.mismatches);
        }
    }

    #[test]
    fn quantum_limit_metric_is_singular() {
        assert_eq!(
            quantum_limit_metric(&block(0, 1, 1, 1), Sign::Plus, &qi_int(1)),
            Err(VierbeinError::SuperMatrix(SuperMatrixError::SingularOddBlock))
        );
    }

    #[test]
    fn sweep_interpolates() {
        let p = path(2);
        let rows = epsilon_sweep(
            &block(0, 1, 1, 1),
            Sign::Plus,
            &qi_int(1),
            QuantumTarget::Interpolating,
            &[qi_int(1), qi(1, 2), qi_from_f64(1e-6)],
            &half_q2(),
            &p,
            &qi_int(0),
            &qi_int(1),
        )
        .unwrap();
        assert_eq!(rows[0].classical_residual, 0.0);
        assert!(rows[2].quantum_residual < 1e-4);
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("eps,classical_residual,quantum_residual\n"));
    }
}
