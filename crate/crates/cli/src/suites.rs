//! The verification suites. Each check draws its randomness from its own
//! stream of the seeded generator, so checks are independent of each
//! other's sample counts and of the order suites run in.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use superkvn::extended::{extended_flow, Charge, ExtendedPoint, ExtendedSpace};
use superkvn::grassmann::Supernumber;
use superkvn::kernels::{
    convergence_study, endpoint_grid, free_kernel, kernel_compare, mehler_group_check,
    qpi_kernel_quadratic, DiscretizedAction,
};
use superkvn::kvn::{
    cpi_kernel_compose, density_consistency, evolve_trajectory, evolve_wave, form_pairing_defect,
    gaussian_amplitude, Form, KvNWave,
};
use superkvn::phase_flow::{hamilton_flow, symplectic_defect, Observable};
use superkvn::poly::Poly;
use superkvn::ring::{qi_i, qi_int, Magnitude, Ring};
use superkvn::sampling::{
    endpoint_algebra, random_block, random_endpoints, random_hamiltonian, random_odd_entry,
    random_poly, random_potential,
};
use superkvn::superfield::{
    action_multiplet_expansion, dequantize_action, integrate_path, lagrangian_identity_check,
    multiplet, surface_term_cancellation, SuperPath, SuperfieldSpace,
};
use superkvn::supergeometry::{
    apply_operator, metric_from_vierbein, supertime_algebra, supertime_distance, SupertimeOperator,
    THETA, THETA_BAR,
};
use superkvn::vierbein::{
    action_from_vierbein, classical_metric_family, quantum_limit_metric, quantum_weight,
    solve_classical, solve_quantum, Block, EvenEntry, OddEntry, QuantumTarget, Sign,
    VierbeinError, VierbeinParams,
};

use crate::config::{Suite, SuiteConfig};
use crate::report::{CheckRecord, Status};

/// Generator for one check: the configured seed on a dedicated stream.
pub fn check_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Randomized initial wave used by the KvN checks and the snapshot artifact.
pub const BLOB: ((f64, f64), f64, f64) = ((1.0, 0.5), 0.6, 0.5);

/// Fixed vierbein block `b = 0, c = d = 1, e = 2` used for action checks.
pub fn reference_block() -> Block {
    Block {
        b: EvenEntry::zero(),
        c: EvenEntry::constant(qi_int(1)),
        d: EvenEntry::constant(qi_int(1)),
        e: EvenEntry::constant(qi_int(2)),
    }
}

type CheckResult<T> = Result<T, String>;

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Running comparison for exact checks.
#[derive(Debug, Clone, Copy)]
struct Exactly {
    equal: bool,
    worst: f64,
}

impl Exactly {
    fn new() -> Self {
        Exactly { equal: true, worst: 0.0 }
    }

    fn cmp<R: Ring + Magnitude>(&mut self, a: &Supernumber<R>, b: &Supernumber<R>) {
        if a != b {
            self.equal = false;
            self.worst = self.worst.max((a - b).max_abs_coeff().max(f64::MIN_POSITIVE));
        }
    }

    fn flag(&mut self, ok: bool) {
        if !ok {
            self.equal = false;
            self.worst = self.worst.max(1.0);
        }
    }
}

struct Checks<'a> {
    cfg: &'a SuiteConfig,
    suite: Suite,
    records: Vec<CheckRecord>,
}

impl Checks<'_> {
    fn push(&mut self, name: String, reference: &str, tolerance: Option<f64>, out: CheckResult<(bool, f64)>) {
        let (status, residual, detail) = match out {
            Ok((ok, r)) => (if ok { Status::Pass } else { Status::Fail }, Some(r), None),
            Err(e) => (Status::Fail, None, Some(e)),
        };
        self.records.push(CheckRecord {
            suite: self.suite.to_string(),
            name,
            status,
            residual,
            tolerance,
            reference: reference.to_string(),
            detail,
        });
    }

    fn exact(&mut self, name: impl Into<String>, reference: &str, f: impl FnOnce() -> CheckResult<Exactly>) {
        let out = f().map(|e| (e.equal, e.worst));
        self.push(name.into(), reference, None, out);
    }

    fn within(&mut self, name: impl Into<String>, reference: &str, tol: f64, f: impl FnOnce() -> CheckResult<f64>) {
        let out = f().map(|r| (r <= tol, r));
        self.push(name.into(), reference, Some(tol), out);
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        check_rng(self.cfg.seed, stream)
    }

    /// The configured Hamiltonian followed by random ones over one and two
    /// degrees of freedom.
    fn hamiltonians(&self, stream: u64, degree: u32) -> Vec<Observable> {
        let mut rng = self.rng(stream);
        let mut hs = vec![self.cfg.hamiltonian.clone()];
        hs.extend((1..self.cfg.samples).map(|k| random_hamiltonian(1 + k % 2, degree, &mut rng)));
        hs
    }
}

/// Runs `suite`; for `all`, the concrete suites run on separate threads
/// and their records are collected in the fixed suite order.
pub fn run_checks(cfg: &SuiteConfig, suite: Suite) -> Vec<CheckRecord> {
    let suites = suite.expand();
    std::thread::scope(|scope| {
        let handles: Vec<_> = suites
            .into_iter()
            .map(|s| scope.spawn(move || run_one(cfg, s)))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("suite thread panicked"))
            .collect()
    })
}

fn run_one(cfg: &SuiteConfig, suite: Suite) -> Vec<CheckRecord> {
    let mut c = Checks {
        cfg,
        suite,
        records: Vec::new(),
    };
    match suite {
        Suite::Algebra => algebra(&mut c),
        Suite::Supergeometry => supergeometry(&mut c),
        Suite::Dynamics => dynamics(&mut c),
        Suite::Superfield => superfield(&mut c),
        Suite::Kvn => kvn(&mut c),
        Suite::Kernels => kernels(&mut c),
        Suite::Vierbein => vierbein(&mut c),
        Suite::All => unreachable!("expanded by run_checks"),
    }
    c.records
}

fn algebra(c: &mut Checks<'_>) {
    let hs = c.hamiltonians(101, 4);
    c.exact("berezin_top_is_superhamiltonian", "i∫dθdθ̄ Φ_H = ℋ", || {
        let mut ex = Exactly::new();
        for h in &hs {
            let sp = SuperfieldSpace::new(h.n());
            let top = sp
                .compose(h)
                .map_err(s)?
                .berezin_integrate(&[THETA, THETA_BAR])
                .map_err(s)?
                .scale(&Poly::constant(qi_i()));
            ex.cmp(&top, &sp.extended().superhamiltonian(h).map_err(s)?);
        }
        Ok(ex)
    });
    c.exact("multiplet_components", "Φ_H = G + θN + θ̄N̄ + iθ̄θ ℋ components", || {
        let mut ex = Exactly::new();
        for h in &hs {
            let sp = SuperfieldSpace::new(h.n());
            let ext = sp.extended();
            let m = multiplet(&sp.compose(h).map_err(s)?).map_err(s)?;
            ex.cmp(&m.base, &ext.lift(h).map_err(s)?);
            ex.cmp(&m.n, &ext.charge(Charge::N, Some(h)).map_err(s)?);
            ex.cmp(&m.nbar, &ext.charge(Charge::NBar, Some(h)).map_err(s)?);
            ex.cmp(&m.top, &ext.superhamiltonian(h).map_err(s)?);
        }
        Ok(ex)
    });
    c.exact("susy_anticommutator", "{Q_H, Q̄_H} = 2ℋ", || {
        let mut ex = Exactly::new();
        for h in &hs {
            let sp = ExtendedSpace::new(h.n());
            let anti = sp
                .bracket(
                    &sp.charge(Charge::QH, Some(h)).map_err(s)?,
                    &sp.charge(Charge::QBarH, Some(h)).map_err(s)?,
                )
                .map_err(s)?;
            let sh = sp.superhamiltonian(h).map_err(s)?;
            ex.cmp(&anti, &sh.scale(&Poly::constant(qi_int(2))));
        }
        Ok(ex)
    });
    c.exact("charges_conserved", "{ℋ, X} = 0 for X = Q_H, Q̄_H, N, N̄", || {
        let mut ex = Exactly::new();
        for h in &hs {
            let sp = ExtendedSpace::new(h.n());
            let sh = sp.superhamiltonian(h).map_err(s)?;
            for q in [Charge::QH, Charge::QBarH, Charge::N, Charge::NBar] {
                let b = sp.bracket(&sh, &sp.charge(q, Some(h)).map_err(s)?).map_err(s)?;
                ex.cmp(&b, &Supernumber::zero(b.algebra()));
            }
        }
        Ok(ex)
    });
    c.exact("superfield_bracket", "{Φ^a(θ,θ̄), Φ^b(θ′,θ̄′)} = iω^{ab}(θ−θ′)(θ̄−θ̄′)", || {
        let mut ex = Exactly::new();
        for n in [1, 2] {
            let sp = SuperfieldSpace::doubled(n);
            for a in 0..2 * n {
                for b in 0..2 * n {
                    let (lhs, rhs) = sp.superfield_bracket(a, b).map_err(s)?;
                    ex.cmp(&lhs, &rhs);
                }
            }
        }
        Ok(ex)
    });
}

/// Vierbeins drawn from both constrained families, so their matrices are
/// invertible.
fn random_vierbeins(c: &Checks<'_>, stream: u64) -> CheckResult<Vec<VierbeinParams>> {
    let mut rng = c.rng(stream);
    let eps = &c.cfg.epsilon[c.cfg.epsilon.len() - 1].value;
    let mut out = Vec::new();
    for k in 0..c.cfg.samples {
        let sign = if k % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let block = random_block(&mut rng, true);
        let (g, d) = (random_odd_entry(&mut rng), random_odd_entry(&mut rng));
        let v = if k % 3 == 2 {
            solve_quantum(&block, sign, eps, &c.cfg.hbar.value, QuantumTarget::Interpolating)
                .map_err(s)?
                .vierbein(g, d)
        } else {
            solve_classical(&block, sign).map_err(s)?.vierbein(g, d)
        };
        out.push(v);
    }
    Ok(out)
}

fn supergeometry(c: &mut Checks<'_>) {
    let f = supertime_distance(&supertime_algebra());
    for op in SupertimeOperator::OSP {
        c.exact(format!("osp_invariance_{op:?}"), "X F = 0 with F = t² − 2θ̄θ", || {
            let r = apply_operator(op, &f).map_err(s)?;
            let mut ex = Exactly::new();
            ex.cmp(&r, &Supernumber::zero(r.algebra()));
            Ok(ex)
        });
    }
    let vs = random_vierbeins(c, 201);
    c.exact("sdet_multiplicative", "sdet(AB) = sdet A · sdet B", || {
        let vs = vs.clone()?;
        let mut ex = Exactly::new();
        for pair in vs.windows(2) {
            let a = pair[0].matrix().map_err(s)?;
            let b = pair[1].matrix().map_err(s)?;
            let ab = a.mul(&b).map_err(s)?.superdeterminant().map_err(s)?;
            let prod = &a.superdeterminant().map_err(s)? * &b.superdeterminant().map_err(s)?;
            ex.cmp(&ab, &prod);
        }
        Ok(ex)
    });
    c.exact("metric_graded_symmetry", "g_MN = (−1)^{|M||N|} g_NM", || {
        let vs = vs?;
        let mut ex = Exactly::new();
        for v in &vs {
            let g = metric_from_vierbein(&v.matrix().map_err(s)?).map_err(s)?;
            ex.flag(g.has_metric_symmetry());
        }
        Ok(ex)
    });
}

fn start_point(dim: usize) -> Vec<f64> {
    [0.7, -0.3, 0.4, 0.2].iter().copied().cycle().take(dim).collect()
}

fn dynamics(c: &mut Checks<'_>) {
    let hs = [
        c.cfg.hamiltonian.clone(),
        Observable::harmonic_oscillator(),
        Observable::free_particle(),
        Observable::quartic_oscillator(),
    ];
    let times = [0.1, 1.0, 3.0];
    let flows = (|| -> CheckResult<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        for h in &hs {
            let x0 = start_point(h.dim());
            for t in times {
                let ext = extended_flow(
                    h,
                    &ExtendedPoint {
                        phi: x0.clone(),
                        lambda: vec![0.0; h.dim()],
                    },
                    t,
                    1e-12,
                )
                .map_err(s)?;
                let fl = hamilton_flow(h, &x0, t, 1e-12).map_err(s)?;
                out.push(((&ext.c_transport - &fl.jacobi).amax(), symplectic_defect(&ext.c_transport)));
            }
        }
        Ok(out)
    })();
    let tol = c.cfg.tolerances.flow;
    c.within("ghost_transport_equals_jacobi", "c(t) = (∂φ(t)/∂φ₀) c₀", tol, || {
        Ok(flows.clone()?.iter().map(|x| x.0).fold(0.0, f64::max))
    });
    c.within("jacobi_symplectic", "JᵀωJ = ω", tol, || {
        Ok(flows.clone()?.iter().map(|x| x.1).fold(0.0, f64::max))
    });
    c.within("flow_composition", "chained flow over [0,t₁],[t₁,t₂],… = one flow over [0,tₙ]", tol, || {
        let mut worst = 0.0f64;
        for h in &hs {
            let r = cpi_kernel_compose(h, &start_point(h.dim()), &[0.4, 1.1, 2.0]).map_err(s)?;
            worst = worst.max(r.discrepancy);
        }
        Ok(worst)
    });
    let mut rng = c.rng(301);
    c.within("form_pairing_invariant", "F_a(t)(φ(t)) c^a(t) = F_a(φ₀) c₀^a", tol, || {
        let mut worst = 0.0f64;
        for h in &hs {
            let (n, d) = (h.n(), h.dim());
            let one = (0..d)
                .map(|_| Observable::new(n, random_poly(d, 2, 3, &mut rng)).map_err(s))
                .collect::<CheckResult<Vec<_>>>()?;
            let form = Form {
                zero: Observable::zero(n),
                one,
            };
            let c0: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            worst = worst.max(form_pairing_defect(h, &form, &start_point(d), &c0, 1.0).map_err(s)?);
        }
        Ok(worst)
    });
}

fn superfield(c: &mut Checks<'_>) {
    let hs = c.hamiltonians(401, 3);
    let degree = c.cfg.path_degree;
    let paths = {
        let mut rng = c.rng(402);
        hs.iter().map(|h| SuperPath::random(h.n(), degree, &mut rng)).collect::<Vec<_>>()
    };
    c.exact("lagrangian_identity", "i∫dθdθ̄ L(Φ) = ℒ_CPI − dB/dt off shell", || {
        let mut ex = Exactly::new();
        for (h, p) in hs.iter().zip(&paths) {
            let r = lagrangian_identity_check(h, p).map_err(s)?;
            ex.cmp(&r.residual, &Supernumber::zero(r.residual.algebra()));
        }
        Ok(ex)
    });
    c.exact("action_multiplet", "S = S₀ + θ𝒯 + θ̄𝒱 + iθθ̄(S_CPI + boundary)", || {
        let mut ex = Exactly::new();
        for (h, p) in hs.iter().zip(&paths) {
            let (exp, bosonic) = action_multiplet_expansion(h, p, &qi_int(0), &qi_int(1)).map_err(s)?;
            ex.flag(exp.consistent(&bosonic));
        }
        Ok(ex)
    });
    let mut rng = c.rng(403);
    let samples = c.cfg.samples;
    c.exact("surface_terms_cancel", "boundary phases from both ends multiply to 1", || {
        let mut ex = Exactly::new();
        for k in 0..samples {
            let n = 1 + k % 2;
            let alg = endpoint_algebra(n);
            let (end, start) = random_endpoints(n, &alg, &mut rng);
            let prod = surface_term_cancellation(&end, &start, &alg).map_err(s)?;
            ex.cmp(&prod, &Supernumber::one(&alg));
        }
        Ok(ex)
    });
    c.exact("susy_conjugation", "e^{−iθ̄Q̄ − iθQ} φ e^{…} = Φ_φ", || {
        let mut ex = Exactly::new();
        for h in &hs {
            let sp = SuperfieldSpace::new(h.n());
            let conj = sp.susy_conjugation(h, &sp.theta(), &sp.thetabar()).map_err(s)?;
            ex.cmp(&conj, &sp.compose(h).map_err(s)?);
        }
        Ok(ex)
    });
}

fn kvn(c: &mut Checks<'_>) {
    let grid = c.cfg.grid;
    let tol = c.cfg.tolerances.kvn;
    c.within("free_shear_oracle", "ψ(q, p, t) = ψ₀(q − pt, p) for H = p²/2", tol, || {
        let (c0, sigma, k, t) = ((0.0, 0.0), 0.5, 1.0, 1.0);
        let w = KvNWave::gaussian(grid, c0, sigma, k).map_err(s)?;
        let out = evolve_wave(&Observable::free_particle(), &w, t).map_err(s)?;
        Ok(out.max_error(|q, p| gaussian_amplitude(q - p * t, p, c0, sigma, k)))
    });
    c.within("oscillator_rotation_oracle", "ψ(t) = ψ₀ ∘ R(−t) for H = (p² + q²)/2", tol, || {
        let w = KvNWave::gaussian(grid, (1.0, 0.0), 0.6, 0.0).map_err(s)?;
        let out = evolve_wave(&Observable::harmonic_oscillator(), &w, FRAC_PI_2).map_err(s)?;
        Ok(out.max_error(|q, p| gaussian_amplitude(q, p, (0.0, -1.0), 0.6, 0.0)))
    });
    let report = (|| -> CheckResult<_> {
        let (center, sigma, k) = BLOB;
        let w = KvNWave::gaussian(grid, center, sigma, k).map_err(s)?;
        let traj = evolve_trajectory(&c.cfg.hamiltonian, &w, &grid).map_err(s)?;
        density_consistency(&c.cfg.hamiltonian, &traj).map_err(s)
    })();
    c.within("density_consistency", "ρ evolved directly = |ψ|² of the evolved wave", tol, || {
        Ok(report.clone()?.max_discrepancy)
    });
    c.within("probability_conserved", "∫ρ dq dp constant along the trajectory", tol, || {
        Ok(report.clone()?.l1_drift)
    });
    c.within("l2_norm_conserved", "∫|ψ|² dq dp constant along the trajectory", tol, || {
        Ok(report.clone()?.l2_drift)
    });
}

fn kernels(c: &mut Checks<'_>) {
    let cfg = c.cfg;
    let tol = cfg.tolerances.kernel;
    let spec = DiscretizedAction::harmonic(cfg.slices, cfg.kernel_time, cfg.omega);
    let pts = endpoint_grid(1.5, 7);
    let cmp = kernel_compare(&spec, &pts).map_err(s);
    c.within("oscillator_kernel_modulus", "|K_N| → |K_Mehler|, relative", tol, || {
        Ok(cmp.clone()?.max_rel_modulus_error)
    });
    c.within("oscillator_kernel_phase", "arg K_N → arg K_Mehler, radians", tol, || {
        Ok(cmp.clone()?.max_phase_error)
    });
    c.within("free_kernel_exact", "K_N = K_free for every N", 1e-12, || {
        let mut worst = 0.0f64;
        for n in [2, 16, cfg.slices] {
            let fs = DiscretizedAction::free(n, cfg.kernel_time);
            for &(q0, q1) in &pts {
                let d = qpi_kernel_quadratic(&fs, q0, q1).map_err(s)?;
                let o = free_kernel(1.0, 1.0, cfg.kernel_time, q0, q1);
                worst = worst.max((d - o).norm() / o.norm());
            }
        }
        Ok(worst)
    });
    c.within("first_order_convergence", "|error(N)/error(2N) − 2|", 0.2, || {
        let study = convergence_study(&spec, &[cfg.slices / 4, cfg.slices / 2, cfg.slices], &pts).map_err(s)?;
        Ok(study.iter().filter_map(|r| r.2).map(|r| (r - 2.0).abs()).fold(0.0, f64::max))
    });
    c.within("mehler_group_property", "∫K(t₁)K(t₂)dq = K(t₁ + t₂), relative", 1e-4, || {
        let t = cfg.kernel_time;
        let (conv, direct) = mehler_group_check(1.0, cfg.omega, 1.0, 0.4 * t, 0.6 * t, 0.4, -0.2, 4001).map_err(s)?;
        Ok((conv - direct).norm() / direct.norm())
    });
}

fn vierbein(c: &mut Checks<'_>) {
    let cfg = c.cfg;
    let hbar = &cfg.hbar.value;
    let (t0, t1) = (qi_int(0), qi_int(1));
    let blocks = {
        let mut rng = c.rng(501);
        (0..cfg.samples)
            .map(|k| {
                let sign = if k % 2 == 0 { Sign::Plus } else { Sign::Minus };
                (random_block(&mut rng, true), sign, random_odd_entry(&mut rng), random_odd_entry(&mut rng))
            })
            .collect::<Vec<_>>()
    };
    c.exact("classical_unit_sdet", "sdet E = 1 for every classical solution", || {
        let mut ex = Exactly::new();
        for (block, sign, g, d) in &blocks {
            let e = solve_classical(block, *sign).map_err(s)?.vierbein(g.clone(), d.clone()).density().map_err(s)?;
            ex.cmp(&e, &Supernumber::one(e.algebra()));
        }
        Ok(ex)
    });
    let mut rng = c.rng(502);
    c.exact("classical_metric_family", "g matches the five-parameter pattern", || {
        let mut ex = Exactly::new();
        for k in 0..cfg.samples {
            let sign = if k % 2 == 0 { Sign::Plus } else { Sign::Minus };
            let block = random_block(&mut rng, false);
            let r = classical_metric_family(sign, random_odd_entry(&mut rng), random_odd_entry(&mut rng), &block)
                .map_err(s)?;
            ex.flag(r.matches());
        }
        Ok(ex)
    });
    c.exact("quantum_metric_singular", "the ε → 0 metric has a singular odd block", || {
        let mut ex = Exactly::new();
        for (block, sign, _, _) in &blocks {
            let r = quantum_limit_metric(block, *sign, hbar);
            ex.flag(matches!(
                r,
                Err(VierbeinError::SuperMatrix(superkvn::supergeometry::SuperMatrixError::SingularOddBlock))
            ));
        }
        Ok(ex)
    });

    let paths = {
        let mut rng = c.rng(503);
        (0..cfg.samples)
            .map(|_| (SuperPath::random(1, cfg.path_degree, &mut rng), random_potential(4, &mut rng)))
            .collect::<Vec<_>>()
    };
    for e in &cfg.epsilon {
        let tag = &e.text;
        c.exact(format!("quantum_density[ε={tag}]"), "E = ε − (1 − ε)iθ̄θ/ħ solved exactly", || {
            for (block, sign, _, _) in &blocks {
                solve_quantum(block, *sign, &e.value, hbar, QuantumTarget::Interpolating).map_err(s)?;
            }
            Ok(Exactly::new())
        });
        if e.is_one() {
            c.exact("quantum_equals_classical[ε=1]", "solve_quantum(ε = 1) = solve_classical", || {
                let mut ex = Exactly::new();
                for (block, sign, _, _) in &blocks {
                    let q = solve_quantum(block, *sign, &e.value, hbar, QuantumTarget::Interpolating).map_err(s)?;
                    let cl = solve_classical(block, *sign).map_err(s)?;
                    ex.flag(q.block == cl.block && q.branch == cl.branch);
                }
                Ok(ex)
            });
        }
        c.exact(format!("action_split[ε={tag}]"), "S = ε S_classical + (1/ħ)∫(½q̇² − V) for E = ε − iθ̄θ/ħ", || {
            let sol = solve_quantum(&reference_block(), Sign::Plus, &e.value, hbar, QuantumTarget::Regularized)
                .map_err(s)?;
            let vb = sol.vierbein(OddEntry::zero(), OddEntry::zero());
            let mut ex = Exactly::new();
            for (path, v) in &paths {
                let act = action_from_vierbein(&vb, v, path, &t0, &t1).map_err(s)?;
                let cl = action_from_vierbein(&VierbeinParams::identity(), v, path, &t0, &t1).map_err(s)?;
                let w = quantum_weight(&qi_int(1), v, path, hbar, &t0, &t1).map_err(s)?;
                let expect = &cl.scale(&e.value) + &Supernumber::scalar(cl.algebra(), w);
                ex.cmp(&act, &expect);
            }
            Ok(ex)
        });
    }

    let smallest = cfg
        .epsilon
        .iter()
        .min_by(|a, b| a.value.norm_sqr().cmp(&b.value.norm_sqr()))
        .expect("validated nonempty");
    let mut rng = c.rng(504);
    c.within(
        format!("small_epsilon_limit[ε={}]", smallest.text),
        "S → (1/ħ)∫(½q̇² − V) on polynomial q(τ), relative",
        cfg.tolerances.action,
        || {
            let sol = solve_quantum(&reference_block(), Sign::Plus, &smallest.value, hbar, QuantumTarget::Regularized)
                .map_err(s)?;
            let vb = sol.vierbein(OddEntry::zero(), OddEntry::zero());
            let mut worst = 0.0f64;
            for _ in 0..cfg.samples {
                let q = random_poly(1, cfg.path_degree, 4, &mut rng);
                let path = SuperPath::bosonic(1, vec![q.clone(), q.derivative(0)]).map_err(s)?;
                let v = random_potential(4, &mut rng);
                let act = action_from_vierbein(&vb, &v, &path, &t0, &t1).map_err(s)?;
                let w = quantum_weight(&qi_int(1), &v, &path, hbar, &t0, &t1).map_err(s)?;
                let target = Supernumber::scalar(act.algebra(), w);
                let gap = (&act - &target).max_abs_coeff();
                let scale = target.max_abs_coeff();
                worst = worst.max(if scale > 0.0 { gap / scale } else { gap });
            }
            Ok(worst)
        },
    );
    let mut rng = c.rng(505);
    c.exact("dequantized_weight_is_classical_action", "∫ dequantized density = classical vierbein action", || {
        let mut ex = Exactly::new();
        for (path, v) in &paths {
            let w = dequantize_action(v, path, hbar).map_err(s)?;
            let lhs = integrate_path(&w.density, &t0, &t1);
            let sol = solve_classical(&random_block(&mut rng, true), Sign::Plus).map_err(s)?;
            let vb = sol.vierbein(random_odd_entry(&mut rng), random_odd_entry(&mut rng));
            let rhs = action_from_vierbein(&vb, v, path, &t0, &t1)
                .map_err(s)?
                .embed(lhs.algebra())
                .map_err(s)?;
            ex.cmp(&lhs, &rhs);
        }
        Ok(ex)
    });
}
