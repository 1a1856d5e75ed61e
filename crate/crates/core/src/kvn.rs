//! Koopman–von Neumann waves on a phase-space grid, evolved along
//! Hamiltonian characteristics, plus transport of zero- and one-forms.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::extended::{extended_flow, ExtendedError, ExtendedPoint};
use crate::ode::OdeOptions;
use crate::phase_flow::{CompiledFlow, FlowError, Observable};
use crate::ring::C64;

/// Amplitude below which data leaving the grid is treated as absent.
pub const ESCAPE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum KvnError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("support escapes the grid near ({q}, {p}) with amplitude {amplitude:e}")]
    SupportEscape { q: f64, p: f64, amplitude: f64 },
    #[error("times must be non-decreasing")]
    Times,
    #[error("kvn waves are defined for one degree of freedom, got {0}")]
    Dimension(usize),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Extended(#[from] ExtendedError),
}

/// Uniform `(q, p)` lattice with endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub nq: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
    pub dt: f64,
    pub total_time: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            q_min: -6.0,
            q_max: 6.0,
            nq: 256,
            p_min: -6.0,
            p_max: 6.0,
            np: 256,
            dt: std::f64::consts::FRAC_PI_4,
            total_time: 2.0 * std::f64::consts::PI,
        }
    }
}

impl GridSpec {
    pub fn square(extent: f64, n: usize) -> Self {
        GridSpec {
            q_min: -extent,
            q_max: extent,
            nq: n,
            p_min: -extent,
            p_max: extent,
            np: n,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), KvnError> {
        if self.nq < 8 || self.np < 8 {
            return Err(KvnError::Grid("at least 8 points per axis".into()));
        }
        let finite = [self.q_min, self.q_max, self.p_min, self.p_max, self.dt, self.total_time]
            .iter()
            .all(|x| x.is_finite());
        if !finite || self.q_min >= self.q_max || self.p_min >= self.p_max {
            return Err(KvnError::Grid("axis bounds must be finite and increasing".into()));
        }
        if self.dt <= 0.0 || self.total_time < 0.0 {
            return Err(KvnError::Grid("time step must be positive".into()));
        }
        Ok(())
    }

    /// Sanity bound on the characteristic displacement per step: the
    /// fastest grid node may not cross more than the whole domain.
    pub fn validate_for(&self, flow: &CompiledFlow) -> Result<(), KvnError> {
        self.validate()?;
        let mut v = [0.0; 2];
        let mut vmax = 0.0f64;
        for &q in &[self.q_min, 0.0, self.q_max] {
            for &p in &[self.p_min, 0.0, self.p_max] {
                flow.field(&[q, p], &mut v);
                vmax = vmax.max(v[0].hypot(v[1]));
            }
        }
        let width = (self.q_max - self.q_min).min(self.p_max - self.p_min);
        if vmax * self.dt > width {
            return Err(KvnError::Grid(format!(
                "step {} moves characteristics by {:.3}, beyond the domain width",
                self.dt,
                vmax * self.dt
            )));
        }
        Ok(())
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.nq - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.dq()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn len(&self) -> usize {
        self.nq * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, k: usize) -> (f64, f64) {
        (self.q(k / self.np), self.p(k % self.np))
    }

    pub fn contains(&self, q: f64, p: f64) -> bool {
        q >= self.q_min && q <= self.q_max && p >= self.p_min && p <= self.p_max
    }

    pub fn cell_area(&self) -> f64 {
        self.dq() * self.dp()
    }
}

fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Complex amplitudes on a grid, stored with `p` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct KvNWave {
    grid: GridSpec,
    values: Vec<C64>,
}

impl KvNWave {
    pub fn new(grid: GridSpec, values: Vec<C64>) -> Result<Self, KvnError> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(KvnError::Grid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(KvNWave { grid, values })
    }

    pub fn from_fn<F>(grid: GridSpec, f: F) -> Result<Self, KvnError>
    where
        F: Fn(f64, f64) -> C64 + Sync,
    {
        grid.validate()?;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (q, p) = grid.node(k);
                f(q, p)
            })
            .collect();
        Ok(KvNWave { grid, values })
    }

    /// `exp(−|x − x₀|²/(2σ²) + i k q)`.
    pub fn gaussian(
        grid: GridSpec,
        center: (f64, f64),
        sigma: f64,
        k: f64,
    ) -> Result<Self, KvnError> {
        Self::from_fn(grid, move |q, p| gaussian_amplitude(q, p, center, sigma, k))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.grid.np + j]
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `Σ|ψ|² Δq Δp`.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    /// `Σ|ψ| Δq Δp`; for a density wave this is its total mass.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn boundary_max(&self) -> f64 {
        self.boundary_peak().map_or(0.0, |b| b.2)
    }

    /// Boundary node with the largest amplitude.
    pub fn boundary_peak(&self) -> Option<(f64, f64, f64)> {
        let g = &self.grid;
        let edge = (0..g.nq)
            .flat_map(|i| [(i, 0), (i, g.np - 1)])
            .chain((0..g.np).flat_map(|j| [(0, j), (g.nq - 1, j)]));
        edge.map(|(i, j)| (g.q(i), g.p(j), self.at(i, j).norm()))
            .max_by(|a, b| a.2.total_cmp(&b.2))
    }

    /// Tensor-product Catmull–Rom interpolation; `None` outside the grid.
    pub fn interpolate(&self, q: f64, p: f64) -> Option<C64> {
        let g = &self.grid;
        if !g.contains(q, p) {
            return None;
        }
        let fq = ((q - g.q_min) / g.dq()).min((g.nq - 1) as f64);
        let fp = ((p - g.p_min) / g.dp()).min((g.np - 1) as f64);
        let i = (fq.floor() as usize).min(g.nq - 2);
        let j = (fp.floor() as usize).min(g.np - 2);
        let wq = catmull_rom(fq - i as f64);
        let wp = catmull_rom(fp - j as f64);
        let clamp = |k: isize, n: usize| k.clamp(0, n as isize - 1) as usize;
        let mut acc = C64::new(0.0, 0.0);
        for (a, wa) in wq.iter().enumerate() {
            let ii = clamp(i as isize + a as isize - 1, g.nq);
            let mut row = C64::new(0.0, 0.0);
            for (b, wb) in wp.iter().enumerate() {
                let jj = clamp(j as isize + b as isize - 1, g.np);
                row += self.at(ii, jj) * *wb;
            }
            acc += row * *wa;
        }
        Some(acc)
    }

    /// Nearest boundary value, used to judge what a characteristic leaving
    /// the grid would have carried.
    fn clamped_amplitude(&self, q: f64, p: f64) -> f64 {
        let g = &self.grid;
        let qc = q.clamp(g.q_min, g.q_max);
        let pc = p.clamp(g.p_min, g.p_max);
        self.interpolate(qc, pc).map(|v| v.norm()).unwrap_or(0.0)
    }

    pub fn map_values<F: Fn(C64) -> C64>(&self, f: F) -> KvNWave {
        KvNWave {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    /// Largest nodewise `|ψ − f(q, p)|`.
    pub fn max_error<F: Fn(f64, f64) -> C64 + Sync>(&self, f: F) -> f64 {
        (0..self.grid.len())
            .into_par_iter()
            .map(|k| {
                let (q, p) = self.grid.node(k);
                (self.values[k] - f(q, p)).norm()
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Rows `q,p,re_psi,im_psi,rho` with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "q,p,re_psi,im_psi,rho")?;
        for (k, v) in self.values.iter().enumerate() {
            let (q, p) = self.grid.node(k);
            writeln!(w, "{q},{p},{},{},{}", v.re, v.im, v.norm_sqr())?;
        }
        Ok(())
    }
}

pub fn gaussian_amplitude(q: f64, p: f64, center: (f64, f64), sigma: f64, k: f64) -> C64 {
    let r2 = (q - center.0).powi(2) + (p - center.1).powi(2);
    C64::from_polar((-r2 / (2.0 * sigma * sigma)).exp(), k * q)
}

fn check_one_dof(h: &Observable) -> Result<CompiledFlow, KvnError> {
    if h.n() != 1 {
        return Err(KvnError::Dimension(h.n()));
    }
    Ok(CompiledFlow::new(h))
}

fn flow_opts() -> OdeOptions {
    OdeOptions::with_tol(1e-11)
}

/// Moves every departure point back by `dt` along the flow.
fn step_departures(
    flow: &CompiledFlow,
    departures: &mut [[f64; 2]],
    dt: f64,
) -> Result<(), KvnError> {
    let opts = flow_opts();
    departures
        .par_iter_mut()
        .try_for_each(|x| -> Result<(), KvnError> {
            let y = flow.point(&x[..], -dt, &opts)?;
            *x = [y[0], y[1]];
            Ok(())
        })
}

fn sample_at(psi0: &KvNWave, departures: &[[f64; 2]]) -> Result<KvNWave, KvnError> {
    let values = departures
        .par_iter()
        .map(|x| match psi0.interpolate(x[0], x[1]) {
            Some(v) => Ok(v),
            None => {
                let amplitude = psi0.clamped_amplitude(x[0], x[1]);
                if amplitude > ESCAPE_THRESHOLD {
                    Err(KvnError::SupportEscape {
                        q: x[0],
                        p: x[1],
                        amplitude,
                    })
                } else {
                    Ok(C64::new(0.0, 0.0))
                }
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let out = KvNWave {
        grid: psi0.grid,
        values,
    };
    let limit = ESCAPE_THRESHOLD.max(psi0.boundary_max());
    if let Some((q, p, amplitude)) = out.boundary_peak().filter(|b| b.2 > limit) {
        return Err(KvnError::SupportEscape { q, p, amplitude });
    }
    Ok(out)
}

fn initial_departures(grid: &GridSpec) -> Vec<[f64; 2]> {
    (0..grid.len())
        .map(|k| {
            let (q, p) = grid.node(k);
            [q, p]
        })
        .collect()
}

/// `ψ(φ, t) = ψ₀(Φ_{−t}(φ))`, one backward characteristic per node.
pub fn evolve_wave(h: &Observable, psi0: &KvNWave, t: f64) -> Result<KvNWave, KvnError> {
    let flow = check_one_dof(h)?;
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    let mut dep = initial_departures(&psi0.grid);
    step_departures(&flow, &mut dep, t)?;
    sample_at(psi0, &dep)
}

/// Snapshot sequence at `0, dt, 2dt, …, total_time`. Departure points are
/// advanced one step at a time and the initial data are interpolated once
/// per snapshot, so interpolation error does not accumulate.
#[derive(Debug, Clone)]
pub struct WaveTrajectory {
    pub times: Vec<f64>,
    pub waves: Vec<KvNWave>,
}

pub fn evolve_trajectory(
    h: &Observable,
    psi0: &KvNWave,
    spec: &GridSpec,
) -> Result<WaveTrajectory, KvnError> {
    let flow = check_one_dof(h)?;
    spec.validate_for(&flow)?;
    let steps = (spec.total_time / spec.dt).round() as usize;
    let mut dep = initial_departures(&psi0.grid);
    let mut times = vec![0.0];
    let mut waves = vec![psi0.clone()];
    let mut t = 0.0;
    for k in 1..=steps {
        let target = if k == steps {
            spec.total_time
        } else {
            k as f64 * spec.dt
        };
        step_departures(&flow, &mut dep, target - t)?;
        t = target;
        times.push(t);
        waves.push(sample_at(psi0, &dep)?);
    }
    Ok(WaveTrajectory { times, waves })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    /// Largest nodewise gap between evolved `|ψ|²` and directly evolved `ρ`.
    pub max_discrepancy: f64,
    /// Largest relative change of `Σρ ΔqΔp` along the trajectory.
    pub l1_drift: f64,
    /// Largest relative change of `Σ|ψ|² ΔqΔp`.
    pub l2_drift: f64,
}

/// Evolves `ρ₀ = |ψ₀|²` by the same characteristics and compares it with
/// the squared modulus of each wave snapshot.
pub fn density_consistency(
    h: &Observable,
    traj: &WaveTrajectory,
) -> Result<DensityReport, KvnError> {
    let psi0 = &traj.waves[0];
    let rho0 = psi0.map_values(|v| C64::new(v.norm_sqr(), 0.0));
    let m0 = rho0.l1_norm();
    let n0 = psi0.l2_norm_sqr();
    let mut rep = DensityReport {
        max_discrepancy: 0.0,
        l1_drift: 0.0,
        l2_drift: 0.0,
    };
    for (t, psi) in traj.times.iter().zip(&traj.waves) {
        let rho = evolve_wave(h, &rho0, *t)?;
        let gap = rho
            .values
            .iter()
            .zip(&psi.values)
            .map(|(r, v)| (r.re - v.norm_sqr()).abs())
            .fold(0.0, f64::max);
        rep.max_discrepancy = rep.max_discrepancy.max(gap);
        rep.l1_drift = rep.l1_drift.max((rho.l1_norm() - m0).abs() / m0);
        rep.l2_drift = rep.l2_drift.max((psi.l2_norm_sqr() - n0).abs() / n0);
    }
    Ok(rep)
}

/// Zero-form plus one-form `F₀ + F_a c^a` with polynomial coefficients.
#[derive(Debug, Clone)]
pub struct Form {
    pub zero: Observable,
    pub one: Vec<Observable>,
}

impl Form {
    pub fn zero_form(f: Observable) -> Self {
        let n = f.n();
        Form {
            zero: f,
            one: (0..2 * n).map(|_| Observable::zero(n)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedForm {
    pub zero: f64,
    pub one: Vec<f64>,
    /// `Φ_{−t}(x₀)`.
    pub departure: Vec<f64>,
}

/// `F₀(t)(x) = F₀(Φ_{−t}x)` and `F_a(t)(x) = F_b(Φ_{−t}x) (∂Φ_{−t}/∂x)^b_a`.
pub fn evolve_form(h: &Observable, f: &Form, x0: &[f64], t: f64) -> Result<EvolvedForm, KvnError> {
    let flow = CompiledFlow::new(h);
    let back = flow.flow(x0, -t, &flow_opts())?;
    let y = &back.endpoint;
    let fy = DVector::from_iterator(f.one.len(), f.one.iter().map(|g| g.eval(y)));
    let one = back.jacobi.transpose() * fy;
    Ok(EvolvedForm {
        zero: f.zero.eval(y),
        one: one.iter().copied().collect(),
        departure: y.clone(),
    })
}

/// `|F_a(t)(x(t)) c^a(t) − F_a(x₀) c₀^a|` with `c(t) = C c₀` taken from
/// the extended flow.
pub fn form_pairing_defect(
    h: &Observable,
    f: &Form,
    x0: &[f64],
    c0: &[f64],
    t: f64,
) -> Result<f64, KvnError> {
    let d = x0.len();
    let ext = extended_flow(
        h,
        &ExtendedPoint {
            phi: x0.to_vec(),
            lambda: vec![0.0; d],
        },
        t,
        1e-12,
    )?;
    let ct = &ext.c_transport * DVector::from_column_slice(c0);
    let ev = evolve_form(h, f, &ext.phi, t)?;
    let now: f64 = ev.one.iter().zip(ct.iter()).map(|(a, b)| a * b).sum();
    let before: f64 = f.one.iter().zip(c0).map(|(g, c)| g.eval(x0) * c).sum();
    Ok((now - before).abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComposeReport {
    pub chained: Vec<f64>,
    pub direct: Vec<f64>,
    pub discrepancy: f64,
}

/// Chains flows over `[0, t₁], [t₁, t₂], …` and compares with one flow
/// over the whole interval.
pub fn cpi_kernel_compose(
    h: &Observable,
    x0: &[f64],
    times: &[f64],
) -> Result<ComposeReport, KvnError> {
    if times.iter().any(|t| *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(KvnError::Times);
    }
    let flow = CompiledFlow::new(h);
    let opts = flow_opts();
    let mut x = x0.to_vec();
    let mut prev = 0.0;
    for &t in times {
        if t > prev {
            x = flow.point(&x, t - prev, &opts)?;
        }
        prev = t;
    }
    let direct = if prev > 0.0 {
        flow.point(x0, prev, &opts)?
    } else {
        x0.to_vec()
    };
    let discrepancy = x
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ComposeReport {
        chained: x,
        direct,
        discrepancy,
    })
}

/// Closed-form inverse HO flow `Φ_{−t}`, used by tests and suites.
pub fn ho_backward(q: f64, p: f64, t: f64) -> (f64, f64) {
    let (s, c) = t.sin_cos();
    (q * c - p * s, q * s + p * c)
}

pub fn ho_jacobi(t: f64) -> DMatrix<f64> {
    let (s, c) = t.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, s, -s, c])
}
