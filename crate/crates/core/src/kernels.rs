//! Time-sliced quantum propagators for quadratic one-dimensional systems,
//! evaluated in closed form, and the Mehler kernel they converge to.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::ring::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("caustic at t = {time}")]
    Caustic { time: f64 },
    #[error("invalid discretization: {0}")]
    InvalidSpec(String),
    #[error("no closed-form oracle for this potential")]
    NoOracle,
}

/// `V(q) = v0 + v1 q + ½ k q²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Free,
    Harmonic { omega: f64 },
    Quadratic { v0: f64, v1: f64, k: f64 },
}

impl Potential {
    fn coefficients(&self, m: f64) -> (f64, f64, f64) {
        match *self {
            Potential::Free => (0.0, 0.0, 0.0),
            Potential::Harmonic { omega } => (0.0, 0.0, m * omega * omega),
            Potential::Quadratic { v0, v1, k } => (v0, v1, k),
        }
    }

    pub fn eval(&self, m: f64, q: f64) -> f64 {
        let (a, b, k) = self.coefficients(m);
        a + b * q + 0.5 * k * q * q
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizedAction {
    pub slices: usize,
    pub t: f64,
    pub m: f64,
    pub hbar: f64,
    pub potential: Potential,
}

impl DiscretizedAction {
    pub fn harmonic(slices: usize, t: f64, omega: f64) -> Self {
        DiscretizedAction {
            slices,
            t,
            m: 1.0,
            hbar: 1.0,
            potential: Potential::Harmonic { omega },
        }
    }

    pub fn free(slices: usize, t: f64) -> Self {
        DiscretizedAction {
            slices,
            t,
            m: 1.0,
            hbar: 1.0,
            potential: Potential::Free,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.t / self.slices as f64
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        if self.slices < 2 {
            return Err(KernelError::InvalidSpec("at least two slices".into()));
        }
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.t) || !ok(self.m) || !ok(self.hbar) {
            return Err(KernelError::InvalidSpec(
                "t, m and ħ must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `y₀ = 0, y₁ = 1, y_{k+1} = (2 − ε²k/m) y_k − y_{k−1}`; returns
    /// `y_N`, the determinant of the fluctuation matrix.
    pub fn gelfand_yaglom(&self) -> Result<f64, KernelError> {
        self.validate()?;
        let eps = self.epsilon();
        let (_, _, k) = self.potential.coefficients(self.m);
        let diag = 2.0 - eps * eps * k / self.m;
        let (mut prev, mut cur) = (0.0, 1.0);
        for step in 1..self.slices {
            let next = diag * cur - prev;
            if next <= 0.0 {
                return Err(KernelError::Caustic {
                    time: (step + 1) as f64 * eps,
                });
            }
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// Stationary value of the prepoint action
    /// `Σ m(q_{k+1} − q_k)²/(2ε) − ε Σ_{k<N} V(q_k)` over interior points.
    pub fn classical_action(&self, q0: f64, q1: f64) -> f64 {
        let n = self.slices;
        let eps = self.epsilon();
        let (_, b, k) = self.potential.coefficients(self.m);
        let scale = self.m / eps;
        // interior equations M x = J, M = scale·tridiag(−1, 2 − ε²k/m, −1)
        let diag = scale * (2.0 - eps * eps * k / self.m);
        let off = -scale;
        let dim = n - 1;
        let mut rhs: Vec<f64> = vec![-eps * b; dim];
        rhs[0] += scale * q0;
        rhs[dim - 1] += scale * q1;
        let x = thomas(off, diag, &rhs);
        // summed along the path: at the stationary point solver roundoff
        // enters only quadratically
        let mut path = Vec::with_capacity(n + 1);
        path.push(q0);
        path.extend(&x);
        path.push(q1);
        let kinetic: f64 = path.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() * scale / 2.0;
        let potential: f64 = path[..n].iter().map(|q| self.potential.eval(self.m, *q)).sum::<f64>() * eps;
        kinetic - potential
    }
}

/// Solves a constant-coefficient symmetric tridiagonal system.
fn thomas(off: f64, diag: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = off / diag;
    d[0] = rhs[0] / diag;
    for i in 1..n {
        let den = diag - off * c[i - 1];
        c[i] = off / den;
        d[i] = (rhs[i] - off * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// `√(m/(2πiħ ε y_N)) · exp(iS_cl/ħ)` for the `N`-slice integral.
pub fn qpi_kernel_quadratic(spec: &DiscretizedAction, q0: f64, q1: f64) -> Result<C64, KernelError> {
    let y = spec.gelfand_yaglom()?;
    let amp = (spec.m / (2.0 * PI * spec.hbar * spec.epsilon() * y)).sqrt();
    let phase = spec.classical_action(q0, q1) / spec.hbar - FRAC_PI_4;
    Ok(C64::from_polar(amp, phase))
}

pub fn free_kernel(m: f64, hbar: f64, t: f64, q0: f64, q1: f64) -> C64 {
    let amp = (m / (2.0 * PI * hbar * t)).sqrt();
    C64::from_polar(amp, m * (q1 - q0).powi(2) / (2.0 * hbar * t) - FRAC_PI_4)
}

/// Mehler kernel at complex endpoints. The square root follows the branch
/// continuous from `t → 0⁺`, picking up `e^{−iπ/2}` at each caustic.
fn mehler_complex(m: f64, omega: f64, hbar: f64, t: f64, q0: C64, q1: C64) -> Result<C64, KernelError> {
    if omega == 0.0 {
        let amp = (m / (2.0 * PI * hbar * t)).sqrt();
        let e = C64::i() * (q1 - q0).powi(2) * (m / (2.0 * hbar * t));
        return Ok(C64::from_polar(amp, -FRAC_PI_4) * e.exp());
    }
    let (s, c) = (omega * t).sin_cos();
    if s.abs() < 1e-14 {
        return Err(KernelError::Caustic { time: t });
    }
    let crossings = (omega * t / PI).floor();
    let amp = (m * omega / (2.0 * PI * hbar * s.abs())).sqrt();
    let pre = C64::from_polar(amp, -FRAC_PI_4 - FRAC_PI_2 * crossings);
    let e = C64::i() * ((q0 * q0 + q1 * q1) * c - q0 * q1 * 2.0) * (m * omega / (2.0 * hbar * s));
    Ok(pre * e.exp())
}

pub fn mehler_oracle(m: f64, omega: f64, hbar: f64, t: f64, q0: f64, q1: f64) -> Result<C64, KernelError> {
    mehler_complex(m, omega, hbar, t, C64::new(q0, 0.0), C64::new(q1, 0.0))
}

/// Continuum kernel for the potentials that have one.
pub fn oracle(spec: &DiscretizedAction, q0: f64, q1: f64) -> Result<C64, KernelError> {
    let DiscretizedAction { m, hbar, t, .. } = *spec;
    match spec.potential {
        Potential::Free => Ok(free_kernel(m, hbar, t, q0, q1)),
        Potential::Harmonic { omega } => mehler_oracle(m, omega, hbar, t, q0, q1),
        Potential::Quadratic { v0, v1, k } if v1 == 0.0 && k >= 0.0 => {
            let w = (k / m).sqrt();
            let base = mehler_oracle(m, w, hbar, t, q0, q1)?;
            Ok(base * C64::from_polar(1.0, -v0 * t / hbar))
        }
        Potential::Quadratic { .. } => Err(KernelError::NoOracle),
    }
}

/// `∫ K(t₁)(q₀, q) K(t₂)(q, q₁) dq` along `q = e^{iπ/4} x`, where the
/// integrand decays like a Gaussian; trapezoid rule on `[−L, L]`.
pub fn mehler_group_check(
    m: f64,
    omega: f64,
    hbar: f64,
    t1: f64,
    t2: f64,
    q0: f64,
    q1: f64,
    points: usize,
) -> Result<(C64, C64), KernelError> {
    let rot = C64::from_polar(1.0, FRAC_PI_4);
    let width = (hbar / m).sqrt() * (t1.min(t2).max(1e-3)).sqrt().recip().max(1.0);
    let half = 12.0 * width + q0.abs() + q1.abs();
    let h = 2.0 * half / (points - 1) as f64;
    let q0c = C64::new(q0, 0.0);
    let q1c = C64::new(q1, 0.0);
    let terms = (0..points)
        .into_par_iter()
        .map(|k| {
            let x = -half + k as f64 * h;
            let q = rot * x;
            let w = if k == 0 || k == points - 1 { 0.5 } else { 1.0 };
            Ok(mehler_complex(m, omega, hbar, t1, q0c, q)? * mehler_complex(m, omega, hbar, t2, q, q1c)? * w)
        })
        .collect::<Result<Vec<C64>, KernelError>>()?;
    let total: C64 = terms.iter().sum::<C64>() * rot * h;
    Ok((total, mehler_oracle(m, omega, hbar, t1 + t2, q0, q1)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelRow {
    pub q0: f64,
    pub q1: f64,
    pub discrete: C64,
    pub oracle: C64,
    pub rel_modulus_error: f64,
    pub phase_error: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelComparison {
    pub slices: usize,
    pub rows: Vec<KernelRow>,
    pub max_rel_modulus_error: f64,
    pub max_phase_error: f64,
    pub max_rel_error: f64,
}

impl KernelComparison {
    /// Rows `q0,q1,abs_discrete,abs_oracle,rel_error` with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "q0,q1,abs_discrete,abs_oracle,rel_error")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.q0,
                r.q1,
                r.discrete.norm(),
                r.oracle.norm(),
                r.rel_error
            )?;
        }
        Ok(())
    }
}

pub fn kernel_compare(
    spec: &DiscretizedAction,
    points: &[(f64, f64)],
) -> Result<KernelComparison, KernelError> {
    let rows = points
        .par_iter()
        .map(|&(q0, q1)| {
            let discrete = qpi_kernel_quadratic(spec, q0, q1)?;
            let oracle = oracle(spec, q0, q1)?;
            Ok(KernelRow {
                q0,
                q1,
                discrete,
                oracle,
                rel_modulus_error: (discrete.norm() - oracle.norm()).abs() / oracle.norm(),
                phase_error: (discrete / oracle).arg().abs(),
                rel_error: (discrete - oracle).norm() / oracle.norm(),
            })
        })
        .collect::<Result<Vec<_>, KernelError>>()?;
    let max = |f: fn(&KernelRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    Ok(KernelComparison {
        slices: spec.slices,
        max_rel_modulus_error: max(|r| r.rel_modulus_error),
        max_phase_error: max(|r| r.phase_error),
        max_rel_error: max(|r| r.rel_error),
        rows,
    })
}

/// Square grid of endpoint pairs on `[−extent, extent]²`.
pub fn endpoint_grid(extent: f64, n: usize) -> Vec<(f64, f64)> {
    let step = if n > 1 { 2.0 * extent / (n - 1) as f64 } else { 0.0 };
    let axis: Vec<f64> = (0..n).map(|i| -extent + i as f64 * step).collect();
    axis.iter()
        .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
        .collect()
}

/// Largest relative error for each slice count, and the ratio between
/// consecutive entries.
pub fn convergence_study(
    base: &DiscretizedAction,
    slices: &[usize],
    points: &[(f64, f64)],
) -> Result<Vec<(usize, f64, Option<f64>)>, KernelError> {
    let mut out: Vec<(usize, f64, Option<f64>)> = Vec::new();
    for &n in slices {
        let spec = DiscretizedAction { slices: n, ..*base };
        let err = kernel_compare(&spec, points)?.max_rel_error;
        let ratio = out.last().map(|(_, prev, _)| prev / err);
        out.push((n, err, ratio));
    }
    Ok(out)
}
