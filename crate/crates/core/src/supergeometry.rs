//! Graded matrices over a Grassmann algebra and first-order differential
//! operators on supertime `(t, θ, θ̄)`.
//!
//! A [`SuperMatrix`] has `p` even rows/columns followed by `q` odd ones.
//! Supertime is `p = 1, q = 2` with coordinate order `(t, θ, θ̄)`.

use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::grassmann::{GrassmannAlgebra, GrassmannError, Supernumber};
use crate::poly::Poly;
use crate::ring::{qi, Qi, Ring};

pub const THETA: &str = "θ";
pub const THETA_BAR: &str = "θ̄";

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SuperMatrixError {
    #[error("entry ({row}, {col}) has the wrong Grassmann parity")]
    GradingViolation { row: usize, col: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("odd-odd block has a singular body")]
    SingularOddBlock,
    #[error("even-even Schur complement has a singular body")]
    SingularEvenBlock,
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

/// The `{θ, θ̄}` algebra.
pub fn supertime_algebra() -> Arc<GrassmannAlgebra> {
    GrassmannAlgebra::new([THETA, THETA_BAR]).expect("two labels")
}

type Sn<R> = Supernumber<R>;
type Block<R> = Vec<Vec<Sn<R>>>;

#[derive(Clone, PartialEq)]
pub struct SuperMatrix<R: Ring> {
    even: usize,
    odd: usize,
    entries: Block<R>,
}

impl<R: Ring> std::fmt::Debug for SuperMatrix<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "SuperMatrix({}|{})", self.even, self.odd)?;
        for row in &self.entries {
            writeln!(f, "  {:?}", row)?;
        }
        Ok(())
    }
}

fn is_odd_index(even: usize, i: usize) -> bool {
    i >= even
}

impl<R: Ring> SuperMatrix<R> {
    pub fn new(even: usize, odd: usize, entries: Block<R>) -> Result<Self, SuperMatrixError> {
        let size = even + odd;
        if entries.len() != size || entries.iter().any(|r| r.len() != size) {
            return Err(SuperMatrixError::Shape(format!(
                "expected {}x{} entries",
                size, size
            )));
        }
        for (i, row) in entries.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let odd_entry = is_odd_index(even, i) != is_odd_index(even, j);
                let ok = if odd_entry { x.is_odd() } else { x.is_even() };
                if !ok {
                    return Err(SuperMatrixError::GradingViolation { row: i, col: j });
                }
            }
        }
        Ok(SuperMatrix { even, odd, entries })
    }

    pub fn identity(algebra: &Arc<GrassmannAlgebra>, even: usize, odd: usize) -> Self {
        let size = even + odd;
        let entries = (0..size)
            .map(|i| {
                (0..size)
                    .map(|j| {
                        if i == j {
                            Sn::one(algebra)
                        } else {
                            Sn::zero(algebra)
                        }
                    })
                    .collect()
            })
            .collect();
        SuperMatrix { even, odd, entries }
    }

    pub fn size(&self) -> usize {
        self.even + self.odd
    }

    pub fn signature(&self) -> (usize, usize) {
        (self.even, self.odd)
    }

    pub fn entry(&self, i: usize, j: usize) -> &Sn<R> {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &Block<R> {
        &self.entries
    }

    pub fn algebra(&self) -> &Arc<GrassmannAlgebra> {
        self.entries[0][0].algebra()
    }

    fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Block<R> {
        rows.map(|i| self.entries[i][cols.clone()].to_vec()).collect()
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SuperMatrixError> {
        if self.signature() != other.signature() {
            return Err(SuperMatrixError::Shape("signatures differ".into()));
        }
        Ok(SuperMatrix {
            even: self.even,
            odd: self.odd,
            entries: mat_mul(&self.entries, &other.entries)?,
        })
    }

    /// `sdet = det(A − B D⁻¹ C) / det(D)`.
    pub fn superdeterminant(&self) -> Result<Sn<R>, SuperMatrixError> {
        let (p, n) = (self.even, self.size());
        let a = self.block(0..p, 0..p);
        let b = self.block(0..p, p..n);
        let c = self.block(p..n, 0..p);
        let d = self.block(p..n, p..n);
        let d_inv = even_inverse(&d).map_err(|_| SuperMatrixError::SingularOddBlock)?;
        let det_d = even_det(&d);
        let schur = mat_sub(&a, &mat_mul(&mat_mul(&b, &d_inv)?, &c)?)?;
        let num = even_det(&schur);
        let inv_det_d = det_d
            .invert()
            .map_err(|_| SuperMatrixError::SingularOddBlock)?;
        Ok(num.try_mul(&inv_det_d)?)
    }

    /// Blockwise inverse through the Schur complement of the odd-odd block.
    pub fn inverse(&self) -> Result<Self, SuperMatrixError> {
        let (p, n) = (self.even, self.size());
        let a = self.block(0..p, 0..p);
        let b = self.block(0..p, p..n);
        let c = self.block(p..n, 0..p);
        let d = self.block(p..n, p..n);
        let d_inv = even_inverse(&d).map_err(|_| SuperMatrixError::SingularOddBlock)?;
        let schur = mat_sub(&a, &mat_mul(&mat_mul(&b, &d_inv)?, &c)?)?;
        let s_inv = even_inverse(&schur).map_err(|_| SuperMatrixError::SingularEvenBlock)?;
        let bd = mat_mul(&b, &d_inv)?;
        let dc = mat_mul(&d_inv, &c)?;
        let tl = s_inv.clone();
        let tr = mat_neg(&mat_mul(&s_inv, &bd)?);
        let bl = mat_neg(&mat_mul(&dc, &s_inv)?);
        let br = mat_add(&d_inv, &mat_mul(&mat_mul(&dc, &s_inv)?, &bd)?)?;
        let mut entries = Vec::with_capacity(n);
        for i in 0..p {
            let mut row = tl[i].clone();
            row.extend(tr[i].iter().cloned());
            entries.push(row);
        }
        for i in 0..n - p {
            let mut row = bl[i].clone();
            row.extend(br[i].iter().cloned());
            entries.push(row);
        }
        Ok(SuperMatrix {
            even: p,
            odd: n - p,
            entries,
        })
    }

    /// True when the even-even block is symmetric and the odd-odd block
    /// antisymmetric.
    pub fn has_metric_symmetry(&self) -> bool {
        let (p, n) = (self.even, self.size());
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (&self.entries[i][j], &self.entries[j][i]);
                if i < p && j < p && x != y {
                    return false;
                }
                if i >= p && j >= p && x != &-y {
                    return false;
                }
            }
        }
        true
    }
}

fn mat_mul<R: Ring>(x: &Block<R>, y: &Block<R>) -> Result<Block<R>, GrassmannError> {
    let rows = x.len();
    let inner = y.len();
    let cols = if inner == 0 { 0 } else { y[0].len() };
    let alg = x
        .iter()
        .flatten()
        .chain(y.iter().flatten())
        .next()
        .map(|s| Arc::clone(s.algebra()));
    let mut out = Vec::with_capacity(rows);
    for i in 0..rows {
        let mut row = Vec::with_capacity(cols);
        for j in 0..cols {
            let mut acc = Sn::zero(alg.as_ref().expect("non-empty"));
            for k in 0..inner {
                acc = acc.try_add(&x[i][k].try_mul(&y[k][j])?)?;
            }
            row.push(acc);
        }
        out.push(row);
    }
    Ok(out)
}

fn mat_add<R: Ring>(x: &Block<R>, y: &Block<R>) -> Result<Block<R>, GrassmannError> {
    x.iter()
        .zip(y)
        .map(|(rx, ry)| rx.iter().zip(ry).map(|(a, b)| a.try_add(b)).collect())
        .collect()
}

fn mat_neg<R: Ring>(x: &Block<R>) -> Block<R> {
    x.iter().map(|r| r.iter().map(|a| -a).collect()).collect()
}

fn mat_sub<R: Ring>(x: &Block<R>, y: &Block<R>) -> Result<Block<R>, GrassmannError> {
    mat_add(x, &mat_neg(y))
}

/// Determinant of a matrix of mutually commuting (even) entries.
pub fn even_det<R: Ring>(m: &Block<R>) -> Sn<R> {
    let n = m.len();
    match n {
        0 => panic!("empty block"),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = Sn::zero(m[0][0].algebra());
            for j in 0..n {
                let minor: Block<R> = m[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][j] * &even_det(&minor);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// Inverse of an even matrix by the adjugate formula.
pub fn even_inverse<R: Ring>(m: &Block<R>) -> Result<Block<R>, GrassmannError> {
    let n = m.len();
    let det_inv = even_det(m).invert()?;
    if n == 1 {
        return Ok(vec![vec![det_inv]]);
    }
    let mut out = vec![Vec::with_capacity(n); n];
    for (i, row) in out.iter_mut().enumerate() {
        for j in 0..n {
            // cofactor of (j, i)
            let minor: Block<R> = m
                .iter()
                .enumerate()
                .filter(|(r, _)| *r != j)
                .map(|(_, r)| {
                    r.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != i)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            let c = &even_det(&minor) * &det_inv;
            row.push(if (i + j) % 2 == 0 { c } else { -c });
        }
    }
    Ok(out)
}

/// Flat supertime metric `η_AB` in the order `(t, θ, θ̄)`.
pub fn eta<R: Ring>(algebra: &Arc<GrassmannAlgebra>) -> SuperMatrix<R> {
    let v = |k: i64| Sn::scalar(algebra, R::from_i64(k));
    SuperMatrix {
        even: 1,
        odd: 2,
        entries: vec![
            vec![v(1), v(0), v(0)],
            vec![v(0), v(0), v(-1)],
            vec![v(0), v(1), v(0)],
        ],
    }
}

/// Metric from a vierbein given as the matrix `V[A][M] = E^M_A` (rows are
/// flat indices). With `E^A_M = (V⁻¹)[M][A]`,
/// `g_MN = Σ_AB E^A_M η_AB (−1)^{(1+|B|)|M|} E^B_N`.
pub fn metric_from_vierbein<R: Ring>(
    v: &SuperMatrix<R>,
) -> Result<SuperMatrix<R>, SuperMatrixError> {
    if v.signature() != (1, 2) {
        return Err(SuperMatrixError::Shape("supertime vierbein is (1|2)".into()));
    }
    let inv = v.inverse()?;
    let alg = Arc::clone(v.algebra());
    let eta = eta::<R>(&alg);
    let parity = |i: usize| usize::from(i >= 1);
    let mut entries = vec![Vec::with_capacity(3); 3];
    for (m, row) in entries.iter_mut().enumerate() {
        for nn in 0..3 {
            let mut acc = Sn::zero(&alg);
            for a in 0..3 {
                for b in 0..3 {
                    let e = &eta.entries[a][b];
                    if e.is_zero() {
                        continue;
                    }
                    let t = &(&inv.entries[m][a] * e) * &inv.entries[nn][b];
                    let negative = ((1 + parity(b)) * parity(m)) % 2 == 1;
                    acc = if negative { &acc - &t } else { &acc + &t };
                }
            }
            row.push(acc);
        }
    }
    SuperMatrix::new(1, 2, entries)
}

/// Function on supertime: supernumber over `{θ, θ̄}` (possibly larger)
/// with coefficients polynomial in `t` (variable 0).
pub type SupertimeFunction<R> = Supernumber<Poly<R>>;

/// `F = t² − 2θ̄θ`.
pub fn supertime_distance(algebra: &Arc<GrassmannAlgebra>) -> SupertimeFunction<Qi> {
    let t = Poly::<Qi>::var(0);
    let t2 = Sn::scalar(algebra, &t * &t);
    let tbt = Sn::monomial(algebra, &[THETA_BAR, THETA], Poly::constant(qi(2, 1)))
        .expect("supertime generators");
    &t2 - &tbt
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupertimeOperator {
    X1,
    X2,
    X3,
    X4,
    X5,
    Omega,
    OmegaBar,
}

impl SupertimeOperator {
    pub const OSP: [SupertimeOperator; 5] = [
        SupertimeOperator::X1,
        SupertimeOperator::X2,
        SupertimeOperator::X3,
        SupertimeOperator::X4,
        SupertimeOperator::X5,
    ];
}

impl FromStr for SupertimeOperator {
    type Err = SuperMatrixError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "X1" => SupertimeOperator::X1,
            "X2" => SupertimeOperator::X2,
            "X3" => SupertimeOperator::X3,
            "X4" => SupertimeOperator::X4,
            "X5" => SupertimeOperator::X5,
            "Omega_H" => SupertimeOperator::Omega,
            "OmegaBar_H" => SupertimeOperator::OmegaBar,
            other => return Err(SuperMatrixError::UnknownOperator(other.to_string())),
        })
    }
}

/// Applies a supertime operator (left derivatives, generators multiply from
/// the left). The algebra must contain generators labelled `θ` and `θ̄`.
pub fn apply_operator<R: Ring>(
    op: SupertimeOperator,
    f: &SupertimeFunction<R>,
) -> Result<SupertimeFunction<R>, SuperMatrixError> {
    let alg = Arc::clone(f.algebra());
    let th = Sn::<Poly<R>>::generator(&alg, THETA)?;
    let tb = Sn::<Poly<R>>::generator(&alg, THETA_BAR)?;
    let t = Sn::scalar(&alg, Poly::<R>::var(0));
    let dt = f.map_coeffs(|p| p.derivative(0));
    let d_th = f.left_derivative(THETA)?;
    let d_tb = f.left_derivative(THETA_BAR)?;
    let k = |x: f64| Poly::constant(R::from_f64(x));
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    Ok(match op {
        SupertimeOperator::X1 => -(&tb * &d_th),
        SupertimeOperator::X2 => &th * &d_tb,
        SupertimeOperator::X3 => (&(&tb * &d_tb) - &(&th * &d_th)).scale(&k(-0.5)),
        SupertimeOperator::X4 => (&(&tb * &dt) - &(&t * &d_th)).scale(&k(-r2)),
        SupertimeOperator::X5 => (&(&th * &dt) + &(&t * &d_tb)).scale(&k(r2)),
        SupertimeOperator::Omega => -(&d_th + &(&tb * &dt)),
        SupertimeOperator::OmegaBar => &d_tb + &(&th * &dt),
    })
}

/// `{X, Y} f = X(Y f) + Y(X f)`.
pub fn anticommutator<R: Ring>(
    x: SupertimeOperator,
    y: SupertimeOperator,
    f: &SupertimeFunction<R>,
) -> Result<SupertimeFunction<R>, SuperMatrixError> {
    let xy = apply_operator(x, &apply_operator(y, f)?)?;
    let yx = apply_operator(y, &apply_operator(x, f)?)?;
    Ok(&xy + &yx)
}
