//! Solvers for the screened Poisson system `(I + alpha * (Dx+^T Dx+ + Dy+^T Dy+)) u = rhs`.
//!
//! The matrix is symmetric positive definite with smallest eigenvalue at
//! least one. Under periodic boundaries it is block circulant with circulant
//! blocks and is diagonalised by the 2-D DFT; under either boundary it can be
//! applied matrix-free and solved by conjugate gradients.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{ensure, Error, Result};
use crate::grid::{neg_laplacian, Boundary, GridShape, ScalarField};

pub const DEFAULT_CG_TOL: f64 = 1e-10;
pub const DEFAULT_CG_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, Copy)]
pub struct ScreenedPoissonSystem<'a> {
    pub alpha: f64,
    pub rhs: &'a ScalarField,
}

impl<'a> ScreenedPoissonSystem<'a> {
    pub fn new(alpha: f64, rhs: &'a ScalarField) -> Result<Self> {
        ensure(alpha.is_finite() && alpha >= 0.0, "alpha", || {
            format!("must be finite and nonnegative, got {alpha}")
        })?;
        Ok(Self { alpha, rhs })
    }

    pub fn shape(&self) -> GridShape {
        self.rhs.shape()
    }

    /// Applies the system matrix to `u`.
    pub fn apply(&self, u: &ScalarField) -> ScalarField {
        apply_operator(self.alpha, u)
    }
}

/// `u + alpha * (-div grad u)`
pub fn apply_operator(alpha: f64, u: &ScalarField) -> ScalarField {
    let lap = neg_laplacian(u);
    u.zip_map(&lap, |a, l| a + alpha * l)
}

/// DFT-diagonalised solver for periodic grids. Holds the FFT plans for one
/// grid size so repeated solves skip planning.
pub struct SpectralSolver {
    shape: GridShape,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    // eigenvalues of D1^T D1 along each axis
    row_symbol: Vec<f64>,
    col_symbol: Vec<f64>,
}

impl std::fmt::Debug for SpectralSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralSolver")
            .field("shape", &self.shape)
            .finish_non_exhaustive()
    }
}

fn difference_symbol(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let s = (PI * k as f64 / n as f64).sin();
            4.0 * s * s
        })
        .collect()
}

impl SpectralSolver {
    pub fn new(shape: GridShape) -> Result<Self> {
        if shape.boundary() != Boundary::Periodic {
            return Err(Error::BoundaryMismatch {
                expected: Boundary::Periodic,
                actual: shape.boundary(),
            });
        }
        let mut planner = FftPlanner::new();
        let (h, w) = (shape.height(), shape.width());
        Ok(Self {
            shape,
            row_fwd: planner.plan_fft_forward(w),
            row_inv: planner.plan_fft_inverse(w),
            col_fwd: planner.plan_fft_forward(h),
            col_inv: planner.plan_fft_inverse(h),
            row_symbol: difference_symbol(w),
            col_symbol: difference_symbol(h),
        })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn solve(&self, sys: &ScreenedPoissonSystem<'_>) -> Result<ScalarField> {
        let shape = sys.shape();
        if shape.boundary() != Boundary::Periodic {
            return Err(Error::BoundaryMismatch {
                expected: Boundary::Periodic,
                actual: shape.boundary(),
            });
        }
        crate::grid::check_same(&self.shape, &shape)?;
        let (h, w) = (shape.height(), shape.width());

        let mut buf: Vec<Complex<f64>> = sys
            .rhs
            .values()
            .iter()
            .map(|&v| Complex::new(v, 0.0))
            .collect();
        self.row_fwd.process(&mut buf);
        let mut cols = transpose(&buf, h, w);
        self.col_fwd.process(&mut cols);

        // cols is laid out as [col][row] frequency pairs
        for (k, chunk) in cols.chunks_exact_mut(h).enumerate() {
            let sx = self.row_symbol[k];
            for (l, z) in chunk.iter_mut().enumerate() {
                *z /= 1.0 + sys.alpha * (sx + self.col_symbol[l]);
            }
        }

        self.col_inv.process(&mut cols);
        let mut buf = transpose(&cols, w, h);
        self.row_inv.process(&mut buf);
        let scale = 1.0 / (h * w) as f64;
        let values = buf.iter().map(|z| z.re * scale).collect();
        ScalarField::new(shape, values)
    }
}

fn transpose(src: &[Complex<f64>], rows: usize, cols: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::new(0.0, 0.0); src.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = src[r * cols + c];
        }
    }
    out
}

/// One-shot spectral solve. Plans FFTs per call; keep a [`SpectralSolver`]
/// around for repeated solves on the same grid.
pub fn solve_fft(sys: &ScreenedPoissonSystem<'_>) -> Result<ScalarField> {
    SpectralSolver::new(sys.shape())?.solve(sys)
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: ScalarField,
    pub iterations: usize,
    /// `||A u - rhs|| / ||rhs||` at exit (absolute when `rhs = 0`).
    pub relative_residual: f64,
    pub converged: bool,
    /// Relative residual before the first iteration and after each one.
    pub residual_history: Vec<f64>,
}

pub fn solve_cg(sys: &ScreenedPoissonSystem<'_>, tol: f64, max_iter: usize) -> Result<CgOutcome> {
    solve_cg_from(sys, None, tol, max_iter)
}

/// Conjugate gradients on the matrix-free operator, optionally warm-started.
pub fn solve_cg_from(
    sys: &ScreenedPoissonSystem<'_>,
    initial: Option<&ScalarField>,
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    ensure(tol > 0.0, "tol", || format!("must be positive, got {tol}"))?;
    let shape = sys.shape();
    let b = sys.rhs;
    let b_norm = b.norm();
    let denom = if b_norm > 0.0 { b_norm } else { 1.0 };

    let mut x = match initial {
        Some(x0) => {
            crate::grid::check_same(&x0.shape(), &shape)?;
            x0.clone().with_boundary(shape.boundary())
        }
        None => ScalarField::zeros(shape),
    };
    let mut r = match initial {
        Some(_) => b.sub(&sys.apply(&x)),
        None => b.clone(),
    };
    let mut rr = r.norm_sq();
    let mut history = vec![rr.sqrt() / denom];
    if rr.sqrt() <= tol * b_norm || rr == 0.0 {
        return Ok(CgOutcome {
            solution: x,
            iterations: 0,
            relative_residual: rr.sqrt() / denom,
            converged: true,
            residual_history: history,
        });
    }

    let mut p = r.clone();
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iter {
        let ap = sys.apply(&p);
        let step = rr / p.dot(&ap);
        for ((xi, pi), (ri, api)) in x
            .values_mut()
            .iter_mut()
            .zip(p.values())
            .zip(r.values_mut().iter_mut().zip(ap.values()))
        {
            *xi += step * pi;
            *ri -= step * api;
        }
        iterations += 1;
        let rr_next = r.norm_sq();
        history.push(rr_next.sqrt() / denom);
        if rr_next.sqrt() <= tol * b_norm {
            converged = true;
            break;
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for (pi, ri) in p.values_mut().iter_mut().zip(r.values()) {
            *pi = ri + beta * *pi;
        }
    }

    // recurrence residual drifts from the true one; report the true value
    let true_residual = b.sub(&sys.apply(&x)).norm() / denom;
    Ok(CgOutcome {
        solution: x,
        iterations,
        relative_residual: true_residual,
        converged,
        residual_history: history,
    })
}
