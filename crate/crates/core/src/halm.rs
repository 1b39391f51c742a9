//! Hybrid alternating minimization for the penalised Euler elastica energy.
//!
//! The image gradient is split as `grad u = q * n` with `q >= 0` and `|n| = 1`
//! pointwise, and the bilinear constraint is relaxed into a quadratic penalty:
//!
//! ```text
//! E(u, n, q) = sum_i phi((div n)_i) q_i + 1/2 |u - f|^2 + alpha/2 |grad u - q n|^2
//! ```
//!
//! with `phi(k) = a + b k^2` for the elastica model. Each outer iteration
//! minimises exactly in `u` (a screened Poisson solve), takes one projected
//! gradient step in `n`, and minimises exactly in `q` (a pointwise threshold).
//!
//! The driver is shared with the general curvature penalties in
//! [`crate::curvature`]; only `phi`, `phi'` and the Lipschitz estimate of the
//! `n`-gradient differ between models.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure, Result};
use crate::grid::{
    div, forward_x, forward_y, grad, project_sphere, Boundary, ScalarField, VectorField2,
    DEFAULT_FALLBACK,
};
use crate::linsolve::{
    solve_cg_from, ScreenedPoissonSystem, SpectralSolver, DEFAULT_CG_MAX_ITER, DEFAULT_CG_TOL,
};

/// Power-iteration steps used by the Lipschitz estimate.
pub const POWER_ITERATIONS: usize = 50;
/// Steps used when the previous outer iteration's eigenvector is available.
pub const POWER_WARM_ITERATIONS: usize = 10;
/// Multiplier applied to the power-iteration eigenvalue estimate.
pub const POWER_SAFETY: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    Fixed(f64),
    /// `tau_k = safety / L(q^k)` with `safety` in `(0, 1)`.
    Adaptive {
        safety: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticaParams {
    /// Length weight.
    pub a: f64,
    /// Curvature weight.
    pub b: f64,
    /// Penalty on `grad u - q n`.
    pub alpha: f64,
    pub step: StepPolicy,
    /// Stop once `|u^{k+1} - u^k| / |u^k|` drops below this (tested from the
    /// second iteration on).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ElasticaParams {
    fn default() -> Self {
        Self {
            a: 0.015,
            b: 0.005,
            alpha: 4.0,
            step: StepPolicy::Fixed(0.1),
            tol: 1e-5,
            max_iter: 500,
        }
    }
}

impl ElasticaParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.a > 0.0 && self.a.is_finite(), "a", || {
            format!("must be positive, got {}", self.a)
        })?;
        ensure(self.b > 0.0 && self.b.is_finite(), "b", || {
            format!("must be positive, got {}", self.b)
        })?;
        self.validate_iteration()
    }

    /// Checks everything except the curvature weights.
    pub(crate) fn validate_iteration(&self) -> Result<()> {
        ensure(self.alpha > 0.0 && self.alpha.is_finite(), "alpha", || {
            format!("must be positive, got {}", self.alpha)
        })?;
        ensure(self.tol > 0.0, "tol", || {
            format!("must be positive, got {}", self.tol)
        })?;
        ensure(self.max_iter >= 1, "max_iter", || {
            "must be at least 1".into()
        })?;
        match self.step {
            StepPolicy::Fixed(tau) => ensure(tau > 0.0 && tau.is_finite(), "tau", || {
                format!("must be positive, got {tau}")
            }),
            StepPolicy::Adaptive { safety } => {
                ensure(safety > 0.0 && safety < 1.0, "safety", || {
                    format!("must lie in (0, 1), got {safety}")
                })
            }
        }
    }
}

/// Current iterate `(u, n, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub u: ScalarField,
    pub n: VectorField2,
    pub q: ScalarField,
    pub k: usize,
}

impl SolverState {
    /// `u = f`, `n = grad f / |grad f|`, `q = |grad f|`.
    pub fn initial(f: &ScalarField) -> Self {
        let g = grad(f);
        Self {
            u: f.clone(),
            n: project_sphere(&g, DEFAULT_FALLBACK),
            q: g.magnitude(),
            k: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub k: usize,
    /// Smooth energy at the new iterate.
    pub energy: f64,
    pub rel_err: f64,
    pub step_tau: f64,
    /// Milliseconds since the solve started.
    pub wall_time_ms: f64,
    /// Lipschitz bound of the `n`-gradient at `q^k`.
    pub lipschitz: f64,
    pub du_norm: f64,
    pub dn_norm: f64,
    pub dq_norm: f64,
    /// `2 alpha |dq| + (2 gamma + 1/tau) |dn|`, an upper bound on the distance
    /// of the subdifferential to zero, where `gamma` is the running maximum
    /// of `lipschitz`.
    pub stationarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    /// Energy at the initial iterate.
    pub initial_energy: f64,
    pub records: Vec<IterRecord>,
    pub converged: bool,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_rel_err(&self) -> Option<f64> {
        self.records.last().map(|r| r.rel_err)
    }

    /// Energies starting with the initial one.
    pub fn energies(&self) -> Vec<f64> {
        std::iter::once(self.initial_energy)
            .chain(self.records.iter().map(|r| r.energy))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: ScalarField,
    pub n: VectorField2,
    pub q: ScalarField,
    pub trace: SolveTrace,
}

/// Upper bounds on the largest eigenvalue of the `n`-Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzBound {
    /// Tight estimate used for step sizing.
    pub estimate: f64,
    /// Always valid, possibly loose.
    pub analytic: f64,
}

/// The curvature integrand `phi` of a model.
pub(crate) trait CurvatureTerm: Sync {
    fn phi(&self, kappa: f64) -> f64;
    fn phi_prime(&self, kappa: f64) -> f64;
    fn lipschitz(&self, q: &ScalarField, alpha: f64, warm: &mut WarmStart) -> LipschitzBound;
}

/// Dominant eigenvector from the previous Lipschitz estimate. `q` changes
/// slowly between outer iterations, so restarting from it needs few steps.
#[derive(Debug, Clone, Default)]
pub(crate) struct WarmStart(Option<VectorField2>);

#[derive(Debug, Clone, Copy)]
pub(crate) struct Elastica {
    pub a: f64,
    pub b: f64,
}

impl CurvatureTerm for Elastica {
    fn phi(&self, kappa: f64) -> f64 {
        self.a + self.b * kappa * kappa
    }

    fn phi_prime(&self, kappa: f64) -> f64 {
        2.0 * self.b * kappa
    }

    fn lipschitz(&self, q: &ScalarField, alpha: f64, warm: &mut WarmStart) -> LipschitzBound {
        let q_max = q.norm_inf();
        let analytic = 16.0 * self.b * q_max + alpha * q_max * q_max;
        if analytic == 0.0 {
            return LipschitzBound {
                estimate: 0.0,
                analytic,
            };
        }
        let weight = q.map(|v| 2.0 * self.b * v);
        let rho = power_iteration(&weight, q, alpha, warm);
        LipschitzBound {
            estimate: (POWER_SAFETY * rho).min(analytic),
            analytic,
        }
    }
}

/// `v -> D^T (w * D v) + alpha q^2 v` with `D v = div v`.
pub(crate) fn hessian_apply(
    weight: &ScalarField,
    q: &ScalarField,
    alpha: f64,
    v: &VectorField2,
) -> VectorField2 {
    let inner = div(v).zip_map(weight, |d, w| d * w);
    grad(&inner)
        .scale(-1.0)
        .add_scaled(alpha, &v.scale_by(&q.map(|s| s * s)))
}

/// Rayleigh quotient after a fixed number of power iterations, from `warm`
/// when set and from a fixed pseudo-random vector otherwise.
pub(crate) fn power_iteration(
    weight: &ScalarField,
    q: &ScalarField,
    alpha: f64,
    warm: &mut WarmStart,
) -> f64 {
    let shape = q.shape();
    let (mut v, steps) = match warm.0.take() {
        Some(v) => (v, POWER_WARM_ITERATIONS),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            let mut sample = || ScalarField::from_fn(shape, |_, _| rng.random_range(-1.0..1.0));
            let v = VectorField2 {
                x: sample(),
                y: sample(),
            };
            (v, POWER_ITERATIONS)
        }
    };
    let mut rho = 0.0;
    for _ in 0..steps {
        let norm = v.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let unit = v.scale(1.0 / norm);
        let hv = hessian_apply(weight, q, alpha, &unit);
        rho = unit.dot(&hv);
        v = hv;
    }
    let norm = v.norm();
    if norm > 0.0 {
        warm.0 = Some(v.scale(1.0 / norm));
    }
    rho.max(0.0)
}

/// Solver for the `u`-subproblem on a fixed grid: spectral for periodic
/// boundaries, warm-started conjugate gradients for Neumann.
#[derive(Debug)]
pub enum USolver {
    Spectral(SpectralSolver),
    Cg { tol: f64, max_iter: usize },
}

impl USolver {
    pub fn for_field(f: &ScalarField) -> Result<Self> {
        Ok(match f.shape().boundary() {
            Boundary::Periodic => USolver::Spectral(SpectralSolver::new(f.shape())?),
            Boundary::Neumann => USolver::Cg {
                tol: DEFAULT_CG_TOL,
                max_iter: DEFAULT_CG_MAX_ITER,
            },
        })
    }

    fn solve(&self, alpha: f64, rhs: &ScalarField, guess: &ScalarField) -> Result<ScalarField> {
        let sys = ScreenedPoissonSystem::new(alpha, rhs)?;
        match self {
            USolver::Spectral(s) => s.solve(&sys),
            USolver::Cg { tol, max_iter } => {
                Ok(solve_cg_from(&sys, Some(guess), *tol, *max_iter)?.solution)
            }
        }
    }
}

/// `(div n)_i`, the discrete curvature of the level lines.
pub fn curvature(n: &VectorField2) -> ScalarField {
    div(n)
}

pub(crate) fn energy_with<T: CurvatureTerm + ?Sized>(
    term: &T,
    f: &ScalarField,
    u: &ScalarField,
    n: &VectorField2,
    q: &ScalarField,
    alpha: f64,
) -> f64 {
    let kappa = div(n);
    let reg: f64 = kappa
        .values()
        .iter()
        .zip(q.values())
        .map(|(&k, &qi)| term.phi(k) * qi)
        .sum();
    let fidelity = 0.5 * u.sub(f).norm_sq();
    let g = grad(u);
    let mut penalty = 0.0;
    for i in 0..u.values().len() {
        let qi = q.values()[i];
        let ex = g.x.values()[i] - qi * n.x.values()[i];
        let ey = g.y.values()[i] - qi * n.y.values()[i];
        penalty += ex * ex + ey * ey;
    }
    reg + fidelity + 0.5 * alpha * penalty
}

pub(crate) fn grad_n_with<T: CurvatureTerm + ?Sized>(
    term: &T,
    u: &ScalarField,
    n: &VectorField2,
    q: &ScalarField,
    alpha: f64,
) -> VectorField2 {
    // (D^-)^T = -D^+
    let kappa = div(n);
    let weighted = kappa.zip_map(q, |k, qi| qi * term.phi_prime(k));
    let curv_x = forward_x(&weighted);
    let curv_y = forward_y(&weighted);
    let ux = forward_x(u);
    let uy = forward_y(u);
    let len = u.values().len();
    let mut gx = Vec::with_capacity(len);
    let mut gy = Vec::with_capacity(len);
    for i in 0..len {
        let qi = q.values()[i];
        gx.push(-curv_x.values()[i] + alpha * qi * (qi * n.x.values()[i] - ux.values()[i]));
        gy.push(-curv_y.values()[i] + alpha * qi * (qi * n.y.values()[i] - uy.values()[i]));
    }
    let shape = u.shape();
    VectorField2 {
        x: ScalarField::new(shape, gx).expect("grid length"),
        y: ScalarField::new(shape, gy).expect("grid length"),
    }
}

pub(crate) fn update_n_with<T: CurvatureTerm + ?Sized>(
    term: &T,
    state: &SolverState,
    u_next: &ScalarField,
    tau: f64,
    alpha: f64,
) -> VectorField2 {
    let g = grad_n_with(term, u_next, &state.n, &state.q, alpha);
    project_sphere(&state.n.add_scaled(-tau, &g), DEFAULT_FALLBACK)
}

pub(crate) fn update_q_with<T: CurvatureTerm + ?Sized>(
    term: &T,
    u_next: &ScalarField,
    n_next: &VectorField2,
    alpha: f64,
) -> ScalarField {
    let g = grad(u_next);
    let proj = g.pointwise_dot(n_next);
    let kappa = div(n_next);
    proj.zip_map(&kappa, |p, k| (p - term.phi(k) / alpha).max(0.0))
}

fn u_rhs(f: &ScalarField, n: &VectorField2, q: &ScalarField, alpha: f64) -> ScalarField {
    // f + alpha (Dx+^T (q n1) + Dy+^T (q n2)) = f - alpha div(q n)
    let d = div(&n.scale_by(q));
    f.zip_map(&d, |fi, di| fi - alpha * di)
}

fn update_u_with(
    solver: &USolver,
    f: &ScalarField,
    state: &SolverState,
    alpha: f64,
) -> Result<ScalarField> {
    let rhs = u_rhs(f, &state.n, &state.q, alpha);
    solver.solve(alpha, &rhs, &state.u)
}

/// Penalised elastica energy (indicator terms omitted; they vanish on
/// feasible iterates).
pub fn energy(
    f: &ScalarField,
    u: &ScalarField,
    n: &VectorField2,
    q: &ScalarField,
    p: &ElasticaParams,
) -> f64 {
    debug_assert!(
        q.values().iter().all(|&v| v >= 0.0),
        "q must be nonnegative"
    );
    debug_assert!(
        n.x.values()
            .iter()
            .zip(n.y.values())
            .all(|(x, y)| (x.hypot(*y) - 1.0).abs() < 1e-9),
        "n must be unit length"
    );
    energy_with(&Elastica { a: p.a, b: p.b }, f, u, n, q, p.alpha)
}

/// Exact minimiser of the energy in `u` with `n` and `q` held fixed.
pub fn update_u(f: &ScalarField, state: &SolverState, p: &ElasticaParams) -> Result<ScalarField> {
    let solver = USolver::for_field(f)?;
    update_u_with(&solver, f, state, p.alpha)
}

/// Gradient of the energy with respect to `n = (n1, n2)`.
pub fn grad_n(
    u: &ScalarField,
    n: &VectorField2,
    q: &ScalarField,
    p: &ElasticaParams,
) -> VectorField2 {
    grad_n_with(&Elastica { a: p.a, b: p.b }, u, n, q, p.alpha)
}

/// One projected gradient step in `n` from `state.n`, evaluated at `u_next`.
pub fn update_n(
    state: &SolverState,
    u_next: &ScalarField,
    tau: f64,
    p: &ElasticaParams,
) -> VectorField2 {
    update_n_with(&Elastica { a: p.a, b: p.b }, state, u_next, tau, p.alpha)
}

/// Closed-form `q`-step: `max(0, <grad u, n> - (a + b (div n)^2) / alpha)`.
pub fn update_q(u_next: &ScalarField, n_next: &VectorField2, p: &ElasticaParams) -> ScalarField {
    update_q_with(&Elastica { a: p.a, b: p.b }, u_next, n_next, p.alpha)
}

/// Upper bound on the largest eigenvalue of the `n`-Hessian `Q(q)`.
pub fn lipschitz_n(q: &ScalarField, p: &ElasticaParams) -> f64 {
    Elastica { a: p.a, b: p.b }
        .lipschitz(q, p.alpha, &mut WarmStart::default())
        .estimate
}

/// Runs the elastica solver from `u = f` until the relative change of `u`
/// drops below `p.tol` or `p.max_iter` iterations have run.
pub fn halm_solve(f: &ScalarField, p: &ElasticaParams) -> Result<Solution> {
    p.validate()?;
    solve_with(&Elastica { a: p.a, b: p.b }, f, p)
}

pub(crate) fn solve_with<T: CurvatureTerm + ?Sized>(
    term: &T,
    f: &ScalarField,
    p: &ElasticaParams,
) -> Result<Solution> {
    let start = Instant::now();
    let solver = USolver::for_field(f)?;
    let alpha = p.alpha;
    let mut state = SolverState::initial(f);
    let initial_energy = energy_with(term, f, &state.u, &state.n, &state.q, alpha);
    let mut records = Vec::new();
    let mut converged = false;
    let mut gamma: f64 = 0.0;
    let mut warm = WarmStart::default();

    while state.k < p.max_iter {
        let u_next = update_u_with(&solver, f, &state, alpha)?;

        let bound = term.lipschitz(&state.q, alpha, &mut warm);
        let mut lipschitz = bound.estimate;
        let (mut tau, mut n_next) = n_step(term, &state, &u_next, p.step, lipschitz, alpha);
        if let StepPolicy::Adaptive { .. } = p.step {
            // The power-iteration estimate is not a certified bound; fall
            // back to the analytic one if sufficient decrease fails.
            let before = energy_with(term, f, &u_next, &state.n, &state.q, alpha);
            let after = energy_with(term, f, &u_next, &n_next, &state.q, alpha);
            let dn = n_next.sub(&state.n).norm_sq();
            let required = 0.5 * (1.0 / tau - lipschitz) * dn;
            let slack = 1e-12 * before.abs().max(1.0);
            if before - after < required - slack && lipschitz < bound.analytic {
                lipschitz = bound.analytic;
                (tau, n_next) = n_step(term, &state, &u_next, p.step, lipschitz, alpha);
            }
        }

        let q_next = update_q_with(term, &u_next, &n_next, alpha);

        let du_norm = u_next.sub(&state.u).norm();
        let u_norm = state.u.norm();
        let rel_err = if u_norm > 0.0 {
            du_norm / u_norm
        } else {
            du_norm
        };
        let dn_norm = n_next.sub(&state.n).norm();
        let dq_norm = q_next.sub(&state.q).norm();
        gamma = gamma.max(lipschitz);

        state = SolverState {
            u: u_next,
            n: n_next,
            q: q_next,
            k: state.k + 1,
        };
        let energy = energy_with(term, f, &state.u, &state.n, &state.q, alpha);
        records.push(IterRecord {
            k: state.k,
            energy,
            rel_err,
            step_tau: tau,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            lipschitz,
            du_norm,
            dn_norm,
            dq_norm,
            stationarity: 2.0 * alpha * dq_norm + (2.0 * gamma + 1.0 / tau) * dn_norm,
        });

        // u^1 = u^0 exactly because (n^0, q^0) reproduce grad f, so the
        // first relative change carries no information.
        if state.k >= 2 && rel_err < p.tol {
            converged = true;
            break;
        }
    }

    Ok(Solution {
        u: state.u,
        n: state.n,
        q: state.q,
        trace: SolveTrace {
            initial_energy,
            records,
            converged,
        },
    })
}

fn n_step<T: CurvatureTerm + ?Sized>(
    term: &T,
    state: &SolverState,
    u_next: &ScalarField,
    policy: StepPolicy,
    lipschitz: f64,
    alpha: f64,
) -> (f64, VectorField2) {
    let tau = match policy {
        StepPolicy::Fixed(tau) => tau,
        // q = 0 everywhere makes the n-gradient vanish; any step works
        StepPolicy::Adaptive { safety } if lipschitz > 0.0 => safety / lipschitz,
        StepPolicy::Adaptive { .. } => 1.0,
    };
    (tau, update_n_with(term, state, u_next, tau, alpha))
}
