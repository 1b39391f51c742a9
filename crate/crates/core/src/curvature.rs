//! General curvature penalties `phi(kappa)` and the solver variant for them.
//!
//! | kind | `phi(kappa)`            |
//! |------|-------------------------|
//! | TSC  | `a + b kappa^2`         |
//! | TRV  | `sqrt(a + b kappa^2)`   |
//! | TAC  | `a + b |kappa|`         |
//!
//! TSC is the elastica integrand. TAC is nonsmooth at `kappa = 0`, so it can
//! be evaluated but not solved for.

use crate::error::{ensure, Error, Result};
use crate::grid::{ScalarField, VectorField2};
use crate::halm::{
    energy_with, grad_n_with, power_iteration, solve_with, update_q_with, CurvatureTerm, Elastica,
    ElasticaParams, LipschitzBound, Solution, WarmStart, POWER_SAFETY,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyKind {
    /// Total square curvature.
    Tsc,
    /// Total rotation variation.
    Trv,
    /// Total absolute curvature.
    Tac,
}

impl PenaltyKind {
    pub fn name(self) -> &'static str {
        match self {
            PenaltyKind::Tsc => "TSC",
            PenaltyKind::Trv => "TRV",
            PenaltyKind::Tac => "TAC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvaturePenalty {
    kind: PenaltyKind,
    a: f64,
    b: f64,
}

impl CurvaturePenalty {
    pub fn new(kind: PenaltyKind, a: f64, b: f64) -> Result<Self> {
        ensure(a > 0.0 && a.is_finite(), "a", || {
            format!("must be positive, got {a}")
        })?;
        ensure(b > 0.0 && b.is_finite(), "b", || {
            format!("must be positive, got {b}")
        })?;
        Ok(Self { kind, a, b })
    }

    pub fn tsc(a: f64, b: f64) -> Result<Self> {
        Self::new(PenaltyKind::Tsc, a, b)
    }

    pub fn trv(a: f64, b: f64) -> Result<Self> {
        Self::new(PenaltyKind::Trv, a, b)
    }

    pub fn tac(a: f64, b: f64) -> Result<Self> {
        Self::new(PenaltyKind::Tac, a, b)
    }

    /// Builds a penalty without the positivity check. Used where a weight is
    /// deliberately zero, e.g. reduction tests.
    pub fn unchecked(kind: PenaltyKind, a: f64, b: f64) -> Self {
        Self { kind, a, b }
    }

    pub fn kind(&self) -> PenaltyKind {
        self.kind
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn phi(&self, kappa: f64) -> f64 {
        match self.kind {
            PenaltyKind::Tsc => self.a + self.b * kappa * kappa,
            PenaltyKind::Trv => (self.a + self.b * kappa * kappa).sqrt(),
            PenaltyKind::Tac => self.a + self.b * kappa.abs(),
        }
    }

    /// Derivative of `phi`. For TAC this is the one-sided slope `b sign(kappa)`
    /// (zero at the kink).
    pub fn phi_prime(&self, kappa: f64) -> f64 {
        match self.kind {
            PenaltyKind::Tsc => 2.0 * self.b * kappa,
            PenaltyKind::Trv => self.b * kappa / (self.a + self.b * kappa * kappa).sqrt(),
            PenaltyKind::Tac if kappa == 0.0 => 0.0,
            PenaltyKind::Tac => self.b * kappa.signum(),
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.kind != PenaltyKind::Tac
    }
}

impl CurvatureTerm for CurvaturePenalty {
    fn phi(&self, kappa: f64) -> f64 {
        CurvaturePenalty::phi(self, kappa)
    }

    fn phi_prime(&self, kappa: f64) -> f64 {
        CurvaturePenalty::phi_prime(self, kappa)
    }

    fn lipschitz(&self, q: &ScalarField, alpha: f64, warm: &mut WarmStart) -> LipschitzBound {
        match self.kind {
            PenaltyKind::Tsc => Elastica {
                a: self.a,
                b: self.b,
            }
            .lipschitz(q, alpha, warm),
            // phi'' = a b / (a + b k^2)^{3/2} <= b / sqrt(a); the coupling
            // part alpha q^2 is bounded by power iteration.
            PenaltyKind::Trv | PenaltyKind::Tac => {
                let q_max = q.norm_inf();
                let curvature = 16.0 * self.b / self.a.sqrt() * q_max;
                let coupling_analytic = alpha * q_max * q_max;
                let coupling = if coupling_analytic == 0.0 {
                    0.0
                } else {
                    let zero = ScalarField::zeros(q.shape());
                    let rho = power_iteration(&zero, q, alpha, warm);
                    (POWER_SAFETY * rho).min(coupling_analytic)
                };
                LipschitzBound {
                    estimate: curvature + coupling,
                    analytic: curvature + coupling_analytic,
                }
            }
        }
    }
}

/// Smooth part of the general penalised energy.
pub fn energy_general(
    f: &ScalarField,
    u: &ScalarField,
    n: &VectorField2,
    q: &ScalarField,
    penalty: &CurvaturePenalty,
    alpha: f64,
) -> f64 {
    energy_with(penalty, f, u, n, q, alpha)
}

/// `n`-gradient of the general energy for any smooth penalty.
pub fn grad_n_general(
    u: &ScalarField,
    n: &VectorField2,
    q: &ScalarField,
    penalty: &CurvaturePenalty,
    alpha: f64,
) -> VectorField2 {
    grad_n_with(penalty, u, n, q, alpha)
}

/// `n`-gradient of the TRV energy.
pub fn grad_n_trv(
    u: &ScalarField,
    n: &VectorField2,
    q: &ScalarField,
    a: f64,
    b: f64,
    alpha: f64,
) -> VectorField2 {
    grad_n_with(
        &CurvaturePenalty::unchecked(PenaltyKind::Trv, a, b),
        u,
        n,
        q,
        alpha,
    )
}

/// Closed-form `q`-step with coefficient `phi((div n)_i)`.
pub fn update_q_general(
    u_next: &ScalarField,
    n_next: &VectorField2,
    penalty: &CurvaturePenalty,
    alpha: f64,
) -> ScalarField {
    update_q_with(penalty, u_next, n_next, alpha)
}

/// Same iteration as [`crate::halm::halm_solve`] with the curvature integrand
/// replaced by `penalty`. The curvature weights come from `penalty`;
/// `params.a` and `params.b` are not read.
pub fn halm_solve_general(
    f: &ScalarField,
    penalty: &CurvaturePenalty,
    params: &ElasticaParams,
) -> Result<Solution> {
    if !penalty.is_smooth() {
        return Err(Error::UnsupportedPenalty(penalty.kind.name()));
    }
    params.validate_iteration()?;
    match penalty.kind {
        // route through the same term type as halm_solve so traces match bit for bit
        PenaltyKind::Tsc => solve_with(
            &Elastica {
                a: penalty.a,
                b: penalty.b,
            },
            f,
            params,
        ),
        _ => solve_with(penalty, f, params),
    }
}
