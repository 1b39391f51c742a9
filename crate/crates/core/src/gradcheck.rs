//! Finite-difference checks of the `n`-gradients on seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curvature::{energy_general, grad_n_trv, CurvaturePenalty, PenaltyKind};
use crate::grid::{Boundary, GridShape, ScalarField, VectorField2};
use crate::halm::{energy_with, grad_n, Elastica, ElasticaParams};

pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckReport {
    pub instances: usize,
    /// Largest `|fd - g| / |g|` over the elastica instances.
    pub elastica_max_rel_err: f64,
    /// Same for the TRV gradient.
    pub trv_max_rel_err: f64,
}

impl GradcheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.elastica_max_rel_err.max(self.trv_max_rel_err)
    }
}

/// A random feasible instance: data, `u`, unit `n`, `q >= 0`, and weights.
#[derive(Debug, Clone)]
pub struct Instance {
    pub f: ScalarField,
    pub u: ScalarField,
    pub n: VectorField2,
    pub q: ScalarField,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
}

impl Instance {
    pub fn random(rng: &mut ChaCha8Rng, shape: GridShape) -> Self {
        let mut field =
            |lo: f64, hi: f64| ScalarField::from_fn(shape, |_, _| rng.random_range(lo..hi));
        let f = field(0.0, 1.0);
        let u = field(0.0, 1.0);
        let q = field(0.0, 1.0);
        let angle = field(0.0, std::f64::consts::TAU);
        let n = VectorField2 {
            x: angle.map(f64::cos),
            y: angle.map(f64::sin),
        };
        Self {
            f,
            u,
            n,
            q,
            a: rng.random_range(0.1..1.0),
            b: rng.random_range(0.1..1.0),
            alpha: rng.random_range(0.5..5.0),
        }
    }

    fn params(&self) -> ElasticaParams {
        ElasticaParams {
            a: self.a,
            b: self.b,
            alpha: self.alpha,
            ..Default::default()
        }
    }
}

/// Central differences of `energy_fn` with respect to every entry of `n`.
/// `n` leaves the unit circle during probing; the energy formula is total.
pub fn finite_difference_n(
    n: &VectorField2,
    h: f64,
    mut energy_fn: impl FnMut(&VectorField2) -> f64,
) -> VectorField2 {
    let mut out = VectorField2::zeros(n.shape());
    let mut probe = n.clone();
    for component in 0..2 {
        for i in 0..n.x.values().len() {
            let base = component_mut(&mut probe, component)[i];
            component_mut(&mut probe, component)[i] = base + h;
            let plus = energy_fn(&probe);
            component_mut(&mut probe, component)[i] = base - h;
            let minus = energy_fn(&probe);
            component_mut(&mut probe, component)[i] = base;
            component_mut(&mut out, component)[i] = (plus - minus) / (2.0 * h);
        }
    }
    out
}

fn component_mut(v: &mut VectorField2, component: usize) -> &mut [f64] {
    if component == 0 {
        v.x.values_mut()
    } else {
        v.y.values_mut()
    }
}

fn rel_err(fd: &VectorField2, exact: &VectorField2) -> f64 {
    let scale = exact.norm().max(1e-12);
    fd.sub(exact).norm() / scale
}

/// Checks the elastica and TRV gradients on `instances` random 6x6 fields.
pub fn run(seed: u64, instances: usize) -> GradcheckReport {
    let shape = GridShape::new(6, 6, Boundary::Periodic).expect("6x6");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ee = 0.0f64;
    let mut trv = 0.0f64;
    for _ in 0..instances {
        let inst = Instance::random(&mut rng, shape);
        let p = inst.params();

        let exact = grad_n(&inst.u, &inst.n, &inst.q, &p);
        let fd = finite_difference_n(&inst.n, FD_STEP, |n| {
            energy_with(
                &Elastica { a: p.a, b: p.b },
                &inst.f,
                &inst.u,
                n,
                &inst.q,
                p.alpha,
            )
        });
        ee = ee.max(rel_err(&fd, &exact));

        let penalty = CurvaturePenalty::unchecked(PenaltyKind::Trv, inst.a, inst.b);
        let exact = grad_n_trv(&inst.u, &inst.n, &inst.q, inst.a, inst.b, inst.alpha);
        let fd = finite_difference_n(&inst.n, FD_STEP, |n| {
            energy_general(&inst.f, &inst.u, n, &inst.q, &penalty, inst.alpha)
        });
        trv = trv.max(rel_err(&fd, &exact));
    }
    GradcheckReport {
        instances,
        elastica_max_rel_err: ee,
        trv_max_rel_err: trv,
    }
}
