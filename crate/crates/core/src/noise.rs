//! Seeded noise models.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{ensure, Result};
use crate::grid::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    /// `u + eta`, `eta ~ N(0, variance)`.
    GaussianAdditive { variance: f64 },
    /// `u (1 + eta)`, `eta ~ N(0, variance)`.
    SpeckleMultiplicative { variance: f64 },
}

impl NoiseKind {
    pub fn variance(&self) -> f64 {
        match *self {
            NoiseKind::GaussianAdditive { variance }
            | NoiseKind::SpeckleMultiplicative { variance } => variance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(variance: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::GaussianAdditive { variance },
            seed,
        }
    }

    pub fn speckle(variance: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::SpeckleMultiplicative { variance },
            seed,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Degrades `u`; the result is not clamped.
pub fn add_noise(u: &ScalarField, spec: &NoiseSpec) -> Result<ScalarField> {
    add_noise_with(u, spec.kind, &mut spec.rng())
}

/// Like [`add_noise`] but draws from a caller-owned generator, so several
/// channels can share one seeded stream.
pub fn add_noise_with(
    u: &ScalarField,
    kind: NoiseKind,
    rng: &mut ChaCha8Rng,
) -> Result<ScalarField> {
    let variance = kind.variance();
    ensure(variance > 0.0 && variance.is_finite(), "variance", || {
        format!("must be positive, got {variance}")
    })?;
    let normal = Normal::new(0.0, variance.sqrt()).expect("positive finite std");
    let mut out = u.clone();
    for v in out.values_mut() {
        let eta = normal.sample(rng);
        *v = match kind {
            NoiseKind::GaussianAdditive { .. } => *v + eta,
            NoiseKind::SpeckleMultiplicative { .. } => *v * (1.0 + eta),
        };
    }
    Ok(out)
}
