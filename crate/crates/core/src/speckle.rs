//! Log-domain despeckling.
//!
//! Multiplicative speckle becomes approximately additive after a logarithm.
//! [`log_compress`] maps `f >= 0` to `log(f + EPS)` rescaled into `[0, 1]`
//! and remembers the affine map so [`exp_expand`] can undo it.

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::halm::{halm_solve, ElasticaParams, Solution};

pub const EPS: f64 = 1e-6;

/// Affine map applied after the logarithm: `g = (log(f + EPS) - offset) / scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTransform {
    pub offset: f64,
    pub scale: f64,
}

pub fn log_compress(f: &ScalarField) -> Result<(ScalarField, LogTransform)> {
    if let Some(&bad) = f.values().iter().find(|&&v| v < 0.0 || v.is_nan()) {
        return Err(Error::NegativeInput(bad));
    }
    let logged = f.map(|v| (v + EPS).ln());
    let lo = logged
        .values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = logged
        .values()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = if hi > lo { hi - lo } else { 1.0 };
    let t = LogTransform { offset: lo, scale };
    Ok((logged.map(|v| (v - t.offset) / t.scale), t))
}

pub fn exp_expand(g: &ScalarField, t: &LogTransform) -> ScalarField {
    g.map(|v| (v * t.scale + t.offset).exp() - EPS)
}

/// `log_compress -> halm_solve -> exp_expand`. Negative samples, which
/// multiplicative noise can produce on dark pixels, are clamped to zero first.
pub fn despeckle(f: &ScalarField, params: &ElasticaParams) -> Result<(ScalarField, Solution)> {
    let clamped = f.map(|v| v.max(0.0));
    let (g, t) = log_compress(&clamped)?;
    let sol = halm_solve(&g, params)?;
    Ok((exp_expand(&sol.u, &t), sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Boundary, GridShape};

    fn shape() -> GridShape {
        GridShape::new(5, 7, Boundary::Periodic).unwrap()
    }

    #[test]
    fn round_trip() {
        let f = ScalarField::from_fn(shape(), |r, c| ((r * 7 + c) as f64 * 0.37).sin().abs());
        let (g, t) = log_compress(&f).unwrap();
        assert!(g.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(exp_expand(&g, &t).max_abs_diff(&f) < 1e-9);
    }

    #[test]
    fn zero_and_constant_inputs() {
        let zero = ScalarField::zeros(shape());
        let (g, t) = log_compress(&zero).unwrap();
        assert_eq!(t.offset, EPS.ln());
        assert!(exp_expand(&g, &t).norm_inf() < 1e-9);

        let c = ScalarField::filled(shape(), 0.3);
        let (g, t) = log_compress(&c).unwrap();
        let back = exp_expand(&g, &t);
        assert!(back.max_abs_diff(&c) < 1e-9);
    }

    #[test]
    fn negative_input_rejected() {
        let mut f = ScalarField::filled(shape(), 0.5);
        f.set(2, 3, -0.1);
        assert_eq!(log_compress(&f).unwrap_err(), Error::NegativeInput(-0.1));
    }
}
