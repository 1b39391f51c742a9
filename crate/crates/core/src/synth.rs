//! Deterministic synthetic ground-truth images in `[0, 1]`.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::grid::{GridShape, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SynthKind {
    /// Filled disk of intensity 1 on 0, with a 2-pixel linear edge.
    Disk,
    /// Smooth linear ramp plus a broad radial bump.
    Shading,
    /// 8x8 checkerboard, pixel values are area averages so block edges that
    /// fall inside a pixel produce grey.
    Checker,
    /// Binary ring.
    Circle,
    /// Wavy horizontal bands with Gaussian profiles, resembling an OCT B-scan.
    Layered,
}

impl FromStr for SynthKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "disk" => Ok(SynthKind::Disk),
            "shading" => Ok(SynthKind::Shading),
            "checker" => Ok(SynthKind::Checker),
            "circle" => Ok(SynthKind::Circle),
            "layered" | "oct" => Ok(SynthKind::Layered),
            other => Err(format!(
                "unknown image kind `{other}` (expected disk, shading, checker, circle, layered)"
            )),
        }
    }
}

pub fn synth_image(kind: SynthKind, shape: GridShape) -> ScalarField {
    let (h, w) = (shape.height() as f64, shape.width() as f64);
    let (cy, cx) = ((h - 1.0) / 2.0, (w - 1.0) / 2.0);
    let side = h.min(w);
    let dist = move |r: usize, c: usize| (r as f64 - cy).hypot(c as f64 - cx);

    match kind {
        SynthKind::Disk => {
            let radius = 0.3 * side;
            ScalarField::from_fn(shape, |r, c| {
                ((radius - dist(r, c)) / 2.0 + 0.5).clamp(0.0, 1.0)
            })
        }
        SynthKind::Shading => {
            let spread = 0.25 * side;
            ScalarField::from_fn(shape, |r, c| {
                let d = dist(r, c);
                0.2 + 0.4 * c as f64 / (w - 1.0) + 0.35 * (-d * d / (2.0 * spread * spread)).exp()
            })
        }
        SynthKind::Checker => {
            let sx: Vec<f64> = (0..shape.width()).map(|c| mean_sign(c, w)).collect();
            let sy: Vec<f64> = (0..shape.height()).map(|r| mean_sign(r, h)).collect();
            ScalarField::from_fn(shape, |r, c| 0.5 * (1.0 - sx[c] * sy[r]))
        }
        SynthKind::Circle => {
            let (inner, outer) = (0.22 * side, 0.38 * side);
            ScalarField::from_fn(shape, |r, c| {
                let d = dist(r, c);
                if (inner..=outer).contains(&d) {
                    1.0
                } else {
                    0.0
                }
            })
        }
        SynthKind::Layered => {
            let layers = [(0.25, 0.85, 0.035), (0.45, 0.55, 0.05), (0.7, 0.7, 0.03)];
            ScalarField::from_fn(shape, |r, c| {
                let x = c as f64 / w;
                let y = r as f64 / h;
                let wave = 0.04 * (2.0 * PI * x).sin();
                let mut v = 0.1;
                for &(center, amp, width) in &layers {
                    let d = y - center - wave;
                    v += amp * (-d * d / (2.0 * width * width)).exp();
                }
                v.min(1.0)
            })
        }
    }
}

/// Average over pixel `[i, i + 1)` of a square wave that splits `[0, len)`
/// into 8 blocks: +1 on even blocks, -1 on odd ones.
fn mean_sign(i: usize, len: f64) -> f64 {
    let block = len / 8.0;
    let (lo, hi) = (i as f64, i as f64 + 1.0);
    let mut acc = 0.0;
    let mut x = lo;
    while x < hi {
        let idx = (x / block).floor();
        let edge = ((idx + 1.0) * block).min(hi);
        let sign = if idx as i64 % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * (edge - x);
        x = edge;
    }
    acc
}
