//! PSNR and SSIM for images with dynamic range `[0, 1]`.

use crate::error::{Error, Result};
use crate::grid::{check_same, ScalarField};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub ssim: f64,
}

impl MetricReport {
    pub fn compute(u: &ScalarField, reference: &ScalarField) -> Result<Self> {
        Ok(Self {
            psnr_db: psnr(u, reference)?,
            ssim: ssim(u, reference)?,
        })
    }

    /// Channel-wise metrics, averaged.
    pub fn compute_channels(u: &[ScalarField], reference: &[ScalarField]) -> Result<Self> {
        if u.len() != reference.len() || u.is_empty() {
            return Err(Error::InvalidParameter {
                name: "channels",
                reason: format!("{} vs {} channels", u.len(), reference.len()),
            });
        }
        let mut psnr_sum = 0.0;
        let mut ssim_sum = 0.0;
        for (a, b) in u.iter().zip(reference) {
            let m = Self::compute(a, b)?;
            psnr_sum += m.psnr_db;
            ssim_sum += m.ssim;
        }
        let k = u.len() as f64;
        Ok(Self {
            psnr_db: psnr_sum / k,
            ssim: ssim_sum / k,
        })
    }
}

/// `10 log10(P / |u - ref|^2)` with `P` the pixel count; `+inf` for identical
/// images.
pub fn psnr(u: &ScalarField, reference: &ScalarField) -> Result<f64> {
    check_same(&u.shape(), &reference.shape())?;
    let err = u.sub(reference).norm_sq();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (u.values().len() as f64 / err).log10())
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let center = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - center;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Half-sample symmetric reflection: `... b a | a b c ... | c b ...`.
fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

/// Separable Gaussian filter with symmetric padding.
fn blur(values: &[f64], h: usize, w: usize, kernel: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let radius = (SSIM_WINDOW / 2) as isize;
    let mut tmp = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (t, kv) in kernel.iter().enumerate() {
                let cc = reflect(c as isize + t as isize - radius, w);
                acc += kv * values[r * w + cc];
            }
            tmp[r * w + c] = acc;
        }
    }
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (t, kv) in kernel.iter().enumerate() {
                let rr = reflect(r as isize + t as isize - radius, h);
                acc += kv * tmp[rr * w + c];
            }
            out[r * w + c] = acc;
        }
    }
    out
}

/// Mean SSIM over the full image, 11x11 Gaussian window with sigma 1.5.
pub fn ssim(u: &ScalarField, reference: &ScalarField) -> Result<f64> {
    check_same(&u.shape(), &reference.shape())?;
    let (h, w) = (u.shape().height(), u.shape().width());
    let kernel = gaussian_kernel();
    let x = u.values();
    let y = reference.values();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = blur(x, h, w, &kernel);
    let mu_y = blur(y, h, w, &kernel);
    let e_xx = blur(&xx, h, w, &kernel);
    let e_yy = blur(&yy, h, w, &kernel);
    let e_xy = blur(&xy, h, w, &kernel);

    let mut total = 0.0;
    for i in 0..h * w {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let var_x = e_xx[i] - mx * mx;
        let var_y = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        let num = (2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2);
        let den = (mx * mx + my * my + SSIM_C1) * (var_x + var_y + SSIM_C2);
        total += num / den;
    }
    Ok(total / (h * w) as f64)
}
