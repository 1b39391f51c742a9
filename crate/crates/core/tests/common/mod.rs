#![allow(dead_code)]

use elastica::{Boundary, GridShape, ScalarField, VectorField2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    /// 1D forward difference. The last row wraps for periodic data and is
    /// zero for Neumann data.
    pub fn forward_1d(n: usize, boundary: Boundary) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            if i + 1 < n {
                m.a[i * n + i] = -1.0;
                m.a[i * n + i + 1] = 1.0;
            } else if boundary == Boundary::Periodic {
                m.a[i * n + i] = -1.0;
                m.a[i * n] = 1.0;
            }
        }
        m
    }

    pub fn kron(&self, other: &Dense) -> Dense {
        let n = self.n * other.n;
        let mut m = Dense::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                let s = self.a[i * self.n + j];
                if s == 0.0 {
                    continue;
                }
                for k in 0..other.n {
                    for l in 0..other.n {
                        m.a[(i * other.n + k) * n + j * other.n + l] = s * other.a[k * other.n + l];
                    }
                }
            }
        }
        m
    }

    pub fn transpose(&self) -> Dense {
        let mut m = Dense::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[j * self.n + i] = self.a[i * self.n + j];
            }
        }
        m
    }

    pub fn matmul(&self, other: &Dense) -> Dense {
        let n = self.n;
        let mut m = Dense::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let s = self.a[i * n + k];
                if s == 0.0 {
                    continue;
                }
                for j in 0..n {
                    m.a[i * n + j] += s * other.a[k * n + j];
                }
            }
        }
        m
    }

    pub fn add_scaled(&self, t: f64, other: &Dense) -> Dense {
        Dense {
            n: self.n,
            a: self
                .a
                .iter()
                .zip(&other.a)
                .map(|(x, y)| x + t * y)
                .collect(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.a[i * self.n + j] * x[j]).sum())
            .collect()
    }

    /// Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut m = self.a.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
                .unwrap();
            if pivot != col {
                for j in 0..n {
                    m.swap(col * n + j, pivot * n + j);
                }
                x.swap(col, pivot);
            }
            let d = m[col * n + col];
            for i in col + 1..n {
                let factor = m[i * n + col] / d;
                if factor == 0.0 {
                    continue;
                }
                for j in col..n {
                    m[i * n + j] -= factor * m[col * n + j];
                }
                x[i] -= factor * x[col];
            }
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| m[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / m[i * n + i];
        }
        x
    }
}

/// `(Dx+, Dy+)` for a row-major `h x w` grid.
pub fn dense_gradient(shape: GridShape) -> (Dense, Dense) {
    let (h, w) = (shape.height(), shape.width());
    let b = shape.boundary();
    let dx = Dense::identity(h).kron(&Dense::forward_1d(w, b));
    let dy = Dense::forward_1d(h, b).kron(&Dense::identity(w));
    (dx, dy)
}

/// `I + alpha (Dx^T Dx + Dy^T Dy)`.
pub fn dense_screened_poisson(shape: GridShape, alpha: f64) -> Dense {
    let (dx, dy) = dense_gradient(shape);
    let lap = dx
        .transpose()
        .matmul(&dx)
        .add_scaled(1.0, &dy.transpose().matmul(&dy));
    Dense::identity(shape.len()).add_scaled(alpha, &lap)
}

pub fn shape(h: usize, w: usize, boundary: Boundary) -> GridShape {
    GridShape::new(h, w, boundary).unwrap()
}

pub fn random_field(rng: &mut ChaCha8Rng, shape: GridShape, lo: f64, hi: f64) -> ScalarField {
    ScalarField::from_fn(shape, |_, _| rng.random_range(lo..hi))
}

pub fn random_vector(rng: &mut ChaCha8Rng, shape: GridShape) -> VectorField2 {
    VectorField2 {
        x: random_field(rng, shape, -1.0, 1.0),
        y: random_field(rng, shape, -1.0, 1.0),
    }
}

pub fn random_unit(rng: &mut ChaCha8Rng, shape: GridShape) -> VectorField2 {
    let angle = random_field(rng, shape, 0.0, std::f64::consts::TAU);
    VectorField2 {
        x: angle.map(f64::cos),
        y: angle.map(f64::sin),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
