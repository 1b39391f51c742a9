//! Grid fields and the first-order difference operators.
//!
//! Fields are stored row-major: the value at row `r`, column `c` lives at
//! `r * width + c`. The `x` direction runs along columns and `y` along rows,
//! so `Dx+` differences neighbouring columns and `Dy+` neighbouring rows.
//!
//! Two boundary conventions are supported:
//!
//! * `Periodic`: differences wrap around, `Dx+ u` at the last column uses the
//!   first column.
//! * `Neumann`: the forward difference across the boundary is zero. The
//!   backward operator is the negative adjoint of the forward one, so
//!   `<grad u, p> = -<u, div p>` holds under both conventions.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridShape {
    height: usize,
    width: usize,
    boundary: Boundary,
}

impl GridShape {
    pub fn new(height: usize, width: usize, boundary: Boundary) -> Result<Self> {
        if height < 2 || width < 2 {
            return Err(Error::InvalidShape { height, width });
        }
        Ok(Self {
            height,
            width,
            boundary,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn with_boundary(self, boundary: Boundary) -> Self {
        Self { boundary, ..self }
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    fn same_grid(&self, other: &GridShape) -> bool {
        self.height == other.height && self.width == other.width
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} {:?}", self.height, self.width, self.boundary)
    }
}

pub(crate) fn check_same(a: &GridShape, b: &GridShape) -> Result<()> {
    if a.same_grid(b) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            left: a.to_string(),
            right: b.to_string(),
        })
    }
}

/// A real value per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    shape: GridShape,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::LengthMismatch {
                expected: shape.len(),
                actual: values.len(),
            });
        }
        Ok(Self { shape, values })
    }

    pub fn zeros(shape: GridShape) -> Self {
        Self::filled(shape, 0.0)
    }

    pub fn filled(shape: GridShape, value: f64) -> Self {
        Self {
            shape,
            values: vec![value; shape.len()],
        }
    }

    pub fn from_fn(shape: GridShape, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(shape.len());
        for r in 0..shape.height {
            for c in 0..shape.width {
                values.push(f(r, c));
            }
        }
        Self { shape, values }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[self.shape.index(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let i = self.shape.index(row, col);
        self.values[i] = value;
    }

    /// Same values, reinterpreted under another boundary convention.
    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.shape = self.shape.with_boundary(boundary);
        self
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        Self {
            shape: self.shape,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn clamp(&self, lo: f64, hi: f64) -> Self {
        self.map(|v| v.clamp(lo, hi))
    }
}

/// A pair of scalar fields on the same grid, e.g. the unit normal field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2 {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField2 {
    pub fn new(x: ScalarField, y: ScalarField) -> Result<Self> {
        check_same(&x.shape, &y.shape)?;
        Ok(Self { x, y })
    }

    pub fn zeros(shape: GridShape) -> Self {
        Self {
            x: ScalarField::zeros(shape),
            y: ScalarField::zeros(shape),
        }
    }

    /// Every pixel set to the same vector.
    pub fn filled(shape: GridShape, value: [f64; 2]) -> Self {
        Self {
            x: ScalarField::filled(shape, value[0]),
            y: ScalarField::filled(shape, value[1]),
        }
    }

    pub fn shape(&self) -> GridShape {
        self.x.shape
    }

    pub fn dot(&self, other: &VectorField2) -> f64 {
        self.x.dot(&other.x) + self.y.dot(&other.y)
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn sub(&self, other: &VectorField2) -> Self {
        Self {
            x: self.x.sub(&other.x),
            y: self.y.sub(&other.y),
        }
    }

    pub fn scale(&self, t: f64) -> Self {
        Self {
            x: self.x.map(|v| t * v),
            y: self.y.map(|v| t * v),
        }
    }

    /// `self + t * other`
    pub fn add_scaled(&self, t: f64, other: &VectorField2) -> Self {
        Self {
            x: self.x.zip_map(&other.x, |a, b| a + t * b),
            y: self.y.zip_map(&other.y, |a, b| a + t * b),
        }
    }

    /// Pointwise product with a scalar field.
    pub fn scale_by(&self, s: &ScalarField) -> Self {
        Self {
            x: self.x.zip_map(s, |a, b| a * b),
            y: self.y.zip_map(s, |a, b| a * b),
        }
    }

    /// Pointwise Euclidean length.
    pub fn magnitude(&self) -> ScalarField {
        self.x.zip_map(&self.y, f64::hypot)
    }

    /// Pointwise inner product with another vector field.
    pub fn pointwise_dot(&self, other: &VectorField2) -> ScalarField {
        let mut out = self.x.zip_map(&other.x, |a, b| a * b);
        for (o, (a, b)) in out
            .values
            .iter_mut()
            .zip(self.y.values.iter().zip(&other.y.values))
        {
            *o += a * b;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// `Dx+ u`: forward difference along columns.
pub fn forward_x(u: &ScalarField) -> ScalarField {
    let GridShape {
        height: h,
        width: w,
        boundary,
    } = u.shape;
    let v = &u.values;
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        let row = r * w;
        for c in 0..w - 1 {
            out[row + c] = v[row + c + 1] - v[row + c];
        }
        if boundary == Boundary::Periodic {
            out[row + w - 1] = v[row] - v[row + w - 1];
        }
    }
    ScalarField {
        shape: u.shape,
        values: out,
    }
}

/// `Dy+ u`: forward difference along rows.
pub fn forward_y(u: &ScalarField) -> ScalarField {
    let GridShape {
        height: h,
        width: w,
        boundary,
    } = u.shape;
    let v = &u.values;
    let mut out = vec![0.0; h * w];
    for r in 0..h - 1 {
        for c in 0..w {
            out[r * w + c] = v[(r + 1) * w + c] - v[r * w + c];
        }
    }
    if boundary == Boundary::Periodic {
        let last = (h - 1) * w;
        for c in 0..w {
            out[last + c] = v[c] - v[last + c];
        }
    }
    ScalarField {
        shape: u.shape,
        values: out,
    }
}

/// `Dx- p = -(Dx+)^T p`: backward difference along columns.
pub fn backward_x(p: &ScalarField) -> ScalarField {
    let GridShape {
        height: h,
        width: w,
        boundary,
    } = p.shape;
    let v = &p.values;
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        let row = r * w;
        for c in 1..w - 1 {
            out[row + c] = v[row + c] - v[row + c - 1];
        }
        match boundary {
            Boundary::Periodic => {
                out[row] = v[row] - v[row + w - 1];
                out[row + w - 1] = v[row + w - 1] - v[row + w - 2];
            }
            Boundary::Neumann => {
                out[row] = v[row];
                out[row + w - 1] = -v[row + w - 2];
            }
        }
    }
    ScalarField {
        shape: p.shape,
        values: out,
    }
}

/// `Dy- p = -(Dy+)^T p`: backward difference along rows.
pub fn backward_y(p: &ScalarField) -> ScalarField {
    let GridShape {
        height: h,
        width: w,
        boundary,
    } = p.shape;
    let v = &p.values;
    let mut out = vec![0.0; h * w];
    for r in 1..h - 1 {
        for c in 0..w {
            out[r * w + c] = v[r * w + c] - v[(r - 1) * w + c];
        }
    }
    let last = (h - 1) * w;
    for c in 0..w {
        match boundary {
            Boundary::Periodic => {
                out[c] = v[c] - v[last + c];
                out[last + c] = v[last + c] - v[last - w + c];
            }
            Boundary::Neumann => {
                out[c] = v[c];
                out[last + c] = -v[last - w + c];
            }
        }
    }
    ScalarField {
        shape: p.shape,
        values: out,
    }
}

/// Discrete gradient `(Dx+ u, Dy+ u)`.
pub fn grad(u: &ScalarField) -> VectorField2 {
    VectorField2 {
        x: forward_x(u),
        y: forward_y(u),
    }
}

/// Discrete divergence `Dx- p.x + Dy- p.y`.
pub fn div(p: &VectorField2) -> ScalarField {
    let mut out = backward_x(&p.x);
    let dy = backward_y(&p.y);
    for (o, d) in out.values.iter_mut().zip(&dy.values) {
        *o += d;
    }
    out
}

/// `-div(grad u)`, the positive semidefinite 5-point Laplacian.
pub fn neg_laplacian(u: &ScalarField) -> ScalarField {
    div(&grad(u)).map(|v| -v)
}

pub const DEFAULT_FALLBACK: [f64; 2] = [1.0, 0.0];

/// Pointwise projection onto the unit circle. Zero vectors map to `fallback`.
pub fn project_sphere(p: &VectorField2, fallback: [f64; 2]) -> VectorField2 {
    let mut out = p.clone();
    for (x, y) in out.x.values.iter_mut().zip(out.y.values.iter_mut()) {
        let norm = x.hypot(*y);
        if norm > 0.0 {
            *x /= norm;
            *y /= norm;
        } else {
            *x = fallback[0];
            *y = fallback[1];
        }
    }
    out
}
