//! Uniform periodic grid on [0, 2π)² and the real fields that live on it.
//!
//! Samples are stored row-major: the value at node `(x_i, y_j)` sits at
//! index `j * n + i`, with `x_i = 2πi/n`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    /// Points per axis.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of nodes, `n²`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    /// Quadrature weight of one node.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    /// Signed wavenumber of FFT bin `i`, in `-n/2..n/2`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT bin of signed wavenumber `k` (taken modulo `n`).
    #[inline]
    pub fn bin(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Wavenumber used by spectral differentiation. The Nyquist bin gets 0 so
    /// that derivatives of real fields stay real.
    #[inline]
    pub fn diff_symbol(&self, i: usize) -> f64 {
        if i == self.n / 2 {
            0.0
        } else {
            self.wavenumber(i) as f64
        }
    }

    /// Largest wavenumber kept by the 2/3 rule: the largest `k` with `3k < n`.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n as i64 - 1) / 3
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    /// Builds a field without the finiteness scan. Callers guarantee the length.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..n {
            let y = grid.coord(iy);
            for ix in 0..n {
                values.push(f(grid.coord(ix), y));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.index(ix, iy)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Pointwise product, no dealiasing.
    pub fn pointwise_mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    /// `self + alpha * other`
    pub fn axpy(&self, alpha: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + alpha * b)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sup norm over the nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Root-mean-square over the nodes.
    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    /// Trapezoid (spectrally exact) integral over the torus.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// `∫ f g dx` by the same quadrature.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_area()
    }

    pub fn without_mean(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: Self) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: Self) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.map(|a| a * rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|a| -a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField) -> Result<Self> {
        if x.grid() != y.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { x, y })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            x: ScalarField::zeros(grid),
            y: ScalarField::zeros(grid),
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        Self {
            x: ScalarField::from_fn(grid, |x, y| f(x, y).0),
            y: ScalarField::from_fn(grid, |x, y| f(x, y).1),
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.x.grid()
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            x: f(&self.x),
            y: f(&self.y),
        }
    }

    /// Multiplies both components by a scalar field, pointwise.
    pub fn scale_by(&self, s: &ScalarField) -> Self {
        self.map(|c| c.pointwise_mul(s))
    }

    pub fn axpy(&self, alpha: f64, other: &Self) -> Self {
        Self {
            x: self.x.axpy(alpha, &other.x),
            y: self.y.axpy(alpha, &other.y),
        }
    }

    /// Pointwise Euclidean dot product.
    pub fn dot(&self, other: &Self) -> ScalarField {
        let xx = self.x.pointwise_mul(&other.x);
        xx.zip_map(&self.y.pointwise_mul(&other.y), |a, b| a + b)
    }

    /// `∫ v·w dx`.
    pub fn inner(&self, other: &Self) -> f64 {
        self.x.inner(&other.x) + self.y.inner(&other.y)
    }

    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs())
    }

    /// Largest pointwise speed `max |v|`.
    pub fn max_norm(&self) -> f64 {
        self.x
            .values()
            .iter()
            .zip(self.y.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// `(∫ |v|² dx)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: Self) -> VectorField {
        VectorField {
            x: &self.x + &rhs.x,
            y: &self.y + &rhs.y,
        }
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: Self) -> VectorField {
        VectorField {
            x: &self.x - &rhs.x,
            y: &self.y - &rhs.y,
        }
    }
}

impl Mul<f64> for &VectorField {
    type Output = VectorField;
    fn mul(self, rhs: f64) -> VectorField {
        VectorField {
            x: &self.x * rhs,
            y: &self.y * rhs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_odd_and_small() {
        assert_eq!(Grid::new(6), Err(Error::InvalidGrid(6)));
        assert_eq!(Grid::new(33), Err(Error::InvalidGrid(33)));
        assert!(Grid::new(8).is_ok());
    }

    #[test]
    fn wavenumber_layout() {
        let g = Grid::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(g.bin(-1), 7);
        assert_eq!(g.diff_symbol(4), 0.0);
        assert_eq!(Grid::new(32).unwrap().dealias_cutoff(), 10);
        assert_eq!(Grid::new(64).unwrap().dealias_cutoff(), 21);
    }

    #[test]
    fn nonfinite_rejected() {
        let g = Grid::new(8).unwrap();
        let mut v = vec![0.0; 64];
        v[3] = f64::NAN;
        assert_eq!(ScalarField::new(g, v), Err(Error::NonFinite));
        assert!(matches!(
            ScalarField::new(g, vec![0.0; 5]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn integral_of_sin_squared() {
        let g = Grid::new(16).unwrap();
        let f = ScalarField::from_fn(g, |x, y| x.sin().powi(2) * y.cos().powi(2));
        assert!((f.integral() - PI * PI).abs() < 1e-12);
    }
}
