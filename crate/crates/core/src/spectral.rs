//! Fourier transforms, exact spectral differentiation, 2/3-rule dealiasing
//! and the 2-D Poisson bracket.
//!
//! Coefficients use the Fourier-series normalization: `forward` divides by
//! `n²`, so a field equals `Σ c_k e^{i k·x}` and `mean(f²) = Σ |c_k|²`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Complex Fourier coefficients, stored in FFT bin order with the same
/// row-major layout as the physical samples (`ky` selects the row).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    grid: Grid,
    data: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn new(grid: Grid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: data.len(),
            });
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Coefficient of wavenumber `(kx, ky)`.
    pub fn get(&self, kx: i64, ky: i64) -> Complex64 {
        let g = self.grid;
        self.data[g.index(g.bin(kx), g.bin(ky))]
    }

    pub fn set(&mut self, kx: i64, ky: i64, value: Complex64) {
        let g = self.grid;
        let i = g.index(g.bin(kx), g.bin(ky));
        self.data[i] = value;
    }

    /// Largest `|c(k) - conj(c(-k))|`; zero for the transform of a real field.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0_f64;
        for jy in 0..n {
            for jx in 0..n {
                let a = self.data[jy * n + jx];
                let b = self.data[((n - jy) % n) * n + (n - jx) % n];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }

    /// Evaluates the trigonometric interpolant at an arbitrary point. Nyquist
    /// bins contribute through `cos(n x / 2)` so the interpolant stays real.
    pub fn eval_at(&self, x: f64, y: f64) -> f64 {
        let g = self.grid;
        let n = g.n();
        let basis = |t: f64| -> Vec<Complex64> {
            (0..n)
                .map(|i| {
                    if i == n / 2 {
                        Complex64::new((0.5 * n as f64 * t).cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, g.wavenumber(i) as f64 * t)
                    }
                })
                .collect()
        };
        let ex = basis(x);
        let ey = basis(y);
        let mut acc = Complex64::new(0.0, 0.0);
        for (jy, row) in self.data.chunks_exact(n).enumerate() {
            let inner: Complex64 = row.iter().zip(&ex).map(|(c, e)| c * e).sum();
            acc += inner * ey[jy];
        }
        acc.re
    }
}

/// Transform plans and spectral operators for one grid. Cheap to clone and
/// safe to share across threads.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Differentiation wavenumbers per bin (Nyquist zeroed).
    kd: Vec<f64>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n();
        Self {
            grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            kd: (0..n).map(|i| grid.diff_symbol(i)).collect(),
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Differentiation wavenumbers `(kx, ky)` of the bin at flat index `idx`.
    #[inline]
    pub(crate) fn k_at(&self, idx: usize) -> (f64, f64) {
        let n = self.grid.n();
        (self.kd[idx % n], self.kd[idx / n])
    }

    /// Row FFTs, transpose, row FFTs, transpose back.
    fn fft2(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(buf, &mut scratch);
        transpose_in_place(buf, n);
        plan.process_with_scratch(buf, &mut scratch);
        transpose_in_place(buf, n);
    }

    pub fn forward(&self, f: &ScalarField) -> SpectralCoeffs {
        self.check(f.grid());
        let mut buf: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft2(&mut buf, &self.forward);
        let scale = 1.0 / self.grid.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        SpectralCoeffs {
            grid: self.grid,
            data: buf,
        }
    }

    /// Real part of the inverse transform.
    pub fn inverse(&self, c: &SpectralCoeffs) -> ScalarField {
        self.check(c.grid());
        let mut buf = c.data.clone();
        self.fft2(&mut buf, &self.inverse);
        ScalarField::from_raw(self.grid, buf.into_iter().map(|z| z.re).collect())
    }

    fn check(&self, g: Grid) {
        assert_eq!(
            g, self.grid,
            "field grid does not match the spectral context"
        );
    }

    /// Multiplies coefficients by `i k_axis`.
    pub(crate) fn diff_coeffs(&self, c: &SpectralCoeffs, axis: Axis) -> SpectralCoeffs {
        let data = c
            .data
            .iter()
            .enumerate()
            .map(|(idx, z)| {
                let (kx, ky) = self.k_at(idx);
                let k = match axis {
                    Axis::X => kx,
                    Axis::Y => ky,
                };
                Complex64::new(-k * z.im, k * z.re)
            })
            .collect();
        SpectralCoeffs {
            grid: self.grid,
            data,
        }
    }

    pub fn derivative(&self, f: &ScalarField, axis: Axis) -> ScalarField {
        self.inverse(&self.diff_coeffs(&self.forward(f), axis))
    }

    pub fn gradient(&self, f: &ScalarField) -> VectorField {
        let c = self.forward(f);
        VectorField {
            x: self.inverse(&self.diff_coeffs(&c, Axis::X)),
            y: self.inverse(&self.diff_coeffs(&c, Axis::Y)),
        }
    }

    /// `∇⊥f = (-∂_y f, ∂_x f)`.
    pub fn perp_gradient(&self, f: &ScalarField) -> VectorField {
        let g = self.gradient(f);
        VectorField { x: -&g.y, y: g.x }
    }

    pub fn divergence(&self, v: &VectorField) -> ScalarField {
        let cx = self.diff_coeffs(&self.forward(&v.x), Axis::X);
        let cy = self.diff_coeffs(&self.forward(&v.y), Axis::Y);
        self.inverse(&add_coeffs(&cx, &cy, 1.0))
    }

    /// Scalar curl `∂_x v_y - ∂_y v_x`.
    pub fn curl(&self, v: &VectorField) -> ScalarField {
        let a = self.diff_coeffs(&self.forward(&v.y), Axis::X);
        let b = self.diff_coeffs(&self.forward(&v.x), Axis::Y);
        self.inverse(&add_coeffs(&a, &b, -1.0))
    }

    pub fn laplacian(&self, f: &ScalarField) -> ScalarField {
        let mut c = self.forward(f);
        for (idx, z) in c.data.iter_mut().enumerate() {
            let (kx, ky) = self.k_at(idx);
            *z *= -(kx * kx + ky * ky);
        }
        self.inverse(&c)
    }

    /// Zeroes every mode with `max(|kx|, |ky|) > cutoff` (2/3 rule).
    pub fn dealias(&self, c: &SpectralCoeffs) -> SpectralCoeffs {
        let g = self.grid;
        let n = g.n();
        let cut = g.dealias_cutoff();
        let mut out = c.clone();
        for (idx, z) in out.data.iter_mut().enumerate() {
            let kx = g.wavenumber(idx % n).abs();
            let ky = g.wavenumber(idx / n).abs();
            if kx.max(ky) > cut {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    pub fn dealias_field(&self, f: &ScalarField) -> ScalarField {
        self.inverse(&self.dealias(&self.forward(f)))
    }

    /// Dealiased product: both factors and the result are truncated, so the
    /// retained modes equal those of the exact product of the truncated inputs.
    pub fn product(&self, f: &ScalarField, g: &ScalarField) -> ScalarField {
        let a = self.dealias_field(f);
        let b = self.dealias_field(g);
        self.dealias_field(&a.pointwise_mul(&b))
    }

    /// Dealiased `Σ_i a_i b_i`.
    pub fn dot(&self, a: &VectorField, b: &VectorField) -> ScalarField {
        &self.product(&a.x, &b.x) + &self.product(&a.y, &b.y)
    }

    /// Dealiased advective derivative `(u·∇) v` of a vector field.
    pub fn advect_vector(&self, u: &VectorField, v: &VectorField) -> VectorField {
        VectorField {
            x: self.advect(u, &v.x),
            y: self.advect(u, &v.y),
        }
    }

    /// Dealiased `u·∇f`.
    pub fn advect(&self, u: &VectorField, f: &ScalarField) -> ScalarField {
        let g = self.gradient(f);
        &self.product(&u.x, &g.x) + &self.product(&u.y, &g.y)
    }

    /// `{f, g} = ∂_x f ∂_y g - ∂_y f ∂_x g`, with dealiased products.
    pub fn poisson_bracket(&self, f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
        if f.grid() != self.grid || g.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let df = self.gradient(f);
        let dg = self.gradient(g);
        Ok(&self.product(&df.x, &dg.y) - &self.product(&df.y, &dg.x))
    }

    /// Discrete Sobolev norm `(Σ (1+|k|²)^s |ĉ_k|²)^{1/2}`.
    pub fn sobolev_norm(&self, f: &ScalarField, s: f64) -> f64 {
        let c = self.forward(f);
        let g = self.grid;
        let n = g.n();
        c.data
            .iter()
            .enumerate()
            .map(|(idx, z)| {
                let kx = g.wavenumber(idx % n) as f64;
                let ky = g.wavenumber(idx / n) as f64;
                (1.0 + kx * kx + ky * ky).powf(s) * z.norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Sum of squared Sobolev norms of the four entries of `∇v`, square-rooted.
    pub fn gradient_sobolev_norm(&self, v: &VectorField, s: f64) -> f64 {
        let gx = self.gradient(&v.x);
        let gy = self.gradient(&v.y);
        [&gx.x, &gx.y, &gy.x, &gy.y]
            .iter()
            .map(|f| self.sobolev_norm(f, s).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

pub(crate) fn add_coeffs(a: &SpectralCoeffs, b: &SpectralCoeffs, beta: f64) -> SpectralCoeffs {
    SpectralCoeffs {
        grid: a.grid,
        data: a
            .data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| x + y * beta)
            .collect(),
    }
}

fn transpose_in_place(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}
