//! Variable-coefficient elliptic problems `∇·(a∇φ) = f` on the torus.
//!
//! Both weighted operators reduce to this form: `Δ_ρ = ∇·(ρ⁻¹∇)` takes
//! `a = 1/ρ`, and `L_ρ = ∇×(ρ∇⊥) = ∇·(ρ∇)` takes `a = ρ`.
//!
//! The solve is preconditioned conjugate gradients on `-∇·(a∇·)`, carried out
//! on Fourier coefficients, with the flat operator `-ā|k|²` as the
//! preconditioner. With `a` bounded above and below the preconditioned
//! spectrum is bounded by `max a / min a` independent of the grid, so the
//! iteration count does not grow under refinement.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField};
use crate::spectral::{Axis, Spectral, SpectralCoeffs};

pub const DEFAULT_TOLERANCE: f64 = 1e-11;
pub const DEFAULT_MAX_ITERS: usize = 500;

/// A strictly positive scalar field together with its certified bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    values: ScalarField,
    min: f64,
    max: f64,
}

impl DensityField {
    pub fn new(values: ScalarField) -> Result<Self> {
        let min = values.min();
        let max = values.max();
        if !(min > 0.0) {
            return Err(Error::CoefficientNotPositive { min });
        }
        Ok(Self { values, min, max })
    }

    /// Checks `1/c1 <= ρ <= c1` in addition to positivity.
    pub fn with_bound(values: ScalarField, c1: f64) -> Result<Self> {
        let d = Self::new(values)?;
        if !(c1 >= 1.0) || d.min < 1.0 / c1 || d.max > c1 {
            return Err(Error::AssumptionViolated {
                min: d.min,
                max: d.max,
                c1,
            });
        }
        Ok(d)
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::new(ScalarField::constant(grid, value))
    }

    #[inline]
    pub fn values(&self) -> &ScalarField {
        &self.values
    }

    pub fn into_values(self) -> ScalarField {
        self.values
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.values.grid()
    }

    #[inline]
    pub fn min(&self) -> f64 {
        self.min
    }

    #[inline]
    pub fn max(&self) -> f64 {
        self.max
    }

    /// Smallest `C₁` with `1/C₁ <= ρ <= C₁`.
    pub fn c1(&self) -> f64 {
        self.max.max(1.0 / self.min)
    }

    pub fn is_constant(&self) -> bool {
        self.min == self.max
    }

    pub fn reciprocal(&self) -> Self {
        Self {
            values: self.values.map(|v| 1.0 / v),
            min: 1.0 / self.max,
            max: 1.0 / self.min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticSolveReport {
    pub iterations: usize,
    /// Relative L² residual `‖∇·(a∇φ) - f‖ / ‖f‖` of the returned solution.
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct EllipticSolver {
    spectral: Spectral,
    tol: f64,
    max_iters: usize,
}

impl EllipticSolver {
    pub fn new(spectral: Spectral) -> Self {
        Self {
            spectral,
            tol: DEFAULT_TOLERANCE,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    #[inline]
    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    #[inline]
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.spectral.grid()
    }

    /// Forward operator `∇·(a∇φ)`.
    pub fn apply(&self, a: &DensityField, phi: &ScalarField) -> ScalarField {
        let s = &self.spectral;
        let c = s.forward(phi);
        let out: Vec<Complex64> = self.apply_negated(a, &c).iter().map(|z| -z).collect();
        s.inverse(&SpectralCoeffs::new(s.grid(), out).expect("length"))
    }

    /// `-∇·(a∇·)` on coefficients: two inverse and two forward transforms.
    fn apply_negated(&self, a: &DensityField, c: &SpectralCoeffs) -> Vec<Complex64> {
        let s = &self.spectral;
        let gx = s
            .inverse(&s.diff_coeffs(c, Axis::X))
            .pointwise_mul(a.values());
        let gy = s
            .inverse(&s.diff_coeffs(c, Axis::Y))
            .pointwise_mul(a.values());
        let dx = s.diff_coeffs(&s.forward(&gx), Axis::X);
        let dy = s.diff_coeffs(&s.forward(&gy), Axis::Y);
        dx.data()
            .iter()
            .zip(dy.data())
            .map(|(p, q)| -(p + q))
            .collect()
    }

    /// Zeroes the bins where both differentiation wavenumbers vanish: the mean
    /// and the three Nyquist modes annihilated by the discrete gradient.
    fn project_null(&self, v: &mut [Complex64]) {
        for (idx, z) in v.iter_mut().enumerate() {
            let (kx, ky) = self.spectral.k_at(idx);
            if kx == 0.0 && ky == 0.0 {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Solves `∇·(a∇φ) = f` for mean-zero `φ`.
    pub fn solve(
        &self,
        a: &DensityField,
        f: &ScalarField,
    ) -> Result<(ScalarField, EllipticSolveReport)> {
        self.solve_with_guess(a, f, None)
    }

    /// As [`solve`](Self::solve), starting the iteration from `guess`.
    pub fn solve_with_guess(
        &self,
        a: &DensityField,
        f: &ScalarField,
        guess: Option<&ScalarField>,
    ) -> Result<(ScalarField, EllipticSolveReport)> {
        if a.min() <= 0.0 {
            return Err(Error::CoefficientNotPositive { min: a.min() });
        }
        let scale = f.max_abs();
        let mean = f.mean();
        if mean.abs() > 1e-10 * scale {
            return Err(Error::NonZeroMeanRhs { mean });
        }
        let s = &self.spectral;
        let grid = s.grid();

        // Work with the SPD form  A x = b,  A = -∇·(a∇·),  b = -f̂.
        let mut b: Vec<Complex64> = s.forward(f).data().iter().map(|z| -z).collect();
        self.project_null(&mut b);
        let b_norm = norm(&b);
        if b_norm == 0.0 {
            return Ok((
                ScalarField::zeros(grid),
                EllipticSolveReport {
                    iterations: 0,
                    residual: 0.0,
                    tolerance: self.tol,
                },
            ));
        }

        let a_bar = a.values().mean();
        let precond: Vec<f64> = (0..grid.len())
            .map(|idx| {
                let (kx, ky) = s.k_at(idx);
                let k2 = kx * kx + ky * ky;
                if k2 == 0.0 {
                    0.0
                } else {
                    1.0 / (a_bar * k2)
                }
            })
            .collect();

        let mut x: Vec<Complex64> = match guess {
            Some(g) => {
                let mut v = s.forward(g).data().to_vec();
                self.project_null(&mut v);
                v
            }
            None => vec![Complex64::new(0.0, 0.0); grid.len()],
        };

        let coeffs = |v: &[Complex64]| SpectralCoeffs::new(grid, v.to_vec()).expect("length");
        let mut iterations = 0;
        let mut residual;
        loop {
            // (Re)start from the true residual.
            let ax = self.apply_negated(a, &coeffs(&x));
            let mut r: Vec<Complex64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            self.project_null(&mut r);
            residual = norm(&r) / b_norm;
            if residual <= self.tol {
                break;
            }
            if iterations >= self.max_iters {
                return Err(Error::NoConvergence {
                    max_iters: self.max_iters,
                    residual,
                });
            }
            let mut z: Vec<Complex64> = r.iter().zip(&precond).map(|(v, m)| v * m).collect();
            let mut p = z.clone();
            let mut rz = dot(&r, &z);
            while iterations < self.max_iters {
                iterations += 1;
                let ap = self.apply_negated(a, &coeffs(&p));
                let alpha = rz / dot(&p, &ap);
                for i in 0..x.len() {
                    x[i] += p[i] * alpha;
                    r[i] -= ap[i] * alpha;
                }
                if norm(&r) / b_norm <= 0.5 * self.tol {
                    break;
                }
                z = r.iter().zip(&precond).map(|(v, m)| v * m).collect();
                let rz_next = dot(&r, &z);
                let beta = rz_next / rz;
                rz = rz_next;
                for i in 0..p.len() {
                    p[i] = z[i] + p[i] * beta;
                }
            }
        }
        self.project_null(&mut x);
        Ok((
            s.inverse(&coeffs(&x)),
            EllipticSolveReport {
                iterations,
                residual,
                tolerance: self.tol,
            },
        ))
    }

    /// Mean-zero `ψ` with `L_ρ ψ = ∇×(ρ∇⊥ψ) = ∇·(ρ∇ψ) = ω`.
    pub fn invert_l_rho(
        &self,
        rho: &DensityField,
        omega: &ScalarField,
    ) -> Result<(ScalarField, EllipticSolveReport)> {
        self.solve(rho, omega)
    }

    /// Mean-zero `p` with `Δ_ρ p = ∇·(ρ⁻¹∇p) = f`.
    pub fn invert_delta_rho(
        &self,
        rho: &DensityField,
        f: &ScalarField,
    ) -> Result<(ScalarField, EllipticSolveReport)> {
        self.solve(&rho.reciprocal(), f)
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| p.re * q.re + p.im * q.im)
        .sum()
}

fn norm(a: &[Complex64]) -> f64 {
    dot(a, a).sqrt()
}
