//! Majorant series for the displacement norms.
//!
//! `ζ(t) = Σ βₘ tᵐ` solves `P(t, ζ) = -ζ + t b + Σ_{j=2}^{d} C_j ζʲ = 0`, so
//!
//! ```text
//! β₁ = b,   β_{m+1} = Σ_j C_j Σ_{r₁+…+r_j = m+1} Π β_{rᵢ}.
//! ```
//!
//! With `J(α) = α - Σ C_j αʲ` the series converges for `t ≤ T(α) = J(α)/b`,
//! and the best guaranteed time is reached at the smallest `α*` with
//! `J'(α*) = δ`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MajorantModel {
    /// `C₂, …, C_d`.
    pub constants: Vec<f64>,
    /// Size of the initial data, `‖∇u₀‖`.
    pub b: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MajorantReport {
    pub alpha_star: f64,
    /// `J(α*)/b`; `+∞` when `b = 0`.
    pub t_star: f64,
    /// `β₁..β_M`.
    pub betas: Vec<f64>,
    /// Largest coefficient of `P(t, Σ βₘ tᵐ)` through degree `M`, relative to `max(b, max β)`.
    pub residual: f64,
}

impl MajorantModel {
    pub fn new(constants: Vec<f64>, b: f64, delta: f64) -> Result<Self> {
        let model = Self {
            constants,
            b,
            delta,
        };
        model.validate()?;
        Ok(model)
    }

    /// Single quadratic nonlinearity, `d = 2`.
    pub fn quadratic(c2: f64, b: f64, delta: f64) -> Result<Self> {
        Self::new(vec![c2], b, delta)
    }

    /// Polynomial degree `d`.
    pub fn degree(&self) -> usize {
        self.constants.len() + 1
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameters(m));
        if self.constants.is_empty() {
            return bad("at least one constant C₂ is required".into());
        }
        if let Some(c) = self
            .constants
            .iter()
            .find(|c| !(c.is_finite() && **c > 0.0))
        {
            return bad(format!("constants must be positive, got {c}"));
        }
        if !(self.b.is_finite() && self.b >= 0.0) {
            return bad(format!("b must be non-negative, got {}", self.b));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        Ok(())
    }

    /// `J(α) = α - Σ C_j αʲ`.
    pub fn j(&self, alpha: f64) -> f64 {
        alpha
            - self
                .constants
                .iter()
                .enumerate()
                .map(|(i, c)| c * alpha.powi(i as i32 + 2))
                .sum::<f64>()
    }

    /// `J'(α) = 1 - Σ j C_j α^{j-1}`.
    pub fn j_prime(&self, alpha: f64) -> f64 {
        1.0 - self
            .constants
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 2) as f64 * c * alpha.powi(i as i32 + 1))
            .sum::<f64>()
    }

    /// Smallest positive root of `J'(α) = δ`. `J'` falls strictly from 1 on
    /// `α > 0`, so the root is unique and bisection is safe.
    pub fn alpha_star(&self) -> f64 {
        if self.constants.len() == 1 {
            return (1.0 - self.delta) / (2.0 * self.constants[0]);
        }
        let mut hi = 1.0;
        while self.j_prime(hi) > self.delta {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.j_prime(mid) > self.delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `β₁..β_M` from the recursion.
    pub fn betas(&self, m_max: usize) -> Vec<f64> {
        let d = self.degree();
        // powers[j][n] = [tⁿ] ζʲ for j = 1..d, filled one degree at a time
        let mut powers = vec![vec![0.0; m_max + 1]; d + 1];
        for n in 1..=m_max {
            for j in 2..=d {
                powers[j][n] = (1..n).map(|k| powers[1][k] * powers[j - 1][n - k]).sum();
            }
            let source = if n == 1 { self.b } else { 0.0 };
            powers[1][n] = source
                + (2..=d)
                    .map(|j| self.constants[j - 2] * powers[j][n])
                    .sum::<f64>();
        }
        powers[1][1..].to_vec()
    }

    /// Coefficients `[tⁿ] P(t, Σ βₘ tᵐ)` for `n = 0..=M`, by plain polynomial products.
    pub fn polynomial_residual(&self, betas: &[f64]) -> Vec<f64> {
        let m_max = betas.len();
        let mut zeta = vec![0.0; m_max + 1];
        zeta[1..].copy_from_slice(betas);
        let mut out: Vec<f64> = zeta.iter().map(|z| -z).collect();
        if m_max >= 1 {
            out[1] += self.b;
        }
        let mut power = zeta.clone();
        for c in &self.constants {
            power = truncated_product(&power, &zeta);
            for (o, p) in out.iter_mut().zip(&power) {
                *o += c * p;
            }
        }
        out
    }

    pub fn radius_majorant(&self, m_max: usize) -> Result<MajorantReport> {
        self.validate()?;
        let alpha_star = self.alpha_star();
        let t_star = if self.b == 0.0 {
            f64::INFINITY
        } else {
            self.j(alpha_star) / self.b
        };
        let betas = self.betas(m_max);
        let scale = betas.iter().fold(self.b, |m, v| m.max(v.abs()));
        let residual = if scale > 0.0 {
            self.polynomial_residual(&betas)
                .iter()
                .fold(0.0_f64, |m, v| m.max(v.abs()))
                / scale
        } else {
            0.0
        };
        Ok(MajorantReport {
            alpha_star,
            t_star,
            betas,
            residual,
        })
    }
}

fn truncated_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len();
    let mut out = vec![0.0; len];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}
