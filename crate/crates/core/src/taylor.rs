//! Time-Taylor series of the Lagrangian displacement `ℓ(t, a) = X(t, a) - a`.
//!
//! With `ℓ = Σ_{k≥1} tᵏ ℓ⁽ᵏ⁾` and `ℓ⁽¹⁾ = u₀`, each new coefficient follows
//! from the lower ones:
//!
//! ```text
//! U⁽ᵐ⁾_i = Σ_{k=1}^{m} (m+1-k) [ρ₀ ∂_iℓ_j⁽ᵏ⁾ ℓ_j⁽ᵐ⁺¹⁻ᵏ⁾ + (k/2m) ∂_iρ₀ ℓ⁽ᵐ⁺¹⁻ᵏ⁾·ℓ⁽ᵏ⁾]
//! W⁽ᵐ⁾   = -Σ_{r+s=m} det₂(∇ℓ⁽ʳ⁾, ∇ℓ⁽ˢ⁾),   det₂(B, C) = ½(trB trC - tr(BC))
//! p⁽ᵐ⁾   = Δ_ρ₀⁻¹ [(m+1) W⁽ᵐ⁺¹⁾ + ∇·(ρ₀⁻¹ U⁽ᵐ⁾)]
//! ℓ⁽ᵐ⁺¹⁾ = (∇p⁽ᵐ⁾ - U⁽ᵐ⁾) / ((m+1) ρ₀)
//! ```
//!
//! `W` is what keeps `det(Id + ∇ℓ) = 1` order by order, and the pressure is
//! chosen so that `∇·ℓ⁽ᵐ⁺¹⁾ = W⁽ᵐ⁺¹⁾`. All quadratic terms use dealiased
//! products.

use crate::elliptic::{DensityField, EllipticSolver};
use crate::error::{Error, Result};
use crate::eulerian::DIVERGENCE_TOLERANCE;
use crate::field::{ScalarField, VectorField};
use crate::spectral::Spectral;

/// Sobolev index of the coefficient norms `‖∇ℓ⁽ᵐ⁾‖_{Hˢ}`.
pub const DEFAULT_SOBOLEV_INDEX: f64 = 2.0;

/// Fewest orders for which [`radius_from_norms`] gives an estimate.
pub const MIN_ORDERS_FOR_RADIUS: usize = 6;

/// `J[i][j] = ∂_j v_i`.
pub(crate) type Jacobian = [[ScalarField; 2]; 2];

pub(crate) fn jacobian(sp: &Spectral, v: &VectorField) -> Jacobian {
    let gx = sp.gradient(&v.x);
    let gy = sp.gradient(&v.y);
    [[gx.x, gx.y], [gy.x, gy.y]]
}

/// `½(trB trC - tr(BC))`, with dealiased products.
pub(crate) fn det2(sp: &Spectral, b: &Jacobian, c: &Jacobian) -> ScalarField {
    let tr_b = &b[0][0] + &b[1][1];
    let tr_c = &c[0][0] + &c[1][1];
    let mut tr_bc = ScalarField::zeros(sp.grid());
    for i in 0..2 {
        for j in 0..2 {
            tr_bc = &tr_bc + &sp.product(&b[i][j], &c[j][i]);
        }
    }
    &(&sp.product(&tr_b, &tr_c) - &tr_bc) * 0.5
}

fn need(coeffs: &[VectorField], needed: usize) -> Result<()> {
    if coeffs.len() < needed {
        return Err(Error::InsufficientOrders {
            needed,
            available: coeffs.len(),
        });
    }
    Ok(())
}

/// The quadratic forcing `U⁽ᵐ⁾`; needs `ℓ⁽¹⁾..ℓ⁽ᵐ⁾` in `coeffs[0..m]`.
pub fn compute_u(
    sp: &Spectral,
    m: usize,
    coeffs: &[VectorField],
    rho0: &DensityField,
) -> Result<VectorField> {
    if m == 0 {
        return Err(Error::InvalidParameters("orders start at 1".into()));
    }
    need(coeffs, m)?;
    let grid = sp.grid();
    let grads: Vec<Jacobian> = coeffs[..m].iter().map(|c| jacobian(sp, c)).collect();

    // S_i = Σ_k (m+1-k) ∂_iℓ_j^(k) ℓ_j^(m+1-k),  D = Σ_k (m+1-k) k/(2m) ℓ^(m+1-k)·ℓ^(k)
    let mut s = VectorField::zeros(grid);
    let mut d = ScalarField::zeros(grid);
    for k in 1..=m {
        let weight = (m + 1 - k) as f64;
        let other = &coeffs[m - k];
        let jk = &grads[k - 1];
        let sx = &sp.product(&jk[0][0], &other.x) + &sp.product(&jk[1][0], &other.y);
        let sy = &sp.product(&jk[0][1], &other.x) + &sp.product(&jk[1][1], &other.y);
        s.x = s.x.axpy(weight, &sx);
        s.y = s.y.axpy(weight, &sy);
        d = d.axpy(
            weight * k as f64 / (2 * m) as f64,
            &sp.dot(other, &coeffs[k - 1]),
        );
    }
    let grad_rho = sp.gradient(rho0.values());
    Ok(VectorField {
        x: &sp.product(rho0.values(), &s.x) + &sp.product(&grad_rho.x, &d),
        y: &sp.product(rho0.values(), &s.y) + &sp.product(&grad_rho.y, &d),
    })
}

/// The divergence target `W⁽ᵐ⁾`; needs `ℓ⁽¹⁾..ℓ⁽ᵐ⁻¹⁾`. `W⁽¹⁾ = 0`.
pub fn compute_w(sp: &Spectral, m: usize, coeffs: &[VectorField]) -> Result<ScalarField> {
    if m == 0 {
        return Err(Error::InvalidParameters("orders start at 1".into()));
    }
    need(coeffs, m - 1)?;
    let grads: Vec<Jacobian> = coeffs[..m - 1].iter().map(|c| jacobian(sp, c)).collect();
    let mut w = ScalarField::zeros(sp.grid());
    // det₂ is symmetric, so pair r < s once and double
    for r in 1..m {
        let s = m - r;
        if r > s {
            break;
        }
        let factor = if r == s { 1.0 } else { 2.0 };
        w = w.axpy(-factor, &det2(sp, &grads[r - 1], &grads[s - 1]));
    }
    Ok(w)
}

/// Pressure `p⁽ᵐ⁾` and the next coefficient `ℓ⁽ᵐ⁺¹⁾` from `ℓ⁽¹⁾..ℓ⁽ᵐ⁾`.
pub fn next_coefficient_with_pressure(
    solver: &EllipticSolver,
    m: usize,
    coeffs: &[VectorField],
    rho0: &DensityField,
) -> Result<(VectorField, ScalarField)> {
    let sp = solver.spectral();
    let u = compute_u(sp, m, coeffs, rho0)?;
    let w = compute_w(sp, m + 1, coeffs)?;
    let inv = rho0.reciprocal();
    let scale = (m + 1) as f64;
    let rhs = &(&w * scale) + &sp.divergence(&u.scale_by(inv.values()));
    let (p, _) = solver.invert_delta_rho(rho0, &rhs)?;
    let lm = (&sp.gradient(&p) - &u).scale_by(&(inv.values() * (1.0 / scale)));
    Ok((lm, p))
}

pub fn next_coefficient(
    solver: &EllipticSolver,
    m: usize,
    coeffs: &[VectorField],
    rho0: &DensityField,
) -> Result<VectorField> {
    Ok(next_coefficient_with_pressure(solver, m, coeffs, rho0)?.0)
}

/// `min_{m ∈ [⌈M/2⌉, M]} ‖∇ℓ⁽ᵐ⁾‖^{-1/m}`; vanishing norms are skipped and an
/// all-zero tail gives `+∞`.
pub fn radius_from_norms(norms: &[f64]) -> Result<f64> {
    let m_max = norms.len();
    if m_max < MIN_ORDERS_FOR_RADIUS {
        return Err(Error::InsufficientOrders {
            needed: MIN_ORDERS_FOR_RADIUS,
            available: m_max,
        });
    }
    let start = m_max.div_ceil(2);
    Ok((start..=m_max)
        .filter(|&m| norms[m - 1] > 0.0)
        .map(|m| norms[m - 1].powf(-1.0 / m as f64))
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone)]
pub struct TaylorSeries {
    rho0: DensityField,
    coefficients: Vec<VectorField>,
    norms: Vec<f64>,
    sobolev_index: f64,
}

impl TaylorSeries {
    /// Number of stored orders `M`.
    #[inline]
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn rho0(&self) -> &DensityField {
        &self.rho0
    }

    /// `ℓ⁽¹⁾..ℓ⁽ᴹ⁾`.
    pub fn coefficients(&self) -> &[VectorField] {
        &self.coefficients
    }

    /// `ℓ⁽ᵏ⁾`, 1-based.
    pub fn coefficient(&self, k: usize) -> &VectorField {
        &self.coefficients[k - 1]
    }

    pub fn u0(&self) -> &VectorField {
        &self.coefficients[0]
    }

    /// `‖∇ℓ⁽ᵏ⁾‖_{Hˢ}` for `k = 1..M`.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn sobolev_index(&self) -> f64 {
        self.sobolev_index
    }

    /// Keeps only the first `m` orders.
    pub fn truncated(&self, m: usize) -> Self {
        let m = m.min(self.order());
        Self {
            rho0: self.rho0.clone(),
            coefficients: self.coefficients[..m].to_vec(),
            norms: self.norms[..m].to_vec(),
            sobolev_index: self.sobolev_index,
        }
    }

    /// `ℓ(t) = Σ tᵏ ℓ⁽ᵏ⁾`, by Horner.
    pub fn displacement(&self, t: f64) -> VectorField {
        let mut acc = self.coefficients.last().expect("non-empty series").clone();
        for c in self.coefficients.iter().rev().skip(1) {
            acc = c.axpy(t, &acc);
        }
        &acc * t
    }

    /// `ℓ̇(t) = Σ k t^{k-1} ℓ⁽ᵏ⁾`, by Horner.
    pub fn velocity(&self, t: f64) -> VectorField {
        let m = self.order();
        let mut acc = &self.coefficients[m - 1] * m as f64;
        for k in (1..m).rev() {
            acc = (&self.coefficients[k - 1] * k as f64).axpy(t, &acc);
        }
        acc
    }

    /// `∫₀ᵗ |ℓ̇|² dτ`, summed termwise from the coefficients (dealiased products).
    pub fn speed_integral(&self, sp: &Spectral, t: f64) -> ScalarField {
        let big_m = self.order();
        let mut out = ScalarField::zeros(sp.grid());
        let mut tm = 1.0;
        for m in 1..=(2 * big_m - 1) {
            tm *= t;
            let mut c = ScalarField::zeros(sp.grid());
            let lo = (m + 1).saturating_sub(big_m).max(1);
            for k in lo..=m.min(big_m) {
                let j = m + 1 - k;
                let w = (k * j) as f64 / m as f64;
                c = c.axpy(
                    w,
                    &sp.dot(&self.coefficients[k - 1], &self.coefficients[j - 1]),
                );
            }
            out = out.axpy(tm, &c);
        }
        out
    }

    pub fn radius_empirical(&self) -> Result<f64> {
        radius_from_norms(&self.norms)
    }

    /// `OutsideRadius` when `|t|` reaches the empirical radius. Series too
    /// short for an estimate are accepted.
    pub fn check_time(&self, t: f64) -> Result<()> {
        match self.radius_empirical() {
            Ok(radius) if t.abs() >= radius => Err(Error::OutsideRadius { t, radius }),
            _ => Ok(()),
        }
    }
}

/// Builds `ℓ⁽¹⁾..ℓ⁽ᴹ⁾` for divergence-free `u₀` and admissible `ρ₀`.
pub fn build_series(
    solver: &EllipticSolver,
    u0: &VectorField,
    rho0: &DensityField,
    order: usize,
) -> Result<TaylorSeries> {
    build_series_with_index(solver, u0, rho0, order, DEFAULT_SOBOLEV_INDEX)
}

pub fn build_series_with_index(
    solver: &EllipticSolver,
    u0: &VectorField,
    rho0: &DensityField,
    order: usize,
    sobolev_index: f64,
) -> Result<TaylorSeries> {
    if order == 0 {
        return Err(Error::InvalidParameters(
            "series order must be at least 1".into(),
        ));
    }
    if u0.grid() != rho0.grid() || u0.grid() != solver.grid() {
        return Err(Error::GridMismatch);
    }
    let sp = solver.spectral();
    let divergence = sp.divergence(u0).max_abs();
    if divergence > DIVERGENCE_TOLERANCE {
        return Err(Error::NotDivergenceFree { divergence });
    }
    let mut coefficients = Vec::with_capacity(order);
    coefficients.push(u0.clone());
    for m in 1..order {
        let next = next_coefficient(solver, m, &coefficients, rho0)?;
        coefficients.push(next);
    }
    let norms = coefficients
        .iter()
        .map(|c| sp.gradient_sobolev_norm(c, sobolev_index))
        .collect();
    Ok(TaylorSeries {
        rho0: rho0.clone(),
        coefficients,
        norms,
        sobolev_index,
    })
}
