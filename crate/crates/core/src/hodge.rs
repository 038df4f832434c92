//! Weighted Helmholtz–Hodge decomposition.
//!
//! For an admissible density ρ every vector field splits as `w = ρv + ∇p`
//! with `∇·v = 0`. The projector onto the gradient part in the ρ-weighted
//! L² product is `Q_ρ w = ρ⁻¹∇Δ_ρ⁻¹∇·w`, and `P_ρ = Id - Q_ρ`. For ρ ≡ 1 both
//! reduce to the classical Leray/Helmholtz pair, computed here directly from
//! the Fourier symbol `Id - kkᵀ/|k|²`.

use num_complex::Complex64;

use crate::elliptic::{DensityField, EllipticSolver};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::spectral::{Spectral, SpectralCoeffs};

/// `w = ρv + ∇p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub v: VectorField,
    pub p: ScalarField,
}

fn check_grids(w: &VectorField, rho: &DensityField) -> Result<()> {
    if w.grid() != rho.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `Q_ρ w = ρ⁻¹∇Δ_ρ⁻¹∇·w`; its range is `{ρ⁻¹∇φ}`.
pub fn q_rho(solver: &EllipticSolver, w: &VectorField, rho: &DensityField) -> Result<VectorField> {
    check_grids(w, rho)?;
    let s = solver.spectral();
    let div = s.divergence(w);
    let (phi, _) = solver.invert_delta_rho(rho, &div)?;
    let inv = rho.reciprocal();
    Ok(s.gradient(&phi).scale_by(inv.values()))
}

/// `P_ρ w = w - Q_ρ w`, divergence free.
pub fn p_rho(solver: &EllipticSolver, w: &VectorField, rho: &DensityField) -> Result<VectorField> {
    let q = q_rho(solver, w, rho)?;
    Ok(w - &q)
}

/// Splits `w = ρv + ∇p` with `v = P_ρ(ρ⁻¹w)` and `p = Δ_ρ⁻¹∇·(ρ⁻¹w)` (mean zero).
pub fn decompose(
    solver: &EllipticSolver,
    w: &VectorField,
    rho: &DensityField,
) -> Result<Decomposition> {
    check_grids(w, rho)?;
    let s = solver.spectral();
    let inv = rho.reciprocal();
    let scaled = w.scale_by(inv.values());
    let (p, _) = solver.invert_delta_rho(rho, &s.divergence(&scaled))?;
    let v = &scaled - &s.gradient(&p).scale_by(inv.values());
    Ok(Decomposition { v, p })
}

/// Classical Leray projector, `Id - kkᵀ/|k|²` per mode. Modes where the
/// differentiation symbol vanishes (mean, Nyquist corners) pass through.
pub fn leray(spectral: &Spectral, w: &VectorField) -> VectorField {
    let cx = spectral.forward(&w.x);
    let cy = spectral.forward(&w.y);
    let grid = spectral.grid();
    let mut ox = Vec::with_capacity(grid.len());
    let mut oy = Vec::with_capacity(grid.len());
    for (idx, (a, b)) in cx.data().iter().zip(cy.data()).enumerate() {
        let (kx, ky) = spectral.k_at(idx);
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            ox.push(*a);
            oy.push(*b);
        } else {
            let kdot: Complex64 = (a * kx + b * ky) / k2;
            ox.push(a - kdot * kx);
            oy.push(b - kdot * ky);
        }
    }
    VectorField {
        x: spectral.inverse(&SpectralCoeffs::new(grid, ox).expect("length")),
        y: spectral.inverse(&SpectralCoeffs::new(grid, oy).expect("length")),
    }
}

/// Weighted Biot–Savart law `u = 𝒦_ρ ω = ∇⊥L_ρ⁻¹ω`.
pub fn biot_savart_weighted(
    solver: &EllipticSolver,
    omega: &ScalarField,
    rho: &DensityField,
) -> Result<VectorField> {
    Ok(biot_savart_with_stream(solver, omega, rho, None)?.0)
}

/// Biot–Savart that also returns the stream function, optionally warm started.
pub fn biot_savart_with_stream(
    solver: &EllipticSolver,
    omega: &ScalarField,
    rho: &DensityField,
    guess: Option<&ScalarField>,
) -> Result<(VectorField, ScalarField)> {
    if omega.grid() != rho.grid() {
        return Err(Error::GridMismatch);
    }
    let (psi, _) = solver.solve_with_guess(rho, omega, guess)?;
    Ok((solver.spectral().perp_gradient(&psi), psi))
}
