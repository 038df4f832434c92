//! Conserved and geometric quantities: kinetic energy, level-set vorticity,
//! the determinant and momentum identities of the Taylor series, the second
//! fundamental form of the density-weighted volume-preserving group, and a
//! Lagrangian/Eulerian cross check.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::elliptic::{DensityField, EllipticSolver};
use crate::error::{Error, Result};
use crate::eulerian::{EulerianSolver, DIVERGENCE_TOLERANCE};
use crate::field::{ScalarField, VectorField};
use crate::hodge;
use crate::spectral::{Spectral, SpectralCoeffs};
use crate::taylor::{det2, jacobian, TaylorSeries};

/// `E = ½∫ρ|u|² dx`.
pub fn kinetic_energy(u: &VectorField, rho: &DensityField) -> f64 {
    0.5 * u.dot(u).inner(rho.values())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetVorticity {
    pub value: f64,
    /// The level set passes close to a critical point of ρ, so the integral
    /// is sensitive to small perturbations of ρ or α.
    pub near_critical: bool,
}

#[derive(Clone, Copy)]
struct Vertex {
    x: f64,
    y: f64,
    rho: f64,
    omega: f64,
}

/// `∫_{ρ<α} ω` over one triangle of linear interpolants, in cell units.
fn clipped_triangle(tri: [Vertex; 3], alpha: f64) -> f64 {
    let mut poly: Vec<Vertex> = Vec::with_capacity(4);
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let (a_in, b_in) = (a.rho < alpha, b.rho < alpha);
        if a_in {
            poly.push(a);
        }
        if a_in != b_in {
            let s = (alpha - a.rho) / (b.rho - a.rho);
            poly.push(Vertex {
                x: a.x + s * (b.x - a.x),
                y: a.y + s * (b.y - a.y),
                rho: alpha,
                omega: a.omega + s * (b.omega - a.omega),
            });
        }
    }
    let mut total = 0.0;
    for i in 1..poly.len().saturating_sub(1) {
        let (p, q, r) = (poly[0], poly[i], poly[i + 1]);
        let area = 0.5 * ((q.x - p.x) * (r.y - p.y) - (r.x - p.x) * (q.y - p.y)).abs();
        total += area * (p.omega + q.omega + r.omega) / 3.0;
    }
    total
}

/// `I_α = ∫ ω 𝟙{ρ<α} dx` with ρ and ω replaced by their piecewise-linear
/// interpolants on the triangulated grid, integrated exactly.
pub fn level_set_vorticity(
    omega: &ScalarField,
    rho: &ScalarField,
    alpha: f64,
) -> LevelSetVorticity {
    assert_eq!(omega.grid(), rho.grid(), "fields live on different grids");
    let grid = omega.grid();
    let n = grid.n();
    let node = |ix: usize, iy: usize, x: f64, y: f64| Vertex {
        x,
        y,
        rho: rho.get(ix % n, iy % n),
        omega: omega.get(ix % n, iy % n),
    };
    let mut total = 0.0;
    for iy in 0..n {
        for ix in 0..n {
            let v00 = node(ix, iy, 0.0, 0.0);
            let v10 = node(ix + 1, iy, 1.0, 0.0);
            let v11 = node(ix + 1, iy + 1, 1.0, 1.0);
            let v01 = node(ix, iy + 1, 0.0, 1.0);
            total += clipped_triangle([v00, v10, v11], alpha);
            total += clipped_triangle([v00, v11, v01], alpha);
        }
    }
    LevelSetVorticity {
        value: total * grid.cell_area(),
        near_critical: near_critical(rho, alpha),
    }
}

fn near_critical(rho: &ScalarField, alpha: f64) -> bool {
    let grid = rho.grid();
    let n = grid.n();
    let h = grid.spacing();
    let grads: Vec<f64> = (0..n * n)
        .map(|idx| {
            let (ix, iy) = (idx % n, idx / n);
            let dx = (rho.get((ix + 1) % n, iy) - rho.get((ix + n - 1) % n, iy)) / (2.0 * h);
            let dy = (rho.get(ix, (iy + 1) % n) - rho.get(ix, (iy + n - 1) % n)) / (2.0 * h);
            dx.hypot(dy)
        })
        .collect();
    let g_max = grads.iter().copied().fold(0.0, f64::max);
    if g_max == 0.0 {
        return false;
    }
    rho.values()
        .iter()
        .zip(&grads)
        .any(|(r, g)| (r - alpha).abs() < h * g_max && *g < 0.1 * g_max)
}

/// `sup |det(Id + ∇ℓ(t)) - 1|` for the truncated series.
pub fn det_identity_residual(sp: &Spectral, series: &TaylorSeries, t: f64) -> f64 {
    let a = jacobian(sp, &series.displacement(t));
    let trace = &a[0][0] + &a[1][1];
    (&trace + &det2(sp, &a, &a)).max_abs()
}

/// `sup |leray[ρ₀(∇*ℓ + Id)ℓ̇ + ½∇ρ₀ ∫₀ᵗ|ℓ̇|² - ρ₀u₀]|` for the truncated series.
pub fn cauchy_invariant_residual(sp: &Spectral, series: &TaylorSeries, t: f64) -> f64 {
    let rho = series.rho0().values();
    let a = jacobian(sp, &series.displacement(t));
    let v = series.velocity(t);
    // (∇*ℓ ℓ̇)_i = ∂_iℓ_j ℓ̇_j
    let tx = &sp.product(&a[0][0], &v.x) + &sp.product(&a[1][0], &v.y);
    let ty = &sp.product(&a[0][1], &v.x) + &sp.product(&a[1][1], &v.y);
    let half_int = &series.speed_integral(sp, t) * 0.5;
    let grad_rho = sp.gradient(rho);
    let lin = (&v - series.u0()).scale_by(rho);
    let total = VectorField {
        x: &(&sp.product(rho, &tx) + &sp.product(&grad_rho.x, &half_int)) + &lin.x,
        y: &(&sp.product(rho, &ty) + &sp.product(&grad_rho.y, &half_int)) + &lin.y,
    };
    hodge::leray(sp, &total).max_abs()
}

fn require_solenoidal(sp: &Spectral, v: &VectorField) -> Result<()> {
    let divergence = sp.divergence(v).max_abs();
    if divergence > DIVERGENCE_TOLERANCE {
        return Err(Error::NotDivergenceFree { divergence });
    }
    Ok(())
}

/// `Π(u, v) = Q_ρ(u·∇v)` for divergence-free `u`, `v`.
pub fn second_fundamental_form(
    solver: &EllipticSolver,
    u: &VectorField,
    v: &VectorField,
    rho: &DensityField,
) -> Result<VectorField> {
    let sp = solver.spectral();
    require_solenoidal(sp, u)?;
    require_solenoidal(sp, v)?;
    hodge::q_rho(solver, &sp.advect_vector(u, v), rho)
}

/// `𝒞 = ∫ [Π(u,u)·Π(v,v) - |Π(u,v)|²] ρ dx`.
pub fn sectional_curvature_integrand(
    solver: &EllipticSolver,
    u: &VectorField,
    v: &VectorField,
    rho: &DensityField,
) -> Result<f64> {
    let uu = second_fundamental_form(solver, u, u, rho)?;
    let vv = second_fundamental_form(solver, v, v, rho)?;
    let uv = second_fundamental_form(solver, u, v, rho)?;
    let integrand = &uu.dot(&vv) - &uv.dot(&uv);
    Ok(integrand.inner(rho.values()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSolverReport {
    /// `sup_a |ℓ̇(t,a) - u(t, X(t,a))|`.
    pub velocity_error: f64,
    /// `sup_a |a + ℓ(t,a) - X(t,a)|`, modulo the periodic box.
    pub position_error: f64,
    pub labels: usize,
    pub steps: usize,
}

fn wrap(d: f64) -> f64 {
    let two_pi = 2.0 * PI;
    d - two_pi * (d / two_pi).round()
}

struct Interpolant {
    x: SpectralCoeffs,
    y: SpectralCoeffs,
}

impl Interpolant {
    fn new(sp: &Spectral, u: &VectorField) -> Self {
        Self {
            x: sp.forward(&u.x),
            y: sp.forward(&u.y),
        }
    }

    fn at(&self, p: (f64, f64)) -> (f64, f64) {
        (self.x.eval_at(p.0, p.1), self.y.eval_at(p.0, p.1))
    }
}

/// Compares the series against the Eulerian solver at time `t`.
///
/// The Eulerian state starts from `(u₀, ρ₀)` of the series, and the labels
/// (every `stride`-th grid node per axis) are carried by RK4 in lockstep with
/// it, each stage using the spectral interpolant of that stage's velocity.
pub fn cross_solver_compare(
    solver: &EulerianSolver,
    series: &TaylorSeries,
    t: f64,
    dt: f64,
    stride: usize,
) -> Result<CrossSolverReport> {
    if !(dt > 0.0) || stride == 0 || t < 0.0 {
        return Err(Error::InvalidParameters(
            "cross check needs t >= 0, dt > 0 and stride >= 1".into(),
        ));
    }
    series.check_time(t)?;
    let sp = solver.spectral();
    let grid = sp.grid();
    let n = grid.n();
    let labels: Vec<(usize, usize)> = (0..n)
        .step_by(stride)
        .flat_map(|iy| (0..n).step_by(stride).map(move |ix| (ix, iy)))
        .collect();
    let mut positions: Vec<(f64, f64)> = labels
        .iter()
        .map(|&(ix, iy)| (grid.coord(ix), grid.coord(iy)))
        .collect();

    let mut state = solver.state_from_velocity(series.u0(), series.rho0())?;
    let mut k1 = solver.rhs(&state)?;
    let steps = if t == 0.0 {
        0
    } else {
        ((t / dt) - 1e-9).ceil().max(1.0) as usize
    };
    for step in 1..=steps {
        let h = if step == steps { t - state.t } else { dt };
        let next = solver.advance(&state, h, k1)?;
        let stages: Vec<Interpolant> = next
            .stage_velocities
            .iter()
            .map(|u| Interpolant::new(sp, u))
            .collect();
        positions.par_iter_mut().for_each(|p| {
            let (x, y) = *p;
            let a = stages[0].at((x, y));
            let b = stages[1].at((x + 0.5 * h * a.0, y + 0.5 * h * a.1));
            let c = stages[2].at((x + 0.5 * h * b.0, y + 0.5 * h * b.1));
            let d = stages[3].at((x + h * c.0, y + h * c.1));
            *p = (
                x + h / 6.0 * (a.0 + 2.0 * b.0 + 2.0 * c.0 + d.0),
                y + h / 6.0 * (a.1 + 2.0 * b.1 + 2.0 * c.1 + d.1),
            );
        });
        state = next.state;
        k1 = next.rhs;
    }

    let u_final = Interpolant::new(sp, &k1.velocity);
    let disp = series.displacement(t);
    let vel = series.velocity(t);
    let (velocity_error, position_error) = labels
        .par_iter()
        .zip(&positions)
        .map(|(&(ix, iy), &p)| {
            let u = u_final.at(p);
            let dv = (vel.x.get(ix, iy) - u.0).hypot(vel.y.get(ix, iy) - u.1);
            let dx = wrap(grid.coord(ix) + disp.x.get(ix, iy) - p.0);
            let dy = wrap(grid.coord(iy) + disp.y.get(ix, iy) - p.1);
            (dv, dx.hypot(dy))
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    Ok(CrossSolverReport {
        velocity_error,
        position_error,
        labels: labels.len(),
        steps,
    })
}
