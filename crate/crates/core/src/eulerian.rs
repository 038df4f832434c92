//! Eulerian solver for the pressure-free vorticity formulation
//!
//! ```text
//! ∂_t ω + u·∇ω + {½|u|², ρ} = 0,   u = ∇⊥ L_ρ⁻¹ ω,   ∂_t ρ + u·∇ρ = 0,
//! ```
//!
//! where `ω = ∇×(ρu)` is the curl of the momentum (not of the velocity) and
//! `{f, g} = ∂_x f ∂_y g - ∂_y f ∂_x g`. Time stepping is classical RK4 on
//! `(ω, ρ)` jointly with a fixed step. [`EulerianSolver::picard_solve`]
//! implements the linearized transport/elliptic fixed-point scheme as an
//! independent route to the same solution on short intervals.

use std::f64::consts::PI;

use crate::diagnostics;
use crate::elliptic::{DensityField, EllipticSolver};
use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField, VectorField};
use crate::hodge;
use crate::presets::{self, PresetSpec};
use crate::spectral::Spectral;

/// Largest admissible `dt·max|u|·n/(2π)`.
pub const CFL_LIMIT: f64 = 0.5;

/// Tolerance on `max |∇·u|` for velocities handed to the solver.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EulerianState {
    /// Momentum vorticity `∇×(ρu)`.
    pub omega: ScalarField,
    pub rho: DensityField,
    pub t: f64,
}

/// Time derivatives of a state, plus the velocity they were computed with.
#[derive(Debug, Clone)]
pub struct Rhs {
    pub d_omega: ScalarField,
    pub d_rho: ScalarField,
    pub velocity: VectorField,
    stream: ScalarField,
}

/// One RK4 step: the new state, its derivatives, and the velocities of the
/// four stages (used to carry trajectories along with the flow).
pub(crate) struct Step {
    pub state: EulerianState,
    pub rhs: Rhs,
    pub stage_velocities: [VectorField; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub name: String,
    pub value: f64,
}

impl DiagnosticRecord {
    pub fn new(t: f64, name: impl Into<String>, value: f64) -> Self {
        Self {
            t,
            name: name.into(),
            value,
        }
    }
}

/// Integration parameters for [`EulerianSolver::run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub dt: f64,
    pub t_end: f64,
    /// Time between stored snapshots; `0` stores only the initial and final states.
    pub snapshot_interval: f64,
    /// Steps between diagnostic rows (the final state is always recorded).
    pub diagnostics_every: usize,
    /// Thresholds α for the level-set vorticity `∫ ω 𝟙{ρ<α}`.
    pub level_sets: Vec<f64>,
}

impl RunParams {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            snapshot_interval: 0.0,
            diagnostics_every: 1,
            level_sets: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub snapshots: Vec<EulerianState>,
    pub diagnostics: Vec<DiagnosticRecord>,
    pub final_state: EulerianState,
    pub steps: usize,
}

/// Complete description of an Eulerian run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_interval: f64,
    pub tol_elliptic: f64,
    pub dealias: bool,
    pub preset: PresetSpec,
    pub diagnostics_every: usize,
    pub level_sets: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 64,
            dt: 1e-3,
            t_end: 1.0,
            snapshot_interval: 0.0,
            tol_elliptic: crate::elliptic::DEFAULT_TOLERANCE,
            dealias: true,
            preset: PresetSpec::default(),
            diagnostics_every: 10,
            level_sets: vec![0.9, 1.0, 1.1],
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        Grid::new(self.n)?;
        let bad = |what: &str| Err(Error::InvalidParameters(what.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be non-negative");
        }
        if !(self.snapshot_interval >= 0.0) {
            return bad("snapshot_interval must be non-negative");
        }
        if !(self.tol_elliptic > 0.0 && self.tol_elliptic < 1.0) {
            return bad("tol_elliptic must lie in (0, 1)");
        }
        if self.diagnostics_every == 0 {
            return bad("diagnostics_every must be at least 1");
        }
        Ok(())
    }

    pub fn solver(&self) -> Result<EulerianSolver> {
        let grid = Grid::new(self.n)?;
        let elliptic = EllipticSolver::new(Spectral::new(grid)).with_tolerance(self.tol_elliptic);
        Ok(EulerianSolver::new(elliptic).with_dealias(self.dealias))
    }

    pub fn params(&self) -> RunParams {
        RunParams {
            dt: self.dt,
            t_end: self.t_end,
            snapshot_interval: self.snapshot_interval,
            diagnostics_every: self.diagnostics_every,
            level_sets: self.level_sets.clone(),
        }
    }

    /// Builds the preset, integrates, and returns snapshots and diagnostics.
    pub fn run(&self) -> Result<RunOutput> {
        self.validate()?;
        let solver = self.solver()?;
        let init = presets::build(Grid::new(self.n)?, &self.preset)?;
        let state = solver.state_from_velocity(&init.u0, &init.rho0)?;
        solver.run(state, &self.params())
    }
}

/// Diagnostic rows for one state: energy, mean vorticity, density bounds
/// and the level-set vorticity for each threshold.
pub fn state_diagnostics(
    state: &EulerianState,
    u: &VectorField,
    level_sets: &[f64],
) -> Vec<DiagnosticRecord> {
    let t = state.t;
    let mut out = vec![
        DiagnosticRecord::new(t, "energy", diagnostics::kinetic_energy(u, &state.rho)),
        DiagnosticRecord::new(t, "mean_omega", state.omega.mean()),
        DiagnosticRecord::new(t, "rho_min", state.rho.min()),
        DiagnosticRecord::new(t, "rho_max", state.rho.max()),
    ];
    for &alpha in level_sets {
        let ls = diagnostics::level_set_vorticity(&state.omega, state.rho.values(), alpha);
        out.push(DiagnosticRecord::new(
            t,
            format!("level_set_vorticity[{alpha}]"),
            ls.value,
        ));
    }
    out
}

/// Result of the Picard iteration.
#[derive(Debug, Clone)]
pub struct PicardOutput {
    pub omega: ScalarField,
    pub rho: DensityField,
    pub velocity: VectorField,
    /// `δ_n = max_t (‖ω^{n+1}-ω^n‖∞ + ‖ρ^{n+1}-ρ^n‖∞)` for each completed iteration.
    pub deltas: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct EulerianSolver {
    elliptic: EllipticSolver,
    dealias: bool,
}

impl EulerianSolver {
    pub fn new(elliptic: EllipticSolver) -> Self {
        Self {
            elliptic,
            dealias: true,
        }
    }

    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    #[inline]
    pub fn elliptic(&self) -> &EllipticSolver {
        &self.elliptic
    }

    #[inline]
    pub fn spectral(&self) -> &Spectral {
        self.elliptic.spectral()
    }

    fn mul(&self, a: &ScalarField, b: &ScalarField) -> ScalarField {
        if self.dealias {
            self.spectral().product(a, b)
        } else {
            a.pointwise_mul(b)
        }
    }

    fn advect(&self, u: &VectorField, f: &ScalarField) -> ScalarField {
        let g = self.spectral().gradient(f);
        &self.mul(&u.x, &g.x) + &self.mul(&u.y, &g.y)
    }

    fn bracket(&self, f: &ScalarField, g: &ScalarField) -> ScalarField {
        let s = self.spectral();
        let df = s.gradient(f);
        let dg = s.gradient(g);
        &self.mul(&df.x, &dg.y) - &self.mul(&df.y, &dg.x)
    }

    fn kinetic_density(&self, u: &VectorField) -> ScalarField {
        &(&self.mul(&u.x, &u.x) + &self.mul(&u.y, &u.y)) * 0.5
    }

    /// `ω = ∇×η` with `η = ρu + ∇q`; the gradient drops out so `ω = ∇×(ρu)`.
    pub fn omega_from_velocity(&self, u: &VectorField, rho: &DensityField) -> Result<ScalarField> {
        if u.grid() != rho.grid() {
            return Err(Error::GridMismatch);
        }
        let s = self.spectral();
        let divergence = s.divergence(u).max_abs();
        if divergence > DIVERGENCE_TOLERANCE {
            return Err(Error::NotDivergenceFree { divergence });
        }
        Ok(s.curl(&u.scale_by(rho.values())))
    }

    pub fn state_from_velocity(
        &self,
        u: &VectorField,
        rho: &DensityField,
    ) -> Result<EulerianState> {
        Ok(EulerianState {
            omega: self.omega_from_velocity(u, rho)?,
            rho: rho.clone(),
            t: 0.0,
        })
    }

    pub fn velocity(&self, state: &EulerianState) -> Result<VectorField> {
        hodge::biot_savart_weighted(&self.elliptic, &state.omega, &state.rho)
    }

    /// Time derivatives `(∂_t ω, ∂_t ρ)` of a state.
    pub fn rhs(&self, state: &EulerianState) -> Result<Rhs> {
        self.rhs_with_guess(&state.omega, &state.rho, None)
    }

    fn rhs_with_guess(
        &self,
        omega: &ScalarField,
        rho: &DensityField,
        guess: Option<&ScalarField>,
    ) -> Result<Rhs> {
        let (u, stream) = hodge::biot_savart_with_stream(&self.elliptic, omega, rho, guess)?;
        let transport = self.advect(&u, omega);
        let forcing = self.bracket(&self.kinetic_density(&u), rho.values());
        let d_omega = -&(&transport + &forcing);
        let d_rho = -&self.advect(&u, rho.values());
        Ok(Rhs {
            d_omega,
            d_rho,
            velocity: u,
            stream,
        })
    }

    fn cfl(&self, u: &VectorField, dt: f64) -> f64 {
        dt * u.max_norm() * self.spectral().grid().n() as f64 / (2.0 * PI)
    }

    /// One classical RK4 step.
    pub fn step_rk4(&self, state: &EulerianState, dt: f64) -> Result<EulerianState> {
        let k1 = self.rhs(state)?;
        Ok(self.advance(state, dt, k1)?.state)
    }

    /// RK4 step reusing the first stage.
    pub(crate) fn advance(&self, state: &EulerianState, dt: f64, k1: Rhs) -> Result<Step> {
        let cfl = self.cfl(&k1.velocity, dt);
        if cfl > CFL_LIMIT {
            return Err(Error::CflViolation { t: state.t, cfl });
        }
        let stage = |k: &Rhs, h: f64| -> Result<(ScalarField, DensityField)> {
            Ok((
                state.omega.axpy(h, &k.d_omega),
                DensityField::new(state.rho.values().axpy(h, &k.d_rho))?,
            ))
        };
        let (w2, r2) = stage(&k1, 0.5 * dt)?;
        let k2 = self.rhs_with_guess(&w2, &r2, Some(&k1.stream))?;
        let (w3, r3) = stage(&k2, 0.5 * dt)?;
        let k3 = self.rhs_with_guess(&w3, &r3, Some(&k2.stream))?;
        let (w4, r4) = stage(&k3, dt)?;
        let k4 = self.rhs_with_guess(&w4, &r4, Some(&k3.stream))?;

        let combine = |a: &ScalarField, b: &ScalarField, c: &ScalarField, d: &ScalarField| {
            &(&(a + &(b * 2.0)) + &(c * 2.0)) + d
        };
        let d_omega = combine(&k1.d_omega, &k2.d_omega, &k3.d_omega, &k4.d_omega);
        let d_rho = combine(&k1.d_rho, &k2.d_rho, &k3.d_rho, &k4.d_rho);
        let next = EulerianState {
            omega: state.omega.axpy(dt / 6.0, &d_omega),
            rho: DensityField::new(state.rho.values().axpy(dt / 6.0, &d_rho))?,
            t: state.t + dt,
        };
        let k_next = self.rhs_with_guess(&next.omega, &next.rho, Some(&k4.stream))?;
        Ok(Step {
            state: next,
            rhs: k_next,
            stage_velocities: [k1.velocity, k2.velocity, k3.velocity, k4.velocity],
        })
    }

    /// Integrates from `initial` to `params.t_end` with fixed steps of
    /// `params.dt` (the last step is shortened to land on `t_end`).
    pub fn run(&self, initial: EulerianState, params: &RunParams) -> Result<RunOutput> {
        if !(params.dt > 0.0) {
            return Err(Error::InvalidParameters("dt must be positive".into()));
        }
        let t0 = initial.t;
        let span = params.t_end - t0;
        let steps = if span <= 0.0 {
            0
        } else {
            ((span / params.dt) - 1e-9).ceil().max(1.0) as usize
        };
        let snap_every = if params.snapshot_interval > 0.0 {
            ((params.snapshot_interval / params.dt).round() as usize).max(1)
        } else {
            usize::MAX
        };
        let diag_every = params.diagnostics_every.max(1);

        let mut diagnostics = Vec::new();
        let mut snapshots = vec![initial.clone()];
        let mut state = initial;
        let mut k1 = self.rhs(&state)?;
        diagnostics.extend(state_diagnostics(&state, &k1.velocity, &params.level_sets));
        for step in 1..=steps {
            let dt = if step == steps {
                params.t_end - state.t
            } else {
                params.dt
            };
            let next = self.advance(&state, dt, k1)?;
            state = next.state;
            if step == steps {
                state.t = params.t_end;
            }
            k1 = next.rhs;
            if step % diag_every == 0 || step == steps {
                diagnostics.extend(state_diagnostics(&state, &k1.velocity, &params.level_sets));
            }
            if step % snap_every == 0 && step != steps {
                snapshots.push(state.clone());
            }
        }
        if steps > 0 {
            snapshots.push(state.clone());
        }
        Ok(RunOutput {
            snapshots,
            diagnostics,
            final_state: state,
            steps,
        })
    }

    /// Fixed-point iteration of the linearized scheme
    ///
    /// ```text
    /// ∂_t ω^{n+1} + u^n·∇ω^{n+1} + {½|u^n|², ρ^n} = 0
    /// ∂_t ρ^{n+1} + u^n·∇ρ^{n+1} = 0
    /// u^{n+1} = ∇⊥ L_{ρ^{n+1}}⁻¹ ω^{n+1}
    /// ```
    ///
    /// on `[0, t_end]`, starting from the frozen data `(ω, ρ, u)(t) = (ω₀, ρ₀, u₀)`.
    /// Each transport solve is RK4 on time slices spaced `dt` apart, with the
    /// frozen coefficients interpolated linearly between slices. Stops early
    /// once `δ_n` reaches the elliptic-tolerance floor.
    pub fn picard_solve(
        &self,
        omega0: &ScalarField,
        rho0: &DensityField,
        t_end: f64,
        dt: f64,
        n_iters: usize,
    ) -> Result<PicardOutput> {
        if !(t_end > 0.0 && dt > 0.0) || n_iters == 0 {
            return Err(Error::InvalidParameters(
                "picard needs t_end > 0, dt > 0 and at least one iteration".into(),
            ));
        }
        let slices = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
        let h = t_end / slices as f64;
        let floor = 10.0 * self.elliptic.tolerance() * omega0.max_abs().max(1.0);

        let (u0, psi0) = hodge::biot_savart_with_stream(&self.elliptic, omega0, rho0, None)?;
        let mut omegas = vec![omega0.clone(); slices + 1];
        let mut rhos = vec![rho0.clone(); slices + 1];
        let mut us = vec![u0; slices + 1];
        let mut psis = vec![psi0; slices + 1];

        let mut deltas: Vec<f64> = Vec::new();
        let mut converged = false;
        for iteration in 0..n_iters {
            let forcing: Vec<ScalarField> = us
                .iter()
                .zip(&rhos)
                .map(|(u, r)| self.bracket(&self.kinetic_density(u), r.values()))
                .collect();

            let mut new_omegas = Vec::with_capacity(slices + 1);
            let mut new_rhos = Vec::with_capacity(slices + 1);
            new_omegas.push(omega0.clone());
            new_rhos.push(rho0.values().clone());
            for k in 0..slices {
                let u_mid = &(&us[k] + &us[k + 1]) * 0.5;
                let f_mid = &(&forcing[k] + &forcing[k + 1]) * 0.5;
                let rhs = |w: &ScalarField, r: &ScalarField, u: &VectorField, f: &ScalarField| {
                    (-&(&self.advect(u, w) + f), -&self.advect(u, r))
                };
                let (w, r) = (&new_omegas[k], &new_rhos[k]);
                let (a1, b1) = rhs(w, r, &us[k], &forcing[k]);
                let (a2, b2) = rhs(&w.axpy(0.5 * h, &a1), &r.axpy(0.5 * h, &b1), &u_mid, &f_mid);
                let (a3, b3) = rhs(&w.axpy(0.5 * h, &a2), &r.axpy(0.5 * h, &b2), &u_mid, &f_mid);
                let (a4, b4) = rhs(
                    &w.axpy(h, &a3),
                    &r.axpy(h, &b3),
                    &us[k + 1],
                    &forcing[k + 1],
                );
                let dw = &(&(&a1 + &(&a2 * 2.0)) + &(&a3 * 2.0)) + &a4;
                let dr = &(&(&b1 + &(&b2 * 2.0)) + &(&b3 * 2.0)) + &b4;
                new_omegas.push(w.axpy(h / 6.0, &dw));
                new_rhos.push(r.axpy(h / 6.0, &dr));
            }

            let mut delta = 0.0_f64;
            for k in 0..=slices {
                let d = (&new_omegas[k] - &omegas[k]).max_abs()
                    + (&new_rhos[k] - rhos[k].values()).max_abs();
                delta = delta.max(d);
            }
            let new_rhos: Vec<DensityField> = new_rhos
                .into_iter()
                .map(DensityField::new)
                .collect::<Result<_>>()?;
            for k in 0..=slices {
                let (u, psi) = hodge::biot_savart_with_stream(
                    &self.elliptic,
                    &new_omegas[k],
                    &new_rhos[k],
                    Some(&psis[k]),
                )?;
                us[k] = u;
                psis[k] = psi;
            }
            omegas = new_omegas;
            rhos = new_rhos;
            deltas.push(delta);

            if delta <= floor {
                converged = true;
                break;
            }
            let len = deltas.len();
            if len >= 4
                && deltas[len - 3..]
                    .iter()
                    .zip(&deltas[len - 4..len - 1])
                    .all(|(b, a)| b >= a)
            {
                return Err(Error::NoContraction { iteration, delta });
            }
        }
        Ok(PicardOutput {
            omega: omegas.pop().expect("slices"),
            rho: rhos.pop().expect("slices"),
            velocity: us.pop().expect("slices"),
            deltas,
            converged,
        })
    }
}
