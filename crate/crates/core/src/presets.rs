//! Built-in initial data `(u₀, ρ₀)`.
//!
//! * `taylor_green`: `ψ = sin x sin y`, `ρ₀ ≡ 1`
//! * `taylor_green_inhomogeneous`: same `ψ`, `ρ₀ = 1 + ε sin x sin y`
//! * `shear`: `u₀ = (sin y, 0)`, `ρ₀ = 1 + ε cos x`
//! * `random_smooth`: band-limited random stream function and log-density,
//!   drawn from a seeded ChaCha stream so equal seeds give equal fields.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elliptic::DensityField;
use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField, VectorField};
use crate::spectral::Spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetKind {
    TaylorGreen,
    TaylorGreenInhomogeneous,
    Shear,
    RandomSmooth,
}

impl PresetKind {
    pub const ALL: [PresetKind; 4] = [
        PresetKind::TaylorGreen,
        PresetKind::TaylorGreenInhomogeneous,
        PresetKind::Shear,
        PresetKind::RandomSmooth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetKind::TaylorGreen => "taylor_green",
            PresetKind::TaylorGreenInhomogeneous => "taylor_green_inhomogeneous",
            PresetKind::Shear => "shear",
            PresetKind::RandomSmooth => "random_smooth",
        }
    }
}

impl fmt::Display for PresetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// A preset name together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetSpec {
    pub kind: PresetKind,
    /// Density amplitude. For `random_smooth` this is the sup norm of `log ρ₀`.
    pub epsilon: f64,
    /// Seed for `random_smooth`.
    pub seed: u64,
    /// Largest wavenumber magnitude used by `random_smooth`.
    pub kmax: usize,
    /// Peak speed `max |u₀|` for `random_smooth`.
    pub amplitude: f64,
}

impl Default for PresetSpec {
    fn default() -> Self {
        Self::new(PresetKind::TaylorGreenInhomogeneous)
    }
}

impl PresetSpec {
    pub fn new(kind: PresetKind) -> Self {
        Self {
            kind,
            epsilon: 0.2,
            seed: 0,
            kmax: 4,
            amplitude: 1.0,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_kmax(mut self, kmax: usize) -> Self {
        self.kmax = kmax;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }
}

/// Initial data plus the admissibility constant `C₁ = max(max ρ₀, 1/min ρ₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: VectorField,
    pub rho0: DensityField,
    pub c1: f64,
}

/// Convenience wrapper: builds a preset by name with default parameters.
pub fn preset(grid: Grid, name: &str) -> Result<InitialData> {
    build(grid, &PresetSpec::new(name.parse()?))
}

pub fn build(grid: Grid, spec: &PresetSpec) -> Result<InitialData> {
    let bounded_eps = || {
        if (0.0..1.0).contains(&spec.epsilon) {
            Ok(spec.epsilon)
        } else {
            Err(Error::InvalidParameters(format!(
                "epsilon must lie in [0, 1), got {}",
                spec.epsilon
            )))
        }
    };
    let tg = |grid| {
        VectorField::from_fn(grid, |x: f64, y: f64| {
            (-x.sin() * y.cos(), x.cos() * y.sin())
        })
    };
    let (u0, rho) = match spec.kind {
        PresetKind::TaylorGreen => (tg(grid), ScalarField::constant(grid, 1.0)),
        PresetKind::TaylorGreenInhomogeneous => {
            let eps = bounded_eps()?;
            (
                tg(grid),
                ScalarField::from_fn(grid, |x, y| 1.0 + eps * x.sin() * y.sin()),
            )
        }
        PresetKind::Shear => {
            let eps = bounded_eps()?;
            (
                VectorField::from_fn(grid, |_, y| (y.sin(), 0.0)),
                ScalarField::from_fn(grid, |x, _| 1.0 + eps * x.cos()),
            )
        }
        PresetKind::RandomSmooth => random_smooth(grid, spec)?,
    };
    let rho0 = DensityField::new(rho)?;
    let c1 = rho0.c1();
    Ok(InitialData { u0, rho0, c1 })
}

fn random_smooth(grid: Grid, spec: &PresetSpec) -> Result<(VectorField, ScalarField)> {
    if spec.kmax == 0 || 3 * spec.kmax >= grid.n() {
        return Err(Error::InvalidParameters(format!(
            "kmax must lie in 1..{} on this grid",
            (grid.n() - 1) / 3 + 1
        )));
    }
    if !(spec.epsilon >= 0.0 && spec.amplitude >= 0.0) {
        return Err(Error::InvalidParameters(
            "epsilon and amplitude must be non-negative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let psi = random_band(grid, spec.kmax, &mut rng);
    let log_rho = random_band(grid, spec.kmax, &mut rng);

    let u = Spectral::new(grid).perp_gradient(&psi);
    let speed = u.max_norm();
    let u = if speed > 0.0 {
        &u * (spec.amplitude / speed)
    } else {
        u
    };
    let peak = log_rho.max_abs();
    let scale = if peak > 0.0 { spec.epsilon / peak } else { 0.0 };
    Ok((u, log_rho.map(|v| (scale * v).exp())))
}

/// Random trigonometric polynomial over `0 < |k| ≤ kmax` with `|k|⁻³` amplitude decay.
fn random_band(grid: Grid, kmax: usize, rng: &mut ChaCha8Rng) -> ScalarField {
    let km = kmax as i64;
    let mut modes = Vec::new();
    for kx in 0..=km {
        for ky in -km..=km {
            if (kx == 0 && ky <= 0) || kx * kx + ky * ky > km * km {
                continue;
            }
            let decay = ((kx * kx + ky * ky) as f64).powf(-1.5);
            let a = rng.gen_range(-1.0..1.0) * decay;
            let b = rng.gen_range(-1.0..1.0) * decay;
            modes.push((kx as f64, ky as f64, a, b));
        }
    }
    ScalarField::from_fn(grid, |x, y| {
        modes
            .iter()
            .map(|&(kx, ky, a, b)| {
                let phase = kx * x + ky * y;
                a * phase.cos() + b * phase.sin()
            })
            .sum()
    })
}
