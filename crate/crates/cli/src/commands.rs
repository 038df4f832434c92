//! The six subcommands. Each writes its files under the given output path
//! and a short human-readable report to `report`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use iie_core::eulerian::{state_diagnostics, RunConfig, RunOutput};
use iie_core::majorant::{MajorantModel, MajorantReport};
use iie_core::taylor::{build_series, TaylorSeries, MIN_ORDERS_FOR_RADIUS};
use iie_core::{hodge, presets, DensityField, EllipticSolver, Error, Grid, Spectral};

use crate::config::{apply_flag, parse_config};
use crate::csv_out::{write_diagnostics_csv, write_diagnostics_file, write_indexed_table};
use crate::snapshot::{read_snapshot, write_snapshot, Snapshot};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub n: Option<String>,
    pub dt: Option<String>,
    pub t_end: Option<String>,
    pub seed: Option<String>,
    pub tol: Option<String>,
}

/// Config file (or defaults) plus overrides, validated.
pub fn resolve_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => parse_config(p)?,
        None => RunConfig::default(),
    };
    let pairs = [
        ("preset", "preset", &overrides.preset),
        ("n", "n", &overrides.n),
        ("dt", "dt", &overrides.dt),
        ("tend", "t_end", &overrides.t_end),
        ("seed", "seed", &overrides.seed),
        ("tol", "tol_elliptic", &overrides.tol),
    ];
    for (flag, key, value) in pairs {
        if let Some(v) = value {
            apply_flag(&mut cfg, flag, key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn snapshot_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("snapshot_{index:04}.iie"))
}

/// Eulerian run: `snapshot_NNNN.iie` files and `diagnostics.csv` in `out`.
pub fn solve(cfg: &RunConfig, out: &Path, report: &mut impl Write) -> Result<RunOutput> {
    fs::create_dir_all(out)?;
    let solver = cfg.solver()?;
    let output = cfg.run()?;
    for (i, state) in output.snapshots.iter().enumerate() {
        let u = solver.velocity(state)?;
        write_snapshot(
            &snapshot_path(out, i),
            &Snapshot::from_state(state, Some(&u))?,
        )?;
    }
    write_diagnostics_file(&out.join("diagnostics.csv"), &output.diagnostics)?;
    writeln!(
        report,
        "solve: preset {}, n = {}, {} steps to t = {}, {} snapshots",
        cfg.preset.kind,
        cfg.n,
        output.steps,
        output.final_state.t,
        output.snapshots.len()
    )?;
    Ok(output)
}

/// Picard iteration on `[0, t_end]`: `picard_deltas.csv` and `picard_final.iie`.
pub fn picard(
    cfg: &RunConfig,
    iters: usize,
    out: &Path,
    report: &mut impl Write,
) -> Result<Vec<f64>> {
    fs::create_dir_all(out)?;
    let solver = cfg.solver()?;
    let init = presets::build(Grid::new(cfg.n)?, &cfg.preset)?;
    let state = solver.state_from_velocity(&init.u0, &init.rho0)?;
    let result = solver.picard_solve(&state.omega, &state.rho, cfg.t_end, cfg.dt, iters)?;
    let rows: Vec<(usize, Vec<f64>)> = result
        .deltas
        .iter()
        .enumerate()
        .map(|(i, d)| (i + 1, vec![*d]))
        .collect();
    write_indexed_table(
        fs::File::create(out.join("picard_deltas.csv"))?,
        &["iteration", "delta"],
        &rows,
    )?;
    let final_state = iie_core::eulerian::EulerianState {
        omega: result.omega,
        rho: result.rho,
        t: cfg.t_end,
    };
    write_snapshot(
        &out.join("picard_final.iie"),
        &Snapshot::from_state(&final_state, Some(&result.velocity))?,
    )?;
    writeln!(
        report,
        "picard: {} iterations, last delta {:e}, {}",
        result.deltas.len(),
        result.deltas.last().copied().unwrap_or(0.0),
        if result.converged {
            "converged"
        } else {
            "not yet converged"
        }
    )?;
    Ok(result.deltas)
}

/// Taylor series of order `order`: `taylor_norms.csv` and
/// `taylor_coefficients.iie` (fields `rho0`, `l1_x`, `l1_y`, ...).
pub fn taylor(
    cfg: &RunConfig,
    order: usize,
    out: &Path,
    report: &mut impl Write,
) -> Result<TaylorSeries> {
    if order == 0 {
        return Err(Error::InvalidParameters("order must be at least 1".into()).into());
    }
    fs::create_dir_all(out)?;
    let solver = cfg.solver()?;
    let init = presets::build(Grid::new(cfg.n)?, &cfg.preset)?;
    let series = build_series(solver.elliptic(), &init.u0, &init.rho0, order)?;
    let rows: Vec<(usize, Vec<f64>)> = series
        .norms()
        .iter()
        .enumerate()
        .map(|(i, v)| (i + 1, vec![*v]))
        .collect();
    write_indexed_table(
        fs::File::create(out.join("taylor_norms.csv"))?,
        &["m", "norm"],
        &rows,
    )?;
    let mut snap = Snapshot::new(cfg.n, 0.0).with_field("rho0", init.rho0.values())?;
    for (k, c) in series.coefficients().iter().enumerate() {
        snap = snap
            .with_field(&format!("l{}_x", k + 1), &c.x)?
            .with_field(&format!("l{}_y", k + 1), &c.y)?;
    }
    write_snapshot(&out.join("taylor_coefficients.iie"), &snap)?;
    write!(
        report,
        "taylor: preset {}, order {order}, ",
        cfg.preset.kind
    )?;
    match series.radius_empirical() {
        Ok(r) => writeln!(report, "empirical radius {r:.6}")?,
        Err(Error::InsufficientOrders { .. }) => writeln!(
            report,
            "radius needs at least {MIN_ORDERS_FOR_RADIUS} orders"
        )?,
        Err(e) => return Err(e.into()),
    }
    Ok(series)
}

/// Splits `w = ρv + ∇p` for the vector field `(fields.0, fields.1)` of a
/// snapshot; writes `rho`, `v_x`, `v_y`, `p` to `output`.
pub fn project(
    input: &Path,
    output: &Path,
    fields: (&str, &str),
    tol: f64,
    report: &mut impl Write,
) -> Result<Snapshot> {
    let snap = read_snapshot(input)?;
    let w = snap.vector(fields.0, fields.1)?;
    let rho = DensityField::new(snap.scalar("rho")?)?;
    let spectral = Spectral::new(Grid::new(snap.n)?);
    let solver = EllipticSolver::new(spectral).with_tolerance(tol);
    let dec = hodge::decompose(&solver, &w, &rho)?;
    let div = solver.spectral().divergence(&dec.v).max_abs();
    let result = Snapshot::new(snap.n, snap.time)
        .with_field("rho", rho.values())?
        .with_field("v_x", &dec.v.x)?
        .with_field("v_y", &dec.v.y)?
        .with_field("p", &dec.p)?;
    write_snapshot(output, &result)?;
    writeln!(report, "project: max |div v| = {div:e}")?;
    Ok(result)
}

/// Recomputes the run diagnostics from snapshots holding `omega` and `rho`.
/// Writes CSV to `output`, or to `report` when no path is given.
pub fn diagnose(
    inputs: &[PathBuf],
    output: Option<&Path>,
    level_sets: &[f64],
    tol: f64,
    report: &mut impl Write,
) -> Result<Vec<iie_core::eulerian::DiagnosticRecord>> {
    let mut records = Vec::new();
    for path in inputs {
        let snap = read_snapshot(path)?;
        let cfg = RunConfig {
            n: snap.n,
            tol_elliptic: tol,
            ..RunConfig::default()
        };
        let state = snap.to_state()?;
        let u = cfg.solver()?.velocity(&state)?;
        records.extend(state_diagnostics(&state, &u, level_sets));
    }
    match output {
        Some(p) => {
            write_diagnostics_file(p, &records)?;
            writeln!(
                report,
                "diagnose: {} rows from {} snapshots",
                records.len(),
                inputs.len()
            )?;
        }
        None => write_diagnostics_csv(&mut *report, &records)?,
    }
    Ok(records)
}

/// Majorant radius for `constants = [C₂, C₃, ...]`; β coefficients go to
/// `output` when given.
pub fn radius(
    constants: Vec<f64>,
    b: f64,
    delta: f64,
    order: usize,
    output: Option<&Path>,
    report: &mut impl Write,
) -> Result<MajorantReport> {
    let model = MajorantModel::new(constants, b, delta)?;
    let rep = model.radius_majorant(order)?;
    if let Some(p) = output {
        let rows: Vec<(usize, Vec<f64>)> = rep
            .betas
            .iter()
            .enumerate()
            .map(|(i, v)| (i + 1, vec![*v]))
            .collect();
        write_indexed_table(fs::File::create(p)?, &["m", "beta"], &rows)?;
    }
    writeln!(
        report,
        "radius: alpha* = {:.15e}, T* = {:.15e}, polynomial residual {:e}",
        rep.alpha_star, rep.t_star, rep.residual
    )?;
    Ok(rep)
}
