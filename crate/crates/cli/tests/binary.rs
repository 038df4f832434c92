use std::path::Path;
use std::process::{Command, Output};

fn iie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iie"))
        .args(args)
        .env("IIE_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "n = -4\n").unwrap();
    let out = iie(&["solve", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    std::fs::write(&cfg, "grid = 32\n").unwrap();
    let out = iie(&["solve", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(
        iie(&["taylor", "--preset", "vortex"]).status.code(),
        Some(2)
    );
    assert_eq!(iie(&["solve", "--dt", "-1"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = iie(&[
        "solve",
        "--n",
        "16",
        "--dt",
        "1",
        "--tend",
        "1",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CFL"));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_iie"))
        .args(["radius", "--c2", "1", "--b", "1"])
        .env("IIE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_config_gives_identical_csv_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# deterministic run\nn = 16\ndt = 5e-3\nt_end = 0.05\npreset = random_smooth\nseed = 11\nkmax = 3\ndiagnostics_every = 2\n",
    )
    .unwrap();
    let mut csvs = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = iie(&["solve", "--config", path(&cfg), "--out", path(&out_dir)]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        csvs.push(std::fs::read(out_dir.join("diagnostics.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs[0].clone()).unwrap();
    assert!(text.starts_with("t,name,value\n0,energy,"));
    // ten steps: rows at t = 0 and after steps 2, 4, .., 10, each with 4 + 3 level-set entries
    assert_eq!(text.lines().count(), 1 + 6 * 7);
}

#[test]
fn diagnose_reproduces_solver_rows() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let out = iie(&[
        "solve",
        "--n",
        "16",
        "--dt",
        "1e-2",
        "--tend",
        "0.02",
        "--out",
        path(&run),
    ]);
    assert!(out.status.success());
    let snap = run.join("snapshot_0001.iie");
    let diag = dir.path().join("diag.csv");
    let out = iie(&["diagnose", path(&snap), "--out", path(&diag)]);
    assert!(out.status.success());

    let parse =
        |p: &Path| iie_cli::csv_out::read_diagnostics_csv(std::fs::File::open(p).unwrap()).unwrap();
    let solver_rows: Vec<_> = parse(&run.join("diagnostics.csv"))
        .into_iter()
        .filter(|r| r.t == 0.02)
        .collect();
    let rows = parse(&diag);
    assert_eq!(rows.len(), solver_rows.len());
    for (a, b) in rows.iter().zip(&solver_rows) {
        assert_eq!(a.name, b.name);
        assert!(
            (a.value - b.value).abs() <= 1e-9 * (1.0 + b.value.abs()),
            "{}",
            a.name
        );
    }
}

#[test]
fn project_taylor_picard_and_radius_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(iie(&[
        "solve",
        "--n",
        "16",
        "--tend",
        "0",
        "--out",
        path(&d.join("s"))
    ])
    .status
    .success());
    let proj = d.join("proj.iie");
    let out = iie(&[
        "project",
        "--input",
        path(&d.join("s/snapshot_0000.iie")),
        "--out",
        path(&proj),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let snap = iie_cli::read_snapshot(&proj).unwrap();
    let names: Vec<_> = snap.fields.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["rho", "v_x", "v_y", "p"]);

    let out = iie(&[
        "taylor",
        "--n",
        "16",
        "--order",
        "6",
        "--out",
        path(&d.join("t")),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("empirical radius"));
    let norms = std::fs::read_to_string(d.join("t/taylor_norms.csv")).unwrap();
    assert_eq!(norms.lines().count(), 7);

    let out = iie(&[
        "picard",
        "--n",
        "16",
        "--tend",
        "0.02",
        "--dt",
        "5e-3",
        "--out",
        path(&d.join("p")),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(d.join("p/picard_final.iie").exists());

    let betas = d.join("betas.csv");
    let out = iie(&[
        "radius",
        "--c2",
        "0.5",
        "--b",
        "1",
        "--order",
        "5",
        "--out",
        path(&betas),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&betas).unwrap();
    // Catalan pattern with C₂ = 1/2, b = 1: β_m = Cat(m-1)/2^(m-1)
    assert_eq!(
        text,
        "m,beta\n1,1e0\n2,5e-1\n3,5e-1\n4,6.25e-1\n5,8.75e-1\n"
    );
}

#[test]
fn help_documents_config_keys() {
    let out = iie(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for key in ["n", "dt", "t_end", "preset", "tol_elliptic", "level_sets"] {
        assert!(text.contains(&format!("  {key} ")), "missing {key}");
    }
}
