use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aniso-fdtd"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const VACUUM_RUN: &str = r#"
scheme = "averaged"
cfl_factor = 0.9
steps = 1000

[grid]
dims = [12, 12, 12]
spacing = 1.0
boundaries = "periodic"

[material]
layout = "vacuum"

[[source.point]]
component = "Ez"
cell = [6, 6, 6]
tau = 4.0

[outputs]
dir = "out"
energy_every = 1
probes = [{ component = "Ez", cell = [3, 6, 6] }]
"#;

#[test]
fn vacuum_run_writes_one_energy_row_per_step() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", VACUUM_RUN);
    let o = run(&["run", "--threads", "1"], &cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out");
    let energy = fs::read_to_string(out.join("energy.csv")).unwrap();
    let mut lines = energy.lines();
    assert_eq!(lines.next(), Some("step,time,energy_norm,field_energy"));
    assert_eq!(lines.count(), 1000);
    let probes = fs::read_to_string(out.join("probes.csv")).unwrap();
    assert_eq!(probes.lines().count(), 1001);
    let summary = fs::read_to_string(out.join("run_summary.txt")).unwrap();
    assert!(summary.contains("steps: 1000"), "{summary}");
    assert!(out.join("timing.csv").exists());
    assert!(stdout(&o).contains("final_energy_norm"));
}

#[test]
fn effective_config_reruns_bit_identically() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", &VACUUM_RUN.replace("steps = 1000", "steps = 200"));
    let o = run(&["run", "--threads", "1", "--seed", "5"], &cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out");
    let first_energy = fs::read(out.join("energy.csv")).unwrap();
    let first_summary = fs::read(out.join("run_summary.txt")).unwrap();
    let echo = fs::read_to_string(out.join("effective_config.toml")).unwrap();
    assert!(echo.contains("seed = 5"), "{echo}");

    // The echo re-parses to the same configuration, so it writes the same echo.
    let echo_path = write_config(tmp.path(), "echo.toml", &echo);
    let o = run(&["run", "--threads", "1"], &echo_path);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("effective_config.toml")).unwrap(), echo);
    assert_eq!(fs::read(out.join("energy.csv")).unwrap(), first_energy);
    assert_eq!(fs::read(out.join("run_summary.txt")).unwrap(), first_summary);
}

#[test]
fn snapshots_and_sampling_box_are_opt_in() {
    let tmp = TempDir::new().unwrap();
    let text = VACUUM_RUN.replace("steps = 1000", "steps = 20")
        + "snapshot_every = 10\nsnapshot_components = [\"Ez\", \"Hx\"]\nsampling_box = { low = [0, 0, 5], high = [12, 12, 7] }\n";
    let cfg = write_config(tmp.path(), "run.toml", &text);
    let o = run(&["run"], &cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    let snaps = tmp.path().join("out/snapshots");
    let mut names: Vec<String> = fs::read_dir(&snaps)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["Ez_00000010.bin", "Ez_00000020.bin", "Hx_00000010.bin", "Hx_00000020.bin"]);
    let samples = fs::read_to_string(tmp.path().join("out/sampling_box.csv")).unwrap();
    assert_eq!(samples.lines().count(), 1 + 12 * 12 * 2);

    let plain = write_config(tmp.path(), "plain.toml", &VACUUM_RUN.replace("steps = 1000", "steps = 5").replace("energy_every = 1\n", "").replace("dir = \"out\"", "dir = \"plain\""));
    assert!(run(&["run"], &plain).status.success());
    assert!(!tmp.path().join("plain/energy.csv").exists());
    assert!(tmp.path().join("plain/run_summary.txt").exists());
}

#[test]
fn config_errors_exit_2_with_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "steps = 10\n\n[grid]\ndims = [4, 4, 4]\nspacing = \"2 fs\"\n");
    let o = run(&["run"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("bad.toml:5:"), "{msg}");
    assert!(msg.contains("expected a length"), "{msg}");

    let missing = tmp.path().join("nope.toml");
    assert_eq!(run(&["run"], &missing).status.code(), Some(1));
    assert_eq!(bin().arg("run").output().unwrap().status.code(), Some(2));

    let cfg = write_config(tmp.path(), "nomat.toml", "[grid]\ndims = [4, 4, 4]\nspacing = 1\n");
    let o = run(&["cfl"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[material]"));
}

#[test]
fn divergence_exits_3_and_warns_about_dt() {
    let tmp = TempDir::new().unwrap();
    let text = VACUUM_RUN
        .replace("cfl_factor = 0.9", "dt = 2.0")
        .replace("steps = 1000", "steps = 3000")
        .replace("energy_every = 1", "nan_check_every = 10");
    let cfg = write_config(tmp.path(), "hot.toml", &text);
    let o = run(&["run"], &cfg);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let msg = stderr(&o);
    assert!(msg.contains("exceeds the stability bound"), "{msg}");
    assert!(msg.contains("non-finite"), "{msg}");
}

const EIG: &str = r#"
scheme = "non_averaged"
cfl_factor = 0.4

[grid]
dims = [2, 2, 2]
spacing = 1.0

[material]
layout = "vacuum"

[eig]
tolerance = 1e-12

[outputs]
dir = "eig"
"#;

#[test]
fn eig_on_small_vacuum_grid_is_on_the_unit_circle() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "eig.toml", EIG);
    let o = run(&["eig"], &cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("on_unit_circle: yes"), "{}", stdout(&o));
    let csv = fs::read_to_string(tmp.path().join("eig/spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 48);
}

#[test]
fn eig_size_guard_exits_4() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "big.toml", &EIG.replace("[2, 2, 2]", "[17, 17, 17]"));
    let o = run(&["eig"], &cfg);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("size guard"));
}

#[test]
fn cfl_of_vacuum_unit_grid_is_the_courant_limit() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "cfl.toml", &EIG.replace("[2, 2, 2]", "[8, 8, 8]"));
    let o = run(&["cfl"], &cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let dt: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("dt_max: "))
        .unwrap()
        .parse()
        .unwrap();
    let exact = 1.0 / 3f64.sqrt();
    assert!((dt - exact).abs() < 0.01 * exact, "{dt}");
    assert!(text.contains("method: lanczos"));
}

const CLOAK: &str = r#"
[grid]
dims = [40, 40, 40]
spacing = "10 nm"

[material.cloak]
kind = "smooth"

[outputs]
dir = "cloak"
"#;

#[test]
fn cloak_writes_materials_and_cut() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", CLOAK);
    let o = run(&["cloak"], &cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("cloak");
    assert!(out.join("cloak_materials.bin").exists());
    let cut = fs::read_to_string(out.join("cloak_cut.csv")).unwrap();
    assert_eq!(cut.lines().count(), 41);
    assert!(cut.starts_with("z,eps_xx"));
    assert!(stdout(&o).contains("vacuum: false"));

    let flat = write_config(tmp.path(), "flat.toml", &CLOAK.replace("kind = \"smooth\"", "kind = \"smooth\"\ndepth = 0.0"));
    let o = run(&["cloak"], &flat);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("vacuum: true"));

    // The written file is a valid material source for a run.
    let reuse = "steps = 3\n[grid]\ndims = [40, 40, 40]\nspacing = \"10 nm\"\n[material]\nfile = \"cloak/cloak_materials.bin\"\n[outputs]\ndir = \"reuse\"\n";
    let reuse = write_config(tmp.path(), "reuse.toml", reuse);
    let o = run(&["run"], &reuse);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn converge_small_sweep_writes_csvs() {
    let tmp = TempDir::new().unwrap();
    let text = r#"
[converge]
ppw = [4, 5, 8]
settle_periods = 4
cases = ["averaged_nonsmooth", "non_averaged_nonsmooth"]

[outputs]
dir = "conv"
"#;
    let cfg = write_config(tmp.path(), "conv.toml", text);
    let o = run(&["converge"], &cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    for label in ["averaged_nonsmooth", "non_averaged_nonsmooth"] {
        let csv = fs::read_to_string(tmp.path().join(format!("conv/convergence_{label}.csv"))).unwrap();
        assert_eq!(csv.lines().next(), Some("ppw,relative_error"));
        assert_eq!(csv.lines().count(), 4);
        assert!(stdout(&o).contains(&format!("{label}: order")));
    }

    let two = write_config(tmp.path(), "two.toml", &text.replace("[4, 5, 8]", "[4, 8]"));
    assert_eq!(run(&["converge"], &two).status.code(), Some(2));
}
