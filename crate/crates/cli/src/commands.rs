//! The five subcommands. Each writes its files under the output directory
//! and returns the summary lines that `main` prints and saves.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use aniso_fdtd::analysis::study::run_study;
use aniso_fdtd::analysis::{
    build_update_matrix, eigen_spectrum, energy_norm, field_energy, write_convergence_csv, write_spectrum_csv,
};
use aniso_fdtd::cloak::write_cut_csv;
use aniso_fdtd::lattice::write_snapshot;
use aniso_fdtd::materials::io::write_material_grid;
use aniso_fdtd::solver::{compute_cfl_with, vacuum_dt_bound, CflReport};
use aniso_fdtd::{MaterialGrid, SchemeKind, Simulation, YeeGrid};

use crate::config::RunConfig;
use crate::error::CliError;

/// Everything a command needs besides the configuration itself.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    /// Directory of the configuration file; relative paths start here.
    pub base: PathBuf,
    pub force_size_guard: bool,
}

/// Summary lines, plus warnings that go to stderr.
#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
    /// Set when the command finished but its check did not pass.
    pub failed: bool,
}

impl Report {
    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }
}

impl Context {
    pub fn out_dir(&self) -> PathBuf {
        self.base.join(&self.config.outputs.dir)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.out_dir().join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        let f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(BufWriter::new(f))
    }

    fn write_file(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.out_dir().join(name);
        let mut w = self.create(name)?;
        w.write_all(contents.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))
    }

    /// Writes the configuration as understood, with every default spelled
    /// out; it parses back to the same value.
    pub fn write_effective_config(&self) -> Result<(), CliError> {
        self.write_file("effective_config.toml", &self.config.to_toml()?)
    }

    pub fn write_summary(&self, command: &str, report: &Report) -> Result<(), CliError> {
        let mut text = report.lines.join("\n");
        text.push('\n');
        self.write_file(&format!("{command}_summary.txt"), &text)
    }

    fn grid_and_materials(&self) -> Result<(YeeGrid, MaterialGrid), CliError> {
        let grid = self.config.grid_block()?.build()?;
        let materials = self.config.material_block()?.build(&grid, self.config.seed, &self.base)?;
        Ok((grid, materials))
    }

    fn cfl(&self, grid: &YeeGrid, materials: &MaterialGrid, scheme: SchemeKind) -> Result<CflReport, CliError> {
        let opts = self.config.cfl.options(self.config.seed);
        Ok(compute_cfl_with(materials, grid, scheme, opts)?)
    }

    /// The time step: explicit, or the configured fraction of the bound.
    fn time_step(
        &self,
        grid: &YeeGrid,
        materials: &MaterialGrid,
        scheme: SchemeKind,
    ) -> Result<f64, CliError> {
        match self.config.explicit_dt() {
            Some(dt) => {
                // Printed at once: a run that then diverges never returns
                // its report.
                match self.cfl(grid, materials, scheme) {
                    Ok(c) if dt > c.dt_max => eprintln!(
                        "warning: explicit dt {dt:e} exceeds the stability bound {:e}; the run may diverge",
                        c.dt_max
                    ),
                    Ok(_) => {}
                    Err(e) => eprintln!("warning: could not check dt against the stability bound: {e}"),
                }
                Ok(dt)
            }
            None => {
                let c = self.cfl(grid, materials, scheme)?;
                Ok(self.config.cfl_factor() * c.dt_max)
            }
        }
    }

    fn simulation(&self, grid: &YeeGrid, materials: &MaterialGrid, scheme: SchemeKind, dt: f64) -> Result<Simulation, CliError> {
        let pml = self.config.grid_block()?.pml.params();
        let mut sim = Simulation::new(grid.clone(), materials.clone(), scheme, dt)?.with_pml(pml)?;
        sim.set_nan_check_interval(self.config.outputs.nan_check_every);
        for p in &self.config.source.point {
            sim.add_point_source(p.build(grid)?)?;
        }
        if let Some(pw) = &self.config.source.plane_wave {
            sim.set_tfsf(pw.spec())?;
        }
        Ok(sim)
    }
}

fn io_at(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

/// Time loop with the opt-in output streams.
pub fn run(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::default();
    let cfg = &ctx.config;
    let out = &cfg.outputs;
    let (grid, materials) = ctx.grid_and_materials()?;
    let scheme = cfg.scheme();
    let dt = ctx.time_step(&grid, &materials, scheme)?;
    let mut sim = ctx.simulation(&grid, &materials, scheme, dt)?;

    for p in &out.probes {
        grid.check_cell(p.cell)?;
    }
    let mut energy = if out.energy_every > 0 {
        let mut w = ctx.create("energy.csv")?;
        writeln!(w, "step,time,energy_norm,field_energy").map_err(io_at(Path::new("energy.csv")))?;
        Some(w)
    } else {
        None
    };
    let mut probes = if !out.probes.is_empty() && out.probe_every > 0 {
        let mut w = ctx.create("probes.csv")?;
        let cols: Vec<String> = out
            .probes
            .iter()
            .map(|p| format!("{}@{}_{}_{}", p.component.0, p.cell[0], p.cell[1], p.cell[2]))
            .collect();
        writeln!(w, "step,time,{}", cols.join(",")).map_err(io_at(Path::new("probes.csv")))?;
        Some(w)
    } else {
        None
    };
    if out.snapshot_every > 0 {
        fs::create_dir_all(ctx.out_dir().join("snapshots")).map_err(io_at(&ctx.out_dir()))?;
    }
    let probe_idx: Vec<(aniso_fdtd::Component, usize)> = out
        .probes
        .iter()
        .map(|p| (p.component.0, grid.index(p.cell[0], p.cell[1], p.cell[2])))
        .collect();
    let snapshot_dir = ctx.out_dir().join("snapshots");

    let mut max_energy: Option<f64> = None;
    let start = Instant::now();
    let result = sim.run_with(cfg.steps, |s| {
        let n = s.steps();
        if let Some(w) = energy.as_mut() {
            if n % out.energy_every == 0 {
                let f = s.fields();
                let w_norm = energy_norm(f, s.materials());
                max_energy = Some(max_energy.map_or(w_norm, |m| m.max(w_norm)));
                writeln!(w, "{n},{:.12e},{w_norm:.12e},{:.12e}", s.time(), field_energy(f))?;
            }
        }
        if let Some(w) = probes.as_mut() {
            if n % out.probe_every == 0 {
                write!(w, "{n},{:.12e}", s.time())?;
                for (c, idx) in &probe_idx {
                    write!(w, ",{:.12e}", s.fields().component(*c)[*idx])?;
                }
                writeln!(w)?;
            }
        }
        if out.snapshot_every > 0 && n % out.snapshot_every == 0 {
            for c in &out.snapshot_components {
                let path = snapshot_dir.join(format!("{}_{n:08}.bin", c.0));
                let mut w = BufWriter::new(File::create(path)?);
                write_snapshot(&mut w, s.grid(), s.fields(), c.0)?;
                w.flush()?;
            }
        }
        Ok(())
    });
    let wall = start.elapsed();
    for w in [energy.as_mut(), probes.as_mut()].into_iter().flatten() {
        w.flush().map_err(io_at(&ctx.out_dir()))?;
    }
    result?;

    if let Some(b) = &out.sampling_box {
        write_sampling_box(ctx, &sim, b)?;
    }

    let f = sim.fields();
    report.line("command: run".to_string());
    report.line(format!("scheme: {scheme}"));
    report.line(format!("dims: {:?}", grid.dims()));
    report.line(format!("dt: {dt:.12e}"));
    report.line(format!("steps: {}", sim.steps()));
    report.line(format!("final_time: {:.12e}", sim.time()));
    report.line(format!("final_energy_norm: {:.12e}", energy_norm(f, sim.materials())));
    if let Some(max) = max_energy {
        report.line(format!("max_energy_norm: {max:.12e}"));
    }
    let mut timing = vec![format!("scheme,steps,seconds"), timing_row(scheme, sim.steps(), wall)];
    report.warnings.push(format!(
        "wall time {:.3} s ({:.3} ms/step)",
        wall.as_secs_f64(),
        per_step_ms(wall, sim.steps())
    ));
    if out.compare_schemes {
        let other = match scheme {
            SchemeKind::Averaged => SchemeKind::NonAveraged,
            SchemeKind::NonAveraged => SchemeKind::Averaged,
        };
        let dt_other = ctx.time_step(&grid, &materials, other)?;
        let mut sim = ctx.simulation(&grid, &materials, other, dt_other)?;
        let start = Instant::now();
        sim.run(cfg.steps)?;
        let wall_other = start.elapsed();
        timing.push(timing_row(other, cfg.steps, wall_other));
        let (avg, non) = match scheme {
            SchemeKind::Averaged => (wall, wall_other),
            SchemeKind::NonAveraged => (wall_other, wall),
        };
        let ratio = avg.as_secs_f64() / non.as_secs_f64().max(1e-12);
        timing.push(format!("# averaged/non_averaged wall-time ratio {ratio:.4}"));
        report.warnings.push(format!("averaged/non_averaged wall-time ratio {ratio:.3}"));
    }
    ctx.write_file("timing.csv", &(timing.join("\n") + "\n"))?;
    Ok(report)
}

fn per_step_ms(wall: Duration, steps: u64) -> f64 {
    1e3 * wall.as_secs_f64() / steps.max(1) as f64
}

fn timing_row(scheme: SchemeKind, steps: u64, wall: Duration) -> String {
    format!("{scheme},{steps},{:.6}", wall.as_secs_f64())
}

fn write_sampling_box(ctx: &Context, sim: &Simulation, b: &crate::config::BoxBlock) -> Result<(), CliError> {
    let grid = sim.grid();
    let dims = grid.dims();
    for a in 0..3 {
        if !(b.low[a] < b.high[a] && b.high[a] <= dims[a]) {
            return Err(CliError::Config(format!(
                "sampling box [{:?}, {:?}) does not fit the grid {dims:?}",
                b.low, b.high
            )));
        }
    }
    let path = ctx.out_dir().join("sampling_box.csv");
    let mut w = ctx.create("sampling_box.csv")?;
    let e = &sim.fields().e;
    let mut body = String::from("i,j,k,Ex,Ey,Ez\n");
    for k in b.low[2]..b.high[2] {
        for j in b.low[1]..b.high[1] {
            for i in b.low[0]..b.high[0] {
                let idx = grid.index(i, j, k);
                body.push_str(&format!("{i},{j},{k},{:.12e},{:.12e},{:.12e}\n", e[0][idx], e[1][idx], e[2][idx]));
            }
        }
    }
    w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(io_at(&path))
}

/// Dense spectrum of the one-step update matrix.
pub fn eig(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::default();
    let (grid, materials) = ctx.grid_and_materials()?;
    let scheme = ctx.config.scheme();
    if !ctx.config.source.is_empty() {
        report.warnings.push("sources are ignored by the eigenvalue analysis".into());
    }
    let dt = ctx.time_step(&grid, &materials, scheme)?;
    let sim = Simulation::new(grid.clone(), materials, scheme, dt)?;
    let matrix = build_update_matrix(&sim, ctx.force_size_guard)?;
    let spectrum = eigen_spectrum(&matrix)?;
    let mut w = ctx.create("spectrum.csv")?;
    write_spectrum_csv(&mut w, &spectrum)?;
    w.flush().map_err(io_at(&ctx.out_dir()))?;
    let tol = ctx.config.eig.tolerance;
    let ok = spectrum.max_deviation <= tol;
    report.failed = !ok;
    report.line("command: eig");
    report.line(format!("scheme: {scheme}"));
    report.line(format!("dims: {:?}", grid.dims()));
    report.line(format!("dt: {dt:.12e}"));
    report.line(format!("dimension: {}", matrix.dimension()));
    report.line(format!("material_digest: {:016x}", matrix.metadata.material_digest));
    report.line(format!("backend: {}", spectrum.backend));
    report.line(format!("max_modulus: {:.6e}", spectrum.max_modulus));
    report.line(format!("max_deviation: {:.6e}", spectrum.max_deviation));
    report.line(format!("tolerance: {tol:e}"));
    report.line(format!("on_unit_circle: {}", if ok { "yes" } else { "no" }));
    Ok(report)
}

/// Resolution sweep of the cloak study against the vacuum reference.
pub fn converge(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::default();
    let block = ctx
        .config
        .converge
        .as_ref()
        .ok_or_else(|| CliError::Config("converge needs a [converge] table".into()))?;
    let study = block.study();
    let cases = block.cases();
    let mut progress = Vec::new();
    let reports = run_study(&study, &cases, |r| {
        let errs: Vec<String> = r.errors.iter().map(|e| format!("{:.4e}", e.error)).collect();
        let line = format!(
            "ppw {} dt {:.4e} steps {} errors [{}] drift {:.2e}",
            r.ppw,
            r.dt,
            r.total_steps,
            errs.join(", "),
            r.drift.iter().copied().fold(0.0, f64::max)
        );
        eprintln!("{line}");
        progress.push(line);
    })?;
    report.line("command: converge");
    report.line(format!("sampling_box: {}", study.box_description()));
    for rep in &reports {
        let mut w = ctx.create(&format!("convergence_{}.csv", rep.label))?;
        write_convergence_csv(&mut w, rep)?;
        w.flush().map_err(io_at(&ctx.out_dir()))?;
        report.line(format!(
            "{}: order {:.3}{}",
            rep.label,
            rep.fit.order,
            if rep.fit.dropped_coarsest { " (coarsest point dropped)" } else { "" }
        ));
    }
    report.lines.extend(progress);
    Ok(report)
}

/// Prints the stability bound and the estimator diagnostics.
pub fn cfl(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::default();
    let (grid, materials) = ctx.grid_and_materials()?;
    let scheme = ctx.config.scheme();
    let c = ctx.cfl(&grid, &materials, scheme)?;
    report.line("command: cfl");
    report.line(format!("scheme: {scheme}"));
    report.line(format!("dims: {:?}", grid.dims()));
    report.line(format!("dt_max: {:.12e}", c.dt_max));
    report.line(format!("spectral_radius: {:.12e}", c.spectral_radius));
    report.line(format!("vacuum_dt_bound: {:.12e}", vacuum_dt_bound(&grid)));
    report.line(format!("cfl_factor: {}", ctx.config.cfl_factor()));
    report.line(format!("dt: {:.12e}", ctx.config.cfl_factor() * c.dt_max));
    report.line(format!("method: {}", c.method));
    report.line(format!("iterations: {}", c.iterations));
    report.line(format!("relative_change: {:.3e}", c.relative_change));
    Ok(report)
}

/// Cloak material file and the ε cut through its center.
pub fn cloak(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::default();
    let grid = ctx.config.grid_block()?.build()?;
    let block = ctx
        .config
        .material_block()?
        .cloak
        .as_ref()
        .ok_or_else(|| CliError::Config("cloak needs a [material.cloak] table".into()))?;
    let spec = block.spec(&grid);
    let materials = aniso_fdtd::cloak::build_cloak(&spec, &grid)?;
    let mut w = ctx.create("cloak_materials.bin")?;
    write_material_grid(&mut w, &materials)?;
    w.flush().map_err(io_at(&ctx.out_dir()))?;
    let mut w = ctx.create("cloak_cut.csv")?;
    write_cut_csv(&mut w, &grid, &materials, spec.center, block.cut_axis.0)?;
    w.flush().map_err(io_at(&ctx.out_dir()))?;
    let anisotropic = (0..materials.num_cells()).filter(|&i| !materials.is_vacuum_cell(i)).count();
    report.line("command: cloak");
    report.line(format!("kind: {:?}", spec.kind));
    report.line(format!("center: {:?}", spec.center));
    report.line(format!("dims: {:?}", grid.dims()));
    report.line(format!("radius_of_influence: {:.6}", spec.radius_of_influence()));
    report.line(format!("non_vacuum_cells: {anisotropic}"));
    report.line(format!("vacuum: {}", materials.is_vacuum()));
    Ok(report)
}
