//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_ONLY=1,5,7` restricts the run to the listed criteria.
//! `ACCEPTANCE_EXTENDED=1` adds the 12³ spectrum. `ACCEPTANCE_STRICT=1`
//! turns any FAIL into a nonzero exit status; by default the binary reports
//! and exits 0 so that a known, documented shortfall does not hide the rest
//! of the test suite.

use std::process::ExitCode;
use std::time::Instant;

use aniso_fdtd::analysis::{
    assemble_curl_matrices, assemble_global_material_matrix, build_update_matrix, eigen_spectrum, energy_norm,
    permutation_sum_material_matrix, spd_check_global, step_state,
};
use aniso_fdtd::analysis::study::{run_study, StudyCase, StudyConfig};
use aniso_fdtd::cloak::{build_cloak, transform_material, CloakSpec};
use aniso_fdtd::materials::{build_layout, check_spd, random_spd_grid, random_spd_tensor, Layout};
use aniso_fdtd::solver::compute_cfl;
use aniso_fdtd::source::{GaussianPulse, PointSource};
use aniso_fdtd::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAMMA: f64 = 100.0;
const CFL_FACTOR: f64 = 0.4;
const SEED: u64 = 2024;
const NM_PER_FS: f64 = 299.792_458;

struct Ledger {
    passed: usize,
    failed: usize,
}

impl Ledger {
    fn record(&mut self, id: &str, pass: bool, detail: String) {
        if pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        println!("{} [{id}] {detail}", if pass { "PASS" } else { "FAIL" });
    }

    fn error(&mut self, id: &str, e: Error) {
        self.record(id, false, format!("error: {e}"));
    }
}

fn periodic(n: usize, spacing: f64) -> YeeGrid {
    YeeGrid::uniform([n; 3], spacing, BoundaryKind::Periodic).unwrap()
}

fn sphere_layout(n: usize) -> Layout {
    // Off-centre on every axis so no lattice symmetry survives.
    let s = n as f64 / 8.0;
    Layout::Sphere {
        center: [3.5 * s, 4.2 * s, 4.6 * s],
        radius: 2.3 * s,
    }
}

fn flag(name: &str) -> bool {
    std::env::var(name).is_ok_and(|v| !v.is_empty() && v != "0")
}

fn selected(criterion: u32) -> bool {
    match std::env::var("ACCEPTANCE_ONLY") {
        Ok(list) if !list.trim().is_empty() => list.split(',').any(|c| c.trim().parse() == Ok(criterion)),
        _ => true,
    }
}

fn spectrum_on_unit_circle(ledger: &mut Ledger, n: usize) {
    let g = periodic(n, 1.0);
    for (name, layout) in [("sphere", sphere_layout(n)), ("random", Layout::random_uniform())] {
        let m = build_layout(&layout, GAMMA, &g, Some(SEED)).unwrap();
        for scheme in SchemeKind::ALL {
            let id = format!("1 spectrum {n}^3 {name} {scheme}");
            let run = || -> Result<(f64, usize)> {
                let dt = CFL_FACTOR * compute_cfl(&m, &g, scheme)?.dt_max;
                let sim = Simulation::new(g.clone(), m.clone(), scheme, dt)?;
                let r = eigen_spectrum(&build_update_matrix(&sim, false)?)?;
                Ok((r.max_deviation, r.eigenvalues.len()))
            };
            match run() {
                Ok((dev, count)) => ledger.record(
                    &id,
                    dev <= 1e-10,
                    format!("{count} eigenvalues, max||λ|-1| = {dev:.3e} (bound 1e-10)"),
                ),
                Err(e) => ledger.error(&id, e),
            }
        }
    }
}

fn spd_material_matrices(ledger: &mut Ledger) {
    let g = periodic(6, 1.0);
    let m = random_spd_grid(g.dims(), SEED).unwrap();
    for kind in [FieldKind::E, FieldKind::H] {
        let id = format!("2 SPD 6^3 M_{}", if kind == FieldKind::E { "xi" } else { "zeta" });
        match assemble_global_material_matrix(SchemeKind::Averaged, kind, &m, &g).and_then(|a| spd_check_global(&a)) {
            Ok(r) => ledger.record(
                &id,
                r.symmetry_defect <= 1e-12 && r.min_eigenvalue > 0.0,
                format!(
                    "symmetry defect {:.3e} (bound 1e-12), min eigenvalue {:.3e} (> 0)",
                    r.symmetry_defect, r.min_eigenvalue
                ),
            ),
            Err(e) => ledger.error(&id, e),
        }
    }
    for n in [2, 4] {
        let g = periodic(n, 1.0);
        let m = random_spd_grid(g.dims(), SEED + n as u64).unwrap();
        let mut worst: f64 = 0.0;
        for kind in [FieldKind::E, FieldKind::H] {
            let a = assemble_global_material_matrix(SchemeKind::Averaged, kind, &m, &g).unwrap();
            let b = permutation_sum_material_matrix(kind, &m, &g).unwrap();
            worst = worst.max(a.max_abs_diff(&b).unwrap());
        }
        ledger.record(
            &format!("2 stencil = permutation sum {n}^3"),
            worst <= 1e-13,
            format!("max entry difference {worst:.3e} (bound 1e-13)"),
        );
    }
}

/// Least-squares slope of `y` against `x`.
fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn long_time_boundedness(ledger: &mut Ledger) {
    const STEPS: u64 = 1_000_000;
    const WINDOW: u64 = 10_000;
    const EVERY: u64 = 10;
    // 200 nm cells, as in a 4.8 µm lattice split 24 ways.
    let g = periodic(12, 200.0);
    let m = build_layout(&Layout::random_uniform(), GAMMA, &g, Some(SEED)).unwrap();
    let tau = 2.0 * NM_PER_FS;
    let pulse = GaussianPulse::new(1.0, 5.0 * tau, tau).unwrap();
    let source_off = pulse.t0 + 6.0 * tau;
    for scheme in SchemeKind::ALL {
        let id = format!("3 boundedness 12^3 random {scheme}");
        let start = Instant::now();
        let run = || -> Result<(String, bool)> {
            let dt = CFL_FACTOR * compute_cfl(&m, &g, scheme)?.dt_max;
            let mut sim = Simulation::new(g.clone(), m.clone(), scheme, dt)?;
            sim.add_point_source(PointSource::new(Component::DZ, [3, 5, 7], pulse, &g)?)?;
            sim.set_nan_check_interval(1000);
            let mut post: Vec<(f64, f64)> = Vec::new();
            sim.run_with(STEPS, |s| {
                if s.time() > source_off && s.steps() % EVERY == 0 {
                    post.push((s.steps() as f64, energy_norm(s.fields(), s.materials())));
                }
                Ok(())
            })?;
            sim.check_finite()?;
            let first = post[0].0;
            let window_max = post.iter().take_while(|p| p.0 < first + WINDOW as f64).map(|p| p.1).fold(0.0, f64::max);
            let later = post.iter().filter(|p| p.0 >= first + WINDOW as f64);
            let hi = later.clone().map(|p| p.1).fold(0.0, f64::max);
            let lo = later.map(|p| p.1).fold(f64::INFINITY, f64::min);
            let logs: Vec<(f64, f64)> = post.iter().map(|p| (p.0, p.1.ln())).collect();
            let s = slope(&logs);
            let pass = window_max > 0.0 && hi <= 10.0 * window_max && lo >= 0.1 * window_max && s.abs() < 1e-9;
            Ok((
                format!(
                    "dt {dt:.4} nm, source off at step {}, later energy in [{:.3}, {:.3}] x window max (bound [0.1, 10]), log-energy slope {s:.3e}/step (bound 1e-9), {:.0} s",
                    first as u64,
                    lo / window_max,
                    hi / window_max,
                    start.elapsed().as_secs_f64()
                ),
                pass,
            ))
        };
        match run() {
            Ok((detail, pass)) => ledger.record(&id, pass, detail),
            Err(e) => ledger.error(&id, e),
        }
    }
}

fn convergence_orders(ledger: &mut Ledger) {
    let config = StudyConfig::reference();
    let cases = StudyCase::reference_cases();
    let start = Instant::now();
    let reports = match run_study(&config, &cases, |r| {
        eprintln!("  convergence: ppw {} done after {:.0} s", r.ppw, start.elapsed().as_secs_f64());
    }) {
        Ok(r) => r,
        Err(e) => return ledger.error("4 convergence", e),
    };
    for r in reports {
        let (lo, hi) = if r.label == "averaged_smooth" { (1.7, 2.3) } else { (0.7, 1.3) };
        let errors: Vec<String> = r.points.iter().map(|(p, e)| format!("{p}:{e:.3e}")).collect();
        ledger.record(
            &format!("4 convergence {}", r.label),
            (lo..=hi).contains(&r.fit.order),
            format!("order {:.3} (band [{lo}, {hi}]), errors {}", r.fit.order, errors.join(" ")),
        );
    }
}

fn cfl_bound(ledger: &mut Ledger) {
    let g = periodic(8, 1.0);
    let exact = 1.0 / 3f64.sqrt();
    for scheme in SchemeKind::ALL {
        match compute_cfl(&MaterialGrid::vacuum(g.dims()), &g, scheme) {
            Ok(r) => {
                let rel = (r.dt_max - exact).abs() / exact;
                ledger.record(
                    &format!("5 CFL vacuum {scheme}"),
                    rel <= 0.01,
                    format!("dt_max {:.10} vs 1/sqrt(3), relative {rel:.3e} (bound 1e-2)", r.dt_max),
                );
            }
            Err(e) => ledger.error(&format!("5 CFL vacuum {scheme}"), e),
        }
    }

    let base = build_layout(&Layout::random_uniform(), 1.0, &g, Some(SEED)).unwrap();
    for scheme in SchemeKind::ALL {
        let id = format!("5 CFL gamma scaling {scheme}");
        let run = || -> Result<f64> {
            let a = compute_cfl(&base, &g, scheme)?.dt_max;
            let mut worst: f64 = 0.0;
            for gamma in [50.0, 100.0, 144.0] {
                let b = compute_cfl(&base.scaled(gamma)?, &g, scheme)?.dt_max;
                worst = worst.max((b / a - gamma).abs() / gamma);
            }
            Ok(worst)
        };
        match run() {
            Ok(worst) => ledger.record(&id, worst <= 1e-10, format!("worst relative deviation {worst:.3e} (bound 1e-10)")),
            Err(e) => ledger.error(&id, e),
        }
    }

    let g = periodic(4, 1.0);
    let m = build_layout(&Layout::random_uniform(), GAMMA, &g, Some(SEED)).unwrap();
    for scheme in SchemeKind::ALL {
        let id = format!("5 CFL 1.05x bound 4^3 {scheme}");
        let run = || -> Result<f64> {
            let dt = 1.05 * compute_cfl(&m, &g, scheme)?.dt_max;
            let sim = Simulation::new(g.clone(), m.clone(), scheme, dt)?;
            Ok(eigen_spectrum(&build_update_matrix(&sim, false)?)?.max_modulus)
        };
        match run() {
            Ok(top) => ledger.record(&id, top > 1.0 + 1e-6, format!("max |λ| = {top:.9} (needs > 1 + 1e-6)")),
            Err(e) => ledger.error(&id, e),
        }
    }
}

fn scheme_overhead(ledger: &mut Ledger) {
    const STEPS: u64 = 60;
    let g = periodic(64, 10.0);
    let ext = g.extent();
    let spec = CloakSpec::smooth_reference([0.5 * ext[0], 0.5 * ext[1], 0.5 * ext[2]]);
    let run = || -> Result<(f64, f64)> {
        let m = build_cloak(&spec, &g)?;
        let dt = 0.9 * compute_cfl(&m, &g, SchemeKind::Averaged)?.dt_max;
        // A dense O(1) state: a source spreading into zero fields would time
        // subnormal arithmetic at the wavefront rather than the stencils.
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let n = g.num_cells();
        let (d, b) = (random_state(n, &mut rng), random_state(n, &mut rng));
        let mut sims = Vec::new();
        for scheme in [SchemeKind::NonAveraged, SchemeKind::Averaged] {
            let mut sim = Simulation::new(g.clone(), m.clone(), scheme, dt)?;
            sim.set_state(d.clone(), b.clone())?;
            sim.run(5)?;
            sims.push(sim);
        }
        // Best of alternating repetitions, so both schemes see the same machine load.
        let mut wall = [f64::INFINITY; 2];
        for _ in 0..5 {
            for (slot, sim) in sims.iter_mut().enumerate() {
                let start = Instant::now();
                sim.run(STEPS)?;
                wall[slot] = wall[slot].min(start.elapsed().as_secs_f64());
            }
        }
        Ok((wall[1] / wall[0], wall[0]))
    };
    match run() {
        Ok((ratio, base)) => ledger.record(
            "6 overhead 64^3 cloak",
            ratio <= 1.5,
            format!(
                "averaged/non-averaged wall time {ratio:.3} (bound 1.5), non-averaged {:.2} ms/step",
                1e3 * base / STEPS as f64
            ),
        ),
        Err(e) => ledger.error("6 overhead 64^3 cloak", e),
    }
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> [Vec<f64>; 3] {
    [0; 3].map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
}

fn div_b(g: &YeeGrid, b: &[Vec<f64>; 3]) -> Vec<f64> {
    let dims = g.dims();
    let sp = g.spacing();
    (0..g.num_cells())
        .map(|idx| {
            let c = g.cell_of(idx);
            (0..3)
                .map(|a| {
                    let mut p = c;
                    p[a] = (c[a] + dims[a] - 1) % dims[a];
                    (b[a][idx] - b[a][g.index(p[0], p[1], p[2])]) / sp[a]
                })
                .sum()
        })
        .collect()
}

fn max_diff(a: &[Vec<f64>; 3], b: &[Vec<f64>; 3]) -> f64 {
    a.iter().zip(b).flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max)
}

fn property_suites(ledger: &mut Ledger) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let mut worst: f64 = 0.0;
    let mut count = 0;
    for kind in [BoundaryKind::Periodic, BoundaryKind::Pec] {
        for dims in [[2, 2, 2], [3, 2, 4], [4, 3, 2], [4, 4, 4]] {
            let g = YeeGrid::new(dims, [1.0, 0.7, 1.3], [if kind == BoundaryKind::Pec { AxisBoundary::PEC } else { AxisBoundary::PERIODIC }; 3]).unwrap();
            let (ce, ch) = assemble_curl_matrices(&g).unwrap();
            worst = worst.max(ch.max_abs_diff(&ce.transpose()).unwrap());
            count += 1;
        }
    }
    ledger.record("7 curl adjointness", worst == 0.0, format!("max |C_h - C_e^T| = {worst:.3e} over {count} periodic/PEC grids"));

    let g = YeeGrid::new([5, 4, 6], [0.4, 0.5, 0.7], [AxisBoundary::PERIODIC; 3]).unwrap();
    let m = random_spd_grid(g.dims(), SEED).unwrap();
    let n = g.num_cells();
    let mut worst: f64 = 0.0;
    for scheme in SchemeKind::ALL {
        let mut sim = Simulation::new(g.clone(), m.clone(), scheme, 0.05).unwrap();
        sim.set_state(random_state(n, &mut rng), random_state(n, &mut rng)).unwrap();
        let mut prev = div_b(&g, &sim.fields().b);
        for _ in 0..50 {
            sim.step().unwrap();
            let now = div_b(&g, &sim.fields().b);
            worst = worst.max(prev.iter().zip(&now).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            prev = now;
        }
    }
    ledger.record("7 div B conservation", worst <= 1e-13, format!("max per-step change {worst:.3e} (bound 1e-13)"));

    // Grouped stencil (the solver) against the per-corner sum (1/8) Σ P_mᵀ ξ P_m.
    let g = periodic(4, 1.0);
    let m = random_spd_grid(g.dims(), SEED + 1).unwrap();
    let n = g.num_cells();
    let mut sim = Simulation::new(g.clone(), m.clone(), SchemeKind::Averaged, 0.1).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (d, b) = (random_state(n, &mut rng), random_state(n, &mut rng));
        sim.set_state(d.clone(), b.clone()).unwrap();
        for (kind, flux, field) in [(FieldKind::E, &d, &sim.fields().e), (FieldKind::H, &b, &sim.fields().h)] {
            let sum = permutation_sum_material_matrix(kind, &m, &g).unwrap();
            let x: Vec<f64> = flux.concat();
            let y = sum.mul_vec(&x).unwrap();
            let grouped: Vec<f64> = field.concat();
            worst = worst.max(y.iter().zip(&grouped).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max));
        }
    }
    ledger.record("7 grouped = ungrouped", worst <= 1e-14, format!("max difference {worst:.3e} (bound 1e-14)"));

    let g = YeeGrid::new([4, 3, 5], [1.0, 0.8, 1.2], [AxisBoundary::PERIODIC, AxisBoundary::PEC, AxisBoundary::PERIODIC]).unwrap();
    let n = g.num_cells();
    let vac = MaterialGrid::vacuum(g.dims());
    let mut a = Simulation::new(g.clone(), vac.clone(), SchemeKind::Averaged, 0.3).unwrap();
    let mut b = Simulation::new(g.clone(), vac, SchemeKind::NonAveraged, 0.3).unwrap();
    let (d0, b0) = (random_state(n, &mut rng), random_state(n, &mut rng));
    a.set_state(d0.clone(), b0.clone()).unwrap();
    b.set_state(d0, b0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        a.step().unwrap();
        b.step().unwrap();
        let (fa, fb) = (a.fields(), b.fields());
        worst = worst.max(max_diff(&fa.d, &fb.d)).max(max_diff(&fa.b, &fb.b));
    }
    ledger.record("7 identity-material equivalence", worst <= 1e-15, format!("max difference {worst:.3e} (bound 1e-15)"));

    let g = periodic(4, 1.0);
    let m = random_spd_grid(g.dims(), SEED + 2).unwrap();
    let dim = 6 * g.num_cells();
    let mut worst: f64 = 0.0;
    for scheme in SchemeKind::ALL {
        let dt = 0.5 * compute_cfl(&m, &g, scheme).unwrap().dt_max;
        let mut sim = Simulation::new(g.clone(), m.clone(), scheme, dt).unwrap();
        for _ in 0..5 {
            let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (al, be) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let mix: Vec<f64> = u.iter().zip(&v).map(|(p, q)| al * p + be * q).collect();
            let su = step_state(&mut sim, &u).unwrap();
            let sv = step_state(&mut sim, &v).unwrap();
            let sm = step_state(&mut sim, &mix).unwrap();
            for i in 0..dim {
                worst = worst.max((sm[i] - (al * su[i] + be * sv[i])).abs());
            }
        }
    }
    ledger.record("7 one-step linearity", worst <= 1e-13, format!("max deviation {worst:.3e} (bound 1e-13)"));

    let mut bad = 0;
    let mut tested = 0;
    while tested < 1000 {
        let lambda: [[f64; 3]; 3] = [[0; 3]; 3].map(|r| r.map(|_| rng.random_range(-2.0..2.0)));
        let base = random_spd_tensor(&mut rng, 0.1);
        match transform_material(&lambda, &base) {
            Ok(t) => {
                tested += 1;
                if !check_spd(&t).is_spd {
                    bad += 1;
                }
            }
            Err(Error::SingularJacobian { .. }) => continue,
            Err(e) => return ledger.error("7 transform SPD", e),
        }
    }
    ledger.record("7 transform SPD preservation", bad == 0, format!("{bad} of {tested} random transforms lost SPD"));
}

fn main() -> ExitCode {
    let mut ledger = Ledger { passed: 0, failed: 0 };
    let start = Instant::now();

    if selected(7) {
        property_suites(&mut ledger);
    }
    if selected(2) {
        spd_material_matrices(&mut ledger);
    }
    if selected(5) {
        cfl_bound(&mut ledger);
    }
    if selected(1) {
        spectrum_on_unit_circle(&mut ledger, 8);
        if flag("ACCEPTANCE_EXTENDED") {
            spectrum_on_unit_circle(&mut ledger, 12);
        } else {
            println!("SKIP [1 spectrum 12^3] set ACCEPTANCE_EXTENDED=1");
        }
    }
    if selected(6) {
        scheme_overhead(&mut ledger);
    }
    if selected(3) {
        long_time_boundedness(&mut ledger);
    }
    if selected(4) {
        convergence_orders(&mut ledger);
    }

    println!(
        "acceptance: {} passed, {} failed in {:.0} s",
        ledger.passed,
        ledger.failed,
        start.elapsed().as_secs_f64()
    );
    if ledger.failed > 0 && flag("ACCEPTANCE_STRICT") {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
