//! Plane-wave cloak convergence study.
//!
//! A plane wave travelling along −z passes a cloak centred in the domain.
//! Downstream of the cloak the exact solution is the undisturbed wave, so
//! the error of each anisotropic run is measured against a vacuum run on
//! the same grid with the same time step. Steady-state fields are reduced
//! to complex phasors by a DFT over whole periods, so the comparison does
//! not depend on the instant at which the runs are stopped.

use num_complex::Complex64;

use super::{relative_error, ErrorReport, RelativeErrorReport};
use crate::boundary::PmlParams;
use crate::cloak::{build_cloak, CloakKind, CloakSpec};
use crate::lattice::{Axis, AxisBoundary, YeeGrid};
use crate::materials::MaterialGrid;
use crate::solver::{compute_cfl, vacuum_dt_bound, SchemeKind, Simulation};
use crate::source::TfsfSpec;
use crate::{Error, Result};

/// Geometry and run-length parameters, lengths in the caller's unit with
/// c = 1 (nm and nm/c in the reference setup).
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub wavelength: f64,
    /// Extent of the region between the absorbing layers.
    pub domain: [f64; 3],
    pub pml: PmlParams,
    pub ppw: Vec<f64>,
    /// Fraction of the smallest stable time step over the cases.
    pub cfl_factor: f64,
    /// Injection plane height, measured from the bottom of the domain.
    pub plane_z: f64,
    /// Sampling box `[z0, z1)` over the full transverse extent.
    pub sample_z: (f64, f64),
    pub ramp_periods: f64,
    pub settle_periods: usize,
    pub dft_periods: usize,
}

impl StudyConfig {
    /// λ = 200, 400×400×800 with 10 UPML cells above and below.
    pub fn reference() -> Self {
        StudyConfig {
            wavelength: 200.0,
            domain: [400.0, 400.0, 800.0],
            pml: PmlParams::default(),
            ppw: vec![10.0, 15.0, 20.0, 30.0],
            cfl_factor: 0.9,
            plane_z: 720.0,
            sample_z: (40.0, 140.0),
            ramp_periods: 3.0,
            settle_periods: 12,
            dft_periods: 2,
        }
    }

    pub fn center(&self) -> [f64; 3] {
        self.domain.map(|l| 0.5 * l)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.wavelength > 0.0) || self.domain.iter().any(|l| !(*l > 0.0)) {
            return bad("wavelength and domain must be positive");
        }
        if !(self.cfl_factor > 0.0 && self.cfl_factor <= 1.0) {
            return bad("cfl_factor must lie in (0, 1]");
        }
        let (z0, z1) = self.sample_z;
        if !(0.0 <= z0 && z0 < z1 && z1 < self.plane_z && self.plane_z < self.domain[2]) {
            return bad("need 0 <= sample_z.0 < sample_z.1 < plane_z < domain height");
        }
        if self.dft_periods < 2 || self.settle_periods == 0 {
            return bad("need at least one settling period and two DFT periods");
        }
        if self.ppw.is_empty() || self.ppw.iter().any(|p| !(*p >= 4.0)) {
            return bad("resolutions must be at least 4 points per wavelength");
        }
        Ok(())
    }

    /// Uniform grid for one resolution: periodic in x and y, UPML in z.
    pub fn grid(&self, ppw: f64) -> Result<YeeGrid> {
        let delta = self.wavelength / ppw;
        let mut dims = [0; 3];
        for a in 0..3 {
            let n = (self.domain[a] / delta).round();
            if (n * delta - self.domain[a]).abs() > 1e-9 * self.domain[a] {
                return Err(Error::InvalidArgument(format!(
                    "domain length {} is not a whole number of cells of size {delta}",
                    self.domain[a]
                )));
            }
            dims[a] = n as usize;
        }
        dims[2] += 2 * self.pml.n_cells;
        YeeGrid::new(
            dims,
            [delta; 3],
            [AxisBoundary::PERIODIC, AxisBoundary::PERIODIC, AxisBoundary::UPML],
        )
    }

    /// Height of the domain bottom in grid coordinates.
    fn z_offset(&self, grid: &YeeGrid) -> f64 {
        self.pml.n_cells as f64 * grid.spacing()[2]
    }

    fn sample_layers(&self, grid: &YeeGrid) -> std::ops::Range<usize> {
        let delta = grid.spacing()[2];
        let first = (self.sample_z.0 / delta - 1e-9).ceil() as usize;
        let end = (self.sample_z.1 / delta - 1e-9).ceil() as usize;
        first + self.pml.n_cells..end + self.pml.n_cells
    }

    pub fn box_description(&self) -> String {
        let (z0, z1) = self.sample_z;
        format!(
            "x in [0, {}), y in [0, {}), z in [{z0}, {z1}) above the lower absorbing layer",
            self.domain[0], self.domain[1]
        )
    }
}

/// One anisotropic configuration of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyCase {
    pub label: String,
    pub scheme: SchemeKind,
    pub cloak: CloakKind,
}

impl StudyCase {
    /// Smooth and nonsmooth reference cloaks with both schemes.
    pub fn reference_cases() -> Vec<StudyCase> {
        let smooth = CloakSpec::smooth_reference([0.0; 3]).kind;
        let nonsmooth = CloakSpec::nonsmooth_reference([0.0; 3]).kind;
        let mut out = Vec::new();
        for (name, kind) in [("smooth", smooth), ("nonsmooth", nonsmooth)] {
            for scheme in [SchemeKind::Averaged, SchemeKind::NonAveraged] {
                out.push(StudyCase {
                    label: format!("{}_{name}", scheme.name()),
                    scheme,
                    cloak: kind,
                });
            }
        }
        out
    }

    fn materials(&self, config: &StudyConfig, grid: &YeeGrid) -> Result<MaterialGrid> {
        let mut center = config.center();
        center[2] += config.z_offset(grid);
        build_cloak(&CloakSpec::new(self.cloak, center), grid)
    }
}

/// Errors of every case at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionResult {
    pub ppw: f64,
    pub delta: f64,
    pub dt: f64,
    pub steps_per_period: usize,
    pub total_steps: u64,
    /// Per case, in the order given.
    pub errors: Vec<RelativeErrorReport>,
    /// Relative change between the first and last DFT period, reference run
    /// first and then each case; small values indicate a steady state.
    pub drift: Vec<f64>,
    /// Mean phasor magnitude of the reference field in the box.
    pub reference_amplitude: f64,
}

/// Period-by-period phasors of E over the sampling box.
struct PhasorRecorder {
    cells: Vec<usize>,
    omega: f64,
    /// `[period][point][component]`.
    periods: Vec<Vec<[Complex64; 3]>>,
    steps_per_period: usize,
}

impl PhasorRecorder {
    fn new(cells: Vec<usize>, omega: f64, steps_per_period: usize, count: usize) -> Self {
        let n = cells.len();
        PhasorRecorder {
            cells,
            omega,
            periods: vec![vec![[Complex64::new(0.0, 0.0); 3]; n]; count],
            steps_per_period,
        }
    }

    fn record(&mut self, sim: &Simulation, window_step: usize) {
        let period = window_step / self.steps_per_period;
        let w = Complex64::from_polar(2.0 / self.steps_per_period as f64, -self.omega * sim.time());
        let e = &sim.fields().e;
        for (acc, &idx) in self.periods[period].iter_mut().zip(&self.cells) {
            for a in 0..3 {
                acc[a] += w * e[a][idx];
            }
        }
    }

    fn mean(&self) -> Vec<Vec<Complex64>> {
        let scale = 1.0 / self.periods.len() as f64;
        (0..self.cells.len())
            .map(|j| {
                (0..3)
                    .map(|a| self.periods.iter().map(|p| p[j][a]).sum::<Complex64>() * scale)
                    .collect()
            })
            .collect()
    }

    fn drift(&self) -> Result<f64> {
        let as_vec = |p: &Vec<[Complex64; 3]>| -> Vec<Vec<Complex64>> { p.iter().map(|v| v.to_vec()).collect() };
        let first = as_vec(&self.periods[0]);
        let last = as_vec(self.periods.last().expect("at least two periods"));
        Ok(relative_error(&last, &first)?.error)
    }
}

fn run_phasors(
    config: &StudyConfig,
    grid: &YeeGrid,
    materials: MaterialGrid,
    scheme: SchemeKind,
    dt: f64,
    steps_per_period: usize,
) -> Result<PhasorRecorder> {
    let mut sim = Simulation::new(grid.clone(), materials, scheme, dt)?.with_pml(config.pml)?;
    let delta = grid.spacing()[2];
    let plane = ((config.plane_z + config.z_offset(grid)) / delta).round() as usize;
    sim.set_tfsf(TfsfSpec {
        axis: Axis::Z,
        sign: -1,
        plane,
        wavelength: config.wavelength,
        amplitude: 1.0,
        polarization: [1.0, 0.0, 0.0],
        ramp_periods: config.ramp_periods,
    })?;
    let dims = grid.dims();
    let cells: Vec<usize> = config
        .sample_layers(grid)
        .flat_map(|k| (0..dims[1]).flat_map(move |j| (0..dims[0]).map(move |i| (i, j, k))))
        .map(|(i, j, k)| grid.index(i, j, k))
        .collect();
    if cells.is_empty() {
        return Err(Error::InvalidArgument("sampling box contains no cells".into()));
    }
    let omega = 2.0 * std::f64::consts::PI / config.wavelength;
    let mut rec = PhasorRecorder::new(cells, omega, steps_per_period, config.dft_periods);
    sim.run((config.settle_periods * steps_per_period) as u64)?;
    let mut n = 0;
    sim.run_with((config.dft_periods * steps_per_period) as u64, |s| {
        rec.record(s, n);
        n += 1;
        Ok(())
    })?;
    Ok(rec)
}

/// Runs the vacuum reference and every case at one resolution with a
/// common time step.
pub fn run_resolution(config: &StudyConfig, cases: &[StudyCase], ppw: f64) -> Result<ResolutionResult> {
    config.validate()?;
    let grid = config.grid(ppw)?;
    // Cases sharing a cloak share its materials.
    let mut built: Vec<(CloakKind, MaterialGrid)> = Vec::new();
    let mut materials = Vec::with_capacity(cases.len());
    let mut dt_max = vacuum_dt_bound(&grid);
    for case in cases {
        let m = match built.iter().find(|(k, _)| *k == case.cloak) {
            Some((_, m)) => m.clone(),
            None => {
                let m = case.materials(config, &grid)?;
                built.push((case.cloak, m.clone()));
                m
            }
        };
        dt_max = dt_max.min(compute_cfl(&m, &grid, case.scheme)?.dt_max);
        materials.push(m);
    }
    drop(built);
    let period = config.wavelength;
    let steps_per_period = (period / (config.cfl_factor * dt_max)).ceil() as usize;
    let dt = period / steps_per_period as f64;

    let reference = run_phasors(
        config,
        &grid,
        MaterialGrid::vacuum(grid.dims()),
        SchemeKind::NonAveraged,
        dt,
        steps_per_period,
    )?;
    let ref_phasors = reference.mean();
    let reference_amplitude = ref_phasors
        .iter()
        .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .sum::<f64>()
        / ref_phasors.len() as f64;
    let mut drift = vec![reference.drift()?];
    let mut errors = Vec::with_capacity(cases.len());
    for (case, m) in cases.iter().zip(materials) {
        let rec = run_phasors(config, &grid, m, case.scheme, dt, steps_per_period)?;
        drift.push(rec.drift()?);
        errors.push(relative_error(&rec.mean(), &ref_phasors)?);
    }
    Ok(ResolutionResult {
        ppw,
        delta: grid.spacing()[0],
        dt,
        steps_per_period,
        total_steps: ((config.settle_periods + config.dft_periods) * steps_per_period) as u64,
        errors,
        drift,
        reference_amplitude,
    })
}

/// Full sweep; `progress` sees each resolution as it completes.
pub fn run_study<F>(config: &StudyConfig, cases: &[StudyCase], mut progress: F) -> Result<Vec<ErrorReport>>
where
    F: FnMut(&ResolutionResult),
{
    if config.ppw.len() < 3 {
        return Err(Error::InvalidArgument("a convergence study needs at least three resolutions".into()));
    }
    let mut per_case: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cases.len()];
    for &ppw in &config.ppw {
        let res = run_resolution(config, cases, ppw)?;
        for (points, e) in per_case.iter_mut().zip(&res.errors) {
            points.push((ppw, e.error));
        }
        progress(&res);
    }
    cases
        .iter()
        .zip(per_case)
        .map(|(case, points)| ErrorReport::new(case.label.clone(), points, config.box_description()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> StudyConfig {
        StudyConfig {
            wavelength: 200.0,
            domain: [100.0, 100.0, 400.0],
            pml: PmlParams {
                n_cells: 6,
                ..PmlParams::default()
            },
            ppw: vec![10.0],
            cfl_factor: 0.9,
            plane_z: 360.0,
            sample_z: (40.0, 140.0),
            ramp_periods: 1.0,
            settle_periods: 4,
            dft_periods: 2,
        }
    }

    #[test]
    fn reference_geometry() {
        let c = StudyConfig::reference();
        c.validate().unwrap();
        let g = c.grid(20.0).unwrap();
        assert_eq!(g.dims(), [40, 40, 100]);
        assert_eq!(c.sample_layers(&g), 14..24);
        let g = c.grid(15.0).unwrap();
        assert_eq!(g.dims(), [30, 30, 80]);
        assert!(c.grid(7.3).is_err());
        assert_eq!(StudyCase::reference_cases().len(), 4);
    }

    #[test]
    fn vacuum_case_reproduces_reference() {
        // A cloak of vanishing depth is vacuum: the error is exactly zero
        // and the steady-state phasor has unit amplitude.
        let config = small();
        let case = StudyCase {
            label: "flat".into(),
            scheme: SchemeKind::Averaged,
            cloak: CloakKind::Smooth {
                n: 3.0,
                depth: 0.0,
                sigma: 20.0,
            },
        };
        let r = run_resolution(&config, &[case], 10.0).unwrap();
        assert_eq!(r.errors[0].error, 0.0);
        assert_eq!(r.errors[0].excluded, 0);
        assert!((r.reference_amplitude - 1.0).abs() < 0.05, "{}", r.reference_amplitude);
        assert!(r.drift[0] < 1e-3, "{:?}", r.drift);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = small();
        c.sample_z = (200.0, 100.0);
        assert!(c.validate().is_err());
        let mut c = small();
        c.dft_periods = 1;
        assert!(c.validate().is_err());
        let c = small();
        assert!(run_study(&c, &StudyCase::reference_cases(), |_| {}).is_err());
    }
}
