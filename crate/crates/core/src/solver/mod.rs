//! Leapfrog time stepping.
//!
//! One step advances `(D^n, B^{n-1/2})` to `(D^{n+1}, B^{n+1/2})`:
//! B from the curl of E, H from B, D from the curl of H, E from D, then the
//! boundary hooks. E and H are always derived from the fluxes through the
//! selected constitutive scheme, except inside PML layers.

mod cfl;
mod constitutive;
mod curl;

use std::fmt;
use std::str::FromStr;

pub use cfl::{compute_cfl, compute_cfl_with, vacuum_dt_bound, CflMethod, CflOptions, CflReport};

pub(crate) use constitutive::{Neighbours, Stencil};
pub(crate) use curl::{use_parallel, CurlGeometry};

use crate::boundary::{apply_pec, axis_maps, PmlParams, PmlState};
use crate::lattice::{Axis, FieldSet, YeeGrid};
use crate::materials::MaterialGrid;
use crate::source::{PointSource, TfsfSource, TfsfSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SchemeKind {
    NonAveraged,
    #[default]
    Averaged,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 2] = [SchemeKind::NonAveraged, SchemeKind::Averaged];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::NonAveraged => "non_averaged",
            SchemeKind::Averaged => "averaged",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "non_averaged" | "nonaveraged" => Ok(SchemeKind::NonAveraged),
            "averaged" => Ok(SchemeKind::Averaged),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme '{other}', expected 'non_averaged' or 'averaged'"
            ))),
        }
    }
}

/// Curl and constitutive operators for one grid, material and scheme.
#[derive(Debug, Clone)]
pub(crate) struct Operators {
    pub curl: CurlGeometry,
    pub nb: Neighbours,
    pub e_stencil: Stencil,
    pub h_stencil: Stencil,
    pub parallel: bool,
}

impl Operators {
    pub fn new(grid: &YeeGrid, materials: &MaterialGrid, scheme: SchemeKind) -> Result<Self> {
        if materials.dims() != grid.dims() {
            return Err(Error::InvalidMaterial(format!(
                "material grid {:?} does not match lattice {:?}",
                materials.dims(),
                grid.dims()
            )));
        }
        let maps = axis_maps(grid);
        let nb = Neighbours::new(grid.dims(), maps);
        Ok(Operators {
            curl: CurlGeometry {
                dims: grid.dims(),
                maps,
                spacing: grid.spacing(),
            },
            e_stencil: Stencil::new_electric(scheme, materials.xi_all(), &nb),
            h_stencil: Stencil::new_magnetic(scheme, materials.zeta_all(), &nb),
            nb,
            parallel: use_parallel(grid.num_cells()),
        })
    }

    /// `b += scale·curl(e)` with backward differences.
    pub fn curl_e(&self, b: &mut [Vec<f64>; 3], e: &[Vec<f64>; 3], scale: f64) {
        for a in Axis::ALL {
            let (ab, ac) = a.cyclic();
            self.curl
                .apply(&mut b[a.index()], a, &e[ab.index()], &e[ac.index()], scale, false, self.parallel);
        }
    }

    /// `d += scale·curl(h)` with forward differences.
    pub fn curl_h(&self, d: &mut [Vec<f64>; 3], h: &[Vec<f64>; 3], scale: f64) {
        for a in Axis::ALL {
            let (ab, ac) = a.cyclic();
            self.curl
                .apply(&mut d[a.index()], a, &h[ab.index()], &h[ac.index()], scale, true, self.parallel);
        }
    }

    pub fn electric(&self, e: &mut [Vec<f64>; 3], d: &[Vec<f64>; 3]) {
        self.e_stencil.apply(e, d, &self.nb, self.parallel);
    }

    pub fn magnetic(&self, h: &mut [Vec<f64>; 3], b: &[Vec<f64>; 3]) {
        self.h_stencil.apply(h, b, &self.nb, self.parallel);
    }
}

/// Default interval, in steps, between non-finite checks.
pub const DEFAULT_NAN_CHECK_INTERVAL: u64 = 100;

/// A running simulation.
#[derive(Debug, Clone)]
pub struct Simulation {
    grid: YeeGrid,
    materials: MaterialGrid,
    scheme: SchemeKind,
    dt: f64,
    fields: FieldSet,
    ops: Operators,
    pml: Option<PmlState>,
    tfsf: Option<TfsfSource>,
    point_sources: Vec<PointSource>,
    nan_check_interval: u64,
}

impl Simulation {
    /// A simulation at rest. Grids with UPML faces get the default layer
    /// parameters; use [`Simulation::with_pml`] to change them.
    pub fn new(grid: YeeGrid, materials: MaterialGrid, scheme: SchemeKind, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let ops = Operators::new(&grid, &materials, scheme)?;
        let fields = FieldSet::zeros(grid.dims());
        let mut sim = Simulation {
            grid,
            materials,
            scheme,
            dt,
            fields,
            ops,
            pml: None,
            tfsf: None,
            point_sources: Vec::new(),
            nan_check_interval: DEFAULT_NAN_CHECK_INTERVAL,
        };
        sim.install_pml(&PmlParams::default())?;
        Ok(sim)
    }

    pub fn with_pml(mut self, params: PmlParams) -> Result<Self> {
        self.install_pml(&params)?;
        Ok(self)
    }

    fn install_pml(&mut self, params: &PmlParams) -> Result<()> {
        self.pml = match params.build(&self.grid)? {
            Some(profile) => {
                profile.check_vacuum(&self.grid, &self.materials)?;
                Some(PmlState::new(profile, &self.grid))
            }
            None => None,
        };
        Ok(())
    }

    /// Check for non-finite values every `interval` steps (0 disables).
    pub fn set_nan_check_interval(&mut self, interval: u64) {
        self.nan_check_interval = interval;
    }

    pub fn add_point_source(&mut self, source: PointSource) -> Result<()> {
        self.grid.check_cell(source.cell)?;
        self.point_sources.push(source);
        Ok(())
    }

    pub fn set_tfsf(&mut self, spec: TfsfSpec) -> Result<()> {
        if let Some(p) = &self.pml {
            let prof = p.profile();
            if prof.axis == spec.axis && (prof.in_layer(spec.plane) || prof.in_layer(spec.plane.saturating_sub(1))) {
                return Err(Error::InvalidSource(format!(
                    "plane-wave plane {} lies inside the absorbing layer",
                    spec.plane
                )));
            }
        }
        self.tfsf = Some(TfsfSource::new(spec, &self.grid, &self.materials, self.dt)?);
        Ok(())
    }

    pub fn has_sources(&self) -> bool {
        self.tfsf.is_some() || !self.point_sources.is_empty()
    }

    pub fn grid(&self) -> &YeeGrid {
        &self.grid
    }

    pub fn materials(&self) -> &MaterialGrid {
        &self.materials
    }

    pub fn scheme(&self) -> SchemeKind {
        self.scheme
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn pml(&self) -> Option<&PmlState> {
        self.pml.as_ref()
    }

    pub fn tfsf(&self) -> Option<&TfsfSource> {
        self.tfsf.as_ref()
    }

    pub fn steps(&self) -> u64 {
        self.fields.steps
    }

    /// Time level of D and E.
    pub fn time(&self) -> f64 {
        self.fields.steps as f64 * self.dt
    }

    pub fn fields(&self) -> &FieldSet {
        &self.fields
    }

    /// Replace the fluxes and recompute E and H from them.
    pub fn set_state(&mut self, d: [Vec<f64>; 3], b: [Vec<f64>; 3]) -> Result<()> {
        let n = self.grid.num_cells();
        if d.iter().chain(b.iter()).any(|v| v.len() != n) {
            return Err(Error::InvalidArgument(format!("state arrays must have {n} entries")));
        }
        self.fields.d = d;
        self.fields.b = b;
        self.ops.electric(&mut self.fields.e, &self.fields.d);
        self.ops.magnetic(&mut self.fields.h, &self.fields.b);
        Ok(())
    }

    /// Advance one full step.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.dt;
        let f = &mut self.fields;

        if let Some(p) = &mut self.pml {
            p.save(false, f);
        }
        self.ops.curl_e(&mut f.b, &f.e, -dt);
        if let Some(t) = &mut self.tfsf {
            t.correct_b(f, &self.grid);
            t.advance_magnetic();
        }
        self.ops.magnetic(&mut f.h, &f.b);
        if let Some(p) = &self.pml {
            p.pml_step(false, f, dt);
        }

        if let Some(p) = &mut self.pml {
            p.save(true, f);
        }
        self.ops.curl_h(&mut f.d, &f.h, dt);
        if let Some(t) = &mut self.tfsf {
            t.correct_d(f, &self.grid);
            t.advance_electric();
        }
        let t_mid = (f.steps as f64 + 0.5) * dt;
        for s in &self.point_sources {
            s.inject(f, &self.grid, t_mid, dt);
        }
        self.ops.electric(&mut f.e, &f.d);
        if let Some(p) = &self.pml {
            p.pml_step(true, f, dt);
        }
        apply_pec(f, &self.grid);

        f.steps += 1;
        if self.nan_check_interval > 0 && f.steps.is_multiple_of(self.nan_check_interval) {
            self.check_finite()?;
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.fields.first_non_finite() {
            Some(c) => Err(Error::NonFinite {
                component: c.to_string(),
                step: self.fields.steps,
            }),
            None => Ok(()),
        }
    }

    pub fn run(&mut self, steps: u64) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    /// Run `steps` steps, calling `observe` after each.
    pub fn run_with<F>(&mut self, steps: u64, mut observe: F) -> Result<()>
    where
        F: FnMut(&Simulation) -> Result<()>,
    {
        for _ in 0..steps {
            self.step()?;
            observe(self)?;
        }
        Ok(())
    }
}
