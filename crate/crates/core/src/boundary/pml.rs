use std::fmt;
use std::str::FromStr;

use crate::lattice::{Axis, BoundaryKind, FieldKind, FieldSet, YeeGrid};
use crate::materials::MaterialGrid;
use crate::{Error, Result};

/// Which of the two quoted peak values is attached to σ and which to κ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PmlPairing {
    /// σ_max = 8(m+1)/(n Δ), κ_max = 1.
    #[default]
    Conventional,
    /// σ_max = 1, κ_max = 8(m+1)/(n Δ), both in normalized units.
    Literal,
}

impl FromStr for PmlPairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conventional" => Ok(PmlPairing::Conventional),
            "literal" => Ok(PmlPairing::Literal),
            other => Err(Error::InvalidBoundary(format!("unknown PML pairing '{other}'"))),
        }
    }
}

impl fmt::Display for PmlPairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PmlPairing::Conventional => "conventional",
            PmlPairing::Literal => "literal",
        })
    }
}

/// User-facing PML parameters; unset peaks follow `pairing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmlParams {
    pub m: f64,
    pub n_cells: usize,
    pub sigma_max: Option<f64>,
    pub kappa_max: Option<f64>,
    pub pairing: PmlPairing,
}

impl Default for PmlParams {
    fn default() -> Self {
        PmlParams {
            m: 3.0,
            n_cells: 10,
            sigma_max: None,
            kappa_max: None,
            pairing: PmlPairing::Conventional,
        }
    }
}

impl PmlParams {
    /// Peak (σ_max, κ_max) for cell size `delta`.
    pub fn peaks(&self, delta: f64) -> (f64, f64) {
        let formula = 8.0 * (self.m + 1.0) / (self.n_cells as f64 * delta);
        let (s, k) = match self.pairing {
            PmlPairing::Conventional => (formula, 1.0),
            PmlPairing::Literal => (1.0, formula),
        };
        (self.sigma_max.unwrap_or(s), self.kappa_max.unwrap_or(k))
    }

    pub fn build(&self, grid: &YeeGrid) -> Result<Option<PmlProfile>> {
        let Some(axis) = pml_axis(grid)? else {
            return Ok(None);
        };
        let (s, k) = self.peaks(grid.spacing()[axis.index()]);
        build_pml(self.m, self.n_cells, s, k, grid).map(Some)
    }
}

fn pml_axis(grid: &YeeGrid) -> Result<Option<Axis>> {
    let axes: Vec<Axis> = Axis::ALL
        .into_iter()
        .filter(|&a| grid.boundary(a).has(BoundaryKind::Upml))
        .collect();
    match axes.as_slice() {
        [] => Ok(None),
        [a] => Ok(Some(*a)),
        _ => Err(Error::InvalidBoundary("UPML is supported on a single axis only".into())),
    }
}

/// Polynomially graded UPML along one axis, with per-position coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PmlProfile {
    pub axis: Axis,
    pub m: f64,
    pub n_pml: usize,
    pub sigma_max: f64,
    pub kappa_max: f64,
    pub low: bool,
    pub high: bool,
    delta: f64,
    n_axis: usize,
    /// σ and κ at integer positions `x_k`, indexed by cell along the axis.
    pub sigma_int: Vec<f64>,
    pub kappa_int: Vec<f64>,
    /// σ and κ at half positions `x_{k+1/2}`.
    pub sigma_half: Vec<f64>,
    pub kappa_half: Vec<f64>,
}

/// Grade σ and κ over `n_pml` cells on every UPML face of the grid.
pub fn build_pml(m: f64, n_pml: usize, sigma_max: f64, kappa_max: f64, grid: &YeeGrid) -> Result<PmlProfile> {
    let axis = pml_axis(grid)?.ok_or_else(|| Error::InvalidBoundary("grid has no UPML face".into()))?;
    if n_pml == 0 {
        return Err(Error::InvalidBoundary("PML needs at least one cell".into()));
    }
    if !(m >= 0.0 && m.is_finite()) || !(sigma_max >= 0.0 && sigma_max.is_finite()) {
        return Err(Error::InvalidBoundary(format!(
            "invalid grading (m = {m}, sigma_max = {sigma_max})"
        )));
    }
    if !(kappa_max > 0.0 && kappa_max.is_finite()) {
        return Err(Error::InvalidBoundary(format!("kappa_max must be positive, got {kappa_max}")));
    }
    let n_axis = grid.dims()[axis.index()];
    if 2 * n_pml > n_axis {
        return Err(Error::InvalidBoundary(format!(
            "PML of {n_pml} cells is thicker than half of the {n_axis}-cell axis {axis}"
        )));
    }
    let b = grid.boundary(axis);
    let mut p = PmlProfile {
        axis,
        m,
        n_pml,
        sigma_max,
        kappa_max,
        low: b.low == BoundaryKind::Upml,
        high: b.high == BoundaryKind::Upml,
        delta: grid.spacing()[axis.index()],
        n_axis,
        sigma_int: Vec::new(),
        kappa_int: Vec::new(),
        sigma_half: Vec::new(),
        kappa_half: Vec::new(),
    };
    for k in 0..n_axis {
        let (s, kk) = p.at(k as f64);
        p.sigma_int.push(s);
        p.kappa_int.push(kk);
        let (s, kk) = p.at(k as f64 + 0.5);
        p.sigma_half.push(s);
        p.kappa_half.push(kk);
    }
    Ok(p)
}

impl PmlProfile {
    pub fn thickness(&self) -> f64 {
        self.n_pml as f64 * self.delta
    }

    pub fn sigma(&self, depth: f64) -> f64 {
        let u = (depth / self.thickness()).clamp(0.0, 1.0);
        self.sigma_max * u.powf(self.m)
    }

    pub fn kappa(&self, depth: f64) -> f64 {
        let u = (depth / self.thickness()).clamp(0.0, 1.0);
        1.0 + (self.kappa_max - 1.0) * u.powf(self.m)
    }

    /// Depth into the layer of the position `s·Δ` along the axis (0 outside).
    pub fn depth_at(&self, s: f64) -> f64 {
        let low_if = self.n_pml as f64;
        let high_if = (self.n_axis - self.n_pml) as f64;
        let d = if self.low && s < low_if {
            low_if - s
        } else if self.high && s > high_if {
            s - high_if
        } else {
            0.0
        };
        d * self.delta
    }

    fn at(&self, s: f64) -> (f64, f64) {
        let d = self.depth_at(s);
        (self.sigma(d), self.kappa(d))
    }

    /// Whether a cell index along the axis lies in a layer.
    pub fn in_layer(&self, k: usize) -> bool {
        (self.low && k < self.n_pml) || (self.high && k >= self.n_axis - self.n_pml)
    }

    /// Linear indices of every layer cell and their coordinate along the axis.
    fn layer_cells(&self, grid: &YeeGrid) -> (Vec<usize>, Vec<usize>) {
        let mut cells = Vec::new();
        let mut pos = Vec::new();
        for idx in 0..grid.num_cells() {
            let k = grid.cell_of(idx)[self.axis.index()];
            if self.in_layer(k) {
                cells.push(idx);
                pos.push(k);
            }
        }
        (cells, pos)
    }

    /// Layers must hold vacuum, including the neighbour cells that enter the
    /// averaged stencils next to the interfaces.
    pub fn check_vacuum(&self, grid: &YeeGrid, materials: &MaterialGrid) -> Result<()> {
        for idx in 0..grid.num_cells() {
            let k = grid.cell_of(idx)[self.axis.index()];
            let near = self.in_layer(k)
                || (k > 0 && self.in_layer(k - 1))
                || (k + 1 < self.n_axis && self.in_layer(k + 1));
            if near && !materials.is_vacuum_cell(idx) {
                return Err(Error::InvalidBoundary(format!(
                    "non-vacuum material in or next to the PML at cell {:?}",
                    grid.cell_of(idx)
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Saved {
    flux: [Vec<f64>; 3],
    field: [Vec<f64>; 3],
}

/// Auxiliary storage for the UPML constitutive ODEs.
///
/// Inside the layers the constitutive relation is replaced by the stretched
/// one: for the transverse components `dD/dt = κ dE/dt + σ E`, for the normal
/// component `κ dD/dt + σ D = dE/dt`, both centred at the half step. The
/// magnetic pair (B, H) obeys the same equations.
#[derive(Debug, Clone)]
pub struct PmlState {
    profile: PmlProfile,
    cells: Vec<usize>,
    pos: Vec<usize>,
    electric: Saved,
    magnetic: Saved,
}

impl PmlState {
    pub fn new(profile: PmlProfile, grid: &YeeGrid) -> Self {
        let (cells, pos) = profile.layer_cells(grid);
        let n = cells.len();
        let zeros = || Saved {
            flux: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            field: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        };
        PmlState {
            profile,
            cells,
            pos,
            electric: zeros(),
            magnetic: zeros(),
        }
    }

    pub fn profile(&self) -> &PmlProfile {
        &self.profile
    }

    pub fn num_layer_cells(&self) -> usize {
        self.cells.len()
    }

    /// Record the layer values of (D, E) or (B, H) before their update.
    pub fn save(&mut self, electric: bool, fields: &FieldSet) {
        let (flux_kind, field_kind, saved) = if electric {
            (FieldKind::D, FieldKind::E, &mut self.electric)
        } else {
            (FieldKind::B, FieldKind::H, &mut self.magnetic)
        };
        for a in 0..3 {
            let flux = &fields.kind(flux_kind)[a];
            let field = &fields.kind(field_kind)[a];
            for (n, &idx) in self.cells.iter().enumerate() {
                saved.flux[a][n] = flux[idx];
                saved.field[a][n] = field[idx];
            }
        }
    }

    /// Overwrite the layer values of E (or H) with the stretched-coordinate
    /// update, given the new flux and the values recorded by [`save`].
    ///
    /// [`save`]: PmlState::save
    pub fn pml_step(&self, electric: bool, fields: &mut FieldSet, dt: f64) {
        let p = &self.profile;
        let (flux_kind, field_kind, saved) = if electric {
            (FieldKind::D, FieldKind::E, &self.electric)
        } else {
            (FieldKind::B, FieldKind::H, &self.magnetic)
        };
        let normal = p.axis.index();
        for a in 0..3 {
            // D/E sit at integer positions along their own axis, B/H at half
            // positions; every other axis has the opposite offset.
            let integer = (a == normal) == electric;
            let (sig, kap) = if integer {
                (&p.sigma_int, &p.kappa_int)
            } else {
                (&p.sigma_half, &p.kappa_half)
            };
            let new_flux: Vec<f64> = self.cells.iter().map(|&idx| fields.kind(flux_kind)[a][idx]).collect();
            let field = &mut fields.kind_mut(field_kind)[a];
            for (n, &idx) in self.cells.iter().enumerate() {
                let k = self.pos[n];
                let (s, kp) = (sig[k], kap[k]);
                if s == 0.0 && kp == 1.0 {
                    continue;
                }
                let d_new = new_flux[n];
                let d_old = saved.flux[a][n];
                let e_old = saved.field[a][n];
                field[idx] = if a == normal {
                    e_old + kp * (d_new - d_old) + 0.5 * s * dt * (d_new + d_old)
                } else {
                    let den = 2.0 * kp + s * dt;
                    ((2.0 * kp - s * dt) / den) * e_old + (2.0 / den) * (d_new - d_old)
                };
            }
        }
    }
}
