//! Grid geometry, field storage and index conventions.
//!
//! Cell `(i, j, k)` spans `[x_i, x_{i+1}] x [y_j, y_{j+1}] x [z_k, z_{k+1}]`
//! with `x_i = i * dx`. The cell owns the D/E components centered on its
//! three low-side faces and the B/H components centered on the three edges
//! leaving its low corner:
//!
//! ```text
//! Dx, Ex  (x_i,     y_j+1/2, z_k+1/2)      Bx, Hx  (x_i+1/2, y_j,     z_k)
//! Dy, Ey  (x_i+1/2, y_j,     z_k+1/2)      By, Hy  (x_i,     y_j+1/2, z_k)
//! Dz, Ez  (x_i+1/2, y_j+1/2, z_k)          Bz, Hz  (x_i,     y_j,     z_k+1/2)
//! ```
//!
//! Arrays are linearized with x fastest: `idx = i + nx * (j + ny * k)`.

mod snapshot;

pub use snapshot::{read_snapshot, write_csv_slice, write_snapshot, Snapshot};

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Axis {
        Axis::ALL[i % 3]
    }

    /// The next two axes in cyclic order, `(a+1, a+2)`.
    pub fn cyclic(self) -> (Axis, Axis) {
        let a = self.index();
        (Axis::from_index(a + 1), Axis::from_index(a + 2))
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            _ => Err(Error::InvalidArgument(format!("unknown axis `{s}`"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["x", "y", "z"][self.index()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Periodic,
    Pec,
    Upml,
}

impl FromStr for BoundaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" => Ok(BoundaryKind::Periodic),
            "pec" => Ok(BoundaryKind::Pec),
            "upml" | "pml" => Ok(BoundaryKind::Upml),
            _ => Err(Error::InvalidBoundary(format!("unknown boundary kind `{s}`"))),
        }
    }
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryKind::Periodic => "periodic",
            BoundaryKind::Pec => "pec",
            BoundaryKind::Upml => "upml",
        })
    }
}

/// Boundary kinds on the low and high face of one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AxisBoundary {
    pub low: BoundaryKind,
    pub high: BoundaryKind,
}

impl AxisBoundary {
    pub const PERIODIC: AxisBoundary = AxisBoundary::both(BoundaryKind::Periodic);
    pub const PEC: AxisBoundary = AxisBoundary::both(BoundaryKind::Pec);
    pub const UPML: AxisBoundary = AxisBoundary::both(BoundaryKind::Upml);

    pub const fn both(kind: BoundaryKind) -> Self {
        AxisBoundary { low: kind, high: kind }
    }

    pub fn is_periodic(&self) -> bool {
        self.low == BoundaryKind::Periodic
    }

    pub fn has(&self, kind: BoundaryKind) -> bool {
        self.low == kind || self.high == kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct YeeGrid {
    dims: [usize; 3],
    spacing: [f64; 3],
    boundaries: [AxisBoundary; 3],
}

impl YeeGrid {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], boundaries: [AxisBoundary; 3]) -> Result<Self> {
        for a in 0..3 {
            if dims[a] < 2 {
                return Err(Error::InvalidGrid(format!(
                    "axis {} has {} cells; at least 2 are required",
                    Axis::from_index(a),
                    dims[a]
                )));
            }
            if !(spacing[a] > 0.0 && spacing[a].is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "axis {} spacing must be positive and finite, got {}",
                    Axis::from_index(a),
                    spacing[a]
                )));
            }
            let b = boundaries[a];
            let periodic_low = b.low == BoundaryKind::Periodic;
            let periodic_high = b.high == BoundaryKind::Periodic;
            if periodic_low != periodic_high {
                return Err(Error::InvalidGrid(format!(
                    "axis {} mixes periodic with {} boundaries",
                    Axis::from_index(a),
                    if periodic_low { b.high } else { b.low }
                )));
            }
        }
        Ok(YeeGrid {
            dims,
            spacing,
            boundaries,
        })
    }

    /// Grid with the same boundary kind on every face.
    pub fn uniform(dims: [usize; 3], spacing: f64, kind: BoundaryKind) -> Result<Self> {
        YeeGrid::new(dims, [spacing; 3], [AxisBoundary::both(kind); 3])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn boundaries(&self) -> [AxisBoundary; 3] {
        self.boundaries
    }

    pub fn boundary(&self, axis: Axis) -> AxisBoundary {
        self.boundaries[axis.index()]
    }

    pub fn num_cells(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_fully_periodic(&self) -> bool {
        self.boundaries.iter().all(|b| b.is_periodic())
    }

    /// Physical extent `n * d` of each axis.
    pub fn extent(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.dims[a] as f64 * self.spacing[a])
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn cell_of(&self, idx: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    pub fn check_cell(&self, cell: [usize; 3]) -> Result<()> {
        let [nx, ny, nz] = self.dims;
        if cell[0] < nx && cell[1] < ny && cell[2] < nz {
            Ok(())
        } else {
            Err(Error::CellOutOfRange {
                i: cell[0],
                j: cell[1],
                k: cell[2],
                nx,
                ny,
                nz,
            })
        }
    }

    pub fn cell_center(&self, cell: [usize; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| (cell[a] as f64 + 0.5) * self.spacing[a])
    }

    /// Staggered physical location of `component` owned by `cell`.
    pub fn field_position(&self, component: Component, cell: [usize; 3]) -> Result<[f64; 3]> {
        self.check_cell(cell)?;
        let off = component.offset();
        Ok([0, 1, 2].map(|a| (cell[a] as f64 + off[a]) * self.spacing[a]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    D,
    E,
    B,
    H,
}

impl FieldKind {
    /// D/E sit on faces, B/H on edges.
    pub fn is_electric(self) -> bool {
        matches!(self, FieldKind::D | FieldKind::E)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Component {
    pub kind: FieldKind,
    pub axis: Axis,
}

impl Component {
    pub const fn new(kind: FieldKind, axis: Axis) -> Self {
        Component { kind, axis }
    }

    pub const DX: Component = Component::new(FieldKind::D, Axis::X);
    pub const DY: Component = Component::new(FieldKind::D, Axis::Y);
    pub const DZ: Component = Component::new(FieldKind::D, Axis::Z);
    pub const EX: Component = Component::new(FieldKind::E, Axis::X);
    pub const EY: Component = Component::new(FieldKind::E, Axis::Y);
    pub const EZ: Component = Component::new(FieldKind::E, Axis::Z);
    pub const BX: Component = Component::new(FieldKind::B, Axis::X);
    pub const BY: Component = Component::new(FieldKind::B, Axis::Y);
    pub const BZ: Component = Component::new(FieldKind::B, Axis::Z);
    pub const HX: Component = Component::new(FieldKind::H, Axis::X);
    pub const HY: Component = Component::new(FieldKind::H, Axis::Y);
    pub const HZ: Component = Component::new(FieldKind::H, Axis::Z);

    pub const ALL: [Component; 12] = [
        Component::DX,
        Component::DY,
        Component::DZ,
        Component::EX,
        Component::EY,
        Component::EZ,
        Component::BX,
        Component::BY,
        Component::BZ,
        Component::HX,
        Component::HY,
        Component::HZ,
    ];

    /// Offset from the cell's low corner in units of the spacing.
    pub fn offset(self) -> [f64; 3] {
        let a = self.axis.index();
        let (on_axis, off_axis) = if self.kind.is_electric() {
            (0.0, 0.5)
        } else {
            (0.5, 0.0)
        };
        [0, 1, 2].map(|b| if b == a { on_axis } else { off_axis })
    }

    pub fn name(self) -> String {
        let k = match self.kind {
            FieldKind::D => "D",
            FieldKind::E => "E",
            FieldKind::B => "B",
            FieldKind::H => "H",
        };
        format!("{k}{}", self.axis)
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Component::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown field component `{s}`")))
    }
}

/// The twelve staggered field arrays.
///
/// D/E are at integer time level `n = steps`, B/H at `n - 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    dims: [usize; 3],
    pub d: [Vec<f64>; 3],
    pub e: [Vec<f64>; 3],
    pub b: [Vec<f64>; 3],
    pub h: [Vec<f64>; 3],
    pub steps: u64,
}

impl FieldSet {
    pub fn zeros(dims: [usize; 3]) -> Self {
        let n: usize = dims.iter().product();
        let z = || [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        FieldSet {
            dims,
            d: z(),
            e: z(),
            b: z(),
            h: z(),
            steps: 0,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.d[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self, kind: FieldKind) -> &[Vec<f64>; 3] {
        match kind {
            FieldKind::D => &self.d,
            FieldKind::E => &self.e,
            FieldKind::B => &self.b,
            FieldKind::H => &self.h,
        }
    }

    pub fn kind_mut(&mut self, kind: FieldKind) -> &mut [Vec<f64>; 3] {
        match kind {
            FieldKind::D => &mut self.d,
            FieldKind::E => &mut self.e,
            FieldKind::B => &mut self.b,
            FieldKind::H => &mut self.h,
        }
    }

    pub fn component(&self, c: Component) -> &[f64] {
        &self.kind(c.kind)[c.axis.index()]
    }

    pub fn component_mut(&mut self, c: Component) -> &mut [f64] {
        &mut self.kind_mut(c.kind)[c.axis.index()]
    }

    /// Time level of `kind` in units of the time step.
    pub fn time_level(&self, kind: FieldKind) -> f64 {
        if kind.is_electric() {
            self.steps as f64
        } else {
            self.steps as f64 - 0.5
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Component, &[f64])> {
        Component::ALL.into_iter().map(move |c| (c, self.component(c)))
    }

    pub fn first_non_finite(&self) -> Option<Component> {
        self.iter()
            .find(|(_, v)| v.iter().any(|x| !x.is_finite()))
            .map(|(c, _)| c)
    }
}

/// Lattice plus zero-initialized fields.
pub fn create_lattice(
    dims: [usize; 3],
    spacing: [f64; 3],
    boundaries: [AxisBoundary; 3],
) -> Result<(YeeGrid, FieldSet)> {
    let grid = YeeGrid::new(dims, spacing, boundaries)?;
    let fields = FieldSet::zeros(dims);
    Ok((grid, fields))
}
