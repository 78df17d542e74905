//! Boundary treatment: index maps for the curl and averaging stencils, PEC
//! forcing and uniaxial PML layers.
//!
//! No ghost layers are stored. A neighbour that falls outside a non-periodic
//! axis is either a zero ghost (curl stencils) or the nearest in-domain cell
//! (material and flux averaging). With this convention the PEC walls of an
//! axis of `n` cells sit half a cell outside the first and inside the last
//! layer, i.e. at `-Δ/2` and `(n - 1/2)Δ`.

mod pml;

pub use pml::{build_pml, PmlPairing, PmlParams, PmlProfile, PmlState};

use crate::lattice::{Axis, BoundaryKind, FieldKind, FieldSet, YeeGrid};

/// `i mod n` with a non-negative result.
pub fn periodic_index(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Neighbour lookup along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisMap {
    pub n: usize,
    pub periodic: bool,
}

impl AxisMap {
    pub fn new(grid: &YeeGrid, axis: Axis) -> Self {
        AxisMap {
            n: grid.dims()[axis.index()],
            periodic: grid.boundary(axis).is_periodic(),
        }
    }

    /// Index `i - 1`, or `None` for a zero ghost.
    #[inline]
    pub fn prev(&self, i: usize) -> Option<usize> {
        if i > 0 {
            Some(i - 1)
        } else if self.periodic {
            Some(self.n - 1)
        } else {
            None
        }
    }

    /// Index `i + 1`, or `None` for a zero ghost.
    #[inline]
    pub fn next(&self, i: usize) -> Option<usize> {
        if i + 1 < self.n {
            Some(i + 1)
        } else if self.periodic {
            Some(0)
        } else {
            None
        }
    }

    #[inline]
    pub fn prev_clamped(&self, i: usize) -> usize {
        self.prev(i).unwrap_or(i)
    }

    #[inline]
    pub fn next_clamped(&self, i: usize) -> usize {
        self.next(i).unwrap_or(i)
    }
}

pub fn axis_maps(grid: &YeeGrid) -> [AxisMap; 3] {
    Axis::ALL.map(|a| AxisMap::new(grid, a))
}

/// Force tangential D and E to zero on the last layer of every high-side PEC
/// face. The low-side walls are realised by the zero ghosts of the curl.
pub fn apply_pec(fields: &mut FieldSet, grid: &YeeGrid) {
    let [nx, ny, nz] = grid.dims();
    for normal in Axis::ALL {
        if grid.boundary(normal).high != BoundaryKind::Pec {
            continue;
        }
        let (ta, tb) = normal.cyclic();
        for kind in [FieldKind::D, FieldKind::E] {
            let arrays = fields.kind_mut(kind);
            for t in [ta, tb] {
                let data = &mut arrays[t.index()];
                match normal {
                    Axis::X => {
                        for k in 0..nz {
                            for j in 0..ny {
                                data[nx - 1 + nx * (j + ny * k)] = 0.0;
                            }
                        }
                    }
                    Axis::Y => {
                        for k in 0..nz {
                            let base = nx * (ny - 1 + ny * k);
                            data[base..base + nx].fill(0.0);
                        }
                    }
                    Axis::Z => {
                        let base = nx * ny * (nz - 1);
                        data[base..].fill(0.0);
                    }
                }
            }
        }
    }
}
