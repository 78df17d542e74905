//! Discrete curls.
//!
//! `B_a -= Δt [Δ⁻_b E_c / d_b - Δ⁻_c E_b / d_c]` with backward differences and
//! `D_a += Δt [Δ⁺_b H_c / d_b - Δ⁺_c H_b / d_c]` with forward differences,
//! `(b, c)` the cyclic successors of `a`. Neighbours beyond a non-periodic
//! face are zero, which makes the two operators exact transposes.

use rayon::prelude::*;

use crate::boundary::AxisMap;
use crate::lattice::Axis;

/// Parallel execution threshold in cells.
pub(crate) const PARALLEL_MIN_CELLS: usize = 32_768;

pub(crate) fn use_parallel(num_cells: usize) -> bool {
    num_cells >= PARALLEL_MIN_CELLS && rayon::current_num_threads() > 1
}

/// Run `f(k, slab)` over the z-slabs of `out`.
pub(crate) fn for_each_slab<F>(out: &mut [f64], slab: usize, parallel: bool, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    if parallel {
        out.par_chunks_mut(slab).enumerate().for_each(|(k, s)| f(k, s));
    } else {
        out.chunks_mut(slab).enumerate().for_each(|(k, s)| f(k, s));
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CurlGeometry {
    pub dims: [usize; 3],
    pub maps: [AxisMap; 3],
    pub spacing: [f64; 3],
}

impl CurlGeometry {
    /// Adds `coef·(s[i±1 along axis] - s[i])` (forward) or
    /// `coef·(s[i] - s[i-1 along axis])` (backward) to one x-row.
    #[inline]
    #[allow(clippy::too_many_arguments)]
    fn add_row_difference(&self, out: &mut [f64], src: &[f64], j: usize, k: usize, axis: Axis, coef: f64, forward: bool) {
        let [nx, ny, _] = self.dims;
        let base = nx * (j + ny * k);
        let row = &src[base..base + nx];
        match axis {
            Axis::X => {
                let m = self.maps[0];
                if forward {
                    for i in 0..nx - 1 {
                        out[i] += coef * (row[i + 1] - row[i]);
                    }
                    let last = if m.periodic { row[0] } else { 0.0 };
                    out[nx - 1] += coef * (last - row[nx - 1]);
                } else {
                    let first = if m.periodic { row[nx - 1] } else { 0.0 };
                    out[0] += coef * (row[0] - first);
                    for i in 1..nx {
                        out[i] += coef * (row[i] - row[i - 1]);
                    }
                }
            }
            Axis::Y | Axis::Z => {
                let (coord, m) = if axis == Axis::Y { (j, self.maps[1]) } else { (k, self.maps[2]) };
                let nb = if forward { m.next(coord) } else { m.prev(coord) };
                match nb {
                    Some(n) => {
                        let nbase = if axis == Axis::Y { nx * (n + ny * k) } else { nx * (j + ny * n) };
                        let nrow = &src[nbase..nbase + nx];
                        if forward {
                            for i in 0..nx {
                                out[i] += coef * (nrow[i] - row[i]);
                            }
                        } else {
                            for i in 0..nx {
                                out[i] += coef * (row[i] - nrow[i]);
                            }
                        }
                    }
                    None => {
                        let sgn = if forward { -coef } else { coef };
                        for i in 0..nx {
                            out[i] += sgn * row[i];
                        }
                    }
                }
            }
        }
    }

    /// `out_a += scale·[Δ_b src_c / d_b - Δ_c src_b / d_c]`.
    pub fn apply(&self, out: &mut [f64], a: Axis, src_b: &[f64], src_c: &[f64], scale: f64, forward: bool, parallel: bool) {
        let [nx, ny, _] = self.dims;
        let (b, c) = a.cyclic();
        let cb = scale / self.spacing[b.index()];
        let cc = -scale / self.spacing[c.index()];
        for_each_slab(out, nx * ny, parallel, |k, slab| {
            for j in 0..ny {
                let o = &mut slab[nx * j..nx * (j + 1)];
                self.add_row_difference(o, src_c, j, k, b, cb, forward);
                self.add_row_difference(o, src_b, j, k, c, cc, forward);
            }
        });
    }
}
