//! Assembled curl and material matrices.
//!
//! Global vectors use component-major ordering: entry `a·N + idx` holds
//! component `a` of cell `idx`. [`cell_major_permutation`] maps it to the
//! cell-major ordering in which the first-order material matrix is block
//! diagonal.

use super::sparse::SparseMatrix;
use crate::boundary::periodic_index;
use crate::lattice::{FieldKind, YeeGrid};
use crate::materials::{MaterialGrid, Tensor3};
use crate::solver::{Operators, SchemeKind};
use crate::{Error, Result};

type Field3 = [Vec<f64>; 3];

fn unit(n: usize, col: usize) -> Field3 {
    let mut v = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    v[col / n][col % n] = 1.0;
    v
}

fn probe(n: usize, mut apply: impl FnMut(&mut Field3, &Field3)) -> Result<SparseMatrix> {
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let columns = (0..3 * n).map(|col| {
        out.iter_mut().for_each(|c| c.fill(0.0));
        apply(&mut out, &unit(n, col));
        out.concat()
    });
    SparseMatrix::from_columns(3 * n, columns.collect::<Vec<_>>())
}

/// Discrete curls `(C_e, C_h)` with `B' = B - Δt C_e E` and
/// `D' = D + Δt C_h H`.
pub fn assemble_curl_matrices(grid: &YeeGrid) -> Result<(SparseMatrix, SparseMatrix)> {
    let ops = Operators::new(grid, &MaterialGrid::vacuum(grid.dims()), SchemeKind::NonAveraged)?;
    let n = grid.num_cells();
    let ce = probe(n, |out, x| ops.curl_e(out, x, 1.0))?;
    let ch = probe(n, |out, x| ops.curl_h(out, x, 1.0))?;
    Ok((ce, ch))
}

fn material_kind(kind: FieldKind) -> Result<bool> {
    match kind {
        FieldKind::E => Ok(true),
        FieldKind::H => Ok(false),
        other => Err(Error::InvalidArgument(format!(
            "material matrices map fluxes to E or H, not {other:?}"
        ))),
    }
}

/// The matrix `M` with `E = M_ξ D` (kind E) or `H = M_ζ B` (kind H), read off
/// the solver's constitutive stencil. Periodic grids only.
pub fn assemble_global_material_matrix(
    scheme: SchemeKind,
    kind: FieldKind,
    materials: &MaterialGrid,
    grid: &YeeGrid,
) -> Result<SparseMatrix> {
    if !grid.is_fully_periodic() {
        return Err(Error::InvalidBoundary(
            "global material matrices are assembled on fully periodic grids only".into(),
        ));
    }
    assemble_material_matrix_any_boundary(scheme, kind, materials, grid)
}

/// As [`assemble_global_material_matrix`] but without the periodicity
/// requirement, for empirical checks of the clamped boundary treatment.
pub fn assemble_material_matrix_any_boundary(
    scheme: SchemeKind,
    kind: FieldKind,
    materials: &MaterialGrid,
    grid: &YeeGrid,
) -> Result<SparseMatrix> {
    let electric = material_kind(kind)?;
    let ops = Operators::new(grid, materials, scheme)?;
    let n = grid.num_cells();
    if electric {
        probe(n, |out, x| ops.electric(out, x))
    } else {
        probe(n, |out, x| ops.magnetic(out, x))
    }
}

/// Permutation from component-major to cell-major ordering.
pub fn cell_major_permutation(num_cells: usize) -> Vec<usize> {
    (0..3 * num_cells).map(|i| 3 * (i % num_cells) + i / num_cells).collect()
}

/// Block-diagonal matrix of per-cell 3×3 tensors in cell-major ordering.
pub fn block_diagonal(tensors: &[Tensor3]) -> SparseMatrix {
    let n = tensors.len();
    let triplets = tensors.iter().enumerate().flat_map(|(q, t)| {
        (0..3).flat_map(move |p| (0..3).map(move |r| (3 * q + p, 3 * q + r, t.get(p, r))))
    });
    SparseMatrix::from_triplets(3 * n, 3 * n, triplets).expect("in range")
}

/// Selection matrix `P_m` for corner `m = (α, β, γ)` of every cell: row
/// `3q + a` picks the flux component `a` that cell `q` contributes at that
/// corner. For E the fluxes are the faces `q + α x̂`, `q + β ŷ`, `q + γ ẑ`;
/// for H the edges through the corner, `q + β ŷ + γ ẑ` (x),
/// `q + α x̂ + γ ẑ` (y) and `q + α x̂ + β ŷ` (z).
pub fn corner_selection(grid: &YeeGrid, corner: [usize; 3], electric: bool) -> SparseMatrix {
    let dims = grid.dims();
    let n = grid.num_cells();
    let at = |q: [usize; 3], shift: [usize; 3]| -> usize {
        let c = [0, 1, 2].map(|d| periodic_index((q[d] + shift[d]) as isize, dims[d]));
        grid.index(c[0], c[1], c[2])
    };
    let mut triplets = Vec::with_capacity(3 * n);
    for idx in 0..n {
        let q = grid.cell_of(idx);
        for a in 0..3 {
            let mut shift = [0; 3];
            if electric {
                shift[a] = corner[a];
            } else {
                for d in 0..3 {
                    if d != a {
                        shift[d] = corner[d];
                    }
                }
            }
            triplets.push((3 * idx + a, a * n + at(q, shift), 1.0));
        }
    }
    SparseMatrix::from_triplets(3 * n, 3 * n, triplets).expect("in range")
}

/// `(1/8) Σ_m P_mᵀ M̃ P_m` with `M̃` the block diagonal of ξ (kind E) or ζ
/// (kind H). Periodic grids only.
pub fn permutation_sum_material_matrix(kind: FieldKind, materials: &MaterialGrid, grid: &YeeGrid) -> Result<SparseMatrix> {
    let electric = material_kind(kind)?;
    if !grid.is_fully_periodic() {
        return Err(Error::InvalidBoundary("the permutation sum needs a fully periodic grid".into()));
    }
    let blocks = block_diagonal(if electric { materials.xi_all() } else { materials.zeta_all() });
    let n = grid.num_cells();
    let mut sum = SparseMatrix::from_triplets(3 * n, 3 * n, std::iter::empty())?;
    for m in 0..8 {
        let corner = [m & 1, (m >> 1) & 1, (m >> 2) & 1];
        let p = corner_selection(grid, corner, electric);
        sum = sum.add(&p.transpose().matmul(&blocks)?.matmul(&p)?)?;
    }
    Ok(sum.scaled(0.125))
}
