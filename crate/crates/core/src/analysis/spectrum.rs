//! One-step update matrices and their spectra.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::Write;

use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;

use super::sparse::SparseMatrix;
use crate::lattice::{AxisBoundary, BoundaryKind};
use crate::materials::MaterialGrid;
use crate::solver::{SchemeKind, Simulation};
use crate::{Error, Result};

/// Largest dense problem accepted without an explicit override: 6·16³.
pub const MAX_DENSE_DIMENSION: usize = 6 * 16 * 16 * 16;

#[derive(Debug, Clone)]
pub struct UpdateMetadata {
    pub scheme: SchemeKind,
    pub dt: f64,
    pub dims: [usize; 3],
    pub boundaries: [AxisBoundary; 3],
    /// Hash of every material tensor entry.
    pub material_digest: u64,
}

/// Dense one-step operator on the state `(Dx, Dy, Dz, Bx, By, Bz)`.
#[derive(Debug, Clone)]
pub struct UpdateMatrix {
    pub matrix: Mat<f64>,
    pub metadata: UpdateMetadata,
}

impl UpdateMatrix {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dimension();
        let mut y = vec![0.0; n];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                let col = self.matrix.col(j);
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi += col[i] * xj;
                }
            }
        }
        y
    }
}

pub fn material_digest(materials: &MaterialGrid) -> u64 {
    let mut h = DefaultHasher::new();
    materials.dims().hash(&mut h);
    for t in materials.eps_all().iter().chain(materials.mu_all()) {
        for row in t.as_array() {
            for v in row {
                v.to_bits().hash(&mut h);
            }
        }
    }
    h.finish()
}

fn split_state(x: &[f64], n: usize) -> ([Vec<f64>; 3], [Vec<f64>; 3]) {
    let part = |k: usize| x[k * n..(k + 1) * n].to_vec();
    ([part(0), part(1), part(2)], [part(3), part(4), part(5)])
}

/// Advance a (D, B) state vector by one step of `sim` (whose own fields are
/// overwritten).
pub fn step_state(sim: &mut Simulation, x: &[f64]) -> Result<Vec<f64>> {
    let n = sim.grid().num_cells();
    if x.len() != 6 * n {
        return Err(Error::InvalidArgument(format!("state of length {} for {n} cells", x.len())));
    }
    let (d, b) = split_state(x, n);
    sim.set_state(d, b)?;
    sim.step()?;
    let f = sim.fields();
    Ok([&f.d[0], &f.d[1], &f.d[2], &f.b[0], &f.b[1], &f.b[2]]
        .iter()
        .flat_map(|v| v.iter().copied())
        .collect())
}

/// Column `j` is one step applied to the `j`-th canonical basis state.
pub fn build_update_matrix(sim: &Simulation, force_size_guard: bool) -> Result<UpdateMatrix> {
    if sim.has_sources() {
        return Err(Error::InvalidArgument("update matrices need a source-free simulation".into()));
    }
    if sim.pml().is_some() || sim.grid().boundaries().iter().any(|b| b.has(BoundaryKind::Upml)) {
        return Err(Error::InvalidBoundary(
            "absorbing layers carry state outside (D, B); use periodic or PEC boundaries".into(),
        ));
    }
    let n = sim.grid().num_cells();
    let dim = 6 * n;
    if dim > MAX_DENSE_DIMENSION && !force_size_guard {
        return Err(Error::SizeGuard(format!(
            "update matrix of dimension {dim} exceeds {MAX_DENSE_DIMENSION}; pass the override to proceed"
        )));
    }
    let mut matrix = Mat::<f64>::zeros(dim, dim);
    let batch = 256;
    for start in (0..dim).step_by(batch) {
        let end = (start + batch).min(dim);
        let cols: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map_init(
                || sim.clone(),
                |s, j| {
                    let mut x = vec![0.0; dim];
                    x[j] = 1.0;
                    step_state(s, &x)
                },
            )
            .collect::<Result<_>>()?;
        for (k, col) in cols.into_iter().enumerate() {
            let mut dst = matrix.col_mut(start + k);
            for (i, v) in col.into_iter().enumerate() {
                dst[i] = v;
            }
        }
    }
    Ok(UpdateMatrix {
        matrix,
        metadata: UpdateMetadata {
            scheme: sim.scheme(),
            dt: sim.dt(),
            dims: sim.grid().dims(),
            boundaries: sim.grid().boundaries(),
            material_digest: material_digest(sim.materials()),
        },
    })
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    /// `max_i ||λ_i| - 1|`.
    pub max_deviation: f64,
    pub max_modulus: f64,
    pub backend: String,
}

pub const EIGEN_BACKEND: &str = "faer dense nonsymmetric eigenvalues (Hessenberg QR)";

pub fn eigen_spectrum(a: &UpdateMatrix) -> Result<SpectrumReport> {
    dense_spectrum(&a.matrix)
}

pub fn dense_spectrum(a: &Mat<f64>) -> Result<SpectrumReport> {
    if a.nrows() != a.ncols() {
        return Err(Error::Eigensolver("matrix is not square".into()));
    }
    for j in 0..a.ncols() {
        if a.col(j).iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigensolver(format!("column {j} has non-finite entries")));
        }
    }
    let values = a.eigenvalues().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let eigenvalues: Vec<Complex64> = values.into_iter().map(|z| Complex64::new(z.re, z.im)).collect();
    if eigenvalues.len() != a.nrows() {
        return Err(Error::Eigensolver("eigenvalue count differs from the dimension".into()));
    }
    let max_deviation = eigenvalues.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    let max_modulus = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(SpectrumReport {
        eigenvalues,
        max_deviation,
        max_modulus,
        backend: EIGEN_BACKEND.to_string(),
    })
}

/// Rows of `re,im,abs`.
pub fn write_spectrum_csv<W: Write>(w: &mut W, report: &SpectrumReport) -> Result<()> {
    writeln!(w, "re,im,abs")?;
    for z in &report.eigenvalues {
        writeln!(w, "{:.17e},{:.17e},{:.17e}", z.re, z.im, z.norm())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdReport {
    pub dimension: usize,
    /// `max |m_pq - m_qp|`.
    pub symmetry_defect: f64,
    /// Smallest eigenvalue of the symmetric part.
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl SpdReport {
    pub fn is_spd(&self, symmetry_tolerance: f64) -> bool {
        self.symmetry_defect <= symmetry_tolerance && self.min_eigenvalue > 0.0
    }
}

/// Symmetry defect and extreme eigenvalues by a dense symmetric solve.
pub fn spd_check_global(m: &SparseMatrix) -> Result<SpdReport> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::InvalidArgument("SPD check needs a square matrix".into()));
    }
    if n > MAX_DENSE_DIMENSION {
        return Err(Error::SizeGuard(format!("dense SPD check of dimension {n} exceeds {MAX_DENSE_DIMENSION}")));
    }
    let defect = m.symmetry_defect();
    let mut dense = Mat::<f64>::zeros(n, n);
    for (r, c, v) in m.triplets() {
        dense[(r, c)] += 0.5 * v;
        dense[(c, r)] += 0.5 * v;
    }
    let eig = dense
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    Ok(SpdReport {
        dimension: n,
        symmetry_defect: defect,
        min_eigenvalue: eig.first().copied().unwrap_or(f64::NAN),
        max_eigenvalue: eig.last().copied().unwrap_or(f64::NAN),
    })
}
