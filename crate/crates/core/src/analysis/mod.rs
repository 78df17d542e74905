//! Verification machinery: assembled operators and their spectra, global
//! material matrices, energy monitoring, error norms and convergence fits.

mod operators;
mod sparse;
mod spectrum;
pub mod study;

pub use operators::{
    assemble_curl_matrices, assemble_global_material_matrix, assemble_material_matrix_any_boundary,
    block_diagonal, cell_major_permutation, corner_selection, permutation_sum_material_matrix,
};
pub use sparse::SparseMatrix;
pub use spectrum::{
    build_update_matrix, dense_spectrum, eigen_spectrum, material_digest, spd_check_global, step_state,
    write_spectrum_csv, SpdReport, SpectrumReport, UpdateMatrix, UpdateMetadata, EIGEN_BACKEND, MAX_DENSE_DIMENSION,
};

use std::io::Write;

use num_complex::Complex64;

use crate::lattice::FieldSet;
use crate::materials::MaterialGrid;
use crate::{Error, Result};

/// `½ Σ_cells (D·ξD + B·ζB)` with each cell's own tensors.
pub fn energy_norm(fields: &FieldSet, materials: &MaterialGrid) -> f64 {
    let mut total = 0.0;
    for idx in 0..materials.num_cells() {
        let d = [fields.d[0][idx], fields.d[1][idx], fields.d[2][idx]];
        let b = [fields.b[0][idx], fields.b[1][idx], fields.b[2][idx]];
        let xd = materials.xi(idx).mul_vec(d);
        let zb = materials.zeta(idx).mul_vec(b);
        total += (0..3).map(|a| d[a] * xd[a] + b[a] * zb[a]).sum::<f64>();
    }
    0.5 * total
}

/// `½ (D·E + B·H)` with the scheme's own E and H.
pub fn field_energy(fields: &FieldSet) -> f64 {
    let dot = |x: &[Vec<f64>; 3], y: &[Vec<f64>; 3]| -> f64 {
        x.iter().zip(y).map(|(p, q)| p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>()).sum()
    };
    0.5 * (dot(&fields.d, &fields.e) + dot(&fields.b, &fields.h))
}

/// Reference points below this fraction of the largest reference magnitude
/// are excluded from the relative error.
pub const REFERENCE_FLOOR: f64 = 1e-6;
/// Largest tolerated fraction of excluded points.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeErrorReport {
    pub error: f64,
    pub points: usize,
    pub excluded: usize,
}

/// `(1/N) Σ_j |E_j - Ê_j| / |E_j|` over sample points `j`, each a vector of
/// (possibly complex) components, with `reference` holding `E_j`.
pub fn relative_error(test: &[Vec<Complex64>], reference: &[Vec<Complex64>]) -> Result<RelativeErrorReport> {
    if test.len() != reference.len() {
        return Err(Error::Analysis(format!(
            "{} test points against {} reference points",
            test.len(),
            reference.len()
        )));
    }
    if reference.is_empty() {
        return Err(Error::Analysis("no sample points".into()));
    }
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let peak = reference.iter().map(|v| norm(v)).fold(0.0, f64::max);
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::Analysis("reference field vanishes in the sampling box".into()));
    }
    let mut sum = 0.0;
    let mut used = 0;
    let mut excluded = 0;
    for (t, r) in test.iter().zip(reference) {
        if t.len() != r.len() {
            return Err(Error::Analysis("sample vectors differ in length".into()));
        }
        let rn = norm(r);
        if rn < REFERENCE_FLOOR * peak {
            excluded += 1;
            continue;
        }
        let diff: Vec<Complex64> = t.iter().zip(r).map(|(a, b)| a - b).collect();
        sum += norm(&diff) / rn;
        used += 1;
    }
    if excluded as f64 > MAX_EXCLUDED_FRACTION * reference.len() as f64 {
        return Err(Error::Analysis(format!(
            "{excluded} of {} reference points fall below the magnitude floor",
            reference.len()
        )));
    }
    Ok(RelativeErrorReport {
        error: sum / used as f64,
        points: used,
        excluded,
    })
}

/// Real-valued convenience form of [`relative_error`].
pub fn relative_error_real(test: &[Vec<f64>], reference: &[Vec<f64>]) -> Result<RelativeErrorReport> {
    let lift = |v: &[Vec<f64>]| -> Vec<Vec<Complex64>> {
        v.iter().map(|p| p.iter().map(|x| Complex64::new(*x, 0.0)).collect()).collect()
    };
    relative_error(&lift(test), &lift(reference))
}

/// Points whose error exceeds this are treated as pre-asymptotic when they
/// are the coarsest of a sweep.
pub const PRE_ASYMPTOTIC_ERROR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceFit {
    pub order: f64,
    /// (ppw, error) pairs entering the fit.
    pub used: Vec<(f64, f64)>,
    pub dropped_coarsest: bool,
}

/// Least-squares slope of `log(error)` against `log(1/ppw)`.
pub fn convergence_order(points: &[(f64, f64)]) -> Result<ConvergenceFit> {
    if points.len() < 2 {
        return Err(Error::Analysis("a convergence fit needs at least two resolutions".into()));
    }
    for &(ppw, err) in points {
        if !(ppw > 0.0 && ppw.is_finite()) {
            return Err(Error::Analysis(format!("resolution must be positive, got {ppw}")));
        }
        if !(err > 0.0 && err.is_finite()) {
            return Err(Error::Analysis(format!("errors must be positive, got {err} at ppw {ppw}")));
        }
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut dropped = false;
    if sorted.len() >= 3 && sorted[0].1 > PRE_ASYMPTOTIC_ERROR {
        sorted.remove(0);
        dropped = true;
    }
    let xs: Vec<f64> = sorted.iter().map(|p| -p.0.ln()).collect();
    let ys: Vec<f64> = sorted.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Analysis("resolutions must differ".into()));
    }
    Ok(ConvergenceFit {
        order: sxy / sxx,
        used: sorted,
        dropped_coarsest: dropped,
    })
}

/// Relative errors of one configuration across a resolution sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub fit: ConvergenceFit,
    pub sampling_box: String,
}

impl ErrorReport {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, sampling_box: impl Into<String>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Analysis("an error report needs at least three resolutions".into()));
        }
        let fit = convergence_order(&points)?;
        Ok(ErrorReport {
            label: label.into(),
            points,
            fit,
            sampling_box: sampling_box.into(),
        })
    }
}

/// Rows of `ppw,relative_error`.
pub fn write_convergence_csv<W: Write>(w: &mut W, report: &ErrorReport) -> Result<()> {
    writeln!(w, "ppw,relative_error")?;
    for (ppw, err) in &report.points {
        writeln!(w, "{ppw},{err:.10e}")?;
    }
    Ok(())
}
