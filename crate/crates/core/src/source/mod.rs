//! Excitations: Gaussian point sources and a single-plane total-field /
//! scattered-field plane wave.

mod tfsf;

pub use tfsf::{TfsfSource, TfsfSpec};

use crate::lattice::{Component, FieldKind, FieldSet, YeeGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    pub amplitude: f64,
    pub t0: f64,
    pub tau: f64,
}

impl GaussianPulse {
    pub fn new(amplitude: f64, t0: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidSource(format!("pulse width must be positive, got {tau}")));
        }
        if !amplitude.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidSource("pulse amplitude and center must be finite".into()));
        }
        Ok(GaussianPulse { amplitude, t0, tau })
    }
}

/// amplitude·exp(-((t - t0)/τ)²).
pub fn gaussian_amplitude(t: f64, spec: &GaussianPulse) -> f64 {
    let u = (t - spec.t0) / spec.tau;
    spec.amplitude * (-u * u).exp()
}

/// Soft source adding `Δt·g(t)` to one flux component of one cell, i.e. an
/// impressed current density `-g(t)` centred in time on the D update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSource {
    pub component: Component,
    pub cell: [usize; 3],
    pub pulse: GaussianPulse,
}

impl PointSource {
    pub fn new(component: Component, cell: [usize; 3], pulse: GaussianPulse, grid: &YeeGrid) -> Result<Self> {
        grid.check_cell(cell)?;
        if !component.kind.is_electric() {
            return Err(Error::InvalidSource(format!(
                "point sources drive an electric component, got {component}"
            )));
        }
        Ok(PointSource { component, cell, pulse })
    }

    /// `t` is the time at the centre of the D update.
    pub fn inject(&self, fields: &mut FieldSet, grid: &YeeGrid, t: f64, dt: f64) {
        let idx = grid.index(self.cell[0], self.cell[1], self.cell[2]);
        fields.kind_mut(FieldKind::D)[self.component.axis.index()][idx] += dt * gaussian_amplitude(t, &self.pulse);
    }
}
