//! Transformation-optics cloaks.
//!
//! Both cloaks are radial maps from grid (physical) coordinates back to the
//! original vacuum coordinates. The material at a physical point is
//! `|Λ| Λ⁻¹ ε Λ⁻ᵀ` with `Λ` the Jacobian of that map, so the cloak is
//! reflectionless and the field outside it is the undisturbed background
//! field.
//!
//! * smooth: `r_orig = (1 - depth·exp(-(r/σ)ⁿ))·r`
//! * nonsmooth: three linear branches `[0, R1'] → [0, R1]`,
//!   `[R1', R2] → [R1, R2]` and the identity beyond `R2`.

use std::io::Write;

use crate::lattice::{Axis, YeeGrid};
use crate::materials::{average_with, det3, inverse3, matmul3, MaterialGrid, Quadrature, Tensor3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CloakKind {
    Smooth { n: f64, depth: f64, sigma: f64 },
    Nonsmooth { r1: f64, r2: f64, r1_prime: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloakSpec {
    pub kind: CloakKind,
    pub center: [f64; 3],
    pub background_eps: Tensor3,
    pub background_mu: Tensor3,
    pub quadrature: Quadrature,
}

/// Relative deviation from the identity map below which a smooth cloak is
/// treated as background when building materials.
const SMOOTH_CUTOFF: f64 = 1e-16;
/// Relative deviation used for the "cloak lies inside the grid" check.
const SMOOTH_EXTENT: f64 = 1e-6;

impl CloakSpec {
    pub fn new(kind: CloakKind, center: [f64; 3]) -> Self {
        CloakSpec {
            kind,
            center,
            background_eps: Tensor3::IDENTITY,
            background_mu: Tensor3::IDENTITY,
            quadrature: Quadrature::Gauss4,
        }
    }

    /// n = 3, depth = 0.8, σ = 80 (lengths in the caller's unit, here nm).
    pub fn smooth_reference(center: [f64; 3]) -> Self {
        CloakSpec::new(
            CloakKind::Smooth {
                n: 3.0,
                depth: 0.8,
                sigma: 80.0,
            },
            center,
        )
    }

    /// R1 = 8, R2 = 130, R1' = 40 (nm).
    pub fn nonsmooth_reference(center: [f64; 3]) -> Self {
        CloakSpec::new(
            CloakKind::Nonsmooth {
                r1: 8.0,
                r2: 130.0,
                r1_prime: 40.0,
            },
            center,
        )
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            CloakKind::Smooth { n, depth, sigma } => {
                if !(n >= 1.0 && n.is_finite()) {
                    return Err(Error::InvalidCloak(format!("exponent n must be >= 1, got {n}")));
                }
                if !(depth > 0.0 && depth < 1.0) && depth != 0.0 {
                    return Err(Error::InvalidCloak(format!("depth must lie in (0, 1), got {depth}")));
                }
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidCloak(format!("sigma must be positive, got {sigma}")));
                }
            }
            CloakKind::Nonsmooth { r1, r2, r1_prime } => {
                if !(0.0 < r1 && r1 < r1_prime && r1_prime < r2 && r2.is_finite()) {
                    return Err(Error::InvalidCloak(format!(
                        "need 0 < R1 < R1' < R2, got R1 = {r1}, R1' = {r1_prime}, R2 = {r2}"
                    )));
                }
            }
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCloak("center must be finite".into()));
        }
        Ok(())
    }

    /// Radius beyond which the map is the identity to within `tol` relative.
    fn radius_at(&self, tol: f64) -> f64 {
        match self.kind {
            CloakKind::Smooth { n, depth, sigma } => {
                if depth <= tol {
                    0.0
                } else {
                    sigma * (depth / tol).ln().powf(1.0 / n)
                }
            }
            CloakKind::Nonsmooth { r2, .. } => r2,
        }
    }

    /// Radius outside which cells receive the exact background tensors.
    pub fn radius_of_influence(&self) -> f64 {
        self.radius_at(SMOOTH_CUTOFF)
    }

    /// Radius used to check that the cloak fits in the grid.
    pub fn extent_radius(&self) -> f64 {
        self.radius_at(SMOOTH_EXTENT)
    }

    /// Radii at which the map has a kink.
    fn branch_radii(&self) -> Vec<f64> {
        match self.kind {
            CloakKind::Smooth { .. } => Vec::new(),
            CloakKind::Nonsmooth { r2, r1_prime, .. } => vec![r1_prime, r2],
        }
    }

    /// `r_orig / r` as a function of the physical radius, continuous at 0.
    fn radial_factor(&self, r: f64) -> f64 {
        match self.kind {
            CloakKind::Smooth { n, depth, sigma } => 1.0 - depth * (-(r / sigma).powf(n)).exp(),
            CloakKind::Nonsmooth { r1, r2, r1_prime } => {
                if r <= r1_prime {
                    r1 / r1_prime
                } else if r <= r2 {
                    ((r1 - r2) / (r1_prime - r2) * (r - r1_prime) + r1) / r
                } else {
                    1.0
                }
            }
        }
    }

    /// The radial map lifted to Cartesian coordinates about `center`.
    pub fn map_point(&self, p: [f64; 3]) -> [f64; 3] {
        let d = [0, 1, 2].map(|a| p[a] - self.center[a]);
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let s = self.radial_factor(r);
        [0, 1, 2].map(|a| self.center[a] + s * d[a])
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("radius must be non-negative, got {r}")))
    }
}

/// r' = (1 - depth·exp(-(r/σ)ⁿ))·r.
pub fn smooth_map(r: f64, spec: &CloakSpec) -> Result<f64> {
    check_radius(r)?;
    match spec.kind {
        CloakKind::Smooth { .. } => Ok(spec.radial_factor(r) * r),
        CloakKind::Nonsmooth { .. } => Err(Error::InvalidCloak("smooth_map needs a smooth cloak".into())),
    }
}

/// Three-branch piecewise linear r = f(r').
pub fn nonsmooth_map(r_prime: f64, spec: &CloakSpec) -> Result<f64> {
    check_radius(r_prime)?;
    match spec.kind {
        CloakKind::Nonsmooth { r1, r2, r1_prime } => Ok(if r_prime <= r1_prime {
            r1 / r1_prime * r_prime
        } else if r_prime <= r2 {
            (r1 - r2) / (r1_prime - r2) * (r_prime - r1_prime) + r1
        } else {
            r_prime
        }),
        CloakKind::Smooth { .. } => Err(Error::InvalidCloak("nonsmooth_map needs a nonsmooth cloak".into())),
    }
}

/// Central-difference Jacobian `J[p][q] = ∂map_p/∂x_q`.
pub fn numerical_jacobian<F>(map: F, point: [f64; 3], step: f64) -> Result<[[f64; 3]; 3]>
where
    F: Fn([f64; 3]) -> [f64; 3],
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("Jacobian step must be positive, got {step}")));
    }
    let mut j = [[0.0; 3]; 3];
    for q in 0..3 {
        let mut plus = point;
        let mut minus = point;
        plus[q] += step;
        minus[q] -= step;
        let fp = map(plus);
        let fm = map(minus);
        for p in 0..3 {
            j[p][q] = (fp[p] - fm[p]) / (2.0 * step);
        }
    }
    Ok(j)
}

/// `|det Λ|·Λ⁻¹·base·Λ⁻ᵀ`.
pub fn transform_material(lambda: &[[f64; 3]; 3], base: &Tensor3) -> Result<Tensor3> {
    let scale = lambda.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let det = det3(lambda);
    if !(det.abs() > 1e-12 * scale.powi(3)) {
        return Err(Error::SingularJacobian { det: det.abs() });
    }
    let inv = inverse3(lambda).ok_or(Error::SingularJacobian { det: det.abs() })?;
    let left = matmul3(&inv, base.as_array());
    let mut out = [[0.0; 3]; 3];
    for p in 0..3 {
        for q in p..3 {
            let v = det.abs() * (left[p][0] * inv[q][0] + left[p][1] * inv[q][1] + left[p][2] * inv[q][2]);
            out[p][q] = v;
            out[q][p] = v;
        }
    }
    Tensor3::new(out)
}

/// Jacobian at a physical point, nudged off the branch radii of a
/// nonsmooth map so the stencil stays on one branch.
fn cloak_jacobian(spec: &CloakSpec, p: [f64; 3], h: f64) -> Result<[[f64; 3]; 3]> {
    let mut point = p;
    let d = [0, 1, 2].map(|a| p[a] - spec.center[a]);
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    for rb in spec.branch_radii() {
        if (r - rb).abs() < 1.5 * h {
            let target = rb - 1.5 * h;
            let s = if r > 0.0 { target / r } else { 0.0 };
            point = [0, 1, 2].map(|a| spec.center[a] + s * d[a]);
            break;
        }
    }
    numerical_jacobian(|x| spec.map_point(x), point, h)
}

/// Transformed (ε, μ) at one physical point.
pub fn cloak_tensors_at(spec: &CloakSpec, p: [f64; 3], h: f64) -> Result<(Tensor3, Tensor3)> {
    let lambda = cloak_jacobian(spec, p, h)?;
    Ok((
        transform_material(&lambda, &spec.background_eps)?,
        transform_material(&lambda, &spec.background_mu)?,
    ))
}

/// Per-cell cloak materials, cell-averaged with `spec.quadrature`.
pub fn build_cloak(spec: &CloakSpec, grid: &YeeGrid) -> Result<MaterialGrid> {
    spec.validate()?;
    let ext = grid.extent();
    let reach = spec.extent_radius();
    for a in 0..3 {
        if spec.center[a] - reach < 0.0 || spec.center[a] + reach > ext[a] {
            return Err(Error::InvalidCloak(format!(
                "cloak of radius {reach:.4} about {:?} does not fit in the domain {ext:?}",
                spec.center
            )));
        }
    }
    let h = 1e-3 * grid.min_spacing();
    let half_diag = 0.5 * grid.spacing().iter().map(|d| d * d).sum::<f64>().sqrt();
    let roi = spec.radius_of_influence();
    MaterialGrid::from_fn(grid, |cell| {
        let c = grid.cell_center(cell);
        let r = (0..3).map(|a| (c[a] - spec.center[a]).powi(2)).sum::<f64>().sqrt();
        if roi == 0.0 || r > roi + half_diag {
            return Ok((spec.background_eps, spec.background_mu));
        }
        let eps = average_with(|p| cloak_tensors_at(spec, p, h).map(|t| t.0), cell, grid, spec.quadrature)?;
        let mu = average_with(|p| cloak_tensors_at(spec, p, h).map(|t| t.1), cell, grid, spec.quadrature)?;
        Ok((eps, mu))
    })
}

/// CSV of the ε entries along the grid line parallel to `axis` through the
/// cell containing `center`.
pub fn write_cut_csv<W: Write>(
    w: &mut W,
    grid: &YeeGrid,
    materials: &MaterialGrid,
    center: [f64; 3],
    axis: Axis,
) -> Result<()> {
    let sp = grid.spacing();
    let dims = grid.dims();
    let mut cell = [0, 1, 2].map(|a| ((center[a] / sp[a]).floor().max(0.0) as usize).min(dims[a] - 1));
    writeln!(w, "{axis},eps_xx,eps_xy,eps_xz,eps_yy,eps_yz,eps_zz")?;
    for i in 0..dims[axis.index()] {
        cell[axis.index()] = i;
        let s = grid.cell_center(cell)[axis.index()];
        let e = materials.eps(grid.index(cell[0], cell[1], cell[2]));
        writeln!(
            w,
            "{s},{},{},{},{},{},{}",
            e.get(0, 0),
            e.get(0, 1),
            e.get(0, 2),
            e.get(1, 1),
            e.get(1, 2),
            e.get(2, 2)
        )?;
    }
    Ok(())
}
