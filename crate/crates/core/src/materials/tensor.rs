use std::ops::{Add, Mul};

use crate::{Error, Result};

/// Symmetric 3x3 material tensor (ε, μ, or their inverses ξ, ζ) in units
/// of ε0 / μ0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor3 {
    m: [[f64; 3]; 3],
}

impl Tensor3 {
    pub const IDENTITY: Tensor3 = Tensor3::diagonal(1.0, 1.0, 1.0);

    /// Build from a full matrix; any asymmetry is rejected.
    pub fn new(m: [[f64; 3]; 3]) -> Result<Self> {
        for p in 0..3 {
            for q in p + 1..3 {
                let defect = (m[p][q] - m[q][p]).abs();
                if defect != 0.0 || m[p][q].is_nan() {
                    return Err(Error::NotSymmetric { p, q, defect });
                }
            }
        }
        Ok(Tensor3 { m })
    }

    pub const fn symmetric(xx: f64, yy: f64, zz: f64, xy: f64, xz: f64, yz: f64) -> Self {
        Tensor3 {
            m: [[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]],
        }
    }

    pub const fn diagonal(xx: f64, yy: f64, zz: f64) -> Self {
        Tensor3::symmetric(xx, yy, zz, 0.0, 0.0, 0.0)
    }

    pub fn isotropic(v: f64) -> Self {
        Tensor3::diagonal(v, v, v)
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.m[p][q]
    }

    pub fn as_array(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn scaled(&self, s: f64) -> Tensor3 {
        Tensor3 {
            m: self.m.map(|r| r.map(|v| s * v)),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Tensor3::IDENTITY
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> f64 {
        det3(&self.m)
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|p| self.m[p][0] * v[0] + self.m[p][1] * v[1] + self.m[p][2] * v[2])
    }

    pub fn matmul(&self, other: &Tensor3) -> [[f64; 3]; 3] {
        matmul3(&self.m, &other.m)
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0, |a, &v| a.max(v.abs()))
    }

    /// Eigenvalues in ascending order (cyclic Jacobi rotations; accurate to
    /// roundoff relative to the largest entry, including repeated roots).
    pub fn eigenvalues(&self) -> [f64; 3] {
        let mut a = self.m;
        let scale = self.max_abs();
        for _ in 0..50 {
            let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
            if off <= f64::EPSILON * 1e-3 * scale {
                break;
            }
            for (p, q) in [(0, 1), (0, 2), (1, 2)] {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    0.0
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let r = 3 - p - q;
                let (app, aqq, apq) = (a[p][p], a[q][q], a[p][q]);
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                let (arp, arq) = (a[r][p], a[r][q]);
                a[r][p] = c * arp - s * arq;
                a[p][r] = a[r][p];
                a[r][q] = s * arp + c * arq;
                a[q][r] = a[r][q];
            }
        }
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(f64::total_cmp);
        d
    }
}

impl Add for Tensor3 {
    type Output = Tensor3;

    fn add(self, rhs: Tensor3) -> Tensor3 {
        let mut m = self.m;
        for p in 0..3 {
            for q in 0..3 {
                m[p][q] += rhs.m[p][q];
            }
        }
        Tensor3 { m }
    }
}

impl Mul<Tensor3> for f64 {
    type Output = Tensor3;

    fn mul(self, rhs: Tensor3) -> Tensor3 {
        rhs.scaled(self)
    }
}

pub(crate) fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub(crate) fn matmul3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for p in 0..3 {
        for q in 0..3 {
            c[p][q] = a[p][0] * b[0][q] + a[p][1] * b[1][q] + a[p][2] * b[2][q];
        }
    }
    c
}

/// Adjugate-based inverse of a general 3x3 matrix.
pub(crate) fn inverse3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = det3(m);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = 1.0 / det;
    Some([
        [
            (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv,
        ],
        [
            (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv,
        ],
        [
            (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv,
        ],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdCheck {
    pub is_spd: bool,
    pub min_eigenvalue: f64,
}

/// Symmetric positive definiteness test; the tensor type is symmetric by
/// construction so only the spectrum is inspected.
pub fn check_spd(t: &Tensor3) -> SpdCheck {
    let min_eigenvalue = t.eigenvalues()[0];
    SpdCheck {
        is_spd: min_eigenvalue > 0.0 && t.as_array().iter().flatten().all(|v| v.is_finite()),
        min_eigenvalue,
    }
}

/// Inverse of an SPD tensor, returned exactly symmetric.
pub fn invert_tensor(t: &Tensor3) -> Result<Tensor3> {
    let spd = check_spd(t);
    if !spd.is_spd {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: spd.min_eigenvalue,
        });
    }
    let inv = inverse3(t.as_array()).ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: spd.min_eigenvalue,
    })?;
    Ok(Tensor3::symmetric(
        inv[0][0],
        inv[1][1],
        inv[2][2],
        0.5 * (inv[0][1] + inv[1][0]),
        0.5 * (inv[0][2] + inv[2][0]),
        0.5 * (inv[1][2] + inv[2][1]),
    ))
}
