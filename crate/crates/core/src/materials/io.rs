//! Material grid files.
//!
//! Little-endian binary layout:
//!
//! ```text
//! magic    4 bytes  "AFMG"
//! version  u32      1
//! dims     3 x u64
//! units    u8       0 = relative (multiples of ε0, μ0), 1 = SI (F/m, H/m)
//! cells    nx*ny*nz records of 18 f64: ε row-major (9), then μ row-major (9)
//! ```
//!
//! Cells are stored x fastest. The loader converts SI values to relative
//! ones and rejects asymmetric or non-SPD tensors.

use std::io::{Read, Write};

use super::{MaterialGrid, Tensor3};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"AFMG";
const VERSION: u32 = 1;

pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const MU_0: f64 = 1.256_637_062_12e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Relative,
    Si,
}

impl Units {
    fn flag(self) -> u8 {
        match self {
            Units::Relative => 0,
            Units::Si => 1,
        }
    }
}

pub fn write_material_grid<W: Write>(w: &mut W, m: &MaterialGrid) -> Result<()> {
    write_material_grid_with_units(w, m, Units::Relative)
}

pub fn write_material_grid_with_units<W: Write>(w: &mut W, m: &MaterialGrid, units: Units) -> Result<()> {
    let (se, sm) = match units {
        Units::Relative => (1.0, 1.0),
        Units::Si => (EPSILON_0, MU_0),
    };
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for n in m.dims() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    w.write_all(&[units.flag()])?;
    for idx in 0..m.num_cells() {
        for (t, s) in [(m.eps(idx), se), (m.mu(idx), sm)] {
            for row in t.as_array() {
                for v in row {
                    w.write_all(&(v * s).to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

fn read_tensor<R: Read>(r: &mut R, scale: f64, idx: usize, what: &str) -> Result<Tensor3> {
    let mut m = [[0.0; 3]; 3];
    let mut b = [0u8; 8];
    for row in &mut m {
        for v in row.iter_mut() {
            r.read_exact(&mut b)?;
            *v = f64::from_le_bytes(b) / scale;
        }
    }
    Tensor3::new(m).map_err(|e| Error::InvalidMaterial(format!("{what} at cell index {idx}: {e}")))
}

pub fn read_material_grid<R: Read>(r: &mut R) -> Result<MaterialGrid> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a material grid file".into()));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v)?;
    let version = u32::from_le_bytes(v);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported material file version {version}")));
    }
    let mut dims = [0usize; 3];
    let mut b = [0u8; 8];
    for n in &mut dims {
        r.read_exact(&mut b)?;
        *n = usize::try_from(u64::from_le_bytes(b)).map_err(|_| Error::Format("dimension overflow".into()))?;
    }
    if dims.iter().any(|&n| n < 2) {
        return Err(Error::Format(format!("invalid dimensions {dims:?}")));
    }
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let (se, sm) = match flag[0] {
        0 => (1.0, 1.0),
        1 => (EPSILON_0, MU_0),
        f => return Err(Error::Format(format!("unknown units flag {f}"))),
    };
    let n: usize = dims.iter().product();
    let mut eps = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    for idx in 0..n {
        eps.push(read_tensor(r, se, idx, "eps")?);
        mu.push(read_tensor(r, sm, idx, "mu")?);
    }
    MaterialGrid::from_tensors(dims, eps, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::random_spd_grid;

    #[test]
    fn round_trip_relative() {
        let m = random_spd_grid([2, 3, 2], 3).unwrap();
        let mut buf = Vec::new();
        write_material_grid(&mut buf, &m).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 24 + 1 + 12 * 18 * 8);
        assert_eq!(read_material_grid(&mut buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn si_units_are_converted() {
        let m = random_spd_grid([2, 2, 2], 4).unwrap();
        let mut buf = Vec::new();
        write_material_grid_with_units(&mut buf, &m, Units::Si).unwrap();
        let back = read_material_grid(&mut buf.as_slice()).unwrap();
        for i in 0..m.num_cells() {
            for p in 0..3 {
                for q in 0..3 {
                    assert!((back.eps(i).get(p, q) - m.eps(i).get(p, q)).abs() < 1e-14 * m.eps(i).max_abs());
                    assert!((back.mu(i).get(p, q) - m.mu(i).get(p, q)).abs() < 1e-14 * m.mu(i).max_abs());
                }
            }
        }
    }

    fn header(dims: [u64; 3]) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        for n in dims {
            buf.extend_from_slice(&n.to_le_bytes());
        }
        buf.push(0);
        buf
    }

    fn push_tensor(buf: &mut Vec<u8>, m: [[f64; 3]; 3]) {
        for row in m {
            for v in row {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }

    #[test]
    fn rejects_asymmetric_and_indefinite_cells() {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let asym = [[1.0, 0.2, 0.0], [0.1, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let indef = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        for bad in [asym, indef] {
            let mut buf = header([2, 2, 2]);
            for c in 0..8 {
                push_tensor(&mut buf, if c == 5 { bad } else { id });
                push_tensor(&mut buf, id);
            }
            let err = read_material_grid(&mut buf.as_slice()).unwrap_err();
            assert!(err.to_string().contains("cell index 5"), "{err}");
        }
    }

    #[test]
    fn rejects_truncated_and_foreign_files() {
        let mut buf = header([2, 2, 2]);
        push_tensor(&mut buf, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(matches!(read_material_grid(&mut buf.as_slice()), Err(Error::Io(_))));
        assert!(matches!(read_material_grid(&mut &b"AFSN...."[..]), Err(Error::Format(_))));
        let mut bad_units = header([2, 2, 2]);
        *bad_units.last_mut().unwrap() = 7;
        assert!(matches!(read_material_grid(&mut bad_units.as_slice()), Err(Error::Format(_))));
    }
}
