//! Field snapshot export.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic      4 bytes  "AFSN"
//! version    u32      1
//! dims       3 x u64
//! spacing    3 x f64
//! name_len   u8, followed by the component name in UTF-8 ("Ex", "Hz", ...)
//! time_level f64      (half-integer for B/H)
//! data       nx*ny*nz x f64, x fastest
//! ```

use std::io::{Read, Write};

use super::{Axis, Component, FieldSet, YeeGrid};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"AFSN";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub component: Component,
    pub time_level: f64,
    pub data: Vec<f64>,
}

pub fn write_snapshot<W: Write>(w: &mut W, grid: &YeeGrid, fields: &FieldSet, component: Component) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for n in grid.dims() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for d in grid.spacing() {
        w.write_all(&d.to_le_bytes())?;
    }
    let name = component.name();
    w.write_all(&[name.len() as u8])?;
    w.write_all(name.as_bytes())?;
    w.write_all(&fields.time_level(component.kind).to_le_bytes())?;
    for v in fields.component(component) {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_snapshot<R: Read>(r: &mut R) -> Result<Snapshot> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a field snapshot".into()));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v)?;
    if u32::from_le_bytes(v) != VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {}", u32::from_le_bytes(v))));
    }
    let mut dims = [0usize; 3];
    for n in &mut dims {
        *n = read_u64(r)? as usize;
    }
    let mut spacing = [0.0; 3];
    for d in &mut spacing {
        *d = read_f64(r)?;
    }
    let mut len = [0u8; 1];
    r.read_exact(&mut len)?;
    let mut name = vec![0u8; len[0] as usize];
    r.read_exact(&mut name)?;
    let name = String::from_utf8(name).map_err(|_| Error::Format("component name is not UTF-8".into()))?;
    let component: Component = name.parse()?;
    let time_level = read_f64(r)?;
    let n: usize = dims.iter().product();
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        data.push(read_f64(r)?);
    }
    Ok(Snapshot {
        dims,
        spacing,
        component,
        time_level,
        data,
    })
}

/// Write the 2D cut `normal = index` of one component as CSV rows
/// `(u, v, value)`, where `u`, `v` are the physical coordinates along the two
/// in-plane axes in cyclic order.
pub fn write_csv_slice<W: Write>(
    w: &mut W,
    grid: &YeeGrid,
    fields: &FieldSet,
    component: Component,
    normal: Axis,
    index: usize,
) -> Result<()> {
    let dims = grid.dims();
    if index >= dims[normal.index()] {
        return Err(Error::InvalidArgument(format!(
            "slice index {index} outside axis {normal} of length {}",
            dims[normal.index()]
        )));
    }
    let (ua, va) = normal.cyclic();
    writeln!(w, "{ua},{va},{component}")?;
    let data = fields.component(component);
    for q in 0..dims[va.index()] {
        for p in 0..dims[ua.index()] {
            let mut cell = [0usize; 3];
            cell[normal.index()] = index;
            cell[ua.index()] = p;
            cell[va.index()] = q;
            let pos = grid.field_position(component, cell)?;
            let idx = grid.index(cell[0], cell[1], cell[2]);
            writeln!(w, "{},{},{}", pos[ua.index()], pos[va.index()], data[idx])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoundaryKind;

    #[test]
    fn snapshot_round_trip() {
        let g = YeeGrid::new([3, 2, 2], [0.5, 1.0, 2.0], [crate::AxisBoundary::PERIODIC; 3]).unwrap();
        let mut f = FieldSet::zeros(g.dims());
        for (n, v) in f.component_mut(Component::HY).iter_mut().enumerate() {
            *v = n as f64 * 0.25 - 1.0;
        }
        f.steps = 7;
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &g, &f, Component::HY).unwrap();
        let s = read_snapshot(&mut buf.as_slice()).unwrap();
        assert_eq!(s.dims, [3, 2, 2]);
        assert_eq!(s.spacing, [0.5, 1.0, 2.0]);
        assert_eq!(s.component, Component::HY);
        assert_eq!(s.time_level, 6.5);
        assert_eq!(s.data, f.component(Component::HY));
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_snapshot(&mut &b"nope, not a snapshot"[..]).is_err());
    }

    #[test]
    fn csv_slice_has_one_row_per_cell() {
        let g = YeeGrid::uniform([3, 4, 5], 1.0, BoundaryKind::Pec).unwrap();
        let f = FieldSet::zeros(g.dims());
        let mut out = Vec::new();
        write_csv_slice(&mut out, &g, &f, Component::EZ, Axis::Z, 2).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 * 4);
        assert!(write_csv_slice(&mut Vec::new(), &g, &f, Component::EZ, Axis::Z, 5).is_err());
    }
}
