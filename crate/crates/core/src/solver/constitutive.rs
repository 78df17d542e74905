//! Constitutive inversion E = ξD and H = ζB, cell by cell (first order) or
//! averaged over the cells sharing each face and edge (second order).
//!
//! Both schemes reduce to a per-component stencil with precomputed
//! coefficients. For component `a` with cyclic successors `(b, c)`:
//!
//! non-averaged: `E_a = ξ_aa D_a + ξ_ab D_b + ξ_ac D_c`, all in cell `q`.
//!
//! averaged E, cells `q` and `m = q - â` sharing the face:
//! ```text
//! E_a = ½(ξ_aa(q) + ξ_aa(m)) D_a(q)
//!     + ¼ ξ_ab(q) (D_b(q) + D_b(q+b̂)) + ¼ ξ_ab(m) (D_b(m) + D_b(m+b̂))
//!     + ¼ ξ_ac(q) (D_c(q) + D_c(q+ĉ)) + ¼ ξ_ac(m) (D_c(m) + D_c(m+ĉ))
//! ```
//! averaged H, cells `q, q-b̂, q-ĉ, q-b̂-ĉ` sharing the edge:
//! ```text
//! H_a = ¼ Σ ζ_aa B_a(q)
//!     + ⅛ (ζ_ab(q) + ζ_ab(q-ĉ)) (B_b(q) + B_b(q+â))
//!     + ⅛ (ζ_ab(q-b̂) + ζ_ab(q-b̂-ĉ)) (B_b(q-b̂) + B_b(q-b̂+â))
//!     + ⅛ (ζ_ac(q) + ζ_ac(q-b̂)) (B_c(q) + B_c(q+â))
//!     + ⅛ (ζ_ac(q-ĉ) + ζ_ac(q-b̂-ĉ)) (B_c(q-ĉ) + B_c(q-ĉ+â))
//! ```
//! The second and fourth coefficients of each averaged stencil are the
//! first and third read one (clamped) cell down along `a` for E, and along
//! `b` and `c` for H, so only three coefficient arrays are stored.
//!
//! Off non-periodic faces the material of a missing cell is clamped to the
//! nearest in-domain cell while its fluxes are zero, the same ghost values
//! the curl uses. This keeps the global material matrix symmetric.

use crate::boundary::AxisMap;
use crate::lattice::Axis;
use crate::materials::Tensor3;

use super::curl::for_each_slab;
use super::SchemeKind;

/// Neighbour tables along each axis: clamped indices for materials and
/// axis maps for fluxes, whose out-of-domain values are zero.
#[derive(Debug, Clone)]
pub(crate) struct Neighbours {
    dims: [usize; 3],
    maps: [AxisMap; 3],
    prev: [Vec<usize>; 3],
}

impl Neighbours {
    pub fn new(dims: [usize; 3], maps: [AxisMap; 3]) -> Self {
        let prev = [0, 1, 2].map(|a| (0..dims[a]).map(|i| maps[a].prev_clamped(i)).collect());
        Neighbours { dims, maps, prev }
    }

    #[inline]
    fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    #[inline]
    fn down(&self, mut c: [usize; 3], a: usize) -> [usize; 3] {
        c[a] = self.prev[a][c[a]];
        c
    }

    fn step(&self, axis: usize, i: usize, s: i8) -> Option<usize> {
        match s {
            0 => Some(i),
            1 => self.maps[axis].next(i),
            _ => self.maps[axis].prev(i),
        }
    }

    /// The x-row of `f` through `(j, k)` displaced by `shift[1..]`, or
    /// `None` beyond a non-periodic face.
    fn row<'f>(&self, f: &'f [f64], j: usize, k: usize, shift: [i8; 3]) -> Option<&'f [f64]> {
        let [nx, ny, _] = self.dims;
        let jj = self.step(1, j, shift[1])?;
        let kk = self.step(2, k, shift[2])?;
        let base = nx * (jj + ny * kk);
        Some(&f[base..base + nx])
    }

    /// The x-row through `(j, k)` one clamped cell down `axis`, and whether
    /// the x index still needs the clamped step (`axis` = x).
    fn down_row<'f>(&self, f: &'f [f64], j: usize, k: usize, axis: usize) -> (&'f [f64], bool) {
        let [nx, ny, _] = self.dims;
        let (jj, kk) = match axis {
            1 => (self.prev[1][j], k),
            2 => (j, self.prev[2][k]),
            _ => (j, k),
        };
        let base = nx * (jj + ny * kk);
        (&f[base..base + nx], axis == 0)
    }

    /// `row[i + s]` with the x boundary applied.
    #[inline]
    fn at(&self, row: &[f64], i: usize, s: i8) -> f64 {
        match self.step(0, i, s) {
            Some(ii) => row[ii],
            None => 0.0,
        }
    }
}

/// Coefficients of one field's constitutive stencil, one array per term
/// for each of the three components.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    scheme: SchemeKind,
    electric: bool,
    coefs: [Vec<Vec<f64>>; 3],
}

fn unit(axis: usize, s: i8) -> [i8; 3] {
    let mut v = [0; 3];
    v[axis] = s;
    v
}

fn sum(x: [i8; 3], y: [i8; 3]) -> [i8; 3] {
    [x[0] + y[0], x[1] + y[1], x[2] + y[2]]
}

impl Stencil {
    pub fn new_electric(scheme: SchemeKind, xi: &[Tensor3], nb: &Neighbours) -> Self {
        let coefs = [0usize, 1, 2].map(|a| {
            let (b, c) = Axis::from_index(a).cyclic();
            let (b, c) = (b.index(), c.index());
            match scheme {
                SchemeKind::NonAveraged => non_averaged(xi, a, b, c),
                SchemeKind::Averaged => planar(xi.len(), |idx| {
                    let q = cell_of(nb.dims, idx);
                    let (tq, tm) = (&xi[idx], &xi[nb.index(nb.down(q, a))]);
                    [0.5 * (tq.get(a, a) + tm.get(a, a)), 0.25 * tq.get(a, b), 0.25 * tq.get(a, c)]
                }),
            }
        });
        Stencil {
            scheme,
            electric: true,
            coefs,
        }
    }

    pub fn new_magnetic(scheme: SchemeKind, zeta: &[Tensor3], nb: &Neighbours) -> Self {
        let coefs = [0usize, 1, 2].map(|a| {
            let (b, c) = Axis::from_index(a).cyclic();
            let (b, c) = (b.index(), c.index());
            match scheme {
                SchemeKind::NonAveraged => non_averaged(zeta, a, b, c),
                SchemeKind::Averaged => planar(zeta.len(), |idx| {
                    let q = cell_of(nb.dims, idx);
                    let qb = nb.down(q, b);
                    let qc = nb.down(q, c);
                    let t0 = &zeta[idx];
                    let tb = &zeta[nb.index(qb)];
                    let tc = &zeta[nb.index(qc)];
                    let tbc = &zeta[nb.index(nb.down(qb, c))];
                    [
                        0.25 * (t0.get(a, a) + tb.get(a, a) + tc.get(a, a) + tbc.get(a, a)),
                        0.125 * (t0.get(a, b) + tc.get(a, b)),
                        0.125 * (t0.get(a, c) + tb.get(a, c)),
                    ]
                }),
            }
        });
        Stencil {
            scheme,
            electric: false,
            coefs,
        }
    }

    /// `out[a] = stencil(flux)` for every component.
    pub fn apply(&self, out: &mut [Vec<f64>; 3], flux: &[Vec<f64>; 3], nb: &Neighbours, parallel: bool) {
        let [nx, ny, _] = nb.dims;
        for (a, out_a) in out.iter_mut().enumerate() {
            let (b, c) = Axis::from_index(a).cyclic();
            let (b, c) = (b.index(), c.index());
            let w = &self.coefs[a];
            let (fa, fb, fc) = (&flux[a][..], &flux[b][..], &flux[c][..]);
            match self.scheme {
                SchemeKind::NonAveraged => {
                    for_each_slab(out_a, nx * ny, parallel, |k, slab| {
                        let r = k * nx * ny..(k + 1) * nx * ny;
                        let (w0, w1, w2) = (&w[0][r.clone()], &w[1][r.clone()], &w[2][r.clone()]);
                        let (ra, rb, rc) = (&fa[r.clone()], &fb[r.clone()], &fc[r]);
                        for n in 0..slab.len() {
                            slab[n] = w0[n] * ra[n] + w1[n] * rb[n] + w2[n] * rc[n];
                        }
                    });
                }
                SchemeKind::Averaged => {
                    // Each off-diagonal term pairs two flux samples; the
                    // first of each pair may lie in the cell itself.
                    let shifts: [[i8; 3]; 8] = if self.electric {
                        let am = unit(a, -1);
                        [
                            [0; 3],
                            unit(b, 1),
                            am,
                            sum(am, unit(b, 1)),
                            [0; 3],
                            unit(c, 1),
                            am,
                            sum(am, unit(c, 1)),
                        ]
                    } else {
                        let ap = unit(a, 1);
                        let (bm, cm) = (unit(b, -1), unit(c, -1));
                        [[0; 3], ap, bm, sum(bm, ap), [0; 3], ap, cm, sum(cm, ap)]
                    };
                    // Axes along which the second and fourth coefficients
                    // are read one cell down.
                    let (down2, down4) = if self.electric { (a, a) } else { (b, c) };
                    for_each_slab(out_a, nx * ny, parallel, |k, slab| {
                        let zeros = vec![0.0; nx];
                        for j in 0..ny {
                            let base = nx * (j + ny * k);
                            let r = base..base + nx;
                            let rows: [&[f64]; 8] = std::array::from_fn(|t| {
                                let f = if t < 4 { fb } else { fc };
                                nb.row(f, j, k, shifts[t]).unwrap_or(&zeros)
                            });
                            let (w0, w1, w3) = (&w[0][r.clone()], &w[1][r.clone()], &w[2][r.clone()]);
                            let (w2, x2) = nb.down_row(&w[1], j, k, down2);
                            let (w4, x4) = nb.down_row(&w[2], j, k, down4);
                            let ra = &fa[r];
                            let o = &mut slab[nx * j..nx * (j + 1)];
                            let edge = |i: usize| -> f64 {
                                let p = |t: usize| nb.at(rows[t], i, shifts[t][0]);
                                let down = |row: &[f64], x: bool| row[if x { nb.prev[0][i] } else { i }];
                                w0[i] * ra[i]
                                    + w1[i] * (p(0) + p(1))
                                    + down(w2, x2) * (p(2) + p(3))
                                    + w3[i] * (p(4) + p(5))
                                    + down(w4, x4) * (p(6) + p(7))
                            };
                            if nx < 3 {
                                for (i, v) in o.iter_mut().enumerate() {
                                    *v = edge(i);
                                }
                                continue;
                            }
                            o[0] = edge(0);
                            o[nx - 1] = edge(nx - 1);
                            // Interior cells never touch the x boundary, so
                            // every x step is a plain slice offset.
                            let s: [&[f64]; 8] = std::array::from_fn(|t| {
                                let lo = (1 + shifts[t][0]) as usize;
                                &rows[t][lo..lo + nx - 2]
                            });
                            let inner = 1..nx - 1;
                            let w2 = if x2 { &w2[..nx - 2] } else { &w2[inner.clone()] };
                            let w4 = if x4 { &w4[..nx - 2] } else { &w4[inner.clone()] };
                            let (w0, w1, w3, ra) = (&w0[inner.clone()], &w1[inner.clone()], &w3[inner.clone()], &ra[inner.clone()]);
                            for (n, v) in o[inner].iter_mut().enumerate() {
                                *v = w0[n] * ra[n]
                                    + w1[n] * (s[0][n] + s[1][n])
                                    + w2[n] * (s[2][n] + s[3][n])
                                    + w3[n] * (s[4][n] + s[5][n])
                                    + w4[n] * (s[6][n] + s[7][n]);
                            }
                        }
                    });
                }
            }
        }
    }
}

fn non_averaged(t: &[Tensor3], a: usize, b: usize, c: usize) -> Vec<Vec<f64>> {
    planar(t.len(), |idx| {
        let m = &t[idx];
        [m.get(a, a), m.get(a, b), m.get(a, c)]
    })
}

/// Splits per-cell coefficient triples into contiguous arrays.
fn planar(n: usize, f: impl Fn(usize) -> [f64; 3]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(n)).collect();
    for idx in 0..n {
        let v = f(idx);
        for (o, x) in out.iter_mut().zip(v) {
            o.push(x);
        }
    }
    out
}

#[inline]
fn cell_of(dims: [usize; 3], idx: usize) -> [usize; 3] {
    [idx % dims[0], (idx / dims[0]) % dims[1], idx / (dims[0] * dims[1])]
}
