//! Per-cell anisotropic materials: tensors, SPD validation, cell averaging of
//! analytic distributions and the standard high-contrast test layouts.

pub mod io;
mod tensor;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::YeeGrid;
use crate::{Error, Result};

pub use tensor::{check_spd, invert_tensor, SpdCheck, Tensor3};
pub(crate) use tensor::{det3, inverse3, matmul3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorKind {
    Eps,
    Mu,
}

impl FromStr for TensorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eps" | "epsilon" => Ok(TensorKind::Eps),
            "mu" => Ok(TensorKind::Mu),
            other => Err(Error::InvalidMaterial(format!("unknown tensor kind '{other}'"))),
        }
    }
}

/// High-contrast fully anisotropic test tensors, scaled by `gamma`.
pub fn preset_tensor(kind: TensorKind, gamma: f64) -> Result<Tensor3> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidMaterial(format!("contrast scale must be positive, got {gamma}")));
    }
    let s = (1.5f64).sqrt();
    let base = match kind {
        TensorKind::Eps => Tensor3::symmetric(10.225, 10.225, 9.95, -0.825, -0.55 * s, 0.55 * s),
        TensorKind::Mu => Tensor3::symmetric(3.75, 3.75, 3.5, 0.75, -0.5 * s, -0.5 * s),
    };
    Ok(base.scaled(gamma))
}

/// Gauss-Legendre nodes on [-1, 1], four points.
pub const GAUSS4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
pub const GAUSS4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_8,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_8,
];

/// Cell quadrature used when averaging an analytic tensor field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Tensor-product 4-point Gauss rule, 64 samples per cell.
    #[default]
    Gauss4,
    /// Single sample at the cell center.
    Center,
}

/// Volume average of `material_fn` over a cell with the 64-point Gauss rule.
pub fn average_analytic<F>(material_fn: F, cell: [usize; 3], grid: &YeeGrid) -> Result<Tensor3>
where
    F: FnMut([f64; 3]) -> Result<Tensor3>,
{
    average_with(material_fn, cell, grid, Quadrature::Gauss4)
}

pub fn average_with<F>(mut material_fn: F, cell: [usize; 3], grid: &YeeGrid, rule: Quadrature) -> Result<Tensor3>
where
    F: FnMut([f64; 3]) -> Result<Tensor3>,
{
    grid.check_cell(cell)?;
    let h = grid.spacing();
    let sample = |f: &mut F, p: [f64; 3]| -> Result<Tensor3> {
        let t = f(p)?;
        let spd = check_spd(&t);
        if !spd.is_spd {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: spd.min_eigenvalue,
            });
        }
        Ok(t)
    };
    match rule {
        Quadrature::Center => sample(&mut material_fn, grid.cell_center(cell)),
        Quadrature::Gauss4 => {
            let mut acc = [[0.0; 3]; 3];
            for (&xa, &wa) in GAUSS4_NODES.iter().zip(&GAUSS4_WEIGHTS) {
                for (&xb, &wb) in GAUSS4_NODES.iter().zip(&GAUSS4_WEIGHTS) {
                    for (&xc, &wc) in GAUSS4_NODES.iter().zip(&GAUSS4_WEIGHTS) {
                        let p = [
                            (cell[0] as f64 + 0.5 + 0.5 * xa) * h[0],
                            (cell[1] as f64 + 0.5 + 0.5 * xb) * h[1],
                            (cell[2] as f64 + 0.5 + 0.5 * xc) * h[2],
                        ];
                        let t = sample(&mut material_fn, p)?;
                        let w = wa * wb * wc / 8.0;
                        for (p, row) in acc.iter_mut().enumerate() {
                            for (q, v) in row.iter_mut().enumerate() {
                                *v += w * t.get(p, q);
                            }
                        }
                    }
                }
            }
            Tensor3::new(acc)
        }
    }
}

/// Piecewise-constant material distribution with precomputed inverses.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialGrid {
    dims: [usize; 3],
    eps: Vec<Tensor3>,
    mu: Vec<Tensor3>,
    xi: Vec<Tensor3>,
    zeta: Vec<Tensor3>,
}

impl MaterialGrid {
    pub fn vacuum(dims: [usize; 3]) -> Self {
        let n = dims.iter().product();
        let id = vec![Tensor3::IDENTITY; n];
        MaterialGrid {
            dims,
            eps: id.clone(),
            mu: id.clone(),
            xi: id.clone(),
            zeta: id,
        }
    }

    /// Validate SPD per cell and precompute ξ = ε⁻¹, ζ = μ⁻¹.
    pub fn from_tensors(dims: [usize; 3], eps: Vec<Tensor3>, mu: Vec<Tensor3>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if eps.len() != n || mu.len() != n {
            return Err(Error::InvalidMaterial(format!(
                "expected {n} tensors per field, got {} (eps) and {} (mu)",
                eps.len(),
                mu.len()
            )));
        }
        let invert_all = |ts: &[Tensor3], what: &str| -> Result<Vec<Tensor3>> {
            ts.iter()
                .enumerate()
                .map(|(idx, t)| {
                    invert_tensor(t).map_err(|e| Error::InvalidMaterial(format!("{what} at cell index {idx}: {e}")))
                })
                .collect()
        };
        let xi = invert_all(&eps, "eps")?;
        let zeta = invert_all(&mu, "mu")?;
        Ok(MaterialGrid { dims, eps, mu, xi, zeta })
    }

    /// Build cell by cell from a closure returning `(eps, mu)`.
    pub fn from_fn<F>(grid: &YeeGrid, mut f: F) -> Result<Self>
    where
        F: FnMut([usize; 3]) -> Result<(Tensor3, Tensor3)>,
    {
        let n = grid.num_cells();
        let mut eps = Vec::with_capacity(n);
        let mut mu = Vec::with_capacity(n);
        for idx in 0..n {
            let (e, m) = f(grid.cell_of(idx))?;
            eps.push(e);
            mu.push(m);
        }
        MaterialGrid::from_tensors(grid.dims(), eps, mu)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn num_cells(&self) -> usize {
        self.eps.len()
    }

    #[inline]
    pub fn eps(&self, idx: usize) -> &Tensor3 {
        &self.eps[idx]
    }

    #[inline]
    pub fn mu(&self, idx: usize) -> &Tensor3 {
        &self.mu[idx]
    }

    #[inline]
    pub fn xi(&self, idx: usize) -> &Tensor3 {
        &self.xi[idx]
    }

    #[inline]
    pub fn zeta(&self, idx: usize) -> &Tensor3 {
        &self.zeta[idx]
    }

    pub fn eps_all(&self) -> &[Tensor3] {
        &self.eps
    }

    pub fn mu_all(&self) -> &[Tensor3] {
        &self.mu
    }

    pub fn xi_all(&self) -> &[Tensor3] {
        &self.xi
    }

    pub fn zeta_all(&self) -> &[Tensor3] {
        &self.zeta
    }

    pub fn is_vacuum_cell(&self, idx: usize) -> bool {
        self.eps[idx].is_identity() && self.mu[idx].is_identity()
    }

    pub fn is_vacuum(&self) -> bool {
        (0..self.num_cells()).all(|i| self.is_vacuum_cell(i))
    }

    /// ε → γε and μ → γμ in every cell.
    pub fn scaled(&self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidMaterial(format!("scale must be positive, got {gamma}")));
        }
        MaterialGrid::from_tensors(
            self.dims,
            self.eps.iter().map(|t| t.scaled(gamma)).collect(),
            self.mu.iter().map(|t| t.scaled(gamma)).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomCategory {
    EpsOnly,
    MuOnly,
    Both,
    Vacuum,
}

impl RandomCategory {
    pub const ALL: [RandomCategory; 4] = [
        RandomCategory::EpsOnly,
        RandomCategory::MuOnly,
        RandomCategory::Both,
        RandomCategory::Vacuum,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    Vacuum,
    /// Cells whose centers satisfy |c - center| <= radius.
    Sphere { center: [f64; 3], radius: f64 },
    /// Cells whose centers lie in the closed box [low, high].
    Cube { low: [f64; 3], high: [f64; 3] },
    /// Independent per-cell category draw, weights in `RandomCategory::ALL` order.
    Random { weights: [f64; 4] },
}

impl Layout {
    pub fn random_uniform() -> Self {
        Layout::Random { weights: [0.25; 4] }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Layout::Vacuum => "vacuum",
            Layout::Sphere { .. } => "sphere",
            Layout::Cube { .. } => "cube",
            Layout::Random { .. } => "random",
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_inside(grid: &YeeGrid, low: [f64; 3], high: [f64; 3], what: &str) -> Result<()> {
    let ext = grid.extent();
    for a in 0..3 {
        if !(low[a] >= 0.0 && high[a] <= ext[a] && low[a] < high[a]) {
            return Err(Error::InvalidMaterial(format!(
                "{what} spans [{}, {}] on axis {a}, outside the domain [0, {}]",
                low[a], high[a], ext[a]
            )));
        }
    }
    Ok(())
}

/// Assign preset tensors of contrast `gamma` according to `layout`.
/// `seed` is required for the random layout.
pub fn build_layout(layout: &Layout, gamma: f64, grid: &YeeGrid, seed: Option<u64>) -> Result<MaterialGrid> {
    let eps = preset_tensor(TensorKind::Eps, gamma)?;
    let mu = preset_tensor(TensorKind::Mu, gamma)?;
    let id = Tensor3::IDENTITY;
    match *layout {
        Layout::Vacuum => Ok(MaterialGrid::vacuum(grid.dims())),
        Layout::Sphere { center, radius } => {
            if !(radius > 0.0) {
                return Err(Error::InvalidMaterial(format!("sphere radius must be positive, got {radius}")));
            }
            check_inside(grid, center.map(|c| c - radius), center.map(|c| c + radius), "sphere")?;
            MaterialGrid::from_fn(grid, |cell| {
                let c = grid.cell_center(cell);
                let r2: f64 = (0..3).map(|a| (c[a] - center[a]).powi(2)).sum();
                Ok(if r2 <= radius * radius { (eps, mu) } else { (id, id) })
            })
        }
        Layout::Cube { low, high } => {
            check_inside(grid, low, high, "cube")?;
            MaterialGrid::from_fn(grid, |cell| {
                let c = grid.cell_center(cell);
                let inside = (0..3).all(|a| c[a] >= low[a] && c[a] <= high[a]);
                Ok(if inside { (eps, mu) } else { (id, id) })
            })
        }
        Layout::Random { weights } => {
            let seed = seed.ok_or_else(|| Error::InvalidMaterial("random layout requires a seed".into()))?;
            let total: f64 = weights.iter().sum();
            if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || !(total > 0.0) {
                return Err(Error::InvalidMaterial(format!("invalid category weights {weights:?}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            MaterialGrid::from_fn(grid, |_| {
                let u: f64 = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut cat = RandomCategory::Vacuum;
                for (c, w) in RandomCategory::ALL.iter().zip(weights) {
                    acc += w;
                    if u < acc {
                        cat = *c;
                        break;
                    }
                }
                Ok(match cat {
                    RandomCategory::EpsOnly => (eps, id),
                    RandomCategory::MuOnly => (id, mu),
                    RandomCategory::Both => (eps, mu),
                    RandomCategory::Vacuum => (id, id),
                })
            })
        }
    }
}

/// Random SPD tensor A·Aᵀ + shift·I with A uniform in [-1, 1].
pub fn random_spd_tensor<R: Rng + ?Sized>(rng: &mut R, shift: f64) -> Tensor3 {
    let a: [[f64; 3]; 3] = [[0; 3]; 3].map(|r| r.map(|_| rng.random_range(-1.0..1.0)));
    let mut m = [[0.0; 3]; 3];
    for p in 0..3 {
        for q in 0..3 {
            m[p][q] = (0..3).map(|k| a[p][k] * a[q][k]).sum::<f64>() + if p == q { shift } else { 0.0 };
        }
    }
    Tensor3::symmetric(m[0][0], m[1][1], m[2][2], m[0][1], m[0][2], m[1][2])
}

/// Every cell gets independent random SPD ε and μ.
pub fn random_spd_grid(dims: [usize; 3], seed: u64) -> Result<MaterialGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = dims.iter().product();
    let eps = (0..n).map(|_| random_spd_tensor(&mut rng, 0.5)).collect();
    let mu = (0..n).map(|_| random_spd_tensor(&mut rng, 0.5)).collect();
    MaterialGrid::from_tensors(dims, eps, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoundaryKind;
    use proptest::prelude::*;

    fn grid(n: usize) -> YeeGrid {
        YeeGrid::uniform([n; 3], 1.0, BoundaryKind::Periodic).unwrap()
    }

    #[test]
    fn presets_as_printed() {
        let e = preset_tensor(TensorKind::Eps, 1.0).unwrap();
        assert_eq!((e.get(0, 0), e.get(0, 1)), (10.225, -0.825));
        assert_eq!(e.get(0, 2), -0.55 * (1.5f64).sqrt());
        let m = preset_tensor(TensorKind::Mu, 1.0).unwrap();
        assert_eq!((m.get(0, 0), m.get(2, 2)), (3.75, 3.5));
        assert_eq!(m.get(0, 2), -0.5 * (1.5f64).sqrt());
        for g in [1.0, 50.0, 100.0, 144.0] {
            for k in [TensorKind::Eps, TensorKind::Mu] {
                assert_eq!(preset_tensor(k, g).unwrap(), preset_tensor(k, 1.0).unwrap().scaled(g));
                assert!(check_spd(&preset_tensor(k, g).unwrap()).is_spd);
            }
        }
        assert!(preset_tensor(TensorKind::Eps, 0.0).is_err());
        assert!(preset_tensor(TensorKind::Mu, -1.0).is_err());
    }

    #[test]
    fn preset_min_eigenvalues() {
        // Frozen from an independent dense symmetric eigensolve.
        let e = check_spd(&preset_tensor(TensorKind::Eps, 1.0).unwrap());
        let m = check_spd(&preset_tensor(TensorKind::Mu, 1.0).unwrap());
        assert!((e.min_eigenvalue - 9.4).abs() < 1e-12, "{}", e.min_eigenvalue);
        assert!((m.min_eigenvalue - 3.0).abs() < 1e-12, "{}", m.min_eigenvalue);
    }

    #[test]
    fn average_of_constant_and_linear() {
        let g = YeeGrid::new([4, 3, 2], [0.5, 2.0, 1.0], [crate::AxisBoundary::PERIODIC; 3]).unwrap();
        let c = preset_tensor(TensorKind::Eps, 3.0).unwrap();
        let avg = average_analytic(|_| Ok(c), [1, 2, 0], &g).unwrap();
        for p in 0..3 {
            for q in 0..3 {
                assert!((avg.get(p, q) - c.get(p, q)).abs() < 1e-13);
            }
        }
        let a = Tensor3::isotropic(2.0);
        let b = preset_tensor(TensorKind::Mu, 1.0).unwrap();
        let (x0, x1) = (1.0 * 0.5, 2.0 * 0.5);
        let lin = |p: [f64; 3]| {
            let s = (p[0] - x0) / (x1 - x0);
            Ok(a.scaled(1.0 - s) + b.scaled(s))
        };
        let avg = average_analytic(lin, [1, 0, 1], &g).unwrap();
        for p in 0..3 {
            for q in 0..3 {
                assert!((avg.get(p, q) - 0.5 * (a.get(p, q) + b.get(p, q))).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn average_rejects_non_spd_samples() {
        let g = grid(2);
        let r = average_analytic(|p| Ok(Tensor3::diagonal(1.0, 1.0, if p[0] > 0.5 { -1.0 } else { 1.0 })), [0, 0, 0], &g);
        assert!(matches!(r, Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn vacuum_layout_is_identity() {
        let m = build_layout(&Layout::Vacuum, 100.0, &grid(3), None).unwrap();
        assert!(m.is_vacuum());
        assert!(m.xi_all().iter().all(Tensor3::is_identity));
    }

    #[test]
    fn sphere_matches_center_distance() {
        let g = grid(12);
        let center = [4.3, 6.7, 5.1];
        let radius = 3.2;
        let m = build_layout(&Layout::Sphere { center, radius }, 1.0, &g, None).unwrap();
        let mut count = 0;
        for k in 0..12 {
            for j in 0..12 {
                for i in 0..12 {
                    let d = ((i as f64 + 0.5 - center[0]).powi(2)
                        + (j as f64 + 0.5 - center[1]).powi(2)
                        + (k as f64 + 0.5 - center[2]).powi(2))
                    .sqrt();
                    let idx = g.index(i, j, k);
                    assert_eq!(!m.is_vacuum_cell(idx), d <= radius);
                    count += usize::from(d <= radius);
                }
            }
        }
        assert!(count > 100);
        let bad = Layout::Sphere { center: [1.0, 6.0, 6.0], radius: 3.0 };
        assert!(build_layout(&bad, 1.0, &g, None).is_err());
    }

    #[test]
    fn cube_layout_and_bounds() {
        let g = grid(6);
        let m = build_layout(&Layout::Cube { low: [1.0, 2.0, 0.5], high: [3.0, 4.0, 2.0] }, 1.0, &g, None).unwrap();
        let inside = (0..g.num_cells()).filter(|&i| !m.is_vacuum_cell(i)).count();
        assert_eq!(inside, 2 * 2 * 2);
        assert!(build_layout(&Layout::Cube { low: [0.0; 3], high: [7.0; 3] }, 1.0, &g, None).is_err());
    }

    #[test]
    fn random_layout_is_deterministic() {
        let g = grid(12);
        let a = build_layout(&Layout::random_uniform(), 100.0, &g, Some(7)).unwrap();
        let b = build_layout(&Layout::random_uniform(), 100.0, &g, Some(7)).unwrap();
        assert_eq!(a, b);
        let c = build_layout(&Layout::random_uniform(), 100.0, &g, Some(8)).unwrap();
        assert_ne!(a, c);
        assert!(build_layout(&Layout::random_uniform(), 100.0, &g, None).is_err());
        let eps = preset_tensor(TensorKind::Eps, 100.0).unwrap();
        let mu = preset_tensor(TensorKind::Mu, 100.0).unwrap();
        let mut counts = [0usize; 4];
        for i in 0..a.num_cells() {
            let cat = match (*a.eps(i) == eps, *a.mu(i) == mu) {
                (true, false) => 0,
                (false, true) => 1,
                (true, true) => 2,
                (false, false) => 3,
            };
            counts[cat] += 1;
        }
        // 1728 cells, expected 432 each; 5 standard deviations is about 90.
        for c in counts {
            assert!((c as i64 - 432).abs() < 90, "{counts:?}");
        }
    }

    #[test]
    fn inverses_are_accurate() {
        let m = random_spd_grid([3, 3, 3], 11).unwrap();
        for i in 0..m.num_cells() {
            for (t, inv) in [(m.eps(i), m.xi(i)), (m.mu(i), m.zeta(i))] {
                let prod = t.matmul(inv);
                for p in 0..3 {
                    for q in 0..3 {
                        let e = if p == q { 1.0 } else { 0.0 };
                        assert!((prod[p][q] - e).abs() < 1e-13 * t.max_abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn from_tensors_rejects_bad_input() {
        let bad = vec![Tensor3::diagonal(1.0, -1.0, 1.0); 8];
        assert!(MaterialGrid::from_tensors([2, 2, 2], bad, vec![Tensor3::IDENTITY; 8]).is_err());
        assert!(MaterialGrid::from_tensors([2, 2, 2], vec![Tensor3::IDENTITY; 7], vec![Tensor3::IDENTITY; 8]).is_err());
    }

    proptest! {
        #[test]
        fn average_of_spd_field_is_spd(seed in any::<u64>(), wx in 0.1f64..3.0, wy in 0.1f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_spd_tensor(&mut rng, 0.05);
            let b = random_spd_tensor(&mut rng, 0.05);
            let g = grid(3);
            let field = |p: [f64; 3]| {
                let s = 0.5 + 0.5 * (wx * p[0] + wy * p[1] - p[2]).sin();
                Ok(a.scaled(s) + b.scaled(1.0 - s))
            };
            let avg = average_analytic(field, [1, 2, 0], &g).unwrap();
            prop_assert!(check_spd(&avg).is_spd);
        }

        #[test]
        fn preset_scaling_is_exact(gamma in 1e-3f64..1e3) {
            for k in [TensorKind::Eps, TensorKind::Mu] {
                prop_assert_eq!(preset_tensor(k, gamma).unwrap(), preset_tensor(k, 1.0).unwrap().scaled(gamma));
            }
        }
    }
}
