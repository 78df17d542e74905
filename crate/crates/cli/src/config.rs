//! TOML run configuration.
//!
//! Errors raised while deserializing carry the byte span of the offending
//! value, so they are reported with a line and column. The few checks that
//! span several keys use [`Spanned`] fields for the same purpose.

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use aniso_fdtd::analysis::study::{StudyCase, StudyConfig};
use aniso_fdtd::boundary::{PmlPairing, PmlParams};
use aniso_fdtd::cloak::{CloakKind, CloakSpec};
use aniso_fdtd::materials::io::read_material_grid;
use aniso_fdtd::materials::{build_layout, Layout, Quadrature};
use aniso_fdtd::solver::{CflMethod, CflOptions};
use aniso_fdtd::source::{GaussianPulse, PointSource, TfsfSpec};
use aniso_fdtd::{Axis, AxisBoundary, BoundaryKind, Component, MaterialGrid, SchemeKind, YeeGrid};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use toml::Spanned;

use crate::error::CliError;
use crate::units::{Length, Time};

/// A value stored in the file as the string form of a core enum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parsed<T>(pub T);

impl<T: fmt::Display> Serialize for Parsed<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de, T> Deserialize<'de> for Parsed<T>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map(Parsed).map_err(serde::de::Error::custom)
    }
}

impl<T: Default> Default for Parsed<T> {
    fn default() -> Self {
        Parsed(T::default())
    }
}

/// One value for all three axes, or a three-element array.
#[derive(Debug, Clone, PartialEq)]
pub enum PerAxis<T> {
    Uniform(T),
    Axes([T; 3]),
}

impl<T: Clone> PerAxis<T> {
    pub fn resolve(&self) -> [T; 3] {
        match self {
            PerAxis::Uniform(v) => [v.clone(), v.clone(), v.clone()],
            PerAxis::Axes(a) => a.clone(),
        }
    }
}

impl<T: Serialize> Serialize for PerAxis<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PerAxis::Uniform(v) => v.serialize(s),
            PerAxis::Axes(a) => a.serialize(s),
        }
    }
}

impl<'de, T: serde::de::DeserializeOwned> Deserialize<'de> for PerAxis<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match toml::Value::deserialize(d)? {
            toml::Value::Array(items) => {
                if items.len() != 3 {
                    return Err(D::Error::custom(format!("expected 3 entries, found {}", items.len())));
                }
                let v: Vec<T> = items
                    .into_iter()
                    .map(|x| x.try_into().map_err(D::Error::custom))
                    .collect::<Result<_, _>>()?;
                Ok(PerAxis::Axes(v.try_into().unwrap_or_else(|_| unreachable!())))
            }
            other => other.try_into().map(PerAxis::Uniform).map_err(D::Error::custom),
        }
    }
}

/// A number in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Fraction(pub f64);

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if v > 0.0 && v <= 1.0 {
            Ok(Fraction(v))
        } else {
            Err(serde::de::Error::custom(format!("must lie in (0, 1], got {v}")))
        }
    }
}

/// Fraction of the stability bound used when neither `dt` nor `cfl_factor`
/// is given.
pub const DEFAULT_CFL_FACTOR: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scheme: Parsed<SchemeKind>,
    /// Fraction of the spectral-radius bound; exclusive with `dt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl_factor: Option<Spanned<Fraction>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<Spanned<Time>>,
    #[serde(default)]
    pub steps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<MaterialBlock>,
    #[serde(default, skip_serializing_if = "SourceBlock::is_empty")]
    pub source: SourceBlock,
    #[serde(default)]
    pub outputs: OutputsBlock,
    #[serde(default)]
    pub cfl: CflBlock,
    #[serde(default)]
    pub eig: EigBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub dims: [usize; 3],
    pub spacing: PerAxis<Length>,
    #[serde(default = "default_boundaries")]
    pub boundaries: PerAxis<Parsed<BoundaryKind>>,
    #[serde(default)]
    pub pml: PmlBlock,
}

fn default_boundaries() -> PerAxis<Parsed<BoundaryKind>> {
    PerAxis::Uniform(Parsed(BoundaryKind::Periodic))
}

impl GridBlock {
    pub fn build(&self) -> Result<YeeGrid, CliError> {
        let spacing = self.spacing.resolve().map(|l| l.internal());
        let boundaries = self.boundaries.resolve().map(|b| AxisBoundary::both(b.0));
        Ok(YeeGrid::new(self.dims, spacing, boundaries)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PmlBlock {
    pub m: f64,
    pub cells: usize,
    pub pairing: Parsed<PmlPairing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_max: Option<f64>,
}

impl Default for PmlBlock {
    fn default() -> Self {
        let p = PmlParams::default();
        PmlBlock {
            m: p.m,
            cells: p.n_cells,
            pairing: Parsed(p.pairing),
            sigma_max: None,
            kappa_max: None,
        }
    }
}

impl PmlBlock {
    pub fn params(&self) -> PmlParams {
        PmlParams {
            m: self.m,
            n_cells: self.cells,
            sigma_max: self.sigma_max,
            kappa_max: self.kappa_max,
            pairing: self.pairing.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutName {
    Vacuum,
    Sphere,
    Cube,
    Random,
}

/// Exactly one of `layout`, `file` or a `[material.cloak]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawMaterial")]
pub struct MaterialBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layout: Option<LayoutName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<[Length; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<Length>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub low: Option<[Length; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub high: Option<[Length; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cloak: Option<CloakBlock>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    layout: Option<LayoutName>,
    gamma: Option<f64>,
    center: Option<[Length; 3]>,
    radius: Option<Length>,
    low: Option<[Length; 3]>,
    high: Option<[Length; 3]>,
    weights: Option<[f64; 4]>,
    file: Option<PathBuf>,
    cloak: Option<CloakBlock>,
}

impl TryFrom<RawMaterial> for MaterialBlock {
    type Error = String;

    fn try_from(r: RawMaterial) -> Result<Self, String> {
        let sources = [r.layout.is_some(), r.file.is_some(), r.cloak.is_some()];
        if sources.iter().filter(|s| **s).count() != 1 {
            return Err("give exactly one of `layout`, `file` or a [material.cloak] table".into());
        }
        let needs = |ok: bool, what: &str| if ok { Ok(()) } else { Err(what.to_string()) };
        match r.layout {
            Some(LayoutName::Sphere) => needs(r.center.is_some() && r.radius.is_some(), "a sphere needs `center` and `radius`")?,
            Some(LayoutName::Cube) => needs(r.low.is_some() && r.high.is_some(), "a cube needs `low` and `high`")?,
            _ => {}
        }
        if let Some(g) = r.gamma {
            needs(g > 0.0 && g.is_finite(), "`gamma` must be positive")?;
        }
        Ok(MaterialBlock {
            layout: r.layout,
            gamma: r.gamma,
            center: r.center,
            radius: r.radius,
            low: r.low,
            high: r.high,
            weights: r.weights,
            file: r.file,
            cloak: r.cloak,
        })
    }
}

fn lengths(v: &[Length; 3]) -> [f64; 3] {
    [v[0].internal(), v[1].internal(), v[2].internal()]
}

impl MaterialBlock {
    /// `base` resolves a relative material file path.
    pub fn build(&self, grid: &YeeGrid, seed: u64, base: &Path) -> Result<MaterialGrid, CliError> {
        if let Some(file) = &self.file {
            let path = base.join(file);
            let mut f = std::fs::File::open(&path).map_err(|e| CliError::io(&path, e))?;
            let m = read_material_grid(&mut std::io::BufReader::new(&mut f))?;
            if m.dims() != grid.dims() {
                return Err(CliError::Config(format!(
                    "material file {} has dims {:?}, grid has {:?}",
                    path.display(),
                    m.dims(),
                    grid.dims()
                )));
            }
            return Ok(m);
        }
        if let Some(cloak) = &self.cloak {
            return Ok(aniso_fdtd::cloak::build_cloak(&cloak.spec(grid), grid)?);
        }
        let gamma = self.gamma.unwrap_or(1.0);
        let layout = match self.layout.expect("validated") {
            LayoutName::Vacuum => Layout::Vacuum,
            LayoutName::Sphere => Layout::Sphere {
                center: lengths(self.center.as_ref().expect("validated")),
                radius: self.radius.as_ref().expect("validated").internal(),
            },
            LayoutName::Cube => Layout::Cube {
                low: lengths(self.low.as_ref().expect("validated")),
                high: lengths(self.high.as_ref().expect("validated")),
            },
            LayoutName::Random => Layout::Random {
                weights: self.weights.unwrap_or([0.25; 4]),
            },
        };
        Ok(build_layout(&layout, gamma, grid, Some(seed))?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloakName {
    Smooth,
    Nonsmooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureName {
    #[default]
    Gauss4,
    Center,
}

/// Unset parameters take the reference values (n = 3, depth = 0.8,
/// σ = 80 nm; R1 = 8 nm, R2 = 130 nm, R1' = 40 nm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloakBlock {
    pub kind: CloakName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Length>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<Length>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<Length>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1_prime: Option<Length>,
    /// Defaults to the middle of the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[Length; 3]>,
    #[serde(default)]
    pub quadrature: QuadratureName,
    #[serde(default = "default_cut_axis")]
    pub cut_axis: Parsed<Axis>,
}

fn default_cut_axis() -> Parsed<Axis> {
    Parsed(Axis::Z)
}

impl CloakBlock {
    pub fn kind(&self) -> CloakKind {
        let len = |v: &Option<Length>, d: f64| v.as_ref().map_or(d, |l| l.internal());
        match self.kind {
            CloakName::Smooth => {
                let CloakKind::Smooth { n, depth, sigma } = CloakSpec::smooth_reference([0.0; 3]).kind else {
                    unreachable!()
                };
                CloakKind::Smooth {
                    n: self.n.unwrap_or(n),
                    depth: self.depth.unwrap_or(depth),
                    sigma: len(&self.sigma, sigma),
                }
            }
            CloakName::Nonsmooth => {
                let CloakKind::Nonsmooth { r1, r2, r1_prime } = CloakSpec::nonsmooth_reference([0.0; 3]).kind else {
                    unreachable!()
                };
                CloakKind::Nonsmooth {
                    r1: len(&self.r1, r1),
                    r2: len(&self.r2, r2),
                    r1_prime: len(&self.r1_prime, r1_prime),
                }
            }
        }
    }

    pub fn center(&self, grid: &YeeGrid) -> [f64; 3] {
        match &self.center {
            Some(c) => lengths(c),
            None => grid.extent().map(|l| 0.5 * l),
        }
    }

    pub fn spec(&self, grid: &YeeGrid) -> CloakSpec {
        let mut spec = CloakSpec::new(self.kind(), self.center(grid));
        spec.quadrature = match self.quadrature {
            QuadratureName::Gauss4 => Quadrature::Gauss4,
            QuadratureName::Center => Quadrature::Center,
        };
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceBlock {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub point: Vec<PointBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane_wave: Option<PlaneWaveBlock>,
}

impl SourceBlock {
    pub fn is_empty(&self) -> bool {
        self.point.is_empty() && self.plane_wave.is_none()
    }
}

fn one() -> f64 {
    1.0
}

/// Gaussian soft source; `t0` defaults to four widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointBlock {
    pub component: Parsed<Component>,
    pub cell: [usize; 3],
    #[serde(default = "one")]
    pub amplitude: f64,
    pub tau: Time,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<Time>,
}

impl PointBlock {
    pub fn build(&self, grid: &YeeGrid) -> Result<PointSource, CliError> {
        let tau = self.tau.internal();
        let t0 = self.t0.as_ref().map_or(4.0 * tau, |t| t.internal());
        let pulse = GaussianPulse::new(self.amplitude, t0, tau)?;
        Ok(PointSource::new(self.component.0, self.cell, pulse, grid)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneWaveBlock {
    #[serde(default = "default_cut_axis")]
    pub axis: Parsed<Axis>,
    /// +1 or -1 along `axis`.
    #[serde(default = "minus_one")]
    pub direction: i32,
    /// Cell index of the injection plane.
    pub plane: usize,
    pub wavelength: Length,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "x_polarized")]
    pub polarization: [f64; 3],
    #[serde(default = "three")]
    pub ramp_periods: f64,
}

fn minus_one() -> i32 {
    -1
}

fn x_polarized() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

fn three() -> f64 {
    3.0
}

impl PlaneWaveBlock {
    pub fn spec(&self) -> TfsfSpec {
        TfsfSpec {
            axis: self.axis.0,
            sign: self.direction,
            plane: self.plane,
            wavelength: self.wavelength.internal(),
            amplitude: self.amplitude,
            polarization: self.polarization,
            ramp_periods: self.ramp_periods,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeBlock {
    pub component: Parsed<Component>,
    pub cell: [usize; 3],
}

/// Half-open cell-index box `[low, high)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxBlock {
    pub low: [usize; 3],
    pub high: [usize; 3],
}

/// Everything beyond the summary is opt-in: a zero cadence disables a
/// stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsBlock {
    pub dir: PathBuf,
    pub energy_every: u64,
    pub snapshot_every: u64,
    pub snapshot_components: Vec<Parsed<Component>>,
    pub probes: Vec<ProbeBlock>,
    pub probe_every: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling_box: Option<BoxBlock>,
    pub nan_check_every: u64,
    /// Also time the other scheme and report the wall-time ratio.
    pub compare_schemes: bool,
}

impl Default for OutputsBlock {
    fn default() -> Self {
        OutputsBlock {
            dir: PathBuf::from("aniso-fdtd-out"),
            energy_every: 0,
            snapshot_every: 0,
            snapshot_components: vec![Parsed(Component::EX)],
            probes: Vec::new(),
            probe_every: 1,
            sampling_box: None,
            nan_check_every: aniso_fdtd::solver::DEFAULT_NAN_CHECK_INTERVAL,
            compare_schemes: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CflBlock {
    pub method: Parsed<CflMethod>,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for CflBlock {
    fn default() -> Self {
        let o = CflOptions::default();
        CflBlock {
            method: Parsed(o.method),
            max_iterations: o.max_iterations,
            tolerance: o.tolerance,
        }
    }
}

impl CflBlock {
    pub fn options(&self, seed: u64) -> CflOptions {
        CflOptions {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            seed,
            method: self.method.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigBlock {
    /// Largest accepted `| |λ| - 1 |`.
    pub tolerance: f64,
}

impl Default for EigBlock {
    fn default() -> Self {
        EigBlock { tolerance: 1e-10 }
    }
}

/// Case names accepted in `[converge] cases`.
pub const CASE_NAMES: [&str; 4] = [
    "averaged_smooth",
    "non_averaged_smooth",
    "averaged_nonsmooth",
    "non_averaged_nonsmooth",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CaseName(pub String);

impl<'de> Deserialize<'de> for CaseName {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if CASE_NAMES.contains(&s.as_str()) {
            Ok(CaseName(s))
        } else {
            Err(serde::de::Error::custom(format!(
                "unknown case '{s}', expected one of {}",
                CASE_NAMES.join(", ")
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeBlock {
    pub wavelength: Length,
    pub domain: [Length; 3],
    pub ppw: Vec<f64>,
    pub cfl_factor: Fraction,
    pub plane_z: Length,
    pub sample_z: [Length; 2],
    pub ramp_periods: f64,
    pub settle_periods: usize,
    pub dft_periods: usize,
    pub pml: PmlBlock,
    pub cases: Vec<CaseName>,
}

impl Default for ConvergeBlock {
    fn default() -> Self {
        let r = StudyConfig::reference();
        ConvergeBlock {
            wavelength: Length::new(r.wavelength),
            domain: r.domain.map(Length::new),
            ppw: r.ppw,
            cfl_factor: Fraction(r.cfl_factor),
            plane_z: Length::new(r.plane_z),
            sample_z: [Length::new(r.sample_z.0), Length::new(r.sample_z.1)],
            ramp_periods: r.ramp_periods,
            settle_periods: r.settle_periods,
            dft_periods: r.dft_periods,
            pml: PmlBlock::default(),
            cases: CASE_NAMES.iter().map(|s| CaseName(s.to_string())).collect(),
        }
    }
}

impl ConvergeBlock {
    pub fn study(&self) -> StudyConfig {
        StudyConfig {
            wavelength: self.wavelength.internal(),
            domain: lengths(&self.domain),
            pml: self.pml.params(),
            ppw: self.ppw.clone(),
            cfl_factor: self.cfl_factor.0,
            plane_z: self.plane_z.internal(),
            sample_z: (self.sample_z[0].internal(), self.sample_z[1].internal()),
            ramp_periods: self.ramp_periods,
            settle_periods: self.settle_periods,
            dft_periods: self.dft_periods,
        }
    }

    pub fn cases(&self) -> Vec<StudyCase> {
        let all = StudyCase::reference_cases();
        self.cases
            .iter()
            .map(|c| all.iter().find(|k| k.label == c.0).expect("validated case name").clone())
            .collect()
    }
}

/// 1-based line and column of a byte offset.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn located(origin: &str, text: &str, span: Option<Range<usize>>, message: &str) -> CliError {
    match span {
        Some(s) => {
            let (line, col) = line_col(text, s.start);
            CliError::Config(format!("{origin}:{line}:{col}: {message}"))
        }
        None => CliError::Config(format!("{origin}: {message}")),
    }
}

impl RunConfig {
    /// Parses and validates; `origin` names the source in messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| located(origin, text, e.span(), e.message().trim_end()))?;
        if let (Some(_), Some(dt)) = (&config.cfl_factor, &config.dt) {
            return Err(located(
                origin,
                text,
                Some(dt.span()),
                "`dt` and `cfl_factor` are mutually exclusive",
            ));
        }
        if let Some(dt) = &config.dt {
            if !(dt.get_ref().internal() > 0.0) {
                return Err(located(origin, text, Some(dt.span()), "`dt` must be positive"));
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize configuration: {e}")))
    }

    pub fn scheme(&self) -> SchemeKind {
        self.scheme.0
    }

    pub fn cfl_factor(&self) -> f64 {
        self.cfl_factor.as_ref().map_or(DEFAULT_CFL_FACTOR, |f| f.get_ref().0)
    }

    pub fn explicit_dt(&self) -> Option<f64> {
        self.dt.as_ref().map(|t| t.get_ref().internal())
    }

    pub fn grid_block(&self) -> Result<&GridBlock, CliError> {
        self.grid
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a [grid] table".into()))
    }

    pub fn material_block(&self) -> Result<&MaterialBlock, CliError> {
        self.material
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a [material] table".into()))
    }
}
