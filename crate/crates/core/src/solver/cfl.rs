//! Time-step bound `Δt ≤ 2/√ρ(C_h M_ζ C_e M_ξ)`.
//!
//! The curl-curl operator `K` is self-adjoint and positive semi-definite in
//! the inner product weighted by `M_ξ`. Both estimators below work in that
//! inner product, so every estimate is a Rayleigh quotient of `K` and rises
//! monotonically towards `ρ` from below.
//!
//! Plain power iteration converges like `(λ₂/λ₁)^{2k}`, which stalls on the
//! clustered top of the spectrum of large grids. The default estimator runs
//! the same matrix-free iteration but keeps the three-term Lanczos
//! recurrence and takes the largest Ritz value of the tridiagonal
//! projection, at the cost of two extra stored vectors.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Operators, SchemeKind};
use crate::lattice::YeeGrid;
use crate::materials::MaterialGrid;
use crate::{Error, Result};

type Field3 = [Vec<f64>; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CflMethod {
    Power,
    #[default]
    Lanczos,
}

impl fmt::Display for CflMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CflMethod::Power => "power",
            CflMethod::Lanczos => "lanczos",
        })
    }
}

impl FromStr for CflMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "power" => Ok(CflMethod::Power),
            "lanczos" => Ok(CflMethod::Lanczos),
            other => Err(Error::InvalidArgument(format!(
                "unknown CFL estimator '{other}', expected 'power' or 'lanczos'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub method: CflMethod,
}

impl Default for CflOptions {
    fn default() -> Self {
        CflOptions {
            max_iterations: 200,
            tolerance: 1e-8,
            seed: 0x5eed,
            method: CflMethod::Lanczos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflReport {
    pub dt_max: f64,
    pub spectral_radius: f64,
    pub iterations: usize,
    /// Relative change of the estimate in the final iteration.
    pub relative_change: f64,
    pub method: CflMethod,
}

/// Closed-form bound for vacuum, `1/√(Σ 1/Δ²)`. Exact on periodic grids
/// with even sizes and conservative otherwise, since the discrete
/// curl-curl spectrum never exceeds `4 Σ 1/Δ²`.
pub fn vacuum_dt_bound(grid: &YeeGrid) -> f64 {
    1.0 / grid.spacing().iter().map(|d| 1.0 / (d * d)).sum::<f64>().sqrt()
}

pub fn compute_cfl(materials: &MaterialGrid, grid: &YeeGrid, scheme: SchemeKind) -> Result<CflReport> {
    compute_cfl_with(materials, grid, scheme, CflOptions::default())
}

pub fn compute_cfl_with(
    materials: &MaterialGrid,
    grid: &YeeGrid,
    scheme: SchemeKind,
    opts: CflOptions,
) -> Result<CflReport> {
    if opts.max_iterations == 0 || !(opts.tolerance > 0.0) {
        return Err(Error::InvalidArgument("CFL estimator needs iterations and a positive tolerance".into()));
    }
    let ops = Operators::new(grid, materials, scheme)?;
    let n = grid.num_cells();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Field3 = [0, 1, 2].map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect());
    let mut k = CurlCurl::new(&ops, n);
    match opts.method {
        CflMethod::Power => power(&mut k, start, &opts),
        CflMethod::Lanczos => lanczos(&mut k, start, &opts),
    }
}

/// Applies `K` with scratch space for the intermediate B and H.
struct CurlCurl<'a> {
    ops: &'a Operators,
    b: Field3,
    h: Field3,
}

impl<'a> CurlCurl<'a> {
    fn new(ops: &'a Operators, n: usize) -> Self {
        CurlCurl {
            ops,
            b: zeros(n),
            h: zeros(n),
        }
    }

    /// `e = M_ξ v`.
    fn weight(&self, e: &mut Field3, v: &Field3) {
        self.ops.electric(e, v);
    }

    /// `out = C_h M_ζ C_e e` where `e = M_ξ v` is already known.
    fn apply(&mut self, out: &mut Field3, e: &Field3) {
        self.b.iter_mut().for_each(|c| c.fill(0.0));
        self.ops.curl_e(&mut self.b, e, 1.0);
        self.ops.magnetic(&mut self.h, &self.b);
        out.iter_mut().for_each(|c| c.fill(0.0));
        self.ops.curl_h(out, &self.h, 1.0);
    }
}

fn zeros(n: usize) -> Field3 {
    [vec![0.0; n], vec![0.0; n], vec![0.0; n]]
}

fn dot(x: &Field3, y: &Field3) -> f64 {
    x.iter()
        .zip(y)
        .map(|(p, q)| p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

fn scale_into(out: &mut Field3, x: &Field3, s: f64) {
    for (o, v) in out.iter_mut().zip(x) {
        for (a, b) in o.iter_mut().zip(v) {
            *a = s * b;
        }
    }
}

fn report(estimate: f64, iterations: usize, change: f64, method: CflMethod) -> Result<CflReport> {
    if !(estimate > 0.0 && estimate.is_finite()) {
        return Err(Error::Analysis(format!("spectral radius estimate {estimate} is not positive")));
    }
    Ok(CflReport {
        dt_max: 2.0 / estimate.sqrt(),
        spectral_radius: estimate,
        iterations,
        relative_change: change,
        method,
    })
}

fn check_weight(den: f64) -> Result<()> {
    if den > 0.0 && den.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidMaterial("material matrix is not positive definite".into()))
    }
}

fn power(k: &mut CurlCurl, mut v: Field3, opts: &CflOptions) -> Result<CflReport> {
    let n = v[0].len();
    let (mut e, mut kv) = (zeros(n), zeros(n));
    let mut estimate = 0.0;
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        k.weight(&mut e, &v);
        k.apply(&mut kv, &e);
        let den = dot(&e, &v);
        check_weight(den)?;
        let rq = dot(&e, &kv) / den;
        if estimate > 0.0 {
            change = ((rq - estimate) / rq).abs();
        }
        estimate = rq;
        if change < opts.tolerance {
            return report(estimate, it, change, CflMethod::Power);
        }
        let norm = dot(&kv, &kv).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Analysis("curl-curl operator annihilated the iterate".into()));
        }
        scale_into(&mut v, &kv, 1.0 / norm);
    }
    Err(Error::CflNotConverged {
        iterations: opts.max_iterations,
        last_estimate: estimate,
        relative_change: change,
    })
}

fn lanczos(k: &mut CurlCurl, start: Field3, opts: &CflOptions) -> Result<CflReport> {
    let n = start[0].len();
    // v_j and e_j = M_ξ v_j are M_ξ-normalised.
    let mut e = zeros(n);
    k.weight(&mut e, &start);
    let norm0 = dot(&e, &start);
    check_weight(norm0)?;
    let s = 1.0 / norm0.sqrt();
    let mut v = zeros(n);
    scale_into(&mut v, &start, s);
    let mut e_cur = zeros(n);
    scale_into(&mut e_cur, &e, s);
    let mut v_prev = zeros(n);
    let mut w = zeros(n);
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut beta_prev = 0.0;
    let mut estimate = 0.0;
    let mut change = f64::INFINITY;

    for it in 1..=opts.max_iterations {
        k.apply(&mut w, &e_cur);
        let alpha = dot(&e_cur, &w);
        for a in 0..3 {
            for ((wi, vi), pi) in w[a].iter_mut().zip(&v[a]).zip(&v_prev[a]) {
                *wi -= alpha * vi + beta_prev * pi;
            }
        }
        alphas.push(alpha);
        let ritz = largest_tridiagonal_eigenvalue(&alphas, &betas);
        if estimate > 0.0 {
            change = ((ritz - estimate) / ritz).abs();
        }
        estimate = ritz;
        if change < opts.tolerance {
            return report(estimate, it, change, CflMethod::Lanczos);
        }
        k.weight(&mut e, &w);
        let beta2 = dot(&e, &w);
        if !(beta2 > 1e-28 * alpha.abs().max(1.0) * alpha.abs().max(1.0)) {
            // Invariant subspace: the Ritz values are exact.
            return report(estimate, it, 0.0, CflMethod::Lanczos);
        }
        let beta = beta2.sqrt();
        betas.push(beta);
        std::mem::swap(&mut v_prev, &mut v);
        scale_into(&mut v, &w, 1.0 / beta);
        scale_into(&mut e_cur, &e, 1.0 / beta);
        beta_prev = beta;
    }
    Err(Error::CflNotConverged {
        iterations: opts.max_iterations,
        last_estimate: estimate,
        relative_change: change,
    })
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`
/// (Sturm sequence).
fn count_below(alphas: &[f64], betas: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &a) in alphas.iter().enumerate() {
        let b2 = if i > 0 { betas[i - 1] * betas[i - 1] } else { 0.0 };
        q = a - x - if i > 0 { b2 / q } else { 0.0 };
        if q == 0.0 {
            q = -f64::EPSILON * (a.abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of the tridiagonal matrix with diagonal `alphas` and
/// off-diagonal `betas`, by bisection.
fn largest_tridiagonal_eigenvalue(alphas: &[f64], betas: &[f64]) -> f64 {
    let m = alphas.len();
    let off = |i: usize| -> f64 {
        let l = if i > 0 { betas[i - 1].abs() } else { 0.0 };
        let r = if i + 1 < m { betas[i].abs() } else { 0.0 };
        l + r
    };
    let mut lo = (0..m).map(|i| alphas[i] - off(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..m).map(|i| alphas[i] + off(i)).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(alphas, betas, mid) < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
