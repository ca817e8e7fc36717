//! Approximants built from values on a grid: padding of finite vectors,
//! piecewise-linear and step interpolants, restriction and taper.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::metrics::{sup_abs_on, two_sided_modulus_on};
use crate::paths::{Path, PlPath, StepPath, TaperedPath};

/// Weights `a_t`, `b_t` of the linear interpolant between the grid points
/// `⌊td⌋/d` and `(⌊td⌋+1)/d`, with `d = 2^level`.
///
/// At `t = 1` the upper grid point lies outside the grid; `b_1 = 0` so the
/// combination degenerates to the last grid value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpolationWeights {
    pub t: f64,
    pub level: u32,
    /// `⌊td⌋`.
    pub cell: u64,
    pub a: f64,
    pub b: f64,
}

impl InterpolationWeights {
    pub fn new(t: f64, level: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return domain(format!("t = {t} outside [0, 1]"));
        }
        if level > 40 {
            return domain(format!("grid level {level} is too fine"));
        }
        let d = (level as f64).exp2();
        let cell = (t * d).floor();
        // Both products are exact for dyadic d, so a + b = 1 up to one rounding.
        let b = d * (t - cell / d);
        let a = d * ((cell + 1.0) / d - t);
        Ok(Self {
            t,
            level,
            cell: cell as u64,
            a,
            b,
        })
    }
}

/// A finite vector viewed as a sequence `(y_1, …, y_n, 0, 0, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedSeries {
    values: Vec<f64>,
}

impl PaddedSeries {
    /// Term at the 1-based `index`; zero beyond the stored values.
    pub fn get(&self, index: usize) -> f64 {
        match index {
            0 => 0.0,
            i => self.values.get(i - 1).copied().unwrap_or(0.0),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The first `k` terms, padded with zeros as needed.
    pub fn head(&self, k: usize) -> Vec<f64> {
        (1..=k).map(|i| self.get(i)).collect()
    }
}

pub fn pad_time_series(y: &[f64]) -> PaddedSeries {
    PaddedSeries { values: y.to_vec() }
}

fn grid(d: usize) -> Vec<f64> {
    (0..=d).map(|k| k as f64 / d as f64).collect()
}

/// Piecewise-linear path on `[0, 1]` through `z_k` at `k/d`, `d = len - 1`.
/// A single value gives the constant path.
pub fn linear_interpolant(z: &[f64]) -> Result<PlPath> {
    match z.len() {
        0 => domain("interpolation needs at least one value"),
        1 => PlPath::new(vec![0.0, 1.0], vec![z[0], z[0]]),
        n => PlPath::new(grid(n - 1), z.to_vec()),
    }
}

/// Step path on `[0, 1]` taking `z_k` on `[k/d, (k+1)/d)` and `z_d` at 1.
pub fn step_interpolant(z: &[f64]) -> Result<StepPath> {
    match z.len() {
        0 => domain("interpolation needs at least one value"),
        1 => StepPath::constant(z[0], 1.0),
        n => StepPath::new(grid(n - 1), z.to_vec(), 1.0),
    }
}

/// Step path on `[0, ∞)` on the level-`n` grid of `[0, n]`, frozen at the
/// last value after `n`. Expects `n·2^n + 1` values.
pub fn halfline_step_interpolant(z: &[f64], level: u32) -> Result<StepPath> {
    if level > 24 {
        return domain(format!("level {level} is too fine for a half-line grid"));
    }
    let per_unit = 1usize << level;
    let want = level as usize * per_unit + 1;
    if z.len() != want {
        return domain(format!("level {level} needs {want} values, got {}", z.len()));
    }
    let knots = (0..want).map(|k| k as f64 / per_unit as f64).collect();
    StepPath::new(knots, z.to_vec(), f64::INFINITY)
}

/// Restriction `r_t x` to `[0, t]`.
pub fn restrict(x: &Path, t: f64) -> Result<Path> {
    x.restrict(t)
}

/// `ψ_m x = g_m · x` on `[0, m]`, kept in product form.
pub fn taper(x: &Path, m: u32) -> Result<Path> {
    if m == 0 {
        return domain("taper index must be at least 1");
    }
    let base = x.restrict(m as f64)?;
    Ok(Path::Tapered(TaperedPath::new(base, m)))
}

/// Both sides of the grid-snapping identities for a step interpolant: the
/// windowed two-sided modulus and windowed sup over `[0, T]` and over
/// `[0, ⌊T 2^n⌋ / 2^n]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaProbe {
    pub two_sided: (f64, f64),
    pub sup: (f64, f64),
}

impl LemmaProbe {
    pub fn holds(&self) -> bool {
        self.two_sided.0 == self.two_sided.1 && self.sup.0 == self.sup.1
    }
}

/// Evaluates both sides on the step path through `z` on the level-`n` grid
/// (frozen after the last grid point).
pub fn grid_snap_sup_identity_check(z: &[f64], level: u32, horizon: f64, delta: f64) -> Result<LemmaProbe> {
    if z.is_empty() {
        return domain("no grid values");
    }
    if !(delta > 0.0 && delta < horizon) {
        return domain(format!("need 0 < δ < T, got δ = {delta}, T = {horizon}"));
    }
    let scale = (level as f64).exp2();
    let knots = (0..z.len()).map(|k| k as f64 / scale).collect();
    let path: Path = StepPath::new(knots, z.to_vec(), f64::INFINITY)?.into();
    let snapped = (horizon * scale).floor() / scale;

    let side = |end: f64| -> Result<(f64, f64)> {
        if end == 0.0 {
            return Ok((0.0, path.eval(0.0)?.abs()));
        }
        let r = path.restrict(end)?;
        Ok((two_sided_modulus_on(&r, delta, end)?, sup_abs_on(&r, end)?))
    };
    let (w_full, s_full) = side(horizon)?;
    let (w_snap, s_snap) = side(snapped)?;
    Ok(LemmaProbe {
        two_sided: (w_full, w_snap),
        sup: (s_full, s_snap),
    })
}
