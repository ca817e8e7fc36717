//! Real-valued paths on `[0, T]` and `[0, ∞)`.
//!
//! Two concrete representations cover everything the approximants produce:
//! right-continuous step paths ([`StepPath`]) and continuous piecewise-linear
//! paths ([`PlPath`]). A tapered path ([`TaperedPath`]) keeps a base path and
//! multiplies by the taper profile at evaluation time.

use crate::error::{domain, Result};

/// Grid `{k / 2^level}` on `[0, horizon]`, the last cell clipped at the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicGrid {
    level: u32,
    horizon: f64,
}

impl DyadicGrid {
    pub fn new(level: u32, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return domain(format!("grid horizon must be positive and finite, got {horizon}"));
        }
        if level > 40 {
            return domain(format!("grid level {level} is too fine"));
        }
        Ok(Self { level, horizon })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn spacing(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn points(&self) -> Vec<f64> {
        let scale = (self.level as f64).exp2();
        let last = (self.horizon * scale).ceil() as u64;
        let mut pts: Vec<f64> = (0..last).map(|k| k as f64 / scale).collect();
        pts.push(self.horizon);
        pts
    }

    pub fn len(&self) -> usize {
        (self.horizon * (self.level as f64).exp2()).ceil() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn check_knots(knots: &[f64]) -> Result<()> {
    if knots.is_empty() {
        return domain("a path needs at least one knot");
    }
    if knots[0] != 0.0 {
        return domain(format!("first knot must be 0, got {}", knots[0]));
    }
    for w in knots.windows(2) {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return domain(format!("knots must be finite and strictly increasing ({} then {})", w[0], w[1]));
        }
    }
    Ok(())
}

fn check_values(values: &[f64], knots: &[f64]) -> Result<()> {
    if values.len() != knots.len() {
        return domain(format!("{} values for {} knots", values.len(), knots.len()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return domain(format!("non-finite path value {v}"));
    }
    Ok(())
}

/// Index of the last knot `<= t`. Requires `t >= knots[0]`.
fn last_at_or_before(knots: &[f64], t: f64) -> usize {
    knots.partition_point(|&k| k <= t) - 1
}

/// Right-continuous piecewise-constant path: `x(t)` is the value of the last
/// breakpoint `<= t`. The horizon may be `+∞`, in which case the final value
/// is held forever.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPath {
    knots: Vec<f64>,
    values: Vec<f64>,
    horizon: f64,
}

impl StepPath {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, horizon: f64) -> Result<Self> {
        check_knots(&knots)?;
        check_values(&values, &knots)?;
        if !(horizon > 0.0) || horizon.is_nan() {
            return domain(format!("horizon must be positive, got {horizon}"));
        }
        if *knots.last().unwrap() > horizon {
            return domain("breakpoint beyond horizon");
        }
        Ok(Self { knots, values, horizon })
    }

    pub fn constant(value: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![value], horizon)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Breakpoints after the origin, i.e. the times where the path may jump.
    pub fn jump_times(&self) -> &[f64] {
        &self.knots[1..]
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.horizon) {
            return domain(format!("t = {t} outside [0, {}]", self.horizon));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.values[last_at_or_before(&self.knots, t)])
    }

    /// `x(t-)`: value of the last breakpoint strictly before `t`.
    pub fn left_limit(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return domain(format!("left limit needs t > 0, got {t}"));
        }
        self.check_time(t)?;
        let idx = self.knots.partition_point(|&k| k < t) - 1;
        Ok(self.values[idx])
    }

    /// Merge consecutive breakpoints carrying equal values.
    pub fn normalize(&self) -> StepPath {
        let mut knots = vec![self.knots[0]];
        let mut values = vec![self.values[0]];
        for (&k, &v) in self.knots.iter().zip(&self.values).skip(1) {
            if v != *values.last().unwrap() {
                knots.push(k);
                values.push(v);
            }
        }
        StepPath { knots, values, horizon: self.horizon }
    }

    /// Restriction to `[0, t]`.
    pub fn restrict(&self, t: f64) -> Result<StepPath> {
        if !(t > 0.0) {
            return domain(format!("restriction time must be positive, got {t}"));
        }
        if t > self.horizon {
            return domain(format!("restriction time {t} beyond horizon {}", self.horizon));
        }
        let keep = self.knots.partition_point(|&k| k <= t);
        Ok(StepPath {
            knots: self.knots[..keep].to_vec(),
            values: self.values[..keep].to_vec(),
            horizon: t,
        })
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Continuous path, linear between consecutive knots. The horizon is the last
/// knot.
#[derive(Debug, Clone, PartialEq)]
pub struct PlPath {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PlPath {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_knots(&knots)?;
        check_values(&values, &knots)?;
        if knots.len() < 2 {
            return domain("a piecewise-linear path needs at least two knots");
        }
        Ok(Self { knots, values })
    }

    pub fn on_grid(grid: &DyadicGrid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid.points(), values)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.horizon()) {
            return domain(format!("t = {t} outside [0, {}]", self.horizon()));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        let i = last_at_or_before(&self.knots, t);
        if i + 1 == self.knots.len() {
            return self.values[i];
        }
        let (k0, k1) = (self.knots[i], self.knots[i + 1]);
        let b = (t - k0) / (k1 - k0);
        let a = (k1 - t) / (k1 - k0);
        self.values[i] * a + self.values[i + 1] * b
    }

    pub fn restrict(&self, t: f64) -> Result<PlPath> {
        if !(t > 0.0) || t > self.horizon() {
            return domain(format!("restriction time {t} outside (0, {}]", self.horizon()));
        }
        let keep = self.knots.partition_point(|&k| k < t);
        let mut knots = self.knots[..keep].to_vec();
        let mut values = self.values[..keep].to_vec();
        knots.push(t);
        values.push(self.eval_unchecked(t));
        Ok(PlPath { knots, values })
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `ψ_m x(t) = g_m(t) x(t)` on `[0, m]`, kept in product form.
#[derive(Debug, Clone, PartialEq)]
pub struct TaperedPath {
    base: Box<Path>,
    m: u32,
}

impl TaperedPath {
    pub(crate) fn new(base: Path, m: u32) -> Self {
        Self { base: Box::new(base), m }
    }

    pub fn base(&self) -> &Path {
        &self.base
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// The profile `g_m`: 1 up to `m - 1`, linear down to 0 at `m`.
    pub fn profile(m: u32, t: f64) -> f64 {
        let m = m as f64;
        if t <= m - 1.0 {
            1.0
        } else if t >= m {
            0.0
        } else {
            m - t
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.m as f64) {
            return domain(format!("t = {t} outside [0, {}]", self.m));
        }
        Ok(Self::profile(self.m, t) * self.base.eval(t)?)
    }
}

/// Any of the supported path representations.
#[derive(Debug, Clone, PartialEq)]
pub enum Path {
    Step(StepPath),
    Linear(PlPath),
    Tapered(TaperedPath),
}

impl Path {
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Path::Step(p) => p.eval(t),
            Path::Linear(p) => p.eval(t),
            Path::Tapered(p) => p.eval(t),
        }
    }

    /// `x(t-)`; equals `x(t)` for continuous representations.
    pub fn left_value(&self, t: f64) -> Result<f64> {
        match self {
            Path::Step(p) => p.left_limit(t),
            Path::Linear(p) => p.eval(t),
            Path::Tapered(p) => {
                let base = p.base.left_value(t)?;
                Ok(TaperedPath::profile(p.m, t) * base)
            }
        }
    }

    pub fn horizon(&self) -> f64 {
        match self {
            Path::Step(p) => p.horizon(),
            Path::Linear(p) => p.horizon(),
            Path::Tapered(p) => p.m as f64,
        }
    }

    /// Times at which the representation changes regime (breakpoints or knots).
    pub fn knots(&self) -> Vec<f64> {
        match self {
            Path::Step(p) => p.knots().to_vec(),
            Path::Linear(p) => p.knots().to_vec(),
            Path::Tapered(p) => {
                let mut k = p.base.knots();
                let m = p.m as f64;
                k.retain(|&t| t <= m);
                k.extend([(m - 1.0).max(0.0), m]);
                k.sort_by(f64::total_cmp);
                k.dedup();
                k
            }
        }
    }

    pub fn restrict(&self, t: f64) -> Result<Path> {
        match self {
            Path::Step(p) => p.restrict(t).map(Path::Step),
            Path::Linear(p) => p.restrict(t).map(Path::Linear),
            Path::Tapered(_) => domain("restricting a tapered path is not supported"),
        }
    }
}

impl From<StepPath> for Path {
    fn from(p: StepPath) -> Self {
        Path::Step(p)
    }
}

impl From<PlPath> for Path {
    fn from(p: PlPath) -> Self {
        Path::Linear(p)
    }
}

/// Strictly increasing, continuous, piecewise-linear bijection of `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reparametrization {
    knots: Vec<f64>,
    images: Vec<f64>,
}

impl Reparametrization {
    pub fn new(knots: Vec<f64>, images: Vec<f64>) -> Result<Self> {
        check_knots(&knots)?;
        check_knots(&images)?;
        if knots.len() != images.len() || knots.len() < 2 {
            return domain("reparametrization needs matching knot/image lists of length >= 2");
        }
        if knots.last() != images.last() {
            return domain("reparametrization must fix the horizon");
        }
        Ok(Self { knots, images })
    }

    pub fn identity(horizon: f64) -> Result<Self> {
        Self::new(vec![0.0, horizon], vec![0.0, horizon])
    }

    /// Build from interior `(s, λ(s))` pairs; endpoints are added.
    pub fn through(horizon: f64, pairs: &[(f64, f64)]) -> Result<Self> {
        let mut knots = vec![0.0];
        let mut images = vec![0.0];
        for &(s, u) in pairs {
            knots.push(s);
            images.push(u);
        }
        knots.push(horizon);
        images.push(horizon);
        Self::new(knots, images)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn images(&self) -> &[f64] {
        &self.images
    }

    pub fn horizon(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn eval(&self, t: f64) -> f64 {
        interp(&self.knots, &self.images, t)
    }

    pub fn inverse(&self) -> Reparametrization {
        Reparametrization {
            knots: self.images.clone(),
            images: self.knots.clone(),
        }
    }

    /// `sup_t |λ(t) - t|`, attained at a knot.
    pub fn sup_displacement(&self) -> f64 {
        self.knots
            .iter()
            .zip(&self.images)
            .fold(0.0, |m, (s, u)| m.max((u - s).abs()))
    }

    /// `sup_{s<t} |log((λt - λs)/(t - s))|`. Chord slopes are averages of
    /// segment slopes, so the supremum is the largest segment log-slope.
    pub fn log_slope_norm(&self) -> f64 {
        self.knots
            .windows(2)
            .zip(self.images.windows(2))
            .fold(0.0, |m, (s, u)| m.max(((u[1] - u[0]) / (s[1] - s[0])).ln().abs()))
    }

    /// `t ↦ x(λ(t))`.
    pub fn compose(&self, path: &Path) -> Result<Path> {
        let horizon = self.horizon();
        if path.horizon() != horizon {
            return domain(format!(
                "reparametrization horizon {horizon} differs from path horizon {}",
                path.horizon()
            ));
        }
        let inv = self.inverse();
        match path {
            Path::Step(p) => {
                let mut knots: Vec<f64> = p.knots().iter().map(|&k| inv.eval(k)).collect();
                knots[0] = 0.0;
                for i in 1..knots.len() {
                    if knots[i] <= knots[i - 1] {
                        return domain("reparametrized breakpoints collapsed in floating point");
                    }
                }
                StepPath::new(knots, p.values().to_vec(), horizon).map(Path::Step)
            }
            Path::Linear(p) => {
                let mut knots: Vec<f64> = self.knots.clone();
                knots.extend(p.knots().iter().map(|&k| inv.eval(k)));
                knots.sort_by(f64::total_cmp);
                knots.dedup();
                let values = knots
                    .iter()
                    .map(|&s| p.eval_unchecked(self.eval(s).clamp(0.0, horizon)))
                    .collect();
                PlPath::new(knots, values).map(Path::Linear)
            }
            Path::Tapered(_) => domain("reparametrizing a tapered path is not supported"),
        }
    }
}

fn interp(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    if t <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if t >= xs[last] {
        return ys[last];
    }
    let i = last_at_or_before(xs, t);
    if t == xs[i] {
        return ys[i];
    }
    let w = (t - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}
